//! Python bindings for the mskmeans pipeline: datasets, k-means++ seeding,
//! the swap engines, Lloyd refinement, and the approximation bounds.
//! Centers cross the boundary as plain lists of float lists.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use mskmeans::synthetic::MixtureSpec;
use mskmeans::{
    kmeanspp_seed, lloyd_iterate, nine_eps_run_steps, rng_from_seed, run_steps, BoundVariant,
    CentersState, Dataset, LsConfig, LsVariant, NineEpsConfig, Point, SwapBudget, Trajectory,
};

fn to_py_err(e: mskmeans::Error) -> PyErr {
    match e {
        mskmeans::Error::Io(_) | mskmeans::Error::Csv(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn centers_from_lists(rows: Vec<Vec<f64>>, dim: usize) -> PyResult<Vec<Point>> {
    if rows.is_empty() {
        return Err(PyValueError::new_err("need at least one center"));
    }
    rows.into_iter()
        .map(|r| {
            if r.len() != dim {
                Err(PyValueError::new_err(format!(
                    "center has {} coordinates, dataset is {dim}-dimensional",
                    r.len()
                )))
            } else {
                Ok(Point::new(r))
            }
        })
        .collect()
}

fn centers_to_lists(centers: &[Point]) -> Vec<Vec<f64>> {
    centers.iter().map(|c| c.coords.clone()).collect()
}

fn trajectory_costs(t: &Trajectory) -> Vec<f64> {
    t.records.iter().map(|r| r.total_cost).collect()
}

/// A fixed set of points in d-dimensional Euclidean space.
#[pyclass(name = "Dataset", module = "mskmeans_py")]
struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyDataset { inner: Dataset::from_rows(rows).map_err(to_py_err)? })
    }

    /// Planted Gaussian mixture; returns (dataset, planted_means).
    #[staticmethod]
    #[pyo3(signature = (n, dim, components, seed = 0))]
    fn mixture(
        n: usize,
        dim: usize,
        components: usize,
        seed: u64,
    ) -> PyResult<(PyDataset, Vec<Vec<f64>>)> {
        if n == 0 || dim == 0 || components == 0 {
            return Err(PyValueError::new_err("n, dim, and components must be positive"));
        }
        let (data, means) = MixtureSpec::standard(n, dim, components, seed).generate();
        Ok((PyDataset { inner: data }, centers_to_lists(&means)))
    }

    /// Loads a CSV of numeric rows.
    #[staticmethod]
    #[pyo3(signature = (path, delimiter = ',', header = false))]
    fn from_csv(path: &str, delimiter: char, header: bool) -> PyResult<Self> {
        let data = mskmeans::bench::load_csv(path.as_ref(), delimiter as u8, header)
            .map_err(to_py_err)?;
        Ok(PyDataset { inner: data })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    /// Min-max scaled copy (every feature mapped to [0, 1]).
    fn scaled(&self) -> PyDataset {
        PyDataset { inner: mskmeans::bench::minmax_scale(&self.inner) }
    }

    /// k-means cost of the given centers on this dataset.
    fn cost(&self, centers: Vec<Vec<f64>>) -> PyResult<f64> {
        let centers = centers_from_lists(centers, self.inner.dim())?;
        Ok(mskmeans::cost(&self.inner, &centers))
    }

    fn __repr__(&self) -> String {
        format!("Dataset(n={}, dim={})", self.inner.len(), self.inner.dim())
    }
}

/// k-means++ seeding: k centers drawn from the data rows.
#[pyfunction]
#[pyo3(signature = (data, k, seed = 0))]
fn kmeanspp(data: &PyDataset, k: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    if k == 0 {
        return Err(PyValueError::new_err("k must be positive"));
    }
    let mut rng = rng_from_seed(seed);
    let centers = kmeanspp_seed(&data.inner, k, &mut rng).map_err(to_py_err)?;
    Ok(centers_to_lists(&centers))
}

/// Multi-swap local search from the given centers. Returns
/// (final_centers, per_step_costs). `greedy` selects the engine that builds
/// the Out set one cheapest removal at a time; otherwise every size-p
/// subset is scored.
#[pyfunction]
#[pyo3(signature = (data, init, p = 1, steps = 50, seed = 0, greedy = true))]
fn local_search(
    data: &PyDataset,
    init: Vec<Vec<f64>>,
    p: usize,
    steps: usize,
    seed: u64,
    greedy: bool,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    if p == 0 {
        return Err(PyValueError::new_err("p must be positive"));
    }
    let init = centers_from_lists(init, data.inner.dim())?;
    let mut state = CentersState::build(&data.inner, init);
    let mut rng = rng_from_seed(seed);
    let cfg = LsConfig { p, steps, seed, ..LsConfig::default() };
    let variant = if greedy { LsVariant::MslsG } else { LsVariant::Msls };
    let trajectory = run_steps(&data.inner, &mut state, &mut rng, &cfg, variant);
    Ok((centers_to_lists(&state.centers), trajectory_costs(&trajectory)))
}

/// Grid-refined swap search: like `local_search`, but candidate centers are
/// convex combinations over a radius grid instead of raw data points.
#[pyfunction]
#[pyo3(signature = (data, init, epsilon = 0.5, steps = 50, seed = 0, candidate_budget = None))]
fn nine_eps(
    data: &PyDataset,
    init: Vec<Vec<f64>>,
    epsilon: f64,
    steps: usize,
    seed: u64,
    candidate_budget: Option<usize>,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(PyValueError::new_err("epsilon must be in the open interval (0, 1)"));
    }
    let init = centers_from_lists(init, data.inner.dim())?;
    let mut cfg = NineEpsConfig::with_epsilon(epsilon);
    if let Some(budget) = candidate_budget {
        if budget == 0 {
            return Err(PyValueError::new_err("candidate_budget must be positive"));
        }
        cfg.candidate_budget = budget;
    }
    let cfg = cfg.resolved(&data.inner);
    let mut state = CentersState::build(&data.inner, init);
    let mut rng = rng_from_seed(seed);
    let trajectory = nine_eps_run_steps(&data.inner, &mut state, &mut rng, &cfg, steps);
    Ok((centers_to_lists(&state.centers), trajectory_costs(&trajectory)))
}

/// Lloyd iterations from the given centers. Returns
/// (final_centers, per_iteration_costs).
#[pyfunction]
#[pyo3(signature = (data, centers, iters = 10))]
fn lloyd(
    data: &PyDataset,
    centers: Vec<Vec<f64>>,
    iters: usize,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let centers = centers_from_lists(centers, data.inner.dim())?;
    let (finals, costs) = lloyd_iterate(&data.inner, &centers, iters);
    Ok((centers_to_lists(&finals), costs))
}

/// Squared approximation bound for p-swap local search; p = None means the
/// p → ∞ limit. `variant` is "msls" or "kanungo".
#[pyfunction]
#[pyo3(signature = (p = None, variant = "msls"))]
fn eta_bound(p: Option<u32>, variant: &str) -> PyResult<f64> {
    let budget = match p {
        Some(0) => return Err(PyValueError::new_err("p must be positive (or None for ∞)")),
        Some(p) => SwapBudget::Finite(p),
        None => SwapBudget::Infinite,
    };
    let variant = match variant {
        "msls" => BoundVariant::Msls,
        "kanungo" => BoundVariant::Kanungo,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown bound variant {other:?}; expected \"msls\" or \"kanungo\""
            )))
        }
    };
    Ok(mskmeans::eta_bound(budget, variant))
}

#[pymodule]
fn mskmeans_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(kmeanspp, m)?)?;
    m.add_function(wrap_pyfunction!(local_search, m)?)?;
    m.add_function(wrap_pyfunction!(nine_eps, m)?)?;
    m.add_function(wrap_pyfunction!(lloyd, m)?)?;
    m.add_function(wrap_pyfunction!(eta_bound, m)?)?;
    Ok(())
}
