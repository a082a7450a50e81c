//! The three experiment drivers: step trajectories, Lloyd post-processing,
//! and fixed wall-clock deadlines. All arms of one experiment share the
//! seeding per seed: the seeding RNG is cloned at the moment seeding ends,
//! so every algorithm continues from an identical stream.

use std::time::Instant;

use rayon::prelude::*;

use crate::bench::spec::{AlgorithmSpec, ExperimentSpec};
use crate::bench::table::{ResultRow, ResultTable};
use crate::dataset::{cost, Dataset, Point};
use crate::error::Result;
use crate::lloyd::lloyd_iterate;
use crate::local_search::{run_steps, LsConfig, Trajectory};
use crate::nine_eps::{nine_eps_run_steps, NineEpsConfig};
use crate::seeding::{kmeanspp_seed, rng_from_seed, SeedRng};
use crate::state::CentersState;

/// Seeding shared by every arm at one seed.
struct SeededRun {
    seed: u64,
    init: Vec<Point>,
    /// RNG state right after seeding; arms clone it.
    rng: SeedRng,
    cost: f64,
    seconds: f64,
}

fn seed_all(data: &Dataset, spec: &ExperimentSpec) -> Result<Vec<SeededRun>> {
    spec.seeds
        .iter()
        .map(|&seed| {
            let mut rng = rng_from_seed(seed);
            let t0 = Instant::now();
            let init = kmeanspp_seed(data, spec.k, &mut rng)?;
            let seconds = t0.elapsed().as_secs_f64();
            let cost = cost(data, &init);
            Ok(SeededRun { seed, init, rng, cost, seconds })
        })
        .collect()
}

fn mean_seed_cost(runs: &[SeededRun]) -> f64 {
    runs.iter().map(|r| r.cost).sum::<f64>() / runs.len() as f64
}

fn seeding_rows(
    spec: &ExperimentSpec,
    label: &str,
    runs: &[SeededRun],
    baseline: f64,
) -> Vec<ResultRow> {
    runs.iter()
        .map(|r| ResultRow {
            dataset: label.to_string(),
            algorithm: "kmpp".into(),
            p: None,
            seed: r.seed,
            k: spec.k,
            phase: "seeding".into(),
            index: 0,
            cost: r.cost,
            relative_cost: r.cost / baseline,
            seconds: r.seconds,
        })
        .collect()
}

/// Runs one arm's local search from the shared seeding; returns the final
/// state and the per-step trajectory. `Kmpp` runs nothing.
fn run_arm(
    data: &Dataset,
    alg: &AlgorithmSpec,
    run: &SeededRun,
    steps: usize,
) -> (CentersState, Trajectory) {
    let mut state = CentersState::build(data, run.init.clone());
    let mut rng = run.rng.clone();
    let trajectory = match alg {
        AlgorithmSpec::Kmpp => Trajectory::default(),
        AlgorithmSpec::NineEps { epsilon, candidate_budget } => {
            let mut cfg = NineEpsConfig::with_epsilon(*epsilon);
            if let Some(budget) = candidate_budget {
                cfg.candidate_budget = *budget;
            }
            let cfg = cfg.resolved(data);
            nine_eps_run_steps(data, &mut state, &mut rng, &cfg, steps)
        }
        _ => {
            let (variant, p) = alg.ls_variant().expect("swap arm");
            let cfg = LsConfig { p, steps, ..LsConfig::default() };
            run_steps(data, &mut state, &mut rng, &cfg, variant)
        }
    };
    (state, trajectory)
}

/// Cost after each local-search step, per algorithm, from shared seedings.
pub fn run_trajectory_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let data = spec.working_dataset()?;
    let label = spec.dataset_label();
    let runs = seed_all(&data, spec)?;
    let baseline = mean_seed_cost(&runs);

    let mut table = ResultTable::new(spec, "trajectory");
    table.rows.extend(seeding_rows(spec, &label, &runs, baseline));

    let arms: Vec<(&AlgorithmSpec, &SeededRun)> = spec
        .algorithms
        .iter()
        .filter(|a| !matches!(a, AlgorithmSpec::Kmpp))
        .flat_map(|a| runs.iter().map(move |r| (a, r)))
        .collect();
    let results: Vec<Vec<ResultRow>> = arms
        .par_iter()
        .map(|(alg, run)| {
            let (_, trajectory) = run_arm(&data, alg, run, spec.steps);
            trajectory
                .records
                .iter()
                .map(|rec| ResultRow {
                    dataset: label.clone(),
                    algorithm: alg.name().into(),
                    p: alg.p(),
                    seed: run.seed,
                    k: spec.k,
                    phase: "step".into(),
                    index: rec.step as u64 + 1,
                    cost: rec.total_cost,
                    relative_cost: rec.total_cost / baseline,
                    seconds: rec.seconds,
                })
                .collect()
        })
        .collect();
    table.rows.extend(results.into_iter().flatten());
    Ok(table)
}

/// Local search as a seeding strategy: after `spec.steps` swap steps, run
/// `spec.lloyd_iters` Lloyd iterations and record each iteration's cost.
/// Index 0 is the post-search cost, before any Lloyd iteration.
pub fn run_lloyd_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let data = spec.working_dataset()?;
    let label = spec.dataset_label();
    let runs = seed_all(&data, spec)?;
    let baseline = mean_seed_cost(&runs);

    let mut table = ResultTable::new(spec, "lloyd");
    table.rows.extend(seeding_rows(spec, &label, &runs, baseline));

    let arms: Vec<(&AlgorithmSpec, &SeededRun)> = spec
        .algorithms
        .iter()
        .flat_map(|a| runs.iter().map(move |r| (a, r)))
        .collect();
    let results: Vec<Vec<ResultRow>> = arms
        .par_iter()
        .map(|(alg, run)| {
            let (state, _) = run_arm(&data, alg, run, spec.steps);
            let t0 = Instant::now();
            let (_, costs) = lloyd_iterate(&data, &state.centers, spec.lloyd_iters);
            let per_iter = if costs.is_empty() {
                0.0
            } else {
                t0.elapsed().as_secs_f64() / costs.len() as f64
            };
            let mut rows = vec![ResultRow {
                dataset: label.clone(),
                algorithm: alg.name().into(),
                p: alg.p(),
                seed: run.seed,
                k: spec.k,
                phase: "lloyd".into(),
                index: 0,
                cost: state.total_cost,
                relative_cost: state.total_cost / baseline,
                seconds: 0.0,
            }];
            rows.extend(costs.iter().enumerate().map(|(i, &c)| ResultRow {
                dataset: label.clone(),
                algorithm: alg.name().into(),
                p: alg.p(),
                seed: run.seed,
                k: spec.k,
                phase: "lloyd".into(),
                index: i as u64 + 1,
                cost: c,
                relative_cost: c / baseline,
                seconds: per_iter,
            }));
            rows
        })
        .collect();
    table.rows.extend(results.into_iter().flatten());
    Ok(table)
}

/// Mean wall time of a Lloyd iteration on this instance, the time unit τ of
/// the deadline experiment. At least three iterations are requested; the
/// average is over however many actually ran before convergence.
fn measure_tau(data: &Dataset, init: &[Point]) -> f64 {
    let t0 = Instant::now();
    let (_, costs) = lloyd_iterate(data, init, 3);
    t0.elapsed().as_secs_f64() / costs.len().max(1) as f64
}

/// Best cost achievable within a wall-clock budget of λ·τ for each λ. One
/// run per (algorithm, seed) at the largest budget records per-step
/// timestamps; each λ row reads off the prefix that a λ·τ deadline would
/// have allowed. A step started before the deadline is always finished, so
/// budgets are exceeded by at most one in-flight step.
pub fn run_deadline_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let data = spec.working_dataset()?;
    let label = spec.dataset_label();
    let runs = seed_all(&data, spec)?;
    let baseline = mean_seed_cost(&runs);
    let lambdas = spec.effective_lambdas();
    let max_lambda = *lambdas.iter().max().expect("nonempty lambdas");

    let tau = measure_tau(&data, &runs[0].init);
    let mut table = ResultTable::new(spec, "deadline");
    table.meta.tau_seconds = Some(tau);
    table.rows.extend(seeding_rows(spec, &label, &runs, baseline));

    // Deadlines race the clock; run arms sequentially so they do not steal
    // each other's cycles.
    for alg in spec.algorithms.iter().filter(|a| !matches!(a, AlgorithmSpec::Kmpp)) {
        let nine_cfg = match alg {
            AlgorithmSpec::NineEps { epsilon, candidate_budget } => {
                let mut cfg = NineEpsConfig::with_epsilon(*epsilon);
                if let Some(b) = candidate_budget {
                    cfg.candidate_budget = *b;
                }
                Some(cfg.resolved(&data))
            }
            _ => None,
        };
        for run in &runs {
            let mut state = CentersState::build(&data, run.init.clone());
            let mut rng = run.rng.clone();
            let budget = f64::from(max_lambda) * tau;
            // (elapsed after step, cost after step), cumulative.
            let mut checkpoints: Vec<(f64, f64)> = Vec::new();
            let t0 = Instant::now();
            while t0.elapsed().as_secs_f64() < budget {
                match &nine_cfg {
                    Some(cfg) => {
                        crate::nine_eps::nine_eps_step(&data, &mut state, cfg, &mut rng);
                    }
                    None => {
                        let (variant, p) = alg.ls_variant().expect("swap arm");
                        let cfg = LsConfig { p, steps: 1, ..LsConfig::default() };
                        run_steps(&data, &mut state, &mut rng, &cfg, variant);
                    }
                }
                checkpoints.push((t0.elapsed().as_secs_f64(), state.total_cost));
            }
            for &lambda in &lambdas {
                let deadline = f64::from(lambda) * tau;
                // Steps whose start time beat the deadline count; start time
                // of step i is the elapsed time after step i−1.
                let mut cost_at = run.cost;
                let mut elapsed_at = 0.0;
                let mut started_before = 0.0;
                for &(after, c) in &checkpoints {
                    if started_before < deadline {
                        cost_at = c;
                        elapsed_at = after;
                    }
                    started_before = after;
                }
                table.rows.push(ResultRow {
                    dataset: label.clone(),
                    algorithm: alg.name().into(),
                    p: alg.p(),
                    seed: run.seed,
                    k: spec.k,
                    phase: "deadline".into(),
                    index: u64::from(lambda),
                    cost: cost_at,
                    relative_cost: cost_at / baseline,
                    seconds: elapsed_at,
                });
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::spec::DatasetSource;
    use crate::synthetic::MixtureSpec;

    fn base_spec(algorithms: Vec<AlgorithmSpec>) -> ExperimentSpec {
        ExperimentSpec {
            dataset: DatasetSource::Synthetic(MixtureSpec::standard(120, 2, 4, 11)),
            name: None,
            k: 4,
            algorithms,
            steps: 6,
            lloyd_iters: 3,
            seeds: vec![1, 2, 3],
            lambdas: vec![],
            subsample: None,
            subsample_seed: 0,
            scale: false,
            scale_before_subsample: false,
        }
    }

    #[test]
    fn zero_steps_leaves_only_seeding_rows() {
        let mut spec = base_spec(vec![AlgorithmSpec::MslsG { p: 2 }]);
        spec.steps = 0;
        let table = run_trajectory_experiment(&spec).unwrap();
        assert!(table.rows.iter().all(|r| r.phase == "seeding"));
        assert_eq!(table.rows.len(), 3);
        let mean_rel: f64 =
            table.rows.iter().map(|r| r.relative_cost).sum::<f64>() / table.rows.len() as f64;
        assert!((mean_rel - 1.0).abs() < 1e-12, "baseline normalizes itself to 1");
    }

    #[test]
    fn trajectory_costs_non_increasing() {
        let spec = base_spec(vec![
            AlgorithmSpec::Ssls,
            AlgorithmSpec::MslsG { p: 2 },
            AlgorithmSpec::Msls { p: 2 },
        ]);
        let table = run_trajectory_experiment(&spec).unwrap();
        for alg in ["ssls", "msls-g", "msls"] {
            for &seed in &spec.seeds {
                let costs: Vec<f64> = table
                    .rows
                    .iter()
                    .filter(|r| r.algorithm == alg && r.seed == seed && r.phase == "step")
                    .map(|r| r.cost)
                    .collect();
                assert_eq!(costs.len(), spec.steps);
                assert!(costs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            }
        }
        // Determinism: a rerun reproduces cost columns exactly.
        let again = run_trajectory_experiment(&spec).unwrap();
        let costs = |t: &ResultTable| t.rows.iter().map(|r| r.cost).collect::<Vec<_>>();
        assert_eq!(costs(&table), costs(&again));
    }

    #[test]
    fn lloyd_mode_appends_iterations() {
        let spec = base_spec(vec![AlgorithmSpec::Kmpp, AlgorithmSpec::MslsG { p: 2 }]);
        let table = run_lloyd_experiment(&spec).unwrap();
        for alg in ["kmpp", "msls-g"] {
            for &seed in &spec.seeds {
                let costs: Vec<f64> = table
                    .rows
                    .iter()
                    .filter(|r| r.algorithm == alg && r.seed == seed && r.phase == "lloyd")
                    .map(|r| r.cost)
                    .collect();
                assert!(!costs.is_empty());
                assert!(costs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            }
        }
    }

    #[test]
    fn lloyd_mode_with_zero_iters_matches_trajectory_finals() {
        let mut spec = base_spec(vec![AlgorithmSpec::MslsG { p: 2 }]);
        spec.lloyd_iters = 0;
        let lloyd = run_lloyd_experiment(&spec).unwrap();
        let traj = run_trajectory_experiment(&spec).unwrap();
        for &seed in &spec.seeds {
            let final_traj = traj
                .rows
                .iter()
                .filter(|r| r.seed == seed && r.phase == "step")
                .last()
                .unwrap()
                .cost;
            let lloyd_rows: Vec<&ResultRow> = lloyd
                .rows
                .iter()
                .filter(|r| r.seed == seed && r.phase == "lloyd")
                .collect();
            assert_eq!(lloyd_rows.len(), 1, "index 0 only");
            assert_eq!(lloyd_rows[0].cost, final_traj);
        }
    }

    #[test]
    fn deadline_costs_non_increasing_in_lambda() {
        let mut spec = base_spec(vec![AlgorithmSpec::Ssls]);
        spec.seeds = vec![5];
        spec.lambdas = vec![1, 2, 4];
        let table = run_deadline_experiment(&spec).unwrap();
        assert!(table.meta.tau_seconds.unwrap() > 0.0);
        let costs: Vec<f64> = table
            .rows
            .iter()
            .filter(|r| r.phase == "deadline")
            .map(|r| r.cost)
            .collect();
        assert_eq!(costs.len(), 3);
        assert!(costs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let seed_cost = table.rows.iter().find(|r| r.phase == "seeding").unwrap().cost;
        assert!(costs.iter().all(|&c| c <= seed_cost + 1e-12), "never worse than seeding");
    }
}
