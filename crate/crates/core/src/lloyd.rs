//! Lloyd's iteration, used both as a standalone refiner and as the
//! postprocessing stage of the seeding experiments.

use crate::dataset::{nearest_center, pairwise_sum, Dataset, Point};

/// Relative cost improvement under which the iteration stops early.
pub const CONVERGENCE_REL_TOL: f64 = 1e-12;

/// Runs at most `iters` Lloyd iterations from `centers`: assign each point
/// to its nearest center (ties to the lowest index), move every center to
/// its cluster mean, and reseed any emptied center at the point currently
/// paying the most. Returns the final centers and the cost after each
/// executed iteration; stops early once the relative improvement falls
/// below `CONVERGENCE_REL_TOL`.
pub fn lloyd_iterate(
    data: &Dataset,
    centers: &[Point],
    iters: usize,
) -> (Vec<Point>, Vec<f64>) {
    assert!(!centers.is_empty(), "lloyd_iterate: empty center list");
    let k = centers.len();
    let n = data.len();
    let dim = data.dim();
    let mut centers = centers.to_vec();
    let mut costs = Vec::with_capacity(iters);
    let mut point_cost = vec![0.0; n];
    let mut prev_total = crate::dataset::cost(data, &centers);

    for _ in 0..iters {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, x) in data.iter().enumerate() {
            let (d, j) = nearest_center(x, &centers);
            point_cost[i] = d;
            counts[j] += 1;
            for (a, v) in sums[j].iter_mut().zip(x) {
                *a += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                for a in sums[j].iter_mut() {
                    *a /= counts[j] as f64;
                }
                centers[j] = Point::new(std::mem::take(&mut sums[j]));
            }
        }
        // Empty clusters: park each one on the currently worst-served point,
        // in slot order, zeroing that point's cost so two empty slots never
        // grab the same point.
        for j in 0..k {
            if counts[j] == 0 {
                let worst = point_cost
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                    .map(|(i, _)| i)
                    .expect("nonempty dataset");
                centers[j] = data.point_owned(worst);
                point_cost[worst] = 0.0;
            }
        }
        let per_point: Vec<f64> = data.iter().map(|x| nearest_center(x, &centers).0).collect();
        let total = pairwise_sum(&per_point);
        costs.push(total);
        let rel = (prev_total - total) / prev_total.abs().max(1e-300);
        if rel < CONVERGENCE_REL_TOL {
            break;
        }
        prev_total = total;
    }
    (centers, costs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::cost;

    #[test]
    fn one_iteration_snaps_to_cluster_means() {
        let data = Dataset::from_rows(vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let start = vec![Point::new(vec![-1.0, 0.0]), Point::new(vec![3.0, 0.0])];
        let (centers, costs) = lloyd_iterate(&data, &start, 1);
        assert_eq!(centers[0].coords, vec![0.0, 0.0]);
        assert_eq!(centers[1].coords, vec![2.0, 0.0]);
        assert_eq!(costs, vec![0.0]);
    }

    #[test]
    fn costs_never_increase() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let b = (i % 3) as f64 * 10.0;
                vec![b + (i as f64 * 0.37).sin(), b + (i as f64 * 0.61).cos()]
            })
            .collect();
        let data = Dataset::from_rows(rows).unwrap();
        let start = vec![
            Point::new(vec![0.0, 0.0]),
            Point::new(vec![0.5, 0.5]),
            Point::new(vec![1.0, 1.0]),
        ];
        let (_, costs) = lloyd_iterate(&data, &start, 30);
        for w in costs.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{costs:?}");
        }
    }

    #[test]
    fn converged_state_is_a_fixed_point() {
        let data = Dataset::from_rows(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![10.0, 0.0],
            vec![11.0, 0.0],
        ])
        .unwrap();
        let start = vec![Point::new(vec![0.0, 0.0]), Point::new(vec![10.0, 0.0])];
        let (centers, _) = lloyd_iterate(&data, &start, 50);
        let (again, costs) = lloyd_iterate(&data, &centers, 50);
        assert_eq!(centers, again);
        assert_eq!(costs.len(), 1); // immediate early exit
    }

    #[test]
    fn empty_cluster_is_reseeded_at_worst_point() {
        // Both initial centers sit on the left pair; the far point must
        // capture the emptied slot rather than leaving k effectively 1.
        let data = Dataset::from_rows(vec![vec![0.0], vec![0.2], vec![50.0]]).unwrap();
        let start = vec![Point::new(vec![0.0]), Point::new(vec![0.2])];
        let (centers, _) = lloyd_iterate(&data, &start, 5);
        let final_cost = cost(&data, &centers);
        assert!(final_cost < 0.03, "cost {final_cost}, centers {centers:?}");
        assert!(centers.iter().any(|c| (c.coords[0] - 50.0).abs() < 1e-9));
    }
}
