//! Independent oracles for the integration suites. Everything here is
//! computed the slow, obvious way on purpose: no shared code with the
//! incremental machinery under test.

// Each test binary uses its own subset of these.
#![allow(dead_code)]

use mskmeans::{sq_dist, Dataset, Point};

/// Total cost of `centers` against `data`, from scratch, naive loops.
pub fn scratch_cost(data: &Dataset, centers: &[Point]) -> f64 {
    assert!(!centers.is_empty());
    let mut total = 0.0;
    for x in data.iter() {
        let mut best = f64::INFINITY;
        for c in centers {
            let d = sq_dist(x, c.as_slice());
            if d < best {
                best = d;
            }
        }
        total += best;
    }
    total
}

fn combinations(pool: usize, take: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = (0..take as u32).collect();
    if take == 0 || take > pool {
        return out;
    }
    loop {
        out.push(cur.clone());
        // advance
        let mut i = take;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] <= (pool - (take - i)) as u32 {
                for j in i + 1..take {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Best size-p Out ⊆ centers ∪ inserted (extended indices, centers first),
/// scored by from-scratch cost of the surviving set. Ties pick the
/// lexicographically smallest index tuple. Returns (cost, out).
pub fn best_swap_bruteforce(
    data: &Dataset,
    centers: &[Point],
    inserted: &[Point],
    p: usize,
) -> (f64, Vec<u32>) {
    let mut ext: Vec<Point> = centers.to_vec();
    ext.extend(inserted.iter().cloned());
    let w = ext.len();
    let mut best: Option<(f64, Vec<u32>)> = None;
    for out in combinations(w, p) {
        let survivors: Vec<Point> = (0..w as u32)
            .filter(|i| !out.contains(i))
            .map(|i| ext[i as usize].clone())
            .collect();
        let cost = scratch_cost(data, &survivors);
        let better = match &best {
            None => true,
            Some((bc, bo)) => cost < *bc || (cost == *bc && out < *bo),
        };
        if better {
            best = Some((cost, out));
        }
    }
    best.expect("at least one Out subset")
}

/// Exact k-means optimum by enumerating every assignment of points to k
/// labels (clusters may end up empty). Feasible for n ≤ 12 or so.
pub fn exhaustive_partition_opt(data: &Dataset, k: usize) -> f64 {
    let n = data.len();
    let d = data.dim();
    assert!(k >= 1 && n >= 1);
    assert!(
        (k as f64).powi(n as i32) < 2e8,
        "exhaustive oracle out of its depth: k^n too large"
    );
    let sq_norms: f64 = data.iter().flat_map(|r| r.iter().map(|v| v * v)).sum();

    let mut assign = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for (i, &a) in assign.iter().enumerate() {
            counts[a] += 1;
            for (s, v) in sums[a * d..(a + 1) * d].iter_mut().zip(data.point(i)) {
                *s += v;
            }
        }
        // sum over clusters of |sum|^2 / count; cost = sq_norms - that.
        let mut explained = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let s2: f64 = sums[c * d..(c + 1) * d].iter().map(|v| v * v).sum();
            explained += s2 / counts[c] as f64;
        }
        let cost = sq_norms - explained;
        if cost < best {
            best = cost;
        }

        // next assignment, base-k counter
        let mut i = 0;
        loop {
            if i == n {
                return best.max(0.0);
            }
            assign[i] += 1;
            if assign[i] < k {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
    }
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
