//! k-means++ seeding and the D² sampling primitive the swap engines share.

use crate::dataset::{sq_dist, Dataset, Point};
use crate::state::CentersState;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

/// The seeded stream used by every runner in this crate. Algorithms are
/// generic over `rand::Rng`; pinning one concrete generator here is what
/// makes CLI and experiment outputs byte-stable across machines.
pub type SeedRng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeedRng {
    use rand::SeedableRng;
    SeedRng::seed_from_u64(seed)
}

/// Draws `count` i.i.d. point indices proportional to the current per-point
/// costs, without updating costs between draws. Falls back to the uniform
/// distribution when the total cost is zero.
pub fn d2_sample<R: Rng + ?Sized>(state: &CentersState, rng: &mut R, count: usize) -> Vec<usize> {
    assert!(count >= 1, "d2_sample: count must be at least 1");
    let n = state.n();
    match WeightedIndex::new(state.point_cost.iter().copied()) {
        Ok(dist) => (0..count).map(|_| dist.sample(rng)).collect(),
        // All weights zero (or the degenerate n = 0 is ruled out upstream):
        // the D² distribution is undefined, sample uniformly.
        Err(_) => (0..count).map(|_| rng.gen_range(0..n)).collect(),
    }
}

/// k-means++ seeding: first center uniform, every later center D²-sampled
/// with costs updated after each pick. Returns k points with distinct
/// indices; when the residual cost hits zero early (duplicate-heavy data),
/// remaining picks are uniform over the unchosen indices.
pub fn kmeanspp_seed<R: Rng + ?Sized>(
    data: &Dataset,
    k: usize,
    rng: &mut R,
) -> crate::Result<Vec<Point>> {
    let n = data.len();
    assert!(k >= 1, "kmeanspp_seed: k must be at least 1");
    if k > n {
        return Err(crate::Error::KTooLarge { k, n });
    }
    let mut chosen_idx: Vec<usize> = Vec::with_capacity(k);
    let mut chosen = vec![false; n];
    let mut cost = vec![f64::INFINITY; n];

    let first = rng.gen_range(0..n);
    chosen_idx.push(first);
    chosen[first] = true;
    update_costs(data, first, &mut cost);

    while chosen_idx.len() < k {
        let next = match WeightedIndex::new(cost.iter().copied()) {
            Ok(dist) => dist.sample(rng),
            Err(_) => {
                // Residual cost is zero everywhere; pick uniformly among the
                // indices not taken yet so the k picks stay distinct.
                let open: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
                open[rng.gen_range(0..open.len())]
            }
        };
        debug_assert!(!chosen[next], "kmeanspp_seed: re-picked a chosen index");
        chosen_idx.push(next);
        chosen[next] = true;
        update_costs(data, next, &mut cost);
    }
    Ok(chosen_idx.iter().map(|&i| data.point_owned(i)).collect())
}

fn update_costs(data: &Dataset, center_idx: usize, cost: &mut [f64]) {
    let c = data.point(center_idx);
    for (i, x) in data.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < cost[i] {
            cost[i] = d;
        }
    }
}
