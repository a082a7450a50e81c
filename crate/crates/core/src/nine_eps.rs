//! Swap search with grid-refined insertion candidates.
//!
//! A plain swap step can only insert data points, which caps how close a
//! single step can get to a cluster's true mean. Here each step D²-samples p
//! points 𝒬, and for every size-p Out ⊆ 𝒞 ∪ 𝒬 builds refined replacements
//! for the surviving sample points: guess a radius ρ from a geometric grid,
//! split the data around each q into far / close / nice bands, average a
//! small uniform sample of the nice band, and combine that average with the
//! q's under a geometric grid of coefficients. The best (Out, candidate set)
//! pair wins. With everything else equal this upgrades the locality gap of
//! the search from the plain-swap bound toward 9 + O(ε), at the price of a
//! per-step candidate explosion that a sampling budget keeps in check.

use itertools::Itertools;
use rand::Rng;
use rayon::prelude::*;

use crate::dataset::{pairwise_sum, sq_dist, Dataset, Point};
use crate::local_search::{AcceptRule, SwapProposal, Trajectory, StepRecord};
use crate::seeding::{d2_sample, rng_from_seed};
use crate::state::{CentersState, CostDelta, SwapEval};

/// Numerator constant in p = ⌈C_SWAP/ε⌉.
pub const C_SWAP: f64 = 2.0;
/// Numerator constant in |S| = ⌈C_SAMPLE/ε⌉ nice-band samples.
pub const C_SAMPLE: f64 = 4.0;
/// The coefficient grid descends from 1 by factors (1−ε) down to ε^COEFF_FLOOR_POW.
pub const COEFF_FLOOR_POW: i32 = 7;

#[derive(Debug, Clone)]
pub struct NineEpsConfig {
    /// Accuracy parameter in (0, 1). Drives the swap size, the grid
    /// resolutions, and the nice-band sample size.
    pub epsilon: f64,
    /// Max/min nonzero pairwise distance of the data; measured from the
    /// data when absent.
    pub aspect_ratio: Option<f64>,
    /// Minimum nonzero pairwise distance (the unit the radius grid is
    /// expressed in); measured from the data when absent.
    pub distance_unit: Option<f64>,
    /// Cap on candidate In-sets evaluated per step, shared across Out sets.
    /// When a product space is larger, In-sets are sampled uniformly and the
    /// all-identity set (every ô_i = q_i) is always kept.
    pub candidate_budget: usize,
    pub accept: AcceptRule,
}

impl Default for NineEpsConfig {
    fn default() -> Self {
        NineEpsConfig {
            epsilon: 0.5,
            aspect_ratio: None,
            distance_unit: None,
            candidate_budget: 100_000,
            accept: AcceptRule::Strict,
        }
    }
}

impl NineEpsConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        NineEpsConfig { epsilon, ..NineEpsConfig::default() }
    }

    /// Swap size ⌈C_SWAP/ε⌉ before the k-dependent clamp.
    pub fn swap_size(&self) -> usize {
        assert!(self.epsilon > 0.0 && self.epsilon < 1.0, "epsilon must be in (0,1)");
        (C_SWAP / self.epsilon).ceil() as usize
    }

    /// Nice-band sample size ⌈C_SAMPLE/ε⌉.
    pub fn sample_size(&self) -> usize {
        (C_SAMPLE / self.epsilon).ceil() as usize
    }

    /// Copy of the config with the data-dependent scale fields filled in,
    /// so repeated steps skip the pairwise scan.
    pub fn resolved(&self, data: &Dataset) -> NineEpsConfig {
        let mut cfg = self.clone();
        if cfg.aspect_ratio.is_none() || cfg.distance_unit.is_none() {
            let (unit, aspect) = measure_scale(data);
            cfg.distance_unit.get_or_insert(unit);
            cfg.aspect_ratio.get_or_insert(aspect);
        }
        cfg
    }
}

/// (min nonzero pairwise distance, aspect ratio Δ) of the data. Falls back
/// to (1, 1) when all points coincide.
pub fn measure_scale(data: &Dataset) -> (f64, f64) {
    let n = data.len();
    let mut min_nz = f64::INFINITY;
    let mut max_d = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = sq_dist(data.point(i), data.point(j));
            if d > 0.0 && d < min_nz {
                min_nz = d;
            }
            if d > max_d {
                max_d = d;
            }
        }
    }
    if !min_nz.is_finite() || max_d == 0.0 {
        return (1.0, 1.0);
    }
    ((min_nz).sqrt(), (max_d / min_nz).sqrt())
}

/// Ceil that forgives float crumbs just above an integer, so grids whose
/// exact length is integral (log₂4 = 2) do not gain a spurious element.
fn ceil_snapped(t: f64) -> usize {
    ((t - 1e-9).ceil()).max(0.0) as usize
}

/// Geometric radius grid {1, (1+ε), …, (1+ε)^⌈log₁₊ε Δ⌉} in units of the
/// minimum nonzero pairwise distance.
pub fn radius_grid(aspect: f64, epsilon: f64) -> Vec<f64> {
    assert!(aspect >= 1.0, "aspect ratio must be ≥ 1, got {aspect}");
    assert!(epsilon > 0.0, "epsilon must be positive");
    let steps = if aspect == 1.0 { 0 } else { ceil_snapped(aspect.ln() / (1.0 + epsilon).ln()) };
    (0..=steps).map(|j| (1.0 + epsilon).powi(j as i32)).collect()
}

/// Far / close / nice split of the data around a guessed cluster center q
/// at radius ρ: far points cost more than ρ²/ε³ against q (strictly); of
/// the rest, points within ε³ρ² of the temporary centers are close; the
/// remainder is nice. Returns the three index sets.
pub fn partition_fcn(
    data: &Dataset,
    t_centers: &[Point],
    q: &Point,
    rho: f64,
    epsilon: f64,
) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    assert!(rho > 0.0, "rho must be positive");
    assert!(!t_centers.is_empty(), "partition needs at least one temporary center");
    let dq: Vec<f64> = data.iter().map(|x| sq_dist(x, q.as_slice())).collect();
    let dt: Vec<f64> = data
        .iter()
        .map(|x| t_centers.iter().map(|c| sq_dist(x, c.as_slice())).fold(f64::INFINITY, f64::min))
        .collect();
    partition_from_dists(&dq, &dt, rho, epsilon)
}

fn partition_from_dists(
    dq: &[f64],
    dt: &[f64],
    rho: f64,
    epsilon: f64,
) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let e3 = epsilon.powi(3);
    let far_thresh = rho * rho / e3;
    let close_thresh = e3 * rho * rho;
    let (mut far, mut close, mut nice) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..dq.len() {
        if dq[i] > far_thresh {
            far.push(i);
        } else if dt[i] <= close_thresh {
            close.push(i);
        } else {
            nice.push(i);
        }
    }
    (far, close, nice)
}

/// The per-coordinate value set of the coefficient grid, descending:
/// {1, (1−ε), …, (1−ε)^⌈log₁₋ε(ε⁷)⌉, 0}.
pub fn coefficient_values(epsilon: f64) -> Vec<f64> {
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0,1)");
    let m = ceil_snapped(COEFF_FLOOR_POW as f64 * epsilon.ln() / (1.0 - epsilon).ln());
    let mut values: Vec<f64> = (0..=m).map(|j| (1.0 - epsilon).powi(j as i32)).collect();
    values.push(0.0);
    values
}

/// All (s+1)-tuples over the coefficient value set except all-zero.
/// Size (⌈log₁₋ε(ε⁷)⌉ + 2)^(s+1) − 1: exponential in s by design; callers
/// with larger s go through the budgeted sampler instead.
pub fn coefficient_grid(epsilon: f64, s: usize) -> Vec<Vec<f64>> {
    assert!(s >= 1, "grid needs at least one sampled point");
    let values = coefficient_values(epsilon);
    let count = tuple_count(values.len(), s);
    (0..count).map(|idx| decode_tuple(&values, s, idx)).collect()
}

/// Number of usable tuples: v^(s+1) minus the all-zero tuple. With the
/// value list descending (zero last), all-zero is exactly the final flat
/// index, so valid indices are 0..count.
fn tuple_count(v: usize, s: usize) -> u128 {
    (v as u128).pow(s as u32 + 1) - 1
}

fn decode_tuple(values: &[f64], s: usize, mut idx: u128) -> Vec<f64> {
    let v = values.len() as u128;
    let mut tuple = vec![0.0; s + 1];
    for pos in (0..=s).rev() {
        tuple[pos] = values[(idx % v) as usize];
        idx /= v;
    }
    tuple
}

/// Flat index of the tuple that is 1 at `position` and 0 elsewhere.
fn identity_tuple_index(v: usize, s: usize, position: usize) -> u128 {
    let v = v as u128;
    let zero_digit = v - 1;
    let mut idx = 0u128;
    for pos in 0..=s {
        let digit = if pos == position { 0 } else { zero_digit };
        idx = idx * v + digit;
    }
    idx
}

/// A refined insertion candidate: where it came from (radius-grid slot,
/// coefficient tuple, nice-band average) plus the resulting point. Coords
/// always reconstruct as (α₀·μ(S) + Σ αⱼ·qⱼ) / Σ α.
#[derive(Debug, Clone)]
pub struct CandidateCenter {
    pub coords: Point,
    /// Index into the radius grid; `None` for the ρ-independent identity
    /// fallback (α at one q, everything else zero).
    pub rho_index: Option<usize>,
    /// (α₀, α₁, …, α_s): α₀ weighs μ(S), αⱼ weighs qⱼ.
    pub coefficients: Vec<f64>,
    /// The nice-band sample mean the tuple was applied to.
    pub mu_sample: Point,
}

fn combine(mu: &Point, qs: &[Point], tuple: &[f64]) -> Point {
    debug_assert_eq!(tuple.len(), qs.len() + 1);
    let dim = mu.dim();
    let total: f64 = tuple.iter().sum();
    debug_assert!(total > 0.0, "all-zero tuple reached combine");
    let mut acc = vec![0.0; dim];
    for (a, v) in acc.iter_mut().zip(&mu.coords) {
        *a += tuple[0] * v;
    }
    for (j, q) in qs.iter().enumerate() {
        for (a, v) in acc.iter_mut().zip(&q.coords) {
            *a += tuple[j + 1] * v;
        }
    }
    for a in acc.iter_mut() {
        *a /= total;
    }
    Point::new(acc)
}

/// Candidate space for one Out set: per surviving sample point, the valid
/// (ρ slot, nice-band mean) pairs; tuples are decoded on demand.
struct CandidateSpace {
    /// components[i]: (rho_index, μ(S)) slots for q_i.
    slots: Vec<Vec<(usize, Point)>>,
    values: Vec<f64>,
    qs: Vec<Point>,
    tuples_per_slot: u128,
}

impl CandidateSpace {
    fn component_size(&self, i: usize) -> u128 {
        self.slots[i].len() as u128 * self.tuples_per_slot
    }

    fn total(&self) -> u128 {
        self.qs
            .iter()
            .enumerate()
            .map(|(i, _)| self.component_size(i))
            .fold(1u128, |acc, c| acc.saturating_mul(c))
    }

    fn decode(&self, component: usize, local: u128) -> CandidateCenter {
        let slot = (local / self.tuples_per_slot) as usize;
        let tuple_idx = local % self.tuples_per_slot;
        let (rho_index, mu) = &self.slots[component][slot];
        let tuple = decode_tuple(&self.values, self.qs.len(), tuple_idx);
        let coords = combine(mu, &self.qs, &tuple);
        CandidateCenter {
            coords,
            rho_index: Some(*rho_index),
            coefficients: tuple,
            mu_sample: mu.clone(),
        }
    }

    fn identity(&self, component: usize) -> CandidateCenter {
        let s = self.qs.len();
        let mut tuple = vec![0.0; s + 1];
        tuple[component + 1] = 1.0;
        let q = self.qs[component].clone();
        // ρ-independent: μ(S) carries zero weight, so any placeholder works.
        let mu = self.slots[component]
            .first()
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| q.clone());
        let rho_index = self.slots[component].first().map(|(r, _)| *r);
        CandidateCenter { coords: q, rho_index, coefficients: tuple, mu_sample: mu }
    }

    fn identity_local(&self, component: usize) -> Option<u128> {
        if self.slots[component].is_empty() {
            return None;
        }
        Some(identity_tuple_index(self.values.len(), self.qs.len(), component + 1))
    }
}

/// Uniform i.i.d. sample of the index set `nice` (with replacement), except
/// when the band is smaller than the request, in which case the whole band
/// is taken once each.
fn sample_nice<R: Rng + ?Sized>(nice: &[usize], m: usize, rng: &mut R) -> Vec<usize> {
    if nice.len() < m {
        nice.to_vec()
    } else {
        (0..m).map(|_| nice[rng.gen_range(0..nice.len())]).collect()
    }
}

fn build_space<R: Rng + ?Sized>(
    data: &Dataset,
    qs: &[Point],
    q_dists: &[&[f64]],
    t_dists: &[f64],
    cfg: &NineEpsConfig,
    rho_grid_abs: &[f64],
    rng: &mut R,
) -> CandidateSpace {
    let m = cfg.sample_size();
    let values = coefficient_values(cfg.epsilon);
    let tuples_per_slot = tuple_count(values.len(), qs.len());
    let mut slots = Vec::with_capacity(qs.len());
    for dq in q_dists {
        let mut comp = Vec::new();
        for (rho_index, rho) in rho_grid_abs.iter().enumerate() {
            let (_, _, nice) = partition_from_dists(dq, t_dists, *rho, cfg.epsilon);
            if nice.is_empty() {
                continue;
            }
            let sample = sample_nice(&nice, m, rng);
            let rows: Vec<&[f64]> = sample.iter().map(|&i| data.point(i)).collect();
            comp.push((rho_index, crate::dataset::mean_of(&rows)));
        }
        slots.push(comp);
    }
    CandidateSpace { slots, values, qs: qs.to_vec(), tuples_per_slot }
}

/// Materializes the candidate In-sets for one temporary center set: for each
/// surviving sample point q_i, every (ρ, coefficient tuple) candidate, all
/// components combined by Cartesian product, capped at `cfg.candidate_budget`
/// by uniform sampling (the all-identity In-set is always present).
pub fn apx_centers<R: Rng + ?Sized>(
    data: &Dataset,
    t_centers: &[Point],
    qs: &[Point],
    cfg: &NineEpsConfig,
    rng: &mut R,
) -> Vec<Vec<CandidateCenter>> {
    assert!(!qs.is_empty(), "apx_centers: no sampled points");
    let cfg = cfg.resolved(data);
    let unit = cfg.distance_unit.unwrap();
    let aspect = cfg.aspect_ratio.unwrap();
    let rho_abs: Vec<f64> =
        radius_grid(aspect, cfg.epsilon).into_iter().map(|r| r * unit).collect();

    let q_cols: Vec<Vec<f64>> = qs
        .iter()
        .map(|q| data.iter().map(|x| sq_dist(x, q.as_slice())).collect())
        .collect();
    let q_refs: Vec<&[f64]> = q_cols.iter().map(|c| c.as_slice()).collect();
    let t_dists: Vec<f64> = data
        .iter()
        .map(|x| t_centers.iter().map(|c| sq_dist(x, c.as_slice())).fold(f64::INFINITY, f64::min))
        .collect();

    let space = build_space(data, qs, &q_refs, &t_dists, &cfg, &rho_abs, rng);
    let picks = choose_in_sets(&space, cfg.candidate_budget, rng);
    picks
        .into_iter()
        .map(|locals| {
            locals
                .iter()
                .enumerate()
                .map(|(i, local)| match local {
                    Some(l) => space.decode(i, *l),
                    None => space.identity(i),
                })
                .collect()
        })
        .collect()
}

/// Chooses which In-sets to realize: full enumeration when the product fits
/// the budget, otherwise uniform sampling plus the all-identity set. Each
/// pick is a per-component local index (`None` = identity fallback for a
/// component with no valid ρ slot).
fn choose_in_sets<R: Rng + ?Sized>(
    space: &CandidateSpace,
    budget: usize,
    rng: &mut R,
) -> Vec<Vec<Option<u128>>> {
    let s = space.qs.len();
    let total = space.total();
    let mut picks: Vec<Vec<Option<u128>>> = Vec::new();
    if total == 0 {
        picks.push(vec![None; s]);
        return picks;
    }
    if total <= budget as u128 {
        let mut cursor = vec![0u128; s];
        loop {
            picks.push(cursor.iter().map(|&l| Some(l)).collect());
            let mut pos = s;
            loop {
                if pos == 0 {
                    return picks;
                }
                pos -= 1;
                cursor[pos] += 1;
                if cursor[pos] < space.component_size(pos) {
                    break;
                }
                cursor[pos] = 0;
            }
        }
    }
    let identity: Vec<Option<u128>> = (0..s).map(|i| space.identity_local(i)).collect();
    picks.push(identity);
    for _ in 1..budget.max(1) {
        picks.push(
            (0..s)
                .map(|i| {
                    let size = space.component_size(i);
                    // size fits u64 in practice; sample via u64 halves.
                    let r = rng.gen_range(0..size as u64) as u128;
                    Some(r)
                })
                .collect(),
        );
    }
    picks
}

/// One refined-candidate swap step. Returns the executed proposal, or none
/// when no candidate clears the acceptance rule.
pub fn nine_eps_step<R: Rng + ?Sized>(
    data: &Dataset,
    state: &mut CentersState,
    cfg: &NineEpsConfig,
    rng: &mut R,
) -> Option<SwapProposal> {
    let k = state.k();
    let cfg = cfg.resolved(data);
    let p = cfg.swap_size().min(k.saturating_sub(1).max(1));
    let unit = cfg.distance_unit.unwrap();
    let aspect = cfg.aspect_ratio.unwrap();
    let rho_abs: Vec<f64> =
        radius_grid(aspect, cfg.epsilon).into_iter().map(|r| r * unit).collect();

    let q_idx = d2_sample(state, rng, p);
    let q_points: Vec<Point> = q_idx.iter().map(|&i| data.point_owned(i)).collect();
    let ev = SwapEval::new(data, state, &q_points);
    let w = ev.width();

    let out_sets: Vec<Vec<u32>> = (0..w as u32).combinations(p).collect();
    let relevant = out_sets.iter().filter(|o| !o.iter().all(|&c| c as usize >= k)).count();
    let per_out_budget = (cfg.candidate_budget / relevant.max(1)).max(1);

    struct Best {
        cost: f64,
        out: Vec<u32>,
        points: Vec<Point>,
    }
    let mut best: Option<Best> = None;
    let mut mark = vec![false; w];
    // Partition thresholds come from the temporary set (𝒞 ∪ 𝒬) ∖ Out; the
    // candidate evaluation prices (𝒞 ∖ Out) ∪ {ô's}, because each surviving
    // sample point is replaced by its refined candidate.
    let mut t_dists: Vec<f64> = Vec::with_capacity(state.n());
    let mut base_d2: Vec<f64> = Vec::with_capacity(state.n());

    for out in &out_sets {
        let survivors_q: Vec<usize> =
            (k..w).filter(|j| !out.contains(&(*j as u32))).collect();
        if survivors_q.is_empty() {
            continue; // Out = 𝒬 swaps nothing
        }
        for &c in out {
            mark[c as usize] = true;
        }
        ev.survivor_d2(&mark, &mut t_dists);
        for j in k..w {
            mark[j] = true;
        }
        ev.survivor_d2(&mark, &mut base_d2);
        for j in k..w {
            mark[j] = false;
        }
        for &c in out {
            mark[c as usize] = false;
        }

        let qs: Vec<Point> = survivors_q.iter().map(|&j| q_points[j - k].clone()).collect();
        let q_refs: Vec<&[f64]> =
            survivors_q.iter().map(|&j| ev.in_columns[j - k].as_slice()).collect();
        let space = build_space(data, &qs, &q_refs, &t_dists, &cfg, &rho_abs, rng);
        let picks = choose_in_sets(&space, per_out_budget, rng);

        let scored: Option<(usize, f64, Vec<Point>)> = picks
            .par_iter()
            .enumerate()
            .map(|(ord, locals)| {
                let points: Vec<Point> = locals
                    .iter()
                    .enumerate()
                    .map(|(i, l)| match l {
                        Some(l) => space.decode(i, *l).coords,
                        None => space.identity(i).coords,
                    })
                    .collect();
                let mut parts = Vec::with_capacity(base_d2.len());
                for (i, x) in data.iter().enumerate() {
                    let mut d = base_d2[i];
                    for pnt in &points {
                        let dd = sq_dist(x, pnt.as_slice());
                        if dd < d {
                            d = dd;
                        }
                    }
                    parts.push(d);
                }
                (ord, pairwise_sum(&parts), points)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

        if let Some((_, cand_cost, points)) = scored {
            let replace = match &best {
                None => true,
                Some(b) => cand_cost < b.cost || (cand_cost == b.cost && *out < b.out),
            };
            if replace {
                best = Some(Best { cost: cand_cost, out: out.clone(), points });
            }
        }
    }

    let best = best?;
    let old = state.total_cost;
    if !cfg.accept.accepts(old, best.cost, k) {
        return None;
    }
    let out_slots: Vec<usize> =
        best.out.iter().filter(|&&c| (c as usize) < k).map(|&c| c as usize).collect();
    debug_assert_eq!(out_slots.len(), best.points.len());
    state.replace_centers(data, &out_slots, &best.points);
    Some(SwapProposal {
        in_points: best.points,
        out_slots,
        delta: CostDelta(state.total_cost - old),
    })
}

/// Runs `steps` sequential refined-candidate steps on an existing state,
/// drawing from the caller's RNG. Resolve the config first when calling in
/// a loop, or the data scale gets re-measured every step.
pub fn nine_eps_run_steps<R: Rng + ?Sized>(
    data: &Dataset,
    state: &mut CentersState,
    rng: &mut R,
    cfg: &NineEpsConfig,
    steps: usize,
) -> Trajectory {
    let cfg = cfg.resolved(data);
    let mut trajectory = Trajectory::default();
    for step in 0..steps {
        let t0 = std::time::Instant::now();
        let proposal = nine_eps_step(data, state, &cfg, rng);
        trajectory.records.push(StepRecord {
            step,
            total_cost: state.total_cost,
            accepted: proposal.is_some(),
            seconds: t0.elapsed().as_secs_f64(),
        });
    }
    trajectory
}

/// Runs `steps` refined-candidate steps from the given centers.
pub fn run_nine_eps(
    data: &Dataset,
    init: Vec<Point>,
    cfg: &NineEpsConfig,
    steps: usize,
    seed: u64,
) -> (CentersState, Trajectory) {
    let mut state = CentersState::build(data, init);
    let mut rng = rng_from_seed(seed);
    let trajectory = nine_eps_run_steps(data, &mut state, &mut rng, cfg, steps);
    (state, trajectory)
}
