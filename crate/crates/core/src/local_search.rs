//! Swap-based local search over a seeded center set.
//!
//! One step: D²-sample p candidate points ("In", costs frozen during the
//! draw), then choose p elements of centers ∪ In to discard ("Out"). The
//! exhaustive engine scores every size-p Out subset by enumerating its
//! size-(p−1) prefixes and charging each point's reassignment to its nearest
//! survivor; the greedy engine removes one cheapest center at a time,
//! re-charging between removals. When Out overlaps In, the overlap cancels
//! and the realized swap is (In∖Out, Out∖In). With p = 1 the two engines
//! coincide (single-swap local search).

use std::time::Instant;

use itertools::Itertools;
use rand::Rng;

use crate::dataset::{Dataset, Point};
use crate::seeding::{d2_sample, rng_from_seed};
use crate::state::{CentersState, ChargeBuf, CostDelta, SwapEval};

/// Relative tolerance on "the swap improves the cost": a candidate total
/// must undercut the current total by more than this fraction of it.
/// Fixed here once; every engine and runner goes through [`AcceptRule`].
pub const IMPROVEMENT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AcceptRule {
    /// Accept any strict improvement (tolerance `IMPROVEMENT_REL_TOL`).
    Strict,
    /// Accept only drops to ≤ (1 − δ/k) of the current cost.
    Factor { delta: f64 },
}

impl AcceptRule {
    pub fn accepts(&self, current: f64, candidate: f64, k: usize) -> bool {
        match self {
            AcceptRule::Strict => candidate < current - IMPROVEMENT_REL_TOL * current.abs(),
            AcceptRule::Factor { delta } => {
                assert!(
                    *delta > 0.0 && *delta < 1.0,
                    "factor rule needs delta in (0,1), got {delta}"
                );
                candidate <= (1.0 - delta / k as f64) * current
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsVariant {
    Msls,
    MslsG,
}

#[derive(Debug, Clone)]
pub struct LsConfig {
    /// Requested swap size; clamped to max(k−1, 1) when p ≥ k, since
    /// swapping out every center is degenerate.
    pub p: usize,
    pub steps: usize,
    pub accept: AcceptRule,
    pub seed: u64,
    pub record_trajectory: bool,
}

impl Default for LsConfig {
    fn default() -> Self {
        LsConfig { p: 1, steps: 50, accept: AcceptRule::Strict, seed: 0, record_trajectory: true }
    }
}

/// Step budget of the form ⌈β·k·ln ln k⌉ (k floored at 3 so the double log
/// stays positive). Offered alongside plain fixed budgets; the experiment
/// drivers default to fixed counts.
pub fn suggested_steps(k: usize, beta: f64) -> usize {
    let kk = (k.max(3)) as f64;
    (beta * kk * kk.ln().ln()).ceil() as usize
}

/// An executed (or evaluated) swap: the points inserted and the center slots
/// vacated, after In∩Out cancellation.
#[derive(Debug, Clone)]
pub struct SwapProposal {
    pub in_points: Vec<Point>,
    pub out_slots: Vec<usize>,
    pub delta: CostDelta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub total_cost: f64,
    pub accepted: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn non_increasing(&self) -> bool {
        self.records.windows(2).all(|w| w[1].total_cost <= w[0].total_cost)
    }

    pub fn accepted_count(&self) -> usize {
        self.records.iter().filter(|r| r.accepted).count()
    }
}

pub(crate) fn effective_p(k: usize, p: usize) -> usize {
    assert!(p >= 1, "swap size must be at least 1");
    if p >= k {
        k.saturating_sub(1).max(1)
    } else {
        p
    }
}

/// Exhaustive p-swap step. Samples In, scores every size-p Out ⊆ 𝒞 ∪ In,
/// and applies the best swap if it clears the acceptance rule. Out subsets
/// are scored as Z ∪ {c}: for each size-(p−1) subset Z, one removal-charge
/// pass prices every completion c at once. Ties on cost pick the
/// lexicographically smallest Out (centers indexed 0..k, In after).
pub fn msls_step<R: Rng + ?Sized>(
    data: &Dataset,
    state: &mut CentersState,
    cfg: &LsConfig,
    rng: &mut R,
) -> Option<SwapProposal> {
    let k = state.k();
    let p = effective_p(k, cfg.p);
    let in_idx = d2_sample(state, rng, p);
    let in_points: Vec<Point> = in_idx.iter().map(|&i| data.point_owned(i)).collect();
    let ev = SwapEval::new(data, state, &in_points);
    let w = ev.width();
    let mut buf = ChargeBuf::new(w);

    let mut best: Option<(f64, Vec<u32>)> = None;
    for z in (0..w as u32).combinations(p - 1) {
        for &c in &z {
            buf.mark[c as usize] = true;
        }
        ev.charges(&mut buf);
        for c in 0..w as u32 {
            if buf.mark[c as usize] {
                continue;
            }
            let cand = buf.base + buf.charge[c as usize];
            let replace = match &best {
                None => true,
                Some((bc, bo)) => {
                    cand < *bc || (cand == *bc && {
                        let tuple = out_tuple(&z, c);
                        tuple < *bo
                    })
                }
            };
            if replace {
                best = Some((cand, out_tuple(&z, c)));
            }
        }
        for &c in &z {
            buf.mark[c as usize] = false;
        }
    }

    let (new_cost, out) = best.expect("swap enumeration produced no candidate");
    apply_if_improving(state, ev, in_points, new_cost, out, &cfg.accept)
}

/// Greedy p-swap step: In as in [`msls_step`], but Out is built in p rounds,
/// each removing the survivor of 𝒞 ∪ In with the smallest removal charge
/// given everything removed so far (ties to the lowest index).
pub fn msls_g_step<R: Rng + ?Sized>(
    data: &Dataset,
    state: &mut CentersState,
    cfg: &LsConfig,
    rng: &mut R,
) -> Option<SwapProposal> {
    let k = state.k();
    let p = effective_p(k, cfg.p);
    let in_idx = d2_sample(state, rng, p);
    let in_points: Vec<Point> = in_idx.iter().map(|&i| data.point_owned(i)).collect();
    let ev = SwapEval::new(data, state, &in_points);
    let w = ev.width();
    let mut buf = ChargeBuf::new(w);

    let mut out: Vec<u32> = Vec::with_capacity(p);
    let mut new_cost = state.total_cost;
    for _ in 0..p {
        ev.charges(&mut buf);
        let mut pick: Option<(f64, u32)> = None;
        for c in 0..w as u32 {
            if buf.mark[c as usize] {
                continue;
            }
            let ch = buf.charge[c as usize];
            if pick.map_or(true, |(bch, _)| ch < bch) {
                pick = Some((ch, c));
            }
        }
        let (ch, c) = pick.expect("greedy removal found no survivor");
        buf.mark[c as usize] = true;
        out.push(c);
        new_cost = buf.base + ch;
    }
    out.sort_unstable();
    apply_if_improving(state, ev, in_points, new_cost, out, &cfg.accept)
}

fn out_tuple(z: &[u32], c: u32) -> Vec<u32> {
    let mut t = Vec::with_capacity(z.len() + 1);
    let pos = z.partition_point(|&x| x < c);
    t.extend_from_slice(&z[..pos]);
    t.push(c);
    t.extend_from_slice(&z[pos..]);
    t
}

/// Shared tail of both engines: check the rule, resolve In∩Out cancellation,
/// and mutate the state. `out` holds sorted indices into 𝒞 ∪ In.
fn apply_if_improving(
    state: &mut CentersState,
    ev: SwapEval,
    in_points: Vec<Point>,
    new_cost: f64,
    out: Vec<u32>,
    rule: &AcceptRule,
) -> Option<SwapProposal> {
    let old = state.total_cost;
    let k = state.k();
    if !rule.accepts(old, new_cost, k) {
        return None;
    }
    let out_slots: Vec<usize> =
        out.iter().filter(|&&c| (c as usize) < k).map(|&c| c as usize).collect();
    let mut kept_points = Vec::new();
    let mut kept_cols = Vec::new();
    for (j, (point, col)) in in_points.into_iter().zip(ev.in_columns).enumerate() {
        if !out.contains(&((k + j) as u32)) {
            kept_points.push(point);
            kept_cols.push(col);
        }
    }
    debug_assert_eq!(out_slots.len(), kept_points.len(), "swap sides must balance");
    state.replace_centers_with_columns(&out_slots, &kept_points, &kept_cols);
    Some(SwapProposal {
        in_points: kept_points,
        out_slots,
        delta: CostDelta(state.total_cost - old),
    })
}

/// Runs `cfg.steps` sequential steps of the chosen engine from the given
/// initial centers, with a fresh seeded rng. Records cost after each step.
pub fn run_local_search(
    data: &Dataset,
    init: Vec<Point>,
    cfg: &LsConfig,
    variant: LsVariant,
) -> (CentersState, Trajectory) {
    let mut state = CentersState::build(data, init);
    let mut rng = rng_from_seed(cfg.seed);
    let trajectory = run_steps(data, &mut state, &mut rng, cfg, variant);
    (state, trajectory)
}

/// Step loop over an existing state and rng; experiment drivers use this to
/// share one seeding across several arms.
pub fn run_steps<R: Rng + ?Sized>(
    data: &Dataset,
    state: &mut CentersState,
    rng: &mut R,
    cfg: &LsConfig,
    variant: LsVariant,
) -> Trajectory {
    if cfg.p >= state.k() {
        log::warn!(
            "swap size p={} with k={}: clamping to p={}",
            cfg.p,
            state.k(),
            effective_p(state.k(), cfg.p)
        );
    }
    let mut trajectory = Trajectory::default();
    for step in 0..cfg.steps {
        let t0 = Instant::now();
        let proposal = match variant {
            LsVariant::Msls => msls_step(data, state, cfg, rng),
            LsVariant::MslsG => msls_g_step(data, state, cfg, rng),
        };
        if cfg.record_trajectory {
            trajectory.records.push(StepRecord {
                step,
                total_cost: state.total_cost,
                accepted: proposal.is_some(),
                seconds: t0.elapsed().as_secs_f64(),
            });
        }
    }
    trajectory
}

/// How many centers a swap may touch when computing theoretical bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapBudget {
    Finite(u32),
    Infinite,
}

impl std::str::FromStr for SwapBudget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(SwapBudget::Infinite);
        }
        match s.parse::<u32>() {
            Ok(p) if p >= 1 => Ok(SwapBudget::Finite(p)),
            _ => Err(format!("swap size must be a positive integer or 'inf', got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVariant {
    /// Positive root of η² − (2 + 2/p)η − (4 + 2/p) = 0.
    Msls,
    /// Comparison bound with the 3 + 2/p constant term instead.
    Kanungo,
}

/// Squared positive root of the approximation-factor equation for p-swap
/// local search: the guaranteed approximation ratio.
pub fn eta_bound(p: SwapBudget, variant: BoundVariant) -> f64 {
    let inv = match p {
        SwapBudget::Finite(p) => {
            assert!(p >= 1, "swap size must be at least 1");
            1.0 / p as f64
        }
        SwapBudget::Infinite => 0.0,
    };
    let b = 2.0 + 2.0 * inv;
    let c = match variant {
        BoundVariant::Msls => 4.0 + 2.0 * inv,
        BoundVariant::Kanungo => 3.0 + 2.0 * inv,
    };
    let eta = (b + (b * b + 4.0 * c).sqrt()) / 2.0;
    eta * eta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::cost;
    use approx::assert_relative_eq;

    fn rows(points: &[(f64, f64)]) -> Dataset {
        Dataset::from_rows(points.iter().map(|&(x, y)| vec![x, y]).collect()).unwrap()
    }

    #[test]
    fn symmetric_tie_is_rejected_under_strict_rule() {
        // k=1 at (0,0) over {(0,0),(100,0)}: swapping to (100,0) leaves the
        // cost at 10000 exactly, so nothing improves.
        let data = rows(&[(0.0, 0.0), (100.0, 0.0)]);
        let mut state = CentersState::build(&data, vec![Point::new(vec![0.0, 0.0])]);
        let cfg = LsConfig { p: 1, ..LsConfig::default() };
        let mut rng = rng_from_seed(5);
        let got = msls_step(&data, &mut state, &cfg, &mut rng);
        assert!(got.is_none());
        assert_eq!(state.total_cost, 10_000.0);
    }

    #[test]
    fn far_pair_attracts_an_accepted_swap() {
        let data = rows(&[(0.0, 0.0), (1.0, 0.0), (100.0, 0.0), (101.0, 0.0)]);
        let centers = vec![Point::new(vec![0.0, 0.0]), Point::new(vec![1.0, 0.0])];
        for seed in 0..5 {
            let mut state = CentersState::build(&data, centers.clone());
            let old = state.total_cost;
            let cfg = LsConfig { p: 1, ..LsConfig::default() };
            let mut rng = rng_from_seed(seed);
            let proposal = msls_step(&data, &mut state, &cfg, &mut rng).expect("swap accepted");
            assert_relative_eq!(state.total_cost, 2.0, max_relative = 1e-12);
            assert_relative_eq!(proposal.delta.0, 2.0 - old, max_relative = 1e-12);
            assert_eq!(proposal.in_points.len(), 1);
            assert!(proposal.in_points[0].coords[0] >= 100.0);
        }
    }

    #[test]
    fn greedy_removes_empty_center_first() {
        // Slot 2 serves nothing; its removal charge is 0, so the greedy
        // engine drops it in round one.
        let data = rows(&[
            (0.0, 0.0),
            (1.0, 0.0),
            (100.0, 0.0),
            (101.0, 0.0),
            (200.0, 0.0),
            (201.0, 0.0),
        ]);
        let centers = vec![
            Point::new(vec![0.0, 0.0]),
            Point::new(vec![100.0, 0.0]),
            Point::new(vec![500.0, 0.0]),
        ];
        let mut state = CentersState::build(&data, centers);
        let cfg = LsConfig { p: 2, ..LsConfig::default() };
        let mut rng = rng_from_seed(1);
        let proposal = msls_g_step(&data, &mut state, &cfg, &mut rng).expect("swap accepted");
        assert!(proposal.out_slots.contains(&2), "out: {:?}", proposal.out_slots);
        assert!(state.consistency_gap(&data) < 1e-12);
    }

    #[test]
    fn greedy_p1_matches_exhaustive_p1() {
        let data = rows(&[
            (0.1, 0.4),
            (0.9, 0.2),
            (3.0, 3.1),
            (3.2, 2.8),
            (7.0, 0.1),
            (7.3, 0.4),
            (0.2, 6.1),
        ]);
        let centers =
            vec![Point::new(vec![0.1, 0.4]), Point::new(vec![3.0, 3.1]), Point::new(vec![7.0, 0.1])];
        for seed in 0..40 {
            let cfg = LsConfig { p: 1, seed, ..LsConfig::default() };
            let mut a = CentersState::build(&data, centers.clone());
            let mut b = CentersState::build(&data, centers.clone());
            let mut rng_a = rng_from_seed(seed);
            let mut rng_b = rng_from_seed(seed);
            let pa = msls_step(&data, &mut a, &cfg, &mut rng_a);
            let pb = msls_g_step(&data, &mut b, &cfg, &mut rng_b);
            match (pa, pb) {
                (None, None) => {}
                (Some(x), Some(y)) => {
                    assert_eq!(x.out_slots, y.out_slots);
                    assert_eq!(x.in_points.len(), y.in_points.len());
                    for (px, py) in x.in_points.iter().zip(&y.in_points) {
                        assert_eq!(px.coords, py.coords);
                    }
                    assert_eq!(a.centers.len(), b.centers.len());
                    assert_eq!(a.total_cost, b.total_cost);
                }
                other => panic!("engines disagree at seed {seed}: {other:?}"),
            }
        }
    }

    #[test]
    fn swap_size_clamps_when_p_reaches_k() {
        let data = rows(&[(0.0, 0.0), (5.0, 0.0), (9.0, 0.0), (14.0, 0.0)]);
        let centers = vec![Point::new(vec![0.0, 0.0]), Point::new(vec![5.0, 0.0])];
        let cfg = LsConfig { p: 6, steps: 4, ..LsConfig::default() };
        let (state, traj) = run_local_search(&data, centers, &cfg, LsVariant::Msls);
        assert!(traj.non_increasing());
        assert_eq!(state.k(), 2);
        assert!(state.total_cost.is_finite());
    }

    #[test]
    fn zero_steps_returns_init_unchanged() {
        let data = rows(&[(0.0, 0.0), (2.0, 0.0)]);
        let centers = vec![Point::new(vec![0.5, 0.0])];
        let cfg = LsConfig { steps: 0, ..LsConfig::default() };
        let (state, traj) = run_local_search(&data, centers.clone(), &cfg, LsVariant::MslsG);
        assert!(traj.records.is_empty());
        assert_eq!(state.centers[0], centers[0]);
    }

    #[test]
    fn cancellation_keeps_bookkeeping_exact() {
        // p=2 on small instances: sampled points sometimes land in Out. We
        // require at least one such cancellation across the sweep and exact
        // bookkeeping everywhere.
        let data = rows(&[
            (0.0, 0.0),
            (0.5, 0.1),
            (1.0, -0.2),
            (10.0, 0.0),
            (10.5, 0.3),
            (40.0, 40.0),
        ]);
        let centers = vec![Point::new(vec![0.25, 0.0]), Point::new(vec![40.0, 40.0])];
        let mut saw_cancellation = false;
        for seed in 0..60 {
            let mut state = CentersState::build(&data, centers.clone());
            let cfg = LsConfig { p: 2, ..LsConfig::default() };
            let mut rng = rng_from_seed(seed);
            for _ in 0..4 {
                let before = state.total_cost;
                if let Some(prop) = msls_step(&data, &mut state, &cfg, &mut rng) {
                    if prop.out_slots.len() < 2 {
                        saw_cancellation = true;
                    }
                    assert_relative_eq!(
                        state.total_cost,
                        before + prop.delta.0,
                        max_relative = 1e-12
                    );
                }
                assert!(state.consistency_gap(&data) < 1e-9);
                let scratch = cost(&data, &state.centers);
                assert_relative_eq!(state.total_cost, scratch, max_relative = 1e-9);
            }
        }
        assert!(saw_cancellation, "no In∩Out overlap observed; sweep is vacuous");
    }

    #[test]
    fn bound_values() {
        let inf_msls = eta_bound(SwapBudget::Infinite, BoundVariant::Msls);
        assert!((inf_msls - 10.472135954999580).abs() < 1e-9);
        assert!(inf_msls < 10.48);
        let p1 = eta_bound(SwapBudget::Finite(1), BoundVariant::Msls);
        assert!((p1 - 26.649110640673518).abs() < 1e-9);
        assert_eq!(eta_bound(SwapBudget::Infinite, BoundVariant::Kanungo), 9.0);
        // Larger p only helps, and the comparison constant is always lower.
        let mut last = f64::INFINITY;
        for p in 1..200 {
            let b = eta_bound(SwapBudget::Finite(p), BoundVariant::Msls);
            assert!(b < last);
            assert!(b > inf_msls);
            assert!(eta_bound(SwapBudget::Finite(p), BoundVariant::Kanungo) < b);
            last = b;
        }
    }

    #[test]
    fn swap_budget_parses() {
        assert_eq!("3".parse::<SwapBudget>().unwrap(), SwapBudget::Finite(3));
        assert_eq!("inf".parse::<SwapBudget>().unwrap(), SwapBudget::Infinite);
        assert!("0".parse::<SwapBudget>().is_err());
        assert!("-2".parse::<SwapBudget>().is_err());
    }

    #[test]
    fn suggested_steps_grows_with_k() {
        assert!(suggested_steps(10, 1.0) >= 1);
        assert!(suggested_steps(100, 1.0) > suggested_steps(10, 1.0));
    }
}
