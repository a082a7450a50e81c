//! Center-set bookkeeping: assignments, per-point costs, and per-point
//! center rankings that make "cost after removing these centers" queries
//! cheap. Local search lives and dies by this structure.

use crate::dataset::{pairwise_sum, sq_dist, Dataset, Point};

/// Entry of a per-point ranking: squared distance to a center slot.
/// Ordered by (distance, slot), so ties resolve to the lowest slot index.
pub type RankEntry = (f64, u32);

/// Signed change in total cost caused by a swap (new − old).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostDelta(pub f64);

/// A k-center solution over a dataset, with enough bookkeeping to answer
/// removal and swap queries without touching raw coordinates:
///
/// * `assign[i]`      nearest center of point i (lowest index on ties)
/// * `point_cost[i]`  squared distance to that center
/// * `total_cost`     pairwise sum of `point_cost`
/// * rank rows        all k centers sorted by (distance, index) per point
///
/// Mutations go through [`CentersState::replace_centers`], which keeps all
/// four in sync.
#[derive(Debug, Clone)]
pub struct CentersState {
    pub centers: Vec<Point>,
    pub assign: Vec<usize>,
    pub point_cost: Vec<f64>,
    pub total_cost: f64,
    rank: Vec<RankEntry>, // row-major, stride k
    n: usize,
}

/// Result of a removal query: the cost with `removed` gone, and for every
/// surviving center the extra cost of deleting it too.
#[derive(Debug, Clone)]
pub struct RemovalCharges {
    /// cost(P, centers \ removed)
    pub base_cost: f64,
    /// charge[c]: cost increase if center c is also removed. Zero for the
    /// centers in `removed`; infinite for the last survivor.
    pub charge: Vec<f64>,
}

impl CentersState {
    /// Builds the full bookkeeping for `centers` over `data`.
    ///
    /// Panics on an empty center list or a dimension mismatch.
    pub fn build(data: &Dataset, centers: Vec<Point>) -> CentersState {
        assert!(!centers.is_empty(), "build: empty center list");
        for c in &centers {
            assert_eq!(c.dim(), data.dim(), "build: center dimension mismatch");
        }
        let n = data.len();
        let k = centers.len();
        let mut state = CentersState {
            centers,
            assign: vec![0; n],
            point_cost: vec![0.0; n],
            total_cost: 0.0,
            rank: Vec::with_capacity(n * k),
            n,
        };
        state.rebuild(data);
        state
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The ranking row of point `i`: all centers sorted by (distance, slot).
    pub fn rank_row(&self, i: usize) -> &[RankEntry] {
        let k = self.k();
        &self.rank[i * k..(i + 1) * k]
    }

    fn rebuild(&mut self, data: &Dataset) {
        let k = self.k();
        self.rank.clear();
        let mut row: Vec<RankEntry> = Vec::with_capacity(k);
        for (i, x) in data.iter().enumerate() {
            row.clear();
            for (j, c) in self.centers.iter().enumerate() {
                row.push((sq_dist(x, c.as_slice()), j as u32));
            }
            row.sort_unstable_by(cmp_rank);
            self.point_cost[i] = row[0].0;
            self.assign[i] = row[0].1 as usize;
            self.rank.extend_from_slice(&row);
        }
        self.total_cost = pairwise_sum(&self.point_cost);
    }

    /// Cost of deleting centers, per survivor, with `removed` already gone.
    ///
    /// `removed` must hold distinct in-range slots and leave at least one
    /// survivor.
    pub fn eval_removals(&self, removed: &[usize]) -> RemovalCharges {
        let k = self.k();
        assert!(removed.len() < k, "eval_removals: must leave at least one survivor");
        let mut mark = vec![false; k];
        for &r in removed {
            assert!(r < k, "eval_removals: slot {} out of range", r);
            assert!(!mark[r], "eval_removals: duplicate slot {}", r);
            mark[r] = true;
        }
        let mut charge = vec![0.0; k];
        let mut base_parts = vec![0.0; self.n];
        for i in 0..self.n {
            let row = self.rank_row(i);
            let (d1, c1, d2) = first_two_survivors(row, &mark);
            base_parts[i] = d1;
            charge[c1 as usize] += d2 - d1;
        }
        RemovalCharges { base_cost: pairwise_sum(&base_parts), charge }
    }

    /// Replaces the centers at `slots` with `points`, updating assignments,
    /// costs, and rank rows incrementally. Slots must be distinct.
    pub fn replace_centers(&mut self, data: &Dataset, slots: &[usize], points: &[Point]) {
        assert_eq!(slots.len(), points.len(), "replace_centers: slot/point length mismatch");
        let columns: Vec<Vec<f64>> = points
            .iter()
            .map(|p| {
                assert_eq!(p.dim(), data.dim(), "replace_centers: dimension mismatch");
                data.iter().map(|x| sq_dist(x, p.as_slice())).collect()
            })
            .collect();
        self.replace_centers_with_columns(slots, points, &columns);
    }

    /// Same as [`replace_centers`], with the distance columns already
    /// computed (column j holds d²(x_i, points[j]) for every i).
    pub(crate) fn replace_centers_with_columns(
        &mut self,
        slots: &[usize],
        points: &[Point],
        columns: &[Vec<f64>],
    ) {
        let k = self.k();
        let mut seen = vec![false; k];
        for &s in slots {
            assert!(s < k, "replace_centers: slot {} out of range", s);
            assert!(!seen[s], "replace_centers: duplicate slot {}", s);
            seen[s] = true;
        }
        for (s, p) in slots.iter().zip(points) {
            self.centers[*s] = p.clone();
        }
        let mut fresh: Vec<RankEntry> = Vec::with_capacity(slots.len());
        let mut merged: Vec<RankEntry> = Vec::with_capacity(k);
        for i in 0..self.n {
            fresh.clear();
            for (j, &s) in slots.iter().enumerate() {
                fresh.push((columns[j][i], s as u32));
            }
            fresh.sort_unstable_by(cmp_rank);
            merged.clear();
            {
                let row = &self.rank[i * k..(i + 1) * k];
                let mut old = row.iter().filter(|e| !seen[e.1 as usize]).peekable();
                let mut new = fresh.iter().peekable();
                loop {
                    match (old.peek(), new.peek()) {
                        (Some(o), Some(f)) => {
                            if cmp_rank(o, f) != std::cmp::Ordering::Greater {
                                merged.push(**o);
                                old.next();
                            } else {
                                merged.push(**f);
                                new.next();
                            }
                        }
                        (Some(_), None) => {
                            merged.extend(old.by_ref().copied());
                        }
                        (None, Some(_)) => {
                            merged.extend(new.by_ref().copied());
                        }
                        (None, None) => break,
                    }
                }
            }
            self.rank[i * k..(i + 1) * k].copy_from_slice(&merged);
            self.point_cost[i] = merged[0].0;
            self.assign[i] = merged[0].1 as usize;
        }
        self.total_cost = pairwise_sum(&self.point_cost);
    }

    /// Largest relative disagreement between this state and a from-scratch
    /// rebuild. Test hook for the incremental-consistency contract.
    pub fn consistency_gap(&self, data: &Dataset) -> f64 {
        let scratch = CentersState::build(data, self.centers.clone());
        let mut worst: f64 = rel_gap(self.total_cost, scratch.total_cost);
        for i in 0..self.n {
            worst = worst.max(rel_gap(self.point_cost[i], scratch.point_cost[i]));
            if self.assign[i] != scratch.assign[i] {
                worst = f64::INFINITY;
            }
        }
        worst
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(1e-300);
    (a - b).abs() / scale
}

#[inline]
pub(crate) fn cmp_rank(a: &RankEntry, b: &RankEntry) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// First two surviving entries of a sorted rank row. The second distance is
/// infinite when only one center survives.
#[inline]
fn first_two_survivors(row: &[RankEntry], removed: &[bool]) -> (f64, u32, f64) {
    let mut it = row.iter().filter(|e| !removed[e.1 as usize]);
    let first = it.next().expect("no surviving center");
    let second = it.next().map(|e| e.0).unwrap_or(f64::INFINITY);
    (first.0, first.1, second)
}

/// Evaluation scratchpad for a candidate swap: the state's centers plus `m`
/// tentative insertions, indexed k..k+m after the real slots. Answers
/// "cost and removal charges if this subset were gone" over the combined
/// set, which is the inner loop of every swap search.
pub(crate) struct SwapEval {
    pub k: usize,
    pub m: usize,
    n: usize,
    ext_rank: Vec<RankEntry>, // stride k + m
    /// Column j: squared distance of every point to insertion j.
    pub in_columns: Vec<Vec<f64>>,
}

/// Reusable buffers for [`SwapEval::charges`].
pub(crate) struct ChargeBuf {
    pub mark: Vec<bool>,
    pub charge: Vec<f64>,
    pub base: f64,
}

impl ChargeBuf {
    pub fn new(width: usize) -> Self {
        ChargeBuf { mark: vec![false; width], charge: vec![0.0; width], base: 0.0 }
    }
}

impl SwapEval {
    pub fn new(data: &Dataset, state: &CentersState, inserted: &[Point]) -> SwapEval {
        let k = state.k();
        let m = inserted.len();
        let n = state.n();
        let in_columns: Vec<Vec<f64>> = inserted
            .iter()
            .map(|p| data.iter().map(|x| sq_dist(x, p.as_slice())).collect())
            .collect();
        let stride = k + m;
        let mut ext_rank: Vec<RankEntry> = Vec::with_capacity(n * stride);
        let mut fresh: Vec<RankEntry> = Vec::with_capacity(m);
        for i in 0..n {
            fresh.clear();
            for (j, col) in in_columns.iter().enumerate() {
                fresh.push((col[i], (k + j) as u32));
            }
            fresh.sort_unstable_by(cmp_rank);
            let row = state.rank_row(i);
            let (mut a, mut b) = (0, 0);
            while a < row.len() && b < fresh.len() {
                if cmp_rank(&row[a], &fresh[b]) != std::cmp::Ordering::Greater {
                    ext_rank.push(row[a]);
                    a += 1;
                } else {
                    ext_rank.push(fresh[b]);
                    b += 1;
                }
            }
            ext_rank.extend_from_slice(&row[a..]);
            ext_rank.extend_from_slice(&fresh[b..]);
        }
        SwapEval { k, m, n, ext_rank, in_columns }
    }

    pub fn width(&self) -> usize {
        self.k + self.m
    }

    fn row(&self, i: usize) -> &[RankEntry] {
        let w = self.width();
        &self.ext_rank[i * w..(i + 1) * w]
    }

    /// Fills `buf` with the cost of the combined set minus the marked
    /// entries (`buf.base`), and per-survivor removal charges. The caller
    /// sets `buf.mark` for the removed indices and clears it afterwards.
    pub fn charges(&self, buf: &mut ChargeBuf) {
        for c in buf.charge.iter_mut() {
            *c = 0.0;
        }
        // Kahan accumulation: the base feeds accept decisions checked
        // against from-scratch recomputation at 1e-9.
        let (mut base, mut comp) = (0.0f64, 0.0f64);
        for i in 0..self.n {
            let (d1, c1, d2) = first_two_survivors(self.row(i), &buf.mark);
            let y = d1 - comp;
            let t = base + y;
            comp = (t - base) - y;
            base = t;
            buf.charge[c1 as usize] += d2 - d1;
        }
        buf.base = base;
    }

    /// Per-point nearest-survivor distance with the marked entries removed.
    /// Per-point squared distance to the nearest unmarked entry, INFINITY
    /// when everything is marked (callers min the result against their own
    /// insertions).
    pub fn survivor_d2(&self, mark: &[bool], out: &mut Vec<f64>) {
        out.clear();
        for i in 0..self.n {
            let d1 = self
                .row(i)
                .iter()
                .find(|e| !mark[e.1 as usize])
                .map_or(f64::INFINITY, |e| e.0);
            out.push(d1);
        }
    }
}
