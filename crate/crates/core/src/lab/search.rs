//! Deterministic search over index assignments on a value grid.
//!
//! An assignment is a list of value-grid indices split into groups; all
//! pieces of a group carry the same weight, so each group is kept sorted.
//! The objective is `sum_{i,j} w_i w_j M[a_i][a_j]`.

use std::cmp::Ordering;

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone)]
pub(crate) struct Group {
    pub size: usize,
    pub weight: f64,
    /// Admissible range of the index sum of the group.
    pub sum_window: Option<(i64, i64)>,
}

pub(crate) struct Problem<'a> {
    pub m: &'a Array2<f64>,
    pub groups: Vec<Group>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SearchTrace {
    /// Assignments scored by the initial sweep.
    pub sweep_evaluations: u64,
    /// Index stride of the initial sweep (1 means the full value grid).
    pub sweep_stride: usize,
    /// Whether the sweep covered every admissible assignment.
    pub exhaustive: bool,
    /// Stride halvings performed during descent.
    pub refinements: usize,
    /// Accepted descent moves over all start points.
    pub descent_moves: u64,
    /// Every descent reached a local minimum within its move budget.
    pub converged: bool,
}

const TOP_K: usize = 8;
const SWEEP_BUDGET: u128 = 2_500_000;
const MAX_DESCENT_MOVES: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Scored {
    pub value: f64,
    /// Sum of index distances to the grid centre; ties in value go to the
    /// assignment closest to the centre, then to the lexicographically
    /// smallest one.
    magnitude: usize,
    pub assignment: Vec<usize>,
}

impl Scored {
    fn new(value: f64, assignment: Vec<usize>, center: usize) -> Self {
        let magnitude = assignment.iter().map(|&k| k.abs_diff(center)).sum();
        Self {
            value,
            magnitude,
            assignment,
        }
    }
}

fn cmp_scored(a: &Scored, b: &Scored) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.magnitude.cmp(&b.magnitude))
        .then_with(|| a.assignment.cmp(&b.assignment))
}

#[derive(Default)]
struct TopK(Vec<Scored>);

impl TopK {
    fn offer(&mut self, value: f64, assignment: &[usize], center: usize) {
        if self.0.len() == TOP_K {
            let worst = self.0.last().expect("full");
            if value > worst.value {
                return;
            }
        }
        let s = Scored::new(value, assignment.to_vec(), center);
        if self.0.len() == TOP_K && cmp_scored(&s, self.0.last().expect("full")) != Ordering::Less {
            return;
        }
        let pos = self.0.partition_point(|x| cmp_scored(x, &s) == Ordering::Less);
        if self.0.get(pos) == Some(&s) {
            return;
        }
        self.0.insert(pos, s);
        self.0.truncate(TOP_K);
    }

    fn merge(mut self, other: TopK) -> TopK {
        for s in other.0 {
            let pos = self.0.partition_point(|x| cmp_scored(x, &s) == Ordering::Less);
            if self.0.get(pos) != Some(&s) {
                self.0.insert(pos, s);
            }
        }
        self.0.truncate(TOP_K);
        self
    }
}

impl Problem<'_> {
    pub fn len(&self) -> usize {
        self.groups.iter().map(|g| g.size).sum()
    }

    fn n_values(&self) -> usize {
        self.m.nrows()
    }

    pub fn objective(&self, a: &[usize]) -> f64 {
        let mut weights = Vec::with_capacity(a.len());
        for g in &self.groups {
            weights.extend(std::iter::repeat_n(g.weight, g.size));
        }
        let mut total = 0.0;
        for (i, &ai) in a.iter().enumerate() {
            let mut row = 0.0;
            for (j, &aj) in a.iter().enumerate() {
                row += weights[j] * self.m[[ai, aj]];
            }
            total += weights[i] * row;
        }
        total
    }

    fn group_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.groups
            .iter()
            .map(|g| {
                let r = start..start + g.size;
                start += g.size;
                r
            })
            .collect()
    }

    pub fn feasible(&self, a: &[usize]) -> bool {
        a.len() == self.len()
            && a.iter().all(|&k| k < self.n_values())
            && self.groups.iter().zip(self.group_ranges()).all(|(g, r)| match g.sum_window {
                None => true,
                Some((lo, hi)) => {
                    let s: i64 = a[r].iter().map(|&k| k as i64).sum();
                    (lo..=hi).contains(&s)
                }
            })
    }

    pub fn canonical(&self, a: &mut [usize]) {
        for r in self.group_ranges() {
            a[r].sort_unstable();
        }
    }

    /// Candidate sorted tuples of one group on a strided index set.
    fn group_candidates(&self, g: &Group, stride_pts: &[usize]) -> Vec<Vec<usize>> {
        let n = self.n_values() as i64;
        let free = match g.sum_window {
            None => g.size,
            Some(_) => g.size - 1,
        };
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(g.size);
        multisets(stride_pts, free, 0, &mut cur, &mut |t| match g.sum_window {
            None => out.push(t.to_vec()),
            Some((lo, hi)) => {
                let s: i64 = t.iter().map(|&k| k as i64).sum();
                for last in (lo - s).max(0)..=(hi - s).min(n - 1) {
                    let mut v = t.to_vec();
                    v.push(last as usize);
                    v.sort_unstable();
                    out.push(v);
                }
            }
        });
        out.sort();
        out.dedup();
        out
    }

    fn stride_points(&self, stride: usize) -> Vec<usize> {
        let n = self.n_values();
        let c = n / 2;
        let mut pts: Vec<usize> = (0..=c / stride).map(|k| c - k * stride).collect();
        pts.extend((1..).map(|k| c + k * stride).take_while(|&k| k < n));
        pts.sort_unstable();
        pts
    }

    /// Best assignments of the initial sweep.
    fn sweep(&self, base_stride: usize, trace: &mut SearchTrace) -> Vec<Scored> {
        let small = self.groups.iter().all(|g| g.size <= 3);
        let mut stride = if small { 1 } else { base_stride.max(1) };
        let lists = loop {
            let pts = self.stride_points(stride);
            let lists: Vec<Vec<Vec<usize>>> = self.groups.iter().map(|g| self.group_candidates(g, &pts)).collect();
            let total: u128 = lists.iter().map(|l| l.len() as u128).product();
            if small || total <= SWEEP_BUDGET || stride >= self.n_values() {
                break lists;
            }
            stride *= 2;
        };
        trace.sweep_stride = stride;
        trace.exhaustive = stride == 1;
        let total: u64 = lists.iter().map(|l| l.len() as u64).product();
        trace.sweep_evaluations = total;
        if total == 0 {
            return Vec::new();
        }
        let len = self.len();
        let center = self.n_values() / 2;
        (0..total)
            .into_par_iter()
            .fold(
                || (TopK::default(), Vec::with_capacity(len)),
                |(mut top, mut buf), idx| {
                    buf.clear();
                    let mut rest = idx;
                    let mut parts = Vec::with_capacity(lists.len());
                    for l in lists.iter().rev() {
                        parts.push(&l[(rest % l.len() as u64) as usize]);
                        rest /= l.len() as u64;
                    }
                    for p in parts.into_iter().rev() {
                        buf.extend_from_slice(p);
                    }
                    let v = self.objective(&buf);
                    top.offer(v, &buf, center);
                    (top, buf)
                },
            )
            .map(|(top, _)| top)
            .reduce(TopK::default, TopK::merge)
            .0
    }

    /// Best-improvement descent with single and sum-preserving pair moves,
    /// on strides `stride, stride/2, ..., 1`.
    fn descend(&self, start: Scored, stride: usize, trace: &mut SearchTrace) -> (Scored, bool) {
        let n = self.n_values() as i64;
        let ranges = self.group_ranges();
        let mut cur = start;
        let mut sigma = stride.max(1);
        let mut moves = 0;
        loop {
            loop {
                let mut best: Option<Scored> = None;
                let consider = |cand: Vec<usize>, best: &mut Option<Scored>| {
                    let mut cand = cand;
                    self.canonical(&mut cand);
                    if !self.feasible(&cand) {
                        return;
                    }
                    let s = Scored::new(self.objective(&cand), cand, self.n_values() / 2);
                    if s.value < cur.value
                        && best.as_ref().is_none_or(|b| cmp_scored(&s, b) == Ordering::Less)
                    {
                        *best = Some(s);
                    }
                };
                for (g, r) in self.groups.iter().zip(&ranges) {
                    for i in r.clone() {
                        let ai = cur.assignment[i] as i64;
                        if g.sum_window.is_none() {
                            let mut k = ai - sigma as i64 * (ai / sigma as i64);
                            while k < n {
                                if k != ai {
                                    let mut c = cur.assignment.clone();
                                    c[i] = k as usize;
                                    consider(c, &mut best);
                                }
                                k += sigma as i64;
                            }
                        }
                        for j in i + 1..r.end {
                            let aj = cur.assignment[j] as i64;
                            let kmax = (n - 1 - ai).min(aj);
                            let kmin = -(ai.min(n - 1 - aj));
                            let step = sigma as i64;
                            let mut d = kmin - kmin.rem_euclid(step);
                            if d < kmin {
                                d += step;
                            }
                            while d <= kmax {
                                if d != 0 {
                                    let mut c = cur.assignment.clone();
                                    c[i] = (ai + d) as usize;
                                    c[j] = (aj - d) as usize;
                                    consider(c, &mut best);
                                }
                                d += step;
                            }
                        }
                    }
                }
                match best {
                    Some(b) => {
                        cur = b;
                        moves += 1;
                        trace.descent_moves += 1;
                        if moves >= MAX_DESCENT_MOVES {
                            return (cur, false);
                        }
                    }
                    None => break,
                }
            }
            if sigma == 1 {
                return (cur, true);
            }
            sigma /= 2;
            trace.refinements += 1;
        }
    }

    /// Sweep, then descend from the best sweep candidates and the seeds.
    pub fn solve(&self, base_stride: usize, seeds: &[Vec<usize>]) -> Option<(Scored, SearchTrace)> {
        let mut trace = SearchTrace {
            converged: true,
            ..SearchTrace::default()
        };
        let mut starts = self.sweep(base_stride, &mut trace);
        for s in seeds {
            let mut a = s.clone();
            self.canonical(&mut a);
            if self.feasible(&a) {
                starts.push(Scored::new(self.objective(&a), a, self.n_values() / 2));
            }
        }
        starts.sort_by(cmp_scored);
        starts.dedup();
        let stride = trace.sweep_stride;
        let results: Vec<(Scored, SearchTrace, bool)> = starts
            .into_par_iter()
            .map(|s| {
                let mut t = SearchTrace::default();
                let (r, ok) = self.descend(s, stride, &mut t);
                (r, t, ok)
            })
            .collect();
        let mut best: Option<Scored> = None;
        let mut refinements = 0;
        for (r, t, ok) in results {
            trace.descent_moves += t.descent_moves;
            refinements = refinements.max(t.refinements);
            trace.converged &= ok;
            if best.as_ref().is_none_or(|b| cmp_scored(&r, b) == Ordering::Less) {
                best = Some(r);
            }
        }
        trace.refinements = refinements;
        best.map(|b| (b, trace))
    }
}

/// Calls `f` on every non-decreasing `k`-tuple drawn from `pts`.
fn multisets(pts: &[usize], k: usize, from: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for idx in from..pts.len() {
        cur.push(pts[idx]);
        multisets(pts, k, idx, cur, f);
        cur.pop();
    }
}
