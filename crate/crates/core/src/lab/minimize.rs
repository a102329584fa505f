//! Minimization of double integrals over equal-fraction piecewise-constant
//! fields on a value grid.

use ndarray::Array2;
use serde::Serialize;

use super::search::{Group, Problem, SearchTrace};
use crate::envelopes::{diagonalize_function, grid_min};
use crate::error::{Error, Result};
use crate::functionals::{eval_double_integral, Integrand};
use crate::grid::{GridFunction, PiecewiseConstantField, ScalarGrid};

/// `(|Omega|^2 min W, |Omega|^2 min W-hat)` on the sample grid of `W`.
pub fn min_bounds(w: &GridFunction, omega_measure: f64) -> Result<(f64, f64)> {
    let what = diagonalize_function(w)?;
    let o2 = omega_measure * omega_measure;
    Ok((o2 * grid_min(w).0, o2 * grid_min(&what).0))
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizationReport {
    pub best_value: f64,
    pub best_field: PiecewiseConstantField,
    /// `|Omega|^2 min W` over the value grid.
    pub lower_bound: f64,
    /// `|Omega|^2 min W-hat` over the value grid.
    pub upper_bound: f64,
    pub pieces: usize,
    pub mean_constraint: Option<f64>,
    pub trace: SearchTrace,
}

#[derive(Debug, Clone)]
pub struct MinimizeOptions {
    pub value_grid: ScalarGrid,
    /// The sweep for more than three pieces uses index stride `2^refine_rounds`;
    /// descent then halves the stride down to 1.
    pub refine_rounds: u32,
    pub mean_constraint: Option<f64>,
    pub omega_measure: f64,
}

impl MinimizeOptions {
    pub fn new(value_grid: ScalarGrid) -> Self {
        Self {
            value_grid,
            refine_rounds: 3,
            mean_constraint: None,
            omega_measure: 1.0,
        }
    }
}

/// `M[a][b] = W(x_a, x_b)` on the value grid.
pub(crate) fn pair_matrix<W: Integrand + ?Sized + Sync>(w: &W, grid: &ScalarGrid) -> Result<Array2<f64>> {
    let pts = grid.points();
    let n = pts.len();
    let mut m = Array2::zeros((n, n));
    for a in 0..n {
        for b in 0..n {
            let v = w.eval_pair(pts[a], pts[b])?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    xi: pts[a],
                    zeta: pts[b],
                    value: v,
                });
            }
            m[[a, b]] = v;
        }
    }
    Ok(m)
}

/// Admissible index-sum window for `N` pieces with mean within `h/2` of
/// `mean`.
pub(crate) fn mean_window(grid: &ScalarGrid, pieces: usize, mean: f64) -> Result<(i64, i64)> {
    let t = (mean - grid.lo()) / grid.spacing();
    let n = pieces as f64;
    let lo = (n * (t - 0.5)).ceil().max(0.0) as i64;
    let hi = ((n * (t + 0.5)).floor() as i64).min((pieces * (grid.len() - 1)) as i64);
    if !mean.is_finite() || lo > hi {
        return Err(Error::InfeasibleMean { mean });
    }
    Ok((lo, hi))
}

fn bounds_from_matrix(m: &Array2<f64>) -> (f64, f64) {
    let n = m.nrows();
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    for a in 0..n {
        for b in 0..n {
            lower = lower.min(m[[a, b]]);
            upper = upper.min(m[[a, b]].max(m[[a, a]]).max(m[[b, b]]));
        }
    }
    (lower, upper)
}

/// Best equal-fraction fields with `1..=max_pieces` pieces. Each run is
/// seeded with the best fields for every divisor of its piece count
/// (replicated) and with the previous run's field with one piece doubled.
pub fn minimize_sequence<W: Integrand + ?Sized + Sync>(
    w: &W,
    max_pieces: usize,
    opts: &MinimizeOptions,
) -> Result<Vec<MinimizationReport>> {
    if max_pieces == 0 {
        return Err(Error::InvalidArgument("need at least one piece".into()));
    }
    let grid = &opts.value_grid;
    let m = pair_matrix(w, grid)?;
    let (lower, upper) = bounds_from_matrix(&m);
    let o2 = opts.omega_measure * opts.omega_measure;
    let mut best: Vec<Vec<usize>> = Vec::new();
    let mut reports = Vec::new();
    for pieces in 1..=max_pieces {
        let window = opts
            .mean_constraint
            .map(|mean| mean_window(grid, pieces, mean))
            .transpose()?;
        let problem = Problem {
            m: &m,
            groups: vec![Group {
                size: pieces,
                weight: 1.0 / pieces as f64,
                sum_window: window,
            }],
        };
        let mut seeds = Vec::new();
        for d in 1..pieces {
            if pieces % d == 0 {
                seeds.push(best[d - 1].iter().flat_map(|&k| std::iter::repeat_n(k, pieces / d)).collect());
            }
        }
        if let Some(prev) = best.last() {
            for i in 0..prev.len() {
                let mut s = prev.clone();
                s.push(prev[i]);
                seeds.push(s);
            }
        }
        let stride = 1usize << opts.refine_rounds;
        let (found, trace) = problem
            .solve(stride, &seeds)
            .ok_or(Error::InfeasibleMean {
                mean: opts.mean_constraint.unwrap_or(f64::NAN),
            })?;
        let values = found.assignment.iter().map(|&k| grid.point(k)).collect();
        let field = PiecewiseConstantField::equal_pieces(values)?.with_omega(opts.omega_measure)?;
        let best_value = eval_double_integral(w, &field)?;
        best.push(found.assignment);
        reports.push(MinimizationReport {
            best_value,
            best_field: field,
            lower_bound: o2 * lower,
            upper_bound: o2 * upper,
            pieces,
            mean_constraint: opts.mean_constraint,
            trace,
        });
    }
    Ok(reports)
}

/// Best equal-fraction field with `pieces` pieces.
pub fn minimize_discrete<W: Integrand + ?Sized + Sync>(
    w: &W,
    pieces: usize,
    opts: &MinimizeOptions,
) -> Result<MinimizationReport> {
    Ok(minimize_sequence(w, pieces, opts)?.pop().expect("at least one report"))
}
