//! Two-region experiment for `dist_1^p(., {|xi| + |zeta| = 1})`: fields
//! whose region means are 1 on `Omega_1` and 0 on the rest, compared with
//! the separately convex envelope at the two-valued limit.

use serde::Serialize;

use super::minimize::pair_matrix;
use super::search::{Group, Problem, SearchTrace};
use crate::distance::{DistanceIntegrand, Norm};
use crate::error::{Error, Result};
use crate::functionals::{eval_double_integral, pairwise_sum};
use crate::grid::{PiecewiseConstantField, ScalarGrid};

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub fraction: f64,
    pub pieces_per_region: usize,
    pub p: f64,
    /// `I_{W^sc}(v)` for the two-valued limit `v`.
    pub target: f64,
    /// Constrained discrete minimum of `I_W`.
    pub minimum: f64,
    pub delta: f64,
    /// `|Omega_1|^2` times the mean of `W` over pairs inside `Omega_1`.
    pub same_region_inner: f64,
    /// The same for the complement.
    pub same_region_outer: f64,
    /// `|Omega_1| |Omega \ Omega_1|` times the mean of `W` over cross pairs;
    /// it enters the total twice.
    pub cross: f64,
    pub inner_values: Vec<f64>,
    pub outer_values: Vec<f64>,
    pub field: PiecewiseConstantField,
    pub trace: SearchTrace,
}

/// Default value grid `[-2, 2]` with spacing 1/40.
pub fn default_gap_grid() -> ScalarGrid {
    ScalarGrid::new(-2.0, 2.0, 161).expect("valid grid")
}

fn region_mean(grid: &ScalarGrid, pieces: usize, mean: f64) -> Result<i64> {
    let k = grid.index_of(mean).ok_or(Error::InfeasibleMean { mean })?;
    Ok((pieces * k) as i64)
}

/// Runs the experiment for `1..=max_pieces` sub-pieces per region.
pub fn gap_experiment_diamond_boundary(
    fraction: f64,
    max_pieces: usize,
    p: f64,
    value_grid: &ScalarGrid,
) -> Result<Vec<GapReport>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("fraction must lie in (0, 1), got {fraction}")));
    }
    if max_pieces == 0 {
        return Err(Error::InvalidArgument("need at least one piece per region".into()));
    }
    let w = DistanceIntegrand::l1_sphere(1.0, p, Norm::L1)?;
    let wsc = w.convex_hull_rule();
    let v = PiecewiseConstantField::new(vec![1.0, 0.0], vec![fraction, 1.0 - fraction])?;
    let target = eval_double_integral(&wsc, &v)?;
    let m = pair_matrix(&w, value_grid)?;
    let mut previous: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut reports = Vec::new();
    for pieces in 1..=max_pieces {
        let inner_sum = region_mean(value_grid, pieces, 1.0)?;
        let outer_sum = region_mean(value_grid, pieces, 0.0)?;
        let problem = Problem {
            m: &m,
            groups: vec![
                Group {
                    size: pieces,
                    weight: fraction / pieces as f64,
                    sum_window: Some((inner_sum, inner_sum)),
                },
                Group {
                    size: pieces,
                    weight: (1.0 - fraction) / pieces as f64,
                    sum_window: Some((outer_sum, outer_sum)),
                },
            ],
        };
        let mut seeds = Vec::new();
        for d in 1..pieces {
            if pieces % d == 0 {
                let (a, b) = &previous[d - 1];
                let rep = |x: &Vec<usize>| -> Vec<usize> {
                    x.iter().flat_map(|&k| std::iter::repeat_n(k, pieces / d)).collect()
                };
                let mut s = rep(a);
                s.extend(rep(b));
                seeds.push(s);
            }
        }
        let (found, trace) = problem.solve(8, &seeds).ok_or(Error::InfeasibleMean { mean: 1.0 })?;
        let (ia, ib) = found.assignment.split_at(pieces);
        let inner: Vec<f64> = ia.iter().map(|&k| value_grid.point(k)).collect();
        let outer: Vec<f64> = ib.iter().map(|&k| value_grid.point(k)).collect();
        let mut values = inner.clone();
        values.extend_from_slice(&outer);
        let mut fractions = vec![fraction / pieces as f64; pieces];
        fractions.extend(std::iter::repeat_n((1.0 - fraction) / pieces as f64, pieces));
        let field = PiecewiseConstantField::new(values, fractions)?;
        let minimum = eval_double_integral(&w, &field)?;
        let wr = &w;
        let block = |xs: &[f64], ys: &[f64]| -> f64 {
            let terms: Vec<f64> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| wr.eval(x, y))).collect();
            pairwise_sum(&terms) / (xs.len() * ys.len()) as f64
        };
        let same_region_inner = fraction * fraction * block(&inner, &inner);
        let same_region_outer = (1.0 - fraction) * (1.0 - fraction) * block(&outer, &outer);
        let cross = fraction * (1.0 - fraction) * block(&inner, &outer);
        previous.push((ia.to_vec(), ib.to_vec()));
        reports.push(GapReport {
            fraction,
            pieces_per_region: pieces,
            p,
            target,
            minimum,
            delta: minimum - target,
            same_region_inner,
            same_region_outer,
            cross,
            inner_values: inner,
            outer_values: outer,
            field,
            trace,
        });
    }
    Ok(reports)
}
