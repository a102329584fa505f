//! Convex, separately convex and separately level convex envelopes of grid
//! functions, plus function diagonalization.
//!
//! All envelopes work in index coordinates; convexity is invariant under
//! the affine map from indices to values.

use ndarray::{Array2, Axis, Zip};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{default_level_eps, GridFunction, GridSet, ScalarGrid};
use crate::hull1d::{convex_minorant_into, lower_hull};

/// Default sweep tolerance `1e-9 (1 + max|W|)`.
pub fn default_tol(w: &GridFunction) -> f64 {
    1e-9 * (1.0 + w.max_abs())
}

/// Default sweep budget `10 n`.
pub fn default_max_iter(w: &GridFunction) -> usize {
    10 * w.grid().len()
}

/// Exact matrix minimum and its first row-major argmin.
pub fn grid_min(w: &GridFunction) -> (f64, (usize, usize)) {
    let mut best = (f64::INFINITY, (0, 0));
    for ((i, j), &v) in w.values().indexed_iter() {
        if v < best.0 {
            best = (v, (i, j));
        }
    }
    best
}

/// `max(W(xi, zeta), W(xi, xi), W(zeta, zeta))`.
pub fn diagonalize_function(w: &GridFunction) -> Result<GridFunction> {
    if !w.is_symmetric() {
        return Err(Error::NotSymmetric("integrand"));
    }
    let n = w.grid().len();
    let diag: Vec<f64> = (0..n).map(|k| w.get(k, k)).collect();
    let values = Array2::from_shape_fn((n, n), |(i, j)| w.get(i, j).max(diag[i]).max(diag[j]));
    GridFunction::from_values(*w.grid(), values)
}

/// Cells whose 1-norm distance to the boundary of the truncation box is at
/// most 1.
pub fn boundary_tainted(grid: &ScalarGrid) -> GridSet {
    let pts = grid.points();
    let slack = 1e-9 * grid.spacing();
    let near = |x: f64| (x - grid.lo()).min(grid.hi() - x) <= 1.0 + slack;
    GridSet::from_fn(*grid, |i, j| near(pts[i]) || near(pts[j]))
}

/// `max(V, V^T)` when the source was symmetric. Both are below the source
/// and carry the same convexity, so the result is a valid envelope that is
/// exactly symmetric.
fn symmetrize_like(source: &GridFunction, mut v: Array2<f64>) -> Array2<f64> {
    if source.is_symmetric() {
        let t = v.t().to_owned();
        Zip::from(&mut v).and(&t).for_each(|a, &b| *a = a.max(b));
    }
    v
}

// ---------------------------------------------------------------------------
// convex envelope

/// Lower hull of one column `i -> f(i, j)` with its edge slopes.
struct ColumnHull {
    vertices: Vec<usize>,
    slopes: Vec<f64>,
}

impl ColumnHull {
    fn new(col: &[f64]) -> Self {
        let vertices = lower_hull(col);
        let slopes = vertices
            .windows(2)
            .map(|w| (col[w[1]] - col[w[0]]) / (w[1] - w[0]) as f64)
            .collect();
        Self { vertices, slopes }
    }

    /// Row minimizing `f(i, j) - s i` (the smallest one on ties).
    fn argmin(&self, s: f64) -> usize {
        self.vertices[self.slopes.partition_point(|&m| m < s)]
    }
}

/// For a fixed first slope `s`, the profile `psi(j) = min_i f(i, j) - s i`,
/// its convex minorant and the barycentric row index of that minorant.
struct Profile {
    conv: Vec<f64>,
    rows: Vec<f64>,
}

fn profile(f: &Array2<f64>, hulls: &[ColumnHull], s: f64, psi: &mut [f64], arg: &mut [usize]) -> Profile {
    let n = hulls.len();
    for j in 0..n {
        let i = hulls[j].argmin(s);
        arg[j] = i;
        psi[j] = f[[i, j]] - s * i as f64;
    }
    let mut conv = vec![0.0; n];
    let mut rows = vec![0.0; n];
    let hull = lower_hull(psi);
    conv[hull[0]] = psi[hull[0]];
    rows[hull[0]] = arg[hull[0]] as f64;
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let span = (b - a) as f64;
        for k in a + 1..=b {
            let t = (k - a) as f64 / span;
            conv[k] = if k == b { psi[b] } else { (1.0 - t) * psi[a] + t * psi[b] };
            rows[k] = if k == b {
                arg[b] as f64
            } else {
                (1.0 - t) * arg[a] as f64 + t * arg[b] as f64
            };
        }
    }
    Profile { conv, rows }
}

/// `phi(s)` and a supergradient at one cell, from scratch.
fn phi_at(f: &Array2<f64>, hulls: &[ColumnHull], s: f64, i0: usize, j0: usize, psi: &mut [f64], arg: &mut [usize]) -> (f64, f64) {
    let n = hulls.len();
    for j in 0..n {
        let i = hulls[j].argmin(s);
        arg[j] = i;
        psi[j] = f[[i, j]] - s * i as f64;
    }
    // value of the convex minorant of psi at j0: best chord over a <= j0 <= b
    let hull = lower_hull(psi);
    let k = hull.partition_point(|&v| v < j0);
    let (val, row) = if hull[k.min(hull.len() - 1)] == j0 {
        (psi[j0], arg[j0] as f64)
    } else {
        let (a, b) = (hull[k - 1], hull[k]);
        let t = (j0 - a) as f64 / (b - a) as f64;
        ((1.0 - t) * psi[a] + t * psi[b], (1.0 - t) * arg[a] as f64 + t * arg[b] as f64)
    };
    (s * i0 as f64 + val, i0 as f64 - row)
}

/// Largest convex function below `W` on the grid square, i.e. the lower
/// hull of the lifted samples evaluated at the nodes.
///
/// Works through the partial conjugate in the first variable: for a fixed
/// first slope `s` the second variable is convexified exactly by a 1D hull,
/// and the remaining concave, piecewise linear problem in `s` is solved per
/// cell by a dense sample over `2n - 1` slopes followed by exact
/// tangent-intersection refinement.
pub fn convex_envelope(w: &GridFunction) -> GridFunction {
    let n = w.grid().len();
    let f = w.values();
    let hulls: Vec<ColumnHull> = (0..n)
        .map(|j| ColumnHull::new(&f.column(j).to_vec()))
        .collect();
    let smin = hulls.iter().flat_map(|h| h.slopes.first()).copied().fold(f64::INFINITY, f64::min);
    let smax = hulls.iter().flat_map(|h| h.slopes.last()).copied().fold(f64::NEG_INFINITY, f64::max);
    let m = 2 * n - 1;
    let slopes: Vec<f64> = (0..m)
        .map(|k| {
            let t = k as f64 / (m - 1) as f64;
            (1.0 - t) * smin + t * smax
        })
        .collect();
    let profiles: Vec<Profile> = slopes
        .par_iter()
        .map_init(
            || (vec![0.0; n], vec![0usize; n]),
            |(psi, arg), &s| profile(f, &hulls, s, psi, arg),
        )
        .collect();
    let eps = 1e-13 * (1.0 + w.max_abs()) * n as f64;

    let mut out = Array2::zeros((n, n));
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each_init(
            || (vec![0.0; n], vec![0usize; n]),
            |(psi, arg), (i0, mut row)| {
                for j0 in 0..n {
                    let at = |k: usize| {
                        let p = &profiles[k];
                        (slopes[k] * i0 as f64 + p.conv[j0], i0 as f64 - p.rows[j0])
                    };
                    let mut kbest = 0;
                    let mut best = at(0).0;
                    for k in 1..m {
                        let v = at(k).0;
                        if v > best {
                            best = v;
                            kbest = k;
                        }
                    }
                    let (ka, kb) = (kbest.saturating_sub(1), (kbest + 1).min(m - 1));
                    let (mut a, mut b) = (slopes[ka], slopes[kb]);
                    let (mut fa, mut ga) = at(ka);
                    let (mut fb, mut gb) = at(kb);
                    for _ in 0..60 {
                        if !(ga > gb) || b <= a {
                            break;
                        }
                        let t = ((fb - fa + ga * a - gb * b) / (ga - gb)).clamp(a, b);
                        let upper = fa + ga * (t - a);
                        let (ft, gt) = phi_at(f, &hulls, t, i0, j0, psi, arg);
                        best = best.max(ft);
                        if upper - best <= eps || t == a || t == b {
                            break;
                        }
                        if gt > 0.0 {
                            (a, fa, ga) = (t, ft, gt);
                        } else if gt < 0.0 {
                            (b, fb, gb) = (t, ft, gt);
                        } else {
                            break;
                        }
                    }
                    row[j0] = best.min(f[[i0, j0]]);
                }
            },
        );
    let out = symmetrize_like(w, out);
    GridFunction::from_values(*w.grid(), out).expect("envelope of finite data is finite")
}

// ---------------------------------------------------------------------------
// separately convex envelope

#[derive(Debug, Clone)]
pub struct ScEnvelope {
    pub function: GridFunction,
    pub converged: bool,
    pub sweeps: usize,
    /// Sup-norm change of the last sweep.
    pub last_change: f64,
}

fn convexify_rows(v: &mut Array2<f64>) -> f64 {
    v.axis_iter_mut(Axis(0))
        .into_par_iter()
        .map(|mut row| {
            let src = row.to_vec();
            let mut dst = vec![0.0; src.len()];
            convex_minorant_into(&src, &mut dst);
            let mut change = 0.0_f64;
            for (r, (&a, &b)) in row.iter_mut().zip(src.iter().zip(&dst)) {
                change = change.max((a - b).abs());
                *r = b;
            }
            change
        })
        .reduce(|| 0.0, f64::max)
}

/// Alternating row/column 1D convexification until a full sweep moves no
/// cell by `tol` or more.
pub fn separately_convex_envelope(w: &GridFunction, tol: f64, max_iter: usize) -> Result<ScEnvelope> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let mut v = w.values().clone();
    let mut converged = false;
    let mut sweeps = 0;
    let mut last_change = f64::INFINITY;
    while sweeps < max_iter {
        sweeps += 1;
        let rows = convexify_rows(&mut v);
        let mut t = v.t().to_owned();
        let cols = convexify_rows(&mut t);
        v = t.t().to_owned();
        last_change = rows.max(cols);
        if last_change < tol {
            converged = true;
            break;
        }
    }
    let v = symmetrize_like(w, v);
    Ok(ScEnvelope {
        function: GridFunction::from_values(*w.grid(), v)?,
        converged,
        sweeps,
        last_change,
    })
}

/// [`separately_convex_envelope`] with the default tolerance and budget.
pub fn separately_convex_envelope_default(w: &GridFunction) -> Result<ScEnvelope> {
    separately_convex_envelope(w, default_tol(w), default_max_iter(w))
}

// ---------------------------------------------------------------------------
// separately level convex envelope

#[derive(Debug, Clone)]
pub struct SlcEnvelope {
    pub function: GridFunction,
    /// Some cell was not covered by any listed level and got the top one.
    pub saturated: bool,
    pub levels: usize,
}

/// `count` uniform levels from `min W` to `max W`.
pub fn uniform_levels(w: &GridFunction, count: usize) -> Vec<f64> {
    let (lo, _) = grid_min(w);
    let hi = w.max();
    if count < 2 || hi == lo {
        return vec![lo];
    }
    (0..count)
        .map(|k| {
            let t = k as f64 / (count - 1) as f64;
            if k == count - 1 {
                hi
            } else {
                (1.0 - t) * lo + t * hi
            }
        })
        .collect()
}

pub const DEFAULT_SLC_LEVELS: usize = 512;

/// `V(x)` = smallest listed level `c` with `x` in the separately convex
/// hull of `{W <= c}`.
pub fn separately_level_convex_envelope(w: &GridFunction, levels: &[f64]) -> Result<SlcEnvelope> {
    if levels.is_empty() {
        return Err(Error::Empty("level list"));
    }
    if levels.windows(2).any(|p| !(p[0] < p[1])) || levels.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("levels must be finite and strictly increasing".into()));
    }
    let n = w.grid().len();
    let top = *levels.last().expect("non-empty");
    let mut out = Array2::from_elem((n, n), f64::NAN);
    let mut hull = Array2::from_elem((n, n), false);
    for &c in levels {
        let threshold = c + default_level_eps(c);
        // the previous hull lies inside this one, so it seeds the closure
        Zip::from(&mut hull).and(w.values()).for_each(|h, &v| *h |= v <= threshold);
        close_separately(&mut hull);
        Zip::from(&mut out).and(&hull).for_each(|o, &h| {
            if h && o.is_nan() {
                *o = c;
            }
        });
    }
    let mut saturated = false;
    out.mapv_inplace(|o| {
        if o.is_nan() {
            saturated = true;
            top
        } else {
            o
        }
    });
    Ok(SlcEnvelope {
        function: GridFunction::from_values(*w.grid(), out)?,
        saturated,
        levels: levels.len(),
    })
}

fn close_separately(mask: &mut Array2<bool>) {
    let n = mask.nrows();
    let fill = |line: &mut ndarray::ArrayViewMut1<bool>| -> bool {
        let Some(first) = line.iter().position(|&b| b) else {
            return false;
        };
        let last = n - 1 - line.iter().rev().position(|&b| b).expect("has a marked cell");
        let mut changed = false;
        for k in first + 1..last {
            if !line[k] {
                line[k] = true;
                changed = true;
            }
        }
        changed
    };
    loop {
        let mut changed = false;
        for mut row in mask.axis_iter_mut(Axis(0)) {
            changed |= fill(&mut row);
        }
        for mut col in mask.axis_iter_mut(Axis(1)) {
            changed |= fill(&mut col);
        }
        if !changed {
            break;
        }
    }
}
