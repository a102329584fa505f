//! Discretization data model: value grids, grid-sampled integrands,
//! grid-masked planar sets and piecewise-constant fields.
//!
//! Row index `i` of every matrix addresses the first argument `xi`,
//! column index `j` the second argument `zeta`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative (to the spacing) distance below which a coordinate is
/// snapped to the nearest grid node.
const NODE_SNAP: f64 = 1e-9;

/// Uniform sample grid `lo + k h`, `k = 0..n-1`, on one value axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarGrid {
    lo: f64,
    hi: f64,
    n: usize,
}

impl ScalarGrid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "endpoints must be finite, got [{lo}, {hi}]"
            )));
        }
        if lo >= hi {
            return Err(Error::InvalidGrid(format!("need lo < hi, got [{lo}, {hi}]")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 samples, got {n}")));
        }
        Ok(Self { lo, hi, n })
    }

    /// Grid on `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    /// The `k`-th sample. Evaluated as a weighted endpoint average so that
    /// symmetric grids are exactly mirror symmetric and dyadic points such
    /// as `0`, `±1/2`, `±1` come out exact whenever they are nodes.
    pub fn point(&self, k: usize) -> f64 {
        debug_assert!(k < self.n);
        let m = (self.n - 1) as f64;
        let k = k as f64;
        (self.lo * (m - k) + self.hi * k) / m
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.point(k)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        let slack = NODE_SNAP * self.spacing();
        x >= self.lo - slack && x <= self.hi + slack
    }

    /// Index of the node equal to `x` (up to a snapping slack of 1e-9 h).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let t = (x - self.lo) / self.spacing();
        let k = t.round();
        if k < 0.0 || k > (self.n - 1) as f64 {
            return None;
        }
        let k = k as usize;
        ((x - self.point(k)).abs() <= NODE_SNAP * self.spacing()).then_some(k)
    }

    /// Nodes bracketing `x`: `(k, k, 0)` on a node, otherwise `(k, k + 1, t)`
    /// with `x = (1 - t) x_k + t x_{k+1}`.
    pub fn bracket(&self, x: f64) -> Option<(usize, usize, f64)> {
        if !self.contains(x) {
            return None;
        }
        if let Some(k) = self.index_of(x) {
            return Some((k, k, 0.0));
        }
        let h = self.spacing();
        let k = (((x - self.lo) / h).floor() as usize).min(self.n - 2);
        let t = ((x - self.point(k)) / h).clamp(0.0, 1.0);
        Some((k, k + 1, t))
    }

    /// Grid with half the spacing on the same box.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n - 1,
            ..*self
        }
    }
}

impl Default for ScalarGrid {
    /// `[-3, 3]` with 241 nodes, spacing 1/40.
    fn default() -> Self {
        Self {
            lo: -3.0,
            hi: 3.0,
            n: 241,
        }
    }
}

fn is_symmetric_matrix<T: PartialEq>(m: &Array2<T>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (i + 1..n).all(|j| m[[i, j]] == m[[j, i]]))
}

/// Real function on the product grid; entry `(i, j)` is `W(xi_i, zeta_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: ScalarGrid,
    values: Array2<f64>,
    symmetric: bool,
}

impl GridFunction {
    pub fn from_values(grid: ScalarGrid, values: Array2<f64>) -> Result<Self> {
        let n = grid.len();
        if values.dim() != (n, n) {
            return Err(Error::Shape {
                expected: n,
                rows: values.nrows(),
                cols: values.ncols(),
            });
        }
        if let Some(((i, j), &v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                xi: grid.point(i),
                zeta: grid.point(j),
                value: v,
            });
        }
        let symmetric = is_symmetric_matrix(&values);
        Ok(Self {
            grid,
            values,
            symmetric,
        })
    }

    pub fn constant(grid: ScalarGrid, c: f64) -> Result<Self> {
        Self::from_values(grid, Array2::from_elem((grid.len(), grid.len()), c))
    }

    pub fn grid(&self) -> &ScalarGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Bilinear interpolation; exact node values are returned untouched.
    pub fn value_at(&self, xi: f64, zeta: f64) -> Result<f64> {
        let outside = |value| Error::OutsideGrid {
            value,
            lo: self.grid.lo(),
            hi: self.grid.hi(),
        };
        let (i0, i1, s) = self.grid.bracket(xi).ok_or_else(|| outside(xi))?;
        let (j0, j1, t) = self.grid.bracket(zeta).ok_or_else(|| outside(zeta))?;
        let v = &self.values;
        if i0 == i1 && j0 == j1 {
            return Ok(v[[i0, j0]]);
        }
        if i0 == i1 {
            return Ok((1.0 - t) * v[[i0, j0]] + t * v[[i0, j1]]);
        }
        if j0 == j1 {
            return Ok((1.0 - s) * v[[i0, j0]] + s * v[[i1, j0]]);
        }
        Ok((1.0 - s) * ((1.0 - t) * v[[i0, j0]] + t * v[[i0, j1]])
            + s * ((1.0 - t) * v[[i1, j0]] + t * v[[i1, j1]]))
    }
}

/// Samples `f` on every node of the product grid.
///
/// Fails on the first (row-major) sample where `f` is not finite.
pub fn sample_function<F>(grid: &ScalarGrid, f: F) -> Result<GridFunction>
where
    F: Fn(f64, f64) -> f64,
{
    let pts = grid.points();
    let n = pts.len();
    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let v = f(pts[i], pts[j]);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    xi: pts[i],
                    zeta: pts[j],
                    value: v,
                });
            }
            values[[i, j]] = v;
        }
    }
    GridFunction::from_values(*grid, values)
}

/// Boolean mask on the product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSet {
    grid: ScalarGrid,
    mask: Array2<bool>,
    symmetric: bool,
}

impl GridSet {
    pub fn from_mask(grid: ScalarGrid, mask: Array2<bool>) -> Result<Self> {
        let n = grid.len();
        if mask.dim() != (n, n) {
            return Err(Error::Shape {
                expected: n,
                rows: mask.nrows(),
                cols: mask.ncols(),
            });
        }
        let symmetric = is_symmetric_matrix(&mask);
        Ok(Self {
            grid,
            mask,
            symmetric,
        })
    }

    pub fn from_fn(grid: ScalarGrid, f: impl Fn(usize, usize) -> bool) -> Self {
        let n = grid.len();
        let mask = Array2::from_shape_fn((n, n), |(i, j)| f(i, j));
        let symmetric = is_symmetric_matrix(&mask);
        Self {
            grid,
            mask,
            symmetric,
        }
    }

    pub fn empty(grid: ScalarGrid) -> Self {
        Self::from_fn(grid, |_, _| false)
    }

    /// Marks the nodes of the given points; every coordinate must be a node.
    pub fn from_points(grid: ScalarGrid, points: &[(f64, f64)]) -> Result<Self> {
        let n = grid.len();
        let mut mask = Array2::from_elem((n, n), false);
        for &(xi, zeta) in points {
            let i = grid.index_of(xi).ok_or_else(|| {
                Error::InvalidArgument(format!("{xi} is not a node of the grid"))
            })?;
            let j = grid.index_of(zeta).ok_or_else(|| {
                Error::InvalidArgument(format!("{zeta} is not a node of the grid"))
            })?;
            mask[[i, j]] = true;
        }
        Self::from_mask(grid, mask)
    }

    pub fn grid(&self) -> &ScalarGrid {
        &self.grid
    }

    pub fn mask(&self) -> &Array2<bool> {
        &self.mask
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.mask[[i, j]]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    /// Marked cells in row-major order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.mask
            .indexed_iter()
            .filter(|(_, &b)| b)
            .map(|(ij, _)| ij)
            .collect()
    }

    pub fn is_subset_of(&self, other: &GridSet) -> bool {
        self.mask.iter().zip(other.mask.iter()).all(|(&a, &b)| !a || b)
    }

    fn zip_with(&self, other: &GridSet, op: impl Fn(bool, bool) -> bool) -> GridSet {
        assert_eq!(self.grid, other.grid, "grid sets live on different grids");
        let n = self.grid.len();
        let mask = Array2::from_shape_fn((n, n), |ij| op(self.mask[ij], other.mask[ij]));
        let symmetric = is_symmetric_matrix(&mask);
        GridSet {
            grid: self.grid,
            mask,
            symmetric,
        }
    }

    pub fn union(&self, other: &GridSet) -> GridSet {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &GridSet) -> GridSet {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn symmetric_difference(&self, other: &GridSet) -> GridSet {
        self.zip_with(other, |a, b| a != b)
    }

    /// Membership of an arbitrary point: every node bracketing the point
    /// (one per axis on a node, two otherwise) must be marked.
    pub fn contains_point(&self, xi: f64, zeta: f64) -> bool {
        let (Some((i0, i1, _)), Some((j0, j1, _))) = (self.grid.bracket(xi), self.grid.bracket(zeta))
        else {
            return false;
        };
        [i0, i1]
            .iter()
            .all(|&i| [j0, j1].iter().all(|&j| self.mask[[i, j]]))
    }
}

/// Default slack for zero- and sublevel extraction.
pub fn default_level_eps(c: f64) -> f64 {
    1e-9 * (1.0 + c.abs())
}

/// Sublevel set `{W <= c + eps}`.
pub fn level_set(w: &GridFunction, c: f64, eps: f64) -> GridSet {
    let threshold = c + eps;
    let mask = w.values().mapv(|v| v <= threshold);
    GridSet {
        grid: *w.grid(),
        symmetric: w.is_symmetric() || is_symmetric_matrix(&mask),
        mask,
    }
}

/// Simple function on `Omega`: value `values[i]` on a part of relative
/// measure `fractions[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantField {
    values: Vec<f64>,
    fractions: Vec<f64>,
    omega_measure: f64,
}

const FRACTION_SUM_TOL: f64 = 1e-12;

impl PiecewiseConstantField {
    pub fn new(values: Vec<f64>, fractions: Vec<f64>) -> Result<Self> {
        Self::with_measure(values, fractions, 1.0)
    }

    pub fn with_measure(values: Vec<f64>, fractions: Vec<f64>, omega_measure: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidField("a field needs at least one piece".into()));
        }
        if values.len() != fractions.len() {
            return Err(Error::InvalidField(format!(
                "{} values but {} fractions",
                values.len(),
                fractions.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value {v}")));
        }
        if let Some(l) = fractions.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidField(format!("fraction {l} is not positive")));
        }
        let total: f64 = fractions.iter().sum();
        if (total - 1.0).abs() > FRACTION_SUM_TOL {
            return Err(Error::InvalidField(format!("fractions sum to {total}, not 1")));
        }
        if !(omega_measure > 0.0 && omega_measure.is_finite()) {
            return Err(Error::InvalidField(format!(
                "|Omega| must be positive, got {omega_measure}"
            )));
        }
        Ok(Self {
            values,
            fractions,
            omega_measure,
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![value], vec![1.0])
    }

    /// `values.len()` pieces of equal measure.
    pub fn equal_pieces(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(values, vec![1.0 / n as f64; n])
    }

    pub fn with_omega(mut self, omega_measure: f64) -> Result<Self> {
        if !(omega_measure > 0.0 && omega_measure.is_finite()) {
            return Err(Error::InvalidField(format!(
                "|Omega| must be positive, got {omega_measure}"
            )));
        }
        self.omega_measure = omega_measure;
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn omega_measure(&self) -> f64 {
        self.omega_measure
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.fractions)
            .map(|(v, l)| v * l)
            .sum()
    }

    /// Pieces sorted by value with equal values merged. The pair sums of a
    /// field only depend on its value distribution, so this is the form
    /// every functional evaluates.
    pub fn canonical_pieces(&self) -> Vec<(f64, f64)> {
        let mut pieces: Vec<(f64, f64)> = self
            .values
            .iter()
            .copied()
            .zip(self.fractions.iter().copied())
            .collect();
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        for (v, l) in pieces {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += l,
                _ => merged.push((v, l)),
            }
        }
        merged
    }
}

/// A value set `A` (as sorted node indices) with `A x A` inside a set `E`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CartesianPiece {
    pub members: Vec<usize>,
    pub maximal: bool,
}

impl CartesianPiece {
    pub fn min_index(&self) -> usize {
        self.members[0]
    }

    pub fn max_index(&self) -> usize {
        *self.members.last().expect("pieces are non-empty")
    }

    pub fn values(&self, grid: &ScalarGrid) -> Vec<f64> {
        self.members.iter().map(|&k| grid.point(k)).collect()
    }

    /// `[min A, max A]` in value coordinates.
    pub fn hull(&self, grid: &ScalarGrid) -> (f64, f64) {
        (grid.point(self.min_index()), grid.point(self.max_index()))
    }
}
