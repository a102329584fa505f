//! Double-integral and indicator functionals on piecewise-constant fields.

use serde::Serialize;

use crate::distance::DistanceIntegrand;
use crate::error::{Error, Result};
use crate::grid::{CartesianPiece, GridFunction, GridSet, PiecewiseConstantField};
use crate::sets::maximal_cartesian_subsets;

/// A pointwise rule `(xi, zeta) -> W(xi, zeta)`.
pub trait Integrand {
    fn eval_pair(&self, xi: f64, zeta: f64) -> Result<f64>;
}

impl Integrand for GridFunction {
    /// Bilinear interpolation; values outside the box are rejected.
    fn eval_pair(&self, xi: f64, zeta: f64) -> Result<f64> {
        self.value_at(xi, zeta)
    }
}

impl Integrand for DistanceIntegrand {
    fn eval_pair(&self, xi: f64, zeta: f64) -> Result<f64> {
        Ok(self.eval(xi, zeta))
    }
}

/// Wraps a closure as an exact integrand.
pub struct FnIntegrand<F>(pub F);

impl<F: Fn(f64, f64) -> f64> Integrand for FnIntegrand<F> {
    fn eval_pair(&self, xi: f64, zeta: f64) -> Result<f64> {
        Ok((self.0)(xi, zeta))
    }
}

impl<T: Integrand + ?Sized> Integrand for &T {
    fn eval_pair(&self, xi: f64, zeta: f64) -> Result<f64> {
        (**self).eval_pair(xi, zeta)
    }
}

/// Fixed-tree pairwise summation, independent of thread scheduling.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `|Omega|^2 sum_{i,j} lambda_i lambda_j W(xi_i, xi_j)`.
///
/// Pieces are sorted and merged first, so reordering pieces or splitting a
/// piece into equal-valued parts does not change the result.
pub fn eval_double_integral<W: Integrand + ?Sized>(w: &W, u: &PiecewiseConstantField) -> Result<f64> {
    let pieces = u.canonical_pieces();
    let mut terms = Vec::with_capacity(pieces.len() * pieces.len());
    for &(a, la) in &pieces {
        for &(b, lb) in &pieces {
            terms.push(la * lb * w.eval_pair(a, b)?);
        }
    }
    let omega = u.omega_measure();
    Ok(omega * omega * pairwise_sum(&terms))
}

/// Membership rule for pairs.
pub trait PairSet {
    fn contains_pair(&self, xi: f64, zeta: f64) -> bool;
}

impl PairSet for GridSet {
    fn contains_pair(&self, xi: f64, zeta: f64) -> bool {
        self.contains_point(xi, zeta)
    }
}

impl PairSet for DistanceIntegrand {
    /// Exact membership in the target set.
    fn contains_pair(&self, xi: f64, zeta: f64) -> bool {
        self.contains(xi, zeta)
    }
}

/// Exact set given by a closure.
pub struct FnSet<F>(pub F);

impl<F: Fn(f64, f64) -> bool> PairSet for FnSet<F> {
    fn contains_pair(&self, xi: f64, zeta: f64) -> bool {
        (self.0)(xi, zeta)
    }
}

/// Value of an indicator functional.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "value", rename_all = "snake_case")]
pub enum IndicatorValue {
    Zero,
    /// `+inf`, with the value pairs that left the set.
    Infinite { violations: Vec<(f64, f64)> },
}

impl IndicatorValue {
    pub fn is_zero(&self) -> bool {
        matches!(self, IndicatorValue::Zero)
    }
}

fn violations<K: PairSet + ?Sized>(k: &K, u: &PiecewiseConstantField) -> Vec<(f64, f64)> {
    let pieces = u.canonical_pieces();
    let mut out = Vec::new();
    for &(a, _) in &pieces {
        for &(b, _) in &pieces {
            if !k.contains_pair(a, b) {
                out.push((a, b));
            }
        }
    }
    out
}

/// 0 when every value pair of `u` (diagonal pairs included) lies in `K`.
pub fn eval_indicator<K: PairSet + ?Sized>(k: &K, u: &PiecewiseConstantField) -> IndicatorValue {
    let v = violations(k, u);
    if v.is_empty() {
        IndicatorValue::Zero
    } else {
        IndicatorValue::Infinite { violations: v }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionCheck {
    pub holds: bool,
    /// First violating pair, in sorted value order.
    pub witness: Option<(f64, f64)>,
}

pub fn check_exact_inclusion<K: PairSet + ?Sized>(u: &PiecewiseConstantField, k: &K) -> InclusionCheck {
    let witness = violations(k, u).into_iter().next();
    InclusionCheck {
        holds: witness.is_none(),
        witness,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxedInclusionCheck {
    pub holds: bool,
    /// First maximal piece (in enumeration order) whose hull holds all values.
    pub piece: Option<CartesianPiece>,
}

/// Does some maximal piece `A` of `K` satisfy `u in [min A, max A]`?
pub fn check_relaxed_inclusion(u: &PiecewiseConstantField, k: &GridSet) -> Result<RelaxedInclusionCheck> {
    if !k.is_symmetric() {
        return Err(Error::NotSymmetric("set"));
    }
    let grid = k.grid();
    // node brackets, so the test agrees with grid-set point membership
    let brackets: Option<Vec<(usize, usize)>> = u
        .values()
        .iter()
        .map(|&v| grid.bracket(v).map(|(a, b, _)| (a, b)))
        .collect();
    let Some(brackets) = brackets else {
        return Ok(RelaxedInclusionCheck { holds: false, piece: None });
    };
    let piece = maximal_cartesian_subsets(k).into_iter().find(|p| {
        brackets
            .iter()
            .all(|&(a, b)| a >= p.min_index() && b <= p.max_index())
    });
    Ok(RelaxedInclusionCheck {
        holds: piece.is_some(),
        piece,
    })
}

/// The relaxed indicator: 0 iff the relaxed inclusion holds. Violations are
/// reported against the union of the hull squares.
pub fn eval_relaxed_indicator(k: &GridSet, u: &PiecewiseConstantField) -> Result<IndicatorValue> {
    if check_relaxed_inclusion(u, k)?.holds {
        return Ok(IndicatorValue::Zero);
    }
    let rlx = crate::sets::relaxed_cartesian_union(k);
    let v = violations(&rlx, u);
    Ok(IndicatorValue::Infinite { violations: v })
}
