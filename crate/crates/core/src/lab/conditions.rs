//! Necessary conditions for a relaxation that is again a double integral.

use serde::Serialize;

use crate::envelopes::{
    default_tol, diagonalize_function, grid_min, separately_convex_envelope_default,
};
use crate::error::Result;
use crate::grid::{level_set, GridFunction, GridSet};
use crate::sets::{diagonalize_set, relaxed_cartesian_union, separately_convex_hull_set};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The hypothesis of the condition does not hold.
    NotApplicable,
    /// The necessary condition is violated.
    Fails,
    Holds,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinhatReport {
    pub min_w: f64,
    pub min_w_hat: f64,
    pub min_w_sc: f64,
    pub min_w_sc_hat: f64,
    pub tol: f64,
    pub sc_converged: bool,
    pub verdict: Verdict,
}

/// Compares `min (W^sc)-hat` against `min W` in the setting `min W-hat > min W`.
pub fn check_minhat_condition(w: &GridFunction) -> Result<MinhatReport> {
    let tol = default_tol(w);
    let min_w = grid_min(w).0;
    let min_w_hat = grid_min(&diagonalize_function(w)?).0;
    let sc = separately_convex_envelope_default(w)?;
    let min_w_sc = grid_min(&sc.function).0;
    let min_w_sc_hat = grid_min(&diagonalize_function(&sc.function)?).0;
    let verdict = if min_w_hat <= min_w + tol {
        Verdict::NotApplicable
    } else if min_w_sc_hat <= min_w + tol {
        Verdict::Fails
    } else {
        Verdict::Holds
    };
    Ok(MinhatReport {
        min_w,
        min_w_hat,
        min_w_sc,
        min_w_sc_hat,
        tol,
        sc_converged: sc.converged,
        verdict,
    })
}

#[derive(Debug, Clone)]
pub struct NessReport {
    pub verdict: Verdict,
    /// Whether the union of hull squares of the maximal pieces of the zero
    /// set agrees with the left side.
    pub piece_form_holds: bool,
    /// Diagonalized zero set of the separately convex envelope.
    pub lhs: GridSet,
    /// Separately convex hull of the diagonalized zero set.
    pub rhs: GridSet,
    /// Union of `A^co x A^co` over the maximal pieces of the zero set.
    pub rhs_pieces: GridSet,
    pub difference: GridSet,
    pub difference_pieces: GridSet,
    pub sc_converged: bool,
}

/// Compares the diagonalized zero set of `W^sc` with the separately convex
/// hull of the diagonalized zero set of `W` (and with the piecewise form).
pub fn check_ness_condition(w: &GridFunction, level_eps: f64) -> Result<NessReport> {
    let tol = default_tol(w);
    let min_w = grid_min(w).0;
    let min_w_hat = grid_min(&diagonalize_function(w)?).0;
    let applicable = min_w.abs() <= tol && min_w_hat.abs() <= tol;
    let sc = separately_convex_envelope_default(w)?;
    let zero_w = level_set(w, 0.0, level_eps);
    let lhs = diagonalize_set(&level_set(&sc.function, 0.0, level_eps))?;
    let rhs = separately_convex_hull_set(&diagonalize_set(&zero_w)?);
    let rhs_pieces = relaxed_cartesian_union(&zero_w);
    let difference = lhs.symmetric_difference(&rhs);
    let difference_pieces = lhs.symmetric_difference(&rhs_pieces);
    let verdict = if !applicable {
        Verdict::NotApplicable
    } else if difference.is_empty() {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    Ok(NessReport {
        verdict,
        piece_form_holds: difference_pieces.is_empty(),
        lhs,
        rhs,
        rhs_pieces,
        difference,
        difference_pieces,
        sc_converged: sc.converged,
    })
}
