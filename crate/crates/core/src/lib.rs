//! Convexification, diagonalization and relaxation tools for scalar
//! nonlocal double-integral functionals
//! `I_W(u) = int_Omega int_Omega W(u(x), u(y)) dx dy`.
//!
//! Integrands and sets live on a uniform product grid of values; fields are
//! piecewise constant on `Omega`.

pub mod distance;
pub mod envelopes;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod hull1d;
pub mod lab;
pub mod sets;

pub use distance::{distance_integrand, DistanceIntegrand, Norm, TargetSet};
pub use envelopes::{
    boundary_tainted, convex_envelope, default_tol, diagonalize_function, grid_min,
    separately_convex_envelope, separately_level_convex_envelope, ScEnvelope, SlcEnvelope,
};
pub use error::{Error, Result};
pub use functionals::{
    check_exact_inclusion, check_relaxed_inclusion, eval_double_integral, eval_indicator,
    eval_relaxed_indicator, IndicatorValue, Integrand, PairSet,
};
pub use grid::{
    default_level_eps, level_set, sample_function, CartesianPiece, GridFunction, GridSet,
    PiecewiseConstantField, ScalarGrid,
};
pub use sets::{
    convex_hull_set, diagonalize_set, maximal_cartesian_subsets, relaxed_cartesian_union,
    separately_convex_hull_set,
};
