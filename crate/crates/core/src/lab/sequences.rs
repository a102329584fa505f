//! Oscillating fields with values in a prescribed set: the zig-zag
//! construction and the recovery sequence for product targets.

use serde::Serialize;

use crate::distance::{DistanceIntegrand, Norm, TargetSet};
use crate::error::{Error, Result};
use crate::functionals::eval_double_integral;
use crate::grid::PiecewiseConstantField;

fn sorted_set(a: &[f64]) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Err(Error::Empty("value set"));
    }
    if let Some(v) = a.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite value {v} in value set")));
    }
    let mut s = a.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup();
    Ok(s)
}

/// Replaces each piece by `2j` alternating sub-pieces on the two adjacent
/// elements of `A` bracketing its value. Pieces whose value is already in
/// `A` are kept as they are.
pub fn zigzag_sequence(target: &PiecewiseConstantField, a: &[f64], j: usize) -> Result<PiecewiseConstantField> {
    if j == 0 {
        return Err(Error::InvalidArgument("refinement index must be at least 1".into()));
    }
    let a = sorted_set(a)?;
    let (lo, hi) = (a[0], a[a.len() - 1]);
    let mut values = Vec::new();
    let mut fractions = Vec::new();
    for (&v, &l) in target.values().iter().zip(target.fractions()) {
        if v < lo || v > hi {
            return Err(Error::OutsideHull { value: v, lo, hi });
        }
        if a.binary_search_by(|x| x.total_cmp(&v)).is_ok() {
            values.push(v);
            fractions.push(l);
            continue;
        }
        let k = a.partition_point(|&x| x < v);
        let (left, right) = (a[k - 1], a[k]);
        let t = (v - left) / (right - left);
        let jf = j as f64;
        for _ in 0..j {
            values.push(left);
            fractions.push(l * (1.0 - t) / jf);
            values.push(right);
            fractions.push(l * t / jf);
        }
    }
    PiecewiseConstantField::with_measure(values, fractions, target.omega_measure())
}

/// Closed form of the separately convex envelope of `dist_q^p(., A x A)`:
/// the distance to the square `A^co x A^co`.
pub fn cartesian_sc_envelope(a: &[f64], p: f64, norm: Norm) -> Result<DistanceIntegrand> {
    let a = sorted_set(a)?;
    DistanceIntegrand::new(
        TargetSet::Square {
            lo: a[0],
            hi: a[a.len() - 1],
        },
        p,
        norm,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct Recovery {
    pub field: PiecewiseConstantField,
    /// `I_W` of the oscillating field.
    pub value: f64,
    /// `I_{W^sc}` of the target.
    pub sc_value: f64,
}

/// For `W = dist_q^p(., A x A)`: oscillates every piece of `v` inside
/// `A^co` between elements of `A`, keeps the others, and evaluates both
/// sides of the recovery identity.
pub fn recovery_sequence_cartesian(
    v: &PiecewiseConstantField,
    a: &[f64],
    p: f64,
    norm: Norm,
    j: usize,
) -> Result<Recovery> {
    let set = sorted_set(a)?;
    let (lo, hi) = (set[0], set[set.len() - 1]);
    let w = DistanceIntegrand::cartesian(set.clone(), p, norm)?;
    let wsc = cartesian_sc_envelope(&set, p, norm)?;
    let mut values = Vec::new();
    let mut fractions = Vec::new();
    for (&x, &l) in v.values().iter().zip(v.fractions()) {
        if (lo..=hi).contains(&x) {
            let piece = PiecewiseConstantField::new(vec![x], vec![1.0])?;
            let osc = zigzag_sequence(&piece, &set, j)?;
            values.extend_from_slice(osc.values());
            fractions.extend(osc.fractions().iter().map(|f| f * l));
        } else {
            values.push(x);
            fractions.push(l);
        }
    }
    let field = PiecewiseConstantField::with_measure(values, fractions, v.omega_measure())?;
    Ok(Recovery {
        value: eval_double_integral(&w, &field)?,
        sc_value: eval_double_integral(&wsc, v)?,
        field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(values: &[f64], fractions: &[f64]) -> PiecewiseConstantField {
        PiecewiseConstantField::new(values.to_vec(), fractions.to_vec()).unwrap()
    }

    #[test]
    fn zigzag_examples() {
        let z = zigzag_sequence(&field(&[0.0], &[1.0]), &[-0.5, 0.5], 3).unwrap();
        assert_eq!(z.len(), 6);
        assert_eq!(z.values(), &[-0.5, 0.5, -0.5, 0.5, -0.5, 0.5]);
        assert!(z.fractions().iter().all(|&f| f == 1.0 / 6.0));
        assert_eq!(z.mean(), 0.0);

        let z = zigzag_sequence(&field(&[0.25], &[1.0]), &[0.0, 1.0], 2).unwrap();
        assert_eq!(z.values(), &[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(z.fractions(), &[0.375, 0.125, 0.375, 0.125]);

        let z = zigzag_sequence(&field(&[1.0, 0.5], &[0.5, 0.5]), &[0.0, 1.0], 1).unwrap();
        assert_eq!(z.values(), &[1.0, 0.0, 1.0]);

        assert!(matches!(
            zigzag_sequence(&field(&[2.0], &[1.0]), &[0.0, 1.0], 1),
            Err(Error::OutsideHull { .. })
        ));
    }

    #[test]
    fn recovery_examples() {
        let a = [-1.0, 1.0];
        let r = recovery_sequence_cartesian(&field(&[0.0], &[1.0]), &a, 1.0, Norm::L1, 5).unwrap();
        assert_eq!((r.value, r.sc_value), (0.0, 0.0));

        let r = recovery_sequence_cartesian(&field(&[2.0], &[1.0]), &a, 1.0, Norm::L1, 5).unwrap();
        assert_eq!(r.field.values(), &[2.0]);
        assert_eq!(r.value, 2.0);

        // 1/4 W_sc(0,0) + 1/4 W(2,2) + 1/2 W_sc(0,2) = 0 + 1/2 + 1/2
        let r = recovery_sequence_cartesian(&field(&[0.0, 2.0], &[0.5, 0.5]), &a, 1.0, Norm::L1, 4).unwrap();
        assert_eq!(r.sc_value, 1.0);
        assert!((r.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sc_envelope_matches_four_branch_formula() {
        let a = [-1.0, 0.3, 1.0];
        let w = DistanceIntegrand::cartesian(a.to_vec(), 2.0, Norm::L2).unwrap();
        let wsc = cartesian_sc_envelope(&a, 2.0, Norm::L2).unwrap();
        let inside = |x: f64| (-1.0..=1.0).contains(&x);
        for &x in &[-2.5, -1.0, -0.2, 0.7, 1.0, 1.8] {
            for &y in &[-3.0, -0.9, 0.0, 1.0, 2.2] {
                let expect = match (inside(x), inside(y)) {
                    (true, true) => 0.0,
                    (false, false) => w.eval(x, y),
                    (true, false) => w.eval(1.0, y),
                    (false, true) => w.eval(x, -1.0),
                };
                assert_eq!(wsc.eval(x, y), expect);
            }
        }
    }
}
