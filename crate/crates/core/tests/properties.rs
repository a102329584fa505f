//! Invariants of the public API checked against brute-force oracles.

use ndarray::Array2;
use proptest::prelude::*;

use nonlocal_relax::envelopes::separately_convex_envelope_default;
use nonlocal_relax::functionals::FnIntegrand;
use nonlocal_relax::{
    convex_envelope, diagonalize_function, eval_double_integral, maximal_cartesian_subsets,
    separately_convex_hull_set, GridFunction, GridSet, PiecewiseConstantField, ScalarGrid,
};

fn grid(n: usize) -> ScalarGrid {
    ScalarGrid::new(-1.0, 1.0, n).unwrap()
}

fn symmetric_values(n: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-5.0..5.0f64, n * n).prop_map(move |v| {
        let mut a = Array2::from_shape_vec((n, n), v).unwrap();
        for i in 0..n {
            for j in 0..i {
                a[[i, j]] = a[[j, i]];
            }
        }
        a
    })
}

fn symmetric_mask(n: usize) -> impl Strategy<Value = Array2<bool>> {
    prop::collection::vec(prop::bool::weighted(0.35), n * n).prop_map(move |v| {
        let mut a = Array2::from_shape_vec((n, n), v).unwrap();
        for i in 0..n {
            for j in 0..i {
                a[[i, j]] = a[[j, i]];
            }
        }
        a
    })
}

/// Every row and column segment between two marked cells is marked.
fn is_separately_convex(e: &GridSet) -> bool {
    let n = e.grid().len();
    let line_ok = |get: &dyn Fn(usize) -> bool| {
        let marked: Vec<usize> = (0..n).filter(|&k| get(k)).collect();
        match (marked.first(), marked.last()) {
            (Some(&a), Some(&b)) => (a..=b).all(|k| get(k)),
            _ => true,
        }
    };
    (0..n).all(|i| line_ok(&|j| e.get(i, j)) && line_ok(&|j| e.get(j, i)))
}

/// Smallest second difference along any row or column.
fn min_line_curvature(v: &GridFunction) -> f64 {
    let n = v.grid().len();
    let mut m = f64::INFINITY;
    for i in 0..n {
        for k in 1..n - 1 {
            m = m.min(v.get(i, k - 1) - 2.0 * v.get(i, k) + v.get(i, k + 1));
            m = m.min(v.get(k - 1, i) - 2.0 * v.get(k, i) + v.get(k + 1, i));
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn envelopes_are_ordered(values in symmetric_values(9)) {
        let w = GridFunction::from_values(grid(9), values).unwrap();
        let co = convex_envelope(&w);
        let sc = separately_convex_envelope_default(&w).unwrap();
        prop_assert!(sc.converged);
        let tol = 1e-9 * (1.0 + w.max_abs());
        prop_assert!(min_line_curvature(&sc.function) >= -tol);
        for i in 0..9 {
            for j in 0..9 {
                prop_assert!(co.get(i, j) <= sc.function.get(i, j) + tol);
                prop_assert!(sc.function.get(i, j) <= w.get(i, j) + tol);
            }
        }
    }

    #[test]
    fn diagonalization_dominates_and_fixes_the_diagonal(values in symmetric_values(7)) {
        let w = GridFunction::from_values(grid(7), values).unwrap();
        let h = diagonalize_function(&w).unwrap();
        for i in 0..7 {
            prop_assert_eq!(h.get(i, i), w.get(i, i));
            for j in 0..7 {
                prop_assert!(h.get(i, j) >= w.get(i, j));
                prop_assert_eq!(h.get(i, j), h.get(j, i));
            }
        }
        // idempotent
        let again = diagonalize_function(&h).unwrap();
        prop_assert_eq!(again.values(), h.values());
    }

    #[test]
    fn sc_hull_is_the_smallest_separately_convex_superset(mask in symmetric_mask(8)) {
        let e = GridSet::from_mask(grid(8), mask).unwrap();
        let h = separately_convex_hull_set(&e);
        prop_assert!(e.is_subset_of(&h));
        prop_assert!(is_separately_convex(&h));
        prop_assert_eq!(&separately_convex_hull_set(&h), &h);
        // minimality: no added cell can be dropped
        for (i, j) in h.cells() {
            if e.get(i, j) {
                continue;
            }
            let mut m = h.mask().clone();
            m[[i, j]] = false;
            let smaller = GridSet::from_mask(grid(8), m).unwrap();
            prop_assert!(!is_separately_convex(&smaller));
        }
    }

    #[test]
    fn pieces_are_squares_inside_the_set(mask in symmetric_mask(8)) {
        let e = GridSet::from_mask(grid(8), mask).unwrap();
        let pieces = maximal_cartesian_subsets(&e);
        for p in &pieces {
            for &a in &p.members {
                for &b in &p.members {
                    prop_assert!(e.get(a, b));
                }
            }
            // maximal: no looped vertex extends the square
            for c in 0..8 {
                if p.members.contains(&c) {
                    continue;
                }
                let extends = e.get(c, c) && p.members.iter().all(|&a| e.get(a, c) && e.get(c, a));
                prop_assert!(!extends);
            }
        }
    }

    #[test]
    fn double_integral_matches_the_naive_sum(
        values in prop::collection::vec(-3.0..3.0f64, 1..7),
        weights in prop::collection::vec(0.1..1.0f64, 7),
        omega in 0.5..3.0f64,
    ) {
        let k = values.len();
        let total: f64 = weights[..k].iter().sum();
        let fractions: Vec<f64> = weights[..k].iter().map(|w| w / total).collect();
        let Ok(u) = PiecewiseConstantField::with_measure(values.clone(), fractions.clone(), omega) else {
            return Ok(());
        };
        let f = |x: f64, y: f64| (x - y).powi(2) + x.sin() * y + 1.0;
        let mut naive = 0.0;
        for a in 0..k {
            for b in 0..k {
                naive += fractions[a] * fractions[b] * f(values[a], values[b]);
            }
        }
        naive *= omega * omega;
        let got = eval_double_integral(&FnIntegrand(f), &u).unwrap();
        prop_assert!((got - naive).abs() <= 1e-12 * (1.0 + naive.abs()));
    }
}
