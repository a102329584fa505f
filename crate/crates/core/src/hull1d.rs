//! Lower convex hulls of sequences sampled at integer abscissae.

/// Indices of the vertices of the lower convex hull of `(k, y[k])`.
///
/// Collinear points are dropped, so consecutive vertices always have
/// strictly increasing slopes.
pub fn lower_hull(y: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(y.len().min(64));
    for k in 0..y.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // b is dropped when it lies on or above the chord from a to k
            let lhs = (y[b] - y[a]) * (k - a) as f64;
            let rhs = (y[k] - y[a]) * (b - a) as f64;
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    hull
}

/// Writes the greatest convex minorant of `y` into `out`.
pub fn convex_minorant_into(y: &[f64], out: &mut [f64]) {
    debug_assert_eq!(y.len(), out.len());
    if y.is_empty() {
        return;
    }
    let hull = lower_hull(y);
    out[hull[0]] = y[hull[0]];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ya, yb) = (y[a], y[b]);
        let span = (b - a) as f64;
        out[b] = yb;
        for k in a + 1..b {
            let t = (k - a) as f64 / span;
            // the interpolant never exceeds the data, even after rounding
            out[k] = ((1.0 - t) * ya + t * yb).min(y[k]);
        }
    }
}

pub fn convex_minorant(y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    convex_minorant_into(y, &mut out);
    out
}

/// Smallest second difference, `+inf` for fewer than three samples.
pub fn min_second_difference(y: &[f64]) -> f64 {
    y.windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_minorant(y: &[f64]) -> Vec<f64> {
        // sup over all chords through pairs bracketing k
        let n = y.len();
        (0..n)
            .map(|k| {
                let mut best = y[k];
                for a in 0..=k {
                    for b in k..n {
                        if a == b {
                            continue;
                        }
                        let t = (k - a) as f64 / (b - a) as f64;
                        best = best.min((1.0 - t) * y[a] + t * y[b]);
                    }
                }
                best
            })
            .collect()
    }

    #[test]
    fn hull_of_v_shape() {
        let y = [2.0, 1.0, 0.0, 1.0, 2.0];
        assert_eq!(lower_hull(&y), vec![0, 2, 4]);
        assert_eq!(convex_minorant(&y), y.to_vec());
    }

    #[test]
    fn double_well_is_filled() {
        let y = [1.0, 0.0, 1.0, 0.0, 1.0];
        assert_eq!(convex_minorant(&y), vec![1.0, 0.0, 0.0, 0.0, 1.0]);
    }

    proptest! {
        #[test]
        fn matches_chord_oracle(y in prop::collection::vec(-10.0f64..10.0, 1..25)) {
            let fast = convex_minorant(&y);
            let slow = naive_minorant(&y);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
            for (a, b) in fast.iter().zip(&y) {
                prop_assert!(a <= b);
            }
            prop_assert!(min_second_difference(&fast) >= -1e-12);
        }
    }
}
