//! Seeded random fields for property sweeps.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{PiecewiseConstantField, ScalarGrid};

/// Normalized random fractions; each is at least `1 / (8 n)` before scaling.
fn fractions(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.125..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|r| r / total).collect()
}

/// Field with up to `max_pieces` pieces and values uniform in `[lo, hi]`.
pub fn uniform_field(rng: &mut ChaCha8Rng, max_pieces: usize, lo: f64, hi: f64) -> PiecewiseConstantField {
    let n = rng.gen_range(1..=max_pieces);
    let values = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
    PiecewiseConstantField::new(values, fractions(rng, n)).expect("valid random field")
}

/// Field whose values are mostly grid nodes in `[lo, hi]` (so that exact
/// set membership is exercised), occasionally midpoints between nodes.
pub fn node_field(rng: &mut ChaCha8Rng, grid: &ScalarGrid, max_pieces: usize, lo: f64, hi: f64) -> PiecewiseConstantField {
    let n = rng.gen_range(1..=max_pieces);
    let ka = grid.index_of(lo).expect("lo is a node");
    let kb = grid.index_of(hi).expect("hi is a node");
    let coarse: Vec<usize> = (ka..=kb).step_by(((kb - ka) / 12).max(1)).collect();
    let values = (0..n)
        .map(|_| {
            let k = if rng.gen_bool(0.7) {
                coarse[rng.gen_range(0..coarse.len())]
            } else {
                rng.gen_range(ka..=kb)
            };
            if rng.gen_bool(0.1) && k < kb {
                0.5 * (grid.point(k) + grid.point(k + 1))
            } else {
                grid.point(k)
            }
        })
        .collect();
    PiecewiseConstantField::new(values, fractions(rng, n)).expect("valid random field")
}
