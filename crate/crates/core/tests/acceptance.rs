//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when
//! any criterion fails.

use std::time::Instant;

use nonlocal_relax::lab::random::{node_field, uniform_field};
use nonlocal_relax::lab::verify::{preset_integrand, staircase_points, sup_distance};
use nonlocal_relax::lab::{
    check_minhat_condition, check_ness_condition, default_gap_grid, gap_experiment_diamond_boundary,
    minimize_discrete, minimize_sequence, recovery_sequence_cartesian, MinimizeOptions, Preset, Verdict,
};
use nonlocal_relax::{
    boundary_tainted, convex_envelope, default_level_eps, default_tol, diagonalize_function,
    diagonalize_set, eval_indicator, eval_relaxed_indicator, grid_min, level_set,
    maximal_cartesian_subsets, relaxed_cartesian_union, separately_convex_envelope, GridSet, Norm,
    ScalarGrid,
};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn grid() -> ScalarGrid {
    ScalarGrid::default()
}

fn c1_four_well_minima() -> Outcome {
    let mut notes = Vec::new();
    for p in [1.0, 2.0] {
        let w = preset_integrand(Preset::FourWell, p).unwrap().sample(&grid()).unwrap();
        let mw = grid_min(&w).0;
        let mh = grid_min(&diagonalize_function(&w).unwrap()).0;
        notes.push(format!("p={p}: min W={mw}, min W-hat={mh}"));
        if mw != 0.0 || mh != 1.0 {
            return Err(notes.join("; "));
        }
    }
    Ok(notes.join("; "))
}

fn c2_convexification_identity() -> Outcome {
    let coarse = grid();
    let fine = coarse.refined();
    let mut notes = Vec::new();
    let mut ok = true;
    for preset in [Preset::FourWell, Preset::FivePoint] {
        for p in [1.0, 2.0] {
            let rule = preset_integrand(preset, p).unwrap();
            let hull = rule.convex_hull_rule();
            let err = |g: &ScalarGrid| {
                let co = convex_envelope(&rule.sample(g).unwrap());
                sup_distance(&co, &hull.sample(g).unwrap(), Some(&boundary_tainted(g)))
            };
            let (ec, ef) = (err(&coarse), err(&fine));
            // errors at rounding level count as converged
            let floor = 1e-10;
            ok &= ec <= 0.15 && (ef < ec || ef.max(ec) <= floor);
            notes.push(format!("{} p={p}: {ec:.2e} -> {ef:.2e}", preset.name()));
        }
    }
    check(ok, notes.join("; "), notes.join("; "))
}

fn c3_sc_equals_co() -> Outcome {
    let g = grid();
    let tainted = boundary_tainted(&g);
    let mut notes = Vec::new();
    let mut ok = true;
    for preset in [Preset::DiamondBoundary, Preset::Cartesian] {
        for p in [1.0, 2.0] {
            let w = preset_integrand(preset, p).unwrap().sample(&g).unwrap();
            let tol = default_tol(&w);
            let sc = separately_convex_envelope(&w, tol, 10 * g.len()).unwrap();
            let co = convex_envelope(&w);
            let gap = sup_distance(&sc.function, &co, Some(&tainted));
            ok &= sc.converged && gap <= 2.0 * tol;
            notes.push(format!("{} p={p}: {gap:.2e} (2tol={:.1e})", preset.name(), 2.0 * tol));
        }
    }
    check(ok, notes.join("; "), notes.join("; "))
}

fn c4_diagonalization_law() -> Outcome {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for preset in Preset::ALL {
        for p in [1.0, 2.0] {
            let w = preset_integrand(preset, p).unwrap().sample(&g).unwrap();
            let what = diagonalize_function(&w).unwrap();
            let (lo, hi) = (grid_min(&w).0, w.max());
            let mut levels: Vec<f64> = (0..10).map(|k| lo + (hi - lo) * k as f64 / 9.0 * 0.5).collect();
            // levels hitting sampled values exactly
            for _ in 0..10 {
                levels.push(w.get(rng.gen_range(0..g.len()), rng.gen_range(0..g.len())));
            }
            for c in levels {
                let lhs = level_set(&what, c, 0.0);
                let rhs = diagonalize_set(&level_set(&w, c, 0.0)).unwrap();
                if lhs != rhs {
                    return Err(format!("{} p={p} level {c}: {} cells differ", preset.name(), lhs.symmetric_difference(&rhs).count()));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (preset, p, level) triples agree cell-for-cell"))
}

/// All maximal `A` with `A x A` inside the mask, by subset enumeration.
fn brute_force_pieces(mask: &Array2<bool>) -> Vec<Vec<usize>> {
    let n = mask.nrows();
    let looped: Vec<usize> = (0..n).filter(|&k| mask[[k, k]]).collect();
    let m = looped.len();
    let cartesian = |bits: u32| {
        (0..m).all(|a| bits >> a & 1 == 0 || (0..m).all(|b| bits >> b & 1 == 0 || mask[[looped[a], looped[b]]]))
    };
    let good: Vec<u32> = (1..1u32 << m).filter(|&b| cartesian(b)).collect();
    let mut out: Vec<Vec<usize>> = good
        .iter()
        .filter(|&&b| !good.iter().any(|&c| c != b && c & b == b))
        .map(|&b| (0..m).filter(|&a| b >> a & 1 == 1).map(|a| looped[a]).collect())
        .collect();
    out.sort_by(|a: &Vec<usize>, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    out
}

fn c5_clique_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut total_pieces = 0;
    for case in 0..200 {
        let n = rng.gen_range(1..=15);
        let density = rng.gen_range(0.2..0.95);
        let mut mask = Array2::from_elem((n, n), false);
        for i in 0..n {
            for j in i..n {
                let b = rng.gen_bool(density);
                mask[[i, j]] = b;
                mask[[j, i]] = b;
            }
        }
        let g = ScalarGrid::new(0.0, n.max(2) as f64, n.max(2)).unwrap();
        if n == 1 {
            // grids need two nodes; pad with an unmarked one
            let mut padded = Array2::from_elem((2, 2), false);
            padded[[0, 0]] = mask[[0, 0]];
            mask = padded;
        }
        let e = GridSet::from_mask(g, mask.clone()).unwrap();
        let fast: Vec<Vec<usize>> = maximal_cartesian_subsets(&e).into_iter().map(|p| p.members).collect();
        let slow = brute_force_pieces(&mask);
        if fast != slow {
            return Err(format!("case {case}: enumeration differs ({} vs {} pieces)", fast.len(), slow.len()));
        }
        let nn = mask.nrows();
        let union = GridSet::from_fn(g, |i, j| fast.iter().any(|a| a.contains(&i) && a.contains(&j)));
        if union != diagonalize_set(&e).unwrap() {
            return Err(format!("case {case}: union of pieces differs from the diagonalized set ({nn}x{nn})"));
        }
        total_pieces += fast.len();
    }
    Ok(format!("200 masks, {total_pieces} maximal pieces, union property holds"))
}

fn c6_verdicts() -> Outcome {
    let g = grid();
    let w = |preset, p| preset_integrand(preset, p).unwrap().sample(&g).unwrap();
    let eps = default_level_eps(0.0);
    let minhat = check_minhat_condition(&w(Preset::FourWell, 2.0)).unwrap().verdict;
    let five = check_ness_condition(&w(Preset::FivePoint, 2.0), eps).unwrap().verdict;
    let diamond = check_ness_condition(&w(Preset::DiamondBoundary, 2.0), eps).unwrap().verdict;
    let cart = check_ness_condition(&w(Preset::Cartesian, 2.0), eps).unwrap().verdict;
    let msg = format!("min-hat four-well {minhat:?}; zero-set five-point {five:?}, diamond-boundary {diamond:?}, cartesian {cart:?}");
    check(
        minhat == Verdict::Fails && five == Verdict::Fails && diamond == Verdict::Holds && cart == Verdict::Holds,
        msg.clone(),
        msg,
    )
}

fn c7_recovery_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let v = uniform_field(&mut rng, 6, -3.0, 3.0);
        for p in [1.0, 2.0] {
            for norm in [Norm::L1, Norm::L2, Norm::LInf] {
                for j in [1, 2, 4, 8] {
                    let r = recovery_sequence_cartesian(&v, &[-1.0, 1.0], p, norm, j).unwrap();
                    let err = (r.value - r.sc_value).abs() / (1.0 + r.sc_value.abs());
                    worst = worst.max(err);
                }
            }
        }
    }
    check(worst <= 1e-12, format!("max relative error {worst:.2e}"), format!("max relative error {worst:.2e}"))
}

fn c8_gap() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for p in [1.0, 2.0] {
        let reps = gap_experiment_diamond_boundary(0.5, 6, p, &default_gap_grid()).unwrap();
        for r in &reps {
            ok &= r.target == 0.25 && r.delta > 0.0;
        }
        if p == 1.0 {
            ok &= reps[0].minimum == 0.5;
        }
        let deltas: Vec<String> = reps.iter().map(|r| format!("{:.4}", r.delta)).collect();
        notes.push(format!("p={p}: target {} delta by N [{}]", reps[0].target, deltas.join(", ")));
    }
    check(ok, notes.join("; "), notes.join("; "))
}

fn c9_sandwich() -> Outcome {
    let vgrid = default_gap_grid();
    let mut notes = Vec::new();
    for preset in [Preset::FourWell, Preset::DiamondBoundary, Preset::FivePoint, Preset::Cartesian] {
        let rule = preset_integrand(preset, 2.0).unwrap();
        let tol = default_tol(&rule.sample(&vgrid).unwrap());
        let reps = minimize_sequence(&rule, 6, &MinimizeOptions::new(vgrid)).unwrap();
        for r in &reps {
            if !(r.lower_bound <= r.best_value && r.best_value <= r.upper_bound + tol) {
                return Err(format!("{} N={}: {} not in [{}, {}]", preset.name(), r.pieces, r.best_value, r.lower_bound, r.upper_bound));
            }
        }
        if preset == Preset::FourWell {
            let delta0 = reps.iter().map(|r| r.best_value).fold(f64::INFINITY, f64::min);
            if !(delta0 > 0.0) {
                return Err(format!("four-well minimum reached {delta0}"));
            }
            notes.push(format!("four-well delta0 = {delta0:.4}"));
        }
    }
    let g = grid();
    let w = preset_integrand(Preset::FourWell, 2.0).unwrap().sample(&g).unwrap();
    let sc = separately_convex_envelope(&w, default_tol(&w), 10 * g.len()).unwrap().function;
    let r = minimize_discrete(&sc, 1, &MinimizeOptions::new(g)).unwrap();
    let ok = r.best_value == 0.0 && r.best_field.values() == [0.0];
    notes.push(format!("W-sc minimum {} at u = {:?}", r.best_value, r.best_field.values()));
    check(ok, notes.join("; "), notes.join("; "))
}

fn c10_indicator_relaxation() -> Outcome {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for preset in Preset::ALL {
        let k = if preset == Preset::Indicator {
            GridSet::from_points(g, &staircase_points()).unwrap()
        } else {
            preset_integrand(preset, 1.0).unwrap().target_mask(&g).unwrap()
        };
        let rlx = relaxed_cartesian_union(&k);
        for _ in 0..100 {
            let u = node_field(&mut rng, &g, 4, -2.5, 2.5);
            let a = eval_relaxed_indicator(&k, &u).unwrap().is_zero();
            let b = eval_indicator(&rlx, &u).is_zero();
            if a != b {
                return Err(format!("{}: disagreement on {:?}", preset.name(), u.values()));
            }
        }
    }
    let k = preset_integrand(Preset::DiamondBoundary, 1.0).unwrap().target_mask(&g).unwrap();
    let pts = g.points();
    let half = GridSet::from_fn(g, |i, j| pts[i].abs() <= 0.5 && pts[j].abs() <= 0.5);
    check(
        relaxed_cartesian_union(&k) == half,
        "500 fields agree; diamond-boundary K-rlx = [-1/2,1/2]^2".into(),
        "diamond-boundary K-rlx differs from [-1/2,1/2]^2".into(),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("four-well minima", c1_four_well_minima),
        ("convexification identity", c2_convexification_identity),
        ("sc envelope equals convex envelope", c3_sc_equals_co),
        ("diagonalization law", c4_diagonalization_law),
        ("maximal Cartesian pieces vs brute force", c5_clique_oracle),
        ("necessary-condition verdicts", c6_verdicts),
        ("recovery identity", c7_recovery_identity),
        ("two-region gap", c8_gap),
        ("minimum sandwich", c9_sandwich),
        ("indicator relaxation", c10_indicator_relaxation),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let label = format!("{} {}", k + 1, name);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS  criterion {label} ({secs:.1}s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  criterion {label} ({secs:.1}s): {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
