//! `nonlocal-relax`: envelopes, sets, minimization and example checks from
//! the command line.

mod csv;
mod scenario;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use nonlocal_relax::envelopes::{separately_convex_envelope_default, uniform_levels, DEFAULT_SLC_LEVELS};
use nonlocal_relax::lab::verify::sup_distance;
use nonlocal_relax::lab::{
    check_minhat_condition, check_ness_condition, minimize_sequence, verify, MinimizeOptions, Preset,
    VerifyOptions,
};
use nonlocal_relax::{
    boundary_tainted, convex_envelope, convex_hull_set, default_level_eps, diagonalize_function, diagonalize_set,
    grid_min, maximal_cartesian_subsets, relaxed_cartesian_union, separately_convex_hull_set,
    separately_level_convex_envelope, GridFunction, ScalarGrid,
};

use scenario::Scenario;

const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const EXIT_NONCONVERGED: u8 = 4;

#[derive(Parser)]
#[command(name = "nonlocal-relax", version, about = "Relaxation experiments for nonlocal double integrals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write W, W^co, W^sc, W^slc and W-hat as grid CSVs plus a summary.
    Envelope {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Write the masks of K, K-hat, K^sc, K^co, K^rlx and the maximal pieces.
    Sets {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Minimize I_W over fields with at most N equal pieces.
    Minimize {
        scenario: PathBuf,
        #[arg(long)]
        pieces: usize,
        #[arg(long)]
        mean: Option<f64>,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a necessary condition for the relaxation to be a double integral.
    Check {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        condition: Condition,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the checks attached to a named example.
    Verify {
        preset: String,
        #[arg(long, default_value_t = 0.5)]
        fraction: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 6)]
        max_pieces: usize,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reshape a grid CSV for plotting tools.
    ExportPlot {
        grid: PathBuf,
        #[arg(long, value_enum, default_value_t = Layout::Long)]
        layout: Layout,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Condition {
    Minhat,
    Ness,
}

#[derive(Clone, Copy, ValueEnum)]
enum Layout {
    /// `xi zeta value` rows, blank line between xi blocks.
    Long,
    /// One row per xi, one column per zeta.
    Matrix,
}

/// Input that cannot be used as given.
#[derive(Debug)]
struct ConfigError(anyhow::Error);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| ConfigError(e).into())
}

fn config_lib<T>(r: nonlocal_relax::Result<T>, what: &str) -> Result<T> {
    config(r.map_err(anyhow::Error::from).context(what.to_string()))
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("NONLOCAL_RELAX_THREADS") else {
        return Ok(());
    };
    let n: usize = config(
        v.trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("NONLOCAL_RELAX_THREADS: expected a positive integer, got {v:?}")),
    )?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("cannot configure the worker pool")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn emit<T: Serialize>(v: &T, file: Option<&Path>) -> Result<()> {
    let s = to_json(v)?;
    if let Some(p) = file {
        write_file(p, &s)?;
    }
    stdout(&s)
}

/// Print to standard output; a closed pipe is not an error.
fn stdout(s: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(s.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn load(path: &Path) -> Result<scenario::Loaded> {
    config(Scenario::load(path))
}

fn sample(s: &scenario::Loaded) -> Result<GridFunction> {
    config_lib(s.integrand.sample(&s.grid), "cannot sample W")
}

fn min_entry(w: &GridFunction) -> Value {
    let (v, (i, j)) = grid_min(w);
    let g = w.grid();
    json!({ "value": v, "xi": g.point(i), "zeta": g.point(j) })
}

fn envelope(path: &Path, out: &Path) -> Result<u8> {
    let s = load(path)?;
    let w = sample(&s)?;
    out_dir(out)?;
    let co = convex_envelope(&w);
    let sc = separately_convex_envelope_default(&w)?;
    let slc = separately_level_convex_envelope(&w, &uniform_levels(&w, DEFAULT_SLC_LEVELS))?;
    let hat = diagonalize_function(&w)?;
    for (name, f) in [("w", &w), ("w_co", &co), ("w_sc", &sc.function), ("w_slc", &slc.function), ("w_hat", &hat)] {
        write_file(&out.join(format!("{name}.csv")), &csv::function_csv(f))?;
    }

    let exact_co = config_lib(s.integrand.convex_hull_rule().sample(&s.grid), "cannot sample the hull rule")?;
    let k = config_lib(s.integrand.target_mask(&s.grid), "cannot trace K")?;
    let hulls_agree = if k.is_empty() {
        None
    } else {
        Some(separately_convex_hull_set(&k) == convex_hull_set(&k)?)
    };
    let tainted = boundary_tainted(&s.grid);
    let sc_co_gap = sup_distance(&sc.function, &co, Some(&tainted));
    // Grid envelopes of a convex W^co differ from it by discretization only.
    let gap_tol = s.grid.spacing() * (1.0 + w.max_abs());
    let summary = json!({
        "grid": { "lo": s.grid.lo(), "hi": s.grid.hi(), "n": s.grid.len() },
        "p": s.integrand.p,
        "omega": s.omega,
        "minima": {
            "w": min_entry(&w),
            "w_co": min_entry(&co),
            "w_sc": min_entry(&sc.function),
            "w_slc": min_entry(&slc.function),
            "w_hat": min_entry(&hat),
        },
        "co_vs_exact_hull_rule": sup_distance(&co, &exact_co, None),
        "sc": { "converged": sc.converged, "sweeps": sc.sweeps, "last_change": sc.last_change },
        "slc": { "levels": slc.levels, "saturated": slc.saturated },
        "sc_equals_co_check": {
            "k_sc_equals_k_co": hulls_agree,
            "sup_sc_minus_co_interior": sc_co_gap,
            "tolerance": gap_tol,
            "consistent": hulls_agree != Some(true) || sc_co_gap <= gap_tol,
        },
    });
    emit(&summary, Some(&out.join("summary.json")))?;
    Ok(if sc.converged { 0 } else { EXIT_NONCONVERGED })
}

fn sets(path: &Path, out: &Path) -> Result<u8> {
    let s = load(path)?;
    let k = config_lib(s.integrand.target_mask(&s.grid), "cannot trace K")?;
    let k_co = config_lib(convex_hull_set(&k), "K has no node on the grid")?;
    let k_hat = config_lib(diagonalize_set(&k), "K")?;
    let k_sc = separately_convex_hull_set(&k);
    let k_rlx = relaxed_cartesian_union(&k);
    let k_hat_sc = separately_convex_hull_set(&k_hat);
    out_dir(out)?;
    for (name, m) in [("k", &k), ("k_hat", &k_hat), ("k_sc", &k_sc), ("k_co", &k_co), ("k_rlx", &k_rlx)] {
        write_file(&out.join(format!("{name}.csv")), &csv::mask_csv(m))?;
    }
    let pieces: Vec<Value> = maximal_cartesian_subsets(&k)
        .iter()
        .map(|p| {
            let (lo, hi) = p.hull(&s.grid);
            json!({ "values": p.values(&s.grid), "hull": [lo, hi], "maximal": p.maximal })
        })
        .collect();
    write_file(&out.join("pieces.json"), &to_json(&pieces)?)?;
    let summary = json!({
        "grid": { "lo": s.grid.lo(), "hi": s.grid.hi(), "n": s.grid.len() },
        "counts": {
            "k": k.count(), "k_hat": k_hat.count(), "k_sc": k_sc.count(),
            "k_co": k_co.count(), "k_rlx": k_rlx.count(),
        },
        "pieces": pieces.len(),
        "k_rlx_equals_k_hat_sc": k_rlx == k_hat_sc,
        "k_sc_equals_k_co": k_sc == k_co,
    });
    emit(&summary, Some(&out.join("summary.json")))?;
    Ok(0)
}

fn minimize(path: &Path, pieces: usize, mean: Option<f64>, out: Option<&Path>) -> Result<u8> {
    let s = load(path)?;
    if pieces == 0 {
        return config(Err(anyhow::anyhow!("--pieces must be at least 1")));
    }
    let mut opts = MinimizeOptions::new(s.grid);
    opts.mean_constraint = mean;
    opts.omega_measure = s.omega;
    // Smaller piece counts seed the larger ones; only the last run is reported.
    let mut reports = config_lib(minimize_sequence(&s.integrand, pieces, &opts), "minimization")?;
    let report = reports.pop().expect("one report per piece count");
    emit(&report, out)?;
    Ok(0)
}

fn check(path: &Path, condition: Condition, out: &Path) -> Result<u8> {
    let s = load(path)?;
    let w = sample(&s)?;
    out_dir(out)?;
    match condition {
        Condition::Minhat => {
            let r = check_minhat_condition(&w)?;
            emit(&json!({ "condition": "minhat", "report": r }), Some(&out.join("check.json")))?;
            Ok(if r.sc_converged { 0 } else { EXIT_NONCONVERGED })
        }
        Condition::Ness => {
            let r = check_ness_condition(&w, default_level_eps(0.0))?;
            write_file(&out.join("difference.csv"), &csv::mask_csv(&r.difference))?;
            write_file(&out.join("difference_pieces.csv"), &csv::mask_csv(&r.difference_pieces))?;
            let g = w.grid();
            let cells: Vec<[f64; 2]> = r.difference.cells().into_iter().map(|(i, j)| [g.point(i), g.point(j)]).collect();
            let v = json!({
                "condition": "ness",
                "verdict": r.verdict,
                "piece_form_holds": r.piece_form_holds,
                "lhs_cells": r.lhs.count(),
                "rhs_cells": r.rhs.count(),
                "differing_cells": cells,
                "sc_converged": r.sc_converged,
            });
            emit(&v, Some(&out.join("check.json")))?;
            Ok(if r.sc_converged { 0 } else { EXIT_NONCONVERGED })
        }
    }
}

fn run_verify(preset: &str, fraction: f64, p: f64, max_pieces: usize, out: Option<&Path>) -> Result<u8> {
    let preset = config(Preset::parse(preset).with_context(|| {
        let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
        format!("unknown preset {preset:?}; expected one of {}", names.join(", "))
    }))?;
    let opts = VerifyOptions {
        p,
        grid: ScalarGrid::default(),
        fraction,
        max_pieces,
    };
    let report = config_lib(verify(preset, &opts), "verify")?;
    emit(&report, out)?;
    Ok(if !report.passed {
        EXIT_VERIFY
    } else if report.non_converged {
        EXIT_NONCONVERGED
    } else {
        0
    })
}

fn export_plot(grid: &Path, layout: Layout, out: Option<&Path>) -> Result<u8> {
    let t = config(csv::read_grid_csv(grid).with_context(|| format!("malformed grid CSV {}", grid.display())))?;
    let text = match layout {
        Layout::Long => csv::long_form(&t),
        Layout::Matrix => csv::matrix_form(&t),
    };
    match out {
        Some(p) => write_file(p, &text)?,
        None => stdout(&text)?,
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    init_threads()?;
    match cli.command {
        Command::Envelope { scenario, out } => envelope(&scenario, &out),
        Command::Sets { scenario, out } => sets(&scenario, &out),
        Command::Minimize { scenario, pieces, mean, out } => minimize(&scenario, pieces, mean, out.as_deref()),
        Command::Check { scenario, condition, out } => check(&scenario, condition, &out),
        Command::Verify { preset, fraction, p, max_pieces, out } => {
            run_verify(&preset, fraction, p, max_pieces, out.as_deref())
        }
        Command::ExportPlot { grid, layout, out } => export_plot(&grid, layout, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => {
            if code == EXIT_VERIFY {
                eprintln!("error: verification failed");
            } else if code == EXIT_NONCONVERGED {
                eprintln!("error: an envelope iteration hit its sweep budget");
            }
            ExitCode::from(code)
        }
        Err(e) => {
            if let Some(c) = e.downcast_ref::<ConfigError>() {
                eprintln!("config error: {c}");
                ExitCode::from(EXIT_CONFIG)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        }
    }
}
