//! Grid CSV files: header `xi,zeta,value`, one row per node, row-major.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

use nonlocal_relax::{GridFunction, GridSet};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn function_csv(w: &GridFunction) -> String {
    let pts = w.grid().points();
    let mut s = String::from("xi,zeta,value\n");
    for (i, &x) in pts.iter().enumerate() {
        for (j, &y) in pts.iter().enumerate() {
            writeln!(s, "{},{},{}", num(x), num(y), num(w.get(i, j))).expect("write to string");
        }
    }
    s
}

pub fn mask_csv(e: &GridSet) -> String {
    let pts = e.grid().points();
    let mut s = String::from("xi,zeta,value\n");
    for (i, &x) in pts.iter().enumerate() {
        for (j, &y) in pts.iter().enumerate() {
            writeln!(s, "{},{},{}", num(x), num(y), u8::from(e.get(i, j))).expect("write to string");
        }
    }
    s
}

/// A grid CSV read back: axis values and the value matrix (row-major).
pub struct GridTable {
    pub xi: Vec<f64>,
    pub zeta: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn read_grid_csv(path: &Path) -> Result<GridTable> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "xi,zeta,value")) => {}
        Some((_, h)) => bail!("line 1: expected header \"xi,zeta,value\", got {h:?}"),
        None => bail!("line 1: empty file"),
    }
    let mut rows = Vec::new();
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            bail!("line {}: expected 3 fields, got {}", k + 1, parts.len());
        }
        let mut r = [0.0; 3];
        for (slot, p) in r.iter_mut().zip(&parts) {
            *slot = p.trim().parse().with_context(|| format!("line {}: not a number: {p:?}", k + 1))?;
        }
        rows.push(r);
    }
    if rows.is_empty() {
        bail!("no data rows");
    }
    let mut zeta = Vec::new();
    for r in &rows {
        if r[0] != rows[0][0] {
            break;
        }
        zeta.push(r[1]);
    }
    let nz = zeta.len();
    if rows.len() % nz != 0 {
        bail!("{} rows do not form a product grid with {nz} zeta values", rows.len());
    }
    let mut xi = Vec::new();
    for (b, block) in rows.chunks(nz).enumerate() {
        for (k, r) in block.iter().enumerate() {
            if r[0] != block[0][0] || r[1] != zeta[k] {
                bail!("line {}: rows are not a row-major product grid", b * nz + k + 2);
            }
        }
        xi.push(block[0][0]);
    }
    Ok(GridTable {
        xi,
        zeta,
        values: rows.iter().map(|r| r[2]).collect(),
    })
}

/// Whitespace separated `xi zeta value` rows, one block per `xi` separated
/// by blank lines (the layout surface plotters expect).
pub fn long_form(t: &GridTable) -> String {
    let mut s = String::from("# xi zeta value\n");
    for (i, &x) in t.xi.iter().enumerate() {
        for (j, &y) in t.zeta.iter().enumerate() {
            writeln!(s, "{} {} {}", num(x), num(y), num(t.values[i * t.zeta.len() + j])).expect("write to string");
        }
        s.push('\n');
    }
    s
}

/// Wide layout: a header row of zeta values, then one row per xi.
pub fn matrix_form(t: &GridTable) -> String {
    let mut s = String::from("xi\\zeta");
    for &y in &t.zeta {
        write!(s, ",{}", num(y)).expect("write to string");
    }
    s.push('\n');
    for (i, &x) in t.xi.iter().enumerate() {
        s.push_str(&num(x));
        for j in 0..t.zeta.len() {
            write!(s, ",{}", num(t.values[i * t.zeta.len() + j])).expect("write to string");
        }
        s.push('\n');
    }
    s
}
