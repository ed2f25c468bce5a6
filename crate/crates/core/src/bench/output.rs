//! Plain-text tables. Every number is printed with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use super::ErrorReport;
use crate::grid::Grid;
use crate::models::BalanceLaw;
use crate::scalar::Real;
use crate::solver::{RunResult, Snapshot};
use crate::Error;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Columns: `x`, the conserved variables in model order, `H(x)`.
pub fn snapshot_table<T: Real>(model: &dyn BalanceLaw<T>, grid: &Grid<T>, snap: &Snapshot<T>) -> String {
    let mut s = format!("# t = {}\n# x", num(snap.t));
    for c in model.component_names() {
        s.push(' ');
        s.push_str(c);
    }
    s.push_str(" H\n");
    for (i, u) in snap.averages.iter().enumerate() {
        let x = grid.center(i as isize);
        s.push_str(&num(x.to_f64().unwrap()));
        for v in u.iter() {
            s.push(' ');
            s.push_str(&num(v.to_f64().unwrap()));
        }
        s.push(' ');
        s.push_str(&num(model.depth(x).to_f64().unwrap()));
        s.push('\n');
    }
    s
}

pub fn write_snapshot<T: Real>(path: &Path, model: &dyn BalanceLaw<T>, grid: &Grid<T>, snap: &Snapshot<T>) -> Result<(), Error> {
    std::fs::write(path, snapshot_table(model, grid, snap))?;
    Ok(())
}

/// Columns: `cells component L1 order`.
pub fn errors_table(report: &ErrorReport) -> String {
    let mut s = format!("# scenario {} {}\n# cells component L1 order\n", report.scenario, report.label);
    for row in &report.rows {
        if let Some(f) = &row.failure {
            let _ = writeln!(s, "{} - failed - # {f}", row.cells);
            continue;
        }
        for (k, e) in row.errors.iter().enumerate() {
            let order = row.orders.get(k).copied().flatten().map_or("-".to_string(), num);
            let _ = writeln!(s, "{} {} {} {}", row.cells, report.components[k], num(*e), order);
        }
    }
    s
}

pub fn write_errors_table(path: &Path, report: &ErrorReport) -> Result<(), Error> {
    std::fs::write(path, errors_table(report))?;
    Ok(())
}

pub fn run_log<T: Real>(label: &str, r: &RunResult<T>) -> String {
    format!(
        "run {label}\nsteps {}\nwall_ms {}\nnewton_solves {}\nnewton_mean_iterations {}\nnewton_max_iterations {}\nfallbacks {}\n",
        r.steps,
        num(r.wall_ms),
        r.stats.solves,
        num(r.stats.mean_iterations()),
        r.stats.max_iterations,
        r.stats.fallbacks
    )
}

pub fn write_run_log<T: Real>(path: &Path, label: &str, r: &RunResult<T>) -> Result<(), Error> {
    std::fs::write(path, run_log(label, r))?;
    Ok(())
}
