use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::ic::{build_from_spec, stationary_through};
use super::metrics::restrict;
use super::{run_scenario, ReferenceSpec, Scenario};
use crate::config::Scheme;
use crate::grid::Layout;
use crate::scalar::{lit, Real};
use crate::state::StateVec;
use crate::Error;

/// On-disk store of fine-mesh reference runs, keyed by a hash of the run
/// definition.
#[derive(Clone, Debug)]
pub struct ReferenceCache {
    dir: PathBuf,
}

impl ReferenceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(scenario: &Scenario, cells: usize) -> String {
        let desc = format!(
            "{}|{}|{:?}|{:?}|{:?}|{:?}|{:?}|{}|{}|DWBM1",
            scenario.name,
            scenario.model,
            scenario.params,
            scenario.domain,
            scenario.ic,
            scenario.left_bc,
            scenario.right_bc,
            scenario.t_end,
            cells
        );
        let digest = Sha256::digest(desc.as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.ref"))
    }

    /// `None` when missing or unreadable.
    pub fn load(&self, key: &str, cells: usize, n_vars: usize) -> Option<Vec<Vec<f64>>> {
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        let mut lines = text.lines();
        let header = lines.next()?;
        if header != format!("# {key} {cells} {n_vars}") {
            return None;
        }
        let rows: Vec<Vec<f64>> = lines
            .map(|l| l.split_whitespace().map(|v| v.parse::<f64>().ok()).collect::<Option<Vec<_>>>())
            .collect::<Option<_>>()?;
        (rows.len() == cells && rows.iter().all(|r| r.len() == n_vars && r.iter().all(|v| v.is_finite())))
            .then_some(rows)
    }

    pub fn store(&self, key: &str, rows: &[Vec<f64>]) -> Result<(), Error> {
        std::fs::create_dir_all(&self.dir)?;
        let n_vars = rows.first().map_or(0, |r| r.len());
        let mut s = format!("# {key} {} {n_vars}\n", rows.len());
        for r in rows {
            let line: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        let tmp = self.path(&format!("{key}.tmp"));
        std::fs::write(&tmp, s)?;
        std::fs::rename(tmp, self.path(key))?;
        Ok(())
    }
}

fn fine_reference(scenario: &Scenario, cells: usize, cache: Option<&ReferenceCache>) -> Result<Vec<Vec<f64>>, Error> {
    let n_vars = scenario.model::<f64>().n_vars();
    let key = ReferenceCache::key(scenario, cells);
    if let Some(rows) = cache.and_then(|c| c.load(&key, cells, n_vars)) {
        return Ok(rows);
    }
    log::info!("computing {cells}-cell reference for scenario {}", scenario.name);
    let setup = scenario.setup(Scheme::Dwbm, 1, cells);
    let run = run_scenario::<f64>(scenario, &setup)?;
    let rows: Vec<Vec<f64>> = run.result.final_state().iter().map(|u| u.to_f64_vec()).collect();
    if let Some(c) = cache {
        c.store(&key, &rows)?;
    }
    Ok(rows)
}

/// Reference averages at the final time on the layout's grid.
pub fn reference_averages<T: Real>(
    scenario: &Scenario,
    layout: &Layout<T>,
    cache: Option<&ReferenceCache>,
) -> Result<Vec<StateVec<T>>, Error> {
    let model = scenario.model::<T>();
    match &scenario.reference {
        ReferenceSpec::Stationary => build_from_spec(scenario.ic.base(), scenario, model.as_ref(), layout),
        ReferenceSpec::StationaryThrough { x0, state } => {
            stationary_through(scenario, model.as_ref(), layout, *x0, state)
        }
        ReferenceSpec::FineMesh { cells } => {
            let fine = fine_reference(scenario, *cells, cache)?;
            let fine: Vec<StateVec<T>> =
                fine.iter().map(|r| StateVec::from_slice(&r.iter().map(|v| lit::<T>(*v)).collect::<Vec<_>>())).collect();
            restrict(&fine, layout.grid().n_cells())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::scenario;

    #[test]
    fn cache_roundtrip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ReferenceCache::new(dir.path());
        let s = scenario("2.2").unwrap();
        let key = ReferenceCache::key(&s, 4);
        assert_ne!(key, ReferenceCache::key(&s, 8));
        let rows = vec![vec![1.0], vec![0.1 + 0.2], vec![f64::MIN_POSITIVE], vec![-3.0]];
        cache.store(&key, &rows).unwrap();
        assert_eq!(cache.load(&key, 4, 1).unwrap(), rows);
        assert!(cache.load(&key, 5, 1).is_none());
        std::fs::write(dir.path().join(format!("{key}.ref")), "garbage").unwrap();
        assert!(cache.load(&key, 4, 1).is_none());
    }

    #[test]
    fn exact_reference_needs_no_run() {
        let s = scenario("1.2").unwrap();
        let setup = s.setup(Scheme::Sm, 3, 50);
        let solver = s.solver::<f64>(&setup).unwrap();
        let r = reference_averages(&s, solver.layout(), None).unwrap();
        let c = solver.layout().cell(25);
        let g = 0.5 * (c.quad_node(0).exp() + c.quad_node(1).exp());
        assert_eq!(r[25][0], g);
    }
}
