//! Semidiscrete scheme with Rusanov fluxes, boundary ghost cells and
//! third-order TVD Runge–Kutta time stepping.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::config::{BoundarySpec, Scheme, SchemeSpec};
use crate::grid::{build_layout, Grid, Layout, QuadratureRule};
use crate::integrate::{march_stationary, quad_average_values, Direction};
use crate::models::{BalanceLaw, ModelError};
use crate::reconstruct::{cell_equilibrium, wb_reconstruct, EquilibriumMethod, StandardOperator, WbReconstruction};
use crate::scalar::{lit, Real};
use crate::state::StateVec;
use crate::Error;

/// Ghost cells per side.
pub const N_GHOST: usize = 2;

#[derive(Debug, Clone, thiserror::Error)]
pub enum SolverError {
    #[error("non-finite update in cell {cell} at t = {t}")]
    NonFinite { cell: isize, t: f64 },
    #[error("boundary setup failed: {0}")]
    Boundary(String),
}

#[derive(Clone, Debug)]
enum Boundary<T> {
    Free,
    /// Ghost averages, nearest cell first.
    Ghosts([StateVec<T>; N_GHOST]),
    Components(Vec<(usize, T)>),
}

/// Newton diagnostics accumulated over reconstructions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NewtonStats {
    pub solves: u64,
    pub total_iterations: u64,
    pub max_iterations: usize,
    pub fallbacks: u64,
}

impl NewtonStats {
    pub fn merge(&mut self, o: &NewtonStats) {
        self.solves += o.solves;
        self.total_iterations += o.total_iterations;
        self.max_iterations = self.max_iterations.max(o.max_iterations);
        self.fallbacks += o.fallbacks;
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.solves == 0 {
            0.0
        } else {
            self.total_iterations as f64 / self.solves as f64
        }
    }
}

/// `½(f(UL) + f(UR)) − ½ max(λ(UL), λ(UR)) (UR − UL)`
pub fn rusanov_flux<T: Real>(model: &dyn BalanceLaw<T>, ul: &StateVec<T>, ur: &StateVec<T>) -> StateVec<T> {
    let half = lit::<T>(0.5);
    let s = model.max_wave_speed(ul).max(model.max_wave_speed(ur));
    (model.flux(ul) + model.flux(ur)) * half - (*ur - *ul) * (half * s)
}

/// A fully set-up scheme on a fixed grid.
pub struct Solver<T: Real> {
    model: Arc<dyn BalanceLaw<T>>,
    layout: Layout<T>,
    op: StandardOperator,
    method: EquilibriumMethod,
    spec: SchemeSpec,
    left: Boundary<T>,
    right: Boundary<T>,
}

impl<T: Real> Solver<T> {
    pub fn new(
        model: Arc<dyn BalanceLaw<T>>,
        grid: &Grid<T>,
        spec: SchemeSpec,
        left: &BoundarySpec,
        right: &BoundarySpec,
    ) -> Result<Self, Error> {
        spec.validate()?;
        let n = model.n_vars();
        left.validate(n)?;
        right.validate(n)?;
        let rule = if spec.order == 3 { QuadratureRule::Gauss2 } else { QuadratureRule::Midpoint };
        let layout = build_layout(grid, rule, spec.np)?;
        let op = match spec.order {
            1 => StandardOperator::PiecewiseConstant,
            2 => StandardOperator::Muscl,
            _ => StandardOperator::Cweno3(spec.cweno),
        };
        let method = match spec.scheme {
            Scheme::Sm => EquilibriumMethod::None,
            Scheme::Wbm if !model.has_closed_form() => {
                return Err(Error::Config(format!("WBM needs closed-form equilibria; {} has none", model.name())))
            }
            Scheme::Wbm => EquilibriumMethod::ClosedForm,
            Scheme::Dwbm => {
                if spec.scalar_sw && (n != 2 || model.invariant_components() != [1]) {
                    return Err(Error::Config("scalar Newton needs the shallow-water system".into()));
                }
                EquilibriumMethod::Discrete { newton: spec.newton, scalar_sw: spec.scalar_sw }
            }
        };
        let mut s = Self { model, layout, op, method, spec, left: Boundary::Free, right: Boundary::Free };
        s.left = s.resolve_boundary(left, true)?;
        s.right = s.resolve_boundary(right, false)?;
        Ok(s)
    }

    pub fn model(&self) -> &dyn BalanceLaw<T> {
        self.model.as_ref()
    }

    pub fn layout(&self) -> &Layout<T> {
        &self.layout
    }

    pub fn grid(&self) -> &Grid<T> {
        self.layout.grid()
    }

    pub fn spec(&self) -> &SchemeSpec {
        &self.spec
    }

    pub fn operator(&self) -> &StandardOperator {
        &self.op
    }

    pub fn method(&self) -> &EquilibriumMethod {
        &self.method
    }

    fn resolve_boundary(&self, spec: &BoundarySpec, left: bool) -> Result<Boundary<T>, Error> {
        Ok(match spec {
            BoundarySpec::Free => Boundary::Free,
            BoundarySpec::DirichletComponents(c) => {
                Boundary::Components(c.iter().map(|&(j, v)| (j, lit::<T>(v))).collect())
            }
            BoundarySpec::DirichletState(v) => {
                let u = StateVec::from_f64(v);
                self.model.admissible(&u)?;
                Boundary::Ghosts(self.stationary_ghosts(u, left).unwrap_or([u; N_GHOST]))
            }
        })
    }

    /// Averages over the ghost cells of the stationary solution through `u`
    /// at the boundary point.
    fn stationary_ghosts(&self, u: StateVec<T>, left: bool) -> Option<[StateVec<T>; N_GHOST]> {
        let n = self.grid().n_cells() as isize;
        let mut out = [u; N_GHOST];
        let mut start = u;
        for (k, g) in out.iter_mut().enumerate() {
            let k = k as isize;
            let (cell, dir) = if left {
                (self.layout.cell(-1 - k), Direction::Backward)
            } else {
                (self.layout.cell(n + k), Direction::Forward)
            };
            let t = march_stationary(self.model.as_ref(), &cell.state_nodes(), start, dir).ok()?;
            start = if left { t.first() } else { t.last() };
            *g = quad_average_values(t.values(), &cell).ok()?;
        }
        Some(out)
    }

    /// Averages extended by the ghost cells; entry `k` is cell `k − N_GHOST`.
    pub fn with_ghosts(&self, avgs: &[StateVec<T>]) -> Vec<StateVec<T>> {
        let n = avgs.len();
        let mut ext = Vec::with_capacity(n + 2 * N_GHOST);
        let left = self.ghosts(&self.left, avgs, true);
        ext.extend(left.iter().rev());
        ext.extend_from_slice(avgs);
        ext.extend(self.ghosts(&self.right, avgs, false));
        ext
    }

    /// Ghost averages, nearest cell first.
    fn ghosts(&self, b: &Boundary<T>, avgs: &[StateVec<T>], left: bool) -> [StateVec<T>; N_GHOST] {
        let n = avgs.len();
        let (idx, edge) = if left { (0isize, avgs[0]) } else { (n as isize - 1, avgs[n - 1]) };
        match b {
            Boundary::Ghosts(g) => *g,
            Boundary::Components(c) => {
                let mut g = edge;
                for &(j, v) in c {
                    g[j] = v;
                }
                [g; N_GHOST]
            }
            Boundary::Free => {
                if self.method == EquilibriumMethod::None {
                    return self.linear_ghosts(avgs, left);
                }
                // stationary continuation of the boundary cell's equilibrium
                match cell_equilibrium(self.model.as_ref(), &self.layout, idx, &edge, &self.method, N_GHOST) {
                    Ok(eq) => {
                        let pick = |m: isize| eq.stencil_cell(idx + m).map(|c| c.average);
                        let sign = if left { -1 } else { 1 };
                        match (pick(sign), pick(2 * sign)) {
                            (Some(a), Some(b)) => [a, b],
                            _ => [edge; N_GHOST],
                        }
                    }
                    Err(_) => [edge; N_GHOST],
                }
            }
        }
    }

    /// Linear extrapolation of the two boundary averages, or copies of the
    /// edge average if that leaves the admissible set.
    fn linear_ghosts(&self, avgs: &[StateVec<T>], left: bool) -> [StateVec<T>; N_GHOST] {
        let n = avgs.len();
        let (edge, inner) = if left { (avgs[0], avgs[1.min(n - 1)]) } else { (avgs[n - 1], avgs[n.saturating_sub(2)]) };
        let slope = edge - inner;
        let mut out = [edge; N_GHOST];
        for (k, g) in out.iter_mut().enumerate() {
            *g = edge + slope * T::from_usize(k + 1).unwrap();
        }
        if out.iter().all(|g| self.model.admissible(g).is_ok()) {
            out
        } else {
            [edge; N_GHOST]
        }
    }

    /// Reconstructions of cells `−1..=n` from the ghost-extended averages.
    pub fn reconstruct_all(&self, ext: &[StateVec<T>]) -> Vec<WbReconstruction<T>> {
        let r = self.op.radius();
        let n = ext.len() - 2 * N_GHOST;
        (N_GHOST - 1..=N_GHOST + n)
            .into_par_iter()
            .map(|k| {
                let i = k as isize - N_GHOST as isize;
                wb_reconstruct(self.model.as_ref(), &self.layout, i, &ext[k - r..=k + r], &self.op, &self.method)
            })
            .collect()
    }

    /// `dU_i/dt` for every cell.
    pub fn rhs(&self, avgs: &[StateVec<T>], t: f64) -> Result<(Vec<StateVec<T>>, NewtonStats), SolverError> {
        let n = avgs.len();
        assert_eq!(n, self.grid().n_cells(), "averages do not match the grid");
        let ext = self.with_ghosts(avgs);
        let recs = self.reconstruct_all(&ext);
        let model = self.model.as_ref();
        let fluxes: Vec<StateVec<T>> = (0..=n)
            .into_par_iter()
            .map(|j| rusanov_flux(model, &recs[j].u_minus_right, &recs[j + 1].u_plus_left))
            .collect();
        let inv_dx = T::one() / self.grid().dx();
        let du: Vec<StateVec<T>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let rec = &recs[i + 1];
                let (mut fr, mut fl) = (fluxes[i + 1], fluxes[i]);
                if rec.wb_active {
                    fr -= model.flux(&rec.ustar_right);
                    fl -= model.flux(&rec.ustar_left);
                }
                let mut d = (fr - fl) * (-inv_dx);
                let cell = self.layout.cell(i as isize);
                for (l, a) in cell.weights().iter().enumerate() {
                    let hx = model.depth_dx(cell.quad_node(l));
                    let mut s = model.source(&rec.p_at_nodes[l]);
                    if rec.wb_active {
                        s -= model.source(&rec.ustar_at_nodes[l]);
                    }
                    d += s * (*a * hx);
                }
                d
            })
            .collect();
        if let Some(i) = du.iter().position(|d| !d.is_finite()) {
            return Err(SolverError::NonFinite { cell: i as isize, t });
        }
        let mut stats = NewtonStats::default();
        for rec in &recs[1..=n] {
            if self.method != EquilibriumMethod::None {
                stats.solves += 1;
                stats.total_iterations += rec.iterations as u64;
                stats.max_iterations = stats.max_iterations.max(rec.iterations);
                stats.fallbacks += u64::from(!rec.wb_active);
            }
        }
        Ok((du, stats))
    }

    /// `dt = cfl Δx / max_i λ(U_i)`, capped at `remaining`.
    pub fn cfl_dt(&self, avgs: &[StateVec<T>], cfl: f64, remaining: f64) -> f64 {
        let lam = avgs
            .iter()
            .map(|u| self.model.max_wave_speed(u).to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0f64, f64::max);
        let dx = self.grid().dx().to_f64().unwrap();
        if lam > 0.0 {
            (cfl * dx / lam).min(remaining)
        } else {
            remaining
        }
    }

    /// One Shu–Osher TVD-RK3 step.
    pub fn tvd_rk3_step(
        &self,
        u: &[StateVec<T>],
        t: f64,
        dt: f64,
    ) -> Result<(Vec<StateVec<T>>, NewtonStats), SolverError> {
        let h = lit::<T>(dt);
        let mut stats = NewtonStats::default();
        let (l0, s) = self.rhs(u, t)?;
        stats.merge(&s);
        let u1: Vec<_> = u.iter().zip(&l0).map(|(a, l)| a.axpy(h, l)).collect();
        let (l1, s) = self.rhs(&u1, t + dt)?;
        stats.merge(&s);
        let (q3, q1) = (lit::<T>(0.75), lit::<T>(0.25));
        let u2: Vec<_> = u.iter().zip(&u1).zip(&l1).map(|((a, b), l)| *a * q3 + b.axpy(h, l) * q1).collect();
        let (l2, s) = self.rhs(&u2, t + 0.5 * dt)?;
        stats.merge(&s);
        let (t1, t2) = (lit::<T>(1.0 / 3.0), lit::<T>(2.0 / 3.0));
        let un = u.iter().zip(&u2).zip(&l2).map(|((a, b), l)| *a * t1 + b.axpy(h, l) * t2).collect();
        Ok((un, stats))
    }

    /// Integrates to `t_end`, recording the initial state and every
    /// requested output time.
    pub fn run(&self, initial: Vec<StateVec<T>>, t_end: f64, cfl: f64, output_times: &[f64]) -> Result<RunResult<T>, SolverError> {
        let start = Instant::now();
        let mut targets: Vec<f64> = output_times.iter().copied().filter(|t| *t > 0.0 && *t < t_end).collect();
        targets.push(t_end);
        targets.sort_by(f64::total_cmp);
        targets.dedup();
        let mut snapshots = vec![Snapshot { t: 0.0, averages: initial.clone() }];
        let mut u = initial;
        let mut t = 0.0;
        let mut steps = 0;
        let mut stats = NewtonStats::default();
        for &target in &targets {
            if target <= 0.0 {
                continue;
            }
            while t < target {
                let dt = self.cfl_dt(&u, cfl, target - t);
                let (un, s) = self.tvd_rk3_step(&u, t, dt)?;
                stats.merge(&s);
                u = un;
                t = if dt >= target - t { target } else { t + dt };
                steps += 1;
            }
            snapshots.push(Snapshot { t, averages: u.clone() });
        }
        Ok(RunResult { snapshots, steps, stats, wall_ms: start.elapsed().as_secs_f64() * 1e3 })
    }
}

impl From<SolverError> for Error {
    fn from(e: SolverError) -> Self {
        Error::Solver(e)
    }
}

impl From<ModelError> for SolverError {
    fn from(e: ModelError) -> Self {
        SolverError::Boundary(e.to_string())
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot<T> {
    pub t: f64,
    pub averages: Vec<StateVec<T>>,
}

#[derive(Clone, Debug)]
pub struct RunResult<T> {
    /// Initial state first, final state last.
    pub snapshots: Vec<Snapshot<T>>,
    pub steps: usize,
    pub stats: NewtonStats,
    pub wall_ms: f64,
}

impl<T: Real> RunResult<T> {
    pub fn final_state(&self) -> &[StateVec<T>] {
        &self.snapshots.last().unwrap().averages
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{burgers1_model, shallow_water_model};

    fn s(v: f64) -> StateVec<f64> {
        StateVec::scalar(v)
    }

    #[test]
    fn rusanov_examples() {
        let m = burgers1_model();
        assert_eq!(rusanov_flux(&m, &s(2.0), &s(0.0))[0], 3.0);
        assert_eq!(rusanov_flux(&m, &s(1.5), &s(1.5))[0], 1.125);
        let sw = shallow_water_model(9.81);
        let u = StateVec::from_f64(&[2.0, 3.5]);
        let f: StateVec<f64> = rusanov_flux(&sw, &u, &u);
        assert!((f[0] - 3.5).abs() < 1e-15);
        assert!((f[1] - (3.5 * 3.5 / 2.0 + 9.81 / 2.0 * 4.0)).abs() < 1e-13);
    }

    fn burgers_solver(scheme: Scheme, order: u8, n: usize) -> Solver<f64> {
        let grid = Grid::new(-1.0, 1.0, n).unwrap();
        Solver::new(
            Arc::new(burgers1_model()),
            &grid,
            SchemeSpec::new(scheme, order, 1),
            &BoundarySpec::Free,
            &BoundarySpec::Free,
        )
        .unwrap()
    }

    #[test]
    fn cfl_examples() {
        let sv = burgers_solver(Scheme::Sm, 1, 200);
        let u = vec![s(2.0); 200];
        assert!((sv.cfl_dt(&u, 0.9, 10.0) - 0.0045).abs() < 1e-15);
        assert_eq!(sv.cfl_dt(&u, 0.9, 1e-6), 1e-6);
    }

    #[test]
    fn zero_end_time_returns_initial_state() {
        let sv = burgers_solver(Scheme::Sm, 2, 20);
        let u0: Vec<_> = (0..20).map(|i| s(1.0 + i as f64 * 0.01)).collect();
        let r = sv.run(u0.clone(), 0.0, 0.9, &[]).unwrap();
        assert_eq!(r.snapshots.len(), 1);
        assert_eq!(r.final_state(), &u0[..]);
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn flat_source_conserves_mass() {
        let grid = Grid::new(0.0, 1.0, 50).unwrap();
        let sw = Arc::new(shallow_water_model(9.81));
        let sv = Solver::new(sw.clone(), &grid, SchemeSpec::new(Scheme::Sm, 3, 1), &BoundarySpec::Free, &BoundarySpec::Free)
            .unwrap();
        let u: Vec<_> = (0..50)
            .map(|i| StateVec::from_f64(&[1.0 + 0.2 * ((i as f64) * 0.3).sin(), 0.1 * (i as f64 * 0.2).cos()]))
            .collect();
        let (du, _) = sv.rhs(&u, 0.0).unwrap();
        let total: f64 = du.iter().map(|d| d[0]).sum::<f64>() * grid.dx();
        let ext = sv.with_ghosts(&u);
        let recs = sv.reconstruct_all(&ext);
        let fl = rusanov_flux(sw.as_ref(), &recs[0].u_minus_right, &recs[1].u_plus_left);
        let fr = rusanov_flux(sw.as_ref(), &recs[50].u_minus_right, &recs[51].u_plus_left);
        assert!((total - (fl[0] - fr[0])).abs() < 1e-12);
    }

    #[test]
    fn free_ghosts() {
        let u: Vec<_> = (0..10).map(|i| s(1.0 + 0.1 * i as f64)).collect();
        let ext = burgers_solver(Scheme::Sm, 2, 10).with_ghosts(&u);
        let expect = [0.8, 0.9, 1.0, 1.9, 2.0, 2.1];
        for (k, e) in [0, 1, 2, 11, 12, 13].into_iter().zip(expect) {
            assert!((ext[k][0] - e).abs() < 1e-14, "{k}");
        }
        let neg: Vec<_> = (0..10).map(|i| StateVec::from_f64(&[0.5 - 0.15 * i as f64, 0.0])).collect();
        let sw = Solver::new(
            Arc::new(shallow_water_model(9.81)),
            &Grid::new(0.0, 1.0, 10).unwrap(),
            SchemeSpec::new(Scheme::Sm, 1, 1),
            &BoundarySpec::Free,
            &BoundarySpec::Free,
        )
        .unwrap();
        let ext = sw.with_ghosts(&neg[..4]);
        assert_eq!(ext[6], neg[3]);
    }
}
