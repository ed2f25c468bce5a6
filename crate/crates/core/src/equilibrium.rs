//! Per-cell control problem: find the stationary solution whose discrete
//! cell average is a prescribed `W`.
//!
//! `F_h(U0) = Σ α_l U_h(x_l; U0)` is evaluated by RK4 and its Jacobian
//! `DF_h = Λ(0)^T / Δx` by adjoint marching, one adjoint per
//! non-invariant component. Newton's method then solves `F_h(U0) = W`.

use crate::grid::{CellLayout, Layout};
use crate::integrate::{
    adjoint_march, jacobians_along, march_stationary, quad_average_values, Direction, IntegrationError, Trajectory,
};
use crate::models::{AverageKind, BalanceLaw, ModelError, StationaryProfile};
use crate::scalar::Real;
use crate::state::{Mat, StateVec};

/// Newton iteration controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    /// Stop once `‖F_h(U0) − W‖∞ ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Recompute the Jacobian every `k_reuse` iterations; `1` is full Newton.
    pub k_reuse: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 20, k_reuse: 1 }
    }
}

impl NewtonConfig {
    /// Adjoint solved once, at the initial guess.
    pub fn frozen_jacobian(mut self) -> Self {
        self.k_reuse = usize::MAX;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoEquilibriumReason {
    NewtonDiverged,
    SingularJacobian,
    Resonance,
    IntegrationFailure,
    MaxIterations,
}

/// Failure of the equilibrium search; the caller falls back to the
/// standard reconstruction.
#[derive(Clone, Debug)]
pub struct NoEquilibrium<T> {
    pub reason: NoEquilibriumReason,
    pub last_iterate: StateVec<T>,
    pub residuals: Vec<f64>,
    pub detail: String,
}

impl<T: Real> std::fmt::Display for NoEquilibrium<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} at {:?}: {}", self.reason, self.last_iterate, self.detail)
    }
}

fn classify(e: &IntegrationError) -> NoEquilibriumReason {
    match e.model_error() {
        Some(ModelError::Resonance { .. }) => NoEquilibriumReason::Resonance,
        _ => NoEquilibriumReason::IntegrationFailure,
    }
}

fn no_eq<T: Real>(reason: NoEquilibriumReason, u: StateVec<T>, residuals: &[f64], detail: String) -> NoEquilibrium<T> {
    NoEquilibrium { reason, last_iterate: u, residuals: residuals.to_vec(), detail }
}

/// Stationary trajectory of one cell on its state mesh.
#[derive(Clone, Debug)]
pub struct CellSolve<T> {
    pub values: Vec<StateVec<T>>,
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

/// Values of the home cell's stationary solution on one stencil cell.
#[derive(Clone, Debug)]
pub struct StencilCell<T> {
    pub index: isize,
    pub node_values: Vec<StateVec<T>>,
    pub average: StateVec<T>,
}

/// Stationary solution attached to a cell and continued over its stencil.
#[derive(Clone, Debug)]
pub struct EquilibriumSolution<T> {
    /// `U*_{i-1/2}`
    pub u_left: StateVec<T>,
    /// `U*_{i+1/2}`
    pub u_right: StateVec<T>,
    /// `U*_{h,l}` at the home cell's quadrature nodes.
    pub cell_node_values: Vec<StateVec<T>>,
    /// Stencil cells in increasing index order, home cell included.
    pub stencil: Vec<StencilCell<T>>,
    pub iterations: usize,
    pub converged: bool,
    pub residuals: Vec<f64>,
}

impl<T: Real> EquilibriumSolution<T> {
    pub fn stencil_cell(&self, index: isize) -> Option<&StencilCell<T>> {
        self.stencil.iter().find(|c| c.index == index)
    }
}

/// `F_h(U0)` together with the trajectory on the cell's state mesh.
pub fn functional_fh<T: Real>(
    model: &dyn BalanceLaw<T>,
    cell: &CellLayout<'_, T>,
    u0: &StateVec<T>,
) -> Result<(StateVec<T>, Trajectory<T>), IntegrationError> {
    let traj = march_stationary(model, &cell.state_nodes(), *u0, Direction::Forward)?;
    let avg = quad_average_values(traj.values(), cell)?;
    Ok((avg, traj))
}

/// `λ_j` at the submesh nodes, for a state trajectory on the state mesh.
pub fn adjoint_column<T: Real>(
    model: &dyn BalanceLaw<T>,
    cell: &CellLayout<'_, T>,
    traj: &Trajectory<T>,
    j: usize,
) -> Result<Vec<StateVec<T>>, IntegrationError> {
    let jac = jacobians_along(model, traj)?;
    let n = model.n_vars();
    adjoint_march(&jac, &cell.submesh(), StateVec::unit(n, j), StateVec::zeros(n))
}

/// `DF_h(U0) = Λ(0)^T / Δx`. Invariant components contribute
/// `λ_j(0) = Δx e_j` without an adjoint solve.
pub fn jacobian_dfh<T: Real>(
    model: &dyn BalanceLaw<T>,
    cell: &CellLayout<'_, T>,
    traj: &Trajectory<T>,
) -> Result<Mat<T>, IntegrationError> {
    let n = model.n_vars();
    let dx = cell.dx();
    let jac = jacobians_along(model, traj)?;
    let sub = cell.submesh();
    let invariant = model.invariant_components();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        if invariant.contains(&j) {
            cols.push(StateVec::unit(n, j) * dx);
        } else {
            let lam = adjoint_march(&jac, &sub, StateVec::unit(n, j), StateVec::zeros(n))?;
            cols.push(lam[0]);
        }
    }
    Ok(Mat::from_columns(&cols).transpose().scale(T::one() / dx))
}

fn pin_invariants<T: Real>(model: &dyn BalanceLaw<T>, u: &mut StateVec<T>, w: &StateVec<T>) {
    for &j in model.invariant_components() {
        u[j] = w[j];
    }
}

fn residual_of<T: Real>(f: &StateVec<T>, w: &StateVec<T>) -> f64 {
    (*f - *w).norm_inf().to_f64().unwrap_or(f64::INFINITY)
}

/// Newton's method for `F_h(U0) = W` on the home cell, starting at `W`.
pub fn newton_cell<T: Real>(
    model: &dyn BalanceLaw<T>,
    cell: &CellLayout<'_, T>,
    w: &StateVec<T>,
    cfg: &NewtonConfig,
) -> Result<CellSolve<T>, NoEquilibrium<T>> {
    let mut u = *w;
    let mut residuals: Vec<f64> = Vec::new();
    if let Err(e) = model.admissible(&u) {
        return Err(no_eq(NoEquilibriumReason::IntegrationFailure, u, &residuals, e.to_string()));
    }
    let mut jac: Option<Mat<T>> = None;
    let mut since_update = 0usize;
    let k_reuse = cfg.k_reuse.max(1);
    for k in 0..=cfg.max_iter {
        let (f, traj) = functional_fh(model, cell, &u)
            .map_err(|e| no_eq(classify(&e), u, &residuals, e.to_string()))?;
        let r = residual_of(&f, w);
        residuals.push(r);
        if r <= cfg.tol {
            return Ok(CellSolve { values: traj.into_values(), iterations: k, residuals });
        }
        if !r.is_finite() {
            return Err(no_eq(NoEquilibriumReason::NewtonDiverged, u, &residuals, "non-finite residual".into()));
        }
        if k >= 2 && r > 10.0 * residuals[k - 2] {
            return Err(no_eq(NoEquilibriumReason::NewtonDiverged, u, &residuals, format!("residual grew to {r:e}")));
        }
        if k == cfg.max_iter {
            break;
        }
        if jac.is_none() || since_update >= k_reuse {
            jac = Some(
                jacobian_dfh(model, cell, &traj).map_err(|e| no_eq(classify(&e), u, &residuals, e.to_string()))?,
            );
            since_update = 0;
        }
        let v = jac.as_ref().unwrap().solve(&(f - *w)).ok_or_else(|| {
            no_eq(NoEquilibriumReason::SingularJacobian, u, &residuals, "singular DF_h".into())
        })?;
        u -= v;
        pin_invariants(model, &mut u, w);
        since_update += 1;
        if let Err(e) = model.admissible(&u) {
            return Err(no_eq(NoEquilibriumReason::NewtonDiverged, u, &residuals, e.to_string()));
        }
    }
    let detail = format!("residual {:e} after {} iterations", residuals.last().unwrap(), cfg.max_iter);
    Err(no_eq(NoEquilibriumReason::MaxIterations, u, &residuals, detail))
}

/// Scalar Newton in `h` for shallow water: `q ≡ q̄` and only `λ_1` is
/// computed, `h ← h − Δx (F_h − h̄) / λ_{1,1}(0)`.
pub fn sw_scalar_newton_cell<T: Real>(
    model: &dyn BalanceLaw<T>,
    cell: &CellLayout<'_, T>,
    w: &StateVec<T>,
    cfg: &NewtonConfig,
) -> Result<CellSolve<T>, NoEquilibrium<T>> {
    assert_eq!(model.n_vars(), 2, "scalar Newton needs the (h, q) system");
    let dx = cell.dx();
    let sub = cell.submesh();
    let mut u = *w;
    let mut residuals: Vec<f64> = Vec::new();
    if let Err(e) = model.admissible(&u) {
        return Err(no_eq(NoEquilibriumReason::IntegrationFailure, u, &residuals, e.to_string()));
    }
    let mut lam0: Option<T> = None;
    let mut since_update = 0usize;
    let k_reuse = cfg.k_reuse.max(1);
    for k in 0..=cfg.max_iter {
        let (f, traj) = functional_fh(model, cell, &u)
            .map_err(|e| no_eq(classify(&e), u, &residuals, e.to_string()))?;
        let r = residual_of(&f, w);
        residuals.push(r);
        if r <= cfg.tol {
            return Ok(CellSolve { values: traj.into_values(), iterations: k, residuals });
        }
        if !r.is_finite() || (k >= 2 && r > 10.0 * residuals[k - 2]) {
            return Err(no_eq(NoEquilibriumReason::NewtonDiverged, u, &residuals, format!("residual {r:e}")));
        }
        if k == cfg.max_iter {
            break;
        }
        if lam0.is_none() || since_update >= k_reuse {
            let jac = jacobians_along(model, &traj).map_err(|e| no_eq(classify(&e), u, &residuals, e.to_string()))?;
            // λ' = −1 − (∂_h G_h) λ
            let scalar: Vec<Mat<T>> = jac.iter().map(|a| Mat::from_rows(&[&[a[(0, 0)]]])).collect();
            let lam = adjoint_march(&scalar, &sub, StateVec::scalar(T::one()), StateVec::scalar(T::zero()))
                .map_err(|e| no_eq(classify(&e), u, &residuals, e.to_string()))?;
            lam0 = Some(lam[0][0]);
            since_update = 0;
        }
        let l0 = lam0.unwrap();
        if l0 == T::zero() {
            return Err(no_eq(NoEquilibriumReason::SingularJacobian, u, &residuals, "λ(0) = 0".into()));
        }
        u[0] -= dx / l0 * (f[0] - w[0]);
        u[1] = w[1];
        since_update += 1;
        if let Err(e) = model.admissible(&u) {
            return Err(no_eq(NoEquilibriumReason::NewtonDiverged, u, &residuals, e.to_string()));
        }
    }
    let detail = format!("residual {:e} after {} iterations", residuals.last().unwrap(), cfg.max_iter);
    Err(no_eq(NoEquilibriumReason::MaxIterations, u, &residuals, detail))
}

/// Solves the Cauchy problem `U(x_i) = W` from the cell's single midpoint
/// node, forward to `x_{i+1/2}` and backward to `x_{i-1/2}`.
pub fn cauchy_from_center<T: Real>(
    model: &dyn BalanceLaw<T>,
    cell: &CellLayout<'_, T>,
    w: &StateVec<T>,
) -> Result<CellSolve<T>, NoEquilibrium<T>> {
    let lay = cell.layout();
    assert_eq!(lay.n_quad(), 1, "the Cauchy shortcut needs a one-node rule");
    let nodes = cell.state_nodes();
    let mid = lay.quad_state_index(0);
    let fail = |e: IntegrationError| no_eq(classify(&e), *w, &[], e.to_string());
    let right = march_stationary(model, &nodes[mid..], *w, Direction::Forward).map_err(fail)?;
    let left = march_stationary(model, &nodes[..=mid], *w, Direction::Backward).map_err(fail)?;
    let mut values = left.into_values();
    values.extend_from_slice(&right.values()[1..]);
    Ok(CellSolve { values, iterations: 0, residuals: vec![0.0] })
}

/// Continues a home-cell trajectory over `radius` neighbors on each side
/// and gathers the stencil data.
pub fn extend_to_stencil<T: Real>(
    model: &dyn BalanceLaw<T>,
    layout: &Layout<T>,
    home: isize,
    solve: CellSolve<T>,
    radius: usize,
) -> Result<EquilibriumSolution<T>, NoEquilibrium<T>> {
    let cell = layout.cell(home);
    let u_left = solve.values[0];
    let u_right = *solve.values.last().unwrap();
    let nodes_of = |vals: &[StateVec<T>]| -> Vec<StateVec<T>> {
        (0..layout.n_quad()).map(|l| vals[layout.quad_state_index(l)]).collect()
    };
    let fail = |e: IntegrationError| no_eq(classify(&e), u_left, &solve.residuals, format!("stencil: {e}"));
    let mut left_cells = Vec::with_capacity(radius);
    let mut start = u_left;
    for m in 1..=radius as isize {
        let c = layout.cell(home - m);
        let t = march_stationary(model, &c.state_nodes(), start, Direction::Backward).map_err(fail)?;
        start = t.first();
        let avg = quad_average_values(t.values(), &c).map_err(fail)?;
        left_cells.push(StencilCell { index: home - m, node_values: nodes_of(t.values()), average: avg });
    }
    left_cells.reverse();
    let home_avg = quad_average_values(&solve.values, &cell).map_err(fail)?;
    let cell_node_values = nodes_of(&solve.values);
    let mut stencil = left_cells;
    stencil.push(StencilCell { index: home, node_values: cell_node_values.clone(), average: home_avg });
    let mut start = u_right;
    for m in 1..=radius as isize {
        let c = layout.cell(home + m);
        let t = march_stationary(model, &c.state_nodes(), start, Direction::Forward).map_err(fail)?;
        start = t.last();
        let avg = quad_average_values(t.values(), &c).map_err(fail)?;
        stencil.push(StencilCell { index: home + m, node_values: nodes_of(t.values()), average: avg });
    }
    Ok(EquilibriumSolution {
        u_left,
        u_right,
        cell_node_values,
        stencil,
        iterations: solve.iterations,
        converged: true,
        residuals: solve.residuals,
    })
}

/// Newton solve on the home cell followed by stencil extension.
pub fn newton_solve<T: Real>(
    model: &dyn BalanceLaw<T>,
    layout: &Layout<T>,
    home: isize,
    w: &StateVec<T>,
    cfg: &NewtonConfig,
    radius: usize,
) -> Result<EquilibriumSolution<T>, NoEquilibrium<T>> {
    let solve = newton_cell(model, &layout.cell(home), w, cfg)?;
    extend_to_stencil(model, layout, home, solve, radius)
}

/// Equilibrium from a closed-form or implicit stationary solution.
pub fn closed_form_solve<T: Real>(
    model: &dyn BalanceLaw<T>,
    layout: &Layout<T>,
    home: isize,
    w: &StateVec<T>,
    radius: usize,
) -> Result<EquilibriumSolution<T>, NoEquilibrium<T>> {
    let cell = layout.cell(home);
    let fail = |e: ModelError| {
        let reason = match e {
            ModelError::Resonance { .. } => NoEquilibriumReason::Resonance,
            _ => NoEquilibriumReason::IntegrationFailure,
        };
        no_eq(reason, *w, &[], e.to_string())
    };
    let profile: Box<dyn StationaryProfile<T>> = match model.closed_form_equilibrium(&cell, w) {
        Some(p) => p.map_err(fail)?,
        None => {
            return Err(no_eq(
                NoEquilibriumReason::IntegrationFailure,
                *w,
                &[],
                format!("{} has no closed-form equilibrium", model.name()),
            ))
        }
    };
    let exact = model.closed_form_average() == AverageKind::ExactIntegral;
    let mut stencil = Vec::with_capacity(2 * radius + 1);
    for m in -(radius as isize)..=(radius as isize) {
        let c = layout.cell(home + m);
        let node_values: Vec<StateVec<T>> =
            c.quad_nodes().iter().map(|x| profile.eval(*x)).collect::<Result<_, _>>().map_err(fail)?;
        let average = match (exact, profile.exact_average(c.x_left(), c.x_right())) {
            (true, Some(a)) => a,
            _ => node_values
                .iter()
                .zip(c.weights())
                .fold(StateVec::zeros(w.len()), |acc, (v, a)| acc + *v * *a),
        };
        stencil.push(StencilCell { index: home + m, node_values, average });
    }
    let u_left = profile.eval(cell.x_left()).map_err(fail)?;
    let u_right = profile.eval(cell.x_right()).map_err(fail)?;
    let cell_node_values = stencil[radius].node_values.clone();
    Ok(EquilibriumSolution {
        u_left,
        u_right,
        cell_node_values,
        stencil,
        iterations: 0,
        converged: true,
        residuals: Vec::new(),
    })
}
