//! Standard reconstruction operators and the well-balanced wrapper
//! `P_i = U*_i + Q_i`.

use crate::equilibrium::{
    cauchy_from_center, closed_form_solve, extend_to_stencil, newton_cell, sw_scalar_newton_cell,
    EquilibriumSolution, NewtonConfig, NoEquilibrium, NoEquilibriumReason,
};
use crate::grid::Layout;
use crate::models::BalanceLaw;
use crate::scalar::{lit, Real};
use crate::state::StateVec;

/// Central WENO constants.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct CwenoParams {
    /// Linear weights `(d_L, d_0, d_R)`.
    pub weights: [f64; 3],
    pub eps: f64,
    pub power: i32,
}

impl Default for CwenoParams {
    fn default() -> Self {
        Self { weights: [0.25, 0.5, 0.25], eps: 1e-6, power: 2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StandardOperator {
    PiecewiseConstant,
    Muscl,
    Cweno3(CwenoParams),
}

impl StandardOperator {
    pub fn for_order(order: u8) -> Option<Self> {
        match order {
            1 => Some(Self::PiecewiseConstant),
            2 => Some(Self::Muscl),
            3 => Some(Self::Cweno3(CwenoParams::default())),
            _ => None,
        }
    }

    pub fn radius(&self) -> usize {
        match self {
            Self::PiecewiseConstant => 0,
            Self::Muscl | Self::Cweno3(_) => 1,
        }
    }

    pub fn order(&self) -> u8 {
        match self {
            Self::PiecewiseConstant => 1,
            Self::Muscl => 2,
            Self::Cweno3(_) => 3,
        }
    }

    /// `Q_i` from the stencil values `V_{i-r..=i+r}`.
    pub fn reconstruct<T: Real>(&self, v: &[StateVec<T>], dx: T) -> Poly<T> {
        assert_eq!(v.len(), 2 * self.radius() + 1, "stencil length");
        let n = v[0].len();
        let z = StateVec::zeros(n);
        match self {
            Self::PiecewiseConstant => Poly { c: [v[0], z, z] },
            Self::Muscl => {
                let slope = (v[1] - v[0]).zip_map(&(v[2] - v[1]), minmod) * (T::one() / dx);
                Poly { c: [v[1], slope, z] }
            }
            Self::Cweno3(p) => {
                let mut c = [z; 3];
                for k in 0..n {
                    let q = cweno3_scalar(v[0][k], v[1][k], v[2][k], dx, p);
                    for (ci, qi) in c.iter_mut().zip(q) {
                        ci[k] = qi;
                    }
                }
                Poly { c }
            }
        }
    }
}

fn minmod<T: Real>(a: T, b: T) -> T {
    if a * b <= T::zero() {
        T::zero()
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Coefficients `(a, b, c)` of `a + bξ + cξ²`, `ξ = x − x_i`.
fn cweno3_scalar<T: Real>(vm: T, v0: T, vp: T, dx: T, p: &CwenoParams) -> [T; 3] {
    let [dl, d0, dr] = p.weights.map(lit::<T>);
    let two = lit::<T>(2.0);
    let dx2 = dx * dx;
    let c_opt = (vp - two * v0 + vm) / (two * dx2);
    let b_opt = (vp - vm) / (two * dx);
    let a_opt = v0 - c_opt * dx2 / lit(12.0);
    let bl = (v0 - vm) / dx;
    let br = (vp - v0) / dx;
    let a0 = (a_opt - (dl + dr) * v0) / d0;
    let b0 = (b_opt - dl * bl - dr * br) / d0;
    let c0 = c_opt / d0;
    let beta_lin = |b: T| b * b * dx2;
    let beta0 = b0 * b0 * dx2 + lit::<T>(13.0 / 3.0) * c0 * c0 * dx2 * dx2;
    let eps = lit::<T>(p.eps);
    let alpha = |d: T, beta: T| d / (eps + beta).powi(p.power);
    let (al, a0w, ar) = (alpha(dl, beta_lin(bl)), alpha(d0, beta0), alpha(dr, beta_lin(br)));
    let s = al + a0w + ar;
    let (wl, w0, wr) = (al / s, a0w / s, ar / s);
    [w0 * a0 + (wl + wr) * v0, w0 * b0 + wl * bl + wr * br, w0 * c0]
}

/// `Q(ξ) = c_0 + c_1 ξ + c_2 ξ²` with `ξ = x − x_i`.
#[derive(Clone, Copy, Debug)]
pub struct Poly<T> {
    pub c: [StateVec<T>; 3],
}

impl<T: Real> Poly<T> {
    pub fn eval(&self, xi: T) -> StateVec<T> {
        self.c[0] + (self.c[1] + self.c[2] * xi) * xi
    }
}

/// How the equilibrium `U*_i` is obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EquilibriumMethod {
    /// No equilibrium: standard scheme.
    None,
    /// Closed-form or implicit stationary solutions.
    ClosedForm,
    /// RK4 stationary solver: Newton with adjoint gradients on multi-node
    /// rules, the Cauchy problem from the cell center on the midpoint rule.
    Discrete { newton: NewtonConfig, scalar_sw: bool },
}

/// Per-cell reconstruction data.
#[derive(Clone, Debug)]
pub struct WbReconstruction<T> {
    /// `U⁻_{i+1/2}`
    pub u_minus_right: StateVec<T>,
    /// `U⁺_{i-1/2}`
    pub u_plus_left: StateVec<T>,
    /// `P^i_l`
    pub p_at_nodes: Vec<StateVec<T>>,
    /// `U^{*,i}_{h,l}`
    pub ustar_at_nodes: Vec<StateVec<T>>,
    pub ustar_left: StateVec<T>,
    pub ustar_right: StateVec<T>,
    pub wb_active: bool,
    pub iterations: usize,
    pub failure: Option<NoEquilibriumReason>,
}

fn node_offsets<T: Real>(layout: &Layout<T>, i: isize) -> Vec<T> {
    let c = layout.cell(i);
    let center = layout.grid().center(i);
    c.quad_nodes().into_iter().map(|x| x - center).collect()
}

/// Standard reconstruction of the stencil averages `U_{i-r..=i+r}`.
pub fn standard_reconstruct<T: Real>(
    layout: &Layout<T>,
    i: isize,
    stencil_avgs: &[StateVec<T>],
    op: &StandardOperator,
) -> WbReconstruction<T> {
    let dx = layout.grid().dx();
    let q = op.reconstruct(stencil_avgs, dx);
    let half = dx * lit(0.5);
    let z = StateVec::zeros(stencil_avgs[0].len());
    let offs = node_offsets(layout, i);
    WbReconstruction {
        u_minus_right: q.eval(half),
        u_plus_left: q.eval(-half),
        p_at_nodes: offs.iter().map(|xi| q.eval(*xi)).collect(),
        ustar_at_nodes: vec![z; offs.len()],
        ustar_left: z,
        ustar_right: z,
        wb_active: false,
        iterations: 0,
        failure: None,
    }
}

/// Equilibrium attached to cell `i` with average `w`.
pub fn cell_equilibrium<T: Real>(
    model: &dyn BalanceLaw<T>,
    layout: &Layout<T>,
    i: isize,
    w: &StateVec<T>,
    method: &EquilibriumMethod,
    radius: usize,
) -> Result<EquilibriumSolution<T>, NoEquilibrium<T>> {
    match method {
        EquilibriumMethod::None => Err(NoEquilibrium {
            reason: NoEquilibriumReason::IntegrationFailure,
            last_iterate: *w,
            residuals: Vec::new(),
            detail: "no equilibrium method".into(),
        }),
        EquilibriumMethod::ClosedForm => closed_form_solve(model, layout, i, w, radius),
        EquilibriumMethod::Discrete { newton, scalar_sw } => {
            let cell = layout.cell(i);
            let solve = if layout.n_quad() == 1 {
                cauchy_from_center(model, &cell, w)?
            } else if *scalar_sw {
                sw_scalar_newton_cell(model, &cell, w, newton)?
            } else {
                newton_cell(model, &cell, w, newton)?
            };
            extend_to_stencil(model, layout, i, solve, radius)
        }
    }
}

/// Well-balanced reconstruction of cell `i`, falling back to the standard
/// operator when no equilibrium is found.
pub fn wb_reconstruct<T: Real>(
    model: &dyn BalanceLaw<T>,
    layout: &Layout<T>,
    i: isize,
    stencil_avgs: &[StateVec<T>],
    op: &StandardOperator,
    method: &EquilibriumMethod,
) -> WbReconstruction<T> {
    let r = op.radius();
    let w = stencil_avgs[r];
    let eq = match cell_equilibrium(model, layout, i, &w, method, r) {
        Ok(eq) => eq,
        Err(e) => {
            let mut rec = standard_reconstruct(layout, i, stencil_avgs, op);
            if *method != EquilibriumMethod::None {
                log::debug!("cell {i}: standard reconstruction ({e})");
                rec.failure = Some(e.reason);
            }
            return rec;
        }
    };
    let v: Vec<StateVec<T>> = stencil_avgs.iter().zip(&eq.stencil).map(|(u, s)| *u - s.average).collect();
    let dx = layout.grid().dx();
    let q = op.reconstruct(&v, dx);
    let half = dx * lit(0.5);
    let offs = node_offsets(layout, i);
    WbReconstruction {
        u_minus_right: eq.u_right + q.eval(half),
        u_plus_left: eq.u_left + q.eval(-half),
        p_at_nodes: eq.cell_node_values.iter().zip(&offs).map(|(u, xi)| *u + q.eval(*xi)).collect(),
        ustar_at_nodes: eq.cell_node_values,
        ustar_left: eq.u_left,
        ustar_right: eq.u_right,
        wb_active: true,
        iterations: eq.iterations,
        failure: None,
    }
}
