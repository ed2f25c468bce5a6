//! Fixed-step RK4 marching of the stationary ODE `U_x = G(U, x)` and of the
//! adjoint ODE `λ_x = −e_j − ∇_U G(U, x)^T λ` on cell submeshes.

use crate::grid::CellLayout;
use crate::models::{BalanceLaw, ModelError};
use crate::scalar::{lit, Real};
use crate::state::{Mat, StateVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrationError {
    #[error("right-hand side failed at x = {x}: {source}")]
    Rhs { x: f64, source: ModelError },
    #[error("non-finite value produced near x = {x}")]
    NonFinite { x: f64 },
    #[error("trajectory does not match the cell layout: {0}")]
    LayoutMismatch(String),
}

impl IntegrationError {
    pub fn model_error(&self) -> Option<&ModelError> {
        match self {
            IntegrationError::Rhs { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Values of a marched solution, stored in increasing-node order whatever
/// the marching direction.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    nodes: Vec<T>,
    values: Vec<StateVec<T>>,
    direction: Direction,
}

impl<T: Real> Trajectory<T> {
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn values(&self) -> &[StateVec<T>] {
        &self.values
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> StateVec<T> {
        self.values[0]
    }

    pub fn last(&self) -> StateVec<T> {
        *self.values.last().unwrap()
    }

    pub fn into_values(self) -> Vec<StateVec<T>> {
        self.values
    }
}

fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn check<T: Real>(v: StateVec<T>, x: T) -> Result<StateVec<T>, IntegrationError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(IntegrationError::NonFinite { x: to_f64(x) })
    }
}

/// One classical RK4 step from `x` to `x + h`.
#[inline]
pub fn rk4_step<T, F>(rhs: &mut F, u: &StateVec<T>, x: T, h: T) -> Result<StateVec<T>, IntegrationError>
where
    T: Real,
    F: FnMut(&StateVec<T>, T) -> Result<StateVec<T>, ModelError>,
{
    let half = lit::<T>(0.5);
    let eval = |f: &mut F, v: &StateVec<T>, at: T| -> Result<StateVec<T>, IntegrationError> {
        let k = f(v, at).map_err(|source| IntegrationError::Rhs { x: to_f64(at), source })?;
        check(k, at)
    };
    let xm = x + h * half;
    let k1 = eval(rhs, u, x)?;
    let k2 = eval(rhs, &check(u.axpy(h * half, &k1), xm)?, xm)?;
    let k3 = eval(rhs, &check(u.axpy(h * half, &k2), xm)?, xm)?;
    let k4 = eval(rhs, &check(u.axpy(h, &k3), x + h)?, x + h)?;
    let six = lit::<T>(6.0);
    let two = lit::<T>(2.0);
    let incr = (k1 + k2 * two + k3 * two + k4) * (h / six);
    check(*u + incr, x + h)
}

/// Marches `u' = rhs(u, x)` across `nodes` starting from the first node
/// (`Forward`) or the last one (`Backward`).
pub fn rk4_march<T, F>(
    mut rhs: F,
    nodes: &[T],
    u_start: StateVec<T>,
    direction: Direction,
) -> Result<Trajectory<T>, IntegrationError>
where
    T: Real,
    F: FnMut(&StateVec<T>, T) -> Result<StateVec<T>, ModelError>,
{
    let n = nodes.len();
    assert!(n >= 1, "empty submesh");
    let start_x = if direction == Direction::Forward { nodes[0] } else { nodes[n - 1] };
    check(u_start, start_x)?;
    let mut values = vec![u_start; n];
    match direction {
        Direction::Forward => {
            for k in 0..n - 1 {
                values[k + 1] = rk4_step(&mut rhs, &values[k], nodes[k], nodes[k + 1] - nodes[k])?;
            }
        }
        Direction::Backward => {
            for k in (1..n).rev() {
                values[k - 1] = rk4_step(&mut rhs, &values[k], nodes[k], nodes[k - 1] - nodes[k])?;
            }
        }
    }
    Ok(Trajectory { nodes: nodes.to_vec(), values, direction })
}

/// Marches the stationary ODE of `model`.
pub fn march_stationary<T: Real>(
    model: &dyn BalanceLaw<T>,
    nodes: &[T],
    u_start: StateVec<T>,
    direction: Direction,
) -> Result<Trajectory<T>, IntegrationError> {
    rk4_march(|u, x| model.stationary_rhs(u, x), nodes, u_start, direction)
}

/// `∇_U G` along a state trajectory.
pub fn jacobians_along<T: Real>(model: &dyn BalanceLaw<T>, traj: &Trajectory<T>) -> Result<Vec<Mat<T>>, IntegrationError> {
    traj.nodes
        .iter()
        .zip(&traj.values)
        .map(|(x, u)| {
            let a = model
                .stationary_jacobian(u, *x)
                .map_err(|source| IntegrationError::Rhs { x: to_f64(*x), source })?;
            if a.is_finite() {
                Ok(a)
            } else {
                Err(IntegrationError::NonFinite { x: to_f64(*x) })
            }
        })
        .collect()
}

/// Marches `λ' = −forcing − A(x)^T λ` backward over `submesh` from
/// `λ(x_end) = terminal`.
///
/// `jacobians` holds `A` on the submesh refined twice, so RK4 half steps
/// read stored values.
pub fn adjoint_march<T: Real>(
    jacobians: &[Mat<T>],
    submesh: &[T],
    forcing: StateVec<T>,
    terminal: StateVec<T>,
) -> Result<Vec<StateVec<T>>, IntegrationError> {
    let n = submesh.len();
    if jacobians.len() != 2 * n - 1 {
        return Err(IntegrationError::LayoutMismatch(format!(
            "{} Jacobians for a submesh of {} nodes",
            jacobians.len(),
            n
        )));
    }
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let six = lit::<T>(6.0);
    let f = |a: &Mat<T>, l: &StateVec<T>| -forcing - a.tr_mul_vec(l);
    let mut out = vec![terminal; n];
    for k in (1..n).rev() {
        let h = submesh[k - 1] - submesh[k];
        let (a0, am, a1) = (&jacobians[2 * k], &jacobians[2 * k - 1], &jacobians[2 * k - 2]);
        let l = out[k];
        let k1 = f(a0, &l);
        let k2 = f(am, &l.axpy(h * half, &k1));
        let k3 = f(am, &l.axpy(h * half, &k2));
        let k4 = f(a1, &l.axpy(h, &k3));
        let next = l + (k1 + k2 * two + k3 * two + k4) * (h / six);
        out[k - 1] = check(next, submesh[k - 1])?;
    }
    Ok(out)
}

/// `Σ α_l U(x_l)` for a trajectory stored on the cell's state mesh.
pub fn quad_average<T: Real>(traj: &Trajectory<T>, cell: &CellLayout<'_, T>) -> Result<StateVec<T>, IntegrationError> {
    quad_average_values(&traj.values, cell)
}

pub fn quad_average_values<T: Real>(values: &[StateVec<T>], cell: &CellLayout<'_, T>) -> Result<StateVec<T>, IntegrationError> {
    let lay = cell.layout();
    if values.len() != lay.state_len() {
        return Err(IntegrationError::LayoutMismatch(format!(
            "{} values, state mesh has {} nodes",
            values.len(),
            lay.state_len()
        )));
    }
    let mut acc = StateVec::zeros(values[0].len());
    for (l, a) in cell.weights().iter().enumerate() {
        acc += values[lay.quad_state_index(l)] * *a;
    }
    Ok(acc)
}
