//! Balance-law systems `U_t + f(U)_x = S(U) H_x`.
//!
//! A model supplies the flux, source and potential together with the
//! right-hand side `G(U, x) = D_f(U)^{-1} S(U) H_x(x)` of the ODE satisfied
//! by stationary solutions and its Jacobian `∇_U G`. That is all the
//! equilibrium reconstruction needs; closed-form equilibria are optional.

mod burgers;
mod coupled;
mod euler;
mod potential;
mod shallow_water;

use crate::grid::CellLayout;
use crate::scalar::{lit, Real};
use crate::state::{Mat, StateVec};
use std::sync::Arc;

pub use burgers::{burgers1_model, burgers2_model, Burgers1, Burgers2, ExpProfile};
pub use coupled::{coupled_burgers_model, CoupledBurgers, CoupledProfile};
pub use euler::{euler_gravity_model, EulerGravity, EulerState};
pub use potential::Potential;
pub use shallow_water::{
    shallow_water_model, solve_energy_cubic, sw_implicit_sample, FlowRegime, ImplicitSwProfile, ShallowWater,
    ShallowWaterState,
};

/// Relative eigenvalue margin below which a state counts as resonant.
pub const RESONANCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("resonant state: eigenvalue margin {margin:e}")]
    Resonance { margin: f64 },
    #[error("inadmissible state: {0}")]
    InvalidState(String),
    #[error("no stationary solution: {0}")]
    NoStationarySolution(String),
}

/// How a closed-form equilibrium interprets "cell average".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AverageKind {
    /// `Σ α_l U(x_l)` with the layout's quadrature rule.
    Quadrature,
    /// `(1/Δx) ∫ U dx`, evaluated analytically.
    ExactIntegral,
}

/// A stationary solution that can be evaluated anywhere.
pub trait StationaryProfile<T: Real>: Send + Sync {
    fn eval(&self, x: T) -> Result<StateVec<T>, ModelError>;

    /// Exact mean over `[xl, xr]` when available in closed form.
    fn exact_average(&self, _xl: T, _xr: T) -> Option<StateVec<T>> {
        None
    }
}

/// Profile backed by a closure; used for analytic initial data.
pub struct FnProfile<T, F>(pub F, pub std::marker::PhantomData<T>);

impl<T: Real, F> FnProfile<T, F>
where
    F: Fn(T) -> StateVec<T> + Send + Sync,
{
    pub fn new(f: F) -> Self {
        Self(f, std::marker::PhantomData)
    }
}

impl<T: Real, F> StationaryProfile<T> for FnProfile<T, F>
where
    F: Fn(T) -> StateVec<T> + Send + Sync,
{
    fn eval(&self, x: T) -> Result<StateVec<T>, ModelError> {
        Ok((self.0)(x))
    }
}

/// A one-dimensional system of balance laws.
pub trait BalanceLaw<T: Real>: Send + Sync {
    fn name(&self) -> &'static str;

    /// Number of conserved variables `N`.
    fn n_vars(&self) -> usize;

    fn component_names(&self) -> &'static [&'static str];

    fn flux(&self, u: &StateVec<T>) -> StateVec<T>;

    fn flux_jacobian(&self, u: &StateVec<T>) -> Mat<T>;

    fn source(&self, u: &StateVec<T>) -> StateVec<T>;

    fn potential(&self) -> Potential;

    fn depth(&self, x: T) -> T {
        self.potential().value(x)
    }

    fn depth_dx(&self, x: T) -> T {
        self.potential().derivative(x)
    }

    /// `G(U, x)`
    fn stationary_rhs(&self, u: &StateVec<T>, x: T) -> Result<StateVec<T>, ModelError>;

    /// `∇_U G(U, x)`
    fn stationary_jacobian(&self, u: &StateVec<T>, x: T) -> Result<Mat<T>, ModelError>;

    /// Spectral radius of `D_f(U)`.
    fn max_wave_speed(&self, u: &StateVec<T>) -> T;

    /// `min_i |λ_i(D_f(U))|` over the eigenvalues `G` divides by.
    fn hyperbolicity_margin(&self, u: &StateVec<T>) -> T;

    fn admissible(&self, u: &StateVec<T>) -> Result<(), ModelError> {
        if u.is_finite() {
            Ok(())
        } else {
            Err(ModelError::InvalidState(format!("non-finite state {u:?}")))
        }
    }

    /// Components whose stationary equation is `u_x = 0`.
    fn invariant_components(&self) -> &'static [usize] {
        &[]
    }

    /// Stationary solution whose cell average (in the sense of
    /// [`BalanceLaw::closed_form_average`]) equals `w`, if the model knows
    /// one in closed or implicit form.
    fn closed_form_equilibrium(
        &self,
        _cell: &CellLayout<'_, T>,
        _w: &StateVec<T>,
    ) -> Option<Result<Box<dyn StationaryProfile<T>>, ModelError>> {
        None
    }

    fn closed_form_average(&self) -> AverageKind {
        AverageKind::Quadrature
    }

    fn has_closed_form(&self) -> bool {
        false
    }
}

pub(crate) fn resonance_guard<T: Real>(margin: T, lambda_max: T) -> Result<(), ModelError> {
    let floor = lit::<T>(RESONANCE_TOL) * lambda_max.max(T::one());
    if margin < floor || !margin.is_finite() {
        Err(ModelError::Resonance { margin: margin.to_f64().unwrap_or(f64::NAN) })
    } else {
        Ok(())
    }
}

/// Model parameters selectable from configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub gravity: f64,
    pub gamma: f64,
    pub potential: Potential,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { gravity: 9.81, gamma: 1.5, potential: Potential::Identity }
    }
}

/// Builds a model by its configuration name.
pub fn model_by_name<T: Real>(name: &str, params: ModelParams) -> Option<Arc<dyn BalanceLaw<T>>> {
    let m: Arc<dyn BalanceLaw<T>> = match name {
        "burgers1" => Arc::new(burgers1_model()),
        "burgers2" => Arc::new(burgers2_model()),
        "coupled_burgers" => Arc::new(coupled_burgers_model()),
        "shallow_water" => Arc::new(shallow_water_model(params.gravity).with_potential(params.potential)),
        "euler_gravity" => Arc::new(euler_gravity_model(params.gamma).with_potential(params.potential)),
        _ => return None,
    };
    Some(m)
}

pub const MODEL_NAMES: [&str; 5] = ["burgers1", "burgers2", "coupled_burgers", "shallow_water", "euler_gravity"];
