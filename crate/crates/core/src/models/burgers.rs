use super::{resonance_guard, AverageKind, BalanceLaw, ModelError, Potential, StationaryProfile};
use crate::grid::CellLayout;
use crate::scalar::{lit, Real};
use crate::state::{Mat, StateVec};

/// `u_t + (u²/2)_x = u²`, stationary solutions `C e^x`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Burgers1;

/// `u_t + (u²/2)_x = sin u`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Burgers2;

pub fn burgers1_model() -> Burgers1 {
    Burgers1
}

pub fn burgers2_model() -> Burgers2 {
    Burgers2
}

/// `u(x) = C e^x`
#[derive(Clone, Copy, Debug)]
pub struct ExpProfile<T> {
    pub c: T,
}

impl<T: Real> StationaryProfile<T> for ExpProfile<T> {
    fn eval(&self, x: T) -> Result<StateVec<T>, ModelError> {
        Ok(StateVec::scalar(self.c * x.exp()))
    }

    fn exact_average(&self, xl: T, xr: T) -> Option<StateVec<T>> {
        Some(StateVec::scalar(self.c * (xr.exp() - xl.exp()) / (xr - xl)))
    }
}

fn burgers_flux<T: Real>(u: &StateVec<T>) -> StateVec<T> {
    StateVec::scalar(u[0] * u[0] * lit(0.5))
}

impl<T: Real> BalanceLaw<T> for Burgers1 {
    fn name(&self) -> &'static str {
        "burgers1"
    }

    fn n_vars(&self) -> usize {
        1
    }

    fn component_names(&self) -> &'static [&'static str] {
        &["u"]
    }

    fn flux(&self, u: &StateVec<T>) -> StateVec<T> {
        burgers_flux(u)
    }

    fn flux_jacobian(&self, u: &StateVec<T>) -> Mat<T> {
        Mat::from_rows(&[&[u[0]]])
    }

    fn source(&self, u: &StateVec<T>) -> StateVec<T> {
        StateVec::scalar(u[0] * u[0])
    }

    fn potential(&self) -> Potential {
        Potential::Identity
    }

    fn stationary_rhs(&self, u: &StateVec<T>, _x: T) -> Result<StateVec<T>, ModelError> {
        resonance_guard(u[0].abs(), u[0].abs())?;
        Ok(*u)
    }

    fn stationary_jacobian(&self, u: &StateVec<T>, _x: T) -> Result<Mat<T>, ModelError> {
        resonance_guard(u[0].abs(), u[0].abs())?;
        Ok(Mat::identity(1))
    }

    fn max_wave_speed(&self, u: &StateVec<T>) -> T {
        u[0].abs()
    }

    fn hyperbolicity_margin(&self, u: &StateVec<T>) -> T {
        u[0].abs()
    }

    fn has_closed_form(&self) -> bool {
        true
    }

    /// `u*(x) = w e^x / Σ α_l e^{x_l}`
    fn closed_form_equilibrium(
        &self,
        cell: &CellLayout<'_, T>,
        w: &StateVec<T>,
    ) -> Option<Result<Box<dyn StationaryProfile<T>>, ModelError>> {
        let denom = cell
            .weights()
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (l, a)| acc + *a * cell.quad_node(l).exp());
        Some(Ok(Box::new(ExpProfile { c: w[0] / denom })))
    }

    fn closed_form_average(&self) -> AverageKind {
        AverageKind::Quadrature
    }
}

/// `sin(u)/u`, with its Taylor polynomial near zero.
fn sinc<T: Real>(u: T) -> T {
    if u.abs() < lit(1e-4) {
        let u2 = u * u;
        T::one() - u2 / lit(6.0) + u2 * u2 / lit(120.0)
    } else {
        u.sin() / u
    }
}

/// `d/du (sin(u)/u) = (u cos u - sin u) / u²`
fn sinc_prime<T: Real>(u: T) -> T {
    if u.abs() < lit(1e-4) {
        let u2 = u * u;
        -u / lit(3.0) + u * u2 / lit(30.0)
    } else {
        (u * u.cos() - u.sin()) / (u * u)
    }
}

impl<T: Real> BalanceLaw<T> for Burgers2 {
    fn name(&self) -> &'static str {
        "burgers2"
    }

    fn n_vars(&self) -> usize {
        1
    }

    fn component_names(&self) -> &'static [&'static str] {
        &["u"]
    }

    fn flux(&self, u: &StateVec<T>) -> StateVec<T> {
        burgers_flux(u)
    }

    fn flux_jacobian(&self, u: &StateVec<T>) -> Mat<T> {
        Mat::from_rows(&[&[u[0]]])
    }

    fn source(&self, u: &StateVec<T>) -> StateVec<T> {
        StateVec::scalar(u[0].sin())
    }

    fn potential(&self) -> Potential {
        Potential::Identity
    }

    fn stationary_rhs(&self, u: &StateVec<T>, _x: T) -> Result<StateVec<T>, ModelError> {
        Ok(StateVec::scalar(sinc(u[0])))
    }

    fn stationary_jacobian(&self, u: &StateVec<T>, _x: T) -> Result<Mat<T>, ModelError> {
        Ok(Mat::from_rows(&[&[sinc_prime(u[0])]]))
    }

    fn max_wave_speed(&self, u: &StateVec<T>) -> T {
        u[0].abs()
    }

    fn hyperbolicity_margin(&self, u: &StateVec<T>) -> T {
        u[0].abs()
    }
}
