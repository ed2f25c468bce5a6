use super::{resonance_guard, BalanceLaw, ModelError, Potential};
use crate::scalar::{lit, Real};
use crate::state::{Mat, StateVec};

/// Ideal-gas Euler equations in a gravitational potential,
/// `U = (ρ, q, E)`, `S(U) = (0, −ρ, −q)`.
#[derive(Clone, Copy, Debug)]
pub struct EulerGravity {
    gamma: f64,
    potential: Potential,
}

pub fn euler_gravity_model(gamma: f64) -> EulerGravity {
    EulerGravity { gamma, potential: Potential::Identity }
}

impl EulerGravity {
    pub fn with_potential(mut self, potential: Potential) -> Self {
        self.potential = potential;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Primitive view of an Euler state.
#[derive(Clone, Copy, Debug)]
pub struct EulerState<T> {
    pub rho: T,
    pub q: T,
    pub e: T,
    pub gamma: T,
}

impl<T: Real> EulerState<T> {
    pub fn new(u: &StateVec<T>, gamma: T) -> Self {
        Self { rho: u[0], q: u[1], e: u[2], gamma }
    }

    pub fn velocity(&self) -> T {
        self.q / self.rho
    }

    pub fn pressure(&self) -> T {
        (self.gamma - T::one()) * (self.e - self.q * self.q / (lit::<T>(2.0) * self.rho))
    }

    pub fn sound_speed(&self) -> T {
        (self.gamma * self.pressure() / self.rho).sqrt()
    }

    pub fn mach(&self) -> T {
        self.velocity().abs() / self.sound_speed()
    }
}

impl EulerGravity {
    fn state<T: Real>(&self, u: &StateVec<T>) -> EulerState<T> {
        EulerState::new(u, lit(self.gamma))
    }
}

impl<T: Real> BalanceLaw<T> for EulerGravity {
    fn name(&self) -> &'static str {
        "euler_gravity"
    }

    fn n_vars(&self) -> usize {
        3
    }

    fn component_names(&self) -> &'static [&'static str] {
        &["rho", "q", "E"]
    }

    fn flux(&self, u: &StateVec<T>) -> StateVec<T> {
        let s = self.state(u);
        let v = s.velocity();
        let p = s.pressure();
        StateVec::from_slice(&[s.q, s.q * v + p, v * (s.e + p)])
    }

    fn flux_jacobian(&self, u: &StateVec<T>) -> Mat<T> {
        let s = self.state(u);
        let g = s.gamma;
        let v = s.velocity();
        let v2 = v * v;
        let one = T::one();
        let half = lit::<T>(0.5);
        let three = lit::<T>(3.0);
        let ge = g * s.e / s.rho;
        Mat::from_rows(&[
            &[T::zero(), one, T::zero()],
            &[(g - three) * half * v2, (three - g) * v, g - one],
            &[(g - one) * v2 * v - ge * v, ge - three * (g - one) * half * v2, g * v],
        ])
    }

    fn source(&self, u: &StateVec<T>) -> StateVec<T> {
        StateVec::from_slice(&[T::zero(), -u[0], -u[1]])
    }

    fn potential(&self) -> Potential {
        self.potential
    }

    fn stationary_rhs(&self, u: &StateVec<T>, x: T) -> Result<StateVec<T>, ModelError> {
        self.admissible(u)?;
        resonance_guard(self.hyperbolicity_margin(u), self.max_wave_speed(u))?;
        let s = self.state(u);
        let g = s.gamma;
        let v = s.velocity();
        let c = s.sound_speed();
        let d = c * c - v * v;
        let hx = self.depth_dx(x);
        let k = (lit::<T>(3.0) - g) * lit(0.5);
        let g_rho = -s.rho / d * hx;
        let g_e = -s.rho / (g - T::one()) * (T::one() + k * v * v / d) * hx;
        Ok(StateVec::from_slice(&[g_rho, T::zero(), g_e]))
    }

    /// Full `3 x 3` Jacobian of `G`, written through `D = c² − u²` as a
    /// function of the conserved variables.
    fn stationary_jacobian(&self, u: &StateVec<T>, x: T) -> Result<Mat<T>, ModelError> {
        self.admissible(u)?;
        resonance_guard(self.hyperbolicity_margin(u), self.max_wave_speed(u))?;
        let s = self.state(u);
        let (rho, q, e, g) = (s.rho, s.q, s.e, s.gamma);
        let one = T::one();
        let two = lit::<T>(2.0);
        let hx = self.depth_dx(x);
        let a = g * (g - one);
        let b = a * lit(0.5) + one;
        let k = (lit::<T>(3.0) - g) * lit(0.5);
        let v = q / rho;
        let d = a * e / rho - b * v * v;
        let d2 = d * d;
        let d_rho = (-a * e / rho + two * b * v * v) / rho;
        let d_e = a / rho;
        let d_q = -two * b * v / rho;

        let grho_rho = -hx * (d - rho * d_rho) / d2;
        let grho_q = hx * rho * d_q / d2;
        let grho_e = hx * rho * d_e / d2;

        let q2 = q * q;
        let a_rho = one - k * q2 / (rho * rho * d) - k * q2 * d_rho / (rho * d2);
        let a_q = two * k * q / (rho * d) - k * q2 * d_q / (rho * d2);
        let a_e = -k * q2 * d_e / (rho * d2);
        let f = -hx / (g - one);
        Ok(Mat::from_rows(&[
            &[grho_rho, grho_q, grho_e],
            &[T::zero(), T::zero(), T::zero()],
            &[f * a_rho, f * a_q, f * a_e],
        ]))
    }

    fn max_wave_speed(&self, u: &StateVec<T>) -> T {
        let s = self.state(u);
        s.velocity().abs() + s.sound_speed()
    }

    /// `min |u ± c|`; the contact speed `u` does not enter `G`.
    fn hyperbolicity_margin(&self, u: &StateVec<T>) -> T {
        let s = self.state(u);
        (s.velocity().abs() - s.sound_speed()).abs()
    }

    fn admissible(&self, u: &StateVec<T>) -> Result<(), ModelError> {
        if !u.is_finite() || !(u[0] > T::zero()) {
            return Err(ModelError::InvalidState(format!("Euler needs rho > 0, got {u:?}")));
        }
        if !(self.state(u).pressure() > T::zero()) {
            return Err(ModelError::InvalidState(format!("Euler needs p > 0, got {u:?}")));
        }
        Ok(())
    }

    fn invariant_components(&self) -> &'static [usize] {
        &[1]
    }
}
