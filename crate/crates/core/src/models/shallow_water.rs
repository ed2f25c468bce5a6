use super::{resonance_guard, AverageKind, BalanceLaw, ModelError, Potential, StationaryProfile};
use crate::grid::CellLayout;
use crate::scalar::{lit, Real};
use crate::state::{Mat, StateVec};

/// Shallow water with `U = (h, q)`, `S(U) = (0, g h)`.
#[derive(Clone, Copy, Debug)]
pub struct ShallowWater {
    g: f64,
    potential: Potential,
}

pub fn shallow_water_model(g: f64) -> ShallowWater {
    ShallowWater { g, potential: Potential::Flat }
}

impl ShallowWater {
    pub fn with_potential(mut self, potential: Potential) -> Self {
        self.potential = potential;
        self
    }

    pub fn gravity(&self) -> f64 {
        self.g
    }
}

/// Physical view of a shallow-water state.
#[derive(Clone, Copy, Debug)]
pub struct ShallowWaterState<T> {
    pub h: T,
    pub q: T,
    pub g: T,
}

impl<T: Real> ShallowWaterState<T> {
    pub fn new(u: &StateVec<T>, g: T) -> Self {
        Self { h: u[0], q: u[1], g }
    }

    pub fn velocity(&self) -> T {
        self.q / self.h
    }

    pub fn celerity(&self) -> T {
        (self.g * self.h).sqrt()
    }

    pub fn froude(&self) -> T {
        self.velocity().abs() / self.celerity()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowRegime {
    Subcritical,
    Supercritical,
}

impl FlowRegime {
    pub fn of<T: Real>(h: T, q: T, g: T) -> Self {
        if (ShallowWaterState { h, q, g }).froude() < T::one() {
            FlowRegime::Subcritical
        } else {
            FlowRegime::Supercritical
        }
    }
}

/// Root `h > 0` of `q²/(2h²) + g h = e` on the requested branch, or `None`
/// if the energy level lies below the critical one.
pub fn solve_energy_cubic<T: Real>(q: T, e: T, g: T, regime: FlowRegime) -> Option<T> {
    let half = lit::<T>(0.5);
    if q == T::zero() {
        return match regime {
            FlowRegime::Subcritical if e > T::zero() => Some(e / g),
            _ => None,
        };
    }
    let q2 = q * q;
    let phi = |h: T| q2 * half / (h * h) + g * h;
    let dphi = |h: T| g - q2 / (h * h * h);
    let hc = (q2 / g).cbrt();
    let emin = phi(hc);
    if !(e >= emin) {
        return None;
    }
    let (mut lo, mut hi) = match regime {
        FlowRegime::Subcritical => (hc, e / g),
        FlowRegime::Supercritical => (q.abs() / (lit::<T>(2.0) * e).sqrt(), hc),
    };
    if e == emin {
        return Some(hc);
    }
    // residual sign convention: r(lo) and r(hi) have opposite signs
    let r = |h: T| phi(h) - e;
    let mut h = match regime {
        FlowRegime::Subcritical => hi,
        FlowRegime::Supercritical => lo,
    };
    for _ in 0..200 {
        let rh = r(h);
        if rh == T::zero() {
            return Some(h);
        }
        let increasing = regime == FlowRegime::Subcritical;
        if (rh > T::zero()) == increasing {
            hi = h;
        } else {
            lo = h;
        }
        let mut next = h - rh / dphi(h);
        if !(next > lo && next < hi) {
            next = (lo + hi) * half;
        }
        if (next - h).abs() <= lit::<T>(4.0) * T::epsilon() * h {
            return Some(next);
        }
        h = next;
    }
    Some(h)
}

/// `h(x)` on the stationary branch `q = C1`, `q²/(2h²) + g h − g H = C2`.
pub fn sw_implicit_sample<T: Real>(
    x: T,
    c1: T,
    c2: T,
    g: T,
    potential: Potential,
    regime: FlowRegime,
) -> Option<StateVec<T>> {
    let h = solve_energy_cubic(c1, c2 + g * potential.value(x), g, regime)?;
    Some(StateVec::from_slice(&[h, c1]))
}

/// Stationary solution given implicitly by its invariants.
#[derive(Clone, Copy, Debug)]
pub struct ImplicitSwProfile<T> {
    pub q: T,
    pub c2: T,
    pub g: T,
    pub potential: Potential,
    pub regime: FlowRegime,
}

impl<T: Real> StationaryProfile<T> for ImplicitSwProfile<T> {
    fn eval(&self, x: T) -> Result<StateVec<T>, ModelError> {
        sw_implicit_sample(x, self.q, self.c2, self.g, self.potential, self.regime)
            .ok_or_else(|| ModelError::NoStationarySolution(format!("no {:?} root at x = {x}", self.regime)))
    }
}

impl<T: Real> BalanceLaw<T> for ShallowWater {
    fn name(&self) -> &'static str {
        "shallow_water"
    }

    fn n_vars(&self) -> usize {
        2
    }

    fn component_names(&self) -> &'static [&'static str] {
        &["h", "q"]
    }

    fn flux(&self, u: &StateVec<T>) -> StateVec<T> {
        let (h, q) = (u[0], u[1]);
        let g = lit::<T>(self.g);
        StateVec::from_slice(&[q, q * q / h + g * h * h * lit(0.5)])
    }

    fn flux_jacobian(&self, u: &StateVec<T>) -> Mat<T> {
        let s = ShallowWaterState::new(u, lit(self.g));
        let v = s.velocity();
        Mat::from_rows(&[&[T::zero(), T::one()], &[s.g * s.h - v * v, lit::<T>(2.0) * v]])
    }

    fn source(&self, u: &StateVec<T>) -> StateVec<T> {
        StateVec::from_slice(&[T::zero(), lit::<T>(self.g) * u[0]])
    }

    fn potential(&self) -> Potential {
        self.potential
    }

    fn stationary_rhs(&self, u: &StateVec<T>, x: T) -> Result<StateVec<T>, ModelError> {
        self.admissible(u)?;
        resonance_guard(self.hyperbolicity_margin(u), self.max_wave_speed(u))?;
        let s = ShallowWaterState::new(u, lit(self.g));
        let v = s.velocity();
        let hx = self.depth_dx(x);
        Ok(StateVec::from_slice(&[s.g * s.h * hx / (s.g * s.h - v * v), T::zero()]))
    }

    fn stationary_jacobian(&self, u: &StateVec<T>, x: T) -> Result<Mat<T>, ModelError> {
        self.admissible(u)?;
        resonance_guard(self.hyperbolicity_margin(u), self.max_wave_speed(u))?;
        let s = ShallowWaterState::new(u, lit(self.g));
        let v = s.velocity();
        let hx = self.depth_dx(x);
        let d = s.g * s.h - v * v;
        let d2 = d * d;
        let a = -lit::<T>(3.0) * s.g * v * v * hx / d2;
        let b = lit::<T>(2.0) * s.g * v * hx / d2;
        Ok(Mat::from_rows(&[&[a, b], &[T::zero(), T::zero()]]))
    }

    fn max_wave_speed(&self, u: &StateVec<T>) -> T {
        let s = ShallowWaterState::new(u, lit(self.g));
        s.velocity().abs() + s.celerity()
    }

    fn hyperbolicity_margin(&self, u: &StateVec<T>) -> T {
        let s = ShallowWaterState::new(u, lit(self.g));
        (s.velocity().abs() - s.celerity()).abs()
    }

    fn admissible(&self, u: &StateVec<T>) -> Result<(), ModelError> {
        if !u.is_finite() || !(u[0] > T::zero()) {
            return Err(ModelError::InvalidState(format!("shallow water needs h > 0, got {u:?}")));
        }
        Ok(())
    }

    fn invariant_components(&self) -> &'static [usize] {
        &[1]
    }

    fn has_closed_form(&self) -> bool {
        true
    }

    fn closed_form_average(&self) -> AverageKind {
        AverageKind::Quadrature
    }

    /// Picks the energy level `C2` so that the quadrature mean of `h` on the
    /// branch of `w` equals `w[0]`.
    fn closed_form_equilibrium(
        &self,
        cell: &CellLayout<'_, T>,
        w: &StateVec<T>,
    ) -> Option<Result<Box<dyn StationaryProfile<T>>, ModelError>> {
        Some(self.implicit_equilibrium(cell, w).map(|p| Box::new(p) as Box<dyn StationaryProfile<T>>))
    }
}

impl ShallowWater {
    fn implicit_equilibrium<T: Real>(
        &self,
        cell: &CellLayout<'_, T>,
        w: &StateVec<T>,
    ) -> Result<ImplicitSwProfile<T>, ModelError> {
        BalanceLaw::<T>::admissible(self, w)?;
        let g = lit::<T>(self.g);
        let (hbar, q) = (w[0], w[1]);
        let regime = FlowRegime::of(hbar, q, g);
        let nodes = cell.quad_nodes();
        let weights = cell.weights();
        let gh: Vec<T> = nodes.iter().map(|x| g * self.potential.value(*x)).collect();
        let profile = |c2: T| ImplicitSwProfile { q, c2, g, potential: self.potential, regime };
        // mean of h for a given energy level, with dh/dC2 = 1/φ'(h)
        let mean = |c2: T| -> Option<(T, T)> {
            let mut m = T::zero();
            let mut dm = T::zero();
            for (l, a) in weights.iter().enumerate() {
                let h = solve_energy_cubic(q, c2 + gh[l], g, regime)?;
                m += *a * h;
                dm += *a / (g - q * q / (h * h * h));
            }
            Some((m, dm))
        };
        let half = lit::<T>(0.5);
        let phi = |h: T| q * q * half / (h * h) + g * h;
        let ghmin = gh.iter().fold(T::infinity(), |a, b| a.min(*b));
        let c2_min = if q == T::zero() {
            -ghmin
        } else {
            let hc = (q * q / g).cbrt();
            phi(hc) - ghmin
        };
        let increasing = regime == FlowRegime::Subcritical;
        let target = |c2: T| mean(c2).map(|(m, dm)| (m - hbar, dm));
        let mut lo = c2_min;
        let fail = || ModelError::NoStationarySolution(format!("no {regime:?} stationary state with mean {hbar}"));
        if let Some((f_lo, _)) = target(lo) {
            if (f_lo > T::zero()) == increasing && f_lo != T::zero() {
                return Err(fail());
            }
        }
        // expand upward until the residual changes sign
        let mut step = (phi(hbar) - c2_min).abs().max(g * hbar).max(T::one());
        let mut hi = lo + step;
        let mut found = false;
        for _ in 0..200 {
            match target(hi) {
                Some((f, _)) if (f >= T::zero()) == increasing => {
                    found = true;
                    break;
                }
                Some(_) => {
                    lo = hi;
                    step = step + step;
                    hi = lo + step;
                }
                None => return Err(fail()),
            }
        }
        if !found {
            return Err(fail());
        }
        let mut c2 = phi(hbar) - gh.iter().zip(weights).fold(T::zero(), |a, (v, w)| a + *v * *w);
        if !(c2 > lo && c2 < hi) {
            c2 = (lo + hi) * half;
        }
        let tol = lit::<T>(4.0) * T::epsilon() * hbar;
        for _ in 0..200 {
            let (f, df) = match target(c2) {
                Some(v) => v,
                None => {
                    lo = c2;
                    c2 = (lo + hi) * half;
                    continue;
                }
            };
            if f.abs() <= tol {
                return Ok(profile(c2));
            }
            if (f > T::zero()) == increasing {
                hi = c2;
            } else {
                lo = c2;
            }
            let mut next = c2 - f / df;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = (lo + hi) * half;
            }
            if next == c2 {
                return Ok(profile(c2));
            }
            c2 = next;
        }
        Ok(profile(c2))
    }
}
