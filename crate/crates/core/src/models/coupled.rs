use super::{resonance_guard, AverageKind, BalanceLaw, ModelError, Potential, StationaryProfile};
use crate::grid::CellLayout;
use crate::scalar::{lit, Real};
use crate::state::{Mat, StateVec};

/// Two Burgers equations coupled through quadratic sources; the stationary
/// ODE is the linear system `U' = [[2, 1], [-1, 3]] U`.
#[derive(Clone, Copy, Debug)]
pub struct CoupledBurgers {
    average: AverageKind,
}

pub fn coupled_burgers_model() -> CoupledBurgers {
    CoupledBurgers { average: AverageKind::ExactIntegral }
}

impl CoupledBurgers {
    /// Selects how the closed-form equilibrium matches the cell average.
    pub fn with_average(mut self, average: AverageKind) -> Self {
        self.average = average;
        self
    }
}

fn omega<T: Real>() -> T {
    lit::<T>(3.0).sqrt() * lit(0.5)
}

/// General stationary solution with coefficients `(a, b)`.
#[derive(Clone, Copy, Debug)]
pub struct CoupledProfile<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> CoupledProfile<T> {
    fn components(&self, x: T) -> (T, T) {
        let w = omega::<T>();
        let e = (lit::<T>(2.5) * x).exp();
        let (s, c) = (w * x).sin_cos();
        let half = lit::<T>(0.5);
        let u1 = e * (self.a * c + self.b * s);
        let u2 = e * ((self.a * half + w * self.b) * c + (-w * self.a + self.b * half) * s);
        (u1, u2)
    }
}

/// Antiderivatives of `e^{5x/2} cos(ωx)` and `e^{5x/2} sin(ωx)`.
fn exp_trig_primitives<T: Real>(x: T) -> (T, T) {
    let al = lit::<T>(2.5);
    let w = omega::<T>();
    let e = (al * x).exp();
    let (s, c) = (w * x).sin_cos();
    let k = al * al + w * w;
    (e * (al * c + w * s) / k, e * (al * s - w * c) / k)
}

impl<T: Real> StationaryProfile<T> for CoupledProfile<T> {
    fn eval(&self, x: T) -> Result<StateVec<T>, ModelError> {
        let (u1, u2) = self.components(x);
        Ok(StateVec::from_slice(&[u1, u2]))
    }

    fn exact_average(&self, xl: T, xr: T) -> Option<StateVec<T>> {
        let (cr, sr) = exp_trig_primitives(xr);
        let (cl, sl) = exp_trig_primitives(xl);
        let (ic, is) = ((cr - cl) / (xr - xl), (sr - sl) / (xr - xl));
        let w = omega::<T>();
        let half = lit::<T>(0.5);
        let u1 = self.a * ic + self.b * is;
        let u2 = (self.a * half + w * self.b) * ic + (-w * self.a + self.b * half) * is;
        Some(StateVec::from_slice(&[u1, u2]))
    }
}

/// Coefficients of the stationary solution whose exact mean over
/// `[xl, xl + dx]` is `(u1, u2)`.
pub(crate) fn exact_average_coefficients<T: Real>(xl: T, dx: T, u1: T, u2: T) -> (T, T) {
    let w = omega::<T>();
    let s3 = lit::<T>(3.0).sqrt();
    let three = lit::<T>(3.0);
    let xr = xl + dx;
    let e_half = (lit::<T>(2.5) * dx).exp();
    let denom = (lit::<T>(2.5) * xl).exp()
        * ((lit::<T>(5.0) * dx).exp() + T::one() - lit::<T>(2.0) * e_half * (w * dx).cos());
    let ds = e_half * (w * xr).sin() - (w * xl).sin();
    let dc = e_half * (w * xr).cos() - (w * xl).cos();
    let f = dx / three / denom;
    let a = f * (s3 * (lit::<T>(4.0) * u1 - lit::<T>(5.0) * u2) * ds + three * (lit::<T>(2.0) * u1 + u2) * dc);
    let b = f * (three * (lit::<T>(2.0) * u1 + u2) * ds + s3 * (lit::<T>(5.0) * u2 - lit::<T>(4.0) * u1) * dc);
    (a, b)
}

impl<T: Real> BalanceLaw<T> for CoupledBurgers {
    fn name(&self) -> &'static str {
        "coupled_burgers"
    }

    fn n_vars(&self) -> usize {
        2
    }

    fn component_names(&self) -> &'static [&'static str] {
        &["u1", "u2"]
    }

    fn flux(&self, u: &StateVec<T>) -> StateVec<T> {
        let h = lit::<T>(0.5);
        StateVec::from_slice(&[u[0] * u[0] * h, u[1] * u[1] * h])
    }

    fn flux_jacobian(&self, u: &StateVec<T>) -> Mat<T> {
        Mat::from_rows(&[&[u[0], T::zero()], &[T::zero(), u[1]]])
    }

    fn source(&self, u: &StateVec<T>) -> StateVec<T> {
        let (a, b) = (u[0], u[1]);
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        StateVec::from_slice(&[two * a * a + a * b, -a * b + three * b * b])
    }

    fn potential(&self) -> Potential {
        Potential::Identity
    }

    fn stationary_rhs(&self, u: &StateVec<T>, _x: T) -> Result<StateVec<T>, ModelError> {
        resonance_guard(self.hyperbolicity_margin(u), self.max_wave_speed(u))?;
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        Ok(StateVec::from_slice(&[two * u[0] + u[1], -u[0] + three * u[1]]))
    }

    fn stationary_jacobian(&self, u: &StateVec<T>, _x: T) -> Result<Mat<T>, ModelError> {
        resonance_guard(self.hyperbolicity_margin(u), self.max_wave_speed(u))?;
        Ok(Mat::from_f64(&[&[2.0, 1.0], &[-1.0, 3.0]]))
    }

    fn max_wave_speed(&self, u: &StateVec<T>) -> T {
        u[0].abs().max(u[1].abs())
    }

    fn hyperbolicity_margin(&self, u: &StateVec<T>) -> T {
        u[0].abs().min(u[1].abs())
    }

    fn has_closed_form(&self) -> bool {
        true
    }

    fn closed_form_average(&self) -> AverageKind {
        self.average
    }

    fn closed_form_equilibrium(
        &self,
        cell: &CellLayout<'_, T>,
        w: &StateVec<T>,
    ) -> Option<Result<Box<dyn StationaryProfile<T>>, ModelError>> {
        let (a, b) = match self.average {
            AverageKind::ExactIntegral => exact_average_coefficients(cell.x_left(), cell.dx(), w[0], w[1]),
            AverageKind::Quadrature => {
                // the average is linear in (a, b): solve the 2x2 system
                let col = |p: CoupledProfile<T>| {
                    let mut acc = StateVec::zeros(2);
                    for (l, al) in cell.weights().iter().enumerate() {
                        let (u1, u2) = p.components(cell.quad_node(l));
                        acc += StateVec::from_slice(&[u1, u2]) * *al;
                    }
                    acc
                };
                let m = Mat::from_columns(&[
                    col(CoupledProfile { a: T::one(), b: T::zero() }),
                    col(CoupledProfile { a: T::zero(), b: T::one() }),
                ]);
                match m.solve(w) {
                    Some(c) => (c[0], c[1]),
                    None => {
                        return Some(Err(ModelError::NoStationarySolution(
                            "singular quadrature average map".into(),
                        )))
                    }
                }
            }
        };
        Some(Ok(Box::new(CoupledProfile { a, b })))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_layout, Grid, QuadratureRule};
    use crate::models::testing::{definition_defect, fd_jacobian};

    #[test]
    fn rhs_and_gradient() {
        let m = coupled_burgers_model();
        let u = StateVec::from_f64(&[1.0, 1.0]);
        let g = BalanceLaw::<f64>::stationary_rhs(&m, &u, 0.0).unwrap();
        assert_eq!(g.as_slice(), &[3.0, 2.0]);
        let j = BalanceLaw::<f64>::stationary_jacobian(&m, &StateVec::from_f64(&[-0.4, 7.0]), 3.0).unwrap();
        assert_eq!(j, Mat::from_f64(&[&[2.0, 1.0], &[-1.0, 3.0]]));
        let fd = fd_jacobian(&m, &u, 0.0, 1e-6);
        assert!((fd[(1, 0)] + 1.0).abs() < 1e-8 && (fd[(0, 1)] - 1.0).abs() < 1e-8);
        assert!(definition_defect(&m, &StateVec::from_f64(&[0.7, -1.3]), 0.2) < 1e-14);
    }

    #[test]
    fn resonance_on_zero_component() {
        let m = coupled_burgers_model();
        let r = BalanceLaw::<f64>::stationary_rhs(&m, &StateVec::from_f64(&[0.0, 1.0]), 0.0);
        assert!(matches!(r, Err(ModelError::Resonance { .. })));
    }

    #[test]
    fn profile_solves_the_ode() {
        let p = CoupledProfile { a: 1.0, b: 3f64.sqrt() / 3.0 };
        let h = 1e-5;
        for x in [-1.0, -0.2, 0.6] {
            let d = (p.eval(x + h).unwrap() - p.eval(x - h).unwrap()) * (0.5 / h);
            let u = p.eval(x).unwrap();
            let g = StateVec::from_slice(&[2.0 * u[0] + u[1], -u[0] + 3.0 * u[1]]);
            assert!((d - g).norm_inf() < 1e-8);
        }
        // second component of this particular solution
        let x: f64 = 0.4;
        let w = 3f64.sqrt() / 2.0;
        let expect = (2.5 * x).exp() * ((w * x).cos() - 3f64.sqrt() / 3.0 * (w * x).sin());
        assert!((p.eval(x).unwrap()[1] - expect).abs() < 1e-14);
    }

    #[test]
    fn coefficients_reproduce_exact_means() {
        // Simpson with many panels as an independent integrator
        fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            let n = 2000;
            let h = (b - a) / n as f64;
            let mut s = f(a) + f(b);
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(a + k as f64 * h);
            }
            s * h / 3.0
        }
        for (xl, dx, u1, u2) in [(-1.0, 0.02, 1.0, 1.0), (0.3, 0.1, 0.5, -2.0), (0.9, 0.05, 3.0, 2.0)] {
            let (a, b) = exact_average_coefficients(xl, dx, u1, u2);
            let p = CoupledProfile { a, b };
            let m1 = simpson(|x| p.eval(x).unwrap()[0], xl, xl + dx) / dx;
            let m2 = simpson(|x| p.eval(x).unwrap()[1], xl, xl + dx) / dx;
            assert!((m1 - u1).abs() < 1e-12 * u1.abs().max(1.0), "{m1} vs {u1}");
            assert!((m2 - u2).abs() < 1e-12 * u2.abs().max(1.0), "{m2} vs {u2}");
            let ex = p.exact_average(xl, xl + dx).unwrap();
            assert!((ex[0] - u1).abs() < 1e-12 && (ex[1] - u2).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_variant_matches_quadrature_average() {
        let grid = Grid::new(-1.0, 1.0, 50).unwrap();
        let lay = build_layout(&grid, QuadratureRule::Gauss2, 1).unwrap();
        let c = lay.cell(17);
        let m = coupled_burgers_model().with_average(AverageKind::Quadrature);
        let w = StateVec::from_f64(&[1.2, 0.8]);
        let p = m.closed_form_equilibrium(&c, &w).unwrap().unwrap();
        let mut avg = StateVec::zeros(2);
        for l in 0..2 {
            avg += p.eval(c.quad_node(l)).unwrap() * 0.5;
        }
        assert!((avg - w).norm_inf() < 1e-14);
    }
}
