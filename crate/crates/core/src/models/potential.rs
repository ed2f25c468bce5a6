use crate::scalar::{lit, Real};

/// Depth function / potential `H(x)` together with its analytic derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Potential {
    /// `H(x) = x`
    Identity,
    /// `H ≡ 0`
    Flat,
    /// `H(x) = -0.25 (1 + cos(5π(x + 0.5)))` on `[1.3, 1.7]`, zero elsewhere.
    CosineBump,
    /// `H(x) = 1 - exp(-x²) / 2`
    GaussianDip,
    /// `H(x) = slope * x`
    Linear { slope: f64 },
}

impl Potential {
    pub fn value<T: Real>(&self, x: T) -> T {
        match *self {
            Potential::Identity => x,
            Potential::Flat => T::zero(),
            Potential::CosineBump => {
                if x >= lit(1.3) && x <= lit(1.7) {
                    let arg = lit::<T>(5.0) * T::PI() * (x + lit(0.5));
                    lit::<T>(-0.25) * (T::one() + arg.cos())
                } else {
                    T::zero()
                }
            }
            Potential::GaussianDip => T::one() - (-x * x).exp() * lit(0.5),
            Potential::Linear { slope } => lit::<T>(slope) * x,
        }
    }

    pub fn derivative<T: Real>(&self, x: T) -> T {
        match *self {
            Potential::Identity => T::one(),
            Potential::Flat => T::zero(),
            Potential::CosineBump => {
                if x >= lit(1.3) && x <= lit(1.7) {
                    let k = lit::<T>(5.0) * T::PI();
                    lit::<T>(0.25) * k * (k * (x + lit(0.5))).sin()
                } else {
                    T::zero()
                }
            }
            Potential::GaussianDip => x * (-x * x).exp(),
            Potential::Linear { slope } => lit(slope),
        }
    }
}
