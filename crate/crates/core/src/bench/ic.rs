use super::{Bump, ExactProfile, IcSpec, Scenario};
use crate::grid::Layout;
use crate::integrate::{march_stationary, quad_average_values, Direction};
use crate::models::{
    sw_implicit_sample, BalanceLaw, CoupledProfile, ExpProfile, FlowRegime, Potential, StationaryProfile,
};
use crate::scalar::{lit, Real};
use crate::state::StateVec;
use crate::Error;

fn quad_avg<T: Real>(layout: &Layout<T>, i: isize, f: impl Fn(T) -> Result<StateVec<T>, Error>) -> Result<StateVec<T>, Error> {
    let c = layout.cell(i);
    let mut acc: Option<StateVec<T>> = None;
    for (x, a) in c.quad_nodes().into_iter().zip(c.weights()) {
        let v = f(x)? * *a;
        acc = Some(match acc {
            Some(s) => s + v,
            None => v,
        });
    }
    Ok(acc.expect("at least one node"))
}

/// Quadrature averages of a closed-form stationary solution.
pub fn exact_ic<T: Real>(profile: &dyn StationaryProfile<T>, layout: &Layout<T>) -> Result<Vec<StateVec<T>>, Error> {
    (0..layout.grid().n_cells() as isize).map(|i| quad_avg(layout, i, |x| Ok(profile.eval(x)?))).collect()
}

/// RK4 across the whole domain on the concatenated cell meshes, starting
/// from `state` at the left end (`from_left`) or the right end.
pub fn stationary_ic<T: Real>(
    model: &dyn BalanceLaw<T>,
    layout: &Layout<T>,
    state: StateVec<T>,
    from_left: bool,
) -> Result<Vec<StateVec<T>>, Error> {
    model.admissible(&state)?;
    let n = layout.grid().n_cells();
    let mut out = vec![state; n];
    let mut start = state;
    let order: Vec<usize> = if from_left { (0..n).collect() } else { (0..n).rev().collect() };
    for i in order {
        let c = layout.cell(i as isize);
        let dir = if from_left { Direction::Forward } else { Direction::Backward };
        let t = march_stationary(model, &c.state_nodes(), start, dir)
            .map_err(|e| Error::Config(format!("stationary initial data, cell {i}: {e}")))?;
        start = if from_left { t.last() } else { t.first() };
        out[i] = quad_average_values(t.values(), &c).map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(out)
}

/// Adds the quadrature average of a Gaussian bump to selected components.
pub fn perturbed_ic<T: Real>(base: &[StateVec<T>], layout: &Layout<T>, bump: &Bump) -> Vec<StateVec<T>> {
    let (amp, beta, x0) = (lit::<T>(bump.amplitude), lit::<T>(bump.beta), lit::<T>(bump.center));
    base.iter()
        .enumerate()
        .map(|(i, u)| {
            let c = layout.cell(i as isize);
            let mut b = T::zero();
            for (x, a) in c.quad_nodes().into_iter().zip(c.weights()) {
                b += *a * amp * (-beta * (x - x0) * (x - x0)).exp();
            }
            let mut v = *u;
            for &j in &bump.components {
                v[j] += b;
            }
            v
        })
        .collect()
}

/// Node-wise cubic solve on the chosen branch, then quadrature averaging.
pub fn sw_implicit_ic<T: Real>(
    layout: &Layout<T>,
    c1: f64,
    c2: f64,
    g: f64,
    potential: Potential,
    regime: FlowRegime,
) -> Result<Vec<StateVec<T>>, Error> {
    (0..layout.grid().n_cells() as isize)
        .map(|i| {
            quad_avg(layout, i, |x| {
                sw_implicit_sample(x, lit(c1), lit(c2), lit(g), potential, regime)
                    .ok_or_else(|| Error::Config(format!("no {regime:?} depth at x = {x}")))
            })
        })
        .collect()
}

/// `h = H(x)`, `q = 0`.
pub fn lake_at_rest_ic<T: Real>(layout: &Layout<T>, potential: Potential) -> Vec<StateVec<T>> {
    (0..layout.grid().n_cells() as isize)
        .map(|i| quad_avg(layout, i, |x| Ok(StateVec::from_slice(&[potential.value(x), T::zero()]))).unwrap())
        .collect()
}

/// Initial averages of a scenario on a layout.
pub fn build_ic<T: Real>(scenario: &Scenario, model: &dyn BalanceLaw<T>, layout: &Layout<T>) -> Result<Vec<StateVec<T>>, Error> {
    build_from_spec(&scenario.ic, scenario, model, layout)
}

pub(super) fn build_from_spec<T: Real>(
    spec: &IcSpec,
    scenario: &Scenario,
    model: &dyn BalanceLaw<T>,
    layout: &Layout<T>,
) -> Result<Vec<StateVec<T>>, Error> {
    match spec {
        IcSpec::Exact(ExactProfile::Exp) => exact_ic(&ExpProfile { c: T::one() }, layout),
        IcSpec::Exact(ExactProfile::Coupled { a, b }) => exact_ic(&CoupledProfile { a: lit::<T>(*a), b: lit(*b) }, layout),
        IcSpec::Stationary { x0, state } => stationary_through(scenario, model, layout, *x0, state),
        IcSpec::SwImplicit { c1, c2, regime } => {
            sw_implicit_ic(layout, *c1, *c2, scenario.params.gravity, scenario.params.potential, *regime)
        }
        IcSpec::LakeAtRest => Ok(lake_at_rest_ic(layout, scenario.params.potential)),
        IcSpec::Perturbed { base, bump } => {
            let b = build_from_spec(base, scenario, model, layout)?;
            Ok(perturbed_ic(&b, layout, bump))
        }
    }
}

pub(super) fn stationary_through<T: Real>(
    scenario: &Scenario,
    model: &dyn BalanceLaw<T>,
    layout: &Layout<T>,
    x0: f64,
    state: &[f64],
) -> Result<Vec<StateVec<T>>, Error> {
    let (a, b) = scenario.domain;
    let from_left = if x0 == a {
        true
    } else if x0 == b {
        false
    } else {
        return Err(Error::Config(format!("stationary data must start at a domain end, got x0 = {x0}")));
    };
    stationary_ic(model, layout, StateVec::from_f64(state), from_left)
}
