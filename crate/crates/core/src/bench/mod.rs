//! Test scenarios, initial conditions, error metrics and convergence
//! studies.

mod ic;
mod metrics;
mod output;
mod reference;

pub use ic::{build_ic, exact_ic, lake_at_rest_ic, perturbed_ic, stationary_ic, sw_implicit_ic};
pub use metrics::{convergence_orders, l1_error, restrict};
pub use output::{write_errors_table, write_run_log, write_snapshot};
pub use reference::{reference_averages, ReferenceCache};

use std::sync::Arc;

use rayon::prelude::*;

use crate::config::{BoundarySpec, Scheme, SchemeSpec, SimulationConfig};
use crate::grid::Grid;
use crate::models::{model_by_name, BalanceLaw, FlowRegime, ModelParams, Potential};
use crate::scalar::Real;
use crate::solver::{NewtonStats, RunResult, Solver};
use crate::state::StateVec;
use crate::Error;

/// Closed-form stationary solutions used as initial data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExactProfile {
    /// `u = e^x`
    Exp,
    /// Coupled Burgers solution with coefficients `(a, b)`.
    Coupled { a: f64, b: f64 },
}

/// Gaussian `amplitude · e^{−beta (x − center)²}` added to some components.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub amplitude: f64,
    pub beta: f64,
    pub center: f64,
    pub components: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IcSpec {
    /// Quadrature averages of a closed-form stationary solution.
    Exact(ExactProfile),
    /// RK4 stationary solution through `state` at the domain end `x0`.
    Stationary { x0: f64, state: Vec<f64> },
    /// Shallow-water stationary solution `q = c1`, energy `c2`.
    SwImplicit { c1: f64, c2: f64, regime: FlowRegime },
    /// Shallow water with `h = H(x)`, `q = 0`.
    LakeAtRest,
    Perturbed { base: Box<IcSpec>, bump: Bump },
}

impl IcSpec {
    /// The initial condition without its perturbation.
    pub fn base(&self) -> &IcSpec {
        match self {
            IcSpec::Perturbed { base, .. } => base.base(),
            other => other,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceSpec {
    /// Unperturbed initial averages on the run's own layout.
    Stationary,
    /// RK4 stationary solution through `state` at the domain end `x0`.
    StationaryThrough { x0: f64, state: Vec<f64> },
    /// First-order DWBM run on a fine mesh, restricted to the run's grid.
    FineMesh { cells: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub title: &'static str,
    pub model: &'static str,
    pub params: ModelParams,
    pub domain: (f64, f64),
    pub t_end: f64,
    pub cfl: f64,
    pub left_bc: BoundarySpec,
    pub right_bc: BoundarySpec,
    pub ic: IcSpec,
    pub reference: ReferenceSpec,
    pub default_np: usize,
    /// Newton Jacobian reuse; `0` freezes it after the first iteration.
    pub default_k: usize,
    pub output_times: Vec<f64>,
}

pub const SCENARIO_NAMES: [&str; 10] = ["1.1", "1.2", "2.1", "2.2", "3.1", "4.1", "4.1i", "4.2", "5.1", "5.2"];

fn bump_at_minus_half(components: Vec<usize>) -> Bump {
    Bump { amplitude: 0.3, beta: 200.0, center: -0.5, components }
}

/// Scenario registry.
pub fn scenario(name: &str) -> Option<Scenario> {
    let free = BoundarySpec::Free;
    let params = ModelParams::default();
    let s = match name {
        "1.1" | "1.2" => {
            let base = IcSpec::Exact(ExactProfile::Exp);
            let perturbed = name == "1.2";
            Scenario {
                name: if perturbed { "1.2" } else { "1.1" },
                title: if perturbed { "Burgers I, perturbed exponential" } else { "Burgers I, stationary e^x" },
                model: "burgers1",
                params,
                domain: (-1.0, 1.0),
                t_end: if perturbed { 10.0 } else { 5.0 },
                cfl: 0.9,
                left_bc: BoundarySpec::DirichletState(vec![(-1f64).exp()]),
                right_bc: free,
                ic: if perturbed {
                    IcSpec::Perturbed { base: Box::new(base), bump: bump_at_minus_half(vec![0]) }
                } else {
                    base
                },
                reference: ReferenceSpec::Stationary,
                default_np: if perturbed { 1 } else { 3 },
                default_k: 1,
                output_times: if perturbed { vec![0.5, 1.0] } else { vec![] },
            }
        }
        "2.1" | "2.2" => {
            let base = IcSpec::Stationary { x0: -1.0, state: vec![2.0] };
            let perturbed = name == "2.2";
            Scenario {
                name: if perturbed { "2.2" } else { "2.1" },
                title: if perturbed { "Burgers II, perturbed stationary" } else { "Burgers II, stationary u(-1) = 2" },
                model: "burgers2",
                params,
                domain: (-1.0, 1.0),
                t_end: 5.0,
                cfl: 0.9,
                left_bc: BoundarySpec::DirichletState(vec![2.0]),
                right_bc: free,
                ic: if perturbed {
                    IcSpec::Perturbed { base: Box::new(base), bump: bump_at_minus_half(vec![0]) }
                } else {
                    base
                },
                reference: if perturbed { ReferenceSpec::FineMesh { cells: 12800 } } else { ReferenceSpec::Stationary },
                default_np: 1,
                default_k: 1,
                output_times: if perturbed { vec![0.3] } else { vec![] },
            }
        }
        "3.1" => {
            let (a, b) = (1.0, 3f64.sqrt() / 3.0);
            let u0 = crate::models::CoupledProfile { a, b };
            let left = crate::models::StationaryProfile::eval(&u0, -1.0).unwrap().to_f64_vec();
            Scenario {
                name: "3.1",
                title: "Coupled Burgers, stationary",
                model: "coupled_burgers",
                params,
                domain: (-1.0, 1.0),
                t_end: 5.0,
                cfl: 0.9,
                left_bc: BoundarySpec::DirichletState(left),
                right_bc: free,
                ic: IcSpec::Exact(ExactProfile::Coupled { a, b }),
                reference: ReferenceSpec::Stationary,
                default_np: 3,
                default_k: 1,
                output_times: vec![],
            }
        }
        "4.1" | "4.1i" => {
            let p = ModelParams { potential: Potential::CosineBump, ..params };
            let implicit = name == "4.1i";
            let (h0, q0) = (2.0, 3.5);
            let c2 = q0 * q0 / (2.0 * h0 * h0) + p.gravity * h0;
            Scenario {
                name: if implicit { "4.1i" } else { "4.1" },
                title: if implicit {
                    "Shallow water, subcritical over a bump (implicit initial data)"
                } else {
                    "Shallow water, subcritical over a bump"
                },
                model: "shallow_water",
                params: p,
                domain: (0.0, 3.0),
                t_end: 5.0,
                cfl: 0.9,
                left_bc: BoundarySpec::DirichletState(vec![h0, q0]),
                right_bc: free,
                ic: if implicit {
                    IcSpec::SwImplicit { c1: q0, c2, regime: FlowRegime::Subcritical }
                } else {
                    IcSpec::Stationary { x0: 0.0, state: vec![h0, q0] }
                },
                reference: ReferenceSpec::Stationary,
                default_np: 1,
                default_k: 1,
                output_times: vec![],
            }
        }
        "4.2" => Scenario {
            name: "4.2",
            title: "Shallow water, convergence to a moving steady state",
            model: "shallow_water",
            params: ModelParams { potential: Potential::GaussianDip, ..params },
            domain: (-5.0, 5.0),
            t_end: 5000.0,
            cfl: 0.5,
            left_bc: BoundarySpec::DirichletComponents(vec![(1, 0.1)]),
            right_bc: BoundarySpec::DirichletComponents(vec![(0, 1.0)]),
            ic: IcSpec::LakeAtRest,
            reference: ReferenceSpec::StationaryThrough { x0: 5.0, state: vec![1.0, 0.1] },
            default_np: 1,
            default_k: 1,
            output_times: vec![100.0, 1000.0],
        },
        "5.1" | "5.2" => {
            let base = IcSpec::Stationary { x0: -1.0, state: vec![1.0, 10.0, 52.0] };
            let perturbed = name == "5.2";
            Scenario {
                name: if perturbed { "5.2" } else { "5.1" },
                title: if perturbed { "Euler with gravity, perturbed density" } else { "Euler with gravity, supersonic stationary" },
                model: "euler_gravity",
                params,
                domain: (-1.0, 1.0),
                t_end: 5.0,
                cfl: 0.9,
                left_bc: BoundarySpec::DirichletState(vec![1.0, 10.0, 52.0]),
                right_bc: free,
                ic: if perturbed {
                    IcSpec::Perturbed { base: Box::new(base), bump: bump_at_minus_half(vec![0]) }
                } else {
                    base
                },
                reference: if perturbed { ReferenceSpec::FineMesh { cells: 6400 } } else { ReferenceSpec::Stationary },
                default_np: 1,
                default_k: 0,
                output_times: if perturbed { vec![0.05] } else { vec![] },
            }
        }
        _ => return None,
    };
    Some(s)
}

pub fn all_scenarios() -> Vec<Scenario> {
    SCENARIO_NAMES.iter().map(|n| scenario(n).unwrap()).collect()
}

impl Scenario {
    pub fn model<T: Real>(&self) -> Arc<dyn BalanceLaw<T>> {
        model_by_name(self.model, self.params).expect("registered model")
    }

    pub fn grid<T: Real>(&self, cells: usize) -> Result<Grid<T>, Error> {
        Grid::new(T::from_f64(self.domain.0).unwrap(), T::from_f64(self.domain.1).unwrap(), cells)
    }

    /// Scheme settings with the scenario's defaults.
    pub fn scheme_spec(&self, scheme: Scheme, order: u8) -> SchemeSpec {
        let cfg = SimulationConfig { scheme, order, ..Default::default() };
        self.resolve(&cfg).spec
    }

    /// Merges a configuration with the scenario defaults.
    pub fn resolve(&self, cfg: &SimulationConfig) -> RunSetup {
        let mut spec = cfg.scheme_spec(self.default_np);
        spec.newton = cfg.newton(self.default_k);
        RunSetup {
            spec,
            cells: cfg.cells,
            cfl: cfg.cfl.unwrap_or(self.cfl),
            t_end: cfg.t_end.unwrap_or(self.t_end),
            output_times: if cfg.output_times.is_empty() { self.output_times.clone() } else { cfg.output_times.clone() },
            left_bc: cfg.left_bc.clone().unwrap_or_else(|| self.left_bc.clone()),
            right_bc: cfg.right_bc.clone().unwrap_or_else(|| self.right_bc.clone()),
        }
    }

    /// Default run settings for a scheme, order and mesh.
    pub fn setup(&self, scheme: Scheme, order: u8, cells: usize) -> RunSetup {
        let cfg = SimulationConfig { scheme, order, cells, ..Default::default() };
        self.resolve(&cfg)
    }

    pub fn solver<T: Real>(&self, setup: &RunSetup) -> Result<Solver<T>, Error> {
        Solver::new(self.model(), &self.grid(setup.cells)?, setup.spec, &setup.left_bc, &setup.right_bc)
    }
}

/// Everything needed for one run of a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSetup {
    pub spec: SchemeSpec,
    pub cells: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub output_times: Vec<f64>,
    pub left_bc: BoundarySpec,
    pub right_bc: BoundarySpec,
}

pub struct ScenarioRun<T: Real> {
    pub solver: Solver<T>,
    pub initial: Vec<StateVec<T>>,
    pub result: RunResult<T>,
}

pub fn run_scenario<T: Real>(scenario: &Scenario, setup: &RunSetup) -> Result<ScenarioRun<T>, Error> {
    let solver = scenario.solver::<T>(setup)?;
    let initial = build_ic(scenario, solver.model(), solver.layout())?;
    let result = solver.run(initial.clone(), setup.t_end, setup.cfl, &setup.output_times)?;
    Ok(ScenarioRun { solver, initial, result })
}

/// One mesh of a convergence study.
#[derive(Clone, Debug)]
pub struct ErrorRow {
    pub cells: usize,
    /// L1 error per component, empty if the run failed.
    pub errors: Vec<f64>,
    /// Order against the previous mesh, per component.
    pub orders: Vec<Option<f64>>,
    pub wall_ms: f64,
    pub stats: NewtonStats,
    pub failure: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub scenario: String,
    pub label: String,
    pub components: Vec<String>,
    pub rows: Vec<ErrorRow>,
}

/// Runs every mesh, then computes L1 errors and orders.
pub fn convergence_table(
    scenario: &Scenario,
    scheme: Scheme,
    order: u8,
    meshes: &[usize],
    base: &SimulationConfig,
    cache: Option<&ReferenceCache>,
) -> ErrorReport {
    let model = scenario.model::<f64>();
    let mut rows: Vec<ErrorRow> = meshes
        .par_iter()
        .map(|&cells| {
            let cfg = SimulationConfig { scheme, order, cells, ..base.clone() };
            let setup = scenario.resolve(&cfg);
            let out = run_scenario::<f64>(scenario, &setup).and_then(|run| {
                let reference = reference_averages(scenario, run.solver.layout(), cache)?;
                let e = l1_error(run.result.final_state(), &reference, run.solver.grid().dx())?;
                Ok((e, run.result.wall_ms, run.result.stats))
            });
            match out {
                Ok((errors, wall_ms, stats)) => {
                    ErrorRow { cells, errors, orders: Vec::new(), wall_ms, stats, failure: None }
                }
                Err(e) => ErrorRow {
                    cells,
                    errors: Vec::new(),
                    orders: Vec::new(),
                    wall_ms: 0.0,
                    stats: NewtonStats::default(),
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();
    let errs: Vec<(usize, Vec<f64>)> = rows.iter().map(|r| (r.cells, r.errors.clone())).collect();
    for (row, ord) in rows.iter_mut().zip(convergence_orders(&errs)) {
        row.orders = ord;
    }
    ErrorReport {
        scenario: scenario.name.into(),
        label: scheme.label(order),
        components: model.component_names().iter().map(|s| s.to_string()).collect(),
        rows,
    }
}
