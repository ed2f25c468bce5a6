//! High-order well-balanced finite-volume schemes for one-dimensional
//! systems of balance laws `U_t + f(U)_x = S(U) H_x`.
//!
//! In every cell the reconstruction looks for the stationary solution whose
//! cell average equals the current one. That control problem is solved by
//! Newton's method with gradients from an adjoint ODE, so no closed form of
//! the stationary solutions is needed.

pub mod bench;
pub mod config;
pub mod equilibrium;
pub mod grid;
pub mod integrate;
pub mod models;
pub mod reconstruct;
pub mod scalar;
pub mod solver;
pub mod state;

pub use grid::{build_layout, CellLayout, Grid, Layout, QuadratureRule};
pub use models::{BalanceLaw, ModelError, Potential, StationaryProfile};
pub use scalar::Real;
pub use state::{Mat, StateVec};

pub type StateVecF64 = StateVec<f64>;
pub type StateVecF32 = StateVec<f32>;
pub type GridF64 = Grid<f64>;
pub type LayoutF64 = Layout<f64>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(solver::SolverError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
