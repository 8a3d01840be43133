//! Structured-grid solvers for stationary minimum-time Hamilton-Jacobi-Bellman
//! equations, plus tools for checking when single-pass (Fast Marching-like)
//! methods reproduce the iterative solution.
//!
//! * [`grid`]: uniform square grids with ACC/CONS/FAR labels.
//! * [`problems`]: the HJB-A to HJB-E dynamics and control discretization.
//! * [`schemes`]: two- and three-point semi-Lagrangian local updates.
//! * [`solvers`]: ITM, FSM and the narrow-band methods FMM, SM, SFMM.
//! * [`verify`]: safe/exact node tests, SDM and DM, ISO diagnostics.
//! * [`bench`]: error metrics, reference caching and the experiment tables.

pub mod bench;
pub mod cli;
pub mod error;
pub mod grid;
pub mod problems;
pub mod schemes;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Bounds, Grid, NodeState, BIG};
pub use problems::{Catalog, ControlSet, Params, Problem, ProblemClass};
pub use schemes::{LocalUpdate, Scheme};
pub use solvers::{Method, SolverConfig, SolverReport};
pub use verify::ReferenceSolution;
