//! Simulation, estimation and asymptotic theory for two-parameter
//! reinforced random walks (generalized Pólya urns) with choice function
//! `f(i, j) = (c+i)^alpha / ((c+i)^alpha + (c+j)^alpha)`.

pub mod asymptotics;
pub mod bootstrap;
pub mod empirical;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod io;
pub mod model;
pub mod simulate;
pub mod triangular;

pub use error::{Error, Result};
pub use model::{CellMatrix2, ModelParams, OccupancyDistribution};
pub use simulate::{PathSet, Seed};
