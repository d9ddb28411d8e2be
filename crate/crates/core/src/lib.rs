//! Discrete micro-level heat conduction: the three-point lattice rule, the exact
//! modified-equation hierarchy it generates, solvers for every member of that
//! hierarchy, and the checks that compare them.

pub mod analysis;
pub mod error;
mod fft;
pub mod io;
pub mod lattice;
pub mod models;
pub mod opcalc;
pub mod rational;
pub mod solvers;

pub use analysis::{
    compare_fields, convergence_study, front_speed, lattice_front_speed, negativity_scan, parity_check,
    CoefficientChoice, ConvergenceReport, ConvergenceRow, Norm, Snapshot, SpeedEstimate, StudyConfig, Violation,
};
pub use error::{Error, Result};
pub use lattice::{amplification_factor, diffusion_coefficient, LatticeField, MicroParams, Stencil, Topology};
pub use models::{
    dimensionless_params, dispersion_roots, nondimensionalize, predicted_speed, redimensionalize, Coefficients,
    DimensionlessModel, Dispersion, LinearPDE, ScaleSpec, SpeedSource,
};
pub use opcalc::{derive_hierarchy, expand_stencil, reduce_to_mixed_form, Form, ModifiedPDE, SeriesTerm};
pub use rational::{format_rational, parse_rational, Rational, Scalar};
pub use solvers::{
    compatibility_initial_rate, fd_heat_solve, spectral_solve, Closure, ContinuumField, InitialData,
    InstabilityPolicy, Profile, SpectralOptions, SpectralSolver, SpectralState,
};
