//! Coverage analytics for wireless sensor networks that sense a spatially
//! correlated environmental variable.
//!
//! A sensor's reading constrains the variable's value nearby, so allowing a
//! sensing tolerance extends each sensor's usable radius from `R_S` to
//! `R_S + R(tau)` where `R(tau)` inverts the variable's spatial variation
//! profile. On a Poisson sensor field every coverage metric then has a
//! closed form, which this crate implements alongside a first-principles
//! Monte Carlo simulator that validates each formula, inverse planning
//! queries (required density, optimal density, maximum coverable region),
//! and reproducible parameter sweeps.
//!
//! - [`model`]: domain types, the tolerance profile, the effective radius,
//!   and the Poisson pmf.
//! - [`analytics`]: closed-form metrics and planning queries.
//! - [`montecarlo`]: seeded geometric simulator with standard errors.
//! - [`experiments`]: sweep presets, the generic sweep runner, and the
//!   analytic-vs-simulation validation grid.

pub mod analytics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod montecarlo;

pub use analytics::{
    density_for_cif, optimal_density, required_density, DensityOptimum, ScenarioParams,
};
pub use error::{Error, Result};
pub use model::{
    poisson_pmf, poisson_tail_cap, EffectiveRadius, NetworkModel, RegionOfInterest,
    ToleranceProfile,
};
pub use montecarlo::{MetricEstimate, SimulationConfig};
