//! Pricing of American puts under a stochastic liquidity model with
//! transaction costs, plus the calibration and data tooling around it.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adi;
pub mod calibration;
pub mod convergence;
pub mod data;
pub mod error;
pub mod explicit;
pub mod mc;
pub mod model;
pub mod operators;
pub mod surface;
pub mod synthetic;
pub mod tridiag;

pub use adi::{
    adi_step, extract_boundary, price_both, price_holder, price_writer, AdiOptions, BoundaryLag,
    Diagnostics, Exercise, ExtractOptions, PricingResult,
};
pub use calibration::{
    bucket_moneyness, calibrate_liquidity, ekf_filter_loglik, gbm_loglik, gbm_mle, maximize_loglik,
    rmse, CalibrationResult, Moneyness, StateSpaceModel,
};
pub use data::{
    build_windows, load_futures_csv, load_options_csv, FuturesSeries, OptionQuote, Window,
};
pub use error::{CalibrationError, DataError, McError, ModelError, PdeError};
pub use explicit::{price_explicit, price_explicit_both, price_explicit_writer, ExplicitOptions};
pub use mc::{
    correlated_increments, price_european_mc, simulate_paths, McOptions, McPrice, Measure,
    PathBatch, SimConfig,
};
pub use model::{build_grid, theta_effective, validate_params, Grid, GridSpec, ModelParams};
pub use surface::{
    interpolate_price, BoundaryRow, CostSide, ExerciseBoundary, ExerciseStyle, PriceSurface, Side,
};
pub use tridiag::{solve_tridiagonal, SweepLine, SweepSystem};
