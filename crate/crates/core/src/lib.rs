//! Lattice option pricing with time-dependent coefficients.
//!
//! Four interchangeable schemes sit behind the [`models::TreeModel`] trait
//! and are selected by registry name:
//!
//! | Name | Tree | Worlds |
//! |---|---|---|
//! | `crr-td` | binomial, `e^{±sigma(t) sqrt(dt)}` factors | natural + risk-neutral |
//! | `ksrf-td` | binomial, moment-matched asymmetric factors | natural + risk-neutral |
//! | `tri-classical` | trinomial, mean/variance matched | risk-neutral only |
//! | `tri-new` | trinomial, all moments matched, probabilities 1/3 | natural + risk-neutral |
//!
//! A scheme turns market coefficient curves into per-step branch factors and
//! probabilities ([`lattice::StepSpec`]); [`lattice`] lays the steps out as a
//! recombining node grid; [`pricer`] runs backward induction and one-step
//! hedges; [`verify`] holds the closed-form oracle, moment comparisons, and
//! convergence sweeps.

pub mod curve;
pub mod error;
pub mod lattice;
pub mod models;
pub mod pricer;
pub mod verify;

pub use curve::{CoefficientCurve, MarketCoefficients, MarketPriceOfRisk};
pub use error::{Error, Result};
pub use lattice::{
    build_binomial, build_trinomial, recombination_residual, Branching, Lattice, StepSpec, TimeGrid,
};
pub use models::{find_model, model_names, HedgeForm, ModelInputs, TreeModel, World, MODELS};
pub use pricer::{brute_force_price, hedge_report, price_european, Payoff, PriceResult};
pub use verify::{
    averaged_coefficients, bs_price, convergence_study, forward_probabilities, gbm_moment,
    lattice_step_moment, logreturn_moments, moment_reports, ConvergenceRow, GbmMoment,
    MomentReport, OptionKind,
};

/// Per-step discount factors `exp(-r(t_k) dt)` for a grid, one per step,
/// evaluated at each step's end time.
pub fn step_discounts(market: &MarketCoefficients, grid: &TimeGrid) -> Result<Vec<f64>> {
    grid.step_end_times()
        .map(|t| market.step_discount(t, grid.dt()))
        .collect()
}
