//! The model family behind the engine: every lattice scheme implements
//! [`TreeModel`] and is registered by name, so callers select one at runtime.

mod crr;
mod ksrf;
mod trinomial;

pub use crr::{
    crr_factors, crr_hedge_ratio, crr_hedge_ratio_replicating, crr_natural_prob,
    crr_risk_neutral_prob, crr_step, CrrStep, CrrTd,
};
pub use ksrf::{
    ksrf_factors, ksrf_hedge_ratio, ksrf_q_star_raw, ksrf_risk_neutral_prob, ksrf_step, KsrfStep,
    KsrfTd,
};
pub use trinomial::{
    classical_trinomial_step, new_trinomial_natural_step, new_trinomial_risk_neutral_step,
    TriClassical, TriNew, TrinomialStep, TrinomialVariant,
};

use crate::curve::{CoefficientCurve, MarketCoefficients};
use crate::error::{Error, Result};
use crate::lattice::{Branching, StepSpec, TimeGrid};

/// Probability measure a step is built under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum World {
    /// Historical measure: branch probabilities reflect the drift `mu`.
    Natural,
    /// Pricing measure: discounted prices are one-step martingales.
    RiskNeutral,
}

/// The coefficient inputs a model draws from. `up_probability` is the
/// exogenous p(t) curve consumed by the KSRF scheme and ignored elsewhere.
#[derive(Debug, Clone, Copy)]
pub struct ModelInputs<'a> {
    pub market: &'a MarketCoefficients,
    pub up_probability: Option<&'a CoefficientCurve>,
}

impl<'a> ModelInputs<'a> {
    pub fn new(market: &'a MarketCoefficients) -> Self {
        ModelInputs { market, up_probability: None }
    }

    pub fn with_up_probability(market: &'a MarketCoefficients, p: &'a CoefficientCurve) -> Self {
        ModelInputs { market, up_probability: Some(p) }
    }
}

/// Which hedge-ratio formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HedgeForm {
    /// The small-step form reported to users: for the CRR scheme
    /// `(G+ - G-) / (2 S sigma sqrt(dt))`, which differs from exact
    /// replication by O(dt).
    SmallStep,
    /// The exact replicating position `(G+ - G-) / (S (up - down))`; makes
    /// the one-step short-derivative portfolio riskless to rounding.
    Replicating,
}

/// A lattice scheme: builds one [`StepSpec`] per grid step in a given world
/// and, for binomial schemes, prices the one-step hedge.
pub trait TreeModel: Sync {
    /// Registry name, e.g. `"crr-td"`.
    fn name(&self) -> &'static str;

    fn branching(&self) -> Branching;

    /// Checks the inputs against the grid before any step is built.
    fn validate(&self, inputs: &ModelInputs, grid: &TimeGrid) -> Result<()>;

    /// Step covering `(t_end - dt, t_end]`; coefficients evaluate at `t_end`.
    fn step(&self, inputs: &ModelInputs, t_end: f64, dt: f64, world: World) -> Result<StepSpec>;

    /// All steps for the grid, in time order.
    fn steps(&self, inputs: &ModelInputs, grid: &TimeGrid, world: World) -> Result<Vec<StepSpec>> {
        self.validate(inputs, grid)?;
        grid.step_end_times()
            .map(|t_end| self.step(inputs, t_end, grid.dt(), world))
            .collect()
    }

    /// Stock position making the one-step short-derivative portfolio
    /// riskless. Binomial schemes only; the trinomial one-step market is
    /// incomplete with a single risky asset, so trinomial models refuse.
    #[allow(clippy::too_many_arguments)]
    fn hedge_ratio(
        &self,
        _inputs: &ModelInputs,
        _t_end: f64,
        _dt: f64,
        _spot: f64,
        _g_up: f64,
        _g_down: f64,
        _form: HedgeForm,
    ) -> Result<f64> {
        Err(Error::Unsupported(format!(
            "model {} does not replicate with a single risky asset; no hedge ratio",
            self.name()
        )))
    }
}

/// Every registered model, in registry order.
pub static MODELS: &[&dyn TreeModel] = &[&CrrTd, &KsrfTd, &TriClassical, &TriNew];

/// Looks a model up by its registry name.
pub fn find_model(name: &str) -> Option<&'static dyn TreeModel> {
    MODELS.iter().copied().find(|m| m.name() == name)
}

pub fn model_names() -> Vec<&'static str> {
    MODELS.iter().map(|m| m.name()).collect()
}

pub(crate) fn validate_market_on_grid(market: &MarketCoefficients, grid: &TimeGrid) -> Result<()> {
    for t in grid.step_end_times() {
        market.sigma_at(t)?;
        market.rate_at(t)?;
        market.mu_at(t)?;
    }
    Ok(())
}
