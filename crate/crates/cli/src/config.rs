//! Run configuration: JSON schema and validation.

use serde::Deserialize;
use treeprice_core::{
    find_model, CoefficientCurve, MarketCoefficients, ModelInputs, Payoff, TreeModel, World,
};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spot: f64,
    pub payoff: PayoffConfig,
    pub grid: GridConfig,
    pub model: String,
    /// Probability measure for the `moments` and `tree` commands; pricing
    /// always uses the risk-neutral measure.
    #[serde(default)]
    pub world: WorldConfig,
    pub mu: CurveConfig,
    pub sigma: CurveConfig,
    pub rate: CurveConfig,
    /// Exogenous up-probability curve for `ksrf-td`; defaults to the
    /// symmetric constant 1/2.
    #[serde(default)]
    pub p: Option<CurveConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PayoffConfig {
    Call { strike: f64 },
    Put { strike: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub maturity: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum WorldConfig {
    #[default]
    Natural,
    RiskNeutral,
}

impl From<WorldConfig> for World {
    fn from(w: WorldConfig) -> World {
        match w {
            WorldConfig::Natural => World::Natural,
            WorldConfig::RiskNeutral => World::RiskNeutral,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveConfig {
    Constant { value: f64 },
    Linear { a: f64, b: f64 },
    Piecewise { knots: Vec<(f64, f64)> },
}

impl CurveConfig {
    fn build(&self, field: &str) -> Result<CoefficientCurve, CliError> {
        match self {
            CurveConfig::Constant { value } => Ok(CoefficientCurve::constant(*value)),
            CurveConfig::Linear { a, b } => Ok(CoefficientCurve::linear(*a, *b)),
            CurveConfig::Piecewise { knots } => CoefficientCurve::piecewise(knots.clone())
                .map_err(|e| CliError::Config(format!("{field}: {e}"))),
        }
    }
}

/// A validated run: core types plus the selected model.
pub struct Run {
    pub spot: f64,
    pub payoff: Payoff,
    pub payoff_config: PayoffConfigSummary,
    pub maturity: f64,
    pub steps: usize,
    pub world: World,
    pub model: &'static dyn TreeModel,
    pub market: MarketCoefficients,
    pub p_curve: Option<CoefficientCurve>,
}

/// Payoff facts the reports need after the closure is built.
pub enum PayoffConfigSummary {
    Call { strike: f64 },
    Put { strike: f64 },
    Constant,
}

impl Run {
    pub fn inputs(&self) -> ModelInputs<'_> {
        match &self.p_curve {
            Some(p) => ModelInputs::with_up_probability(&self.market, p),
            None => ModelInputs::new(&self.market),
        }
    }
}

pub fn validate(config: RunConfig) -> Result<Run, CliError> {
    if !(config.spot > 0.0) || !config.spot.is_finite() {
        return Err(CliError::Config(format!("spot must be positive, got {}", config.spot)));
    }
    if !(config.grid.maturity > 0.0) || !config.grid.maturity.is_finite() {
        return Err(CliError::Config(format!(
            "grid.maturity must be positive, got {}",
            config.grid.maturity
        )));
    }
    let (payoff, payoff_config) = match config.payoff {
        PayoffConfig::Call { strike } => {
            if !(strike > 0.0) {
                return Err(CliError::Config(format!("payoff.strike must be positive, got {strike}")));
            }
            (Payoff::call(strike), PayoffConfigSummary::Call { strike })
        }
        PayoffConfig::Put { strike } => {
            if !(strike > 0.0) {
                return Err(CliError::Config(format!("payoff.strike must be positive, got {strike}")));
            }
            (Payoff::put(strike), PayoffConfigSummary::Put { strike })
        }
        PayoffConfig::Constant { value } => (Payoff::constant(value), PayoffConfigSummary::Constant),
    };
    let model = find_model(&config.model).ok_or_else(|| {
        CliError::Config(format!(
            "model must be one of {:?}, got {:?}",
            treeprice_core::model_names(),
            config.model
        ))
    })?;
    let market = MarketCoefficients::new(
        config.mu.build("mu")?,
        config.sigma.build("sigma")?,
        config.rate.build("rate")?,
    );
    let p_curve = if model.name() == "ksrf-td" {
        Some(match &config.p {
            Some(curve) => curve.build("p")?,
            None => CoefficientCurve::constant(0.5),
        })
    } else {
        None
    };

    Ok(Run {
        spot: config.spot,
        payoff,
        payoff_config,
        maturity: config.grid.maturity,
        steps: config.grid.steps,
        world: config.world.into(),
        model,
        market,
        p_curve,
    })
}
