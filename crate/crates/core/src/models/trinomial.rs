//! Trinomial schemes with constant coefficients.
//!
//! The classical scheme lives only in the risk-neutral world and matches the
//! first two moments:
//! ```text
//! up = 1 + (3/2) sigma^2 dt + sigma sqrt(3 dt),  mid = 1,  down mirrored
//! q_up = 1/6 + sqrt(dt/(12 sigma^2)) (r - sigma^2/2),  q_mid = 2/3
//! ```
//! The new scheme carries uniform probabilities 1/3 and matches every moment
//! of the lognormal increments to first order in dt:
//! ```text
//! up   = 1 + (m + sigma^2/4) dt + sqrt(3/2) sigma sqrt(dt)
//! mid  = 1 + (m - sigma^2/2) dt
//! down = 1 + (m + sigma^2/4) dt - sqrt(3/2) sigma sqrt(dt)
//! ```
//! with `m = mu` in the natural world and `m = r` in the risk-neutral one.
//! No hedge ratio is offered: one risky asset cannot replicate three branch
//! outcomes in a single step.

use crate::error::{Error, Result};
use crate::lattice::{Branching, StepSpec, TimeGrid};
use crate::models::{validate_market_on_grid, ModelInputs, TreeModel, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrinomialVariant {
    Classical,
    New,
}

/// One trinomial step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrinomialStep {
    pub up: f64,
    pub mid: f64,
    pub down: f64,
    pub prob_up: f64,
    pub prob_mid: f64,
    pub prob_down: f64,
    pub world: World,
    pub variant: TrinomialVariant,
}

impl TrinomialStep {
    pub fn step_spec(&self) -> StepSpec {
        StepSpec::trinomial(self.down, self.mid, self.up, self.prob_down, self.prob_mid, self.prob_up)
            .expect("validated by the step constructor")
    }
}

fn check_sigma_dt(sigma: f64, dt: f64) -> Result<()> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    Ok(())
}

/// Classical risk-neutral trinomial step.
pub fn classical_trinomial_step(r: f64, sigma: f64, dt: f64) -> Result<TrinomialStep> {
    check_sigma_dt(sigma, dt)?;
    let swing = sigma * (3.0 * dt).sqrt();
    let lift = 1.0 + 1.5 * sigma * sigma * dt;
    let down = lift - swing;
    if !(down > 0.0) {
        return Err(Error::ParameterRegime(format!(
            "down factor {down} not positive at dt = {dt}"
        )));
    }
    let tilt = (dt / (12.0 * sigma * sigma)).sqrt() * (r - 0.5 * sigma * sigma);
    let q_up = 1.0 / 6.0 + tilt;
    let q_down = 1.0 / 6.0 - tilt;
    if !(q_up > 0.0 && q_up < 1.0 && q_down > 0.0 && q_down < 1.0) {
        return Err(Error::ParameterRegime(format!(
            "branch probabilities ({q_up}, {q_down}) outside (0,1); dt = {dt} too large"
        )));
    }
    Ok(TrinomialStep {
        up: lift + swing,
        mid: 1.0,
        down,
        prob_up: q_up,
        prob_mid: 2.0 / 3.0,
        prob_down: q_down,
        world: World::RiskNeutral,
        variant: TrinomialVariant::Classical,
    })
}

fn new_trinomial_step(drift: f64, sigma: f64, dt: f64, world: World) -> Result<TrinomialStep> {
    check_sigma_dt(sigma, dt)?;
    let swing = (1.5f64).sqrt() * sigma * dt.sqrt();
    let lift = 1.0 + (drift + 0.25 * sigma * sigma) * dt;
    let down = lift - swing;
    if !(down > 0.0) {
        return Err(Error::ParameterRegime(format!(
            "down factor {down} not positive at dt = {dt}"
        )));
    }
    let third = 1.0 / 3.0;
    Ok(TrinomialStep {
        up: lift + swing,
        mid: 1.0 + (drift - 0.5 * sigma * sigma) * dt,
        down,
        prob_up: third,
        prob_mid: third,
        prob_down: third,
        world,
        variant: TrinomialVariant::New,
    })
}

/// All-moments trinomial step in the natural world (drift `mu`).
pub fn new_trinomial_natural_step(mu: f64, sigma: f64, dt: f64) -> Result<TrinomialStep> {
    new_trinomial_step(mu, sigma, dt, World::Natural)
}

/// All-moments trinomial step in the risk-neutral world (drift `r`).
pub fn new_trinomial_risk_neutral_step(r: f64, sigma: f64, dt: f64) -> Result<TrinomialStep> {
    new_trinomial_step(r, sigma, dt, World::RiskNeutral)
}

fn require_constant_coefficients(model: &str, inputs: &ModelInputs) -> Result<()> {
    for (field, curve) in [
        ("mu", &inputs.market.mu),
        ("sigma", &inputs.market.sigma),
        ("rate", &inputs.market.rate),
    ] {
        if !curve.is_constant() {
            return Err(Error::Domain(format!(
                "model {model} supports constant coefficients only; {field} is time-dependent"
            )));
        }
    }
    Ok(())
}

/// The classical trinomial scheme, registered as `tri-classical`.
pub struct TriClassical;

impl TreeModel for TriClassical {
    fn name(&self) -> &'static str {
        "tri-classical"
    }

    fn branching(&self) -> Branching {
        Branching::Trinomial
    }

    fn validate(&self, inputs: &ModelInputs, grid: &TimeGrid) -> Result<()> {
        require_constant_coefficients(self.name(), inputs)?;
        validate_market_on_grid(inputs.market, grid)
    }

    fn step(&self, inputs: &ModelInputs, t_end: f64, dt: f64, world: World) -> Result<StepSpec> {
        if world == World::Natural {
            return Err(Error::Unsupported(
                "model tri-classical is defined in the risk-neutral world only".into(),
            ));
        }
        let r = inputs.market.rate_at(t_end)?;
        let sigma = inputs.market.sigma_at(t_end)?;
        Ok(classical_trinomial_step(r, sigma, dt)?.step_spec())
    }
}

/// The all-moments trinomial scheme, registered as `tri-new`.
pub struct TriNew;

impl TreeModel for TriNew {
    fn name(&self) -> &'static str {
        "tri-new"
    }

    fn branching(&self) -> Branching {
        Branching::Trinomial
    }

    fn validate(&self, inputs: &ModelInputs, grid: &TimeGrid) -> Result<()> {
        require_constant_coefficients(self.name(), inputs)?;
        validate_market_on_grid(inputs.market, grid)
    }

    fn step(&self, inputs: &ModelInputs, t_end: f64, dt: f64, world: World) -> Result<StepSpec> {
        let sigma = inputs.market.sigma_at(t_end)?;
        let step = match world {
            World::Natural => new_trinomial_natural_step(inputs.market.mu_at(t_end)?, sigma, dt)?,
            World::RiskNeutral => {
                new_trinomial_risk_neutral_step(inputs.market.rate_at(t_end)?, sigma, dt)?
            }
        };
        Ok(step.step_spec())
    }
}
