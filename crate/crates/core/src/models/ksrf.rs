//! Time-dependent KSRF scheme: an asymmetric moment-matched binomial tree
//! with an exogenous up-probability curve `p(t)`.
//!
//! Per step ending at `t`:
//! ```text
//! up   = 1 + mu dt + sqrt((1-p)/p) sigma sqrt(dt)
//! down = 1 + mu dt - sqrt(p/(1-p)) sigma sqrt(dt)
//! q*   = p - theta sqrt(p (1-p) dt),   theta = (mu - r)/sigma
//! ```
//! The natural one-step mean is `1 + mu dt` exactly for every `p`, the
//! risk-neutral mean under `q*` is `1 + r dt` exactly, and `q*` depends
//! continuously on `p` with `q* -> 0` as `p -> 0` and `q* -> 1` as `p -> 1`,
//! unlike the CRR risk-neutral probability.

use crate::curve::{CoefficientCurve, MarketCoefficients};
use crate::error::{Error, Result};
use crate::lattice::{Branching, StepSpec, TimeGrid};
use crate::models::{validate_market_on_grid, HedgeForm, ModelInputs, TreeModel, World};

/// One KSRF step. All coefficients, including `p` and `theta`, evaluate at
/// the step end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsrfStep {
    pub up: f64,
    pub down: f64,
    pub p_natural: f64,
    pub q_star: f64,
    pub theta: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl KsrfStep {
    pub fn step_spec(&self, world: World) -> StepSpec {
        let p = match world {
            World::Natural => self.p_natural,
            World::RiskNeutral => self.q_star,
        };
        StepSpec::binomial(self.down, self.up, 1.0 - p, p)
            .expect("validated by the step constructor")
    }
}

fn check_p(p_t: f64) -> Result<()> {
    if !(p_t > 0.0 && p_t < 1.0) {
        return Err(Error::Domain(format!("p must lie in (0,1), got {p_t}")));
    }
    Ok(())
}

/// Branch factors; errors when the down factor is not positive (p too large
/// for this `dt`).
pub fn ksrf_factors(mu_t: f64, sigma_t: f64, p_t: f64, dt: f64) -> Result<(f64, f64)> {
    check_p(p_t)?;
    if !(sigma_t > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma_t}")));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let s = sigma_t * dt.sqrt();
    let up = 1.0 + mu_t * dt + ((1.0 - p_t) / p_t).sqrt() * s;
    let down = 1.0 + mu_t * dt - (p_t / (1.0 - p_t)).sqrt() * s;
    if !(down > 0.0) {
        return Err(Error::ParameterRegime(format!(
            "down factor {down} not positive: p = {p_t} too large for dt = {dt}"
        )));
    }
    Ok((up, down))
}

/// `q* = p - theta sqrt(p (1-p) dt)` without the (0,1) range check; useful
/// for sweeping the formula across the whole `p` range.
pub fn ksrf_q_star_raw(p_t: f64, theta_t: f64, dt: f64) -> f64 {
    p_t - theta_t * (p_t * (1.0 - p_t) * dt).sqrt()
}

/// Risk-neutral probability `q*`; errors when it leaves (0,1).
pub fn ksrf_risk_neutral_prob(p_t: f64, theta_t: f64, dt: f64) -> Result<f64> {
    check_p(p_t)?;
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let q = ksrf_q_star_raw(p_t, theta_t, dt);
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::ParameterRegime(format!(
            "risk-neutral probability {q} outside (0,1) at p = {p_t}, theta = {theta_t}, dt = {dt}"
        )));
    }
    Ok(q)
}

/// Hedge ratio `(G+ - G-) / (S sigma sqrt(dt)) * sqrt((1-p) p)`.
///
/// Because the factor gap is `up - down = sigma sqrt(dt) / sqrt(p (1-p))`,
/// this equals the exact replicating position `(G+ - G-)/(S (up - down))`.
pub fn ksrf_hedge_ratio(
    g_up: f64,
    g_down: f64,
    spot: f64,
    sigma_t: f64,
    p_t: f64,
    dt: f64,
) -> Result<f64> {
    check_p(p_t)?;
    if !(spot > 0.0) {
        return Err(Error::Domain(format!("spot must be positive, got {spot}")));
    }
    if !(sigma_t > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma_t}")));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    Ok((g_up - g_down) / (spot * sigma_t * dt.sqrt()) * ((1.0 - p_t) * p_t).sqrt())
}

/// Builds the KSRF step ending at `t_end`.
pub fn ksrf_step(
    market: &MarketCoefficients,
    p_curve: &CoefficientCurve,
    t_end: f64,
    dt: f64,
) -> Result<KsrfStep> {
    let mu = market.mu_at(t_end)?;
    let sigma = market.sigma_at(t_end)?;
    let p = p_curve.eval(t_end).map_err(|e| match e {
        Error::Domain(m) => Error::Domain(format!("p: {m}")),
        other => other,
    })?;
    let (up, down) = ksrf_factors(mu, sigma, p, dt)?;
    let theta = market.market_price_of_risk(t_end)?.value;
    let q_star = ksrf_risk_neutral_prob(p, theta, dt)?;
    Ok(KsrfStep { up, down, p_natural: p, q_star, theta, t_end, dt })
}

/// The time-dependent KSRF scheme, registered as `ksrf-td`.
pub struct KsrfTd;

impl KsrfTd {
    fn p_curve<'a>(inputs: &ModelInputs<'a>) -> Result<&'a CoefficientCurve> {
        inputs.up_probability.ok_or_else(|| {
            Error::Domain("model ksrf-td requires the up-probability curve p".into())
        })
    }
}

impl TreeModel for KsrfTd {
    fn name(&self) -> &'static str {
        "ksrf-td"
    }

    fn branching(&self) -> Branching {
        Branching::Binomial
    }

    fn validate(&self, inputs: &ModelInputs, grid: &TimeGrid) -> Result<()> {
        validate_market_on_grid(inputs.market, grid)?;
        let p_curve = Self::p_curve(inputs)?;
        for t in grid.step_end_times() {
            let p = p_curve.eval(t).map_err(|e| match e {
                Error::Domain(m) => Error::Domain(format!("p: {m}")),
                other => other,
            })?;
            check_p(p)?;
        }
        Ok(())
    }

    fn step(&self, inputs: &ModelInputs, t_end: f64, dt: f64, world: World) -> Result<StepSpec> {
        Ok(ksrf_step(inputs.market, Self::p_curve(inputs)?, t_end, dt)?.step_spec(world))
    }

    fn hedge_ratio(
        &self,
        inputs: &ModelInputs,
        t_end: f64,
        dt: f64,
        spot: f64,
        g_up: f64,
        g_down: f64,
        _form: HedgeForm,
    ) -> Result<f64> {
        // Both forms coincide for this scheme.
        let sigma = inputs.market.sigma_at(t_end)?;
        let p = Self::p_curve(inputs)?.eval(t_end)?;
        ksrf_hedge_ratio(g_up, g_down, spot, sigma, p, dt)
    }
}
