//! Time-dependent CRR scheme.
//!
//! Per step ending at `t`: factors `U = e^{sigma(t) sqrt(dt)}`, `D = 1/U`;
//! natural probability `p = 1/2 + (mu - sigma^2/2)/(2 sigma) sqrt(dt)`;
//! risk-neutral probability `q` of the same form with `r` in place of `mu`.
//! `q` never reads `mu` or `p`, which is exactly the discontinuity the KSRF
//! scheme removes.

use crate::curve::MarketCoefficients;
use crate::error::{Error, Result};
use crate::lattice::{Branching, StepSpec, TimeGrid};
use crate::models::{validate_market_on_grid, HedgeForm, ModelInputs, TreeModel, World};

/// One CRR step with both worlds' probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrrStep {
    pub up: f64,
    pub down: f64,
    pub p_natural: f64,
    pub q_risk_neutral: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl CrrStep {
    pub fn step_spec(&self, world: World) -> StepSpec {
        let p = match world {
            World::Natural => self.p_natural,
            World::RiskNeutral => self.q_risk_neutral,
        };
        StepSpec::binomial(self.down, self.up, 1.0 - p, p)
            .expect("validated by the step constructor")
    }
}

fn check_sigma_dt(sigma_t: f64, dt: f64) -> Result<()> {
    if !(sigma_t > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma_t}")));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    Ok(())
}

/// `(U, D) = (e^{sigma sqrt(dt)}, 1/U)`, so `U * D = 1` to a rounding unit.
pub fn crr_factors(sigma_t: f64, dt: f64) -> Result<(f64, f64)> {
    check_sigma_dt(sigma_t, dt)?;
    let up = (sigma_t * dt.sqrt()).exp();
    Ok((up, 1.0 / up))
}

fn two_point_prob(drift: f64, sigma_t: f64, dt: f64, what: &str) -> Result<f64> {
    check_sigma_dt(sigma_t, dt)?;
    let p = 0.5 + (drift - 0.5 * sigma_t * sigma_t) / (2.0 * sigma_t) * dt.sqrt();
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ParameterRegime(format!(
            "{what} probability {p} outside (0,1); dt = {dt} is too large for this drift"
        )));
    }
    Ok(p)
}

/// Natural up-probability `p(t, dt)`.
pub fn crr_natural_prob(mu_t: f64, sigma_t: f64, dt: f64) -> Result<f64> {
    two_point_prob(mu_t, sigma_t, dt, "natural")
}

/// Risk-neutral up-probability `q(t, dt)`; independent of `mu`.
pub fn crr_risk_neutral_prob(r_t: f64, sigma_t: f64, dt: f64) -> Result<f64> {
    two_point_prob(r_t, sigma_t, dt, "risk-neutral")
}

fn check_hedge_inputs(spot: f64, sigma_t: f64, dt: f64) -> Result<()> {
    check_sigma_dt(sigma_t, dt)?;
    if !(spot > 0.0) {
        return Err(Error::Domain(format!("spot must be positive, got {spot}")));
    }
    Ok(())
}

/// Small-step hedge ratio `(G+ - G-) / (2 S sigma sqrt(dt))`.
///
/// See [`crr_hedge_ratio_replicating`] for the exact replicating position;
/// the two agree to O(dt).
pub fn crr_hedge_ratio(g_up: f64, g_down: f64, spot: f64, sigma_t: f64, dt: f64) -> Result<f64> {
    check_hedge_inputs(spot, sigma_t, dt)?;
    Ok((g_up - g_down) / (2.0 * spot * sigma_t * dt.sqrt()))
}

/// Exact replicating position `(G+ - G-) / (S (U - D))`.
pub fn crr_hedge_ratio_replicating(
    g_up: f64,
    g_down: f64,
    spot: f64,
    sigma_t: f64,
    dt: f64,
) -> Result<f64> {
    check_hedge_inputs(spot, sigma_t, dt)?;
    let (up, down) = crr_factors(sigma_t, dt)?;
    Ok((g_up - g_down) / (spot * (up - down)))
}

/// Builds the CRR step ending at `t_end` from the market curves.
pub fn crr_step(market: &MarketCoefficients, t_end: f64, dt: f64) -> Result<CrrStep> {
    let sigma = market.sigma_at(t_end)?;
    let mu = market.mu_at(t_end)?;
    let r = market.rate_at(t_end)?;
    let (up, down) = crr_factors(sigma, dt)?;
    Ok(CrrStep {
        up,
        down,
        p_natural: crr_natural_prob(mu, sigma, dt)?,
        q_risk_neutral: crr_risk_neutral_prob(r, sigma, dt)?,
        t_end,
        dt,
    })
}

/// The time-dependent CRR scheme, registered as `crr-td`.
pub struct CrrTd;

impl TreeModel for CrrTd {
    fn name(&self) -> &'static str {
        "crr-td"
    }

    fn branching(&self) -> Branching {
        Branching::Binomial
    }

    fn validate(&self, inputs: &ModelInputs, grid: &TimeGrid) -> Result<()> {
        validate_market_on_grid(inputs.market, grid)
    }

    fn step(&self, inputs: &ModelInputs, t_end: f64, dt: f64, world: World) -> Result<StepSpec> {
        Ok(crr_step(inputs.market, t_end, dt)?.step_spec(world))
    }

    fn hedge_ratio(
        &self,
        inputs: &ModelInputs,
        t_end: f64,
        dt: f64,
        spot: f64,
        g_up: f64,
        g_down: f64,
        form: HedgeForm,
    ) -> Result<f64> {
        let sigma = inputs.market.sigma_at(t_end)?;
        match form {
            HedgeForm::SmallStep => crr_hedge_ratio(g_up, g_down, spot, sigma, dt),
            HedgeForm::Replicating => crr_hedge_ratio_replicating(g_up, g_down, spot, sigma, dt),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CoefficientCurve;
    use approx::assert_relative_eq;

    #[test]
    fn factor_examples() {
        let (u, d) = crr_factors(0.2, 0.01).unwrap();
        assert_relative_eq!(u, 1.0202013400267558, max_relative = 1e-12);
        assert_relative_eq!(d, 0.9801986733067553, max_relative = 1e-12);
        let (u, d) = crr_factors(0.2, 1.0).unwrap();
        assert_relative_eq!(u, 1.2214027581601699, max_relative = 1e-12);
        assert_relative_eq!(d, 0.8187307530779818, max_relative = 1e-12);
        assert_relative_eq!(u * d, 1.0, epsilon = 1e-15);
        assert!(crr_factors(0.0, 0.01).is_err());
        assert!(crr_factors(0.2, 0.0).is_err());
    }

    #[test]
    fn natural_prob_examples() {
        assert_relative_eq!(crr_natural_prob(0.1, 0.2, 0.01).unwrap(), 0.52, max_relative = 1e-14);
        assert_relative_eq!(crr_natural_prob(0.02, 0.2, 0.01).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(crr_natural_prob(0.1, 0.2, 1e-4).unwrap(), 0.502, max_relative = 1e-13);
    }

    #[test]
    fn risk_neutral_prob_examples() {
        assert_relative_eq!(crr_risk_neutral_prob(0.05, 0.2, 0.01).unwrap(), 0.5075, max_relative = 1e-14);
        assert_relative_eq!(crr_risk_neutral_prob(0.02, 0.2, 0.01).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(crr_risk_neutral_prob(0.05, 0.2, 1.0).unwrap(), 0.575, max_relative = 1e-14);
    }

    #[test]
    fn out_of_range_probability_is_regime_error() {
        assert!(matches!(
            crr_natural_prob(5.0, 0.1, 1.0),
            Err(Error::ParameterRegime(_))
        ));
    }

    #[test]
    fn hedge_ratio_examples() {
        // G+ = 22.1403 rounds the exact one-step call payoff; use the exact value.
        let g_up = 100.0 * (0.2f64).exp() - 100.0;
        assert_relative_eq!(
            crr_hedge_ratio(g_up, 0.0, 100.0, 0.2, 1.0).unwrap(),
            0.5535068954004245,
            max_relative = 1e-12
        );
        assert_eq!(crr_hedge_ratio(3.0, 3.0, 100.0, 0.2, 0.01).unwrap(), 0.0);
        assert_relative_eq!(
            crr_hedge_ratio(1.0, 0.0, 100.0, 0.2, 0.01).unwrap(),
            0.25,
            max_relative = 1e-14
        );
    }

    #[test]
    fn hedge_forms_converge_as_dt_shrinks() {
        for (dt, tol) in [(1e-2, 7e-5), (1e-3, 7e-6), (1e-4, 7e-7)] {
            let small_step = crr_hedge_ratio(1.0, 0.0, 100.0, 0.2, dt).unwrap();
            let exact = crr_hedge_ratio_replicating(1.0, 0.0, 100.0, 0.2, dt).unwrap();
            assert!((small_step / exact - 1.0).abs() < tol, "dt={dt}");
        }
    }

    fn market(mu: f64, sigma: CoefficientCurve, r: f64) -> MarketCoefficients {
        MarketCoefficients::new(CoefficientCurve::constant(mu), sigma, CoefficientCurve::constant(r))
    }

    #[test]
    fn step_composition() {
        let m = market(0.1, CoefficientCurve::constant(0.2), 0.05);
        let s = crr_step(&m, 0.01, 0.01).unwrap();
        assert_relative_eq!(s.up, 1.0202013400267558, max_relative = 1e-12);
        assert_relative_eq!(s.p_natural, 0.52, max_relative = 1e-14);
        assert_relative_eq!(s.q_risk_neutral, 0.5075, max_relative = 1e-14);

        // mu = r collapses the two worlds.
        let m = market(0.05, CoefficientCurve::constant(0.2), 0.05);
        let s = crr_step(&m, 0.01, 0.01).unwrap();
        assert_eq!(s.p_natural, s.q_risk_neutral);

        // time-dependent sigma evaluates at the step end.
        let m = market(0.1, CoefficientCurve::linear(0.15, 0.1), 0.05);
        let s = crr_step(&m, 0.5, 0.01).unwrap();
        assert_relative_eq!(s.up, (0.2f64 * 0.1).exp(), max_relative = 1e-14);
    }

    #[test]
    fn q_is_bitwise_independent_of_mu() {
        let sigma = CoefficientCurve::constant(0.2);
        let a = crr_step(&market(0.1, sigma.clone(), 0.05), 0.01, 0.01).unwrap();
        let b = crr_step(&market(0.9, sigma, 0.05), 0.01, 0.01).unwrap();
        assert_eq!(a.q_risk_neutral.to_bits(), b.q_risk_neutral.to_bits());
        assert_ne!(a.p_natural.to_bits(), b.p_natural.to_bits());
    }

    #[test]
    fn one_step_martingale_residual_shrinks_quadratically() {
        let mut prev = f64::INFINITY;
        for dt in [1e-2, 1e-3, 1e-4] {
            let (u, d) = crr_factors(0.2, dt).unwrap();
            let q = crr_risk_neutral_prob(0.05, 0.2, dt).unwrap();
            let res = ((-0.05 * dt).exp() * (q * u + (1.0 - q) * d) - 1.0).abs();
            assert!(res < prev / 50.0, "res {res} at dt {dt}");
            prev = res;
        }
    }

    #[test]
    fn log_return_mean_matches_drift_exactly() {
        let (mu, sigma, dt) = (0.1, 0.2, 0.01);
        let p = crr_natural_prob(mu, sigma, dt).unwrap();
        let s = sigma * dt.sqrt();
        let mean = p * s + (1.0 - p) * (-s);
        assert_relative_eq!(mean, (mu - 0.5 * sigma * sigma) * dt, max_relative = 1e-13);
        let var = s * s - mean * mean;
        assert_relative_eq!(var, 0.00039936, max_relative = 1e-12);
    }
}
