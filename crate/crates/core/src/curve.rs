//! Time-dependent model coefficients.
//!
//! The drift, volatility and riskless rate are deterministic functions of
//! time. The supported families (constant, linear, piecewise-linear) all
//! integrate in closed form, so squared-volatility averages used by the
//! closed-form oracle carry no quadrature error.

use crate::error::{Error, Result};

/// A deterministic scalar coefficient curve on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientCurve {
    /// `v(t) = value`.
    Constant { value: f64 },
    /// `v(t) = intercept + slope * t`.
    Linear { intercept: f64, slope: f64 },
    /// Linear interpolation between knots `(t_i, v_i)`; knots strictly
    /// increasing in `t`, first knot at `t = 0`.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl CoefficientCurve {
    pub fn constant(value: f64) -> Self {
        CoefficientCurve::Constant { value }
    }

    pub fn linear(intercept: f64, slope: f64) -> Self {
        CoefficientCurve::Linear { intercept, slope }
    }

    /// Builds a piecewise-linear curve, validating the knot list.
    pub fn piecewise(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Domain("piecewise curve needs at least one knot".into()));
        }
        if knots[0].0 != 0.0 {
            return Err(Error::Domain(format!(
                "piecewise curve must start at t = 0, first knot at t = {}",
                knots[0].0
            )));
        }
        for pair in knots.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::Domain(format!(
                    "piecewise knots must be strictly increasing in t ({} then {})",
                    pair[0].0, pair[1].0
                )));
            }
        }
        if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::Domain("piecewise knots must be finite".into()));
        }
        Ok(CoefficientCurve::PiecewiseLinear { knots })
    }

    /// End of the curve's domain: the last knot time for piecewise curves,
    /// unbounded otherwise.
    pub fn domain_end(&self) -> f64 {
        match self {
            CoefficientCurve::PiecewiseLinear { knots } => knots.last().unwrap().0,
            _ => f64::INFINITY,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CoefficientCurve::Constant { .. })
    }

    pub fn is_constant_or_linear(&self) -> bool {
        !matches!(self, CoefficientCurve::PiecewiseLinear { .. })
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Domain(format!("curve evaluated at t = {t}, need t >= 0")));
        }
        if t > self.domain_end() {
            return Err(Error::Domain(format!(
                "curve evaluated at t = {t} past domain end {}",
                self.domain_end()
            )));
        }
        Ok(())
    }

    /// Value at `t`. Exact for constant/linear curves; linear interpolation
    /// between knots for piecewise curves, with knot values reproduced
    /// bit-exactly.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        match self {
            CoefficientCurve::Constant { value } => Ok(*value),
            CoefficientCurve::Linear { intercept, slope } => Ok(intercept + slope * t),
            CoefficientCurve::PiecewiseLinear { knots } => {
                // Exact at knots, lerp in between.
                if let Some(&(_, v)) = knots.iter().find(|(tk, _)| *tk == t) {
                    return Ok(v);
                }
                let seg = knots
                    .windows(2)
                    .find(|pair| pair[0].0 < t && t < pair[1].0)
                    .expect("domain checked above");
                let (t0, v0) = seg[0];
                let (t1, v1) = seg[1];
                Ok(v0 + (t - t0) * (v1 - v0) / (t1 - t0))
            }
        }
    }

    /// Exact integral of the curve over `[t0, t1]`.
    pub fn integrate(&self, t0: f64, t1: f64) -> Result<f64> {
        self.check_domain(t0)?;
        self.check_domain(t1)?;
        if t1 < t0 {
            return Err(Error::Domain(format!("integration bounds reversed: [{t0}, {t1}]")));
        }
        self.segment_integral(t0, t1, |a, b, lo, hi| {
            // int (a + b t) dt
            a * (hi - lo) + 0.5 * b * (hi * hi - lo * lo)
        })
    }

    /// Exact integral of the squared curve over `[t0, t1]`; each linear
    /// segment integrates as a quadratic.
    pub fn integrate_squared(&self, t0: f64, t1: f64) -> Result<f64> {
        self.check_domain(t0)?;
        self.check_domain(t1)?;
        if t1 < t0 {
            return Err(Error::Domain(format!("integration bounds reversed: [{t0}, {t1}]")));
        }
        self.segment_integral(t0, t1, |a, b, lo, hi| {
            // int (a + b t)^2 dt
            a * a * (hi - lo) + a * b * (hi * hi - lo * lo) + b * b * (hi * hi * hi - lo * lo * lo) / 3.0
        })
    }

    /// Applies a closed-form segment integral `f(a, b, lo, hi)` for the local
    /// representation `a + b t` over every linear piece of `[t0, t1]`.
    fn segment_integral(&self, t0: f64, t1: f64, f: impl Fn(f64, f64, f64, f64) -> f64) -> Result<f64> {
        match self {
            CoefficientCurve::Constant { value } => Ok(f(*value, 0.0, t0, t1)),
            CoefficientCurve::Linear { intercept, slope } => Ok(f(*intercept, *slope, t0, t1)),
            CoefficientCurve::PiecewiseLinear { knots } => {
                let mut total = 0.0;
                for pair in knots.windows(2) {
                    let (ta, va) = pair[0];
                    let (tb, vb) = pair[1];
                    let lo = ta.max(t0);
                    let hi = tb.min(t1);
                    if lo < hi {
                        let slope = (vb - va) / (tb - ta);
                        let intercept = va - slope * ta;
                        total += f(intercept, slope, lo, hi);
                    }
                }
                Ok(total)
            }
        }
    }
}

/// Market price of risk `theta(t) = (mu(t) - r(t)) / sigma(t)` together with a
/// flag raised when the riskless rate is not below the drift. Pricing remains
/// well defined in that regime, so it is reported rather than rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketPriceOfRisk {
    pub value: f64,
    pub rate_exceeds_drift: bool,
}

/// The coefficient triple `(mu, sigma, r)` of the market.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketCoefficients {
    pub mu: CoefficientCurve,
    pub sigma: CoefficientCurve,
    pub rate: CoefficientCurve,
}

impl MarketCoefficients {
    pub fn new(mu: CoefficientCurve, sigma: CoefficientCurve, rate: CoefficientCurve) -> Self {
        MarketCoefficients { mu, sigma, rate }
    }

    /// Evaluates sigma at `t`, requiring it positive.
    pub fn sigma_at(&self, t: f64) -> Result<f64> {
        let s = self.sigma.eval(t).map_err(|e| prefix("sigma", e))?;
        if s <= 0.0 {
            return Err(Error::Domain(format!("sigma({t}) = {s} must be positive")));
        }
        Ok(s)
    }

    /// Evaluates the riskless rate at `t`, requiring it positive.
    pub fn rate_at(&self, t: f64) -> Result<f64> {
        let r = self.rate.eval(t).map_err(|e| prefix("rate", e))?;
        if r <= 0.0 {
            return Err(Error::Domain(format!("rate({t}) = {r} must be positive")));
        }
        Ok(r)
    }

    pub fn mu_at(&self, t: f64) -> Result<f64> {
        self.mu.eval(t).map_err(|e| prefix("mu", e))
    }

    /// `theta(t) = (mu(t) - r(t)) / sigma(t)`; flags `r >= mu`.
    pub fn market_price_of_risk(&self, t: f64) -> Result<MarketPriceOfRisk> {
        let mu = self.mu_at(t)?;
        let r = self.rate_at(t)?;
        let sigma = self.sigma_at(t)?;
        Ok(MarketPriceOfRisk {
            value: (mu - r) / sigma,
            rate_exceeds_drift: r >= mu,
        })
    }

    /// One-step discount factor `exp(-r(t) dt)` used in backward induction.
    pub fn step_discount(&self, t: f64, dt: f64) -> Result<f64> {
        if dt < 0.0 {
            return Err(Error::Domain(format!("step discount needs dt >= 0, got {dt}")));
        }
        if dt == 0.0 {
            return Ok(1.0);
        }
        let r = self.rate_at(t)?;
        Ok((-r * dt).exp())
    }
}

fn prefix(which: &str, e: Error) -> Error {
    match e {
        Error::Domain(msg) => Error::Domain(format!("{which}: {msg}")),
        other => other,
    }
}
