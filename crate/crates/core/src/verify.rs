//! Analytic moments, the closed-form lognormal oracle, forward probability
//! flow, and convergence studies.
//!
//! For deterministic `r(t)` and `sigma(t)` the limiting terminal law is
//! lognormal, so the standard closed form with the averaged coefficients
//! `r_bar = (1/T) int r` and `sigma_bar^2 = (1/T) int sigma^2` prices the
//! limit exactly and serves as the oracle for every scheme here.

use crate::curve::MarketCoefficients;
use crate::error::{Error, Result};
use crate::lattice::{build_binomial, build_trinomial, Branching, Lattice, StepSpec, TimeGrid};
use crate::models::{ModelInputs, TreeModel, World};
use crate::pricer::{price_european, Payoff};
use statrs::function::erf::erfc;

/// Call or put, for the closed-form oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionKind {
    Call,
    Put,
}

/// Moment of the lognormal increment `S(dt)/S(0)`: the exact value
/// `e^{z mu dt + z (z-1) sigma^2 dt / 2}` and its first-order form
/// `1 + z (mu + (z-1) sigma^2 / 2) dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmMoment {
    pub exact: f64,
    pub first_order: f64,
}

pub fn gbm_moment(zeta: f64, mu: f64, sigma: f64, dt: f64) -> Result<GbmMoment> {
    if zeta < 0.0 {
        return Err(Error::Domain(format!("moment order must be >= 0, got {zeta}")));
    }
    let rate = zeta * (mu + (zeta - 1.0) * 0.5 * sigma * sigma);
    Ok(GbmMoment {
        exact: (rate * dt).exp(),
        first_order: 1.0 + rate * dt,
    })
}

/// `E[factor^zeta]` over the step's branches.
pub fn lattice_step_moment(step: &StepSpec, zeta: f64) -> f64 {
    step.factors()
        .iter()
        .zip(step.probabilities())
        .map(|(f, p)| p * f.powf(zeta))
        .sum()
}

/// Mean and variance of the log-return of a binomial step under its own
/// probabilities.
pub fn logreturn_moments(step: &StepSpec) -> Result<(f64, f64)> {
    if step.branching() != Branching::Binomial {
        return Err(Error::Shape("log-return moments are defined for binomial steps".into()));
    }
    let mean: f64 = step
        .factors()
        .iter()
        .zip(step.probabilities())
        .map(|(f, p)| p * f.ln())
        .sum();
    let second: f64 = step
        .factors()
        .iter()
        .zip(step.probabilities())
        .map(|(f, p)| p * f.ln() * f.ln())
        .sum();
    Ok((mean, second - mean * mean))
}

fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Closed-form lognormal price with averaged coefficients. The put uses its
/// own formula rather than parity.
pub fn bs_price(s0: f64, strike: f64, maturity: f64, r_bar: f64, sigma_bar: f64, kind: OptionKind) -> Result<f64> {
    if !(s0 > 0.0 && strike > 0.0 && maturity > 0.0 && sigma_bar > 0.0) {
        return Err(Error::Domain(format!(
            "bs_price needs positive inputs: s0 = {s0}, strike = {strike}, T = {maturity}, sigma = {sigma_bar}"
        )));
    }
    let vol = sigma_bar * maturity.sqrt();
    let d1 = ((s0 / strike).ln() + (r_bar + 0.5 * sigma_bar * sigma_bar) * maturity) / vol;
    let d2 = d1 - vol;
    let df = (-r_bar * maturity).exp();
    Ok(match kind {
        OptionKind::Call => s0 * norm_cdf(d1) - strike * df * norm_cdf(d2),
        OptionKind::Put => strike * df * norm_cdf(-d2) - s0 * norm_cdf(-d1),
    })
}

/// Averaged coefficients `(r_bar, sigma_bar)` of a market over `[0, T]`.
pub fn averaged_coefficients(market: &MarketCoefficients, maturity: f64) -> Result<(f64, f64)> {
    let r_bar = market.rate.integrate(0.0, maturity)? / maturity;
    let var_bar = market.sigma.integrate_squared(0.0, maturity)? / maturity;
    Ok((r_bar, var_bar.sqrt()))
}

/// Terminal distribution `(node value, probability)` by forward induction
/// under the lattice's step probabilities.
pub fn forward_probabilities(lattice: &Lattice) -> Vec<(f64, f64)> {
    let mut probs = vec![1.0f64];
    for step in lattice.steps() {
        let p = step.probabilities();
        let width = probs.len() + p.len() - 1;
        let mut next = vec![0.0f64; width];
        for (i, &mass) in probs.iter().enumerate() {
            for (b, &pb) in p.iter().enumerate() {
                next[i + b] += mass * pb;
            }
        }
        probs = next;
    }
    lattice.terminal().iter().copied().zip(probs).collect()
}

/// One row of a lattice-vs-oracle convergence sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub steps: usize,
    pub lattice_price: f64,
    pub oracle_price: f64,
    pub abs_error: f64,
    /// Error-decay order against the previous row, `ln(e_prev/e) / ln(n/n_prev)`.
    pub order: Option<f64>,
}

/// Prices the payoff under `model` (risk-neutral world) for each step count
/// and tabulates the error against `oracle_price`.
pub fn convergence_study(
    model: &dyn TreeModel,
    inputs: &ModelInputs,
    s0: f64,
    maturity: f64,
    payoff: &Payoff,
    step_counts: &[usize],
    oracle_price: f64,
) -> Result<Vec<ConvergenceRow>> {
    if step_counts.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("step counts must be ascending".into()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(step_counts.len());
    for &n in step_counts {
        let grid = TimeGrid::new(maturity, n)?;
        let steps = model.steps(inputs, &grid, World::RiskNeutral)?;
        let lattice = match model.branching() {
            Branching::Binomial => build_binomial(s0, &grid, &steps)?,
            Branching::Trinomial => build_trinomial(s0, &grid, &steps)?,
        };
        let discounts: Result<Vec<f64>> = grid
            .step_end_times()
            .map(|t| inputs.market.step_discount(t, grid.dt()))
            .collect();
        let price = price_european(&lattice, &discounts?, payoff, false)?.root_value;
        let abs_error = (price - oracle_price).abs();
        let order = rows.last().and_then(|prev: &ConvergenceRow| {
            (prev.steps < n && abs_error > 0.0 && prev.abs_error > 0.0)
                .then(|| (prev.abs_error / abs_error).ln() / (n as f64 / prev.steps as f64).ln())
        });
        rows.push(ConvergenceRow {
            steps: n,
            lattice_price: price,
            oracle_price,
            abs_error,
            order,
        });
    }
    Ok(rows)
}

/// One-step moment comparison row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub zeta: f64,
    pub lattice_moment: f64,
    /// First-order analytic moment; the matching target of the schemes.
    pub analytic_moment: f64,
    /// `|lattice_moment - analytic_moment|`.
    pub residual: f64,
    /// Exact lognormal moment, for reference.
    pub exact_moment: f64,
    pub dt: f64,
}

/// Compares the step's moments against the drift-`m` lognormal increment for
/// each requested order.
pub fn moment_reports(step: &StepSpec, drift: f64, sigma: f64, dt: f64, zetas: &[f64]) -> Result<Vec<MomentReport>> {
    zetas
        .iter()
        .map(|&zeta| {
            let analytic = gbm_moment(zeta, drift, sigma, dt)?;
            let lattice_moment = lattice_step_moment(step, zeta);
            Ok(MomentReport {
                zeta,
                lattice_moment,
                analytic_moment: analytic.first_order,
                residual: (lattice_moment - analytic.first_order).abs(),
                exact_moment: analytic.exact,
                dt,
            })
        })
        .collect()
}
