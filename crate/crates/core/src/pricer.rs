//! Backward-induction valuation of terminal-payoff derivatives, per-node
//! hedge ratios for binomial schemes, and an exhaustive path-enumeration
//! check for small trees.

use crate::error::{Error, Result};
use crate::lattice::{Branching, Lattice, StepSpec};
use crate::models::{HedgeForm, ModelInputs, TreeModel};

/// Terminal payoff `g(S(T))`.
pub enum Payoff {
    Call { strike: f64 },
    Put { strike: f64 },
    Custom(Box<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Payoff {
    pub fn call(strike: f64) -> Self {
        Payoff::Call { strike }
    }

    pub fn put(strike: f64) -> Self {
        Payoff::Put { strike }
    }

    pub fn constant(value: f64) -> Self {
        Payoff::Custom(Box::new(move |_| value))
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Payoff::Call { strike } => (s - strike).max(0.0),
            Payoff::Put { strike } => (strike - s).max(0.0),
            Payoff::Custom(g) => g(s),
        }
    }
}

impl std::fmt::Debug for Payoff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Payoff::Call { strike } => write!(f, "Call {{ strike: {strike} }}"),
            Payoff::Put { strike } => write!(f, "Put {{ strike: {strike} }}"),
            Payoff::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Valuation output. Per-node values and hedge ratios are retained only on
/// request to keep large sweeps light.
#[derive(Debug, Clone, Default)]
pub struct PriceResult {
    pub root_value: f64,
    /// Derivative value per node, level by level.
    pub values: Option<Vec<Vec<f64>>>,
    /// Hedge ratio per non-terminal node, level by level (binomial only).
    pub hedge_ratios: Option<Vec<Vec<f64>>>,
}

fn check_discounts(lattice: &Lattice, discounts: &[f64]) -> Result<()> {
    if discounts.len() != lattice.steps().len() {
        return Err(Error::Shape(format!(
            "{} discount factors for {} steps",
            discounts.len(),
            lattice.steps().len()
        )));
    }
    Ok(())
}

fn roll_back(values: &mut Vec<f64>, step: &StepSpec, discount: f64) {
    let probs = step.probabilities();
    match step.branching() {
        Branching::Binomial => {
            for j in 0..values.len() - 1 {
                values[j] = discount * (probs[0] * values[j] + probs[1] * values[j + 1]);
            }
            values.pop();
        }
        Branching::Trinomial => {
            for j in 0..values.len() - 2 {
                values[j] = discount
                    * (probs[0] * values[j] + probs[1] * values[j + 1] + probs[2] * values[j + 2]);
            }
            values.pop();
            values.pop();
        }
    }
}

/// Prices a European claim by backward induction under the lattice's step
/// probabilities, discounting each step with the matching factor.
pub fn price_european(
    lattice: &Lattice,
    discounts: &[f64],
    payoff: &Payoff,
    retain_values: bool,
) -> Result<PriceResult> {
    check_discounts(lattice, discounts)?;
    let n_steps = lattice.steps().len();
    let mut values: Vec<f64> = lattice.terminal().iter().map(|&s| payoff.eval(s)).collect();
    let mut retained = retain_values.then(|| {
        let mut v = vec![Vec::new(); n_steps + 1];
        v[n_steps] = values.clone();
        v
    });
    for n in (0..n_steps).rev() {
        roll_back(&mut values, &lattice.steps()[n], discounts[n]);
        if let Some(levels) = retained.as_mut() {
            levels[n] = values.clone();
        }
    }
    debug_assert_eq!(values.len(), 1);
    Ok(PriceResult {
        root_value: values[0],
        values: retained,
        hedge_ratios: None,
    })
}

/// Prices the claim and attaches the model's hedge ratio at every
/// non-terminal node. Refuses trinomial lattices.
pub fn hedge_report(
    lattice: &Lattice,
    discounts: &[f64],
    payoff: &Payoff,
    model: &dyn TreeModel,
    inputs: &ModelInputs,
    form: HedgeForm,
) -> Result<PriceResult> {
    if lattice.branching() == Branching::Trinomial {
        return Err(Error::Unsupported(
            "hedge ratios need a two-branch step; the trinomial one-step market is incomplete".into(),
        ));
    }
    let mut result = price_european(lattice, discounts, payoff, true)?;
    let values = result.values.as_ref().unwrap();
    let grid = lattice.grid();
    let mut hedges = Vec::with_capacity(lattice.steps().len());
    for n in 0..lattice.steps().len() {
        let t_end = grid.time_at(n + 1);
        let mut level = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let psi = model.hedge_ratio(
                inputs,
                t_end,
                grid.dt(),
                lattice.level(n)[j],
                values[n + 1][j + 1],
                values[n + 1][j],
                form,
            )?;
            level.push(psi);
        }
        hedges.push(level);
    }
    result.hedge_ratios = Some(hedges);
    Ok(result)
}

const MAX_BINOMIAL_PATH_STEPS: usize = 12;
const MAX_TRINOMIAL_PATH_STEPS: usize = 8;

/// Exact expectation over every sign path: each path's stock value is the
/// time-ordered product of its branch factors, not the recombined node
/// value, so this is an independent check of the lattice reduction.
pub fn brute_force_price(
    s0: f64,
    steps: &[StepSpec],
    discounts: &[f64],
    payoff: &Payoff,
) -> Result<f64> {
    if steps.is_empty() {
        return Err(Error::Shape("brute force needs at least one step".into()));
    }
    if !(s0 > 0.0) {
        return Err(Error::Domain(format!("spot must be positive, got {s0}")));
    }
    if discounts.len() != steps.len() {
        return Err(Error::Shape(format!(
            "{} discount factors for {} steps",
            discounts.len(),
            steps.len()
        )));
    }
    let branching = steps[0].branching();
    if steps.iter().any(|s| s.branching() != branching) {
        return Err(Error::Shape("mixed branch counts in step list".into()));
    }
    let (branches, max_steps) = match branching {
        Branching::Binomial => (2usize, MAX_BINOMIAL_PATH_STEPS),
        Branching::Trinomial => (3usize, MAX_TRINOMIAL_PATH_STEPS),
    };
    if steps.len() > max_steps {
        return Err(Error::ResourceGuard(format!(
            "{} steps exceeds the {} exhaustive-path limit of {}",
            steps.len(),
            branches,
            max_steps
        )));
    }

    let n = steps.len();
    let mut expectation = 0.0;
    let mut branch = vec![0usize; n];
    loop {
        let mut stock = s0;
        let mut prob = 1.0;
        for (k, step) in steps.iter().enumerate() {
            stock *= step.factors()[branch[k]];
            prob *= step.probabilities()[branch[k]];
        }
        expectation += prob * payoff.eval(stock);

        // advance the mixed-radix path counter
        let mut k = 0;
        loop {
            if k == n {
                let discount: f64 = discounts.iter().product();
                return Ok(discount * expectation);
            }
            branch[k] += 1;
            if branch[k] < branches {
                break;
            }
            branch[k] = 0;
            k += 1;
        }
    }
}
