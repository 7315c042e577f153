//! Recombining node grids for binomial and trinomial step specifications.

use crate::error::{Error, Result};

/// Uniform time grid: maturity `T`, `N` steps, `dt = T / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    maturity: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(maturity: f64, steps: usize) -> Result<Self> {
        if !(maturity > 0.0) || !maturity.is_finite() {
            return Err(Error::Domain(format!("maturity must be positive, got {maturity}")));
        }
        if steps == 0 {
            return Err(Error::Domain("steps must be >= 1".into()));
        }
        Ok(TimeGrid { maturity, steps })
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn step_count(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.maturity / self.steps as f64
    }

    /// Time at grid index `k`, `t_k = k * dt` for `k = 0..=N`.
    pub fn time_at(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    /// End times of every step: `t_1, ..., t_N`.
    pub fn step_end_times(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.steps).map(|k| self.time_at(k))
    }
}

/// Branch count of a lattice step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branching {
    Binomial,
    Trinomial,
}

const PROB_SUM_TOL: f64 = 1e-12;

/// One lattice step: multiplicative branch factors ordered `down -> [mid] ->
/// up` with matching branch probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSpec {
    factors: Vec<f64>,
    probabilities: Vec<f64>,
}

impl StepSpec {
    pub fn binomial(down: f64, up: f64, p_down: f64, p_up: f64) -> Result<Self> {
        Self::new(vec![down, up], vec![p_down, p_up])
    }

    pub fn trinomial(down: f64, mid: f64, up: f64, p_down: f64, p_mid: f64, p_up: f64) -> Result<Self> {
        Self::new(vec![down, mid, up], vec![p_down, p_mid, p_up])
    }

    fn new(factors: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if factors.len() != probabilities.len() || !(factors.len() == 2 || factors.len() == 3) {
            return Err(Error::Shape(format!(
                "step needs 2 or 3 matching factors and probabilities, got {} and {}",
                factors.len(),
                probabilities.len()
            )));
        }
        if factors.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
            return Err(Error::ParameterRegime(format!("branch factors must be positive: {factors:?}")));
        }
        // Ties are tolerated (degenerate steps such as all-ones are legal);
        // model constructors always produce strictly increasing factors.
        if factors.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Shape(format!(
                "branch factors must be ordered down -> up: {factors:?}"
            )));
        }
        if probabilities.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::ParameterRegime(format!(
                "branch probabilities must lie in (0,1): {probabilities:?}"
            )));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::ParameterRegime(format!(
                "branch probabilities must sum to 1, got {sum}"
            )));
        }
        Ok(StepSpec { factors, probabilities })
    }

    pub fn branching(&self) -> Branching {
        if self.factors.len() == 2 {
            Branching::Binomial
        } else {
            Branching::Trinomial
        }
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn down(&self) -> f64 {
        self.factors[0]
    }

    pub fn up(&self) -> f64 {
        *self.factors.last().unwrap()
    }

    /// Middle factor; trinomial steps only.
    pub fn mid(&self) -> Option<f64> {
        (self.factors.len() == 3).then(|| self.factors[1])
    }

    pub fn prob_down(&self) -> f64 {
        self.probabilities[0]
    }

    pub fn prob_up(&self) -> f64 {
        *self.probabilities.last().unwrap()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.factors.windows(2).all(|w| w[1] > w[0])
    }
}

/// A recombining lattice of node prices with the step list that produced it.
///
/// Binomial levels hold `n + 1` nodes indexed by up-count `j = 0..=n`;
/// trinomial levels hold `2n + 1` nodes indexed by net up-count
/// `j = -n..=n` (stored offset by `n`).
#[derive(Debug, Clone)]
pub struct Lattice {
    branching: Branching,
    levels: Vec<Vec<f64>>,
    steps: Vec<StepSpec>,
    grid: TimeGrid,
}

impl Lattice {
    pub fn branching(&self) -> Branching {
        self.branching
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn steps(&self) -> &[StepSpec] {
        &self.steps
    }

    /// Node prices at level `n`.
    pub fn level(&self, n: usize) -> &[f64] {
        &self.levels[n]
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn root(&self) -> f64 {
        self.levels[0][0]
    }

    pub fn terminal(&self) -> &[f64] {
        self.levels.last().unwrap()
    }

    /// Signed node index for position `i` within level `n`: the up-count for
    /// binomial lattices, the net up-count (`-n..=n`) for trinomial ones.
    pub fn node_index(&self, n: usize, i: usize) -> i64 {
        match self.branching {
            Branching::Binomial => i as i64,
            Branching::Trinomial => i as i64 - n as i64,
        }
    }
}

fn validate_steps(grid: &TimeGrid, steps: &[StepSpec], want: Branching) -> Result<()> {
    if steps.len() != grid.step_count() {
        return Err(Error::Shape(format!(
            "expected {} steps for the grid, got {}",
            grid.step_count(),
            steps.len()
        )));
    }
    if let Some(bad) = steps.iter().position(|s| s.branching() != want) {
        return Err(Error::Shape(format!("step {bad} has the wrong branch count for {want:?}")));
    }
    Ok(())
}

fn uniform(steps: &[StepSpec]) -> bool {
    steps.windows(2).all(|w| w[0] == w[1])
}

/// Builds a recombining binomial lattice.
///
/// With a uniform step list the node value at `(n, j)` is the classical
/// product `S0 * up^j * down^(n-j)`, which every path ordering reproduces
/// exactly. Non-uniform step lists do not commute, so levels are placed by a
/// moment-matched reduction instead: level `n` keeps the geometric ladder
/// `S0 * exp(B_n + c_n + j * gbar_n)` whose first two moments under the step
/// probabilities equal those of the exact path product process, with
/// `B_n = sum ln down_k`, `gbar_n` the root-mean-square of
/// `ln(up_k/down_k)`, and `c_n` the drift correction
/// `sum prob_up_k (ln(up_k/down_k) - gbar_n)`.
pub fn build_binomial(s0: f64, grid: &TimeGrid, steps: &[StepSpec]) -> Result<Lattice> {
    if !(s0 > 0.0) || !s0.is_finite() {
        return Err(Error::Domain(format!("spot must be positive, got {s0}")));
    }
    validate_steps(grid, steps, Branching::Binomial)?;

    let n_steps = steps.len();
    let mut levels = Vec::with_capacity(n_steps + 1);
    levels.push(vec![s0]);

    if uniform(steps) {
        let up = steps[0].up();
        let down = steps[0].down();
        for n in 1..=n_steps {
            let mut level = Vec::with_capacity(n + 1);
            let prev = &levels[n - 1];
            level.push(prev[0] * down);
            for j in 1..=n {
                level.push(prev[j - 1] * up);
            }
            levels.push(level);
        }
    } else {
        let mut sum_ln_down = 0.0;
        let mut sum_gap_sq = 0.0;
        let mut sum_p_gap = 0.0;
        let mut sum_p = 0.0;
        for (n, step) in steps.iter().enumerate() {
            let gap = step.up().ln() - step.down().ln();
            sum_ln_down += step.down().ln();
            sum_gap_sq += gap * gap;
            sum_p_gap += step.prob_up() * gap;
            sum_p += step.prob_up();
            let gbar = (sum_gap_sq / (n + 1) as f64).sqrt();
            let c = sum_p_gap - gbar * sum_p;
            let level = (0..=n + 1)
                .map(|j| s0 * (sum_ln_down + c + j as f64 * gbar).exp())
                .collect();
            levels.push(level);
        }
    }

    Ok(Lattice {
        branching: Branching::Binomial,
        levels,
        steps: steps.to_vec(),
        grid: *grid,
    })
}

/// Builds a recombining trinomial lattice with the minimal-swing convention:
/// node `(n, j)` is `S0 * up^j * mid^(n-j)` for `j >= 0` and
/// `S0 * down^|j| * mid^(n-|j|)` for `j < 0` (per-step factors applied in
/// time order when the steps differ).
pub fn build_trinomial(s0: f64, grid: &TimeGrid, steps: &[StepSpec]) -> Result<Lattice> {
    if !(s0 > 0.0) || !s0.is_finite() {
        return Err(Error::Domain(format!("spot must be positive, got {s0}")));
    }
    validate_steps(grid, steps, Branching::Trinomial)?;

    let n_steps = steps.len();
    let mut levels = Vec::with_capacity(n_steps + 1);
    levels.push(vec![s0]);
    for n in 1..=n_steps {
        // The minimal-swing path to an interior node extends the previous
        // level's path by a mid move; only the two edges swing.
        let step = &steps[n - 1];
        let mid = step.mid().unwrap();
        let prev = &levels[n - 1];
        let mut level = Vec::with_capacity(2 * n + 1);
        level.push(prev[0] * step.down());
        level.extend(prev.iter().map(|v| v * mid));
        level.push(prev[prev.len() - 1] * step.up());
        levels.push(level);
    }

    Ok(Lattice {
        branching: Branching::Trinomial,
        levels,
        steps: steps.to_vec(),
        grid: *grid,
    })
}

/// Quantifies how far a step list is from exact recombination.
///
/// Binomial: max over adjacent steps of
/// `|up_k down_{k+1} - down_k up_{k+1}|` relative to the larger product.
/// Trinomial: max over steps of `|up down - mid^2| / mid^2`.
pub fn recombination_residual(steps: &[StepSpec]) -> Result<f64> {
    if steps.len() < 2 {
        return Err(Error::Shape("recombination residual needs at least 2 steps".into()));
    }
    let branching = steps[0].branching();
    if steps.iter().any(|s| s.branching() != branching) {
        return Err(Error::Shape("mixed branch counts in step list".into()));
    }
    let mut worst: f64 = 0.0;
    match branching {
        Branching::Binomial => {
            for pair in steps.windows(2) {
                let a = pair[0].up() * pair[1].down();
                let b = pair[0].down() * pair[1].up();
                worst = worst.max((a - b).abs() / a.max(b));
            }
        }
        Branching::Trinomial => {
            for step in steps {
                let m2 = step.mid().unwrap().powi(2);
                worst = worst.max((step.up() * step.down() - m2).abs() / m2);
            }
        }
    }
    Ok(worst)
}
