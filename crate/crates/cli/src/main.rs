//! `treeprice`: price terminal-payoff options on binomial and trinomial
//! lattices with time-dependent coefficients.

mod config;
mod report;

use clap::{Args, Parser, ValueEnum};
use config::{PayoffConfigSummary, Run, RunConfig};
use report::{Cell, Format, Report};
use std::path::PathBuf;
use std::process::ExitCode;
use treeprice_core::{
    build_binomial, build_trinomial, bs_price, convergence_study, hedge_report, moment_reports,
    price_european, step_discounts, Branching, Error as CoreError, HedgeForm, Lattice, OptionKind,
    TimeGrid, World,
};

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or arguments; exit code 2.
    Config(String),
    /// Operation the selected model does not support; exit code 3.
    Unsupported(String),
    /// Valid inputs outside the model's parameter regime; exit code 4.
    Regime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Unsupported(_) => 3,
            CliError::Regime(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Unsupported(m) | CliError::Regime(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Unsupported(m) => CliError::Unsupported(m),
            CoreError::ParameterRegime(m) => CliError::Regime(m),
            CoreError::Domain(m) | CoreError::Shape(m) | CoreError::ResourceGuard(m) => {
                CliError::Config(m)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args, Debug)]
struct Common {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
}

#[derive(Parser, Debug)]
#[command(name = "treeprice", version, about = "Lattice option pricing with time-dependent coefficients")]
enum Cli {
    /// Price the configured payoff by risk-neutral backward induction.
    Price(Common),
    /// One-step moments of the configured model against the lognormal targets.
    Moments {
        #[command(flatten)]
        common: Common,
        /// Moment orders to report.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0, 3.0, 4.0])]
        zetas: Vec<f64>,
    },
    /// Lattice price versus the closed-form oracle across step counts.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Ascending step counts to sweep.
        #[arg(long, value_delimiter = ',', default_values_t = vec![100, 200, 400, 800])]
        steps_list: Vec<usize>,
    },
    /// Per-node hedge ratios (binomial models only).
    Hedge(Common),
    /// Dump the lattice node values level by level.
    Tree {
        #[command(flatten)]
        common: Common,
        /// Append the configured world's branch probabilities per level.
        #[arg(long)]
        probs: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    match cli {
        Cli::Price(common) => {
            let run = load(&common)?;
            Ok(cmd_price(&run)?.render(common.format.into()))
        }
        Cli::Moments { common, zetas } => {
            let run = load(&common)?;
            Ok(cmd_moments(&run, &zetas)?.render(common.format.into()))
        }
        Cli::Converge { common, steps_list } => {
            let run = load(&common)?;
            Ok(cmd_converge(&run, &steps_list)?.render(common.format.into()))
        }
        Cli::Hedge(common) => {
            let run = load(&common)?;
            Ok(cmd_hedge(&run)?.render(common.format.into()))
        }
        Cli::Tree { common, probs } => {
            let run = load(&common)?;
            Ok(cmd_tree(&run, probs)?.render(common.format.into()))
        }
    }
}

fn load(common: &Common) -> Result<Run, CliError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let parsed: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
    config::validate(parsed)
}

fn grid_for(run: &Run) -> Result<TimeGrid, CliError> {
    if run.steps == 0 {
        return Err(CliError::Config("grid.steps must be >= 1".into()));
    }
    Ok(TimeGrid::new(run.maturity, run.steps)?)
}

fn build_lattice(run: &Run, grid: &TimeGrid, world: World) -> Result<Lattice, CliError> {
    let steps = run.model.steps(&run.inputs(), grid, world)?;
    Ok(match run.model.branching() {
        Branching::Binomial => build_binomial(run.spot, grid, &steps)?,
        Branching::Trinomial => build_trinomial(run.spot, grid, &steps)?,
    })
}

/// Closed-form oracle when the limit law is available in closed form:
/// constant or linear sigma and rate curves, call or put payoff.
fn oracle_price(run: &Run) -> Result<Option<f64>, CliError> {
    let kind = match run.payoff_config {
        PayoffConfigSummary::Call { .. } => OptionKind::Call,
        PayoffConfigSummary::Put { .. } => OptionKind::Put,
        PayoffConfigSummary::Constant => return Ok(None),
    };
    let strike = match run.payoff_config {
        PayoffConfigSummary::Call { strike } | PayoffConfigSummary::Put { strike } => strike,
        PayoffConfigSummary::Constant => unreachable!(),
    };
    if !(run.market.sigma.is_constant_or_linear() && run.market.rate.is_constant_or_linear()) {
        return Ok(None);
    }
    let (r_bar, sigma_bar) = treeprice_core::averaged_coefficients(&run.market, run.maturity)?;
    Ok(Some(bs_price(run.spot, strike, run.maturity, r_bar, sigma_bar, kind)?))
}

fn cmd_price(run: &Run) -> Result<Report, CliError> {
    let grid = grid_for(run)?;
    let lattice = build_lattice(run, &grid, World::RiskNeutral)?;
    let discounts = step_discounts(&run.market, &grid)?;
    let price = price_european(&lattice, &discounts, &run.payoff, false)?.root_value;

    let mut row = vec![
        Cell::Text(run.model.name().to_string()),
        Cell::Int(run.steps as i64),
        Cell::Num(price),
    ];
    match oracle_price(run)? {
        Some(oracle) => {
            row.push(Cell::Num(oracle));
            row.push(Cell::Num((price - oracle).abs()));
        }
        None => {
            row.push(Cell::Empty);
            row.push(Cell::Empty);
        }
    }
    Ok(Report {
        columns: vec!["model", "steps", "root_price", "oracle_price", "abs_error"],
        rows: vec![row],
        scalar_object: true,
    })
}

fn cmd_moments(run: &Run, zetas: &[f64]) -> Result<Report, CliError> {
    if let Some(bad) = zetas.iter().find(|z| **z < 0.0 || !z.is_finite()) {
        return Err(CliError::Config(format!("zetas must be >= 0, got {bad}")));
    }
    let grid = grid_for(run)?;
    let dt = grid.dt();
    let t_end = grid.time_at(1);
    let step = run.model.step(&run.inputs(), t_end, dt, run.world)?;
    let drift = match run.world {
        World::Natural => run.market.mu_at(t_end)?,
        World::RiskNeutral => run.market.rate_at(t_end)?,
    };
    let sigma = run.market.sigma_at(t_end)?;
    let rows = moment_reports(&step, drift, sigma, dt, zetas)?;
    Ok(Report {
        columns: vec!["zeta", "dt", "lattice_moment", "analytic_moment", "residual", "exact_moment"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    Cell::Num(r.zeta),
                    Cell::Num(r.dt),
                    Cell::Num(r.lattice_moment),
                    Cell::Num(r.analytic_moment),
                    Cell::Num(r.residual),
                    Cell::Num(r.exact_moment),
                ]
            })
            .collect(),
        scalar_object: false,
    })
}

fn cmd_converge(run: &Run, steps_list: &[usize]) -> Result<Report, CliError> {
    if steps_list.is_empty() || steps_list.windows(2).any(|w| w[1] < w[0]) {
        return Err(CliError::Config(format!(
            "steps-list must be non-empty and ascending, got {steps_list:?}"
        )));
    }
    if steps_list[0] == 0 {
        return Err(CliError::Config("steps-list entries must be >= 1".into()));
    }
    let oracle = oracle_price(run)?.ok_or_else(|| {
        CliError::Config(
            "converge needs a closed-form oracle: call/put payoff with constant or linear sigma and rate".into(),
        )
    })?;
    let rows = convergence_study(
        run.model,
        &run.inputs(),
        run.spot,
        run.maturity,
        &run.payoff,
        steps_list,
        oracle,
    )?;
    Ok(Report {
        columns: vec!["steps", "lattice_price", "oracle_price", "abs_error", "order"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    Cell::Int(r.steps as i64),
                    Cell::Num(r.lattice_price),
                    Cell::Num(r.oracle_price),
                    Cell::Num(r.abs_error),
                    r.order.map_or(Cell::Empty, Cell::Num),
                ]
            })
            .collect(),
        scalar_object: false,
    })
}

fn cmd_hedge(run: &Run) -> Result<Report, CliError> {
    let grid = grid_for(run)?;
    let lattice = build_lattice(run, &grid, World::RiskNeutral)?;
    let discounts = step_discounts(&run.market, &grid)?;
    let result = hedge_report(
        &lattice,
        &discounts,
        &run.payoff,
        run.model,
        &run.inputs(),
        HedgeForm::SmallStep,
    )?;
    let hedges = result.hedge_ratios.expect("hedge_report retains ratios");
    let mut rows = Vec::new();
    for (level, psis) in hedges.iter().enumerate() {
        for (i, psi) in psis.iter().enumerate() {
            rows.push(vec![
                Cell::Int(level as i64),
                Cell::Int(lattice.node_index(level, i)),
                Cell::Num(lattice.level(level)[i]),
                Cell::Num(*psi),
            ]);
        }
    }
    Ok(Report {
        columns: vec!["level", "node", "spot", "psi"],
        rows,
        scalar_object: false,
    })
}

fn cmd_tree(run: &Run, with_probs: bool) -> Result<Report, CliError> {
    let mut columns = vec!["level", "node", "value"];
    // A zero-step grid is the degenerate single-node tree.
    if run.steps == 0 {
        if with_probs {
            return Err(CliError::Config("grid.steps must be >= 1 to report probabilities".into()));
        }
        return Ok(Report {
            columns,
            rows: vec![vec![Cell::Int(0), Cell::Int(0), Cell::Num(run.spot)]],
            scalar_object: false,
        });
    }
    let grid = grid_for(run)?;
    let lattice = build_lattice(run, &grid, run.world)?;
    if with_probs {
        match run.model.branching() {
            Branching::Binomial => columns.extend(["prob_down", "prob_up"]),
            Branching::Trinomial => columns.extend(["prob_down", "prob_mid", "prob_up"]),
        }
    }
    let mut rows = Vec::new();
    for level in 0..lattice.level_count() {
        let step = lattice.steps().get(level);
        for (i, value) in lattice.level(level).iter().enumerate() {
            let mut row = vec![
                Cell::Int(level as i64),
                Cell::Int(lattice.node_index(level, i)),
                Cell::Num(*value),
            ];
            if with_probs {
                match step {
                    Some(s) => row.extend(s.probabilities().iter().map(|p| Cell::Num(*p))),
                    None => row.resize(columns.len(), Cell::Empty),
                }
            }
            rows.push(row);
        }
    }
    Ok(Report { columns, rows, scalar_object: false })
}
