//! Acceptance suite: ten numbered criteria, one test per criterion, each
//! ending with a single pass/fail line (run with `--nocapture` to see the
//! lines for passing tests).
//!
//! Standard instance: S0 = K = 100, r = 0.05, sigma = 0.2, T = 1, drift
//! mu = 0.1 where a natural-world drift is needed, European call.
//!
//! Three assertions are known not to hold for these schemes and fail
//! honestly rather than being loosened:
//!
//! * criterion 2: the KSRF risk-neutral tree keeps the natural-world branch
//!   factors and only reweights them with q*, so its one-step variance under
//!   q* is off by O(dt^{3/2}) and the price error decays like N^{-1/2}
//!   (measured err * sqrt(N) ~ 1.4 for p = 0.3 / 0.7). At N = 2000 that is
//!   ~0.032, above the 0.02 gate asserted here; ~N = 8000 would be needed.
//! * criterion 5: the KSRF one-step moment residual is
//!   a dt^{3/2} + b dt^2 with a and b of opposite sign for some (p, zeta)
//!   combos (e.g. p = 0.8, zeta = 3), so the per-decade shrink dips below
//!   the 30x gate even though the residual stays below C dt^{3/2}.
//! * criterion 8: trinomial recombination is approximate
//!   (|up*down - mid^2| ~ C dt^2 > 0), so exhaustive path enumeration and
//!   the recombined lattice differ by ~3e-4 relative at N = 8, T = 1, far
//!   above the 1e-12 gate asserted here. The binomial halves of the
//!   criterion hold and pass.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::time::Instant;
use treeprice_core::*;

const S0: f64 = 100.0;
const STRIKE: f64 = 100.0;
const MATURITY: f64 = 1.0;
const MU: f64 = 0.1;
const SIGMA: f64 = 0.2;
const RATE: f64 = 0.05;

fn standard_market() -> MarketCoefficients {
    MarketCoefficients::new(
        CoefficientCurve::constant(MU),
        CoefficientCurve::constant(SIGMA),
        CoefficientCurve::constant(RATE),
    )
}

fn td_market() -> MarketCoefficients {
    MarketCoefficients::new(
        CoefficientCurve::constant(MU),
        CoefficientCurve::linear(0.15, 0.1),
        CoefficientCurve::linear(0.03, 0.02),
    )
}

fn build(model: &dyn TreeModel, inputs: &ModelInputs, grid: &TimeGrid, world: World) -> Lattice {
    let steps = model.steps(inputs, grid, world).unwrap();
    match model.branching() {
        Branching::Binomial => build_binomial(S0, grid, &steps).unwrap(),
        Branching::Trinomial => build_trinomial(S0, grid, &steps).unwrap(),
    }
}

fn price_call(model: &dyn TreeModel, inputs: &ModelInputs, n: usize) -> f64 {
    let grid = TimeGrid::new(MATURITY, n).unwrap();
    let lattice = build(model, inputs, &grid, World::RiskNeutral);
    let discounts = step_discounts(inputs.market, &grid).unwrap();
    price_european(&lattice, &discounts, &Payoff::call(STRIKE), false)
        .unwrap()
        .root_value
}

fn standard_oracle() -> f64 {
    bs_price(S0, STRIKE, MATURITY, RATE, SIGMA, OptionKind::Call).unwrap()
}

#[test]
fn criterion_01_crr_constant_coefficient_oracle_convergence() {
    let started = Instant::now();
    let market = standard_market();
    let inputs = ModelInputs::new(&market);
    let oracle = standard_oracle();
    assert!((oracle - 10.4506).abs() < 5e-5, "oracle sanity: {oracle}");

    let price = price_call(find_model("crr-td").unwrap(), &inputs, 2000);
    let err = (price - oracle).abs();
    let elapsed = started.elapsed();
    assert!(err <= 0.01, "criterion 1: FAIL - |{price} - {oracle}| = {err} > 0.01");
    assert!(elapsed.as_secs_f64() < 1.0, "criterion 1: FAIL - runtime {elapsed:?} >= 1s");
    println!("criterion 1 (crr-td vs closed form, N=2000): PASS - err {err:.6}, {elapsed:?}");
}

#[test]
fn criterion_02_ksrf_oracle_convergence_across_p() {
    let started = Instant::now();
    let market = standard_market();
    let oracle = standard_oracle();
    let model = find_model("ksrf-td").unwrap();

    let mut failures = Vec::new();
    for p in [0.3, 0.5, 0.7] {
        let p_curve = CoefficientCurve::constant(p);
        let inputs = ModelInputs::with_up_probability(&market, &p_curve);
        let price = price_call(model, &inputs, 2000);
        let err = (price - oracle).abs();
        println!("  ksrf-td p={p}: price {price:.6}, err {err:.6} (gate 0.02)");
        if err > 0.02 {
            failures.push(format!("p={p}: err {err:.6} > 0.02"));
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 3.0, "criterion 2: FAIL - runtime {elapsed:?} >= 3s");
    if failures.is_empty() {
        println!("criterion 2 (ksrf-td vs closed form, N=2000): PASS - {elapsed:?}");
    } else {
        println!("criterion 2 (ksrf-td vs closed form, N=2000): FAIL - {failures:?}");
        panic!(
            "criterion 2: FAIL - {failures:?}; the q*-reweighted tree converges at O(1/sqrt(N)) \
             (err*sqrt(N) ~ 1.4), so the 0.02 gate needs ~N=8000"
        );
    }
}

#[test]
fn criterion_03_trinomial_oracle_convergence_and_curves() {
    let started = Instant::now();
    let market = standard_market();
    let inputs = ModelInputs::new(&market);
    let oracle = standard_oracle();

    let new_price = price_call(find_model("tri-new").unwrap(), &inputs, 2000);
    let classical_price = price_call(find_model("tri-classical").unwrap(), &inputs, 2000);
    let new_err = (new_price - oracle).abs();
    let classical_err = (classical_price - oracle).abs();
    assert!(new_err <= 0.01, "criterion 3: FAIL - tri-new err {new_err} > 0.01");
    assert!(classical_err <= 0.01, "criterion 3: FAIL - tri-classical err {classical_err} > 0.01");

    // both schemes' error-vs-N curves, as cmd_converge emits them
    for name in ["tri-new", "tri-classical"] {
        let rows = convergence_study(
            find_model(name).unwrap(),
            &inputs,
            S0,
            MATURITY,
            &Payoff::call(STRIKE),
            &[250, 500, 1000, 2000],
            oracle,
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.abs_error < 0.02));
        println!(
            "  {name} error curve: {:?}",
            rows.iter().map(|r| (r.steps, r.abs_error)).collect::<Vec<_>>()
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 2.0, "criterion 3: FAIL - runtime {elapsed:?} >= 2s");
    println!(
        "criterion 3 (trinomial vs closed form, N=2000): PASS - tri-new err {new_err:.6}, tri-classical err {classical_err:.6}, {elapsed:?}"
    );
}

#[test]
fn criterion_04_time_dependent_oracle() {
    let started = Instant::now();
    let market = td_market();
    let inputs = ModelInputs::new(&market);

    let sigma_bar_sq = market.sigma.integrate_squared(0.0, MATURITY).unwrap() / MATURITY;
    assert!((sigma_bar_sq - 0.0408333).abs() < 5e-8, "sigma_bar^2 = {sigma_bar_sq}");
    let (r_bar, sigma_bar) = averaged_coefficients(&market, MATURITY).unwrap();
    assert!((r_bar - 0.04).abs() < 1e-14);
    assert!((sigma_bar - 0.2020726).abs() < 5e-8);

    let oracle = bs_price(S0, STRIKE, MATURITY, r_bar, sigma_bar, OptionKind::Call).unwrap();
    let price = price_call(find_model("crr-td").unwrap(), &inputs, 2000);
    let err = (price - oracle).abs();
    let elapsed = started.elapsed();
    assert!(err <= 0.02, "criterion 4: FAIL - |{price} - {oracle}| = {err} > 0.02");
    assert!(elapsed.as_secs_f64() < 1.0, "criterion 4: FAIL - runtime {elapsed:?} >= 1s");
    println!("criterion 4 (crr-td, sigma(t)=0.15+0.1t, r(t)=0.03+0.02t): PASS - err {err:.6}, {elapsed:?}");
}

#[test]
fn criterion_05_all_moments_suite() {
    const ZETAS: [f64; 5] = [0.5, 1.0, 2.0, 3.0, 4.0];
    const DTS: [f64; 3] = [1e-2, 1e-3, 1e-4];
    // residuals at or below this are exact identities drowned in rounding;
    // a shrink ratio of noise against noise carries no information
    const NOISE: f64 = 1e-13;

    struct Case {
        label: String,
        spec_at: Box<dyn Fn(f64) -> StepSpec>,
        drift: f64,
        min_shrink: f64,
    }

    let mut cases: Vec<Case> = Vec::new();
    for p in [0.2, 0.5, 0.8] {
        cases.push(Case {
            label: format!("ksrf p={p}"),
            spec_at: Box::new(move |dt| {
                let (u, d) = models::ksrf_factors(MU, SIGMA, p, dt).unwrap();
                StepSpec::binomial(d, u, 1.0 - p, p).unwrap()
            }),
            drift: MU,
            min_shrink: 30.0,
        });
    }
    cases.push(Case {
        label: "tri-new natural".into(),
        spec_at: Box::new(|dt| models::new_trinomial_natural_step(MU, SIGMA, dt).unwrap().step_spec()),
        drift: MU,
        min_shrink: 90.0,
    });
    cases.push(Case {
        label: "tri-new risk-neutral".into(),
        spec_at: Box::new(|dt| {
            models::new_trinomial_risk_neutral_step(RATE, SIGMA, dt).unwrap().step_spec()
        }),
        drift: RATE,
        min_shrink: 90.0,
    });

    let mut failures = Vec::new();
    for case in &cases {
        for zeta in ZETAS {
            let residuals: Vec<f64> = DTS
                .iter()
                .map(|&dt| {
                    let step = (case.spec_at)(dt);
                    let target = gbm_moment(zeta, case.drift, SIGMA, dt).unwrap().first_order;
                    (lattice_step_moment(&step, zeta) - target).abs()
                })
                .collect();
            for decade in 0..2 {
                let (big, small) = (residuals[decade], residuals[decade + 1]);
                if big <= NOISE && small <= NOISE {
                    continue; // exact identity (zeta = 1)
                }
                let shrink = big / small;
                if shrink < case.min_shrink {
                    failures.push(format!(
                        "{} zeta={zeta} dt {:.0e}->{:.0e}: shrink {shrink:.2} < {}",
                        case.label,
                        DTS[decade],
                        DTS[decade + 1],
                        case.min_shrink
                    ));
                }
            }
        }
    }

    // spot check: tri-new natural, zeta = 2, dt = 1e-2
    let step = models::new_trinomial_natural_step(MU, SIGMA, 1e-2).unwrap().step_spec();
    let target = gbm_moment(2.0, MU, SIGMA, 1e-2).unwrap().first_order;
    let residual = (lattice_step_moment(&step, 2.0) - target).abs();
    assert!(
        (0.9e-6..=1.1e-6).contains(&residual),
        "criterion 5: FAIL - spot residual {residual:e} not ~1.0e-6"
    );

    if failures.is_empty() {
        println!("criterion 5 (one-step moment matching orders): PASS");
    } else {
        println!("criterion 5 (one-step moment matching orders): FAIL - {failures:?}");
        panic!(
            "criterion 5: FAIL - {failures:?}; the KSRF residual a*dt^1.5 + b*dt^2 has opposite-sign \
             a, b at these combos, so the empirical per-decade shrink falls short of 30x while the \
             residual itself stays below C*dt^1.5"
        );
    }
}

#[test]
fn criterion_06_martingale_discount_checks() {
    const DTS: [f64; 3] = [1e-2, 1e-3, 1e-4];
    let market = standard_market();
    let p_curve = CoefficientCurve::constant(0.52);

    type SpecBuilder = Box<dyn Fn(f64) -> StepSpec>;
    let spec_builders: Vec<(&str, SpecBuilder)> = vec![
        ("crr-td", {
            let m = market.clone();
            Box::new(move |dt| models::crr_step(&m, dt, dt).unwrap().step_spec(World::RiskNeutral))
        }),
        ("ksrf-td", {
            let m = market.clone();
            let p = p_curve.clone();
            Box::new(move |dt| models::ksrf_step(&m, &p, dt, dt).unwrap().step_spec(World::RiskNeutral))
        }),
        ("tri-classical", Box::new(classical_step_spec)),
        ("tri-new", Box::new(|dt| {
            models::new_trinomial_risk_neutral_step(RATE, SIGMA, dt).unwrap().step_spec()
        })),
    ];

    fn classical_step_spec(dt: f64) -> StepSpec {
        models::classical_trinomial_step(RATE, SIGMA, dt).unwrap().step_spec()
    }

    fn residual(spec: &StepSpec, dt: f64) -> f64 {
        let mean = lattice_step_moment(spec, 1.0);
        ((-RATE * dt).exp() * mean - 1.0).abs()
    }

    for (name, build_spec) in &spec_builders {
        let c = residual(&build_spec(DTS[0]), DTS[0]) / DTS[0].powf(1.5);
        for &dt in &DTS {
            let res = residual(&build_spec(dt), dt);
            let bound = c * dt.powf(1.5) * (1.0 + 1e-9);
            assert!(
                res <= bound,
                "criterion 6: FAIL - {name} at dt={dt}: residual {res:e} > C dt^1.5 = {bound:e}"
            );
        }
    }
    println!("criterion 6 (risk-neutral one-step martingale residuals): PASS");
}

#[test]
fn criterion_07_replication_exactness() {
    let market = standard_market();
    let p_curve = CoefficientCurve::constant(0.52);
    let mut rng = StdRng::seed_from_u64(7);

    for trial in 0..8 {
        let n = rng.gen_range(2..=50);
        let grid = TimeGrid::new(MATURITY, n).unwrap();

        // random piecewise-linear payoff in the terminal stock value
        let strikes: Vec<f64> = (0..4).map(|_| rng.gen_range(50.0..150.0)).collect();
        let weights: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let base: f64 = rng.gen_range(-1.0..1.0);
        let payoff = Payoff::Custom(Box::new(move |s: f64| {
            base + strikes
                .iter()
                .zip(&weights)
                .map(|(k, w)| w * (s - k).max(0.0))
                .sum::<f64>()
        }));

        for name in ["crr-td", "ksrf-td"] {
            let model = find_model(name).unwrap();
            let inputs = if name == "ksrf-td" {
                ModelInputs::with_up_probability(&market, &p_curve)
            } else {
                ModelInputs::new(&market)
            };
            let lattice = build(model, &inputs, &grid, World::RiskNeutral);
            let discounts = step_discounts(&market, &grid).unwrap();
            let report = hedge_report(&lattice, &discounts, &payoff, model, &inputs, HedgeForm::Replicating).unwrap();
            let values = report.values.as_ref().unwrap();
            let psis = report.hedge_ratios.as_ref().unwrap();

            for level in 0..n {
                let step = &lattice.steps()[level];
                for j in 0..=level {
                    let s = lattice.level(level)[j];
                    let (g_down, g_up) = (values[level + 1][j], values[level + 1][j + 1]);
                    let psi = psis[level][j];
                    let up_leg = -g_up + psi * s * step.up();
                    let down_leg = -g_down + psi * s * step.down();
                    let tol = 1e-10 * g_up.abs().max(g_down.abs()).max(1.0);
                    assert!(
                        (up_leg - down_leg).abs() <= tol,
                        "criterion 7: FAIL - {name} trial {trial} node ({level},{j}): |{up_leg} - {down_leg}| > {tol}"
                    );
                }
            }
        }
    }
    println!("criterion 7 (node-by-node replication with the exact hedge): PASS");
}

#[test]
fn criterion_08_path_enumeration_oracle_equivalence() {
    let market = standard_market();
    let inputs = ModelInputs::new(&market);
    let p_curve = CoefficientCurve::constant(0.52);
    let payoff = Payoff::call(STRIKE);
    let mut failures = Vec::new();

    // constant coefficients: binomial at N = 10, trinomial at N = 8
    let gate = 1e-12;
    let instances: Vec<(&str, usize)> = vec![
        ("crr-td", 10),
        ("ksrf-td", 10),
        ("tri-classical", 8),
        ("tri-new", 8),
    ];
    for (name, n) in instances {
        let model = find_model(name).unwrap();
        let model_inputs = if name == "ksrf-td" {
            ModelInputs::with_up_probability(&market, &p_curve)
        } else {
            inputs
        };
        let grid = TimeGrid::new(MATURITY, n).unwrap();
        let lattice = build(model, &model_inputs, &grid, World::RiskNeutral);
        let discounts = step_discounts(&market, &grid).unwrap();
        let bf = brute_force_price(S0, lattice.steps(), &discounts, &payoff).unwrap();
        let be = price_european(&lattice, &discounts, &payoff, false).unwrap().root_value;
        let rel = (bf - be).abs() / bf;
        println!("  {name} N={n}: brute force {bf:.12}, lattice {be:.12}, rel gap {rel:.3e}");
        if rel > gate {
            failures.push(format!("{name} N={n}: rel gap {rel:.3e} > 1e-12"));
        }
    }

    // time-dependent sigma: the gap is the canonical-reduction error
    let market_td = td_market();
    let inputs_td = ModelInputs::new(&market_td);
    let grid = TimeGrid::new(MATURITY, 10).unwrap();
    let lattice = build(find_model("crr-td").unwrap(), &inputs_td, &grid, World::RiskNeutral);
    let discounts = step_discounts(&market_td, &grid).unwrap();
    let bf = brute_force_price(S0, lattice.steps(), &discounts, &payoff).unwrap();
    let be = price_european(&lattice, &discounts, &payoff, false).unwrap().root_value;
    let rel = (bf - be).abs() / bf;
    let bound = 2.0 * MATURITY * 0.1 * grid.dt().sqrt();
    println!("  crr-td time-dependent N=10: rel gap {rel:.3e} (bound {bound:.3e})");
    if rel > bound {
        failures.push(format!("time-dependent gap {rel:.3e} > {bound:.3e}"));
    }

    if failures.is_empty() {
        println!("criterion 8 (path enumeration vs lattice): PASS");
    } else {
        println!("criterion 8 (path enumeration vs lattice): FAIL - {failures:?}");
        panic!(
            "criterion 8: FAIL - {failures:?}; trinomial recombination is approximate \
             (|up*down - mid^2| = C dt^2 > 0), so true path products cannot match the recombined \
             lattice to 1e-12 at desk scale - the binomial halves pass"
        );
    }
}

#[test]
fn criterion_09_q_star_continuity_vs_crr_discontinuity() {
    let (theta, dt) = (0.25, 0.01);

    // endpoints
    let q_lo = models::ksrf_q_star_raw(1e-4, theta, dt);
    let q_hi = models::ksrf_q_star_raw(1.0 - 1e-4, theta, dt);
    assert!(q_lo <= 1e-2, "criterion 9: FAIL - q*(1e-4) = {q_lo} > 1e-2");
    assert!(q_hi >= 0.99, "criterion 9: FAIL - q*(1-1e-4) = {q_hi} < 0.99");

    // monotone and small-gap along the sweep grid
    let mut grid_points = vec![1e-4];
    grid_points.extend((1..100).map(|i| i as f64 / 100.0));
    grid_points.push(1.0 - 1e-4);
    let values: Vec<f64> = grid_points.iter().map(|&p| models::ksrf_q_star_raw(p, theta, dt)).collect();
    for w in values.windows(2) {
        assert!(w[1] >= w[0], "criterion 9: FAIL - q* not monotone on the sweep grid: {w:?}");
        assert!(w[1] - w[0] <= 0.02, "criterion 9: FAIL - q* jump {w:?}");
    }

    // CRR contrast: q ignores mu entirely
    let sigma_curve = CoefficientCurve::constant(SIGMA);
    let rate_curve = CoefficientCurve::constant(RATE);
    let base = MarketCoefficients::new(CoefficientCurve::constant(MU), sigma_curve.clone(), rate_curve.clone());
    let bumped = MarketCoefficients::new(CoefficientCurve::constant(MU + 0.37), sigma_curve, rate_curve);
    let q_base = models::crr_step(&base, dt, dt).unwrap().q_risk_neutral;
    let q_bumped = models::crr_step(&bumped, dt, dt).unwrap().q_risk_neutral;
    assert_eq!(q_base.to_bits(), q_bumped.to_bits(), "criterion 9: FAIL - CRR q moved under mu bump");
    assert!((q_base - 0.5075).abs() < 1e-12);

    println!("criterion 9 (q* continuity in p; CRR q independence of mu): PASS");
}

#[test]
fn criterion_10_forward_backward_duality_and_parity() {
    let market = standard_market();
    let inputs = ModelInputs::new(&market);

    // duality at N = 200 (binomial) and N = 200 (trinomial)
    for name in ["crr-td", "tri-new"] {
        let model = find_model(name).unwrap();
        let grid = TimeGrid::new(MATURITY, 200).unwrap();
        let lattice = build(model, &inputs, &grid, World::RiskNeutral);
        let discounts = step_discounts(&market, &grid).unwrap();
        let payoff = Payoff::call(STRIKE);
        let backward = price_european(&lattice, &discounts, &payoff, false).unwrap().root_value;
        let discount: f64 = discounts.iter().product();
        let forward: f64 = discount
            * forward_probabilities(&lattice)
                .iter()
                .map(|(s, p)| p * payoff.eval(*s))
                .sum::<f64>();
        let rel = (forward - backward).abs() / backward;
        assert!(rel <= 1e-10, "criterion 10: FAIL - {name} duality gap {rel:e}");
    }

    // put-call parity: call - put = S0 * (discounted mean factor) - K e^{-int r},
    // within C dt (C = 2, roughly twice the measured constant for the
    // time-dependent market; the constant-coefficient gap is rounding-level)
    for (market, label) in [(standard_market(), "constant"), (td_market(), "time-dependent")] {
        let inputs = ModelInputs::new(&market);
        for n in [100usize, 200] {
            let grid = TimeGrid::new(MATURITY, n).unwrap();
            let lattice = build(find_model("crr-td").unwrap(), &inputs, &grid, World::RiskNeutral);
            let discounts = step_discounts(&market, &grid).unwrap();
            let call = price_european(&lattice, &discounts, &Payoff::call(STRIKE), false).unwrap().root_value;
            let put = price_european(&lattice, &discounts, &Payoff::put(STRIKE), false).unwrap().root_value;
            let mean_factor: f64 = lattice
                .steps()
                .iter()
                .zip(&discounts)
                .map(|(s, d)| d * lattice_step_moment(s, 1.0))
                .product();
            let exact_df = (-market.rate.integrate(0.0, MATURITY).unwrap()).exp();
            let gap = ((call - put) - (S0 * mean_factor - STRIKE * exact_df)).abs();
            assert!(
                gap <= 2.0 * grid.dt(),
                "criterion 10: FAIL - parity gap {gap:e} > 2 dt for {label} market at N={n}"
            );
        }
    }
    println!("criterion 10 (forward/backward duality, put-call parity): PASS");
}
