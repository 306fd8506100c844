//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::{LN_10, SQRT_2};
use std::time::{Duration, Instant};

use mcmc_certify::bounds::{
    bound_general_start, bound_theorem, u_aggregate, u_cap, v_aggregate, v_cap, NormKind,
};
use mcmc_certify::burnin::{
    figure1_rules, figure2_rules, figure_series, half_budget_plan, log_grid, optimize_burnin,
    suggested_burnin, BoundKind, BudgetQuery, FigurePoint,
};
use mcmc_certify::convergence::{
    chi2_contrast, density_deviation_sup, deviation_function, inverse_pi_sup, l_functional,
};
use mcmc_certify::exact::{exact_error, path_enumeration_oracle, stationary_error, w_factor};
use mcmc_certify::simulate::{estimate_error, SimulationConfig};
use mcmc_certify::spectral::{operator_norm_on_mean_zero, weighted_norm};
use mcmc_certify::suite::{
    antithetic3, metropolis3, reference_chains, simulation_cases, two_state, SIMULATION_SHAPES,
};
use mcmc_certify::{Distribution, ErgodicChain, EstimatorSpec, LpNorm, StateFunction};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ln_c30() -> f64 {
    30.0 * LN_10
}

fn starts(chain: &ErgodicChain) -> Vec<Distribution> {
    let d = chain.dim();
    vec![
        chain.pi().clone(),
        Distribution::point_mass(d, 0),
        Distribution::point_mass(d, d - 1),
    ]
}

fn functions(d: usize) -> Vec<StateFunction> {
    let mixed = [1.0, -2.0, 0.5];
    vec![
        StateFunction::indicator(d, 0),
        StateFunction::new((0..d).map(|x| x as f64).collect()).unwrap(),
        StateFunction::new(mixed[..d].to_vec()).unwrap(),
    ]
}

/// Every `(chain, nu, f, n, n0)` with `|D| <= 3` and `n + n0 <= 8`.
fn small_grid() -> Vec<(ErgodicChain, Distribution, StateFunction, EstimatorSpec)> {
    let mut grid = Vec::new();
    for chain in [two_state(), metropolis3(), antithetic3()] {
        for nu in starts(&chain) {
            for f in functions(chain.dim()) {
                for total in 1..=8 {
                    for n0 in 0..total {
                        let spec = EstimatorSpec::new(total - n0, n0).unwrap();
                        grid.push((chain.clone(), nu.clone(), f.clone(), spec));
                    }
                }
            }
        }
    }
    grid
}

fn table1() -> Outcome {
    let expected = [
        (10_000, 0.9, 656, 656),
        (100_000, 0.9, 656, 656),
        (10_000, 0.99, 6867, 6873),
        (100_000, 0.99, 6873, 6873),
        (10_000, 0.999, 8001, 69043),
        (100_000, 0.999, 68977, 69043),
    ];
    let start = Instant::now();
    let mut bad = Vec::new();
    for (total, beta, n_opt, printed_suggested) in expected {
        let q = BudgetQuery::from_ln_c(total, beta, ln_c30()).unwrap();
        for kind in BoundKind::ALL {
            let got = optimize_burnin(&q, kind).n0;
            if got != n_opt {
                bad.push(format!(
                    "N={total} beta={beta} {}: {got} != {n_opt}",
                    kind.name()
                ));
            }
        }
        let s = suggested_burnin(beta, ln_c30()).n0;
        if s.abs_diff(printed_suggested) > 1 {
            bad.push(format!(
                "suggested N={total} beta={beta}: {s} vs {printed_suggested}"
            ));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(5) {
        bad.push(format!("runtime {elapsed:?} > 5s"));
    }
    outcome(bad.is_empty(), format!("{elapsed:.2?}; {}", summary(&bad)))
}

fn summary(bad: &[String]) -> String {
    match bad.len() {
        0 => "0 violations".into(),
        k => format!("{k} violations, first: {}", bad[0]),
    }
}

fn oracle_identity() -> Outcome {
    let start = Instant::now();
    let grid = small_grid();
    let mut worst = 0.0_f64;
    let mut bad = Vec::new();
    for (chain, nu, f, spec) in &grid {
        let exact = exact_error(chain, nu, f, *spec).unwrap().mse;
        let oracle = path_enumeration_oracle(chain, nu, f, *spec).unwrap();
        let diff = (exact - oracle).abs();
        worst = worst.max(diff);
        if diff > 1e-12 {
            bad.push(format!("n={} n0={} diff {diff:e}", spec.n(), spec.n0()));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(60) {
        bad.push(format!("runtime {elapsed:?} > 60s"));
    }
    outcome(
        bad.is_empty() && grid.len() >= 400,
        format!(
            "{} cases, max |diff| {worst:.1e}, {elapsed:.2?}; {}",
            grid.len(),
            summary(&bad)
        ),
    )
}

fn worst_case_equality() -> Outcome {
    let mut worst = 0.0_f64;
    for (_, chain) in reference_chains() {
        let b = chain.beta1();
        let u1 = chain.spectrum().eigenfunction(1).clone();
        for n in 1..=100 {
            let nf = n as f64;
            let closed = (1.0 + b) / (nf * (1.0 - b))
                - 2.0 * b * (1.0 - b.powi(n)) / (nf * nf * (1.0 - b) * (1.0 - b));
            let got = stationary_error(&chain, &u1, n as usize).unwrap();
            worst = worst.max((got - closed).abs());
        }
    }
    outcome(
        worst <= 1e-12,
        format!("6 chains x n=1..100, max |diff| {worst:.1e}"),
    )
}

fn bound_soundness() -> Outcome {
    let grid = small_grid();
    let mut bad = Vec::new();
    let mut checks = 0;
    for (chain, nu, f, spec) in &grid {
        let oracle = path_enumeration_oracle(chain, nu, f, *spec).unwrap();
        for kind in NormKind::ALL {
            let thm = bound_theorem(chain, nu, f, *spec, kind).unwrap().total;
            let gen = bound_general_start(chain, nu, f, *spec, kind)
                .unwrap()
                .total;
            checks += 1;
            // The oracle itself is only reproduced to 1e-12, so compare at that resolution.
            if !(thm >= gen * (1.0 - 1e-12) && gen >= oracle * (1.0 - 1e-12)) {
                bad.push(format!(
                    "{} n={} n0={}: thm {thm} gen {gen} oracle {oracle}",
                    kind.name(),
                    spec.n(),
                    spec.n0()
                ));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{checks} checks; {}", summary(&bad)),
    )
}

// Norms of nu P^k - pi are resolved only to about 1e-16 absolute, so every
// comparison is made on the norm scale with this floor.
const FLOOR: f64 = 1e-14;

fn le(a: f64, b: f64) -> bool {
    a <= b * (1.0 + 1e-9) + FLOOR
}

fn inequality_suites() -> Outcome {
    let mut bad = Vec::new();
    let mut checks = 0usize;
    for (name, chain) in reference_chains() {
        let d = chain.dim();
        let pi = chain.pi();
        let beta = chain.beta();
        let mut nus: Vec<Distribution> = (0..d).map(|x| Distribution::point_mass(d, x)).collect();
        nus.push(Distribution::uniform(d));
        let c_pi = inverse_pi_sup(pi).unwrap();

        for nu in &nus {
            let chi0 = chi2_contrast(nu, pi).unwrap();
            let c_density = density_deviation_sup(nu, pi).unwrap();
            for k in 0..=50 {
                let law = chain.apply_to_distribution(nu, k);
                let chi = chi2_contrast(&law, pi).unwrap();
                checks += 2;
                if !le(chi.sqrt(), beta.powi(k as i32) * chi0.sqrt()) {
                    bad.push(format!("{name}: chi2 decay k={k}"));
                }
                let dk = deviation_function(&chain, nu, k).unwrap().l2_norm(pi);
                if !le(dk, beta.powi(k as i32) * c_density.sqrt()) {
                    bad.push(format!("{name}: ||d_k||_2 k={k}"));
                }
            }
            for k in 1..=30 {
                for h in functions(d.min(3)).into_iter().map(|h| pad(h, d)) {
                    let l = l_functional(&chain, nu, k, &h).unwrap().abs();
                    let scale = beta.powi(k as i32) * c_density.sqrt();
                    let h1 = weighted_norm(h.values(), pi, LpNorm::L1);
                    let h2 = weighted_norm(h.values(), pi, LpNorm::L2);
                    checks += 2;
                    if !le(l, scale * h2) {
                        bad.push(format!("{name}: |L_k| <= l2 form, k={k}"));
                    }
                    if !le(l, scale * c_pi.sqrt() * h1) {
                        bad.push(format!("{name}: |L_k| <= l1 form, k={k}"));
                    }
                }
            }
        }

        for n in 1..=20 {
            let l2 = operator_norm_on_mean_zero(&chain, n, LpNorm::L2).unwrap();
            let l4 = operator_norm_on_mean_zero(&chain, n, LpNorm::L4).unwrap();
            let bn = beta.powi(n as i32);
            checks += 3;
            if !le(l2, bn) || !le(bn, l2) {
                bad.push(format!("{name}: ||P^n||_2 = {l2} vs beta^n = {bn}"));
            }
            if !le(l4, 2.0 * SQRT_2 * beta.powf(n as f64 / 2.0)) {
                bad.push(format!("{name}: ||P^n||_4 n={n}"));
            }
            if l4 > 2.0 {
                bad.push(format!("{name}: ||P^n||_4 > 2"));
            }
        }

        let b1 = chain.beta1();
        for n in 1..=200usize {
            let w1 = w_factor(n, b1);
            checks += 1;
            if !le(w1, 2.0 * n as f64 / (1.0 - b1)) {
                bad.push(format!("{name}: W(n, beta_1) cap n={n}"));
            }
            for &bk in &chain.spectrum().eigenvalues()[1..] {
                checks += 1;
                if !le(w_factor(n, bk), w1) {
                    bad.push(format!("{name}: W(n, beta_k) > W(n, beta_1) n={n}"));
                }
            }
        }
    }

    // W(n, .) is increasing on [-1, 1).
    for n in [1usize, 2, 3, 10, 100, 1000] {
        let mut last = f64::NEG_INFINITY;
        for i in 0..400 {
            let x = -1.0 + i as f64 * 0.005;
            let w = w_factor(n, x);
            checks += 1;
            if w < last * (1.0 - 1e-12) {
                bad.push(format!("W({n}, .) decreases at {x}"));
            }
            last = w;
        }
    }

    // V/U caps on 200 points of [0, 1).
    for i in 0..200 {
        let b = i as f64 / 200.0;
        for n in [1usize, 2, 5, 10, 50, 200, 2000] {
            checks += 2;
            if !le(v_aggregate(b, n), v_cap(b)) {
                bad.push(format!("V cap b={b} n={n}"));
            }
            if !le(u_aggregate(b, n), u_cap(b)) {
                bad.push(format!("U cap b={b} n={n}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{checks} checks; {}", summary(&bad)),
    )
}

/// Repeat the first values cyclically so every chain gets the same test functions.
fn pad(h: StateFunction, d: usize) -> StateFunction {
    let v = h.values();
    StateFunction::new((0..d).map(|x| v[x % v.len()] + x as f64 * 0.1).collect()).unwrap()
}

fn asymptotics() -> Outcome {
    let chain = two_state();
    let f = StateFunction::new(vec![1.0, 0.0]).unwrap();
    let nu = Distribution::point_mass(2, 1);
    let n = 10_000;
    let report = exact_error(&chain, &nu, &f, EstimatorSpec::new(n, 0).unwrap()).unwrap();
    let constant = report.asymptotic_constant.unwrap();
    let rel = (n as f64 * report.mse - constant).abs() / constant;

    let q = BudgetQuery::from_ln_c(100_000_000, 0.99, ln_c30()).unwrap();
    let ratio = half_budget_plan(&q, BoundKind::B4).penalty_ratio;
    let ratio_inf = half_budget_plan(&q, BoundKind::Binf).penalty_ratio;
    let ratio_err = ((ratio - SQRT_2).abs()).max((ratio_inf - SQRT_2).abs()) / SQRT_2;
    outcome(
        rel <= 0.01 && ratio_err <= 0.01,
        format!(
            "n*mse rel. err {rel:.2e}; half-budget ratio {ratio:.6} (rel. err {ratio_err:.1e})"
        ),
    )
}

fn statistical_validation() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut worst_z = 0.0_f64;
    let mut compared = 0;
    for (i, case) in simulation_cases().iter().enumerate() {
        let seed = 0x00c0_ffee + (i % SIMULATION_SHAPES.len()) as u64;
        let cfg = SimulationConfig::new(100_000, seed, case.spec).unwrap();
        let est = estimate_error(&case.chain, &case.nu, &case.f, cfg).unwrap();
        let exact = exact_error(&case.chain, &case.nu, &case.f, case.spec)
            .unwrap()
            .mse;
        let z = (est.mse_hat - exact).abs() / est.std_error;
        worst_z = worst_z.max(z);
        compared += 1;
        if z > 4.0 {
            bad.push(format!(
                "{} n={} n0={}: z = {z:.2}",
                case.chain_name,
                case.spec.n(),
                case.spec.n0()
            ));
        }
    }

    // The same report under 1 and 4 worker threads.
    let chain = reference_chains().pop().unwrap().1;
    let d = chain.dim();
    let f = StateFunction::new((0..d).map(|x| x as f64).collect()).unwrap();
    let nu = Distribution::point_mass(d, 0);
    let cfg = SimulationConfig::new(20_000, 7, EstimatorSpec::new(10, 5).unwrap()).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_error(&chain, &nu, &f, cfg).unwrap())
    };
    let (one, four) = (run(1), run(4));
    if one.mse_hat.to_bits() != four.mse_hat.to_bits()
        || one.std_error.to_bits() != four.std_error.to_bits()
    {
        bad.push("reports differ across thread counts".into());
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        bad.push(format!("runtime {elapsed:?} > 120s"));
    }
    outcome(
        bad.is_empty(),
        format!(
            "{compared} comparisons, max z {worst_z:.2}, {elapsed:.2?}; {}",
            summary(&bad)
        ),
    )
}

fn curve<'a>(points: &'a [FigurePoint], name: &str) -> Vec<&'a FigurePoint> {
    points.iter().filter(|p| p.curve == name).collect()
}

fn at(points: &[FigurePoint], name: &str, total: u64) -> Option<f64> {
    points
        .iter()
        .find(|p| p.curve == name && p.total == total)
        .map(|p| p.value)
}

fn figure_properties() -> Outcome {
    let grid = log_grid(2, 7, 10);
    let largest = *grid.last().unwrap();
    let kind = BoundKind::B4;
    let fig1 = figure_series(0.99, ln_c30(), &grid, &figure1_rules(), kind).unwrap();
    let fig2 = figure_series(0.99, ln_c30(), &grid, &figure2_rules(), kind).unwrap();
    let suggested = suggested_burnin(0.99, ln_c30()).n0;
    let mut bad = Vec::new();

    for fig in [&fig1, &fig2] {
        let stat = curve(fig, "stationary");
        if !stat.windows(2).all(|w| w[1].value < w[0].value) {
            bad.push("stationary reference not decreasing".into());
        }
        if fig.iter().any(|p| p.value.is_nan() || p.value <= 0.0) {
            bad.push("non-positive value".into());
        }
    }

    for n0 in [6000u64, 6500] {
        assert!(n0 < suggested);
        let name = format!("b4_fixed_{n0}");
        for p in curve(&fig1, &name) {
            let opt = at(&fig1, "b4_optimized", p.total).unwrap();
            if p.value < opt {
                bad.push(format!("{name} below optimized at N={}", p.total));
            }
        }
    }

    let spread = |names: &[String], fig: &[FigurePoint]| {
        let v: Vec<f64> = names.iter().map(|n| at(fig, n, largest).unwrap()).collect();
        let hi = v.iter().cloned().fold(f64::MIN, f64::max);
        let lo = v.iter().cloned().fold(f64::MAX, f64::min);
        hi / lo - 1.0
    };
    let mut names1: Vec<String> = fig1
        .iter()
        .filter(|p| p.total == largest)
        .map(|p| p.curve.clone())
        .collect();
    names1.dedup();
    let s1 = spread(&names1, &fig1);
    let s2 = spread(&["b4_suggested".into(), "stationary".into()], &fig2);
    let half = at(&fig2, "b4_half", largest).unwrap() / at(&fig2, "stationary", largest).unwrap();
    let half_err = (half / SQRT_2 - 1.0).abs();
    if s1 > 0.05 {
        bad.push(format!(
            "fixed-burn-in curves spread {s1:.3} at N={largest}"
        ));
    }
    if s2 > 0.05 {
        bad.push(format!("half-budget curves spread {s2:.3} at N={largest}"));
    }
    if half_err > 0.05 {
        bad.push(format!(
            "half-budget / stationary = {half:.4}, not ~sqrt(2)"
        ));
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} curves; spread at N={largest}: fixed {s1:.4}, half {s2:.4}, half/stationary {half:.4}; {}",
            names1.len(),
            summary(&bad)
        ),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("table1_reproduction", table1),
        ("oracle_identity", oracle_identity),
        ("worst_case_equality", worst_case_equality),
        ("bound_soundness", bound_soundness),
        ("inequality_suites", inequality_suites),
        ("asymptotics", asymptotics),
        ("statistical_validation", statistical_validation),
        ("figure_properties", figure_properties),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} {name}: {}", o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
