use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mcmc_certify::bounds::{bound_general_start, bound_theorem, NormKind};
use mcmc_certify::burnin::{
    figure1_rules, figure2_rules, figure_series, log_grid, plan, suggested_burnin, table1,
    write_csv, BoundKind, BudgetQuery, Strategy,
};
use mcmc_certify::chain_file::{load_path, LoadError, LoadedChain};
use mcmc_certify::convergence::{chi2_contrast, density_deviation_sup, inverse_pi_sup};
use mcmc_certify::exact::{asymptotic_constant, exact_error_capped, DEFAULT_WORK_CAP};
use mcmc_certify::simulate::{estimate_error, SimulationConfig};
use mcmc_certify::suite::simulation_cases;
use mcmc_certify::{CertifyError, EstimatorSpec};

mod format;

use format::{g6, Table};

const WORK_CAP_ENV: &str = "MCMC_CERTIFY_WORK_CAP";

#[derive(Parser)]
#[command(
    name = "mcmc-certify",
    version,
    about = "Certified error bounds and burn-in planning for MCMC on finite reversible chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a chain file and print its spectral and start-law constants.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Exact error, bounds and optional simulation for S_{n,n0}(f).
    Error(ErrorArgs),
    /// Choose a burn-in for a budget of N steps.
    Burnin(BurninArgs),
    /// Write the reference table or figure data as CSV.
    Reproduce {
        #[arg(long, value_enum)]
        target: Target,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare Monte Carlo estimates with exact errors on the reference chains.
    SimulateCheck {
        #[arg(long, default_value_t = 100_000)]
        replications: u64,
        #[arg(long, default_value_t = 0x00c0_ffee)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct ErrorArgs {
    file: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    n0: usize,
    #[arg(long, value_enum, default_value_t = NormArg::All)]
    norm: NormArg,
    /// Evaluate the exact mean-square error.
    #[arg(long)]
    exact: bool,
    /// Monte Carlo estimate with R replications and the given seed.
    #[arg(long, num_args = 2, value_names = ["R", "SEED"])]
    simulate: Option<Vec<u64>>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BurninArgs {
    #[arg(long)]
    beta: f64,
    #[arg(long = "C")]
    c: f64,
    #[arg(long = "N")]
    total: u64,
    #[arg(long, value_enum, default_value_t = KindArg::Binf)]
    kind: KindArg,
    #[arg(long, value_enum, default_value_t = StrategyArg::Optimize)]
    strategy: StrategyArg,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L2,
    L4,
    Linf,
    All,
}

impl NormArg {
    fn kinds(self) -> Vec<NormKind> {
        match self {
            NormArg::L2 => vec![NormKind::L2],
            NormArg::L4 => vec![NormKind::L4],
            NormArg::Linf => vec![NormKind::Linf],
            NormArg::All => NormKind::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    B4,
    Binf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Suggested,
    Optimize,
    Half,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Table1,
    Figure1,
    Figure2,
}

/// A failed command and the exit code it maps to.
enum Failure {
    Validation(String),
    Cap(String),
    Io(String),
    Check(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Cap(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Cap(m) | Failure::Io(m) | Failure::Check(m) => m,
        }
    }
}

impl From<CertifyError> for Failure {
    fn from(e: CertifyError) -> Self {
        let msg = format!("{}: {e}", e.kind());
        if e.is_resource_cap() {
            Failure::Cap(msg)
        } else {
            Failure::Validation(msg)
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } => Failure::Io(e.to_string()),
            LoadError::Parse(_) => Failure::Validation(format!("ParseError: {e}")),
            LoadError::Invalid(inner) => inner.into(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { file, json } => analyze(&file, json),
        Command::Error(args) => error_cmd(&args),
        Command::Burnin(args) => burnin(&args),
        Command::Reproduce { target, out } => reproduce(target, &out),
        Command::SimulateCheck {
            replications,
            seed,
            json,
        } => simulate_check(replications, seed, json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn print_json(v: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("values are finite or null")
    );
}

fn analyze(file: &Path, json_out: bool) -> CmdResult {
    let loaded = load_path(file)?;
    let chain = &loaded.chain;
    let pi = chain.pi();
    let nu = loaded.nu_or_pi();
    let spectrum = chain.spectrum();
    let c_pi = inverse_pi_sup(pi)?;
    let c_density = density_deviation_sup(&nu, pi)?;
    let chi2 = chi2_contrast(&nu, pi)?;

    if json_out {
        print_json(&json!({
            "states": chain.dim(),
            "beta1": chain.beta1(),
            "beta": chain.beta(),
            "spectral_gap": spectrum.spectral_gap(),
            "eigenvalues": spectrum.eigenvalues(),
            "pi": pi.weights(),
            "residuals": {
                "reversibility": chain.chain().reversibility_residual(),
                "stationarity": chain.chain().stationarity_residual(),
                "orthonormality": spectrum.orthonormality_residual(),
                "eigen": spectrum.eigen_residual(),
            },
            "c_pi": c_pi,
            "c_density": c_density,
            "chi2_nu_pi": chi2,
            "nu_is_pi": loaded.nu.is_none(),
        }));
        return Ok(());
    }
    let mut t = Table::new();
    t.row("states |D|", chain.dim().to_string());
    t.row("beta_1", g6(chain.beta1()));
    t.row("beta", g6(chain.beta()));
    t.row("spectral gap 1 - beta_1", g6(spectrum.spectral_gap()));
    t.row(
        "reversibility residual",
        g6(chain.chain().reversibility_residual()),
    );
    t.row(
        "stationarity residual",
        g6(chain.chain().stationarity_residual()),
    );
    t.row(
        "orthonormality residual",
        g6(spectrum.orthonormality_residual()),
    );
    t.row("eigen residual", g6(spectrum.eigen_residual()));
    t.row("||1/pi||_inf", g6(c_pi));
    t.row("||nu/pi - 1||_inf", g6(c_density));
    t.row("chi^2(nu, pi)", g6(chi2));
    if loaded.nu.is_none() {
        t.row("nu", "pi (not given)".to_string());
    }
    print!("{t}");
    Ok(())
}

fn work_cap() -> Result<f64, Failure> {
    match std::env::var(WORK_CAP_ENV) {
        Err(_) => Ok(DEFAULT_WORK_CAP),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(v) if v > 0.0 => Ok(v),
            _ => Err(Failure::Validation(format!(
                "{WORK_CAP_ENV} must be a positive number, got {s:?}"
            ))),
        },
    }
}

fn require_f(loaded: &LoadedChain) -> Result<mcmc_certify::StateFunction, Failure> {
    loaded.f.clone().ok_or_else(|| {
        Failure::Validation("InvalidArgument: the chain file has no \"f\" entry".into())
    })
}

fn error_cmd(args: &ErrorArgs) -> CmdResult {
    let loaded = load_path(&args.file)?;
    let f = require_f(&loaded)?;
    let nu = loaded.nu_or_pi();
    let chain = &loaded.chain;
    let spec = EstimatorSpec::new(args.n, args.n0)?;

    let exact = if args.exact {
        Some(exact_error_capped(chain, &nu, &f, spec, work_cap()?)?)
    } else {
        None
    };
    let kinds = args.norm.kinds();
    let mut theorem = Vec::new();
    let mut general = Vec::new();
    for &kind in &kinds {
        theorem.push(bound_theorem(chain, &nu, &f, spec, kind)?);
        general.push(bound_general_start(chain, &nu, &f, spec, kind)?);
    }
    let simulation = match &args.simulate {
        Some(v) => {
            let cfg = SimulationConfig::new(v[0], v[1], spec)?;
            Some(estimate_error(chain, &nu, &f, cfg)?)
        }
        None => None,
    };
    let asym = asymptotic_constant(chain, &f);

    if args.json {
        print_json(&json!({
            "n": spec.n(),
            "n0": spec.n0(),
            "states": chain.dim(),
            "beta1": chain.beta1(),
            "beta": chain.beta(),
            "asymptotic_constant": asym,
            "exact": exact,
            "bounds": theorem,
            "general_start_bounds": general,
            "simulation": simulation,
        }));
        return Ok(());
    }

    let mut t = Table::new();
    t.row("n, n0", format!("{}, {}", spec.n(), spec.n0()));
    match asym {
        Some(a) => t.row("asymptotic constant (lim n e^2)", g6(a)),
        None => t.row(
            "asymptotic constant (lim n e^2)",
            "unbounded (no spectral gap)".into(),
        ),
    }
    if let Some(e) = &exact {
        t.row("exact e^2", g6(e.mse));
        t.row("  stationary part", g6(e.stationary_mse));
        t.row("  burn-in correction", g6(e.correction));
    }
    for (thm, gen) in theorem.iter().zip(&general) {
        let k = thm.norm_kind.name();
        t.row(
            &format!("bound ({k})"),
            format!(
                "{} = {} + {}",
                g6(thm.total),
                g6(thm.leading_term),
                g6(thm.correction_term)
            ),
        );
        t.row(
            &format!("  with exact stationary part ({k})"),
            g6(gen.total),
        );
    }
    if let Some(s) = &simulation {
        t.row(
            "simulated e^2",
            format!(
                "{} +- {} (R = {}, seed = {})",
                g6(s.mse_hat),
                g6(s.std_error),
                s.replications,
                s.seed
            ),
        );
    }
    print!("{t}");
    Ok(())
}

fn burnin(args: &BurninArgs) -> CmdResult {
    if !(args.beta > 0.0 && args.beta < 1.0) {
        return Err(Failure::Validation(format!(
            "InvalidArgument: beta must lie in (0, 1), got {}",
            args.beta
        )));
    }
    let q = BudgetQuery::new(args.total, args.beta, args.c)?;
    let kind = match args.kind {
        KindArg::B4 => BoundKind::B4,
        KindArg::Binf => BoundKind::Binf,
    };
    let strategy = match args.strategy {
        StrategyArg::Suggested => Strategy::Suggested,
        StrategyArg::Optimize => Strategy::Optimized,
        StrategyArg::Half => Strategy::HalfBudget,
    };
    let p = plan(&q, kind, strategy);
    let s = suggested_burnin(q.beta, q.ln_c);
    if args.json {
        print_json(&json!({
            "N": q.total,
            "beta": q.beta,
            "C": args.c,
            "plan": p,
            "suggested": s,
        }));
        return Ok(());
    }
    println!("strategy\tkind\tN\tn0\tn\tbound\tpenalty");
    println!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}",
        p.strategy.name(),
        p.kind.name(),
        p.total,
        p.n0,
        p.n,
        g6(p.bound_value),
        g6(p.penalty_ratio)
    );
    if p.clamped {
        eprintln!(
            "note: the suggested burn-in {} does not fit in N = {}; using N - 1",
            s.n0, p.total
        );
    }
    if s.borderline {
        eprintln!(
            "note: ln C / ln(1/beta) = {} is within 1e-9 of an integer",
            s.ratio
        );
    }
    Ok(())
}

const FIGURE_BETA: f64 = 0.99;

fn reproduce(target: Target, out: &Path) -> CmdResult {
    use std::io::Write;

    std::fs::create_dir_all(out).map_err(|e| io_failure(out, e))?;
    let ln_c = 30.0 * std::f64::consts::LN_10;
    let mut buf = Vec::new();
    let name = match target {
        Target::Table1 => {
            writeln!(buf, "N,beta,n_opt_b4,n_opt_binf,n0_suggested").expect("in-memory write");
            for r in table1() {
                writeln!(
                    buf,
                    "{},{},{},{},{}",
                    r.total, r.beta, r.n_opt_b4, r.n_opt_binf, r.n0_suggested
                )
                .expect("in-memory write");
            }
            "table1.csv"
        }
        Target::Figure1 | Target::Figure2 => {
            let (name, rules) = match target {
                Target::Figure1 => ("figure1.csv", figure1_rules()),
                _ => ("figure2.csv", figure2_rules()),
            };
            let grid = log_grid(2, 7, 10);
            let points = figure_series(FIGURE_BETA, ln_c, &grid, &rules, BoundKind::B4)?;
            write_csv(&mut buf, &points).expect("in-memory write");
            name
        }
    };
    let path = out.join(name);
    std::fs::write(&path, buf).map_err(|e| io_failure(&path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn simulate_check(replications: u64, seed: u64, json_out: bool) -> CmdResult {
    let mut rows = Vec::new();
    let mut failures = 0;
    let cases = simulation_cases();
    for (i, case) in cases.iter().enumerate() {
        let cfg = SimulationConfig::new(replications, seed.wrapping_add(i as u64), case.spec)?;
        let est = estimate_error(&case.chain, &case.nu, &case.f, cfg)?;
        let exact =
            exact_error_capped(&case.chain, &case.nu, &case.f, case.spec, DEFAULT_WORK_CAP)?.mse;
        let z = if est.std_error > 0.0 {
            (est.mse_hat - exact).abs() / est.std_error
        } else if est.mse_hat == exact {
            0.0
        } else {
            f64::INFINITY
        };
        let mut bound_ok = true;
        for kind in NormKind::ALL {
            let b = bound_theorem(&case.chain, &case.nu, &case.f, case.spec, kind)?.total;
            bound_ok &= est.mse_hat - 4.0 * est.std_error <= b;
        }
        let pass = z <= 4.0 && bound_ok;
        if !pass {
            failures += 1;
        }
        rows.push((case, est, exact, z, bound_ok, pass));
    }

    if json_out {
        let cases: Vec<Value> = rows
            .iter()
            .map(|(case, est, exact, z, bound_ok, pass)| {
                json!({
                    "chain": case.chain_name,
                    "n": case.spec.n(),
                    "n0": case.spec.n0(),
                    "exact": exact,
                    "estimate": est,
                    "z": z,
                    "below_bounds": bound_ok,
                    "pass": pass,
                })
            })
            .collect();
        print_json(&json!({ "cases": cases, "failures": failures }));
    } else {
        println!("chain\tn\tn0\texact\testimate\tstd_error\tz\tresult");
        for (case, est, exact, z, _, pass) in &rows {
            println!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{:.2}\t{}",
                case.chain_name,
                case.spec.n(),
                case.spec.n0(),
                g6(*exact),
                g6(est.mse_hat),
                g6(est.std_error),
                z,
                if *pass { "ok" } else { "FAIL" }
            );
        }
    }
    if failures > 0 {
        return Err(Failure::Check(format!(
            "{failures} of {} comparisons failed",
            rows.len()
        )));
    }
    Ok(())
}
