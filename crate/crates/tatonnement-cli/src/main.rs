//! Command-line front end: runs simulations, damping sweeps, economy
//! property checks, and stability analyses from JSON scenario configs,
//! writing CSV/JSON artifacts for external plotting.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use tatonnement::analysis::{self, CycleReport, StabilityReport};
use tatonnement::dynamics::{self, DynamicsConfig, Mechanism};
use tatonnement::economy::{self, Economy, PriceVector};
use tatonnement::io as tio;
use tatonnement::Error;

const EXIT_OK: u8 = 0;
const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "tatonnement", version, about = "Price adjustment dynamics laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Scenario config (JSON). `verify` also accepts a bare economy file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's output_dir. Default "out".
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized initial prices; overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress informational output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory and write trajectory.csv + summary.json.
    Simulate(CommonOpts),
    /// Run the damping sweep and write sweep.csv + summary.json.
    Sweep(CommonOpts),
    /// Check the economy's structural properties; exit 1 on any failure.
    Verify(CommonOpts),
    /// Find the equilibrium and write its tangent spectrum to stability.json.
    Analyze(CommonOpts),
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct AnalysisRequests {
    /// Attach the tangent spectrum at the found equilibrium (analyze).
    stability: bool,
    /// Attach a two-point cycle report to simulate summaries.
    cycles: bool,
    /// Damping values for the sweep subcommand.
    sweep_gamma_hats: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioConfig {
    /// Economy description; relative paths resolve against the config file.
    economy: PathBuf,
    dynamics: DynamicsConfig,
    /// Start point; drawn at random from the seed when absent.
    #[serde(default)]
    initial_price: Option<Vec<f64>>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    analysis: Option<AnalysisRequests>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, message: msg.into() }
    }

    fn runtime(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_RUNTIME, message: msg.into() }
    }
}

fn config_err(e: Error) -> Failure {
    Failure::config(e.to_string())
}

fn runtime_err(e: Error) -> Failure {
    Failure::runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(opts) => run_simulate(&opts),
        Command::Sweep(opts) => run_sweep(&opts),
        Command::Verify(opts) => run_verify(&opts),
        Command::Analyze(opts) => run_analyze(&opts),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_scenario(opts: &CommonOpts) -> Result<(ScenarioConfig, Economy, PathBuf), Failure> {
    let text = std::fs::read_to_string(&opts.config)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", opts.config.display())))?;
    let config: ScenarioConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("{}: {e}", opts.config.display())))?;
    config.dynamics.validate().map_err(config_err)?;
    let economy_path = resolve_path(&opts.config, &config.economy);
    let economy = tio::load_economy(&economy_path)
        .map_err(|e| Failure::config(format!("{}: {e}", economy_path.display())))?;
    let out_dir = opts
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", out_dir.display())))?;
    Ok((config, economy, out_dir))
}

fn resolve_path(config_path: &Path, referenced: &Path) -> PathBuf {
    if referenced.is_absolute() {
        referenced.to_path_buf()
    } else {
        config_path.parent().unwrap_or(Path::new(".")).join(referenced)
    }
}

fn effective_seed(opts: &CommonOpts, config: &ScenarioConfig) -> u64 {
    opts.seed.or(config.seed).unwrap_or(0)
}

fn initial_price(
    config: &ScenarioConfig,
    economy: &Economy,
    seed: u64,
) -> Result<PriceVector, Failure> {
    match &config.initial_price {
        Some(components) => {
            if components.len() != economy.n_goods() {
                return Err(Failure::config(format!(
                    "initial_price has {} components, economy has {} goods",
                    components.len(),
                    economy.n_goods()
                )));
            }
            PriceVector::new(components).map_err(config_err)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(PriceVector::random_interior(economy.n_goods(), &mut rng))
        }
    }
}

#[derive(Serialize)]
struct SimulateSummary {
    economy_kind: String,
    mechanism: &'static str,
    k: f64,
    dt: f64,
    gamma: Option<f64>,
    gamma_hat: Option<f64>,
    seed: u64,
    initial_price: Vec<f64>,
    steps_requested: usize,
    steps_completed: usize,
    completed: bool,
    error: Option<String>,
    final_price: Vec<f64>,
    final_xi_norm: f64,
    final_angle_prev: f64,
    final_angle_eq: Option<f64>,
    equilibrium: Option<Vec<f64>>,
    max_norm_drift: f64,
    cycle: Option<CycleReport>,
}

fn run_simulate(opts: &CommonOpts) -> Result<u8, Failure> {
    let (config, economy, out_dir) = load_scenario(opts)?;
    let requests = config.analysis.clone().unwrap_or_default();
    if requests.cycles && config.dynamics.mechanism != Mechanism::SecondOrderDiscrete {
        return Err(Failure::config(
            "cycle reports need the second_order_discrete mechanism",
        ));
    }
    let seed = effective_seed(opts, &config);
    let p0 = initial_price(&config, &economy, seed)?;
    // Best-effort equilibrium for the angle_eq column; absent when the
    // search fails.
    let equilibrium = economy::find_equilibrium(&economy, &p0, None, None).ok();

    let run_result = dynamics::run(&economy, &config.dynamics, &p0, equilibrium.as_ref());
    let (trajectory, error, completed) = match run_result {
        Ok(t) => (t, None, true),
        Err(Error::OrthantExit { step, trajectory }) => (
            *trajectory,
            Some(format!("price left the positive orthant at step {step}")),
            false,
        ),
        Err(e) => return Err(runtime_err(e)),
    };

    let cycle = if requests.cycles && completed {
        analysis::detect_two_point_cycle(
            &trajectory,
            analysis::CYCLE_TOL,
            analysis::CYCLE_MIN_REPEATS,
        )
        .map_err(runtime_err)?
    } else {
        None
    };

    let traj_path = out_dir.join("trajectory.csv");
    tio::write_trajectory_csv_path(&traj_path, &trajectory).map_err(runtime_err)?;

    let last = trajectory.len() - 1;
    let summary = SimulateSummary {
        economy_kind: economy.kind_name().to_string(),
        mechanism: trajectory.mechanism.name(),
        k: config.dynamics.k,
        dt: config.dynamics.dt,
        gamma: config.dynamics.gamma,
        gamma_hat: config.dynamics.effective_gamma_hat(),
        seed,
        initial_price: p0.to_vec(),
        steps_requested: config.dynamics.steps,
        steps_completed: last,
        completed,
        error: error.clone(),
        final_price: trajectory.points[last].iter().copied().collect(),
        final_xi_norm: trajectory.diagnostics[last].xi_norm,
        final_angle_prev: trajectory.diagnostics[last].angle_prev,
        final_angle_eq: trajectory.diagnostics[last].angle_eq,
        equilibrium: equilibrium.as_ref().map(|p| p.to_vec()),
        max_norm_drift: trajectory.max_norm_drift(),
        cycle,
    };
    let summary_path = out_dir.join("summary.json");
    tio::write_json_pretty(&summary_path, &summary).map_err(runtime_err)?;

    if !opts.quiet {
        println!("wrote {}", traj_path.display());
        println!("wrote {}", summary_path.display());
    }
    match error {
        None => Ok(EXIT_OK),
        Some(msg) => {
            eprintln!("error: {msg} (partial trajectory written)");
            Ok(EXIT_RUNTIME)
        }
    }
}

fn run_sweep(opts: &CommonOpts) -> Result<u8, Failure> {
    let (config, economy, out_dir) = load_scenario(opts)?;
    let gamma_hats = config
        .analysis
        .as_ref()
        .and_then(|a| a.sweep_gamma_hats.clone())
        .ok_or_else(|| Failure::config("sweep needs analysis.sweep_gamma_hats"))?;
    if gamma_hats.is_empty() {
        return Err(Failure::config("sweep_gamma_hats must not be empty"));
    }
    if config.dynamics.mechanism != Mechanism::SecondOrderDiscrete {
        return Err(Failure::config("sweep needs the second_order_discrete mechanism"));
    }
    let seed = effective_seed(opts, &config);
    let p0 = initial_price(&config, &economy, seed)?;
    // Rows are computed and written in input order regardless of how the
    // runs are scheduled.
    let table = analysis::cycle_angle_sweep(
        &economy,
        &p0,
        config.dynamics.k,
        config.dynamics.dt,
        &gamma_hats,
        config.dynamics.steps,
        analysis::CYCLE_TOL,
        analysis::CYCLE_MIN_REPEATS,
    );
    let csv_path = out_dir.join("sweep.csv");
    tio::write_sweep_csv_path(&csv_path, &table).map_err(runtime_err)?;
    let summary_path = out_dir.join("summary.json");
    tio::write_json_pretty(&summary_path, &table).map_err(runtime_err)?;
    if !opts.quiet {
        println!("wrote {}", csv_path.display());
        println!("wrote {}", summary_path.display());
    }
    Ok(EXIT_OK)
}

struct PropertyCheck {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn run_verify(opts: &CommonOpts) -> Result<u8, Failure> {
    // Accept either a scenario config or a bare economy description.
    let text = std::fs::read_to_string(&opts.config)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", opts.config.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("{}: {e}", opts.config.display())))?;
    let economy = if value.get("kind").is_some() {
        tio::load_economy(&opts.config).map_err(config_err)?
    } else {
        let config: ScenarioConfig = serde_json::from_value(value)
            .map_err(|e| Failure::config(format!("{}: {e}", opts.config.display())))?;
        let path = resolve_path(&opts.config, &config.economy);
        tio::load_economy(&path).map_err(config_err)?
    };
    let seed = opts.seed.unwrap_or(0);
    let checks = verify_economy(&economy, seed).map_err(runtime_err)?;
    let mut all_passed = true;
    for check in &checks {
        if !check.passed {
            all_passed = false;
        }
        if !opts.quiet || !check.passed {
            println!(
                "verify {}: {} ({})",
                check.name,
                if check.passed { "PASS" } else { "FAIL" },
                check.detail
            );
        }
    }
    if all_passed {
        if !opts.quiet {
            println!("all properties hold");
        }
        Ok(EXIT_OK)
    } else {
        eprintln!("error: verification failed");
        Ok(EXIT_VERIFY_FAILED)
    }
}

fn verify_economy(economy: &Economy, seed: u64) -> Result<Vec<PropertyCheck>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = economy.n_goods();
    let mut checks = Vec::new();

    match economy {
        Economy::Linearized { p_star, jacobian } => {
            // The budget identity and the ray zero mode reduce to exact
            // matrix statements about the stored jacobian.
            let jac_norm = jacobian.norm().max(f64::MIN_POSITIVE);
            let zero_mode = (jacobian * p_star.as_vector()).norm() / jac_norm;
            checks.push(PropertyCheck {
                name: "zero_mode",
                passed: zero_mode <= 1e-10,
                detail: format!("|J p*|/|J| = {zero_mode:.3e}, tol 1e-10"),
            });
            let walras = (jacobian.transpose() * p_star.as_vector()).norm() / jac_norm;
            checks.push(PropertyCheck {
                name: "walras_first_order",
                passed: walras <= 1e-10,
                detail: format!("|p*^T J|/|J| = {walras:.3e}, tol 1e-10"),
            });
        }
        _ => {
            let mut worst_walras = 0.0f64;
            for _ in 0..1000 {
                let p = PriceVector::random_interior(n, &mut rng);
                worst_walras = worst_walras.max(economy::walras_residual(economy, p.as_vector())?);
            }
            checks.push(PropertyCheck {
                name: "walras",
                passed: worst_walras <= 1e-10,
                detail: format!("worst |p.xi| over 1000 points = {worst_walras:.3e}, tol 1e-10"),
            });
            let mut worst_zero = 0.0f64;
            for _ in 0..20 {
                let p = PriceVector::random_interior(n, &mut rng);
                worst_zero = worst_zero.max(economy::zero_mode_residual(economy, &p, None)?);
            }
            checks.push(PropertyCheck {
                name: "zero_mode",
                passed: worst_zero <= 1e-6,
                detail: format!("worst |Dxi p|/|J| over 20 points = {worst_zero:.3e}, tol 1e-6"),
            });
        }
    }

    let mut worst_homog = 0.0f64;
    for _ in 0..200 {
        let p = PriceVector::random_interior(n, &mut rng);
        for scale in [1e-3, 1.0, 1e3] {
            worst_homog =
                worst_homog.max(economy::homogeneity_residual(economy, p.as_vector(), scale)?);
        }
    }
    checks.push(PropertyCheck {
        name: "homogeneity",
        passed: worst_homog <= 1e-12,
        detail: format!("worst rescaling change over 200 points = {worst_homog:.3e}, tol 1e-12"),
    });

    // 100 random-start damped steps must hold the sphere exactly.
    let mut worst_norm = 0.0f64;
    let mut step_error = None;
    for _ in 0..100 {
        let p0 = PriceVector::random_interior(n, &mut rng);
        let prev = PriceVector::random_interior(n, &mut rng);
        match dynamics::second_order_step(economy, p0.as_vector(), prev.as_vector(), 0.1, 0.5) {
            Ok((next, _)) => worst_norm = worst_norm.max((next.norm() - 1.0).abs()),
            Err(e) => {
                step_error = Some(e.to_string());
                break;
            }
        }
    }
    checks.push(PropertyCheck {
        name: "sphere_preservation",
        passed: step_error.is_none() && worst_norm <= 1e-12,
        detail: match &step_error {
            Some(e) => format!("step failed: {e}"),
            None => format!("worst | |p| - 1 | over 100 steps = {worst_norm:.3e}, tol 1e-12"),
        },
    });

    Ok(checks)
}

#[derive(Serialize)]
struct AnalyzeSummary {
    economy_kind: String,
    equilibrium: Vec<f64>,
    xi_norm_at_equilibrium: f64,
    gamma_used: Option<f64>,
    report: StabilityReport,
}

fn run_analyze(opts: &CommonOpts) -> Result<u8, Failure> {
    let (config, economy, out_dir) = load_scenario(opts)?;
    let seed = effective_seed(opts, &config);
    let start = initial_price(&config, &economy, seed)?;
    let p_star = economy::find_equilibrium(&economy, &start, None, None).map_err(runtime_err)?;
    let xi_norm = economy.excess_demand(&p_star).map_err(runtime_err)?.norm();
    let mut report = analysis::eigen_analysis(&economy, &p_star, None).map_err(runtime_err)?;
    // Rate prediction needs a continuous-time damping value.
    let gamma_used = config
        .dynamics
        .gamma
        .or(config.dynamics.gamma_hat.map(|gh| gh / config.dynamics.dt));
    if let Some(gamma) = gamma_used {
        report = report.with_rate_prediction(gamma, config.dynamics.k);
    }
    let summary = AnalyzeSummary {
        economy_kind: economy.kind_name().to_string(),
        equilibrium: p_star.to_vec(),
        xi_norm_at_equilibrium: xi_norm,
        gamma_used,
        report,
    };
    let path = out_dir.join("stability.json");
    tio::write_json_pretty(&path, &summary).map_err(runtime_err)?;
    if !opts.quiet {
        println!("wrote {}", path.display());
    }
    Ok(EXIT_OK)
}
