use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};
use massart_core::config::{AdversaryKind, EnvironmentKind, ExperimentConfig};
use massart_core::harness::{
    aggregate, run_bandit_experiment, run_halfspace_experiment, run_seeds, verify_oracles,
    BanditExperiment, HalfspaceExperiment, MultiSeedReport, OracleSuite, RunOutput,
};
use massart_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_ORACLE: u8 = 3;
const EXIT_ENVIRONMENT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "massart",
    version,
    about = "Online learning under Massart noise: simulations and oracle checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the reweighted Leaky-ReLU halfspace learner.
    SimulateHalfspace(RunArgs),
    /// Run the monotone-reward contextual bandit learner.
    SimulateBandit(RunArgs),
    /// Run the oracle suite; exits 3 if any check fails.
    Verify(VerifyArgs),
    /// Compare the halfspace learner against perceptron and random play.
    Baseline(RunArgs),
}

/// Flags mirror the config file keys and override them.
#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// TOML config file with flat keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    t_horizon: Option<u64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    reward_cap: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// iid, boundary or adaptive.
    #[arg(long)]
    adversary: Option<AdversaryKind>,
    /// massart2, sorted_k, monotone_k or reduction2.
    #[arg(long)]
    environment: Option<EnvironmentKind>,
    #[arg(long)]
    domain_radius: Option<f64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Number of consecutive seeds starting at `seed`.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Directory for `run_<seed>.csv` and `report.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the reweighted-loss floor.
    #[arg(long)]
    tau: Option<f64>,
    /// Directory for `report.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    /// Loads the config file (if any), then applies flag overrides. Returns
    /// whether an environment was chosen explicitly.
    fn resolve(&self) -> Result<(ExperimentConfig, bool), Error> {
        let (mut cfg, mut explicit_env) = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                let cfg = ExperimentConfig::from_toml_str(&text)?;
                let has_env = text
                    .parse::<toml::Table>()
                    .map(|t| t.contains_key("environment"))
                    .unwrap_or(false);
                (cfg, has_env)
            }
            None => (ExperimentConfig::default(), false),
        };
        macro_rules! apply {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                }
            )*};
        }
        apply!(
            d,
            t_horizon,
            eta,
            gamma,
            zeta,
            k,
            delta,
            reward_cap,
            seed,
            adversary,
            domain_radius
        );
        if let Some(env) = self.environment {
            cfg.environment = env;
            explicit_env = true;
        }
        Ok((cfg, explicit_env))
    }
}

fn seed_list(cfg: &ExperimentConfig, n: u64) -> Result<Vec<u64>, Error> {
    if n == 0 {
        return Err(Error::Config("--seeds must be at least 1".into()));
    }
    Ok((0..n).map(|i| cfg.seed.wrapping_add(i)).collect())
}

fn write_outputs(
    dir: &Path,
    outputs: &[(u64, RunOutput)],
    report: &MultiSeedReport,
) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (seed, out) in outputs {
        if let Some(csv) = &out.csv {
            let path = dir.join(format!("run_{seed}.csv"));
            fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    let path = dir.join("report.json");
    fs::write(&path, serde_json::to_string_pretty(report)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn finish_runs(
    outputs: Vec<(u64, RunOutput)>,
    out: Option<&Path>,
) -> anyhow::Result<MultiSeedReport> {
    let report = aggregate(outputs.iter().map(|(_, o)| o.report.clone()).collect());
    if let Some(dir) = out {
        write_outputs(dir, &outputs, &report)?;
    }
    Ok(report)
}

fn simulate_halfspace(args: &RunArgs) -> anyhow::Result<MultiSeedReport> {
    let (cfg, _) = args.config.resolve()?;
    let exp = HalfspaceExperiment::from_config(&cfg)?;
    let keep = args.out.is_some();
    let outputs = run_seeds(&seed_list(&cfg, args.seeds)?, |s| {
        run_halfspace_experiment(&exp.with_seed(s), keep)
    })?;
    finish_runs(outputs, args.out.as_deref())
}

fn simulate_bandit(args: &RunArgs) -> anyhow::Result<MultiSeedReport> {
    let (mut cfg, explicit_env) = args.config.resolve()?;
    if !explicit_env && cfg.environment == EnvironmentKind::Massart2 {
        cfg.environment = EnvironmentKind::MonotoneK;
    }
    let exp = BanditExperiment::from_config(&cfg)?;
    let keep = args.out.is_some();
    let outputs = run_seeds(&seed_list(&cfg, args.seeds)?, |s| {
        run_bandit_experiment(&exp.with_seed(s), keep)
    })?;
    finish_runs(outputs, args.out.as_deref())
}

fn print_summary(report: &MultiSeedReport) -> anyhow::Result<()> {
    for run in &report.runs {
        println!(
            "seed {:>4}  {}  {}",
            run.seed,
            match run.total_mistakes {
                Some(m) => format!(
                    "mistakes {m:>8}  rate {:.4}",
                    run.mistake_rate.unwrap_or(0.0)
                ),
                None => format!(
                    "reward {:>10.1}  gain {:>10.1}",
                    run.total_reward.unwrap_or(0.0),
                    run.bound_check.reward_gain.unwrap_or(0.0)
                ),
            },
            match (run.baselines.perceptron, run.baselines.uniform_arm_mean) {
                (Some(p), _) => format!("perceptron {p:.0}"),
                (_, Some(u)) => format!("uniform {u:.1}"),
                _ => String::new(),
            }
        );
    }
    println!("{}", serde_json::to_string_pretty(&report.aggregate)?);
    Ok(())
}

fn baseline(args: &RunArgs) -> anyhow::Result<()> {
    let report = simulate_halfspace(args)?;
    for run in &report.runs {
        let t = run.horizon as f64;
        println!(
            "seed {:>4}  learner {:.4}  perceptron {:.4}  random {:.4}",
            run.seed,
            run.mistake_rate.unwrap_or(0.0),
            run.baselines.perceptron.unwrap_or(0.0) / t,
            run.baselines.random_play.unwrap_or(0.0) / t,
        );
    }
    println!("{}", serde_json::to_string_pretty(&report.aggregate)?);
    Ok(())
}

fn verify(args: &VerifyArgs) -> anyhow::Result<bool> {
    let mut suite = OracleSuite {
        seed: args.seed,
        ..OracleSuite::default()
    };
    if let Some(tau) = args.tau {
        suite.tau = tau;
    }
    let report = verify_oracles(&suite);
    print!("{report}");
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        fs::write(
            dir.join("report.json"),
            serde_json::to_string_pretty(&report)?,
        )?;
    }
    Ok(report.passed())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::EnvironmentViolation { .. }) => EXIT_ENVIRONMENT,
        Some(
            Error::Config(_)
            | Error::InvalidParameter { .. }
            | Error::Infeasible(_)
            | Error::DimensionMismatch { .. },
        ) => EXIT_CONFIG,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::SimulateHalfspace(args) => {
            simulate_halfspace(args).and_then(|r| print_summary(&r))
        }
        Command::SimulateBandit(args) => simulate_bandit(args).and_then(|r| print_summary(&r)),
        Command::Baseline(args) => baseline(args),
        Command::Verify(args) => match verify(args) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(EXIT_ORACLE),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        let env = anyhow::Error::from(Error::EnvironmentViolation {
            round: 3,
            detail: "point norm 2 exceeds 1".into(),
        });
        assert_eq!(exit_code(&env), EXIT_ENVIRONMENT);
        assert_eq!(
            exit_code(&anyhow::Error::from(Error::Config("x".into()))),
            EXIT_CONFIG
        );
        assert_eq!(exit_code(&anyhow::anyhow!("disk full")), 1);
    }
}
