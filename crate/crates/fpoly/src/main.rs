use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use fpoly::commands::{self, Outcome};
use fpoly::{config, CliError};
use fpoly_core::experiments::ExperimentKind;

const MARGINAL_KEYS: &str = "\
  marginal / density objects: {\"name\": \"uniform\", \"lo\": 0, \"hi\": 1}
                              {\"name\": \"triangular\"}
                              {\"name\": \"normal\", \"mean\": 0, \"sd\": 1}
                              {\"name\": \"normal_mixture\", \"weight\", \"mean1\", \"sd1\", \"mean2\", \"sd2\"}";

const MODEL_KEYS: &str = "\
  model.kind          \"iid\" or \"m_dependent_gaussian_ma\"
  model.marginal      marginal object (see below)
  model.m             moving-average range m >= 1
  model.weights       (2m+1)^d weights, lexicographic; all ones if omitted
  model.mixing        optional declared profile replacing the certified one
  region              one of {\"rectangle\": [n1, ..]}, {\"d\", \"sites\": [[..], ..]},
                      {\"d\", \"ball_radius\"}, {\"d\", \"random_connected\", \"seed\"}";

const PROFILE_KEYS: &str = "\
  profile.kind        \"alpha\" or \"rho\"
  profile.tau         positive integer or \"inf\" (default \"inf\")
  profile.decay       {\"type\": \"finite_range\", \"m0\", \"level\"?}
                      {\"type\": \"polynomial\", \"theta\", \"scale\"? (1), \"cap\"?}
                      {\"type\": \"table\", \"values\": [..], \"tail\"?: {\"theta\", \"scale\"?}}
  d                   lattice dimension";

const EXIT_CODES: &str = "\
Exit codes: 0 success, 2 config/input error, 3 I/O error, 4 --assert check failed,
5 mixing hypotheses not certified (set override_hypotheses to force).";

#[derive(Parser, Debug)]
#[command(name = "fpoly", version, about = "Frequency-polygon estimation and Monte Carlo checks for lattice random fields")]
#[command(after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config file.
    #[arg(long, short)]
    config: PathBuf,
    /// Override a config key, e.g. `--set replicates=100` or `--set model.m=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, short, default_value = ".")]
    out: PathBuf,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    threads: Option<usize>,
    /// Exit with code 4 if any reported check fails.
    #[arg(long)]
    assert: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample one field and write it as CSV (field.csv).
    #[command(after_help = simulate_help())]
    Simulate(Common),
    /// Histogram and frequency polygon of observed data (histogram.csv, polygon.csv).
    #[command(after_help = estimate_help())]
    Estimate(Common),
    /// Monte Carlo check of the variance limit (report.json, statistics.csv).
    #[command(after_help = experiment_help())]
    Variance(Common),
    /// Monte Carlo check of joint asymptotic normality (report.json, statistics.csv).
    #[command(after_help = experiment_help())]
    Clt(Common),
    /// Variance experiment over growing cubes with b = |region|^-gamma (sweep.json, sweep.csv).
    #[command(after_help = sweep_help())]
    Sweep(Common),
    /// Blocking-sequence diagnostic over a bin-width schedule (lemma1.csv, lemma1.json).
    #[command(name = "lemma-mn", after_help = lemma_help())]
    LemmaMn(Common),
    /// Certify the summability conditions for a mixing profile (hypotheses.json).
    #[command(name = "check-hypotheses", after_help = hypotheses_help())]
    CheckHypotheses(Common),
}

fn simulate_help() -> String {
    format!(
        "Config keys:\n{MODEL_KEYS}\n  seed                master seed\n  replicate           replicate index (default 0)\n{MARGINAL_KEYS}\n\n{EXIT_CODES}"
    )
}

fn estimate_help() -> String {
    format!(
        "Config keys:\n  input               CSV of observations (last column; optional header line)\n  \
         bin_width           bin width b > 0\n  points_per_bin      even grid resolution (default 20)\n  \
         normalized          also write f_n (needs density; default false)\n  \
         density             marginal object, enables simulation mode\n{MARGINAL_KEYS}\n\n{EXIT_CODES}"
    )
}

fn experiment_help() -> String {
    format!(
        "Config keys:\n{MODEL_KEYS}\n  bin_width           b > 0, or {{\"gamma\": g}} for b = |region|^-g\n  \
         eval_points         distinct points with f(x) > 0\n  replicates          R >= 2\n  \
         master_seed         seed of replicate streams\n  override_hypotheses run without a mixing certificate (default false)\n  \
         plot_grid           also write grid.csv for replicate 0 (default false)\n  \
         points_per_bin      grid.csv resolution (default 20)\n{MARGINAL_KEYS}\n\n{EXIT_CODES}"
    )
}

fn sweep_help() -> String {
    format!(
        "Config keys:\n{MODEL_KEYS}\n  (only the dimension of `region` is used)\n  gamma               exponent in (0, 1)\n  \
         sides               increasing cube side lengths\n  eval_points, replicates, master_seed, override_hypotheses as for `variance`\n{MARGINAL_KEYS}\n\n{EXIT_CODES}"
    )
}

fn lemma_help() -> String {
    format!("Config keys:\n{PROFILE_KEYS}\n  schedule            strictly decreasing bin widths in (0, 1)\n  \
         rule                \"displayed\" (default): m = max(v, [(psi(v)/b)^(1/d)] + 1)\n                      \
         \"proof\": same with sqrt(psi(v)), the form the limit argument needs\n\n{EXIT_CODES}")
}

fn hypotheses_help() -> String {
    format!(
        "Config keys:\n{PROFILE_KEYS}\n  conditions          subset of prop1_i, prop1_ii, thm1_i, thm1_ii\n                      \
         (default: all matching the profile kind)\n\n{EXIT_CODES}"
    )
}

fn run(command: &Command) -> Result<(Outcome, bool), CliError> {
    let common = match command {
        Command::Simulate(c)
        | Command::Estimate(c)
        | Command::Variance(c)
        | Command::Clt(c)
        | Command::Sweep(c)
        | Command::LemmaMn(c)
        | Command::CheckHypotheses(c) => c,
    };
    let mut cfg: Value = config::load(&common.config)?;
    config::apply_overrides(&mut cfg, &common.overrides)?;
    let out = common.out.as_path();
    let base_dir = common
        .config
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_default();
    let outcome = fpoly::parallel::with_threads(common.threads, || match command {
        Command::Simulate(_) => commands::simulate(&cfg, out),
        Command::Estimate(_) => commands::estimate(&cfg, out, &base_dir),
        Command::Variance(_) => commands::experiment(&cfg, out, ExperimentKind::Variance),
        Command::Clt(_) => commands::experiment(&cfg, out, ExperimentKind::Clt),
        Command::Sweep(_) => commands::sweep(&cfg, out),
        Command::LemmaMn(_) => commands::lemma(&cfg, out),
        Command::CheckHypotheses(_) => commands::check_hypotheses(&cfg, out),
    })?;
    Ok((outcome, common.assert))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli.command) {
        Ok((outcome, assert)) => {
            for path in &outcome.written {
                eprintln!("wrote {}", path.display());
            }
            eprintln!("{}", outcome.summary);
            eprintln!("elapsed {:.3} s", start.elapsed().as_secs_f64());
            for f in &outcome.failed_checks {
                eprintln!("check failed: {f}");
            }
            if assert && !outcome.failed_checks.is_empty() {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
