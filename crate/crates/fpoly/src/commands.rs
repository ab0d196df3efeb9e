//! One function per subcommand. Each validates its whole config, computes
//! everything in memory and only then writes its outputs.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use fpoly_core::estimator::{bin_counts, fp_integral};
use fpoly_core::experiments::{
    run_schedule_sweep, ExperimentKind, ExperimentPlan, ExperimentReport, SweepTable,
};
use fpoly_core::fields::sample;
use fpoly_core::grid::BinGrid;
use fpoly_core::mixing::{hypothesis_check, lemma1_diagnostic_with, HypothesisCertificate, Monotonicity};

use crate::config::{
    parse, EstimateConfig, ExperimentConfig, HypothesesConfig, LemmaConfig, SimulateConfig, SweepConfig,
};
use crate::error::{AtPath, CliError};
use crate::formats;
use crate::parallel::Rayon;

/// What a finished subcommand produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    /// Names of checks that failed; relevant under `--assert`.
    pub failed_checks: Vec<String>,
    /// One-line human summary.
    pub summary: String,
}

fn write_all(out: &Path, files: Vec<(&str, String)>) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut written = Vec::new();
    for (name, content) in files {
        let path = out.join(name);
        formats::write_file(&path, &content)?;
        written.push(path);
    }
    Ok(written)
}

pub fn simulate(config: &Value, out: &Path) -> Result<Outcome, CliError> {
    let cfg: SimulateConfig = parse(config)?;
    let region = cfg.region.resolve()?;
    let (model, _) = cfg.model.resolve(region.dim())?;
    let s = sample(&model, &region, cfg.seed, cfg.replicate)?;
    let written = write_all(out, vec![("field.csv", formats::field_csv(&s))])?;
    Ok(Outcome {
        written,
        failed_checks: Vec::new(),
        summary: format!("sampled {} sites from {}", s.values.len(), s.model_id),
    })
}

pub fn estimate(config: &Value, out: &Path, base_dir: &Path) -> Result<Outcome, CliError> {
    let cfg: EstimateConfig = parse(config)?;
    if cfg.normalized && cfg.density.is_none() {
        return Err(CliError::config(
            "normalized",
            "simulation mode required: the normalized estimator needs a `density`",
        ));
    }
    if cfg.points_per_bin == 0 || cfg.points_per_bin % 2 != 0 {
        return Err(CliError::config("points_per_bin", "must be a positive even number"));
    }
    let grid = BinGrid::new(cfg.bin_width).at("bin_width")?;
    let density = cfg.density.as_ref().map(|d| d.resolve("density")).transpose()?;
    let input = if cfg.input.is_absolute() {
        cfg.input.clone()
    } else {
        base_dir.join(&cfg.input)
    };
    let values = formats::read_observations(&input)?;
    let counts = bin_counts(&values, &grid).map_err(|e| CliError::Input(e.to_string()))?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let xs = formats::polygon_grid(&counts, min, max, cfg.points_per_bin);
    let shown = if cfg.normalized { density.as_ref() } else { None };
    let polygon = formats::polygon_csv(&counts, &xs, shown)?;
    let written = write_all(
        out,
        vec![("histogram.csv", formats::histogram_csv(&counts)), ("polygon.csv", polygon)],
    )?;
    Ok(Outcome {
        written,
        failed_checks: Vec::new(),
        summary: format!(
            "{} observations in {} bins, polygon integral {}",
            values.len(),
            counts.iter().count(),
            fp_integral(&counts)
        ),
    })
}

/// Builds the plan shared by `variance` and `clt`.
pub fn experiment_plan(cfg: &ExperimentConfig) -> Result<ExperimentPlan, CliError> {
    let region = cfg.region.resolve()?;
    let (model, declared) = cfg.model.resolve(region.dim())?;
    let bin_width = cfg.bin_width.resolve(region.len())?;
    Ok(ExperimentPlan {
        model,
        region,
        bin_width,
        eval_points: cfg.eval_points.clone(),
        replicates: cfg.replicates,
        master_seed: cfg.master_seed,
        declared_mixing: declared,
        override_hypotheses: cfg.override_hypotheses,
    })
}

/// Names the config key behind a plan validation failure.
fn plan_error(e: fpoly_core::Error) -> CliError {
    use fpoly_core::Error as E;
    let path = match &e {
        E::HypothesisRefused(_) => return e.into(),
        E::InvalidExperiment(msg) if msg.contains("replicates") => "replicates",
        E::InvalidExperiment(_) | E::NonPositiveDensity { .. } | E::NonFinite(_) => "eval_points",
        E::InvalidBinWidth(_) | E::IndexRange { .. } => "bin_width",
        E::DimensionMismatch { .. } => "model",
        _ => "<root>",
    };
    CliError::config(path, e)
}

#[derive(Serialize)]
struct ReportFile<'a> {
    config: &'a Value,
    report: &'a ExperimentReport,
}

pub fn experiment(config: &Value, out: &Path, kind: ExperimentKind) -> Result<Outcome, CliError> {
    let cfg: ExperimentConfig = parse(config)?;
    if cfg.plot_grid && (cfg.points_per_bin == 0 || cfg.points_per_bin % 2 != 0) {
        return Err(CliError::config("points_per_bin", "must be a positive even number"));
    }
    let plan = experiment_plan(&cfg)?;
    let validated = plan.validate(kind).map_err(plan_error)?;
    let report = validated.run(&Rayon)?;

    let mut files = vec![
        ("report.json", formats::to_json(&ReportFile { config, report: &report })),
        ("statistics.csv", formats::statistics_csv(&report.eval_points, &report.statistics)),
    ];
    if cfg.plot_grid {
        let mut values = Vec::new();
        let p = &validated.plan;
        fpoly_core::fields::sample_into(&p.model, &p.region, p.master_seed, 0, &mut values)?;
        let counts = bin_counts(&values, &validated.grid)?;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let xs = formats::polygon_grid(&counts, min, max, cfg.points_per_bin);
        files.push(("grid.csv", formats::polygon_csv(&counts, &xs, Some(p.model.marginal()))?));
    }
    let written = write_all(out, files)?;
    let failed_checks = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} = {} (threshold {})", c.name, c.value, c.threshold))
        .collect();
    let summary = report
        .points
        .iter()
        .map(|p| {
            let ks = p.ks.map(|k| format!(", KS p {:.4}", k.p_value)).unwrap_or_default();
            format!("x={}: scaled variance {:.4}{ks}", p.x, p.scaled_variance)
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Outcome {
        written,
        failed_checks,
        summary,
    })
}

#[derive(Serialize)]
struct SweepFile<'a> {
    config: &'a Value,
    sweep: &'a SweepTable,
}

pub fn sweep(config: &Value, out: &Path) -> Result<Outcome, CliError> {
    let cfg: SweepConfig = parse(config)?;
    let d = cfg.region.dim()?;
    if !(cfg.gamma > 0.0 && cfg.gamma < 1.0) {
        return Err(CliError::config("gamma", format!("must lie in (0, 1), got {}", cfg.gamma)));
    }
    let (model, declared) = cfg.model.resolve(d)?;
    // the sweep replaces the region; a one-site cube carries the dimension
    let base = ExperimentPlan {
        model,
        region: fpoly_core::grid::SiteSet::rectangle(&vec![1; d]).at("region")?,
        bin_width: 0.5,
        eval_points: cfg.eval_points.clone(),
        replicates: cfg.replicates,
        master_seed: cfg.master_seed,
        declared_mixing: declared,
        override_hypotheses: cfg.override_hypotheses,
    };
    // catch config errors before the first (possibly long) run
    base.clone().validate(ExperimentKind::Variance).map_err(plan_error)?;
    let table = run_schedule_sweep(&base, &cfg.sides, cfg.gamma, &Rayon).at("sides")?;
    let written = write_all(
        out,
        vec![
            ("sweep.json", formats::to_json(&SweepFile { config, sweep: &table })),
            ("sweep.csv", formats::sweep_csv(&table)),
        ],
    )?;
    let failed_checks = if table.approach == Monotonicity::Strict {
        Vec::new()
    } else {
        vec![format!("|1 - scaled variance| does not shrink strictly ({:?})", table.approach)]
    };
    Ok(Outcome {
        written,
        failed_checks,
        summary: format!("{} sizes, approach {:?}", table.rows.len(), table.approach),
    })
}

pub fn lemma(config: &Value, out: &Path) -> Result<Outcome, CliError> {
    let cfg: LemmaConfig = parse(config)?;
    let profile = cfg.profile.resolve("profile")?;
    let table = lemma1_diagnostic_with(&profile, cfg.d, &cfg.schedule, cfg.rule).at("schedule")?;
    let written = write_all(
        out,
        vec![("lemma1.csv", formats::lemma1_csv(&table)), ("lemma1.json", formats::to_json(&table))],
    )?;
    let mut failed_checks = Vec::new();
    for (name, t) in [("m", table.m_trend), ("m^d b", table.volume_trend), ("tail ratio", table.tail_trend)] {
        if t != Monotonicity::Strict {
            failed_checks.push(format!("{name} trend is {t:?}"));
        }
    }
    Ok(Outcome {
        written,
        failed_checks,
        summary: format!(
            "{} rows; trends m {:?}, m^d b {:?}, tail ratio {:?}",
            table.rows.len(),
            table.m_trend,
            table.volume_trend,
            table.tail_trend
        ),
    })
}

#[derive(Serialize)]
struct HypothesesFile<'a> {
    config: &'a Value,
    certificates: &'a [HypothesisCertificate],
}

pub fn check_hypotheses(config: &Value, out: &Path) -> Result<Outcome, CliError> {
    let cfg: HypothesesConfig = parse(config)?;
    let profile = cfg.profile.resolve("profile")?;
    let conditions = cfg.conditions(profile.kind)?;
    let certificates = conditions
        .iter()
        .map(|c| hypothesis_check(&profile, cfg.d, *c).at("profile"))
        .collect::<Result<Vec<_>, _>>()?;
    let written = write_all(
        out,
        vec![(
            "hypotheses.json",
            formats::to_json(&HypothesesFile {
                config,
                certificates: &certificates,
            }),
        )],
    )?;
    let failed_checks = certificates
        .iter()
        .filter(|c| !c.holds)
        .map(|c| format!("{} fails: {}", c.condition.name(), c.witness.clone().unwrap_or_default()))
        .collect();
    let summary = certificates
        .iter()
        .map(|c| match c.sum {
            Some(s) => format!("{} holds (sum {} +/- {:e})", c.condition.name(), s.value, s.error_bound),
            None => format!("{} diverges", c.condition.name()),
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Outcome {
        written,
        failed_checks,
        summary,
    })
}
