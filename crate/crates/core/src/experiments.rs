//! Monte Carlo harness for the variance limit and the multivariate CLT.
//!
//! Replicate `r` of an experiment draws its field from the counter-based
//! generator at `(master_seed, r)`, so every replicate can be computed
//! independently and in any order. All reductions run over replicates in
//! ascending order, which makes reports bitwise reproducible under any
//! [`Executor`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::densities::TargetDensity;
use crate::estimator::{iid_variance_oracle, EvalPoint};
use crate::fields::{certify_mixing, sample_into, FieldKind, FieldModel};
use crate::grid::{BinGrid, SiteSet};
use crate::ks::{ks_test_normal, KsResult, MIN_KS_VALUES};
use crate::mixing::{hypothesis_check, Condition, MixingKind, MixingProfile, Monotonicity};
use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// Significance floor for the per-point normality checks.
pub const KS_SIGNIFICANCE: f64 = 0.01;
/// Below this many replicates the relative standard error of a sample
/// variance, `sqrt(2/(R-1))`, exceeds 1/4 and the report carries a warning.
pub const WIDE_VARIANCE_REPLICATES: u32 = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ExperimentKind {
    Variance,
    Clt,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub model: FieldModel,
    pub region: SiteSet,
    pub bin_width: f64,
    pub eval_points: Vec<f64>,
    pub replicates: u32,
    pub master_seed: u64,
    /// Replaces the model's certified profile in the hypothesis check.
    pub declared_mixing: Option<MixingProfile>,
    /// Run even if the hypothesis check fails; the report records it.
    pub override_hypotheses: bool,
}

/// Runs `n` replicate jobs and returns their results in replicate order.
pub trait Executor {
    fn map_replicates<T, F>(&self, n: u32, job: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u32) -> Result<T> + Sync + Send;
}

/// Runs replicates one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_replicates<T, F>(&self, n: u32, job: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u32) -> Result<T> + Sync + Send,
    {
        (0..n).map(job).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HypothesisSummary {
    pub condition: Condition,
    /// `certified` when the profile comes from the generator, `declared` otherwise.
    pub source: String,
    pub holds: bool,
    pub detail: Option<String>,
}

/// An experiment that passed validation.
#[derive(Debug, Clone)]
pub struct ValidatedPlan {
    pub plan: ExperimentPlan,
    pub kind: ExperimentKind,
    pub grid: BinGrid,
    pub points: Vec<EvalPoint>,
    pub hypothesis: HypothesisSummary,
    pub warnings: Vec<String>,
}

impl ExperimentPlan {
    /// Checks the plan and the mixing hypotheses required by `kind`.
    ///
    /// A failing hypothesis yields [`Error::HypothesisRefused`] unless
    /// `override_hypotheses` is set.
    pub fn validate(self, kind: ExperimentKind) -> Result<ValidatedPlan> {
        let grid = BinGrid::new(self.bin_width)?;
        if self.replicates < 2 {
            return Err(Error::InvalidExperiment(format!(
                "need at least 2 replicates, got {}",
                self.replicates
            )));
        }
        if self.eval_points.is_empty() {
            return Err(Error::InvalidExperiment("no evaluation points".into()));
        }
        if self.region.is_empty() {
            return Err(Error::EmptySiteSet);
        }
        if let Some(d) = self.model.dim() {
            if d != self.region.dim() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: self.region.dim(),
                });
            }
        }
        for (n, x) in self.eval_points.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite(*x));
            }
            if self.eval_points[..n].contains(x) {
                return Err(Error::InvalidExperiment(format!("evaluation point {x} is repeated")));
            }
        }
        let f = *self.model.marginal();
        let points = self
            .eval_points
            .iter()
            .map(|&x| EvalPoint::new(&f, &grid, x))
            .collect::<Result<Vec<_>>>()?;

        let (profile, source) = match &self.declared_mixing {
            Some(p) => (p.clone(), "declared"),
            None => (certify_mixing(&self.model).alpha, "certified"),
        };
        let condition = match (kind, profile.kind) {
            (ExperimentKind::Variance, MixingKind::Alpha) => Condition::Prop1I,
            (ExperimentKind::Variance, MixingKind::Rho) => Condition::Prop1Ii,
            (ExperimentKind::Clt, MixingKind::Alpha) => Condition::Thm1I,
            (ExperimentKind::Clt, MixingKind::Rho) => Condition::Thm1Ii,
        };
        let d = self.region.dim() as u32;
        let (holds, detail) = match hypothesis_check(&profile, d, condition) {
            Ok(c) => (c.holds, c.witness),
            Err(e @ (Error::CannotCertify(_) | Error::ConditionMismatch(_))) => (false, Some(format!("{e}"))),
            Err(e) => return Err(e),
        };
        let mut warnings = Vec::new();
        if !holds {
            let why = detail.clone().unwrap_or_else(|| "condition fails".into());
            if !self.override_hypotheses {
                return Err(Error::HypothesisRefused(format!("{}: {why}", condition.name())));
            }
            warnings.push(format!(
                "hypothesis {} not certified ({why}); run forced by override",
                condition.name()
            ));
        }
        if self.replicates < WIDE_VARIANCE_REPLICATES {
            warnings.push(format!(
                "only {} replicates: variance estimates have relative standard error above 25%",
                self.replicates
            ));
        }
        if (self.replicates as usize) < MIN_KS_VALUES {
            warnings.push(format!("fewer than {MIN_KS_VALUES} replicates: normality tests skipped"));
        }
        Ok(ValidatedPlan {
            kind,
            grid,
            points,
            hypothesis: HypothesisSummary {
                condition,
                source: source.into(),
                holds,
                detail,
            },
            warnings,
            plan: self,
        })
    }
}

/// Per-replicate output: `f_n(x_j)` and the CLT statistic at each point.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRow {
    pub normalized: Vec<f64>,
    pub statistics: Vec<f64>,
}

/// The counts `nu_k`, `nu_{k+1}` needed at every point, from one sample.
fn local_counts(values: &[f64], grid: &BinGrid, bins: &[i64], counts: &mut [u64]) -> Result<()> {
    counts.iter_mut().for_each(|c| *c = 0);
    for &x in values {
        let k = grid.bin_index(x)?;
        if let Ok(n) = bins.binary_search(&k) {
            counts[n] += 1;
        }
    }
    Ok(())
}

impl ValidatedPlan {
    /// Computes replicate `r`.
    pub fn replicate(&self, r: u32) -> Result<ReplicateRow> {
        let mut values = Vec::new();
        sample_into(&self.plan.model, &self.plan.region, self.plan.master_seed, r, &mut values)?;
        let mut bins: Vec<i64> = self.points.iter().flat_map(|p| [p.k, p.k + 1]).collect();
        bins.sort_unstable();
        bins.dedup();
        let mut counts = vec![0u64; bins.len()];
        local_counts(&values, &self.grid, &bins, &mut counts)?;
        let total = values.len() as u64;
        let nu = |k: i64| counts[bins.binary_search(&k).unwrap_or_default()];
        let mut row = ReplicateRow {
            normalized: Vec::with_capacity(self.points.len()),
            statistics: Vec::with_capacity(self.points.len()),
        };
        for p in &self.points {
            let (a, b) = (nu(p.k), nu(p.k + 1));
            row.normalized.push(p.normalized(a, b, total));
            row.statistics.push(p.statistic(a, b, total));
        }
        Ok(row)
    }

    pub fn run(&self, exec: &impl Executor) -> Result<ExperimentReport> {
        let rows = exec.map_replicates(self.plan.replicates, |r| self.replicate(r))?;
        self.summarize(rows)
    }

    fn summarize(&self, rows: Vec<ReplicateRow>) -> Result<ExperimentReport> {
        let plan = &self.plan;
        let n_sites = plan.region.len();
        let lambda_b = n_sites as f64 * self.grid.bin_width();
        let r = rows.len();
        let statistics: Vec<Vec<f64>> = rows.iter().map(|row| row.statistics.clone()).collect();
        let covariance = covariance_matrix(&statistics);
        let iid = plan.model.kind() == FieldKind::Iid;
        let f = *plan.model.marginal();

        let mut points = Vec::with_capacity(self.points.len());
        let mut checks = Vec::new();
        let band = 3.0 * libm::sqrt(2.0 / (r as f64 - 1.0));
        for (j, p) in self.points.iter().enumerate() {
            let fn_col: Vec<f64> = rows.iter().map(|row| row.normalized[j]).collect();
            let st_col: Vec<f64> = rows.iter().map(|row| row.statistics[j]).collect();
            let (mean_fn, var_fn) = mean_var(&fn_col);
            let (mean_stat, var_stat) = mean_var(&st_col);
            let oracle_ratio = if iid {
                iid_variance_oracle(&f, &self.grid, p.x)?.ratio
            } else {
                None
            };
            let ks = if r >= MIN_KS_VALUES { Some(ks_test_normal(&st_col)?) } else { None };
            let scaled_variance = lambda_b * var_fn;
            match self.kind {
                ExperimentKind::Variance => {
                    let target = oracle_ratio.unwrap_or(1.0);
                    let dev = (scaled_variance - target).abs();
                    checks.push(Check {
                        name: format!("scaled_variance[x={}]", p.x),
                        passed: dev <= band,
                        value: scaled_variance,
                        threshold: band,
                        detail: format!("|{scaled_variance} - {target}| <= 3 sqrt(2/(R-1))"),
                    });
                }
                ExperimentKind::Clt => {
                    if let Some(ks) = ks {
                        checks.push(Check {
                            name: format!("ks_normal[x={}]", p.x),
                            passed: ks.p_value > KS_SIGNIFICANCE,
                            value: ks.p_value,
                            threshold: KS_SIGNIFICANCE,
                            detail: format!("KS D = {} against N(0,1)", ks.statistic),
                        });
                    }
                }
            }
            points.push(PointSummary {
                x: p.x,
                k: p.k,
                sigma2: p.sigma2,
                expected_fp: p.expected,
                mean_fn,
                mean_statistic: mean_stat,
                scaled_variance,
                statistic_variance: var_stat,
                oracle_ratio,
                ks,
            });
        }
        if self.kind == ExperimentKind::Clt {
            let tol = 3.0 / libm::sqrt(r as f64);
            for i in 0..covariance.len() {
                for j in (i + 1)..covariance.len() {
                    let c = covariance[i][j];
                    checks.push(Check {
                        name: format!("covariance[{i},{j}]"),
                        passed: c.abs() < tol,
                        value: c,
                        threshold: tol,
                        detail: "off-diagonal covariance within 3/sqrt(R) of 0".into(),
                    });
                }
            }
        }
        Ok(ExperimentReport {
            experiment: self.kind,
            model_id: plan.model.id(),
            dim: plan.region.dim(),
            region_size: n_sites,
            bin_width: self.grid.bin_width(),
            lambda_b,
            replicates: plan.replicates,
            master_seed: plan.master_seed,
            eval_points: plan.eval_points.clone(),
            hypothesis: self.hypothesis.clone(),
            points,
            covariance,
            checks,
            warnings: self.warnings.clone(),
            statistics,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointSummary {
    pub x: f64,
    pub k: i64,
    pub sigma2: f64,
    pub expected_fp: f64,
    pub mean_fn: f64,
    pub mean_statistic: f64,
    /// `|Lambda| b Var(f_n(x))`
    pub scaled_variance: f64,
    pub statistic_variance: f64,
    /// `w/sigma^2`, the exact limit target for i.i.d. fields.
    pub oracle_ratio: Option<f64>,
    pub ks: Option<KsResult>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub model_id: String,
    pub dim: usize,
    pub region_size: usize,
    pub bin_width: f64,
    pub lambda_b: f64,
    pub replicates: u32,
    pub master_seed: u64,
    pub eval_points: Vec<f64>,
    pub hypothesis: HypothesisSummary,
    pub points: Vec<PointSummary>,
    /// Unbiased covariance of the statistic vectors.
    pub covariance: Vec<Vec<f64>>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    /// `R x r` statistic matrix; persisted separately as CSV.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub statistics: Vec<Vec<f64>>,
}

impl ExperimentReport {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Mean and unbiased variance, accumulated in input order.
pub fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).collect::<CompensatedSum>().value();
    (mean, ss / (n - 1.0))
}

/// Unbiased covariance matrix of the rows' coordinates.
pub fn covariance_matrix(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let r = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    let means: Vec<f64> = (0..p)
        .map(|j| rows.iter().map(|row| row[j]).collect::<CompensatedSum>().value() / r as f64)
        .collect();
    let mut cov = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in i..p {
            let s = rows
                .iter()
                .map(|row| (row[i] - means[i]) * (row[j] - means[j]))
                .collect::<CompensatedSum>()
                .value();
            let c = if r > 1 { s / (r as f64 - 1.0) } else { f64::NAN };
            cov[i][j] = c;
            cov[j][i] = c;
        }
    }
    cov
}

pub fn run_variance_experiment(plan: ExperimentPlan, exec: &impl Executor) -> Result<ExperimentReport> {
    plan.validate(ExperimentKind::Variance)?.run(exec)
}

pub fn run_clt_experiment(plan: ExperimentPlan, exec: &impl Executor) -> Result<ExperimentReport> {
    plan.validate(ExperimentKind::Clt)?.run(exec)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub side: usize,
    pub region_size: usize,
    pub bin_width: f64,
    pub lambda_b: f64,
    /// Per evaluation point.
    pub scaled_variance: Vec<f64>,
    pub ks_p_value: Vec<Option<f64>>,
    pub oracle_ratio: Vec<Option<f64>>,
    /// Mean over points of `|1 - scaled_variance|`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepTable {
    pub gamma: f64,
    pub rows: Vec<SweepRow>,
    /// Whether `deviation` shrinks along the sweep.
    pub approach: Monotonicity,
    pub warnings: Vec<String>,
}

/// Repeats the variance experiment on cubes of the given side lengths with
/// `b = |Lambda|^-gamma`. The region of `base` only fixes the dimension.
pub fn run_schedule_sweep(base: &ExperimentPlan, sides: &[usize], gamma: f64, exec: &impl Executor) -> Result<SweepTable> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidSchedule(format!(
            "gamma must lie in (0, 1), got {gamma}: at 0 the bin width does not shrink, at 1 |Lambda| b stays bounded"
        )));
    }
    if sides.is_empty() {
        return Err(Error::InvalidSchedule("no sizes given".into()));
    }
    if sides.windows(2).any(|w| w[1] <= w[0]) || sides[0] == 0 {
        return Err(Error::InvalidSchedule("sizes must be positive and increasing".into()));
    }
    let d = base.region.dim();
    let mut rows = Vec::with_capacity(sides.len());
    let mut warnings = Vec::new();
    for &side in sides {
        let region = SiteSet::rectangle(&vec![side; d])?;
        let n = region.len();
        let b = libm::pow(n as f64, -gamma);
        let plan = ExperimentPlan {
            region,
            bin_width: b,
            ..base.clone()
        };
        let report = run_variance_experiment(plan, exec)?;
        for w in &report.warnings {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }
        let sv: Vec<f64> = report.points.iter().map(|p| p.scaled_variance).collect();
        let deviation = sv.iter().map(|v| (1.0 - v).abs()).sum::<f64>() / sv.len() as f64;
        rows.push(SweepRow {
            side,
            region_size: n,
            bin_width: b,
            lambda_b: report.lambda_b,
            scaled_variance: sv,
            ks_p_value: report.points.iter().map(|p| p.ks.map(|k| k.p_value)).collect(),
            oracle_ratio: report.points.iter().map(|p| p.oracle_ratio).collect(),
            deviation,
        });
    }
    let approach = {
        let dev: Vec<f64> = rows.iter().map(|r| r.deviation).collect();
        if dev.windows(2).all(|w| w[1] < w[0]) {
            Monotonicity::Strict
        } else if dev.windows(2).all(|w| w[1] <= w[0]) {
            Monotonicity::Weak
        } else {
            Monotonicity::Violated
        }
    };
    Ok(SweepTable {
        gamma,
        rows,
        approach,
        warnings,
    })
}

/// Convenience constructor for the common case of an i.i.d. field.
pub fn iid_plan(
    marginal: TargetDensity,
    region: SiteSet,
    bin_width: f64,
    eval_points: Vec<f64>,
    replicates: u32,
    master_seed: u64,
) -> ExperimentPlan {
    ExperimentPlan {
        model: FieldModel::iid(marginal),
        region,
        bin_width,
        eval_points,
        replicates,
        master_seed,
        declared_mixing: None,
        override_hypotheses: false,
    }
}
