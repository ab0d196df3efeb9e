//! JSON configuration: loading, `--set` overrides and the typed sections
//! each subcommand reads.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use fpoly_core::densities::TargetDensity;
use fpoly_core::fields::FieldModel;
use fpoly_core::grid::{Site, SiteSet};
use fpoly_core::mixing::{BlockingRule, Condition, Decay, MixingKind, MixingProfile, PolynomialTail, Tau};

use crate::error::{AtPath, CliError};

/// Reads a config file. Unreadable files are I/O errors; malformed JSON is a
/// config error.
pub fn load(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::config("<root>", e))?;
    if !value.is_object() {
        return Err(CliError::config("<root>", "config must be a JSON object"));
    }
    Ok(value)
}

/// Applies `key.sub=value` overrides. Values are parsed as JSON when
/// possible and kept as strings otherwise; numeric segments index arrays.
pub fn apply_overrides(config: &mut Value, overrides: &[String]) -> Result<(), CliError> {
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::config(item.as_str(), "override must look like key=value"))?;
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(CliError::config(key, "empty key segment in override"));
        }
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
        let mut slot = &mut *config;
        for seg in key.split('.') {
            slot = match slot {
                Value::Array(items) => {
                    let n: usize = seg
                        .parse()
                        .map_err(|_| CliError::config(key, format!("`{seg}` is not an array index")))?;
                    items
                        .get_mut(n)
                        .ok_or_else(|| CliError::config(key, format!("index {n} out of range")))?
                }
                other => {
                    if !other.is_object() {
                        *other = Value::Object(Map::new());
                    }
                    other
                        .as_object_mut()
                        .expect("just made an object")
                        .entry(seg)
                        .or_insert(Value::Null)
                }
            };
        }
        *slot = value;
    }
    Ok(())
}

/// Deserializes a config section, reporting the JSON path of any failure.
pub fn parse<T: DeserializeOwned>(config: &Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(config).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<root>".to_owned() } else { path };
        CliError::config(path, e.into_inner())
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalSpec {
    Uniform {
        #[serde(default)]
        lo: Option<f64>,
        #[serde(default)]
        hi: Option<f64>,
    },
    Triangular,
    Normal {
        #[serde(default)]
        mean: Option<f64>,
        #[serde(default)]
        sd: Option<f64>,
    },
    NormalMixture {
        weight: f64,
        mean1: f64,
        sd1: f64,
        mean2: f64,
        sd2: f64,
    },
}

impl MarginalSpec {
    pub fn resolve(&self, path: &str) -> Result<TargetDensity, CliError> {
        match *self {
            Self::Uniform { lo, hi } => TargetDensity::uniform(lo.unwrap_or(0.0), hi.unwrap_or(1.0)),
            Self::Triangular => Ok(TargetDensity::Triangular),
            Self::Normal { mean, sd } => TargetDensity::normal(mean.unwrap_or(0.0), sd.unwrap_or(1.0)),
            Self::NormalMixture {
                weight,
                mean1,
                sd1,
                mean2,
                sd2,
            } => TargetDensity::normal_mixture(weight, mean1, sd1, mean2, sd2),
        }
        .at(path)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Iid,
    MDependentGaussianMa,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub marginal: MarginalSpec,
    /// Range of the moving average.
    #[serde(default)]
    pub m: Option<u32>,
    /// `(2m+1)^d` weights in lexicographic order; all ones when absent.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    /// Declared mixing profile replacing the generator's certificate.
    #[serde(default)]
    pub mixing: Option<ProfileSpec>,
}

impl ModelSpec {
    pub fn resolve(&self, dim: usize) -> Result<(FieldModel, Option<MixingProfile>), CliError> {
        let marginal = self.marginal.resolve("model.marginal")?;
        let model = match self.kind {
            ModelKind::Iid => {
                if self.m.is_some_and(|m| m != 0) || self.weights.is_some() {
                    return Err(CliError::config("model", "an iid model takes no `m` or `weights`"));
                }
                FieldModel::iid(marginal)
            }
            ModelKind::MDependentGaussianMa => {
                let m = self
                    .m
                    .ok_or_else(|| CliError::config("model.m", "missing field `m`"))?;
                match &self.weights {
                    Some(w) => FieldModel::moving_average(marginal, dim, m, w.clone()).at("model.weights")?,
                    None => FieldModel::box_average(marginal, dim, m).at("model.m")?,
                }
            }
        };
        let declared = self
            .mixing
            .as_ref()
            .map(|p| p.resolve("model.mixing"))
            .transpose()?;
        Ok((model, declared))
    }
}

/// One of the accepted region shapes.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub sites: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub rectangle: Option<Vec<usize>>,
    #[serde(default)]
    pub ball_radius: Option<u32>,
    #[serde(default)]
    pub random_connected: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RegionSpec {
    pub fn resolve(&self) -> Result<SiteSet, CliError> {
        let shapes = [
            self.sites.is_some(),
            self.rectangle.is_some(),
            self.ball_radius.is_some(),
            self.random_connected.is_some(),
        ];
        if shapes.iter().filter(|s| **s).count() != 1 {
            return Err(CliError::config(
                "region",
                "give exactly one of `sites`, `rectangle`, `ball_radius`, `random_connected`",
            ));
        }
        if let Some(sides) = &self.rectangle {
            if self.d.is_some_and(|d| d != sides.len()) {
                return Err(CliError::config("region.d", "does not match the rectangle's dimension"));
            }
            return SiteSet::rectangle(sides).at("region.rectangle");
        }
        let d = self
            .d
            .ok_or_else(|| CliError::config("region.d", "missing field `d`"))?;
        if let Some(sites) = &self.sites {
            return SiteSet::new(d, sites.iter().map(|s| Site::new(s.clone()))).at("region.sites");
        }
        if let Some(r) = self.ball_radius {
            return SiteSet::ball(d, r).at("region.ball_radius");
        }
        let size = self.random_connected.unwrap_or(0);
        let seed = self
            .seed
            .ok_or_else(|| CliError::config("region.seed", "random_connected needs a `seed`"))?;
        SiteSet::random_connected(d, size, seed).at("region.random_connected")
    }

    pub fn dim(&self) -> Result<usize, CliError> {
        match (&self.rectangle, self.d) {
            (Some(r), _) => Ok(r.len()),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(CliError::config("region.d", "missing field `d`")),
        }
    }
}

/// `tau`: a positive integer or `"inf"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Finite(u32),
    Word(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    pub theta: f64,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecaySpec {
    FiniteRange {
        m0: u64,
        #[serde(default)]
        level: Option<f64>,
    },
    Polynomial {
        theta: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        cap: Option<f64>,
    },
    Table {
        values: Vec<f64>,
        #[serde(default)]
        tail: Option<TailSpec>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: MixingKind,
    #[serde(default)]
    pub tau: Option<TauSpec>,
    pub decay: DecaySpec,
}

impl ProfileSpec {
    pub fn resolve(&self, path: &str) -> Result<MixingProfile, CliError> {
        let tau = match &self.tau {
            None => Tau::Infinite,
            Some(TauSpec::Finite(n)) => Tau::Finite(*n),
            Some(TauSpec::Word(w)) if w == "inf" => Tau::Infinite,
            Some(TauSpec::Word(w)) => {
                return Err(CliError::config(format!("{path}.tau"), format!("expected a positive integer or \"inf\", got {w:?}")))
            }
        };
        let decay = match &self.decay {
            DecaySpec::FiniteRange { m0, level } => Decay::FiniteRange {
                m0: *m0,
                level: level.unwrap_or(match self.kind {
                    MixingKind::Alpha => 0.25,
                    MixingKind::Rho => 1.0,
                }),
            },
            DecaySpec::Polynomial { theta, scale, cap } => Decay::Polynomial {
                theta: *theta,
                scale: *scale,
                cap: *cap,
            },
            DecaySpec::Table { values, tail } => Decay::Table {
                values: values.clone(),
                tail: tail.as_ref().map(|t| PolynomialTail {
                    theta: t.theta,
                    scale: t.scale,
                }),
            },
        };
        MixingProfile::new(self.kind, tau, decay).at(path)
    }
}

/// A fixed bin width or the rule `b = |Lambda|^-gamma`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BinWidthSpec {
    Fixed(f64),
    Rule { gamma: f64 },
}

impl BinWidthSpec {
    pub fn resolve(&self, region_size: usize) -> Result<f64, CliError> {
        match *self {
            Self::Fixed(b) if b.is_finite() && b > 0.0 => Ok(b),
            Self::Fixed(b) => Err(CliError::config("bin_width", format!("must be positive, got {b}"))),
            Self::Rule { gamma } if gamma > 0.0 && gamma < 1.0 => Ok((region_size as f64).powf(-gamma)),
            Self::Rule { gamma } => Err(CliError::config("bin_width.gamma", format!("must lie in (0, 1), got {gamma}"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct SimulateConfig {
    pub model: ModelSpec,
    pub region: RegionSpec,
    pub seed: u64,
    #[serde(default)]
    pub replicate: u32,
}

#[derive(Debug, Clone, Deserialize)]
pub struct EstimateConfig {
    pub input: PathBuf,
    pub bin_width: f64,
    #[serde(default = "default_points_per_bin")]
    pub points_per_bin: u32,
    #[serde(default)]
    pub normalized: bool,
    #[serde(default)]
    pub density: Option<MarginalSpec>,
}

fn default_points_per_bin() -> u32 {
    20
}

#[derive(Debug, Clone, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub region: RegionSpec,
    pub bin_width: BinWidthSpec,
    pub eval_points: Vec<f64>,
    pub replicates: u32,
    pub master_seed: u64,
    #[serde(default)]
    pub override_hypotheses: bool,
    /// Also write the polygon of replicate 0 on a dense grid.
    #[serde(default)]
    pub plot_grid: bool,
    #[serde(default = "default_points_per_bin")]
    pub points_per_bin: u32,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SweepConfig {
    pub model: ModelSpec,
    pub region: RegionSpec,
    pub eval_points: Vec<f64>,
    pub replicates: u32,
    pub master_seed: u64,
    #[serde(default)]
    pub override_hypotheses: bool,
    pub gamma: f64,
    pub sides: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct LemmaConfig {
    pub profile: ProfileSpec,
    pub d: u32,
    pub schedule: Vec<f64>,
    #[serde(default)]
    pub rule: BlockingRule,
}

#[derive(Debug, Clone, Deserialize)]
pub struct HypothesesConfig {
    pub profile: ProfileSpec,
    pub d: u32,
    /// Defaults to every condition matching the profile's kind.
    #[serde(default)]
    pub conditions: Option<Vec<String>>,
}

impl HypothesesConfig {
    pub fn conditions(&self, kind: MixingKind) -> Result<Vec<Condition>, CliError> {
        match &self.conditions {
            None => Ok(match kind {
                MixingKind::Alpha => vec![Condition::Prop1I, Condition::Thm1I],
                MixingKind::Rho => vec![Condition::Prop1Ii, Condition::Thm1Ii],
            }),
            Some(names) => names
                .iter()
                .enumerate()
                .map(|(n, s)| {
                    Condition::parse(s).ok_or_else(|| {
                        CliError::config(
                            format!("conditions[{n}]"),
                            format!("unknown condition {s:?} (expected prop1_i, prop1_ii, thm1_i or thm1_ii)"),
                        )
                    })
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_create_and_replace() {
        let mut v = json!({"model": {"m": 1}, "eval_points": [0.1, 0.2]});
        apply_overrides(
            &mut v,
            &["model.m=2".into(), "eval_points.1=0.5".into(), "region.rectangle=[4,4]".into(), "name=abc".into()],
        )
        .unwrap();
        assert_eq!(v, json!({"model": {"m": 2}, "eval_points": [0.1, 0.5], "region": {"rectangle": [4, 4]}, "name": "abc"}));
        assert!(apply_overrides(&mut v, &["novalue".into()]).is_err());
        assert!(apply_overrides(&mut v, &["eval_points.7=1".into()]).is_err());
    }

    #[test]
    fn missing_key_names_path() {
        let v = json!({"model": {"kind": "iid"}, "region": {"rectangle": [2]}, "seed": 1});
        let err = parse::<SimulateConfig>(&v).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("marginal"), "{err}");
    }

    #[test]
    fn profile_specs() {
        let v = json!({"kind": "alpha", "tau": "inf", "decay": {"type": "polynomial", "theta": 5, "cap": 0.25}});
        let p: ProfileSpec = parse(&v).unwrap();
        let p = p.resolve("profile").unwrap();
        assert_eq!(p.bound(1), 0.25);
        let v = json!({"kind": "rho", "tau": 1, "decay": {"type": "finite_range", "m0": 2}});
        let p = parse::<ProfileSpec>(&v).unwrap().resolve("profile").unwrap();
        assert_eq!((p.tau, p.bound(2), p.bound(3)), (Tau::Finite(1), 1.0, 0.0));
        let v = json!({"kind": "rho", "tau": "many", "decay": {"type": "finite_range", "m0": 2}});
        assert!(parse::<ProfileSpec>(&v).unwrap().resolve("profile").is_err());
    }

    #[test]
    fn region_shapes() {
        let r: RegionSpec = parse(&json!({"rectangle": [3, 4]})).unwrap();
        assert_eq!(r.resolve().unwrap().len(), 12);
        let r: RegionSpec = parse(&json!({"d": 2, "ball_radius": 1})).unwrap();
        assert_eq!(r.resolve().unwrap().len(), 9);
        let r: RegionSpec = parse(&json!({"d": 1, "sites": [[0], [5]]})).unwrap();
        assert_eq!(r.resolve().unwrap().len(), 2);
        let r: RegionSpec = parse(&json!({"d": 2, "random_connected": 30, "seed": 4})).unwrap();
        assert_eq!(r.resolve().unwrap().len(), 30);
        let r: RegionSpec = parse(&json!({"d": 2})).unwrap();
        assert!(r.resolve().is_err());
        assert!(parse::<RegionSpec>(&json!({"rectangle": [2], "colour": 1})).is_err());
    }
}
