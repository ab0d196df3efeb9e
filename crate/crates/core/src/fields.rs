//! Seeded random-field generators with exact marginals.
//!
//! Both generators are pure functions of `(model, region, seed, replicate)`.
//! Values at a site depend only on the site (and, for the moving average, on
//! the innovations at absolute coordinates around it), so samples taken on
//! overlapping regions agree where they overlap.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::densities::TargetDensity;
use crate::grid::{sup_distance, BinGrid, SiteSet};
use crate::mixing::{MixingKind, MixingProfile, Tau};
use crate::normal;
use crate::quadrature::Simpson;
use crate::rng::{index_lanes, site_lanes, CounterRng, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FieldKind {
    Iid,
    MDependentGaussianMa,
}

/// A stationary field generator.
///
/// For the moving average, `weights` holds `c_u` for `u` in `{-m..m}^d` in
/// lexicographic order (last coordinate fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldModel {
    kind: FieldKind,
    marginal: TargetDensity,
    dim: Option<usize>,
    range: u32,
    weights: Vec<f64>,
}

impl FieldModel {
    pub fn iid(marginal: TargetDensity) -> Self {
        Self {
            kind: FieldKind::Iid,
            marginal,
            dim: None,
            range: 0,
            weights: Vec::new(),
        }
    }

    pub fn moving_average(marginal: TargetDensity, dim: usize, range: u32, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if range < 1 {
            return Err(Error::InvalidModel("moving average needs range m >= 1".into()));
        }
        let side = 2 * range as usize + 1;
        let expected = u32::try_from(dim)
            .ok()
            .and_then(|d| side.checked_pow(d))
            .ok_or(Error::Overflow("moving-average window"))?;
        if weights.len() != expected {
            return Err(Error::InvalidModel(format!(
                "expected (2m+1)^d = {expected} weights, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::NonFinite(*w));
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidModel("moving-average weights are all zero".into()));
        }
        Ok(Self {
            kind: FieldKind::MDependentGaussianMa,
            marginal,
            dim: Some(dim),
            range,
            weights,
        })
    }

    /// Moving average with every weight equal to one.
    pub fn box_average(marginal: TargetDensity, dim: usize, range: u32) -> Result<Self> {
        let n = (2 * range as usize + 1).pow(dim as u32);
        Self::moving_average(marginal, dim, range, vec![1.0; n])
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn marginal(&self) -> &TargetDensity {
        &self.marginal
    }

    /// Lattice dimension the model is tied to; `None` for i.i.d. fields.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn range(&self) -> u32 {
        self.range
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Short identifier such as `iid/normal` or `ma1/uniform`.
    pub fn id(&self) -> alloc::string::String {
        match self.kind {
            FieldKind::Iid => format!("iid/{}", self.marginal.name()),
            FieldKind::MDependentGaussianMa => format!("ma{}/{}", self.range, self.marginal.name()),
        }
    }

    /// Window offsets in weight order.
    fn offsets(&self) -> Vec<Vec<i64>> {
        let d = self.dim.unwrap_or(0);
        let m = i64::from(self.range);
        let mut out = Vec::with_capacity(self.weights.len());
        let mut u = vec![-m; d];
        loop {
            out.push(u.clone());
            let mut axis = d;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if u[axis] < m {
                    u[axis] += 1;
                    break;
                }
                u[axis] = -m;
            }
        }
    }

    /// `Corr(G_0, G_lag) = sum_u c_u c_{u+lag} / sum_u c_u^2`.
    pub fn lag_correlation(&self, lag: &[i64]) -> Result<f64> {
        match self.kind {
            FieldKind::Iid => Ok(if lag.iter().all(|c| *c == 0) { 1.0 } else { 0.0 }),
            FieldKind::MDependentGaussianMa => {
                let d = self.dim.unwrap_or(0);
                if lag.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: lag.len(),
                    });
                }
                let offsets = self.offsets();
                let m = i64::from(self.range);
                let side = 2 * m + 1;
                let index = |u: &[i64]| -> Option<usize> {
                    let mut n = 0i64;
                    for &c in u {
                        if c < -m || c > m {
                            return None;
                        }
                        n = n * side + (c + m);
                    }
                    Some(n as usize)
                };
                let mut num = 0.0;
                let mut shifted = vec![0i64; d];
                for (u, c) in offsets.iter().zip(&self.weights) {
                    for axis in 0..d {
                        shifted[axis] = u[axis] + lag[axis];
                    }
                    if let Some(n) = index(&shifted) {
                        num += c * self.weights[n];
                    }
                }
                let den: f64 = self.weights.iter().map(|c| c * c).sum();
                Ok(num / den)
            }
        }
    }
}

/// Observed values `X_i`, aligned with `region.iter()`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub region: SiteSet,
    pub values: Vec<f64>,
    pub model_id: alloc::string::String,
    pub seed: u64,
    pub replicate: u32,
}

/// `X_i = quantile(U_i)` with `U_i` keyed by the position of `i` in the region.
pub fn sample_iid(marginal: &TargetDensity, region: &SiteSet, seed: u64) -> Result<FieldSample> {
    sample(&FieldModel::iid(*marginal), region, seed, 0)
}

pub fn sample_m_dependent(model: &FieldModel, region: &SiteSet, seed: u64) -> Result<FieldSample> {
    if model.kind != FieldKind::MDependentGaussianMa {
        return Err(Error::InvalidModel("not a moving-average model".into()));
    }
    sample(model, region, seed, 0)
}

/// Draws replicate `replicate` of `model` on `region`.
pub fn sample(model: &FieldModel, region: &SiteSet, seed: u64, replicate: u32) -> Result<FieldSample> {
    let mut values = Vec::new();
    sample_into(model, region, seed, replicate, &mut values)?;
    Ok(FieldSample {
        region: region.clone(),
        values,
        model_id: model.id(),
        seed,
        replicate,
    })
}

/// As [`sample`], writing the values into `out` (cleared first).
pub fn sample_into(model: &FieldModel, region: &SiteSet, seed: u64, replicate: u32, out: &mut Vec<f64>) -> Result<()> {
    if region.is_empty() {
        return Err(Error::EmptySiteSet);
    }
    out.clear();
    out.reserve(region.len());
    match model.kind {
        FieldKind::Iid => {
            let rng = CounterRng::new(seed, Stream::Iid);
            let f = &model.marginal;
            out.extend((0..region.len() as u64).map(|n| f.quantile(rng.uniforms(replicate, index_lanes(n))[0])));
            Ok(())
        }
        FieldKind::MDependentGaussianMa => {
            let d = model.dim.unwrap_or(0);
            if region.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: region.dim(),
                });
            }
            let sigma = libm::sqrt(model.weights.iter().map(|c| c * c).sum::<f64>());
            let g = moving_average_values(model, region, seed, replicate)?;
            out.extend(g.into_iter().map(|gi| transform(&model.marginal, gi / sigma)));
            Ok(())
        }
    }
}

/// `quantile(Phi(z))`, short-circuited to the affine map for normal targets.
fn transform(f: &TargetDensity, z: f64) -> f64 {
    match *f {
        TargetDensity::Normal { mean, sd } => mean + sd * z,
        _ => {
            if z <= 0.0 {
                f.quantile(normal::cdf(z))
            } else {
                f.quantile(1.0 - normal::sf(z))
            }
        }
    }
}

fn moving_average_values(model: &FieldModel, region: &SiteSet, seed: u64, replicate: u32) -> Result<Vec<f64>> {
    let d = region.dim();
    let m = i64::from(model.range);
    let rng = CounterRng::new(seed, Stream::Innovation);
    let offsets = model.offsets();
    let bbox: Vec<(i64, i64)> = region
        .bounding_box()
        .into_iter()
        .map(|(lo, hi)| (lo - m, hi + m))
        .collect();
    let mut volume: Option<usize> = Some(1);
    for (lo, hi) in &bbox {
        volume = volume.and_then(|v| v.checked_mul((hi - lo + 1) as usize));
    }
    let window = offsets.len();
    let dense_limit = 16usize.saturating_mul(region.len()).saturating_add(window.saturating_mul(64));

    match volume {
        Some(volume) if volume <= dense_limit => {
            // materialize the dilated box once
            let mut strides = vec![1usize; d];
            for axis in (0..d.saturating_sub(1)).rev() {
                strides[axis] = strides[axis + 1] * (bbox[axis + 1].1 - bbox[axis + 1].0 + 1) as usize;
            }
            let mut eps = Vec::with_capacity(volume);
            let mut c: Vec<i64> = bbox.iter().map(|(lo, _)| *lo).collect();
            for _ in 0..volume {
                eps.push(rng.normal(replicate, site_lanes(&c)?));
                for axis in (0..d).rev() {
                    if c[axis] < bbox[axis].1 {
                        c[axis] += 1;
                        break;
                    }
                    c[axis] = bbox[axis].0;
                }
            }
            // offsets relative to the window's lower corner
            let rel: Vec<usize> = offsets
                .iter()
                .map(|u| u.iter().zip(&strides).map(|(x, s)| (x + m) as usize * s).sum())
                .collect();
            let mut g = Vec::with_capacity(region.len());
            for site in region.iter() {
                let corner: usize = site
                    .iter()
                    .zip(&bbox)
                    .zip(&strides)
                    .map(|((x, (lo, _)), s)| (x - m - lo) as usize * s)
                    .sum();
                let mut acc = 0.0;
                for (w, r) in model.weights.iter().zip(&rel) {
                    if *w != 0.0 {
                        acc += w * eps[corner + r];
                    }
                }
                g.push(acc);
            }
            Ok(g)
        }
        _ => {
            let mut g = Vec::with_capacity(region.len());
            let mut c = vec![0i64; d];
            for site in region.iter() {
                let mut acc = 0.0;
                for (w, u) in model.weights.iter().zip(&offsets) {
                    if *w != 0.0 {
                        for axis in 0..d {
                            c[axis] = site[axis] + u[axis];
                        }
                        acc += w * rng.normal(replicate, site_lanes(&c)?);
                    }
                }
                g.push(acc);
            }
            Ok(g)
        }
    }
}

/// Certified `tau = inf` mixing bounds of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedMixing {
    pub alpha: MixingProfile,
    pub rho: MixingProfile,
}

/// The i.i.d. field has vanishing coefficients; the range-`m` moving average
/// has trivial bounds (1/4 and 1) up to distance `2m` and zero beyond.
pub fn certify_mixing(model: &FieldModel) -> CertifiedMixing {
    match model.kind {
        FieldKind::Iid => CertifiedMixing {
            alpha: MixingProfile::zero(MixingKind::Alpha, Tau::Infinite),
            rho: MixingProfile::zero(MixingKind::Rho, Tau::Infinite),
        },
        FieldKind::MDependentGaussianMa => {
            let reach = 2 * u64::from(model.range);
            CertifiedMixing {
                alpha: MixingProfile::finite_range(MixingKind::Alpha, Tau::Infinite, reach),
                rho: MixingProfile::finite_range(MixingKind::Rho, Tau::Infinite, reach),
            }
        }
    }
}

/// `P(X_0 in I_s, X_lag in I_t)`.
///
/// Beyond distance `2m` this is `p_s p_t`. Inside, `(G_0, G_lag)/sigma` is a
/// standard bivariate normal with correlation `r`, and the probability is
/// `int_{A_s} phi(z) [Phi((beta - r z)/q) - Phi((alpha - r z)/q)] dz` with
/// `q = sqrt(1 - r^2)` and `A_s`, `[alpha, beta]` the bins pulled back to
/// the Gaussian scale.
pub fn joint_bin_probability(model: &FieldModel, lag: &[i64], g: &BinGrid, s: i64, t: i64) -> Result<f64> {
    let f = &model.marginal;
    let pull_back = |k: i64| {
        let lo = normal::quantile(f.cdf(g.bin_left(k)).clamp(0.0, 1.0));
        let hi = normal::quantile(f.cdf(g.bin_right(k)).clamp(0.0, 1.0));
        (lo.max(-40.0), hi.min(40.0))
    };
    let mass = |(lo, hi): (f64, f64)| if hi > lo { normal::cdf(hi) - normal::cdf(lo) } else { 0.0 };
    let zero = vec![0i64; lag.len()];
    let r = match model.kind {
        FieldKind::Iid => {
            if lag.iter().all(|c| *c == 0) {
                1.0
            } else {
                0.0
            }
        }
        FieldKind::MDependentGaussianMa => {
            if sup_distance(&zero, lag)? > 2 * u64::from(model.range) {
                0.0
            } else {
                model.lag_correlation(lag)?
            }
        }
    };
    let a = pull_back(s);
    let bt = pull_back(t);
    if r == 0.0 {
        return Ok(mass(a) * mass(bt));
    }
    if r.abs() >= 1.0 - 1e-15 {
        let (lo, hi) = if r > 0.0 {
            (a.0.max(bt.0), a.1.min(bt.1))
        } else {
            (a.0.max(-bt.1), a.1.min(-bt.0))
        };
        return Ok(mass((lo, hi)));
    }
    if !(a.1 > a.0) || !(bt.1 > bt.0) {
        return Ok(0.0);
    }
    let q = libm::sqrt(1.0 - r * r);
    let inner = |z: f64| {
        let hi = (bt.1 - r * z) / q;
        let lo = (bt.0 - r * z) / q;
        // difference of upper tails stays accurate far from the mean
        let p = if lo > 0.0 {
            normal::sf(lo) - normal::sf(hi)
        } else {
            normal::cdf(hi) - normal::cdf(lo)
        };
        normal::pdf(z) * p.max(0.0)
    };
    let scale = mass(a) * mass(bt);
    let tol = (scale * 1e-8).max(1e-300);
    Simpson {
        tolerance: tol,
        max_depth: 60,
    }
    .integrate(inner, a.0, a.1)
}
