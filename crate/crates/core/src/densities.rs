//! Target marginal densities and their bin probabilities.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::BinGrid;
use crate::normal;
use crate::quadrature::Simpson;
use crate::{Error, Result};

/// Anything with a density that can be binned. Implementors without a closed
/// form CDF fall back to adaptive quadrature of the density.
pub trait Marginal {
    fn pdf(&self, x: f64) -> f64;

    fn closed_form_cdf(&self, _x: f64) -> Option<f64> {
        None
    }

    /// Closure of the support, possibly unbounded.
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

/// Built-in marginals, each with a closed-form CDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetDensity {
    /// Constant density on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// `f(u) = 2(1 - u)` on `[0, 1]`.
    Triangular,
    Normal { mean: f64, sd: f64 },
    /// `weight * N(mean1, sd1^2) + (1 - weight) * N(mean2, sd2^2)`.
    NormalMixture {
        weight: f64,
        mean1: f64,
        sd1: f64,
        mean2: f64,
        sd2: f64,
    },
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidDensity(format!("{name} must be finite, got {v}")))
    }
}

fn check_sd(v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDensity(format!("standard deviation must be positive, got {v}")))
    }
}

impl TargetDensity {
    pub const STANDARD_UNIFORM: Self = Self::Uniform { lo: 0.0, hi: 1.0 };
    pub const STANDARD_NORMAL: Self = Self::Normal { mean: 0.0, sd: 1.0 };

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        check_finite("lo", lo)?;
        check_finite("hi", hi)?;
        if !(lo < hi) {
            return Err(Error::InvalidDensity(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        check_finite("mean", mean)?;
        check_sd(sd)?;
        Ok(Self::Normal { mean, sd })
    }

    pub fn normal_mixture(weight: f64, mean1: f64, sd1: f64, mean2: f64, sd2: f64) -> Result<Self> {
        if !(weight > 0.0 && weight < 1.0) {
            return Err(Error::InvalidDensity(format!("mixture weight must lie in (0, 1), got {weight}")));
        }
        check_finite("mean1", mean1)?;
        check_finite("mean2", mean2)?;
        check_sd(sd1)?;
        check_sd(sd2)?;
        Ok(Self::NormalMixture {
            weight,
            mean1,
            sd1,
            mean2,
            sd2,
        })
    }

    /// Looks a density up by its config name. Empty `params` selects the
    /// standard parameters.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let wrong = |want: &str| {
            Err(Error::InvalidDensity(format!(
                "`{name}` takes {want} parameters, got {}",
                params.len()
            )))
        };
        match name {
            "uniform" => match params {
                [] => Ok(Self::STANDARD_UNIFORM),
                [lo, hi] => Self::uniform(*lo, *hi),
                _ => wrong("0 or 2"),
            },
            "triangular" => match params {
                [] => Ok(Self::Triangular),
                _ => wrong("0"),
            },
            "normal" => match params {
                [] => Ok(Self::STANDARD_NORMAL),
                [m, s] => Self::normal(*m, *s),
                _ => wrong("0 or 2"),
            },
            "normal_mixture" => match params {
                [w, m1, s1, m2, s2] => Self::normal_mixture(*w, *m1, *s1, *m2, *s2),
                _ => wrong("5"),
            },
            other => Err(Error::InvalidDensity(format!(
                "unknown density `{other}` (expected uniform, triangular, normal or normal_mixture)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Uniform { .. } => "uniform",
            Self::Triangular => "triangular",
            Self::Normal { .. } => "normal",
            Self::NormalMixture { .. } => "normal_mixture",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Self::Uniform { lo, hi } => vec![lo, hi],
            Self::Triangular => vec![],
            Self::Normal { mean, sd } => vec![mean, sd],
            Self::NormalMixture {
                weight,
                mean1,
                sd1,
                mean2,
                sd2,
            } => vec![weight, mean1, sd1, mean2, sd2],
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Self::Triangular => {
                if (0.0..=1.0).contains(&x) {
                    2.0 * (1.0 - x)
                } else {
                    0.0
                }
            }
            Self::Normal { mean, sd } => normal::pdf((x - mean) / sd) / sd,
            Self::NormalMixture {
                weight,
                mean1,
                sd1,
                mean2,
                sd2,
            } => {
                weight * normal::pdf((x - mean1) / sd1) / sd1
                    + (1.0 - weight) * normal::pdf((x - mean2) / sd2) / sd2
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::Triangular => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    1.0 - (1.0 - x) * (1.0 - x)
                }
            }
            Self::Normal { mean, sd } => normal::cdf((x - mean) / sd),
            Self::NormalMixture {
                weight,
                mean1,
                sd1,
                mean2,
                sd2,
            } => weight * normal::cdf((x - mean1) / sd1) + (1.0 - weight) * normal::cdf((x - mean2) / sd2),
        }
    }

    /// Inverse CDF on `[0, 1]`; the endpoints map to the support endpoints.
    pub fn quantile(&self, p: f64) -> f64 {
        if !(0.0..=1.0).contains(&p) {
            return f64::NAN;
        }
        match *self {
            Self::Uniform { lo, hi } => lo + p * (hi - lo),
            Self::Triangular => 1.0 - libm::sqrt(1.0 - p),
            Self::Normal { mean, sd } => mean + sd * normal::quantile(p),
            Self::NormalMixture {
                mean1, sd1, mean2, sd2, ..
            } => {
                if p == 0.0 || p == 1.0 {
                    return normal::quantile(p);
                }
                // F lies between the component CDFs, so their quantiles bracket the root.
                let q1 = mean1 + sd1 * normal::quantile(p);
                let q2 = mean2 + sd2 * normal::quantile(p);
                self.solve_cdf(p, q1.min(q2), q1.max(q2))
            }
        }
    }

    /// Safeguarded Newton iteration for `cdf(x) = p` on a bracket.
    fn solve_cdf(&self, p: f64, mut lo: f64, mut hi: f64) -> f64 {
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let fx = self.cdf(x) - p;
            if fx == 0.0 {
                return x;
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.pdf(x);
            let newton = x - fx / d;
            let next = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if libm::fabs(next - x) <= 4.0 * f64::EPSILON * libm::fabs(x).max(1e-300) || hi - lo <= f64::EPSILON * libm::fabs(x) {
                return next;
            }
            x = next;
        }
        x
    }

    /// A Lipschitz bound for the density on `[lo, hi]`: `sup |f'|` where `f`
    /// is differentiable, and `+inf` when the interval touches a jump.
    pub fn derivative_bound(&self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        match *self {
            Self::Uniform { lo: a, hi: b } => {
                if (lo <= a && a <= hi) || (lo <= b && b <= hi) {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            Self::Triangular => {
                if lo <= 0.0 && 0.0 <= hi {
                    f64::INFINITY
                } else if hi < 0.0 || lo > 1.0 {
                    0.0
                } else {
                    2.0
                }
            }
            Self::Normal { mean, sd } => normal_slope_bound((lo - mean) / sd, (hi - mean) / sd) / (sd * sd),
            Self::NormalMixture {
                weight,
                mean1,
                sd1,
                mean2,
                sd2,
            } => {
                weight * normal_slope_bound((lo - mean1) / sd1, (hi - mean1) / sd1) / (sd1 * sd1)
                    + (1.0 - weight) * normal_slope_bound((lo - mean2) / sd2, (hi - mean2) / sd2) / (sd2 * sd2)
            }
        }
    }
}

/// `max |z| phi(z)` over `[zl, zh]`; the function peaks at `|z| = 1`.
fn normal_slope_bound(zl: f64, zh: f64) -> f64 {
    let g = |z: f64| libm::fabs(z) * normal::pdf(z);
    let mut m = g(zl).max(g(zh));
    for peak in [-1.0, 1.0] {
        if zl <= peak && peak <= zh {
            m = m.max(g(peak));
        }
    }
    m
}

impl Marginal for TargetDensity {
    fn pdf(&self, x: f64) -> f64 {
        TargetDensity::pdf(self, x)
    }

    fn closed_form_cdf(&self, x: f64) -> Option<f64> {
        Some(self.cdf(x))
    }

    fn support(&self) -> (f64, f64) {
        match *self {
            Self::Uniform { lo, hi } => (lo, hi),
            Self::Triangular => (0.0, 1.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

/// Mass `p_s` of bin `I_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinProbability {
    pub s: i64,
    pub p: f64,
}

/// `p_s = F(sb) - F((s-1)b)`, by closed form when available and by adaptive
/// Simpson quadrature (absolute tolerance 1e-10) otherwise.
pub fn bin_probability<M: Marginal + ?Sized>(f: &M, g: &BinGrid, s: i64) -> Result<BinProbability> {
    let left = g.bin_left(s);
    let right = g.bin_right(s);
    if let (Some(fl), Some(fr)) = (f.closed_form_cdf(left), f.closed_form_cdf(right)) {
        return Ok(BinProbability {
            s,
            p: (fr - fl).clamp(0.0, 1.0),
        });
    }
    let (slo, shi) = f.support();
    let lo = left.max(slo);
    let hi = right.min(shi);
    if !(lo < hi) {
        return Ok(BinProbability { s, p: 0.0 });
    }
    let p = Simpson::default().integrate(|u| f.pdf(u), lo, hi)?;
    Ok(BinProbability {
        s,
        p: p.clamp(0.0, 1.0),
    })
}

/// Outcome of checking the first-order envelope
/// `max(0, f(x)b - kb^2) <= p_j <= f(x)b + kb^2` for `j = k, k+1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorReport {
    pub k: i64,
    pub fx: f64,
    /// Lipschitz bound of `f` on `[x - 2b, x + 2b]`.
    pub kappa: f64,
    pub lower: f64,
    pub upper: f64,
    pub p_k: f64,
    pub p_k1: f64,
    pub holds: bool,
}

pub fn taylor_bounds_check(f: &TargetDensity, g: &BinGrid, x: f64) -> Result<TaylorReport> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    let fx = f.pdf(x);
    if !(fx > 0.0) {
        return Err(Error::NonPositiveDensity { x, fx });
    }
    let b = g.bin_width();
    let k = g.polygon_index(x)?;
    let kappa = f.derivative_bound(x - 2.0 * b, x + 2.0 * b);
    let p_k = bin_probability(f, g, k)?.p;
    let p_k1 = bin_probability(f, g, k + 1)?.p;
    let lower = (fx * b - kappa * b * b).max(0.0);
    let upper = fx * b + kappa * b * b;
    // rounding slack for the CDF differences
    let slack = 64.0 * f64::EPSILON * upper.max(f64::MIN_POSITIVE);
    let inside = |p: f64| p >= lower - slack && p <= upper + slack;
    Ok(TaylorReport {
        k,
        fx,
        kappa,
        lower,
        upper,
        p_k,
        p_k1,
        holds: inside(p_k) && inside(p_k1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(b: f64) -> BinGrid {
        BinGrid::new(b).unwrap()
    }

    #[test]
    fn bin_probability_examples() {
        let u = TargetDensity::STANDARD_UNIFORM;
        assert!((bin_probability(&u, &grid(0.1), 3).unwrap().p - 0.1).abs() < 1e-15);
        assert_eq!(bin_probability(&u, &grid(0.1), -4).unwrap().p, 0.0);
        assert_eq!(bin_probability(&TargetDensity::Triangular, &grid(0.1), 12).unwrap().p, 0.0);
        let n = TargetDensity::STANDARD_NORMAL;
        let p = bin_probability(&n, &grid(0.5), 1).unwrap().p;
        // Phi(0.5) - 1/2 from the series erf(x) = 2/sqrt(pi) sum (-1)^n x^(2n+1) / (n! (2n+1))
        let z = 0.5 / core::f64::consts::SQRT_2;
        let mut term = z;
        let mut erf = 0.0;
        for n in 0..30 {
            erf += term / (2 * n + 1) as f64;
            term *= -z * z / (n + 1) as f64;
        }
        erf *= 2.0 / libm::sqrt(core::f64::consts::PI);
        assert!((p - 0.5 * erf).abs() < 1e-15);
    }

    struct PdfOnly(TargetDensity);

    impl Marginal for PdfOnly {
        fn pdf(&self, x: f64) -> f64 {
            self.0.pdf(x)
        }
        fn support(&self) -> (f64, f64) {
            self.0.support()
        }
    }

    #[test]
    fn quadrature_route_matches_closed_form() {
        for f in [
            TargetDensity::STANDARD_NORMAL,
            TargetDensity::Triangular,
            TargetDensity::normal_mixture(0.3, -1.0, 0.5, 1.5, 1.2).unwrap(),
        ] {
            let g = grid(0.07);
            for s in -40..40 {
                let a = bin_probability(&f, &g, s).unwrap().p;
                let b = bin_probability(&PdfOnly(f), &g, s).unwrap().p;
                assert!((a - b).abs() < 1e-10, "{f:?} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        for (f, lo, hi) in [
            (TargetDensity::STANDARD_UNIFORM, 0.0, 1.0),
            (TargetDensity::Triangular, 0.0, 1.0),
            (TargetDensity::STANDARD_NORMAL, -40.0, 40.0),
            (TargetDensity::normal_mixture(0.4, -2.0, 0.7, 1.0, 1.5).unwrap(), -60.0, 60.0),
        ] {
            // split at the kinks so Simpson sees smooth pieces
            let mid = 0.5 * (lo + hi);
            let total = crate::quadrature::integrate(|x| f.pdf(x), lo, mid).unwrap()
                + crate::quadrature::integrate(|x| f.pdf(x), mid, hi).unwrap();
            assert!((total - 1.0).abs() < 1e-9, "{f:?}: {total}");
        }
    }

    #[test]
    fn quantile_cdf_round_trip() {
        let mixture = TargetDensity::normal_mixture(0.3, -1.0, 0.5, 1.5, 1.2).unwrap();
        for f in [
            TargetDensity::STANDARD_UNIFORM,
            TargetDensity::Triangular,
            TargetDensity::STANDARD_NORMAL,
            TargetDensity::normal(2.0, 3.0).unwrap(),
            mixture,
        ] {
            for i in 1..10_000 {
                let p = i as f64 / 10_000.0;
                let x = f.quantile(p);
                assert!((f.cdf(x) - p).abs() < 1e-12, "{f:?} p={p}");
                assert!((f.quantile(f.cdf(x)) - x).abs() < 1e-9, "{f:?} x={x}");
            }
        }
    }

    #[test]
    fn compact_support_masses_sum_to_one() {
        for f in [TargetDensity::STANDARD_UNIFORM, TargetDensity::Triangular] {
            let g = grid(0.03);
            let total: f64 = (-5..45).map(|s| bin_probability(&f, &g, s).unwrap().p).sum();
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn bin_probability_is_additive() {
        // I_{2s-1} and I_{2s} at width b tile I_s at width 2b
        let f = TargetDensity::normal_mixture(0.5, -0.3, 0.4, 0.8, 0.9).unwrap();
        let fine = grid(0.125);
        let coarse = grid(0.25);
        for s in -10..10 {
            let merged = bin_probability(&f, &coarse, s).unwrap().p;
            let parts = bin_probability(&f, &fine, 2 * s - 1).unwrap().p + bin_probability(&f, &fine, 2 * s).unwrap().p;
            assert!((merged - parts).abs() < 1e-15);
        }
    }

    #[test]
    fn taylor_envelope_examples() {
        let r = taylor_bounds_check(&TargetDensity::STANDARD_UNIFORM, &grid(0.1), 0.5).unwrap();
        assert_eq!(r.kappa, 0.0);
        assert!((r.p_k - 0.1).abs() < 1e-15 && (r.p_k1 - 0.1).abs() < 1e-15);
        assert!((r.lower - 0.1).abs() < 1e-15 && (r.upper - 0.1).abs() < 1e-15);
        assert!(r.holds);

        let r = taylor_bounds_check(&TargetDensity::STANDARD_NORMAL, &grid(0.1), 0.0).unwrap();
        assert!(r.holds && r.kappa > 0.0);

        let r = taylor_bounds_check(&TargetDensity::Triangular, &grid(0.05), 0.5).unwrap();
        assert_eq!(r.kappa, 2.0);
        // closed form p_s = 2b(1 - midpoint of I_s): k = 10, midpoints 0.475 and 0.525
        assert!((r.p_k - 2.0 * 0.05 * (1.0 - 0.475)).abs() < 1e-15);
        assert!((r.p_k1 - 2.0 * 0.05 * (1.0 - 0.525)).abs() < 1e-15);
        assert!(r.holds);

        assert!(matches!(
            taylor_bounds_check(&TargetDensity::STANDARD_UNIFORM, &grid(0.1), 2.0),
            Err(Error::NonPositiveDensity { .. })
        ));
    }

    #[test]
    fn from_name() {
        assert_eq!(TargetDensity::from_name("normal", &[]).unwrap(), TargetDensity::STANDARD_NORMAL);
        assert_eq!(
            TargetDensity::from_name("uniform", &[1.0, 3.0]).unwrap(),
            TargetDensity::Uniform { lo: 1.0, hi: 3.0 }
        );
        assert!(TargetDensity::from_name("cauchy", &[]).is_err());
        assert!(TargetDensity::from_name("normal", &[0.0, -1.0]).is_err());
        assert!(TargetDensity::from_name("normal_mixture", &[1.5, 0.0, 1.0, 0.0, 1.0]).is_err());
    }
}
