//! Kolmogorov-Smirnov goodness-of-fit tests.

use alloc::vec::Vec;

use crate::normal;
use crate::{Error, Result};

/// Fewest observations accepted by [`ks_test`].
pub const MIN_KS_VALUES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if let Some(v) = values.iter().find(|v| v.is_nan()) {
        return Err(Error::NonFinite(*v));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `D = sup |F_n - F|`, exact from the one-sided maxima at the order
/// statistics.
pub fn ks_statistic(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::TooFewValues { needed: 1, got: 0 });
    }
    let v = sorted(values)?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in v.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// One-sample test against `cdf`, p-value from the asymptotic Kolmogorov
/// law at `lambda = sqrt(n) D`.
pub fn ks_test(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if values.len() < MIN_KS_VALUES {
        return Err(Error::TooFewValues {
            needed: MIN_KS_VALUES,
            got: values.len(),
        });
    }
    let d = ks_statistic(values, cdf)?;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf(libm::sqrt(values.len() as f64) * d),
        n: values.len(),
    })
}

pub fn ks_test_normal(values: &[f64]) -> Result<KsResult> {
    ks_test(values, normal::cdf)
}

/// Two-sample test; the p-value uses `lambda = sqrt(nm/(n+m)) D`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    for s in [a, b] {
        if s.len() < MIN_KS_VALUES {
            return Err(Error::TooFewValues {
                needed: MIN_KS_VALUES,
                got: s.len(),
            });
        }
    }
    let (x, y) = (sorted(a)?, sorted(b)?);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let t = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < n && x[i] <= t {
            i += 1;
        }
        while j < m && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf(libm::sqrt(ne) * d),
        n: n + m,
    })
}

/// `P(K > lambda)` for the Kolmogorov distribution, accurate to well below
/// 1e-8. Uses the alternating series for large `lambda` and the Jacobi theta
/// form for small `lambda`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda.is_nan() {
        return f64::NAN;
    }
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // P(K <= l) = sqrt(2 pi)/l sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 l^2))
        let c = core::f64::consts::PI * core::f64::consts::PI / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for k in 1..100 {
            let j = f64::from(2 * k - 1);
            let term = libm::exp(-j * j * c);
            s += term;
            if term < 1e-20 * s.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        let cdf = libm::sqrt(core::f64::consts::TAU) / lambda * s;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        let mut sign = 1.0;
        for k in 1..100 {
            let kf = f64::from(k);
            let term = libm::exp(-2.0 * kf * kf * lambda * lambda);
            s += sign * term;
            if term < 1e-20 {
                break;
            }
            sign = -sign;
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistic_examples() {
        let d = ks_statistic(&[-1.0, 0.0, 1.0], normal::cdf).unwrap();
        // attained at the first order statistic: 1/3 - Phi(-1)
        assert!((d - (1.0 / 3.0 - normal::cdf(-1.0))).abs() < 1e-15);
        assert!((d - 0.1746).abs() < 1e-4);
        assert_eq!(ks_statistic(&[0.0; 10], normal::cdf).unwrap(), 0.5);
        let n = 200;
        let q: Vec<f64> = (1..=n).map(|i| normal::quantile((i as f64 - 0.5) / n as f64)).collect();
        let d = ks_statistic(&q, normal::cdf).unwrap();
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn needs_eight_values() {
        assert!(matches!(
            ks_test_normal(&[0.0; 7]),
            Err(Error::TooFewValues { needed: 8, got: 7 })
        ));
        assert!(ks_test_normal(&[0.0; 8]).is_ok());
    }

    #[test]
    fn kolmogorov_reference_values() {
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        // classical critical values
        assert!((kolmogorov_sf(1.358_098_8) - 0.05).abs() < 1e-6);
        assert!((kolmogorov_sf(1.627_624_1) - 0.01).abs() < 1e-6);
        assert!((kolmogorov_sf(1.223_847_9) - 0.10).abs() < 1e-6);
        // the two series agree where they meet
        let below = kolmogorov_sf(1.18 - 1e-12);
        let above = kolmogorov_sf(1.18);
        assert!((below - above).abs() < 1e-12);
    }

    #[test]
    fn sf_is_monotone() {
        let mut prev = 1.0;
        for i in 1..4000 {
            let p = kolmogorov_sf(i as f64 * 1e-3);
            assert!(p <= prev + 1e-15, "at {}", i as f64 * 1e-3);
            assert!((0.0..=1.0).contains(&p));
            prev = p;
        }
    }

    #[test]
    fn two_sample_identical_samples() {
        let a: Vec<f64> = (0..50).map(f64::from).collect();
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let b: Vec<f64> = (100..150).map(f64::from).collect();
        assert_eq!(ks_two_sample(&a, &b).unwrap().statistic, 1.0);
    }
}
