//! Histogram counts, the frequency polygon and its exact i.i.d. moments.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::densities::{bin_probability, Marginal, TargetDensity};
use crate::grid::BinGrid;
use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// Bin counts `nu_k` of a sample. Empty bins are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct BinCounts {
    grid: BinGrid,
    counts: BTreeMap<i64, u64>,
    total: u64,
}

impl BinCounts {
    /// Builds counts from explicit `(k, nu_k)` pairs; the total is their sum.
    pub fn from_counts(grid: BinGrid, counts: impl IntoIterator<Item = (i64, u64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut total: u64 = 0;
        for (k, c) in counts {
            if c == 0 {
                continue;
            }
            *map.entry(k).or_insert(0) += c;
            total = total.checked_add(c).ok_or(Error::Overflow("bin counts"))?;
        }
        if total == 0 {
            return Err(Error::EmptySiteSet);
        }
        Ok(Self {
            grid,
            counts: map,
            total,
        })
    }

    pub fn grid(&self) -> &BinGrid {
        &self.grid
    }

    /// `nu_k`, zero for bins that were never hit.
    pub fn get(&self, k: i64) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    /// `|Lambda|`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Nonempty bins in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts.iter().map(|(k, c)| (*k, *c))
    }

    /// Smallest and largest nonempty bin.
    pub fn range(&self) -> (i64, i64) {
        let lo = self.counts.keys().next().copied().unwrap_or(0);
        let hi = self.counts.keys().next_back().copied().unwrap_or(0);
        (lo, hi)
    }

    /// Histogram height `nu_k / (|Lambda| b)`.
    pub fn height(&self, k: i64) -> f64 {
        self.get(k) as f64 / (self.total as f64 * self.grid.bin_width())
    }
}

/// Counts the values of a sample into the bins `I_k`.
pub fn bin_counts(values: &[f64], g: &BinGrid) -> Result<BinCounts> {
    if values.is_empty() {
        return Err(Error::EmptySiteSet);
    }
    let mut map = BTreeMap::new();
    for &x in values {
        *map.entry(g.bin_index(x)?).or_insert(0u64) += 1;
    }
    Ok(BinCounts {
        grid: *g,
        counts: map,
        total: values.len() as u64,
    })
}

/// One histogram row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramRow {
    pub k: i64,
    pub left_edge: f64,
    pub count: u64,
    pub height: f64,
}

/// Rows for every bin between the first and last nonempty one.
pub fn histogram(counts: &BinCounts) -> Vec<HistogramRow> {
    let (lo, hi) = counts.range();
    (lo..=hi)
        .map(|k| HistogramRow {
            k,
            left_edge: counts.grid.bin_left(k),
            count: counts.get(k),
            height: counts.height(k),
        })
        .collect()
}

/// Raw polygon `f_{n,k}(x) = (a nu_k + a_bar nu_{k+1}) / (|Lambda| b)`.
pub fn fp_evaluate(counts: &BinCounts, x: f64) -> Result<f64> {
    let w = counts.grid.polygon_weights(x)?;
    let nb = counts.total as f64 * counts.grid.bin_width();
    Ok((w.a * counts.get(w.k) as f64 + w.a_bar * counts.get(w.k + 1) as f64) / nb)
}

/// `sigma^2_{n,k}(x) = (1/2 + 2(k - x/b)^2) f(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaKernel {
    pub k: i64,
    pub x: f64,
    pub value: f64,
}

pub fn sigma_kernel(x: f64, g: &BinGrid, fx: f64) -> Result<SigmaKernel> {
    if !(fx > 0.0) || !fx.is_finite() {
        return Err(Error::NonPositiveDensity { x, fx });
    }
    let w = g.polygon_weights(x)?;
    // k - x/b = a - 1/2
    let t = w.a - 0.5;
    Ok(SigmaKernel {
        k: w.k,
        x,
        value: (0.5 + 2.0 * t * t) * fx,
    })
}

/// Normalized estimator `f_{n,k}(x) / sigma_{n,k}(x)`; needs the true density.
pub fn fn_normalized(counts: &BinCounts, x: f64, f: &TargetDensity) -> Result<f64> {
    let s = sigma_kernel(x, &counts.grid, f.pdf(x))?;
    Ok(fp_evaluate(counts, x)? / libm::sqrt(s.value))
}

/// `E f_{n,k}(x) = (a p_k + a_bar p_{k+1}) / b`, exact for any field with
/// marginal `f`.
pub fn expected_fp<M: Marginal + ?Sized>(f: &M, g: &BinGrid, x: f64) -> Result<f64> {
    let w = g.polygon_weights(x)?;
    let pk = bin_probability(f, g, w.k)?.p;
    let pk1 = bin_probability(f, g, w.k + 1)?.p;
    Ok((w.a * pk + w.a_bar * pk1) / g.bin_width())
}

/// `w_{n,k}(x) = |Lambda| b Var f_{n,k}(x)` under i.i.d. sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceOracle {
    pub w: f64,
    /// `w / sigma^2_{n,k}(x)` when `f(x) > 0`.
    pub ratio: Option<f64>,
}

pub fn iid_variance_oracle<M: Marginal + ?Sized>(f: &M, g: &BinGrid, x: f64) -> Result<VarianceOracle> {
    let pw = g.polygon_weights(x)?;
    let (a, ab) = (pw.a, pw.a_bar);
    let pk = bin_probability(f, g, pw.k)?.p;
    let pk1 = bin_probability(f, g, pw.k + 1)?.p;
    let w = (a * a * pk * (1.0 - pk) + ab * ab * pk1 * (1.0 - pk1) - 2.0 * a * ab * pk * pk1) / g.bin_width();
    let fx = f.pdf(x);
    let ratio = if fx > 0.0 {
        Some(w / sigma_kernel(x, g, fx)?.value)
    } else {
        None
    };
    Ok(VarianceOracle { w, ratio })
}

/// `sqrt(|Lambda| b) (f_n(x) - E f_{n,k}(x) / sigma_{n,k}(x))`.
pub fn clt_statistic(counts: &BinCounts, x: f64, f: &TargetDensity) -> Result<f64> {
    let p = EvalPoint::new(f, &counts.grid, x)?;
    Ok(p.statistic(counts.get(p.k), counts.get(p.k + 1), counts.total))
}

/// Everything about an evaluation point that does not depend on the sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    pub x: f64,
    pub k: i64,
    pub a: f64,
    pub a_bar: f64,
    pub b: f64,
    /// `sigma^2_{n,k}(x)`
    pub sigma2: f64,
    /// `E f_{n,k}(x)`
    pub expected: f64,
}

impl EvalPoint {
    pub fn new(f: &TargetDensity, g: &BinGrid, x: f64) -> Result<Self> {
        let w = g.polygon_weights(x)?;
        let sigma2 = sigma_kernel(x, g, f.pdf(x))?.value;
        Ok(Self {
            x,
            k: w.k,
            a: w.a,
            a_bar: w.a_bar,
            b: g.bin_width(),
            sigma2,
            expected: expected_fp(f, g, x)?,
        })
    }

    /// Raw polygon from the two relevant counts.
    pub fn polygon(&self, nu_k: u64, nu_k1: u64, total: u64) -> f64 {
        (self.a * nu_k as f64 + self.a_bar * nu_k1 as f64) / (total as f64 * self.b)
    }

    pub fn normalized(&self, nu_k: u64, nu_k1: u64, total: u64) -> f64 {
        self.polygon(nu_k, nu_k1, total) / libm::sqrt(self.sigma2)
    }

    pub fn statistic(&self, nu_k: u64, nu_k1: u64, total: u64) -> f64 {
        let scale = libm::sqrt(total as f64 * self.b);
        scale * (self.polygon(nu_k, nu_k1, total) - self.expected) / libm::sqrt(self.sigma2)
    }
}

/// `int f_{n,.}` computed piece by piece: each `J_k` contributes the
/// trapezoid `b (h_k + h_{k+1}) / 2`.
pub fn fp_integral(counts: &BinCounts) -> f64 {
    let b = counts.grid.bin_width();
    let (lo, hi) = counts.range();
    let mut s = CompensatedSum::new();
    for k in (lo - 1)..=hi {
        let (hk, hk1) = (counts.height(k), counts.height(k + 1));
        if hk != 0.0 || hk1 != 0.0 {
            s.add(b * (hk + hk1) / 2.0);
        }
    }
    s.value()
}
