//! Mixing-coefficient bound profiles and the sums built on them.
//!
//! A [`MixingProfile`] is a certified upper bound `m -> bound(m)` for
//! `alpha_{1,tau}(m)` or `rho_{1,tau}(m)`, never an estimate. Infinite sums
//! over polynomial tails are evaluated exactly up to a cutoff `M` and closed
//! with a midpoint Euler-Maclaurin estimate whose remainder is bounded, so
//! each value comes with an error certificate.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// Target bound on the remainder closing a polynomial tail.
pub const TAIL_CERTIFICATE: f64 = 5e-13;
/// Same, relative to the polynomial part of the sum.
pub const TAIL_RELATIVE: f64 = 1e-13;
/// Most terms summed explicitly before giving up on certification.
pub const MAX_EXPLICIT_TERMS: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MixingKind {
    Alpha,
    Rho,
}

/// Cardinality bound of the far set `B` in `alpha_{1,tau}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Tau {
    Finite(u32),
    Infinite,
}

/// How the bound decays in the distance `m >= 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum Decay {
    /// `level` for `m <= m0`, zero beyond.
    FiniteRange { m0: u64, level: f64 },
    /// `min(cap, scale * m^-theta)`; no cap when `cap` is `None`.
    Polynomial {
        theta: f64,
        scale: f64,
        cap: Option<f64>,
    },
    /// `values[m-1]` for `m <= values.len()`, then `scale * m^-theta` if a
    /// tail is given. Without a tail nothing beyond the table is known.
    Table {
        values: Vec<f64>,
        tail: Option<PolynomialTail>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolynomialTail {
    pub theta: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixingProfile {
    pub kind: MixingKind,
    pub tau: Tau,
    pub decay: Decay,
}

impl MixingProfile {
    pub fn new(kind: MixingKind, tau: Tau, decay: Decay) -> Result<Self> {
        if tau == Tau::Finite(0) {
            return Err(Error::InvalidProfile("tau must be positive".into()));
        }
        let bad = |msg: String| Err(Error::InvalidProfile(msg));
        match &decay {
            Decay::FiniteRange { level, .. } => {
                if !(level.is_finite() && *level >= 0.0) {
                    return bad(format!("level must be finite and nonnegative, got {level}"));
                }
            }
            Decay::Polynomial { theta, scale, cap } => {
                if !(theta.is_finite() && *theta > 0.0) {
                    return bad(format!("theta must be positive, got {theta}"));
                }
                if !(scale.is_finite() && *scale > 0.0) {
                    return bad(format!("scale must be positive, got {scale}"));
                }
                if let Some(c) = cap {
                    if !(c.is_finite() && *c > 0.0) {
                        return bad(format!("cap must be positive, got {c}"));
                    }
                }
            }
            Decay::Table { values, tail } => {
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return bad("table values must be finite and nonnegative".into());
                }
                if values.windows(2).any(|w| w[1] > w[0]) {
                    return bad("table values must be nonincreasing".into());
                }
                if let Some(t) = tail {
                    if !(t.theta.is_finite() && t.theta > 0.0 && t.scale.is_finite() && t.scale > 0.0) {
                        return bad("tail needs positive theta and scale".into());
                    }
                    let next = values.len() as f64 + 1.0;
                    if let Some(last) = values.last() {
                        if t.scale * libm::pow(next, -t.theta) > *last {
                            return bad("tail must continue the table without increasing".into());
                        }
                    }
                }
            }
        }
        Ok(Self { kind, tau, decay })
    }

    /// `m -> 0` for every `m >= 1`.
    pub fn zero(kind: MixingKind, tau: Tau) -> Self {
        Self {
            kind,
            tau,
            decay: Decay::FiniteRange { m0: 0, level: 0.0 },
        }
    }

    /// `level` up to `m0`, zero beyond.
    pub fn finite_range(kind: MixingKind, tau: Tau, m0: u64) -> Self {
        let level = match kind {
            MixingKind::Alpha => 0.25,
            MixingKind::Rho => 1.0,
        };
        Self {
            kind,
            tau,
            decay: Decay::FiniteRange { m0, level },
        }
    }

    pub fn polynomial(kind: MixingKind, tau: Tau, theta: f64, cap: Option<f64>) -> Result<Self> {
        Self::new(kind, tau, Decay::Polynomial { theta, scale: 1.0, cap })
    }

    /// The bound at distance `m >= 1`.
    pub fn bound(&self, m: u64) -> f64 {
        match &self.decay {
            Decay::FiniteRange { m0, level } => {
                if m <= *m0 {
                    *level
                } else {
                    0.0
                }
            }
            Decay::Polynomial { theta, scale, cap } => {
                let v = scale * libm::pow(m as f64, -theta);
                cap.map_or(v, |c| v.min(c))
            }
            Decay::Table { values, tail } => match values.get((m as usize).wrapping_sub(1)) {
                Some(v) if m >= 1 => *v,
                _ => tail.map_or(f64::NAN, |t| t.scale * libm::pow(m as f64, -t.theta)),
            },
        }
    }

    /// Whether every value respects the universal ceiling (1/4 for alpha,
    /// 1 for rho). Synthetic profiles such as `m^-theta` may exceed it at
    /// small `m` and are then merely loose upper bounds.
    pub fn within_universal_ceiling(&self) -> bool {
        let ceiling = match self.kind {
            MixingKind::Alpha => 0.25,
            MixingKind::Rho => 1.0,
        };
        // nonincreasing, so m = 1 is the maximum
        self.bound(1) <= ceiling
    }
}

/// `sum_l coef_l * j^exp_l` with positive coefficients.
type PowerWeight = Vec<(f64, i32)>;

/// A sum with its certified absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertifiedSum {
    pub value: f64,
    pub error_bound: f64,
}

fn weight_at(w: &PowerWeight, j: f64) -> f64 {
    w.iter().map(|(c, e)| c * libm::pow(j, f64::from(*e))).sum()
}

fn max_exponent(w: &PowerWeight) -> i32 {
    w.iter().map(|(_, e)| *e).max().unwrap_or(0)
}

/// `int_a^inf weight(x) * scale * x^-theta dx`; requires `e - theta < -1` for all terms.
fn tail_integral(w: &PowerWeight, scale: f64, theta: f64, a: f64) -> f64 {
    w.iter()
        .map(|(c, e)| {
            let p = f64::from(*e) - theta + 1.0;
            c * scale * libm::pow(a, p) / -p
        })
        .sum()
}

/// `n`-th derivative of `weight(x) * scale * x^-theta` at `a`.
fn tail_derivative(w: &PowerWeight, scale: f64, theta: f64, a: f64, n: u32) -> f64 {
    w.iter()
        .map(|(c, e)| {
            let p = f64::from(*e) - theta;
            let falling: f64 = (0..n).map(|i| p - f64::from(i)).product();
            c * scale * falling * libm::pow(a, p - f64::from(n))
        })
        .sum()
}

fn explicit_sum(w: &PowerWeight, bound: impl Fn(u64) -> f64, from: u64, to: u64) -> f64 {
    let mut s = CompensatedSum::new();
    for j in from..=to {
        s.add(weight_at(w, j as f64) * bound(j));
    }
    s.value()
}

/// `sum_{j > from} weight(j) * scale * j^-theta` for `j >= start_poly`, with
/// the terms `from < j < start_poly` taken from `bound`.
fn polynomial_tail(
    w: &PowerWeight,
    bound: impl Fn(u64) -> f64,
    from: u64,
    start_poly: u64,
    scale: f64,
    theta: f64,
) -> Result<CertifiedSum> {
    let e = max_exponent(w);
    if f64::from(e) - theta >= -1.0 {
        return Err(Error::NotSummable(format!(
            "terms decay like j^({e} - {theta}), which is not summable"
        )));
    }
    // completely monotone terms: the remainder of T(M+1/2) + g1/24 is at most
    // 7/5760 |g3| (g1, g3: derivatives at M+1/2)
    let em_bound = |m: u64| 7.0 / 5760.0 * tail_derivative(w, scale, theta, m as f64 + 0.5, 3).abs();
    let m_min = from.max(start_poly.saturating_sub(1)).max(1);
    let target = TAIL_CERTIFICATE.min(TAIL_RELATIVE * tail_integral(w, scale, theta, m_min as f64 + 0.5));
    let mut m_hi = m_min;
    while em_bound(m_hi) > target {
        if m_hi - from > MAX_EXPLICIT_TERMS {
            return Err(Error::CannotCertify(format!(
                "tail remainder above {target:e} after {MAX_EXPLICIT_TERMS} terms (theta = {theta})"
            )));
        }
        m_hi = m_hi.saturating_mul(2);
    }
    let mut m_lo = m_min;
    while m_lo < m_hi {
        let mid = m_lo + (m_hi - m_lo) / 2;
        if em_bound(mid) <= target {
            m_hi = mid;
        } else {
            m_lo = mid + 1;
        }
    }
    let cutoff = m_hi;
    if cutoff - from > MAX_EXPLICIT_TERMS {
        return Err(Error::CannotCertify(format!(
            "tail certification needs {} explicit terms",
            cutoff - from
        )));
    }
    let head = if cutoff > from {
        explicit_sum(w, bound, from + 1, cutoff)
    } else {
        0.0
    };
    let c = cutoff as f64 + 0.5;
    let hi = tail_integral(w, scale, theta, c);
    let lo = tail_integral(w, scale, theta, c + 0.5);
    let estimate = (hi + tail_derivative(w, scale, theta, c, 1) / 24.0).clamp(lo, hi);
    Ok(CertifiedSum {
        value: head + estimate,
        error_bound: em_bound(cutoff).min(0.5 * (hi - lo)) + 4.0 * f64::EPSILON * (head + estimate),
    })
}

/// `sum_{j > from} weight(j) * bound(j)` for a profile.
fn weighted_tail(profile: &MixingProfile, w: &PowerWeight, from: u64) -> Result<CertifiedSum> {
    match &profile.decay {
        Decay::FiniteRange { m0, level } => {
            let value = if *m0 > from && *level > 0.0 {
                if m0 - from > MAX_EXPLICIT_TERMS {
                    return Err(Error::CannotCertify(format!("finite range {m0} too long to sum")));
                }
                explicit_sum(w, |_| *level, from + 1, *m0)
            } else {
                0.0
            };
            Ok(CertifiedSum {
                value,
                error_bound: 0.0,
            })
        }
        Decay::Polynomial { theta, scale, cap } => {
            // beyond the crossover the cap no longer binds
            let start = match cap {
                Some(c) => libm::ceil(libm::pow(scale / c, 1.0 / theta)).max(1.0) as u64 + 1,
                None => 1,
            };
            polynomial_tail(w, |j| profile.bound(j), from, start, *scale, *theta)
        }
        Decay::Table { values, tail } => {
            let Some(t) = tail else {
                return Err(Error::CannotCertify(
                    "table profile has no tail descriptor beyond its last entry".into(),
                ));
            };
            polynomial_tail(w, |j| profile.bound(j), from, values.len() as u64 + 1, t.scale, t.theta)
        }
    }
}

/// Number of lattice points at sup-distance exactly `m` from the origin:
/// `(2m+1)^d - (2m-1)^d`.
pub fn shell_count(d: u32, m: u64) -> Result<u64> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if m == 0 {
        return Ok(1);
    }
    let outer = m
        .checked_mul(2)
        .and_then(|x| x.checked_add(1))
        .and_then(|x| x.checked_pow(d))
        .ok_or(Error::Overflow("shell_count"))?;
    let inner = (2 * m - 1).checked_pow(d).ok_or(Error::Overflow("shell_count"))?;
    Ok(outer - inner)
}

/// `j^d * shell_count(d, j)` expanded in powers of `j`.
fn psi_weight(d: u32) -> PowerWeight {
    // (2j+1)^d - (2j-1)^d = 2 sum_{l odd} C(d,l) (2j)^(d-l)
    let d = d as i32;
    let mut w = Vec::new();
    let mut binom = 1.0f64;
    for l in 0..=d {
        if l > 0 {
            binom = binom * f64::from(d - l + 1) / f64::from(l);
        }
        if l % 2 == 1 {
            w.push((2.0 * binom * libm::pow(2.0, f64::from(d - l)), 2 * d - l));
        }
    }
    w
}

/// `psi(m) = sum_{|i| > m} |i|^d * bound(|i|)`, summed shell by shell in
/// ascending distance.
pub fn psi(profile: &MixingProfile, d: u32, m: u64) -> Result<f64> {
    Ok(psi_certified(profile, d, m)?.value)
}

pub fn psi_certified(profile: &MixingProfile, d: u32, m: u64) -> Result<CertifiedSum> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    weighted_tail(profile, &psi_weight(d), m)
}

/// Largest integer `r >= 0` with `r^n <= y`, judged in floating point with a
/// relative slack of 1e-12 so that decimal inputs such as `y = 1e4` give the
/// intended root.
fn int_root_floor(y: f64, n: u32) -> Result<u64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::NonFinite(y));
    }
    let fits = |r: f64| libm::pow(r, f64::from(n)) <= y * (1.0 + 1e-12);
    let mut r = libm::floor(libm::pow(y, 1.0 / f64::from(n)));
    if r > 4.0e15 {
        return Err(Error::Overflow("integer root"));
    }
    while r > 0.0 && !fits(r) {
        r -= 1.0;
    }
    while fits(r + 1.0) {
        r += 1.0;
    }
    Ok(r as u64)
}

/// The blocking sequence for one bin width.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockingSequence {
    pub d: u32,
    pub b: f64,
    /// `floor(b^(-1/(2d)))`
    pub v: u64,
    /// `psi(v)`
    pub psi_v: f64,
    /// `max(v, floor((psi(v)/b)^(1/d)) + 1)`
    pub m: u64,
    /// `psi(m)`
    pub tail: f64,
}

/// How `m` is derived from `psi(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BlockingRule {
    /// `m = max(v, floor((psi(v)/b)^(1/d)) + 1)`, the sequence as displayed.
    #[default]
    Displayed,
    /// `m = max(v, floor((sqrt(psi(v))/b)^(1/d)) + 1)`, the sequence the
    /// limit argument works with (`m^d >= sqrt(psi(v))/b`). Only this one
    /// forces `psi(m)/(m^d b) <= sqrt(psi(m)) -> 0`; with the displayed rule
    /// the ratio can settle at a positive constant.
    Proof,
}

pub fn blocking_sequence(profile: &MixingProfile, d: u32, b: f64) -> Result<BlockingSequence> {
    blocking_sequence_with(profile, d, b, BlockingRule::Displayed)
}

pub fn blocking_sequence_with(profile: &MixingProfile, d: u32, b: f64, rule: BlockingRule) -> Result<BlockingSequence> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::InvalidSchedule(format!("bin width must lie in (0, 1), got {b}")));
    }
    let v = int_root_floor(1.0 / b, 2 * d)?.max(1);
    let psi_v = psi(profile, d, v)?;
    let driver = match rule {
        BlockingRule::Displayed => psi_v,
        BlockingRule::Proof => libm::sqrt(psi_v),
    };
    let alt = int_root_floor(driver / b, d)? + 1;
    let m = v.max(alt);
    let tail = psi(profile, d, m)?;
    Ok(BlockingSequence {
        d,
        b,
        v,
        psi_v,
        m,
        tail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Monotonicity {
    Strict,
    Weak,
    Violated,
}

impl Monotonicity {
    fn of<T: PartialOrd>(values: impl Iterator<Item = T>, increasing: bool) -> Self {
        let v: Vec<T> = values.collect();
        let mut strict = true;
        for w in v.windows(2) {
            let (a, b) = if increasing { (&w[0], &w[1]) } else { (&w[1], &w[0]) };
            if a < b {
                continue;
            }
            if a == b {
                strict = false;
            } else {
                return Self::Violated;
            }
        }
        if strict {
            Self::Strict
        } else {
            Self::Weak
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Lemma1Row {
    pub b: f64,
    pub v: u64,
    pub m: u64,
    /// `m^d * b`
    pub volume_ratio: f64,
    /// `psi(m) / (m^d * b)`
    pub tail_ratio: f64,
}

/// Diagnostic table for the three blocking-sequence limits. Trends are
/// reported over the supplied schedule; no limit is asserted.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Lemma1Table {
    pub d: u32,
    pub rule: BlockingRule,
    pub rows: Vec<Lemma1Row>,
    /// `m` should grow.
    pub m_trend: Monotonicity,
    /// `m^d b` should shrink.
    pub volume_trend: Monotonicity,
    /// `psi(m)/(m^d b)` should shrink.
    pub tail_trend: Monotonicity,
}

pub fn lemma1_diagnostic(profile: &MixingProfile, d: u32, schedule: &[f64]) -> Result<Lemma1Table> {
    lemma1_diagnostic_with(profile, d, schedule, BlockingRule::Displayed)
}

pub fn lemma1_diagnostic_with(profile: &MixingProfile, d: u32, schedule: &[f64], rule: BlockingRule) -> Result<Lemma1Table> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if schedule.is_empty() {
        return Err(Error::InvalidSchedule("schedule is empty".into()));
    }
    if schedule.iter().any(|b| !(*b > 0.0 && *b < 1.0)) {
        return Err(Error::InvalidSchedule("bin widths must lie in (0, 1)".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidSchedule("bin widths must be strictly decreasing".into()));
    }
    // summability first, so no partial table is produced
    weighted_tail(profile, &psi_weight(d), 0)?;
    let mut rows = Vec::with_capacity(schedule.len());
    for &b in schedule {
        let s = blocking_sequence_with(profile, d, b, rule)?;
        let volume_ratio = libm::pow(s.m as f64, f64::from(d)) * b;
        rows.push(Lemma1Row {
            b,
            v: s.v,
            m: s.m,
            volume_ratio,
            tail_ratio: s.tail / volume_ratio,
        });
    }
    Ok(Lemma1Table {
        d,
        rule,
        m_trend: Monotonicity::of(rows.iter().map(|r| r.m), true),
        volume_trend: Monotonicity::of(rows.iter().map(|r| r.volume_ratio), false),
        tail_trend: Monotonicity::of(rows.iter().map(|r| r.tail_ratio), false),
        rows,
    })
}

/// The summability conditions of the variance limit and the CLT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Condition {
    /// Variance limit under alpha-mixing: `sum m^(2d-1) alpha_{1,1}(m) < inf`.
    Prop1I,
    /// Variance limit under rho-mixing: `sum m^(d-1) rho_{1,1}(m) < inf`.
    Prop1Ii,
    /// CLT under alpha-mixing: `sum m^(2d-1) alpha_{1,inf}(m) < inf`.
    Thm1I,
    /// CLT under rho-mixing: `sum m^(d-1) rho_{1,inf}(m) < inf`.
    Thm1Ii,
}

impl Condition {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "prop1_i" => Some(Self::Prop1I),
            "prop1_ii" => Some(Self::Prop1Ii),
            "thm1_i" => Some(Self::Thm1I),
            "thm1_ii" => Some(Self::Thm1Ii),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Prop1I => "prop1_i",
            Self::Prop1Ii => "prop1_ii",
            Self::Thm1I => "thm1_i",
            Self::Thm1Ii => "thm1_ii",
        }
    }

    pub fn kind(self) -> MixingKind {
        match self {
            Self::Prop1I | Self::Thm1I => MixingKind::Alpha,
            Self::Prop1Ii | Self::Thm1Ii => MixingKind::Rho,
        }
    }

    fn needs_infinite_tau(self) -> bool {
        matches!(self, Self::Thm1I | Self::Thm1Ii)
    }

    fn exponent(self, d: u32) -> i32 {
        match self.kind() {
            MixingKind::Alpha => 2 * d as i32 - 1,
            MixingKind::Rho => d as i32 - 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HypothesisCertificate {
    pub condition: Condition,
    pub d: u32,
    pub holds: bool,
    /// Certified value of the series when it converges.
    pub sum: Option<CertifiedSum>,
    /// Why the series diverges, when it does.
    pub witness: Option<String>,
}

/// Certifies (or refutes) the summability condition of `condition`.
///
/// A `tau = inf` profile also serves the `tau = 1` conditions since
/// `alpha_{1,1} <= alpha_{1,inf}`; the converse is a mismatch.
pub fn hypothesis_check(profile: &MixingProfile, d: u32, condition: Condition) -> Result<HypothesisCertificate> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if profile.kind != condition.kind() {
        return Err(Error::ConditionMismatch(format!(
            "{} needs a {:?} profile, got {:?}",
            condition.name(),
            condition.kind(),
            profile.kind
        )));
    }
    if condition.needs_infinite_tau() && profile.tau != Tau::Infinite {
        return Err(Error::ConditionMismatch(format!(
            "{} needs tau = inf, got {:?}",
            condition.name(),
            profile.tau
        )));
    }
    let e = condition.exponent(d);
    let w: PowerWeight = alloc::vec![(1.0, e)];
    match weighted_tail(profile, &w, 0) {
        Ok(sum) => Ok(HypothesisCertificate {
            condition,
            d,
            holds: true,
            sum: Some(sum),
            witness: None,
        }),
        Err(Error::NotSummable(_)) => {
            let theta = match &profile.decay {
                Decay::Polynomial { theta, .. } => *theta,
                Decay::Table { tail: Some(t), .. } => t.theta,
                _ => unreachable!("finite profiles always converge"),
            };
            let partial = explicit_sum(&w, |j| profile.bound(j), 1, 1_000_000);
            Ok(HypothesisCertificate {
                condition,
                d,
                holds: false,
                sum: None,
                witness: Some(format!(
                    "terms m^{e} * m^-{theta} = m^{} form a divergent p-series (exponent >= -1); \
                     partial sum to m = 10^6 is {partial}",
                    f64::from(e) - theta
                )),
            })
        }
        Err(other) => Err(other),
    }
}
