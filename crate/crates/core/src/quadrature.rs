//! Adaptive Simpson quadrature.

use crate::{Error, Result};

/// Default absolute tolerance for bin-probability integrals.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// Default recursion limit.
pub const DEFAULT_MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy)]
pub struct Simpson {
    pub tolerance: f64,
    pub max_depth: u32,
}

impl Default for Simpson {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

impl Simpson {
    /// Integrates `f` over the finite interval `[a, b]`.
    ///
    /// Fails with [`Error::Quadrature`] when some panel reaches `max_depth`
    /// before its local error estimate meets its share of the tolerance; the
    /// error carries the accumulated estimate actually achieved.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite(if a.is_finite() { b } else { a }));
        }
        if a == b {
            return Ok(0.0);
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let fa = f(lo);
        let fb = f(hi);
        let fm = f(0.5 * (lo + hi));
        let panel = Panel {
            a: lo,
            b: hi,
            fa,
            fm,
            fb,
            whole: (hi - lo) / 6.0 * (fa + 4.0 * fm + fb),
        };
        let mut achieved = 0.0;
        let mut failed = false;
        let v = self.recurse(&f, panel, self.tolerance, self.max_depth, &mut achieved, &mut failed);
        if failed || !v.is_finite() {
            return Err(Error::Quadrature {
                achieved,
                tolerance: self.tolerance,
            });
        }
        Ok(sign * v)
    }

    fn recurse<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        p: Panel,
        tol: f64,
        depth: u32,
        achieved: &mut f64,
        failed: &mut bool,
    ) -> f64 {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
        let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
        let delta = left + right - p.whole;
        if libm::fabs(delta) <= 15.0 * tol || m <= p.a || m >= p.b {
            *achieved += libm::fabs(delta) / 15.0;
            return left + right + delta / 15.0;
        }
        if depth == 0 {
            *achieved += libm::fabs(delta) / 15.0;
            *failed = true;
            return left + right + delta / 15.0;
        }
        let l = Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
        };
        let r = Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
        };
        self.recurse(f, l, 0.5 * tol, depth - 1, achieved, failed)
            + self.recurse(f, r, 0.5 * tol, depth - 1, achieved, failed)
    }
}

/// [`Simpson::integrate`] with the default tolerance and depth.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    Simpson::default().integrate(f, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_transcendentals() {
        assert!((integrate(|x| x * x, 0.0, 3.0).unwrap() - 9.0).abs() < 1e-12);
        assert!((integrate(libm::sin, 0.0, core::f64::consts::PI).unwrap() - 2.0).abs() < 1e-10);
        assert!((integrate(|x| x, 1.0, 0.0).unwrap() + 0.5).abs() < 1e-15);
        assert_eq!(integrate(|x| x, 2.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn reports_non_convergence() {
        let s = Simpson {
            tolerance: 1e-14,
            max_depth: 3,
        };
        match s.integrate(libm::sqrt, 0.0, 1.0) {
            Err(Error::Quadrature { achieved, tolerance }) => {
                assert!(achieved > 0.0);
                assert_eq!(tolerance, 1e-14);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
