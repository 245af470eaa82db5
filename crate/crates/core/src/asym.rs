//! Fixed point of the Karp-Sipser differential equations for G(n, c/n).
//!
//! `gamma_lo` is the smallest root of `x = c exp(-c e^{-x})` and
//! `gamma_hi = c e^{-gamma_lo}`. The map `x -> c e^{-x}` sends roots to roots,
//! and its own fixed point `w = W(c)` (Lambert W) is always a root. For
//! `c <= e` it is the only one; for `c > e` two more appear, one on each side
//! of `w`. At `c = e` all three merge into a triple root, where a sign-change
//! search alone cannot get below ~1e-5 accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCAN_POINTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsAsymptotics {
    pub c: f64,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub isolated_fraction: f64,
    /// `|g(gamma_lo)|`.
    pub residual: f64,
}

fn g(c: f64, x: f64) -> f64 {
    x - c * (-c * (-x).exp()).exp()
}

/// Principal branch of Lambert W for `c > 0`, by Newton's method.
pub fn lambert_w(c: f64) -> f64 {
    let mut x = if c < 1.0 { c / (1.0 + c) } else { c.ln() - c.ln().ln().max(0.0) };
    x = x.max(1e-300);
    for _ in 0..100 {
        let ex = x.exp();
        let step = (x * ex - c) / (ex * (x + 1.0));
        x -= step;
        if step.abs() <= 1e-16 * x.abs().max(1e-300) {
            break;
        }
    }
    x
}

pub fn solve_gamma(c: f64, tol: f64) -> Result<KsAsymptotics> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("mean degree must be positive, got {c}")));
    }
    if tol.is_nan() || tol < 1e-14 {
        return Err(Error::InvalidParameter(format!("tolerance must be at least 1e-14, got {tol}")));
    }
    let w = lambert_w(c);
    if !(w.is_finite() && g(c, w).abs() <= tol.max(1e-12)) {
        return Err(Error::NoRootFound { c });
    }
    // any root below w shows up as g turning nonnegative before w
    let step = w / SCAN_POINTS as f64;
    let mut lo = 0.0;
    let mut bracket = None;
    for i in 1..SCAN_POINTS {
        let x = i as f64 * step;
        if g(c, x) >= 0.0 {
            bracket = Some((lo, x));
            break;
        }
        lo = x;
    }
    let gamma_lo = match bracket {
        None => w,
        Some((mut a, mut b)) => {
            loop {
                let mid = 0.5 * (a + b);
                let gm = g(c, mid);
                if (b - a <= tol && gm.abs() <= tol) || mid <= a || mid >= b {
                    break mid;
                }
                if gm < 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
        }
    };
    let residual = g(c, gamma_lo).abs();
    if !(0.0..=c).contains(&gamma_lo) || residual > tol {
        return Err(Error::NoRootFound { c });
    }
    let gamma_hi = c * (-gamma_lo).exp();
    Ok(KsAsymptotics {
        c,
        gamma_lo,
        gamma_hi,
        isolated_fraction: (gamma_hi + gamma_lo + gamma_hi * gamma_lo) / c - 1.0,
        residual,
    })
}

/// Limiting `|I_KS| / n` for G(n, c/n), `(gamma_hi + gamma_lo + gamma_hi*gamma_lo)/c - 1`.
pub fn isolated_fraction(c: f64) -> Result<f64> {
    Ok(solve_gamma(c, 1e-12)?.isolated_fraction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn lambert_w_inverts() {
        for c in [1e-6, 0.1, 0.5, 1.0, E, 3.0, 30.0, 1e4] {
            let w = lambert_w(c);
            assert!((w * w.exp() - c).abs() <= 1e-12 * c.max(1.0), "c = {c}");
        }
        assert!((lambert_w(E) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn critical_point() {
        let s = solve_gamma(E, 1e-12).unwrap();
        assert!((s.gamma_lo - 1.0).abs() <= 1e-8);
        assert!((s.gamma_hi - 1.0).abs() <= 1e-8);
        assert!((s.isolated_fraction - (3.0 / E - 1.0)).abs() <= 1e-8);
    }

    #[test]
    fn grid_oracle_at_half() {
        let s = solve_gamma(0.5, 1e-13).unwrap();
        // independent oracle: minimise |g| over a dense grid on [0, c]
        let n = 1_000_000;
        let best = (0..=n)
            .map(|i| 0.5 * i as f64 / n as f64)
            .min_by(|a, b| g(0.5, *a).abs().total_cmp(&g(0.5, *b).abs()))
            .unwrap();
        assert!((s.gamma_lo - best).abs() <= 0.5 / n as f64);
    }

    #[test]
    fn supercritical_root_is_smallest() {
        for c in [3.0, 5.0, 10.0, 30.0] {
            let s = solve_gamma(c, 1e-12).unwrap();
            let w = lambert_w(c);
            assert!(s.gamma_lo < w - 1e-6, "c = {c}");
            assert!(s.gamma_hi > w + 1e-6);
            // gamma_hi is the other outer root
            assert!(g(c, s.gamma_hi).abs() <= 1e-9);
            // no root below gamma_lo, up to the bisection tolerance
            let edge = s.gamma_lo - 2e-12;
            let below = (0..1000).map(|i| edge * i as f64 / 1000.0);
            assert!(below.into_iter().all(|x| g(c, x) < 0.0));
        }
    }

    #[test]
    fn subcritical_mirror() {
        for c in [0.5, 1.0, 2.0, E] {
            let s = solve_gamma(c, 1e-12).unwrap();
            assert!((s.gamma_hi - s.gamma_lo).abs() <= 1e-6);
            assert!(g(c, s.gamma_hi).abs() <= 1e-11);
        }
    }

    #[test]
    fn fraction_bounds_and_monotonicity() {
        let mut c = 0.1;
        while c <= 30.0 {
            let s = solve_gamma(c, 1e-12).unwrap();
            assert!((0.0..=1.0).contains(&s.isolated_fraction), "c = {c}");
            assert!(s.residual <= 1e-12);
            assert!((0.0..=c).contains(&s.gamma_lo));
            c += 0.1;
        }
        assert!(isolated_fraction(2.0).unwrap() > isolated_fraction(6.0).unwrap());
        let f3 = isolated_fraction(3.0).unwrap();
        assert!(f3 > 0.0 && f3 < 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_gamma(0.0, 1e-10).is_err());
        assert!(solve_gamma(1.0, 1e-16).is_err());
    }
}
