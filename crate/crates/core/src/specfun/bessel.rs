//! Modified Bessel functions of the first kind, integer order, by power series.
//!
//! `I_α(x) = Σ_k (x/2)^{2k+α} / (k! (k+α)!)`. Every term is positive, so the
//! series is summed directly until a term drops below `SERIES_REL_TOL` of the
//! running sum. The scaled variant `e^{-x} I_α(x)` folds the exponential into
//! the first term instead of forming `e^x`.

use super::gamma::ln_gamma;
use crate::error::{domain, Result};

const SERIES_REL_TOL: f64 = 1e-17;
const SERIES_MAX_TERMS: usize = 500;

/// Above this the leading `e^{-x}` factor risks underflow and the scaled
/// series is started at its largest term in log space instead.
const SCALED_DIRECT_LIMIT: f64 = 500.0;

fn check_x(op: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(op, format!("x must be finite and non-negative, got {x}")))
    }
}

/// `(x/2)^order / order!` times `scale`, accumulated as a product.
fn leading_term(order: u32, half: f64, scale: f64) -> f64 {
    (1..=order).fold(scale, |acc, m| acc * half / f64::from(m))
}

/// Sums `first + Σ t_{k+1}` with `t_{k+1} = t_k q / ((k+1)(k+1+α))`.
fn sum_upward(first: f64, q: f64, order: u32, start_k: usize) -> f64 {
    let alpha = f64::from(order);
    let mut term = first;
    let mut sum = first;
    for k in start_k..start_k + SERIES_MAX_TERMS {
        let k1 = (k + 1) as f64;
        term *= q / (k1 * (k1 + alpha));
        sum += term;
        if term <= SERIES_REL_TOL * sum {
            break;
        }
    }
    sum
}

/// `I_order(x)` for `x >= 0`.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    check_x("bessel_i", x)?;
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    let half = 0.5 * x;
    let first = leading_term(order, half, 1.0);
    Ok(sum_upward(first, half * half, order, 0))
}

/// `e^{-x} I_order(x)` for `x >= 0`, without overflow.
pub fn scaled_bessel_i(order: u32, x: f64) -> Result<f64> {
    check_x("scaled_bessel_i", x)?;
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    let half = 0.5 * x;
    let q = half * half;
    if x <= SCALED_DIRECT_LIMIT {
        let first = leading_term(order, half, (-x).exp());
        return Ok(sum_upward(first, q, order, 0));
    }

    // Start from the dominant term, where the ratio t_{k+1}/t_k crosses 1,
    // and sum outwards in both directions.
    let alpha = f64::from(order);
    let peak = ((alpha * alpha + x * x).sqrt() - alpha) / 2.0;
    let k0 = peak.floor().max(0.0) as usize;
    let kf = k0 as f64;
    let ln_t0 = (2.0 * kf + alpha) * half.ln() - ln_gamma(kf + 1.0) - ln_gamma(kf + alpha + 1.0) - x;
    let t0 = ln_t0.exp();
    let upper = sum_upward(t0, q, order, k0);
    let mut lower = 0.0;
    let mut term = t0;
    for k in (1..=k0).rev() {
        let kf = k as f64;
        // t_{k-1} = t_k k (k+α) / q
        term *= kf * (kf + alpha) / q;
        lower += term;
        if term <= SERIES_REL_TOL * (upper + lower) {
            break;
        }
    }
    Ok(upper + lower)
}

/// `e^{-x} I_0(x)`, in `(0, 1]` and decreasing in `x`.
pub fn scaled_bessel_i0(x: f64) -> Result<f64> {
    scaled_bessel_i(0, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert_eq!(scaled_bessel_i0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_negative_argument() {
        assert!(bessel_i(0, -1.0).is_err());
        assert!(scaled_bessel_i0(-0.5).is_err());
        assert!(bessel_i(2, f64::INFINITY).is_err());
    }

    #[test]
    fn large_argument_tracks_leading_asymptotic() {
        let v = scaled_bessel_i0(100.0).unwrap();
        let approx = (2.0 * std::f64::consts::PI * 100.0).powf(-0.5);
        assert!((v / approx - 1.0).abs() < 0.01);
    }

    #[test]
    fn log_space_branch_agrees_with_direct_branch() {
        // Just above the cutover the log-space start must reproduce the direct sum.
        for order in [0u32, 1, 5, 40] {
            let x = SCALED_DIRECT_LIMIT;
            let direct = scaled_bessel_i(order, x).unwrap();
            let next = scaled_bessel_i(order, x * (1.0 + 1e-12)).unwrap();
            assert_relative_eq!(direct, next, max_relative = 1e-10);
        }
        // Beyond e^{-x} underflow the value is still finite and positive.
        let v = scaled_bessel_i0(2000.0).unwrap();
        let approx = (2.0 * std::f64::consts::PI * 2000.0).powf(-0.5);
        assert!((v / approx - 1.0).abs() < 1e-3, "{v} vs {approx}");
    }

    #[test]
    fn recurrence_relation_holds() {
        // I_{ν-1}(x) - I_{ν+1}(x) = (2ν/x) I_ν(x)
        for &x in &[0.3, 2.0, 7.5, 24.0, 50.0] {
            for nu in 1..10u32 {
                let lhs = bessel_i(nu - 1, x).unwrap() - bessel_i(nu + 1, x).unwrap();
                let rhs = 2.0 * f64::from(nu) / x * bessel_i(nu, x).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            }
        }
    }
}
