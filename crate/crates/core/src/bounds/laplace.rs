//! Pointwise bounds for a nonincreasing f ≥ 0 from its Laplace transform.

use crate::error::{Error, Result};
use crate::quadrature::Estimate;
use crate::scaling::{Direction, ScalingCertificate};
use crate::special::lower_gamma;

/// f(r) ≤ γ(n+m+1, 1)^{−1} r^{−n−m−1} |g⁽ⁿ⁾(1/r)| with g = ℒ[s^m f],
/// given the value of the derivative.
pub fn laplace_upper_from_derivative(derivative: f64, r: f64, n: u32, m: u32) -> f64 {
    let k = (n + m + 1) as f64;
    derivative.abs() * r.powf(-k) / lower_gamma(k, 1.0)
}

/// The same bound with g⁽ⁿ⁾ taken by central differences and Richardson
/// extrapolation on two step sizes.
pub fn monotone_laplace_upper<G: Fn(f64) -> f64>(g: G, r: f64, n: u32, m: u32) -> Result<Estimate> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {r}"
        )));
    }
    let x = 1.0 / r;
    let d = nth_derivative(&g, x, n)?;
    let k = laplace_upper_from_derivative(1.0, r, n, m);
    Ok(Estimate::new(d.value.abs() * k, d.error * k))
}

fn central(g: &impl Fn(f64) -> f64, x: f64, n: u32, h: f64) -> f64 {
    // Σ_j (−1)^j C(n,j) g(x + (n/2 − j)h) / hⁿ
    let mut sum = 0.0;
    let mut binom = 1.0;
    for j in 0..=n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * g(x + (0.5 * n as f64 - j as f64) * h);
        binom = binom * (n - j) as f64 / (j + 1) as f64;
    }
    sum / h.powi(n as i32)
}

fn nth_derivative(g: &impl Fn(f64) -> f64, x: f64, n: u32) -> Result<Estimate> {
    if n == 0 {
        let v = g(x);
        return if v.is_finite() {
            Ok(Estimate::exact(v))
        } else {
            Err(Error::DerivativeFailure(format!("g({x}) = {v}")))
        };
    }
    if n > 6 {
        return Err(Error::DerivativeFailure(format!(
            "order {n} is too high for finite differences"
        )));
    }
    let h = x * f64::EPSILON.powf(1.0 / (n as f64 + 4.0)) * 4.0;
    let coarse = central(g, x, n, h);
    let fine = central(g, x, n, 0.5 * h);
    let value = (4.0 * fine - coarse) / 3.0;
    let error = (fine - coarse).abs() / 3.0;
    if !value.is_finite() || error > 1e-3 * value.abs().max(1e-300) && error > 1e-300 {
        return Err(Error::DerivativeFailure(format!(
            "order-{n} difference at {x} did not settle: {value} ± {error}"
        )));
    }
    Ok(Estimate::new(value, error))
}

/// Lower bound f(r) ≥ (b/2) e^b r^{−1} ℒf(1/r), valid for r < b/θ̄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceLower {
    pub b: f64,
    pub radius: f64,
    /// None when r is outside the validity radius.
    pub value: Option<f64>,
}

/// b ∈ (0, 1] with 2C̄γ(β, b) = 1 − e^{−1}, or 1 when even b = 1 leaves slack.
pub fn laplace_lower_b(beta: f64, c_upper: f64) -> Result<f64> {
    if !(beta > 0.0) || !(c_upper > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need β > 0 and C̄ > 0, got β={beta}, C̄={c_upper}"
        )));
    }
    let target = 1.0 - (-1.0f64).exp();
    let g = |b: f64| 2.0 * c_upper * lower_gamma(beta, b) - target;
    if g(1.0) <= 0.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    // the lower end keeps 2C̄γ(β, b) ≤ 1 − e^{−1}
    Ok(lo)
}

/// The bound for f at r from a WUSC(−β, θ̄, C̄) certificate of ℒf.
pub fn monotone_laplace_lower<L: Fn(f64) -> f64>(
    lf: L,
    cert: &ScalingCertificate,
    r: f64,
) -> Result<LaplaceLower> {
    if cert.direction != Direction::Upper || !(cert.alpha < 0.0) {
        return Err(Error::MissingCertificate(format!(
            "need a WUSC(−β, θ̄, C̄) certificate with β > 0 for ℒf, got {} scaling with α={}",
            cert.direction, cert.alpha
        )));
    }
    let b = laplace_lower_b(-cert.alpha, cert.constant)?;
    let radius = if cert.theta == 0.0 {
        f64::INFINITY
    } else {
        b / cert.theta
    };
    let value = (r > 0.0 && r < radius).then(|| 0.5 * b * b.exp() / r * lf(1.0 / r));
    Ok(LaplaceLower { b, radius, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::{certify, GridSpec};

    #[test]
    fn exponential_upper_bound() {
        let e = monotone_laplace_upper(|u| 1.0 / (1.0 + u), 1.0, 0, 0).unwrap();
        assert!((e.value - 0.5 / (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((e.value - 0.791).abs() < 1e-3 && e.value >= (-1.0f64).exp());
        assert_eq!(
            monotone_laplace_upper(|_| 0.0, 2.0, 0, 0).unwrap().value,
            0.0
        );
    }

    #[test]
    fn first_derivative_variant() {
        // f = e^{−s}: ℒ[s f](u) = 1/(1+u)², and the n=1, m=0 form uses ℒf′ = −1/(1+u)²
        for r in [0.5, 1.0, 3.0] {
            let a = monotone_laplace_upper(|u| 1.0 / (1.0 + u).powi(2), r, 0, 1).unwrap();
            let b = monotone_laplace_upper(|u| 1.0 / (1.0 + u), r, 1, 0).unwrap();
            assert!((a.value - b.value).abs() < 1e-6 * a.value, "{a:?} {b:?}");
            assert!(a.value >= (-r).exp());
        }
        let closed = laplace_upper_from_derivative(-0.25, 1.0, 1, 0);
        assert!((closed - 0.25 / lower_gamma(2.0, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn b_for_unit_parameters() {
        let b = laplace_lower_b(1.0, 1.0).unwrap();
        let want = -(1.0 - 0.5 * (1.0 - (-1.0f64).exp())).ln();
        assert!((b - want).abs() < 1e-12 && (b - 0.3799).abs() < 1e-4, "{b}");
    }

    #[test]
    fn heavy_tail_lower_bound() {
        // f(s) = s^{−1/2}: ℒf(u) = √(π/u), WUSC(−1/2, 0, 1)
        let lf = |u: f64| (std::f64::consts::PI / u).sqrt();
        let cert = certify(&lf, Direction::Upper, -0.5, 0.0, GridSpec::default()).unwrap();
        for r in [1e-3, 1.0, 1e3] {
            let lo = monotone_laplace_lower(lf, &cert, r).unwrap();
            assert!(lo.value.unwrap() <= r.powf(-0.5));
        }
        let local = certify(&lf, Direction::Upper, -0.5, 1.0, GridSpec::default()).unwrap();
        let out = monotone_laplace_lower(lf, &local, 10.0).unwrap();
        assert!(out.value.is_none() && out.radius < 1.0);
        let wrong = certify(&lf, Direction::Lower, -0.5, 0.0, GridSpec::default()).unwrap();
        assert!(matches!(
            monotone_laplace_lower(lf, &wrong, 1.0),
            Err(Error::MissingCertificate(_))
        ));
    }
}
