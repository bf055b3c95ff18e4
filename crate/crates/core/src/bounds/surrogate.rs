//! Comparison exponents: a complete Bernstein function comparable with ψ(√·),
//! and exponents built from a prescribed growth profile.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{
    exponent_from_density, BernsteinFunction, LevyExponent, Measure, UnimodalLevyDensity,
};
use crate::quadrature::{Estimate, Tolerance};
use crate::scaling::{Direction, GridSpec, ScalingCertificate};
use crate::special::sphere_area;

use super::ledger::off_diagonal_constant;

fn tol() -> Tolerance {
    Tolerance::new(1e-300, 1e-10).with_budget(4000)
}

/// Range of a measured ratio over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl RatioRange {
    pub fn from_values(values: &[f64]) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        RatioRange {
            min,
            max,
            points: values.len(),
        }
    }

    /// max/min; ∞ if a ratio is not positive.
    pub fn spread(&self) -> f64 {
        if self.min > 0.0 {
            self.max / self.min
        } else {
            f64::INFINITY
        }
    }
}

/// φ(λ) = 2∫₀^∞ λu²/(λu²+1) ν(u) u^{d−1} du, a complete Bernstein function
/// with ω_d⁻¹h(λ^{−1/2}) ≤ φ(λ) ≤ 2ω_d⁻¹h(λ^{−1/2}). Its Lévy measure has
/// density m(s) = 2∫ν(u)u^{d−3}e^{−s/u²}du.
pub fn surrogate_cbf(nu: &UnimodalLevyDensity) -> BernsteinFunction {
    let src = Arc::new(nu.clone());
    let f = src.clone();
    let phi = move |lambda: f64| -> Estimate {
        f.radial_integral(
            |u| 2.0 * lambda * u * u / (lambda * u * u + 1.0),
            0.0,
            f64::INFINITY,
            tol(),
        )
        .unwrap_or(Estimate::new(f64::NAN, f64::NAN))
    };
    let g = src.clone();
    let density = move |s: f64| -> f64 {
        g.radial_integral(
            |u| 2.0 * (-s / (u * u)).exp() / (u * u),
            0.0,
            f64::INFINITY,
            tol(),
        )
        .map_or(f64::NAN, |e| e.value)
    };
    let measure = Measure::Density {
        density: Some(Arc::new(density)),
        tail: None,
        scale: src.scale() * src.scale(),
    };
    BernsteinFunction::new(format!("surrogate of {}", nu.label()), phi, 0.0, measure)
}

/// ψ(√λ)/φ(λ) over the λ-nodes of `grid`, in parallel.
pub fn surrogate_ratios(
    psi: &LevyExponent,
    phi: &BernsteinFunction,
    grid: GridSpec,
) -> Result<(Vec<f64>, RatioRange)> {
    let nodes = grid.nodes();
    let ratios: Vec<f64> = nodes
        .par_iter()
        .map(|&l| psi.psi(l.sqrt()) / phi.value(l))
        .collect();
    if let Some((l, r)) = nodes
        .iter()
        .zip(&ratios)
        .find(|(_, r)| !(r.is_finite() && **r > 0.0))
    {
        return Err(Error::QuadratureFailure(format!(
            "surrogate ratio {r} at λ={l}"
        )));
    }
    let range = RatioRange::from_values(&ratios);
    Ok((ratios, range))
}

/// ψ^Y from a growth profile f, with the two comparison constants
/// f ≤ `lower_constant`·ψ^Y and ψ^Y ≤ `upper_constant`·f above θ.
#[derive(Debug, Clone)]
pub struct ProfileExponent {
    pub exponent: LevyExponent,
    pub density: UnimodalLevyDensity,
    pub theta: f64,
    /// π² C_off
    pub lower_constant: f64,
    /// 2ω_d(C̄/(2−ᾱ) + 1/(c̲λ̲))
    pub upper_constant: f64,
}

/// ν^Y(x) = f(1/|x|)|x|^{−d} on B_{1/θ} (everywhere when θ = 0).
pub fn profile_exponent<F>(
    f: F,
    d: usize,
    lower: Option<&ScalingCertificate>,
    upper: Option<&ScalingCertificate>,
) -> Result<ProfileExponent>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let (Some(lower), Some(upper)) = (lower, upper) else {
        return Err(Error::MissingCertificate(
            "a profile needs both WLSC and WUSC certificates".into(),
        ));
    };
    if lower.direction != Direction::Lower || upper.direction != Direction::Upper {
        return Err(Error::PreconditionViolation(
            "certificates are in the wrong order".into(),
        ));
    }
    lower.require_valid()?;
    upper.require_valid()?;
    if !(lower.alpha > 0.0) {
        return Err(Error::InvalidExponent(format!(
            "profile needs a positive lower index, got {}",
            lower.alpha
        )));
    }
    if !(upper.alpha < 2.0) {
        return Err(Error::InvalidExponent(format!(
            "profile needs an upper index below 2, got {}",
            upper.alpha
        )));
    }
    let theta = lower.theta.max(upper.theta);
    let dd = d as f64;
    let base =
        UnimodalLevyDensity::from_fn(d, "f(1/r)r^{−d}", move |r: f64| f(1.0 / r) * r.powf(-dd))?;
    let density = if theta > 0.0 {
        base.truncate(1.0 / theta)?
    } else {
        base
    };
    let exponent = exponent_from_density(&density);
    let lower_constant = std::f64::consts::PI.powi(2) * off_diagonal_constant(d);
    let upper_constant = 2.0
        * sphere_area(d)
        * (upper.constant / (2.0 - upper.alpha) + 1.0 / (lower.constant * lower.alpha));
    Ok(ProfileExponent {
        exponent,
        density,
        theta,
        lower_constant,
        upper_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_calculus::pruitt_h;
    use crate::scaling::certify;
    use std::f64::consts::PI;

    fn cauchy_density() -> UnimodalLevyDensity {
        UnimodalLevyDensity::from_fn(1, "1/(πr²)", |r: f64| 1.0 / (PI * r * r))
            .unwrap()
            .with_tail_mass(|r| 2.0 / (PI * r))
    }

    #[test]
    fn stable_surrogate_is_a_power() {
        // 2∫λu²/(λu²+1) u^{-2}/π du = √λ
        let phi = surrogate_cbf(&cauchy_density());
        for l in [1e-4, 1.0, 1e4] {
            let v = phi.value(l);
            assert!((v - l.sqrt()).abs() < 1e-8 * v, "{l}: {v}");
        }
        let psi = LevyExponent::direct(1, "u", |u| u);
        let (_, range) = surrogate_ratios(&psi, &phi, GridSpec::new(1e-6, 1e6, 25)).unwrap();
        assert!(range.spread() < 1.0 + 1e-7);
    }

    #[test]
    fn surrogate_tracks_h() {
        let nu = cauchy_density();
        let phi = surrogate_cbf(&nu);
        for l in [0.01f64, 1.0, 100.0] {
            let h = pruitt_h(&nu, l.powf(-0.5)).unwrap().value / sphere_area(1);
            let v = phi.value(l);
            assert!(
                h <= v * (1.0 + 1e-9) && v <= 2.0 * h * (1.0 + 1e-9),
                "{l}: {v} vs {h}"
            );
        }
    }

    #[test]
    fn surrogate_measure_reproduces_phi() {
        let phi = surrogate_cbf(&cauchy_density());
        let from_measure = phi.measure().laplace_exponent(2.0).unwrap().value;
        assert!((from_measure - 2f64.sqrt()).abs() < 1e-6, "{from_measure}");
    }

    #[test]
    fn profile_of_power() {
        let f = |u: f64| u.powf(1.2);
        let lo = certify(&f, Direction::Lower, 1.2, 0.0, GridSpec::default()).unwrap();
        let up = certify(&f, Direction::Upper, 1.2, 0.0, GridSpec::default()).unwrap();
        let p = profile_exponent(f, 1, Some(&lo), Some(&up)).unwrap();
        for u in [0.1, 1.0, 10.0] {
            let psi = p.exponent.psi(u);
            assert!(
                f(u) <= p.lower_constant * psi && psi <= p.upper_constant * f(u),
                "{u}: {psi}"
            );
        }
        let flat = |_: f64| 1.0;
        let lo0 = certify(&flat, Direction::Lower, 0.0, 0.0, GridSpec::default()).unwrap();
        let up0 = certify(&flat, Direction::Upper, 0.0, 0.0, GridSpec::default()).unwrap();
        assert!(matches!(
            profile_exponent(flat, 1, Some(&lo0), Some(&up0)),
            Err(Error::InvalidExponent(_))
        ));
        assert!(matches!(
            profile_exponent(f, 1, None, Some(&up)),
            Err(Error::MissingCertificate(_))
        ));
    }

    #[test]
    fn truncated_profile() {
        let f = |u: f64| u.powf(0.8);
        let lo = certify(&f, Direction::Lower, 0.8, 1.0, GridSpec::default()).unwrap();
        let up = certify(&f, Direction::Upper, 0.8, 1.0, GridSpec::default()).unwrap();
        let p = profile_exponent(f, 1, Some(&lo), Some(&up)).unwrap();
        assert_eq!(p.density.cutoff(), Some(1.0));
        for u in [1.5, 10.0, 100.0] {
            let psi = p.exponent.psi(u);
            assert!(f(u) <= p.lower_constant * psi && psi <= p.upper_constant * f(u));
        }
    }
}
