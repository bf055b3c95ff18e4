//! Transition densities, tail probabilities and the Laplace transform of the
//! tail function by radial Fourier inversion of e^{−tψ}.
//!
//! d=1: p = π⁻¹∫e^{−tψ(u)}cos(ur)du; d=2: p = (2π)⁻¹∫e^{−tψ(u)}J₀(ur)u du;
//! d=3: p = (2π²r)⁻¹∫e^{−tψ(u)}u sin(ur)du. Amplitudes are cut off where
//! tψ exceeds [`DECAY_LOG`].

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::LevyExponent;
use crate::quadrature::{
    integrate_points, oscillatory, Estimate, Kernel, OscillatoryOptions, Tolerance,
};
use crate::special::{gamma, sphere_area};

/// e^{−tψ} is treated as zero once tψ exceeds this (e^{−50} ≈ 2e-22).
pub const DECAY_LOG: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ElementaryKernel,
    BesselKernel,
    ClosedForm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ElementaryKernel => "elementary-kernel",
            Method::BesselKernel => "bessel-kernel",
            Method::ClosedForm => "closed-form",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityEvaluation {
    pub t: f64,
    pub r: f64,
    pub value: f64,
    pub error: f64,
    pub method: Method,
}

fn tol() -> Tolerance {
    Tolerance::new(1e-300, 1e-12).with_budget(4000)
}

/// Reject exponents whose growth is too slow for e^{−tψ} to be usefully
/// integrable: ψ(u)/ln u must at least grow by half between u = 10⁶ and 10¹².
/// Log-type exponents (variance gamma, geometric stable) are rejected.
pub fn decay_probe(exponent: &LevyExponent) -> Result<()> {
    let q = |u: f64| exponent.psi(u) / u.ln();
    let (a, b) = (q(1e6), q(1e12));
    if !(a > 0.0 && b.is_finite()) {
        return Err(Error::NonIntegrableExponent(format!(
            "{}: ψ(10⁶)/ln 10⁶ = {a}, ψ(10¹²)/ln 10¹² = {b}",
            exponent.label()
        )));
    }
    if b < 1.5 * a {
        return Err(Error::NonIntegrableExponent(format!(
            "{} grows no faster than a multiple of ln u (ratio {:.3} between 10⁶ and 10¹²)",
            exponent.label(),
            b / a
        )));
    }
    Ok(())
}

/// Fourier-inversion oracle for one exponent; the decay probe runs once.
#[derive(Debug, Clone)]
pub struct DensityOracle {
    exponent: LevyExponent,
    probed: OnceLock<Result<()>>,
}

impl DensityOracle {
    pub fn new(exponent: &LevyExponent) -> Result<Self> {
        let d = exponent.dimension();
        if !(1..=3).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        Ok(DensityOracle {
            exponent: exponent.clone(),
            probed: OnceLock::new(),
        })
    }

    pub fn exponent(&self) -> &LevyExponent {
        &self.exponent
    }

    fn ready(&self) -> Result<()> {
        self.probed
            .get_or_init(|| decay_probe(&self.exponent))
            .clone()
    }

    fn check_time(t: f64) -> Result<()> {
        if t > 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "time must be positive and finite, got {t}"
            )))
        }
    }

    /// Natural scale ψ⁻(1/t) and cutoff of e^{−tψ}.
    fn scales(&self, t: f64) -> Result<(f64, f64)> {
        let factor = if self.exponent.is_monotone() {
            1.0
        } else {
            PI * PI
        };
        let cutoff = self.exponent.inverse(factor * DECAY_LOG / t);
        let scale = self.exponent.inverse(1.0 / t);
        if !(cutoff.is_finite() && cutoff > 0.0 && scale > 0.0) {
            return Err(Error::NonIntegrableExponent(format!(
                "{}: no cutoff for tψ ≥ {DECAY_LOG} at t={t}",
                self.exponent.label()
            )));
        }
        Ok((scale, cutoff))
    }

    fn amplitude(&self, t: f64) -> impl Fn(f64) -> f64 + '_ {
        move |u: f64| {
            let x = t * self.exponent.psi(u);
            if x > 745.0 {
                0.0
            } else {
                (-x).exp()
            }
        }
    }

    /// p_t(0) = (2π)^{−d} ω_d ∫₀^∞ e^{−tψ(u)} u^{d−1} du.
    pub fn density_at_zero(&self, t: f64) -> Result<DensityEvaluation> {
        Self::check_time(t)?;
        self.ready()?;
        let d = self.exponent.dimension();
        let (scale, cutoff) = self.scales(t)?;
        let amp = self.amplitude(t);
        let dm1 = d as i32 - 1;
        let e = integrate_points(|u| amp(u) * u.powi(dm1), &breakpoints(scale, cutoff), tol())?;
        let k = (2.0 * PI).powi(-(d as i32)) * sphere_area(d);
        Ok(self.finish(t, 0.0, e.scale(k)))
    }

    fn finish(&self, t: f64, r: f64, e: Estimate) -> DensityEvaluation {
        let method = if self.exponent.dimension() == 2 {
            Method::BesselKernel
        } else {
            Method::ElementaryKernel
        };
        DensityEvaluation {
            t,
            r,
            value: e.value.max(0.0),
            error: e.error,
            method,
        }
    }

    /// p_t(r) for |x| = r.
    pub fn density(&self, t: f64, r: f64) -> Result<DensityEvaluation> {
        Self::check_time(t)?;
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "radius must be nonnegative, got {r}"
            )));
        }
        if r == 0.0 {
            return self.density_at_zero(t);
        }
        self.ready()?;
        let (scale, cutoff) = self.scales(t)?;
        let amp = self.amplitude(t);
        let e = match self.exponent.dimension() {
            1 => fourier(&amp, Kernel::Cos, r, scale, cutoff)?.scale(1.0 / PI),
            2 => fourier(&|u| u * amp(u), Kernel::J0, r, scale, cutoff)?.scale(0.5 / PI),
            _ => fourier(&|u| u * amp(u), Kernel::Sin, r, scale, cutoff)?
                .scale(1.0 / (2.0 * PI * PI * r)),
        };
        Ok(self.finish(t, r, e))
    }

    /// P(|X_t| ≥ r), from the Fourier form of the ball probability:
    /// d=1: (2/π)∫(1−e^{−tψ})sin(ur)/u du;
    /// d=2: r∫(1−e^{−tψ})J₁(ur)du;
    /// d=3: (2/π)[∫(1−e^{−tψ})sin(ur)/u du + r∫e^{−tψ}cos(ur)du].
    pub fn tail_probability(&self, t: f64, r: f64) -> Result<Estimate> {
        Self::check_time(t)?;
        if !(r >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius must be nonnegative, got {r}"
            )));
        }
        if r == 0.0 {
            return Ok(Estimate::exact(1.0));
        }
        if r.is_infinite() {
            return Ok(Estimate::ZERO);
        }
        self.ready()?;
        let (scale, cutoff) = self.scales(t)?;
        let one_minus = |u: f64| -(-t * self.exponent.psi(u)).exp_m1();
        let e = match self.exponent.dimension() {
            1 => fourier(&|u| one_minus(u) / u, Kernel::Sin, r, scale, f64::INFINITY)?
                .scale(2.0 / PI),
            2 => fourier(&one_minus, Kernel::J1, r, scale, f64::INFINITY)?.scale(r),
            _ => {
                let s = fourier(&|u| one_minus(u) / u, Kernel::Sin, r, scale, f64::INFINITY)?;
                let c = fourier(&self.amplitude(t), Kernel::Cos, r, scale, cutoff)?;
                (s + c.scale(r)).scale(2.0 / PI)
            }
        };
        Ok(Estimate::new(e.value.clamp(0.0, 1.0), e.error))
    }

    /// ℒf_t(λ) = ∫₀^∞ e^{−λρ} P(|X_t|² > ρ) dρ through
    /// λℒf_t(λ) = (4π)^{−d/2} ω_d ∫₀^∞ (1 − e^{−tψ(ρ√λ)}) e^{−ρ²/4} ρ^{d−1} dρ.
    pub fn laplace_of_tail(&self, t: f64, lambda: f64) -> Result<Estimate> {
        Self::check_time(t)?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "λ must be positive, got {lambda}"
            )));
        }
        let d = self.exponent.dimension();
        let sl = lambda.sqrt();
        let knee = self.exponent.inverse(1.0 / t) / sl;
        let mut pts = vec![0.0];
        let mut marks: Vec<f64> = (-6..=6).map(|k| knee * 10f64.powi(k)).collect();
        marks.extend([0.5, 1.0, 2.0, 4.0, 8.0, 16.0]);
        marks.retain(|m| m.is_finite() && *m > 0.0 && *m < 40.0);
        marks.sort_by(f64::total_cmp);
        marks.dedup();
        pts.extend(marks);
        pts.push(40.0);
        let dm1 = d as i32 - 1;
        let f = |rho: f64| {
            -(-t * self.exponent.psi(rho * sl)).exp_m1() * (-0.25 * rho * rho).exp() * rho.powi(dm1)
        };
        let e = integrate_points(f, &pts, tol())?;
        let k = (4.0 * PI).powf(-0.5 * d as f64) * sphere_area(d) / lambda;
        Ok(e.scale(k))
    }
}

/// Geometric breakpoints around the natural scale, clipped to (0, top].
fn breakpoints(scale: f64, top: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    for k in -8..=8 {
        let m = scale * 10f64.powi(k);
        if m > 0.0 && m < top {
            pts.push(m);
        }
    }
    pts.push(top);
    pts
}

/// ∫₀^∞ amp(u) K(ur) du: the piece up to the first kernel zero (or the
/// cutoff) with breakpoints at the natural scale, the rest zero to zero.
fn fourier(
    amp: &dyn Fn(f64) -> f64,
    kernel: Kernel,
    r: f64,
    scale: f64,
    cutoff: f64,
) -> Result<Estimate> {
    let first = kernel.zero(1) / r;
    let f = |u: f64| {
        let a = amp(u);
        if a == 0.0 {
            0.0
        } else {
            a * kernel.eval(u * r)
        }
    };
    if cutoff <= first {
        return integrate_points(f, &breakpoints(scale, cutoff), tol());
    }
    let head = integrate_points(f, &breakpoints(scale, first), tol())?;
    let opts = OscillatoryOptions {
        tol: Tolerance::new(1e-300, 1e-13).with_budget(2000),
        ..Default::default()
    };
    let tail = oscillatory(amp, kernel, r, first, cutoff, opts)?;
    Ok(head + tail)
}

pub fn density(exponent: &LevyExponent, t: f64, r: f64) -> Result<DensityEvaluation> {
    DensityOracle::new(exponent)?.density(t, r)
}

pub fn density_at_zero(exponent: &LevyExponent, t: f64) -> Result<DensityEvaluation> {
    DensityOracle::new(exponent)?.density_at_zero(t)
}

pub fn tail_probability(exponent: &LevyExponent, t: f64, r: f64) -> Result<Estimate> {
    DensityOracle::new(exponent)?.tail_probability(t, r)
}

pub fn laplace_of_tail(exponent: &LevyExponent, t: f64, lambda: f64) -> Result<Estimate> {
    DensityOracle::new(exponent)?.laplace_of_tail(t, lambda)
}

/// The Cauchy density (ψ(u) = u) in closed form.
pub fn cauchy_density(d: usize, t: f64, r: f64) -> Result<DensityEvaluation> {
    let s = t * t + r * r;
    let value = match d {
        1 => t / (PI * s),
        2 => t / (2.0 * PI * s.powf(1.5)),
        3 => t / (PI * PI * s * s),
        _ => return Err(Error::UnsupportedDimension(d)),
    };
    Ok(DensityEvaluation {
        t,
        r,
        value,
        error: 0.0,
        method: Method::ClosedForm,
    })
}

/// P(|X_t| ≥ r) for the Cauchy process in closed form.
pub fn cauchy_tail(d: usize, t: f64, r: f64) -> Result<f64> {
    Ok(match d {
        1 => 1.0 - 2.0 / PI * (r / t).atan(),
        2 => t / (t * t + r * r).sqrt(),
        3 => 1.0 - 2.0 / PI * ((r / t).atan() - r * t / (t * t + r * r)),
        _ => return Err(Error::UnsupportedDimension(d)),
    })
}

/// p_t(0) = (2π)^{−d} ω_d Γ(d/α) t^{−d/α}/α for ψ(u) = u^α.
pub fn stable_density_at_zero(d: usize, alpha: f64, t: f64) -> f64 {
    let dd = d as f64;
    (2.0 * PI).powf(-dd) * sphere_area(d) * gamma(dd / alpha) * t.powf(-dd / alpha) / alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power(alpha: f64, d: usize) -> LevyExponent {
        LevyExponent::direct(d, format!("u^{alpha}"), move |u| u.powf(alpha))
            .assume_monotone()
            .with_inverse(move |v| v.powf(1.0 / alpha))
    }

    #[test]
    fn cauchy_values() {
        let c1 = power(1.0, 1);
        assert!((density(&c1, 1.0, 0.0).unwrap().value - 1.0 / PI).abs() < 1e-12);
        assert!((density(&c1, 1.0, 1.0).unwrap().value - 0.5 / PI).abs() < 1e-12);
        let c3 = power(1.0, 3);
        assert!((density(&c3, 1.0, 0.0).unwrap().value - 1.0 / (PI * PI)).abs() < 1e-12);
        let e = density(&c3, 1.0, 2.0).unwrap();
        assert_eq!(e.method, Method::ElementaryKernel);
        assert!((e.value / cauchy_density(3, 1.0, 2.0).unwrap().value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cauchy_in_the_plane() {
        let c2 = power(1.0, 2);
        for r in [0.0, 0.3, 5.0] {
            let e = density(&c2, 1.0, r).unwrap();
            assert_eq!(e.method, Method::BesselKernel);
            let want = cauchy_density(2, 1.0, r).unwrap().value;
            assert!(
                (e.value / want - 1.0).abs() < 1e-9,
                "r={r}: {} vs {want}",
                e.value
            );
        }
    }

    #[test]
    fn diagonal_of_stable() {
        for &(a, d) in &[(0.5, 1), (1.5, 1), (1.0, 3), (1.2, 2)] {
            let psi = power(a, d);
            let e = density_at_zero(&psi, 0.7).unwrap();
            let want = stable_density_at_zero(d, a, 0.7);
            assert!((e.value / want - 1.0).abs() < 1e-10, "α={a} d={d}");
        }
        let c = power(1.0, 1);
        let ratio =
            density_at_zero(&c, 2.0).unwrap().value / density_at_zero(&c, 1.0).unwrap().value;
        assert!((ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tails_match_closed_forms() {
        for d in 1..=3 {
            let psi = power(1.0, d);
            assert_eq!(tail_probability(&psi, 1.0, 0.0).unwrap().value, 1.0);
            for &(t, r) in &[(1.0, 1.0), (0.1, 3.0), (5.0, 0.2)] {
                let e = tail_probability(&psi, t, r).unwrap();
                let want = cauchy_tail(d, t, r).unwrap();
                assert!(
                    (e.value - want).abs() < 1e-9,
                    "d={d} t={t} r={r}: {} vs {want}",
                    e.value
                );
            }
        }
        assert!((cauchy_tail(1, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(tail_probability(&power(1.0, 1), 1.0, 1e12).unwrap().value < 1e-11);
    }

    #[test]
    fn laplace_identity_matches_direct_quadrature() {
        let psi = power(1.0, 1);
        let o = DensityOracle::new(&psi).unwrap();
        let via_identity = o.laplace_of_tail(1.0, 1.0).unwrap().value;
        let direct = integrate_points(
            |rho: f64| (-rho).exp() * cauchy_tail(1, 1.0, rho.sqrt()).unwrap(),
            &[0.0, 1.0, 10.0, f64::INFINITY],
            tol(),
        )
        .unwrap()
        .value;
        assert!(
            (via_identity - direct).abs() < 1e-9,
            "{via_identity} {direct}"
        );
        assert!(o.laplace_of_tail(1e-12, 1.0).unwrap().value < 1e-10);
    }

    #[test]
    fn refuses_high_dimensions_and_slow_growth() {
        assert!(matches!(
            density(&power(1.0, 4), 1.0, 1.0),
            Err(Error::UnsupportedDimension(4))
        ));
        let vg = LevyExponent::direct(1, "ln(1+u²)", |u: f64| (u * u).ln_1p()).assume_monotone();
        assert!(matches!(
            density(&vg, 1.0, 1.0),
            Err(Error::NonIntegrableExponent(_))
        ));
        let bounded =
            LevyExponent::direct(1, "1-e^{-u}", |u: f64| -(-u).exp_m1()).assume_monotone();
        assert!(matches!(
            density(&bounded, 1.0, 1.0),
            Err(Error::NonIntegrableExponent(_))
        ));
    }
}
