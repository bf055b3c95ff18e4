//! Pruitt concentration functions, tail mass, the one-dimensional projection
//! of a radial Lévy density, and subordination.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{exponent_from_bernstein, BernsteinFunction, Measure, UnimodalLevyDensity};
use crate::quadrature::{integrate, integrate_points, Estimate, Tolerance};
use crate::special::{gamma, sphere_area};

fn tol() -> Tolerance {
    Tolerance::new(1e-300, 1e-10).with_budget(4000)
}

/// h(r), h₁(r) and L(r) at one radius.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConcentrationTriple {
    pub r: f64,
    pub h: Estimate,
    pub h1: Estimate,
    pub tail: Estimate,
}

/// ν₁(y) = ω_{d−1} ∫₀^∞ ν(√(y²+s²)) s^{d−2} ds, the density of the Lévy
/// measure of one coordinate. For d = 1 this is ν itself.
pub fn project_1d(nu: &UnimodalLevyDensity) -> Result<UnimodalLevyDensity> {
    let d = nu.dimension();
    if d == 1 {
        return Ok(nu.clone());
    }
    let src = nu.clone();
    let cutoff = nu.cutoff();
    let scale = nu.scale();
    let omega = sphere_area(d - 1);
    let profile = move |y: f64| -> Estimate {
        let top = match cutoff {
            Some(c) if y >= c => return Estimate::ZERO,
            Some(c) => (c * c - y * y).sqrt(),
            None => f64::INFINITY,
        };
        let mut pts = vec![0.0];
        for m in [y, 10.0 * y, 100.0 * y, scale] {
            if m > 0.0 && m < top {
                pts.push(m);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.push(top);
        let rel = std::cell::Cell::new(0.0f64);
        let dm2 = d as i32 - 2;
        let f = |s: f64| {
            let v = src.eval((y * y + s * s).sqrt());
            if v.value == 0.0 {
                return 0.0;
            }
            rel.set(rel.get().max(v.error / v.value));
            v.value * s.powi(dm2)
        };
        match integrate_points(f, &pts, Tolerance::new(1e-300, 1e-11)) {
            Ok(e) => Estimate::new(e.value, e.error + rel.get() * e.value).scale(omega),
            Err(_) => Estimate::new(f64::NAN, f64::NAN),
        }
    };
    let label = format!("{} projected to one coordinate", nu.label());
    let out = UnimodalLevyDensity::from_parts(1, label, Arc::new(profile), cutoff, None, None)?;
    Ok(out.with_scale(scale))
}

/// h(r) = ∫(|x|²/r² ∧ 1) ν(dx).
pub fn pruitt_h(nu: &UnimodalLevyDensity, r: f64) -> Result<Estimate> {
    check_radius(r)?;
    let omega = sphere_area(nu.dimension());
    let inner = nu
        .radial_integral(|s| s * s / (r * r), 0.0, r, tol())?
        .scale(omega);
    Ok(inner + nu.tail_mass(r, tol())?)
}

/// Spherical average of z²θ₁² ∧ 1 over the unit sphere of R^d.
pub fn sphere_average_min(d: usize, z: f64) -> f64 {
    let dd = d as f64;
    if z <= 1.0 {
        return if d == 1 { z * z } else { z * z / dd };
    }
    let s = 1.0 / z;
    match d {
        1 => 1.0,
        2 => {
            let a = s.asin();
            (z * z * (a - s * (1.0 - s * s).sqrt()) + PI - 2.0 * a) / PI
        }
        3 => 1.0 - 2.0 / (3.0 * z),
        _ => {
            // θ₁ = sin φ has density ∝ cos^{d−2}φ on (−π/2, π/2)
            let c = gamma(0.5 * dd) / (PI.sqrt() * gamma(0.5 * (dd - 1.0)));
            let a = s.asin();
            let w = |phi: f64| phi.cos().powi(d as i32 - 2);
            let t = Tolerance::new(1e-15, 1e-13);
            let near = integrate(|p| z * z * p.sin().powi(2) * w(p), 0.0, a, t)
                .map_or(f64::NAN, |e| e.value);
            let far = integrate(w, a, 0.5 * PI, t).map_or(f64::NAN, |e| e.value);
            2.0 * c * (near + far)
        }
    }
}

/// h₁(r) = ∫_R (y²/r² ∧ 1) ν₁(y) dy, written as a radial integral against
/// the spherical average of (x₁²/r² ∧ 1). Satisfies h₁ ≤ h ≤ d·h₁.
pub fn pruitt_h1(nu: &UnimodalLevyDensity, r: f64) -> Result<Estimate> {
    check_radius(r)?;
    let d = nu.dimension();
    if d == 1 {
        return pruitt_h(nu, r);
    }
    let omega = sphere_area(d);
    let inner = nu.radial_integral(|s| s * s / (r * r * d as f64), 0.0, r, tol())?;
    let outer = nu.radial_integral(|s| sphere_average_min(d, s / r), r, f64::INFINITY, tol())?;
    Ok((inner + outer).scale(omega))
}

/// L(r) = ν(B_rᶜ).
pub fn tail_mass_l(nu: &UnimodalLevyDensity, r: f64) -> Result<Estimate> {
    check_radius(r)?;
    nu.tail_mass(r, tol())
}

pub fn concentration(nu: &UnimodalLevyDensity, r: f64) -> Result<ConcentrationTriple> {
    Ok(ConcentrationTriple {
        r,
        h: pruitt_h(nu, r)?,
        h1: pruitt_h1(nu, r)?,
        tail: tail_mass_l(nu, r)?,
    })
}

/// ν(r) = ∫₀^∞ (4πt)^{−d/2} e^{−r²/(4t)} μ(dt).
pub fn levy_density_from_subordinator(mu: &Measure, d: usize, r: f64) -> Result<Estimate> {
    check_radius(r)?;
    mu.subordinate(d, r)
}

/// The Lévy density of the subordinate Brownian motion with Laplace
/// exponent φ, carrying ψ(u) = φ(u²) as its known exponent.
pub fn subordinated_density(phi: &BernsteinFunction, d: usize) -> Result<UnimodalLevyDensity> {
    if phi.drift() != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "{} has a drift; its subordinate Brownian motion has a Gaussian part",
            phi.label()
        )));
    }
    let mu = phi.measure().clone();
    let profile = move |r: f64| {
        mu.subordinate(d, r)
            .unwrap_or(Estimate::new(f64::NAN, f64::NAN))
    };
    let nu = UnimodalLevyDensity::new(d, format!("ν of {} in d={d}", phi.label()), profile)?;
    Ok(nu.with_exponent(exponent_from_bernstein(phi, d)))
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "radius must be positive and finite, got {r}"
        )))
    }
}
