use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{
    integrate_points, oscillatory, Estimate, Kernel, OscillatoryOptions, Tolerance,
};
use crate::special::sphere_area;

use super::levy::{LevyExponent, Provenance};

pub(crate) type ProfileFn = Arc<dyn Fn(f64) -> Estimate + Send + Sync>;
type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radial, nonincreasing Lévy density ν on ℝᵈ.
#[derive(Clone)]
pub struct UnimodalLevyDensity {
    d: usize,
    label: String,
    profile: ProfileFn,
    cutoff: Option<f64>,
    base: Option<Arc<UnimodalLevyDensity>>,
    tail_mass: Option<RealFn>,
    exponent: Option<LevyExponent>,
    scale: f64,
    witness: f64,
}

impl fmt::Debug for UnimodalLevyDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnimodalLevyDensity")
            .field("d", &self.d)
            .field("label", &self.label)
            .field("cutoff", &self.cutoff)
            .field("witness", &self.witness)
            .finish()
    }
}

impl UnimodalLevyDensity {
    /// Wrap a profile r ↦ ν(r). `scale` is a characteristic radius used to
    /// place quadrature breakpoints (1 is fine for most profiles).
    ///
    /// Fails if ν is not a Lévy density: negative, increasing on a probe
    /// grid, or with ∫(r²∧1)ν(dx) infinite.
    pub fn new<F>(d: usize, label: impl Into<String>, profile: F) -> Result<Self>
    where
        F: Fn(f64) -> Estimate + Send + Sync + 'static,
    {
        Self::from_parts(d, label.into(), Arc::new(profile), None, None, None)
    }

    /// Profile without error information.
    pub fn from_fn<F>(d: usize, label: impl Into<String>, profile: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(d, label, move |r| Estimate::exact(profile(r)))
    }

    pub(crate) fn from_parts(
        d: usize,
        label: String,
        profile: ProfileFn,
        cutoff: Option<f64>,
        base: Option<Arc<UnimodalLevyDensity>>,
        tail_mass: Option<RealFn>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let mut nu = UnimodalLevyDensity {
            d,
            label,
            profile,
            cutoff,
            base,
            tail_mass,
            exponent: None,
            scale: 1.0,
            witness: f64::NAN,
        };
        nu.check_monotone()?;
        nu.witness = nu.compute_witness()?;
        Ok(nu)
    }

    /// Closed-form tail mass L(r) = ν(B_rᶜ).
    pub fn with_tail_mass<F: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, l: F) -> Self {
        self.tail_mass = Some(Arc::new(l));
        self
    }

    /// Known characteristic exponent of this ν (used to speed up truncations).
    pub fn with_exponent(mut self, psi: LevyExponent) -> Self {
        self.exponent = Some(psi);
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// ν·1_{B_R}: the Lévy density cut to the ball of radius R.
    pub fn truncate(&self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cutoff radius {radius} must be positive"
            )));
        }
        let base = Arc::new(self.clone());
        let p = self.profile.clone();
        let profile: ProfileFn =
            Arc::new(move |r: f64| if r < radius { p(r) } else { Estimate::ZERO });
        let mut out = Self::from_parts(
            self.d,
            format!("{} cut at {}", self.label, radius),
            profile,
            Some(radius),
            Some(base),
            None,
        )?;
        out.scale = self.scale;
        Ok(out)
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Numeric value of ∫(r²∧1)ν(r)ω_d r^{d−1}dr.
    pub fn integrability_witness(&self) -> f64 {
        self.witness
    }

    pub fn known_exponent(&self) -> Option<&LevyExponent> {
        self.exponent.as_ref()
    }

    /// ν(r) for r > 0.
    pub fn eval(&self, r: f64) -> Estimate {
        if let Some(c) = self.cutoff {
            if r >= c {
                return Estimate::ZERO;
            }
        }
        (self.profile)(r)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).value
    }

    pub(crate) fn has_closed_tail(&self) -> bool {
        self.tail_mass.is_some()
    }

    /// Breakpoints of a radial integral over [a, b] (b may be ∞).
    pub(crate) fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = vec![a];
        let mut marks = vec![self.scale];
        if let Some(c) = self.cutoff {
            marks.push(c);
        }
        for m in [1e-6, 1e-3, 1.0, 1e3, 1e6] {
            marks.push(m * self.scale);
        }
        marks.sort_by(f64::total_cmp);
        for m in marks {
            if m > *pts.last().unwrap() && m < b {
                pts.push(m);
            }
        }
        pts.push(b);
        pts
    }

    /// ∫_a^b ν(r) r^{d-1} g(r) dr with breakpoints at the cutoff and scale marks.
    pub(crate) fn radial_integral<G: Fn(f64) -> f64>(
        &self,
        g: G,
        a: f64,
        b: f64,
        tol: Tolerance,
    ) -> Result<Estimate> {
        let b = match self.cutoff {
            Some(c) => b.min(c),
            None => b,
        };
        if !(b > a) {
            return Ok(Estimate::ZERO);
        }
        let dm1 = self.d as i32 - 1;
        // worst relative error of the profile itself, folded in at the end
        let rel = std::cell::Cell::new(0.0f64);
        let est = integrate_points(
            |r| {
                let v = self.eval(r);
                if v.value == 0.0 {
                    return 0.0;
                }
                if v.error > 0.0 {
                    rel.set(rel.get().max(v.error / v.value.abs()));
                }
                v.value * r.powi(dm1) * g(r)
            },
            &self.breakpoints(a, b),
            tol,
        )?;
        Ok(Estimate::new(
            est.value,
            est.error + rel.get() * est.value.abs(),
        ))
    }

    /// L(r) = ω_d ∫_r^∞ ν(s) s^{d−1} ds.
    pub fn tail_mass(&self, r: f64, tol: Tolerance) -> Result<Estimate> {
        if let Some(c) = self.cutoff {
            if r >= c {
                return Ok(Estimate::ZERO);
            }
        }
        if let Some(l) = &self.tail_mass {
            return Ok(Estimate::exact(l(r)));
        }
        let omega = sphere_area(self.d);
        if let (Some(c), Some(base)) = (self.cutoff, &self.base) {
            if base.has_closed_tail() {
                return Ok((base.tail_mass(r, tol)? - base.tail_mass(c, tol)?).max_zero());
            }
        }
        Ok(self
            .radial_integral(|_| 1.0, r, f64::INFINITY, tol)?
            .scale(omega))
    }

    fn check_monotone(&self) -> Result<()> {
        let top = self.cutoff.unwrap_or(f64::INFINITY);
        let mut prev = f64::INFINITY;
        for i in 0..=120 {
            let r = 10f64.powf(-6.0 + i as f64 * 0.1) * self.scale;
            if r >= top {
                break;
            }
            let v = self.eval(r);
            if !(v.value >= 0.0) || !v.value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "Lévy density is negative or non-finite at r={r}"
                )));
            }
            if v.value > prev * (1.0 + 1e-9) + v.error + 1e-300 {
                return Err(Error::InvalidParameter(format!(
                    "Lévy density increases near r={r}; unimodal densities are radially nonincreasing"
                )));
            }
            prev = v.value;
        }
        Ok(())
    }

    fn compute_witness(&self) -> Result<f64> {
        let tol = Tolerance::new(1e-300, 1e-8);
        let omega = sphere_area(self.d);
        let diverges =
            |e: Error| Error::InvalidParameter(format!("∫(|x|²∧1)ν(dx) does not converge: {e}"));
        let inner = self
            .radial_integral(|r| r * r, 0.0, 1.0, tol)
            .map_err(diverges)?;
        let outer = self.tail_mass(1.0, tol).map_err(diverges)?;
        let w = inner.scale(omega) + outer;
        if !w.value.is_finite() {
            return Err(Error::InvalidParameter("∫(|x|²∧1)ν(dx) is infinite".into()));
        }
        Ok(w.value)
    }
}

trait MaxZero {
    fn max_zero(self) -> Self;
}

impl MaxZero for Estimate {
    fn max_zero(self) -> Self {
        Estimate::new(self.value.max(0.0), self.error)
    }
}

/// 1 − Ω_d(z), where Ω_d is the spherical average of cos⟨ξ, x⟩ at |ξ||x| = z.
pub(crate) fn one_minus_omega(d: usize, z: f64) -> f64 {
    match d {
        1 => 2.0 * (0.5 * z).sin().powi(2),
        2 => {
            if z < 1e-3 {
                let z2 = z * z;
                z2 / 4.0 - z2 * z2 / 64.0
            } else {
                1.0 - crate::special::bessel_j0(z)
            }
        }
        3 => {
            if z < 1e-3 {
                let z2 = z * z;
                z2 / 6.0 - z2 * z2 / 120.0
            } else {
                1.0 - z.sin() / z
            }
        }
        _ => panic!("radial kernel only for d ≤ 3"),
    }
}

fn radial_kernel(d: usize) -> Kernel {
    match d {
        1 => Kernel::Cos,
        2 => Kernel::J0,
        _ => Kernel::Sin,
    }
}

// zero-to-zero segments integrated directly before switching strategies
const NEAR_ZEROS: usize = 4;
const DIRECT_ZEROS: usize = 60;

fn psi_tolerance() -> Tolerance {
    Tolerance::new(1e-300, 1e-11).with_budget(4000)
}

/// ∫_a^∞ Ω_d(u r) ν(r) r^{d−1} dr, ignoring any cutoff of ν.
fn oscillating_tail(nu: &UnimodalLevyDensity, u: f64, a: f64, floor: f64) -> Result<Estimate> {
    let d = nu.d;
    let p = nu.profile.clone();
    let amp = move |r: f64| {
        let v = p(r).value;
        match d {
            1 => v,
            2 => v * r,
            _ => v * r / u,
        }
    };
    // the tail is subtracted from a mass of size `floor`; resolve it relative to that
    let mut tol = psi_tolerance();
    tol.abs = tol.abs.max(1e-15 * floor);
    let opts = OscillatoryOptions {
        tol,
        ..Default::default()
    };
    oscillatory(amp, radial_kernel(d), u, a, f64::INFINITY, opts)
}

/// ω_d ∫_a^b (1 − Ω_d(u r)) ν(r) r^{d−1} dr over a range holding few kernel zeros.
fn direct_part(nu: &UnimodalLevyDensity, u: f64, a: f64, b: f64) -> Result<Estimate> {
    let d = nu.d;
    let kernel = radial_kernel(d);
    let mut pts = nu.breakpoints(a, b);
    let mut k = 1;
    loop {
        let z = kernel.zero(k) / u;
        if z >= b {
            break;
        }
        if z > a {
            pts.push(z);
        }
        k += 1;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let dm1 = d as i32 - 1;
    let est = integrate_points(
        |r| {
            let v = nu.value(r);
            if v == 0.0 {
                0.0
            } else {
                one_minus_omega(d, u * r) * v * r.powi(dm1)
            }
        },
        &pts,
        psi_tolerance(),
    )?;
    Ok(est.scale(sphere_area(d)))
}

/// ω_d ∫_a^∞ (1 − Ω_d(u r)) ν(r) r^{d−1} dr for an untruncated ν.
fn far_part(nu: &UnimodalLevyDensity, u: f64, a: f64) -> Result<Estimate> {
    let tail = nu.tail_mass(a, psi_tolerance())?;
    let osc = oscillating_tail(nu, u, a, tail.value / sphere_area(nu.d))?;
    Ok(tail - osc.scale(sphere_area(nu.d)))
}

pub(crate) fn psi_from_density(nu: &UnimodalLevyDensity, u: f64) -> Result<Estimate> {
    if u == 0.0 {
        return Ok(Estimate::ZERO);
    }
    if nu.d >= 4 {
        let nu1 = crate::radial_calculus::project_1d(nu)?;
        return psi_from_density(&nu1, u);
    }
    let kernel = radial_kernel(nu.d);
    let rc = kernel.zero(NEAR_ZEROS) / u;
    match nu.cutoff {
        None => Ok(direct_part(nu, u, 0.0, rc)? + far_part(nu, u, rc)?),
        Some(big_r) => {
            if big_r <= kernel.zero(DIRECT_ZEROS) / u {
                return direct_part(nu, u, 0.0, big_r);
            }
            // without the untruncated profile, integrate zero to zero up to the cutoff
            let Some(base) = nu.base.as_ref() else {
                return direct_part(nu, u, 0.0, big_r);
            };
            let cut_part = far_part(base, u, big_r)?;
            let whole = match &base.exponent {
                Some(psi) => psi.evaluate(u)?,
                None => psi_from_density(base, u)?,
            };
            Ok(whole - cut_part)
        }
    }
}

/// ψ(u) = ∫(1 − cos⟨ξ,x⟩)ν(dx) computed from the radial Lévy density.
///
/// Every evaluation carries a quadrature error estimate; evaluations fail
/// with a quadrature error when the oscillatory tail does not converge.
pub fn exponent_from_density(nu: &UnimodalLevyDensity) -> LevyExponent {
    let nu = Arc::new(nu.clone());
    let label = format!("ψ from {}", nu.label);
    let d = nu.d;
    LevyExponent::new(d, label, Provenance::FromLevyDensity, move |u| {
        psi_from_density(&nu, u)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cauchy_like() -> UnimodalLevyDensity {
        UnimodalLevyDensity::from_fn(1, "r^-2", |r: f64| r.powi(-2)).unwrap()
    }

    #[test]
    fn inverse_square_gives_pi() {
        let psi = exponent_from_density(&cauchy_like());
        let e = psi.evaluate(1.0).unwrap();
        assert!((e.value - PI).abs() < 1e-9, "{e:?}");
        assert_eq!(psi.psi(0.0), 0.0);
        for &u in &[1e-4, 0.3, 17.0, 1e4] {
            let v = psi.psi(u);
            assert!((v - PI * u).abs() < 1e-8 * PI * u, "u={u} v={v}");
        }
    }

    #[test]
    fn witness_and_tail() {
        let nu = cauchy_like();
        assert!((nu.integrability_witness() - 4.0).abs() < 1e-7);
        let l = nu.tail_mass(1.0, Tolerance::default()).unwrap();
        assert!((l.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_levy_profiles() {
        assert!(UnimodalLevyDensity::from_fn(1, "r^-3", |r: f64| r.powi(-3)).is_err());
        assert!(UnimodalLevyDensity::from_fn(1, "increasing", |r: f64| r).is_err());
    }

    #[test]
    fn truncated_inverse_square_stays_close() {
        let nu = cauchy_like();
        let cut = nu.truncate(1.0).unwrap();
        let full = exponent_from_density(&nu);
        let trunc = exponent_from_density(&cut);
        // the difference is bounded by twice the removed mass
        let removed = nu.tail_mass(1.0, Tolerance::default()).unwrap().value;
        for &u in &[0.01, 0.5, 3.0, 40.0, 1e3, 1e6] {
            let (a, b) = (full.psi(u), trunc.psi(u));
            assert!(b > 0.0 && b <= a + 1e-9 * a, "u={u}: {a} {b}");
            assert!(a - b <= 2.0 * removed + 1e-9 * a, "u={u}: {a} {b}");
        }
        assert!((trunc.psi(1e6) / (PI * 1e6) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn three_dimensional_stable_profile() {
        // 1-stable Lévy density in d=3: Γ(2)/(π² ... ) normalised so that ψ(u) = u
        let c = 1.0 / (PI * PI);
        let nu = UnimodalLevyDensity::from_fn(3, "cauchy3", move |r: f64| c * r.powi(-4)).unwrap();
        let psi = exponent_from_density(&nu);
        for &u in &[0.1, 1.0, 50.0] {
            let v = psi.evaluate(u).unwrap();
            assert!((v.value - u).abs() < 1e-8 * u, "u={u} {v:?}");
        }
    }

    #[test]
    fn two_dimensional_stable_profile() {
        // α=1, d=2: c = α 2^{α−1} Γ((d+α)/2) / (π^{d/2} Γ(1−α/2))
        let g = crate::special::gamma;
        let c = g(1.5) / (PI * g(0.5));
        let nu = UnimodalLevyDensity::from_fn(2, "cauchy2", move |r: f64| c * r.powi(-3)).unwrap();
        let psi = exponent_from_density(&nu);
        for &u in &[0.2, 1.0, 30.0] {
            let v = psi.evaluate(u).unwrap();
            assert!((v.value - u).abs() < 1e-7 * u, "u={u} {v:?}");
        }
    }
}
