use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_points, Estimate, Tolerance};
use crate::special::gamma;

use super::cantor::CantorMeasure;
use super::levy::{LevyExponent, Provenance};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Atoms (location, mass), optionally followed by an infinite family
/// indexed by k = first, first+1, … whose location and mass extend
/// smoothly to real k.
#[derive(Clone)]
pub struct AtomSeries {
    head: Vec<(f64, f64)>,
    tail: Option<SmoothAtoms>,
}

#[derive(Clone)]
struct SmoothAtoms {
    first: usize,
    location: RealFn,
    mass: RealFn,
}

/// Terms summed one by one before the Euler-Maclaurin tail takes over.
pub const ATOM_DIRECT_TERMS: usize = 500;

impl AtomSeries {
    pub fn finite(atoms: Vec<(f64, f64)>) -> Self {
        AtomSeries {
            head: atoms,
            tail: None,
        }
    }

    pub fn indexed<L, M>(first: usize, location: L, mass: M) -> Self
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
        M: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        AtomSeries {
            head: Vec::new(),
            tail: Some(SmoothAtoms {
                first,
                location: Arc::new(location),
                mass: Arc::new(mass),
            }),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    /// Σ g(s_k) m_k truncated after `terms` indexed atoms.
    pub fn truncated_sum<G: Fn(f64) -> f64>(&self, g: G, terms: usize) -> f64 {
        let mut s: f64 = self.head.iter().map(|&(x, m)| g(x) * m).sum();
        if let Some(t) = &self.tail {
            for k in t.first..t.first + terms {
                let k = k as f64;
                s += g((t.location)(k)) * (t.mass)(k);
            }
        }
        s
    }

    /// Σ g(s_k) m_k. The indexed part is summed directly for
    /// [`ATOM_DIRECT_TERMS`] terms; the rest by the midpoint Euler-Maclaurin
    /// formula Σ_{k≥K} F(k) ≈ ∫_{K−½}^∞ F + F′(K−½)/24. `scale` hints at the
    /// index where F changes behaviour.
    pub fn sum<G: Fn(f64) -> f64>(&self, g: G, scale: f64) -> Result<Estimate> {
        let mut total = Estimate::exact(self.head.iter().map(|&(x, m)| g(x) * m).sum());
        let Some(t) = &self.tail else {
            return Ok(total);
        };
        let f = |k: f64| {
            let m = (t.mass)(k);
            if m == 0.0 {
                0.0
            } else {
                g((t.location)(k)) * m
            }
        };
        let kk = t.first + ATOM_DIRECT_TERMS;
        let mut direct = 0.0;
        for k in t.first..kk {
            direct += f(k as f64);
        }
        total += Estimate::exact(direct);
        let start = kk as f64 - 0.5;
        let mut pts = vec![start];
        let top = (scale.abs() * 1e4).max(start * 1e6);
        let mut p = start * 100.0;
        while p < top {
            pts.push(p);
            p *= 100.0;
        }
        if scale > start && !pts.contains(&scale) {
            pts.push(scale);
            pts.sort_by(f64::total_cmp);
        }
        pts.push(f64::INFINITY);
        let integral = integrate_points(f, &pts, Tolerance::new(1e-300, 1e-12).with_budget(4000))?;
        let h = 1e-3 * start;
        let fp = (f(start + h) - f(start - h)) / (2.0 * h);
        total += integral;
        // next Euler-Maclaurin term is 7F‴/5760; bound it by |F′|/K² for power-like F
        total += Estimate::new(fp / 24.0, fp.abs() / (start * start) + 1e-6 * fp.abs());
        Ok(total)
    }
}

/// Representation of the Lévy measure μ of a Bernstein function.
#[derive(Clone)]
pub enum Measure {
    /// No jumps (pure drift).
    Zero,
    /// Absolutely continuous μ(ds) = m(s)ds, given by its density, its tail
    /// μ̄(s) = μ(s,∞), or both. `scale` marks where μ changes behaviour.
    Density {
        density: Option<RealFn>,
        tail: Option<RealFn>,
        scale: f64,
    },
    Atoms(AtomSeries),
    /// Singular continuous μ(ds) = s^{−γ}F(ds) with F the Cantor measure.
    Cantor(Arc<CantorMeasure>),
}

impl fmt::Debug for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Zero => f.write_str("Zero"),
            Measure::Density { scale, tail, .. } => {
                write!(f, "Density {{ scale: {scale}, tail: {} }}", tail.is_some())
            }
            Measure::Atoms(a) => write!(f, "Atoms {{ finite: {} }}", a.is_finite()),
            Measure::Cantor(c) => write!(f, "Cantor {{ alpha: {} }}", c.alpha()),
        }
    }
}

impl Measure {
    /// ∫(1 − e^{−λs})μ(ds), computed from the measure alone.
    pub fn laplace_exponent(&self, lambda: f64) -> Result<Estimate> {
        if lambda <= 0.0 {
            return Ok(Estimate::ZERO);
        }
        let tol = Tolerance::new(1e-300, 1e-11).with_budget(4000);
        match self {
            Measure::Zero => Ok(Estimate::ZERO),
            Measure::Density {
                density,
                tail,
                scale,
            } => {
                let knee = 1.0 / lambda;
                let pts = breakpoints(&[knee, 10.0 * knee, 100.0 * knee, 1e3 * knee, *scale]);
                match (tail, density) {
                    // λ ∫ e^{−λs} μ̄(s) ds avoids the cancellation in 1 − e^{−λs}
                    (Some(tail), _) => {
                        Ok(
                            integrate_points(|s| (-lambda * s).exp() * tail(s), &pts, tol)?
                                .scale(lambda),
                        )
                    }
                    (None, Some(density)) => {
                        integrate_points(|s| -(-lambda * s).exp_m1() * density(s), &pts, tol)
                    }
                    (None, None) => Err(Error::InvalidParameter(
                        "density measure without density or tail".into(),
                    )),
                }
            }
            Measure::Atoms(a) => a.sum(|s| -(-lambda * s).exp_m1(), lambda),
            Measure::Cantor(c) => Ok(c.laplace_exponent_direct(lambda)),
        }
    }

    /// ∫ k(s) μ(ds) for the Gaussian kernel k(s) = (4πs)^{−d/2} e^{−r²/(4s)}:
    /// the Lévy density at radius r of the subordinate Brownian motion.
    pub fn subordinate(&self, d: usize, r: f64) -> Result<Estimate> {
        let dd = d as f64;
        let r2 = r * r;
        let k = move |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let e = -r2 / (4.0 * s);
            if e < -745.0 {
                0.0
            } else {
                (4.0 * std::f64::consts::PI * s).powf(-0.5 * dd) * e.exp()
            }
        };
        let tol = Tolerance::new(1e-300, 1e-10).with_budget(4000);
        let peak = r2 / (2.0 * dd);
        match self {
            Measure::Zero => Ok(Estimate::ZERO),
            Measure::Density {
                density,
                tail,
                scale,
            } => {
                let pts = breakpoints(&[peak / 50.0, peak, peak * 50.0, *scale]);
                match (tail, density) {
                    (Some(tail), _) => {
                        // integrate by parts: ∫ μ̄(s) ∂ₛk(s) ds
                        let dk = |s: f64| {
                            let v = k(s);
                            if v == 0.0 {
                                0.0
                            } else {
                                v * (r2 / (4.0 * s * s) - 0.5 * dd / s)
                            }
                        };
                        integrate_points(|s| tail(s) * dk(s), &pts, tol)
                    }
                    (None, Some(density)) => integrate_points(|s| k(s) * density(s), &pts, tol),
                    (None, None) => Err(Error::InvalidParameter(
                        "density measure without density or tail".into(),
                    )),
                }
            }
            Measure::Atoms(a) => a.sum(k, 4.0 / r2.max(1e-300)),
            Measure::Cantor(c) => Ok(c.subordinate(d, r)),
        }
    }
}

/// Sorted breakpoints 0 < … < ∞ for integrals over (0, ∞).
fn breakpoints(marks: &[f64]) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut m: Vec<f64> = marks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > 0.0)
        .collect();
    m.sort_by(f64::total_cmp);
    m.dedup();
    pts.extend(m);
    pts.push(f64::INFINITY);
    pts
}

/// Laplace exponent φ of a subordinator, φ(λ) = bλ + ∫(1 − e^{−λs})μ(ds).
#[derive(Clone)]
pub struct BernsteinFunction {
    label: String,
    phi: Arc<dyn Fn(f64) -> Estimate + Send + Sync>,
    drift: f64,
    measure: Measure,
}

impl fmt::Debug for BernsteinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BernsteinFunction")
            .field("label", &self.label)
            .field("drift", &self.drift)
            .field("measure", &self.measure)
            .finish()
    }
}

impl BernsteinFunction {
    /// φ given by a closed-form (or otherwise evaluated) expression together
    /// with its measure.
    pub fn new<F>(label: impl Into<String>, phi: F, drift: f64, measure: Measure) -> Self
    where
        F: Fn(f64) -> Estimate + Send + Sync + 'static,
    {
        BernsteinFunction {
            label: label.into(),
            phi: Arc::new(phi),
            drift,
            measure,
        }
    }

    /// φ computed from the measure by quadrature or summation.
    pub fn from_measure(label: impl Into<String>, drift: f64, measure: Measure) -> Self {
        let m = measure.clone();
        let phi = move |lambda: f64| {
            let jump = m
                .laplace_exponent(lambda)
                .unwrap_or(Estimate::new(f64::NAN, f64::NAN));
            jump + Estimate::exact(drift * lambda)
        };
        Self::new(label, phi, drift, measure)
    }

    /// φ(λ) = λ^a. For 0 < a < 1 the measure is a s^{−1−a}/Γ(1−a) ds;
    /// a = 1 is the pure drift.
    pub fn power(a: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "power Bernstein function needs 0 < a ≤ 1, got {a}"
            )));
        }
        if a == 1.0 {
            return Ok(Self::new("λ", Estimate::exact, 1.0, Measure::Zero));
        }
        let g = gamma(1.0 - a);
        let measure = Measure::Density {
            density: Some(Arc::new(move |s: f64| a * s.powf(-1.0 - a) / g)),
            tail: Some(Arc::new(move |s: f64| s.powf(-a) / g)),
            scale: 1.0,
        };
        Ok(Self::new(
            format!("λ^{a}"),
            move |l: f64| Estimate::exact(l.powf(a)),
            0.0,
            measure,
        ))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn eval(&self, lambda: f64) -> Estimate {
        if lambda <= 0.0 {
            return Estimate::ZERO;
        }
        (self.phi)(lambda)
    }

    pub fn value(&self, lambda: f64) -> f64 {
        self.eval(lambda).value
    }

    /// φ′(λ) by a central difference on the log scale.
    pub fn derivative(&self, lambda: f64) -> Estimate {
        let h: f64 = 1e-5;
        let (a, b) = (lambda * (-h).exp(), lambda * h.exp());
        let (fa, fb) = (self.eval(a), self.eval(b));
        let v = (fb.value - fa.value) / (b - a);
        let err = (fa.error + fb.error) / (b - a) + 1e-9 * v.abs();
        Estimate::new(v, err)
    }
}

/// ψ(u) = φ(u²): the exponent of Brownian motion subordinated by φ.
pub fn exponent_from_bernstein(phi: &BernsteinFunction, d: usize) -> LevyExponent {
    let f = phi.clone();
    let pure_jump = phi.drift == 0.0;
    LevyExponent::new(
        d,
        format!("{}(u²)", phi.label),
        Provenance::FromBernstein,
        move |u| Ok(f.eval(u * u)),
    )
    .assume_monotone()
    .with_pure_jump(pure_jump)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn half_power_gives_identity() {
        let phi = BernsteinFunction::power(0.5).unwrap();
        let psi = exponent_from_bernstein(&phi, 1);
        assert!((psi.psi(3.7) - 3.7).abs() < 1e-14);
        assert_eq!(psi.provenance(), Provenance::FromBernstein);
        assert!(psi.is_pure_jump());
    }

    #[test]
    fn drift_is_not_pure_jump() {
        let phi = BernsteinFunction::power(1.0).unwrap();
        let psi = exponent_from_bernstein(&phi, 3);
        assert!((psi.psi(2.0) - 4.0).abs() < 1e-15);
        assert!(!psi.is_pure_jump());
    }

    #[test]
    fn power_measure_matches_closed_form() {
        let phi = BernsteinFunction::power(0.5).unwrap();
        for &l in &[1e-4, 0.3, 2.0, 1e5] {
            let m = phi.measure().laplace_exponent(l).unwrap();
            assert!((m.value - l.sqrt()).abs() < 1e-9 * l.sqrt(), "λ={l} {m:?}");
        }
    }

    #[test]
    fn stable_subordinator_gives_cauchy_density() {
        // α=1 in d=1: ν(r) = 1/(π r²)
        let phi = BernsteinFunction::power(0.5).unwrap();
        for &r in &[0.01, 1.0, 30.0] {
            let v = phi.measure().subordinate(1, r).unwrap();
            let want = 1.0 / (PI * r * r);
            assert!((v.value - want).abs() < 1e-9 * want, "r={r} {v:?}");
        }
    }

    #[test]
    fn single_atom_is_gaussian() {
        let m = Measure::Atoms(AtomSeries::finite(vec![(1.0, 1.0)]));
        let v = m.subordinate(1, 1.3).unwrap().value;
        let want = (4.0 * PI).powf(-0.5) * (-1.69f64 / 4.0).exp();
        assert!((v - want).abs() < 1e-15);
    }

    #[test]
    fn euler_maclaurin_tail_matches_long_sum() {
        // Σ_{k≥1} k^{-2} = π²/6
        let a = AtomSeries::indexed(1, |k: f64| k, |k: f64| k.powi(-2));
        let s = a.sum(|_| 1.0, 1.0).unwrap();
        assert!((s.value - PI * PI / 6.0).abs() < 1e-12, "{s:?}");
        let long = a.truncated_sum(|_| 1.0, 2_000_000);
        assert!((s.value - long).abs() < 1e-6);
    }
}
