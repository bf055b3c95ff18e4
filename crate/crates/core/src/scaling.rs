//! Weak lower and upper scaling conditions.
//!
//! φ ∈ WLSC(α, θ, c) when φ(λx) ≥ c λ^α φ(x) for all λ ≥ 1, x > θ, and
//! φ ∈ WUSC(α, θ, C) when φ(λx) ≤ C λ^α φ(x). With κ(x) = φ(x)x^{−α} the
//! best constants are inf/sup of κ(y)/κ(x) over x ≤ y, which is what the
//! certifier computes on a logarithmic grid. Certificates are grid evidence,
//! not proofs.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed when re-validating a certificate on a grid.
pub const VALIDATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lower,
    Upper,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Lower => "lower",
            Direction::Upper => "upper",
        })
    }
}

/// A logarithmic grid of `points` nodes on [lo, hi]. Only nodes above the
/// threshold of a condition take part in it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lo: 1e-4,
            hi: 1e4,
            points: 512,
        }
    }
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        GridSpec { lo, hi, points }
    }

    pub fn nodes(&self) -> Vec<f64> {
        if self.points < 2 {
            return vec![self.lo];
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        let n = self.points - 1;
        (0..=n)
            .map(|i| (a + (b - a) * i as f64 / n as f64).exp())
            .collect()
    }

    /// Nodes strictly above θ.
    pub fn nodes_above(&self, theta: f64) -> Vec<f64> {
        self.nodes().into_iter().filter(|&x| x > theta).collect()
    }
}

/// One witness pair: φ(λθ′)/(λ^α φ(θ′)) = ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub theta: f64,
    pub lambda: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCertificate {
    pub direction: Direction,
    pub alpha: f64,
    pub theta: f64,
    pub constant: f64,
    /// Largest relative violation of the stated constant on the grid; ≤ 0
    /// (up to rounding) for a valid certificate.
    pub worst_violation: f64,
    pub grid_spec: GridSpec,
    /// For each grid node y, the pair (x ≤ y) with the extreme ratio.
    #[serde(skip)]
    pub evidence: Vec<Evidence>,
    #[serde(skip)]
    pub valid: bool,
}

impl ScalingCertificate {
    fn degenerate(constant: f64) -> bool {
        !(constant > 1e-12 && constant < 1e12)
    }

    /// Err if the constant degenerated or the grid shows a violation.
    pub fn require_valid(&self) -> Result<&Self> {
        if Self::degenerate(self.constant) {
            return Err(Error::DegenerateCertificate(format!(
                "{} scaling with α={} above θ={} has constant {:e}",
                self.direction, self.alpha, self.theta, self.constant
            )));
        }
        if self.worst_violation > VALIDATION_TOLERANCE {
            return Err(Error::DegenerateCertificate(format!(
                "{} scaling with α={} violated by {:e} on the grid",
                self.direction, self.alpha, self.worst_violation
            )));
        }
        Ok(self)
    }

    /// c λ^α (lower) or C λ^α (upper): the bound on φ(λx)/φ(x).
    pub fn bound(&self, lambda: f64) -> f64 {
        self.constant * lambda.powf(self.alpha)
    }
}

fn sample<F: Fn(f64) -> f64 + Sync>(phi: &F, nodes: &[f64]) -> Result<Vec<f64>> {
    let vals: Vec<f64> = nodes.par_iter().map(|&x| phi(x)).collect();
    for (x, v) in nodes.iter().zip(&vals) {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositiveValues(format!(
                "function value {v} at {x}"
            )));
        }
    }
    Ok(vals)
}

/// Extreme of κ(y)/κ(x) over grid pairs x ≤ y, with the witness pair for each y.
/// Lower: the infimum (≤ 1). Upper: the supremum (≥ 1).
fn extreme_ratio(nodes: &[f64], vals: &[f64], alpha: f64, dir: Direction) -> (f64, Vec<Evidence>) {
    let kappa: Vec<f64> = nodes
        .iter()
        .zip(vals)
        .map(|(&x, &v)| v.ln() - alpha * x.ln())
        .collect();
    let mut best = 0.0f64; // log of the extreme ratio; x = y gives 0
    let mut anchor = 0usize;
    let mut evidence = Vec::with_capacity(nodes.len());
    for j in 0..nodes.len() {
        let better = match dir {
            Direction::Lower => kappa[j] > kappa[anchor],
            Direction::Upper => kappa[j] < kappa[anchor],
        };
        if better {
            anchor = j;
        }
        let r = kappa[j] - kappa[anchor];
        best = match dir {
            Direction::Lower => best.min(r),
            Direction::Upper => best.max(r),
        };
        evidence.push(Evidence {
            theta: nodes[anchor],
            lambda: nodes[j] / nodes[anchor],
            ratio: r.exp(),
        });
    }
    (best.exp(), evidence)
}

fn violation(extreme: f64, constant: f64, dir: Direction) -> f64 {
    match dir {
        Direction::Lower => constant / extreme - 1.0,
        Direction::Upper => extreme / constant - 1.0,
    }
}

/// The tightest grid-supported constant for φ ∈ W{L,U}SC(α, θ, ·).
pub fn certify<F: Fn(f64) -> f64 + Sync>(
    phi: &F,
    direction: Direction,
    alpha: f64,
    theta: f64,
    grid: GridSpec,
) -> Result<ScalingCertificate> {
    let nodes = grid.nodes_above(theta);
    if nodes.len() < 2 {
        return Err(Error::DegenerateGrid(format!(
            "fewer than two grid nodes above θ={theta}"
        )));
    }
    let vals = sample(phi, &nodes)?;
    let (constant, evidence) = extreme_ratio(&nodes, &vals, alpha, direction);
    let valid = !ScalingCertificate::degenerate(constant);
    Ok(ScalingCertificate {
        direction,
        alpha,
        theta,
        constant,
        worst_violation: violation(constant, constant, direction),
        grid_spec: grid,
        evidence,
        valid,
    })
}

/// Re-check a stated certificate for φ on a grid, filling in its worst
/// violation and evidence.
pub fn validate<F: Fn(f64) -> f64 + Sync>(
    phi: &F,
    mut cert: ScalingCertificate,
    grid: GridSpec,
) -> Result<ScalingCertificate> {
    let measured = certify(phi, cert.direction, cert.alpha, cert.theta, grid)?;
    cert.worst_violation = violation(measured.constant, cert.constant, cert.direction);
    cert.evidence = measured.evidence;
    cert.grid_spec = grid;
    cert.valid = !ScalingCertificate::degenerate(cert.constant)
        && cert.worst_violation <= VALIDATION_TOLERANCE;
    Ok(cert)
}

/// inf_{x≤y} φ(y)/φ(x) (lower: almost increasing, factor ≤ 1) or
/// sup_{x≤y} φ(y)/φ(x) (upper: almost decreasing, factor ≥ 1) on [a, b].
pub fn oscillation_factor<F: Fn(f64) -> f64 + Sync>(
    phi: &F,
    a: f64,
    b: f64,
    direction: Direction,
    points: usize,
) -> Result<f64> {
    if !(a > 0.0 && b > a) || points < 2 {
        return Err(Error::DegenerateGrid(format!("bad interval [{a}, {b}]")));
    }
    let nodes = GridSpec::new(a, b, points).nodes();
    let vals = sample(phi, &nodes)?;
    Ok(extreme_ratio(&nodes, &vals, 0.0, direction).0)
}

/// Extreme log-log chord slopes of φ over grid pairs x < y with y ≥ 2x,
/// as proxies for the Matuszewska indices.
pub fn estimate_indices<F: Fn(f64) -> f64 + Sync>(
    phi: &F,
    theta: f64,
    grid: GridSpec,
) -> Result<(f64, f64)> {
    let nodes = grid.nodes_above(theta);
    let vals = sample(phi, &nodes)?;
    let lx: Vec<f64> = nodes.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    let ln2 = 2f64.ln();
    let (lo, hi) = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for j in i + 1..nodes.len() {
                let dx = lx[j] - lx[i];
                if dx < ln2 - 1e-12 {
                    continue;
                }
                let s = (ly[j] - ly[i]) / dx;
                lo = lo.min(s);
                hi = hi.max(s);
            }
            (lo, hi)
        })
        .reduce(
            || (f64::INFINITY, f64::NEG_INFINITY),
            |a, b| (a.0.min(b.0), a.1.max(b.1)),
        );
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::DegenerateGrid(format!(
            "no grid pairs with ratio ≥ 2 above θ={theta}"
        )));
    }
    Ok((lo, hi))
}

/// Move a certificate to a smaller threshold θ₁ with the constant from the
/// monotone-gap argument:
/// lower c₁ = c (θ₁/θ)^{|α|} φ(θ₁)/φ(θ), upper C₁ = C (θ/θ₁)^{|α|} φ(θ)/φ(θ₁).
pub fn loosen_threshold<F: Fn(f64) -> f64 + Sync>(
    cert: &ScalingCertificate,
    phi: &F,
    theta1: f64,
    grid: GridSpec,
) -> Result<ScalingCertificate> {
    let theta = cert.theta;
    if theta1 == theta {
        return Ok(cert.clone());
    }
    if !(theta1 > 0.0 && theta1 < theta) {
        return Err(Error::PreconditionViolation(format!(
            "need 0 < θ₁ < θ, got θ₁={theta1}, θ={theta}"
        )));
    }
    let gap = GridSpec::new(theta1, theta, 257).nodes();
    let vals = sample(phi, &gap)?;
    if vals
        .windows(2)
        .any(|w| w[1] < w[0] * (1.0 - VALIDATION_TOLERANCE))
    {
        return Err(Error::PreconditionViolation(format!(
            "φ is not nondecreasing on [{theta1}, {theta}]"
        )));
    }
    let (p1, p) = (vals[0], vals[vals.len() - 1]);
    let a = cert.alpha.abs();
    let constant = match cert.direction {
        Direction::Lower => cert.constant * (theta1 / theta).powf(a) * p1 / p,
        Direction::Upper => cert.constant * (theta / theta1).powf(a) * p / p1,
    };
    let out = ScalingCertificate {
        theta: theta1,
        constant,
        ..cert.clone()
    };
    validate(phi, out, grid)
}

/// Scaling of the inverse of an increasing φ:
/// WLSC(α, θ, c) ↦ WUSC(1/α, φ(θ), c^{−1/α}) and
/// WUSC(α, θ, C) ↦ WLSC(1/α, φ(θ), C^{−1/α}).
/// `phi_theta` is φ(θ); the result is validated on `grid` against `inverse`.
pub fn inverse_scaling<G: Fn(f64) -> f64 + Sync>(
    cert: &ScalingCertificate,
    phi_theta: f64,
    inverse: &G,
    grid: GridSpec,
) -> Result<ScalingCertificate> {
    if !(cert.alpha > 0.0) {
        return Err(Error::PreconditionViolation(format!(
            "inverse scaling needs a positive exponent, got α={}",
            cert.alpha
        )));
    }
    let direction = match cert.direction {
        Direction::Lower => Direction::Upper,
        Direction::Upper => Direction::Lower,
    };
    let out = ScalingCertificate {
        direction,
        alpha: 1.0 / cert.alpha,
        theta: phi_theta,
        constant: cert.constant.powf(-1.0 / cert.alpha),
        ..cert.clone()
    };
    validate(inverse, out, grid)
}

/// WLSC(α, θ, c) of φ ↦ WUSC(−α, θ, 1/c) of 1/φ, and vice versa. An involution.
pub fn reciprocal_scaling(cert: &ScalingCertificate) -> ScalingCertificate {
    let direction = match cert.direction {
        Direction::Lower => Direction::Upper,
        Direction::Upper => Direction::Lower,
    };
    ScalingCertificate {
        direction,
        alpha: -cert.alpha,
        constant: 1.0 / cert.constant,
        ..cert.clone()
    }
}

/// From a global WLSC(α, 0, c) of ψ: ψ⁻ ∈ WLSC(1/2, 0, (c/π⁴)^{1/α}) ∩ WUSC(1/α, 0, (π³/c)^{2/α}).
/// Both are validated on `grid` against `psi_inverse`.
pub fn psi_inverse_scaling<G: Fn(f64) -> f64 + Sync>(
    cert: &ScalingCertificate,
    psi_inverse: &G,
    grid: GridSpec,
) -> Result<(ScalingCertificate, ScalingCertificate)> {
    if cert.direction != Direction::Lower || cert.theta != 0.0 {
        return Err(Error::PreconditionViolation(format!(
            "ψ⁻ scaling needs a global lower certificate, got {} with θ={}",
            cert.direction, cert.theta
        )));
    }
    if !(cert.alpha > 0.0 && cert.alpha <= 2.0) {
        return Err(Error::PreconditionViolation(format!(
            "need 0 < α ≤ 2, got {}",
            cert.alpha
        )));
    }
    let (a, c) = (cert.alpha, cert.constant);
    let base = ScalingCertificate {
        theta: 0.0,
        ..cert.clone()
    };
    let lower = ScalingCertificate {
        direction: Direction::Lower,
        alpha: 0.5,
        constant: (c / PI.powi(4)).powf(1.0 / a),
        ..base.clone()
    };
    let upper = ScalingCertificate {
        direction: Direction::Upper,
        alpha: 1.0 / a,
        constant: (PI.powi(3) / c).powf(2.0 / a),
        ..base
    };
    Ok((
        validate(psi_inverse, lower, grid)?,
        validate(psi_inverse, upper, grid)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_power_constants_are_one() {
        let f = |x: f64| x.powf(1.5);
        for dir in [Direction::Lower, Direction::Upper] {
            for theta in [0.0, 0.3, 10.0] {
                let c = certify(&f, dir, 1.5, theta, GridSpec::default()).unwrap();
                assert!((c.constant - 1.0).abs() < 1e-12, "{c:?}");
                assert!(c.valid);
            }
        }
    }

    #[test]
    fn oscillation_factor_of_wiggly_exponent() {
        let f = |x: f64| x + 3.0 * PI * (1.0 - x.sin() / x);
        let c = oscillation_factor(&f, 1.0, 20.0, Direction::Lower, 20_000).unwrap();
        assert!(c < 1.0 && c > 0.5, "{c}");
        assert_eq!(
            oscillation_factor(&|x: f64| x, 1.0, 10.0, Direction::Lower, 100).unwrap(),
            1.0
        );
        assert_eq!(
            oscillation_factor(&|_| 2.0, 1.0, 10.0, Direction::Upper, 100).unwrap(),
            1.0
        );
    }

    #[test]
    fn indices_of_power_and_kink() {
        let (lo, hi) = estimate_indices(&|x: f64| x.powf(1.5), 0.0, GridSpec::default()).unwrap();
        assert!((lo - 1.5).abs() < 1e-9 && (hi - 1.5).abs() < 1e-9);
        let (lo, hi) = estimate_indices(
            &|x: f64| x.powf(0.5).min(x.powf(1.5)),
            0.0,
            GridSpec::default(),
        )
        .unwrap();
        assert!(
            lo >= 0.5 - 1e-9 && lo < 0.6 && hi > 1.4 && hi <= 1.5 + 1e-9,
            "{lo} {hi}"
        );
        assert!(estimate_indices(&|x: f64| x, 0.0, GridSpec::new(1.0, 1.5, 10)).is_err());
    }

    #[test]
    fn rejects_nonpositive_values() {
        let r = certify(
            &|x: f64| x - 1.0,
            Direction::Lower,
            1.0,
            0.0,
            GridSpec::default(),
        );
        assert!(matches!(r, Err(Error::NonPositiveValues(_))));
    }

    #[test]
    fn reciprocal_is_an_involution() {
        let f = |x: f64| x.powf(0.7) * (2.0 + x.sin());
        let c = certify(&f, Direction::Lower, 0.5, 0.0, GridSpec::default()).unwrap();
        let r = reciprocal_scaling(&c);
        assert_eq!(r.direction, Direction::Upper);
        let checked = validate(&|x: f64| 1.0 / f(x), r.clone(), GridSpec::default()).unwrap();
        assert!(checked.worst_violation <= 1e-12);
        let back = reciprocal_scaling(&r);
        assert_eq!(back.direction, c.direction);
        assert_eq!(back.alpha, c.alpha);
        assert!((back.constant - c.constant).abs() < 1e-15 * c.constant);
    }

    #[test]
    fn loosening_gives_formula_and_validates() {
        let f = |x: f64| x.powf(1.2);
        let c = certify(&f, Direction::Lower, 1.2, 1.0, GridSpec::default()).unwrap();
        assert_eq!(
            loosen_threshold(&c, &f, 1.0, GridSpec::default()).unwrap(),
            c
        );
        let l = loosen_threshold(&c, &f, 0.1, GridSpec::default()).unwrap();
        assert!((l.constant - 0.1f64.powf(2.4)).abs() < 1e-12);
        assert!(l.valid && l.worst_violation <= 0.0);
        // the formula is conservative; the grid still measures 1 at θ₁
        let fresh = certify(&f, Direction::Lower, 1.2, 0.1, GridSpec::default()).unwrap();
        assert!((fresh.constant - 1.0).abs() < 1e-12);
        let dip = |x: f64| if x < 0.5 { 1.0 - x } else { x };
        assert!(loosen_threshold(&c, &dip, 0.1, GridSpec::default()).is_err());
    }

    #[test]
    fn inverse_of_power() {
        let f = |x: f64| x.powf(1.5);
        let c = certify(&f, Direction::Lower, 1.5, 0.0, GridSpec::default()).unwrap();
        let inv =
            inverse_scaling(&c, 0.0, &|v: f64| v.powf(1.0 / 1.5), GridSpec::default()).unwrap();
        assert_eq!(inv.direction, Direction::Upper);
        assert!((inv.alpha - 1.0 / 1.5).abs() < 1e-15 && (inv.constant - 1.0).abs() < 1e-12);
        assert!(inv.valid);
    }

    #[test]
    fn psi_inverse_boundary_constants() {
        let c = ScalingCertificate {
            direction: Direction::Lower,
            alpha: 2.0,
            theta: 0.0,
            constant: 1.0,
            worst_violation: 0.0,
            grid_spec: GridSpec::default(),
            evidence: Vec::new(),
            valid: true,
        };
        let (lo, up) = psi_inverse_scaling(&c, &|v: f64| v.sqrt(), GridSpec::default()).unwrap();
        assert!((lo.constant - PI.powi(-2)).abs() < 1e-15);
        assert!((up.constant - PI.powi(3)).abs() < 1e-12);
        assert!(lo.valid && up.valid);
        let bad = ScalingCertificate { theta: 1.0, ..c };
        assert!(psi_inverse_scaling(&bad, &|v: f64| v.sqrt(), GridSpec::default()).is_err());
    }
}
