//! Two-sided envelopes C·min{[ψ⁻(1/t)]^d, tψ*(1/r)/r^d} for p_t, the
//! matching bounds for ν, and the tail bounds they are built from.

use std::f64::consts::{E, PI};
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::LevyExponent;
use crate::scaling::{Direction, ScalingCertificate};
use crate::special::sphere_area;

use super::ledger::{envelope_constants, upper_constants, ConstantLedger};

/// Envelope for the transition density of a unimodal process with
/// scaling exponent ψ.
#[derive(Debug, Clone)]
pub struct BoundEnvelope {
    exponent: LevyExponent,
    lower_cert: ScalingCertificate,
    upper_cert: Option<ScalingCertificate>,
    ledger: ConstantLedger,
    theta: f64,
    star_theta: OnceLock<f64>,
    star_theta_r0: OnceLock<f64>,
}

/// Envelope values at one (t, r).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopePoint {
    pub t: f64,
    pub r: f64,
    /// [ψ⁻(1/t)]^d
    pub diagonal: f64,
    /// tψ*(1/r)/r^d (∞ at r = 0)
    pub off_diagonal: f64,
    pub upper: f64,
    pub upper_valid: bool,
    pub lower: Option<f64>,
    pub lower_valid: bool,
}

fn check_certificate(cert: &ScalingCertificate, want: Direction) -> Result<()> {
    if cert.direction != want {
        return Err(Error::PreconditionViolation(format!(
            "expected a {want} scaling certificate, got {}",
            cert.direction
        )));
    }
    cert.require_valid()?;
    Ok(())
}

/// Envelope for p_t from WLSC (mandatory) and WUSC (needed for the lower
/// bound) certificates of ψ.
pub fn density_envelope(
    exponent: &LevyExponent,
    lower: Option<&ScalingCertificate>,
    upper: Option<&ScalingCertificate>,
) -> Result<BoundEnvelope> {
    let lower = lower.ok_or_else(|| {
        Error::MissingCertificate(format!(
            "the upper density bound for {} needs a WLSC certificate",
            exponent.label()
        ))
    })?;
    check_certificate(lower, Direction::Lower)?;
    let d = exponent.dimension();
    let ledger = match upper {
        Some(u) => {
            check_certificate(u, Direction::Upper)?;
            envelope_constants(d, lower.alpha, lower.constant, u.alpha, u.constant)?
        }
        None => upper_constants(d, lower.alpha, lower.constant)?,
    };
    let theta = upper.map_or(lower.theta, |u| u.theta.max(lower.theta));
    Ok(BoundEnvelope {
        exponent: exponent.clone(),
        lower_cert: lower.clone(),
        upper_cert: upper.cloned(),
        ledger,
        theta,
        star_theta: OnceLock::new(),
        star_theta_r0: OnceLock::new(),
    })
}

impl BoundEnvelope {
    pub fn exponent(&self) -> &LevyExponent {
        &self.exponent
    }

    pub fn ledger(&self) -> &ConstantLedger {
        &self.ledger
    }

    pub fn lower_certificate(&self) -> &ScalingCertificate {
        &self.lower_cert
    }

    pub fn upper_certificate(&self) -> Option<&ScalingCertificate> {
        self.upper_cert.as_ref()
    }

    /// Common threshold of both scalings.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn dim(&self) -> i32 {
        self.exponent.dimension() as i32
    }

    /// [ψ⁻(1/t)]^d.
    pub fn diagonal(&self, t: f64) -> f64 {
        self.exponent.inverse(1.0 / t).powi(self.dim())
    }

    /// tψ*(1/r)/r^d.
    pub fn off_diagonal(&self, t: f64, r: f64) -> f64 {
        if r == 0.0 {
            return f64::INFINITY;
        }
        t * self.exponent.star(1.0 / r) / r.powi(self.dim())
    }

    pub fn functional(&self, t: f64, r: f64) -> f64 {
        self.diagonal(t).min(self.off_diagonal(t, r))
    }

    /// tψ*(θ) < 1/π², with θ the WLSC threshold.
    pub fn upper_valid(&self, t: f64) -> bool {
        let theta = self.lower_cert.theta;
        if theta == 0.0 {
            return t > 0.0;
        }
        let s = *self.star_theta.get_or_init(|| self.exponent.star(theta));
        t > 0.0 && t * s < 1.0 / (PI * PI)
    }

    /// tψ*(θ/r₀) < 1 and r < r₀/θ; false when no WUSC certificate was given.
    pub fn lower_valid(&self, t: f64, r: f64) -> bool {
        let Some(low) = self.ledger.lower else {
            return false;
        };
        if !(t > 0.0) {
            return false;
        }
        if self.theta == 0.0 {
            return r.is_finite();
        }
        let s = *self
            .star_theta_r0
            .get_or_init(|| self.exponent.star(self.theta / low.r0));
        t * s < 1.0 && r < low.r0 / self.theta
    }

    pub fn upper(&self, t: f64, r: f64) -> f64 {
        self.ledger.c_star_upper * self.functional(t, r)
    }

    pub fn lower(&self, t: f64, r: f64) -> Result<f64> {
        match self.ledger.c_star() {
            Some(c) => Ok(c * self.functional(t, r)),
            None => Err(Error::MissingCertificate(format!(
                "the lower density bound for {} needs a WUSC certificate",
                self.exponent.label()
            ))),
        }
    }

    pub fn evaluate(&self, t: f64, r: f64) -> EnvelopePoint {
        let diagonal = self.diagonal(t);
        let off_diagonal = self.off_diagonal(t, r);
        let f = diagonal.min(off_diagonal);
        EnvelopePoint {
            t,
            r,
            diagonal,
            off_diagonal,
            upper: self.ledger.c_star_upper * f,
            upper_valid: self.upper_valid(t),
            lower: self.ledger.c_star().map(|c| c * f),
            lower_valid: self.lower_valid(t, r),
        }
    }

    /// ψ*(1/r)/r^d.
    fn nu_functional(&self, r: f64) -> f64 {
        self.exponent.star(1.0 / r) / r.powi(self.dim())
    }

    /// ν(r) ≤ C_off ψ*(1/r)/r^d, valid for every r > 0.
    pub fn nu_upper(&self, r: f64) -> f64 {
        self.ledger.c_off * self.nu_functional(r)
    }

    pub fn nu_lower(&self, r: f64) -> Result<f64> {
        match self.ledger.c_star() {
            Some(c) => Ok(c * self.nu_functional(r)),
            None => Err(Error::MissingCertificate(format!(
                "the lower bound for ν of {} needs a WUSC certificate",
                self.exponent.label()
            ))),
        }
    }

    /// r < r₀/θ.
    pub fn nu_lower_valid(&self, r: f64) -> bool {
        match self.ledger.lower {
            Some(low) => r > 0.0 && (self.theta == 0.0 || r < low.r0 / self.theta),
            None => false,
        }
    }

    /// Bound K with K⁻¹ ≤ p_{2t}(x)/p_t(x), p_t(2x)/p_t(x) ≤ K for global scalings.
    ///
    /// The envelope functional F changes by at most a factor
    /// (C_u 2^{1/λ̲})^d in t (C_u = (π³/c̲)^{2/λ̲}, upper scaling of ψ⁻)
    /// and 2^{d+ᾱ}π²C̄ in r; the envelopes add C*/c*.
    pub fn doubling_constant(&self) -> Result<f64> {
        let low = self.ledger.lower.ok_or_else(|| {
            Error::MissingCertificate("doubling needs both scaling certificates".into())
        })?;
        if self.theta != 0.0 {
            return Err(Error::MissingCertificate(format!(
                "doubling needs global (θ=0) certificates, got θ={}",
                self.theta
            )));
        }
        let dd = self.exponent.dimension() as f64;
        let (al, cl) = (self.ledger.alpha_lower, self.ledger.c_lower);
        let c_u = (PI.powi(3) / cl).powf(2.0 / al);
        let in_t = (c_u * 2f64.powf(1.0 / al)).powf(dd).max(2.0);
        let in_r = 2f64.powf(dd + low.alpha_upper) * PI * PI * low.c_upper;
        Ok(self.ledger.c_star_upper / low.c_star * in_t.max(in_r))
    }
}

/// Two-sided bounds for ν; the same constants as the density envelope.
#[derive(Debug, Clone)]
pub struct NuEnvelope {
    inner: BoundEnvelope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuBounds {
    pub r: f64,
    pub lower: Option<f64>,
    pub lower_valid: bool,
    pub upper: f64,
}

pub fn nu_envelope(
    exponent: &LevyExponent,
    lower: Option<&ScalingCertificate>,
    upper: Option<&ScalingCertificate>,
) -> Result<NuEnvelope> {
    Ok(NuEnvelope {
        inner: density_envelope(exponent, lower, upper)?,
    })
}

impl NuEnvelope {
    pub fn envelope(&self) -> &BoundEnvelope {
        &self.inner
    }

    pub fn bounds(&self, r: f64) -> NuBounds {
        NuBounds {
            r,
            lower: self.inner.nu_lower(r).ok(),
            lower_valid: self.inner.nu_lower_valid(r),
            upper: self.inner.nu_upper(r),
        }
    }
}

/// Bounds for P(|X_t| ≥ r). `lower` is None outside r < √a/θ̄ or without
/// lower-bound constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBounds {
    pub lower: Option<f64>,
    pub upper: f64,
}

/// min{1, (2e/(e−1))(2d+1)(1 − e^{−tψ*(1/r)})} and a(1 − e^{−tψ*(1/r)}) for
/// r < √a/θ̄, θ̄ the WUSC threshold.
pub fn tail_bounds(
    exponent: &LevyExponent,
    ledger: &ConstantLedger,
    theta_upper: f64,
    t: f64,
    r: f64,
) -> TailBounds {
    let x = -(-t * exponent.star(1.0 / r)).exp_m1();
    let upper = (ledger.tail_upper * x).min(1.0);
    let lower = ledger
        .lower
        .filter(|l| theta_upper == 0.0 || r < l.a.sqrt() / theta_upper)
        .map(|l| (l.a * x).min(1.0));
    TailBounds { lower, upper }
}

/// (2π)^{−d} (ω_d/(e d)) [ψ⁻(1/t)]^d ≤ p_t(0), valid for every t.
pub fn diagonal_lower(exponent: &LevyExponent, t: f64) -> f64 {
    let d = exponent.dimension();
    let dd = d as f64;
    (2.0 * PI).powf(-dd) * sphere_area(d) / (E * dd) * exponent.inverse(1.0 / t).powi(d as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    LargeTime,
    SmallTime,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::LargeTime => "large-time",
            Regime::SmallTime => "small-time",
        })
    }
}

/// Both sides of tψ*(1/r) ≥ 1 ⇔ tψ*(1/r)/r^d ≥ [ψ⁻(1/t)]^d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeCheck {
    pub regime: Regime,
    /// tψ*(1/r)
    pub scaled: f64,
    pub off_diagonal: f64,
    pub diagonal: f64,
    pub agree: bool,
}

/// Relative width of the boundary band tψ*(1/r) ≈ 1 where the two sides may
/// disagree through the ψ*/ψ⁻ round trip.
pub const REGIME_TOLERANCE: f64 = 1e-9;

pub fn regime_classify(exponent: &LevyExponent, t: f64, r: f64) -> RegimeCheck {
    let d = exponent.dimension() as i32;
    let scaled = t * exponent.star(1.0 / r);
    let off_diagonal = scaled / r.powi(d);
    let diagonal = exponent.inverse(1.0 / t).powi(d);
    let left = scaled >= 1.0;
    let right = off_diagonal >= diagonal;
    let agree = left == right || (scaled - 1.0).abs() <= REGIME_TOLERANCE;
    let regime = if left {
        Regime::LargeTime
    } else {
        Regime::SmallTime
    };
    RegimeCheck {
        regime,
        scaled,
        off_diagonal,
        diagonal,
        agree,
    }
}
