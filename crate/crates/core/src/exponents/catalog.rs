//! Built-in examples, addressable by identifiers such as
//! `stable:a=1.0:d=1` or `mixed:a1=0.5:a2=1.5:d=1`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::radial_calculus::subordinated_density;
use crate::scaling::Direction;
use crate::special::{gamma, sphere_area};

use super::bernstein::{exponent_from_bernstein, AtomSeries, BernsteinFunction, Measure};
use super::cantor::CantorMeasure;
use super::density::{exponent_from_density, UnimodalLevyDensity};
use super::levy::LevyExponent;
use super::mixed::mixed_power;

/// A scaling condition an entry is known to satisfy. `constant` is given
/// when it is known exactly; otherwise it is left to the certifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedScaling {
    pub direction: Direction,
    pub alpha: f64,
    pub theta: f64,
    pub constant: Option<f64>,
}

impl ExpectedScaling {
    fn lower(alpha: f64, theta: f64, constant: Option<f64>) -> Self {
        ExpectedScaling {
            direction: Direction::Lower,
            alpha,
            theta,
            constant,
        }
    }

    fn upper(alpha: f64, theta: f64, constant: Option<f64>) -> Self {
        ExpectedScaling {
            direction: Direction::Upper,
            alpha,
            theta,
            constant,
        }
    }
}

#[derive(Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub label: String,
    pub exponent: LevyExponent,
    pub bernstein: Option<BernsteinFunction>,
    pub density: Option<UnimodalLevyDensity>,
    pub expected: Vec<ExpectedScaling>,
}

impl fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("id", &self.id)
            .field("label", &self.label)
            .field("expected", &self.expected)
            .finish()
    }
}

impl CatalogEntry {
    pub fn dimension(&self) -> usize {
        self.exponent.dimension()
    }

    pub fn expected(&self, direction: Direction) -> Option<&ExpectedScaling> {
        self.expected.iter().find(|e| e.direction == direction)
    }

    /// Build an entry from its identifier.
    pub fn from_id(id: &str) -> Result<Self> {
        let mut parts = id.trim().split(':');
        let kind = parts.next().unwrap_or_default();
        let mut params = BTreeMap::new();
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("malformed parameter `{p}` in `{id}`"))
            })?;
            let v: f64 = v.parse().map_err(|_| {
                Error::InvalidParameter(format!("parameter `{k}` in `{id}` is not a number"))
            })?;
            params.insert(k.to_string(), v);
        }
        let mut p = Params { id, params };
        let entry = match kind {
            "stable" => {
                let (a, d) = (p.take("a")?, p.dim()?);
                p.finish()?;
                stable(a, d)
            }
            "logstable" => {
                let (a, b, g, d) = (p.take("a")?, p.take("b")?, p.take("g")?, p.dim()?);
                p.finish()?;
                log_stable(a, b, g, d)
            }
            "trunc-stable" => {
                let (a, r, d) = (p.take("a")?, p.take("r")?, p.dim()?);
                p.finish()?;
                truncated_stable(a, r, d)
            }
            "atoms" => {
                let (a, d) = (p.take("a")?, p.dim()?);
                p.finish()?;
                atoms(a, d)
            }
            "cantor" => {
                let (a, d) = (p.take("a")?, p.dim()?);
                p.finish()?;
                cantor(a, d)
            }
            "mixed" => {
                let (a1, a2, d) = (p.take("a1")?, p.take("a2")?, p.dim()?);
                p.finish()?;
                mixed(a1, a2, d)
            }
            _ => Err(Error::UnknownEntry(id.to_string())),
        }?;
        Ok(entry)
    }
}

struct Params<'a> {
    id: &'a str,
    params: BTreeMap<String, f64>,
}

impl Params<'_> {
    fn take(&mut self, key: &str) -> Result<f64> {
        self.params.remove(key).ok_or_else(|| {
            Error::InvalidParameter(format!("`{}` is missing parameter `{key}`", self.id))
        })
    }

    /// `d` defaults to 1.
    fn dim(&mut self) -> Result<usize> {
        let d = self.params.remove("d").unwrap_or(1.0);
        if d >= 1.0 && d.fract() == 0.0 && d <= 64.0 {
            Ok(d as usize)
        } else {
            Err(Error::InvalidParameter(format!(
                "dimension {d} in `{}` must be a positive integer",
                self.id
            )))
        }
    }

    fn finish(self) -> Result<()> {
        match self.params.keys().next() {
            Some(k) => Err(Error::InvalidParameter(format!(
                "unknown parameter `{k}` in `{}`",
                self.id
            ))),
            None => Ok(()),
        }
    }
}

/// Identifiers of the default catalog.
pub const DEFAULT_IDS: [&str; 10] = [
    "stable:a=0.5:d=1",
    "stable:a=1.0:d=1",
    "stable:a=1.5:d=1",
    "stable:a=1.0:d=3",
    "logstable:a=1.0:b=0.4:g=1.0:d=1",
    "trunc-stable:a=1.0:r=1.0:d=1",
    "atoms:a=1.0:d=1",
    "cantor:a=1.0:d=1",
    "mixed:a1=0.5:a2=1.5:d=1",
    "logstable:a=1.0:b=-0.25:g=1.0:d=1",
];

pub fn catalog_list() -> Result<Vec<CatalogEntry>> {
    DEFAULT_IDS
        .iter()
        .map(|id| CatalogEntry::from_id(id))
        .collect()
}

fn check_index(name: &str, a: f64) -> Result<()> {
    if a > 0.0 && a < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must lie in (0, 2), got {a}"
        )))
    }
}

/// c_{d,α} with ν(r) = c_{d,α} r^{−d−α} the Lévy density of ψ(u) = u^α.
pub fn stable_levy_constant(d: usize, alpha: f64) -> f64 {
    let dd = d as f64;
    alpha * 2f64.powf(alpha - 1.0) * gamma(0.5 * (dd + alpha))
        / (PI.powf(0.5 * dd) * gamma(1.0 - 0.5 * alpha))
}

/// The isotropic α-stable Lévy density with its closed-form tail and exponent.
pub fn stable_density(alpha: f64, d: usize) -> Result<UnimodalLevyDensity> {
    check_index("α", alpha)?;
    let c = stable_levy_constant(d, alpha);
    let dd = d as f64;
    let omega = sphere_area(d);
    let nu = UnimodalLevyDensity::from_fn(
        d,
        format!("stable(α={alpha},d={d}) density"),
        move |r: f64| c * r.powf(-dd - alpha),
    )?;
    Ok(nu
        .with_tail_mass(move |r| omega * c * r.powf(-alpha) / alpha)
        .with_exponent(stable_exponent(alpha, d)))
}

fn stable_exponent(alpha: f64, d: usize) -> LevyExponent {
    LevyExponent::direct(d, format!("u^{alpha}"), move |u| u.powf(alpha))
        .assume_monotone()
        .with_inverse(move |v| v.powf(1.0 / alpha))
}

fn stable(alpha: f64, d: usize) -> Result<CatalogEntry> {
    check_index("α", alpha)?;
    let exact = Some(1.0);
    Ok(CatalogEntry {
        id: format!("stable:a={alpha:?}:d={d}"),
        label: format!("stable(α={alpha},d={d})"),
        exponent: stable_exponent(alpha, d),
        bernstein: Some(BernsteinFunction::power(0.5 * alpha)?),
        density: Some(stable_density(alpha, d)?),
        expected: vec![
            ExpectedScaling::lower(alpha, 0.0, exact),
            ExpectedScaling::upper(alpha, 0.0, exact),
        ],
    })
}

fn log_stable(alpha: f64, beta: f64, gam: f64, d: usize) -> Result<CatalogEntry> {
    check_index("α", alpha)?;
    check_index("γ", gam)?;
    // the boundary α+2β = 2 is admitted
    let ab = alpha + 2.0 * beta;
    if !(ab > 0.0 && ab <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "α+2β must lie in (0, 2], got {ab}"
        )));
    }
    let psi = move |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            u.powf(alpha) * (u.powf(gam)).ln_1p().powf(beta)
        }
    };
    let mut exponent = LevyExponent::direct(d, format!("u^{alpha} log^{beta}(1+u^{gam})"), psi);
    if beta >= 0.0 {
        exponent = exponent.assume_monotone();
    }
    let exact = Some(1.0);
    Ok(CatalogEntry {
        id: format!("logstable:a={alpha:?}:b={beta:?}:g={gam:?}:d={d}"),
        label: format!("log-stable(α={alpha},β={beta},γ={gam},d={d})"),
        exponent,
        bernstein: None,
        density: None,
        expected: vec![
            ExpectedScaling::lower(alpha - gam * (-beta).max(0.0), 0.0, exact),
            ExpectedScaling::upper(alpha + gam * beta.max(0.0), 0.0, exact),
        ],
    })
}

fn truncated_stable(alpha: f64, radius: f64, d: usize) -> Result<CatalogEntry> {
    let nu = stable_density(alpha, d)?.truncate(radius)?;
    Ok(CatalogEntry {
        id: format!("trunc-stable:a={alpha:?}:r={radius:?}:d={d}"),
        label: format!("truncated-stable(α={alpha},r={radius},d={d})"),
        exponent: exponent_from_density(&nu),
        bernstein: None,
        density: Some(nu),
        expected: vec![
            ExpectedScaling::lower(alpha, 1.0 / radius, None),
            ExpectedScaling::upper(alpha, 1.0 / radius, None),
        ],
    })
}

fn subordinate_entry(
    id: String,
    label: String,
    phi: BernsteinFunction,
    d: usize,
    expected: Vec<ExpectedScaling>,
) -> Result<CatalogEntry> {
    let density = subordinated_density(&phi, d)?;
    Ok(CatalogEntry {
        id,
        label,
        exponent: exponent_from_bernstein(&phi, d),
        bernstein: Some(phi),
        density: Some(density),
        expected,
    })
}

/// μ = Σ_{k≥2} δ_{1/k} (k^{α/2} − (k−1)^{α/2}).
pub fn atom_subordinator(alpha: f64) -> Result<BernsteinFunction> {
    check_index("α", alpha)?;
    let h = 0.5 * alpha;
    let series = AtomSeries::indexed(
        2,
        |k| 1.0 / k,
        move |k| -k.powf(h) * (h * (-1.0 / k).ln_1p()).exp_m1(),
    );
    Ok(BernsteinFunction::from_measure(
        format!("atoms(α={alpha})"),
        0.0,
        Measure::Atoms(series),
    ))
}

/// μ(ds) = s^{−γ}F(ds), F the Cantor measure, γ = α/2 + log 2/log 3.
pub fn cantor_subordinator(alpha: f64) -> Result<BernsteinFunction> {
    check_index("α", alpha)?;
    let c = Arc::new(CantorMeasure::new(alpha));
    let cc = c.clone();
    Ok(BernsteinFunction::new(
        format!("cantor(α={alpha})"),
        move |l| cc.phi(l),
        0.0,
        Measure::Cantor(c),
    ))
}

fn atoms(alpha: f64, d: usize) -> Result<CatalogEntry> {
    let expected = vec![
        ExpectedScaling::lower(alpha, 1.0, None),
        ExpectedScaling::upper(alpha, 1.0, None),
    ];
    subordinate_entry(
        format!("atoms:a={alpha:?}:d={d}"),
        format!("atoms(α={alpha},d={d})"),
        atom_subordinator(alpha)?,
        d,
        expected,
    )
}

fn cantor(alpha: f64, d: usize) -> Result<CatalogEntry> {
    let expected = vec![
        ExpectedScaling::lower(alpha, 1.0, None),
        ExpectedScaling::upper(alpha, 1.0, None),
    ];
    subordinate_entry(
        format!("cantor:a={alpha:?}:d={d}"),
        format!("cantor(α={alpha},d={d})"),
        cantor_subordinator(alpha)?,
        d,
        expected,
    )
}

fn mixed(a1: f64, a2: f64, d: usize) -> Result<CatalogEntry> {
    let phi = mixed_power(a1, a2)?;
    let expected = vec![
        ExpectedScaling::lower(a1, 0.0, None),
        ExpectedScaling::upper(a2, 0.0, None),
    ];
    subordinate_entry(
        format!("mixed:a1={a1:?}:a2={a2:?}:d={d}"),
        format!("mixed-power(α₁={a1},α₂={a2},d={d})"),
        phi,
        d,
        expected,
    )
}
