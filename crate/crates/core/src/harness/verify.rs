//! Grid sweeps comparing the envelopes with the oracle.
//!
//! Sweeps fan out over grid cells with rayon; `collect` on an indexed
//! parallel iterator keeps records in (t-index, r-index) order, so reports
//! do not depend on scheduling.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    density_envelope, nu_envelope, regime_classify, surrogate_cbf, surrogate_ratios, BoundEnvelope,
    ConstantLedger, RatioRange, Regime,
};
use crate::error::{Error, Result};
use crate::exponents::{CatalogEntry, UnimodalLevyDensity};
use crate::oracle::DensityOracle;
use crate::radial_calculus::subordinated_density;
use crate::scaling::{certify, Direction, GridSpec, ScalingCertificate};

use super::config::RunConfig;

pub const SCHEMA: u32 = 1;

/// Largest spread ψ(√λ)/φ(λ) accepted by the surrogate check.
pub const SURROGATE_SPREAD: f64 = 10.0;

/// Relative accuracy required of p_{2t}(0)/p_t(0) when it is known exactly.
pub const DIAGONAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub direction: Direction,
    pub alpha: f64,
    pub theta: f64,
    pub constant: f64,
}

impl From<&ScalingCertificate> for CertificateSummary {
    fn from(c: &ScalingCertificate) -> Self {
        CertificateSummary {
            direction: c.direction,
            alpha: c.alpha,
            theta: c.theta,
            constant: c.constant,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport<R, S> {
    pub schema: u32,
    pub check: &'static str,
    pub entry: String,
    pub config: RunConfig,
    pub certificates: Vec<CertificateSummary>,
    pub ledger: Option<ConstantLedger>,
    pub records: Vec<R>,
    pub summary: S,
    /// Wall-clock seconds; the only field that changes between identical runs.
    pub runtime_seconds: f64,
}

pub trait Verdict {
    fn pass(&self) -> bool;
}

impl<R, S: Verdict> VerificationReport<R, S> {
    pub fn pass(&self) -> bool {
        self.summary.pass()
    }
}

/// One CSV line per record.
pub trait CsvRecord {
    const HEADER: &'static str;
    fn csv(&self) -> String;
}

impl<R: CsvRecord, S> VerificationReport<R, S> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(R::HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv());
            out.push('\n');
        }
        out
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

/// Certify ψ of an entry in the directions the entry declares, with the
/// constant measured on `grid`.
pub fn entry_certificates(
    entry: &CatalogEntry,
    grid: GridSpec,
) -> Result<(Option<ScalingCertificate>, Option<ScalingCertificate>)> {
    let psi = |u: f64| entry.exponent.psi(u);
    let one = |dir: Direction| -> Result<Option<ScalingCertificate>> {
        match entry.expected(dir) {
            Some(e) => {
                let c = certify(&psi, dir, e.alpha, e.theta, grid)?;
                c.require_valid()?;
                Ok(Some(c))
            }
            None => Ok(None),
        }
    };
    Ok((one(Direction::Lower)?, one(Direction::Upper)?))
}

struct Setup {
    entry: CatalogEntry,
    certificates: Vec<CertificateSummary>,
    envelope: BoundEnvelope,
}

fn setup(cfg: &RunConfig) -> Result<Setup> {
    cfg.validate()?;
    let entry = CatalogEntry::from_id(&cfg.entry_id())?;
    let (lo, up) = entry_certificates(&entry, cfg.certificate_grid)?;
    let envelope = density_envelope(&entry.exponent, lo.as_ref(), up.as_ref())?;
    let certificates = lo
        .iter()
        .chain(up.iter())
        .map(CertificateSummary::from)
        .collect();
    Ok(Setup {
        entry,
        certificates,
        envelope,
    })
}

fn report<R, S>(
    cfg: &RunConfig,
    check: &'static str,
    s: &Setup,
    records: Vec<R>,
    summary: S,
    start: Instant,
) -> VerificationReport<R, S> {
    VerificationReport {
        schema: SCHEMA,
        check,
        entry: s.entry.id.clone(),
        config: cfg.clone(),
        certificates: s.certificates.clone(),
        ledger: Some(s.envelope.ledger().clone()),
        records,
        summary,
        runtime_seconds: start.elapsed().as_secs_f64(),
    }
}

fn cells(cfg: &RunConfig) -> Vec<(usize, usize, f64, f64)> {
    let (ts, rs) = (cfg.t.nodes(), cfg.r.nodes());
    let mut out = Vec::with_capacity(ts.len() * rs.len());
    for (i, &t) in ts.iter().enumerate() {
        for (j, &r) in rs.iter().enumerate() {
            out.push((i, j, t, r));
        }
    }
    out
}

// ---------------------------------------------------------------- sandwich

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Validity {
    /// Both bounds hold here.
    Validated,
    /// Only the upper bound is claimed.
    UpperOnly,
    /// Outside every validity region; reported, never failed.
    Unvalidated,
}

impl std::fmt::Display for Validity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Validity::Validated => "validated",
            Validity::UpperOnly => "upper-only",
            Validity::Unvalidated => "unvalidated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichRecord {
    pub t_index: usize,
    pub r_index: usize,
    pub t: f64,
    pub r: f64,
    pub regime: Regime,
    pub regimes_agree: bool,
    pub validity: Validity,
    pub lower: Option<f64>,
    pub oracle: f64,
    pub oracle_error: f64,
    pub upper: f64,
    /// oracle / lower
    pub lower_ratio: Option<f64>,
    /// oracle / upper
    pub upper_ratio: f64,
    /// oracle / min{[ψ⁻(1/t)]^d, tψ*(1/r)/r^d}
    pub comparability: f64,
    pub pass: bool,
}

impl CsvRecord for SandwichRecord {
    const HEADER: &'static str =
        "t,r,regime,validity,lower,oracle,oracle_error,upper,lower_ratio,upper_ratio,pass";

    fn csv(&self) -> String {
        format!(
            "{:e},{:e},{},{},{},{:e},{:e},{:e},{},{:e},{}",
            self.t,
            self.r,
            self.regime,
            self.validity,
            opt(self.lower),
            self.oracle,
            self.oracle_error,
            self.upper,
            opt(self.lower_ratio),
            self.upper_ratio,
            self.pass
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichSummary {
    pub validated: usize,
    pub upper_only: usize,
    pub unvalidated: usize,
    pub failures: usize,
    /// min oracle/lower over validated records
    pub min_lower_ratio: Option<f64>,
    /// max oracle/upper over records where the upper bound is claimed
    pub max_upper_ratio: Option<f64>,
    /// Range of oracle/functional over validated records; inside [c*, C*] on a pass.
    pub empirical_lower: Option<f64>,
    pub empirical_upper: Option<f64>,
    pub c_star: Option<f64>,
    pub c_star_upper: f64,
    pub regimes_consistent: bool,
    pub pass: bool,
}

impl Verdict for SandwichSummary {
    fn pass(&self) -> bool {
        self.pass
    }
}

pub type SandwichReport = VerificationReport<SandwichRecord, SandwichSummary>;

fn fold_min(acc: Option<f64>, v: f64) -> Option<f64> {
    Some(acc.map_or(v, |a| a.min(v)))
}

fn fold_max(acc: Option<f64>, v: f64) -> Option<f64> {
    Some(acc.map_or(v, |a| a.max(v)))
}

/// Oracle against the two-sided density envelope on the (t, r) grid.
pub fn verify_sandwich(cfg: &RunConfig) -> Result<SandwichReport> {
    let start = Instant::now();
    let s = setup(cfg)?;
    let oracle = DensityOracle::new(&s.entry.exponent)?;
    let env = &s.envelope;
    let tol = cfg.tol;
    let records = cells(cfg)
        .par_iter()
        .map(|&(t_index, r_index, t, r)| -> Result<SandwichRecord> {
            let p = oracle.density(t, r)?;
            let e = env.evaluate(t, r);
            let regime = regime_classify(env.exponent(), t, r);
            let validity = match (e.upper_valid, e.lower_valid && e.lower.is_some()) {
                (false, _) => Validity::Unvalidated,
                (true, true) => Validity::Validated,
                (true, false) => Validity::UpperOnly,
            };
            let upper_ok = p.value - p.error <= e.upper * (1.0 + tol);
            let lower_ok = e
                .lower
                .map_or(true, |l| p.value + p.error >= l * (1.0 - tol));
            let pass = match validity {
                Validity::Validated => upper_ok && lower_ok,
                Validity::UpperOnly => upper_ok,
                Validity::Unvalidated => true,
            };
            Ok(SandwichRecord {
                t_index,
                r_index,
                t,
                r,
                regime: regime.regime,
                regimes_agree: regime.agree,
                validity,
                lower: e.lower,
                oracle: p.value,
                oracle_error: p.error,
                upper: e.upper,
                lower_ratio: e.lower.map(|l| p.value / l),
                upper_ratio: p.value / e.upper,
                comparability: p.value / e.diagonal.min(e.off_diagonal),
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let ledger = env.ledger();
    let mut sum = SandwichSummary {
        validated: 0,
        upper_only: 0,
        unvalidated: 0,
        failures: 0,
        min_lower_ratio: None,
        max_upper_ratio: None,
        empirical_lower: None,
        empirical_upper: None,
        c_star: ledger.c_star(),
        c_star_upper: ledger.c_star_upper,
        regimes_consistent: records.iter().all(|r| r.regimes_agree),
        pass: false,
    };
    for r in &records {
        match r.validity {
            Validity::Validated => sum.validated += 1,
            Validity::UpperOnly => sum.upper_only += 1,
            Validity::Unvalidated => sum.unvalidated += 1,
        }
        if !r.pass {
            sum.failures += 1;
        }
        if r.validity != Validity::Unvalidated {
            sum.max_upper_ratio = fold_max(sum.max_upper_ratio, r.upper_ratio);
            sum.empirical_upper = fold_max(sum.empirical_upper, r.comparability);
        }
        if r.validity == Validity::Validated {
            if let Some(l) = r.lower_ratio {
                sum.min_lower_ratio = fold_min(sum.min_lower_ratio, l);
            }
            sum.empirical_lower = fold_min(sum.empirical_lower, r.comparability);
        }
    }
    sum.pass = sum.failures == 0 && sum.regimes_consistent;
    Ok(report(cfg, "sandwich", &s, records, sum, start))
}

/// Columns log t, log r, log lower, log oracle, log upper (natural logs,
/// "nan" where a value is missing or not positive), one block per t.
pub fn plot_columns(report: &SandwichReport) -> String {
    let ln = |v: Option<f64>| match v {
        Some(x) if x > 0.0 => format!("{:.12e}", x.ln()),
        _ => "nan".to_string(),
    };
    let mut out = String::from("# log_t log_r log_lower log_oracle log_upper\n");
    let mut last = None;
    for r in &report.records {
        if last.is_some_and(|i| i != r.t_index) {
            out.push('\n');
        }
        last = Some(r.t_index);
        out.push_str(&format!(
            "{:.12e} {:.12e} {} {} {}\n",
            r.t.ln(),
            r.r.ln(),
            ln(r.lower),
            ln(Some(r.oracle)),
            ln(Some(r.upper))
        ));
    }
    out
}

// ---------------------------------------------------------------- doubling

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoublingRecord {
    pub t_index: usize,
    pub r_index: usize,
    pub t: f64,
    pub r: f64,
    pub density: f64,
    /// p_{2t}(r)/p_t(r)
    pub time_ratio: f64,
    /// p_t(2r)/p_t(r)
    pub space_ratio: f64,
    pub pass: bool,
}

impl CsvRecord for DoublingRecord {
    const HEADER: &'static str = "t,r,density,time_ratio,space_ratio,pass";

    fn csv(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{}",
            self.t, self.r, self.density, self.time_ratio, self.space_ratio, self.pass
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagonalRecord {
    pub t: f64,
    /// p_{2t}(0)/p_t(0)
    pub ratio: f64,
    /// 2^{−d/α} for stable entries
    pub expected: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingSummary {
    pub k: f64,
    pub min_time_ratio: f64,
    pub max_time_ratio: f64,
    pub min_space_ratio: f64,
    pub max_space_ratio: f64,
    pub diagonal: Vec<DiagonalRecord>,
    pub diagonal_max_deviation: Option<f64>,
    pub failures: usize,
    pub pass: bool,
}

impl Verdict for DoublingSummary {
    fn pass(&self) -> bool {
        self.pass
    }
}

pub type DoublingReport = VerificationReport<DoublingRecord, DoublingSummary>;

/// 2^{−d/α} when the entry is a pure power.
fn stable_diagonal_ratio(entry: &CatalogEntry) -> Option<f64> {
    if !entry.id.starts_with("stable:") {
        return None;
    }
    let alpha = entry.expected(Direction::Lower)?.alpha;
    Some(2f64.powf(-(entry.dimension() as f64) / alpha))
}

/// Ratios p_{2t}(x)/p_t(x) and p_t(2x)/p_t(x) against [1/K, K].
pub fn verify_doubling(cfg: &RunConfig) -> Result<DoublingReport> {
    let start = Instant::now();
    let s = setup(cfg)?;
    let k = s.envelope.doubling_constant()?;
    let oracle = DensityOracle::new(&s.entry.exponent)?;
    let inside = |x: f64| x.is_finite() && x >= 1.0 / k && x <= k;
    let records = cells(cfg)
        .par_iter()
        .map(|&(t_index, r_index, t, r)| -> Result<DoublingRecord> {
            let p = oracle.density(t, r)?.value;
            let time_ratio = oracle.density(2.0 * t, r)?.value / p;
            let space_ratio = oracle.density(t, 2.0 * r)?.value / p;
            let pass = inside(time_ratio) && inside(space_ratio);
            Ok(DoublingRecord {
                t_index,
                r_index,
                t,
                r,
                density: p,
                time_ratio,
                space_ratio,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let expected = stable_diagonal_ratio(&s.entry);
    let diagonal = cfg
        .t
        .nodes()
        .par_iter()
        .map(|&t| -> Result<DiagonalRecord> {
            let ratio = oracle.density_at_zero(2.0 * t)?.value / oracle.density_at_zero(t)?.value;
            Ok(DiagonalRecord { t, ratio, expected })
        })
        .collect::<Result<Vec<_>>>()?;
    let diagonal_max_deviation = expected.map(|e| {
        diagonal
            .iter()
            .map(|d| (d.ratio / e - 1.0).abs())
            .fold(0.0, f64::max)
    });
    let diag_ok = diagonal_max_deviation.map_or(true, |m| m <= DIAGONAL_TOLERANCE)
        && diagonal.iter().all(|d| inside(d.ratio));
    let ext = |f: fn(&DoublingRecord) -> f64| {
        records
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    };
    let (min_t, max_t) = ext(|r| r.time_ratio);
    let (min_r, max_r) = ext(|r| r.space_ratio);
    let failures = records.iter().filter(|r| !r.pass).count();
    let summary = DoublingSummary {
        k,
        min_time_ratio: min_t,
        max_time_ratio: max_t,
        min_space_ratio: min_r,
        max_space_ratio: max_r,
        diagonal,
        diagonal_max_deviation,
        failures,
        pass: failures == 0 && diag_ok,
    };
    Ok(report(cfg, "doubling", &s, records, summary, start))
}

// ---------------------------------------------------------------- ν

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuRecord {
    pub r_index: usize,
    pub r: f64,
    pub lower: Option<f64>,
    pub lower_valid: bool,
    pub nu: f64,
    pub nu_error: f64,
    pub upper: f64,
    pub pass: bool,
}

impl CsvRecord for NuRecord {
    const HEADER: &'static str = "r,lower,lower_valid,nu,nu_error,upper,pass";

    fn csv(&self) -> String {
        format!(
            "{:e},{},{},{:e},{:e},{:e},{}",
            self.r,
            opt(self.lower),
            self.lower_valid,
            self.nu,
            self.nu_error,
            self.upper,
            self.pass
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuSummary {
    pub validated: usize,
    pub failures: usize,
    pub min_lower_ratio: Option<f64>,
    pub max_upper_ratio: Option<f64>,
    pub pass: bool,
}

impl Verdict for NuSummary {
    fn pass(&self) -> bool {
        self.pass
    }
}

pub type NuReport = VerificationReport<NuRecord, NuSummary>;

/// The entry's Lévy density, from the catalog or by subordination.
pub fn entry_levy_density(entry: &CatalogEntry) -> Result<UnimodalLevyDensity> {
    if let Some(nu) = &entry.density {
        return Ok(nu.clone());
    }
    match &entry.bernstein {
        Some(phi) => subordinated_density(phi, entry.dimension()),
        None => Err(Error::PreconditionViolation(format!(
            "{} has no Lévy density to compare",
            entry.id
        ))),
    }
}

/// ν against its envelope on the r-grid of the configuration.
pub fn verify_nu(cfg: &RunConfig) -> Result<NuReport> {
    let start = Instant::now();
    let s = setup(cfg)?;
    let nu = entry_levy_density(&s.entry)?;
    let env = nu_envelope(
        &s.entry.exponent,
        Some(s.envelope.lower_certificate()),
        s.envelope.upper_certificate(),
    )?;
    let tol = cfg.tol;
    let records: Vec<NuRecord> = cfg
        .r
        .nodes()
        .par_iter()
        .enumerate()
        .map(|(r_index, &r)| {
            let b = env.bounds(r);
            let v = nu.eval(r);
            let upper_ok = v.value - v.error <= b.upper * (1.0 + tol);
            let lower_ok = !b.lower_valid
                || b.lower
                    .map_or(true, |l| v.value + v.error >= l * (1.0 - tol));
            NuRecord {
                r_index,
                r,
                lower: b.lower,
                lower_valid: b.lower_valid,
                nu: v.value,
                nu_error: v.error,
                upper: b.upper,
                pass: v.value.is_finite() && upper_ok && lower_ok,
            }
        })
        .collect();
    let mut sum = NuSummary {
        validated: 0,
        failures: 0,
        min_lower_ratio: None,
        max_upper_ratio: None,
        pass: false,
    };
    for r in &records {
        sum.max_upper_ratio = fold_max(sum.max_upper_ratio, r.nu / r.upper);
        if r.lower_valid {
            sum.validated += 1;
            if let Some(l) = r.lower {
                sum.min_lower_ratio = fold_min(sum.min_lower_ratio, r.nu / l);
            }
        }
        if !r.pass {
            sum.failures += 1;
        }
    }
    sum.pass = sum.failures == 0;
    Ok(report(cfg, "nu", &s, records, sum, start))
}

// ---------------------------------------------------------------- surrogate

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurrogateRecord {
    pub lambda: f64,
    /// ψ(√λ)/φ(λ)
    pub ratio: f64,
}

impl CsvRecord for SurrogateRecord {
    const HEADER: &'static str = "lambda,ratio";

    fn csv(&self) -> String {
        format!("{:e},{:e}", self.lambda, self.ratio)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurrogateSummary {
    /// Both certificates have θ = 0.
    pub global: bool,
    pub range: RatioRange,
    pub spread: f64,
    pub pass: bool,
}

impl Verdict for SurrogateSummary {
    fn pass(&self) -> bool {
        self.pass
    }
}

pub type SurrogateReport = VerificationReport<SurrogateRecord, SurrogateSummary>;

/// ψ(√λ)/φ(λ) for the complete Bernstein surrogate φ built from ν.
pub fn verify_surrogate(cfg: &RunConfig) -> Result<SurrogateReport> {
    let start = Instant::now();
    let s = setup(cfg)?;
    let nu = entry_levy_density(&s.entry)?;
    let phi = surrogate_cbf(&nu);
    let grid = GridSpec::new(cfg.lambda.min, cfg.lambda.max, cfg.lambda.count);
    let (ratios, range) = surrogate_ratios(&s.entry.exponent, &phi, grid)?;
    let records = grid
        .nodes()
        .into_iter()
        .zip(ratios)
        .map(|(lambda, ratio)| SurrogateRecord { lambda, ratio })
        .collect();
    let spread = range.spread();
    let summary = SurrogateSummary {
        global: s.envelope.theta() == 0.0,
        range,
        spread,
        pass: range.min > 0.0 && spread < SURROGATE_SPREAD,
    };
    Ok(report(cfg, "surrogate", &s, records, summary, start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Axis;

    fn small(entry: &str) -> RunConfig {
        RunConfig {
            t: Axis::new(1e-1, 1e1, 4),
            r: Axis::new(1e-1, 1e1, 4),
            ..RunConfig::for_entry(entry)
        }
    }

    #[test]
    fn cauchy_sandwich_passes_in_order() {
        let rep = verify_sandwich(&small("stable:a=1.0:d=1")).unwrap();
        assert!(rep.pass(), "{:?}", rep.summary);
        assert_eq!(rep.schema, 1);
        let order: Vec<_> = rep.records.iter().map(|r| (r.t_index, r.r_index)).collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
        let s = &rep.summary;
        assert!(
            s.c_star.unwrap() <= s.empirical_lower.unwrap()
                && s.empirical_upper.unwrap() <= s.c_star_upper
        );
        assert!(rep.to_csv().lines().count() == 17);
        assert!(plot_columns(&rep).lines().filter(|l| l.is_empty()).count() == 3);
    }

    #[test]
    fn doubling_of_cauchy() {
        let rep = verify_doubling(&small("stable:a=1.0:d=1")).unwrap();
        assert!(rep.pass(), "{:?}", rep.summary);
        assert!(rep.summary.diagonal_max_deviation.unwrap() < 1e-9);
        let err = verify_doubling(&small("trunc-stable:a=1.0:r=1.0:d=1")).unwrap_err();
        assert!(matches!(err, Error::MissingCertificate(_)));
    }

    #[test]
    fn nu_and_surrogate_for_cauchy() {
        let cfg = RunConfig {
            r: Axis::new(1e-4, 1e4, 9),
            ..RunConfig::for_entry("stable:a=1.0:d=1")
        };
        let rep = verify_nu(&cfg).unwrap();
        assert!(rep.pass(), "{:?}", rep.summary);
        let sur = verify_surrogate(&RunConfig {
            lambda: Axis::new(1e-6, 1e6, 7),
            ..cfg
        })
        .unwrap();
        assert!(sur.pass() && sur.summary.spread < 1.0 + 1e-6);
    }

    #[test]
    fn no_density_for_log_stable() {
        let err = verify_nu(&small("logstable:a=1.0:b=0.4:g=1.0:d=1")).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolation(_)));
        assert!(matches!(
            verify_sandwich(&small("nope:a=1")),
            Err(Error::UnknownEntry(_))
        ));
    }
}
