use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quadrature::Estimate;

/// How a characteristic exponent was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    DirectFormula,
    FromBernstein,
    FromLevyDensity,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::DirectFormula => "direct-formula",
            Provenance::FromBernstein => "from-bernstein",
            Provenance::FromLevyDensity => "from-levy-density",
        })
    }
}

pub(crate) type PsiFn = Arc<dyn Fn(f64) -> Result<Estimate> + Send + Sync>;
type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

// ψ* table layout for exponents not known to be monotone
const STAR_LOG10_MIN: f64 = -12.0;
const STAR_LOG10_MAX: f64 = 18.0;
const STAR_PER_DECADE: f64 = 16.0;

/// Radial Lévy-Khintchine exponent ψ with its maximal function ψ* and
/// generalized inverse ψ⁻ = (ψ*)⁻.
///
/// Cloning is cheap; the ψ* table is shared and built on first use.
#[derive(Clone)]
pub struct LevyExponent {
    d: usize,
    label: String,
    provenance: Provenance,
    psi: PsiFn,
    monotone: bool,
    pure_jump: bool,
    inverse: Option<RealFn>,
    star: Arc<OnceLock<StarTable>>,
}

impl fmt::Debug for LevyExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevyExponent")
            .field("d", &self.d)
            .field("label", &self.label)
            .field("provenance", &self.provenance)
            .field("monotone", &self.monotone)
            .finish()
    }
}

impl LevyExponent {
    pub fn new<F>(d: usize, label: impl Into<String>, provenance: Provenance, psi: F) -> Self
    where
        F: Fn(f64) -> Result<Estimate> + Send + Sync + 'static,
    {
        assert!(d >= 1, "dimension must be positive");
        LevyExponent {
            d,
            label: label.into(),
            provenance,
            psi: Arc::new(psi),
            monotone: false,
            pure_jump: true,
            inverse: None,
            star: Arc::new(OnceLock::new()),
        }
    }

    /// Closed-form exponent with zero evaluation error.
    pub fn direct<F>(d: usize, label: impl Into<String>, psi: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(d, label, Provenance::DirectFormula, move |u| {
            Ok(Estimate::exact(psi(u)))
        })
    }

    /// Declare ψ nondecreasing, so that ψ* = ψ.
    pub fn assume_monotone(mut self) -> Self {
        self.monotone = true;
        self
    }

    /// Supply a closed form for ψ⁻ (only meaningful together with monotonicity).
    pub fn with_inverse<F: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, inv: F) -> Self {
        self.inverse = Some(Arc::new(inv));
        self
    }

    pub fn with_pure_jump(mut self, pure_jump: bool) -> Self {
        self.pure_jump = pure_jump;
        self
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// False for exponents with a Gaussian part (e.g. φ(λ)=λ).
    pub fn is_pure_jump(&self) -> bool {
        self.pure_jump
    }

    pub fn evaluate(&self, u: f64) -> Result<Estimate> {
        if u == 0.0 {
            return Ok(Estimate::ZERO);
        }
        (self.psi)(u.abs())
    }

    /// ψ(u); NaN if the evaluation failed.
    pub fn psi(&self, u: f64) -> f64 {
        self.evaluate(u).map(|e| e.value).unwrap_or(f64::NAN)
    }

    /// ψ*(u) = sup_{s≤u} ψ(s).
    pub fn star(&self, u: f64) -> f64 {
        self.star_estimate(u).value
    }

    pub fn star_estimate(&self, u: f64) -> Estimate {
        if u <= 0.0 {
            return Estimate::ZERO;
        }
        let here = self
            .evaluate(u)
            .unwrap_or(Estimate::new(f64::NAN, f64::NAN));
        if self.monotone {
            return here;
        }
        let table = self.star.get_or_init(|| StarTable::build(self));
        table.query(self, u, here)
    }

    /// Whether ψ* is served from a precomputed table.
    pub fn uses_star_table(&self) -> bool {
        !self.monotone
    }

    /// sup ψ* (∞ when ψ is unbounded).
    pub fn star_supremum(&self) -> f64 {
        if self.inverse.is_some() {
            return f64::INFINITY;
        }
        let top = self.star(1e300);
        if top.is_finite() && top < 1e300 {
            top
        } else {
            f64::INFINITY
        }
    }

    /// ψ⁻(v) = inf{s ≥ 0 : ψ*(s) ≥ v}, with inf ∅ = ∞.
    pub fn inverse(&self, v: f64) -> f64 {
        if v.is_nan() {
            return f64::NAN;
        }
        if v <= 0.0 {
            return 0.0;
        }
        if let Some(inv) = &self.inverse {
            return inv(v);
        }
        let g = |x: f64| self.star(x.exp()).ln() - v.ln();
        // bracket in x = ln s
        let mut lo: f64;
        let mut hi = 0.0f64;
        let mut g_hi = g(hi);
        if g_hi.is_nan() {
            return f64::NAN;
        }
        let mut g_lo;
        if g_hi < 0.0 {
            loop {
                lo = hi;
                g_lo = g_hi;
                hi += 2.0;
                if hi > 690.0 {
                    return f64::INFINITY;
                }
                g_hi = g(hi);
                if g_hi.is_nan() {
                    return f64::NAN;
                }
                if g_hi >= 0.0 {
                    break;
                }
            }
        } else {
            loop {
                lo = hi - 2.0;
                if lo < -690.0 {
                    return 0.0;
                }
                g_lo = g(lo);
                if g_lo.is_nan() {
                    return f64::NAN;
                }
                if g_lo < 0.0 {
                    break;
                }
                hi = lo;
                g_hi = g_lo;
            }
        }
        // Illinois regula falsi on the bracket [lo, hi] with g(lo) < 0 ≤ g(hi)
        let mut side = 0i8;
        for _ in 0..200 {
            if hi - lo <= 1e-13 * hi.abs().max(1.0) {
                break;
            }
            let mut x = if g_hi.is_finite() && g_lo.is_finite() && g_hi != g_lo {
                hi - g_hi * (hi - lo) / (g_hi - g_lo)
            } else {
                0.5 * (lo + hi)
            };
            if !(x > lo && x < hi) {
                x = 0.5 * (lo + hi);
            }
            let gx = g(x);
            if gx.is_nan() {
                return f64::NAN;
            }
            if gx >= 0.0 {
                hi = x;
                g_hi = gx;
                if side == 1 {
                    g_lo *= 0.5;
                }
                side = 1;
            } else {
                lo = x;
                g_lo = gx;
                if side == -1 {
                    g_hi *= 0.5;
                }
                side = -1;
            }
        }
        hi.exp()
    }
}

/// Prefix maxima of ψ on a log grid, with in-cell maxima located by
/// golden-section search wherever ψ fails to increase across a cell.
struct StarTable {
    nodes: Vec<f64>,
    prefix: Vec<f64>,
    prefix_err: Vec<f64>,
    cell_max: Vec<Option<(f64, f64)>>,
}

impl StarTable {
    fn build(psi: &LevyExponent) -> Self {
        let n = ((STAR_LOG10_MAX - STAR_LOG10_MIN) * STAR_PER_DECADE) as usize + 1;
        let nodes: Vec<f64> = (0..n)
            .map(|i| 10f64.powf(STAR_LOG10_MIN + i as f64 / STAR_PER_DECADE))
            .collect();
        let evals: Vec<Estimate> = nodes
            .par_iter()
            .map(|&u| psi.evaluate(u).unwrap_or(Estimate::new(f64::NAN, 0.0)))
            .collect();
        let cell_max: Vec<Option<(f64, f64)>> = (0..n - 1)
            .into_par_iter()
            .map(|i| {
                let (a, b) = (nodes[i], nodes[i + 1]);
                let (fa, fb) = (evals[i].value, evals[i + 1].value);
                let m = (a * b).sqrt();
                let fm = psi.psi(m);
                if fb >= fa && fm <= fb {
                    return None;
                }
                let (loc, val) = golden_max(|x| psi.psi(x), a, b);
                let (loc, val) = if fm > val { (m, fm) } else { (loc, val) };
                (val > fa.max(fb)).then_some((loc, val))
            })
            .collect();
        let mut prefix = Vec::with_capacity(n);
        let mut prefix_err = Vec::with_capacity(n);
        let mut run = 0.0f64;
        let mut run_err = 0.0f64;
        for i in 0..n {
            if i > 0 {
                if let Some((_, v)) = cell_max[i - 1] {
                    if v > run {
                        run = v;
                    }
                }
            }
            if evals[i].value > run {
                run = evals[i].value;
                run_err = evals[i].error;
            }
            prefix.push(run);
            prefix_err.push(run_err);
        }
        StarTable {
            nodes,
            prefix,
            prefix_err,
            cell_max,
        }
    }

    fn query(&self, psi: &LevyExponent, u: f64, here: Estimate) -> Estimate {
        let n = self.nodes.len();
        if u < self.nodes[0] {
            return here;
        }
        let mut best = here;
        let mut take = |v: f64, e: f64| {
            if v > best.value {
                best = Estimate::new(v, e);
            }
        };
        if u >= self.nodes[n - 1] {
            take(self.prefix[n - 1], self.prefix_err[n - 1]);
            // sweep beyond the table
            let mut x = self.nodes[n - 1];
            let step = 10f64.powf(1.0 / 32.0);
            while x < u {
                take(psi.psi(x), 0.0);
                x *= step;
            }
            return best;
        }
        let i = match self.nodes.binary_search_by(|p| p.total_cmp(&u)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        take(self.prefix[i], self.prefix_err[i]);
        if let Some((loc, v)) = self.cell_max[i] {
            if loc <= u {
                take(v, 0.0);
            } else {
                let (_, v) = golden_max(|x| psi.psi(x), self.nodes[i], u);
                take(v, 0.0);
            }
        }
        best
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    // search in log space, the grid is logarithmic
    let (mut lo, mut hi) = (a.ln(), b.ln());
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1.exp());
    let mut f2 = f(x2.exp());
    for _ in 0..40 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2.exp());
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1.exp());
        }
    }
    if f1 >= f2 {
        (x1.exp(), f1)
    } else {
        (x2.exp(), f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wiggly() -> LevyExponent {
        // the classical non-monotone example ψ(u) = u + 3π(1 − sin u / u)
        LevyExponent::direct(1, "wiggly", |u: f64| {
            let s = if u < 1e-4 {
                1.0 - u * u / 6.0
            } else {
                u.sin() / u
            };
            u + 3.0 * std::f64::consts::PI * (1.0 - s)
        })
    }

    #[test]
    fn monotone_star_is_psi() {
        let p = LevyExponent::direct(1, "u^1.5", |u: f64| u.powf(1.5)).assume_monotone();
        assert_eq!(p.star(3.0), p.psi(3.0));
        let v = p.inverse(8.0);
        assert!((v - 4.0).abs() < 1e-11, "{v}");
    }

    #[test]
    fn star_dominates_and_is_monotone() {
        let p = wiggly();
        let mut prev = 0.0;
        for i in 1..400 {
            let u = 0.05 * i as f64;
            let s = p.star(u);
            assert!(s >= p.psi(u) - 1e-12);
            assert!(s <= std::f64::consts::PI.powi(2) * p.psi(u) + 1e-12);
            assert!(s >= prev - 1e-12, "u={u}");
            prev = s;
        }
        // ψ decreases just after 2π, ψ* stays flat at the local maximum
        let peak = p.star(2.0 * std::f64::consts::PI + 0.3);
        assert!(peak > p.psi(2.0 * std::f64::consts::PI + 0.3));
    }

    #[test]
    fn inverse_round_trip() {
        let p = wiggly();
        for &v in &[1e-6, 0.1, 1.0, 13.0, 20.0, 1e5] {
            let s = p.inverse(v);
            assert!((p.star(s) - v).abs() <= 1e-9 * v, "v={v} s={s}");
        }
        for &s in &[0.3, 2.0, 7.0, 50.0] {
            assert!(p.inverse(p.star(s)) <= s * (1.0 + 1e-12));
        }
    }

    #[test]
    fn bounded_exponent_has_infinite_inverse() {
        let p = LevyExponent::direct(1, "bounded", |u: f64| 1.0 - (-u * u).exp()).assume_monotone();
        assert!(p.inverse(2.0).is_infinite());
        assert!((p.star_supremum() - 1.0).abs() < 1e-12);
        assert_eq!(p.inverse(0.0), 0.0);
    }
}
