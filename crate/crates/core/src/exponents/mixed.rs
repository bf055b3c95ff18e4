//! The special Bernstein function φ = 1/ℒu with potential density
//! u(r) = r^{a₁−1} ∨ r^{a₂−1}, 0 < a₁ < a₂ < 1.
//!
//! φ is explicit. The tail μ̄ of its Lévy measure is not: it solves the
//! renewal equation ∫₀ᵗ u(t−s) μ̄(s) ds = 1. On (0, 1] only the first branch
//! of u is seen and the solution is the Abel one, s^{−a₁}/(Γ(a₁)Γ(1−a₁)).
//! Beyond 1 the equation is solved by product integration against a
//! piecewise-linear μ̄.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_points, Estimate, Tolerance};
use crate::special::{gamma, lower_gamma, upper_gamma};

use super::bernstein::{BernsteinFunction, Measure};

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// Largest time carried on the grid; beyond it μ̄ follows t^{−a₂}.
const S_MAX: f64 = 1e10;

#[derive(Debug)]
pub struct MixedTail {
    a1: f64,
    a2: f64,
    abel: f64,
    table: OnceLock<(Table, f64)>,
}

#[derive(Debug)]
struct Table {
    ln_t: Vec<f64>,
    ln_g: Vec<f64>,
}

impl Table {
    /// Quadratic interpolation of ln g in ln t.
    fn interp(&self, t: f64) -> f64 {
        let x = t.ln();
        let n = self.ln_t.len();
        if x >= self.ln_t[n - 1] {
            return self.ln_g[n - 1].exp();
        }
        let i = self.ln_t.partition_point(|&v| v <= x).clamp(1, n - 2);
        let (x0, x1, x2) = (self.ln_t[i - 1], self.ln_t[i], self.ln_t[i + 1]);
        let (y0, y1, y2) = (self.ln_g[i - 1], self.ln_g[i], self.ln_g[i + 1]);
        let l0 = (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2));
        let l1 = (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2));
        let l2 = (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
        (l0 * y0 + l1 * y1 + l2 * y2).exp()
    }
}

impl MixedTail {
    pub fn new(a1: f64, a2: f64) -> Self {
        let abel = 1.0 / (gamma(a1) * gamma(1.0 - a1));
        MixedTail {
            a1,
            a2,
            abel,
            table: OnceLock::new(),
        }
    }

    fn u(&self, y: f64) -> f64 {
        if y < 1.0 {
            y.powf(self.a1 - 1.0)
        } else {
            y.powf(self.a2 - 1.0)
        }
    }

    /// (∫u, ∫u·y) over [lo, hi], exact.
    fn moments(&self, lo: f64, hi: f64) -> (f64, f64) {
        let piece = |lo: f64, hi: f64, p: f64| {
            (
                (hi.powf(p) - lo.powf(p)) / p,
                (hi.powf(p + 1.0) - lo.powf(p + 1.0)) / (p + 1.0),
            )
        };
        if hi <= 1.0 {
            piece(lo, hi, self.a1)
        } else if lo >= 1.0 {
            piece(lo, hi, self.a2)
        } else {
            let (a, b) = piece(lo, 1.0, self.a1);
            let (c, d) = piece(1.0, hi, self.a2);
            (a + c, b + d)
        }
    }

    /// ∫ u(y)·(y − lo)/h and ∫ u(y)·(hi − y)/h over [lo, hi], h = hi − lo.
    fn hat_weights(&self, lo: f64, hi: f64) -> (f64, f64) {
        let h = hi - lo;
        if lo < 64.0 * h {
            let (i0, i1) = self.moments(lo, hi);
            ((i1 - lo * i0) / h, (hi * i0 - i1) / h)
        } else {
            let gauss = |a: f64, b: f64| {
                let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
                GAUSS4.iter().fold((0.0, 0.0), |(up, down), &(x, w)| {
                    let y = c + r * x;
                    let v = w * r * self.u(y) / h;
                    (up + v * (y - lo), down + v * (hi - y))
                })
            };
            if lo < 1.0 && hi > 1.0 {
                let (a, b) = gauss(lo, 1.0);
                let (c, d) = gauss(1.0, hi);
                (a + c, b + d)
            } else {
                gauss(lo, hi)
            }
        }
    }

    /// ∫₀¹ u(t−τ) μ̄(τ) dτ with the Abel solution on (0, 1].
    fn known_part(&self, t: f64) -> Result<f64> {
        // τ = v^{1/(1−a₁)} absorbs the τ^{−a₁} singularity
        let e = 1.0 / (1.0 - self.a1);
        let f = |v: f64| self.u(t - v.powf(e));
        let mut pts = vec![0.0, 0.5, 1.0];
        if t < 2.0 {
            pts.insert(2, (t - 1.0).powf(1.0 - self.a1));
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let tol = Tolerance::new(1e-300, 1e-13).with_budget(4000);
        Ok(integrate_points(f, &pts, tol)?.value * self.abel * e)
    }

    fn solve(&self, h0: f64, q: f64) -> Result<Table> {
        let mut t = vec![1.0];
        while *t.last().unwrap() < 4.0 - 1e-12 {
            t.push(t.last().unwrap() + h0);
        }
        while *t.last().unwrap() < S_MAX {
            t.push(t.last().unwrap() * q);
        }
        let mut g = vec![self.abel];
        for n in 1..t.len() {
            let tn = t[n];
            let mut rhs = 1.0 - self.known_part(tn)?;
            for j in 0..n - 1 {
                // panel [t_j, t_{j+1}] in y = t_n − τ
                let (w_left, w_right) = self.hat_weights(tn - t[j + 1], tn - t[j]);
                rhs -= w_left * g[j] + w_right * g[j + 1];
            }
            let (w_left, w_right) = self.hat_weights(0.0, tn - t[n - 1]);
            rhs -= w_left * g[n - 1];
            let gn = rhs / w_right;
            if !(gn > 0.0 && gn.is_finite()) {
                return Err(Error::QuadratureFailure(format!(
                    "renewal solve broke down at t={tn}: {gn}"
                )));
            }
            g.push(gn);
        }
        Ok(Table {
            ln_t: t.iter().map(|v| v.ln()).collect(),
            ln_g: g.iter().map(|v| v.ln()).collect(),
        })
    }

    /// Richardson combination of two solves, the coarse one on every other
    /// node of the fine one; the scheme is second order in the node spacing.
    fn extrapolate(&self) -> Result<(Table, f64)> {
        let fine = self.solve(1.0 / 256.0, 1.01)?;
        let coarse = self.solve(1.0 / 128.0, 1.01f64 * 1.01)?;
        // correction (f − c)/3 in log form at the coarse nodes
        let mut spread = 0.0f64;
        let end = fine.ln_t[fine.ln_t.len() - 1];
        let keep = coarse.ln_t.partition_point(|&x| x <= end);
        let correction: Vec<f64> = coarse.ln_t[..keep]
            .iter()
            .zip(&coarse.ln_g)
            .map(|(&x, &c)| {
                let f = fine.interp(x.exp());
                let c = c.exp();
                spread = spread.max(((f - c) / (3.0 * f)).abs());
                ((4.0 * f - c) / (3.0 * f)).ln()
            })
            .collect();
        let corr = Table {
            ln_t: coarse.ln_t[..keep].to_vec(),
            ln_g: correction,
        };
        let ln_g = fine
            .ln_t
            .iter()
            .zip(&fine.ln_g)
            .map(|(&x, &y)| y + corr.interp(x.exp()).ln())
            .collect();
        Ok((
            Table {
                ln_t: fine.ln_t,
                ln_g,
            },
            spread,
        ))
    }

    fn table(&self) -> &Table {
        &self
            .table
            .get_or_init(|| self.extrapolate().expect("mixed-power renewal solve"))
            .0
    }

    /// μ̄(s).
    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return f64::INFINITY;
        }
        if s <= 1.0 {
            return self.abel * s.powf(-self.a1);
        }
        let tab = self.table();
        if s > S_MAX {
            let last = tab.ln_g[tab.ln_g.len() - 1].exp();
            return last * (s / S_MAX).powf(-self.a2);
        }
        tab.interp(s)
    }

    /// Relative error indicator of the unextrapolated fine solve, which bounds
    /// that of the extrapolated table.
    pub fn relative_error(&self) -> f64 {
        self.table();
        self.table.get().map_or(f64::INFINITY, |t| t.1)
    }
}

/// φ(λ) = 1/(λ^{−a₁}γ(a₁,λ) + λ^{−a₂}Γ(a₂,λ)) with a_i = α_i/2.
pub fn mixed_power(alpha1: f64, alpha2: f64) -> Result<BernsteinFunction> {
    if !(alpha1 > 0.0 && alpha1 < alpha2 && alpha2 < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "mixed power needs 0 < α₁ < α₂ < 2, got α₁={alpha1}, α₂={alpha2}"
        )));
    }
    let (a1, a2) = (0.5 * alpha1, 0.5 * alpha2);
    let tail = Arc::new(MixedTail::new(a1, a2));
    let t = tail.clone();
    let measure = Measure::Density {
        density: None,
        tail: Some(Arc::new(move |s: f64| t.eval(s))),
        scale: 1.0,
    };
    let phi = move |l: f64| {
        if l <= 0.0 {
            return Estimate::ZERO;
        }
        let eta = l.powf(-a1) * lower_gamma(a1, l) + l.powf(-a2) * upper_gamma(a2, l);
        let v = 1.0 / eta;
        Estimate::new(v, 1e-13 * v)
    };
    Ok(BernsteinFunction::new(
        format!("mixed-power({alpha1},{alpha2})"),
        phi,
        0.0,
        measure,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_matches_laplace_transform_of_u() {
        let phi = mixed_power(0.5, 1.5).unwrap();
        for &l in &[1e-3, 0.5, 3.0, 100.0] {
            let u = |r: f64| r.powf(-0.75).max(r.powf(-0.25));
            let tol = Tolerance::new(1e-300, 1e-13);
            let lu = integrate_points(|r| (-l * r).exp() * u(r), &[0.0, 1.0, f64::INFINITY], tol)
                .unwrap();
            assert!((phi.value(l) * lu.value - 1.0).abs() < 1e-10, "λ={l}");
        }
    }

    #[test]
    fn tail_reproduces_phi() {
        let phi = mixed_power(0.5, 1.5).unwrap();
        for &l in &[1e-6, 1e-3, 0.1, 1.0, 10.0, 1e4] {
            let m = phi.measure().laplace_exponent(l).unwrap();
            let want = phi.value(l);
            assert!(
                (m.value - want).abs() < 1e-6 * want,
                "λ={l}: {} vs {want}",
                m.value
            );
        }
    }

    #[test]
    fn tail_solves_renewal_equation() {
        let tail = MixedTail::new(0.25, 0.75);
        let tol = Tolerance::new(1e-12, 1e-10).with_budget(20000);
        for &t in &[1.5, 7.0, 300.0] {
            // y = t − s ∈ (0, 1) with y = v^{1/a₁}, then y ∈ (1, t)
            let near =
                integrate_points(|v: f64| tail.eval(t - v.powf(4.0)) / 0.25, &[0.0, 1.0], tol)
                    .unwrap();
            let mut pts: Vec<f64> = [1.0, t - 1.0, t]
                .into_iter()
                .filter(|&y| y >= 1.0)
                .collect();
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let far = integrate_points(|y: f64| tail.u(y) * tail.eval(t - y), &pts, tol).unwrap();
            let v = near.value + far.value;
            assert!((v - 1.0).abs() < 1e-6, "t={t}: {v}");
        }
        assert!(tail.relative_error() < 5e-5, "{}", tail.relative_error());
    }

    #[test]
    fn tail_is_decreasing() {
        let tail = MixedTail::new(0.25, 0.75);
        let mut prev = f64::INFINITY;
        for i in -40..=120 {
            let s = 10f64.powf(i as f64 / 10.0);
            let v = tail.eval(s);
            assert!(v < prev, "s={s}");
            prev = v;
        }
    }

    #[test]
    fn rejects_bad_order() {
        assert!(mixed_power(1.5, 0.5).is_err());
    }
}
