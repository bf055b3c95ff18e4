//! The measure μ(ds) = s^{−γ}F(ds), F the standard Cantor measure on [0,1]
//! and γ = α/2 + log 2/log 3.
//!
//! Both φ and the subordinated Lévy density are evaluated through the
//! self-similarity F = ½F(3·) + ½F(3· − 2). The contributions of the right
//! half [2/3, 1] are smooth and are integrated with a leaf rule: at depth n
//! every Cantor interval of width w = 3^{−n} carries two nodes at its centre
//! ± w/√8, matching the mass, mean and variance of F restricted to it.

use crate::quadrature::Estimate;

const LEAF_DEPTH: u32 = 8;
const TAYLOR_TERMS: usize = 30;
const LN3: f64 = 1.098_612_288_668_109_8;

#[derive(Debug, Clone)]
pub struct CantorMeasure {
    alpha: f64,
    gamma: f64,
    nodes: Vec<f64>,
    moments: Vec<f64>,
    r_inf: f64,
}

/// Two-point leaf nodes of F at the given depth.
fn leaf_nodes(depth: u32) -> Vec<f64> {
    let w = 3f64.powi(-(depth as i32));
    let off = w / 8f64.sqrt();
    let leaves = 1usize << depth;
    let mut out = Vec::with_capacity(2 * leaves);
    for mask in 0..leaves {
        let mut left = 0.0;
        let mut scale = 1.0 / 3.0;
        for bit in (0..depth).rev() {
            if mask >> bit & 1 == 1 {
                left += 2.0 * scale;
            }
            scale /= 3.0;
        }
        let c = left + 0.5 * w;
        out.push(c - off);
        out.push(c + off);
    }
    out
}

impl CantorMeasure {
    pub fn new(alpha: f64) -> Self {
        let gamma = 0.5 * alpha + 2f64.ln() / LN3;
        let nodes = leaf_nodes(LEAF_DEPTH);
        let mut m = CantorMeasure {
            alpha,
            gamma,
            nodes,
            moments: Vec::new(),
            r_inf: 0.0,
        };
        m.moments = (1..=TAYLOR_TERMS)
            .map(|n| m.moment(n as f64 - gamma))
            .collect();
        m.r_inf = 0.5 * m.upper_half(|r| r.powf(-gamma));
        m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// ∫ g((x+2)/3) F(dx): the right half of the Cantor set, rescaled.
    fn upper_half<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let s: f64 = self.nodes.iter().map(|&x| g((x + 2.0) / 3.0)).sum();
        s / self.nodes.len() as f64
    }

    /// ∫ x^s F(dx) for s > −log 2/log 3.
    pub fn moment(&self, s: f64) -> f64 {
        0.5 * self.upper_half(|r| r.powf(s)) / (1.0 - 0.5 * 3f64.powf(-s))
    }

    /// φ(λ) = ∫(1 − e^{−λs}) s^{−γ} F(ds).
    pub fn phi(&self, lambda: f64) -> Estimate {
        if lambda <= 0.0 {
            return Estimate::ZERO;
        }
        // φ(λ) = 3^{α/2} φ(λ/3) + R(λ), R(λ) = ½∫G_λ((x+2)/3)dF, G_λ(r) = (1 − e^{−λr}) r^{−γ}
        let q = (0.5 * self.alpha * LN3).exp();
        let mut acc = 0.0;
        let mut mult = 1.0;
        let mut l = lambda;
        while l > 1.0 {
            let r = if l > 60.0 {
                self.r_inf
            } else {
                let g = self.gamma;
                0.5 * self.upper_half(|r| -(-l * r).exp_m1() * r.powf(-g))
            };
            acc += mult * r;
            mult *= q;
            l /= 3.0;
        }
        let v = acc + mult * self.taylor(l);
        Estimate::new(v, 1e-12 * v)
    }

    fn taylor(&self, lambda: f64) -> f64 {
        let mut term = 1.0;
        let mut s = 0.0;
        for (n, m) in self.moments.iter().enumerate() {
            term *= lambda / (n + 1) as f64;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * term * m;
        }
        s
    }

    /// Independent evaluation of ∫(1 − e^{−λs}) s^{−γ} F(ds) by a deep leaf sum
    /// (no self-similarity). Used as a consistency check on [`Self::phi`].
    pub fn laplace_exponent_direct(&self, lambda: f64) -> Estimate {
        let depth: i32 = 14;
        let nodes = leaf_nodes(depth as u32);
        let g = self.gamma;
        let v: f64 = nodes
            .iter()
            .map(|&x| -(-lambda * x).exp_m1() * x.powf(-g))
            .sum::<f64>()
            / nodes.len() as f64;
        // the leaf at the origin carries most of the error: its mass is 2^{−depth}
        let w = 3f64.powi(-depth);
        let first = lambda.min(1.0 / w) * w.powf(1.0 - g) * 0.5f64.powi(depth);
        Estimate::new(v, first + 1e-10 * v.abs())
    }

    /// ∫ (4πs)^{−d/2} e^{−r²/(4s)} s^{−γ} F(ds).
    pub fn subordinate(&self, d: usize, r: f64) -> Estimate {
        // I(r) = 3^{(d+α)/2} I(√3 r) + ½∫k_r((x+2)/3)((x+2)/3)^{−γ} dF
        let dd = d as f64;
        let g = self.gamma;
        let q = (0.5 * (dd + self.alpha) * LN3).exp();
        let four_pi = 4.0 * std::f64::consts::PI;
        let kernel = |rho2: f64, s: f64| {
            (four_pi * s).powf(-0.5 * dd) * s.powf(-g) * (-rho2 / (4.0 * s)).exp()
        };
        let mut acc = 0.0;
        let mut mult = 1.0;
        let mut rho2 = r * r;
        for _ in 0..400 {
            // bound on I(ρ) from the maximum of the kernel over (0, 1]
            let p = 0.5 * dd + g;
            let s_star = (rho2 / (4.0 * p)).min(1.0);
            let bound = if s_star > 0.0 {
                kernel(rho2, s_star)
            } else {
                f64::INFINITY
            };
            // past the kernel peak the terms only shrink; stop once they underflow
            if (acc > 0.0 && mult * bound < 1e-17 * acc) || (s_star == 1.0 && mult * bound < 1e-300)
            {
                break;
            }
            let rr = rho2;
            acc += mult * 0.5 * self.upper_half(|s| kernel(rr, s));
            mult *= q;
            rho2 *= 3.0;
        }
        Estimate::new(acc, 1e-11 * acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaf_rule_reproduces_cantor_moments() {
        let c = CantorMeasure::new(1.0);
        // mean 1/2, second moment 3/8
        assert!((c.moment(1.0) - 0.5).abs() < 1e-14);
        assert!((c.moment(2.0) - 0.375).abs() < 1e-14);
        assert!((c.moment(0.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn recursion_agrees_with_direct_sum() {
        let c = CantorMeasure::new(1.0);
        for &l in &[0.01, 0.7, 1.5, 10.0, 200.0, 3e4] {
            let a = c.phi(l);
            let b = c.laplace_exponent_direct(l);
            assert!(
                (a.value - b.value).abs() <= b.error + a.error + 1e-9 * a.value,
                "λ={l}: {a:?} {b:?}"
            );
        }
    }

    #[test]
    fn phi_is_comparable_to_power_min_linear() {
        let c = CantorMeasure::new(1.0);
        for i in -8..=16 {
            let l = 10f64.powi(i);
            let ratio = c.phi(l).value / l.sqrt().min(l);
            assert!(ratio > 0.05 && ratio < 20.0, "λ={l} ratio={ratio}");
        }
    }

    #[test]
    fn subordinated_density_decreases() {
        let c = CantorMeasure::new(1.0);
        let mut prev = f64::INFINITY;
        for i in -30..=10 {
            let r = 10f64.powf(i as f64 / 10.0);
            let v = c.subordinate(1, r).value;
            assert!(v > 0.0 && v < prev, "r={r}");
            prev = v;
        }
    }
}
