//! Adaptive Gauss-Kronrod quadrature with error estimates.
//!
//! Integrals are split at caller-supplied breakpoints and refined globally:
//! the panel with the largest error estimate is bisected until the summed
//! error meets the tolerance or the panel budget runs out. A trailing
//! breakpoint of `f64::INFINITY` maps the last piece onto `(0, 1]` with
//! `x = p + c (1 - s) / s`, which keeps power-law tails smooth.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: 0.0,
        error: 0.0,
    };

    pub fn new(value: f64, error: f64) -> Self {
        Estimate {
            value,
            error: error.abs(),
        }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            self.error
        } else {
            self.error / self.value.abs()
        }
    }

    /// Multiply by a positive-or-negative scalar, scaling the error.
    pub fn scale(self, k: f64) -> Self {
        Estimate {
            value: self.value * k,
            error: self.error * k.abs(),
        }
    }
}

impl Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value + o.value,
            error: self.error + o.error,
        }
    }
}

impl AddAssign for Estimate {
    fn add_assign(&mut self, o: Estimate) {
        self.value += o.value;
        self.error += o.error;
    }
}

impl Sub for Estimate {
    type Output = Estimate;
    fn sub(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value - o.value,
            error: self.error + o.error,
        }
    }
}

impl Neg for Estimate {
    type Output = Estimate;
    fn neg(self) -> Estimate {
        Estimate {
            value: -self.value,
            error: self.error,
        }
    }
}

impl Mul<f64> for Estimate {
    type Output = Estimate;
    fn mul(self, k: f64) -> Estimate {
        self.scale(k)
    }
}

/// Absolute and relative accuracy targets plus a work budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-14,
            rel: 1e-10,
            max_panels: 2000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            ..Default::default()
        }
    }

    pub fn with_budget(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One 21-point Kronrod panel: (integral, error estimate, integral of |f|).
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = WGK[10] * fc;
    let mut rg = 0.0;
    let mut rabs = rk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        fv1[j] = f1;
        fv2[j] = f2;
        rk += WGK[j] * (f1 + f2);
        rabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * rk;
    let mut rasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        rasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = h.abs();
    let (rk, rabs, rasc) = (rk * h, rabs * h, rasc * h);
    let mut err = ((rk - rg * h) * 1.0).abs();
    if rasc != 0.0 && err != 0.0 {
        err = rasc * (200.0 * err / rasc).powf(1.5).min(1.0);
    }
    if rabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * rabs);
    }
    (rk, err, rabs)
}

struct Panel {
    piece: usize,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

enum Piece {
    Finite,
    Tail { p: f64, c: f64 },
}

/// Integrate `f` over `[points[0], points[last]]`, treating every interior
/// point as a breakpoint. The last point may be `f64::INFINITY`.
pub fn integrate_points<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    if points.len() < 2 {
        return Err(Error::QuadratureFailure(
            "need at least two breakpoints".into(),
        ));
    }
    let mut pieces = Vec::new();
    let mut spans = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(a <= b) || a.is_infinite() {
            return Err(Error::QuadratureFailure(format!("bad interval [{a}, {b}]")));
        }
        if a == b {
            continue;
        }
        if b.is_infinite() {
            let c = if a > 0.0 { a } else { 1.0 };
            pieces.push(Piece::Tail { p: a, c });
            spans.push((0.0, 1.0));
        } else {
            pieces.push(Piece::Finite);
            spans.push((a, b));
        }
    }
    let eval = |piece: usize, s: f64| -> f64 {
        match pieces[piece] {
            Piece::Finite => f(s),
            Piece::Tail { p, c } => {
                if s <= 0.0 {
                    return 0.0;
                }
                let x = p + c * (1.0 - s) / s;
                let v = f(x);
                if v == 0.0 {
                    0.0
                } else {
                    v * c / (s * s)
                }
            }
        }
    };
    adaptive(&eval, &spans, tol)
}

/// Integrate `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::ZERO);
    }
    if a > b {
        return integrate(f, b, a, tol).map(|e| -e);
    }
    integrate_points(f, &[a, b], tol)
}

/// Integrate `f` over `[a, ∞)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Result<Estimate> {
    integrate_points(f, &[a, f64::INFINITY], tol)
}

fn adaptive<G: Fn(usize, f64) -> f64>(
    g: &G,
    spans: &[(f64, f64)],
    tol: Tolerance,
) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let mut frozen = Estimate::ZERO;
    let mut frozen_abs = 0.0;
    let mut total = Estimate::ZERO;
    let mut total_abs = 0.0;
    for (piece, &(a, b)) in spans.iter().enumerate() {
        let (value, error, abs) = gk21(&|x| g(piece, x), a, b);
        total += Estimate { value, error };
        total_abs += abs;
        heap.push(Panel {
            piece,
            a,
            b,
            value,
            error,
            abs,
        });
    }
    check_finite(total)?;
    let mut panels = heap.len();
    loop {
        let floor = 50.0 * f64::EPSILON * total_abs;
        let target = tol.target(total.value).max(floor);
        if total.error <= target {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let tiny = (worst.b - worst.a)
            <= 1e3 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(1e-300);
        if panels >= tol.max_panels || tiny || mid <= worst.a || mid >= worst.b {
            if panels >= tol.max_panels {
                heap.push(worst);
                break;
            }
            frozen += Estimate {
                value: worst.value,
                error: worst.error,
            };
            frozen_abs += worst.abs;
            continue;
        }
        let p = worst.piece;
        let (v1, e1, a1) = gk21(&|x| g(p, x), worst.a, mid);
        let (v2, e2, a2) = gk21(&|x| g(p, x), mid, worst.b);
        total.value += v1 + v2 - worst.value;
        total.error += e1 + e2 - worst.error;
        total_abs += a1 + a2 - worst.abs;
        check_finite(total)?;
        heap.push(Panel {
            piece: p,
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            abs: a1,
        });
        heap.push(Panel {
            piece: p,
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            abs: a2,
        });
        panels += 1;
    }
    // re-sum from the panels to shed accumulated update roundoff
    let mut sum = frozen;
    let mut abs = frozen_abs;
    for pnl in heap.iter() {
        sum += Estimate {
            value: pnl.value,
            error: pnl.error,
        };
        abs += pnl.abs;
    }
    let floor = 50.0 * f64::EPSILON * abs;
    sum.error = sum.error.max(floor);
    let target = tol.target(sum.value).max(floor);
    if sum.error > 1e3 * target && sum.error > 1e-6 * abs {
        return Err(Error::QuadratureFailure(format!(
            "error estimate {:.3e} exceeds target {:.3e} after {} panels",
            sum.error, target, panels
        )));
    }
    Ok(sum)
}

fn check_finite(e: Estimate) -> Result<()> {
    if e.value.is_finite() && e.error.is_finite() {
        Ok(())
    } else {
        Err(Error::QuadratureFailure(
            "integrand produced a non-finite value".into(),
        ))
    }
}

/// Euler transform of an alternating-type series given as partial sums.
///
/// Repeated averaging of neighbouring partial sums; returns the accelerated
/// limit and the difference between the last two levels as an error proxy.
pub fn euler_limit(partial: &[f64]) -> Estimate {
    match partial.len() {
        0 => return Estimate::ZERO,
        1 => return Estimate::new(partial[0], partial[0].abs()),
        _ => {}
    }
    let mut row = partial.to_vec();
    let mut prev_top = *row.last().unwrap();
    let mut best = Estimate::new(prev_top, f64::INFINITY);
    while row.len() > 1 {
        let next: Vec<f64> = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let top = *next.last().unwrap();
        let diff = (top - prev_top).abs();
        if diff <= best.error {
            best = Estimate::new(top, diff);
        }
        prev_top = top;
        row = next;
    }
    best
}

/// Oscillating kernels used by the radial Fourier inversions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Cos,
    Sin,
    J0,
    J1,
}

impl Kernel {
    pub fn eval(self, z: f64) -> f64 {
        match self {
            Kernel::Cos => z.cos(),
            Kernel::Sin => z.sin(),
            Kernel::J0 => crate::special::bessel_j0(z),
            Kernel::J1 => crate::special::bessel_j1(z),
        }
    }

    /// k-th positive zero, k ≥ 1.
    pub fn zero(self, k: usize) -> f64 {
        use std::f64::consts::PI;
        match self {
            Kernel::Cos => (k as f64 - 0.5) * PI,
            Kernel::Sin => k as f64 * PI,
            Kernel::J0 => crate::special::bessel_j0_zero(k),
            Kernel::J1 => crate::special::bessel_j1_zero(k),
        }
    }
}

/// Controls for [`oscillatory`].
#[derive(Debug, Clone, Copy)]
pub struct OscillatoryOptions {
    /// Zero-to-zero segments summed directly before acceleration starts.
    pub direct: usize,
    /// Segments fed to the Euler transform.
    pub accelerated: usize,
    pub tol: Tolerance,
}

impl Default for OscillatoryOptions {
    fn default() -> Self {
        OscillatoryOptions {
            direct: 20,
            accelerated: 32,
            tol: Tolerance::new(1e-300, 1e-13),
        }
    }
}

/// `∫_a^∞ amp(u) K(u r) du` for a kernel with known zeros.
///
/// `cutoff` is a point beyond which `amp` is negligible (`∞` if unknown).
/// Segments between consecutive kernel zeros are integrated directly; if the
/// cutoff is not reached after `direct` of them, the remaining signed
/// segment integrals are summed with the Euler transform.
pub fn oscillatory<F: Fn(f64) -> f64>(
    amp: F,
    kernel: Kernel,
    r: f64,
    a: f64,
    cutoff: f64,
    opts: OscillatoryOptions,
) -> Result<Estimate> {
    let f = |u: f64| {
        let v = amp(u);
        if v == 0.0 {
            0.0
        } else {
            v * kernel.eval(u * r)
        }
    };
    if r == 0.0 {
        let pts: Vec<f64> = if cutoff.is_finite() {
            vec![a, cutoff]
        } else {
            vec![a, a.max(1.0) * 2.0, f64::INFINITY]
        };
        return integrate_points(f, &pts, opts.tol);
    }
    // first zero strictly after a
    // zeros are spaced by about π, so jump close to a before stepping
    let guess = (a * r / std::f64::consts::PI).floor() - 2.0;
    if !(guess < 1e15) {
        return Err(Error::QuadratureFailure(
            "start point too far into the oscillation".into(),
        ));
    }
    let mut k = (guess.max(1.0)) as usize;
    while k > 1 && kernel.zero(k) / r > a {
        k -= 1;
    }
    while kernel.zero(k) / r <= a {
        k += 1;
    }
    let mut total = Estimate::ZERO;
    let mut left = a;
    let mut segments = 0usize;
    loop {
        let right = kernel.zero(k) / r;
        if right >= cutoff {
            total += integrate(f, left, cutoff, opts.tol)?;
            return Ok(total);
        }
        total += integrate(f, left, right, opts.tol)?;
        left = right;
        k += 1;
        segments += 1;
        if segments >= opts.direct {
            break;
        }
    }
    let mut partial = Vec::with_capacity(opts.accelerated + 1);
    let mut acc = 0.0;
    let mut seg_err = 0.0;
    partial.push(acc);
    for _ in 0..opts.accelerated {
        let right = kernel.zero(k) / r;
        if right >= cutoff {
            let last = integrate(f, left, cutoff, opts.tol)?;
            return Ok(total + Estimate::new(acc + last.value, seg_err + last.error));
        }
        let s = integrate(f, left, right, opts.tol)?;
        acc += s.value;
        seg_err += s.error;
        partial.push(acc);
        left = right;
        k += 1;
    }
    let tail = euler_limit(&partial);
    Ok(total + Estimate::new(tail.value, tail.error + seg_err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let e = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, Tolerance::default()).unwrap();
        assert!((e.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let e = integrate(|x| x.powf(-0.5), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-9, "{e:?}");
        assert!(e.error < 1e-8);
    }

    #[test]
    fn heavy_tail() {
        let e = integrate_to_infinity(|x| x.powf(-1.5), 1.0, Tolerance::default()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-10);
        let g =
            integrate_points(|x| (-x).exp(), &[0.0, f64::INFINITY], Tolerance::default()).unwrap();
        assert!((g.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kink_breakpoint() {
        let e = integrate_points(
            |x: f64| (x - 0.3).abs(),
            &[0.0, 0.3, 1.0],
            Tolerance::default(),
        )
        .unwrap();
        assert!((e.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn non_finite_is_failure() {
        assert!(integrate(|_| f64::NAN, 0.0, 1.0, Tolerance::default()).is_err());
    }

    #[test]
    fn euler_alternating_harmonic() {
        let mut s = 0.0;
        let mut partial = vec![0.0];
        for k in 1..=30 {
            s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            partial.push(s);
        }
        let e = euler_limit(&partial);
        assert!((e.value - 2f64.ln()).abs() < 1e-10, "{e:?}");
    }

    #[test]
    fn dirichlet_integral() {
        // ∫_0^∞ sin(u)/u du = π/2, amplitude decays only like 1/u
        let e = oscillatory(
            |u: f64| 1.0 / u,
            Kernel::Sin,
            1.0,
            0.0,
            f64::INFINITY,
            Default::default(),
        )
        .unwrap();
        assert!((e.value - PI / 2.0).abs() < 1e-11, "{e:?}");
    }

    #[test]
    fn cauchy_fourier() {
        // (1/π)∫ e^{-u} cos(ur) du = 1/(π(1+r²))
        for &r in &[0.0, 0.01, 1.0, 100.0] {
            let e = oscillatory(
                |u: f64| (-u).exp(),
                Kernel::Cos,
                r,
                0.0,
                40.0,
                Default::default(),
            )
            .unwrap();
            let want = 1.0 / (1.0 + r * r);
            assert!(
                (e.value - want).abs() < 1e-12 * want.max(1e-3),
                "r={r} {e:?}"
            );
        }
    }

    #[test]
    fn hankel_exponential() {
        // ∫ e^{-u} J0(ur) u du = (1+r²)^{-3/2}
        for &r in &[0.5, 3.0, 40.0] {
            let e = oscillatory(
                |u: f64| u * (-u).exp(),
                Kernel::J0,
                r,
                0.0,
                50.0,
                Default::default(),
            )
            .unwrap();
            let want = (1.0 + r * r).powf(-1.5);
            assert!(
                (e.value - want).abs() < 1e-10 * want,
                "r={r} {e:?} want {want}"
            );
        }
    }
}
