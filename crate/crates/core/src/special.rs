//! Special functions: gamma, incomplete gamma, unit-sphere area and the
//! Bessel functions J0/J1 used by the radial Fourier kernels.

use std::f64::consts::{FRAC_PI_4, PI};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments (reflection below 1/2).
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x == x.floor() && x <= 171.0 {
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return acc;
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Natural log of |Γ(x)| for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument");
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Series for γ(a, x); accurate for x < a + 1.
fn lower_gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = 1.0;
    while n < 10_000.0 {
        term *= x / (a + n);
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
        n += 1.0;
    }
    (a * x.ln() - x).exp() * sum
}

/// Modified Lentz continued fraction for Γ(a, x); accurate for x ≥ a + 1.
fn upper_gamma_cf(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (a * x.ln() - x).exp() * h
}

/// Lower incomplete gamma γ(a, x) = ∫₀ˣ e^{-u} u^{a-1} du, a > 0.
pub fn lower_gamma(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "lower_gamma requires a > 0");
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        lower_gamma_series(a, x)
    } else {
        gamma(a) - upper_gamma_cf(a, x)
    }
}

/// Upper incomplete gamma Γ(a, x) = ∫ₓ^∞ e^{-u} u^{a-1} du, a > 0.
pub fn upper_gamma(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "upper_gamma requires a > 0");
    if x <= 0.0 {
        return gamma(a);
    }
    if x < a + 1.0 {
        gamma(a) - lower_gamma_series(a, x)
    } else {
        upper_gamma_cf(a, x)
    }
}

/// Surface measure of the unit sphere in R^d, ω_d = 2π^{d/2}/Γ(d/2).
///
/// ω_0 = 2 counts the two points of the zero-sphere.
pub fn sphere_area(d: usize) -> f64 {
    if d == 0 {
        return 2.0;
    }
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// (J0(z), J1(z)) evaluated together.
///
/// Power series for |z| ≤ 4, Miller backward recurrence normalised by
/// J0 + 2ΣJ_{2k} = 1 for 4 < |z| ≤ 25, Hankel asymptotics beyond.
pub fn bessel_j01(z: f64) -> (f64, f64) {
    let ax = z.abs();
    let (j0, j1) = if ax <= 4.0 {
        bessel_series(ax)
    } else if ax <= 25.0 {
        bessel_miller(ax)
    } else {
        bessel_hankel(ax)
    };
    (j0, if z < 0.0 { -j1 } else { j1 })
}

pub fn bessel_j0(z: f64) -> f64 {
    bessel_j01(z).0
}

pub fn bessel_j1(z: f64) -> f64 {
    bessel_j01(z).1
}

fn bessel_series(x: f64) -> (f64, f64) {
    let q = -0.25 * x * x;
    let mut t0 = 1.0;
    let mut t1 = 1.0;
    let mut s0 = 1.0;
    let mut s1 = 1.0;
    for k in 1..60 {
        let k = k as f64;
        t0 *= q / (k * k);
        t1 *= q / (k * (k + 1.0));
        s0 += t0;
        s1 += t1;
        if t0.abs() < 1e-18 && t1.abs() < 1e-18 {
            break;
        }
    }
    (s0, 0.5 * x * s1)
}

fn bessel_miller(x: f64) -> (f64, f64) {
    let mut n = (x as usize) + 40;
    if n % 2 == 1 {
        n += 1;
    }
    let mut j_next = 0.0;
    let mut j_cur = 1e-30;
    let mut norm = 0.0;
    let mut j1 = 0.0;
    for k in (1..=n).rev() {
        let j_prev = 2.0 * k as f64 / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{k-1}
        if k - 1 == 1 {
            j1 = j_cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += j_cur;
    (j_cur / norm, j1 / norm)
}

fn hankel_pq(mu: f64, x: f64) -> (f64, f64) {
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    let mut k = 1;
    loop {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * eight_x);
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        k += 1;
        if k > 200 {
            break;
        }
    }
    (p, q)
}

fn bessel_hankel(x: f64) -> (f64, f64) {
    let amp = (2.0 / (PI * x)).sqrt();
    let (s, c) = x.sin_cos();
    let (p0, q0) = hankel_pq(0.0, x);
    let (p1, q1) = hankel_pq(4.0, x);
    // phases x - π/4 and x - 3π/4
    let r = FRAC_PI_4.cos();
    let (c0, s0) = (r * (c + s), r * (s - c));
    let (c1, s1) = (r * (s - c), -r * (s + c));
    let j0 = amp * (p0 * c0 - q0 * s0);
    let j1 = amp * (p1 * c1 - q1 * s1);
    (j0, j1)
}

/// k-th positive zero of J0 (k ≥ 1): McMahon start refined by Newton.
pub fn bessel_j0_zero(k: usize) -> f64 {
    assert!(k >= 1);
    let beta = (k as f64 - 0.25) * PI;
    let b8 = 8.0 * beta;
    let mut z = beta + 1.0 / b8 - 124.0 / (3.0 * b8.powi(3)) + 120_928.0 / (15.0 * b8.powi(5));
    for _ in 0..6 {
        let (j0, j1) = bessel_j01(z);
        let step = j0 / j1;
        z += step;
        if step.abs() < 1e-15 * z {
            break;
        }
    }
    z
}

/// k-th positive zero of J1 (k ≥ 1), excluding z = 0.
pub fn bessel_j1_zero(k: usize) -> f64 {
    assert!(k >= 1);
    let beta = (k as f64 + 0.25) * PI;
    let b8 = 8.0 * beta;
    let mut z = beta - 3.0 / b8 + 36.0 / b8.powi(3);
    for _ in 0..8 {
        let (j0, j1) = bessel_j01(z);
        let step = j1 / (j0 - j1 / z);
        z -= step;
        if step.abs() < 1e-15 * z {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma(1.5) - 0.5 * PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma(5.0), 24.0);
        assert!((gamma(7.5) / 1_871.254_305_797_788_7 - 1.0).abs() < 1e-14);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-14);
        assert!((ln_gamma(30.0) - 71.257_038_967_168_01).abs() < 1e-12);
    }

    #[test]
    fn incomplete_gamma_partition() {
        for &a in &[0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 10.0] {
            for &x in &[1e-6, 0.01, 0.25, 1.0, 2.5, 7.0, 30.0] {
                let sum = lower_gamma(a, x) + upper_gamma(a, x);
                assert!((sum / gamma(a) - 1.0).abs() < 1e-14, "a={a} x={x}");
            }
        }
    }

    #[test]
    fn incomplete_gamma_closed_forms() {
        for &x in &[0.1, 1.0, 3.0, 12.0] {
            assert!((lower_gamma(1.0, x) - (1.0 - (-x).exp())).abs() < 1e-15);
            assert!((upper_gamma(2.0, x) - (1.0 + x) * (-x).exp()).abs() < 1e-15);
        }
        // Γ(1/2, 1/4) = √π erfc(1/2)
        let erfc_half = 0.479_500_122_186_953_5;
        assert!((upper_gamma(0.5, 0.25) / (PI.sqrt() * erfc_half) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-15);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn bessel_reference_values() {
        // values from standard tables
        let cases = [
            (0.5, 0.938_469_807_240_812_9, 0.242_268_457_674_873_89),
            (3.9, -0.401_826_014_887_639_91, -0.027_244_039_620_779_891),
            (4.1, -0.388_669_679_835_853_72, -0.103_273_257_747_338_57),
            (10.0, -0.245_935_764_451_348_34, 0.043_472_746_168_861_437),
            (24.0, -0.056_230_274_166_859_267, -0.154_038_065_183_121_22),
            (26.0, 0.155_999_315_522_421_13, 0.015_045_730_586_915_811),
            (100.0, 0.019_985_850_304_223_122, -0.077_145_352_014_112_158),
        ];
        for (z, j0, j1) in cases {
            let (a, b) = bessel_j01(z);
            assert!((a - j0).abs() < 2e-15, "J0({z}) = {a}, want {j0}");
            assert!((b - j1).abs() < 2e-15, "J1({z}) = {b}, want {j1}");
        }
    }

    #[test]
    fn bessel_regimes_join() {
        let (s, m) = (bessel_series(4.0), bessel_miller(4.0));
        assert!((s.0 - m.0).abs() < 1e-15 && (s.1 - m.1).abs() < 1e-15);
        let (m, h) = (bessel_miller(25.0), bessel_hankel(25.0));
        assert!((m.0 - h.0).abs() < 1e-15 && (m.1 - h.1).abs() < 1e-15);
        assert!((h.0 - 0.096_266_783_275_958_116).abs() < 1e-15);
        assert!((h.1 + 0.125_350_249_580_289_905).abs() < 1e-15);
    }

    #[test]
    fn j0_zeros() {
        let known = [
            2.404_825_557_695_773,
            5.520_078_110_286_311,
            8.653_727_912_911_013,
        ];
        for (k, z) in known.iter().enumerate() {
            assert!((bessel_j0_zero(k + 1) - z).abs() < 1e-13);
        }
        for k in [10, 40, 200] {
            assert!(bessel_j0(bessel_j0_zero(k)).abs() < 1e-14);
        }
    }

    #[test]
    fn j1_zeros() {
        let known = [
            3.831_705_970_207_512,
            7.015_586_669_815_619,
            10.173_468_135_062_722,
        ];
        for (k, z) in known.iter().enumerate() {
            assert!((bessel_j1_zero(k + 1) - z).abs() < 1e-13);
        }
        for k in [10, 100, 1000] {
            assert!(bessel_j1(bessel_j1_zero(k)).abs() < 1e-14);
        }
    }
}
