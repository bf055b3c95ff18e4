use proptest::prelude::*;

use levy_bounds::bounds::{density_envelope, tail_bounds};
use levy_bounds::exponents::{CatalogEntry, DEFAULT_IDS};
use levy_bounds::harness::{entry_certificates, Axis};
use levy_bounds::oracle::{cauchy_tail, DensityOracle};
use levy_bounds::quadrature::{integrate_points, Tolerance};
use levy_bounds::scaling::GridSpec;
use levy_bounds::special::sphere_area;

fn oracle(id: &str) -> DensityOracle {
    DensityOracle::new(&CatalogEntry::from_id(id).unwrap().exponent).unwrap()
}

#[test]
fn densities_are_radially_nonincreasing() {
    let rs = Axis::new(1e-2, 1e1, 64).nodes();
    let ids = DEFAULT_IDS
        .iter()
        .map(|s| s.to_string())
        .chain(["stable:a=1.2:d=2".to_string()]);
    for id in ids {
        let o = oracle(&id);
        let vals: Vec<f64> = rs
            .iter()
            .map(|&r| o.density(1.0, r).unwrap().value)
            .collect();
        for (k, w) in vals.windows(2).enumerate() {
            // the last digits of tiny values are quadrature noise
            assert!(
                w[1] <= w[0] * (1.0 + 1e-8) + 1e-14,
                "{id}: p(1, {}) = {} > {}",
                rs[k + 1],
                w[1],
                w[0]
            );
        }
    }
}

#[test]
fn semigroup_at_the_origin() {
    // p_{2t}(0) = ∫ p_t(x)² dx = ω_d ∫ p_t(r)² r^{d−1} dr
    for (id, d) in [
        ("stable:a=1.5:d=1", 1),
        ("stable:a=1.0:d=3", 3),
        ("stable:a=0.8:d=2", 2),
    ] {
        let o = oracle(id);
        let t = 0.5;
        let f = |r: f64| {
            let p = o.density(t, r).unwrap().value;
            p * p * r.powi(d - 1)
        };
        let pts = [0.0, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0, f64::INFINITY];
        let conv = integrate_points(f, &pts, Tolerance::new(1e-14, 1e-8))
            .unwrap()
            .value
            * sphere_area(d as usize);
        let direct = o.density_at_zero(2.0 * t).unwrap().value;
        assert!(
            (conv / direct - 1.0).abs() < 1e-4,
            "{id}: {conv} vs {direct}"
        );
    }
}

#[test]
fn origin_by_both_routes() {
    for id in [
        "stable:a=0.5:d=1",
        "mixed:a1=0.5:a2=1.5:d=1",
        "stable:a=1.0:d=3",
    ] {
        let o = oracle(id);
        for t in [0.01, 1.0, 100.0] {
            let a = o.density_at_zero(t).unwrap();
            let b = o.density(t, 0.0).unwrap();
            assert!((a.value - b.value).abs() <= a.error + b.error + 1e-15 * a.value);
            // continuity at the origin
            let near = o.density(t, 1e-9 * t).unwrap();
            assert!((near.value / a.value - 1.0).abs() < 1e-6, "{id} t={t}");
        }
    }
}

#[test]
fn tail_envelope_contains_tail_probability() {
    for id in [
        "stable:a=1.0:d=1",
        "stable:a=1.5:d=1",
        "logstable:a=1.0:b=0.4:g=1.0:d=1",
        "stable:a=1.0:d=3",
    ] {
        let e = CatalogEntry::from_id(id).unwrap();
        let (lo, up) = entry_certificates(&e, GridSpec::default()).unwrap();
        let env = density_envelope(&e.exponent, lo.as_ref(), up.as_ref()).unwrap();
        let theta_upper = up.as_ref().map_or(0.0, |c| c.theta);
        let o = DensityOracle::new(&e.exponent).unwrap();
        for t in [1e-2, 1.0, 1e2] {
            for r in [1e-2, 1.0, 1e2] {
                let p = o.tail_probability(t, r).unwrap();
                let b = tail_bounds(&e.exponent, env.ledger(), theta_upper, t, r);
                assert!(p.value <= b.upper + p.error, "{id} t={t} r={r}");
                if let Some(l) = b.lower {
                    assert!(
                        p.value + p.error >= l,
                        "{id} t={t} r={r}: {} < {l}",
                        p.value
                    );
                }
            }
        }
    }
}

#[test]
fn tails_of_a_monotone_exponent_decrease() {
    let o = oracle("mixed:a1=0.5:a2=1.5:d=1");
    let rs = Axis::new(1e-3, 1e3, 25).nodes();
    let tails: Vec<f64> = rs
        .iter()
        .map(|&r| o.tail_probability(1.0, r).unwrap().value)
        .collect();
    assert!(tails.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{tails:?}");
    // near the origin P(|X| ≥ r) ≈ 1 − 2r p(0)
    let p0 = o.density_at_zero(1.0).unwrap().value;
    assert!(
        ((1.0 - tails[0]) / (2.0 * rs[0] * p0) - 1.0).abs() < 1e-2,
        "{} vs p(0) = {p0}",
        tails[0]
    );
    assert!(tails[24] < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cauchy_tail_is_a_probability(lt in -2.0f64..2.0, lr in -3.0f64..3.0, d in 1usize..=3) {
        let (t, r) = (10f64.powf(lt), 10f64.powf(lr));
        let o = oracle(&format!("stable:a=1.0:d={d}"));
        let p = o.tail_probability(t, r).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p - cauchy_tail(d, t, r).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn stable_density_scales(lt in -1.5f64..1.5, lr in -1.5f64..1.5, a in 0.4f64..1.9) {
        // p_t(r) = t^{−1/α} p_1(r t^{−1/α}) in d = 1
        let id = format!("stable:a={a}:d=1");
        let o = oracle(&id);
        let (t, r) = (10f64.powf(lt), 10f64.powf(lr));
        let s = t.powf(-1.0 / a);
        let lhs = o.density(t, r).unwrap();
        let rhs = o.density(1.0, r * s).unwrap();
        prop_assert!(lhs.value >= 0.0);
        prop_assert!((lhs.value - s * rhs.value).abs() <= 1e-8 * lhs.value + lhs.error + s * rhs.error + 1e-300);
    }

    #[test]
    fn laplace_of_tail_is_bounded_by_its_mean(lt in -2.0f64..2.0, ll in -3.0f64..3.0) {
        // 0 ≤ λℒf_t(λ) ≤ 1 for a tail function f_t ≤ 1
        let o = oracle("stable:a=1.5:d=1");
        let l = 10f64.powf(ll);
        let v = l * o.laplace_of_tail(10f64.powf(lt), l).unwrap().value;
        prop_assert!(v >= 0.0 && v <= 1.0 + 1e-12);
    }
}
