use std::sync::OnceLock;

use proptest::prelude::*;

use levy_bounds::bounds::{density_envelope, BoundEnvelope};
use levy_bounds::exponents::CatalogEntry;
use levy_bounds::harness::{entry_certificates, Axis, RunConfig};
use levy_bounds::scaling::GridSpec;

const IDS: [&str; 3] = [
    "stable:a=1.5:d=1",
    "logstable:a=1.0:b=0.4:g=1.0:d=1",
    "stable:a=0.5:d=3",
];

fn entry(k: usize) -> &'static CatalogEntry {
    static E: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    &E.get_or_init(|| {
        IDS.iter()
            .map(|id| CatalogEntry::from_id(id).unwrap())
            .collect()
    })[k]
}

fn envelope(k: usize) -> &'static BoundEnvelope {
    static B: OnceLock<Vec<BoundEnvelope>> = OnceLock::new();
    &B.get_or_init(|| {
        (0..IDS.len())
            .map(|k| {
                let e = entry(k);
                let (lo, up) = entry_certificates(e, GridSpec::default()).unwrap();
                density_envelope(&e.exponent, lo.as_ref(), up.as_ref()).unwrap()
            })
            .collect()
    })[k]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn star_dominates_and_grows(k in 0usize..3, lu in -4.0f64..4.0, step in 0.0f64..2.0) {
        let psi = &entry(k).exponent;
        let (u, v) = (10f64.powf(lu), 10f64.powf(lu + step));
        prop_assert!(psi.star(u) >= psi.psi(u) * (1.0 - 1e-12));
        prop_assert!(psi.star(v) >= psi.star(u) * (1.0 - 1e-12));
    }

    #[test]
    fn inverse_undoes_psi(k in 0usize..3, lu in -3.0f64..3.0) {
        // all three exponents are increasing, so ψ⁻ is a true inverse
        let psi = &entry(k).exponent;
        let u = 10f64.powf(lu);
        prop_assert!((psi.inverse(psi.psi(u)) / u - 1.0).abs() < 1e-8);
    }

    #[test]
    fn envelope_is_ordered(k in 0usize..3, lt in -2.0f64..2.0, lr in -2.0f64..2.0, step in 0.0f64..1.0) {
        let env = envelope(k);
        let (t, r) = (10f64.powf(lt), 10f64.powf(lr));
        let lower = env.lower(t, r).unwrap();
        prop_assert!(0.0 < lower && lower <= env.upper(t, r));
        // farther out the functional can only shrink
        prop_assert!(env.functional(t, r * 10f64.powf(step)) <= env.functional(t, r) * (1.0 + 1e-12));
        prop_assert!(env.upper(t, r) <= env.ledger().c_star_upper * env.diagonal(t) * (1.0 + 1e-12));
    }

    #[test]
    fn axis_nodes_are_increasing(lmin in -6.0f64..3.0, span in 0.1f64..6.0, count in 2usize..200) {
        let a = Axis::new(10f64.powf(lmin), 10f64.powf(lmin + span), count);
        let n = a.nodes();
        prop_assert_eq!(n.len(), count);
        prop_assert!(n.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!((n[0], n[count - 1]), (a.min, a.max));
    }

    #[test]
    fn config_text_sets_what_it_says(tc in 1usize..100, rmin in 1e-6f64..1.0, tol in 1e-14f64..1e-2) {
        let cfg = RunConfig::from_text(&format!("t-count = {tc}\nr-min = {rmin}\ntol = {tol}\n")).unwrap();
        prop_assert_eq!(cfg.t.count, tc);
        prop_assert_eq!(cfg.r.min, rmin);
        prop_assert_eq!(cfg.tol, tol);
    }
}
