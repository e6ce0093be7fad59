use hybrid_mg::ilc::{concatenator_tf, design_omegas, min_cutoff};
use hybrid_mg::subgrid::{design_droop, SubgridKind, SubgridSpec};
use proptest::prelude::*;

fn band_spec(kind: SubgridKind, x_max: f64, band: f64) -> SubgridSpec {
    let mut s = SubgridSpec::reference(kind);
    s.x_max = x_max;
    s.x_min = x_max * (1.0 - band);
    s.x_nominal = s.x_min;
    design_droop(&s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn concatenator_gains(
        w0 in 1e-4f64..1.0,
        bands in prop::array::uniform3(0.005f64..0.2),
        maxes in prop::array::uniform3(10.0f64..1000.0),
        mult in prop::collection::vec(100.0f64..1e6, 8),
    ) {
        let specs: Vec<SubgridSpec> =
            (0..3).map(|i| band_spec(SubgridKind::ALL[i], maxes[i], bands[i])).collect();
        let c = design_omegas(w0, &specs[0], &specs[1], &specs[2]).unwrap();
        for k in SubgridKind::ALL {
            let t = concatenator_tf(&c, k);
            let wx = c.omega(k);
            let dc = t.freq_response(0.0).unwrap().norm();
            prop_assert!((dc - wx / w0).abs() <= 1e-12 * dc);
            let spec = &specs[k.index()];
            prop_assert!((dc - spec.x_max / spec.range()).abs() <= 1e-9 * dc);
            for m in &mult {
                let g = t.freq_response(m * wx).unwrap().norm();
                prop_assert!((0.99..=1.01).contains(&g), "{}", g);
            }
        }
    }

    #[test]
    fn cutoff_bound_monotone(ts in 1e-6f64..1e-2, m in 1.0f64..10.0, dt in 0.0f64..1e-3, dm in 0.0f64..5.0) {
        let base = min_cutoff(ts, m);
        prop_assert!(min_cutoff(ts + dt, m) <= base);
        prop_assert!(min_cutoff(ts, m + dm) >= base);
    }
}
