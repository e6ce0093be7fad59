use hybrid_mg::config::HybridConfig;
use hybrid_mg::sim::{measure, measure_lenient, run, Event, Scenario, SimTrace, Toggles};
use hybrid_mg::subgrid::SubgridKind;
use proptest::prelude::*;

fn caps() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(10e3f64..40e3)
}

/// One load step per subgrid at `t = 1`, sized as a fraction of its capacity.
fn steps_for(cfg: &HybridConfig, frac: [f64; 3]) -> Vec<Event> {
    SubgridKind::ALL
        .iter()
        .map(|&k| Event { time: 1.0, subgrid: k, load_delta: frac[k.index()] * cfg.spec(k).p_max })
        .filter(|e| e.load_delta != 0.0)
        .collect()
}

fn scenario(horizon: f64, events: Vec<Event>) -> Scenario {
    Scenario { horizon, events, ..Scenario::reference() }
}

fn window(tr: &SimTrace, from: f64, to: f64) -> std::ops::Range<usize> {
    let a = tr.t.iter().position(|&t| t > from).unwrap();
    let b = tr.t.iter().position(|&t| t >= to).unwrap_or(tr.len());
    a..b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn power_balances_at_every_sample(c in caps(), frac in prop::array::uniform3(0.0f64..0.6), y_h in 3.0f64..30.0) {
        let cfg = HybridConfig::reference().with_capacities(c).with_y_h(y_h);
        let mut events = steps_for(&cfg, frac);
        events.push(Event { time: 3.0, subgrid: SubgridKind::Ac, load_delta: -0.1 * c[0] });
        let tr = run(&scenario(6.0, events), &cfg).unwrap();
        prop_assert!(tr.max_power_imbalance() < 1e-6 * cfg.p_gmax());
    }

    #[test]
    fn concatenated_deviations_equalize_at_once(frac in prop::array::uniform3(0.05f64..0.6)) {
        let cfg = HybridConfig::reference();
        let tr = run(&scenario(1.5, steps_for(&cfg, frac)), &cfg).unwrap();
        let w = window(&tr, 1.0, 1.2);
        let conc = &tr.conc;
        let peak = w.clone().flat_map(|k| (0..3).map(move |i| conc[i][k].abs())).fold(0.0, f64::max);
        for k in w {
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let d = (tr.conc[i][k] - tr.conc[j][k]).abs();
                prop_assert!(d < 0.05 * peak, "t {}: {} vs peak {}", tr.t[k], d, peak);
            }
        }
    }

    #[test]
    fn doubling_storage_inertia_slows_every_rate(frac in prop::array::uniform3(0.1f64..0.6), y_h in 3.0f64..15.0) {
        let base = HybridConfig::reference().with_y_h(y_h);
        let stiff = HybridConfig::reference().with_y_h(2.0 * y_h);
        let a = measure_lenient(&run(&scenario(1.5, steps_for(&base, frac)), &base).unwrap(), 1.0).unwrap();
        let b = measure_lenient(&run(&scenario(1.5, steps_for(&stiff, frac)), &stiff).unwrap(), 1.0).unwrap();
        prop_assert!(b.rocof < a.rocof);
        prop_assert!(b.rocov_dc < a.rocov_dc);
        prop_assert!(b.rocov_ds < a.rocov_ds);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn global_power_sharing_and_restoration(c in caps(), frac in prop::array::uniform3(0.05f64..0.5)) {
        let cfg = HybridConfig::reference().with_capacities(c);
        let tr = run(&scenario(300.0, steps_for(&cfg, frac)), &cfg).unwrap();
        let m = measure(&tr, 1.0).unwrap();
        prop_assert!(m.share_error < 0.01, "{}", m.share_error);
        for (got, want) in [(m.steady_f, cfg.ac.x_nominal), (m.steady_vdc, cfg.dc.x_nominal), (m.steady_vds, cfg.ds.x_nominal)] {
            prop_assert!(((got - want) / want).abs() < 1e-3, "{} vs {}", got, want);
        }
    }

    #[test]
    fn supercapacitor_carries_only_the_transient(step in 2e3f64..15e3, y_h in 3.0f64..30.0) {
        let cfg = HybridConfig::reference().with_y_h(y_h);
        let tau = 2.0 * cfg.ds.y_h / cfg.ds.y_l.unwrap();
        let sc = Scenario {
            toggles: Toggles { ilc: false, restoration: false, ..Toggles::default() },
            // first sample right after the step is the initial value
            sample_interval: 1e-4,
            ..scenario(1.0 + 10.0 * tau + 0.5, vec![Event { time: 1.0, subgrid: SubgridKind::Ds, load_delta: step }])
        };
        let tr = run(&sc, &cfg).unwrap();
        let k0 = tr.t.iter().position(|&t| t > 1.0).unwrap();
        prop_assert!((tr.p_h[k0] - step).abs() < 0.02 * step, "{} vs {}", tr.p_h[k0], step);
        let end = tr.t.iter().position(|&t| t >= 1.0 + 10.0 * tau).unwrap();
        for k in end..tr.len() {
            prop_assert!(tr.p_h[k].abs() < 0.01 * step);
            prop_assert!((tr.p_l[k] - tr.p_ods[k]).abs() < 0.01 * step);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = HybridConfig::reference();
    let sc = scenario(25.0, Scenario::reference().events);
    assert_eq!(run(&sc, &cfg).unwrap(), run(&sc, &cfg).unwrap());
}
