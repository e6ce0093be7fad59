//! Steady outputs with unequal capacities, with and without the concatenators.
use hybrid_mg::config::HybridConfig;
use hybrid_mg::sim::{measure, run, Scenario, Toggles};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = HybridConfig::reference().with_capacities([40e3, 10e3, 10e3]);
    for concatenator in [true, false] {
        let sc = Scenario {
            horizon: 60.0,
            toggles: Toggles { concatenator, restoration: false, ilc: true },
            ..Scenario::reference()
        };
        let m = measure(&run(&sc, &cfg)?, 1.0)?;
        let [a, d, s] = m.steady_shares;
        println!(
            "concatenator {concatenator:>5}: AC {a:>8.1} W, DC {d:>8.1} W, DS {s:>8.1} W, per-unit spread {:.4}",
            m.share_error
        );
    }
    Ok(())
}
