//! Steady frequency and voltages with and without secondary restoration.
use hybrid_mg::config::HybridConfig;
use hybrid_mg::sim::{measure, run, Scenario, Toggles};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = HybridConfig::reference();
    for restoration in [true, false] {
        let sc = Scenario { toggles: Toggles { restoration, ..Toggles::default() }, ..Scenario::reference() };
        let m = measure(&run(&sc, &cfg)?, 1.0)?;
        println!(
            "restoration {restoration:>5}: f {:.4} Hz, V_dc {:.3} V, V_ds {:.3} V",
            m.steady_f, m.steady_vdc, m.steady_vds
        );
    }
    Ok(())
}
