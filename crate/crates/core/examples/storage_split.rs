//! Battery and supercapacitor shares after a storage-side load step.
use hybrid_mg::config::HybridConfig;
use hybrid_mg::sim::{run, Event, Scenario, Toggles};
use hybrid_mg::subgrid::SubgridKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = Scenario {
        horizon: 5.0,
        events: vec![Event { time: 1.0, subgrid: SubgridKind::Ds, load_delta: 10e3 }],
        toggles: Toggles { ilc: false, restoration: false, ..Toggles::default() },
        ..Scenario::reference()
    };
    let tr = run(&sc, &HybridConfig::reference())?;
    for k in (90..tr.len()).step_by(20).take(12) {
        println!("t {:>5.2} s  P_L {:>8.1} W  P_H {:>8.1} W", tr.t[k], tr.p_l[k], tr.p_h[k]);
    }
    Ok(())
}
