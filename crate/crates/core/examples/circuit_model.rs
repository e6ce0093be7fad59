//! Circuit-model step responses checked against the time-domain simulator.
use hybrid_mg::config::HybridConfig;
use hybrid_mg::gecm::{global_inertia, solve_nodal, GecmSystem};
use hybrid_mg::lti::ivt_rate_limit;
use hybrid_mg::sim::{compare_with_gecm, Scenario, Toggles};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = HybridConfig::reference();
    let sys = GecmSystem::new(&cfg, [12e3, 14e3, 10e3], Toggles::default())?;
    let sol = solve_nodal(&sys)?;
    println!("global inertia {:.4} s, nodal residual {:.1e}", global_inertia(&cfg.specs()), sol.residual);
    println!("initial df/dt {:.4} p.u./s", ivt_rate_limit(sol.delta_f_pu())?);
    let c = compare_with_gecm(&Scenario::reference(), &cfg)?;
    println!("relative RMS over {:.0}..{:.0} s: {:?}", c.window.0, c.window.1, c.rms_rel);
    Ok(())
}
