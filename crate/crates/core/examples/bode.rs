//! Bode data for the AC concatenator and the closed-loop frequency response.
use hybrid_mg::config::HybridConfig;
use hybrid_mg::gecm::{bode_export, bode_transfer, log_grid, BodeTarget};
use hybrid_mg::sim::Toggles;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = HybridConfig::reference();
    for name in ["T_ac", "f_closed"] {
        let target: BodeTarget = name.parse()?;
        let tf = bode_transfer(&cfg, target, [12e3, 14e3, 10e3], Toggles::default())?;
        println!("{name}");
        for p in bode_export(&tf, &log_grid(1e-4, 1e4, 9))? {
            println!("  {:>10.3e} rad/s {:>9.3} dB {:>9.2} deg", p.omega, p.mag_db, p.phase_deg);
        }
    }
    Ok(())
}
