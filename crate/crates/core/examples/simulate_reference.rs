//! Full reference run: three load steps at 1 s, one more on AC at 20 s.
use hybrid_mg::config::HybridConfig;
use hybrid_mg::sim::{measure, run, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trace = run(&Scenario::reference(), &HybridConfig::reference())?;
    print!("{}", measure(&trace, 1.0)?.to_text());
    Ok(())
}
