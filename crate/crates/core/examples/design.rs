//! Droop and concatenator design for the reference parameters.
use hybrid_mg::cli::design_report;
use hybrid_mg::config::HybridConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    print!("{}", design_report(&HybridConfig::reference())?);
    Ok(())
}
