//! Analytic predictions for the reference system at two storage inertias.
use hybrid_mg::cli::predictions_for;
use hybrid_mg::config::HybridConfig;
use hybrid_mg::sim::Scenario;

fn main() {
    for y_h in [7.5, 15.0] {
        let p = predictions_for(&HybridConfig::reference().with_y_h(y_h), &Scenario::reference());
        println!("y_H = {y_h}");
        for (name, v, unit) in p.rows() {
            println!("  {name:<22} {v:>12.4} {unit}");
        }
    }
}
