//! Top-10 attribute shifts of a learned policy against the baseline on
//! benchmark C.

use juggler_mab::datagen::{generate, GenConfig};
use juggler_mab::domain::ArmSpace;
use juggler_mab::metrics::{compare_top_k, top_k_stats};
use juggler_mab::policies::{Algorithm, PolicyConfig};
use juggler_mab::simulator::{run, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (dataset, _) = generate(&GenConfig::benchmark_c(9))?;
    let space = ArmSpace::default();
    let baseline = run(
        &dataset,
        &SimulationConfig::new(1, PolicyConfig::new(Algorithm::Baseline)),
        0,
    )?;
    let learned = run(
        &dataset,
        &SimulationConfig::new(1, PolicyConfig::new(Algorithm::GaussianThompson)),
        0,
    )?;
    let base = top_k_stats(&baseline.decisions, &dataset, &space, 10)?;
    let stats = top_k_stats(&learned.decisions, &dataset, &space, 10)?;
    for (name, delta) in compare_top_k(&stats, &base)? {
        println!(
            "{name:<13} baseline {:>8.3}  delta {delta:+.4}",
            base.means[&name]
        );
    }
    Ok(())
}
