//! Daily arm-pull shares on benchmark C, where compensation runs against
//! relevance, so learners drift towards arms that lower the compensation
//! weight.

use juggler_mab::datagen::{generate, GenConfig};
use juggler_mab::domain::ArmSpace;
use juggler_mab::metrics::summarize;
use juggler_mab::policies::PolicyConfig;
use juggler_mab::simulator::{run, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (dataset, _) = generate(&GenConfig::benchmark_c(5))?;
    let space = ArmSpace::default();
    let low = space.comp_values()[0];
    let out = run(
        &dataset,
        &SimulationConfig::new(2, PolicyConfig::epsilon_greedy(0.1)),
        0,
    )?;
    let (_, days) = summarize(&out.decisions)?;
    for day in days.iter().step_by(5) {
        let low_pulls: u64 = space
            .arms()
            .filter(|a| a.w_comp_mab == low)
            .map(|a| day.arm_pulls[a.arm_index])
            .sum();
        println!(
            "day {:>2}: share on comp {low:+.1} arms {:.2}, pulls {:?}",
            day.day_index,
            low_pulls as f64 / day.search_count as f64,
            day.arm_pulls
        );
    }
    Ok(())
}
