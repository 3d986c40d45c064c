//! Stops a replay halfway, round-trips the simulator state through JSON,
//! resumes, and checks the result equals an uninterrupted run.

use juggler_mab::datagen::{generate, GenConfig};
use juggler_mab::domain::ContextFeature;
use juggler_mab::policies::PolicyConfig;
use juggler_mab::simulator::{
    continue_run, run, run_until, SimulationConfig, Simulator, SimulatorSnapshot,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GenConfig {
        days: 10,
        ..GenConfig::benchmark_b(4)
    };
    let (dataset, _) = generate(&cfg)?;
    let sim_cfg = SimulationConfig::new(8, PolicyConfig::rls(&[ContextFeature::Brand]));

    let (sim, mut decisions) = run_until(&dataset, &sim_cfg, 5, 0)?;
    let json = serde_json::to_string(&sim.snapshot())?;
    println!(
        "snapshot after day {}: {} bytes",
        sim.next_day(),
        json.len()
    );

    let snapshot: SimulatorSnapshot = serde_json::from_str(&json)?;
    let resumed = Simulator::resume(sim_cfg.clone(), dataset.vocab(), snapshot)?;
    decisions.extend(continue_run(resumed, &dataset, &sim_cfg)?.decisions);

    let full = run(&dataset, &sim_cfg, 0)?;
    println!(
        "resumed run has {} decisions, identical to uninterrupted run: {}",
        decisions.len(),
        decisions == full.decisions
    );
    Ok(())
}
