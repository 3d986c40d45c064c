//! Replays the eleven standard policy configurations on benchmark A and
//! prints a summary table with deltas against the baseline.

use juggler_mab::datagen::{generate, GenConfig};
use juggler_mab::metrics::{compare_to_baseline, summarize};
use juggler_mab::policies::PolicyConfig;
use juggler_mab::simulator::{run, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (dataset, _) = generate(&GenConfig::benchmark_a(42))?;
    let mut rows = Vec::new();
    for policy in PolicyConfig::standard_sweep() {
        let label = policy.label();
        let out = run(&dataset, &SimulationConfig::new(7, policy), 0)?;
        rows.push((label, summarize(&out.decisions)?.0));
    }
    let baseline = rows[0].1.clone();
    println!(
        "{:<22} {:>8} {:>8} {:>8}  {:>7} {:>7} {:>7}",
        "policy", "reward", "regret", "best", "d_rew", "d_reg", "d_best"
    );
    for (label, s) in &rows {
        let d = compare_to_baseline(s, &baseline)?;
        println!(
            "{label:<22} {:>8.4} {:>8.4} {:>8.4}  {:>7} {:>7} {:>7}",
            s.avg_reward,
            s.avg_regret,
            s.best_arm_pct,
            d.reward.relative_pct(),
            d.regret.relative_pct(),
            d.best_arm_pct.relative_pct()
        );
    }
    Ok(())
}
