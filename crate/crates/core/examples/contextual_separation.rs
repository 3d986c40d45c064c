//! Two brands prefer opposite arms. A brand-aware RLS policy learns both,
//! while non-contextual policies settle on one compromise.

use juggler_mab::datagen::{generate, GenConfig};
use juggler_mab::domain::ContextFeature;
use juggler_mab::metrics::summarize;
use juggler_mab::policies::{Algorithm, PolicyConfig};
use juggler_mab::simulator::{run, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (dataset, _) = generate(&GenConfig::benchmark_b(3))?;
    let policies = [
        PolicyConfig::epsilon_greedy(0.1),
        PolicyConfig::new(Algorithm::GaussianThompson),
        PolicyConfig::rls(&[ContextFeature::Device]),
        PolicyConfig::rls(&[ContextFeature::Brand]),
    ];
    for policy in policies {
        let label = policy.label();
        let out = run(&dataset, &SimulationConfig::new(1, policy), 0)?;
        let (s, _) = summarize(&out.decisions)?;
        let last_day = out.decisions.last().map_or(0, |d| d.day_index);
        let mut by_brand = std::collections::BTreeMap::<&str, [u32; 9]>::new();
        for (d, r) in out.decisions.iter().zip(&dataset.records) {
            if d.day_index == last_day {
                by_brand.entry(r.context.brand.as_str()).or_default()[d.chosen_arm_index] += 1;
            }
        }
        println!(
            "{label}: regret {:.4}, best-arm rate {:.3}",
            s.avg_regret, s.best_arm_pct
        );
        for (brand, pulls) in by_brand {
            println!("  last-day pulls for {brand}: {pulls:?}");
        }
    }
    Ok(())
}
