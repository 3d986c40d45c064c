//! Generates the three planted benchmarks and reports what was planted.
//!
//! `cargo run --release --example generate_benchmark -- [out_dir]` also
//! writes each dataset as JSON Lines.

use std::path::PathBuf;

use juggler_mab::datagen::{generate, GenConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args().nth(1).map(PathBuf::from);
    for (name, cfg) in [
        ("a", GenConfig::benchmark_a(1)),
        ("b", GenConfig::benchmark_b(1)),
        ("c", GenConfig::benchmark_c(1)),
    ] {
        let (dataset, report) = generate(&cfg)?;
        println!(
            "benchmark {name}: {} searches, planted {}, noisy {}, gap {:.4} (target {}), neutral ndcg {:.4}",
            report.searches,
            report.planted_searches,
            report.noisy_searches,
            report.achieved_gap.unwrap_or(f64::NAN),
            report.target_gap,
            report.neutral_ndcg_mean
        );
        if let Some(dir) = &out_dir {
            std::fs::create_dir_all(dir)?;
            dataset.write_path(dir.join(format!("benchmark_{name}.jsonl")))?;
        }
    }
    Ok(())
}
