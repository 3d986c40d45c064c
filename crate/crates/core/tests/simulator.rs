mod common;

use std::collections::BTreeMap;

use common::{naive_mean, reference_arm_reward};
use juggler_mab::datagen::{generate, GenConfig};
use juggler_mab::domain::{ArmSpace, Context, Item, JugglerPrediction, SearchRecord};
use juggler_mab::metrics::summarize;
use juggler_mab::policies::{Algorithm, PolicyConfig};
use juggler_mab::reward::NdcgConfig;
use juggler_mab::simulator::{
    continue_run, oracle_best_arm, read_decisions, run, run_until, write_decisions,
    SimulationConfig, Simulator, SimulatorSnapshot, UpdateMode,
};
use juggler_mab::Dataset;
use proptest::prelude::*;

fn small_dataset(seed: u64) -> Dataset {
    let mut cfg = GenConfig::planted(seed, 6, 120, 6);
    cfg.context_effect.insert("brand_1".into(), 2);
    cfg.label_noise = 0.2;
    generate(&cfg).unwrap().0
}

fn all_policies() -> Vec<PolicyConfig> {
    PolicyConfig::standard_sweep()
}

#[test]
fn baseline_plays_neutral_and_matches_planted_neutral_ndcg() {
    let cfg = GenConfig::planted(11, 4, 200, 6).with_noise(0.3);
    let (ds, report) = generate(&cfg).unwrap();
    let out = run(
        &ds,
        &SimulationConfig::new(1, PolicyConfig::new(Algorithm::Baseline)),
        0,
    )
    .unwrap();
    assert!(out.decisions.iter().all(|d| d.chosen_arm_index == 4));
    let (summary, _) = summarize(&out.decisions).unwrap();
    assert!((summary.avg_reward - report.neutral_ndcg_mean).abs() < 1e-12);

    let neutral_best = ds
        .records
        .iter()
        .filter(|r| {
            oracle_best_arm(r, &ArmSpace::default(), &NdcgConfig::default())
                .0
                .contains(&4)
        })
        .count();
    assert_eq!(
        summary.best_arm_pct,
        neutral_best as f64 / ds.records.len() as f64
    );
}

#[test]
fn counterfactual_rewards_match_independent_brute_force() {
    let ds = small_dataset(2);
    let space = ArmSpace::default();
    let cfg = SimulationConfig::new(3, PolicyConfig::new(Algorithm::GaussianThompson));
    let out = run(&ds, &cfg, 0).unwrap();
    for (d, r) in out.decisions.iter().zip(&ds.records) {
        assert_eq!(d.search_id, r.search_id);
        let brute: Vec<f64> = space.arms().map(|a| reference_arm_reward(r, &a)).collect();
        for (lib, reference) in d.counterfactual_rewards.iter().zip(&brute) {
            assert!((lib - reference).abs() < 1e-12);
        }
        let best = brute.iter().copied().fold(f64::MIN, f64::max);
        assert!((d.best_reward - best).abs() < 1e-12);
        assert_eq!(
            d.realized_reward,
            d.counterfactual_rewards[d.chosen_arm_index]
        );
    }
}

#[test]
fn dominant_arm_sets_best_reward_on_a_single_day() {
    let (ds, _) = generate(&GenConfig::planted(5, 1, 300, 0)).unwrap();
    let space = ArmSpace::default();
    let out = run(
        &ds,
        &SimulationConfig::new(9, PolicyConfig::new(Algorithm::GaussianThompson)),
        0,
    )
    .unwrap();
    for (d, r) in out.decisions.iter().zip(&ds.records) {
        assert_eq!(
            d.best_reward,
            reference_arm_reward(r, &space.arm(0).unwrap())
        );
        assert_eq!(d.best_reward, 1.0);
    }
}

#[test]
fn run_invariants_hold_for_every_policy() {
    let ds = small_dataset(4);
    for policy in all_policies() {
        for mode in [UpdateMode::PerObservation, UpdateMode::DailyMean] {
            let cfg = SimulationConfig {
                update_mode: mode,
                ..SimulationConfig::new(8, policy.clone())
            };
            let out = run(&ds, &cfg, 0).unwrap();
            assert_eq!(out.decisions.len(), ds.records.len());
            for (d, r) in out.decisions.iter().zip(&ds.records) {
                assert_eq!(
                    (d.search_id.as_str(), d.day_index),
                    (r.search_id.as_str(), r.day_index)
                );
                assert!(d.regret >= 0.0);
                assert_eq!(d.is_best_arm, d.regret == 0.0);
            }
            let (s, days) = summarize(&out.decisions).unwrap();
            assert!(s.avg_reward <= s.avg_best_reward);
            assert!((s.avg_regret - (s.avg_best_reward - s.avg_reward)).abs() < 1e-10);
            let weighted = days
                .iter()
                .map(|d| d.mean_reward * d.search_count as f64)
                .sum::<f64>()
                / s.search_count as f64;
            assert!((weighted - s.avg_reward).abs() < 1e-12);
            let pulls: u64 = days.iter().flat_map(|d| d.arm_pulls.iter()).sum();
            assert_eq!(pulls as usize, ds.records.len());
            assert!(
                (naive_mean(out.decisions.iter().map(|d| d.regret)) - s.avg_regret).abs() < 1e-12
            );
        }
    }
}

#[test]
fn output_is_identical_across_thread_counts_and_reruns() {
    let ds = small_dataset(6);
    for policy in all_policies() {
        let cfg = SimulationConfig::new(21, policy);
        let reference = run(&ds, &cfg, 1).unwrap();
        for threads in [1, 2, 4, 0] {
            let again = run(&ds, &cfg, threads).unwrap();
            assert_eq!(again, reference, "threads {threads}");
        }
    }
}

#[test]
fn resume_from_snapshot_matches_uninterrupted_run() {
    let ds = small_dataset(7);
    for policy in all_policies() {
        for mode in [UpdateMode::PerObservation, UpdateMode::DailyMean] {
            let cfg = SimulationConfig {
                update_mode: mode,
                ..SimulationConfig::new(5, policy.clone())
            };
            let full = run(&ds, &cfg, 0).unwrap();
            let (sim, mut decisions) = run_until(&ds, &cfg, 3, 2).unwrap();
            let json = serde_json::to_string(&sim.snapshot()).unwrap();
            let snapshot: SimulatorSnapshot = serde_json::from_str(&json).unwrap();
            let resumed = Simulator::resume(cfg.clone(), ds.vocab(), snapshot).unwrap();
            let rest = continue_run(resumed, &ds, &cfg).unwrap();
            decisions.extend(rest.decisions);
            assert_eq!(decisions, full.decisions, "{}", policy.label());
            assert_eq!(rest.snapshot, full.snapshot);
        }
    }
}

#[test]
fn resume_rejects_foreign_snapshots() {
    let ds = small_dataset(8);
    let cfg = SimulationConfig::new(5, PolicyConfig::rls(&[juggler_mab::ContextFeature::Brand]));
    let snap = run(&ds, &cfg, 0).unwrap().snapshot;
    let other_seed = SimulationConfig {
        seed: 6,
        ..cfg.clone()
    };
    assert!(Simulator::resume(other_seed, ds.vocab(), snap.clone()).is_err());
    let other_policy = SimulationConfig::new(
        5,
        PolicyConfig::rls(&[
            juggler_mab::ContextFeature::Geo,
            juggler_mab::ContextFeature::Device,
        ]),
    );
    assert!(Simulator::resume(other_policy, ds.vocab(), snap.clone()).is_err());
    let gt = SimulationConfig::new(5, PolicyConfig::new(Algorithm::GaussianThompson));
    assert!(Simulator::resume(gt, ds.vocab(), snap).is_err());
}

#[test]
fn decision_log_round_trips_exactly() {
    let ds = small_dataset(9);
    let out = run(
        &ds,
        &SimulationConfig::new(1, PolicyConfig::epsilon_greedy(0.3)),
        0,
    )
    .unwrap();
    let mut buf = Vec::new();
    write_decisions(&mut buf, &out.decisions).unwrap();
    assert_eq!(read_decisions(&buf[..]).unwrap(), out.decisions);
    assert_eq!(
        buf.iter().filter(|&&b| b == b'\n').count(),
        out.decisions.len()
    );
}

#[test]
fn horizon_truncates_to_leading_days() {
    let ds = small_dataset(10);
    let cfg = SimulationConfig {
        horizon_days: Some(2),
        ..SimulationConfig::new(1, PolicyConfig::new(Algorithm::GaussianThompson))
    };
    let out = run(&ds, &cfg, 0).unwrap();
    assert_eq!(out.decisions.len(), 240);
    assert_eq!(out.snapshot.next_day, 2);
    let full = run(
        &ds,
        &SimulationConfig::new(1, PolicyConfig::new(Algorithm::GaussianThompson)),
        0,
    )
    .unwrap();
    assert_eq!(out.decisions[..], full.decisions[..240]);
}

fn record_from(items: &[(f64, f64, u32)], juggler: (f64, f64)) -> SearchRecord {
    SearchRecord {
        search_id: "p".into(),
        day_index: 0,
        context: Context {
            brand: "brand_0".into(),
            device: "device_0".into(),
            geo: "geo_0".into(),
        },
        juggler: JugglerPrediction {
            w_utility: juggler.0,
            w_comp: juggler.1,
        },
        items: items
            .iter()
            .enumerate()
            .map(|(i, &(u, c, l))| Item {
                item_id: format!("i{i}"),
                utility_score: u,
                compensation_score: c,
                relevance_label: l,
                attributes: BTreeMap::new(),
            })
            .collect(),
    }
}

proptest! {
    #[test]
    fn oracle_best_set_matches_exhaustive_enumeration(
        items in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, prop::sample::select(vec![0u32, 1, 5])), 4),
        wu in 0.5f64..1.5,
        wc in 0.3f64..0.9,
    ) {
        let record = record_from(&items, (wu, wc));
        let space = ArmSpace::default();
        let (set, best) = oracle_best_arm(&record, &space, &NdcgConfig::default());
        let rewards: Vec<f64> = space.arms().map(|a| reference_arm_reward(&record, &a)).collect();
        let max = rewards.iter().copied().fold(f64::MIN, f64::max);
        prop_assert!((best - max).abs() < 1e-12);
        let expected: Vec<usize> = (0..9).filter(|&i| (rewards[i] - max).abs() < 1e-12).collect();
        prop_assert_eq!(set, expected);
    }

    #[test]
    fn all_zero_labels_make_every_arm_best(
        items in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, Just(0u32)), 1..8),
    ) {
        let record = record_from(&items, (1.0, 0.5));
        let (set, best) = oracle_best_arm(&record, &ArmSpace::default(), &NdcgConfig::default());
        prop_assert_eq!(set, (0..9).collect::<Vec<_>>());
        prop_assert_eq!(best, 0.0);
    }
}
