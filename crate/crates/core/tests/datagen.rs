mod common;

use std::collections::BTreeMap;

use common::{naive_mean, reference_arm_reward};
use juggler_mab::datagen::{generate, GenConfig};
use juggler_mab::domain::ArmSpace;
use juggler_mab::metrics::summarize;
use juggler_mab::policies::{Algorithm, PolicyConfig};
use juggler_mab::reward::NdcgConfig;
use juggler_mab::simulator::{oracle_best_arm, run, SimulationConfig};

#[test]
fn neutral_everywhere_gives_baseline_reward_one() {
    let (ds, _) = generate(&GenConfig::planted(3, 3, 200, 4)).unwrap();
    let out = run(
        &ds,
        &SimulationConfig::new(0, PolicyConfig::new(Algorithm::Baseline)),
        0,
    )
    .unwrap();
    assert_eq!(summarize(&out.decisions).unwrap().0.avg_reward, 1.0);
}

#[test]
fn measured_gap_matches_target() {
    for (seed, items, gap) in [
        (1, 10, 0.1),
        (2, 20, 0.1),
        (3, 10, 0.25),
        (4, 10, 0.05),
        (5, 6, 0.1),
    ] {
        let mut cfg = GenConfig::planted(seed, 4, 500, 6);
        cfg.items_per_search = items;
        cfg.reward_gap = gap;
        let (ds, report) = generate(&cfg).unwrap();
        let space = ArmSpace::default();
        let neutral = space.neutral();
        let measured = naive_mean(ds.records.iter().map(|r| {
            let (_, best) = oracle_best_arm(r, &space, &NdcgConfig::default());
            best - reference_arm_reward(r, &neutral)
        }));
        assert!(
            (measured - gap).abs() <= 0.01,
            "items {items} gap {gap}: {measured}"
        );
        assert!((report.achieved_gap.unwrap() - measured).abs() < 1e-9);
    }
}

#[test]
fn opposite_arms_cap_every_fixed_arm_at_its_context_share() {
    let mut cfg = GenConfig::planted(8, 5, 400, 6);
    cfg.context_effect = BTreeMap::from([("brand_0".into(), 6), ("brand_1".into(), 2)]);
    let (ds, report) = generate(&cfg).unwrap();
    let space = ArmSpace::default();
    let n = ds.records.len() as f64;
    let share_of =
        |arm: usize| report.designated_arms.iter().filter(|&&a| a == arm).count() as f64 / n;
    let max_share = share_of(6).max(share_of(2));
    let best_sets: Vec<Vec<usize>> = ds
        .records
        .iter()
        .map(|r| oracle_best_arm(r, &space, &NdcgConfig::default()).0)
        .collect();
    for arm in 0..space.len() {
        let rate = best_sets.iter().filter(|s| s.contains(&arm)).count() as f64 / n;
        assert!(
            rate <= max_share,
            "arm {arm}: best-arm rate {rate} > {max_share}"
        );
    }
}

#[test]
fn designated_arm_is_usually_in_the_best_set() {
    for noise in [0.0, 0.2, 0.5] {
        let cfg = GenConfig::benchmark_b(5).with_noise(noise);
        let cfg = GenConfig { days: 3, ..cfg };
        let (ds, report) = generate(&cfg).unwrap();
        let space = ArmSpace::default();
        let hits = ds
            .records
            .iter()
            .zip(&report.designated_arms)
            .filter(|(r, a)| {
                oracle_best_arm(r, &space, &NdcgConfig::default())
                    .0
                    .contains(a)
            })
            .count();
        let rate = hits as f64 / ds.records.len() as f64;
        assert!(rate >= 1.0 - noise - 0.02, "noise {noise}: {rate}");
    }
}

#[test]
fn generation_is_deterministic_and_warning_free() {
    let cfg = GenConfig {
        days: 2,
        ..GenConfig::benchmark_c(13)
    };
    let (a, _) = generate(&cfg).unwrap();
    let (b, _) = generate(&cfg).unwrap();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    a.write(&mut x).unwrap();
    b.write(&mut y).unwrap();
    assert_eq!(x, y);
    assert!(a.validate(&cfg.arm_space).unwrap().is_empty());
    assert_eq!(a.records.len(), 2000);
}

#[test]
fn compensation_runs_against_relevance_in_benchmark_c() {
    let cfg = GenConfig {
        days: 2,
        ..GenConfig::benchmark_c(1)
    };
    let (ds, _) = generate(&cfg).unwrap();
    let pairs: Vec<(f64, f64)> = ds
        .records
        .iter()
        .flat_map(|r| {
            r.items
                .iter()
                .map(|i| (i.compensation_score, i.relevance_label as f64))
        })
        .collect();
    assert!(pearson(&pairs) < 0.0);
}

#[test]
fn attributes_follow_configured_signs() {
    let cfg = GenConfig {
        days: 2,
        ..GenConfig::benchmark_a(1)
    };
    let (ds, _) = generate(&cfg).unwrap();
    let corr = |name: &str| {
        let pairs: Vec<(f64, f64)> = ds
            .records
            .iter()
            .flat_map(|r| {
                r.items
                    .iter()
                    .map(|i| (i.attributes[name], i.relevance_label as f64))
            })
            .collect();
        pearson(&pairs)
    };
    assert!(corr("daily_price") < 0.0);
    assert!(corr("margin_pct") < 0.0);
    assert!(corr("margin_abs") < 0.0);
    assert!(corr("guest_rating") > 0.0);
    assert!(corr("star_rating") > 0.0);
}

fn pearson(pairs: &[(f64, f64)]) -> f64 {
    let mx = naive_mean(pairs.iter().map(|p| p.0));
    let my = naive_mean(pairs.iter().map(|p| p.1));
    let cov: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let vx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let vy: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn gap_below_the_smallest_swap_is_reported_unrealizable() {
    let mut cfg = GenConfig::planted(4, 4, 500, 6);
    cfg.items_per_search = 6;
    cfg.reward_gap = 0.02;
    match generate(&cfg) {
        Err(juggler_mab::datagen::GenError::Unrealizable { achieved, .. }) => {
            assert!(achieved > 0.03)
        }
        other => panic!("expected an unrealizable gap, got {:?}", other.map(|r| r.1)),
    }
}
