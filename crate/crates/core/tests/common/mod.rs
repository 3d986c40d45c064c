#![allow(dead_code)]

use juggler_mab::domain::{Arm, SearchRecord};

/// NDCG with gain 2^l - 1 and discount log2(position + 1), written from the
/// definition without the library's helpers.
pub fn reference_ndcg(labels_in_rank_order: &[u32]) -> f64 {
    let dcg = |ls: &[u32]| -> f64 {
        let mut total = 0.0;
        for (pos, &l) in ls.iter().enumerate() {
            let gain = 2f64.powi(l as i32) - 1.0;
            total += gain / ((pos + 2) as f64).log2();
        }
        total
    };
    let mut ideal = labels_in_rank_order.to_vec();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let best = dcg(&ideal);
    if best == 0.0 {
        0.0
    } else {
        dcg(labels_in_rank_order) / best
    }
}

/// Labels ordered by descending combined score under `arm`, earlier items
/// first on ties.
pub fn reference_arm_reward(record: &SearchRecord, arm: &Arm) -> f64 {
    let wu = record.juggler.w_utility + arm.w_utility_mab;
    let wc = record.juggler.w_comp + arm.w_comp_mab;
    let mut scored: Vec<(f64, usize)> = record
        .items
        .iter()
        .enumerate()
        .map(|(i, it)| (wu * it.utility_score + wc * it.compensation_score, i))
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let labels: Vec<u32> = scored
        .iter()
        .map(|&(_, i)| record.items[i].relevance_label)
        .collect();
    reference_ndcg(&labels)
}

/// Plain left-to-right mean; test oracles compare against it with a tolerance.
pub fn naive_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    sum / n as f64
}
