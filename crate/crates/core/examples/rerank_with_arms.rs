//! Re-ranks one search under every arm of the grid and prints each arm's
//! ordering and reward.

use std::collections::BTreeMap;

use juggler_mab::domain::{ArmSpace, Context, Item, JugglerPrediction, SearchRecord};
use juggler_mab::reward::NdcgConfig;
use juggler_mab::scoring::{rank, reward_of_arm};
use juggler_mab::simulator::oracle_best_arm;

fn main() {
    let items = [(0.9, 0.1, 0), (0.6, 0.9, 1), (0.5, 0.2, 5), (0.2, 0.8, 0)];
    let record = SearchRecord {
        search_id: "example".into(),
        day_index: 0,
        context: Context {
            brand: "brand_0".into(),
            device: "mobile".into(),
            geo: "us".into(),
        },
        juggler: JugglerPrediction {
            w_utility: 1.0,
            w_comp: 0.5,
        },
        items: items
            .iter()
            .enumerate()
            .map(|(i, &(u, c, l))| Item {
                item_id: format!("hotel_{i}"),
                utility_score: u,
                compensation_score: c,
                relevance_label: l,
                attributes: BTreeMap::new(),
            })
            .collect(),
    };
    let space = ArmSpace::default();
    let cfg = NdcgConfig::default();
    for arm in space.arms() {
        let ranking = rank(&record, &arm);
        println!(
            "arm {} (u {:+.1}, c {:+.1}): order {:?}, ndcg {:.4}",
            arm.arm_index,
            arm.w_utility_mab,
            arm.w_comp_mab,
            ranking.ordered_item_indices,
            reward_of_arm(&record, &arm, &cfg)
        );
    }
    let (best, reward) = oracle_best_arm(&record, &space, &cfg);
    println!("best arms {best:?} with ndcg {reward:.4}");
}
