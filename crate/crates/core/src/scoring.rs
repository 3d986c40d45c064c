//! Additive combination of Juggler and bandit weights into per-item sort
//! scores, and the ranking / reward that follows from them.

use crate::domain::{Arm, Item, JugglerPrediction, SearchRecord};
use crate::reward::{ndcg, NdcgConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRanking {
    /// Indices into the record's item list, best first.
    pub ordered_item_indices: Vec<usize>,
    /// Sort score per item, aligned with the original item order.
    pub sort_scores: Vec<f64>,
}

impl ScoredRanking {
    pub fn labels_in_rank_order(&self, record: &SearchRecord) -> Vec<u32> {
        self.ordered_item_indices
            .iter()
            .map(|&i| record.items[i].relevance_label)
            .collect()
    }
}

/// Combined weights `(w_utility, w_comp)` for one search under one arm.
#[inline]
pub fn combined_weights(juggler: &JugglerPrediction, arm: &Arm) -> (f64, f64) {
    (
        juggler.w_utility + arm.w_utility_mab,
        juggler.w_comp + arm.w_comp_mab,
    )
}

#[inline]
pub fn sort_score(item: &Item, juggler: &JugglerPrediction, arm: &Arm) -> f64 {
    let (wu, wc) = combined_weights(juggler, arm);
    wu * item.utility_score + wc * item.compensation_score
}

/// Ranks by descending sort score; equal scores keep logged order.
pub fn rank(record: &SearchRecord, arm: &Arm) -> ScoredRanking {
    let sort_scores: Vec<f64> = record
        .items
        .iter()
        .map(|item| sort_score(item, &record.juggler, arm))
        .collect();
    let mut ordered_item_indices: Vec<usize> = (0..sort_scores.len()).collect();
    // stable sort keeps ascending index among ties
    ordered_item_indices.sort_by(|&a, &b| sort_scores[b].total_cmp(&sort_scores[a]));
    ScoredRanking {
        ordered_item_indices,
        sort_scores,
    }
}

pub fn reward_of_arm(record: &SearchRecord, arm: &Arm, config: &NdcgConfig) -> f64 {
    let ranking = rank(record, arm);
    ndcg(&ranking.labels_in_rank_order(record), config)
}
