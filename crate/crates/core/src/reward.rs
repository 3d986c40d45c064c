//! NDCG, the reward signal for every policy and for the regret oracle.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gain {
    /// `2^rel - 1`
    #[default]
    Exponential,
    /// `rel`
    Linear,
}

impl Gain {
    pub fn apply(self, label: u32) -> f64 {
        match self {
            Gain::Exponential => 2f64.powi(label as i32) - 1.0,
            Gain::Linear => label as f64,
        }
    }
}

/// `cutoff = None` scores the whole list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawNdcgConfig")]
pub struct NdcgConfig {
    #[serde(default)]
    pub cutoff: Option<usize>,
    #[serde(default)]
    pub gain: Gain,
}

#[derive(Deserialize)]
struct RawNdcgConfig {
    #[serde(default)]
    cutoff: Option<usize>,
    #[serde(default)]
    gain: Gain,
}

impl TryFrom<RawNdcgConfig> for NdcgConfig {
    type Error = String;

    fn try_from(raw: RawNdcgConfig) -> Result<Self, Self::Error> {
        if raw.cutoff == Some(0) {
            return Err("ndcg cutoff must be at least 1".into());
        }
        Ok(NdcgConfig {
            cutoff: raw.cutoff,
            gain: raw.gain,
        })
    }
}

impl NdcgConfig {
    pub fn at(cutoff: usize) -> Self {
        assert!(cutoff >= 1, "ndcg cutoff must be at least 1");
        NdcgConfig {
            cutoff: Some(cutoff),
            gain: Gain::Exponential,
        }
    }

    fn depth(&self, n: usize) -> usize {
        self.cutoff.map_or(n, |k| k.min(n))
    }
}

#[inline]
fn discount(position: usize) -> f64 {
    // 1-based position i gets 1 / log2(i + 1)
    ((position + 2) as f64).log2()
}

/// Discounted cumulative gain of labels given in ranked order.
pub fn dcg(labels: &[u32], config: &NdcgConfig) -> f64 {
    labels
        .iter()
        .take(config.depth(labels.len()))
        .enumerate()
        .map(|(i, &rel)| config.gain.apply(rel) / discount(i))
        .sum()
}

/// DCG of the ideal (descending) ordering of the same labels.
pub fn ideal_dcg(labels: &[u32], config: &NdcgConfig) -> f64 {
    let mut sorted = labels.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    dcg(&sorted, config)
}

/// NDCG in `[0, 1]`; lists whose ideal DCG is zero score 0.
pub fn ndcg(labels: &[u32], config: &NdcgConfig) -> f64 {
    let ideal = ideal_dcg(labels, config);
    if ideal == 0.0 {
        return 0.0;
    }
    (dcg(labels, config) / ideal).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EXP: NdcgConfig = NdcgConfig {
        cutoff: None,
        gain: Gain::Exponential,
    };

    fn permutations(items: &[u32]) -> Vec<Vec<u32>> {
        if items.len() <= 1 {
            return vec![items.to_vec()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let head = rest.remove(i);
            for mut tail in permutations(&rest) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }

    #[test]
    fn dcg_examples() {
        // 7/log2(2) + 3/log2(3), log2(3) = 1.584962500721156
        let expected = 7.0 + 3.0 / 1.584_962_500_721_156;
        assert!((dcg(&[3, 2, 0], &EXP) - expected).abs() < 1e-12);
        assert!((dcg(&[3, 2, 0], &EXP) - 8.892_789_260_714_372).abs() < 1e-12);
        assert_eq!(dcg(&[0, 0, 0], &EXP), 0.0);
        let linear = NdcgConfig {
            cutoff: None,
            gain: Gain::Linear,
        };
        assert_eq!(dcg(&[5], &linear), 5.0);
    }

    #[test]
    fn ndcg_examples() {
        assert_eq!(ndcg(&[5, 1, 1, 0], &EXP), 1.0);
        assert_eq!(ndcg(&[0, 0, 0], &EXP), 0.0);
        let log2_3 = 1.584_962_500_721_156;
        let expected = (1.0 / log2_3 + 3.0 / 2.0) / (3.0 + 1.0 / log2_3);
        assert!((ndcg(&[0, 1, 2], &EXP) - expected).abs() < 1e-12);

        let perms = permutations(&[0, 1, 2]);
        assert_eq!(perms.len(), 6);
        let best = perms
            .iter()
            .map(|p| ndcg(p, &EXP))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best, 1.0);
        assert_eq!(ndcg(&[2, 1, 0], &EXP), best);
    }

    #[test]
    fn cutoff_truncates() {
        let at1 = NdcgConfig::at(1);
        assert_eq!(dcg(&[1, 5, 5], &at1), 1.0);
        assert!((ndcg(&[1, 5, 5], &at1) - 1.0 / 31.0).abs() < 1e-15);
        assert_eq!(NdcgConfig::at(10).depth(3), 3);
        let bad: Result<NdcgConfig, _> = serde_json::from_str(r#"{"cutoff":0}"#);
        assert!(bad.is_err());
        let ok: NdcgConfig = serde_json::from_str(r#"{"gain":"linear"}"#).unwrap();
        assert_eq!(ok.gain, Gain::Linear);
        assert_eq!(ok.cutoff, None);
    }

    fn labels() -> impl Strategy<Value = Vec<u32>> {
        prop::collection::vec(0u32..6, 1..8)
    }

    proptest! {
        #[test]
        fn ndcg_is_bounded(l in labels(), k in prop::option::of(1usize..8)) {
            let cfg = NdcgConfig { cutoff: k, gain: Gain::Exponential };
            let v = ndcg(&l, &cfg);
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn ideal_order_scores_one(mut l in prop::collection::hash_set(0u32..12, 1..7)
            .prop_map(|s| s.into_iter().collect::<Vec<_>>())) {
            l.sort_unstable_by(|a, b| b.cmp(a));
            if l[0] > 0 {
                prop_assert_eq!(ndcg(&l, &EXP), 1.0);
                // any other order of distinct labels is strictly worse
                let mut other = l.clone();
                other.reverse();
                if other != l {
                    prop_assert!(ndcg(&other, &EXP) < 1.0);
                }
            }
        }

        #[test]
        fn swapping_higher_label_forward_never_hurts(l in prop::collection::vec(0u32..6, 2..8), i in 0usize..8, j in 0usize..8) {
            let (i, j) = (i % l.len(), j % l.len());
            let (early, late) = (i.min(j), i.max(j));
            if l[late] > l[early] {
                let mut swapped = l.clone();
                swapped.swap(early, late);
                prop_assert!(dcg(&swapped, &EXP) >= dcg(&l, &EXP));
            }
        }

        #[test]
        fn ideal_dcg_is_permutation_invariant(l in labels(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = l.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(ideal_dcg(&l, &EXP), ideal_dcg(&shuffled, &EXP));
        }

        #[test]
        fn descending_sort_is_maximal(l in prop::collection::vec(0u32..6, 1..7)) {
            let mut sorted = l.clone();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            let best = permutations(&l).iter().map(|p| ndcg(p, &EXP)).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(ndcg(&sorted, &EXP), best);
        }
    }
}
