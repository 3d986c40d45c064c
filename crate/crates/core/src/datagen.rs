//! Synthetic search logs with planted structure.
//!
//! For every search the generator fixes two target orderings of the items:
//! the ideal ordering (labels descending), which the search's designated arm
//! must produce, and a degraded ordering for the neutral arm whose NDCG is
//! steered towards `1 - reward_gap`. Each ordering fixes the projections of
//! the item score pairs onto one combined-weight direction; with two
//! non-parallel directions the 2x2 system has a unique solution per item, so
//! both orderings hold exactly. A common shift and positive rescaling then
//! maps the scores into `[0, 1]` without changing the order under any arm.
//!
//! The degraded ordering is reached by repeatedly swapping an adjacent pair
//! whose upper item has the strictly higher label, so NDCG decreases
//! monotonically along the path. The step taken is chosen per search with
//! error feedback so the mean gap over planted searches tracks the target.
//!
//! Every arm direction is a combination of the designated and neutral
//! directions, so scaling down the ideal projections moves every other arm
//! away from the ideal ordering. The scale is reduced until the designated
//! arm is the unique best arm of the noise-free search. The aligned score
//! model instead lifts the ideal projections by a multiple of the label, so
//! the designated correction's score projection tracks relevance.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::domain::{
    ArmSpace, Context, ContextFeature, DomainError, Item, JugglerPrediction, SearchRecord, Vocab,
};
use crate::reward::{ndcg, NdcgConfig};
use crate::rng::{substream, StreamKind};
use crate::scoring::reward_of_arm;

const MAX_SCALE_ATTEMPTS: usize = 10;

/// Grades for no interaction, click-like and booking-like feedback.
pub const GRADE_NONE: u32 = 0;
pub const GRADE_CLICK: u32 = 1;
pub const GRADE_BOOKING: u32 = 5;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("reward_gap {target} is not realizable: achieved mean gap {achieved:.4} over {planted} planted searches")]
    Unrealizable {
        target: f64,
        achieved: f64,
        planted: usize,
    },
    #[error("could not draw juggler weights separating arm {arm} from the other arms")]
    DegenerateWeights { arm: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabSizes {
    pub brand: usize,
    pub device: usize,
    pub geo: usize,
}

impl Default for VocabSizes {
    fn default() -> Self {
        VocabSizes {
            brand: 2,
            device: 2,
            geo: 2,
        }
    }
}

impl VocabSizes {
    /// Values are `<feature>_<i>`.
    pub fn vocab(&self) -> Vocab {
        let values = |f: &str, n: usize| (0..n).map(|i| format!("{f}_{i}")).collect();
        Vocab {
            brand: values("brand", self.brand),
            device: values("device", self.device),
            geo: values("geo", self.geo),
        }
    }
}

/// Sign (and scale) of each attribute's dependence on the relevance grade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttributeCorrelation {
    pub daily_price: f64,
    pub guest_rating: f64,
    pub star_rating: f64,
    pub margin_pct: f64,
}

impl Default for AttributeCorrelation {
    fn default() -> Self {
        AttributeCorrelation {
            daily_price: -1.0,
            guest_rating: 1.0,
            star_rating: 1.0,
            margin_pct: -1.0,
        }
    }
}

/// How item scores are built from the two target orderings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreModel {
    /// The designated arm is the only arm whose ranking is ideal, whenever
    /// the neutral ranking is not ideal itself.
    #[default]
    UniqueBest,
    /// The designated correction's projection of the item scores grows with
    /// the relevance label, e.g. compensation falls as relevance rises when
    /// the correction lowers the compensation weight. Other arms may tie.
    Aligned,
}

fn default_utility_range() -> [f64; 2] {
    [0.8, 1.2]
}

fn default_comp_range() -> [f64; 2] {
    [0.4, 0.6]
}

fn default_click_rate() -> f64 {
    0.15
}

fn default_booking_rate() -> f64 {
    0.05
}

fn default_gap_tolerance() -> f64 {
    0.01
}

fn default_true() -> bool {
    true
}

fn default_feature() -> ContextFeature {
    ContextFeature::Brand
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    pub days: u32,
    pub searches_per_day: u32,
    pub items_per_search: usize,
    #[serde(default)]
    pub vocab_sizes: VocabSizes,
    /// Feature whose value selects the designated arm.
    #[serde(default = "default_feature")]
    pub context_feature: ContextFeature,
    /// Context value -> designated arm index. Unlisted values use the
    /// neutral arm.
    #[serde(default)]
    pub context_effect: BTreeMap<String, usize>,
    /// Target mean NDCG advantage of the designated arm over the neutral arm.
    pub reward_gap: f64,
    /// Probability that a search's labels are shuffled after construction.
    #[serde(default)]
    pub label_noise: f64,
    #[serde(default)]
    pub score_model: ScoreModel,
    #[serde(default)]
    pub arm_space: ArmSpace,
    #[serde(default)]
    pub ndcg: NdcgConfig,
    #[serde(default = "default_utility_range")]
    pub juggler_utility_range: [f64; 2],
    #[serde(default = "default_comp_range")]
    pub juggler_comp_range: [f64; 2],
    #[serde(default = "default_click_rate")]
    pub click_rate: f64,
    #[serde(default = "default_booking_rate")]
    pub booking_rate: f64,
    #[serde(default = "default_true")]
    pub attributes: bool,
    #[serde(default)]
    pub attribute_correlation: AttributeCorrelation,
    /// Allowed |achieved - target| for the mean gap over planted searches.
    #[serde(default = "default_gap_tolerance")]
    pub gap_tolerance: f64,
}

impl GenConfig {
    /// Small config with every context value mapped to `arm`.
    pub fn planted(seed: u64, days: u32, searches_per_day: u32, arm: usize) -> Self {
        let vocab_sizes = VocabSizes::default();
        let context_effect = vocab_sizes
            .vocab()
            .brand
            .into_iter()
            .map(|b| (b, arm))
            .collect();
        GenConfig {
            seed,
            days,
            searches_per_day,
            items_per_search: 10,
            vocab_sizes,
            context_feature: ContextFeature::Brand,
            context_effect,
            reward_gap: 0.1,
            label_noise: 0.0,
            score_model: ScoreModel::UniqueBest,
            arm_space: ArmSpace::default(),
            ndcg: NdcgConfig::default(),
            juggler_utility_range: default_utility_range(),
            juggler_comp_range: default_comp_range(),
            click_rate: default_click_rate(),
            booking_rate: default_booking_rate(),
            attributes: true,
            attribute_correlation: AttributeCorrelation::default(),
            gap_tolerance: default_gap_tolerance(),
        }
    }

    /// Stationary benchmark with one best arm (utility +0.3, comp -0.2) for
    /// every context: 30 days of 1,000 searches, gap 0.1, label noise 0.2.
    pub fn benchmark_a(seed: u64) -> Self {
        GenConfig {
            label_noise: 0.2,
            ..GenConfig::planted(seed, 30, 1000, 6)
        }
    }

    /// Like [`GenConfig::benchmark_a`] but `brand_0` prefers (+0.3, -0.2)
    /// and `brand_1` prefers the opposite corner (-0.3, +0.2).
    pub fn benchmark_b(seed: u64) -> Self {
        let mut cfg = GenConfig::benchmark_a(seed);
        cfg.context_effect = BTreeMap::from([("brand_0".into(), 6), ("brand_1".into(), 2)]);
        cfg
    }

    /// Every context prefers lowering the compensation weight (0, -0.2) and
    /// compensation scores run against relevance; 20 items per search.
    pub fn benchmark_c(seed: u64) -> Self {
        GenConfig {
            items_per_search: 20,
            score_model: ScoreModel::Aligned,
            ..GenConfig::planted(seed, 30, 1000, 3).with_noise(0.2)
        }
    }

    pub fn with_noise(mut self, label_noise: f64) -> Self {
        self.label_noise = label_noise;
        self
    }

    fn validate(&self) -> Result<(), GenError> {
        let bad = |m: String| Err(GenError::Config(m));
        if self.days == 0 || self.searches_per_day == 0 {
            return bad("days and searches_per_day must be positive".into());
        }
        if self.items_per_search < 2 {
            return bad("items_per_search must be at least 2".into());
        }
        if !(self.reward_gap > 0.0 && self.reward_gap <= 1.0) {
            return bad(format!("reward_gap {} outside (0, 1]", self.reward_gap));
        }
        if !(0.0..1.0).contains(&self.label_noise) {
            return bad(format!("label_noise {} outside [0, 1)", self.label_noise));
        }
        let sizes = self.vocab_sizes;
        if sizes.brand == 0 || sizes.device == 0 || sizes.geo == 0 {
            return bad("every vocabulary needs at least one value".into());
        }
        let vocab = sizes.vocab();
        for (value, &arm) in &self.context_effect {
            vocab.position(self.context_feature, value)?;
            self.arm_space.arm(arm)?;
        }
        for (name, [lo, hi]) in [
            ("juggler_utility_range", self.juggler_utility_range),
            ("juggler_comp_range", self.juggler_comp_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("{name} must be a finite [low, high] pair"));
            }
        }
        if !(self.click_rate >= 0.0
            && self.booking_rate >= 0.0
            && self.click_rate + self.booking_rate <= 1.0)
        {
            return bad(
                "click_rate and booking_rate must be non-negative and sum to at most 1".into(),
            );
        }
        if !(self.gap_tolerance >= 0.0) {
            return bad("gap_tolerance must be non-negative".into());
        }
        Ok(())
    }
}

/// What the generator planted, measured during construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenReport {
    pub searches: usize,
    /// Noise-free searches whose designated arm is not the neutral arm.
    pub planted_searches: usize,
    pub noisy_searches: usize,
    /// Noise-free planted searches where some other arm also reaches the
    /// designated arm's reward.
    pub ambiguous_searches: usize,
    pub target_gap: f64,
    /// Mean of `1 - NDCG(neutral ordering)` over planted searches.
    pub achieved_gap: Option<f64>,
    /// Mean NDCG of the neutral arm's ranking over every search.
    pub neutral_ndcg_mean: f64,
    /// Designated arm of every search, in output order.
    pub designated_arms: Vec<usize>,
}

struct Draft {
    rng: ChaCha8Rng,
    search_id: String,
    day: u32,
    context: Context,
    designated: usize,
    juggler: JugglerPrediction,
    labels: Vec<u32>,
    ideal: Vec<usize>,
    /// Adjacent swap position and resulting NDCG for each descent step.
    path: Vec<(usize, f64)>,
    /// Item pairs with distinct labels; the descent ends after this many steps.
    labeled_pairs: usize,
    noisy: bool,
}

fn draft(cfg: &GenConfig, vocab: &Vocab, day: u32, seq: u32) -> Result<Draft, GenError> {
    let mut rng = substream(cfg.seed, StreamKind::Generation, day, seq);
    let mut pick = |values: &[String]| values[rng.random_range(0..values.len())].clone();
    let context = Context {
        brand: pick(&vocab.brand),
        device: pick(&vocab.device),
        geo: pick(&vocab.geo),
    };
    let neutral = cfg.arm_space.neutral_index();
    let designated = cfg
        .context_effect
        .get(context.value(cfg.context_feature))
        .copied()
        .unwrap_or(neutral);
    let arm = cfg.arm_space.arm(designated)?;

    let draw = |rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]| {
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..hi)
        }
    };
    let mut juggler = None;
    for _ in 0..1000 {
        let j = JugglerPrediction {
            w_utility: draw(&mut rng, cfg.juggler_utility_range),
            w_comp: draw(&mut rng, cfg.juggler_comp_range),
        };
        let direction =
            |a: &crate::domain::Arm| (j.w_utility + a.w_utility_mab, j.w_comp + a.w_comp_mab);
        let target = direction(&arm);
        if designated == neutral
            || cfg
                .arm_space
                .arms()
                .filter(|a| a.arm_index != designated)
                .all(|a| separation(target, direction(&a)) >= 1e-3)
        {
            juggler = Some(j);
            break;
        }
    }
    let juggler = juggler.ok_or(GenError::DegenerateWeights { arm: designated })?;

    let n = cfg.items_per_search;
    let mut labels: Vec<u32> = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            if u < cfg.booking_rate {
                GRADE_BOOKING
            } else if u < cfg.booking_rate + cfg.click_rate {
                GRADE_CLICK
            } else {
                GRADE_NONE
            }
        })
        .collect();
    // at least two positives (one when n = 2) and one zero
    let min_positive = 2.min(n - 1);
    while labels.iter().filter(|&&l| l != GRADE_NONE).count() < min_positive {
        let i = rng.random_range(0..n);
        labels[i] = GRADE_CLICK;
    }
    if labels.iter().all(|&l| l != GRADE_NONE) {
        let i = rng.random_range(0..n);
        labels[i] = GRADE_NONE;
    }

    let mut ideal: Vec<usize> = (0..n).collect();
    ideal.shuffle(&mut rng);
    ideal.sort_by(|&a, &b| labels[b].cmp(&labels[a]));

    let mut path = Vec::new();
    if designated != neutral {
        let mut order: Vec<u32> = ideal.iter().map(|&i| labels[i]).collect();
        loop {
            let descents: Vec<usize> = (0..n - 1).filter(|&j| order[j] > order[j + 1]).collect();
            if descents.is_empty() {
                break;
            }
            let j = if path.is_empty() {
                // the cheapest first swap keeps small gaps reachable
                let mut best = (descents[0], f64::NEG_INFINITY);
                for &j in &descents {
                    order.swap(j, j + 1);
                    let v = ndcg(&order, &cfg.ndcg);
                    order.swap(j, j + 1);
                    if v >= best.1 {
                        best = (j, v);
                    }
                }
                best.0
            } else {
                // deeper swaps cost less NDCG, so favour them
                let weights = descents.iter().map(|&j| ((j + 1) * (j + 1)) as f64);
                let pick = WeightedIndex::new(weights).expect("positive weights");
                descents[pick.sample(&mut rng)]
            };
            order.swap(j, j + 1);
            path.push((j, ndcg(&order, &cfg.ndcg)));
        }
    }
    let noisy = rng.random::<f64>() < cfg.label_noise;
    let labeled_pairs = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| labels[i] != labels[j])
        .count();

    Ok(Draft {
        rng,
        search_id: format!("d{day:03}-s{seq:05}"),
        day,
        context,
        designated,
        juggler,
        labels,
        ideal,
        path,
        labeled_pairs,
        noisy,
    })
}

/// `|sin|` of the angle between two combined weight directions.
fn separation((au, ac): (f64, f64), (bu, bc): (f64, f64)) -> f64 {
    (au * bc - ac * bu).abs() / ((au * au + ac * ac).sqrt() * (bu * bu + bc * bc).sqrt())
}

/// Projection targets for an ordering: rank r of n gets `n - r` plus jitter
/// below half the spacing.
fn projections(order: &[usize], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = order.len();
    let mut p = vec![0.0; n];
    for (r, &item) in order.iter().enumerate() {
        p[item] = (n - r) as f64 + rng.random_range(-0.3..0.3);
    }
    p
}

/// Item (utility, compensation) pairs whose projections onto the designated
/// and neutral weight directions are `p_designated` and `p_neutral`.
fn solve_scores(
    juggler: &JugglerPrediction,
    correction: (f64, f64),
    p_designated: &[f64],
    p_neutral: &[f64],
) -> Vec<(f64, f64)> {
    let (wu, wc) = (juggler.w_utility, juggler.w_comp);
    let (au, ac) = (wu + correction.0, wc + correction.1);
    let det = au * wc - ac * wu;
    let raw: Vec<(f64, f64)> = p_designated
        .iter()
        .zip(p_neutral)
        .map(|(&pd, &pn)| ((pd * wc - ac * pn) / det, (au * pn - wu * pd) / det))
        .collect();
    normalize(raw)
}

/// Scores realising `p_neutral` under the neutral arm, with a random
/// compensation score per item.
fn neutral_only_scores(
    juggler: &JugglerPrediction,
    p_neutral: &[f64],
    rng: &mut ChaCha8Rng,
) -> Vec<(f64, f64)> {
    let (wu, wc) = (juggler.w_utility, juggler.w_comp);
    let n = p_neutral.len() as f64;
    let raw = p_neutral
        .iter()
        .map(|&p| {
            let c = rng.random_range(0.0..n);
            ((p - wc * c) / wu, c)
        })
        .collect();
    normalize(raw)
}

/// Common shift and positive rescale into `[0, 1]`; every arm keeps its
/// ordering.
fn normalize(raw: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let min_u = raw.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let min_c = raw.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let span = raw
        .iter()
        .map(|s| (s.0 - min_u).max(s.1 - min_c))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    raw.iter()
        .map(|s| ((s.0 - min_u) / span, (s.1 - min_c) / span))
        .collect()
}

fn make_items(search_id: &str, scores: &[(f64, f64)], labels: &[u32]) -> Vec<Item> {
    scores
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (&(u, c), &label))| Item {
            item_id: format!("{search_id}-i{i:02}"),
            utility_score: u,
            compensation_score: c,
            relevance_label: label,
            attributes: BTreeMap::new(),
        })
        .collect()
}

fn attributes(
    label: u32,
    corr: &AttributeCorrelation,
    rng: &mut ChaCha8Rng,
) -> BTreeMap<String, f64> {
    let g = label as f64 / GRADE_BOOKING as f64;
    let noise = |rng: &mut ChaCha8Rng, sd: f64| Normal::new(0.0, sd).unwrap().sample(rng);
    let price = (180.0 + corr.daily_price * 40.0 * g + noise(rng, 25.0)).max(20.0);
    let guest = (7.5 + corr.guest_rating * 1.0 * g + noise(rng, 0.6)).clamp(1.0, 10.0);
    let star = (3.2 + corr.star_rating * 0.8 * g + noise(rng, 0.6)).clamp(1.0, 5.0);
    let margin = (0.15 + corr.margin_pct * 0.04 * g + noise(rng, 0.02)).clamp(0.0, 1.0);
    BTreeMap::from([
        ("daily_price".to_string(), price),
        ("guest_rating".to_string(), guest),
        ("star_rating".to_string(), star),
        ("margin_pct".to_string(), margin),
        ("margin_abs".to_string(), price * margin),
    ])
}

/// Builds the dataset and the report of what was planted.
pub fn generate(cfg: &GenConfig) -> Result<(Dataset, GenReport), GenError> {
    cfg.validate()?;
    let vocab = cfg.vocab_sizes.vocab();
    let neutral = cfg.arm_space.neutral_index();
    let target = 1.0 - cfg.reward_gap;

    let keys: Vec<(u32, u32)> = (0..cfg.days)
        .flat_map(|d| (0..cfg.searches_per_day).map(move |s| (d, s)))
        .collect();
    let drafts: Vec<Draft> = keys
        .par_iter()
        .map(|&(d, s)| draft(cfg, &vocab, d, s))
        .collect::<Result<_, _>>()?;

    let mut records = Vec::with_capacity(drafts.len());
    let mut designated_arms = Vec::with_capacity(drafts.len());
    let mut neutral_ndcg = Vec::with_capacity(drafts.len());
    let mut planted_gaps = Vec::new();
    let mut carry = 0.0;
    let mut noisy_searches = 0;
    let mut ambiguous_searches = 0;

    for mut draft in drafts {
        let steps = if draft.designated == neutral {
            0
        } else {
            // ndcg after k steps; k = 0 is the ideal ordering. For a unique
            // best arm the neutral ranking takes at least one swap and keeps
            // one labelled pair in order, so arms on either side of the
            // designated one can fail.
            let aim = if draft.noisy { target } else { target + carry };
            let unique = cfg.score_model == ScoreModel::UniqueBest && !draft.path.is_empty();
            let last = if unique && draft.labeled_pairs > 1 {
                draft.labeled_pairs - 1
            } else {
                draft.path.len()
            };
            let mut best = if unique {
                (0usize, f64::INFINITY)
            } else {
                (0usize, (1.0 - aim).abs())
            };
            for (k, &(_, v)) in draft.path.iter().enumerate().take(last) {
                let err = (v - aim).abs();
                if err < best.1 {
                    best = (k + 1, err);
                }
            }
            best.0
        };
        let mut neutral_order = draft.ideal.clone();
        for &(j, _) in &draft.path[..steps] {
            neutral_order.swap(j, j + 1);
        }
        let planted_ndcg = if steps == 0 {
            1.0
        } else {
            draft.path[steps - 1].1
        };
        if draft.designated != neutral && !draft.noisy {
            carry += target - planted_ndcg;
            planted_gaps.push(1.0 - planted_ndcg);
        }

        let arm = cfg.arm_space.arm(draft.designated)?;
        let correction = (arm.w_utility_mab, arm.w_comp_mab);
        let mut record = SearchRecord {
            search_id: draft.search_id,
            day_index: draft.day,
            context: draft.context,
            juggler: draft.juggler,
            items: Vec::new(),
        };
        let p0 = projections(&neutral_order, &mut draft.rng);
        let n = draft.labels.len();
        let scores = if draft.designated == neutral {
            neutral_only_scores(&record.juggler, &p0, &mut draft.rng)
        } else if cfg.score_model == ScoreModel::Aligned {
            // ties keep the neutral order, larger labels clear the whole spread
            let lift = (n + 1) as f64;
            let p1: Vec<f64> = p0
                .iter()
                .zip(&draft.labels)
                .map(|(p, &l)| p + lift * l as f64)
                .collect();
            solve_scores(&record.juggler, correction, &p1, &p0)
        } else {
            // shrinking the ideal projections pulls every other arm towards
            // the neutral ordering or past it until only the designated arm
            // stays ideal
            let mut scale = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_SCALE_ATTEMPTS {
                let p1: Vec<f64> = projections(&draft.ideal, &mut draft.rng)
                    .iter()
                    .map(|p| p * scale)
                    .collect();
                let scores = solve_scores(&record.juggler, correction, &p1, &p0);
                record.items = make_items(&record.search_id, &scores, &draft.labels);
                let rewards: Vec<f64> = cfg
                    .arm_space
                    .arms()
                    .map(|a| reward_of_arm(&record, &a, &cfg.ndcg))
                    .collect();
                let top = rewards[draft.designated];
                let unique = rewards
                    .iter()
                    .enumerate()
                    .all(|(a, &r)| a == draft.designated || r < top);
                if unique || steps == 0 {
                    accepted = Some(scores);
                    break;
                }
                accepted = Some(scores);
                scale *= 0.25;
            }
            accepted.expect("at least one attempt")
        };
        record.items = make_items(&record.search_id, &scores, &draft.labels);
        if draft.designated != neutral && !draft.noisy {
            let rewards: Vec<f64> = cfg
                .arm_space
                .arms()
                .map(|a| reward_of_arm(&record, &a, &cfg.ndcg))
                .collect();
            debug_assert_eq!(rewards[draft.designated], 1.0);
            debug_assert_eq!(rewards[neutral], planted_ndcg);
            if rewards
                .iter()
                .enumerate()
                .any(|(a, &r)| a != draft.designated && r >= rewards[draft.designated])
            {
                ambiguous_searches += 1;
            }
        }
        let mut labels = draft.labels.clone();
        if draft.noisy {
            labels.shuffle(&mut draft.rng);
            noisy_searches += 1;
        }
        let neutral_labels: Vec<u32> = neutral_order.iter().map(|&i| labels[i]).collect();
        neutral_ndcg.push(ndcg(&neutral_labels, &cfg.ndcg));

        for (item, &label) in record.items.iter_mut().zip(&labels) {
            item.relevance_label = label;
            if cfg.attributes {
                item.attributes = attributes(label, &cfg.attribute_correlation, &mut draft.rng);
            }
        }
        designated_arms.push(draft.designated);
        records.push(record);
    }

    let achieved_gap = (!planted_gaps.is_empty())
        .then(|| crate::metrics::pairwise_sum(&planted_gaps) / planted_gaps.len() as f64);
    if let Some(achieved) = achieved_gap {
        if (achieved - cfg.reward_gap).abs() > cfg.gap_tolerance {
            return Err(GenError::Unrealizable {
                target: cfg.reward_gap,
                achieved,
                planted: planted_gaps.len(),
            });
        }
    }
    let report = GenReport {
        searches: records.len(),
        planted_searches: planted_gaps.len(),
        noisy_searches,
        ambiguous_searches,
        target_gap: cfg.reward_gap,
        achieved_gap,
        neutral_ndcg_mean: crate::metrics::pairwise_sum(&neutral_ndcg) / neutral_ndcg.len() as f64,
        designated_arms,
    };
    Ok((Dataset::new(vocab, cfg.days, records), report))
}
