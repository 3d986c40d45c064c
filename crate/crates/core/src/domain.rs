//! Shared data model: searches, items, contexts, Juggler predictions and the
//! corrective arm grid, plus record validation and context encoding.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("search {search_id}: empty item list")]
    EmptyItems { search_id: String },
    #[error("search {search_id}: duplicate item_id {item_id}")]
    DuplicateItem { search_id: String, item_id: String },
    #[error("search {search_id}: non-finite {field} on item {item_id}")]
    NonFiniteScore {
        search_id: String,
        item_id: String,
        field: &'static str,
    },
    #[error("search {search_id}: non-finite juggler weight")]
    NonFiniteWeight { search_id: String },
    #[error("{feature} value {value:?} is not in the declared vocabulary")]
    OutOfVocabulary {
        feature: ContextFeature,
        value: String,
    },
    #[error("invalid arm space: {0}")]
    InvalidArmSpace(String),
    #[error("arm index {index} out of range for {size} arms")]
    ArmIndexOutOfRange { index: usize, size: usize },
}

/// A categorical search feature usable as bandit context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextFeature {
    Brand,
    Device,
    Geo,
}

impl ContextFeature {
    /// Fixed encoding order of the one-hot blocks.
    pub const ALL: [ContextFeature; 3] = [
        ContextFeature::Brand,
        ContextFeature::Device,
        ContextFeature::Geo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ContextFeature::Brand => "brand",
            ContextFeature::Device => "device",
            ContextFeature::Geo => "geo",
        }
    }
}

impl fmt::Display for ContextFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ContextFeature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "brand" => Ok(ContextFeature::Brand),
            "device" => Ok(ContextFeature::Device),
            "geo" => Ok(ContextFeature::Geo),
            other => Err(format!("unknown context feature {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub item_id: String,
    pub utility_score: f64,
    pub compensation_score: f64,
    pub relevance_label: u32,
    /// Auxiliary per-item statistics (daily_price, guest_rating, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Context {
    pub brand: String,
    pub device: String,
    pub geo: String,
}

impl Context {
    pub fn value(&self, feature: ContextFeature) -> &str {
        match feature {
            ContextFeature::Brand => &self.brand,
            ContextFeature::Device => &self.device,
            ContextFeature::Geo => &self.geo,
        }
    }
}

/// Per-search weights predicted by the upstream meta-model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JugglerPrediction {
    pub w_utility: f64,
    pub w_comp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub search_id: String,
    pub day_index: u32,
    pub context: Context,
    pub juggler: JugglerPrediction,
    /// Logged candidate set, in logged display order.
    pub items: Vec<Item>,
}

impl SearchRecord {
    pub fn labels(&self) -> Vec<u32> {
        self.items.iter().map(|i| i.relevance_label).collect()
    }
}

/// Declared vocabularies of the context features, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Vocab {
    pub brand: Vec<String>,
    pub device: Vec<String>,
    pub geo: Vec<String>,
}

impl Vocab {
    pub fn values(&self, feature: ContextFeature) -> &[String] {
        match feature {
            ContextFeature::Brand => &self.brand,
            ContextFeature::Device => &self.device,
            ContextFeature::Geo => &self.geo,
        }
    }

    pub fn position(&self, feature: ContextFeature, value: &str) -> Result<usize, DomainError> {
        self.values(feature)
            .iter()
            .position(|v| v == value)
            .ok_or_else(|| DomainError::OutOfVocabulary {
                feature,
                value: value.to_string(),
            })
    }
}

/// One corrective weight pair from the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub w_utility_mab: f64,
    pub w_comp_mab: f64,
    pub arm_index: usize,
}

impl Arm {
    pub fn is_neutral(&self) -> bool {
        self.w_utility_mab == 0.0 && self.w_comp_mab == 0.0
    }
}

/// Cartesian grid of utility and compensation corrections; arms are indexed
/// row-major over (utility value, compensation value).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawArmSpace", into = "RawArmSpace")]
pub struct ArmSpace {
    utility_values: Vec<f64>,
    comp_values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawArmSpace {
    utility_values: Vec<f64>,
    comp_values: Vec<f64>,
}

impl TryFrom<RawArmSpace> for ArmSpace {
    type Error = DomainError;

    fn try_from(raw: RawArmSpace) -> Result<Self, Self::Error> {
        ArmSpace::new(raw.utility_values, raw.comp_values)
    }
}

impl From<ArmSpace> for RawArmSpace {
    fn from(space: ArmSpace) -> Self {
        RawArmSpace {
            utility_values: space.utility_values,
            comp_values: space.comp_values,
        }
    }
}

impl Default for ArmSpace {
    fn default() -> Self {
        ArmSpace {
            utility_values: vec![-0.3, 0.0, 0.3],
            comp_values: vec![-0.2, 0.0, 0.2],
        }
    }
}

impl ArmSpace {
    pub fn new(utility_values: Vec<f64>, comp_values: Vec<f64>) -> Result<Self, DomainError> {
        for (name, values) in [
            ("utility_values", &utility_values),
            ("comp_values", &comp_values),
        ] {
            if values.is_empty() {
                return Err(DomainError::InvalidArmSpace(format!("{name} is empty")));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(DomainError::InvalidArmSpace(format!(
                    "{name} contains a non-finite value"
                )));
            }
            if values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(DomainError::InvalidArmSpace(format!(
                    "{name} must be strictly increasing"
                )));
            }
            if !values.contains(&0.0) {
                return Err(DomainError::InvalidArmSpace(format!(
                    "{name} must contain the neutral correction 0.0"
                )));
            }
        }
        Ok(ArmSpace {
            utility_values,
            comp_values,
        })
    }

    pub fn utility_values(&self) -> &[f64] {
        &self.utility_values
    }

    pub fn comp_values(&self) -> &[f64] {
        &self.comp_values
    }

    pub fn len(&self) -> usize {
        self.utility_values.len() * self.comp_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn arm(&self, arm_index: usize) -> Result<Arm, DomainError> {
        if arm_index >= self.len() {
            return Err(DomainError::ArmIndexOutOfRange {
                index: arm_index,
                size: self.len(),
            });
        }
        let cols = self.comp_values.len();
        Ok(Arm {
            w_utility_mab: self.utility_values[arm_index / cols],
            w_comp_mab: self.comp_values[arm_index % cols],
            arm_index,
        })
    }

    /// Index of the arm with exactly these corrections, if it exists.
    pub fn index_of(&self, w_utility_mab: f64, w_comp_mab: f64) -> Option<usize> {
        let row = self
            .utility_values
            .iter()
            .position(|&v| v == w_utility_mab)?;
        let col = self.comp_values.iter().position(|&v| v == w_comp_mab)?;
        Some(row * self.comp_values.len() + col)
    }

    pub fn neutral_index(&self) -> usize {
        self.index_of(0.0, 0.0)
            .expect("arm space invariant: both axes contain 0.0")
    }

    pub fn neutral(&self) -> Arm {
        Arm {
            w_utility_mab: 0.0,
            w_comp_mab: 0.0,
            arm_index: self.neutral_index(),
        }
    }

    pub fn arms(&self) -> impl Iterator<Item = Arm> + '_ {
        let cols = self.comp_values.len();
        (0..self.len()).map(move |i| Arm {
            w_utility_mab: self.utility_values[i / cols],
            w_comp_mab: self.comp_values[i % cols],
            arm_index: i,
        })
    }
}

/// Non-fatal finding: some arm drives a combined weight to exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroWeightWarning {
    pub search_id: String,
    pub arm_index: usize,
    pub component: &'static str,
}

impl fmt::Display for ZeroWeightWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "search {}: arm {} yields a zero combined {} weight",
            self.search_id, self.arm_index, self.component
        )
    }
}

/// Checks the record invariants and vocabulary membership. On success returns
/// the zero-combined-weight warnings for this record (possibly empty).
pub fn validate_record(
    record: &SearchRecord,
    arm_space: &ArmSpace,
    vocab: &Vocab,
) -> Result<Vec<ZeroWeightWarning>, DomainError> {
    if record.items.is_empty() {
        return Err(DomainError::EmptyItems {
            search_id: record.search_id.clone(),
        });
    }
    let mut seen = std::collections::HashSet::with_capacity(record.items.len());
    for item in &record.items {
        if !seen.insert(item.item_id.as_str()) {
            return Err(DomainError::DuplicateItem {
                search_id: record.search_id.clone(),
                item_id: item.item_id.clone(),
            });
        }
        for (field, value) in [
            ("utility_score", item.utility_score),
            ("compensation_score", item.compensation_score),
        ] {
            if !value.is_finite() {
                return Err(DomainError::NonFiniteScore {
                    search_id: record.search_id.clone(),
                    item_id: item.item_id.clone(),
                    field,
                });
            }
        }
    }
    if !record.juggler.w_utility.is_finite() || !record.juggler.w_comp.is_finite() {
        return Err(DomainError::NonFiniteWeight {
            search_id: record.search_id.clone(),
        });
    }
    for feature in ContextFeature::ALL {
        vocab.position(feature, record.context.value(feature))?;
    }

    let mut warnings = Vec::new();
    for arm in arm_space.arms() {
        if record.juggler.w_utility + arm.w_utility_mab == 0.0 {
            warnings.push(ZeroWeightWarning {
                search_id: record.search_id.clone(),
                arm_index: arm.arm_index,
                component: "utility",
            });
        }
        if record.juggler.w_comp + arm.w_comp_mab == 0.0 {
            warnings.push(ZeroWeightWarning {
                search_id: record.search_id.clone(),
                arm_index: arm.arm_index,
                component: "compensation",
            });
        }
    }
    Ok(warnings)
}

/// One-hot context encoder with a leading intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextEncoder {
    vocab: Vocab,
    features: Vec<ContextFeature>,
}

impl ContextEncoder {
    /// `enabled` may be given in any order; blocks are always laid out as
    /// brand, device, geo.
    pub fn new(vocab: Vocab, enabled: &[ContextFeature]) -> Self {
        let features = ContextFeature::ALL
            .into_iter()
            .filter(|f| enabled.contains(f))
            .collect();
        ContextEncoder { vocab, features }
    }

    pub fn features(&self) -> &[ContextFeature] {
        &self.features
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn dimension(&self) -> usize {
        1 + self
            .features
            .iter()
            .map(|&f| self.vocab.values(f).len())
            .sum::<usize>()
    }

    pub fn encode(&self, context: &Context) -> Result<Vec<f64>, DomainError> {
        let mut out = vec![0.0; self.dimension()];
        out[0] = 1.0;
        let mut offset = 1;
        for &feature in &self.features {
            let pos = self.vocab.position(feature, context.value(feature))?;
            out[offset + pos] = 1.0;
            offset += self.vocab.values(feature).len();
        }
        Ok(out)
    }
}

pub fn encode_context(
    context: &Context,
    vocab: &Vocab,
    enabled: &[ContextFeature],
) -> Result<Vec<f64>, DomainError> {
    ContextEncoder::new(vocab.clone(), enabled).encode(context)
}
