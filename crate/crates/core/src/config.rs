//! Generator configuration: symbol budgets, rule-graph shape, fact-set size
//! and the open-world / noise knobs, plus deterministic RNG derivation.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rule-graph category of one connected component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Chain,
    Rdg,
    Drdg,
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Category::Chain => write!(f, "chain"),
            Category::Rdg => write!(f, "rdg"),
            Category::Drdg => write!(f, "drdg"),
        }
    }
}

/// Dataset-level category; `Mixed` samples a category per component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetCategory {
    Chain,
    Rdg,
    Drdg,
    Mixed,
}

impl std::fmt::Display for DatasetCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DatasetCategory::Chain => write!(f, "chain"),
            DatasetCategory::Rdg => write!(f, "rdg"),
            DatasetCategory::Drdg => write!(f, "drdg"),
            DatasetCategory::Mixed => write!(f, "mixed"),
        }
    }
}

/// Named fact-set size class. Classes beyond `xl` follow the `x2l`, `x3l`,
/// ... naming scheme and extend the `xl` upper bound by a factor of five per
/// step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SizeClass(u8);

impl SizeClass {
    pub const XS: SizeClass = SizeClass(0);
    pub const S: SizeClass = SizeClass(1);
    pub const M: SizeClass = SizeClass(2);
    pub const L: SizeClass = SizeClass(3);
    pub const XL: SizeClass = SizeClass(4);

    /// Inclusive (min, max) fact-count bounds.
    pub fn bounds(&self) -> (usize, usize) {
        match self.0 {
            0 => (50, 100),
            1 => (101, 1_000),
            2 => (1_001, 10_000),
            3 => (10_001, 100_000),
            4 => (100_001, 500_000),
            n => {
                let mut max = 500_000usize;
                for _ in 4..n {
                    max = max.saturating_mul(5);
                }
                (max / 5 + 1, max)
            }
        }
    }

    pub fn parse(s: &str) -> Option<SizeClass> {
        match s.to_ascii_lowercase().as_str() {
            "xs" => Some(SizeClass(0)),
            "s" => Some(SizeClass(1)),
            "m" => Some(SizeClass(2)),
            "l" => Some(SizeClass(3)),
            "xl" => Some(SizeClass(4)),
            other => {
                let n: u32 = other.strip_prefix('x')?.strip_suffix('l')?.parse().ok()?;
                if (2..=8).contains(&n) {
                    Some(SizeClass(3 + n as u8))
                } else {
                    None
                }
            }
        }
    }
}

impl std::fmt::Display for SizeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            0 => write!(f, "xs"),
            1 => write!(f, "s"),
            2 => write!(f, "m"),
            3 => write!(f, "l"),
            4 => write!(f, "xl"),
            n => write!(f, "x{}l", n - 3),
        }
    }
}

impl TryFrom<String> for SizeClass {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        SizeClass::parse(&value).ok_or_else(|| format!("unknown size class `{value}`"))
    }
}

impl From<SizeClass> for String {
    fn from(value: SizeClass) -> Self {
        value.to_string()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{key}: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            key: key.to_owned(),
            message: message.into(),
        }
    }
}

fn default_arity_min() -> usize {
    1
}
fn default_arity_max() -> usize {
    2
}
fn default_components() -> usize {
    1
}
fn default_prob_head() -> f64 {
    0.2
}
fn default_prob_existing() -> f64 {
    0.75
}
fn default_prob_constant() -> f64 {
    0.1
}
fn default_recursion_prob() -> f64 {
    0.1
}
fn default_n_dg() -> u32 {
    3
}
fn default_n_skip() -> u32 {
    2
}
fn default_true() -> bool {
    true
}

/// Every knob of the generation pipeline. Serialized as a flat JSON object
/// with keys named exactly like the fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub num_predicates: usize,
    pub num_constants: usize,
    #[serde(default = "default_arity_min")]
    pub arity_min: usize,
    #[serde(default = "default_arity_max")]
    pub arity_max: usize,
    pub num_rules: usize,
    pub max_rule_length: usize,
    pub category: DatasetCategory,
    #[serde(default = "default_components")]
    pub components_min: usize,
    #[serde(default = "default_components")]
    pub components_max: usize,
    pub max_depth: usize,
    #[serde(default)]
    pub same_target: bool,
    #[serde(default = "default_prob_head")]
    pub prob_head: f64,
    #[serde(default = "default_prob_existing")]
    pub prob_existing: f64,
    #[serde(default = "default_prob_constant")]
    pub prob_constant: f64,
    #[serde(default = "default_recursion_prob")]
    pub recursion_prob: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_class: Option<SizeClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facts_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facts_max: Option<usize>,
    #[serde(default)]
    pub n_ow: f64,
    #[serde(default)]
    pub n_noise_plus: f64,
    #[serde(default)]
    pub n_noise_minus: f64,
    #[serde(default = "default_n_dg")]
    pub n_dg: u32,
    #[serde(default = "default_n_skip")]
    pub n_skip: u32,
    #[serde(default = "default_true")]
    pub split_target: bool,
}

impl GeneratorConfig {
    /// Checks range and consistency constraints; the error names the
    /// offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("num_predicates", self.num_predicates),
            ("num_constants", self.num_constants),
            ("arity_min", self.arity_min),
            ("arity_max", self.arity_max),
            ("num_rules", self.num_rules),
            ("max_rule_length", self.max_rule_length),
            ("components_min", self.components_min),
            ("components_max", self.components_max),
            ("max_depth", self.max_depth),
        ];
        for (key, value) in positive {
            if value == 0 {
                return Err(ConfigError::new(key, "must be a positive integer"));
            }
        }
        if self.arity_min > self.arity_max {
            return Err(ConfigError::new("arity_min", "must not exceed arity_max"));
        }
        if self.components_min > self.components_max {
            return Err(ConfigError::new(
                "components_min",
                "must not exceed components_max",
            ));
        }
        let probs = [
            ("prob_head", self.prob_head),
            ("prob_existing", self.prob_existing),
            ("prob_constant", self.prob_constant),
            ("recursion_prob", self.recursion_prob),
        ];
        for (key, value) in probs {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::new(
                    key,
                    format!("must be within [0,1] (got {value})"),
                ));
            }
        }
        for (key, value) in [("n_ow", self.n_ow), ("n_noise_minus", self.n_noise_minus)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::new(
                    key,
                    format!("must be within [0,1] (got {value})"),
                ));
            }
        }
        if !(0.0..1.0).contains(&self.n_noise_plus) {
            return Err(ConfigError::new(
                "n_noise_plus",
                format!("must be within [0,1) (got {})", self.n_noise_plus),
            ));
        }
        if self.n_dg == 0 {
            return Err(ConfigError::new("n_dg", "must be a positive integer"));
        }
        if self.n_skip == 0 {
            return Err(ConfigError::new("n_skip", "must be a positive integer"));
        }
        if self.size_class.is_none() && (self.facts_min.is_none() || self.facts_max.is_none()) {
            return Err(ConfigError::new(
                "size_class",
                "either size_class or both facts_min and facts_max are required",
            ));
        }
        let (min, max) = self.fact_bounds();
        if min == 0 {
            return Err(ConfigError::new("facts_min", "must be a positive integer"));
        }
        if min > max {
            return Err(ConfigError::new("facts_min", "must not exceed facts_max"));
        }
        Ok(())
    }

    /// Requested (min, max) training-set size: explicit bounds override the
    /// size class.
    pub fn fact_bounds(&self) -> (usize, usize) {
        let (mut min, mut max) = self.size_class.map(|s| s.bounds()).unwrap_or((0, 0));
        if let Some(m) = self.facts_min {
            min = m;
        }
        if let Some(m) = self.facts_max {
            max = m;
        }
        (min, max)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derives an independent deterministic RNG stream from a base seed, e.g.
/// stream `i` for the i-th dataset of a batch.
pub fn derive_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(splitmix64(seed ^ splitmix64(stream.wrapping_add(1))))
}
