//! Dataset bundle: the directory layout tying together rules, fact sets and
//! generation metadata.
//!
//! Layout (all text UTF-8, LF line endings):
//!
//! ```text
//! rules.pl                 ground-truth rules
//! train.pl                 training set (open world + noise)
//! eval/support.pl          evaluation support facts
//! eval/consequences.pl     their consequences under the rules
//! aux/support.pl           support facts S
//! aux/consequences.pl      consequences C
//! aux/full.pl              S union C
//! aux/full_noise.pl        S union C with noise, no open-world deletion
//! aux/open.pl              S union C after open-world deletion
//! meta.json                configuration echo, seed, targets, counts
//! ```
//!
//! Reading a bundle revalidates its invariants: the stored consequence sets
//! must equal what the inference engine derives from the stored support
//! sets.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Category, GeneratorConfig};
use crate::infer::inferred;
use crate::syntax::{FactSet, PredId, Program, Signature};
use crate::text::{parse_facts_into, parse_rules_into, serialize_facts, serialize_rules, ParseError};

pub const RULES_FILE: &str = "rules.pl";
pub const TRAIN_FILE: &str = "train.pl";
pub const EVAL_SUPPORT_FILE: &str = "eval/support.pl";
pub const EVAL_CONSEQUENCES_FILE: &str = "eval/consequences.pl";
pub const AUX_SUPPORT_FILE: &str = "aux/support.pl";
pub const AUX_CONSEQUENCES_FILE: &str = "aux/consequences.pl";
pub const AUX_FULL_FILE: &str = "aux/full.pl";
pub const AUX_FULL_NOISE_FILE: &str = "aux/full_noise.pl";
pub const AUX_OPEN_FILE: &str = "aux/open.pl";
pub const META_FILE: &str = "meta.json";

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("missing or unreadable `{file}`: {source}")]
    Io {
        file: String,
        source: std::io::Error,
    },
    #[error("`{file}`: {source}")]
    Parse { file: String, source: ParseError },
    #[error("malformed `meta.json`: {0}")]
    Meta(String),
    #[error("bundle invariant violated for `{set}`: {message}")]
    Invariant { set: String, message: String },
}

/// Shape of one generated connected component, echoed into the metadata.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentMeta {
    pub category: Category,
    pub depth: usize,
    pub rules: usize,
    pub target: String,
}

/// Cardinality of every emitted fact set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetCounts {
    pub support: usize,
    pub consequences: usize,
    pub target: usize,
    pub full: usize,
    pub full_noise: usize,
    pub open: usize,
    pub train: usize,
    pub eval_support: usize,
    pub eval_consequences: usize,
}

/// Machine-readable provenance written to `meta.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub config: GeneratorConfig,
    pub seed: u64,
    pub dataset_index: u64,
    pub target_predicates: Vec<String>,
    pub components: Vec<ComponentMeta>,
    pub counts: SetCounts,
    /// Facts shared between the evaluation sets and the training set;
    /// evaluation sets are generated independently, overlap is allowed.
    pub eval_overlap_with_train: usize,
}

/// A complete generated dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetBundle {
    pub rules: Program,
    pub train: FactSet,
    pub eval_support: FactSet,
    pub eval_consequences: FactSet,
    pub support: FactSet,
    pub consequences: FactSet,
    pub full: FactSet,
    pub full_noise: FactSet,
    pub open: FactSet,
    pub target_predicates: BTreeSet<PredId>,
    pub meta: BundleMeta,
}

impl DatasetBundle {
    /// Target facts: the consequences on the target predicates.
    pub fn target_facts(&self) -> FactSet {
        self.consequences
            .restrict_to_predicates(&self.target_predicates)
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), BundleError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| BundleError::Io {
        file: name.to_owned(),
        source,
    })
}

fn read_file(dir: &Path, name: &str) -> Result<String, BundleError> {
    fs::read_to_string(dir.join(name)).map_err(|source| BundleError::Io {
        file: name.to_owned(),
        source,
    })
}

/// Writes `bundle` under `dir`, creating the directory tree.
pub fn write_bundle(
    sig: &Signature,
    bundle: &DatasetBundle,
    dir: &Path,
) -> Result<(), BundleError> {
    for sub in ["eval", "aux"] {
        fs::create_dir_all(dir.join(sub)).map_err(|source| BundleError::Io {
            file: sub.to_owned(),
            source,
        })?;
    }
    write_file(dir, RULES_FILE, &serialize_rules(sig, &bundle.rules))?;
    write_file(dir, TRAIN_FILE, &serialize_facts(sig, &bundle.train))?;
    write_file(
        dir,
        EVAL_SUPPORT_FILE,
        &serialize_facts(sig, &bundle.eval_support),
    )?;
    write_file(
        dir,
        EVAL_CONSEQUENCES_FILE,
        &serialize_facts(sig, &bundle.eval_consequences),
    )?;
    write_file(dir, AUX_SUPPORT_FILE, &serialize_facts(sig, &bundle.support))?;
    write_file(
        dir,
        AUX_CONSEQUENCES_FILE,
        &serialize_facts(sig, &bundle.consequences),
    )?;
    write_file(dir, AUX_FULL_FILE, &serialize_facts(sig, &bundle.full))?;
    write_file(
        dir,
        AUX_FULL_NOISE_FILE,
        &serialize_facts(sig, &bundle.full_noise),
    )?;
    write_file(dir, AUX_OPEN_FILE, &serialize_facts(sig, &bundle.open))?;
    let meta = serde_json::to_string_pretty(&bundle.meta)
        .map_err(|e| BundleError::Meta(e.to_string()))?;
    write_file(dir, META_FILE, &format!("{meta}\n"))
}

fn parse_set(sig: &mut Signature, dir: &Path, name: &str) -> Result<FactSet, BundleError> {
    let text = read_file(dir, name)?;
    parse_facts_into(sig, &text).map_err(|source| BundleError::Parse {
        file: name.to_owned(),
        source,
    })
}

fn invariant(set: &str, message: impl Into<String>) -> BundleError {
    BundleError::Invariant {
        set: set.to_owned(),
        message: message.into(),
    }
}

/// Reads and validates a bundle. The returned signature interns every symbol
/// occurring anywhere in the bundle.
pub fn read_bundle(dir: &Path) -> Result<(Signature, DatasetBundle), BundleError> {
    let meta_text = read_file(dir, META_FILE)?;
    let meta: BundleMeta =
        serde_json::from_str(&meta_text).map_err(|e| BundleError::Meta(e.to_string()))?;

    let mut sig = Signature::new();
    let rules_text = read_file(dir, RULES_FILE)?;
    let rules = parse_rules_into(&mut sig, &rules_text).map_err(|source| BundleError::Parse {
        file: RULES_FILE.to_owned(),
        source,
    })?;
    let train = parse_set(&mut sig, dir, TRAIN_FILE)?;
    let eval_support = parse_set(&mut sig, dir, EVAL_SUPPORT_FILE)?;
    let eval_consequences = parse_set(&mut sig, dir, EVAL_CONSEQUENCES_FILE)?;
    let support = parse_set(&mut sig, dir, AUX_SUPPORT_FILE)?;
    let consequences = parse_set(&mut sig, dir, AUX_CONSEQUENCES_FILE)?;
    let full = parse_set(&mut sig, dir, AUX_FULL_FILE)?;
    let full_noise = parse_set(&mut sig, dir, AUX_FULL_NOISE_FILE)?;
    let open = parse_set(&mut sig, dir, AUX_OPEN_FILE)?;

    let mut target_predicates = BTreeSet::new();
    for name in &meta.target_predicates {
        let id = sig
            .lookup_predicate(name)
            .ok_or_else(|| BundleError::Meta(format!("unknown target predicate `{name}`")))?;
        target_predicates.insert(id);
    }

    let bundle = DatasetBundle {
        rules,
        train,
        eval_support,
        eval_consequences,
        support,
        consequences,
        full,
        full_noise,
        open,
        target_predicates,
        meta,
    };
    validate_bundle(&bundle)?;
    Ok((sig, bundle))
}

/// Checks the definitional invariants between the stored sets.
pub fn validate_bundle(bundle: &DatasetBundle) -> Result<(), BundleError> {
    let derived = inferred(&bundle.rules, &bundle.support);
    if derived != bundle.consequences {
        return Err(invariant(
            AUX_CONSEQUENCES_FILE,
            "stored consequences differ from the closure of the support facts",
        ));
    }
    if bundle.full != bundle.support.union(&bundle.consequences) {
        return Err(invariant(
            AUX_FULL_FILE,
            "full set is not the union of support and consequences",
        ));
    }
    let derived_eval = inferred(&bundle.rules, &bundle.eval_support);
    if derived_eval != bundle.eval_consequences {
        return Err(invariant(
            EVAL_CONSEQUENCES_FILE,
            "stored consequences differ from the closure of the support facts",
        ));
    }
    if !bundle.consequences.is_subset(&bundle.full_noise) {
        return Err(invariant(
            AUX_FULL_NOISE_FILE,
            "noisy full set must contain every consequence",
        ));
    }
    if !bundle.open.is_subset(&bundle.full) {
        return Err(invariant(
            AUX_OPEN_FILE,
            "open-world set must be a subset of the full set",
        ));
    }
    if bundle.train.intersection(&bundle.consequences)
        != bundle.open.intersection(&bundle.consequences)
    {
        return Err(invariant(
            TRAIN_FILE,
            "training set consequences differ from the open-world survivors",
        ));
    }
    let counts = SetCounts {
        support: bundle.support.len(),
        consequences: bundle.consequences.len(),
        target: bundle.target_facts().len(),
        full: bundle.full.len(),
        full_noise: bundle.full_noise.len(),
        open: bundle.open.len(),
        train: bundle.train.len(),
        eval_support: bundle.eval_support.len(),
        eval_consequences: bundle.eval_consequences.len(),
    };
    if counts != bundle.meta.counts {
        return Err(invariant(META_FILE, "set counts differ from the metadata"));
    }
    Ok(())
}
