//! Synthetic rule-learning benchmark toolkit: a generator for datalog rule
//! graphs and fact sets with controlled incompleteness and noise, a
//! forward-chaining inference engine, and evaluation measures comparing
//! learned rule sets against the ground truth.

pub mod bundle;
pub mod config;
pub mod factgen;
pub mod infer;
pub mod metrics;
pub mod rulegen;
pub mod syntax;
pub mod text;

pub use bundle::{read_bundle, write_bundle, BundleError, BundleMeta, DatasetBundle};
pub use config::{derive_rng, Category, DatasetCategory, GeneratorConfig, SizeClass};
pub use factgen::{generate_dataset, ClosedWorldSets};
pub use infer::{apply_rule_once, closure, closure_naive, inferred, Substitution};
pub use metrics::{evaluate, EvalOptions, MetricsReport};
pub use rulegen::{
    generate_rule_graphs, preprocess, validate_category, GenError, ResolvedPlan, RuleGraph,
};
pub use syntax::{
    signature_of, Atom, ConstId, Fact, FactSet, PredId, Program, Rule, Signature, Term, VarId,
};
pub use text::{
    parse_facts, parse_facts_into, parse_rules, parse_rules_into, serialize_facts,
    serialize_rules, ParseError,
};
