//! Three-phase fact generation: closed-world instantiation of the rule
//! graphs, open-world deletion, and noise injection, plus the independently
//! generated evaluation sets.
//!
//! Closed-world generation repeatedly instantiates every graph with a fresh
//! assignment, bottom up: leaves emit their body atoms as support facts,
//! inner nodes emit only the body atoms that are not already derivable, and
//! inference runs after every node. Every `n_dg`-th pass instantiates fully;
//! the other passes skip nodes with probability `1/n_skip` and pick a single
//! alternative below each OR group. Generation stops as soon as the
//! projected post-deletion training size reaches the requested minimum.

use std::collections::BTreeSet;

use rand::Rng;

use crate::bundle::{BundleMeta, ComponentMeta, DatasetBundle, SetCounts};
use crate::config::{derive_rng, GeneratorConfig};
use crate::infer::{inferred, IncrementalClosure, Substitution};
use crate::rulegen::{generate_rule_graphs, preprocess, GenError, RuleGraph};
use crate::syntax::{ConstId, Fact, FactSet, PredId, Program, Signature};

const PASS_CAP: u64 = 10_000;

/// Union of all graph rules as one program.
pub fn merged_program(graphs: &[RuleGraph]) -> Program {
    let mut program = Program::new();
    for graph in graphs {
        for node in &graph.nodes {
            program.insert(node.rule.clone());
        }
    }
    program
}

/// The ground-truth sets of one closed-world generation run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedWorldSets {
    /// Support facts S.
    pub support: FactSet,
    /// Consequences C = inferred(rules, S).
    pub consequences: FactSet,
    /// Target facts T: the consequences on the target predicates.
    pub target_facts: FactSet,
    pub target_predicates: BTreeSet<PredId>,
}

/// Round-half-up of `fraction * count`, the rounding rule used for every
/// percentage knob. The epsilon absorbs binary representation error of
/// decimal fractions.
pub fn share(fraction: f64, count: usize) -> usize {
    (fraction * count as f64 + 0.5 + 1e-9).floor() as usize
}

/// Number of noise facts to add to `clean` facts so the slice contains the
/// requested noise fraction: the least k with k >= fraction * (clean + k).
pub fn noise_count(fraction: f64, clean: usize) -> usize {
    if fraction <= 0.0 {
        return 0;
    }
    (fraction * clean as f64 / (1.0 - fraction) - 1e-6).ceil().max(0.0) as usize
}

fn sample_facts(set: &FactSet, count: usize, rng: &mut impl Rng) -> FactSet {
    let all: Vec<&Fact> = set.iter().collect();
    let count = count.min(all.len());
    rand::seq::index::sample(rng, all.len(), count)
        .iter()
        .map(|i| all[i].clone())
        .collect()
}

/// Deletes consequences according to the open-world degree and returns the
/// remaining facts (support facts are never deleted here). With
/// `split_target`, the degree is applied separately to the target facts and
/// to the other consequences; otherwise to the consequences as a whole.
pub fn apply_open_world(
    cw: &ClosedWorldSets,
    n_ow: f64,
    split_target: bool,
    rng: &mut impl Rng,
) -> FactSet {
    let removed = if split_target {
        let rest = cw.consequences.difference(&cw.target_facts);
        let mut removed = sample_facts(&rest, share(n_ow, rest.len()), rng);
        removed.extend(
            sample_facts(&cw.target_facts, share(n_ow, cw.target_facts.len()), rng)
                .iter()
                .cloned(),
        );
        removed
    } else {
        sample_facts(&cw.consequences, share(n_ow, cw.consequences.len()), rng)
    };
    cw.support.union(&cw.consequences.difference(&removed))
}

/// Draws `count` distinct ground atoms over `preds`, uniformly over the
/// corresponding slice of the Herbrand base, rejecting anything in `reject`.
fn sample_fresh_facts(
    sig: &Signature,
    preds: &[PredId],
    count: usize,
    reject: &[&FactSet],
    rng: &mut impl Rng,
) -> Result<FactSet, GenError> {
    let mut out = FactSet::new();
    if count == 0 {
        return Ok(out);
    }
    let n_consts = sig.num_constants() as u128;
    let weights: Vec<u128> = preds
        .iter()
        .map(|&p| n_consts.saturating_pow(sig.arity(p) as u32))
        .collect();
    let total: u128 = weights.iter().sum();
    let pred_set: BTreeSet<PredId> = preds.iter().copied().collect();
    let occupied: usize = {
        let mut seen = FactSet::new();
        for set in reject {
            seen.extend(set.restrict_to_predicates(&pred_set).iter().cloned());
        }
        seen.len()
    };
    if total < count as u128 + occupied as u128 {
        return Err(GenError::BaseExhausted(format!(
            "need {count} fresh facts over {} ground atoms, {occupied} occupied",
            total
        )));
    }
    let mut tries: u64 = 0;
    let cap = 10_000 + 1_000 * count as u64;
    while out.len() < count {
        tries += 1;
        if tries > cap {
            return Err(GenError::BaseExhausted(
                "rejection sampling made no progress".to_owned(),
            ));
        }
        let mut r = rng.random_range(0..total);
        let mut chosen = preds[0];
        for (&p, &w) in preds.iter().zip(&weights) {
            if r < w {
                chosen = p;
                break;
            }
            r -= w;
        }
        let args: Vec<ConstId> = (0..sig.arity(chosen))
            .map(|_| ConstId(rng.random_range(0..sig.num_constants()) as u32))
            .collect();
        let fact = Fact::new(chosen, args);
        if reject.iter().any(|s| s.contains(&fact)) || out.contains(&fact) {
            continue;
        }
        out.insert(fact);
    }
    Ok(out)
}

/// Removes a share of the support facts and adds fresh noise facts so that
/// both the non-target slice and the target slice of the result contain the
/// requested noise fraction. Noise never collides with the consequences or
/// with the original support facts.
pub fn inject_noise(
    base: &FactSet,
    cw: &ClosedWorldSets,
    n_minus: f64,
    n_plus: f64,
    sig: &Signature,
    rng: &mut impl Rng,
) -> Result<FactSet, GenError> {
    let removed = sample_facts(&cw.support, share(n_minus, cw.support.len()), rng);
    let mut current = base.difference(&removed);

    let non_target_preds: Vec<PredId> = sig
        .predicates()
        .filter(|p| !cw.target_predicates.contains(p))
        .collect();
    let clean_non_target = current.without_predicates(&cw.target_predicates).len();
    let k = noise_count(n_plus, clean_non_target);
    let noise = sample_fresh_facts(
        sig,
        &non_target_preds,
        k,
        &[&cw.consequences, &cw.support, &current],
        rng,
    )?;
    current.extend(noise.iter().cloned());

    let target_preds: Vec<PredId> = cw.target_predicates.iter().copied().collect();
    if !target_preds.is_empty() {
        let clean_target = current.restrict_to_predicates(&cw.target_predicates).len();
        let k = noise_count(n_plus, clean_target);
        let noise = sample_fresh_facts(
            sig,
            &target_preds,
            k,
            &[&cw.target_facts, &cw.support, &current],
            rng,
        )?;
        current.extend(noise.iter().cloned());
    }
    Ok(current)
}

/// Resumable closed-world generation over a set of rule graphs.
struct ClosedWorldGen<'a, R: Rng> {
    graphs: &'a [RuleGraph],
    program: &'a Program,
    targets: &'a BTreeSet<PredId>,
    config: &'a GeneratorConfig,
    sig: &'a Signature,
    rng: &'a mut R,
    engine: IncrementalClosure<'a>,
    support: FactSet,
    pass: u64,
}

impl<'a, R: Rng> ClosedWorldGen<'a, R> {
    fn new(
        graphs: &'a [RuleGraph],
        program: &'a Program,
        targets: &'a BTreeSet<PredId>,
        config: &'a GeneratorConfig,
        sig: &'a Signature,
        rng: &'a mut R,
    ) -> Self {
        ClosedWorldGen {
            graphs,
            program,
            targets,
            config,
            sig,
            rng,
            engine: IncrementalClosure::new(program),
            support: FactSet::new(),
            pass: 0,
        }
    }

    fn run_pass(&mut self) {
        self.pass += 1;
        let full = self.pass % u64::from(self.config.n_dg) == 0;
        let skip_prob = 1.0 / f64::from(self.config.n_skip);
        for graph in self.graphs {
            let mut sigma = Substitution::new();
            for var in graph.variables() {
                let c = ConstId(self.rng.random_range(0..self.sig.num_constants()) as u32);
                sigma.bind(var, c);
            }
            // In partial passes, only one alternative below each OR group is
            // instantiated; the other alternatives and their subtrees are
            // dropped for this pass.
            let mut excluded: BTreeSet<usize> = BTreeSet::new();
            if !full {
                for group in &graph.or_groups {
                    let survivor = group[self.rng.random_range(0..group.len())];
                    for &alt in group {
                        if alt != survivor {
                            excluded.extend(graph.subtree(alt));
                        }
                    }
                }
            }
            let mut levels: Vec<usize> = graph.nodes.iter().map(|n| n.level).collect();
            levels.sort_unstable();
            levels.dedup();
            for &level in levels.iter().rev() {
                for (idx, node) in graph.nodes.iter().enumerate() {
                    if node.level != level || excluded.contains(&idx) {
                        continue;
                    }
                    if !full && self.rng.random_bool(skip_prob) {
                        continue;
                    }
                    let is_leaf = node.children.is_empty();
                    // Filter against the consequences known before this
                    // node, then emit and re-infer.
                    let to_add: Vec<Fact> = node
                        .rule
                        .body()
                        .iter()
                        .map(|atom| {
                            sigma
                                .apply(atom)
                                .expect("assignment covers every graph variable")
                        })
                        .filter(|fact| is_leaf || !self.engine.derived().contains(fact))
                        .collect();
                    for fact in to_add {
                        self.support.insert(fact.clone());
                        self.engine.add_input(fact);
                    }
                }
            }
        }
    }

    /// Conservative lower bound for the training-set size the current sets
    /// will produce after deletion and noise injection.
    fn projected_train(&self, n_ow: f64, n_minus: f64, n_plus: f64) -> usize {
        let s = self.support.len();
        let consequences = self.engine.derived().difference(&self.support);
        let t = consequences.restrict_to_predicates(self.targets).len();
        let c_nt = consequences.len() - t;
        let s_kept = s - share(n_minus, s);
        let c_kept = if self.config.split_target {
            (c_nt - share(n_ow, c_nt)) + (t - share(n_ow, t))
        } else {
            let c = c_nt + t;
            c - share(n_ow, c)
        };
        let clean = s_kept + c_kept;
        clean + noise_count(n_plus, clean)
    }

    fn finish(self) -> ClosedWorldSets {
        let consequences = inferred(self.program, &self.support);
        let target_facts = consequences.restrict_to_predicates(self.targets);
        ClosedWorldSets {
            support: self.support,
            consequences,
            target_facts,
            target_predicates: self.targets.clone(),
        }
    }
}

fn run_until(
    gen: &mut ClosedWorldGen<'_, impl Rng>,
    min_facts: usize,
    n_ow: f64,
    n_minus: f64,
    n_plus: f64,
) -> Result<(), GenError> {
    while gen.projected_train(n_ow, n_minus, n_plus) < min_facts {
        if gen.pass >= PASS_CAP {
            return Err(GenError::SizeUnreachable(format!(
                "projected training size stuck at {} after {} passes, need {min_facts}",
                gen.projected_train(n_ow, n_minus, n_plus),
                gen.pass
            )));
        }
        gen.run_pass();
    }
    Ok(())
}

/// Runs closed-world passes until the projected post-deletion training size
/// reaches the configured minimum.
pub fn generate_closed_world(
    graphs: &[RuleGraph],
    program: &Program,
    targets: &BTreeSet<PredId>,
    config: &GeneratorConfig,
    sig: &Signature,
    rng: &mut impl Rng,
) -> Result<ClosedWorldSets, GenError> {
    let (min_facts, _) = config.fact_bounds();
    let mut gen = ClosedWorldGen::new(graphs, program, targets, config, sig, rng);
    run_until(
        &mut gen,
        min_facts,
        config.n_ow,
        config.n_noise_minus,
        config.n_noise_plus,
    )?;
    Ok(gen.finish())
}

/// Generates the evaluation sets S' and C' the same way as the closed-world
/// sets, with independent assignments and neither deletion nor noise.
pub fn generate_eval_sets(
    graphs: &[RuleGraph],
    program: &Program,
    targets: &BTreeSet<PredId>,
    config: &GeneratorConfig,
    sig: &Signature,
    rng: &mut impl Rng,
) -> Result<(FactSet, FactSet), GenError> {
    let (min_facts, _) = config.fact_bounds();
    let mut gen = ClosedWorldGen::new(graphs, program, targets, config, sig, rng);
    run_until(&mut gen, min_facts, 0.0, 0.0, 0.0)?;
    let sets = gen.finish();
    Ok((sets.support, sets.consequences))
}

/// Assembles the full bundle from the generated pieces; the noisy full set
/// is derived here by injecting noise into S union C without any open-world
/// deletion.
#[allow(clippy::too_many_arguments)]
pub fn build_bundle(
    sig: &Signature,
    graphs: &[RuleGraph],
    cw: &ClosedWorldSets,
    open: FactSet,
    train: FactSet,
    eval_support: FactSet,
    eval_consequences: FactSet,
    config: &GeneratorConfig,
    seed: u64,
    dataset_index: u64,
    rng: &mut impl Rng,
) -> Result<DatasetBundle, GenError> {
    let rules = merged_program(graphs);
    let full = cw.support.union(&cw.consequences);
    let full_noise = inject_noise(
        &full,
        cw,
        config.n_noise_minus,
        config.n_noise_plus,
        sig,
        rng,
    )?;
    let eval_all = eval_support.union(&eval_consequences);
    let counts = SetCounts {
        support: cw.support.len(),
        consequences: cw.consequences.len(),
        target: cw.target_facts.len(),
        full: full.len(),
        full_noise: full_noise.len(),
        open: open.len(),
        train: train.len(),
        eval_support: eval_support.len(),
        eval_consequences: eval_consequences.len(),
    };
    let meta = BundleMeta {
        config: config.clone(),
        seed,
        dataset_index,
        target_predicates: cw
            .target_predicates
            .iter()
            .map(|&p| sig.predicate_name(p).to_owned())
            .collect(),
        components: graphs
            .iter()
            .map(|g| ComponentMeta {
                category: g.category,
                depth: g.depth,
                rules: g.nodes.len(),
                target: sig.predicate_name(g.target_predicate()).to_owned(),
            })
            .collect(),
        counts,
        eval_overlap_with_train: eval_all.intersection(&train).len(),
    };
    Ok(DatasetBundle {
        rules,
        train,
        eval_support,
        eval_consequences,
        support: cw.support.clone(),
        consequences: cw.consequences.clone(),
        full,
        full_noise,
        open,
        target_predicates: cw.target_predicates.clone(),
        meta,
    })
}

/// The end-to-end pipeline: preprocessing, rule generation, the three fact
/// phases, evaluation sets, bundle assembly. Dataset `index` of a batch uses
/// the RNG stream derived from `(config.seed, index)`.
pub fn generate_dataset(
    config: &GeneratorConfig,
    index: u64,
) -> Result<(Signature, DatasetBundle), GenError> {
    let mut rng = derive_rng(config.seed, index);
    let plan = preprocess(config, &mut rng)?;
    let graphs = generate_rule_graphs(config, &plan, &mut rng)?;
    let program = merged_program(&graphs);
    let targets: BTreeSet<PredId> = plan.components.iter().map(|c| c.target).collect();
    let sig = plan.signature.clone();

    let cw = generate_closed_world(&graphs, &program, &targets, config, &sig, &mut rng)?;
    let open = apply_open_world(&cw, config.n_ow, config.split_target, &mut rng);
    let train = inject_noise(
        &open,
        &cw,
        config.n_noise_minus,
        config.n_noise_plus,
        &sig,
        &mut rng,
    )?;
    let (eval_support, eval_consequences) =
        generate_eval_sets(&graphs, &program, &targets, config, &sig, &mut rng)?;
    let bundle = build_bundle(
        &sig,
        &graphs,
        &cw,
        open,
        train,
        eval_support,
        eval_consequences,
        config,
        config.seed,
        index,
        &mut rng,
    )?;
    Ok((sig, bundle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulegen::GraphNode;
    use crate::syntax::{Atom, Rule, Term, VarId};
    use crate::text::parse_facts_into;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn config(extra: &str) -> GeneratorConfig {
        serde_json::from_str(&format!(
            r#"{{
                "num_predicates": 11, "num_constants": 40,
                "arity_min": 2, "arity_max": 2,
                "num_rules": 2, "max_rule_length": 2,
                "category": "chain", "max_depth": 2,
                "seed": 5, "recursion_prob": 0.0{extra}
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn share_rounds_half_up() {
        assert_eq!(share(0.3, 10), 3);
        assert_eq!(share(0.15, 10), 2);
        assert_eq!(share(1.0, 7), 7);
        assert_eq!(share(0.0, 5), 0);
        assert_eq!(share(0.2, 10), 2);
    }

    #[test]
    fn noise_counts() {
        assert_eq!(noise_count(0.1, 90), 10);
        assert_eq!(noise_count(0.3, 7), 3);
        assert_eq!(noise_count(0.0, 50), 0);
        assert_eq!(noise_count(0.5, 10), 10);
        // k/(clean+k) reaches the fraction within one fact.
        for clean in [1usize, 13, 97, 1000] {
            for p in [0.1, 0.2, 0.3] {
                let k = noise_count(p, clean) as f64;
                let measured = k / (clean as f64 + k);
                assert!((measured - p).abs() * (clean as f64 + k) <= 1.0 + 1e-9);
            }
        }
    }

    /// A graph shaped like a two-rule chain with graph-scoped variables.
    fn chain_graph(sig: &mut Signature) -> RuleGraph {
        let p8 = sig.add_predicate("p8", 2).unwrap();
        let p6 = sig.add_predicate("p6", 2).unwrap();
        let p4 = sig.add_predicate("p4", 2).unwrap();
        let p0 = sig.add_predicate("p0", 2).unwrap();
        let p9 = sig.add_predicate("p9", 2).unwrap();
        let v = |i: u32| Term::Var(VarId(i));
        let root = Rule::new(
            Atom::new(p8, vec![v(0), v(1)]),
            vec![Atom::new(p6, vec![v(0), v(2)]), Atom::new(p4, vec![v(1), v(0)])],
        )
        .unwrap();
        let child = Rule::new(
            Atom::new(p6, vec![v(0), v(2)]),
            vec![Atom::new(p0, vec![v(3), v(0)]), Atom::new(p9, vec![v(4), v(2)])],
        )
        .unwrap();
        RuleGraph {
            category: crate::config::Category::Chain,
            depth: 2,
            nodes: vec![
                GraphNode {
                    rule: root,
                    level: 1,
                    parent: None,
                    children: vec![1],
                },
                GraphNode {
                    rule: child,
                    level: 2,
                    parent: Some(0),
                    children: vec![],
                },
            ],
            or_groups: vec![],
        }
    }

    #[test]
    fn single_full_pass_hand_simulated() {
        let mut sig = Signature::new();
        let graph = chain_graph(&mut sig);
        for i in 0..40 {
            sig.add_constant(&format!("c{i}"));
        }
        let program = merged_program(std::slice::from_ref(&graph));
        let targets: BTreeSet<PredId> = [graph.target_predicate()].into();
        let mut cfg = config(r#", "facts_min": 1, "facts_max": 1000"#);
        cfg.n_dg = 1; // every pass full
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let cw = generate_closed_world(
            std::slice::from_ref(&graph),
            &program,
            &targets,
            &cfg,
            &sig,
            &mut rng,
        )
        .unwrap();
        // One full pass with distinct assignments: the leaf emits its two
        // body facts, the root emits only its undefined body atom, and the
        // consequences are one head fact per node.
        assert_eq!(cw.support.len(), 3);
        assert_eq!(cw.consequences.len(), 2);
        assert_eq!(cw.target_facts.len(), 1);
        assert_eq!(cw.consequences, inferred(&program, &cw.support));
        assert!(cw.support.is_disjoint(&cw.consequences));
    }

    fn synthetic_cw(sig: &mut Signature, s: usize, c_nt: usize, t: usize) -> ClosedWorldSets {
        let sp = sig.add_predicate("s", 2).unwrap();
        let cp = sig.add_predicate("c", 2).unwrap();
        let tp = sig.add_predicate("t", 2).unwrap();
        for i in 0..60 {
            sig.add_constant(&format!("k{i}"));
        }
        let fact = |p, i: usize| Fact::new(p, vec![ConstId(i as u32), ConstId(i as u32)]);
        let support: FactSet = (0..s).map(|i| fact(sp, i)).collect();
        let non_target: FactSet = (0..c_nt).map(|i| fact(cp, i)).collect();
        let target_facts: FactSet = (0..t).map(|i| fact(tp, i)).collect();
        ClosedWorldSets {
            support,
            consequences: non_target.union(&target_facts),
            target_facts,
            target_predicates: [tp].into(),
        }
    }

    #[test]
    fn open_world_extremes() {
        let mut sig = Signature::new();
        let cw = synthetic_cw(&mut sig, 5, 10, 10);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let keep_all = apply_open_world(&cw, 0.0, true, &mut rng);
        assert_eq!(keep_all, cw.support.union(&cw.consequences));
        let drop_all = apply_open_world(&cw, 1.0, true, &mut rng);
        assert_eq!(drop_all, cw.support);
    }

    #[test]
    fn open_world_split_counts() {
        let mut sig = Signature::new();
        let cw = synthetic_cw(&mut sig, 5, 10, 10);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let open = apply_open_world(&cw, 0.3, true, &mut rng);
        let rest = cw.consequences.difference(&cw.target_facts);
        let kept_nt = open.intersection(&rest).len();
        let kept_t = open.intersection(&cw.target_facts).len();
        assert_eq!(kept_nt, 7);
        assert_eq!(kept_t, 7);
        assert!(cw.support.is_subset(&open));

        // Unsplit deletion removes from the consequences as a whole.
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let open = apply_open_world(&cw, 0.3, false, &mut rng);
        assert_eq!(open.intersection(&cw.consequences).len(), 14);
    }

    #[test]
    fn noise_identity_when_zero() {
        let mut sig = Signature::new();
        let cw = synthetic_cw(&mut sig, 5, 10, 10);
        let base = cw.support.union(&cw.consequences);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let noisy = inject_noise(&base, &cw, 0.0, 0.0, &sig, &mut rng).unwrap();
        assert_eq!(noisy, base);
    }

    #[test]
    fn noise_removal_count() {
        let mut sig = Signature::new();
        let cw = synthetic_cw(&mut sig, 10, 10, 10);
        let base = cw.support.union(&cw.consequences);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let noisy = inject_noise(&base, &cw, 0.2, 0.0, &sig, &mut rng).unwrap();
        assert_eq!(cw.support.difference(&noisy).len(), 2);
        assert!(cw.consequences.is_subset(&noisy));
    }

    #[test]
    fn noise_addition_fraction() {
        let mut sig = Signature::new();
        // 90 clean non-target facts (support only), no target slice.
        let cw = synthetic_cw(&mut sig, 90, 0, 0);
        let base = cw.support.clone();
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let noisy = inject_noise(&base, &cw, 0.0, 0.1, &sig, &mut rng).unwrap();
        let added = noisy.difference(&base);
        assert_eq!(added.len(), 10);
        assert!(added.is_disjoint(&cw.consequences));
        assert!(added.is_disjoint(&cw.support));

        // The target slice gets its own noise share.
        let mut sig = Signature::new();
        let cw = synthetic_cw(&mut sig, 0, 0, 18);
        let base = cw.consequences.clone();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let noisy = inject_noise(&base, &cw, 0.0, 0.1, &sig, &mut rng).unwrap();
        let target_slice = noisy.restrict_to_predicates(&cw.target_predicates);
        let noise = target_slice.difference(&cw.target_facts);
        assert_eq!(noise.len(), 2);
        assert!(noise.is_disjoint(&cw.target_facts));
    }

    #[test]
    fn noise_errors_when_base_too_small() {
        let mut sig = Signature::new();
        let s = sig.add_predicate("s", 1).unwrap();
        sig.add_constant("a");
        sig.add_constant("b");
        let support: FactSet = [Fact::new(s, vec![ConstId(0)])].into_iter().collect();
        let cw = ClosedWorldSets {
            support: support.clone(),
            consequences: FactSet::new(),
            target_facts: FactSet::new(),
            target_predicates: BTreeSet::new(),
        };
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        // Needs 9 fresh unary facts over a base of 2.
        let err = inject_noise(&support, &cw, 0.0, 0.9, &sig, &mut rng);
        assert!(matches!(err, Err(GenError::BaseExhausted(_))));
    }

    #[test]
    fn eval_sets_are_definitional() {
        let cfg = config(r#", "size_class": "xs", "n_ow": 0.3"#);
        let (sig, bundle) = generate_dataset(&cfg, 0).unwrap();
        assert_eq!(
            bundle.eval_consequences,
            inferred(&bundle.rules, &bundle.eval_support)
        );
        assert!(bundle.eval_support.is_disjoint(&bundle.eval_consequences));
        drop(sig);
    }

    #[test]
    fn pipeline_xs_size_window() {
        let cfg = config(
            r#", "size_class": "xs", "n_ow": 0.3, "n_noise_minus": 0.2, "n_noise_plus": 0.1"#,
        );
        for index in 0..5 {
            let (_, bundle) = generate_dataset(&cfg, index).unwrap();
            let n = bundle.train.len();
            assert!((50..=110).contains(&n), "train size {n}");
            assert_eq!(bundle.consequences, inferred(&bundle.rules, &bundle.support));
            assert_eq!(bundle.full, bundle.support.union(&bundle.consequences));
        }
    }

    #[test]
    fn zero_knobs_collapse_sets() {
        let cfg = config(r#", "size_class": "xs""#);
        let (_, bundle) = generate_dataset(&cfg, 1).unwrap();
        assert_eq!(bundle.train, bundle.full);
        assert_eq!(bundle.open, bundle.full);
        assert_eq!(bundle.full_noise, bundle.full);
    }

    #[test]
    fn pipeline_is_deterministic() {
        let cfg = config(
            r#", "size_class": "xs", "n_ow": 0.2, "n_noise_minus": 0.15, "n_noise_plus": 0.1"#,
        );
        let (_, a) = generate_dataset(&cfg, 3).unwrap();
        let (_, b) = generate_dataset(&cfg, 3).unwrap();
        assert_eq!(a, b);
        let (_, c) = generate_dataset(&cfg, 4).unwrap();
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn skipping_only_removes_emissions() {
        // With the skip probability driven to zero every partial pass emits
        // a superset of what a skipping run emits.
        let mut sig_a = Signature::new();
        let graph_a = chain_graph(&mut sig_a);
        for i in 0..40 {
            sig_a.add_constant(&format!("c{i}"));
        }
        let program = merged_program(std::slice::from_ref(&graph_a));
        let targets: BTreeSet<PredId> = [graph_a.target_predicate()].into();
        let mut no_skip = config(r#", "facts_min": 30, "facts_max": 1000"#);
        no_skip.n_skip = u32::MAX;
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let a = generate_closed_world(
            std::slice::from_ref(&graph_a),
            &program,
            &targets,
            &no_skip,
            &sig_a,
            &mut rng,
        )
        .unwrap();
        assert!(a.support.len() >= 30 - a.consequences.len());

        let mut skipping = no_skip.clone();
        skipping.n_skip = 2;
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let b = generate_closed_world(
            std::slice::from_ref(&graph_a),
            &program,
            &targets,
            &skipping,
            &sig_a,
            &mut rng,
        )
        .unwrap();
        assert_eq!(b.consequences, inferred(&program, &b.support));
    }

    use crate::infer::inferred;

    #[test]
    fn unreachable_size_errors() {
        let mut sig = Signature::new();
        let graph = chain_graph(&mut sig);
        // Two constants cap the reachable support size far below the goal.
        sig.add_constant("a");
        sig.add_constant("b");
        let program = merged_program(std::slice::from_ref(&graph));
        let targets: BTreeSet<PredId> = [graph.target_predicate()].into();
        let cfg = config(r#", "facts_min": 500, "facts_max": 1000"#);
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let err = generate_closed_world(
            std::slice::from_ref(&graph),
            &program,
            &targets,
            &cfg,
            &sig,
            &mut rng,
        );
        assert!(matches!(err, Err(GenError::SizeUnreachable(_))));
    }

    #[test]
    fn parsing_helper_roundtrip() {
        // Keeps the parse helper import used and sanity-checks set algebra
        // against parsed facts.
        let mut sig = Signature::new();
        let facts = parse_facts_into(&mut sig, "a(x).\nb(y).").unwrap();
        assert_eq!(facts.len(), 2);
    }
}
