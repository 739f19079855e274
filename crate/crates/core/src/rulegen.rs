//! Rule dependency graph generation.
//!
//! Graphs are generated top down, breadth first. Every node is a rule; an
//! edge says that the child's head predicate occurs in the parent's body, so
//! facts inferred by the child can feed the parent. Which body atoms get
//! defining children, the rule lengths, and the terms are random within the
//! configured bounds; the planned depth is always reached along one spine of
//! nodes, and the category's existential requirement (a multi-child node for
//! RDG, an OR group for DRDG) is placed on a randomly chosen spine level.
//!
//! Head predicates are globally distinct across nodes, except DRDG
//! alternatives under one OR slot, which share theirs. Predicates drawn for
//! undefined body atoms never later become heads, so the edge structure is
//! exactly the one constructed here.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::config::{Category, DatasetCategory, GeneratorConfig};
use crate::syntax::{Atom, ConstId, PredId, Program, Rule, Signature, Term, VarId};

const MAX_RETRIES: usize = 100;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error("generation budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("requested size unreachable: {0}")]
    SizeUnreachable(String),
    #[error("herbrand base exhausted: {0}")]
    BaseExhausted(String),
}

/// Shape of one connected component fixed during preprocessing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentPlan {
    pub category: Category,
    pub depth: usize,
    pub target: PredId,
}

/// Everything preprocessing resolves before rule generation: the symbol
/// table and the per-component categories, depths and target predicates.
#[derive(Clone, Debug)]
pub struct ResolvedPlan {
    pub signature: Signature,
    pub components: Vec<ComponentPlan>,
}

/// One rule node of a generated graph. Variable ids are graph scoped: a
/// child's head atom reuses the variables of the parent body atom it
/// defines, which is what connects instantiations during fact generation.
#[derive(Clone, Debug)]
pub struct GraphNode {
    pub rule: Rule,
    pub level: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// A generated rule dependency graph (one connected component).
#[derive(Clone, Debug)]
pub struct RuleGraph {
    pub category: Category,
    pub depth: usize,
    /// Node 0 is the root.
    pub nodes: Vec<GraphNode>,
    /// Groups of alternative rules sharing one defined body atom.
    pub or_groups: Vec<Vec<usize>>,
}

impl RuleGraph {
    pub fn root(&self) -> &GraphNode {
        &self.nodes[0]
    }

    /// Head predicate of the root rule.
    pub fn target_predicate(&self) -> PredId {
        self.root().rule.head_predicate()
    }

    /// All graph-scoped variables of all rules.
    pub fn variables(&self) -> BTreeSet<VarId> {
        self.nodes.iter().flat_map(|n| n.rule.variables()).collect()
    }

    pub fn program(&self) -> Program {
        self.nodes.iter().map(|n| n.rule.clone()).collect()
    }

    /// Indices of `node` and all its descendants.
    pub fn subtree(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(i) = stack.pop() {
            out.push(i);
            stack.extend(self.nodes[i].children.iter().copied());
        }
        out
    }
}

/// Probabilities of the term-filling cascade.
#[derive(Clone, Copy, Debug)]
pub struct TermProbs {
    pub head: f64,
    pub existing: f64,
    pub constant: f64,
}

impl TermProbs {
    pub fn from_config(config: &GeneratorConfig) -> Self {
        TermProbs {
            head: config.prob_head,
            existing: config.prob_existing,
            constant: config.prob_constant,
        }
    }
}

/// Outcome of one cascade draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermChoice {
    HeadVar(VarId),
    ExistingVar(VarId),
    Constant(ConstId),
    FreshVar,
}

/// Draws one term by the sequential cascade: a head variable with
/// probability `head`, else a variable introduced so far with `existing`,
/// else a constant with `constant`, else a fresh variable. Empty pools are
/// skipped, their mass falls through to the later branches.
pub fn fill_term(
    head_vars: &[VarId],
    introduced: &[VarId],
    constants: &[ConstId],
    probs: &TermProbs,
    rng: &mut impl Rng,
) -> TermChoice {
    if !head_vars.is_empty() && rng.random_bool(probs.head) {
        return TermChoice::HeadVar(head_vars[rng.random_range(0..head_vars.len())]);
    }
    if !introduced.is_empty() && rng.random_bool(probs.existing) {
        return TermChoice::ExistingVar(introduced[rng.random_range(0..introduced.len())]);
    }
    if !constants.is_empty() && rng.random_bool(probs.constant) {
        return TermChoice::Constant(constants[rng.random_range(0..constants.len())]);
    }
    TermChoice::FreshVar
}

fn category_min_depth(category: Category) -> usize {
    match category {
        Category::Chain => 1,
        Category::Rdg | Category::Drdg => 2,
    }
}

fn min_rules(category: Category, depth: usize) -> usize {
    match category {
        Category::Chain => depth,
        Category::Rdg | Category::Drdg => depth + 1,
    }
}

/// Fresh head predicates a minimal component consumes, target included.
fn min_heads(category: Category, depth: usize) -> usize {
    match category {
        // DRDG's extra alternative shares the head of the spine slot.
        Category::Chain | Category::Drdg => depth,
        Category::Rdg => depth + 1,
    }
}

/// Resolves component count, categories, depths and targets, and checks the
/// symbol and rule budgets admit the plan. The maximal depth is achieved by
/// at least one component.
pub fn preprocess(config: &GeneratorConfig, rng: &mut impl Rng) -> Result<ResolvedPlan, GenError> {
    config
        .validate()
        .map_err(|e| GenError::Infeasible(e.to_string()))?;

    let mut signature = Signature::new();
    for i in 0..config.num_predicates {
        let arity = rng.random_range(config.arity_min..=config.arity_max);
        signature
            .add_predicate(&format!("p{i}"), arity)
            .expect("fresh names cannot conflict");
    }
    for i in 0..config.num_constants {
        signature.add_constant(&format!("c{i}"));
    }

    let n_components = rng.random_range(config.components_min..=config.components_max);

    let feasible: Vec<Category> = [Category::Chain, Category::Rdg, Category::Drdg]
        .into_iter()
        .filter(|c| category_min_depth(*c) <= config.max_depth)
        .collect();
    let categories: Vec<Category> = (0..n_components)
        .map(|_| match config.category {
            DatasetCategory::Chain => Ok(Category::Chain),
            DatasetCategory::Rdg => Ok(Category::Rdg),
            DatasetCategory::Drdg => Ok(Category::Drdg),
            DatasetCategory::Mixed => {
                if feasible.is_empty() {
                    Err(GenError::Infeasible(
                        "max_depth admits no category".to_owned(),
                    ))
                } else {
                    Ok(feasible[rng.random_range(0..feasible.len())])
                }
            }
        })
        .collect::<Result<_, _>>()?;

    for &cat in &categories {
        if category_min_depth(cat) > config.max_depth {
            return Err(GenError::Infeasible(format!(
                "category {cat} needs depth at least {}, max_depth is {}",
                category_min_depth(cat),
                config.max_depth
            )));
        }
        if cat == Category::Rdg && config.max_rule_length < 2 {
            return Err(GenError::Infeasible(
                "category rdg needs max_rule_length at least 2".to_owned(),
            ));
        }
    }

    let mut depths: Vec<usize> = categories
        .iter()
        .map(|&c| rng.random_range(category_min_depth(c)..=config.max_depth))
        .collect();
    let forced = rng.random_range(0..n_components);
    depths[forced] = config.max_depth;

    let rule_need: usize = categories
        .iter()
        .zip(&depths)
        .map(|(&c, &d)| min_rules(c, d))
        .sum();
    if rule_need > config.num_rules {
        return Err(GenError::Infeasible(format!(
            "plan needs at least {rule_need} rules, num_rules is {}",
            config.num_rules
        )));
    }

    let n_targets = if config.same_target { 1 } else { n_components };
    let head_need: usize = categories
        .iter()
        .zip(&depths)
        .map(|(&c, &d)| min_heads(c, d) - 1)
        .sum::<usize>()
        + n_targets
        + 1;
    if head_need > config.num_predicates {
        return Err(GenError::Infeasible(format!(
            "plan needs at least {head_need} predicates, num_predicates is {}",
            config.num_predicates
        )));
    }

    // Draw distinct target predicates.
    let mut pool: Vec<PredId> = signature.predicates().collect();
    let mut targets = Vec::with_capacity(n_targets);
    for _ in 0..n_targets {
        let i = rng.random_range(0..pool.len());
        targets.push(pool.swap_remove(i));
    }

    let components = categories
        .into_iter()
        .zip(depths)
        .enumerate()
        .map(|(i, (category, depth))| ComponentPlan {
            category,
            depth,
            target: if config.same_target {
                targets[0]
            } else {
                targets[i]
            },
        })
        .collect();

    Ok(ResolvedPlan {
        signature,
        components,
    })
}

/// Predicate pools shared by all components of one generation run.
struct SymbolPools {
    /// Predicates that have not appeared anywhere yet; candidates for new
    /// head predicates.
    unused: Vec<PredId>,
    /// Predicates that are not heads; candidates for undefined body atoms.
    extensional: Vec<PredId>,
}

impl SymbolPools {
    fn new(signature: &Signature, targets: &BTreeSet<PredId>) -> Self {
        let all: Vec<PredId> = signature.predicates().collect();
        SymbolPools {
            unused: all
                .iter()
                .copied()
                .filter(|p| !targets.contains(p))
                .collect(),
            extensional: all
                .into_iter()
                .filter(|p| !targets.contains(p))
                .collect(),
        }
    }

    fn draw_fresh_head(&mut self, rng: &mut impl Rng) -> Option<PredId> {
        if self.unused.is_empty() {
            return None;
        }
        let p = self.unused.swap_remove(rng.random_range(0..self.unused.len()));
        self.extensional.retain(|&q| q != p);
        Some(p)
    }

    fn draw_extensional(&mut self, rng: &mut impl Rng) -> Option<PredId> {
        if self.extensional.is_empty() {
            return None;
        }
        Some(self.extensional[rng.random_range(0..self.extensional.len())])
    }

    /// Marks a predicate as appearing in a body without being defined.
    fn mark_used(&mut self, pred: PredId) {
        self.unused.retain(|&q| q != pred);
    }
}

struct NodeBuild {
    head: Atom,
    level: usize,
    parent: Option<usize>,
    children: Vec<usize>,
    is_spine: bool,
    rule_slot: Option<Rule>,
}

/// One body slot that receives a defining child (or an OR group of
/// alternatives) below this node.
struct SlotSpec {
    pred: PredId,
    alternatives: usize,
    is_spine: bool,
    fulfills_existential: bool,
}

struct ComponentGen<'a, R: Rng> {
    config: &'a GeneratorConfig,
    signature: &'a Signature,
    pools: &'a mut SymbolPools,
    rng: &'a mut R,
    probs: TermProbs,
    category: Category,
    depth: usize,
    host_level: usize,
    budget_cap: usize,
    created: usize,
    /// Spine nodes still to create below the deepest one created so far.
    spine_pending: usize,
    /// Spine slot predicates still to draw.
    spine_pred_pending: usize,
    /// 1 while the category existential node is still owed.
    exist_pending: usize,
    /// 1 while the RDG existential's fresh head is still to draw.
    exist_pred_pending: usize,
    allow_root_recursion: bool,
    nodes: Vec<NodeBuild>,
    or_groups: Vec<Vec<usize>>,
    next_var: u32,
}

impl<'a, R: Rng> ComponentGen<'a, R> {
    fn fresh_var(&mut self) -> VarId {
        let v = VarId(self.next_var);
        self.next_var += 1;
        v
    }

    fn optional_budget(&self, granted: usize) -> usize {
        self.budget_cap
            .saturating_sub(self.created + self.spine_pending + self.exist_pending + granted)
    }

    /// Whether an optional fresh head predicate can be drawn without
    /// starving required draws or emptying the extensional pool.
    fn can_spare_fresh_head(&self, granted_heads: usize) -> bool {
        let reserve = self.spine_pred_pending + self.exist_pred_pending + granted_heads;
        self.pools.unused.len() >= reserve + 1 && self.pools.extensional.len() >= reserve + 2
    }

    fn draw_required_head(&mut self) -> Result<PredId, GenError> {
        self.pools.draw_fresh_head(self.rng).ok_or_else(|| {
            GenError::BudgetExhausted("predicate pool exhausted for a required head".to_owned())
        })
    }

    fn run(&mut self, target: PredId) -> Result<(), GenError> {
        let arity = self.signature.arity(target);
        let head_args: Vec<Term> = (0..arity).map(|_| Term::Var(self.fresh_var())).collect();
        self.nodes.push(NodeBuild {
            head: Atom::new(target, head_args),
            level: 1,
            parent: None,
            children: Vec::new(),
            is_spine: true,
            rule_slot: None,
        });
        self.created = 1;
        self.spine_pending = self.depth - 1;
        self.spine_pred_pending = self.depth - 1;

        let mut queue = VecDeque::new();
        queue.push_back(0usize);
        while let Some(idx) = queue.pop_front() {
            let new_children = self.expand(idx)?;
            queue.extend(new_children);
        }
        Ok(())
    }

    /// Builds the body of node `idx` and creates its children; returns the
    /// new child indices.
    fn expand(&mut self, idx: usize) -> Result<Vec<usize>, GenError> {
        let level = self.nodes[idx].level;
        let is_leaf = level == self.depth;
        let spine_here = self.nodes[idx].is_spine && !is_leaf;
        let host_here = spine_here && level == self.host_level && self.exist_pending > 0;
        let rdg_host = host_here && self.category == Category::Rdg;
        let drdg_host = host_here && self.category == Category::Drdg;

        // Committed child slots, required ones first.
        let mut slots: Vec<SlotSpec> = Vec::new();
        if spine_here {
            let pred = self.draw_required_head()?;
            self.spine_pred_pending -= 1;
            let alternatives = if drdg_host {
                // Forced OR group; the third alternative is optional.
                let mut alts = 2;
                if self.optional_budget(0) >= 1 && self.rng.random_bool(0.5) {
                    alts = 3;
                }
                alts
            } else {
                1
            };
            slots.push(SlotSpec {
                pred,
                alternatives,
                is_spine: true,
                fulfills_existential: drdg_host,
            });
        }
        if rdg_host {
            let pred = self.draw_required_head()?;
            self.exist_pred_pending -= 1;
            slots.push(SlotSpec {
                pred,
                alternatives: 1,
                is_spine: false,
                fulfills_existential: true,
            });
        }
        let required_slots = slots.len();

        let mut m = self
            .rng
            .random_range(1..=self.config.max_rule_length)
            .max(required_slots);

        // Optional further children for RDG/DRDG internal nodes: fan-out
        // uniform in [1, min(m, 3)], capped by the rule and symbol budgets.
        if !is_leaf && self.category != Category::Chain {
            let f_target = self
                .rng
                .random_range(1..=m.min(3))
                .max(required_slots);
            let mut granted_nodes = slots
                .iter()
                .map(|s| s.alternatives)
                .sum::<usize>()
                .saturating_sub(required_slots + usize::from(drdg_host));
            let mut granted_heads = 0usize;
            for _ in required_slots..f_target {
                if self.optional_budget(granted_nodes) < 1
                    || !self.can_spare_fresh_head(granted_heads)
                {
                    break;
                }
                let pred = match self.pools.draw_fresh_head(self.rng) {
                    Some(p) => p,
                    None => break,
                };
                granted_heads += 1;
                let mut alternatives = 1;
                if self.category == Category::Drdg && self.rng.random_bool(0.5) {
                    let extra = self.rng.random_range(1..=2usize);
                    let affordable = self.optional_budget(granted_nodes + 1).min(extra);
                    alternatives += affordable;
                }
                granted_nodes += alternatives;
                slots.push(SlotSpec {
                    pred,
                    alternatives,
                    is_spine: false,
                    fulfills_existential: false,
                });
            }
        }
        m = m.max(slots.len());

        let head_vars: Vec<VarId> = {
            let mut seen = Vec::new();
            for v in self.nodes[idx].head.variables() {
                if !seen.contains(&v) {
                    seen.push(v);
                }
            }
            seen
        };

        // Extensional body predicates, retried until the body has enough
        // argument positions for every head variable.
        let head_pred = self.nodes[idx].head.pred;
        let is_or_alternative = self
            .or_groups
            .iter()
            .any(|g| g.contains(&idx));
        let allow_recursion = !is_or_alternative
            && (self.nodes[idx].parent.is_some() || self.allow_root_recursion);
        let slot_capacity: usize = slots
            .iter()
            .map(|s| self.signature.arity(s.pred))
            .sum();
        let mut ext_preds: Vec<PredId> = Vec::new();
        let mut ok = false;
        for _ in 0..MAX_RETRIES {
            ext_preds.clear();
            for _ in slots.len()..m {
                let pred = self.pools.draw_extensional(self.rng).ok_or_else(|| {
                    GenError::BudgetExhausted("extensional predicate pool is empty".to_owned())
                })?;
                ext_preds.push(pred);
            }
            if !ext_preds.is_empty()
                && allow_recursion
                && self.rng.random_bool(self.config.recursion_prob)
            {
                let i = self.rng.random_range(0..ext_preds.len());
                ext_preds[i] = head_pred;
            }
            let capacity: usize = slot_capacity
                + ext_preds
                    .iter()
                    .map(|&p| self.signature.arity(p))
                    .sum::<usize>();
            if capacity >= head_vars.len() {
                ok = true;
                break;
            }
            if m < self.config.max_rule_length {
                m += 1;
            }
        }
        if !ok {
            return Err(GenError::BudgetExhausted(format!(
                "cannot place {} head variables in a body of length {m}",
                head_vars.len()
            )));
        }
        for &p in &ext_preds {
            if p != head_pred {
                self.pools.mark_used(p);
            }
        }

        // Assemble the body: defined slots first, then extensional atoms,
        // in shuffled order.
        enum Kind {
            Slot(usize),
            Ext(PredId),
        }
        let mut layout: Vec<Kind> = (0..slots.len())
            .map(Kind::Slot)
            .chain(ext_preds.iter().map(|&p| Kind::Ext(p)))
            .collect();
        layout.shuffle(self.rng);

        let arities: Vec<usize> = layout
            .iter()
            .map(|k| match k {
                Kind::Slot(i) => self.signature.arity(slots[*i].pred),
                Kind::Ext(p) => self.signature.arity(*p),
            })
            .collect();
        let positions: Vec<(usize, usize)> = arities
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| (0..a).map(move |j| (i, j)))
            .collect();

        // Reserve one position per head variable, then fill the rest by the
        // cascade.
        let chosen = rand::seq::index::sample(self.rng, positions.len(), head_vars.len());
        let mut grid: Vec<Vec<Option<Term>>> = arities.iter().map(|&a| vec![None; a]).collect();
        for (var, pos) in head_vars.iter().zip(chosen.iter()) {
            let (i, j) = positions[pos];
            grid[i][j] = Some(Term::Var(*var));
        }
        let constants: Vec<ConstId> = self.signature.constants().collect();
        let mut introduced: Vec<VarId> = Vec::new();
        for (i, j) in positions {
            if grid[i][j].is_some() {
                continue;
            }
            let term = match fill_term(&head_vars, &introduced, &constants, &self.probs, self.rng)
            {
                TermChoice::HeadVar(v) => Term::Var(v),
                TermChoice::ExistingVar(v) => Term::Var(v),
                TermChoice::Constant(c) => Term::Const(c),
                TermChoice::FreshVar => {
                    let v = self.fresh_var();
                    introduced.push(v);
                    Term::Var(v)
                }
            };
            grid[i][j] = Some(term);
        }

        let body: Vec<Atom> = layout
            .iter()
            .zip(grid)
            .map(|(k, args)| {
                let pred = match k {
                    Kind::Slot(i) => slots[*i].pred,
                    Kind::Ext(p) => *p,
                };
                Atom::new(pred, args.into_iter().map(|t| t.expect("filled")).collect())
            })
            .collect();

        let rule = Rule::new(self.nodes[idx].head.clone(), body.clone())
            .expect("every head variable was placed in the body");
        self.nodes[idx].rule_slot = Some(rule);

        // Create the child nodes: the child's head is the slot atom, with
        // constants replaced by fresh variables (heads are variable-only).
        let mut new_children = Vec::new();
        for (pos, kind) in layout.iter().enumerate() {
            let slot_idx = match kind {
                Kind::Slot(i) => *i,
                Kind::Ext(_) => continue,
            };
            let spec = &slots[slot_idx];
            let pattern = Atom::new(
                body[pos].pred,
                body[pos]
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => Term::Var(*v),
                        Term::Const(_) => Term::Var(self.fresh_var()),
                    })
                    .collect(),
            );
            let mut group = Vec::new();
            for alt in 0..spec.alternatives {
                let child = self.nodes.len();
                self.nodes.push(NodeBuild {
                    head: pattern.clone(),
                    level: level + 1,
                    parent: Some(idx),
                    children: Vec::new(),
                    is_spine: spec.is_spine && alt == 0,
                    rule_slot: None,
                });
                self.nodes[idx].children.push(child);
                self.created += 1;
                if spec.is_spine && alt == 0 {
                    self.spine_pending = self.depth - (level + 1);
                }
                let fulfills = (spec.fulfills_existential && self.category == Category::Rdg)
                    || (spec.fulfills_existential && alt == 1);
                if fulfills {
                    self.exist_pending = 0;
                }
                group.push(child);
                new_children.push(child);
            }
            if group.len() >= 2 {
                self.or_groups.push(group);
            }
        }
        Ok(new_children)
    }
}

/// Generates the rule graphs for `plan`, drawing everything else at random
/// within the configured bounds.
pub fn generate_rule_graphs(
    config: &GeneratorConfig,
    plan: &ResolvedPlan,
    rng: &mut impl Rng,
) -> Result<Vec<RuleGraph>, GenError> {
    let targets: BTreeSet<PredId> = plan.components.iter().map(|c| c.target).collect();
    let mut pools = SymbolPools::new(&plan.signature, &targets);
    let probs = TermProbs::from_config(config);
    let multi = plan.components.len() > 1;

    let mut later_min: usize = plan
        .components
        .iter()
        .map(|c| min_rules(c.category, c.depth))
        .sum();
    let mut remaining_total = config.num_rules;
    let mut graphs = Vec::with_capacity(plan.components.len());

    for component in &plan.components {
        later_min -= min_rules(component.category, component.depth);
        let cap = remaining_total.saturating_sub(later_min);

        let host_level = if component.category == Category::Chain {
            0
        } else {
            rng.random_range(1..component.depth)
        };
        let mut gen = ComponentGen {
            config,
            signature: &plan.signature,
            pools: &mut pools,
            rng,
            probs,
            category: component.category,
            depth: component.depth,
            host_level,
            budget_cap: cap,
            created: 0,
            spine_pending: 0,
            spine_pred_pending: 0,
            exist_pending: usize::from(component.category != Category::Chain),
            exist_pred_pending: usize::from(component.category == Category::Rdg),
            allow_root_recursion: !(config.same_target && multi),
            nodes: Vec::new(),
            or_groups: Vec::new(),
            next_var: 0,
        };
        gen.run(component.target)?;
        remaining_total -= gen.created;

        let nodes: Vec<GraphNode> = gen
            .nodes
            .into_iter()
            .map(|n| GraphNode {
                rule: n.rule_slot.expect("every node was expanded"),
                level: n.level,
                parent: n.parent,
                children: n.children,
            })
            .collect();
        graphs.push(RuleGraph {
            category: component.category,
            depth: component.depth,
            nodes,
            or_groups: gen.or_groups,
        });
    }
    Ok(graphs)
}

/// A structural defect of a rule set with respect to a category.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CategoryViolation {
    NoRoot,
    MultipleRoots { rules: Vec<usize> },
    Unreachable { rule: usize },
    Cycle { rule: usize },
    AlternativeHeads { pred: PredId },
    MultiChild { rule: usize, children: usize },
    MultiParent { rule: usize, parents: usize },
    MissingMultiChild,
    MissingOrNode,
}

impl std::fmt::Display for CategoryViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CategoryViolation::NoRoot => write!(f, "no root rule"),
            CategoryViolation::MultipleRoots { rules } => {
                write!(f, "multiple root rules: {rules:?}")
            }
            CategoryViolation::Unreachable { rule } => {
                write!(f, "rule {rule} unreachable from the root")
            }
            CategoryViolation::Cycle { rule } => {
                write!(f, "dependency cycle through rule {rule}")
            }
            CategoryViolation::AlternativeHeads { pred } => {
                write!(f, "several rules define predicate {}", pred.0)
            }
            CategoryViolation::MultiChild { rule, children } => {
                write!(f, "rule {rule} has {children} children")
            }
            CategoryViolation::MultiParent { rule, parents } => {
                write!(f, "rule {rule} has {parents} parents")
            }
            CategoryViolation::MissingMultiChild => {
                write!(f, "no rule with two or more children")
            }
            CategoryViolation::MissingOrNode => {
                write!(f, "no OR node with two or more alternatives")
            }
        }
    }
}

/// Dependency edges between rules: `i -> j` when rule j's head predicate
/// occurs in rule i's body. Self-loops are dropped (recursive rules).
fn dependency_edges(rules: &[Rule]) -> Vec<Vec<usize>> {
    let mut edges = vec![Vec::new(); rules.len()];
    for (i, parent) in rules.iter().enumerate() {
        let body_preds = parent.body_predicates();
        for (j, child) in rules.iter().enumerate() {
            if i != j && body_preds.contains(&child.head_predicate()) {
                edges[i].push(j);
            }
        }
    }
    edges
}

/// Checks the structural invariants of `category` on a rule set; the empty
/// list means the rules satisfy them.
pub fn validate_category(rules: &[Rule], category: Category) -> Vec<CategoryViolation> {
    let mut violations = Vec::new();
    if rules.is_empty() {
        violations.push(CategoryViolation::NoRoot);
        return violations;
    }
    let edges = dependency_edges(rules);
    let mut parents = vec![0usize; rules.len()];
    for children in &edges {
        for &c in children {
            parents[c] += 1;
        }
    }

    let roots: Vec<usize> = (0..rules.len()).filter(|&i| parents[i] == 0).collect();
    match roots.as_slice() {
        [] => violations.push(CategoryViolation::NoRoot),
        [_] => {}
        many => violations.push(CategoryViolation::MultipleRoots {
            rules: many.to_vec(),
        }),
    }

    // Reachability from the roots.
    let mut reachable = vec![false; rules.len()];
    let mut stack: Vec<usize> = roots.clone();
    for &r in &roots {
        reachable[r] = true;
    }
    while let Some(i) = stack.pop() {
        for &j in &edges[i] {
            if !reachable[j] {
                reachable[j] = true;
                stack.push(j);
            }
        }
    }
    for (i, r) in reachable.iter().enumerate() {
        if !r {
            violations.push(CategoryViolation::Unreachable { rule: i });
        }
    }

    // Cycle detection (self-loops were already dropped from the edges).
    let mut color = vec![0u8; rules.len()];
    fn dfs(i: usize, edges: &[Vec<usize>], color: &mut [u8]) -> Option<usize> {
        color[i] = 1;
        for &j in &edges[i] {
            match color[j] {
                0 => {
                    if let Some(c) = dfs(j, edges, color) {
                        return Some(c);
                    }
                }
                1 => return Some(j),
                _ => {}
            }
        }
        color[i] = 2;
        None
    }
    for i in 0..rules.len() {
        if color[i] == 0 {
            if let Some(c) = dfs(i, &edges, &mut color) {
                violations.push(CategoryViolation::Cycle { rule: c });
                break;
            }
        }
    }

    // Head predicate sharing (OR groups).
    let mut by_head: std::collections::BTreeMap<PredId, Vec<usize>> = Default::default();
    for (i, r) in rules.iter().enumerate() {
        by_head.entry(r.head_predicate()).or_default().push(i);
    }
    let shared: Vec<PredId> = by_head
        .iter()
        .filter(|(_, v)| v.len() >= 2)
        .map(|(p, _)| *p)
        .collect();

    match category {
        Category::Chain => {
            for p in &shared {
                violations.push(CategoryViolation::AlternativeHeads { pred: *p });
            }
            for (i, children) in edges.iter().enumerate() {
                if children.len() > 1 {
                    violations.push(CategoryViolation::MultiChild {
                        rule: i,
                        children: children.len(),
                    });
                }
            }
            for (i, &p) in parents.iter().enumerate() {
                if p > 1 {
                    violations.push(CategoryViolation::MultiParent { rule: i, parents: p });
                }
            }
        }
        Category::Rdg => {
            for p in &shared {
                violations.push(CategoryViolation::AlternativeHeads { pred: *p });
            }
            if !edges.iter().any(|c| c.len() >= 2) {
                violations.push(CategoryViolation::MissingMultiChild);
            }
        }
        Category::Drdg => {
            // An OR node: a shared head predicate actually used by a parent.
            let used_by_parent = shared.iter().any(|p| {
                rules
                    .iter()
                    .enumerate()
                    .any(|(i, r)| r.body_predicates().contains(p) && !by_head[p].contains(&i))
            });
            if !used_by_parent {
                violations.push(CategoryViolation::MissingOrNode);
            }
        }
    }
    violations
}

/// Depth of a rule set: the number of rule nodes on the longest of the
/// shortest root-to-leaf paths. `None` without a unique root.
pub fn graph_depth(rules: &[Rule]) -> Option<usize> {
    let edges = dependency_edges(rules);
    let mut parents = vec![0usize; rules.len()];
    for children in &edges {
        for &c in children {
            parents[c] += 1;
        }
    }
    let roots: Vec<usize> = (0..rules.len()).filter(|&i| parents[i] == 0).collect();
    let [root] = roots.as_slice() else { return None };
    let mut dist = vec![usize::MAX; rules.len()];
    dist[*root] = 1;
    let mut queue = VecDeque::from([*root]);
    while let Some(i) = queue.pop_front() {
        for &j in &edges[i] {
            if dist[j] == usize::MAX {
                dist[j] = dist[i] + 1;
                queue.push_back(j);
            }
        }
    }
    (0..rules.len())
        .filter(|&i| edges[i].is_empty() && dist[i] != usize::MAX)
        .map(|i| dist[i])
        .max()
}

/// Splits a rule set into connected components (undirected reachability over
/// the dependency edges), returning rule indices per component.
pub fn connected_components(rules: &[Rule]) -> Vec<Vec<usize>> {
    let edges = dependency_edges(rules);
    let mut undirected = vec![BTreeSet::new(); rules.len()];
    for (i, children) in edges.iter().enumerate() {
        for &j in children {
            undirected[i].insert(j);
            undirected[j].insert(i);
        }
    }
    let mut seen = vec![false; rules.len()];
    let mut components = Vec::new();
    for start in 0..rules.len() {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            comp.push(i);
            for &j in &undirected[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}
