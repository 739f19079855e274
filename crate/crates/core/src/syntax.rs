//! Datalog syntax objects: signatures, terms, atoms, facts, rules, programs
//! and fact sets.
//!
//! All types are immutable after construction and id-based: predicate and
//! constant names live in a [`Signature`] and everything else refers to them
//! through dense integer ids. Rules are range restricted by construction
//! (every head variable occurs in the body) and programs compare equal up to
//! rule order, duplication and variable renaming.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

/// Dense id of a predicate within a [`Signature`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredId(pub u32);

/// Dense id of a constant within a [`Signature`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstId(pub u32);

/// Id of a variable. Variables are scoped to a single rule (or to one rule
/// graph during generation); two rules using the same `VarId` are unrelated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("predicate `{name}` redeclared with arity {requested}, already has arity {existing}")]
    ArityConflict {
        name: String,
        existing: usize,
        requested: usize,
    },
    #[error("predicate arity must be at least 1, got {arity} for `{name}`")]
    ZeroArity { name: String, arity: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule body must contain at least one atom")]
    EmptyBody,
    #[error("head variable does not occur in the body (range restriction)")]
    UnboundHeadVariable,
}

/// Interning table for predicate and constant names.
///
/// Predicate identity is the pair (name, arity); interning the same name with
/// a different arity is an error rather than an overload.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    preds: Vec<(String, usize)>,
    consts: Vec<String>,
    pred_index: HashMap<String, PredId>,
    const_index: HashMap<String, ConstId>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns a predicate, returning its id. The same (name, arity) pair
    /// always returns the same id.
    pub fn add_predicate(&mut self, name: &str, arity: usize) -> Result<PredId, SignatureError> {
        if arity == 0 {
            return Err(SignatureError::ZeroArity {
                name: name.to_owned(),
                arity,
            });
        }
        if let Some(&id) = self.pred_index.get(name) {
            let existing = self.preds[id.0 as usize].1;
            if existing != arity {
                return Err(SignatureError::ArityConflict {
                    name: name.to_owned(),
                    existing,
                    requested: arity,
                });
            }
            return Ok(id);
        }
        let id = PredId(self.preds.len() as u32);
        self.preds.push((name.to_owned(), arity));
        self.pred_index.insert(name.to_owned(), id);
        Ok(id)
    }

    /// Interns a constant, returning its id.
    pub fn add_constant(&mut self, name: &str) -> ConstId {
        if let Some(&id) = self.const_index.get(name) {
            return id;
        }
        let id = ConstId(self.consts.len() as u32);
        self.consts.push(name.to_owned());
        self.const_index.insert(name.to_owned(), id);
        id
    }

    pub fn predicate_name(&self, id: PredId) -> &str {
        &self.preds[id.0 as usize].0
    }

    pub fn arity(&self, id: PredId) -> usize {
        self.preds[id.0 as usize].1
    }

    pub fn constant_name(&self, id: ConstId) -> &str {
        &self.consts[id.0 as usize]
    }

    pub fn lookup_predicate(&self, name: &str) -> Option<PredId> {
        self.pred_index.get(name).copied()
    }

    pub fn lookup_constant(&self, name: &str) -> Option<ConstId> {
        self.const_index.get(name).copied()
    }

    pub fn num_predicates(&self) -> usize {
        self.preds.len()
    }

    pub fn num_constants(&self) -> usize {
        self.consts.len()
    }

    pub fn predicates(&self) -> impl Iterator<Item = PredId> + '_ {
        (0..self.preds.len() as u32).map(PredId)
    }

    pub fn constants(&self) -> impl Iterator<Item = ConstId> + '_ {
        (0..self.consts.len() as u32).map(ConstId)
    }

    /// Size of the Herbrand base: the number of ground atoms formable from
    /// this signature, sum over predicates p of |constants|^arity(p).
    pub fn herbrand_base_size(&self) -> u128 {
        let n = self.consts.len() as u128;
        self.preds
            .iter()
            .map(|(_, arity)| n.saturating_pow(*arity as u32))
            .fold(0u128, u128::saturating_add)
    }
}

/// A term is either a constant or a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(VarId),
    Const(ConstId),
}

impl Term {
    pub fn as_var(&self) -> Option<VarId> {
        match self {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
        }
    }
}

/// A predicate applied to terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: PredId,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: PredId, args: Vec<Term>) -> Self {
        Atom { pred, args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }

    pub fn variables(&self) -> impl Iterator<Item = VarId> + '_ {
        self.args.iter().filter_map(Term::as_var)
    }

    /// Converts a ground atom into a fact; `None` if any argument is a
    /// variable.
    pub fn as_fact(&self) -> Option<Fact> {
        let mut args = Vec::with_capacity(self.args.len());
        for t in &self.args {
            match t {
                Term::Const(c) => args.push(*c),
                Term::Var(_) => return None,
            }
        }
        Some(Fact {
            pred: self.pred,
            args,
        })
    }
}

/// A ground atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub pred: PredId,
    pub args: Vec<ConstId>,
}

impl Fact {
    pub fn new(pred: PredId, args: Vec<ConstId>) -> Self {
        Fact { pred, args }
    }

    pub fn to_atom(&self) -> Atom {
        Atom {
            pred: self.pred,
            args: self.args.iter().map(|&c| Term::Const(c)).collect(),
        }
    }
}

/// A datalog rule `head :- body`, body nonempty, range restricted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    head: Atom,
    body: Vec<Atom>,
}

impl Rule {
    /// Builds a rule, rejecting empty bodies and head variables that do not
    /// occur in the body.
    pub fn new(head: Atom, body: Vec<Atom>) -> Result<Self, RuleError> {
        if body.is_empty() {
            return Err(RuleError::EmptyBody);
        }
        let body_vars: BTreeSet<VarId> = body.iter().flat_map(|a| a.variables()).collect();
        if head.variables().any(|v| !body_vars.contains(&v)) {
            return Err(RuleError::UnboundHeadVariable);
        }
        Ok(Rule { head, body })
    }

    pub fn head(&self) -> &Atom {
        &self.head
    }

    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    /// The predicate of the head atom.
    pub fn head_predicate(&self) -> PredId {
        self.head.pred
    }

    /// All variables of the rule, head and body.
    pub fn variables(&self) -> BTreeSet<VarId> {
        self.head
            .variables()
            .chain(self.body.iter().flat_map(|a| a.variables()))
            .collect()
    }

    pub fn body_predicates(&self) -> BTreeSet<PredId> {
        self.body.iter().map(|a| a.pred).collect()
    }

    /// Whether the head predicate also occurs in the body.
    pub fn is_recursive(&self) -> bool {
        self.body.iter().any(|a| a.pred == self.head.pred)
    }

    /// True iff all atoms are binary, all terms are variables, and the rule
    /// matches the pattern `p0(X1,Xm+1) :- p1(X1,X2), ..., pm(Xm,Xm+1)` up to
    /// a consistent renaming with pairwise distinct chain variables.
    pub fn is_chain_rule(&self) -> bool {
        let all = std::iter::once(&self.head).chain(self.body.iter());
        for atom in all {
            if atom.arity() != 2 || !atom.args.iter().all(|t| matches!(t, Term::Var(_))) {
                return false;
            }
        }
        let var = |t: &Term| t.as_var().expect("checked above");
        // The chain variables are X1 = head.0, then the second argument of
        // each body atom in order; the last must close back to head.1.
        let mut chain = vec![var(&self.head.args[0])];
        for atom in &self.body {
            if var(&atom.args[0]) != *chain.last().expect("nonempty") {
                return false;
            }
            chain.push(var(&atom.args[1]));
        }
        if *chain.last().expect("nonempty") != var(&self.head.args[1]) {
            return false;
        }
        let distinct: BTreeSet<VarId> = chain.iter().copied().collect();
        distinct.len() == chain.len()
    }

    /// Renames variables to 0,1,2,... in order of first occurrence (head
    /// first, then body left to right). Alpha-equivalent rules canonicalize
    /// to the same value.
    pub fn canonicalize(&self) -> Rule {
        let mut map: BTreeMap<VarId, VarId> = BTreeMap::new();
        let rename = |atom: &Atom, map: &mut BTreeMap<VarId, VarId>| Atom {
            pred: atom.pred,
            args: atom
                .args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => Term::Const(*c),
                    Term::Var(v) => {
                        let next = VarId(map.len() as u32);
                        Term::Var(*map.entry(*v).or_insert(next))
                    }
                })
                .collect(),
        };
        let head = rename(&self.head, &mut map);
        let body = self.body.iter().map(|a| rename(a, &mut map)).collect();
        Rule { head, body }
    }
}

/// A set of rules. Insertion canonicalizes variables, so alpha-equivalent
/// duplicates collapse and equality ignores rule order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    rules: BTreeSet<Rule>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, rule: Rule) -> bool {
        self.rules.insert(rule.canonicalize())
    }

    pub fn contains(&self, rule: &Rule) -> bool {
        self.rules.contains(&rule.canonicalize())
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter()
    }

    /// The rules whose head predicate equals `pred`; may be empty.
    pub fn rules_with_head(&self, pred: PredId) -> Program {
        self.rules
            .iter()
            .filter(|r| r.head_predicate() == pred)
            .cloned()
            .collect()
    }

    pub fn predicates(&self) -> BTreeSet<PredId> {
        self.rules
            .iter()
            .flat_map(|r| {
                std::iter::once(r.head_predicate()).chain(r.body().iter().map(|a| a.pred))
            })
            .collect()
    }

    pub fn constants(&self) -> BTreeSet<ConstId> {
        self.rules
            .iter()
            .flat_map(|r| std::iter::once(r.head()).chain(r.body().iter()))
            .flat_map(|a| a.args.iter())
            .filter_map(|t| match t {
                Term::Const(c) => Some(*c),
                Term::Var(_) => None,
            })
            .collect()
    }
}

impl FromIterator<Rule> for Program {
    fn from_iter<T: IntoIterator<Item = Rule>>(iter: T) -> Self {
        let mut p = Program::new();
        for r in iter {
            p.insert(r);
        }
        p
    }
}

impl Extend<Rule> for Program {
    fn extend<T: IntoIterator<Item = Rule>>(&mut self, iter: T) {
        for r in iter {
            self.insert(r);
        }
    }
}

/// A set of ground facts with set semantics and set algebra.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactSet {
    facts: BTreeSet<Fact>,
}

impl FactSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, fact: Fact) -> bool {
        self.facts.insert(fact)
    }

    pub fn remove(&mut self, fact: &Fact) -> bool {
        self.facts.remove(fact)
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    pub fn union(&self, other: &FactSet) -> FactSet {
        FactSet {
            facts: self.facts.union(&other.facts).cloned().collect(),
        }
    }

    pub fn intersection(&self, other: &FactSet) -> FactSet {
        FactSet {
            facts: self.facts.intersection(&other.facts).cloned().collect(),
        }
    }

    pub fn difference(&self, other: &FactSet) -> FactSet {
        FactSet {
            facts: self.facts.difference(&other.facts).cloned().collect(),
        }
    }

    pub fn is_subset(&self, other: &FactSet) -> bool {
        self.facts.is_subset(&other.facts)
    }

    pub fn is_disjoint(&self, other: &FactSet) -> bool {
        self.facts.is_disjoint(&other.facts)
    }

    /// The facts whose predicate is in `preds`.
    pub fn restrict_to_predicates(&self, preds: &BTreeSet<PredId>) -> FactSet {
        self.facts
            .iter()
            .filter(|f| preds.contains(&f.pred))
            .cloned()
            .collect()
    }

    /// The facts whose predicate is not in `preds`.
    pub fn without_predicates(&self, preds: &BTreeSet<PredId>) -> FactSet {
        self.facts
            .iter()
            .filter(|f| !preds.contains(&f.pred))
            .cloned()
            .collect()
    }

    pub fn predicates(&self) -> BTreeSet<PredId> {
        self.facts.iter().map(|f| f.pred).collect()
    }

    pub fn constants(&self) -> BTreeSet<ConstId> {
        self.facts
            .iter()
            .flat_map(|f| f.args.iter().copied())
            .collect()
    }
}

impl FromIterator<Fact> for FactSet {
    fn from_iter<T: IntoIterator<Item = Fact>>(iter: T) -> Self {
        FactSet {
            facts: iter.into_iter().collect(),
        }
    }
}

impl Extend<Fact> for FactSet {
    fn extend<T: IntoIterator<Item = Fact>>(&mut self, iter: T) {
        self.facts.extend(iter);
    }
}

impl<'a> IntoIterator for &'a FactSet {
    type Item = &'a Fact;
    type IntoIter = std::collections::btree_set::Iter<'a, Fact>;

    fn into_iter(self) -> Self::IntoIter {
        self.facts.iter()
    }
}

/// Builds the signature containing exactly the predicates and constants that
/// occur in `program` or `facts`, re-interned with fresh dense ids.
///
/// This fixes the universe for metric computations: symbols that appear only
/// in a learned program do not enlarge it.
pub fn signature_of(sig: &Signature, program: &Program, facts: &FactSet) -> Signature {
    let mut out = Signature::new();
    let mut preds: BTreeSet<PredId> = program.predicates();
    preds.extend(facts.predicates());
    let mut consts: BTreeSet<ConstId> = program.constants();
    consts.extend(facts.constants());
    for p in preds {
        out.add_predicate(sig.predicate_name(p), sig.arity(p))
            .expect("source signature has consistent arities");
    }
    for c in consts {
        out.add_constant(sig.constant_name(c));
    }
    out
}
