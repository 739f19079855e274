//! Forward-chaining evaluation of datalog programs.
//!
//! The workhorse is a semi-naive (delta-driven) engine with per-predicate
//! first-argument indexing; [`closure_naive`] re-derives everything each
//! round and is kept as the reference implementation the optimized engine is
//! checked against.

use std::collections::{BTreeMap, HashMap};

use crate::syntax::{Atom, ConstId, Fact, FactSet, PredId, Program, Rule, Term, VarId};

/// A variable assignment mapping variable ids to constants.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<VarId, ConstId>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, var: VarId, value: ConstId) {
        self.map.insert(var, value);
    }

    pub fn get(&self, var: VarId) -> Option<ConstId> {
        self.map.get(&var).copied()
    }

    /// Applies the substitution to an atom; `None` if some variable of the
    /// atom is not covered.
    pub fn apply(&self, atom: &Atom) -> Option<Fact> {
        let mut args = Vec::with_capacity(atom.args.len());
        for t in &atom.args {
            match t {
                Term::Const(c) => args.push(*c),
                Term::Var(v) => args.push(self.get(*v)?),
            }
        }
        Some(Fact::new(atom.pred, args))
    }
}

/// Fact storage with a by-predicate and a (predicate, first argument) index.
#[derive(Clone, Debug, Default)]
struct FactIndex {
    by_pred: HashMap<PredId, Vec<Fact>>,
    by_first: HashMap<(PredId, ConstId), Vec<usize>>,
    all: FactSet,
}

impl FactIndex {
    fn insert(&mut self, fact: Fact) -> bool {
        if !self.all.insert(fact.clone()) {
            return false;
        }
        let list = self.by_pred.entry(fact.pred).or_default();
        if let Some(&first) = fact.args.first() {
            self.by_first
                .entry((fact.pred, first))
                .or_default()
                .push(list.len());
        }
        list.push(fact);
        true
    }

    fn contains(&self, fact: &Fact) -> bool {
        self.all.contains(fact)
    }

    /// Candidate facts matching `atom` under `subst`, narrowed through the
    /// first-argument index when the first argument is bound.
    fn candidates<'a>(
        &'a self,
        atom: &Atom,
        subst: &Substitution,
    ) -> Box<dyn Iterator<Item = &'a Fact> + 'a> {
        let bound_first = atom.args.first().and_then(|t| match t {
            Term::Const(c) => Some(*c),
            Term::Var(v) => subst.get(*v),
        });
        match bound_first {
            Some(c) => match (self.by_first.get(&(atom.pred, c)), self.by_pred.get(&atom.pred)) {
                (Some(idxs), Some(list)) => Box::new(idxs.iter().map(move |&i| &list[i])),
                _ => Box::new(std::iter::empty()),
            },
            None => match self.by_pred.get(&atom.pred) {
                Some(list) => Box::new(list.iter()),
                None => Box::new(std::iter::empty()),
            },
        }
    }
}

fn unify(atom: &Atom, fact: &Fact, subst: &Substitution) -> Option<Substitution> {
    if atom.pred != fact.pred || atom.args.len() != fact.args.len() {
        return None;
    }
    let mut out = subst.clone();
    for (t, &c) in atom.args.iter().zip(fact.args.iter()) {
        match t {
            Term::Const(k) if *k == c => {}
            Term::Const(_) => return None,
            Term::Var(v) => match out.get(*v) {
                Some(existing) if existing == c => {}
                Some(_) => return None,
                None => out.bind(*v, c),
            },
        }
    }
    Some(out)
}

fn bound_count(atom: &Atom, subst: &Substitution) -> usize {
    atom.args
        .iter()
        .filter(|t| match t {
            Term::Const(_) => true,
            Term::Var(v) => subst.get(*v).is_some(),
        })
        .count()
}

/// Joins the body atoms `remaining` left to right with greedy most-bound
/// reordering, calling `emit` for every complete substitution. `pivot`, when
/// set, restricts one designated atom to the delta index.
fn join<'a>(
    remaining: &mut Vec<(usize, &'a Atom)>,
    pivot: Option<(usize, &FactIndex)>,
    full: &FactIndex,
    subst: &Substitution,
    emit: &mut dyn FnMut(&Substitution),
) {
    if remaining.is_empty() {
        emit(subst);
        return;
    }
    // Pick the most-bound atom next; ties go to body order.
    let best = remaining
        .iter()
        .enumerate()
        .max_by(|(ia, (pa, a)), (ib, (pb, b))| {
            bound_count(a, subst)
                .cmp(&bound_count(b, subst))
                .then(pb.cmp(pa))
                .then(ib.cmp(ia))
        })
        .map(|(i, _)| i)
        .expect("nonempty");
    let (pos, atom) = remaining.swap_remove(best);
    let index = match pivot {
        Some((p, delta)) if p == pos => delta,
        _ => full,
    };
    for fact in index.candidates(atom, subst) {
        if let Some(next) = unify(atom, fact, subst) {
            join(remaining, pivot, full, &next, emit);
        }
    }
    remaining.push((pos, atom));
    let last = remaining.len() - 1;
    remaining.swap(best, last);
}

fn rule_matches(rule: &Rule, pivot: Option<(usize, &FactIndex)>, full: &FactIndex) -> Vec<Fact> {
    let mut out = Vec::new();
    let mut remaining: Vec<(usize, &Atom)> = rule.body().iter().enumerate().collect();
    join(
        &mut remaining,
        pivot,
        full,
        &Substitution::new(),
        &mut |subst| {
            let fact = subst
                .apply(rule.head())
                .expect("range restriction covers head variables");
            out.push(fact);
        },
    );
    out
}

/// Incremental fixpoint state over a fixed program. Facts added through
/// [`IncrementalClosure::add_input`] are propagated immediately; everything
/// ever produced by a rule application is recorded in the derived set.
pub struct IncrementalClosure<'p> {
    program: &'p Program,
    db: FactIndex,
    derived: FactSet,
}

impl<'p> IncrementalClosure<'p> {
    pub fn new(program: &'p Program) -> Self {
        IncrementalClosure {
            program,
            db: FactIndex::default(),
            derived: FactSet::new(),
        }
    }

    /// Adds an input fact and propagates to the fixpoint. Returns false if
    /// the fact was already present.
    pub fn add_input(&mut self, fact: Fact) -> bool {
        if !self.db.insert(fact.clone()) {
            return false;
        }
        self.propagate(vec![fact]);
        true
    }

    /// All facts currently present, inputs and derived.
    pub fn facts(&self) -> &FactSet {
        &self.db.all
    }

    /// Facts produced by at least one rule application so far (they may also
    /// have been added as inputs later).
    pub fn derived(&self) -> &FactSet {
        &self.derived
    }

    fn propagate(&mut self, seed: Vec<Fact>) {
        let mut delta_facts = seed;
        while !delta_facts.is_empty() {
            let mut delta = FactIndex::default();
            for f in delta_facts.drain(..) {
                delta.insert(f);
            }
            let mut next = Vec::new();
            for rule in self.program.iter() {
                for pivot_pos in 0..rule.body().len() {
                    if delta.by_pred.get(&rule.body()[pivot_pos].pred).is_none() {
                        continue;
                    }
                    for fact in rule_matches(rule, Some((pivot_pos, &delta)), &self.db) {
                        self.derived.insert(fact.clone());
                        if !self.db.contains(&fact) {
                            next.push(fact.clone());
                            self.db.insert(fact);
                        }
                    }
                }
            }
            delta_facts = next;
        }
    }
}

/// Least fixpoint of `program` over `facts`, input facts included.
/// Semi-naive evaluation; result is deterministic.
pub fn closure(program: &Program, facts: &FactSet) -> FactSet {
    let mut engine = IncrementalClosure::new(program);
    let mut db = FactIndex::default();
    let mut seed = Vec::new();
    for f in facts.iter() {
        if db.insert(f.clone()) {
            seed.push(f.clone());
        }
    }
    engine.db = db;
    engine.propagate(seed);
    engine.db.all
}

/// Naive fixpoint: every rule re-evaluated against the whole database each
/// round. Reference oracle for [`closure`].
pub fn closure_naive(program: &Program, facts: &FactSet) -> FactSet {
    let mut db = FactIndex::default();
    for f in facts.iter() {
        db.insert(f.clone());
    }
    loop {
        let mut changed = false;
        for rule in program.iter() {
            for fact in rule_matches(rule, None, &db) {
                changed |= db.insert(fact);
            }
        }
        if !changed {
            return db.all;
        }
    }
}

/// The facts inferred by `program` over `facts`, excluding `facts` itself.
pub fn inferred(program: &Program, facts: &FactSet) -> FactSet {
    closure(program, facts).difference(facts)
}

/// All head instantiations derivable from `facts` by a single application of
/// `rule`, excluding facts already present.
pub fn apply_rule_once(rule: &Rule, facts: &FactSet) -> FactSet {
    let mut db = FactIndex::default();
    for f in facts.iter() {
        db.insert(f.clone());
    }
    rule_matches(rule, None, &db)
        .into_iter()
        .filter(|f| !facts.contains(f))
        .collect()
}
