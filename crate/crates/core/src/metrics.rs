//! Evaluation measures comparing a learned rule set against the ground
//! truth: Herbrand-model set metrics, confusion-matrix metrics over the
//! Herbrand base, and the syntactic rule-set score built from atom and rule
//! distances.
//!
//! All metric values are exact rationals. Division-by-zero cases are
//! reported through flags instead of NaNs: a vacuous agreement (both
//! inferred sets empty) scores 1, an empty learned inference set scores 0
//! for confidence and precision, and a missing head-predicate match
//! contributes the maximal rule distance 1.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;

use crate::infer::inferred;
use crate::syntax::{signature_of, Atom, FactSet, PredId, Program, Rule, Signature, Term, VarId};

/// Exact rational metric value.
pub type Rat = Ratio<i128>;

pub fn rat(numer: i128, denom: i128) -> Rat {
    Ratio::new(numer, denom)
}

fn clamp_u128(x: u128) -> i128 {
    i128::try_from(x).unwrap_or(i128::MAX)
}

/// Renders a rational as a decimal with six fractional digits.
pub fn decimal6(r: Rat) -> String {
    let scaled = (r * Ratio::from_integer(1_000_000)).round().to_integer();
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.unsigned_abs();
    format!("{sign}{}.{:06}", abs / 1_000_000, abs % 1_000_000)
}

/// Number of facts by which the two inferred sets differ.
pub fn herbrand_distance(truth: &FactSet, predicted: &FactSet) -> usize {
    truth.union(predicted).len() - truth.intersection(predicted).len()
}

/// Herbrand distance normalized on the Herbrand base: `1 - h_d / u`.
/// `None` when the base is empty.
pub fn h_accuracy(truth: &FactSet, predicted: &FactSet, universe: u128) -> Option<Rat> {
    if universe == 0 {
        return None;
    }
    Some(
        Rat::from_integer(1)
            - rat(
                herbrand_distance(truth, predicted) as i128,
                clamp_u128(universe),
            ),
    )
}

/// Jaccard agreement of the two inferred sets. `None` when both are empty.
pub fn h_score(truth: &FactSet, predicted: &FactSet) -> Option<Rat> {
    let union = truth.union(predicted).len();
    if union == 0 {
        return None;
    }
    Some(rat(truth.intersection(predicted).len() as i128, union as i128))
}

/// Fraction of the learned rules' inferences that are correct. `None` when
/// the learned rules infer nothing.
pub fn std_confidence(truth: &FactSet, predicted: &FactSet) -> Option<Rat> {
    if predicted.is_empty() {
        return None;
    }
    Some(rat(
        truth.intersection(predicted).len() as i128,
        predicted.len() as i128,
    ))
}

/// Confusion counts over a Herbrand base of size `universe`. True negatives
/// saturate at zero if the sets leave the universe (symbols of the learned
/// rules outside the original signature).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: u128,
    pub universe: u128,
}

/// False positives are the learned inferences that are wrong, false
/// negatives the true inferences the learned rules miss.
pub fn confusion(truth: &FactSet, predicted: &FactSet, universe: u128) -> ConfusionCounts {
    let true_positives = truth.intersection(predicted).len();
    let false_positives = predicted.difference(truth).len();
    let false_negatives = truth.difference(predicted).len();
    let union = (true_positives + false_positives + false_negatives) as u128;
    ConfusionCounts {
        true_positives,
        false_positives,
        false_negatives,
        true_negatives: universe.saturating_sub(union),
        universe,
    }
}

/// The four standard information-retrieval measures; `None` marks an
/// undefined division.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IrMetrics {
    pub accuracy: Option<Rat>,
    pub precision: Option<Rat>,
    pub recall: Option<Rat>,
    pub f1: Option<Rat>,
}

pub fn ir_metrics(counts: &ConfusionCounts) -> IrMetrics {
    let tp = counts.true_positives as i128;
    let fp = counts.false_positives as i128;
    let fn_ = counts.false_negatives as i128;
    IrMetrics {
        accuracy: (counts.universe > 0).then(|| {
            rat(
                tp + clamp_u128(counts.true_negatives),
                clamp_u128(counts.universe),
            )
        }),
        precision: (tp + fp > 0).then(|| rat(tp, tp + fp)),
        recall: (tp + fn_ > 0).then(|| rat(tp, tp + fn_)),
        f1: (tp + fp + fn_ > 0).then(|| rat(2 * tp, 2 * tp + fp + fn_)),
    }
}

/// An injective variable renaming from the first rule's variables into the
/// second rule's variables, extended with sinks: a variable mapped to a sink
/// (`None`) equals nothing.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Renaming {
    map: BTreeMap<VarId, Option<VarId>>,
}

impl Renaming {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, Option<VarId>)>) -> Self {
        Renaming {
            map: pairs.into_iter().collect(),
        }
    }

    /// Image of `v`; `None` for a sink (or a variable outside the domain).
    pub fn map_var(&self, v: VarId) -> Option<VarId> {
        self.map.get(&v).copied().flatten()
    }

    pub fn mappings(&self) -> impl Iterator<Item = (VarId, Option<VarId>)> + '_ {
        self.map.iter().map(|(&v, &w)| (v, w))
    }
}

/// All injective total maps from the first rule's variables into the second
/// rule's variables plus sinks. Sink choices are interchangeable, so each
/// assignment appears once.
pub fn enumerate_renamings(r1: &Rule, r2: &Rule) -> Vec<Renaming> {
    let vars1: Vec<VarId> = r1.variables().into_iter().collect();
    let vars2: Vec<VarId> = r2.variables().into_iter().collect();
    let mut out = Vec::new();
    let mut current: Vec<(VarId, Option<VarId>)> = Vec::new();
    fn recurse(
        vars1: &[VarId],
        vars2: &[VarId],
        used: &mut Vec<bool>,
        current: &mut Vec<(VarId, Option<VarId>)>,
        out: &mut Vec<Renaming>,
    ) {
        let i = current.len();
        if i == vars1.len() {
            out.push(Renaming::from_pairs(current.iter().copied()));
            return;
        }
        for (j, &w) in vars2.iter().enumerate() {
            if used[j] {
                continue;
            }
            used[j] = true;
            current.push((vars1[i], Some(w)));
            recurse(vars1, vars2, used, current, out);
            current.pop();
            used[j] = false;
        }
        current.push((vars1[i], None));
        recurse(vars1, vars2, used, current, out);
        current.pop();
    }
    let mut used = vec![false; vars2.len()];
    recurse(&vars1, &vars2, &mut used, &mut current, &mut out);
    out
}

fn term_matches(t1: &Term, t2: &Term, omega: &Renaming) -> bool {
    match t1 {
        Term::Const(c) => matches!(t2, Term::Const(d) if d == c),
        Term::Var(v) => match omega.map_var(*v) {
            Some(w) => matches!(t2, Term::Var(u) if *u == w),
            None => false,
        },
    }
}

/// Distance between two atoms under a renaming; `None` stands for the empty
/// placeholder, whose distance to anything is 1. Atoms with different
/// predicates are at distance 1; otherwise each of the n argument positions
/// that disagrees under the renaming contributes 1/(2n). Constants are fixed
/// points of the renaming and compare by identity.
pub fn atom_distance(a1: Option<&Atom>, a2: Option<&Atom>, omega: &Renaming) -> Rat {
    let (a1, a2) = match (a1, a2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Rat::from_integer(1),
    };
    if a1.pred != a2.pred || a1.args.len() != a2.args.len() {
        return Rat::from_integer(1);
    }
    let mismatches = a1
        .args
        .iter()
        .zip(a2.args.iter())
        .filter(|(t1, t2)| !term_matches(t1, t2, omega))
        .count();
    rat(mismatches as i128, 2 * a1.args.len() as i128)
}

/// A body-atom alignment: pairs of indices into the two bodies, with `None`
/// as the placeholder. Every atom of the longer body occurs exactly once,
/// atoms of the shorter body at most once, matched pairs share a predicate,
/// and a placeholder is only used when no same-predicate partner is left.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pairing {
    pub pairs: Vec<(Option<usize>, Option<usize>)>,
}

impl Pairing {
    /// Resolves the index pairs to atoms of the two rules.
    pub fn resolve<'a>(
        &self,
        r1: &'a Rule,
        r2: &'a Rule,
    ) -> Vec<(Option<&'a Atom>, Option<&'a Atom>)> {
        self.pairs
            .iter()
            .map(|(i, j)| (i.map(|i| &r1.body()[i]), j.map(|j| &r2.body()[j])))
            .collect()
    }
}

/// Atom indices of the two bodies grouped by predicate.
fn predicate_groups(r1: &Rule, r2: &Rule) -> BTreeMap<PredId, (Vec<usize>, Vec<usize>)> {
    let mut groups: BTreeMap<PredId, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, a) in r1.body().iter().enumerate() {
        groups.entry(a.pred).or_default().0.push(i);
    }
    for (j, a) in r2.body().iter().enumerate() {
        groups.entry(a.pred).or_default().1.push(j);
    }
    groups
}

/// All injective assignments of the smaller list into the larger one.
fn injections(smaller: &[usize], larger: &[usize]) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    let mut used = vec![false; larger.len()];
    let mut current = Vec::new();
    fn recurse(
        smaller: &[usize],
        larger: &[usize],
        used: &mut Vec<bool>,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        let i = current.len();
        if i == smaller.len() {
            out.push(current.clone());
            return;
        }
        for (j, &l) in larger.iter().enumerate() {
            if used[j] {
                continue;
            }
            used[j] = true;
            current.push((smaller[i], l));
            recurse(smaller, larger, used, current, out);
            current.pop();
            used[j] = false;
        }
    }
    recurse(smaller, larger, &mut used, &mut current, &mut out);
    out
}

/// All pairings of the two rule bodies.
pub fn enumerate_pairings(r1: &Rule, r2: &Rule) -> Vec<Pairing> {
    let n1 = r1.body().len();
    let n2 = r2.body().len();
    // Ties keep the first body fully covered.
    let flip = n2 > n1;
    let groups = predicate_groups(r1, r2);

    // Per group, every maximal set of same-predicate matches.
    let mut per_group: Vec<Vec<Vec<(usize, usize)>>> = Vec::new();
    for (g1, g2) in groups.values() {
        let matchings = if g1.len() <= g2.len() {
            injections(g1, g2)
        } else {
            injections(g2, g1)
                .into_iter()
                .map(|m| m.into_iter().map(|(j, i)| (i, j)).collect())
                .collect()
        };
        per_group.push(matchings);
    }

    let mut combos: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for group in per_group {
        let mut next = Vec::with_capacity(combos.len() * group.len());
        for combo in &combos {
            for matching in &group {
                let mut merged = combo.clone();
                merged.extend(matching.iter().copied());
                next.push(merged);
            }
        }
        combos = next;
    }

    let mut out = Vec::with_capacity(combos.len());
    for matched in combos {
        let used1: BTreeSet<usize> = matched.iter().map(|&(i, _)| i).collect();
        let used2: BTreeSet<usize> = matched.iter().map(|&(_, j)| j).collect();
        let mut pairs: Vec<(Option<usize>, Option<usize>)> = matched
            .iter()
            .map(|&(i, j)| (Some(i), Some(j)))
            .collect();
        if flip {
            pairs.extend((0..n2).filter(|j| !used2.contains(j)).map(|j| (None, Some(j))));
        } else {
            pairs.extend((0..n1).filter(|i| !used1.contains(i)).map(|i| (Some(i), None)));
        }
        pairs.sort_unstable();
        out.push(Pairing { pairs });
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Minimum-cost assignment of every row to a distinct column
/// (`rows <= cols`), by subset dynamic programming.
fn assignment_min(costs: &[Vec<Rat>]) -> Rat {
    let rows = costs.len();
    if rows == 0 {
        return Rat::from_integer(0);
    }
    let cols = costs[0].len();
    debug_assert!(rows <= cols);
    let mut dp: Vec<Option<Rat>> = vec![None; 1 << cols];
    dp[0] = Some(Rat::from_integer(0));
    let mut best: Option<Rat> = None;
    for mask in 0usize..(1 << cols) {
        let Some(cost) = dp[mask] else { continue };
        let i = mask.count_ones() as usize;
        if i == rows {
            best = Some(match best {
                Some(b) if b <= cost => b,
                _ => cost,
            });
            continue;
        }
        for j in 0..cols {
            if mask & (1 << j) != 0 {
                continue;
            }
            let next = cost + costs[i][j];
            let slot = &mut dp[mask | (1 << j)];
            if slot.map_or(true, |s| next < s) {
                *slot = Some(next);
            }
        }
    }
    best.expect("some assignment exists")
}

/// Minimal body alignment cost under `omega`: per predicate group a
/// minimum-cost matching, plus 1 for every longer-body atom left over.
fn body_cost(r1: &Rule, r2: &Rule, omega: &Renaming) -> Rat {
    let flip = r2.body().len() > r1.body().len();
    let mut total = Rat::from_integer(0);
    for (g1, g2) in predicate_groups(r1, r2).values() {
        let leftovers = if flip {
            g2.len().saturating_sub(g1.len())
        } else {
            g1.len().saturating_sub(g2.len())
        };
        total += Rat::from_integer(leftovers as i128);
        let (rows, cols, transpose) = if g1.len() <= g2.len() {
            (g1, g2, false)
        } else {
            (g2, g1, true)
        };
        if rows.is_empty() {
            continue;
        }
        let costs: Vec<Vec<Rat>> = rows
            .iter()
            .map(|&r| {
                cols.iter()
                    .map(|&c| {
                        let (i, j) = if transpose { (c, r) } else { (r, c) };
                        atom_distance(Some(&r1.body()[i]), Some(&r2.body()[j]), omega)
                    })
                    .collect()
            })
            .collect();
        total += assignment_min(&costs);
    }
    total
}

/// Distance between two rules: the best match over all renamings and body
/// pairings, averaged over the atom count of the longer rule. The inner
/// minimum over pairings is solved as a per-group assignment problem.
pub fn rule_distance(r1: &Rule, r2: &Rule) -> Rat {
    let n_a = r1.body().len().max(r2.body().len()) as i128 + 1;
    let mut best: Option<Rat> = None;
    for omega in enumerate_renamings(r1, r2) {
        let cost = atom_distance(Some(r1.head()), Some(r2.head()), &omega)
            + body_cost(r1, r2, &omega);
        if best.map_or(true, |b| cost < b) {
            best = Some(cost);
        }
        if best == Some(Rat::from_integer(0)) {
            break;
        }
    }
    best.expect("at least the all-sink renaming exists") / Rat::from_integer(n_a)
}

/// Reference implementation of [`rule_distance`] by full enumeration over
/// all renamings and all pairings.
pub fn rule_distance_enumerated(r1: &Rule, r2: &Rule) -> Rat {
    let n_a = r1.body().len().max(r2.body().len()) as i128 + 1;
    let pairings = enumerate_pairings(r1, r2);
    let mut best: Option<Rat> = None;
    for omega in enumerate_renamings(r1, r2) {
        let head = atom_distance(Some(r1.head()), Some(r2.head()), &omega);
        for pairing in &pairings {
            let cost = head
                + pairing
                    .resolve(r1, r2)
                    .into_iter()
                    .map(|(a1, a2)| atom_distance(a1, a2, &omega))
                    .sum::<Rat>();
            if best.map_or(true, |b| cost < b) {
                best = Some(cost);
            }
        }
    }
    best.expect("at least one pairing exists") / Rat::from_integer(n_a)
}

/// Rule-set similarity: one minus the mean distance from each original rule
/// to its closest learned rule with the same head predicate; a head
/// predicate the learned program never defines contributes distance 1.
/// `None` when the original program is empty.
pub fn r_score(rules: &Program, learned: &Program) -> Option<Rat> {
    if rules.is_empty() {
        return None;
    }
    let mut total = Rat::from_integer(0);
    for r1 in rules.iter() {
        let candidates = learned.rules_with_head(r1.head_predicate());
        let closest = candidates
            .iter()
            .map(|r2| rule_distance(r1, r2))
            .min()
            .unwrap_or_else(|| Rat::from_integer(1));
        total += closest;
    }
    Some(Rat::from_integer(1) - total / Rat::from_integer(rules.len() as i128))
}

/// Marks metric values that fall back to a convention because their
/// defining division is undefined on the inputs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MetricFlags {
    pub h_accuracy_undefined: bool,
    pub h_score_vacuous: bool,
    pub std_confidence_undefined: bool,
    pub accuracy_undefined: bool,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_vacuous: bool,
    pub r_score_undefined: bool,
    /// The inferred sets contain facts outside the Herbrand base of the
    /// original signature.
    pub universe_exceeded: bool,
}

/// Every measure of one evaluation run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MetricsReport {
    pub h_distance: usize,
    pub h_accuracy: Rat,
    pub h_score: Rat,
    pub std_confidence: Rat,
    pub accuracy: Rat,
    pub precision: Rat,
    pub recall: Rat,
    pub f1: Rat,
    pub r_score: Rat,
    pub counts: ConfusionCounts,
    pub flags: MetricFlags,
}

#[derive(Clone, Debug, Default)]
pub struct EvalOptions {
    /// Facts inferred on these predicates are dropped from the learned
    /// side before comparison (auxiliary predicates of some learners).
    pub ignore_predicates: BTreeSet<PredId>,
}

/// Compares the inferences of `learned` against those of `rules` over the
/// same support facts and computes every metric. The Herbrand base is the
/// one spanned by the original rules and the support facts; learned-only
/// symbols never enlarge it.
pub fn evaluate(
    sig: &Signature,
    rules: &Program,
    learned: &Program,
    support: &FactSet,
    options: &EvalOptions,
) -> MetricsReport {
    let truth = inferred(rules, support);
    let mut predicted = inferred(learned, support);
    if !options.ignore_predicates.is_empty() {
        predicted = predicted.without_predicates(&options.ignore_predicates);
    }
    report(sig, rules, learned, &truth, &predicted, support)
}

/// Builds the report from already computed inference sets (used by the
/// evaluator when consequences were loaded from a bundle).
pub fn report(
    sig: &Signature,
    rules: &Program,
    learned: &Program,
    truth: &FactSet,
    predicted: &FactSet,
    support: &FactSet,
) -> MetricsReport {
    let universe = signature_of(sig, rules, support).herbrand_base_size();
    let counts = confusion(truth, predicted, universe);
    let ir = ir_metrics(&counts);
    let one = Rat::from_integer(1);
    let zero = Rat::from_integer(0);

    let h_acc = h_accuracy(truth, predicted, universe);
    let h_sc = h_score(truth, predicted);
    let s_c = std_confidence(truth, predicted);
    let r_sc = r_score(rules, learned);
    let union = truth.union(predicted).len() as u128;

    let flags = MetricFlags {
        h_accuracy_undefined: h_acc.is_none(),
        h_score_vacuous: h_sc.is_none(),
        std_confidence_undefined: s_c.is_none(),
        accuracy_undefined: ir.accuracy.is_none(),
        precision_undefined: ir.precision.is_none(),
        recall_undefined: ir.recall.is_none(),
        f1_vacuous: ir.f1.is_none(),
        r_score_undefined: r_sc.is_none(),
        universe_exceeded: union > universe,
    };
    MetricsReport {
        h_distance: herbrand_distance(truth, predicted),
        h_accuracy: h_acc.unwrap_or(one),
        h_score: h_sc.unwrap_or(one),
        std_confidence: s_c.unwrap_or(zero),
        accuracy: ir.accuracy.unwrap_or(one),
        precision: ir.precision.unwrap_or(zero),
        recall: ir.recall.unwrap_or(zero),
        f1: ir.f1.unwrap_or(one),
        r_score: r_sc.unwrap_or(zero),
        counts,
        flags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse_facts_into, parse_rules, parse_rules_into};

    fn example_rules() -> (Signature, Rule, Rule) {
        let (mut sig, p1) = parse_rules("p1(A,B) :- p2(A,A), p3(B,B), p4(A,B).").unwrap();
        let p2 = parse_rules_into(&mut sig, "p1(X,X) :- p2(Y,X), p2(X,X).").unwrap();
        let r1 = p1.iter().next().unwrap().clone();
        let r2 = p2.iter().next().unwrap().clone();
        (sig, r1, r2)
    }

    fn sets(a: &str, b: &str) -> (FactSet, FactSet, Signature) {
        let mut sig = Signature::new();
        let i = parse_facts_into(&mut sig, a).unwrap();
        let j = parse_facts_into(&mut sig, b).unwrap();
        (i, j, sig)
    }

    #[test]
    fn herbrand_distance_examples() {
        let (i, j, _) = sets("f1(a).\nf2(a).", "f2(a).\nf3(a).");
        assert_eq!(herbrand_distance(&i, &j), 2);
        assert_eq!(herbrand_distance(&i, &i), 0);
        let (i, j, _) = sets("f1(a).\nf2(a).", "f3(a).\nf4(a).");
        assert_eq!(herbrand_distance(&i, &j), i.len() + j.len());
    }

    #[test]
    fn h_accuracy_examples() {
        let (i, j, _) = sets("f1(a).\nf2(a).", "f2(a).\nf3(a).");
        assert_eq!(h_accuracy(&i, &j, 10), Some(rat(4, 5)));
        assert_eq!(h_accuracy(&i, &i, 18), Some(rat(1, 1)));
        assert_eq!(h_accuracy(&i, &j, 0), None);
        // Large universes drown the distance.
        let huge = h_accuracy(&i, &j, 1_000_000_000).unwrap();
        assert!(huge > rat(999_999, 1_000_000));
    }

    #[test]
    fn h_score_examples() {
        let (i, j, _) = sets("f1(a).\nf2(a).", "f2(a).\nf3(a).");
        assert_eq!(h_score(&i, &j), Some(rat(1, 3)));
        assert_eq!(h_score(&i, &i), Some(rat(1, 1)));
        let (i, j, _) = sets("f1(a).", "f2(a).");
        assert_eq!(h_score(&i, &j), Some(rat(0, 1)));
        assert_eq!(h_score(&FactSet::new(), &FactSet::new()), None);
    }

    #[test]
    fn std_confidence_examples() {
        let (i, j, _) = sets("f1(a).\nf2(a).", "f2(a).\nf3(a).");
        assert_eq!(std_confidence(&i, &j), Some(rat(1, 2)));
        let (i, j, _) = sets("f1(a).\nf2(a).", "f2(a).");
        assert_eq!(std_confidence(&i, &j), Some(rat(1, 1)));
        assert_eq!(std_confidence(&i, &FactSet::new()), None);
    }

    #[test]
    fn confusion_example() {
        let (i, j, _) = sets("f1(a).\nf2(a).", "f2(a).\nf3(a).");
        let c = confusion(&i, &j, 10);
        assert_eq!(
            (c.true_positives, c.false_positives, c.false_negatives, c.true_negatives),
            (1, 1, 1, 7)
        );
        let ir = ir_metrics(&c);
        assert_eq!(ir.accuracy, Some(rat(4, 5)));
        assert_eq!(ir.precision, Some(rat(1, 2)));
        assert_eq!(ir.recall, Some(rat(1, 2)));
        assert_eq!(ir.f1, Some(rat(1, 2)));
    }

    #[test]
    fn f1_is_h_score_transform() {
        // f1 = 2h/(1+h), checked on a spread of set shapes.
        let cases = [
            ("f1(a).\nf2(a).", "f2(a).\nf3(a)."),
            ("f1(a).", "f1(a)."),
            ("f1(a).\nf2(a).\nf3(a).", "f4(a)."),
            ("f1(a).", "f1(a).\nf2(a).\nf3(a)."),
        ];
        for (a, b) in cases {
            let (i, j, _) = sets(a, b);
            let c = confusion(&i, &j, 100);
            let f1 = ir_metrics(&c).f1.unwrap();
            let h = h_score(&i, &j).unwrap();
            assert_eq!(f1, rat(2, 1) * h / (Rat::from_integer(1) + h));
        }
    }

    #[test]
    fn renamings_of_worked_example() {
        let (_, r1, r2) = example_rules();
        let renamings = enumerate_renamings(&r1, &r2);
        // Two full injections {A:X,B:Y} and {A:Y,B:X}, plus sink maps.
        assert_eq!(renamings.len(), 7);
        let full: Vec<&Renaming> = renamings
            .iter()
            .filter(|o| o.mappings().all(|(_, w)| w.is_some()))
            .collect();
        assert_eq!(full.len(), 2);
    }

    #[test]
    fn renaming_counts() {
        // vars {A} -> {X,Y}: two non-sink maps plus one sink map.
        let (_, prog_a) = parse_rules("p(A) :- q(A).").unwrap();
        let (_, prog_b) = parse_rules("p(X) :- q(Y), q(X).").unwrap();
        let a = prog_a.iter().next().unwrap();
        let b = prog_b.iter().next().unwrap();
        let renamings = enumerate_renamings(a, b);
        assert_eq!(renamings.len(), 3);
        assert_eq!(
            renamings.iter().filter(|o| o.mappings().all(|(_, w)| w.is_some())).count(),
            2
        );
        // No variables on the left: exactly the empty renaming.
        let (mut sig, pg) = parse_rules("p(a,b) :- q(a).").unwrap();
        let ground = pg.iter().next().unwrap();
        let other = parse_rules_into(&mut sig, "p(X,Y) :- q(X), r(Y).").unwrap();
        let o = other.iter().next().unwrap();
        assert_eq!(enumerate_renamings(ground, o).len(), 1);
    }

    #[test]
    fn atom_distance_worked_example() {
        let (_, r1, r2) = example_rules();
        // omega1 = {A:X, B:Y}, omega2 = {A:Y, B:X}; after canonicalization
        // r1 has A=0, B=1 and r2 has X=0, Y=1.
        let omega1 = Renaming::from_pairs([(VarId(0), Some(VarId(0))), (VarId(1), Some(VarId(1)))]);
        let omega2 = Renaming::from_pairs([(VarId(0), Some(VarId(1))), (VarId(1), Some(VarId(0)))]);
        let d1 = atom_distance(Some(r1.head()), Some(r2.head()), &omega1);
        let d2 = atom_distance(Some(r1.head()), Some(r2.head()), &omega2);
        assert_eq!(d1, rat(1, 4));
        assert_eq!(d2, rat(1, 4));
        // Identical atoms under the identity renaming.
        let id = Renaming::from_pairs(r1.variables().into_iter().map(|v| (v, Some(v))));
        assert_eq!(atom_distance(Some(r1.head()), Some(r1.head()), &id), rat(0, 1));
        // p2(A,A) under omega2 against p2(X,X): both positions disagree.
        assert_eq!(
            atom_distance(Some(&r1.body()[0]), Some(&r2.body()[1]), &omega2),
            rat(1, 2)
        );
        // The placeholder is at distance 1 from anything.
        assert_eq!(atom_distance(Some(r1.head()), None, &omega1), rat(1, 1));
        assert_eq!(atom_distance(None, Some(r2.head()), &omega1), rat(1, 1));
    }

    #[test]
    fn pairings_of_worked_example() {
        let (_, r1, r2) = example_rules();
        let pairings = enumerate_pairings(&r1, &r2);
        assert_eq!(pairings.len(), 2);
        let expected_a = Pairing {
            pairs: vec![(Some(0), Some(0)), (Some(1), None), (Some(2), None)],
        };
        let expected_b = Pairing {
            pairs: vec![(Some(0), Some(1)), (Some(1), None), (Some(2), None)],
        };
        assert!(pairings.contains(&expected_a));
        assert!(pairings.contains(&expected_b));
    }

    #[test]
    fn pairing_edge_shapes() {
        // Disjoint body predicates: a single all-placeholder pairing.
        let (mut sig, pa) = parse_rules("p(X) :- q(X), r(X).").unwrap();
        let pb = parse_rules_into(&mut sig, "p(X) :- s(X).").unwrap();
        let a = pa.iter().next().unwrap();
        let b = pb.iter().next().unwrap();
        let pairings = enumerate_pairings(a, b);
        assert_eq!(pairings.len(), 1);
        assert_eq!(
            pairings[0].pairs,
            vec![(Some(0), None), (Some(1), None)]
        );
        // Identical bodies of length 2 with distinct predicates: exactly the
        // identity match.
        let pairings = enumerate_pairings(a, a);
        assert_eq!(pairings.len(), 1);
        assert_eq!(
            pairings[0].pairs,
            vec![(Some(0), Some(0)), (Some(1), Some(1))]
        );
    }

    #[test]
    fn rule_distance_worked_example() {
        let (_, r1, r2) = example_rules();
        // The four renaming/pairing combinations sum (head included) to
        // 2.5, 2.25, 2.5 and 2.75; the minimum 2.25 over 4 atoms is 0.5625.
        let omega1 = Renaming::from_pairs([(VarId(0), Some(VarId(0))), (VarId(1), Some(VarId(1)))]);
        let omega2 = Renaming::from_pairs([(VarId(0), Some(VarId(1))), (VarId(1), Some(VarId(0)))]);
        let pairings = enumerate_pairings(&r1, &r2);
        let mut sums = Vec::new();
        for omega in [&omega1, &omega2] {
            for pairing in &pairings {
                let total = atom_distance(Some(r1.head()), Some(r2.head()), omega)
                    + pairing
                        .resolve(&r1, &r2)
                        .into_iter()
                        .map(|(a, b)| atom_distance(a, b, omega))
                        .sum::<Rat>();
                sums.push(total);
            }
        }
        sums.sort();
        assert_eq!(sums, vec![rat(9, 4), rat(5, 2), rat(5, 2), rat(11, 4)]);
        assert_eq!(rule_distance(&r1, &r2), rat(9, 16));
        assert_eq!(rule_distance_enumerated(&r1, &r2), rat(9, 16));
        assert_eq!(rule_distance(&r1, &r1), rat(0, 1));
    }

    #[test]
    fn rule_distance_head_mismatch() {
        let (mut sig, pa) = parse_rules("p(X,Y) :- q(X,Y).").unwrap();
        let pb = parse_rules_into(&mut sig, "a(X,Y) :- b(X,Y).").unwrap();
        let a = pa.iter().next().unwrap();
        let b = pb.iter().next().unwrap();
        assert_eq!(rule_distance(a, b), rat(1, 1));
    }

    #[test]
    fn r_score_examples() {
        let (mut sig, rules) = parse_rules("p1(A,B) :- p2(A,A), p3(B,B), p4(A,B).").unwrap();
        assert_eq!(r_score(&rules, &rules), Some(rat(1, 1)));
        let learned = parse_rules_into(&mut sig, "p1(X,X) :- p2(Y,X), p2(X,X).").unwrap();
        assert_eq!(r_score(&rules, &learned), Some(rat(7, 16)));
        let other = parse_rules_into(&mut sig, "p9(X) :- p2(X,X).").unwrap();
        assert_eq!(r_score(&rules, &other), Some(rat(0, 1)));
        assert_eq!(r_score(&Program::new(), &rules), None);
    }

    #[test]
    fn evaluate_end_to_end() {
        let (mut sig, rules) = parse_rules("grandparent(X,Z) :- parent(X,Y),parent(Y,Z).").unwrap();
        let support = parse_facts_into(&mut sig, "parent(ann,bob).\nparent(bob,dan).").unwrap();
        let report = evaluate(&sig, &rules, &rules, &support, &EvalOptions::default());
        assert_eq!(report.h_distance, 0);
        assert_eq!(report.h_score, rat(1, 1));
        assert_eq!(report.precision, rat(1, 1));
        assert_eq!(report.recall, rat(1, 1));
        assert_eq!(report.f1, rat(1, 1));
        assert_eq!(report.r_score, rat(1, 1));

        // Empty learned program: h_score 0, flagged confidence, r_score 0.
        let report = evaluate(&sig, &rules, &Program::new(), &support, &EvalOptions::default());
        assert_eq!(report.h_score, rat(0, 1));
        assert!(report.flags.std_confidence_undefined);
        assert_eq!(report.std_confidence, rat(0, 1));
        assert_eq!(report.r_score, rat(0, 1));
    }

    #[test]
    fn evaluate_ignores_auxiliary_predicates() {
        let (mut sig, rules) = parse_rules("t(X,Y) :- e(X,Y).").unwrap();
        let learned =
            parse_rules_into(&mut sig, "aux(X,Y) :- e(X,Y).\nt(X,Y) :- e(X,Y).").unwrap();
        let support = parse_facts_into(&mut sig, "e(a,b).").unwrap();
        let noisy = evaluate(&sig, &rules, &learned, &support, &EvalOptions::default());
        assert!(noisy.precision < rat(1, 1));
        let options = EvalOptions {
            ignore_predicates: [sig.lookup_predicate("aux").unwrap()].into(),
        };
        let clean = evaluate(&sig, &rules, &learned, &support, &options);
        assert_eq!(clean.precision, rat(1, 1));
        assert_eq!(clean.h_score, rat(1, 1));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal6(rat(9, 16)), "0.562500");
        assert_eq!(decimal6(rat(1, 3)), "0.333333");
        assert_eq!(decimal6(rat(2, 3)), "0.666667");
        assert_eq!(decimal6(rat(1, 1)), "1.000000");
        assert_eq!(decimal6(rat(-1, 4)), "-0.250000");
    }
}
