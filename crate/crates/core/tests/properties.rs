//! Property tests for the set algebra, the text round trip, the inference
//! engine laws, and the equivalence of the optimized rule distance with its
//! enumerating reference.

use proptest::prelude::*;

use rulebench_core::metrics::{rule_distance, rule_distance_enumerated};
use rulebench_core::{
    closure, closure_naive, inferred, parse_facts_into, parse_rules_into, serialize_facts,
    serialize_rules, Atom, Fact, FactSet, Program, Rule, Signature, Term,
};

#[derive(Debug, Clone)]
struct Universe {
    sig: Signature,
    arities: Vec<usize>,
    n_consts: usize,
}

fn universe(max_preds: usize, max_consts: usize) -> impl Strategy<Value = Universe> {
    (1..=max_preds, 1..=max_consts).prop_flat_map(|(np, nc)| {
        proptest::collection::vec(1..=2usize, np).prop_map(move |arities| {
            let mut sig = Signature::new();
            for (i, &a) in arities.iter().enumerate() {
                sig.add_predicate(&format!("p{i}"), a).unwrap();
            }
            for i in 0..nc {
                sig.add_constant(&format!("c{i}"));
            }
            Universe {
                sig,
                arities,
                n_consts: nc,
            }
        })
    })
}

type RawFact = (usize, Vec<usize>);

fn raw_facts(max: usize) -> impl Strategy<Value = Vec<RawFact>> {
    proptest::collection::vec(
        (0..100usize, proptest::collection::vec(0..100usize, 2)),
        0..max,
    )
}

fn build_facts(u: &Universe, raw: &[RawFact]) -> FactSet {
    raw.iter()
        .map(|(p, args)| {
            let p = p % u.arities.len();
            let fact_args = args
                .iter()
                .take(u.arities[p])
                .map(|c| rulebench_core::ConstId((c % u.n_consts) as u32))
                .collect();
            Fact::new(rulebench_core::PredId(p as u32), fact_args)
        })
        .collect()
}

/// Body atoms encode terms as small codes: below 4 a variable, otherwise a
/// constant. Head arguments pick variables from the body (or a constant), so
/// every generated rule is range restricted by construction.
type RawRule = (usize, Vec<usize>, Vec<(usize, Vec<usize>)>);

fn raw_rules(max: usize) -> impl Strategy<Value = Vec<RawRule>> {
    proptest::collection::vec(
        (
            0..100usize,
            proptest::collection::vec(0..100usize, 2),
            proptest::collection::vec(
                (0..100usize, proptest::collection::vec(0..8usize, 2)),
                1..4,
            ),
        ),
        1..max,
    )
}

fn build_rules(u: &Universe, raw: &[RawRule]) -> Program {
    let mut program = Program::new();
    for (head_p, head_spec, body_spec) in raw {
        let mut body = Vec::new();
        let mut body_vars = Vec::new();
        for (p, terms) in body_spec {
            let p = p % u.arities.len();
            let args: Vec<Term> = terms
                .iter()
                .take(u.arities[p])
                .map(|&code| {
                    if code < 4 {
                        let v = rulebench_core::VarId(code as u32);
                        if !body_vars.contains(&v) {
                            body_vars.push(v);
                        }
                        Term::Var(v)
                    } else {
                        Term::Const(rulebench_core::ConstId(((code - 4) % u.n_consts) as u32))
                    }
                })
                .collect();
            body.push(Atom::new(rulebench_core::PredId(p as u32), args));
        }
        let head_p = head_p % u.arities.len();
        let head_args: Vec<Term> = head_spec
            .iter()
            .take(u.arities[head_p])
            .map(|&code| {
                if !body_vars.is_empty() && code % 2 == 0 {
                    Term::Var(body_vars[(code / 2) % body_vars.len()])
                } else {
                    Term::Const(rulebench_core::ConstId((code % u.n_consts) as u32))
                }
            })
            .collect();
        let rule = Rule::new(Atom::new(rulebench_core::PredId(head_p as u32), head_args), body)
            .expect("head arguments come from the body");
        program.insert(rule);
    }
    program
}

proptest! {
    #[test]
    fn factset_algebra_laws(u in universe(3, 5), ra in raw_facts(20), rb in raw_facts(20)) {
        let a = build_facts(&u, &ra);
        let b = build_facts(&u, &rb);
        prop_assert!(a.difference(&b).is_disjoint(&b));
        prop_assert_eq!(
            a.union(&b).len() + a.intersection(&b).len(),
            a.len() + b.len()
        );
        prop_assert!(a.intersection(&b).is_subset(&a));
        prop_assert!(a.is_subset(&a.union(&b)));
    }

    #[test]
    fn herbrand_base_bounds_factsets(u in universe(3, 5), raw in raw_facts(30)) {
        let facts = build_facts(&u, &raw);
        prop_assert!(u.sig.herbrand_base_size() >= facts.len() as u128);
    }

    #[test]
    fn facts_round_trip(u in universe(3, 5), raw in raw_facts(25)) {
        let facts = build_facts(&u, &raw);
        let text = serialize_facts(&u.sig, &facts);
        let mut sig = u.sig.clone();
        let back = parse_facts_into(&mut sig, &text).unwrap();
        prop_assert_eq!(&back, &facts);
        // Serialization is deterministic.
        prop_assert_eq!(serialize_facts(&sig, &back), text);
    }

    #[test]
    fn rules_round_trip(u in universe(4, 4), raw in raw_rules(6)) {
        let program = build_rules(&u, &raw);
        let text = serialize_rules(&u.sig, &program);
        let mut sig = u.sig.clone();
        let back = parse_rules_into(&mut sig, &text).unwrap();
        prop_assert_eq!(&back, &program);
        prop_assert_eq!(serialize_rules(&sig, &back), text);
    }

    #[test]
    fn closure_laws(u in universe(4, 5), rr in raw_rules(6), ra in raw_facts(12), rb in raw_facts(8)) {
        let program = build_rules(&u, &rr);
        let f1 = build_facts(&u, &ra);
        let f2 = build_facts(&u, &rb);
        let c1 = closure(&program, &f1);
        // Monotonicity.
        prop_assert!(c1.is_subset(&closure(&program, &f1.union(&f2))));
        // Idempotence.
        prop_assert_eq!(&closure(&program, &c1), &c1);
        // Inferred facts never repeat the inputs.
        prop_assert!(inferred(&program, &f1).is_disjoint(&f1));
    }

    #[test]
    fn semi_naive_matches_naive(u in universe(4, 5), rr in raw_rules(7), raw in raw_facts(12)) {
        let program = build_rules(&u, &rr);
        let facts = build_facts(&u, &raw);
        prop_assert_eq!(closure(&program, &facts), closure_naive(&program, &facts));
    }

    #[test]
    fn rule_distance_matches_enumeration(u in universe(4, 3), rr in raw_rules(3)) {
        let program = build_rules(&u, &rr);
        let rules: Vec<&Rule> = program.iter().collect();
        for r1 in &rules {
            for r2 in &rules {
                prop_assert_eq!(rule_distance(r1, r2), rule_distance_enumerated(r1, r2));
            }
        }
    }
}
