//! Property suites: parser/printer round-trip over random ASTs, length
//! monotonicity, skill-algebra laws on random values, quantifier-universe
//! robustness, and the minimax recurrence of the game solver.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::*;
use eskmc::checker::Checker;
use eskmc::ids::{AgentId, Group, SkillId};
use eskmc::skill::{self, parse_membership, SkillValue};
use eskmc::syntax::{build, desugar, length, parse, subformulas, Fm, Formula};
use eskmc::ueg::{UegGraph, Winner};
use rand::Rng as _;

fn agent_strategy() -> impl Strategy<Value = AgentId> {
    prop_oneof![Just("a"), Just("b"), Just("watcher")].prop_map(AgentId::new)
}

fn group_strategy() -> impl Strategy<Value = Group> {
    proptest::sample::subsequence(vec!["a", "b", "watcher"], 1..=3)
        .prop_map(|names| Group::new(names.into_iter().map(AgentId::new)).unwrap())
}

fn skill_set_strategy() -> impl Strategy<Value = SkillValue> {
    proptest::sample::subsequence(vec!["s1", "s2", "sk3"], 0..=3)
        .prop_map(|names| SkillValue::classical(names.into_iter().map(SkillId::new)))
}

fn formula_strategy() -> impl Strategy<Value = Fm> {
    let leaf = prop_oneof![
        Just(build::top()),
        Just(build::bot()),
        prop_oneof![Just("p"), Just("q"), Just("r2")].prop_map(|n| build::atom(n)),
    ];
    leaf.prop_recursive(4, 48, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(build::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| build::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| build::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| build::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| build::iff(a, b)),
            (agent_strategy(), inner.clone()).prop_map(|(a, f)| build::k(a, f)),
            (group_strategy(), inner.clone()).prop_map(|(g, f)| build::c(g, f)),
            (group_strategy(), inner.clone()).prop_map(|(g, f)| build::d(g, f)),
            (group_strategy(), inner.clone()).prop_map(|(g, f)| build::e(g, f)),
            (group_strategy(), inner.clone()).prop_map(|(g, f)| build::fk(g, f)),
            (agent_strategy(), skill_set_strategy(), inner.clone())
                .prop_map(|(a, s, f)| build::up(a, s, f)),
            (agent_strategy(), skill_set_strategy(), inner.clone())
                .prop_map(|(a, s, f)| build::down(a, s, f)),
            (agent_strategy(), skill_set_strategy(), inner.clone())
                .prop_map(|(a, s, f)| build::set_to(a, s, f)),
            (agent_strategy(), agent_strategy(), inner.clone())
                .prop_map(|(l, s, f)| build::learn(l, s, f)),
            (agent_strategy(), inner.clone()).prop_map(|(a, f)| build::bp(a, f)),
            (agent_strategy(), inner.clone()).prop_map(|(a, f)| build::bm(a, f)),
            (agent_strategy(), inner.clone()).prop_map(|(a, f)| build::ba(a, f)),
            inner.prop_map(build::univ),
        ]
    })
}

proptest! {
    #[test]
    fn parse_print_round_trip(f in formula_strategy()) {
        let text = f.to_string();
        let back = parse(&text).unwrap_or_else(|e| panic!("reparse of {text:?} failed: {e}"));
        prop_assert_eq!(back, f);
    }

    #[test]
    fn length_matches_desugaring(f in formula_strategy()) {
        prop_assert_eq!(length(&f), length(&desugar(&f)));
    }

    #[test]
    fn length_monotone_under_substitution(f in formula_strategy()) {
        // replacing every occurrence of atom p with the longer (p & q)
        // strictly increases the length iff p occurs
        fn subst(f: &Fm) -> Fm {
            use Formula::*;
            match &**f {
                Atom(p) if p.as_str() == "p" => build::and(build::atom("p"), build::atom("q")),
                _ => {
                    let kids = f.children();
                    if kids.is_empty() {
                        return f.clone();
                    }
                    rebuild(f, kids.iter().map(|c| subst(c)).collect())
                }
            }
        }
        fn rebuild(f: &Fm, mut kids: Vec<Fm>) -> Fm {
            use Formula::*;
            let one = |k: &mut Vec<Fm>| k.remove(0);
            match &**f {
                Not(_) => build::not(one(&mut kids)),
                Implies(..) => build::implies(one(&mut kids), one(&mut kids)),
                And(..) => build::and(one(&mut kids), one(&mut kids)),
                Or(..) => build::or(one(&mut kids), one(&mut kids)),
                Iff(..) => build::iff(one(&mut kids), one(&mut kids)),
                K(a, _) => build::k(*a, one(&mut kids)),
                C(g, _) => build::c(g.clone(), one(&mut kids)),
                D(g, _) => build::d(g.clone(), one(&mut kids)),
                E(g, _) => build::e(g.clone(), one(&mut kids)),
                F(g, _) => build::fk(g.clone(), one(&mut kids)),
                Up(a, s, _) => build::up(*a, s.clone(), one(&mut kids)),
                Down(a, s, _) => build::down(*a, s.clone(), one(&mut kids)),
                SetTo(a, s, _) => build::set_to(*a, s.clone(), one(&mut kids)),
                Learn(l, s, _) => build::learn(*l, *s, one(&mut kids)),
                BoxPlus(a, _) => build::bp(*a, one(&mut kids)),
                BoxMinus(a, _) => build::bm(*a, one(&mut kids)),
                BoxAny(a, _) => build::ba(*a, one(&mut kids)),
                Univ(_) => build::univ(one(&mut kids)),
                Atom(_) | Top | Bot => unreachable!("leaves have no children"),
            }
        }
        let occurs = subformulas(&f).iter().any(|g| matches!(&**g, Formula::Atom(p) if p.as_str() == "p"));
        let substituted = subst(&f);
        if occurs {
            prop_assert!(length(&substituted) > length(&f));
        } else {
            prop_assert_eq!(length(&substituted), length(&f));
        }
    }

    #[test]
    fn closure_is_subformula_and_negation_closed(f in formula_strategy()) {
        let cl: BTreeSet<Fm> = eskmc::syntax::closure(&f).into_iter().collect();
        prop_assert!(cl.contains(&f));
        for g in &cl {
            for sub in g.children() {
                // children of closure members are subformulas of f or of a
                // single outer negation; either way they are in the closure
                prop_assert!(cl.contains(sub), "{g} has child {sub} outside the closure");
            }
        }
        prop_assert!(cl.contains(&build::top()) && cl.contains(&build::bot()));
    }

    #[test]
    fn fuzzy_algebra_laws(
        entries_a in proptest::collection::btree_map(0u8..4, 0u32..=100, 0..4),
        entries_b in proptest::collection::btree_map(0u8..4, 0u32..=100, 0..4),
    ) {
        let mk = |entries: &std::collections::BTreeMap<u8, u32>| {
            SkillValue::fuzzy(entries.iter().map(|(k, v)| {
                (
                    SkillId::new(&format!("z{k}")),
                    parse_membership(&format!("0.{v:02}")).unwrap_or_else(|_| num::rational::Ratio::new(*v as i64, 100)),
                )
            }))
        };
        let a = mk(&entries_a);
        let b = mk(&entries_b);
        prop_assert_eq!(skill::join(&a, &b).unwrap(), skill::join(&b, &a).unwrap());
        prop_assert_eq!(skill::meet(&a, &b).unwrap(), skill::meet(&b, &a).unwrap());
        prop_assert_eq!(skill::join(&a, &a).unwrap(), a.clone());
        prop_assert_eq!(skill::meet(&a, &a).unwrap(), a.clone());
        // absorption and order consistency
        prop_assert_eq!(skill::meet(&a, &skill::join(&a, &b).unwrap()).unwrap(), a.clone());
        prop_assert!(skill::leq(&a, &skill::join(&a, &b).unwrap()).unwrap());
        prop_assert!(skill::leq(&skill::meet(&a, &b).unwrap(), &a).unwrap());
        // difference against the empty set is the identity
        prop_assert_eq!(skill::difference(&a, &SkillValue::fuzzy([])).unwrap(), a.clone());
    }

    #[test]
    fn classical_antisymmetry(
        xs in proptest::collection::btree_set(0u8..6, 0..6),
        ys in proptest::collection::btree_set(0u8..6, 0..6),
    ) {
        let mk = |s: &BTreeSet<u8>| {
            SkillValue::classical(s.iter().map(|k| SkillId::new(&format!("z{k}"))))
        };
        let a = mk(&xs);
        let b = mk(&ys);
        let both = skill::leq(&a, &b).unwrap() && skill::leq(&b, &a).unwrap();
        prop_assert_eq!(both, a == b);
    }
}

#[test]
fn quantifier_universe_robustness() {
    // enlarging S2 with extra fresh skills never changes a quantified
    // formula's truth set
    let mut rng = rng(0xF00D);
    let agent_pool = agents(&["a", "b"]);
    let prop_pool = props(&["p0", "p1"]);
    let skill_pool = skills(&["t0", "t1"]);
    for _ in 0..60 {
        let m = random_model(&mut rng, 3, 2, &agent_pool, &prop_pool);
        let body = random_formula(&mut rng, 2, Lang::FULL, &agent_pool, &prop_pool, &skill_pool);
        let a = agent_pool[rng.gen_range(0..agent_pool.len())];
        let quantified = match rng.gen_range(0..3) {
            0 => build::bp(a, body),
            1 => build::bm(a, body),
            _ => build::ba(a, body),
        };
        let mut plain = Checker::new(&m).unwrap();
        let mut padded = Checker::new(&m).unwrap();
        padded.extra_fresh = 2;
        for w in m.worlds() {
            assert_eq!(
                plain.check(*w, &quantified).unwrap(),
                padded.check(*w, &quantified).unwrap(),
                "universe padding changed {quantified} at {w}"
            );
        }
    }
}

#[test]
fn ueg_minimax_recurrence() {
    // the mover wins exactly when some incident edge moves to a position
    // the opponent loses; checked on every rooted graph with 4 nodes
    let nodes: Vec<String> = (1..=4).map(|i| format!("d{i}")).collect();
    let mut all_pairs = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            all_pairs.push((nodes[i].clone(), nodes[j].clone()));
        }
    }
    for mask in 0u32..64 {
        let edges: Vec<(String, String)> = all_pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, e)| e.clone())
            .collect();
        for root in &nodes {
            let g = UegGraph::new(nodes.clone(), edges.clone(), root).unwrap();
            assert!(g.induced_model(false).validate().is_empty());
            let mover_wins = g.solve() == Winner::PlayerI;
            let mut any_losing_reply = false;
            for (x, y) in &edges {
                let next = if x == root {
                    y
                } else if y == root {
                    x
                } else {
                    continue;
                };
                let remaining: Vec<(String, String)> = edges
                    .iter()
                    .filter(|e| *e != &(x.clone(), y.clone()))
                    .cloned()
                    .collect();
                let successor = UegGraph::new(nodes.clone(), remaining, next).unwrap();
                if successor.solve() == Winner::PlayerII {
                    any_losing_reply = true;
                }
            }
            assert_eq!(mover_wins, any_losing_reply, "mask {mask:b} root {root}");
        }
    }
}
