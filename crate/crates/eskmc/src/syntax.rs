//! Formula AST for the skill-update epistemic language, its concrete
//! grammar, and the syntactic measures the algorithms and rewritings use
//! (length, closure, vocabulary, modal depth).
//!
//! Primitives are negation and implication; `&`, `|`, `<->` are kept as AST
//! sugar and desugared where the length convention requires primitive
//! connectives. `true`/`false` are primitive constants of length 1. Dual
//! modalities (`hatK`, `dp`, `dm`, `da`) are parser sugar for `~Op~`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::ids::{AgentId, Group, PropId, SkillId};
use crate::skill::SkillValue;

pub mod parse;

pub use parse::{parse, parse_internal, ParseError};

pub type Fm = Arc<Formula>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(PropId),
    Top,
    Bot,
    Not(Fm),
    Implies(Fm, Fm),
    And(Fm, Fm),
    Or(Fm, Fm),
    Iff(Fm, Fm),
    /// Individual knowledge K_a.
    K(AgentId, Fm),
    /// Common knowledge C_G.
    C(Group, Fm),
    /// Distributed knowledge D_G (join of the group's capabilities).
    D(Group, Fm),
    /// Mutual knowledge E_G (everyone in G knows).
    E(Group, Fm),
    /// Field knowledge F_G (meet of the group's capabilities).
    F(Group, Fm),
    /// Upskilling update (+_S)_a.
    Up(AgentId, SkillValue, Fm),
    /// Downskilling update (-_S)_a.
    Down(AgentId, SkillValue, Fm),
    /// Reskilling update (=_S)_a.
    SetTo(AgentId, SkillValue, Fm),
    /// Learning update (≡_source)_learner.
    Learn(AgentId, AgentId, Fm),
    /// Quantifier over arbitrary upskilling.
    BoxPlus(AgentId, Fm),
    /// Quantifier over arbitrary downskilling.
    BoxMinus(AgentId, Fm),
    /// Quantifier over arbitrary reskilling.
    BoxAny(AgentId, Fm),
    /// Universal modality: truth at every world.
    Univ(Fm),
}

/// Formula constructors. Tests and the rewritings build syntax through
/// these, which keeps `Arc` wrapping in one place.
pub mod build {
    use super::*;

    pub fn atom(p: &str) -> Fm {
        Arc::new(Formula::Atom(PropId::new(p)))
    }
    pub fn atom_id(p: PropId) -> Fm {
        Arc::new(Formula::Atom(p))
    }
    pub fn top() -> Fm {
        Arc::new(Formula::Top)
    }
    pub fn bot() -> Fm {
        Arc::new(Formula::Bot)
    }
    pub fn not(f: Fm) -> Fm {
        Arc::new(Formula::Not(f))
    }
    pub fn implies(a: Fm, b: Fm) -> Fm {
        Arc::new(Formula::Implies(a, b))
    }
    pub fn and(a: Fm, b: Fm) -> Fm {
        Arc::new(Formula::And(a, b))
    }
    pub fn or(a: Fm, b: Fm) -> Fm {
        Arc::new(Formula::Or(a, b))
    }
    pub fn iff(a: Fm, b: Fm) -> Fm {
        Arc::new(Formula::Iff(a, b))
    }
    pub fn k(a: AgentId, f: Fm) -> Fm {
        Arc::new(Formula::K(a, f))
    }
    pub fn c(g: Group, f: Fm) -> Fm {
        Arc::new(Formula::C(g, f))
    }
    pub fn d(g: Group, f: Fm) -> Fm {
        Arc::new(Formula::D(g, f))
    }
    pub fn e(g: Group, f: Fm) -> Fm {
        Arc::new(Formula::E(g, f))
    }
    pub fn fk(g: Group, f: Fm) -> Fm {
        Arc::new(Formula::F(g, f))
    }
    pub fn up(a: AgentId, s: SkillValue, f: Fm) -> Fm {
        Arc::new(Formula::Up(a, s, f))
    }
    pub fn down(a: AgentId, s: SkillValue, f: Fm) -> Fm {
        Arc::new(Formula::Down(a, s, f))
    }
    pub fn set_to(a: AgentId, s: SkillValue, f: Fm) -> Fm {
        Arc::new(Formula::SetTo(a, s, f))
    }
    pub fn learn(learner: AgentId, source: AgentId, f: Fm) -> Fm {
        Arc::new(Formula::Learn(learner, source, f))
    }
    pub fn bp(a: AgentId, f: Fm) -> Fm {
        Arc::new(Formula::BoxPlus(a, f))
    }
    pub fn bm(a: AgentId, f: Fm) -> Fm {
        Arc::new(Formula::BoxMinus(a, f))
    }
    pub fn ba(a: AgentId, f: Fm) -> Fm {
        Arc::new(Formula::BoxAny(a, f))
    }
    pub fn univ(f: Fm) -> Fm {
        Arc::new(Formula::Univ(f))
    }

    /// Dual of K: `hatK[a] f` is `~K[a]~f`.
    pub fn hat_k(a: AgentId, f: Fm) -> Fm {
        not(k(a, not(f)))
    }
    /// Diamond over upskilling: `dp[a] f` is `~bp[a]~f`.
    pub fn dp(a: AgentId, f: Fm) -> Fm {
        not(bp(a, not(f)))
    }
    /// Diamond over downskilling: `dm[a] f` is `~bm[a]~f`.
    pub fn dm(a: AgentId, f: Fm) -> Fm {
        not(bm(a, not(f)))
    }
    /// Diamond over reskilling: `da[a] f` is `~ba[a]~f`.
    pub fn da(a: AgentId, f: Fm) -> Fm {
        not(ba(a, not(f)))
    }

    /// Conjunction of a list, balanced so nesting depth stays logarithmic
    /// (big schema conjunctions would otherwise produce recursion-hostile
    /// chains); leaves keep their order. Empty input gives `true`.
    pub fn conj<I: IntoIterator<Item = Fm>>(items: I) -> Fm {
        balanced(items.into_iter().collect(), and, top())
    }

    /// Disjunction of a list, balanced like [`conj`]; empty input gives
    /// `false`.
    pub fn disj<I: IntoIterator<Item = Fm>>(items: I) -> Fm {
        balanced(items.into_iter().collect(), or, bot())
    }

    fn balanced(items: Vec<Fm>, op: fn(Fm, Fm) -> Fm, empty: Fm) -> Fm {
        fn go(items: &[Fm], op: fn(Fm, Fm) -> Fm) -> Fm {
            match items {
                [one] => one.clone(),
                _ => {
                    let mid = items.len() / 2;
                    op(go(&items[..mid], op), go(&items[mid..], op))
                }
            }
        }
        if items.is_empty() {
            empty
        } else {
            go(&items, op)
        }
    }
}

impl Formula {
    pub fn children(&self) -> Vec<&Fm> {
        use Formula::*;
        match self {
            Atom(_) | Top | Bot => vec![],
            Not(f) | K(_, f) | C(_, f) | D(_, f) | E(_, f) | F(_, f) | Up(_, _, f)
            | Down(_, _, f) | SetTo(_, _, f) | Learn(_, _, f) | BoxPlus(_, f) | BoxMinus(_, f)
            | BoxAny(_, f) | Univ(f) => vec![f],
            Implies(a, b) | And(a, b) | Or(a, b) | Iff(a, b) => vec![a, b],
        }
    }
}

/// Rewrites `&`, `|`, `<->` into the `~`/`->` primitives:
/// `a & b` becomes `~(a -> ~b)`, `a | b` becomes `~a -> b`, and
/// `a <-> b` becomes `(a -> b) & (b -> a)` desugared again.
pub fn desugar(f: &Fm) -> Fm {
    use build::*;
    use Formula::*;
    match &**f {
        Atom(_) | Top | Bot => f.clone(),
        Not(a) => not(desugar(a)),
        Implies(a, b) => implies(desugar(a), desugar(b)),
        And(a, b) => not(implies(desugar(a), not(desugar(b)))),
        Or(a, b) => implies(not(desugar(a)), desugar(b)),
        Iff(a, b) => {
            let (da, db) = (desugar(a), desugar(b));
            let fwd = implies(da.clone(), db.clone());
            let back = implies(db, da);
            not(implies(fwd, not(back)))
        }
        K(a, g) => k(*a, desugar(g)),
        C(gr, g) => c(gr.clone(), desugar(g)),
        D(gr, g) => d(gr.clone(), desugar(g)),
        E(gr, g) => e(gr.clone(), desugar(g)),
        F(gr, g) => fk(gr.clone(), desugar(g)),
        Up(a, s, g) => up(*a, s.clone(), desugar(g)),
        Down(a, s, g) => down(*a, s.clone(), desugar(g)),
        SetTo(a, s, g) => set_to(*a, s.clone(), desugar(g)),
        Learn(l, s, g) => learn(*l, *s, desugar(g)),
        BoxPlus(a, g) => bp(*a, desugar(g)),
        BoxMinus(a, g) => bm(*a, desugar(g)),
        BoxAny(a, g) => ba(*a, desugar(g)),
        Univ(g) => univ(desugar(g)),
    }
}

/// Number of skills an update operand mentions, for the length convention.
/// Lattice operands count as one symbol.
fn operand_card(s: &SkillValue) -> usize {
    match s {
        SkillValue::Classical(set) => set.len(),
        SkillValue::Fuzzy(m) => m.len(),
        SkillValue::Lattice(_) => 1,
        SkillValue::Full => 1,
    }
}

/// Symbol count of a formula, brackets included. Sugar connectives are
/// measured through their desugaring, so `length(f) == length(desugar(f))`.
pub fn length(f: &Formula) -> usize {
    use Formula::*;
    match f {
        Atom(_) | Top | Bot => 1,
        Not(g) => length(g) + 1,
        Implies(a, b) => length(a) + length(b) + 3,
        And(a, b) => length(a) + length(b) + 5,
        Or(a, b) => length(a) + length(b) + 4,
        Iff(a, b) => 2 * length(a) + 2 * length(b) + 11,
        K(_, g) => length(g) + 2,
        C(gr, g) | D(gr, g) | E(gr, g) | F(gr, g) => length(g) + 2 * gr.len() + 2,
        Up(_, s, g) | Down(_, s, g) | SetTo(_, s, g) => 2 * operand_card(s) + length(g) + 5,
        Learn(_, _, g) => length(g) + 5,
        BoxPlus(_, g) | BoxMinus(_, g) | BoxAny(_, g) => length(g) + 2,
        Univ(g) => length(g) + 1,
    }
}

/// All subformulas of `f`, including `f` itself, structurally deduplicated.
pub fn subformulas(f: &Fm) -> Vec<Fm> {
    let mut seen: BTreeSet<Fm> = BTreeSet::new();
    let mut out = Vec::new();
    fn walk(f: &Fm, seen: &mut BTreeSet<Fm>, out: &mut Vec<Fm>) {
        if seen.insert(f.clone()) {
            out.push(f.clone());
            for ch in f.children() {
                walk(ch, seen, out);
            }
        }
    }
    walk(f, &mut seen, &mut out);
    out
}

/// The closure of `f`: every subformula together with its negation, plus
/// the two constants.
pub fn closure(f: &Fm) -> Vec<Fm> {
    let mut seen: BTreeSet<Fm> = BTreeSet::new();
    let mut out = Vec::new();
    let push = |g: Fm, seen: &mut BTreeSet<Fm>, out: &mut Vec<Fm>| {
        if seen.insert(g.clone()) {
            out.push(g);
        }
    };
    for sub in subformulas(f) {
        push(sub.clone(), &mut seen, &mut out);
        push(build::not(sub), &mut seen, &mut out);
    }
    push(build::top(), &mut seen, &mut out);
    push(build::bot(), &mut seen, &mut out);
    out
}

/// The agents, groups, skills and atoms a formula mentions. Groups follow
/// the designated-agent convention: every group written in the formula plus
/// the singleton `{a}` for each agent that occurs anywhere (modality index,
/// group member, learner or source).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub agents: BTreeSet<AgentId>,
    pub groups: BTreeSet<Group>,
    pub skills: BTreeSet<SkillId>,
    pub props: BTreeSet<PropId>,
}

pub fn vocabulary(f: &Fm) -> Vocabulary {
    let mut v = Vocabulary::default();
    fn walk(f: &Formula, v: &mut Vocabulary) {
        use Formula::*;
        match f {
            Atom(p) => {
                v.props.insert(*p);
            }
            Top | Bot => {}
            Not(_) | Implies(..) | And(..) | Or(..) | Iff(..) | Univ(_) => {}
            K(a, _) | BoxPlus(a, _) | BoxMinus(a, _) | BoxAny(a, _) => {
                v.agents.insert(*a);
            }
            C(g, _) | D(g, _) | E(g, _) | F(g, _) => {
                v.groups.insert(g.clone());
                v.agents.extend(g.members().iter().copied());
            }
            Up(a, s, _) | Down(a, s, _) | SetTo(a, s, _) => {
                v.agents.insert(*a);
                v.skills.extend(s.support());
            }
            Learn(l, s, _) => {
                v.agents.insert(*l);
                v.agents.insert(*s);
            }
        }
        for ch in f.children() {
            walk(ch, v);
        }
    }
    walk(f, &mut v);
    for a in v.agents.clone() {
        v.groups.insert(Group::singleton(a));
    }
    v
}

/// Maximum nesting of modalities (K/C/D/E/F, updates, quantifiers, U).
pub fn modal_depth(f: &Formula) -> usize {
    use Formula::*;
    let inner = f
        .children()
        .iter()
        .map(|c| modal_depth(c))
        .max()
        .unwrap_or(0);
    match f {
        Atom(_) | Top | Bot | Not(_) | Implies(..) | And(..) | Or(..) | Iff(..) => inner,
        _ => inner + 1,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeReKind {
    DeDicto,
    ImplicitDeRe,
    ExplicitDeRe,
}

#[derive(Debug, thiserror::Error)]
#[error("the helper agent {0} already occurs in the formula")]
pub struct FreshAgentClash(pub AgentId);

/// Builds the de dicto / implicit de re / explicit de re schema for upskilling:
/// de dicto is `K_a ~bp_a~ f`, implicit de re is `~bp_a~ K_a f`, and explicit
/// de re is `(≡_a)_c ~bp_c~ K_a (≡_c)_a f` for a helper agent `c` that must
/// not occur in `f`.
pub fn build_de_re_de_dicto(
    kind: DeReKind,
    a: AgentId,
    fresh: AgentId,
    f: Fm,
) -> Result<Fm, FreshAgentClash> {
    use build::*;
    match kind {
        DeReKind::DeDicto => Ok(k(a, dp(a, f))),
        DeReKind::ImplicitDeRe => Ok(dp(a, k(a, f))),
        DeReKind::ExplicitDeRe => {
            if vocabulary(&f).agents.contains(&fresh) {
                return Err(FreshAgentClash(fresh));
            }
            Ok(learn(fresh, a, dp(fresh, k(a, learn(a, fresh, f)))))
        }
    }
}

fn write_operand(out: &mut String, s: &SkillValue) {
    match s {
        SkillValue::Classical(set) => {
            out.push('{');
            for (i, sk) in set.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(sk.as_str());
            }
            out.push('}');
        }
        SkillValue::Fuzzy(m) => {
            out.push('{');
            for (i, (sk, mu)) in m.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(sk.as_str());
                out.push(':');
                out.push_str(&crate::skill::membership_to_string(mu));
            }
            out.push('}');
        }
        SkillValue::Lattice(e) => out.push_str(e.name()),
        SkillValue::Full => out.push_str("full"),
    }
}

fn write_formula(out: &mut String, f: &Formula) {
    use Formula::*;
    match f {
        Atom(p) => out.push_str(p.as_str()),
        Top => out.push_str("true"),
        Bot => out.push_str("false"),
        Not(g) => {
            out.push('~');
            write_formula(out, g);
        }
        Implies(a, b) | And(a, b) | Or(a, b) | Iff(a, b) => {
            let op = match f {
                Implies(..) => "->",
                And(..) => "&",
                Or(..) => "|",
                _ => "<->",
            };
            out.push('(');
            write_formula(out, a);
            out.push(' ');
            out.push_str(op);
            out.push(' ');
            write_formula(out, b);
            out.push(')');
        }
        K(a, g) => {
            out.push_str("K[");
            out.push_str(a.as_str());
            out.push_str("] ");
            write_formula(out, g);
        }
        C(gr, g) | D(gr, g) | E(gr, g) | F(gr, g) => {
            out.push(match f {
                C(..) => 'C',
                D(..) => 'D',
                E(..) => 'E',
                _ => 'F',
            });
            out.push('[');
            out.push_str(&gr.to_string());
            out.push_str("] ");
            write_formula(out, g);
        }
        Up(a, s, g) | Down(a, s, g) | SetTo(a, s, g) => {
            out.push_str(match f {
                Up(..) => "up[",
                Down(..) => "down[",
                _ => "set[",
            });
            out.push_str(a.as_str());
            out.push(';');
            write_operand(out, s);
            out.push_str("] ");
            write_formula(out, g);
        }
        Learn(l, s, g) => {
            out.push_str("learn[");
            out.push_str(l.as_str());
            out.push(';');
            out.push_str(s.as_str());
            out.push_str("] ");
            write_formula(out, g);
        }
        BoxPlus(a, g) | BoxMinus(a, g) | BoxAny(a, g) => {
            out.push_str(match f {
                BoxPlus(..) => "bp[",
                BoxMinus(..) => "bm[",
                _ => "ba[",
            });
            out.push_str(a.as_str());
            out.push_str("] ");
            write_formula(out, g);
        }
        Univ(g) => {
            out.push_str("A ");
            write_formula(out, g);
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_formula(&mut s, self);
        f.write_str(&s)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;
    use crate::ids::AgentId;

    fn g(names: &[&str]) -> Group {
        Group::new(names.iter().map(|n| AgentId::new(n))).unwrap()
    }

    #[test]
    fn length_convention_examples() {
        assert_eq!(length(&atom("p")), 1);
        assert_eq!(length(&k(AgentId::new("a"), atom("p"))), 3);
        let f = parse("(p -> C[a,b,c] q)").unwrap();
        assert_eq!(length(&f), 13);
        // update clauses: |(+_S)_a ψ| = 2|S| + |ψ| + 5
        let f = parse("up[a;{s1,s2}] p").unwrap();
        assert_eq!(length(&f), 2 * 2 + 1 + 5);
        assert_eq!(length(&parse("learn[a;b] p").unwrap()), 6);
        assert_eq!(length(&parse("bp[a] p").unwrap()), 3);
        assert_eq!(length(&parse("A p").unwrap()), 2);
        assert_eq!(length(&parse("true").unwrap()), 1);
    }

    #[test]
    fn length_matches_desugared_form() {
        for txt in [
            "(p & q)",
            "(p | q)",
            "(p <-> q)",
            "((p & q) | ~r)",
            "K[a] (p <-> (q & r))",
        ] {
            let f = parse(txt).unwrap();
            assert_eq!(length(&f), length(&desugar(&f)), "{}", txt);
        }
    }

    #[test]
    fn closure_contents() {
        let p = atom("p");
        let cl = closure(&p);
        assert_eq!(cl.len(), 4); // p, ~p, true, false
        assert!(cl.contains(&p));
        assert!(cl.contains(&not(p.clone())));
        assert!(cl.contains(&top()));
        assert!(cl.contains(&bot()));

        let f = k(AgentId::new("a"), atom("p"));
        let cl = closure(&f);
        assert_eq!(cl.len(), 6);
        assert!(cl.contains(&f));
        assert!(cl.contains(&not(f.clone())));

        // size bound: |closure| <= 2 * #subformulas + 2
        let f = parse("(K[a] p -> D[a,b] (q & p))").unwrap();
        assert!(closure(&f).len() <= 2 * subformulas(&f).len() + 2);
        // closed under subformulas and single negation
        for g in closure(&f) {
            for sub in g.children() {
                let cl = closure(&f);
                if !matches!(**sub, Formula::Not(_)) {
                    assert!(cl.contains(sub));
                }
            }
        }
    }

    #[test]
    fn vocabulary_convention() {
        let f = k(AgentId::new("a"), d(g(&["a", "b"]), atom("p")));
        let v = vocabulary(&f);
        assert_eq!(
            v.agents,
            [AgentId::new("a"), AgentId::new("b")].into_iter().collect()
        );
        assert!(v.groups.contains(&g(&["a", "b"])));
        assert!(v.groups.contains(&g(&["a"])));
        assert!(v.groups.contains(&g(&["b"])));
        assert_eq!(v.groups.len(), 3);

        let v = vocabulary(&atom("p"));
        assert!(v.agents.is_empty() && v.groups.is_empty() && v.skills.is_empty());
        assert_eq!(v.props.len(), 1);

        let f = parse("up[a;{s1}] p").unwrap();
        let v = vocabulary(&f);
        assert_eq!(v.skills, [SkillId::new("s1")].into_iter().collect());

        let v = vocabulary(&parse("learn[x;y] p").unwrap());
        assert!(v.agents.contains(&AgentId::new("x")) && v.agents.contains(&AgentId::new("y")));
    }

    #[test]
    fn modal_depth_counts_all_modalities() {
        assert_eq!(modal_depth(&atom("p")), 0);
        assert_eq!(modal_depth(&parse("K[a] p").unwrap()), 1);
        assert_eq!(modal_depth(&parse("K[a] C[a] p").unwrap()), 2);
        assert_eq!(modal_depth(&parse("up[a;{s}] (K[a] p & bp[b] q)").unwrap()), 2);
        assert_eq!(modal_depth(&parse("up[a;{s}] K[a] bp[b] q").unwrap()), 3);
    }

    #[test]
    fn de_re_de_dicto_shapes() {
        let a = AgentId::new("a");
        let c = AgentId::new("cfresh");
        let p4 = atom("p4");

        let dicto = build_de_re_de_dicto(DeReKind::DeDicto, a, c, p4.clone()).unwrap();
        assert_eq!(dicto.to_string(), "K[a] ~bp[a] ~p4");

        let imp = build_de_re_de_dicto(DeReKind::ImplicitDeRe, a, c, k(a, p4.clone())).unwrap();
        assert_eq!(imp.to_string(), "~bp[a] ~K[a] K[a] p4");

        let exp = build_de_re_de_dicto(DeReKind::ExplicitDeRe, a, c, p4.clone()).unwrap();
        assert_eq!(
            exp.to_string(),
            "learn[cfresh;a] ~bp[cfresh] ~K[a] learn[a;cfresh] p4"
        );

        // the helper agent must be fresh
        let clash = build_de_re_de_dicto(DeReKind::ExplicitDeRe, a, a, k(a, p4)).err();
        assert!(clash.is_some());
    }
}
