//! Propositional dynamic logic with a distinguished universe program:
//! formulas `[pi] phi` over programs built from atomic agents by
//! composition, union, iteration, tests and `univ`. Models are plain
//! Kripke models; composite program relations are derived on demand and
//! `pi*` is the reflexive-transitive closure over the finite world set.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::ids::{AgentId, PropId, WorldId};
use crate::reductions::kripke::{KripkeError, KripkeModel};

pub type Cf = Arc<CpdlFormula>;
pub type Pr = Arc<Program>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CpdlFormula {
    Atom(PropId),
    Top,
    Bot,
    Not(Cf),
    Implies(Cf, Cf),
    And(Cf, Cf),
    Box(Pr, Cf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Program {
    Atomic(AgentId),
    Seq(Pr, Pr),
    Union(Pr, Pr),
    Star(Pr),
    Test(Cf),
    Universe,
}

pub mod build {
    use super::*;

    pub fn atom(p: &str) -> Cf {
        Arc::new(CpdlFormula::Atom(PropId::new(p)))
    }
    pub fn top() -> Cf {
        Arc::new(CpdlFormula::Top)
    }
    pub fn bot() -> Cf {
        Arc::new(CpdlFormula::Bot)
    }
    pub fn not(f: Cf) -> Cf {
        Arc::new(CpdlFormula::Not(f))
    }
    pub fn implies(a: Cf, b: Cf) -> Cf {
        Arc::new(CpdlFormula::Implies(a, b))
    }
    pub fn and(a: Cf, b: Cf) -> Cf {
        Arc::new(CpdlFormula::And(a, b))
    }
    pub fn boxed(p: Pr, f: Cf) -> Cf {
        Arc::new(CpdlFormula::Box(p, f))
    }
    pub fn agent(a: AgentId) -> Pr {
        Arc::new(Program::Atomic(a))
    }
    pub fn seq(a: Pr, b: Pr) -> Pr {
        Arc::new(Program::Seq(a, b))
    }
    pub fn union(a: Pr, b: Pr) -> Pr {
        Arc::new(Program::Union(a, b))
    }
    pub fn star(p: Pr) -> Pr {
        Arc::new(Program::Star(p))
    }
    pub fn test(f: Cf) -> Pr {
        Arc::new(Program::Test(f))
    }
    pub fn universe() -> Pr {
        Arc::new(Program::Universe)
    }
}

/// Relation of a program over the model's worlds.
fn relation(
    n: &KripkeModel,
    p: &Program,
    memo: &mut Memo,
) -> Result<BTreeSet<(u32, u32)>, KripkeError> {
    let count = n.world_count() as u32;
    Ok(match p {
        Program::Atomic(a) => n.relation(*a),
        Program::Union(x, y) => {
            let mut r = relation(n, x, memo)?;
            r.extend(relation(n, y, memo)?);
            r
        }
        Program::Seq(x, y) => {
            let rx = relation(n, x, memo)?;
            let ry = relation(n, y, memo)?;
            let mut r = BTreeSet::new();
            for (i, j) in &rx {
                for (j2, k) in &ry {
                    if j == j2 {
                        r.insert((*i, *k));
                    }
                }
            }
            r
        }
        Program::Star(x) => {
            let rx = relation(n, x, memo)?;
            let nw = count as usize;
            let mut mat = vec![false; nw * nw];
            for (i, j) in rx {
                mat[i as usize * nw + j as usize] = true;
            }
            for i in 0..nw {
                mat[i * nw + i] = true;
            }
            for k in 0..nw {
                for i in 0..nw {
                    if mat[i * nw + k] {
                        for j in 0..nw {
                            if mat[k * nw + j] {
                                mat[i * nw + j] = true;
                            }
                        }
                    }
                }
            }
            (0..count)
                .flat_map(|i| (0..count).map(move |j| (i, j)))
                .filter(|(i, j)| mat[*i as usize * nw + *j as usize])
                .collect()
        }
        Program::Test(f) => {
            let mut r = BTreeSet::new();
            for u in 0..count {
                if eval_memo(n, u, f, memo)? {
                    r.insert((u, u));
                }
            }
            r
        }
        Program::Universe => (0..count)
            .flat_map(|i| (0..count).map(move |j| (i, j)))
            .collect(),
    })
}

type Memo = std::collections::HashMap<(usize, u32), bool>;

fn eval_memo(n: &KripkeModel, w: u32, f: &Cf, memo: &mut Memo) -> Result<bool, KripkeError> {
    let key = (Arc::as_ptr(f) as usize, w);
    if let Some(&v) = memo.get(&key) {
        return Ok(v);
    }
    let result = eval_node(n, w, f, memo)?;
    memo.insert(key, result);
    Ok(result)
}

fn eval_node(n: &KripkeModel, w: u32, f: &CpdlFormula, memo: &mut Memo) -> Result<bool, KripkeError> {
    use CpdlFormula::*;
    Ok(match f {
        Atom(p) => n.holds(w, *p),
        Top => true,
        Bot => false,
        Not(g) => !eval_memo(n, w, g, memo)?,
        Implies(a, b) => !eval_memo(n, w, a, memo)? || eval_memo(n, w, b, memo)?,
        And(a, b) => eval_memo(n, w, a, memo)? && eval_memo(n, w, b, memo)?,
        Box(p, g) => {
            let rel = relation(n, p, memo)?;
            for (x, y) in rel {
                if x == w && !eval_memo(n, y, g, memo)? {
                    return Ok(false);
                }
            }
            true
        }
    })
}

/// PDL truth at a world: atomic relations come from the model, composites
/// are derived per the program constructors.
pub fn cpdl_check(n: &KripkeModel, w: WorldId, f: &Cf) -> Result<bool, KripkeError> {
    let world = n.world_index(w).ok_or(KripkeError::UnknownWorld(w))?;
    let mut memo = Memo::new();
    eval_memo(n, world, f, &mut memo)
}

impl fmt::Display for CpdlFormula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CpdlFormula::Atom(p) => write!(out, "{}", p),
            CpdlFormula::Top => write!(out, "true"),
            CpdlFormula::Bot => write!(out, "false"),
            CpdlFormula::Not(g) => write!(out, "~{}", g),
            CpdlFormula::Implies(a, b) => write!(out, "({} -> {})", a, b),
            CpdlFormula::And(a, b) => write!(out, "({} & {})", a, b),
            CpdlFormula::Box(p, g) => write!(out, "[{}] {}", p, g),
        }
    }
}

impl Program {
    fn is_composite(&self) -> bool {
        matches!(self, Program::Seq(..) | Program::Union(..))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paren = |p: &Program, out: &mut fmt::Formatter<'_>| -> fmt::Result {
            if p.is_composite() {
                write!(out, "({})", p)
            } else {
                write!(out, "{}", p)
            }
        };
        match self {
            Program::Atomic(a) => write!(out, "{}", a),
            Program::Seq(a, b) => {
                paren(a, out)?;
                write!(out, ";")?;
                paren(b, out)
            }
            Program::Union(a, b) => {
                paren(a, out)?;
                write!(out, "+")?;
                paren(b, out)
            }
            Program::Star(p) => {
                paren(p, out)?;
                write!(out, "*")
            }
            Program::Test(f) => write!(out, "?{}", f),
            Program::Universe => write!(out, "univ"),
        }
    }
}

/// Symbol count for a PDL formula, by analogy with the weighted length
/// convention; used only for size reports.
pub fn cpdl_length(f: &CpdlFormula) -> usize {
    use CpdlFormula::*;
    match f {
        Atom(_) | Top | Bot => 1,
        Not(g) => cpdl_length(g) + 1,
        Implies(a, b) => cpdl_length(a) + cpdl_length(b) + 3,
        And(a, b) => cpdl_length(a) + cpdl_length(b) + 5,
        Box(p, g) => program_length(p) + cpdl_length(g) + 2,
    }
}

fn program_length(p: &Program) -> usize {
    use Program::*;
    match p {
        Atomic(_) | Universe => 1,
        Seq(a, b) | Union(a, b) => program_length(a) + program_length(b) + 1,
        Star(a) => program_length(a) + 1,
        Test(f) => cpdl_length(f) + 1,
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn w(s: &str) -> WorldId {
        WorldId::new(s)
    }

    fn chain() -> KripkeModel {
        // w1 -a-> w2 -b-> w3, p at w3
        KripkeModel::new(
            vec![w("w1"), w("w2"), w("w3")],
            [
                (AgentId::new("a"), [(w("w1"), w("w2"))].into_iter().collect()),
                (AgentId::new("b"), [(w("w2"), w("w3"))].into_iter().collect()),
            ]
            .into_iter()
            .collect(),
            [(w("w3"), [PropId::new("p")].into_iter().collect())]
                .into_iter()
                .collect::<BTreeMap<_, _>>(),
        )
        .unwrap()
    }

    #[test]
    fn universe_box_top() {
        let n = chain();
        assert!(cpdl_check(&n, w("w1"), &boxed(universe(), top())).unwrap());
        assert!(!cpdl_check(&n, w("w1"), &boxed(universe(), atom("p"))).unwrap());
    }

    #[test]
    fn star_includes_reflexivity() {
        let n = chain();
        // [a*] p at w3: R(a) empty from w3, closure adds (w3,w3); p holds there
        let f = boxed(star(agent(AgentId::new("a"))), atom("p"));
        assert!(cpdl_check(&n, w("w3"), &f).unwrap());
        assert!(!cpdl_check(&n, w("w1"), &f).unwrap());
    }

    #[test]
    fn seq_equals_nested_boxes() {
        let n = chain();
        let a = AgentId::new("a");
        let b = AgentId::new("b");
        for world in ["w1", "w2", "w3"] {
            let seq_form = boxed(seq(agent(a), agent(b)), atom("p"));
            let nested = boxed(agent(a), boxed(agent(b), atom("p")));
            assert_eq!(
                cpdl_check(&n, w(world), &seq_form).unwrap(),
                cpdl_check(&n, w(world), &nested).unwrap()
            );
        }
    }

    #[test]
    fn test_program_filters() {
        let n = chain();
        // [?p] false holds exactly where p fails
        let f = boxed(test(atom("p")), bot());
        assert!(cpdl_check(&n, w("w1"), &f).unwrap());
        assert!(!cpdl_check(&n, w("w3"), &f).unwrap());
    }

    #[test]
    fn printing() {
        let a = AgentId::new("a");
        let b = AgentId::new("b");
        let f = boxed(
            seq(
                union(agent(a), agent(b)),
                star(union(agent(a), agent(b))),
            ),
            atom("p"),
        );
        assert_eq!(f.to_string(), "[(a+b);(a+b)*] p");
        assert_eq!(boxed(universe(), atom("p")).to_string(), "[univ] p");
        assert_eq!(boxed(test(atom("q")), atom("p")).to_string(), "[?q] p");
        assert_eq!(boxed(agent(a), atom("p")).to_string(), "[a] p");
    }

    #[test]
    fn composition_on_random_small_models() {
        // [x;y]p equals [x][y]p on a brute-force sweep of 2-world models
        let worlds = vec![w("u1"), w("u2")];
        let pairs: Vec<(WorldId, WorldId)> = worlds
            .iter()
            .flat_map(|x| worlds.iter().map(move |y| (*x, *y)))
            .collect();
        let a = AgentId::new("a");
        let b = AgentId::new("b");
        for ra_mask in 0u32..16 {
            for rb_mask in 0u32..16 {
                let rel = |mask: u32| -> BTreeSet<(WorldId, WorldId)> {
                    pairs
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, p)| *p)
                        .collect()
                };
                let n = KripkeModel::new(
                    worlds.clone(),
                    [(a, rel(ra_mask)), (b, rel(rb_mask))].into_iter().collect(),
                    [(w("u1"), [PropId::new("p")].into_iter().collect())]
                        .into_iter()
                        .collect::<BTreeMap<_, _>>(),
                )
                .unwrap();
                for world in &worlds {
                    let lhs = boxed(seq(agent(a), agent(b)), atom("p"));
                    let rhs = boxed(agent(a), boxed(agent(b), atom("p")));
                    assert_eq!(
                        cpdl_check(&n, *world, &lhs).unwrap(),
                        cpdl_check(&n, *world, &rhs).unwrap()
                    );
                }
            }
        }
    }
}
