//! Classical Kripke models and the target-logic satisfaction relations the
//! rewritings are checked against: plain multi-agent K with distributed
//! knowledge (`KDn`), two-agent S5 with common knowledge (`S5C2`), and
//! bimodal K with the universal modality (`KU2`).
//!
//! The evaluation clauses are shared; the semantics flag selects which
//! frame conditions are validated before checking (S5 requires every
//! relation to be an equivalence relation).

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};
use thiserror::Error;

use crate::ids::{AgentId, PropId, WorldId};
use crate::syntax::{Fm, Formula};

#[derive(Debug, Error)]
pub enum KripkeError {
    #[error("kripke model has no worlds")]
    NoWorlds,
    #[error("duplicate world {0}")]
    DuplicateWorld(WorldId),
    #[error("unknown world {0}")]
    UnknownWorld(WorldId),
    #[error("bad kripke JSON: {0}")]
    Json(String),
    #[error("relation of {0} is not an equivalence relation, required by S5")]
    NotEquivalence(AgentId),
    #[error("operator {0} has no classical Kripke reading here")]
    Unsupported(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KripkeSemantics {
    /// Multi-agent K with distributed knowledge as relation intersection.
    KDn,
    /// Two-agent S5 with common knowledge; relations must be equivalences.
    S5C2,
    /// K with the universal modality.
    KU2,
}

/// A Kripke model: per-agent binary relations plus a valuation. Relations
/// are directed; nothing beyond domain closure is enforced at build time.
#[derive(Debug, Clone)]
pub struct KripkeModel {
    worlds: Vec<WorldId>,
    index: BTreeMap<WorldId, u32>,
    relations: BTreeMap<AgentId, BTreeSet<(u32, u32)>>,
    valuation: Vec<BTreeSet<PropId>>,
}

impl KripkeModel {
    pub fn new(
        worlds: Vec<WorldId>,
        relations: BTreeMap<AgentId, BTreeSet<(WorldId, WorldId)>>,
        valuation: BTreeMap<WorldId, BTreeSet<PropId>>,
    ) -> Result<KripkeModel, KripkeError> {
        if worlds.is_empty() {
            return Err(KripkeError::NoWorlds);
        }
        let mut index = BTreeMap::new();
        for (i, w) in worlds.iter().enumerate() {
            if index.insert(*w, i as u32).is_some() {
                return Err(KripkeError::DuplicateWorld(*w));
            }
        }
        let mut rel = BTreeMap::new();
        for (a, pairs) in relations {
            let mut set = BTreeSet::new();
            for (x, y) in pairs {
                let i = *index.get(&x).ok_or(KripkeError::UnknownWorld(x))?;
                let j = *index.get(&y).ok_or(KripkeError::UnknownWorld(y))?;
                set.insert((i, j));
            }
            rel.insert(a, set);
        }
        let mut val = vec![BTreeSet::new(); worlds.len()];
        for (w, props) in valuation {
            let i = *index.get(&w).ok_or(KripkeError::UnknownWorld(w))?;
            val[i as usize] = props;
        }
        Ok(KripkeModel {
            worlds,
            index,
            relations: rel,
            valuation: val,
        })
    }

    pub fn worlds(&self) -> &[WorldId] {
        &self.worlds
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn world_index(&self, w: WorldId) -> Option<u32> {
        self.index.get(&w).copied()
    }

    pub fn world_name(&self, i: u32) -> WorldId {
        self.worlds[i as usize]
    }

    pub fn relation(&self, a: AgentId) -> BTreeSet<(u32, u32)> {
        self.relations.get(&a).cloned().unwrap_or_default()
    }

    pub fn agents(&self) -> impl Iterator<Item = &AgentId> {
        self.relations.keys()
    }

    pub fn relation_pairs(&self, a: AgentId) -> Vec<(WorldId, WorldId)> {
        self.relation(a)
            .iter()
            .map(|(i, j)| (self.world_name(*i), self.world_name(*j)))
            .collect()
    }

    pub fn valuation(&self, i: u32) -> &BTreeSet<PropId> {
        &self.valuation[i as usize]
    }

    pub fn holds(&self, i: u32, p: PropId) -> bool {
        self.valuation[i as usize].contains(&p)
    }

    pub fn is_symmetric(&self, a: AgentId) -> bool {
        let r = self.relation(a);
        r.iter().all(|(i, j)| r.contains(&(*j, *i)))
    }

    pub fn is_equivalence(&self, a: AgentId) -> bool {
        let r = self.relation(a);
        let n = self.world_count() as u32;
        (0..n).all(|i| r.contains(&(i, i)))
            && r.iter().all(|(i, j)| r.contains(&(*j, *i)))
            && r.iter().all(|(i, j)| {
                r.iter()
                    .filter(|(j2, _)| j2 == j)
                    .all(|(_, k)| r.contains(&(*i, *k)))
            })
    }

    /// Replaces every relation by its reflexive-transitive closure.
    pub fn reflexive_transitive_closure(&self) -> KripkeModel {
        let n = self.world_count();
        let mut out = self.clone();
        for rel in out.relations.values_mut() {
            let mut mat = vec![false; n * n];
            for (i, j) in rel.iter() {
                mat[*i as usize * n + *j as usize] = true;
            }
            for i in 0..n {
                mat[i * n + i] = true;
            }
            for k in 0..n {
                for i in 0..n {
                    if mat[i * n + k] {
                        for j in 0..n {
                            if mat[k * n + j] {
                                mat[i * n + j] = true;
                            }
                        }
                    }
                }
            }
            *rel = (0..n as u32)
                .flat_map(|i| (0..n as u32).map(move |j| (i, j)))
                .filter(|(i, j)| mat[*i as usize * n + *j as usize])
                .collect();
        }
        out
    }

    pub fn from_json_str(text: &str) -> Result<KripkeModel, KripkeError> {
        let v: Value = serde_json::from_str(text).map_err(|e| KripkeError::Json(e.to_string()))?;
        let worlds: Vec<WorldId> = v["worlds"]
            .as_array()
            .ok_or_else(|| KripkeError::Json("missing worlds".into()))?
            .iter()
            .map(|w| {
                w.as_str()
                    .map(WorldId::new)
                    .ok_or_else(|| KripkeError::Json("bad world".into()))
            })
            .collect::<Result<_, _>>()?;
        let mut relations = BTreeMap::new();
        if let Some(rels) = v.get("relations").and_then(Value::as_object) {
            for (agent, pairs) in rels {
                let pairs = pairs
                    .as_array()
                    .ok_or_else(|| KripkeError::Json("relations: expected arrays".into()))?;
                let mut set = BTreeSet::new();
                for p in pairs {
                    let p = p
                        .as_array()
                        .filter(|a| a.len() == 2)
                        .ok_or_else(|| KripkeError::Json("relations: expected pairs".into()))?;
                    let (x, y) = (
                        p[0].as_str()
                            .ok_or_else(|| KripkeError::Json("relations: bad world".into()))?,
                        p[1].as_str()
                            .ok_or_else(|| KripkeError::Json("relations: bad world".into()))?,
                    );
                    set.insert((WorldId::new(x), WorldId::new(y)));
                }
                relations.insert(AgentId::new(agent), set);
            }
        }
        let mut valuation = BTreeMap::new();
        if let Some(vals) = v.get("valuation").and_then(Value::as_object) {
            for (world, props) in vals {
                let props = props
                    .as_array()
                    .ok_or_else(|| KripkeError::Json("valuation: expected arrays".into()))?
                    .iter()
                    .map(|p| {
                        p.as_str()
                            .map(PropId::new)
                            .ok_or_else(|| KripkeError::Json("valuation: bad prop".into()))
                    })
                    .collect::<Result<BTreeSet<_>, _>>()?;
                valuation.insert(WorldId::new(world), props);
            }
        }
        KripkeModel::new(worlds, relations, valuation)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "worlds": self.worlds.iter().map(|w| w.as_str()).collect::<Vec<_>>(),
            "relations": self.relations.iter().map(|(a, rel)| {
                (a.as_str().to_owned(), json!(rel.iter()
                    .map(|(i, j)| json!([self.world_name(*i).as_str(), self.world_name(*j).as_str()]))
                    .collect::<Vec<_>>()))
            }).collect::<serde_json::Map<_, _>>(),
            "valuation": self.worlds.iter().enumerate().map(|(i, w)| {
                (w.as_str().to_owned(), json!(self.valuation[i].iter().map(|p| p.as_str()).collect::<Vec<_>>()))
            }).collect::<serde_json::Map<_, _>>(),
        })
    }
}

/// Standard Kripke truth: `K_a` over the relation, `D_G` over the
/// intersection, `E_G` pointwise, `C_G` along nonempty classical G-paths,
/// `U` over all worlds. Field knowledge, updates and quantifiers have no
/// classical reading and are rejected.
pub fn kripke_check(
    n: &KripkeModel,
    w: WorldId,
    f: &Fm,
    semantics: KripkeSemantics,
) -> Result<bool, KripkeError> {
    if semantics == KripkeSemantics::S5C2 {
        for a in n.relations.keys() {
            if !n.is_equivalence(*a) {
                return Err(KripkeError::NotEquivalence(*a));
            }
        }
    }
    let world = n.world_index(w).ok_or(KripkeError::UnknownWorld(w))?;
    let mut memo = std::collections::HashMap::new();
    eval(n, world, f, &mut memo)
}

/// Truth per (subformula, world), memoized by node address: rewritten
/// formulas share subtrees (conjunct towers repeat one body), and without
/// the cache those towers cost exponential time.
type Memo = std::collections::HashMap<(usize, u32), bool>;

fn eval(n: &KripkeModel, w: u32, f: &Fm, memo: &mut Memo) -> Result<bool, KripkeError> {
    use Formula::*;
    let key = (std::sync::Arc::as_ptr(f) as usize, w);
    if let Some(&v) = memo.get(&key) {
        return Ok(v);
    }
    let result = match &**f {
        Atom(p) => n.holds(w, *p),
        Top => true,
        Bot => false,
        Not(g) => !eval(n, w, g, memo)?,
        Implies(a, b) => !eval(n, w, a, memo)? || eval(n, w, b, memo)?,
        And(a, b) => eval(n, w, a, memo)? && eval(n, w, b, memo)?,
        Or(a, b) => eval(n, w, a, memo)? || eval(n, w, b, memo)?,
        Iff(a, b) => eval(n, w, a, memo)? == eval(n, w, b, memo)?,
        K(a, g) => {
            let rel = n.relation(*a);
            let mut ok = true;
            for u in 0..n.world_count() as u32 {
                if rel.contains(&(w, u)) && !eval(n, u, g, memo)? {
                    ok = false;
                    break;
                }
            }
            ok
        }
        E(gr, g) => {
            let mut ok = true;
            'outer: for a in gr.members() {
                let rel = n.relation(*a);
                for u in 0..n.world_count() as u32 {
                    if rel.contains(&(w, u)) && !eval(n, u, g, memo)? {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            ok
        }
        D(gr, g) => {
            let mut ok = true;
            for u in 0..n.world_count() as u32 {
                let in_all = gr.members().iter().all(|a| n.relation(*a).contains(&(w, u)));
                if in_all && !eval(n, u, g, memo)? {
                    ok = false;
                    break;
                }
            }
            ok
        }
        C(gr, g) => {
            // at-least-one-step reachability through the union relation
            let union: BTreeSet<(u32, u32)> = gr
                .members()
                .iter()
                .flat_map(|a| n.relation(*a).into_iter())
                .collect();
            let mut reached = BTreeSet::new();
            let mut frontier: Vec<u32> = union
                .iter()
                .filter(|(x, _)| *x == w)
                .map(|(_, y)| *y)
                .collect();
            while let Some(u) = frontier.pop() {
                if reached.insert(u) {
                    frontier.extend(union.iter().filter(|(x, _)| *x == u).map(|(_, y)| *y));
                }
            }
            let mut ok = true;
            for u in reached {
                if !eval(n, u, g, memo)? {
                    ok = false;
                    break;
                }
            }
            ok
        }
        Univ(g) => {
            let mut ok = true;
            for u in 0..n.world_count() as u32 {
                if !eval(n, u, g, memo)? {
                    ok = false;
                    break;
                }
            }
            ok
        }
        F(..) => return Err(KripkeError::Unsupported("F")),
        Up(..) | Down(..) | SetTo(..) | Learn(..) => {
            return Err(KripkeError::Unsupported("update modality"))
        }
        BoxPlus(..) | BoxMinus(..) | BoxAny(..) => {
            return Err(KripkeError::Unsupported("quantifier"))
        }
    };
    memo.insert(key, result);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::Group;
    use crate::syntax::{build::*, parse};

    fn w(s: &str) -> WorldId {
        WorldId::new(s)
    }

    fn two_world(rel_a: &[(&str, &str)], p_at: &[&str]) -> KripkeModel {
        KripkeModel::new(
            vec![w("w1"), w("w2")],
            [(
                AgentId::new("a"),
                rel_a
                    .iter()
                    .map(|(x, y)| (w(x), w(y)))
                    .collect::<BTreeSet<_>>(),
            )]
            .into_iter()
            .collect(),
            [
                (w("w1"), p_at.contains(&"w1").then(|| PropId::new("p")).into_iter().collect()),
                (w("w2"), p_at.contains(&"w2").then(|| PropId::new("p")).into_iter().collect()),
            ]
            .into_iter()
            .collect(),
        )
        .unwrap()
    }

    #[test]
    fn empty_relation_gives_vacuous_knowledge() {
        let n = two_world(&[], &[]);
        assert!(kripke_check(&n, w("w1"), &parse("K[a] false").unwrap(), KripkeSemantics::KDn)
            .unwrap());
    }

    #[test]
    fn distributed_is_intersection() {
        // disjoint relations make D vacuously true
        let n = KripkeModel::new(
            vec![w("w1"), w("w2")],
            [
                (AgentId::new("a"), [(w("w1"), w("w2"))].into_iter().collect()),
                (AgentId::new("b"), BTreeSet::new()),
            ]
            .into_iter()
            .collect(),
            BTreeMap::new(),
        )
        .unwrap();
        assert!(kripke_check(&n, w("w1"), &parse("D[a,b] false").unwrap(), KripkeSemantics::KDn)
            .unwrap());
        assert!(!kripke_check(&n, w("w1"), &parse("K[a] false").unwrap(), KripkeSemantics::KDn)
            .unwrap());
    }

    #[test]
    fn s5_requires_equivalence_and_c_walks_paths() {
        // 2-world S5 model where p fails at the other world
        let full: BTreeSet<(WorldId, WorldId)> = [
            (w("w1"), w("w1")),
            (w("w2"), w("w2")),
            (w("w1"), w("w2")),
            (w("w2"), w("w1")),
        ]
        .into_iter()
        .collect();
        let n = KripkeModel::new(
            vec![w("w1"), w("w2")],
            [(AgentId::new("a"), full)].into_iter().collect(),
            [(w("w1"), [PropId::new("p")].into_iter().collect())]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let g = Group::new([AgentId::new("a")]).unwrap();
        let f = c(g, atom("p"));
        assert!(!kripke_check(&n, w("w1"), &f, KripkeSemantics::S5C2).unwrap());

        // non-equivalence relations are rejected under the S5 flag
        let bad = two_world(&[("w1", "w2")], &[]);
        assert!(matches!(
            kripke_check(&bad, w("w1"), &parse("K[a] p").unwrap(), KripkeSemantics::S5C2),
            Err(KripkeError::NotEquivalence(_))
        ));
        // but fine under KDn
        assert!(kripke_check(&bad, w("w2"), &parse("K[a] p").unwrap(), KripkeSemantics::KDn)
            .unwrap());
    }

    #[test]
    fn c_needs_at_least_one_step() {
        // irreflexive relation: C_a false does not force p at the start
        let n = two_world(&[("w1", "w2")], &["w1"]);
        let g = Group::new([AgentId::new("a")]).unwrap();
        // from w1 only w2 is reachable; p fails there
        assert!(!kripke_check(&n, w("w1"), &c(g.clone(), atom("p")), KripkeSemantics::KDn).unwrap());
        // from w2 nothing is reachable at all
        assert!(kripke_check(&n, w("w2"), &c(g, atom("p")), KripkeSemantics::KDn).unwrap());
    }

    #[test]
    fn universal_modality() {
        let n = two_world(&[], &["w1"]);
        assert!(!kripke_check(&n, w("w1"), &parse("A p").unwrap(), KripkeSemantics::KU2).unwrap());
        assert!(kripke_check(&n, w("w1"), &parse("A (p | ~p)").unwrap(), KripkeSemantics::KU2)
            .unwrap());
    }

    #[test]
    fn closure_produces_equivalences_from_symmetric_relations() {
        let n = two_world(&[("w1", "w2"), ("w2", "w1")], &[]);
        let closed = n.reflexive_transitive_closure();
        assert!(closed.is_equivalence(AgentId::new("a")));
        // closure is a superset of the original relation
        assert!(n.relation(AgentId::new("a")).is_subset(&closed.relation(AgentId::new("a"))));
    }

    #[test]
    fn json_round_trip() {
        let n = two_world(&[("w1", "w2")], &["w2"]);
        let n2 = KripkeModel::from_json_str(&n.to_json().to_string()).unwrap();
        assert_eq!(n.to_json(), n2.to_json());
    }
}
