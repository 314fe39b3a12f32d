//! The model-checking engine.
//!
//! Truth values are computed by a memoized recursion over (capability
//! overlay, subformula, world) triples. Update modalities only touch the
//! capability function, so overlays are interned capability maps layered
//! over a shared model core; quantifiers enumerate subsets of a finite
//! skill universe derived from the model's edge labels, the capabilities of
//! the agents the formula mentions, and the skills written in the formula,
//! plus one fresh skill standing in for everything outside.
//!
//! Common knowledge is evaluated through the per-group transitive closure
//! of the one-step indistinguishability relation (see [`group_closure`]);
//! `E_G` takes one step, `D_G` uses the join of the group's capabilities,
//! `F_G` the meet.

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::ids::{AgentId, Group, PropId, SkillId, WorldId};
use crate::model::{ModelError, Violation, WeightedModel};
use crate::skill::{self, Family, SkillError, SkillValue};
use crate::syntax::{Fm, Formula};

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("skill error: {0}")]
    Skill(#[from] SkillError),
    #[error("model is invalid: {0}")]
    InvalidModel(String),
    #[error("unknown world {0}")]
    UnknownWorld(WorldId),
    #[error("quantifiers are only defined over the classical family, not {0}")]
    QuantifierFamily(&'static str),
    #[error("quantifier universe has {0} skills; refusing to enumerate more than 2^{MAX_UNIVERSE}")]
    UniverseTooLarge(usize),
}

const MAX_UNIVERSE: usize = 20;

/// The set of worlds where a formula holds, with a digest of the model and
/// capability overlay it was computed against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthSet {
    /// Sorted world ids.
    pub worlds: Vec<WorldId>,
    pub model_fingerprint: String,
}

impl TruthSet {
    pub fn contains(&self, w: WorldId) -> bool {
        self.worlds.binary_search(&w).is_ok()
    }
}

/// The group-indistinguishability closure for the groups under `C`/`E` in a
/// formula: `e_phi` holds the one-step relation, `e_phi_plus` its per-group
/// transitive closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupClosure {
    pub e_phi: BTreeMap<(WorldId, WorldId), BTreeSet<Group>>,
    pub e_phi_plus: BTreeMap<(WorldId, WorldId), BTreeSet<Group>>,
}

impl GroupClosure {
    pub fn one_step(&self, w: WorldId, u: WorldId) -> BTreeSet<Group> {
        self.e_phi.get(&(w, u)).cloned().unwrap_or_default()
    }

    pub fn reaches(&self, g: &Group, w: WorldId, u: WorldId) -> bool {
        self.e_phi_plus
            .get(&(w, u))
            .is_some_and(|set| set.contains(g))
    }
}

#[derive(Clone, Debug)]
enum Node {
    Atom(PropId),
    Top,
    Bot,
    Not(u32),
    Implies(u32, u32),
    And(u32, u32),
    Or(u32, u32),
    Iff(u32, u32),
    K(AgentId, u32),
    C(Group, u32),
    D(Group, u32),
    E(Group, u32),
    F(Group, u32),
    Up(AgentId, SkillValue, u32),
    Down(AgentId, SkillValue, u32),
    SetTo(AgentId, SkillValue, u32),
    Learn(AgentId, AgentId, u32),
    BoxPlus(AgentId, u32),
    BoxMinus(AgentId, u32),
    BoxAny(AgentId, u32),
    Univ(u32),
}

/// Agents and syntactic skills occurring in a subformula; feeds the
/// quantifier universe.
#[derive(Clone, Debug, Default)]
struct NodeVocab {
    agents: BTreeSet<AgentId>,
    skills: BTreeSet<SkillId>,
}

type Caps = Arc<BTreeMap<AgentId, SkillValue>>;

/// A quantifier universe: the collected skills S1 and the extended S2.
type Universe = Arc<(Vec<SkillId>, Vec<SkillId>)>;

/// One checking session against a fixed model. All caches live here;
/// sessions are cheap to create and single-threaded.
pub struct Checker<'m> {
    model: &'m WeightedModel,
    nodes: Vec<Node>,
    vocab: Vec<NodeVocab>,
    node_ids: HashMap<Fm, u32>,
    overlays: Vec<Caps>,
    overlay_ids: HashMap<Caps, u32>,
    memo: HashMap<(u32, u32, u32), bool>,
    /// accessible-world lists per capability value (world-indexed)
    access: HashMap<SkillValue, Arc<Vec<Vec<u32>>>>,
    /// reachable-world sets per (overlay, group) for common knowledge
    reach: HashMap<(u32, Group), Arc<Vec<BTreeSet<u32>>>>,
    /// quantifier universes per (overlay, node)
    universes: HashMap<(u32, u32), Universe>,
    /// extra fresh skills appended to every quantifier universe (testing
    /// knob; enlarging the universe must not change any verdict)
    pub extra_fresh: usize,
}

impl<'m> Checker<'m> {
    /// Validates the model and opens a session on it.
    pub fn new(model: &'m WeightedModel) -> Result<Checker<'m>, CheckError> {
        let violations = model.validate();
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(Violation::to_string).collect();
            return Err(CheckError::InvalidModel(msgs.join("; ")));
        }
        let mut ck = Checker {
            model,
            nodes: Vec::new(),
            vocab: Vec::new(),
            node_ids: HashMap::new(),
            overlays: Vec::new(),
            overlay_ids: HashMap::new(),
            memo: HashMap::new(),
            access: HashMap::new(),
            reach: HashMap::new(),
            universes: HashMap::new(),
            extra_fresh: 0,
        };
        ck.intern_overlay(Arc::new(model.capabilities().clone()));
        Ok(ck)
    }

    pub fn model(&self) -> &WeightedModel {
        self.model
    }

    fn intern_overlay(&mut self, caps: Caps) -> u32 {
        if let Some(&id) = self.overlay_ids.get(&caps) {
            return id;
        }
        let id = self.overlays.len() as u32;
        self.overlays.push(Arc::clone(&caps));
        self.overlay_ids.insert(caps, id);
        id
    }

    fn intern(&mut self, f: &Fm) -> u32 {
        if let Some(&id) = self.node_ids.get(f) {
            return id;
        }
        use Formula::*;
        let (node, vocab) = match &**f {
            Atom(p) => (Node::Atom(*p), NodeVocab::default()),
            Top => (Node::Top, NodeVocab::default()),
            Bot => (Node::Bot, NodeVocab::default()),
            Not(a) => {
                let ia = self.intern(a);
                (Node::Not(ia), self.vocab[ia as usize].clone())
            }
            Implies(a, b) | And(a, b) | Or(a, b) | Iff(a, b) => {
                let ia = self.intern(a);
                let ib = self.intern(b);
                let mut v = self.vocab[ia as usize].clone();
                v.agents.extend(self.vocab[ib as usize].agents.iter());
                v.skills.extend(self.vocab[ib as usize].skills.iter());
                let node = match &**f {
                    Implies(..) => Node::Implies(ia, ib),
                    And(..) => Node::And(ia, ib),
                    Or(..) => Node::Or(ia, ib),
                    _ => Node::Iff(ia, ib),
                };
                (node, v)
            }
            K(a, g) => {
                let ig = self.intern(g);
                let mut v = self.vocab[ig as usize].clone();
                v.agents.insert(*a);
                (Node::K(*a, ig), v)
            }
            C(gr, g) | D(gr, g) | E(gr, g) | F(gr, g) => {
                let ig = self.intern(g);
                let mut v = self.vocab[ig as usize].clone();
                v.agents.extend(gr.members().iter().copied());
                let node = match &**f {
                    C(..) => Node::C(gr.clone(), ig),
                    D(..) => Node::D(gr.clone(), ig),
                    E(..) => Node::E(gr.clone(), ig),
                    _ => Node::F(gr.clone(), ig),
                };
                (node, v)
            }
            Up(a, s, g) | Down(a, s, g) | SetTo(a, s, g) => {
                let ig = self.intern(g);
                let mut v = self.vocab[ig as usize].clone();
                v.agents.insert(*a);
                v.skills.extend(s.support());
                let node = match &**f {
                    Up(..) => Node::Up(*a, s.clone(), ig),
                    Down(..) => Node::Down(*a, s.clone(), ig),
                    _ => Node::SetTo(*a, s.clone(), ig),
                };
                (node, v)
            }
            Learn(l, s, g) => {
                let ig = self.intern(g);
                let mut v = self.vocab[ig as usize].clone();
                v.agents.insert(*l);
                v.agents.insert(*s);
                (Node::Learn(*l, *s, ig), v)
            }
            BoxPlus(a, g) | BoxMinus(a, g) | BoxAny(a, g) => {
                let ig = self.intern(g);
                let mut v = self.vocab[ig as usize].clone();
                v.agents.insert(*a);
                let node = match &**f {
                    BoxPlus(..) => Node::BoxPlus(*a, ig),
                    BoxMinus(..) => Node::BoxMinus(*a, ig),
                    _ => Node::BoxAny(*a, ig),
                };
                (node, v)
            }
            Univ(g) => {
                let ig = self.intern(g);
                (Node::Univ(ig), self.vocab[ig as usize].clone())
            }
        };
        let id = self.nodes.len() as u32;
        self.nodes.push(node);
        self.vocab.push(vocab);
        self.node_ids.insert(f.clone(), id);
        id
    }

    fn cap_of(&self, overlay: u32, a: AgentId) -> SkillValue {
        self.overlays[overlay as usize]
            .get(&a)
            .cloned()
            .unwrap_or_else(|| self.model.family().bottom())
    }

    /// Worlds accessible under a concrete capability value, per world.
    fn access_by_value(&mut self, cap: &SkillValue) -> Result<Arc<Vec<Vec<u32>>>, CheckError> {
        if let Some(v) = self.access.get(cap) {
            return Ok(Arc::clone(v));
        }
        let n = self.model.world_count() as u32;
        let mut per_world = Vec::with_capacity(n as usize);
        for i in 0..n {
            let mut row = Vec::new();
            for j in 0..n {
                if skill::leq(cap, self.model.edge(i, j))? {
                    row.push(j);
                }
            }
            per_world.push(row);
        }
        let arc = Arc::new(per_world);
        self.access.insert(cap.clone(), Arc::clone(&arc));
        Ok(arc)
    }

    /// Reachable sets for a group: the transitive closure (paths of length
    /// at least one) of the union of the members' one-step relations.
    fn reachable(&mut self, overlay: u32, g: &Group) -> Result<Arc<Vec<BTreeSet<u32>>>, CheckError> {
        if let Some(v) = self.reach.get(&(overlay, g.clone())) {
            return Ok(Arc::clone(v));
        }
        let n = self.model.world_count();
        let mut one_step: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
        for a in g.members() {
            let cap = self.cap_of(overlay, *a);
            let acc = self.access_by_value(&cap)?;
            for (i, row) in acc.iter().enumerate() {
                one_step[i].extend(row.iter().copied());
            }
        }
        let mut reach: Vec<BTreeSet<u32>> = one_step.clone();
        // Iterate until stable; each round extends paths by one step.
        loop {
            let mut changed = false;
            for row in reach.iter_mut() {
                let mut add = Vec::new();
                for &j in row.iter() {
                    for &k in &one_step[j as usize] {
                        if !row.contains(&k) {
                            add.push(k);
                        }
                    }
                }
                if !add.is_empty() {
                    changed = true;
                    row.extend(add);
                }
            }
            if !changed {
                break;
            }
        }
        let arc = Arc::new(reach);
        self.reach.insert((overlay, g.clone()), Arc::clone(&arc));
        Ok(arc)
    }

    /// The finite quantifier universe at a node: S1 collects every finite
    /// edge label, the current capabilities of the agents the subformula
    /// mentions, and the skills written inside it; S2 adds fresh skills.
    fn universe(&mut self, overlay: u32, node: u32) -> Result<Universe, CheckError> {
        if let Some(u) = self.universes.get(&(overlay, node)) {
            return Ok(Arc::clone(u));
        }
        if !matches!(self.model.family(), Family::Classical) {
            return Err(CheckError::QuantifierFamily(self.model.family().name()));
        }
        let mut s1: BTreeSet<SkillId> = self.model.edge_label_skills();
        let v = &self.vocab[node as usize];
        s1.extend(v.skills.iter().copied());
        for a in v.agents.clone() {
            s1.extend(self.cap_of(overlay, a).support());
        }
        let mut s2: Vec<SkillId> = s1.iter().copied().collect();
        let declared: BTreeSet<SkillId> = self.model.skill_universe().iter().copied().collect();
        let mut counter = 0usize;
        for _ in 0..=self.extra_fresh {
            let fresh = loop {
                let name = if counter == 0 {
                    "fresh".to_owned()
                } else {
                    format!("fresh_{counter}")
                };
                counter += 1;
                let id = SkillId::new(&name);
                if !s1.contains(&id) && !declared.contains(&id) && !s2.contains(&id) {
                    break id;
                }
            };
            s2.push(fresh);
        }
        if s2.len() > MAX_UNIVERSE {
            return Err(CheckError::UniverseTooLarge(s2.len()));
        }
        let arc = Arc::new((s1.into_iter().collect::<Vec<_>>(), s2));
        self.universes.insert((overlay, node), Arc::clone(&arc));
        Ok(arc)
    }

    fn overlay_with(&mut self, overlay: u32, agent: AgentId, cap: SkillValue) -> u32 {
        let mut caps = (*self.overlays[overlay as usize]).clone();
        caps.insert(agent, cap);
        self.intern_overlay(Arc::new(caps))
    }

    fn eval(&mut self, overlay: u32, node: u32, world: u32) -> Result<bool, CheckError> {
        if let Some(&v) = self.memo.get(&(overlay, node, world)) {
            return Ok(v);
        }
        let result = match self.nodes[node as usize].clone() {
            Node::Atom(p) => self.model.holds(world, p),
            Node::Top => true,
            Node::Bot => false,
            Node::Not(a) => !self.eval(overlay, a, world)?,
            Node::Implies(a, b) => !self.eval(overlay, a, world)? || self.eval(overlay, b, world)?,
            Node::And(a, b) => self.eval(overlay, a, world)? && self.eval(overlay, b, world)?,
            Node::Or(a, b) => self.eval(overlay, a, world)? || self.eval(overlay, b, world)?,
            Node::Iff(a, b) => self.eval(overlay, a, world)? == self.eval(overlay, b, world)?,
            Node::K(a, g) => {
                let cap = self.cap_of(overlay, a);
                self.all_accessible(overlay, &cap, g, world)?
            }
            Node::E(gr, g) => {
                let mut ok = true;
                for a in gr.members() {
                    let cap = self.cap_of(overlay, *a);
                    if !self.all_accessible(overlay, &cap, g, world)? {
                        ok = false;
                        break;
                    }
                }
                ok
            }
            Node::D(gr, g) => {
                let mut cap = self.cap_of(overlay, gr.members()[0]);
                for a in &gr.members()[1..] {
                    cap = skill::join(&cap, &self.cap_of(overlay, *a))?;
                }
                self.all_accessible(overlay, &cap, g, world)?
            }
            Node::F(gr, g) => {
                let mut cap = self.cap_of(overlay, gr.members()[0]);
                for a in &gr.members()[1..] {
                    cap = skill::meet(&cap, &self.cap_of(overlay, *a))?;
                }
                self.all_accessible(overlay, &cap, g, world)?
            }
            Node::C(gr, g) => {
                let reach = self.reachable(overlay, &gr)?;
                let targets: Vec<u32> = reach[world as usize].iter().copied().collect();
                let mut ok = true;
                for u in targets {
                    if !self.eval(overlay, g, u)? {
                        ok = false;
                        break;
                    }
                }
                ok
            }
            Node::Up(a, s, g) => {
                let lifted = self.model.lift_operand(&s)?;
                let cap = skill::join(&self.cap_of(overlay, a), &lifted)?;
                let ov = self.overlay_with(overlay, a, cap);
                self.eval(ov, g, world)?
            }
            Node::Down(a, s, g) => {
                let lifted = self.model.lift_operand(&s)?;
                let current = self.cap_of(overlay, a);
                let cap = match self.model.family() {
                    Family::Lattice(_) => skill::meet(&current, &lifted)?,
                    _ => skill::difference(&current, &lifted)?,
                };
                let ov = self.overlay_with(overlay, a, cap);
                self.eval(ov, g, world)?
            }
            Node::SetTo(a, s, g) => {
                let lifted = self.model.lift_operand(&s)?;
                let ov = self.overlay_with(overlay, a, lifted);
                self.eval(ov, g, world)?
            }
            Node::Learn(l, src, g) => {
                let cap = self.cap_of(overlay, src);
                let ov = self.overlay_with(overlay, l, cap);
                self.eval(ov, g, world)?
            }
            Node::BoxPlus(a, g) => self.eval_quantifier(overlay, node, a, g, world, Quant::Up)?,
            Node::BoxMinus(a, g) => self.eval_quantifier(overlay, node, a, g, world, Quant::Down)?,
            Node::BoxAny(a, g) => self.eval_quantifier(overlay, node, a, g, world, Quant::Set)?,
            Node::Univ(g) => {
                let mut ok = true;
                for u in 0..self.model.world_count() as u32 {
                    if !self.eval(overlay, g, u)? {
                        ok = false;
                        break;
                    }
                }
                ok
            }
        };
        self.memo.insert((overlay, node, world), result);
        Ok(result)
    }

    fn all_accessible(
        &mut self,
        overlay: u32,
        cap: &SkillValue,
        child: u32,
        world: u32,
    ) -> Result<bool, CheckError> {
        let acc = self.access_by_value(cap)?;
        let targets = acc[world as usize].clone();
        for u in targets {
            if !self.eval(overlay, child, u)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn eval_quantifier(
        &mut self,
        overlay: u32,
        node: u32,
        agent: AgentId,
        child: u32,
        world: u32,
        quant: Quant,
    ) -> Result<bool, CheckError> {
        let universe = self.universe(overlay, node)?;
        let s2 = &universe.1;
        let current = self.cap_of(overlay, agent);
        // All subsets of S2 by (cardinality, then lexicographic on the
        // sorted skill sequence); box quantifiers exit on the first
        // counterexample.
        for mask in subset_masks(s2.len()) {
            let subset: BTreeSet<SkillId> = s2
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1u32 << i) != 0)
                .map(|(_, s)| *s)
                .collect();
            let operand = SkillValue::Classical(subset);
            let cap = match quant {
                Quant::Up => skill::join(&current, &operand)?,
                Quant::Down => skill::difference(&current, &operand)?,
                Quant::Set => operand,
            };
            let ov = self.overlay_with(overlay, agent, cap);
            if !self.eval(ov, child, world)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Truth of `f` at the named world.
    pub fn check(&mut self, w: WorldId, f: &Fm) -> Result<bool, CheckError> {
        let world = self
            .model
            .world_index(w)
            .ok_or(CheckError::UnknownWorld(w))?;
        let node = self.intern(f);
        self.eval(0, node, world)
    }

    /// The truth set of `f` across all worlds.
    pub fn truth_set(&mut self, f: &Fm) -> Result<TruthSet, CheckError> {
        let node = self.intern(f);
        let mut worlds = Vec::new();
        for i in 0..self.model.world_count() as u32 {
            if self.eval(0, node, i)? {
                worlds.push(self.model.world_name(i));
            }
        }
        worlds.sort();
        Ok(TruthSet {
            worlds,
            model_fingerprint: self.model.fingerprint(),
        })
    }
}

#[derive(Clone, Copy)]
enum Quant {
    Up,
    Down,
    Set,
}

/// All bitmasks over `len` positions ordered by (popcount, numeric value):
/// with bit i standing for the i-th smallest skill this is cardinality-then-
/// lexicographic order.
fn subset_masks(len: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (0..(1u32 << len)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

/// One-shot convenience wrappers over a fresh session.
pub fn check(m: &WeightedModel, w: WorldId, f: &Fm) -> Result<bool, CheckError> {
    Checker::new(m)?.check(w, f)
}

pub fn truth_set(m: &WeightedModel, f: &Fm) -> Result<TruthSet, CheckError> {
    Checker::new(m)?.truth_set(f)
}

/// The finite quantifier universe `(S1, S2)` for a formula against the
/// model's base capabilities.
pub fn quantifier_universe(
    m: &WeightedModel,
    f: &Fm,
) -> Result<(Vec<SkillId>, Vec<SkillId>), CheckError> {
    let mut ck = Checker::new(m)?;
    let node = ck.intern(f);
    let u = ck.universe(0, node)?;
    Ok((u.0.clone(), u.1.clone()))
}

/// Groups appearing under `C` or `E` in a formula (the `A_phi` of the
/// group-closure construction).
pub fn closure_groups(f: &Fm) -> BTreeSet<Group> {
    let mut out = BTreeSet::new();
    fn walk(f: &Formula, out: &mut BTreeSet<Group>) {
        if let Formula::C(g, _) | Formula::E(g, _) = f {
            out.insert(g.clone());
        }
        for ch in f.children() {
            walk(ch, out);
        }
    }
    walk(f, &mut out);
    out
}

/// Builds the one-step group relation `e_phi` and its transitive closure
/// `e_phi_plus` for the groups under `C`/`E` in `f`, by iterating the
/// compose-and-add pass until nothing changes.
pub fn group_closure(m: &WeightedModel, f: &Fm) -> Result<GroupClosure, CheckError> {
    let groups = closure_groups(f);
    let n = m.world_count();
    let mut e_phi: BTreeMap<(WorldId, WorldId), BTreeSet<Group>> = BTreeMap::new();
    for g in &groups {
        for i in 0..n as u32 {
            for j in 0..n as u32 {
                let mut hit = false;
                for a in g.members() {
                    if skill::leq(&m.capability(*a), m.edge(i, j))? {
                        hit = true;
                        break;
                    }
                }
                if hit {
                    e_phi
                        .entry((m.world_name(i), m.world_name(j)))
                        .or_default()
                        .insert(g.clone());
                }
            }
        }
    }
    let mut e_plus = e_phi.clone();
    loop {
        let mut additions: Vec<((WorldId, WorldId), Group)> = Vec::new();
        for ((x, y), gs_xy) in &e_plus {
            for ((y2, z), gs_yz) in &e_plus {
                if y != y2 {
                    continue;
                }
                for g in gs_xy.intersection(gs_yz) {
                    let has = e_plus
                        .get(&(*x, *z))
                        .is_some_and(|s| s.contains(g));
                    if !has {
                        additions.push(((*x, *z), g.clone()));
                    }
                }
            }
        }
        if additions.is_empty() {
            break;
        }
        for (key, g) in additions {
            e_plus.entry(key).or_default().insert(g);
        }
    }
    Ok(GroupClosure {
        e_phi,
        e_phi_plus: e_plus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn solar() -> WeightedModel {
        WeightedModel::from_json_str(include_str!("../../fixtures/solar.json")).unwrap()
    }

    fn fiveworld() -> WeightedModel {
        WeightedModel::from_json_str(include_str!("../../fixtures/fiveworld.json")).unwrap()
    }

    fn holds(m: &WeightedModel, w: &str, f: &str) -> bool {
        check(m, WorldId::new(w), &parse(f).unwrap()).unwrap()
    }

    #[test]
    fn solar_individual_knowledge() {
        let m = solar();
        assert!(!holds(&m, "e", "K[a] p"));
        assert!(holds(&m, "e", "~K[a] ~p"));
        assert!(holds(&m, "e", "(K[b] p & K[c] p)"));
    }

    #[test]
    fn solar_group_knowledge() {
        let m = solar();
        for g in ["a,b", "a,c", "a,b,c"] {
            assert!(!holds(&m, "e", &format!("E[{g}] p")), "E[{g}]");
            assert!(!holds(&m, "e", &format!("C[{g}] p")), "C[{g}]");
        }
        assert!(holds(&m, "e", "C[b,c] p"));
        for g in ["a,b", "a,c", "b,c", "a,b,c"] {
            assert!(holds(&m, "e", &format!("D[{g}] p")), "D[{g}]");
            assert!(!holds(&m, "e", &format!("F[{g}] p")), "F[{g}]");
        }
    }

    #[test]
    fn solar_updates_and_quantifiers() {
        let m = solar();
        assert!(!holds(&m, "e", "up[a;{1,2}] K[a] p"));
        assert!(holds(&m, "e", "up[a;{3}] K[a] p"));
        assert!(holds(&m, "e", "down[b;{2}] K[b] p"));
        assert!(!holds(&m, "e", "down[b;{1}] K[b] p"));
        assert!(!holds(&m, "e", "down[b;{3}] K[b] p"));
        assert!(holds(&m, "e", "set[c;{1,3}] K[c] p"));
        assert!(holds(&m, "e", "set[c;{2,3}] K[c] p"));
        assert!(!holds(&m, "e", "set[c;{1,2}] K[c] p"));
        assert!(holds(&m, "e", "learn[a;b] K[a] p"));
        assert!(holds(&m, "e", "learn[a;c] K[a] p"));
        assert!(!holds(&m, "e", "learn[b;a] K[b] p"));
        assert!(holds(&m, "e", "ba[a] p"));
        assert!(!holds(&m, "e", "ba[a] K[a] p"));
        assert!(!holds(&m, "e", "ba[a] ~K[a] p"));
        // knowability and forgettability of p, for every agent
        for agent in ["a", "b", "c"] {
            assert!(holds(&m, "e", &format!("dp[{agent}] K[{agent}] p")));
            assert!(holds(&m, "e", &format!("dm[{agent}] ~K[{agent}] p")));
        }
    }

    #[test]
    fn empty_updates_are_identity() {
        let m = fiveworld();
        for w in ["w1", "w2", "w3", "w4", "w5"] {
            for f in ["K[a] p1", "C[a,b] p1", "D[b,c] p4"] {
                let plain = holds(&m, w, f);
                assert_eq!(holds(&m, w, &format!("up[a;{{}}] {f}")), plain);
                assert_eq!(holds(&m, w, &format!("down[a;{{}}] {f}")), plain);
            }
        }
    }

    #[test]
    fn truth_sets_are_sorted_and_fingerprinted() {
        let m = solar();
        let ts = truth_set(&m, &parse("K[b] p").unwrap()).unwrap();
        let mut sorted = ts.worlds.clone();
        sorted.sort();
        assert_eq!(ts.worlds, sorted);
        assert_eq!(ts.model_fingerprint, m.fingerprint());
        assert!(ts.contains(WorldId::new("e")));
    }

    #[test]
    fn unknown_world_is_an_error() {
        let m = solar();
        let err = check(&m, WorldId::new("pluto"), &parse("p").unwrap()).unwrap_err();
        assert!(matches!(err, CheckError::UnknownWorld(_)));
    }

    #[test]
    fn quantifier_universe_examples() {
        let m = fiveworld();
        let (s1, s2) = quantifier_universe(&m, &parse("bp[a] K[a] p4").unwrap()).unwrap();
        let names: Vec<&str> = s1.iter().map(|s| s.as_str()).collect();
        assert_eq!(names, vec!["s1", "s2", "s3", "s4"]);
        assert_eq!(s2.len(), 5);
        assert!(s2.iter().any(|s| s.as_str() == "fresh"));

        // skills inside nested updates join S1
        let (s1, _) = quantifier_universe(&m, &parse("bp[a] up[a;{s9}] p1").unwrap()).unwrap();
        assert!(s1.iter().any(|s| s.as_str() == "s9"));

        // all-empty edges and an incompetent agent: S1 empty, S2 = {fresh}
        let empty = WeightedModel::from_json_str(
            r#"{"skills": [], "worlds": ["w"], "capabilities": {}, "valuation": {}}"#,
        )
        .unwrap();
        let (s1, s2) = quantifier_universe(&empty, &parse("bp[z] p").unwrap()).unwrap();
        assert!(s1.is_empty());
        assert_eq!(s2.iter().map(|s| s.as_str()).collect::<Vec<_>>(), vec!["fresh"]);
    }

    #[test]
    fn quantifiers_rejected_off_classical() {
        let fuzzy = WeightedModel::from_json_str(
            r#"{"skills": ["s"], "worlds": ["w"], "family": "fuzzy",
                "capabilities": {}, "valuation": {}}"#,
        )
        .unwrap();
        let err = check(&fuzzy, WorldId::new("w"), &parse("bp[a] p").unwrap()).unwrap_err();
        assert!(matches!(err, CheckError::QuantifierFamily(_)));
    }

    #[test]
    fn group_closure_examples() {
        use crate::syntax::build::*;
        let m = fiveworld();
        // no C/E in the formula: nothing tracked
        let gc = group_closure(&m, &parse("K[a] p1").unwrap()).unwrap();
        assert!(gc.e_phi.is_empty() && gc.e_phi_plus.is_empty());

        // chain via intermediate world: w1 -s1,s2,s3-> w3 (agent a) and
        // w3 -s4-> w4 (agent c), so {a,c} connects w1 to w4 in two steps.
        let g = Group::new([AgentId::new("a"), AgentId::new("c")]).unwrap();
        let f = c(g.clone(), atom("p1"));
        let gc = group_closure(&m, &f).unwrap();
        let (w1, w3, w4) = (WorldId::new("w1"), WorldId::new("w3"), WorldId::new("w4"));
        assert!(gc.one_step(w1, w3).contains(&g));
        assert!(gc.one_step(w3, w4).contains(&g));
        assert!(!gc.one_step(w1, w4).contains(&g));
        assert!(gc.reaches(&g, w1, w4));

        // e_phi ⊆ e_phi_plus pointwise
        for (k, gs) in &gc.e_phi {
            assert!(gs.is_subset(&gc.e_phi_plus[k]));
        }
        // and the closure is transitively closed
        for ((x, y), gs_xy) in &gc.e_phi_plus {
            for ((y2, z), gs_yz) in &gc.e_phi_plus {
                if y == y2 {
                    for g in gs_xy.intersection(gs_yz) {
                        assert!(gc.reaches(g, *x, *z));
                    }
                }
            }
        }
    }

    #[test]
    fn c_matches_group_closure_route() {
        // the session's reachability agrees with the standalone e_phi_plus
        let m = fiveworld();
        let g = Group::new([AgentId::new("a"), AgentId::new("c")]).unwrap();
        let f = crate::syntax::build::c(g.clone(), crate::syntax::build::atom("p1"));
        let gc = group_closure(&m, &f).unwrap();
        let mut ck = Checker::new(&m).unwrap();
        let reach = ck.reachable(0, &g).unwrap();
        for i in 0..m.world_count() as u32 {
            for j in 0..m.world_count() as u32 {
                assert_eq!(
                    reach[i as usize].contains(&j),
                    gc.reaches(&g, m.world_name(i), m.world_name(j))
                );
            }
        }
    }

    #[test]
    fn subset_order_is_cardinality_then_lex() {
        let masks = subset_masks(3);
        assert_eq!(masks, vec![0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111]);
    }

    #[test]
    fn de_re_builders_reproduce_the_example_judgments() {
        use crate::syntax::{build_de_re_de_dicto, DeReKind};
        let m = fiveworld();
        let a = AgentId::new("a");
        let c = AgentId::new("c");
        let p4 = crate::syntax::build::atom("p4");
        let w5 = WorldId::new("w5");
        // de dicto fails, implicit de re holds, explicit de re fails
        let dicto = build_de_re_de_dicto(DeReKind::DeDicto, a, c, p4.clone()).unwrap();
        assert!(!check(&m, w5, &dicto).unwrap());
        let implicit = build_de_re_de_dicto(DeReKind::ImplicitDeRe, a, c, p4.clone()).unwrap();
        assert!(check(&m, w5, &implicit).unwrap());
        let explicit = build_de_re_de_dicto(DeReKind::ExplicitDeRe, a, c, p4).unwrap();
        assert!(!check(&m, w5, &explicit).unwrap());
    }

    #[test]
    fn fuzzy_models_check_end_to_end() {
        // memberships compared exactly: 0.5-capable a crosses the 0.5 edge,
        // 0.6-capable b does not
        let m = WeightedModel::from_json_str(
            r#"{
                "skills": ["s"], "worlds": ["w1", "w2"], "family": "fuzzy",
                "edges": [{"between": ["w1","w2"], "skills": [{"skill":"s","mu":"0.5"}]}],
                "capabilities": {
                    "a": [{"skill":"s","mu":"0.5"}],
                    "b": [{"skill":"s","mu":"0.6"}]
                },
                "valuation": {"w1": ["p"]}
            }"#,
        )
        .unwrap();
        let w1 = WorldId::new("w1");
        assert!(!holds(&m, "w1", "K[a] p"));
        assert!(holds(&m, "w1", "K[b] p"));
        // D pools via pointwise max, so the group sees less than b alone
        // never; F via pointwise min sees at least what a does
        assert!(holds(&m, "w1", "D[a,b] p"));
        assert!(!holds(&m, "w1", "F[a,b] p"));
        // classical update syntax lifts to a crisp fuzzy set
        assert!(holds(&m, "w1", "up[a;{s}] K[a] p"));
        // downskilling by the crisp set wipes the membership out
        assert!(!holds(&m, "w1", "down[b;{s}] K[b] p"));
        let _ = w1;
    }

    #[test]
    fn lattice_models_check_end_to_end() {
        // diamond lattice: bot < x, y < top; downskilling is the meet
        let m = WeightedModel::from_json_str(
            r#"{
                "worlds": ["w1", "w2", "w3"],
                "family": {"lattice": {
                    "elements": ["bot", "x", "y", "top"],
                    "leq_pairs": [["bot","x"],["bot","y"],["x","top"],["y","top"]],
                    "top": "top", "bottom": "bot"
                }},
                "edges": [
                    {"between": ["w1","w2"], "element": "x"},
                    {"between": ["w1","w3"], "element": "y"}
                ],
                "capabilities": {"a": "x", "b": "y"},
                "valuation": {"w1": ["p"], "w2": ["p"]}
            }"#,
        )
        .unwrap();
        assert!(m.validate().is_empty());
        // C(a) = x <= E(w1,w2) = x, so a cannot rule out w2 (where p holds)
        // but can rule out w3
        assert!(holds(&m, "w1", "K[a] p"));
        assert!(!holds(&m, "w1", "K[b] p"));
        // D uses the join x ⊔ y = top: only the diagonal remains
        assert!(holds(&m, "w1", "D[a,b] p"));
        // F uses the meet x ⊓ y = bot: every world is possible
        assert!(!holds(&m, "w1", "F[a,b] p"));

        // downskilling on a lattice is the meet with the operand
        use crate::model::{CapabilityUpdate, UpdateKind, UpdateOperand};
        let lattice = match m.family() {
            Family::Lattice(l) => Arc::clone(l),
            _ => unreachable!(),
        };
        let y = lattice.element("y").unwrap();
        let m2 = m
            .apply_update(&CapabilityUpdate {
                kind: UpdateKind::Minus,
                agent: AgentId::new("a"),
                operand: UpdateOperand::Skills(y),
            })
            .unwrap();
        assert_eq!(m2.capability(AgentId::new("a")), lattice.bottom());
        // with bottom capability a sees everything, losing the knowledge
        assert!(!check(&m2, WorldId::new("w1"), &parse("K[a] p").unwrap()).unwrap());

        // quantifiers stay classical-only
        let err = check(&m, WorldId::new("w1"), &parse("bp[a] p").unwrap()).unwrap_err();
        assert!(matches!(err, CheckError::QuantifierFamily(_)));
    }
}
