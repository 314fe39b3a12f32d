//! Reference evaluator: a direct transliteration of the satisfaction
//! clauses, with no memoization, no overlays and no closure precomputation.
//! Updates rebuild a whole model, common knowledge iterates the bounded
//! mutual-knowledge tower `E_G^n` for n up to |W| (enough on a finite
//! model: a shortest witnessing path never repeats a world), and
//! quantifiers recompute their subset universe in place.
//!
//! Deliberately slow and simple; the main checker is tested against it.

use std::collections::BTreeSet;

use crate::checker::CheckError;
use crate::ids::{AgentId, Group, SkillId, WorldId};
use crate::model::{CapabilityUpdate, UpdateKind, UpdateOperand, WeightedModel};
use crate::skill::{self, Family, SkillValue};
use crate::syntax::Formula;

pub fn check_naive(m: &WeightedModel, w: WorldId, f: &Formula) -> Result<bool, CheckError> {
    let world = m.world_index(w).ok_or(CheckError::UnknownWorld(w))?;
    eval(m, world, f)
}

fn eval(m: &WeightedModel, w: u32, f: &Formula) -> Result<bool, CheckError> {
    use Formula::*;
    Ok(match f {
        Atom(p) => m.holds(w, *p),
        Top => true,
        Bot => false,
        Not(g) => !eval(m, w, g)?,
        Implies(a, b) => {
            if eval(m, w, a)? {
                eval(m, w, b)?
            } else {
                true
            }
        }
        And(a, b) => eval(m, w, a)? && eval(m, w, b)?,
        Or(a, b) => eval(m, w, a)? || eval(m, w, b)?,
        Iff(a, b) => eval(m, w, a)? == eval(m, w, b)?,
        K(a, g) => all_below(m, w, &m.capability(*a), g)?,
        E(gr, g) => {
            let mut ok = true;
            for a in gr.members() {
                if !all_below(m, w, &m.capability(*a), g)? {
                    ok = false;
                    break;
                }
            }
            ok
        }
        D(gr, g) => {
            let mut cap = m.capability(gr.members()[0]);
            for a in &gr.members()[1..] {
                cap = skill::join(&cap, &m.capability(*a))?;
            }
            all_below(m, w, &cap, g)?
        }
        F(gr, g) => {
            let mut cap = m.capability(gr.members()[0]);
            for a in &gr.members()[1..] {
                cap = skill::meet(&cap, &m.capability(*a))?;
            }
            all_below(m, w, &cap, g)?
        }
        C(gr, g) => {
            // all positive n: on |W| worlds, n up to |W| settles it
            let mut ok = true;
            for n in 1..=m.world_count() {
                if !mutual_tower(m, w, gr, g, n)? {
                    ok = false;
                    break;
                }
            }
            ok
        }
        Up(a, s, g) => {
            let m2 = m.apply_update(&CapabilityUpdate {
                kind: UpdateKind::Union,
                agent: *a,
                operand: UpdateOperand::Skills(s.clone()),
            })?;
            eval(&m2, w, g)?
        }
        Down(a, s, g) => {
            let m2 = m.apply_update(&CapabilityUpdate {
                kind: UpdateKind::Minus,
                agent: *a,
                operand: UpdateOperand::Skills(s.clone()),
            })?;
            eval(&m2, w, g)?
        }
        SetTo(a, s, g) => {
            let m2 = m.apply_update(&CapabilityUpdate {
                kind: UpdateKind::Assign,
                agent: *a,
                operand: UpdateOperand::Skills(s.clone()),
            })?;
            eval(&m2, w, g)?
        }
        Learn(l, src, g) => {
            let m2 = m.apply_update(&CapabilityUpdate {
                kind: UpdateKind::Learn,
                agent: *l,
                operand: UpdateOperand::Agent(*src),
            })?;
            eval(&m2, w, g)?
        }
        BoxPlus(a, g) => quantify(m, w, *a, g, f, UpdateKind::Union)?,
        BoxMinus(a, g) => quantify(m, w, *a, g, f, UpdateKind::Minus)?,
        BoxAny(a, g) => quantify(m, w, *a, g, f, UpdateKind::Assign)?,
        Univ(g) => {
            let mut ok = true;
            for u in 0..m.world_count() as u32 {
                if !eval(m, u, g)? {
                    ok = false;
                    break;
                }
            }
            ok
        }
    })
}

fn all_below(
    m: &WeightedModel,
    w: u32,
    cap: &SkillValue,
    body: &Formula,
) -> Result<bool, CheckError> {
    for u in 0..m.world_count() as u32 {
        if skill::leq(cap, m.edge(w, u))? && !eval(m, u, body)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `E_G^n body` by literal recursion.
fn mutual_tower(
    m: &WeightedModel,
    w: u32,
    gr: &Group,
    body: &Formula,
    n: usize,
) -> Result<bool, CheckError> {
    for a in gr.members() {
        let cap = m.capability(*a);
        for u in 0..m.world_count() as u32 {
            if skill::leq(&cap, m.edge(w, u))? {
                let ok = if n == 1 {
                    eval(m, u, body)?
                } else {
                    mutual_tower(m, u, gr, body, n - 1)?
                };
                if !ok {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn quantify(
    m: &WeightedModel,
    w: u32,
    agent: AgentId,
    body: &Formula,
    whole: &Formula,
    kind: UpdateKind,
) -> Result<bool, CheckError> {
    if !matches!(m.family(), Family::Classical) {
        return Err(CheckError::QuantifierFamily(m.family().name()));
    }
    // S1: finite edge labels, capabilities of agents in the formula, skills
    // written in the formula. S2 adds one unused skill.
    let mut s1: BTreeSet<SkillId> = m.edge_label_skills();
    let (agents, skills) = formula_vocab(whole);
    s1.extend(skills);
    for a in agents {
        s1.extend(m.capability(a).support());
    }
    let declared: BTreeSet<SkillId> = m.skill_universe().iter().copied().collect();
    let mut k = 0;
    let fresh = loop {
        let name = if k == 0 { "fresh".to_owned() } else { format!("fresh_{k}") };
        k += 1;
        let id = SkillId::new(&name);
        if !s1.contains(&id) && !declared.contains(&id) {
            break id;
        }
    };
    let mut s2: Vec<SkillId> = s1.into_iter().collect();
    s2.push(fresh);

    for mask in 0u32..(1u32 << s2.len()) {
        let subset: BTreeSet<SkillId> = s2
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, s)| *s)
            .collect();
        let m2 = m.apply_update(&CapabilityUpdate {
            kind,
            agent,
            operand: UpdateOperand::Skills(SkillValue::Classical(subset)),
        })?;
        if !eval(&m2, w, body)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn formula_vocab(f: &Formula) -> (BTreeSet<AgentId>, BTreeSet<SkillId>) {
    use Formula::*;
    let mut agents = BTreeSet::new();
    let mut skills = BTreeSet::new();
    fn walk(f: &Formula, agents: &mut BTreeSet<AgentId>, skills: &mut BTreeSet<SkillId>) {
        match f {
            K(a, _) | BoxPlus(a, _) | BoxMinus(a, _) | BoxAny(a, _) => {
                agents.insert(*a);
            }
            C(g, _) | D(g, _) | E(g, _) | F(g, _) => {
                agents.extend(g.members().iter().copied());
            }
            Up(a, s, _) | Down(a, s, _) | SetTo(a, s, _) => {
                agents.insert(*a);
                skills.extend(s.support());
            }
            Learn(l, s, _) => {
                agents.insert(*l);
                agents.insert(*s);
            }
            _ => {}
        }
        for ch in f.children() {
            walk(ch, agents, skills);
        }
    }
    walk(f, &mut agents, &mut skills);
    (agents, skills)
}
