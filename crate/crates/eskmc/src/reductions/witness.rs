//! Executable witness-model constructions: given a pointed model satisfying
//! a formula on the source side of a rewriting, build the target-side model
//! that satisfies the rewritten formula (or, for the backward directions
//! that admit a finite construction, the source-side model back).
//!
//! All constructions keep world names, so the distinguished world carries
//! over unchanged; the bimodal embedding adds one extra world per ordered
//! world pair, named `l|r`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::checker::{self, CheckError};
use crate::ids::{AgentId, Group, PropId, SkillId, WorldId};
use crate::model::{EdgeEntry, ModelError, WeightedModel};
use crate::skill::{self, Family, SkillError, SkillValue};
use crate::syntax::{vocabulary, Fm};

use super::cpdl::{cpdl_check, Cf};
use super::kripke::{kripke_check, KripkeError, KripkeModel, KripkeSemantics};
use super::{
    f_group, f_k, fresh_c, fresh_p, rewrite_lcdefu_to_lcu, rewrite_lcu_to_cpdl,
    rewrite_ld_to_kdn, rewrite_ldef_to_ld, rewrite_ku2_to_lu, rewrite_s5c2_to_lc, split_agent,
    ReduceError,
};

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("lemma {lemma} starts from a {expected} model")]
    WrongSourceKind {
        lemma: &'static str,
        expected: &'static str,
    },
    #[error("the backward construction for {0} builds infinite sequence models and is not executable")]
    NotExecutable(&'static str),
    #[error("skill error: {0}")]
    Skill(#[from] SkillError),
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("kripke error: {0}")]
    Kripke(#[from] KripkeError),
    #[error("check error: {0}")]
    Check(#[from] CheckError),
    #[error("rewrite error: {0}")]
    Reduce(#[from] ReduceError),
}

/// The rewriting lemmas with an executable construction, by direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    /// Single-agent weighted model to a symmetric Kripke model; the
    /// formula is unchanged.
    SingleAgentSymmetric,
    /// Weighted K/D model to a plain Kripke model for the D-to-KDn
    /// rewriting.
    DToKdn,
    /// Weighted K/D/E/F model to a weighted model over designated-agent
    /// skills.
    DefToD,
    /// Same with common knowledge and the universal modality.
    CdefuToCu,
    /// Two-agent S5 Kripke model to a weighted model.
    S5Forward,
    /// Weighted model of the rewritten formula back to an S5 model via
    /// reflexive-transitive closure.
    S5Backward,
    /// Weighted C+U model to a PDL model.
    CpdlForward,
    /// PDL model of the rewritten formula back to a weighted model.
    CpdlBackward,
    /// Bimodal K+U Kripke model to a weighted model with split agents and
    /// a marker atom.
    Ku2,
}

#[derive(Debug, Clone)]
pub enum SourceModel {
    Weighted(WeightedModel),
    Kripke(KripkeModel),
}

#[derive(Debug, Clone)]
pub enum WitnessModel {
    Weighted(WeightedModel),
    Kripke(KripkeModel),
}

/// Kripke model from subset tests: `(x, y) ∈ R(a)` iff `C(a) ⊑ E(x, y)`.
/// Symmetric by edge symmetry. Used (with different agent sets) by the
/// single-agent, D-to-KDn and CPDL-forward constructions.
pub fn weighted_to_kripke(
    m: &WeightedModel,
    agents: impl IntoIterator<Item = AgentId>,
) -> Result<KripkeModel, WitnessError> {
    let mut relations: BTreeMap<AgentId, BTreeSet<(WorldId, WorldId)>> = BTreeMap::new();
    for a in agents {
        let cap = m.capability(a);
        let mut rel = BTreeSet::new();
        for i in 0..m.world_count() as u32 {
            for j in 0..m.world_count() as u32 {
                if skill::leq(&cap, m.edge(i, j))? {
                    rel.insert((m.world_name(i), m.world_name(j)));
                }
            }
        }
        relations.insert(a, rel);
    }
    let valuation = (0..m.world_count() as u32)
        .map(|i| (m.world_name(i), m.valuation(i).clone()))
        .collect();
    Ok(KripkeModel::new(m.worlds().to_vec(), relations, valuation)?)
}

/// Target model for the DEF rewritings: one skill per designated agent,
/// `E'(u,v)` holding exactly the designated skills whose operator condition
/// holds between u and v in the source, and every designated agent capable
/// of exactly its own skill. With `with_c` the silent helper agent is
/// added to every edge.
pub fn weighted_to_designated(
    m: &WeightedModel,
    f: &Fm,
    with_c: bool,
) -> Result<WeightedModel, WitnessError> {
    let voc = vocabulary(f);
    // designated tokens and the condition each one encodes
    enum Cond {
        Agent(AgentId),
        Join(Group),
        Some(Group),
        Meet(Group),
        Always,
    }
    let mut tokens: Vec<(AgentId, Cond)> = Vec::new();
    for a in &voc.agents {
        tokens.push((f_k(*a), Cond::Agent(*a)));
    }
    for g in &voc.groups {
        tokens.push((f_group('D', g), Cond::Join(g.clone())));
        tokens.push((f_group('E', g), Cond::Some(g.clone())));
        tokens.push((f_group('F', g), Cond::Meet(g.clone())));
    }
    if with_c {
        tokens.push((fresh_c(), Cond::Always));
    }

    let joined = |g: &Group| -> Result<SkillValue, SkillError> {
        let mut cap = m.capability(g.members()[0]);
        for a in &g.members()[1..] {
            cap = skill::join(&cap, &m.capability(*a))?;
        }
        Ok(cap)
    };
    let met = |g: &Group| -> Result<SkillValue, SkillError> {
        let mut cap = m.capability(g.members()[0]);
        for a in &g.members()[1..] {
            cap = skill::meet(&cap, &m.capability(*a))?;
        }
        Ok(cap)
    };

    let skills: Vec<SkillId> = tokens.iter().map(|(t, _)| SkillId::new(t.as_str())).collect();
    let mut edges = Vec::new();
    for i in 0..m.world_count() as u32 {
        for j in i..m.world_count() as u32 {
            let mut label = BTreeSet::new();
            for ((t, cond), s) in tokens.iter().zip(&skills) {
                let _ = t;
                let holds = match cond {
                    Cond::Agent(a) => skill::leq(&m.capability(*a), m.edge(i, j))?,
                    Cond::Join(g) => skill::leq(&joined(g)?, m.edge(i, j))?,
                    Cond::Some(g) => {
                        let mut any = false;
                        for a in g.members() {
                            if skill::leq(&m.capability(*a), m.edge(i, j))? {
                                any = true;
                                break;
                            }
                        }
                        any
                    }
                    Cond::Meet(g) => skill::leq(&met(g)?, m.edge(i, j))?,
                    Cond::Always => true,
                };
                if holds {
                    label.insert(*s);
                }
            }
            edges.push(EdgeEntry {
                between: (m.world_name(i), m.world_name(j)),
                value: SkillValue::Classical(label),
            });
        }
    }
    let capabilities: BTreeMap<AgentId, SkillValue> = tokens
        .iter()
        .map(|(t, _)| (*t, SkillValue::classical([SkillId::new(t.as_str())])))
        .collect();
    let valuation = (0..m.world_count() as u32)
        .map(|i| (m.world_name(i), m.valuation(i).clone()))
        .collect();
    Ok(WeightedModel::new(
        m.worlds().to_vec(),
        skills,
        Family::Classical,
        edges,
        capabilities,
        valuation,
    )?)
}

/// Weighted model from an S5 (or any symmetric) Kripke model: agents act
/// as their own skills, edges carry the agents whose relation holds.
pub fn kripke_to_weighted_symmetric(n: &KripkeModel) -> Result<WeightedModel, WitnessError> {
    let agents: Vec<AgentId> = n.agents().copied().collect();
    let skills: Vec<SkillId> = agents.iter().map(|a| SkillId::new(a.as_str())).collect();
    let mut edges = Vec::new();
    for i in 0..n.world_count() as u32 {
        for j in i..n.world_count() as u32 {
            let label: BTreeSet<SkillId> = agents
                .iter()
                .zip(&skills)
                .filter(|(a, _)| n.relation(**a).contains(&(i, j)))
                .map(|(_, s)| *s)
                .collect();
            edges.push(EdgeEntry {
                between: (n.world_name(i), n.world_name(j)),
                value: SkillValue::Classical(label),
            });
        }
    }
    let capabilities = agents
        .iter()
        .map(|a| (*a, SkillValue::classical([SkillId::new(a.as_str())])))
        .collect();
    let valuation = (0..n.world_count() as u32)
        .map(|i| (n.world_name(i), n.valuation(i).clone()))
        .collect();
    Ok(WeightedModel::new(
        n.worlds().to_vec(),
        skills,
        Family::Classical,
        edges,
        capabilities,
        valuation,
    )?)
}

/// Weighted model from a PDL model's atomic relations, symmetrized: an
/// agent labels an edge when its relation holds in either direction.
pub fn cpdl_to_weighted(n: &KripkeModel) -> Result<WeightedModel, WitnessError> {
    let agents: Vec<AgentId> = n.agents().copied().collect();
    let skills: Vec<SkillId> = agents.iter().map(|a| SkillId::new(a.as_str())).collect();
    let mut edges = Vec::new();
    for i in 0..n.world_count() as u32 {
        for j in i..n.world_count() as u32 {
            let label: BTreeSet<SkillId> = agents
                .iter()
                .zip(&skills)
                .filter(|(a, _)| {
                    let r = n.relation(**a);
                    r.contains(&(i, j)) || r.contains(&(j, i))
                })
                .map(|(_, s)| *s)
                .collect();
            edges.push(EdgeEntry {
                between: (n.world_name(i), n.world_name(j)),
                value: SkillValue::Classical(label),
            });
        }
    }
    let capabilities = agents
        .iter()
        .map(|a| (*a, SkillValue::classical([SkillId::new(a.as_str())])))
        .collect();
    let valuation = (0..n.world_count() as u32)
        .map(|i| (n.world_name(i), n.valuation(i).clone()))
        .collect();
    Ok(WeightedModel::new(
        n.worlds().to_vec(),
        skills,
        Family::Classical,
        edges,
        capabilities,
        valuation,
    )?)
}

/// Kripke model from subset tests, closed reflexively and transitively per
/// agent; symmetric input relations make the result an S5 model.
pub fn weighted_to_s5(
    m: &WeightedModel,
    agents: impl IntoIterator<Item = AgentId>,
) -> Result<KripkeModel, WitnessError> {
    Ok(weighted_to_kripke(m, agents)?.reflexive_transitive_closure())
}

/// The bimodal embedding: worlds plus one world per ordered pair, edges
/// that split each original step into a first half (toward the pair world)
/// and a second half (away from it), the marker atom true exactly on the
/// original worlds.
pub fn ku2_to_weighted(n: &KripkeModel, f: &Fm) -> Result<WeightedModel, WitnessError> {
    let voc = vocabulary(f);
    let base_agents: Vec<AgentId> = voc.agents.iter().copied().collect();
    let splits: Vec<AgentId> = base_agents
        .iter()
        .flat_map(|a| [split_agent(*a, 1), split_agent(*a, 2)])
        .collect();
    let skills: Vec<SkillId> = splits.iter().map(|a| SkillId::new(a.as_str())).collect();

    let base: Vec<WorldId> = n.worlds().to_vec();
    let mut worlds = base.clone();
    let mut pair_name = BTreeMap::new();
    for l in &base {
        for r in &base {
            let name = WorldId::new(&format!("{}|{}", l, r));
            pair_name.insert((*l, *r), name);
            worlds.push(name);
        }
    }

    let mut edges = Vec::new();
    // all diagonals are empty: the embedding relies on strict alternation
    for w in &worlds {
        edges.push(EdgeEntry {
            between: (*w, *w),
            value: SkillValue::classical([]),
        });
    }
    for (li, l) in base.iter().enumerate() {
        for (ri, r) in base.iter().enumerate() {
            let y = pair_name[&(*l, *r)];
            let mut first = BTreeSet::new();
            let mut second = BTreeSet::new();
            for a in &base_agents {
                if n.relation(*a).contains(&(li as u32, ri as u32)) {
                    first.insert(SkillId::new(split_agent(*a, 1).as_str()));
                    second.insert(SkillId::new(split_agent(*a, 2).as_str()));
                }
            }
            if l == r {
                let both: BTreeSet<SkillId> = first.union(&second).copied().collect();
                edges.push(EdgeEntry {
                    between: (*l, y),
                    value: SkillValue::Classical(both),
                });
            } else {
                edges.push(EdgeEntry {
                    between: (*l, y),
                    value: SkillValue::Classical(first),
                });
                edges.push(EdgeEntry {
                    between: (*r, y),
                    value: SkillValue::Classical(second),
                });
            }
        }
    }

    let capabilities: BTreeMap<AgentId, SkillValue> = splits
        .iter()
        .zip(&skills)
        .map(|(a, s)| (*a, SkillValue::classical([*s])))
        .collect();
    let marker = fresh_p();
    let mut valuation: BTreeMap<WorldId, BTreeSet<PropId>> = BTreeMap::new();
    for (i, w) in base.iter().enumerate() {
        let mut props = n.valuation(i as u32).clone();
        props.insert(marker);
        valuation.insert(*w, props);
    }
    Ok(WeightedModel::new(
        worlds,
        skills,
        Family::Classical,
        edges,
        capabilities,
        valuation,
    )?)
}

/// Runs one lemma's construction: from a source model satisfying `f`
/// (in the source semantics), produce the target model at the same world.
pub fn witness_forward(
    lemma: Lemma,
    source: &SourceModel,
    f: &Fm,
) -> Result<WitnessModel, WitnessError> {
    let want_weighted = |lemma: &'static str| -> Result<&WeightedModel, WitnessError> {
        match source {
            SourceModel::Weighted(m) => Ok(m),
            SourceModel::Kripke(_) => Err(WitnessError::WrongSourceKind {
                lemma,
                expected: "weighted",
            }),
        }
    };
    let want_kripke = |lemma: &'static str| -> Result<&KripkeModel, WitnessError> {
        match source {
            SourceModel::Kripke(n) => Ok(n),
            SourceModel::Weighted(_) => Err(WitnessError::WrongSourceKind {
                lemma,
                expected: "kripke",
            }),
        }
    };
    Ok(match lemma {
        Lemma::SingleAgentSymmetric => {
            let m = want_weighted("single-agent")?;
            WitnessModel::Kripke(weighted_to_kripke(m, vocabulary(f).agents)?)
        }
        Lemma::DToKdn => {
            let m = want_weighted("d-to-kdn")?;
            let mut agents: Vec<AgentId> = vocabulary(f).agents.into_iter().collect();
            agents.push(fresh_c());
            WitnessModel::Kripke(weighted_to_kripke(m, agents)?)
        }
        Lemma::DefToD => {
            let m = want_weighted("def-to-d")?;
            WitnessModel::Weighted(weighted_to_designated(m, f, true)?)
        }
        Lemma::CdefuToCu => {
            let m = want_weighted("cdefu-to-cu")?;
            WitnessModel::Weighted(weighted_to_designated(m, f, false)?)
        }
        Lemma::S5Forward => {
            let n = want_kripke("s5-forward")?;
            WitnessModel::Weighted(kripke_to_weighted_symmetric(n)?)
        }
        Lemma::S5Backward => {
            let m = want_weighted("s5-backward")?;
            WitnessModel::Kripke(weighted_to_s5(m, vocabulary(f).agents)?)
        }
        Lemma::CpdlForward => {
            let m = want_weighted("cpdl-forward")?;
            WitnessModel::Kripke(weighted_to_kripke(m, vocabulary(f).agents)?)
        }
        Lemma::CpdlBackward => {
            let n = want_kripke("cpdl-backward")?;
            WitnessModel::Weighted(cpdl_to_weighted(n)?)
        }
        Lemma::Ku2 => {
            let n = want_kripke("ku2")?;
            WitnessModel::Weighted(ku2_to_weighted(n, f)?)
        }
    })
}

/// Full round-trip for one lemma: rewrite `f`, build the witness, and
/// check the rewritten formula on the witness with the target checker
/// (respectively the original formula, for the backward directions).
/// Returns the target-side verdict.
pub fn verify_roundtrip(
    lemma: Lemma,
    source: &SourceModel,
    w: WorldId,
    f: &Fm,
) -> Result<bool, WitnessError> {
    let witness = witness_forward(lemma, source, f)?;
    Ok(match (lemma, witness) {
        (Lemma::SingleAgentSymmetric, WitnessModel::Kripke(n)) => {
            kripke_check(&n, w, f, KripkeSemantics::KDn)?
        }
        (Lemma::DToKdn, WitnessModel::Kripke(n)) => {
            let rho = rewrite_ld_to_kdn(f)?;
            kripke_check(&n, w, &rho, KripkeSemantics::KDn)?
        }
        (Lemma::DefToD, WitnessModel::Weighted(m)) => {
            let rho = rewrite_ldef_to_ld(f)?;
            checker::check(&m, w, &rho)?
        }
        (Lemma::CdefuToCu, WitnessModel::Weighted(m)) => {
            let rho = rewrite_lcdefu_to_lcu(f)?;
            checker::check(&m, w, &rho)?
        }
        (Lemma::S5Forward, WitnessModel::Weighted(m)) => {
            let rho = rewrite_s5c2_to_lc(f)?;
            checker::check(&m, w, &rho)?
        }
        (Lemma::S5Backward, WitnessModel::Kripke(n)) => {
            kripke_check(&n, w, f, KripkeSemantics::S5C2)?
        }
        (Lemma::CpdlForward, WitnessModel::Kripke(n)) => {
            let rho: Cf = rewrite_lcu_to_cpdl(f)?;
            cpdl_check(&n, w, &rho)?
        }
        (Lemma::CpdlBackward, WitnessModel::Weighted(m)) => checker::check(&m, w, f)?,
        (Lemma::Ku2, WitnessModel::Weighted(m)) => {
            let rho = rewrite_ku2_to_lu(f)?;
            checker::check(&m, w, &rho)?
        }
        _ => unreachable!("witness_forward returns the matching model kind"),
    })
}
