//! Weighted Kripke models: worlds, a symmetric skill-labelled edge function,
//! an agent capability function and a valuation.
//!
//! Edges are stored for unordered pairs, so symmetry holds by construction;
//! conflicting entries for the same pair are rejected at load time. Missing
//! off-diagonal entries default to the family's bottom, missing diagonal
//! entries to the family's top (`full`). Explicit diagonal entries — finite
//! self-loop labels or even the empty set — are allowed and kept.
//!
//! Positivity (only identical worlds may carry the whole skill universe) is
//! reported by [`WeightedModel::validate`] rather than enforced, so invalid
//! models can be loaded, inspected and diagnosed.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::ids::{AgentId, PropId, SkillId, WorldId};
use crate::skill::{
    self, difference, join, parse_membership, Family, FiniteLattice, SkillError, SkillValue,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model has no worlds")]
    NoWorlds,
    #[error("duplicate world {0}")]
    DuplicateWorld(WorldId),
    #[error("unknown world {0}")]
    UnknownWorld(WorldId),
    #[error("conflicting edge entries for ({0}, {1})")]
    ConflictingEdge(WorldId, WorldId),
    #[error("skill error: {0}")]
    Skill(#[from] SkillError),
    #[error("bad model JSON: {0}")]
    Json(String),
    #[error("model is invalid: {0}")]
    Invalid(String),
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error(
        "update operand family {operand} does not match the model family {family}"
    )]
    OperandFamily { operand: String, family: String },
}

/// A violation found by [`WeightedModel::validate`]; violations are data,
/// not errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A full edge between distinct worlds.
    Positivity(WorldId, WorldId),
    /// A value from the wrong family.
    Family(String),
    /// An edge or capability mentions a skill outside the declared universe.
    UnknownSkill(SkillId, String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Positivity(w, u) => {
                write!(f, "positivity: E({w},{u}) is the full universe but {w} != {u}")
            }
            Violation::Family(what) => write!(f, "family mismatch at {what}"),
            Violation::UnknownSkill(s, what) => {
                write!(f, "skill {s} at {what} is not in the declared universe")
            }
        }
    }
}

#[derive(Debug)]
struct ModelCore {
    worlds: Vec<WorldId>,
    world_index: HashMap<WorldId, u32>,
    skill_universe: Vec<SkillId>,
    family: Family,
    /// Dense symmetric matrix, defaults already applied.
    matrix: Vec<SkillValue>,
    valuation: Vec<BTreeSet<PropId>>,
}

/// An unordered-pair edge entry used when building a model.
#[derive(Debug, Clone)]
pub struct EdgeEntry {
    pub between: (WorldId, WorldId),
    pub value: SkillValue,
}

#[derive(Clone)]
pub struct WeightedModel {
    core: Arc<ModelCore>,
    capabilities: BTreeMap<AgentId, SkillValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateKind {
    Union,
    Minus,
    Assign,
    Learn,
}

/// A single capability update: the agent whose skills change and what they
/// become.
#[derive(Debug, Clone)]
pub struct CapabilityUpdate {
    pub kind: UpdateKind,
    pub agent: AgentId,
    pub operand: UpdateOperand,
}

#[derive(Debug, Clone)]
pub enum UpdateOperand {
    Skills(SkillValue),
    Agent(AgentId),
}

impl WeightedModel {
    pub fn new(
        worlds: Vec<WorldId>,
        skill_universe: Vec<SkillId>,
        family: Family,
        edges: Vec<EdgeEntry>,
        capabilities: BTreeMap<AgentId, SkillValue>,
        valuation: BTreeMap<WorldId, BTreeSet<PropId>>,
    ) -> Result<WeightedModel, ModelError> {
        if worlds.is_empty() {
            return Err(ModelError::NoWorlds);
        }
        let mut world_index = HashMap::new();
        for (i, w) in worlds.iter().enumerate() {
            if world_index.insert(*w, i as u32).is_some() {
                return Err(ModelError::DuplicateWorld(*w));
            }
        }
        let n = worlds.len();
        let mut matrix = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                matrix.push(if i == j { family.top() } else { family.bottom() });
            }
        }
        let mut seen: HashMap<(u32, u32), SkillValue> = HashMap::new();
        for e in edges {
            let (a, b) = e.between;
            let i = *world_index
                .get(&a)
                .ok_or(ModelError::UnknownWorld(a))?;
            let j = *world_index
                .get(&b)
                .ok_or(ModelError::UnknownWorld(b))?;
            let key = (i.min(j), i.max(j));
            if let Some(prev) = seen.get(&key) {
                if *prev != e.value {
                    return Err(ModelError::ConflictingEdge(a, b));
                }
                continue;
            }
            seen.insert(key, e.value.clone());
            matrix[i as usize * n + j as usize] = e.value.clone();
            matrix[j as usize * n + i as usize] = e.value;
        }
        let mut val = vec![BTreeSet::new(); n];
        for (w, props) in valuation {
            let i = *world_index
                .get(&w)
                .ok_or(ModelError::UnknownWorld(w))?;
            val[i as usize] = props;
        }
        Ok(WeightedModel {
            core: Arc::new(ModelCore {
                worlds,
                world_index,
                skill_universe,
                family,
                matrix,
                valuation: val,
            }),
            capabilities,
        })
    }

    pub fn worlds(&self) -> &[WorldId] {
        &self.core.worlds
    }

    pub fn world_count(&self) -> usize {
        self.core.worlds.len()
    }

    pub fn world_index(&self, w: WorldId) -> Option<u32> {
        self.core.world_index.get(&w).copied()
    }

    pub fn world_name(&self, i: u32) -> WorldId {
        self.core.worlds[i as usize]
    }

    pub fn family(&self) -> &Family {
        &self.core.family
    }

    pub fn skill_universe(&self) -> &[SkillId] {
        &self.core.skill_universe
    }

    pub fn edge(&self, i: u32, j: u32) -> &SkillValue {
        &self.core.matrix[i as usize * self.world_count() + j as usize]
    }

    pub fn edge_by_name(&self, w: WorldId, u: WorldId) -> Result<&SkillValue, ModelError> {
        let i = self.world_index(w).ok_or(ModelError::UnknownWorld(w))?;
        let j = self.world_index(u).ok_or(ModelError::UnknownWorld(u))?;
        Ok(self.edge(i, j))
    }

    pub fn valuation(&self, i: u32) -> &BTreeSet<PropId> {
        &self.core.valuation[i as usize]
    }

    pub fn holds(&self, i: u32, p: PropId) -> bool {
        self.core.valuation[i as usize].contains(&p)
    }

    pub fn capabilities(&self) -> &BTreeMap<AgentId, SkillValue> {
        &self.capabilities
    }

    /// The capability of `a`; agents not mentioned by the model are totally
    /// incompetent (bottom).
    pub fn capability(&self, a: AgentId) -> SkillValue {
        self.capabilities
            .get(&a)
            .cloned()
            .unwrap_or_else(|| self.core.family.bottom())
    }

    /// Checks symmetry (structural), positivity, family consistency and
    /// domain closure; returns all violations found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.world_count();
        let universe: BTreeSet<SkillId> = self.core.skill_universe.iter().copied().collect();
        for i in 0..n {
            for j in i..n {
                let v = &self.core.matrix[i * n + j];
                if i != j && v.is_full() {
                    out.push(Violation::Positivity(
                        self.core.worlds[i],
                        self.core.worlds[j],
                    ));
                }
                if !self.core.family.admits(v) {
                    out.push(Violation::Family(format!(
                        "edge ({}, {})",
                        self.core.worlds[i], self.core.worlds[j]
                    )));
                }
                for s in v.support() {
                    if !universe.contains(&s) {
                        out.push(Violation::UnknownSkill(
                            s,
                            format!("edge ({}, {})", self.core.worlds[i], self.core.worlds[j]),
                        ));
                    }
                }
            }
        }
        for (a, cap) in &self.capabilities {
            if !self.core.family.admits(cap) {
                out.push(Violation::Family(format!("capability of {a}")));
            }
            for s in cap.support() {
                if !universe.contains(&s) {
                    out.push(Violation::UnknownSkill(s, format!("capability of {a}")));
                }
            }
        }
        out
    }

    /// The capability an update leaves `agent` with. Classical operands are
    /// lifted to crisp fuzzy sets on fuzzy models; lattice downskilling is
    /// the meet.
    pub fn updated_capability(
        &self,
        caps: &BTreeMap<AgentId, SkillValue>,
        update: &CapabilityUpdate,
    ) -> Result<SkillValue, ModelError> {
        let family = &self.core.family;
        let current = caps
            .get(&update.agent)
            .cloned()
            .unwrap_or_else(|| family.bottom());
        let operand = match &update.operand {
            UpdateOperand::Agent(b) => {
                if update.kind != UpdateKind::Learn {
                    return Err(ModelError::OperandFamily {
                        operand: "agent".into(),
                        family: family.name().into(),
                    });
                }
                return Ok(caps.get(b).cloned().unwrap_or_else(|| family.bottom()));
            }
            UpdateOperand::Skills(s) => self.lift_operand(s)?,
        };
        Ok(match update.kind {
            UpdateKind::Union => join(&current, &operand)?,
            UpdateKind::Minus => match family {
                Family::Lattice(_) => skill::meet(&current, &operand)?,
                _ => difference(&current, &operand)?,
            },
            UpdateKind::Assign => operand,
            UpdateKind::Learn => unreachable!("learn handled above"),
        })
    }

    pub fn lift_operand(&self, s: &SkillValue) -> Result<SkillValue, ModelError> {
        let family = &self.core.family;
        if family.admits(s) {
            return Ok(s.clone());
        }
        // Classical syntax on a fuzzy model reads as a crisp fuzzy set.
        if let (Family::Fuzzy, SkillValue::Classical(set)) = (family, s) {
            return Ok(SkillValue::fuzzy(
                set.iter().map(|k| (*k, num::rational::Ratio::from_integer(1))),
            ));
        }
        Err(ModelError::OperandFamily {
            operand: s.family_name().into(),
            family: family.name().into(),
        })
    }

    /// Pure capability update: the returned model shares worlds, edges and
    /// valuation with `self`.
    pub fn apply_update(&self, update: &CapabilityUpdate) -> Result<WeightedModel, ModelError> {
        let new_cap = self.updated_capability(&self.capabilities, update)?;
        let mut caps = self.capabilities.clone();
        caps.insert(update.agent, new_cap);
        Ok(WeightedModel {
            core: Arc::clone(&self.core),
            capabilities: caps,
        })
    }

    /// With different capabilities, sharing everything else.
    pub fn with_capabilities(&self, caps: BTreeMap<AgentId, SkillValue>) -> WeightedModel {
        WeightedModel {
            core: Arc::clone(&self.core),
            capabilities: caps,
        }
    }

    /// Worlds `a` cannot distinguish from `w`: `{u | C(a) ⊑ E(w,u)}`.
    pub fn accessible(&self, a: AgentId, w: WorldId) -> Result<Vec<WorldId>, ModelError> {
        let i = self.world_index(w).ok_or(ModelError::UnknownWorld(w))?;
        let cap = self.capability(a);
        let mut out = Vec::new();
        for j in 0..self.world_count() as u32 {
            if skill::leq(&cap, self.edge(i, j))? {
                out.push(self.world_name(j));
            }
        }
        Ok(out)
    }

    /// Worlds reachable from `w` by a nonempty chain of single-agent steps
    /// through members of `G`.
    pub fn group_reachable(
        &self,
        group: &crate::ids::Group,
        w: WorldId,
    ) -> Result<BTreeSet<WorldId>, ModelError> {
        let start = self.world_index(w).ok_or(ModelError::UnknownWorld(w))?;
        let n = self.world_count();
        let caps: Vec<SkillValue> = group.members().iter().map(|a| self.capability(*a)).collect();
        let step = |i: u32| -> Result<Vec<u32>, ModelError> {
            let mut out = Vec::new();
            for j in 0..n as u32 {
                for cap in &caps {
                    if skill::leq(cap, self.edge(i, j))? {
                        out.push(j);
                        break;
                    }
                }
            }
            Ok(out)
        };
        let mut reached: BTreeSet<u32> = BTreeSet::new();
        let mut frontier: Vec<u32> = step(start)?;
        while let Some(j) = frontier.pop() {
            if reached.insert(j) {
                frontier.extend(step(j)?);
            }
        }
        Ok(reached.into_iter().map(|j| self.world_name(j)).collect())
    }

    /// Every finite skill that labels an edge, plus the whole declared
    /// universe is *not* included: full edges contribute nothing.
    pub fn edge_label_skills(&self) -> BTreeSet<SkillId> {
        let mut out = BTreeSet::new();
        for v in &self.core.matrix {
            if !v.is_full() {
                out.extend(v.support());
            }
        }
        out
    }

    /// Stable digest of the model contents (used in run reports and truth
    /// set fingerprints).
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(self.to_json().to_string().as_bytes());
        hex_prefix(&hasher.finalize())
    }

    pub fn from_json_str(text: &str) -> Result<WeightedModel, ModelError> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        Self::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<WeightedModel, ModelError> {
        let obj = v
            .as_object()
            .ok_or_else(|| ModelError::Json("expected an object".into()))?;
        let family = match obj.get("family") {
            None => Family::Classical,
            Some(Value::String(s)) if s == "classical" => Family::Classical,
            Some(Value::String(s)) if s == "fuzzy" => Family::Fuzzy,
            Some(Value::Object(m)) if m.contains_key("lattice") => {
                Family::Lattice(FiniteLattice::from_json(&m["lattice"])?)
            }
            Some(other) => {
                return Err(ModelError::Json(format!("bad family: {other}")))
            }
        };
        let strings = |key: &str| -> Result<Vec<String>, ModelError> {
            match obj.get(key) {
                None => Ok(Vec::new()),
                Some(Value::Array(items)) => items
                    .iter()
                    .map(|x| {
                        x.as_str()
                            .map(str::to_owned)
                            .ok_or_else(|| ModelError::Json(format!("{key}: expected strings")))
                    })
                    .collect(),
                Some(_) => Err(ModelError::Json(format!("{key}: expected an array"))),
            }
        };
        let worlds: Vec<WorldId> = strings("worlds")?
            .iter()
            .map(|s| WorldId::new(s))
            .collect();
        let skills: Vec<SkillId> = strings("skills")?
            .iter()
            .map(|s| SkillId::new(s))
            .collect();

        let parse_value = |v: &Value, what: &str| -> Result<SkillValue, ModelError> {
            parse_skill_value(v, &family, what)
        };

        let mut edges = Vec::new();
        if let Some(Value::Array(items)) = obj.get("edges") {
            for item in items {
                let e = item
                    .as_object()
                    .ok_or_else(|| ModelError::Json("edge: expected an object".into()))?;
                let between = e
                    .get("between")
                    .and_then(Value::as_array)
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| ModelError::Json("edge: bad \"between\"".into()))?;
                let (wa, wb) = (
                    between[0]
                        .as_str()
                        .ok_or_else(|| ModelError::Json("edge: bad world".into()))?,
                    between[1]
                        .as_str()
                        .ok_or_else(|| ModelError::Json("edge: bad world".into()))?,
                );
                let value = if e.get("full").and_then(Value::as_bool) == Some(true) {
                    family.top()
                } else if let Some(elem) = e.get("element") {
                    parse_value(elem, "edge")?
                } else if let Some(sk) = e.get("skills") {
                    parse_value(sk, "edge")?
                } else {
                    return Err(ModelError::Json(
                        "edge: expected \"skills\", \"element\" or \"full\"".into(),
                    ));
                };
                edges.push(EdgeEntry {
                    between: (WorldId::new(wa), WorldId::new(wb)),
                    value,
                });
            }
        }

        let mut capabilities = BTreeMap::new();
        if let Some(Value::Object(m)) = obj.get("capabilities") {
            for (agent, val) in m {
                capabilities.insert(
                    AgentId::new(agent),
                    parse_value(val, &format!("capability of {agent}"))?,
                );
            }
        }

        let mut valuation = BTreeMap::new();
        if let Some(Value::Object(m)) = obj.get("valuation") {
            for (world, val) in m {
                let props = val
                    .as_array()
                    .ok_or_else(|| ModelError::Json("valuation: expected arrays".into()))?
                    .iter()
                    .map(|p| {
                        p.as_str()
                            .map(PropId::new)
                            .ok_or_else(|| ModelError::Json("valuation: bad proposition".into()))
                    })
                    .collect::<Result<BTreeSet<_>, _>>()?;
                valuation.insert(WorldId::new(world), props);
            }
        }

        WeightedModel::new(worlds, skills, family, edges, capabilities, valuation)
    }

    pub fn to_json(&self) -> Value {
        let family = match &self.core.family {
            Family::Classical => json!("classical"),
            Family::Fuzzy => json!("fuzzy"),
            Family::Lattice(l) => json!({ "lattice": l.to_spec_json() }),
        };
        let n = self.world_count();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i..n {
                let v = &self.core.matrix[i * n + j];
                let default = if i == j {
                    self.core.family.top()
                } else {
                    self.core.family.bottom()
                };
                if *v == default {
                    continue;
                }
                let mut entry = serde_json::Map::new();
                entry.insert(
                    "between".into(),
                    json!([
                        self.core.worlds[i].as_str(),
                        self.core.worlds[j].as_str()
                    ]),
                );
                match v {
                    SkillValue::Full => {
                        entry.insert("full".into(), json!(true));
                    }
                    other => {
                        entry.insert(
                            if matches!(other, SkillValue::Lattice(_)) {
                                "element".into()
                            } else {
                                "skills".into()
                            },
                            skill_value_to_json(other),
                        );
                    }
                }
                edges.push(Value::Object(entry));
            }
        }
        let caps: serde_json::Map<String, Value> = self
            .capabilities
            .iter()
            .map(|(a, v)| (a.as_str().to_owned(), skill_value_to_json(v)))
            .collect();
        let valuation: serde_json::Map<String, Value> = self
            .core
            .worlds
            .iter()
            .enumerate()
            .map(|(i, w)| {
                (
                    w.as_str().to_owned(),
                    json!(self.core.valuation[i]
                        .iter()
                        .map(|p| p.as_str())
                        .collect::<Vec<_>>()),
                )
            })
            .collect();
        json!({
            "skills": self.core.skill_universe.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            "worlds": self.core.worlds.iter().map(|w| w.as_str()).collect::<Vec<_>>(),
            "family": family,
            "edges": edges,
            "capabilities": caps,
            "valuation": valuation,
        })
    }
}

impl fmt::Debug for WeightedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "WeightedModel({} worlds, {} family)",
            self.world_count(),
            self.core.family.name()
        )
    }
}

fn parse_skill_value(v: &Value, family: &Family, what: &str) -> Result<SkillValue, ModelError> {
    match family {
        Family::Lattice(l) => {
            let name = v
                .as_str()
                .ok_or_else(|| ModelError::Json(format!("{what}: expected an element name")))?;
            Ok(l.element(name)?)
        }
        Family::Classical => {
            let items = v
                .as_array()
                .ok_or_else(|| ModelError::Json(format!("{what}: expected a skill array")))?;
            let mut set = BTreeSet::new();
            for item in items {
                let s = item
                    .as_str()
                    .ok_or_else(|| ModelError::Json(format!("{what}: expected skill names")))?;
                set.insert(SkillId::new(s));
            }
            Ok(SkillValue::Classical(set))
        }
        Family::Fuzzy => {
            let items = v
                .as_array()
                .ok_or_else(|| ModelError::Json(format!("{what}: expected membership entries")))?;
            let mut entries = Vec::new();
            for item in items {
                let o = item.as_object().ok_or_else(|| {
                    ModelError::Json(format!("{what}: expected {{\"skill\",\"mu\"}} entries"))
                })?;
                let s = o
                    .get("skill")
                    .and_then(Value::as_str)
                    .ok_or_else(|| ModelError::Json(format!("{what}: missing \"skill\"")))?;
                let mu = o
                    .get("mu")
                    .and_then(Value::as_str)
                    .ok_or_else(|| {
                        ModelError::Json(format!("{what}: \"mu\" must be a decimal string"))
                    })?;
                entries.push((SkillId::new(s), parse_membership(mu)?));
            }
            Ok(SkillValue::fuzzy(entries))
        }
    }
}

fn skill_value_to_json(v: &SkillValue) -> Value {
    match v {
        SkillValue::Classical(set) => json!(set.iter().map(|s| s.as_str()).collect::<Vec<_>>()),
        SkillValue::Fuzzy(m) => json!(m
            .iter()
            .map(|(s, mu)| json!({"skill": s.as_str(), "mu": skill::membership_to_string(mu)}))
            .collect::<Vec<_>>()),
        SkillValue::Lattice(e) => json!(e.name()),
        SkillValue::Full => json!("full"),
    }
}

fn hex_prefix(bytes: &[u8]) -> String {
    bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
}
