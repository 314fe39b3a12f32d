//! Undirected edge geography: two players alternately extend a trail over
//! an undirected graph, re-using no edge; a player with no move loses.
//!
//! This module solves the game exactly by memoized minimax, builds the
//! weighted model and quantified formula induced by a rooted graph, and
//! cross-checks the game winner against the model checker — an independent
//! oracle for the quantifier evaluation path.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use serde_json::{json, Value};
use thiserror::Error;

use crate::checker::{self, CheckError};
use crate::ids::{AgentId, PropId, SkillId, WorldId};
use crate::model::{EdgeEntry, ModelError, WeightedModel};
use crate::skill::{Family, SkillValue};
use crate::syntax::{build, Fm};

#[derive(Debug, Error)]
pub enum UegError {
    #[error("bad graph JSON: {0}")]
    Json(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("graph has {0} edges; the solver's state encoding supports at most 60")]
    TooManyEdges(usize),
    #[error("self-loop {0}-{0} is not allowed (the edge relation is irreflexive)")]
    SelfLoop(String),
    #[error("graph too large for the equivalence harness: {nodes} nodes / {edges} edges (caps: {MAX_NODES} nodes, {MAX_EDGES} edges)")]
    BoundExceeded { nodes: usize, edges: usize },
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("check error: {0}")]
    Check(#[from] CheckError),
}

const MAX_NODES: usize = 5;
const MAX_EDGES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    PlayerI,
    PlayerII,
}

impl std::fmt::Display for Winner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Winner::PlayerI => "player-I",
            Winner::PlayerII => "player-II",
        })
    }
}

/// A rooted undirected graph with an irreflexive edge relation. Edges are
/// stored as index pairs (i < j), deduplicated.
#[derive(Debug, Clone)]
pub struct UegGraph {
    nodes: Vec<String>,
    edges: Vec<(u32, u32)>,
    root: u32,
}

impl UegGraph {
    pub fn new(
        nodes: Vec<String>,
        edges: Vec<(String, String)>,
        root: &str,
    ) -> Result<UegGraph, UegError> {
        let index: HashMap<&str, u32> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i as u32))
            .collect();
        if index.len() != nodes.len() {
            return Err(UegError::Json("duplicate node names".into()));
        }
        let root = *index
            .get(root)
            .ok_or_else(|| UegError::UnknownNode(root.to_owned()))?;
        let mut set = BTreeSet::new();
        for (a, b) in &edges {
            let i = *index
                .get(a.as_str())
                .ok_or_else(|| UegError::UnknownNode(a.clone()))?;
            let j = *index
                .get(b.as_str())
                .ok_or_else(|| UegError::UnknownNode(b.clone()))?;
            if i == j {
                return Err(UegError::SelfLoop(a.clone()));
            }
            set.insert((i.min(j), i.max(j)));
        }
        if set.len() > 60 {
            return Err(UegError::TooManyEdges(set.len()));
        }
        Ok(UegGraph {
            nodes,
            edges: set.into_iter().collect(),
            root,
        })
    }

    pub fn from_json_str(text: &str) -> Result<UegGraph, UegError> {
        let v: Value = serde_json::from_str(text).map_err(|e| UegError::Json(e.to_string()))?;
        let nodes: Vec<String> = serde_json::from_value(v["nodes"].clone())
            .map_err(|e| UegError::Json(format!("nodes: {e}")))?;
        let edges: Vec<(String, String)> = serde_json::from_value(v["edges"].clone())
            .map_err(|e| UegError::Json(format!("edges: {e}")))?;
        let root = v["root"]
            .as_str()
            .ok_or_else(|| UegError::Json("missing root".into()))?;
        UegGraph::new(nodes, edges, root)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "nodes": self.nodes,
            "edges": self.edges.iter()
                .map(|(i, j)| json!([self.nodes[*i as usize], self.nodes[*j as usize]]))
                .collect::<Vec<_>>(),
            "root": self.nodes[self.root as usize],
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn root_name(&self) -> &str {
        &self.nodes[self.root as usize]
    }

    /// Winner of the game with the mover starting at the root.
    pub fn solve(&self) -> Winner {
        let full: u64 = if self.edges.is_empty() {
            0
        } else {
            (1u64 << self.edges.len()) - 1
        };
        let mut memo: HashMap<(u64, u32), bool> = HashMap::new();
        if self.mover_wins(full, self.root, &mut memo) {
            Winner::PlayerI
        } else {
            Winner::PlayerII
        }
    }

    fn mover_wins(&self, mask: u64, at: u32, memo: &mut HashMap<(u64, u32), bool>) -> bool {
        if let Some(&v) = memo.get(&(mask, at)) {
            return v;
        }
        let mut win = false;
        for (idx, (i, j)) in self.edges.iter().enumerate() {
            if mask & (1 << idx) == 0 {
                continue;
            }
            let next = if *i == at {
                *j
            } else if *j == at {
                *i
            } else {
                continue;
            };
            if !self.mover_wins(mask & !(1 << idx), next, memo) {
                win = true;
                break;
            }
        }
        memo.insert((mask, at), win);
        win
    }

    fn skill_name(&self, i: u32, j: u32) -> String {
        format!("s_{{{},{}}}", self.nodes[i as usize], self.nodes[j as usize])
    }

    fn prop_name(&self, i: u32) -> String {
        format!("p_{}", self.nodes[i as usize])
    }

    fn agent(i: usize) -> AgentId {
        AgentId::new(&format!("ueg_a{}", i))
    }

    /// How many alternating levels the induced formula has: the smallest
    /// even positive integer >= |R|.
    pub fn level_count(&self) -> usize {
        let r = self.edge_count();
        if r <= 2 {
            2
        } else {
            r + r % 2
        }
    }

    /// The induced model: one world per node with its own atom, one skill
    /// per edge labelling exactly that pair, every relevant agent totally
    /// incompetent. Diagonal edges are explicitly empty: a mover who has
    /// picked an edge skill no longer considers the current node possible,
    /// which is what makes `K p_target` select a unique move.
    ///
    /// With `downskilling` set, agents instead start with every edge skill
    /// (the box-minus variant of the reduction); this tweak is exposed but
    /// not exercised by the equivalence harness.
    pub fn induced_model(&self, downskilling: bool) -> WeightedModel {
        let worlds: Vec<WorldId> = self.nodes.iter().map(|n| WorldId::new(n)).collect();
        let skills: Vec<SkillId> = self
            .edges
            .iter()
            .map(|(i, j)| SkillId::new(&self.skill_name(*i, *j)))
            .collect();
        let mut entries = Vec::new();
        for ((i, j), s) in self.edges.iter().zip(&skills) {
            entries.push(EdgeEntry {
                between: (worlds[*i as usize], worlds[*j as usize]),
                value: SkillValue::classical([*s]),
            });
        }
        for w in &worlds {
            entries.push(EdgeEntry {
                between: (*w, *w),
                value: SkillValue::classical([]),
            });
        }
        let start_cap = if downskilling {
            SkillValue::classical(skills.iter().copied())
        } else {
            SkillValue::classical([])
        };
        let capabilities: BTreeMap<AgentId, SkillValue> = (1..=self.level_count())
            .map(|i| (Self::agent(i), start_cap.clone()))
            .collect();
        let valuation: BTreeMap<WorldId, BTreeSet<PropId>> = (0..self.nodes.len() as u32)
            .map(|i| {
                (
                    worlds[i as usize],
                    [PropId::new(&self.prop_name(i))].into_iter().collect(),
                )
            })
            .collect();
        WeightedModel::new(
            worlds,
            skills,
            Family::Classical,
            entries,
            capabilities,
            valuation,
        )
        .expect("induced model construction cannot fail")
    }

    /// psi_i: the i-th mover both considers some world possible and pins
    /// down a unique node — i.e. has just selected exactly one edge.
    fn psi(&self, i: usize) -> Fm {
        let a = Self::agent(i);
        build::and(
            build::not(build::k(a, build::bot())),
            build::disj(
                (0..self.nodes.len() as u32)
                    .map(|x| build::k(a, build::atom(&self.prop_name(x))))
                    .collect::<Vec<_>>(),
            ),
        )
    }

    /// chi_i: the i-th mover re-used an edge some earlier mover j already
    /// took. Disjuncts ordered by x, then y, then j.
    fn chi(&self, i: usize) -> Fm {
        let mut terms = Vec::new();
        for x in 0..self.nodes.len() as u32 {
            for y in 0..self.nodes.len() as u32 {
                if x == y {
                    continue;
                }
                for j in 1..i {
                    terms.push(build::and(
                        build::atom(&self.prop_name(x)),
                        build::and(
                            build::hat_k(Self::agent(j), build::atom(&self.prop_name(y))),
                            build::k(Self::agent(i), build::atom(&self.prop_name(y))),
                        ),
                    ));
                }
            }
        }
        build::disj(terms)
    }

    /// The induced formula: alternating diamond/box quantifiers over
    /// upskilling, one level per potential move.
    pub fn induced_formula(&self) -> Fm {
        let n = self.level_count();
        self.level(1, n)
    }

    fn level(&self, i: usize, n: usize) -> Fm {
        let a = Self::agent(i);
        if i % 2 == 1 {
            // mover's turn: pick a fresh edge and survive every reply
            let next = build::k(a, self.level(i + 1, n));
            build::dp(
                a,
                build::and(self.psi(i), build::and(build::not(self.chi(i)), next)),
            )
        } else if i == n {
            build::bp(a, build::or(build::not(self.psi(i)), self.chi(i)))
        } else {
            let next = build::hat_k(a, self.level(i + 1, n));
            build::bp(
                a,
                build::or(build::not(self.psi(i)), build::or(self.chi(i), next)),
            )
        }
    }
}

/// Result of cross-checking the minimax winner against the model checker.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub winner: Winner,
    pub model_check: bool,
    pub agree: bool,
    pub formula_length: usize,
    pub solve_micros: u128,
    pub check_micros: u128,
}

/// Solves the game and checks the induced formula on the induced model at
/// the root; refuses graphs beyond desk scale (the quantifier enumeration
/// is exponential in the edge count).
pub fn equivalence_check(g: &UegGraph) -> Result<EquivalenceReport, UegError> {
    if g.node_count() > MAX_NODES || g.edge_count() > MAX_EDGES {
        return Err(UegError::BoundExceeded {
            nodes: g.node_count(),
            edges: g.edge_count(),
        });
    }
    let t0 = Instant::now();
    let winner = g.solve();
    let solve_micros = t0.elapsed().as_micros();

    let model = g.induced_model(false);
    let formula = g.induced_formula();
    let t1 = Instant::now();
    let verdict = checker::check(&model, WorldId::new(g.root_name()), &formula)?;
    let check_micros = t1.elapsed().as_micros();

    Ok(EquivalenceReport {
        winner,
        model_check: verdict,
        agree: (winner == Winner::PlayerI) == verdict,
        formula_length: crate::syntax::length(&formula),
        solve_micros,
        check_micros,
    })
}
