//! Bounded satisfiability search: exhaustive enumeration of tiny models
//! (with deterministic random sampling one size up) used as a
//! sound-but-incomplete probe for the rewritings' backward directions.
//! A hit is a real model; a miss proves nothing.

use std::collections::{BTreeMap, BTreeSet};

use crate::checker;
use crate::ids::{AgentId, PropId, SkillId, WorldId};
use crate::model::{EdgeEntry, WeightedModel};
use crate::reductions::cpdl::{cpdl_check, Cf};
use crate::reductions::kripke::{kripke_check, KripkeModel, KripkeSemantics};
use crate::skill::{Family, SkillValue};
use crate::syntax::Fm;

/// Deterministic small RNG (SplitMix64); no seeding from the environment,
/// so probe runs are reproducible.
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n.max(1)
    }
}

/// How far a bounded search goes: exhaustive sizes first, then seeded
/// random sampling one size class up, with a global cap on candidate
/// models so unsatisfiable inputs terminate predictably.
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub exhaustive_worlds: usize,
    pub exhaustive_skills: usize,
    pub sampled_worlds: usize,
    pub sampled_skills: usize,
    pub samples: usize,
    pub max_models: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            exhaustive_worlds: 3,
            exhaustive_skills: 2,
            sampled_worlds: 4,
            sampled_skills: 3,
            samples: 20_000,
            max_models: 1_000_000,
        }
    }
}

impl SearchBudget {
    /// A tighter budget for probes whose candidate formulas are large.
    pub fn small() -> Self {
        SearchBudget {
            exhaustive_worlds: 2,
            exhaustive_skills: 2,
            sampled_worlds: 3,
            sampled_skills: 2,
            samples: 3_000,
            max_models: 20_000,
        }
    }
}

fn world_names(n: usize) -> Vec<WorldId> {
    (0..n).map(|i| WorldId::new(&format!("v{i}"))).collect()
}

fn skill_pool(k: usize) -> Vec<SkillId> {
    (0..k).map(|i| SkillId::new(&format!("t{i}"))).collect()
}

fn subset_of<T: Copy + Ord>(pool: &[T], mask: u64) -> BTreeSet<T> {
    pool.iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, x)| *x)
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn build_weighted(
    worlds: &[WorldId],
    skills: &[SkillId],
    edge_masks: &[u64],
    diag_mask: u64,
    cap_masks: &[u64],
    agents: &[AgentId],
    val_masks: &[u64],
    props: &[PropId],
) -> WeightedModel {
    let mut edges = Vec::new();
    let mut idx = 0;
    for i in 0..worlds.len() {
        // bit i set: explicit empty self-loop instead of the full default
        // (needed to witness formulas that forbid self-access)
        if diag_mask & (1 << i) != 0 {
            edges.push(EdgeEntry {
                between: (worlds[i], worlds[i]),
                value: SkillValue::classical([]),
            });
        }
        for j in (i + 1)..worlds.len() {
            let label = subset_of(skills, edge_masks[idx]);
            idx += 1;
            if !label.is_empty() {
                edges.push(EdgeEntry {
                    between: (worlds[i], worlds[j]),
                    value: SkillValue::Classical(label),
                });
            }
        }
    }
    let capabilities: BTreeMap<AgentId, SkillValue> = agents
        .iter()
        .enumerate()
        .map(|(i, a)| (*a, SkillValue::Classical(subset_of(skills, cap_masks[i]))))
        .collect();
    let valuation: BTreeMap<WorldId, BTreeSet<PropId>> = worlds
        .iter()
        .enumerate()
        .map(|(i, w)| (*w, subset_of(props, val_masks[i])))
        .collect();
    WeightedModel::new(
        worlds.to_vec(),
        skills.to_vec(),
        Family::Classical,
        edges,
        capabilities,
        valuation,
    )
    .expect("search models are structurally valid")
}

fn satisfied_at(m: &WeightedModel, f: &Fm) -> Option<WorldId> {
    let mut ck = checker::Checker::new(m).ok()?;
    for w in m.worlds() {
        if ck.check(*w, f).unwrap_or(false) {
            return Some(*w);
        }
    }
    None
}

/// Enumerate (exhaustively, then by sampling) weighted classical models and
/// return the first that satisfies `f` somewhere. Diagonals keep the full
/// default; edge labels, capabilities and valuations range over subsets.
pub fn find_weighted(
    f: &Fm,
    props: &[PropId],
    agents: &[AgentId],
    budget: SearchBudget,
) -> Option<(WeightedModel, WorldId)> {
    let mut spent = 0usize;
    for n in 1..=budget.exhaustive_worlds {
        for k in 0..=budget.exhaustive_skills {
            let worlds = world_names(n);
            let skills = skill_pool(k);
            let pairs = n * (n - 1) / 2;
            let edge_total: u64 = if k == 0 { 1 } else { 1 << (pairs * k).min(62) };
            let cap_total: u64 = if k == 0 { 1 } else { 1 << (agents.len() * k) };
            let val_total: u64 = 1 << (n * props.len());
            for edge_bits in 0..edge_total {
                let edge_masks: Vec<u64> = (0..pairs)
                    .map(|p| {
                        if k == 0 {
                            0
                        } else {
                            (edge_bits >> (p * k)) & ((1 << k) - 1)
                        }
                    })
                    .collect();
                for diag_mask in 0..(1u64 << n) {
                    for cap_bits in 0..cap_total {
                        let cap_masks: Vec<u64> = (0..agents.len())
                            .map(|a| {
                                if k == 0 {
                                    0
                                } else {
                                    (cap_bits >> (a * k)) & ((1 << k) - 1)
                                }
                            })
                            .collect();
                        for val_bits in 0..val_total {
                            let val_masks: Vec<u64> = (0..n)
                                .map(|w| {
                                    if props.is_empty() {
                                        0
                                    } else {
                                        (val_bits >> (w * props.len())) & ((1 << props.len()) - 1)
                                    }
                                })
                                .collect();
                            spent += 1;
                            if spent > budget.max_models {
                                return None;
                            }
                            let m = build_weighted(
                                &worlds, &skills, &edge_masks, diag_mask, &cap_masks, agents,
                                &val_masks, props,
                            );
                            if let Some(w) = satisfied_at(&m, f) {
                                return Some((m, w));
                            }
                        }
                    }
                }
            }
        }
    }
    let mut rng = SplitMix64(0x5eed_0001);
    let (n, k) = (budget.sampled_worlds, budget.sampled_skills);
    let worlds = world_names(n);
    let skills = skill_pool(k);
    let pairs = n * (n - 1) / 2;
    for _ in 0..budget.samples {
        spent += 1;
        if spent > budget.max_models {
            return None;
        }
        let edge_masks: Vec<u64> = (0..pairs).map(|_| rng.below(1 << k)).collect();
        let diag_mask = rng.below(1 << n);
        let cap_masks: Vec<u64> = (0..agents.len()).map(|_| rng.below(1 << k)).collect();
        let val_masks: Vec<u64> = (0..n)
            .map(|_| rng.below(1u64 << props.len().min(62)))
            .collect();
        let m = build_weighted(
            &worlds, &skills, &edge_masks, diag_mask, &cap_masks, agents, &val_masks, props,
        );
        if let Some(w) = satisfied_at(&m, f) {
            return Some((m, w));
        }
    }
    None
}

fn build_kripke(
    worlds: &[WorldId],
    rel_masks: &[u64],
    agents: &[AgentId],
    val_masks: &[u64],
    props: &[PropId],
) -> KripkeModel {
    let n = worlds.len();
    let relations: BTreeMap<AgentId, BTreeSet<(WorldId, WorldId)>> = agents
        .iter()
        .enumerate()
        .map(|(a, agent)| {
            let mask = rel_masks[a];
            let rel: BTreeSet<(WorldId, WorldId)> = (0..n * n)
                .filter(|bit| mask & (1 << bit) != 0)
                .map(|bit| (worlds[bit / n], worlds[bit % n]))
                .collect();
            (*agent, rel)
        })
        .collect();
    let valuation: BTreeMap<WorldId, BTreeSet<PropId>> = worlds
        .iter()
        .enumerate()
        .map(|(i, w)| (*w, subset_of(props, val_masks[i])))
        .collect();
    KripkeModel::new(worlds.to_vec(), relations, valuation).expect("search models are valid")
}

enum TargetFormula<'a> {
    Modal(&'a Fm, KripkeSemantics),
    Pdl(&'a Cf),
}

fn kripke_satisfied_at(n: &KripkeModel, f: &TargetFormula) -> Option<WorldId> {
    for w in n.worlds() {
        let ok = match f {
            TargetFormula::Modal(f, sem) => kripke_check(n, *w, f, *sem).unwrap_or(false),
            TargetFormula::Pdl(f) => cpdl_check(n, *w, f).unwrap_or(false),
        };
        if ok {
            return Some(*w);
        }
    }
    None
}

fn find_kripke_inner(
    f: &TargetFormula,
    props: &[PropId],
    agents: &[AgentId],
    budget: SearchBudget,
) -> Option<(KripkeModel, WorldId)> {
    let mut spent = 0usize;
    for n in 1..=budget.exhaustive_worlds.min(2) {
        let worlds = world_names(n);
        let bits = n * n;
        let rel_total: u64 = 1 << (bits * agents.len()).min(62);
        let val_total: u64 = 1 << (n * props.len());
        for rel_bits in 0..rel_total {
            let rel_masks: Vec<u64> = (0..agents.len())
                .map(|a| (rel_bits >> (a * bits)) & ((1 << bits) - 1))
                .collect();
            for val_bits in 0..val_total {
                let val_masks: Vec<u64> = (0..n)
                    .map(|w| {
                        if props.is_empty() {
                            0
                        } else {
                            (val_bits >> (w * props.len())) & ((1 << props.len()) - 1)
                        }
                    })
                    .collect();
                spent += 1;
                if spent > budget.max_models {
                    return None;
                }
                let model = build_kripke(&worlds, &rel_masks, agents, &val_masks, props);
                if let Some(w) = kripke_satisfied_at(&model, f) {
                    return Some((model, w));
                }
            }
        }
    }
    let mut rng = SplitMix64(0x5eed_0002);
    let n = budget.sampled_worlds.min(4);
    let worlds = world_names(n);
    for _ in 0..budget.samples {
        spent += 1;
        if spent > budget.max_models {
            return None;
        }
        let rel_masks: Vec<u64> = (0..agents.len())
            .map(|_| rng.below(1 << (n * n).min(62)))
            .collect();
        let val_masks: Vec<u64> = (0..n)
            .map(|_| rng.below(1u64 << props.len().min(62)))
            .collect();
        let model = build_kripke(&worlds, &rel_masks, agents, &val_masks, props);
        if let Some(w) = kripke_satisfied_at(&model, f) {
            return Some((model, w));
        }
    }
    None
}

/// Bounded search over plain Kripke models under the given semantics.
pub fn find_kripke(
    f: &Fm,
    props: &[PropId],
    agents: &[AgentId],
    semantics: KripkeSemantics,
    budget: SearchBudget,
) -> Option<(KripkeModel, WorldId)> {
    find_kripke_inner(&TargetFormula::Modal(f, semantics), props, agents, budget)
}

/// Bounded search over PDL models (atomic program relations enumerated
/// like Kripke relations).
pub fn find_cpdl(
    f: &Cf,
    props: &[PropId],
    agents: &[AgentId],
    budget: SearchBudget,
) -> Option<(KripkeModel, WorldId)> {
    find_kripke_inner(&TargetFormula::Pdl(f), props, agents, budget)
}

/// All partitions of `n` items as restricted-growth strings.
fn partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(i: usize, maxseen: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for b in 0..=maxseen + 1 {
            cur[i] = b;
            rec(i + 1, maxseen.max(b), cur, out);
        }
    }
    if n > 0 {
        cur[0] = 0;
        rec(1, 0, &mut cur, &mut out);
    }
    out
}

/// Exhaustive search over S5 models up to 4 worlds: each relation an
/// equivalence, enumerated as one partition per agent.
pub fn find_s5(f: &Fm, props: &[PropId], agents: &[AgentId]) -> Option<(KripkeModel, WorldId)> {
    for n in 1..=4usize {
        let worlds = world_names(n);
        let parts = partitions(n);
        let mut choice = vec![0usize; agents.len()];
        loop {
            let relations: BTreeMap<AgentId, BTreeSet<(WorldId, WorldId)>> = agents
                .iter()
                .enumerate()
                .map(|(ai, agent)| {
                    let blocks = &parts[choice[ai]];
                    let rel: BTreeSet<(WorldId, WorldId)> = (0..n)
                        .flat_map(|i| (0..n).map(move |j| (i, j)))
                        .filter(|(i, j)| blocks[*i] == blocks[*j])
                        .map(|(i, j)| (worlds[i], worlds[j]))
                        .collect();
                    (*agent, rel)
                })
                .collect();
            let val_total: u64 = 1 << (n * props.len());
            for val_bits in 0..val_total {
                let valuation: BTreeMap<WorldId, BTreeSet<PropId>> = worlds
                    .iter()
                    .enumerate()
                    .map(|(i, w)| {
                        let mask = if props.is_empty() {
                            0
                        } else {
                            (val_bits >> (i * props.len())) & ((1 << props.len()) - 1)
                        };
                        (*w, subset_of(props, mask))
                    })
                    .collect();
                let model =
                    KripkeModel::new(worlds.clone(), relations.clone(), valuation).unwrap();
                if let Some(w) = kripke_satisfied_at(
                    &model,
                    &TargetFormula::Modal(f, KripkeSemantics::S5C2),
                ) {
                    return Some((model, w));
                }
            }
            // advance the per-agent partition odometer
            let mut i = 0;
            loop {
                if i == choice.len() {
                    break;
                }
                choice[i] += 1;
                if choice[i] < parts.len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == choice.len() {
                break;
            }
        }
    }
    None
}
