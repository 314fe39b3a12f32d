//! Shared deterministic generators for the integration suites: random
//! weighted models (desk scale), random Kripke/S5 models, and random
//! formulas per input language.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use eskmc::ids::{AgentId, Group, PropId, SkillId, WorldId};
use eskmc::model::{EdgeEntry, WeightedModel};
use eskmc::reductions::kripke::KripkeModel;
use eskmc::skill::{Family, SkillValue};
use eskmc::syntax::{build, Fm};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn agents(names: &[&str]) -> Vec<AgentId> {
    names.iter().map(|n| AgentId::new(n)).collect()
}

pub fn props(names: &[&str]) -> Vec<PropId> {
    names.iter().map(|n| PropId::new(n)).collect()
}

pub fn skills(names: &[&str]) -> Vec<SkillId> {
    names.iter().map(|n| SkillId::new(n)).collect()
}

fn random_subset<T: Copy>(rng: &mut ChaCha8Rng, pool: &[T]) -> BTreeSet<T>
where
    T: Ord,
{
    pool.iter()
        .copied()
        .filter(|_| rng.gen_bool(0.5))
        .collect()
}

/// A random classical weighted model with up to `max_worlds` worlds and up
/// to `max_skills` skills; diagonals keep the full default.
pub fn random_model(
    rng: &mut ChaCha8Rng,
    max_worlds: usize,
    max_skills: usize,
    agent_pool: &[AgentId],
    prop_pool: &[PropId],
) -> WeightedModel {
    let n = rng.gen_range(1..=max_worlds);
    let k = rng.gen_range(0..=max_skills);
    let worlds: Vec<WorldId> = (0..n).map(|i| WorldId::new(&format!("w{i}"))).collect();
    let skill_pool: Vec<SkillId> = (0..k).map(|i| SkillId::new(&format!("t{i}"))).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let label = random_subset(rng, &skill_pool);
            if !label.is_empty() {
                edges.push(EdgeEntry {
                    between: (worlds[i], worlds[j]),
                    value: SkillValue::Classical(label),
                });
            }
        }
    }
    let capabilities: BTreeMap<AgentId, SkillValue> = agent_pool
        .iter()
        .map(|a| (*a, SkillValue::Classical(random_subset(rng, &skill_pool))))
        .collect();
    let valuation: BTreeMap<WorldId, BTreeSet<PropId>> = worlds
        .iter()
        .map(|w| (*w, random_subset(rng, prop_pool)))
        .collect();
    WeightedModel::new(
        worlds,
        skill_pool,
        Family::Classical,
        edges,
        capabilities,
        valuation,
    )
    .expect("generated model is structurally valid")
}

/// A random Kripke model (arbitrary relations) over up to `max_worlds`.
pub fn random_kripke(
    rng: &mut ChaCha8Rng,
    max_worlds: usize,
    agent_pool: &[AgentId],
    prop_pool: &[PropId],
) -> KripkeModel {
    let n = rng.gen_range(1..=max_worlds);
    let worlds: Vec<WorldId> = (0..n).map(|i| WorldId::new(&format!("w{i}"))).collect();
    let relations: BTreeMap<AgentId, BTreeSet<(WorldId, WorldId)>> = agent_pool
        .iter()
        .map(|a| {
            let rel: BTreeSet<(WorldId, WorldId)> = worlds
                .iter()
                .flat_map(|x| worlds.iter().map(move |y| (*x, *y)))
                .filter(|_| rng.gen_bool(0.4))
                .collect();
            (*a, rel)
        })
        .collect();
    let valuation: BTreeMap<WorldId, BTreeSet<PropId>> = worlds
        .iter()
        .map(|w| (*w, random_subset(rng, prop_pool)))
        .collect();
    KripkeModel::new(worlds, relations, valuation).expect("generated kripke model is valid")
}

/// A random S5 model: one random partition per agent.
pub fn random_s5(
    rng: &mut ChaCha8Rng,
    max_worlds: usize,
    agent_pool: &[AgentId],
    prop_pool: &[PropId],
) -> KripkeModel {
    let n = rng.gen_range(1..=max_worlds);
    let worlds: Vec<WorldId> = (0..n).map(|i| WorldId::new(&format!("w{i}"))).collect();
    let relations: BTreeMap<AgentId, BTreeSet<(WorldId, WorldId)>> = agent_pool
        .iter()
        .map(|a| {
            // random restricted-growth string = random partition
            let mut blocks = vec![0usize; n];
            let mut maxb = 0;
            for b in blocks.iter_mut().skip(1) {
                *b = rng.gen_range(0..=maxb + 1);
                maxb = maxb.max(*b);
            }
            let rel: BTreeSet<(WorldId, WorldId)> = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|(i, j)| blocks[*i] == blocks[*j])
                .map(|(i, j)| (worlds[i], worlds[j]))
                .collect();
            (*a, rel)
        })
        .collect();
    let valuation: BTreeMap<WorldId, BTreeSet<PropId>> = worlds
        .iter()
        .map(|w| (*w, random_subset(rng, prop_pool)))
        .collect();
    KripkeModel::new(worlds, relations, valuation).expect("generated S5 model is valid")
}

/// Which operators a random formula may use.
#[derive(Clone, Copy)]
pub struct Lang {
    pub k: bool,
    pub c: bool,
    pub d: bool,
    pub e: bool,
    pub f: bool,
    pub univ: bool,
    pub updates: bool,
    pub quantifiers: bool,
}

impl Lang {
    pub const FULL: Lang = Lang {
        k: true,
        c: true,
        d: true,
        e: true,
        f: true,
        univ: false,
        updates: true,
        quantifiers: true,
    };
    pub const LD: Lang = Lang {
        k: true,
        c: false,
        d: true,
        e: false,
        f: false,
        univ: false,
        updates: false,
        quantifiers: false,
    };
    pub const LDEF: Lang = Lang {
        d: true,
        e: true,
        f: true,
        ..Lang::LD
    };
    pub const LCDEFU: Lang = Lang {
        c: true,
        univ: true,
        ..Lang::LDEF
    };
    pub const LC: Lang = Lang {
        c: true,
        d: false,
        ..Lang::LD
    };
    pub const LCU: Lang = Lang {
        univ: true,
        ..Lang::LC
    };
    pub const LU: Lang = Lang {
        univ: true,
        c: false,
        ..Lang::LC
    };
    pub const L: Lang = Lang {
        d: false,
        ..Lang::LD
    };
}

/// A random formula of modal depth at most `depth` over the given pools.
pub fn random_formula(
    rng: &mut ChaCha8Rng,
    depth: usize,
    lang: Lang,
    agent_pool: &[AgentId],
    prop_pool: &[PropId],
    skill_pool: &[SkillId],
) -> Fm {
    let atom = |rng: &mut ChaCha8Rng| -> Fm {
        match rng.gen_range(0..8) {
            0 => build::top(),
            1 => build::bot(),
            _ => build::atom_id(prop_pool[rng.gen_range(0..prop_pool.len())]),
        }
    };
    if depth == 0 {
        return atom(rng);
    }
    let group = |rng: &mut ChaCha8Rng| -> Group {
        let size = rng.gen_range(1..=agent_pool.len().min(3));
        let mut members: Vec<AgentId> = agent_pool.to_vec();
        members.shuffle(rng);
        Group::new(members.into_iter().take(size)).unwrap()
    };
    let skill_set = |rng: &mut ChaCha8Rng| -> SkillValue {
        SkillValue::Classical(random_subset(rng, skill_pool))
    };
    let mut options: Vec<u8> = vec![0, 1, 2, 3, 4]; // atom, not, implies, and, or
    if lang.k {
        options.push(5);
    }
    if lang.c {
        options.push(6);
    }
    if lang.d {
        options.push(7);
    }
    if lang.e {
        options.push(8);
    }
    if lang.f {
        options.push(9);
    }
    if lang.updates {
        options.extend([10, 11, 12, 13]);
    }
    if lang.quantifiers {
        options.extend([14, 15, 16]);
    }
    if lang.univ {
        options.push(17);
    }
    let agent = |rng: &mut ChaCha8Rng| agent_pool[rng.gen_range(0..agent_pool.len())];
    let rec = |rng: &mut ChaCha8Rng| {
        random_formula(rng, depth - 1, lang, agent_pool, prop_pool, skill_pool)
    };
    match options[rng.gen_range(0..options.len())] {
        0 => atom(rng),
        1 => build::not(rec(rng)),
        2 => build::implies(rec(rng), rec(rng)),
        3 => build::and(rec(rng), rec(rng)),
        4 => build::or(rec(rng), rec(rng)),
        5 => build::k(agent(rng), rec(rng)),
        6 => build::c(group(rng), rec(rng)),
        7 => build::d(group(rng), rec(rng)),
        8 => build::e(group(rng), rec(rng)),
        9 => build::fk(group(rng), rec(rng)),
        10 => build::up(agent(rng), skill_set(rng), rec(rng)),
        11 => build::down(agent(rng), skill_set(rng), rec(rng)),
        12 => build::set_to(agent(rng), skill_set(rng), rec(rng)),
        13 => {
            let l = agent(rng);
            let s = agent(rng);
            build::learn(l, s, rec(rng))
        }
        14 => build::bp(agent(rng), rec(rng)),
        15 => build::bm(agent(rng), rec(rng)),
        16 => build::ba(agent(rng), rec(rng)),
        _ => build::univ(rec(rng)),
    }
}

/// Random formula whose symbol count lands within the given bounds
/// (retrying with fresh draws).
pub fn random_formula_with_length(
    rng: &mut ChaCha8Rng,
    lang: Lang,
    agent_pool: &[AgentId],
    prop_pool: &[PropId],
    min_len: usize,
    max_len: usize,
) -> Fm {
    loop {
        let depth = rng.gen_range(1..=4);
        let f = random_formula(rng, depth, lang, agent_pool, prop_pool, &[]);
        let len = eskmc::syntax::length(&eskmc::syntax::desugar(&f));
        if len >= min_len && len <= max_len {
            return f;
        }
    }
}
