//! Long-running randomized cross-check of the memoized checker against the
//! naive reference evaluator, beyond what the test suite runs by default.
//!
//!     cargo run --release -p eskmc --example stress [pairs] [depth]

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use eskmc::checker::{self, oracle};
use eskmc::ids::{AgentId, Group, PropId, SkillId, WorldId};
use eskmc::model::{EdgeEntry, WeightedModel};
use eskmc::skill::{Family, SkillValue};
use eskmc::syntax::{build, Fm};

fn random_subset<T: Copy + Ord>(rng: &mut ChaCha8Rng, pool: &[T]) -> BTreeSet<T> {
    pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect()
}

fn random_model(rng: &mut ChaCha8Rng, agents: &[AgentId], props: &[PropId]) -> WeightedModel {
    let n = rng.gen_range(1..=5);
    let k = rng.gen_range(0..=3);
    let worlds: Vec<WorldId> = (0..n).map(|i| WorldId::new(&format!("w{i}"))).collect();
    let pool: Vec<SkillId> = (0..k).map(|i| SkillId::new(&format!("t{i}"))).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        // sometimes break self-access, as the geography models do
        if rng.gen_bool(0.2) {
            edges.push(EdgeEntry {
                between: (worlds[i], worlds[i]),
                value: SkillValue::classical([]),
            });
        }
        for j in (i + 1)..n {
            let label = random_subset(rng, &pool);
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
        .map(|a| (*a, SkillValue::Classical(random_subset(rng, &pool))))
        .collect();
    let valuation: BTreeMap<WorldId, BTreeSet<PropId>> = worlds
        .iter()
        .map(|w| (*w, random_subset(rng, props)))
        .collect();
    WeightedModel::new(worlds, pool, Family::Classical, edges, capabilities, valuation).unwrap()
}

fn random_formula(
    rng: &mut ChaCha8Rng,
    depth: usize,
    agents: &[AgentId],
    props: &[PropId],
    skills: &[SkillId],
) -> Fm {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..6) {
            0 => build::top(),
            1 => build::bot(),
            _ => build::atom_id(props[rng.gen_range(0..props.len())]),
        };
    }
    let agent = |rng: &mut ChaCha8Rng| agents[rng.gen_range(0..agents.len())];
    let group = |rng: &mut ChaCha8Rng| {
        let mut m: Vec<AgentId> = agents.to_vec();
        m.shuffle(rng);
        Group::new(m.into_iter().take(rng.gen_range(1..=agents.len()))).unwrap()
    };
    let sset =
        |rng: &mut ChaCha8Rng| SkillValue::Classical(random_subset(rng, skills));
    let rec = |rng: &mut ChaCha8Rng| random_formula(rng, depth - 1, agents, props, skills);
    match rng.gen_range(0..18) {
        0 => build::not(rec(rng)),
        1 => build::implies(rec(rng), rec(rng)),
        2 => build::and(rec(rng), rec(rng)),
        3 => build::or(rec(rng), rec(rng)),
        4 => build::iff(rec(rng), rec(rng)),
        5 | 6 => build::k(agent(rng), rec(rng)),
        7 => build::c(group(rng), rec(rng)),
        8 => build::d(group(rng), rec(rng)),
        9 => build::e(group(rng), rec(rng)),
        10 => build::fk(group(rng), rec(rng)),
        11 => build::up(agent(rng), sset(rng), rec(rng)),
        12 => build::down(agent(rng), sset(rng), rec(rng)),
        13 => build::set_to(agent(rng), sset(rng), rec(rng)),
        14 => build::learn(agent(rng), agent(rng), rec(rng)),
        15 => build::bp(agent(rng), rec(rng)),
        16 => build::bm(agent(rng), rec(rng)),
        _ => build::ba(agent(rng), rec(rng)),
    }
}

fn main() {
    let mut args = std::env::args().skip(1);
    let pairs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let depth: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let agents: Vec<AgentId> = ["a", "b", "c"].iter().map(|n| AgentId::new(n)).collect();
    let props: Vec<PropId> = ["p0", "p1", "p2"].iter().map(|n| PropId::new(n)).collect();
    let skills: Vec<SkillId> = ["t0", "t1", "t2"].iter().map(|n| SkillId::new(n)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(0xDEC0DE);
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    for i in 0..pairs {
        let m = random_model(&mut rng, &agents, &props);
        let f = random_formula(&mut rng, depth, &agents, &props, &skills);
        for w in m.worlds() {
            let fast = checker::check(&m, *w, &f).unwrap();
            let slow = oracle::check_naive(&m, *w, &f).unwrap();
            checked += 1;
            if fast != slow {
                mismatches += 1;
                eprintln!("MISMATCH at {w}: {f}");
                eprintln!("model: {}", m.to_json());
            }
        }
        if (i + 1) % 500 == 0 {
            println!("... {} pairs, {} judgments, {} mismatches", i + 1, checked, mismatches);
        }
    }
    println!("done: {pairs} pairs, {checked} judgments, {mismatches} mismatches");
    std::process::exit(if mismatches == 0 { 0 } else { 1 });
}
