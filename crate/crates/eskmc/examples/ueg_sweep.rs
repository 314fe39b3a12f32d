//! Exhaustive geography sweep at the harness bound: every rooted graph
//! with up to 5 nodes and at most 6 edges, minimax vs model checker.
//!
//!     cargo run --release -p eskmc --example ueg_sweep

use eskmc::ueg::{equivalence_check, UegGraph, Winner};

fn main() {
    let mut instances = 0usize;
    let mut wins = 0usize;
    let start = std::time::Instant::now();
    for n in 1..=5usize {
        let nodes: Vec<String> = (1..=n).map(|i| format!("d{i}")).collect();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((nodes[i].clone(), nodes[j].clone()));
            }
        }
        for mask in 0u32..(1 << pairs.len()) {
            if mask.count_ones() > 6 {
                continue;
            }
            let edges: Vec<(String, String)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, e)| e.clone())
                .collect();
            for root in &nodes {
                let g = UegGraph::new(nodes.clone(), edges.clone(), root).unwrap();
                let rep = equivalence_check(&g).unwrap();
                if !rep.agree {
                    eprintln!(
                        "DISAGREEMENT: n={n} mask={mask:b} root={root}: {} vs {}",
                        rep.winner, rep.model_check
                    );
                    std::process::exit(1);
                }
                instances += 1;
                if rep.winner == Winner::PlayerI {
                    wins += 1;
                }
            }
        }
        println!(
            "n={n}: cumulative {instances} instances, {wins} player-I wins, {:?}",
            start.elapsed()
        );
    }
    println!("done: {instances} rooted graphs, 100% agreement, {:?}", start.elapsed());
}
