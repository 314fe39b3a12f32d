//! Backward-direction probes for the rewritings, at tiny scale: when
//! bounded search finds a target-side model of the rewritten formula, a
//! bounded search must also find a source-side model of the original.
//! (The converse is covered by the witness round-trips; a double miss
//! asserts nothing, since bounded search is sound but incomplete.)
//!
//! The corpus per rewriting mixes formulas satisfiable in the source logic
//! with formulas that are unsatisfiable there precisely because of the
//! source frame conditions (symmetry, reflexivity, universality) — the
//! cases a too-weak rewriting would get wrong.

use eskmc::ids::{AgentId, PropId};
use eskmc::reductions::kripke::KripkeSemantics;
use eskmc::reductions::search::{find_cpdl, find_kripke, find_s5, find_weighted, SearchBudget};
use eskmc::reductions::{
    fresh_c, rewrite_ku2_to_lu, rewrite_lcu_to_cpdl, rewrite_ld_to_kdn, rewrite_s5c2_to_lc,
};
use eskmc::syntax::parse;

fn props(names: &[&str]) -> Vec<PropId> {
    names.iter().map(|n| PropId::new(n)).collect()
}

fn agents(names: &[&str]) -> Vec<AgentId> {
    names.iter().map(|n| AgentId::new(n)).collect()
}

#[test]
fn d_to_kdn_reverse() {
    let p = props(&["p0", "p1"]);
    let corpus = [
        // satisfiable over weighted models
        "K[a] p0",
        "(p0 & ~K[a] p0)",
        "D[a,b] p0",
        "(K[a] p0 & ~K[b] p0)",
        "(~K[a] ~p0 & ~p0)",
        // unsatisfiable there: symmetry violations
        "(p0 & ~K[a] ~K[a] ~p0)",
        "(p0 & ~D[a,b] ~D[a,b] ~p0)",
    ];
    for txt in corpus {
        let f = parse(txt).unwrap();
        let rho = rewrite_ld_to_kdn(&f).unwrap();
        let mut target_agents: Vec<AgentId> =
            eskmc::syntax::vocabulary(&f).agents.into_iter().collect();
        target_agents.push(fresh_c());
        let target = find_kripke(
            &rho,
            &p,
            &target_agents,
            KripkeSemantics::KDn,
            SearchBudget::small(),
        );
        if let Some((_, w)) = target {
            let source_agents: Vec<AgentId> =
                eskmc::syntax::vocabulary(&f).agents.into_iter().collect();
            let source = find_weighted(&f, &p, &source_agents, SearchBudget::default());
            assert!(
                source.is_some(),
                "{txt}: rewritten formula found satisfiable (at {w}) but no weighted source model found"
            );
        }
    }
}

#[test]
fn s5_reverse() {
    let p = props(&["p0"]);
    let ab = agents(&["a", "b"]);
    let corpus = [
        // S5-satisfiable
        "K[a] p0",
        "(p0 & ~K[a] p0)",
        "(C[a,b] p0 & ~K[a] ~p0)",
        // S5-unsatisfiable: factivity
        "(K[a] p0 & ~p0)",
        "(C[a,b] p0 & ~p0)",
        "K[a] (p0 & ~p0)",
    ];
    for txt in corpus {
        let f = parse(txt).unwrap();
        let rho = rewrite_s5c2_to_lc(&f).unwrap();
        // target side: weighted models of the rewritten formula
        let target = find_weighted(&rho, &p, &ab, SearchBudget::small());
        if target.is_some() {
            let source = find_s5(&f, &p, &ab);
            assert!(
                source.is_some(),
                "{txt}: rewritten formula weighted-satisfiable but no S5 source model found"
            );
        }
    }
}

#[test]
fn cpdl_reverse() {
    let p = props(&["p0"]);
    let ab = agents(&["a", "b"]);
    let corpus = [
        // L_C+U satisfiable
        "K[a] p0",
        "C[a,b] p0",
        "(A p0 -> K[a] p0)",
        "(p0 & ~C[a,b] p0)",
        // unsatisfiable: the universal modality dominates
        "(A p0 & ~p0)",
        "(A p0 & ~K[a] p0)",
    ];
    for txt in corpus {
        let f = parse(txt).unwrap();
        let rho = rewrite_lcu_to_cpdl(&f).unwrap();
        let target = find_cpdl(&rho, &p, &ab, SearchBudget::small());
        if target.is_some() {
            let source = find_weighted(&f, &p, &ab, SearchBudget::default());
            assert!(
                source.is_some(),
                "{txt}: PDL form satisfiable but no weighted source model found"
            );
        }
    }
}

#[test]
fn ku2_reverse() {
    let p = props(&["p0"]);
    let ab = agents(&["a", "b"]);
    let split_agents: Vec<AgentId> = ["f_1__a", "f_2__a", "f_1__b", "f_2__b"]
        .iter()
        .map(|n| AgentId::new(n))
        .collect();
    let target_props = props(&["p0", "f_p"]);
    let corpus = [
        // bimodal-satisfiable (no frame conditions at all)
        "K[a] p0",
        "(K[a] false & p0)",
        "(A p0 & K[a] p0)",
        "(~K[b] p0 & p0)",
        // unsatisfiable
        "(A p0 & ~p0)",
        "(A ~p0 & ~K[a] ~p0)",
    ];
    for txt in corpus {
        let f = parse(txt).unwrap();
        let rho = rewrite_ku2_to_lu(&f).unwrap();
        let target = find_weighted(&rho, &target_props, &split_agents, SearchBudget::small());
        if target.is_some() {
            let source = find_kripke(&f, &p, &ab, KripkeSemantics::KU2, SearchBudget::default());
            assert!(
                source.is_some(),
                "{txt}: rewritten formula weighted-satisfiable but no bimodal source model found"
            );
        }
    }
}

/// The probes are not vacuous: each corpus has at least one formula where
/// the target search actually finds a model.
#[test]
fn probes_have_positive_instances() {
    let p = props(&["p0"]);
    let a = agents(&["a"]);
    let f = parse("(p0 & ~K[a] p0)").unwrap();

    let rho = rewrite_ld_to_kdn(&f).unwrap();
    let mut with_c = a.clone();
    with_c.push(fresh_c());
    assert!(find_kripke(
        &rho,
        &p,
        &with_c,
        KripkeSemantics::KDn,
        SearchBudget::small()
    )
    .is_some());

    let rho = rewrite_s5c2_to_lc(&f).unwrap();
    assert!(find_weighted(&rho, &p, &a, SearchBudget::small()).is_some());

    let rho = rewrite_lcu_to_cpdl(&f).unwrap();
    assert!(find_cpdl(&rho, &p, &a, SearchBudget::small()).is_some());

    let rho = rewrite_ku2_to_lu(&f).unwrap();
    let splits = agents(&["f_1__a", "f_2__a"]);
    assert!(find_weighted(&rho, &props(&["p0", "f_p"]), &splits, SearchBudget::small()).is_some());
}
