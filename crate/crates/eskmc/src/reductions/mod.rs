//! Satisfiability-preserving formula rewritings into target logics, the
//! target-side checkers, and executable witness-model constructions.
//!
//! Each rewriting conjoins the input with schema instances over the
//! formula's closure (so the target model is forced to behave like a source
//! model on every formula that matters) and then renames modalities:
//!
//! - `D` itself absorbs individual knowledge via a silent agent `c`
//!   ([`rewrite_ld_to_kdn`]);
//! - mutual/field knowledge become distributed knowledge over designated
//!   agents ([`rewrite_ldef_to_ld`]);
//! - with common knowledge and the universal modality available, the same
//!   idea needs no `K_c` towers ([`rewrite_lcdefu_to_lcu`]);
//! - two-agent S5 reduces to the weighted logic by spelling out
//!   transitivity and reflexivity schemas ([`rewrite_s5c2_to_lc`]);
//! - common knowledge compiles to PDL star programs
//!   ([`rewrite_lcu_to_cpdl`]);
//! - the bimodal logic with a universal modality embeds via agent splitting
//!   and a marker atom ([`rewrite_ku2_to_lu`]).
//!
//! Fresh vocabulary lives in the reserved `f_` namespace, which the
//! user-facing parser rejects, so generated names never collide with input.

pub mod cpdl;
pub mod kripke;
pub mod search;
pub mod witness;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ids::{AgentId, Group, PropId};
use crate::syntax::{build, closure, desugar, length, vocabulary, Fm, Formula};

use cpdl::{build as cb, Cf};

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("formula is outside the {language} input language: contains {found}")]
    Language {
        language: &'static str,
        found: &'static str,
    },
    #[error("input vocabulary uses the reserved name {0:?}")]
    ReservedName(String),
    #[error("{language} admits at most {max} agents; found {found}")]
    TooManyAgents {
        language: &'static str,
        max: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rewriting {
    /// Distributed-knowledge logic into multi-agent K with D.
    DToKdn,
    /// Mutual/distributed/field knowledge into D alone.
    DefToD,
    /// Everything but updates/quantifiers into common knowledge + U.
    CdefuToCu,
    /// Two-agent S5 with common knowledge into the weighted C logic.
    S5c2ToC,
    /// Common knowledge + U into PDL with a universe program.
    CuToCpdl,
    /// Bimodal K + U into the weighted logic with U.
    Ku2ToLu,
}

impl Rewriting {
    pub fn name(self) -> &'static str {
        match self {
            Rewriting::DToKdn => "d-to-kdn",
            Rewriting::DefToD => "def-to-d",
            Rewriting::CdefuToCu => "cdefu-to-cu",
            Rewriting::S5c2ToC => "s5c2-to-c",
            Rewriting::CuToCpdl => "cu-to-cpdl",
            Rewriting::Ku2ToLu => "ku2-to-lu",
        }
    }

    pub fn from_name(name: &str) -> Option<Rewriting> {
        Some(match name {
            "d-to-kdn" => Rewriting::DToKdn,
            "def-to-d" => Rewriting::DefToD,
            "cdefu-to-cu" => Rewriting::CdefuToCu,
            "s5c2-to-c" => Rewriting::S5c2ToC,
            "cu-to-cpdl" => Rewriting::CuToCpdl,
            "ku2-to-lu" => Rewriting::Ku2ToLu,
            _ => return None,
        })
    }

    pub const ALL: [Rewriting; 6] = [
        Rewriting::DToKdn,
        Rewriting::DefToD,
        Rewriting::CdefuToCu,
        Rewriting::S5c2ToC,
        Rewriting::CuToCpdl,
        Rewriting::Ku2ToLu,
    ];
}

/// A rewritten formula: most targets stay in the weighted syntax, the PDL
/// target has its own.
#[derive(Debug, Clone)]
pub enum Rewritten {
    Formula(Fm),
    Cpdl(Cf),
}

impl Rewritten {
    pub fn length(&self) -> usize {
        match self {
            Rewritten::Formula(f) => length(f),
            Rewritten::Cpdl(f) => cpdl::cpdl_length(f),
        }
    }
}

impl std::fmt::Display for Rewritten {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rewritten::Formula(f) => write!(out, "{}", f),
            Rewritten::Cpdl(f) => write!(out, "{}", f),
        }
    }
}

pub fn rewrite(kind: Rewriting, f: &Fm) -> Result<Rewritten, ReduceError> {
    Ok(match kind {
        Rewriting::DToKdn => Rewritten::Formula(rewrite_ld_to_kdn(f)?),
        Rewriting::DefToD => Rewritten::Formula(rewrite_ldef_to_ld(f)?),
        Rewriting::CdefuToCu => Rewritten::Formula(rewrite_lcdefu_to_lcu(f)?),
        Rewriting::S5c2ToC => Rewritten::Formula(rewrite_s5c2_to_lc(f)?),
        Rewriting::CuToCpdl => Rewritten::Cpdl(rewrite_lcu_to_cpdl(f)?),
        Rewriting::Ku2ToLu => Rewritten::Formula(rewrite_ku2_to_lu(f)?),
    })
}

// ---------------------------------------------------------------------
// fresh-vocabulary scheme
// ---------------------------------------------------------------------

/// Designated agent for `K_a`.
pub fn f_k(a: AgentId) -> AgentId {
    AgentId::new(&format!("f_K__{}", a))
}

/// Designated agent for a group operator (`D`/`E`/`F`).
pub fn f_group(op: char, g: &Group) -> AgentId {
    let mut name = format!("f_{op}_");
    for m in g.members() {
        name.push('_');
        name.push_str(m.as_str());
    }
    AgentId::new(&name)
}

/// The silent helper agent used to compress conjunct towers.
pub fn fresh_c() -> AgentId {
    AgentId::new("f_c")
}

/// The marker atom of the bimodal embedding.
pub fn fresh_p() -> PropId {
    PropId::new("f_p")
}

/// The two split copies of an agent in the bimodal embedding.
pub fn split_agent(a: AgentId, half: u8) -> AgentId {
    AgentId::new(&format!("f_{half}__{a}"))
}

/// The designated group standing for `C_G`: one `f(K_a)` per member.
pub fn f_c_group(g: &Group) -> Group {
    Group::new(g.members().iter().map(|a| f_k(*a))).expect("groups are nonempty")
}

fn reserved_check(f: &Fm) -> Result<(), ReduceError> {
    let v = vocabulary(f);
    for a in &v.agents {
        if a.as_str().starts_with("f_") {
            return Err(ReduceError::ReservedName(a.as_str().to_owned()));
        }
    }
    for p in &v.props {
        if p.as_str().starts_with("f_") {
            return Err(ReduceError::ReservedName(p.as_str().to_owned()));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------
// input-language checks (on desugared formulas)
// ---------------------------------------------------------------------

struct Allow {
    language: &'static str,
    k: bool,
    c: bool,
    d: bool,
    e: bool,
    f: bool,
    univ: bool,
}

fn language_check(f: &Formula, allow: &Allow) -> Result<(), ReduceError> {
    use Formula::*;
    let reject = |found: &'static str| -> Result<(), ReduceError> {
        Err(ReduceError::Language {
            language: allow.language,
            found,
        })
    };
    match f {
        Atom(_) | Top | Bot => {}
        Not(_) | Implies(..) | And(..) | Or(..) | Iff(..) => {}
        K(..) if allow.k => {}
        K(..) => reject("K")?,
        C(..) if allow.c => {}
        C(..) => reject("C")?,
        D(..) if allow.d => {}
        D(..) => reject("D")?,
        E(..) if allow.e => {}
        E(..) => reject("E")?,
        F(..) if allow.f => {}
        F(..) => reject("F")?,
        Univ(_) if allow.univ => {}
        Univ(_) => reject("the universal modality")?,
        Up(..) | Down(..) | SetTo(..) => reject("an update modality")?,
        Learn(..) => reject("a learn modality")?,
        BoxPlus(..) | BoxMinus(..) | BoxAny(..) => reject("a quantifier")?,
    }
    for ch in f.children() {
        language_check(ch, allow)?;
    }
    Ok(())
}

/// `K_c^i big` tower conjunction for i = 0..=depth.
fn kc_tower(c: AgentId, big: &Fm, depth: usize) -> Fm {
    let mut parts = Vec::with_capacity(depth + 1);
    let mut cur = big.clone();
    parts.push(cur.clone());
    for _ in 0..depth {
        cur = build::k(c, cur);
        parts.push(cur.clone());
    }
    build::conj(parts)
}

/// Groups written under `D` in a formula (not the singleton extension).
fn groups_under_d(f: &Formula) -> BTreeSet<Group> {
    let mut out = BTreeSet::new();
    fn walk(f: &Formula, out: &mut BTreeSet<Group>) {
        if let Formula::D(g, _) = f {
            out.insert(g.clone());
        }
        for ch in f.children() {
            walk(ch, out);
        }
    }
    walk(f, &mut out);
    out
}

// ---------------------------------------------------------------------
// L_D -> K^D_n
// ---------------------------------------------------------------------

/// Rewrites a K/D formula, satisfiable over weighted models, into one
/// satisfiable over arbitrary Kripke models with intersection-distributed
/// knowledge. `K_a` becomes `D_{a,c}` for a silent fresh agent `c`,
/// `D_G` becomes `D_{G ∪ {c}}`, and the conjoined schemas force symmetry
/// behaviour and the `D`-to-`K` bridges on the closure, repeated under a
/// `K_c` tower as deep as the original formula is long.
pub fn rewrite_ld_to_kdn(f: &Fm) -> Result<Fm, ReduceError> {
    reserved_check(f)?;
    let fd = desugar(f);
    language_check(
        &fd,
        &Allow {
            language: "L_D",
            k: true,
            c: false,
            d: true,
            e: false,
            f: false,
            univ: false,
        },
    )?;
    let c = fresh_c();
    let len = length(&fd);
    let voc = vocabulary(&fd);
    let mut agents: Vec<AgentId> = voc.agents.iter().copied().collect();
    agents.push(c);
    let groups: Vec<Group> = groups_under_d(&fd).into_iter().collect();

    fn rho_prime(f: &Fm, c: AgentId) -> Fm {
        use Formula::*;
        match &**f {
            K(a, g) => build::d(
                Group::new([*a, c]).unwrap(),
                rho_prime(g, c),
            ),
            D(gr, g) => {
                let extended =
                    Group::new(gr.members().iter().copied().chain([c])).unwrap();
                build::d(extended, rho_prime(g, c))
            }
            Atom(_) | Top | Bot => f.clone(),
            Not(g) => build::not(rho_prime(g, c)),
            Implies(a, b) => build::implies(rho_prime(a, c), rho_prime(b, c)),
            _ => unreachable!("language check admits only K/D/booleans"),
        }
    }

    let mut mu: Vec<Fm> = Vec::new();
    for psi in closure(&fd) {
        let rp = rho_prime(&psi, c);
        for a in &agents {
            // symmetry schema for K_a
            mu.push(build::and(
                build::implies(
                    rp.clone(),
                    build::k(*a, build::not(build::k(*a, build::not(rp.clone())))),
                ),
                build::implies(
                    build::not(build::k(*a, build::not(build::k(*a, rp.clone())))),
                    rp.clone(),
                ),
            ));
        }
        for g in &groups {
            // symmetry schema for D_G
            mu.push(build::and(
                build::implies(
                    rp.clone(),
                    build::d(g.clone(), build::not(build::d(g.clone(), build::not(rp.clone())))),
                ),
                build::implies(
                    build::not(build::d(
                        g.clone(),
                        build::not(build::d(g.clone(), rp.clone())),
                    )),
                    rp.clone(),
                ),
            ));
        }
        for a in &agents {
            mu.push(build::iff(
                build::d(Group::new([*a, c]).unwrap(), rp.clone()),
                build::k(*a, rp.clone()),
            ));
        }
        for g in &groups {
            let extended = Group::new(g.members().iter().copied().chain([c])).unwrap();
            mu.push(build::iff(
                build::d(extended, rp.clone()),
                build::d(g.clone(), rp.clone()),
            ));
        }
    }
    let big = build::conj(mu);
    Ok(build::and(rho_prime(&fd, c), kc_tower(c, &big, len)))
}

// ---------------------------------------------------------------------
// shared seven-clause schema for the DEF rewritings
// ---------------------------------------------------------------------

/// The interaction schema instances between K/D/E/F over a closure-like
/// set of formulas: monotonicity of D and F along group inclusion, the
/// F-to-K-to-D chain, the E conjunction law, and the collapse of all three
/// group operators on singleton groups.
fn def_schema(psis: &[Fm], agents: &BTreeSet<AgentId>, groups: &BTreeSet<Group>) -> Vec<Fm> {
    let mut mu = Vec::new();
    for psi in psis {
        for g in groups {
            for a in g.members() {
                mu.push(build::implies(
                    build::fk(g.clone(), psi.clone()),
                    build::k(*a, psi.clone()),
                ));
                mu.push(build::implies(
                    build::k(*a, psi.clone()),
                    build::d(g.clone(), psi.clone()),
                ));
            }
        }
        for g in groups {
            for h in groups {
                if g != h && g.is_subset(h) {
                    mu.push(build::implies(
                        build::fk(h.clone(), psi.clone()),
                        build::fk(g.clone(), psi.clone()),
                    ));
                    mu.push(build::implies(
                        build::d(g.clone(), psi.clone()),
                        build::d(h.clone(), psi.clone()),
                    ));
                }
            }
        }
        for i in groups {
            for j in groups {
                if i.intersects(j) {
                    mu.push(build::implies(
                        build::fk(i.clone(), psi.clone()),
                        build::d(j.clone(), psi.clone()),
                    ));
                }
            }
        }
        for i in groups {
            mu.push(build::iff(
                build::e(i.clone(), psi.clone()),
                build::conj(
                    i.members()
                        .iter()
                        .map(|b| build::k(*b, psi.clone()))
                        .collect::<Vec<_>>(),
                ),
            ));
        }
        for a in agents {
            let single = Group::singleton(*a);
            mu.push(build::and(
                build::iff(build::d(single.clone(), psi.clone()), build::k(*a, psi.clone())),
                build::and(
                    build::iff(build::e(single.clone(), psi.clone()), build::k(*a, psi.clone())),
                    build::iff(build::fk(single.clone(), psi.clone()), build::k(*a, psi.clone())),
                ),
            ));
        }
    }
    mu
}

// ---------------------------------------------------------------------
// L_DEF -> L_D
// ---------------------------------------------------------------------

/// Rewrites a K/D/E/F formula into a distributed-knowledge-only formula
/// over the weighted semantics: each operator occurrence is replaced by
/// `D_{c, f(op)}` for its designated agent, and the seven-clause schema is
/// conjoined under a `K_c` tower.
pub fn rewrite_ldef_to_ld(f: &Fm) -> Result<Fm, ReduceError> {
    reserved_check(f)?;
    let fd = desugar(f);
    language_check(
        &fd,
        &Allow {
            language: "L_DEF",
            k: true,
            c: false,
            d: true,
            e: true,
            f: true,
            univ: false,
        },
    )?;
    let c = fresh_c();
    let len = length(&fd);
    let voc = vocabulary(&fd);

    let psis = closure(&fd);
    let mu = def_schema(&psis, &voc.agents, &voc.groups);
    let big = build::conj(mu);
    let rho1 = build::and(fd, kc_tower(c, &big, len));
    Ok(rho23(&rho1, c))
}

/// Steps 2–3 of the DEF rewriting: rename every knowledge operator to a
/// two-member distributed operator `D_{c, f(op)}`; `K_c` itself stays.
fn rho23(f: &Fm, c: AgentId) -> Fm {
    use Formula::*;
    let pair = |x: AgentId| Group::new([c, x]).unwrap();
    match &**f {
        K(a, g) if *a != c => build::d(pair(f_k(*a)), rho23(g, c)),
        K(a, g) => build::k(*a, rho23(g, c)),
        D(gr, g) => build::d(pair(f_group('D', gr)), rho23(g, c)),
        E(gr, g) => build::d(pair(f_group('E', gr)), rho23(g, c)),
        F(gr, g) => build::d(pair(f_group('F', gr)), rho23(g, c)),
        Atom(_) | Top | Bot => f.clone(),
        Not(g) => build::not(rho23(g, c)),
        Implies(a, b) => build::implies(rho23(a, c), rho23(b, c)),
        And(a, b) => build::and(rho23(a, c), rho23(b, c)),
        Or(a, b) => build::or(rho23(a, c), rho23(b, c)),
        Iff(a, b) => build::iff(rho23(a, c), rho23(b, c)),
        _ => unreachable!("language check admits only K/D/E/F/booleans"),
    }
}

// ---------------------------------------------------------------------
// L_CDEF+U -> L_C+U
// ---------------------------------------------------------------------

/// Rewrites the full static group-knowledge language (with the universal
/// modality) into common knowledge + U: `K`/`D`/`E`/`F` become individual
/// knowledge of designated agents, `C_G` becomes `C` over the designated
/// copies of G's members, and the schema is asserted once under `U`.
pub fn rewrite_lcdefu_to_lcu(f: &Fm) -> Result<Fm, ReduceError> {
    reserved_check(f)?;
    let fd = desugar(f);
    language_check(
        &fd,
        &Allow {
            language: "L_CDEF+U",
            k: true,
            c: true,
            d: true,
            e: true,
            f: true,
            univ: true,
        },
    )?;
    let voc = vocabulary(&fd);
    let mut psis = closure(&fd);
    let seen: BTreeSet<Fm> = psis.iter().cloned().collect();
    for chi in closure(&fd) {
        for g in &voc.groups {
            let cg = build::c(g.clone(), chi.clone());
            if !seen.contains(&cg) {
                psis.push(cg);
            }
        }
    }
    let mu = def_schema(&psis, &voc.agents, &voc.groups);
    let rho1 = build::and(fd, build::univ(build::conj(mu)));
    Ok(rho234(&rho1))
}

/// Steps 2–4 of the CDEF+U rewriting.
fn rho234(f: &Fm) -> Fm {
    use Formula::*;
    match &**f {
        K(a, g) => build::k(f_k(*a), rho234(g)),
        D(gr, g) => build::k(f_group('D', gr), rho234(g)),
        E(gr, g) => build::k(f_group('E', gr), rho234(g)),
        F(gr, g) => build::k(f_group('F', gr), rho234(g)),
        C(gr, g) => build::c(f_c_group(gr), rho234(g)),
        Atom(_) | Top | Bot => f.clone(),
        Not(g) => build::not(rho234(g)),
        Implies(a, b) => build::implies(rho234(a), rho234(b)),
        And(a, b) => build::and(rho234(a), rho234(b)),
        Or(a, b) => build::or(rho234(a), rho234(b)),
        Iff(a, b) => build::iff(rho234(a), rho234(b)),
        Univ(g) => build::univ(rho234(g)),
        _ => unreachable!("language check admits only K/C/D/E/F/U/booleans"),
    }
}

// ---------------------------------------------------------------------
// S5^C_2 -> L_C
// ---------------------------------------------------------------------

/// Rewrites a two-agent S5 formula (K and C only) into the weighted common
/// knowledge logic by conjoining the positive-introspection and factivity
/// schemas over the closure, asserted both at the evaluation world and as
/// common knowledge of the pair.
pub fn rewrite_s5c2_to_lc(f: &Fm) -> Result<Fm, ReduceError> {
    reserved_check(f)?;
    let fd = desugar(f);
    language_check(
        &fd,
        &Allow {
            language: "two-agent L_C",
            k: true,
            c: true,
            d: false,
            e: false,
            f: false,
            univ: false,
        },
    )?;
    let voc = vocabulary(&fd);
    if voc.agents.len() > 2 {
        return Err(ReduceError::TooManyAgents {
            language: "two-agent L_C",
            max: 2,
            found: voc.agents.len(),
        });
    }
    let agents: Vec<AgentId> = voc.agents.iter().copied().collect();
    if agents.is_empty() {
        return Ok(fd);
    }
    // closure extended with C_G chi for every nonempty G over the agents
    let mut subgroups: Vec<Group> = vec![];
    for i in 0..agents.len() {
        subgroups.push(Group::singleton(agents[i]));
        for j in (i + 1)..agents.len() {
            subgroups.push(Group::new([agents[i], agents[j]]).unwrap());
        }
    }
    let mut psis = closure(&fd);
    let seen: BTreeSet<Fm> = psis.iter().cloned().collect();
    for chi in closure(&fd) {
        for g in &subgroups {
            let cg = build::c(g.clone(), chi.clone());
            if !seen.contains(&cg) {
                psis.push(cg);
            }
        }
    }
    let mut mu = Vec::new();
    for psi in &psis {
        for i in &agents {
            mu.push(build::implies(
                build::k(*i, psi.clone()),
                build::k(*i, build::k(*i, psi.clone())),
            ));
            mu.push(build::implies(build::k(*i, psi.clone()), psi.clone()));
        }
    }
    let big = build::conj(mu);
    let everyone = Group::new(agents.clone()).unwrap();
    Ok(build::and(
        fd,
        build::and(big.clone(), build::c(everyone, big)),
    ))
}

// ---------------------------------------------------------------------
// L_C+U -> CPDL
// ---------------------------------------------------------------------

/// Rewrites a common-knowledge + U formula into PDL with a universe
/// program: `K_a` becomes `[a]`, `C_G` becomes `[(a_1 + ... + a_k);(a_1 +
/// ... + a_k)*]`, `U` becomes `[univ]`, with the symmetry schema asserted
/// under `[univ]`.
pub fn rewrite_lcu_to_cpdl(f: &Fm) -> Result<Cf, ReduceError> {
    reserved_check(f)?;
    let fd = desugar(f);
    language_check(
        &fd,
        &Allow {
            language: "L_C+U",
            k: true,
            c: true,
            d: false,
            e: false,
            f: false,
            univ: true,
        },
    )?;
    let voc = vocabulary(&fd);
    let mut groups_in_f: BTreeSet<Group> = BTreeSet::new();
    fn walk_groups(f: &Formula, out: &mut BTreeSet<Group>) {
        if let Formula::C(g, _) = f {
            out.insert(g.clone());
        }
        for ch in f.children() {
            walk_groups(ch, out);
        }
    }
    walk_groups(&fd, &mut groups_in_f);

    let mut psis = closure(&fd);
    let seen: BTreeSet<Fm> = psis.iter().cloned().collect();
    for theta in closure(&fd) {
        for g in &groups_in_f {
            let cg = build::c(g.clone(), theta.clone());
            if !seen.contains(&cg) {
                psis.push(cg);
            }
        }
    }
    let mut mu = Vec::new();
    for psi in &psis {
        for a in &voc.agents {
            mu.push(build::implies(
                psi.clone(),
                build::k(*a, build::not(build::k(*a, build::not(psi.clone())))),
            ));
            mu.push(build::implies(
                build::not(build::k(*a, build::not(build::k(*a, psi.clone())))),
                psi.clone(),
            ));
        }
    }
    let rho1 = build::and(fd, build::univ(build::conj(mu)));
    Ok(to_cpdl(&rho1))
}

/// Translation of an L_C+U formula into PDL syntax.
pub fn to_cpdl(f: &Fm) -> Cf {
    use Formula::*;
    match &**f {
        Atom(p) => std::sync::Arc::new(cpdl::CpdlFormula::Atom(*p)),
        Top => cb::top(),
        Bot => cb::bot(),
        Not(g) => cb::not(to_cpdl(g)),
        Implies(a, b) => cb::implies(to_cpdl(a), to_cpdl(b)),
        And(a, b) => cb::and(to_cpdl(a), to_cpdl(b)),
        Or(a, b) => cb::implies(cb::not(to_cpdl(a)), to_cpdl(b)),
        Iff(a, b) => {
            let (ta, tb) = (to_cpdl(a), to_cpdl(b));
            cb::and(
                cb::implies(ta.clone(), tb.clone()),
                cb::implies(tb, ta),
            )
        }
        K(a, g) => cb::boxed(cb::agent(*a), to_cpdl(g)),
        C(gr, g) => {
            let mut members = gr.members().iter();
            let first = cb::agent(*members.next().expect("groups are nonempty"));
            let any = members.fold(first, |acc, a| cb::union(acc, cb::agent(*a)));
            cb::boxed(cb::seq(any.clone(), cb::star(any)), to_cpdl(g))
        }
        Univ(g) => cb::boxed(cb::universe(), to_cpdl(g)),
        _ => unreachable!("language check admits only K/C/U/booleans"),
    }
}

// ---------------------------------------------------------------------
// K^U_2 -> L_U
// ---------------------------------------------------------------------

/// Rewrites a two-agent K + U formula into the weighted logic with U:
/// every `K_x theta` becomes `K_{x1} K_{x2} (p -> theta)` over two split
/// copies of x, `U theta` becomes `U (p -> theta)`, and a guard forces the
/// marker atom `p` to alternate across every split step.
pub fn rewrite_ku2_to_lu(f: &Fm) -> Result<Fm, ReduceError> {
    reserved_check(f)?;
    let fd = desugar(f);
    language_check(
        &fd,
        &Allow {
            language: "two-agent L_U",
            k: true,
            c: false,
            d: false,
            e: false,
            f: false,
            univ: true,
        },
    )?;
    let voc = vocabulary(&fd);
    if voc.agents.len() > 2 {
        return Err(ReduceError::TooManyAgents {
            language: "two-agent L_U",
            max: 2,
            found: voc.agents.len(),
        });
    }
    let p = build::atom_id(fresh_p());

    fn rho1(f: &Fm, p: &Fm) -> Fm {
        use Formula::*;
        match &**f {
            K(a, g) => build::k(
                split_agent(*a, 1),
                build::k(split_agent(*a, 2), build::implies(p.clone(), rho1(g, p))),
            ),
            Univ(g) => build::univ(build::implies(p.clone(), rho1(g, p))),
            Atom(_) | Top | Bot => f.clone(),
            Not(g) => build::not(rho1(g, p)),
            Implies(a, b) => build::implies(rho1(a, p), rho1(b, p)),
            _ => unreachable!("language check admits only K/U/booleans"),
        }
    }

    let splits: Vec<AgentId> = voc
        .agents
        .iter()
        .flat_map(|a| [split_agent(*a, 1), split_agent(*a, 2)])
        .collect();
    let guard = build::univ(build::and(
        build::implies(
            p.clone(),
            build::conj(
                splits
                    .iter()
                    .map(|x| build::k(*x, build::not(p.clone())))
                    .collect::<Vec<_>>(),
            ),
        ),
        build::implies(
            build::not(p.clone()),
            build::conj(
                splits
                    .iter()
                    .map(|x| build::k(*x, p.clone()))
                    .collect::<Vec<_>>(),
            ),
        ),
    ));
    Ok(build::and(rho1(&fd, &p), build::and(p, guard)))
}
