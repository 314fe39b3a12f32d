//! Model checking for epistemic logics over skill-weighted Kripke models.
//!
//! The library covers:
//!
//! - classical, fuzzy and lattice-ordered skill structures ([`skill`]);
//! - the formula language with group knowledge (`C`/`D`/`E`/`F`), capability
//!   updates (`up`/`down`/`set`/`learn`), quantifiers over updates
//!   (`bp`/`bm`/`ba`) and the universal modality ([`syntax`]);
//! - weighted models with validation and capability updates ([`model`]);
//! - truth-set computation for the full language, including the
//!   subset-enumeration semantics of the quantifiers ([`checker`]);
//! - the undirected edge geography game with its induced model/formula
//!   constructions and an equivalence harness ([`ueg`]);
//! - satisfiability-preserving rewritings into target logics (plain Kripke,
//!   S5 with common knowledge, PDL with a universe program) together with
//!   executable witness-model constructions ([`reductions`]);
//! - abstraction of weighted models from attribute tables ([`dataset`]).

pub mod checker;
pub mod cli;
pub mod dataset;
pub mod ids;
pub mod model;
pub mod reductions;
pub mod skill;
pub mod syntax;
pub mod ueg;

pub use ids::{AgentId, Group, PropId, SkillId, Symbol, WorldId};
pub use model::WeightedModel;
pub use skill::{Family, SkillValue};
pub use syntax::{Fm, Formula};
