//! Interned identifiers for agents, propositions, skills and worlds.
//!
//! All names are interned into a process-wide table, so identifier equality
//! and hashing are O(1). Ordering is by name (not by interning order), which
//! keeps printed output and canonical group sorting independent of the order
//! in which names were first seen.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

struct Interner {
    map: HashMap<&'static str, u32>,
    names: Vec<&'static str>,
}

fn interner() -> &'static RwLock<Interner> {
    static INTERNER: OnceLock<RwLock<Interner>> = OnceLock::new();
    INTERNER.get_or_init(|| {
        RwLock::new(Interner {
            map: HashMap::new(),
            names: Vec::new(),
        })
    })
}

/// An interned string. Copyable, O(1) equality, ordered by name.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol(u32);

impl Symbol {
    pub fn intern(s: &str) -> Symbol {
        {
            let rd = interner().read().unwrap();
            if let Some(&id) = rd.map.get(s) {
                return Symbol(id);
            }
        }
        let mut wr = interner().write().unwrap();
        if let Some(&id) = wr.map.get(s) {
            return Symbol(id);
        }
        // Interned names live for the whole process; the table only grows
        // with the input vocabulary.
        let leaked: &'static str = Box::leak(s.to_owned().into_boxed_str());
        let id = wr.names.len() as u32;
        wr.names.push(leaked);
        wr.map.insert(leaked, id);
        Symbol(id)
    }

    pub fn as_str(self) -> &'static str {
        interner().read().unwrap().names[self.0 as usize]
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self.0 == other.0 {
            std::cmp::Ordering::Equal
        } else {
            self.as_str().cmp(other.as_str())
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub Symbol);

        impl $name {
            pub fn new(s: &str) -> Self {
                $name(Symbol::intern(s))
            }

            pub fn as_str(&self) -> &'static str {
                self.0.as_str()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self.as_str())
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }
    };
}

id_type!(
    /// An agent name.
    AgentId
);
id_type!(
    /// An atomic proposition name.
    PropId
);
id_type!(
    /// An epistemic skill name.
    SkillId
);
id_type!(
    /// A world (state) name.
    WorldId
);

/// A finite nonempty group of agents, kept sorted and deduplicated so that
/// equal groups compare and hash equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Group(std::sync::Arc<[AgentId]>);

impl Group {
    /// Returns `None` on an empty member list.
    pub fn new<I: IntoIterator<Item = AgentId>>(members: I) -> Option<Group> {
        let mut v: Vec<AgentId> = members.into_iter().collect();
        v.sort();
        v.dedup();
        if v.is_empty() {
            None
        } else {
            Some(Group(v.into()))
        }
    }

    pub fn singleton(a: AgentId) -> Group {
        Group(vec![a].into())
    }

    pub fn members(&self) -> &[AgentId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, a: AgentId) -> bool {
        self.0.binary_search(&a).is_ok()
    }

    pub fn is_subset(&self, other: &Group) -> bool {
        self.0.iter().all(|a| other.contains(*a))
    }

    pub fn intersects(&self, other: &Group) -> bool {
        self.0.iter().any(|a| other.contains(*a))
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(a.as_str())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group({})", self)
    }
}
