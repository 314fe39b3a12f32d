//! Skill structures: classical skill sets, fuzzy skill sets and finite
//! lattices, together with the order/combination operations the semantics
//! needs (`leq`, `join`, `meet`, `difference`).
//!
//! Fuzzy memberships are exact rationals parsed from decimal strings, so
//! comparisons never depend on float rounding. A fuzzy set is stored by its
//! finite support: absent keys mean membership 0 and stored memberships are
//! never 0.
//!
//! `Full` is the marker for the entire (countably infinite) skill universe.
//! It compares above every classical or fuzzy value; lattices use their
//! declared top element instead.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num::rational::Ratio;
use num::{One, Zero};
use serde::Deserialize;
use thiserror::Error;

use crate::ids::{SkillId, Symbol};

pub type Membership = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SkillError {
    #[error("family mismatch: {0} vs {1}")]
    FamilyMismatch(&'static str, &'static str),
    #[error("difference is not defined for the lattice family")]
    LatticeDifference,
    #[error("difference is not defined on the full skill universe")]
    FullDifference,
    #[error("values belong to different lattices")]
    LatticeMismatch,
    #[error("membership {0} outside [0,1]")]
    MembershipRange(String),
    #[error("cannot parse membership {0:?} as a decimal or fraction")]
    MembershipSyntax(String),
    #[error("lattice error: {0}")]
    Lattice(String),
}

/// Parses a membership value from a decimal string such as `"0.25"`
/// (fractions `"1/3"` are accepted too) and checks it lies in the unit interval.
pub fn parse_membership(s: &str) -> Result<Membership, SkillError> {
    let s = s.trim();
    if s.starts_with(['-', '+']) {
        return Err(SkillError::MembershipRange(s.to_owned()));
    }
    let value = if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num
            .trim()
            .parse()
            .map_err(|_| SkillError::MembershipSyntax(s.to_owned()))?;
        let d: i64 = den
            .trim()
            .parse()
            .map_err(|_| SkillError::MembershipSyntax(s.to_owned()))?;
        if d == 0 {
            return Err(SkillError::MembershipSyntax(s.to_owned()));
        }
        Ratio::new(n, d)
    } else if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(SkillError::MembershipSyntax(s.to_owned()));
        }
        let int_part: i64 = if int.is_empty() {
            0
        } else {
            int.parse()
                .map_err(|_| SkillError::MembershipSyntax(s.to_owned()))?
        };
        let den = 10_i64.pow(frac.len() as u32);
        let num: i64 = frac
            .parse()
            .map_err(|_| SkillError::MembershipSyntax(s.to_owned()))?;
        Ratio::new(int_part * den + num, den)
    } else {
        let n: i64 = s
            .parse()
            .map_err(|_| SkillError::MembershipSyntax(s.to_owned()))?;
        Ratio::from_integer(n)
    };
    if value < Membership::zero() || value > Membership::one() {
        return Err(SkillError::MembershipRange(s.to_owned()));
    }
    Ok(value)
}

/// Renders a membership back to a decimal string when the denominator is of
/// the form 2^a 5^b, otherwise as `p/q`.
pub fn membership_to_string(m: &Membership) -> String {
    let mut den = *m.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return format!("{}/{}", m.numer(), m.denom());
    }
    let k = twos.max(fives);
    if k == 0 {
        return format!("{}", m.numer());
    }
    let scale = 2_i64.pow(k - twos) * 5_i64.pow(k - fives);
    let numer = m.numer() * scale;
    let denom = 10_i64.pow(k);
    format!("{}.{:0width$}", numer / denom, (numer % denom).abs(), width = k as usize)
}

/// A finite lattice given extensionally, validated at load time: `leq` must
/// be a partial order and the join/meet tables must satisfy the lattice laws
/// (least upper bound, greatest lower bound, absorption), checked
/// exhaustively over all element pairs.
#[derive(Debug)]
pub struct FiniteLattice {
    elements: Vec<Symbol>,
    index: HashMap<Symbol, u32>,
    leq: Vec<bool>,
    join: Vec<u32>,
    meet: Vec<u32>,
    top: u32,
    bottom: u32,
    digest: u64,
}

#[derive(Debug, Deserialize)]
pub struct LatticeSpec {
    pub elements: Vec<String>,
    pub leq_pairs: Vec<(String, String)>,
    pub top: String,
    pub bottom: String,
    #[serde(default)]
    pub join_table: Option<Vec<(String, String, String)>>,
    #[serde(default)]
    pub meet_table: Option<Vec<(String, String, String)>>,
}

impl PartialEq for FiniteLattice {
    fn eq(&self, other: &Self) -> bool {
        self.digest == other.digest
            && self.elements == other.elements
            && self.leq == other.leq
            && self.top == other.top
            && self.bottom == other.bottom
    }
}
impl Eq for FiniteLattice {}

impl FiniteLattice {
    /// Builds and fully validates a lattice. `leq_pairs` are generators: the
    /// reflexive-transitive closure is taken before the order axioms are
    /// checked. Join/meet are derived from the order (and verified against
    /// explicit tables when given).
    pub fn from_spec(spec: &LatticeSpec) -> Result<Arc<FiniteLattice>, SkillError> {
        let n = spec.elements.len();
        if n == 0 {
            return Err(SkillError::Lattice("lattice has no elements".into()));
        }
        let elements: Vec<Symbol> = spec.elements.iter().map(|e| Symbol::intern(e)).collect();
        let mut index = HashMap::new();
        for (i, e) in elements.iter().enumerate() {
            if index.insert(*e, i as u32).is_some() {
                return Err(SkillError::Lattice(format!("duplicate element {:?}", e)));
            }
        }
        let look = |name: &str| -> Result<u32, SkillError> {
            index
                .get(&Symbol::intern(name))
                .copied()
                .ok_or_else(|| SkillError::Lattice(format!("unknown element {:?}", name)))
        };

        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for (a, b) in &spec.leq_pairs {
            leq[look(a)? as usize * n + look(b)? as usize] = true;
        }
        // Transitive closure.
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        // Antisymmetry.
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i * n + j] && leq[j * n + i] {
                    return Err(SkillError::Lattice(format!(
                        "leq is not antisymmetric: {} and {}",
                        elements[i], elements[j]
                    )));
                }
            }
        }

        let top = look(&spec.top)?;
        let bottom = look(&spec.bottom)?;
        for i in 0..n {
            if !leq[i * n + top as usize] {
                return Err(SkillError::Lattice(format!(
                    "{} is not below the declared top",
                    elements[i]
                )));
            }
            if !leq[bottom as usize * n + i] {
                return Err(SkillError::Lattice(format!(
                    "the declared bottom is not below {}",
                    elements[i]
                )));
            }
        }

        // join(x,y) = the unique common upper bound below every other common
        // upper bound; dually for meet.
        let bound = |x: usize, y: usize, upper: bool| -> Result<u32, SkillError> {
            let common: Vec<usize> = (0..n)
                .filter(|&z| {
                    if upper {
                        leq[x * n + z] && leq[y * n + z]
                    } else {
                        leq[z * n + x] && leq[z * n + y]
                    }
                })
                .collect();
            let extreme: Vec<usize> = common
                .iter()
                .copied()
                .filter(|&z| {
                    common.iter().all(|&w| {
                        if upper {
                            leq[z * n + w]
                        } else {
                            leq[w * n + z]
                        }
                    })
                })
                .collect();
            if extreme.len() != 1 {
                return Err(SkillError::Lattice(format!(
                    "{} and {} have no unique {}",
                    elements[x],
                    elements[y],
                    if upper { "join" } else { "meet" }
                )));
            }
            Ok(extreme[0] as u32)
        };

        let mut join = vec![0u32; n * n];
        let mut meet = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                join[i * n + j] = bound(i, j, true)?;
                meet[i * n + j] = bound(i, j, false)?;
            }
        }

        if let Some(table) = &spec.join_table {
            for (a, b, v) in table {
                if join[look(a)? as usize * n + look(b)? as usize] != look(v)? {
                    return Err(SkillError::Lattice(format!(
                        "declared join {} ⊔ {} = {} disagrees with the order",
                        a, b, v
                    )));
                }
            }
        }
        if let Some(table) = &spec.meet_table {
            for (a, b, v) in table {
                if meet[look(a)? as usize * n + look(b)? as usize] != look(v)? {
                    return Err(SkillError::Lattice(format!(
                        "declared meet {} ⊓ {} = {} disagrees with the order",
                        a, b, v
                    )));
                }
            }
        }

        // Lattice laws, exhaustively: x ≤ x⊔y, x⊓y ≤ x, absorption.
        for i in 0..n {
            for j in 0..n {
                let ij = join[i * n + j] as usize;
                let mij = meet[i * n + j] as usize;
                if !leq[i * n + ij] || !leq[j * n + ij] || !leq[mij * n + i] || !leq[mij * n + j] {
                    return Err(SkillError::Lattice("join/meet bound law failed".into()));
                }
                if meet[i * n + ij] != i as u32 || join[i * n + mij] != i as u32 {
                    return Err(SkillError::Lattice(format!(
                        "absorption failed at {},{}",
                        elements[i], elements[j]
                    )));
                }
            }
        }

        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        for e in &elements {
            e.as_str().hash(&mut hasher);
        }
        leq.hash(&mut hasher);
        top.hash(&mut hasher);
        bottom.hash(&mut hasher);
        let digest = hasher.finish();

        Ok(Arc::new(FiniteLattice {
            elements,
            index,
            leq,
            join,
            meet,
            top,
            bottom,
            digest,
        }))
    }

    pub fn from_json(json: &serde_json::Value) -> Result<Arc<FiniteLattice>, SkillError> {
        let spec: LatticeSpec = serde_json::from_value(json.clone())
            .map_err(|e| SkillError::Lattice(format!("bad lattice JSON: {e}")))?;
        FiniteLattice::from_spec(&spec)
    }

    pub fn element(self: &Arc<Self>, name: &str) -> Result<SkillValue, SkillError> {
        let sym = Symbol::intern(name);
        let idx = self
            .index
            .get(&sym)
            .copied()
            .ok_or_else(|| SkillError::Lattice(format!("unknown element {:?}", name)))?;
        Ok(SkillValue::Lattice(LatticeElem {
            lattice: Arc::clone(self),
            elem: idx,
        }))
    }

    pub fn elements(&self) -> impl Iterator<Item = &Symbol> {
        self.elements.iter()
    }

    pub fn top(self: &Arc<Self>) -> SkillValue {
        SkillValue::Lattice(LatticeElem {
            lattice: Arc::clone(self),
            elem: self.top,
        })
    }

    pub fn bottom(self: &Arc<Self>) -> SkillValue {
        SkillValue::Lattice(LatticeElem {
            lattice: Arc::clone(self),
            elem: self.bottom,
        })
    }

    pub fn is_top(&self, e: u32) -> bool {
        e == self.top
    }

    /// Serializes back to the definition-file shape, with the full (closed)
    /// order relation as pairs.
    pub fn to_spec_json(&self) -> serde_json::Value {
        let n = self.n();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.leq[i * n + j] {
                    pairs.push(serde_json::json!([
                        self.elements[i].as_str(),
                        self.elements[j].as_str()
                    ]));
                }
            }
        }
        serde_json::json!({
            "elements": self.elements.iter().map(|e| e.as_str()).collect::<Vec<_>>(),
            "leq_pairs": pairs,
            "top": self.elements[self.top as usize].as_str(),
            "bottom": self.elements[self.bottom as usize].as_str(),
        })
    }

    fn n(&self) -> usize {
        self.elements.len()
    }
}

/// One element of a declared finite lattice. Carries its lattice so values
/// are self-contained; values from different lattices do not mix.
#[derive(Clone)]
pub struct LatticeElem {
    pub lattice: Arc<FiniteLattice>,
    pub elem: u32,
}

impl PartialEq for LatticeElem {
    fn eq(&self, other: &Self) -> bool {
        self.elem == other.elem && self.lattice == other.lattice
    }
}
impl Eq for LatticeElem {}

impl Hash for LatticeElem {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.lattice.digest.hash(state);
        self.elem.hash(state);
    }
}

impl PartialOrd for LatticeElem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for LatticeElem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.lattice.digest, self.elem).cmp(&(other.lattice.digest, other.elem))
    }
}

impl fmt::Debug for LatticeElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.lattice.elements[self.elem as usize])
    }
}

impl LatticeElem {
    pub fn name(&self) -> &'static str {
        self.lattice.elements[self.elem as usize].as_str()
    }
}

/// Which skill structure a model (and its values) lives in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Classical,
    Fuzzy,
    Lattice(Arc<FiniteLattice>),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Classical => "classical",
            Family::Fuzzy => "fuzzy",
            Family::Lattice(_) => "lattice",
        }
    }

    /// The least value of the family (empty set / all-zero fuzzy set /
    /// lattice bottom).
    pub fn bottom(&self) -> SkillValue {
        match self {
            Family::Classical => SkillValue::Classical(BTreeSet::new()),
            Family::Fuzzy => SkillValue::Fuzzy(BTreeMap::new()),
            Family::Lattice(l) => l.bottom(),
        }
    }

    /// The top value: `Full` for classical/fuzzy, the declared top for a
    /// lattice.
    pub fn top(&self) -> SkillValue {
        match self {
            Family::Classical | Family::Fuzzy => SkillValue::Full,
            Family::Lattice(l) => l.top(),
        }
    }

    pub fn admits(&self, v: &SkillValue) -> bool {
        match (self, v) {
            (Family::Classical, SkillValue::Classical(_)) => true,
            (Family::Fuzzy, SkillValue::Fuzzy(_)) => true,
            (Family::Classical | Family::Fuzzy, SkillValue::Full) => true,
            (Family::Lattice(l), SkillValue::Lattice(e)) => **l == *e.lattice,
            _ => false,
        }
    }
}

/// A skill value: a classical finite set, a fuzzy set with finite support, a
/// lattice element, or the `Full` universe marker.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SkillValue {
    Classical(BTreeSet<SkillId>),
    Fuzzy(BTreeMap<SkillId, Membership>),
    Lattice(LatticeElem),
    Full,
}

impl fmt::Debug for SkillValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkillValue::Classical(s) => {
                write!(f, "{{")?;
                for (i, x) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", x)?;
                }
                write!(f, "}}")
            }
            SkillValue::Fuzzy(m) => {
                write!(f, "{{")?;
                for (i, (k, v)) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}:{}", k, membership_to_string(v))?;
                }
                write!(f, "}}")
            }
            SkillValue::Lattice(e) => write!(f, "{}", e.name()),
            SkillValue::Full => write!(f, "full"),
        }
    }
}

impl SkillValue {
    pub fn classical<I: IntoIterator<Item = SkillId>>(skills: I) -> SkillValue {
        SkillValue::Classical(skills.into_iter().collect())
    }

    pub fn classical_names(names: &[&str]) -> SkillValue {
        SkillValue::Classical(names.iter().map(|n| SkillId::new(n)).collect())
    }

    /// Builds a fuzzy value, dropping zero memberships so the support stays
    /// canonical.
    pub fn fuzzy<I: IntoIterator<Item = (SkillId, Membership)>>(entries: I) -> SkillValue {
        SkillValue::Fuzzy(
            entries
                .into_iter()
                .filter(|(_, m)| !m.is_zero())
                .collect(),
        )
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            SkillValue::Classical(_) => "classical",
            SkillValue::Fuzzy(_) => "fuzzy",
            SkillValue::Lattice(_) => "lattice",
            SkillValue::Full => "full",
        }
    }

    pub fn is_full(&self) -> bool {
        match self {
            SkillValue::Full => true,
            SkillValue::Lattice(e) => e.lattice.is_top(e.elem),
            _ => false,
        }
    }

    /// The finite skills mentioned by this value (empty for `Full` and for
    /// lattice elements).
    pub fn support(&self) -> Vec<SkillId> {
        match self {
            SkillValue::Classical(s) => s.iter().copied().collect(),
            SkillValue::Fuzzy(m) => m.keys().copied().collect(),
            _ => Vec::new(),
        }
    }

    fn mismatch(&self, other: &SkillValue) -> SkillError {
        SkillError::FamilyMismatch(self.family_name(), other.family_name())
    }
}

/// Is `s` below `t` in its family's order? Anything is below `Full`.
pub fn leq(s: &SkillValue, t: &SkillValue) -> Result<bool, SkillError> {
    use SkillValue::*;
    match (s, t) {
        (_, Full) => Ok(true),
        (Full, _) => Ok(false),
        (Classical(a), Classical(b)) => Ok(a.is_subset(b)),
        (Fuzzy(a), Fuzzy(b)) => Ok(a
            .iter()
            .all(|(k, v)| b.get(k).is_some_and(|w| v <= w))),
        (Lattice(a), Lattice(b)) => {
            if a.lattice != b.lattice {
                return Err(SkillError::LatticeMismatch);
            }
            let n = a.lattice.n();
            Ok(a.lattice.leq[a.elem as usize * n + b.elem as usize])
        }
        _ => Err(s.mismatch(t)),
    }
}

/// Least upper bound: union / pointwise max / lattice join.
pub fn join(s: &SkillValue, t: &SkillValue) -> Result<SkillValue, SkillError> {
    use SkillValue::*;
    match (s, t) {
        (Full, x) | (x, Full) => {
            match x {
                Classical(_) | Fuzzy(_) | Full => Ok(SkillValue::Full),
                Lattice(_) => Err(s.mismatch(t)),
            }
        }
        (Classical(a), Classical(b)) => Ok(Classical(a.union(b).copied().collect())),
        (Fuzzy(a), Fuzzy(b)) => {
            let mut out = a.clone();
            for (k, v) in b {
                let e = out.entry(*k).or_insert(*v);
                if *e < *v {
                    *e = *v;
                }
            }
            Ok(SkillValue::fuzzy(out))
        }
        (Lattice(a), Lattice(b)) => {
            if a.lattice != b.lattice {
                return Err(SkillError::LatticeMismatch);
            }
            let n = a.lattice.n();
            Ok(Lattice(LatticeElem {
                lattice: Arc::clone(&a.lattice),
                elem: a.lattice.join[a.elem as usize * n + b.elem as usize],
            }))
        }
        _ => Err(s.mismatch(t)),
    }
}

/// Greatest lower bound: intersection / pointwise min / lattice meet.
pub fn meet(s: &SkillValue, t: &SkillValue) -> Result<SkillValue, SkillError> {
    use SkillValue::*;
    match (s, t) {
        (Full, Full) => Ok(Full),
        (Full, x) | (x, Full) => {
            match x {
                Classical(_) | Fuzzy(_) => Ok(x.clone()),
                Lattice(_) => Err(s.mismatch(t)),
                Full => unreachable!(),
            }
        }
        (Classical(a), Classical(b)) => Ok(Classical(a.intersection(b).copied().collect())),
        (Fuzzy(a), Fuzzy(b)) => Ok(SkillValue::fuzzy(a.iter().filter_map(|(k, v)| {
            b.get(k).map(|w| (*k, (*v).min(*w)))
        }))),
        (Lattice(a), Lattice(b)) => {
            if a.lattice != b.lattice {
                return Err(SkillError::LatticeMismatch);
            }
            let n = a.lattice.n();
            Ok(Lattice(LatticeElem {
                lattice: Arc::clone(&a.lattice),
                elem: a.lattice.meet[a.elem as usize * n + b.elem as usize],
            }))
        }
        _ => Err(s.mismatch(t)),
    }
}

/// Set difference: elementwise removal for classical values, pointwise
/// `min(μ_S, 1 − μ_T)` for fuzzy ones. Not defined for lattices (their
/// downskilling uses `meet`) nor on `Full`.
pub fn difference(s: &SkillValue, t: &SkillValue) -> Result<SkillValue, SkillError> {
    use SkillValue::*;
    match (s, t) {
        (Lattice(_), _) | (_, Lattice(_)) => Err(SkillError::LatticeDifference),
        (Full, _) | (_, Full) => Err(SkillError::FullDifference),
        (Classical(a), Classical(b)) => Ok(Classical(a.difference(b).copied().collect())),
        (Fuzzy(a), Fuzzy(b)) => Ok(SkillValue::fuzzy(a.iter().map(|(k, v)| {
            let complement = Membership::one() - b.get(k).copied().unwrap_or_else(Membership::zero);
            (*k, (*v).min(complement))
        }))),
        _ => Err(s.mismatch(t)),
    }
}
