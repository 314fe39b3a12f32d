//! Abstraction of weighted models from attribute tables: two objects are
//! linked by exactly the attributes on which they agree, so attributes act
//! as epistemic skills and an observer's capability is the set of columns
//! it can read.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ids::{AgentId, PropId, SkillId, WorldId};
use crate::model::{EdgeEntry, ModelError, WeightedModel};
use crate::skill::{Family, SkillValue};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("table has no attribute columns")]
    NoAttributes,
    #[error("table has no objects")]
    NoObjects,
    #[error("duplicate object id {0}")]
    DuplicateObject(String),
    #[error("row {0} has {1} cells, expected {2}")]
    RaggedRow(String, usize, usize),
    #[error("overlay references unknown attribute {0}")]
    UnknownAttribute(String),
    #[error("overlay references unknown object {0}")]
    UnknownObject(String),
    #[error("bad overlay JSON: {0}")]
    Json(String),
    #[error("model error: {0}")]
    Model(#[from] ModelError),
}

/// A total table of categorical values: one row per object, one column per
/// attribute. All cells are read as strings.
#[derive(Debug, Clone)]
pub struct AttributeTable {
    pub objects: Vec<String>,
    pub attributes: Vec<String>,
    cells: Vec<Vec<String>>,
}

impl AttributeTable {
    pub fn new(
        objects: Vec<String>,
        attributes: Vec<String>,
        cells: Vec<Vec<String>>,
    ) -> Result<AttributeTable, DatasetError> {
        if attributes.is_empty() {
            return Err(DatasetError::NoAttributes);
        }
        if objects.is_empty() {
            return Err(DatasetError::NoObjects);
        }
        let mut seen = BTreeSet::new();
        for o in &objects {
            if !seen.insert(o.clone()) {
                return Err(DatasetError::DuplicateObject(o.clone()));
            }
        }
        for (o, row) in objects.iter().zip(&cells) {
            if row.len() != attributes.len() {
                return Err(DatasetError::RaggedRow(
                    o.clone(),
                    row.len(),
                    attributes.len(),
                ));
            }
        }
        Ok(AttributeTable {
            objects,
            attributes,
            cells,
        })
    }

    /// Reads a CSV whose first column holds object ids and whose header
    /// names the attributes.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<AttributeTable, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 {
            return Err(DatasetError::NoAttributes);
        }
        let attributes: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
        let mut objects = Vec::new();
        let mut cells = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let mut it = record.iter();
            let id = it.next().unwrap_or("").to_owned();
            objects.push(id);
            cells.push(it.map(str::to_owned).collect());
        }
        AttributeTable::new(objects, attributes, cells)
    }

    pub fn from_csv_str(text: &str) -> Result<AttributeTable, DatasetError> {
        Self::from_csv_reader(text.as_bytes())
    }

    pub fn cell(&self, object: usize, attribute: usize) -> &str {
        &self.cells[object][attribute]
    }
}

/// Derives the frame: worlds are the objects, skills the attributes, and
/// `E(x,y)` for distinct x, y is the set of attributes on which the two
/// rows agree. Diagonal entries are left at the `full` default. Rows that
/// agree everywhere stay distinct worlds with a finite all-attribute label.
/// Capabilities and valuation are empty, to be overlaid from config.
pub fn abstract_frame(t: &AttributeTable) -> Result<WeightedModel, DatasetError> {
    let worlds: Vec<WorldId> = t.objects.iter().map(|o| WorldId::new(o)).collect();
    let skills: Vec<SkillId> = t.attributes.iter().map(|a| SkillId::new(a)).collect();
    let mut edges = Vec::new();
    for i in 0..t.objects.len() {
        for j in (i + 1)..t.objects.len() {
            let agree: BTreeSet<SkillId> = (0..t.attributes.len())
                .filter(|&k| t.cell(i, k) == t.cell(j, k))
                .map(|k| skills[k])
                .collect();
            if !agree.is_empty() {
                edges.push(EdgeEntry {
                    between: (worlds[i], worlds[j]),
                    value: SkillValue::Classical(agree),
                });
            }
        }
    }
    Ok(WeightedModel::new(
        worlds,
        skills,
        Family::Classical,
        edges,
        BTreeMap::new(),
        BTreeMap::new(),
    )?)
}

/// Capability and valuation overlay in model-JSON fragment form:
/// `{"capabilities": {...}, "valuation": {...}}`.
#[derive(Debug, Clone, Default)]
pub struct Overlay {
    pub capabilities: BTreeMap<AgentId, BTreeSet<SkillId>>,
    pub valuation: BTreeMap<WorldId, BTreeSet<PropId>>,
}

impl Overlay {
    pub fn from_json_str(text: &str) -> Result<Overlay, DatasetError> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| DatasetError::Json(e.to_string()))?;
        let mut overlay = Overlay::default();
        if let Some(caps) = v.get("capabilities") {
            let caps = caps
                .as_object()
                .ok_or_else(|| DatasetError::Json("capabilities: expected an object".into()))?;
            for (agent, skills) in caps {
                let list = skills
                    .as_array()
                    .ok_or_else(|| DatasetError::Json(format!("capability of {agent}: expected an array")))?;
                let mut set = BTreeSet::new();
                for s in list {
                    let s = s
                        .as_str()
                        .ok_or_else(|| DatasetError::Json("capability: bad skill".into()))?;
                    set.insert(SkillId::new(s));
                }
                overlay.capabilities.insert(AgentId::new(agent), set);
            }
        }
        if let Some(val) = v.get("valuation") {
            let val = val
                .as_object()
                .ok_or_else(|| DatasetError::Json("valuation: expected an object".into()))?;
            for (world, props) in val {
                let list = props
                    .as_array()
                    .ok_or_else(|| DatasetError::Json(format!("valuation of {world}: expected an array")))?;
                let mut set = BTreeSet::new();
                for p in list {
                    let p = p
                        .as_str()
                        .ok_or_else(|| DatasetError::Json("valuation: bad proposition".into()))?;
                    set.insert(PropId::new(p));
                }
                overlay.valuation.insert(WorldId::new(world), set);
            }
        }
        Ok(overlay)
    }
}

/// Installs observer capabilities and a valuation on a frame. Capability
/// skills must be declared attributes and valuation keys known objects.
pub fn overlay(frame: &WeightedModel, overlay: &Overlay) -> Result<WeightedModel, DatasetError> {
    let attrs: BTreeSet<SkillId> = frame.skill_universe().iter().copied().collect();
    let mut caps = BTreeMap::new();
    for (agent, skills) in &overlay.capabilities {
        for s in skills {
            if !attrs.contains(s) {
                return Err(DatasetError::UnknownAttribute(s.as_str().to_owned()));
            }
        }
        caps.insert(*agent, SkillValue::Classical(skills.clone()));
    }
    let mut valuation = BTreeMap::new();
    for (world, props) in &overlay.valuation {
        if frame.world_index(*world).is_none() {
            return Err(DatasetError::UnknownObject(world.as_str().to_owned()));
        }
        valuation.insert(*world, props.clone());
    }
    // rebuild through the constructor path to keep one source of truth
    let worlds = frame.worlds().to_vec();
    let skills = frame.skill_universe().to_vec();
    let mut edges = Vec::new();
    for i in 0..frame.world_count() as u32 {
        for j in i..frame.world_count() as u32 {
            let v = frame.edge(i, j);
            let default = if i == j {
                frame.family().top()
            } else {
                frame.family().bottom()
            };
            if *v != default {
                edges.push(EdgeEntry {
                    between: (frame.world_name(i), frame.world_name(j)),
                    value: v.clone(),
                });
            }
        }
    }
    let model = WeightedModel::new(worlds, skills, frame.family().clone(), edges, caps, valuation)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const PLANETS_CSV: &str = include_str!("../fixtures/planets.csv");
    pub(crate) const SOLAR_OVERLAY: &str = include_str!("../fixtures/overlay_solar.json");

    #[test]
    fn csv_parses_planets() {
        let t = AttributeTable::from_csv_str(PLANETS_CSV).unwrap();
        assert_eq!(t.objects.len(), 8);
        assert_eq!(t.attributes, vec!["1", "2", "3"]);
        assert_eq!(t.cell(0, 0), "small");
        assert_eq!(t.cell(4, 1), "far");
    }

    #[test]
    fn frame_matches_edge_table() {
        let t = AttributeTable::from_csv_str(PLANETS_CSV).unwrap();
        let frame = abstract_frame(&t).unwrap();
        assert!(frame.validate().is_empty());
        let e = |a: &str, b: &str| {
            frame
                .edge_by_name(WorldId::new(a), WorldId::new(b))
                .unwrap()
                .clone()
        };
        assert_eq!(e("m_e", "e"), SkillValue::classical_names(&["1", "2"]));
        // rows that agree on every attribute stay distinct worlds with a
        // finite all-attribute label, not a full edge
        assert_eq!(e("e", "m_a"), SkillValue::classical_names(&["1", "2", "3"]));
        assert_eq!(e("m_e", "j"), SkillValue::classical_names(&[]));
        assert_eq!(e("j", "u"), SkillValue::classical_names(&["2", "3"]));
        // diagonal defaults to full
        assert!(e("e", "e").is_full());
    }

    #[test]
    fn two_identical_single_attribute_rows() {
        let t = AttributeTable::from_csv_str("id,a\nx,1\ny,1\n").unwrap();
        let frame = abstract_frame(&t).unwrap();
        assert_eq!(
            *frame.edge_by_name(WorldId::new("x"), WorldId::new("y")).unwrap(),
            SkillValue::classical_names(&["a"])
        );
    }

    #[test]
    fn overlay_produces_solar_model() {
        let t = AttributeTable::from_csv_str(PLANETS_CSV).unwrap();
        let frame = abstract_frame(&t).unwrap();
        let ov = Overlay::from_json_str(SOLAR_OVERLAY).unwrap();
        let m = overlay(&frame, &ov).unwrap();
        assert!(m.validate().is_empty());
        assert_eq!(m.capability(AgentId::new("a")), SkillValue::classical_names(&["1", "2"]));
        // the overlaid model reproduces the solar-suite judgments
        let f = crate::syntax::parse("(K[b] p & K[c] p)").unwrap();
        assert!(crate::checker::check(&m, WorldId::new("e"), &f).unwrap());
        let f = crate::syntax::parse("K[a] p").unwrap();
        assert!(!crate::checker::check(&m, WorldId::new("e"), &f).unwrap());
    }

    #[test]
    fn overlay_validation() {
        let t = AttributeTable::from_csv_str("id,a\nx,1\ny,2\n").unwrap();
        let frame = abstract_frame(&t).unwrap();
        let bad = Overlay::from_json_str(r#"{"capabilities": {"z": ["nope"]}}"#).unwrap();
        assert!(matches!(
            overlay(&frame, &bad),
            Err(DatasetError::UnknownAttribute(_))
        ));
        let bad = Overlay::from_json_str(r#"{"valuation": {"ghost": ["p"]}}"#).unwrap();
        assert!(matches!(
            overlay(&frame, &bad),
            Err(DatasetError::UnknownObject(_))
        ));
        // empty overlay: all agents incompetent, all atoms false
        let m = overlay(&frame, &Overlay::default()).unwrap();
        assert_eq!(m.capability(AgentId::new("anyone")), SkillValue::classical([]));
        assert!(m.valuation(0).is_empty());
    }

    #[test]
    fn bad_tables_rejected() {
        assert!(matches!(
            AttributeTable::from_csv_str("id\nx\n"),
            Err(DatasetError::NoAttributes)
        ));
        assert!(matches!(
            AttributeTable::from_csv_str("id,a\nx,1\nx,2\n"),
            Err(DatasetError::DuplicateObject(_))
        ));
    }
}
