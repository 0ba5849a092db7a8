//! Reference database of component classes.
//!
//! A database maps class labels to component records. A record carries
//! either literature aggregate figures (an entropy range, a grade, a
//! recyclability band) or a concrete material composition; purely
//! structural classes like the bare board carry neither. Labels resolve
//! case-insensitively through the record id and its aliases.
//!
//! Aggregate rows can be audited for internal consistency: a row is
//! feasible when some valence count N, combined with an entropy inside
//! the row's range, reproduces a score inside the row's band.

use std::collections::HashMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::recyclability::{assess_component, ComponentSpec, MaterialEntry, AMPLIFICATION};

/// Valence counts tried when auditing an aggregate row.
pub const DEFAULT_N_CANDIDATES: RangeInclusive<u32> = 1..=12;
/// Points sampled across the entropy range during an audit.
pub const DEFAULT_H_GRID_STEPS: usize = 101;

/// Source JSON for the database bundled into the library.
pub const BUILTIN_DB_JSON: &str = include_str!("../data/components.json");

/// Dominant bonding structure of a component class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BondingClass {
    Composite,
    AlloyComposite,
}

impl fmt::Display for BondingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            BondingClass::Composite => "composite",
            BondingClass::AlloyComposite => "alloy_composite",
        };
        f.write_str(name)
    }
}

/// Literature figures for a component class.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateEntry {
    pub entropy_min: f64,
    pub entropy_max: f64,
    pub grade: f64,
    pub recyclability_mid: f64,
    pub recyclability_halfwidth: f64,
}

/// Outcome of auditing one aggregate row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    /// Valence count implied by the midpoints: `100 * d / (r_mid * h_mid)`.
    pub n_est: f64,
    /// Candidate valence counts that reproduce the band, ascending.
    pub feasible_n: Vec<u32>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        !self.feasible_n.is_empty()
    }

    pub fn nearest_n(&self) -> u32 {
        self.n_est.round() as u32
    }
}

impl AggregateEntry {
    pub fn recyclability_low(&self) -> f64 {
        self.recyclability_mid - self.recyclability_halfwidth
    }

    pub fn recyclability_high(&self) -> f64 {
        self.recyclability_mid + self.recyclability_halfwidth
    }

    /// Grid-searches valence counts against the entropy range.
    ///
    /// For each candidate N the entropy range is sampled at `h_grid_steps`
    /// evenly spaced points; N is feasible when any sample yields a score
    /// inside the band, both edges inclusive.
    pub fn audit(&self, candidates: RangeInclusive<u32>, h_grid_steps: usize) -> FeasibilityReport {
        let steps = h_grid_steps.max(2);
        let span = self.entropy_max - self.entropy_min;
        let r_low = self.recyclability_low();
        let r_high = self.recyclability_high();
        let mut feasible_n = Vec::new();
        for n in candidates {
            if n == 0 {
                continue;
            }
            let hit = (0..steps).any(|k| {
                let h = self.entropy_min + span * k as f64 / (steps - 1) as f64;
                if h <= 0.0 {
                    return false;
                }
                let r = AMPLIFICATION * self.grade / (f64::from(n) * h);
                r >= r_low && r <= r_high
            });
            if hit {
                feasible_n.push(n);
            }
        }
        let h_mid = (self.entropy_min + self.entropy_max) / 2.0;
        let n_est = AMPLIFICATION * self.grade / (self.recyclability_mid * h_mid);
        FeasibilityReport { n_est, feasible_n }
    }

    pub fn audit_default(&self) -> FeasibilityReport {
        self.audit(DEFAULT_N_CANDIDATES, DEFAULT_H_GRID_STEPS)
    }
}

/// Payload of a component record.
#[derive(Debug, Clone, PartialEq)]
pub enum RecordData {
    Aggregate(AggregateEntry),
    Composition(ComponentSpec),
}

/// One component class in the database.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRecord {
    pub component_id: String,
    pub display_name: String,
    pub aliases: Vec<String>,
    pub bonding_class: BondingClass,
    /// None for classification-only classes such as the bare board.
    pub data: Option<RecordData>,
}

impl ComponentRecord {
    pub fn aggregate(&self) -> Option<&AggregateEntry> {
        match &self.data {
            Some(RecordData::Aggregate(agg)) => Some(agg),
            _ => None,
        }
    }

    pub fn composition(&self) -> Option<&ComponentSpec> {
        match &self.data {
            Some(RecordData::Composition(spec)) => Some(spec),
            _ => None,
        }
    }

    /// Single representative score used for planning, if the record
    /// supports one: the band midpoint for aggregates, the assessed score
    /// for compositions. None for classification-only records and for
    /// compositions that fail assessment.
    pub fn recyclability_point(&self) -> Option<f64> {
        match &self.data {
            Some(RecordData::Aggregate(agg)) => Some(agg.recyclability_mid),
            Some(RecordData::Composition(spec)) => {
                assess_component(spec).ok().map(|res| res.recyclability)
            }
            None => None,
        }
        .filter(|r| *r > 0.0)
    }
}

/// A database inconsistency found by [`Database::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub component_id: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.component_id, self.message)
    }
}

#[derive(Debug, Error)]
pub enum DbError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate component id or alias `{id}`")]
    DuplicateId { id: String },
    #[error("schema violation: {message}")]
    SchemaViolation { message: String },
    #[error("unknown component `{label}`")]
    UnknownComponent { label: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDoc {
    version: u32,
    components: Vec<FileComponent>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileComponent {
    id: String,
    display_name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    aliases: Vec<String>,
    bonding_class: BondingClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    aggregate: Option<FileAggregate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    composition: Option<FileComposition>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileAggregate {
    h_min: f64,
    h_max: f64,
    d: f64,
    r_mid: f64,
    r_halfwidth: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileComposition {
    n_valences: u32,
    materials: Vec<MaterialEntry>,
}

impl FileComponent {
    fn into_record(self) -> Result<ComponentRecord, DbError> {
        if self.id.is_empty() {
            return Err(DbError::SchemaViolation {
                message: "component id must not be empty".to_owned(),
            });
        }
        let data = match (self.aggregate, self.composition) {
            (Some(_), Some(_)) => {
                return Err(DbError::SchemaViolation {
                    message: format!(
                        "component `{}` declares both aggregate and composition",
                        self.id
                    ),
                });
            }
            (Some(agg), None) => Some(RecordData::Aggregate(AggregateEntry {
                entropy_min: agg.h_min,
                entropy_max: agg.h_max,
                grade: agg.d,
                recyclability_mid: agg.r_mid,
                recyclability_halfwidth: agg.r_halfwidth,
            })),
            (None, Some(comp)) => Some(RecordData::Composition(ComponentSpec {
                component_id: self.id.clone(),
                materials: comp.materials,
                valence_total: comp.n_valences,
            })),
            (None, None) => None,
        };
        Ok(ComponentRecord {
            component_id: self.id,
            display_name: self.display_name,
            aliases: self.aliases,
            bonding_class: self.bonding_class,
            data,
        })
    }

    fn from_record(record: &ComponentRecord) -> FileComponent {
        let (aggregate, composition) = match &record.data {
            Some(RecordData::Aggregate(agg)) => (
                Some(FileAggregate {
                    h_min: agg.entropy_min,
                    h_max: agg.entropy_max,
                    d: agg.grade,
                    r_mid: agg.recyclability_mid,
                    r_halfwidth: agg.recyclability_halfwidth,
                }),
                None,
            ),
            Some(RecordData::Composition(spec)) => (
                None,
                Some(FileComposition {
                    n_valences: spec.valence_total,
                    materials: spec.materials.clone(),
                }),
            ),
            None => (None, None),
        };
        FileComponent {
            id: record.component_id.clone(),
            display_name: record.display_name.clone(),
            aliases: record.aliases.clone(),
            bonding_class: record.bonding_class,
            aggregate,
            composition,
        }
    }
}

/// Parses one component object on its own, outside a database document.
pub fn parse_component(text: &str) -> Result<ComponentRecord, DbError> {
    let file: FileComponent = serde_json::from_str(text).map_err(|e| DbError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.into_record()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Database {
    records: Vec<ComponentRecord>,
    index: HashMap<String, usize>,
}

impl Database {
    /// The database bundled into the library.
    pub fn builtin() -> Database {
        Database::from_json(BUILTIN_DB_JSON).expect("bundled database parses")
    }

    pub fn load(path: &Path) -> Result<Database, DbError> {
        let text = std::fs::read_to_string(path).map_err(|source| DbError::Io {
            path: path.to_owned(),
            source,
        })?;
        Database::from_json(&text)
    }

    /// Parses a database document. A blank document is an empty database.
    pub fn from_json(text: &str) -> Result<Database, DbError> {
        if text.trim().is_empty() {
            return Ok(Database::default());
        }
        let doc: FileDoc = serde_json::from_str(text).map_err(|e| DbError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if doc.version != 1 {
            return Err(DbError::SchemaViolation {
                message: format!("unsupported database version {}", doc.version),
            });
        }
        let mut records = Vec::with_capacity(doc.components.len());
        for file in doc.components {
            records.push(file.into_record()?);
        }
        let index = build_index(&records)?;
        Ok(Database { records, index })
    }

    pub fn to_json(&self) -> String {
        let doc = FileDoc {
            version: 1,
            components: self.records.iter().map(FileComponent::from_record).collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("database serializes");
        out.push('\n');
        out
    }

    pub fn records(&self) -> &[ComponentRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Resolves a class label case-insensitively via record ids and aliases.
    pub fn lookup(&self, label: &str) -> Result<&ComponentRecord, DbError> {
        self.index
            .get(&label.to_lowercase())
            .map(|&i| &self.records[i])
            .ok_or_else(|| DbError::UnknownComponent {
                label: label.to_owned(),
            })
    }

    /// Checks numeric invariants of every record and audits every
    /// aggregate row. Returns all findings rather than stopping at the
    /// first, so a report can list them together.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for record in &self.records {
            let mut push = |message: String| {
                out.push(Violation {
                    component_id: record.component_id.clone(),
                    message,
                });
            };
            match &record.data {
                Some(RecordData::Aggregate(agg)) => {
                    let mut sound = true;
                    let finite = [
                        agg.entropy_min,
                        agg.entropy_max,
                        agg.grade,
                        agg.recyclability_mid,
                        agg.recyclability_halfwidth,
                    ]
                    .iter()
                    .all(|v| v.is_finite());
                    if !finite {
                        push("aggregate contains a non-finite value".to_owned());
                        sound = false;
                    } else {
                        if agg.entropy_min <= 0.0 {
                            push(format!("entropy minimum {} must be > 0", agg.entropy_min));
                            sound = false;
                        }
                        if agg.entropy_min > agg.entropy_max {
                            push(format!(
                                "entropy range [{}, {}] is inverted",
                                agg.entropy_min, agg.entropy_max
                            ));
                            sound = false;
                        }
                        if agg.grade <= 0.0 {
                            push(format!("grade {} must be > 0", agg.grade));
                            sound = false;
                        }
                        if agg.recyclability_mid <= 0.0 {
                            push(format!(
                                "recyclability midpoint {} must be > 0",
                                agg.recyclability_mid
                            ));
                            sound = false;
                        }
                        if agg.recyclability_halfwidth < 0.0 {
                            push(format!(
                                "recyclability halfwidth {} must be >= 0",
                                agg.recyclability_halfwidth
                            ));
                            sound = false;
                        }
                    }
                    if sound && !agg.audit_default().feasible() {
                        push(format!(
                            "no valence count in {:?} reproduces the band {}..{} from the entropy range",
                            DEFAULT_N_CANDIDATES,
                            agg.recyclability_low(),
                            agg.recyclability_high()
                        ));
                    }
                }
                Some(RecordData::Composition(spec)) => {
                    if let Err(err) = spec.validate() {
                        push(err.to_string());
                    }
                }
                None => {}
            }
        }
        out
    }
}

fn build_index(records: &[ComponentRecord]) -> Result<HashMap<String, usize>, DbError> {
    let mut index = HashMap::new();
    for (i, record) in records.iter().enumerate() {
        let mut keys = vec![record.component_id.clone()];
        keys.extend(record.aliases.iter().cloned());
        for key in keys {
            let key = key.to_lowercase();
            if index.insert(key.clone(), i).is_some() {
                return Err(DbError::DuplicateId { id: key });
            }
        }
    }
    Ok(index)
}
