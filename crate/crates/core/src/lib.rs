//! Recyclability analytics for end-of-life circuit boards.
//!
//! The library scores how recoverable an electronic component is from
//! the entropy of its material mix, binds vision detections to a
//! reference database of component classes, and turns the result into
//! ranked disassembly plans and recyclability maps.

pub mod db;
pub mod detect;
pub mod plan;
pub mod recyclability;
pub mod report;

pub use db::{AggregateEntry, ComponentRecord, Database, DbError, FeasibilityReport};
pub use detect::{bind_detections, parse_detections, BoundDetection, Detection, DetectError};
pub use plan::{build_plan, plan_summary, PickPlan, PlanSummary, PlannerConfig, ScoreMode};
pub use recyclability::{
    assess_component, classify_zone, ComponentSpec, RecyclabilityError, RecyclabilityResult, Zone,
};
