//! Greedy pick planning over bound detections.
//!
//! Each board gets an independent plan: detections worth recovering,
//! ranked by score, plus every excluded detection with the reason it was
//! dropped. All orderings are total, down to box coordinates, so two
//! permutations of the same input always produce byte-identical plans.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;

use crate::detect::{BoundDetection, Detection};
use crate::recyclability::{classify_zone, Zone, RECOVERY_THRESHOLD};

/// What a detection is ranked by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// The record's recyclability point alone.
    RecyclabilityOnly,
    /// Recyclability weighted by detector confidence.
    RecyclabilityTimesConfidence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    /// Detections whose recyclability point falls below this are excluded.
    pub recovery_threshold: f64,
    /// Detections less confident than this are excluded.
    pub confidence_floor: f64,
    pub score_mode: ScoreMode,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            recovery_threshold: RECOVERY_THRESHOLD,
            confidence_floor: 0.0,
            score_mode: ScoreMode::RecyclabilityTimesConfidence,
        }
    }
}

/// Why a detection was left out of the pick list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    BelowRecovery,
    LowConfidence,
    Unbound,
}

impl std::fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ExclusionReason::BelowRecovery => "below-recovery",
            ExclusionReason::LowConfidence => "low-confidence",
            ExclusionReason::Unbound => "unbound",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pick {
    pub detection: Detection,
    pub component_id: String,
    pub recyclability: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub detection: Detection,
    pub reason: ExclusionReason,
}

/// Plan for one board.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PickPlan {
    pub board_id: String,
    pub picks: Vec<Pick>,
    pub exclusions: Vec<Exclusion>,
}

/// Compares box coordinates and confidence, the last resort before
/// input order. Total because every field compares via `total_cmp`.
fn content_cmp(a: &Detection, b: &Detection) -> Ordering {
    a.bbox
        .x
        .total_cmp(&b.bbox.x)
        .then_with(|| a.bbox.y.total_cmp(&b.bbox.y))
        .then_with(|| a.bbox.width.total_cmp(&b.bbox.width))
        .then_with(|| a.bbox.height.total_cmp(&b.bbox.height))
        .then_with(|| a.confidence.total_cmp(&b.confidence))
}

struct Candidate {
    pick: Pick,
    index: usize,
}

fn pick_cmp(a: &Candidate, b: &Candidate) -> Ordering {
    b.pick
        .score
        .total_cmp(&a.pick.score)
        .then_with(|| {
            b.pick
                .detection
                .bbox
                .area()
                .total_cmp(&a.pick.detection.bbox.area())
        })
        .then_with(|| a.pick.detection.class_label.cmp(&b.pick.detection.class_label))
        .then_with(|| content_cmp(&a.pick.detection, &b.pick.detection))
        .then_with(|| a.index.cmp(&b.index))
}

fn exclusion_cmp(a: &(Exclusion, usize), b: &(Exclusion, usize)) -> Ordering {
    a.0.reason
        .cmp(&b.0.reason)
        .then_with(|| a.0.detection.class_label.cmp(&b.0.detection.class_label))
        .then_with(|| {
            b.0.detection
                .bbox
                .area()
                .total_cmp(&a.0.detection.bbox.area())
        })
        .then_with(|| content_cmp(&a.0.detection, &b.0.detection))
        .then_with(|| a.1.cmp(&b.1))
}

/// Builds one plan per board, boards sorted by id.
pub fn build_plan(
    bound: &[BoundDetection],
    unbound: &[Detection],
    config: &PlannerConfig,
) -> Vec<PickPlan> {
    type Board = (Vec<Candidate>, Vec<(Exclusion, usize)>);
    let mut boards: BTreeMap<String, Board> = BTreeMap::new();
    for (index, item) in bound.iter().enumerate() {
        let board = boards.entry(item.detection.board_id.clone()).or_default();
        if item.recyclability_point < config.recovery_threshold {
            board.1.push((
                Exclusion {
                    detection: item.detection.clone(),
                    reason: ExclusionReason::BelowRecovery,
                },
                index,
            ));
        } else if item.detection.confidence < config.confidence_floor {
            board.1.push((
                Exclusion {
                    detection: item.detection.clone(),
                    reason: ExclusionReason::LowConfidence,
                },
                index,
            ));
        } else {
            let score = match config.score_mode {
                ScoreMode::RecyclabilityOnly => item.recyclability_point,
                ScoreMode::RecyclabilityTimesConfidence => {
                    item.recyclability_point * item.detection.confidence
                }
            };
            board.0.push(Candidate {
                pick: Pick {
                    detection: item.detection.clone(),
                    component_id: item.record.component_id.clone(),
                    recyclability: item.recyclability_point,
                    score,
                },
                index,
            });
        }
    }
    for (offset, det) in unbound.iter().enumerate() {
        let board = boards.entry(det.board_id.clone()).or_default();
        board.1.push((
            Exclusion {
                detection: det.clone(),
                reason: ExclusionReason::Unbound,
            },
            bound.len() + offset,
        ));
    }
    boards
        .into_iter()
        .map(|(board_id, (mut candidates, mut exclusions))| {
            candidates.sort_by(pick_cmp);
            exclusions.sort_by(exclusion_cmp);
            PickPlan {
                board_id,
                picks: candidates.into_iter().map(|c| c.pick).collect(),
                exclusions: exclusions.into_iter().map(|(e, _)| e).collect(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ZoneCounts {
    pub below_recovery: usize,
    pub difficult: usize,
    pub moderate: usize,
    pub easy: usize,
}

impl ZoneCounts {
    fn add(&mut self, zone: Zone) {
        match zone {
            Zone::BelowRecovery => self.below_recovery += 1,
            Zone::Difficult => self.difficult += 1,
            Zone::Moderate => self.moderate += 1,
            Zone::Easy => self.easy += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ExclusionCounts {
    pub below_recovery: usize,
    pub low_confidence: usize,
    pub unbound: usize,
}

/// Aggregates shared by per-board and overall summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryTotals {
    pub picks: usize,
    pub zones: ZoneCounts,
    /// None when there are no picks to average.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_recyclability: Option<f64>,
    pub excluded: ExclusionCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoardSummary {
    pub board_id: String,
    #[serde(flatten)]
    pub totals: SummaryTotals,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanSummary {
    pub boards: Vec<BoardSummary>,
    pub overall: SummaryTotals,
}

fn totals_for<'a, P, E>(picks: P, exclusions: E) -> SummaryTotals
where
    P: Iterator<Item = &'a Pick>,
    E: Iterator<Item = &'a Exclusion>,
{
    let mut count = 0usize;
    let mut sum = 0.0f64;
    let mut zones = ZoneCounts::default();
    for pick in picks {
        count += 1;
        sum += pick.recyclability;
        zones.add(classify_zone(pick.recyclability));
    }
    let mut excluded = ExclusionCounts::default();
    for exclusion in exclusions {
        match exclusion.reason {
            ExclusionReason::BelowRecovery => excluded.below_recovery += 1,
            ExclusionReason::LowConfidence => excluded.low_confidence += 1,
            ExclusionReason::Unbound => excluded.unbound += 1,
        }
    }
    SummaryTotals {
        picks: count,
        zones,
        mean_recyclability: if count > 0 {
            Some(sum / count as f64)
        } else {
            None
        },
        excluded,
    }
}

/// Per-board and overall tallies for a set of plans.
pub fn plan_summary(plans: &[PickPlan]) -> PlanSummary {
    let boards = plans
        .iter()
        .map(|plan| BoardSummary {
            board_id: plan.board_id.clone(),
            totals: totals_for(plan.picks.iter(), plan.exclusions.iter()),
        })
        .collect();
    let overall = totals_for(
        plans.iter().flat_map(|p| p.picks.iter()),
        plans.iter().flat_map(|p| p.exclusions.iter()),
    );
    PlanSummary { boards, overall }
}
