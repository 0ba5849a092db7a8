//! Rendered outputs: the recyclability map (CSV and SVG), plan documents
//! (JSON and a plain-text table) and assessment lines.
//!
//! Every renderer here is a pure function of its inputs. Numbers in text
//! formats use fixed four-decimal notation, and the SVG contains nothing
//! run-dependent, so identical inputs give identical bytes.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::db::{Database, RecordData};
use crate::plan::{PickPlan, PlanSummary, SummaryTotals};
use crate::recyclability::{
    assess_component, classify_zone, RecyclabilityResult, Zone, EASY_THRESHOLD,
    MODERATE_THRESHOLD, RECOVERY_THRESHOLD,
};

/// One band of the recyclability map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapRow {
    pub component_id: String,
    pub r_low: f64,
    pub r_mid: f64,
    pub r_high: f64,
    pub zone: Zone,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("bad csv header `{found}`")]
    CsvHeader { found: String },
    #[error("csv line {line}: {message}")]
    CsvField { line: usize, message: String },
}

/// Extracts map rows from a database: one band per aggregate record, one
/// point row per assessable composition. Classification-only records and
/// compositions that fail assessment yield nothing. Rows sort by
/// midpoint, best first, then by id.
pub fn map_rows(db: &Database) -> Vec<MapRow> {
    let mut rows: Vec<MapRow> = db
        .records()
        .iter()
        .filter_map(|record| match &record.data {
            Some(RecordData::Aggregate(agg)) => Some(MapRow {
                component_id: record.component_id.clone(),
                r_low: agg.recyclability_low(),
                r_mid: agg.recyclability_mid,
                r_high: agg.recyclability_high(),
                zone: classify_zone(agg.recyclability_mid),
            }),
            Some(RecordData::Composition(spec)) => {
                let res = assess_component(spec).ok()?;
                Some(MapRow {
                    component_id: record.component_id.clone(),
                    r_low: res.recyclability,
                    r_mid: res.recyclability,
                    r_high: res.recyclability,
                    zone: res.zone,
                })
            }
            None => None,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.r_mid
            .total_cmp(&a.r_mid)
            .then_with(|| a.component_id.cmp(&b.component_id))
    });
    rows
}

pub const MAP_CSV_HEADER: &str = "component_id,r_low,r_mid,r_high,zone";

pub fn render_map_csv(rows: &[MapRow]) -> String {
    let mut out = String::from(MAP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{:.4},{:.4},{:.4},{}",
            row.component_id, row.r_low, row.r_mid, row.r_high, row.zone
        );
    }
    out
}

/// Parses text produced by [`render_map_csv`].
pub fn parse_map_csv(text: &str) -> Result<Vec<MapRow>, ReportError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header != MAP_CSV_HEADER {
        return Err(ReportError::CsvHeader {
            found: header.to_owned(),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(ReportError::CsvField {
                line: line_no,
                message: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let number = |s: &str| {
            s.parse::<f64>().map_err(|e| ReportError::CsvField {
                line: line_no,
                message: format!("`{s}`: {e}"),
            })
        };
        rows.push(MapRow {
            component_id: fields[0].to_owned(),
            r_low: number(fields[1])?,
            r_mid: number(fields[2])?,
            r_high: number(fields[3])?,
            zone: fields[4].parse().map_err(|e| ReportError::CsvField {
                line: line_no,
                message: e,
            })?,
        });
    }
    Ok(rows)
}

fn zone_color(zone: Zone) -> &'static str {
    match zone {
        Zone::BelowRecovery => "#9aa0a6",
        Zone::Difficult => "#d93025",
        Zone::Moderate => "#f9ab00",
        Zone::Easy => "#188038",
    }
}

/// Horizontal band chart of the map. Fully self-contained and
/// deterministic: no timestamps, no random ids.
pub fn render_map_svg(rows: &[MapRow]) -> String {
    const LABEL_W: f64 = 170.0;
    const PLOT_W: f64 = 520.0;
    const RIGHT_PAD: f64 = 30.0;
    const TOP: f64 = 48.0;
    const BOTTOM: f64 = 40.0;
    const ROW_GAP: f64 = 30.0;
    const BAR_H: f64 = 16.0;

    let width = LABEL_W + PLOT_W + RIGHT_PAD;
    let height = TOP + rows.len() as f64 * ROW_GAP + BOTTOM;
    let r_top = rows
        .iter()
        .map(|r| r.r_high)
        .fold(EASY_THRESHOLD, f64::max);
    let axis_max = (r_top / 10.0).ceil() * 10.0;
    let sx = |v: f64| LABEL_W + v / axis_max * PLOT_W;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        out,
        "  <rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>"
    );
    let _ = writeln!(
        out,
        "  <text x=\"{LABEL_W:.0}\" y=\"22\" font-size=\"14\" fill=\"#202124\">Recyclability map</text>"
    );
    let axis_y = height - BOTTOM;
    for threshold in [RECOVERY_THRESHOLD, MODERATE_THRESHOLD, EASY_THRESHOLD] {
        let x = sx(threshold);
        let _ = writeln!(
            out,
            "  <line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{axis_y:.2}\" stroke=\"#80868b\" stroke-dasharray=\"4 3\"/>",
            TOP - 8.0
        );
        let _ = writeln!(
            out,
            "  <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#80868b\">{threshold:.0}</text>",
            TOP - 12.0
        );
    }
    let _ = writeln!(
        out,
        "  <line x1=\"{LABEL_W:.0}\" y1=\"{axis_y:.2}\" x2=\"{:.2}\" y2=\"{axis_y:.2}\" stroke=\"#3c4043\"/>",
        LABEL_W + PLOT_W
    );
    let mut tick = 0.0;
    while tick <= axis_max {
        let x = sx(tick);
        let _ = writeln!(
            out,
            "  <line x1=\"{x:.2}\" y1=\"{axis_y:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#3c4043\"/>",
            axis_y + 4.0
        );
        let _ = writeln!(
            out,
            "  <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#3c4043\">{tick:.0}</text>",
            axis_y + 16.0
        );
        tick += 10.0;
    }
    for (i, row) in rows.iter().enumerate() {
        let y_mid = TOP + i as f64 * ROW_GAP + ROW_GAP / 2.0;
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" fill=\"#202124\">{}</text>",
            LABEL_W - 8.0,
            y_mid + 4.0,
            row.component_id
        );
        let x0 = sx(row.r_low);
        let bar_w = (sx(row.r_high) - x0).max(2.0);
        let _ = writeln!(
            out,
            "  <rect x=\"{x0:.2}\" y=\"{:.2}\" width=\"{bar_w:.2}\" height=\"{BAR_H:.0}\" fill=\"{}\" fill-opacity=\"0.85\"/>",
            y_mid - BAR_H / 2.0,
            zone_color(row.zone)
        );
        let xm = sx(row.r_mid);
        let _ = writeln!(
            out,
            "  <line x1=\"{xm:.2}\" y1=\"{:.2}\" x2=\"{xm:.2}\" y2=\"{:.2}\" stroke=\"#202124\" stroke-width=\"2\"/>",
            y_mid - BAR_H / 2.0 - 2.0,
            y_mid + BAR_H / 2.0 + 2.0
        );
    }
    out.push_str("</svg>\n");
    out
}

#[derive(Serialize)]
struct PlanDocument<'a> {
    plans: &'a [PickPlan],
    summary: &'a PlanSummary,
}

/// Plans plus summary as a pretty-printed JSON document.
pub fn plan_document_json(plans: &[PickPlan], summary: &PlanSummary) -> String {
    let doc = PlanDocument { plans, summary };
    let mut out = serde_json::to_string_pretty(&doc).expect("plan document serializes");
    out.push('\n');
    out
}

fn summary_line(out: &mut String, label: &str, totals: &SummaryTotals) {
    let mean = match totals.mean_recyclability {
        Some(m) => format!("{m:.4}"),
        None => "n/a".to_owned(),
    };
    let _ = writeln!(
        out,
        "  {label}: picks={} mean_r={mean} zones b/d/m/e={}/{}/{}/{} excluded b/l/u={}/{}/{}",
        totals.picks,
        totals.zones.below_recovery,
        totals.zones.difficult,
        totals.zones.moderate,
        totals.zones.easy,
        totals.excluded.below_recovery,
        totals.excluded.low_confidence,
        totals.excluded.unbound
    );
}

/// Human-readable rendering of plans and summary.
pub fn render_plan_table(plans: &[PickPlan], summary: &PlanSummary) -> String {
    let mut out = String::new();
    for plan in plans {
        let _ = writeln!(
            out,
            "board {}: {} pick(s), {} excluded",
            plan.board_id,
            plan.picks.len(),
            plan.exclusions.len()
        );
        for (rank, pick) in plan.picks.iter().enumerate() {
            let d = &pick.detection;
            let _ = writeln!(
                out,
                "  {:>2}. {:<20} score={:<9.4} r={:<8.4} conf={:.2} bbox=[{:.1},{:.1},{:.1},{:.1}] label={}",
                rank + 1,
                pick.component_id,
                pick.score,
                pick.recyclability,
                d.confidence,
                d.bbox.x,
                d.bbox.y,
                d.bbox.width,
                d.bbox.height,
                d.class_label
            );
        }
        for exclusion in &plan.exclusions {
            let d = &exclusion.detection;
            let _ = writeln!(
                out,
                "   - {:<20} reason={} conf={:.2}",
                d.class_label, exclusion.reason, d.confidence
            );
        }
    }
    let _ = writeln!(out, "summary:");
    for board in &summary.boards {
        summary_line(&mut out, &board.board_id, &board.totals);
    }
    summary_line(&mut out, "overall", &summary.overall);
    out
}

/// One-line rendering of an assessment, e.g.
/// `H=1.0000 D=1.0000 R=50.0000 zone=Easy`.
pub fn render_assess_text(result: &RecyclabilityResult) -> String {
    format!(
        "H={:.4} D={:.4} R={:.4} zone={}\n",
        result.entropy_bits, result.grade, result.recyclability, result.zone
    )
}

pub fn render_assess_json(result: &RecyclabilityResult) -> String {
    let mut out = serde_json::to_string_pretty(result).expect("assessment serializes");
    out.push('\n');
    out
}
