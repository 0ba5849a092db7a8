//! `wecr`: assess component compositions, audit the reference database,
//! plan disassembly picks from detection exports, and render the
//! recyclability map.
//!
//! Exit codes: 0 success, 1 audit found an infeasible aggregate row,
//! 2 input or schema error, 3 degenerate computation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wecr_core::db::{parse_component, Database};
use wecr_core::detect::{bind_detections, parse_detections_file};
use wecr_core::plan::{build_plan, plan_summary, PlannerConfig, ScoreMode};
use wecr_core::recyclability::{assess_component, RecyclabilityError};
use wecr_core::report;

/// Environment variable naming a database file to use instead of the
/// bundled one. An explicit `--db` flag wins over it.
const DB_ENV_VAR: &str = "WECR_DB";

#[derive(Parser)]
#[command(
    name = "wecr",
    version,
    about = "Recyclability scoring and disassembly planning for circuit board components"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one component composition file
    Assess {
        /// JSON file holding a single component with a composition
        file: PathBuf,
    },
    /// Check every aggregate database row for internal consistency
    Audit {
        /// Database file (default: bundled database, or $WECR_DB)
        #[arg(long)]
        db: Option<PathBuf>,
    },
    /// Build ranked pick plans from a detection export
    Plan {
        /// Detection file, one JSON object per line
        detections: PathBuf,
        /// Database file (default: bundled database, or $WECR_DB)
        #[arg(long)]
        db: Option<PathBuf>,
        /// Minimum recyclability a detection must reach to be picked
        #[arg(long)]
        threshold: Option<f64>,
        /// Minimum detector confidence to be picked
        #[arg(long = "confidence-floor")]
        confidence_floor: Option<f64>,
        /// What to rank picks by
        #[arg(long = "score-mode", value_enum)]
        score_mode: Option<ScoreModeArg>,
        /// Write the JSON document here instead of stdout
        #[arg(long = "json-out")]
        json_out: Option<PathBuf>,
    },
    /// Render the recyclability map
    Map {
        /// Database file (default: bundled database, or $WECR_DB)
        #[arg(long)]
        db: Option<PathBuf>,
        /// Output path; with --format both, the extension is appended
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScoreModeArg {
    /// Rank by recyclability alone
    RecyclabilityOnly,
    /// Rank by recyclability weighted by confidence
    RecyclabilityTimesConfidence,
}

impl From<ScoreModeArg> for ScoreMode {
    fn from(arg: ScoreModeArg) -> ScoreMode {
        match arg {
            ScoreModeArg::RecyclabilityOnly => ScoreMode::RecyclabilityOnly,
            ScoreModeArg::RecyclabilityTimesConfidence => ScoreMode::RecyclabilityTimesConfidence,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Svg,
    Both,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Failure {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }

    fn degenerate(message: impl ToString) -> Failure {
        Failure {
            code: 3,
            message: message.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Assess { file } => cmd_assess(&file),
        Command::Audit { db } => cmd_audit(db.as_deref()),
        Command::Plan {
            detections,
            db,
            threshold,
            confidence_floor,
            score_mode,
            json_out,
        } => cmd_plan(
            &detections,
            db.as_deref(),
            threshold,
            confidence_floor,
            score_mode,
            json_out.as_deref(),
        ),
        Command::Map { db, out, format } => cmd_map(db.as_deref(), &out, format),
    }
}

fn load_db(flag: Option<&Path>) -> Result<Database, Failure> {
    let from_env = std::env::var_os(DB_ENV_VAR).map(PathBuf::from);
    match flag.map(Path::to_owned).or(from_env) {
        Some(path) => Database::load(&path).map_err(Failure::input),
        None => Ok(Database::builtin()),
    }
}

fn cmd_assess(file: &Path) -> Result<ExitCode, Failure> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Failure::input(format!("cannot read `{}`: {e}", file.display())))?;
    let record = parse_component(&text).map_err(Failure::input)?;
    let spec = record.composition().ok_or_else(|| {
        Failure::input(format!(
            "component `{}` has no composition to assess",
            record.component_id
        ))
    })?;
    let result = assess_component(spec).map_err(|e| match e {
        RecyclabilityError::ZeroEntropy => Failure::degenerate(e),
        other => Failure::input(other),
    })?;
    print!("{}", report::render_assess_text(&result));
    print!("{}", report::render_assess_json(&result));
    Ok(ExitCode::SUCCESS)
}

fn cmd_audit(db_flag: Option<&Path>) -> Result<ExitCode, Failure> {
    let db = load_db(db_flag)?;
    for violation in db.validate() {
        println!("violation: {violation}");
    }
    let mut total = 0usize;
    let mut feasible = 0usize;
    for record in db.records() {
        let Some(agg) = record.aggregate() else {
            continue;
        };
        total += 1;
        let report = agg.audit_default();
        let status = if report.feasible() {
            feasible += 1;
            "feasible"
        } else {
            "INFEASIBLE"
        };
        println!(
            "{:<20} {:<10} n_est={:.2} (nearest {}) feasible_n={:?}",
            record.component_id,
            status,
            report.n_est,
            report.nearest_n(),
            report.feasible_n
        );
    }
    println!("{feasible}/{total} aggregate rows feasible");
    if feasible == total {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn cmd_plan(
    detections_path: &Path,
    db_flag: Option<&Path>,
    threshold: Option<f64>,
    confidence_floor: Option<f64>,
    score_mode: Option<ScoreModeArg>,
    json_out: Option<&Path>,
) -> Result<ExitCode, Failure> {
    let db = load_db(db_flag)?;
    let detections = parse_detections_file(detections_path).map_err(Failure::input)?;
    let mut config = PlannerConfig::default();
    if let Some(t) = threshold {
        config.recovery_threshold = t;
    }
    if let Some(f) = confidence_floor {
        config.confidence_floor = f;
    }
    if let Some(mode) = score_mode {
        config.score_mode = mode.into();
    }
    let (bound, unbound) = bind_detections(&detections, &db);
    let plans = build_plan(&bound, &unbound, &config);
    let summary = plan_summary(&plans);
    let json = report::plan_document_json(&plans, &summary);
    let table = report::render_plan_table(&plans, &summary);
    match json_out {
        Some(path) => {
            std::fs::write(path, json)
                .map_err(|e| Failure::input(format!("cannot write `{}`: {e}", path.display())))?;
            print!("{table}");
        }
        None => {
            print!("{json}");
            println!();
            print!("{table}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_map(db_flag: Option<&Path>, out: &Path, format: FormatArg) -> Result<ExitCode, Failure> {
    let db = load_db(db_flag)?;
    let rows = report::map_rows(&db);
    let write = |path: &Path, content: &str| -> Result<(), Failure> {
        std::fs::write(path, content)
            .map_err(|e| Failure::input(format!("cannot write `{}`: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
        Ok(())
    };
    match format {
        FormatArg::Csv => write(out, &report::render_map_csv(&rows))?,
        FormatArg::Svg => write(out, &report::render_map_svg(&rows))?,
        FormatArg::Both => {
            let with_ext = |ext: &str| PathBuf::from(format!("{}.{ext}", out.display()));
            write(&with_ext("csv"), &report::render_map_csv(&rows))?;
            write(&with_ext("svg"), &report::render_map_svg(&rows))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
