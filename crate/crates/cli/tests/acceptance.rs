//! Release gate. Each test prints one [PASS]/[FAIL] line for its
//! criterion (visible with `cargo test --test acceptance -- --nocapture`)
//! and fails the build when the criterion is not met.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wecr_core::db::Database;
use wecr_core::detect::{bind_detections, BoundingBox, Detection};
use wecr_core::plan::{build_plan, plan_summary, PlannerConfig, ScoreMode};
use wecr_core::recyclability::{
    classify_zone, compute_grade, entropy_bits, normalize, Bonding, ComponentSpec, MaterialEntry,
    Zone,
};
use wecr_core::report::{plan_document_json, render_plan_table};

fn check(name: &str, run: impl FnOnce() -> Result<(), String>) {
    match run() {
        Ok(()) => println!("[PASS] {name}"),
        Err(message) => {
            println!("[FAIL] {name}: {message}");
            panic!("{name}: {message}");
        }
    }
}

fn ensure(condition: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if condition {
        Ok(())
    } else {
        Err(message())
    }
}

fn kahan_add(sum: &mut f64, comp: &mut f64, value: f64) {
    let y = value - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

/// Independent entropy reference: compensated accumulation in
/// natural-log space, no sorting, no shared code with the library.
fn reference_entropy(fractions: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut c = 0.0;
    for &f in fractions {
        kahan_add(&mut total, &mut c, f);
    }
    let mut h = 0.0;
    let mut hc = 0.0;
    for &f in fractions {
        let p = f / total;
        if p > 0.0 {
            kahan_add(&mut h, &mut hc, -(p * p.ln()) / std::f64::consts::LN_2);
        }
    }
    h
}

fn random_fractions(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<f64> {
    let n = rng.gen_range(1..=max_len);
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..100.0)).collect();
    normalize(&weights).unwrap()
}

fn random_spec(rng: &mut ChaCha8Rng) -> ComponentSpec {
    let valence_total = rng.gen_range(1..=8u32);
    let fractions = random_fractions(rng, 12);
    let materials = fractions
        .into_iter()
        .enumerate()
        .map(|(i, fraction)| MaterialEntry {
            name: format!("m{i}"),
            fraction,
            valence_rank: rng.gen_range(1..=valence_total),
            bonding: if rng.gen_bool(0.5) {
                Bonding::ChemicallyCombined
            } else {
                Bonding::PhysicallyMixed
            },
            recoverable: i == 0 || rng.gen_bool(0.7),
        })
        .collect();
    ComponentSpec {
        component_id: "random".to_owned(),
        materials,
        valence_total,
    }
}

fn with_bonding(spec: &ComponentSpec, bonding: Bonding) -> ComponentSpec {
    let mut out = spec.clone();
    for m in &mut out.materials {
        m.bonding = bonding;
    }
    out
}

#[test]
fn criterion_1_every_reference_band_is_reachable() {
    check("1: every aggregate row in the bundled database is feasible", || {
        let db = Database::builtin();
        let started = Instant::now();
        let mut audited = 0usize;
        for record in db.records() {
            let Some(agg) = record.aggregate() else {
                continue;
            };
            audited += 1;
            let report = agg.audit_default();
            ensure(report.feasible(), || {
                format!("{} has no feasible valence count", record.component_id)
            })?;
        }
        let elapsed = started.elapsed();
        ensure(audited == 7, || format!("expected 7 aggregate rows, found {audited}"))?;
        ensure(elapsed.as_secs_f64() < 1.0, || {
            format!("audit took {elapsed:?}, limit is 1s")
        })
    });
}

#[test]
fn criterion_2_capacitor_valence_estimate() {
    check("2: aluminum capacitor midpoints imply 5.81, nearest 6", || {
        let db = Database::builtin();
        let report = db
            .lookup("aluminum-capacitor")
            .unwrap()
            .aggregate()
            .unwrap()
            .audit_default();
        ensure((report.n_est - 5.81).abs() <= 0.01, || {
            format!("n_est {} not within 5.81 +/- 0.01", report.n_est)
        })?;
        ensure(report.nearest_n() == 6, || {
            format!("nearest valence count {} != 6", report.nearest_n())
        })?;
        ensure(report.feasible_n.contains(&6), || {
            format!("6 missing from feasible set {:?}", report.feasible_n)
        })
    });
}

#[test]
fn criterion_3_zone_boundaries() {
    check("3: zone probes at and around every boundary", || {
        let probes = [
            (0.0, Zone::BelowRecovery),
            (17.999, Zone::BelowRecovery),
            (18.0, Zone::Difficult),
            (29.999, Zone::Difficult),
            (30.0, Zone::Moderate),
            (49.999, Zone::Moderate),
            (50.0, Zone::Easy),
            (90.0, Zone::Easy),
        ];
        for (score, expected) in probes {
            let got = classify_zone(score);
            ensure(got == expected, || {
                format!("classify_zone({score}) = {got:?}, expected {expected:?}")
            })?;
        }
        Ok(())
    });
}

#[test]
fn criterion_4_entropy_against_independent_reference() {
    check("4: 10k random compositions agree with the reference entropy", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
        let started = Instant::now();
        for case in 0..10_000 {
            let fractions = random_fractions(&mut rng, 20);
            let h = entropy_bits(&fractions).map_err(|e| format!("case {case}: {e}"))?;
            let reference = reference_entropy(&fractions);
            let tolerance = 1e-12 * reference.abs().max(1.0);
            ensure((h - reference).abs() <= tolerance, || {
                format!("case {case}: {h} vs reference {reference}")
            })?;
        }
        let elapsed = started.elapsed();
        ensure(elapsed.as_secs_f64() < 5.0, || {
            format!("suite took {elapsed:?}, limit is 5s")
        })
    });
}

#[test]
fn criterion_5_physical_grade_dominates() {
    check("5: 10k random compositions grade physical >= chemical", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
        for case in 0..10_000 {
            let spec = random_spec(&mut rng);
            let mixed = compute_grade(&spec).map_err(|e| format!("case {case}: {e}"))?;
            let physical = compute_grade(&with_bonding(&spec, Bonding::PhysicallyMixed))
                .map_err(|e| format!("case {case}: {e}"))?;
            let chemical = compute_grade(&with_bonding(&spec, Bonding::ChemicallyCombined))
                .map_err(|e| format!("case {case}: {e}"))?;
            ensure(physical >= mixed - 1e-12, || {
                format!("case {case}: physical {physical} < mixed {mixed}")
            })?;
            ensure(mixed >= chemical - 1e-12, || {
                format!("case {case}: mixed {mixed} < chemical {chemical}")
            })?;
        }
        Ok(())
    });
}

fn shuffle_input(rng: &mut ChaCha8Rng) -> Vec<Detection> {
    let labels = [
        "diode",
        "transistor",
        "ic",
        "resistor",
        "inductor",
        "aluminum-capacitor",
        "tantalum-capacitor",
        "pcb",
        "mystery-part",
    ];
    let mut dets = Vec::with_capacity(50);
    for i in 0..44 {
        let label = labels[i % labels.len()];
        dets.push(Detection {
            board_id: format!("board-{}", i % 3),
            class_label: label.to_owned(),
            bbox: BoundingBox {
                x: f64::from(rng.gen_range(0..500u32)),
                y: f64::from(rng.gen_range(0..500u32)),
                width: f64::from(rng.gen_range(1..100u32)),
                height: f64::from(rng.gen_range(1..100u32)),
            },
            confidence: f64::from(rng.gen_range(0..=100u32)) / 100.0,
        });
    }
    // Deep ties: same class, confidence and area, differing only in x,
    // plus three byte-identical duplicates.
    for x in [10.0, 20.0, 30.0] {
        dets.push(Detection {
            board_id: "board-0".to_owned(),
            class_label: "diode".to_owned(),
            bbox: BoundingBox {
                x,
                y: 5.0,
                width: 40.0,
                height: 10.0,
            },
            confidence: 0.8,
        });
    }
    for _ in 0..3 {
        dets.push(dets[44].clone());
    }
    assert_eq!(dets.len(), 50);
    dets
}

#[test]
fn criterion_6_planner_is_permutation_invariant() {
    check("6: 100 shuffles of 50 detections plan byte-identically", || {
        let db = Database::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
        let dets = shuffle_input(&mut rng);
        let render = |input: &[Detection]| {
            let (bound, unbound) = bind_detections(input, &db);
            let plans = build_plan(&bound, &unbound, &PlannerConfig::default());
            let summary = plan_summary(&plans);
            let mut text = plan_document_json(&plans, &summary);
            text.push_str(&render_plan_table(&plans, &summary));
            text
        };
        let baseline = render(&dets);
        for round in 0..100 {
            let mut shuffled = dets.clone();
            shuffled.shuffle(&mut rng);
            let rendered = render(&shuffled);
            ensure(rendered == baseline, || {
                format!("round {round} produced different bytes")
            })?;
        }
        Ok(())
    });
}

#[test]
fn criterion_7_pure_score_ranking_matches_reference_order() {
    check("7: pure recyclability ranking follows the reference bands", || {
        let db = Database::builtin();
        let ids = [
            "diode",
            "aluminum-capacitor",
            "transistor",
            "inductor",
            "tantalum-capacitor",
            "resistor",
            "ic",
        ];
        let mut scrambled = ids;
        scrambled.reverse();
        let dets: Vec<Detection> = scrambled
            .iter()
            .enumerate()
            .map(|(i, id)| Detection {
                board_id: "flat".to_owned(),
                class_label: (*id).to_owned(),
                bbox: BoundingBox {
                    x: 30.0 * i as f64,
                    y: 10.0,
                    width: 20.0,
                    height: 20.0,
                },
                confidence: 0.9,
            })
            .collect();
        let (bound, unbound) = bind_detections(&dets, &db);
        let config = PlannerConfig {
            score_mode: ScoreMode::RecyclabilityOnly,
            ..PlannerConfig::default()
        };
        let plans = build_plan(&bound, &unbound, &config);
        ensure(plans.len() == 1, || format!("expected 1 board, got {}", plans.len()))?;
        let picked: Vec<&str> = plans[0]
            .picks
            .iter()
            .map(|p| p.component_id.as_str())
            .collect();
        ensure(picked == ids, || format!("pick order {picked:?}, expected {ids:?}"))
    });
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

#[test]
fn criterion_8_cli_outputs_match_frozen_goldens() {
    check("8: plan stdout and map csv match their goldens byte for byte", || {
        let detections = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../data/sample_detections.jsonl");
        let output = std::process::Command::new(env!("CARGO_BIN_EXE_wecr"))
            .arg("plan")
            .arg(&detections)
            .env_remove("WECR_DB")
            .output()
            .map_err(|e| format!("cannot run binary: {e}"))?;
        ensure(output.status.code() == Some(0), || {
            format!(
                "plan exited {:?}: {}",
                output.status.code(),
                String::from_utf8_lossy(&output.stderr)
            )
        })?;
        let expected_plan =
            std::fs::read(golden("plan_stdout.txt")).map_err(|e| format!("golden: {e}"))?;
        ensure(output.stdout == expected_plan, || {
            "plan stdout differs from golden".to_owned()
        })?;

        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let out = dir.path().join("map.csv");
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_wecr"))
            .arg("map")
            .arg("--out")
            .arg(&out)
            .arg("--format")
            .arg("csv")
            .env_remove("WECR_DB")
            .stderr(std::process::Stdio::null())
            .status()
            .map_err(|e| format!("cannot run binary: {e}"))?;
        ensure(status.code() == Some(0), || format!("map exited {:?}", status.code()))?;
        let written = std::fs::read(&out).map_err(|e| e.to_string())?;
        let expected_map =
            std::fs::read(golden("map.csv")).map_err(|e| format!("golden: {e}"))?;
        ensure(written == expected_map, || {
            "map csv differs from golden".to_owned()
        })
    });
}
