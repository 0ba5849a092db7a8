//! Composition-level recyclability scoring.
//!
//! A component is described by the mass fractions of its constituent
//! materials. From that we compute the mixing entropy of the composition
//! (in bits), a recovery grade that discounts chemically bound materials
//! by how deep they sit in the valence ordering, and a scale-free
//! recyclability score that divides grade by entropy. The score maps onto
//! four recovery zones split at 18, 30 and 50.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest deviation of a fraction sum from 1.0 that is still accepted.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Scale factor applied to the grade/entropy ratio.
pub const AMPLIFICATION: f64 = 100.0;

/// Scores below this are not worth recovering at all.
pub const RECOVERY_THRESHOLD: f64 = 18.0;
/// Lower edge of the moderate zone; [18, 30) is difficult.
pub const MODERATE_THRESHOLD: f64 = 30.0;
/// Lower edge of the easy zone; [30, 50) is moderate.
pub const EASY_THRESHOLD: f64 = 50.0;

/// How a material is held inside its component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bonding {
    /// Separable by mechanical treatment; counts toward the grade at full weight.
    #[serde(rename = "physical")]
    PhysicallyMixed,
    /// Chemically bound; discounted by valence rank.
    #[serde(rename = "chemical")]
    ChemicallyCombined,
}

/// One material inside a component composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialEntry {
    pub name: String,
    /// Mass fraction in [0, 1]. All fractions of a composition sum to 1.
    pub fraction: f64,
    /// 1-based position in the valence ordering; at most the component's valence total.
    pub valence_rank: u32,
    pub bonding: Bonding,
    pub recoverable: bool,
}

/// A full material composition for one component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpec {
    pub component_id: String,
    pub materials: Vec<MaterialEntry>,
    /// Number of distinct valences present, the N in the score denominator.
    pub valence_total: u32,
}

/// Recovery zone for a recyclability score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    BelowRecovery,
    Difficult,
    Moderate,
    Easy,
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Zone::BelowRecovery => "BelowRecovery",
            Zone::Difficult => "Difficult",
            Zone::Moderate => "Moderate",
            Zone::Easy => "Easy",
        };
        f.write_str(name)
    }
}

impl FromStr for Zone {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "BelowRecovery" => Ok(Zone::BelowRecovery),
            "Difficult" => Ok(Zone::Difficult),
            "Moderate" => Ok(Zone::Moderate),
            "Easy" => Ok(Zone::Easy),
            other => Err(format!("unknown zone `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecyclabilityError {
    #[error("composition has no materials")]
    EmptyMaterials,
    #[error("all fractions are zero")]
    AllZero,
    #[error("fraction at index {index} is {value}, must be finite and nonnegative")]
    NegativeFraction { index: usize, value: f64 },
    #[error("material `{name}`: fraction {value} is outside [0, 1]")]
    FractionOutOfRange { name: String, value: f64 },
    #[error("material at index {index} has an empty name")]
    EmptyMaterialName { index: usize },
    #[error("material `{name}` appears more than once")]
    DuplicateMaterial { name: String },
    #[error("material `{name}`: valence rank must be at least 1")]
    ZeroValenceRank { name: String },
    #[error("valence total must be at least 1")]
    ZeroValenceTotal,
    #[error("material `{name}`: valence rank {rank} exceeds valence total {total}")]
    RankExceedsValences { name: String, rank: u32, total: u32 },
    #[error("composition has no recoverable materials")]
    NoRecoverableMaterials,
    #[error("fractions sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("entropy is zero, score is undefined for a single-material composition")]
    ZeroEntropy,
}

/// Sums in ascending value order so the result does not depend on input order.
fn sorted_sum(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    sorted.into_iter().sum()
}

fn check_raw_fractions(raw: &[f64]) -> Result<(), RecyclabilityError> {
    if raw.is_empty() {
        return Err(RecyclabilityError::EmptyMaterials);
    }
    for (index, &value) in raw.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(RecyclabilityError::NegativeFraction { index, value });
        }
    }
    Ok(())
}

/// Scales raw nonnegative weights so they sum to 1.
pub fn normalize(raw: &[f64]) -> Result<Vec<f64>, RecyclabilityError> {
    check_raw_fractions(raw)?;
    let sum = sorted_sum(raw);
    if sum == 0.0 {
        return Err(RecyclabilityError::AllZero);
    }
    Ok(raw.iter().map(|v| v / sum).collect())
}

/// Shannon entropy in bits of a fraction list that already sums to 1.
///
/// Zero fractions contribute nothing. Terms are accumulated in sorted
/// order, so any permutation of the same fractions gives the identical
/// bit pattern.
pub fn entropy_bits(fractions: &[f64]) -> Result<f64, RecyclabilityError> {
    check_raw_fractions(fractions)?;
    let sum = sorted_sum(fractions);
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(RecyclabilityError::NotNormalized { sum });
    }
    let mut terms: Vec<f64> = fractions
        .iter()
        .map(|&f| {
            let p = f / sum;
            if p > 0.0 {
                -(p * p.log2())
            } else {
                0.0
            }
        })
        .collect();
    terms.sort_unstable_by(f64::total_cmp);
    Ok(terms.into_iter().sum())
}

/// Entropy in bits of a component's material composition.
pub fn compute_entropy(spec: &ComponentSpec) -> Result<f64, RecyclabilityError> {
    let fractions: Vec<f64> = spec.materials.iter().map(|m| m.fraction).collect();
    entropy_bits(&fractions)
}

/// Recovery grade: the summed fractions of recoverable materials, with
/// chemically bound ones scaled down by `1 - (rank - 1) / N`.
pub fn compute_grade(spec: &ComponentSpec) -> Result<f64, RecyclabilityError> {
    if spec.valence_total == 0 {
        return Err(RecyclabilityError::ZeroValenceTotal);
    }
    for m in &spec.materials {
        if m.valence_rank == 0 {
            return Err(RecyclabilityError::ZeroValenceRank {
                name: m.name.clone(),
            });
        }
        if m.valence_rank > spec.valence_total {
            return Err(RecyclabilityError::RankExceedsValences {
                name: m.name.clone(),
                rank: m.valence_rank,
                total: spec.valence_total,
            });
        }
    }
    let fractions: Vec<f64> = spec.materials.iter().map(|m| m.fraction).collect();
    check_raw_fractions(&fractions)?;
    let sum = sorted_sum(&fractions);
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(RecyclabilityError::NotNormalized { sum });
    }
    let n = f64::from(spec.valence_total);
    let mut terms: Vec<f64> = spec
        .materials
        .iter()
        .filter(|m| m.recoverable)
        .map(|m| {
            let p = m.fraction / sum;
            match m.bonding {
                Bonding::PhysicallyMixed => p,
                Bonding::ChemicallyCombined => (1.0 - (f64::from(m.valence_rank) - 1.0) / n) * p,
            }
        })
        .collect();
    terms.sort_unstable_by(f64::total_cmp);
    Ok(terms.into_iter().sum())
}

/// Recyclability score: `100 * grade / (N * entropy)`.
pub fn compute_recyclability(
    grade: f64,
    entropy_bits: f64,
    valence_total: u32,
) -> Result<f64, RecyclabilityError> {
    if valence_total == 0 {
        return Err(RecyclabilityError::ZeroValenceTotal);
    }
    if entropy_bits.is_nan() || entropy_bits <= 0.0 {
        return Err(RecyclabilityError::ZeroEntropy);
    }
    Ok(AMPLIFICATION * grade / (f64::from(valence_total) * entropy_bits))
}

/// Maps a nonnegative score to its recovery zone. Boundaries belong to
/// the upper zone: 18 is already Difficult, 50 is already Easy.
pub fn classify_zone(recyclability: f64) -> Zone {
    if recyclability < RECOVERY_THRESHOLD {
        Zone::BelowRecovery
    } else if recyclability < MODERATE_THRESHOLD {
        Zone::Difficult
    } else if recyclability < EASY_THRESHOLD {
        Zone::Moderate
    } else {
        Zone::Easy
    }
}

/// Everything `assess_component` derives from one composition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecyclabilityResult {
    pub entropy_bits: f64,
    pub grade: f64,
    pub recyclability: f64,
    pub zone: Zone,
}

impl ComponentSpec {
    /// Checks every structural invariant a composition must satisfy.
    pub fn validate(&self) -> Result<(), RecyclabilityError> {
        if self.materials.is_empty() {
            return Err(RecyclabilityError::EmptyMaterials);
        }
        if self.valence_total == 0 {
            return Err(RecyclabilityError::ZeroValenceTotal);
        }
        let mut seen: Vec<&str> = Vec::with_capacity(self.materials.len());
        for (index, m) in self.materials.iter().enumerate() {
            if m.name.is_empty() {
                return Err(RecyclabilityError::EmptyMaterialName { index });
            }
            if seen.contains(&m.name.as_str()) {
                return Err(RecyclabilityError::DuplicateMaterial {
                    name: m.name.clone(),
                });
            }
            seen.push(&m.name);
            if !m.fraction.is_finite() || m.fraction < 0.0 || m.fraction > 1.0 {
                return Err(RecyclabilityError::FractionOutOfRange {
                    name: m.name.clone(),
                    value: m.fraction,
                });
            }
            if m.valence_rank == 0 {
                return Err(RecyclabilityError::ZeroValenceRank {
                    name: m.name.clone(),
                });
            }
            if m.valence_rank > self.valence_total {
                return Err(RecyclabilityError::RankExceedsValences {
                    name: m.name.clone(),
                    rank: m.valence_rank,
                    total: self.valence_total,
                });
            }
        }
        if !self.materials.iter().any(|m| m.recoverable) {
            return Err(RecyclabilityError::NoRecoverableMaterials);
        }
        let fractions: Vec<f64> = self.materials.iter().map(|m| m.fraction).collect();
        let sum = sorted_sum(&fractions);
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(RecyclabilityError::NotNormalized { sum });
        }
        Ok(())
    }
}

/// Validates a composition, then computes entropy, grade, score and zone.
pub fn assess_component(spec: &ComponentSpec) -> Result<RecyclabilityResult, RecyclabilityError> {
    spec.validate()?;
    let entropy = compute_entropy(spec)?;
    let grade = compute_grade(spec)?;
    let recyclability = compute_recyclability(grade, entropy, spec.valence_total)?;
    Ok(RecyclabilityResult {
        entropy_bits: entropy,
        grade,
        recyclability,
        zone: classify_zone(recyclability),
    })
}
