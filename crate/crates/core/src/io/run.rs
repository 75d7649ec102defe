use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_json, write_atomic, write_json, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::moga::{GaConfig, GenerationStats};
use crate::relations::RelationSet;
use crate::sequence::{direction_changes, evaluate, insertion_score, step_cstd, Chromosome};

pub const SEQUENCE_FORMAT: &str = "asg-sequence";
pub const REPORT_FORMAT: &str = "asg-run-report";
pub const VERIFICATION_FORMAT: &str = "asg-verification";

/// One placement: part id (1-based), its motion, and the summed degree of
/// constraint it meets against the parts already placed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub part: usize,
    pub name: String,
    pub direction: Direction,
    pub cstd: u32,
}

/// A sequence with its objectives and the terms behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceRecord {
    pub steps: Vec<Step>,
    pub fitness1: f64,
    pub fitness2: f64,
    pub feasible: bool,
    pub max_cstd: u32,
    pub direction_changes: usize,
    pub insertions_satisfied: usize,
    pub insertions_violated: usize,
}

impl SequenceRecord {
    pub fn new(c: &Chromosome, rel: &RelationSet) -> Self {
        let e = evaluate(c, rel);
        let cstd = step_cstd(c, &rel.degree);
        let (alpha, beta) = insertion_score(c, &rel.insertion);
        SequenceRecord {
            steps: c
                .order
                .iter()
                .zip(&c.directions)
                .zip(&cstd)
                .map(|((&p, &d), &s)| Step {
                    part: p + 1,
                    name: rel.names[p].clone(),
                    direction: d,
                    cstd: s,
                })
                .collect(),
            fitness1: e.fitness.fitness1,
            fitness2: e.fitness.fitness2,
            feasible: e.feasible,
            max_cstd: cstd.iter().copied().max().unwrap_or(0),
            direction_changes: direction_changes(c),
            insertions_satisfied: alpha,
            insertions_violated: beta,
        }
    }

    /// The chromosome of this record, checked against `eta` parts.
    pub fn chromosome(&self, eta: usize) -> Result<Chromosome> {
        if self.steps.len() != eta {
            return Err(Error::EtaMismatch {
                sequence: self.steps.len(),
                bundle: eta,
            });
        }
        let c = Chromosome::new(
            self.steps.iter().map(|s| s.part.wrapping_sub(1)).collect(),
            self.steps.iter().map(|s| s.direction).collect(),
        );
        if !c.is_valid(eta) {
            return Err(Error::BundleCorrupt("sequence does not list every part id exactly once".into()));
        }
        Ok(c)
    }

    /// Part ids in order followed by directions, e.g. `4(-z) 2(-z) 3(-y)`.
    pub fn compact(&self) -> String {
        self.steps
            .iter()
            .map(|s| format!("{}({})", s.part, s.direction))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Output of an optimisation: the best-sum sequence and the pooled
/// rank-0 set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub format: String,
    pub version: u32,
    pub model: String,
    pub eta: usize,
    pub seed: u64,
    pub best: SequenceRecord,
    pub front: Vec<SequenceRecord>,
}

impl SequenceFile {
    pub fn new(model: impl Into<String>, eta: usize, seed: u64, best: SequenceRecord, front: Vec<SequenceRecord>) -> Self {
        SequenceFile {
            format: SEQUENCE_FORMAT.to_string(),
            version: SCHEMA_VERSION,
            model: model.into(),
            eta,
            seed,
            best,
            front,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path, SEQUENCE_FORMAT)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

/// One member of a final population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRecord {
    pub run: usize,
    pub fitness1: f64,
    pub fitness2: f64,
    pub feasible: bool,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub run: usize,
    pub fallback_inits: usize,
    pub final_best_sum: f64,
    pub final_feasible: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub format: String,
    pub version: u32,
    pub model: String,
    pub eta: usize,
    pub population: usize,
    pub config: GaConfig,
    pub best: SequenceRecord,
    pub front_size: usize,
    /// Share of feasible members over all final populations.
    pub feasible_fraction: f64,
    pub runs: Vec<RunSummary>,
    pub final_population: Vec<PointRecord>,
}

impl RunReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        model: impl Into<String>,
        eta: usize,
        config: GaConfig,
        best: SequenceRecord,
        front_size: usize,
        runs: Vec<RunSummary>,
        final_population: Vec<PointRecord>,
    ) -> Self {
        let feasible = final_population.iter().filter(|p| p.feasible).count();
        let feasible_fraction = if final_population.is_empty() {
            0.0
        } else {
            feasible as f64 / final_population.len() as f64
        };
        RunReport {
            format: REPORT_FORMAT.to_string(),
            version: SCHEMA_VERSION,
            model: model.into(),
            eta,
            population: config.population_for(eta),
            config,
            best,
            front_size,
            feasible_fraction,
            runs,
            final_population,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path, REPORT_FORMAT)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeighborRecord {
    pub order: Vec<usize>,
    pub fitness1: f64,
    pub fitness2: f64,
    pub feasible: bool,
}

/// Comparison with the exact front, when the product is small enough.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExhaustiveSummary {
    pub front: Vec<SequenceRecord>,
    pub base_on_front: bool,
    /// Share of exact front vectors present in the sequence file's front.
    pub coverage: f64,
    pub reference: [f64; 2],
    pub hypervolume_exact: f64,
    pub hypervolume_found: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub format: String,
    pub version: u32,
    pub model: String,
    pub eta: usize,
    pub base: SequenceRecord,
    /// Neighbours keep each part's direction from the base sequence.
    pub directions_held_fixed: bool,
    pub neighbor_count: usize,
    pub feasible_neighbors: usize,
    pub feasible_fraction: f64,
    pub dominated_by_neighbor: bool,
    pub dominating: Vec<SequenceRecord>,
    pub neighbors: Vec<NeighborRecord>,
    pub exhaustive: Option<ExhaustiveSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhaustive_skipped: Option<String>,
}

impl VerificationReport {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path, VERIFICATION_FORMAT)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

/// Writes one run's per-generation statistics.
pub fn write_convergence_csv(path: &Path, history: &[GenerationStats]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for h in history {
        w.serialize(h).map_err(|e| Error::io(path.display().to_string(), e.into()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path.display().to_string(), e.into_error()))?;
    write_atomic(path, &bytes)
}

pub fn read_convergence_csv(path: &Path) -> Result<Vec<GenerationStats>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path.display().to_string(), e.into()))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::io(path.display().to_string(), e.into())))
        .collect()
}
