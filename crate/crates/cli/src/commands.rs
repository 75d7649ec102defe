//! The subcommands.

use std::path::{Path, PathBuf};

use clap::Args;
use thiserror::Error;

use asg_core::fixtures;
use asg_core::io::{
    read_convergence_csv, write_convergence_csv, AssemblyManifest, ExhaustiveSummary, MatrixBundle,
    NeighborRecord, PointRecord, RunReport, RunSummary, SequenceFile, SequenceRecord, VerificationReport,
    SCHEMA_VERSION, VERIFICATION_FORMAT,
};
use asg_core::moga::evolve;
use asg_core::pipeline::extract_manifest;
use asg_core::sequence::FitnessPair;
use asg_core::verify::{exhaustive_front, front_coverage, hypervolume, pareto_check, DEFAULT_BUDGET};
use asg_core::Error;

use crate::config::GaArgs;
use crate::report;

pub const SEQUENCE_FILE: &str = "sequence.json";
pub const REPORT_FILE: &str = "report.json";
pub const VERIFICATION_FILE: &str = "verification.json";

/// Process exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    InfeasibleOnly = 3,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("config file {}: {reason}", path.display())]
    Config { path: PathBuf, reason: String },

    #[error("unknown fixture `{0}` (known: {known}, or `all`)", known = fixtures::NAMES.join(", "))]
    UnknownFixture(String),
}

fn is_input_error(e: &Error) -> bool {
    match e {
        Error::Part { source, .. } | Error::Pair(_, _, source) => is_input_error(source),
        Error::ResolutionMismatch(..) | Error::ScaleOutOfRange(_) | Error::BadReference => false,
        _ => true,
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !is_input_error(e) => 4,
            _ => 2,
        }
    }
}

type CliResult = Result<Status, CliError>;

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| {
        CliError::Core(Error::Io {
            context: format!("creating {}", dir.display()),
            source,
        })
    })
}

pub fn extract(manifest: &Path, output: &Path, resolution: Option<f64>, seed: Option<u64>) -> CliResult {
    let manifest = AssemblyManifest::load(manifest)?;
    let x = extract_manifest(&manifest, resolution, seed)?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    x.bundle().save(output)?;
    print!("{}", x.summary());
    println!("wrote {}", output.display());
    Ok(Status::Success)
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    pub bundle: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub ga: GaArgs,
}

pub fn convergence_file(run: usize) -> String {
    format!("convergence_iter{}.csv", run + 1)
}

pub fn optimize(args: &OptimizeArgs) -> CliResult {
    let bundle = MatrixBundle::load(&args.bundle)?;
    let rel = bundle.relations()?;
    let cfg = args.ga.resolve()?;
    let result = evolve(&rel, &cfg)?;
    let eta = rel.eta();
    create_dir(&args.output)?;

    let best = SequenceRecord::new(&result.best_member().chromosome, &rel);
    let front: Vec<SequenceRecord> = result.front().map(|m| SequenceRecord::new(&m.chromosome, &rel)).collect();
    let front_size = front.len();
    SequenceFile::new(&bundle.model, eta, cfg.seed, best.clone(), front).save(&args.output.join(SEQUENCE_FILE))?;

    let runs = result
        .runs
        .iter()
        .enumerate()
        .map(|(run, r)| {
            let last = r.history.last();
            RunSummary {
                run,
                fallback_inits: r.fallback_inits,
                final_best_sum: last.map_or(0.0, |h| h.best_sum),
                final_feasible: last.map_or(0, |h| h.feasible_count),
            }
        })
        .collect();
    let points = result
        .runs
        .iter()
        .enumerate()
        .flat_map(|(run, r)| {
            r.population.iter().map(move |m| PointRecord {
                run,
                fitness1: m.evaluation.fitness.fitness1,
                fitness2: m.evaluation.fitness.fitness2,
                feasible: m.evaluation.feasible,
                rank: m.rank,
            })
        })
        .collect();
    let report = RunReport::new(&bundle.model, eta, cfg, best.clone(), front_size, runs, points);
    report.save(&args.output.join(REPORT_FILE))?;
    for (run, r) in result.runs.iter().enumerate() {
        write_convergence_csv(&args.output.join(convergence_file(run)), &r.history)?;
    }

    println!("best: {}", best.compact());
    println!(
        "fitness1 {} fitness2 {} max CSTD {} ({} rank-0 sequences, {:.1}% of final population feasible)",
        best.fitness1,
        best.fitness2,
        best.max_cstd,
        front_size,
        100.0 * report.feasible_fraction
    );
    println!("wrote {}", args.output.display());
    if best.feasible {
        Ok(Status::Success)
    } else {
        eprintln!("warning: no feasible sequence found");
        Ok(Status::InfeasibleOnly)
    }
}

fn pair(f: [f64; 2]) -> FitnessPair {
    FitnessPair::new(f[0], f[1])
}

pub fn verify(bundle: &Path, sequence: &Path, output: &Path, exhaustive_max: usize) -> CliResult {
    let bundle = MatrixBundle::load(bundle)?;
    let rel = bundle.relations()?;
    let eta = rel.eta();
    let file = SequenceFile::load(sequence)?;
    if file.eta != eta {
        return Err(Error::EtaMismatch {
            sequence: file.eta,
            bundle: eta,
        }
        .into());
    }
    let base = file.best.chromosome(eta)?;
    let check = pareto_check(&base, &rel);

    let (exhaustive, exhaustive_skipped) = if eta > exhaustive_max {
        (None, Some(format!("{eta} parts exceed the exhaustive limit of {exhaustive_max}")))
    } else {
        match exhaustive_front(&rel, exhaustive_max, DEFAULT_BUDGET) {
            Ok(points) => {
                let truth: Vec<FitnessPair> = points.iter().map(|p| p.fitness).collect();
                let found: Vec<FitnessPair> = file
                    .front
                    .iter()
                    .filter(|s| s.feasible)
                    .map(|s| pair([s.fitness1, s.fitness2]))
                    .collect();
                let lowest = |f: fn(&FitnessPair) -> f64| truth.iter().chain(&found).map(f).fold(f64::INFINITY, f64::min);
                let reference = [lowest(|p| p.fitness1) - 1.0, lowest(|p| p.fitness2) - 1.0];
                let base_fitness = check.base_evaluation.fitness;
                (
                    Some(ExhaustiveSummary {
                        front: points.iter().map(|p| SequenceRecord::new(&p.chromosome, &rel)).collect(),
                        base_on_front: check.base_evaluation.feasible && truth.contains(&base_fitness),
                        coverage: front_coverage(&found, &truth),
                        reference,
                        hypervolume_exact: hypervolume(&truth, pair(reference))?,
                        hypervolume_found: hypervolume(&found, pair(reference))?,
                    }),
                    None,
                )
            }
            Err(e @ Error::TooLarge { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        }
    };

    let feasible_neighbors = check.neighbors.iter().filter(|n| n.evaluation.feasible).count();
    let report = VerificationReport {
        format: VERIFICATION_FORMAT.to_string(),
        version: SCHEMA_VERSION,
        model: bundle.model.clone(),
        eta,
        base: SequenceRecord::new(&base, &rel),
        directions_held_fixed: true,
        neighbor_count: check.neighbors.len(),
        feasible_neighbors,
        feasible_fraction: check.feasible_fraction,
        dominated_by_neighbor: check.dominated_by_neighbor,
        dominating: check.dominating().map(|n| SequenceRecord::new(&n.chromosome, &rel)).collect(),
        neighbors: check
            .neighbors
            .iter()
            .map(|n| NeighborRecord {
                order: n.chromosome.order.iter().map(|p| p + 1).collect(),
                fitness1: n.evaluation.fitness.fitness1,
                fitness2: n.evaluation.fitness.fitness2,
                feasible: n.evaluation.feasible,
            })
            .collect(),
        exhaustive,
        exhaustive_skipped,
    };
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    report.save(output)?;

    println!(
        "{} neighbours ({} feasible); dominated by a neighbour: {}",
        report.neighbor_count, report.feasible_neighbors, report.dominated_by_neighbor
    );
    match (&report.exhaustive, &report.exhaustive_skipped) {
        (Some(x), _) => println!(
            "exact front: {} points, base on front: {}, coverage {:.0}%",
            x.front.len(),
            x.base_on_front,
            100.0 * x.coverage
        ),
        (None, Some(why)) => println!("exact front skipped: {why}"),
        (None, None) => {}
    }
    println!("wrote {}", output.display());
    Ok(Status::Success)
}

fn require(path: PathBuf) -> Result<PathBuf, CliError> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::MissingArtifacts(path).into())
    }
}

pub fn report(run_dir: &Path, output: &Path) -> CliResult {
    let sequence = SequenceFile::load(&require(run_dir.join(SEQUENCE_FILE))?)?;
    let run = RunReport::load(&require(run_dir.join(REPORT_FILE))?)?;
    let mut histories = Vec::new();
    for k in 0..run.config.iterations {
        histories.push(read_convergence_csv(&require(run_dir.join(convergence_file(k)))?)?);
    }
    let verification_path = run_dir.join(VERIFICATION_FILE);
    let verification = if verification_path.is_file() {
        Some(VerificationReport::load(&verification_path)?)
    } else {
        None
    };

    create_dir(output)?;
    let write = |name: &str, text: String| -> Result<(), CliError> {
        asg_core::io::write_atomic(&output.join(name), text.as_bytes())?;
        Ok(())
    };
    write("scatter.svg", report::scatter_svg(&run, verification.as_ref()))?;
    write("convergence.svg", report::convergence_svg(&run.model, &histories))?;
    let summary = report::summary_text(&sequence, &run, verification.as_ref());
    write("summary.txt", summary.clone())?;
    print!("{summary}");
    println!("wrote {}", output.display());
    Ok(Status::Success)
}

pub fn fixture(name: &str, output: &Path) -> CliResult {
    let chosen = if name == "all" {
        fixtures::all()
    } else {
        vec![fixtures::by_name(name).ok_or_else(|| CliError::UnknownFixture(name.to_string()))?]
    };
    for f in chosen {
        let path = f.write(&output.join(f.name))?;
        println!("{}: {} parts, {}", f.name, f.eta(), path.display());
    }
    Ok(Status::Success)
}
