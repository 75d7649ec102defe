//! Genetic algorithm settings from a config file and command-line flags.
//!
//! Flags carry the `GaConfig` field names. A TOML or JSON file may supply
//! the same fields; any flag given on the command line wins over the file.

use std::path::{Path, PathBuf};

use clap::Args;

use asg_core::moga::GaConfig;

use crate::commands::CliError;

#[derive(Debug, Clone, Default, Args)]
pub struct GaArgs {
    /// TOML or JSON file with `GaConfig` fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Population size (default: one member per part).
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    /// Independent runs pooled into the result.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Crossover, mutation, cut-and-paste and break-and-join rates.
    #[arg(long, value_name = "C,M,CP,BJ", value_parser = parse_rates)]
    pub rates: Option<[f64; 4]>,
    #[arg(long, conflicts_with = "rates")]
    pub crossover_rate: Option<f64>,
    #[arg(long, conflicts_with = "rates")]
    pub mutation_rate: Option<f64>,
    #[arg(long, conflicts_with = "rates")]
    pub cut_and_paste_rate: Option<f64>,
    #[arg(long, conflicts_with = "rates")]
    pub break_and_join_rate: Option<f64>,
}

fn parse_rates(s: &str) -> Result<[f64; 4], String> {
    let values: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<_, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected 4 comma-separated rates, got {}", v.len()))
}

fn load_file(path: &Path) -> Result<GaConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml")) {
        toml::from_str(&text).map_err(|e| e.to_string())
    } else {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|reason| CliError::Config {
        path: path.to_path_buf(),
        reason,
    })
}

impl GaArgs {
    /// Defaults, then the config file, then the flags.
    pub fn resolve(&self) -> Result<GaConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => load_file(path)?,
            None => GaConfig::default(),
        };
        if self.population.is_some() {
            cfg.population = self.population;
        }
        if let Some(v) = self.generations {
            cfg.generations = v;
        }
        if let Some(v) = self.iterations {
            cfg.iterations = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some([c, m, cp, bj]) = self.rates {
            cfg.crossover_rate = c;
            cfg.mutation_rate = m;
            cfg.cut_and_paste_rate = cp;
            cfg.break_and_join_rate = bj;
        }
        let singles = [
            (self.crossover_rate, &mut cfg.crossover_rate),
            (self.mutation_rate, &mut cfg.mutation_rate),
            (self.cut_and_paste_rate, &mut cfg.cut_and_paste_rate),
            (self.break_and_join_rate, &mut cfg.break_and_join_rate),
        ];
        for (flag, field) in singles {
            if let Some(v) = flag {
                *field = v;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
