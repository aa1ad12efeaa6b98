//! Result files: one CSV row per trial and a summary JSON per run.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::chains::{Counts, TrialRecord};
use crate::config::ExperimentConfig;

pub const CSV_HEADER: [&str; 13] = [
    "experiment",
    "chain",
    "n",
    "eps",
    "seed",
    "trial",
    "outcome",
    "gap",
    "mem_calls",
    "sep_calls",
    "eval_calls",
    "opt_calls",
    "wall_ms",
];

/// `git describe` of the build, or the crate version outside a checkout.
pub const VERSION: &str = env!("ORC_GIT_DESCRIBE");

pub fn write_csv<W: Write>(
    cfg: &ExperimentConfig,
    records: &[TrialRecord],
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            cfg.experiment.clone(),
            cfg.chain.clone(),
            r.n.to_string(),
            r.eps.to_string(),
            r.seed.to_string(),
            r.trial.to_string(),
            r.outcome.to_string(),
            r.gap.map(|g| g.to_string()).unwrap_or_default(),
            r.counts.mem.to_string(),
            r.counts.sep.to_string(),
            r.counts.eval.to_string(),
            r.counts.opt.to_string(),
            format!("{:.3}", r.wall_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Totals {
    pub mem_calls: u64,
    pub sep_calls: u64,
    pub eval_calls: u64,
    pub opt_calls: u64,
    pub viol_calls: u64,
    pub val_calls: u64,
}

impl From<Counts> for Totals {
    fn from(c: Counts) -> Self {
        Totals {
            mem_calls: c.mem,
            sep_calls: c.sep,
            eval_calls: c.eval,
            opt_calls: c.opt,
            viol_calls: c.viol,
            val_calls: c.val,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub version: String,
    pub experiment: String,
    pub chain: String,
    pub config_hash: String,
    pub rows: usize,
    pub outcomes: BTreeMap<String, usize>,
    /// Largest finite gap over all rows.
    pub max_gap: Option<f64>,
    pub totals: Totals,
    /// Total wall time, absent under `--no-timing` so reruns compare equal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl Summary {
    pub fn new(cfg: &ExperimentConfig, records: &[TrialRecord], timing: bool) -> Self {
        let mut outcomes = BTreeMap::new();
        let mut counts = Counts::default();
        for r in records {
            *outcomes.entry(r.outcome.to_string()).or_insert(0) += 1;
            counts.add(&r.counts);
        }
        let max_gap = records
            .iter()
            .filter_map(|r| r.gap)
            .filter(|g| g.is_finite())
            .reduce(f64::max);
        Summary {
            version: VERSION.to_string(),
            experiment: cfg.experiment.clone(),
            chain: cfg.chain.clone(),
            config_hash: cfg.hash(),
            rows: records.len(),
            outcomes,
            max_gap,
            totals: counts.into(),
            wall_ms: timing.then(|| records.iter().map(|r| r.wall_ms).sum()),
        }
    }
}

/// Paths of the files written for `experiment` under `dir`.
pub fn output_paths(dir: &Path, experiment: &str) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{experiment}.csv")),
        dir.join(format!("{experiment}.summary.json")),
    )
}

pub fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    records: &[TrialRecord],
    timing: bool,
) -> anyhow::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let (csv_path, json_path) = output_paths(dir, &cfg.experiment);
    write_csv(
        cfg,
        records,
        std::io::BufWriter::new(std::fs::File::create(&csv_path)?),
    )?;
    let mut json = serde_json::to_string_pretty(&Summary::new(cfg, records, timing))?;
    json.push('\n');
    std::fs::write(&json_path, json)?;
    Ok((csv_path, json_path))
}
