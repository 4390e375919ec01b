//! Configuration-driven experiment runner: reads a JSON experiment, runs it,
//! writes `report.json` and one CSV per diagnostic table.

pub mod config;
pub mod report;
pub mod run;

use std::path::{Path, PathBuf};
use std::time::Instant;

use pshlab::suite::Check;

use crate::report::{emit_plot_data, write_report, Report, RunStatus, Runtime};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Options from the command line; `env_out` is the value of `PSHLAB_OUT`.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub env_out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
}

pub const DEFAULT_OUT: &str = "pshlab-out";

/// `PSHLAB_OUT`, then `--out`, then the config's `output_dir`, then the default.
pub fn output_dir(opts: &RunOptions, cfg: Option<&config::ExperimentConfig>) -> PathBuf {
    opts.env_out
        .clone()
        .or_else(|| opts.out.clone())
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// The finished run: the report as written and the directory it went to.
pub struct RunResult {
    pub report: Report,
    pub out_dir: PathBuf,
}

impl RunResult {
    pub fn exit_code(&self) -> i32 {
        self.report.status.exit_code()
    }
}

/// Runs the experiment at `path`. The report is written even when the
/// configuration is rejected or a check fails; only an unwritable output
/// directory prevents it.
pub fn run(path: &Path, opts: &RunOptions) -> Result<RunResult, CliError> {
    let start = Instant::now();
    let parsed = config::load(path);
    let cfg = parsed.as_ref().ok();
    let seed = opts.seed.or(cfg.and_then(|c| c.seed)).unwrap_or(0);
    let out_dir = output_dir(opts, cfg);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Config(format!("output directory {} is not writable: {e}", out_dir.display())))?;
    let jobs = opts.jobs.unwrap_or(0);
    let mut report = Report::new(path, seed);

    match parsed {
        Err(e) => {
            report.status = RunStatus::ConfigError;
            report.error = Some(e.to_string());
        }
        Ok(cfg) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {jobs} jobs: {e}")))?;
            report.runtime.jobs = pool.current_num_threads();
            let ctx = run::Context { seed, pool };
            match run::execute(&cfg, &ctx) {
                Ok(out) => {
                    report.results = out.results;
                    report.checks = out.checks;
                    report.diagnostics = emit_plot_data(&out.tables, &out_dir)?;
                }
                Err(e) => {
                    report.error = Some(e.to_string());
                    report.checks.push(Check::holds("experiment completed", false));
                }
            }
            report.status = if report.failed_checks().next().is_some() || report.checks.is_empty() {
                RunStatus::CheckFailure
            } else {
                RunStatus::Pass
            };
            report.config = Some(cfg);
        }
    }
    report.runtime = Runtime { seconds: start.elapsed().as_secs_f64(), jobs: report.runtime.jobs };
    write_report(&report, &out_dir)?;
    Ok(RunResult { report, out_dir })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_precedence() {
        let cfg = config::parse(
            r#"{ "schema_version": 1, "model": "toric1d", "output_dir": "cfg", "experiment": { "acceptance": {} } }"#,
        )
        .unwrap();
        let mut o = RunOptions::default();
        assert_eq!(output_dir(&o, None), PathBuf::from(DEFAULT_OUT));
        assert_eq!(output_dir(&o, Some(&cfg)), PathBuf::from("cfg"));
        o.out = Some("flag".into());
        assert_eq!(output_dir(&o, Some(&cfg)), PathBuf::from("flag"));
        o.env_out = Some("env".into());
        assert_eq!(output_dir(&o, Some(&cfg)), PathBuf::from("env"));
    }

    #[test]
    fn config_round_trips() {
        let text = r#"{ "schema_version": 1, "model": "toric1d", "seed": 5,
            "experiment": { "sweep": { "eps": [0.5], "caps": [1.0, 2.0], "chi": { "kind": "log" } } } }"#;
        let cfg = config::parse(text).unwrap();
        let again = config::parse(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn suite_key_alias() {
        let text =
            r#"{ "schema_version": 1, "model": "toric1d", "experiment": { "paper_suite": { "criteria": [8] } } }"#;
        let cfg = config::parse(text).unwrap();
        assert_eq!(cfg.experiment.name(), "acceptance");
    }

    #[test]
    fn rejects_unknown_criterion_and_bad_deltas() {
        let suite =
            r#"{ "schema_version": 1, "model": "toric1d", "experiment": { "acceptance": { "criteria": [12] } } }"#;
        assert!(matches!(config::parse(suite), Err(CliError::Config(m)) if m.contains("criteria")));
        let classify = r#"{ "schema_version": 1, "model": "toric1d", "experiment": { "classify": {
            "family": { "recipe": { "family": "sandwich", "base_cap": 1.0, "lower_cap": 6.0, "decay": 2.0 } },
            "j_max": 16, "deltas": [] } } }"#;
        assert!(matches!(config::parse(classify), Err(CliError::Config(m)) if m.contains("deltas")));
    }
}
