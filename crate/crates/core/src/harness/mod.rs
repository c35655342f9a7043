//! Experiment layer: variant environments, paired-leg Monte Carlo
//! evaluation, radius sweeps, episode traces and run configuration.

mod config;
mod eval;
mod metrics;
mod trace;

pub use config::{EvalSection, SimConfig, WorldSection};
pub use eval::{
    episode_seeds, make_variant_env, radius_sweep, run_evaluation, run_rescue_episode, simulate, summarize, EnvFactory,
    EpisodeResult, Evaluation, ImprovementReport, MetricsReport, SweepRow,
};
pub use metrics::{erfc, percent_improvement, two_proportion_z, Stat};
pub use trace::{render_frame, render_text, replay, write_csv, EpisodeTrace, ReplayReport, StepTrace, TraceHeader};

use crate::env::EnvError;
use crate::policy::PolicyError;
use crate::ppo::PpoError;
use std::io::Write;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("bad trace: {0}")]
    Trace(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Ppo(#[from] PpoError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Whether the failure stems from user-supplied configuration.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            HarnessError::Config(_)
                | HarnessError::Env(EnvError::Config(_))
                | HarnessError::Policy(PolicyError::Config(_) | PolicyError::Checkpoint(_))
                | HarnessError::Ppo(PpoError::Config(_))
        )
    }
}

/// Metrics as `metric,n,mean,sd,se` rows.
pub fn write_metrics_csv<W: Write>(
    report: &MetricsReport,
    improvement: &ImprovementReport,
    out: W,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "n", "mean", "sd", "se"])?;
    let rows = [
        ("capture_rate_percent", report.capture_rate),
        ("capture_time", report.capture_time),
        ("first_seen", report.first_seen),
        ("fov_time_percent", report.fov_time_percent),
        ("percent_improvement", improvement.mean_improvement),
    ];
    for (name, s) in rows {
        w.write_record([
            name.to_string(),
            s.n.to_string(),
            s.mean.to_string(),
            s.sd.to_string(),
            s.se.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per episode with the three leg times and the improvement ratio.
pub fn write_improvement_csv<W: Write>(improvement: &ImprovementReport, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "episode",
        "seed",
        "outcome",
        "captured",
        "capture_time",
        "first_seen",
        "t_no",
        "t_no_capped",
        "t_with",
        "t_opt",
        "percent_improvement",
    ])?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for e in &improvement.episodes {
        w.write_record([
            e.episode.to_string(),
            e.seed.to_string(),
            serde_json::to_string(&e.outcome)?.trim_matches('"').to_string(),
            e.captured.to_string(),
            opt(e.capture_time.map(|v| v.to_string())),
            opt(e.first_seen.map(|v| v.to_string())),
            e.t_no.to_string(),
            e.t_no_capped.to_string(),
            e.t_with.to_string(),
            opt(e.t_opt.map(|v| v.to_string())),
            opt(e.percent_improvement.map(|v| v.to_string())),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
