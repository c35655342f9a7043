use super::metrics::{percent_improvement, Stat};
use super::trace::{EpisodeTrace, StepTrace};
use super::HarnessError;
use crate::env::{Env, EnvConfig, JointAction, Outcome, VariantSpec};
use crate::policy::{PolicySpec, RescuePolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Builds environments for one evaluation variant.
#[derive(Debug, Clone)]
pub struct EnvFactory {
    config: Arc<EnvConfig>,
}

impl EnvFactory {
    pub fn new(config: EnvConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        Ok(Self {
            config: Arc::new(config),
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn shared(&self) -> Arc<EnvConfig> {
        Arc::clone(&self.config)
    }

    /// Fresh environment reset to `seed`.
    pub fn make(&self, seed: u64) -> Result<Env, HarnessError> {
        let mut env = Env::new(Arc::clone(&self.config))?;
        env.reset(seed)?;
        Ok(env)
    }

    /// Same world, different agents: evacuee panic and rescuer presence.
    pub fn with_legs(&self, panic: bool, rescuers: bool) -> Self {
        let mut c = (*self.config).clone();
        c.evac.panic_enabled = panic;
        c.rescuers = rescuers;
        Self { config: Arc::new(c) }
    }
}

/// Factory whose resets perturb the base scenario per `spec`. A probe reset
/// with `seed` surfaces radius problems up front.
pub fn make_variant_env(base: &EnvConfig, spec: VariantSpec, seed: u64) -> Result<EnvFactory, HarnessError> {
    let mut config = base.clone();
    config.variant = spec;
    let factory = EnvFactory::new(config)?;
    factory.make(seed)?;
    Ok(factory)
}

/// Per-episode seeds derived from the evaluation seed.
pub fn episode_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random()).collect()
}

/// Measurements from the three legs of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub episode: usize,
    pub seed: u64,
    pub outcome: Outcome,
    pub captured: bool,
    pub capture_time: Option<u32>,
    pub first_seen: Option<u32>,
    /// Share of pursuit steps (first sighting to capture or episode end)
    /// with the evacuee in view, in percent.
    pub fov_time_percent: Option<f64>,
    /// Unaided panic arrival time, `T_max` when it never arrived.
    pub t_no: u32,
    pub t_no_capped: bool,
    /// Arrival time with rescuers, `T_max` when it never arrived.
    pub t_with: u32,
    /// Rational unaided arrival time.
    pub t_opt: Option<u32>,
    pub percent_improvement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_episodes: usize,
    pub capture_rate: Stat,
    pub capture_time: Stat,
    pub first_seen: Stat,
    pub fov_time_percent: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementReport {
    pub episodes: Vec<EpisodeResult>,
    /// Over captured episodes where the ratio is defined.
    pub mean_improvement: Stat,
    /// Captured episodes excluded because `t_no <= t_opt` or no `t_opt`.
    pub undefined: usize,
    /// Episodes whose unaided leg never arrived.
    pub capped: usize,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub metrics: MetricsReport,
    pub improvement: ImprovementReport,
    pub traces: Vec<EpisodeTrace>,
}

/// Runs an environment without rescuers to the end.
fn unaided_arrival(factory: &EnvFactory, seed: u64) -> Result<Option<u32>, HarnessError> {
    let mut env = factory.make(seed)?;
    while !env.state().done {
        env.step(&JointAction::default())?;
    }
    Ok(env.state().arrived_at)
}

/// Rolls the rescue leg and optionally records a trace.
pub fn run_rescue_episode(
    factory: &EnvFactory,
    policy: &mut dyn RescuePolicy,
    seed: u64,
    record: bool,
) -> Result<(Env, Vec<bool>, Option<EpisodeTrace>), HarnessError> {
    let mut env = factory.make(seed)?;
    policy.reset(seed);
    let mut obs = env.observation();
    let mut visible = vec![obs.evac_visible];
    let mut trace = record.then(|| EpisodeTrace::start(factory.config(), seed, policy.name(), &env));
    while !env.state().done {
        let action = policy.act(&obs);
        let step = env.step(&action)?;
        visible.push(step.info.evac_visible);
        if let Some(tr) = trace.as_mut() {
            tr.steps.push(StepTrace::capture(&env, Some(&action), &step));
        }
        obs = step.observation;
    }
    Ok((env, visible, trace))
}

/// One recorded rescue episode on the configured variant.
pub fn simulate(config: &EnvConfig, spec: &PolicySpec, seed: u64) -> Result<EpisodeTrace, HarnessError> {
    let factory = EnvFactory::new(config.clone())?;
    let mut policy = spec.build(config)?;
    let (_, _, trace) = run_rescue_episode(&factory, policy.as_mut(), seed, true)?;
    Ok(trace.expect("recording was requested"))
}

fn run_episode(
    factory: &EnvFactory,
    spec: &PolicySpec,
    episode: usize,
    seed: u64,
    record: bool,
) -> Result<(EpisodeResult, Option<EpisodeTrace>), HarnessError> {
    let config = factory.config();
    let t_max = config.env.t_max;
    let no_uav = factory.with_legs(config.evac.panic_enabled, false);
    let rational = factory.with_legs(false, false);
    let with_uav = factory.with_legs(config.evac.panic_enabled, true);

    let t_no_raw = unaided_arrival(&no_uav, seed)?;
    let t_opt = unaided_arrival(&rational, seed)?;
    let mut policy = spec.build(config)?;
    let (env, visible, trace) = run_rescue_episode(&with_uav, policy.as_mut(), seed, record)?;
    let st = env.state();

    let captured = st.captured_at.is_some();
    let first_seen = visible.iter().position(|v| *v).map(|t| t as u32);
    let fov_time_percent = first_seen.map(|start| {
        let end = st.captured_at.unwrap_or(st.t) as usize;
        let window = &visible[start as usize..=end.max(start as usize)];
        100.0 * window.iter().filter(|v| **v).count() as f64 / window.len() as f64
    });
    let t_no = t_no_raw.unwrap_or(t_max);
    let t_with = st.arrived_at.unwrap_or(t_max);
    let improvement = match (captured, t_opt) {
        (true, Some(t_opt)) => percent_improvement(t_no, t_with, t_opt),
        _ => None,
    };
    let result = EpisodeResult {
        episode,
        seed,
        outcome: st.outcome.expect("finished episode has an outcome"),
        captured,
        capture_time: st.captured_at,
        first_seen,
        fov_time_percent,
        t_no,
        t_no_capped: t_no_raw.is_none(),
        t_with,
        t_opt,
        percent_improvement: improvement,
    };
    Ok((result, trace))
}

pub fn summarize(episodes: Vec<EpisodeResult>) -> (MetricsReport, ImprovementReport) {
    let n = episodes.len();
    let captured: Vec<&EpisodeResult> = episodes.iter().filter(|e| e.captured).collect();
    let collect = |f: &dyn Fn(&EpisodeResult) -> Option<f64>| -> Vec<f64> { episodes.iter().filter_map(f).collect() };
    let metrics = MetricsReport {
        n_episodes: n,
        capture_rate: Stat::rate_percent(captured.len(), n),
        capture_time: Stat::of(&collect(&|e| e.capture_time.map(f64::from))),
        first_seen: Stat::of(&collect(&|e| e.first_seen.map(f64::from))),
        fov_time_percent: Stat::of(&collect(&|e| e.fov_time_percent)),
    };
    let improvements = collect(&|e| e.percent_improvement);
    let improvement = ImprovementReport {
        mean_improvement: Stat::of(&improvements),
        undefined: captured.len() - improvements.len(),
        capped: episodes.iter().filter(|e| e.t_no_capped).count(),
        episodes,
    };
    (metrics, improvement)
}

/// Monte Carlo evaluation over `n_episodes` seeded episodes, run in
/// parallel and reduced in episode order.
pub fn run_evaluation(
    factory: &EnvFactory,
    spec: &PolicySpec,
    n_episodes: usize,
    seed: u64,
    record_traces: bool,
) -> Result<Evaluation, HarnessError> {
    if n_episodes == 0 {
        return Err(HarnessError::Config("n_episodes must be at least 1".into()));
    }
    spec.check(factory.config())?;
    let seeds = episode_seeds(seed, n_episodes);
    let runs: Vec<(EpisodeResult, Option<EpisodeTrace>)> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| run_episode(factory, spec, i, s, record_traces))
        .collect::<Result<_, _>>()?;
    let (results, traces): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let (metrics, improvement) = summarize(results);
    Ok(Evaluation {
        metrics,
        improvement,
        traces: traces.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub n: usize,
    pub capture_percent: f64,
    pub capture_se: f64,
    pub mean_improvement: f64,
    pub improvement_se: f64,
    pub improvement_n: usize,
}

/// Env-IV evaluation at each radius.
pub fn radius_sweep(
    base: &EnvConfig,
    spec: &PolicySpec,
    radii: &[f64],
    n_per_r: usize,
    seed: u64,
) -> Result<Vec<SweepRow>, HarnessError> {
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(HarnessError::Config(format!("sweep radius {r} must be non-negative")));
        }
        let variant = if r == 0.0 {
            VariantSpec::env_i()
        } else {
            VariantSpec::env_iv(r)
        };
        let factory = make_variant_env(base, variant, seed)?;
        let eval = run_evaluation(&factory, spec, n_per_r, seed, false)?;
        let imp = eval.improvement.mean_improvement;
        rows.push(SweepRow {
            r,
            n: n_per_r,
            capture_percent: eval.metrics.capture_rate.mean,
            capture_se: eval.metrics.capture_rate.se,
            mean_improvement: imp.mean,
            improvement_se: imp.se,
            improvement_n: imp.n,
        });
    }
    Ok(rows)
}
