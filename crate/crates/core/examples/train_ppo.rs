//! Recurrent PPO on the 10x10 map, then a head-to-head against uniformly
//! random actions. Pass a frame budget as the first argument.

use std::sync::Arc;
use uav_evac::env::Env;
use uav_evac::harness::{run_evaluation, two_proportion_z, EnvFactory, SimConfig};
use uav_evac::policy::{load_policy, save_policy, PolicySpec};
use uav_evac::ppo::train_with_callback;

fn main() -> anyhow::Result<()> {
    let frames: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(60_000);
    let mut cfg = SimConfig::from_toml_str(include_str!("../../../configs/small_train.toml"))?;
    cfg.ppo.total_timesteps = frames;
    cfg.ppo.checkpoint_every = 0;
    let env_cfg = cfg.env_config()?;

    let mut env = Env::new(Arc::new(env_cfg.clone()))?;
    let (policy, log) = train_with_callback(&mut env, &cfg.ppo, 0, |it, _| {
        if it.iteration % 10 == 0 {
            println!(
                "iter {:>3} frames {:>6} reward {:>7.2} capture {:.2}",
                it.iteration, it.frames, it.mean_reward, it.capture_rate
            );
        }
        Ok(())
    })?;
    println!(
        "{} iterations, {} parameters",
        log.iterations.len(),
        policy.num_params()
    );

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("policy.json");
    save_policy(&policy, &path)?;
    let restored = load_policy(&path)?;
    assert_eq!(restored.params(), policy.params());

    let factory = EnvFactory::new(env_cfg)?;
    let learned = PolicySpec::Learned {
        net: Arc::new(restored),
        deterministic: true,
    };
    let a = run_evaluation(&factory, &learned, 100, 1, false)?;
    let b = run_evaluation(&factory, &PolicySpec::Random, 100, 1, false)?;
    let count = |e: &uav_evac::harness::Evaluation| e.improvement.episodes.iter().filter(|r| r.captured).count();
    let (z, p) = two_proportion_z(count(&a), 100, count(&b), 100);
    println!(
        "learned {:.0}% vs random {:.0}%: z = {z:.2}, one-sided p = {p:.2e}",
        a.metrics.capture_rate.mean, b.metrics.capture_rate.mean
    );
    Ok(())
}
