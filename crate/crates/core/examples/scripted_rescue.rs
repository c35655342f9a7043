//! One rescue episode driven by the scripted sweep-and-pursue baseline,
//! rendered frame by frame.

use std::sync::Arc;
use uav_evac::env::{Env, EnvConfig};
use uav_evac::harness::{render_text, simulate};
use uav_evac::policy::{PolicySpec, RescuePolicy, ScriptedPolicy};
use uav_evac::world::{load_map, DEFAULT_MAP};

fn main() -> anyhow::Result<()> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(4);
    let config = EnvConfig::new(Arc::new(load_map(DEFAULT_MAP)?));

    // Driving the environment by hand.
    let mut env = Env::new(Arc::new(config.clone()))?;
    let mut policy = ScriptedPolicy::new(
        Arc::clone(&config.map),
        config.env.selection_radius,
        config.fov.hlr.range,
    );
    policy.reset(seed);
    let mut obs = env.reset(seed)?;
    let mut total = 0.0;
    while !env.state().done {
        let step = env.step(&policy.act(&obs))?;
        total += step.reward;
        if step.info.captured_now {
            println!("intercepted at t={}", env.state().t);
        }
        obs = step.observation;
    }
    println!(
        "outcome {:?} after {} steps, return {total:.2}",
        env.state().outcome,
        env.state().t
    );

    // The same episode as a recorded trace.
    let trace = simulate(&config, &PolicySpec::Scripted, seed)?;
    print!("{}", render_text(&trace, true));
    Ok(())
}
