//! A lone evacuee with and without panic: panic level, herd direction and the
//! resulting arrival times.

use std::sync::Arc;
use uav_evac::env::{Env, EnvConfig, JointAction};
use uav_evac::harness::{episode_seeds, EnvFactory};
use uav_evac::world::{load_map, DEFAULT_MAP};

fn main() -> anyhow::Result<()> {
    let config = EnvConfig::new(Arc::new(load_map(DEFAULT_MAP)?));
    let factory = EnvFactory::new(config)?;
    let panicked = factory.with_legs(true, false);
    let rational = factory.with_legs(false, false);

    let mut env = panicked.make(3)?;
    println!(" t  pos       gamma  d1    d2    d3    d4    herd");
    while !env.state().done {
        env.step(&JointAction::default())?;
        let ev = &env.state().evacuee;
        let d = ev.panic.last_deltas;
        println!(
            "{:>2}  {:<8}  {:.3}  {:.2}  {:.2}  {:.2}  {:.2}  {:?}",
            env.state().t,
            ev.position().to_string(),
            ev.panic.gamma,
            d[0],
            d[1],
            d[2],
            d[3],
            ev.herd_direction
        );
    }
    println!("outcome: {:?}", env.state().outcome);

    let t_max = factory.config().env.t_max;
    let arrival = |f: &EnvFactory, seed| -> anyhow::Result<u32> {
        let mut env: Env = f.make(seed)?;
        while !env.state().done {
            env.step(&JointAction::default())?;
        }
        Ok(env.state().arrived_at.unwrap_or(t_max))
    };
    let seeds = episode_seeds(0, 200);
    let (mut p, mut r) = (0.0, 0.0);
    for &s in &seeds {
        p += f64::from(arrival(&panicked, s)?);
        r += f64::from(arrival(&rational, s)?);
    }
    let n = seeds.len() as f64;
    println!(
        "mean arrival over {n} runs: panic {:.1}, rational {:.1}, ratio {:.2}",
        p / n,
        r / n,
        p / r
    );
    Ok(())
}
