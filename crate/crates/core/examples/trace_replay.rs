//! Record an episode as JSONL, read it back and re-simulate it from the seed
//! and the recorded actions.

use std::io::Cursor;
use std::sync::Arc;
use uav_evac::env::EnvConfig;
use uav_evac::harness::{replay, simulate, write_csv, EpisodeTrace};
use uav_evac::policy::PolicySpec;
use uav_evac::world::{load_map, DEFAULT_MAP};

fn main() -> anyhow::Result<()> {
    let config = EnvConfig::new(Arc::new(load_map(DEFAULT_MAP)?));
    let first = simulate(&config, &PolicySpec::Random, 7)?.to_jsonl();
    let second = simulate(&config, &PolicySpec::Random, 7)?.to_jsonl();
    println!(
        "{} lines, byte-identical across runs: {}",
        first.lines().count(),
        first == second
    );

    let trace = EpisodeTrace::read_jsonl(Cursor::new(first.as_bytes()))?;
    let report = replay(&trace)?;
    println!(
        "replayed {} states, mismatches: {:?}",
        report.steps.len(),
        report.mismatches
    );

    let mut csv = Vec::new();
    write_csv(&trace, &mut csv)?;
    for line in String::from_utf8(csv)?.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
