//! Capture rate and improvement as start, goal and fire origin are
//! randomized over a growing radius.

use uav_evac::harness::{radius_sweep, write_sweep_csv, SimConfig};
use uav_evac::policy::PolicySpec;

fn main() -> anyhow::Result<()> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(100);
    let cfg = SimConfig::default();
    let rows = radius_sweep(&cfg.env_config()?, &PolicySpec::Scripted, &cfg.eval.radii, n, 0)?;
    for row in &rows {
        let bar = "#".repeat((row.capture_percent / 2.0).round() as usize);
        println!("r={:>4.1} {:>5.1}% {bar}", row.r, row.capture_percent);
    }
    write_sweep_csv(&rows, std::io::stdout())?;
    Ok(())
}
