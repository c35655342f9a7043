//! Scripted baseline across the four evaluation variants, with the metrics
//! and per-episode improvement tables written as CSV.

use uav_evac::env::VariantSpec;
use uav_evac::harness::{make_variant_env, run_evaluation, write_improvement_csv, write_metrics_csv, SimConfig};
use uav_evac::policy::PolicySpec;

fn main() -> anyhow::Result<()> {
    let cfg = SimConfig::from_toml_str(include_str!("../../../configs/default.toml"))?;
    let base = cfg.env_config()?;
    let r = cfg.eval.r;
    println!("variant  capture%   se   first_seen  capture_t  improvement  (n)");
    for spec in [
        VariantSpec::env_i(),
        VariantSpec::env_ii(r),
        VariantSpec::env_iii(r),
        VariantSpec::env_iv(r),
    ] {
        let factory = make_variant_env(&base, spec, cfg.eval.seed)?;
        let eval = run_evaluation(
            &factory,
            &PolicySpec::Scripted,
            cfg.eval.n_episodes,
            cfg.eval.seed,
            false,
        )?;
        let m = &eval.metrics;
        let imp = &eval.improvement.mean_improvement;
        println!(
            "Env-{:<4} {:>7.1}  {:>4.1}  {:>10.2}  {:>9.2}  {:>11.3}  ({})",
            spec.variant.to_string(),
            m.capture_rate.mean,
            m.capture_rate.se,
            m.first_seen.mean,
            m.capture_time.mean,
            imp.mean,
            imp.n
        );
        if spec == VariantSpec::env_iv(r) {
            let dir = std::env::temp_dir().join("uav-evac-eval");
            std::fs::create_dir_all(&dir)?;
            write_metrics_csv(m, &eval.improvement, std::fs::File::create(dir.join("metrics.csv"))?)?;
            write_improvement_csv(&eval.improvement, std::fs::File::create(dir.join("improvement.csv"))?)?;
            println!("Env-IV tables written to {}", dir.display());
        }
    }
    Ok(())
}
