use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use uav_evac::env::{Env, Variant};
use uav_evac::harness::{
    radius_sweep, render_text, replay, run_evaluation, simulate, write_csv, write_improvement_csv, write_metrics_csv,
    write_sweep_csv, EnvFactory, EpisodeTrace, HarnessError, SimConfig,
};
use uav_evac::policy::save_policy;
use uav_evac::ppo::{train_with_callback, PpoError};

#[derive(Parser)]
#[command(name = "uav-evac", version, about = "Fire evacuation simulator with rescuer drones")]
struct Cli {
    /// TOML run configuration; defaults apply to every missing key.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its JSONL trace.
    Simulate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `scripted`, `random` or a checkpoint file.
        #[arg(long)]
        policy: Option<String>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Train a recurrent policy with PPO.
    Train {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for the checkpoint and the training log.
        #[arg(long, short, default_value = "run")]
        out: PathBuf,
    },
    /// Evaluate a policy on a variant; writes metrics and improvement CSVs.
    Evaluate {
        #[arg(long)]
        variant: Option<Variant>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        policy: Option<String>,
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// Capture rate and improvement against the randomization radius.
    Sweep {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        policy: Option<String>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Re-simulate a trace and render it.
    Replay {
        trace: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Draw the grid after every step (text format only).
        #[arg(long)]
        frames: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => SimConfig::from_file(path)?,
        None => SimConfig::default(),
    };
    match cli.command {
        Command::Simulate { seed, policy, out } => {
            if let Some(p) = policy {
                cfg.eval.policy = p;
            }
            let env_cfg = cfg.eval_env_config()?;
            let trace = simulate(&env_cfg, &cfg.eval.policy_spec()?, seed)?;
            trace.write_jsonl(output(out.as_deref())?)?;
        }
        Command::Train { seed, out } => {
            let env_cfg = cfg.env_config()?;
            let mut env = Env::new(Arc::new(env_cfg)).map_err(HarnessError::from)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let every = cfg.ppo.checkpoint_every;
            let (policy, log) = train_with_callback(&mut env, &cfg.ppo, seed, |it, policy| {
                eprintln!(
                    "iter {:>4} frames {:>7} reward {:>8.3} capture {:.2} loss {:.4}",
                    it.iteration, it.frames, it.mean_reward, it.capture_rate, it.loss
                );
                if every > 0 && (it.iteration + 1) % every == 0 {
                    let path = out.join(format!("policy_{:05}.json", it.iteration + 1));
                    save_policy(policy, &path).map_err(PpoError::from)?;
                }
                Ok(())
            })
            .map_err(HarnessError::from)?;
            save_policy(&policy, &out.join("policy.json")).map_err(HarnessError::from)?;
            log.save_csv(&out.join("training_log.csv"))
                .map_err(HarnessError::from)?;
            eprintln!("wrote {}", out.join("policy.json").display());
        }
        Command::Evaluate {
            variant,
            r,
            n,
            seed,
            policy,
            out,
        } => {
            if let Some(v) = variant {
                cfg.eval.variant = v;
            }
            if let Some(r) = r {
                cfg.eval.r = r;
            }
            if let Some(n) = n {
                cfg.eval.n_episodes = n;
            }
            if let Some(s) = seed {
                cfg.eval.seed = s;
            }
            if let Some(p) = policy {
                cfg.eval.policy = p;
            }
            let factory = EnvFactory::new(cfg.eval_env_config()?)?;
            let eval = run_evaluation(
                &factory,
                &cfg.eval.policy_spec()?,
                cfg.eval.n_episodes,
                cfg.eval.seed,
                false,
            )?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            write_metrics_csv(
                &eval.metrics,
                &eval.improvement,
                output(Some(&out.join("metrics.csv")))?,
            )?;
            write_improvement_csv(&eval.improvement, output(Some(&out.join("improvement.csv")))?)?;
            let m = &eval.metrics;
            println!(
                "capture {:.1}% (se {:.1}), mean improvement {:.3} over {} captures",
                m.capture_rate.mean,
                m.capture_rate.se,
                eval.improvement.mean_improvement.mean,
                eval.improvement.mean_improvement.n
            );
        }
        Command::Sweep { n, seed, policy, out } => {
            if let Some(n) = n {
                cfg.eval.n_per_radius = n;
            }
            if let Some(s) = seed {
                cfg.eval.seed = s;
            }
            if let Some(p) = policy {
                cfg.eval.policy = p;
            }
            let rows = radius_sweep(
                &cfg.env_config()?,
                &cfg.eval.policy_spec()?,
                &cfg.eval.radii,
                cfg.eval.n_per_radius,
                cfg.eval.seed,
            )?;
            write_sweep_csv(&rows, output(out.as_deref())?)?;
        }
        Command::Replay {
            trace,
            format,
            frames,
            out,
        } => {
            let file = File::open(&trace).with_context(|| format!("opening {}", trace.display()))?;
            let recorded = EpisodeTrace::read_jsonl(BufReader::new(file))?;
            let report = replay(&recorded)?;
            let mut w = output(out.as_deref())?;
            match format {
                Format::Text => w.write_all(render_text(&recorded, frames).as_bytes())?,
                Format::Csv => write_csv(&recorded, &mut w)?,
            }
            w.flush()?;
            if !report.identical() {
                anyhow::bail!("replay diverged from the trace at steps {:?}", report.mismatches);
            }
            eprintln!("replay matches all {} recorded states", recorded.steps.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let config = err.downcast_ref::<HarnessError>().is_some_and(HarnessError::is_config);
            ExitCode::from(if config { 2 } else { 3 })
        }
    }
}
