//! Single-binary workbench CLI.
//!
//! Subcommands: `trim` (equilibrium solve report), `train` (PPO run from a
//! config file), `eval` (static / flutter failure protocols to CSV),
//! `analyze` (parameter, FLOP, and sensitivity accounting), and `plot-data`
//! (episode-log JSONL to plottable CSVs).
//!
//! Exit codes: 0 success, 2 configuration/usage, 3 numeric failure,
//! 4 I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use faultwing::config::{load_airframe, RunConfig};
use faultwing::dynamics::AirframeParams;
use faultwing::env::log::EpisodeLog;
use faultwing::error::Error;
use faultwing::eval::{evaluate, lipschitz_report, write_lipschitz_csv, Protocol};
use faultwing::nets::{ArchTag, Checkpoint, NetShape, PolicyParams};
use faultwing::ppo::train;
use faultwing::reference::{solve_trim, V_NOM};

mod plot_data;

#[derive(Parser)]
#[command(name = "faultwing", version, about = "Fault-tolerant fixed-wing path-following workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a steady-flight trim and print the equilibrium report.
    Trim {
        /// Inverse turn radius, 1/m (0 for straight flight).
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
        /// Flight path angle, rad.
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        /// Airspeed, m/s.
        #[arg(long, default_value_t = V_NOM)]
        airspeed: f64,
        /// Airframe parameter file (defaults to the built-in 3 kg trainer).
        #[arg(long)]
        airframe: Option<PathBuf>,
    },
    /// Train a policy with PPO from a run config file.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Resume from a training checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Evaluate a checkpoint under a failure protocol and write report CSVs.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Protocol: static (persistent stuck) or flutter (nonstationary).
        #[arg(long)]
        protocol: String,
        /// Episodes to run (default: the config's eval section, else 1000).
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "eval_out")]
        out: PathBuf,
        /// Run config supplying the environment section and airframe; if
        /// omitted, defaults are used.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Retain the worst-case episode log per actuator (JSONL, replayable
        /// with plot-data).
        #[arg(long)]
        keep_logs: bool,
    },
    /// Report parameter count, per-action FLOPs, and spectral-norm bounds.
    Analyze {
        /// Checkpoint to analyze.
        #[arg(long, conflicts_with = "arch")]
        checkpoint: Option<PathBuf>,
        /// Analyze a freshly initialized architecture instead.
        #[arg(long)]
        arch: Option<String>,
        /// Optional CSV output for the sensitivity table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert an episode-log JSONL file into plottable CSV histories.
    PlotData {
        /// Episode log (JSON lines, one record per step).
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value = "plot_out")]
        out: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Toml(_) | Error::Checkpoint(_) | Error::ShapeMismatch { .. } => 2,
        Error::TrimFailure { .. }
        | Error::IntegrationFailure { .. }
        | Error::LowAirspeed { .. }
        | Error::UndefinedCourse
        | Error::StepAfterDone => 3,
        Error::Io(_) | Error::Json(_) => 4,
    }
}

fn load_params_or_default(airframe: &Option<PathBuf>) -> Result<AirframeParams, Error> {
    match airframe {
        Some(path) => load_airframe(path),
        None => Ok(AirframeParams::default_3kg()),
    }
}

fn cmd_trim(
    kappa: f64,
    gamma: f64,
    airspeed: f64,
    airframe: Option<PathBuf>,
) -> Result<(), Error> {
    let params = load_params_or_default(&airframe)?;
    let trim = solve_trim(kappa, gamma, airspeed, &params)?;
    println!("trim solution (kappa={kappa} 1/m, gamma={gamma} rad, V={airspeed} m/s)");
    println!("  residual          {:.3e}", trim.residual);
    println!(
        "  bank phi          {:9.4} rad ({:7.2} deg)",
        trim.phi,
        trim.phi.to_degrees()
    );
    println!(
        "  pitch theta       {:9.4} rad ({:7.2} deg)",
        trim.theta,
        trim.theta.to_degrees()
    );
    println!(
        "  body velocity     [{:.4}, {:.4}, {:.4}] m/s",
        trim.v.x, trim.v.y, trim.v.z
    );
    println!(
        "  body rates        [{:.5}, {:.5}, {:.5}] rad/s",
        trim.omega.x, trim.omega.y, trim.omega.z
    );
    println!("  yaw rate          {:.5} rad/s", trim.psi_dot());
    println!("  elevator          {:9.5} rad", trim.commands.elevator);
    println!("  aileron           {:9.5} rad", trim.commands.aileron);
    println!("  rudder            {:9.5} rad", trim.commands.rudder);
    println!("  throttle          {:9.3} rev/s", trim.commands.throttle);
    Ok(())
}

fn cmd_train(
    config_path: PathBuf,
    seed: Option<u64>,
    out: Option<PathBuf>,
    resume: Option<PathBuf>,
) -> Result<(), Error> {
    let mut config = RunConfig::load(&config_path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(o) = out {
        config.out_dir = o;
    }
    let arch = config.arch_tag()?;
    let airframe = load_airframe(&config.airframe)?;
    std::fs::create_dir_all(&config.out_dir)?;
    std::fs::write(config.out_dir.join("config_resolved.toml"), config.to_toml()?)?;

    let resume_ckpt = match resume {
        Some(path) => Some(Checkpoint::load(&path)?),
        None => None,
    };
    let outcome = train(
        arch,
        NetShape::default(),
        airframe,
        config.env.clone(),
        config.ppo.clone(),
        config.seed,
        &config.out_dir,
        resume_ckpt,
    )?;
    println!(
        "trained {} iterations; final checkpoint: {}",
        outcome.iterations_run,
        outcome.final_checkpoint.display()
    );
    if let (Some(first), Some(last)) = (outcome.first_iteration_reward, outcome.last_iteration_reward)
    {
        println!("mean episode reward: first iteration {first:.2}, last iteration {last:.2}");
    }
    Ok(())
}

fn cmd_eval(
    checkpoint: PathBuf,
    protocol: String,
    episodes: Option<usize>,
    seed: u64,
    out: PathBuf,
    config: Option<PathBuf>,
    keep_logs: bool,
) -> Result<(), Error> {
    let protocol = match protocol.as_str() {
        "static" => Protocol::Static,
        "flutter" => Protocol::Flutter,
        other => {
            return Err(Error::Config(format!(
                "unknown protocol '{other}' (expected static or flutter)"
            )))
        }
    };
    let ckpt = Checkpoint::load(&checkpoint)?;
    let (airframe, env_config, eval_section) = match config {
        Some(path) => {
            let cfg = RunConfig::load(&path)?;
            (load_airframe(&cfg.airframe)?, cfg.env, Some(cfg.eval))
        }
        None => (AirframeParams::default_3kg(), Default::default(), None),
    };
    let episodes = episodes
        .or(eval_section.as_ref().map(|e| e.episodes))
        .unwrap_or(1000);
    let keep_logs = keep_logs || eval_section.as_ref().is_some_and(|e| e.keep_logs);
    std::fs::create_dir_all(&out)?;
    let report = evaluate(&ckpt.params, &airframe, &env_config, protocol, episodes, seed)?;
    let report_path = out.join(format!("report_{}.csv", protocol.label()));
    let curves_path = out.join(format!("curves_{}.csv", protocol.label()));
    report.write_report_csv(&report_path)?;
    report.write_curves_csv(&curves_path)?;
    println!(
        "policy {} | protocol {} | {} episodes",
        report.policy,
        protocol.label(),
        report.episodes
    );
    println!("actuator        episodes   MPE(m)   MaxPE(m)   WC(m)    SD(m)");
    for row in &report.rows {
        println!(
            "{:14} {:9} {:8.2} {:10.2} {:7.2} {:8.2}",
            row.actuator.label(),
            row.episodes,
            row.mpe_mean,
            row.maxpe_mean,
            row.wc,
            row.maxpe_sd
        );
    }
    println!("wrote {} and {}", report_path.display(), curves_path.display());

    if keep_logs {
        // Worst-case episode per actuator, replayed with full logging.
        for row in &report.rows {
            let worst = report
                .outcomes
                .iter()
                .filter(|o| o.actuator == row.actuator)
                .max_by(|a, b| a.maxpe.total_cmp(&b.maxpe));
            if let Some(worst) = worst {
                let log = faultwing::eval::replay_episode(
                    &ckpt.params,
                    &airframe,
                    &env_config,
                    protocol,
                    worst.seed,
                )?;
                let path = out.join(format!(
                    "worst_{}_{}.jsonl",
                    protocol.label(),
                    row.actuator.label()
                ));
                let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
                log.to_jsonl(&mut w)?;
                // Sidecar with the RNG seed so the episode can be regenerated.
                let meta = serde_json::json!({
                    "seed": worst.seed,
                    "protocol": protocol.label(),
                    "actuator": row.actuator.label(),
                    "level": worst.level,
                    "maxpe": worst.maxpe,
                });
                std::fs::write(
                    path.with_extension("meta.json"),
                    serde_json::to_string_pretty(&meta).map_err(faultwing::error::Error::from)?,
                )?;
                println!("worst-case replay for {}: {}", row.actuator.label(), path.display());
            }
        }
    }
    Ok(())
}

fn cmd_analyze(
    checkpoint: Option<PathBuf>,
    arch: Option<String>,
    out: Option<PathBuf>,
) -> Result<(), Error> {
    let params: PolicyParams = match (checkpoint, arch) {
        (Some(path), _) => Checkpoint::load(&path)?.params,
        (None, Some(tag)) => {
            use faultwing::nets::policy::PolicyParams as P;
            let arch = ArchTag::parse(&tag)?;
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
            P::init(arch, NetShape::default(), &mut rng)
        }
        (None, None) => {
            return Err(Error::Config(
                "analyze needs --checkpoint or --arch".into(),
            ))
        }
    };
    println!("architecture      {}", params.arch.label());
    println!("parameters        {}", params.param_count());
    println!("flops per action  {}", params.flop_count());
    let rows = lipschitz_report(&params);
    println!("spectral-norm product bounds:");
    for r in &rows {
        println!("  {:14} {:.4}", r.network, r.bound);
    }
    if let Some(path) = out {
        write_lipschitz_csv(&rows, &params.arch.label(), &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_plot_data(log: PathBuf, out: PathBuf) -> Result<(), Error> {
    let file = std::fs::File::open(&log)?;
    let episode = EpisodeLog::from_jsonl(std::io::BufReader::new(file))?;
    if episode.records.is_empty() {
        return Err(Error::Config(format!(
            "episode log {} contains no records",
            log.display()
        )));
    }
    std::fs::create_dir_all(&out)?;
    plot_data::write_all(&episode, &out)?;
    println!(
        "wrote attitude, position_error, commands, lambda, rewards CSVs ({} steps) to {}",
        episode.records.len(),
        out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Trim {
            kappa,
            gamma,
            airspeed,
            airframe,
        } => cmd_trim(kappa, gamma, airspeed, airframe),
        Command::Train {
            config,
            seed,
            out,
            resume,
        } => cmd_train(config, seed, out, resume),
        Command::Eval {
            checkpoint,
            protocol,
            episodes,
            seed,
            out,
            config,
            keep_logs,
        } => cmd_eval(checkpoint, protocol, episodes, seed, out, config, keep_logs),
        Command::Analyze {
            checkpoint,
            arch,
            out,
        } => cmd_analyze(checkpoint, arch, out),
        Command::PlotData { log, out } => cmd_plot_data(log, out),
    }
}

/// Restore the default SIGPIPE disposition so piping output into tools like
/// `head` terminates the process instead of panicking on a closed stdout.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
