//! End-to-end tests of the binary: subcommand behavior, exit codes, and
//! output determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_faultwing"))
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("faultwing_cli_{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn trim_reports_converged_solution() {
    let out = bin()
        .args(["trim", "--kappa", "0.02", "--gamma", "0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("residual"));
    assert!(text.contains("bank phi"));
    // Bank near the coordinated-turn value.
    assert!(text.contains("43.") || text.contains("42.") || text.contains("41."));
}

#[test]
fn trim_with_airframe_file_and_infeasible_kappa() {
    let out = bin()
        .args([
            "trim",
            "--kappa",
            "0",
            "--gamma",
            "0",
            "--airframe",
            repo_config("airframe_3kg.toml").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());

    // A 2 m turn radius is dynamically infeasible: numeric failure code.
    let out = bin()
        .args(["trim", "--kappa", "0.5", "--gamma", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn train_micro_run_writes_artifacts_and_rejects_bad_configs() {
    let dir = temp_dir("train");
    let airframe_src = std::fs::read_to_string(repo_config("airframe_3kg.toml")).unwrap();
    std::fs::write(dir.join("airframe.toml"), &airframe_src).unwrap();
    let config = r#"
airframe = "airframe.toml"
arch = "lora8"
seed = 5
out_dir = "OUT"

[ppo]
n_envs = 2
n_steps = 32
iterations = 2
epochs = 1
minibatch_size = 32

[env]
horizon_steps = 100

[env.disturbances]
steady_wind = false
gusts = false
sensor_noise = false
coeff_perturbation = false
input_delay = false
"#
    .replace("OUT", dir.join("out").to_str().unwrap());
    std::fs::write(dir.join("run.toml"), config).unwrap();

    let out = bin()
        .args(["train", "--config", dir.join("run.toml").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.join("out/config_resolved.toml").exists());
    assert!(dir.join("out/checkpoint_final.json").exists());
    assert!(dir.join("out/train_log.csv").exists());
    let log = std::fs::read_to_string(dir.join("out/train_log.csv")).unwrap();
    assert!(log.starts_with("iteration,policy_loss,value_loss,entropy,approx_kl,clip_fraction,mean_episode_reward,episodes"));
    assert_eq!(log.lines().count(), 3);

    // Missing airframe file: clear config error.
    let broken = dir.join("broken.toml");
    std::fs::write(
        &broken,
        "airframe = \"nope.toml\"\narch = \"mlp\"\nout_dir = \"x\"\n",
    )
    .unwrap();
    let out = bin()
        .args(["train", "--config", broken.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("airframe"));

    // Unknown keys rejected.
    let unknown = dir.join("unknown.toml");
    std::fs::write(
        &unknown,
        "airframe = \"airframe.toml\"\narch = \"mlp\"\nout_dir = \"x\"\nlr = 0.1\n",
    )
    .unwrap();
    let out = bin()
        .args(["train", "--config", unknown.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_is_deterministic_and_well_formed() {
    let dir = temp_dir("eval");
    // Analyze-initialized checkpoint via a micro training run.
    let airframe_src = std::fs::read_to_string(repo_config("airframe_3kg.toml")).unwrap();
    std::fs::write(dir.join("airframe.toml"), &airframe_src).unwrap();
    let config = r#"
airframe = "airframe.toml"
arch = "mlp"
seed = 1
out_dir = "OUT"

[ppo]
n_envs = 2
n_steps = 32
iterations = 1
epochs = 1

[env]
horizon_steps = 100

[env.disturbances]
steady_wind = false
gusts = false
sensor_noise = false
coeff_perturbation = false
input_delay = false
"#
    .replace("OUT", dir.join("out").to_str().unwrap());
    std::fs::write(dir.join("run.toml"), config).unwrap();
    let out = bin()
        .args(["train", "--config", dir.join("run.toml").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let ckpt = dir.join("out/checkpoint_final.json");

    let run_eval = |tag: &str| -> (String, String) {
        let out_dir = dir.join(tag);
        let out = bin()
            .args([
                "eval",
                "--checkpoint",
                ckpt.to_str().unwrap(),
                "--protocol",
                "static",
                "--episodes",
                "10",
                "--seed",
                "4",
                "--out",
                out_dir.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        (
            std::fs::read_to_string(out_dir.join("report_static.csv")).unwrap(),
            std::fs::read_to_string(out_dir.join("curves_static.csv")).unwrap(),
        )
    };
    let (report_a, curves_a) = run_eval("eval_a");
    let (report_b, curves_b) = run_eval("eval_b");
    assert_eq!(report_a, report_b, "identical seeds give identical CSVs");
    assert_eq!(curves_a, curves_b);
    assert!(report_a.starts_with("protocol,policy,actuator,episodes,mpe_mean,maxpe_mean,wc,maxpe_sd"));

    // Unknown protocol is a config error.
    let out = bin()
        .args([
            "eval",
            "--checkpoint",
            ckpt.to_str().unwrap(),
            "--protocol",
            "chaos",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_prints_exact_mlp_accounting() {
    let out = bin().args(["analyze", "--arch", "mlp"]).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("13897"));
    assert!(text.contains("flops per action"));

    let out = bin().args(["analyze", "--arch", "lora16_hc"]).output().unwrap();
    assert!(stdout(&out).contains("LoRA(16)+HC"));

    // Neither checkpoint nor arch: config error.
    let out = bin().args(["analyze"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plot_data_handles_logs_and_missing_files() {
    // Missing input file: I/O error code.
    let out = bin()
        .args(["plot-data", "--log", "/nonexistent/episode.jsonl"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn shipped_configs_parse_and_validate() {
    for name in ["train_smoke.toml", "train_full.toml"] {
        let cfg = faultwing::config::RunConfig::load(&repo_config(name))
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        cfg.arch_tag().unwrap();
        let airframe = faultwing::config::load_airframe(&cfg.airframe).unwrap();
        airframe.validate().unwrap();
    }
}
