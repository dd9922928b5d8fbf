use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn sisams(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sisams"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn interval_config(trials: usize, iterations: usize, plot: bool) -> String {
    format!(
        r#"schema_version = 1
trials = {trials}
seed_base = 3
plot = {plot}

[game]
name = "interval"

[solver]
kind = "sisams"
support_sizes = [2, 1]
iterations = {iterations}
eval_every = {every}
weight_schedule = {{ kind = "constant", base = 0.05 }}
support_schedule = {{ kind = "constant", base = 0.05 }}
"#,
        every = iterations / 4
    )
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--config",
        config.to_str().unwrap(),
        "--output-dir",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    sisams(&args)
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(files_under(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn with_ext(files: &[PathBuf], ext: &str) -> usize {
    files
        .iter()
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .count()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn single_trial_without_plots_writes_three_files() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", &interval_config(1, 400, true));
    let out = tmp.path().join("out");
    let o = run(&cfg, &out, &["--no-plot"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files = files_under(&out);
    assert_eq!(files.len(), 3, "{files:?}");
    assert_eq!(with_ext(&files, "csv"), 1);
    assert_eq!(with_ext(&files, "json"), 2);
    assert!(out.join("trial_0/strategy.json").is_file());
    assert!(out.join("summary.json").is_file());
}

#[test]
fn plots_are_written_when_enabled() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", &interval_config(2, 200, true));
    let out = tmp.path().join("out");
    assert!(run(&cfg, &out, &[]).status.success());
    let files = files_under(&out);
    assert_eq!(with_ext(&files, "svg"), 3, "{files:?}");
    let svg = std::fs::read_to_string(out.join("exploitability.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", &interval_config(3, 400, true));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&cfg, &a, &["--jobs", "1"]).status.success());
    assert!(run(&cfg, &b, &["--jobs", "2"]).status.success());
    let (fa, fb) = (files_under(&a), files_under(&b));
    assert_eq!(fa.len(), fb.len());
    let mut compared = 0;
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.strip_prefix(&a).unwrap(), y.strip_prefix(&b).unwrap());
        if x.extension().is_some_and(|e| e == "csv" || e == "json") {
            assert_eq!(
                std::fs::read(x).unwrap(),
                std::fs::read(y).unwrap(),
                "{x:?}"
            );
            compared += 1;
        }
    }
    assert_eq!(compared, 7);
}

#[test]
fn seed_flag_changes_the_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", &interval_config(1, 100, false));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&cfg, &a, &[]).status.success());
    assert!(run(&cfg, &b, &["--seed", "99"]).status.success());
    assert_eq!(
        json(&a.join("summary.json"))["seeds"],
        serde_json::json!([3])
    );
    assert_eq!(
        json(&b.join("summary.json"))["seeds"],
        serde_json::json!([99])
    );
    assert_ne!(
        std::fs::read(a.join("trial_0/trace.csv")).unwrap(),
        std::fs::read(b.join("trial_0/trace.csv")).unwrap()
    );
}

#[test]
fn interval_experiment_converges_and_summary_matches_traces() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", &interval_config(4, 20_000, false));
    let out = tmp.path().join("out");
    assert!(run(&cfg, &out, &[]).status.success());
    let files = files_under(&out);
    assert_eq!(with_ext(&files, "csv"), 4);

    let mut finals = Vec::new();
    for k in 0..4 {
        let mut reader = csv::Reader::from_path(out.join(format!("trial_{k}/trace.csv"))).unwrap();
        let headers = reader.headers().unwrap().clone();
        assert_eq!(
            headers.iter().collect::<Vec<_>>(),
            [
                "iteration",
                "phi_meta",
                "phi_full",
                "psi_full",
                "elapsed_seconds"
            ]
        );
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        let last = rows.iter().rev().find(|r| !r[2].is_empty()).unwrap();
        assert_eq!(&last[0], "20000");
        assert!(rows.iter().all(|r| r[4].is_empty()));
        finals.push(last[2].parse::<f64>().unwrap());
    }
    let summary = json(&out.join("summary.json"));
    let n = finals.len() as f64;
    let mean = finals.iter().sum::<f64>() / n;
    let se = (finals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let reported: Vec<f64> = summary["final_phi"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(reported, finals);
    assert!((summary["mean_final_phi"].as_f64().unwrap() - mean).abs() < 1e-12);
    assert!((summary["stderr_final_phi"].as_f64().unwrap() - se).abs() < 1e-12);
    assert_eq!(summary["completed"], 4);
    assert!(mean <= 0.05, "mean final phi {mean}");
}

const INTERVAL_SPEC: &str = "name = \"interval\"\n";

#[test]
fn eval_of_the_analytic_interval_equilibrium() {
    let tmp = TempDir::new().unwrap();
    let game = write(tmp.path(), "game.toml", INTERVAL_SPEC);
    let strategy = write(
        tmp.path(),
        "s.json",
        r#"{"game": "interval", "strategies": [
            [{"atom": [-1.0], "prob": 0.5}, {"atom": [1.0], "prob": 0.5}],
            [{"atom": [0.0], "prob": 1.0}]
        ]}"#,
    );
    let o = sisams(&[
        "eval",
        "--game",
        game.to_str().unwrap(),
        "--strategy",
        strategy.to_str().unwrap(),
        "--resolution",
        "2001",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["phi"].as_f64().unwrap() <= 0.02, "{report}");
    assert_eq!(report["resolutions"], serde_json::json!([2001, 2001]));
}

#[test]
fn eval_accepts_json_game_specs_and_run_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", &interval_config(1, 200, false));
    let out = tmp.path().join("out");
    assert!(run(&cfg, &out, &[]).status.success());
    let game = write(tmp.path(), "game.json", r#"{"name": "interval"}"#);
    let o = sisams(&[
        "eval",
        "--game",
        game.to_str().unwrap(),
        "--strategy",
        out.join("trial_0/strategy.json").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn eval_rejects_malformed_json() {
    let tmp = TempDir::new().unwrap();
    let game = write(tmp.path(), "game.toml", INTERVAL_SPEC);
    let strategy = write(
        tmp.path(),
        "s.json",
        r#"{"game": "interval", "strategies": [[{"atom": [0.0], "prob": "#,
    );
    let o = sisams(&[
        "eval",
        "--game",
        game.to_str().unwrap(),
        "--strategy",
        strategy.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn eval_rejects_strategies_for_another_game() {
    let tmp = TempDir::new().unwrap();
    let game = write(tmp.path(), "game.toml", INTERVAL_SPEC);
    let wrong_name = write(
        tmp.path(),
        "a.json",
        r#"{"game": "circle", "strategies": [[{"atom": [1.0, 0.0], "prob": 1.0}], [{"atom": [1.0, 0.0], "prob": 1.0}]]}"#,
    );
    let wrong_shape = write(
        tmp.path(),
        "b.json",
        r#"{"game": "interval", "strategies": [[{"atom": [1.0, 0.0], "prob": 1.0}], [{"atom": [0.0], "prob": 1.0}]]}"#,
    );
    let missing_player = write(
        tmp.path(),
        "c.json",
        r#"{"game": "interval", "strategies": [[{"atom": [0.0], "prob": 1.0}]]}"#,
    );
    for s in [wrong_name, wrong_shape, missing_player] {
        let o = sisams(&[
            "eval",
            "--game",
            game.to_str().unwrap(),
            "--strategy",
            s.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(1), "{s:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn config_errors_exit_with_one_and_report_lines() {
    let tmp = TempDir::new().unwrap();
    let broken = write(
        tmp.path(),
        "c.toml",
        &interval_config(1, 100, false).replace("trials = 1", "trials = "),
    );
    let o = run(&broken, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("line"),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let ok = write(tmp.path(), "ok.toml", &interval_config(1, 100, false));
    assert_eq!(
        run(&ok, &tmp.path().join("out2"), &["--jobs", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(
            &tmp.path().join("missing.toml"),
            &tmp.path().join("out3"),
            &[]
        )
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn empty_sweep_grid_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        &format!(
            "{}\n[sweep]\nlearning_rates = []\nsupport_sizes = [1]\n",
            interval_config(1, 100, false)
        ),
    );
    let o = sisams(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--output-dir",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let no_grid = write(tmp.path(), "d.toml", &interval_config(1, 100, false));
    let o = sisams(&[
        "sweep",
        "--config",
        no_grid.to_str().unwrap(),
        "--output-dir",
        tmp.path().join("out2").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

fn final_mean(summary: &Path) -> f64 {
    json(summary)["mean_final_phi"].as_f64().unwrap()
}

#[test]
fn interval_sweep_separates_support_sizes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        &format!(
            "{}\n[sweep]\nlearning_rates = [0.05]\nsupport_sizes = [1, 2, 4]\n",
            interval_config(2, 20_000, true)
        ),
    );
    let out = tmp.path().join("out");
    let o = sisams(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("sweep.svg").is_file());
    let size1 = final_mean(&out.join("lr_0.05_size_1/summary.json"));
    let size2 = final_mean(&out.join("lr_0.05_size_2/summary.json"));
    let size4 = final_mean(&out.join("lr_0.05_size_4/summary.json"));
    assert!(size1 >= 0.2, "size 1: {size1}");
    assert!(size2 < 0.05, "size 2: {size2}");
    assert!(size4 < 0.05, "size 4: {size4}");
}

#[test]
fn single_cell_sweep_matches_run() {
    let tmp = TempDir::new().unwrap();
    let base = interval_config(2, 400, false).replace("[2, 1]", "[2, 2]");
    let run_cfg = write(tmp.path(), "run.toml", &base);
    let sweep_cfg = write(
        tmp.path(),
        "sweep.toml",
        &format!("{base}\n[sweep]\nlearning_rates = [0.05]\nsupport_sizes = [2]\n"),
    );
    let (a, b) = (tmp.path().join("run"), tmp.path().join("sweep"));
    assert!(run(&run_cfg, &a, &[]).status.success());
    let o = sisams(&[
        "sweep",
        "--config",
        sweep_cfg.to_str().unwrap(),
        "--output-dir",
        b.to_str().unwrap(),
        "--no-plot",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cell = b.join("lr_0.05_size_2");
    for f in [
        "summary.json",
        "trial_0/trace.csv",
        "trial_1/trace.csv",
        "trial_0/strategy.json",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(cell.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn other_solvers_run_from_config() {
    let tmp = TempDir::new().unwrap();
    let do_cfg = write(
        tmp.path(),
        "do.toml",
        "schema_version = 1\nplot = false\n[game]\nname = \"interval\"\n[solver]\nkind = \"double_oracle\"\ninitial_atoms = [[[0.0]], [[0.0]]]\n",
    );
    let out = tmp.path().join("do");
    let o = run(&do_cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(final_mean(&out.join("summary.json")) <= 0.05);

    let gd_cfg = write(
        tmp.path(),
        "gd.toml",
        "schema_version = 1\nplot = false\n[game]\nname = \"interval\"\n[solver]\nkind = \"gradient_dynamics\"\niterations = 500\nstepsize = { kind = \"constant\", base = 0.05 }\n",
    );
    let out = tmp.path().join("gd");
    let o = run(&gd_cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        json(&out.join("summary.json"))["solver"],
        "gradient_dynamics"
    );
}

#[test]
fn list_games_names_every_game() {
    let o = sisams(&["list-games"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in [
        "interval",
        "circle",
        "glicksberg_gross",
        "blotto",
        "security",
        "all_pay",
        "chopstick",
        "polymatrix",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}
