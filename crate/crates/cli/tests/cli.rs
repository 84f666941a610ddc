use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use twostage_cli::output::read_csv;

fn twostage(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twostage"))
        .current_dir(dir)
        .env_remove(twostage_cli::OUT_ENV)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn jsonl(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn simulate_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "--seed",
            "42",
            "--out",
            out,
            "--t-max",
            "5",
            "--half-extent",
            "10",
            "simulate",
        ]
    };
    assert!(twostage(tmp.path(), &args("a")).status.success());
    assert!(twostage(tmp.path(), &args("b")).status.success());
    let a = fs::read(tmp.path().join("a/trajectory.jsonl")).unwrap();
    let b = fs::read(tmp.path().join("b/trajectory.jsonl")).unwrap();
    // meta records differ only in the output directory
    let strip = |bytes: &[u8]| {
        String::from_utf8(bytes.to_vec())
            .unwrap()
            .lines()
            .skip(1)
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
    assert!(strip(&a).lines().count() > 3);
    // same directory twice: byte-identical
    assert!(twostage(tmp.path(), &args("a")).status.success());
    assert_eq!(fs::read(tmp.path().join("a/trajectory.jsonl")).unwrap(), a);
}

#[test]
fn simulate_zero_horizon_has_headers_only() {
    let tmp = tempfile::tempdir().unwrap();
    for engine in ["graphical", "ctmc"] {
        let o = twostage(
            tmp.path(),
            &["--out", engine, "--t-max", "0", "simulate", "--engine", engine],
        );
        assert!(o.status.success(), "{o:?}");
        let records = jsonl(&tmp.path().join(engine).join("trajectory.jsonl"));
        let kinds: Vec<_> = records
            .iter()
            .map(|r| r["record"].as_str().unwrap().to_owned())
            .collect();
        assert_eq!(kinds, ["meta", "params", "graph", "initial"]);
        assert_eq!(records[0]["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(records[0]["seed"], 0);
    }
}

#[test]
fn dual_dump_never_jumps_from_vacant_to_mature() {
    let tmp = tempfile::tempdir().unwrap();
    let toml = r#"
        t_max = 10.0
        [lattice]
        dimension = 1
        half_extent = 15
        range = 1
        [params]
        lambda = 3.0
        gamma = 2.0
        delta = 0.5
        [initial]
        kind = "all_mature"
    "#;
    fs::write(tmp.path().join("sim.toml"), toml).unwrap();
    for engine in ["graphical", "ctmc"] {
        let o = twostage(
            tmp.path(),
            &[
                "--config", "sim.toml", "--out", engine, "--dual", "simulate", "--engine", engine,
            ],
        );
        assert!(o.status.success(), "{o:?}");
        let records = jsonl(&tmp.path().join(engine).join("trajectory.jsonl"));
        let changes: Vec<_> = records.iter().filter(|r| r.get("record").is_none()).collect();
        assert!(!changes.is_empty());
        let mut births = 0;
        for c in changes {
            assert!(!(c["from"] == 0 && c["to"] == 2), "{c}");
            births += (c["from"] == 0 && c["to"] == 1) as usize;
        }
        assert!(births > 0);
    }
}

#[test]
fn duality_test_reports_zero_violations() {
    let tmp = tempfile::tempdir().unwrap();
    let o = twostage(
        tmp.path(),
        &["--out", "d", "--seed", "3", "duality-test", "--trials", "10000"],
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("violations: 0"), "{}", stdout(&o));
    let (header, rows) = read_csv(&tmp.path().join("d/duality_test.csv")).unwrap();
    assert_eq!(header, ["trials", "violations", "max_sites", "horizon"]);
    assert_eq!(rows, [["10000", "0", "5", "2"]]);
}

#[test]
fn survival_without_births_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let toml = r#"
        t_max = 20.0
        replicates = 200
        [lattice]
        dimension = 1
        half_extent = 20
        range = 1
        [params]
        lambda = 0.0
        gamma = 1.0
        [grid]
        gammas = [0.5, 2.0, "inf"]
    "#;
    fs::write(tmp.path().join("s.toml"), toml).unwrap();
    let o = twostage(tmp.path(), &["--config", "s.toml", "--out", "s", "survival"]);
    assert!(o.status.success(), "{o:?}");
    let (header, rows) = read_csv(&tmp.path().join("s/survival.csv")).unwrap();
    let col = header.iter().position(|h| h == "survival_mean").unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[col] == "0"));
    assert_eq!(rows[2][1], "inf");
}

#[test]
fn phase_diagram_grid_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let toml = r#"
        t_max = 5.0
        replicates = 40
        [lattice]
        dimension = 1
        half_extent = 8
        range = 1
        [grid]
        lambdas = [0.0, 1.0, 2.0, 3.0, 4.0]
        gammas = [0.2, 1.0, 2.0, 4.0, "inf"]
    "#;
    fs::write(tmp.path().join("p.toml"), toml).unwrap();
    let o = twostage(tmp.path(), &["--config", "p.toml", "--out", "p", "phase-diagram"]);
    assert!(o.status.success(), "{o:?}");
    let (header, rows) = read_csv(&tmp.path().join("p/phase_diagram.csv")).unwrap();
    assert_eq!(
        header,
        [
            "lambda",
            "gamma",
            "delta",
            "survival_mean",
            "survival_se",
            "density_mean",
            "density_se",
            "replicates"
        ]
    );
    assert_eq!(rows.len(), 25);
    assert_eq!(rows[0][..2], ["0", "0.2"]);
    assert_eq!(rows[24][..2], ["4", "inf"]);
    let text = fs::read_to_string(tmp.path().join("p/phase_diagram.csv")).unwrap();
    assert!(text.starts_with(&format!("# twostage {}\n", env!("CARGO_PKG_VERSION"))));
    assert!(text.contains("# seed: 0\n"));
    assert!(text.contains("# [grid]\n"));
    assert_eq!(jsonl(&tmp.path().join("p/phase_diagram.jsonl")).len(), 26);
}

#[test]
fn edge_speed_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let o = twostage(
        tmp.path(),
        &[
            "--out",
            "e",
            "--lambda",
            "0",
            "--t-max",
            "2",
            "--replicates",
            "50",
            "--half-extent",
            "10",
            "edge-speed",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    let (header, rows) = read_csv(&tmp.path().join("e/edge_speed.csv")).unwrap();
    assert_eq!(
        header,
        [
            "lambda",
            "gamma",
            "delta",
            "alpha_mean",
            "alpha_se",
            "truncated_fraction",
            "replicates"
        ]
    );
    let alpha: f64 = rows[0][3].parse().unwrap();
    assert!(alpha < 0.0);
}

#[test]
fn config_command_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("c.toml"),
        "command = \"offspring\"\nseed = 5\nreplicates = 1000\nout = \"from-config\"\n",
    )
    .unwrap();
    let o = twostage(tmp.path(), &["--config", "c.toml", "--seed", "6"]);
    assert!(o.status.success(), "{o:?}");
    let written = fs::read_to_string(tmp.path().join("from-config/config.toml")).unwrap();
    assert!(written.contains("seed = 6"));
    assert!(written.contains("command = \"offspring\""));
    let (_, rows) = read_csv(&tmp.path().join("from-config/offspring.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r[1].parse::<usize>().unwrap()).sum::<usize>(), 1000);

    // the environment overrides the file, the flag overrides both
    let run = |extra: &[&str]| {
        let mut args = vec!["--config", "c.toml"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_twostage"))
            .current_dir(tmp.path())
            .env(twostage_cli::OUT_ENV, "from-env")
            .args(args)
            .output()
            .unwrap()
    };
    assert!(run(&[]).status.success());
    assert!(tmp.path().join("from-env/offspring.csv").exists());
    assert!(run(&["--out", "from-flag"]).status.success());
    assert!(tmp.path().join("from-flag/offspring.csv").exists());
}

#[test]
fn invalid_configs_fail_before_running() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = [
        vec!["--out", "x", "--delta", "-1", "survival"],
        vec!["--out", "x", "--replicates", "0", "density"],
        vec!["--out", "x", "--workers", "0", "survival"],
        vec!["--out", "x", "--gamma", "fast", "survival"],
        vec!["--out", "x"],
    ];
    for args in bad {
        let o = twostage(tmp.path(), &args);
        assert!(!o.status.success(), "{args:?}");
    }
    fs::write(tmp.path().join("typo.toml"), "replicate = 10\n").unwrap();
    assert!(!twostage(tmp.path(), &["--config", "typo.toml", "survival"])
        .status
        .success());
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn csv_independent_of_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for w in ["1", "3"] {
        let out = format!("w{w}");
        let o = twostage(
            tmp.path(),
            &[
                "--out",
                &out,
                "--workers",
                w,
                "--t-max",
                "10",
                "--replicates",
                "300",
                "--half-extent",
                "15",
                "density",
            ],
        );
        assert!(o.status.success());
        outputs.push(fs::read(tmp.path().join(out).join("density.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
