//! End-to-end checks of the `trg` binary: exit codes, output files,
//! determinism across runs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use assert_cmd::prelude::*;
use predicates::prelude::*;
use tempfile::TempDir;

fn write_flat_map(dir: &Path, cells: usize) -> PathBuf {
    let path = dir.join("flat.asc");
    let mut text = format!(
        "ncols {cells}\nnrows {cells}\nxllcorner -0.05\nyllcorner -0.05\ncellsize 0.1\nNODATA_value -9999\n"
    );
    for _ in 0..cells {
        text.push_str(&"0 ".repeat(cells).trim_end().to_string());
        text.push('\n');
    }
    fs::write(&path, text).unwrap();
    path
}

fn trg() -> Command {
    Command::cargo_bin("trg").unwrap()
}

#[test]
fn build_then_plan_produces_outputs() {
    let dir = TempDir::new().unwrap();
    let map = write_flat_map(dir.path(), 80);
    let graph = dir.path().join("g.json");
    trg()
        .args(["build", "--map"])
        .arg(&map)
        .args(["--start", "4,4", "--seed", "7", "--out"])
        .arg(&graph)
        .assert()
        .success()
        .stdout(predicate::str::contains("nodes"));

    let out = dir.path().join("p");
    trg()
        .args(["plan", "--graph"])
        .arg(&graph)
        .arg("--map")
        .arg(&map)
        .args(["--start", "1,1", "--goal", "7,7", "--out"])
        .arg(&out)
        .assert()
        .success()
        .stdout(predicate::str::contains("\"status\": \"planned\""));
    let csv = fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert!(csv.starts_with("x,y,z\n"));
    assert!(csv.lines().count() > 2);
}

#[test]
fn same_seed_builds_identical_graph_files() {
    let dir = TempDir::new().unwrap();
    let map = write_flat_map(dir.path(), 60);
    let (g1, g2) = (dir.path().join("g1.json"), dir.path().join("g2.json"));
    for g in [&g1, &g2] {
        trg()
            .args(["build", "--map"])
            .arg(&map)
            .args(["--start", "3,3", "--seed", "5", "--out"])
            .arg(g)
            .assert()
            .success();
    }
    assert_eq!(fs::read(&g1).unwrap(), fs::read(&g2).unwrap());
}

#[test]
fn start_on_missing_terrain_exits_2() {
    let dir = TempDir::new().unwrap();
    let map = write_flat_map(dir.path(), 60);
    trg()
        .args(["build", "--map"])
        .arg(&map)
        .args(["--start", "500,500", "--out"])
        .arg(dir.path().join("g.json"))
        .assert()
        .code(2)
        .stderr(predicate::str::contains("start not standable"));
}

#[test]
fn strategy_and_gamma_flags_agree_and_gamma_wins() {
    let dir = TempDir::new().unwrap();
    let map = write_flat_map(dir.path(), 80);
    let graph = dir.path().join("g.json");
    trg()
        .args(["build", "--map"])
        .arg(&map)
        .args(["--start", "4,4", "--seed", "1", "--out"])
        .arg(&graph)
        .assert()
        .success();
    let run = |extra: &[&str], out: &str| {
        let out_path = dir.path().join(out);
        trg()
            .args(["plan", "--graph"])
            .arg(&graph)
            .arg("--map")
            .arg(&map)
            .args(["--start", "1,1", "--goal", "7,7", "--out"])
            .arg(&out_path)
            .args(extra)
            .assert()
            .success();
    };
    run(&["--strategy", "balanced"], "a");
    run(&["--Gamma", "3.0"], "b");
    // --Gamma overrides --strategy
    run(&["--strategy", "conservative", "--Gamma", "3.0"], "c");
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    assert_eq!(a, fs::read(dir.path().join("c.json")).unwrap());
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn unreachable_goal_is_exit_0_with_status() {
    let dir = TempDir::new().unwrap();
    let map = write_flat_map(dir.path(), 60);
    let graph = dir.path().join("g.json");
    trg()
        .args(["build", "--map"])
        .arg(&map)
        .args(["--start", "3,3", "--out"])
        .arg(&graph)
        .assert()
        .success();
    trg()
        .args(["plan", "--graph"])
        .arg(&graph)
        .arg("--map")
        .arg(&map)
        .args(["--start", "1,1", "--goal", "400,400", "--out"])
        .arg(dir.path().join("u"))
        .assert()
        .success()
        .stdout(predicate::str::contains("\"status\": \"unreachable\""));
}

#[test]
fn render_writes_svg_and_rejects_missing_inputs() {
    let dir = TempDir::new().unwrap();
    let map = write_flat_map(dir.path(), 60);
    let svg = dir.path().join("r.svg");
    trg()
        .args(["render", "--map"])
        .arg(&map)
        .arg("--out")
        .arg(&svg)
        .assert()
        .success();
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\""));
    assert!(text.trim_end().ends_with("</svg>"));

    trg()
        .args(["render", "--map"])
        .arg(dir.path().join("missing.asc"))
        .arg("--out")
        .arg(dir.path().join("x.svg"))
        .assert()
        .code(2);
}

#[test]
fn bench_outputs_are_deterministic_per_master_seed() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("bench.json");
    fs::write(
        &config,
        r#"{
  "terrain": {"size_m": [12, 12], "resolution_m": 0.1, "relief_m": 0.3,
              "roughness": 0.5, "features": [], "seed": 1},
  "classes": ["short"],
  "trials_per_class": 2,
  "planners": [{"type": "trg", "strategy": "balanced"}, {"type": "grid_astar"}],
  "master_seed": 42
}"#,
    )
    .unwrap();
    let (o1, o2) = (dir.path().join("out1"), dir.path().join("out2"));
    for o in [&o1, &o2] {
        trg()
            .args(["bench", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(o)
            .assert()
            .success()
            .stdout(predicate::str::contains("S_path"));
    }
    assert_eq!(
        fs::read(o1.join("report.json")).unwrap(),
        fs::read(o2.join("report.json")).unwrap()
    );
    assert_eq!(
        fs::read(o1.join("trials.csv")).unwrap(),
        fs::read(o2.join("trials.csv")).unwrap()
    );
}

#[test]
fn bench_bad_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("bad.json");
    fs::write(&config, "{\"not\": \"a config\"}").unwrap();
    trg()
        .args(["bench", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .assert()
        .code(2);
}
