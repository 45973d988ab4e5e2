use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn walklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walklab")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = walklab(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_walk_is_reproducible() {
    let root = tempfile::tempdir().unwrap();
    let gen_dir = root.path().join("gen");
    ok(&["gen", "--kind", "torus", "--dims", "10", "10", "--name", "t", "--out", s(&gen_dir)]);
    let graph = gen_dir.join("t.graph");
    assert!(fs::read_to_string(&graph).unwrap().starts_with("graph 100 200\n"));
    assert!(gen_dir.join("t.graph.json").exists());

    let walk_dir = root.path().join("walk");
    let args = [
        "walk", "--graph", s(&graph), "--t-grid", "1..4,16", "--mode", "mc", "--samples", "200", "--seed", "9",
        "--out", s(&walk_dir),
    ];
    ok(&args);
    let first = fs::read(walk_dir.join("walk.csv")).unwrap();
    ok(&args);
    assert_eq!(fs::read(walk_dir.join("walk.csv")).unwrap(), first);

    let csv = String::from_utf8(first).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("t,statistic"));

    let table = ok(&["report", "--out", s(root.path())]);
    assert!(table.contains("Gen") && table.contains("Walk"), "{table}");
}

#[test]
fn config_files_drive_runs_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.toml");
    fs::write(
        &config,
        "name = \"cfg\"\nexperiment = \"walk\"\nseed = 3\n\n[graph]\nkind = \"standard\"\nfamily = \"cycle\"\ndims = [12]\n\n[walk]\nt_grid = [1, 2, 3]\nmode = \"exact\"\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    ok(&["walk", "--config", s(&config), "--seed", "4", "--out", s(&out)]);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 4);
    assert_eq!(manifest["status"], "ok");
    assert!(out.join("cfg.csv").exists());
}

#[test]
fn bad_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "name = \"x\"\nexperiment = \"walk\"\nunknown_key = 1\n").unwrap();
    for args in [
        vec!["walk", "--config", s(&config)],
        vec!["walk", "--t-grid", "5..2"],
        vec!["gen", "--kind", "expander"],
        vec!["scan", "--full-grid", "--graph", "/nonexistent.graph"],
        vec!["report", "--out", s(dir.path())],
    ] {
        let out = walklab(&args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn report_flags_missing_outputs() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("g");
    ok(&["gen", "--kind", "cycle", "--dims", "8", "--name", "c", "--out", s(&out)]);
    ok(&["report", "--out", s(root.path())]);
    fs::remove_file(out.join("c.graph")).unwrap();
    let res = walklab(&["report", "--out", s(root.path())]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stdout).contains("missing output c.graph"));
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            walklab::experiments::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
