mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{check_against_oracle, Toy};
use socialtie::io::load_network;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn socialtie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_socialtie"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) {
    let out = socialtie(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn run_tiny(out: &Path) {
    let cfg = fixtures().join("tiny.toml");
    ok(&["run", "--config", s(&cfg), "--out", s(out)]);
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

#[test]
fn golden_tiny_network() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    run_tiny(&out);
    for name in ["node_labels.tsv", "edge_labels.tsv", "class_summary.tsv"] {
        let want = fs::read_to_string(fixtures().join("golden").join(name)).unwrap();
        let got = fs::read_to_string(out.join(name)).unwrap();
        assert_eq!(got, want, "{name}");
    }
    let net = load_network(&out).unwrap();
    check_against_oracle(&Toy::from_network(&net)).unwrap();
    for name in [
        "classified.dot",
        "classified.graphml",
        "tests.tsv",
        "distributions.tsv",
        "validation.json",
    ] {
        assert!(out.join(name).exists(), "{name} missing");
    }
}

#[test]
fn missing_input_leaves_nothing_behind() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let absent = tmp.path().join("absent.tsv");
    let res = socialtie(&[
        "run",
        "--config",
        s(&fixtures().join("tiny.toml")),
        "--in",
        s(&absent),
        "--out",
        s(&out),
    ]);
    assert_eq!(res.status.code(), Some(3));
    assert!(!out.exists());

    let res = socialtie(&[
        "ingest",
        "--schema",
        "coauthorship",
        "--in",
        s(&absent),
        "--out",
        s(&out),
    ]);
    assert_eq!(res.status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_tiny(&a);
    run_tiny(&b);
    let names = listing(&a);
    assert_eq!(names, listing(&b));
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n}");
    }
}

#[test]
fn subcommands_compose_to_run() {
    let tmp = tempfile::tempdir().unwrap();
    let whole = tmp.path().join("whole");
    run_tiny(&whole);
    let staged = tmp.path().join("staged");
    let input = fixtures().join("tiny_coauthorship.tsv");
    ok(&[
        "ingest",
        "--schema",
        "coauthorship",
        "--in",
        s(&input),
        "--out",
        s(&staged),
    ]);
    ok(&["classify", "--net", s(&staged)]);
    ok(&["metrics", "--net", s(&staged)]);
    ok(&["validate", "--run", s(&staged)]);
    ok(&["export", "--run", s(&staged), "--format", "dot,graphml,tsv"]);
    let mut expected = listing(&whole);
    expected.retain(|n| n != "config.resolved.toml");
    assert_eq!(listing(&staged), expected);
    for n in &expected {
        assert_eq!(
            fs::read_to_string(whole.join(n)).unwrap(),
            fs::read_to_string(staged.join(n)).unwrap(),
            "{n}"
        );
    }
}

fn test_rows(dir: &Path) -> Vec<(String, f64, bool)> {
    fs::read_to_string(dir.join("tests.tsv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            let p = f[6].parse().ok()?;
            Some((f[..5].join("/"), p, f[7] == "true"))
        })
        .collect()
}

#[test]
fn alpha_only_moves_decisions() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    run_tiny(&out);
    ok(&["validate", "--run", s(&out), "--alpha", "0.01"]);
    ok(&["export", "--run", s(&out), "--format", "tsv"]);
    let strict = test_rows(&out);
    ok(&["validate", "--run", s(&out), "--alpha", "0.2"]);
    ok(&["export", "--run", s(&out), "--format", "tsv"]);
    let loose = test_rows(&out);
    assert_eq!(strict.len(), loose.len());
    assert!(!strict.is_empty());
    let mut moved = 0;
    for (a, b) in strict.iter().zip(&loose) {
        assert_eq!((&a.0, a.1), (&b.0, b.1));
        assert_eq!(a.2, a.1 < 0.01);
        assert_eq!(b.2, b.1 < 0.2);
        moved += usize::from(a.2 != b.2);
    }
    // The tiny network has p-values between the two levels.
    assert!(moved > 0);
}

#[test]
fn classify_with_given_relevance() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let input = fixtures().join("tiny_coauthorship.tsv");
    ok(&[
        "ingest",
        "--schema",
        "coauthorship",
        "--in",
        s(&input),
        "--out",
        s(&out),
    ]);
    ok(&[
        "classify",
        "--net",
        s(&out),
        "--relevance",
        s(&fixtures().join("tiny_relevance.tsv")),
    ]);
    let labels = fs::read_to_string(out.join("edge_labels.tsv")).unwrap();
    let mut closure = 0;
    for l in labels.lines().filter(|l| !l.starts_with('#')) {
        let f: Vec<&str> = l.split('\t').collect();
        let touches_dee = f[0] == "Dee" || f[1] == "Dee";
        // Every Dee interaction carries `queri`; nobody else has relevant
        // attributes, so there are no weak endpoints.
        assert_eq!(f[3], if touches_dee { "closure" } else { "innocuous" }, "{l}");
        closure += usize::from(touches_dee);
    }
    assert_eq!(closure, 6);
    let nodes = fs::read_to_string(out.join("node_labels.tsv")).unwrap();
    for l in nodes.lines().filter(|l| !l.starts_with('#')) {
        let (name, class) = l.split_once('\t').unwrap();
        let want = match name {
            "Dee" => "closure",
            "Ivy" | "Jon" => "innocuous",
            _ => "brokerage",
        };
        assert_eq!(class, want, "{name}");
    }
}

#[test]
fn rejects_other_schema_versions() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let input = fixtures().join("tiny_coauthorship.tsv");
    ok(&[
        "ingest",
        "--schema",
        "coauthorship",
        "--in",
        s(&input),
        "--out",
        s(&out),
    ]);
    let path = out.join("network.tsv");
    let text = fs::read_to_string(&path).unwrap().replacen("\tv1\n", "\tv2\n", 1);
    fs::write(&path, text).unwrap();
    let res = socialtie(&["classify", "--net", s(&out)]);
    assert_eq!(res.status.code(), Some(4));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("v2"), "{err}");
    assert!(!out.join("edge_labels.tsv").exists());
}

#[test]
fn bad_arguments_fail_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    run_tiny(&out);
    let res = socialtie(&["metrics", "--net", s(&out), "--betweenness", "sampled:0"]);
    assert!(!res.status.success());
    let res = socialtie(&["export", "--run", s(&out), "--format", "png"]);
    assert!(!res.status.success());
}

#[test]
fn full_config_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    ok(&[
        "run",
        "--config",
        s(&fixtures().join("full.toml")),
        "--out",
        s(&out),
    ]);
    assert!(out.join("randomization.json").exists());
    let resolved = fs::read_to_string(out.join("config.resolved.toml")).unwrap();
    assert!(resolved.contains("pivots = 4"), "{resolved}");
    assert!(resolved.contains("unit = \"token\""), "{resolved}");
    assert!(resolved.contains("stop_words = \"none\""), "{resolved}");
}
