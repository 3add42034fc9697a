use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use flate2::read::GzDecoder;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parisian-qsd"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("parisian-qsd-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows as numbers, skipping the comment header and the column line.
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

#[test]
fn transform_table() {
    let m = config("bm.cfg");
    let o = run(&["transform", "--model", m.to_str().unwrap(), "--x", "1", "--theta", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("# parisian-qsd "));
    assert!(text.contains("# command = transform"));
    let r = rows(&text);
    assert_eq!(r.len(), 51);
    assert_eq!(r[0][0], 0.0);
    assert_eq!(r[0][2], 1.0);
}

#[test]
fn density_integrates_to_one() {
    let m = config("mm1.cfg");
    let o = run(&["density", "--model", m.to_str().unwrap(), "--x", "1", "--theta", "2", "--y-steps", "2000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&stdout(&o));
    let mass: f64 = r.windows(2).map(|w| 0.5 * (w[1][0] - w[0][0]) * (w[0][1] + w[1][1])).sum();
    assert!((mass - 1.0).abs() < 1e-3, "{mass}");
    assert!(r.iter().all(|p| p[1] >= -1e-9));
}

#[test]
fn degenerate_density_is_a_numeric_failure() {
    // theta = |xi*| for the M/M/1 input
    let m = config("mm1.cfg");
    let o = run(&["density", "--model", m.to_str().unwrap(), "--x", "1", "--theta", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
}

#[test]
fn usage_and_configuration_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let m = config("mm1.cfg");
    assert_eq!(run(&["transform", "--model", m.to_str().unwrap(), "--x", "1"]).status.code(), Some(2));

    let d = scratch("badcfg");
    let bad = d.join("bad.cfg");
    fs::write(&bad, "kind = spectrally-negative\nsigma = -1\nc = 1\n").unwrap();
    let o = run(&["transform", "--model", bad.to_str().unwrap(), "--x", "1", "--theta", "1"]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(&bad, "kind = spectrally-negative\nsigma = 1\nc = -1\n").unwrap();
    let o = run(&["transform", "--model", bad.to_str().unwrap(), "--x", "1", "--theta", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", "--model", m.to_str().unwrap(), "--x", "1", "--theta", "2", "--q", "0.01"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn header_reproduces_the_run() {
    let m = config("cl.cfg");
    let o = run(&[
        "resolvent",
        "--model",
        m.to_str().unwrap(),
        "--x",
        "0,1",
        "--alpha",
        "0,0.5",
        "--q",
        "1",
        "--theta",
        "0.5,2",
    ]);
    assert!(o.status.success());
    let first = stdout(&o);
    assert_eq!(rows(&first).len(), 8);

    // rebuild the model file from the header alone
    let cfg: String = first.lines().filter_map(|l| l.strip_prefix("# model.")).map(|kv| format!("{kv}\n")).collect();
    let d = scratch("roundtrip");
    let p = d.join("from-header.cfg");
    fs::write(&p, cfg).unwrap();
    let again = run(&[
        "resolvent",
        "--model",
        p.to_str().unwrap(),
        "--x",
        "0,1",
        "--alpha",
        "0,0.5",
        "--q",
        "1",
        "--theta",
        "0.5,2",
    ]);
    let strip = |s: &str| s.lines().filter(|l| !l.starts_with("# model")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&first), strip(&stdout(&again)));
}

#[test]
fn simulation_ignores_the_thread_count() {
    let m = config("bm.cfg");
    let args = [
        "simulate",
        "--model",
        m.to_str().unwrap(),
        "--x",
        "1",
        "--theta",
        "1",
        "--paths",
        "6000",
        "--step",
        "1e-3",
        "--q",
        "1",
        "--alpha",
        "0,0.5",
        "--t",
        "1,5",
        "--seed",
        "0x2a",
    ];
    let outs: Vec<String> = ["1", "2"]
        .iter()
        .map(|n| {
            let o = bin().args(args).env("PARISIAN_QSD_THREADS", n).output().unwrap();
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            stdout(&o)
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    assert!(outs[0].contains("# seed = 0x2a"));
    assert_eq!(rows(&outs[0]).len(), 4);
}

#[test]
fn gzipped_raw_paths() {
    let m = config("cl.cfg");
    let d = scratch("raw");
    let raw = d.join("paths.csv.gz");
    let o = run(&[
        "simulate",
        "--model",
        m.to_str().unwrap(),
        "--x",
        "1",
        "--theta",
        "1",
        "--paths",
        "200",
        "--horizon",
        "50",
        "--raw-out",
        raw.to_str().unwrap(),
        "--gzip",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut text = String::new();
    GzDecoder::new(fs::File::open(&raw).unwrap()).read_to_string(&mut text).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("pathIndex,tauTheta,tauClassic,X_horizon"));
    assert_eq!(lines.count(), 200);
}

#[test]
fn model_validation_passes_and_artifacts_are_reproducible() {
    let m = config("mm1.cfg");
    let dirs = [scratch("val-a"), scratch("val-b")];
    for d in &dirs {
        let o =
            run(&["validate", "--model", m.to_str().unwrap(), "--path-scale", "0.1", "--out-dir", d.to_str().unwrap()]);
        let text = stdout(&o);
        assert_eq!(o.status.code(), Some(0), "{text}");
        assert!(text.contains("6 of 6 criteria passed"));
    }
    let mut names: Vec<_> = fs::read_dir(&dirs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for n in names {
        assert_eq!(fs::read(dirs[0].join(&n)).unwrap(), fs::read(dirs[1].join(&n)).unwrap(), "{n:?}");
    }
}
