use std::path::Path;
use std::process::{Command, Output};

fn mchi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mchi")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn exit_codes() {
    assert_eq!(code(&mchi(&["battery", "lemma-max"])), 0);
    assert_eq!(code(&mchi(&["battery", "no-such-battery"])), 2);
    assert_eq!(code(&mchi(&["sweep", "--alpha", "2"])), 2);
    assert_eq!(code(&mchi(&["sweep", "--q-max", "100000000"])), 3);
    assert_eq!(code(&mchi(&["frobnicate"])), 2);
    let out = mchi(&["search-prescribed", "--order", "3", "--y", "7", "--target", "2:0", "--target", "3:0", "--target", "5:1", "--target", "7:2", "--q-max", "3000000"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn empty_sweep_is_just_a_header() {
    let out = mchi(&["sweep", "--q-min", "50", "--q-max", "10"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("{\"config_hash\":"));
}

#[test]
fn stored_config_reruns_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let first = mchi(&["sweep", "--q-max", "600", "--order", "5", "--threads", "1", "--out", &p("a.jsonl"), "--save-config", &p("run.toml")]);
    assert_eq!(code(&first), 0);
    let again = mchi(&["sweep", "--config", &p("run.toml"), "--threads", "3", "--out", &p("b.jsonl")]);
    assert_eq!(code(&again), 0);
    assert_eq!(std::fs::read(p("a.jsonl")).unwrap(), std::fs::read(p("b.jsonl")).unwrap());

    assert_eq!(code(&mchi(&["export", "--input", &p("a.jsonl"), "--format", "csv", "--out", &p("a.csv")])), 0);
    assert_eq!(code(&mchi(&["export", "--input", &p("a.csv"), "--format", "json-lines", "--out", &p("c.jsonl")])), 0);
    assert_eq!(std::fs::read(p("a.jsonl")).unwrap(), std::fs::read(p("c.jsonl")).unwrap());
    let csv = std::fs::read_to_string(p("a.csv")).unwrap();
    assert_eq!(
        csv.lines().nth(1).unwrap(),
        "q,char_index,order,parity,M_chi,argmax_t,ratio_pv,ratio_odd_order_upper,ratio_odd_order_lower,envelope_pv,elapsed"
    );
}

#[test]
fn corrupted_halasz_baseline_fails_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let shipped = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("baselines/baselines.toml")).unwrap();
    for (name, text) in [
        ("garbled.toml", "max_ratio = [".to_string()),
        ("shifted.toml", shipped.replace("corpus_max_ratio = [0.0225", "corpus_max_ratio = [0.0125")),
    ] {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let out = mchi(&["battery", "halasz", "--check", "corpus", "--baseline", path.to_str().unwrap()]);
        assert_eq!(code(&out), 1, "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("baseline mismatch"), "{name}");
    }
}

#[test]
fn query_commands_answer() {
    let out = mchi(&["distance", "--chi", "7:2", "--y", "1000", "--T", "0.5"]);
    assert_eq!(code(&out), 0);
    let line = String::from_utf8(out.stdout).unwrap().lines().nth(1).unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert!(v["twisted_min"].as_f64().unwrap() <= v["distance_sq"].as_f64().unwrap() + 1e-12);

    let out = mchi(&["mertens", "--m", "4", "--cutoff", "1e5", "--y", "1e5"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
    assert_eq!(code(&mchi(&["halasz-check", "--f", "one", "--y", "1e4", "--T", "1"])), 0);
    assert_eq!(code(&mchi(&["halasz-check", "--f", "sideways"])), 2);
}
