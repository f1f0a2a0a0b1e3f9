use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(label: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{label}.json"))
}

fn ssbsd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssbsd")).args(args).output().expect("run ssbsd")
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_exit_codes() {
    let f = fixture("14a1");
    let out = ssbsd(&["verify", path(&f)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("outcome: pass"));

    let out = ssbsd(&["verify", path(&f), "--mutate", "tamagawa"]);
    assert_eq!(out.status.code(), Some(2));

    let out = ssbsd(&["verify", path(&fixture("43a1")), "--level", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("needs n >="));
}

#[test]
fn unmet_hypothesis_and_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(fixture("34a1")).unwrap()).unwrap();
    v["p"] = 3.into();
    let bad = dir.path().join("bad-prime.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    assert_eq!(ssbsd(&["verify", path(&bad)]).status.code(), Some(4));

    let missing = dir.path().join("missing.json");
    let out = ssbsd(&["verify", path(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn reports_are_byte_identical_with_and_without_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let f = fixture("53a1");
    let mut reports = Vec::new();
    for (i, extra) in [vec![], vec!["--cache-dir", path(&cache)], vec!["--cache-dir", path(&cache)]].into_iter().enumerate() {
        let out_path = dir.path().join(format!("r{i}.json"));
        let mut args = vec!["verify", path(&f), "--level", "4", "--report", path(&out_path)];
        args.extend(extra);
        assert_eq!(ssbsd(&args).status.code(), Some(0));
        reports.push(std::fs::read(&out_path).unwrap());
    }
    assert!(reports.windows(2).all(|w| w[0] == w[1]));
    assert!(std::fs::read_dir(&cache).unwrap().count() >= 5);
    let v: serde_json::Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(v["outcome"], "pass");
    assert_eq!(v["rho"], "1");
}

#[test]
fn selftest_passes() {
    let out = ssbsd(&["selftest", "--count", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 failures"));
}

#[test]
fn decompose_from_fixture_and_from_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = ssbsd(&["decompose", path(&fixture("53a1")), "--level", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let input = dir.path().join("la.json");
    std::fs::write(&input, serde_json::json!({ "p": 5, "l_alpha": v["l_alpha"] }).to_string()).unwrap();
    let out = ssbsd(&["decompose", path(&input)]);
    assert_eq!(out.status.code(), Some(0));
    let w: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(w["round_trip_mismatches"], serde_json::json!([]));
    assert_eq!(w["signed"]["plus"], v["signed"]["plus"]);
    assert_eq!(w["signed"]["minus"], v["signed"]["minus"]);
}
