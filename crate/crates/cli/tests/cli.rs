use std::path::PathBuf;
use std::process::{Command, Output};

use kfcalc::verify::{verify_with, Level};
use kfcalc_core::measure::{MeasurableSet, MeasureSpace};
use kfcalc_core::rkhs::{DirectGram, GramAssembler, GramMatrix};
use serde_json::Value;

fn kfcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kfcalc"))
        .args(args)
        .env_remove("KFCALC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn passing_scenarios_exit_zero() {
    for name in ["brownian.json", "family.json", "composition.json", "reciprocal.json"] {
        let out = kfcalc(&["run", &scenario(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stdout));
        let report = json(&out);
        assert_eq!(report["schema"], "kfcalc.report/1");
        assert_eq!(report["summary"]["failed"], 0);
    }
}

#[test]
fn runs_are_reproducible_and_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let path = scenario("brownian.json");
    for out in [&a, &b] {
        let csv = dir.path().join("csv");
        let status = kfcalc(&["run", &path, "--out", out.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
        assert_eq!(status.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let csv = std::fs::read_to_string(dir.path().join("csv/checks.csv")).unwrap();
    assert!(csv.starts_with("experiment,quantity,expected,actual,abs_error,rel_error,pass\n"));
    assert!(!csv.contains('\r'));
}

#[test]
fn seed_override_changes_sampled_outputs() {
    let path = scenario("brownian.json");
    let a = json(&kfcalc(&["run", &path, "--seed", "1"]));
    let b = json(&kfcalc(&["run", &path, "--seed", "2"]));
    assert_eq!(a["seed"], 1);
    let mc = |r: &Value| r["experiments"][2]["outputs"].clone();
    assert_ne!(mc(&a), mc(&b));
    assert_eq!(a["experiments"][0], b["experiments"][0]);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_kfcalc"))
        .args(["run", &scenario("family.json"), "--out", "report.json"])
        .env("KFCALC_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn non_member_exits_one_with_witness() {
    let out = kfcalc(&["run", &scenario("nonmember.json")]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    let member = &report["experiments"][0];
    assert_eq!(member["status"], "fail");
    assert_eq!(member["outputs"]["member"], false);
    assert_eq!(member["outputs"]["best_constant"], "inf");
    assert_eq!(member["outputs"]["witness"], serde_json::json!([[1]]));
}

#[test]
fn malformed_input_exits_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("{\"schema\": \"kfcalc.scenario/1\", ", "scenario"),
        (
            r#"{"schema":"kfcalc.scenario/1","space":{"weights":[1,2]},"experiments":[{"op":"covariance","params":{"pairs":[[[0],[7]]]}}]}"#,
            "pairs[0][1]",
        ),
        (
            r#"{"schema":"kfcalc.scenario/1","space":{"weights":[1,-2]},"experiments":[]}"#,
            "space.weights",
        ),
        (
            r#"{"schema":"kfcalc.scenario/1","space":{"weights":[1]},"experiments":[{"op":"membership","params":{"m":{"density":[1]},"p":0.5}}]}"#,
            "experiments[0].params",
        ),
        (
            r#"{"schema":"kfcalc.scenario/1","space":{"weights":[1]},"experiments":[{"op":"nope"}]}"#,
            "experiments[0].op",
        ),
        (
            r#"{"schema":"kfcalc.scenario/1","space":{"weights":[1]},"experiments":[],"extra":1}"#,
            "extra",
        ),
    ];
    for (k, (text, field)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{k}.json"));
        std::fs::write(&path, text).unwrap();
        let out = kfcalc(&["run", path.to_str().unwrap()]);
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(2), "case {k}: {stderr}");
        assert!(stderr.contains(field), "case {k}: {stderr}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn verify_fast_passes() {
    let out = kfcalc(&["verify", "--level", "fast"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["schema"], "kfcalc.verify/1");
    assert_eq!(report["summary"]["failed"], 0);
}

#[test]
fn verify_full_is_byte_identical() {
    let a = kfcalc(&["verify", "--level", "full", "--seed", "11"]);
    let b = kfcalc(&["verify", "--level", "full", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

/// Correct assembly except for one corrupted off-diagonal entry.
struct FlippedEntry;

impl GramAssembler for FlippedEntry {
    fn name(&self) -> &'static str {
        "flipped"
    }

    fn assemble(&self, space: &MeasureSpace, sets: &[MeasurableSet]) -> kfcalc_core::Result<GramMatrix> {
        let g = DirectGram.assemble(space, sets)?;
        let mut entries = g.entries().clone();
        if sets.len() >= 2 {
            entries[(0, 1)] += 1.0;
        }
        GramMatrix::from_parts(sets.to_vec(), entries)
    }
}

#[test]
fn injected_gram_fault_is_caught_and_minimized() {
    let report = verify_with(Level::Fast, 0, false, &FlippedEntry);
    assert!(!report.all_passed());
    let failed: Vec<_> = report.suites.iter().filter(|s| !s.pass).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].name, "rkhs.gram");
    let cx = failed[0].counterexample.as_ref().unwrap();
    assert!(cx.message.contains("(0, 1)"), "{}", cx.message);
    // two sets are needed to reach the corrupted entry; atoms all go
    assert_eq!(cx.instance["sets"].as_array().unwrap().len(), 2);
    assert_eq!(cx.instance["weights"].as_array().unwrap().len(), 0);
}
