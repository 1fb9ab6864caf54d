use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn quon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quon"))
        .args(args)
        .output()
        .expect("failed to spawn quon")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}):\n{}\nstderr:\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn validator() -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas/run_report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

const INVOCATIONS: &[&[&str]] = &[
    &["vev", "--word", "a1 c1", "--method", "both"],
    &["vev", "--word", "a1 a2 c1 c2", "--method", "wick"],
    &["gram", "--n", "3"],
    &["gram", "--n", "2", "--at", "0.5"],
    &["zagier", "--n", "3"],
    &["zagier", "--n", "5", "--samples", "4"],
    &["positivity", "--n", "3", "--samples", "7"],
    &["observables", "--modes", "2", "--cap", "3", "--depth", "2", "--check", "commutator"],
    &["observables", "--modes", "2", "--cap", "3", "--depth", "2", "--check", "hamiltonian"],
    &["observables", "--modes", "2", "--cap", "3", "--depth", "2", "--check", "locality"],
    &["para", "--kind", "fermi", "--p", "2", "--modes", "2", "--cap", "2", "--check", "trilinear"],
    &["para", "--kind", "bose", "--p", "2", "--modes", "3", "--cap", "3", "--check", "occupancy"],
    &["para", "--kind", "fermi", "--p", "1", "--modes", "2", "--cap", "1", "--check", "canonical"],
    &["gentile"],
    &["speicher", "--word", "a1 a2 c1 c2", "--q", "0.5", "--N", "20", "--samples", "50"],
    &["bounds", "convert", "--vf", "1.7e-26"],
    &["bounds", "propagate", "--qe", "-0.999"],
    &["bounds", "composite", "--q", "-1", "--n", "3"],
    &["bounds", "overlap", "--la", "0.5", "--lb", "0.25"],
    &["bounds", "conservation", "--momenta", "1,2,5,9", "--qe", "-1"],
    &["bounds", "conservation", "--momenta", "1,2,5,9", "--sweep"],
    &["vev", "--word", "a1 x2"],
];

#[test]
fn every_report_validates_against_schema() {
    let v = validator();
    for args in INVOCATIONS {
        let out = quon(args);
        let doc = report(&out);
        let errors: Vec<String> = v.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}\n{doc:#}");
    }
}

#[test]
fn verify_all_passes_and_validates() {
    let out = quon(&["verify-all", "--timing"]);
    let doc = report(&out);
    assert!(validator().is_valid(&doc), "{doc:#}");
    assert_eq!(doc["status"], "pass", "{doc:#}");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(doc["results"]["checks"].as_array().unwrap().len(), 11);
    assert!(doc["elapsed"].as_f64().unwrap() >= 0.0);
}

#[test]
fn exit_code_tracks_status() {
    for args in INVOCATIONS {
        let out = quon(args);
        let doc = report(&out);
        let expected = match doc["status"].as_str().unwrap() {
            "pass" => 0,
            "fail" => 1,
            "error" => 2,
            other => panic!("unexpected status {other}"),
        };
        assert_eq!(out.status.code(), Some(expected), "{args:?}");
    }
}

#[test]
fn zagier_example() {
    let out = quon(&["zagier", "--n", "3"]);
    let doc = report(&out);
    assert_eq!(doc["results"]["det"], "(1-q^2)^6 (1-q^6)");
    assert_eq!(doc["results"]["match"], true);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn vev_example() {
    let doc = report(&quon(&["vev", "--word", "a1 c1", "--method", "both"]));
    assert_eq!(doc["results"]["value"], "1");
    assert_eq!(doc["results"]["methods_agree"], true);

    let doc = report(&quon(&["vev", "--word", "a1 a1 c1 c1"]));
    assert_eq!(doc["results"]["value"], "1+q");
}

#[test]
fn propagate_example() {
    let doc = report(&quon(&["bounds", "propagate", "--qe", "-0.999"]));
    assert_eq!(doc["results"]["q_gamma"], "0.998001");
}

#[test]
fn propagate_keeps_tiny_violation_exact() {
    let doc = report(&quon(&["bounds", "convert", "--vf", "1.7e-26"]));
    assert_eq!(doc["results"]["q"], "-0.999999999999999999999999966");
}

#[test]
fn identical_invocations_are_byte_identical() {
    let cases: &[&[&str]] = &[
        &["speicher", "--word", "a1 a2 c1 c2", "--q", "0.5", "--N", "30", "--samples", "200", "--seed", "7"],
        &["positivity", "--n", "3"],
        &["bounds", "conservation", "--momenta", "1,2,5,9", "--sweep"],
        &["verify-all"],
    ];
    for args in cases {
        let a = quon(args);
        let b = quon(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn different_seeds_change_monte_carlo_output() {
    let base = ["speicher", "--word", "a1 a2 c1 c2", "--q", "0.5", "--N", "30", "--samples", "200"];
    let a = quon(&[&base[..], &["--seed", "1"]].concat());
    let b = quon(&[&base[..], &["--seed", "2"]].concat());
    assert_ne!(report(&a)["results"]["mean"], report(&b)["results"]["mean"]);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["speicher", "--word", "a1 a2 c1 c2", "--q", "0.3", "--N", "25", "--samples", "300", "--seed", "3"];
    let one = quon(&[&["--threads", "1"][..], &args[..]].concat());
    let four = quon(&[&["--threads", "4"][..], &args[..]].concat());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn malformed_input_is_an_error() {
    let out = quon(&["vev", "--word", "a1 x2"]);
    assert_eq!(out.status.code(), Some(2));
    let doc = report(&out);
    assert_eq!(doc["status"], "error");
    assert!(doc["results"]["error"].as_str().unwrap().contains("x2"));

    let out = quon(&["bounds", "conservation", "--momenta", "1,2,5,5", "--qe", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resource_limits_error_instead_of_running() {
    let out = quon(&["gram", "--n", "6"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["status"], "error");

    let out = quon(&["--limit-dim", "100", "para", "--kind", "bose", "--p", "3", "--modes", "3", "--cap", "3", "--check", "trilinear"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_name_the_flag() {
    let out = quon(&["zagier", "--n", "three"]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--n"));

    let out = quon(&["gram", "--bogus"]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--bogus"));
}

#[test]
fn truncated_commutator_fails_at_depth_zero() {
    let out = quon(&["observables", "--modes", "2", "--cap", "3", "--depth", "0", "--check", "commutator"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["status"], "fail");
}
