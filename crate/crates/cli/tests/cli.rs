use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use gmt_lab_cli::{run, Analysis, Document, Report, RunOptions};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn gmt_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmt-lab"))
        .args(args)
        .env_remove(gmt_lab_cli::DIM_CAP_VAR)
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gmt-lab-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn report_of(doc: &str, extra: &[&str]) -> (Value, i32) {
    let path = corpus(doc);
    let mut args = vec!["run", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = gmt_lab(&args);
    let code = out.status.code().unwrap();
    let json = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{doc}: {e}\n{}", String::from_utf8_lossy(&out.stderr));
    });
    (json, code)
}

fn verdict<'a>(report: &'a Value, analysis: &str) -> &'a str {
    report["sections"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["analysis"] == analysis)
        .unwrap_or_else(|| panic!("no {analysis} section"))["verdict"]
        .as_str()
        .unwrap()
}

fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("elapsed_us");
            map.values_mut().for_each(strip_timings);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

#[test]
fn every_corpus_document_runs_cleanly() {
    let mut seen = 0;
    for entry in std::fs::read_dir(corpus("")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let name = path.file_name().unwrap().to_str().unwrap().to_string();
            let (report, code) = report_of(&name, &[]);
            assert_eq!(code, 0, "{name}");
            assert_eq!(verdict(&report, "validate"), "lawful", "{name}");
            seen += 1;
        }
    }
    assert!(seen >= 10);
}

#[test]
fn corpus_verdicts() {
    let (r, _) = report_of("classical_s3.json", &[]);
    assert_eq!(verdict(&r, "det-states"), "3 deterministic states");
    let (r, _) = report_of("unknown_functions_s2.json", &[]);
    assert_eq!(verdict(&r, "prob-states"), "infeasible");
    assert!(r["certificate"].is_string());
    let (r, _) = report_of("weird.json", &["--analyses", "binarizable"]);
    assert_eq!(verdict(&r, "binarizable"), "fails");
    let (r, _) = report_of("delta_uniform.json", &["--analyses", "projective"]);
    assert_eq!(verdict(&r, "projective"), "fails");
    let (r, _) = report_of("boolean_w2.json", &["--analyses", "reconstruct"]);
    assert_eq!(verdict(&r, "reconstruct"), "classical");
}

#[test]
fn reports_are_deterministic() {
    for doc in ["unknown_functions_s1.json", "boolean_w2.json", "effect_algebra_chain4.json"] {
        let (mut a, _) = report_of(doc, &[]);
        let (mut b, _) = report_of(doc, &[]);
        strip_timings(&mut a);
        strip_timings(&mut b);
        assert_eq!(a, b, "{doc}");
    }
}

#[test]
fn certificates_round_trip() {
    let cert = scratch("unknown_s1.cert");
    let doc = corpus("unknown_functions_s1.json");
    let out = gmt_lab(&["run", doc.to_str().unwrap(), "--cert-out", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let ok = gmt_lab(&["verify-cert", doc.to_str().unwrap(), cert.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    // The same certificate does not fit another fragment.
    let other = corpus("unknown_functions_s2.json");
    let bad = gmt_lab(&["verify-cert", other.to_str().unwrap(), cert.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn tampered_certificates_are_rejected() {
    let cert = scratch("tampered.cert");
    let doc = corpus("unknown_functions_s1.json");
    gmt_lab(&["run", doc.to_str().unwrap(), "--cert-out", cert.to_str().unwrap()]);
    let text = std::fs::read_to_string(&cert).unwrap();
    // Zero every multiplier: the combination no longer proves anything.
    let zeroed: String = text
        .lines()
        .map(|l| match l.split_once(' ') {
            Some((k, _)) if k.chars().all(|c| c.is_ascii_digit()) => format!("{k} 0\n"),
            _ => format!("{l}\n"),
        })
        .collect();
    assert_ne!(zeroed, text);
    std::fs::write(&cert, zeroed).unwrap();
    let out = gmt_lab(&["verify-cert", doc.to_str().unwrap(), cert.to_str().unwrap()]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn schema_errors_name_the_field() {
    let doc = scratch("bad.json");
    std::fs::write(&doc, "{\n  \"family\": {\"kind\": \"classical\", \"states\": \"two\"}\n}\n").unwrap();
    // Tagged objects are buffered before decoding, so the reported position
    // is the end of the family object.
    let out = gmt_lab(&["run", doc.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("family"), "{err}");
    assert!(err.contains("line "), "{err}");
    assert!(err.contains("\"two\""), "{err}");
}

#[test]
fn bad_payloads_are_schema_errors() {
    let doc = scratch("bad_payload.json");
    std::fs::write(
        &doc,
        r#"{"family": {"kind": "delta"}, "mode": "generated", "bound": 2,
            "generators": [{"arity": 2, "payload": ["1/2", "1/3"]}]}"#,
    )
    .unwrap();
    let out = gmt_lab(&["run", doc.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_analyses_are_schema_errors() {
    let doc = corpus("classical_s1.json");
    let out = gmt_lab(&["run", doc.to_str().unwrap(), "--analyses", "telepathy"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_files_are_other_errors() {
    let out = gmt_lab(&["run", "/nonexistent/doc.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dimension_cap_refuses_without_failing() {
    let doc = corpus("classical_s3.json");
    let out = Command::new(env!("CARGO_BIN_EXE_gmt-lab"))
        .args(["run", doc.to_str().unwrap(), "--analyses", "embed-gpt"])
        .env(gmt_lab_cli::DIM_CAP_VAR, "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let section = r["sections"].as_array().unwrap().iter().find(|s| s["analysis"] == "embed-gpt").unwrap();
    assert_eq!(section["status"], "refused");
}

#[test]
fn text_output_has_one_block_per_analysis() {
    let doc = corpus("boolean_w1.json");
    let out = gmt_lab(&["run", doc.to_str().unwrap(), "--text", "--analyses", "det-states,projective"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("det-states"));
    assert!(text.contains("projective"));
}

#[test]
fn bound_override_changes_the_fragment() {
    let (r, _) = report_of("classical_s1.json", &["--bound", "2", "--analyses", "validate"]);
    assert_eq!(r["bound"], 2);
    assert_eq!(r["carrier_sizes"].as_array().unwrap().len(), 3);
}

#[test]
fn library_run_matches_the_binary() {
    let text = std::fs::read_to_string(corpus("classical_s2.json")).unwrap();
    let doc = Document::parse(&text).unwrap();
    let opts = RunOptions {
        analyses: Some(vec![Analysis::DetStates]),
        bound: None,
        dim_cap: gmtlab::gpt::DEFAULT_DIMENSION_CAP,
    };
    let report: Report = run(&doc, &opts).unwrap();
    assert_eq!(report.exit_code(), 0);
    assert_eq!(report.sections.last().unwrap().verdict, "2 deterministic states");
}

#[test]
fn law_violations_exit_with_three() {
    let text = std::fs::read_to_string(corpus("classical_s1.json")).unwrap();
    let doc = Document::parse(&text).unwrap();
    let opts = RunOptions {
        analyses: Some(vec![Analysis::Validate]),
        bound: None,
        dim_cap: gmtlab::gpt::DEFAULT_DIMENSION_CAP,
    };
    let mut report = run(&doc, &opts).unwrap();
    report.law_violation = true;
    assert_eq!(report.exit_code(), 3);
}

#[test]
fn shipped_schema_covers_the_document_fields() {
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(corpus("../schema/fragment-document.schema.json")).unwrap())
            .unwrap();
    let props = schema["properties"].as_object().unwrap();
    for key in ["name", "family", "bound", "mode", "generators", "analyses", "queries"] {
        assert!(props.contains_key(key), "{key}");
    }
    let listed: Vec<&str> = schema["properties"]["analyses"]["items"]["enum"]
        .as_array()
        .map(|a| a.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    for a in Analysis::ALL {
        assert!(listed.contains(&a.name()), "{}", a.name());
    }
}
