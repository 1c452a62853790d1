use jetphs::modelio::{parse_model, run_cli};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("jetphs").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("jetphs-{}-{name}", std::process::id()))
}

#[test]
fn lift_prints_the_lifted_operator() {
    let (code, out, _) = run(&["lift", "elastic_rod"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["schema"], "jetphs.lift/1");
    assert_eq!(v["states"], serde_json::json!(["u", "p", "u_z"]));
    assert_eq!(
        v["J"]["entries"],
        serde_json::json!([["0", "1", "0"], ["-1", "0", "d"], ["0", "d", "0"]])
    );
    assert_eq!(v["density"], "1/2*u^2 + 1/2*p^2 + 1/2*u_z^2");
    assert_eq!(v["closed_form_matches"], true);
}

#[test]
fn lift_out_writes_a_parseable_model() {
    let path = temp_path("ac.phs");
    let (code, _, err) = run(&[
        "lift",
        "allen_cahn",
        "--dissipative",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    let doc = parse_model(&text).unwrap();
    assert_eq!(doc.name, "allen_cahn_lifted");
    assert_eq!(doc.states, ["phi", "phi_z"]);
    assert!(doc.is_dissipative());
}

#[test]
fn dissipative_lift_needs_a_dissipation_section() {
    let (code, out, err) = run(&["lift", "kdv", "--dissipative"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert_eq!(json(&err)["kind"], "usage");
}

#[test]
fn every_suite_passes_on_the_bundled_models() {
    for model in ["kdv", "boussinesq", "elastic_rod", "allen_cahn"] {
        for suite in ["skew", "lift-consistency", "euler", "ports"] {
            let (code, out, err) = run(&["check", model, suite]);
            assert_eq!(code, 0, "{model} {suite}: {out}{err}");
            let v = json(&out);
            assert_eq!(v["passed"], true);
            assert_eq!(v["suite"], suite);
        }
    }
}

#[test]
fn non_skew_operator_is_a_positioned_semantic_error() {
    let path = temp_path("bad.phs");
    std::fs::write(
        &path,
        "phs 1\nsystem bad\n  domain = [0, 1]\n  states = [u]\noperator\n  J = [[d^2]]\nhamiltonian\n  H = u^2\n",
    )
    .unwrap();
    let (code, _, err) = run(&["check", path.to_str().unwrap(), "skew"]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(code, 2);
    let v = json(&err);
    assert_eq!(v["kind"], "semantic");
    assert_eq!(v["error"], "not_skew");
    assert_eq!(
        (v["line"].as_u64(), v["column"].as_u64()),
        (Some(6), Some(7))
    );
}

#[test]
fn syntax_error_reports_line_and_column() {
    let path = temp_path("syntax.phs");
    std::fs::write(&path, "phs 1\nsystem s\n  domain = [0 1]\n").unwrap();
    let (code, out, err) = run(&["report", path.to_str().unwrap()]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(code, 2);
    assert!(out.is_empty());
    let v = json(&err);
    assert_eq!(v["kind"], "syntax");
    assert_eq!(
        (v["line"].as_u64(), v["column"].as_u64()),
        (Some(3), Some(15))
    );
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&[]).0, 2);
    assert_eq!(run(&["check", "kdv", "nonsense"]).0, 2);
    assert_eq!(run(&["lift", "no_such_model"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn ports_report_has_both_frames() {
    let (code, out, _) = run(&["ports", "kdv"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["original"]["Q"], serde_json::json!([["1"]]));
    assert_eq!(
        v["original"]["W_unscaled"],
        serde_json::json!([["1", "-1"], ["1", "1"]])
    );
    assert_eq!(v["lifted"]["dim"], 6);
}

#[test]
fn report_aggregates_all_suites() {
    let (code, out, _) = run(&["report", "boussinesq"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["schema"], "jetphs.report/1");
    assert_eq!(v["checks"].as_array().unwrap().len(), 4);
    assert_eq!(v["passed"], true);
}

#[test]
fn zero_trace_allen_cahn_energy_never_increases() {
    let (code, out, err) = run(&[
        "simulate",
        "allen_cahn",
        "--lifted",
        "--bc",
        "zero-trace",
        "--nx",
        "161",
        "--dt",
        "1e-3",
        "--t-end",
        "0.5",
        "--record-every",
        "10",
    ]);
    assert_eq!(code, 0, "{err}");
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let col = rdr
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == "H")
        .unwrap();
    let hs: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[col].parse().unwrap())
        .collect();
    assert_eq!(hs.len(), 51);
    assert!(hs.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{hs:?}");
    assert!(hs.last().unwrap() < hs.first().unwrap());
}

#[test]
fn periodic_rod_summary_reports_small_drift() {
    let csv = temp_path("rod.csv");
    let (code, out, err) = run(&[
        "simulate",
        "elastic_rod",
        "--nx",
        "101",
        "--dt",
        "1e-3",
        "--t-end",
        "0.2",
        "--out",
        csv.to_str().unwrap(),
    ]);
    std::fs::remove_file(&csv).unwrap();
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    assert_eq!(v["schema"], "jetphs.simulate/1");
    assert_eq!(v["bc"], "periodic");
    assert_eq!(v["steps"], 200);
    assert!(v["relative_energy_drift"].as_f64().unwrap() < 1e-9);
}

#[test]
fn cfl_violation_is_a_numerics_failure() {
    let (code, _, err) = run(&[
        "simulate", "kdv", "--nx", "401", "--dt", "1e-2", "--t-end", "0.1",
    ]);
    assert_eq!(code, 1);
    assert_eq!(json(&err)["kind"], "numerics");
}
