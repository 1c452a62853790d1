//! JSON reports and the check suites behind `check` and `report`.

use clap::ValueEnum;
use num::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use super::{poly_text, ModelDoc};
use crate::field::Profile;
use crate::grid::Grid;
use crate::jetexpr::{check_euler_vs_gateaux, int, rat, DensityProfile, JetPolynomial};
use crate::lift::{
    coefficients_closed_form, composite_operator, g_coefficients_closed_form, infer_lift_spec,
    lift_dissipative, lift_hamiltonian, DissipativeLift, LiftError, LiftSpec, LiftedSystem,
};
use crate::matrix::RatMatrix;
use crate::opalg::{format_dpoly, MatDiffOp, Symmetry};
use crate::ports::{build_port_frame, pairing_residual, telescoping_residual, PortFrame};
use crate::system::PhsSystem;

pub const REPORT_SCHEMA: &str = "jetphs.report/1";

/// Relative tolerance of the Euler-derivative oracle.
pub const EULER_TOLERANCE: f64 = 1e-6;
/// Grid size of the Euler-derivative oracle.
pub const EULER_POINTS: usize = 401;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Skew,
    LiftConsistency,
    Euler,
    Ports,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Skew,
        Suite::LiftConsistency,
        Suite::Euler,
        Suite::Ports,
    ];
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<CheckItem>,
}

fn item(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckItem {
    CheckItem {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn rational_string(r: &BigRational) -> String {
    r.to_string()
}

pub fn operator_json(op: &MatDiffOp) -> Value {
    let entries: Vec<Vec<String>> = op
        .entries()
        .iter()
        .map(|row| row.iter().map(format_dpoly).collect())
        .collect();
    let coefficients: Vec<Vec<Vec<String>>> = op
        .dense_coeffs()
        .iter()
        .map(RatMatrix::to_strings)
        .collect();
    json!({
        "rows": op.rows(),
        "cols": op.cols(),
        "order": op.order(),
        "entries": entries,
        "coefficients": coefficients,
    })
}

fn spec_json(doc: &ModelDoc, spec: &LiftSpec) -> Value {
    let names = doc.lifted_state_names(spec);
    Value::Array(
        spec.entries()
            .iter()
            .zip(names)
            .map(|(v, name)| {
                json!({
                    "name": name,
                    "state": doc.states[v.state() - 1],
                    "index": [v.state(), v.order()],
                })
            })
            .collect(),
    )
}

pub fn model_summary(doc: &ModelDoc, system: &PhsSystem) -> Value {
    let efforts: Vec<String> = system
        .efforts()
        .iter()
        .map(|e| poly_text(&doc.states, e))
        .collect();
    let params: serde_json::Map<String, Value> = doc
        .params
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(rational_string(v))))
        .collect();
    let mut out = json!({
        "name": doc.name,
        "domain": [rational_string(&doc.domain.0), rational_string(&doc.domain.1)],
        "states": doc.states,
        "params": params,
        "J": operator_json(system.operator()),
        "density": poly_text(&doc.states, system.density().density()),
        "variational_derivative": efforts,
    });
    if let Some(d) = system.dissipation() {
        let r: Vec<Vec<String>> =
            d.r.entries()
                .iter()
                .map(|row| row.iter().map(|p| p.to_string()).collect())
                .collect();
        out["dissipation"] = json!({ "G": operator_json(&d.g), "R": r });
    }
    out
}

/// The lift of a model and its lifted document.
pub struct LiftOutcome {
    pub spec: LiftSpec,
    pub lifted: LiftedSystem,
    pub dissipative: Option<DissipativeLift>,
    pub doc: ModelDoc,
}

pub fn lift_model(
    doc: &ModelDoc,
    system: &PhsSystem,
    dissipative: bool,
) -> Result<LiftOutcome, LiftError> {
    let spec = infer_lift_spec(system.density(), system.n());
    let (lifted, dl) = if dissipative {
        let dl = lift_dissipative(system, &spec)?;
        (dl.lifted.clone(), Some(dl))
    } else {
        (lift_hamiltonian(system, &spec)?, None)
    };
    let lifted_doc = doc.lifted(&lifted, dl.as_ref());
    Ok(LiftOutcome {
        spec,
        lifted,
        dissipative: dl,
        doc: lifted_doc,
    })
}

pub fn lift_report(
    doc: &ModelDoc,
    system: &PhsSystem,
    dissipative: bool,
) -> Result<(Value, ModelDoc), LiftError> {
    let out = lift_model(doc, system, dissipative)?;
    let closed = coefficients_closed_form(system, &out.spec)?;
    let mut v = json!({
        "schema": "jetphs.lift/1",
        "model": doc.name,
        "lift": spec_json(doc, &out.spec),
        "states": out.doc.states,
        "J": operator_json(&out.lifted.j_bar),
        "density": poly_text(&out.doc.states, out.lifted.density_bar.density()),
        "D_plus": operator_json(&out.lifted.d_plus),
        "D_minus": operator_json(&out.lifted.d_minus),
        "closed_form_matches": coeffs_equal(&closed, &out.lifted.j_bar.dense_coeffs()),
        "dsl": super::print_model(&out.doc),
    });
    if let Some(dl) = &out.dissipative {
        let r: Vec<Vec<String>> = dl
            .resistance
            .entries()
            .iter()
            .map(|row| row.iter().map(|p| p.to_string()).collect())
            .collect();
        v["G"] = operator_json(&dl.g_bar);
        v["R"] = json!(r);
        v["composite"] = operator_json(&dl.composite);
    }
    Ok((v, out.doc))
}

fn frame_json(frame: &PortFrame) -> Value {
    json!({
        "order": frame.order(),
        "n": frame.n(),
        "dim": frame.dim(),
        "Q": frame.q().to_strings(),
        "W_unscaled": frame.w_unscaled().to_strings(),
        "W_scale": "1/sqrt(2)",
        "W": frame.w(),
    })
}

pub fn ports_report(doc: &ModelDoc, system: &PhsSystem) -> Result<Value, String> {
    let original = build_port_frame(system.operator()).map_err(|e| e.to_string())?;
    let out = lift_model(doc, system, system.dissipation().is_some()).map_err(|e| e.to_string())?;
    let lifted_op = out
        .dissipative
        .as_ref()
        .map_or(&out.lifted.j_bar, |dl| &dl.composite);
    let lifted = build_port_frame(lifted_op).map_err(|e| e.to_string())?;
    Ok(json!({
        "schema": "jetphs.ports/1",
        "model": doc.name,
        "original": frame_json(&original),
        "lifted": frame_json(&lifted),
        "lifted_operator": if out.dissipative.is_some() { "composite" } else { "J" },
    }))
}

/// Pads the shorter list with zero matrices before comparing.
pub(crate) fn coeffs_equal(a: &[RatMatrix], b: &[RatMatrix]) -> bool {
    let shape = a.first().or(b.first()).map(RatMatrix::shape);
    let zero = shape.map(|(r, c)| RatMatrix::zeros(r, c));
    (0..a.len().max(b.len())).all(|k| {
        let x = a.get(k).or(zero.as_ref());
        let y = b.get(k).or(zero.as_ref());
        x == y
    })
}

fn skew_item(name: &str, op: &MatDiffOp) -> CheckItem {
    let coeffwise = op.dense_coeffs().iter().enumerate().all(|(k, a)| {
        let t = a.transpose();
        *a == if k % 2 == 0 { t.neg() } else { t }
    });
    let class = op.classify_symmetry();
    let passed = coeffwise && class == Ok(Symmetry::SkewAdjoint);
    item(
        name,
        passed,
        format!("symmetry {class:?}, J_k = (-1)^(k+1) J_k^T: {coeffwise}"),
    )
}

fn skew_suite(doc: &ModelDoc, system: &PhsSystem) -> Vec<CheckItem> {
    let mut out = vec![skew_item("operator", system.operator())];
    match lift_model(doc, system, system.dissipation().is_some()) {
        Ok(l) => {
            out.push(skew_item("lifted operator", &l.lifted.j_bar));
            if let Some(dl) = &l.dissipative {
                out.push(skew_item("composite operator", &dl.composite));
            }
        }
        Err(e) => out.push(item("lift", false, e.to_string())),
    }
    out
}

fn lift_consistency_suite(doc: &ModelDoc, system: &PhsSystem) -> Vec<CheckItem> {
    let dissipative = system.dissipation().is_some();
    let l = match lift_model(doc, system, dissipative) {
        Ok(l) => l,
        Err(e) => return vec![item("lift", false, e.to_string())],
    };
    let mut out = Vec::new();
    let closed = coefficients_closed_form(system, &l.spec);
    let ok = closed
        .as_ref()
        .is_ok_and(|c| coeffs_equal(c, &l.lifted.j_bar.dense_coeffs()));
    out.push(item(
        "closed-form coefficients equal D+ J D-",
        ok,
        format!("{} lift entries", l.spec.len()),
    ));

    let bar = l.lifted.density_bar.density();
    out.push(item(
        "lifted density is derivative-free",
        l.lifted.density_bar.max_order() == 0,
        poly_text(&l.doc.states, bar),
    ));
    out.push(item(
        "prolonged lifted density equals the original",
        l.spec.prolong(bar) == *system.density().density(),
        String::new(),
    ));

    let lifted_system = match &l.dissipative {
        Some(dl) => dl.to_system(),
        None => l.lifted.to_system(),
    };
    let original_rhs = system.rhs_symbolic();
    let lifted_rhs = lifted_system.rhs_symbolic();
    let mismatched: Vec<String> = l
        .spec
        .entries()
        .iter()
        .zip(&lifted_rhs)
        .zip(&l.doc.states)
        .filter(|((v, r), _)| {
            l.spec.prolong(r) != original_rhs[v.state() - 1].total_derivative_n(v.order())
        })
        .map(|(_, name)| name.clone())
        .collect();
    out.push(item(
        "lifted flow is the prolonged original flow",
        mismatched.is_empty(),
        if mismatched.is_empty() {
            "all lifted states".to_string()
        } else {
            format!("mismatch in {}", mismatched.join(", "))
        },
    ));

    if let Some(dl) = &l.dissipative {
        let g = g_coefficients_closed_form(system, &l.spec);
        let ok = g
            .as_ref()
            .is_ok_and(|c| coeffs_equal(c, &dl.g_bar.dense_coeffs()));
        out.push(item(
            "closed-form G coefficients equal D+ G",
            ok,
            String::new(),
        ));
        out.push(item(
            "composite from coefficients equals block operator",
            composite_operator(dl) == dl.composite,
            String::new(),
        ));
    }
    out
}

fn euler_suite(doc: &ModelDoc, system: &PhsSystem) -> Vec<CheckItem> {
    let (a, b) = doc.domain_f64();
    let n = system.n();
    let grid = match Grid::bounded(a, b, EULER_POINTS) {
        Ok(g) => g,
        Err(e) => return vec![item("grid", false, e.to_string())],
    };
    let len = b - a;
    let k = std::f64::consts::TAU / len;
    let states: Vec<Profile> = (0..n)
        .map(|i| {
            let s = 0.3 + 0.1 * i as f64;
            Profile::sine(s, k, 0.4 + i as f64).plus(Profile::Polynomial(vec![0.2, 0.1 / len]))
        })
        .collect();
    let mut out = Vec::new();
    for i in 0..n {
        let eta: Vec<Profile> = (0..n)
            .map(|j| {
                if j == i {
                    Profile::bump(a + len * (0.45 + 0.05 * i as f64), 0.3 * len, 10, 1.0)
                } else {
                    Profile::Constant(0.0)
                }
            })
            .collect();
        let name = format!("Gateaux oracle for {}", doc.states[i]);
        match check_euler_vs_gateaux(system.density(), &grid, &states, &eta, &[1e-3, 1e-4, 1e-5]) {
            Ok(r) => out.push(item(
                name,
                r.best_relative_error <= EULER_TOLERANCE,
                format!("relative error {:.3e}", r.best_relative_error),
            )),
            Err(e) => out.push(item(name, false, e.to_string())),
        }
    }
    let td = DensityProfile::new(system.density().density().total_derivative());
    let annihilated = (1..=n).all(|i| td.euler_derivative(i).is_zero());
    out.push(item(
        "Euler derivative annihilates D_z(H)",
        annihilated,
        String::new(),
    ));
    out
}

/// Polynomial test efforts `e_i(z)` with distinct coefficients.
fn test_efforts(n: usize, salt: i64) -> Vec<JetPolynomial> {
    (0..n as i64)
        .map(|i| {
            let z = JetPolynomial::z();
            JetPolynomial::constant(rat(i + salt, 3))
                + z.scale(&int(2 - i * salt))
                + z.pow(3).scale(&rat(1 + i, 2 + salt))
                + z.pow(5).scale(&rat(-1, 1 + i))
        })
        .collect()
}

fn ports_items(name: &str, op: &MatDiffOp, domain: &(BigRational, BigRational)) -> Vec<CheckItem> {
    let frame = match build_port_frame(op) {
        Ok(f) => f,
        Err(e) => return vec![item(format!("{name}: port frame"), false, e.to_string())],
    };
    let n = op.rows();
    let (e1, e2) = (test_efforts(n, 1), test_efforts(n, 2));
    let tele = [(&e1, &e1), (&e1, &e2)]
        .iter()
        .all(|(x, y)| telescoping_residual(op, &frame, x, y).is_ok_and(|r| r.is_zero()));
    let pairing = pairing_residual(op, &frame, &e1, &e2, &domain.0, &domain.1);
    vec![
        item(
            format!("{name}: telescoping identity"),
            tele,
            format!("Q is {}x{}", frame.dim(), frame.dim()),
        ),
        item(
            format!("{name}: boundary pairing"),
            pairing.as_ref().is_ok_and(num::Zero::is_zero),
            match pairing {
                Ok(r) => format!("residual {r}"),
                Err(e) => e.to_string(),
            },
        ),
    ]
}

fn ports_suite(doc: &ModelDoc, system: &PhsSystem) -> Vec<CheckItem> {
    let mut out = ports_items("operator", system.operator(), &doc.domain);
    match lift_model(doc, system, system.dissipation().is_some()) {
        Ok(l) => {
            out.extend(ports_items("lifted operator", &l.lifted.j_bar, &doc.domain));
            if let Some(dl) = &l.dissipative {
                out.extend(ports_items(
                    "composite operator",
                    &dl.composite,
                    &doc.domain,
                ));
            }
        }
        Err(e) => out.push(item("lift", false, e.to_string())),
    }
    out
}

pub fn check_suite(doc: &ModelDoc, system: &PhsSystem, suite: Suite) -> CheckReport {
    let checks = match suite {
        Suite::Skew => skew_suite(doc, system),
        Suite::LiftConsistency => lift_consistency_suite(doc, system),
        Suite::Euler => euler_suite(doc, system),
        Suite::Ports => ports_suite(doc, system),
    };
    CheckReport {
        suite,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
