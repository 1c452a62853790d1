//! The `.phs` model language, the bundled model library, JSON reports and
//! the command-line front end.
//!
//! ```text
//! phs 1
//! system elastic_rod
//!   domain = [0, 1]
//!   states = [u, p]
//! params
//!   rhoA = 1
//!   k = 1
//!   T = 1
//! operator
//!   J = [[0, 1], [-1, 0]]
//! hamiltonian
//!   H = 1/2*(p^2/rhoA + k*u^2 + T*dz(u)^2)
//! ```
//!
//! Sections appear in the order `system`, `params`, `operator`,
//! `hamiltonian`, `dissipation`; `params` and `dissipation` are optional.
//! Operator entries are polynomials in `d` (the spatial derivative). The
//! density may use states, `dz(x)`, `dzK(x)`, `z` and parameters. A
//! dissipation section gives `G` (an operator with one row per state) and
//! `R`, either a scalar or a matrix of polynomials in `z`. `#` starts a
//! comment.

mod cli;
mod expr;
mod library;
mod parser;
mod report;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num::{BigRational, Zero};
use serde::Serialize;

use crate::jetexpr::{rational_to_f64, DensityProfile, JetPolynomial, JetVar};
use crate::lift::{DissipativeLift, LiftSpec, LiftedSystem};
use crate::opalg::{DPoly, MatDiffOp};
use crate::system::{Dissipation, PhsSystem, Resistance, SystemError};

pub use cli::run_cli;
pub use expr::{EvalError, Expr};
pub use library::{bundled, bundled_model, BUNDLED};
pub use parser::parse_model;
pub use report::{
    check_suite, lift_model, lift_report, model_summary, operator_json, ports_report, CheckItem,
    CheckReport, LiftOutcome, Suite, EULER_POINTS, EULER_TOLERANCE, REPORT_SCHEMA,
};

/// Samples used for the nonnegativity check of `R` on the domain.
pub const RESISTANCE_SAMPLES: usize = 201;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DissipationDoc {
    pub g: Vec<Vec<Expr>>,
    pub r: Vec<Vec<Expr>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelDoc {
    pub name: String,
    pub domain: (BigRational, BigRational),
    pub states: Vec<String>,
    pub params: Vec<(String, BigRational)>,
    pub operator: Vec<Vec<Expr>>,
    pub hamiltonian: Expr,
    pub dissipation: Option<DissipationDoc>,
}

/// Where in a document a semantic error belongs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Site {
    Domain,
    State(usize),
    Param(usize),
    Operator,
    Hamiltonian,
    G,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SemanticKind {
    UnsupportedVersion,
    ReservedName,
    DuplicateName,
    UndeclaredName,
    NotConstant,
    DivisionByZero,
    EmptyDomain,
    ShapeMismatch,
    NotSkew,
    NegativeResistance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemanticError {
    pub kind: SemanticKind,
    pub site: Site,
    pub message: String,
}

/// A positioned diagnostic. Lines and columns start at 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelError {
    Syntax {
        line: usize,
        column: usize,
        expected: Vec<String>,
        found: String,
    },
    Semantic {
        line: usize,
        column: usize,
        error: SemanticKind,
        message: String,
    },
}

impl ModelError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ModelError::Syntax { line, column, .. } | ModelError::Semantic { line, column, .. } => {
                (*line, *column)
            }
        }
    }
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Syntax {
                line,
                column,
                expected,
                found,
            } => write!(
                f,
                "{line}:{column}: expected {}, found {found}",
                expected.join(" or ")
            ),
            ModelError::Semantic {
                line,
                column,
                message,
                ..
            } => write!(f, "{line}:{column}: {message}"),
        }
    }
}

impl std::error::Error for ModelError {}

pub(crate) const KEYWORDS: [&str; 8] = [
    "phs",
    "system",
    "domain",
    "states",
    "params",
    "operator",
    "hamiltonian",
    "dissipation",
];

/// `dz`, `dz1`, `dz2`, … as a derivative order.
pub(crate) fn jet_order(s: &str) -> Option<usize> {
    let rest = s.strip_prefix("dz")?;
    if rest.is_empty() {
        Some(1)
    } else if rest.bytes().all(|b| b.is_ascii_digit()) && !rest.starts_with('0') {
        rest.parse().ok()
    } else {
        None
    }
}

pub(crate) fn is_reserved(s: &str) -> bool {
    s == "z"
        || s == "d"
        || KEYWORDS.contains(&s)
        || s.starts_with("dz") && s[2..].bytes().all(|b| b.is_ascii_digit())
}

fn semantic(kind: SemanticKind, site: Site, message: impl Into<String>) -> SemanticError {
    SemanticError {
        kind,
        site,
        message: message.into(),
    }
}

fn eval_error(e: EvalError, site: Site) -> SemanticError {
    let kind = match e {
        EvalError::Unknown(_) => SemanticKind::UndeclaredName,
        EvalError::NonConstantDivisor => SemanticKind::NotConstant,
        EvalError::DivisionByZero => SemanticKind::DivisionByZero,
    };
    semantic(kind, site, e.to_string())
}

fn dpoly_of(p: &JetPolynomial) -> DPoly {
    let top = p.terms().map(|(m, _)| m.z_exponent() as usize).max();
    let mut out = vec![BigRational::zero(); top.map_or(0, |t| t + 1)];
    for (m, c) in p.terms() {
        out[m.z_exponent() as usize] = c.clone();
    }
    out
}

impl ModelDoc {
    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn domain_f64(&self) -> (f64, f64) {
        (
            rational_to_f64(&self.domain.0),
            rational_to_f64(&self.domain.1),
        )
    }

    pub fn is_dissipative(&self) -> bool {
        self.dissipation.is_some()
    }

    fn param_map(&self) -> HashMap<&str, &BigRational> {
        self.params.iter().map(|(k, v)| (k.as_str(), v)).collect()
    }

    fn operator_of(&self, rows: &[Vec<Expr>], site: Site) -> Result<MatDiffOp, SemanticError> {
        let params = self.param_map();
        let leaf = |s: &str, order: usize| match (s, order) {
            ("d", 0) => Some(JetPolynomial::z()),
            (s, 0) => params.get(s).map(|v| JetPolynomial::constant((*v).clone())),
            _ => None,
        };
        let entries = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| {
                        e.to_poly(&leaf)
                            .map(|p| dpoly_of(&p))
                            .map_err(|err| eval_error(err, site))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MatDiffOp::from_entries(&entries))
    }

    fn density_of(&self) -> Result<JetPolynomial, SemanticError> {
        let params = self.param_map();
        let leaf = |s: &str, order: usize| {
            if let Some(i) = self.states.iter().position(|x| x == s) {
                return Some(JetPolynomial::u(i + 1, order));
            }
            match (s, order) {
                ("z", 0) => Some(JetPolynomial::z()),
                (s, 0) => params.get(s).map(|v| JetPolynomial::constant((*v).clone())),
                _ => None,
            }
        };
        self.hamiltonian
            .to_poly(&leaf)
            .map_err(|e| eval_error(e, Site::Hamiltonian))
    }

    fn resistance_of(&self, rows: &[Vec<Expr>]) -> Result<Resistance, SemanticError> {
        let params = self.param_map();
        let leaf = |s: &str, order: usize| match (s, order) {
            ("z", 0) => Some(JetPolynomial::z()),
            (s, 0) => params.get(s).map(|v| JetPolynomial::constant((*v).clone())),
            _ => None,
        };
        let entries = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| e.to_poly(&leaf).map_err(|err| eval_error(err, Site::R)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Resistance::new(entries)
            .map_err(|e| semantic(SemanticKind::ShapeMismatch, Site::R, e.to_string()))
    }

    fn check_names(&self) -> Result<(), SemanticError> {
        let mut seen = BTreeSet::new();
        let names = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s, Site::State(i)))
            .chain(
                self.params
                    .iter()
                    .enumerate()
                    .map(|(i, (s, _))| (s, Site::Param(i))),
            );
        for (s, site) in names {
            if is_reserved(s) {
                return Err(semantic(
                    SemanticKind::ReservedName,
                    site,
                    format!("`{s}` is reserved"),
                ));
            }
            if !seen.insert(s.as_str()) {
                return Err(semantic(
                    SemanticKind::DuplicateName,
                    site,
                    format!("`{s}` is declared twice"),
                ));
            }
        }
        Ok(())
    }

    /// Assembles the system and checks every model invariant.
    pub fn build(&self) -> Result<PhsSystem, SemanticError> {
        self.check_names()?;
        if self.domain.0 >= self.domain.1 {
            return Err(semantic(
                SemanticKind::EmptyDomain,
                Site::Domain,
                format!("domain [{}, {}] is empty", self.domain.0, self.domain.1),
            ));
        }
        let n = self.n();
        let shape_ok = self.operator.len() == n && self.operator.iter().all(|r| r.len() == n);
        if !shape_ok {
            let cols = self.operator.iter().map(Vec::len).max().unwrap_or(0);
            return Err(semantic(
                SemanticKind::ShapeMismatch,
                Site::Operator,
                format!(
                    "operator is {}x{} but {n} state{} declared",
                    self.operator.len(),
                    cols,
                    if n == 1 { " is" } else { "s are" }
                ),
            ));
        }
        let j = self.operator_of(&self.operator, Site::Operator)?;
        let density = DensityProfile::new(self.density_of()?);
        let mut system = PhsSystem::new(j, density).map_err(|e| match e {
            SystemError::NotSkew => semantic(
                SemanticKind::NotSkew,
                Site::Operator,
                "operator is not formally skew-adjoint",
            ),
            e => semantic(SemanticKind::ShapeMismatch, Site::Operator, e.to_string()),
        })?;
        if let Some(diss) = &self.dissipation {
            if diss.g.len() != n || diss.g.iter().any(|r| r.len() != diss.g[0].len()) {
                return Err(semantic(
                    SemanticKind::ShapeMismatch,
                    Site::G,
                    format!("G must have {n} rows of equal length"),
                ));
            }
            let g = self.operator_of(&diss.g, Site::G)?;
            let r = self.resistance_of(&diss.r)?;
            if r.dim() != g.cols() {
                return Err(semantic(
                    SemanticKind::ShapeMismatch,
                    Site::R,
                    format!("R must be {0}x{0} to match G", g.cols()),
                ));
            }
            let (a, b) = self.domain_f64();
            r.check_nonnegative(a, b, RESISTANCE_SAMPLES)
                .map_err(|e| semantic(SemanticKind::NegativeResistance, Site::R, e.to_string()))?;
            system = system
                .with_dissipation(Dissipation { g, r })
                .map_err(|e| semantic(SemanticKind::ShapeMismatch, Site::G, e.to_string()))?;
        }
        Ok(system)
    }

    /// Names of the lifted states: `u`, `u_z`, `u_zz`, …
    pub fn lifted_state_names(&self, spec: &LiftSpec) -> Vec<String> {
        spec.entries()
            .iter()
            .map(|v| {
                format!(
                    "{}{}",
                    self.states[v.state() - 1],
                    if v.order() == 0 {
                        String::new()
                    } else {
                        format!("_{}", "z".repeat(v.order()))
                    }
                )
            })
            .collect()
    }

    /// The lifted model as a document; parameters are already substituted.
    pub fn lifted(&self, lifted: &LiftedSystem, dissipative: Option<&DissipativeLift>) -> ModelDoc {
        let names = self.lifted_state_names(&lifted.spec);
        let name_of = |state: usize, order: usize| {
            let base = Expr::Ident(names[state - 1].clone());
            match order {
                0 => base,
                k => Expr::Jet {
                    name: names[state - 1].clone(),
                    order: k,
                },
            }
        };
        let d_name = |_: usize, _: usize| Expr::ident("d");
        let op_rows = |op: &MatDiffOp| -> Vec<Vec<Expr>> {
            op.entries()
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|p| {
                            let poly = p
                                .iter()
                                .enumerate()
                                .fold(JetPolynomial::zero(), |acc, (k, c)| {
                                    acc + JetPolynomial::z().pow(k as u32).scale(c)
                                });
                            Expr::from_poly(&poly, &d_name).replace_z_with("d")
                        })
                        .collect()
                })
                .collect()
        };
        let res_rows = |r: &Resistance| -> Vec<Vec<Expr>> {
            r.entries()
                .iter()
                .map(|row| row.iter().map(|p| Expr::from_poly(p, &d_name)).collect())
                .collect()
        };
        ModelDoc {
            name: format!("{}_lifted", self.name),
            domain: self.domain.clone(),
            states: names.clone(),
            params: Vec::new(),
            operator: op_rows(&lifted.j_bar),
            hamiltonian: Expr::from_poly(lifted.density_bar.density(), &name_of),
            dissipation: dissipative.map(|dl| DissipationDoc {
                g: op_rows(&dl.g_bar),
                r: res_rows(&dl.resistance),
            }),
        }
    }
}

impl Expr {
    fn replace_z_with(self, name: &str) -> Expr {
        let map = |e: Box<Expr>| Box::new(e.replace_z_with(name));
        match self {
            Expr::Ident(s) if s == "z" => Expr::ident(name),
            Expr::Neg(a) => Expr::Neg(map(a)),
            Expr::Pow(a, e) => Expr::Pow(map(a), e),
            Expr::Add(a, b) => Expr::Add(map(a), map(b)),
            Expr::Sub(a, b) => Expr::Sub(map(a), map(b)),
            Expr::Mul(a, b) => Expr::Mul(map(a), map(b)),
            Expr::Div(a, b) => Expr::Div(map(a), map(b)),
            e => e,
        }
    }
}

fn write_rational(r: &BigRational) -> String {
    Expr::rational(r).to_string()
}

fn write_matrix(rows: &[Vec<Expr>]) -> String {
    let inner: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "[{}]",
                r.iter().map(Expr::to_string).collect::<Vec<_>>().join(", ")
            )
        })
        .collect();
    format!("[{}]", inner.join(", "))
}

/// Canonical text of a document; `parse_model(&print_model(doc))` returns `doc`.
pub fn print_model(doc: &ModelDoc) -> String {
    let mut s = String::from("phs 1\n");
    s += &format!("system {}\n", doc.name);
    s += &format!(
        "  domain = [{}, {}]\n",
        write_rational(&doc.domain.0),
        write_rational(&doc.domain.1)
    );
    s += &format!("  states = [{}]\n", doc.states.join(", "));
    if !doc.params.is_empty() {
        s += "params\n";
        for (k, v) in &doc.params {
            s += &format!("  {k} = {}\n", write_rational(v));
        }
    }
    s += &format!("operator\n  J = {}\n", write_matrix(&doc.operator));
    s += &format!("hamiltonian\n  H = {}\n", doc.hamiltonian);
    if let Some(diss) = &doc.dissipation {
        s += &format!("dissipation\n  G = {}\n", write_matrix(&diss.g));
        let r = match diss.r.as_slice() {
            [row] if row.len() == 1 => row[0].to_string(),
            rows => write_matrix(rows),
        };
        s += &format!("  R = {r}\n");
    }
    s
}

/// Jet variable for a named state, used by reports.
pub fn jet_name(states: &[String], v: JetVar) -> String {
    let base = &states[v.state() - 1];
    match v.order() {
        0 => base.clone(),
        1 => format!("dz({base})"),
        k => format!("dz{k}({base})"),
    }
}

/// A polynomial written with the document's state names.
pub fn poly_text(states: &[String], p: &JetPolynomial) -> String {
    Expr::from_poly(p, &|state, order| match order {
        0 => Expr::Ident(states[state - 1].clone()),
        k => Expr::Jet {
            name: states[state - 1].clone(),
            order: k,
        },
    })
    .to_string()
}
