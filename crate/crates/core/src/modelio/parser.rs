//! Lexer and recursive-descent parser for `.phs` documents.

use num::{BigInt, BigRational, ToPrimitive, Zero};

use super::{
    is_reserved, jet_order, DissipationDoc, Expr, ModelDoc, ModelError, SemanticError,
    SemanticKind, Site, KEYWORDS,
};
use crate::jetexpr::JetPolynomial;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::Eof => "end of input".to_string(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, ModelError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, column);
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                chars.next();
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars
                .peek()
                .filter(|c| c.is_ascii_alphanumeric() || **c == '_')
            {
                s.push(c);
                chars.next();
                column += 1;
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek().filter(|c| c.is_ascii_digit()) {
                s.push(c);
                chars.next();
                column += 1;
            }
            Tok::Int(s.parse().expect("digits"))
        } else if "+-*/^()[],=".contains(c) {
            chars.next();
            column += 1;
            Tok::Sym(c)
        } else {
            return Err(ModelError::Syntax {
                line,
                column,
                expected: vec!["a token".into()],
                found: format!("`{c}`"),
            });
        };
        out.push(Token {
            tok,
            line: l0,
            column: c0,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    /// Numbers and previously declared parameters.
    Constant,
    /// Numbers only.
    Literal,
    Operator,
    Density,
    Resistance,
}

#[derive(Clone, Copy, Default)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Default)]
struct Spans {
    domain: Pos,
    states: Vec<Pos>,
    params: Vec<Pos>,
    operator: Pos,
    hamiltonian: Pos,
    g: Pos,
    r: Pos,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    states: Vec<String>,
    params: Vec<(String, BigRational)>,
}

type PResult<T> = Result<T, ModelError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn here(&self) -> Pos {
        let t = self.peek();
        Pos {
            line: t.line,
            column: t.column,
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = self.peek();
        Err(ModelError::Syntax {
            line: t.line,
            column: t.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: describe(&t.tok),
        })
    }

    fn semantic<T>(&self, at: Pos, error: SemanticKind, message: String) -> PResult<T> {
        Err(ModelError::Semantic {
            line: at.line,
            column: at.column,
            error,
            message,
        })
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == k)
    }

    fn expect_sym(&mut self, c: char) -> PResult<()> {
        if self.is_sym(c) {
            self.bump();
            Ok(())
        } else {
            self.syntax(&[&format!("`{c}`")])
        }
    }

    fn expect_keyword(&mut self, k: &str) -> PResult<()> {
        if self.is_keyword(k) {
            self.bump();
            Ok(())
        } else {
            self.syntax(&[&format!("`{k}`")])
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        let at = self.here();
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok((s, at))
            }
            _ => self.syntax(&[what]),
        }
    }

    fn key(&mut self, k: &str) -> PResult<Pos> {
        self.expect_keyword(k)?;
        self.expect_sym('=')?;
        Ok(self.here())
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self, ctx: Ctx) -> PResult<Expr> {
        let mut lhs = self.term(ctx)?;
        loop {
            let add = if self.is_sym('+') {
                true
            } else if self.is_sym('-') {
                false
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = Box::new(self.term(ctx)?);
            lhs = if add {
                Expr::Add(Box::new(lhs), rhs)
            } else {
                Expr::Sub(Box::new(lhs), rhs)
            };
        }
    }

    // term := factor (('*' | '/') factor)*
    fn term(&mut self, ctx: Ctx) -> PResult<Expr> {
        let mut lhs = self.factor(ctx)?;
        loop {
            if self.is_sym('*') {
                self.bump();
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor(ctx)?));
            } else if self.is_sym('/') {
                self.bump();
                let at = self.here();
                let rhs = self.factor(ctx)?;
                self.check_divisor(&rhs, at)?;
                lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn check_divisor(&self, e: &Expr, at: Pos) -> PResult<()> {
        let leaf = |s: &str, order: usize| {
            if order > 0 {
                return None;
            }
            self.params
                .iter()
                .find(|(k, _)| k == s)
                .map(|(_, v)| JetPolynomial::constant(v.clone()))
        };
        match e.to_poly(&leaf).ok().and_then(|p| p.as_constant()) {
            None => self.semantic(
                at,
                SemanticKind::NotConstant,
                "divisor must be a constant".into(),
            ),
            Some(q) if q.is_zero() => {
                self.semantic(at, SemanticKind::DivisionByZero, "division by zero".into())
            }
            Some(_) => Ok(()),
        }
    }

    // factor := '-' factor | power
    fn factor(&mut self, ctx: Ctx) -> PResult<Expr> {
        if self.is_sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor(ctx)?)));
        }
        let base = self.primary(ctx)?;
        if self.is_sym('^') {
            self.bump();
            let at = self.here();
            match &self.peek().tok {
                Tok::Int(n) => {
                    let e = n.to_u32();
                    self.bump();
                    match e {
                        Some(e) => Ok(Expr::Pow(Box::new(base), e)),
                        None => self.semantic(
                            at,
                            SemanticKind::NotConstant,
                            "exponent is too large".into(),
                        ),
                    }
                }
                _ => self.syntax(&["integer exponent"]),
            }
        } else {
            Ok(base)
        }
    }

    // primary := INT | IDENT | dzK '(' IDENT ')' | '(' expr ')'
    fn primary(&mut self, ctx: Ctx) -> PResult<Expr> {
        let at = self.here();
        match self.peek().tok.clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Num(n))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr(ctx)?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(s) => {
                self.bump();
                if let Some(order) = jet_order(&s).filter(|_| self.is_sym('(')) {
                    self.bump();
                    let (name, name_at) = self.ident("state name")?;
                    self.expect_sym(')')?;
                    if ctx != Ctx::Density {
                        return self.semantic(
                            at,
                            SemanticKind::NotConstant,
                            "derivatives of states are not allowed here".into(),
                        );
                    }
                    if !self.states.contains(&name) {
                        return self.semantic(
                            name_at,
                            SemanticKind::UndeclaredName,
                            format!("`{name}` is not a declared state"),
                        );
                    }
                    return Ok(Expr::Jet { name, order });
                }
                self.resolve(&s, at, ctx)?;
                Ok(Expr::Ident(s))
            }
            _ => self.syntax(&["expression"]),
        }
    }

    fn resolve(&self, s: &str, at: Pos, ctx: Ctx) -> PResult<()> {
        let is_param = self.params.iter().any(|(k, _)| k == s);
        let is_state = self.states.iter().any(|k| k == s);
        let ok = match ctx {
            Ctx::Literal => false,
            Ctx::Constant => is_param,
            Ctx::Operator => is_param || s == "d",
            Ctx::Resistance => is_param || s == "z",
            Ctx::Density => is_param || is_state || s == "z",
        };
        if ok {
            Ok(())
        } else if is_param || is_state || s == "z" || s == "d" {
            let what = if is_state {
                format!("state `{s}`")
            } else {
                format!("`{s}`")
            };
            self.semantic(
                at,
                SemanticKind::NotConstant,
                format!("{what} is not allowed here"),
            )
        } else {
            self.semantic(
                at,
                SemanticKind::UndeclaredName,
                format!("`{s}` is not declared"),
            )
        }
    }

    fn constant(&mut self, ctx: Ctx) -> PResult<BigRational> {
        let e = self.expr(ctx)?;
        let leaf = |s: &str, _: usize| {
            self.params
                .iter()
                .find(|(k, _)| k == s)
                .map(|(_, v)| JetPolynomial::constant(v.clone()))
        };
        Ok(e.to_poly(&leaf)
            .ok()
            .and_then(|p| p.as_constant())
            .expect("constant context admits numbers and parameters only"))
    }

    fn matrix(&mut self, ctx: Ctx) -> PResult<Vec<Vec<Expr>>> {
        self.expect_sym('[')?;
        let mut rows = Vec::new();
        loop {
            self.expect_sym('[')?;
            let mut row = vec![self.expr(ctx)?];
            while self.is_sym(',') {
                self.bump();
                row.push(self.expr(ctx)?);
            }
            self.expect_sym(']')?;
            rows.push(row);
            if self.is_sym(',') {
                self.bump();
            } else if self.is_sym(']') {
                self.bump();
                return Ok(rows);
            } else {
                return self.syntax(&["`,`", "`]`"]);
            }
        }
    }

    fn declare(&self, name: &str, at: Pos) -> PResult<()> {
        if is_reserved(name) {
            return self.semantic(
                at,
                SemanticKind::ReservedName,
                format!("`{name}` is reserved"),
            );
        }
        if self.states.iter().any(|s| s == name) || self.params.iter().any(|(k, _)| k == name) {
            return self.semantic(
                at,
                SemanticKind::DuplicateName,
                format!("`{name}` is declared twice"),
            );
        }
        Ok(())
    }

    fn document(&mut self, spans: &mut Spans) -> PResult<ModelDoc> {
        self.expect_keyword("phs")?;
        let at = self.here();
        match &self.peek().tok {
            Tok::Int(v) if *v == BigInt::from(1) => {
                self.bump();
            }
            Tok::Int(v) => {
                return self.semantic(
                    at,
                    SemanticKind::UnsupportedVersion,
                    format!("unsupported format version {v}"),
                )
            }
            _ => return self.syntax(&["format version"]),
        }

        self.expect_keyword("system")?;
        let (name, name_at) = self.ident("model name")?;
        if KEYWORDS.contains(&name.as_str()) {
            return self.semantic(
                name_at,
                SemanticKind::ReservedName,
                format!("`{name}` is reserved"),
            );
        }
        spans.domain = self.key("domain")?;
        self.expect_sym('[')?;
        let a = self.constant(Ctx::Literal)?;
        self.expect_sym(',')?;
        let b = self.constant(Ctx::Literal)?;
        self.expect_sym(']')?;
        self.key("states")?;
        self.expect_sym('[')?;
        loop {
            let (s, at) = self.ident("state name")?;
            self.declare(&s, at)?;
            self.states.push(s);
            spans.states.push(at);
            if self.is_sym(',') {
                self.bump();
            } else {
                break;
            }
        }
        self.expect_sym(']')?;

        if self.is_keyword("params") {
            self.bump();
            while matches!(&self.peek().tok, Tok::Ident(s) if !KEYWORDS.contains(&s.as_str())) {
                let (s, at) = self.ident("parameter name")?;
                self.declare(&s, at)?;
                self.expect_sym('=')?;
                let v = self.constant(Ctx::Constant)?;
                self.params.push((s, v));
                spans.params.push(at);
            }
        }

        if !self.is_keyword("operator") {
            return self.syntax(&["`params`", "`operator`"]);
        }
        self.bump();
        spans.operator = self.key("J")?;
        let operator = self.matrix(Ctx::Operator)?;

        self.expect_keyword("hamiltonian")?;
        spans.hamiltonian = self.key("H")?;
        let hamiltonian = self.expr(Ctx::Density)?;

        let dissipation = if self.is_keyword("dissipation") {
            self.bump();
            spans.g = self.key("G")?;
            let g = self.matrix(Ctx::Operator)?;
            spans.r = self.key("R")?;
            let r = if self.is_sym('[') {
                self.matrix(Ctx::Resistance)?
            } else {
                vec![vec![self.expr(Ctx::Resistance)?]]
            };
            Some(DissipationDoc { g, r })
        } else {
            None
        };
        if self.peek().tok != Tok::Eof {
            let expected: &[&str] = if dissipation.is_some() {
                &["end of input"]
            } else {
                &["`dissipation`", "end of input"]
            };
            return self.syntax(expected);
        }
        Ok(ModelDoc {
            name,
            domain: (a, b),
            states: std::mem::take(&mut self.states),
            params: std::mem::take(&mut self.params),
            operator,
            hamiltonian,
            dissipation,
        })
    }
}

fn locate(e: SemanticError, spans: &Spans) -> ModelError {
    let at = match e.site {
        Site::Domain => spans.domain,
        Site::State(i) => spans.states.get(i).copied().unwrap_or_default(),
        Site::Param(i) => spans.params.get(i).copied().unwrap_or_default(),
        Site::Operator => spans.operator,
        Site::Hamiltonian => spans.hamiltonian,
        Site::G => spans.g,
        Site::R => spans.r,
    };
    ModelError::Semantic {
        line: at.line,
        column: at.column,
        error: e.kind,
        message: e.message,
    }
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<ModelDoc, ModelError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
        states: Vec::new(),
        params: Vec::new(),
    };
    let mut spans = Spans::default();
    let doc = parser.document(&mut spans)?;
    doc.build().map_err(|e| locate(e, &spans))?;
    Ok(doc)
}
