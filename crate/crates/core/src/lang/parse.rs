//! Concrete syntax. The surface grammar is sort-agnostic: `0`, `1` and `inf`
//! exist in both sorts and `*` doubles as scalar multiplication, so sorts are
//! inferred per formula and then checked while building the typed tree.

use std::collections::HashMap;

use super::ast::{Ast, Binder, Formula, STerm, Sort, VTerm};
use super::LangError;
use crate::scalar::ScalarValue;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(String),
    VLit(String),
    SLit(String),
    Ident(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 14] = ["<=", ">=", "!=", "(", ")", ",", "+", "-", "*", ":", "=", "<", ">", "."];

fn lex(text: &str) -> Result<Vec<Token>, LangError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, expected: &str| LangError::Syntax { line, col, expected: expected.into() };
    while i < chars.len() {
        let ch = chars[i];
        let (l0, c0) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            for k in 0..n {
                if chars[*i + k] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            *i += n;
        };
        if ch.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if ch == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
            continue;
        }
        let tok = if ch.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j + 1 < chars.len() && chars[j] == '/' && chars[j + 1].is_ascii_digit() {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            let s: String = chars[i..j].iter().collect();
            advance(j - i, &mut i);
            Tok::Num(s)
        } else if ch == '[' || ch == '{' {
            let close = if ch == '[' { ']' } else { '}' };
            let Some(len) = chars[i + 1..].iter().position(|&c| c == close) else {
                return Err(err(l0, c0, &format!("closing `{close}`")));
            };
            let s: String = chars[i + 1..i + 1 + len].iter().collect();
            advance(len + 2, &mut i);
            if ch == '[' {
                Tok::VLit(s.trim().to_string())
            } else {
                Tok::SLit(s.trim().to_string())
            }
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            advance(j - i, &mut i);
            Tok::Ident(s)
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(*s)) else {
                return Err(err(l0, c0, "a token"));
            };
            advance(sym.len(), &mut i);
            Tok::Sym(sym)
        };
        out.push(Token { tok, line: l0, col: c0 });
    }
    Ok(out)
}

const KEYWORDS: [&str; 11] = ["psi", "sc", "P", "inf", "and", "or", "not", "exists", "forall", "true", "false"];

/// Sort-agnostic expressions.
#[derive(Debug, Clone)]
enum Expr {
    Num(ScalarValue),
    VLit(String),
    SLit(ScalarValue),
    Inf,
    Ident(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Colon(Box<Expr>, Box<Expr>),
    Psi(Box<Expr>),
    Sc(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rel {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
}

#[derive(Debug, Clone)]
enum Raw {
    True,
    False,
    Rel(Expr, Rel, Expr),
    P(Expr),
    Not(Box<Raw>),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Quant(bool, String, Option<Sort>, Box<Raw>),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

type PResult<T> = Result<T, LangError>;

impl Parser {
    fn new(text: &str) -> PResult<Self> {
        let toks = lex(text)?;
        let lines: Vec<&str> = text.split('\n').collect();
        let end = (lines.len(), lines.last().map_or(0, |l| l.chars().count()) + 1);
        Ok(Parser { toks, pos: 0, end })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn fail<T>(&self, expected: &str) -> PResult<T> {
        let (line, col) = self.toks.get(self.pos).map_or(self.end, |t| (t.line, t.col));
        Err(LangError::Syntax { line, col, expected: expected.into() })
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(x)) if *x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(x)) if x == k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.fail(&format!("`{s}`"))
        }
    }

    fn formula(&mut self) -> PResult<Raw> {
        if let Some(q) = self.quantifier()? {
            return Ok(q);
        }
        let mut lhs = self.conj()?;
        while self.eat_kw("or") {
            let rhs = self.conj()?;
            lhs = Raw::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn quantifier(&mut self) -> PResult<Option<Raw>> {
        let exists = if self.eat_kw("exists") {
            true
        } else if self.eat_kw("forall") {
            false
        } else {
            return Ok(None);
        };
        let name = self.var_name()?;
        let sort = if self.eat_sym(":") {
            match self.peek() {
                Some(Tok::Ident(s)) if s == "v" => Some(Sort::Vector),
                Some(Tok::Ident(s)) if s == "k" => Some(Sort::Scalar),
                _ => return self.fail("sort `v` or `k`"),
            }
        } else {
            None
        };
        if sort.is_some() {
            self.pos += 1;
        }
        self.expect_sym(".")?;
        let body = self.formula()?;
        Ok(Some(Raw::Quant(exists, name, sort, Box::new(body))))
    }

    fn var_name(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.fail("a variable name"),
        }
    }

    fn conj(&mut self) -> PResult<Raw> {
        let mut lhs = self.unary()?;
        while self.eat_kw("and") {
            let rhs = self.unary()?;
            lhs = Raw::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Raw> {
        if self.eat_kw("not") {
            return Ok(Raw::Not(Box::new(self.unary()?)));
        }
        if let Some(q) = self.quantifier()? {
            return Ok(q);
        }
        if self.eat_kw("true") {
            return Ok(Raw::True);
        }
        if self.eat_kw("false") {
            return Ok(Raw::False);
        }
        if matches!(self.peek(), Some(Tok::Sym("("))) {
            let save = self.pos;
            self.pos += 1;
            if let Ok(inner) = self.formula() {
                if self.eat_sym(")") && !self.continues_term() {
                    return Ok(inner);
                }
            }
            self.pos = save;
        }
        self.atom()
    }

    fn continues_term(&self) -> bool {
        matches!(self.peek(), Some(Tok::Sym(s)) if ["+", "-", "*", ":", "=", "<", ">", "<=", ">=", "!="].contains(s))
    }

    fn atom(&mut self) -> PResult<Raw> {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == "P") {
            self.pos += 1;
            self.expect_sym("(")?;
            let e = self.expr()?;
            self.expect_sym(")")?;
            return Ok(Raw::P(e));
        }
        let lhs = self.expr()?;
        let rel = match self.peek() {
            Some(Tok::Sym("=")) => Rel::Eq,
            Some(Tok::Sym("<")) => Rel::Lt,
            Some(Tok::Sym("<=")) => Rel::Le,
            Some(Tok::Sym(">")) => Rel::Gt,
            Some(Tok::Sym(">=")) => Rel::Ge,
            Some(Tok::Sym("!=")) => Rel::Ne,
            _ => return self.fail("a relation `=`, `<`, `<=`, `>`, `>=` or `!=`"),
        };
        self.pos += 1;
        let rhs = self.expr()?;
        Ok(Raw::Rel(lhs, rel, rhs))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.product()?;
        loop {
            if self.eat_sym("+") {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat_sym("-") {
                lhs = Expr::Add(Box::new(lhs), Box::new(Expr::Neg(Box::new(self.product()?))));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> PResult<Expr> {
        let mut lhs = self.colon()?;
        while self.eat_sym("*") {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.colon()?));
        }
        Ok(lhs)
    }

    fn colon(&mut self) -> PResult<Expr> {
        let lhs = self.prefix()?;
        if self.eat_sym(":") {
            return Ok(Expr::Colon(Box::new(lhs), Box::new(self.prefix()?)));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.prefix()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let Some(tok) = self.peek().cloned() else { return self.fail("a term") };
        match tok {
            Tok::Num(s) => {
                let v: ScalarValue = match s.parse() {
                    Ok(v) => v,
                    Err(_) => return self.fail("a numeral"),
                };
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::VLit(s) => {
                self.pos += 1;
                Ok(Expr::VLit(s))
            }
            Tok::SLit(s) => match s.parse() {
                Ok(v) => {
                    self.pos += 1;
                    Ok(Expr::SLit(v))
                }
                Err(_) => self.fail("a scalar literal"),
            },
            Tok::Sym("(") => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) if s == "inf" => {
                self.pos += 1;
                Ok(Expr::Inf)
            }
            Tok::Ident(s) if s == "psi" => {
                self.pos += 1;
                self.expect_sym("(")?;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(Expr::Psi(Box::new(e)))
            }
            Tok::Ident(s) if s == "sc" => {
                self.pos += 1;
                self.expect_sym("(")?;
                let a = self.expr()?;
                self.expect_sym(",")?;
                let b = self.expr()?;
                self.expect_sym(")")?;
                Ok(Expr::Sc(Box::new(a), Box::new(b)))
            }
            Tok::Ident(_) => Ok(Expr::Ident(self.var_name()?)),
            Tok::Sym(_) => self.fail("a term"),
        }
    }

    fn finish(&self) -> PResult<()> {
        if self.pos < self.toks.len() {
            return self.fail("end of input");
        }
        Ok(())
    }
}

// Sort inference.

fn has_mul(e: &Expr) -> bool {
    match e {
        Expr::Mul(..) => true,
        Expr::Neg(x) => has_mul(x),
        Expr::Add(a, b) => has_mul(a) || has_mul(b),
        _ => false,
    }
}

struct Infer {
    env: HashMap<String, Sort>,
    changed: bool,
    /// Once set, an unconstrained right factor of `*` is read as a scalar.
    mul_default: bool,
}

impl Infer {
    fn set(&mut self, name: &str, s: Sort) -> PResult<()> {
        match self.env.get(name) {
            Some(&old) if old != s => Err(LangError::Sort { term: name.into(), expected: s, found: old }),
            Some(_) => Ok(()),
            None => {
                self.env.insert(name.into(), s);
                self.changed = true;
                Ok(())
            }
        }
    }

    fn synth(&self, e: &Expr) -> Option<Sort> {
        match e {
            Expr::Num(v) => (!v.is_zero() && !v.is_one()).then_some(Sort::Scalar),
            Expr::Inf => None,
            Expr::VLit(_) | Expr::Psi(_) | Expr::Sc(..) => Some(Sort::Vector),
            Expr::SLit(_) | Expr::Colon(..) => Some(Sort::Scalar),
            Expr::Ident(n) => self.env.get(n).copied(),
            Expr::Neg(x) => self.synth(x),
            Expr::Add(a, b) => self.synth(a).or_else(|| self.synth(b)),
            Expr::Mul(_, b) => match self.synth(b) {
                Some(Sort::Vector) => Some(Sort::Vector),
                Some(Sort::Scalar) => Some(Sort::Scalar),
                None => None,
            },
        }
    }

    fn constrain(&mut self, e: &Expr, want: Option<Sort>) -> PResult<()> {
        match e {
            Expr::Ident(n) => {
                if let Some(s) = want {
                    self.set(n, s)?;
                }
                Ok(())
            }
            Expr::Neg(x) => self.constrain(x, want),
            Expr::Add(a, b) => {
                let w = want.or_else(|| self.synth(a)).or_else(|| self.synth(b));
                self.constrain(a, w)?;
                self.constrain(b, w)
            }
            Expr::Mul(a, b) => {
                self.constrain(a, Some(Sort::Scalar))?;
                let mut w = want.or_else(|| self.synth(b));
                if w.is_none() && self.mul_default {
                    w = Some(Sort::Scalar);
                }
                self.constrain(b, w)
            }
            Expr::Colon(a, b) | Expr::Sc(a, b) => {
                let first = if matches!(e, Expr::Sc(..)) { Sort::Scalar } else { Sort::Vector };
                self.constrain(a, Some(first))?;
                self.constrain(b, Some(Sort::Vector))
            }
            Expr::Psi(x) => self.constrain(x, Some(Sort::Vector)),
            Expr::Num(_) | Expr::VLit(_) | Expr::SLit(_) | Expr::Inf => Ok(()),
        }
    }

    fn pass(&mut self, f: &Raw) -> PResult<()> {
        match f {
            Raw::True | Raw::False => Ok(()),
            Raw::Rel(a, _, b) => {
                let w = self.synth(a).or_else(|| self.synth(b));
                self.constrain(a, w)?;
                self.constrain(b, w)
            }
            Raw::P(e) => self.constrain(e, Some(Sort::Vector)),
            Raw::Not(x) => self.pass(x),
            Raw::And(a, b) | Raw::Or(a, b) => {
                self.pass(a)?;
                self.pass(b)
            }
            Raw::Quant(_, n, s, body) => {
                if let Some(s) = s {
                    self.set(n, *s)?;
                }
                self.pass(body)
            }
        }
    }

    fn names(f: &Raw, out: &mut Vec<String>) {
        fn expr_names(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Ident(n) => out.push(n.clone()),
                Expr::Neg(x) | Expr::Psi(x) => expr_names(x, out),
                Expr::Add(a, b) | Expr::Mul(a, b) | Expr::Colon(a, b) | Expr::Sc(a, b) => {
                    expr_names(a, out);
                    expr_names(b, out);
                }
                _ => {}
            }
        }
        match f {
            Raw::Rel(a, _, b) => {
                expr_names(a, out);
                expr_names(b, out);
            }
            Raw::P(e) => expr_names(e, out),
            Raw::Not(x) => Infer::names(x, out),
            Raw::And(a, b) | Raw::Or(a, b) => {
                Infer::names(a, out);
                Infer::names(b, out);
            }
            Raw::Quant(_, n, _, body) => {
                out.push(n.clone());
                Infer::names(body, out);
            }
            Raw::True | Raw::False => {}
        }
    }

    fn fixpoint(&mut self, f: &Raw) -> PResult<()> {
        loop {
            self.changed = false;
            self.pass(f)?;
            if !self.changed {
                return Ok(());
            }
        }
    }

    /// Runs the constraint passes to a fixpoint, then reads unconstrained
    /// right factors of `*` as scalars, then makes the remaining variables
    /// vectors one at a time.
    fn solve(&mut self, f: &Raw) -> PResult<()> {
        let mut names = Vec::new();
        Infer::names(f, &mut names);
        self.fixpoint(f)?;
        self.mul_default = true;
        loop {
            self.fixpoint(f)?;
            let Some(free) = names.iter().find(|n| !self.env.contains_key(*n)) else { return Ok(()) };
            let free = free.clone();
            self.set(&free, default_sort(&free))?;
        }
    }

    fn sort_err<T>(e: &Expr, expected: Sort, found: Sort) -> PResult<T> {
        Err(LangError::Sort { term: format!("{e:?}"), expected, found })
    }

    fn vterm(&self, e: &Expr) -> PResult<VTerm> {
        let b = |x: &Expr| self.vterm(x).map(Box::new);
        Ok(match e {
            Expr::Num(v) if v.is_zero() => VTerm::Zero,
            Expr::Num(v) if v.is_one() => VTerm::One,
            Expr::Num(_) | Expr::SLit(_) | Expr::Colon(..) => return Infer::sort_err(e, Sort::Vector, Sort::Scalar),
            Expr::Inf => VTerm::Inf,
            Expr::VLit(s) => VTerm::Const(s.clone()),
            Expr::Ident(n) => match self.env.get(n) {
                Some(Sort::Scalar) => return Infer::sort_err(e, Sort::Vector, Sort::Scalar),
                _ => VTerm::Var(n.clone()),
            },
            Expr::Neg(x) => VTerm::Neg(b(x)?),
            Expr::Add(x, y) => VTerm::Add(b(x)?, b(y)?),
            Expr::Psi(x) => VTerm::Psi(b(x)?),
            Expr::Sc(s, t) | Expr::Mul(s, t) => VTerm::Sc(Box::new(self.sterm(s)?), b(t)?),
        })
    }

    fn sterm(&self, e: &Expr) -> PResult<STerm> {
        let b = |x: &Expr| self.sterm(x).map(Box::new);
        Ok(match e {
            Expr::Num(v) if v.is_zero() => STerm::Zero,
            Expr::Num(v) if v.is_one() => STerm::One,
            Expr::Num(v) | Expr::SLit(v) => STerm::Const(v.clone()),
            Expr::Inf => STerm::Inf,
            Expr::VLit(_) | Expr::Psi(_) | Expr::Sc(..) => return Infer::sort_err(e, Sort::Scalar, Sort::Vector),
            Expr::Ident(n) => match self.env.get(n) {
                Some(Sort::Scalar) => STerm::Var(n.clone()),
                _ => return Infer::sort_err(e, Sort::Scalar, Sort::Vector),
            },
            Expr::Neg(x) => STerm::Neg(b(x)?),
            Expr::Add(x, y) => STerm::Add(b(x)?, b(y)?),
            Expr::Mul(x, y) => {
                if self.synth(y) == Some(Sort::Vector) {
                    return Infer::sort_err(e, Sort::Scalar, Sort::Vector);
                }
                STerm::Mul(b(x)?, b(y)?)
            }
            Expr::Colon(x, y) => STerm::Colon(Box::new(self.vterm(x)?), Box::new(self.vterm(y)?)),
        })
    }

    fn formula(&self, f: &Raw) -> PResult<Formula> {
        let b = |x: &Raw| self.formula(x).map(Box::new);
        Ok(match f {
            Raw::True => Formula::True,
            Raw::False => Formula::False,
            Raw::P(e) => Formula::P(self.vterm(e)?),
            Raw::Rel(x, rel, y) => {
                let fallback = if has_mul(x) || has_mul(y) { Sort::Scalar } else { Sort::Vector };
                let sort = self.synth(x).or_else(|| self.synth(y)).unwrap_or(fallback);
                let (lt, eq): (RelBuilder<'_, bool>, RelBuilder<'_, ()>) = match sort {
                    Sort::Vector => (
                        Box::new(|flip| {
                            let (a, c) = if flip { (y, x) } else { (x, y) };
                            Ok(Formula::VLt(self.vterm(a)?, self.vterm(c)?))
                        }),
                        Box::new(|()| Ok(Formula::VEq(self.vterm(x)?, self.vterm(y)?))),
                    ),
                    Sort::Scalar => (
                        Box::new(|flip| {
                            let (a, c) = if flip { (y, x) } else { (x, y) };
                            Ok(Formula::SLt(self.sterm(a)?, self.sterm(c)?))
                        }),
                        Box::new(|()| Ok(Formula::SEq(self.sterm(x)?, self.sterm(y)?))),
                    ),
                };
                let not = |g: Formula| Formula::Not(Box::new(g));
                match rel {
                    Rel::Eq => eq(())?,
                    Rel::Lt => lt(false)?,
                    Rel::Gt => lt(true)?,
                    Rel::Le => not(lt(true)?),
                    Rel::Ge => not(lt(false)?),
                    Rel::Ne => not(eq(())?),
                }
            }
            Raw::Not(x) => Formula::Not(b(x)?),
            Raw::And(x, y) => Formula::And(b(x)?, b(y)?),
            Raw::Or(x, y) => Formula::Or(b(x)?, b(y)?),
            Raw::Quant(exists, n, _, body) => {
                let binder = Binder { name: n.clone(), sort: self.env.get(n).copied().unwrap_or_else(|| default_sort(n)) };
                if *exists {
                    Formula::Exists(binder, b(body)?)
                } else {
                    Formula::Forall(binder, b(body)?)
                }
            }
        })
    }
}

/// Sort of a variable that no constraint pins down: names starting with
/// `c`, `d` or `k` are scalars, everything else is a vector.
pub fn default_sort(name: &str) -> Sort {
    match name.chars().next() {
        Some('c' | 'd' | 'k') => Sort::Scalar,
        _ => Sort::Vector,
    }
}

/// Parses a formula; unconstrained variables get their [`default_sort`].
pub fn parse_formula(text: &str) -> Result<Formula, LangError> {
    let mut p = Parser::new(text)?;
    let raw = p.formula()?;
    p.finish()?;
    let mut inf = Infer { env: HashMap::new(), changed: false, mul_default: false };
    inf.solve(&raw)?;
    inf.formula(&raw)
}

/// Parses a term of the given sort.
pub fn parse_term(text: &str, sort: Sort) -> Result<Ast, LangError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.finish()?;
    let mut inf = Infer { env: HashMap::new(), changed: false, mul_default: false };
    let mut names = Vec::new();
    Infer::names(&Raw::P(e.clone()), &mut names);
    loop {
        inf.changed = false;
        inf.constrain(&e, Some(sort))?;
        if !inf.changed {
            break;
        }
    }
    for n in names {
        if !inf.env.contains_key(&n) {
            let d = default_sort(&n);
            inf.set(&n, d)?;
            inf.constrain(&e, Some(sort))?;
        }
    }
    match sort {
        Sort::Vector => inf.vterm(&e).map(Ast::Vector),
        Sort::Scalar => inf.sterm(&e).map(Ast::Scalar),
    }
}

/// A formula if the text reads as one, otherwise a term of whichever sort
/// it infers to.
/// Builds the `<` (optionally flipped) or `=` atom for one sort.
type RelBuilder<'a, A> = Box<dyn Fn(A) -> PResult<Formula> + 'a>;

pub fn parse(text: &str) -> Result<Ast, LangError> {
    match parse_formula(text) {
        Ok(f) => Ok(Ast::Formula(f)),
        Err(formula_err) => {
            let mut p = Parser::new(text)?;
            let Ok(e) = p.expr() else { return Err(formula_err) };
            if p.finish().is_err() {
                return Err(formula_err);
            }
            let inf = Infer { env: HashMap::new(), changed: false, mul_default: false };
            let sort = inf.synth(&e).unwrap_or(Sort::Vector);
            parse_term(text, sort)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Box<VTerm> {
        Box::new(VTerm::Var(n.into()))
    }

    #[test]
    fn basic_shapes() {
        assert_eq!(parse_formula("psi(y) = 1").unwrap(), Formula::VEq(VTerm::Psi(v("y")), VTerm::One));
        let f = parse_formula("P(sc(c, y) + -z)").unwrap();
        let sc = VTerm::Sc(Box::new(STerm::Var("c".into())), v("y"));
        assert_eq!(f, Formula::P(VTerm::Add(Box::new(sc), Box::new(VTerm::Neg(v("z"))))));
        let f = parse_formula("y : z < 1/2").unwrap();
        let half = STerm::Const(ScalarValue::ratio(1, 2));
        assert_eq!(f, Formula::SLt(STerm::Colon(v("y"), v("z")), half));
    }

    #[test]
    fn sort_inference_through_products() {
        let f = parse_formula("(y : z) * (y : z) < 1 + 1").unwrap();
        assert!(matches!(f, Formula::SLt(STerm::Mul(..), STerm::Add(..))));
        let f = parse_formula("2 * y = psi(z)").unwrap();
        assert!(matches!(f, Formula::VEq(VTerm::Sc(..), VTerm::Psi(_))));
        assert!(matches!(parse_formula("c * inf < 0").unwrap(), Formula::SLt(STerm::Mul(..), _)));
        assert!(matches!(parse_formula("2 * y = z").unwrap(), Formula::SEq(..)));
        let f = parse_formula("exists c. c * c = 1 + 1").unwrap();
        assert!(matches!(f, Formula::Exists(Binder { sort: Sort::Scalar, .. }, _)));
        assert!(matches!(parse_formula("psi(c) = 1 and c * c = 1/2"), Err(LangError::Sort { .. })));
    }

    #[test]
    fn sugar_and_parentheses() {
        let f = parse_formula("(y < z) and not (x <= y)").unwrap();
        assert_eq!(f.to_string(), "y < z and not not y < x");
        let g = parse_formula("(y + z) < z").unwrap();
        assert!(matches!(g, Formula::VLt(VTerm::Add(..), _)));
        assert_eq!(parse_formula("a - b = 0").unwrap().to_string(), "a + -b = 0");
    }

    #[test]
    fn errors_carry_positions() {
        match parse_formula("psi(y) =\n  )") {
            Err(LangError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("P(y").is_err());
        assert!(parse_formula("y ? z").is_err());
    }

    #[test]
    fn terms_and_formulas() {
        assert!(matches!(parse("psi(1 + 1)").unwrap(), Ast::Vector(_)));
        assert!(matches!(parse("y : z").unwrap(), Ast::Scalar(_)));
        assert!(matches!(parse("P(0)").unwrap(), Ast::Formula(_)));
    }
}
