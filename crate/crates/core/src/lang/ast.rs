//! Typed syntax trees for the two-sorted language and their canonical text.

use std::collections::BTreeSet;
use std::fmt;

use crate::scalar::ScalarValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Vector,
    Scalar,
}

impl Sort {
    pub(crate) fn tag(self) -> &'static str {
        match self {
            Sort::Vector => "v",
            Sort::Scalar => "k",
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Vector => "vector",
            Sort::Scalar => "scalar",
        })
    }
}

/// Terms of the vector sort, valued in `Gamma_inf`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VTerm {
    Zero,
    One,
    Inf,
    /// A model element written in the model's own notation, `[...]`.
    Const(String),
    Var(String),
    Neg(Box<VTerm>),
    Add(Box<VTerm>, Box<VTerm>),
    Psi(Box<VTerm>),
    Sc(Box<STerm>, Box<VTerm>),
}

/// Terms of the scalar sort, valued in `k_inf`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum STerm {
    Zero,
    One,
    Inf,
    Const(ScalarValue),
    Var(String),
    Neg(Box<STerm>),
    Add(Box<STerm>, Box<STerm>),
    Mul(Box<STerm>, Box<STerm>),
    Colon(Box<VTerm>, Box<VTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binder {
    pub name: String,
    pub sort: Sort,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    VEq(VTerm, VTerm),
    VLt(VTerm, VTerm),
    P(VTerm),
    SEq(STerm, STerm),
    SLt(STerm, STerm),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(Binder, Box<Formula>),
    Forall(Binder, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ast {
    Formula(Formula),
    Vector(VTerm),
    Scalar(STerm),
}

impl VTerm {
    fn vars(&self, out: &mut BTreeSet<(String, Sort)>) {
        match self {
            VTerm::Var(n) => {
                out.insert((n.clone(), Sort::Vector));
            }
            VTerm::Neg(t) | VTerm::Psi(t) => t.vars(out),
            VTerm::Add(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            VTerm::Sc(s, t) => {
                s.vars(out);
                t.vars(out);
            }
            VTerm::Zero | VTerm::One | VTerm::Inf | VTerm::Const(_) => {}
        }
    }

    pub fn is_closed(&self) -> bool {
        let mut v = BTreeSet::new();
        self.vars(&mut v);
        v.is_empty()
    }

    fn replace(&self, name: &str, by: &VTerm) -> VTerm {
        let r = |t: &VTerm| Box::new(t.replace(name, by));
        match self {
            VTerm::Var(n) if n == name => by.clone(),
            VTerm::Neg(t) => VTerm::Neg(r(t)),
            VTerm::Psi(t) => VTerm::Psi(r(t)),
            VTerm::Add(a, b) => VTerm::Add(r(a), r(b)),
            VTerm::Sc(s, t) => VTerm::Sc(Box::new(s.replace(name, by)), r(t)),
            other => other.clone(),
        }
    }
}

impl STerm {
    fn vars(&self, out: &mut BTreeSet<(String, Sort)>) {
        match self {
            STerm::Var(n) => {
                out.insert((n.clone(), Sort::Scalar));
            }
            STerm::Neg(t) => t.vars(out),
            STerm::Add(a, b) | STerm::Mul(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            STerm::Colon(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            STerm::Zero | STerm::One | STerm::Inf | STerm::Const(_) => {}
        }
    }

    pub fn is_closed(&self) -> bool {
        let mut v = BTreeSet::new();
        self.vars(&mut v);
        v.is_empty()
    }

    fn replace(&self, name: &str, by: &VTerm) -> STerm {
        let r = |t: &STerm| Box::new(t.replace(name, by));
        match self {
            STerm::Neg(t) => STerm::Neg(r(t)),
            STerm::Add(a, b) => STerm::Add(r(a), r(b)),
            STerm::Mul(a, b) => STerm::Mul(r(a), r(b)),
            STerm::Colon(a, b) => STerm::Colon(Box::new(a.replace(name, by)), Box::new(b.replace(name, by))),
            other => other.clone(),
        }
    }
}

impl Formula {
    /// Free variables with their sorts.
    pub fn free_vars(&self) -> BTreeSet<(String, Sort)> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<(String, Sort)>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::VEq(a, b) | Formula::VLt(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Formula::P(t) => t.vars(out),
            Formula::SEq(a, b) | Formula::SLt(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Formula::Not(f) => f.collect_free(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let mut inner = BTreeSet::new();
                f.collect_free(&mut inner);
                inner.remove(&(v.name.clone(), v.sort));
                out.extend(inner);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Exists(..) | Formula::Forall(..) => false,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            _ => true,
        }
    }

    /// Replaces free occurrences of the vector variable `name`.
    pub fn substitute(&self, name: &str, by: &VTerm) -> Formula {
        let s = |f: &Formula| Box::new(f.substitute(name, by));
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::VEq(a, b) => Formula::VEq(a.replace(name, by), b.replace(name, by)),
            Formula::VLt(a, b) => Formula::VLt(a.replace(name, by), b.replace(name, by)),
            Formula::P(t) => Formula::P(t.replace(name, by)),
            Formula::SEq(a, b) => Formula::SEq(a.replace(name, by), b.replace(name, by)),
            Formula::SLt(a, b) => Formula::SLt(a.replace(name, by), b.replace(name, by)),
            Formula::Not(f) => Formula::Not(s(f)),
            Formula::And(a, b) => Formula::And(s(a), s(b)),
            Formula::Or(a, b) => Formula::Or(s(a), s(b)),
            Formula::Exists(v, _) | Formula::Forall(v, _) if v.name == name && v.sort == Sort::Vector => self.clone(),
            Formula::Exists(v, f) => Formula::Exists(v.clone(), s(f)),
            Formula::Forall(v, f) => Formula::Forall(v.clone(), s(f)),
        }
    }

    /// Visits every vector and scalar term that occurs in an atom.
    pub fn terms(&self) -> (Vec<&VTerm>, Vec<&STerm>) {
        let mut vs = Vec::new();
        let mut ss = Vec::new();
        self.collect_terms(&mut vs, &mut ss);
        (vs, ss)
    }

    fn collect_terms<'a>(&'a self, vs: &mut Vec<&'a VTerm>, ss: &mut Vec<&'a STerm>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::VEq(a, b) | Formula::VLt(a, b) => {
                vs.push(a);
                vs.push(b);
            }
            Formula::P(t) => vs.push(t),
            Formula::SEq(a, b) | Formula::SLt(a, b) => {
                ss.push(a);
                ss.push(b);
            }
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.collect_terms(vs, ss),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_terms(vs, ss);
                b.collect_terms(vs, ss);
            }
        }
    }
}

// Printing. Term levels: 1 sum, 2 product, 3 colon, 4 prefix minus, 5 atom.

fn paren(f: &mut fmt::Formatter<'_>, wrap: bool, body: impl FnOnce(&mut fmt::Formatter<'_>) -> fmt::Result) -> fmt::Result {
    if wrap {
        f.write_str("(")?;
    }
    body(f)?;
    if wrap {
        f.write_str(")")?;
    }
    Ok(())
}

fn scalar_literal(v: &ScalarValue) -> String {
    let plain = v.as_rational().is_some_and(|_| v.is_positive()) && !v.is_one();
    if plain {
        v.to_string()
    } else {
        format!("{{{v}}}")
    }
}

impl VTerm {
    fn level(&self) -> u8 {
        match self {
            VTerm::Add(..) => 1,
            VTerm::Neg(_) => 4,
            _ => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        paren(f, self.level() < min, |f| match self {
            VTerm::Zero => f.write_str("0"),
            VTerm::One => f.write_str("1"),
            VTerm::Inf => f.write_str("inf"),
            VTerm::Const(t) => write!(f, "[{t}]"),
            VTerm::Var(n) => f.write_str(n),
            VTerm::Neg(t) => {
                f.write_str("-")?;
                t.write(f, 4)
            }
            VTerm::Add(a, b) => {
                a.write(f, 1)?;
                f.write_str(" + ")?;
                b.write(f, 2)
            }
            VTerm::Psi(t) => {
                f.write_str("psi(")?;
                t.write(f, 0)?;
                f.write_str(")")
            }
            VTerm::Sc(s, t) => {
                f.write_str("sc(")?;
                s.write(f, 0)?;
                f.write_str(", ")?;
                t.write(f, 0)?;
                f.write_str(")")
            }
        })
    }
}

impl STerm {
    fn level(&self) -> u8 {
        match self {
            STerm::Add(..) => 1,
            STerm::Mul(..) => 2,
            STerm::Colon(..) => 3,
            STerm::Neg(_) => 4,
            _ => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        paren(f, self.level() < min, |f| match self {
            STerm::Zero => f.write_str("0"),
            STerm::One => f.write_str("1"),
            STerm::Inf => f.write_str("inf"),
            STerm::Const(v) => f.write_str(&scalar_literal(v)),
            STerm::Var(n) => f.write_str(n),
            STerm::Neg(t) => {
                f.write_str("-")?;
                t.write(f, 4)
            }
            STerm::Add(a, b) => {
                a.write(f, 1)?;
                f.write_str(" + ")?;
                b.write(f, 2)
            }
            STerm::Mul(a, b) => {
                a.write(f, 2)?;
                f.write_str(" * ")?;
                b.write(f, 3)
            }
            STerm::Colon(a, b) => {
                a.write(f, 4)?;
                f.write_str(" : ")?;
                b.write(f, 4)
            }
        })
    }
}

// Formula levels: 0 quantifier, 1 or, 2 and, 3 not, 4 atom.

impl Formula {
    fn level(&self) -> u8 {
        match self {
            Formula::Exists(..) | Formula::Forall(..) => 0,
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            Formula::Not(_) => 3,
            _ => 4,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        paren(f, self.level() < min, |f| match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::VEq(a, b) => write!(f, "{a} = {b}"),
            Formula::VLt(a, b) => write!(f, "{a} < {b}"),
            Formula::SEq(a, b) => write!(f, "{a} = {b}"),
            Formula::SLt(a, b) => write!(f, "{a} < {b}"),
            Formula::P(t) => write!(f, "P({t})"),
            Formula::Not(x) => {
                f.write_str("not ")?;
                x.write(f, 3)
            }
            Formula::And(a, b) => {
                a.write(f, 2)?;
                f.write_str(" and ")?;
                b.write(f, 3)
            }
            Formula::Or(a, b) => {
                a.write(f, 1)?;
                f.write_str(" or ")?;
                b.write(f, 2)
            }
            Formula::Exists(v, x) | Formula::Forall(v, x) => {
                let q = if matches!(self, Formula::Exists(..)) { "exists" } else { "forall" };
                write!(f, "{q} {}:{}. ", v.name, v.sort.tag())?;
                x.write(f, 0)
            }
        })
    }
}

impl fmt::Display for VTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

impl fmt::Display for STerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Formula(x) => x.fmt(f),
            Ast::Vector(x) => x.fmt(f),
            Ast::Scalar(x) => x.fmt(f),
        }
    }
}
