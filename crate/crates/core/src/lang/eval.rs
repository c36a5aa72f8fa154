//! Evaluation over any [`Couple`], with `inf` as the default value of every
//! primitive outside its natural domain.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use super::ast::{Binder, Formula, STerm, Sort, VTerm};
use super::LangError;
use crate::closure::ClosureEngine;
use crate::model::Couple;
use crate::scalar::{ExtScalar, ScalarValue};

/// A value of the vector sort: an element of `Gamma` or `inf`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VVal<E> {
    Fin(E),
    Inf,
}

impl<E> VVal<E> {
    pub fn finite(&self) -> Option<&E> {
        match self {
            VVal::Fin(e) => Some(e),
            VVal::Inf => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Assignment<E> {
    pub vectors: HashMap<String, VVal<E>>,
    pub scalars: HashMap<String, ExtScalar>,
}

impl<E> Default for Assignment<E> {
    fn default() -> Self {
        Assignment { vectors: HashMap::new(), scalars: HashMap::new() }
    }
}

impl<E: Clone> Assignment<E> {
    pub fn with_vector(mut self, name: &str, v: E) -> Self {
        self.vectors.insert(name.into(), VVal::Fin(v));
        self
    }

    pub fn with_scalar(mut self, name: &str, v: ScalarValue) -> Self {
        self.scalars.insert(name.into(), ExtScalar::Finite(v));
        self
    }
}

pub fn eval_vterm<C: Couple>(c: &C, t: &VTerm, asg: &Assignment<C::Elem>) -> Result<VVal<C::Elem>, LangError> {
    Ok(match t {
        VTerm::Zero => VVal::Fin(c.zero()),
        VTerm::One => VVal::Fin(c.unit().ok_or(LangError::NoUnit)?),
        VTerm::Inf => VVal::Inf,
        VTerm::Const(text) => VVal::Fin(c.parse_element(text).map_err(|_| LangError::UnknownConstant(text.clone()))?),
        VTerm::Var(n) => asg.vectors.get(n).cloned().ok_or_else(|| LangError::Unbound(n.clone()))?,
        VTerm::Neg(x) => match eval_vterm(c, x, asg)? {
            VVal::Fin(e) => VVal::Fin(c.neg(&e)),
            VVal::Inf => VVal::Inf,
        },
        VTerm::Add(a, b) => match (eval_vterm(c, a, asg)?, eval_vterm(c, b, asg)?) {
            (VVal::Fin(x), VVal::Fin(y)) => VVal::Fin(c.add(&x, &y)),
            _ => VVal::Inf,
        },
        VTerm::Psi(x) => match eval_vterm(c, x, asg)? {
            VVal::Fin(e) => c.psi(&e).map_or(VVal::Inf, VVal::Fin),
            VVal::Inf => VVal::Inf,
        },
        VTerm::Sc(s, x) => match (eval_sterm(c, s, asg)?, eval_vterm(c, x, asg)?) {
            (ExtScalar::Finite(q), VVal::Fin(e)) => VVal::Fin(c.scale(&q, &e)),
            _ => VVal::Inf,
        },
    })
}

pub fn eval_sterm<C: Couple>(c: &C, t: &STerm, asg: &Assignment<C::Elem>) -> Result<ExtScalar, LangError> {
    Ok(match t {
        STerm::Zero => ExtScalar::Finite(ScalarValue::zero()),
        STerm::One => ExtScalar::Finite(ScalarValue::one()),
        STerm::Inf => ExtScalar::Infinity,
        STerm::Const(v) => ExtScalar::Finite(v.clone()),
        STerm::Var(n) => asg.scalars.get(n).cloned().ok_or_else(|| LangError::Unbound(n.clone()))?,
        STerm::Neg(x) => eval_sterm(c, x, asg)?.neg(),
        STerm::Add(a, b) => eval_sterm(c, a, asg)?.add(&eval_sterm(c, b, asg)?),
        STerm::Mul(a, b) => eval_sterm(c, a, asg)?.mul(&eval_sterm(c, b, asg)?),
        STerm::Colon(a, b) => match (eval_vterm(c, a, asg)?, eval_vterm(c, b, asg)?) {
            (VVal::Fin(x), VVal::Fin(y)) => c.colon(&x, &y).map_or(ExtScalar::Infinity, ExtScalar::Finite),
            _ => ExtScalar::Infinity,
        },
    })
}

fn vlt<C: Couple>(c: &C, a: &VVal<C::Elem>, b: &VVal<C::Elem>) -> bool {
    match (a, b) {
        (VVal::Fin(x), VVal::Fin(y)) => c.cmp(x, y) == Ordering::Less,
        (VVal::Fin(_), VVal::Inf) => true,
        (VVal::Inf, _) => false,
    }
}

fn slt(a: &ExtScalar, b: &ExtScalar) -> bool {
    match (a, b) {
        (ExtScalar::Finite(x), ExtScalar::Finite(y)) => x < y,
        (ExtScalar::Finite(_), ExtScalar::Infinity) => true,
        (ExtScalar::Infinity, _) => false,
    }
}

/// Truth of a quantifier-free formula under an assignment.
pub fn eval_qf<C: Couple>(c: &C, f: &Formula, asg: &Assignment<C::Elem>) -> Result<bool, LangError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::VEq(a, b) => eval_vterm(c, a, asg)? == eval_vterm(c, b, asg)?,
        Formula::VLt(a, b) => vlt(c, &eval_vterm(c, a, asg)?, &eval_vterm(c, b, asg)?),
        Formula::P(t) => eval_vterm(c, t, asg)?.finite().is_some_and(|e| c.in_cut(e)),
        Formula::SEq(a, b) => eval_sterm(c, a, asg)? == eval_sterm(c, b, asg)?,
        Formula::SLt(a, b) => slt(&eval_sterm(c, a, asg)?, &eval_sterm(c, b, asg)?),
        Formula::Not(x) => !eval_qf(c, x, asg)?,
        Formula::And(a, b) => eval_qf(c, a, asg)? && eval_qf(c, b, asg)?,
        Formula::Or(a, b) => eval_qf(c, a, asg)? || eval_qf(c, b, asg)?,
        Formula::Exists(..) | Formula::Forall(..) => return Err(LangError::NotQuantifierFree),
    })
}

/// Exact truth value of a closed quantifier-free sentence.
pub fn decide_qf<C: Couple>(c: &C, f: &Formula) -> Result<bool, LangError> {
    let free = f.free_vars();
    if !free.is_empty() {
        return Err(LangError::NotClosed(free.into_iter().map(|(n, _)| n).collect()));
    }
    eval_qf(c, f, &Assignment::default())
}

/// Kleene truth values for bounded quantifier search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    fn from_bool(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    fn not(self) -> Self {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExistsOutcome<E> {
    Witness(E),
    UnknownWithinBudget,
}

/// Candidate vector and scalar values for bounded search.
#[derive(Debug, Clone)]
pub struct WitnessGrid<E> {
    pub vectors: Vec<E>,
    pub scalars: Vec<ScalarValue>,
}

fn closed_values<C: Couple>(c: &C, f: &Formula) -> (Vec<C::Elem>, Vec<ScalarValue>) {
    let (vs, ss) = f.terms();
    let none = Assignment::default();
    let mut vecs = Vec::new();
    let mut scal = Vec::new();
    fn walk_v<'a>(t: &'a VTerm, out: &mut Vec<&'a VTerm>, sout: &mut Vec<&'a STerm>) {
        out.push(t);
        match t {
            VTerm::Neg(x) | VTerm::Psi(x) => walk_v(x, out, sout),
            VTerm::Add(a, b) => {
                walk_v(a, out, sout);
                walk_v(b, out, sout);
            }
            VTerm::Sc(s, x) => {
                walk_s(s, out, sout);
                walk_v(x, out, sout);
            }
            _ => {}
        }
    }
    fn walk_s<'a>(t: &'a STerm, vout: &mut Vec<&'a VTerm>, out: &mut Vec<&'a STerm>) {
        out.push(t);
        match t {
            STerm::Neg(x) => walk_s(x, vout, out),
            STerm::Add(a, b) | STerm::Mul(a, b) => {
                walk_s(a, vout, out);
                walk_s(b, vout, out);
            }
            STerm::Colon(a, b) => {
                walk_v(a, vout, out);
                walk_v(b, vout, out);
            }
            _ => {}
        }
    }
    let mut all_v = Vec::new();
    let mut all_s = Vec::new();
    for t in vs {
        walk_v(t, &mut all_v, &mut all_s);
    }
    for t in ss {
        walk_s(t, &mut all_v, &mut all_s);
    }
    for t in all_v.into_iter().filter(|t| t.is_closed()) {
        if let Ok(VVal::Fin(e)) = eval_vterm(c, t, &none) {
            vecs.push(e);
        }
    }
    for t in all_s.into_iter().filter(|t| t.is_closed()) {
        if let Ok(ExtScalar::Finite(q)) = eval_sterm(c, t, &none) {
            scal.push(q);
        }
    }
    (vecs, scal)
}

/// Seeds from the formula itself, the unit and `extra`, closed under a few
/// rounds of `psi`, integration, negation, halving, doubling and unit shifts,
/// truncated to `budget` vectors.
pub fn witness_grid<C: Couple>(c: &C, f: &Formula, extra: &[C::Elem], budget: usize) -> WitnessGrid<C::Elem> {
    let (mut seeds, consts) = closed_values(c, f);
    seeds.insert(0, c.zero());
    if let Some(u) = c.unit() {
        seeds.push(u);
    }
    seeds.extend(extra.iter().cloned());
    let mut seen: HashSet<C::Elem> = HashSet::new();
    let mut vectors: Vec<C::Elem> = Vec::new();
    let mut frontier: Vec<C::Elem> = Vec::new();
    for s in seeds {
        if seen.insert(s.clone()) {
            vectors.push(s.clone());
            frontier.push(s);
        }
    }
    let half = ScalarValue::ratio(1, 2);
    let two = ScalarValue::int(2);
    let unit = c.unit();
    while !frontier.is_empty() && vectors.len() < budget {
        let mut next = Vec::new();
        for x in &frontier {
            let mut cands = vec![c.neg(x), c.scale(&two, x), c.scale(&half, x)];
            cands.extend(c.psi(x));
            cands.extend(c.try_integrate(x));
            if let Some(u) = &unit {
                cands.push(c.add(x, u));
                cands.push(c.sub(x, u));
            }
            for y in cands {
                if vectors.len() >= budget {
                    break;
                }
                if seen.insert(y.clone()) {
                    vectors.push(y.clone());
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    let mut scalars: Vec<ScalarValue> =
        [0, 1, -1, 2, -2].into_iter().map(ScalarValue::int).chain([half.clone(), -half]).collect();
    for q in consts {
        if !scalars.contains(&q) {
            scalars.push(q);
        }
    }
    let probe: Vec<&C::Elem> = vectors.iter().take(8).collect();
    for a in &probe {
        for b in &probe {
            if let Some(q) = c.colon(a, b) {
                if !scalars.contains(&q) {
                    scalars.push(q);
                }
            }
        }
    }
    WitnessGrid { vectors, scalars }
}

fn eval_with_grid<C: Couple>(
    c: &C,
    f: &Formula,
    asg: &Assignment<C::Elem>,
    grid: &WitnessGrid<C::Elem>,
) -> Result<Truth, LangError> {
    Ok(match f {
        Formula::Not(x) => eval_with_grid(c, x, asg, grid)?.not(),
        Formula::And(a, b) => match (eval_with_grid(c, a, asg, grid)?, eval_with_grid(c, b, asg, grid)?) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        },
        Formula::Or(a, b) => match (eval_with_grid(c, a, asg, grid)?, eval_with_grid(c, b, asg, grid)?) {
            (Truth::True, _) | (_, Truth::True) => Truth::True,
            (Truth::False, Truth::False) => Truth::False,
            _ => Truth::Unknown,
        },
        Formula::Exists(v, body) => search(c, v, body, asg, grid, Truth::True)?,
        Formula::Forall(v, body) => search(c, v, body, asg, grid, Truth::False)?,
        atom => Truth::from_bool(eval_qf(c, atom, asg)?),
    })
}

/// Looks for an instance of `v` making `body` equal to `decisive`.
fn search<C: Couple>(
    c: &C,
    v: &Binder,
    body: &Formula,
    asg: &Assignment<C::Elem>,
    grid: &WitnessGrid<C::Elem>,
    decisive: Truth,
) -> Result<Truth, LangError> {
    let mut local = asg.clone();
    let hit = |local: &Assignment<C::Elem>| eval_with_grid(c, body, local, grid).map(|t| t == decisive);
    match v.sort {
        Sort::Vector => {
            for e in &grid.vectors {
                local.vectors.insert(v.name.clone(), VVal::Fin(e.clone()));
                if hit(&local)? {
                    return Ok(decisive);
                }
            }
        }
        Sort::Scalar => {
            for q in &grid.scalars {
                local.scalars.insert(v.name.clone(), ExtScalar::Finite(q.clone()));
                if hit(&local)? {
                    return Ok(decisive);
                }
            }
        }
    }
    Ok(Truth::Unknown)
}

/// Three-valued truth of a closed sentence: quantifiers are decided only when
/// the grid holds a witness (for `exists`) or a counterexample (for `forall`).
pub fn eval_bounded<C: Couple>(c: &C, f: &Formula, budget: usize) -> Result<Truth, LangError> {
    let free = f.free_vars();
    if !free.is_empty() {
        return Err(LangError::NotClosed(free.into_iter().map(|(n, _)| n).collect()));
    }
    let grid = witness_grid(c, f, &[], budget);
    eval_with_grid(c, f, &Assignment::default(), &grid)
}

/// A verified witness for `exists y. phi` with `phi` quantifier-free, or
/// `UnknownWithinBudget`. Every witness is substituted back into the
/// sentence, re-parsed from its printed form, and decided again.
pub fn bounded_exists<C: Couple>(
    c: &C,
    f: &Formula,
    budget: usize,
    extra: &[C::Elem],
) -> Result<ExistsOutcome<C::Elem>, LangError> {
    let Formula::Exists(v, body) = f else { return Err(LangError::NotExistential) };
    if v.sort != Sort::Vector || !body.is_quantifier_free() {
        return Err(LangError::NotExistential);
    }
    if !f.is_closed() {
        return Err(LangError::NotClosed(f.free_vars().into_iter().map(|(n, _)| n).collect()));
    }
    let grid = witness_grid(c, f, extra, budget);
    for e in &grid.vectors {
        let asg = Assignment::default().with_vector(&v.name, e.clone());
        if !eval_qf(c, body, &asg)? {
            continue;
        }
        let text = e.to_string();
        let reparsed = c.parse_element(&text).ok();
        let instance = body.substitute(&v.name, &VTerm::Const(text));
        if reparsed.as_ref() == Some(e) && decide_qf(c, &instance)? {
            return Ok(ExistsOutcome::Witness(e.clone()));
        }
    }
    Ok(ExistsOutcome::UnknownWithinBudget)
}

/// [`bounded_exists`] over a closure engine, after first integrating every
/// closed vector value of the sentence, so that the stage grows by at most
/// one class per such value.
pub fn bounded_exists_closure(
    engine: &mut ClosureEngine,
    f: &Formula,
    budget: usize,
) -> Result<ExistsOutcome<crate::foundation::VecElement>, LangError> {
    let (seeds, _) = closed_values(&*engine, f);
    let mut extra = Vec::new();
    for s in seeds {
        if let Ok(a) = engine.integrate(&s) {
            extra.push(a);
        }
    }
    bounded_exists(&*engine, f, budget, &extra)
}

/// The scalar-valued terms `s_1..s_N` if `f` is a boolean combination of
/// ordered-ring relations between them; `None` otherwise.
pub fn scalar_formula_terms(f: &Formula) -> Option<Vec<STerm>> {
    fn atoms(t: &STerm, out: &mut Vec<STerm>) {
        match t {
            STerm::Neg(x) => atoms(x, out),
            STerm::Add(a, b) | STerm::Mul(a, b) => {
                atoms(a, out);
                atoms(b, out);
            }
            STerm::Colon(..) | STerm::Var(_) | STerm::Inf => {
                if !out.contains(t) {
                    out.push(t.clone());
                }
            }
            STerm::Zero | STerm::One | STerm::Const(_) => {}
        }
    }
    fn walk(f: &Formula, out: &mut Vec<STerm>) -> bool {
        match f {
            Formula::True | Formula::False => true,
            Formula::SEq(a, b) | Formula::SLt(a, b) => {
                atoms(a, out);
                atoms(b, out);
                true
            }
            Formula::Not(x) => walk(x, out),
            Formula::And(a, b) | Formula::Or(a, b) => walk(a, out) && walk(b, out),
            _ => false,
        }
    }
    let mut out = Vec::new();
    walk(f, &mut out).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couple::Presentation;
    use crate::lang::parse_formula;
    use crate::tmodel::LogModel;

    fn decide_p1(s: &str) -> bool {
        decide_qf(&Presentation::p1(), &parse_formula(s).unwrap()).unwrap()
    }

    #[test]
    fn quantifier_free_decisions() {
        assert!(decide_p1("P(1)"));
        assert!(!decide_p1("psi(1 + 1) < 1"));
        assert!(decide_p1("0 < 1"));
        assert!(decide_p1("psi(0) = inf and psi(inf) = inf"));
        assert!(decide_p1("[b1] : [2*b1] = 1/2"));
        assert!(decide_p1("[b1] : 0 = inf"));
        assert!(!decide_p1("P(inf)"));
        assert!(decide_p1("0 * inf = inf"));
    }

    #[test]
    fn free_variables_are_rejected() {
        let f = parse_formula("psi(y) = 1").unwrap();
        assert!(matches!(decide_qf(&LogModel, &f), Err(LangError::NotClosed(_))));
        let g = parse_formula("[nonsense] = 0").unwrap();
        assert!(matches!(decide_qf(&LogModel, &g), Err(LangError::UnknownConstant(_))));
    }

    #[test]
    fn bounded_search() {
        let p1 = Presentation::p1();
        let zero = parse_formula("exists y. y = 0").unwrap();
        assert_eq!(bounded_exists(&p1, &zero, 64, &[]).unwrap(), ExistsOutcome::Witness(p1.zero()));
        let two = parse_formula("exists y. psi(y) = 2 * 1").unwrap();
        assert_eq!(bounded_exists(&p1, &two, 64, &[]).unwrap(), ExistsOutcome::UnknownWithinBudget);

        let mut engine = ClosureEngine::new(p1).unwrap();
        let integral = parse_formula("exists y. y + psi(y) = 1").unwrap();
        match bounded_exists_closure(&mut engine, &integral, 64).unwrap() {
            ExistsOutcome::Witness(w) => assert_eq!(w.to_string(), "-b2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kleene_quantifiers() {
        let f = parse_formula("forall y. not y + psi(y) = 0").unwrap();
        assert_eq!(eval_bounded(&LogModel, &f, 32).unwrap(), Truth::False);
        let g = parse_formula("exists c. c * c = 1 + 1").unwrap();
        assert_eq!(eval_bounded(&LogModel, &g, 32).unwrap(), Truth::Unknown);
    }

    #[test]
    fn scalar_formula_shape() {
        let f = parse_formula("(y : z) * (y : z) < 1 + 1").unwrap();
        let terms = scalar_formula_terms(&f).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].to_string(), "y : z");
        assert!(scalar_formula_terms(&parse_formula("psi(y) = z").unwrap()).is_none());
        assert!(scalar_formula_terms(&parse_formula("P(y)").unwrap()).is_none());
    }
}
