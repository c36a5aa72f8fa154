//! Sub-couples `Gamma` of an ambient couple, best approximation from `Gamma`,
//! and linear rank.

use std::cmp::Ordering;

use super::AnalysisError;
use crate::model::Couple;
use crate::scalar::ScalarValue;
use crate::tmodel::{
    sigma, GapLogElement, GapLogModel, GapRemovedElement, GapRemovedModel, LogElement, Monomial, TransModel,
};

/// Outcome of reducing `x` against `Gamma`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reduction<E> {
    /// `x` lies in `Gamma`.
    InBase(E),
    /// `x = alpha + rest` with `alpha` in `Gamma` and `[rest]` outside `[Gamma]`;
    /// `alpha` is then a best approximation of `x` from `Gamma`.
    Remainder { alpha: E, rest: E },
    /// Every `x - alpha` with `alpha` in `Gamma` has its class in `[Gamma]`.
    Unbounded,
}

/// A ψ-closed subgroup `Gamma` of the ambient couple `C`.
pub trait Base<C: Couple> {
    fn reduce(&self, c: &C, x: &C::Elem) -> Reduction<C::Elem>;
    /// Membership in `Gamma^dagger = psi(Gamma \ 0)`.
    fn in_daggers(&self, c: &C, x: &C::Elem) -> bool;
    /// `Psi < x < (Gamma^>)'`, with `Psi` the ψ-set of `Gamma`.
    fn in_gap(&self, c: &C, x: &C::Elem) -> bool;
    /// `0 < |x| < Gamma^>`.
    fn below_all(&self, c: &C, x: &C::Elem) -> bool;
    /// A few elements of `Gamma`, for sampled checks.
    fn samples(&self, c: &C) -> Vec<C::Elem>;
    fn describe(&self, c: &C) -> String;

    fn contains(&self, c: &C, x: &C::Elem) -> bool {
        matches!(self.reduce(c, x), Reduction::InBase(_))
    }
}

/// The span of finitely many elements, kept as an echelon basis with pairwise
/// distinct classes, largest class first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span<E> {
    echelon: Vec<E>,
}

impl<E: Clone> Span<E> {
    pub fn new<C: Couple<Elem = E>>(c: &C, gens: &[E]) -> Self {
        let mut span = Span { echelon: Vec::new() };
        for g in gens {
            span.push(c, g);
        }
        span
    }

    /// The span of `gens` closed under ψ, giving up after `cap` basis vectors.
    pub fn psi_closed<C: Couple<Elem = E>>(c: &C, gens: &[E], cap: usize) -> Result<Self, AnalysisError> {
        let mut span = Span::new(c, gens);
        let mut i = 0;
        while i < span.echelon.len() {
            if span.echelon.len() > cap {
                return Err(AnalysisError::InvalidSubcouple(format!(
                    "psi-closure needs more than {cap} generators"
                )));
            }
            let p = c.psi(&span.echelon[i]).expect("echelon vectors are nonzero");
            span.push(c, &p);
            i += 1;
        }
        Ok(span)
    }

    /// Adds `g` to the span; returns whether the rank grew.
    pub fn push<C: Couple<Elem = E>>(&mut self, c: &C, g: &E) -> bool {
        let (_, rest) = self.greedy(c, g);
        if c.is_zero(&rest) {
            return false;
        }
        let at = self.echelon.iter().position(|e| c.class_cmp(e, &rest) == Ordering::Less);
        match at {
            Some(i) => self.echelon.insert(i, rest),
            None => self.echelon.push(rest),
        }
        true
    }

    pub fn basis(&self) -> &[E] {
        &self.echelon
    }

    pub fn rank(&self) -> usize {
        self.echelon.len()
    }

    /// Class-by-class elimination: returns `(alpha, x - alpha)`.
    pub fn greedy<C: Couple<Elem = E>>(&self, c: &C, x: &E) -> (E, E) {
        let mut alpha = c.zero();
        let mut rest = x.clone();
        while let Some(e) = self.echelon.iter().find(|e| !c.is_zero(&rest) && c.class_cmp(e, &rest) == Ordering::Equal) {
            let q = c.colon(&rest, e).expect("equal classes have a finite quotient");
            let step = c.scale(&q, e);
            rest = c.sub(&rest, &step);
            alpha = c.add(&alpha, &step);
        }
        (alpha, rest)
    }

    fn psi_values<C: Couple<Elem = E>>(&self, c: &C) -> Vec<E> {
        self.echelon.iter().filter_map(|e| c.psi(e)).collect()
    }
}

impl<C: Couple> Base<C> for Span<C::Elem> {
    fn reduce(&self, c: &C, x: &C::Elem) -> Reduction<C::Elem> {
        let (alpha, rest) = self.greedy(c, x);
        if c.is_zero(&rest) {
            Reduction::InBase(alpha)
        } else {
            Reduction::Remainder { alpha, rest }
        }
    }

    fn in_daggers(&self, c: &C, x: &C::Elem) -> bool {
        self.psi_values(c).contains(x)
    }

    /// Positive elements of the class of a basis vector `e` can be made
    /// arbitrarily small inside that class, so `x < a'` for all such `a` iff
    /// `x <= psi(e)` or `[x - psi(e)] < [e]`.
    fn in_gap(&self, c: &C, x: &C::Elem) -> bool {
        self.echelon.iter().all(|e| {
            let p = c.psi(e).expect("nonzero");
            let d = c.sub(x, &p);
            c.sign(&d) == Ordering::Greater && c.class_cmp(&d, e) == Ordering::Less
        })
    }

    fn below_all(&self, c: &C, x: &C::Elem) -> bool {
        !c.is_zero(x) && self.echelon.iter().all(|e| c.class_cmp(x, e) == Ordering::Less)
    }

    fn samples(&self, c: &C) -> Vec<C::Elem> {
        let mut out = vec![c.zero()];
        let coeffs = [ScalarValue::one(), -ScalarValue::one(), ScalarValue::ratio(-1, 2), ScalarValue::int(3)];
        for (i, e) in self.echelon.iter().enumerate() {
            for q in &coeffs {
                out.push(c.scale(q, e));
            }
            if let Some(f) = self.echelon.get(i + 1) {
                out.push(c.sub(e, f));
                out.push(c.add(&c.scale(&ScalarValue::ratio(1, 3), e), f));
            }
        }
        out
    }

    fn describe(&self, _c: &C) -> String {
        let parts: Vec<String> = self.echelon.iter().map(|e| e.to_string()).collect();
        format!("span({})", parts.join(", "))
    }
}

/// The whole of ΓL sitting inside a larger model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LogSlice;

fn log_samples() -> Vec<LogElement> {
    let mut out = vec![LogElement::zero()];
    for k in 0..4 {
        out.push(LogElement::e(k));
        out.push(LogElement::e(k).neg());
        out.push(sigma(k));
        out.push(LogElement::e(k).scale(&ScalarValue::ratio(-1, 2)).add(&LogElement::e(k + 2)));
    }
    out
}

fn is_sigma(x: &LogElement) -> bool {
    x.max_index().is_some_and(|k| *x == sigma(k))
}

impl Base<GapLogModel> for LogSlice {
    fn reduce(&self, _c: &GapLogModel, x: &GapLogElement) -> Reduction<GapLogElement> {
        if x.gap.is_zero() {
            Reduction::InBase(x.clone())
        } else {
            Reduction::Unbounded
        }
    }

    fn in_daggers(&self, _c: &GapLogModel, x: &GapLogElement) -> bool {
        x.gap.is_zero() && is_sigma(&x.base)
    }

    /// The sides of the cut are `{x < lambda}` and `{x > lambda}`.
    fn in_gap(&self, _c: &GapLogModel, x: &GapLogElement) -> bool {
        *x == GapLogElement::lambda()
    }

    fn below_all(&self, _c: &GapLogModel, _x: &GapLogElement) -> bool {
        false
    }

    fn samples(&self, _c: &GapLogModel) -> Vec<GapLogElement> {
        log_samples().into_iter().map(Into::into).collect()
    }

    fn describe(&self, _c: &GapLogModel) -> String {
        "Gamma_L".into()
    }
}

impl Base<GapRemovedModel> for LogSlice {
    fn reduce(&self, _c: &GapRemovedModel, x: &GapRemovedElement) -> Reduction<GapRemovedElement> {
        match (x.g.gap.is_zero(), x.u.is_zero()) {
            (false, _) => Reduction::Unbounded,
            (true, true) => Reduction::InBase(x.clone()),
            (true, false) => Reduction::Remainder {
                alpha: x.g.clone().into(),
                rest: GapRemovedElement { g: GapLogElement::zero(), u: x.u.clone() },
            },
        }
    }

    fn in_daggers(&self, _c: &GapRemovedModel, x: &GapRemovedElement) -> bool {
        x.u.is_zero() && x.g.gap.is_zero() && is_sigma(&x.g.base)
    }

    fn in_gap(&self, _c: &GapRemovedModel, x: &GapRemovedElement) -> bool {
        x.g == GapLogElement::lambda()
    }

    fn below_all(&self, _c: &GapRemovedModel, x: &GapRemovedElement) -> bool {
        x.g.is_zero() && !x.u.is_zero()
    }

    fn samples(&self, _c: &GapRemovedModel) -> Vec<GapRemovedElement> {
        log_samples().into_iter().map(|l| GapLogElement::from(l).into()).collect()
    }

    fn describe(&self, _c: &GapRemovedModel) -> String {
        "Gamma_L".into()
    }
}

fn split_exp(m: &Monomial) -> (Monomial, Monomial) {
    let exp_part = Monomial::exp_of(m.exp_argument()).expect("canonical argument");
    (m.mul(&exp_part.inv()), exp_part)
}

impl Base<TransModel> for LogSlice {
    /// The exp factor is the remainder: its class key is the leading monomial
    /// of a canonical exp argument, never an `l_(k+1)`.
    fn reduce(&self, _c: &TransModel, x: &Monomial) -> Reduction<Monomial> {
        if x.exp_argument().is_zero() {
            return Reduction::InBase(x.clone());
        }
        let (alpha, rest) = split_exp(x);
        Reduction::Remainder { alpha, rest }
    }

    fn in_daggers(&self, _c: &TransModel, x: &Monomial) -> bool {
        let Some(k) = x.max_index() else { return false };
        x.exp_argument().is_zero() && (0..=k).all(|i| x.log_exponent(i) == -ScalarValue::one())
    }

    /// No transmonomial lies strictly between all `(l_0...l_k)^-1` and every
    /// derivative of a positive log element: comparing at `l_(M+2)`, with `M`
    /// the largest index occurring, already separates it from one side.
    fn in_gap(&self, _c: &TransModel, _x: &Monomial) -> bool {
        false
    }

    fn below_all(&self, _c: &TransModel, _x: &Monomial) -> bool {
        false
    }

    fn samples(&self, _c: &TransModel) -> Vec<Monomial> {
        log_samples().iter().map(Monomial::from_log_element).collect()
    }

    fn describe(&self, _c: &TransModel) -> String {
        "Gamma_L".into()
    }
}

/// Exact linear rank of a list of ambient elements.
pub fn span_rank<C: Couple>(c: &C, elements: &[C::Elem]) -> usize {
    Span::new(c, elements).rank()
}

/// `(alpha_0, (beta - alpha_0)^dagger)` for a best approximation `alpha_0` of
/// `beta` from `Gamma`. The dagger is maximal among all `(beta - alpha)^dagger`.
pub fn best_approx_dagger<C: Couple, B: Base<C>>(
    c: &C,
    base: &B,
    beta: &C::Elem,
) -> Result<(C::Elem, C::Elem), AnalysisError> {
    match base.reduce(c, beta) {
        Reduction::InBase(_) => Err(AnalysisError::BetaInSpan(beta.to_string())),
        Reduction::Unbounded => Err(AnalysisError::NoBestApproximation(beta.to_string())),
        Reduction::Remainder { alpha, rest } => {
            let dagger = c.psi(&rest).expect("remainder is nonzero");
            if base.contains(c, &dagger) {
                return Err(AnalysisError::DaggerInBase(dagger.to_string()));
            }
            Ok((alpha, dagger))
        }
    }
}

/// Sampled elements `alpha` of `Gamma` for which `(beta - alpha)^dagger`
/// exceeds the claimed maximum.
pub fn dagger_maximality_failures<C: Couple, B: Base<C>>(
    c: &C,
    base: &B,
    beta: &C::Elem,
    dagger: &C::Elem,
) -> Vec<String> {
    base.samples(c)
        .into_iter()
        .filter(|a| c.psi(&c.sub(beta, a)).is_some_and(|d| c.cmp(&d, dagger) == Ordering::Greater))
        .map(|a| a.to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tmodel::LogModel;

    fn l(s: &str) -> LogElement {
        s.parse().unwrap()
    }

    fn m(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    #[test]
    fn span_ranks() {
        assert_eq!(span_rank(&LogModel, &[l("e0"), l("e1"), l("e0 + e1")]), 2);
        assert_eq!(span_rank(&TransModel, &[m("x"), m("x^2")]), 1);
        let towers: Vec<Monomial> = (1..=3).map(|c| m(&format!("exp(exp({c}*x))"))).collect();
        assert_eq!(span_rank(&TransModel, &towers), 3);
    }

    #[test]
    fn psi_closure_of_a_span() {
        let s = Span::psi_closed(&LogModel, &[l("e1")], 8).unwrap();
        assert_eq!(s.rank(), 2);
        assert!(Base::<LogModel>::contains(&s, &LogModel, &sigma(1)));
        let t = Span::psi_closed(&TransModel, &[m("exp(x)")], 8).unwrap();
        assert_eq!(t.rank(), 1);
    }

    #[test]
    fn best_approximation_daggers() {
        let s = Span::new(&LogModel, &[l("e0"), l("e1")]);
        let (a, d) = best_approx_dagger(&LogModel, &s, &l("e3")).unwrap();
        assert_eq!((a, d.clone()), (LogElement::zero(), sigma(3)));
        assert!(dagger_maximality_failures(&LogModel, &s, &l("e3"), &d).is_empty());
        assert_eq!(LogModel.psi(&l("e3 - e0")), Some(sigma(0)));

        let one = Span::new(&TransModel, &[m("x^(-1)")]);
        let (a, d) = best_approx_dagger(&TransModel, &one, &m("exp(exp(x))")).unwrap();
        assert_eq!((a, d), (Monomial::one(), m("exp(x)")));
        assert!(matches!(
            best_approx_dagger(&TransModel, &one, &m("exp(x)")),
            Err(AnalysisError::DaggerInBase(_))
        ));
        assert!(matches!(best_approx_dagger(&LogModel, &s, &l("e0 - 2*e1")), Err(AnalysisError::BetaInSpan(_))));
    }

    #[test]
    fn span_gap_test_is_the_finite_criterion() {
        let s = Span::new(&LogModel, &[l("e0")]);
        // psi = -e0; a positive element of class [e0] has a' = a - e0
        assert!(!Base::<LogModel>::in_gap(&s, &LogModel, &l("-e0")));
        assert!(Base::<LogModel>::in_gap(&s, &LogModel, &l("-e0 - e1")));
        assert!(!Base::<LogModel>::in_gap(&s, &LogModel, &l("-2*e0")));
    }
}
