//! Iterated ψ-maps `psi_{a1..an}` and equations of the form
//! `gamma + c1 psi_{a1}(gamma) + ... + cn psi_{a1..an}(gamma) = tau`.

use std::cmp::Ordering;

use super::AnalysisError;
use crate::closure::ClosureEngine;
use crate::couple::Presentation;
use crate::foundation::{ArchClass, VecElement};
use crate::model::Couple;
use crate::scalar::ScalarValue;
use crate::tmodel::{LogElement, LogModel};

/// Shifts `alpha_1..alpha_n` and coefficients `c_1..c_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsiIterSpec<E> {
    pub shifts: Vec<E>,
    pub coeffs: Vec<ScalarValue>,
}

impl<E> PsiIterSpec<E> {
    pub fn new(shifts: Vec<E>, coeffs: Vec<ScalarValue>) -> Result<Self, AnalysisError> {
        if shifts.is_empty() {
            return Err(AnalysisError::EmptyIterSpec);
        }
        if shifts.len() != coeffs.len() {
            return Err(AnalysisError::LengthMismatch { shifts: shifts.len(), coeffs: coeffs.len() });
        }
        Ok(PsiIterSpec { shifts, coeffs })
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }
}

/// `psi_{a1}(g) = psi(g - a1)`, `psi_{a1..ai}(g) = psi(psi_{a1..a(i-1)}(g) - ai)`,
/// with `inf` absorbing. Entry `i` is `None` once some step hits `psi(0)`.
pub fn psi_iterates<C: Couple>(c: &C, alphas: &[C::Elem], gamma: &C::Elem) -> Vec<Option<C::Elem>> {
    let mut out = Vec::with_capacity(alphas.len());
    let mut cur = Some(gamma.clone());
    for a in alphas {
        cur = cur.and_then(|v| c.psi(&c.sub(&v, a)));
        out.push(cur.clone());
    }
    out
}

pub fn psi_iter<C: Couple>(c: &C, alphas: &[C::Elem], gamma: &C::Elem) -> Option<C::Elem> {
    psi_iterates(c, alphas, gamma).pop().flatten()
}

/// Membership in `D_alpha`, where every iterate is finite.
pub fn in_domain<C: Couple>(c: &C, alphas: &[C::Elem], gamma: &C::Elem) -> bool {
    psi_iter(c, alphas, gamma).is_some()
}

/// `f(gamma) = gamma + sum c_i psi_{a1..ai}(gamma)` on `D_alpha`.
pub fn objective<C: Couple>(c: &C, spec: &PsiIterSpec<C::Elem>, gamma: &C::Elem) -> Option<C::Elem> {
    let mut acc = gamma.clone();
    for (v, q) in psi_iterates(c, &spec.shifts, gamma).into_iter().zip(&spec.coeffs) {
        acc = c.add(&acc, &c.scale(q, &v?));
    }
    Some(acc)
}

/// Couples whose archimedean classes can be listed, largest first.
pub trait Graded: Couple {
    /// Position of `[a]` in the list; `None` for `a = 0`.
    fn class_index(&self, a: &Self::Elem) -> Option<usize>;
    /// A positive element of the `k`-th class.
    fn class_rep(&self, k: usize) -> Option<Self::Elem>;
    /// Every class that a solution of an equation built from `elems` can
    /// occupy has index at most this.
    fn class_bound(&self, elems: &[&Self::Elem]) -> usize;
}

impl Graded for LogModel {
    fn class_index(&self, a: &LogElement) -> Option<usize> {
        a.least_index()
    }

    fn class_rep(&self, k: usize) -> Option<LogElement> {
        Some(LogElement::e(k).neg())
    }

    /// Beyond the largest index `m` in play, `psi` of anything lands at an
    /// index `<= m + 1`, so `gamma - alpha_1` has its class at index `<= m + 2`.
    fn class_bound(&self, elems: &[&LogElement]) -> usize {
        elems.iter().filter_map(|e| e.max_index()).max().map_or(0, |m| m + 2)
    }
}

impl Graded for Presentation {
    fn class_index(&self, a: &VecElement) -> Option<usize> {
        match self.class_of(a) {
            ArchClass::Zero => None,
            ArchClass::Class(id) => self.basis().position(&id).ok(),
        }
    }

    fn class_rep(&self, k: usize) -> Option<VecElement> {
        self.basis().ids().get(k).map(VecElement::basis)
    }

    fn class_bound(&self, _elems: &[&VecElement]) -> usize {
        self.basis().len().saturating_sub(1)
    }
}

impl Graded for ClosureEngine {
    fn class_index(&self, a: &VecElement) -> Option<usize> {
        self.stage().class_index(a)
    }

    fn class_rep(&self, k: usize) -> Option<VecElement> {
        self.stage().class_rep(k)
    }

    fn class_bound(&self, elems: &[&VecElement]) -> usize {
        self.stage().class_bound(elems)
    }
}

fn class_is_good<C: Graded>(c: &C, alphas: &[C::Elem], k: usize) -> bool {
    c.class_rep(k).is_some_and(|r| {
        let g = c.add(&alphas[0], &r);
        in_domain(c, alphas, &g)
    })
}

/// Which connected component of `D_alpha` contains `gamma`.
///
/// Membership of `gamma` depends only on `[gamma - alpha_1]`, so `D_alpha` is
/// `alpha_1 + {d != 0 : [d] good}`. A component is a sign of `d` together with
/// a run of consecutive good classes; the run is named by how many bad
/// classes lie above it.
pub fn component_key<C: Graded>(c: &C, alphas: &[C::Elem], gamma: &C::Elem) -> Option<(Ordering, usize)> {
    if !in_domain(c, alphas, gamma) {
        return None;
    }
    let d = c.sub(gamma, &alphas[0]);
    let k = c.class_index(&d)?;
    let bad = (0..k).filter(|&j| !class_is_good(c, alphas, j)).count();
    Some((c.sign(&d), bad))
}

/// The unique `gamma` in `D_alpha` with `f(gamma) = tau`.
///
/// For each class `K` the iterates are constant on `alpha_1 + K`, so the
/// equation becomes linear there: `gamma = tau - sum c_i v_i(K)`. Each
/// candidate is kept only if it really lies in `alpha_1 + K` and solves the
/// equation. Since `f` is strictly increasing on `D_alpha`, two survivors
/// would be an internal error.
pub fn solve_monotone<C: Graded>(
    c: &C,
    spec: &PsiIterSpec<C::Elem>,
    tau: &C::Elem,
) -> Result<C::Elem, AnalysisError> {
    let mut elems: Vec<&C::Elem> = spec.shifts.iter().collect();
    elems.push(tau);
    let bound = c.class_bound(&elems) + spec.len();
    let mut found: Vec<C::Elem> = Vec::new();
    for k in 0..=bound {
        let Some(rep) = c.class_rep(k) else { break };
        let probe = c.add(&spec.shifts[0], &rep);
        let Some(vals) = psi_iterates(c, &spec.shifts, &probe).into_iter().collect::<Option<Vec<_>>>() else {
            continue;
        };
        let mut gamma = tau.clone();
        for (v, q) in vals.iter().zip(&spec.coeffs) {
            gamma = c.sub(&gamma, &c.scale(q, v));
        }
        let d = c.sub(&gamma, &spec.shifts[0]);
        if c.class_index(&d) == Some(k) && objective(c, spec, &gamma).as_ref() == Some(tau) && !found.contains(&gamma) {
            found.push(gamma);
        }
    }
    match found.len() {
        0 => Err(AnalysisError::NoSolution { tau: tau.to_string(), classes: bound + 1 }),
        1 => Ok(found.pop().expect("one solution")),
        _ => Err(AnalysisError::NotUnique(found.iter().map(|g| g.to_string()).collect())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tmodel::sigma;
    use proptest::prelude::*;

    fn l(s: &str) -> LogElement {
        s.parse().unwrap()
    }

    #[test]
    fn single_step_is_integration() {
        let spec = PsiIterSpec::new(vec![LogElement::zero()], vec![ScalarValue::one()]).unwrap();
        let g = solve_monotone(&LogModel, &spec, &l("-e0")).unwrap();
        assert_eq!(g, l("e1"));
        assert_eq!(g, l("-e0").integrate());
    }

    #[test]
    fn iterates_absorb_infinity() {
        let alphas = vec![LogElement::zero(), sigma(0)];
        // psi(e0) = sigma(0), then psi(0) = inf
        assert_eq!(psi_iterates(&LogModel, &alphas, &l("e0")), vec![Some(sigma(0)), None]);
        assert!(!in_domain(&LogModel, &alphas, &l("e0")));
        assert!(in_domain(&LogModel, &alphas, &l("e1")));
        assert_eq!(component_key(&LogModel, &alphas, &l("e1")), Some((Ordering::Less, 1)));
        assert_eq!(component_key(&LogModel, &alphas, &l("-e0")), None);
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(PsiIterSpec::<LogElement>::new(vec![], vec![]), Err(AnalysisError::EmptyIterSpec)));
        assert!(PsiIterSpec::new(vec![LogElement::zero()], vec![]).is_err());
    }

    fn small_log() -> impl Strategy<Value = LogElement> {
        proptest::collection::vec((0usize..4, -3i64..=3), 0..4).prop_map(|ts| {
            LogElement::from_terms(ts.into_iter().map(|(k, c)| (k, ScalarValue::int(c))))
        })
    }

    proptest! {
        #[test]
        fn solve_round_trips(
            shifts in proptest::collection::vec(small_log(), 1..=3),
            coeffs in proptest::collection::vec(-2i64..=2, 3),
            gamma in small_log(),
        ) {
            let n = shifts.len();
            let spec = PsiIterSpec::new(shifts, coeffs[..n].iter().map(|&q| ScalarValue::int(q)).collect()).unwrap();
            if let Some(tau) = objective(&LogModel, &spec, &gamma) {
                prop_assert_eq!(solve_monotone(&LogModel, &spec, &tau).unwrap(), gamma);
            }
        }

        #[test]
        fn strictly_increasing_on_components(
            shifts in proptest::collection::vec(small_log(), 1..=2),
            coeffs in proptest::collection::vec(-2i64..=2, 2),
            a in small_log(),
            b in small_log(),
        ) {
            let n = shifts.len();
            let spec = PsiIterSpec::new(shifts, coeffs[..n].iter().map(|&q| ScalarValue::int(q)).collect()).unwrap();
            let ka = component_key(&LogModel, &spec.shifts, &a);
            if ka.is_some() && ka == component_key(&LogModel, &spec.shifts, &b) && a != b {
                let fa = objective(&LogModel, &spec, &a).unwrap();
                let fb = objective(&LogModel, &spec, &b).unwrap();
                prop_assert_eq!(LogModel.cmp(&fa, &fb), LogModel.cmp(&a, &b));
            }
        }
    }
}
