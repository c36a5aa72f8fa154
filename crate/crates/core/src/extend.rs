//! Extension constructors for finite presentations.
//!
//! Each constructor adjoins one new basis vector `u` (always positive, always
//! coefficient one), re-validates the result and returns it together with the
//! identity embedding of the old basis and the predicted new Ψ-set.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::couple::{CoupleError, HCutSpec, Presentation, ValidationReport};
use crate::foundation::{ArchClass, BasisId, ExtVec, VecElement};
use crate::scalar::ScalarField;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtendError {
    #[error("the cut has no declared gap")]
    NoGap,
    #[error("the zero couple cannot be extended")]
    TrivialCouple,
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("{0} is not in the cut P")]
    NotInCut(String),
    #[error("{0} is already a psi value")]
    AlreadyPsiValue(String),
    #[error("cannot extend scalars from {0} to {1}")]
    UnsupportedFieldPair(ScalarField, ScalarField),
    #[error("input presentation is invalid: {0}")]
    InvalidInput(ValidationReport),
    #[error("constructed presentation is invalid: {0}")]
    InvalidResult(ValidationReport),
    #[error(transparent)]
    Couple(#[from] CoupleError),
}

/// Which side of zero the adjoined infinitesimal lies on when a gap is removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapSide {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionKind {
    RemoveGap(GapSide),
    Grounded,
    InsertClass,
}

impl fmt::Display for ExtensionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtensionKind::RemoveGap(GapSide::Positive) => write!(f, "remove-gap+"),
            ExtensionKind::RemoveGap(GapSide::Negative) => write!(f, "remove-gap-"),
            ExtensionKind::Grounded => write!(f, "grounded"),
            ExtensionKind::InsertClass => write!(f, "insert-class"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionReport {
    pub kind: ExtensionKind,
    /// Position of the new class in the extended basis (0 = largest).
    pub slot: usize,
    /// Predicted ψ-values of the extended presentation, largest class first.
    pub predicted_psi: Vec<VecElement>,
    pub new_max_psi: VecElement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionResult {
    pub extended: Presentation,
    pub new_basis_id: BasisId,
    pub embedding: BTreeMap<BasisId, BasisId>,
    /// The adjoined element: `-u` after a grounded step, `+-u` after removing a
    /// gap, `u` after inserting a class.
    pub adjoined: VecElement,
    pub report: ExtensionReport,
}

fn require_valid(p: &Presentation) -> Result<(), ExtendError> {
    let report = p.validate();
    if report.is_ok() {
        Ok(())
    } else {
        Err(ExtendError::InvalidInput(report))
    }
}

fn finish(
    old: &Presentation,
    slot: usize,
    new_id: BasisId,
    psi_new: VecElement,
    adjoined: VecElement,
    kind: ExtensionKind,
) -> Result<ExtensionResult, ExtendError> {
    let basis = old.basis().insert(slot, new_id.clone()).map_err(CoupleError::from)?;
    let mut psi = old.psi_table().clone();
    psi.insert(new_id.clone(), psi_new);
    let extended = Presentation::new(old.field(), basis, psi, HCutSpec::PsiDown, old.unit().clone())?;
    let report = extended.validate();
    if !report.is_ok() {
        return Err(ExtendError::InvalidResult(report));
    }
    let predicted_psi: Vec<VecElement> = extended.psi_values().into_iter().cloned().collect();
    let new_max_psi = extended.max_psi().expect("nontrivial").clone();
    let embedding = old.basis().ids().iter().map(|b| (b.clone(), b.clone())).collect();
    Ok(ExtensionResult {
        extended,
        new_basis_id: new_id,
        embedding,
        adjoined,
        report: ExtensionReport { kind, slot, predicted_psi, new_max_psi },
    })
}

/// Removes a declared gap `beta` by adjoining `alpha = +-u` below every class
/// with `psi(u) = beta - alpha`.
///
/// A finite Hahn-normal-form basis never carries a valid gap (the gap minus the
/// largest ψ-value would have to lie below the smallest class), so on
/// validated input this only ever reports [`ExtendError::NoGap`] or rejects the
/// input. The construction is realized on the gap-extended log model in
/// [`crate::tmodel::GapLogModel::remove_gap`].
pub fn remove_gap(p: &Presentation, side: GapSide) -> Result<ExtensionResult, ExtendError> {
    let HCutSpec::PsiDownPlusGap(beta) = p.cut() else {
        return Err(ExtendError::NoGap);
    };
    require_valid(p)?;
    let u = p.basis().fresh_id();
    let alpha = match side {
        GapSide::Positive => VecElement::basis(&u),
        GapSide::Negative => VecElement::basis(&u).neg(),
    };
    let psi_u = beta.sub(&alpha);
    finish(p, p.basis().len(), u, psi_u, alpha, ExtensionKind::RemoveGap(side))
}

/// Adjoins `alpha = -u` below every class with `alpha' = max Psi`.
pub fn extend_grounded(p: &Presentation) -> Result<ExtensionResult, ExtendError> {
    if p.is_trivial() {
        return Err(ExtendError::TrivialCouple);
    }
    if !matches!(p.cut(), HCutSpec::PsiDown) {
        return Err(ExtendError::HypothesisViolation("the cut must be the downward closure of Psi".into()));
    }
    require_valid(p)?;
    let beta = p.max_psi().expect("nontrivial").clone();
    let u = p.basis().fresh_id();
    let alpha = VecElement::basis(&u).neg();
    let psi_u = beta.sub(&alpha);
    finish(p, p.basis().len(), u, psi_u, alpha, ExtensionKind::Grounded)
}

/// Inserts a new class at `slot` (0 = above every class, `len` = below all)
/// whose ψ-value is `beta`.
pub fn insert_class(p: &Presentation, slot: usize, beta: &VecElement) -> Result<ExtensionResult, ExtendError> {
    require_valid(p)?;
    p.check_element(beta)?;
    let ids = p.basis().ids();
    if slot > ids.len() {
        return Err(ExtendError::HypothesisViolation(format!("slot {slot} exceeds {} classes", ids.len())));
    }
    let show = |v: &VecElement| p.render(v);
    if let Some(id) = p.psi_preimage_class(beta) {
        return Err(ExtendError::HypothesisViolation(format!(
            "{} = psi({id}) is already a psi value, which Hahn type forbids",
            show(beta)
        )));
    }
    for (i, id) in ids.iter().enumerate() {
        let pi = &p.psi_table()[id];
        let ord = p.compare(pi, beta);
        if i < slot && ord == Ordering::Greater {
            return Err(ExtendError::HypothesisViolation(format!(
                "psi({id}) = {} > {} for a class above the slot",
                show(pi),
                show(beta)
            )));
        }
        if i >= slot && ord == Ordering::Less {
            return Err(ExtendError::HypothesisViolation(format!(
                "psi({id}) = {} < {} for a class below the slot",
                show(pi),
                show(beta)
            )));
        }
        // beta < a + psi(a) for all a > 0 in the class of `id`
        if ord == Ordering::Less {
            let diff_class = p.class_of(&beta.sub(pi));
            let below = p.basis().class_cmp(&diff_class, &ArchClass::Class(id.clone())).expect("known ids");
            if below != Ordering::Less {
                return Err(ExtendError::HypothesisViolation(format!(
                    "{} is not below (Gamma^>)': [{} - psi({id})] >= [{id}]",
                    show(beta),
                    show(beta)
                )));
            }
        }
    }
    let u = p.basis().fresh_id();
    let alpha = VecElement::basis(&u);
    finish(p, slot, u, beta.clone(), alpha, ExtensionKind::InsertClass)
}

/// Adjoins a positive element with ψ-value `beta`, for `beta` in `P` but not in Ψ.
pub fn adjoin_psi_value(p: &Presentation, beta: &VecElement) -> Result<ExtensionResult, ExtendError> {
    p.check_element(beta)?;
    if !p.cut_member(beta) {
        return Err(ExtendError::NotInCut(p.render(beta)));
    }
    if p.is_psi_value(beta) {
        return Err(ExtendError::AlreadyPsiValue(p.render(beta)));
    }
    let slot = p.psi_values().iter().filter(|v| p.compare(v, beta) == Ordering::Less).count();
    insert_class(p, slot, beta)
}

/// The same presentation read over a larger scalar field.
pub fn scalar_extend(p: &Presentation, target: ScalarField) -> Result<Presentation, ExtendError> {
    if !p.field().is_subfield_of(&target) {
        return Err(ExtendError::UnsupportedFieldPair(p.field(), target));
    }
    Ok(p.with_field(target))
}

/// Compares order, ψ, derivation and cut membership on sampled old elements.
/// Returns a description of each disagreement.
pub fn embedding_failures(old: &Presentation, result: &ExtensionResult, samples: &[VecElement]) -> Vec<String> {
    let new = &result.extended;
    let mut failures = Vec::new();
    for id in old.basis().ids() {
        if result.embedding.get(id) != Some(id) {
            failures.push(format!("basis vector {id} is not mapped to itself"));
        }
        if new.psi_table().get(id) != old.psi_table().get(id) {
            failures.push(format!("psi({id}) changed"));
        }
    }
    for (i, a) in samples.iter().enumerate() {
        let fa = ExtVec::Finite(a.clone());
        if old.psi(&fa) != new.psi(&fa) {
            failures.push(format!("psi differs at {}", old.render(a)));
        }
        if old.derive(&fa) != new.derive(&fa) {
            failures.push(format!("derivative differs at {}", old.render(a)));
        }
        if old.cut_member(a) != new.cut_member(a) {
            failures.push(format!("cut membership differs at {}", old.render(a)));
        }
        let b = &samples[(i + 1) % samples.len()];
        if old.compare(a, b) != new.compare(a, b) {
            failures.push(format!("order differs at {} vs {}", old.render(a), old.render(b)));
        }
    }
    failures
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ScalarValue;

    fn v(p: &Presentation, s: &str) -> VecElement {
        p.parse_vector(s).unwrap()
    }

    #[test]
    fn grounded_steps_follow_the_log_chain() {
        let p1 = Presentation::p1();
        let r = extend_grounded(&p1).unwrap();
        assert_eq!(r.extended, Presentation::p2());
        assert_eq!(r.adjoined, v(&r.extended, "-b2"));
        let d = r.extended.derive(&ExtVec::Finite(r.adjoined.clone()));
        assert_eq!(d, ExtVec::Finite(v(&p1, "b1")));
        let r3 = extend_grounded(&r.extended).unwrap();
        assert_eq!(r3.extended, Presentation::log_chain(3));
        let d = r3.extended.derive(&ExtVec::Finite(r3.adjoined.clone()));
        assert_eq!(d, ExtVec::Finite(v(&r3.extended, "b1 + b2")));
        assert!(embedding_failures(&r.extended, &r3, &[v(&p1, "b1"), v(&r.extended, "-2*b2 + b1")]).is_empty());
        let old_max = r.extended.max_psi().unwrap();
        assert_eq!(r3.extended.compare(&r3.report.new_max_psi, old_max), Ordering::Greater);
        assert_eq!(extend_grounded(&Presentation::zero()), Err(ExtendError::TrivialCouple));
    }

    #[test]
    fn insert_class_checks_its_hypotheses() {
        let p2 = Presentation::p2();
        let err = insert_class(&p2, 2, &v(&p2, "b1 + b2")).unwrap_err();
        assert!(matches!(err, ExtendError::HypothesisViolation(m) if m.contains("already")));
        let err = insert_class(&p2, 2, &v(&p2, "b1 + 2*b2")).unwrap_err();
        assert!(matches!(err, ExtendError::HypothesisViolation(m) if m.contains("(Gamma^>)'")));
        let err = insert_class(&p2, 0, &v(&p2, "b1 + 1/2*b2")).unwrap_err();
        assert!(matches!(err, ExtendError::HypothesisViolation(m) if m.contains("below the slot")));

        let beta = v(&p2, "b1 + 1/2*b2");
        let r = insert_class(&p2, 1, &beta).unwrap();
        let q = &r.extended;
        let want = vec![v(q, "b1"), beta.clone(), v(q, "b1 + b2")];
        assert_eq!(r.report.predicted_psi, want);
        assert_eq!(q.basis().ids()[1], r.new_basis_id);
        // psi(g + c u) = min(psi(g), beta)
        for (g, c) in [("b1", 5), ("b2", 1), ("b2", -3), ("b1 - b2", 2), ("0", 7)] {
            let g = v(&p2, g);
            let mixed = g.add(&r.adjoined.scale(&ScalarValue::int(c)));
            let expected = match p2.psi_of(&g) {
                Some(pg) if p2.compare(pg, &beta) == Ordering::Less => pg.clone(),
                _ => beta.clone(),
            };
            assert_eq!(q.psi_of(&mixed), Some(&expected));
        }
        assert!(embedding_failures(&p2, &r, &[v(&p2, "b1"), v(&p2, "b2"), v(&p2, "3*b1 - b2")]).is_empty());
    }

    #[test]
    fn adjoin_psi_value_picks_the_slot() {
        let p2 = Presentation::p2();
        let r = adjoin_psi_value(&p2, &v(&p2, "b1 + 1/2*b2")).unwrap();
        assert_eq!(r.report.slot, 1);
        let p1 = Presentation::p1();
        let r = adjoin_psi_value(&p1, &v(&p1, "1/2*b1")).unwrap();
        assert_eq!(r.report.slot, 0);
        assert_eq!(r.report.predicted_psi, vec![v(&r.extended, "1/2*b1"), v(&r.extended, "b1")]);
        assert!(matches!(adjoin_psi_value(&p1, &v(&p1, "b1")), Err(ExtendError::AlreadyPsiValue(_))));
        assert!(matches!(adjoin_psi_value(&p1, &v(&p1, "2*b1")), Err(ExtendError::NotInCut(_))));
    }

    #[test]
    fn gap_removal_needs_a_gap() {
        assert_eq!(remove_gap(&Presentation::p1(), GapSide::Positive), Err(ExtendError::NoGap));
    }

    #[test]
    fn scalar_extension_keeps_the_table() {
        let p2 = Presentation::p2();
        let q = scalar_extend(&p2, ScalarField::Quadratic(2)).unwrap();
        assert_eq!(q.psi_table(), p2.psi_table());
        assert_eq!(q.classify_trichotomy().unwrap(), p2.classify_trichotomy().unwrap());
        let x = q.parse_vector("(-1+sqrt2)*b1").unwrap();
        assert_eq!(q.basis().sign(&x).unwrap(), Ordering::Greater);
        assert!(p2.parse_vector("sqrt2*b1").is_err());
        assert!(matches!(
            scalar_extend(&q, ScalarField::Quadratic(3)),
            Err(ExtendError::UnsupportedFieldPair(_, _))
        ));
    }
}
