//! Finitely presented normalized couples in Hahn normal form.
//!
//! A [`Presentation`] lists the classes of a finite basis together with the
//! ψ-value of each class, a unit `1` with `psi(1) = 1`, and the H-cut.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::foundation::{ArchClass, BasisContext, BasisId, ExtVec, FoundationError, VecElement};
use crate::model::{Couple, Trichotomous, Trichotomy};
use crate::scalar::{ScalarError, ScalarField, ScalarValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoupleError {
    #[error(transparent)]
    Foundation(#[from] FoundationError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("no psi value given for class `{0}`")]
    MissingPsiValue(BasisId),
    #[error("psi value given for `{0}`, which is not a basis vector")]
    StrayPsiValue(BasisId),
    #[error("the zero couple has no psi values")]
    TrivialCouple,
    #[error("presentation fails validation: {0}")]
    Invalid(ValidationReport),
}

/// The distinguished H-cut `P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HCutSpec {
    /// `P` is the downward closure of Ψ.
    PsiDown,
    /// `P` is everything up to and including a declared gap.
    PsiDownPlusGap(VecElement),
}

/// One failed condition found by [`Presentation::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A larger class does not have a strictly smaller ψ-value.
    PsiNotIncreasing { upper: BasisId, lower: BasisId },
    /// `[psi(lower) - psi(upper)]` is not below the class of `upper`, so some
    /// small positive `a` in that class has `a + psi(a) <= psi(lower)`.
    Ac3 { upper: BasisId, lower: BasisId },
    GapNotAbovePsi { class: BasisId },
    GapNotBelowDerivatives { class: BasisId },
    UnitNotPositive,
    UnitNotFixed,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PsiNotIncreasing { upper, lower } => {
                write!(f, "psi({upper}) >= psi({lower}) although [{upper}] > [{lower}]")
            }
            Violation::Ac3 { upper, lower } => {
                write!(f, "[psi({lower}) - psi({upper})] is not below [{upper}]")
            }
            Violation::GapNotAbovePsi { class } => write!(f, "gap is not above psi({class})"),
            Violation::GapNotBelowDerivatives { class } => {
                write!(f, "gap is not below a' for every positive a of class [{class}]")
            }
            Violation::UnitNotPositive => write!(f, "unit is not positive"),
            Violation::UnitNotFixed => write!(f, "psi(unit) differs from unit"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    field: ScalarField,
    basis: BasisContext,
    psi: BTreeMap<BasisId, VecElement>,
    cut: HCutSpec,
    unit: VecElement,
    max_psi: Option<VecElement>,
}

impl Presentation {
    /// Builds a structurally well-formed presentation without checking the axioms.
    pub fn new(
        field: ScalarField,
        basis: BasisContext,
        psi: BTreeMap<BasisId, VecElement>,
        cut: HCutSpec,
        unit: VecElement,
    ) -> Result<Self, CoupleError> {
        for id in basis.ids() {
            if !psi.contains_key(id) {
                return Err(CoupleError::MissingPsiValue(id.clone()));
            }
        }
        let mut elements: Vec<&VecElement> = psi.values().collect();
        for id in psi.keys() {
            if !basis.contains(id) {
                return Err(CoupleError::StrayPsiValue(id.clone()));
            }
        }
        elements.push(&unit);
        if let HCutSpec::PsiDownPlusGap(g) = &cut {
            elements.push(g);
        }
        for v in elements {
            basis.check(v)?;
            for (_, c) in v.terms() {
                field.check(c)?;
            }
        }
        // ψ-values increase as classes decrease, so the last class carries the maximum
        // once validation has passed; before that we still take the true maximum.
        let mut max_psi: Option<VecElement> = None;
        for p in psi.values() {
            let bigger = match &max_psi {
                None => true,
                Some(m) => basis.compare(p, m)? == Ordering::Greater,
            };
            if bigger {
                max_psi = Some(p.clone());
            }
        }
        Ok(Presentation { field, basis, psi, cut, unit, max_psi })
    }

    /// [`Presentation::new`] followed by [`Presentation::validate`].
    pub fn validated(
        field: ScalarField,
        basis: BasisContext,
        psi: BTreeMap<BasisId, VecElement>,
        cut: HCutSpec,
        unit: VecElement,
    ) -> Result<Self, CoupleError> {
        let p = Self::new(field, basis, psi, cut, unit)?;
        let report = p.validate();
        if report.is_ok() {
            Ok(p)
        } else {
            Err(CoupleError::Invalid(report))
        }
    }

    /// The zero couple: no basis, no ψ-values.
    pub fn zero() -> Self {
        Presentation {
            field: ScalarField::Rationals,
            basis: BasisContext::default(),
            psi: BTreeMap::new(),
            cut: HCutSpec::PsiDown,
            unit: VecElement::zero(),
            max_psi: None,
        }
    }

    /// One class `b1` with `psi(b1) = b1 = 1`.
    pub fn p1() -> Self {
        let b1 = BasisId::new("b1");
        let e = VecElement::basis(&b1);
        let basis = BasisContext::new([b1.clone()]).expect("single id");
        Self::validated(ScalarField::Rationals, basis, BTreeMap::from([(b1, e.clone())]), HCutSpec::PsiDown, e)
            .expect("P1 is valid")
    }

    /// Classes `b1 > b2` with `psi(b1) = b1`, `psi(b2) = b1 + b2`.
    pub fn p2() -> Self {
        Self::log_chain(2)
    }

    /// `n` classes `b1 > ... > bn` with `psi(bk) = b1 + ... + bk`, the image of
    /// the first `n` iterated-logarithm classes under `bk -> -e(k-1)`.
    pub fn log_chain(n: usize) -> Self {
        assert!(n >= 1, "a normalized couple needs at least one class");
        let ids: Vec<BasisId> = (1..=n).map(|k| BasisId::new(&format!("b{k}"))).collect();
        let mut psi = BTreeMap::new();
        let mut acc = VecElement::zero();
        for id in &ids {
            acc = acc.add(&VecElement::basis(id));
            psi.insert(id.clone(), acc.clone());
        }
        let unit = VecElement::basis(&ids[0]);
        let basis = BasisContext::new(ids).expect("distinct ids");
        Self::validated(ScalarField::Rationals, basis, psi, HCutSpec::PsiDown, unit).expect("log chain is valid")
    }

    pub fn field(&self) -> ScalarField {
        self.field
    }

    pub fn basis(&self) -> &BasisContext {
        &self.basis
    }

    pub fn psi_table(&self) -> &BTreeMap<BasisId, VecElement> {
        &self.psi
    }

    pub fn cut(&self) -> &HCutSpec {
        &self.cut
    }

    pub fn unit(&self) -> &VecElement {
        &self.unit
    }

    pub fn max_psi(&self) -> Option<&VecElement> {
        self.max_psi.as_ref()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }

    /// Copy of this presentation over a larger scalar field.
    pub(crate) fn with_field(&self, field: ScalarField) -> Self {
        Presentation { field, ..self.clone() }
    }

    /// ψ-values listed class by class, largest class first.
    pub fn psi_values(&self) -> Vec<&VecElement> {
        self.basis.ids().iter().map(|id| &self.psi[id]).collect()
    }

    pub fn check_element(&self, a: &VecElement) -> Result<(), CoupleError> {
        self.basis.check(a)?;
        for (_, c) in a.terms() {
            self.field.check(c)?;
        }
        Ok(())
    }

    pub fn parse_vector(&self, text: &str) -> Result<VecElement, String> {
        let v = self.basis.parse_element(text)?;
        self.check_element(&v).map_err(|e| e.to_string())?;
        Ok(v)
    }

    pub fn render(&self, a: &VecElement) -> String {
        self.basis.render(a)
    }

    pub fn compare(&self, a: &VecElement, b: &VecElement) -> Ordering {
        self.basis.compare(a, b).expect("element outside the presentation basis")
    }

    pub fn class_of(&self, a: &VecElement) -> ArchClass {
        self.basis.arch_class(a).expect("element outside the presentation basis")
    }

    /// `psi(a)` for `a != 0`.
    pub fn psi_of(&self, a: &VecElement) -> Option<&VecElement> {
        match self.class_of(a) {
            ArchClass::Zero => None,
            ArchClass::Class(id) => self.psi.get(&id),
        }
    }

    pub fn psi(&self, a: &ExtVec) -> ExtVec {
        match a {
            ExtVec::Finite(v) => self.psi_of(v).cloned().map_or(ExtVec::Infinity, ExtVec::Finite),
            ExtVec::Infinity => ExtVec::Infinity,
        }
    }

    pub fn derive(&self, a: &ExtVec) -> ExtVec {
        a.add(&self.psi(a))
    }

    /// The class whose ψ-value is `beta`, if any.
    pub fn psi_preimage_class(&self, beta: &VecElement) -> Option<&BasisId> {
        self.psi.iter().find(|(_, p)| *p == beta).map(|(id, _)| id)
    }

    pub fn is_psi_value(&self, beta: &VecElement) -> bool {
        self.psi_preimage_class(beta).is_some()
    }

    /// Membership in `P`.
    pub fn cut_member(&self, a: &VecElement) -> bool {
        let bound = match &self.cut {
            HCutSpec::PsiDown => match &self.max_psi {
                Some(m) => m,
                None => return false,
            },
            HCutSpec::PsiDownPlusGap(g) => g,
        };
        self.compare(a, bound) != Ordering::Greater
    }

    pub fn classify_trichotomy(&self) -> Result<Trichotomy<VecElement>, CoupleError> {
        match (&self.cut, &self.max_psi) {
            (_, None) => Err(CoupleError::TrivialCouple),
            (HCutSpec::PsiDownPlusGap(g), _) => Ok(Trichotomy::Gap(g.clone())),
            (HCutSpec::PsiDown, Some(m)) => Ok(Trichotomy::Grounded(m.clone())),
        }
    }

    /// `true` iff every element is a derivative; never the case for a finite presentation.
    pub fn has_asymptotic_integration(&self) -> bool {
        matches!(self.classify_trichotomy(), Ok(Trichotomy::AsymptoticIntegration))
    }

    /// Checks the axioms through their finite criteria on the ψ-table.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let ids = self.basis.ids();
        let cmp = |a: &VecElement, b: &VecElement| self.compare(a, b);
        for (i, upper) in ids.iter().enumerate() {
            let pu = &self.psi[upper];
            for lower in &ids[i + 1..] {
                let pl = &self.psi[lower];
                if cmp(pu, pl) != Ordering::Less {
                    violations.push(Violation::PsiNotIncreasing { upper: upper.clone(), lower: lower.clone() });
                    continue;
                }
                if !self.is_below_class(&pl.sub(pu), upper) {
                    violations.push(Violation::Ac3 { upper: upper.clone(), lower: lower.clone() });
                }
            }
        }
        if let HCutSpec::PsiDownPlusGap(g) = &self.cut {
            for id in ids {
                let p = &self.psi[id];
                if cmp(g, p) != Ordering::Greater {
                    violations.push(Violation::GapNotAbovePsi { class: id.clone() });
                } else if !self.is_below_class(&g.sub(p), id) {
                    violations.push(Violation::GapNotBelowDerivatives { class: id.clone() });
                }
            }
        }
        if self.basis.sign(&self.unit).ok() != Some(Ordering::Greater) {
            violations.push(Violation::UnitNotPositive);
        } else if self.psi_of(&self.unit) != Some(&self.unit) {
            violations.push(Violation::UnitNotFixed);
        }
        ValidationReport { violations }
    }

    fn is_below_class(&self, a: &VecElement, id: &BasisId) -> bool {
        let class = self.class_of(a);
        self.basis.class_cmp(&class, &ArchClass::Class(id.clone())).expect("known ids") == Ordering::Less
    }
}

impl Trichotomous for Presentation {
    type Point = VecElement;

    fn trichotomy(&self) -> Option<Trichotomy<VecElement>> {
        self.classify_trichotomy().ok()
    }
}

impl Couple for Presentation {
    type Elem = VecElement;

    fn name(&self) -> String {
        let ids: Vec<&str> = self.basis.ids().iter().map(|b| b.as_str()).collect();
        format!("presentation[{}]", ids.join(","))
    }

    fn zero(&self) -> VecElement {
        VecElement::zero()
    }

    fn add(&self, a: &VecElement, b: &VecElement) -> VecElement {
        a.add(b)
    }

    fn neg(&self, a: &VecElement) -> VecElement {
        a.neg()
    }

    fn scale(&self, c: &ScalarValue, a: &VecElement) -> VecElement {
        a.scale(c)
    }

    fn cmp(&self, a: &VecElement, b: &VecElement) -> Ordering {
        self.compare(a, b)
    }

    fn psi(&self, a: &VecElement) -> Option<VecElement> {
        self.psi_of(a).cloned()
    }

    fn class_cmp(&self, a: &VecElement, b: &VecElement) -> Ordering {
        self.basis.class_cmp(&self.class_of(a), &self.class_of(b)).expect("known ids")
    }

    fn colon(&self, a: &VecElement, b: &VecElement) -> Option<ScalarValue> {
        let q = self.basis.colon_div(&ExtVec::Finite(a.clone()), &ExtVec::Finite(b.clone()));
        q.expect("known ids").finite().cloned()
    }

    fn in_cut(&self, a: &VecElement) -> bool {
        self.cut_member(a)
    }

    fn unit(&self) -> Option<VecElement> {
        if self.is_trivial() {
            None
        } else {
            Some(self.unit.clone())
        }
    }

    fn parse_element(&self, text: &str) -> Result<VecElement, String> {
        self.parse_vector(text)
    }

    fn smaller_class_positive(&self, a: &VecElement) -> Option<VecElement> {
        let start = match self.class_of(a) {
            ArchClass::Zero => return None,
            ArchClass::Class(id) => self.basis.position(&id).expect("known id") + 1,
        };
        self.basis.ids().get(start).map(VecElement::basis)
    }

    fn try_integrate(&self, gamma: &VecElement) -> Option<VecElement> {
        self.basis.ids().iter().find_map(|id| {
            let alpha = gamma.sub(&self.psi[id]);
            (self.class_of(&alpha) == ArchClass::Class(id.clone())).then_some(alpha)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(k: usize) -> BasisId {
        BasisId::new(&format!("b{k}"))
    }

    fn p2_with(p2: VecElement) -> Presentation {
        let psi = BTreeMap::from([(b(1), VecElement::basis(&b(1))), (b(2), p2)]);
        Presentation::new(
            ScalarField::Rationals,
            BasisContext::new([b(1), b(2)]).unwrap(),
            psi,
            HCutSpec::PsiDown,
            VecElement::basis(&b(1)),
        )
        .unwrap()
    }

    #[test]
    fn named_presentations_validate() {
        assert!(Presentation::p1().validate().is_ok());
        assert!(Presentation::p2().validate().is_ok());
        assert!(Presentation::log_chain(5).validate().is_ok());
    }

    #[test]
    fn doubling_psi_value_breaks_ac3() {
        let p = p2_with(VecElement::term(&b(1), ScalarValue::int(2)));
        let report = p.validate();
        assert_eq!(report.violations, vec![Violation::Ac3 { upper: b(1), lower: b(2) }]);
        // the witness a = b1/2 > 0 has a + psi(a) = 3/2 b1 < 2 b1 = psi(b2)
        let a = VecElement::term(&b(1), ScalarValue::ratio(1, 2));
        let lhs = p.derive(&ExtVec::Finite(a));
        let rhs = p.psi(&ExtVec::Finite(VecElement::basis(&b(2))));
        assert_eq!(p.compare(lhs.finite().unwrap(), rhs.finite().unwrap()), Ordering::Less);
    }

    #[test]
    fn non_increasing_table_and_bad_unit_are_reported() {
        let p = p2_with(VecElement::zero());
        assert!(p.validate().violations.contains(&Violation::PsiNotIncreasing { upper: b(1), lower: b(2) }));
        let mut q = Presentation::p2();
        q.unit = VecElement::basis(&b(2));
        assert_eq!(q.validate().violations, vec![Violation::UnitNotFixed]);
        q.unit = VecElement::basis(&b(1)).neg();
        assert_eq!(q.validate().violations, vec![Violation::UnitNotPositive]);
    }

    #[test]
    fn structural_errors() {
        let ctx = BasisContext::new([b(1), b(2)]).unwrap();
        let psi = BTreeMap::from([(b(1), VecElement::basis(&b(1)))]);
        let err = Presentation::new(ScalarField::Rationals, ctx, psi, HCutSpec::PsiDown, VecElement::basis(&b(1)));
        assert_eq!(err.unwrap_err(), CoupleError::MissingPsiValue(b(2)));
    }

    #[test]
    fn psi_and_derive_examples() {
        let p1 = Presentation::p1();
        let p2 = Presentation::p2();
        let e = |p: &Presentation, s: &str| ExtVec::Finite(p.parse_vector(s).unwrap());
        assert_eq!(p1.psi(&e(&p1, "0")), ExtVec::Infinity);
        assert_eq!(p1.psi(&ExtVec::Infinity), ExtVec::Infinity);
        assert_eq!(p1.psi(&e(&p1, "-17*b1")), e(&p1, "b1"));
        assert_eq!(p2.psi(&e(&p2, "b2")), e(&p2, "b1 + b2"));
        assert_eq!(p1.derive(&e(&p1, "-b1")), e(&p1, "0"));
        assert_eq!(p1.derive(&e(&p1, "0")), ExtVec::Infinity);
        assert_eq!(p2.derive(&e(&p2, "-b2")), e(&p2, "b1"));
    }

    #[test]
    fn cut_membership_and_trichotomy() {
        let p1 = Presentation::p1();
        let v = |s: &str| p1.parse_vector(s).unwrap();
        assert!(p1.cut_member(&v("b1")));
        assert!(!p1.cut_member(&v("b1 + b1")));
        assert!(p1.cut_member(&v("-5*b1")));
        assert_eq!(p1.classify_trichotomy().unwrap(), Trichotomy::Grounded(v("b1")));
        let p2 = Presentation::p2();
        assert_eq!(p2.classify_trichotomy().unwrap(), Trichotomy::Grounded(p2.parse_vector("b1+b2").unwrap()));
        assert_eq!(Presentation::zero().classify_trichotomy(), Err(CoupleError::TrivialCouple));
        assert!(!p2.has_asymptotic_integration());
        assert!(!Presentation::zero().has_asymptotic_integration());
    }

    #[test]
    fn declared_gaps_never_validate_on_a_finite_basis() {
        // above every ψ-value, but the difference to the largest one lives in the
        // smallest class, so a small positive element of that class undercuts it
        for gap in ["b1 + 2*b2", "2*b1", "b1 + b2 + b2"] {
            let mut p = Presentation::p2();
            p.cut = HCutSpec::PsiDownPlusGap(p.parse_vector(gap).unwrap());
            let report = p.validate();
            assert!(report.violations.iter().any(|v| matches!(v, Violation::GapNotBelowDerivatives { .. })));
        }
    }

    #[test]
    fn only_the_largest_psi_value_fails_to_integrate() {
        let p = Presentation::log_chain(3);
        let max = p.max_psi().unwrap().clone();
        assert!(p.try_integrate(&max).is_none());
        for s in ["0", "b1", "b1 + b2", "-2*b1 + 3*b3", "b1 + b2 + 2*b3"] {
            let g = p.parse_vector(s).unwrap();
            let a = p.try_integrate(&g).unwrap();
            assert_eq!(p.derive(&ExtVec::Finite(a)), ExtVec::Finite(g));
        }
    }
}
