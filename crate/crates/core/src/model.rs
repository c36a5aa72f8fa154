//! The interface shared by every concrete couple: finite presentations, the
//! closure engine, and the log/exp monomial models.
//!
//! Elements never carry `inf` themselves; "no value" is `None`, which is how
//! `psi(0)` and failed colon quotients are reported. Couples are assumed to be
//! of Hahn type: `psi` is constant on archimedean classes and separates them.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::hash::Hash;

use crate::scalar::ScalarValue;

pub trait Couple {
    type Elem: Clone + Eq + Hash + Debug + Display + Send + Sync;

    /// Short human-readable name used in reports.
    fn name(&self) -> String;
    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn scale(&self, c: &ScalarValue, a: &Self::Elem) -> Self::Elem;
    fn cmp(&self, a: &Self::Elem, b: &Self::Elem) -> Ordering;
    /// `psi(a)`, or `None` for `a = 0`.
    fn psi(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// Compares the archimedean classes `[a]` and `[b]`.
    fn class_cmp(&self, a: &Self::Elem, b: &Self::Elem) -> Ordering;
    /// `a : b`; `None` stands for the default value `inf`.
    fn colon(&self, a: &Self::Elem, b: &Self::Elem) -> Option<ScalarValue>;
    /// Membership in the distinguished H-cut `P`.
    fn in_cut(&self, a: &Self::Elem) -> bool;
    /// The fixed point `1` of a normalized couple.
    fn unit(&self) -> Option<Self::Elem>;
    /// Parses an element written in this couple's own notation.
    fn parse_element(&self, text: &str) -> Result<Self::Elem, String>;

    /// A positive element of strictly smaller class than `a`, if one exists.
    fn smaller_class_positive(&self, _a: &Self::Elem) -> Option<Self::Elem> {
        None
    }

    /// The `alpha != 0` with `alpha + psi(alpha) = gamma`, when the couple can
    /// produce it without being extended.
    fn try_integrate(&self, _gamma: &Self::Elem) -> Option<Self::Elem> {
        None
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn sign(&self, a: &Self::Elem) -> Ordering {
        self.cmp(a, &self.zero())
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    fn abs(&self, a: &Self::Elem) -> Self::Elem {
        if self.sign(a) == Ordering::Less {
            self.neg(a)
        } else {
            a.clone()
        }
    }

    /// `a' = a + psi(a)`; `None` for `a = 0`.
    fn derive(&self, a: &Self::Elem) -> Option<Self::Elem> {
        self.psi(a).map(|p| self.add(a, &p))
    }

    fn max<'a>(&self, a: &'a Self::Elem, b: &'a Self::Elem) -> &'a Self::Elem {
        if self.cmp(a, b) == Ordering::Less {
            b
        } else {
            a
        }
    }
}

/// Exactly one of these holds for a nontrivial couple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Trichotomy<E> {
    /// Ψ has a largest element.
    Grounded(E),
    /// Ψ < gap < (Γ^>)'.
    Gap(E),
    /// Every element is a derivative.
    AsymptoticIntegration,
}

pub trait Trichotomous {
    type Point;
    /// `None` for the trivial couple.
    fn trichotomy(&self) -> Option<Trichotomy<Self::Point>>;
}

/// A couple is definably closed in its H-closure exactly when it has
/// asymptotic integration.
pub fn is_definably_closed<T: Trichotomous>(couple: &T) -> bool {
    matches!(couple.trichotomy(), Some(Trichotomy::AsymptoticIntegration))
}
