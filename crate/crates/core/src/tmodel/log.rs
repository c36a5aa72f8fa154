use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::TModelError;
use crate::extend::GapSide;
use crate::foundation::{parse_combination, write_combination};
use crate::model::{Couple, Trichotomous, Trichotomy};
use crate::scalar::ScalarValue;

/// `sum q_k e_k`, where `e_k = v(l_k)`, `l_0 = x` and `l_(k+1) = log l_k`.
///
/// Every `e_k` is negative and `[e_0] > [e_1] > ...`, so the sign of an element
/// is the opposite of the sign of its coefficient at the least index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LogElement(BTreeMap<usize, ScalarValue>);

/// `sigma_k = -(e_0 + ... + e_k)`, the ψ-value of the class of `e_k`.
pub fn sigma(k: usize) -> LogElement {
    LogElement((0..=k).map(|i| (i, -ScalarValue::one())).collect())
}

impl LogElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn e(k: usize) -> Self {
        Self::term(k, ScalarValue::one())
    }

    pub fn term(k: usize, c: ScalarValue) -> Self {
        let mut out = Self::zero();
        out.add_term(k, &c);
        out
    }

    pub fn from_terms<I: IntoIterator<Item = (usize, ScalarValue)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (k, c) in terms {
            out.add_term(k, &c);
        }
        out
    }

    fn add_term(&mut self, k: usize, c: &ScalarValue) {
        let sum = self.coeff(k) + c;
        if sum.is_zero() {
            self.0.remove(&k);
        } else {
            self.0.insert(k, sum);
        }
    }

    pub fn coeff(&self, k: usize) -> ScalarValue {
        self.0.get(&k).cloned().unwrap_or_else(ScalarValue::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &ScalarValue)> {
        self.0.iter().map(|(k, c)| (*k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn least_index(&self) -> Option<usize> {
        self.0.keys().next().copied()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.keys().next_back().copied()
    }

    pub fn add(&self, other: &LogElement) -> LogElement {
        let mut out = self.clone();
        for (k, c) in &other.0 {
            out.add_term(*k, c);
        }
        out
    }

    pub fn sub(&self, other: &LogElement) -> LogElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LogElement {
        LogElement(self.0.iter().map(|(k, c)| (*k, -c)).collect())
    }

    pub fn scale(&self, c: &ScalarValue) -> LogElement {
        if c.is_zero() {
            return Self::zero();
        }
        LogElement(self.0.iter().map(|(k, x)| (*k, x * c)).collect())
    }

    pub fn signum(&self) -> Ordering {
        match self.0.values().next() {
            None => Ordering::Equal,
            Some(c) => c.signum().reverse(),
        }
    }

    pub fn order(&self, other: &LogElement) -> Ordering {
        self.sub(other).signum()
    }

    pub fn psi(&self) -> Option<LogElement> {
        self.least_index().map(sigma)
    }

    pub fn derive(&self) -> Option<LogElement> {
        self.psi().map(|p| self.add(&p))
    }

    /// The unique `alpha` with `alpha + psi(alpha) = self`: its class is the
    /// least index `k` with `q_k != -1`.
    pub fn integrate(&self) -> LogElement {
        let minus_one = -ScalarValue::one();
        let k = (0..).find(|&i| self.coeff(i) != minus_one).expect("finite support");
        self.sub(&sigma(k))
    }

    /// [`LogElement::integrate`] with its defining equation re-checked.
    pub fn integrate_checked(&self) -> Result<LogElement, TModelError> {
        let alpha = self.integrate();
        if alpha.derive().as_ref() == Some(self) {
            Ok(alpha)
        } else {
            Err(TModelError::IntegrationGap(self.to_string()))
        }
    }
}

impl fmt::Display for LogElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_combination(f, self.0.iter().map(|(k, c)| (format!("e{k}"), c)))
    }
}

/// Reads `e<k>` terms plus the optional extra symbols `lambda` and `u`.
fn parse_terms(text: &str, extras: &[&str]) -> Result<(LogElement, BTreeMap<String, ScalarValue>), TModelError> {
    let mut base = LogElement::zero();
    let mut extra: BTreeMap<String, ScalarValue> = BTreeMap::new();
    for (name, c) in parse_combination(text).map_err(TModelError::Parse)? {
        if let Some(k) = name.strip_prefix('e').and_then(|d| d.parse::<usize>().ok()) {
            base.add_term(k, &c);
        } else if extras.contains(&name.as_str()) {
            let slot = extra.entry(name).or_insert_with(ScalarValue::zero);
            *slot = &*slot + &c;
        } else {
            return Err(TModelError::Parse(format!("unknown symbol `{name}`")));
        }
    }
    Ok((base, extra))
}

impl FromStr for LogElement {
    type Err = TModelError;

    fn from_str(s: &str) -> Result<Self, TModelError> {
        Ok(parse_terms(s, &[])?.0)
    }
}

/// `[a]` vs `[b]` for classes given by least index, `None` for zero.
fn index_class_cmp(a: Option<usize>, b: Option<usize>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(i), Some(j)) => j.cmp(&i),
    }
}

/// `a : b` from classes and leading coefficients.
fn colon_from(class: Ordering, lead_a: Option<ScalarValue>, lead_b: Option<ScalarValue>) -> Option<ScalarValue> {
    match (class, lead_a, lead_b) {
        (_, _, None) => None,
        (Ordering::Less, _, _) => Some(ScalarValue::zero()),
        (Ordering::Equal, Some(x), Some(y)) => Some(&x / &y),
        _ => None,
    }
}

/// The value group ΓL of logarithmic monomials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LogModel;

impl Couple for LogModel {
    type Elem = LogElement;

    fn name(&self) -> String {
        "log monomials".into()
    }

    fn zero(&self) -> LogElement {
        LogElement::zero()
    }

    fn add(&self, a: &LogElement, b: &LogElement) -> LogElement {
        a.add(b)
    }

    fn neg(&self, a: &LogElement) -> LogElement {
        a.neg()
    }

    fn scale(&self, c: &ScalarValue, a: &LogElement) -> LogElement {
        a.scale(c)
    }

    fn cmp(&self, a: &LogElement, b: &LogElement) -> Ordering {
        a.order(b)
    }

    fn psi(&self, a: &LogElement) -> Option<LogElement> {
        a.psi()
    }

    fn class_cmp(&self, a: &LogElement, b: &LogElement) -> Ordering {
        index_class_cmp(a.least_index(), b.least_index())
    }

    fn colon(&self, a: &LogElement, b: &LogElement) -> Option<ScalarValue> {
        let lead = |x: &LogElement| x.0.values().next().cloned();
        colon_from(self.class_cmp(a, b), lead(a), lead(b))
    }

    /// The only H-cut of ΓL is `Psi` downward closed, which is `(Gamma^<)'`.
    fn in_cut(&self, a: &LogElement) -> bool {
        a.integrate().signum() == Ordering::Less
    }

    fn unit(&self) -> Option<LogElement> {
        Some(LogElement::e(0).neg())
    }

    fn parse_element(&self, text: &str) -> Result<LogElement, String> {
        text.parse().map_err(|e: TModelError| e.to_string())
    }

    fn smaller_class_positive(&self, a: &LogElement) -> Option<LogElement> {
        a.least_index().map(|k| LogElement::e(k + 1).neg())
    }

    fn try_integrate(&self, gamma: &LogElement) -> Option<LogElement> {
        Some(gamma.integrate())
    }
}

impl Trichotomous for LogModel {
    type Point = LogElement;

    fn trichotomy(&self) -> Option<Trichotomy<LogElement>> {
        Some(Trichotomy::AsymptoticIntegration)
    }
}

/// ΓL with ψ replaced by `psi + shift`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftedLogModel {
    pub shift: LogElement,
}

impl ShiftedLogModel {
    pub fn new(shift: LogElement) -> Self {
        ShiftedLogModel { shift }
    }

    fn integral(&self, gamma: &LogElement) -> LogElement {
        gamma.sub(&self.shift).integrate()
    }
}

impl Couple for ShiftedLogModel {
    type Elem = LogElement;

    fn name(&self) -> String {
        format!("log monomials with psi shifted by {}", self.shift)
    }

    fn zero(&self) -> LogElement {
        LogElement::zero()
    }

    fn add(&self, a: &LogElement, b: &LogElement) -> LogElement {
        a.add(b)
    }

    fn neg(&self, a: &LogElement) -> LogElement {
        a.neg()
    }

    fn scale(&self, c: &ScalarValue, a: &LogElement) -> LogElement {
        a.scale(c)
    }

    fn cmp(&self, a: &LogElement, b: &LogElement) -> Ordering {
        a.order(b)
    }

    fn psi(&self, a: &LogElement) -> Option<LogElement> {
        a.psi().map(|p| p.add(&self.shift))
    }

    fn class_cmp(&self, a: &LogElement, b: &LogElement) -> Ordering {
        LogModel.class_cmp(a, b)
    }

    fn colon(&self, a: &LogElement, b: &LogElement) -> Option<ScalarValue> {
        LogModel.colon(a, b)
    }

    fn in_cut(&self, a: &LogElement) -> bool {
        self.integral(a).signum() == Ordering::Less
    }

    /// The positive fixed point of the shifted ψ, if there is one.
    fn unit(&self) -> Option<LogElement> {
        let top = self.shift.max_index().map_or(0, |m| m + 1);
        (0..=top).find_map(|k| {
            let a = sigma(k).add(&self.shift);
            (a.least_index() == Some(k) && a.signum() == Ordering::Greater).then_some(a)
        })
    }

    fn parse_element(&self, text: &str) -> Result<LogElement, String> {
        LogModel.parse_element(text)
    }

    fn smaller_class_positive(&self, a: &LogElement) -> Option<LogElement> {
        LogModel.smaller_class_positive(a)
    }

    fn try_integrate(&self, gamma: &LogElement) -> Option<LogElement> {
        Some(self.integral(gamma))
    }
}

impl Trichotomous for ShiftedLogModel {
    type Point = LogElement;

    fn trichotomy(&self) -> Option<Trichotomy<LogElement>> {
        Some(Trichotomy::AsymptoticIntegration)
    }
}

/// `base + gap * lambda`, where `lambda` is the gap of ΓL.
///
/// Read `lambda` as the formal sum `-(e_0 + e_1 + ...)`: the element is then the
/// eventually constant coefficient sequence `c_i = q_i - gap`, its class is
/// the least `i` with `c_i != 0`, and the order is lexicographic in that
/// sequence. [`GapLogElement::signum`] decides the order by the integration
/// rule instead and the two agree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GapLogElement {
    pub base: LogElement,
    pub gap: ScalarValue,
}

impl GapLogElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn lambda() -> Self {
        GapLogElement { base: LogElement::zero(), gap: ScalarValue::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.base.is_zero() && self.gap.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        GapLogElement { base: self.base.add(&other.base), gap: &self.gap + &other.gap }
    }

    pub fn neg(&self) -> Self {
        GapLogElement { base: self.base.neg(), gap: -&self.gap }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &ScalarValue) -> Self {
        GapLogElement { base: self.base.scale(c), gap: &self.gap * c }
    }

    /// Coefficient of `e_i` in the sequence reading.
    pub fn sequence_coeff(&self, i: usize) -> ScalarValue {
        self.base.coeff(i) - &self.gap
    }

    pub fn least_index(&self) -> Option<usize> {
        if self.gap.is_zero() {
            return self.base.least_index();
        }
        let top = self.base.max_index().map_or(0, |m| m + 1);
        (0..=top).find(|&i| !self.sequence_coeff(i).is_zero())
    }

    /// Sign by the rule `lambda > gamma` iff `integrate(gamma) < 0`.
    pub fn signum(&self) -> Ordering {
        if self.gap.is_zero() {
            return self.base.signum();
        }
        // base + q*lambda = q*(lambda - eta) with eta = -base/q
        let q = &self.gap;
        let eta = self.base.scale(&(-q.recip().expect("nonzero")));
        let lambda_above = eta.integrate().signum() == Ordering::Less;
        let s = if lambda_above { Ordering::Greater } else { Ordering::Less };
        if q.is_positive() {
            s
        } else {
            s.reverse()
        }
    }

    /// Sign read off the coefficient sequence.
    pub fn sequence_signum(&self) -> Ordering {
        match self.least_index() {
            None => Ordering::Equal,
            Some(i) => self.sequence_coeff(i).signum().reverse(),
        }
    }

    pub fn order(&self, other: &Self) -> Ordering {
        self.sub(other).signum()
    }

    pub fn psi(&self) -> Option<Self> {
        self.least_index().map(|k| sigma(k).into())
    }

    pub fn derive(&self) -> Option<Self> {
        self.psi().map(|p| self.add(&p))
    }

    fn lead(&self) -> Option<ScalarValue> {
        self.least_index().map(|i| self.sequence_coeff(i))
    }
}

impl From<LogElement> for GapLogElement {
    fn from(base: LogElement) -> Self {
        GapLogElement { base, gap: ScalarValue::zero() }
    }
}

impl fmt::Display for GapLogElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.base.0.iter().map(|(k, c)| (format!("e{k}"), c));
        let gap = (!self.gap.is_zero()).then(|| ("lambda".to_string(), &self.gap));
        write_combination(f, terms.chain(gap))
    }
}

impl FromStr for GapLogElement {
    type Err = TModelError;

    fn from_str(s: &str) -> Result<Self, TModelError> {
        let (base, extra) = parse_terms(s, &["lambda"])?;
        Ok(GapLogElement { base, gap: extra.get("lambda").cloned().unwrap_or_else(ScalarValue::zero) })
    }
}

/// Which of the two H-cuts of `Gamma_L + Q lambda` is distinguished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapCut {
    /// `P = Psi` downward closed, which excludes `lambda`.
    #[default]
    PsiDown,
    /// `P` also contains `lambda`.
    WithGap,
}

/// ΓL with its gap `lambda` adjoined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GapLogModel {
    pub cut: GapCut,
}

impl GapLogModel {
    pub fn new(cut: GapCut) -> Self {
        GapLogModel { cut }
    }

    /// An element of ΓL within `eps` of `eta` (`eps > 0`).
    pub fn approximate(&self, eta: &GapLogElement, eps: &GapLogElement) -> LogElement {
        let m = eps.least_index().expect("eps is nonzero");
        let n = m.max(eta.base.max_index().unwrap_or(0)) + 1;
        eta.base.add(&sigma(n).scale(&eta.gap))
    }

    /// Removes the gap by adjoining `alpha` with `alpha' = lambda`.
    pub fn remove_gap(&self, side: GapSide) -> GapRemovedModel {
        GapRemovedModel { side }
    }
}

impl Couple for GapLogModel {
    type Elem = GapLogElement;

    fn name(&self) -> String {
        "log monomials with the gap adjoined".into()
    }

    fn zero(&self) -> GapLogElement {
        GapLogElement::zero()
    }

    fn add(&self, a: &GapLogElement, b: &GapLogElement) -> GapLogElement {
        a.add(b)
    }

    fn neg(&self, a: &GapLogElement) -> GapLogElement {
        a.neg()
    }

    fn scale(&self, c: &ScalarValue, a: &GapLogElement) -> GapLogElement {
        a.scale(c)
    }

    fn cmp(&self, a: &GapLogElement, b: &GapLogElement) -> Ordering {
        a.order(b)
    }

    fn psi(&self, a: &GapLogElement) -> Option<GapLogElement> {
        a.psi()
    }

    fn class_cmp(&self, a: &GapLogElement, b: &GapLogElement) -> Ordering {
        index_class_cmp(a.least_index(), b.least_index())
    }

    fn colon(&self, a: &GapLogElement, b: &GapLogElement) -> Option<ScalarValue> {
        colon_from(self.class_cmp(a, b), a.lead(), b.lead())
    }

    fn in_cut(&self, a: &GapLogElement) -> bool {
        let ord = a.order(&GapLogElement::lambda());
        match self.cut {
            GapCut::PsiDown => ord == Ordering::Less,
            GapCut::WithGap => ord != Ordering::Greater,
        }
    }

    fn unit(&self) -> Option<GapLogElement> {
        Some(LogElement::e(0).neg().into())
    }

    fn parse_element(&self, text: &str) -> Result<GapLogElement, String> {
        text.parse().map_err(|e: TModelError| e.to_string())
    }

    fn smaller_class_positive(&self, a: &GapLogElement) -> Option<GapLogElement> {
        a.least_index().map(|k| LogElement::e(k + 1).neg().into())
    }

    /// Every element but `lambda` has an integral.
    fn try_integrate(&self, gamma: &GapLogElement) -> Option<GapLogElement> {
        let minus_one = -ScalarValue::one();
        let top = gamma.base.max_index().map_or(0, |m| m + 1);
        let k = (0..=top).find(|&i| gamma.sequence_coeff(i) != minus_one)?;
        Some(gamma.sub(&sigma(k).into()))
    }
}

impl Trichotomous for GapLogModel {
    type Point = GapLogElement;

    fn trichotomy(&self) -> Option<Trichotomy<GapLogElement>> {
        Some(Trichotomy::Gap(GapLogElement::lambda()))
    }
}

/// `g + u * upsilon`, where `upsilon > 0` lies below every class of `g`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GapRemovedElement {
    pub g: GapLogElement,
    pub u: ScalarValue,
}

impl GapRemovedElement {
    pub fn upsilon() -> Self {
        GapRemovedElement { g: GapLogElement::zero(), u: ScalarValue::one() }
    }

    fn add(&self, o: &Self) -> Self {
        GapRemovedElement { g: self.g.add(&o.g), u: &self.u + &o.u }
    }

    fn neg(&self) -> Self {
        GapRemovedElement { g: self.g.neg(), u: -&self.u }
    }

    fn signum(&self) -> Ordering {
        if self.g.is_zero() {
            self.u.signum()
        } else {
            self.g.signum()
        }
    }

    /// `Some(Some(k))` for the class of `e_k`, `Some(None)` for the bottom class.
    fn class(&self) -> Option<Option<usize>> {
        match self.g.least_index() {
            Some(k) => Some(Some(k)),
            None if !self.u.is_zero() => Some(None),
            None => None,
        }
    }

    fn lead(&self) -> Option<ScalarValue> {
        match self.class()? {
            Some(_) => self.g.lead(),
            None => Some(self.u.clone()),
        }
    }
}

impl From<GapLogElement> for GapRemovedElement {
    fn from(g: GapLogElement) -> Self {
        GapRemovedElement { g, u: ScalarValue::zero() }
    }
}

impl fmt::Display for GapRemovedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.g.base.0.iter().map(|(k, c)| (format!("e{k}"), c));
        let gap = (!self.g.gap.is_zero()).then(|| ("lambda".to_string(), &self.g.gap));
        let u = (!self.u.is_zero()).then(|| ("u".to_string(), &self.u));
        write_combination(f, terms.chain(gap).chain(u))
    }
}

impl FromStr for GapRemovedElement {
    type Err = TModelError;

    fn from_str(s: &str) -> Result<Self, TModelError> {
        let (base, extra) = parse_terms(s, &["lambda", "u"])?;
        let get = |k: &str| extra.get(k).cloned().unwrap_or_else(ScalarValue::zero);
        Ok(GapRemovedElement { g: GapLogElement { base, gap: get("lambda") }, u: get("u") })
    }
}

/// `Gamma_L + Q lambda + Q alpha` with `alpha' = lambda`, where `alpha` is
/// `+u` or `-u` for a new bottom class `[u]`. Then `psi(alpha) = lambda - alpha`
/// is the largest ψ-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapRemovedModel {
    pub side: GapSide,
}

impl GapRemovedModel {
    pub fn alpha(&self) -> GapRemovedElement {
        match self.side {
            GapSide::Positive => GapRemovedElement::upsilon(),
            GapSide::Negative => GapRemovedElement::upsilon().neg(),
        }
    }

    pub fn max_psi(&self) -> GapRemovedElement {
        GapRemovedElement::from(GapLogElement::lambda()).add(&self.alpha().neg())
    }
}

impl Couple for GapRemovedModel {
    type Elem = GapRemovedElement;

    fn name(&self) -> String {
        let s = match self.side {
            GapSide::Positive => "+",
            GapSide::Negative => "-",
        };
        format!("log monomials with the gap removed by alpha = {s}u")
    }

    fn zero(&self) -> GapRemovedElement {
        GapRemovedElement::default()
    }

    fn add(&self, a: &GapRemovedElement, b: &GapRemovedElement) -> GapRemovedElement {
        a.add(b)
    }

    fn neg(&self, a: &GapRemovedElement) -> GapRemovedElement {
        a.neg()
    }

    fn scale(&self, c: &ScalarValue, a: &GapRemovedElement) -> GapRemovedElement {
        GapRemovedElement { g: a.g.scale(c), u: &a.u * c }
    }

    fn cmp(&self, a: &GapRemovedElement, b: &GapRemovedElement) -> Ordering {
        a.add(&b.neg()).signum()
    }

    fn psi(&self, a: &GapRemovedElement) -> Option<GapRemovedElement> {
        match a.class()? {
            Some(k) => Some(GapLogElement::from(sigma(k)).into()),
            None => Some(self.max_psi()),
        }
    }

    fn class_cmp(&self, a: &GapRemovedElement, b: &GapRemovedElement) -> Ordering {
        match (a.class(), b.class()) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(None), Some(None)) => Ordering::Equal,
            (Some(None), Some(Some(_))) => Ordering::Less,
            (Some(Some(_)), Some(None)) => Ordering::Greater,
            (Some(Some(i)), Some(Some(j))) => j.cmp(&i),
        }
    }

    fn colon(&self, a: &GapRemovedElement, b: &GapRemovedElement) -> Option<ScalarValue> {
        colon_from(self.class_cmp(a, b), a.lead(), b.lead())
    }

    fn in_cut(&self, a: &GapRemovedElement) -> bool {
        self.cmp(a, &self.max_psi()) != Ordering::Greater
    }

    fn unit(&self) -> Option<GapRemovedElement> {
        Some(GapLogElement::from(LogElement::e(0).neg()).into())
    }

    fn parse_element(&self, text: &str) -> Result<GapRemovedElement, String> {
        text.parse().map_err(|e: TModelError| e.to_string())
    }

    fn smaller_class_positive(&self, a: &GapRemovedElement) -> Option<GapRemovedElement> {
        a.class()?.map(|k| GapLogElement::from(LogElement::e(k + 1).neg()).into())
    }

    /// Every element except `max Psi` has an integral.
    fn try_integrate(&self, gamma: &GapRemovedElement) -> Option<GapRemovedElement> {
        if gamma.g == GapLogElement::lambda() {
            let s = &gamma.u + &self.alpha().u;
            return (!s.is_zero()).then(|| GapRemovedElement { g: GapLogElement::zero(), u: s });
        }
        let g = GapLogModel::default().try_integrate(&gamma.g)?;
        Some(GapRemovedElement { g, u: gamma.u.clone() })
    }
}

impl Trichotomous for GapRemovedModel {
    type Point = GapRemovedElement;

    fn trichotomy(&self) -> Option<Trichotomy<GapRemovedElement>> {
        Some(Trichotomy::Grounded(self.max_psi()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn l(s: &str) -> LogElement {
        s.parse().unwrap()
    }

    fn g(s: &str) -> GapLogElement {
        s.parse().unwrap()
    }

    #[test]
    fn psi_of_iterated_logarithms() {
        assert_eq!(l("e0").psi(), Some(l("-e0")));
        assert_eq!(l("e2").psi(), Some(l("-e0 - e1 - e2")));
        assert_eq!(l("3*e1 - 5*e4").psi(), Some(l("-e0 - e1")));
        assert_eq!(LogElement::zero().psi(), None);
        assert_eq!(l("-e0").signum(), Ordering::Greater);
        assert_eq!(LogModel.unit().and_then(|u| u.psi()), LogModel.unit());
    }

    #[test]
    fn worked_integrals() {
        assert_eq!(LogElement::zero().integrate(), l("e0"));
        assert_eq!(l("-e0").integrate(), l("e1"));
        assert_eq!(l("-e0 - e1").integrate(), l("e2"));
        assert_eq!(l("1/2*e3").integrate(), l("e0 + 1/2*e3"));
    }

    #[test]
    fn text_round_trip() {
        let x = l("e0 - 1/2*e3 + (1+sqrt2)*e7");
        assert_eq!(x.to_string(), "e0 - 1/2*e3 + (1+sqrt2)*e7");
        assert_eq!(g("e1 - lambda").to_string(), "e1 - lambda");
        assert!("e0 + u".parse::<GapLogElement>().is_err());
    }

    #[test]
    fn gap_sits_between_psi_and_derivatives() {
        let lambda = GapLogElement::lambda();
        assert_eq!(lambda.order(&sigma(5).into()), Ordering::Greater);
        let delta: GapLogElement = l("-e0").into();
        let d = delta.derive().unwrap();
        assert_eq!(lambda.order(&d), Ordering::Less);
        assert_eq!(GapLogModel::default().try_integrate(&lambda), None);
        assert!(!GapLogModel::new(GapCut::PsiDown).in_cut(&lambda));
        assert!(GapLogModel::new(GapCut::WithGap).in_cut(&lambda));
        assert_eq!(GapLogModel::default().psi(&lambda), Some(l("-e0").into()));
    }

    #[test]
    fn removing_the_gap_grounds_the_couple() {
        for side in [GapSide::Positive, GapSide::Negative] {
            let m = GapLogModel::default().remove_gap(side);
            let alpha = m.alpha();
            let d = m.derive(&alpha).unwrap();
            assert_eq!(d, GapLogElement::lambda().into());
            assert_eq!(m.try_integrate(&m.max_psi()), None);
            let sig: GapRemovedElement = GapLogElement::from(sigma(40)).into();
            assert_eq!(m.cmp(&m.max_psi(), &sig), Ordering::Greater);
            let small: GapRemovedElement = GapLogElement::from(l("-e9")).into();
            assert_eq!(m.class_cmp(&alpha, &small), Ordering::Less);
        }
    }

    #[test]
    fn shifted_model_has_no_unit() {
        let m = ShiftedLogModel::new(l("2*e0"));
        assert_eq!(m.unit(), None);
        assert!(!m.in_cut(&LogElement::zero()));
        assert_eq!(ShiftedLogModel::new(LogElement::zero()).unit(), LogModel.unit());
    }

    fn log_element() -> impl Strategy<Value = LogElement> {
        prop::collection::vec((0usize..6, -4i64..5, 1i64..4), 0..5)
            .prop_map(|ts| LogElement::from_terms(ts.into_iter().map(|(k, n, d)| (k, ScalarValue::ratio(n, d)))))
    }

    fn gap_element() -> impl Strategy<Value = GapLogElement> {
        (log_element(), -3i64..4, 1i64..3).prop_map(|(base, n, d)| GapLogElement { base, gap: ScalarValue::ratio(n, d) })
    }

    proptest! {
        #[test]
        fn integration_matches_the_class_search(x in log_element()) {
            let top = x.max_index().map_or(0, |m| m + 1);
            let found: Vec<LogElement> = (0..=top)
                .map(|k| x.sub(&sigma(k)))
                .enumerate()
                .filter(|(k, a)| a.least_index() == Some(*k))
                .map(|(_, a)| a)
                .collect();
            prop_assert_eq!(found, vec![x.integrate()]);
            prop_assert_eq!(x.integrate().derive(), Some(x));
        }

        #[test]
        fn gap_order_agrees_with_sequences(x in gap_element()) {
            prop_assert_eq!(x.signum(), x.sequence_signum());
        }

        #[test]
        fn gap_integration_is_exact(x in gap_element()) {
            let m = GapLogModel::default();
            match m.try_integrate(&x) {
                Some(a) => prop_assert_eq!(a.derive(), Some(x)),
                None => prop_assert_eq!(x, GapLogElement::lambda()),
            }
        }

        #[test]
        fn approximation_is_within_eps(x in gap_element(), k in 0usize..8) {
            let eps: GapLogElement = LogElement::e(k).neg().into();
            let y: GapLogElement = GapLogModel::default().approximate(&x, &eps).into();
            let diff = x.sub(&y);
            let abs = if diff.signum() == Ordering::Less { diff.neg() } else { diff };
            prop_assert_eq!(abs.order(&eps), Ordering::Less);
        }
    }
}
