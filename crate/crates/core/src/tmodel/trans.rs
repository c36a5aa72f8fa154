//! Log-exp transmonomials of bounded exponential height and their value group.
//!
//! A monomial is `x^q0 * l1^q1 * ... * exp(L)` with `L` a finite purely large
//! series of monomials of lower height. Canonical form: no zero exponents,
//! and `L` never contains a bare `l_j` (j >= 1), since `exp(c*l_j) = l_(j-1)^c`.
//! Canonical forms are unique, so structural equality is equality of germs.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{LogElement, TModelError};
use crate::model::Couple;
use crate::scalar::ScalarValue;

pub const HEIGHT_BOUND: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial {
    logs: BTreeMap<usize, ScalarValue>,
    exp: Series,
}

/// A finite exact sum of monomials with nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Series(BTreeMap<Monomial, ScalarValue>);

/// Compares germs: `Greater` means `a` dominates `b`.
fn asym_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    if a.exp.is_zero() && b.exp.is_zero() {
        let keys: std::collections::BTreeSet<usize> = a.logs.keys().chain(b.logs.keys()).copied().collect();
        for k in keys {
            let ord = a.log_exponent(k).cmp(&b.log_exponent(k));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        return Ordering::Equal;
    }
    match a.log_series().sub(&b.log_series()).leading() {
        None => Ordering::Equal,
        Some((_, c)) => c.signum(),
    }
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn x() -> Self {
        Self::log_power(0, ScalarValue::one())
    }

    /// `l_k^c`, with `l_0 = x`.
    pub fn log_power(k: usize, c: ScalarValue) -> Self {
        let mut logs = BTreeMap::new();
        if !c.is_zero() {
            logs.insert(k, c);
        }
        Monomial { logs, exp: Series::zero() }
    }

    /// `exp(arg)` in canonical form.
    pub fn exp_of(arg: &Series) -> Result<Self, TModelError> {
        let mut out = Monomial::one();
        let mut rest = Series::zero();
        for (m, c) in arg.terms() {
            match m.bare_log() {
                Some(j) if j >= 1 => out = out.mul(&Monomial::log_power(j - 1, c.clone())),
                _ => rest.add_term(m.clone(), c.clone()),
            }
        }
        for (m, _) in rest.terms() {
            if asym_cmp(m, &Monomial::one()) != Ordering::Greater {
                return Err(TModelError::NotPurelyLarge(arg.to_string()));
            }
        }
        out.exp = out.exp.add(&rest);
        let h = out.height();
        if h > HEIGHT_BOUND {
            return Err(TModelError::HeightExceeded(h));
        }
        Ok(out)
    }

    /// `Some(j)` when the monomial is exactly `l_j`.
    fn bare_log(&self) -> Option<usize> {
        if !self.exp.is_zero() || self.logs.len() != 1 {
            return None;
        }
        let (k, c) = self.logs.iter().next()?;
        c.is_one().then_some(*k)
    }

    pub fn from_log_element(a: &LogElement) -> Self {
        Monomial { logs: a.terms().map(|(k, c)| (k, c.clone())).collect(), exp: Series::zero() }
    }

    pub fn is_one(&self) -> bool {
        self.logs.is_empty() && self.exp.is_zero()
    }

    pub fn log_exponent(&self, k: usize) -> ScalarValue {
        self.logs.get(&k).cloned().unwrap_or_else(ScalarValue::zero)
    }

    pub fn exp_argument(&self) -> &Series {
        &self.exp
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut logs = self.logs.clone();
        for (k, c) in &other.logs {
            let s = logs.get(k).cloned().unwrap_or_else(ScalarValue::zero) + c;
            if s.is_zero() {
                logs.remove(k);
            } else {
                logs.insert(*k, s);
            }
        }
        Monomial { logs, exp: self.exp.add(&other.exp) }
    }

    pub fn pow(&self, c: &ScalarValue) -> Monomial {
        if c.is_zero() {
            return Monomial::one();
        }
        Monomial { logs: self.logs.iter().map(|(k, q)| (*k, q * c)).collect(), exp: self.exp.scale(c) }
    }

    pub fn inv(&self) -> Monomial {
        self.pow(&-ScalarValue::one())
    }

    pub fn height(&self) -> usize {
        self.exp.terms().map(|(m, _)| m.height() + 1).max().unwrap_or(0)
    }

    /// Largest `k` such that `l_k` occurs anywhere in the monomial.
    pub fn max_index(&self) -> Option<usize> {
        let own = self.logs.keys().next_back().copied();
        let inner = self.exp.terms().filter_map(|(m, _)| m.max_index()).max();
        own.max(inner)
    }

    /// `log m = sum q_k l_(k+1) + L`.
    pub fn log_series(&self) -> Series {
        let mut s = self.exp.clone();
        for (k, q) in &self.logs {
            s.add_term(Monomial::log_power(k + 1, ScalarValue::one()), q.clone());
        }
        s
    }

    /// The exact logarithmic derivative `m'/m`.
    pub fn dagger(&self) -> Series {
        let mut s = self.exp.derivative();
        for (k, q) in &self.logs {
            let mut denom = Monomial::one();
            for i in 0..=*k {
                denom = denom.mul(&Monomial::log_power(i, -ScalarValue::one()));
            }
            s.add_term(denom, q.clone());
        }
        s
    }

    /// The leading monomial of `m'/m`; `psi(v m) = v` of it.
    pub fn psi(&self) -> Result<Monomial, TModelError> {
        self.dagger().leading().map(|(m, _)| m.clone()).ok_or_else(|| TModelError::ZeroDagger(self.to_string()))
    }

    /// The leading monomial and coefficient of `log m`: it fixes the
    /// archimedean class of `v m`.
    pub fn class_key(&self) -> Option<(Monomial, ScalarValue)> {
        self.log_series().leading().map(|(m, c)| (m.clone(), c.clone()))
    }
}

/// `[v a]` against `[v b]`.
pub fn arch_class_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    match (a.class_key(), b.class_key()) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some((x, _)), Some((y, _))) => asym_cmp(&x, &y),
    }
}

impl Series {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(m: Monomial) -> Self {
        Self::term(m, ScalarValue::one())
    }

    pub fn term(m: Monomial, c: ScalarValue) -> Self {
        let mut s = Self::zero();
        s.add_term(m, c);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &ScalarValue)> {
        self.0.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> ScalarValue {
        self.0.get(m).cloned().unwrap_or_else(ScalarValue::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: ScalarValue) {
        let s = self.coeff(&m) + c;
        if s.is_zero() {
            self.0.remove(&m);
        } else {
            self.0.insert(m, s);
        }
    }

    pub fn add(&self, other: &Series) -> Series {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &ScalarValue) -> Series {
        if c.is_zero() {
            return Series::zero();
        }
        Series(self.0.iter().map(|(m, x)| (m.clone(), x * c)).collect())
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.add(&other.scale(&-ScalarValue::one()))
    }

    pub fn mul_monomial(&self, n: &Monomial) -> Series {
        let mut out = Series::zero();
        for (m, c) in self.terms() {
            out.add_term(m.mul(n), c.clone());
        }
        out
    }

    /// The dominant term.
    pub fn leading(&self) -> Option<(&Monomial, &ScalarValue)> {
        self.0.iter().max_by(|(a, _), (b, _)| asym_cmp(a, b))
    }

    /// Terms from the dominant one down.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &ScalarValue)> {
        let mut t: Vec<_> = self.0.iter().collect();
        t.sort_by(|(a, _), (b, _)| asym_cmp(b, a));
        t
    }

    /// `sum c_i m_i'` with `m' = m * m†`.
    pub fn derivative(&self) -> Series {
        let mut out = Series::zero();
        for (m, c) in self.terms() {
            out = out.add(&m.dagger().mul_monomial(m).scale(c));
        }
        out
    }
}

fn write_exponent(f: &mut fmt::Formatter<'_>, c: &ScalarValue) -> fmt::Result {
    if c.is_one() {
        Ok(())
    } else if c.as_rational().is_some_and(|r| r.is_integer() && !c.is_negative()) {
        write!(f, "^{c}")
    } else {
        write!(f, "^({c})")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (k, c) in &self.logs {
            if !first {
                write!(f, " * ")?;
            }
            first = false;
            if *k == 0 {
                write!(f, "x")?;
            } else {
                write!(f, "l{k}")?;
            }
            write_exponent(f, c)?;
        }
        if !self.exp.is_zero() {
            if !first {
                write!(f, " * ")?;
            }
            write!(f, "exp({})", self.exp)?;
        }
        Ok(())
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            let negative = c.is_negative();
            let mag = if negative { -c } else { c.clone() };
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let coeff = if mag.as_rational().is_some() { mag.to_string() } else { format!("({mag})") };
            match (mag.is_one(), m.is_one()) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{m}")?,
                (false, true) => write!(f, "{coeff}")?,
                (false, false) => write!(f, "{coeff}*{m}")?,
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn err(&self, what: &str) -> TModelError {
        TModelError::Parse(format!("{what} at offset {} in `{}`", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), TModelError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn digits(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while self.rest().starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    /// `n`, `n/m`, or a parenthesized scalar.
    fn scalar(&mut self) -> Result<ScalarValue, TModelError> {
        if self.eat('(') {
            let start = self.pos;
            let mut depth = 1;
            for (i, ch) in self.rest().char_indices() {
                match ch {
                    '(' => depth += 1,
                    ')' => {
                        depth -= 1;
                        if depth == 0 {
                            let text = &self.src[start..start + i];
                            self.pos = start + i + 1;
                            return text.trim().parse().map_err(|e: crate::scalar::ScalarError| self.err(&e.to_string()));
                        }
                    }
                    _ => {}
                }
            }
            return Err(self.err("unbalanced parenthesis"));
        }
        let negative = self.eat('-');
        let num = self.digits();
        if num.is_empty() {
            return Err(self.err("expected a number"));
        }
        let mut text = num.to_string();
        if self.rest().trim_start().starts_with('/') {
            self.eat('/');
            let den = self.digits();
            if den.is_empty() {
                return Err(self.err("expected a denominator"));
            }
            text = format!("{num}/{den}");
        }
        let v: ScalarValue = text.parse().map_err(|e: crate::scalar::ScalarError| self.err(&e.to_string()))?;
        Ok(if negative { -v } else { v })
    }

    fn series(&mut self) -> Result<Series, TModelError> {
        let mut out = Series::zero();
        let mut sign = if self.eat('-') {
            -ScalarValue::one()
        } else {
            self.eat('+');
            ScalarValue::one()
        };
        loop {
            let (m, c) = self.term()?;
            out.add_term(m, &c * &sign);
            if self.eat('+') {
                sign = ScalarValue::one();
            } else if self.eat('-') {
                sign = -ScalarValue::one();
            } else {
                return Ok(out);
            }
        }
    }

    fn term(&mut self) -> Result<(Monomial, ScalarValue), TModelError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '(' => {
                let coeff = self.scalar()?;
                if self.eat('*') {
                    Ok((self.monomial()?, coeff))
                } else {
                    Ok((Monomial::one(), coeff))
                }
            }
            _ => Ok((self.monomial()?, ScalarValue::one())),
        }
    }

    fn monomial(&mut self) -> Result<Monomial, TModelError> {
        let mut m = self.factor()?;
        while self.eat('*') {
            m = m.mul(&self.factor()?);
        }
        Ok(m)
    }

    fn factor(&mut self) -> Result<Monomial, TModelError> {
        self.skip_ws();
        let base = if self.rest().starts_with("exp") {
            self.pos += 3;
            self.expect('(')?;
            let arg = self.series()?;
            self.expect(')')?;
            Monomial::exp_of(&arg)?
        } else if self.eat('x') {
            Monomial::x()
        } else if self.rest().starts_with('l') {
            self.pos += 1;
            let k = self.digits();
            let k: usize = k.parse().map_err(|_| self.err("expected a log index"))?;
            Monomial::log_power(k, ScalarValue::one())
        } else if self.rest().starts_with('1') {
            self.pos += 1;
            Monomial::one()
        } else {
            return Err(self.err("expected a monomial factor"));
        };
        if self.eat('^') {
            let e = self.scalar()?;
            return Ok(base.pow(&e));
        }
        Ok(base)
    }

    fn finish(&mut self) -> Result<(), TModelError> {
        if self.peek().is_some() {
            return Err(self.err("trailing input"));
        }
        Ok(())
    }
}

impl FromStr for Monomial {
    type Err = TModelError;

    fn from_str(s: &str) -> Result<Self, TModelError> {
        let mut p = Parser::new(s);
        let m = p.monomial()?;
        p.finish()?;
        Ok(m)
    }
}

impl FromStr for Series {
    type Err = TModelError;

    fn from_str(s: &str) -> Result<Self, TModelError> {
        let mut p = Parser::new(s);
        let out = p.series()?;
        p.finish()?;
        Ok(out)
    }
}

/// The value group of transmonomials: `m` stands for `v(m)`, so the group
/// operation is multiplication and `v(m) > 0` iff `m` is small.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TransModel;

impl Couple for TransModel {
    type Elem = Monomial;

    fn name(&self) -> String {
        format!("transmonomials of height at most {HEIGHT_BOUND}")
    }

    fn zero(&self) -> Monomial {
        Monomial::one()
    }

    fn add(&self, a: &Monomial, b: &Monomial) -> Monomial {
        a.mul(b)
    }

    fn neg(&self, a: &Monomial) -> Monomial {
        a.inv()
    }

    fn scale(&self, c: &ScalarValue, a: &Monomial) -> Monomial {
        a.pow(c)
    }

    fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        asym_cmp(b, a)
    }

    fn psi(&self, a: &Monomial) -> Option<Monomial> {
        if a.is_one() {
            None
        } else {
            a.psi().ok()
        }
    }

    fn class_cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        arch_class_cmp(a, b)
    }

    fn colon(&self, a: &Monomial, b: &Monomial) -> Option<ScalarValue> {
        let (_, cb) = b.class_key()?;
        match arch_class_cmp(a, b) {
            Ordering::Less => Some(ScalarValue::zero()),
            Ordering::Equal => a.class_key().map(|(_, ca)| &ca / &cb),
            Ordering::Greater => None,
        }
    }

    /// `v(m) <= psi(v l_K)` with `l_K` below everything occurring in `m`.
    fn in_cut(&self, a: &Monomial) -> bool {
        let k = a.max_index().map_or(0, |m| m + 2);
        let mut bound = Monomial::one();
        for i in 0..=k {
            bound = bound.mul(&Monomial::log_power(i, -ScalarValue::one()));
        }
        asym_cmp(a, &bound) != Ordering::Less
    }

    fn unit(&self) -> Option<Monomial> {
        Some(Monomial::x().inv())
    }

    fn parse_element(&self, text: &str) -> Result<Monomial, String> {
        text.parse().map_err(|e: TModelError| e.to_string())
    }

    fn smaller_class_positive(&self, a: &Monomial) -> Option<Monomial> {
        if a.is_one() {
            return None;
        }
        let k = a.max_index().map_or(0, |m| m + 2);
        Some(Monomial::log_power(k, -ScalarValue::one()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tmodel::sigma;
    use proptest::prelude::*;

    fn m(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    fn s(t: &str) -> Series {
        t.parse().unwrap()
    }

    #[test]
    fn canonical_text() {
        let a = m("x^(3/2) * l1^(-1) * exp(2*exp(x) - x)");
        assert_eq!(a.to_string(), "x^(3/2) * l1^(-1) * exp(2*exp(x) - x)");
        assert_eq!(m("exp(l1)"), Monomial::x());
        assert_eq!(m("exp(3*l2) * x"), m("x * l1^3"));
        assert_eq!(m("x * x^(-1)"), Monomial::one());
        assert_eq!(m("1").to_string(), "1");
        assert!(matches!("exp(x^(-1))".parse::<Monomial>(), Err(TModelError::NotPurelyLarge(_))));
        assert!(matches!("exp(exp(exp(exp(x))))".parse::<Monomial>(), Err(TModelError::HeightExceeded(4))));
    }

    #[test]
    fn daggers() {
        assert_eq!(m("exp(exp(x))").dagger(), s("exp(x)"));
        assert_eq!(m("exp(3/2*exp(2*x))").dagger(), s("3*exp(2*x)"));
        assert_eq!(m("l1").dagger(), s("x^(-1) * l1^(-1)"));
        // (x e^x)' / (x e^x) = 1 + 1/x: the constant must survive
        assert_eq!(m("x * exp(x)").dagger(), s("1 + x^(-1)"));
    }

    #[test]
    fn psi_values() {
        let t = TransModel;
        assert_eq!(t.psi(&m("exp(exp(5*x))")), Some(m("exp(5*x)")));
        assert_eq!(t.psi(&Monomial::x()), Some(m("x^(-1)")));
        assert_eq!(t.psi(&m("l3")), Some(m("x^(-1) * l1^(-1) * l2^(-1) * l3^(-1)")));
        let via_log = Monomial::from_log_element(&sigma(3));
        assert_eq!(t.psi(&m("l3")), Some(via_log));
        assert_eq!(t.psi(&Monomial::one()), None);
    }

    #[test]
    fn classes() {
        let t = TransModel;
        assert_eq!(t.class_cmp(&m("exp(exp(x))"), &m("exp(exp(2*x))")), Ordering::Less);
        assert_eq!(t.class_cmp(&m("x"), &m("x^2")), Ordering::Equal);
        assert_eq!(t.class_cmp(&m("l1"), &m("x")), Ordering::Less);
        assert_eq!(t.colon(&m("x^2"), &m("x")), Some(ScalarValue::int(2)));
        assert_eq!(t.cmp(&m("x"), &Monomial::one()), Ordering::Less);
        assert!(t.in_cut(&Monomial::one()));
        assert!(t.in_cut(&m("x^(-1) * l1^(-1)")));
        assert!(!t.in_cut(&m("x^(-2)")));
        assert!(!t.in_cut(&m("exp(-x)")));
    }

    fn small_monomial() -> impl Strategy<Value = Monomial> {
        let log = prop::collection::btree_map(0usize..3, (-3i64..4, 1i64..3), 0..3);
        let inner = prop::collection::vec((0usize..3, -2i64..3), 0..3);
        (log.clone(), inner, -2i64..3).prop_map(|(logs, inner, c)| {
            let mut out = Monomial::one();
            for (k, (n, d)) in logs {
                out = out.mul(&Monomial::log_power(k, ScalarValue::ratio(n, d)));
            }
            if c != 0 {
                let mut arg = Series::zero();
                for (k, e) in inner {
                    if e > 0 {
                        arg.add_term(Monomial::log_power(k, ScalarValue::int(e)), ScalarValue::int(c));
                    }
                }
                arg.add_term(Monomial::x(), ScalarValue::int(c));
                out = out.mul(&Monomial::exp_of(&arg).unwrap());
            }
            out
        })
    }

    proptest! {
        #[test]
        fn printing_round_trips(a in small_monomial()) {
            prop_assert_eq!(a.to_string().parse::<Monomial>().unwrap(), a);
        }

        #[test]
        fn order_is_compatible_with_products(a in small_monomial(), b in small_monomial(), c in small_monomial()) {
            prop_assert_eq!(asym_cmp(&a, &b), asym_cmp(&a.mul(&c), &b.mul(&c)));
            prop_assert_eq!(asym_cmp(&a, &b), asym_cmp(&b, &a).reverse());
        }

        #[test]
        fn order_is_transitive(a in small_monomial(), b in small_monomial(), c in small_monomial()) {
            if asym_cmp(&a, &b) != Ordering::Less && asym_cmp(&b, &c) != Ordering::Less {
                prop_assert_ne!(asym_cmp(&a, &c), Ordering::Less);
            }
        }
    }
}
