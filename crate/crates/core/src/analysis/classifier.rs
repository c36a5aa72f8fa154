//! Classification of a simple extension `Gamma<beta>` inside an ambient couple.
//!
//! Starting from a best approximation `beta_0 = beta - alpha_0`, the classifier
//! follows `beta_(i+1) = beta_i^dagger - alpha_(i+1)` until the dagger chain
//! lands in `Gamma` (case D_n), escapes every best approximation (case C_n), or
//! the step budget runs out (a certified prefix of case B).

use std::cmp::Ordering;
use std::fmt;

use serde_json::{json, Value};

use super::approx::{Base, Reduction};
use super::AnalysisError;
use crate::model::Couple;
use crate::scalar::ScalarValue;

pub const DEFAULT_MAX_STEPS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// `(Gamma + k beta)^dagger = Gamma^dagger`.
    CaseA,
    /// The recursion ran for this many steps without stopping.
    CaseB(usize),
    CaseCn(usize),
    CaseDn(usize),
    /// The recursion stalled at this step in a way the four cases exclude.
    UndeterminedAfter(usize),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::CaseA => write!(f, "CaseA"),
            Verdict::CaseB(n) => write!(f, "CaseB({n})"),
            Verdict::CaseCn(n) => write!(f, "CaseCn({n})"),
            Verdict::CaseDn(n) => write!(f, "CaseDn({n})"),
            Verdict::UndeterminedAfter(n) => write!(f, "UndeterminedAfter({n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifierReport<E> {
    pub verdict: Verdict,
    pub beta: E,
    pub alphas: Vec<E>,
    pub betas: Vec<E>,
    /// `daggers[i] = psi(betas[i])`.
    pub daggers: Vec<E>,
    pub note: Option<String>,
}

impl<E: Clone + fmt::Display> ClassifierReport<E> {
    /// The ψ-values that `Gamma<beta>` has beyond those of `Gamma`.
    pub fn new_psi_values(&self) -> Vec<E> {
        match self.verdict {
            Verdict::CaseA | Verdict::UndeterminedAfter(_) => Vec::new(),
            _ => self.daggers.clone(),
        }
    }

    pub fn to_json(&self) -> Value {
        let strs = |v: &[E]| v.iter().map(|e| e.to_string()).collect::<Vec<_>>();
        json!({
            "verdict": self.verdict.to_string(),
            "beta": self.beta.to_string(),
            "alphas": strs(&self.alphas),
            "betas": strs(&self.betas),
            "daggers": strs(&self.daggers),
            "newPsiValues": strs(&self.new_psi_values()),
            "note": self.note,
        })
    }
}

/// Runs the recursion for `beta` over `base`, for at most `max_steps` steps.
pub fn classify<C: Couple, B: Base<C>>(
    c: &C,
    base: &B,
    beta: &C::Elem,
    max_steps: usize,
) -> Result<ClassifierReport<C::Elem>, AnalysisError> {
    let mut report = ClassifierReport {
        verdict: Verdict::CaseA,
        beta: beta.clone(),
        alphas: Vec::new(),
        betas: Vec::new(),
        daggers: Vec::new(),
        note: None,
    };
    match base.reduce(c, beta) {
        Reduction::InBase(_) => return Err(AnalysisError::BetaInSpan(beta.to_string())),
        Reduction::Unbounded => {
            report.note = Some("every class of Gamma + k beta is a class of Gamma".into());
            return Ok(report);
        }
        Reduction::Remainder { alpha, rest } => {
            report.alphas.push(alpha);
            report.betas.push(rest);
        }
    }
    loop {
        let n = report.betas.len() - 1;
        let d = c.psi(&report.betas[n]).expect("remainders are nonzero");
        report.daggers.push(d.clone());
        if n == 0 && base.in_daggers(c, &d) {
            report.note = Some("beta_0 dagger is already in Gamma dagger".into());
            return Ok(report);
        }
        match base.reduce(c, &d) {
            Reduction::InBase(_) if base.in_daggers(c, &d) => {
                report.verdict = Verdict::UndeterminedAfter(n);
                report.note = Some(format!("beta_{n} dagger repeats a psi-value of Gamma"));
                return Ok(report);
            }
            Reduction::InBase(_) => {
                report.verdict = Verdict::CaseDn(n);
                return Ok(report);
            }
            Reduction::Unbounded => {
                report.verdict = Verdict::CaseCn(n);
                return Ok(report);
            }
            Reduction::Remainder { alpha, rest } => {
                if report.betas.len() >= max_steps {
                    report.verdict = Verdict::CaseB(report.betas.len());
                    report.note = Some("step budget exhausted; only this prefix is certified".into());
                    return Ok(report);
                }
                let dependent = c.class_cmp(&rest, &report.betas[n]) != Ordering::Less;
                report.alphas.push(alpha);
                report.betas.push(rest);
                if dependent {
                    report.verdict = Verdict::UndeterminedAfter(n + 1);
                    report.note = Some(format!("[beta_{}] is not below [beta_{n}]", n + 1));
                    report.daggers.push(c.psi(&report.betas[n + 1]).expect("nonzero"));
                    return Ok(report);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckItem {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.items.push(CheckItem { name: name.into(), ok, detail: if ok { String::new() } else { detail.into() } });
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.ok)
    }

    pub fn failures(&self) -> Vec<&CheckItem> {
        self.items.iter().filter(|i| !i.ok).collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.items.iter().map(|i| json!({"name": i.name, "ok": i.ok, "detail": i.detail})).collect(),
        )
    }
}

fn sample_coeffs() -> Vec<ScalarValue> {
    vec![ScalarValue::one(), -ScalarValue::one(), ScalarValue::ratio(1, 2), ScalarValue::int(-2)]
}

/// Elements `s + sum c_i g_i` for Gamma-samples `s` and a spread of
/// coefficient patterns on the extra generators `gens`.
fn extension_samples<C: Couple, B: Base<C>>(c: &C, base: &B, gens: &[C::Elem]) -> Vec<C::Elem> {
    let mut combos: Vec<C::Elem> = Vec::new();
    for g in gens {
        for q in sample_coeffs() {
            combos.push(c.scale(&q, g));
        }
    }
    if gens.len() > 1 {
        let all = gens.iter().fold(c.zero(), |acc, g| c.add(&acc, g));
        combos.push(all.clone());
        combos.push(c.sub(&gens[0], &gens[gens.len() - 1]));
        combos.push(c.sub(&c.scale(&ScalarValue::int(3), &gens[1]), &gens[0]));
    }
    let mut out = Vec::new();
    for s in base.samples(c) {
        for k in &combos {
            out.push(c.add(&s, k));
        }
    }
    out
}

fn count_fail<E: fmt::Display>(bad: &[E]) -> String {
    let first: Vec<String> = bad.iter().take(3).map(|e| e.to_string()).collect();
    format!("{} counterexample(s), e.g. {}", bad.len(), first.join("; "))
}

/// Checks every finitely checkable consequence of the case named by the
/// verdict, on the report data and on sampled elements of `Gamma<beta>`.
pub fn case_invariants<C: Couple, B: Base<C>>(
    c: &C,
    base: &B,
    report: &ClassifierReport<C::Elem>,
) -> Result<CheckReport, AnalysisError> {
    let mut out = CheckReport::default();
    if let Verdict::UndeterminedAfter(_) = report.verdict {
        return Err(AnalysisError::NotApplicable("an undetermined run has no case to check".into()));
    }
    let psi_ok = |x: &C::Elem| base.in_daggers(c, x);

    if report.betas.is_empty() {
        let samples = extension_samples(c, base, std::slice::from_ref(&report.beta));
        let bad: Vec<_> = samples.iter().filter(|x| c.psi(x).is_some_and(|p| !psi_ok(&p))).collect();
        out.check("no new psi-values", bad.is_empty(), count_fail(&bad));
        return Ok(out);
    }

    let (b, a, d) = (&report.betas, &report.alphas, &report.daggers);
    let lengths = a.len() == b.len() && d.len() == b.len();
    out.check("sequence lengths agree", lengths, "alphas, betas and daggers differ in length");
    if !lengths {
        return Ok(out);
    }
    let n = b.len() - 1;
    let mut rec = b[0] == c.sub(&report.beta, &a[0]);
    for i in 0..n {
        rec &= b[i + 1] == c.sub(&d[i], &a[i + 1]);
    }
    out.check("recursion beta_(i+1) = beta_i^dagger - alpha_(i+1)", rec, "a recursion equation fails");
    let dag = (0..=n).all(|i| c.psi(&b[i]).as_ref() == Some(&d[i]));
    out.check("daggers are psi of the betas", dag, "some dagger differs from psi(beta_i)");
    let alphas_in = a.iter().all(|x| base.contains(c, x));
    out.check("alphas lie in Gamma", alphas_in, "an alpha is outside Gamma");
    let outside = b.iter().all(|x| matches!(base.reduce(c, x), Reduction::Remainder { alpha, .. } if c.is_zero(&alpha)));
    out.check("classes of the betas are outside [Gamma]", outside, "some beta reduces against Gamma");
    let inc = d.windows(2).all(|w| c.cmp(&w[0], &w[1]) == Ordering::Less);
    out.check("daggers strictly increase", inc, "dagger chain is not strictly increasing");
    let dec = b.windows(2).all(|w| c.class_cmp(&w[0], &w[1]) == Ordering::Greater);
    out.check("classes strictly decrease", dec, "class chain is not strictly decreasing");

    let last_free = matches!(report.verdict, Verdict::CaseDn(_));
    let upto = if last_free { n } else { n + 1 };
    let dag_out = d[..upto].iter().all(|x| !base.contains(c, x));
    out.check("daggers outside Gamma", dag_out, "a dagger that should be new lies in Gamma");

    let mut gens = b.clone();
    if let Verdict::CaseCn(_) = report.verdict {
        gens.push(d[n].clone());
    }
    let samples = extension_samples(c, base, &gens);
    let predicted = |x: &C::Elem| psi_ok(x) || d.contains(x);
    let bad: Vec<_> = samples.iter().filter(|x| c.psi(x).is_some_and(|p| !predicted(&p))).collect();
    out.check("psi-values of Gamma<beta> are Psi plus the daggers", bad.is_empty(), count_fail(&bad));

    match report.verdict {
        Verdict::CaseDn(_) => {
            out.check("last dagger lies in Gamma", base.contains(c, &d[n]), "last dagger is outside Gamma");
            out.check("last dagger is not in Psi", !psi_ok(&d[n]), "last dagger already a psi-value of Gamma");
            no_gap_point(c, base, &samples, &mut out);
            cofinal(c, base, &samples, &mut out);
        }
        Verdict::CaseB(_) => {
            no_gap_point(c, base, &samples, &mut out);
            cofinal(c, base, &samples, &mut out);
        }
        Verdict::CaseCn(_) => {
            let unb = matches!(base.reduce(c, &d[n]), Reduction::Unbounded);
            out.check("last dagger has no best approximation", unb, "last dagger reduces against Gamma");
            let mut lower = b[..n].to_vec();
            lower.push(d[n].clone());
            let small: Vec<_> =
                extension_samples(c, base, &lower).into_iter().filter(|x| base.below_all(c, x)).collect();
            out.check("no element of Delta + k beta_(<n) below Gamma^>", small.is_empty(), count_fail(&small));
            if base.below_all(c, &b[n]) {
                let higher: Vec<_> = base
                    .samples(c)
                    .iter()
                    .chain(samples.iter())
                    .filter_map(|x| c.psi(x))
                    .filter(|p| c.cmp(p, &d[n]) == Ordering::Greater)
                    .collect();
                out.check("grounded with max psi = last dagger", higher.is_empty(), count_fail(&higher));
            }
        }
        Verdict::CaseA | Verdict::UndeterminedAfter(_) => {}
    }
    Ok(out)
}

fn no_gap_point<C: Couple, B: Base<C>>(c: &C, base: &B, samples: &[C::Elem], out: &mut CheckReport) {
    let bad: Vec<_> = samples.iter().filter(|x| base.in_gap(c, x)).collect();
    out.check("no eta in Gamma<beta> with Psi < eta < (Gamma^>)'", bad.is_empty(), count_fail(&bad));
}

fn cofinal<C: Couple, B: Base<C>>(c: &C, base: &B, samples: &[C::Elem], out: &mut CheckReport) {
    let bad: Vec<_> = samples.iter().filter(|x| base.below_all(c, x)).collect();
    out.check("Gamma^< is cofinal in Gamma<beta>^<", bad.is_empty(), count_fail(&bad));
}

/// A positive `delta` with `[delta] < [beta_0]`; every `eps` with
/// `|eps| < delta` moves only `beta_0`.
pub fn key_interval_radius<C: Couple>(c: &C, report: &ClassifierReport<C::Elem>) -> Result<C::Elem, AnalysisError> {
    match report.verdict {
        Verdict::CaseB(_) | Verdict::CaseCn(_) | Verdict::CaseDn(_) => {}
        v => return Err(AnalysisError::NotApplicable(format!("no key interval for verdict {v}"))),
    }
    c.smaller_class_positive(&report.betas[0]).ok_or(AnalysisError::NoSmallerClassAvailable)
}

/// Re-classifies `beta + eps` and checks that only `beta_0` moved, by `eps`.
pub fn certify_key_interval<C: Couple, B: Base<C>>(
    c: &C,
    base: &B,
    report: &ClassifierReport<C::Elem>,
    eps: &C::Elem,
    max_steps: usize,
) -> Result<bool, AnalysisError> {
    let moved = classify(c, base, &c.add(&report.beta, eps), max_steps)?;
    if moved.verdict != report.verdict || moved.alphas != report.alphas || moved.betas.len() != report.betas.len() {
        return Ok(false);
    }
    let first = moved.betas[0] == c.add(&report.betas[0], eps);
    Ok(first && moved.betas[1..] == report.betas[1..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{LogSlice, Span};
    use crate::extend::GapSide;
    use crate::tmodel::{
        sigma, GapCut, GapLogElement, GapLogModel, GapRemovedElement, GapRemovedModel, LogElement, LogModel, Monomial,
        TransModel,
    };

    fn m(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    fn one_span() -> Span<Monomial> {
        Span::psi_closed(&TransModel, &[m("x^(-1)")], 8).unwrap()
    }

    #[test]
    fn double_exponential_is_case_d1() {
        let gamma = one_span();
        let r = classify(&TransModel, &gamma, &m("exp(exp(x))"), DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(r.verdict, Verdict::CaseDn(1));
        assert_eq!(r.betas, vec![m("exp(exp(x))"), m("exp(x)")]);
        assert_eq!(r.daggers, vec![m("exp(x)"), Monomial::one()]);
        let checks = case_invariants(&TransModel, &gamma, &r).unwrap();
        assert!(checks.passed(), "{:?}", checks.failures());

        let mut bad = r.clone();
        bad.betas[1] = m("exp(2*x)");
        let checks = case_invariants(&TransModel, &gamma, &bad).unwrap();
        assert!(checks.failures().iter().any(|i| i.name.starts_with("recursion")));
    }

    #[test]
    fn log_slice_in_transmonomials() {
        let r = classify(&TransModel, &LogSlice, &m("exp(exp(x))"), DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(r.verdict, Verdict::CaseDn(1));
        let checks = case_invariants(&TransModel, &LogSlice, &r).unwrap();
        assert!(checks.passed(), "{:?}", checks.failures());
        let r = classify(&TransModel, &LogSlice, &m("x * exp(x)"), DEFAULT_MAX_STEPS).unwrap();
        assert_eq!((r.verdict, r.alphas[0].clone()), (Verdict::CaseDn(0), m("x")));
    }

    #[test]
    fn gap_is_case_a() {
        let c = GapLogModel::new(GapCut::PsiDown);
        let r = classify(&c, &LogSlice, &GapLogElement::lambda(), DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(r.verdict, Verdict::CaseA);
        assert!(r.new_psi_values().is_empty());
        assert!(case_invariants(&c, &LogSlice, &r).unwrap().passed());
        assert!(matches!(key_interval_radius(&c, &r), Err(AnalysisError::NotApplicable(_))));
    }

    #[test]
    fn bottom_class_is_case_c0() {
        let c = GapRemovedModel { side: GapSide::Positive };
        let r = classify(&c, &LogSlice, &GapRemovedElement::upsilon(), DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(r.verdict, Verdict::CaseCn(0));
        assert_eq!(r.daggers, vec![c.max_psi()]);
        let checks = case_invariants(&c, &LogSlice, &r).unwrap();
        assert!(checks.passed(), "{:?}", checks.failures());
        assert!(checks.items.iter().any(|i| i.name.starts_with("grounded")));
    }

    #[test]
    fn dependent_step_is_undetermined() {
        let g = Span::psi_closed(&LogModel, &[LogElement::e(0)], 8).unwrap();
        let r = classify(&LogModel, &g, &LogElement::e(1), DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(r.verdict, Verdict::UndeterminedAfter(1));
        assert_eq!(r.daggers[0], sigma(1));
        assert_eq!(r.betas[1], LogElement::e(1).neg());
        assert!(case_invariants(&LogModel, &g, &r).is_err());
    }

    #[test]
    fn key_interval_on_the_d1_fixture() {
        let gamma = one_span();
        let r = classify(&TransModel, &gamma, &m("exp(exp(x))"), DEFAULT_MAX_STEPS).unwrap();
        let delta = key_interval_radius(&TransModel, &r).unwrap();
        assert_eq!(TransModel.class_cmp(&delta, &r.betas[0]), Ordering::Less);
        for eps in ["1", "x^3", "exp(-5*x) * l1", &delta.to_string()] {
            assert!(certify_key_interval(&TransModel, &gamma, &r, &m(eps), DEFAULT_MAX_STEPS).unwrap(), "{eps}");
        }
        assert!(!certify_key_interval(&TransModel, &gamma, &r, &m("exp(x - exp(x))"), DEFAULT_MAX_STEPS).unwrap());
    }

    #[test]
    fn beta_in_span_is_an_error() {
        let gamma = one_span();
        assert!(matches!(classify(&TransModel, &gamma, &m("x^2"), 4), Err(AnalysisError::BetaInSpan(_))));
    }
}
