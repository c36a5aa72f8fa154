//! Seeded property suites over random presentations, extensions, closure
//! query sequences and the concrete models.
//!
//! Every case draws from its own ChaCha stream (`seed`, case index), so a
//! run is reproducible for a fixed seed regardless of how many threads
//! execute it.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::analysis::{
    case_invariants, certify_key_interval, classify, component_key, objective, solve_monotone, span_rank, Graded,
    LogSlice, PsiIterSpec, Span, Verdict, DEFAULT_MAX_STEPS,
};
use crate::closure::{ClosureEngine, ClosureError, QueryOp};
use crate::couple::{HCutSpec, Presentation};
use crate::extend::{
    adjoin_psi_value, embedding_failures, extend_grounded, insert_class, remove_gap, scalar_extend, ExtendError,
    GapSide,
};
use crate::foundation::{BasisContext, BasisId, VecElement};
use crate::handle::ModelHandle;
use crate::lang::{
    bounded_exists, decide_qf, eval_qf, infinity_default_failures, parse_formula, Assignment, Binder, ExistsOutcome,
    Formula, Sort, VTerm,
};
use crate::model::{Couple, Trichotomous};
use crate::scalar::{ScalarField, ScalarValue};
use crate::tmodel::{
    sigma, GapCut, GapLogElement, GapLogModel, GapRemovedElement, LogElement, LogModel, Monomial, TransModel,
};
use crate::with_model;

/// Fixture corpus: `model | formula | expected` per line.
pub const CORPUS: &str = include_str!("../fixtures/corpus.txt");

const KEPT_MESSAGES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Axioms,
    Extensions,
    Closure,
    LogModel,
    Example,
    Classifier,
    Monotone,
    Language,
    ScalarExtension,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Axioms,
        Suite::Extensions,
        Suite::Closure,
        Suite::LogModel,
        Suite::Example,
        Suite::Classifier,
        Suite::Monotone,
        Suite::Language,
        Suite::ScalarExtension,
    ];

    /// Number of cases a full run uses.
    pub fn default_cases(self) -> usize {
        match self {
            Suite::Axioms | Suite::LogModel | Suite::Monotone => 10_000,
            Suite::Closure | Suite::Language | Suite::ScalarExtension => 1_000,
            Suite::Extensions => 1_500,
            Suite::Example => 20,
            Suite::Classifier => 100,
        }
    }

    fn case(self, rng: &mut ChaCha8Rng, index: usize) -> Outcome {
        match self {
            Suite::Axioms => axioms_case(rng),
            Suite::Extensions => extensions_case(rng),
            Suite::Closure => closure_case(rng),
            Suite::LogModel => log_case(rng, index),
            Suite::Example => example_case(rng, index),
            Suite::Classifier => classifier_case(rng, index),
            Suite::Monotone => monotone_case(rng),
            Suite::Language => language_case(rng, index),
            Suite::ScalarExtension => scalar_case(rng),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Axioms => "axioms",
            Suite::Extensions => "extensions",
            Suite::Closure => "closure",
            Suite::LogModel => "log-model",
            Suite::Example => "example",
            Suite::Classifier => "classifier",
            Suite::Monotone => "monotone",
            Suite::Language => "language",
            Suite::ScalarExtension => "scalar-extension",
        })
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// What one case observed: named counters and violation messages.
#[derive(Debug, Default)]
struct Outcome {
    counts: BTreeMap<&'static str, u64>,
    violations: Vec<String>,
}

impl Outcome {
    fn count(&mut self, key: &'static str) {
        *self.counts.entry(key).or_default() += 1;
    }

    /// Counts `key` and records `msg` unless `ok`.
    fn check(&mut self, key: &'static str, ok: bool, msg: impl FnOnce() -> String) {
        self.count(key);
        if !ok {
            self.violations.push(format!("{key}: {}", msg()));
        }
    }

    fn absorb(&mut self, other: Outcome) {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_default() += v;
        }
        self.violations.extend(other.violations);
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub cases: usize,
    /// How many times each named check ran.
    pub counts: BTreeMap<&'static str, u64>,
    pub violation_count: usize,
    /// The first few violations, in case order.
    pub violations: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    pub fn count(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite.to_string(),
            "seed": self.seed,
            "cases": self.cases,
            "counts": self.counts,
            "violationCount": self.violation_count,
            "violations": self.violations,
        })
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "ok" } else { "FAILED" };
        write!(f, "{} {status}: {} cases, {} violations", self.suite, self.cases, self.violation_count)?;
        for (k, v) in &self.counts {
            write!(f, "\n  {k}: {v}")?;
        }
        for v in &self.violations {
            write!(f, "\n  ! {v}")?;
        }
        Ok(())
    }
}

fn case_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs `cases` cases of `suite` on `jobs` threads (`0` = rayon's default).
pub fn run_suite(suite: Suite, seed: u64, cases: usize, jobs: usize) -> SuiteReport {
    let work = || {
        (0..cases)
            .into_par_iter()
            .map(|i| suite.case(&mut case_rng(seed, i), i))
            .collect::<Vec<_>>()
    };
    let outcomes = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    };
    let mut total = Outcome::default();
    for o in outcomes {
        total.absorb(o);
    }
    let violation_count = total.violations.len();
    total.violations.truncate(KEPT_MESSAGES);
    SuiteReport { suite, seed, cases, counts: total.counts, violation_count, violations: total.violations }
}

// ---------------------------------------------------------------------------
// generators

fn rand_scalar(rng: &mut impl Rng) -> ScalarValue {
    ScalarValue::ratio(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

fn rand_nonzero(rng: &mut impl Rng) -> ScalarValue {
    let n = rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 };
    ScalarValue::ratio(n, rng.gen_range(1..=4))
}

fn rand_positive(rng: &mut impl Rng) -> ScalarValue {
    ScalarValue::ratio(rng.gen_range(1..=5), rng.gen_range(1..=4))
}

fn rand_vector(rng: &mut impl Rng, ctx: &BasisContext) -> VecElement {
    let mut v = VecElement::zero();
    for id in ctx.ids() {
        if rng.gen_bool(0.5) {
            v.add_term(id, &rand_scalar(rng));
        }
    }
    v
}

fn rand_log(rng: &mut impl Rng, max_index: usize) -> LogElement {
    let n = rng.gen_range(0..=3);
    LogElement::from_terms((0..n).map(|_| (rng.gen_range(0..=max_index), rand_scalar(rng))))
}

fn rand_log_nonzero(rng: &mut impl Rng, max_index: usize) -> LogElement {
    loop {
        let a = rand_log(rng, max_index);
        if !a.is_zero() {
            return a;
        }
    }
}

fn positive_log(rng: &mut impl Rng, max_index: usize) -> LogElement {
    let a = rand_log_nonzero(rng, max_index);
    if a.signum() == Ordering::Less {
        a.neg()
    } else {
        a
    }
}

/// A random element of `P` that is not a ψ-value, if one turns up.
fn rand_cut_point(rng: &mut impl Rng, p: &Presentation) -> Option<VecElement> {
    for _ in 0..8 {
        let x = rand_vector(rng, p.basis());
        let x = if p.cut_member(&x) { x } else { x.neg() };
        if p.cut_member(&x) && !p.is_psi_value(&x) {
            return Some(x);
        }
    }
    None
}

fn chain_presentation(rng: &mut impl Rng, max_classes: usize) -> Presentation {
    let mut p = Presentation::p1();
    for _ in 1..rng.gen_range(1..=max_classes) {
        let step = if rng.gen_bool(0.4) {
            extend_grounded(&p).ok()
        } else {
            rand_cut_point(rng, &p).and_then(|b| adjoin_psi_value(&p, &b).ok())
        };
        if let Some(s) = step {
            p = s.extended;
        }
    }
    p
}

/// `psi(b1) = b1` and `psi(bk) = b1 + r2 b2 + ... + rk bk + noise below bk`,
/// kept only if it validates.
fn table_presentation(rng: &mut impl Rng, max_classes: usize) -> Option<Presentation> {
    let n = rng.gen_range(1..=max_classes);
    let ids: Vec<BasisId> = (1..=n).map(|k| BasisId::new(&format!("b{k}"))).collect();
    let ctx = BasisContext::new(ids.clone()).ok()?;
    for _ in 0..16 {
        let mut psi = BTreeMap::new();
        psi.insert(ids[0].clone(), VecElement::basis(&ids[0]));
        for k in 1..n {
            let mut v = VecElement::basis(&ids[0]);
            for (m, id) in ids.iter().enumerate().skip(1) {
                let c = if m <= k {
                    rand_positive(rng)
                } else if rng.gen_bool(0.3) {
                    rand_scalar(rng)
                } else {
                    continue;
                };
                v.add_term(id, &c);
            }
            psi.insert(ids[k].clone(), v);
        }
        let unit = VecElement::basis(&ids[0]);
        if let Ok(p) = Presentation::validated(ScalarField::Rationals, ctx.clone(), psi, HCutSpec::PsiDown, unit) {
            return Some(p);
        }
    }
    None
}

/// A random valid presentation with at most `max_classes` classes.
pub fn rand_presentation(rng: &mut impl Rng, max_classes: usize) -> Presentation {
    if rng.gen_bool(0.5) {
        if let Some(p) = table_presentation(rng, max_classes) {
            return p;
        }
    }
    chain_presentation(rng, max_classes)
}

// ---------------------------------------------------------------------------
// axioms

/// `samples` plus scaled copies and pairwise sums, so that equal-class pairs
/// occur often.
fn enrich<C: Couple>(c: &C, rng: &mut impl Rng, base: &[C::Elem]) -> Vec<C::Elem> {
    let mut out = base.to_vec();
    for (i, a) in base.iter().enumerate() {
        out.push(c.scale(&rand_nonzero(rng), a));
        out.push(c.add(a, &base[(i + 1) % base.len()]));
    }
    out
}

/// Checks AC2, AC3, HC, Hahn type, the class inequality for ψ-differences,
/// strict monotonicity of the derivative and the cut laws on all pairs of
/// `samples`.
fn check_axioms<C: Couple>(c: &C, samples: &[C::Elem], scalars: &[ScalarValue], out: &mut Outcome) {
    let nonzero: Vec<&C::Elem> = samples.iter().filter(|a| !c.is_zero(a)).collect();
    for a in &nonzero {
        let pa = c.psi(a).expect("nonzero");
        for q in scalars.iter().filter(|q| !q.is_zero()) {
            out.check("AC2", c.psi(&c.scale(q, a)).as_ref() == Some(&pa), || format!("psi({q}*{a}) != psi({a})"));
        }
        out.check("psi in P", c.in_cut(&pa), || format!("psi({a}) = {pa} not in P"));
        if c.sign(a) == Ordering::Greater {
            let da = c.derive(a).expect("nonzero");
            out.check("P below derivatives", !c.in_cut(&da), || format!("({a})' = {da} in P"));
        }
        for b in &nonzero {
            let pb = c.psi(b).expect("nonzero");
            if c.sign(a) == Ordering::Greater {
                let da = c.derive(a).expect("nonzero");
                out.check("AC3", c.cmp(&da, &pb) == Ordering::Greater, || format!("({a})' <= psi({b})"));
                if c.sign(b) == Ordering::Greater && c.cmp(a, b) != Ordering::Greater {
                    out.check("HC", c.cmp(&pa, &pb) != Ordering::Less, || format!("0 < {a} <= {b} but psi rises"));
                }
            }
            if pa == pb {
                out.check("Hahn type", c.class_cmp(a, b) == Ordering::Equal, || format!("psi({a}) = psi({b})"));
                match c.colon(a, b) {
                    Some(q) => {
                        let d = c.sub(a, &c.scale(&q, b));
                        let better = c.is_zero(&d) || c.psi(&d).is_some_and(|pd| c.cmp(&pd, &pa) == Ordering::Greater);
                        out.check("Hahn reduction", better, || format!("psi({a} - {q}*{b}) not above psi({a})"));
                    }
                    None => out.check("Hahn reduction", false, || format!("{a} : {b} undefined")),
                }
            } else if a != b {
                let dp = c.sub(&pa, &pb);
                let d = c.sub(a, b);
                out.check("psi difference class", c.class_cmp(&dp, &d) == Ordering::Less, || {
                    format!("[psi({a}) - psi({b})] >= [{a} - {b}]")
                });
            }
            if c.cmp(a, b) == Ordering::Less {
                let (da, db) = (c.derive(a).expect("nonzero"), c.derive(b).expect("nonzero"));
                out.check("derivative increasing", c.cmp(&da, &db) == Ordering::Less, || {
                    format!("{a} < {b} but ({a})' >= ({b})'")
                });
            }
            if c.in_cut(b) && c.cmp(a, b) == Ordering::Less {
                out.check("P downward closed", c.in_cut(a), || format!("{b} in P, {a} < {b} not"));
            }
        }
    }
}

fn axioms_case(rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::default();
    let p = rand_presentation(rng, 6);
    out.check("generated presentation valid", p.validate().is_ok(), || p.validate().to_string());
    let base: Vec<VecElement> = (0..4).map(|_| rand_vector(rng, p.basis())).collect();
    let mut samples = enrich(&p, rng, &base);
    samples.extend(p.psi_values().into_iter().cloned());
    let scalars = [rand_nonzero(rng), ScalarValue::int(-1), ScalarValue::int(rng.gen_range(2..=7))];
    check_axioms(&p, &samples, &scalars, &mut out);
    out.count("cases");
    out
}

// ---------------------------------------------------------------------------
// extensions

fn psi_set(p: &Presentation) -> Vec<VecElement> {
    let mut v: Vec<VecElement> = p.psi_values().into_iter().cloned().collect();
    v.sort_by(|a, b| p.compare(a, b));
    v
}

fn extensions_case(rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::default();
    let p = rand_presentation(rng, 5);
    let samples: Vec<VecElement> = (0..100).map(|_| rand_vector(rng, p.basis())).collect();
    let attempt = match rng.gen_range(0..4) {
        0 => {
            let beta = p.max_psi().expect("nontrivial").clone();
            extend_grounded(&p).map(|r| {
                let predicted = beta.sub(&r.adjoined);
                let d = r.extended.derive(&r.adjoined.clone().into());
                out.check("grounded: alpha' = max Psi", d == beta.clone().into(), || format!("{d}"));
                let grows = r.extended.compare(&r.report.new_max_psi, &beta) == Ordering::Greater;
                out.check("grounded: max Psi grows", grows, || r.report.new_max_psi.to_string());
                ("grounded", r, predicted)
            })
        }
        1 => match rand_cut_point(rng, &p) {
            Some(beta) => adjoin_psi_value(&p, &beta).map(|r| ("adjoin", r, beta)),
            None => return out,
        },
        2 => {
            let vals = p.psi_values();
            let slot = rng.gen_range(0..vals.len());
            let below = vals[slot].clone();
            let beta = if slot == 0 {
                below.sub(&p.unit().scale(&rand_positive(rng)))
            } else {
                let t = ScalarValue::ratio(rng.gen_range(1..=4), 5);
                vals[slot - 1].add(&below.sub(vals[slot - 1]).scale(&t))
            };
            insert_class(&p, slot, &beta).map(|r| {
                out.check("insert: slot", r.report.slot == slot, || format!("{} != {slot}", r.report.slot));
                ("insert", r, beta)
            })
        }
        _ => {
            out.check("remove gap on a presentation reports NoGap", remove_gap(&p, GapSide::Positive) == Err(ExtendError::NoGap), String::new);
            gap_removal_checks(rng, &mut out);
            return out;
        }
    };
    let (kind, r, new_psi) = match attempt {
        Ok(x) => x,
        Err(e) => {
            out.check("extension applies", false, || format!("{e} on {}", p.name()));
            return out;
        }
    };
    let q = &r.extended;
    out.check("re-validation", q.validate().is_ok(), || format!("{kind}: {}", q.validate()));
    let mut predicted = psi_set(&p);
    predicted.push(new_psi.clone());
    predicted.sort_by(|a, b| q.compare(a, b));
    out.check("predicted Psi", psi_set(q) == predicted, || format!("{kind} on {}", p.name()));
    let mut reported = r.report.predicted_psi.clone();
    reported.sort_by(|a, b| q.compare(a, b));
    out.check("reported Psi", reported == predicted, || kind.to_string());
    let adj_psi = q.psi_of(&r.adjoined).cloned();
    out.check("psi of adjoined element", adj_psi.as_ref() == Some(&new_psi), || kind.to_string());
    let fails = embedding_failures(&p, &r, &samples);
    out.count_n("embedded samples", samples.len() as u64);
    out.check("embedding soundness", fails.is_empty(), || fails.join("; "));
    out.count("applications");
    out
}

impl Outcome {
    fn count_n(&mut self, key: &'static str, n: u64) {
        *self.counts.entry(key).or_default() += n;
    }
}

fn rand_gap(rng: &mut impl Rng) -> GapLogElement {
    let gap = if rng.gen_bool(0.7) { rand_scalar(rng) } else { ScalarValue::zero() };
    GapLogElement { base: rand_log(rng, 5), gap }
}

/// Removing the gap of `Gamma_L + Q lambda`: the new ψ-value is
/// `lambda - alpha`, it is the largest, and old elements keep order, ψ and
/// cut membership.
fn gap_removal_checks(rng: &mut impl Rng, out: &mut Outcome) {
    let side = if rng.gen_bool(0.5) { GapSide::Positive } else { GapSide::Negative };
    let old = GapLogModel::new(match side {
        GapSide::Positive => GapCut::PsiDown,
        GapSide::Negative => GapCut::WithGap,
    });
    let new = old.remove_gap(side);
    let alpha = new.alpha();
    let expected = new.sub(&GapLogElement::lambda().into(), &alpha);
    out.check("remove gap: psi(alpha) = lambda - alpha", new.psi(&alpha) == Some(expected.clone()), || {
        format!("{:?}", new.psi(&alpha))
    });
    out.check("remove gap: alpha' = lambda", new.derive(&alpha) == Some(GapLogElement::lambda().into()), String::new);
    let lift = |g: &GapLogElement| GapRemovedElement::from(g.clone());
    let samples: Vec<GapLogElement> = (0..100).map(|_| rand_gap(rng)).collect();
    let mut fails = Vec::new();
    for (i, g) in samples.iter().enumerate() {
        let h = &samples[(i + 1) % samples.len()];
        if old.cmp(g, h) != new.cmp(&lift(g), &lift(h)) {
            fails.push(format!("order {g} vs {h}"));
        }
        if old.psi(g).map(|x| lift(&x)) != new.psi(&lift(g)) {
            fails.push(format!("psi at {g}"));
        }
        if old.in_cut(g) != new.in_cut(&lift(g)) {
            fails.push(format!("cut at {g}"));
        }
        if let Some(pg) = new.psi(&lift(g)) {
            if new.cmp(&pg, &expected) == Ordering::Greater {
                fails.push(format!("psi({g}) above the new maximum"));
            }
        }
    }
    out.count_n("embedded samples", samples.len() as u64);
    out.check("remove gap: embedding soundness", fails.is_empty(), || fails.join("; "));
    let extra: Vec<GapRemovedElement> = samples.iter().take(4).map(|g| new.add(&lift(g), &alpha)).collect();
    let mut all: Vec<GapRemovedElement> = samples.iter().take(6).map(lift).collect();
    all.extend(extra);
    all.push(alpha.clone());
    check_axioms(&new, &all, &[ScalarValue::int(-2), ScalarValue::ratio(1, 3)], out);
    out.count("applications");
}

// ---------------------------------------------------------------------------
// closure engine

/// `b_k -> -e_(k-1)`, defined on stages reached by integration alone.
fn to_log(p: &Presentation, v: &VecElement) -> LogElement {
    LogElement::from_terms(p.basis().ids().iter().enumerate().map(|(k, id)| (k, -&v.coeff(id))))
}

fn log_embedding_failures(rng: &mut impl Rng, p: &Presentation) -> Vec<String> {
    let mut fails = Vec::new();
    let mut samples: Vec<VecElement> = p.basis().ids().iter().map(VecElement::basis).collect();
    samples.extend((0..6).map(|_| rand_vector(rng, p.basis())));
    for a in &samples {
        let la = to_log(p, a);
        if p.psi_of(a).map(|x| to_log(p, x)) != LogModel.psi(&la) {
            fails.push(format!("psi does not commute at {a}"));
        }
        if p.basis().sign(a).ok() != Some(la.signum()) {
            fails.push(format!("sign differs at {a}"));
        }
    }
    fails
}

fn closure_case(rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::default();
    let mut e = ClosureEngine::new(Presentation::p1()).expect("P1 seeds an engine");
    let integrate_only = rng.gen_bool(0.5);
    let len = rng.gen_range(1..=50);
    for _ in 0..len {
        let stage = e.stage().clone();
        let op = if integrate_only || rng.gen_bool(0.5) { QueryOp::Integrate } else { QueryOp::PsiPreimage };
        let input = match (op, rng.gen_range(0..4)) {
            (_, 0) => stage.max_psi().expect("grounded").clone(),
            (QueryOp::PsiPreimage, 1) => {
                let vals = stage.psi_values();
                vals[rng.gen_range(0..vals.len())].clone()
            }
            _ => rand_vector(rng, stage.basis()),
        };
        match e.query(op, &input) {
            Ok(answer) => {
                let again = e.query(op, &input);
                out.check("cached answer", again.as_ref() == Ok(&answer), || format!("{op} {input}"));
            }
            Err(ClosureError::NotInCut(_)) => {
                out.check("NotInCut only outside P", op == QueryOp::PsiPreimage && !stage.cut_member(&input), || {
                    format!("{op} {input}")
                });
            }
            Err(err) => out.check("no invariant violation", false, || format!("{op} {input}: {err}")),
        }
        out.count("queries");
    }
    let stage = e.stage();
    out.check("final stage validates", stage.validate().is_ok(), || stage.validate().to_string());
    let fails = e.answer_failures();
    out.check("answers hold in final stage", fails.is_empty(), || fails.join("; "));
    let stages = e.stages();
    for (k, step) in e.steps().iter().enumerate() {
        let samples: Vec<VecElement> = (0..10).map(|_| rand_vector(rng, stages[k].basis())).collect();
        let fails = embedding_failures(stages[k], step, &samples);
        out.check("stage embeds in the next", fails.is_empty(), || fails.join("; "));
        let old: Vec<VecElement> = psi_set(stages[k]);
        let grown = old.iter().all(|v| step.extended.is_psi_value(v));
        out.check("Psi grows", grown, String::new);
    }
    if integrate_only {
        for p in stages.iter().take(5) {
            let fails = log_embedding_failures(rng, p);
            out.check("stage embeds in Gamma_L", fails.is_empty(), || fails.join("; "));
        }
    }
    out.count("sequences");
    out
}

// ---------------------------------------------------------------------------
// Gamma_L and its gap

fn log_case(rng: &mut ChaCha8Rng, index: usize) -> Outcome {
    let mut out = Outcome::default();
    let gamma = rand_log(rng, 8);
    let alpha = gamma.integrate();
    out.check("integral is nonzero", !alpha.is_zero(), || gamma.to_string());
    out.check("alpha + psi(alpha) = gamma", alpha.derive().as_ref() == Some(&gamma), || gamma.to_string());
    if index == 0 {
        for (g, a) in [("0", "e0"), ("-e0", "e1"), ("-e0 - e1", "e2")] {
            let g: LogElement = g.parse().expect("literal");
            let a: LogElement = a.parse().expect("literal");
            out.check("worked integrals", g.integrate() == a, || format!("integrate({g}) = {}", g.integrate()));
        }
    }
    let gap = GapLogModel::new(GapCut::PsiDown);
    let lambda = GapLogElement::lambda();
    if index <= 50 {
        let s = GapLogElement::from(sigma(index));
        out.check("lambda above sigma_k", gap.cmp(&lambda, &s) == Ordering::Greater, || format!("k = {index}"));
    }
    if index < 1000 {
        let delta = positive_log(rng, 6);
        let d = GapLogElement::from(delta.derive().expect("nonzero"));
        out.check("lambda below (Gamma^>)'", gap.cmp(&lambda, &d) == Ordering::Less, || format!("delta = {delta}"));
        let mut eta = rand_gap(rng);
        if eta.gap.is_zero() {
            eta.gap = rand_nonzero(rng);
        }
        let eps = GapLogElement::from(positive_log(rng, 8));
        let a = GapLogElement::from(gap.approximate(&eta, &eps));
        let dist = gap.abs(&gap.sub(&eta, &a));
        out.check("density", gap.cmp(&dist, &eps) == Ordering::Less, || format!("eta = {eta}, eps = {eps}"));
    }
    if index.is_multiple_of(10) {
        let base: Vec<LogElement> = (0..4).map(|_| rand_log(rng, 6)).collect();
        let samples = enrich(&LogModel, rng, &base);
        check_axioms(&LogModel, &samples, &[rand_nonzero(rng), ScalarValue::int(3)], &mut out);
        let gbase: Vec<GapLogElement> = (0..4).map(|_| rand_gap(rng)).collect();
        let gsamples = enrich(&gap, rng, &gbase);
        check_axioms(&gap, &gsamples, &[rand_nonzero(rng)], &mut out);
    }
    out
}

// ---------------------------------------------------------------------------
// the double-exponential example

fn mono(text: &str) -> Monomial {
    text.parse().unwrap_or_else(|e| panic!("bad monomial `{text}`: {e}"))
}

fn double_exp(b: &ScalarValue, c: &ScalarValue) -> Monomial {
    mono(&format!("exp({}*exp({}*x))", paren(b), paren(c)))
}

fn paren(q: &ScalarValue) -> String {
    if q.is_negative() || q.to_string().contains('/') {
        format!("({q})")
    } else {
        q.to_string()
    }
}

fn example_case(rng: &mut ChaCha8Rng, index: usize) -> Outcome {
    let mut out = Outcome::default();
    let t = TransModel;
    if index < 6 {
        let n = index + 1;
        let elems: Vec<Monomial> = (1..=n).map(|c| double_exp(&ScalarValue::one(), &ScalarValue::int(c as i64))).collect();
        let rank = span_rank(&t, &elems);
        out.check("span rank", rank == n, || format!("n = {n}: rank {rank}"));
        // The pairs (c, n) with c < n, over all six cases, cover every pair in 1..=6.
        for c in 1..n {
            let ord = t.class_cmp(&elems[c - 1], &elems[n - 1]);
            out.check("class inequality", ord == Ordering::Less, || format!("c = {c}, d = {n}"));
        }
        let cs: Vec<ScalarValue> = (0..2).map(|_| rand_positive(rng)).collect();
        let (lo, hi) = if cs[0] < cs[1] { (&cs[0], &cs[1]) } else { (&cs[1], &cs[0]) };
        if lo != hi {
            let ord = t.class_cmp(&double_exp(&ScalarValue::one(), lo), &double_exp(&ScalarValue::one(), hi));
            out.check("class inequality", ord == Ordering::Less, || format!("c = {lo}, d = {hi}"));
        }
    }
    let b = rand_nonzero(rng);
    let c = rand_positive(rng);
    let m = double_exp(&b, &c);
    let expected = mono(&format!("exp({}*x)", paren(&c)));
    out.check("psi(v(e^(b e^(cx)))) = v(e^(cx))", t.psi(&m).as_ref() == Some(&expected), || format!("b = {b}, c = {c}"));
    out
}

// ---------------------------------------------------------------------------
// classifier

fn rand_small_monomial(rng: &mut impl Rng) -> Monomial {
    let q = rand_nonzero(rng);
    let r = rand_scalar(rng);
    let text = match rng.gen_range(0..6) {
        0 => format!("x^{}", paren(&q)),
        1 => format!("l1^{} * x^{}", paren(&q), paren(&r)),
        2 => format!("exp({}*x)", paren(&q)),
        3 => format!("exp({}*x) * l2^{}", paren(&q), paren(&r)),
        4 => format!("exp({}*x^(1/2))", paren(&q)),
        _ => format!("exp({}*exp(1/2*x)) * x^{}", paren(&q), paren(&r)),
    };
    mono(&text)
}

fn classifier_case(rng: &mut ChaCha8Rng, index: usize) -> Outcome {
    let mut out = Outcome::default();
    let t = TransModel;
    let gamma = Span::psi_closed(&t, &[mono("x^(-1)")], 8).expect("{1} is psi-closed");
    let beta = mono("exp(exp(x))");
    let r = classify(&t, &gamma, &beta, DEFAULT_MAX_STEPS).expect("fixture classifies");
    if index == 0 {
        out.check("fixture verdict", r.verdict == Verdict::CaseDn(1), || r.verdict.to_string());
        let last = r.daggers.last().cloned();
        out.check("last dagger is 0", last == Some(Monomial::one()), || format!("{last:?}"));
        out.check("0 is not a psi-value of Gamma", !gamma.basis().iter().any(|g| t.psi(g) == Some(Monomial::one())), String::new);
        let checks = case_invariants(&t, &gamma, &r).expect("decided verdict");
        for item in &checks.items {
            out.check("case invariants", item.ok, || format!("{}: {}", item.name, item.detail));
        }
        let g = GapLogModel::new(GapCut::PsiDown);
        let ra = classify(&g, &LogSlice, &GapLogElement::lambda(), DEFAULT_MAX_STEPS).expect("gap classifies");
        out.check("gap verdict", ra.verdict == Verdict::CaseA, || ra.verdict.to_string());
        out.check("gap adds no psi-values", ra.new_psi_values().is_empty(), String::new);
        let checks = case_invariants(&g, &LogSlice, &ra).expect("decided verdict");
        for item in &checks.items {
            out.check("case invariants (gap)", item.ok, || format!("{}: {}", item.name, item.detail));
        }
    }
    let eps = loop {
        let e = rand_small_monomial(rng);
        if t.class_cmp(&e, &r.betas[0]) == Ordering::Less {
            break e;
        }
    };
    let same = certify_key_interval(&t, &gamma, &r, &eps, DEFAULT_MAX_STEPS);
    out.check("key interval", matches!(same, Ok(true)), || format!("eps = {eps}: {same:?}"));
    out
}

// ---------------------------------------------------------------------------
// monotone solver

fn rand_spec<E>(rng: &mut ChaCha8Rng, mut elem: impl FnMut(&mut ChaCha8Rng) -> E) -> PsiIterSpec<E> {
    let n = rng.gen_range(1..=3);
    let shifts: Vec<E> = (0..n).map(|_| elem(rng)).collect();
    let coeffs = (0..n).map(|_| ScalarValue::ratio(rng.gen_range(-3..=3), rng.gen_range(1..=2))).collect();
    PsiIterSpec::new(shifts, coeffs).expect("n >= 1")
}

fn monotone_checks<C: Graded>(
    c: &C,
    rng: &mut ChaCha8Rng,
    spec: &PsiIterSpec<C::Elem>,
    mut elem: impl FnMut(&mut ChaCha8Rng) -> C::Elem,
    out: &mut Outcome,
) {
    let mut pairs = 0;
    for _ in 0..48 {
        if pairs == 2 {
            break;
        }
        let a = elem(rng);
        let b = c.add(&a, &c.scale(&rand_nonzero(rng), &elem(rng)));
        let ka = component_key(c, &spec.shifts, &a);
        if a == b || ka.is_none() || ka != component_key(c, &spec.shifts, &b) {
            continue;
        }
        let fa = objective(c, spec, &a).expect("in domain");
        let fb = objective(c, spec, &b).expect("in domain");
        out.check("same-component pairs", c.cmp(&fa, &fb) == c.cmp(&a, &b), || format!("{a} vs {b}"));
        pairs += 1;
    }
    for _ in 0..24 {
        let g = elem(rng);
        let Some(tau) = objective(c, spec, &g) else { continue };
        let back = solve_monotone(c, spec, &tau);
        out.check("round trips", back.as_ref().ok() == Some(&g), || format!("gamma = {g}, tau = {tau}: {back:?}"));
        break;
    }
}

fn monotone_case(rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::default();
    if rng.gen_bool(0.5) {
        let spec = rand_spec(rng, |r| rand_log(r, 4));
        monotone_checks(&LogModel, rng, &spec, |r| rand_log(r, 4), &mut out);
    } else {
        let mut e = ClosureEngine::new(Presentation::p1()).expect("P1 seeds an engine");
        for _ in 0..rng.gen_range(0..5) {
            let stage = e.stage().clone();
            let q = if rng.gen_bool(0.5) {
                e.integrate(stage.max_psi().expect("grounded"))
            } else {
                match rand_cut_point(rng, &stage) {
                    Some(b) => e.psi_preimage(&b),
                    None => continue,
                }
            };
            if let Err(err) = q {
                out.check("stage construction", false, || err.to_string());
            }
        }
        let ctx = e.stage().basis().clone();
        let spec = rand_spec(rng, |r| rand_vector(r, &ctx));
        monotone_checks(&e, rng, &spec, |r| rand_vector(r, &ctx), &mut out);
    }
    out
}

// ---------------------------------------------------------------------------
// language

/// One fixture line: `model | formula | expected`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub line: usize,
    pub model: String,
    pub formula: String,
    pub expected: bool,
}

pub fn corpus_entries(text: &str) -> Result<Vec<CorpusEntry>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('|').map(str::trim).collect();
        let [model, formula, expected] = parts[..] else {
            return Err(format!("line {}: expected `model | formula | expected`", i + 1));
        };
        let expected = match expected {
            "true" => true,
            "false" => false,
            other => return Err(format!("line {}: expected true or false, found `{other}`", i + 1)),
        };
        out.push(CorpusEntry { line: i + 1, model: model.into(), formula: formula.into(), expected });
    }
    Ok(out)
}

/// Decides every corpus entry and returns the mismatches. Quantifier-free
/// lines go through [`decide_qf`]. `exists y. phi` lines go through
/// [`bounded_exists`]: a `true` line needs a witness, a `false` line must
/// produce none, and every witness is re-checked against `phi`.
pub fn corpus_failures(entries: &[CorpusEntry]) -> Vec<String> {
    let mut bad = Vec::new();
    for e in entries {
        let got = e.model.parse::<ModelHandle>().and_then(|h| {
            let f = parse_formula(&e.formula).map_err(|x| x.to_string())?;
            with_model!(&h, c => corpus_value(c, &f))
        });
        if got != Ok(e.expected) {
            bad.push(format!("line {}: {} in {}: expected {}, got {got:?}", e.line, e.formula, e.model, e.expected));
        }
    }
    bad
}

fn corpus_value<C: Couple>(c: &C, f: &Formula) -> Result<bool, String> {
    if f.is_quantifier_free() {
        return decide_qf(c, f).map_err(|x| x.to_string());
    }
    let Formula::Exists(v, body) = f else { return Err("only `exists` lines may quantify".into()) };
    match bounded_exists(c, f, CORPUS_BUDGET, &[]).map_err(|x| x.to_string())? {
        ExistsOutcome::Witness(w) => {
            let asg = Assignment::default().with_vector(&v.name, w.clone());
            match eval_qf(c, body, &asg) {
                Ok(true) => Ok(true),
                other => Err(format!("unverified witness {w}: {other:?}")),
            }
        }
        ExistsOutcome::UnknownWithinBudget => Ok(false),
    }
}

const CORPUS_BUDGET: usize = 48;

fn rand_vterm<R: Rng>(rng: &mut R, consts: &[String], depth: usize) -> VTerm {
    if depth == 0 || rng.gen_bool(0.35) {
        return match rng.gen_range(0..5) {
            0 => VTerm::Zero,
            1 => VTerm::One,
            2 | 3 => VTerm::Var("y".into()),
            _ => VTerm::Const(consts[rng.gen_range(0..consts.len())].clone()),
        };
    }
    let sub = |rng: &mut R| Box::new(rand_vterm(rng, consts, depth - 1));
    match rng.gen_range(0..4) {
        0 => VTerm::Neg(sub(rng)),
        1 => VTerm::Psi(sub(rng)),
        2 => VTerm::Add(sub(rng), sub(rng)),
        _ => VTerm::Sc(Box::new(crate::lang::STerm::Const(rand_nonzero(rng))), sub(rng)),
    }
}

fn rand_matrix<R: Rng>(rng: &mut R, consts: &[String], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.5) {
        let a = rand_vterm(rng, consts, 2);
        let b = rand_vterm(rng, consts, 2);
        return match rng.gen_range(0..3) {
            0 => Formula::VEq(a, b),
            1 => Formula::VLt(a, b),
            _ => Formula::P(a),
        };
    }
    let sub = |rng: &mut R| Box::new(rand_matrix(rng, consts, depth - 1));
    match rng.gen_range(0..3) {
        0 => Formula::Not(sub(rng)),
        1 => Formula::And(sub(rng), sub(rng)),
        _ => Formula::Or(sub(rng), sub(rng)),
    }
}

fn exists_checks<C: Couple>(c: &C, rng: &mut impl Rng, consts: &[String], out: &mut Outcome) {
    let matrix = rand_matrix(rng, consts, 2);
    let f = Formula::Exists(Binder { name: "y".into(), sort: Sort::Vector }, Box::new(matrix.clone()));
    match bounded_exists(c, &f, 24, &[]) {
        Ok(ExistsOutcome::Witness(w)) => {
            let holds = eval_qf(c, &matrix, &Assignment::default().with_vector("y", w.clone()));
            out.check("verified witnesses", holds == Ok(true), || format!("{f} with y = {w} in {}", c.name()));
        }
        Ok(ExistsOutcome::UnknownWithinBudget) => out.count("unknown within budget"),
        Err(e) => out.check("search runs", false, || format!("{f}: {e}")),
    }
}

fn language_case(rng: &mut ChaCha8Rng, index: usize) -> Outcome {
    let mut out = Outcome::default();
    if index == 0 {
        let scalars = [ScalarValue::zero(), ScalarValue::one(), ScalarValue::ratio(-3, 2), ScalarValue::int(4)];
        let p = Presentation::p2();
        let pv: Vec<VecElement> = ["0", "b1", "-b2", "b1 + 1/2*b2"].iter().map(|s| p.parse_vector(s).expect("literal")).collect();
        let lv: Vec<LogElement> = ["0", "e0", "-e1 + 2*e3"].iter().map(|s| s.parse().expect("literal")).collect();
        let tv: Vec<Monomial> = ["1", "x", "exp(exp(x))", "l1^(-2)"].iter().map(|s| mono(s)).collect();
        let g = GapLogModel::new(GapCut::PsiDown);
        let gv: Vec<GapLogElement> = ["0", "lambda", "e1 - lambda"].iter().map(|s| s.parse().expect("literal")).collect();
        let mut fails = infinity_default_failures(&p, &pv, &scalars);
        fails.extend(infinity_default_failures(&LogModel, &lv, &scalars));
        fails.extend(infinity_default_failures(&TransModel, &tv, &scalars));
        fails.extend(infinity_default_failures(&g, &gv, &scalars));
        out.check("infinity defaults", fails.is_empty(), || fails.join("; "));
        match corpus_entries(CORPUS) {
            Ok(entries) => {
                let qf = entries.iter().filter(|e| !e.formula.trim_start().starts_with("exists")).count();
                out.count_n("corpus formulas", qf as u64);
                out.count_n("corpus existentials", (entries.len() - qf) as u64);
                let bad = corpus_failures(&entries);
                out.check("corpus", bad.is_empty(), || bad.join("; "));
            }
            Err(e) => out.check("corpus", false, || e),
        }
    }
    match rng.gen_range(0..5) {
        0 => {
            let p = Presentation::p1();
            exists_checks(&p, rng, &["b1".into(), "-2*b1".into(), "1/2*b1".into()], &mut out)
        }
        1 => {
            let p = Presentation::p2();
            exists_checks(&p, rng, &["b1 + b2".into(), "-b2".into(), "b2".into()], &mut out)
        }
        2 => exists_checks(&LogModel, rng, &["e0".into(), "-e0 - e1".into(), "e2".into()], &mut out),
        3 => exists_checks(&GapLogModel::new(GapCut::PsiDown), rng, &["lambda".into(), "e1".into()], &mut out),
        _ => exists_checks(&TransModel, rng, &["x".into(), "exp(x)".into(), "l1".into()], &mut out),
    }
    out
}

// ---------------------------------------------------------------------------
// scalar extension

fn sqrt2_scalar(rng: &mut impl Rng) -> ScalarValue {
    let b = rand_nonzero(rng);
    &rand_scalar(rng) + &(&b * &ScalarValue::sqrt(2).expect("2 is square-free"))
}

fn scalar_case(rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::default();
    let p = rand_presentation(rng, 5);
    let field = ScalarField::Quadratic(2);
    let q = match scalar_extend(&p, field) {
        Ok(q) => q,
        Err(e) => {
            out.check("scalar extension applies", false, || e.to_string());
            return out;
        }
    };
    out.check("extended presentation validates", q.validate().is_ok(), || q.validate().to_string());
    out.check("Psi preserved", psi_set(&p) == psi_set(&q), || p.name());
    out.check("trichotomy preserved", p.trichotomy() == q.trichotomy(), || p.name());
    let ids = q.basis().ids();
    let lead = rng.gen_range(0..ids.len());
    let c = sqrt2_scalar(rng);
    let mut v = VecElement::term(&ids[lead], c.clone());
    for id in &ids[lead + 1..] {
        v.add_term(id, &sqrt2_scalar(rng));
    }
    out.check("sign of leading coefficient", q.basis().sign(&v).ok() == Some(c.signum()), || format!("{v}"));

    // separation inside a slice of Gamma_L over Q(sqrt 2)
    let n = rng.gen_range(0..=4);
    let k0 = rng.gen_range(0..=n);
    let mut star = LogElement::from_terms((0..=n).map(|k| (k, rand_scalar(rng))));
    let irr = sqrt2_scalar(rng);
    star = star.add(&LogElement::term(k0, &irr - &star.coeff(k0)));
    let first_irr = (0..=n).find(|&k| star.coeff(k).as_rational().is_none()).expect("k0 is irrational");
    let eps = LogElement::e(first_irr + 1).neg();
    let rational_part = |x: &ScalarValue| match x {
        ScalarValue::Rational(r) => ScalarValue::Rational(r.clone()),
        ScalarValue::QuadExt { a, .. } => ScalarValue::Rational(a.clone()),
    };
    // convergents p/q of sqrt 2
    let convergents = [(1, 1), (3, 2), (7, 5), (17, 12), (41, 29), (99, 70), (239, 169), (577, 408)];
    let mut fails = Vec::new();
    for j in 0..20 {
        let mut g = LogElement::from_terms((0..=n).map(|k| (k, rational_part(&star.coeff(k)))));
        if j < convergents.len() {
            let (a, b) = convergents[j];
            if let ScalarValue::QuadExt { b: bq, .. } = star.coeff(first_irr) {
                let extra = &ScalarValue::Rational(bq) * &ScalarValue::ratio(a, b);
                g = g.add(&LogElement::term(first_irr, extra));
            }
        } else {
            g = g.add(&rand_log(rng, n));
        }
        let dist = LogModel.abs(&star.sub(&g));
        if LogModel.cmp(&dist, &eps) != Ordering::Greater {
            fails.push(format!("|{star} - ({g})| <= {eps}"));
        }
    }
    out.check("separation", fails.is_empty(), || fails.join("; "));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_presentations_validate() {
        let mut rng = case_rng(7, 0);
        for _ in 0..50 {
            let p = rand_presentation(&mut rng, 6);
            assert!(p.validate().is_ok());
            assert!(p.basis().len() <= 6);
        }
    }

    #[test]
    fn runs_are_reproducible_across_thread_counts() {
        let a = run_suite(Suite::Closure, 11, 24, 1);
        let b = run_suite(Suite::Closure, 11, 24, 3);
        assert_eq!(a.counts, b.counts);
        assert!(a.passed() && b.passed(), "{a}");
    }

    #[test]
    fn every_suite_passes_a_small_run() {
        for s in Suite::ALL {
            let r = run_suite(s, 3, 12, 0);
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.to_string().parse::<Suite>(), Ok(s));
        }
    }

    #[test]
    fn shipped_corpus_holds() {
        let entries = corpus_entries(CORPUS).unwrap();
        assert!(entries.len() >= 50);
        let bad = corpus_failures(&entries);
        assert!(bad.is_empty(), "{}", bad.join("\n"));
    }

    #[test]
    fn corpus_lines_parse() {
        let e = corpus_entries("p1 | P(1) | true  # comment\n\n# only a comment\n").unwrap();
        assert_eq!(e.len(), 1);
        assert!(corpus_entries("p1 | P(1)").is_err());
        assert!(corpus_entries("p1 | P(1) | maybe").is_err());
    }
}
