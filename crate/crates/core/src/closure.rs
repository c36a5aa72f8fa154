//! A lazy, query-driven approximation of the H-closure of a finitely
//! presented normalized H-triple.
//!
//! The engine starts from a seed presentation and grows a chain of stages.
//! Each query materializes at most one extension step: either
//! [`extend_grounded`] (integrating `max Psi`) or [`adjoin_psi_value`]
//! (realizing a new ψ-value below `max Psi`). At every stage the cut is the
//! downward closure of the current Ψ. Taking the downward closure of the
//! seed's Ψ instead would not give an H-cut as soon as a step adds a larger
//! ψ-value, so every stage carries the cut `Ψ↓` of its own Ψ.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::couple::{CoupleError, HCutSpec, Presentation};
use crate::extend::{adjoin_psi_value, extend_grounded, ExtendError, ExtensionResult};
use crate::format::{vector_from_doc, vector_to_doc, VecDoc, FORMAT_VERSION};
use crate::foundation::{ArchClass, BasisId, ExtVec, VecElement};
use crate::model::{Couple, Trichotomous, Trichotomy};
use crate::scalar::{ScalarError, ScalarValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosureError {
    #[error(transparent)]
    Couple(#[from] CoupleError),
    #[error(transparent)]
    Extend(#[from] ExtendError),
    #[error("{0} is not in the cut of the current stage")]
    NotInCut(String),
    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),
    #[error("seed must be a validated nontrivial presentation with cut psidown: {0}")]
    BadSeed(String),
    #[error("replay diverged at record {index}: expected {expected}, got {found}")]
    ReplayMismatch { index: usize, expected: String, found: String },
    #[error("malformed history: {0}")]
    History(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryOp {
    Integrate,
    PsiPreimage,
}

impl fmt::Display for QueryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryOp::Integrate => "integrate",
            QueryOp::PsiPreimage => "psi-preimage",
        })
    }
}

impl FromStr for QueryOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "integrate" => Ok(QueryOp::Integrate),
            "psi-preimage" | "psiPreimage" => Ok(QueryOp::PsiPreimage),
            other => Err(format!("unknown query `{other}`")),
        }
    }
}

/// One answered query. `adjoined` names the basis vector the query added, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryRecord {
    pub op: QueryOp,
    pub input: VecElement,
    pub adjoined: Option<BasisId>,
    pub answer: VecElement,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RecordDoc {
    op: QueryOp,
    input: VecDoc,
    adjoined_basis_id: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct HistoryDoc {
    #[serde(default = "default_version")]
    version: u32,
    history: Vec<RecordDoc>,
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Debug, Clone)]
pub struct ClosureEngine {
    seed: Presentation,
    stage: Presentation,
    steps: Vec<ExtensionResult>,
    history: Vec<HistoryRecord>,
    integrals: HashMap<VecElement, VecElement>,
    preimages: HashMap<VecElement, VecElement>,
}

impl ClosureEngine {
    pub fn new(seed: Presentation) -> Result<Self, ClosureError> {
        if seed.is_trivial() {
            return Err(ClosureError::BadSeed("the zero couple".into()));
        }
        if !matches!(seed.cut(), HCutSpec::PsiDown) {
            return Err(ClosureError::BadSeed("declared gap".into()));
        }
        let report = seed.validate();
        if !report.is_ok() {
            return Err(ClosureError::BadSeed(report.to_string()));
        }
        Ok(ClosureEngine {
            stage: seed.clone(),
            seed,
            steps: Vec::new(),
            history: Vec::new(),
            integrals: HashMap::new(),
            preimages: HashMap::new(),
        })
    }

    pub fn seed(&self) -> &Presentation {
        &self.seed
    }

    pub fn stage(&self) -> &Presentation {
        &self.stage
    }

    /// The extension steps taken so far, oldest first.
    pub fn steps(&self) -> &[ExtensionResult] {
        &self.steps
    }

    pub fn history(&self) -> &[HistoryRecord] {
        &self.history
    }

    /// The seed followed by every later stage.
    pub fn stages(&self) -> Vec<&Presentation> {
        std::iter::once(&self.seed).chain(self.steps.iter().map(|s| &s.extended)).collect()
    }

    pub fn query(&mut self, op: QueryOp, input: &VecElement) -> Result<VecElement, ClosureError> {
        match op {
            QueryOp::Integrate => self.integrate(input),
            QueryOp::PsiPreimage => self.psi_preimage(input),
        }
    }

    /// The unique `alpha != 0` with `alpha + psi(alpha) = gamma`.
    pub fn integrate(&mut self, gamma: &VecElement) -> Result<VecElement, ClosureError> {
        self.stage.check_element(gamma)?;
        if let Some(hit) = self.integrals.get(gamma).cloned() {
            self.record(QueryOp::Integrate, gamma, None, &hit);
            return Ok(hit);
        }
        let (answer, adjoined) = match integrate_in_stage(&self.stage, gamma) {
            Some(alpha) => (alpha, None),
            None => {
                if self.stage.max_psi() != Some(gamma) {
                    return Err(ClosureError::InternalInvariantViolation(format!(
                        "{} has no integral although it is not max Psi",
                        self.stage.render(gamma)
                    )));
                }
                let step = extend_grounded(&self.stage)?;
                let alpha = step.adjoined.clone();
                let id = step.new_basis_id.clone();
                self.push(step);
                (alpha, Some(id))
            }
        };
        let check = self.stage.derive(&ExtVec::Finite(answer.clone()));
        if check != ExtVec::Finite(gamma.clone()) {
            return Err(ClosureError::InternalInvariantViolation(format!(
                "integral {} of {} differentiates to {check}",
                self.stage.render(&answer),
                self.stage.render(gamma)
            )));
        }
        self.integrals.insert(gamma.clone(), answer.clone());
        self.record(QueryOp::Integrate, gamma, adjoined, &answer);
        Ok(answer)
    }

    /// A positive `alpha` with `psi(alpha) = beta`, for `beta` in the cut.
    pub fn psi_preimage(&mut self, beta: &VecElement) -> Result<VecElement, ClosureError> {
        self.stage.check_element(beta)?;
        if let Some(hit) = self.preimages.get(beta).cloned() {
            self.record(QueryOp::PsiPreimage, beta, None, &hit);
            return Ok(hit);
        }
        let (answer, adjoined) = if let Some(id) = self.stage.psi_preimage_class(beta) {
            (VecElement::basis(id), None)
        } else {
            if !self.stage.cut_member(beta) {
                return Err(ClosureError::NotInCut(self.stage.render(beta)));
            }
            let step = adjoin_psi_value(&self.stage, beta)?;
            let alpha = step.adjoined.clone();
            let id = step.new_basis_id.clone();
            self.push(step);
            (alpha, Some(id))
        };
        let ok = self.stage.sign(&answer) == Ordering::Greater && self.stage.psi_of(&answer) == Some(beta);
        if !ok {
            return Err(ClosureError::InternalInvariantViolation(format!(
                "preimage {} of {} is wrong",
                self.stage.render(&answer),
                self.stage.render(beta)
            )));
        }
        self.preimages.insert(beta.clone(), answer.clone());
        self.record(QueryOp::PsiPreimage, beta, adjoined, &answer);
        Ok(answer)
    }

    fn push(&mut self, step: ExtensionResult) {
        self.stage = step.extended.clone();
        self.steps.push(step);
    }

    fn record(&mut self, op: QueryOp, input: &VecElement, adjoined: Option<BasisId>, answer: &VecElement) {
        self.history.push(HistoryRecord { op, input: input.clone(), adjoined, answer: answer.clone() });
    }

    /// Re-checks every recorded answer against the current stage.
    pub fn answer_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, r) in self.history.iter().enumerate() {
            let ok = match r.op {
                QueryOp::Integrate => {
                    self.stage.derive(&ExtVec::Finite(r.answer.clone())) == ExtVec::Finite(r.input.clone())
                }
                QueryOp::PsiPreimage => {
                    self.stage.sign(&r.answer) == Ordering::Greater && self.stage.psi_of(&r.answer) == Some(&r.input)
                }
            };
            if !ok {
                out.push(format!("record {i} ({}) of {} no longer holds", r.op, self.stage.render(&r.input)));
            }
        }
        out
    }

    /// Serializes the query log as `{version, history: [{op, input, adjoinedBasisId}]}`.
    pub fn history_json(&self) -> serde_json::Value {
        let ctx = self.stage.basis();
        let doc = HistoryDoc {
            version: FORMAT_VERSION,
            history: self
                .history
                .iter()
                .map(|r| RecordDoc {
                    op: r.op,
                    input: vector_to_doc(ctx, &r.input),
                    adjoined_basis_id: r.adjoined.as_ref().map(|b| b.to_string()),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("history serializes")
    }

    /// Replays a saved history from `seed`, checking that every query adjoins
    /// the same basis vector as recorded.
    pub fn replay(seed: Presentation, history: &serde_json::Value) -> Result<Self, ClosureError> {
        let doc: HistoryDoc =
            serde_json::from_value(history.clone()).map_err(|e| ClosureError::History(e.to_string()))?;
        if doc.version != FORMAT_VERSION {
            return Err(ClosureError::History(format!("unsupported version {}", doc.version)));
        }
        let mut engine = ClosureEngine::new(seed)?;
        for (index, r) in doc.history.iter().enumerate() {
            let input = vector_from_doc(&r.input).map_err(|e: ScalarError| ClosureError::History(e.to_string()))?;
            engine.query(r.op, &input)?;
            let found = engine.history.last().and_then(|h| h.adjoined.as_ref()).map(|b| b.to_string());
            if found != r.adjoined_basis_id {
                let show = |o: &Option<String>| o.clone().unwrap_or_else(|| "none".into());
                return Err(ClosureError::ReplayMismatch {
                    index,
                    expected: show(&r.adjoined_basis_id),
                    found: show(&found),
                });
            }
        }
        Ok(engine)
    }
}

/// Integration inside one presentation: `alpha = gamma - psi(c)` for the class
/// `c` with `[alpha] = c`, if there is one.
pub fn integrate_in_stage(p: &Presentation, gamma: &VecElement) -> Option<VecElement> {
    p.basis().ids().iter().find_map(|id| {
        let alpha = gamma.sub(&p.psi_table()[id]);
        (p.class_of(&alpha) == ArchClass::Class(id.clone())).then_some(alpha)
    })
}

impl Trichotomous for ClosureEngine {
    type Point = VecElement;

    fn trichotomy(&self) -> Option<Trichotomy<VecElement>> {
        self.stage.trichotomy()
    }
}

impl Couple for ClosureEngine {
    type Elem = VecElement;

    fn name(&self) -> String {
        format!("closure stage {} ({} classes)", self.steps.len(), self.stage.basis().len())
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
        self.stage.compare(a, b)
    }

    fn psi(&self, a: &VecElement) -> Option<VecElement> {
        self.stage.psi_of(a).cloned()
    }

    fn class_cmp(&self, a: &VecElement, b: &VecElement) -> Ordering {
        Couple::class_cmp(&self.stage, a, b)
    }

    fn colon(&self, a: &VecElement, b: &VecElement) -> Option<ScalarValue> {
        Couple::colon(&self.stage, a, b)
    }

    fn in_cut(&self, a: &VecElement) -> bool {
        self.stage.cut_member(a)
    }

    fn unit(&self) -> Option<VecElement> {
        Some(self.stage.unit().clone())
    }

    fn parse_element(&self, text: &str) -> Result<VecElement, String> {
        self.stage.parse_vector(text)
    }

    fn smaller_class_positive(&self, a: &VecElement) -> Option<VecElement> {
        Couple::smaller_class_positive(&self.stage, a)
    }

    fn try_integrate(&self, gamma: &VecElement) -> Option<VecElement> {
        integrate_in_stage(&self.stage, gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::is_definably_closed;

    fn v(e: &ClosureEngine, s: &str) -> VecElement {
        e.stage().parse_vector(s).unwrap()
    }

    #[test]
    fn integrates_inside_and_beyond_the_seed() {
        let mut e = ClosureEngine::new(Presentation::p1()).unwrap();
        assert_eq!(e.integrate(&VecElement::zero()).unwrap(), v(&e, "-b1"));
        assert_eq!(e.integrate(&v(&e, "-2*b1")).unwrap(), v(&e, "-3*b1"));
        assert!(e.steps().is_empty());
        let a = e.integrate(&v(&e, "b1")).unwrap();
        assert_eq!(a, v(&e, "-b2"));
        assert_eq!(e.stage(), &Presentation::p2());
        assert_eq!(e.history().last().unwrap().adjoined, Some(BasisId::new("b2")));
        assert_eq!(e.integrate(&v(&e, "b1")).unwrap(), a);
        assert_eq!(e.steps().len(), 1);
        assert!(e.answer_failures().is_empty());
    }

    #[test]
    fn psi_preimages() {
        let mut e = ClosureEngine::new(Presentation::p1()).unwrap();
        assert_eq!(e.psi_preimage(&v(&e, "b1")).unwrap(), v(&e, "b1"));
        let u = e.psi_preimage(&v(&e, "1/2*b1")).unwrap();
        assert_eq!(u, v(&e, "b2"));
        assert_eq!(e.stage().basis().position(&BasisId::new("b2")).unwrap(), 0);
        assert_eq!(e.stage().psi_of(&u), Some(&v(&e, "1/2*b1")));
        assert!(matches!(e.psi_preimage(&v(&e, "2*b1")), Err(ClosureError::NotInCut(_))));
    }

    #[test]
    fn replay_reproduces_stages() {
        let mut e = ClosureEngine::new(Presentation::p1()).unwrap();
        e.integrate(&v(&e, "b1")).unwrap();
        e.psi_preimage(&v(&e, "b1 + 1/2*b2")).unwrap();
        e.integrate(&e.stage().max_psi().unwrap().clone()).unwrap();
        let log = e.history_json();
        let again = ClosureEngine::replay(Presentation::p1(), &log).unwrap();
        assert_eq!(again.stage(), e.stage());
        let mut tampered = log.clone();
        tampered["history"][0]["adjoinedBasisId"] = serde_json::Value::Null;
        assert!(matches!(
            ClosureEngine::replay(Presentation::p1(), &tampered),
            Err(ClosureError::ReplayMismatch { index: 0, .. })
        ));
    }

    #[test]
    fn definable_closure_criterion() {
        let e = ClosureEngine::new(Presentation::p2()).unwrap();
        assert!(!is_definably_closed(&e));
        assert!(!is_definably_closed(&Presentation::p2()));
        assert!(!is_definably_closed(&Presentation::zero()));
    }
}
