//! JSON documents for presentations, vectors and extension results.
//!
//! Every scalar is an exact string; vectors are lists of `[basis, scalar]`
//! pairs in class order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::couple::{CoupleError, HCutSpec, Presentation};
use crate::extend::ExtensionResult;
use crate::foundation::{BasisContext, BasisId, VecElement};
use crate::scalar::{ScalarError, ScalarField, ScalarValue};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Couple(#[from] CoupleError),
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("unknown cut `{0}`")]
    Cut(String),
}

pub type VecDoc = Vec<(String, String)>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum CutDoc {
    Named(String),
    Gap { gap: VecDoc },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PresentationDoc {
    #[serde(default = "default_version")]
    version: u32,
    scalars: String,
    basis: Vec<String>,
    psi: BTreeMap<String, VecDoc>,
    unit: VecDoc,
    cut: CutDoc,
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

pub fn vector_to_doc(ctx: &BasisContext, v: &VecElement) -> VecDoc {
    ctx.sorted_terms(v).into_iter().map(|(k, c)| (k.to_string(), c.to_string())).collect()
}

pub fn vector_from_doc(doc: &VecDoc) -> Result<VecElement, ScalarError> {
    let mut v = VecElement::zero();
    for (k, c) in doc {
        v.add_term(&BasisId::new(k), &c.parse::<ScalarValue>()?);
    }
    Ok(v)
}

/// Parses a vector given as JSON text such as `[["b1","1"],["b2","-1/2"]]`.
pub fn parse_vector_json(text: &str) -> Result<VecElement, FormatError> {
    let doc: VecDoc = serde_json::from_str(text)?;
    Ok(vector_from_doc(&doc)?)
}

pub fn vector_json(ctx: &BasisContext, v: &VecElement) -> Value {
    serde_json::to_value(vector_to_doc(ctx, v)).expect("string pairs serialize")
}

fn to_doc(p: &Presentation) -> PresentationDoc {
    let ctx = p.basis();
    PresentationDoc {
        version: FORMAT_VERSION,
        scalars: p.field().to_string(),
        basis: ctx.ids().iter().map(|b| b.to_string()).collect(),
        psi: p.psi_table().iter().map(|(k, v)| (k.to_string(), vector_to_doc(ctx, v))).collect(),
        unit: vector_to_doc(ctx, p.unit()),
        cut: match p.cut() {
            HCutSpec::PsiDown => CutDoc::Named("psidown".to_string()),
            HCutSpec::PsiDownPlusGap(g) => CutDoc::Gap { gap: vector_to_doc(ctx, g) },
        },
    }
}

pub fn presentation_to_value(p: &Presentation) -> Value {
    serde_json::to_value(to_doc(p)).expect("document serializes")
}

/// Canonical pretty-printed text; identical presentations give identical bytes.
pub fn presentation_to_string(p: &Presentation) -> String {
    serde_json::to_string_pretty(&to_doc(p)).expect("document serializes")
}

/// Reads a presentation. Structural problems are errors; the axioms are not
/// checked here, see [`Presentation::validate`].
pub fn presentation_from_value(value: Value) -> Result<Presentation, FormatError> {
    let doc: PresentationDoc = serde_json::from_value(value)?;
    if doc.version != FORMAT_VERSION {
        return Err(FormatError::Version(doc.version));
    }
    let field: ScalarField = doc.scalars.parse()?;
    let basis = BasisContext::new(doc.basis.iter().map(|b| BasisId::new(b))).map_err(CoupleError::from)?;
    let mut psi = BTreeMap::new();
    for (k, v) in &doc.psi {
        psi.insert(BasisId::new(k), vector_from_doc(v)?);
    }
    let cut = match &doc.cut {
        CutDoc::Named(name) if name == "psidown" => HCutSpec::PsiDown,
        CutDoc::Named(name) => return Err(FormatError::Cut(name.clone())),
        CutDoc::Gap { gap } => HCutSpec::PsiDownPlusGap(vector_from_doc(gap)?),
    };
    let unit = vector_from_doc(&doc.unit)?;
    Ok(Presentation::new(field, basis, psi, cut, unit)?)
}

pub fn presentation_from_str(text: &str) -> Result<Presentation, FormatError> {
    presentation_from_value(serde_json::from_str(text)?)
}

/// The presentation document plus an `embedding` section.
pub fn extension_to_value(r: &ExtensionResult) -> Value {
    let ctx = r.extended.basis();
    let mut doc = presentation_to_value(&r.extended);
    let embedding: BTreeMap<String, String> =
        r.embedding.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    let predicted: Vec<VecDoc> = r.report.predicted_psi.iter().map(|v| vector_to_doc(ctx, v)).collect();
    doc["embedding"] = serde_json::json!({
        "map": embedding,
        "kind": r.report.kind.to_string(),
        "newBasisId": r.new_basis_id.to_string(),
        "adjoined": vector_to_doc(ctx, &r.adjoined),
        "slot": r.report.slot,
        "predictedPsi": predicted,
        "newMaxPsi": vector_to_doc(ctx, &r.report.new_max_psi),
    });
    doc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_named_presentations() {
        for p in [Presentation::p1(), Presentation::p2(), Presentation::log_chain(4)] {
            let text = presentation_to_string(&p);
            let back = presentation_from_str(&text).unwrap();
            assert_eq!(back, p);
            assert_eq!(presentation_to_string(&back), text);
        }
    }

    #[test]
    fn reads_the_documented_layout() {
        let text = r#"{"scalars":"Q","basis":["b1"],"psi":{"b1":[["b1","1"]]},"unit":[["b1","1"]],"cut":"psidown"}"#;
        let p = presentation_from_str(text).unwrap();
        assert_eq!(p, Presentation::p1());
        let gap = r#"{"scalars":"Q(sqrt 2)","basis":["b1"],"psi":{"b1":[["b1","1"]]},"unit":[["b1","1"]],"cut":{"gap":[["b1","1/2+sqrt2"]]}}"#;
        let p = presentation_from_str(gap).unwrap();
        assert_eq!(p.field(), ScalarField::Quadratic(2));
        assert!(matches!(p.cut(), HCutSpec::PsiDownPlusGap(_)));
        assert!(presentation_from_str(&text.replace("psidown", "other")).is_err());
        assert!(presentation_from_str(&text.replace("\"1\"]]}", "\"x\"]]}")).is_err());
    }

    #[test]
    fn vectors_are_listed_in_class_order() {
        let p = Presentation::log_chain(3);
        let v = p.parse_vector("b3 - 1/2*b1").unwrap();
        let doc = vector_to_doc(p.basis(), &v);
        assert_eq!(doc, vec![("b1".to_string(), "-1/2".to_string()), ("b3".to_string(), "1".to_string())]);
        assert_eq!(parse_vector_json(r#"[["b1","-1/2"],["b3","1"]]"#).unwrap(), v);
    }
}
