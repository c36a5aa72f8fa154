//! Named couples, so that front ends and fixture files can pick a model by
//! a short string.
//!
//! | name            | couple                                        |
//! |-----------------|-----------------------------------------------|
//! | `p1`, `p2`      | the named presentations                       |
//! | `chain<n>`      | the first `n` log classes as a presentation   |
//! | `log`           | ΓL                                            |
//! | `log-shifted`   | ΓL with ψ shifted by `2 e0` (`0 notin P`)     |
//! | `gap`           | ΓL plus its gap, `P` excluding it             |
//! | `gap-p`         | ΓL plus its gap, `P` including it             |
//! | `gap-removed+`  | the gap removed with `alpha > 0`              |
//! | `gap-removed-`  | the gap removed with `alpha < 0`              |
//! | `trans`         | bounded-height transmonomials                 |

use std::fmt;
use std::str::FromStr;

use crate::couple::Presentation;
use crate::extend::GapSide;
use crate::scalar::ScalarValue;
use crate::tmodel::{GapCut, GapLogModel, GapRemovedModel, LogElement, LogModel, ShiftedLogModel, TransModel};

/// Runs `$body` with `$c` bound to the concrete couple inside a
/// [`ModelHandle`].
#[macro_export]
macro_rules! with_model {
    ($handle:expr, $c:ident => $body:expr) => {
        match $handle {
            $crate::handle::ModelHandle::Presentation($c) => $body,
            $crate::handle::ModelHandle::Log($c) => $body,
            $crate::handle::ModelHandle::Shifted($c) => $body,
            $crate::handle::ModelHandle::Gap($c) => $body,
            $crate::handle::ModelHandle::GapRemoved($c) => $body,
            $crate::handle::ModelHandle::Trans($c) => $body,
        }
    };
}

#[derive(Debug, Clone)]
pub enum ModelHandle {
    Presentation(Presentation),
    Log(LogModel),
    Shifted(ShiftedLogModel),
    Gap(GapLogModel),
    GapRemoved(GapRemovedModel),
    Trans(TransModel),
}

impl ModelHandle {
    pub fn shifted() -> Self {
        ModelHandle::Shifted(ShiftedLogModel::new(LogElement::e(0).scale(&ScalarValue::int(2))))
    }

    pub fn names() -> &'static [&'static str] {
        &["p1", "p2", "chain<n>", "log", "log-shifted", "gap", "gap-p", "gap-removed+", "gap-removed-", "trans"]
    }
}

impl FromStr for ModelHandle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "p1" => ModelHandle::Presentation(Presentation::p1()),
            "p2" => ModelHandle::Presentation(Presentation::p2()),
            "log" => ModelHandle::Log(LogModel),
            "log-shifted" => ModelHandle::shifted(),
            "gap" => ModelHandle::Gap(GapLogModel::new(GapCut::PsiDown)),
            "gap-p" => ModelHandle::Gap(GapLogModel::new(GapCut::WithGap)),
            "gap-removed+" => ModelHandle::GapRemoved(GapRemovedModel { side: GapSide::Positive }),
            "gap-removed-" => ModelHandle::GapRemoved(GapRemovedModel { side: GapSide::Negative }),
            "trans" => ModelHandle::Trans(TransModel),
            other => match other.strip_prefix("chain").and_then(|n| n.parse::<usize>().ok()) {
                Some(n) if (1..=64).contains(&n) => ModelHandle::Presentation(Presentation::log_chain(n)),
                _ => return Err(format!("unknown model `{other}`; expected one of {}", Self::names().join(", "))),
            },
        })
    }
}

impl fmt::Display for ModelHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::model::Couple;
        f.write_str(&with_model!(self, c => c.name()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        for n in ["p1", "p2", "chain4", "log", "log-shifted", "gap", "gap-p", "gap-removed+", "gap-removed-", "trans"] {
            assert!(n.parse::<ModelHandle>().is_ok(), "{n}");
        }
        assert!("chain0".parse::<ModelHandle>().is_err());
        assert!("reals".parse::<ModelHandle>().is_err());
        let h: ModelHandle = "chain3".parse().unwrap();
        assert_eq!(h.to_string(), "presentation[b1,b2,b3]");
    }
}
