//! Shared verdict type for the finite-range identity checks.
//!
//! Every check in this crate verifies an algebraic identity over the monomial
//! range `x^0 .. x^N` and reports either "holds up to N" or the first basis
//! pair at which the identity fails, with the exact residual polynomial.

use serde::{Deserialize, Serialize};

use crate::poly::Poly;

/// First basis pair `(x^m, x^n)` violating a checked identity, with the
/// residual (left side minus right side) at that pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub m: usize,
    pub n: usize,
    pub residual: Poly,
}

/// Outcome of a finite-range check.
///
/// `holds` is true exactly when `counterexample` is absent; `bound` records
/// the `N` the check ran at, so a verdict is never quoted without its range.
/// `note` optionally names the specific condition that failed when a check
/// verifies several at once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RBReport {
    pub holds: bool,
    pub bound: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl RBReport {
    /// A passing report at bound `N`.
    pub fn holding(bound: usize) -> Self {
        RBReport {
            holds: true,
            bound,
            counterexample: None,
            note: None,
        }
    }

    /// A failing report with the violating pair and residual.
    pub fn failing(bound: usize, m: usize, n: usize, residual: Poly) -> Self {
        RBReport {
            holds: false,
            bound,
            counterexample: Some(Counterexample { m, n, residual }),
            note: None,
        }
    }

    /// Attaches the name of the violated condition.
    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}
