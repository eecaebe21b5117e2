//! Exact arithmetic for weight-zero Rota-Baxter operators on the rational
//! polynomial algebra Q[x].
//!
//! A linear operator `P` on Q[x] is Rota-Baxter of weight zero when
//!
//! ```text
//! P(u) P(v) = P(u P(v)) + P(P(u) v)      for all u, v in Q[x].
//! ```
//!
//! The archetype is integration from a basepoint, `(I_a f)(x) = int_a^x f`,
//! and the library is organised around the question of which other operators
//! satisfy the same identity:
//!
//! * [`poly`] is the arithmetic substrate: dense polynomials over `BigRational`
//!   with derivative, definite integration and evaluation.
//! * [`operator`] gives a closed expression language [`OpExpr`] for linear
//!   operators together with the Rota-Baxter bilinear form and the
//!   verification checks built on it.
//! * [`averaging`] encodes the monotone index maps `theta` that underlie
//!   monomial operators as finite sequences, with an exact codec in both
//!   directions.
//! * [`monomial`] constructs and classifies operators of the shape
//!   `P(x^n) = beta(n) x^{theta(n)}`, degenerate families included.
//! * [`double_product`] studies the induced product
//!   `u * v = P(u) v + u P(v)`, the associated measure functional, and the
//!   recovery of an integration basepoint from operator data alone.
//! * [`selftest`] is a deterministic acceptance suite exercising all of the
//!   above end to end.
//!
//! All computation is exact; nothing in the crate rounds. Checks are
//! verification procedures over a finite monomial range `x^0 .. x^N` and every
//! report records the bound it was run at.

pub mod averaging;
pub mod double_product;
pub mod io;
pub mod monomial;
pub mod operator;
pub mod poly;
pub mod report;
pub mod selftest;

pub use averaging::{AveragingError, AveragingSeq, ThetaTable};
pub use double_product::{
    DoubleProductError, EvenPowerCheck, Functional, InitPoint, MeasureResult,
};
pub use monomial::{
    BetaRule, ClassificationReport, MonomialError, MonomialFamily, MonomialTable, Parity,
    PolyTheta, SuppStructure, TableRow,
};
pub use operator::{OpError, OpExpr, OpTerm};
pub use poly::{Poly, PolyParseError, Rational};
pub use report::{Counterexample, RBReport};
pub use selftest::CriterionOutcome;
