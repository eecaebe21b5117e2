//! Expression language for linear operators on Q[x] and the Rota-Baxter
//! verification checks built on its interpreter.
//!
//! An [`OpExpr`] is a closed term: integration from a basepoint,
//! multiplication, evaluation (a functional embedded as constants), monomial
//! tables and families, composition, and linear combination. [`apply`]
//! interprets a term on a polynomial; everything else reduces to the
//! bilinear form
//!
//! ```text
//! RB(P,Q)(u,v) = P(u)Q(v) - P(u Q(v)) - Q(P(u) v),
//! ```
//!
//! whose vanishing on the diagonal characterises weight-zero Rota-Baxter
//! operators. Checks are exhaustive over basis pairs `(x^m, x^n)` up to a
//! bound and report exact rational residuals.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::double_product::{star, Functional};
use crate::monomial::{MonomialFamily, MonomialTable};
use crate::poly::{Poly, Rational};
use crate::report::RBReport;

/// A closed linear-operator term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum OpExpr {
    /// `p -> int_a^x p`, the model Rota-Baxter operator.
    IntegralFrom {
        #[serde(with = "crate::io::rat_serde")]
        a: Rational,
    },
    /// `p -> r p`.
    MultiplyBy { r: Poly },
    /// `p -> p(a)`, embedded as a constant polynomial.
    EvalAt {
        #[serde(with = "crate::io::rat_serde")]
        a: Rational,
    },
    /// Finite table `x^n -> beta(n) x^{theta(n)}`; out-of-range application
    /// is an error, never a truncation.
    MonomialTable { table: MonomialTable },
    /// Closed-form monomial family, applicable in any degree.
    MonomialFamily { family: MonomialFamily },
    /// `outer . inner`.
    Compose {
        outer: Box<OpExpr>,
        inner: Box<OpExpr>,
    },
    /// Rational linear combination of terms.
    LinComb { terms: Vec<OpTerm> },
    /// The zero operator.
    Zero,
}

/// One summand of a linear combination.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpTerm {
    #[serde(with = "crate::io::rat_serde")]
    pub coeff: Rational,
    pub op: OpExpr,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OpError {
    #[error("monomial table of bound {bound} cannot be applied to x^{exponent}")]
    TableRange { exponent: usize, bound: usize },
    #[error("verification bound must be at least 1")]
    ZeroBound,
    #[error("{side} operator fails its own Rota-Baxter check at bound {}", report.bound)]
    PreconditionRb {
        side: &'static str,
        report: RBReport,
    },
    #[error("functional tabulated to bound {bound} cannot support checks at bound {needed}")]
    FunctionalTooShort { bound: usize, needed: usize },
}

impl OpExpr {
    pub fn integral_from(a: Rational) -> Self {
        OpExpr::IntegralFrom { a }
    }

    pub fn multiply_by(r: Poly) -> Self {
        OpExpr::MultiplyBy { r }
    }

    pub fn eval_at(a: Rational) -> Self {
        OpExpr::EvalAt { a }
    }

    pub fn table(table: MonomialTable) -> Self {
        OpExpr::MonomialTable { table }
    }

    pub fn family(family: MonomialFamily) -> Self {
        OpExpr::MonomialFamily { family }
    }

    pub fn compose(outer: OpExpr, inner: OpExpr) -> Self {
        OpExpr::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    pub fn lin_comb(terms: Vec<(Rational, OpExpr)>) -> Self {
        OpExpr::LinComb {
            terms: terms
                .into_iter()
                .map(|(coeff, op)| OpTerm { coeff, op })
                .collect(),
        }
    }

    /// The analytically modelled operator `p -> int_a^x r p`.
    pub fn modelled(a: Rational, r: Poly) -> Self {
        premultiply(&OpExpr::integral_from(a), &r)
    }
}

/// Interprets the term on a polynomial. Linear in `p` by construction.
pub fn apply(op: &OpExpr, p: &Poly) -> Result<Poly, OpError> {
    match op {
        OpExpr::IntegralFrom { a } => Ok(p.integral_from(a)),
        OpExpr::MultiplyBy { r } => Ok(r * p),
        OpExpr::EvalAt { a } => Ok(Poly::constant(p.eval(a))),
        OpExpr::MonomialTable { table } => {
            let mut acc = Poly::zero();
            for (n, coeff) in p.iter_nonzero() {
                let row = table.row(n).ok_or(OpError::TableRange {
                    exponent: n,
                    bound: table.bound(),
                })?;
                acc = &acc + &Poly::monomial(coeff * &row.beta, row.theta);
            }
            Ok(acc)
        }
        OpExpr::MonomialFamily { family } => {
            let mut acc = Poly::zero();
            for (n, coeff) in p.iter_nonzero() {
                let (beta, theta) = family.image(n);
                acc = &acc + &Poly::monomial(coeff * &beta, theta);
            }
            Ok(acc)
        }
        OpExpr::Compose { outer, inner } => apply(outer, &apply(inner, p)?),
        OpExpr::LinComb { terms } => {
            let mut acc = Poly::zero();
            for term in terms {
                acc = &acc + &apply(&term.op, p)?.scale(&term.coeff);
            }
            Ok(acc)
        }
        OpExpr::Zero => Ok(Poly::zero()),
    }
}

/// The Rota-Baxter bilinear form `P(u)Q(v) - P(u Q(v)) - Q(P(u) v)`.
pub fn rb_form(p: &OpExpr, q: &OpExpr, u: &Poly, v: &Poly) -> Result<Poly, OpError> {
    let pu = apply(p, u)?;
    let qv = apply(q, v)?;
    let cross = &(&pu * &qv) - &apply(p, &(u * &qv))?;
    Ok(&cross - &apply(q, &(&pu * v))?)
}

/// Verifies `rb_form(P,P,x^m,x^n) = 0` for all `0 <= m <= n <= N`.
///
/// The diagonal form is symmetric in `(u,v)` over a commutative ring, so
/// ordered pairs suffice; on failure the swapped orientation is evaluated
/// too, confirming the same residual.
pub fn check_rb(p: &OpExpr, n_max: usize) -> Result<RBReport, OpError> {
    if n_max == 0 {
        return Err(OpError::ZeroBound);
    }
    let images: Vec<Poly> = (0..=n_max)
        .map(|n| apply(p, &Poly::xpow(n)))
        .collect::<Result<_, _>>()?;
    for m in 0..=n_max {
        for n in m..=n_max {
            let cross = &(&images[m] * &images[n])
                - &apply(p, &(&Poly::xpow(m) * &images[n]))?;
            let residual = &cross - &apply(p, &(&images[m] * &Poly::xpow(n)))?;
            if !residual.is_zero() {
                let swapped = rb_form(p, p, &Poly::xpow(n), &Poly::xpow(m))?;
                debug_assert_eq!(residual, swapped, "diagonal RB form must be symmetric");
                return Ok(RBReport::failing(n_max, m, n, residual));
            }
        }
    }
    Ok(RBReport::holding(n_max))
}

/// Verifies the compatibility law `RB(P1,P2) + RB(P2,P1) = 0` on all basis
/// pairs up to `N`, after checking each operator individually.
pub fn check_compatible(p1: &OpExpr, p2: &OpExpr, n_max: usize) -> Result<RBReport, OpError> {
    require_rb(p1, n_max, "first")?;
    require_rb(p2, n_max, "second")?;
    for m in 0..=n_max {
        for n in 0..=n_max {
            let u = Poly::xpow(m);
            let v = Poly::xpow(n);
            let residual = &rb_form(p1, p2, &u, &v)? + &rb_form(p2, p1, &u, &v)?;
            if !residual.is_zero() {
                return Ok(RBReport::failing(n_max, m, n, residual));
            }
        }
    }
    Ok(RBReport::holding(n_max))
}

/// Verifies consistency of `Q` with the Rota-Baxter operator `P`:
/// `RB(Q,Q) = RB(P,Q) + RB(Q,P)` on all basis pairs up to `N`.
///
/// The law is equivalent to `P - Q` being a Rota-Baxter operator, and each
/// residual is cross-checked against the diagonal form of that difference.
pub fn check_consistent(p: &OpExpr, q: &OpExpr, n_max: usize) -> Result<RBReport, OpError> {
    require_rb(p, n_max, "first")?;
    let diff = OpExpr::lin_comb(vec![
        (Rational::one(), p.clone()),
        (-Rational::one(), q.clone()),
    ]);
    for m in 0..=n_max {
        for n in 0..=n_max {
            let u = Poly::xpow(m);
            let v = Poly::xpow(n);
            let own = rb_form(q, q, &u, &v)?;
            let mixed = &rb_form(p, q, &u, &v)? + &rb_form(q, p, &u, &v)?;
            let residual = &own - &mixed;
            // bilinearity: RB(P-Q,P-Q) = RB(P,P) - RB(P,Q) - RB(Q,P) + RB(Q,Q),
            // and RB(P,P) vanishes by the precondition
            debug_assert_eq!(residual, rb_form(&diff, &diff, &u, &v)?);
            if !residual.is_zero() {
                return Ok(RBReport::failing(n_max, m, n, residual));
            }
        }
    }
    Ok(RBReport::holding(n_max))
}

/// Verifies that the functional is multiplicative for the double product of
/// `P`: `f(u * v) = f(u) f(v)` on basis pairs whose product stays within
/// degree `N`.
pub fn functional_consistency(
    f: &Functional,
    p: &OpExpr,
    n_max: usize,
) -> Result<RBReport, OpError> {
    if f.bound() < n_max {
        return Err(OpError::FunctionalTooShort {
            bound: f.bound(),
            needed: n_max,
        });
    }
    require_rb(p, n_max, "the")?;
    for m in 0..=n_max {
        for n in m..=n_max {
            let w = star(p, &Poly::xpow(m), &Poly::xpow(n))?;
            if w.degree().is_some_and(|d| d > n_max) {
                continue;
            }
            let fw = f
                .apply(&w)
                .expect("degree filtered to the functional's range");
            let residual = fw
                - f.value(m).expect("m <= bound").clone()
                    * f.value(n).expect("n <= bound");
            if !residual.is_zero() {
                return Ok(RBReport::failing(n_max, m, n, Poly::constant(residual)));
            }
        }
    }
    Ok(RBReport::holding(n_max))
}

/// Searches for a differential-law witness: the candidate `r := (P(1))'` is
/// returned when `(P(x^n))' = r x^n` for every `n <= N`.
///
/// For closed monomial families the answer is also derived symbolically and
/// must agree with the tabulated check.
pub fn differential_law_witness(p: &OpExpr, n_max: usize) -> Result<Option<Poly>, OpError> {
    if n_max == 0 {
        return Err(OpError::ZeroBound);
    }
    let r = apply(p, &Poly::one())?.derivative();
    let mut witnessed = Some(r.clone());
    for n in 0..=n_max {
        let lhs = apply(p, &Poly::xpow(n))?.derivative();
        if lhs != &r * &Poly::xpow(n) {
            witnessed = None;
            break;
        }
    }
    if let OpExpr::MonomialFamily { family } = p {
        debug_assert_eq!(
            family.differential_witness(),
            witnessed,
            "symbolic and tabulated differential-law answers must agree"
        );
    }
    Ok(witnessed)
}

/// The premultiplied operator `u -> P(r u)`, preserving the Rota-Baxter
/// property of `P`.
pub fn premultiply(p: &OpExpr, r: &Poly) -> OpExpr {
    OpExpr::compose(p.clone(), OpExpr::multiply_by(r.clone()))
}

fn require_rb(p: &OpExpr, n_max: usize, side: &'static str) -> Result<(), OpError> {
    let report = check_rb(p, n_max)?;
    if report.holds {
        Ok(())
    } else {
        Err(OpError::PreconditionRb { side, report })
    }
}
