//! The double product `u * v := P(u) v + u P(v)`, its distinguished bases,
//! and the measures attached to operators satisfying a differential law.
//!
//! An operator with witness `r` (meaning `(P u)' = r u`) determines the
//! functional `mu := int_0 r - P`, whose values on monomials are constants.
//! For the monomial witnesses `r = x^k` this measure obeys a rigid recursion
//! and pins the operator down to an initialized integral `int_a x^k`; the
//! routines here verify that chain exactly and recover `a` when it is
//! rational, refusing otherwise with the defining equation `a^{k+1}` in hand.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::operator::{apply, check_rb, differential_law_witness, OpError, OpExpr};
use crate::poly::{rat, rat_int, rat_pow, Poly, Rational};
use crate::report::RBReport;

/// A linear functional tabulated on the monomials `x^0 .. x^bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFunctional")]
pub struct Functional {
    #[serde(with = "crate::io::rat_vec_serde")]
    values: Vec<Rational>,
}

#[derive(Deserialize)]
struct RawFunctional {
    #[serde(with = "crate::io::rat_vec_serde")]
    values: Vec<Rational>,
}

impl TryFrom<RawFunctional> for Functional {
    type Error = DoubleProductError;
    fn try_from(raw: RawFunctional) -> Result<Self, DoubleProductError> {
        Functional::new(raw.values)
    }
}

/// Outcome of classifying an operator against the family `int_a x^k`.
///
/// `a_power` always carries `a^{k+1} = (k+1) mu(1)` exactly; `a_exact` is
/// present only when that equation has a rational solution, which the
/// classification then confirms row by row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasureResult {
    #[serde(with = "crate::io::rat_serde")]
    pub a_power: Rational,
    #[serde(with = "crate::io::rat_opt_serde")]
    pub a_exact: Option<Rational>,
    pub sign_ok: bool,
    pub consistent_to: usize,
}

/// Result of the initialization-point extraction: either the point itself,
/// or, when the formula's denominator vanishes (the `r(a) = 0` case), the
/// left-factor images `candidate[m] = m P(x^{m-1})` of the decomposition
/// `P = Q . int_0`, for the caller to match against `r(.) - int_a r'(.)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum InitPoint {
    Point {
        #[serde(with = "crate::io::rat_serde")]
        a: Rational,
    },
    Factorization { r: Poly, candidate: Vec<Poly> },
}

/// The constant `c = r^2 - P(2r')` together with the verdict on the
/// even-power identities `P(r' r^{2k}) = (r^{2k+2} - c^{k+1}) / (2k+2)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvenPowerCheck {
    #[serde(with = "crate::io::rat_serde")]
    pub c: Rational,
    pub report: RBReport,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DoubleProductError {
    #[error("a functional needs at least the value at x^0")]
    EmptyFunctional,
    #[error("functional table stops at {bound} but degree {degree} appeared")]
    DegreeBeyondTable { degree: usize, bound: usize },
    #[error("basis index {n} is below the minimum {min}")]
    IndexBelowBound { n: usize, min: usize },
    #[error("the zero witness generates nothing")]
    ZeroWitness,
    #[error("operator fails the Rota-Baxter check")]
    NotRb { report: RBReport },
    #[error("operator does not have the claimed differential-law witness")]
    WitnessMismatch { expected: Poly, found: Option<Poly> },
    #[error("mu(x^{n}) is not constant, so the differential law fails")]
    NonConstantMeasure { n: usize },
    #[error("measure recursion breaks at n = {n}")]
    RecursionViolation { n: usize },
    #[error("mu(1) = {mu_one} is negative, impossible for an odd power witness")]
    SignViolation { mu_one: Rational },
    #[error("a^(k+1) = {a_power} has a rational root, but no root matches the operator")]
    RootTableMismatch { a_power: Rational },
    #[error("operator is not the initialized integral suggested by its measure (row {n})")]
    NotModelled { n: usize },
    #[error("initialization formula has a non-constant {part}")]
    NonConstantFormula { part: &'static str },
    #[error("even-power constant r^2 - P(2r') is not constant")]
    NonConstantC,
    #[error("functional table stops at {bound} but the product check needs {needed}")]
    TableTooShort { needed: usize, bound: usize },
    #[error("line {line}: expected \"n,mu_num,mu_den\" with n = {expected}, got {text:?}")]
    MalformedCsv {
        line: usize,
        expected: usize,
        text: String,
    },
    #[error(transparent)]
    Op(#[from] OpError),
}

impl Functional {
    pub fn new(values: Vec<Rational>) -> Result<Self, DoubleProductError> {
        if values.is_empty() {
            return Err(DoubleProductError::EmptyFunctional);
        }
        Ok(Functional { values })
    }

    pub fn zero(bound: usize) -> Self {
        Functional {
            values: vec![Rational::zero(); bound + 1],
        }
    }

    pub fn bound(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, n: usize) -> Option<&Rational> {
        self.values.get(n)
    }

    /// Evaluates the functional by linearity; polynomials reaching past the
    /// table are refused rather than silently truncated.
    pub fn apply(&self, p: &Poly) -> Result<Rational, DoubleProductError> {
        let mut acc = Rational::zero();
        for (exp, coeff) in p.iter_nonzero() {
            match self.values.get(exp) {
                Some(mu) => acc += coeff * mu,
                None => {
                    return Err(DoubleProductError::DegreeBeyondTable {
                        degree: exp,
                        bound: self.bound(),
                    })
                }
            }
        }
        Ok(acc)
    }
}

/// The double product `u * v = P(u) v + u P(v)`.
pub fn star(p: &OpExpr, u: &Poly, v: &Poly) -> Result<Poly, OpError> {
    Ok(&(&apply(p, u)? * v) + &(u * &apply(p, v)?))
}

/// Basis polynomial `u_n = n x^{n-k-1}` of the double-product algebra of
/// `int_0 x^k`, defined for `n >= k + 1`.
pub fn un_basis(k: usize, n: usize) -> Result<Poly, DoubleProductError> {
    if n < k + 1 {
        return Err(DoubleProductError::IndexBelowBound { n, min: k + 1 });
    }
    Ok(Poly::monomial(rat_int(n as i64), n - k - 1))
}

/// Generator `u_n = n r^{n-2} r'` of the double-product algebra of `int_a r`,
/// defined for `n >= 2`. The point `a` does not enter the generators, only
/// the product law they satisfy.
pub fn un_basis_general(r: &Poly, n: usize) -> Result<Poly, DoubleProductError> {
    if n < 2 {
        return Err(DoubleProductError::IndexBelowBound { n, min: 2 });
    }
    Ok((&r.pow((n - 2) as u32) * &r.derivative()).scale(&rat_int(n as i64)))
}

/// Verifies `u_m * u_n = u_{m+n}` for the basis of `int_0 x^k` over all
/// `k+1 <= m <= n <= N`.
pub fn check_iso(k: usize, n_max: usize) -> RBReport {
    let p = OpExpr::modelled(rat_int(0), Poly::xpow(k));
    for m in (k + 1)..=n_max {
        for n in m..=n_max {
            let um = un_basis(k, m).expect("m >= k + 1");
            let un = un_basis(k, n).expect("n >= m");
            let product = star(&p, &um, &un).expect("closed-form operators apply cleanly");
            let expected = un_basis(k, m + n).expect("m + n >= k + 1");
            let residual = &product - &expected;
            if !residual.is_zero() {
                return RBReport::failing(n_max, m, n, residual);
            }
        }
    }
    RBReport::holding(n_max)
}

/// Verifies the corrected product law `u_m * u_n = u_{m+n} - rho^n u_m -
/// rho^m u_n` with `rho = r(a)` for the generators of `int_a r`, over all
/// `2 <= m <= n <= N`.
pub fn check_iso_general(
    r: &Poly,
    a: &Rational,
    n_max: usize,
) -> Result<RBReport, DoubleProductError> {
    if r.is_zero() {
        return Err(DoubleProductError::ZeroWitness);
    }
    let p = OpExpr::modelled(a.clone(), r.clone());
    let rho = r.eval(a);
    for m in 2..=n_max {
        for n in m..=n_max {
            let um = un_basis_general(r, m)?;
            let un = un_basis_general(r, n)?;
            let product = star(&p, &um, &un)?;
            let expected = &(&un_basis_general(r, m + n)? - &um.scale(&rat_pow(&rho, n as u32)))
                - &un.scale(&rat_pow(&rho, m as u32));
            let residual = &product - &expected;
            if !residual.is_zero() {
                return Ok(RBReport::failing(n_max, m, n, residual));
            }
        }
    }
    Ok(RBReport::holding(n_max))
}

/// Tabulates the associated measure `mu(x^n) = (int_0 r x^n - P(x^n))` for
/// `n <= N`. Each value must come out constant; a non-constant value means
/// `P` breaks the differential law `(P u)' = r u` at that exponent, which is
/// reported as the refusal it is.
pub fn measure_of(
    p: &OpExpr,
    r: &Poly,
    n_max: usize,
) -> Result<Functional, DoubleProductError> {
    let mut values = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let xn = Poly::xpow(n);
        let integral = (r * &xn).integral_from(&rat_int(0));
        let candidate = &integral - &apply(p, &xn)?;
        match candidate.as_constant() {
            Some(c) => values.push(c),
            None => return Err(DoubleProductError::NonConstantMeasure { n }),
        }
    }
    Functional::new(values)
}

/// Checks that the functional is multiplicative for the double product of
/// the initialized operator `int_0 x^k`: `mu(x^m * x^n) = mu(x^m) mu(x^n)`
/// for all `m <= n <= N`. The products reach degree `2N + k + 1`, so the
/// table must extend at least that far.
pub fn check_multiplicative(
    mu: &Functional,
    k: usize,
    n_max: usize,
) -> Result<RBReport, DoubleProductError> {
    let needed = 2 * n_max + k + 1;
    if mu.bound() < needed {
        return Err(DoubleProductError::TableTooShort {
            needed,
            bound: mu.bound(),
        });
    }
    let p0 = OpExpr::modelled(rat_int(0), Poly::xpow(k));
    for m in 0..=n_max {
        for n in m..=n_max {
            let w = star(&p0, &Poly::xpow(m), &Poly::xpow(n))?;
            let lhs = mu.apply(&w)?;
            let rhs = mu.value(m).expect("m <= bound") * mu.value(n).expect("n <= bound");
            let residual = lhs - rhs;
            if !residual.is_zero() {
                return Ok(RBReport::failing(n_max, m, n, Poly::constant(residual)));
            }
        }
    }
    Ok(RBReport::holding(n_max))
}

fn require_witness(
    p: &OpExpr,
    r: &Poly,
    n_max: usize,
) -> Result<(), DoubleProductError> {
    let found = differential_law_witness(p, n_max)?;
    if found.as_ref() != Some(r) {
        return Err(DoubleProductError::WitnessMismatch {
            expected: r.clone(),
            found,
        });
    }
    Ok(())
}

fn require_rb(p: &OpExpr, n_max: usize) -> Result<(), DoubleProductError> {
    let report = check_rb(p, n_max)?;
    if !report.holds {
        return Err(DoubleProductError::NotRb { report });
    }
    Ok(())
}

fn tables_match(p: &OpExpr, q: &OpExpr, n_max: usize) -> Result<bool, OpError> {
    for n in 0..=n_max {
        let xn = Poly::xpow(n);
        if apply(p, &xn)? != apply(q, &xn)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact rational `deg`-th root, when one exists.
fn rational_root(x: &Rational, deg: u32) -> Option<Rational> {
    if x.is_zero() {
        return Some(Rational::zero());
    }
    if x.is_negative() && deg % 2 == 0 {
        return None;
    }
    let num_root: BigInt = x.numer().nth_root(deg);
    let den_root: BigInt = x.denom().nth_root(deg);
    if num_root.pow(deg) == *x.numer() && den_root.pow(deg) == *x.denom() {
        Some(Rational::new(num_root, den_root))
    } else {
        None
    }
}

/// Classifies an operator with witness `x^k` against the family `int_a x^k`:
/// verifies the Rota-Baxter law and the witness, checks the measure
/// recursion `mu(x^{n+1}) = (n+1)(k+1)/(n+k+2) mu(1) mu(x^{n-k})`, enforces
/// the sign obstruction `mu(1) >= 0` for odd `k`, and extracts the
/// initialization point exactly when `a^{k+1} = (k+1) mu(1)` has a rational
/// solution, confirming the match row by row.
pub fn classify_rbo_xk(
    p: &OpExpr,
    k: usize,
    n_max: usize,
) -> Result<MeasureResult, DoubleProductError> {
    let xk = Poly::xpow(k);
    require_witness(p, &xk, n_max)?;
    require_rb(p, n_max)?;
    let mu = measure_of(p, &xk, n_max)?;
    let values = mu.values();
    let mu_one = values[0].clone();
    let a_power = rat_int((k + 1) as i64) * &mu_one;
    for n in k..n_max {
        let factor = rat(((n + 1) * (k + 1)) as i64, (n + k + 2) as i64);
        if values[n + 1] != factor * &mu_one * &values[n - k] {
            return Err(DoubleProductError::RecursionViolation { n });
        }
    }
    let sign_ok = !mu_one.is_negative();
    if k % 2 == 1 && !sign_ok {
        return Err(DoubleProductError::SignViolation { mu_one });
    }
    let a_exact = match rational_root(&a_power, (k + 1) as u32) {
        None => None,
        Some(root) => {
            // an even power leaves the sign of a open; the first monomial
            // rows of the operator decide it
            let mut candidates = vec![root.clone()];
            if (k + 1) % 2 == 0 && !root.is_zero() {
                candidates.push(-root);
            }
            let mut matched = None;
            for a in candidates {
                let model = OpExpr::modelled(a.clone(), xk.clone());
                if tables_match(p, &model, n_max)? {
                    matched = Some(a);
                    break;
                }
            }
            match matched {
                Some(a) => Some(a),
                None => return Err(DoubleProductError::RootTableMismatch { a_power }),
            }
        }
    };
    Ok(MeasureResult {
        a_power,
        a_exact,
        sign_ok,
        consistent_to: n_max,
    })
}

/// Recovers the initialization point of an operator with witness `r`.
///
/// For `deg r >= 1` the point is the quotient of the two constants
/// `P(2xr' + r) - xr^2` and `P(2r') - r^2`; a vanishing denominator means
/// `r(a) = 0`, and the factorization data of `P = Q . int_0` is returned
/// instead. A constant witness falls back to the measure: `a = mu(1) / r`,
/// confirmed row by row.
pub fn init_point(
    p: &OpExpr,
    r: &Poly,
    n_max: usize,
) -> Result<InitPoint, DoubleProductError> {
    require_witness(p, r, n_max)?;
    let Some(deg) = r.degree() else {
        return Err(DoubleProductError::ZeroWitness);
    };
    if deg == 0 {
        let c = r.coeff(0);
        let mu = measure_of(p, r, n_max)?;
        let a = mu.value(0).expect("bound >= 0") / &c;
        let model = OpExpr::modelled(a.clone(), r.clone());
        for n in 0..=n_max {
            if apply(p, &Poly::xpow(n))? != apply(&model, &Poly::xpow(n))? {
                return Err(DoubleProductError::NotModelled { n });
            }
        }
        return Ok(InitPoint::Point { a });
    }
    let dr = r.derivative();
    let num_arg = &(&Poly::x() * &dr).scale(&rat_int(2)) + r;
    let num_poly = &apply(p, &num_arg)? - &(&Poly::x() * &(r * r));
    let den_poly = &apply(p, &dr.scale(&rat_int(2)))? - &(r * r);
    let num = num_poly
        .as_constant()
        .ok_or(DoubleProductError::NonConstantFormula { part: "numerator" })?;
    let den = den_poly
        .as_constant()
        .ok_or(DoubleProductError::NonConstantFormula { part: "denominator" })?;
    if den.is_zero() {
        let mut candidate = vec![Poly::zero()];
        for m in 1..=n_max {
            candidate.push(apply(p, &Poly::xpow(m - 1))?.scale(&rat_int(m as i64)));
        }
        return Ok(InitPoint::Factorization {
            r: r.clone(),
            candidate,
        });
    }
    Ok(InitPoint::Point { a: num / den })
}

/// Binds the constant `c = r^2 - P(2r')` and verifies the even-power
/// identities `P(r' r^{2k}) = (r^{2k+2} - c^{k+1}) / (2k+2)` for all
/// `k <= kmax`. When the initialization point is recoverable, `c` is also
/// cross-checked against `r(a)^2`.
pub fn even_power_check(
    p: &OpExpr,
    r: &Poly,
    kmax: usize,
    n_max: usize,
) -> Result<EvenPowerCheck, DoubleProductError> {
    require_witness(p, r, n_max)?;
    require_rb(p, n_max)?;
    let c_poly = &(r * r) - &apply(p, &r.derivative().scale(&rat_int(2)))?;
    let c = c_poly
        .as_constant()
        .ok_or(DoubleProductError::NonConstantC)?;
    for k in 0..=kmax {
        let arg = &r.derivative() * &r.pow(2 * k as u32);
        let lhs = apply(p, &arg)?;
        let rhs = (&r.pow((2 * k + 2) as u32) - &Poly::constant(rat_pow(&c, (k + 1) as u32)))
            .scale(&rat(1, (2 * k + 2) as i64));
        let residual = &lhs - &rhs;
        if !residual.is_zero() {
            let report = RBReport::failing(n_max, k, 0, residual)
                .with_note("m indexes the even power 2k");
            return Ok(EvenPowerCheck { c, report });
        }
    }
    if let Ok(InitPoint::Point { a }) = init_point(p, r, n_max) {
        let expected = rat_pow(&r.eval(&a), 2);
        if c != expected {
            let report = RBReport {
                holds: false,
                bound: n_max,
                counterexample: None,
                note: Some(format!("c = {c} differs from r(a)^2 = {expected}")),
            };
            return Ok(EvenPowerCheck { c, report });
        }
    }
    Ok(EvenPowerCheck {
        c,
        report: RBReport::holding(n_max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn j(a: i64) -> OpExpr {
        OpExpr::integral_from(rat_int(a))
    }

    fn modelled(a: Rational, r: Poly) -> OpExpr {
        OpExpr::modelled(a, r)
    }

    fn p(src: &str) -> Poly {
        src.parse().unwrap()
    }

    #[test]
    fn star_fixed_cases() {
        // 1 * x^n for int_0 picks up both halves of the product
        for n in 0..6usize {
            let result = star(&j(0), &Poly::one(), &Poly::xpow(n)).unwrap();
            let expected = Poly::monomial(rat((n + 2) as i64, (n + 1) as i64), n + 1);
            assert_eq!(result, expected);
        }

        // odd-power witness x^{2l+1} with l=1: 1 * 1 = x^4 / 2
        let p_odd = modelled(rat_int(0), Poly::xpow(3));
        assert_eq!(
            star(&p_odd, &Poly::one(), &Poly::one()).unwrap(),
            Poly::monomial(rat(1, 2), 4)
        );

        assert_eq!(
            star(&OpExpr::Zero, &p("x^2 + 1"), &p("x - 3")).unwrap(),
            Poly::zero()
        );
    }

    #[test]
    fn basis_polynomials() {
        assert_eq!(un_basis(0, 2).unwrap(), p("2x"));
        assert_eq!(un_basis(1, 3).unwrap(), p("3x"));
        assert_eq!(un_basis(0, 1).unwrap(), Poly::one());
        assert_eq!(
            un_basis(1, 1).unwrap_err(),
            DoubleProductError::IndexBelowBound { n: 1, min: 2 }
        );

        assert_eq!(un_basis_general(&p("x"), 3).unwrap(), p("3x"));
        assert_eq!(un_basis_general(&p("x^2"), 2).unwrap(), p("4x"));
        assert_eq!(
            un_basis_general(&p("x"), 1).unwrap_err(),
            DoubleProductError::IndexBelowBound { n: 1, min: 2 }
        );
    }

    #[test]
    fn iso_product_law_for_monomial_witnesses() {
        // spot check inside the law: u_2 * u_3 = 2x * 3x^2 = 5x^4 = u_5
        let product = star(&j(0), &un_basis(0, 2).unwrap(), &un_basis(0, 3).unwrap()).unwrap();
        assert_eq!(product, un_basis(0, 5).unwrap());

        assert!(check_iso(0, 20).holds);
        assert!(check_iso(3, 15).holds);
    }

    #[test]
    fn iso_product_law_for_general_witnesses() {
        // r = x^2, a = 1: rho = 1, so the corrected law has both subtractions
        assert!(check_iso_general(&p("x^2"), &rat_int(1), 10).unwrap().holds);

        // r(a) = 0 kills the corrections
        assert!(check_iso_general(&p("x^2 - 1"), &rat_int(1), 8).unwrap().holds);
        assert!(check_iso_general(&p("x + 2"), &rat_int(-2), 8).unwrap().holds);

        assert_eq!(
            check_iso_general(&Poly::zero(), &rat_int(0), 5).unwrap_err(),
            DoubleProductError::ZeroWitness
        );
    }

    #[test]
    fn measure_values_of_initialized_integrals() {
        // int_2 with witness 1: mu(x^n) = 2^{n+1} / (n+1)
        let mu = measure_of(&j(2), &Poly::one(), 10).unwrap();
        for n in 0..=10u32 {
            assert_eq!(
                mu.value(n as usize).unwrap(),
                &rat(2i64.pow(n + 1), i64::from(n) + 1)
            );
        }

        // initialized at zero: the measure vanishes identically
        for k in 0..4usize {
            let mu = measure_of(&modelled(rat_int(0), Poly::xpow(k)), &Poly::xpow(k), 12).unwrap();
            assert_eq!(mu, Functional::zero(12));
        }

        // int_2 x: mu(x^n) = 2^{n+2} / (n+2)
        let mu = measure_of(&modelled(rat_int(2), Poly::x()), &Poly::x(), 8).unwrap();
        for n in 0..=8u32 {
            assert_eq!(
                mu.value(n as usize).unwrap(),
                &rat(2i64.pow(n + 2), i64::from(n) + 2)
            );
        }
    }

    #[test]
    fn measure_needs_only_the_differential_law() {
        // int_0 + int_1 is no Rota-Baxter operator, but (P u)' = 2u holds,
        // and the measure is mu(x^n) = 1/(n+1)
        let sum = OpExpr::lin_comb(vec![(rat_int(1), j(0)), (rat_int(1), j(1))]);
        let mu = measure_of(&sum, &Poly::constant(rat_int(2)), 6).unwrap();
        for n in 0..=6usize {
            assert_eq!(mu.value(n).unwrap(), &rat(1, (n + 1) as i64));
        }
    }

    #[test]
    fn measure_rejects_operators_without_the_law() {
        // at n = 0 the candidate int_0 1 - x happens to cancel; the first
        // genuine violation of (P u)' = u is x^2/2 - x^2 at n = 1
        let err = measure_of(&OpExpr::multiply_by(Poly::x()), &Poly::one(), 5).unwrap_err();
        assert_eq!(err, DoubleProductError::NonConstantMeasure { n: 1 });
    }

    #[test]
    fn multiplicativity_of_measures() {
        let mu = measure_of(&j(2), &Poly::one(), 40).unwrap();
        assert!(check_multiplicative(&mu, 0, 15).unwrap().holds);

        let zero = Functional::zero(40);
        assert!(check_multiplicative(&zero, 0, 15).unwrap().holds);

        // the constant-one functional is not multiplicative:
        // mu(1 * 1) = mu(2x) = 2 but mu(1)^2 = 1
        let ones = Functional::new(vec![rat_int(1); 41]).unwrap();
        let report = check_multiplicative(&ones, 0, 15).unwrap();
        assert!(!report.holds);
        let ce = report.counterexample.unwrap();
        assert_eq!((ce.m, ce.n), (0, 0));
        assert_eq!(ce.residual, Poly::constant(rat_int(1)));

        assert_eq!(
            check_multiplicative(&Functional::zero(10), 0, 15).unwrap_err(),
            DoubleProductError::TableTooShort { needed: 31, bound: 10 }
        );
    }

    #[test]
    fn classification_of_cubic_witness() {
        // int_3 x^2: a_power = 3^3, recovered exactly
        let result = classify_rbo_xk(&modelled(rat_int(3), p("x^2")), 2, 20).unwrap();
        assert_eq!(result.a_power, rat_int(27));
        assert_eq!(result.a_exact, Some(rat_int(3)));
        assert!(result.sign_ok);
        assert_eq!(result.consistent_to, 20);

        // the domain of mixed sign: a_power = (-2)^3 = -8, cube root -2
        let result = classify_rbo_xk(&modelled(rat_int(-2), p("x^2")), 2, 20).unwrap();
        assert_eq!(result.a_power, rat_int(-8));
        assert_eq!(result.a_exact, Some(rat_int(-2)));
        assert!(!result.sign_ok);
    }

    #[test]
    fn classification_of_initialized_operator() {
        let result = classify_rbo_xk(&modelled(rat_int(0), Poly::x()), 1, 20).unwrap();
        assert_eq!(result.a_power, rat_int(0));
        assert_eq!(result.a_exact, Some(rat_int(0)));
        assert!(result.sign_ok);
    }

    #[test]
    fn classification_disambiguates_even_roots() {
        // k = 1: a_power = a^2 = 9 admits both 3 and -3; the table decides
        let result = classify_rbo_xk(&modelled(rat_int(-3), Poly::x()), 1, 20).unwrap();
        assert_eq!(result.a_power, rat_int(9));
        assert_eq!(result.a_exact, Some(rat_int(-3)));
    }

    #[test]
    fn classification_enforces_its_preconditions() {
        // wrong witness degree
        let err = classify_rbo_xk(&modelled(rat_int(3), p("x^2")), 1, 10).unwrap_err();
        assert_eq!(
            err,
            DoubleProductError::WitnessMismatch {
                expected: Poly::x(),
                found: Some(p("x^2")),
            }
        );

        // witness x holds for int_0 x + eval at 1, but the operator is no
        // Rota-Baxter operator
        let skewed = OpExpr::lin_comb(vec![
            (rat_int(1), modelled(rat_int(0), Poly::x())),
            (rat_int(1), OpExpr::eval_at(rat_int(1))),
        ]);
        match classify_rbo_xk(&skewed, 1, 10).unwrap_err() {
            DoubleProductError::NotRb { report } => assert!(!report.holds),
            other => panic!("expected a Rota-Baxter refusal, got {other:?}"),
        }
    }

    #[test]
    fn init_point_formula_cases() {
        // worked example: P = int_1 x has numerator and denominator -1
        assert_eq!(
            init_point(&modelled(rat_int(1), Poly::x()), &Poly::x(), 20).unwrap(),
            InitPoint::Point { a: rat_int(1) }
        );

        assert_eq!(
            init_point(&modelled(rat_int(0), p("x + 1")), &p("x + 1"), 20).unwrap(),
            InitPoint::Point { a: rat_int(0) }
        );
        assert_eq!(
            init_point(&modelled(rat_int(2), p("x^2 + 3")), &p("x^2 + 3"), 15).unwrap(),
            InitPoint::Point { a: rat_int(2) }
        );
    }

    #[test]
    fn init_point_factorization_branch() {
        // r(0) = 0 for P = int_0 x: the formula denominator vanishes
        let result = init_point(&modelled(rat_int(0), Poly::x()), &Poly::x(), 10).unwrap();
        let InitPoint::Factorization { r, candidate } = result else {
            panic!("expected the factorization branch");
        };
        assert_eq!(r, Poly::x());
        assert_eq!(candidate.len(), 11);
        assert_eq!(candidate[0], Poly::zero());
        // the left factor must equal r(.) - int_a r'(.) with a = 0:
        // x x^m - int_0 x^m = m/(m+1) x^{m+1}
        for m in 1..=10usize {
            let expected = Poly::monomial(rat(m as i64, (m + 1) as i64), m + 1);
            assert_eq!(candidate[m], expected);
        }
    }

    #[test]
    fn init_point_constant_witness() {
        // P = 3 int_2: witness 3, point recovered through the measure
        let result = init_point(
            &modelled(rat_int(2), Poly::constant(rat_int(3))),
            &Poly::constant(rat_int(3)),
            12,
        )
        .unwrap();
        assert_eq!(result, InitPoint::Point { a: rat_int(2) });

        // witness 3 also fits 3 int_0 + eval at 1, but no initialization
        // point reproduces that operator
        let skewed = OpExpr::lin_comb(vec![
            (rat_int(3), j(0)),
            (rat_int(1), OpExpr::eval_at(rat_int(1))),
        ]);
        assert_eq!(
            init_point(&skewed, &Poly::constant(rat_int(3)), 10).unwrap_err(),
            DoubleProductError::NotModelled { n: 1 }
        );

        assert_eq!(
            init_point(&OpExpr::Zero, &Poly::zero(), 10).unwrap_err(),
            DoubleProductError::ZeroWitness
        );
        assert_eq!(
            init_point(&modelled(rat_int(1), Poly::x()), &p("x^2"), 10).unwrap_err(),
            DoubleProductError::WitnessMismatch {
                expected: p("x^2"),
                found: Some(Poly::x()),
            }
        );
    }

    #[test]
    fn even_power_identities() {
        // P = int_2 x: c = x^2 - (x^2 - 4) = 4 = r(2)^2
        let result = even_power_check(&modelled(rat_int(2), Poly::x()), &Poly::x(), 1, 15).unwrap();
        assert_eq!(result.c, rat_int(4));
        assert!(result.report.holds);

        // base case k = 0 is the definition of c
        let result =
            even_power_check(&modelled(rat_int(0), p("x^2 + 3")), &p("x^2 + 3"), 0, 10).unwrap();
        assert_eq!(result.c, rat_int(9));
        assert!(result.report.holds);

        let result =
            even_power_check(&modelled(rat_int(1), p("x^2 + 1")), &p("x^2 + 1"), 3, 15).unwrap();
        assert_eq!(result.c, rat_int(4));
        assert!(result.report.holds);
    }

    fn small_rationals() -> Vec<Rational> {
        vec![
            rat_int(-2),
            rat_int(-1),
            rat(-1, 2),
            rat_int(0),
            rat(1, 2),
            rat_int(1),
            rat_int(3),
        ]
    }

    fn arb_poly(max_deg: usize) -> impl Strategy<Value = Poly> {
        prop::collection::vec(-3i64..=3, 1..=max_deg + 1)
            .prop_map(|coeffs| Poly::from_coeffs(coeffs.into_iter().map(rat_int).collect()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn star_is_associative_for_rbos(
            a_idx in 0..7usize,
            k in 0..3usize,
            u in arb_poly(3),
            v in arb_poly(3),
            w in arb_poly(3),
        ) {
            let a = small_rationals()[a_idx].clone();
            let op = modelled(a, Poly::xpow(k));
            let left = star(&op, &star(&op, &u, &v).unwrap(), &w).unwrap();
            let right = star(&op, &u, &star(&op, &v, &w).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn operator_is_star_homomorphism(
            a_idx in 0..7usize,
            k in 0..3usize,
            u in arb_poly(3),
            v in arb_poly(3),
        ) {
            let a = small_rationals()[a_idx].clone();
            let op = modelled(a, Poly::xpow(k));
            let lhs = apply(&op, &star(&op, &u, &v).unwrap()).unwrap();
            let rhs = &apply(&op, &u).unwrap() * &apply(&op, &v).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn classification_recovers_the_point(a_idx in 0..7usize, k in 0..4usize) {
            let a = small_rationals()[a_idx].clone();
            let result = classify_rbo_xk(&modelled(a.clone(), Poly::xpow(k)), k, 16).unwrap();
            prop_assert_eq!(result.a_exact, Some(a));
            prop_assert!(result.sign_ok || k % 2 == 0);
        }

        #[test]
        fn measure_follows_the_power_formula(a_idx in 0..7usize) {
            // witness 1: mu(x^n) = a^{n+1}/(n+1), the analytic model of int_a
            let a = small_rationals()[a_idx].clone();
            let mu = measure_of(&modelled(a.clone(), Poly::one()), &Poly::one(), 18).unwrap();
            for n in 0..=18usize {
                let expected = rat_pow(&a, (n + 1) as u32) / rat_int((n + 1) as i64);
                prop_assert_eq!(mu.value(n).unwrap(), &expected);
            }
        }

        #[test]
        fn measure_kernel_codimension(a_idx in 0..7usize) {
            // the value table has rank 1 exactly when a != 0
            let a = small_rationals()[a_idx].clone();
            let mu = measure_of(&modelled(a.clone(), Poly::one()), &Poly::one(), 20).unwrap();
            let rank = usize::from(mu.values().iter().any(|v| !v.is_zero()));
            prop_assert_eq!(rank, usize::from(!a.is_zero()));
        }
    }
}
