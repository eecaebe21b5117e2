//! Dense univariate polynomials over exact rationals.
//!
//! Coefficients are `BigRational`, so no operation in this module rounds or
//! overflows. The coefficient vector is kept normalised: the leading
//! coefficient is nonzero, and the zero polynomial is the empty vector with
//! degree `None` (the "minus infinity" of the usual degree convention).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar used throughout the crate.
pub type Rational = num_rational::BigRational;

/// Shorthand for a rational from two machine integers. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integer rational.
pub fn rat_int(num: i64) -> Rational {
    Rational::from_integer(BigInt::from(num))
}

/// `base^exp` for rational `base` and machine-sized nonnegative `exp`.
pub fn rat_pow(base: &Rational, exp: u32) -> Rational {
    Rational::new(base.numer().pow(exp), base.denom().pow(exp))
}

/// A polynomial in one variable with `BigRational` coefficients.
///
/// `coeffs[i]` is the coefficient of `x^i`; the invariant that the last entry
/// is nonzero is maintained by every constructor and operation.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

/// Error parsing the textual polynomial format.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyParseError {
    #[error("empty polynomial text")]
    Empty,
    #[error("malformed term {0:?}")]
    BadTerm(String),
    #[error("malformed rational {0:?}")]
    BadRational(String),
    #[error("malformed exponent {0:?}")]
    BadExponent(String),
}

impl Poly {
    /// The zero polynomial.
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    /// The constant polynomial 1.
    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    /// The identity polynomial x.
    pub fn x() -> Self {
        Poly::monomial(Rational::one(), 1)
    }

    /// The monomial `x^n`.
    pub fn xpow(n: usize) -> Self {
        Poly::monomial(Rational::one(), n)
    }

    /// The constant polynomial `c`.
    pub fn constant(c: Rational) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { coeffs: vec![c] }
        }
    }

    /// The monomial `c * x^n`.
    pub fn monomial(c: Rational, n: usize) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rational::zero(); n + 1];
        coeffs[n] = c;
        Poly { coeffs }
    }

    /// Builds a polynomial from coefficients in ascending order of exponent,
    /// trimming trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// Coefficients in ascending order of exponent; empty for the zero
    /// polynomial.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// The coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    /// `None` for the zero polynomial, otherwise the usual degree.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The constant value if the degree is at most zero.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.coeffs.len() {
            0 => Some(Rational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    /// Iterates over `(exponent, coefficient)` pairs with nonzero coefficient.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
    }

    /// Multiplies by a scalar.
    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// `self^exp` by repeated multiplication.
    pub fn pow(&self, exp: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// The formal derivative.
    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
            .collect();
        Poly::from_coeffs(coeffs)
    }

    /// The definite integral from `a`: the unique antiderivative of `self`
    /// vanishing at `x = a`.
    ///
    /// On monomials this is `x^n -> (x^{n+1} - a^{n+1}) / (n+1)`, the model
    /// weight-zero Rota-Baxter operator on Q[x].
    pub fn integral_from(&self, a: &Rational) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                coeffs[i + 1] = c / Rational::from_integer(BigInt::from(i + 1));
            }
        }
        let antiderivative = Poly { coeffs };
        let at_a = antiderivative.eval(a);
        &antiderivative - &Poly::constant(at_a)
    }

    /// Evaluates at `a` by Horner's rule.
    pub fn eval(&self, a: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * a + c;
        }
        acc
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut coeffs = long.coeffs.clone();
        for (i, c) in short.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        Poly::from_coeffs(coeffs)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let deg = self.coeffs.len() + rhs.coeffs.len() - 1;
        let mut coeffs = vec![Rational::zero(); deg];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] += a * b;
            }
        }
        Poly::from_coeffs(coeffs)
    }
}

impl fmt::Display for Poly {
    /// Canonical text form: terms in descending exponent, `p/q` rationals,
    /// e.g. `2*x^3 - x^2 + 1/2*x + 5`. The zero polynomial prints as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let unit_coeff = mag.is_one() && i > 0;
            if !unit_coeff {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                _ => {
                    if !unit_coeff {
                        write!(f, "*")?;
                    }
                    if i == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl FromStr for Poly {
    type Err = PolyParseError;

    /// Parses the canonical text form and common variants: signs may be
    /// written `- x` or `+ -x`, the `*` between coefficient and `x` is
    /// optional, and whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(PolyParseError::Empty);
        }
        let mut acc = Poly::zero();
        let mut chars = compact.chars().peekable();
        let mut any_term = false;
        while chars.peek().is_some() {
            let mut negative = false;
            while let Some(&c) = chars.peek() {
                match c {
                    '+' => {
                        chars.next();
                    }
                    '-' => {
                        negative = !negative;
                        chars.next();
                    }
                    _ => break,
                }
            }
            let mut term = String::new();
            while let Some(&c) = chars.peek() {
                if c == '+' || c == '-' {
                    break;
                }
                term.push(c);
                chars.next();
            }
            if term.is_empty() {
                return Err(PolyParseError::BadTerm(s.trim().to_string()));
            }
            let (coeff, exp) = parse_term(&term)?;
            let signed = if negative { -coeff } else { coeff };
            acc = &acc + &Poly::monomial(signed, exp);
            any_term = true;
        }
        if !any_term {
            return Err(PolyParseError::Empty);
        }
        Ok(acc)
    }
}

/// Parses one sign-free term: `coeff`, `x^n`, or `coeff['*']x^n`.
fn parse_term(term: &str) -> Result<(Rational, usize), PolyParseError> {
    match term.find('x') {
        None => Ok((parse_rational(term)?, 0)),
        Some(pos) => {
            let lead = &term[..pos];
            let coeff_text = lead.strip_suffix('*').unwrap_or(lead);
            let coeff = if coeff_text.is_empty() {
                Rational::one()
            } else {
                parse_rational(coeff_text)?
            };
            let rest = &term[pos + 1..];
            let exp = if rest.is_empty() {
                1
            } else if let Some(exp_text) = rest.strip_prefix('^') {
                exp_text
                    .parse::<usize>()
                    .map_err(|_| PolyParseError::BadExponent(exp_text.to_string()))?
            } else {
                return Err(PolyParseError::BadTerm(term.to_string()));
            };
            Ok((coeff, exp))
        }
    }
}

fn parse_rational(text: &str) -> Result<Rational, PolyParseError> {
    text.parse::<Rational>()
        .map_err(|_| PolyParseError::BadRational(text.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    #[test]
    fn degree_conventions() {
        assert_eq!(Poly::zero().degree(), None);
        assert_eq!(Poly::one().degree(), Some(0));
        assert_eq!(Poly::xpow(7).degree(), Some(7));
        assert_eq!((&Poly::x() - &Poly::x()).degree(), None);
    }

    #[test]
    fn arithmetic_matches_hand_expansion() {
        let a = p("x + 1");
        let b = p("x - 1");
        assert_eq!(&a * &b, p("x^2 - 1"));
        assert_eq!(&a + &b, p("2*x"));
        assert_eq!(&a - &b, p("2"));
        assert_eq!(a.pow(2), p("x^2 + 2*x + 1"));
    }

    #[test]
    fn derivative_of_monomials() {
        assert_eq!(Poly::xpow(5).derivative(), p("5*x^4"));
        assert_eq!(Poly::one().derivative(), Poly::zero());
        assert_eq!(Poly::zero().derivative(), Poly::zero());
    }

    #[test]
    fn integral_from_basepoints() {
        // int_0 x^n = x^{n+1}/(n+1)
        assert_eq!(Poly::xpow(3).integral_from(&rat_int(0)), p("1/4*x^4"));
        // int_1 x = (x^2 - 1)/2
        assert_eq!(Poly::x().integral_from(&rat_int(1)), p("1/2*x^2 - 1/2"));
        // int_2 x^3 = (x^4 - 16)/4
        assert_eq!(Poly::xpow(3).integral_from(&rat_int(2)), p("1/4*x^4 - 4"));
        assert_eq!(Poly::zero().integral_from(&rat_int(5)), Poly::zero());
    }

    #[test]
    fn eval_uses_exact_rationals() {
        let q = p("x^2 - 1/3");
        assert_eq!(q.eval(&rat(1, 2)), rat(-1, 12));
        assert_eq!(Poly::zero().eval(&rat_int(9)), rat_int(0));
    }

    #[test]
    fn display_roundtrip_fixed_cases() {
        for text in ["0", "1", "-x", "2*x^3 - x^2 + 1/2*x + 5", "x^10 - 1/7"] {
            let q = p(text);
            assert_eq!(q.to_string(), text);
            assert_eq!(p(&q.to_string()), q);
        }
    }

    #[test]
    fn parse_accepts_loose_input() {
        assert_eq!(p("3x"), p("3*x"));
        assert_eq!(p(" x ^ 2 + -2"), p("x^2 - 2"));
        assert_eq!(p("+x"), Poly::x());
        assert_eq!(p("5/10"), Poly::constant(rat(1, 2)));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("".parse::<Poly>().is_err());
        assert!("x^".parse::<Poly>().is_err());
        assert!("2**x".parse::<Poly>().is_err());
        assert!("x + ".parse::<Poly>().is_err());
        assert!("1/0".parse::<Poly>().is_err());
        assert!("y^2".parse::<Poly>().is_err());
    }

    #[test]
    fn rat_pow_matches_repeated_multiplication() {
        let base = rat(-3, 4);
        let mut acc = rat_int(1);
        for e in 0..8u32 {
            assert_eq!(rat_pow(&base, e), acc);
            acc *= &base;
        }
    }

    prop_compose! {
        fn arb_rational()(num in -30i64..=30, den in 1i64..=12) -> Rational {
            rat(num, den)
        }
    }

    prop_compose! {
        fn arb_poly()(coeffs in prop::collection::vec(arb_rational(), 0..7)) -> Poly {
            Poly::from_coeffs(coeffs)
        }
    }

    proptest! {
        #[test]
        fn mul_is_commutative_and_distributes(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        }

        #[test]
        fn degree_of_product_adds(a in arb_poly(), b in arb_poly()) {
            let expected = match (a.degree(), b.degree()) {
                (Some(m), Some(n)) => Some(m + n),
                _ => None,
            };
            prop_assert_eq!((&a * &b).degree(), expected);
        }

        #[test]
        fn derivative_satisfies_leibniz(a in arb_poly(), b in arb_poly()) {
            let lhs = (&a * &b).derivative();
            let rhs = &(&a.derivative() * &b) + &(&a * &b.derivative());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn derivative_inverts_integral(a in arb_poly(), base in arb_rational()) {
            // d/dx (int_a p) = p for every basepoint a
            prop_assert_eq!(a.integral_from(&base).derivative(), a);
        }

        #[test]
        fn integral_vanishes_at_basepoint(a in arb_poly(), base in arb_rational()) {
            prop_assert_eq!(a.integral_from(&base).eval(&base), Rational::zero());
        }

        #[test]
        fn integration_by_parts(a in arb_poly(), b in arb_poly(), base in arb_rational()) {
            // int_a(u v') + int_a(u' v) = uv - (uv)(a)
            let lhs = &(&a * &b.derivative()).integral_from(&base)
                + &(&a.derivative() * &b).integral_from(&base);
            let product = &a * &b;
            let rhs = &product - &Poly::constant(product.eval(&base));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn display_parse_roundtrip(a in arb_poly()) {
            let text = a.to_string();
            prop_assert_eq!(text.parse::<Poly>().unwrap(), a);
        }

        #[test]
        fn eval_is_ring_homomorphism(a in arb_poly(), b in arb_poly(), point in arb_rational()) {
            prop_assert_eq!((&a * &b).eval(&point), a.eval(&point) * b.eval(&point));
            prop_assert_eq!((&a + &b).eval(&point), a.eval(&point) + b.eval(&point));
        }
    }
}
