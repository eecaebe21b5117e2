//! Input builders shared by the benchmark targets.

use rbpoly::averaging::AveragingSeq;
use rbpoly::monomial::{
    build_degenerate_multiples, build_nondegenerate, BetaRule, MonomialFamily,
};
use rbpoly::poly::{rat_int, Poly, Rational};
use rbpoly::OpExpr;

/// The period-2 family with c = 2, the smallest nondegenerate operator that
/// is not a premultiplied integral.
pub fn period_two_family() -> MonomialFamily {
    let avg = AveragingSeq::new(2, vec![1, 1]).expect("shape is valid");
    build_nondegenerate(avg, rat_int(2)).expect("valid family")
}

/// An even-support degenerate operator: zero on odd rows, the standard
/// integral pattern on even ones.
pub fn even_support_family() -> MonomialFamily {
    let inner = AveragingSeq::new(1, vec![1]).expect("shape is valid");
    build_degenerate_multiples(2, inner, BetaRule::ReciprocalTheta { c: rat_int(1) })
        .expect("valid family")
}

/// A period-6 sequence with mixed multipliers, wide enough to make the
/// codec scan do real work.
pub fn wide_sequence() -> AveragingSeq {
    AveragingSeq::new(6, vec![3, 1, 4, 1, 5, 2]).expect("shape is valid")
}

/// The initialized integral `u -> int_a x^k u`.
pub fn initialized_power(a: i64, k: usize) -> OpExpr {
    OpExpr::modelled(Rational::from_integer(a.into()), Poly::xpow(k))
}
