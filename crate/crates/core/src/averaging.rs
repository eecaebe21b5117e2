//! Finite encoding of the index maps behind monomial operators.
//!
//! A map `theta : N -> N` is *averaging* when
//!
//! ```text
//! theta(m) + theta(n) = theta(m + theta(n))   for all m, n.
//! ```
//!
//! Every monotone averaging map with `theta(n) > n` is determined by a finite
//! amount of data: the primitive period `d` of `theta - id` together with the
//! quotients `sigma_j = theta(j)/d` for `j < d`. It then acts by
//!
//! ```text
//! theta(l*d + j) = (l + sigma_j) * d.
//! ```
//!
//! [`AveragingSeq`] is that finite datum, [`psi`] expands it to a value table,
//! and [`phi`] recovers it from a long enough table, refusing honestly when
//! the window cannot exhibit a period.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{rat_int, Poly};
use crate::report::RBReport;

/// Finite description of an averaging map: the primitive period `d` of
/// `theta - id` and the multipliers `sigma_0 .. sigma_{d-1}`, each at least 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAveragingSeq")]
pub struct AveragingSeq {
    d: usize,
    sigma: Vec<usize>,
}

/// Unvalidated wire form of [`AveragingSeq`].
#[derive(Deserialize)]
struct RawAveragingSeq {
    d: usize,
    sigma: Vec<usize>,
}

impl Serialize for RawAveragingSeq {
    fn serialize<S: serde::Serializer>(&self, _s: S) -> Result<S::Ok, S::Error> {
        unreachable!("wire form is deserialize-only")
    }
}

impl TryFrom<RawAveragingSeq> for AveragingSeq {
    type Error = AveragingError;
    fn try_from(raw: RawAveragingSeq) -> Result<Self, AveragingError> {
        AveragingSeq::new(raw.d, raw.sigma)
    }
}

/// Table of values `theta(0) .. theta(N)` of a candidate index map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaTable {
    values: Vec<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AveragingError {
    #[error("period must be at least 1")]
    ZeroPeriod,
    #[error("sigma has {len} entries but the period is {d}")]
    SigmaLength { d: usize, len: usize },
    #[error("sigma[{j}] must be at least 1")]
    ZeroSigma { j: usize },
    #[error("no period up to {max_period} is visible in a table of bound {bound}")]
    NoObservablePeriod { bound: usize, max_period: usize },
    #[error("theta({n}) = {theta} is not a positive multiple of the period {d}")]
    NotMultipleOfPeriod { n: usize, theta: usize, d: usize },
    #[error("empty theta table")]
    EmptyTable,
    #[error("line {line}: expected \"n,theta\" with n = {expected}, got {text:?}")]
    MalformedCsv {
        line: usize,
        expected: usize,
        text: String,
    },
}

impl AveragingSeq {
    /// Validates `sigma.len() == d >= 1` and every `sigma_j >= 1`.
    pub fn new(d: usize, sigma: Vec<usize>) -> Result<Self, AveragingError> {
        if d == 0 {
            return Err(AveragingError::ZeroPeriod);
        }
        if sigma.len() != d {
            return Err(AveragingError::SigmaLength {
                d,
                len: sigma.len(),
            });
        }
        if let Some(j) = sigma.iter().position(|&s| s == 0) {
            return Err(AveragingError::ZeroSigma { j });
        }
        Ok(AveragingSeq { d, sigma })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    /// The value `theta(n) = (n/d + sigma_{n mod d}) * d`.
    pub fn theta(&self, n: usize) -> usize {
        (n / self.d + self.sigma[n % self.d]) * self.d
    }
}

impl ThetaTable {
    pub fn new(values: Vec<usize>) -> Result<Self, AveragingError> {
        if values.is_empty() {
            return Err(AveragingError::EmptyTable);
        }
        Ok(ThetaTable { values })
    }

    /// Largest tabulated index.
    pub fn bound(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn get(&self, n: usize) -> Option<usize> {
        self.values.get(n).copied()
    }
}

/// Expands a sequence to the value table `theta(0) .. theta(n_max)`.
pub fn psi(seq: &AveragingSeq, n_max: usize) -> ThetaTable {
    ThetaTable {
        values: (0..=n_max).map(|n| seq.theta(n)).collect(),
    }
}

/// Recovers the sequence from a value table.
///
/// The primitive period is the least `j` with `theta(r + j) = theta(r) + j`
/// across the whole window; only periods up to half the table bound are
/// trusted, and shorter tables are refused rather than guessed at.
pub fn phi(table: &ThetaTable) -> Result<AveragingSeq, AveragingError> {
    let n = table.bound();
    let theta = table.values();
    let d = (1..=n / 2)
        .find(|&j| (0..=n - j).all(|r| theta[r + j] == theta[r] + j))
        .ok_or(AveragingError::NoObservablePeriod {
            bound: n,
            max_period: n / 2,
        })?;
    let sigma = (0..d)
        .map(|j| {
            if theta[j] == 0 || theta[j] % d != 0 {
                Err(AveragingError::NotMultipleOfPeriod {
                    n: j,
                    theta: theta[j],
                    d,
                })
            } else {
                Ok(theta[j] / d)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    AveragingSeq::new(d, sigma)
}

/// Checks the averaging law `theta(m) + theta(n) = theta(m + theta(n))` over
/// every pair evaluable inside the table window.
pub fn check_averaging(table: &ThetaTable) -> RBReport {
    let bound = table.bound();
    let theta = table.values();
    for m in 0..=bound {
        for n in 0..=bound {
            let Some(&chained) = theta.get(m + theta[n]) else {
                continue;
            };
            let lhs = theta[m] + theta[n];
            if lhs != chained {
                let residual =
                    Poly::constant(rat_int(lhs as i64) - rat_int(chained as i64));
                return RBReport::failing(bound, m, n, residual);
            }
        }
    }
    RBReport::holding(bound)
}

/// The image data of an averaging map: its period `d` and the least
/// multiplier, so that `im(theta) = { d*t : t >= min sigma }`.
pub fn theta_image(seq: &AveragingSeq) -> (usize, usize) {
    (seq.d, *seq.sigma.iter().min().expect("sigma is nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn seq(d: usize, sigma: &[usize]) -> AveragingSeq {
        AveragingSeq::new(d, sigma.to_vec()).unwrap()
    }

    #[test]
    fn construction_validates_shape() {
        assert_eq!(
            AveragingSeq::new(0, vec![]).unwrap_err(),
            AveragingError::ZeroPeriod
        );
        assert_eq!(
            AveragingSeq::new(2, vec![1]).unwrap_err(),
            AveragingError::SigmaLength { d: 2, len: 1 }
        );
        assert_eq!(
            AveragingSeq::new(2, vec![1, 0]).unwrap_err(),
            AveragingError::ZeroSigma { j: 1 }
        );
    }

    #[test]
    fn psi_closed_forms() {
        // d = 1, sigma = (k): theta(n) = n + k
        let shift = psi(&seq(1, &[3]), 10);
        assert!((0..=10).all(|n| shift.get(n) == Some(n + 3)));

        // d = 2, sigma = (1,1): theta(2k) = theta(2k+1) = 2k + 2
        let even = psi(&seq(2, &[1, 1]), 11);
        assert!((0..=5).all(|k| even.get(2 * k) == Some(2 * k + 2)
            && even.get(2 * k + 1) == Some(2 * k + 2)));

        // d = 3, sigma = (1,1,1): theta(n) = 3(floor(n/3) + 1)
        let triple = psi(&seq(3, &[1, 1, 1]), 12);
        assert!((0..=12).all(|n| triple.get(n) == Some(3 * (n / 3 + 1))));
    }

    #[test]
    fn phi_recovers_shift_map() {
        let table = ThetaTable::new((0..=12).map(|n| n + 3).collect()).unwrap();
        assert_eq!(phi(&table).unwrap(), seq(1, &[3]));
    }

    #[test]
    fn phi_refuses_short_or_aperiodic_tables() {
        // bound 8 cannot exhibit the period 5
        let short = psi(&seq(5, &[1, 2, 1, 1, 3]), 8);
        assert!(matches!(
            phi(&short),
            Err(AveragingError::NoObservablePeriod { bound: 8, .. })
        ));
        // theta(n) = n^2 has no period at all
        let squares = ThetaTable::new((0..=10).map(|n| n * n).collect()).unwrap();
        assert!(matches!(
            phi(&squares),
            Err(AveragingError::NoObservablePeriod { .. })
        ));
    }

    #[test]
    fn phi_rejects_values_off_the_period_grid() {
        // period 2 is visible but theta(0) = 3 is not a multiple of 2
        let table = ThetaTable::new(vec![3, 3, 5, 5, 7, 7, 9, 9, 11, 11]).unwrap();
        assert_eq!(
            phi(&table).unwrap_err(),
            AveragingError::NotMultipleOfPeriod { n: 0, theta: 3, d: 2 }
        );
    }

    #[test]
    fn averaging_law_on_shift_tables() {
        for k in 1..=4 {
            let table = psi(&seq(1, &[k]), 40);
            assert!(check_averaging(&table).holds);
        }
    }

    #[test]
    fn averaging_law_rejects_doubling() {
        // theta(n) = 2n + 1: theta(0) + theta(0) = 2 but theta(0 + theta(0)) = 3
        let table = ThetaTable::new((0..=20).map(|n| 2 * n + 1).collect()).unwrap();
        let report = check_averaging(&table);
        assert!(!report.holds);
        let ce = report.counterexample.unwrap();
        assert_eq!((ce.m, ce.n), (0, 0));
        assert_eq!(ce.residual, Poly::constant(rat_int(-1)));
    }

    #[test]
    fn image_of_fixed_sequences() {
        assert_eq!(theta_image(&seq(2, &[1, 1])), (2, 1));
        assert_eq!(theta_image(&seq(1, &[4])), (1, 4));
        assert_eq!(theta_image(&seq(3, &[2, 5, 2])), (3, 2));
    }

    #[test]
    fn image_formula_matches_enumeration() {
        let s = seq(3, &[2, 5, 2]);
        let n_max = 60;
        let observed: BTreeSet<usize> =
            psi(&s, n_max).values().iter().copied().collect();
        let (d, smin) = theta_image(&s);
        // every observed value lies on the grid d * t, t >= smin
        assert!(observed.iter().all(|&v| v % d == 0 && v / d >= smin));
        // and the grid is covered past the boundary effects of the window
        for t in smin..=(smin + n_max / d - 2) {
            assert!(observed.contains(&(d * t)), "missing {}", d * t);
        }
    }

    prop_compose! {
        fn arb_seq()(d in 1usize..=8)
            (d in Just(d), sigma in prop::collection::vec(1usize..=10, d..=d))
            -> AveragingSeq {
            AveragingSeq::new(d, sigma).unwrap()
        }
    }

    proptest! {
        #[test]
        fn codec_roundtrip(s in arb_seq()) {
            let n = 4 * s.d() * s.sigma().iter().max().unwrap();
            let table = psi(&s, n);
            prop_assert_eq!(phi(&table).unwrap(), s);
        }

        #[test]
        fn expanded_tables_satisfy_the_law(s in arb_seq()) {
            let n = 4 * s.d() * s.sigma().iter().max().unwrap();
            prop_assert!(check_averaging(&psi(&s, n)).holds);
        }

        #[test]
        fn recovered_period_is_primitive(s in arb_seq()) {
            // phi scans periods from 1 upward, so a successful roundtrip
            // certifies that no smaller period fits the expanded table
            let n = 4 * s.d() * s.sigma().iter().max().unwrap();
            let table = psi(&s, n);
            let recovered = phi(&table).unwrap();
            for smaller in 1..recovered.d() {
                let differs = (0..=n - smaller)
                    .any(|r| table.values()[r + smaller] != table.values()[r] + smaller);
                prop_assert!(differs);
            }
        }
    }
}
