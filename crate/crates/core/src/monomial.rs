//! Monomial Rota-Baxter operators `x^n -> beta(n) x^{theta(n)}`.
//!
//! This module builds the known weight-zero families in closed form, checks
//! the generating conditions that characterise them, and classifies finite
//! tables back into closed form. The conditions, for `m`, `n` ranging over
//! the support `supp = { n : beta(n) != 0 }`, are
//!
//! ```text
//! (i)   nul + theta(supp) is contained in nul,
//! (ii)  theta(m) + theta(n) = theta(m + theta(n)) = theta(theta(m) + n),
//! (iii) beta(m)beta(n) = beta(m + theta(n))beta(n) + beta(n + theta(m))beta(m),
//! (iv)  supp + theta(supp) is contained in supp,
//! ```
//!
//! where `nul` is the complement of `supp`. Every constructed family has an
//! affine index map on residue classes, so (ii) and (iii) reduce to exact
//! polynomial identities in the two class quotients; verification runs that
//! symbolic reduction and an exhaustive table check side by side.
//!
//! Throughout, `theta(n) = 0` whenever `beta(n) = 0`: a table row `(0, 0)`
//! means the operator kills `x^n`, and equality of tables is taken literally.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::averaging::{phi, AveragingSeq, ThetaTable};
use crate::operator::{apply, check_rb, OpError, OpExpr};
use crate::poly::{rat_int, Poly, Rational};
use crate::report::RBReport;

/// Which monomials a projector composite keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Coefficient rule of a nondegenerate family, relative to an index map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule")]
pub enum BetaRule {
    /// `beta(n) = c / theta(n)` with `c != 0`.
    ReciprocalTheta {
        #[serde(with = "crate::io::rat_serde")]
        c: Rational,
    },
    /// `beta(l d + j) = seeds[j] / (l + 1)`, available when every `sigma_j`
    /// of the index map equals 1 so that `theta(l d + j) = (l + 1) d`.
    PeriodSeeds {
        #[serde(with = "crate::io::rat_vec_serde")]
        seeds: Vec<Rational>,
    },
}

/// A monomial Rota-Baxter operator family in closed form.
///
/// Deserialized values are unchecked; call [`MonomialFamily::validate`]
/// before trusting wire input. The builders in this module only hand out
/// validated families.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum MonomialFamily {
    /// `beta` never vanishes; `theta` is the averaging map of `avg`.
    Nondegenerate {
        avg: AveragingSeq,
        beta_rule: BetaRule,
    },
    /// Support is `k N`: row `k m` follows the inner rules on `m` with the
    /// exponent scaled by `k`, every other row is zero.
    DegenerateMultiples {
        k: usize,
        inner_theta: AveragingSeq,
        inner_beta: BetaRule,
    },
    /// Support is the complement of `k N`: `theta(k l + i) = k(l + t)` and
    /// `beta = c / theta` there, zero on multiples of `k`.
    DegenerateComplement {
        k: usize,
        t: usize,
        #[serde(with = "crate::io::rat_serde")]
        c: Rational,
    },
    /// A base operator composed with the even or odd projector
    /// `f(x) -> (f(x) +/- f(-x)) / 2`; only the canonical bases `2 int_0 x`
    /// (even) and `2 int_0` (odd) are accepted.
    ProjectorComposite { parity: Parity, base: Box<OpExpr> },
}

/// Finite table of a monomial operator: row `n` holds `(beta(n), theta(n))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<TableRow>", into = "Vec<TableRow>")]
pub struct MonomialTable {
    rows: Vec<TableRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    #[serde(with = "crate::io::rat_serde")]
    pub beta: Rational,
    pub theta: usize,
}

/// Window-level structure of a degenerate support set: the image period `e`,
/// the residue tails `s_i + e N`, sporadic members, the gap set and Frobenius
/// number of the scaled image semigroup, and a determining set. All data is
/// read off a finite table and labelled with the window it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuppStructure {
    pub e: usize,
    pub sporadic: Vec<usize>,
    pub residues: Vec<usize>,
    pub gaps: Vec<usize>,
    pub frobenius: usize,
    pub determining: Vec<usize>,
    pub confidence_bound: usize,
}

/// Affine shape of a polynomial index map: `theta(n) = n + k` with
/// `alpha(n) := 1/beta(n) = c (n + k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyTheta {
    pub k: usize,
    #[serde(with = "crate::io::rat_serde")]
    pub c: Rational,
}

/// Everything a finite table reveals about the operator behind it. Fields
/// after `is_rbo` are populated only when the Rota-Baxter check passed.
#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub is_rbo: RBReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub injective: Option<bool>,
    /// Whether `supp + theta(supp)` stays inside `supp` as far as the window
    /// can see; the classification machinery assumes this closure, so its
    /// observed status is reported rather than taken for granted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_closed_on_window: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub averaging: Option<AveragingSeq>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovered: Option<MonomialFamily>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poly_theta: Option<PolyTheta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supp_structure: Option<SuppStructure>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MonomialError {
    #[error("scale constant must be nonzero")]
    ZeroScale,
    #[error("seed {index} is zero")]
    ZeroSeed { index: usize },
    #[error("expected {expected} seeds, got {found}")]
    SeedCount { expected: usize, found: usize },
    #[error("period {d} is too small for a seed family")]
    PeriodTooSmall { d: usize },
    #[error("seed rules need every sigma_j equal to 1")]
    SeedsNeedUnitSigma,
    #[error("multiplier {k} must be at least {min}")]
    MultiplierTooSmall { k: usize, min: usize },
    #[error("shift t must be at least 1")]
    ZeroShift,
    #[error("projector composites only accept their canonical base operator")]
    NonCanonicalBase,
    #[error("inner rules fail the generating conditions: {note}")]
    InnerRuleViolation { note: String },
    #[error("empty table")]
    EmptyTable,
    #[error("row {n} has beta = 0 but theta != 0")]
    ZeroThetaConvention { n: usize },
    #[error("image of x^{n} is not a monomial")]
    NotMonomial { n: usize },
    #[error("table bound {bound} is below the minimum {min} for classification")]
    BoundTooSmall { bound: usize, min: usize },
    #[error("table bound {bound} leaves no room to verify the Rota-Baxter law")]
    InsufficientVerifyRange { bound: usize },
    #[error("operation needs a nondegenerate table")]
    DegenerateInput,
    #[error("support is not closed: x^{m} * theta-shift of x^{n} escapes it")]
    ClosureViolation { m: usize, n: usize },
    #[error("image-exponent set is empty (zero operator table)")]
    EmptyImageSet,
    #[error("support row {n} has theta = 0, a nonzero constant image")]
    ConstantImage { n: usize },
    #[error("found {classes} residue tails, which saturates the period {e}")]
    ResidueSaturation { classes: usize, e: usize },
    #[error("{s} is not in the support")]
    NotInSupport { s: usize },
    #[error("need source row {needed} but the table stops at {bound}")]
    InsufficientRange { needed: usize, bound: usize },
    #[error("shifted row {n} reads source row {sigma}, which is zero")]
    InducedDegenerate { n: usize, sigma: usize },
    #[error("shift identity fails at (m, n) = ({m}, {n})")]
    SigmaShiftViolated { m: usize, n: usize },
    #[error("induced table fails the Rota-Baxter check: {note}")]
    InducedNotRb { note: String },
    #[error("line {line}: expected \"n,beta_num,beta_den,theta\" with n = {expected}, got {text:?}")]
    MalformedCsv {
        line: usize,
        expected: usize,
        text: String,
    },
    #[error(transparent)]
    Op(#[from] OpError),
}

impl TryFrom<Vec<TableRow>> for MonomialTable {
    type Error = MonomialError;
    fn try_from(rows: Vec<TableRow>) -> Result<Self, MonomialError> {
        MonomialTable::new(rows)
    }
}

impl From<MonomialTable> for Vec<TableRow> {
    fn from(table: MonomialTable) -> Vec<TableRow> {
        table.rows
    }
}

impl MonomialTable {
    /// Validates the zero convention `beta(n) = 0 => theta(n) = 0`.
    pub fn new(rows: Vec<TableRow>) -> Result<Self, MonomialError> {
        if rows.is_empty() {
            return Err(MonomialError::EmptyTable);
        }
        for (n, row) in rows.iter().enumerate() {
            if row.beta.is_zero() && row.theta != 0 {
                return Err(MonomialError::ZeroThetaConvention { n });
            }
        }
        Ok(MonomialTable { rows })
    }

    pub fn from_pairs(pairs: Vec<(Rational, usize)>) -> Result<Self, MonomialError> {
        Self::new(
            pairs
                .into_iter()
                .map(|(beta, theta)| TableRow { beta, theta })
                .collect(),
        )
    }

    /// Tabulates an operator by applying it to `x^0 .. x^bound`; refuses
    /// operators whose images are not monomials.
    pub fn from_op(op: &OpExpr, bound: usize) -> Result<Self, MonomialError> {
        let mut rows = Vec::with_capacity(bound + 1);
        for n in 0..=bound {
            let image = apply(op, &Poly::xpow(n))?;
            let mut terms = image.iter_nonzero();
            let row = match (terms.next(), terms.next()) {
                (None, _) => TableRow {
                    beta: Rational::zero(),
                    theta: 0,
                },
                (Some((exp, coeff)), None) => TableRow {
                    beta: coeff.clone(),
                    theta: exp,
                },
                _ => return Err(MonomialError::NotMonomial { n }),
            };
            rows.push(row);
        }
        Self::new(rows)
    }

    /// Largest tabulated exponent.
    pub fn bound(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    pub fn row(&self, n: usize) -> Option<&TableRow> {
        self.rows.get(n)
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.rows.iter().all(|row| !row.beta.is_zero())
    }

    fn in_supp(&self, n: usize) -> bool {
        self.rows.get(n).is_some_and(|row| !row.beta.is_zero())
    }
}

/// Data of one support residue class `r` mod `period` in the uniform shape
/// `theta(period*l + r) = period*(l + t)` and
/// `beta(period*l + r) = num / (den * (l + e))`.
struct ClassForm {
    residue: usize,
    t: usize,
    num: Rational,
    den: usize,
    e: usize,
}

struct NormalForm {
    period: usize,
    classes: Vec<ClassForm>,
}

fn rule_classes(avg: &AveragingSeq, rule: &BetaRule, stretch: usize) -> Vec<ClassForm> {
    (0..avg.d())
        .map(|j| {
            let (num, den, e) = match rule {
                BetaRule::ReciprocalTheta { c } => (c.clone(), avg.d(), avg.sigma()[j]),
                BetaRule::PeriodSeeds { seeds } => (seeds[j].clone(), 1, 1),
            };
            ClassForm {
                residue: stretch * j,
                t: avg.sigma()[j],
                num,
                den,
                e,
            }
        })
        .collect()
}

fn rule_beta(avg: &AveragingSeq, rule: &BetaRule, m: usize) -> Rational {
    match rule {
        BetaRule::ReciprocalTheta { c } => c / rat_int(avg.theta(m) as i64),
        BetaRule::PeriodSeeds { seeds } => {
            &seeds[m % avg.d()] / rat_int((m / avg.d() + 1) as i64)
        }
    }
}

fn validate_rule(avg: &AveragingSeq, rule: &BetaRule) -> Result<(), MonomialError> {
    match rule {
        BetaRule::ReciprocalTheta { c } => {
            if c.is_zero() {
                return Err(MonomialError::ZeroScale);
            }
        }
        BetaRule::PeriodSeeds { seeds } => {
            if seeds.len() != avg.d() {
                return Err(MonomialError::SeedCount {
                    expected: avg.d(),
                    found: seeds.len(),
                });
            }
            if let Some(index) = seeds.iter().position(Rational::is_zero) {
                return Err(MonomialError::ZeroSeed { index });
            }
            if avg.sigma().iter().any(|&s| s != 1) {
                return Err(MonomialError::SeedsNeedUnitSigma);
            }
        }
    }
    Ok(())
}

fn canonical_projector_base(parity: Parity) -> OpExpr {
    let two = rat_int(2);
    match parity {
        // 2 int_0 x(.): on even monomials this is 2 x^{n+2}/(n+2)
        Parity::Even => OpExpr::lin_comb(vec![(
            two,
            OpExpr::compose(
                OpExpr::integral_from(rat_int(0)),
                OpExpr::multiply_by(Poly::x()),
            ),
        )]),
        // 2 int_0: on odd monomials this is 2 x^{n+1}/(n+1)
        Parity::Odd => OpExpr::lin_comb(vec![(two, OpExpr::integral_from(rat_int(0)))]),
    }
}

impl MonomialFamily {
    /// The row `(beta(n), theta(n))`, with `(0, 0)` off the support.
    pub fn image(&self, n: usize) -> (Rational, usize) {
        let zero = (Rational::zero(), 0);
        match self {
            MonomialFamily::Nondegenerate { avg, beta_rule } => {
                (rule_beta(avg, beta_rule, n), avg.theta(n))
            }
            MonomialFamily::DegenerateMultiples {
                k,
                inner_theta,
                inner_beta,
            } => {
                if n % k != 0 {
                    return zero;
                }
                let m = n / k;
                (rule_beta(inner_theta, inner_beta, m), k * inner_theta.theta(m))
            }
            MonomialFamily::DegenerateComplement { k, t, c } => {
                if n % k == 0 {
                    return zero;
                }
                let theta = k * (n / k + t);
                (c / rat_int(theta as i64), theta)
            }
            MonomialFamily::ProjectorComposite { parity, .. } => match parity {
                Parity::Even if n % 2 == 0 => (rat_int(2) / rat_int((n + 2) as i64), n + 2),
                Parity::Odd if n % 2 == 1 => (rat_int(2) / rat_int((n + 1) as i64), n + 1),
                _ => zero,
            },
        }
    }

    pub fn beta(&self, n: usize) -> Rational {
        self.image(n).0
    }

    pub fn theta(&self, n: usize) -> usize {
        self.image(n).1
    }

    /// Expands the family to a table on `x^0 .. x^bound`.
    pub fn table(&self, bound: usize) -> MonomialTable {
        MonomialTable::from_pairs((0..=bound).map(|n| self.image(n)).collect())
            .expect("family rows satisfy the zero convention")
    }

    /// Checks the structural invariants of the variant. Builders always
    /// return validated families; wire input must pass through here.
    pub fn validate(&self) -> Result<(), MonomialError> {
        match self {
            MonomialFamily::Nondegenerate { avg, beta_rule } => validate_rule(avg, beta_rule),
            MonomialFamily::DegenerateMultiples {
                k,
                inner_theta,
                inner_beta,
            } => {
                if *k < 1 {
                    return Err(MonomialError::MultiplierTooSmall { k: *k, min: 1 });
                }
                validate_rule(inner_theta, inner_beta)
            }
            MonomialFamily::DegenerateComplement { k, t, c } => {
                if *k < 2 {
                    return Err(MonomialError::MultiplierTooSmall { k: *k, min: 2 });
                }
                if *t < 1 {
                    return Err(MonomialError::ZeroShift);
                }
                if c.is_zero() {
                    return Err(MonomialError::ZeroScale);
                }
                Ok(())
            }
            MonomialFamily::ProjectorComposite { parity, base } => {
                if **base != canonical_projector_base(*parity) {
                    return Err(MonomialError::NonCanonicalBase);
                }
                Ok(())
            }
        }
    }

    /// The constant-direction witness `r` with `(P x^n)' = r x^n`, when one
    /// exists: exactly the full-support families with period 1, where
    /// `r = c x^{sigma_0 - 1}`.
    pub fn differential_witness(&self) -> Option<Poly> {
        let (avg, rule) = match self {
            MonomialFamily::Nondegenerate { avg, beta_rule } => (avg, beta_rule),
            MonomialFamily::DegenerateMultiples {
                k: 1,
                inner_theta,
                inner_beta,
            } => (inner_theta, inner_beta),
            _ => return None,
        };
        if avg.d() != 1 {
            return None;
        }
        let scale = match rule {
            BetaRule::ReciprocalTheta { c } => c.clone(),
            BetaRule::PeriodSeeds { seeds } => seeds[0].clone(),
        };
        Some(Poly::monomial(scale, avg.sigma()[0] - 1))
    }

    /// Uniform residue-class shape of the family; support classes only.
    fn normal_form(&self) -> NormalForm {
        match self {
            MonomialFamily::Nondegenerate { avg, beta_rule } => NormalForm {
                period: avg.d(),
                classes: rule_classes(avg, beta_rule, 1),
            },
            MonomialFamily::DegenerateMultiples {
                k,
                inner_theta,
                inner_beta,
            } => NormalForm {
                period: k * inner_theta.d(),
                classes: rule_classes(inner_theta, inner_beta, *k),
            },
            MonomialFamily::DegenerateComplement { k, t, c } => NormalForm {
                period: *k,
                classes: (1..*k)
                    .map(|residue| ClassForm {
                        residue,
                        t: *t,
                        num: c.clone(),
                        den: *k,
                        e: *t,
                    })
                    .collect(),
            },
            MonomialFamily::ProjectorComposite { parity, .. } => NormalForm {
                period: 2,
                classes: vec![ClassForm {
                    residue: match parity {
                        Parity::Even => 0,
                        Parity::Odd => 1,
                    },
                    t: 1,
                    num: Rational::one(),
                    den: 1,
                    e: 1,
                }],
            },
        }
    }
}

/// Nondegenerate family `beta(n) = c / theta(n)` over the given index map.
pub fn build_nondegenerate(
    avg: AveragingSeq,
    c: Rational,
) -> Result<MonomialFamily, MonomialError> {
    let family = MonomialFamily::Nondegenerate {
        avg,
        beta_rule: BetaRule::ReciprocalTheta { c },
    };
    family.validate()?;
    Ok(family)
}

/// Nondegenerate family with the extreme index map `theta(l d + j) = (l+1) d`
/// and per-residue seeds `beta(l d + j) = seeds[j] / (l + 1)`.
pub fn build_period_seeds(
    d: usize,
    seeds: Vec<Rational>,
) -> Result<MonomialFamily, MonomialError> {
    if d < 2 {
        return Err(MonomialError::PeriodTooSmall { d });
    }
    if seeds.len() != d {
        return Err(MonomialError::SeedCount {
            expected: d,
            found: seeds.len(),
        });
    }
    let avg = AveragingSeq::new(d, vec![1; d]).expect("unit sigmas are valid");
    let family = MonomialFamily::Nondegenerate {
        avg,
        beta_rule: BetaRule::PeriodSeeds { seeds },
    };
    family.validate()?;
    Ok(family)
}

/// Degenerate family supported on `k N`. The inner rules act on the quotient
/// index `m = n / k`, with the actual exponent `k` times the inner index map:
/// `P(x^{k m}) = beta~(m) x^{k theta~(m)}`. With `k = 1` this is just a
/// nondegenerate family and is returned as one.
pub fn build_degenerate_multiples(
    k: usize,
    inner_theta: AveragingSeq,
    inner_beta: BetaRule,
) -> Result<MonomialFamily, MonomialError> {
    let family = if k == 1 {
        MonomialFamily::Nondegenerate {
            avg: inner_theta,
            beta_rule: inner_beta,
        }
    } else {
        MonomialFamily::DegenerateMultiples {
            k,
            inner_theta,
            inner_beta,
        }
    };
    family.validate()?;
    let conditions = verify_family_conditions(&family, 16);
    if !conditions.holds {
        return Err(MonomialError::InnerRuleViolation {
            note: conditions.note.unwrap_or_else(|| "condition check failed".into()),
        });
    }
    Ok(family)
}

/// Degenerate family supported off `k N`, killing multiples of `k` and
/// mapping `x^{k l + i}` to `(c / (k(l+t))) x^{k(l+t)}`.
pub fn build_degenerate_complement(
    k: usize,
    t: usize,
    c: Rational,
) -> Result<MonomialFamily, MonomialError> {
    let family = MonomialFamily::DegenerateComplement { k, t, c };
    family.validate()?;
    Ok(family)
}

/// The base operator `2 int_0 x` (even) or `2 int_0` (odd) composed with the
/// matching parity projector, packaged as an applicable operator term.
pub fn build_projector_composite(parity: Parity) -> OpExpr {
    OpExpr::family(MonomialFamily::ProjectorComposite {
        parity,
        base: Box::new(canonical_projector_base(parity)),
    })
}

/// Bivariate polynomials in the class quotients `(l1, l2)`, used to verify
/// the generating conditions symbolically.
#[derive(Clone, Debug, PartialEq)]
struct Poly2 {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl Poly2 {
    /// `c + a*l1 + b*l2`.
    fn affine(c: Rational, a: i64, b: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, 0), c);
        terms.insert((1, 0), rat_int(a));
        terms.insert((0, 1), rat_int(b));
        Poly2 { terms }.normalized()
    }

    fn normalized(mut self) -> Self {
        self.terms.retain(|_, coeff| !coeff.is_zero());
        self
    }

    fn mul(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &other.terms {
                let entry = terms
                    .entry((a1 + a2, b1 + b2))
                    .or_insert_with(Rational::zero);
                *entry += c1 * c2;
            }
        }
        Poly2 { terms }.normalized()
    }

    fn sub(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (key, coeff) in &other.terms {
            let entry = terms.entry(*key).or_insert_with(Rational::zero);
            *entry -= coeff;
        }
        Poly2 { terms }.normalized()
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Checks conditions (i)-(iv) for a family, both symbolically on the residue
/// classes and exhaustively on the expanded table up to `n_max`, and demands
/// the two verdicts agree. Invalid families are reported as failing rather
/// than panicking, so wire input can be fed through directly.
pub fn verify_family_conditions(fam: &MonomialFamily, n_max: usize) -> RBReport {
    if let Err(e) = fam.validate() {
        return RBReport {
            holds: false,
            bound: n_max,
            counterexample: None,
            note: Some(format!("invalid family: {e}")),
        };
    }
    let symbolic = symbolic_conditions(fam);
    let tablewise = tablewise_conditions(fam, n_max);
    debug_assert_eq!(
        symbolic.is_none(),
        tablewise.holds,
        "symbolic and tablewise condition checks disagree: {symbolic:?}"
    );
    tablewise
}

/// Same condition check driven purely by a finite table, for operators that
/// exist only as data.
pub fn verify_table_conditions(table: &MonomialTable) -> RBReport {
    let beta = |n: usize| table.row(n).map(|row| row.beta.clone());
    let theta = |n: usize| table.row(n).map(|row| row.theta);
    condition_scan(table.bound(), &beta, &theta)
}

fn tablewise_conditions(fam: &MonomialFamily, n_max: usize) -> RBReport {
    condition_scan(n_max, &|n| Some(fam.beta(n)), &|n| Some(fam.theta(n)))
}

/// The shared condition scan. `beta`/`theta` return `None` past the data
/// horizon; pairs whose shifted indices fall off the horizon are skipped, so
/// a finite table is checked exactly as far as it can be.
fn condition_scan(
    bound: usize,
    beta: &dyn Fn(usize) -> Option<Rational>,
    theta: &dyn Fn(usize) -> Option<usize>,
) -> RBReport {
    for m in 0..=bound {
        for n in 0..=bound {
            let bm = beta(m).expect("m is within the bound");
            let bn = beta(n).expect("n is within the bound");
            if bn.is_zero() {
                continue;
            }
            let tn = theta(n).expect("n is within the bound");
            let shifted = m + tn;
            if bm.is_zero() {
                // condition (i): the zero set absorbs shifts by theta(supp)
                if let Some(bs) = beta(shifted) {
                    if !bs.is_zero() {
                        let ts = theta(shifted).expect("row exists");
                        let residual = Poly::monomial(bs, ts);
                        return RBReport::failing(bound, m, n, residual)
                            .with_note("zero set is not preserved: P(x^(m + theta(n))) != 0");
                    }
                }
                continue;
            }
            let tm = theta(m).expect("m is within the bound");
            let (Some(b_mshift), Some(b_nshift)) = (beta(shifted), beta(tm + n)) else {
                continue;
            };
            let t_mshift = theta(shifted).expect("row exists");
            let t_nshift = theta(tm + n).expect("row exists");
            // condition (iv): support closure, needed before (ii) makes sense
            if b_mshift.is_zero() || b_nshift.is_zero() {
                let escape = if b_mshift.is_zero() { shifted } else { tm + n };
                return RBReport::failing(bound, m, n, Poly::xpow(escape))
                    .with_note("support is not closed under theta shifts");
            }
            // condition (ii): both additivity identities
            if tm + tn != t_mshift || tm + tn != t_nshift {
                let chained = if tm + tn != t_mshift { t_mshift } else { t_nshift };
                let residual =
                    Poly::constant(rat_int((tm + tn) as i64) - rat_int(chained as i64));
                return RBReport::failing(bound, m, n, residual)
                    .with_note("index map is not additive along its own shifts");
            }
            // condition (iii): the product identity on coefficients
            let lhs = &bm * &bn;
            let rhs = &(&b_mshift * &bn) + &(&b_nshift * &bm);
            if lhs != rhs {
                return RBReport::failing(bound, m, n, Poly::constant(lhs - rhs))
                    .with_note("coefficient product identity fails");
            }
        }
    }
    RBReport::holding(bound)
}

/// Reduces the conditions to exact polynomial identities in the residue-class
/// quotients. Returns a violation note, or `None` when everything holds.
fn symbolic_conditions(fam: &MonomialFamily) -> Option<String> {
    let nf = fam.normal_form();
    let period = nf.period;

    // anchor the normal form against the family's own images: three leading
    // rows of every residue class, support and zero alike
    for r in 0..period {
        let class = nf.classes.iter().find(|c| c.residue == r);
        for l in 0..3usize {
            let n = period * l + r;
            let (b, th) = fam.image(n);
            match class {
                Some(form) => {
                    let expect_theta = period * (l + form.t);
                    let expect_beta =
                        &form.num / (rat_int(form.den as i64) * rat_int((l + form.e) as i64));
                    if th != expect_theta || b != expect_beta {
                        return Some(format!("normal form mismatch at n = {n}"));
                    }
                }
                None => {
                    if !b.is_zero() || th != 0 {
                        return Some(format!("unexpected support at n = {n}"));
                    }
                }
            }
        }
    }

    // theta values are the multiples period*(l + t), so any shift by a theta
    // value fixes residues mod the period: condition (i) and the membership
    // half of (iv) are structural once the anchoring above holds
    for c1 in &nf.classes {
        for c2 in &nf.classes {
            // condition (ii) on classes r1, r2: all three expressions are
            // affine in the quotients (l1, l2)
            let m_period = period as i64;
            let both = Poly2::affine(
                rat_int(((c1.t + c2.t) * period) as i64),
                m_period,
                m_period,
            );
            // m + theta(n) stays in class r1 with quotient l1 + l2 + t2
            let chained_m = Poly2::affine(
                rat_int(((c2.t + c1.t) * period) as i64),
                m_period,
                m_period,
            );
            // theta(m) + n stays in class r2 with quotient l1 + t1 + l2
            let chained_n = Poly2::affine(
                rat_int(((c1.t + c2.t) * period) as i64),
                m_period,
                m_period,
            );
            if !both.sub(&chained_m).is_zero() || !both.sub(&chained_n).is_zero() {
                return Some(format!(
                    "index additivity fails on classes ({}, {})",
                    c1.residue, c2.residue
                ));
            }
            // condition (iii): after cancelling num1*num2/(den1*den2), the
            // identity A*B = (l1+e1)*B + (l2+e2)*A must hold, where
            // A = l1+l2+t2+e1 and B = l1+l2+t1+e2 clear the denominators
            let a = Poly2::affine(rat_int((c2.t + c1.e) as i64), 1, 1);
            let b = Poly2::affine(rat_int((c1.t + c2.e) as i64), 1, 1);
            let l1 = Poly2::affine(rat_int(c1.e as i64), 1, 0);
            let l2 = Poly2::affine(rat_int(c2.e as i64), 0, 1);
            let identity = a.mul(&b).sub(&l1.mul(&b)).sub(&l2.mul(&a));
            if !identity.is_zero() {
                return Some(format!(
                    "coefficient identity fails on classes ({}, {})",
                    c1.residue, c2.residue
                ));
            }
        }
    }

    None
}

/// The largest `nv` such that every application inside `check_rb` at bound
/// `nv` stays within the table, or `None` when even `nv = 1` does not fit.
fn feasible_check_bound(table: &MonomialTable) -> Option<usize> {
    let bound = table.bound();
    let mut theta_max = 0usize;
    let mut best = None;
    for n in 0..=bound {
        theta_max = theta_max.max(table.rows[n].theta);
        if n + theta_max <= bound {
            best = Some(n);
        } else {
            break;
        }
    }
    best.filter(|&nv| nv >= 1)
}

fn support_closed_on_window(table: &MonomialTable) -> bool {
    let bound = table.bound();
    for m in 0..=bound {
        if !table.in_supp(m) {
            continue;
        }
        for n in 0..=bound {
            if !table.in_supp(n) {
                continue;
            }
            let shifted = m + table.rows[n].theta;
            if shifted <= bound && !table.in_supp(shifted) {
                return false;
            }
        }
    }
    true
}

/// Classifies a finite table: verifies the Rota-Baxter law on the largest
/// feasible sub-window, then recovers as much closed-form structure as the
/// window supports. Tables shorter than bound 16 are refused outright.
pub fn classify(table: &MonomialTable) -> Result<ClassificationReport, MonomialError> {
    let bound = table.bound();
    if bound < 16 {
        return Err(MonomialError::BoundTooSmall { bound, min: 16 });
    }
    let nv = feasible_check_bound(table)
        .ok_or(MonomialError::InsufficientVerifyRange { bound })?;
    let rb = check_rb(&OpExpr::table(table.clone()), nv)?;
    if !rb.holds {
        return Ok(ClassificationReport {
            is_rbo: rb,
            degenerate: None,
            injective: None,
            support_closed_on_window: None,
            averaging: None,
            recovered: None,
            poly_theta: None,
            supp_structure: None,
        });
    }
    let closed = support_closed_on_window(table);
    if !table.is_nondegenerate() {
        return Ok(ClassificationReport {
            is_rbo: rb,
            degenerate: Some(true),
            injective: Some(false),
            support_closed_on_window: Some(closed),
            averaging: None,
            recovered: None,
            poly_theta: None,
            supp_structure: support_structure(table).ok(),
        });
    }
    let thetas = ThetaTable::new(table.rows.iter().map(|row| row.theta).collect())
        .expect("tables are nonempty");
    let averaging = phi(&thetas).ok();
    let recovered = averaging
        .as_ref()
        .and_then(|avg| recover_beta_rule(table, avg));
    let injective = averaging.as_ref().map(|avg| avg.d() == 1);
    let poly_theta = detect_polynomial_theta(table)?;
    Ok(ClassificationReport {
        is_rbo: rb,
        degenerate: Some(false),
        injective,
        support_closed_on_window: Some(closed),
        averaging,
        recovered,
        poly_theta,
        supp_structure: None,
    })
}

/// Tries the reciprocal rule first (it is forced when the period is 1), then
/// the seed pattern; refuses when neither matches the whole window.
fn recover_beta_rule(table: &MonomialTable, avg: &AveragingSeq) -> Option<MonomialFamily> {
    let rows = table.rows();
    let c = &rows[0].beta * rat_int(rows[0].theta as i64);
    if !c.is_zero()
        && rows
            .iter()
            .all(|row| &row.beta * rat_int(row.theta as i64) == c)
    {
        return Some(MonomialFamily::Nondegenerate {
            avg: avg.clone(),
            beta_rule: BetaRule::ReciprocalTheta { c },
        });
    }
    let d = avg.d();
    if avg.sigma().iter().all(|&s| s == 1) && rows.len() > d {
        let seeds: Vec<Rational> = rows[..d].iter().map(|row| row.beta.clone()).collect();
        let matches = rows.iter().enumerate().all(|(n, row)| {
            &row.beta * rat_int((n / d + 1) as i64) == seeds[n % d]
        });
        if matches {
            return Some(MonomialFamily::Nondegenerate {
                avg: avg.clone(),
                beta_rule: BetaRule::PeriodSeeds { seeds },
            });
        }
    }
    None
}

/// Tests whether `theta` and `alpha := 1/beta` agree with polynomial
/// sequences on the table (finite differences of order up to half the table
/// length), and if so verifies the forced affine shape `theta(n) = n + k`,
/// `alpha(n) = c(n + k)`. Anything else is a refusal, not an error.
pub fn detect_polynomial_theta(
    table: &MonomialTable,
) -> Result<Option<PolyTheta>, MonomialError> {
    if !table.is_nondegenerate() {
        return Err(MonomialError::DegenerateInput);
    }
    let rows = table.rows();
    let cap = table.bound() / 2;
    let theta_seq: Vec<Rational> = rows.iter().map(|r| rat_int(r.theta as i64)).collect();
    let alpha_seq: Vec<Rational> = rows.iter().map(|r| r.beta.recip()).collect();
    if !is_polynomial_sequence(&theta_seq, cap) || !is_polynomial_sequence(&alpha_seq, cap) {
        return Ok(None);
    }
    let k = rows[0].theta;
    if k < 1 {
        return Ok(None);
    }
    let affine_theta = rows.iter().enumerate().all(|(n, row)| row.theta == n + k);
    let c = &alpha_seq[0] / rat_int(k as i64);
    let affine_alpha = alpha_seq
        .iter()
        .enumerate()
        .all(|(n, alpha)| *alpha == &c * rat_int((n + k) as i64));
    if affine_theta && affine_alpha {
        Ok(Some(PolyTheta { k, c }))
    } else {
        Ok(None)
    }
}

/// A sequence is polynomial of degree at most `cap` exactly when its
/// `(cap+1)`-th finite difference vanishes on the remaining window.
fn is_polynomial_sequence(values: &[Rational], cap: usize) -> bool {
    let mut diff = values.to_vec();
    for _ in 0..=cap {
        if diff.len() < 2 {
            return true;
        }
        diff = diff.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    diff.iter().all(Rational::is_zero)
}

/// Reads the support structure off a degenerate table: image period, residue
/// tails, sporadic members, semigroup gaps with their Frobenius number, and
/// the determining set `supp minus (supp + T)`.
///
/// The table is assumed to already pass the Rota-Baxter check; the closure
/// hypothesis `supp + theta(supp) in supp` is checked here on-window and
/// violations are refused.
pub fn support_structure(table: &MonomialTable) -> Result<SuppStructure, MonomialError> {
    let bound = table.bound();
    let supp: Vec<usize> = (0..=bound).filter(|&n| table.in_supp(n)).collect();
    if supp.is_empty() {
        return Err(MonomialError::EmptyImageSet);
    }
    if let Some(&n) = supp.iter().find(|&&n| table.rows[n].theta == 0) {
        return Err(MonomialError::ConstantImage { n });
    }
    for &m in &supp {
        for &n in &supp {
            let shifted = m + table.rows[n].theta;
            if shifted <= bound && !table.in_supp(shifted) {
                return Err(MonomialError::ClosureViolation { m, n });
            }
        }
    }

    let image: BTreeSet<usize> = supp
        .iter()
        .map(|&n| table.rows[n].theta)
        .filter(|&t| t <= bound)
        .collect();
    if image.is_empty() {
        return Err(MonomialError::EmptyImageSet);
    }
    let e = image.iter().fold(0usize, |acc, &t| acc.gcd(&t));
    let generators: BTreeSet<usize> = image.iter().map(|&t| t / e).collect();
    let (gaps, frobenius) = semigroup_gaps(&generators);

    // residue classes mod e: a class is a tail when its trailing window
    // positions all lie in the support (at least two of them, so a lone
    // endpoint is not over-read); everything earlier is sporadic
    let supp_set: BTreeSet<usize> = supp.iter().copied().collect();
    let mut residues = Vec::new();
    let mut sporadic = Vec::new();
    for r in 0..e {
        let positions: Vec<usize> = (r..=bound).step_by(e).collect();
        let members: Vec<usize> = positions
            .iter()
            .copied()
            .filter(|p| supp_set.contains(p))
            .collect();
        if members.is_empty() {
            continue;
        }
        let tail_start = positions
            .iter()
            .rev()
            .take_while(|p| supp_set.contains(p))
            .last()
            .copied();
        let tail_len = positions
            .iter()
            .rev()
            .take_while(|p| supp_set.contains(p))
            .count();
        match tail_start {
            Some(s) if tail_len >= 2 => {
                residues.push(s);
                sporadic.extend(members.into_iter().filter(|&m| m < s));
            }
            _ => sporadic.extend(members),
        }
    }
    if residues.len() >= e {
        return Err(MonomialError::ResidueSaturation {
            classes: residues.len(),
            e,
        });
    }
    sporadic.sort_unstable();
    residues.sort_unstable();

    let sums: BTreeSet<usize> = supp
        .iter()
        .flat_map(|&s| image.iter().map(move |&t| s + t))
        .filter(|&v| v <= bound)
        .collect();
    let determining: Vec<usize> = supp
        .iter()
        .copied()
        .filter(|v| !sums.contains(v))
        .collect();

    Ok(SuppStructure {
        e,
        sporadic,
        residues,
        gaps,
        frobenius,
        determining,
        confidence_bound: bound,
    })
}

/// Gap set and Frobenius number of the numerical semigroup generated by a
/// coprime set. Reachability is scanned upward until a full run of
/// `min(generators)` consecutive values appears, after which nothing further
/// can be a gap.
fn semigroup_gaps(generators: &BTreeSet<usize>) -> (Vec<usize>, usize) {
    let gmin = *generators.iter().next().expect("generators are nonempty");
    if gmin == 1 {
        return (Vec::new(), 0);
    }
    let mut reachable = vec![true];
    let mut gaps = Vec::new();
    let mut run = 0usize;
    let mut i = 1usize;
    while run < gmin {
        let hit = generators
            .iter()
            .take_while(|&&g| g <= i)
            .any(|&g| reachable[i - g]);
        reachable.push(hit);
        if hit {
            run += 1;
        } else {
            run = 0;
            gaps.push(i);
        }
        i += 1;
    }
    let frobenius = gaps.last().copied().unwrap_or(0);
    (gaps, frobenius)
}

/// Builds the nondegenerate operator `P0(x^n) := P(x^{sigma(n)})` from a
/// degenerate table, where `sigma(l e + r) = (f + l) e + s` shifts every
/// exponent into the eventually-periodic part of the support.
///
/// Every output row is checked to be nonzero and the result must itself pass
/// the Rota-Baxter check; either failure is refused. The shift identity
/// `sigma(n + theta(sigma(m))) = sigma(n) + theta(sigma(m))` is verified on
/// the produced range.
pub fn induced_nondegenerate(
    table: &MonomialTable,
    structure: &SuppStructure,
    s: usize,
) -> Result<MonomialTable, MonomialError> {
    if !table.in_supp(s) {
        return Err(MonomialError::NotInSupport { s });
    }
    let bound = table.bound();
    let e = structure.e;
    let f = structure.frobenius;
    let sigma = |n: usize| (f + n / e) * e + s;
    if sigma(1) > bound {
        return Err(MonomialError::InsufficientRange {
            needed: sigma(1),
            bound,
        });
    }
    let out_bound = (0..=bound)
        .take_while(|&n| sigma(n) <= bound)
        .last()
        .expect("sigma(0) <= sigma(1) <= bound");
    let mut rows = Vec::with_capacity(out_bound + 1);
    for n in 0..=out_bound {
        let src = sigma(n);
        let row = table.row(src).expect("sigma(n) <= bound");
        if row.beta.is_zero() {
            return Err(MonomialError::InducedDegenerate { n, sigma: src });
        }
        rows.push(row.clone());
    }
    for m in 0..=out_bound {
        let shift = rows[m].theta;
        for n in 0..=out_bound {
            if sigma(n + shift) != sigma(n) + shift {
                return Err(MonomialError::SigmaShiftViolated { m, n });
            }
        }
    }
    let induced = MonomialTable::new(rows)?;
    let nv = feasible_check_bound(&induced).ok_or(MonomialError::InsufficientVerifyRange {
        bound: induced.bound(),
    })?;
    let report = check_rb(&OpExpr::table(induced.clone()), nv)?;
    if !report.holds {
        let note = match &report.counterexample {
            Some(ce) => format!("residual at ({}, {})", ce.m, ce.n),
            None => "no counterexample recorded".into(),
        };
        return Err(MonomialError::InducedNotRb { note });
    }
    Ok(induced)
}
