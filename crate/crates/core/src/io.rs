//! External representations: JSON encodings for the serde-backed types and
//! line-oriented CSV for tables and functionals.
//!
//! Rationals travel as a `[numerator, denominator]` pair of decimal strings
//! so that arbitrary-precision values survive JSON readers that would round
//! large integers; plain JSON integers are accepted on input for convenience.
//! A polynomial is the array of its coefficient pairs indexed by exponent,
//! e.g. `x^2/2 - 1` is `[["-1","1"],["0","1"],["1","2"]]`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::averaging::{AveragingError, ThetaTable};
use crate::double_product::{DoubleProductError, Functional};
use crate::monomial::{MonomialError, MonomialTable, TableRow};
use crate::poly::{Poly, Rational};

/// Decimal string on output; string or integer accepted on input.
#[derive(Deserialize)]
#[serde(untagged)]
enum IntText {
    Text(String),
    Number(i64),
}

impl IntText {
    fn to_bigint<E: serde::de::Error>(&self) -> Result<BigInt, E> {
        match self {
            IntText::Number(n) => Ok(BigInt::from(*n)),
            IntText::Text(t) => t
                .parse::<BigInt>()
                .map_err(|_| E::custom(format!("malformed integer {t:?}"))),
        }
    }
}

fn rational_parts(r: &Rational) -> (String, String) {
    (r.numer().to_string(), r.denom().to_string())
}

fn rational_from_parts<E: serde::de::Error>(num: &IntText, den: &IntText) -> Result<Rational, E> {
    let num = num.to_bigint()?;
    let den = den.to_bigint()?;
    if den == BigInt::from(0) {
        return Err(E::custom("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// Field-level serde for a single `Rational`, via
/// `#[serde(with = "crate::io::rat_serde")]`.
pub mod rat_serde {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        rational_parts(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let (num, den) = <(IntText, IntText)>::deserialize(d)?;
        rational_from_parts(&num, &den)
    }
}

/// Field-level serde for an `Option<Rational>`.
pub mod rat_opt_serde {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        r.as_ref().map(rational_parts).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let pair = Option::<(IntText, IntText)>::deserialize(d)?;
        pair.map(|(num, den)| rational_from_parts(&num, &den))
            .transpose()
    }
}

/// Field-level serde for a `Vec<Rational>`.
pub mod rat_vec_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(rational_parts)
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<(IntText, IntText)>::deserialize(d)?
            .iter()
            .map(|(num, den)| rational_from_parts(num, den))
            .collect()
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coeffs()
            .iter()
            .map(rational_parts)
            .collect::<Vec<_>>()
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pairs = Vec::<(IntText, IntText)>::deserialize(d)?;
        let coeffs = pairs
            .iter()
            .map(|(num, den)| rational_from_parts(num, den))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Poly::from_coeffs(coeffs))
    }
}

/// Nonempty data lines with 1-based numbers, skipping a leading header line
/// when it matches the codec's column layout.
fn csv_rows<'a>(text: &'a str, header: &'static str) -> impl Iterator<Item = (usize, &'a str)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty())
        .filter(move |(i, line)| {
            !(*i == 1 && line.to_ascii_lowercase().replace(' ', "") == header)
        })
}

pub fn theta_table_to_csv(table: &ThetaTable) -> String {
    let mut out = String::from("n,theta\n");
    for (n, theta) in table.values().iter().enumerate() {
        writeln!(out, "{n},{theta}").expect("string writes cannot fail");
    }
    out
}

pub fn theta_table_from_csv(text: &str) -> Result<ThetaTable, AveragingError> {
    let mut values = Vec::new();
    for (line, raw) in csv_rows(text, "n,theta") {
        let expected = values.len();
        let malformed = || AveragingError::MalformedCsv {
            line,
            expected,
            text: raw.to_string(),
        };
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        let (n_txt, theta_txt) = match fields.as_slice() {
            [n, theta] => (*n, *theta),
            _ => return Err(malformed()),
        };
        let n: usize = n_txt.parse().map_err(|_| malformed())?;
        if n != expected {
            return Err(malformed());
        }
        values.push(theta_txt.parse().map_err(|_| malformed())?);
    }
    ThetaTable::new(values)
}

pub fn monomial_table_to_csv(table: &MonomialTable) -> String {
    let mut out = String::from("n,beta_num,beta_den,theta\n");
    for (n, row) in table.rows().iter().enumerate() {
        writeln!(
            out,
            "{n},{},{},{}",
            row.beta.numer(),
            row.beta.denom(),
            row.theta
        )
        .expect("string writes cannot fail");
    }
    out
}

pub fn monomial_table_from_csv(text: &str) -> Result<MonomialTable, MonomialError> {
    let mut rows = Vec::new();
    for (line, raw) in csv_rows(text, "n,beta_num,beta_den,theta") {
        let expected = rows.len();
        let malformed = || MonomialError::MalformedCsv {
            line,
            expected,
            text: raw.to_string(),
        };
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        let (n_txt, num_txt, den_txt, theta_txt) = match fields.as_slice() {
            [n, num, den, theta] => (*n, *num, *den, *theta),
            _ => return Err(malformed()),
        };
        let n: usize = n_txt.parse().map_err(|_| malformed())?;
        if n != expected {
            return Err(malformed());
        }
        let num: BigInt = num_txt.parse().map_err(|_| malformed())?;
        let den: BigInt = den_txt.parse().map_err(|_| malformed())?;
        if den == BigInt::from(0) {
            return Err(malformed());
        }
        rows.push(TableRow {
            beta: Rational::new(num, den),
            theta: theta_txt.parse().map_err(|_| malformed())?,
        });
    }
    MonomialTable::new(rows)
}

pub fn functional_to_csv(f: &Functional) -> String {
    let mut out = String::from("n,mu_num,mu_den\n");
    for (n, value) in f.values().iter().enumerate() {
        writeln!(out, "{n},{},{}", value.numer(), value.denom())
            .expect("string writes cannot fail");
    }
    out
}

pub fn functional_from_csv(text: &str) -> Result<Functional, DoubleProductError> {
    let mut values = Vec::new();
    for (line, raw) in csv_rows(text, "n,mu_num,mu_den") {
        let expected = values.len();
        let malformed = || DoubleProductError::MalformedCsv {
            line,
            expected,
            text: raw.to_string(),
        };
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        let (n_txt, num_txt, den_txt) = match fields.as_slice() {
            [n, num, den] => (*n, *num, *den),
            _ => return Err(malformed()),
        };
        let n: usize = n_txt.parse().map_err(|_| malformed())?;
        if n != expected {
            return Err(malformed());
        }
        let num: BigInt = num_txt.parse().map_err(|_| malformed())?;
        let den: BigInt = den_txt.parse().map_err(|_| malformed())?;
        if den == BigInt::from(0) {
            return Err(malformed());
        }
        values.push(Rational::new(num, den));
    }
    Functional::new(values)
}
