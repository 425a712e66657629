//! Symbolic entry bounds `|x_ij| <= E(i, j)`.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `7`, `-3/2` or a decimal such as `0.25`, exactly.
pub fn parse_q(s: &str) -> Result<Q, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
        let den: BigInt = den.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in `{s}`"));
        }
        return Ok(Q::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad decimal `{s}`"));
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = match int.trim() {
            "" | "-" | "+" => BigInt::zero(),
            t => t.parse().map_err(|_| format!("bad decimal `{s}`"))?,
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part: BigInt = frac.parse().map_err(|_| format!("bad decimal `{s}`"))?;
        let mag = int_part.abs() * &scale + frac_part;
        let num = if negative { -mag } else { mag };
        return Ok(Q::new(num, scale));
    }
    s.parse::<BigInt>()
        .map(Q::from_integer)
        .map_err(|_| format!("bad number `{s}`"))
}

pub fn format_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Serde adapter writing rationals as `"p/q"` strings and accepting strings
/// or plain JSON numbers.
pub mod q_serde {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
            Float(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(t) => parse_q(&t).map_err(de::Error::custom),
            Raw::Int(k) => Ok(q(k)),
            Raw::Float(x) => Q::from_float(x).ok_or_else(|| de::Error::custom("non-finite number")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvelopeError {
    #[error("coefficient must be positive, got {0}")]
    NonPositiveCoefficient(String),
    #[error("decay base must lie in (0, 1], got {0}")]
    DecayOutOfRange(String),
    #[error("patch value must be nonnegative, got {0}")]
    NegativePatch(String),
    #[error("patch indices start at 1")]
    ZeroPatchIndex,
    #[error("cannot parse envelope: {0}")]
    Parse(String),
}

/// Where a term applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Full,
    /// `j >= i`
    Upper,
    /// `i >= j`
    Lower,
    /// `|i - j| <= w`
    Band(u64),
}

impl Region {
    pub fn contains(self, i: usize, j: usize) -> bool {
        match self {
            Region::Full => true,
            Region::Upper => j >= i,
            Region::Lower => i >= j,
            Region::Band(w) => i.abs_diff(j) as u64 <= w,
        }
    }

    pub fn transpose(self) -> Region {
        match self {
            Region::Upper => Region::Lower,
            Region::Lower => Region::Upper,
            other => other,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Full => f.write_str("full"),
            Region::Upper => f.write_str("upper"),
            Region::Lower => f.write_str("lower"),
            Region::Band(w) => write!(f, "band={w}"),
        }
    }
}

/// `c * min(i,j)^gamma * max(i,j)^delta * rho^max(i,j)` on `region`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvelopeTerm {
    #[serde(with = "q_serde")]
    pub c: Q,
    #[serde(with = "q_serde")]
    pub gamma: Q,
    #[serde(with = "q_serde")]
    pub delta: Q,
    #[serde(with = "q_serde")]
    pub rho: Q,
    pub region: Region,
}

impl EnvelopeTerm {
    pub fn new(c: Q, gamma: Q, delta: Q, rho: Q, region: Region) -> Result<Self, EnvelopeError> {
        let term = EnvelopeTerm {
            c,
            gamma,
            delta,
            rho,
            region,
        };
        term.validate()?;
        Ok(term)
    }

    /// Polynomial term `min^gamma max^delta` with unit coefficient.
    pub fn monomial(gamma: Q, delta: Q, region: Region) -> Self {
        EnvelopeTerm {
            c: Q::one(),
            gamma,
            delta,
            rho: Q::one(),
            region,
        }
    }

    pub fn validate(&self) -> Result<(), EnvelopeError> {
        if !self.c.is_positive() {
            return Err(EnvelopeError::NonPositiveCoefficient(format_q(&self.c)));
        }
        if !self.rho.is_positive() || self.rho > Q::one() {
            return Err(EnvelopeError::DecayOutOfRange(format_q(&self.rho)));
        }
        Ok(())
    }

    pub fn decays(&self) -> bool {
        self.rho < Q::one()
    }

    pub fn transpose(&self) -> Self {
        EnvelopeTerm {
            region: self.region.transpose(),
            ..self.clone()
        }
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        if !self.region.contains(i, j) {
            return 0.0;
        }
        self.ln_value_unchecked(i, j).exp()
    }

    fn ln_value_unchecked(&self, i: usize, j: usize) -> f64 {
        FloatTerm::from(self).ln_value((i.min(j) as f64).ln(), i.max(j))
    }
}

impl fmt::Display for EnvelopeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "term(c={}, min^{}, max^{}, rho={}, {})",
            format_q(&self.c),
            format_q(&self.gamma),
            format_q(&self.delta),
            format_q(&self.rho),
            self.region
        )
    }
}

/// Float parameters of a term, for the numeric oracle.
#[derive(Clone, Copy, Debug)]
pub(crate) struct FloatTerm {
    pub ln_c: f64,
    pub gamma: f64,
    pub delta: f64,
    pub ln_rho: f64,
    pub region: Region,
}

impl From<&EnvelopeTerm> for FloatTerm {
    fn from(t: &EnvelopeTerm) -> Self {
        FloatTerm {
            ln_c: ln_q(&t.c),
            gamma: q_to_f64(&t.gamma),
            delta: q_to_f64(&t.delta),
            ln_rho: ln_q(&t.rho),
            region: t.region,
        }
    }
}

impl FloatTerm {
    pub fn ln_value(&self, ln_min: f64, max: usize) -> f64 {
        let ln_max = (max as f64).ln();
        self.ln_c + self.gamma * ln_min + self.delta * ln_max + self.ln_rho * max as f64
    }
}

/// `ln x` for a positive rational, robust to huge numerators and denominators.
pub(crate) fn ln_q(x: &Q) -> f64 {
    fn ln_big(n: &BigInt) -> f64 {
        let bits = n.bits();
        if bits < 1000 {
            n.to_f64().unwrap().ln()
        } else {
            let shift = bits - 64;
            let top: BigInt = n >> shift;
            top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
    ln_big(x.numer()) - ln_big(x.denom())
}

/// A finite sum of terms plus a finite patch; the bound at `(i, j)` is
/// `max(patch(i, j), sum of applicable terms)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnvelopeMatrix {
    pub terms: Vec<EnvelopeTerm>,
    pub patch: BTreeMap<(usize, usize), Q>,
}

impl EnvelopeMatrix {
    pub fn new(terms: Vec<EnvelopeTerm>) -> Result<Self, EnvelopeError> {
        for t in &terms {
            t.validate()?;
        }
        Ok(EnvelopeMatrix {
            terms,
            patch: BTreeMap::new(),
        })
    }

    pub fn single(term: EnvelopeTerm) -> Self {
        EnvelopeMatrix {
            terms: vec![term],
            patch: BTreeMap::new(),
        }
    }

    /// `diag(c j^e rho^j)`.
    pub fn diagonal(c: Q, exponent: Q, rho: Q) -> Result<Self, EnvelopeError> {
        Ok(Self::single(EnvelopeTerm::new(c, exponent, Q::zero(), rho, Region::Band(0))?))
    }

    pub fn identity() -> Self {
        Self::single(EnvelopeTerm::monomial(Q::zero(), Q::zero(), Region::Band(0)))
    }

    pub fn with_patch(mut self, i: usize, j: usize, value: Q) -> Result<Self, EnvelopeError> {
        if i == 0 || j == 0 {
            return Err(EnvelopeError::ZeroPatchIndex);
        }
        if value.is_negative() {
            return Err(EnvelopeError::NegativePatch(format_q(&value)));
        }
        self.patch.insert((i, j), value);
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), EnvelopeError> {
        for t in &self.terms {
            t.validate()?;
        }
        for (&(i, j), v) in &self.patch {
            if i == 0 || j == 0 {
                return Err(EnvelopeError::ZeroPatchIndex);
            }
            if v.is_negative() {
                return Err(EnvelopeError::NegativePatch(format_q(v)));
            }
        }
        Ok(())
    }

    /// Widest band among the terms, 0 if none.
    pub fn max_band_width(&self) -> u64 {
        self.terms
            .iter()
            .filter_map(|t| match t.region {
                Region::Band(w) => Some(w),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        let sum: f64 = self.terms.iter().map(|t| t.value(i, j)).sum();
        match self.patch.get(&(i, j)) {
            Some(p) => sum.max(q_to_f64(p)),
            None => sum,
        }
    }

    /// Transpose of the bound, the envelope of `x*`.
    pub fn adjoint(&self) -> Self {
        EnvelopeMatrix {
            terms: self.terms.iter().map(EnvelopeTerm::transpose).collect(),
            patch: self.patch.iter().map(|(&(i, j), v)| ((j, i), v.clone())).collect(),
        }
    }

    /// Envelope literal, e.g. `term(c=1, min^0, max^-3, rho=1, band=0) + patch(1,2)=5`.
    pub fn parse(s: &str) -> Result<Self, EnvelopeError> {
        super::parse::parse_envelope(s)
    }
}

impl fmt::Display for EnvelopeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for t in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            write!(f, "{t}")?;
            first = false;
        }
        for ((i, j), v) in &self.patch {
            if !first {
                f.write_str(" + ")?;
            }
            write!(f, "patch({i},{j})={}", format_q(v))?;
            first = false;
        }
        if first {
            f.write_str("zero")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PatchEntry {
    i: usize,
    j: usize,
    #[serde(with = "q_serde")]
    value: Q,
}

#[derive(Serialize, Deserialize)]
struct EnvelopeJson {
    terms: Vec<EnvelopeTerm>,
    #[serde(default)]
    patch: Vec<PatchEntry>,
}

impl Serialize for EnvelopeMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        EnvelopeJson {
            terms: self.terms.clone(),
            patch: self
                .patch
                .iter()
                .map(|(&(i, j), v)| PatchEntry { i, j, value: v.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EnvelopeMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = EnvelopeJson::deserialize(d)?;
        let env = EnvelopeMatrix {
            terms: raw.terms,
            patch: raw.patch.into_iter().map(|p| ((p.i, p.j), p.value)).collect(),
        };
        env.validate().map_err(de::Error::custom)?;
        Ok(env)
    }
}
