//! Log-coordinate arithmetic for non-Archimedean absolute values and radii.
//!
//! A scalar `a` is represented by `v = v_p(a)` with `|a| = p^(-v)`, and a
//! radius `r` by `e` with `r = p^(-e)`. Larger `v` means a smaller absolute
//! value; larger `e` means a smaller radius.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// `n / d` as an exact rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Canonical `"a/b"` form: lowest terms, positive denominator, denominator
/// always written.
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let err = || Error::ParseRational(s.to_string());
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| err())?;
    let d = BigInt::from_str(d).map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(n, d))
}

/// Serde adapter for rationals as `"a/b"` strings.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>` as a list of `"a/b"` strings.
pub mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = v.iter().map(format_rational).collect();
        strings.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let strings = Vec::<String>::deserialize(d)?;
        strings
            .iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// The residue characteristic used when concrete coefficients are realized.
/// Certificate logic never depends on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        let prime = p >= 2
            && (2..)
                .take_while(|k: &u64| k * k <= p)
                .all(|k| !p.is_multiple_of(k));
        if prime {
            Ok(Prime(p))
        } else {
            Err(Error::InvalidPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// `p^k` as an exact rational (negative `k` allowed).
    pub fn power(self, k: i64) -> Rational {
        let base = BigInt::from(self.0);
        let mag = num_traits::pow(base, k.unsigned_abs() as usize);
        if k >= 0 {
            Rational::from_integer(mag)
        } else {
            Rational::new(BigInt::one(), mag)
        }
    }
}

impl Default for Prime {
    fn default() -> Self {
        Prime(2)
    }
}

impl<'de> Deserialize<'de> for Prime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Prime::new(u64::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn int_valuation(n: &BigInt, p: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// Exact p-adic valuation of a rational; `+∞` for zero.
pub fn padic_valuation(q: &Rational, p: Prime) -> LogValue {
    if q.is_zero() {
        return LogValue::Infinite;
    }
    let p = BigInt::from(p.get());
    let v = int_valuation(q.numer(), &p) - int_valuation(q.denom(), &p);
    LogValue::Finite(int(v))
}

/// `|a| = p^(-v)` stored as `v ∈ ℚ ∪ {+∞}`.
///
/// The derived `Ord` orders by `v`, with `+∞` last. Ordering of absolute
/// values is the reverse; use [`LogValue::cmp_abs`] for that.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogValue {
    Finite(Rational),
    Infinite,
}

impl LogValue {
    pub fn finite(v: Rational) -> Self {
        LogValue::Finite(v)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, LogValue::Infinite)
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            LogValue::Finite(v) => Some(v),
            LogValue::Infinite => None,
        }
    }

    /// Product of the underlying scalars.
    pub fn mul(&self, other: &LogValue) -> LogValue {
        match (self, other) {
            (LogValue::Finite(a), LogValue::Finite(b)) => LogValue::Finite(a + b),
            _ => LogValue::Infinite,
        }
    }

    /// Scale by `|r|^k` where `r` has log radius `e`: adds `k·e`.
    pub fn shift(&self, k: &Rational) -> LogValue {
        match self {
            LogValue::Finite(v) => LogValue::Finite(v + k),
            LogValue::Infinite => LogValue::Infinite,
        }
    }

    /// Compare the absolute values `p^(-v)`.
    pub fn cmp_abs(&self, other: &LogValue) -> Ordering {
        other.cmp(self)
    }
}

/// Free function form of [`LogValue::mul`].
pub fn logval_mul(a: &LogValue, b: &LogValue) -> LogValue {
    a.mul(b)
}

impl Add for &LogValue {
    type Output = LogValue;

    fn add(self, rhs: &LogValue) -> LogValue {
        self.mul(rhs)
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogValue::Finite(v) => f.write_str(&format_rational(v)),
            LogValue::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for LogValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" => Ok(LogValue::Infinite),
            t => parse_rational(t).map(LogValue::Finite),
        }
    }
}

impl Serialize for LogValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LogValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Radius `r = p^(-e)`: `e > 0` inside the unit disk, `e < 0` outside.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogRadius(#[serde(with = "rational_str")] pub Rational);

impl LogRadius {
    pub fn new(e: Rational) -> Self {
        LogRadius(e)
    }

    pub fn exponent(&self) -> &Rational {
        &self.0
    }

    /// The radius `1/r`.
    pub fn inverse(&self) -> LogRadius {
        LogRadius(-self.0.clone())
    }

    pub fn cmp_radius(&self, other: &LogRadius) -> Ordering {
        other.0.cmp(&self.0)
    }
}

/// How a variable's radius is quantified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Convergence at exactly this radius.
    Closed,
    /// Convergence at some strictly larger radius (strictly smaller `e`).
    Dagger,
    /// Convergence at every strictly smaller radius (every larger `e`).
    Open,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Closed => "closed",
            Mode::Dagger => "dagger",
            Mode::Open => "open",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RadiusVar {
    pub e: LogRadius,
    pub mode: Mode,
}

impl RadiusVar {
    pub fn new(e: Rational, mode: Mode) -> Self {
        RadiusVar {
            e: LogRadius(e),
            mode,
        }
    }
}

/// Per-variable radii with convergence modes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolyRadius {
    pub vars: Vec<RadiusVar>,
}

impl PolyRadius {
    pub fn new(vars: Vec<RadiusVar>) -> Self {
        PolyRadius { vars }
    }

    pub fn closed(exponents: &[Rational]) -> Self {
        PolyRadius {
            vars: exponents
                .iter()
                .map(|e| RadiusVar::new(e.clone(), Mode::Closed))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn exponents(&self) -> impl Iterator<Item = &Rational> {
        self.vars.iter().map(|v| v.e.exponent())
    }

    /// Same radii, every mode replaced by `Closed`.
    pub fn closed_hull(&self) -> PolyRadius {
        PolyRadius {
            vars: self
                .vars
                .iter()
                .map(|v| RadiusVar {
                    e: v.e.clone(),
                    mode: Mode::Closed,
                })
                .collect(),
        }
    }

    pub fn ensure_closed(&self) -> Result<()> {
        match self.vars.iter().position(|v| v.mode != Mode::Closed) {
            Some(k) => Err(Error::NotClosed(k, self.vars[k].mode.name())),
            None => Ok(()),
        }
    }
}

/// `log(|a| · r_1^{k_1} ⋯ r_n^{k_n})`, i.e. `v + Σ k_i e_i`.
///
/// Exponents may be negative (Laurent monomials). Panics if the exponent
/// count does not match the number of variables.
pub fn monomial_log_norm(v: &LogValue, exponents: &[i64], r: &PolyRadius) -> LogValue {
    assert_eq!(
        exponents.len(),
        r.dim(),
        "exponent count must match polyradius dimension"
    );
    let shift: Rational = exponents
        .iter()
        .zip(r.exponents())
        .map(|(&k, e)| e * int(k))
        .fold(Rational::zero(), |acc, t| acc + t);
    v.shift(&shift)
}

/// Floor of a rational as `i64`, when it fits.
pub fn floor_i64(q: &Rational) -> Option<i64> {
    q.floor().to_integer().to_i64()
}
