//! Truncated two-variable series with exact rational coefficients, valuation
//! envelopes, Gauss norms and the asymptotic decision procedure for
//! `v(a_i) + e·i`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::valuation::{
    format_rational, int, monomial_log_norm, padic_valuation, rational_str, LogValue, PolyRadius,
    Prime, Rational,
};

/// Sublinear correction added to an envelope. Each is nonnegative,
/// nondecreasing and `o(i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sublinear {
    Zero,
    CeilSqrt,
    CeilLog2,
}

impl Sublinear {
    pub fn at(self, i: u64) -> u64 {
        match self {
            Sublinear::Zero => 0,
            Sublinear::CeilSqrt => {
                let r = i.sqrt();
                if r * r < i {
                    r + 1
                } else {
                    r
                }
            }
            Sublinear::CeilLog2 => {
                if i <= 1 {
                    0
                } else {
                    64 - u64::from((i - 1).leading_zeros())
                }
            }
        }
    }

    pub fn is_unbounded(self) -> bool {
        !matches!(self, Sublinear::Zero)
    }
}

/// `i ↦ ⌈α·i⌉ + s(i) + c`, the exact valuation of the `i`-th coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Envelope {
    #[serde(with = "rational_str")]
    pub alpha: Rational,
    pub sublinear: Sublinear,
    #[serde(with = "rational_str")]
    pub offset: Rational,
}

impl Envelope {
    pub fn new(alpha: Rational, sublinear: Sublinear, offset: Rational) -> Self {
        Envelope {
            alpha,
            sublinear,
            offset,
        }
    }

    pub fn value(&self, i: u64) -> Rational {
        let lin = (&self.alpha * Rational::from_integer(BigInt::from(i))).ceil();
        lin + Rational::from_integer(BigInt::from(self.sublinear.at(i))) + &self.offset
    }

    /// An affine lower bound `α·i + c ≤ value(i)` valid for every `i`.
    pub fn affine_floor(&self) -> (Rational, Rational) {
        (self.alpha.clone(), self.offset.clone())
    }
}

impl fmt::Display for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sublinear {
            Sublinear::Zero => "0",
            Sublinear::CeilSqrt => "ceil(sqrt i)",
            Sublinear::CeilLog2 => "ceil(log2 i)",
        };
        write!(
            f,
            "ceil({}·i) + {} + {}",
            format_rational(&self.alpha),
            s,
            format_rational(&self.offset)
        )
    }
}

/// Asymptotic behaviour of `v(a_i) + e·i` as `i → ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitVerdict {
    DivergesToPlusInf,
    Bounded,
    DivergesToMinusInf,
}

/// Decides the limit of `env(i) + slope·i`.
///
/// `⌈α i⌉ + c` differs from `α i + c` by less than one, so only the sign of
/// `α + slope` and the boundedness of the sublinear term matter.
pub fn envelope_limit(env: &Envelope, slope: &Rational) -> LimitVerdict {
    let net = &env.alpha + slope;
    if net.is_positive() {
        LimitVerdict::DivergesToPlusInf
    } else if net.is_negative() {
        LimitVerdict::DivergesToMinusInf
    } else if env.sublinear.is_unbounded() {
        LimitVerdict::DivergesToPlusInf
    } else {
        LimitVerdict::Bounded
    }
}

/// Affine lower bound `a·i + b·j + c` on the valuation of every coefficient
/// with total degree `i + j > degree`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineTail {
    #[serde(with = "rational_str")]
    pub a: Rational,
    #[serde(with = "rational_str")]
    pub b: Rational,
    #[serde(with = "rational_str")]
    pub c: Rational,
    pub degree: u32,
}

impl AffineTail {
    pub fn at(&self, i: u32, j: u32) -> Rational {
        &self.a * int(i64::from(i)) + &self.b * int(i64::from(j)) + &self.c
    }

    fn dominated_by(&self, other: &AffineTail) -> bool {
        self.a <= other.a && self.b <= other.b && self.c <= other.c
    }
}

pub type Exponent = (u32, u32);

/// Finite-support series `Σ a_{ij} x^i y^j` with an optional affine tail.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawSeries", into = "RawSeries")]
pub struct TruncatedSeries {
    support: BTreeMap<Exponent, Rational>,
    tail: Option<AffineTail>,
}

#[derive(Serialize, Deserialize)]
struct RawTerm {
    i: u32,
    j: u32,
    #[serde(with = "rational_str")]
    coeff: Rational,
}

#[derive(Serialize, Deserialize)]
struct RawSeries {
    support: Vec<RawTerm>,
    tail: Option<AffineTail>,
}

impl TryFrom<RawSeries> for TruncatedSeries {
    type Error = Error;

    fn try_from(raw: RawSeries) -> Result<Self> {
        let mut support = BTreeMap::new();
        for t in raw.support {
            if support.insert((t.i, t.j), t.coeff).is_some() {
                return Err(Error::InvalidSeries(format!(
                    "duplicate term ({}, {})",
                    t.i, t.j
                )));
            }
        }
        TruncatedSeries::new(support, raw.tail)
    }
}

impl From<TruncatedSeries> for RawSeries {
    fn from(s: TruncatedSeries) -> Self {
        RawSeries {
            support: s
                .support
                .into_iter()
                .map(|((i, j), coeff)| RawTerm { i, j, coeff })
                .collect(),
            tail: s.tail,
        }
    }
}

impl TruncatedSeries {
    /// Drops zero coefficients; rejects stored terms inside the tail region.
    pub fn new(support: BTreeMap<Exponent, Rational>, tail: Option<AffineTail>) -> Result<Self> {
        let support: BTreeMap<_, _> = support.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if let Some(t) = &tail {
            if let Some(&(i, j)) = support.keys().find(|&&(i, j)| i + j > t.degree) {
                return Err(Error::InvalidSeries(format!(
                    "stored term ({i}, {j}) lies in the tail region (degree > {})",
                    t.degree
                )));
            }
        }
        Ok(TruncatedSeries { support, tail })
    }

    pub fn zero() -> Self {
        TruncatedSeries::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), Rational)>) -> Self {
        let mut support = BTreeMap::new();
        for (k, c) in terms {
            *support.entry(k).or_insert_with(Rational::zero) += c;
        }
        TruncatedSeries::new(support, None).expect("tail-free series is always valid")
    }

    pub fn monomial(i: u32, j: u32, coeff: Rational) -> Self {
        Self::from_terms([((i, j), coeff)])
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, int(1))
    }

    pub fn y() -> Self {
        Self::monomial(0, 1, int(1))
    }

    pub fn support(&self) -> &BTreeMap<Exponent, Rational> {
        &self.support
    }

    pub fn tail(&self) -> Option<&AffineTail> {
        self.tail.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty() && self.tail.is_none()
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rational {
        self.support
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.support.keys().map(|&(i, j)| i + j).max()
    }

    /// Exact p-adic valuations of the stored coefficients.
    pub fn valuations(&self, p: Prime) -> impl Iterator<Item = (Exponent, LogValue)> + '_ {
        self.support
            .iter()
            .map(move |(&k, c)| (k, padic_valuation(c, p)))
    }

    /// `c·f`; the tail bound shifts by `v_p(c)`.
    pub fn scale(&self, c: &Rational, p: Prime) -> TruncatedSeries {
        let LogValue::Finite(shift) = padic_valuation(c, p) else {
            return TruncatedSeries::zero();
        };
        let support = self.support.iter().map(|(&k, v)| (k, v * c)).collect();
        let tail = self.tail.as_ref().map(|t| AffineTail {
            c: &t.c + shift,
            ..t.clone()
        });
        TruncatedSeries { support, tail }
    }

    pub fn neg(&self) -> TruncatedSeries {
        let support = self.support.iter().map(|(&k, v)| (k, -v)).collect();
        TruncatedSeries {
            support,
            tail: self.tail.clone(),
        }
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            f.write_str("0")?;
        }
        for (k, ((i, j), c)) in self.support.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({})", format_rational(c))?;
            match i {
                0 => {}
                1 => f.write_str("x")?,
                _ => write!(f, "x^{i}")?,
            }
            match j {
                0 => {}
                1 => f.write_str("y")?,
                _ => write!(f, "y^{j}")?,
            }
        }
        if let Some(t) = &self.tail {
            write!(f, " + O(deg > {})", t.degree)?;
        }
        Ok(())
    }
}

/// Gauss norm `max |a_{ij}| r_x^i r_y^j` in log coordinates (a minimum).
///
/// `r` must be closed in every variable. A one-variable radius requires a
/// series in `x` alone; the tail bound is then read as `a·i + c`.
pub fn gauss_norm(f: &TruncatedSeries, r: &PolyRadius, p: Prime) -> Result<LogValue> {
    r.ensure_closed()?;
    let exponents_of = |i: u32, j: u32| -> Result<Vec<i64>> {
        match r.dim() {
            2 => Ok(vec![i64::from(i), i64::from(j)]),
            1 if j == 0 => Ok(vec![i64::from(i)]),
            1 => Err(Error::DimensionMismatch(format!(
                "term y^{j} against a one-variable radius"
            ))),
            d => Err(Error::DimensionMismatch(format!("radius of dimension {d}"))),
        }
    };
    let mut norm = LogValue::Infinite;
    for ((i, j), v) in f.valuations(p) {
        let term = monomial_log_norm(&v, &exponents_of(i, j)?, r);
        norm = norm.min(term);
    }
    if let Some(t) = &f.tail {
        let e: Vec<&Rational> = r.exponents().collect();
        let slope = if e.len() == 2 {
            (&t.a + e[0]).min(&t.b + e[1])
        } else {
            &t.a + e[0]
        };
        if slope.is_negative() {
            return Err(Error::TailDominates);
        }
        let inf = &t.c + slope * int(i64::from(t.degree) + 1);
        match &norm {
            LogValue::Finite(m) if &inf >= m => {}
            _ => return Err(Error::TailDominates),
        }
    }
    Ok(norm)
}

/// Coefficient-wise sum.
///
/// Tails combine only when one bound is pointwise below the other; the result
/// is truncated at the smaller tail degree, absorbing stored terms beyond it
/// provided they satisfy the combined bound.
pub fn series_add(f: &TruncatedSeries, g: &TruncatedSeries, p: Prime) -> Result<TruncatedSeries> {
    let mut support = f.support.clone();
    for (k, c) in &g.support {
        *support.entry(*k).or_insert_with(Rational::zero) += c;
    }
    let tail = match (&f.tail, &g.tail) {
        (None, None) => None,
        (Some(t), None) | (None, Some(t)) => Some(t.clone()),
        (Some(s), Some(t)) => {
            let lower = if s.dominated_by(t) {
                s
            } else if t.dominated_by(s) {
                t
            } else {
                return Err(Error::IncompatibleTails(
                    "neither affine bound lies below the other".into(),
                ));
            };
            Some(AffineTail {
                degree: s.degree.min(t.degree),
                ..lower.clone()
            })
        }
    };
    if let Some(t) = &tail {
        for src in [f, g] {
            for (&(i, j), c) in &src.support {
                if i + j <= t.degree {
                    continue;
                }
                match padic_valuation(c, p) {
                    LogValue::Finite(v) if v < t.at(i, j) => {
                        return Err(Error::IncompatibleTails(format!(
                            "stored term ({i}, {j}) falls below the combined tail bound"
                        )));
                    }
                    _ => {}
                }
            }
        }
        support.retain(|&(i, j), _| i + j <= t.degree);
    }
    TruncatedSeries::new(support, tail)
}

pub fn series_sub(f: &TruncatedSeries, g: &TruncatedSeries, p: Prime) -> Result<TruncatedSeries> {
    series_add(f, &g.neg(), p)
}

/// Exact convolution product of two finite series.
pub fn series_mul(f: &TruncatedSeries, g: &TruncatedSeries) -> Result<TruncatedSeries> {
    if !f.is_finite() || !g.is_finite() {
        return Err(Error::TailUnsupported);
    }
    let mut support: BTreeMap<Exponent, Rational> = BTreeMap::new();
    for (&(i1, j1), a) in &f.support {
        for (&(i2, j2), b) in &g.support {
            *support
                .entry((i1 + i2, j1 + j2))
                .or_insert_with(Rational::zero) += a * b;
        }
    }
    TruncatedSeries::new(support, None)
}

/// `Σ_i a_i x^i y^{d·i}` with `v(a_i) = env(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiagonalSeries {
    pub d: u32,
    pub envelope: Envelope,
}

impl DiagonalSeries {
    pub fn new(d: u32, envelope: Envelope) -> Self {
        DiagonalSeries { d, envelope }
    }

    pub fn valuation(&self, i: u64) -> Rational {
        self.envelope.value(i)
    }

    /// Per-variable weights of the ray `i ↦ (i, d·i)`.
    pub fn weights(&self) -> [Rational; 2] {
        [int(1), int(i64::from(self.d))]
    }

    /// The first `terms` coefficients realized as `a_i = p^{env(i)}`, with an
    /// affine tail `α·i + c` covering the rest of the diagonal.
    pub fn realize(&self, terms: u32, p: Prime) -> Result<TruncatedSeries> {
        if !self.envelope.offset.is_integer() {
            return Err(Error::Realization(format!(
                "offset {} is not an integer",
                format_rational(&self.envelope.offset)
            )));
        }
        if terms == 0 {
            return Err(Error::Realization("need at least one term".into()));
        }
        let mut support = BTreeMap::new();
        for i in 0..terms {
            let v = self.valuation(u64::from(i)).to_integer();
            let v =
                i64::try_from(v).map_err(|_| Error::Realization("valuation overflow".into()))?;
            support.insert((i, self.d * i), p.power(v));
        }
        let (a, c) = self.envelope.affine_floor();
        let tail = AffineTail {
            a,
            b: Rational::zero(),
            c,
            degree: (1 + self.d) * (terms - 1),
        };
        TruncatedSeries::new(support, Some(tail))
    }
}
