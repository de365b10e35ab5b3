//! Half-open annuli `{r < |x| ≤ R}`: Laurent series, the split into a
//! Fréchet factor (negative powers) and an LB factor (nonnegative powers),
//! and the check that the exhausting system has vanishing derived limit.
//!
//! In `w = 1/x` the negative part lives on the open disk `|w| < 1/r`, so its
//! exponent is `−e_r` in open mode; the nonnegative part lives on the
//! overconvergent disk `|x| ≤ R`, exponent `e_R` in dagger mode.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::derived::{
    delta_solve, Cocycle, CorpusReport, EtaFamily, InverseSystem, Lift, Lim1Verdict, SolveOutcome,
    SystemConfig, SystemKind, DEFAULT_HORIZON,
};
use crate::error::{Error, Result};
use crate::membership::{ray_membership, MembershipCertificate, SpaceSpec};
use crate::par::{self, Execution};
use crate::series::{Envelope, Sublinear, TruncatedSeries};
use crate::valuation::{
    format_rational, int, padic_valuation, rat, rational_str, LogValue, Mode, PolyRadius, Prime,
    RadiusVar, Rational,
};

/// Degree bound used by [`annulus_rlim_check`] by default.
pub const DEFAULT_DEGREE_BOUND: u32 = 200;

/// Levels compared by the structural check when the exhaustion is unbounded.
pub const STRUCTURAL_LEVELS: usize = 64;

/// Behaviour of a Laurent series beyond its stored terms on one side.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LaurentTail {
    /// No terms past the stored ones.
    #[default]
    Zero,
    /// `v(a_{±i}) = env(i)` for every `i > beyond`; stored terms there must
    /// agree with the envelope.
    Envelope { envelope: Envelope, beyond: u64 },
    /// Terms continue with unknown valuations.
    Unspecified,
}

impl LaurentTail {
    fn covers(&self, i: u64) -> Option<&Envelope> {
        match self {
            LaurentTail::Envelope { envelope, beyond } if i > *beyond => Some(envelope),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, LaurentTail::Zero)
    }
}

/// `Σ_{i∈ℤ} a_i x^i` with finite stored support and one tail per direction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLaurent", into = "RawLaurent")]
pub struct LaurentTruncatedSeries {
    support: BTreeMap<i64, Rational>,
    neg_tail: LaurentTail,
    pos_tail: LaurentTail,
}

#[derive(Serialize, Deserialize)]
struct RawLaurentTerm {
    i: i64,
    #[serde(with = "rational_str")]
    coeff: Rational,
}

#[derive(Serialize, Deserialize)]
struct RawLaurent {
    support: Vec<RawLaurentTerm>,
    #[serde(default)]
    neg_tail: LaurentTail,
    #[serde(default)]
    pos_tail: LaurentTail,
}

impl TryFrom<RawLaurent> for LaurentTruncatedSeries {
    type Error = Error;

    fn try_from(raw: RawLaurent) -> Result<Self> {
        let mut support = BTreeMap::new();
        for t in raw.support {
            if support.insert(t.i, t.coeff).is_some() {
                return Err(Error::InvalidSeries(format!("duplicate term x^{}", t.i)));
            }
        }
        Ok(LaurentTruncatedSeries::from_parts(
            support,
            raw.neg_tail,
            raw.pos_tail,
        ))
    }
}

impl From<LaurentTruncatedSeries> for RawLaurent {
    fn from(s: LaurentTruncatedSeries) -> Self {
        RawLaurent {
            support: s
                .support
                .into_iter()
                .map(|(i, coeff)| RawLaurentTerm { i, coeff })
                .collect(),
            neg_tail: s.neg_tail,
            pos_tail: s.pos_tail,
        }
    }
}

impl LaurentTruncatedSeries {
    /// Drops zero coefficients. Envelope consistency is checked separately
    /// by [`validate`](Self::validate), since inputs read from corpora must
    /// be representable even when wrong.
    pub fn from_parts(
        support: BTreeMap<i64, Rational>,
        neg_tail: LaurentTail,
        pos_tail: LaurentTail,
    ) -> Self {
        let support = support.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        LaurentTruncatedSeries {
            support,
            neg_tail,
            pos_tail,
        }
    }

    /// [`from_parts`](Self::from_parts) followed by [`validate`](Self::validate).
    pub fn new(
        support: BTreeMap<i64, Rational>,
        neg_tail: LaurentTail,
        pos_tail: LaurentTail,
        p: Prime,
    ) -> Result<Self> {
        let s = Self::from_parts(support, neg_tail, pos_tail);
        s.validate(p)?;
        Ok(s)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, Rational)>) -> Self {
        Self::from_parts(
            terms.into_iter().collect(),
            LaurentTail::Zero,
            LaurentTail::Zero,
        )
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn support(&self) -> &BTreeMap<i64, Rational> {
        &self.support
    }

    pub fn neg_tail(&self) -> &LaurentTail {
        &self.neg_tail
    }

    pub fn pos_tail(&self) -> &LaurentTail {
        &self.pos_tail
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty() && self.neg_tail.is_zero() && self.pos_tail.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.neg_tail.is_zero() && self.pos_tail.is_zero()
    }

    pub fn coeff(&self, i: i64) -> Rational {
        self.support.get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    /// Largest `|i|` among stored terms.
    pub fn degree(&self) -> Option<u64> {
        self.support.keys().map(|i| i.unsigned_abs()).max()
    }

    /// Stored terms inside an envelope region must have exactly the
    /// envelope's valuation.
    pub fn validate(&self, p: Prime) -> Result<()> {
        for (&i, c) in &self.support {
            let tail = if i < 0 {
                &self.neg_tail
            } else {
                &self.pos_tail
            };
            if let Some(env) = tail.covers(i.unsigned_abs()) {
                let want = LogValue::Finite(env.value(i.unsigned_abs()));
                let got = padic_valuation(c, p);
                if got != want {
                    return Err(Error::InvalidSeries(format!(
                        "coefficient of x^{i} has valuation {got}, envelope says {want}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The negative part as a power series in `w = 1/x` (finite only).
    pub fn to_w_series(&self) -> Result<TruncatedSeries> {
        if !self.is_finite() || self.support.keys().any(|&i| i >= 0) {
            return Err(Error::InvalidSeries(
                "expected a finite series in negative powers only".into(),
            ));
        }
        let terms = self.support.iter().map(|(&i, c)| {
            let k = u32::try_from(i.unsigned_abs())
                .map_err(|_| Error::InvalidSeries(format!("exponent {i} too large")))?;
            Ok(((k, 0), c.clone()))
        });
        Ok(TruncatedSeries::from_terms(
            terms.collect::<Result<Vec<_>>>()?,
        ))
    }

    /// Inverse of [`to_w_series`](Self::to_w_series).
    pub fn from_w_series(f: &TruncatedSeries) -> Result<Self> {
        if !f.is_finite() {
            return Err(Error::InvalidSeries("w-series has a tail".into()));
        }
        let mut terms = Vec::with_capacity(f.support().len());
        for (&(i, j), c) in f.support() {
            if j != 0 || i == 0 {
                return Err(Error::InvalidSeries(format!(
                    "w-series term ({i}, {j}) is not a negative power of x"
                )));
            }
            terms.push((-i64::from(i), c.clone()));
        }
        Ok(Self::from_terms(terms))
    }
}

/// `(F, L)`: terms with `i < 0` and the negative tail, terms with `i ≥ 0`
/// and the positive tail.
pub fn fl_split(f: &LaurentTruncatedSeries) -> (LaurentTruncatedSeries, LaurentTruncatedSeries) {
    let (neg, pos): (BTreeMap<_, _>, BTreeMap<_, _>) = f
        .support
        .iter()
        .map(|(&i, c)| (i, c.clone()))
        .partition(|(i, _)| *i < 0);
    (
        LaurentTruncatedSeries {
            support: neg,
            neg_tail: f.neg_tail.clone(),
            pos_tail: LaurentTail::Zero,
        },
        LaurentTruncatedSeries {
            support: pos,
            neg_tail: LaurentTail::Zero,
            pos_tail: f.pos_tail.clone(),
        },
    )
}

/// Inverse of [`fl_split`]; the parts must lie in their own factors.
pub fn fl_merge(
    f_part: &LaurentTruncatedSeries,
    l_part: &LaurentTruncatedSeries,
) -> Result<LaurentTruncatedSeries> {
    if f_part.support.keys().any(|&i| i >= 0) || !f_part.pos_tail.is_zero() {
        return Err(Error::InvalidSeries("F part has nonnegative powers".into()));
    }
    if l_part.support.keys().any(|&i| i < 0) || !l_part.neg_tail.is_zero() {
        return Err(Error::InvalidSeries("L part has negative powers".into()));
    }
    let mut support = f_part.support.clone();
    support.extend(l_part.support.iter().map(|(&i, c)| (i, c.clone())));
    Ok(LaurentTruncatedSeries {
        support,
        neg_tail: f_part.neg_tail.clone(),
        pos_tail: l_part.pos_tail.clone(),
    })
}

/// `{r < |x| ≤ R}` with `r = p^(-e_r) < R = p^(-e_R)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawAnnulus", into = "RawAnnulus")]
pub struct AnnulusSpec {
    e_r: Rational,
    e_big_r: Rational,
}

#[derive(Serialize, Deserialize)]
struct RawAnnulus {
    #[serde(with = "rational_str")]
    e_r: Rational,
    #[serde(rename = "e_R", with = "rational_str")]
    e_big_r: Rational,
}

impl TryFrom<RawAnnulus> for AnnulusSpec {
    type Error = Error;

    fn try_from(raw: RawAnnulus) -> Result<Self> {
        AnnulusSpec::new(raw.e_r, raw.e_big_r)
    }
}

impl From<AnnulusSpec> for RawAnnulus {
    fn from(a: AnnulusSpec) -> Self {
        RawAnnulus {
            e_r: a.e_r,
            e_big_r: a.e_big_r,
        }
    }
}

impl AnnulusSpec {
    pub fn new(e_r: Rational, e_big_r: Rational) -> Result<Self> {
        if e_r <= e_big_r {
            return Err(Error::InvalidAnnulus(format!(
                "need e_r > e_R (r < R), got e_r = {}, e_R = {}",
                format_rational(&e_r),
                format_rational(&e_big_r)
            )));
        }
        Ok(AnnulusSpec { e_r, e_big_r })
    }

    pub fn e_r(&self) -> &Rational {
        &self.e_r
    }

    pub fn e_big_r(&self) -> &Rational {
        &self.e_big_r
    }

    /// The open disk `|w| < 1/r`.
    pub fn f_space(&self) -> SpaceSpec {
        SpaceSpec::uniform(&[-self.e_r.clone()], Mode::Open)
    }

    /// The overconvergent disk `|x| ≤ R`.
    pub fn l_space(&self) -> SpaceSpec {
        SpaceSpec::dagger(std::slice::from_ref(&self.e_big_r))
    }
}

impl Default for AnnulusSpec {
    /// `{1/2 < |x| ≤ 1}` in base 2 units: `e_r = 1`, `e_R = 0`.
    fn default() -> Self {
        AnnulusSpec {
            e_r: int(1),
            e_big_r: int(0),
        }
    }
}

/// Membership in the annulus algebra, split along `F ⊕ L`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnulusMembership {
    pub verdict: MembershipCertificate,
    pub f_part: MembershipCertificate,
    pub l_part: MembershipCertificate,
}

fn finite_member(space: &SpaceSpec) -> MembershipCertificate {
    // a polynomial converges everywhere; any admissible radius will do
    let vars = space
        .vars()
        .iter()
        .map(|v| match v.mode {
            Mode::Dagger => RadiusVar::new(v.e.exponent() - int(1), Mode::Closed),
            Mode::Open | Mode::Closed => v.clone(),
        })
        .collect();
    MembershipCertificate::Member {
        witness: PolyRadius::new(vars),
    }
}

fn side_membership(
    tail: &LaurentTail,
    space: &SpaceSpec,
    side: &'static str,
) -> Result<MembershipCertificate> {
    match tail {
        LaurentTail::Zero => Ok(finite_member(space)),
        LaurentTail::Envelope { envelope, .. } => ray_membership(envelope, &[int(1)], space),
        LaurentTail::Unspecified => Err(Error::MissingEnvelope(side)),
    }
}

/// Decide `f ∈ O(A)`: the negative tail in `w = 1/x` against the open disk
/// of radius `1/r`, the nonnegative tail against the dagger disk of radius
/// `R`. Member iff both parts are.
pub fn annulus_membership(
    f: &LaurentTruncatedSeries,
    a: &AnnulusSpec,
) -> Result<AnnulusMembership> {
    let f_part = side_membership(&f.neg_tail, &a.f_space(), "negative tail")?;
    let l_part = side_membership(&f.pos_tail, &a.l_space(), "positive tail")?;
    let verdict = match (&f_part, &l_part) {
        (
            MembershipCertificate::Member { witness: wf },
            MembershipCertificate::Member { witness: wl },
        ) => {
            let mut vars = wf.vars.clone();
            vars.extend(wl.vars.iter().cloned());
            MembershipCertificate::Member {
                witness: PolyRadius::new(vars),
            }
        }
        (c @ MembershipCertificate::NonMember { .. }, _)
        | (_, c @ MembershipCertificate::NonMember { .. }) => c.clone(),
        (c @ MembershipCertificate::CannotCertify { .. }, _) | (_, c) => c.clone(),
    };
    Ok(AnnulusMembership {
        verdict,
        f_part,
        l_part,
    })
}

/// Inner radii `r_k = p^(-e_{r,k})` decreasing to `r`, so `e_{r,k}`
/// increases to `e_r` and the subdomains `{r_k ≤ |x| ≤ R}` exhaust `A`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exhaustion {
    /// `e_{r,k} = e_r − (e_r − e_R)/(k + 2)`.
    #[default]
    Default,
    /// `e_{r,k} = e_r − o_k` for the given family of offsets `o_k ↓ 0`.
    Offsets(EtaFamily),
    /// Explicit inner exponents `e_{r,0}, e_{r,1}, …`.
    Explicit(#[serde(with = "crate::valuation::rational_vec")] Vec<Rational>),
}

impl Exhaustion {
    /// Offsets `e_r − e_{r,k}` as a family, validated.
    pub fn offsets(&self, a: &AnnulusSpec) -> Result<EtaFamily> {
        let width = &a.e_r - &a.e_big_r;
        let fam = match self {
            Exhaustion::Default => EtaFamily::Reciprocal {
                scale: width.clone(),
                a: 1,
                b: 2,
            },
            Exhaustion::Offsets(f) => f.clone(),
            Exhaustion::Explicit(es) => {
                EtaFamily::Explicit(es.iter().map(|e| &a.e_r - e).collect())
            }
        };
        fam.validate()
            .map_err(|e| Error::InvalidExhaustion(e.to_string()))?;
        let o0 = fam.exponent(0)?;
        if o0 >= width {
            return Err(Error::InvalidExhaustion(format!(
                "first inner exponent {} is not above e_R = {}",
                format_rational(&(&a.e_r - o0)),
                format_rational(&a.e_big_r)
            )));
        }
        Ok(fam)
    }

    pub fn inner_exponent(&self, a: &AnnulusSpec, k: usize) -> Result<Rational> {
        Ok(&a.e_r - self.offsets(a)?.exponent(k)?)
    }
}

/// Level `k` of the exhaustion as the pair of factor spaces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnulusLevel {
    pub f: SpaceSpec,
    pub l: SpaceSpec,
}

/// The Fréchet factor system: level `k` is `k⟨r_k·w⟩`, `w = 1/x`.
pub fn frechet_system(
    a: &AnnulusSpec,
    exhaustion: &Exhaustion,
    prime: Prime,
) -> Result<InverseSystem> {
    let offsets = exhaustion.offsets(a)?;
    InverseSystem::with_shift(
        SystemKind::AnnulusFrechetFactor,
        SystemConfig::new(prime, offsets),
        -a.e_r.clone(),
    )
}

pub fn annulus_level(a: &AnnulusSpec, exhaustion: &Exhaustion, k: usize) -> Result<AnnulusLevel> {
    let e = exhaustion.inner_exponent(a, k)?;
    Ok(AnnulusLevel {
        f: SpaceSpec::closed(&[-e]),
        l: a.l_space(),
    })
}

/// A finite cocycle on the exhausting system with a declared lower
/// valuation envelope `v(a_{±i}) ≥ env(|i|)` for every stored term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnulusCocycle {
    pub label: String,
    pub entries: Vec<LaurentTruncatedSeries>,
    pub envelope: Envelope,
}

impl AnnulusCocycle {
    /// Cocycle with the tightest constant envelope for its coefficients.
    pub fn with_tight_envelope(
        label: impl Into<String>,
        entries: Vec<LaurentTruncatedSeries>,
        p: Prime,
    ) -> Self {
        let min = entries
            .iter()
            .flat_map(|e| e.support.values())
            .filter_map(|c| padic_valuation(c, p).as_finite().cloned())
            .min()
            .unwrap_or_else(Rational::zero);
        AnnulusCocycle {
            label: label.into(),
            entries,
            envelope: Envelope::new(int(0), Sublinear::Zero, min.floor()),
        }
    }

    fn envelope_violation(&self, p: Prime) -> Option<String> {
        for (n, e) in self.entries.iter().enumerate() {
            for (&i, c) in &e.support {
                let floor = self.envelope.value(i.unsigned_abs());
                if padic_valuation(c, p) < LogValue::Finite(floor.clone()) {
                    return Some(format!(
                        "level {n}, x^{i}: valuation {} below declared envelope {}",
                        padic_valuation(c, p),
                        format_rational(&floor)
                    ));
                }
            }
        }
        None
    }
}

/// 241 finite cocycles of degree ≤ `degree`: every monomial `x^{-i}`
/// placed at level `i mod 3`, the staircase `v_n = x^{-(n+1)}`, and 40
/// pseudo-random combinations with rational coefficients.
pub fn standard_annulus_corpus(degree: u32, p: Prime) -> Vec<AnnulusCocycle> {
    let mut out = Vec::new();
    let degree = i64::from(degree.max(1));
    for i in 1..=degree {
        let mut entries = vec![LaurentTruncatedSeries::zero(); (i % 3) as usize];
        entries.push(LaurentTruncatedSeries::from_terms([(-i, int(1))]));
        out.push(AnnulusCocycle::with_tight_envelope(
            format!("x^-{i}"),
            entries,
            p,
        ));
    }
    let staircase = (1..=degree)
        .map(|i| LaurentTruncatedSeries::from_terms([(-i, int(1))]))
        .collect();
    out.push(AnnulusCocycle::with_tight_envelope(
        "staircase",
        staircase,
        p,
    ));
    let mut state: u64 = 0xa22;
    let mut next = move |n: u64| {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 33) % n
    };
    for c in 0..40 {
        let len = 1 + next(6) as usize;
        let entries = (0..len)
            .map(|_| {
                let terms = next(9);
                LaurentTruncatedSeries::from_terms((0..terms).map(|_| {
                    let i = -1 - next(degree as u64) as i64;
                    (i, rat(next(61) as i64 - 30, 1 + next(12) as i64))
                }))
            })
            .collect();
        out.push(AnnulusCocycle::with_tight_envelope(
            format!("combination {c}"),
            entries,
            p,
        ));
    }
    out
}

/// Outcome of [`annulus_rlim_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnulusCheck {
    /// Levels whose dagger datum was compared against level 0.
    pub structural_levels: usize,
    pub structural_ok: bool,
    pub solved: usize,
    pub natural_ok: bool,
    pub verdict: Lim1Verdict,
}

/// Transition map between levels of the exhaustion; the identity on
/// coefficients.
pub fn restrict(f: &LaurentTruncatedSeries, from: usize, to: usize) -> LaurentTruncatedSeries {
    debug_assert!(from >= to);
    f.clone()
}

/// `f + s·g` on finite parts; tails are taken from `f`.
fn laurent_add(
    f: &LaurentTruncatedSeries,
    g: &LaurentTruncatedSeries,
    s: &Rational,
) -> LaurentTruncatedSeries {
    let mut support = f.support.clone();
    for (&i, c) in &g.support {
        let v = support.remove(&i).unwrap_or_else(Rational::zero) + s * c;
        support.insert(i, v);
    }
    LaurentTruncatedSeries::from_parts(support, f.neg_tail.clone(), f.pos_tail.clone())
}

fn check_entry(
    c: &AnnulusCocycle,
    sys: &InverseSystem,
    degree: u32,
    p: Prime,
) -> std::result::Result<(), String> {
    let fail = |msg: String| Err(format!("{}: {msg}", c.label));
    if let Some(v) = c.envelope_violation(p) {
        return fail(v);
    }
    if let Some(bad) = c
        .entries
        .iter()
        .find(|e| !e.is_finite() || e.degree().is_some_and(|d| d > u64::from(degree)))
    {
        return fail(format!(
            "entry outside the degree-{degree} finite corpus: degree {:?}",
            bad.degree()
        ));
    }
    // naturality: restriction is the identity on coefficients, so splitting
    // before or after it must agree, and merge must undo split
    let mut f_parts = Vec::with_capacity(c.entries.len());
    let mut l_parts = Vec::with_capacity(c.entries.len());
    for (n, e) in c.entries.iter().enumerate() {
        let (f, l) = fl_split(e);
        let (f_after, l_after) = fl_split(&restrict(e, n + 1, n));
        if (restrict(&f, n + 1, n), restrict(&l, n + 1, n)) != (f_after, l_after) {
            return fail(format!(
                "split does not commute with restriction at level {n}"
            ));
        }
        match fl_merge(&f, &l) {
            Ok(m) if m == *e => {}
            _ => return fail(format!("merge does not invert split at level {n}")),
        }
        f_parts.push(f.to_w_series().map_err(|e| format!("{}: {e}", c.label))?);
        l_parts.push(l);
    }
    match delta_solve(&Cocycle::Finite(f_parts), sys, DEFAULT_HORIZON) {
        Ok(SolveOutcome::Lift(Lift::Finite { lift, .. })) => {
            for (n, w) in lift.iter().enumerate() {
                let w = LaurentTruncatedSeries::from_w_series(w)
                    .map_err(|e| format!("{}: {e}", c.label))?;
                let cert = AnnulusCocycle {
                    label: String::new(),
                    entries: vec![w],
                    envelope: c.envelope.clone(),
                };
                if let Some(v) = cert.envelope_violation(p) {
                    return fail(format!("lift at level {n} leaves the envelope: {v}"));
                }
            }
        }
        Ok(other) => return fail(format!("unexpected solver outcome {other:?}")),
        Err(e) => return fail(e.to_string()),
    }
    // the L factor is a constant system; telescope and check Δ directly
    let mut lift = vec![LaurentTruncatedSeries::zero(); l_parts.len()];
    let mut acc = LaurentTruncatedSeries::zero();
    for n in (0..l_parts.len()).rev() {
        acc = laurent_add(&acc, &l_parts[n], &int(1));
        lift[n] = acc.clone();
    }
    for n in 0..lift.len() {
        let next = lift.get(n + 1).cloned().unwrap_or_default();
        if laurent_add(&lift[n], &next, &int(-1)) != l_parts[n] {
            return fail(format!("L-factor lift does not reproduce level {n}"));
        }
    }
    Ok(())
}

/// Evidence that `lim¹` of the exhausting system of `A` vanishes:
/// (a) every level has the same dagger datum, so the `L` factor is constant;
/// (b) every corpus cocycle of degree ≤ `degree` in the Fréchet factor
/// lifts, with lifts inside the declared envelope;
/// (c) splitting commutes with the transitions.
pub fn annulus_rlim_check(
    a: &AnnulusSpec,
    exhaustion: &Exhaustion,
    degree: u32,
    corpus: &[AnnulusCocycle],
    prime: Prime,
    exec: Execution,
) -> Result<AnnulusCheck> {
    let sys = frechet_system(a, exhaustion, prime)?;
    let offsets = exhaustion.offsets(a)?;
    let structural_levels = offsets.levels().unwrap_or(STRUCTURAL_LEVELS);
    let base = annulus_level(a, exhaustion, 0)?;
    let mut diagnostics = Vec::new();
    let mut structural_ok = true;
    for k in 1..structural_levels {
        let level = annulus_level(a, exhaustion, k)?;
        if level.l != base.l {
            structural_ok = false;
            diagnostics.push(format!("dagger datum changes at level {k}"));
        }
    }
    if corpus.is_empty() {
        diagnostics.push("empty corpus".into());
    }
    let results = par::map(exec, corpus, |c| check_entry(c, &sys, degree, prime));
    let solved = results.iter().filter(|r| r.is_ok()).count();
    diagnostics.extend(results.into_iter().filter_map(|r| r.err()));
    let natural_ok = !diagnostics
        .iter()
        .any(|d| d.contains("split") || d.contains("merge"));
    let verdict = if diagnostics.is_empty() {
        Lim1Verdict::VanishesEvidence {
            report: CorpusReport {
                total: corpus.len(),
                lifted: solved,
                labels: corpus.iter().map(|c| c.label.clone()).collect(),
            },
        }
    } else {
        Lim1Verdict::Inconclusive { diagnostics }
    };
    Ok(AnnulusCheck {
        structural_levels,
        structural_ok,
        solved,
        natural_ok,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p2() -> Prime {
        Prime::default()
    }

    fn env(alpha: Rational, s: Sublinear) -> Envelope {
        Envelope::new(alpha, s, int(0))
    }

    fn tailed(neg: Option<Envelope>, pos: Option<Envelope>) -> LaurentTruncatedSeries {
        let tail = |e: Option<Envelope>| {
            e.map_or(LaurentTail::Zero, |envelope| LaurentTail::Envelope {
                envelope,
                beyond: 0,
            })
        };
        LaurentTruncatedSeries::from_parts(BTreeMap::new(), tail(neg), tail(pos))
    }

    #[test]
    fn split_examples() {
        let f = LaurentTruncatedSeries::from_terms([(-1, int(1)), (0, int(1)), (1, int(1))]);
        let (fp, lp) = fl_split(&f);
        assert_eq!(fp, LaurentTruncatedSeries::from_terms([(-1, int(1))]));
        assert_eq!(
            lp,
            LaurentTruncatedSeries::from_terms([(0, int(1)), (1, int(1))])
        );
        assert_eq!(fl_merge(&fp, &lp).unwrap(), f);
        let (z0, z1) = fl_split(&LaurentTruncatedSeries::zero());
        assert!(z0.is_zero() && z1.is_zero());
        assert!(fl_merge(&lp, &fp).is_err());
    }

    #[test]
    fn annulus_spec_order() {
        assert!(matches!(
            AnnulusSpec::new(int(0), int(1)),
            Err(Error::InvalidAnnulus(_))
        ));
        assert!(matches!(
            AnnulusSpec::new(int(1), int(1)),
            Err(Error::InvalidAnnulus(_))
        ));
        let a: AnnulusSpec = serde_json::from_str(r#"{"e_r":"1/1","e_R":"1/2"}"#).unwrap();
        assert_eq!(a.e_big_r(), &rat(1, 2));
        assert!(serde_json::from_str::<AnnulusSpec>(r#"{"e_r":"0/1","e_R":"1/2"}"#).is_err());
    }

    #[test]
    fn membership_examples() {
        let a = AnnulusSpec::new(int(1), rat(1, 2)).unwrap();
        let f = tailed(
            Some(env(int(2), Sublinear::Zero)),
            Some(env(rat(1, 2), Sublinear::CeilSqrt)),
        );
        let m = annulus_membership(&f, &a).unwrap();
        assert!(m.verdict.is_member() && m.f_part.is_member() && m.l_part.is_member());

        let poly = LaurentTruncatedSeries::from_terms([(-3, int(5)), (2, rat(1, 7))]);
        for (r, big_r) in [(int(1), int(0)), (int(3), int(-2)), (rat(1, 3), rat(-1, 3))] {
            let a = AnnulusSpec::new(r, big_r).unwrap();
            assert!(annulus_membership(&poly, &a).unwrap().verdict.is_member());
        }
    }

    #[test]
    fn unit_circle_growth() {
        let f = tailed(None, Some(env(int(0), Sublinear::Zero)));
        // |a_i| = 1 converges on every |x| < 1, hence on a disk beyond R = 2^(-1/2)
        let inside = AnnulusSpec::new(int(1), rat(1, 2)).unwrap();
        assert!(annulus_membership(&f, &inside).unwrap().verdict.is_member());
        // but on no disk beyond R = 1
        let boundary = AnnulusSpec::new(int(1), int(0)).unwrap();
        let m = annulus_membership(&f, &boundary).unwrap();
        assert!(m.verdict.is_non_member());
        assert!(m.f_part.is_member());
    }

    #[test]
    fn inner_boundary_is_open() {
        // v(a_{-i}) = e_r·i: |a_{-i}| ρ^{-i} → 0 for every ρ > r exactly
        let a = AnnulusSpec::new(int(1), int(0)).unwrap();
        let f = tailed(Some(env(int(1), Sublinear::Zero)), None);
        assert!(annulus_membership(&f, &a).unwrap().f_part.is_member());
        let f = tailed(Some(env(rat(9, 10), Sublinear::Zero)), None);
        let m = annulus_membership(&f, &a).unwrap();
        assert!(m.f_part.is_non_member() && m.verdict.is_non_member());
    }

    #[test]
    fn missing_envelope() {
        let a = AnnulusSpec::default();
        let f = LaurentTruncatedSeries::from_parts(
            BTreeMap::new(),
            LaurentTail::Unspecified,
            LaurentTail::Zero,
        );
        assert_eq!(
            annulus_membership(&f, &a),
            Err(Error::MissingEnvelope("negative tail"))
        );
    }

    #[test]
    fn envelope_consistency() {
        let tail = LaurentTail::Envelope {
            envelope: env(int(1), Sublinear::Zero),
            beyond: 2,
        };
        let ok = BTreeMap::from([(3, int(8)), (1, int(1))]);
        assert!(LaurentTruncatedSeries::new(ok, LaurentTail::Zero, tail.clone(), p2()).is_ok());
        let bad = BTreeMap::from([(3, int(4))]);
        assert!(LaurentTruncatedSeries::new(bad, LaurentTail::Zero, tail, p2()).is_err());
    }

    #[test]
    fn json_shape() {
        let f = LaurentTruncatedSeries::from_parts(
            BTreeMap::from([(-2, rat(1, 2))]),
            LaurentTail::Envelope {
                envelope: env(int(1), Sublinear::Zero),
                beyond: 2,
            },
            LaurentTail::Zero,
        );
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(
            json,
            r#"{"support":[{"i":-2,"coeff":"1/2"}],"neg_tail":{"kind":"envelope","envelope":{"alpha":"1/1","sublinear":"zero","offset":"0/1"},"beyond":2},"pos_tail":{"kind":"zero"}}"#
        );
        assert_eq!(
            serde_json::from_str::<LaurentTruncatedSeries>(&json).unwrap(),
            f
        );
    }

    #[test]
    fn exhaustion_rules() {
        let a = AnnulusSpec::default();
        assert_eq!(
            Exhaustion::Default.inner_exponent(&a, 0).unwrap(),
            rat(1, 2)
        );
        assert_eq!(
            Exhaustion::Default.inner_exponent(&a, 2).unwrap(),
            rat(3, 4)
        );
        let bad = Exhaustion::Explicit(vec![rat(1, 2), rat(1, 3), rat(3, 4)]);
        assert!(matches!(bad.offsets(&a), Err(Error::InvalidExhaustion(_))));
        let outside = Exhaustion::Explicit(vec![int(0), rat(1, 2)]);
        assert!(matches!(
            outside.offsets(&a),
            Err(Error::InvalidExhaustion(_))
        ));
        let good = Exhaustion::Explicit(vec![rat(1, 4), rat(1, 2), rat(7, 8)]);
        assert_eq!(
            annulus_level(&a, &good, 1).unwrap().f,
            SpaceSpec::closed(&[rat(-1, 2)])
        );
        assert!(annulus_rlim_check(&a, &bad, 10, &[], p2(), Execution::Sequential).is_err());
    }

    #[test]
    fn rlim_default_passes() {
        let a = AnnulusSpec::default();
        let corpus = standard_annulus_corpus(DEFAULT_DEGREE_BOUND, p2());
        let check = annulus_rlim_check(
            &a,
            &Exhaustion::Default,
            DEFAULT_DEGREE_BOUND,
            &corpus,
            p2(),
            Execution::Parallel,
        )
        .unwrap();
        assert!(check.structural_ok && check.natural_ok);
        assert_eq!(check.solved, corpus.len());
        assert_eq!(check.verdict.name(), "VanishesEvidence");
    }

    #[test]
    fn rlim_garbage_in() {
        let a = AnnulusSpec::default();
        let mut corpus = standard_annulus_corpus(20, p2());
        corpus.push(AnnulusCocycle {
            label: "liar".into(),
            entries: vec![LaurentTruncatedSeries::from_terms([(-1, rat(1, 4))])],
            envelope: Envelope::new(int(0), Sublinear::Zero, int(0)),
        });
        let check = annulus_rlim_check(
            &a,
            &Exhaustion::Default,
            20,
            &corpus,
            p2(),
            Execution::Sequential,
        )
        .unwrap();
        match check.verdict {
            Lim1Verdict::Inconclusive { diagnostics } => {
                assert_eq!(diagnostics.len(), 1);
                assert!(diagnostics[0].starts_with("liar: level 0, x^-1"));
            }
            other => panic!("unexpected {}", other.name()),
        }
        let too_long = AnnulusCocycle::with_tight_envelope(
            "deep",
            vec![LaurentTruncatedSeries::from_terms([(-21, int(1))])],
            p2(),
        );
        let check = annulus_rlim_check(
            &a,
            &Exhaustion::Default,
            20,
            &[too_long],
            p2(),
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(check.verdict.name(), "Inconclusive");
    }

    fn laurent() -> impl Strategy<Value = LaurentTruncatedSeries> {
        prop::collection::btree_map(-30i64..30, (-20i64..20, 1i64..9), 0..10).prop_map(|m| {
            LaurentTruncatedSeries::from_terms(m.into_iter().map(|(i, (n, d))| (i, rat(n, d))))
        })
    }

    proptest! {
        #[test]
        fn split_merge_identity(f in laurent()) {
            let (a, b) = fl_split(&f);
            prop_assert_eq!(fl_merge(&a, &b).unwrap(), f.clone());
            prop_assert_eq!(fl_split(&fl_merge(&a, &b).unwrap()), (a, b));
        }

        #[test]
        fn membership_is_componentwise(
            na in -3i64..4, nd in 1i64..4, pa in -3i64..4, pd in 1i64..4,
            er in 1i64..4, ed in 1i64..4, gap in 1i64..4,
        ) {
            let a = AnnulusSpec::new(rat(er, ed), rat(er, ed) - rat(gap, 2)).unwrap();
            let f = tailed(Some(env(rat(na, nd), Sublinear::CeilSqrt)), Some(env(rat(pa, pd), Sublinear::Zero)));
            let m = annulus_membership(&f, &a).unwrap();
            let (fp, lp) = fl_split(&f);
            let fm = annulus_membership(&fp, &a).unwrap();
            let lm = annulus_membership(&lp, &a).unwrap();
            prop_assert_eq!(m.verdict.is_member(), fm.verdict.is_member() && lm.verdict.is_member());
            prop_assert_eq!(&fm.f_part, &m.f_part);
            prop_assert_eq!(&lm.l_part, &m.l_part);
        }
    }
}
