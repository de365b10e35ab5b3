//! Inverse systems of function algebras, the two-term complex computing their
//! derived limit, and exact obstruction certificates.
//!
//! For the open × dagger-closed bidisk the levels are
//! `V_n = k⟨η_n⁻¹x, y⟩†` with `η_n = p^(-e_n)` increasing to 1, and
//! `Δ(w)_n = w_n − π_{n+1,n}(w_{n+1})`. A vanishing `lim¹` would force, for
//! every `n`, some `m ≥ n`, `λ > 1`, `η > η_n` with
//! `V_m ⊂ V_l + k⟨η⁻¹x, λ⁻¹y⟩` for all `l ≥ m`. An [`ObstructionCertificate`]
//! refutes that inclusion at `l = m + 1` for one choice of `(n, m, λ, η)` by
//! exhibiting a diagonal series in `V_m` outside the sum, and
//! [`criterion_failure_witness`] builds one for every admissible choice.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::membership::{
    check_certificate, ray_membership, sum_non_membership, MembershipCertificate, SpaceSpec,
};
use crate::par::{self, Execution};
use crate::series::{
    envelope_limit, gauss_norm, series_add, series_sub, DiagonalSeries, Envelope, LimitVerdict,
    Sublinear, TruncatedSeries,
};
use crate::valuation::{
    format_rational, int, parse_rational, rat, rational_str, LogValue, Mode, PolyRadius, Prime,
    RadiusVar, Rational,
};

/// Number of leading levels checked when validating a closed-form family.
pub const VALIDATION_LEVELS: usize = 64;

/// Levels examined by [`delta_solve`] before the uniform tail argument.
pub const DEFAULT_HORIZON: usize = 32;

/// Rule `n ↦ e_n` for the exponents of the exhausting radii `η_n = p^(-e_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EtaFamily {
    /// `e_n = scale / (a·n + b)`.
    Reciprocal { scale: Rational, a: u64, b: u64 },
    /// `e_n = 1 / (n + 1)²`.
    InverseSquare,
    /// `e_n = 1 / base^(n+1)`.
    Geometric { base: u64 },
    /// A finite prefix given explicitly; levels past its end are undefined.
    Explicit(Vec<Rational>),
}

impl EtaFamily {
    /// `e_n = 1/(n+1)`.
    pub fn harmonic() -> Self {
        EtaFamily::Reciprocal {
            scale: int(1),
            a: 1,
            b: 1,
        }
    }

    pub fn exponent(&self, n: usize) -> Result<Rational> {
        let n64 = n as u64;
        Ok(match self {
            EtaFamily::Reciprocal { scale, a, b } => scale / int((a * n64 + b) as i64),
            EtaFamily::InverseSquare => rat(1, ((n64 + 1) * (n64 + 1)) as i64),
            EtaFamily::Geometric { base } => {
                let den = num_traits::pow(num_bigint::BigInt::from(*base), n + 1);
                Rational::new(1.into(), den)
            }
            EtaFamily::Explicit(v) => v
                .get(n)
                .cloned()
                .ok_or_else(|| Error::InvalidConfig(format!("explicit family has no level {n}")))?,
        })
    }

    /// Number of defined levels (`None` for the closed-form families).
    pub fn levels(&self) -> Option<usize> {
        match self {
            EtaFamily::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    /// Positive and strictly decreasing on the checked prefix. Closed-form
    /// families tend to 0 by construction; explicit lists cannot be checked
    /// for that.
    pub fn validate(&self) -> Result<()> {
        match self {
            EtaFamily::Reciprocal { scale, a, b } if !scale.is_positive() || *a == 0 || *b == 0 => {
                return Err(Error::InvalidConfig(
                    "reciprocal family needs scale > 0, a ≥ 1, b ≥ 1".into(),
                ))
            }
            EtaFamily::Geometric { base } if *base < 2 => {
                return Err(Error::InvalidConfig(
                    "geometric family needs base ≥ 2".into(),
                ))
            }
            EtaFamily::Explicit(v) if v.len() < 2 => {
                return Err(Error::InvalidConfig(
                    "explicit family needs at least two levels".into(),
                ))
            }
            _ => {}
        }
        let levels = self.levels().unwrap_or(VALIDATION_LEVELS);
        let mut prev: Option<Rational> = None;
        for n in 0..levels {
            let e = self.exponent(n)?;
            if !e.is_positive() {
                return Err(Error::InvalidConfig(format!(
                    "e_{n} = {} is not positive",
                    format_rational(&e)
                )));
            }
            if let Some(p) = &prev {
                if &e >= p {
                    return Err(Error::InvalidConfig(format!(
                        "e_{n} = {} does not decrease (previous {})",
                        format_rational(&e),
                        format_rational(p)
                    )));
                }
            }
            prev = Some(e);
        }
        Ok(())
    }
}

impl Default for EtaFamily {
    fn default() -> Self {
        EtaFamily::harmonic()
    }
}

impl fmt::Display for EtaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EtaFamily::Reciprocal { scale, a: 1, b: 1 } if scale == &int(1) => {
                f.write_str("harmonic")
            }
            EtaFamily::Reciprocal { scale, a, b } if scale == &int(1) => write!(f, "recip:{a}:{b}"),
            EtaFamily::Reciprocal { scale, a, b } => {
                write!(f, "recip:{a}:{b}:{}", format_rational(scale))
            }
            EtaFamily::InverseSquare => f.write_str("square"),
            EtaFamily::Geometric { base } => write!(f, "geometric:{base}"),
            EtaFamily::Explicit(v) => {
                let items: Vec<String> = v.iter().map(format_rational).collect();
                write!(f, "list:{}", items.join(","))
            }
        }
    }
}

impl FromStr for EtaFamily {
    type Err = Error;

    /// `harmonic`, `recip:A:B[:SCALE]`, `square`, `geometric:B`, `list:q0,q1,…`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("unknown eta family {s:?}"));
        let int_arg = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        let mut parts = s.trim().splitn(2, ':');
        let head = parts.next().unwrap_or_default();
        let rest = parts.next();
        match (head, rest) {
            ("harmonic", None) => Ok(EtaFamily::harmonic()),
            ("square", None) => Ok(EtaFamily::InverseSquare),
            ("geometric", Some(b)) => Ok(EtaFamily::Geometric { base: int_arg(b)? }),
            ("recip", Some(args)) => {
                let args: Vec<&str> = args.split(':').collect();
                match args.as_slice() {
                    [a, b] => Ok(EtaFamily::Reciprocal {
                        scale: int(1),
                        a: int_arg(a)?,
                        b: int_arg(b)?,
                    }),
                    [a, b, c] => Ok(EtaFamily::Reciprocal {
                        scale: parse_rational(c)?,
                        a: int_arg(a)?,
                        b: int_arg(b)?,
                    }),
                    _ => Err(bad()),
                }
            }
            ("list", Some(items)) => items
                .split(',')
                .map(parse_rational)
                .collect::<Result<Vec<_>>>()
                .map(EtaFamily::Explicit),
            _ => Err(bad()),
        }
    }
}

impl Serialize for EtaFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for EtaFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub prime: Prime,
    pub eta: EtaFamily,
}

impl SystemConfig {
    pub fn new(prime: Prime, eta: EtaFamily) -> Self {
        SystemConfig { prime, eta }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// Levels `k⟨η_n⁻¹x, y⟩†` exhausting the open × dagger-closed bidisk.
    BidiskOpenDagger,
    /// Levels `k⟨η_n⁻¹x⟩` exhausting the open unit disk.
    OpenDiskStein,
    /// Levels `k⟨p^(-(e_n + shift))·w⟩` exhausting an open disk in `w = 1/x`;
    /// the Fréchet factor of a half-open annulus.
    AnnulusFrechetFactor,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::BidiskOpenDagger => "bidisk_open_dagger",
            SystemKind::OpenDiskStein => "open_disk_stein",
            SystemKind::AnnulusFrechetFactor => "annulus_frechet_factor",
        }
    }
}

/// ℕ-indexed nested family of function spaces with inclusion transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InverseSystem {
    kind: SystemKind,
    config: SystemConfig,
    shift: Rational,
}

/// Validate `config` and build the system of the given kind.
pub fn build_system(kind: SystemKind, config: SystemConfig) -> Result<InverseSystem> {
    InverseSystem::with_shift(kind, config, Rational::zero())
}

impl InverseSystem {
    /// Like [`build_system`], with every level exponent in the varying
    /// direction offset by `shift`.
    pub fn with_shift(kind: SystemKind, config: SystemConfig, shift: Rational) -> Result<Self> {
        config.eta.validate()?;
        let sys = InverseSystem {
            kind,
            config,
            shift,
        };
        let levels = sys.config.eta.levels().unwrap_or(VALIDATION_LEVELS);
        for n in 1..levels {
            if !sys.level(n)?.is_nested_in(&sys.level(n - 1)?) {
                return Err(Error::InvalidConfig(format!(
                    "level {n} is not nested in level {}",
                    n - 1
                )));
            }
        }
        Ok(sys)
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn prime(&self) -> Prime {
        self.config.prime
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            SystemKind::BidiskOpenDagger => 2,
            SystemKind::OpenDiskStein | SystemKind::AnnulusFrechetFactor => 1,
        }
    }

    /// Exponent of the varying radius at level `n`.
    pub fn exponent(&self, n: usize) -> Result<Rational> {
        Ok(self.config.eta.exponent(n)? + &self.shift)
    }

    /// The exponent the varying radius converges to.
    pub fn limit_exponent(&self) -> &Rational {
        &self.shift
    }

    pub fn level(&self, n: usize) -> Result<SpaceSpec> {
        let e = self.exponent(n)?;
        Ok(match self.kind {
            SystemKind::BidiskOpenDagger => SpaceSpec::dagger(&[e, Rational::zero()]),
            SystemKind::OpenDiskStein | SystemKind::AnnulusFrechetFactor => SpaceSpec::closed(&[e]),
        })
    }

    /// Restriction `π_{m,n}`; the identity on coefficients.
    pub fn restrict(&self, f: &TruncatedSeries, from: usize, to: usize) -> TruncatedSeries {
        debug_assert!(
            from >= to,
            "restriction goes from deeper to shallower levels"
        );
        f.clone()
    }
}

/// `v_n = w_n − π_{n+1,n}(w_{n+1})`, with `w` taken to be zero past its end
/// (so the last entry is copied).
pub fn delta_apply(w: &[TruncatedSeries], sys: &InverseSystem) -> Result<Vec<TruncatedSeries>> {
    let p = sys.prime();
    (0..w.len())
        .map(|n| match w.get(n + 1) {
            Some(next) => series_sub(&w[n], &sys.restrict(next, n + 1, n), p),
            None => Ok(w[n].clone()),
        })
        .collect()
}

/// Closed-form cocycle `v_n = c_n · x^{b_x + s_x n} y^{b_y + s_y n}` with
/// `v(c_n) = env(n)`, nonzero for `n < levels` (all `n` when `levels` is
/// absent).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayCocycle {
    pub base: [u32; 2],
    pub step: [u32; 2],
    pub envelope: Envelope,
    pub levels: Option<u32>,
}

impl RayCocycle {
    /// `v_n` with `c_n = p^{env(n)}`.
    pub fn term(&self, n: u32, p: Prime) -> Result<TruncatedSeries> {
        if self.levels.is_some_and(|l| n >= l) {
            return Ok(TruncatedSeries::zero());
        }
        let v = self.envelope.value(u64::from(n));
        if !v.is_integer() {
            return Err(Error::Realization(format!(
                "valuation {} is not an integer",
                format_rational(&v)
            )));
        }
        let v = v
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::Realization("valuation overflow".into()))?;
        Ok(TruncatedSeries::monomial(
            self.base[0] + self.step[0] * n,
            self.base[1] + self.step[1] * n,
            p.power(v),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cocycle {
    /// `(v_0, …, v_K)`, zero afterwards; entries must be polynomials.
    Finite(Vec<TruncatedSeries>),
    Ray(RayCocycle),
}

/// Certificate that the telescoping sums `w_n = Σ_{j≥n} v_j` lie in `V_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Lift {
    /// Explicit polynomial lift with `Δ(lift) = cocycle` checked exactly and
    /// the Gauss norm of each `w_n` on the closed hull of `V_n`.
    Finite {
        lift: Vec<TruncatedSeries>,
        level_norms: Vec<LogValue>,
    },
    /// Finitely many nonzero terms: every `w_n` is a polynomial.
    FiniteRay { levels: u32 },
    /// Per-level membership up to the horizon, and the margin
    /// `α + limit_slope ≥ 0` covering every deeper level at once.
    Ray {
        per_level: Vec<MembershipCertificate>,
        #[serde(with = "rational_str")]
        limit_slope: Rational,
        #[serde(with = "rational_str")]
        margin: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub level: usize,
    #[serde(with = "rational_str")]
    pub slope: Rational,
    pub certificate: MembershipCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SolveOutcome {
    Lift(Lift),
    Obstruction(ObstructionReport),
}

impl SolveOutcome {
    pub fn is_lift(&self) -> bool {
        matches!(self, SolveOutcome::Lift(_))
    }
}

fn check_dims(exps: [u32; 2], dim: usize) -> Result<()> {
    if dim == 1 && exps[1] != 0 {
        return Err(Error::DimensionMismatch(
            "y exponent in a one-variable system".into(),
        ));
    }
    Ok(())
}

/// Solve `Δ(w) = v` by telescoping, certifying `w_n ∈ V_n`.
pub fn delta_solve(cocycle: &Cocycle, sys: &InverseSystem, horizon: usize) -> Result<SolveOutcome> {
    let p = sys.prime();
    match cocycle {
        Cocycle::Finite(v) => {
            if v.iter().any(|t| !t.is_finite()) {
                return Err(Error::InvalidSeries(
                    "finite cocycle entries must be polynomials".into(),
                ));
            }
            for t in v {
                for &(i, j) in t.support().keys() {
                    check_dims([i, j], sys.dim())?;
                }
            }
            let mut lift = vec![TruncatedSeries::zero(); v.len()];
            let mut acc = TruncatedSeries::zero();
            for n in (0..v.len()).rev() {
                acc = series_add(&acc, &v[n], p)?;
                lift[n] = acc.clone();
            }
            if delta_apply(&lift, sys)? != *v {
                return Err(Error::InvalidSeries(
                    "telescoped lift does not reproduce the cocycle".into(),
                ));
            }
            let level_norms = lift
                .iter()
                .enumerate()
                .map(|(n, w)| gauss_norm(w, &sys.level(n)?.closed_hull().base, p))
                .collect::<Result<Vec<_>>>()?;
            Ok(SolveOutcome::Lift(Lift::Finite { lift, level_norms }))
        }
        Cocycle::Ray(ray) => {
            check_dims(ray.base, sys.dim())?;
            check_dims(ray.step, sys.dim())?;
            if let Some(levels) = ray.levels {
                return Ok(SolveOutcome::Lift(Lift::FiniteRay { levels }));
            }
            let weights: Vec<Rational> = ray.step[..sys.dim()]
                .iter()
                .map(|&s| int(i64::from(s)))
                .collect();
            let mut per_level = Vec::with_capacity(horizon + 1);
            let mut undecided = Vec::new();
            for n in 0..=horizon {
                let space = sys.level(n)?;
                let cert = ray_membership(&ray.envelope, &weights, &space)?;
                match &cert {
                    MembershipCertificate::NonMember { witness_slope, .. } => {
                        return Ok(SolveOutcome::Obstruction(ObstructionReport {
                            level: n,
                            slope: witness_slope.clone(),
                            certificate: cert.clone(),
                        }));
                    }
                    MembershipCertificate::CannotCertify { .. } => undecided.push(n),
                    MembershipCertificate::Member { .. } => {}
                }
                per_level.push(cert);
            }
            let limit_slope = &weights[0] * sys.limit_exponent();
            let margin = &ray.envelope.alpha + &limit_slope;
            let uniform = if weights[0].is_positive() {
                !margin.is_negative()
            } else {
                per_level[0].is_member()
            };
            if !undecided.is_empty() || !uniform {
                return Err(Error::HorizonExceeded(format!(
                    "levels 0..={horizon} undecided at {undecided:?}; limit margin {}",
                    format_rational(&margin)
                )));
            }
            Ok(SolveOutcome::Lift(Lift::Ray {
                per_level,
                limit_slope,
                margin,
            }))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertInputs {
    pub n: u32,
    pub m: u32,
    #[serde(with = "rational_str")]
    pub e_lambda: Rational,
    #[serde(with = "rational_str")]
    pub e_eta: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertDerived {
    pub d: u32,
    #[serde(with = "rational_str")]
    pub e_rho: Rational,
    #[serde(with = "rational_str")]
    pub e_delta: Rational,
    #[serde(with = "rational_str")]
    pub e_eta_prime: Rational,
    pub envelope: Envelope,
}

/// The refuted inclusion `lhs ⊂ rhs[0] + rhs[1]` at level `l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertTarget {
    pub l: u32,
    pub lhs: SpaceSpec,
    pub rhs: Vec<SpaceSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub lhs: String,
    pub rel: String,
    pub rhs: String,
    pub pass: bool,
}

/// Exact data refuting `V_m ⊂ V_{m+1} + k⟨η⁻¹x, λ⁻¹y⟩`.
///
/// With `f = Σ a_i x^i y^{d i}` and `v(a_i) = env(i)`:
/// - I1: `e_η + d·e_λ < e_m` (`ηλ^d > η_m`);
/// - I2: `max(e_{m+1}, e_η + d·e_λ) < e_ρ < e_m`;
/// - I3: `e_η′ + d·e_δ = e_ρ`, `e_δ < 0`, `e_η′ < e_m`, so `f ∈ V_m`;
/// - I4: `env(i) + e_ρ·i → +∞` and `env(i) + e″·i → −∞` at
///   `e″ = max(e_{m+1}, e_η + d·e_λ)`, so `f` is outside the sum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionCertificate {
    pub inputs: CertInputs,
    pub derived: CertDerived,
    pub target: CertTarget,
    pub checks: Vec<CheckRecord>,
}

impl ObstructionCertificate {
    pub fn series(&self) -> DiagonalSeries {
        DiagonalSeries::new(self.derived.d, self.derived.envelope.clone())
    }

    /// The slope `e″` at which the sum test is run.
    pub fn critical_slope(&self, sys: &InverseSystem) -> Result<Rational> {
        let next = sys.exponent(self.inputs.m as usize + 1)?;
        let combined = &self.inputs.e_eta + int(i64::from(self.derived.d)) * &self.inputs.e_lambda;
        Ok(next.max(combined))
    }
}

/// The closed Tate algebra `k⟨η⁻¹x, λ⁻¹y⟩`.
pub fn tate_space(e_eta: &Rational, e_lambda: &Rational) -> SpaceSpec {
    SpaceSpec::closed(&[e_eta.clone(), e_lambda.clone()])
}

fn require_bidisk(sys: &InverseSystem) -> Result<()> {
    if sys.kind() != SystemKind::BidiskOpenDagger {
        return Err(Error::PreconditionViolated(format!(
            "obstruction certificates live on the bidisk system, not {}",
            sys.kind().name()
        )));
    }
    Ok(())
}

/// Build the obstruction certificate for `(n, m, λ, η)`.
///
/// Tie-breaking: `d` is the least positive integer with `e_η + d·e_λ < e_m`;
/// `e_ρ` is the midpoint of `(max(e_{m+1}, e_η + d·e_λ), e_m)`;
/// `e_δ = −(e_m − e_ρ)/(2d)` and `e_η′ = e_ρ − d·e_δ`; the envelope is
/// `⌈−e_ρ·i⌉ + ⌈√i⌉`.
pub fn criterion_failure_witness(
    n: u32,
    m: u32,
    e_lambda: &Rational,
    e_eta: &Rational,
    sys: &InverseSystem,
) -> Result<ObstructionCertificate> {
    require_bidisk(sys)?;
    let e_n = sys.exponent(n as usize)?;
    let violated = |what: String| Err(Error::PreconditionViolated(what));
    if m < n {
        return violated(format!("m = {m} < n = {n}"));
    }
    if !e_lambda.is_negative() {
        return violated(format!(
            "e_lambda = {} must be negative (λ > 1)",
            format_rational(e_lambda)
        ));
    }
    if !e_eta.is_positive() {
        return violated(format!(
            "e_eta = {} must be positive",
            format_rational(e_eta)
        ));
    }
    if e_eta >= &e_n {
        return violated(format!(
            "e_eta = {} must be below e_n = {} (η > η_n)",
            format_rational(e_eta),
            format_rational(&e_n)
        ));
    }
    let e_m = sys.exponent(m as usize)?;
    let e_next = sys.exponent(m as usize + 1)?;

    let gap = e_eta - &e_m;
    let d = if gap.is_negative() {
        Rational::from_integer(1.into())
    } else {
        (gap / e_lambda.abs()).floor() + int(1)
    };
    let d = d
        .to_integer()
        .to_u32()
        .ok_or_else(|| Error::PreconditionViolated("required exponent slope d overflows".into()))?;
    let dq = int(i64::from(d));
    let combined = e_eta + &dq * e_lambda;
    let lower = e_next.clone().max(combined);
    let e_rho = (&lower + &e_m) / int(2);
    let e_delta = -(&e_m - &e_rho) / (int(2) * &dq);
    let e_eta_prime = &e_rho - &dq * &e_delta;
    let envelope = Envelope::new(-e_rho.clone(), Sublinear::CeilSqrt, Rational::zero());

    let mut cert = ObstructionCertificate {
        inputs: CertInputs {
            n,
            m,
            e_lambda: e_lambda.clone(),
            e_eta: e_eta.clone(),
        },
        derived: CertDerived {
            d,
            e_rho,
            e_delta,
            e_eta_prime,
            envelope,
        },
        target: CertTarget {
            l: m + 1,
            lhs: sys.level(m as usize)?,
            rhs: vec![sys.level(m as usize + 1)?, tate_space(e_eta, e_lambda)],
        },
        checks: Vec::new(),
    };
    cert.checks = verify_certificate(&cert, sys).checks;
    Ok(cert)
}

/// Result of re-checking a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub checks: Vec<CheckRecord>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    /// Names of failed checks, deduplicated, in check order.
    pub fn failed(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in self.checks.iter().filter(|c| !c.pass) {
            if !out.contains(&c.name) {
                out.push(c.name.clone());
            }
        }
        out
    }
}

struct Checks(Vec<CheckRecord>);

impl Checks {
    fn push(&mut self, name: &str, lhs: String, rel: &str, rhs: String, pass: bool) {
        self.0.push(CheckRecord {
            name: name.into(),
            lhs,
            rel: rel.into(),
            rhs,
            pass,
        });
    }

    fn cmp(&mut self, name: &str, lname: &str, l: &Rational, rel: &str, rname: &str, r: &Rational) {
        let pass = match rel {
            "<" => l < r,
            "<=" => l <= r,
            ">=" => l >= r,
            ">" => l > r,
            "=" => l == r,
            _ => unreachable!("unknown relation {rel}"),
        };
        self.push(
            name,
            format!("{lname} = {}", format_rational(l)),
            rel,
            format!("{rname} = {}", format_rational(r)),
            pass,
        );
    }

    fn verdict(
        &mut self,
        name: &str,
        env: &Envelope,
        slope_name: &str,
        slope: &Rational,
        want: LimitVerdict,
    ) {
        let got = envelope_limit(env, slope);
        self.push(
            name,
            format!(
                "limit(env, {slope_name} = {}) = {}",
                format_rational(slope),
                verdict_name(got)
            ),
            "=",
            verdict_name(want).into(),
            got == want,
        );
    }
}

fn verdict_name(v: LimitVerdict) -> &'static str {
    match v {
        LimitVerdict::DivergesToPlusInf => "+inf",
        LimitVerdict::Bounded => "bounded",
        LimitVerdict::DivergesToMinusInf => "-inf",
    }
}

/// Re-check every inequality of a certificate by exact arithmetic.
///
/// Stored `checks` are ignored; everything is recomputed from `inputs`,
/// `derived`, `target` and the system.
pub fn verify_certificate(cert: &ObstructionCertificate, sys: &InverseSystem) -> Verification {
    let mut c = Checks(Vec::new());
    if let Err(e) = require_bidisk(sys) {
        c.push(
            "system",
            sys.kind().name().into(),
            "=",
            e.to_string(),
            false,
        );
        return Verification { checks: c.0 };
    }
    let CertInputs {
        n,
        m,
        ref e_lambda,
        ref e_eta,
    } = cert.inputs;
    let CertDerived {
        d,
        ref e_rho,
        ref e_delta,
        ref e_eta_prime,
        ref envelope,
    } = cert.derived;
    let exps = (|| -> Result<_> {
        Ok((
            sys.exponent(n as usize)?,
            sys.exponent(m as usize)?,
            sys.exponent(m as usize + 1)?,
        ))
    })();
    let (e_n, e_m, e_next) = match exps {
        Ok(v) => v,
        Err(e) => {
            c.push(
                "inputs",
                format!("levels {n}, {m}, {}", m + 1),
                "defined",
                e.to_string(),
                false,
            );
            return Verification { checks: c.0 };
        }
    };

    c.push(
        "inputs",
        format!("m = {m}"),
        ">=",
        format!("n = {n}"),
        m >= n,
    );
    c.cmp("inputs", "e_lambda", e_lambda, "<", "0", &Rational::zero());
    c.cmp("inputs", "e_eta", e_eta, ">", "0", &Rational::zero());
    c.cmp("inputs", "e_eta", e_eta, "<", "e_n", &e_n);

    let dq = int(i64::from(d));
    let combined = e_eta + &dq * e_lambda;
    c.push("I1", format!("d = {d}"), ">=", "1".into(), d >= 1);
    c.cmp("I1", "e_eta + d*e_lambda", &combined, "<", "e_m", &e_m);

    let critical = e_next.clone().max(combined);
    c.cmp(
        "I2",
        "max(e_{m+1}, e_eta + d*e_lambda)",
        &critical,
        "<",
        "e_rho",
        e_rho,
    );
    c.cmp("I2", "e_rho", e_rho, "<", "e_m", &e_m);

    let witness_slope = e_eta_prime + &dq * e_delta;
    c.cmp(
        "I3",
        "e_eta' + d*e_delta",
        &witness_slope,
        "=",
        "e_rho",
        e_rho,
    );
    c.cmp("I3", "e_delta", e_delta, "<", "0", &Rational::zero());
    c.cmp("I3", "e_eta'", e_eta_prime, "<", "e_m", &e_m);

    c.verdict(
        "I4",
        envelope,
        "e_rho",
        e_rho,
        LimitVerdict::DivergesToPlusInf,
    );
    c.verdict(
        "I4",
        envelope,
        "e''",
        &critical,
        LimitVerdict::DivergesToMinusInf,
    );

    let levels = (|| -> Result<_> { Ok((sys.level(m as usize)?, sys.level(m as usize + 1)?)) })();
    let Ok((lhs_space, next_space)) = levels else {
        c.push("target", "levels".into(), "defined", "false".into(), false);
        return Verification { checks: c.0 };
    };
    let tate = tate_space(e_eta, e_lambda);
    let t = &cert.target;
    c.push(
        "target",
        format!("l = {}", t.l),
        "=",
        format!("m + 1 = {}", m + 1),
        t.l == m + 1,
    );
    c.push(
        "target",
        "lhs".into(),
        "=",
        lhs_space.describe(),
        t.lhs == lhs_space,
    );
    c.push(
        "target",
        "rhs".into(),
        "=",
        format!("{} + {}", next_space.describe(), tate.describe()),
        t.rhs == [next_space.clone(), tate.clone()],
    );

    let f = DiagonalSeries::new(d, envelope.clone());
    let witness = MembershipCertificate::Member {
        witness: PolyRadius::new(vec![
            RadiusVar::new(e_eta_prime.clone(), Mode::Closed),
            RadiusVar::new(e_delta.clone(), Mode::Closed),
        ]),
    };
    let lhs_check = check_certificate(envelope, &f.weights(), &lhs_space, &witness);
    c.push(
        "lhs-membership",
        format!("f in {} via (e_eta', e_delta)", lhs_space.describe()),
        "holds",
        lhs_check.clone().err().unwrap_or_else(|| "ok".into()),
        lhs_check.is_ok(),
    );

    let rhs = sum_non_membership(&f, &next_space, &tate);
    let rhs_ok = matches!(
        &rhs,
        Ok(MembershipCertificate::NonMember { witness_slope, .. }) if *witness_slope == critical
    );
    c.push(
        "rhs-non-membership",
        "f not in V_{m+1} + Tate(e_eta, e_lambda)".into(),
        "at slope",
        format!("e'' = {}", format_rational(&critical)),
        rhs_ok,
    );
    Verification { checks: c.0 }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: u32,
    pub m: u32,
    #[serde(with = "rational_str")]
    pub e_lambda: Rational,
    #[serde(with = "rational_str")]
    pub e_eta: Rational,
}

/// `n ∈ {0,1,2}`, `m ∈ {n, n+1, n+2}`, `e_λ ∈ {−1/4, −1/2}`,
/// `e_η ∈ {e_n/2, 9e_n/10}`: 36 points.
pub fn default_grid(sys: &InverseSystem) -> Result<Vec<GridPoint>> {
    let mut out = Vec::with_capacity(36);
    for n in 0..3u32 {
        let e_n = sys.exponent(n as usize)?;
        for m in n..n + 3 {
            for e_lambda in [rat(-1, 4), rat(-1, 2)] {
                for e_eta in [&e_n / int(2), &e_n * rat(9, 10)] {
                    out.push(GridPoint {
                        n,
                        m,
                        e_lambda: e_lambda.clone(),
                        e_eta,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub label: String,
    pub cocycle: Cocycle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grid {
    Params(Vec<GridPoint>),
    Corpus(Vec<CorpusEntry>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub total: usize,
    pub lifted: usize,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Lim1Verdict {
    /// Every grid certificate verified. Combined with the trusted
    /// Mittag-Leffler-type criterion this proves `lim¹ ≠ 0`.
    NonZeroCertified {
        certificates: Vec<ObstructionCertificate>,
    },
    /// Every corpus cocycle lifted. Evidence for `lim¹ = 0`, not a proof.
    VanishesEvidence {
        report: CorpusReport,
    },
    Inconclusive {
        diagnostics: Vec<String>,
    },
}

impl Lim1Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Lim1Verdict::NonZeroCertified { .. } => "NonZeroCertified",
            Lim1Verdict::VanishesEvidence { .. } => "VanishesEvidence",
            Lim1Verdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

/// Solve every corpus cocycle; `Ok(labels)` when all lift.
pub fn solve_corpus(
    corpus: &[CorpusEntry],
    sys: &InverseSystem,
    horizon: usize,
    exec: Execution,
) -> std::result::Result<CorpusReport, Vec<String>> {
    let outcomes = par::map(exec, corpus, |e| {
        (e.label.clone(), delta_solve(&e.cocycle, sys, horizon))
    });
    let mut diagnostics = Vec::new();
    for (label, o) in &outcomes {
        match o {
            Ok(SolveOutcome::Lift(_)) => {}
            Ok(SolveOutcome::Obstruction(r)) => diagnostics.push(format!(
                "{label}: telescoping sum leaves level {} at slope {}",
                r.level,
                format_rational(&r.slope)
            )),
            Err(e) => diagnostics.push(format!("{label}: {e}")),
        }
    }
    if diagnostics.is_empty() {
        Ok(CorpusReport {
            total: corpus.len(),
            lifted: corpus.len(),
            labels: outcomes.into_iter().map(|(l, _)| l).collect(),
        })
    } else {
        Err(diagnostics)
    }
}

pub fn lim1_verdict(sys: &InverseSystem, grid: &Grid, exec: Execution) -> Lim1Verdict {
    let inconclusive = |d: Vec<String>| Lim1Verdict::Inconclusive { diagnostics: d };
    match (sys.kind(), grid) {
        (SystemKind::BidiskOpenDagger, Grid::Params(points)) => {
            if points.is_empty() {
                return inconclusive(vec!["empty parameter grid".into()]);
            }
            let results = par::map(exec, points, |g| {
                let cert = criterion_failure_witness(g.n, g.m, &g.e_lambda, &g.e_eta, sys)?;
                let v = verify_certificate(&cert, sys);
                Ok::<_, Error>((cert, v))
            });
            let mut certs = Vec::with_capacity(points.len());
            let mut diagnostics = Vec::new();
            for (g, r) in points.iter().zip(results) {
                match r {
                    Ok((cert, v)) if v.passed() => certs.push(cert),
                    Ok((_, v)) => {
                        diagnostics.push(format!("n={} m={}: failed {:?}", g.n, g.m, v.failed()))
                    }
                    Err(e) => diagnostics.push(format!("n={} m={}: {e}", g.n, g.m)),
                }
            }
            if diagnostics.is_empty() {
                Lim1Verdict::NonZeroCertified {
                    certificates: certs,
                }
            } else {
                inconclusive(diagnostics)
            }
        }
        (SystemKind::BidiskOpenDagger, Grid::Corpus(_)) => {
            inconclusive(vec!["the bidisk verdict needs a parameter grid".into()])
        }
        (_, Grid::Params(_)) => inconclusive(vec!["positive systems need a cocycle corpus".into()]),
        (_, Grid::Corpus(corpus)) => {
            if corpus.is_empty() {
                return inconclusive(vec!["empty corpus".into()]);
            }
            match solve_corpus(corpus, sys, DEFAULT_HORIZON, exec) {
                Ok(report) => Lim1Verdict::VanishesEvidence { report },
                Err(d) => inconclusive(d),
            }
        }
    }
}

/// Deterministic generator for corpus coefficients.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

/// 100 cocycles for which the telescoping solver is expected to succeed on a
/// Stein-type system of dimension `dim`: 24 infinite rays with
/// nonnegative valuation slope (the first is `v_n = xⁿ`), 16 finitely
/// supported rays with steep negative slope, the zero cocycle and 59 explicit
/// polynomial cocycles.
pub fn standard_corpus(dim: usize) -> Vec<CorpusEntry> {
    let mut out = Vec::with_capacity(100);
    let envs = [
        Envelope::new(int(0), Sublinear::Zero, int(0)),
        Envelope::new(int(0), Sublinear::CeilSqrt, int(0)),
        Envelope::new(int(0), Sublinear::CeilLog2, int(1)),
        Envelope::new(rat(1, 2), Sublinear::Zero, int(0)),
        Envelope::new(int(1), Sublinear::CeilSqrt, int(-2)),
        Envelope::new(rat(1, 3), Sublinear::CeilLog2, int(0)),
    ];
    let y_step = |k: u32| if dim == 2 { k % 2 } else { 0 };
    for k in 1..=4u32 {
        for (e, env) in envs.iter().enumerate() {
            let base = if k == 1 { [0, 0] } else { [k - 1, 0] };
            let label = if k == 1 && e == 0 {
                "x^n".to_string()
            } else {
                format!("ray step {k} env {e}")
            };
            out.push(CorpusEntry {
                label,
                cocycle: Cocycle::Ray(RayCocycle {
                    base,
                    step: [k, y_step(k + e as u32)],
                    envelope: env.clone(),
                    levels: None,
                }),
            });
        }
    }
    for levels in 1..=8u32 {
        for step in 1..=2u32 {
            out.push(CorpusEntry {
                label: format!("finite ray {levels} step {step}"),
                cocycle: Cocycle::Ray(RayCocycle {
                    base: [0, 0],
                    step: [step, y_step(step)],
                    envelope: Envelope::new(int(-2), Sublinear::Zero, int(0)),
                    levels: Some(levels),
                }),
            });
        }
    }
    out.push(CorpusEntry {
        label: "zero".into(),
        cocycle: Cocycle::Finite(Vec::new()),
    });
    let mut rng = Lcg(0x5eed);
    for c in 0..59 {
        let len = 1 + rng.below(5) as usize;
        let seq = (0..len)
            .map(|_| {
                let terms = rng.below(6);
                TruncatedSeries::from_terms((0..terms).map(|_| {
                    let i = rng.below(13) as u32;
                    let j = if dim == 2 { rng.below(13) as u32 } else { 0 };
                    let num = rng.below(41) as i64 - 20;
                    let den = 1 + rng.below(8) as i64;
                    ((i, j), rat(num, den))
                }))
            })
            .collect();
        out.push(CorpusEntry {
            label: format!("polynomial cocycle {c}"),
            cocycle: Cocycle::Finite(seq),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bidisk() -> InverseSystem {
        build_system(SystemKind::BidiskOpenDagger, SystemConfig::default()).unwrap()
    }

    fn disk() -> InverseSystem {
        build_system(SystemKind::OpenDiskStein, SystemConfig::default()).unwrap()
    }

    #[test]
    fn default_bidisk_levels() {
        let sys = bidisk();
        assert_eq!(sys.level(0).unwrap(), SpaceSpec::dagger(&[int(1), int(0)]));
        assert_eq!(
            sys.level(3).unwrap(),
            SpaceSpec::dagger(&[rat(1, 4), int(0)])
        );
        assert_eq!(disk().level(1).unwrap(), SpaceSpec::closed(&[rat(1, 2)]));
    }

    #[test]
    fn permuted_family_is_rejected() {
        let eta = EtaFamily::Explicit(vec![rat(1, 2), int(1), rat(1, 3)]);
        let r = build_system(
            SystemKind::BidiskOpenDagger,
            SystemConfig::new(Prime::default(), eta),
        );
        assert!(matches!(r, Err(Error::InvalidConfig(_))));
        let eta = EtaFamily::Explicit(vec![int(1), rat(-1, 2)]);
        assert!(eta.validate().is_err());
        assert!(EtaFamily::Reciprocal {
            scale: int(1),
            a: 0,
            b: 1
        }
        .validate()
        .is_err());
    }

    #[test]
    fn family_text_round_trip() {
        for s in [
            "harmonic",
            "recip:2:2",
            "recip:1:2:1/2",
            "square",
            "geometric:3",
            "list:1/1,1/2,1/5",
        ] {
            let fam: EtaFamily = s.parse().unwrap();
            assert_eq!(fam.to_string(), s);
            fam.validate().unwrap();
        }
        assert!("bogus".parse::<EtaFamily>().is_err());
        let fam: EtaFamily = "recip:2:2".parse().unwrap();
        assert_eq!(fam.exponent(3).unwrap(), rat(1, 8));
        assert_eq!(
            EtaFamily::Geometric { base: 2 }.exponent(2).unwrap(),
            rat(1, 8)
        );
    }

    #[test]
    fn delta_apply_examples() {
        let sys = bidisk();
        let f = TruncatedSeries::x();
        let v = delta_apply(&[f.clone(), f.clone(), f.clone()], &sys).unwrap();
        assert_eq!(v, vec![TruncatedSeries::zero(), TruncatedSeries::zero(), f]);

        let pw = |k| TruncatedSeries::monomial(k, 0, int(1));
        let v = delta_apply(&[pw(0), pw(1), pw(2)], &sys).unwrap();
        assert_eq!(
            v,
            vec![
                TruncatedSeries::from_terms([((0, 0), int(1)), ((1, 0), int(-1))]),
                TruncatedSeries::from_terms([((1, 0), int(1)), ((2, 0), int(-1))]),
                pw(2),
            ]
        );
    }

    #[test]
    fn solve_zero_and_finite() {
        let sys = disk();
        let zero = delta_solve(&Cocycle::Finite(vec![]), &sys, 8).unwrap();
        assert_eq!(
            zero,
            SolveOutcome::Lift(Lift::Finite {
                lift: vec![],
                level_norms: vec![]
            })
        );
        let ray = RayCocycle {
            base: [0, 0],
            step: [1, 0],
            envelope: Envelope::new(int(0), Sublinear::Zero, int(0)),
            levels: Some(0),
        };
        assert!(delta_solve(&Cocycle::Ray(ray), &sys, 8).unwrap().is_lift());
        let only_first = Cocycle::Finite(vec![TruncatedSeries::x()]);
        match delta_solve(&only_first, &sys, 8).unwrap() {
            SolveOutcome::Lift(Lift::Finite { lift, level_norms }) => {
                assert_eq!(lift, vec![TruncatedSeries::x()]);
                assert_eq!(level_norms, vec![LogValue::Finite(int(1))]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn solve_powers_of_x_on_open_disk() {
        let ray = RayCocycle {
            base: [0, 0],
            step: [1, 0],
            envelope: Envelope::new(int(0), Sublinear::Zero, int(0)),
            levels: None,
        };
        match delta_solve(&Cocycle::Ray(ray), &disk(), 16).unwrap() {
            SolveOutcome::Lift(Lift::Ray {
                per_level,
                limit_slope,
                margin,
            }) => {
                assert_eq!(per_level.len(), 17);
                assert!(per_level.iter().all(|c| c.is_member()));
                assert_eq!(limit_slope, int(0));
                assert_eq!(margin, int(0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn solve_reports_obstruction_and_horizon() {
        let sys = disk();
        // v(c_n) = -n: w_0 = Σ p^{-j} x^j leaves k<p^{-1}x> already at level 0
        let steep = RayCocycle {
            base: [0, 0],
            step: [1, 0],
            envelope: Envelope::new(int(-2), Sublinear::Zero, int(0)),
            levels: None,
        };
        match delta_solve(&Cocycle::Ray(steep), &sys, 4).unwrap() {
            SolveOutcome::Obstruction(r) => {
                assert_eq!(r.level, 0);
                assert_eq!(r.slope, int(1));
            }
            other => panic!("unexpected {other:?}"),
        }
        // slope -1/100 survives 10 levels but not the limit; level 99 is the
        // bounded boundary case, level 100 the first failure
        let mild = RayCocycle {
            base: [0, 0],
            step: [1, 0],
            envelope: Envelope::new(rat(-1, 100), Sublinear::Zero, int(0)),
            levels: None,
        };
        assert!(matches!(
            delta_solve(&Cocycle::Ray(mild.clone()), &sys, 10),
            Err(Error::HorizonExceeded(_))
        ));
        assert!(
            matches!(delta_solve(&Cocycle::Ray(mild), &sys, 200).unwrap(), SolveOutcome::Obstruction(r) if r.level == 100)
        );
    }

    #[test]
    fn solve_rejects_tails_and_bad_dims() {
        let sys = disk();
        let tailed = DiagonalSeries::new(0, Envelope::new(int(1), Sublinear::Zero, int(0)))
            .realize(2, sys.prime())
            .unwrap();
        assert!(matches!(
            delta_solve(&Cocycle::Finite(vec![tailed]), &sys, 4),
            Err(Error::InvalidSeries(_))
        ));
        assert!(matches!(
            delta_solve(&Cocycle::Finite(vec![TruncatedSeries::y()]), &sys, 4),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn witness_first_example() {
        let sys = bidisk();
        let c = criterion_failure_witness(0, 1, &rat(-1, 2), &rat(1, 2), &sys).unwrap();
        assert_eq!(c.derived.d, 1);
        assert_eq!(c.derived.e_rho, rat(5, 12));
        assert_eq!(c.derived.e_delta, rat(-1, 24));
        assert_eq!(c.derived.e_eta_prime, rat(11, 24));
        assert_eq!(
            c.derived.envelope,
            Envelope::new(rat(-5, 12), Sublinear::CeilSqrt, int(0))
        );
        assert_eq!(c.critical_slope(&sys).unwrap(), rat(1, 3));
        assert_eq!(c.target.l, 2);
        assert!(c.checks.iter().all(|r| r.pass));
        assert!(verify_certificate(&c, &sys).passed());
    }

    #[test]
    fn witness_second_example() {
        let sys = bidisk();
        let c = criterion_failure_witness(1, 2, &rat(-1, 4), &rat(1, 3), &sys).unwrap();
        assert_eq!(c.derived.d, 1);
        assert_eq!(c.derived.e_rho, rat(7, 24));
        assert_eq!(c.derived.e_delta, rat(-1, 48));
        assert_eq!(c.derived.e_eta_prime, rat(5, 16));
        assert_eq!(c.critical_slope(&sys).unwrap(), rat(1, 4));
        assert!(verify_certificate(&c, &sys).passed());
    }

    #[test]
    fn witness_needs_larger_d() {
        // e_eta = 9/10 against e_m = 1/4 with e_lambda = -1/4: need d·1/4 > 13/20
        let sys = bidisk();
        let c = criterion_failure_witness(0, 3, &rat(-1, 4), &rat(9, 10), &sys).unwrap();
        assert_eq!(c.derived.d, 3);
        assert!(verify_certificate(&c, &sys).passed());
        // exact boundary: gap 1/2 = 2·(1/4) needs d = 3, not 2
        let c = criterion_failure_witness(0, 2, &rat(-1, 4), &rat(5, 6), &sys).unwrap();
        assert_eq!(c.derived.d, 3);
        assert!(verify_certificate(&c, &sys).passed());
        let c = criterion_failure_witness(0, 0, &rat(-1, 4), &rat(1, 2), &sys).unwrap();
        // e_m = 1: gap negative, d = 1
        assert_eq!(c.derived.d, 1);
    }

    #[test]
    fn witness_preconditions() {
        let sys = bidisk();
        let bad = |n, m, l: Rational, e: Rational| {
            matches!(
                criterion_failure_witness(n, m, &l, &e, &sys),
                Err(Error::PreconditionViolated(_))
            )
        };
        assert!(bad(0, 1, rat(1, 2), rat(1, 2)));
        assert!(bad(0, 1, int(0), rat(1, 2)));
        assert!(bad(2, 1, rat(-1, 2), rat(1, 4)));
        assert!(bad(0, 1, rat(-1, 2), int(0)));
        assert!(bad(1, 1, rat(-1, 2), rat(1, 2)));
        assert!(matches!(
            criterion_failure_witness(0, 1, &rat(-1, 2), &rat(1, 2), &disk()),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn mutations_are_caught() {
        let sys = bidisk();
        let good = criterion_failure_witness(0, 1, &rat(-1, 2), &rat(1, 2), &sys).unwrap();
        let mut c = good.clone();
        c.derived.e_rho = rat(1, 2);
        let v = verify_certificate(&c, &sys);
        assert!(!v.passed());
        assert!(v.failed().contains(&"I2".to_string()));

        let mut c = good.clone();
        c.derived.envelope.alpha = rat(-1, 3);
        let v = verify_certificate(&c, &sys);
        assert!(!v.passed());
        assert!(v.failed().contains(&"I4".to_string()));

        let mut c = good;
        c.target.l = 3;
        assert_eq!(
            verify_certificate(&c, &sys).failed(),
            vec!["target".to_string()]
        );
    }

    #[test]
    fn certificate_json_field_order() {
        let sys = bidisk();
        let c = criterion_failure_witness(0, 1, &rat(-1, 2), &rat(1, 2), &sys).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.starts_with(
            r#"{"inputs":{"n":0,"m":1,"e_lambda":"-1/2","e_eta":"1/2"},"derived":{"d":1,"e_rho":"5/12","e_delta":"-1/24","e_eta_prime":"11/24","envelope":{"alpha":"-5/12","sublinear":"ceil_sqrt","offset":"0/1"}},"target":{"l":2,"lhs":"#
        ));
        let back: ObstructionCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn verdicts() {
        let sys = bidisk();
        let grid = default_grid(&sys).unwrap();
        assert_eq!(grid.len(), 36);
        match lim1_verdict(&sys, &Grid::Params(grid), Execution::Sequential) {
            Lim1Verdict::NonZeroCertified { certificates } => assert_eq!(certificates.len(), 36),
            other => panic!("unexpected {}", other.name()),
        }
        assert_eq!(
            lim1_verdict(&sys, &Grid::Params(vec![]), Execution::Parallel).name(),
            "Inconclusive"
        );
        let disk = disk();
        let corpus = standard_corpus(1);
        assert_eq!(corpus.len(), 100);
        assert_eq!(corpus[0].label, "x^n");
        assert_eq!(
            lim1_verdict(&disk, &Grid::Corpus(corpus), Execution::Parallel).name(),
            "VanishesEvidence"
        );
        assert_eq!(
            lim1_verdict(&disk, &Grid::Corpus(vec![]), Execution::Parallel).name(),
            "Inconclusive"
        );
    }

    #[test]
    fn ray_terms_realize() {
        let p = Prime::default();
        let ray = RayCocycle {
            base: [1, 0],
            step: [2, 1],
            envelope: Envelope::new(int(1), Sublinear::Zero, int(0)),
            levels: Some(3),
        };
        assert_eq!(
            ray.term(2, p).unwrap(),
            TruncatedSeries::monomial(5, 2, int(4))
        );
        assert!(ray.term(3, p).unwrap().is_zero());
    }
}
