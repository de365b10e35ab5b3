//! Membership of ray-supported series in closed, dagger and open polydisk
//! algebras.
//!
//! A ray series has terms `c_k · x^{w_1 k + b_1} y^{w_2 k + b_2}` with
//! `v(c_k) = env(k)`. At a closed polyradius `e` its terms have log norms
//! `env(k) + (w·e)·k + const`, so membership depends only on the combined
//! slope `w·e` through [`envelope_limit`]. The diagonal series of the bidisk
//! counterexample is the ray with weights `(1, d)`.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{envelope_limit, DiagonalSeries, Envelope, LimitVerdict};
use crate::valuation::{format_rational, int, rational_str, Mode, PolyRadius, RadiusVar, Rational};

/// A function space given by a polyradius with per-variable modes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpaceSpec {
    pub base: PolyRadius,
}

impl SpaceSpec {
    pub fn new(vars: Vec<RadiusVar>) -> Self {
        SpaceSpec {
            base: PolyRadius::new(vars),
        }
    }

    pub fn uniform(exponents: &[Rational], mode: Mode) -> Self {
        SpaceSpec::new(
            exponents
                .iter()
                .map(|e| RadiusVar::new(e.clone(), mode))
                .collect(),
        )
    }

    /// `k⟨r⁻¹x, …⟩`.
    pub fn closed(exponents: &[Rational]) -> Self {
        Self::uniform(exponents, Mode::Closed)
    }

    /// `k⟨r⁻¹x, …⟩†`.
    pub fn dagger(exponents: &[Rational]) -> Self {
        Self::uniform(exponents, Mode::Dagger)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn vars(&self) -> &[RadiusVar] {
        &self.base.vars
    }

    pub fn exponent(&self, k: usize) -> &Rational {
        self.base.vars[k].e.exponent()
    }

    /// Drop every dagger/open decoration, keeping the base radii.
    pub fn closed_hull(&self) -> SpaceSpec {
        SpaceSpec {
            base: self.base.closed_hull(),
        }
    }

    /// `self ⊆ outer` for specs whose modes agree variable by variable:
    /// a larger radius (smaller exponent) gives a smaller algebra.
    pub fn is_nested_in(&self, outer: &SpaceSpec) -> bool {
        self.dim() == outer.dim()
            && self
                .vars()
                .iter()
                .zip(outer.vars())
                .all(|(a, b)| a.mode == b.mode && a.e.exponent() <= b.e.exponent())
    }

    pub fn describe(&self) -> String {
        let names = ["x", "y", "z", "w"];
        let parts: Vec<String> = self
            .vars()
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let name = names.get(k).copied().unwrap_or("t");
                format!("p^({})·{name}", format_rational(v.e.exponent()))
            })
            .collect();
        let modes: Vec<&str> = self.vars().iter().map(|v| v.mode.name()).collect();
        format!("k<{}> [{}]", parts.join(", "), modes.join(", "))
    }
}

/// Outcome of a membership query, with the data needed to re-check it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MembershipCertificate {
    /// Member; `witness` is a closed radius for closed/dagger variables
    /// (strictly smaller exponent for dagger) and the base radius for open
    /// variables, where the claim covers every larger exponent.
    Member {
        witness: PolyRadius,
    },
    /// Not a member. `envelope_limit` diverges to `-∞` at `witness_slope`
    /// (when `exclusive` is false) or at every admissible slope strictly
    /// below it (when `exclusive` is true; dagger spaces).
    NonMember {
        #[serde(with = "rational_str")]
        witness_slope: Rational,
        exclusive: bool,
        verdict_at_slope: LimitVerdict,
    },
    CannotCertify {
        reason: String,
    },
}

impl MembershipCertificate {
    pub fn is_member(&self) -> bool {
        matches!(self, MembershipCertificate::Member { .. })
    }

    pub fn is_non_member(&self) -> bool {
        matches!(self, MembershipCertificate::NonMember { .. })
    }

    fn cannot(reason: impl Into<String>) -> Self {
        MembershipCertificate::CannotCertify {
            reason: reason.into(),
        }
    }
}

fn dot(weights: &[Rational], exponents: impl Iterator<Item = Rational>) -> Rational {
    weights
        .iter()
        .zip(exponents)
        .fold(Rational::zero(), |acc, (w, e)| acc + w * e)
}

fn slope_at(weights: &[Rational], radius: &PolyRadius) -> Rational {
    dot(weights, radius.exponents().cloned())
}

/// Base radius, with dagger variables the series does not involve moved to
/// an arbitrary strictly larger radius.
fn settle_inactive(space: &SpaceSpec, weights: &[Rational]) -> PolyRadius {
    let vars = space
        .vars()
        .iter()
        .zip(weights)
        .map(|(v, w)| match v.mode {
            Mode::Dagger if w.is_zero() => RadiusVar::new(v.e.exponent() - int(1), Mode::Closed),
            Mode::Open => v.clone(),
            _ => RadiusVar::new(v.e.exponent().clone(), Mode::Closed),
        })
        .collect();
    PolyRadius::new(vars)
}

/// Decide membership of a ray series with valuation envelope `env` and
/// direction `weights` (one nonnegative weight per variable) in `space`.
pub fn ray_membership(
    env: &Envelope,
    weights: &[Rational],
    space: &SpaceSpec,
) -> Result<MembershipCertificate> {
    if weights.len() != space.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights against a {}-variable space",
            weights.len(),
            space.dim()
        )));
    }
    let active = |m: Mode| {
        space
            .vars()
            .iter()
            .zip(weights)
            .any(|(v, w)| v.mode == m && w.is_positive())
    };
    let (has_open, has_dagger) = (active(Mode::Open), active(Mode::Dagger));
    if has_open && has_dagger {
        return Err(Error::MixedQuantifiers);
    }
    let s0 = slope_at(weights, &space.base);
    let net = &env.alpha + &s0;

    if has_open {
        if !net.is_negative() {
            return Ok(MembershipCertificate::Member {
                witness: settle_inactive(space, weights),
            });
        }
        // any slope between s0 and -α fails; take the midpoint
        let slope = &s0 - &net / int(2);
        return Ok(MembershipCertificate::NonMember {
            verdict_at_slope: envelope_limit(env, &slope),
            witness_slope: slope,
            exclusive: false,
        });
    }

    if has_dagger {
        if !net.is_positive() {
            return Ok(MembershipCertificate::NonMember {
                witness_slope: s0,
                exclusive: true,
                verdict_at_slope: LimitVerdict::DivergesToMinusInf,
            });
        }
        // lowest valid target slope: the boundary itself when the sublinear
        // term diverges, otherwise halfway to it
        let boundary = -env.alpha.clone();
        let target = if env.sublinear.is_unbounded() {
            boundary
        } else {
            (boundary + &s0) / int(2)
        };
        let deficit = &s0 - &target;
        let positive = space
            .vars()
            .iter()
            .zip(weights)
            .filter(|(v, w)| v.mode == Mode::Dagger && w.is_positive())
            .count();
        let share = &deficit / int(positive as i64);
        let vars = space
            .vars()
            .iter()
            .zip(weights)
            .map(|(v, w)| {
                let e = v.e.exponent();
                let e = match v.mode {
                    Mode::Dagger if w.is_positive() => e - &share / w,
                    Mode::Dagger => e - int(1),
                    _ => e.clone(),
                };
                RadiusVar::new(e, Mode::Closed)
            })
            .collect();
        return Ok(MembershipCertificate::Member {
            witness: PolyRadius::new(vars),
        });
    }

    Ok(match envelope_limit(env, &s0) {
        LimitVerdict::DivergesToPlusInf => MembershipCertificate::Member {
            witness: settle_inactive(space, weights),
        },
        LimitVerdict::DivergesToMinusInf => MembershipCertificate::NonMember {
            witness_slope: s0,
            exclusive: false,
            verdict_at_slope: LimitVerdict::DivergesToMinusInf,
        },
        LimitVerdict::Bounded => MembershipCertificate::cannot(
            "terms stay bounded at the closed radius; no divergence to -inf to certify",
        ),
    })
}

fn diagonal_weights(f: &DiagonalSeries, dim: usize) -> Result<Vec<Rational>> {
    match dim {
        2 => Ok(f.weights().to_vec()),
        1 if f.d == 0 => Ok(vec![int(1)]),
        _ => Err(Error::DimensionMismatch(format!(
            "diagonal series with d = {} against a {dim}-variable space",
            f.d
        ))),
    }
}

/// Membership of `Σ a_i x^i y^{d i}` in `space`.
pub fn membership(f: &DiagonalSeries, space: &SpaceSpec) -> Result<MembershipCertificate> {
    ray_membership(&f.envelope, &diagonal_weights(f, space.dim())?, space)
}

/// Sufficient test for `f ∉ A + B`.
///
/// Dagger variables are relaxed to their closed hulls. With
/// `e″ = max(slope_A, slope_B)` both summands sit inside the closed algebra
/// at slope `e″`, so divergence of `env(i) + e″·i` to `-∞` excludes `f` from
/// the sum: any split `f = g + h` would give `v(a_i) ≥ min(v(g_i), v(h_i))`.
pub fn sum_non_membership(
    f: &DiagonalSeries,
    a: &SpaceSpec,
    b: &SpaceSpec,
) -> Result<MembershipCertificate> {
    let mut slopes = Vec::with_capacity(2);
    for s in [a, b] {
        if s.vars().iter().any(|v| v.mode == Mode::Open) {
            return Ok(MembershipCertificate::cannot(
                "summands must be closed or dagger spaces",
            ));
        }
        let w = diagonal_weights(f, s.dim())?;
        slopes.push(slope_at(&w, &s.closed_hull().base));
    }
    let critical = slopes.into_iter().max().expect("two summands");
    Ok(match envelope_limit(&f.envelope, &critical) {
        LimitVerdict::DivergesToMinusInf => MembershipCertificate::NonMember {
            witness_slope: critical,
            exclusive: false,
            verdict_at_slope: LimitVerdict::DivergesToMinusInf,
        },
        v => MembershipCertificate::cannot(format!(
            "limit at critical slope {} is {v:?}, criterion inapplicable",
            format_rational(&critical)
        )),
    })
}

/// Re-check a certificate against the mode constraints of `space`.
///
/// Independent of [`ray_membership`]'s witness construction: it only
/// inspects the witness and re-runs [`envelope_limit`].
pub fn check_certificate(
    env: &Envelope,
    weights: &[Rational],
    space: &SpaceSpec,
    cert: &MembershipCertificate,
) -> std::result::Result<(), String> {
    if weights.len() != space.dim() {
        return Err("weight/space dimension mismatch".into());
    }
    let active: Vec<Mode> = space
        .vars()
        .iter()
        .zip(weights)
        .filter(|(_, w)| w.is_positive())
        .map(|(v, _)| v.mode)
        .collect();
    let has_open = active.contains(&Mode::Open);
    let has_dagger = active.contains(&Mode::Dagger);
    let s0 = slope_at(weights, &space.base);
    match cert {
        MembershipCertificate::Member { witness } => {
            if witness.dim() != space.dim() {
                return Err("witness dimension mismatch".into());
            }
            for (k, (w, v)) in witness.vars.iter().zip(space.vars()).enumerate() {
                let ok = match v.mode {
                    Mode::Closed | Mode::Open => w.e == v.e,
                    Mode::Dagger => w.e.exponent() < v.e.exponent(),
                };
                if !ok {
                    return Err(format!(
                        "witness exponent {} violates the {} constraint of variable {k} (base {})",
                        format_rational(w.e.exponent()),
                        v.mode.name(),
                        format_rational(v.e.exponent())
                    ));
                }
            }
            let slope = slope_at(weights, witness);
            let verdict = envelope_limit(env, &slope);
            let ok = if has_open {
                verdict != LimitVerdict::DivergesToMinusInf
            } else {
                verdict == LimitVerdict::DivergesToPlusInf
            };
            if ok {
                Ok(())
            } else {
                Err(format!(
                    "limit at witness slope {} is {verdict:?}",
                    format_rational(&slope)
                ))
            }
        }
        MembershipCertificate::NonMember {
            witness_slope,
            exclusive,
            verdict_at_slope,
        } => {
            if *verdict_at_slope != LimitVerdict::DivergesToMinusInf {
                return Err("non-membership requires divergence to -inf".into());
            }
            if *exclusive {
                if !has_dagger || has_open || witness_slope != &s0 {
                    return Err("exclusive slope must be the dagger supremum".into());
                }
                if (&env.alpha + witness_slope).is_positive() {
                    return Err("slopes just below the supremum do not diverge to -inf".into());
                }
                return Ok(());
            }
            let admissible = if has_open {
                witness_slope > &s0
            } else if has_dagger {
                witness_slope < &s0
            } else {
                witness_slope == &s0
            };
            if !admissible {
                return Err(format!(
                    "slope {} is not admissible",
                    format_rational(witness_slope)
                ));
            }
            match envelope_limit(env, witness_slope) {
                LimitVerdict::DivergesToMinusInf => Ok(()),
                v => Err(format!("limit at witness slope is {v:?}")),
            }
        }
        MembershipCertificate::CannotCertify { .. } => Ok(()),
    }
}
