//! Admissible ranges of the power `p` for the semilinear problem, computed exactly.
//!
//! Every theorem variant is described by a list of [`Constraint`]s: lower or upper
//! bounds on `p`, and gates that depend only on the other parameters. The admissible
//! interval is their intersection, and every finite endpoint records which constraint
//! produced it.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rational::{ceil_q, fmt_q, max_q, qi, serde_q, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TheoremId {
    T2A,
    T2B,
    T3A,
    T3B,
    T4A,
    T4B,
    T5A,
    T5B,
    T6A,
    T6B,
}

/// Regularity regime of the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Energy space, `s = σ`.
    Energy,
    /// `0 < s < σ`.
    Low,
    /// `σ < s ≤ σ + n/q`.
    Intermediate,
    /// `s > σ + n/q`.
    High,
    /// `s > σ + n/q` with a weaker structural bound.
    HighAlt,
}

impl TheoremId {
    pub const ALL: [TheoremId; 10] = [
        TheoremId::T2A,
        TheoremId::T2B,
        TheoremId::T3A,
        TheoremId::T3B,
        TheoremId::T4A,
        TheoremId::T4B,
        TheoremId::T5A,
        TheoremId::T5B,
        TheoremId::T6A,
        TheoremId::T6B,
    ];

    pub fn is_b(self) -> bool {
        matches!(
            self,
            TheoremId::T2B | TheoremId::T3B | TheoremId::T4B | TheoremId::T5B | TheoremId::T6B
        )
    }

    pub fn family(self) -> Family {
        match self {
            TheoremId::T2A | TheoremId::T2B => Family::Energy,
            TheoremId::T3A | TheoremId::T3B => Family::Low,
            TheoremId::T4A | TheoremId::T4B => Family::Intermediate,
            TheoremId::T5A | TheoremId::T5B => Family::High,
            TheoremId::T6A | TheoremId::T6B => Family::HighAlt,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::T2A => "2A",
            TheoremId::T2B => "2B",
            TheoremId::T3A => "3A",
            TheoremId::T3B => "3B",
            TheoremId::T4A => "4A",
            TheoremId::T4B => "4B",
            TheoremId::T5A => "5A",
            TheoremId::T5B => "5B",
            TheoremId::T6A => "6A",
            TheoremId::T6B => "6B",
        }
    }

    pub fn parse(text: &str) -> Option<TheoremId> {
        let t = text.trim().trim_start_matches(['T', 't']);
        TheoremId::ALL
            .into_iter()
            .find(|th| th.name().eq_ignore_ascii_case(t))
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ConstraintKind {
    /// `p > 1`.
    Base,
    /// The theorem's structural lower bound on `p`.
    Structural,
    /// Gagliardo–Nirenberg window.
    GnWindow,
    /// Dimension range in which the GN window exists.
    GnDimension,
    /// Regularity requirement on `p` relative to `s − σ`.
    Regularity,
    /// `⌊n/2⌋ < n0`.
    ParabolicBand,
    /// Dimension threshold `n > n1` of the B-variants.
    Threshold,
    /// Range of `s` the theorem covers.
    SRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Effect {
    Lower {
        #[serde(with = "serde_q")]
        value: Q,
        closed: bool,
    },
    Upper {
        #[serde(with = "serde_q")]
        value: Q,
        closed: bool,
    },
    Gate {
        holds: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub label: String,
    pub effect: Effect,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Endpoint {
    #[serde(with = "serde_q")]
    pub value: Q,
    pub closed: bool,
    pub source: ConstraintKind,
}

/// Admissible set of `p`, an interval that is possibly empty or unbounded above.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PInterval {
    pub lower: Endpoint,
    /// `None` means unbounded.
    pub upper: Option<Endpoint>,
    pub empty: bool,
    /// Labels of constraints that rule out every `p`.
    pub failed: Vec<String>,
    pub active: Vec<Constraint>,
}

impl PInterval {
    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn contains(&self, p: &Q) -> bool {
        if self.empty {
            return false;
        }
        let lo_ok = if self.lower.closed {
            *p >= self.lower.value
        } else {
            *p > self.lower.value
        };
        let hi_ok = match &self.upper {
            None => true,
            Some(u) if u.closed => *p <= u.value,
            Some(u) => *p < u.value,
        };
        lo_ok && hi_ok
    }

    /// Some exact point inside the interval, if any.
    pub fn interior_point(&self) -> Option<Q> {
        if self.empty {
            return None;
        }
        let lo = self.lower.value;
        let candidate = match &self.upper {
            None => {
                if self.lower.closed {
                    lo
                } else {
                    lo + qi(1)
                }
            }
            Some(u) => {
                if self.lower.closed {
                    lo
                } else if u.closed {
                    u.value
                } else {
                    (lo + u.value) / qi(2)
                }
            }
        };
        self.contains(&candidate).then_some(candidate)
    }
}

impl fmt::Display for PInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            return f.write_str("∅");
        }
        let open = if self.lower.closed { '[' } else { '(' };
        write!(f, "{open}{}, ", fmt_q(&self.lower.value))?;
        match &self.upper {
            None => f.write_str("∞)"),
            Some(u) => {
                let close = if u.closed { ']' } else { ')' };
                write!(f, "{}{close}", fmt_q(&u.value))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ExponentBound {
    Finite(#[serde(with = "serde_q")] Q),
    /// The structural denominator is not positive, so no power satisfies the bound.
    NoFiniteBound,
}

fn regularity_of(th: TheoremId, params: &ModelParams) -> Q {
    match th.family() {
        Family::Energy => params.sigma,
        _ => params.s,
    }
}

/// Structural lower bound on `p`. B-variants replace it by the threshold `n > n1` and return 1.
pub fn exponent_lower_bound(th: TheoremId, params: &ModelParams) -> Result<ExponentBound> {
    params.require_standing()?;
    if th.is_b() {
        return Ok(ExponentBound::Finite(qi(1)));
    }
    let (sigma, delta, m, qq) = (params.sigma, params.delta, params.m, params.q);
    let n = qi(params.n as i128);
    let (numer, denom) = match th.family() {
        Family::HighAlt => (
            max_q(
                n - m / qq * n + m * (params.s - qi(2) * delta),
                qi(2) * m * (qi(2) * sigma - qi(3) * delta),
            ),
            n - qi(2) * m * (sigma - qi(2) * delta),
        ),
        _ => {
            let s = regularity_of(th, params);
            (
                max_q(n - m / qq * n + m * s, qi(4) * m * (sigma - delta)),
                n - qi(2) * m * (sigma - delta),
            )
        }
    };
    if denom <= qi(0) {
        return Ok(ExponentBound::NoFiniteBound);
    }
    Ok(ExponentBound::Finite(qi(1) + numer / denom))
}

/// Gagliardo–Nirenberg window for `p`, with its dimension gate.
pub fn gn_window(th: TheoremId, params: &ModelParams) -> Result<PInterval> {
    params.require_standing()?;
    Ok(intersect(&gn_constraints(th, params)))
}

fn gn_constraints(th: TheoremId, params: &ModelParams) -> Vec<Constraint> {
    let (sigma, delta, m, qq) = (params.sigma, params.delta, params.m, params.q);
    let n = qi(params.n as i128);
    let lower = Constraint {
        kind: ConstraintKind::GnWindow,
        label: format!("p ≥ q/m = {}", fmt_q(&(qq / m))),
        effect: Effect::Lower { value: qq / m, closed: true },
    };
    let mut out = vec![lower];
    match th.family() {
        Family::Energy | Family::Low => {
            let s = regularity_of(th, params);
            let qs = qq * s;
            if n > qs {
                let limit = qq * qq * s / (qq - m);
                if n <= limit {
                    let up = n / (n - qs);
                    out.push(Constraint {
                        kind: ConstraintKind::GnWindow,
                        label: format!("p ≤ n/(n − q·s) = {}", fmt_q(&up)),
                        effect: Effect::Upper { value: up, closed: true },
                    });
                } else {
                    out.push(Constraint {
                        kind: ConstraintKind::GnDimension,
                        label: format!("n ≤ q²s/(q − m) = {}", fmt_q(&limit)),
                        effect: Effect::Gate { holds: false },
                    });
                }
            }
        }
        Family::Intermediate => {
            let qs = qq * params.s;
            if n > qs {
                let limit = qs + qq * m * sigma / (qq - m);
                if n <= limit {
                    let up = qi(1) + qq * sigma / (n - qs);
                    out.push(Constraint {
                        kind: ConstraintKind::GnWindow,
                        label: format!("p ≤ 1 + qσ/(n − q·s) = {}", fmt_q(&up)),
                        effect: Effect::Upper { value: up, closed: true },
                    });
                } else {
                    out.push(Constraint {
                        kind: ConstraintKind::GnDimension,
                        label: format!("n ≤ qs + qmσ/(q − m) = {}", fmt_q(&limit)),
                        effect: Effect::Gate { holds: false },
                    });
                }
            }
        }
        Family::High => {
            let gate = qi(2) * m * (sigma - delta);
            out.push(Constraint {
                kind: ConstraintKind::GnDimension,
                label: format!("n > 2m(σ − δ) = {}", fmt_q(&gate)),
                effect: Effect::Gate { holds: n > gate },
            });
        }
        Family::HighAlt => {
            let gate = qi(2) * m * (sigma - qi(2) * delta);
            out.push(Constraint {
                kind: ConstraintKind::GnDimension,
                label: format!("n > 2m(σ − 2δ) = {}", fmt_q(&gate)),
                effect: Effect::Gate { holds: n > gate },
            });
        }
    }
    out
}

/// Every constraint the theorem places on `p`, including gates on the other parameters.
pub fn constraints(th: TheoremId, params: &ModelParams) -> Result<Vec<Constraint>> {
    params.require_standing()?;
    let consts = params.derive_constants()?;
    let (sigma, qq) = (params.sigma, params.q);
    let n = qi(params.n as i128);
    let s = params.s;
    let mut out = vec![Constraint {
        kind: ConstraintKind::Base,
        label: "p > 1".into(),
        effect: Effect::Lower { value: qi(1), closed: false },
    }];

    out.push(Constraint {
        kind: ConstraintKind::ParabolicBand,
        label: format!("⌊n/2⌋ < n0 = {}", fmt_q(&consts.n0)),
        effect: Effect::Gate { holds: consts.parabolic_band_holds(params.n) },
    });

    if th.is_b() {
        out.push(Constraint {
            kind: ConstraintKind::Threshold,
            label: format!("n > n1 = {}", fmt_q(&consts.n1)),
            effect: Effect::Gate { holds: n > consts.n1 },
        });
    } else {
        match exponent_lower_bound(th, params)? {
            ExponentBound::Finite(v) => out.push(Constraint {
                kind: ConstraintKind::Structural,
                label: format!("p > {}", fmt_q(&v)),
                effect: Effect::Lower { value: v, closed: false },
            }),
            ExponentBound::NoFiniteBound => out.push(Constraint {
                kind: ConstraintKind::Structural,
                label: "structural denominator > 0".into(),
                effect: Effect::Gate { holds: false },
            }),
        }
    }

    let top = sigma + n / qq;
    let (holds, label) = match th.family() {
        Family::Energy => (true, "s = σ".to_string()),
        Family::Low => (s > qi(0) && s < sigma, "0 < s < σ".to_string()),
        Family::Intermediate => (
            s > sigma && s <= top,
            format!("σ < s ≤ σ + n/q = {}", fmt_q(&top)),
        ),
        Family::High | Family::HighAlt => (s > top, format!("s > σ + n/q = {}", fmt_q(&top))),
    };
    out.push(Constraint {
        kind: ConstraintKind::SRange,
        label,
        effect: Effect::Gate { holds },
    });

    match th.family() {
        Family::Intermediate => {
            let v = qi(1) + qi(ceil_q(&(s - sigma)));
            out.push(Constraint {
                kind: ConstraintKind::Regularity,
                label: format!("p > 1 + ⌈s − σ⌉ = {}", fmt_q(&v)),
                effect: Effect::Lower { value: v, closed: false },
            });
        }
        Family::High | Family::HighAlt => {
            let v = qi(1) + s - sigma;
            out.push(Constraint {
                kind: ConstraintKind::Regularity,
                label: format!("p > 1 + s − σ = {}", fmt_q(&v)),
                effect: Effect::Lower { value: v, closed: false },
            });
        }
        _ => {}
    }

    out.extend(gn_constraints(th, params));
    Ok(out)
}

/// Intersects a constraint list. At equal endpoints an open bound dominates a closed one.
pub fn intersect(list: &[Constraint]) -> PInterval {
    let mut lower: Option<Endpoint> = None;
    let mut upper: Option<Endpoint> = None;
    let mut failed = Vec::new();
    for c in list {
        match &c.effect {
            Effect::Gate { holds } => {
                if !holds {
                    failed.push(c.label.clone());
                }
            }
            Effect::Lower { value, closed } => {
                let replace = match &lower {
                    None => true,
                    Some(cur) => *value > cur.value || (*value == cur.value && cur.closed && !closed),
                };
                if replace {
                    lower = Some(Endpoint { value: *value, closed: *closed, source: c.kind });
                }
            }
            Effect::Upper { value, closed } => {
                let replace = match &upper {
                    None => true,
                    Some(cur) => *value < cur.value || (*value == cur.value && cur.closed && !closed),
                };
                if replace {
                    upper = Some(Endpoint { value: *value, closed: *closed, source: c.kind });
                }
            }
        }
    }
    let lower = lower.unwrap_or(Endpoint { value: qi(1), closed: false, source: ConstraintKind::Base });
    let mut empty = !failed.is_empty();
    if let Some(u) = &upper {
        if lower.value > u.value || (lower.value == u.value && !(lower.closed && u.closed)) {
            empty = true;
            failed.push(format!(
                "lower bound {} exceeds upper bound {}",
                fmt_q(&lower.value),
                fmt_q(&u.value)
            ));
        }
    }
    PInterval {
        lower,
        upper,
        empty,
        failed,
        active: list.to_vec(),
    }
}

pub fn admissible_interval(th: TheoremId, params: &ModelParams) -> Result<PInterval> {
    Ok(intersect(&constraints(th, params)?))
}

/// Which weights enter the solution norm of a B-variant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecayWeights {
    pub theorem: TheoremId,
    /// Loss-of-decay constants `ε1..ε4`.
    #[serde(serialize_with = "ser_q4")]
    pub eps: [Q; 4],
    /// Weights that actually enter the solution norm; inactive ones are identically zero.
    pub active: [bool; 4],
    /// Exponent of `(1 + τ)` in each weight `f1, f2, f3, f4`.
    #[serde(serialize_with = "ser_q4")]
    pub weight_exponents: [Q; 4],
}

fn ser_q4<S: serde::Serializer>(v: &[Q; 4], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(4))?;
    for x in v {
        seq.serialize_element(&fmt_q(x))?;
    }
    seq.end()
}

/// Loss-of-decay weights. `extra` is the arbitrarily small `ε > 0` of the 6B variant.
pub fn loss_of_decay_weights(th: TheoremId, params: &ModelParams, extra: Q) -> Result<DecayWeights> {
    let consts = params.derive_constants()?;
    let p = params
        .p
        .ok_or_else(|| Error::InvalidArgument("loss-of-decay weights need p".into()))?;
    let (sigma, delta) = (params.sigma, params.delta);
    let n = qi(params.n as i128);
    let s = regularity_of(th, params);
    let two_gap = qi(2) * (sigma - delta);
    let base = qi(1) - n / two_gap * (qi(1) - consts.inv_r);
    let shifts = [
        qi(0),
        s / two_gap,
        delta / (sigma - delta),
        (s - sigma + qi(2) * delta) / two_gap,
    ];
    let active = match th.family() {
        Family::Energy => [true, true, true, false],
        Family::Low => [true, true, false, false],
        _ => [true, true, true, true],
    };
    let eps = if !th.is_b() {
        [qi(0); 4]
    } else {
        if n <= consts.n1 {
            return Err(Error::InvalidArgument(format!(
                "{th} needs n > n1 = {}",
                fmt_q(&consts.n1)
            )));
        }
        if th.family() == Family::HighAlt {
            if extra <= qi(0) {
                return Err(Error::InvalidArgument("6B needs a positive ε".into()));
            }
            [qi(0), shifts[1], shifts[2] + extra, shifts[3] + extra]
        } else {
            let eps1 = (qi(1) - qi(1) / p) * (qi(-1) + n / two_gap * (qi(1) - consts.inv_r));
            [eps1, shifts[1] + eps1, shifts[2], shifts[3]]
        }
    };
    let mut weight_exponents = [qi(0); 4];
    for i in 0..4 {
        weight_exponents[i] = base - shifts[i] + eps[i];
    }
    Ok(DecayWeights { theorem: th, eps, active, weight_exponents })
}

/// Gagliardo–Nirenberg interpolation exponent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GnTheta {
    #[serde(with = "serde_q")]
    pub theta: Q,
    pub in_range: bool,
}

/// `θ = (1/p0 − 1/p + s/n)/(1/p0 − 1/p1 + σ/n)`, admissible when `θ ∈ [s/σ, 1]`.
pub fn gn_theta(s: Q, sigma: Q, p: Q, p0: Q, p1: Q, n: u32) -> Result<GnTheta> {
    if p <= qi(1) || p0 <= qi(1) || p1 <= qi(1) {
        return Err(Error::InvalidArgument("exponents must exceed 1".into()));
    }
    if s < qi(0) || s > sigma || sigma <= qi(0) || n == 0 {
        return Err(Error::InvalidArgument("need 0 ≤ s ≤ σ, σ > 0, n ≥ 1".into()));
    }
    let nn = qi(n as i128);
    let denom = qi(1) / p0 - qi(1) / p1 + sigma / nn;
    if denom == qi(0) {
        return Err(Error::InvalidArgument("degenerate GN denominator".into()));
    }
    let theta = (qi(1) / p0 - qi(1) / p + s / nn) / denom;
    let in_range = theta >= s / sigma && theta <= qi(1);
    Ok(GnTheta { theta, in_range })
}
