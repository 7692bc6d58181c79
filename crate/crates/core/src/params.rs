//! Model parameters, their standing constraints and derived constants.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{floor_q, fmt_q, q, qi, serde_q, to_f64, Q};

/// Parameters of `u_tt + (-Δ)^σ u + μ(-Δ)^δ u_t = f` together with the data-space exponents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(with = "serde_q")]
    pub sigma: Q,
    #[serde(with = "serde_q")]
    pub delta: Q,
    #[serde(with = "serde_q", default = "default_mu")]
    pub mu: Q,
    /// Spatial dimension.
    pub n: u32,
    /// Data space exponent (`L^m ∩ H^{s,q}` style data).
    #[serde(with = "serde_q")]
    pub q: Q,
    #[serde(with = "serde_q")]
    pub m: Q,
    /// Sobolev regularity; `s = σ` for energy-space results.
    #[serde(with = "serde_q")]
    pub s: Q,
    /// Nonlinearity power.
    #[serde(with = "serde_q::option", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Q>,
}

fn default_mu() -> Q {
    qi(1)
}

impl ModelParams {
    /// Parameters with `μ = 1`, `q = 2`, `m = 1`, `s = σ` and no power.
    pub fn new(sigma: Q, delta: Q, n: u32) -> Self {
        Self {
            sigma,
            delta,
            mu: qi(1),
            n,
            q: qi(2),
            m: qi(1),
            s: sigma,
            p: None,
        }
    }

    pub fn with_data(mut self, q: Q, m: Q) -> Self {
        self.q = q;
        self.m = m;
        self
    }

    pub fn with_s(mut self, s: Q) -> Self {
        self.s = s;
        self
    }

    pub fn with_p(mut self, p: Q) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_mu(mut self, mu: Q) -> Self {
        self.mu = mu;
        self
    }

    pub fn sigma_f(&self) -> f64 {
        to_f64(&self.sigma)
    }

    pub fn delta_f(&self) -> f64 {
        to_f64(&self.delta)
    }

    pub fn mu_f(&self) -> f64 {
        to_f64(&self.mu)
    }

    pub fn floor_half_n(&self) -> i128 {
        (self.n / 2) as i128
    }

    /// Radius where the two characteristic roots coalesce.
    pub fn coalescence_radius(&self) -> f64 {
        let mu = self.mu_f();
        (mu * mu / 4.0).powf(1.0 / (2.0 * self.sigma_f() - 4.0 * self.delta_f()))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut push = |kind, name: &'static str, detail: String| {
            violations.push(Violation { kind, name, detail });
        };
        let standing = ViolationKind::Standing;
        if self.sigma < qi(1) {
            push(standing, "sigma", format!("σ = {} < 1", fmt_q(&self.sigma)));
        }
        if self.delta <= qi(0) {
            push(standing, "delta", format!("δ = {} ≤ 0", fmt_q(&self.delta)));
        }
        if self.delta * qi(2) >= self.sigma {
            push(
                standing,
                "delta",
                format!("δ = {} ≥ σ/2 = {}", fmt_q(&self.delta), fmt_q(&(self.sigma / qi(2)))),
            );
        }
        if self.mu <= qi(0) {
            push(standing, "mu", format!("μ = {} ≤ 0", fmt_q(&self.mu)));
        }
        if self.n == 0 {
            push(standing, "n", "n = 0".into());
        }
        if self.q <= qi(1) {
            push(standing, "q", format!("q = {} ≤ 1", fmt_q(&self.q)));
        }
        if self.m < qi(1) || self.m >= self.q {
            push(
                standing,
                "m",
                format!("m = {} outside [1, q = {})", fmt_q(&self.m), fmt_q(&self.q)),
            );
        }
        if self.s < qi(0) {
            push(standing, "s", format!("s = {} < 0", fmt_q(&self.s)));
        }
        if let Some(p) = &self.p {
            if *p <= qi(1) {
                push(standing, "p", format!("p = {} ≤ 1", fmt_q(p)));
            }
        }
        let basic_ok = violations.is_empty();
        if basic_ok {
            let n0 = parabolic_n0(&self.sigma, &self.delta);
            if qi(self.floor_half_n()) >= n0 {
                violations.push(Violation {
                    kind: ViolationKind::ParabolicBand,
                    name: "parabolic_band",
                    detail: format!(
                        "⌊n/2⌋ = {} ≥ n0 = (6δ − 2σ)/(σ − 2δ) = {}",
                        self.floor_half_n(),
                        fmt_q(&n0)
                    ),
                });
            }
        }
        ValidationReport { violations }
    }

    /// Fails unless the standing assumptions hold. The parabolic band is not required here.
    pub fn require_standing(&self) -> Result<()> {
        let report = self.validate();
        if report.standing_ok() {
            Ok(())
        } else {
            Err(Error::InvalidParameters(
                report
                    .violations
                    .into_iter()
                    .filter(|v| v.kind == ViolationKind::Standing)
                    .collect(),
            ))
        }
    }

    pub fn derive_constants(&self) -> Result<DerivedConstants> {
        self.require_standing()?;
        let (sigma, delta, m, qq) = (self.sigma, self.delta, self.m, self.q);
        let fh = qi(self.floor_half_n());
        Ok(DerivedConstants {
            s0: (qi(2) + fh) * (sigma - qi(2) * delta),
            n0: parabolic_n0(&sigma, &delta),
            n1: qi(4) * m * qq * (sigma - delta) / (qq - m),
            inv_r: qi(1) + qi(1) / qq - qi(1) / m,
        })
    }
}

fn parabolic_n0(sigma: &Q, delta: &Q) -> Q {
    (qi(6) * delta - qi(2) * sigma) / (sigma - qi(2) * delta)
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "σ={} δ={} μ={} n={} q={} m={} s={}",
            fmt_q(&self.sigma),
            fmt_q(&self.delta),
            fmt_q(&self.mu),
            self.n,
            fmt_q(&self.q),
            fmt_q(&self.m),
            fmt_q(&self.s)
        )?;
        if let Some(p) = &self.p {
            write!(f, " p={}", fmt_q(p))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    /// Basic assumptions on σ, δ, μ, n, q, m, s, p.
    Standing,
    /// `⌊n/2⌋ < n0`, needed by the nonlinear existence results.
    ParabolicBand,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub name: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn standing_ok(&self) -> bool {
        self.violations.iter().all(|v| v.kind != ViolationKind::Standing)
    }
}

/// Constants derived from the parameters, all exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DerivedConstants {
    /// `(2 + ⌊n/2⌋)(σ − 2δ)`
    #[serde(with = "serde_q")]
    pub s0: Q,
    /// `(6δ − 2σ)/(σ − 2δ)`
    #[serde(with = "serde_q")]
    pub n0: Q,
    /// `4mq(σ − δ)/(q − m)`
    #[serde(with = "serde_q")]
    pub n1: Q,
    /// Young exponent `1/r = 1 + 1/q − 1/m`.
    #[serde(with = "serde_q")]
    pub inv_r: Q,
}

impl DerivedConstants {
    pub fn parabolic_band_holds(&self, n: u32) -> bool {
        qi((n / 2) as i128) < self.n0
    }

    pub fn floor_n0(&self) -> i128 {
        floor_q(&self.n0)
    }
}

/// Reference parameter sets used across tests, presets and documentation.
pub mod reference {
    use super::*;

    /// `m = 1, q = 5, σ = 2, δ = 9/10`.
    pub fn set_one(n: u32, s: Q) -> ModelParams {
        ModelParams::new(qi(2), q(9, 10), n)
            .with_data(qi(5), qi(1))
            .with_s(s)
    }

    /// `m = 1, q = 4, σ = 2, δ = 7/8`.
    pub fn set_two(n: u32, s: Q) -> ModelParams {
        ModelParams::new(qi(2), q(7, 8), n)
            .with_data(qi(4), qi(1))
            .with_s(s)
    }

    /// `n = 1, σ = 1, δ = 1/4` used by the linear decay experiments.
    pub fn linear_1d() -> ModelParams {
        ModelParams::new(qi(1), q(1, 4), 1)
    }
}
