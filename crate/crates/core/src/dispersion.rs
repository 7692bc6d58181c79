//! Characteristic roots and Fourier multipliers of the linear propagators.
//!
//! For each frequency radius `ρ` the Fourier transform satisfies
//! `v'' + μρ^{2δ} v' + ρ^{2σ} v = 0`; `K0` and `K1` are the solutions with data
//! `(1, 0)` and `(0, 1)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::par;

/// Relative root separation below which the confluent formulas are used.
pub const COALESCENCE_EPS: f64 = 1e-6;
/// Relative root separation below which the divided difference is evaluated in stable form.
pub const STABLE_FORM_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    RealDistinct,
    Coalescent,
    ComplexConjugate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub regime: Regime,
}

/// Propagator multipliers and their time derivatives at one `(t, ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPair {
    pub k0: Complex64,
    pub k1: Complex64,
    pub dk0: Complex64,
    pub dk1: Complex64,
}

/// Dispersion relation for fixed `(σ, δ, μ)`, evaluated in floating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    pub sigma: f64,
    pub delta: f64,
    pub mu: f64,
}

impl Dispersion {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.require_standing()?;
        Ok(Self {
            sigma: params.sigma_f(),
            delta: params.delta_f(),
            mu: params.mu_f(),
        })
    }

    /// Damping coefficient `μρ^{2δ}`.
    pub fn damping(&self, rho: f64) -> f64 {
        self.mu * rho.powf(2.0 * self.delta)
    }

    /// Stiffness `ρ^{2σ}`.
    pub fn stiffness(&self, rho: f64) -> f64 {
        rho.powf(2.0 * self.sigma)
    }

    pub fn coalescence_radius(&self) -> f64 {
        (self.mu * self.mu / 4.0).powf(1.0 / (2.0 * self.sigma - 4.0 * self.delta))
    }

    pub fn roots(&self, rho: f64) -> Result<RootPair> {
        check_rho(rho)?;
        let b = self.damping(rho);
        let c = self.stiffness(rho);
        let disc = b * b - 4.0 * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let l2 = -0.5 * (b + sq);
            // Vieta avoids cancellation in the slow root.
            let l1 = if l2 != 0.0 { c / l2 } else { 0.0 };
            let regime = if sq < COALESCENCE_EPS * l1.abs().max(1.0) {
                Regime::Coalescent
            } else {
                Regime::RealDistinct
            };
            Ok(RootPair {
                lambda1: Complex64::new(l1, 0.0),
                lambda2: Complex64::new(l2, 0.0),
                regime,
            })
        } else {
            let w = 0.5 * (-disc).sqrt();
            let l1 = Complex64::new(-0.5 * b, w);
            let regime = if 2.0 * w < COALESCENCE_EPS * l1.norm().max(1.0) {
                Regime::Coalescent
            } else {
                Regime::ComplexConjugate
            };
            Ok(RootPair {
                lambda1: l1,
                lambda2: l1.conj(),
                regime,
            })
        }
    }

    pub fn kernel_hat(&self, t: f64, rho: f64) -> Result<KernelPair> {
        check_t(t)?;
        let roots = self.roots(rho)?;
        let b = self.damping(rho);
        let c = self.stiffness(rho);
        let (l1, l2) = (roots.lambda1, roots.lambda2);
        let d = l1 - l2;
        let scale = l1.norm().max(1.0);
        let z = d * t;
        let (k0, k1) = if d.norm() < COALESCENCE_EPS * scale && z.norm() < COALESCENCE_EPS {
            let lam = Complex64::new(-0.5 * b, 0.0);
            let e = (lam * t).exp();
            ((1.0 - lam * t) * e, t * e)
        } else if d.norm() < STABLE_FORM_EPS * scale || z.norm() < 1.0 {
            let k1 = t * (l2 * t).exp() * phi(z);
            ((l1 * t).exp() - l1 * k1, k1)
        } else {
            let e1 = (l1 * t).exp();
            let e2 = (l2 * t).exp();
            ((l1 * e2 - l2 * e1) / d, (e1 - e2) / d)
        };
        Ok(KernelPair {
            k0,
            k1,
            dk0: -c * k1,
            dk1: k0 - b * k1,
        })
    }

    /// `(K0, K1)` in real arithmetic. Cheaper than [`Dispersion::kernel_hat`] and stable
    /// through coalescence, since `expm1(−dt)/d → t` and `sin(ωt)/ω → t` as the gap closes.
    pub fn kernel_real(&self, t: f64, rho: f64) -> (f64, f64) {
        let b = self.damping(rho);
        let c = self.stiffness(rho);
        let disc = b * b - 4.0 * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let l2 = -0.5 * (b + sq);
            let l1 = if l2 != 0.0 { c / l2 } else { 0.0 };
            let e1 = (l1 * t).exp();
            let k1 = if sq == 0.0 { t * e1 } else { -e1 * (-sq * t).exp_m1() / sq };
            (e1 - l1 * k1, k1)
        } else {
            let w = 0.5 * (-disc).sqrt();
            let env = (-0.5 * b * t).exp();
            let (s, co) = (w * t).sin_cos();
            let k1 = env * s / w;
            (env * co + 0.5 * b * k1, k1)
        }
    }

    /// `f(ρ) = sqrt(1 − μ²/(4ρ^{2σ−4δ}))`, defined above the coalescence radius.
    pub fn large_freq_factor(&self, rho: f64) -> Result<f64> {
        check_rho(rho)?;
        let w = self.mu * self.mu / (4.0 * rho.powf(2.0 * self.sigma - 4.0 * self.delta));
        if w >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "ρ = {rho} is not above the coalescence radius {}",
                self.coalescence_radius()
            )));
        }
        Ok((1.0 - w).sqrt())
    }

    /// Trigonometric representation valid above the coalescence radius.
    pub fn kernel_large_freq(&self, t: f64, rho: f64) -> Result<KernelPair> {
        check_t(t)?;
        let f = self.large_freq_factor(rho)?;
        let b = self.damping(rho);
        let c = self.stiffness(rho);
        let omega = rho.powf(self.sigma) * f;
        let env = (-0.5 * b * t).exp();
        let (s, co) = (omega * t).sin_cos();
        let k0 = env * (co + b * s / (2.0 * omega));
        let k1 = env * s / omega;
        Ok(KernelPair {
            k0: k0.into(),
            k1: k1.into(),
            dk0: (-c * k1).into(),
            dk1: (k0 - b * k1).into(),
        })
    }

    /// `exp(−μρ^{2δ}t/2)`, the decay of both multipliers above the coalescence radius.
    pub fn damping_envelope(&self, t: f64, rho: f64) -> f64 {
        (-0.5 * self.damping(rho) * t).exp()
    }

    /// Ratio of `|K0|, |K1|` to their exponential envelopes at one point.
    pub fn envelope_ratios(&self, t: f64, rho: f64, rate_fraction: f64) -> Result<(f64, f64, Regime)> {
        let k = self.kernel_hat(t, rho)?;
        let regime = self.roots(rho)?.regime;
        let (r0, r1) = match regime {
            Regime::RealDistinct => {
                let rate = rho.powf(2.0 * (self.sigma - self.delta)) / self.mu;
                (
                    k.k0.norm() / (-rate_fraction * rate * t).exp(),
                    k.k1.norm() / (t * (-rate * t).exp()),
                )
            }
            _ => {
                let rate = rate_fraction * 0.5 * self.damping(rho);
                let env = (-rate * t).exp();
                (k.k0.norm() / env, k.k1.norm() / (t * env))
            }
        };
        let r1 = if t == 0.0 { 1.0 } else { r1 };
        Ok((r0, r1, regime))
    }

    /// Compares `|K0|, |K1|` with exponential envelopes on a lattice.
    pub fn pointwise_bound_check(
        &self,
        t_grid: &[f64],
        rho_grid: &[f64],
        consts: &BoundConstants,
    ) -> Result<BoundReport> {
        let cells: Vec<(f64, f64)> = rho_grid
            .iter()
            .flat_map(|&r| t_grid.iter().map(move |&t| (t, r)))
            .collect();
        let rows = par::try_map(&cells, |&(t, rho)| {
            let (r0, r1, regime) = self.envelope_ratios(t, rho, consts.rate_fraction)?;
            let (c0, c1) = match regime {
                Regime::RealDistinct => (consts.low_k0, consts.low_k1),
                _ => (consts.high_k0, consts.high_k1),
            };
            Ok(BoundRow {
                t,
                rho,
                ratio_k0: r0,
                ratio_k1: r1,
                regime,
                ok: r0 <= c0 && r1 <= c1,
            })
        })?;
        let passed = rows.iter().all(|r| r.ok);
        Ok(BoundReport { rows, passed })
    }

    /// Largest envelope ratios seen on a lattice, scaled by `1 + headroom`.
    pub fn calibrate_bound_constants(
        &self,
        t_grid: &[f64],
        rho_grid: &[f64],
        rate_fraction: f64,
        headroom: f64,
    ) -> Result<BoundConstants> {
        let probe = BoundConstants {
            low_k0: f64::INFINITY,
            low_k1: f64::INFINITY,
            high_k0: f64::INFINITY,
            high_k1: f64::INFINITY,
            rate_fraction,
        };
        let report = self.pointwise_bound_check(t_grid, rho_grid, &probe)?;
        let mut out = BoundConstants { low_k0: 0.0, low_k1: 0.0, high_k0: 0.0, high_k1: 0.0, rate_fraction };
        for r in &report.rows {
            let (a, b) = match r.regime {
                Regime::RealDistinct => (&mut out.low_k0, &mut out.low_k1),
                _ => (&mut out.high_k0, &mut out.high_k1),
            };
            *a = a.max(r.ratio_k0);
            *b = b.max(r.ratio_k1);
        }
        for v in [&mut out.low_k0, &mut out.low_k1, &mut out.high_k0, &mut out.high_k1] {
            *v *= 1.0 + headroom;
        }
        Ok(out)
    }
}

/// `(e^z − 1)/z`, accurate near zero.
pub fn phi(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..30 {
            term *= z / k as f64;
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("frequency radius must be ≥ 0, got {rho}")))
    }
}

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time must be ≥ 0, got {t}")))
    }
}

/// Envelope constants for the pointwise bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    pub low_k0: f64,
    pub low_k1: f64,
    pub high_k0: f64,
    pub high_k1: f64,
    /// Fraction of the exact decay rate used in the `K0` envelopes.
    pub rate_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub t: f64,
    pub rho: f64,
    pub ratio_k0: f64,
    pub ratio_k1: f64,
    pub regime: Regime,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub passed: bool,
}
