//! `J̃_μ(s) = J_μ(s)/s^μ` for integer and half-integer orders.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Order `μ`, stored as `2μ`. Supported orders are `μ ≥ −1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BesselOrder(i32);

impl BesselOrder {
    pub fn from_twice(twice: i32) -> Result<Self> {
        if twice < -1 {
            return Err(Error::InvalidArgument(format!(
                "unsupported Bessel order {}",
                twice as f64 / 2.0
            )));
        }
        Ok(Self(twice))
    }

    pub fn new(mu: f64) -> Result<Self> {
        let twice = 2.0 * mu;
        if twice.fract() != 0.0 || !twice.is_finite() {
            return Err(Error::InvalidArgument(format!("unsupported Bessel order {mu}")));
        }
        Self::from_twice(twice as i32)
    }

    /// `n/2 − 1`, the order of the radial Fourier kernel in dimension `n`.
    pub fn for_dimension(n: usize) -> Result<Self> {
        Self::from_twice(n as i32 - 2)
    }

    pub fn mu(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    fn gamma_mu_plus_one(self) -> f64 {
        // Γ(μ + 1) from Γ(1) = 1 or Γ(1/2) = √π.
        let (mut g, mut arg) = if self.0 % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
        let target = self.mu() + 1.0;
        while arg < target - 0.25 {
            g *= arg;
            arg += 1.0;
        }
        g
    }
}

/// Below this argument the power series is used; above it the series cancels too much.
const SERIES_LIMIT: f64 = 1.0;

pub fn bessel_tilde(order: BesselOrder, s: f64) -> Result<f64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::InvalidArgument(format!("Bessel argument must be ≥ 0, got {s}")));
    }
    Ok(eval(order, s))
}

fn eval(order: BesselOrder, s: f64) -> f64 {
    // Upward recurrence in the half-integer case is only stable past the order.
    if s <= SERIES_LIMIT.max(0.5 * order.0 as f64) {
        return series(order, s);
    }
    beyond_series(order, s)
}

fn beyond_series(order: BesselOrder, s: f64) -> f64 {
    let mu = order.mu();
    if order.0 % 2 == 0 {
        libm::jn(order.0 / 2, s) / s.powf(mu)
    } else {
        // J_{l+1/2}(s) = sqrt(2s/π) j_l(s), so J̃ = sqrt(2/π) j_l(s)/s^l.
        let l = (order.0 - 1) / 2;
        let mut prev = s.cos() / s;
        let mut cur = s.sin() / s;
        if l == -1 {
            return (2.0 / PI).sqrt() * s * prev;
        }
        for k in 0..l {
            let next = (2 * k + 1) as f64 / s * cur - prev;
            prev = cur;
            cur = next;
        }
        (2.0 / PI).sqrt() * cur / s.powi(l)
    }
}

fn series(order: BesselOrder, s: f64) -> f64 {
    let mu = order.mu();
    let x = -0.25 * s * s;
    let mut term = 2f64.powf(-mu) / order.gamma_mu_plus_one();
    let mut sum = term;
    for k in 1..200 {
        let k = k as f64;
        term *= x / (k * (k + mu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Kernel of the radial inverse Fourier transform in dimension `n`, for `n ∈ {1, 2, 3}`,
/// using the elementary forms.
pub fn radial_kernel(n: usize, s: f64) -> f64 {
    let c = (2.0 / PI).sqrt();
    match n {
        1 => c * s.cos(),
        2 => libm::j0(s),
        3 => {
            if s < 1e-3 {
                c * (1.0 - s * s / 6.0 + s.powi(4) / 120.0)
            } else {
                c * s.sin() / s
            }
        }
        _ => eval(BesselOrder(n as i32 - 2), s),
    }
}
