//! The Duhamel convolution integral with its decay bound, and Faà di Bruno's formula.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// `∫₀ᵗ (1+t−τ)^{−α} (1+τ)^{−β} dτ` to relative accuracy `1e-8`.
pub fn duhamel_integral(alpha: f64, beta: f64, t: f64) -> Result<f64> {
    check_exponents(alpha, beta)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be ≥ 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let f = |tau: f64| (1.0 + t - tau).powf(-alpha) * (1.0 + tau).powf(-beta);
    let tol = Tolerance { rel: 1e-10, abs: 0.0, budget: 100_000 };
    // Both factors vary on unit scales near their own endpoint, so the pieces are
    // graded geometrically towards 0 and t.
    let mut cuts = vec![0.0];
    let mut w = 1.0;
    while w < 0.5 * t {
        cuts.push(w);
        w *= 2.0;
    }
    let half = cuts.len();
    cuts.push(0.5 * t);
    for k in (1..half).rev() {
        cuts.push(t - cuts[k]);
    }
    cuts.push(t);
    let mut total = 0.0;
    for p in cuts.windows(2) {
        total += quad::integrate(f, p[0], p[1], tol)?.value;
    }
    Ok(total)
}

/// Which case of the Duhamel bound applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DuhamelBranch {
    /// `max{α, β} > 1`.
    Integrable,
    /// `max{α, β} = 1`.
    Logarithmic,
    /// `max{α, β} < 1`.
    Growing,
}

impl DuhamelBranch {
    pub fn of(alpha: f64, beta: f64) -> Self {
        let m = alpha.max(beta);
        if m > 1.0 {
            Self::Integrable
        } else if m == 1.0 {
            Self::Logarithmic
        } else {
            Self::Growing
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Integrable => "integrable",
            Self::Logarithmic => "logarithmic",
            Self::Growing => "growing",
        }
    }
}

/// Right-hand side of the Duhamel estimate, without its constant.
pub fn duhamel_bound(alpha: f64, beta: f64, t: f64) -> Result<f64> {
    check_exponents(alpha, beta)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be ≥ 0, got {t}")));
    }
    let s = 1.0 + t;
    Ok(match DuhamelBranch::of(alpha, beta) {
        DuhamelBranch::Integrable => s.powf(-alpha.min(beta)),
        DuhamelBranch::Logarithmic => s.powf(-alpha.min(beta)) * (2.0 + t).ln(),
        DuhamelBranch::Growing => s.powf(1.0 - alpha - beta),
    })
}

fn check_exponents(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && beta.is_finite() && alpha >= 0.0 && beta >= 0.0) {
        return Err(Error::InvalidArgument(format!("exponents must be ≥ 0, got α = {alpha}, β = {beta}")));
    }
    Ok(())
}

/// Largest order accepted by [`faa_di_bruno_partitions`].
pub const MAX_ORDER: usize = 20;

/// A solution of `1·m₁ + 2·m₂ + … + n·mₙ = n` with its Faà di Bruno coefficient
/// `n! / ∏ (m_j! · (j!)^{m_j})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub multiplicities: Vec<u32>,
    pub coefficient: u128,
}

impl Partition {
    /// Number of parts, the order of the outer derivative in its term.
    pub fn parts(&self) -> u32 {
        self.multiplicities.iter().sum()
    }
}

/// All partitions of `n` in descending lexicographic order of `(m₁, …, mₙ)`.
pub fn faa_di_bruno_partitions(n: usize) -> Result<Vec<Partition>> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("order must be in 1..={MAX_ORDER}, got {n}")));
    }
    let mut out = Vec::new();
    let mut m = vec![0u32; n];
    fill(n, 1, n, &mut m, &mut out);
    Ok(out)
}

/// Chooses `m_j` for `j = part`, largest first, with `rest` still to cover.
fn fill(n: usize, part: usize, rest: usize, m: &mut [u32], out: &mut Vec<Partition>) {
    if part > n {
        if rest == 0 {
            out.push(Partition { multiplicities: m.to_vec(), coefficient: coefficient(n, m) });
        }
        return;
    }
    for k in (0..=rest / part).rev() {
        m[part - 1] = k as u32;
        fill(n, part + 1, rest - k * part, m, out);
    }
    m[part - 1] = 0;
}

fn factorial(k: u32) -> u128 {
    (1..=k as u128).product()
}

fn coefficient(n: usize, m: &[u32]) -> u128 {
    let den: u128 = m
        .iter()
        .enumerate()
        .map(|(j, &mj)| factorial(mj) * factorial(j as u32 + 1).pow(mj))
        .product();
    factorial(n as u32) / den
}

/// `dⁿ/dxⁿ h(g(x))` from `h_derivs[k] = h⁽ᵏ⁾(g(x))` and `g_derivs[j] = g⁽ʲ⁾(x)`,
/// both indexed from 0 and holding at least `n + 1` entries.
pub fn composite_derivative(h_derivs: &[f64], g_derivs: &[f64], n: usize) -> Result<f64> {
    if h_derivs.len() <= n || g_derivs.len() <= n {
        return Err(Error::InvalidArgument(format!(
            "order {n} needs {} derivatives of each function, got {} and {}",
            n + 1,
            h_derivs.len(),
            g_derivs.len()
        )));
    }
    if n == 0 {
        return Ok(h_derivs[0]);
    }
    let mut total = 0.0;
    for p in faa_di_bruno_partitions(n)? {
        let mut term = p.coefficient as f64 * h_derivs[p.parts() as usize];
        for (j, &mj) in p.multiplicities.iter().enumerate() {
            if mj > 0 {
                term *= g_derivs[j + 1].powi(mj as i32);
            }
        }
        total += term;
    }
    Ok(total)
}
