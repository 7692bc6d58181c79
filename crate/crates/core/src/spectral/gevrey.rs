use super::evolve::Snapshot;
use crate::dispersion::Dispersion;
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Smooth cutoff: 1 on `[0, 1/2]`, 0 on `[1, ∞)`, monotone in between.
pub fn cutoff_chi(rho: f64) -> f64 {
    cutoff_pair(rho).0
}

/// `1 − χ(ρ)`, computed without cancellation where `χ` is close to 1.
pub fn cutoff_chi_complement(rho: f64) -> f64 {
    cutoff_pair(rho).1
}

fn cutoff_pair(rho: f64) -> (f64, f64) {
    fn psi(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (-1.0 / x).exp()
        }
    }
    if rho <= 0.5 {
        return (1.0, 0.0);
    }
    if rho >= 1.0 {
        return (0.0, 1.0);
    }
    let x = 2.0 * (1.0 - rho);
    let (a, b) = (psi(x), psi(1.0 - x));
    (a / (a + b), b / (a + b))
}

/// `∫ e^{2c|ξ|^{2δ}t} (1 − χ(|ξ|)) (|ξ|^{2σ}|v|² + |v_t|²) dξ` on the torus.
pub fn gevrey_energy(snap: &Snapshot, c: f64, params: &ModelParams) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidArgument(format!("Gevrey constant must be > 0, got {c}")));
    }
    snap.u.check_same_grid(&snap.ut)?;
    let u = snap.u.clone().to_spectral();
    let ut = snap.ut.clone().to_spectral();
    let radii = u.grid.radii();
    let (sigma, delta) = (params.sigma_f(), params.delta_f());
    let mut sum = 0.0;
    for ((a, b), &r) in u.values.iter().zip(&ut.values).zip(&radii) {
        let high = 1.0 - cutoff_chi(r);
        if high == 0.0 {
            continue;
        }
        let w = (2.0 * c * r.powf(2.0 * delta) * snap.t).exp() * high;
        sum += w * (r.powf(2.0 * sigma) * a.norm_sqr() + b.norm_sqr());
    }
    Ok(sum * u.grid.volume())
}

/// `0.99 ·` the smallest ratio `−Re λ1 / ρ^{2δ}` over `ρ ∈ [1/2, 1000]`.
pub fn default_gevrey_constant(params: &ModelParams) -> Result<f64> {
    let disp = Dispersion::new(params)?;
    let mut best = f64::INFINITY;
    for k in 0..=400 {
        let rho = 0.5 * 2000f64.powf(k as f64 / 400.0);
        let roots = disp.roots(rho)?;
        best = best.min(-roots.lambda1.re / rho.powf(2.0 * disp.delta));
    }
    Ok(0.99 * best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff_chi(0.3), 1.0);
        assert_eq!(cutoff_chi(2.0), 0.0);
        let mid = cutoff_chi(0.75);
        assert!(mid > 0.0 && mid < 1.0);
        assert!((mid - 0.5).abs() < 1e-12);
        let mut prev = 1.0;
        for k in 1..100 {
            let v = cutoff_chi(0.5 + k as f64 / 200.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn default_constant_for_reference_model() {
        let p = crate::params::reference::linear_1d();
        let c = default_gevrey_constant(&p).unwrap();
        assert!((c - 0.99 * 0.5).abs() < 1e-12);
    }
}
