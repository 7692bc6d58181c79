use proptest::prelude::*;
use sigmadamp::kernel_analysis::{
    kernel_norm, kernel_norm_series, log_times, Band, Kernel, QuadConfig, TimeRegime, LARGE_T_WINDOW, SMALL_T_WINDOW,
};
use sigmadamp::params::ModelParams;
use sigmadamp::rational::{q, qi, to_f64};
use sigmadamp::Q;

fn heat_like() -> ModelParams {
    ModelParams::new(qi(1), q(1, 4), 1)
}

fn stiff() -> ModelParams {
    ModelParams::new(qi(2), q(9, 10), 1)
}

fn fitted(kernel: Kernel, a: Q, band: Band, r: f64, regime: TimeRegime, p: &ModelParams) -> (f64, Option<f64>) {
    let window = match regime {
        TimeRegime::SmallT => SMALL_T_WINDOW,
        TimeRegime::LargeT => LARGE_T_WINDOW,
    };
    let cfg = QuadConfig::default();
    let (rows, fit) = kernel_norm_series(kernel, a, band, r, regime, &log_times(window, 9), p, &cfg).unwrap();
    (fit.unwrap().exponent, rows[0].theoretical_exponent)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn band_norms_obey_the_triangle_inequality(
        k1 in any::<bool>(),
        t in prop::sample::select(vec![0.05, 0.3, 2.0, 20.0]),
        a in prop::sample::select(vec![0.0, 0.5, 1.0]),
    ) {
        let kernel = if k1 { Kernel::K1 } else { Kernel::K0 };
        let p = heat_like();
        let cfg = QuadConfig::default();
        let norm = |band| kernel_norm(kernel, a, t, band, 1.0, &p, 1, &cfg).unwrap().value;
        let (low, high, full) = (norm(Band::Low), norm(Band::High), norm(Band::Full));
        // Triangle inequality in every direction, with the outer integral's tolerance.
        let slack = 1.0 + 1e-3;
        prop_assert!(full <= (low + high) * slack, "{full} > {low} + {high}");
        prop_assert!(low <= (full + high) * slack, "{low} > {full} + {high}");
        prop_assert!(high <= (full + low) * slack, "{high} > {full} + {low}");
    }
}

#[test]
fn large_time_fits_match_theory() {
    let cases = [
        (Kernel::K0, qi(1), Band::Full, heat_like()),
        (Kernel::K1, qi(0), Band::Full, heat_like()),
        (Kernel::K0, qi(1), Band::Low, heat_like()),
        (Kernel::K0, qi(1), Band::Full, stiff()),
        (Kernel::K1, qi(0), Band::Full, stiff()),
    ];
    for (kernel, a, band, p) in cases {
        let (fit, theory) = fitted(kernel, a, band, 1.0, TimeRegime::LargeT, &p);
        let theory = theory.unwrap();
        assert!((fit - theory).abs() <= 0.15 * theory.abs(), "{kernel} {band} a={a}: {fit} vs {theory}");
    }
}

/// The small-time rates are upper bounds. The measured norms never grow faster as
/// `t → 0` than predicted, though for `L¹` they are often smaller than the bound.
#[test]
fn small_time_fits_respect_the_bound() {
    for p in [heat_like(), stiff()] {
        for kernel in [Kernel::K0, Kernel::K1] {
            let (fit, theory) = fitted(kernel, qi(0), Band::Full, 1.0, TimeRegime::SmallT, &p);
            let theory = theory.unwrap();
            assert!(fit >= theory - 0.15 * theory.abs().max(0.1), "{kernel} σ={}: {fit} vs {theory}", p.sigma);
        }
    }
}

#[test]
fn sup_norm_is_sharp_at_small_time() {
    let (fit, theory) = fitted(Kernel::K0, qi(0), Band::Full, f64::INFINITY, TimeRegime::SmallT, &heat_like());
    let expected = -1.0 / (2.0 * to_f64(&heat_like().delta));
    assert_eq!(theory, Some(expected));
    assert!((fit - expected).abs() < 0.05 * expected.abs(), "{fit}");
}

#[test]
fn exponent_moves_monotonically_with_inverse_r() {
    let p = heat_like();
    let fits: Vec<f64> = [1.0, 4.0 / 3.0, 2.0, 4.0, f64::INFINITY]
        .iter()
        .map(|&r| fitted(Kernel::K0, qi(0), Band::Full, r, TimeRegime::LargeT, &p).0)
        .collect();
    for w in fits.windows(2) {
        assert!(w[1] < w[0], "{fits:?}");
    }
}
