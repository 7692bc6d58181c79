use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sigmadamp::toolkit::{
    composite_derivative, duhamel_bound, duhamel_integral, faa_di_bruno_partitions, DuhamelBranch,
};

/// Bell numbers from the Bell triangle.
fn bell(n: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for v in &row {
            next.push(next.last().unwrap() + v);
        }
        row = next;
    }
    row[0]
}

/// Partition numbers from Euler's pentagonal recurrence.
fn partition_number(n: usize) -> u128 {
    let mut p = vec![0i128; n + 1];
    p[0] = 1;
    for m in 1..=n {
        let mut k = 1i64;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > m {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            p[m] += sign * p[m - g1];
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= m {
                p[m] += sign * p[m - g2];
            }
            k += 1;
        }
    }
    p[n] as u128
}

#[test]
fn oracles_themselves() {
    assert_eq!((0..6).map(bell).collect::<Vec<_>>(), vec![1, 1, 2, 5, 15, 52]);
    assert_eq!((1..8).map(partition_number).collect::<Vec<_>>(), vec![1, 2, 3, 5, 7, 11, 15]);
}

#[test]
fn counts_and_sums_match_partition_and_bell_numbers() {
    for n in 1..=12 {
        let ps = faa_di_bruno_partitions(n).unwrap();
        assert_eq!(ps.len() as u128, partition_number(n), "p({n})");
        assert_eq!(ps.iter().map(|p| p.coefficient).sum::<u128>(), bell(n), "B({n})");
        for p in &ps {
            let weight: usize = p.multiplicities.iter().enumerate().map(|(j, &m)| (j + 1) * m as usize).sum();
            assert_eq!(weight, n);
        }
    }
    let four = faa_di_bruno_partitions(4).unwrap();
    assert_eq!(four.len(), 5);
    assert_eq!(four.iter().map(|p| p.coefficient).sum::<u128>(), 15);
}

#[test]
fn partitions_come_in_descending_order() {
    let ps = faa_di_bruno_partitions(8).unwrap();
    for w in ps.windows(2) {
        assert!(w[0].multiplicities > w[1].multiplicities);
    }
}

#[test]
fn composite_derivative_examples() {
    // h = exp, g = identity: every term but m₁ = n vanishes.
    let h = vec![1.7; 6];
    let g = [0.3, 1.0, 0.0, 0.0, 0.0, 0.0];
    assert!((composite_derivative(&h, &g, 5).unwrap() - 1.7).abs() < 1e-14);
    // h(s) = s², g(x) = x³ at x = 1: d³/dx³ x⁶ = 120.
    let h = [1.0, 2.0, 2.0, 0.0];
    let g = [1.0, 3.0, 6.0, 6.0];
    assert_eq!(composite_derivative(&h, &g, 3).unwrap(), 120.0);
}

/// Fourth central difference, Richardson-extrapolated over steps `h`, `h/2` and `h/4`.
fn fourth_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + 2.0 * h) - 4.0 * f(x + h) + 6.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / h.powi(4);
    let (d0, d1, d2) = (d(h), d(h / 2.0), d(h / 4.0));
    let (e0, e1) = ((4.0 * d1 - d0) / 3.0, (4.0 * d2 - d1) / 3.0);
    (16.0 * e1 - e0) / 15.0
}

#[test]
fn sine_of_square_matches_finite_differences() {
    let x: f64 = 0.7;
    let s = x * x;
    let h = [s.sin(), s.cos(), -s.sin(), -s.cos(), s.sin()];
    let g = [s, 2.0 * x, 2.0, 0.0, 0.0];
    let exact = composite_derivative(&h, &g, 4).unwrap();
    let fd = fourth_difference(|y: f64| (y * y).sin(), x, 0.05);
    assert!((exact - fd).abs() < 1e-5 * exact.abs(), "{exact} vs {fd}");
}

#[test]
fn random_smooth_compositions_match_finite_differences() {
    // h(s) = e^{as}, g(x) = sin(bx) + cx², derivatives in closed form.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let (a, b, c): (f64, f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.2..1.5), rng.gen_range(-1.0..1.0));
        let x: f64 = rng.gen_range(-1.0..1.0);
        let gx = (b * x).sin() + c * x * x;
        let h: Vec<f64> = (0..5).map(|k| a.powi(k) * (a * gx).exp()).collect();
        let g = [
            gx,
            b * (b * x).cos() + 2.0 * c * x,
            -b * b * (b * x).sin() + 2.0 * c,
            -b.powi(3) * (b * x).cos(),
            b.powi(4) * (b * x).sin(),
        ];
        let exact = composite_derivative(&h, &g, 4).unwrap();
        // Relative to the sum of the terms' magnitudes, which stays meaningful when they cancel.
        let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
        let scale = composite_derivative(&abs(&h), &abs(&g), 4).unwrap();
        let fd = fourth_difference(|y: f64| (a * ((b * y).sin() + c * y * y)).exp(), x, 0.05);
        assert!((exact - fd).abs() < 1e-5 * scale, "a={a} b={b} c={c} x={x}: {exact} vs {fd}");
    }
}

#[test]
fn duhamel_closed_forms() {
    for t in [0.0, 0.5, 10.0, 1000.0] {
        assert!((duhamel_integral(0.0, 0.0, t).unwrap() - t).abs() <= 1e-8 * t.max(1.0));
        let v = duhamel_integral(0.0, 1.0, t).unwrap();
        assert!((v - t.ln_1p()).abs() <= 1e-8 * v.max(1e-300));
    }
    // α = β = 2 by partial fractions, with s = 2 + t:
    // I = 2t/(s²(1+t)) + 4 ln(1+t)/s³.
    let t: f64 = 100.0;
    let s = 2.0 + t;
    let exact = 2.0 * t / (s * s * (1.0 + t)) + 4.0 * t.ln_1p() / s.powi(3);
    let v = duhamel_integral(2.0, 2.0, t).unwrap();
    assert!((v - exact).abs() < 1e-8 * exact, "{v} vs {exact}");
}

#[test]
fn duhamel_ratio_is_bounded_on_the_lattice() {
    let grid: Vec<f64> = (0..=12).map(|k| 0.25 * k as f64).collect();
    let mut branches = std::collections::HashSet::new();
    for &alpha in &grid {
        for &beta in &grid {
            let ratios: Vec<f64> = [1.0, 10.0, 100.0, 1000.0]
                .iter()
                .map(|&t| duhamel_integral(alpha, beta, t).unwrap() / duhamel_bound(alpha, beta, t).unwrap())
                .collect();
            let large = &ratios[1..];
            let hi = large.iter().copied().fold(0.0, f64::max);
            let lo = large.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(hi <= 3.0 * lo, "α={alpha} β={beta}: {ratios:?}");
            branches.insert(DuhamelBranch::of(alpha, beta));
        }
    }
    assert_eq!(branches.len(), 3);
}

proptest! {
    #[test]
    fn composite_derivative_is_linear_in_outer_derivatives(
        h1 in prop::collection::vec(-2.0f64..2.0, 7),
        h2 in prop::collection::vec(-2.0f64..2.0, 7),
        g in prop::collection::vec(-2.0f64..2.0, 7),
        c in -3.0f64..3.0,
        n in 1usize..=6,
    ) {
        let mix: Vec<f64> = h1.iter().zip(&h2).map(|(a, b)| a + c * b).collect();
        let lhs = composite_derivative(&mix, &g, n).unwrap();
        let rhs = composite_derivative(&h1, &g, n).unwrap() + c * composite_derivative(&h2, &g, n).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn duhamel_integral_with_flat_first_factor_grows(beta in 0.0f64..3.0, t in 0.0f64..200.0, dt in 0.0f64..50.0) {
        let a = duhamel_integral(0.0, beta, t).unwrap();
        let b = duhamel_integral(0.0, beta, t + dt).unwrap();
        prop_assert!(b >= a * (1.0 - 1e-9));
    }

    #[test]
    fn duhamel_integral_is_symmetric(alpha in 0.0f64..3.0, beta in 0.0f64..3.0, t in 0.0f64..500.0) {
        // τ ↦ t − τ swaps the two factors.
        let a = duhamel_integral(alpha, beta, t).unwrap();
        let b = duhamel_integral(beta, alpha, t).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * a.max(1e-300));
    }
}
