//! Adaptive Gauss–Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of one 15-point Kronrod panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub value: f64,
    /// `∫|f|` over the panel with the Kronrod weights.
    pub abs_value: f64,
    pub error: f64,
    /// Largest `|f|` seen at the nodes.
    pub max_abs: f64,
    /// Node with the largest `|f|`.
    pub argmax: f64,
}

pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_value = WGK[7] * fc.abs();
    let (mut max_abs, mut argmax) = (fc.abs(), c);
    for j in 0..7 {
        let dx = h * XGK[j];
        let (x1, x2) = (c - dx, c + dx);
        let (f1, f2) = (f(x1), f(x2));
        kron += WGK[j] * (f1 + f2);
        abs_value += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        for (x, v) in [(x1, f1.abs()), (x2, f2.abs())] {
            if v > max_abs {
                max_abs = v;
                argmax = x;
            }
        }
    }
    Panel {
        value: kron * h,
        abs_value: abs_value * h.abs(),
        error: ((kron - gauss) * h).abs(),
        max_abs,
        argmax,
    }
}

/// Tolerances and budget for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    /// Maximum number of panel evaluations.
    pub budget: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 1e-300, budget: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub abs_value: f64,
    pub max_abs: f64,
    pub argmax: f64,
    pub panels: usize,
}

impl Integral {
    pub fn zero() -> Self {
        Self { value: 0.0, error: 0.0, abs_value: 0.0, max_abs: 0.0, argmax: 0.0, panels: 0 }
    }

    pub fn absorb(&mut self, other: &Integral) {
        self.value += other.value;
        self.error += other.error;
        self.abs_value += other.abs_value;
        self.panels += other.panels;
        if other.max_abs > self.max_abs {
            self.max_abs = other.max_abs;
            self.argmax = other.argmax;
        }
    }
}

/// Globally adaptive integration on `[a, b]`: the panel with the largest error is split
/// until the summed error meets `max(abs, rel · ∫|f|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    let first = gk15(&mut f, a, b);
    let (mut value, mut error, mut abs_value) = (first.value, first.error, first.abs_value);
    let mut heap = BinaryHeap::from([Piece { a, b, panel: first }]);
    let mut used = 1;
    loop {
        // Differences below a few ulps of the absolute integral are rounding, not truncation.
        let target = tol.abs.max(tol.rel * abs_value).max(50.0 * f64::EPSILON * abs_value);
        let worst = heap.peek().expect("at least one panel");
        let exhausted = (worst.b - worst.a).abs() <= 1e-15 * worst.a.abs().max(1e-300);
        if error <= target || exhausted {
            let (mut value, mut error, mut abs_value) = (0.0, 0.0, 0.0);
            let mut best = heap.peek().expect("at least one panel").panel;
            for piece in &heap {
                value += piece.panel.value;
                error += piece.panel.error;
                abs_value += piece.panel.abs_value;
                if piece.panel.max_abs > best.max_abs {
                    best = piece.panel;
                }
            }
            return Ok(Integral {
                value,
                error,
                abs_value,
                max_abs: best.max_abs,
                argmax: best.argmax,
                panels: used,
            });
        }
        if used >= tol.budget {
            return Err(Error::NonConvergence { what: "adaptive quadrature".into(), partial: value });
        }
        let Piece { a: x0, b: x1, panel } = heap.pop().expect("at least one panel");
        let mid = 0.5 * (x0 + x1);
        let left = gk15(&mut f, x0, mid);
        let right = gk15(&mut f, mid, x1);
        value += left.value + right.value - panel.value;
        error += left.error + right.error - panel.error;
        abs_value += left.abs_value + right.abs_value - panel.abs_value;
        error = error.max(0.0);
        heap.push(Piece { a: x0, b: mid, panel: left });
        heap.push(Piece { a: mid, b: x1, panel: right });
        used += 2;
    }
}

/// A subinterval ordered by its error estimate.
struct Piece {
    a: f64,
    b: f64,
    panel: Panel,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.panel.error.total_cmp(&other.panel.error)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// `P_0(x), …, P_{n-1}(x)`.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let (mut p0, mut p1) = (1.0, x);
    for k in 0..n {
        match k {
            0 => out.push(1.0),
            1 => out.push(x),
            _ => {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
                out.push(p2);
            }
        }
    }
    out
}

/// Spherical Bessel functions `j_0(x), …, j_{n-1}(x)`.
pub fn spherical_bessel(n: usize, x: f64) -> Vec<f64> {
    let ax = x.abs();
    let mut out = vec![0.0; n];
    if ax < 1.0 {
        // Power series; (2l+1)!! grows fast enough that 20 terms are plenty.
        let mut lead = 1.0;
        for (l, slot) in out.iter_mut().enumerate() {
            if l > 0 {
                lead *= ax / (2 * l + 1) as f64;
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..20 {
                term *= -0.5 * ax * ax / (k as f64 * (2 * l + 2 * k + 1) as f64);
                sum += term;
            }
            *slot = lead * sum;
        }
    } else if ax >= n as f64 {
        let (s, c) = ax.sin_cos();
        let mut prev = s / ax;
        let mut cur = s / (ax * ax) - c / ax;
        for (l, slot) in out.iter_mut().enumerate() {
            match l {
                0 => *slot = prev,
                1 => *slot = cur,
                _ => {
                    let next = (2 * l - 1) as f64 / ax * cur - prev;
                    prev = cur;
                    cur = next;
                    *slot = next;
                }
            }
        }
    } else {
        // Miller's downward recurrence, normalized on whichever of j_0, j_1 is larger.
        let top = n + 30 + ax as usize;
        let mut f = vec![0.0; top + 2];
        f[top] = 1e-300;
        for l in (1..=top).rev() {
            f[l - 1] = (2 * l + 1) as f64 / ax * f[l] - f[l + 1];
            if f[l - 1].abs() > 1e250 {
                for v in f.iter_mut().skip(l - 1) {
                    *v *= 1e-250;
                }
            }
        }
        let (s, c) = ax.sin_cos();
        let j0 = s / ax;
        let j1 = s / (ax * ax) - c / ax;
        let scale = if j0.abs() >= j1.abs() { j0 / f[0] } else { j1 / f[1] };
        for (l, slot) in out.iter_mut().enumerate() {
            *slot = f[l] * scale;
        }
    }
    if x < 0.0 {
        for (l, v) in out.iter_mut().enumerate() {
            if l % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let s: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((s - 2.0).abs() < 1e-15);
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials() {
        for deg in 0..=22 {
            let mut f = |x: f64| x.powi(deg);
            let p = gk15(&mut f, 0.0, 1.0);
            assert!((p.value - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "degree {deg}");
        }
        for deg in 0..=13 {
            let mut f = |x: f64| x.powi(deg);
            let p = gk15(&mut f, -1.0, 2.0);
            assert!(p.error < 1e-12, "degree {deg}");
        }
    }

    #[test]
    fn gauss_legendre_sixteen() {
        let (x, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for deg in 0..32 {
            let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((v - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn spherical_bessel_regimes_agree() {
        // j_l from the closed forms for l ≤ 2 and from the Legendre plane-wave integral.
        for &x in &[0.3, 0.999, 1.001, 5.0, 15.9, 16.1, 40.0, -3.0] {
            let j = spherical_bessel(16, x);
            let (s, c) = x.sin_cos();
            assert!((j[0] - s / x).abs() < 1e-14);
            assert!((j[2] - ((3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x))).abs() < 1e-12, "{x}");
            let (nodes, w) = gauss_legendre(64);
            for l in [5usize, 11, 15] {
                let mut re = 0.0;
                let mut im = 0.0;
                for (t, wt) in nodes.iter().zip(&w) {
                    let p = legendre_values(l + 1, *t)[l];
                    re += wt * p * (x * t).cos();
                    im += wt * p * (x * t).sin();
                }
                // ∫ P_l e^{ixs} = 2 i^l j_l(x)
                let val = if l % 2 == 0 { re } else { im };
                let sign = if l % 4 < 2 { 1.0 } else { -1.0 };
                assert!((val - sign * 2.0 * j[l]).abs() < 1e-12, "l {l} x {x}: {val} vs {}", 2.0 * j[l]);
            }
        }
    }

    #[test]
    fn adaptive_handles_peaks() {
        let r = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, Tolerance::default()).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn budget_is_reported() {
        let tol = Tolerance { rel: 1e-15, abs: 0.0, budget: 5 };
        let r = integrate(|x: f64| (1.0 / x.max(1e-300)).sin(), 0.0, 1.0, tol);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }
}
