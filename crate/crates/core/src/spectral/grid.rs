use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::par;

/// Periodic grid on `[-L, L)^n` with `N` points per axis.
///
/// Values are stored row-major with axis 0 slowest. Spectral coefficients use the
/// usual FFT ordering along each axis and are normalized so that
/// `u(x_j) = Σ_k c_k e^{i ξ_k (x_j + L)}` with `ξ_k = πk/L`.
#[derive(Clone)]
pub struct TorusGrid {
    n: usize,
    points: usize,
    half_length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("n", &self.n)
            .field("points", &self.points)
            .field("half_length", &self.half_length)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.points == other.points && self.half_length == other.half_length
    }
}

impl TorusGrid {
    pub fn new(n: usize, points: usize, half_length: f64) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidArgument(format!("dimension must be 1, 2 or 3, got {n}")));
        }
        if points < 2 || !points.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("points per axis must be even, got {points}")));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidArgument(format!("half length must be > 0, got {half_length}")));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            points,
            half_length,
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.n as i32)
    }

    pub fn volume(&self) -> f64 {
        (2.0 * self.half_length).powi(self.n as i32)
    }

    /// Spacing of the frequency lattice.
    pub fn dxi(&self) -> f64 {
        std::f64::consts::PI / self.half_length
    }

    /// Signed integer wavenumber of a 1-D index in FFT order.
    pub fn wave_index(&self, i: usize) -> i64 {
        let half = self.points / 2;
        if i < half {
            i as i64
        } else {
            i as i64 - self.points as i64
        }
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.points / 2
    }

    fn split(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        let mut rest = flat;
        for a in (0..self.n).rev() {
            idx[a] = rest % self.points;
            rest /= self.points;
        }
        idx
    }

    /// `|ξ|` for every spectral index.
    pub fn radii(&self) -> Vec<f64> {
        let dxi = self.dxi();
        par::map_range(self.len(), |flat| {
            let idx = self.split(flat);
            let mut s = 0.0;
            for &i in idx.iter().take(self.n) {
                let k = self.wave_index(i) as f64 * dxi;
                s += k * k;
            }
            s.sqrt()
        })
    }

    /// Whether any axis of this spectral index is the Nyquist mode.
    pub fn touches_nyquist(&self, flat: usize) -> bool {
        let idx = self.split(flat);
        idx.iter().take(self.n).any(|&i| self.is_nyquist(i))
    }

    /// Physical coordinates of a flat index.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.split(flat);
        let mut x = [0.0; 3];
        for a in 0..self.n {
            x[a] = -self.half_length + idx[a] as f64 * self.dx();
        }
        x
    }

    pub fn positions(&self) -> Vec<[f64; 3]> {
        par::map_range(self.len(), |i| self.position(i))
    }

    /// Forward transform in place, divided by `N^n`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
        let scale = 1.0 / self.len() as f64;
        par::for_each_indexed(data, |_, z| *z *= scale);
    }

    /// Inverse transform in place, without scaling.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "field length does not match grid");
        let n = self.points;
        let mut buf = vec![Complex64::default(); data.len()];
        for _ in 0..self.n {
            par::for_each_chunk(data, n, |_, line| {
                let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
                plan.process_with_scratch(line, &mut scratch);
            });
            if self.n > 1 {
                rotate_axes(data, &mut buf, n);
                data.copy_from_slice(&buf);
            }
        }
    }
}

/// Moves axis 0 to the end: views `src` as an `N × M` matrix and writes its transpose.
fn rotate_axes(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    let m = src.len() / n;
    par::for_each_chunk(dst, n, |r, row| {
        for (i0, out) in row.iter_mut().enumerate() {
            *out = src[i0 * m + r];
        }
    });
}
