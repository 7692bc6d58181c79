use std::io::{Read, Write};

use num_complex::Complex64;

use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Physical,
    Spectral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: TorusGrid,
    pub space: Space,
    pub values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: &TorusGrid, space: Space) -> Self {
        Self {
            grid: grid.clone(),
            space,
            values: vec![Complex64::default(); grid.len()],
        }
    }

    /// Samples a real function at the grid points.
    pub fn from_fn<F>(grid: &TorusGrid, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let n = grid.dim();
        let values = par::map_range(grid.len(), |i| {
            let x = grid.position(i);
            Complex64::new(f(&x[..n]), 0.0)
        });
        Self {
            grid: grid.clone(),
            space: Space::Physical,
            values,
        }
    }

    /// `amplitude · exp(−|x|²/width²)`.
    pub fn gaussian(grid: &TorusGrid, amplitude: f64, width: f64) -> Self {
        Self::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            amplitude * (-r2 / (width * width)).exp()
        })
    }

    pub fn to_spectral(mut self) -> Self {
        if self.space == Space::Physical {
            self.grid.forward(&mut self.values);
            self.space = Space::Spectral;
        }
        self
    }

    pub fn to_physical(mut self) -> Self {
        if self.space == Space::Spectral {
            self.grid.inverse(&mut self.values);
            self.space = Space::Physical;
        }
        self
    }

    pub fn in_space(self, space: Space) -> Self {
        match space {
            Space::Physical => self.to_physical(),
            Space::Spectral => self.to_spectral(),
        }
    }

    /// Multiplies spectral coefficients by `|ξ|^a`. The zero mode is dropped for `a ≠ 0`.
    /// The result is returned in the same space as the input.
    pub fn riesz_apply(&self, a: f64) -> Result<Field> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::InvalidArgument(format!("Riesz order must be ≥ 0, got {a}")));
        }
        let space = self.space;
        let mut spec = self.clone().to_spectral();
        if a != 0.0 {
            let radii = self.grid.radii();
            par::for_each_indexed(&mut spec.values, |i, z| {
                let r = radii[i];
                *z = if r == 0.0 { Complex64::default() } else { *z * r.powf(a) };
            });
        }
        Ok(spec.in_space(space))
    }

    /// `L²` norm, computed by Parseval in spectral space.
    pub fn l2_norm(&self) -> f64 {
        match self.space {
            Space::Spectral => {
                let s: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
                (s * self.grid.volume()).sqrt()
            }
            Space::Physical => {
                let s: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
                (s * self.grid.cell_volume()).sqrt()
            }
        }
    }

    /// `L^q` norm by lattice quadrature; `q = ∞` gives the maximum modulus.
    pub fn lq_norm(&self, q: f64) -> Result<f64> {
        if !(q >= 1.0) {
            return Err(Error::InvalidArgument(format!("L^q norm needs q ≥ 1, got {q}")));
        }
        let phys;
        let vals = match self.space {
            Space::Physical => &self.values,
            Space::Spectral => {
                phys = self.clone().to_physical();
                &phys.values
            }
        };
        if q.is_infinite() {
            return Ok(vals.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        let s: f64 = vals.iter().map(|z| z.norm().powf(q)).sum();
        Ok((s * self.grid.cell_volume()).powf(1.0 / q))
    }

    /// `‖|D|^a u‖_{L²}`.
    pub fn sobolev_seminorm(&self, a: f64) -> Result<f64> {
        let spec = self.clone().to_spectral();
        if a == 0.0 {
            return Ok(spec.l2_norm());
        }
        let radii = self.grid.radii();
        let s: f64 = spec
            .values
            .iter()
            .zip(&radii)
            .map(|(z, &r)| if r == 0.0 { 0.0 } else { z.norm_sqr() * r.powf(2.0 * a) })
            .sum();
        Ok((s * self.grid.volume()).sqrt())
    }

    /// Fraction of the `L²` mass outside the ball of radius `fraction · L`.
    pub fn edge_mass_fraction(&self, fraction: f64) -> f64 {
        let phys = self.clone().to_physical();
        let lim = fraction * self.grid.half_length();
        let n = self.grid.dim();
        let (mut outside, mut total) = (0.0, 0.0);
        for (i, z) in phys.values.iter().enumerate() {
            let x = self.grid.position(i);
            let r = x[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
            let w = z.norm_sqr();
            total += w;
            if r > lim {
                outside += w;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }

    /// Writes the field as a little-endian dump: header `n, N` as `u64`, `L, t` as `f64`,
    /// then row-major `(re, im)` pairs of `f64`.
    pub fn write_dump<W: Write>(&self, mut w: W, t: f64) -> Result<()> {
        w.write_all(&(self.grid.dim() as u64).to_le_bytes())?;
        w.write_all(&(self.grid.points() as u64).to_le_bytes())?;
        w.write_all(&self.grid.half_length().to_le_bytes())?;
        w.write_all(&t.to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * self.values.len());
        for z in &self.values {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Reads a dump written by [`Field::write_dump`]; returns the field and its time.
    pub fn read_dump<R: Read>(mut r: R, space: Space) -> Result<(Field, f64)> {
        let mut b8 = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut b8)?;
            Ok(b8)
        };
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let points = u64::from_le_bytes(next(&mut r)?) as usize;
        let half = f64::from_le_bytes(next(&mut r)?);
        let t = f64::from_le_bytes(next(&mut r)?);
        let grid = TorusGrid::new(n, points, half)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let re = f64::from_le_bytes(next(&mut r)?);
            let im = f64::from_le_bytes(next(&mut r)?);
            values.push(Complex64::new(re, im));
        }
        Ok((Field { grid, space, values }, t))
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn riesz_on_single_mode() {
        let g = TorusGrid::new(1, 64, PI).unwrap();
        let u = Field::from_fn(&g, |x| (3.0 * x[0]).cos());
        let v = u.riesz_apply(0.5).unwrap();
        assert_eq!(v.space, Space::Physical);
        for (i, z) in v.values.iter().enumerate() {
            let x = g.position(i)[0];
            assert!((z.re - 3f64.sqrt() * (3.0 * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval_between_spaces() {
        let g = TorusGrid::new(2, 32, 5.0).unwrap();
        let u = Field::gaussian(&g, 1.0, 1.3);
        let a = u.l2_norm();
        let b = u.clone().to_spectral().l2_norm();
        assert!((a - b).abs() < 1e-12 * a);
        let c = u.lq_norm(2.0).unwrap();
        assert!((a - c).abs() < 1e-12 * a);
    }

    #[test]
    fn dump_roundtrip() {
        let g = TorusGrid::new(2, 8, 1.5).unwrap();
        let u = Field::gaussian(&g, 2.0, 0.7).to_spectral();
        let mut bytes = Vec::new();
        u.write_dump(&mut bytes, 3.25).unwrap();
        assert_eq!(bytes.len(), 32 + 16 * 64);
        let (back, t) = Field::read_dump(&bytes[..], Space::Spectral).unwrap();
        assert_eq!(t, 3.25);
        assert_eq!(back, u);
    }

    #[test]
    fn lq_rejects_small_exponent() {
        let g = TorusGrid::new(1, 8, 1.0).unwrap();
        assert!(Field::zeros(&g, Space::Physical).lq_norm(0.5).is_err());
    }
}
