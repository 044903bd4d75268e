//! Periodic grids, Fourier transforms, spectral differentiation, 2/3-rule
//! dealiasing and Sobolev norms.
//!
//! Fourier coefficients are normalised so that `f(x) = Σ_k f̂(k) e^{ik·x}`; the
//! forward transform divides by the number of grid points. Integral norms use the
//! normalised measure `dx/|𝕋|`, so `‖e^{ix}‖_{L²} = 1` and Parseval reads
//! `‖f‖²_{L²} = Σ_k |f̂(k)|²`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type C = Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("grid dimension must be 1 or 2, got {0}")]
    BadDimension(usize),
    #[error("points per axis must be a power of two >= 8, got {0}")]
    BadResolution(usize),
    #[error("domain period must be finite and positive, got {0}")]
    BadLength(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected {expected} values, got {got}")]
    BadLength2 { expected: usize, got: usize },
    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    BadAxis { axis: usize, dim: usize },
}

struct GridInner {
    dim: usize,
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Wavenumbers along one axis, FFT order.
    /// Signed mode indices along one axis, FFT order.
    j_axis: Vec<i64>,
}

/// Uniform periodic grid with `n` points per axis on `[0, L)^dim`.
///
/// Cheap to clone; FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("n", &self.inner.n)
            .field("length", &self.inner.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim
                && self.inner.n == other.inner.n
                && self.inner.length == other.inner.length)
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self, SpectralError> {
        if !(1..=2).contains(&dim) {
            return Err(SpectralError::BadDimension(dim));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(SpectralError::BadResolution(n));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::BadLength(length));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let j_axis: Vec<i64> = (0..n)
            .map(|j| if j <= n / 2 { j as i64 } else { j as i64 - n as i64 })
            .collect();
        Ok(Self {
            inner: Arc::new(GridInner { dim, n, length, forward, inverse, j_axis }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.inner.n.pow(self.inner.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    /// Fundamental wavenumber `2π/L`.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.inner.length
    }

    /// Largest resolved wavenumber magnitude along one axis (Nyquist).
    pub fn k_nyquist(&self) -> f64 {
        self.k0() * (self.inner.n / 2) as f64
    }

    /// Coordinates of one axis.
    pub fn axis_points(&self) -> Vec<f64> {
        (0..self.inner.n).map(|i| i as f64 * self.dx()).collect()
    }

    /// Coordinates `[x, y]` of flat index `idx` (row-major, x fastest).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let n = self.inner.n;
        let dx = self.dx();
        if self.inner.dim == 1 {
            [idx as f64 * dx, 0.0]
        } else {
            [(idx % n) as f64 * dx, (idx / n) as f64 * dx]
        }
    }

    /// Signed mode indices `[jx, jy]` of flat index `idx`.
    pub fn mode(&self, idx: usize) -> [i64; 2] {
        let n = self.inner.n;
        if self.inner.dim == 1 {
            [self.inner.j_axis[idx], 0]
        } else {
            [self.inner.j_axis[idx % n], self.inner.j_axis[idx / n]]
        }
    }

    /// Wavevector `[kx, ky]` of flat index `idx`.
    pub fn wavevector(&self, idx: usize) -> [f64; 2] {
        let [jx, jy] = self.mode(idx);
        [self.k0() * jx as f64, self.k0() * jy as f64]
    }

    pub fn k_squared(&self, idx: usize) -> f64 {
        let [kx, ky] = self.wavevector(idx);
        kx * kx + ky * ky
    }

    pub fn k_abs(&self, idx: usize) -> f64 {
        self.k_squared(idx).sqrt()
    }

    /// Flat index of the mode with signed indices `[jx, jy]`.
    pub fn index_of_mode(&self, jx: i64, jy: i64) -> usize {
        let n = self.inner.n as i64;
        let wrap = |j: i64| j.rem_euclid(n) as usize;
        if self.inner.dim == 1 {
            wrap(jx)
        } else {
            wrap(jy) * self.inner.n + wrap(jx)
        }
    }

    /// True when a mode is kept by the 2/3 rule on every axis.
    pub fn is_dealiased_mode(&self, idx: usize) -> bool {
        let cut = self.dealias_cutoff();
        let [jx, jy] = self.mode(idx);
        jx.abs() <= cut && jy.abs() <= cut
    }

    /// Largest mode index kept by the 2/3 rule: `⌊n/3⌋`.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.inner.n / 3) as i64
    }

    pub fn is_nyquist_mode(&self, idx: usize) -> bool {
        let h = (self.inner.n / 2) as i64;
        let [jx, jy] = self.mode(idx);
        jx == h || (self.inner.dim == 2 && jy == h)
    }

    fn check_axis(&self, axis: usize) -> Result<(), SpectralError> {
        if axis >= self.inner.dim {
            return Err(SpectralError::BadAxis { axis, dim: self.inner.dim });
        }
        Ok(())
    }

    /// In-place forward transform, normalised by `1/len`.
    pub fn forward_in_place(&self, data: &mut [C]) {
        self.transform(data, &self.inner.forward);
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    /// In-place inverse transform (no normalisation).
    pub fn inverse_in_place(&self, data: &mut [C]) {
        self.transform(data, &self.inner.inverse);
    }

    fn transform(&self, data: &mut [C], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len());
        let n = self.inner.n;
        plan.process(data);
        if self.inner.dim == 2 {
            // rows were done above (process handles every contiguous chunk); now columns
            let mut t = vec![C::new(0.0, 0.0); data.len()];
            transpose(data, &mut t, n);
            plan.process(&mut t);
            transpose(&t, data, n);
        }
    }
}

fn transpose(src: &[C], dst: &mut [C], n: usize) {
    for i in 0..n {
        for j in 0..n {
            dst[j * n + i] = src[i * n + j];
        }
    }
}

/// Whether a field currently stores point values or Fourier coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repr {
    Physical,
    Spectral,
}

/// Complex field on a [`Grid`], in either representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    data: Vec<C>,
    repr: Repr,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: grid.clone(), data: vec![C::new(0.0, 0.0); grid.len()], repr: Repr::Spectral }
    }

    pub fn from_physical(grid: &Grid, values: Vec<C>) -> Result<Self, SpectralError> {
        Self::checked(grid, values, Repr::Physical)
    }

    pub fn from_spectral(grid: &Grid, coeffs: Vec<C>) -> Result<Self, SpectralError> {
        Self::checked(grid, coeffs, Repr::Spectral)
    }

    fn checked(grid: &Grid, data: Vec<C>, repr: Repr) -> Result<Self, SpectralError> {
        if data.len() != grid.len() {
            return Err(SpectralError::BadLength2 { expected: grid.len(), got: data.len() });
        }
        Ok(Self { grid: grid.clone(), data, repr })
    }

    /// Sample a real function of the coordinates.
    pub fn from_real_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(grid, |x, y| C::new(f(x, y), 0.0))
    }

    /// Sample a complex function of the coordinates.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> C) -> Self {
        let data = (0..grid.len())
            .map(|i| {
                let [x, y] = grid.point(i);
                f(x, y)
            })
            .collect();
        Self { grid: grid.clone(), data, repr: Repr::Physical }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn repr(&self) -> Repr {
        self.repr
    }

    /// Raw storage in the current representation.
    pub fn as_slice(&self) -> &[C] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C> {
        self.data
    }

    pub fn to_spectral(&self) -> Self {
        let mut out = self.clone();
        out.make_spectral();
        out
    }

    pub fn to_physical(&self) -> Self {
        let mut out = self.clone();
        out.make_physical();
        out
    }

    pub fn make_spectral(&mut self) {
        if self.repr == Repr::Physical {
            self.grid.forward_in_place(&mut self.data);
            self.repr = Repr::Spectral;
        }
    }

    pub fn make_physical(&mut self) {
        if self.repr == Repr::Spectral {
            self.grid.inverse_in_place(&mut self.data);
            self.repr = Repr::Physical;
        }
    }

    /// Point values (transforming if needed).
    pub fn values(&self) -> Vec<C> {
        self.to_physical().data
    }

    /// Real parts of the point values.
    pub fn real_values(&self) -> Vec<f64> {
        self.to_physical().data.into_iter().map(|z| z.re).collect()
    }

    /// Fourier coefficients (transforming if needed).
    pub fn coefficients(&self) -> Vec<C> {
        self.to_spectral().data
    }

    /// Apply a Fourier multiplier `m(flat index)`; result is spectral.
    pub fn multiplier(&self, m: impl Fn(usize) -> C) -> Self {
        let mut out = self.to_spectral();
        for (i, v) in out.data.iter_mut().enumerate() {
            *v *= m(i);
        }
        out
    }

    /// Real-valued multiplier variant.
    pub fn real_multiplier(&self, m: impl Fn(usize) -> f64) -> Self {
        self.multiplier(|i| C::new(m(i), 0.0))
    }

    /// `∂^order/∂x_axis^order`: multiplies each coefficient by `(ik)^order`.
    ///
    /// For odd orders the Nyquist mode is dropped, since its derivative is not
    /// representable as a real grid function.
    pub fn derivative(&self, axis: usize, order: u32) -> Result<Self, SpectralError> {
        self.grid.check_axis(axis)?;
        let g = self.grid.clone();
        Ok(self.multiplier(|i| {
            if order % 2 == 1 && g.mode(i)[axis].unsigned_abs() as usize == g.n() / 2 {
                return C::new(0.0, 0.0);
            }
            let k = g.wavevector(i)[axis];
            C::new(0.0, k).powu(order)
        }))
    }

    /// Zero every mode above two thirds of the Nyquist index on any axis.
    pub fn dealias(&self) -> Self {
        let g = self.grid.clone();
        self.real_multiplier(|i| if g.is_dealiased_mode(i) { 1.0 } else { 0.0 })
    }

    /// `(Σ_k (1+|k|²)^s |f̂(k)|²)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let coeffs = self.to_spectral();
        coeffs
            .data
            .iter()
            .enumerate()
            .map(|(i, c)| (1.0 + self.grid.k_squared(i)).powf(s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Homogeneous Sobolev seminorm `(Σ_k |k|^{2s} |f̂(k)|²)^{1/2}` excluding `k = 0`.
    pub fn homogeneous_sobolev_norm(&self, s: f64) -> f64 {
        let coeffs = self.to_spectral();
        coeffs
            .data
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 0)
            .map(|(i, c)| self.grid.k_squared(i).powf(s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `L^p` norm of the point values under the normalised measure.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.values(), p)
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    pub fn max_norm(&self) -> f64 {
        self.lp_norm(f64::INFINITY)
    }

    fn check_same_grid(&self, other: &Self) -> Result<(), SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch);
        }
        Ok(())
    }

    /// Pointwise product of point values (no dealiasing); result is physical.
    pub fn mul(&self, other: &Self) -> Result<Self, SpectralError> {
        self.check_same_grid(other)?;
        let a = self.values();
        let b = other.values();
        let data = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(Self { grid: self.grid.clone(), data, repr: Repr::Physical })
    }

    /// Pointwise product followed by the 2/3 rule; result is spectral.
    pub fn mul_dealiased(&self, other: &Self) -> Result<Self, SpectralError> {
        Ok(self.mul(other)?.dealias())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SpectralError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SpectralError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C, C) -> C) -> Result<Self, SpectralError> {
        self.check_same_grid(other)?;
        let b = if other.repr == self.repr {
            other.clone()
        } else if self.repr == Repr::Spectral {
            other.to_spectral()
        } else {
            other.to_physical()
        };
        let data = self.data.iter().zip(&b.data).map(|(x, y)| f(*x, *y)).collect();
        Ok(Self { grid: self.grid.clone(), data, repr: self.repr })
    }

    pub fn scale(&self, s: C) -> Self {
        Self {
            grid: self.grid.clone(),
            data: self.data.iter().map(|v| v * s).collect(),
            repr: self.repr,
        }
    }

    /// Pointwise map over point values; result is physical.
    pub fn map_values(&self, f: impl Fn(C) -> C) -> Self {
        let data = self.values().into_iter().map(f).collect();
        Self { grid: self.grid.clone(), data, repr: Repr::Physical }
    }
}

/// `L^p` norm of point values under the normalised measure (`p = ∞` gives the max).
pub fn lp_norm(values: &[C], p: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    if p.is_infinite() {
        return values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    let n = values.len() as f64;
    if p == 2.0 {
        return (values.iter().map(|z| z.norm_sqr()).sum::<f64>() / n).sqrt();
    }
    (values.iter().map(|z| z.norm().powf(p)).sum::<f64>() / n).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band_limited(grid: &Grid, max_mode: i64, seed: u64, real: bool) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpectralField::zeros(grid);
        let g = grid.clone();
        for i in 0..g.len() {
            let [jx, jy] = g.mode(i);
            if jx.abs() <= max_mode && jy.abs() <= max_mode {
                f.as_mut_slice()[i] = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        if real {
            f = f.to_physical().map_values(|z| C::new(z.re, 0.0)).to_spectral();
        }
        f
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(3, 16, 1.0).is_err());
        assert!(Grid::new(1, 12, 1.0).is_err());
        assert!(Grid::new(1, 4, 1.0).is_err());
        assert!(Grid::new(1, 16, -1.0).is_err());
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        assert_eq!(g.len(), 256);
        assert_eq!(g.mode(0), [0, 0]);
        assert_eq!(g.index_of_mode(-3, 2), 2 * 16 + 13);
        assert_eq!(g.mode(g.index_of_mode(-3, 2)), [-3, 2]);
    }

    #[test]
    fn round_trip_is_identity() {
        for dim in [1, 2] {
            let g = Grid::new(dim, 32, 3.0).unwrap();
            let f = SpectralField::from_fn(&g, |x, y| C::new((x * 2.1).sin() + y, x.cos() * y));
            let back = f.to_spectral().to_physical();
            let err = f.sub(&back).unwrap().max_norm();
            assert!(err <= 1e-12 * f.max_norm(), "dim {dim}: {err}");
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = Grid::new(1, 16, 5.0).unwrap();
        let f = SpectralField::from_real_fn(&g, |_, _| 3.5);
        assert!(f.derivative(0, 1).unwrap().max_norm() < 1e-14);
    }

    #[test]
    fn second_derivative_of_sine() {
        let l = 3.0;
        let g = Grid::new(1, 32, l).unwrap();
        let k = 2.0 * PI / l;
        let f = SpectralField::from_real_fn(&g, |x, _| (k * x).sin());
        let d2 = f.derivative(0, 2).unwrap();
        let want = SpectralField::from_real_fn(&g, |x, _| -k * k * (k * x).sin());
        assert!(d2.sub(&want).unwrap().max_norm() < 1e-12);
    }

    #[test]
    fn first_derivative_twice_equals_second() {
        let g = Grid::new(2, 32, 2.0).unwrap();
        let f = random_band_limited(&g, 10, 7, false);
        for axis in 0..2 {
            let twice = f.derivative(axis, 1).unwrap().derivative(axis, 1).unwrap();
            let once = f.derivative(axis, 2).unwrap();
            let err = twice.sub(&once).unwrap().max_norm();
            assert!(err <= 1e-12 * once.max_norm(), "{err}");
        }
    }

    #[test]
    fn dealias_keeps_low_modes_and_kills_nyquist() {
        let g = Grid::new(1, 32, 1.0).unwrap();
        let f = random_band_limited(&g, 5, 1, false);
        assert!(f.dealias().sub(&f).unwrap().max_norm() < 1e-15);
        let mut nyq = SpectralField::zeros(&g);
        nyq.as_mut_slice()[16] = C::new(1.0, 0.0);
        assert_eq!(nyq.dealias().max_norm(), 0.0);
    }

    #[test]
    fn dealiased_product_matches_fine_grid_product() {
        // Oracle: evaluate the product of the same band-limited fields on a grid twice
        // as fine, transform, and restrict to the coarse modes.
        let n = 32;
        let coarse = Grid::new(1, n, 2.0 * PI).unwrap();
        let fine = Grid::new(1, 2 * n, 2.0 * PI).unwrap();
        let band = (n / 6) as i64;
        let a = random_band_limited(&coarse, band, 3, false);
        let b = random_band_limited(&coarse, band, 4, false);
        let lift = |f: &SpectralField| {
            let mut out = SpectralField::zeros(&fine);
            for (i, c) in f.coefficients().iter().enumerate() {
                let j = coarse.mode(i)[0];
                out.as_mut_slice()[fine.index_of_mode(j, 0)] = *c;
            }
            out
        };
        let fine_prod = lift(&a).mul(&lift(&b)).unwrap().coefficients();
        let got = a.mul_dealiased(&b).unwrap().coefficients();
        for (i, c) in got.iter().enumerate() {
            let j = coarse.mode(i)[0];
            let want = if j.abs() <= coarse.dealias_cutoff() {
                fine_prod[fine.index_of_mode(j, 0)]
            } else {
                C::new(0.0, 0.0)
            };
            assert!((c - want).norm() < 1e-12, "mode {j}");
        }
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        assert_eq!(SpectralField::zeros(&g).sobolev_norm(1.0), 0.0);
        let f = SpectralField::from_fn(&g, |x, _| C::new(0.0, x).exp());
        assert!((f.sobolev_norm(1.0) - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn parseval_for_random_fields() {
        for dim in [1, 2] {
            let g = Grid::new(dim, 32, 1.7).unwrap();
            let f = random_band_limited(&g, 16, 11 + dim as u64, false).to_physical();
            let phys = lp_norm(f.as_slice(), 2.0);
            assert!((f.sobolev_norm(0.0) - phys).abs() <= 1e-10 * phys);
        }
    }

    #[test]
    fn derivative_commutes_with_dealias() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let f = random_band_limited(&g, 8, 5, false);
        let a = f.derivative(1, 1).unwrap().dealias();
        let b = f.dealias().derivative(1, 1).unwrap();
        assert!(a.sub(&b).unwrap().max_norm() < 1e-12);
    }

    #[test]
    fn real_fields_have_conjugate_symmetric_spectra() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let f = random_band_limited(&g, 8, 9, true);
        let c = f.coefficients();
        for i in 0..g.len() {
            let [jx, jy] = g.mode(i);
            let mirror = g.index_of_mode(-jx, -jy);
            assert!((c[i] - c[mirror].conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn bad_axis_is_rejected() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        assert!(SpectralField::zeros(&g).derivative(1, 1).is_err());
    }
}
