use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use rustfft::num_complex::Complex64;

use super::Grid2D;
use crate::error::Result;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Fourier representation `f(x) = sum_k c_k exp(i k.x)` of a real field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
}

/// Grid samples of a real field, row-major (`x2` rows, `x1` columns).
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid2D) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![ZERO; grid.len()],
        }
    }

    /// Wraps raw coefficients. The caller is responsible for Hermitian
    /// symmetry.
    pub fn from_coeffs(grid: &Grid2D, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.len(), "coefficient count != N^2");
        SpectralField {
            grid: grid.clone(),
            coeffs,
        }
    }

    /// Samples `f(x1, x2)` on the grid and transforms.
    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        RealField::from_fn(grid, f).to_spectral()
    }

    /// Constant field.
    pub fn constant(grid: &Grid2D, value: f64) -> Self {
        let mut s = Self::zeros(grid);
        s.coeffs[0] = Complex64::new(value, 0.0);
        s
    }

    /// `a cos(k.x) + b sin(k.x)` for the lattice mode `(m1, m2)`, exact in
    /// coefficient space.
    pub fn single_mode(grid: &Grid2D, m1: i64, m2: i64, a: f64, b: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.add_mode(m1, m2, a, b);
        f
    }

    /// Adds the single real mode `a cos(k.x) + b sin(k.x)` for integer
    /// mode numbers `(m1, m2)` on top of the current content.
    pub fn add_mode(&mut self, m1: i64, m2: i64, a: f64, b: f64) {
        let n = self.grid.n() as i64;
        let wrap = |m: i64| (((m % n) + n) % n) as usize;
        let idx = wrap(m2) * n as usize + wrap(m1);
        if m1 == 0 && m2 == 0 {
            self.coeffs[0] += Complex64::new(a, 0.0);
            return;
        }
        let cidx = self.grid.conjugate_index(idx);
        // a cos + b sin = (a - i b)/2 e^{ik.x} + (a + i b)/2 e^{-ik.x}
        self.coeffs[idx] += Complex64::new(a / 2.0, -b / 2.0);
        self.coeffs[cidx] += Complex64::new(a / 2.0, b / 2.0);
    }

    /// Random real field with amplitudes `amp(|k|)` and uniform random
    /// phases, restricted to the dealiased band, mean zero.
    pub fn random<R: Rng>(grid: &Grid2D, rng: &mut R, amp: impl Fn(f64) -> f64) -> Self {
        let mut s = Self::zeros(grid);
        let d = grid.dealias_mode();
        for m2 in -d..=d {
            for m1 in -d..=d {
                // one representative per +-k pair
                if m2 < 0 || (m2 == 0 && m1 <= 0) {
                    continue;
                }
                let kf = grid.k_fundamental();
                let kk = kf * ((m1 * m1 + m2 * m2) as f64).sqrt();
                let a = amp(kk);
                if a == 0.0 {
                    continue;
                }
                let ph: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let r: f64 = rng.gen_range(0.5..1.5);
                s.add_mode(m1, m2, a * r * ph.cos(), a * r * ph.sin());
            }
        }
        s
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Spatial mean, i.e. the `k = 0` coefficient.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn without_mean(mut self) -> Self {
        self.coeffs[0] = ZERO;
        self
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation from Hermitian symmetry, relative to the largest
    /// coefficient (0 for the zero field). Nyquist entries are included.
    pub fn realness_defect(&self) -> f64 {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for idx in 0..self.coeffs.len() {
            let c = self.grid.conjugate_index(idx);
            worst = worst.max((self.coeffs[idx] - self.coeffs[c].conj()).norm());
        }
        worst / scale
    }

    /// Largest coefficient outside the 2/3-rule band, relative.
    pub fn alias_content(&self) -> f64 {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for (idx, c) in self.coeffs.iter().enumerate() {
            if !self.grid.is_resolved(idx) {
                worst = worst.max(c.norm());
            }
        }
        worst / scale
    }

    pub fn dealias(&mut self) {
        for idx in 0..self.coeffs.len() {
            if !self.grid.is_resolved(idx) {
                self.coeffs[idx] = ZERO;
            }
        }
    }

    pub fn dealiased(mut self) -> Self {
        self.dealias();
        self
    }

    pub fn zero_nyquist(&mut self) {
        for idx in 0..self.coeffs.len() {
            if self.grid.touches_nyquist(idx) {
                self.coeffs[idx] = ZERO;
            }
        }
    }

    /// Inverse transform to grid samples.
    pub fn to_real(&self) -> RealField {
        let mut buf = self.coeffs.clone();
        self.grid.fft2(&mut buf, true);
        RealField {
            grid: self.grid.clone(),
            values: buf.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Inverse transform of two real fields with one complex transform.
    pub fn to_real_pair(a: &SpectralField, b: &SpectralField) -> (RealField, RealField) {
        debug_assert!(a.grid.same_as(&b.grid));
        let i = Complex64::new(0.0, 1.0);
        let mut buf: Vec<Complex64> = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| x + i * y)
            .collect();
        a.grid.fft2(&mut buf, true);
        let (re, im) = buf.into_iter().map(|c| (c.re, c.im)).unzip();
        (
            RealField {
                grid: a.grid.clone(),
                values: re,
            },
            RealField {
                grid: a.grid.clone(),
                values: im,
            },
        )
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        debug_assert!(self.grid.same_as(&other.grid));
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for x in &mut self.coeffs {
            *x *= a;
        }
    }

    /// L^2 pairing `int f g dx` on the torus.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        let l = self.grid.l();
        l * l
            * self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| (a * b.conj()).re)
                .sum::<f64>()
    }

    /// `||f||_{L^2}^2` by Plancherel.
    pub fn l2_norm_sq(&self) -> f64 {
        let l = self.grid.l();
        l * l * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn check_grid(&self, other: &SpectralField) -> Result<()> {
        self.grid.check_same(&other.grid)
    }

    /// Spectral resampling onto another grid of the same side length:
    /// zero padding or truncation (truncation drops the Nyquist line).
    pub fn resample(&self, target: &Grid2D) -> Self {
        let mut out = SpectralField::zeros(target);
        let n_src = self.grid.n();
        let n_dst = target.n();
        let lim = (n_src.min(n_dst) / 2) as i64;
        let wrap = |m: i64, n: usize| (((m % n as i64) + n as i64) % n as i64) as usize;
        for m2 in -(lim - 1)..lim {
            for m1 in -(lim - 1)..lim {
                let s = wrap(m2, n_src) * n_src + wrap(m1, n_src);
                let d = wrap(m2, n_dst) * n_dst + wrap(m1, n_dst);
                out.coeffs[d] = self.coeffs[s];
            }
        }
        out
    }
}

impl RealField {
    pub fn zeros(grid: &Grid2D) -> Self {
        RealField {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: &Grid2D, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "sample count != N^2");
        RealField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let (x1, x2) = grid.point(idx);
                f(x1, x2)
            })
            .collect();
        RealField {
            grid: grid.clone(),
            values,
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Forward transform normalised so that `c_k` is the Fourier
    /// coefficient of `exp(i k.x)`.
    pub fn to_spectral(&self) -> SpectralField {
        let mut buf: Vec<Complex64> = self
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.grid.fft2(&mut buf, false);
        let s = 1.0 / self.grid.len() as f64;
        for c in &mut buf {
            *c *= s;
        }
        SpectralField {
            grid: self.grid.clone(),
            coeffs: buf,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Equal-weight quadrature of `f`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// Pointwise product.
    pub fn mul(&self, other: &RealField) -> RealField {
        RealField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(a);
        out
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self * -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn add_mode_matches_sampled_function() {
        let g = Grid2D::periodic(16).unwrap();
        let mut s = SpectralField::zeros(&g);
        s.add_mode(2, -1, 0.3, -1.1);
        let direct = SpectralField::from_fn(&g, |x, y| {
            0.3 * (2.0 * x - y).cos() - 1.1 * (2.0 * x - y).sin()
        });
        let d = &s - &direct;
        assert!(d.max_abs_coeff() < 1e-14);
    }

    #[test]
    fn round_trip_random_fields() {
        let g = Grid2D::periodic(32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let vals: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = RealField::from_values(&g, vals);
            let s = f.to_spectral();
            assert!(s.realness_defect() < 1e-12);
            let back = s.to_real();
            let err = f
                .values()
                .iter()
                .zip(back.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-12 * f.max_abs());
        }
    }

    #[test]
    fn pair_transform_splits_real_and_imag() {
        let g = Grid2D::periodic(16).unwrap();
        let a = SpectralField::from_fn(&g, |x, y| x.sin() * y.cos());
        let b = SpectralField::from_fn(&g, |x, _| (3.0 * x).cos());
        let (ra, rb) = SpectralField::to_real_pair(&a, &b);
        for (p, q) in ra.values().iter().zip(a.to_real().values()) {
            assert!((p - q).abs() < 1e-13);
        }
        for (p, q) in rb.values().iter().zip(b.to_real().values()) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn random_fields_are_real_and_dealiased() {
        let g = Grid2D::periodic(32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = SpectralField::random(&g, &mut rng, |k| (1.0 + k * k).powf(-1.0));
        assert!(f.realness_defect() < 1e-15);
        assert_eq!(f.alias_content(), 0.0);
        assert_eq!(f.mean(), 0.0);
    }

    #[test]
    fn resample_preserves_band_limited_fields() {
        let g = Grid2D::periodic(16).unwrap();
        let g2 = Grid2D::periodic(32).unwrap();
        let f = SpectralField::from_fn(&g, |x, y| (2.0 * x + y).sin());
        let up = f.resample(&g2);
        let back = up.resample(&g);
        assert!((&back - &f).max_abs_coeff() < 1e-15);
        assert!((up.l2_norm() - f.l2_norm()).abs() < 1e-12);
    }
}
