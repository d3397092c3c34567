use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{num_complex::Complex64, Fft, FftPlanner};

use crate::error::{LabError, Result};

/// Uniform N x N periodic grid on the torus `[0, L)^2`.
///
/// Fields are stored row-major: the row index runs along `x2`, the column
/// index along `x1`. Index `i` along either axis carries the integer mode
/// `m = i` for `i < N/2` and `m = i - N` otherwise, so `i = N/2` is the
/// unpaired Nyquist mode `m = -N/2`.
#[derive(Clone)]
pub struct Grid2D {
    inner: Arc<GridInner>,
}

struct GridInner {
    n: usize,
    l: f64,
    modes: Vec<i64>,
    k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl Grid2D {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(LabError::Config(format!(
                "grid size N = {n} must be a power of two with N >= 8"
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(LabError::Config(format!("domain side L = {l} must be > 0")));
        }
        let modes: Vec<i64> = (0..n)
            .map(|i| {
                if i < n / 2 {
                    i as i64
                } else {
                    i as i64 - n as i64
                }
            })
            .collect();
        let kf = 2.0 * PI / l;
        let k = modes.iter().map(|&m| kf * m as f64).collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Ok(Grid2D {
            inner: Arc::new(GridInner {
                n,
                l,
                modes,
                k,
                fwd,
                inv,
                scratch_len,
            }),
        })
    }

    /// The standard `[0, 2pi)^2` torus.
    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.inner.n
    }

    #[inline]
    pub fn l(&self) -> f64 {
        self.inner.l
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.inner.n * self.inner.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.inner.l / self.inner.n as f64
    }

    /// Cell area used by the equal-weight quadrature.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dx()
    }

    /// Fundamental wavenumber `2pi / L`.
    pub fn k_fundamental(&self) -> f64 {
        2.0 * PI / self.inner.l
    }

    /// Largest axis wavenumber `(N/2) 2pi / L`.
    pub fn k_max(&self) -> f64 {
        self.inner.n as f64 / 2.0 * self.k_fundamental()
    }

    /// Axis cutoff of the 2/3 rule: modes with `|k_i|` above it are zeroed.
    pub fn dealias_cutoff(&self) -> f64 {
        2.0 / 3.0 * self.k_max()
    }

    /// Largest integer mode kept by the 2/3 rule.
    pub fn dealias_mode(&self) -> i64 {
        (self.inner.n / 3) as i64
    }

    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        self.inner.modes[i]
    }

    /// Wavenumber along one axis for array index `i`.
    #[inline]
    pub fn k(&self, i: usize) -> f64 {
        self.inner.k[i]
    }

    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.inner.n / 2
    }

    /// `(k1, k2)` of the flat index `idx = row * N + col`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> (f64, f64) {
        let n = self.inner.n;
        (self.inner.k[idx % n], self.inner.k[idx / n])
    }

    /// Flat index of the mode `-k` for the flat index `idx`.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.inner.n;
        let (r, c) = (idx / n, idx % n);
        ((n - r) % n) * n + (n - c) % n
    }

    /// True when either component sits on the Nyquist row/column.
    #[inline]
    pub fn touches_nyquist(&self, idx: usize) -> bool {
        let n = self.inner.n;
        idx / n == n / 2 || idx % n == n / 2
    }

    /// True when the mode survives the 2/3 rule.
    #[inline]
    pub fn is_resolved(&self, idx: usize) -> bool {
        let n = self.inner.n;
        let d = self.dealias_mode();
        self.inner.modes[idx % n].abs() <= d && self.inner.modes[idx / n].abs() <= d
    }

    /// Physical coordinates of grid point `idx`.
    #[inline]
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let n = self.inner.n;
        let dx = self.dx();
        ((idx % n) as f64 * dx, (idx / n) as f64 * dx)
    }

    pub fn same_as(&self, other: &Grid2D) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.l == other.inner.l)
    }

    pub fn check_same(&self, other: &Grid2D) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(LabError::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    /// Unnormalised 2D transform in place: rows, then columns.
    pub(crate) fn fft2(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.inner.n;
        let plan = if inverse {
            self.inner.inv.clone()
        } else {
            self.inner.fwd.clone()
        };
        let scratch = self.inner.scratch_len;
        let run = |buf: &mut [Complex64]| {
            crate::par::for_each_chunk(
                buf,
                n,
                || vec![Complex64::new(0.0, 0.0); scratch],
                |s, row| plan.process_with_scratch(row, s),
            );
        };
        run(data);
        let mut t = transpose(data, n);
        run(&mut t);
        transpose_into(&t, data, n);
    }
}

fn transpose(src: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut dst = vec![Complex64::new(0.0, 0.0); n * n];
    transpose_into(src, &mut dst, n);
    dst
}

fn transpose_into(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for rb in (0..n).step_by(B) {
        for cb in (0..n).step_by(B) {
            for r in rb..(rb + B).min(n) {
                for c in cb..(cb + B).min(n) {
                    dst[c * n + r] = src[r * n + c];
                }
            }
        }
    }
}

impl fmt::Debug for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid2D(N={}, L={})", self.inner.n, self.inner.l)
    }
}

impl PartialEq for Grid2D {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}
