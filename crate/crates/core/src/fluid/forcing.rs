use std::fmt;
use std::sync::Arc;

use crate::spectral::{advect, biot_savart, curl, laplacian, Grid2D, SpectralField};

/// Source term of the vorticity equation. Implementations return the
/// dealiased `curl g` at time `t`.
pub trait Forcing: Send + Sync + fmt::Debug {
    fn curl_g(&self, t: f64, grid: &Grid2D) -> SpectralField;
}

/// Closed-form `curl g(t, x1, x2)` sampled on the grid.
pub struct VorticityForcing<F>(pub F);

impl<F> fmt::Debug for VorticityForcing<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("VorticityForcing")
    }
}

impl<F> Forcing for VorticityForcing<F>
where
    F: Fn(f64, f64, f64) -> f64 + Send + Sync,
{
    fn curl_g(&self, t: f64, grid: &Grid2D) -> SpectralField {
        SpectralField::from_fn(grid, |x, y| (self.0)(t, x, y)).dealiased()
    }
}

/// Closed-form velocity forcing `g(t, x1, x2)`; its curl is taken
/// spectrally, so any gradient part drops out.
pub struct VelocityForcing<F>(pub F);

impl<F> fmt::Debug for VelocityForcing<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("VelocityForcing")
    }
}

impl<F> Forcing for VelocityForcing<F>
where
    F: Fn(f64, f64, f64) -> (f64, f64) + Send + Sync,
{
    fn curl_g(&self, t: f64, grid: &Grid2D) -> SpectralField {
        let g1 = SpectralField::from_fn(grid, |x, y| (self.0)(t, x, y).0);
        let g2 = SpectralField::from_fn(grid, |x, y| (self.0)(t, x, y).1);
        curl(&g1, &g2).dealiased()
    }
}

/// Weighted sum of forcings, `sum_i w_i g_i`.
#[derive(Clone, Debug, Default)]
pub struct SumForcing(pub Vec<(f64, Arc<dyn Forcing>)>);

impl Forcing for SumForcing {
    fn curl_g(&self, t: f64, grid: &Grid2D) -> SpectralField {
        let mut acc = SpectralField::zeros(grid);
        for (w, g) in &self.0 {
            acc.axpy(*w, &g.curl_g(t, grid));
        }
        acc
    }
}

/// Manufactured exact solution
///
/// `w*(t) = e^{-t} sin x1 cos x2 + 1/2 cos t cos(x1 + 2 x2) + 1/4 e^{-t/2} sin(3 x2)`
///
/// in lattice modes, together with the forcing that makes it solve the
/// vorticity equation with viscosity `nu`. The three modes sit on
/// different shells so the nonlinearity does not vanish.
#[derive(Clone, Copy, Debug)]
pub struct Manufactured {
    pub viscosity: f64,
}

impl Manufactured {
    pub fn omega(&self, t: f64, grid: &Grid2D) -> SpectralField {
        let mut w = SpectralField::zeros(grid);
        let e = (-t).exp();
        // sin x1 cos x2 = 1/2 (sin(x1 + x2) + sin(x1 - x2))
        w.add_mode(1, 1, 0.0, 0.5 * e);
        w.add_mode(1, -1, 0.0, 0.5 * e);
        w.add_mode(1, 2, 0.5 * t.cos(), 0.0);
        w.add_mode(0, 3, 0.0, 0.25 * (-0.5 * t).exp());
        w
    }

    fn omega_dot(&self, t: f64, grid: &Grid2D) -> SpectralField {
        let mut w = SpectralField::zeros(grid);
        let e = (-t).exp();
        w.add_mode(1, 1, 0.0, -0.5 * e);
        w.add_mode(1, -1, 0.0, -0.5 * e);
        w.add_mode(1, 2, -0.5 * t.sin(), 0.0);
        w.add_mode(0, 3, 0.0, -0.125 * (-0.5 * t).exp());
        w
    }
}

impl Forcing for Manufactured {
    fn curl_g(&self, t: f64, grid: &Grid2D) -> SpectralField {
        let w = self.omega(t, grid);
        let (u1, u2) = biot_savart(&w);
        let mut g = self.omega_dot(t, grid);
        g = &g + &advect(&u1, &u2, &w).expect("same grid");
        g.axpy(-self.viscosity, &laplacian(&w));
        g
    }
}
