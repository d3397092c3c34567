use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::lp::{besov_norm, DyadicFrame};
use crate::spectral::{lp_norm, Grid2D, SpectralField};

/// Initial vorticity families. Mode numbers are lattice integers, so the
/// same description works for any box size.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    /// `amplitude * sin(k0 x1)` with `k0` the fundamental wavenumber.
    Shear { amplitude: f64 },
    /// `2 A sin x1 sin x2` plus `perturbation * (cos(x1 + 2 x2) + sin(2 x1 - x2))`.
    TaylorGreen { amplitude: f64, perturbation: f64 },
    /// Random phases, mode amplitudes `|m|^{-slope/2}` up to `|m| <= k_cap`,
    /// rescaled to sup norm `amplitude`.
    SmoothRandom {
        seed: u64,
        slope: f64,
        k_cap: f64,
        amplitude: f64,
    },
    /// Mollified indicator of the star-shaped domain
    /// `rho < radius (1 + roughness cos(lobes theta))`, transition width
    /// `delta`, mean removed.
    SmoothedPatch {
        center: (f64, f64),
        radius: f64,
        delta: f64,
        roughness: f64,
        lobes: u32,
    },
}

impl InitialData {
    pub fn kind(&self) -> &'static str {
        match self {
            InitialData::Shear { .. } => "shear",
            InitialData::TaylorGreen { .. } => "taylor_green",
            InitialData::SmoothRandom { .. } => "smooth_random",
            InitialData::SmoothedPatch { .. } => "smoothed_patch",
        }
    }
}

/// Builds the (real, mean-free, dealiased) vorticity for `kind` on `grid`.
pub fn make_initial_data(kind: &InitialData, grid: &Grid2D) -> Result<SpectralField> {
    let cfg = |m: String| Err(LabError::Config(m));
    match *kind {
        InitialData::Shear { amplitude } => {
            Ok(SpectralField::single_mode(grid, 1, 0, 0.0, amplitude))
        }
        InitialData::TaylorGreen {
            amplitude,
            perturbation,
        } => {
            // 2 sin x1 sin x2 = cos(x1 - x2) - cos(x1 + x2)
            let mut w = SpectralField::zeros(grid);
            w.add_mode(1, -1, amplitude, 0.0);
            w.add_mode(1, 1, -amplitude, 0.0);
            w.add_mode(1, 2, perturbation, 0.0);
            w.add_mode(2, -1, 0.0, perturbation);
            Ok(w)
        }
        InitialData::SmoothRandom {
            seed,
            slope,
            k_cap,
            amplitude,
        } => {
            if !(k_cap >= 1.0) {
                return cfg(format!("k_cap >= 1 required, got {k_cap}"));
            }
            if k_cap > grid.dealias_mode() as f64 {
                return Err(LabError::Resolution(format!(
                    "k_cap = {k_cap} exceeds the dealiased band |m| <= {}",
                    grid.dealias_mode()
                )));
            }
            let kf = grid.k_fundamental();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = SpectralField::random(grid, &mut rng, |k| {
                let m = k / kf;
                if m <= k_cap + 1e-9 {
                    m.powf(-0.5 * slope)
                } else {
                    0.0
                }
            });
            let sup = lp_norm(&w, f64::INFINITY)?;
            Ok(&w * (amplitude / sup))
        }
        InitialData::SmoothedPatch {
            center,
            radius,
            delta,
            roughness,
            lobes,
        } => {
            let l = grid.l();
            if delta < grid.dx() {
                return Err(LabError::Resolution(format!(
                    "mollification scale {delta} is below the grid spacing {}",
                    grid.dx()
                )));
            }
            if !(radius > 0.0) || !(roughness.abs() < 1.0) {
                return cfg("patch needs radius > 0 and |roughness| < 1".into());
            }
            if radius * (1.0 + roughness.abs()) + 4.0 * delta >= 0.5 * l {
                return cfg("patch does not fit in the periodic box".into());
            }
            let wrap = |d: f64| d - l * (d / l).round();
            let w = SpectralField::from_fn(grid, |x, y| {
                let (dx, dy) = (wrap(x - center.0), wrap(y - center.1));
                let rho = dx.hypot(dy);
                let th = dy.atan2(dx);
                let edge = radius * (1.0 + roughness * (lobes as f64 * th).cos());
                0.5 * (1.0 + ((edge - rho) / delta).tanh())
            });
            Ok(w.dealiased().without_mean())
        }
    }
}

/// Measured regularity of an initial field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialReport {
    pub linf: f64,
    pub s: f64,
    pub p: f64,
    pub besov_2: f64,
    pub besov_p: f64,
}

/// Sup norm and `B^s_{2,inf}`, `B^s_{p,inf}` norms (unit frame) of `omega`.
pub fn describe_initial_data(omega: &SpectralField, s: f64, p: f64) -> Result<InitialReport> {
    let frame = DyadicFrame::new(1.0, omega.grid())?;
    Ok(InitialReport {
        linf: lp_norm(omega, f64::INFINITY)?,
        s,
        p,
        besov_2: besov_norm(omega, s, 2.0, &frame)?,
        besov_p: besov_norm(omega, s, p, &frame)?,
    })
}
