use crate::error::{LabError, Result};
use crate::spectral::{
    biot_savart, curl, curl_of_vertical, divergence, leray_project, product, Grid2D, SpectralField,
};

/// Normal-structure Euler-Maxwell state: horizontal `u`, `E` and the
/// vertical magnetic component `b`.
#[derive(Clone, Debug)]
pub struct EMState {
    pub u1: SpectralField,
    pub u2: SpectralField,
    pub e1: SpectralField,
    pub e2: SpectralField,
    pub b: SpectralField,
    pub t: f64,
}

impl EMState {
    pub fn zeros(grid: &Grid2D) -> Self {
        let z = SpectralField::zeros(grid);
        EMState {
            u1: z.clone(),
            u2: z.clone(),
            e1: z.clone(),
            e2: z.clone(),
            b: z,
            t: 0.0,
        }
    }

    /// Velocity from `omega`, `E = 0`.
    pub fn from_vorticity(omega: &SpectralField, b: &SpectralField) -> Self {
        let (u1, u2) = biot_savart(omega);
        EMState {
            e1: SpectralField::zeros(omega.grid()),
            e2: SpectralField::zeros(omega.grid()),
            b: b.clone(),
            u1,
            u2,
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        self.u1.grid()
    }

    pub fn fields(&self) -> [&SpectralField; 5] {
        [&self.u1, &self.u2, &self.e1, &self.e2, &self.b]
    }

    pub fn check(&self) -> Result<()> {
        let g = self.grid();
        for f in self.fields() {
            g.check_same(f.grid())?;
        }
        Ok(())
    }

    /// Relative divergence of `u` and `E`: `||div v|| / (||grad v|| + tiny)`.
    pub fn divergence_violation(&self) -> f64 {
        div_rel(&self.u1, &self.u2).max(div_rel(&self.e1, &self.e2))
    }
}

pub(crate) fn div_rel(a: &SpectralField, b: &SpectralField) -> f64 {
    let d = divergence(a, b).l2_norm();
    let scale = curl(a, b).l2_norm() + d;
    if scale == 0.0 {
        0.0
    } else {
        d / scale
    }
}

/// Incompressible MHD state. The vorticity is carried along with `u` so
/// repeated stepping never round-trips through the curl.
#[derive(Clone, Debug)]
pub struct MHDState {
    pub u1: SpectralField,
    pub u2: SpectralField,
    pub b: SpectralField,
    pub omega: SpectralField,
    pub t: f64,
}

impl MHDState {
    pub fn new(omega: &SpectralField, b: &SpectralField, t: f64) -> Self {
        let (u1, u2) = biot_savart(omega);
        MHDState {
            u1,
            u2,
            b: b.clone(),
            omega: omega.clone(),
            t,
        }
    }

    /// From a divergence-free velocity; the mean of `u` is kept.
    pub fn from_velocity(
        u1: &SpectralField,
        u2: &SpectralField,
        b: &SpectralField,
        t: f64,
    ) -> Self {
        MHDState {
            omega: curl(u1, u2),
            u1: u1.clone(),
            u2: u2.clone(),
            b: b.clone(),
            t,
        }
    }
}

/// `a x B` for horizontal `a` and `B = (0, 0, b)`.
pub fn cross_vertical(
    a1: &SpectralField,
    a2: &SpectralField,
    b: &SpectralField,
) -> Result<(SpectralField, SpectralField)> {
    Ok((product(a2, b)?, -&product(a1, b)?))
}

/// Ohm's law `j = s (c E + P(u x B))`.
pub fn ohm_current(
    state: &EMState,
    config: &super::PlasmaConfig,
) -> Result<(SpectralField, SpectralField)> {
    state.check()?;
    let (x1, x2) = cross_vertical(&state.u1, &state.u2, &state.b)?;
    let (p1, p2) = leray_project(&x1, &x2);
    let (s, c) = (config.sigma, config.c);
    let mut j1 = &state.e1 * (s * c);
    j1.axpy(s, &p1);
    let mut j2 = &state.e2 * (s * c);
    j2.axpy(s, &p2);
    Ok((j1, j2))
}

/// `||u||^2 + ||E||^2 + ||b||^2`.
pub fn em_energy(state: &EMState) -> f64 {
    state.fields().iter().map(|f| f.l2_norm_sq()).sum()
}

/// Curl of the vertical field, `(d2 b, -d1 b)`.
pub fn curl_b(b: &SpectralField) -> (SpectralField, SpectralField) {
    curl_of_vertical(b)
}

pub(crate) fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(LabError::Config(format!("{name} > 0 required, got {v}")))
    }
}
