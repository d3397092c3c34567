use super::{biot_savart, SpectralField};

/// Vorticity together with its Biot-Savart velocity at time `t`.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub omega: SpectralField,
    pub u1: SpectralField,
    pub u2: SpectralField,
    pub t: f64,
}

impl FlowState {
    /// Builds a state whose velocity is consistent with `omega`.
    pub fn new(omega: SpectralField, t: f64) -> Self {
        let (u1, u2) = biot_savart(&omega);
        FlowState { omega, u1, u2, t }
    }

    /// Largest `|k . u(k)| / |u(k)|` over all modes.
    pub fn divergence_defect(&self) -> f64 {
        let g = self.omega.grid();
        let mut worst: f64 = 0.0;
        for idx in 0..g.len() {
            let (k1, k2) = g.wavevector(idx);
            let a = self.u1.coeffs()[idx];
            let b = self.u2.coeffs()[idx];
            let mag = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if mag == 0.0 {
                continue;
            }
            let kk = k1.hypot(k2).max(1.0);
            worst = worst.max((a * k1 + b * k2).norm() / (kk * mag));
        }
        worst
    }

    /// Largest deviation of `i(k1 u2 - k2 u1)` from the stored vorticity
    /// (mean excluded), relative to the largest vorticity coefficient.
    pub fn curl_defect(&self) -> f64 {
        let c = super::curl(&self.u1, &self.u2);
        let d = &c - &self.omega.clone().without_mean();
        let s = self.omega.max_abs_coeff();
        if s == 0.0 {
            d.max_abs_coeff()
        } else {
            d.max_abs_coeff() / s
        }
    }

    /// Kinetic energy `1/2 ||u||^2`.
    pub fn energy(&self) -> f64 {
        0.5 * (self.u1.l2_norm_sq() + self.u2.l2_norm_sq())
    }

    /// Enstrophy `||omega||^2`.
    pub fn enstrophy(&self) -> f64 {
        self.omega.l2_norm_sq()
    }
}
