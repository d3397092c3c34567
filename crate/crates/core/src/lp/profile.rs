//! Radial bump profiles for the dyadic partition of unity.

/// `exp(-1/t)` for `t > 0`, zero otherwise.
fn flat(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// C-infinity step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = flat(t);
        a / (a + flat(1.0 - t))
    }
}

/// Low-frequency profile: 1 on `r <= 1`, 0 on `r >= 4/3`.
pub fn psi(r: f64) -> f64 {
    smooth_step(4.0 - 3.0 * r)
}

/// Annulus profile `psi(r/2) - psi(r)`, supported in `[1, 8/3]` and equal to
/// one on `[4/3, 2]`.
pub fn phi(r: f64) -> f64 {
    psi(0.5 * r) - psi(r)
}
