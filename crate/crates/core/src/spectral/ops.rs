use rustfft::num_complex::Complex64;

use super::{Grid2D, RealField, SpectralField};
use crate::error::{LabError, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Applies `m(k1, k2)` coefficientwise without checking symmetry. The
/// Nyquist line is zeroed.
pub(crate) fn apply_symbol(f: &SpectralField, m: impl Fn(f64, f64) -> Complex64) -> SpectralField {
    let g = f.grid();
    let coeffs = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            if g.touches_nyquist(idx) {
                ZERO
            } else {
                let (k1, k2) = g.wavevector(idx);
                c * m(k1, k2)
            }
        })
        .collect();
    SpectralField::from_coeffs(g, coeffs)
}

/// Applies a real radial profile `m(|k|)`.
pub fn apply_radial(f: &SpectralField, m: impl Fn(f64) -> f64) -> SpectralField {
    apply_symbol(f, |k1, k2| Complex64::new(m(k1.hypot(k2)), 0.0))
}

/// `m(D) f = F^{-1}(m(k) F f)` for a real symbol that must be even under
/// `k -> -k`, otherwise the output would not represent a real field.
pub fn fourier_multiplier(f: &SpectralField, m: impl Fn(f64, f64) -> f64) -> Result<SpectralField> {
    let g = f.grid();
    for idx in 0..g.len() {
        if g.touches_nyquist(idx) {
            continue;
        }
        let (k1, k2) = g.wavevector(idx);
        let a = m(k1, k2);
        let b = m(-k1, -k2);
        if !a.is_finite() {
            return Err(LabError::Config(format!(
                "symbol is not finite at k = ({k1}, {k2})"
            )));
        }
        if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
            return Err(LabError::RealnessViolation { k1, k2 });
        }
    }
    Ok(apply_symbol(f, |k1, k2| Complex64::new(m(k1, k2), 0.0)))
}

/// Partial derivative along axis 0 (`x1`) or 1 (`x2`).
pub fn derivative(f: &SpectralField, axis: usize) -> SpectralField {
    if axis == 0 {
        apply_symbol(f, |k1, _| I * k1)
    } else {
        apply_symbol(f, |_, k2| I * k2)
    }
}

pub fn laplacian(f: &SpectralField) -> SpectralField {
    apply_symbol(f, |k1, k2| Complex64::new(-(k1 * k1 + k2 * k2), 0.0))
}

/// Stream function `Delta^{-1} omega` with the mean dropped.
pub fn stream_function(omega: &SpectralField) -> SpectralField {
    apply_symbol(omega, |k1, k2| {
        let k2s = k1 * k1 + k2 * k2;
        if k2s == 0.0 {
            ZERO
        } else {
            Complex64::new(-1.0 / k2s, 0.0)
        }
    })
}

/// `u = grad^perp Delta^{-1} omega = (-d2 psi, d1 psi)`; the mean of
/// `omega` has no periodic inverse and is dropped.
pub fn biot_savart(omega: &SpectralField) -> (SpectralField, SpectralField) {
    let u1 = apply_symbol(omega, |k1, k2| {
        let k2s = k1 * k1 + k2 * k2;
        if k2s == 0.0 {
            ZERO
        } else {
            I * (k2 / k2s)
        }
    });
    let u2 = apply_symbol(omega, |k1, k2| {
        let k2s = k1 * k1 + k2 * k2;
        if k2s == 0.0 {
            ZERO
        } else {
            -I * (k1 / k2s)
        }
    });
    (u1, u2)
}

/// Scalar curl `d1 v2 - d2 v1`.
pub fn curl(v1: &SpectralField, v2: &SpectralField) -> SpectralField {
    let g = v1.grid();
    let coeffs = (0..g.len())
        .map(|idx| {
            if g.touches_nyquist(idx) {
                return ZERO;
            }
            let (k1, k2) = g.wavevector(idx);
            I * (v2.coeffs()[idx] * k1 - v1.coeffs()[idx] * k2)
        })
        .collect();
    SpectralField::from_coeffs(g, coeffs)
}

pub fn divergence(v1: &SpectralField, v2: &SpectralField) -> SpectralField {
    let g = v1.grid();
    let coeffs = (0..g.len())
        .map(|idx| {
            if g.touches_nyquist(idx) {
                return ZERO;
            }
            let (k1, k2) = g.wavevector(idx);
            I * (v1.coeffs()[idx] * k1 + v2.coeffs()[idx] * k2)
        })
        .collect();
    SpectralField::from_coeffs(g, coeffs)
}

/// Perpendicular gradient of a scalar, `(d2 b, -d1 b)`: the horizontal
/// curl of the vertical field `(0, 0, b)`.
pub fn curl_of_vertical(b: &SpectralField) -> (SpectralField, SpectralField) {
    (derivative(b, 1), &derivative(b, 0) * -1.0)
}

/// Leray projection onto divergence-free fields. `k = 0` passes through.
pub fn leray_project(v1: &SpectralField, v2: &SpectralField) -> (SpectralField, SpectralField) {
    let g = v1.grid();
    let mut w1 = vec![ZERO; g.len()];
    let mut w2 = vec![ZERO; g.len()];
    for idx in 0..g.len() {
        if g.touches_nyquist(idx) {
            continue;
        }
        let (k1, k2) = g.wavevector(idx);
        let a = v1.coeffs()[idx];
        let b = v2.coeffs()[idx];
        let k2s = k1 * k1 + k2 * k2;
        if k2s == 0.0 {
            w1[idx] = a;
            w2[idx] = b;
            continue;
        }
        let kv = (a * k1 + b * k2) / k2s;
        w1[idx] = a - kv * k1;
        w2[idx] = b - kv * k2;
    }
    (
        SpectralField::from_coeffs(g, w1),
        SpectralField::from_coeffs(g, w2),
    )
}

/// Dealiased pseudospectral product of two fields.
pub fn product(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    a.check_grid(b)?;
    let (ra, rb) = SpectralField::to_real_pair(a, b);
    Ok(ra.mul(&rb).to_spectral().dealiased())
}

/// Dealiased `u . grad f`.
pub fn advect(u1: &SpectralField, u2: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    u1.check_grid(u2)?;
    u1.check_grid(f)?;
    let (d1, d2) = (derivative(f, 0), derivative(f, 1));
    Ok(advect_with_gradient(u1, u2, &d1, &d2))
}

/// `u . grad f` with the gradient already in hand.
pub(crate) fn advect_with_gradient(
    u1: &SpectralField,
    u2: &SpectralField,
    d1: &SpectralField,
    d2: &SpectralField,
) -> SpectralField {
    let (ru1, ru2) = SpectralField::to_real_pair(u1, u2);
    let (rd1, rd2) = SpectralField::to_real_pair(d1, d2);
    let vals = ru1
        .values()
        .iter()
        .zip(ru2.values())
        .zip(rd1.values().iter().zip(rd2.values()))
        .map(|((a1, a2), (g1, g2))| a1 * g1 + a2 * g2)
        .collect();
    RealField::from_values(u1.grid(), vals)
        .to_spectral()
        .dealiased()
}

/// Homogeneous Sobolev norm `|| |D|^s f ||_{L^2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> Result<f64> {
    if !(s > -1.0) {
        return Err(LabError::UnsupportedExponent(format!(
            "Sobolev exponent s = {s} must satisfy s > -1"
        )));
    }
    let g = f.grid();
    if s < 0.0 && f.coeffs()[0].norm() > 1e-12 * f.max_abs_coeff().max(f64::MIN_POSITIVE) {
        return Err(LabError::UnsupportedExponent(format!(
            "negative exponent s = {s} requires a mean-free field"
        )));
    }
    let mut acc = 0.0;
    for (idx, c) in f.coeffs().iter().enumerate() {
        let (k1, k2) = g.wavevector(idx);
        let k2s = k1 * k1 + k2 * k2;
        let w = if k2s == 0.0 {
            if s == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            k2s.powf(s)
        };
        acc += w * c.norm_sqr();
    }
    Ok(g.l() * (acc).sqrt())
}

/// Full `H^s` norm `(||f||^2 + ||f||_{\dot H^s}^2)^{1/2}` for `s >= 0`.
pub fn inhomogeneous_sobolev_norm(f: &SpectralField, s: f64) -> Result<f64> {
    let h = sobolev_norm(f, s)?;
    Ok((f.l2_norm_sq() + h * h).sqrt())
}

/// `L^p` norm of grid samples with equal-weight quadrature; `p = inf` is the
/// grid maximum of `|f|`.
pub fn lp_norm_real(f: &RealField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(LabError::UnsupportedExponent(format!(
            "Lebesgue exponent p = {p} must satisfy p >= 1"
        )));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let area = f.grid().cell_area();
    let m = f.max_abs();
    if m == 0.0 {
        return Ok(0.0);
    }
    // scale by the maximum so large p cannot overflow
    let sum: f64 = f.values().iter().map(|v| (v.abs() / m).powf(p)).sum();
    Ok(m * (sum * area).powf(1.0 / p))
}

pub fn lp_norm(f: &SpectralField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(LabError::UnsupportedExponent(format!(
            "Lebesgue exponent p = {p} must satisfy p >= 1"
        )));
    }
    lp_norm_real(&f.to_real(), p)
}

/// Sharp Fourier cutoffs, used by the extrapolation split.
pub fn sharp_low_pass(f: &SpectralField, theta: f64) -> SpectralField {
    apply_radial(f, |k| if k <= theta { 1.0 } else { 0.0 })
}

pub fn sharp_high_pass(f: &SpectralField, theta: f64) -> SpectralField {
    apply_radial(f, |k| if k >= theta { 1.0 } else { 0.0 })
}

/// Strict variant `1_{|D| > theta}`.
pub fn sharp_high_pass_strict(f: &SpectralField, theta: f64) -> SpectralField {
    apply_radial(f, |k| if k > theta { 1.0 } else { 0.0 })
}

/// Extracts the coefficient of `exp(i k.x)` for integer modes.
pub fn coefficient(f: &SpectralField, m1: i64, m2: i64) -> Complex64 {
    let n = f.grid().n() as i64;
    let wrap = |m: i64| (((m % n) + n) % n) as usize;
    f.coeffs()[wrap(m2) * n as usize + wrap(m1)]
}

/// Convenience: grid of the first field after checking all others match.
pub fn common_grid<'a>(fields: &[&'a SpectralField]) -> Result<&'a Grid2D> {
    let g = fields[0].grid();
    for f in &fields[1..] {
        g.check_same(f.grid())?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::periodic(32).unwrap()
    }

    fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        (a - b).max_abs_coeff()
    }

    #[test]
    fn biot_savart_zero() {
        let g = grid();
        let (u1, u2) = biot_savart(&SpectralField::zeros(&g));
        assert_eq!(u1.max_abs_coeff(), 0.0);
        assert_eq!(u2.max_abs_coeff(), 0.0);
    }

    #[test]
    fn biot_savart_single_modes() {
        let g = grid();
        let w = SpectralField::from_fn(&g, |x, _| x.sin());
        let (u1, u2) = biot_savart(&w);
        assert!(u1.max_abs_coeff() < 1e-15);
        assert!(max_diff(&u2, &SpectralField::from_fn(&g, |x, _| -x.cos())) < 1e-15);
        assert!(max_diff(&curl(&u1, &u2), &w) < 1e-15);

        let w = SpectralField::from_fn(&g, |_, y| y.cos());
        let (u1, u2) = biot_savart(&w);
        assert!(max_diff(&u1, &SpectralField::from_fn(&g, |_, y| -y.sin())) < 1e-15);
        assert!(u2.max_abs_coeff() < 1e-15);
    }

    #[test]
    fn biot_savart_drops_mean() {
        let g = grid();
        let mut w = SpectralField::from_fn(&g, |x, y| (x + 2.0 * y).sin());
        w.coeffs_mut()[0] = Complex64::new(3.0, 0.0);
        let (u1, u2) = biot_savart(&w);
        assert_eq!(u1.coeffs()[0], ZERO);
        let back = curl(&u1, &u2);
        assert!(max_diff(&back, &w.clone().without_mean()) < 1e-14);
    }

    #[test]
    fn leray_examples() {
        let g = grid();
        let v1 = SpectralField::zeros(&g);
        let v2 = SpectralField::from_fn(&g, |x, _| x.cos());
        let (w1, w2) = leray_project(&v1, &v2);
        assert!(max_diff(&w1, &v1) < 1e-15 && max_diff(&w2, &v2) < 1e-15);

        let v2 = SpectralField::from_fn(&g, |_, y| -y.sin());
        let (w1, w2) = leray_project(&SpectralField::zeros(&g), &v2);
        assert!(w1.max_abs_coeff() < 1e-15 && w2.max_abs_coeff() < 1e-15);

        let v1 = SpectralField::from_fn(&g, |_, y| y.sin());
        let (w1, w2) = leray_project(&v1, &v2);
        assert!(max_diff(&w1, &v1) < 1e-15);
        assert!(w2.max_abs_coeff() < 1e-15);
    }

    #[test]
    fn leray_keeps_mean() {
        let g = grid();
        let v1 = SpectralField::constant(&g, 2.0);
        let v2 = SpectralField::constant(&g, -1.0);
        let (w1, w2) = leray_project(&v1, &v2);
        assert_eq!(w1.mean(), 2.0);
        assert_eq!(w2.mean(), -1.0);
    }

    #[test]
    fn advect_examples() {
        let g = grid();
        let (u1, u2) = biot_savart(&SpectralField::from_fn(&g, |x, _| x.sin()));
        let f = SpectralField::constant(&g, 4.0);
        assert!(advect(&u1, &u2, &f).unwrap().max_abs_coeff() < 1e-15);

        let f = SpectralField::from_fn(&g, |x, _| x.sin());
        assert!(advect(&u1, &u2, &f).unwrap().max_abs_coeff() < 1e-15);

        let one = SpectralField::constant(&g, 1.0);
        let zero = SpectralField::zeros(&g);
        let a = advect(&one, &zero, &f).unwrap();
        assert!(max_diff(&a, &SpectralField::from_fn(&g, |x, _| x.cos())) < 1e-14);
    }

    #[test]
    fn advect_rejects_grid_mismatch() {
        let g = grid();
        let h = Grid2D::periodic(16).unwrap();
        let z = SpectralField::zeros(&g);
        let e = advect(&z, &z, &SpectralField::zeros(&h));
        assert!(matches!(e, Err(LabError::GridMismatch(_))));
    }

    #[test]
    fn multiplier_examples() {
        let g = grid();
        let f = SpectralField::from_fn(&g, |x, _| x.sin());
        let same = fourier_multiplier(&f, |_, _| 1.0).unwrap();
        assert!(max_diff(&same, &f) < 1e-15);
        let two = SpectralField::from_fn(&g, |x, _| (2.0 * x).sin());
        let cut =
            fourier_multiplier(&two, |a, b| if a.hypot(b) <= 1.0 { 1.0 } else { 0.0 }).unwrap();
        assert!(cut.max_abs_coeff() < 1e-15);
        let riesz = fourier_multiplier(&f, |a, b| a.hypot(b)).unwrap();
        assert!(max_diff(&riesz, &f) < 1e-15);
    }

    #[test]
    fn multiplier_rejects_odd_symbol() {
        let g = grid();
        let f = SpectralField::from_fn(&g, |x, _| x.sin());
        assert!(matches!(
            fourier_multiplier(&f, |k1, _| k1),
            Err(LabError::RealnessViolation { .. })
        ));
    }

    #[test]
    fn sobolev_examples() {
        let g = grid();
        assert_eq!(sobolev_norm(&SpectralField::zeros(&g), 0.0).unwrap(), 0.0);
        let f = SpectralField::from_fn(&g, |x, _| x.sin());
        let expect = PI * 2f64.sqrt();
        for s in [0.0, 0.5, 1.0, 2.5, -0.5] {
            assert!((sobolev_norm(&f, s).unwrap() - expect).abs() < 1e-12);
        }
        assert!(sobolev_norm(&f, -1.0).is_err());
        let c = SpectralField::constant(&g, 1.0);
        assert!(sobolev_norm(&c, -0.5).is_err());
    }

    #[test]
    fn lp_examples() {
        let g = grid();
        let one = SpectralField::constant(&g, 1.0);
        assert!((lp_norm(&one, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        let f = SpectralField::from_fn(&g, |x, _| x.sin());
        let l2 = lp_norm(&f, 2.0).unwrap();
        assert!((l2 - sobolev_norm(&f, 0.0).unwrap()).abs() < 1e-12);
        let linf = lp_norm(&f, f64::INFINITY).unwrap();
        assert!((linf - 1.0).abs() < 1.0 / 32.0);
        assert!(lp_norm(&f, 0.5).is_err());
        // constant 1 on [0, 2pi)^2 has L^1 norm 4 pi^2
        assert!((lp_norm(&one, 1.0).unwrap() - 4.0 * PI * PI).abs() < 1e-10);
    }
}
