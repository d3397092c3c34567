use super::{DyadicFrame, LowPass};
use crate::error::{LabError, Result};
use crate::spectral::{lp_norm, sharp_high_pass, sharp_low_pass, sobolev_norm, SpectralField};

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(LabError::UnsupportedExponent(format!(
            "Lebesgue exponent p = {p} must satisfy p >= 1"
        )));
    }
    Ok(())
}

/// Inhomogeneous `B^s_{p,inf}` norm:
/// `max(||S0 f||_p, sup_{j>=0} (theta 2^j)^s ||Delta_j f||_p)`.
pub fn besov_norm(f: &SpectralField, s: f64, p: f64, frame: &DyadicFrame) -> Result<f64> {
    check_p(p)?;
    frame.grid().check_same(f.grid())?;
    let mut best = lp_norm(&frame.low_pass(f, LowPass::S0), p)?;
    for j in frame.j_range() {
        let scale = (frame.theta() * 2f64.powi(j)).powf(s);
        best = best.max(scale * lp_norm(&frame.block(f, j)?, p)?);
    }
    Ok(best)
}

/// Homogeneous `\dot B^s_{p,inf}` norm over every representable block.
pub fn besov_norm_homogeneous(
    f: &SpectralField,
    s: f64,
    p: f64,
    frame: &DyadicFrame,
) -> Result<f64> {
    check_p(p)?;
    frame.grid().check_same(f.grid())?;
    let mut best: f64 = 0.0;
    for j in frame.all_blocks() {
        let scale = (frame.theta() * 2f64.powi(j)).powf(s);
        best = best.max(scale * lp_norm(&frame.block(f, j)?, p)?);
    }
    Ok(best)
}

/// Result of splitting a difference at a sharp cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtrapolationSplit {
    /// `theta^{s1 - s0} ||f - g||_{\dot H^{s0}}`
    pub low_bound: f64,
    /// `||1_{|D| <= theta} (f - g)||_{\dot H^{s1}}`
    pub low_actual: f64,
    /// `||1_{|D| >= theta} f||_{\dot H^{s1}}`
    pub high_norm: f64,
}

impl ExtrapolationSplit {
    /// The low-frequency inequality. Plancherel makes it hold mode by mode,
    /// so only rounding can spoil it.
    pub fn holds(&self) -> bool {
        self.low_actual <= self.low_bound * (1.0 + 4.0 * f64::EPSILON)
    }
}

pub fn extrapolation_split(
    f: &SpectralField,
    g: &SpectralField,
    theta: f64,
    s0: f64,
    s1: f64,
) -> Result<ExtrapolationSplit> {
    if !(s0 < s1) {
        return Err(LabError::Ordering(format!(
            "need s0 < s1, got s0 = {s0}, s1 = {s1}"
        )));
    }
    f.check_grid(g)?;
    let d = f - g;
    Ok(ExtrapolationSplit {
        low_bound: theta.powf(s1 - s0) * sobolev_norm(&d, s0)?,
        low_actual: sobolev_norm(&sharp_low_pass(&d, theta), s1)?,
        high_norm: sobolev_norm(&sharp_high_pass(f, theta), s1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid2D;

    #[test]
    fn zero_field() {
        let g = Grid2D::periodic(32).unwrap();
        let fr = DyadicFrame::new(1.0, &g).unwrap();
        let z = SpectralField::zeros(&g);
        assert_eq!(besov_norm(&z, 0.5, 2.0, &fr).unwrap(), 0.0);
        assert!(besov_norm(&z, 0.5, 0.5, &fr).is_err());
    }

    #[test]
    fn single_mode_on_plateau() {
        // |k| = 6 = 1.5 * theta * 2^j0 with theta = 1, j0 = 2
        let g = Grid2D::periodic(64).unwrap();
        let fr = DyadicFrame::new(1.0, &g).unwrap();
        let f = SpectralField::single_mode(&g, 6, 0, 0.0, 1.0);
        for (s, p) in [(0.5, 2.0), (1.0, f64::INFINITY), (0.25, 1.0)] {
            let got = besov_norm_homogeneous(&f, s, p, &fr).unwrap();
            let want = 4f64.powf(s) * lp_norm(&f, p).unwrap();
            assert!(
                (got - want).abs() <= 1e-12 * want,
                "s={s} p={p}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn split_examples() {
        let g = Grid2D::periodic(32).unwrap();
        let f = SpectralField::single_mode(&g, 2, 0, 1.0, 0.0);
        let z = SpectralField::zeros(&g);
        let sp = extrapolation_split(&f, &z, 4.0, 0.0, 1.0).unwrap();
        let l2 = f.l2_norm();
        assert!((sp.low_actual - 2.0 * l2).abs() < 1e-12);
        assert!((sp.low_bound - 4.0 * l2).abs() < 1e-12);
        assert!(sp.holds());

        let same = extrapolation_split(&f, &f, 4.0, 0.0, 1.0).unwrap();
        assert_eq!(same.low_actual, 0.0);
        assert_eq!(same.low_bound, 0.0);
        assert!(same.holds());

        let high = SpectralField::single_mode(&g, 6, 0, 1.0, 0.0);
        let sp = extrapolation_split(&high, &z, 4.0, 0.0, 1.0).unwrap();
        assert_eq!(sp.low_actual, 0.0);

        assert!(matches!(
            extrapolation_split(&f, &z, 4.0, 1.0, 1.0),
            Err(LabError::Ordering(_))
        ));
    }
}
