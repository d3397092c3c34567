use std::ops::RangeInclusive;

use super::profile::{phi, psi};
use crate::error::{LabError, Result};
use crate::spectral::{apply_radial, Grid2D, SpectralField};

/// Which low-frequency multiplier `low_pass` applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowPass {
    /// `psi(D / theta)`
    S0,
    /// `sqrt(psi(D / theta))`
    SqrtS0,
    /// `sqrt(1 - psi(D / theta))`
    SqrtIdMinusS0,
}

/// Dyadic frame at cutoff scale `theta` on a particular grid.
///
/// Blocks `j < j_max` use `phi(2^-j |k| / theta)`. The top block `j_max`
/// absorbs everything above it, `1 - psi(2^-j_max |k| / theta)`, so that
/// `S0 + sum_{j >= 0} Delta_j = Id` holds exactly at every grid mode. On the
/// dealiased band the top block coincides with its annulus profile.
/// Negative indices are the sub-cutoff blocks, which sum to `S0` away from
/// `k = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicFrame {
    theta: f64,
    grid: Grid2D,
    j_low: i32,
    j_max: i32,
}

impl DyadicFrame {
    pub fn new(theta: f64, grid: &Grid2D) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(LabError::Config(format!(
                "frame scale theta = {theta} must be > 0"
            )));
        }
        let cut = grid.dealias_cutoff();
        if 0.75 * theta > cut {
            return Err(LabError::DegenerateFrame(format!(
                "theta = {theta}: no dyadic annulus starts below the dealiasing cutoff {cut:.4}"
            )));
        }
        let mut j_max = 0;
        while 0.75 * theta * 2f64.powi(j_max + 1) <= cut {
            j_max += 1;
        }
        // lowest block whose annulus reaches the fundamental wavenumber,
        // minus one so that neighbour identities can be checked there too
        let kf = grid.k_fundamental();
        let mut j_low = 0;
        while theta * 2f64.powi(j_low - 1) * 8.0 / 3.0 > kf {
            j_low -= 1;
        }
        Ok(DyadicFrame {
            theta,
            grid: grid.clone(),
            j_low: j_low - 1,
            j_max,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// High-frequency block indices `0..=j_max`.
    pub fn j_range(&self) -> RangeInclusive<i32> {
        0..=self.j_max
    }

    /// Every block index the frame accepts, including the sub-cutoff ones.
    pub fn all_blocks(&self) -> RangeInclusive<i32> {
        self.j_low..=self.j_max
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Low-pass profile value at wavenumber magnitude `k`.
    pub fn psi_at(&self, k: f64) -> f64 {
        psi(k / self.theta)
    }

    /// Profile of block `j` at wavenumber magnitude `k` (no range check).
    pub fn block_profile(&self, j: i32, k: f64) -> f64 {
        let r = k / (self.theta * 2f64.powi(j));
        if j == self.j_max {
            1.0 - psi(r)
        } else {
            phi(r)
        }
    }

    fn check(&self, j: i32) -> Result<()> {
        if j < self.j_low || j > self.j_max {
            return Err(LabError::Index {
                j,
                lo: self.j_low,
                hi: self.j_max,
            });
        }
        Ok(())
    }

    /// `Delta_j f`.
    pub fn block(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check(j)?;
        self.grid.check_same(f.grid())?;
        Ok(apply_radial(f, |k| self.block_profile(j, k)))
    }

    /// `sum_{j in range} Delta_j f` applied as a single multiplier.
    pub fn block_sum(
        &self,
        f: &SpectralField,
        range: RangeInclusive<i32>,
    ) -> Result<SpectralField> {
        self.check(*range.start())?;
        self.check(*range.end())?;
        Ok(apply_radial(f, |k| {
            range.clone().map(|j| self.block_profile(j, k)).sum()
        }))
    }

    pub fn low_pass(&self, f: &SpectralField, variant: LowPass) -> SpectralField {
        match variant {
            LowPass::S0 => apply_radial(f, |k| self.psi_at(k)),
            LowPass::SqrtS0 => apply_radial(f, |k| self.psi_at(k).sqrt()),
            LowPass::SqrtIdMinusS0 => apply_radial(f, |k| (1.0 - self.psi_at(k)).sqrt()),
        }
    }

    /// `(Id - S0) f`.
    pub fn high_pass(&self, f: &SpectralField) -> SpectralField {
        apply_radial(f, |k| 1.0 - self.psi_at(k))
    }

    /// Largest deviation of `psi + sum_{j>=0} phi_j` from one over all grid
    /// wavenumbers.
    pub fn partition_residual(&self) -> f64 {
        let g = &self.grid;
        let mut worst: f64 = 0.0;
        for idx in 0..g.len() {
            let (k1, k2) = g.wavevector(idx);
            let k = k1.hypot(k2);
            let s: f64 = self.psi_at(k)
                + self
                    .j_range()
                    .map(|j| self.block_profile(j, k))
                    .sum::<f64>();
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }

    pub fn decompose(&self, f: &SpectralField) -> Result<BlockDecomposition> {
        let low = self.low_pass(f, LowPass::S0);
        let blocks = self
            .j_range()
            .map(|j| Ok((j, self.block(f, j)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockDecomposition {
            frame: self.clone(),
            low,
            blocks,
        })
    }
}

/// `S0 f` together with every high block `Delta_j f`, `j >= 0`.
#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub frame: DyadicFrame,
    pub low: SpectralField,
    pub blocks: Vec<(i32, SpectralField)>,
}

impl BlockDecomposition {
    pub fn reconstruct(&self) -> SpectralField {
        let mut out = self.low.clone();
        for (_, b) in &self.blocks {
            out.axpy(1.0, b);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::sobolev_norm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_frame_partition() {
        let g = Grid2D::periodic(64).unwrap();
        let f = DyadicFrame::new(1.0, &g).unwrap();
        assert!(f.partition_residual() <= 1e-12);
    }

    #[test]
    fn s0_fixes_unit_modes() {
        let g = Grid2D::periodic(64).unwrap();
        let f = DyadicFrame::new(1.0, &g).unwrap();
        let w = &SpectralField::single_mode(&g, 1, 0, 0.0, 1.0)
            + &SpectralField::single_mode(&g, 0, 1, 0.5, 0.0);
        let s0 = f.low_pass(&w, LowPass::S0);
        assert!((&s0 - &w).max_abs_coeff() < 1e-15);
        assert!(f.low_pass(&w, LowPass::SqrtIdMinusS0).max_abs_coeff() == 0.0);
    }

    #[test]
    fn theta_eight_on_n64() {
        let g = Grid2D::periodic(64).unwrap();
        let f = DyadicFrame::new(8.0, &g).unwrap();
        assert_eq!(f.j_range(), 0..=1);
        assert!(matches!(
            DyadicFrame::new(30.0, &g),
            Err(LabError::DegenerateFrame(_))
        ));
        assert!(DyadicFrame::new(0.0, &g).is_err());
    }

    #[test]
    fn block_index_errors() {
        let g = Grid2D::periodic(32).unwrap();
        let f = DyadicFrame::new(1.0, &g).unwrap();
        let w = SpectralField::zeros(&g);
        assert!(f.block(&w, f.j_max() + 1).is_err());
        assert!(f.block(&w, *f.all_blocks().start() - 1).is_err());
        assert_eq!(f.block(&w, 0).unwrap().max_abs_coeff(), 0.0);
    }

    #[test]
    fn block_is_identity_on_plateau() {
        let g = Grid2D::periodic(64).unwrap();
        let f = DyadicFrame::new(2.0, &g).unwrap();
        // |k| = 1.5 * theta * 2^j sits where phi_j == 1 (j = 1 -> 6)
        let w = SpectralField::single_mode(&g, 6, 0, 0.0, 1.0);
        let b = f.block(&w, 1).unwrap();
        assert!((&b - &w).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn m1_and_energy_split() {
        let g = Grid2D::periodic(32).unwrap();
        let f = DyadicFrame::new(3.0, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let w = SpectralField::random(&g, &mut rng, |k| 1.0 / (1.0 + k));
            let hp = f.high_pass(&w).l2_norm();
            let sq = f.low_pass(&w, LowPass::SqrtIdMinusS0).l2_norm();
            assert!(hp <= sq * (1.0 + 1e-14));
            let a = f.low_pass(&w, LowPass::SqrtS0).l2_norm_sq();
            let total = sobolev_norm(&w, 0.0).unwrap().powi(2);
            assert!(((a + sq * sq) - total).abs() <= 1e-12 * total);
        }
    }
}
