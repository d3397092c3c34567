use super::fit::{fit_rate, RateFit, RateModel};
use super::study::{advance_all, tag, velocity_errors, Member, RateStudyConfig, StudyKind};
use crate::error::{LabError, Result};
use crate::fluid::{make_initial_data, solve_with, InitialData};
use crate::lp::{besov_norm, DyadicFrame};
use crate::spectral::{Grid2D, SpectralField};

/// Reference runs use this many substeps per nominal step.
const REFERENCE_REFINEMENT: usize = 4;
/// Self-convergence must sit this far below every measured error.
const FLOOR_MARGIN: f64 = 10.0;
/// Relative agreement demanded between the `N` and `2N` Besov norms.
const REGULARITY_TOLERANCE: f64 = 0.1;
const REGULARITY_STEP: f64 = 0.05;
const REGULARITY_MAX: f64 = 3.0;

/// One viscous run measured against the Euler reference.
#[derive(Clone, Debug, PartialEq)]
pub struct InviscidRun {
    pub eps: f64,
    pub sup_l2: f64,
    pub sup_h1dot: f64,
    /// `(t, ||du||_{L^2}, ||du||_{H^1 dot}, B^s_{2,inf}, B^s_{p,inf})`
    pub curve: Vec<[f64; 5]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InviscidReport {
    pub runs: Vec<InviscidRun>,
    pub fit_l2: RateFit,
    pub fit_h1_pure: RateFit,
    pub fit_h1_log: RateFit,
    /// measured regularity of the reference vorticity at `T`
    pub s_t: f64,
    /// `(s, B^s_{2,inf} at N, at 2N)`
    pub regularity_scan: Vec<[f64; 3]>,
    /// `alpha_hat s_T / (1 + s_T)`
    pub predicted_h1_exponent: f64,
    pub floor_l2: f64,
    pub floor_h1dot: f64,
}

/// The same initial data one refinement level up; a mollified patch keeps
/// its transition layer at the same number of grid cells.
pub fn refined_data(kind: &InitialData) -> InitialData {
    match kind {
        InitialData::SmoothedPatch {
            center,
            radius,
            delta,
            roughness,
            lobes,
        } => InitialData::SmoothedPatch {
            center: *center,
            radius: *radius,
            delta: 0.5 * delta,
            roughness: *roughness,
            lobes: *lobes,
        },
        other => other.clone(),
    }
}

/// Largest `s` (on a fixed ladder) such that `B^s_{2,inf}` of `coarse` and
/// `fine` agree within 10% for every rung up to `s`.
pub fn measure_regularity(
    coarse: &SpectralField,
    fine: &SpectralField,
) -> Result<(f64, Vec<[f64; 3]>)> {
    let fc = DyadicFrame::new(1.0, coarse.grid())?;
    let ff = DyadicFrame::new(1.0, fine.grid())?;
    let mut scan = Vec::new();
    let mut s_t = 0.0;
    let mut stable = true;
    let steps = (REGULARITY_MAX / REGULARITY_STEP).round() as usize;
    for i in 1..=steps {
        let s = i as f64 * REGULARITY_STEP;
        let a = besov_norm(coarse, s, 2.0, &fc)?;
        let b = besov_norm(fine, s, 2.0, &ff)?;
        scan.push([s, a, b]);
        stable &= (a - b).abs() <= REGULARITY_TOLERANCE * b.abs().max(f64::MIN_POSITIVE);
        if stable {
            s_t = s;
        }
    }
    Ok((s_t, scan))
}

/// Navier-Stokes runs over the viscosity sweep against an Euler reference
/// at a quarter of the time step, with a self-convergence floor check and
/// a measurement of the reference regularity at `T`.
pub fn run_inviscid_study(config: &RateStudyConfig) -> Result<InviscidReport> {
    config.validate(StudyKind::Inviscid)?;
    let (runs, floor, w_ref) = inviscid_runs(config, &config.sweep)?;
    let smallest = runs.iter().fold(f64::INFINITY, |m, r| m.min(r.sup_l2));
    let smallest_h1 = runs.iter().fold(f64::INFINITY, |m, r| m.min(r.sup_h1dot));
    if FLOOR_MARGIN * floor.0 > smallest || FLOOR_MARGIN * floor.1 > smallest_h1 {
        return Err(LabError::Resolution(format!(
            "reference self-convergence ({:.3e}, {:.3e}) is not {FLOOR_MARGIN}x below the smallest errors ({smallest:.3e}, {smallest_h1:.3e})",
            floor.0, floor.1
        )));
    }

    // regularity of the reference at T from an N vs 2N comparison
    let fine_grid = Grid2D::new(2 * config.grid.n(), config.grid.l())?;
    let w_fine0 = make_initial_data(&refined_data(&config.initial), &fine_grid)?;
    let fine_cfg = config.fluid(&fine_grid, 0.0, 0.5 * config.dt);
    let mut w_fine = None;
    solve_with(&w_fine0, &fine_cfg, |s| {
        if s.t == config.t_final {
            w_fine = Some(s.omega.clone());
        }
        Ok(())
    })?;
    let w_fine = w_fine.ok_or_else(|| LabError::SolverFailure {
        t: config.t_final,
        reason: "refined reference did not reach T".into(),
    })?;
    let (s_t, scan) = measure_regularity(&w_ref, &w_fine)?;

    let l2: Vec<(f64, f64)> = runs.iter().map(|r| (r.eps, r.sup_l2)).collect();
    let h1: Vec<(f64, f64)> = runs.iter().map(|r| (r.eps, r.sup_h1dot)).collect();
    let fit_l2 = fit_rate(&l2, RateModel::PurePower)?;
    Ok(InviscidReport {
        predicted_h1_exponent: fit_l2.alpha_hat * s_t / (1.0 + s_t),
        fit_h1_pure: fit_rate(&h1, RateModel::PurePower)?,
        fit_h1_log: fit_rate(&h1, RateModel::PowerWithLog)?,
        fit_l2,
        runs,
        s_t,
        regularity_scan: scan,
        floor_l2: floor.0,
        floor_h1dot: floor.1,
    })
}

/// The sweep without validation or fits. Returns the runs, the reference
/// floor `(L^2, H^1 dot)` and the reference vorticity at `T`. Viscosity
/// zero is allowed.
#[allow(clippy::type_complexity)]
pub fn inviscid_runs(
    config: &RateStudyConfig,
    eps: &[f64],
) -> Result<(Vec<InviscidRun>, (f64, f64), SpectralField)> {
    let g = &config.grid;
    let w0 = config.omega0()?;
    let mut members = vec![
        Member::new(&config.fluid(g, 0.0, config.dt), &w0, REFERENCE_REFINEMENT)?,
        Member::new(&config.fluid(g, 0.0, config.dt), &w0, 1)?,
    ];
    for &e in eps {
        members.push(Member::new(&config.fluid(g, e, config.dt), &w0, 1).map_err(|x| tag(e, x))?);
    }
    let frame = DyadicFrame::new(1.0, g)?;
    let mut runs: Vec<InviscidRun> = eps
        .iter()
        .map(|&e| InviscidRun {
            eps: e,
            sup_l2: 0.0,
            sup_h1dot: 0.0,
            curve: Vec::new(),
        })
        .collect();
    let mut floor = (0.0f64, 0.0f64);
    let n = config.n_steps();
    let h = config.t_final / n as f64;
    let mut record = |members: &[Member], runs: &mut [InviscidRun]| -> Result<()> {
        let r = &members[0].state;
        let f = velocity_errors(&members[1].state.omega, &r.omega)?;
        floor = (floor.0.max(f.0), floor.1.max(f.1));
        let rows = crate::par::map(&members[2..], |m| -> Result<[f64; 5]> {
            let (l2, h1, _) = velocity_errors(&m.state.omega, &r.omega)?;
            let b2 = besov_norm(&m.state.omega, config.besov_s, 2.0, &frame)?;
            let bp = besov_norm(&m.state.omega, config.besov_s, config.besov_p, &frame)?;
            Ok([r.t, l2, h1, b2, bp])
        });
        for (run, row) in runs.iter_mut().zip(rows) {
            let row = row?;
            run.sup_l2 = run.sup_l2.max(row[1]);
            run.sup_h1dot = run.sup_h1dot.max(row[2]);
            run.curve.push(row);
        }
        Ok(())
    };
    record(&members, &mut runs)?;
    for i in 1..=n {
        advance_all(&mut members, i as f64 * h);
        for (k, m) in members.iter_mut().enumerate() {
            if let Some(e) = m.error.take() {
                return Err(if k >= 2 { tag(eps[k - 2], e) } else { e });
            }
        }
        if i % config.sample_stride == 0 || i == n {
            record(&members, &mut runs)?;
        }
    }
    Ok((runs, floor, members[0].state.omega.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_viscosity_sits_at_the_floor() {
        let g = Grid2D::periodic(32).unwrap();
        let mut c = RateStudyConfig::new(
            &g,
            vec![1e-2, 5e-3, 2.5e-3, 1.25e-3],
            InitialData::TaylorGreen {
                amplitude: 1.0,
                perturbation: 0.2,
            },
        );
        c.t_final = 0.2;
        c.dt = 0.02;
        let (runs, floor, _) = inviscid_runs(&c, &[0.0, 1e-3]).unwrap();
        assert!(runs[0].sup_l2 <= floor.0 * (1.0 + 1e-9) + 1e-300);
        assert!(runs[1].sup_l2 > 100.0 * floor.0);
    }

    #[test]
    fn smooth_data_has_linear_l2_rate() {
        let g = Grid2D::periodic(32).unwrap();
        let mut c = RateStudyConfig::new(
            &g,
            vec![1e-2, 5e-3, 2.5e-3, 1.25e-3],
            InitialData::TaylorGreen {
                amplitude: 1.0,
                perturbation: 0.2,
            },
        );
        c.t_final = 0.3;
        c.dt = 0.02;
        let rep = run_inviscid_study(&c).unwrap();
        assert!(
            (rep.fit_l2.alpha_hat - 1.0).abs() < 0.1,
            "{}",
            rep.fit_l2.alpha_hat
        );
        assert!(rep.runs.windows(2).all(|w| w[1].sup_h1dot < w[0].sup_h1dot));
        assert!(rep.s_t >= 2.0);
    }

    #[test]
    fn regularity_of_a_single_mode_is_maximal() {
        let g = Grid2D::periodic(32).unwrap();
        let g2 = Grid2D::periodic(64).unwrap();
        let w = SpectralField::single_mode(&g, 2, 1, 1.0, 0.0);
        let (s, scan) = measure_regularity(&w, &w.resample(&g2)).unwrap();
        assert_eq!(s, 3.0);
        assert_eq!(scan.len(), 60);
    }
}
