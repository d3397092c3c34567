use std::sync::Arc;

use super::fit::{fit_rate, theta_schedule, RateFit, RateModel};
use super::study::{advance_all, tag, velocity_errors, Member, RateStudyConfig, StudyKind};
use crate::error::Result;
use crate::fluid::{make_initial_data, FluidConfig, Forcing};
use crate::lp::extrapolation_split;
use crate::spectral::{stream_function, Grid2D, SpectralField};

/// Time-independent vorticity source.
#[derive(Clone, Debug)]
pub struct SteadyForcing(pub SpectralField);

impl Forcing for SteadyForcing {
    fn curl_g(&self, _t: f64, grid: &Grid2D) -> SpectralField {
        self.0.resample(grid)
    }
}

/// One perturbed run.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationRun {
    pub eps: f64,
    pub theta: f64,
    pub sup_h1: f64,
    pub sup_l2: f64,
    /// every sampled time satisfied `low_actual <= low_bound`
    pub split_holds: bool,
    /// largest `low_actual / low_bound` seen
    pub max_split_ratio: f64,
    /// `(t, ||du||_{H^1}, low_actual, low_bound, high_norm)`
    pub curve: Vec<[f64; 5]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationReport {
    pub runs: Vec<PerturbationRun>,
    pub fit_h1: RateFit,
    pub fit_l2: RateFit,
    /// `sup_t ||u_dt - u_{dt/2}||_{H^1}` of the reference
    pub floor_h1: f64,
}

/// Euler runs from `omega0 + eps d omega` (forcing `eps curl dg`) against
/// the unperturbed reference. Records sup-in-time velocity errors and the
/// low/high split of the vorticity error at the cut-off `theta_eps`.
pub fn run_perturbation_study(config: &RateStudyConfig) -> Result<PerturbationReport> {
    config.validate(StudyKind::Perturbation)?;
    let runs = perturbation_runs(config, &config.sweep)?;
    let floor = runs.1;
    let runs = runs.0;
    let h1: Vec<(f64, f64)> = runs.iter().map(|r| (r.eps, r.sup_h1)).collect();
    let l2: Vec<(f64, f64)> = runs.iter().map(|r| (r.eps, r.sup_l2)).collect();
    Ok(PerturbationReport {
        fit_h1: fit_rate(&h1, RateModel::PurePower)?,
        fit_l2: fit_rate(&l2, RateModel::PurePower)?,
        runs,
        floor_h1: floor,
    })
}

/// The sweep itself without the validation and fits; `eps` may be any
/// nonnegative values (zero gives the unperturbed run).
pub fn perturbation_runs(
    config: &RateStudyConfig,
    eps: &[f64],
) -> Result<(Vec<PerturbationRun>, f64)> {
    let g = &config.grid;
    let w0 = config.omega0()?;
    let dw = make_initial_data(&config.perturbation, g)?;
    let dg = match &config.forcing_perturbation {
        Some(k) => Some(make_initial_data(k, g)?),
        None => None,
    };
    let base = config.fluid(g, 0.0, config.dt);
    let mut members = vec![Member::new(&base, &w0, 1)?, Member::new(&base, &w0, 2)?];
    for &e in eps {
        let mut w = w0.clone();
        w.axpy(e, &dw);
        let cfg: FluidConfig = match &dg {
            Some(f) if e != 0.0 => base.clone().with_forcing(Arc::new(SteadyForcing(f * e))),
            _ => base.clone(),
        };
        members.push(Member::new(&cfg, &w, 1).map_err(|x| tag(e, x))?);
    }
    let thetas = eps
        .iter()
        .map(|&e| {
            if let Some(t) = config.theta {
                Ok(t)
            } else if e > 0.0 && e < 1.0 {
                theta_schedule(e, config.alpha, config.s_t)
            } else {
                Ok(f64::INFINITY)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut runs: Vec<PerturbationRun> = eps
        .iter()
        .zip(&thetas)
        .map(|(&e, &theta)| PerturbationRun {
            eps: e,
            theta,
            sup_h1: 0.0,
            sup_l2: 0.0,
            split_holds: true,
            max_split_ratio: 0.0,
            curve: Vec::new(),
        })
        .collect();
    let mut floor: f64 = 0.0;
    let n = config.n_steps();
    let h = config.t_final / n as f64;
    let mut record = |members: &[Member], runs: &mut [PerturbationRun]| -> Result<()> {
        let r = &members[0].state;
        floor = floor.max(velocity_errors(&members[1].state.omega, &r.omega)?.2);
        let psi = stream_function(&r.omega);
        for (run, m) in runs.iter_mut().zip(&members[2..]) {
            let (l2, _, h1) = velocity_errors(&m.state.omega, &r.omega)?;
            run.sup_h1 = run.sup_h1.max(h1);
            run.sup_l2 = run.sup_l2.max(l2);
            let sp = extrapolation_split(
                &stream_function(&m.state.omega),
                &psi,
                run.theta.min(1e300),
                1.0,
                2.0,
            )?;
            run.split_holds &= sp.holds();
            if sp.low_bound > 0.0 {
                run.max_split_ratio = run.max_split_ratio.max(sp.low_actual / sp.low_bound);
            }
            run.curve
                .push([r.t, h1, sp.low_actual, sp.low_bound, sp.high_norm]);
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
    Ok((runs, floor))
}
