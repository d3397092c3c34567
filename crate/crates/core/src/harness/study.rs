use crate::error::{LabError, Result};
use crate::fluid::{make_initial_data, FluidConfig, FluidSolver, InitialData};
use crate::spectral::{biot_savart, FlowState, Grid2D, SpectralField};

/// Which sweep a study runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyKind {
    Perturbation,
    Inviscid,
    EmLimit,
}

/// Shared parameters of the convergence studies.
#[derive(Clone, Debug, PartialEq)]
pub struct RateStudyConfig {
    pub grid: Grid2D,
    pub dt: f64,
    pub t_final: f64,
    pub cfl: f64,
    /// nominal steps between recorded error samples
    pub sample_stride: usize,
    /// eps values (perturbation, inviscid) or c values (em_limit)
    pub sweep: Vec<f64>,
    pub initial: InitialData,
    /// direction `d omega` of the perturbed data `omega0 + eps d omega`
    pub perturbation: InitialData,
    /// steady `curl dg` added as `eps curl dg`, if any
    pub forcing_perturbation: Option<InitialData>,
    /// initial magnetic field for the plasma study
    pub magnetic: InitialData,
    pub sigma: f64,
    /// fixed cut-off for the extrapolation split; `None` follows the schedule
    pub theta: Option<f64>,
    /// `alpha` and `s_T` entering the cut-off schedule
    pub alpha: f64,
    pub s_t: f64,
    /// Besov exponent and integrability of the recorded profiles
    pub besov_s: f64,
    pub besov_p: f64,
    /// Sobolev index of the second Ampere-residual norm
    pub eta: f64,
}

impl RateStudyConfig {
    pub fn new(grid: &Grid2D, sweep: Vec<f64>, initial: InitialData) -> Self {
        RateStudyConfig {
            grid: grid.clone(),
            dt: 0.01,
            t_final: 1.0,
            cfl: 0.5,
            sample_stride: 1,
            sweep,
            initial,
            perturbation: InitialData::SmoothRandom {
                seed: 17,
                slope: 4.0,
                k_cap: 6.0,
                amplitude: 1.0,
            },
            forcing_perturbation: None,
            magnetic: InitialData::SmoothRandom {
                seed: 29,
                slope: 4.0,
                k_cap: 6.0,
                amplitude: 1.0,
            },
            sigma: 1.0,
            theta: None,
            alpha: 1.0,
            s_t: 1.0,
            besov_s: 0.5,
            besov_p: 4.0,
            eta: 1.5,
        }
    }

    pub fn validate(&self, kind: StudyKind) -> Result<()> {
        let errs = self.problems(kind);
        if errs.is_empty() {
            Ok(())
        } else {
            Err(LabError::Config(errs.join("; ")))
        }
    }

    /// Every violated precondition, in a fixed order.
    pub fn problems(&self, kind: StudyKind) -> Vec<String> {
        let mut errs = Vec::new();
        if self.sweep.len() < 4 {
            errs.push(format!(
                "sweep needs at least 4 values, got {}",
                self.sweep.len()
            ));
        }
        if self.sweep.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            errs.push("sweep values must be positive".to_string());
        }
        let decreasing = self.sweep.windows(2).all(|w| w[1] < w[0]);
        let increasing = self.sweep.windows(2).all(|w| w[1] > w[0]);
        match kind {
            StudyKind::EmLimit if !increasing => {
                errs.push("c sweep must be strictly increasing".into())
            }
            StudyKind::Perturbation | StudyKind::Inviscid if !decreasing => {
                errs.push("eps sweep must be strictly decreasing".into())
            }
            _ => {}
        }
        if kind == StudyKind::Perturbation && self.sweep.iter().any(|&e| e >= 1.0) {
            errs.push("eps sweep values must be below 1".into());
        }
        if !(self.dt > 0.0) || !(self.t_final > 0.0) || !(self.cfl > 0.0) {
            errs.push("dt > 0, T > 0 and cfl > 0 required".into());
        }
        if self.sample_stride == 0 {
            errs.push("sample_stride >= 1 required".into());
        }
        if !(self.sigma > 0.0) {
            errs.push("sigma > 0 required".into());
        }
        if !(self.alpha > 0.0) || !(self.s_t > 0.0) {
            errs.push("alpha > 0 and s_T > 0 required".into());
        }
        if matches!(self.theta, Some(t) if !(t > 0.0)) {
            errs.push("theta > 0 required".into());
        }
        if !(self.besov_p >= 1.0) {
            errs.push("besov_p >= 1 required".into());
        }
        if !(1.0..=2.0).contains(&self.eta) {
            errs.push("eta in [1, 2] required".into());
        }
        errs
    }

    pub(crate) fn fluid(&self, grid: &Grid2D, viscosity: f64, dt: f64) -> FluidConfig {
        let mut c = FluidConfig::new(grid, viscosity, dt, self.t_final);
        c.cfl = self.cfl;
        c
    }

    pub(crate) fn n_steps(&self) -> usize {
        self.fluid(&self.grid, 0.0, self.dt).n_steps()
    }

    pub(crate) fn omega0(&self) -> Result<SpectralField> {
        make_initial_data(&self.initial, &self.grid)
    }
}

/// One solver in a lockstep sweep; advances one nominal interval in
/// `substeps` equal pieces.
pub(crate) struct Member {
    pub solver: FluidSolver,
    pub state: FlowState,
    pub substeps: usize,
    pub error: Option<LabError>,
}

impl Member {
    pub fn new(config: &FluidConfig, omega0: &SpectralField, substeps: usize) -> Result<Self> {
        Ok(Member {
            solver: FluidSolver::new(config)?,
            state: FlowState::new(omega0.clone().dealiased(), 0.0),
            substeps,
            error: None,
        })
    }

    pub fn advance_to(&mut self, t1: f64) {
        if self.error.is_some() {
            return;
        }
        let h = (t1 - self.state.t) / self.substeps as f64;
        let t0 = self.state.t;
        for k in 1..=self.substeps {
            match self.solver.advance(&self.state, h) {
                Ok(mut s) => {
                    s.t = if k == self.substeps {
                        t1
                    } else {
                        t0 + k as f64 * h
                    };
                    self.state = s;
                }
                Err(e) => {
                    self.error = Some(e);
                    return;
                }
            }
        }
    }
}

/// Advances all members to `t1`, concurrently.
pub(crate) fn advance_all(members: &mut [Member], t1: f64) {
    crate::par::for_each_indexed(members, |_, m| m.advance_to(t1));
}

/// Velocity error norms from a vorticity difference (both mean-free):
/// `(||du||_{L^2}, ||du||_{H^1 dot}, ||du||_{H^1})`.
pub(crate) fn velocity_errors(a: &SpectralField, b: &SpectralField) -> Result<(f64, f64, f64)> {
    let d = a - b;
    let (v1, v2) = biot_savart(&d);
    let l2 = v1.l2_norm().hypot(v2.l2_norm());
    let h1dot = d.l2_norm();
    Ok((l2, h1dot, l2.hypot(h1dot)))
}

/// Tags a member failure with its sweep parameter.
pub(crate) fn tag(param: f64, e: LabError) -> LabError {
    LabError::SweepMember {
        param,
        source: Box::new(e),
    }
}
