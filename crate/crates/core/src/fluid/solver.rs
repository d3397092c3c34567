use std::fmt;
use std::sync::Arc;

use super::forcing::Forcing;
use super::stepper::IfRk4;
use crate::error::{LabError, Result};
use crate::spectral::{
    advect, biot_savart, lp_norm, sobolev_norm, FlowState, Grid2D, SpectralField,
};

/// Parameters of a vorticity solve.
#[derive(Clone)]
pub struct FluidConfig {
    pub grid: Grid2D,
    pub viscosity: f64,
    pub dt: f64,
    pub t_final: f64,
    pub cfl: f64,
    pub snapshot_stride: usize,
    pub forcing: Option<Arc<dyn Forcing>>,
    pub max_halvings: u32,
}

impl fmt::Debug for FluidConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FluidConfig")
            .field("grid", &self.grid)
            .field("viscosity", &self.viscosity)
            .field("dt", &self.dt)
            .field("t_final", &self.t_final)
            .field("cfl", &self.cfl)
            .field("snapshot_stride", &self.snapshot_stride)
            .field("forcing", &self.forcing)
            .finish()
    }
}

impl FluidConfig {
    pub fn new(grid: &Grid2D, viscosity: f64, dt: f64, t_final: f64) -> Self {
        FluidConfig {
            grid: grid.clone(),
            viscosity,
            dt,
            t_final,
            cfl: 0.5,
            snapshot_stride: 1,
            forcing: None,
            max_halvings: 20,
        }
    }

    pub fn with_forcing(mut self, g: Arc<dyn Forcing>) -> Self {
        self.forcing = Some(g);
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::Config(m.to_string()));
        if !(self.viscosity >= 0.0) || !self.viscosity.is_finite() {
            return bad("viscosity >= 0 required");
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt > 0 required");
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return bad("T >= 0 required");
        }
        if !(self.cfl > 0.0) {
            return bad("cfl > 0 required");
        }
        if self.snapshot_stride == 0 {
            return bad("snapshot_stride >= 1 required");
        }
        Ok(())
    }

    /// Number of nominal steps; `dt` is shrunk so they land exactly on `T`.
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    pub fn nominal_dt(&self) -> f64 {
        match self.n_steps() {
            0 => self.dt,
            n => self.t_final / n as f64,
        }
    }

    pub fn curl_g(&self, t: f64) -> Option<SpectralField> {
        self.forcing.as_ref().map(|g| g.curl_g(t, &self.grid))
    }
}

/// Norms recorded at each stored snapshot.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NormRow {
    pub t: f64,
    pub enstrophy: f64,
    pub energy: f64,
    pub linf_vorticity: f64,
    pub h1_velocity: f64,
    pub l2_vorticity: f64,
}

impl NormRow {
    pub fn of(state: &FlowState) -> Self {
        let h1 = (sobolev_norm(&state.u1, 1.0).unwrap_or(0.0).powi(2)
            + sobolev_norm(&state.u2, 1.0).unwrap_or(0.0).powi(2))
        .sqrt();
        NormRow {
            t: state.t,
            enstrophy: state.enstrophy(),
            energy: state.energy(),
            linf_vorticity: lp_norm(&state.omega, f64::INFINITY).unwrap_or(f64::NAN),
            h1_velocity: h1,
            l2_vorticity: state.omega.l2_norm(),
        }
    }
}

/// Stored snapshots of a solve with their norm table.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<FlowState>,
    pub config: FluidConfig,
    pub diagnostics: Vec<NormRow>,
}

pub(crate) fn max_speed(u1: &SpectralField, u2: &SpectralField) -> f64 {
    let (a, b) = SpectralField::to_real_pair(u1, u2);
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x.hypot(*y))
        .fold(0.0, f64::max)
}

pub(crate) fn check_finite(fields: &[SpectralField], t: f64) -> Result<()> {
    if fields.iter().all(|f| {
        f.coeffs()
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }) {
        Ok(())
    } else {
        Err(LabError::SolverFailure {
            t,
            reason: "non-finite values".into(),
        })
    }
}

/// Advances `w` over `[t, t + h]`, halving whenever the advective CFL
/// condition fails at the start of a substep. `speed` reports the maximal
/// velocity of a state and `step` performs one unconditional step.
#[allow(clippy::too_many_arguments)]
pub(crate) fn cfl_advance<V, F>(
    w: Vec<SpectralField>,
    t: f64,
    h: f64,
    dx: f64,
    cfl: f64,
    max_halvings: u32,
    speed: &V,
    step: &mut F,
) -> Result<Vec<SpectralField>>
where
    V: Fn(&[SpectralField]) -> f64,
    F: FnMut(f64, f64, &[SpectralField]) -> Vec<SpectralField>,
{
    fn go<V, F>(
        w: Vec<SpectralField>,
        t: f64,
        h: f64,
        depth: u32,
        lim: (f64, u32),
        speed: &V,
        step: &mut F,
    ) -> Result<Vec<SpectralField>>
    where
        V: Fn(&[SpectralField]) -> f64,
        F: FnMut(f64, f64, &[SpectralField]) -> Vec<SpectralField>,
    {
        let umax = speed(&w);
        if h * umax > lim.0 {
            if depth >= lim.1 {
                return Err(LabError::SolverFailure {
                    t,
                    reason: format!("CFL violated after {depth} halvings (max |u| = {umax:.3e})"),
                });
            }
            let mid = go(w, t, 0.5 * h, depth + 1, lim, speed, step)?;
            return go(mid, t + 0.5 * h, 0.5 * h, depth + 1, lim, speed, step);
        }
        let out = step(t, h, &w);
        check_finite(&out, t + h)?;
        Ok(out)
    }
    go(w, t, h, 0, (cfl * dx, max_halvings), speed, step)
}

/// Reusable vorticity integrator; keeps the integrating factors between
/// steps.
pub struct FluidSolver {
    config: FluidConfig,
    stepper: IfRk4,
}

impl FluidSolver {
    pub fn new(config: &FluidConfig) -> Result<Self> {
        config.validate()?;
        Ok(FluidSolver {
            stepper: IfRk4::new(&config.grid, vec![config.viscosity]),
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &FluidConfig {
        &self.config
    }

    /// Advances by `h` (with CFL halving) and returns the new state.
    pub fn advance(&mut self, state: &FlowState, h: f64) -> Result<FlowState> {
        self.config.grid.check_same(state.omega.grid())?;
        let cfg = &self.config;
        let stepper = &mut self.stepper;
        let speed = |w: &[SpectralField]| {
            let (u1, u2) = biot_savart(&w[0]);
            max_speed(&u1, &u2)
        };
        let mut step = |t: f64, h: f64, w: &[SpectralField]| {
            stepper.step(t, h, w, |t, f| {
                let (u1, u2) = biot_savart(&f[0]);
                let mut r = -&advect(&u1, &u2, &f[0]).expect("same grid");
                if let Some(g) = &cfg.forcing {
                    r = &r + &g.curl_g(t, &cfg.grid);
                }
                vec![r]
            })
        };
        let out = cfl_advance(
            vec![state.omega.clone()],
            state.t,
            h,
            cfg.grid.dx(),
            cfg.cfl,
            cfg.max_halvings,
            &speed,
            &mut step,
        )?;
        let omega = out.into_iter().next().expect("one field");
        Ok(FlowState::new(omega, state.t + h))
    }
}

/// One nominal step of the configured size.
pub fn step(state: &FlowState, config: &FluidConfig) -> Result<FlowState> {
    FluidSolver::new(config)?.advance(state, config.dt)
}

/// Solves from `omega0` at `t = 0` to `T`, storing every
/// `snapshot_stride`-th step and the final state.
pub fn solve(omega0: &SpectralField, config: &FluidConfig) -> Result<Trajectory> {
    let mut states = Vec::new();
    solve_with(omega0, config, |s| {
        states.push(s.clone());
        Ok(())
    })?;
    let diagnostics = crate::par::map(&states, NormRow::of);
    Ok(Trajectory {
        states,
        config: config.clone(),
        diagnostics,
    })
}

/// Like [`solve`] but hands each stored snapshot to `observe` instead of
/// keeping it.
pub fn solve_with<F>(omega0: &SpectralField, config: &FluidConfig, mut observe: F) -> Result<()>
where
    F: FnMut(&FlowState) -> Result<()>,
{
    config.grid.check_same(omega0.grid())?;
    let scale = omega0.max_abs_coeff().max(1e-300);
    if omega0.mean().abs() > 1e-12 * scale {
        return Err(LabError::Config(
            "initial vorticity must be mean-free".into(),
        ));
    }
    if omega0.realness_defect() > 1e-10 * scale {
        return Err(LabError::Config("initial vorticity must be real".into()));
    }
    let mut solver = FluidSolver::new(config)?;
    let n = config.n_steps();
    let h = config.nominal_dt();
    let mut state = FlowState::new(omega0.clone().dealiased(), 0.0);
    observe(&state)?;
    for i in 1..=n {
        let mut next = solver.advance(&state, h)?;
        next.t = i as f64 * h;
        state = next;
        if i % config.snapshot_stride == 0 || i == n {
            observe(&state)?;
        }
    }
    Ok(())
}
