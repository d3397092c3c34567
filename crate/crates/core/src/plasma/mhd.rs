use super::em::PlasmaConfig;
use super::state::MHDState;
use crate::error::Result;
use crate::fluid::stepper::IfRk4;
use crate::fluid::{cfl_advance, max_speed};
use crate::spectral::{advect, biot_savart, SpectralField};

/// Incompressible MHD integrator. In the normal structure the Lorentz
/// force is a gradient, so `u` follows Euler while `b` is advected and
/// diffused with diffusivity `1/s`.
pub struct MhdSolver {
    config: PlasmaConfig,
    stepper: IfRk4,
}

impl MhdSolver {
    pub fn new(config: &PlasmaConfig) -> Result<Self> {
        config.validate()?;
        Ok(MhdSolver {
            stepper: IfRk4::new(&config.grid, vec![0.0, 1.0 / config.sigma]),
            config: config.clone(),
        })
    }

    pub fn advance(&mut self, state: &MHDState, h: f64) -> Result<MHDState> {
        let g = &self.config.grid;
        g.check_same(state.omega.grid())?;
        g.check_same(state.b.grid())?;
        let mean = (state.u1.mean(), state.u2.mean());
        let velocity = |w: &SpectralField| {
            let (mut u1, mut u2) = biot_savart(w);
            if mean != (0.0, 0.0) {
                u1.coeffs_mut()[0] += mean.0;
                u2.coeffs_mut()[0] += mean.1;
            }
            (u1, u2)
        };
        let stepper = &mut self.stepper;
        let speed = |w: &[SpectralField]| {
            let (u1, u2) = velocity(&w[0]);
            max_speed(&u1, &u2)
        };
        let mut step = |t: f64, h: f64, w: &[SpectralField]| {
            stepper.step(t, h, w, |_, f| {
                let (u1, u2) = velocity(&f[0]);
                vec![
                    -&advect(&u1, &u2, &f[0]).expect("same grid"),
                    -&advect(&u1, &u2, &f[1]).expect("same grid"),
                ]
            })
        };
        let out = cfl_advance(
            vec![state.omega.clone(), state.b.clone()],
            state.t,
            h,
            g.dx(),
            self.config.cfl,
            self.config.max_halvings,
            &speed,
            &mut step,
        )?;
        let (u1, u2) = velocity(&out[0]);
        let mut it = out.into_iter();
        let omega = it.next().expect("two fields");
        let b = it.next().expect("two fields");
        Ok(MHDState {
            u1,
            u2,
            b,
            omega,
            t: state.t + h,
        })
    }
}

/// One step of size `config.dt`.
pub fn step_mhd(state: &MHDState, config: &PlasmaConfig) -> Result<MHDState> {
    MhdSolver::new(config)?.advance(state, config.dt)
}

/// Uniform-step MHD solve to `T`, storing every `snapshot_stride`-th state.
pub fn solve_mhd(state0: &MHDState, config: &PlasmaConfig) -> Result<Vec<MHDState>> {
    let mut solver = MhdSolver::new(config)?;
    let n = config.n_steps();
    let h = if n == 0 {
        config.dt
    } else {
        config.t_final / n as f64
    };
    let mut state = MHDState {
        t: 0.0,
        ..state0.clone()
    };
    let mut out = vec![state.clone()];
    for i in 1..=n {
        let mut next = solver.advance(&state, h)?;
        next.t = i as f64 * h;
        state = next;
        if i % config.snapshot_stride == 0 || i == n {
            out.push(state.clone());
        }
    }
    Ok(out)
}
