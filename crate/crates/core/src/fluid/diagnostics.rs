use super::forcing::Forcing;
use super::solver::Trajectory;
use crate::error::{LabError, Result};
use crate::lp::{cumulative_trapezoid, j_decomposition, DyadicFrame, LowPass};
use crate::spectral::{derivative, lp_norm};

/// Sub-intervals per snapshot gap used for the forcing time integral.
const FORCING_PANELS: usize = 4;

/// Largest relative excess of `||omega(t)||_p` over
/// `||omega_0||_p + int_0^t ||curl g||_p` across the stored snapshots.
pub fn transport_bound_check(traj: &Trajectory, p: f64) -> Result<f64> {
    let states = &traj.states;
    if states.is_empty() {
        return Err(LabError::InsufficientData("empty trajectory".into()));
    }
    let norms = crate::par::map(states, |s| lp_norm(&s.omega, p));
    let norms = norms.into_iter().collect::<Result<Vec<_>>>()?;
    let cfg = &traj.config;
    let mut forcing_int = 0.0;
    let mut worst: f64 = 0.0;
    for (i, s) in states.iter().enumerate() {
        if i > 0 {
            if let Some(g) = &cfg.forcing {
                forcing_int += simpson(states[i - 1].t, s.t, |t| {
                    lp_norm(&g.curl_g(t, &cfg.grid), p).unwrap_or(f64::NAN)
                });
            }
        }
        let rhs = norms[0] + forcing_int;
        let excess = (norms[i] - rhs).max(0.0);
        if excess > 0.0 {
            worst = worst.max(if rhs > 0.0 {
                excess / rhs
            } else {
                f64::INFINITY
            });
        }
    }
    Ok(worst)
}

fn simpson(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = 2 * FORCING_PANELS;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Both sides of the high-frequency energy balance at each snapshot.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyBalance {
    pub t: Vec<f64>,
    /// `1/2 ||sqrt(Id - S0) omega(t)||^2`
    pub lhs: Vec<f64>,
    /// initial term + forcing work - viscous loss - transfer `J(t)`
    pub rhs: Vec<f64>,
    pub forcing: Vec<f64>,
    pub viscous: Vec<f64>,
    pub transfer: Vec<f64>,
    pub residual: Vec<f64>,
}

impl EnergyBalance {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().cloned().fold(0.0, f64::max)
    }
}

/// Checks
///
/// ```text
/// 1/2||sqrt(Id-S0) w(t)||^2 = 1/2||sqrt(Id-S0) w0||^2 + int <curl g, (Id-S0) w>
///     - eps int ||grad sqrt(Id-S0) w||^2 - J(t)
/// ```
///
/// with trapezoidal quadrature over the snapshots, and returns the relative
/// residual at each snapshot time.
pub fn highfreq_energy_identity(
    traj: &Trajectory,
    frame: &DyadicFrame,
    forcing: Option<&dyn Forcing>,
) -> Result<EnergyBalance> {
    let states = &traj.states;
    if states.len() < 2 {
        return Err(LabError::InsufficientData(format!(
            "energy balance needs at least 2 snapshots, got {}",
            states.len()
        )));
    }
    let eps = traj.config.viscosity;
    let per_state = crate::par::map(states, |s| {
        let root = frame.low_pass(&s.omega, LowPass::SqrtIdMinusS0);
        let hp = frame.high_pass(&s.omega);
        let energy = 0.5 * root.l2_norm_sq();
        let work = forcing.map_or(0.0, |g| g.curl_g(s.t, frame.grid()).inner(&hp));
        let grad = derivative(&root, 0).l2_norm_sq() + derivative(&root, 1).l2_norm_sq();
        (energy, work, eps * grad)
    });
    let t: Vec<f64> = states.iter().map(|s| s.t).collect();
    let lhs: Vec<f64> = per_state.iter().map(|r| r.0).collect();
    let forcing_cum = cumulative_trapezoid(&t, &per_state.iter().map(|r| r.1).collect::<Vec<_>>());
    let viscous = cumulative_trapezoid(&t, &per_state.iter().map(|r| r.2).collect::<Vec<_>>());
    let transfer = j_decomposition(states, frame)?.j;
    let mut rhs = Vec::with_capacity(t.len());
    let mut residual = Vec::with_capacity(t.len());
    for i in 0..t.len() {
        let r = lhs[0] + forcing_cum[i] - viscous[i] - transfer[i];
        let scale = [lhs[i], lhs[0], forcing_cum[i], viscous[i], transfer[i]]
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let d = (lhs[i] - r).abs();
        residual.push(if scale > 0.0 { d / scale } else { d });
        rhs.push(r);
    }
    Ok(EnergyBalance {
        t,
        lhs,
        rhs,
        forcing: forcing_cum,
        viscous,
        transfer,
        residual,
    })
}
