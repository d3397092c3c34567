//! Frequency-localised transport diagnostics: the commutator identity for
//! neighbouring blocks and the three-way split of the low/high transfer
//! term `J`.

use super::{DyadicFrame, LowPass};
use crate::error::{LabError, Result};
use crate::spectral::{
    advect_with_gradient, apply_radial, derivative, sharp_high_pass, sharp_high_pass_strict,
    FlowState, SpectralField,
};

fn transport(u1: &SpectralField, u2: &SpectralField, f: &SpectralField) -> SpectralField {
    advect_with_gradient(u1, u2, &derivative(f, 0), &derivative(f, 1))
}

/// `[T, u.grad] h = T(u.grad h) - u.grad(T h)` for a multiplier `T`.
fn commutator(
    t: &dyn Fn(&SpectralField) -> SpectralField,
    u1: &SpectralField,
    u2: &SpectralField,
    h: &SpectralField,
) -> SpectralField {
    let a = t(&transport(u1, u2, h));
    let b = transport(u1, u2, &t(h));
    &a - &b
}

/// Both sides of the neighbouring-block identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityTerms {
    pub lhs: f64,
    pub i1: f64,
    pub i2: f64,
    /// Sum of magnitudes of every partial inner product, used as the scale.
    pub scale: f64,
}

impl IdentityTerms {
    pub fn residual(&self) -> f64 {
        let rhs = self.i1 + self.i2;
        (self.lhs - rhs).abs() / (self.scale + f64::MIN_POSITIVE)
    }
}

/// Evaluates `int u.grad(Delta_j w) Delta_{j+1} w` and the commutator
/// expression `I1 + I2` it equals.
pub fn iden1_terms(
    u1: &SpectralField,
    u2: &SpectralField,
    omega: &SpectralField,
    j: i32,
    frame: &DyadicFrame,
) -> Result<IdentityTerms> {
    for jj in [j, j + 1, j + 2] {
        if !frame.all_blocks().contains(&jj) {
            return Err(LabError::Index {
                j: jj,
                lo: *frame.all_blocks().start(),
                hi: frame.j_max(),
            });
        }
    }
    u1.check_grid(u2)?;
    u1.check_grid(omega)?;
    let dj = frame.block(omega, j)?;
    let dj1 = frame.block(omega, j + 1)?;
    let dj2 = frame.block(omega, j + 2)?;
    let pair = &dj + &dj1;

    let lhs = transport(u1, u2, &dj).inner(&dj1);

    let next = |h: &SpectralField| frame.block(h, j + 1).expect("checked index");
    let both = |h: &SpectralField| {
        let a = frame.block(h, j).expect("checked index");
        frame.block(&a, j + 1).expect("checked index")
    };
    let c1 = commutator(&next, u1, u2, &dj).inner(&pair);
    let c2 = commutator(&both, u1, u2, &pair).inner(&pair);
    let i1 = c1 - 0.5 * c2;

    let cut = frame.theta() * 2f64.powi(j) / 3.0;
    let (h1, h2) = (
        sharp_high_pass_strict(u1, cut),
        sharp_high_pass_strict(u2, cut),
    );
    let i2 = transport(&h1, &h2, &dj).inner(&frame.block(&dj1, j + 2)?);
    let _ = dj2;

    Ok(IdentityTerms {
        lhs,
        i1,
        i2,
        scale: lhs.abs() + c1.abs() + 0.5 * c2.abs() + i2.abs(),
    })
}

/// `|LHS - (I1 + I2)| / (|LHS| + |I1 parts| + |I2| + floor)`.
pub fn iden1_residual(
    u1: &SpectralField,
    u2: &SpectralField,
    omega: &SpectralField,
    j: i32,
    frame: &DyadicFrame,
) -> Result<f64> {
    Ok(iden1_terms(u1, u2, omega, j, frame)?.residual())
}

/// Instantaneous integrands of the transfer term and its pieces at one
/// snapshot.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TransferIntegrands {
    pub j: f64,
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
    pub bound_j2: f64,
    pub bound_j3: f64,
}

fn grad_sup(f: &SpectralField) -> f64 {
    let (a, b) = SpectralField::to_real_pair(&derivative(f, 0), &derivative(f, 1));
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x.hypot(*y))
        .fold(0.0, f64::max)
}

fn vec_l2(a: &SpectralField, b: &SpectralField) -> f64 {
    (a.l2_norm_sq() + b.l2_norm_sq()).sqrt()
}

/// Integrands of `J`, `J1`, `J2`, `J3` and of the Holder-form bounds for
/// `J2` and `J3` at a single state.
pub fn transfer_integrands(state: &FlowState, frame: &DyadicFrame) -> Result<TransferIntegrands> {
    frame.grid().check_same(state.omega.grid())?;
    let w = &state.omega;
    let (u1, u2) = (&state.u1, &state.u2);
    let theta = frame.theta();
    let s0 = frame.low_pass(w, LowPass::S0);
    let high = frame.high_pass(w);
    let dm1 = frame.block(w, -1)?;
    let d0 = frame.block(w, 0)?;
    // sum_{j <= -2} Delta_j = S0 - Delta_{-1}
    let below = apply_radial(w, |k| frame.psi_at(k) - frame.block_profile(-1, k));
    // sum_{j >= 1} Delta_j = Id - S0 - Delta_0
    let above = &high - &d0;

    let t_dm1 = transport(u1, u2, &dm1);
    let j_total = transport(u1, u2, &s0).inner(&high);
    let j1 = t_dm1.inner(&d0);
    let j2 = transport(u1, u2, &below).inner(&high);
    let j3 = t_dm1.inner(&above);

    let u_hi12 = vec_l2(
        &sharp_high_pass(u1, theta / 12.0),
        &sharp_high_pass(u2, theta / 12.0),
    );
    let u_hi6 = vec_l2(
        &sharp_high_pass(u1, theta / 6.0),
        &sharp_high_pass(u2, theta / 6.0),
    );
    Ok(TransferIntegrands {
        j: j_total,
        j1,
        j2,
        j3,
        bound_j2: u_hi12 * grad_sup(&below) * high.l2_norm(),
        bound_j3: u_hi6 * grad_sup(&dm1) * above.l2_norm(),
    })
}

/// Time-integrated transfer terms along a trajectory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JSeries {
    pub t: Vec<f64>,
    pub j: Vec<f64>,
    pub j1: Vec<f64>,
    pub j2: Vec<f64>,
    pub j3: Vec<f64>,
    pub bound_j2: Vec<f64>,
    pub bound_j3: Vec<f64>,
}

/// Cumulative trapezoid of `y` over `t`, starting from 0.
pub fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    let mut acc = 0.0;
    for i in 0..y.len() {
        if i > 0 {
            acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// `J1(t), J2(t), J3(t)`, their sum `J(t)` and the time-integrated bounds
/// for `J2` and `J3`, by trapezoidal quadrature over the snapshots.
pub fn j_decomposition(states: &[FlowState], frame: &DyadicFrame) -> Result<JSeries> {
    if states.len() < 2 {
        return Err(LabError::InsufficientData(format!(
            "J decomposition needs at least 2 snapshots, got {}",
            states.len()
        )));
    }
    let rows = crate::par::map(states, |s| transfer_integrands(s, frame));
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let t: Vec<f64> = states.iter().map(|s| s.t).collect();
    let col = |f: fn(&TransferIntegrands) -> f64| {
        let y: Vec<f64> = rows.iter().map(f).collect();
        cumulative_trapezoid(&t, &y)
    };
    Ok(JSeries {
        j: col(|r| r.j),
        j1: col(|r| r.j1),
        j2: col(|r| r.j2),
        j3: col(|r| r.j3),
        bound_j2: col(|r| r.bound_j2),
        bound_j3: col(|r| r.bound_j3),
        t,
    })
}
