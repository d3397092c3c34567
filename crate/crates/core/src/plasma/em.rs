use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::propagator::{apply, block, EtdCoef};
use super::state::{cross_vertical, div_rel, em_energy, ohm_current, positive, EMState};
use crate::error::{LabError, Result};
use crate::fluid::{cfl_advance, max_speed};
use crate::spectral::{
    advect, curl, curl_of_vertical, derivative, leray_project, lp_norm, sobolev_norm, Grid2D,
    SpectralField,
};

/// Parameters of an Euler-Maxwell solve.
#[derive(Clone, Debug, PartialEq)]
pub struct PlasmaConfig {
    pub grid: Grid2D,
    pub sigma: f64,
    pub c: f64,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_stride: usize,
    pub cfl: f64,
    pub max_halvings: u32,
    /// Resolve the `1/(s c^2)` start-up layer with geometrically graded
    /// steps before the first nominal step.
    pub initial_layer: bool,
}

/// Growth factor of the graded start-up steps.
const LAYER_RATIO: f64 = 1.25;
/// First start-up step in units of `1/(s c^2)`.
const LAYER_FIRST: f64 = 0.1;

impl PlasmaConfig {
    pub fn new(grid: &Grid2D, sigma: f64, c: f64, dt: f64, t_final: f64) -> Self {
        PlasmaConfig {
            grid: grid.clone(),
            sigma,
            c,
            dt,
            t_final,
            snapshot_stride: 1,
            cfl: 0.5,
            max_halvings: 20,
            initial_layer: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("sigma", self.sigma)?;
        positive("c", self.c)?;
        positive("dt", self.dt)?;
        positive("cfl", self.cfl)?;
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(LabError::Config("T >= 0 required".into()));
        }
        if self.snapshot_stride == 0 {
            return Err(LabError::Config("snapshot_stride >= 1 required".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    /// Step times from 0 to `T`: graded start-up steps filling the first
    /// nominal interval (when enabled and useful), then uniform steps.
    /// The second component marks nominal grid points.
    pub fn schedule(&self) -> Vec<(f64, bool)> {
        let n = self.n_steps();
        let mut out = vec![(0.0, true)];
        if n == 0 {
            return out;
        }
        let h = self.t_final / n as f64;
        let tau = LAYER_FIRST / (self.sigma * self.c * self.c);
        if self.initial_layer && tau < 0.25 * h {
            let mut steps = Vec::new();
            let (mut s, mut hi) = (0.0, tau);
            while s + hi < h {
                steps.push(hi);
                s += hi;
                hi *= LAYER_RATIO;
            }
            let scale = h / s;
            let mut t = 0.0;
            for st in &steps[..steps.len() - 1] {
                t += st * scale;
                out.push((t, false));
            }
        }
        for i in 1..=n {
            out.push((i as f64 * h, true));
        }
        out
    }
}

struct Tables {
    block: Vec<EtdCoef>,
    damp: EtdCoef,
}

/// Euler-Maxwell integrator: exact per-mode Maxwell-Ohm propagation with
/// fourth-order exponential time differencing of the nonlinear terms.
pub struct EmSolver {
    config: PlasmaConfig,
    shell: Vec<u32>,
    radii: Vec<f64>,
    cache: Vec<(u64, Arc<Tables>)>,
}

/// Field components in the per-mode frame `(e, e_par, p)`.
struct Modal {
    e: Vec<Complex64>,
    ep: Vec<Complex64>,
    p: Vec<Complex64>,
}

/// Coefficient selector, weight and operand of one ETD stage term.
type Term<'a> = (fn(&EtdCoef) -> &[f64; 4], f64, &'a Modal);

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const NONE: u32 = u32::MAX;

impl EmSolver {
    pub fn new(config: &PlasmaConfig) -> Result<Self> {
        config.validate()?;
        let g = &config.grid;
        let mut index: HashMap<i64, u32> = HashMap::new();
        let mut radii = Vec::new();
        let mut shell = vec![NONE; g.len()];
        let n = g.n();
        for (idx, s) in shell.iter_mut().enumerate() {
            if g.touches_nyquist(idx) {
                continue;
            }
            let (m1, m2) = (g.mode(idx % n), g.mode(idx / n));
            let key = m1 * m1 + m2 * m2;
            *s = *index.entry(key).or_insert_with(|| {
                radii.push(g.k_fundamental() * (key as f64).sqrt());
                (radii.len() - 1) as u32
            });
        }
        Ok(EmSolver {
            config: config.clone(),
            shell,
            radii,
            cache: Vec::new(),
        })
    }

    pub fn config(&self) -> &PlasmaConfig {
        &self.config
    }

    fn tables(&mut self, h: f64) -> Arc<Tables> {
        let key = h.to_bits();
        if let Some((_, t)) = self.cache.iter().find(|(k, _)| *k == key) {
            return t.clone();
        }
        let (s, c) = (self.config.sigma, self.config.c);
        let t = Arc::new(Tables {
            block: crate::par::map(&self.radii, |&kk| EtdCoef::new(&block(s, c, kk), h)),
            damp: EtdCoef::scalar(-s * c * c, h),
        });
        if self.cache.len() >= 96 {
            self.cache.remove(0);
        }
        self.cache.push((key, t.clone()));
        t
    }

    fn to_modal(&self, e1: &SpectralField, e2: &SpectralField, b: &SpectralField) -> Modal {
        let g = &self.config.grid;
        let len = g.len();
        let mut m = Modal {
            e: vec![Complex64::new(0.0, 0.0); len],
            ep: vec![Complex64::new(0.0, 0.0); len],
            p: vec![Complex64::new(0.0, 0.0); len],
        };
        for idx in 0..len {
            if self.shell[idx] == NONE {
                continue;
            }
            let (x1, x2, y) = (e1.coeffs()[idx], e2.coeffs()[idx], b.coeffs()[idx]);
            let (k1, k2) = g.wavevector(idx);
            let kk = k1.hypot(k2);
            if kk == 0.0 {
                m.e[idx] = x1;
                m.ep[idx] = x2;
            } else {
                let (n1, n2) = (k1 / kk, k2 / kk);
                m.e[idx] = x2 * n1 - x1 * n2;
                m.ep[idx] = x1 * n1 + x2 * n2;
            }
            m.p[idx] = I * y;
        }
        m
    }

    fn unpack_modal(&self, m: &Modal) -> (SpectralField, SpectralField, SpectralField) {
        let g = &self.config.grid;
        let len = g.len();
        let mut e1 = vec![Complex64::new(0.0, 0.0); len];
        let mut e2 = e1.clone();
        let mut b = e1.clone();
        for idx in 0..len {
            if self.shell[idx] == NONE {
                continue;
            }
            let (k1, k2) = g.wavevector(idx);
            let kk = k1.hypot(k2);
            if kk == 0.0 {
                e1[idx] = m.e[idx];
                e2[idx] = m.ep[idx];
            } else {
                let (n1, n2) = (k1 / kk, k2 / kk);
                e1[idx] = m.ep[idx] * n1 - m.e[idx] * n2;
                e2[idx] = m.e[idx] * n1 + m.ep[idx] * n2;
            }
            b[idx] = -I * m.p[idx];
        }
        (
            SpectralField::from_coeffs(g, e1),
            SpectralField::from_coeffs(g, e2),
            SpectralField::from_coeffs(g, b),
        )
    }

    /// `sum_i M_i(x_i)` over pairs of a coefficient selector and a modal
    /// vector, evaluated mode by mode.
    fn combine(&self, tab: &Tables, terms: &[Term<'_>]) -> Modal {
        let len = self.shell.len();
        let mut out = Modal {
            e: vec![Complex64::new(0.0, 0.0); len],
            ep: vec![Complex64::new(0.0, 0.0); len],
            p: vec![Complex64::new(0.0, 0.0); len],
        };
        for (sel, w, x) in terms {
            let d = sel(&tab.damp)[0] * w;
            for idx in 0..len {
                let s = self.shell[idx];
                if s == NONE {
                    continue;
                }
                let m = sel(&tab.block[s as usize]);
                let (a, b) = apply(m, x.e[idx], x.p[idx]);
                out.e[idx] += a * *w;
                out.p[idx] += b * *w;
                out.ep[idx] += x.ep[idx] * d;
            }
        }
        out
    }

    /// `u + P(E x B) / c`, the total momentum density. Its evolution carries
    /// no factor of `c`, so the velocity inherits no stiffness from the
    /// Lorentz force.
    fn momentum(
        &self,
        u1: &SpectralField,
        u2: &SpectralField,
        e1: &SpectralField,
        e2: &SpectralField,
        b: &SpectralField,
        sign: f64,
    ) -> Result<(SpectralField, SpectralField)> {
        let (x1, x2) = cross_vertical(e1, e2, b)?;
        let (p1, p2) = leray_project(&x1, &x2);
        let k = sign / self.config.c;
        let (mut m1, mut m2) = (u1.clone(), u2.clone());
        m1.axpy(k, &p1);
        m2.axpy(k, &p2);
        Ok((m1, m2))
    }

    /// Explicit terms on `(m, E, b)`: `-P(u.grad u + E x curl E)` for the
    /// momentum and `-s c P(u x B)` for the field.
    fn nonlinear(&self, f: &[SpectralField]) -> Result<(SpectralField, SpectralField, Modal)> {
        let (e1, e2, b) = (&f[2], &f[3], &f[4]);
        let (s, c) = (self.config.sigma, self.config.c);
        let (u1, u2) = self.momentum(&f[0], &f[1], e1, e2, b, -1.0)?;
        let (x1, x2) = cross_vertical(&u1, &u2, b)?;
        let (p1, p2) = leray_project(&x1, &x2);
        let (mut f1, mut f2) = cross_vertical(e1, e2, &curl(e1, e2))?;
        f1.axpy(1.0, &advect(&u1, &u2, &u1)?);
        f2.axpy(1.0, &advect(&u1, &u2, &u2)?);
        let (n1, n2) = leray_project(&f1, &f2);
        let z = SpectralField::zeros(b.grid());
        let ne = self.to_modal(&(&p1 * (-s * c)), &(&p2 * (-s * c)), &z);
        Ok((-&n1, -&n2, ne))
    }

    fn etd_step(&mut self, h: f64, w: &[SpectralField]) -> Result<Vec<SpectralField>> {
        let tab = self.tables(h);
        let (m1, m2) = self.momentum(&w[0], &w[1], &w[2], &w[3], &w[4], 1.0)?;
        let w = &[m1, m2, w[2].clone(), w[3].clone(), w[4].clone()][..];
        let wm = self.to_modal(&w[2], &w[3], &w[4]);
        let pack = |me: &Self, u1: SpectralField, u2: SpectralField, m: &Modal| {
            let (e1, e2, b) = me.unpack_modal(m);
            vec![u1, u2, e1, e2, b]
        };
        let lin = |u: &SpectralField, a: f64, n: &SpectralField| {
            let mut o = u.clone();
            o.axpy(a, n);
            o
        };
        let e2: fn(&EtdCoef) -> &[f64; 4] = |c| &c.e2;
        let q: fn(&EtdCoef) -> &[f64; 4] = |c| &c.q;

        let (n0u1, n0u2, n0) = self.nonlinear(w)?;
        let am = self.combine(&tab, &[(e2, 1.0, &wm), (q, 1.0, &n0)]);
        let a = pack(
            self,
            lin(&w[0], 0.5 * h, &n0u1),
            lin(&w[1], 0.5 * h, &n0u2),
            &am,
        );

        let (nau1, nau2, na) = self.nonlinear(&a)?;
        let bm = self.combine(&tab, &[(e2, 1.0, &wm), (q, 1.0, &na)]);
        let b = pack(
            self,
            lin(&w[0], 0.5 * h, &nau1),
            lin(&w[1], 0.5 * h, &nau2),
            &bm,
        );

        let (nbu1, nbu2, nb) = self.nonlinear(&b)?;
        let cm = self.combine(&tab, &[(e2, 1.0, &am), (q, 2.0, &nb), (q, -1.0, &n0)]);
        let cu1 = {
            let mut o = lin(&a[0], h, &nbu1);
            o.axpy(-0.5 * h, &n0u1);
            o
        };
        let cu2 = {
            let mut o = lin(&a[1], h, &nbu2);
            o.axpy(-0.5 * h, &n0u2);
            o
        };
        let cs = pack(self, cu1, cu2, &cm);

        let (ncu1, ncu2, nc) = self.nonlinear(&cs)?;
        let mut out_m = self.combine(
            &tab,
            &[
                (|c| &c.e, 1.0, &wm),
                (|c| &c.f1, 1.0, &n0),
                (|c| &c.f2, 2.0, &na),
                (|c| &c.f2, 2.0, &nb),
                (|c| &c.f3, 1.0, &nc),
            ],
        );
        let rk = |w: &SpectralField, n: [&SpectralField; 4]| {
            let mut o = w.clone();
            o.axpy(h / 6.0, n[0]);
            o.axpy(h / 3.0, n[1]);
            o.axpy(h / 3.0, n[2]);
            o.axpy(h / 6.0, n[3]);
            o
        };
        let u1 = rk(&w[0], [&n0u1, &nau1, &nbu1, &ncu1]);
        let u2 = rk(&w[1], [&n0u2, &nau2, &nbu2, &ncu2]);
        // keep only the mean of the longitudinal electric field
        for (idx, x) in out_m.ep.iter_mut().enumerate() {
            if idx != 0 {
                *x = Complex64::new(0.0, 0.0);
            }
        }
        let (e1, e2, b) = self.unpack_modal(&out_m);
        let (u1, u2) = self.momentum(&u1, &u2, &e1, &e2, &b, -1.0)?;
        let (u1, u2) = leray_project(&u1, &u2);
        Ok(vec![u1, u2, e1, e2, b])
    }

    /// Advances by `h` (CFL halving on the advective scale only).
    pub fn advance(&mut self, state: &EMState, h: f64) -> Result<EMState> {
        state.check()?;
        self.config.grid.check_same(state.grid())?;
        let w: Vec<SpectralField> = state.fields().iter().map(|f| (*f).clone()).collect();
        let (dx, cfl, mh) = (
            self.config.grid.dx(),
            self.config.cfl,
            self.config.max_halvings,
        );
        let mut err = None;
        let speed = |w: &[SpectralField]| max_speed(&w[0], &w[1]);
        let mut step = |_t: f64, h: f64, w: &[SpectralField]| match self.etd_step(h, w) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                w.to_vec()
            }
        };
        let out = cfl_advance(w, state.t, h, dx, cfl, mh, &speed, &mut step)?;
        if let Some(e) = err {
            return Err(e);
        }
        let mut it = out.into_iter();
        let mut next = || it.next().expect("five fields");
        Ok(EMState {
            u1: next(),
            u2: next(),
            e1: next(),
            e2: next(),
            b: next(),
            t: state.t + h,
        })
    }
}

/// One step of size `config.dt`.
pub fn step_em(state: &EMState, config: &PlasmaConfig) -> Result<EMState> {
    EmSolver::new(config)?.advance(state, config.dt)
}

/// Per-snapshot diagnostics of an Euler-Maxwell run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EmRow {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub ampere_l2: f64,
    pub pg_l2: f64,
    pub pg_h1: f64,
    pub curl_g_linf: f64,
    pub div_violation: f64,
}

/// Lorentz-forcing diagnostics: `g = (j - curl B) x B`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LorentzDiag {
    pub pg_l2: f64,
    pub pg_h1: f64,
    pub curl_g_linf: f64,
    /// `sup |(curl B) . grad b|`, zero up to rounding
    pub identity_defect: f64,
}

fn h1(a: &SpectralField, b: &SpectralField) -> f64 {
    let l2 = a.l2_norm_sq() + b.l2_norm_sq();
    let d =
        sobolev_norm(a, 1.0).unwrap_or(0.0).powi(2) + sobolev_norm(b, 1.0).unwrap_or(0.0).powi(2);
    (l2 + d).sqrt()
}

pub fn lorentz_forcing_diag(state: &EMState, config: &PlasmaConfig) -> Result<LorentzDiag> {
    let (j1, j2) = ohm_current(state, config)?;
    let (c1, c2) = curl_of_vertical(&state.b);
    let (g1, g2) = cross_vertical(&(&j1 - &c1), &(&j2 - &c2), &state.b)?;
    let (p1, p2) = leray_project(&g1, &g2);
    let cg = curl(&g1, &g2);
    let d1 = derivative(&state.b, 0);
    let d2 = derivative(&state.b, 1);
    let (rc1, rc2) = SpectralField::to_real_pair(&c1, &c2);
    let (rd1, rd2) = SpectralField::to_real_pair(&d1, &d2);
    let defect = (0..rc1.values().len())
        .map(|i| (rc1.values()[i] * rd1.values()[i] + rc2.values()[i] * rd2.values()[i]).abs())
        .fold(0.0, f64::max);
    Ok(LorentzDiag {
        pg_l2: (p1.l2_norm_sq() + p2.l2_norm_sq()).sqrt(),
        pg_h1: h1(&p1, &p2),
        curl_g_linf: lp_norm(&cg, f64::INFINITY)?,
        identity_defect: defect,
    })
}

/// Ampere residual `curl B - j` of one state.
pub fn ampere_field(
    state: &EMState,
    config: &PlasmaConfig,
) -> Result<(SpectralField, SpectralField)> {
    let (j1, j2) = ohm_current(state, config)?;
    let (c1, c2) = curl_of_vertical(&state.b);
    Ok((&c1 - &j1, &c2 - &j2))
}

/// Time series of `||curl B - j||` in `L^2` and in `H^{eta-1}` (homogeneous)
/// with their trapezoidal `L^2`-in-time aggregates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AmpereSeries {
    pub t: Vec<f64>,
    pub l2: Vec<f64>,
    pub hdot: Vec<f64>,
    pub l2_aggregate: f64,
    pub hdot_aggregate: f64,
}

pub fn ampere_residual(traj: &[EMState], config: &PlasmaConfig, eta: f64) -> Result<AmpereSeries> {
    if !(1.0..=2.0).contains(&eta) {
        return Err(LabError::UnsupportedExponent(format!(
            "eta = {eta} outside [1, 2]"
        )));
    }
    let rows = crate::par::map(traj, |s| -> Result<(f64, f64)> {
        let (r1, r2) = ampere_field(s, config)?;
        let l2 = (r1.l2_norm_sq() + r2.l2_norm_sq()).sqrt();
        let hd =
            (sobolev_norm(&r1, eta - 1.0)?.powi(2) + sobolev_norm(&r2, eta - 1.0)?.powi(2)).sqrt();
        Ok((l2, hd))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let t: Vec<f64> = traj.iter().map(|s| s.t).collect();
    let l2: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let hdot: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let agg = |y: &[f64]| {
        let sq: Vec<f64> = y.iter().map(|v| v * v).collect();
        crate::lp::cumulative_trapezoid(&t, &sq)
            .last()
            .copied()
            .unwrap_or(0.0)
            .sqrt()
    };
    Ok(AmpereSeries {
        l2_aggregate: agg(&l2),
        hdot_aggregate: agg(&hdot),
        t: t.clone(),
        l2,
        hdot,
    })
}

/// Stored snapshots of an Euler-Maxwell solve with diagnostics.
#[derive(Clone, Debug)]
pub struct EmTrajectory {
    pub states: Vec<EMState>,
    pub rows: Vec<EmRow>,
    pub config: PlasmaConfig,
}

fn row(state: &EMState, config: &PlasmaConfig, dissipation: f64) -> Result<EmRow> {
    let (r1, r2) = ampere_field(state, config)?;
    let lz = lorentz_forcing_diag(state, config)?;
    let (j1, j2) = ohm_current(state, config)?;
    Ok(EmRow {
        t: state.t,
        energy: em_energy(state),
        dissipation,
        ampere_l2: (r1.l2_norm_sq() + r2.l2_norm_sq()).sqrt(),
        pg_l2: lz.pg_l2,
        pg_h1: lz.pg_h1,
        curl_g_linf: lz.curl_g_linf,
        div_violation: state.divergence_violation().max(div_rel(&j1, &j2)),
    })
}

/// `(2/s) ||j||^2`.
pub fn dissipation_rate(state: &EMState, config: &PlasmaConfig) -> Result<f64> {
    let (j1, j2) = ohm_current(state, config)?;
    Ok(2.0 / config.sigma * (j1.l2_norm_sq() + j2.l2_norm_sq()))
}

/// Runs the schedule of `config`, calling `observe(state, dissipation)` at
/// every schedule point (graded start-up points included). The dissipation
/// integral is accumulated by trapezoid over all points.
pub fn solve_em_with<F>(state0: &EMState, config: &PlasmaConfig, mut observe: F) -> Result<()>
where
    F: FnMut(&EMState, f64, bool) -> Result<()>,
{
    let mut solver = EmSolver::new(config)?;
    let sched = config.schedule();
    let mut state = EMState {
        t: 0.0,
        ..state0.clone()
    };
    let mut rate = dissipation_rate(&state, config)?;
    let mut diss = 0.0;
    observe(&state, diss, true)?;
    let mut nominal = 0usize;
    for w in sched.windows(2) {
        let (t1, is_nominal) = w[1];
        let mut next = solver.advance(&state, t1 - w[0].0)?;
        next.t = t1;
        let r = dissipation_rate(&next, config)?;
        diss += 0.5 * (t1 - w[0].0) * (rate + r);
        rate = r;
        state = next;
        let mut store = false;
        if is_nominal {
            nominal += 1;
            store = nominal.is_multiple_of(config.snapshot_stride) || nominal == config.n_steps();
        }
        observe(&state, diss, store)?;
    }
    Ok(())
}

/// Solves from `state0`, storing nominal snapshots every `snapshot_stride`
/// steps with their diagnostics rows.
pub fn solve_em(state0: &EMState, config: &PlasmaConfig) -> Result<EmTrajectory> {
    let mut states = Vec::new();
    let mut diss = Vec::new();
    solve_em_with(state0, config, |s, d, store| {
        if store {
            states.push(s.clone());
            diss.push(d);
        }
        Ok(())
    })?;
    let idx: Vec<usize> = (0..states.len()).collect();
    let rows = crate::par::map(&idx, |&i| row(&states[i], config, diss[i]));
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(EmTrajectory {
        states,
        rows,
        config: config.clone(),
    })
}

/// `||b||_{H^1}`-type helper shared with the harness.
pub(crate) fn h1_pair(a: &SpectralField, b: &SpectralField) -> f64 {
    h1(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plasma::mode_propagator;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type C3 = [[Complex64; 3]; 3];

    fn mul(a: &C3, b: &C3) -> C3 {
        let mut o = [[Complex64::new(0.0, 0.0); 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                o[r][c] = (0..3).map(|q| a[r][q] * b[q][c]).sum();
            }
        }
        o
    }

    /// exp(A) by Taylor series with scaling and squaring.
    fn expm_series(a: &C3) -> C3 {
        let norm: f64 = a.iter().flatten().map(|z| z.norm()).sum();
        let s = (norm / 0.25).log2().ceil().max(0.0) as i32;
        let sc = 0.5f64.powi(s);
        let a: C3 = a.map(|r| r.map(|z| z * sc));
        let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
        let mut term = out;
        for i in 0..3 {
            out[i][i] = Complex64::new(1.0, 0.0);
            term[i][i] = Complex64::new(1.0, 0.0);
        }
        for n in 1..30 {
            term = mul(&term, &a).map(|r| r.map(|z| z / n as f64));
            for r in 0..3 {
                for c in 0..3 {
                    out[r][c] += term[r][c];
                }
            }
        }
        for _ in 0..s {
            out = mul(&out, &out);
        }
        out
    }

    #[test]
    fn propagator_matches_series_oracle() {
        let i = Complex64::new(0.0, 1.0);
        for &(sigma, c) in &[(1.0, 10.0), (1.0, 100.0), (0.5, 3.0), (2.0, 1.0)] {
            for &(k1, k2) in &[(0.0, 0.0), (1.0, 0.0), (3.0, -4.0), (2.0, 7.0), (40.0, 1.0)] {
                // keep ||A t|| <= 10
                let norm = sigma * c * c + 2.0 * c * f64::hypot(k1, k2);
                let t = 10.0 / norm;
                let a: C3 = [
                    [(-sigma * c * c).into(), 0.0.into(), i * c * k2],
                    [0.0.into(), (-sigma * c * c).into(), -i * c * k1],
                    [i * c * k2, -i * c * k1, 0.0.into()],
                ];
                let want = expm_series(&a.map(|r| r.map(|z| z * t)));
                let got = mode_propagator(sigma, c, k1, k2, t);
                for r in 0..3 {
                    for col in 0..3 {
                        let d = (want[r][col] - got[r][col]).norm();
                        assert!(
                            d < 1e-12,
                            "s={sigma} c={c} k=({k1},{k2}) [{r}][{col}] {d:e}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn damped_oscillation_closed_form() {
        // u = 0, E = 0, b = sin x1, s = 1: p'' + c^2 s p' + c^2 p = 0, p = i b
        for c in [10.0f64, 100.0] {
            let t: f64 = 0.1;
            let disc = (c.powi(4) - 4.0 * c * c).sqrt();
            let r1 = 0.5 * (-c * c + disc);
            let r2 = 0.5 * (-c * c - disc);
            let ratio = (r2 * (r1 * t).exp() - r1 * (r2 * t).exp()) / (r2 - r1);
            let e_ratio = r1 * r2 * ((r1 * t).exp() - (r2 * t).exp()) / (c * (r2 - r1));
            let prop = mode_propagator(1.0, c, 1.0, 0.0, t);
            assert!((prop[2][2].re - ratio).abs() < 1e-10);
            // k_perp = (0, 1), so E2 = e = p'/c and b = -i p
            let b_to_e2 = prop[1][2];
            assert!((b_to_e2 * Complex64::new(0.0, -1.0) - e_ratio).norm() < 1e-10);
        }
    }

    fn random_state(g: &Grid2D, seed: u64, amp_b: f64) -> EMState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amp = |k: f64| if k <= 5.0 { 1.0 / (1.0 + k * k) } else { 0.0 };
        let w = SpectralField::random(g, &mut rng, amp);
        let b = &SpectralField::random(g, &mut rng, amp) * amp_b;
        EMState::from_vorticity(&w, &b)
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = Grid2D::periodic(16).unwrap();
        let s = step_em(
            &EMState::zeros(&g),
            &PlasmaConfig::new(&g, 1.0, 100.0, 0.01, 0.1),
        )
        .unwrap();
        assert!(s.fields().iter().all(|f| f.max_abs_coeff() == 0.0));
    }

    #[test]
    fn energy_inequality_and_constraints() {
        let g = Grid2D::periodic(32).unwrap();
        let s0 = random_state(&g, 5, 1.0);
        let cfg = PlasmaConfig::new(&g, 1.0, 100.0, 0.01, 0.2);
        let tr = solve_em(&s0, &cfg).unwrap();
        let e0 = tr.rows[0].energy;
        for r in &tr.rows {
            assert!(r.energy + r.dissipation <= e0 * 1.005, "{r:?}");
            assert!(r.energy + r.dissipation >= e0 * 0.99, "{r:?}");
            assert!(r.div_violation < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn ampere_and_lorentz_vanish_on_matched_current() {
        let g = Grid2D::periodic(32).unwrap();
        let cfg = PlasmaConfig::new(&g, 2.0, 50.0, 0.01, 0.1);
        let mut s = EMState::zeros(&g);
        s.b = random_state(&g, 9, 1.0).b;
        let (c1, c2) = curl_of_vertical(&s.b);
        s.e1 = &c1 * (1.0 / (cfg.sigma * cfg.c));
        s.e2 = &c2 * (1.0 / (cfg.sigma * cfg.c));
        let a = ampere_residual(&[s.clone()], &cfg, 1.5).unwrap();
        assert!(a.l2[0] < 1e-12 && a.hdot[0] < 1e-12);
        let lz = lorentz_forcing_diag(&s, &cfg).unwrap();
        assert!(lz.pg_l2 < 1e-12 && lz.curl_g_linf < 1e-12);
        assert!(lz.identity_defect < 1e-12);
        assert!(ampere_residual(&[s], &cfg, 0.5).is_err());
    }

    #[test]
    fn ampere_residual_of_linear_state_matches_propagator() {
        // u = 0 keeps the nonlinear terms at O(t) in u; check the residual at
        // t = 0 where the state is exactly the propagated one
        let g = Grid2D::periodic(16).unwrap();
        let (sigma, c, t) = (1.0, 10.0, 0.05);
        let p = mode_propagator(sigma, c, 1.0, 0.0, t);
        let mut s = EMState::zeros(&g);
        // b0 = sin x1 has coefficient -i/2 at k = (1, 0)
        let b0 = Complex64::new(0.0, -0.5);
        let set = |f: &mut SpectralField, z: Complex64| {
            let n = g.n();
            f.coeffs_mut()[1] = z;
            f.coeffs_mut()[n - 1] = z.conj();
        };
        set(&mut s.e1, p[0][2] * b0);
        set(&mut s.e2, p[1][2] * b0);
        set(&mut s.b, p[2][2] * b0);
        let cfg = PlasmaConfig::new(&g, sigma, c, 0.01, 0.1);
        let a = ampere_residual(&[s], &cfg, 1.0).unwrap();
        // closed form: curl B - s c E at k = (1, 0) is (0, -i b - s c E2)
        let r2 = Complex64::new(0.0, -1.0) * p[2][2] * b0 - sigma * c * p[1][2] * b0;
        let want = (2.0 * r2.norm_sqr()).sqrt() * g.l();
        assert!((a.l2[0] - want).abs() < 1e-8 * want.max(1.0));
    }

    #[test]
    fn schedule_lands_on_nominal_times() {
        let g = Grid2D::periodic(16).unwrap();
        let cfg = PlasmaConfig::new(&g, 1.0, 100.0, 0.01, 0.05);
        let s = cfg.schedule();
        let nominal: Vec<f64> = s.iter().filter(|p| p.1).map(|p| p.0).collect();
        assert_eq!(nominal.len(), 6);
        assert_eq!(*nominal.last().unwrap(), 0.05);
        assert!(s.len() > 20);
        assert!(s.windows(2).all(|w| w[1].0 > w[0].0));
        let mut off = cfg.clone();
        off.initial_layer = false;
        assert_eq!(off.schedule().len(), 6);
    }
}
