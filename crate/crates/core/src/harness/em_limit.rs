use super::fit::{fit_rate, RateFit, RateModel};
use super::study::{tag, RateStudyConfig, StudyKind};
use crate::error::{LabError, Result};
use crate::fluid::make_initial_data;
use crate::plasma::{
    ampere_field, dissipation_rate, em_energy, h1_pair, lorentz_forcing_diag, ohm_current, EMState,
    EmSolver, MHDState, MhdSolver, PlasmaConfig,
};
use crate::spectral::{curl_of_vertical, sobolev_norm};

const REFERENCE_REFINEMENT: usize = 4;
const FLOOR_MARGIN: f64 = 10.0;

/// Error measures of one Euler-Maxwell run against the MHD reference.
#[derive(Clone, Debug, PartialEq)]
pub struct EmLimitRun {
    pub c: f64,
    /// `||u^c - u||_{L^inf_t H^1}`
    pub u_h1: f64,
    /// `||b^c - b||_{L^inf_t L^2}`
    pub b_l2: f64,
    /// `||b^c - b||_{L^2_t H^1 dot}`
    pub b_h1_l2t: f64,
    /// `||j^c - curl B||_{L^2_t L^2}`
    pub j_l2t: f64,
    /// `||curl B^c - j^c||_{L^2_t L^2}`
    pub ampere_l2t: f64,
    /// `||curl B^c - j^c||_{L^2_t H^{eta-1} dot}`
    pub ampere_hdot_l2t: f64,
    /// `||P g^c||_{L^1_t H^1}`
    pub pg_h1_l1t: f64,
    /// largest `(energy + dissipation) / energy_0 - 1`
    pub energy_excess: f64,
    pub div_max: f64,
    /// `sup_t ||u_MHD(dt) - u_MHD(dt/4)||_{H^1}` and the same for `b` in `L^2`
    pub floor_u: f64,
    pub floor_b: f64,
    /// `(t, energy, dissipation, ||du||_{H^1}, ||db||_{L^2}, ampere_l2, pg_l2,
    /// curl_g_linf, div_violation)`
    pub curve: Vec<[f64; 9]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmLimitReport {
    pub runs: Vec<EmLimitRun>,
    /// fits in the parameter `1/c`
    pub fit_u: RateFit,
    pub fit_b_l2: RateFit,
    pub fit_b_h1: RateFit,
    pub fit_j: RateFit,
    pub fit_ampere: RateFit,
    /// `ampere_l2t(c_i) / ampere_l2t(c_{i+1})`
    pub ampere_ratios: Vec<f64>,
}

/// Euler-Maxwell runs over the `c` sweep with `E_0 = 0` against MHD
/// references stepped on the same schedule at a quarter step.
pub fn run_em_limit_study(config: &RateStudyConfig) -> Result<EmLimitReport> {
    config.validate(StudyKind::EmLimit)?;
    let runs = crate::par::map(&config.sweep, |&c| {
        em_limit_run(config, c).map_err(|e| tag(c, e))
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    for r in &runs {
        if FLOOR_MARGIN * r.floor_u > r.u_h1 || FLOOR_MARGIN * r.floor_b > r.b_l2 {
            return Err(tag(
                r.c,
                LabError::Resolution(format!(
                    "MHD self-convergence ({:.3e}, {:.3e}) not {FLOOR_MARGIN}x below the errors ({:.3e}, {:.3e})",
                    r.floor_u, r.floor_b, r.u_h1, r.b_l2
                )),
            ));
        }
    }
    let fit = |f: fn(&EmLimitRun) -> f64| {
        let rows: Vec<(f64, f64)> = runs.iter().map(|r| (1.0 / r.c, f(r))).collect();
        fit_rate(&rows, RateModel::PurePower)
    };
    Ok(EmLimitReport {
        fit_u: fit(|r| r.u_h1)?,
        fit_b_l2: fit(|r| r.b_l2)?,
        fit_b_h1: fit(|r| r.b_h1_l2t)?,
        fit_j: fit(|r| r.j_l2t)?,
        fit_ampere: fit(|r| r.ampere_l2t)?,
        ampere_ratios: runs
            .windows(2)
            .map(|w| w[0].ampere_l2t / w[1].ampere_l2t)
            .collect(),
        runs,
    })
}

struct Sample {
    du_h1: f64,
    db_l2: f64,
    db_h1_sq: f64,
    dj_sq: f64,
    amp_sq: f64,
    amp_hdot_sq: f64,
    pg_h1: f64,
    rate: f64,
    row: [f64; 9],
}

/// A single member of the sweep.
pub fn em_limit_run(config: &RateStudyConfig, c: f64) -> Result<EmLimitRun> {
    let g = &config.grid;
    let w0 = config.omega0()?;
    let b0 = make_initial_data(&config.magnetic, g)?;
    let mut pc = PlasmaConfig::new(g, config.sigma, c, config.dt, config.t_final);
    pc.cfl = config.cfl;
    let mut em = EmSolver::new(&pc)?;
    let mut fine = MhdSolver::new(&pc)?;
    let mut coarse = MhdSolver::new(&pc)?;
    let mut s_em = EMState::from_vorticity(&w0, &b0);
    let mut s_fine = MHDState::new(&w0, &b0, 0.0);
    let mut s_coarse = s_fine.clone();

    let eta = config.eta;
    let sample = |e: &EMState, m: &MHDState, diss: f64| -> Result<Sample> {
        let du1 = &e.u1 - &m.u1;
        let du2 = &e.u2 - &m.u2;
        let db = &e.b - &m.b;
        let (j1, j2) = ohm_current(e, &pc)?;
        let (c1, c2) = curl_of_vertical(&m.b);
        let dj = (&j1 - &c1).l2_norm_sq() + (&j2 - &c2).l2_norm_sq();
        let (r1, r2) = ampere_field(e, &pc)?;
        let amp = r1.l2_norm_sq() + r2.l2_norm_sq();
        let amp_h = sobolev_norm(&r1, eta - 1.0)?.powi(2) + sobolev_norm(&r2, eta - 1.0)?.powi(2);
        let lz = lorentz_forcing_diag(e, &pc)?;
        let du_h1 = h1_pair(&du1, &du2);
        let energy = em_energy(e);
        Ok(Sample {
            du_h1,
            db_l2: db.l2_norm(),
            db_h1_sq: sobolev_norm(&db, 1.0)?.powi(2),
            dj_sq: dj,
            amp_sq: amp,
            amp_hdot_sq: amp_h,
            pg_h1: lz.pg_h1,
            rate: dissipation_rate(e, &pc)?,
            row: [
                e.t,
                energy,
                diss,
                du_h1,
                db.l2_norm(),
                amp.sqrt(),
                lz.pg_l2,
                lz.curl_g_linf,
                e.divergence_violation(),
            ],
        })
    };

    let mut prev = sample(&s_em, &s_fine, 0.0)?;
    let e0 = prev.row[1];
    let mut run = EmLimitRun {
        c,
        u_h1: prev.du_h1,
        b_l2: prev.db_l2,
        b_h1_l2t: 0.0,
        j_l2t: 0.0,
        ampere_l2t: 0.0,
        ampere_hdot_l2t: 0.0,
        pg_h1_l1t: 0.0,
        energy_excess: 0.0,
        div_max: s_em.divergence_violation(),
        floor_u: 0.0,
        floor_b: 0.0,
        curve: vec![prev.row],
    };
    let (mut acc_b, mut acc_j, mut acc_a, mut acc_ah, mut diss) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let sched = pc.schedule();
    let mut nominal = 0usize;
    for w in sched.windows(2) {
        let (t1, h) = (w[1].0, w[1].0 - w[0].0);
        s_em = em.advance(&s_em, h)?;
        s_em.t = t1;
        for k in 1..=REFERENCE_REFINEMENT {
            s_fine = fine.advance(&s_fine, h / REFERENCE_REFINEMENT as f64)?;
            if k == REFERENCE_REFINEMENT {
                s_fine.t = t1;
            }
        }
        s_coarse = coarse.advance(&s_coarse, h)?;
        s_coarse.t = t1;

        let rate_next = dissipation_rate(&s_em, &pc)?;
        diss += 0.5 * h * (prev.rate + rate_next);
        let cur = sample(&s_em, &s_fine, diss)?;
        let trap = |a: f64, b: f64| 0.5 * h * (a + b);
        acc_b += trap(prev.db_h1_sq, cur.db_h1_sq);
        acc_j += trap(prev.dj_sq, cur.dj_sq);
        acc_a += trap(prev.amp_sq, cur.amp_sq);
        acc_ah += trap(prev.amp_hdot_sq, cur.amp_hdot_sq);
        run.pg_h1_l1t += trap(prev.pg_h1, cur.pg_h1);
        run.u_h1 = run.u_h1.max(cur.du_h1);
        run.b_l2 = run.b_l2.max(cur.db_l2);
        run.energy_excess = run.energy_excess.max((cur.row[1] + diss) / e0 - 1.0);
        run.div_max = run.div_max.max(cur.row[8]);
        let fu = h1_pair(&(&s_coarse.u1 - &s_fine.u1), &(&s_coarse.u2 - &s_fine.u2));
        run.floor_u = run.floor_u.max(fu);
        run.floor_b = run.floor_b.max((&s_coarse.b - &s_fine.b).l2_norm());
        if w[1].1 {
            nominal += 1;
            if nominal.is_multiple_of(config.sample_stride) || nominal == pc.n_steps() {
                run.curve.push(cur.row);
            }
        }
        prev = cur;
    }
    run.b_h1_l2t = acc_b.sqrt();
    run.j_l2t = acc_j.sqrt();
    run.ampere_l2t = acc_a.sqrt();
    run.ampere_hdot_l2t = acc_ah.sqrt();
    Ok(run)
}
