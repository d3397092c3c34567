use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::{json, Value};

use super::config::{config_hash, ExperimentConfig, ExperimentKind, FrameSpec};
use super::output::{Artifact, RunDir, RunStatus};
use crate::error::{LabError, Result};
use crate::fluid::{
    highfreq_energy_identity, make_initial_data, solve_with, transport_bound_check, Forcing,
    NormRow, Trajectory,
};
use crate::harness::{
    run_em_limit_study, run_inviscid_study, run_perturbation_study, RateFit, SteadyForcing,
};
use crate::lp::{j_decomposition, DyadicFrame};
use crate::spectral::Snapshot;

/// What a run left behind.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub dir: PathBuf,
    pub artifacts: Vec<Artifact>,
    pub error: Option<LabError>,
}

/// Runs `config` into `dir`. Validation problems are returned as errors
/// before anything is written; solver failures end up in the manifest and
/// in [`RunOutcome::error`].
pub fn run_experiment(config: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    let problems = config.problems();
    if !problems.is_empty() {
        return Err(LabError::Invalid(problems));
    }
    let mut run = RunDir::open(dir, &config_hash(config), config.kind.name())?;
    let result = match config.kind {
        ExperimentKind::Diagnostics => diagnostics(config, &mut run),
        ExperimentKind::Perturbation => perturbation(config, &mut run),
        ExperimentKind::Inviscid => inviscid(config, &mut run),
        ExperimentKind::EmLimit => em_limit(config, &mut run),
    };
    let (status, error) = match result {
        Ok(()) => (RunStatus::Complete, None),
        Err(LabError::Io(m)) => return Err(LabError::Io(m)),
        Err(e) => (RunStatus::Failed, Some(e)),
    };
    run.finish(status, error.as_ref().map(|e| e.to_string()))?;
    Ok(RunOutcome {
        status,
        dir: dir.to_path_buf(),
        artifacts: run.artifacts().to_vec(),
        error,
    })
}

fn fit_json(f: &RateFit) -> Value {
    json!({
        "model": f.model.name(),
        "alpha_hat": f.alpha_hat,
        "log_coefficient": f.log_coefficient,
        "residual_rms": f.residual_rms,
        "inconclusive": f.inconclusive,
    })
}

fn write_fits(run: &mut RunDir, fits: &[(&str, &RateFit)]) -> Result<()> {
    let mut w = run.csv(
        "fits.csv",
        &[
            "quantity",
            "model",
            "alpha_hat",
            "log_coefficient",
            "log_prefactor",
            "residual_rms",
            "inconclusive",
        ],
    )?;
    for (name, f) in fits {
        w.cells(&[
            name.to_string(),
            f.model.name().to_string(),
            super::config::fmt_f64(f.alpha_hat),
            f.log_coefficient
                .map_or(String::new(), super::config::fmt_f64),
            super::config::fmt_f64(f.log_prefactor),
            super::config::fmt_f64(f.residual_rms),
            (f.inconclusive as u8).to_string(),
        ])?;
    }
    w.finish()?;
    run.register("fits.csv")
}

fn summary(
    run: &mut RunDir,
    config: &ExperimentConfig,
    fits: &[(&str, &RateFit)],
    extra: Value,
) -> Result<()> {
    let mut f = serde_json::Map::new();
    for (name, fit) in fits {
        f.insert(name.to_string(), fit_json(fit));
    }
    let v = json!({
        "study": config.kind.name(),
        "config_hash": run.hash(),
        "fits": f,
        "results": extra,
    });
    run.json("summary.json", &v)
}

fn diagnostics(config: &ExperimentConfig, run: &mut RunDir) -> Result<()> {
    let grid = config.grid()?;
    let mut fc = config.fluid_config()?;
    let source: Option<Arc<dyn Forcing>> = match &config.forcing {
        Some(d) => Some(Arc::new(SteadyForcing(make_initial_data(d, &grid)?))),
        None => None,
    };
    if let Some(s) = &source {
        fc = fc.with_forcing(s.clone());
    }
    let theta = match config.frame {
        FrameSpec::Theta(t) => t,
        FrameSpec::Schedule => unreachable!("rejected by validation"),
    };
    let frame = DyadicFrame::new(theta, &grid)?;
    let omega0 = make_initial_data(&config.initial, &grid)?;

    let mut norms = run.csv(
        "diagnostics.csv",
        &["t", "enstrophy", "energy", "linf_vorticity", "h1_velocity"],
    )?;
    let mut states = Vec::new();
    let mut snaps = Vec::new();
    let solved = solve_with(&omega0, &fc, |s| {
        let r = NormRow::of(s);
        norms.row(&[r.t, r.enstrophy, r.energy, r.linf_vorticity, r.h1_velocity])?;
        let rel = format!("snapshots/state_{:05}.ylab", states.len());
        std::fs::create_dir_all(run.path("snapshots"))?;
        Snapshot::from_spectral(s.t, &[&s.omega, &s.u1, &s.u2])?.save(&run.path(&rel))?;
        snaps.push(rel);
        states.push(s.clone());
        Ok(())
    });
    norms.finish()?;
    run.register("diagnostics.csv")?;
    for rel in &snaps {
        run.register(rel)?;
    }
    solved?;

    let rows: Vec<NormRow> = states.iter().map(NormRow::of).collect();
    let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let js = j_decomposition(&states, &frame)?;
    let mut w = run.csv(
        "j_series.csv",
        &["t", "J", "J1", "J2", "J3", "bound_J2", "bound_J3"],
    )?;
    for i in 0..js.t.len() {
        w.row(&[
            js.t[i],
            js.j[i],
            js.j1[i],
            js.j2[i],
            js.j3[i],
            js.bound_j2[i],
            js.bound_j3[i],
        ])?;
    }
    w.finish()?;
    run.register("j_series.csv")?;

    let traj = Trajectory {
        states,
        config: fc,
        diagnostics: rows.clone(),
    };
    let eb = highfreq_energy_identity(&traj, &frame, source.as_deref())?;
    let mut w = run.csv(
        "energy_balance.csv",
        &[
            "t", "lhs", "rhs", "forcing", "viscous", "transfer", "residual",
        ],
    )?;
    for i in 0..eb.t.len() {
        w.row(&[
            eb.t[i],
            eb.lhs[i],
            eb.rhs[i],
            eb.forcing[i],
            eb.viscous[i],
            eb.transfer[i],
            eb.residual[i],
        ])?;
    }
    w.finish()?;
    run.register("energy_balance.csv")?;

    let col = |f: fn(&NormRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    run.curve(
        "plot/enstrophy.dat",
        "t enstrophy",
        &t,
        &col(|r| r.enstrophy),
    )?;
    run.curve("plot/energy.dat", "t energy", &t, &col(|r| r.energy))?;
    run.curve("plot/J.dat", "t J", &js.t, &js.j)?;
    run.curve(
        "plot/energy_residual.dat",
        "t residual",
        &eb.t,
        &eb.residual,
    )?;

    let tb2 = transport_bound_check(&traj, 2.0)?;
    let tbi = transport_bound_check(&traj, f64::INFINITY)?;
    let (e0, e1) = (rows[0].energy, rows[rows.len() - 1].energy);
    let (z0, z1) = (rows[0].enstrophy, rows[rows.len() - 1].enstrophy);
    let rel = |a: f64, b: f64| {
        if a == 0.0 {
            (b - a).abs()
        } else {
            (b - a).abs() / a
        }
    };
    summary(
        run,
        config,
        &[],
        json!({
            "theta": theta,
            "snapshots": t.len(),
            "energy_drift": rel(e0, e1),
            "enstrophy_drift": rel(z0, z1),
            "transport_excess_l2": tb2,
            "transport_excess_linf": tbi,
            "energy_identity_max_residual": eb.max_residual(),
            "max_abs_J": js.j.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        }),
    )
}

fn perturbation(config: &ExperimentConfig, run: &mut RunDir) -> Result<()> {
    let rep = run_perturbation_study(&config.study_config()?)?;
    let mut w = run.csv(
        "runs.csv",
        &[
            "eps",
            "theta",
            "sup_h1",
            "sup_l2",
            "split_holds",
            "max_split_ratio",
        ],
    )?;
    for r in &rep.runs {
        w.row(&[
            r.eps,
            r.theta,
            r.sup_h1,
            r.sup_l2,
            r.split_holds as u8 as f64,
            r.max_split_ratio,
        ])?;
    }
    w.finish()?;
    run.register("runs.csv")?;
    let mut w = run.csv(
        "curves.csv",
        &[
            "eps",
            "t",
            "h1_error",
            "low_actual",
            "low_bound",
            "high_norm",
        ],
    )?;
    for r in &rep.runs {
        for c in &r.curve {
            w.row(&[r.eps, c[0], c[1], c[2], c[3], c[4]])?;
        }
    }
    w.finish()?;
    run.register("curves.csv")?;
    for (i, r) in rep.runs.iter().enumerate() {
        let t: Vec<f64> = r.curve.iter().map(|c| c[0]).collect();
        let e: Vec<f64> = r.curve.iter().map(|c| c[1]).collect();
        run.curve(
            &format!("plot/h1_error_{i:02}.dat"),
            &format!("t h1_error eps={}", r.eps),
            &t,
            &e,
        )?;
    }
    let fits = [("h1", &rep.fit_h1), ("l2", &rep.fit_l2)];
    write_fits(run, &fits)?;
    let decreasing = rep.runs.windows(2).all(|w| w[1].sup_h1 < w[0].sup_h1);
    summary(
        run,
        config,
        &fits,
        json!({
            "floor_h1": rep.floor_h1,
            "split_holds": rep.runs.iter().all(|r| r.split_holds),
            "h1_error_strictly_decreasing": decreasing,
        }),
    )
}

fn inviscid(config: &ExperimentConfig, run: &mut RunDir) -> Result<()> {
    let rep = run_inviscid_study(&config.study_config()?)?;
    let mut w = run.csv("runs.csv", &["eps", "sup_l2", "sup_h1dot"])?;
    for r in &rep.runs {
        w.row(&[r.eps, r.sup_l2, r.sup_h1dot])?;
    }
    w.finish()?;
    run.register("runs.csv")?;
    let mut w = run.csv(
        "curves.csv",
        &["eps", "t", "l2_error", "h1dot_error", "besov_2", "besov_p"],
    )?;
    for r in &rep.runs {
        for c in &r.curve {
            w.row(&[r.eps, c[0], c[1], c[2], c[3], c[4]])?;
        }
    }
    w.finish()?;
    run.register("curves.csv")?;
    let mut w = run.csv("regularity.csv", &["s", "besov_n", "besov_2n"])?;
    for r in &rep.regularity_scan {
        w.row(r)?;
    }
    w.finish()?;
    run.register("regularity.csv")?;
    for (i, r) in rep.runs.iter().enumerate() {
        let t: Vec<f64> = r.curve.iter().map(|c| c[0]).collect();
        let e: Vec<f64> = r.curve.iter().map(|c| c[1]).collect();
        let b: Vec<f64> = r.curve.iter().map(|c| c[3]).collect();
        run.curve(
            &format!("plot/l2_error_{i:02}.dat"),
            &format!("t l2_error eps={}", r.eps),
            &t,
            &e,
        )?;
        run.curve(
            &format!("plot/besov_{i:02}.dat"),
            &format!("t besov_2 eps={}", r.eps),
            &t,
            &b,
        )?;
    }
    let fits = [
        ("l2", &rep.fit_l2),
        ("h1dot", &rep.fit_h1_pure),
        ("h1dot_log", &rep.fit_h1_log),
    ];
    write_fits(run, &fits)?;
    summary(
        run,
        config,
        &fits,
        json!({
            "s_t": rep.s_t,
            "predicted_h1_exponent": rep.predicted_h1_exponent,
            "h1_rate_meets_bar": rep.fit_h1_pure.alpha_hat >= rep.predicted_h1_exponent - 0.1,
            "log_fit_rms_improvement": rep.fit_h1_pure.residual_rms - rep.fit_h1_log.residual_rms,
            "floor_l2": rep.floor_l2,
            "floor_h1dot": rep.floor_h1dot,
        }),
    )
}

fn em_limit(config: &ExperimentConfig, run: &mut RunDir) -> Result<()> {
    let rep = run_em_limit_study(&config.study_config()?)?;
    let mut w = run.csv(
        "runs.csv",
        &[
            "c",
            "u_h1",
            "b_l2",
            "b_h1_l2t",
            "j_l2t",
            "ampere_l2t",
            "ampere_hdot_l2t",
            "pg_h1_l1t",
            "energy_excess",
            "div_max",
            "floor_u",
            "floor_b",
        ],
    )?;
    for r in &rep.runs {
        w.row(&[
            r.c,
            r.u_h1,
            r.b_l2,
            r.b_h1_l2t,
            r.j_l2t,
            r.ampere_l2t,
            r.ampere_hdot_l2t,
            r.pg_h1_l1t,
            r.energy_excess,
            r.div_max,
            r.floor_u,
            r.floor_b,
        ])?;
    }
    w.finish()?;
    run.register("runs.csv")?;
    for (i, r) in rep.runs.iter().enumerate() {
        let rel = format!("em_diagnostics_{i:02}.csv");
        let mut w = run.csv(
            &rel,
            &[
                "t",
                "energy",
                "dissipation",
                "ampere_residual_l2",
                "pg_l2",
                "curl_g_linf",
                "div_violations",
                "u_h1_error",
                "b_l2_error",
            ],
        )?;
        for c in &r.curve {
            w.row(&[c[0], c[1], c[2], c[5], c[6], c[7], c[8], c[3], c[4]])?;
        }
        w.finish()?;
        run.register(&rel)?;
        let t: Vec<f64> = r.curve.iter().map(|c| c[0]).collect();
        let a: Vec<f64> = r.curve.iter().map(|c| c[5]).collect();
        run.curve(
            &format!("plot/ampere_{i:02}.dat"),
            &format!("t ampere_l2 c={}", r.c),
            &t,
            &a,
        )?;
    }
    let fits = [
        ("u_h1", &rep.fit_u),
        ("b_l2", &rep.fit_b_l2),
        ("b_h1_l2t", &rep.fit_b_h1),
        ("j_l2t", &rep.fit_j),
        ("ampere_l2t", &rep.fit_ampere),
    ];
    write_fits(run, &fits)?;
    summary(
        run,
        config,
        &fits,
        json!({
            "ampere_ratios": rep.ampere_ratios,
            "max_energy_excess": rep.runs.iter().fold(f64::NEG_INFINITY, |m, r| m.max(r.energy_excess)),
            "max_div_violation": rep.runs.iter().fold(0.0f64, |m, r| m.max(r.div_max)),
        }),
    )
}
