//! Convergence studies: perturbation stability, the inviscid limit and the
//! Euler-Maxwell to MHD limit, with rate fitting.

mod em_limit;
mod fit;
mod inviscid;
mod perturbation;
mod study;

pub use em_limit::{em_limit_run, run_em_limit_study, EmLimitReport, EmLimitRun};
pub use fit::{fit_rate, theta_schedule, RateFit, RateModel, INCONCLUSIVE_RMS};
pub use inviscid::{
    inviscid_runs, measure_regularity, refined_data, run_inviscid_study, InviscidReport,
    InviscidRun,
};
pub use perturbation::{
    perturbation_runs, run_perturbation_study, PerturbationReport, PerturbationRun, SteadyForcing,
};
pub use study::{RateStudyConfig, StudyKind};
