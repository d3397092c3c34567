use nalgebra::{DMatrix, DVector};

use crate::error::{LabError, Result};

/// Residual level (log space) above which a fit is flagged.
pub const INCONCLUSIVE_RMS: f64 = 0.2;

/// Frequency cut-off `eps^{-alpha/(1+s)} |log eps|^{-1/(2(1+s))}` that
/// balances the low- and high-frequency parts of the error.
pub fn theta_schedule(eps: f64, alpha: f64, s_t: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LabError::Domain(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    if !(alpha > 0.0) || !(s_t > 0.0) {
        return Err(LabError::Domain(format!(
            "alpha > 0 and s_T > 0 required, got alpha = {alpha}, s_T = {s_t}"
        )));
    }
    let beta = 1.0 / (2.0 * (1.0 + s_t));
    Ok(eps.powf(-alpha / (1.0 + s_t)) * eps.ln().abs().powf(-beta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateModel {
    /// `error = A x^p`
    PurePower,
    /// `error = A x^p |log x|^q` with `p` kept within 0.1 of the pure fit
    PowerWithLog,
}

impl RateModel {
    pub fn name(&self) -> &'static str {
        match self {
            RateModel::PurePower => "pure_power",
            RateModel::PowerWithLog => "power_with_log",
        }
    }
}

/// A fitted decay law.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub model: RateModel,
    pub alpha_hat: f64,
    pub log_coefficient: Option<f64>,
    /// `log A`
    pub log_prefactor: f64,
    /// root-mean-square residual of `log error`
    pub residual_rms: f64,
    pub inconclusive: bool,
    /// the `(parameter, error)` pairs that were fitted
    pub table: Vec<(f64, f64)>,
}

fn lstsq(a: DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let (mx, mn) = (sv.max(), sv.min());
    if !(mx > 0.0) || mn <= 1e-10 * mx {
        return Err(LabError::DegenerateFit(
            "design matrix is rank deficient".into(),
        ));
    }
    svd.solve(y, 0.0)
        .map_err(|e| LabError::DegenerateFit(e.to_string()))
}

fn rms(a: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let r = a * x - y;
    (r.norm_squared() / y.len() as f64).sqrt()
}

/// Least-squares decay law through `(parameter, error)` pairs in log space.
pub fn fit_rate(rows: &[(f64, f64)], model: RateModel) -> Result<RateFit> {
    let need = match model {
        RateModel::PurePower => 3,
        RateModel::PowerWithLog => 4,
    };
    if rows.len() < need {
        return Err(LabError::InsufficientData(format!(
            "{} fit needs at least {need} rows, got {}",
            model.name(),
            rows.len()
        )));
    }
    for &(x, e) in rows {
        if !(e > 0.0) || !e.is_finite() {
            return Err(LabError::Data(format!(
                "nonpositive error {e} at parameter {x}"
            )));
        }
        if !(x > 0.0) || !x.is_finite() {
            return Err(LabError::Data(format!("nonpositive parameter {x}")));
        }
    }
    let n = rows.len();
    let lx: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let y = DVector::from_iterator(n, rows.iter().map(|r| r.1.ln()));
    let a2 = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { lx[i] });
    let pure = lstsq(a2.clone(), &y)?;
    let pure_rms = rms(&a2, &pure, &y);
    let finish = |alpha: f64, q: Option<f64>, la: f64, r: f64| RateFit {
        model,
        alpha_hat: alpha,
        log_coefficient: q,
        log_prefactor: la,
        residual_rms: r,
        inconclusive: r > INCONCLUSIVE_RMS,
        table: rows.to_vec(),
    };
    match model {
        RateModel::PurePower => Ok(finish(pure[1], None, pure[0], pure_rms)),
        RateModel::PowerWithLog => {
            if rows.iter().any(|r| r.0 == 1.0) {
                return Err(LabError::Data(
                    "log model needs parameters different from 1".into(),
                ));
            }
            let ll: Vec<f64> = lx.iter().map(|v| v.abs().ln()).collect();
            let a3 = DMatrix::from_fn(n, 3, |i, j| match j {
                0 => 1.0,
                1 => lx[i],
                _ => ll[i],
            });
            let free = lstsq(a3.clone(), &y)?;
            let (lo, hi) = (pure[1] - 0.1, pure[1] + 0.1);
            if free[1] >= lo && free[1] <= hi {
                return Ok(finish(free[1], Some(free[2]), free[0], rms(&a3, &free, &y)));
            }
            // exponent pinned to the violated bound, refit prefactor and q
            let p = free[1].clamp(lo, hi);
            let yp = DVector::from_iterator(n, (0..n).map(|i| y[i] - p * lx[i]));
            let b = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { ll[i] });
            let c = lstsq(b.clone(), &yp)?;
            Ok(finish(p, Some(c[1]), c[0], rms(&b, &c, &yp)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_examples() {
        let th = theta_schedule((-10.0f64).exp(), 0.5, 0.5).unwrap();
        let want = (10.0f64 / 3.0).exp() * 10f64.powf(-1.0 / 3.0);
        assert!((th - want).abs() < 1e-12 * want);
        assert!((th - 13.012).abs() < 1e-3);
        assert!(theta_schedule(1.0, 0.5, 0.5).is_err());
        assert!(theta_schedule(2.0, 0.5, 0.5).is_err());
        let sweep = [1e-2, 1e-3, 1e-4, 1e-5];
        let th: Vec<f64> = sweep
            .iter()
            .map(|&e| theta_schedule(e, 1.0, 1.0).unwrap())
            .collect();
        assert!(th.windows(2).all(|w| w[1] > w[0]));
        let te: Vec<f64> = sweep.iter().zip(&th).map(|(e, t)| t * e).collect();
        assert!(te.windows(2).all(|w| w[1] < w[0]));
        // exponent shrinks as s_T grows
        let a = theta_schedule(1e-4, 1.0, 1.0).unwrap();
        let b = theta_schedule(1e-4, 1.0, 10.0).unwrap();
        assert!(b < a);
    }

    #[test]
    fn exact_power_laws() {
        let f = fit_rate(
            &[(1e-2, 1e-1), (1e-3, 10f64.powf(-1.5)), (1e-4, 1e-2)],
            RateModel::PurePower,
        )
        .unwrap();
        assert!((f.alpha_hat - 0.5).abs() < 1e-12);
        let rows: Vec<(f64, f64)> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&e| (e, e)).collect();
        let f = fit_rate(&rows, RateModel::PurePower).unwrap();
        assert!((f.alpha_hat - 1.0).abs() < 1e-12 && f.residual_rms < 1e-12 && !f.inconclusive);
    }

    #[test]
    fn log_correction_is_recovered() {
        let rows: Vec<(f64, f64)> = (2..=6)
            .map(|k| {
                let e = 10f64.powi(-k);
                (e, e.powf(0.3) / e.ln().abs().powf(0.25))
            })
            .collect();
        let f = fit_rate(&rows, RateModel::PowerWithLog).unwrap();
        assert!((f.log_coefficient.unwrap() + 0.25).abs() < 0.05);
        assert!((f.alpha_hat - 0.3).abs() < 1e-6);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(
            fit_rate(
                &[(0.1, 1.0), (0.01, 0.0), (0.001, 1.0)],
                RateModel::PurePower
            ),
            Err(LabError::Data(_))
        ));
        assert!(matches!(
            fit_rate(&[(0.1, 1.0), (0.1, 2.0), (0.1, 3.0)], RateModel::PurePower),
            Err(LabError::DegenerateFit(_))
        ));
        assert!(fit_rate(&[(0.1, 1.0), (0.01, 2.0)], RateModel::PurePower).is_err());
        // noisy data gets flagged
        let rows = [(1e-1, 1.0), (1e-2, 100.0), (1e-3, 0.01), (1e-4, 1.0)];
        assert!(fit_rate(&rows, RateModel::PurePower).unwrap().inconclusive);
    }
}
