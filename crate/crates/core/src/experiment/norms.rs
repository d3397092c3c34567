use std::fmt;
use std::str::FromStr;

use crate::error::{LabError, Result};
use crate::lp::{besov_norm, besov_norm_homogeneous, DyadicFrame};
use crate::spectral::{inhomogeneous_sobolev_norm, lp_norm, sobolev_norm, Snapshot, SpectralField};

/// A norm named on the command line:
/// `l2`, `linf`, `lp:<p>`, `h:<s>` (homogeneous Sobolev), `hs:<s>`
/// (inhomogeneous), `besov:<s>:<p>` and `besov_dot:<s>:<p>` (unit frame).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormSpec {
    Lp(f64),
    Sobolev(f64),
    InhomogeneousSobolev(f64),
    Besov { s: f64, p: f64 },
    BesovHomogeneous { s: f64, p: f64 },
}

fn num(s: &str, what: &str) -> Result<f64> {
    let v = if s == "inf" {
        f64::INFINITY
    } else {
        s.parse::<f64>()
            .map_err(|_| LabError::Config(format!("{what}: `{s}` is not a number")))?
    };
    if v.is_nan() {
        return Err(LabError::Config(format!("{what}: NaN")));
    }
    Ok(v)
}

impl FromStr for NormSpec {
    type Err = LabError;

    fn from_str(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.trim().split(':').collect();
        let bad = || {
            LabError::Config(format!(
                "unknown norm `{spec}`; expected l2, linf, lp:<p>, h:<s>, hs:<s>, besov:<s>:<p> or besov_dot:<s>:<p>"
            ))
        };
        Ok(match parts.as_slice() {
            ["l2"] => NormSpec::Lp(2.0),
            ["linf"] => NormSpec::Lp(f64::INFINITY),
            ["lp", p] => NormSpec::Lp(num(p, "p")?),
            ["h", s] => NormSpec::Sobolev(num(s, "s")?),
            ["hs", s] => NormSpec::InhomogeneousSobolev(num(s, "s")?),
            ["besov", s, p] => NormSpec::Besov {
                s: num(s, "s")?,
                p: num(p, "p")?,
            },
            ["besov_dot", s, p] => NormSpec::BesovHomogeneous {
                s: num(s, "s")?,
                p: num(p, "p")?,
            },
            _ => return Err(bad()),
        })
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Lp(p) if p.is_infinite() => write!(f, "linf"),
            NormSpec::Lp(p) => write!(f, "lp:{p}"),
            NormSpec::Sobolev(s) => write!(f, "h:{s}"),
            NormSpec::InhomogeneousSobolev(s) => write!(f, "hs:{s}"),
            NormSpec::Besov { s, p } => write!(f, "besov:{s}:{p}"),
            NormSpec::BesovHomogeneous { s, p } => write!(f, "besov_dot:{s}:{p}"),
        }
    }
}

impl NormSpec {
    pub fn eval(&self, f: &SpectralField) -> Result<f64> {
        match *self {
            NormSpec::Lp(p) => lp_norm(f, p),
            NormSpec::Sobolev(s) => sobolev_norm(f, s),
            NormSpec::InhomogeneousSobolev(s) => inhomogeneous_sobolev_norm(f, s),
            NormSpec::Besov { s, p } => besov_norm(f, s, p, &DyadicFrame::new(1.0, f.grid())?),
            NormSpec::BesovHomogeneous { s, p } => {
                besov_norm_homogeneous(f, s, p, &DyadicFrame::new(1.0, f.grid())?)
            }
        }
    }
}

/// The fields of a snapshot in coefficient space.
pub fn snapshot_fields(s: &Snapshot) -> Vec<SpectralField> {
    s.fields.iter().map(|f| f.to_spectral()).collect()
}
