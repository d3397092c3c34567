//! Flat `key = value` experiment files.
//!
//! ```text
//! # comment
//! [study]
//! kind = inviscid
//! [sweep]
//! values = 1e-3, 3e-4, 1e-4, 3e-5
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::fluid::{make_initial_data, FluidConfig, InitialData};
use crate::harness::{RateStudyConfig, StudyKind};
use crate::spectral::Grid2D;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Perturbation,
    Inviscid,
    EmLimit,
    Diagnostics,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [
        ExperimentKind::Perturbation,
        ExperimentKind::Inviscid,
        ExperimentKind::EmLimit,
        ExperimentKind::Diagnostics,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Perturbation => "perturbation",
            ExperimentKind::Inviscid => "inviscid",
            ExperimentKind::EmLimit => "em_limit",
            ExperimentKind::Diagnostics => "diagnostics",
        }
    }

    fn study(&self) -> Option<StudyKind> {
        match self {
            ExperimentKind::Perturbation => Some(StudyKind::Perturbation),
            ExperimentKind::Inviscid => Some(StudyKind::Inviscid),
            ExperimentKind::EmLimit => Some(StudyKind::EmLimit),
            ExperimentKind::Diagnostics => None,
        }
    }
}

/// Littlewood-Paley cut-off: a fixed `theta` or the `eps`-dependent schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FrameSpec {
    Theta(f64),
    Schedule,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// output directory, relative paths resolve against the config file
    pub output: PathBuf,
    /// base seed for random initial data without an explicit seed
    pub seed: u64,
    pub n: usize,
    pub length: f64,
    pub dt: f64,
    pub t_final: f64,
    pub cfl: f64,
    /// viscosity of a diagnostics run
    pub viscosity: f64,
    pub snapshot_stride: usize,
    pub sample_stride: usize,
    pub max_halvings: usize,
    pub sweep: Vec<f64>,
    pub initial: InitialData,
    pub perturbation: InitialData,
    /// steady vorticity source (diagnostics) or its perturbation direction
    pub forcing: Option<InitialData>,
    pub magnetic: InitialData,
    pub frame: FrameSpec,
    pub alpha: f64,
    pub s_t: f64,
    pub sigma: f64,
    pub eta: f64,
    pub besov_s: f64,
    pub besov_p: f64,
}

const DATA_KEYS: &[&str] = &[
    "kind",
    "amplitude",
    "perturbation",
    "seed",
    "slope",
    "k_cap",
    "center_x",
    "center_y",
    "radius",
    "delta",
    "roughness",
    "lobes",
];

const SECTIONS: &[(&str, &[&str])] = &[
    ("study", &["kind", "output", "seed"]),
    ("grid", &["n", "length"]),
    (
        "solver",
        &[
            "dt",
            "t_final",
            "cfl",
            "viscosity",
            "snapshot_stride",
            "sample_stride",
            "max_halvings",
        ],
    ),
    ("sweep", &["values"]),
    ("initial", DATA_KEYS),
    ("perturbation", DATA_KEYS),
    ("forcing", DATA_KEYS),
    ("magnetic", DATA_KEYS),
    ("frame", &["theta", "alpha", "s_t"]),
    ("plasma", &["sigma", "eta"]),
    ("besov", &["s", "p"]),
];

fn nearest<'a>(word: &str, options: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    options
        .into_iter()
        .map(|o| (strsim::levenshtein(word, o), o))
        .min()
        .map(|(_, o)| o)
}

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

struct Reader {
    map: BTreeMap<(String, String), String>,
    errors: Vec<String>,
}

impl Reader {
    fn lex(text: &str) -> Reader {
        let mut map = BTreeMap::new();
        let mut errors = Vec::new();
        let mut section: Option<String> = None;
        for (no, raw) in text.lines().enumerate() {
            let no = no + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if SECTIONS.iter().any(|(s, _)| *s == name) {
                    section = Some(name.to_string());
                } else {
                    let hint = nearest(name, SECTIONS.iter().map(|(s, _)| *s)).unwrap_or("");
                    errors.push(format!(
                        "line {no}: unknown section [{name}] (did you mean [{hint}]?)"
                    ));
                    section = None;
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                errors.push(format!("line {no}: expected `key = value`, got `{line}`"));
                continue;
            };
            let key = key.trim();
            let value = value.trim().trim_matches('"').to_string();
            let Some(sec) = &section else {
                if !errors.iter().any(|e| e.contains("unknown section")) {
                    errors.push(format!(
                        "line {no}: key `{key}` appears before any [section]"
                    ));
                }
                continue;
            };
            let keys = SECTIONS
                .iter()
                .find(|(s, _)| s == sec)
                .map(|(_, k)| *k)
                .unwrap_or(&[]);
            if !keys.contains(&key) {
                let hint = nearest(key, keys.iter().copied()).unwrap_or("");
                errors.push(format!(
                    "line {no}: unknown key `{key}` in [{sec}] (nearest valid key: `{hint}`)"
                ));
                continue;
            }
            let slot = (sec.clone(), key.to_string());
            if map.contains_key(&slot) {
                errors.push(format!("line {no}: duplicate key `{key}` in [{sec}]"));
                continue;
            }
            map.insert(slot, value);
        }
        Reader { map, errors }
    }

    fn raw(&self, sec: &str, key: &str) -> Option<String> {
        self.map.get(&(sec.to_string(), key.to_string())).cloned()
    }

    fn num(&mut self, sec: &str, key: &str, default: f64) -> f64 {
        match self.raw(sec, key) {
            None => default,
            Some(v) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => x,
                _ => {
                    self.errors.push(format!(
                        "[{sec}] {key}: expected a finite number, got `{v}`"
                    ));
                    default
                }
            },
        }
    }

    fn int(&mut self, sec: &str, key: &str, default: u64) -> u64 {
        match self.raw(sec, key) {
            None => default,
            Some(v) => v.parse::<u64>().unwrap_or_else(|_| {
                self.errors.push(format!(
                    "[{sec}] {key}: expected a nonnegative integer, got `{v}`"
                ));
                default
            }),
        }
    }

    fn list(&mut self, sec: &str, key: &str) -> Vec<f64> {
        let Some(v) = self.raw(sec, key) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.parse::<f64>() {
                Ok(x) if x.is_finite() => out.push(x),
                _ => self
                    .errors
                    .push(format!("[{sec}] {key}: `{item}` is not a finite number")),
            }
        }
        out
    }

    fn data(
        &mut self,
        sec: &str,
        default: InitialData,
        seed: u64,
        n: usize,
        l: f64,
    ) -> Option<InitialData> {
        let kind = self
            .raw(sec, "kind")
            .unwrap_or_else(|| default.kind().to_string());
        let allowed: &[&str] = match kind.as_str() {
            "none" if sec == "forcing" => &[],
            "shear" => &["amplitude"],
            "taylor_green" => &["amplitude", "perturbation"],
            "smooth_random" => &["seed", "slope", "k_cap", "amplitude"],
            "smoothed_patch" => &[
                "center_x",
                "center_y",
                "radius",
                "delta",
                "roughness",
                "lobes",
            ],
            other => {
                let mut kinds = vec!["shear", "taylor_green", "smooth_random", "smoothed_patch"];
                if sec == "forcing" {
                    kinds.push("none");
                }
                let hint = nearest(other, kinds.iter().copied()).unwrap_or("");
                self.errors.push(format!(
                    "[{sec}] kind: unknown initial data `{other}` (nearest: `{hint}`)"
                ));
                return None;
            }
        };
        for key in DATA_KEYS.iter().skip(1) {
            if !allowed.contains(key) && self.map.contains_key(&(sec.to_string(), key.to_string()))
            {
                self.raw(sec, key);
                self.errors
                    .push(format!("[{sec}] {key}: does not apply to kind `{kind}`"));
            }
        }
        let d = match &default {
            InitialData::SmoothRandom {
                slope,
                k_cap,
                amplitude,
                ..
            } => (*slope, *k_cap, *amplitude),
            _ => (4.0, 6.0, 1.0),
        };
        Some(match kind.as_str() {
            "none" => return None,
            "shear" => InitialData::Shear {
                amplitude: self.num(sec, "amplitude", 1.0),
            },
            "taylor_green" => InitialData::TaylorGreen {
                amplitude: self.num(sec, "amplitude", 1.0),
                perturbation: self.num(sec, "perturbation", 0.1),
            },
            "smooth_random" => InitialData::SmoothRandom {
                seed: self.int(sec, "seed", seed),
                slope: self.num(sec, "slope", d.0),
                k_cap: self.num(sec, "k_cap", d.1.min((n / 3) as f64)),
                amplitude: self.num(sec, "amplitude", d.2),
            },
            _ => InitialData::SmoothedPatch {
                center: (
                    self.num(sec, "center_x", 0.5 * l),
                    self.num(sec, "center_y", 0.5 * l),
                ),
                radius: self.num(sec, "radius", 0.25 * l),
                delta: self.num(sec, "delta", 4.0 * l / n.max(1) as f64),
                roughness: self.num(sec, "roughness", 0.0),
                lobes: self.int(sec, "lobes", 0) as u32,
            },
        })
    }
}

fn smooth(seed: u64) -> InitialData {
    InitialData::SmoothRandom {
        seed,
        slope: 4.0,
        k_cap: 6.0,
        amplitude: 1.0,
    }
}

/// Parses and validates `text`. Every problem found is reported, not just
/// the first.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut r = Reader::lex(text);
    let kind_name = r.raw("study", "kind");
    let kind = match kind_name.as_deref() {
        None => {
            r.errors.push(
                "[study] kind is required (perturbation | inviscid | em_limit | diagnostics)"
                    .into(),
            );
            ExperimentKind::Diagnostics
        }
        Some(k) => match ExperimentKind::ALL.iter().find(|x| x.name() == k) {
            Some(x) => *x,
            None => {
                let hint = nearest(k, ExperimentKind::ALL.iter().map(|x| x.name())).unwrap_or("");
                r.errors.push(format!(
                    "[study] kind: unknown study `{k}` (nearest: `{hint}`)"
                ));
                ExperimentKind::Diagnostics
            }
        },
    };
    let output = PathBuf::from(r.raw("study", "output").unwrap_or_else(|| "out".into()));
    let seed = r.int("study", "seed", 1);
    let n = r.int("grid", "n", 128) as usize;
    let length = r.num("grid", "length", 2.0 * PI);
    let dt = r.num("solver", "dt", 0.01);
    let t_final = r.num("solver", "t_final", 1.0);
    let cfl = r.num("solver", "cfl", 0.5);
    let viscosity = r.num("solver", "viscosity", 0.0);
    let snapshot_stride = r.int("solver", "snapshot_stride", 1) as usize;
    let sample_stride = r.int("solver", "sample_stride", 1) as usize;
    let max_halvings = r.int("solver", "max_halvings", 20) as usize;
    let sweep = r.list("sweep", "values");
    let tg = InitialData::TaylorGreen {
        amplitude: 1.0,
        perturbation: 0.1,
    };
    let initial = r.data("initial", tg.clone(), seed, n, length);
    let perturbation = r.data("perturbation", smooth(seed + 1), seed + 1, n, length);
    let magnetic = r.data("magnetic", smooth(seed + 2), seed + 2, n, length);
    let forcing = if r.map.keys().any(|(s, _)| s == "forcing") {
        r.data("forcing", smooth(seed + 3), seed + 3, n, length)
    } else {
        None
    };
    let frame = match r.raw("frame", "theta") {
        None if kind == ExperimentKind::Perturbation => FrameSpec::Schedule,
        None => FrameSpec::Theta(1.0),
        Some(v) if v == "schedule" => FrameSpec::Schedule,
        Some(v) => match v.parse::<f64>() {
            Ok(x) if x.is_finite() => FrameSpec::Theta(x),
            _ => {
                r.errors.push(format!(
                    "[frame] theta: expected a number or `schedule`, got `{v}`"
                ));
                FrameSpec::Theta(1.0)
            }
        },
    };
    let cfg = ExperimentConfig {
        kind,
        output,
        seed,
        n,
        length,
        dt,
        t_final,
        cfl,
        viscosity,
        snapshot_stride,
        sample_stride,
        max_halvings,
        sweep,
        initial: initial.unwrap_or(tg),
        perturbation: perturbation.unwrap_or_else(|| smooth(seed + 1)),
        forcing,
        magnetic: magnetic.unwrap_or_else(|| smooth(seed + 2)),
        frame,
        alpha: r.num("frame", "alpha", 1.0),
        s_t: r.num("frame", "s_t", 1.0),
        sigma: r.num("plasma", "sigma", 1.0),
        eta: r.num("plasma", "eta", 1.5),
        besov_s: r.num("besov", "s", 0.5),
        besov_p: r.num("besov", "p", 4.0),
    };
    let mut errors = r.errors;
    if errors.is_empty() {
        errors.extend(cfg.problems());
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(LabError::Invalid(errors))
    }
}

fn render_data(out: &mut String, sec: &str, d: &InitialData) {
    let _ = writeln!(out, "\n[{sec}]\nkind = {}", d.kind());
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    match d {
        InitialData::Shear { amplitude } => kv("amplitude", fmt_f64(*amplitude)),
        InitialData::TaylorGreen {
            amplitude,
            perturbation,
        } => {
            kv("amplitude", fmt_f64(*amplitude));
            kv("perturbation", fmt_f64(*perturbation));
        }
        InitialData::SmoothRandom {
            seed,
            slope,
            k_cap,
            amplitude,
        } => {
            kv("seed", seed.to_string());
            kv("slope", fmt_f64(*slope));
            kv("k_cap", fmt_f64(*k_cap));
            kv("amplitude", fmt_f64(*amplitude));
        }
        InitialData::SmoothedPatch {
            center,
            radius,
            delta,
            roughness,
            lobes,
        } => {
            kv("center_x", fmt_f64(center.0));
            kv("center_y", fmt_f64(center.1));
            kv("radius", fmt_f64(*radius));
            kv("delta", fmt_f64(*delta));
            kv("roughness", fmt_f64(*roughness));
            kv("lobes", lobes.to_string());
        }
    }
}

/// Canonical text of a configuration, every key spelled out.
pub fn render_config(c: &ExperimentConfig) -> String {
    let mut s = String::new();
    let f = fmt_f64;
    let _ = writeln!(
        s,
        "[study]\nkind = {}\noutput = {}\nseed = {}",
        c.kind.name(),
        c.output.display(),
        c.seed
    );
    let _ = writeln!(s, "\n[grid]\nn = {}\nlength = {}", c.n, f(c.length));
    let _ = writeln!(
        s,
        "\n[solver]\ndt = {}\nt_final = {}\ncfl = {}\nviscosity = {}\nsnapshot_stride = {}\nsample_stride = {}\nmax_halvings = {}",
        f(c.dt),
        f(c.t_final),
        f(c.cfl),
        f(c.viscosity),
        c.snapshot_stride,
        c.sample_stride,
        c.max_halvings
    );
    if !c.sweep.is_empty() {
        let v: Vec<String> = c.sweep.iter().map(|x| f(*x)).collect();
        let _ = writeln!(s, "\n[sweep]\nvalues = {}", v.join(", "));
    }
    render_data(&mut s, "initial", &c.initial);
    render_data(&mut s, "perturbation", &c.perturbation);
    match &c.forcing {
        Some(d) => render_data(&mut s, "forcing", d),
        None => s.push_str("\n[forcing]\nkind = none\n"),
    }
    render_data(&mut s, "magnetic", &c.magnetic);
    let theta = match c.frame {
        FrameSpec::Theta(t) => f(t),
        FrameSpec::Schedule => "schedule".into(),
    };
    let _ = writeln!(
        s,
        "\n[frame]\ntheta = {theta}\nalpha = {}\ns_t = {}",
        f(c.alpha),
        f(c.s_t)
    );
    let _ = writeln!(s, "\n[plasma]\nsigma = {}\neta = {}", f(c.sigma), f(c.eta));
    let _ = writeln!(s, "\n[besov]\ns = {}\np = {}", f(c.besov_s), f(c.besov_p));
    s
}

/// SHA-256 of the canonical rendering, hex encoded.
pub fn config_hash(c: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(render_config(c).as_bytes()))
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.n, self.length)
    }

    /// Configuration of a diagnostics run (no forcing attached).
    pub fn fluid_config(&self) -> Result<FluidConfig> {
        let mut c = FluidConfig::new(&self.grid()?, self.viscosity, self.dt, self.t_final);
        c.cfl = self.cfl;
        c.snapshot_stride = self.snapshot_stride;
        c.max_halvings = self.max_halvings as u32;
        Ok(c)
    }

    pub fn study_config(&self) -> Result<RateStudyConfig> {
        let mut s = RateStudyConfig::new(&self.grid()?, self.sweep.clone(), self.initial.clone());
        s.dt = self.dt;
        s.t_final = self.t_final;
        s.cfl = self.cfl;
        s.sample_stride = self.sample_stride;
        s.perturbation = self.perturbation.clone();
        s.forcing_perturbation = self.forcing.clone();
        s.magnetic = self.magnetic.clone();
        s.sigma = self.sigma;
        s.theta = match self.frame {
            FrameSpec::Theta(t) => Some(t),
            FrameSpec::Schedule => None,
        };
        s.alpha = self.alpha;
        s.s_t = self.s_t;
        s.besov_s = self.besov_s;
        s.besov_p = self.besov_p;
        s.eta = self.eta;
        Ok(s)
    }

    /// Every violated precondition.
    pub fn problems(&self) -> Vec<String> {
        let mut e = Vec::new();
        let grid = match self.grid() {
            Ok(g) => Some(g),
            Err(x) => {
                e.push(format!("[grid] {x}"));
                None
            }
        };
        if !(self.viscosity >= 0.0) {
            e.push(format!(
                "[solver] viscosity ≥ 0 required, got {}",
                fmt_f64(self.viscosity)
            ));
        } else if self.viscosity > 0.0 && self.kind != ExperimentKind::Diagnostics {
            e.push(format!(
                "[solver] viscosity applies to diagnostics runs only ({} sets its own)",
                self.kind.name()
            ));
        }
        if !(self.dt > 0.0) {
            e.push(format!(
                "[solver] dt > 0 required, got {}",
                fmt_f64(self.dt)
            ));
        }
        if !(self.t_final > 0.0) {
            e.push(format!(
                "[solver] t_final > 0 required, got {}",
                fmt_f64(self.t_final)
            ));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            e.push(format!(
                "[solver] cfl in (0, 1] required, got {}",
                fmt_f64(self.cfl)
            ));
        }
        if self.snapshot_stride == 0 || self.sample_stride == 0 {
            e.push("[solver] snapshot_stride ≥ 1 and sample_stride ≥ 1 required".into());
        }
        if self.max_halvings > 60 {
            e.push(format!(
                "[solver] max_halvings ≤ 60 required, got {}",
                self.max_halvings
            ));
        }
        if !(self.sigma > 0.0) {
            e.push(format!(
                "[plasma] sigma > 0 required, got {}",
                fmt_f64(self.sigma)
            ));
        }
        if !(1.0..=2.0).contains(&self.eta) {
            e.push(format!(
                "[plasma] eta in [1, 2] required, got {}",
                fmt_f64(self.eta)
            ));
        }
        if !(self.besov_p >= 1.0) {
            e.push(format!(
                "[besov] p ≥ 1 required, got {}",
                fmt_f64(self.besov_p)
            ));
        }
        if !(self.alpha > 0.0) || !(self.s_t > 0.0) {
            e.push("[frame] alpha > 0 and s_t > 0 required".into());
        }
        match self.frame {
            FrameSpec::Theta(t) if !(t > 0.0) => {
                e.push(format!("[frame] theta > 0 required, got {}", fmt_f64(t)))
            }
            FrameSpec::Schedule if self.kind != ExperimentKind::Perturbation => e.push(format!(
                "[frame] theta = schedule applies to perturbation studies only, not {}",
                self.kind.name()
            )),
            _ => {}
        }
        if let Some(kind) = self.kind.study() {
            let n = self.sweep.len();
            if n < 4 {
                e.push(format!(
                    "[sweep] values: at least 4 values required, got {n}"
                ));
            }
            if self.sweep.iter().any(|v| !(*v > 0.0)) {
                e.push("[sweep] values must be positive".into());
            }
            let dec = self.sweep.windows(2).all(|w| w[1] < w[0]);
            let inc = self.sweep.windows(2).all(|w| w[1] > w[0]);
            match kind {
                StudyKind::EmLimit if !inc => {
                    e.push("[sweep] values: c must be strictly increasing".into())
                }
                StudyKind::Perturbation | StudyKind::Inviscid if !dec => {
                    e.push("[sweep] values: eps must be strictly decreasing".into())
                }
                _ => {}
            }
            if kind == StudyKind::Perturbation && self.sweep.iter().any(|v| *v >= 1.0) {
                e.push("[sweep] values: eps < 1 required".into());
            }
        } else if !self.sweep.is_empty() {
            e.push("[sweep] values: diagnostics runs take no sweep".into());
        }
        if let Some(g) = &grid {
            let mut check = |sec: &str, d: &InitialData| {
                if let Err(x) = make_initial_data(d, g) {
                    e.push(format!("[{sec}] {x}"));
                }
            };
            check("initial", &self.initial);
            if self.kind == ExperimentKind::Perturbation {
                check("perturbation", &self.perturbation);
            }
            if self.kind == ExperimentKind::EmLimit {
                check("magnetic", &self.magnetic);
            }
            if let Some(f) = &self.forcing {
                check("forcing", f);
            }
        }
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[study]\nkind = inviscid\n[sweep]\nvalues = 1e-3, 3e-4, 1e-4, 3e-5\n";

    fn errors(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(LabError::Invalid(v)) => v,
            other => panic!("expected validation errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.kind, ExperimentKind::Inviscid);
        assert_eq!(c.n, 128);
        assert_eq!(c.length, 2.0 * PI);
        assert_eq!(c.cfl, 0.5);
        assert_eq!(c.sweep, vec![1e-3, 3e-4, 1e-4, 3e-5]);
    }

    #[test]
    fn negative_viscosity_is_rejected() {
        let e = errors("[study]\nkind = diagnostics\n[solver]\nviscosity = -1\n");
        assert!(e.iter().any(|m| m.contains("viscosity ≥ 0")), "{e:?}");
    }

    #[test]
    fn short_sweep_is_rejected() {
        let e = errors("[study]\nkind = inviscid\n[sweep]\nvalues = 1e-3, 1e-4, 1e-5\n");
        assert!(e.iter().any(|m| m.contains("at least 4 values")), "{e:?}");
    }

    #[test]
    fn unknown_key_names_the_nearest() {
        let e = errors("[study]\nkind = inviscid\n[solver]\nviscosty = 0\n");
        assert_eq!(e.len(), 1, "{e:?}");
        assert!(e[0].contains("viscosty") && e[0].contains("`viscosity`"));
        let e = errors("[studdy]\nkind = inviscid\n");
        assert!(e[0].contains("[study]"));
    }

    #[test]
    fn all_errors_are_collected() {
        let e =
            errors("[study]\nkind = perturbation\n[solver]\ndt = -1\ncfl = 2\n[plasma]\neta = 3\n");
        assert!(e.len() >= 4, "{e:?}");
    }

    #[test]
    fn data_keys_must_match_the_kind() {
        let e = errors("[study]\nkind = diagnostics\n[initial]\nkind = shear\nradius = 1\n");
        assert!(e[0].contains("radius") && e[0].contains("shear"));
    }

    #[test]
    fn render_round_trips() {
        let texts = [
            MINIMAL.to_string(),
            "[study]\nkind = perturbation\nseed = 9\n[grid]\nn = 64\n[sweep]\nvalues = 0.1, 0.05, 0.025, 0.0125\n[forcing]\nkind = shear\namplitude = 0.5\n".into(),
            "[study]\nkind = em_limit\n[grid]\nn = 64\nlength = 3\n[sweep]\nvalues = 50, 100, 200, 400\n[initial]\nkind = smoothed_patch\nradius = 0.7\ndelta = 0.12\nlobes = 3\nroughness = 0.1\n".into(),
            "[study]\nkind = diagnostics\n[solver]\nviscosity = 1e-5\ndt = 0.003\n[frame]\ntheta = 4\n".into(),
        ];
        for t in texts {
            let c = parse_config(&t).unwrap();
            let r = render_config(&c);
            assert_eq!(parse_config(&r).unwrap(), c, "{r}");
            assert_eq!(render_config(&parse_config(&r).unwrap()), r);
        }
    }

    #[test]
    fn float_text_is_exact() {
        for x in [0.1, 1e-300, 3e-5, 2.0 * PI, 1e20, -0.0, 123456.789] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
