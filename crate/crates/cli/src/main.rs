#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use ylab::experiment::{
    parse_config, render_config, run_experiment, snapshot_fields, NormSpec, RunStatus,
};
use ylab::spectral::Snapshot;
use ylab::LabError;

/// Pseudospectral experiments on the periodic torus.
#[derive(Parser)]
#[command(name = "ylab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory; defaults to the config's `output`, relative to the file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a config file and print its canonical form.
    Validate { config: PathBuf },
    /// Sobolev, Besov and Lebesgue norms of every field in a snapshot.
    Norms {
        snapshot: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long)]
        p: f64,
    },
    /// Field-by-field distance between two snapshots.
    Diff {
        a: PathBuf,
        b: PathBuf,
        /// l2, linf, lp:<p>, h:<s>, hs:<s>, besov:<s>:<p>, besov_dot:<s>:<p>
        #[arg(long, default_value = "l2")]
        norm: String,
    },
}

const OK: u8 = 0;
const INVALID: u8 = 1;
const SOLVER: u8 = 2;

enum Failure {
    Invalid(anyhow::Error),
    Solver(anyhow::Error),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        if e.is_validation() {
            Failure::Invalid(e.into())
        } else {
            Failure::Solver(e.into())
        }
    }
}

fn invalid<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Invalid(e.into())
}

fn read_config(path: &Path) -> Result<ylab::experiment::ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(invalid)?;
    parse_config(&text).map_err(invalid)
}

fn load(path: &Path) -> Result<Snapshot, Failure> {
    Snapshot::load(path)
        .with_context(|| format!("loading {}", path.display()))
        .map_err(invalid)
}

fn fmt(r: ylab::Result<f64>) -> String {
    match r {
        Ok(v) => format!("{v:.12e}"),
        Err(e) => format!("n/a ({e})"),
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Validate { config } => {
            let cfg = read_config(&config)?;
            print!("{}", render_config(&cfg));
            Ok(())
        }
        Cmd::Run { config, output } => {
            let cfg = read_config(&config)?;
            let dir = output.unwrap_or_else(|| {
                let base = config.parent().unwrap_or(Path::new("."));
                base.join(&cfg.output)
            });
            let out = run_experiment(&cfg, &dir)?;
            println!(
                "{}: {} ({} artifacts in {})",
                cfg.kind.name(),
                out.status.name(),
                out.artifacts.len(),
                dir.display()
            );
            match (out.status, out.error) {
                (RunStatus::Complete, _) => Ok(()),
                (_, Some(e)) => Err(Failure::Solver(e.into())),
                (s, None) => Err(Failure::Solver(anyhow::anyhow!("run ended {}", s.name()))),
            }
        }
        Cmd::Norms { snapshot, s, p } => {
            let snap = load(&snapshot)?;
            if !(p >= 1.0) || !s.is_finite() {
                return Err(invalid(anyhow::anyhow!(
                    "need p ≥ 1 and finite s, got p = {p}, s = {s}"
                )));
            }
            println!(
                "N = {}, L = {}, t = {}, {} field(s)",
                snap.grid.n(),
                snap.grid.l(),
                snap.t,
                snap.fields.len()
            );
            for (i, f) in snapshot_fields(&snap).iter().enumerate() {
                println!("field {i}:");
                println!("  L^{p}            {}", fmt(NormSpec::Lp(p).eval(f)));
                println!("  H^{s} (homog.)   {}", fmt(NormSpec::Sobolev(s).eval(f)));
                println!(
                    "  H^{s} (inhom.)   {}",
                    fmt(NormSpec::InhomogeneousSobolev(s).eval(f))
                );
                println!(
                    "  B^{s}_{{{p},inf}}     {}",
                    fmt(NormSpec::Besov { s, p }.eval(f))
                );
                println!(
                    "  Bdot^{s}_{{{p},inf}}  {}",
                    fmt(NormSpec::BesovHomogeneous { s, p }.eval(f))
                );
            }
            Ok(())
        }
        Cmd::Diff { a, b, norm } => {
            let spec: NormSpec = norm.parse().map_err(invalid)?;
            let (sa, sb) = (load(&a)?, load(&b)?);
            sa.grid.check_same(&sb.grid).map_err(invalid)?;
            if sa.fields.len() != sb.fields.len() {
                return Err(invalid(anyhow::anyhow!(
                    "field counts differ: {} vs {}",
                    sa.fields.len(),
                    sb.fields.len()
                )));
            }
            let mut worst: f64 = 0.0;
            for (i, (fa, fb)) in snapshot_fields(&sa)
                .iter()
                .zip(snapshot_fields(&sb).iter())
                .enumerate()
            {
                let d = spec.eval(&(fa - fb)).map_err(invalid)?;
                worst = worst.max(d);
                println!("field {i}: {spec} = {d:.12e}");
            }
            println!("max: {worst:.12e}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { INVALID } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::from(OK),
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INVALID)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(SOLVER)
        }
    }
}
