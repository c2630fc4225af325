//! Batch front end behind the `cmcflow` binary.
//!
//! Exit codes: 0 success, 1 configuration error, 2 horizon reached or check
//! failed, 3 roundness lost without convergence, 4 geometry failure.

mod config;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use config::{parse_model, parse_surface, seed_from_env, Outputs, RunConfig, SpectrumConfig};

use crate::ambient::{adm_mass, decay_check, regge_teitelboim_check, DEFAULT_RT_THRESHOLD};
use crate::error::{Error, Result};
use crate::flow::{run_with, FlowStatus};
use crate::foliation::{construct_foliation, converged_leaves, foliation_report, nesting_check, FoliationSpec};
use crate::spectral::{assemble_operators, laplace_eigensystem, spectrum_report, SpectrumReport};
use crate::surface::fundamental_forms;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_HORIZON: i32 = 2;
pub const EXIT_CLASS: i32 = 3;
pub const EXIT_GEOMETRY: i32 = 4;

const ADM_RADII: [f64; 3] = [100.0, 200.0, 400.0];
const CHECK_RADII: [f64; 5] = [10.0, 20.0, 40.0, 80.0, 160.0];
const CHECK_SAMPLES: usize = 64;

#[derive(Debug, Parser)]
#[command(name = "cmcflow", version, about = "Volume-preserving mean curvature flow in asymptotically flat metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the flow from a config and write history and summary.
    Flow { config: PathBuf },
    /// Check the ambient metric.
    Ambient {
        config: PathBuf,
        #[arg(long, value_enum)]
        check: AmbientCheck,
    },
    /// Laplace and stability spectrum of one surface.
    Spectrum { config: PathBuf },
    /// Flow a family of coordinate spheres to CMC leaves.
    Foliate {
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AmbientCheck {
    Decay,
    Rt,
    Adm,
}

pub fn flow_exit_code(status: FlowStatus) -> i32 {
    match status {
        FlowStatus::Converged => EXIT_OK,
        FlowStatus::HorizonReached => EXIT_HORIZON,
        FlowStatus::ClassExit => EXIT_CLASS,
        FlowStatus::GraphFailure => EXIT_GEOMETRY,
    }
}

fn is_geometry_error(e: &Error) -> bool {
    matches!(
        e,
        Error::ChartViolation(_)
            | Error::NonPositiveRadius { .. }
            | Error::GraphConditionViolated { .. }
            | Error::InnerSphereNotEnclosed { .. }
            | Error::CommonGraphFailure(_)
            | Error::VolumeSolveFailure(_)
            | Error::EigensolverFailure(_)
    )
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    if is_geometry_error(e) {
        EXIT_GEOMETRY
    } else {
        EXIT_CONFIG
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

pub fn cmd_flow(path: &Path) -> i32 {
    let cfg = match config::read_json(path).and_then(|v| RunConfig::from_value(&v)) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let every = cfg.outputs.checkpoint_every.unwrap_or(1000).max(1);
    let mut checkpoint_error = None;
    let result = run_with(cfg.surface.clone(), &cfg.model, &cfg.flow, |state, _| {
        if let Some(dir) = &cfg.outputs.checkpoint_dir {
            if state.steps % every == 0 && checkpoint_error.is_none() {
                let file = dir.join(format!("surface_{:08}.json", state.steps));
                if let Err(e) = fs::create_dir_all(dir).map_err(Error::from).and_then(|_| {
                    fs::write(&file, state.surface.to_json()).map_err(Error::from)
                }) {
                    checkpoint_error = Some(e);
                }
            }
        }
    });
    let written = (|| -> Result<()> {
        if let Some(e) = checkpoint_error {
            return Err(e);
        }
        if let Some(p) = &cfg.outputs.history_csv {
            let mut w = create(p)?;
            result.history.write_csv(&mut w)?;
            w.flush()?;
        }
        let summary = result.summary();
        if let Some(p) = &cfg.outputs.summary_json {
            write_json(p, &summary)?;
        }
        print_json(&summary)
    })();
    if let Err(e) = written {
        return fail(&e);
    }
    if let Some(e) = &result.error {
        eprintln!("flow stopped: {e}");
    }
    flow_exit_code(result.status)
}

pub fn cmd_ambient(path: &Path, check: AmbientCheck) -> i32 {
    let model = match config::read_json(path).and_then(|v| config::ambient_model(&v)) {
        Ok(m) => m,
        Err(e) => return fail(&e),
    };
    let seed = match seed_from_env() {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let outcome = match check {
        AmbientCheck::Adm => adm_mass(&model, &ADM_RADII).and_then(|r| print_json(&r).map(|_| true)),
        AmbientCheck::Decay => decay_check(&model, &CHECK_RADII, CHECK_SAMPLES, seed)
            .and_then(|r| print_json(&r).map(|_| !r.violation)),
        AmbientCheck::Rt => regge_teitelboim_check(&model, &CHECK_RADII, CHECK_SAMPLES, seed, DEFAULT_RT_THRESHOLD)
            .and_then(|r| print_json(&r).map(|_| r.pass)),
    };
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_HORIZON,
        Err(e) => fail(&e),
    }
}

pub fn cmd_spectrum(path: &Path) -> i32 {
    let cfg = match config::read_json(path).and_then(|v| SpectrumConfig::from_value(&v)) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let out = (|| -> Result<SpectrumReport> {
        let fields = fundamental_forms(&cfg.model, &cfg.surface)?;
        if let Some(p) = &cfg.outputs.eigenfunctions_csv {
            let eig = laplace_eigensystem(&assemble_operators(&fields, cfg.l_basis)?, cfg.count.max(4))?;
            let mut w = create(p)?;
            eig.write_csv(&mut w)?;
            w.flush()?;
        }
        spectrum_report(&fields, cfg.l_basis, cfg.count)
    })();
    match out.and_then(|o| print_json(&o)) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(&e),
    }
}

pub fn cmd_foliate(path: &Path, jobs: usize) -> i32 {
    let parsed = config::read_json(path).and_then(|v| {
        let outputs: Outputs = match v.get("outputs") {
            Some(o) => serde_json::from_value(o.clone()).map_err(|e| Error::Config(format!("outputs: {e}")))?,
            None => Outputs::default(),
        };
        let mut body = v.clone();
        if let Some(obj) = body.as_object_mut() {
            obj.remove("outputs");
            if let Some(m) = obj.get("model") {
                parse_model(m)?;
            }
        }
        let spec: FoliationSpec = serde_json::from_value(body).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok((spec, outputs))
    });
    let (spec, outputs) = match parsed {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let outcomes = match construct_foliation(&spec, jobs) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let report = foliation_report(&outcomes);
    let written = (|| -> Result<()> {
        if let Some(dir) = &outputs.leaf_dir {
            fs::create_dir_all(dir)?;
            for o in &outcomes {
                if let Some(leaf) = &o.leaf {
                    fs::write(dir.join(format!("leaf_r{}.json", o.initial_radius)), leaf.surface.to_json())?;
                }
            }
        }
        if let Some(p) = &outputs.report_json {
            write_json(p, &report)?;
        }
        print_json(&report)
    })();
    if let Err(e) = written {
        return fail(&e);
    }
    let worst = outcomes.iter().map(|o| flow_exit_code(o.status)).max().unwrap_or(EXIT_OK);
    if worst != EXIT_OK {
        return worst;
    }
    let leaves = converged_leaves(&outcomes);
    if leaves.len() < 2 {
        return EXIT_OK;
    }
    match nesting_check(&leaves) {
        Ok(r) if r.nested => EXIT_OK,
        Ok(_) => EXIT_HORIZON,
        Err(e) => fail(&e),
    }
}

/// Parses `args` (including the program name) and dispatches.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Flow { config } => cmd_flow(&config),
        Command::Ambient { config, check } => cmd_ambient(&config, check),
        Command::Spectrum { config } => cmd_spectrum(&config),
        Command::Foliate { config, jobs } => cmd_foliate(&config, jobs),
    }
}
