//! Command-line front end: figure tables, sweeps, outcome sampling and
//! feasibility checks.
//!
//! Exit codes: 0 success, 1 usage error, 2 numeric or runtime failure,
//! 3 when `feasibility` finds the dispersive condition violated.

pub mod args;
pub mod config;

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Parser;
use homodyne_core::experiments::{self, Execution, Overrides};
use homodyne_core::protocols::{long_pulse_plan, LongPulsePlan};
use homodyne_core::pulse::{
    build_pulse, feasibility, optimal_chi_p, optimal_chi_x, response_functions, CavityParams,
    FeasibilityReport, GridSpec, LoShape, PulseKind, DEFAULT_FEASIBILITY_THRESHOLD,
};
use homodyne_core::sweep::{OutputFormat, Scale, SweepGrid, SweepResult, SweepSpec};
use serde::Serialize;

use crate::args::{
    Cli, Command, FeasibilityArgs, FigArgs, FormatArg, OutputArgs, PulseArg, RunArgs, SampleArgs,
    ScaleArg, SweepArgs,
};
use crate::config::FileConfig;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NUMERIC: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SHOTS: usize = 1000;
/// Reference cavity in units of 2π·MHz.
pub const DEFAULT_G: f64 = 0.4;
pub const DEFAULT_DELTA: f64 = 3000.0;
pub const DEFAULT_KAPPA: f64 = 1.0;
pub const DEFAULT_NP: f64 = 100.0;

/// Bad input that is not a clap parse failure (config files, inconsistent flags).
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    match e.downcast_ref::<homodyne_core::Error>() {
        Some(homodyne_core::Error::InvalidArgument(_) | homodyne_core::Error::Unsupported(_)) => {
            EXIT_USAGE
        }
        _ => EXIT_NUMERIC,
    }
}

fn execute(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Fig2(a) => figure(a, experiments::fig2),
        Command::Fig3(a) => figure(a, experiments::fig3),
        Command::Fig4(a) => figure(a, experiments::fig4),
        Command::Sample(a) => sample(a),
        Command::Sweep(a) => sweep(a),
        Command::Feasibility(a) => feasibility_cmd(a),
    }
}

struct Resolved {
    overrides: Overrides,
    exec: Execution,
    out: Option<PathBuf>,
    format: OutputFormat,
    file: FileConfig,
}

fn resolve(run: &RunArgs, output: &OutputArgs) -> Result<Resolved, Usage> {
    let file = FileConfig::load(output.config.as_deref())?;
    let overrides = Overrides {
        atoms: run.atoms.or(file.atoms),
        chi_x: run.chi_x.or(file.chi_x),
        chi_p: run.chi_p.or(file.chi_p),
        eta: run.eta.or(file.eta),
        outcome: run.outcome.or(file.outcome),
        rounds: run.rounds.or(file.rounds),
        seed: run.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
    };
    let format = match output.format {
        Some(FormatArg::Csv) => OutputFormat::Csv,
        Some(FormatArg::Json) => OutputFormat::Json,
        None => file.format.unwrap_or_default(),
    };
    Ok(Resolved {
        overrides,
        exec: Execution {
            parallel: !run.serial,
        },
        out: output
            .out
            .clone()
            .or_else(|| file.out.clone().map(PathBuf::from)),
        format,
        file,
    })
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn emit(mut result: SweepResult, r: &Resolved) -> anyhow::Result<u8> {
    result.metadata.spec.output = r.out.as_ref().map(|p| p.display().to_string());
    result.metadata.spec.format = r.format;
    write_output(r.out.as_deref(), &result.encode(r.format))?;
    Ok(EXIT_OK)
}

type FigureFn = fn(experiments::Panel, &Overrides, Execution) -> homodyne_core::Result<SweepResult>;

fn figure(a: FigArgs, f: FigureFn) -> anyhow::Result<u8> {
    let r = resolve(&a.run, &a.output)?;
    let result = f(a.panel, &r.overrides, r.exec)?;
    emit(result, &r)
}

fn sample(a: SampleArgs) -> anyhow::Result<u8> {
    let r = resolve(&a.run, &a.output)?;
    let shots = a.shots.or(r.file.shots).unwrap_or(DEFAULT_SHOTS);
    let result = experiments::sample_shots(a.protocol, shots, &r.overrides, r.exec)?;
    emit(result, &r)
}

fn sweep(a: SweepArgs) -> anyhow::Result<u8> {
    let r = resolve(&a.run, &a.output)?;
    let spec = SweepSpec {
        protocol: a.protocol.name().to_string(),
        parameter: a.param.clone(),
        grid: SweepGrid {
            start: a.start,
            stop: a.stop,
            count: a.count,
            scale: match a.scale {
                ScaleArg::Linear => Scale::Linear,
                ScaleArg::Log => Scale::Log,
            },
        },
        fixed: r.overrides.fixed(),
        seed: r.overrides.seed,
        output: None,
        format: r.format,
    };
    let result = experiments::run_sweep(&spec, r.exec)?;
    emit(result, &r)
}

#[derive(Serialize)]
struct FeasibilityInputs {
    g_two_pi_mhz: f64,
    delta_two_pi_mhz: f64,
    kappa_two_pi_mhz: f64,
    n_photons: f64,
    n_t: f64,
    rounds: usize,
}

#[derive(Serialize)]
struct FeasibilityOutput {
    inputs: FeasibilityInputs,
    pulse: PulseKind,
    omega_over_kappa: f64,
    /// Closed-form χ_x of the optimal amplitude-quadrature probe.
    chi_x_optimal_pulse: f64,
    /// Closed-form χ_p of the exponential probe.
    chi_p_exponential_pulse: f64,
    report: FeasibilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    long_pulse_plan: Option<LongPulsePlan>,
}

fn pulse_kind(choice: PulseArg, n_t: f64) -> Result<PulseKind, Usage> {
    if n_t.is_nan() || n_t < 1.0 {
        return Err(Usage(format!("--n-t must be at least 1, got {n_t}")));
    }
    match choice {
        PulseArg::Exponential if n_t == 1.0 => Ok(PulseKind::Exponential),
        PulseArg::Exponential => Ok(PulseKind::LongExponential { n_t }),
        PulseArg::OptimalX if n_t == 1.0 => Ok(PulseKind::OptimalXSpectral),
        PulseArg::OptimalX => Err(Usage("--n-t applies only to the exponential probe".into())),
    }
}

fn feasibility_cmd(a: FeasibilityArgs) -> anyhow::Result<u8> {
    let file = FileConfig::load(a.config.as_deref())?;
    let g = a.g.or(file.g).unwrap_or(DEFAULT_G);
    let delta = a.delta.or(file.delta).unwrap_or(DEFAULT_DELTA);
    let kappa = a.kappa.or(file.kappa).unwrap_or(DEFAULT_KAPPA);
    let np = a.np.or(file.np).unwrap_or(DEFAULT_NP);
    let n_t = a.n_t.or(file.n_t).unwrap_or(1.0);
    let rounds = a.rounds.or(file.rounds).unwrap_or(1);
    let threshold = a
        .threshold
        .or(file.threshold)
        .unwrap_or(DEFAULT_FEASIBILITY_THRESHOLD);
    let out = a.out.clone().or_else(|| file.out.map(PathBuf::from));

    let cavity = CavityParams::from_two_pi_mhz(g, delta, kappa, np)?;
    let kind = pulse_kind(a.pulse, n_t)?;
    let report = feasibility(&cavity, kind, threshold)?;
    let plan = match kind {
        PulseKind::OptimalXSpectral => None,
        _ if n_t > 1.0 || rounds > 1 => Some(long_pulse_plan(&cavity, n_t, rounds, threshold)?),
        _ => None,
    };

    if let Some(path) = &a.pulse_csv {
        let lo = match kind {
            PulseKind::OptimalXSpectral => LoShape::Beta2,
            _ => LoShape::Beta1,
        };
        let pulse = response_functions(&build_pulse(kind, &GridSpec::default_for(&kind))?)
            .with_local_oscillator(lo)?;
        let file =
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut w = BufWriter::new(file);
        pulse.write_csv(&mut w)?;
        w.flush()?;
    }

    let output = FeasibilityOutput {
        inputs: FeasibilityInputs {
            g_two_pi_mhz: g,
            delta_two_pi_mhz: delta,
            kappa_two_pi_mhz: kappa,
            n_photons: np,
            n_t,
            rounds,
        },
        pulse: kind,
        omega_over_kappa: cavity.omega_over_kappa(),
        chi_x_optimal_pulse: optimal_chi_x(&cavity),
        chi_p_exponential_pulse: optimal_chi_p(&cavity),
        report,
        long_pulse_plan: plan,
    };
    let mut text = serde_json::to_string_pretty(&output)?;
    text.push('\n');
    write_output(out.as_deref(), &text)?;

    eprintln!(
        "peak intracavity photons {:.4e} vs (Δ/g)² = {:.4e}: ratio {:.3e} (threshold {threshold})",
        report.max_intracavity_photons, report.dispersive_bound, report.photon_ratio
    );
    eprintln!(
        "χ_x bound {:.4e}, χ_p bound {:.4}",
        report.chi_x_bound, report.chi_p_bound
    );
    if let Some(p) = plan {
        eprintln!(
            "{} round(s): χ_p per round {:.4}, effective {:.4}; {} round(s) reach χ_p = 2",
            p.rounds, p.chi_p_per_round, p.chi_p_effective, p.rounds_for_saturation
        );
    }
    eprintln!(
        "dispersive condition {}",
        if report.ok { "satisfied" } else { "VIOLATED" }
    );
    Ok(if report.ok { EXIT_OK } else { EXIT_INFEASIBLE })
}
