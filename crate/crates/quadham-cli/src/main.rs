//! `quadham` - diagonalize n-body quadratic Hamiltonians with unitary
//! shear pair transformations and emit deterministic, plot-ready reports.
//!
//! Exit codes: 0 success, 2 completed but not converged (results are still
//! written), 1 invalid input or configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use quadham_core::diagonalizer::{PivotStrategy, SweepConfig};
use quadham_core::normal_modes::normal_modes;
use quadham_core::states::{
    entangled_ground_state, ground_state_from_diagonal, ground_state_residual, zpe_compare_with,
    ZpeMethod,
};

mod emit;
mod input;
mod methods;

use emit::{fnv1a64, FreqRow};
use methods::{MethodArg, MethodRun, Outcome, RootArg};

#[derive(Parser)]
#[command(
    name = "quadham",
    version,
    about = "Diagonalize n-body quadratic Hamiltonians in the original observables",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a diagonalization method (or all applicable ones) and write
    /// frequency tables, the shear sequence and residuals
    Diagonalize(RunArgs),
    /// Compare zero-point energies and spectra across methods
    Compare(RunArgs),
    /// Compute the Gaussian ground state in the diagonal and original frames
    Groundstate(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Input Hamiltonian spec file (JSON); repeat the flag for batch mode
    #[arg(long, required = true, num_args = 1)]
    input: Vec<PathBuf>,

    /// Diagonalization method
    #[arg(long, value_enum, default_value_t = MethodArg::Sweep)]
    method: MethodArg,

    /// Relative off-diagonal tolerance for the sweep
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,

    /// Sweep budget (defaults to 50·n)
    #[arg(long)]
    max_sweeps: Option<usize>,

    /// Quadratic root selection policy
    #[arg(long, value_enum, default_value_t = RootArg::Smaller)]
    root: RootArg,

    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Tabular output format (structured reports are always JSON)
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
enum FormatArg {
    Csv,
    Json,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Diagonalize(args) => run_batch(&args, Mode::Diagonalize),
        Command::Compare(args) => run_batch(&args, Mode::Compare),
        Command::Groundstate(args) => run_batch(&args, Mode::Groundstate),
    };
    std::process::exit(code);
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Diagonalize,
    Compare,
    Groundstate,
}

impl Mode {
    fn name(&self) -> &'static str {
        match self {
            Mode::Diagonalize => "diagonalize",
            Mode::Compare => "compare",
            Mode::Groundstate => "groundstate",
        }
    }
}

/// Per-file output directories for batch runs, deduplicated by file stem.
fn output_dirs(args: &RunArgs) -> Vec<PathBuf> {
    if args.input.len() == 1 {
        return vec![args.out.clone()];
    }
    let mut seen: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    args.input
        .iter()
        .map(|p| {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "input".into());
            let count = seen.entry(stem.clone()).or_insert(0);
            *count += 1;
            let dir = if *count == 1 { stem } else { format!("{stem}_{count}") };
            args.out.join(dir)
        })
        .collect()
}

fn run_batch(args: &RunArgs, mode: Mode) -> i32 {
    if !(args.tol.is_finite() && args.tol > 0.0) {
        eprintln!("error: --tol must be strictly positive");
        return 1;
    }
    let dirs = output_dirs(args);
    let mut codes = vec![0i32; args.input.len()];
    std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .input
            .iter()
            .zip(dirs.iter())
            .map(|(path, dir)| {
                let args = args.clone();
                scope.spawn(move || match run_one(&args, mode, path, dir) {
                    Ok(code) => code,
                    Err(e) => {
                        eprintln!("error: {e:#}");
                        1
                    }
                })
            })
            .collect();
        for (slot, handle) in codes.iter_mut().zip(handles) {
            *slot = handle.join().unwrap_or(1);
        }
    });
    if codes.contains(&1) {
        1
    } else if codes.contains(&2) {
        2
    } else {
        0
    }
}

fn config_hash(args: &RunArgs, mode: Mode, input_bytes: &[u8]) -> u64 {
    let canonical = format!(
        "cmd={};input={:016x};method={};tol={};max_sweeps={};root={};format={}",
        mode.name(),
        fnv1a64(input_bytes),
        args.method.name(),
        emit::fmt_f64(args.tol),
        args.max_sweeps.map(|v| v.to_string()).unwrap_or_else(|| "auto".into()),
        args.root.name(),
        match args.format {
            FormatArg::Csv => "csv",
            FormatArg::Json => "json",
        },
    );
    fnv1a64(canonical.as_bytes())
}

fn sweep_config(args: &RunArgs) -> SweepConfig {
    SweepConfig { tol: args.tol, max_sweeps: args.max_sweeps, pivot: PivotStrategy::LargestOffdiag }
}

fn run_one(args: &RunArgs, mode: Mode, path: &Path, out_dir: &Path) -> Result<i32> {
    let (inst, bytes) = input::load(path)?;
    let hash = config_hash(args, mode, &bytes);
    let cfg = sweep_config(args);
    match mode {
        Mode::Diagonalize => cmd_diagonalize(args, &inst, hash, &cfg, out_dir),
        Mode::Compare => cmd_compare(args, &inst, hash, &cfg, out_dir),
        Mode::Groundstate => cmd_groundstate(args, &inst, hash, &cfg, out_dir),
    }
}

fn freq_rows(run: &MethodRun) -> Vec<FreqRow> {
    match &run.outcome {
        Outcome::Oracle(nm) => nm
            .omega_sq()
            .iter()
            .enumerate()
            .map(|(s, &w)| FreqRow { index: s + 1, m_eff: None, d_eff: None, omega_sq: w })
            .collect(),
        Outcome::Transform(r) => (0..r.n())
            .map(|i| FreqRow {
                index: i + 1,
                m_eff: Some(r.m_eff()[i]),
                d_eff: Some(r.d_eff()[i]),
                omega_sq: r.omega_sq()[i],
            })
            .collect(),
    }
}

fn cmd_diagonalize(
    args: &RunArgs,
    inst: &input::Instance,
    hash: u64,
    cfg: &SweepConfig,
    out_dir: &Path,
) -> Result<i32> {
    let runs = methods::run_methods(inst, args.method, cfg, args.root.to_choice())?;
    let mut all_converged = true;
    for run in &runs {
        let dir = if args.method == MethodArg::All {
            out_dir.join(run.name)
        } else {
            out_dir.to_path_buf()
        };
        let rows = freq_rows(run);
        match args.format {
            FormatArg::Csv => emit::write_file(
                &dir.join("frequencies.csv"),
                &emit::frequencies_csv(hash, run.name, &rows),
            )?,
            FormatArg::Json => emit::write_file(
                &dir.join("frequencies.json"),
                &emit::frequencies_json(hash, run.name, &rows),
            )?,
        }
        if let Outcome::Transform(r) = &run.outcome {
            emit::write_file(
                &dir.join("sequence.json"),
                &emit::sequence_json(hash, run.name, run.solver, r),
            )?;
            emit::write_file(
                &dir.join("residuals.json"),
                &emit::residuals_json(hash, run.name, run.solver, r, args.tol),
            )?;
            println!(
                "{}: converged={} steps={} v_offdiag={:e}",
                run.name,
                r.converged(),
                r.sequence().len(),
                r.v_offdiag()
            );
            all_converged &= r.converged();
        } else {
            println!("{}: modes computed", run.name);
        }
    }
    Ok(if all_converged { 0 } else { 2 })
}

fn cmd_compare(
    args: &RunArgs,
    inst: &input::Instance,
    hash: u64,
    cfg: &SweepConfig,
    out_dir: &Path,
) -> Result<i32> {
    let mut methods = vec![ZpeMethod::Oracle, ZpeMethod::Sweep];
    if inst.chain.is_some() {
        methods.push(ZpeMethod::BravaisClosedForm);
        methods.push(ZpeMethod::ToeplitzClosedForm);
    }
    let report = zpe_compare_with(&inst.hamiltonian, &methods, cfg);
    match args.format {
        FormatArg::Csv => {
            emit::write_file(&out_dir.join("compare.csv"), &emit::compare_csv(hash, &report))?
        }
        FormatArg::Json => {
            emit::write_file(&out_dir.join("compare.json"), &emit::compare_json(hash, &report))?
        }
    }
    // Only the iterative method gates the exit code; the closed-form rows
    // are informational and may be legitimately non-converged.
    let mut code = 0;
    for e in &report.entries {
        if e.method == ZpeMethod::Sweep && e.converged == Some(false) {
            code = 2;
        }
        println!(
            "{}: zpe={} {}",
            e.method.name(),
            e.zpe.map(emit::fmt_f64).unwrap_or_else(|| "-".into()),
            e.error.as_deref().unwrap_or("")
        );
    }
    Ok(code)
}

fn cmd_groundstate(
    args: &RunArgs,
    inst: &input::Instance,
    hash: u64,
    cfg: &SweepConfig,
    out_dir: &Path,
) -> Result<i32> {
    if args.method == MethodArg::Oracle || args.method == MethodArg::All {
        bail!("groundstate requires a single transformation method (not oracle/all)");
    }
    let runs = methods::run_methods(inst, args.method, cfg, args.root.to_choice())?;
    let run = &runs[0];
    let Outcome::Transform(result) = &run.outcome else {
        bail!("groundstate requires a transformation method");
    };
    let h = &inst.hamiltonian;
    let diag_state = ground_state_from_diagonal(result, h.hbar())?;
    let entangled = entangled_ground_state(&diag_state, result.sequence())?;
    let (residual, e0) = ground_state_residual(&entangled, &h.to_kpform(), h.hbar());
    let zpe_oracle = normal_modes(h).ok().and_then(|nm| nm.zpe(h.hbar()).ok());
    let report = emit::StateReport {
        method: run.name,
        solver: run.solver,
        converged: result.converged(),
        hbar: h.hbar(),
        m_eff: result.m_eff(),
        omega_sq: result.omega_sq(),
        b_diagonal: diag_state.b().diag(),
        b_entangled: entangled.b(),
        log_norm: entangled.log_norm(),
        residual,
        e0,
        zpe_oracle,
    };
    emit::write_file(&out_dir.join("state.json"), &emit::state_json(hash, &report))?;
    println!(
        "{}: converged={} residual={:e} e0={}",
        run.name,
        result.converged(),
        residual,
        emit::fmt_f64(e0)
    );
    Ok(if result.converged() { 0 } else { 2 })
}
