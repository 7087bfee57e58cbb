//! Method selection and execution.

use anyhow::{anyhow, bail, Result};
use clap::ValueEnum;

use quadham_core::diagonalizer::{
    bravais_closed_form, default_pairing, diagonalize_disjoint_pairs_chain,
    diagonalize_general_sweep, diagonalize_three_body, diagonalize_two_body, DiagonalResult,
    SweepConfig, ThreeBodySolver,
};
use quadham_core::error::Error as CoreError;
use quadham_core::normal_modes::{normal_modes, NormalModes};
use quadham_core::shear::RootChoice;

use crate::input::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum MethodArg {
    Oracle,
    TwoBody,
    PairsChain,
    Bravais,
    ThreeBody,
    Sweep,
    All,
}

impl MethodArg {
    pub fn name(&self) -> &'static str {
        match self {
            MethodArg::Oracle => "oracle",
            MethodArg::TwoBody => "two_body",
            MethodArg::PairsChain => "pairs_chain",
            MethodArg::Bravais => "bravais",
            MethodArg::ThreeBody => "three_body",
            MethodArg::Sweep => "sweep",
            MethodArg::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum RootArg {
    Smaller,
    Plus,
    Minus,
}

impl RootArg {
    pub fn name(&self) -> &'static str {
        match self {
            RootArg::Smaller => "smaller",
            RootArg::Plus => "plus",
            RootArg::Minus => "minus",
        }
    }

    pub fn to_choice(self) -> RootChoice {
        match self {
            RootArg::Smaller => RootChoice::Smaller,
            RootArg::Plus => RootChoice::Plus,
            RootArg::Minus => RootChoice::Minus,
        }
    }
}

pub enum Outcome {
    Oracle(NormalModes),
    Transform(DiagonalResult),
}

pub struct MethodRun {
    pub name: &'static str,
    /// Set when the three-body route had to fall back to the sweep.
    pub solver: Option<&'static str>,
    pub outcome: Outcome,
}

fn run_oracle(inst: &Instance) -> Result<MethodRun> {
    let nm = normal_modes(&inst.hamiltonian).map_err(|e| anyhow!("{e}"))?;
    Ok(MethodRun { name: "oracle", solver: None, outcome: Outcome::Oracle(nm) })
}

fn run_two_body(inst: &Instance, root: RootChoice) -> Result<MethodRun> {
    if inst.hamiltonian.n() != 2 {
        bail!("method two_body requires n = 2 (instance has n = {})", inst.hamiltonian.n());
    }
    let r = diagonalize_two_body(&inst.hamiltonian, root).map_err(|e| anyhow!("{e}"))?;
    Ok(MethodRun { name: "two_body", solver: None, outcome: Outcome::Transform(r) })
}

fn run_pairs_chain(inst: &Instance, root: RootChoice) -> Result<MethodRun> {
    let n = inst.hamiltonian.n();
    let pairs = default_pairing(n)
        .map_err(|_| anyhow!("method pairs_chain requires an even n (instance has n = {n})"))?;
    let r = diagonalize_disjoint_pairs_chain(&inst.hamiltonian, &pairs, root)
        .map_err(|e| anyhow!("{e}"))?;
    Ok(MethodRun { name: "pairs_chain", solver: None, outcome: Outcome::Transform(r) })
}

fn run_bravais(inst: &Instance) -> Result<MethodRun> {
    let Some((m, d1, d12)) = inst.chain else {
        bail!(
            "method bravais requires a uniform nearest-neighbour chain \
             (use the chain input layout or an exactly uniform phi matrix)"
        );
    };
    let r = bravais_closed_form(inst.hamiltonian.n(), m, d1, d12).map_err(|e| anyhow!("{e}"))?;
    Ok(MethodRun { name: "bravais", solver: None, outcome: Outcome::Transform(r) })
}

fn run_three_body(inst: &Instance, cfg: &SweepConfig) -> Result<MethodRun> {
    if inst.hamiltonian.n() != 3 {
        bail!("method three_body requires n = 3 (instance has n = {})", inst.hamiltonian.n());
    }
    match diagonalize_three_body(&inst.hamiltonian, ThreeBodySolver::StagedNewton) {
        Ok(r) => Ok(MethodRun {
            name: "three_body",
            solver: Some("staged_newton"),
            outcome: Outcome::Transform(r),
        }),
        Err(CoreError::NoConvergence { .. }) => {
            let r = diagonalize_general_sweep(&inst.hamiltonian, cfg).map_err(|e| anyhow!("{e}"))?;
            Ok(MethodRun {
                name: "three_body",
                solver: Some("sweep_fallback"),
                outcome: Outcome::Transform(r),
            })
        }
        Err(e) => Err(anyhow!("{e}")),
    }
}

fn run_sweep(inst: &Instance, cfg: &SweepConfig) -> Result<MethodRun> {
    let r = diagonalize_general_sweep(&inst.hamiltonian, cfg).map_err(|e| anyhow!("{e}"))?;
    Ok(MethodRun { name: "sweep", solver: None, outcome: Outcome::Transform(r) })
}

fn pair_decoupled(inst: &Instance) -> bool {
    let n = inst.hamiltonian.n();
    let Ok(pairs) = default_pairing(n) else { return false };
    let mut owner = vec![usize::MAX; n];
    for (p, &(a, b)) in pairs.iter().enumerate() {
        owner[a] = p;
        owner[b] = p;
    }
    inst.hamiltonian
        .couplings()
        .all(|(i, j, d)| d == 0.0 || owner[i] == owner[j])
}

/// Runs the selected method, or for `all` every method whose structural
/// preconditions the instance meets (always including the oracle and the
/// sweep). `root` selects the quadratic branch for the closed-form routes;
/// the sweep always iterates with the smaller-magnitude root.
pub fn run_methods(
    inst: &Instance,
    method: MethodArg,
    cfg: &SweepConfig,
    root: RootChoice,
) -> Result<Vec<MethodRun>> {
    match method {
        MethodArg::Oracle => Ok(vec![run_oracle(inst)?]),
        MethodArg::TwoBody => Ok(vec![run_two_body(inst, root)?]),
        MethodArg::PairsChain => Ok(vec![run_pairs_chain(inst, root)?]),
        MethodArg::Bravais => Ok(vec![run_bravais(inst)?]),
        MethodArg::ThreeBody => Ok(vec![run_three_body(inst, cfg)?]),
        MethodArg::Sweep => Ok(vec![run_sweep(inst, cfg)?]),
        MethodArg::All => {
            let n = inst.hamiltonian.n();
            let mut runs = vec![run_oracle(inst)?];
            if n == 2 {
                runs.push(run_two_body(inst, root)?);
            }
            if n == 3 {
                runs.push(run_three_body(inst, cfg)?);
            }
            if n.is_multiple_of(2) && pair_decoupled(inst) {
                runs.push(run_pairs_chain(inst, root)?);
            }
            if inst.chain.is_some() && n.is_multiple_of(2) {
                runs.push(run_bravais(inst)?);
            }
            runs.push(run_sweep(inst, cfg)?);
            Ok(runs)
        }
    }
}
