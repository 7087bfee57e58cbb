//! Hamiltonian spec files.
//!
//! Two JSON layouts are accepted (unknown fields are rejected):
//!
//! ```json
//! {"n": 2, "hbar": 1.0, "masses": [1.0, 1.0], "phi": [[2.0, 1.0], [1.0, 2.0]]}
//! {"chain": {"n": 4, "m": 1.0, "d1": 1.0, "d12": 1.0, "hbar": 1.0}}
//! ```
//!
//! `hbar` is optional and defaults to 1. The chain layout builds the
//! uniform nearest-neighbour chain and requires an even `n`.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use quadham_core::matrix::Mat;
use quadham_core::model::{as_uniform_nn_chain, build_bravais_chain, QuadHamiltonian};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitInput {
    n: usize,
    #[serde(default)]
    hbar: Option<f64>,
    masses: Vec<f64>,
    phi: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainFile {
    chain: ChainParams,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainParams {
    n: usize,
    m: f64,
    d1: f64,
    d12: f64,
    #[serde(default)]
    hbar: Option<f64>,
}

/// A parsed instance: the Hamiltonian plus the uniform-chain parameters
/// when the instance has that structure (declared or detected).
#[derive(Debug, Clone)]
pub struct Instance {
    pub hamiltonian: QuadHamiltonian,
    pub chain: Option<(f64, f64, f64)>,
}

pub fn load(path: &Path) -> Result<(Instance, Vec<u8>)> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("cannot read input file {}", path.display()))?;
    let text = std::str::from_utf8(&bytes)
        .with_context(|| format!("{} is not valid UTF-8", path.display()))?;
    // Parse to a generic value first so syntax errors carry line/column,
    // then decode the matching layout for field-level diagnostics.
    let value: serde_json::Value = serde_json::from_str(text)
        .with_context(|| format!("{}: JSON syntax error", path.display()))?;
    let instance = if value.get("chain").is_some() {
        let file: ChainFile = serde_json::from_value(value)
            .with_context(|| format!("{}: invalid chain spec", path.display()))?;
        let c = file.chain;
        let h = build_bravais_chain(c.n, c.m, c.d1, c.d12)
            .and_then(|h| h.with_hbar(c.hbar.unwrap_or(1.0)))
            .map_err(|e| anyhow!("{}: {e}", path.display()))?;
        Instance { hamiltonian: h, chain: Some((c.m, c.d1, c.d12)) }
    } else {
        let file: ExplicitInput = serde_json::from_value(value)
            .with_context(|| format!("{}: invalid Hamiltonian spec", path.display()))?;
        if file.masses.len() != file.n {
            bail!("{}: field `masses` must have length n = {}", path.display(), file.n);
        }
        if file.phi.len() != file.n {
            bail!("{}: field `phi` must be an {n}x{n} matrix", path.display(), n = file.n);
        }
        let mut phi = Mat::zeros(file.n);
        for (i, row) in file.phi.iter().enumerate() {
            if row.len() != file.n {
                bail!(
                    "{}: field `phi` row {i} has length {}, expected {}",
                    path.display(),
                    row.len(),
                    file.n
                );
            }
            for (j, &x) in row.iter().enumerate() {
                phi[(i, j)] = x;
            }
        }
        let h = QuadHamiltonian::from_phi(file.masses, &phi)
            .and_then(|h| h.with_hbar(file.hbar.unwrap_or(1.0)))
            .map_err(|e| anyhow!("{}: {e}", path.display()))?;
        let chain = as_uniform_nn_chain(&h);
        Instance { hamiltonian: h, chain }
    };
    Ok((instance, bytes))
}
