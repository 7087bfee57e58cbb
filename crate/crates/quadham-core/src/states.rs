//! Gaussian ground states, ladder-operator algebra and the zero-point
//! energy comparison harness.
//!
//! In the diagonal frame the ground state is a product Gaussian with
//! exponent matrix `B = diag(m̃ᵢωᵢ/ħ)`. Substituting the shear sequence's
//! coordinate map produces the (generally entangled) ground state of the
//! original Hamiltonian; since every shear has unit determinant the
//! normalization constant never changes. Correctness is checked against
//! the eigenvalue identity `ħ²·B·K·B = V` with energy `E₀ = ħ²/2·tr(K·B)`.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::diagonalizer::{
    bravais_closed_form, diagonalize_general_sweep, DiagonalResult, SweepConfig,
};
use crate::error::{invalid, Error, Result};
use crate::math;
use crate::matrix::Mat;
use crate::model::{as_uniform_nn_chain, KPForm, QuadHamiltonian};
use crate::normal_modes::{normal_modes, toeplitz_frequencies, zero_point_energy};
use crate::shear::ShearSequence;

/// Product-form witness tolerance on the exponent matrix off-diagonals.
pub const PRODUCT_FORM_TOL: f64 = 1e-12;

/// Normalized multivariate Gaussian `ψ(u) ∝ exp(−½ uᵀBu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    b: Mat,
    log_norm: f64,
}

impl GaussianState {
    /// Validates symmetry and positive definiteness of `B` and computes
    /// the log normalization `¼·ln det(B/π)`.
    pub fn new(b: Mat) -> Result<Self> {
        if !b.is_symmetric_within(crate::model::SYMMETRY_TOL) {
            return Err(Error::NotSymmetric { max_asymmetry: b.max_asymmetry() });
        }
        let b = b.symmetrized();
        let log_det = b.log_det_pd()?;
        let n = b.n() as f64;
        let log_norm = 0.25 * (log_det - n * math::ln(core::f64::consts::PI));
        Ok(GaussianState { b, log_norm })
    }

    pub fn n(&self) -> usize {
        self.b.n()
    }

    pub fn b(&self) -> &Mat {
        &self.b
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// A Gaussian factorizes into single-coordinate functions exactly when
    /// its exponent matrix is diagonal.
    pub fn is_product_form(&self) -> bool {
        self.b.max_offdiag() <= PRODUCT_FORM_TOL
    }
}

/// Ground state of the diagonalized Hamiltonian: `B = diag(m̃ᵢωᵢ/ħ)`.
///
/// Requires every `ωᵢ² > 0`; otherwise there is no normalizable ground
/// state and the offending values are reported.
pub fn ground_state_from_diagonal(result: &DiagonalResult, hbar: f64) -> Result<GaussianState> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(invalid("hbar must be strictly positive and finite"));
    }
    let bad: Vec<f64> = result.omega_sq().iter().copied().filter(|&w| w <= 0.0).collect();
    if !bad.is_empty() {
        return Err(Error::UnstablePotential { omega_sq: bad });
    }
    let diag: Vec<f64> = result
        .m_eff()
        .iter()
        .zip(result.omega_sq().iter())
        .map(|(&m, &w2)| m * math::sqrt(w2) / hbar)
        .collect();
    GaussianState::new(Mat::from_diag(&diag))
}

/// Applies a shear sequence to a state: the wavefunction argument
/// substitution is the inverse of the sequence's conjugation map, so the
/// exponent transforms as `B' = GᵀBG` with `G = composed_map⁻¹`. At `n = 2`
/// this reproduces the closed-form substitution `u₁' = u₁ + αu₂`,
/// `u₂' = u₂ + β(u₁ + αu₂)`. Unit determinant keeps the normalization
/// constant unchanged (it is still recomputed from `B'`).
pub fn entangled_ground_state(state: &GaussianState, seq: &ShearSequence) -> Result<GaussianState> {
    if seq.n() != state.n() {
        return Err(invalid("sequence and state dimensions must match"));
    }
    let g = seq.inverse_map();
    GaussianState::new(state.b().congruent(&g))
}

/// Residual of the eigenvalue identity and the state's energy:
/// `(‖ħ²BKB − V‖_F / ‖V‖_F, ħ²/2·tr(KB))`.
///
/// `ψ = exp(−½uᵀBu)` satisfies `Hψ = Eψ` exactly when `ħ²BKB = V`.
pub fn ground_state_residual(state: &GaussianState, form: &KPForm, hbar: f64) -> (f64, f64) {
    let n = state.n();
    let bkb = state.b().mul(form.k()).mul(state.b());
    let mut diff = Mat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            diff[(i, j)] = hbar * hbar * bkb[(i, j)] - form.v()[(i, j)];
        }
    }
    let v_norm = form.v().frobenius();
    let residual = if v_norm > 0.0 { diff.frobenius() / v_norm } else { diff.frobenius() };
    let kb = form.k().mul(state.b());
    let energy = 0.5 * hbar * hbar * kb.diag().iter().sum::<f64>();
    (residual, energy)
}

/// A linear combination `Σ_k (cu_k·u_k + cp_k·p_k)` with complex
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderOp {
    cu: Vec<Complex64>,
    cp: Vec<Complex64>,
}

impl LadderOp {
    pub fn new(cu: Vec<Complex64>, cp: Vec<Complex64>) -> Result<Self> {
        if cu.len() != cp.len() {
            return Err(invalid("coefficient vectors must have equal length"));
        }
        let finite =
            cu.iter().chain(cp.iter()).all(|c| c.re.is_finite() && c.im.is_finite());
        if !finite {
            return Err(invalid("coefficients must be finite"));
        }
        if cu.iter().chain(cp.iter()).all(|c| *c == Complex64::ZERO) {
            return Err(invalid("at least one coefficient must be nonzero"));
        }
        Ok(LadderOp { cu, cp })
    }

    /// The bare position observable `u_i`.
    pub fn position(n: usize, i: usize) -> Result<Self> {
        let mut cu = alloc::vec![Complex64::ZERO; n];
        *cu.get_mut(i).ok_or_else(|| invalid("index out of range"))? = Complex64::ONE;
        LadderOp::new(cu, alloc::vec![Complex64::ZERO; n])
    }

    /// The bare momentum observable `p_i`.
    pub fn momentum(n: usize, i: usize) -> Result<Self> {
        let mut cp = alloc::vec![Complex64::ZERO; n];
        *cp.get_mut(i).ok_or_else(|| invalid("index out of range"))? = Complex64::ONE;
        LadderOp::new(alloc::vec![Complex64::ZERO; n], cp)
    }

    pub fn n(&self) -> usize {
        self.cu.len()
    }

    pub fn cu(&self) -> &[Complex64] {
        &self.cu
    }

    pub fn cp(&self) -> &[Complex64] {
        &self.cp
    }
}

/// Annihilation/creation pair for mode `i` of a diagonalized Hamiltonian:
/// `a†ᵢ = (m̃ᵢωᵢuᵢ − ipᵢ)/√(2m̃ᵢħωᵢ)` and its conjugate. Returns `(a, a†)`.
pub fn ladder_pair(
    n: usize,
    i: usize,
    m_eff: f64,
    omega: f64,
    hbar: f64,
) -> Result<(LadderOp, LadderOp)> {
    if i >= n {
        return Err(invalid("mode index out of range"));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(invalid("ladder operators require omega > 0"));
    }
    if !(m_eff.is_finite() && m_eff > 0.0) || !(hbar.is_finite() && hbar > 0.0) {
        return Err(invalid("mass and hbar must be strictly positive"));
    }
    let norm = math::sqrt(2.0 * m_eff * hbar * omega);
    let cu = m_eff * omega / norm;
    let cp = 1.0 / norm;
    let mut a_cu = alloc::vec![Complex64::ZERO; n];
    let mut a_cp = alloc::vec![Complex64::ZERO; n];
    a_cu[i] = Complex64::new(cu, 0.0);
    a_cp[i] = Complex64::new(0.0, cp);
    let mut adag_cu = alloc::vec![Complex64::ZERO; n];
    let mut adag_cp = alloc::vec![Complex64::ZERO; n];
    adag_cu[i] = Complex64::new(cu, 0.0);
    adag_cp[i] = Complex64::new(0.0, -cp);
    Ok((LadderOp::new(a_cu, a_cp)?, LadderOp::new(adag_cu, adag_cp)?))
}

/// Commutator of two linear observables - a scalar, evaluated exactly:
/// `[x, y] = iħ·Σ_k (xu_k·yp_k − xp_k·yu_k)`.
pub fn commutator(x: &LadderOp, y: &LadderOp, hbar: f64) -> Result<Complex64> {
    if x.n() != y.n() {
        return Err(invalid("operators act on different particle counts"));
    }
    let mut sum = Complex64::ZERO;
    for k in 0..x.n() {
        sum += x.cu[k] * y.cp[k] - x.cp[k] * y.cu[k];
    }
    Ok(sum * Complex64::new(0.0, hbar))
}

/// Diagonalization routes compared by [`zpe_compare`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZpeMethod {
    /// Classical normal-mode eigendecomposition.
    Oracle,
    /// General shear sweep with default configuration.
    Sweep,
    /// Two-frequency closed form for uniform chains (informational on
    /// genuine nearest-neighbour chains, where it drops inter-pair
    /// couplings).
    BravaisClosedForm,
    /// Tridiagonal Toeplitz closed-form spectrum for uniform chains.
    ToeplitzClosedForm,
}

impl ZpeMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ZpeMethod::Oracle => "oracle",
            ZpeMethod::Sweep => "sweep",
            ZpeMethod::BravaisClosedForm => "bravais_closed_form",
            ZpeMethod::ToeplitzClosedForm => "toeplitz_closed_form",
        }
    }
}

/// One method's row in the comparison: sorted squared frequencies, the
/// zero-point energy when it is defined, and the failure reason when not.
#[derive(Debug, Clone, PartialEq)]
pub struct ZpeEntry {
    pub method: ZpeMethod,
    pub omega_sq: Option<Vec<f64>>,
    pub zpe: Option<f64>,
    pub converged: Option<bool>,
    pub error: Option<String>,
}

/// Pairwise absolute differences between two methods' results.
#[derive(Debug, Clone, PartialEq)]
pub struct ZpeDiff {
    pub a: ZpeMethod,
    pub b: ZpeMethod,
    pub zpe_abs_diff: Option<f64>,
    pub omega_sq_max_abs_diff: Option<f64>,
}

/// Comparison report: per-method entries plus all pairwise differences.
/// Purely descriptive - no equality is asserted here.
#[derive(Debug, Clone, PartialEq)]
pub struct ZpeComparison {
    pub entries: Vec<ZpeEntry>,
    pub diffs: Vec<ZpeDiff>,
}

fn sorted(mut w: Vec<f64>) -> Vec<f64> {
    w.sort_by(f64::total_cmp);
    w
}

fn zpe_of(omega_sq: &[f64], hbar: f64) -> (Option<f64>, Option<String>) {
    match zero_point_energy(omega_sq, hbar) {
        Ok(z) => (Some(z), None),
        Err(e) => (None, Some(alloc::format!("{e}"))),
    }
}

fn entry_for(h: &QuadHamiltonian, method: ZpeMethod, sweep_cfg: &SweepConfig) -> ZpeEntry {
    let hbar = h.hbar();
    let chain = as_uniform_nn_chain(h);
    match method {
        ZpeMethod::Oracle => match normal_modes(h) {
            Ok(nm) => {
                let (zpe, error) = zpe_of(nm.omega_sq(), hbar);
                ZpeEntry {
                    method,
                    omega_sq: Some(nm.omega_sq().to_vec()),
                    zpe,
                    converged: None,
                    error,
                }
            }
            Err(e) => ZpeEntry {
                method,
                omega_sq: None,
                zpe: None,
                converged: None,
                error: Some(alloc::format!("{e}")),
            },
        },
        ZpeMethod::Sweep => match diagonalize_general_sweep(h, sweep_cfg) {
            Ok(r) => {
                let w = r.sorted_omega_sq();
                let (zpe, error) = if r.converged() {
                    zpe_of(&w, hbar)
                } else {
                    (None, Some(String::from("sweep did not converge")))
                };
                ZpeEntry { method, omega_sq: Some(w), zpe, converged: Some(r.converged()), error }
            }
            Err(e) => ZpeEntry {
                method,
                omega_sq: None,
                zpe: None,
                converged: None,
                error: Some(alloc::format!("{e}")),
            },
        },
        ZpeMethod::BravaisClosedForm => match chain {
            Some((m, d1, d12)) if h.n().is_multiple_of(2) => match bravais_closed_form(h.n(), m, d1, d12) {
                Ok(r) => {
                    let w = r.sorted_omega_sq();
                    let (zpe, error) = zpe_of(&w, hbar);
                    ZpeEntry {
                        method,
                        omega_sq: Some(w),
                        zpe,
                        converged: Some(r.converged()),
                        error,
                    }
                }
                Err(e) => ZpeEntry {
                    method,
                    omega_sq: None,
                    zpe: None,
                    converged: None,
                    error: Some(alloc::format!("{e}")),
                },
            },
            _ => ZpeEntry {
                method,
                omega_sq: None,
                zpe: None,
                converged: None,
                error: Some(String::from(
                    "requires a uniform nearest-neighbour chain with even n",
                )),
            },
        },
        ZpeMethod::ToeplitzClosedForm => match chain {
            Some((m, d1, d12)) => match toeplitz_frequencies(h.n(), 2.0 * d1, d12, m) {
                Ok(w) => {
                    let (zpe, error) = zpe_of(&w, hbar);
                    ZpeEntry { method, omega_sq: Some(sorted(w)), zpe, converged: None, error }
                }
                Err(e) => ZpeEntry {
                    method,
                    omega_sq: None,
                    zpe: None,
                    converged: None,
                    error: Some(alloc::format!("{e}")),
                },
            },
            None => ZpeEntry {
                method,
                omega_sq: None,
                zpe: None,
                converged: None,
                error: Some(String::from("requires a uniform nearest-neighbour chain")),
            },
        },
    }
}

/// Computes `Σħω/2` by each requested method and tabulates all pairwise
/// absolute differences of zero-point energies and of sorted squared
/// frequencies. Structurally inapplicable or unstable methods produce
/// error entries rather than failures.
pub fn zpe_compare(h: &QuadHamiltonian, methods: &[ZpeMethod]) -> ZpeComparison {
    zpe_compare_with(h, methods, &SweepConfig::default())
}

/// [`zpe_compare`] with an explicit sweep configuration.
pub fn zpe_compare_with(
    h: &QuadHamiltonian,
    methods: &[ZpeMethod],
    sweep_cfg: &SweepConfig,
) -> ZpeComparison {
    let entries: Vec<ZpeEntry> = methods.iter().map(|&m| entry_for(h, m, sweep_cfg)).collect();
    let mut diffs = Vec::new();
    for x in 0..entries.len() {
        for y in (x + 1)..entries.len() {
            let (ea, eb) = (&entries[x], &entries[y]);
            let zpe_abs_diff = match (ea.zpe, eb.zpe) {
                (Some(a), Some(b)) => Some(math::abs(a - b)),
                _ => None,
            };
            let omega_sq_max_abs_diff = match (&ea.omega_sq, &eb.omega_sq) {
                (Some(a), Some(b)) if a.len() == b.len() => Some(
                    a.iter()
                        .zip(b.iter())
                        .fold(0.0, |acc, (x, y)| math::max(acc, math::abs(x - y))),
                ),
                _ => None,
            };
            diffs.push(ZpeDiff {
                a: ea.method,
                b: eb.method,
                zpe_abs_diff,
                omega_sq_max_abs_diff,
            });
        }
    }
    ZpeComparison { entries, diffs }
}
