//! Hamiltonian data model: symmetrized coupling parameters, the matrix
//! representation closed under shear conjugation, and builders for the
//! standard chain families.
//!
//! The Hamiltonian `H = Σ pᵢ²/2mᵢ + Σ dᵢuᵢ² + Σ_{i<j} dᵢⱼuᵢuⱼ` is stored as
//! masses plus symmetrized parameters `dᵢ`, `dᵢⱼ`. Raw force-constant
//! matrices `Φ` are accepted at the boundary and symmetrized immediately:
//! `dᵢ = Φᵢᵢ/2`, `dᵢⱼ = (Φᵢⱼ + Φⱼᵢ)/2`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::matrix::Mat;

/// Relative tolerance for symmetry validation at the input boundary.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// An n-body quadratic Hamiltonian in symmetrized parameters.
///
/// Immutable after construction; all queries are by value. `hbar` defaults
/// to 1 and only enters energy and ground-state computations.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadHamiltonian {
    masses: Vec<f64>,
    d_diag: Vec<f64>,
    d_off: Vec<f64>, // strict upper triangle, row-major
    hbar: f64,
}

fn off_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

fn check_masses(masses: &[f64]) -> Result<()> {
    if masses.is_empty() {
        return Err(invalid("at least one particle is required"));
    }
    if masses.iter().any(|m| !m.is_finite() || *m <= 0.0) {
        return Err(invalid("masses must be strictly positive and finite"));
    }
    Ok(())
}

impl QuadHamiltonian {
    /// Builds a Hamiltonian from masses, on-site constants and an explicit
    /// list of couplings `(i, j, d_ij)` with `i ≠ j` (0-based, symmetric).
    pub fn new(masses: Vec<f64>, d_diag: Vec<f64>, couplings: &[(usize, usize, f64)]) -> Result<Self> {
        check_masses(&masses)?;
        let n = masses.len();
        if d_diag.len() != n {
            return Err(invalid("d_diag length must match the number of masses"));
        }
        if d_diag.iter().any(|d| !d.is_finite()) {
            return Err(invalid("d_diag entries must be finite"));
        }
        let mut d_off = vec![0.0; n * (n - 1) / 2];
        for &(i, j, v) in couplings {
            if i == j {
                return Err(invalid("self-pair couplings are forbidden"));
            }
            if i >= n || j >= n {
                return Err(invalid("coupling index out of range"));
            }
            if !v.is_finite() {
                return Err(invalid("coupling values must be finite"));
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            d_off[off_index(n, a, b)] = v;
        }
        Ok(QuadHamiltonian { masses, d_diag, d_off, hbar: 1.0 })
    }

    /// Accepts a raw (possibly non-symmetric) force-constant matrix `Φ` and
    /// stores its symmetrized parameters.
    pub fn from_phi(masses: Vec<f64>, phi: &Mat) -> Result<Self> {
        check_masses(&masses)?;
        if phi.n() != masses.len() {
            return Err(invalid("phi dimension must match the number of masses"));
        }
        let params = symmetrize(phi)?;
        Ok(QuadHamiltonian {
            masses,
            d_diag: params.d_diag,
            d_off: params.d_off,
            hbar: 1.0,
        })
    }

    /// Replaces the reduced Planck constant (default 1).
    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        if !hbar.is_finite() || hbar <= 0.0 {
            return Err(invalid("hbar must be strictly positive and finite"));
        }
        self.hbar = hbar;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn d_diag(&self) -> &[f64] {
        &self.d_diag
    }

    /// Symmetric coupling query: `coupling(i, j) == coupling(j, i)`.
    ///
    /// Panics on `i == j` (self-pairs are not part of the model) or on an
    /// out-of-range index.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        assert!(i != j, "self-pair coupling query is forbidden");
        assert!(i < self.n() && j < self.n(), "coupling index out of range");
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.d_off[off_index(self.n(), a, b)]
    }

    /// Iterates couplings in `i < j` row-major order.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| {
            ((i + 1)..n).map(move |j| (i, j, self.d_off[off_index(n, i, j)]))
        })
    }

    /// Matrix representation: `K = diag(1/mᵢ)`, `Vᵢᵢ = 2dᵢ`, `Vᵢⱼ = dᵢⱼ`,
    /// so that `½uᵀVu` reproduces the potential exactly.
    pub fn to_kpform(&self) -> KPForm {
        let n = self.n();
        let mut k = Mat::zeros(n);
        let mut v = Mat::zeros(n);
        for i in 0..n {
            k[(i, i)] = 1.0 / self.masses[i];
            v[(i, i)] = 2.0 * self.d_diag[i];
        }
        for (i, j, d) in self.couplings() {
            v[(i, j)] = d;
            v[(j, i)] = d;
        }
        KPForm { k, v }
    }

    /// Reads parameters back from a form whose kinetic matrix is diagonal.
    pub fn from_kpform(form: &KPForm, hbar: f64) -> Result<Self> {
        let n = form.n();
        let scale = math::max(1.0, form.k.max_abs());
        if form.k.max_offdiag() > SYMMETRY_TOL * scale {
            return Err(invalid("kinetic matrix must be diagonal to read back parameters"));
        }
        let mut masses = Vec::with_capacity(n);
        for i in 0..n {
            let kii = form.k[(i, i)];
            if kii <= 0.0 {
                return Err(invalid("kinetic diagonal must be strictly positive"));
            }
            masses.push(1.0 / kii);
        }
        let d_diag: Vec<f64> = (0..n).map(|i| 0.5 * form.v[(i, i)]).collect();
        let mut couplings = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                couplings.push((i, j, form.v[(i, j)]));
            }
        }
        QuadHamiltonian::new(masses, d_diag, &couplings)?.with_hbar(hbar)
    }
}

/// Symmetrized potential parameters extracted from a raw `Φ` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedParams {
    /// On-site constants `dᵢ = Φᵢᵢ/2`.
    pub d_diag: Vec<f64>,
    /// Couplings `dᵢⱼ = (Φᵢⱼ + Φⱼᵢ)/2` for `i < j`, row-major.
    pub d_off: Vec<f64>,
}

/// Halves the diagonal and symmetrizes the off-diagonal of `Φ`.
///
/// Idempotent on already-symmetric input in the sense that the induced
/// potential `½uᵀVu` is unchanged.
pub fn symmetrize(phi: &Mat) -> Result<SymmetrizedParams> {
    if !phi.is_finite() {
        return Err(invalid("phi entries must be finite"));
    }
    let n = phi.n();
    let d_diag: Vec<f64> = (0..n).map(|i| 0.5 * phi[(i, i)]).collect();
    let mut d_off = vec![0.0; n * (n - 1) / 2];
    for i in 0..n {
        for j in (i + 1)..n {
            d_off[off_index(n, i, j)] = 0.5 * (phi[(i, j)] + phi[(j, i)]);
        }
    }
    Ok(SymmetrizedParams { d_diag, d_off })
}

/// Linear chain with nearest-neighbour couplings `d_nn[i]` between
/// particles `i` and `i+1`; all longer-range couplings are zero.
pub fn build_nn_chain(masses: &[f64], d_diag: &[f64], d_nn: &[f64]) -> Result<QuadHamiltonian> {
    if d_nn.len() + 1 != masses.len() {
        return Err(invalid("nearest-neighbour couplings must have length n-1"));
    }
    let couplings: Vec<(usize, usize, f64)> =
        d_nn.iter().enumerate().map(|(i, &d)| (i, i + 1, d)).collect();
    QuadHamiltonian::new(masses.to_vec(), d_diag.to_vec(), &couplings)
}

/// Translation-invariant chain: equal masses `m`, equal on-site constants
/// `d1`, equal nearest-neighbour couplings `d12`. Requires even `n`; the
/// pairwise decomposition this family exists for assumes it.
pub fn build_bravais_chain(n: usize, m: f64, d1: f64, d12: f64) -> Result<QuadHamiltonian> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(invalid("a Bravais chain requires an even particle count n >= 2"));
    }
    build_nn_chain(&vec![m; n], &vec![d1; n], &vec![d12; n - 1])
}

/// Recognises a uniform nearest-neighbour chain and returns `(m, d1, d12)`.
///
/// Parameters must be exactly equal (bitwise), which holds for instances
/// built from chain parameters; hand-assembled instances with rounding
/// noise are not recognised. For `n = 1` the coupling slot is reported 0.
pub fn as_uniform_nn_chain(h: &QuadHamiltonian) -> Option<(f64, f64, f64)> {
    let n = h.n();
    let m = h.masses()[0];
    let d1 = h.d_diag()[0];
    if h.masses().iter().any(|&x| x != m) || h.d_diag().iter().any(|&x| x != d1) {
        return None;
    }
    if n == 1 {
        return Some((m, d1, 0.0));
    }
    let d12 = h.coupling(0, 1);
    for (i, j, d) in h.couplings() {
        let want = if j == i + 1 { d12 } else { 0.0 };
        if d != want {
            return None;
        }
    }
    Some((m, d1, d12))
}

/// General quadratic form `H = ½pᵀKp + ½uᵀVu`.
///
/// `K` carries inverse-mass units (cross-kinetic terms appear as its
/// off-diagonal entries), `V` the potential. Both are stored exactly
/// symmetric; `K` must be positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct KPForm {
    k: Mat,
    v: Mat,
}

impl KPForm {
    pub fn new(k: Mat, v: Mat) -> Result<Self> {
        if k.n() != v.n() {
            return Err(invalid("K and V must have equal dimensions"));
        }
        if !k.is_finite() || !v.is_finite() {
            return Err(invalid("K and V entries must be finite"));
        }
        for (name, m) in [("K", &k), ("V", &v)] {
            if !m.is_symmetric_within(SYMMETRY_TOL) {
                let _ = name;
                return Err(Error::NotSymmetric { max_asymmetry: m.max_asymmetry() });
            }
        }
        let k = k.symmetrized();
        let v = v.symmetrized();
        k.cholesky()?;
        Ok(KPForm { k, v })
    }

    /// Internal constructor for conjugation outputs: re-symmetrizes storage
    /// without re-running the positive-definiteness check (congruence
    /// preserves it).
    pub(crate) fn from_conjugation(k: Mat, v: Mat) -> Self {
        KPForm { k: k.symmetrized(), v: v.symmetrized() }
    }

    pub fn n(&self) -> usize {
        self.k.n()
    }

    pub fn k(&self) -> &Mat {
        &self.k
    }

    pub fn v(&self) -> &Mat {
        &self.v
    }
}
