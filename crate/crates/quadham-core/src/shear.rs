//! The pair-transformation engine.
//!
//! One shear step on particles `(i, j)` with parameters `(α, β)` induces a
//! unit-determinant substitution on the coordinates,
//!
//! ```text
//! uᵢ → (1+αβ)uᵢ − αuⱼ,    uⱼ → uⱼ − βuᵢ,
//! ```
//!
//! with the contragredient map on momenta (`pᵢ → pᵢ + βpⱼ`,
//! `pⱼ → αpᵢ + (1+αβ)pⱼ`), so canonical commutators are preserved. With
//! `β = −α/(α² + mⱼ/mᵢ)` the kinetic matrix stays diagonal; the quadratic
//! in `α` solved by [`alpha_roots`] then kills the `(i,j)` potential
//! coupling.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math;
use crate::matrix::Mat;
use crate::model::KPForm;

/// One pair transformation: indices `(i, j)` (0-based, distinct) and the
/// dimensionless shear parameters `(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearStep {
    i: usize,
    j: usize,
    alpha: f64,
    beta: f64,
}

impl ShearStep {
    pub fn new(i: usize, j: usize, alpha: f64, beta: f64) -> Result<Self> {
        if i == j {
            return Err(invalid("shear step requires two distinct particle indices"));
        }
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(invalid("shear parameters must be finite"));
        }
        Ok(ShearStep { i, j, alpha, beta })
    }

    /// Step with `β` slaved to keep the kinetic matrix diagonal.
    pub fn with_slaved_beta(i: usize, j: usize, alpha: f64, m_i: f64, m_j: f64) -> Result<Self> {
        ShearStep::new(i, j, alpha, beta_for_alpha(alpha, m_i, m_j))
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn check_range(&self, n: usize) -> Result<()> {
        if self.i >= n || self.j >= n {
            return Err(invalid("shear step index out of range"));
        }
        Ok(())
    }

    /// Coordinate substitution matrix `M` (`u → M·u` under conjugation):
    /// identity except for the 2×2 block `[[1+αβ, −α], [−β, 1]]` on `(i, j)`.
    /// `det M = 1` identically.
    pub fn coordinate_map(&self, n: usize) -> Result<Mat> {
        self.check_range(n)?;
        let mut m = Mat::identity(n);
        m[(self.i, self.i)] = 1.0 + self.alpha * self.beta;
        m[(self.i, self.j)] = -self.alpha;
        m[(self.j, self.i)] = -self.beta;
        m[(self.j, self.j)] = 1.0;
        Ok(m)
    }

    /// Momentum substitution matrix `N = (M⁻¹)ᵀ`, in closed form:
    /// block `[[1, β], [α, 1+αβ]]` on `(i, j)`.
    pub fn momentum_map(&self, n: usize) -> Result<Mat> {
        self.check_range(n)?;
        let mut m = Mat::identity(n);
        m[(self.i, self.i)] = 1.0;
        m[(self.i, self.j)] = self.beta;
        m[(self.j, self.i)] = self.alpha;
        m[(self.j, self.j)] = 1.0 + self.alpha * self.beta;
        Ok(m)
    }

    /// Closed-form `M⁻¹`: block `[[1, α], [β, 1+αβ]]` on `(i, j)`. This is
    /// the substitution wavefunction arguments undergo when the transform
    /// acts on a state.
    pub fn inverse_coordinate_map(&self, n: usize) -> Result<Mat> {
        self.check_range(n)?;
        let mut m = Mat::identity(n);
        m[(self.i, self.i)] = 1.0;
        m[(self.i, self.j)] = self.alpha;
        m[(self.j, self.i)] = self.beta;
        m[(self.j, self.j)] = 1.0 + self.alpha * self.beta;
        Ok(m)
    }
}

/// Ordered composition of shear steps together with the accumulated
/// coordinate substitution (`composed_map = M₁·M₂·⋯·M_N` in application
/// order; `det = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct ShearSequence {
    n: usize,
    steps: Vec<ShearStep>,
    composed: Mat,
}

impl ShearSequence {
    pub fn identity(n: usize) -> Self {
        ShearSequence { n, steps: Vec::new(), composed: Mat::identity(n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[ShearStep] {
        &self.steps
    }

    pub fn composed_map(&self) -> &Mat {
        &self.composed
    }

    pub fn push(&mut self, step: ShearStep) -> Result<()> {
        let m = step.coordinate_map(self.n)?;
        self.composed = self.composed.mul(&m);
        self.steps.push(step);
        Ok(())
    }

    /// Inverse of the composed coordinate map, built from the per-step
    /// closed-form inverses (no numerical matrix inversion).
    pub fn inverse_map(&self) -> Mat {
        let mut acc = Mat::identity(self.n);
        for step in &self.steps {
            let g = step
                .inverse_coordinate_map(self.n)
                .expect("steps were range-checked on push");
            acc = g.mul(&acc);
        }
        acc
    }
}

/// Conjugates a form by one shear step: `Ṽ = MᵀVM`, `K̃ = NᵀKN`, output
/// re-symmetrized. The eigenvalue multiset of `K·V` is preserved.
pub fn conjugate(form: &KPForm, step: &ShearStep) -> Result<KPForm> {
    let n = form.n();
    let m = step.coordinate_map(n)?;
    let nmat = step.momentum_map(n)?;
    Ok(KPForm::from_conjugation(form.k().congruent(&nmat), form.v().congruent(&m)))
}

/// `β = −α/(α² + mⱼ/mᵢ)`: the unique choice for which the conjugated
/// kinetic matrix keeps a zero `(i,j)` entry when `K` is diagonal there.
pub fn beta_for_alpha(alpha: f64, m_i: f64, m_j: f64) -> f64 {
    debug_assert!(m_i > 0.0 && m_j > 0.0);
    -alpha / (alpha * alpha + m_j / m_i)
}

/// The two real solutions of the pair-decoupling quadratic, or the marker
/// for an already-decoupled pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaRoots {
    /// `d_ij = 0`: the identity transformation suffices (canonical root 0).
    NoCoupling,
    /// Both branches of the quadratic; `plus·minus = −k_ji` (Vieta).
    Roots { plus: f64, minus: f64 },
}

/// Which quadratic root a diagonalization should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootChoice {
    /// Smaller magnitude (default; best-conditioned denominators). Ties
    /// resolve to the plus branch.
    Smaller,
    Plus,
    Minus,
}

impl AlphaRoots {
    pub fn select(&self, choice: RootChoice) -> f64 {
        match *self {
            AlphaRoots::NoCoupling => 0.0,
            AlphaRoots::Roots { plus, minus } => match choice {
                RootChoice::Plus => plus,
                RootChoice::Minus => minus,
                RootChoice::Smaller => {
                    if math::abs(plus) <= math::abs(minus) {
                        plus
                    } else {
                        minus
                    }
                }
            },
        }
    }
}

/// Solves `−d_ij·α² − 2(dᵢ·k_ji − dⱼ)·α + d_ij·k_ji = 0` for the shear
/// parameter of pair `(i, j)`, with `k_ji = mⱼ/mᵢ`:
///
/// ```text
/// α± = −[(dᵢ·k_ji − dⱼ) ± √((dᵢ·k_ji − dⱼ)² + d_ij²·k_ji)] / d_ij
/// ```
///
/// The discriminant is strictly positive whenever `d_ij ≠ 0`, so both
/// roots are always real. Evaluated in the cancellation-free order: the
/// large-magnitude branch directly, the other via the root product.
pub fn alpha_roots(d_i: f64, d_j: f64, d_ij: f64, k_ji: f64) -> AlphaRoots {
    assert!(k_ji > 0.0, "mass ratio must be strictly positive");
    if d_ij == 0.0 {
        return AlphaRoots::NoCoupling;
    }
    let w = d_i * k_ji - d_j;
    let r = math::sqrt(w * w + d_ij * d_ij * k_ji);
    if w >= 0.0 {
        let plus = -(w + r) / d_ij;
        AlphaRoots::Roots { plus, minus: -k_ji / plus }
    } else {
        let minus = (r - w) / d_ij;
        AlphaRoots::Roots { plus: -k_ji / minus, minus }
    }
}
