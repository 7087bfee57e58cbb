//! Staged three-body diagonalization in parameter space.
//!
//! Three shears on pairs `(0,1)`, `(1,2)`, `(2,0)` suffice for `n = 3`.
//! Each stage updates the parameter set in closed form (`β` slaved to the
//! current masses), and the three stage parameters are chosen so that all
//! three transformed couplings vanish - a 3×3 nonlinear system solved by a
//! damped Newton iteration with forward-difference Jacobians.
//!
//! The closed-form update for a shear on pair `(a, b)` with spectator `s`,
//! `k = m_a/m_b`, `c = 1/(1 + kα²)`:
//!
//! ```text
//! m_a ← m_a·c            m_b ← m_b/c
//! d_a ← c²(d_a + d_ab·kα + d_b·k²α²)
//! d_b ← d_a·α² + d_b − d_ab·α
//! d_ab ← c·(d_ab·(1 − kα²) − 2(d_a − d_b·k)·α)
//! d_as ← c·(d_as + d_bs·kα)
//! d_bs ← d_bs − d_as·α
//! ```
//!
//! These agree entrywise with matrix conjugation of the `(K, V)` form by
//! the same step; the test suite pins that equivalence.

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::matrix::Mat;
use crate::model::{KPForm, QuadHamiltonian};
use crate::shear::{alpha_roots, AlphaRoots, RootChoice};

/// Stage order: which pair each of the three shears acts on.
pub(crate) const STAGE_PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// Masses and symmetrized potential parameters of a three-body system, as
/// tracked through the staged transformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeBodyParams {
    pub masses: [f64; 3],
    pub d_diag: [f64; 3],
    /// Couplings `[d₀₁, d₀₂, d₁₂]`.
    pub d_off: [f64; 3],
}

fn off_slot(a: usize, b: usize) -> usize {
    match (a.min(b), a.max(b)) {
        (0, 1) => 0,
        (0, 2) => 1,
        (1, 2) => 2,
        _ => unreachable!("invalid pair"),
    }
}

impl ThreeBodyParams {
    pub fn from_hamiltonian(h: &QuadHamiltonian) -> Result<Self> {
        if h.n() != 3 {
            return Err(invalid("three-body parameters require n = 3"));
        }
        Ok(ThreeBodyParams {
            masses: [h.masses()[0], h.masses()[1], h.masses()[2]],
            d_diag: [h.d_diag()[0], h.d_diag()[1], h.d_diag()[2]],
            d_off: [h.coupling(0, 1), h.coupling(0, 2), h.coupling(1, 2)],
        })
    }

    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        self.d_off[off_slot(a, b)]
    }

    /// The matrix representation of this parameter set.
    pub fn to_kpform(&self) -> KPForm {
        let mut k = Mat::zeros(3);
        let mut v = Mat::zeros(3);
        for i in 0..3 {
            k[(i, i)] = 1.0 / self.masses[i];
            v[(i, i)] = 2.0 * self.d_diag[i];
        }
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            v[(a, b)] = self.coupling(a, b);
            v[(b, a)] = self.coupling(a, b);
        }
        KPForm::new(k, v).expect("valid by construction")
    }

    /// One staged shear on pair `(a, b)` with the slaved `β`, in closed
    /// form on the parameters.
    pub fn apply_stage(&self, a: usize, b: usize, alpha: f64) -> ThreeBodyParams {
        debug_assert!(a != b && a < 3 && b < 3);
        let s = 3 - a - b; // the spectator index
        let k = self.masses[a] / self.masses[b];
        let c = 1.0 / (1.0 + k * alpha * alpha);
        let (da, db, ds) = (self.d_diag[a], self.d_diag[b], self.d_diag[s]);
        let dab = self.coupling(a, b);
        let das = self.coupling(a, s);
        let dbs = self.coupling(b, s);

        let mut out = *self;
        out.masses[a] = self.masses[a] * c;
        out.masses[b] = self.masses[b] / c;
        out.d_diag[a] = c * c * (da + dab * k * alpha + db * k * k * alpha * alpha);
        out.d_diag[b] = da * alpha * alpha + db - dab * alpha;
        out.d_diag[s] = ds;
        out.d_off[off_slot(a, b)] =
            c * (dab * (1.0 - k * alpha * alpha) - 2.0 * (da - db * k) * alpha);
        out.d_off[off_slot(a, s)] = c * (das + dbs * k * alpha);
        out.d_off[off_slot(b, s)] = dbs - das * alpha;
        out
    }

    fn max_abs_coupling(&self) -> f64 {
        self.d_off
            .iter()
            .fold(0.0, |acc, &v| math::max(acc, math::abs(v)))
    }
}

/// Residual of the final-diagonality system: the three couplings left
/// after applying the staged shears with parameters `alphas`.
fn system_residual(start: &ThreeBodyParams, alphas: &[f64; 3]) -> [f64; 3] {
    let mut p = *start;
    for (&(a, b), &alpha) in STAGE_PAIRS.iter().zip(alphas.iter()) {
        p = p.apply_stage(a, b, alpha);
    }
    p.d_off
}

fn norm_inf(v: &[f64; 3]) -> f64 {
    v.iter().fold(0.0, |acc, &x| math::max(acc, math::abs(x)))
}

fn norm2_sq(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Solves a 3×3 linear system by Gaussian elimination with partial
/// pivoting; `None` when the matrix is numerically singular.
#[allow(clippy::needless_range_loop)] // rows are aliased through `perm`
fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let mut m = *a;
    let mut r = *b;
    let mut perm = [0usize, 1, 2];
    for col in 0..3 {
        let mut piv = col;
        for row in (col + 1)..3 {
            if math::abs(m[perm[row]][col]) > math::abs(m[perm[piv]][col]) {
                piv = row;
            }
        }
        perm.swap(col, piv);
        let p = m[perm[col]][col];
        if math::abs(p) < 1e-300 {
            return None;
        }
        for row in (col + 1)..3 {
            let f = m[perm[row]][col] / p;
            for k in col..3 {
                m[perm[row]][k] -= f * m[perm[col]][k];
            }
            r[perm[row]] -= f * r[perm[col]];
        }
    }
    let mut x = [0.0; 3];
    for col in (0..3).rev() {
        let mut sum = r[perm[col]];
        for k in (col + 1)..3 {
            sum -= m[perm[col]][k] * x[k];
        }
        x[col] = sum / m[perm[col]][col];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Finds `(α₁, α₂, α₃)` zeroing all three transformed couplings.
///
/// Damped Newton (step halving on residual increase, forward-difference
/// Jacobian with step 1e-7, at most 100 iterations), multi-started from
/// every combination of the per-pair quadratic roots computed on the
/// original parameters with third-party couplings ignored. Failure of all
/// starts reports the best residual reached.
pub(crate) fn solve_staged(start: &ThreeBodyParams) -> Result<[f64; 3]> {
    const MAX_ITER: usize = 100;
    const FD_STEP: f64 = 1e-7;
    const MAX_HALVINGS: usize = 40;

    let scale = math::max(1.0, start.max_abs_coupling());
    let tol = 1e-13 * scale;

    if start.max_abs_coupling() == 0.0 {
        return Ok([0.0; 3]);
    }

    // Per-stage starting roots, decoupled-pair approximation.
    let stage_roots = |a: usize, b: usize| -> [f64; 2] {
        match alpha_roots(
            start.d_diag[a],
            start.d_diag[b],
            start.coupling(a, b),
            start.masses[b] / start.masses[a],
        ) {
            AlphaRoots::NoCoupling => [0.0, 0.0],
            roots => {
                let small = roots.select(RootChoice::Smaller);
                let plus = roots.select(RootChoice::Plus);
                let minus = roots.select(RootChoice::Minus);
                let other = if small == plus { minus } else { plus };
                [small, other]
            }
        }
    };
    let r1 = stage_roots(0, 1);
    let r2 = stage_roots(1, 2);
    let r3 = stage_roots(2, 0);

    let mut best_residual = f64::INFINITY;
    for &g1 in &r1 {
        for &g2 in &r2 {
            for &g3 in &r3 {
                let mut x = [g1, g2, g3];
                let mut f = system_residual(start, &x);
                let mut stalled = false;
                for _ in 0..MAX_ITER {
                    let fnorm = norm_inf(&f);
                    if fnorm <= tol {
                        return Ok(x);
                    }
                    // Forward-difference Jacobian, column per parameter.
                    let mut jac = [[0.0; 3]; 3];
                    for col in 0..3 {
                        let mut xp = x;
                        xp[col] += FD_STEP;
                        let fp = system_residual(start, &xp);
                        for row in 0..3 {
                            jac[row][col] = (fp[row] - f[row]) / FD_STEP;
                        }
                    }
                    let rhs = [-f[0], -f[1], -f[2]];
                    let Some(dx) = solve3(&jac, &rhs) else {
                        stalled = true;
                        break;
                    };
                    // Step halving on residual increase.
                    let f2 = norm2_sq(&f);
                    let mut lambda = 1.0;
                    let mut advanced = false;
                    for _ in 0..MAX_HALVINGS {
                        let xn = [x[0] + lambda * dx[0], x[1] + lambda * dx[1], x[2] + lambda * dx[2]];
                        let fn_ = system_residual(start, &xn);
                        if norm2_sq(&fn_) < f2 {
                            x = xn;
                            f = fn_;
                            advanced = true;
                            break;
                        }
                        lambda *= 0.5;
                    }
                    if !advanced {
                        stalled = true;
                        break;
                    }
                }
                if !stalled && norm_inf(&f) <= tol {
                    return Ok(x);
                }
                best_residual = math::max(0.0, best_residual.min(norm_inf(&f)));
            }
        }
    }
    Err(Error::NoConvergence { residual: best_residual, iterations: MAX_ITER })
}
