//! Classical normal-mode analysis, used throughout as the independent
//! oracle for the shear-transformation engine.
//!
//! The squared normal frequencies of `H = Σ pᵢ²/2mᵢ + ½Σ Φᵢⱼuᵢuⱼ` are the
//! eigenvalues of the mass-scaled matrix `Dᵢⱼ = Φᵢⱼ/√(mᵢmⱼ)`. The
//! eigensolver is a cyclic Jacobi iteration (Numerical Recipes scheme):
//! dependency-free, deterministic, and plenty fast at desk scale.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::matrix::Mat;
use crate::model::{KPForm, QuadHamiltonian, SYMMETRY_TOL};

/// Eigenvalues and eigenvectors of a mass-scaled matrix.
///
/// `omega_sq` is sorted ascending; column `s` of `eigvecs` is the
/// orthonormal eigenvector `e_{is}`, signed so that its first component
/// larger than 1e-12 in magnitude is positive.
#[derive(Debug, Clone)]
pub struct NormalModes {
    omega_sq: Vec<f64>,
    eigvecs: Mat,
}

impl NormalModes {
    pub fn n(&self) -> usize {
        self.omega_sq.len()
    }

    /// Squared frequencies, ascending. May contain negative values for
    /// unstable potentials.
    pub fn omega_sq(&self) -> &[f64] {
        &self.omega_sq
    }

    pub fn eigvecs(&self) -> &Mat {
        &self.eigvecs
    }

    /// Zero-point energy `Σ ħω_s/2`; fails on unstable potentials.
    pub fn zpe(&self, hbar: f64) -> Result<f64> {
        zero_point_energy(&self.omega_sq, hbar)
    }
}

/// `Dᵢⱼ = Vᵢⱼ/√(mᵢmⱼ)` with `V` from the matrix representation, equal to
/// `Φᵢⱼ/√(mᵢmⱼ)` for the symmetrized force constants.
pub fn mass_scaled_matrix(h: &QuadHamiltonian) -> Mat {
    let n = h.n();
    let v = h.to_kpform().v().clone();
    let mut d = Mat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            d[(i, j)] = v[(i, j)] / math::sqrt(h.masses()[i] * h.masses()[j]);
        }
    }
    d
}

/// Convenience oracle: eigendecomposition of the mass-scaled matrix.
pub fn normal_modes(h: &QuadHamiltonian) -> Result<NormalModes> {
    eigendecompose(&mass_scaled_matrix(h))
}

/// Jacobi eigendecomposition of a symmetric matrix.
///
/// Rejects matrices that are non-symmetric beyond the relative tolerance
/// of [`SYMMETRY_TOL`]. Eigenvalues come back sorted ascending with the
/// sign-fixed orthonormal eigenvectors as matrix columns.
pub fn eigendecompose(d: &Mat) -> Result<NormalModes> {
    if !d.is_finite() {
        return Err(invalid("matrix entries must be finite"));
    }
    if !d.is_symmetric_within(SYMMETRY_TOL) {
        return Err(Error::NotSymmetric { max_asymmetry: d.max_asymmetry() });
    }
    let n = d.n();
    let mut a = d.symmetrized();
    let mut v = Mat::identity(n);
    let mut diag = a.diag();

    if n > 1 {
        jacobi(&mut a, &mut v, &mut diag)?;
    }

    // Sort ascending and fix signs for reproducible output.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| diag[p].total_cmp(&diag[q]));
    let omega_sq: Vec<f64> = order.iter().map(|&s| diag[s]).collect();
    let mut eigvecs = Mat::zeros(n);
    for (col, &s) in order.iter().enumerate() {
        let mut sign = 1.0;
        for i in 0..n {
            let x = v[(i, s)];
            if math::abs(x) > 1e-12 {
                sign = if x < 0.0 { -1.0 } else { 1.0 };
                break;
            }
        }
        for i in 0..n {
            eigvecs[(i, col)] = sign * v[(i, s)];
        }
    }
    Ok(NormalModes { omega_sq, eigvecs })
}

/// Cyclic Jacobi rotations with the Numerical Recipes thresholding.
fn jacobi(a: &mut Mat, v: &mut Mat, d: &mut [f64]) -> Result<()> {
    const MAX_SWEEPS: usize = 64;
    let n = a.n();
    let mut b = d.to_vec();
    let mut z = vec![0.0; n];

    for sweep in 1..=MAX_SWEEPS {
        let mut sm = 0.0;
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                sm += math::abs(a[(p, q)]);
            }
        }
        if sm == 0.0 {
            return Ok(());
        }
        let tresh = if sweep < 4 { 0.2 * sm / ((n * n) as f64) } else { 0.0 };
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let g = 100.0 * math::abs(a[(p, q)]);
                if sweep > 4
                    && math::abs(d[p]) + g == math::abs(d[p])
                    && math::abs(d[q]) + g == math::abs(d[q])
                {
                    a[(p, q)] = 0.0;
                } else if math::abs(a[(p, q)]) > tresh {
                    let mut h = d[q] - d[p];
                    let t = if math::abs(h) + g == math::abs(h) {
                        a[(p, q)] / h
                    } else {
                        let theta = 0.5 * h / a[(p, q)];
                        let mut t = 1.0 / (math::abs(theta) + math::sqrt(1.0 + theta * theta));
                        if theta < 0.0 {
                            t = -t;
                        }
                        t
                    };
                    let c = 1.0 / math::sqrt(1.0 + t * t);
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    h = t * a[(p, q)];
                    z[p] -= h;
                    z[q] += h;
                    d[p] -= h;
                    d[q] += h;
                    a[(p, q)] = 0.0;
                    let rot = |m: &mut Mat, i: usize, j: usize, k: usize, l: usize| {
                        let g = m[(i, j)];
                        let h = m[(k, l)];
                        m[(i, j)] = g - s * (h + g * tau);
                        m[(k, l)] = h + s * (g - h * tau);
                    };
                    for j in 0..p {
                        rot(a, j, p, j, q);
                    }
                    for j in (p + 1)..q {
                        rot(a, p, j, j, q);
                    }
                    for j in (q + 1)..n {
                        rot(a, p, j, q, j);
                    }
                    for j in 0..n {
                        rot(v, j, p, j, q);
                    }
                }
            }
        }
        for p in 0..n {
            b[p] += z[p];
            d[p] = b[p];
            z[p] = 0.0;
        }
    }
    Err(Error::NoConvergence { residual: a.max_offdiag(), iterations: MAX_SWEEPS })
}

/// Closed-form spectrum of the uniform nearest-neighbour chain:
/// `ϖ²_s = Φ₁₁/m + 2(Φ₁₂/m)·cos(sπ/(n+1))`, `s = 1..n`, sorted ascending.
pub fn toeplitz_frequencies(n: usize, phi11: f64, phi12: f64, m: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("chain length must be at least 1"));
    }
    if !(m.is_finite() && m > 0.0) {
        return Err(invalid("mass must be strictly positive and finite"));
    }
    let mut w: Vec<f64> = (1..=n)
        .map(|s| {
            phi11 / m
                + 2.0 * (phi12 / m) * math::cos(s as f64 * core::f64::consts::PI / (n as f64 + 1.0))
        })
        .collect();
    w.sort_by(f64::total_cmp);
    Ok(w)
}

/// `Σ ħ√(ω²_s)/2`. Any negative squared frequency is an error carrying the
/// offending values.
pub fn zero_point_energy(omega_sq: &[f64], hbar: f64) -> Result<f64> {
    let negative: Vec<f64> = omega_sq.iter().copied().filter(|&w| w < 0.0).collect();
    if !negative.is_empty() {
        return Err(Error::UnstablePotential { omega_sq: negative });
    }
    Ok(omega_sq.iter().map(|&w| 0.5 * hbar * math::sqrt(w)).sum())
}

/// Squared frequencies of a general form `½pᵀKp + ½uᵀVu`: the eigenvalues
/// of `K·V`, computed symmetrically as `eig(LᵀVL)` with `K = LLᵀ`.
pub fn kv_spectrum(form: &KPForm) -> Result<Vec<f64>> {
    let l = form.k().cholesky()?;
    let b = form.v().congruent(&l);
    Ok(eigendecompose(&b.symmetrized())?.omega_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent 2x2 oracle: roots of the characteristic polynomial.
    fn eig2(a: f64, b: f64, c: f64) -> (f64, f64) {
        let tr = a + c;
        let det = a * c - b * b;
        let disc = (tr * tr - 4.0 * det).sqrt();
        (0.5 * (tr - disc), 0.5 * (tr + disc))
    }

    #[test]
    fn eigendecompose_2x2() {
        let d = Mat::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let (lo, hi) = eig2(2.0, 1.0, 2.0);
        let nm = eigendecompose(&d).unwrap();
        assert_abs_diff_eq!(nm.omega_sq()[0], lo, epsilon = 1e-12);
        assert_abs_diff_eq!(nm.omega_sq()[1], hi, epsilon = 1e-12);
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(hi, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn eigendecompose_diagonal_is_sorted_permutation() {
        let d = Mat::from_diag(&[3.0, 1.0, 2.0]);
        let nm = eigendecompose(&d).unwrap();
        assert_eq!(nm.omega_sq(), &[1.0, 2.0, 3.0]);
        // Eigenvector matrix is a permutation with positive entries.
        for s in 0..3 {
            let col: Vec<f64> = (0..3).map(|i| nm.eigvecs()[(i, s)]).collect();
            assert_eq!(col.iter().filter(|&&x| x == 1.0).count(), 1);
            assert_eq!(col.iter().filter(|&&x| x == 0.0).count(), 2);
        }
    }

    #[test]
    fn eigendecompose_tridiagonal_matches_closed_form() {
        let d =
            Mat::from_rows(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 1.0], &[0.0, 1.0, 2.0]]).unwrap();
        let nm = eigendecompose(&d).unwrap();
        let closed = toeplitz_frequencies(3, 2.0, 1.0, 1.0).unwrap();
        let sqrt2 = 2.0f64.sqrt();
        for (got, want) in nm.omega_sq().iter().zip([2.0 - sqrt2, 2.0, 2.0 + sqrt2]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        for (got, want) in nm.omega_sq().iter().zip(closed.iter()) {
            assert_abs_diff_eq!(*got, *want, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigendecompose_rejects_asymmetric() {
        let d = Mat::from_rows(&[&[2.0, 1.0], &[0.5, 2.0]]).unwrap();
        assert!(matches!(eigendecompose(&d), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn eigen_invariants_hold() {
        // Fixed dense symmetric matrix; checks residual, orthonormality,
        // reconstruction and the trace sum rule.
        let d = Mat::from_rows(&[
            &[1.0, 2.0, 3.0, 4.0],
            &[2.0, 3.0, 0.0, 2.0],
            &[3.0, 0.0, 2.0, 1.0],
            &[4.0, 2.0, 1.0, 1.0],
        ])
        .unwrap();
        let nm = eigendecompose(&d).unwrap();
        let e = nm.eigvecs();
        let n = 4;
        // Dᵀe_s = ω²_s e_s
        for s in 0..n {
            let col: Vec<f64> = (0..n).map(|i| e[(i, s)]).collect();
            let de = d.matvec(&col);
            for i in 0..n {
                assert_abs_diff_eq!(de[i], nm.omega_sq()[s] * col[i], epsilon = 1e-10);
            }
        }
        // eᵀe = I
        let gram = e.transpose().mul(e);
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(gram[(i, j)], want, epsilon = 1e-10);
            }
        }
        // e diag(ω²) eᵀ = D
        let rec = e.mul(&Mat::from_diag(nm.omega_sq())).mul(&e.transpose());
        for i in 0..n {
            for j in 0..n {
                assert_abs_diff_eq!(rec[(i, j)], d[(i, j)], epsilon = 1e-9);
            }
        }
        // Σω² = tr D
        let tr: f64 = d.diag().iter().sum();
        assert_abs_diff_eq!(nm.omega_sq().iter().sum::<f64>(), tr, epsilon = 1e-10);
    }

    #[test]
    fn mass_scaled_matrix_unit_masses() {
        let h = QuadHamiltonian::new(vec![1.0, 1.0], vec![1.0, 1.0], &[(0, 1, 1.0)]).unwrap();
        let d = mass_scaled_matrix(&h);
        assert_eq!(d, h.to_kpform().v().clone());
    }

    #[test]
    fn mass_scaled_matrix_scales_by_sqrt_masses() {
        let h = QuadHamiltonian::new(vec![4.0, 1.0], vec![1.0, 1.0], &[(0, 1, 1.0)]).unwrap();
        let d = mass_scaled_matrix(&h);
        assert_abs_diff_eq!(d[(0, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[(0, 1)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[(1, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[(1, 1)], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn mass_scaled_matrix_diagonal_case() {
        let h = QuadHamiltonian::new(vec![2.0, 5.0], vec![3.0, 7.0], &[]).unwrap();
        let d = mass_scaled_matrix(&h);
        assert_abs_diff_eq!(d[(0, 0)], 6.0 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[(1, 1)], 14.0 / 5.0, epsilon = 1e-15);
        assert_eq!(d[(0, 1)], 0.0);
    }

    #[test]
    fn toeplitz_examples() {
        let w = toeplitz_frequencies(2, 2.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w[1], 3.0, epsilon = 1e-14);

        let w = toeplitz_frequencies(5, 3.0, 0.0, 2.0).unwrap();
        for x in w {
            assert_abs_diff_eq!(x, 1.5, epsilon = 1e-15);
        }

        let w = toeplitz_frequencies(3, 2.0, 1.0, 1.0).unwrap();
        let sqrt2 = 2.0f64.sqrt();
        assert_abs_diff_eq!(w[0], 2.0 - sqrt2, epsilon = 1e-14);
        assert_abs_diff_eq!(w[1], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w[2], 2.0 + sqrt2, epsilon = 1e-14);
    }

    #[test]
    fn oracle_matches_toeplitz_for_bravais_chains() {
        for n in (2..=12).step_by(2) {
            let h = crate::model::build_bravais_chain(n, 1.3, 0.9, 0.4).unwrap();
            let nm = normal_modes(&h).unwrap();
            let closed = toeplitz_frequencies(n, 1.8, 0.4, 1.3).unwrap();
            for (a, b) in nm.omega_sq().iter().zip(closed.iter()) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn zpe_values() {
        let e = zero_point_energy(&[1.0, 3.0], 1.0).unwrap();
        assert_abs_diff_eq!(e, 0.5 * (1.0 + 3.0f64.sqrt()), epsilon = 1e-14);
        assert_eq!(zero_point_energy(&[], 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(zero_point_energy(&[4.0], 2.0).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn zpe_rejects_unstable() {
        match zero_point_energy(&[1.0, -0.25, -4.0], 1.0) {
            Err(Error::UnstablePotential { omega_sq }) => {
                assert_eq!(omega_sq, vec![-0.25, -4.0]);
            }
            other => panic!("expected UnstablePotential, got {other:?}"),
        }
    }

    #[test]
    fn kv_spectrum_matches_oracle_on_diag_kinetic() {
        let h = QuadHamiltonian::new(
            vec![1.0, 2.0, 0.5],
            vec![1.0, 2.0, 1.5],
            &[(0, 1, 0.5), (1, 2, -0.4)],
        )
        .unwrap();
        let s = kv_spectrum(&h.to_kpform()).unwrap();
        let nm = normal_modes(&h).unwrap();
        for (a, b) in s.iter().zip(nm.omega_sq().iter()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }
    }
}
