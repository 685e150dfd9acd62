//! Dense complex linear algebra used throughout the crate.
//!
//! All matrices are `nalgebra::DMatrix<Complex64>`. Unitaries, Hamiltonians and
//! Lie-algebra elements share the same representation; the predicates in
//! [`MatrixChecks`] state which of those roles a value can play.
//!
//! The Hilbert–Schmidt inner product `⟨X, Y⟩ = Re tr(X†Y)` turns the space of
//! skew-Hermitian matrices into a real Euclidean space, which is where the
//! subspace machinery ([`orthonormalize`], [`project`]) lives.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense square complex matrix.
pub type CMatrix = DMatrix<C64>;

/// Default residual-norm threshold below which a spanning element is treated
/// as linearly dependent.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Predicates on the role a matrix can play.
pub trait MatrixChecks {
    fn is_square(&self) -> bool;
    fn is_finite(&self) -> bool;
    fn is_unitary(&self, tol: f64) -> bool;
    fn is_hermitian(&self, tol: f64) -> bool;
    fn is_skew_hermitian(&self, tol: f64) -> bool;
    fn is_zero_trace(&self, tol: f64) -> bool;
}

impl MatrixChecks for CMatrix {
    fn is_square(&self) -> bool {
        self.nrows() == self.ncols() && self.nrows() > 0
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && (self.adjoint() * self - identity(self.nrows())).norm() < tol
    }

    fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && (self - self.adjoint()).norm() < tol
    }

    fn is_skew_hermitian(&self, tol: f64) -> bool {
        self.is_square() && (self + self.adjoint()).norm() < tol
    }

    fn is_zero_trace(&self, tol: f64) -> bool {
        self.is_square() && self.trace().norm() < tol
    }
}

fn ensure_square(a: &CMatrix, what: &str) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::invalid(format!(
            "{what} must be a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

fn ensure_same_dim(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// `Re tr(X†Y)` without shape checks.
pub fn hs_inner_unchecked(x: &CMatrix, y: &CMatrix) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

/// Hilbert–Schmidt inner product `Re tr(X†Y)`.
pub fn hs_inner(x: &CMatrix, y: &CMatrix) -> Result<f64> {
    ensure_same_dim(x, y)?;
    Ok(hs_inner_unchecked(x, y))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Skew-Hermitian part `(X − X†)/2`.
pub fn skew_part(x: &CMatrix) -> CMatrix {
    (x - x.adjoint()) * c(0.5, 0.0)
}

/// Eigendecomposition of a Hermitian matrix. Only the Hermitian part of `h`
/// is used.
pub fn hermitian_eigen(h: &CMatrix) -> (DVector<f64>, CMatrix) {
    let sym = (h + h.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    (eig.eigenvalues, eig.eigenvectors)
}

/// `V · diag(d) · V†`.
pub fn reconstruct(v: &CMatrix, d: &[C64]) -> CMatrix {
    let mut vd = v.clone();
    for (j, dj) in d.iter().enumerate() {
        for i in 0..vd.nrows() {
            vd[(i, j)] *= dj;
        }
    }
    vd * v.adjoint()
}

/// Matrix exponential.
///
/// Skew-Hermitian inputs take the spectral route `A = iH`, `e^A = V e^{iΛ} V†`,
/// which is unitary to roundoff. Everything else uses scaling and squaring
/// with a Taylor kernel.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let n = ensure_square(a, "expm input")?;
    if !a.is_finite() {
        return Err(Error::invalid("expm input has non-finite entries"));
    }
    let scale = 1.0 + a.norm();
    if a.is_skew_hermitian(1e-13 * scale) {
        return Ok(expm_skew_hermitian(a));
    }
    Ok(expm_taylor(a, n))
}

/// Spectral exponential of a skew-Hermitian matrix. The anti-Hermitian part
/// of `a` is ignored.
pub fn expm_skew_hermitian(a: &CMatrix) -> CMatrix {
    // a = iH  =>  H = -i a
    let h = a * c(0.0, -1.0);
    let (lam, v) = hermitian_eigen(&h);
    let phases: Vec<C64> = lam.iter().map(|&l| C64::from_polar(1.0, l)).collect();
    reconstruct(&v, &phases)
}

fn expm_taylor(a: &CMatrix, n: usize) -> CMatrix {
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a * c(0.5f64.powi(squarings as i32), 0.0);
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=40 {
        term = &term * &scaled * c(1.0 / k as f64, 0.0);
        result += &term;
        if term.norm() < 1e-18 * result.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Nearest unitary (polar factor) `U (U†U)^{-1/2}`.
pub fn reunitarize(u: &CMatrix) -> CMatrix {
    let (lam, v) = hermitian_eigen(&(u.adjoint() * u));
    let inv_sqrt: Vec<C64> = lam.iter().map(|&l| c(1.0 / l.max(1e-300).sqrt(), 0.0)).collect();
    u * reconstruct(&v, &inv_sqrt)
}

/// Orthonormal basis (under `Re tr(X†Y)`) of a real subspace of
/// skew-Hermitian matrices.
#[derive(Debug, Clone)]
pub struct MatrixSubspaceBasis {
    ambient_dim: usize,
    elements: Vec<CMatrix>,
}

impl MatrixSubspaceBasis {
    pub fn empty(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            elements: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Orthogonalizes `x` against the basis (two passes) and appends the
    /// normalized residual if its norm exceeds `rank_tol`. Returns whether an
    /// element was added.
    pub fn try_extend(&mut self, x: &CMatrix, rank_tol: f64) -> bool {
        let mut r = x.clone();
        for _ in 0..2 {
            for e in &self.elements {
                let coef = hs_inner_unchecked(e, &r);
                r -= e * c(coef, 0.0);
            }
        }
        let norm = r.norm();
        if norm < rank_tol {
            return false;
        }
        // Exact skew-symmetrization keeps roundoff from leaking a Hermitian part.
        self.elements.push(skew_part(&(r / c(norm, 0.0))));
        true
    }

    /// Real coordinates of `x` along each basis element.
    pub fn coefficients(&self, x: &CMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| hs_inner_unchecked(e, x)).collect()
    }

    /// `Σ_k coeffs[k] E_k`.
    pub fn combine(&self, coeffs: &[f64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for (e, &a) in self.elements.iter().zip(coeffs) {
            out += e * c(a, 0.0);
        }
        out
    }

    pub fn gram_matrix(&self) -> DMatrix<f64> {
        let k = self.len();
        DMatrix::from_fn(k, k, |i, j| hs_inner_unchecked(&self.elements[i], &self.elements[j]))
    }
}

/// Gram–Schmidt under the Hilbert–Schmidt product. Elements whose residual
/// norm falls below `rank_tol` are dropped.
pub fn orthonormalize(spanning: &[CMatrix], rank_tol: f64) -> Result<MatrixSubspaceBasis> {
    let Some(first) = spanning.first() else {
        return Ok(MatrixSubspaceBasis::empty(0));
    };
    let n = ensure_square(first, "spanning element")?;
    let mut basis = MatrixSubspaceBasis::empty(n);
    for (k, x) in spanning.iter().enumerate() {
        ensure_same_dim(first, x)?;
        if !x.is_skew_hermitian(1e-10 * (1.0 + x.norm())) {
            return Err(Error::invalid(format!("spanning element {k} is not skew-Hermitian")));
        }
        basis.try_extend(x, rank_tol);
    }
    Ok(basis)
}

/// Orthogonal projection `Σ_k ⟨E_k, X⟩ E_k`.
pub fn project(x: &CMatrix, basis: &MatrixSubspaceBasis) -> Result<CMatrix> {
    let n = ensure_square(x, "projected matrix")?;
    if basis.is_empty() {
        return Ok(CMatrix::zeros(n, n));
    }
    if basis.ambient_dim() != n {
        return Err(Error::invalid(format!(
            "cannot project a {n}x{n} matrix onto a subspace of {0}x{0} matrices",
            basis.ambient_dim()
        )));
    }
    Ok(basis.combine(&basis.coefficients(x)))
}

/// Basis of the full algebra `u(N)` (or `su(N)` when `traceless`).
pub fn unitary_algebra_basis(n: usize, traceless: bool) -> MatrixSubspaceBasis {
    let mut gens = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut m = CMatrix::zeros(n, n);
            if a == b {
                m[(a, a)] = I;
            } else if a < b {
                m[(a, b)] = c(1.0, 0.0);
                m[(b, a)] = c(-1.0, 0.0);
            } else {
                m[(a, b)] = I;
                m[(b, a)] = I;
            }
            gens.push(m);
        }
    }
    let mut basis = MatrixSubspaceBasis::empty(n);
    if traceless {
        // Orthogonalize everything against i·I/√N and drop it.
        let mut id = MatrixSubspaceBasis::empty(n);
        id.try_extend(&(identity(n) * I), DEFAULT_RANK_TOL);
        for g in &gens {
            let r = g - project(g, &id).expect("same dimension");
            basis.try_extend(&r, DEFAULT_RANK_TOL);
        }
    } else {
        for g in &gens {
            basis.try_extend(g, DEFAULT_RANK_TOL);
        }
    }
    basis
}

/// Conversion between matrices and the `[[ [re, im], ... ], ...]` JSON layout.
pub mod pairs {
    use super::*;

    pub type Pairs = Vec<Vec<[f64; 2]>>;

    pub fn to_pairs(m: &CMatrix) -> Pairs {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect()
    }

    pub fn from_pairs(rows: &Pairs) -> Result<CMatrix> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("matrix has no rows"));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::invalid(format!(
                "row {i} has {} entries, expected {n} (matrices must be square)",
                r.len()
            )));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
    }

    /// `#[serde(with = "pairs::serde_matrix")]` adapter.
    pub mod serde_matrix {
        use super::*;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
            to_pairs(m).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
            let rows = Pairs::deserialize(d)?;
            from_pairs(&rows).map_err(serde::de::Error::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_skew(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
        skew_part(&random_matrix(rng, n)) * c(scale, 0.0)
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let e = expm(&CMatrix::zeros(3, 3)).unwrap();
        assert!((e - identity(3)).norm() < 1e-15);
    }

    #[test]
    fn expm_of_diagonal_phase() {
        let a = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0, PI), c(0.0, -PI)]));
        let e = expm(&a).unwrap();
        assert!((e + identity(2)).norm() < 1e-14);
    }

    #[test]
    fn expm_matches_eigen_oracle() {
        // Oracle: diagonalize the Hermitian matrix -iA directly with its own
        // eigensolver call and rebuild entrywise.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_skew(&mut rng, 4, 2.0);
            let h = &a * c(0.0, -1.0);
            let eig = SymmetricEigen::new((&h + h.adjoint()) * c(0.5, 0.0));
            let v = eig.eigenvectors;
            let mut oracle = CMatrix::zeros(4, 4);
            for k in 0..4 {
                let col = v.column(k).into_owned();
                oracle += &col * col.adjoint() * C64::from_polar(1.0, eig.eigenvalues[k]);
            }
            let e = expm(&a).unwrap();
            assert!((e - oracle).norm() < 1e-9);
        }
    }

    #[test]
    fn taylor_and_spectral_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_skew(&mut rng, 5, 3.0);
        let spectral = expm_skew_hermitian(&a);
        let taylor = expm_taylor(&a, 5);
        assert!((spectral - taylor).norm() < 1e-11);
    }

    #[test]
    fn expm_unitary_for_large_skew_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 5, 9] {
            let mut a = random_skew(&mut rng, n, 1.0);
            a *= c(50.0 / a.norm(), 0.0);
            assert!(expm(&a).unwrap().is_unitary(1e-10));
        }
    }

    #[test]
    fn expm_commuting_pair_is_homomorphic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_skew(&mut rng, 4, 1.0);
        let b = &a * c(0.37, 0.0) + identity(4) * c(0.0, 0.2);
        let lhs = expm(&(&a + &b)).unwrap();
        let rhs = expm(&a).unwrap() * expm(&b).unwrap();
        assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn expm_rejects_bad_input() {
        assert!(expm(&CMatrix::zeros(2, 3)).is_err());
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(expm(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn expm_general_matrix() {
        // Nilpotent: exp([[0,1],[0,0]]) = [[1,1],[0,1]].
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = c(1.0, 0.0);
        let e = expm(&a).unwrap();
        assert!((e[(0, 1)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((e[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    fn pauli() -> (CMatrix, CMatrix, CMatrix) {
        let x = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let y = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
        let z = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        (x, y, z)
    }

    #[test]
    fn hs_inner_examples() {
        assert_eq!(hs_inner(&identity(2), &identity(2)).unwrap(), 2.0);
        let (x, _, z) = pauli();
        assert_eq!(hs_inner(&(z * I), &(x * I)).unwrap(), 0.0);
        assert!(hs_inner(&identity(2), &identity(3)).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(&mut rng, 3);
        let b = random_matrix(&mut rng, 3);
        assert!((hs_inner(&a, &b).unwrap() - hs_inner(&b, &a).unwrap()).abs() < 1e-15);
        let direct = (a.adjoint() * &b).trace().re;
        assert!((hs_inner(&a, &b).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn orthonormalize_drops_dependent_elements() {
        let (x, y, z) = pauli();
        let ix = &x * I;
        let basis = orthonormalize(&[ix.clone(), &ix * c(2.0, 0.0)], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(basis.len(), 1);

        let scaled = [&x * c(0.0, 3.0), &y * c(0.0, 0.5), &z * c(0.0, -2.0)];
        let basis = orthonormalize(&scaled, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(basis.len(), 3);
        assert!((basis.gram_matrix() - DMatrix::<f64>::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn orthonormalize_empty_and_invalid() {
        assert!(orthonormalize(&[], DEFAULT_RANK_TOL).unwrap().is_empty());
        let (x, _, _) = pauli();
        assert!(matches!(orthonormalize(&[x], DEFAULT_RANK_TOL), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn orthonormalize_random_rank_three_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let gens: Vec<CMatrix> = (0..3).map(|_| random_skew(&mut rng, 4, 1.0)).collect();
        let span: Vec<CMatrix> = (0..5)
            .map(|_| {
                gens.iter()
                    .fold(CMatrix::zeros(4, 4), |acc, g| acc + g * c(rng.random_range(-1.0..1.0), 0.0))
            })
            .collect();
        // Rank oracle: count Gram-matrix eigenvalues above tolerance.
        let gram = DMatrix::from_fn(5, 5, |i, j| hs_inner_unchecked(&span[i], &span[j]));
        let rank = SymmetricEigen::new(gram)
            .eigenvalues
            .iter()
            .filter(|&&l| l > 1e-9)
            .count();
        assert_eq!(rank, 3);
        let basis = orthonormalize(&span, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(basis.len(), rank);
        for s in &span {
            assert!((project(s, &basis).unwrap() - s).norm() < 1e-9);
        }
    }

    #[test]
    fn project_examples() {
        let (x, y, _) = pauli();
        let basis = orthonormalize(&[&x * I, &y * I], DEFAULT_RANK_TOL).unwrap();
        let e1 = basis.elements()[0].clone();
        assert!((project(&e1, &basis).unwrap() - &e1).norm() < 1e-14);
        let zero = project(&e1, &MatrixSubspaceBasis::empty(2)).unwrap();
        assert_eq!(zero.norm(), 0.0);
        assert!(project(&identity(3), &basis).is_err());
    }

    #[test]
    fn project_residual_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let span: Vec<CMatrix> = (0..4).map(|_| random_skew(&mut rng, 5, 1.0)).collect();
            let basis = orthonormalize(&span, DEFAULT_RANK_TOL).unwrap();
            let x = random_matrix(&mut rng, 5);
            let p = project(&x, &basis).unwrap();
            let r = &x - &p;
            for e in basis.elements() {
                assert!(hs_inner(&r, e).unwrap().abs() < 1e-10);
            }
            assert!(p.norm() <= x.norm() + 1e-12);
            assert!((project(&p, &basis).unwrap() - &p).norm() < 1e-12);
        }
    }

    #[test]
    fn unitary_algebra_dimensions() {
        for n in 1..5 {
            let u = unitary_algebra_basis(n, false);
            let su = unitary_algebra_basis(n, true);
            assert_eq!(u.len(), n * n);
            assert_eq!(su.len(), n * n - 1);
            for e in su.elements() {
                assert!(e.is_zero_trace(1e-12));
            }
        }
    }

    #[test]
    fn reunitarize_fixes_drift() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = expm(&random_skew(&mut rng, 4, 2.0)).unwrap();
        let drifted = &u + random_matrix(&mut rng, 4) * c(1e-7, 0.0);
        let fixed = reunitarize(&drifted);
        assert!(fixed.is_unitary(1e-12));
        assert!((fixed - u).norm() < 1e-6);
    }

    #[test]
    fn pairs_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_matrix(&mut rng, 3);
        let back = pairs::from_pairs(&pairs::to_pairs(&m)).unwrap();
        assert_eq!(m, back);
        assert!(pairs::from_pairs(&vec![vec![[0.0, 0.0]; 2]]).is_err());
    }
}
