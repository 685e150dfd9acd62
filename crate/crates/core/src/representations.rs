//! Spin-j representations of SU(2), control systems built from them, and the
//! Lie-closure controllability test.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    c, commutator, identity, orthonormalize, pairs, project, CMatrix, MatrixChecks,
    MatrixSubspaceBasis, DEFAULT_RANK_TOL, I,
};

/// Spin quantum number `j = two_j / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpinLabel {
    pub two_j: u32,
}

impl SpinLabel {
    pub const fn new(two_j: u32) -> Self {
        Self { two_j }
    }

    pub fn j(self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// Dimension `2j + 1` of the irrep.
    pub fn dim(self) -> usize {
        self.two_j as usize + 1
    }

    /// `⌊j⌋`.
    pub fn floor_j(self) -> u32 {
        self.two_j / 2
    }

    pub fn is_integer(self) -> bool {
        self.two_j.is_multiple_of(2)
    }
}

impl fmt::Display for SpinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.two_j / 2)
        } else {
            write!(f, "{}/2", self.two_j)
        }
    }
}

impl FromStr for SpinLabel {
    type Err = Error;

    /// Accepts `3`, `7/2` and decimal forms such as `3.5`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("`{s}` is not a spin value (expected e.g. 3, 7/2 or 3.5)"));
        let twice = if let Some((num, den)) = s.split_once('/') {
            let num: u32 = num.trim().parse().map_err(|_| bad())?;
            match den.trim() {
                "1" => num * 2,
                "2" => num,
                _ => return Err(bad()),
            }
        } else {
            let v: f64 = s.parse().map_err(|_| bad())?;
            let t = 2.0 * v;
            if !(t.is_finite() && t >= 0.0 && (t - t.round()).abs() < 1e-9) {
                return Err(bad());
            }
            t.round() as u32
        };
        Ok(SpinLabel::new(twice))
    }
}

/// Angular-momentum matrices of a spin-j irrep in the `|j, m⟩` basis ordered
/// `m = j, j−1, …, −j`. Units of ħ = 1.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub label: SpinLabel,
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
}

impl SpinOperators {
    pub fn dim(&self) -> usize {
        self.label.dim()
    }

    pub fn jz_squared(&self) -> CMatrix {
        &self.jz * &self.jz
    }

    /// Skew-Hermitian generators `(i·jx, i·jy, i·jz)`.
    pub fn algebra_generators(&self) -> [CMatrix; 3] {
        [&self.jx * I, &self.jy * I, &self.jz * I]
    }

    /// Orthonormal basis of the three-dimensional spin algebra.
    pub fn algebra(&self) -> MatrixSubspaceBasis {
        orthonormalize(&self.algebra_generators(), DEFAULT_RANK_TOL).expect("spin generators are skew-Hermitian")
    }
}

pub fn build_spin_operators(label: SpinLabel) -> SpinOperators {
    let n = label.dim();
    let j = label.j();
    let m = |k: usize| j - k as f64;
    let mut jz = CMatrix::zeros(n, n);
    let mut raise = CMatrix::zeros(n, n);
    for k in 0..n {
        jz[(k, k)] = c(m(k), 0.0);
        if k > 0 {
            // J+ |m⟩ = sqrt(j(j+1) − m(m+1)) |m+1⟩, and |m+1⟩ sits at index k−1.
            let mk = m(k);
            raise[(k - 1, k)] = c((j * (j + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
        }
    }
    let lower = raise.adjoint();
    let jx = (&raise + &lower) * c(0.5, 0.0);
    let jy = (&raise - &lower) * c(0.0, -0.5);
    SpinOperators { label, jx, jy, jz }
}

/// Drift and control Hamiltonians `H₀, H₁ … H_m` (Hermitian, ħ = 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawControlSystem", into = "RawControlSystem")]
pub struct ControlSystem {
    dim: usize,
    h0: CMatrix,
    controls: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct RawControlSystem {
    dim: usize,
    h0: pairs::Pairs,
    controls: Vec<pairs::Pairs>,
}

impl TryFrom<RawControlSystem> for ControlSystem {
    type Error = Error;

    fn try_from(raw: RawControlSystem) -> Result<Self> {
        let h0 = pairs::from_pairs(&raw.h0)?;
        let controls = raw.controls.iter().map(pairs::from_pairs).collect::<Result<Vec<_>>>()?;
        let sys = ControlSystem::new(h0, controls)?;
        if sys.dim != raw.dim {
            return Err(Error::invalid(format!(
                "declared dim {} does not match matrix dimension {}",
                raw.dim, sys.dim
            )));
        }
        Ok(sys)
    }
}

impl From<ControlSystem> for RawControlSystem {
    fn from(sys: ControlSystem) -> Self {
        RawControlSystem {
            dim: sys.dim,
            h0: pairs::to_pairs(&sys.h0),
            controls: sys.controls.iter().map(pairs::to_pairs).collect(),
        }
    }
}

impl ControlSystem {
    pub fn new(h0: CMatrix, controls: Vec<CMatrix>) -> Result<Self> {
        if !h0.is_square() {
            return Err(Error::invalid("drift Hamiltonian must be square"));
        }
        let dim = h0.nrows();
        if controls.is_empty() {
            return Err(Error::invalid("a control system needs at least one control Hamiltonian"));
        }
        for (k, h) in std::iter::once(&h0).chain(&controls).enumerate() {
            if h.shape() != (dim, dim) {
                return Err(Error::invalid(format!("Hamiltonian {k} has shape {:?}, expected {dim}x{dim}", h.shape())));
            }
            if !h.is_hermitian(1e-10) {
                return Err(Error::invalid(format!("Hamiltonian {k} is not Hermitian")));
            }
        }
        Ok(Self { dim, h0, controls })
    }

    /// Spin-j system with drift `jz` (plus `jz²` when `quadratic_drift`) and
    /// controls `jx`, `jy`.
    pub fn spin(label: SpinLabel, quadratic_drift: bool) -> Self {
        let ops = build_spin_operators(label);
        let mut h0 = ops.jz.clone();
        if quadratic_drift {
            h0 += ops.jz_squared();
        }
        Self::new(h0, vec![ops.jx.clone(), ops.jy.clone()]).expect("spin operators are Hermitian")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h0(&self) -> &CMatrix {
        &self.h0
    }

    pub fn controls(&self) -> &[CMatrix] {
        &self.controls
    }

    /// Skew-Hermitian generators `i·H₀, i·H₁, …` of the dynamical algebra.
    pub fn generators(&self) -> Vec<CMatrix> {
        std::iter::once(&self.h0).chain(&self.controls).map(|h| h * I).collect()
    }
}

/// Outcome of the Lie-closure computation.
#[derive(Debug, Clone)]
pub struct LieClosure {
    pub basis: MatrixSubspaceBasis,
    /// Dimension of the closure with the `i·I` direction removed.
    pub traceless_dim: usize,
    pub controllable: bool,
    pub rounds: usize,
}

impl LieClosure {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Dynamical Lie algebra generated by skew-Hermitian `generators`.
///
/// Commutators of every new element with the current basis are added until a
/// round contributes nothing, the dimension reaches `max_dim` (default `N²`),
/// or `2N²` rounds elapse.
pub fn lie_closure(generators: &[CMatrix], max_dim: Option<usize>) -> Result<LieClosure> {
    let Some(first) = generators.first() else {
        return Err(Error::invalid("Lie closure needs at least one generator"));
    };
    let n = first.nrows();
    let max_dim = max_dim.unwrap_or(n * n).min(n * n);
    let normalized: Vec<CMatrix> = generators
        .iter()
        .map(|g| if g.norm() > 0.0 { g / c(g.norm(), 0.0) } else { g.clone() })
        .collect();
    let mut basis = orthonormalize(&normalized, DEFAULT_RANK_TOL)?;
    let cap = 2 * n * n;
    let mut frontier = 0;
    let mut rounds = 0;
    while frontier < basis.len() && basis.len() < max_dim {
        if rounds == cap {
            return Err(Error::ClosureNotStable {
                rounds,
                partial: Box::new(basis),
            });
        }
        rounds += 1;
        let end = basis.len();
        for i in frontier..end {
            for k in 0..i {
                let x = commutator(&basis.elements()[i], &basis.elements()[k]);
                basis.try_extend(&x, DEFAULT_RANK_TOL);
                if basis.len() >= max_dim {
                    break;
                }
            }
        }
        frontier = end;
    }

    let mut id = MatrixSubspaceBasis::empty(n);
    id.try_extend(&(identity(n) * I), DEFAULT_RANK_TOL);
    let mut traceless = MatrixSubspaceBasis::empty(n);
    for e in basis.elements() {
        let r = e - project(e, &id)?;
        traceless.try_extend(&r, DEFAULT_RANK_TOL);
    }
    let traceless_dim = traceless.len();
    Ok(LieClosure {
        controllable: traceless_dim + 1 >= n * n,
        basis,
        traceless_dim,
        rounds,
    })
}

/// Irreps in the decomposition of `D_{j1} ⊗ D_{j2}`: `|j1−j2|, …, j1+j2`.
pub fn clebsch_gordan_labels(j1: SpinLabel, j2: SpinLabel) -> Vec<SpinLabel> {
    let lo = j1.two_j.abs_diff(j2.two_j);
    let hi = j1.two_j + j2.two_j;
    (lo..=hi).step_by(2).map(SpinLabel::new).collect()
}
