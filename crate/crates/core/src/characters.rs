//! Weyl characters of SU(2) and SU(3) irreps on the maximal torus and the
//! normalized fidelity landscapes they induce.
//!
//! For a realizable target the gate fidelity `N⁻¹|tr(W†U)|` depends on `W†U`
//! only through its conjugacy class, so it is the modulus of an irreducible
//! character divided by the dimension.
//!
//! SU(3) irreps are labeled by strictly decreasing exponents `r1 > r2 > 0`
//! (the trailing exponent is 0). The character is the alternant ratio
//!
//! ```text
//! χ = det[ε_i^{r1}, ε_i^{r2}, 1] / det[ε_i², ε_i, 1]
//! ```
//!
//! which equals the Schur polynomial for the partition `(r1−2, r2−1, 0)`.
//! The ratio is 0/0 on the Weyl walls; there the Schur polynomial is evaluated
//! instead, from its exact weight expansion.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::C64;
use crate::representations::SpinLabel;

/// Below this Vandermonde modulus the SU(3) alternant ratio is replaced by the
/// Schur polynomial.
pub const WEYL_DENOMINATOR_FLOOR: f64 = 1e-8;

/// Irreducible representation of SU(2) or SU(3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum IrrepLabel {
    Su2(SpinLabel),
    Su3 { r1: u32, r2: u32 },
}

impl IrrepLabel {
    pub fn su2(spin: SpinLabel) -> Self {
        IrrepLabel::Su2(spin)
    }

    pub fn su3(r1: u32, r2: u32) -> Result<Self> {
        if !(r1 > r2 && r2 >= 1) {
            return Err(Error::invalid(format!("SU(3) label ({r1},{r2}) must satisfy r1 > r2 >= 1")));
        }
        Ok(IrrepLabel::Su3 { r1, r2 })
    }

    /// `2j + 1` for SU(2), `r1·r2·(r1−r2)/2` for SU(3).
    pub fn dim(&self) -> usize {
        match *self {
            IrrepLabel::Su2(s) => s.dim(),
            IrrepLabel::Su3 { r1, r2 } => (r1 * r2 * (r1 - r2) / 2) as usize,
        }
    }

    /// Number of torus angles.
    pub fn rank(&self) -> usize {
        match self {
            IrrepLabel::Su2(_) => 1,
            IrrepLabel::Su3 { .. } => 2,
        }
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrepLabel::Su2(s) => write!(f, "su2:j={s}"),
            IrrepLabel::Su3 { r1, r2 } => write!(f, "su3:{r1},{r2}"),
        }
    }
}

impl FromStr for IrrepLabel {
    type Err = Error;

    /// Accepts `su2:j=7/2`, `su2:3.5`, `su3:6,1` and `su3:r1=6,r2=1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("`{s}` is not an irrep label (expected su2:j=7/2 or su3:6,1)"));
        let (group, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        match group.to_ascii_lowercase().as_str() {
            "su2" => {
                let j = rest.trim().strip_prefix("j=").unwrap_or(rest);
                Ok(IrrepLabel::Su2(j.parse()?))
            }
            "su3" => {
                let mut parts = rest.split(',').map(|p| {
                    let p = p.trim();
                    let p = p.strip_prefix("r1=").or_else(|| p.strip_prefix("r2=")).unwrap_or(p);
                    p.parse::<u32>().map_err(|_| bad())
                });
                let (Some(r1), Some(r2), None) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(bad());
                };
                IrrepLabel::su3(r1?, r2?)
            }
            _ => Err(bad()),
        }
    }
}

impl From<IrrepLabel> for String {
    fn from(l: IrrepLabel) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for IrrepLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        // Also folds −0.0 into +0.0.
        r + 0.0
    }
}

/// Eigenvalue angles of a torus element: `β` for SU(2), `(θ1, θ2)` for SU(3).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    angles: Vec<f64>,
}

impl TorusPoint {
    pub fn new(angles: Vec<f64>) -> Self {
        Self {
            angles: angles.into_iter().map(wrap_angle).collect(),
        }
    }

    pub fn su2(beta: f64) -> Self {
        Self::new(vec![beta])
    }

    pub fn su3(theta1: f64, theta2: f64) -> Self {
        Self::new(vec![theta1, theta2])
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// `(e^{iβ}, e^{−iβ})` or `(e^{iθ1}, e^{iθ2}, e^{−i(θ1+θ2)})`.
    pub fn eigenvalues(&self) -> Vec<C64> {
        match self.angles.as_slice() {
            [b] => vec![C64::from_polar(1.0, *b), C64::from_polar(1.0, -*b)],
            [t1, t2] => vec![
                C64::from_polar(1.0, *t1),
                C64::from_polar(1.0, *t2),
                C64::from_polar(1.0, -(t1 + t2)),
            ],
            _ => self.angles.iter().map(|&a| C64::from_polar(1.0, a)).collect(),
        }
    }
}

/// `χ_j(β) = sin((2j+1)β) / sin β`, continued through `β = kπ`.
pub fn su2_character(j: SpinLabel, beta: f64) -> f64 {
    let s = beta.sin();
    if s.abs() > 1e-6 {
        ((j.dim() as f64) * beta).sin() / s
    } else {
        su2_character_derivatives(j, beta).0
    }
}

/// `(χ, χ', χ'')` from the weight sum `χ_j(β) = Σ_m cos(2mβ)`.
pub fn su2_character_derivatives(j: SpinLabel, beta: f64) -> (f64, f64, f64) {
    let mut out = (0.0, 0.0, 0.0);
    for k in 0..=j.two_j {
        // 2m for m = j − k
        let w = j.two_j as f64 - 2.0 * k as f64;
        let (s, c) = (w * beta).sin_cos();
        out.0 += c;
        out.1 -= w * s;
        out.2 -= w * w * c;
    }
    out
}

/// 3×3 alternant `det[ε_i^{a}, ε_i^{b}, 1]`.
fn alternant(eps: &[C64; 3], a: u32, b: u32) -> C64 {
    let col_a: Vec<C64> = eps.iter().map(|e| e.powu(a)).collect();
    let col_b: Vec<C64> = eps.iter().map(|e| e.powu(b)).collect();
    // Expansion along the constant third column.
    col_a[1] * col_b[2] - col_a[2] * col_b[1] - (col_a[0] * col_b[2] - col_a[2] * col_b[0])
        + (col_a[0] * col_b[1] - col_a[1] * col_b[0])
}

/// Vandermonde `det[ε_i², ε_i, 1] = Π_{i<k}(ε_i − ε_k)`.
pub fn su3_weyl_denominator(t1: f64, t2: f64) -> C64 {
    let e = su3_eigenvalues(t1, t2);
    alternant(&e, 2, 1)
}

fn su3_eigenvalues(t1: f64, t2: f64) -> [C64; 3] {
    [
        C64::from_polar(1.0, t1),
        C64::from_polar(1.0, t2),
        C64::from_polar(1.0, -(t1 + t2)),
    ]
}

/// SU(3) character as a Laurent polynomial `Σ m_{ab} z1^a z2^b` with
/// `z_k = e^{iθ_k}` (the third eigenvalue is `1/(z1 z2)`).
///
/// Built from the Jacobi–Trudi identity `s_λ = h_{λ1} h_{λ2} − h_{λ1+1} h_{λ2−1}`
/// for `λ = (r1−2, r2−1, 0)`; it is finite on the whole torus.
#[derive(Debug, Clone)]
pub struct Su3Character {
    r1: u32,
    r2: u32,
    /// `(a, b, multiplicity)`.
    weights: Vec<(i32, i32, f64)>,
}

/// Value, gradient and Hessian of a character at a torus point.
#[derive(Debug, Clone, Copy)]
pub struct CharacterJet {
    pub value: C64,
    pub grad: [C64; 2],
    pub hess: [[C64; 2]; 2],
}

impl Su3Character {
    pub fn new(r1: u32, r2: u32) -> Result<Self> {
        IrrepLabel::su3(r1, r2)?;
        let l1 = (r1 - 2) as i32;
        let l2 = (r2 - 1) as i32;
        let mut acc = std::collections::BTreeMap::<(i32, i32), i64>::new();
        let mut add_product = |p: i32, q: i32, sign: i64| {
            for (w1, m1) in complete_homogeneous(p) {
                for (w2, m2) in complete_homogeneous(q) {
                    *acc.entry((w1.0 + w2.0, w1.1 + w2.1)).or_default() += sign * m1 * m2;
                }
            }
        };
        add_product(l1, l2, 1);
        add_product(l1 + 1, l2 - 1, -1);
        let weights = acc
            .into_iter()
            .filter(|&(_, m)| m != 0)
            .map(|((a, b), m)| (a, b, m as f64))
            .collect();
        Ok(Self { r1, r2, weights })
    }

    pub fn label(&self) -> IrrepLabel {
        IrrepLabel::Su3 { r1: self.r1, r2: self.r2 }
    }

    pub fn dim(&self) -> usize {
        self.label().dim()
    }

    /// Weight multiplicities `(a, b, m)`; they sum to the dimension.
    pub fn weights(&self) -> &[(i32, i32, f64)] {
        &self.weights
    }

    pub fn value(&self, t1: f64, t2: f64) -> C64 {
        self.weights
            .iter()
            .map(|&(a, b, m)| C64::from_polar(m, a as f64 * t1 + b as f64 * t2))
            .sum()
    }

    pub fn jet(&self, t1: f64, t2: f64) -> CharacterJet {
        let mut jet = CharacterJet {
            value: C64::new(0.0, 0.0),
            grad: [C64::new(0.0, 0.0); 2],
            hess: [[C64::new(0.0, 0.0); 2]; 2],
        };
        for &(a, b, m) in &self.weights {
            let (a, b) = (a as f64, b as f64);
            let term = C64::from_polar(m, a * t1 + b * t2);
            jet.value += term;
            jet.grad[0] += term * C64::new(0.0, a);
            jet.grad[1] += term * C64::new(0.0, b);
            jet.hess[0][0] -= term * (a * a);
            jet.hess[0][1] -= term * (a * b);
            jet.hess[1][1] -= term * (b * b);
        }
        jet.hess[1][0] = jet.hess[0][1];
        jet
    }
}

/// Monomials of `h_k(z1, z2, z3)` as `((a, b), multiplicity)` exponents of
/// `z1, z2` after substituting `z3 = 1/(z1 z2)`.
fn complete_homogeneous(k: i32) -> Vec<((i32, i32), i64)> {
    if k < 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for p in 0..=k {
        for q in 0..=(k - p) {
            let r = k - p - q;
            out.push(((p - r, q - r), 1));
        }
    }
    out
}

/// SU(3) character at `p`: alternant ratio off the Weyl walls, Schur
/// polynomial on and near them.
pub fn su3_character(r1: u32, r2: u32, p: &TorusPoint) -> Result<C64> {
    IrrepLabel::su3(r1, r2)?;
    let [t1, t2] = su3_angles(p)?;
    let eps = su3_eigenvalues(t1, t2);
    let den = alternant(&eps, 2, 1);
    if den.norm() >= WEYL_DENOMINATOR_FLOOR {
        Ok(alternant(&eps, r1, r2) / den)
    } else {
        Ok(Su3Character::new(r1, r2)?.value(t1, t2))
    }
}

fn su3_angles(p: &TorusPoint) -> Result<[f64; 2]> {
    match p.angles() {
        [a, b] => Ok([*a, *b]),
        other => Err(Error::invalid(format!("SU(3) torus point needs 2 angles, got {}", other.len()))),
    }
}

fn su2_angle(p: &TorusPoint) -> Result<f64> {
    match p.angles() {
        [b] => Ok(*b),
        other => Err(Error::invalid(format!("SU(2) torus point needs 1 angle, got {}", other.len()))),
    }
}

/// Character value for either group (real for SU(2)).
pub fn character(label: &IrrepLabel, p: &TorusPoint) -> Result<C64> {
    match *label {
        IrrepLabel::Su2(j) => Ok(C64::new(su2_character(j, su2_angle(p)?), 0.0)),
        IrrepLabel::Su3 { r1, r2 } => su3_character(r1, r2, p),
    }
}

/// Normalized fidelity `|χ(p)| / dim` for a realizable target.
pub fn fidelity_from_character(label: &IrrepLabel, p: &TorusPoint) -> Result<f64> {
    Ok(character(label, p)?.norm() / label.dim() as f64)
}

/// One axis of a [`LandscapeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub name: String,
    pub start: f64,
    pub step: f64,
    pub points: usize,
}

impl GridAxis {
    /// `points` samples covering `[start, end]` with both endpoints.
    pub fn closed(name: &str, start: f64, end: f64, points: usize) -> Self {
        Self {
            name: name.into(),
            start,
            step: (end - start) / (points - 1) as f64,
            points,
        }
    }

    /// `points` samples of the periodic interval `[0, 2π)`.
    pub fn periodic(name: &str, points: usize) -> Self {
        Self {
            name: name.into(),
            start: 0.0,
            step: TAU / points as f64,
            points,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }
}

/// Sampled fidelity landscape. Values are row-major with the first axis
/// varying slowest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub description: String,
    pub label: Option<IrrepLabel>,
    pub axes: Vec<GridAxis>,
    pub values: Vec<f64>,
}

impl LandscapeGrid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Index and value of the largest sample.
    pub fn argmax(&self) -> (usize, f64) {
        self.values
            .iter()
            .cloned()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
    }

    /// Axis coordinates of flat index `idx`.
    pub fn coordinates(&self, idx: usize) -> Vec<f64> {
        let mut rem = idx;
        let mut out = vec![0.0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            out[k] = axis.value(rem % axis.points);
            rem /= axis.points;
        }
        out
    }

    /// CSV with one column per axis followed by `J`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for axis in &self.axes {
            s.push_str(&axis.name);
            s.push(',');
        }
        s.push_str("J\n");
        for (i, v) in self.values.iter().enumerate() {
            for x in self.coordinates(i) {
                s.push_str(&format!("{x:.12},"));
            }
            s.push_str(&format!("{v:.12}\n"));
        }
        s
    }

    /// Number of strict one-dimensional local maxima (including endpoint
    /// maxima) of a 1-D grid.
    pub fn count_local_maxima_1d(&self) -> usize {
        let v = &self.values;
        let n = v.len();
        (0..n)
            .filter(|&i| {
                let left = if i == 0 { f64::NEG_INFINITY } else { v[i - 1] };
                let right = if i + 1 == n { f64::NEG_INFINITY } else { v[i + 1] };
                v[i] > left && v[i] >= right && (i + 1 < n || v[i] > left)
            })
            .count()
    }
}

/// Fidelity landscape of an irrep on its scan domain: `β ∈ [0, π/2]` for SU(2)
/// (endpoints included), `(θ1, θ2) ∈ [0, 2π)²` for SU(3).
pub fn scan_landscape(label: &IrrepLabel, resolution: usize) -> Result<LandscapeGrid> {
    if resolution < 16 {
        return Err(Error::invalid(format!("scan resolution {resolution} is below the minimum of 16")));
    }
    let n = label.dim() as f64;
    match *label {
        IrrepLabel::Su2(j) => {
            let axis = GridAxis::closed("beta", 0.0, PI / 2.0, resolution);
            let values = axis.values().iter().map(|&b| su2_character(j, b).abs() / n).collect();
            Ok(LandscapeGrid {
                description: format!("{label} fidelity over the fundamental domain"),
                label: Some(*label),
                axes: vec![axis],
                values,
            })
        }
        IrrepLabel::Su3 { r1, r2 } => {
            let chi = Su3Character::new(r1, r2)?;
            let a1 = GridAxis::periodic("theta1", resolution);
            let a2 = GridAxis::periodic("theta2", resolution);
            let values = torus_values(&chi, &a1.values(), &a2.values())
                .into_iter()
                .map(|z| z.norm() / n)
                .collect();
            Ok(LandscapeGrid {
                description: format!("{label} fidelity over the torus"),
                label: Some(*label),
                axes: vec![a1, a2],
                values,
            })
        }
    }
}

/// Character on the product grid `t1 × t2`, row-major in `t1`.
pub fn torus_values(chi: &Su3Character, t1: &[f64], t2: &[f64]) -> Vec<C64> {
    let w = chi.weights();
    // Per-weight phase tables keep the inner loop to complex multiplies.
    let p1: Vec<Vec<C64>> = w
        .iter()
        .map(|&(a, _, m)| t1.iter().map(|&t| C64::from_polar(m, a as f64 * t)).collect())
        .collect();
    let p2: Vec<Vec<C64>> = w
        .iter()
        .map(|&(_, b, _)| t2.iter().map(|&t| C64::from_polar(1.0, b as f64 * t)).collect())
        .collect();
    let mut out = Vec::with_capacity(t1.len() * t2.len());
    for i in 0..t1.len() {
        for k in 0..t2.len() {
            out.push((0..w.len()).map(|q| p1[q][i] * p2[q][k]).sum());
        }
    }
    out
}

/// `∫ |χ|² dμ` over the group by Weyl integration on a uniform torus grid with
/// `quadrature_points` per angle. Irreducible characters give 1.
pub fn weyl_orthonormality(label: &IrrepLabel, quadrature_points: usize) -> Result<f64> {
    if quadrature_points < 256 {
        return Err(Error::invalid("Weyl quadrature needs at least 256 points per angle"));
    }
    let m = quadrature_points;
    let h = TAU / m as f64;
    match *label {
        IrrepLabel::Su2(j) => {
            // (1/2)(1/2π) ∫ |e^{iβ} − e^{−iβ}|² |χ|² dβ
            let sum: f64 = (0..m)
                .map(|k| {
                    let b = k as f64 * h;
                    let chi = su2_character(j, b);
                    4.0 * b.sin().powi(2) * chi * chi
                })
                .sum();
            Ok(sum / (2.0 * m as f64))
        }
        IrrepLabel::Su3 { r1, r2 } => {
            let mut sum = 0.0;
            for i in 0..m {
                for k in 0..m {
                    let (t1, t2) = (i as f64 * h, k as f64 * h);
                    let den = su3_weyl_denominator(t1, t2).norm_sqr();
                    let chi = su3_character(r1, r2, &TorusPoint::su3(t1, t2))?;
                    sum += den * chi.norm_sqr();
                }
            }
            Ok(sum / (6.0 * (m * m) as f64))
        }
    }
}

/// Images of `(θ1, θ2)` under the six permutations of the eigenvalue angles
/// `(θ1, θ2, −θ1−θ2)`.
pub fn su3_weyl_orbit(t1: f64, t2: f64) -> [[f64; 2]; 6] {
    let t3 = -t1 - t2;
    [[t1, t2], [t2, t1], [t1, t3], [t3, t1], [t2, t3], [t3, t2]].map(|[a, b]| [wrap_angle(a), wrap_angle(b)])
}
