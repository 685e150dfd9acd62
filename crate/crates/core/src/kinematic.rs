//! Gate-fidelity landscape on the group itself: Euler-angle scans, the
//! gradient of `J(U) = N⁻¹|tr(W†U)|`, criticality residuals restricted to a
//! symmetry algebra, and Riemannian gradient ascent inside the group.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::characters::{GridAxis, LandscapeGrid};
use crate::error::{Error, Result};
use crate::matrix::{
    c, commutator, expm_skew_hermitian, hermitian_eigen, identity, pairs, project, reunitarize, CMatrix, MatrixChecks,
    MatrixSubspaceBasis, C64,
};
use crate::representations::SpinOperators;
use crate::sampling::{random_algebra_direction, random_group_element, run_seed};

/// Below this trace modulus the fidelity is treated as non-smooth.
pub const KINK_THRESHOLD: f64 = 1e-12;

/// Target unitary with an optional realizability verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTarget", into = "RawTarget")]
pub struct TargetGate {
    w: CMatrix,
    realizable: Option<bool>,
}

#[derive(Serialize, Deserialize)]
struct RawTarget {
    w: pairs::Pairs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    realizable: Option<bool>,
}

impl TryFrom<RawTarget> for TargetGate {
    type Error = Error;

    fn try_from(raw: RawTarget) -> Result<Self> {
        let mut t = TargetGate::new(pairs::from_pairs(&raw.w)?)?;
        t.realizable = raw.realizable;
        Ok(t)
    }
}

impl From<TargetGate> for RawTarget {
    fn from(t: TargetGate) -> Self {
        RawTarget {
            w: pairs::to_pairs(&t.w),
            realizable: t.realizable,
        }
    }
}

impl TargetGate {
    pub fn new(w: CMatrix) -> Result<Self> {
        if !w.is_square() || w.nrows() == 0 {
            return Err(Error::invalid("target must be a non-empty square matrix"));
        }
        if !w.is_unitary(1e-10) {
            return Err(Error::invalid("target is not unitary within 1e-10"));
        }
        Ok(Self { w, realizable: None })
    }

    /// `expm(a)` for `a` in `algebra`; realizable by construction.
    pub fn from_algebra_element(a: &CMatrix, algebra: &MatrixSubspaceBasis) -> Result<Self> {
        let inside = project(a, algebra)?;
        if (a - &inside).norm() > 1e-10 * a.norm().max(1.0) {
            return Err(Error::invalid("generator does not lie in the algebra"));
        }
        Ok(Self {
            w: expm_skew_hermitian(a),
            realizable: Some(true),
        })
    }

    /// `identity`, or `flip` for `diag(−1, 1, …, 1)`.
    pub fn named(name: &str, dim: usize) -> Result<Self> {
        match name {
            "identity" | "I" => Self::new(identity(dim)),
            "flip" => {
                let mut w = identity(dim);
                w[(0, 0)] = c(-1.0, 0.0);
                Self::new(w)
            }
            other => Err(Error::invalid(format!("unknown target `{other}` (expected identity or flip)"))),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.w
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn realizable(&self) -> Option<bool> {
        self.realizable
    }

    /// Numerical verdict: realizable when ascent from 32 seeded starts in the
    /// group reaches `J > 1 − 1e-6`. A constructive verdict is kept as is.
    pub fn assess_realizability(mut self, algebra: &MatrixSubspaceBasis, seed: u64) -> Result<Self> {
        if self.realizable == Some(true) {
            return Ok(self);
        }
        let config = AscentConfig::default();
        let mut reached = false;
        for k in 0..32 {
            let s = run_seed(seed, k);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let start = random_group_element(algebra, std::f64::consts::PI, &mut rng);
            let flow = riemannian_ascent(&start, &self, algebra, &AscentConfig { seed: s, ..config })?;
            if flow.final_j > 1.0 - 1e-6 {
                reached = true;
                break;
            }
        }
        self.realizable = Some(reached);
        Ok(self)
    }
}

/// Euler angles `(ψ1, θ, ψ2)`, reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerPoint {
    pub psi1: f64,
    pub theta: f64,
    pub psi2: f64,
}

impl EulerPoint {
    pub fn new(psi1: f64, theta: f64, psi2: f64) -> Self {
        use crate::characters::wrap_angle;
        Self {
            psi1: wrap_angle(psi1),
            theta: wrap_angle(theta),
            psi2: wrap_angle(psi2),
        }
    }
}

/// `expm(ψ1·i·jz) · expm(θ·i·jx) · expm(ψ2·i·jz)`.
pub fn euler_unitary(ops: &SpinOperators, p: &EulerPoint) -> CMatrix {
    let rz = |a: f64| expm_skew_hermitian(&(&ops.jz * c(0.0, a)));
    rz(p.psi1) * expm_skew_hermitian(&(&ops.jx * c(0.0, p.theta))) * rz(p.psi2)
}

/// `N⁻¹|tr(W†U)|`.
pub fn gate_fidelity(u: &CMatrix, w: &TargetGate) -> f64 {
    overlap(u, w).norm() / w.dim() as f64
}

/// `tr(W†U) = Σ conj(W_ab) U_ab`.
fn overlap(u: &CMatrix, w: &TargetGate) -> C64 {
    w.matrix().iter().zip(u.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Fidelity landscape over `(θ, φ) ∈ [0, 2π)²` for a target commuting with
/// `jz`: `J(θ, φ) = N⁻¹|tr(W† expm(φ·i·jz) expm(θ·i·jx))|`.
pub fn reduced_scan(ops: &SpinOperators, w: &TargetGate, resolution: usize) -> Result<LandscapeGrid> {
    if resolution < 64 {
        return Err(Error::invalid(format!("reduced scan resolution {resolution} is below the minimum of 64")));
    }
    if w.dim() != ops.dim() {
        return Err(Error::invalid(format!("target has dimension {} but the spin has {}", w.dim(), ops.dim())));
    }
    if commutator(w.matrix(), &ops.jz).norm() > 1e-10 {
        return Err(Error::invalid("reduced scan requires a target commuting with jz ([W, jz] = 0 within 1e-10)"));
    }
    let n = ops.dim();
    let theta = GridAxis::periodic("theta", resolution);
    let phi = GridAxis::periodic("phi", resolution);
    let (lx, vx) = hermitian_eigen(&ops.jx);
    let m: Vec<f64> = (0..n).map(|k| ops.jz[(k, k)].re).collect();
    let w_adj = w.matrix().adjoint();
    // With D_φ = expm(φ·i·jz) diagonal, tr(W† D_φ E_θ) = Σ_k e^{iφ m_k} (E_θ W†)_kk.
    let phases: Vec<Vec<C64>> = phi
        .values()
        .iter()
        .map(|&p| m.iter().map(|&mk| C64::from_polar(1.0, p * mk)).collect())
        .collect();
    let mut values = Vec::with_capacity(resolution * resolution);
    for t in theta.values() {
        let d: Vec<C64> = lx.iter().map(|&l| C64::from_polar(1.0, t * l)).collect();
        let e = crate::matrix::reconstruct(&vx, &d);
        let ew = &e * &w_adj;
        let diag: Vec<C64> = (0..n).map(|k| ew[(k, k)]).collect();
        for ph in &phases {
            let z: C64 = ph.iter().zip(&diag).map(|(a, b)| a * b).sum();
            values.push(z.norm() / n as f64);
        }
    }
    Ok(LandscapeGrid {
        description: format!("fidelity over (theta, phi) for spin dimension {n}"),
        label: None,
        axes: vec![theta, phi],
        values,
    })
}

/// Skew-Hermitian gradient generator `(e^{iφ}U†W − e^{−iφ}W†U)/(2N)` with
/// `φ = arg tr(W†U)`: `J(U·expm(sA)) = J(U) + s⟨D, A⟩ + O(s²)`.
pub fn gate_gradient_generator(u: &CMatrix, w: &TargetGate) -> Result<CMatrix> {
    if u.shape() != w.matrix().shape() {
        return Err(Error::invalid("unitary and target dimensions differ"));
    }
    let z = overlap(u, w);
    if z.norm() < KINK_THRESHOLD {
        return Err(Error::NonSmooth {
            modulus: z.norm(),
            threshold: KINK_THRESHOLD,
        });
    }
    let phase = z / z.norm();
    let x = u.adjoint() * w.matrix() * phase;
    Ok((&x - x.adjoint()) * c(0.5 / w.dim() as f64, 0.0))
}

/// `‖project(D(u), algebra)‖_F`.
pub fn criticality_residual(u: &CMatrix, w: &TargetGate, algebra: &MatrixSubspaceBasis) -> Result<f64> {
    Ok(project(&gate_gradient_generator(u, w)?, algebra)?.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AscentConfig {
    /// Stop once the projected gradient norm drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Seeds the restart perturbations.
    pub seed: u64,
    /// Keep the accepted `J` sequence in [`FlowResult::history`].
    pub record_history: bool,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100_000,
            seed: 0,
            record_history: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    #[serde(with = "pairs::serde_matrix")]
    pub start: CMatrix,
    #[serde(with = "pairs::serde_matrix")]
    pub end: CMatrix,
    #[serde(rename = "final_J")]
    pub final_j: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub restarts: usize,
    #[serde(skip)]
    pub history: Vec<f64>,
}

/// Compact record of one ensemble member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub seed: u64,
    #[serde(rename = "final_J")]
    pub final_j: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl FlowResult {
    pub fn summary(&self, seed: u64) -> FlowSummary {
        FlowSummary {
            seed,
            final_j: self.final_j,
            iterations: self.iterations,
            residual: self.residual,
            converged: self.converged,
        }
    }
}

struct FlowState {
    u: CMatrix,
    j: f64,
    grad: Vec<f64>,
    norm: f64,
}

fn flow_state(u: CMatrix, w: &TargetGate, algebra: &MatrixSubspaceBasis) -> Result<FlowState> {
    let d = gate_gradient_generator(&u, w)?;
    let grad = algebra.coefficients(&d);
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    Ok(FlowState {
        j: gate_fidelity(&u, w),
        u,
        grad,
        norm,
    })
}

/// Projected gradient ascent `U ← U·expm(η·P(D))`.
///
/// The first trial step is `η = 0.5/‖P(D)‖`, later ones are Barzilai–Borwein
/// estimates capped at the same rotation size, halved until accepted. A step is
/// accepted when it satisfies the Armijo condition, or when it keeps `J` from
/// decreasing while shrinking the gradient (near a maximum the gain falls
/// below the resolution of `J`). Accepted steps never decrease `J`.
pub fn riemannian_ascent(
    start: &CMatrix,
    w: &TargetGate,
    algebra: &MatrixSubspaceBasis,
    config: &AscentConfig,
) -> Result<FlowResult> {
    if start.shape() != w.matrix().shape() || algebra.ambient_dim() != w.dim() {
        return Err(Error::invalid("start, target and algebra dimensions differ"));
    }
    if !start.is_unitary(1e-9) {
        return Err(Error::invalid("start is not unitary"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut restarts = 0;
    let kinked = |u: &CMatrix| overlap(u, w).norm() < KINK_THRESHOLD;
    let mut u0 = start.clone();
    while kinked(&u0) {
        restarts += 1;
        u0 = &u0 * expm_skew_hermitian(&random_algebra_direction(algebra, 1e-3, &mut rng));
    }
    let mut s = flow_state(u0, w, algebra)?;
    let mut history = Vec::new();
    if config.record_history {
        history.push(s.j);
    }
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut it = 0;
    let (mut mark_j, mut mark_g, mut mark_it) = (s.j, s.norm, 0);
    while it < config.max_iter && s.norm >= config.tol {
        if s.norm < 0.5 * mark_g || s.j > mark_j + 1e-12 {
            (mark_j, mark_g, mark_it) = (s.j, s.norm, it);
        } else if it - mark_it >= crate::dynamics::STALL_WINDOW {
            break;
        }
        let cap = 0.5 / s.norm;
        let mut eta = match &prev {
            Some((step, pg)) => {
                let y: Vec<f64> = s.grad.iter().zip(pg).map(|(a, b)| a - b).collect();
                let sy: f64 = step.iter().zip(&y).map(|(a, b)| a * b).sum();
                let ss: f64 = step.iter().map(|a| a * a).sum();
                if sy != 0.0 {
                    (ss / sy).abs().min(cap)
                } else {
                    cap
                }
            }
            None => cap,
        };
        let mut accepted = None;
        for _ in 0..60 {
            let step: Vec<f64> = s.grad.iter().map(|g| eta * g).collect();
            let mut trial = &s.u * expm_skew_hermitian(&algebra.combine(&step));
            if kinked(&trial) {
                restarts += 1;
                trial = &trial * expm_skew_hermitian(&random_algebra_direction(algebra, 1e-3, &mut rng));
                if kinked(&trial) {
                    eta *= 0.5;
                    continue;
                }
            }
            let t = flow_state(trial, w, algebra)?;
            let armijo = t.j >= s.j + 1e-4 * eta * s.norm * s.norm;
            let flat = t.j >= s.j && t.norm < s.norm;
            if armijo || flat {
                accepted = Some((t, step));
                break;
            }
            eta *= 0.5;
        }
        let Some((mut t, step)) = accepted else { break };
        it += 1;
        if it % 64 == 0 && !t.u.is_unitary(1e-12) {
            let j_before = t.j;
            let fixed = flow_state(reunitarize(&t.u), w, algebra)?;
            if fixed.j >= j_before {
                t = fixed;
            } else {
                // Keep the sequence monotone; the polar factor moves J only at roundoff level.
                t = FlowState { j: j_before, ..fixed };
            }
        }
        if config.record_history {
            history.push(t.j);
        }
        prev = Some((step, std::mem::take(&mut s.grad)));
        s = t;
    }
    let end = if s.u.is_unitary(1e-12) { s.u } else { reunitarize(&s.u) };
    let final_j = gate_fidelity(&end, w);
    Ok(FlowResult {
        start: start.clone(),
        end,
        final_j,
        iterations: it,
        residual: s.norm,
        converged: s.norm < config.tol,
        restarts,
        history,
    })
}

/// Ascent from `starts` random group elements; run `k` uses
/// `run_seed(master_seed, k)` for both its start and its restarts.
pub fn flow_ensemble(
    w: &TargetGate,
    algebra: &MatrixSubspaceBasis,
    starts: usize,
    master_seed: u64,
    config: &AscentConfig,
) -> Result<Vec<(u64, FlowResult)>> {
    (0..starts as u64)
        .map(|k| {
            let seed = run_seed(master_seed, k);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = random_group_element(algebra, std::f64::consts::PI, &mut rng);
            let flow = riemannian_ascent(&start, w, algebra, &AscentConfig { seed, ..*config })?;
            Ok((seed, flow))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{fidelity_from_character, IrrepLabel, TorusPoint};
    use crate::matrix::{hs_inner_unchecked, unitary_algebra_basis, I};
    use crate::representations::{build_spin_operators, SpinLabel};
    use crate::topology::critical_points_su2;
    use rand::Rng;
    use std::f64::consts::PI;

    fn spin(two_j: u32) -> SpinOperators {
        build_spin_operators(SpinLabel::new(two_j))
    }

    #[test]
    fn euler_examples() {
        let ops = spin(5);
        let id = euler_unitary(&ops, &EulerPoint::new(0.0, 0.0, 0.0));
        assert!((id - identity(6)).norm() < 1e-12);
        let a = euler_unitary(&ops, &EulerPoint::new(0.3, 0.0, 1.1));
        let b = euler_unitary(&ops, &EulerPoint::new(1.4, 0.0, 0.0));
        assert!((a - b).norm() < 1e-12);
        // Spin-1/2: expm(iπσx/2) = iσx.
        let u = euler_unitary(&spin(1), &EulerPoint::new(0.0, PI, 0.0));
        let expected = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), I, I, c(0.0, 0.0)]);
        assert!((u - expected).norm() < 1e-12);
        let p = EulerPoint::new(-1.0, 7.0, 2.0 * PI);
        assert!(p.psi1 >= 0.0 && p.theta < 2.0 * PI && p.psi2 == 0.0);
        assert!(euler_unitary(&spin(7), &EulerPoint::new(0.4, 2.2, 5.0)).is_unitary(1e-10));
    }

    #[test]
    fn gradient_at_target_vanishes() {
        let ops = spin(4);
        let w = TargetGate::new(euler_unitary(&ops, &EulerPoint::new(0.2, 0.9, 1.7))).unwrap();
        assert!(gate_gradient_generator(w.matrix(), &w).unwrap().norm() < 1e-14);
        assert!(criticality_residual(w.matrix(), &w, &ops.algebra()).unwrap() < 1e-10);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..60 {
            let n = 2 + trial % 7;
            let full = unitary_algebra_basis(n, false);
            let u = random_group_element(&full, 2.0, &mut rng);
            let w = TargetGate::new(random_group_element(&full, 2.0, &mut rng)).unwrap();
            let dir = random_algebra_direction(&full, 1.0, &mut rng);
            let d = gate_gradient_generator(&u, &w).unwrap();
            assert!(d.is_skew_hermitian(1e-12));
            let h = 1e-5;
            let f = |s: f64| gate_fidelity(&(&u * expm_skew_hermitian(&(&dir * c(s, 0.0)))), &w);
            let fd = (f(h) - f(-h)) / (2.0 * h);
            let an = hs_inner_unchecked(&d, &dir);
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "n={n} fd={fd} an={an}");
        }
    }

    #[test]
    fn real_positive_trace_reduces_to_plain_difference() {
        let ops = spin(3);
        let w = TargetGate::new(identity(4)).unwrap();
        let u = euler_unitary(&ops, &EulerPoint::new(0.0, 0.3, 0.0));
        assert!(u.trace().re > 0.0 && u.trace().im.abs() < 1e-12);
        let plain = (u.adjoint() - &u) * c(1.0 / 8.0, 0.0);
        assert!((gate_gradient_generator(&u, &w).unwrap() - plain).norm() < 1e-12);
    }

    #[test]
    fn kink_is_reported() {
        // tr(σz) = 0
        let w = TargetGate::new(identity(2)).unwrap();
        let u = CMatrix::from_row_slice(2, 2, &[I, c(0.0, 0.0), c(0.0, 0.0), -I]);
        assert!(matches!(gate_gradient_generator(&u, &w), Err(Error::NonSmooth { .. })));
    }

    #[test]
    fn residual_with_full_algebra_is_gradient_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let full = unitary_algebra_basis(5, false);
        let u = random_group_element(&full, 1.0, &mut rng);
        let w = TargetGate::new(random_group_element(&full, 1.0, &mut rng)).unwrap();
        let d = gate_gradient_generator(&u, &w).unwrap();
        assert!((criticality_residual(&u, &w, &full).unwrap() - d.norm()).abs() < 1e-12);
    }

    #[test]
    fn trap_representatives_are_critical() {
        let label = SpinLabel::new(6);
        let ops = build_spin_operators(label);
        let w = TargetGate::new(identity(7)).unwrap();
        let report = critical_points_su2(label, 1e-8).unwrap();
        for p in report.points.iter().filter(|p| !p.hessian_eigenvalues.is_empty()) {
            let beta = p.location.angles()[0];
            let u = expm_skew_hermitian(&(&ops.jz * c(0.0, 2.0 * beta)));
            assert!(criticality_residual(&u, &w, &ops.algebra()).unwrap() < 1e-6);
            // Such starts stay put.
            let flow = riemannian_ascent(&u, &w, &ops.algebra(), &AscentConfig::default()).unwrap();
            assert!((flow.final_j - p.value).abs() < 1e-9);
        }
    }

    #[test]
    fn ascent_from_target_is_immediate() {
        let ops = spin(5);
        let w = TargetGate::new(euler_unitary(&ops, &EulerPoint::new(1.0, 2.0, 3.0))).unwrap();
        let flow = riemannian_ascent(w.matrix(), &w, &ops.algebra(), &AscentConfig::default()).unwrap();
        assert_eq!(flow.iterations, 0);
        assert!((flow.final_j - 1.0).abs() < 1e-12);
        assert!(flow.converged);
    }

    #[test]
    fn spin_half_is_trap_free_and_monotone() {
        let ops = spin(1);
        let w = TargetGate::new(identity(2)).unwrap();
        let config = AscentConfig {
            record_history: true,
            ..AscentConfig::default()
        };
        for (_, flow) in flow_ensemble(&w, &ops.algebra(), 50, 3, &config).unwrap() {
            assert!(flow.final_j > 1.0 - 1e-9);
            assert!(flow.history.windows(2).all(|p| p[1] >= p[0]));
            assert!(flow.end.is_unitary(1e-9));
        }
    }

    #[test]
    fn reduced_scan_identity_follows_character() {
        let label = SpinLabel::new(7);
        let ops = build_spin_operators(label);
        let half = build_spin_operators(SpinLabel::new(1));
        let w = TargetGate::new(identity(8)).unwrap();
        let grid = reduced_scan(&ops, &w, 64).unwrap();
        assert!((grid.values[0] - 1.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let idx = rng.random_range(0..grid.len());
            let xy = grid.coordinates(idx);
            // The class angle β is read off the spin-1/2 element: tr = 2 cos β.
            let u = expm_skew_hermitian(&(&half.jz * c(0.0, xy[1]))) * expm_skew_hermitian(&(&half.jx * c(0.0, xy[0])));
            let beta = (u.trace().re / 2.0).clamp(-1.0, 1.0).acos();
            let f = fidelity_from_character(&IrrepLabel::Su2(label), &TorusPoint::su2(beta)).unwrap();
            assert!((f - grid.values[idx]).abs() < 1e-9);
        }
    }

    #[test]
    fn reduced_scan_preconditions() {
        let ops = spin(7);
        let w = TargetGate::new(euler_unitary(&ops, &EulerPoint::new(0.0, 0.5, 0.0))).unwrap();
        let err = reduced_scan(&ops, &w, 64).unwrap_err();
        assert!(err.to_string().contains("commuting with jz"));
        let id = TargetGate::named("identity", 8).unwrap();
        assert!(reduced_scan(&ops, &id, 32).is_err());
    }

    #[test]
    fn flipped_target_caps_at_three_quarters_for_eight_levels() {
        let ops = spin(7);
        let w = TargetGate::named("flip", 8).unwrap();
        let grid = reduced_scan(&ops, &w, 256).unwrap();
        assert!((grid.max() - 0.75).abs() < 1e-12);
        // Ten levels give 0.8.
        let ops10 = spin(9);
        let w10 = TargetGate::named("flip", 10).unwrap();
        assert!((reduced_scan(&ops10, &w10, 128).unwrap().max() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn realizability_verdicts() {
        let ops = spin(3);
        let alg = ops.algebra();
        let g = &ops.jx * c(0.0, 0.7) + &ops.jz * c(0.0, -1.2);
        let w = TargetGate::from_algebra_element(&g, &alg).unwrap();
        assert_eq!(w.realizable(), Some(true));
        let numeric = TargetGate::new(w.matrix().clone()).unwrap().assess_realizability(&alg, 1).unwrap();
        assert_eq!(numeric.realizable(), Some(true));
        let flip = TargetGate::named("flip", 4).unwrap().assess_realizability(&alg, 1).unwrap();
        assert_eq!(flip.realizable(), Some(false));
        assert!(TargetGate::from_algebra_element(&(ops.jz_squared() * I), &alg).is_err());
    }

    #[test]
    fn target_json_round_trip() {
        let w = TargetGate::named("flip", 3).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        let back: TargetGate = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
        assert!(serde_json::from_str::<TargetGate>(r#"{"w":[[[2,0]]]}"#).is_err());
    }
}
