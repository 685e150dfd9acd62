//! Piecewise-constant propagation, exact GRAPE gradients and multi-start
//! pulse optimization with trap statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematic::{TargetGate, KINK_THRESHOLD};
use crate::matrix::{c, hermitian_eigen, identity, pairs, reconstruct, reunitarize, CMatrix, MatrixChecks, C64};
use crate::representations::ControlSystem;
use crate::sampling::run_seed;

/// Piecewise-constant control amplitudes, `amplitudes[k][p]` for channel `k`
/// during step `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlField {
    dt: f64,
    amplitudes: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bound: Option<f64>,
}

impl ControlField {
    pub fn new(amplitudes: Vec<Vec<f64>>, dt: f64, bound: Option<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("time step {dt} must be positive and finite")));
        }
        let steps = amplitudes.first().map_or(0, Vec::len);
        if amplitudes.is_empty() || steps == 0 {
            return Err(Error::invalid("a control field needs at least one channel and one step"));
        }
        if amplitudes.iter().any(|row| row.len() != steps) {
            return Err(Error::invalid("all channels must have the same number of steps"));
        }
        if amplitudes.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::invalid("control amplitudes must be finite"));
        }
        if let Some(b) = bound {
            if !(b > 0.0) {
                return Err(Error::invalid("amplitude bound must be positive"));
            }
            if amplitudes.iter().flatten().any(|a| a.abs() > b) {
                return Err(Error::invalid(format!("amplitude exceeds the bound {b}")));
            }
        }
        Ok(Self { dt, amplitudes, bound })
    }

    pub fn zeros(channels: usize, steps: usize, dt: f64) -> Result<Self> {
        Self::new(vec![vec![0.0; steps]; channels], dt, None)
    }

    pub fn channels(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn steps(&self) -> usize {
        self.amplitudes[0].len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_f(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn amplitudes(&self) -> &[Vec<f64>] {
        &self.amplitudes
    }

    fn flat(&self) -> Vec<f64> {
        self.amplitudes.iter().flatten().copied().collect()
    }

    fn with_flat(&self, x: &[f64]) -> Self {
        let p = self.steps();
        Self {
            dt: self.dt,
            amplitudes: x.chunks(p).map(<[f64]>::to_vec).collect(),
            bound: self.bound,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub final_propagator: CMatrix,
    /// `U(t_p)` after each step, when requested.
    pub intermediate_propagators: Option<Vec<CMatrix>>,
}

fn check_shapes(sys: &ControlSystem, field: &ControlField) -> Result<()> {
    if field.channels() != sys.controls().len() {
        return Err(Error::invalid(format!(
            "field has {} channels but the system has {} controls",
            field.channels(),
            sys.controls().len()
        )));
    }
    Ok(())
}

fn step_hamiltonian(sys: &ControlSystem, field: &ControlField, p: usize) -> CMatrix {
    let mut h = sys.h0().clone();
    for (k, hk) in sys.controls().iter().enumerate() {
        h += hk * c(field.amplitudes[k][p], 0.0);
    }
    h
}

/// Spectral data of one step: eigenvalues, eigenvectors and the step unitary.
struct Step {
    lambda: Vec<f64>,
    v: CMatrix,
    u: CMatrix,
}

fn step(sys: &ControlSystem, field: &ControlField, p: usize) -> Step {
    let (lam, v) = hermitian_eigen(&step_hamiltonian(sys, field, p));
    let phases: Vec<C64> = lam.iter().map(|&l| C64::from_polar(1.0, -field.dt * l)).collect();
    let u = reconstruct(&v, &phases);
    Step {
        lambda: lam.iter().copied().collect(),
        v,
        u,
    }
}

/// `U(t_f) = Π_{p=P..1} expm(−i·dt·(H₀ + Σ_k ε_k[p] H_k))`.
pub fn propagate(sys: &ControlSystem, field: &ControlField, keep_intermediate: bool) -> Result<PropagationResult> {
    check_shapes(sys, field)?;
    let mut u = identity(sys.dim());
    let mut inter = keep_intermediate.then(Vec::new);
    for p in 0..field.steps() {
        u = step(sys, field, p).u * u;
        if p % 256 == 255 && !u.is_unitary(1e-12) {
            u = reunitarize(&u);
        }
        if let Some(v) = inter.as_mut() {
            v.push(u.clone());
        }
    }
    if !u.is_unitary(1e-9) {
        u = reunitarize(&u);
    }
    Ok(PropagationResult {
        final_propagator: u,
        intermediate_propagators: inter,
    })
}

/// `(e^{−i·dt·a} − e^{−i·dt·b}) / (a − b)`, continuous at `a = b`.
fn divided_difference(a: f64, b: f64, dt: f64) -> C64 {
    let d = a - b;
    let base = C64::from_polar(1.0, -dt * b);
    if d == 0.0 {
        return base * c(0.0, -dt);
    }
    let x = -dt * d;
    // e^{ix} − 1 without cancellation
    let em1 = c(-2.0 * (0.5 * x).sin().powi(2), x.sin());
    base * em1 / d
}

/// `J = N⁻¹|tr(W†U(t_f))|` and `∂J/∂ε_k[p]`, exact for piecewise-constant
/// fields via the spectral derivative of each step exponential.
pub fn fidelity_and_gradient(sys: &ControlSystem, field: &ControlField, w: &TargetGate) -> Result<(f64, Vec<Vec<f64>>)> {
    check_shapes(sys, field)?;
    if w.dim() != sys.dim() {
        return Err(Error::invalid("target and system dimensions differ"));
    }
    let n = sys.dim();
    let steps: Vec<Step> = (0..field.steps()).map(|p| step(sys, field, p)).collect();
    // forward[p] = U_p ⋯ U_1 (forward[0] = I); backward[p] = U_P ⋯ U_{p+1}.
    let mut forward = Vec::with_capacity(steps.len() + 1);
    forward.push(identity(n));
    for s in &steps {
        let next = &s.u * forward.last().expect("non-empty");
        forward.push(next);
    }
    let mut backward = vec![identity(n); steps.len()];
    for p in (0..steps.len().saturating_sub(1)).rev() {
        backward[p] = &backward[p + 1] * &steps[p + 1].u;
    }
    let u_final = &forward[steps.len()];
    let w_adj = w.matrix().adjoint();
    let z = (&w_adj * u_final).trace();
    if z.norm() < KINK_THRESHOLD {
        return Err(Error::NonSmooth {
            modulus: z.norm(),
            threshold: KINK_THRESHOLD,
        });
    }
    let scale = z.conj() / (n as f64 * z.norm());
    let mut grad = vec![vec![0.0; field.steps()]; field.channels()];
    for (p, s) in steps.iter().enumerate() {
        // dz = tr(M dU_p) with M = F_{p−1} W† B_p, evaluated in the step eigenbasis.
        let m = &forward[p] * &w_adj * &backward[p];
        let m_eig = s.v.adjoint() * m * &s.v;
        let mut g = CMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                g[(a, b)] = divided_difference(s.lambda[a], s.lambda[b], field.dt);
            }
        }
        for (k, hk) in sys.controls().iter().enumerate() {
            let h_eig = s.v.adjoint() * hk * &s.v;
            let mut dz = C64::new(0.0, 0.0);
            for a in 0..n {
                for b in 0..n {
                    dz += m_eig[(b, a)] * g[(a, b)] * h_eig[(a, b)];
                }
            }
            grad[k][p] = (scale * dz).re;
        }
    }
    Ok((z.norm() / n as f64, grad))
}

/// Default control duration `10π·N/‖H₀‖` (spectral norm), or `10π·N` when
/// the drift vanishes.
pub fn default_duration(sys: &ControlSystem) -> f64 {
    let (lam, _) = hermitian_eigen(sys.h0());
    let norm = lam.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let n = sys.dim() as f64;
    if norm > 0.0 {
        10.0 * std::f64::consts::PI * n / norm
    } else {
        10.0 * std::f64::consts::PI * n
    }
}

/// Multi-start GRAPE settings. Exactly one of `dt` and `t_f` may be left out;
/// with both absent the duration comes from [`default_duration`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrapeConfig {
    pub starts: usize,
    pub steps: usize,
    pub dt: Option<f64>,
    pub t_f: Option<f64>,
    /// Initial amplitudes are uniform in `[lo, hi]`.
    pub bounds: [f64; 2],
    /// Clip amplitudes to `bounds` during the ascent.
    pub enforce_bounds: bool,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for GrapeConfig {
    fn default() -> Self {
        Self {
            starts: 20,
            steps: 64,
            dt: None,
            t_f: None,
            bounds: [-1.0, 1.0],
            enforce_bounds: false,
            max_iter: 2000,
            grad_tol: 1e-7,
            seed: 0,
        }
    }
}

impl GrapeConfig {
    /// Step length after reconciling `dt`, `t_f` and `steps`.
    pub fn resolve_dt(&self, sys: &ControlSystem) -> Result<f64> {
        if self.steps == 0 {
            return Err(Error::invalid("GRAPE needs at least one time step"));
        }
        let p = self.steps as f64;
        match (self.dt, self.t_f) {
            (Some(dt), Some(tf)) if ((dt * p - tf) / tf).abs() > 1e-9 => Err(Error::invalid(format!(
                "dt·steps = {} does not match t_f = {tf}",
                dt * p
            ))),
            (Some(dt), _) => Ok(dt),
            (None, Some(tf)) => Ok(tf / p),
            (None, None) => Ok(default_duration(sys) / p),
        }
    }

    fn validate(&self) -> Result<()> {
        let [lo, hi] = self.bounds;
        if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::invalid("bounds must be a finite interval [lo, hi]"));
        }
        if self.enforce_bounds && !(lo < 0.0 && hi > 0.0) {
            // Keeps the zero field feasible.
            return Err(Error::invalid("enforced bounds must contain 0 in their interior"));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::invalid("grad_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrapeOutcome {
    pub run: usize,
    pub seed: u64,
    #[serde(rename = "final_J")]
    pub final_j: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `J` at iterations 0, 1, 2, 4, 8, … and at the end.
    pub trajectory_summary: Vec<f64>,
    #[serde(skip)]
    pub field: Option<ControlField>,
}

/// Iterations without progress after which an ascent gives up.
pub const STALL_WINDOW: usize = 50;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Gradient with components that push against an active bound removed.
fn projected(x: &[f64], g: &[f64], bounds: Option<[f64; 2]>) -> Vec<f64> {
    match bounds {
        None => g.to_vec(),
        Some([lo, hi]) => x
            .iter()
            .zip(g)
            .map(|(&xi, &gi)| if (xi >= hi && gi > 0.0) || (xi <= lo && gi < 0.0) { 0.0 } else { gi })
            .collect(),
    }
}

/// Monotone gradient ascent on the control amplitudes from `field`.
pub fn grape_ascent(
    sys: &ControlSystem,
    w: &TargetGate,
    field: &ControlField,
    config: &GrapeConfig,
) -> Result<(ControlField, f64, f64, usize, Vec<f64>)> {
    let box_bounds = config.enforce_bounds.then_some(config.bounds);
    let clip = |x: Vec<f64>| match box_bounds {
        Some([lo, hi]) => x.into_iter().map(|v| v.clamp(lo, hi)).collect(),
        None => x,
    };
    let eval = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
        let (j, g) = fidelity_and_gradient(sys, &field.with_flat(x), w)?;
        let g: Vec<f64> = g.into_iter().flatten().collect();
        Ok((j, projected(x, &g, box_bounds)))
    };
    let mut x = clip(field.flat());
    let (mut j, mut g) = eval(&x)?;
    let mut trajectory = vec![j];
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut it = 0;
    // Near a maximum, roundoff in J puts a floor under the reachable gradient
    // norm; stop once neither J nor the gradient has moved for a while.
    let (mut mark_j, mut mark_g, mut mark_it) = (j, norm(&g), 0);
    while it < config.max_iter {
        let gn = norm(&g);
        if gn < config.grad_tol {
            break;
        }
        if gn < 0.5 * mark_g || j > mark_j + 1e-12 {
            (mark_j, mark_g, mark_it) = (j, gn, it);
        } else if it - mark_it >= STALL_WINDOW {
            break;
        }
        // Largest change of any single amplitude in one step.
        let cap = 1.0 / gn;
        let mut eta = match &prev {
            Some((px, pg)) => {
                let s: Vec<f64> = x.iter().zip(px).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = g.iter().zip(pg).map(|(a, b)| a - b).collect();
                let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
                let ss: f64 = s.iter().map(|a| a * a).sum();
                if sy != 0.0 {
                    (ss / sy).abs().min(cap)
                } else {
                    cap
                }
            }
            None => cap.min(0.1),
        };
        let mut accepted = None;
        for _ in 0..60 {
            let trial = clip(x.iter().zip(&g).map(|(a, b)| a + eta * b).collect());
            match eval(&trial) {
                Ok((tj, tg)) => {
                    let moved: f64 = trial.iter().zip(&x).zip(&g).map(|((t, a), b)| (t - a) * b).sum();
                    let armijo = tj >= j + 1e-4 * moved;
                    let flat = tj >= j && norm(&tg) < gn;
                    if armijo || flat {
                        accepted = Some((trial, tj, tg));
                        break;
                    }
                }
                Err(Error::NonSmooth { .. }) => {}
                Err(e) => return Err(e),
            }
            eta *= 0.5;
        }
        let Some((nx, nj, ng)) = accepted else { break };
        prev = Some((std::mem::replace(&mut x, nx), std::mem::replace(&mut g, ng)));
        j = nj;
        it += 1;
        if it.is_power_of_two() {
            trajectory.push(j);
        }
    }
    if trajectory.len() == 1 || !it.is_power_of_two() {
        trajectory.push(j);
    }
    let gn = norm(&g);
    Ok((field.with_flat(&x), j, gn, it, trajectory))
}

const MAX_REDRAWS: u64 = 100;

/// Random initial field for run seed `seed`.
fn initial_field(sys: &ControlSystem, config: &GrapeConfig, dt: f64, seed: u64) -> Result<ControlField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [lo, hi] = config.bounds;
    let amps = (0..sys.controls().len())
        .map(|_| (0..config.steps).map(|_| if hi > lo { rng.random_range(lo..hi) } else { lo }).collect())
        .collect();
    let bound = config.enforce_bounds.then(|| lo.abs().max(hi.abs()));
    ControlField::new(amps, dt, bound)
}

/// Runs `config.starts` independent GRAPE ascents. Run `k` draws its initial
/// field from `run_seed(config.seed, k)`; outcomes are ordered by run index.
pub fn run_grape(sys: &ControlSystem, w: &TargetGate, config: &GrapeConfig) -> Result<Vec<GrapeOutcome>> {
    config.validate()?;
    if w.dim() != sys.dim() {
        return Err(Error::invalid("target and system dimensions differ"));
    }
    let dt = config.resolve_dt(sys)?;
    (0..config.starts)
        .map(|run| {
            let seed = run_seed(config.seed, run as u64);
            let mut field = initial_field(sys, config, dt, seed)?;
            // A start exactly on the kink is redrawn.
            let mut bump = 0;
            while let Err(e) = fidelity_and_gradient(sys, &field, w) {
                if !matches!(e, Error::NonSmooth { .. }) || bump == MAX_REDRAWS {
                    return Err(e);
                }
                bump += 1;
                field = initial_field(sys, config, dt, run_seed(seed, bump))?;
            }
            let (field, final_j, gradient_norm, iterations, trajectory_summary) = grape_ascent(sys, w, &field, config)?;
            Ok(GrapeOutcome {
                run,
                seed,
                final_j,
                gradient_norm,
                iterations,
                converged: gradient_norm < config.grad_tol,
                trajectory_summary,
                field: Some(field),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCount {
    pub value: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapSummary {
    pub total: usize,
    pub tolerance: f64,
    pub histogram: Vec<LevelCount>,
    pub unassigned: usize,
    pub unassigned_fraction: f64,
    /// Fraction assigned to a reference value below the global one.
    pub trapped_fraction: f64,
}

pub const DEFAULT_TRAP_TOLERANCE: f64 = 2e-3;

/// Assigns each outcome to the nearest reference value within `tolerance`.
pub fn trap_statistics(outcomes: &[GrapeOutcome], reference_values: &[f64], tolerance: f64) -> Result<TrapSummary> {
    let finals: Vec<f64> = outcomes.iter().map(|o| o.final_j).collect();
    trap_statistics_of_values(&finals, reference_values, tolerance)
}

pub fn trap_statistics_of_values(finals: &[f64], reference_values: &[f64], tolerance: f64) -> Result<TrapSummary> {
    if finals.is_empty() {
        return Err(Error::invalid("trap statistics need at least one outcome"));
    }
    if reference_values.is_empty() {
        return Err(Error::invalid("trap statistics need at least one reference value"));
    }
    if reference_values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("reference values must be sorted ascending"));
    }
    let top = reference_values.len() - 1;
    let mut counts = vec![0usize; reference_values.len()];
    let mut unassigned = 0;
    for &f in finals {
        let nearest = reference_values
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - f).abs().total_cmp(&(b.1 - f).abs()))
            .map(|(i, _)| i)
            .expect("non-empty");
        if (reference_values[nearest] - f).abs() <= tolerance {
            counts[nearest] += 1;
        } else {
            unassigned += 1;
        }
    }
    let total = finals.len();
    let trapped: usize = counts[..top].iter().sum();
    Ok(TrapSummary {
        total,
        tolerance,
        histogram: reference_values
            .iter()
            .zip(&counts)
            .map(|(&value, &count)| LevelCount { value, count })
            .collect(),
        unassigned,
        unassigned_fraction: unassigned as f64 / total as f64,
        trapped_fraction: trapped as f64 / total as f64,
    })
}

/// Target given either by name (`identity`, `flip`) or as a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Named(String),
    Matrix(pairs::Pairs),
}

impl TargetSpec {
    pub fn resolve(&self, dim: usize) -> Result<TargetGate> {
        match self {
            TargetSpec::Named(name) => TargetGate::named(name, dim),
            TargetSpec::Matrix(m) => {
                let t = TargetGate::new(pairs::from_pairs(m)?)?;
                if t.dim() != dim {
                    return Err(Error::invalid(format!("target has dimension {} but the system has {dim}", t.dim())));
                }
                Ok(t)
            }
        }
    }
}

/// Problem file: a control system plus an optional target and experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Problem {
    #[serde(flatten)]
    pub system: ControlSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<GrapeConfig>,
}

impl Problem {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn target_gate(&self) -> Result<TargetGate> {
        self.target
            .as_ref()
            .ok_or_else(|| Error::invalid("problem has no `target`"))?
            .resolve(self.system.dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{fidelity_from_character, IrrepLabel, TorusPoint};
    use crate::matrix::{expm, unitary_algebra_basis, I};
    use crate::representations::SpinLabel;
    use crate::sampling::random_group_element;

    fn random_field(rng: &mut ChaCha8Rng, m: usize, p: usize, dt: f64) -> ControlField {
        let amps = (0..m).map(|_| (0..p).map(|_| rng.random_range(-1.5..1.5)).collect()).collect();
        ControlField::new(amps, dt, None).unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (&a + a.adjoint()) * c(0.5, 0.0)
    }

    #[test]
    fn free_evolution_examples() {
        let sys = ControlSystem::new(CMatrix::zeros(3, 3), vec![identity(3)]).unwrap();
        let u = propagate(&sys, &ControlField::zeros(1, 5, 0.3).unwrap(), false).unwrap();
        assert!((u.final_propagator - identity(3)).norm() < 1e-14);

        let half = ControlSystem::spin(SpinLabel::new(1), false);
        let field = ControlField::zeros(2, 8, std::f64::consts::TAU / 8.0).unwrap();
        let u = propagate(&half, &field, true).unwrap();
        assert!((u.final_propagator + identity(2)).norm() < 1e-12);
        assert_eq!(u.intermediate_propagators.unwrap().len(), 8);
    }

    #[test]
    fn substeps_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sys = ControlSystem::spin(SpinLabel::new(4), true);
        let field = random_field(&mut rng, 2, 6, 0.4);
        let fine_amps = field
            .amplitudes()
            .iter()
            .map(|row| row.iter().flat_map(|&a| std::iter::repeat_n(a, 100)).collect())
            .collect();
        let fine = ControlField::new(fine_amps, 0.004, None).unwrap();
        let a = propagate(&sys, &field, false).unwrap().final_propagator;
        let b = propagate(&sys, &fine, false).unwrap().final_propagator;
        assert!((a - b).norm() < 1e-9);
        // Direct exponentials as a third route.
        let mut c_u = identity(5);
        for p in 0..6 {
            c_u = expm(&(step_hamiltonian(&sys, &field, p) * c(0.0, -0.4))).unwrap() * c_u;
        }
        assert!((propagate(&sys, &field, false).unwrap().final_propagator - c_u).norm() < 1e-10);
    }

    #[test]
    fn long_fields_stay_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let sys = ControlSystem::spin(SpinLabel::new(7), false);
        let field = random_field(&mut rng, 2, 10_000, 0.05);
        assert!(propagate(&sys, &field, false).unwrap().final_propagator.is_unitary(1e-9));
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let sys = ControlSystem::spin(SpinLabel::new(2), false);
        assert!(propagate(&sys, &ControlField::zeros(3, 4, 0.1).unwrap(), false).is_err());
        assert!(ControlField::new(vec![vec![1.0], vec![]], 0.1, None).is_err());
        assert!(ControlField::new(vec![vec![1.0]], 0.0, None).is_err());
        assert!(ControlField::new(vec![vec![2.0]], 0.1, Some(1.0)).is_err());
    }

    #[test]
    fn divided_difference_limit() {
        let dt = 0.7;
        let a = 1.3;
        let exact = C64::from_polar(1.0, -dt * a) * c(0.0, -dt);
        assert!((divided_difference(a, a, dt) - exact).norm() < 1e-15);
        assert!((divided_difference(a + 1e-9, a, dt) - exact).norm() < 1e-8);
        let far = (C64::from_polar(1.0, -dt * 2.0) - C64::from_polar(1.0, -dt * 0.5)) / 1.5;
        assert!((divided_difference(2.0, 0.5, dt) - far).norm() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut worst: f64 = 0.0;
        for trial in 0..30 {
            let n = 2 + trial % 7;
            let m = 1 + trial % 3;
            let sys = ControlSystem::new(
                random_hermitian(&mut rng, n),
                (0..m).map(|_| random_hermitian(&mut rng, n)).collect(),
            )
            .unwrap();
            let field = random_field(&mut rng, m, 5, 0.3);
            let w = TargetGate::new(random_group_element(&unitary_algebra_basis(n, false), 2.0, &mut rng)).unwrap();
            let (_, g) = fidelity_and_gradient(&sys, &field, &w).unwrap();
            let h = 1e-6;
            for k in 0..m {
                for p in 0..5 {
                    let mut plus = field.amplitudes().to_vec();
                    plus[k][p] += h;
                    let mut minus = field.amplitudes().to_vec();
                    minus[k][p] -= h;
                    let f = |a: Vec<Vec<f64>>| {
                        let fl = ControlField::new(a, 0.3, None).unwrap();
                        fidelity_and_gradient(&sys, &fl, &w).unwrap().0
                    };
                    let fd = (f(plus) - f(minus)) / (2.0 * h);
                    let err = (fd - g[k][p]).abs() / g[k][p].abs().max(1e-3);
                    worst = worst.max(err);
                }
            }
        }
        assert!(worst < 1e-6, "worst relative error {worst}");
    }

    #[test]
    fn gradient_ignores_global_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sys = ControlSystem::spin(SpinLabel::new(3), true);
        let field = random_field(&mut rng, 2, 7, 0.2);
        let w = TargetGate::new(random_group_element(&unitary_algebra_basis(4, false), 1.0, &mut rng)).unwrap();
        let w2 = TargetGate::new(w.matrix() * C64::from_polar(1.0, 0.77)).unwrap();
        let (j1, g1) = fidelity_and_gradient(&sys, &field, &w).unwrap();
        let (j2, g2) = fidelity_and_gradient(&sys, &field, &w2).unwrap();
        assert!((j1 - j2).abs() < 1e-14);
        for (a, b) in g1.iter().flatten().zip(g2.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_vanishes_at_reached_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let sys = ControlSystem::spin(SpinLabel::new(5), false);
        let field = random_field(&mut rng, 2, 9, 0.3);
        let w = TargetGate::new(propagate(&sys, &field, false).unwrap().final_propagator).unwrap();
        let (j, g) = fidelity_and_gradient(&sys, &field, &w).unwrap();
        assert!((j - 1.0).abs() < 1e-12);
        assert!(norm(&g.into_iter().flatten().collect::<Vec<_>>()) < 1e-8);
    }

    #[test]
    fn spin_dynamics_stay_in_the_symmetry_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let label = SpinLabel::new(6);
        let sys = ControlSystem::spin(label, false);
        let half = ControlSystem::spin(SpinLabel::new(1), false);
        let field = random_field(&mut rng, 2, 40, 0.25);
        let big = propagate(&sys, &field, true).unwrap().intermediate_propagators.unwrap();
        let small = propagate(&half, &field, true).unwrap().intermediate_propagators.unwrap();
        for (u, g) in big.iter().zip(&small) {
            let beta = (g.trace().re / 2.0).clamp(-1.0, 1.0).acos();
            let predicted = fidelity_from_character(&IrrepLabel::Su2(label), &TorusPoint::su2(beta)).unwrap();
            assert!((u.trace().norm() / 7.0 - predicted).abs() < 1e-8);
        }
    }

    #[test]
    fn spin_half_grape_is_trap_free() {
        let sys = ControlSystem::spin(SpinLabel::new(1), false);
        let w = TargetGate::new(CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), I, I, c(0.0, 0.0)])).unwrap();
        let config = GrapeConfig {
            starts: 50,
            steps: 16,
            seed: 9,
            ..GrapeConfig::default()
        };
        let out = run_grape(&sys, &w, &config).unwrap();
        assert_eq!(out.len(), 50);
        for o in &out {
            assert!(o.final_j > 1.0 - 1e-6, "{}", o.final_j);
            assert!(o.trajectory_summary.windows(2).all(|p| p[1] >= p[0]));
        }
    }

    #[test]
    fn grape_is_deterministic() {
        let sys = ControlSystem::spin(SpinLabel::new(2), false);
        let w = TargetGate::named("identity", 3).unwrap();
        let config = GrapeConfig {
            starts: 4,
            steps: 8,
            max_iter: 50,
            seed: 5,
            ..GrapeConfig::default()
        };
        let a = serde_json::to_string(&run_grape(&sys, &w, &config).unwrap()).unwrap();
        let b = serde_json::to_string(&run_grape(&sys, &w, &config).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn enforced_bounds_hold() {
        let sys = ControlSystem::spin(SpinLabel::new(2), true);
        let w = TargetGate::named("flip", 3).unwrap();
        let config = GrapeConfig {
            starts: 3,
            steps: 12,
            bounds: [-0.3, 0.3],
            enforce_bounds: true,
            max_iter: 200,
            seed: 1,
            ..GrapeConfig::default()
        };
        for o in run_grape(&sys, &w, &config).unwrap() {
            let f = o.field.unwrap();
            assert!(f.amplitudes().iter().flatten().all(|a| a.abs() <= 0.3));
        }
    }

    #[test]
    fn trap_statistics_examples() {
        let s = trap_statistics_of_values(&[1.0, 1.0], &[1.0], 2e-3).unwrap();
        assert_eq!(s.trapped_fraction, 0.0);
        let s = trap_statistics_of_values(&[1.0, 0.43, 0.43], &[0.43, 1.0], 2e-3).unwrap();
        assert!((s.trapped_fraction - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.histogram[0].count, 2);
        let s = trap_statistics_of_values(&[0.5, 1.0], &[0.43, 1.0], 2e-3).unwrap();
        assert_eq!(s.unassigned, 1);
        assert!(trap_statistics_of_values(&[], &[1.0], 2e-3).is_err());
        assert!(trap_statistics_of_values(&[1.0], &[1.0, 0.5], 2e-3).is_err());
    }

    #[test]
    fn duration_resolution() {
        let sys = ControlSystem::spin(SpinLabel::new(6), false);
        let cfg = GrapeConfig {
            steps: 10,
            ..GrapeConfig::default()
        };
        let dt = cfg.resolve_dt(&sys).unwrap();
        assert!((dt * 10.0 - 10.0 * std::f64::consts::PI * 7.0 / 3.0).abs() < 1e-9);
        let bad = GrapeConfig {
            dt: Some(0.1),
            t_f: Some(5.0),
            ..cfg.clone()
        };
        assert!(bad.resolve_dt(&sys).is_err());
        let ok = GrapeConfig { t_f: Some(5.0), ..cfg };
        assert!((ok.resolve_dt(&sys).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn problem_json() {
        let sys = ControlSystem::spin(SpinLabel::new(1), false);
        let problem = Problem {
            system: sys,
            target: Some(TargetSpec::Named("identity".into())),
            experiment: Some(GrapeConfig::default()),
        };
        let s = serde_json::to_string(&problem).unwrap();
        let back = Problem::from_json(&s).unwrap();
        assert_eq!(back.target_gate().unwrap().dim(), 2);
        assert_eq!(back.experiment, Some(GrapeConfig::default()));
        let minimal = r#"{"dim":2,"h0":[[[0.5,0],[0,0]],[[0,0],[-0.5,0]]],"controls":[[[[0,0],[0.5,0]],[[0.5,0],[0,0]]]],
            "target":[[[0,0],[1,0]],[[1,0],[0,0]]],"experiment":{"starts":3,"steps":8,"t_f":4.0}}"#;
        let p = Problem::from_json(minimal).unwrap();
        assert_eq!(p.experiment.as_ref().unwrap().starts, 3);
        assert!(p.target_gate().is_ok());
        assert!(Problem::from_json(r#"{"dim":3,"h0":[[[1,0]]],"controls":[[[[1,0]]]]}"#).is_err());
    }
}
