//! Critical points of character landscapes: location, classification,
//! counting of suboptima, global basins and ruggedness comparisons.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::characters::{
    su2_character_derivatives, su3_weyl_orbit, wrap_angle, IrrepLabel, LandscapeGrid, Su3Character, TorusPoint,
};
use crate::error::{Error, Result};
use crate::representations::SpinLabel;

/// Values closer than this to the global value count as global.
pub const GLOBAL_VALUE_TOL: f64 = 1e-9;

/// Minimum SU(2) scan resolution.
pub const SU2_SCAN_POINTS: usize = 4096;

const RING_RADII: [f64; 4] = [1e-3, 3e-3, 1e-2, 3e-2];
const RING_DIRECTIONS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    LocalMax,
    LocalMin,
    Saddle,
}

impl CriticalKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CriticalKind::LocalMax => "local_max",
            CriticalKind::LocalMin => "local_min",
            CriticalKind::Saddle => "saddle",
        }
    }
}

/// A refined critical point of `J` on the torus.
///
/// `hessian_eigenvalues` is empty at zeros of the character, where the modulus
/// has a kink. `degenerate` points were classified by sampling a ring around
/// them rather than by Hessian signs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: TorusPoint,
    pub value: f64,
    pub kind: CriticalKind,
    pub hessian_eigenvalues: Vec<f64>,
    pub is_global: bool,
    #[serde(default)]
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GlobalBasin {
    /// `β ∈ [lo, hi]` flows to the global maximum.
    Interval { lo: f64, hi: f64 },
    /// Fraction of uniformly drawn starts that reach the global maximum.
    VolumeFraction { fraction: f64, starts: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub label: IrrepLabel,
    pub points: Vec<CriticalPoint>,
    pub suboptima_count: usize,
    pub global_basin: Option<GlobalBasin>,
    pub notes: Vec<String>,
}

impl CriticalReport {
    fn finish(label: IrrepLabel, mut points: Vec<CriticalPoint>, global_basin: Option<GlobalBasin>, notes: Vec<String>) -> Self {
        let top = points.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
        let mut flagged = false;
        for p in &mut points {
            p.is_global = false;
            if !flagged && p.kind == CriticalKind::LocalMax && p.value >= top - GLOBAL_VALUE_TOL {
                p.is_global = true;
                flagged = true;
            }
        }
        let suboptima_count = points
            .iter()
            .filter(|p| p.kind == CriticalKind::LocalMax && p.value < top - GLOBAL_VALUE_TOL)
            .count();
        Self {
            label,
            points,
            suboptima_count,
            global_basin,
            notes,
        }
    }

    pub fn count(&self, kind: CriticalKind) -> usize {
        self.points.iter().filter(|p| p.kind == kind).count()
    }

    pub fn local_maxima(&self) -> usize {
        self.count(CriticalKind::LocalMax)
    }

    pub fn global(&self) -> Option<&CriticalPoint> {
        self.points.iter().find(|p| p.is_global)
    }

    /// Distinct critical values, ascending.
    pub fn critical_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.points.iter().map(|p| p.value).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        v
    }

    /// Values of local maxima, descending.
    pub fn maximum_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .points
            .iter()
            .filter(|p| p.kind == CriticalKind::LocalMax)
            .map(|p| p.value)
            .collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "label: {}  (dimension {})", self.label, self.label.dim());
        let _ = writeln!(
            s,
            "local maxima: {}  suboptima: {}  minima: {}  saddles: {}",
            self.local_maxima(),
            self.suboptima_count,
            self.count(CriticalKind::LocalMin),
            self.count(CriticalKind::Saddle)
        );
        match &self.global_basin {
            Some(GlobalBasin::Interval { lo, hi }) => {
                let _ = writeln!(s, "global basin: beta in [{lo:.10}, {hi:.10}]");
            }
            Some(GlobalBasin::VolumeFraction { fraction, starts }) => {
                let _ = writeln!(s, "global basin: {fraction:.4} of {starts} starts");
            }
            None => {}
        }
        let _ = writeln!(s, "{:<28} {:>14} {:<10} {:<6} hessian", "location", "J", "kind", "global");
        for p in &self.points {
            let loc = p.location.angles().iter().map(|a| format!("{a:.8}")).collect::<Vec<_>>().join(", ");
            let hess = if p.hessian_eigenvalues.is_empty() {
                "kink".to_string()
            } else {
                p.hessian_eigenvalues.iter().map(|e| format!("{e:.4e}")).collect::<Vec<_>>().join(" ")
            };
            let kind = if p.degenerate {
                format!("{}*", p.kind.as_str())
            } else {
                p.kind.as_str().to_string()
            };
            let _ = writeln!(
                s,
                "{:<28} {:>14.10} {:<10} {:<6} {}",
                format!("({loc})"),
                p.value,
                kind,
                if p.is_global { "yes" } else { "" },
                hess
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

/// Critical points of `J(β) = |χ_j(β)|/(2j+1)` on `[0, π/2]`.
///
/// Zeros of the character are found by bisection on `χ` and reported as
/// minima directly. Smooth critical points come from sign changes of `χ'`
/// followed by bisection to `refine_tol` and a safeguarded Newton polish.
pub fn critical_points_su2(j: SpinLabel, refine_tol: f64) -> Result<CriticalReport> {
    if !(refine_tol > 0.0 && refine_tol <= 1e-4) {
        return Err(Error::invalid(format!("refine_tol {refine_tol} must lie in (0, 1e-4]")));
    }
    let label = IrrepLabel::Su2(j);
    let n = j.dim() as f64;
    let chi = |b: f64| su2_character_derivatives(j, b);

    if j.two_j == 0 {
        let origin = CriticalPoint {
            location: TorusPoint::su2(0.0),
            value: 1.0,
            kind: CriticalKind::LocalMax,
            hessian_eigenvalues: vec![0.0],
            is_global: true,
            degenerate: true,
        };
        return Ok(CriticalReport::finish(
            label,
            vec![origin],
            Some(GlobalBasin::Interval { lo: 0.0, hi: FRAC_PI_2 }),
            vec!["trivial representation: constant landscape".into()],
        ));
    }

    let m = SU2_SCAN_POINTS.max(256 * j.dim());
    let h = FRAC_PI_2 / (m - 1) as f64;
    let grid: Vec<f64> = (0..m).map(|i| if i + 1 == m { FRAC_PI_2 } else { i as f64 * h }).collect();
    let samples: Vec<(f64, f64, f64)> = grid.iter().map(|&b| chi(b)).collect();

    let mut points = Vec::new();
    let smooth_point = |b: f64| -> CriticalPoint {
        let (c, _, c2) = chi(b);
        let second = c.signum() * c2 / n;
        CriticalPoint {
            location: TorusPoint::su2(b),
            value: c.abs() / n,
            kind: if second < 0.0 { CriticalKind::LocalMax } else { CriticalKind::LocalMin },
            hessian_eigenvalues: vec![second],
            is_global: false,
            degenerate: false,
        }
    };
    let zero_point = |b: f64| CriticalPoint {
        location: TorusPoint::su2(b),
        value: chi(b).0.abs() / n,
        kind: CriticalKind::LocalMin,
        hessian_eigenvalues: Vec::new(),
        is_global: false,
        degenerate: false,
    };

    // β = 0 is stationary by evenness; it is the identity class.
    points.push(smooth_point(0.0));

    // β = π/2 is stationary by the reflection β → π − β.
    let end_zero = samples[m - 1].0.abs() < 1e-9 * n;
    points.push(if end_zero { zero_point(FRAC_PI_2) } else { smooth_point(FRAC_PI_2) });

    let mut zeros = Vec::new();
    for i in 0..m - 1 {
        if end_zero && i + 1 == m - 1 {
            break;
        }
        let (a, b) = (samples[i].0, samples[i + 1].0);
        if i > 0 && a == 0.0 {
            zeros.push(grid[i]);
            points.push(zero_point(grid[i]));
        } else if a * b < 0.0 {
            let z = bisect(|x| chi(x).0, grid[i], grid[i + 1], 0.0);
            zeros.push(z);
            points.push(zero_point(z));
        }
    }

    for i in 1..m - 2 {
        let (a, b) = (samples[i].1, samples[i + 1].1);
        if a * b < 0.0 || (b == 0.0 && a != 0.0) {
            let beta = refine_root(|x| (chi(x).1, chi(x).2), grid[i], grid[i + 1], refine_tol)?;
            let (c, d1, _) = chi(beta);
            if c.abs() < 1e-9 * n {
                continue;
            }
            if (d1 / n).abs() >= 1e-8 {
                return Err(Error::Refinement { lo: grid[i], hi: grid[i + 1] });
            }
            points.push(smooth_point(beta));
        }
    }

    points.sort_by(|a, b| a.location.angles()[0].total_cmp(&b.location.angles()[0]));
    let hi = zeros.first().copied().unwrap_or(FRAC_PI_2).min(if end_zero { FRAC_PI_2 } else { f64::INFINITY });
    let notes = vec![
        format!("scan of {m} points on [0, pi/2]"),
        "zeros of the character are kinks of J and are reported as minima".into(),
    ];
    Ok(CriticalReport::finish(label, points, Some(GlobalBasin::Interval { lo: 0.0, hi }), notes))
}

/// Bisection of a sign change of `f` on `[lo, hi]` down to `tol` (0 means
/// machine resolution).
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root of `g` bracketed by `[lo, hi]`: bisection to `tol`, then Newton with
/// `(g, g')` kept inside the bracket.
fn refine_root(gd: impl Fn(f64) -> (f64, f64), lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let g = |x: f64| gd(x).0;
    let mut x = bisect(g, lo, hi, tol);
    for _ in 0..60 {
        let (v, d) = gd(x);
        if v == 0.0 || d == 0.0 {
            break;
        }
        let next = x - v / d;
        if !(next > lo - tol && next < hi + tol) || !next.is_finite() {
            break;
        }
        let done = (next - x).abs() <= 1e-15 * x.abs().max(1.0);
        x = next;
        if done {
            break;
        }
    }
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Refinement { lo, hi })
    }
}

/// `[0, π/(2j+1)]`: the first zero of `J` bounds the basin of the global
/// maximum on the fundamental domain.
pub fn global_basin_su2(j: SpinLabel) -> Result<(f64, f64)> {
    match critical_points_su2(j, 1e-6)?.global_basin {
        Some(GlobalBasin::Interval { lo, hi }) => Ok((lo, hi)),
        _ => Ok((0.0, FRAC_PI_2)),
    }
}

/// Outcome of a local ascent on a character landscape.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalAscent {
    pub angles: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Monotone gradient ascent (Barzilai–Borwein step with Armijo
/// backtracking). `eval` returns the value and gradient.
pub fn ascend(eval: impl Fn(&[f64]) -> (f64, Vec<f64>), x0: &[f64], grad_tol: f64, max_iter: usize) -> LocalAscent {
    const MAX_STEP: f64 = 0.05;
    let mut x = x0.to_vec();
    let (mut v, mut g) = eval(&x);
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let norm = |g: &[f64]| g.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut it = 0;
    let (mut mark_v, mut mark_g, mut mark_it) = (v, norm(&g), 0);
    while it < max_iter {
        let gn = norm(&g);
        if gn < grad_tol || !gn.is_finite() {
            break;
        }
        if gn < 0.5 * mark_g || v > mark_v + 1e-15 {
            (mark_v, mark_g, mark_it) = (v, gn, it);
        } else if it - mark_it >= crate::dynamics::STALL_WINDOW {
            break;
        }
        let mut eta = match &prev {
            Some((px, pg)) => {
                let s: Vec<f64> = x.iter().zip(px).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = g.iter().zip(pg).map(|(a, b)| a - b).collect();
                let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
                let ss: f64 = s.iter().map(|a| a * a).sum();
                if sy.abs() > 0.0 {
                    (ss / sy).abs()
                } else {
                    MAX_STEP / gn
                }
            }
            None => MAX_STEP / gn,
        };
        eta = eta.min(MAX_STEP / gn);
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + eta * b).collect();
            let (tv, tg) = eval(&trial);
            // Near a maximum J stops resolving the step; a shrinking
            // gradient still certifies progress.
            if tv >= v + 1e-4 * eta * gn * gn || (tv >= v && norm(&tg) < gn) {
                accepted = Some((trial, tv, tg));
                break;
            }
            eta *= 0.5;
        }
        let Some((nx, nv, ng)) = accepted else { break };
        prev = Some((std::mem::replace(&mut x, nx), std::mem::replace(&mut g, ng)));
        v = nv;
        it += 1;
    }
    LocalAscent {
        angles: x,
        value: v,
        iterations: it,
    }
}

/// `J` and `dJ/dβ` for SU(2). At an exact zero the one-sided slope is used.
pub fn su2_value_gradient(j: SpinLabel, beta: f64) -> (f64, f64) {
    let n = j.dim() as f64;
    let (c, d, _) = su2_character_derivatives(j, beta);
    let s = if c == 0.0 { d.signum() } else { c.signum() };
    (c.abs() / n, s * d / n)
}

/// Value, gradient of `J` and Hessian of `|χ|²` for SU(3).
struct Su3Local {
    modulus: f64,
    grad_f: [f64; 2],
    hess_f: [[f64; 2]; 2],
}

fn su3_local(chi: &Su3Character, t1: f64, t2: f64) -> Su3Local {
    let jet = chi.jet(t1, t2);
    let x = jet.value;
    let g = jet.grad;
    let h = jet.hess;
    let grad_f = [2.0 * (x.conj() * g[0]).re, 2.0 * (x.conj() * g[1]).re];
    let mut hess_f = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            hess_f[a][b] = 2.0 * ((g[a].conj() * g[b]).re + (x.conj() * h[a][b]).re);
        }
    }
    Su3Local {
        modulus: x.norm(),
        grad_f,
        hess_f,
    }
}

/// `J` and its gradient on the SU(3) torus.
pub fn su3_value_gradient(chi: &Su3Character, t1: f64, t2: f64) -> (f64, [f64; 2]) {
    let n = chi.dim() as f64;
    let l = su3_local(chi, t1, t2);
    if l.modulus == 0.0 {
        return (0.0, [0.0, 0.0]);
    }
    let s = 1.0 / (2.0 * l.modulus * n);
    (l.modulus / n, [l.grad_f[0] * s, l.grad_f[1] * s])
}

/// Eigenvalues (ascending) and unit eigenvectors of a symmetric 2×2 matrix.
fn sym_eigen2(m: [[f64; 2]; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let (l1, l2) = (mean - r, mean + r);
    // Rows of M − λI are orthogonal to the eigenvector; take the longer one.
    let cand = [[b, l2 - a], [l2 - d, b]];
    let best = if cand[0][0].hypot(cand[0][1]) >= cand[1][0].hypot(cand[1][1]) { cand[0] } else { cand[1] };
    let nrm = best[0].hypot(best[1]);
    let v2 = if nrm > 1e-300 { [best[0] / nrm, best[1] / nrm] } else { [0.0, 1.0] };
    ([l1, l2], [[-v2[1], v2[0]], v2])
}

fn torus_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = |x: f64, y: f64| (x - y + PI).rem_euclid(TAU) - PI;
    d(a[0], b[0]).hypot(d(a[1], b[1]))
}

/// The 18 images of a point under eigenvalue permutations and center
/// translations `θ_k → θ_k + 2πc/3`, all of which preserve `J`.
pub fn su3_symmetry_orbit(t1: f64, t2: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(18);
    for c in 0..3 {
        let s = TAU * c as f64 / 3.0;
        out.extend(su3_weyl_orbit(t1 + s, t2 + s));
    }
    out
}

fn canonical(p: [f64; 2]) -> [f64; 2] {
    let snap = |a: f64| if a < 1e-13 || TAU - a < 1e-13 { 0.0 } else { a };
    su3_symmetry_orbit(p[0], p[1])
        .into_iter()
        .map(|[a, b]| [snap(a), snap(b)])
        .min_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])))
        .unwrap_or(p)
}

enum Refined {
    Critical([f64; 2]),
    Zero([f64; 2]),
    Failed,
}

/// Newton iteration on `|χ|²` with near-singular Hessian directions dropped.
fn newton_refine(chi: &Su3Character, start: [f64; 2], max_step: f64) -> Refined {
    let n = chi.dim() as f64;
    let mut p = start;
    for _ in 0..200 {
        let l = su3_local(chi, p[0], p[1]);
        if l.modulus / n < 1e-12 {
            break;
        }
        let (vals, vecs) = sym_eigen2(l.hess_f);
        let scale = vals[0].abs().max(vals[1].abs());
        let mut step = [0.0; 2];
        for k in 0..2 {
            if vals[k].abs() > 1e-10 * scale && vals[k].abs() > 1e-300 {
                let c = (vecs[k][0] * l.grad_f[0] + vecs[k][1] * l.grad_f[1]) / vals[k];
                step[0] -= c * vecs[k][0];
                step[1] -= c * vecs[k][1];
            }
        }
        let len = step[0].hypot(step[1]);
        if !len.is_finite() {
            return Refined::Failed;
        }
        if len > max_step {
            step = [step[0] * max_step / len, step[1] * max_step / len];
        }
        p = [p[0] + step[0], p[1] + step[1]];
        if len < 1e-15 {
            break;
        }
    }
    let p = [wrap_angle(p[0]), wrap_angle(p[1])];
    let l = su3_local(chi, p[0], p[1]);
    if l.modulus / n < 1e-8 {
        return Refined::Zero(p);
    }
    let grad_j = l.grad_f[0].hypot(l.grad_f[1]) / (2.0 * l.modulus * n);
    if grad_j < 1e-8 {
        Refined::Critical(p)
    } else {
        Refined::Failed
    }
}

/// Classification by sampling `J` on small rings around `p`. The best and
/// worst sampled directions on each ring are refined by golden-section
/// search, since ascent directions of degenerate saddles can be narrow cusps.
fn ring_classify(value_at: impl Fn(f64, f64) -> f64, p: [f64; 2]) -> CriticalKind {
    let centre = value_at(p[0], p[1]);
    let (mut up, mut down) = (false, false);
    for r in RING_RADII {
        let on_ring = |a: f64| value_at(p[0] + r * a.cos(), p[1] + r * a.sin()) - centre;
        let da = TAU / RING_DIRECTIONS as f64;
        let samples: Vec<f64> = (0..RING_DIRECTIONS).map(|k| on_ring(k as f64 * da)).collect();
        let arg = |better: fn(f64, f64) -> bool| {
            (0..RING_DIRECTIONS).fold(0, |best, k| if better(samples[k], samples[best]) { k } else { best })
        };
        let hi = golden_max(on_ring, arg(|x, y| x > y) as f64 * da, da);
        let lo = -golden_max(|a| -on_ring(a), arg(|x, y| x < y) as f64 * da, da);
        up |= hi > 0.0;
        down |= lo < 0.0;
    }
    match (up, down) {
        (false, true) => CriticalKind::LocalMax,
        (true, false) => CriticalKind::LocalMin,
        _ => CriticalKind::Saddle,
    }
}

/// Maximum of `f` on `[centre − width, centre + width]` by golden section,
/// never below `f(centre)`.
fn golden_max(f: impl Fn(f64) -> f64, centre: f64, width: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (centre - width, centre + width);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    f(centre).max(fc).max(fd)
}

/// Critical points of an SU(3) landscape on the torus, one representative per
/// symmetry orbit.
///
/// Candidates are grid cells where both components of `∇|χ|²` change sign,
/// plus discrete local extrema of `J`. Each is refined by Newton on `|χ|²`.
/// Zeros of `χ` are reported as minima of value 0.
pub fn critical_points_torus(label: &IrrepLabel, resolution: usize, refine_tol: f64) -> Result<CriticalReport> {
    let IrrepLabel::Su3 { r1, r2 } = *label else {
        return Err(Error::invalid("torus critical points need an SU(3) label"));
    };
    if resolution < 128 {
        return Err(Error::invalid(format!("torus resolution {resolution} is below the minimum of 128")));
    }
    if !(refine_tol > 0.0 && refine_tol <= 1e-2) {
        return Err(Error::invalid(format!("refine_tol {refine_tol} must lie in (0, 1e-2]")));
    }
    let chi = Su3Character::new(r1, r2)?;
    let n = chi.dim() as f64;
    let res = resolution;
    let h = TAU / res as f64;
    let idx = |i: usize, k: usize| (i % res) * res + (k % res);

    let mut grads = Vec::with_capacity(res * res);
    let mut vals = Vec::with_capacity(res * res);
    for i in 0..res {
        for k in 0..res {
            let l = su3_local(&chi, i as f64 * h, k as f64 * h);
            grads.push(l.grad_f);
            vals.push(l.modulus / n);
        }
    }

    let mut starts: Vec<[f64; 2]> = Vec::new();
    for i in 0..res {
        for k in 0..res {
            let corners = [idx(i, k), idx(i + 1, k), idx(i, k + 1), idx(i + 1, k + 1)];
            let changes = |c: usize| {
                let lo = corners.iter().map(|&q| grads[q][c]).fold(f64::INFINITY, f64::min);
                let hi = corners.iter().map(|&q| grads[q][c]).fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            };
            if changes(0) && changes(1) {
                starts.push([(i as f64 + 0.5) * h, (k as f64 + 0.5) * h]);
            }
            let v = vals[idx(i, k)];
            let mut is_max = true;
            let mut is_min = true;
            for di in [res - 1, 0, 1] {
                for dk in [res - 1, 0, 1] {
                    if di == 0 && dk == 0 {
                        continue;
                    }
                    let w = vals[idx(i + di, k + dk)];
                    is_max &= v >= w;
                    is_min &= v < w;
                }
            }
            if is_max || is_min {
                starts.push([i as f64 * h, k as f64 * h]);
            }
        }
    }

    let radius = (10.0 * refine_tol).max(1e-3);
    let value_at = |a: f64, b: f64| chi.value(a, b).norm() / n;
    let mut reps: Vec<CriticalPoint> = Vec::new();
    let mut dropped = 0usize;
    let mut degenerate = 0usize;
    for s in &starts {
        let (p, zero) = match newton_refine(&chi, *s, 4.0 * h) {
            Refined::Critical(p) => (p, false),
            Refined::Zero(p) => (p, true),
            Refined::Failed => {
                dropped += 1;
                continue;
            }
        };
        let seen = reps.iter().any(|r| {
            let a = r.location.angles();
            su3_symmetry_orbit(a[0], a[1]).into_iter().any(|q| torus_distance(q, p) < radius)
        });
        if seen {
            continue;
        }
        let c = canonical(p);
        let point = if zero {
            CriticalPoint {
                location: TorusPoint::su3(c[0], c[1]),
                value: value_at(c[0], c[1]),
                kind: CriticalKind::LocalMin,
                hessian_eigenvalues: Vec::new(),
                is_global: false,
                degenerate: false,
            }
        } else {
            let l = su3_local(&chi, c[0], c[1]);
            let scale = 1.0 / (2.0 * l.modulus * n);
            let hj = [
                [l.hess_f[0][0] * scale, l.hess_f[0][1] * scale],
                [l.hess_f[1][0] * scale, l.hess_f[1][1] * scale],
            ];
            let (eig, _) = sym_eigen2(hj);
            let big = eig[0].abs().max(eig[1].abs());
            let is_degenerate = eig[0].abs().min(eig[1].abs()) <= 1e-6 * big.max(1e-12);
            let kind = if is_degenerate {
                degenerate += 1;
                ring_classify(value_at, c)
            } else if eig[1] < 0.0 {
                CriticalKind::LocalMax
            } else if eig[0] > 0.0 {
                CriticalKind::LocalMin
            } else {
                CriticalKind::Saddle
            };
            CriticalPoint {
                location: TorusPoint::su3(c[0], c[1]),
                value: value_at(c[0], c[1]),
                kind,
                hessian_eigenvalues: eig.to_vec(),
                is_global: false,
                degenerate: is_degenerate,
            }
        };
        reps.push(point);
    }

    reps.sort_by(|a, b| {
        b.value
            .total_cmp(&a.value)
            .then(a.location.angles()[0].total_cmp(&b.location.angles()[0]))
            .then(a.location.angles()[1].total_cmp(&b.location.angles()[1]))
    });
    let notes = vec![
        format!("grid {res}x{res}, {} refinement candidates", starts.len()),
        format!("{dropped} candidates dropped after Newton failed to converge"),
        format!("{degenerate} degenerate points classified by ring sampling"),
        "points identified under eigenvalue permutations and center translations".into(),
    ];
    Ok(CriticalReport::finish(*label, reps, None, notes))
}

/// Either report kind, dispatched on the label.
pub fn critical_points(label: &IrrepLabel, resolution: usize, refine_tol: f64) -> Result<CriticalReport> {
    match *label {
        IrrepLabel::Su2(j) => critical_points_su2(j, refine_tol),
        IrrepLabel::Su3 { .. } => critical_points_torus(label, resolution, refine_tol),
    }
}

/// Local ascent on `J` from `start` for either group.
pub fn ascend_landscape(label: &IrrepLabel, start: &[f64]) -> Result<LocalAscent> {
    const GRAD_TOL: f64 = 1e-10;
    const MAX_ITER: usize = 20_000;
    match *label {
        IrrepLabel::Su2(j) => {
            let eval = |x: &[f64]| {
                let (v, g) = su2_value_gradient(j, x[0]);
                (v, vec![g])
            };
            Ok(ascend(eval, start, GRAD_TOL, MAX_ITER))
        }
        IrrepLabel::Su3 { r1, r2 } => {
            let chi = Su3Character::new(r1, r2)?;
            let eval = |x: &[f64]| {
                let (v, g) = su3_value_gradient(&chi, x[0], x[1]);
                (v, g.to_vec())
            };
            Ok(ascend(eval, start, GRAD_TOL, MAX_ITER))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuggednessConfig {
    pub starts: usize,
    pub seed: u64,
    pub resolution: usize,
    pub refine_tol: f64,
}

impl Default for RuggednessConfig {
    fn default() -> Self {
        Self {
            starts: 1000,
            seed: 0,
            resolution: 256,
            refine_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuggednessEntry {
    pub label: IrrepLabel,
    pub local_maxima: usize,
    pub suboptima: usize,
    pub basin_fraction: f64,
    /// Smallest Hessian eigenvalue magnitude of `J` at the global maximum.
    pub sharpness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuggednessSummary {
    pub dimension: usize,
    pub config: RuggednessConfig,
    pub entries: Vec<RuggednessEntry>,
    /// Labels sorted by local-maxima count, most rugged first.
    pub ordering: Vec<IrrepLabel>,
    /// True when counts strictly decrease in the given order.
    pub strictly_decreasing: bool,
}

/// Compares landscapes of same-dimensional irreps by trap count, global basin
/// fraction from uniform random starts, and global peak sharpness.
pub fn ruggedness_compare(labels: &[IrrepLabel], config: &RuggednessConfig) -> Result<RuggednessSummary> {
    let Some(first) = labels.first() else {
        return Err(Error::invalid("ruggedness comparison needs at least one label"));
    };
    let dimension = first.dim();
    if let Some(bad) = labels.iter().find(|l| l.dim() != dimension) {
        return Err(Error::invalid(format!(
            "{bad} has dimension {} but {first} has dimension {dimension}",
            bad.dim()
        )));
    }
    if config.starts == 0 {
        return Err(Error::invalid("ruggedness comparison needs at least one start"));
    }
    let mut entries = Vec::new();
    for (li, label) in labels.iter().enumerate() {
        let report = critical_points(label, config.resolution, config.refine_tol)?;
        let sharpness = report
            .global()
            .map(|g| g.hessian_eigenvalues.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min))
            .unwrap_or(f64::NAN);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(li as u64));
        let mut hits = 0;
        for _ in 0..config.starts {
            let start: Vec<f64> = match label {
                IrrepLabel::Su2(_) => vec![rng.random_range(0.0..FRAC_PI_2)],
                IrrepLabel::Su3 { .. } => vec![rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)],
            };
            if ascend_landscape(label, &start)?.value > 1.0 - 1e-6 {
                hits += 1;
            }
        }
        entries.push(RuggednessEntry {
            label: *label,
            local_maxima: report.local_maxima(),
            suboptima: report.suboptima_count,
            basin_fraction: hits as f64 / config.starts as f64,
            sharpness,
        });
    }
    let strictly_decreasing = entries.windows(2).all(|w| w[0].local_maxima > w[1].local_maxima);
    let mut sorted = entries.clone();
    sorted.sort_by_key(|e| std::cmp::Reverse(e.local_maxima));
    Ok(RuggednessSummary {
        dimension,
        config: *config,
        ordering: sorted.into_iter().map(|e| e.label).collect(),
        entries,
        strictly_decreasing,
    })
}

/// Critical structure read off a sampled 2-D landscape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCriticalSummary {
    /// Grid points within about one cell of the critical set.
    pub flagged_points: usize,
    /// Connected components of flagged points (8-neighborhood, periodic).
    pub components: usize,
    /// Distinct critical levels, ascending, clustered at `value_tol`.
    pub distinct_values: Vec<f64>,
}

/// Flags grid points whose finite-difference gradient is below what one
/// cell of curvature can produce, or whose value is within one cell of slope
/// from zero, then counts components and levels.
pub fn grid_critical_summary(grid: &LandscapeGrid, value_tol: f64) -> Result<GridCriticalSummary> {
    let [ax, ay] = grid.axes.as_slice() else {
        return Err(Error::invalid("grid critical summary needs a two-dimensional grid"));
    };
    let (nx, ny) = (ax.points, ay.points);
    if nx < 3 || ny < 3 {
        return Err(Error::invalid("grid is too small"));
    }
    let v = |i: usize, k: usize| grid.values[(i % nx) * ny + (k % ny)];
    let mut grad = vec![0.0; nx * ny];
    let mut g_max: f64 = 0.0;
    let mut h_max: f64 = 0.0;
    for i in 0..nx {
        for k in 0..ny {
            let (ip, im, kp, km) = (i + 1, i + nx - 1, k + 1, k + ny - 1);
            let gx = (v(ip, k) - v(im, k)) / (2.0 * ax.step);
            let gy = (v(i, kp) - v(i, km)) / (2.0 * ay.step);
            let g = gx.hypot(gy);
            grad[i * ny + k] = g;
            g_max = g_max.max(g);
            let hxx = (v(ip, k) - 2.0 * v(i, k) + v(im, k)) / (ax.step * ax.step);
            let hyy = (v(i, kp) - 2.0 * v(i, k) + v(i, km)) / (ay.step * ay.step);
            h_max = h_max.max(hxx.abs()).max(hyy.abs());
        }
    }
    let cell = ax.step.max(ay.step);
    let flag: Vec<bool> = (0..nx * ny)
        .map(|q| grad[q] <= 0.5 * h_max * cell || grid.values[q] <= 0.5 * g_max * cell)
        .collect();

    let mut seen = vec![false; nx * ny];
    let mut components = 0;
    let mut levels = Vec::new();
    for q0 in 0..nx * ny {
        if !flag[q0] || seen[q0] {
            continue;
        }
        components += 1;
        let mut stack = vec![q0];
        seen[q0] = true;
        let mut best = q0;
        while let Some(q) = stack.pop() {
            let better = if grid.values[q] <= 0.5 * g_max * cell {
                grid.values[q] < grid.values[best]
            } else {
                grad[q] < grad[best]
            };
            if better {
                best = q;
            }
            let (i, k) = (q / ny, q % ny);
            for di in [nx - 1, 0, 1] {
                for dk in [ny - 1, 0, 1] {
                    let r = ((i + di) % nx) * ny + (k + dk) % ny;
                    if flag[r] && !seen[r] {
                        seen[r] = true;
                        stack.push(r);
                    }
                }
            }
        }
        levels.push(grid.values[best]);
    }
    levels.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::new();
    for l in levels {
        if distinct.last().is_none_or(|d| l - d > value_tol) {
            distinct.push(l);
        }
    }
    Ok(GridCriticalSummary {
        flagged_points: flag.iter().filter(|f| **f).count(),
        components,
        distinct_values: distinct,
    })
}
