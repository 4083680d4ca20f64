//! Singular points of the universal quadric with every edge on shell.
//!
//! A pinch is a point `x` of loop-momentum space with `f_e(x) = 0` for all edges and a
//! relation `sum_e c_e grad f_e(x) = 0`; it is physical when every `c_e > 0`. Requiring
//! all `n` quadrics to vanish together with the relation overdetermines the system by
//! one, so the solver works with the square system
//!
//! `sum_e c_e grad f_e(x) = 0`,  `f_e(x) = lambda` for all `e`,  `sum_e c_e = 1`
//!
//! in the unknowns `(x, c, lambda)`. Its solutions are the stationary points of
//! `sum_e c_e f_e` on which all propagators agree; pinches are the solutions with
//! `lambda = 0`. Thresholds are located by bisection on `lambda` as the external
//! momenta are scaled.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::amplitude::Kinematics;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rational;
use crate::symanzik::Configuration;

const RANK_CUTOFF: f64 = 1e-10;
const ACCEPT: f64 = 1e-10;
const C_FLOOR: f64 = 1e-6;

/// Binary64 description of the propagators `f_e(x) = q(C_e x + t_e) - mass_sq_e`.
#[derive(Debug, Clone)]
pub struct LandauSystem {
    sig: Vec<f64>,
    loops: usize,
    /// cycle coordinates `c_{e,i}`
    cols: Vec<Vec<f64>>,
    /// tree-routed external part of each edge momentum
    t: Vec<Vec<f64>>,
    mass_sq: Vec<f64>,
}

impl LandauSystem {
    pub fn new(g: &Graph, kin: &Kinematics) -> Result<Self> {
        if kin.momenta().len() != g.n_vertices() {
            return Err(Error::DimensionMismatch { expected: g.n_vertices(), got: kin.momenta().len() });
        }
        if kin.mass_sq().len() != g.n_edges() {
            return Err(Error::DimensionMismatch { expected: g.n_edges(), got: kin.mass_sq().len() });
        }
        let c = Configuration::from_graph(g);
        let t = g.route(&g.cycle_basis().tree, kin.momenta())?;
        Ok(Self {
            sig: kin.space().signature().iter().map(|&s| s as f64).collect(),
            loops: c.genus(),
            cols: (0..g.n_edges()).map(|e| c.column(e).iter().map(rational::to_f64).collect()).collect(),
            t: t.iter().map(|v| v.iter().map(rational::to_f64).collect()).collect(),
            mass_sq: kin.mass_sq().iter().map(rational::to_f64).collect(),
        })
    }

    /// Same propagators with the external momenta multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.t.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    pub fn dim(&self) -> usize {
        self.sig.len()
    }

    pub fn n_edges(&self) -> usize {
        self.cols.len()
    }

    pub fn loops(&self) -> usize {
        self.loops
    }

    /// Number of loop-momentum coordinates `D g`.
    pub fn n_x(&self) -> usize {
        self.dim() * self.loops
    }

    pub fn edge_momentum(&self, e: usize, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut q = self.t[e].clone();
        for i in 0..self.loops {
            let c = self.cols[e][i];
            if c != 0.0 {
                for k in 0..d {
                    q[k] += c * x[i * d + k];
                }
            }
        }
        q
    }

    fn q(&self, v: &[f64]) -> f64 {
        self.sig.iter().zip(v).map(|(s, a)| s * a * a).sum()
    }

    pub fn f(&self, e: usize, x: &[f64]) -> f64 {
        self.q(&self.edge_momentum(e, x)) - self.mass_sq[e]
    }

    /// `grad_x f_e`, indexed by `(loop, coordinate)`.
    pub fn grad(&self, e: usize, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let q = self.edge_momentum(e, x);
        let mut out = vec![0.0; self.n_x()];
        for i in 0..self.loops {
            for k in 0..d {
                out[i * d + k] = 2.0 * self.sig[k] * q[k] * self.cols[e][i];
            }
        }
        out
    }

    /// Hessian of `sum_e c_e f_e` in `x` (constant in `x`).
    pub fn hessian(&self, c: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let nx = self.n_x();
        let mut h = DMatrix::zeros(nx, nx);
        for (e, ce) in c.iter().enumerate() {
            for i in 0..self.loops {
                for j in 0..self.loops {
                    let w = 2.0 * ce * self.cols[e][i] * self.cols[e][j];
                    if w == 0.0 {
                        continue;
                    }
                    for k in 0..d {
                        h[(i * d + k, j * d + k)] += w * self.sig[k];
                    }
                }
            }
        }
        h
    }

    /// Stationary point in `x` of `sum_e c_e f_e`, when the Hessian is invertible.
    pub fn stationary_x(&self, c: &[f64]) -> Option<Vec<f64>> {
        let zero = vec![0.0; self.n_x()];
        let mut b = DVector::zeros(self.n_x());
        for (e, ce) in c.iter().enumerate() {
            for (k, g) in self.grad(e, &zero).into_iter().enumerate() {
                b[k] -= ce * g;
            }
        }
        self.hessian(c).lu().solve(&b).map(|x| x.iter().copied().collect())
    }

    /// `(f_e(x))_e` followed by `sum_e c_e grad f_e(x)`.
    pub fn residual(&self, c: &[f64], x: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = (0..self.n_edges()).map(|e| self.f(e, x)).collect();
        let mut g = vec![0.0; self.n_x()];
        for (e, ce) in c.iter().enumerate() {
            for (gk, dk) in g.iter_mut().zip(self.grad(e, x)) {
                *gk += ce * dk;
            }
        }
        out.extend(g);
        out
    }

    /// Augmented residual in `z = (x, c, lambda)`.
    fn augmented(&self, z: &[f64]) -> DVector<f64> {
        let (nx, n) = (self.n_x(), self.n_edges());
        let (x, c, lambda) = (&z[..nx], &z[nx..nx + n], z[nx + n]);
        let mut r = DVector::zeros(nx + n + 1);
        for e in 0..n {
            let ge = self.grad(e, x);
            for k in 0..nx {
                r[k] += c[e] * ge[k];
            }
            r[nx + e] = self.f(e, x) - lambda;
        }
        r[nx + n] = c.iter().sum::<f64>() - 1.0;
        r
    }

    fn jacobian(&self, z: &[f64]) -> DMatrix<f64> {
        let (nx, n) = (self.n_x(), self.n_edges());
        let (x, c) = (&z[..nx], &z[nx..nx + n]);
        let mut j = DMatrix::zeros(nx + n + 1, nx + n + 1);
        j.view_mut((0, 0), (nx, nx)).copy_from(&self.hessian(c));
        for e in 0..n {
            let ge = self.grad(e, x);
            for k in 0..nx {
                j[(k, nx + e)] = ge[k];
                j[(nx + e, k)] = ge[k];
            }
            j[(nx + e, nx + n)] = -1.0;
            j[(nx + n, nx + e)] = 1.0;
        }
        j
    }
}

/// Solution of the augmented system.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSolution {
    pub x: Vec<f64>,
    pub c: Vec<f64>,
    pub lambda: f64,
    pub residual: f64,
}

/// Damped Newton from `(x0, c0)` keeping `c` strictly positive.
pub fn solve_augmented(sys: &LandauSystem, x0: &[f64], c0: &[f64]) -> Option<AugmentedSolution> {
    let (nx, n) = (sys.n_x(), sys.n_edges());
    let lambda0 = (0..n).map(|e| sys.f(e, x0)).sum::<f64>() / n as f64;
    let mut z: Vec<f64> = x0.iter().chain(c0).copied().chain(std::iter::once(lambda0)).collect();
    let mut r = sys.augmented(&z);
    for _ in 0..200 {
        let norm = r.norm();
        if norm <= 1e-14 * (1.0 + z.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
            break;
        }
        let j = sys.jacobian(&z);
        let step = j.clone().lu().solve(&(-&r)).or_else(|| SVD::new(j, true, true).solve(&(-&r), 1e-14).ok())?;
        // fraction to the boundary c > 0
        let mut tau: f64 = 1.0;
        for e in 0..n {
            let dc = step[nx + e];
            if dc < 0.0 {
                tau = tau.min(0.99 * -z[nx + e] / dc);
            }
        }
        let mut accepted = false;
        while tau > 1e-12 {
            let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a + tau * b).collect();
            let rt = sys.augmented(&trial);
            if rt.norm() < (1.0 - 1e-4 * tau) * norm {
                z = trial;
                r = rt;
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let residual = r.amax();
    residual.is_finite().then(|| AugmentedSolution {
        x: z[..nx].to_vec(),
        c: z[nx..nx + n].to_vec(),
        lambda: z[nx + n],
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinchPoint {
    /// Feynman parameters, normalized to sum 1
    pub c: Vec<f64>,
    /// loop momenta, `D` coordinates per loop
    pub x: Vec<f64>,
    /// on-shell values `f_e(x)`
    pub on_shell: Vec<f64>,
    /// norm of `sum_e c_e grad f_e(x)`
    pub gradient_norm: f64,
    /// `(n_plus, n_minus, n_zero)` of the restricted Hessian, when defined
    pub hessian_signature: Option<(usize, usize, usize)>,
}

/// `(f_e(x))_e` followed by `sum_e c_e grad f_e(x)`.
pub fn landau_residual(g: &Graph, kin: &Kinematics, c: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let sys = LandauSystem::new(g, kin)?;
    if c.len() != sys.n_edges() {
        return Err(Error::DimensionMismatch { expected: sys.n_edges(), got: c.len() });
    }
    if x.len() != sys.n_x() {
        return Err(Error::DimensionMismatch { expected: sys.n_x(), got: x.len() });
    }
    if c.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroPoint);
    }
    Ok(sys.residual(c, x))
}

fn random_start(sys: &LandauSystem, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let scale = sys
        .t
        .iter()
        .flatten()
        .map(|v| v.abs())
        .chain(sys.mass_sq.iter().map(|m| m.abs().sqrt()))
        .fold(1.0, f64::max);
    let raw: Vec<f64> = (0..sys.n_edges()).map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
    let s: f64 = raw.iter().sum();
    let c: Vec<f64> = raw.iter().map(|v| v / s).collect();
    let x = sys
        .stationary_x(&c)
        .unwrap_or_else(|| (0..sys.n_x()).map(|_| rng.random_range(-scale..scale)).collect());
    (x, c)
}

/// Interior solutions only: Newton can creep towards `c_e -> 0` where the residual
/// vanishes without a pinch.
fn interior(a: &AugmentedSolution) -> bool {
    a.residual <= ACCEPT && a.c.iter().all(|&v| v > C_FLOOR)
}

fn start_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// Physical pinches found by damped Newton from `n_starts` seeded random starts.
pub fn find_physical_pinch(g: &Graph, kin: &Kinematics, seed: u64, n_starts: usize) -> Result<Vec<PinchPoint>> {
    let sys = LandauSystem::new(g, kin)?;
    if g.n_vertices() < 2 {
        return Err(Error::Inconsistent("need at least two vertices".into()));
    }
    if sys.loops() == 0 {
        return Ok(Vec::new());
    }
    let found: Vec<AugmentedSolution> = (0..n_starts)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = start_rng(seed, k);
            let (x0, c0) = random_start(&sys, &mut rng);
            solve_augmented(&sys, &x0, &c0)
        })
        .filter(|s| interior(s) && s.lambda.abs() <= ACCEPT)
        .collect();
    let mut pinches: Vec<PinchPoint> = Vec::new();
    let mut sorted = found;
    sorted.sort_by(|a, b| {
        a.c.iter().chain(&a.x).zip(b.c.iter().chain(&b.x)).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    for s in sorted {
        let dup = pinches.iter().any(|p| {
            let d2: f64 = p.c.iter().chain(&p.x).zip(s.c.iter().chain(&s.x)).map(|(a, b)| (a - b).powi(2)).sum();
            d2.sqrt() < 1e-6
        });
        if dup {
            continue;
        }
        let res = sys.residual(&s.c, &s.x);
        let n = sys.n_edges();
        let mut p = PinchPoint {
            on_shell: res[..n].to_vec(),
            gradient_norm: res[n..].iter().map(|v| v * v).sum::<f64>().sqrt(),
            c: s.c,
            x: s.x,
            hessian_signature: None,
        };
        if let Ok(h) = hessian_check(&p, g, kin) {
            p.hessian_signature = Some(h.signature);
        }
        pinches.push(p);
    }
    Ok(pinches)
}

/// `lambda(s)` on the physical branch (`c > 0`) with external momenta scaled by `s`.
/// `warm` is tried first, then seeded random starts.
pub fn physical_branch(sys: &LandauSystem, s: f64, warm: Option<&AugmentedSolution>, seed: u64) -> Option<AugmentedSolution> {
    let scaled = sys.scaled(s);
    let ok = interior;
    if let Some(w) = warm {
        if let Some(a) = solve_augmented(&scaled, &w.x, &w.c).filter(ok) {
            return Some(a);
        }
    }
    (0..64).find_map(|k| {
        let mut rng = start_rng(seed, k);
        let (x0, c0) = random_start(&scaled, &mut rng);
        solve_augmented(&scaled, &x0, &c0).filter(ok)
    })
}

/// Scale `s` in `[lo, hi]` of the external momenta at which `lambda` changes sign,
/// located by bisection to `1e-12` relative.
pub fn locate_threshold(g: &Graph, kin: &Kinematics, lo: f64, hi: f64, seed: u64) -> Result<f64> {
    let sys = LandauSystem::new(g, kin)?;
    if sys.loops() == 0 || !(lo < hi) {
        return Err(Error::NoBracket { lo, hi });
    }
    let fail = || Error::SolverFailed("no physical stationary point".into());
    let mut a = physical_branch(&sys, lo, None, seed).ok_or_else(fail)?;
    let b = physical_branch(&sys, hi, Some(&a), seed).ok_or_else(fail)?;
    if a.lambda.signum() == b.lambda.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let m = physical_branch(&sys, mid, Some(&a), seed).ok_or_else(fail)?;
        if m.lambda == 0.0 {
            return Ok(mid);
        }
        if m.lambda.signum() == a.lambda.signum() {
            lo = mid;
            a = m;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BananaThresholds {
    /// distinct values `|sum_i s_i m_i|` over sign choices, ascending
    pub values: Vec<f64>,
    /// the all-plus value `sum_i m_i`
    pub physical: f64,
}

pub fn banana_threshold(n: usize, masses: &[f64]) -> Result<BananaThresholds> {
    if n < 2 {
        return Err(Error::Inconsistent("a banana graph needs at least two edges".into()));
    }
    if masses.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: masses.len() });
    }
    if let Some(e) = masses.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(Error::InvalidMass { edge: e, reason: "mass must be positive".into() });
    }
    // the sign of m_1 is fixed: overall sign does not change |a|
    let mut values: Vec<f64> = (0..1u64 << (n - 1))
        .map(|mask| {
            masses[0] + (1..n).map(|i| if mask & (1 << (i - 1)) != 0 { -masses[i] } else { masses[i] }).sum::<f64>()
        })
        .map(f64::abs)
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    Ok(BananaThresholds { values, physical: masses.iter().sum() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NegativeDefinite,
    NotNegativeDefinite,
    /// the gradients satisfy more than one relation; no claim is made
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HessianReport {
    pub signature: (usize, usize, usize),
    pub eigenvalues: Vec<f64>,
    pub gradient_rank: usize,
    pub verdict: Verdict,
}

fn numeric_rank(m: &DMatrix<f64>) -> (usize, SVD<f64, nalgebra::Dyn, nalgebra::Dyn>) {
    let svd = SVD::new(m.clone(), true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let rank = svd.singular_values.iter().filter(|&&s| s > RANK_CUTOFF * top.max(1.0)).count();
    (rank, svd)
}

/// Signature of `sum_e c_e f_e`'s Hessian restricted to the common tangent space of the
/// quadrics at the pinch.
pub fn hessian_check(p: &PinchPoint, g: &Graph, kin: &Kinematics) -> Result<HessianReport> {
    if !kin.space().is_minkowski() {
        return Err(Error::NotMinkowski);
    }
    if let Some(e) = kin.mass_sq().iter().position(|m| !rational::is_positive(m)) {
        return Err(Error::InvalidMass { edge: e, reason: "squared mass must be positive".into() });
    }
    let sys = LandauSystem::new(g, kin)?;
    let (n, nx) = (sys.n_edges(), sys.n_x());
    if p.c.len() != n || p.x.len() != nx {
        return Err(Error::DimensionMismatch { expected: nx, got: p.x.len() });
    }
    let grads = DMatrix::from_fn(n, nx, |e, k| sys.grad(e, &p.x)[k]);
    let (rank, _) = numeric_rank(&grads);
    if rank + 1 != n {
        return Ok(HessianReport { signature: (0, 0, 0), eigenvalues: Vec::new(), gradient_rank: rank, verdict: Verdict::Degenerate });
    }
    // null space of the gradient rows: right singular vectors beyond the rank
    let full = SVD::new(grads.transpose() * &grads, true, true);
    let mut order: Vec<usize> = (0..nx).collect();
    order.sort_by(|&a, &b| full.singular_values[b].total_cmp(&full.singular_values[a]));
    let v_t = full.v_t.expect("requested");
    let tangent = DMatrix::from_fn(nx, nx - rank, |r, k| v_t[(order[rank + k], r)]);
    let restricted = tangent.transpose() * sys.hessian(&p.c) * &tangent;
    let eig = SymmetricEigen::new(restricted);
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let tol = 1e-10;
    let signature = (
        eigenvalues.iter().filter(|&&v| v > tol).count(),
        eigenvalues.iter().filter(|&&v| v < -tol).count(),
        eigenvalues.iter().filter(|&&v| v.abs() <= tol).count(),
    );
    let verdict = if signature.1 == eigenvalues.len() { Verdict::NegativeDefinite } else { Verdict::NotNegativeDefinite };
    Ok(HessianReport { signature, eigenvalues, gradient_rank: rank, verdict })
}

/// For an edge subset whose removal keeps the graph connected, samples points where the
/// quadrics of the subset vanish and returns how many of them have linearly
/// independent gradients (so admit no relation).
pub fn disconnection_check(g: &Graph, kin: &Kinematics, subset: &[usize], samples: usize, seed: u64) -> Result<usize> {
    let sys = LandauSystem::new(g, kin)?;
    let mut rest = g.clone();
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &e in sorted.iter().rev() {
        rest = rest.modify(e, crate::graph::Modification::Delete)?;
    }
    if !rest.is_connected() || sorted.is_empty() {
        return Err(Error::Inconsistent("cut must be nonempty and leave the graph connected".into()));
    }
    let d = sys.dim();
    let nx = sys.n_x();
    // affine map x -> (q_e)_{e in S}
    let rows = sorted.len() * d;
    let a = DMatrix::from_fn(rows, nx, |r, k| {
        let (s, dd) = (r / d, r % d);
        let (i, kd) = (k / d, k % d);
        if kd == dd {
            sys.cols[sorted[s]][i]
        } else {
            0.0
        }
    });
    let svd = SVD::new(a, true, true);
    let mut good = 0;
    for k in 0..samples {
        let mut rng = start_rng(seed, k);
        let mut target = DVector::zeros(rows);
        for (s, &e) in sorted.iter().enumerate() {
            let q = on_shell_vector(&sys.sig, sys.mass_sq[e], &mut rng)
                .ok_or_else(|| Error::InvalidMass { edge: e, reason: "no real on-shell momentum".into() })?;
            for dd in 0..d {
                target[s * d + dd] = q[dd] - sys.t[e][dd];
            }
        }
        let x = svd.solve(&target, 1e-12).map_err(|m| Error::SolverFailed(m.to_string()))?;
        let x: Vec<f64> = x.iter().copied().collect();
        if sorted.iter().any(|&e| sys.f(e, &x).abs() > 1e-8 * (1.0 + sys.mass_sq[e].abs())) {
            return Err(Error::SolverFailed("cut quadrics cannot be put on shell independently".into()));
        }
        let grads = DMatrix::from_fn(sorted.len(), nx, |s, c| sys.grad(sorted[s], &x)[c]);
        if numeric_rank(&grads).0 == sorted.len() {
            good += 1;
        }
    }
    Ok(good)
}

/// Random real `q` with `q(q) = mass_sq`.
fn on_shell_vector(sig: &[f64], mass_sq: f64, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    let d = sig.len();
    let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    // solve for the first coordinate of matching sign
    let rest: f64 = (1..d).map(|k| sig[k] * v[k] * v[k]).sum();
    let need = (mass_sq - rest) * sig[0];
    if need >= 0.0 {
        v[0] = need.sqrt() * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        return Some(v);
    }
    // Euclidean-type case: rescale a random direction
    let norm: f64 = sig.iter().zip(&v).map(|(s, a)| s * a * a).sum();
    (norm * mass_sq > 0.0).then(|| v.iter().map(|a| a * (mass_sq / norm).sqrt()).collect())
}
