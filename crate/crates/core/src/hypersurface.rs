//! Probes of the graph hypersurface `psi = 0` and of the incidence variety of kernel
//! directions over it.

use std::collections::HashMap;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{self, QMatrix};
use crate::poly::MultiPoly;
use crate::rational::{self, Rational};
use crate::symanzik::{first_symanzik, Configuration, PsiMethod};

/// Nonzero vector up to scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjPoint {
    coords: Vec<Rational>,
}

impl ProjPoint {
    pub fn new(coords: Vec<Rational>) -> Result<Self> {
        if coords.iter().all(Zero::is_zero) {
            return Err(Error::ZeroPoint);
        }
        Ok(Self { coords })
    }

    pub fn from_i64(coords: &[i64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| rational::int(x)).collect())
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    /// Representative whose first nonzero coordinate is 1.
    pub fn normalized(&self) -> Vec<Rational> {
        let lead = self.coords.iter().find(|x| !x.is_zero()).expect("nonzero").clone();
        self.coords.iter().map(|x| x / &lead).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PattersonSample {
    /// exact coordinates as `p/q` strings
    pub point: Vec<String>,
    pub corank: usize,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PattersonReport {
    pub graph_id: String,
    pub samples: Vec<PattersonSample>,
    pub all_match: bool,
    pub diagnostic: Option<String>,
}

fn check_len(c: &Configuration, a: &ProjPoint) -> Result<()> {
    if a.coords.len() != c.n_edges() {
        return Err(Error::DimensionMismatch { expected: c.n_edges(), got: a.coords.len() });
    }
    Ok(())
}

/// `g - rank(sum_e a_e M_e)`.
pub fn corank_at(c: &Configuration, a: &ProjPoint) -> Result<usize> {
    check_len(c, a)?;
    Ok(c.genus() - c.matrix_at(&a.coords)?.rank())
}

pub fn multiplicity_at(c: &Configuration, a: &ProjPoint) -> Result<usize> {
    check_len(c, a)?;
    let psi = first_symanzik(c, PsiMethod::Determinant)?;
    Ok(multiplicity_of(&psi, a.coords()))
}

/// Smallest `p` such that some `p`-fold partial in distinct variables is nonzero at `a`
/// (0 off the hypersurface).
pub fn multiplicity_of(f: &MultiPoly, a: &[Rational]) -> usize {
    let Some(top) = f.total_degree() else {
        // the zero polynomial vanishes to every order
        return usize::MAX;
    };
    for p in 0..=top as usize {
        // value of d^S f at a, accumulated monomial by monomial, keyed by subset mask
        let mut partials: HashMap<u64, Rational> = HashMap::new();
        for (m, coef) in f.terms() {
            let support: Vec<usize> = (0..m.0.len()).filter(|&i| m.0[i] > 0).collect();
            if support.len() < p {
                continue;
            }
            for subset in subsets(&support, p) {
                let mut v = coef.clone();
                let mut mask = 0u64;
                for (i, &k) in m.0.iter().enumerate() {
                    let d = u32::from(subset.contains(&i));
                    if d == 1 {
                        mask |= 1 << i;
                        v *= rational::int(k as i64);
                    }
                    if k - d > 0 {
                        v *= crate::poly::pow_rat(&a[i], k - d);
                    }
                    if v.is_zero() {
                        break;
                    }
                }
                if !v.is_zero() {
                    *partials.entry(mask).or_insert_with(Rational::zero) += v;
                }
            }
        }
        if partials.values().any(|v| !v.is_zero()) {
            return p;
        }
    }
    usize::MAX
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::new(), &mut out);
    out
}

fn graph_id(c: &Configuration) -> String {
    match c.graph() {
        Some(g) => (0..g.n_edges())
            .map(|e| {
                let (u, v) = g.endpoints(e);
                format!("{}-{}", g.vertex_labels()[u], g.vertex_labels()[v])
            })
            .collect::<Vec<_>>()
            .join(","),
        None => format!("config:{}x{}", c.genus(), c.n_edges()),
    }
}

/// Samples exact rational points of `psi = 0` and compares corank with multiplicity.
///
/// Even sample indices solve `psi = 0` for one coordinate over random values of the
/// others. Odd indices plant kernel vectors: random (often sparse) `beta_1..beta_r`
/// are chosen and `a` is drawn from the solutions of `sum_e a_e (c_e . beta_j) c_e = 0`,
/// which reaches points of higher corank that the first method almost never hits.
pub fn patterson_scan(c: &Configuration, n_samples: usize, seed: u64) -> Result<PattersonReport> {
    if c.graph().is_none() {
        return Err(Error::NotAGraph);
    }
    let psi = first_symanzik(c, PsiMethod::Determinant)?;
    let id = graph_id(c);
    if psi.total_degree() == Some(0) {
        return Ok(PattersonReport {
            graph_id: id,
            samples: Vec::new(),
            all_match: true,
            diagnostic: Some("X_G empty: psi is a nonzero constant".into()),
        });
    }
    let samples: Vec<Option<PattersonSample>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let point = if i % 2 == 1 { plant_kernel(c, &mut rng) } else { None }
                .or_else(|| solve_for_pivot(&psi, &mut rng))?;
            debug_assert!(psi.evaluate(&point).unwrap().is_zero());
            let a = ProjPoint::new(point).ok()?;
            let corank = corank_at(c, &a).ok()?;
            let multiplicity = multiplicity_of(&psi, a.coords());
            Some(PattersonSample { point: a.normalized().iter().map(rational::format).collect(), corank, multiplicity })
        })
        .collect();
    let found = samples.iter().filter(|s| s.is_some()).count();
    let samples: Vec<PattersonSample> = samples.into_iter().flatten().collect();
    let all_match = samples.iter().all(|s| s.corank == s.multiplicity);
    let diagnostic = (found < n_samples).then(|| format!("{} of {n_samples} samples failed", n_samples - found));
    Ok(PattersonReport { graph_id: id, samples, all_match, diagnostic })
}

fn solve_for_pivot(psi: &MultiPoly, rng: &mut ChaCha8Rng) -> Option<Vec<Rational>> {
    let n = psi.n_vars();
    for _ in 0..64 {
        let mut a: Vec<Rational> = (0..n).map(|_| rational::random_small(rng, 5, 4)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for &e in &order {
            if psi.degree_in(e) != 1 {
                continue;
            }
            a[e] = Rational::zero();
            let constant = psi.substitute(e, &Rational::zero()).evaluate(&a).ok()?;
            let slope = psi.derivative(e).evaluate(&a).ok()?;
            if slope.is_zero() {
                continue;
            }
            a[e] = -constant / slope;
            if a.iter().any(|x| !x.is_zero()) {
                return Some(a);
            }
        }
    }
    None
}

fn plant_kernel(c: &Configuration, rng: &mut ChaCha8Rng) -> Option<Vec<Rational>> {
    let g = c.genus();
    let n = c.n_edges();
    let cols: Vec<Vec<Rational>> = (0..n).map(|e| c.column(e)).collect();
    for _ in 0..16 {
        let r = rng.random_range(1..=g);
        let sparse = rng.random_bool(0.5);
        let mut rows = Vec::new();
        for _ in 0..r {
            let beta: Vec<Rational> = (0..g)
                .map(|_| if sparse { rational::int(rng.random_range(-1..=1)) } else { rational::random_small(rng, 4, 3) })
                .collect();
            if beta.iter().all(Zero::is_zero) {
                continue;
            }
            let weights: Vec<Rational> = cols.iter().map(|ce| linalg::dot(ce, &beta)).collect();
            for i in 0..g {
                rows.push((0..n).map(|e| &weights[e] * &cols[e][i]).collect::<Vec<_>>());
            }
        }
        if rows.is_empty() {
            continue;
        }
        let kernel = QMatrix::from_rows(rows, n).ok()?.nullspace();
        if kernel.is_empty() {
            continue;
        }
        let mut a = vec![Rational::zero(); n];
        for v in &kernel {
            let s = rational::int(rng.random_range(-3..=3));
            for e in 0..n {
                a[e] += &s * &v[e];
            }
        }
        if a.iter().any(|x| !x.is_zero()) {
            return Some(a);
        }
    }
    None
}

/// `g - rank{c_e : c_e . beta != 0}`.
pub fn epsilon_beta(c: &Configuration, beta: &ProjPoint) -> Result<usize> {
    let g = c.genus();
    if beta.coords.len() != g {
        return Err(Error::DimensionMismatch { expected: g, got: beta.coords.len() });
    }
    let support: Vec<Vec<Rational>> =
        (0..c.n_edges()).map(|e| c.column(e)).filter(|ce| !linalg::dot(ce, &beta.coords).is_zero()).collect();
    Ok(g - linalg::rank_of(&support, g))
}

/// Unordered partition `E = first ⊔ second` (edge 0 always in `first`) on which neither
/// side's functionals span the dual of `H_1`. Witnesses are nonzero cycle-space
/// vectors killed by every functional of that side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopPartition {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub rank_first: usize,
    pub rank_second: usize,
    pub witness_first: Vec<String>,
    pub witness_second: Vec<String>,
}

pub fn loop_partitions(g: &Graph) -> Result<Vec<LoopPartition>> {
    let c = Configuration::from_graph(g);
    let n = g.n_edges();
    let genus = c.genus();
    if !(2..=24).contains(&n) {
        return Ok(Vec::new());
    }
    let cols: Vec<Vec<Rational>> = (0..n).map(|e| c.column(e)).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << (n - 1)) {
        let first: Vec<usize> = std::iter::once(0).chain((1..n).filter(|&e| mask & (1 << (e - 1)) != 0)).collect();
        let second: Vec<usize> = (1..n).filter(|&e| mask & (1 << (e - 1)) == 0).collect();
        if second.is_empty() {
            continue;
        }
        let side = |s: &[usize]| s.iter().map(|&e| cols[e].clone()).collect::<Vec<_>>();
        let (v1, v2) = (side(&first), side(&second));
        let (r1, r2) = (linalg::rank_of(&v1, genus), linalg::rank_of(&v2, genus));
        if r1 < genus && r2 < genus {
            let witness = |v: &[Vec<Rational>]| -> Vec<String> {
                let k = QMatrix::from_rows(v.to_vec(), genus).expect("rows of length g").nullspace();
                k[0].iter().map(rational::format).collect()
            };
            out.push(LoopPartition {
                witness_first: witness(&v1),
                witness_second: witness(&v2),
                first,
                second,
                rank_first: r1,
                rank_second: r2,
            });
        }
    }
    Ok(out)
}

/// Linear subspace `L ⊂ Q^g` (so a projective subspace of `P^{g-1}`) on whose generic
/// point `epsilon` takes the value `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpComponent {
    /// reduced row echelon basis
    pub basis: Vec<Vec<Rational>>,
    pub epsilon: usize,
}

impl JumpComponent {
    pub fn projective_dim(&self) -> usize {
        self.basis.len() - 1
    }
}

/// Maximal linear pieces of `{beta : epsilon(beta) >= 1}`, found by exact enumeration:
/// for every edge subset `Z` the annihilator `L_Z` of `{c_e : e in Z}` is tested at its
/// generic point.
pub fn jump_locus(c: &Configuration) -> Result<Vec<JumpComponent>> {
    let g = c.genus();
    let n = c.n_edges();
    if g == 0 {
        return Ok(Vec::new());
    }
    if n > 24 {
        return Err(Error::Inconsistent("too many edges for exhaustive search".into()));
    }
    let cols: Vec<Vec<Rational>> = (0..n).map(|e| c.column(e)).collect();
    let mut candidates: Vec<JumpComponent> = Vec::new();
    for mask in 1u32..(1 << n) {
        let z: Vec<Vec<Rational>> = (0..n).filter(|e| mask & (1 << e) != 0).map(|e| cols[e].clone()).collect();
        let l = QMatrix::from_rows(z, g)?.nullspace();
        if l.is_empty() {
            continue;
        }
        let generic_support: Vec<Vec<Rational>> =
            cols.iter().filter(|ce| l.iter().any(|b| !linalg::dot(ce, b).is_zero())).cloned().collect();
        let eps = g - linalg::rank_of(&generic_support, g);
        if eps == 0 {
            continue;
        }
        let basis = QMatrix::from_rows(l, g)?.rref().0.to_rows().into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
        let comp = JumpComponent { basis, epsilon: eps };
        if !candidates.contains(&comp) {
            candidates.push(comp);
        }
    }
    let contained = |a: &JumpComponent, b: &JumpComponent| -> bool {
        let mut rows = b.basis.clone();
        rows.extend(a.basis.iter().cloned());
        linalg::rank_of(&rows, g) == b.basis.len()
    };
    let maximal: Vec<JumpComponent> = candidates
        .iter()
        .filter(|a| !candidates.iter().any(|b| b != *a && b.basis.len() > a.basis.len() && contained(a, b)))
        .cloned()
        .collect();
    Ok(maximal)
}
