//! Propagators and parametric Feynman amplitudes.
//!
//! Edge momenta are `q_e(x) = sum_i x_i c_{e,i} + t_e` where `x` ranges over loop
//! momenta and `t` is the spanning-tree routing of the vertex momenta (`boundary(t) = p`).
//! The propagator quadric is `f_e = q(q_e) - mass_sq_e`. With Euclidean momenta a
//! propagator `1 / (k^2 + M^2)` corresponds to `mass_sq = -M^2`.
//!
//! Completing the square gives `sum_e A_e f_e = x M x^T - 2 x B p + p Gamma p^T - mu`
//! and the second Symanzik polynomial
//! `phi = -(Bp)^T adj(M) (Bp) + (p Gamma p^T - mu) psi`, so that `phi / psi` is the
//! stationary value of `sum_e A_e f_e` over the loop momenta.

pub mod integrate;

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::graph::{build_graph, Graph};
use crate::poly::{self, CompiledPoly, MultiPoly, PolyMatrix};
use crate::rational::{self, Rational};
use crate::symanzik::{first_symanzik, Configuration, MomentumVector, PsiMethod, QuadraticSpace};

pub use integrate::{integrate_simplex, IntegralEstimate, Method};

/// Vertex momenta in a quadratic space and signed squared masses per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    space: QuadraticSpace,
    momenta: Vec<Vec<Rational>>,
    mass_sq: Vec<Rational>,
}

impl Kinematics {
    /// Physical masses `m_e >= 0`; `mass_sq = m_e^2`.
    pub fn new(space: QuadraticSpace, momenta: Vec<Vec<Rational>>, masses: Vec<Rational>) -> Result<Self> {
        if let Some(e) = masses.iter().position(|m| m < &Rational::zero()) {
            return Err(Error::InvalidMass { edge: e, reason: "negative mass".into() });
        }
        let mass_sq = masses.iter().map(|m| m * m).collect();
        Self::with_mass_squared(space, momenta, mass_sq)
    }

    /// Arbitrary signed `mass_sq`, e.g. `-M^2` for Euclidean propagators `1/(k^2+M^2)`.
    pub fn with_mass_squared(space: QuadraticSpace, momenta: Vec<Vec<Rational>>, mass_sq: Vec<Rational>) -> Result<Self> {
        // validates vector lengths and conservation
        MomentumVector::new(space.clone(), momenta.clone())?;
        Ok(Self { space, momenta, mass_sq })
    }

    /// Euclidean propagators `1/(q^2 + m_e^2)`.
    pub fn euclidean(momenta: Vec<Vec<Rational>>, masses: Vec<Rational>) -> Result<Self> {
        let d = momenta.first().map_or(1, |v| v.len());
        let mass_sq = masses.iter().map(|m| -(m * m)).collect();
        Self::with_mass_squared(QuadraticSpace::euclidean(d), momenta, mass_sq)
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn momenta(&self) -> &[Vec<Rational>] {
        &self.momenta
    }

    pub fn mass_sq(&self) -> &[Rational] {
        &self.mass_sq
    }

    pub fn is_massless(&self) -> bool {
        self.mass_sq.iter().all(Zero::is_zero)
    }

    pub fn momentum_vector(&self) -> MomentumVector {
        MomentumVector::new(self.space.clone(), self.momenta.clone()).expect("validated on construction")
    }

    fn check(&self, g: &Graph) -> Result<()> {
        if self.momenta.len() != g.n_vertices() {
            return Err(Error::DimensionMismatch { expected: g.n_vertices(), got: self.momenta.len() });
        }
        if self.mass_sq.len() != g.n_edges() {
            return Err(Error::DimensionMismatch { expected: g.n_edges(), got: self.mass_sq.len() });
        }
        Ok(())
    }

    /// `mu = sum_e mass_sq_e A_e`.
    pub fn mu(&self, vars: &[String]) -> MultiPoly {
        MultiPoly::linear(vars, &self.mass_sq)
    }
}

/// Matrices of the completed square; `B` and `Gamma` are indexed by the non-root
/// vertices listed in `vertices`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadDecomposition {
    pub m: PolyMatrix,
    pub b: PolyMatrix,
    pub gamma: PolyMatrix,
    pub mu: MultiPoly,
    pub vertices: Vec<usize>,
    pub tree: Vec<usize>,
    space: QuadraticSpace,
    p: Vec<Vec<Rational>>,
    vars: Vec<String>,
}

impl QuadDecomposition {
    /// `x M x^T - 2 x B p + p Gamma p^T - mu` at numeric loop momenta `x` (one vector per
    /// loop).
    pub fn evaluate_form(&self, x: &[Vec<Rational>]) -> Result<MultiPoly> {
        let g = self.m.len();
        if x.len() != g {
            return Err(Error::DimensionMismatch { expected: g, got: x.len() });
        }
        let mut out = self.mu.neg();
        let ip = |a: &[Rational], b: &[Rational]| self.space.bilinear(a, b);
        for i in 0..g {
            for j in 0..g {
                out = out.add(&self.m[i][j].scale(&ip(&x[i], &x[j])));
            }
            for (k, pv) in self.p.iter().enumerate() {
                out = out.sub(&self.b[i][k].scale(&(rational::int(2) * ip(&x[i], pv))));
            }
        }
        for (k, pv) in self.p.iter().enumerate() {
            for (l, pw) in self.p.iter().enumerate() {
                out = out.add(&self.gamma[k][l].scale(&ip(pv, pw)));
            }
        }
        out.with_vars(&self.vars)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }
}

/// Routes unit vertex sources through `tree` and expands `sum_e A_e f_e`.
pub fn route_and_decompose(g: &Graph, kin: &Kinematics, tree: &[usize]) -> Result<QuadDecomposition> {
    kin.check(g)?;
    if !g.is_spanning_tree(tree) {
        return Err(Error::InvalidTree(format!("{tree:?}")));
    }
    // conservation on every component
    g.route(tree, kin.momenta())?;
    let c = Configuration::from_graph(g);
    let vars = c.vars().to_vec();
    let n = g.n_edges();
    let root = 0;
    let vertices: Vec<usize> = (0..g.n_vertices()).filter(|&v| v != root).collect();
    // r[k][e]: flow on edge e routing a unit source at vertices[k] back to the root
    let mut r: Vec<Vec<Rational>> = Vec::with_capacity(vertices.len());
    for &v in &vertices {
        let mut w = vec![vec![Rational::zero()]; g.n_vertices()];
        w[v][0] = rational::one();
        let (t, _) = g.route_unchecked(tree, &w)?;
        r.push(t.into_iter().map(|x| x[0].clone()).collect());
    }
    let gen = c.genus();
    let cols: Vec<Vec<Rational>> = (0..n).map(|e| c.column(e)).collect();
    let b = (0..gen)
        .map(|i| {
            r.iter()
                .map(|rv| {
                    let coeffs: Vec<Rational> = (0..n).map(|e| -(&cols[e][i] * &rv[e])).collect();
                    MultiPoly::linear(&vars, &coeffs)
                })
                .collect()
        })
        .collect();
    let gamma = r
        .iter()
        .map(|rv| {
            r.iter()
                .map(|rw| {
                    let coeffs: Vec<Rational> = (0..n).map(|e| &rv[e] * &rw[e]).collect();
                    MultiPoly::linear(&vars, &coeffs)
                })
                .collect()
        })
        .collect();
    Ok(QuadDecomposition {
        m: c.symbolic_matrix(),
        b,
        gamma,
        mu: kin.mu(&vars),
        p: vertices.iter().map(|&v| kin.momenta()[v].clone()).collect(),
        vertices,
        tree: tree.to_vec(),
        space: kin.space().clone(),
        vars,
    })
}

/// `sum_e A_e f_e(x)` computed directly from the edge momenta at numeric `x`.
pub fn propagator_sum(g: &Graph, kin: &Kinematics, tree: &[usize], x: &[Vec<Rational>]) -> Result<MultiPoly> {
    kin.check(g)?;
    let c = Configuration::from_graph(g);
    let t = g.route(tree, kin.momenta())?;
    let q = edge_momenta(&c, &t, x)?;
    let f: Vec<Rational> = (0..g.n_edges()).map(|e| kin.space().q(&q[e]) - &kin.mass_sq()[e]).collect();
    Ok(MultiPoly::linear(c.vars(), &f))
}

/// `q_e = sum_i x_i c_{e,i} + t_e`.
pub fn edge_momenta(c: &Configuration, t: &[Vec<Rational>], x: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    if x.len() != c.genus() {
        return Err(Error::DimensionMismatch { expected: c.genus(), got: x.len() });
    }
    Ok((0..c.n_edges())
        .map(|e| {
            let col = c.column(e);
            let mut q = t[e].clone();
            for (i, xi) in x.iter().enumerate() {
                if col[i].is_zero() {
                    continue;
                }
                for (qd, xd) in q.iter_mut().zip(xi) {
                    *qd += &col[i] * xd;
                }
            }
            q
        })
        .collect())
}

/// `phi = -sum_ij adj(M)_ij <(Bp)_i, (Bp)_j> + (<p, Gamma p> - mu) psi`.
pub fn phi_from_decomposition(d: &QuadDecomposition, psi: &MultiPoly) -> Result<MultiPoly> {
    let g = d.m.len();
    if d.b.len() != g || d.gamma.len() != d.p.len() {
        return Err(Error::Inconsistent("decomposition blocks have mismatched sizes".into()));
    }
    let (det, adj) = poly::det_and_adjugate(&d.m)?;
    if det != *psi {
        return Err(Error::Inconsistent("psi does not match det(M)".into()));
    }
    let vars = &d.vars;
    let mut phi = MultiPoly::zero(vars);
    for (k, &sig) in d.space.signature().iter().enumerate() {
        let bp: Vec<MultiPoly> = (0..g)
            .map(|i| {
                d.p.iter().enumerate().fold(MultiPoly::zero(vars), |acc, (v, pv)| acc.add(&d.b[i][v].scale(&pv[k])))
            })
            .collect();
        let mut quad = MultiPoly::zero(vars);
        for i in 0..g {
            for j in 0..g {
                quad = quad.add(&adj[i][j].mul(&bp[i]).mul(&bp[j]));
            }
        }
        let mut pgp = MultiPoly::zero(vars);
        for (v, pv) in d.p.iter().enumerate() {
            for (w, pw) in d.p.iter().enumerate() {
                pgp = pgp.add(&d.gamma[v][w].scale(&(&pv[k] * &pw[k])));
            }
        }
        let term = pgp.mul(psi).sub(&quad);
        phi = if sig == 1 { phi.add(&term) } else { phi.sub(&term) };
    }
    phi.sub(&d.mu.mul(psi)).with_vars(vars)
}

/// Second Symanzik polynomial with masses, routed through the fundamental tree.
pub fn phi_massive(g: &Graph, kin: &Kinematics) -> Result<MultiPoly> {
    let tree = g.cycle_basis().tree;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let d = route_and_decompose(g, kin, &tree)?;
    let psi = first_symanzik(&Configuration::from_graph(g), PsiMethod::Determinant)?;
    phi_from_decomposition(&d, &psi)
}

/// Minimum of `sum_e a_e q(q_e(x))` over loop momenta, by solving the normal
/// equations exactly.
pub fn quotient_metric(g: &Graph, a: &[Rational], kin: &Kinematics) -> Result<Rational> {
    kin.check(g)?;
    if !kin.space().is_euclidean() {
        return Err(Error::NotEuclidean);
    }
    if !kin.is_massless() {
        return Err(Error::MassiveKinematics);
    }
    if a.len() != g.n_edges() {
        return Err(Error::DimensionMismatch { expected: g.n_edges(), got: a.len() });
    }
    if let Some(e) = a.iter().position(|x| !rational::is_positive(x)) {
        return Err(Error::NonPositiveWeight { edge: e });
    }
    let c = Configuration::from_graph(g);
    let t = g.route(&g.cycle_basis().tree, kin.momenta())?;
    let m = c.matrix_at(a)?;
    let gen = c.genus();
    let dim = kin.space().dim();
    let mut x = vec![vec![Rational::zero(); dim]; gen];
    for d in 0..dim {
        // M x^d = -sum_e a_e t_e^d c_e
        let rhs: Vec<Rational> = (0..gen)
            .map(|i| -(0..g.n_edges()).fold(Rational::zero(), |acc, e| acc + &a[e] * &t[e][d] * &c.basis()[(i, e)]))
            .collect();
        let sol = m.solve(&rhs)?;
        for i in 0..gen {
            x[i][d] = sol[i].clone();
        }
    }
    let q = edge_momenta(&c, &t, &x)?;
    Ok((0..g.n_edges()).fold(Rational::zero(), |acc, e| acc + &a[e] * kin.space().q(&q[e])))
}

/// `psi^{psi_exponent} / phi^{phi_exponent}` with exponents from `(n, g, D)`.
#[derive(Debug, Clone)]
pub struct ParametricIntegrand {
    pub psi: MultiPoly,
    pub phi: MultiPoly,
    pub n_edges: usize,
    pub loops: usize,
    pub dimension: usize,
    /// `n - (g+1) D / 2`
    pub psi_exponent: f64,
    /// `n - g D / 2`
    pub phi_exponent: f64,
    pub log_divergent: bool,
    psi_c: CompiledPoly,
    phi_c: CompiledPoly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exponents {
    pub psi: f64,
    pub phi: f64,
}

impl ParametricIntegrand {
    pub fn exponents(&self) -> Exponents {
        Exponents { psi: self.psi_exponent, phi: self.phi_exponent }
    }

    pub fn evaluate(&self, a: &[f64]) -> f64 {
        let psi = self.psi_c.eval(a);
        let mut v = pow_f(psi, self.psi_exponent);
        if self.phi_exponent != 0.0 {
            v /= pow_f(self.phi_c.eval(a), self.phi_exponent);
        }
        v
    }

    /// Factor turning the simplex expectation of the integrand into the momentum-space
    /// integral of `1 / prod_e f_e` over `R^{Dg}` (Euclidean, `f_e > 0`):
    /// `pi^{Dg/2} Gamma(n - Dg/2) / (n-1)!`. Infinite in the log-divergent case.
    pub fn amplitude_prefactor(&self) -> f64 {
        let half = (self.dimension * self.loops) as f64 / 2.0;
        let s = self.n_edges as f64 - half;
        if s <= 0.0 && s.fract() == 0.0 {
            return f64::INFINITY;
        }
        let fact: f64 = (1..self.n_edges).map(|i| i as f64).product();
        std::f64::consts::PI.powf(half) * gamma(s) / fact
    }
}

fn pow_f(x: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() < 64.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

pub fn parametric_integrand(g: &Graph, dimension: usize, kin: &Kinematics) -> Result<ParametricIntegrand> {
    if dimension == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    let c = Configuration::from_graph(g);
    let psi = first_symanzik(&c, PsiMethod::Determinant)?;
    let phi = phi_massive(g, kin)?;
    let n = g.n_edges();
    let loops = c.genus();
    let psi_exponent = n as f64 - ((loops + 1) * dimension) as f64 / 2.0;
    let phi_exponent = n as f64 - (loops * dimension) as f64 / 2.0;
    Ok(ParametricIntegrand {
        psi_c: psi.compile(),
        phi_c: phi.compile(),
        psi,
        phi,
        n_edges: n,
        loops,
        dimension,
        psi_exponent,
        phi_exponent,
        log_divergent: phi_exponent == 0.0,
    })
}

/// Oscillatory form `exp(i phi/psi) / psi^{D/2}` with prefactor `1/(i (4 pi)^2)^g`,
/// exposed for inspection only.
#[derive(Debug, Clone)]
pub struct ExponentialIntegrand {
    pub prefactor: Complex64,
    pub dimension: usize,
    psi_c: CompiledPoly,
    phi_c: CompiledPoly,
}

impl ExponentialIntegrand {
    pub fn evaluate(&self, a: &[f64]) -> Complex64 {
        let psi = self.psi_c.eval(a);
        let phase = Complex64::new(0.0, self.phi_c.eval(a) / psi).exp();
        phase / psi.powf(self.dimension as f64 / 2.0)
    }
}

pub fn exponential_integrand(integrand: &ParametricIntegrand) -> ExponentialIntegrand {
    let base = Complex64::new(0.0, (4.0 * std::f64::consts::PI).powi(2));
    ExponentialIntegrand {
        prefactor: base.powi(integrand.loops as i32).inv(),
        dimension: integrand.dimension,
        psi_c: integrand.psi_c.clone(),
        phi_c: integrand.phi_c.clone(),
    }
}

/// `int_{R^N} du / (sum_i C_i u_i^2 + L)^n = pi^{N/2} Gamma(n - N/2)/Gamma(n)
/// prod C_i^{-1/2} L^{N/2 - n}` for `C_i, L > 0` and `n > N/2`.
pub fn gaussian_moment(c: &[f64], l: f64, n: f64) -> f64 {
    let big_n = c.len() as f64;
    let prod: f64 = c.iter().map(|x| x.powf(-0.5)).product();
    std::f64::consts::PI.powf(big_n / 2.0) * gamma(n - big_n / 2.0) / gamma(n) * prod * l.powf(big_n / 2.0 - n)
}

/// Chain `1 - 2 - ... - n` with edge `i` oriented towards vertex `i+1`.
pub fn chain_graph(n_vertices: usize) -> Result<Graph> {
    if n_vertices < 2 {
        return Err(Error::EmptyGraph);
    }
    build_graph(&(1..n_vertices as i64).map(|i| (i, i + 1)).collect::<Vec<_>>())
}

/// `1 / prod_i (q(P_i) - mass_sq_i)` with partial sums `P_i = p_1 + ... + p_i`.
pub fn tree_chain_amplitude(n_vertices: usize, kin: &Kinematics) -> Result<Rational> {
    if kin.momenta().len() != n_vertices {
        return Err(Error::DimensionMismatch { expected: n_vertices, got: kin.momenta().len() });
    }
    if kin.mass_sq().len() + 1 != n_vertices {
        return Err(Error::DimensionMismatch { expected: n_vertices - 1, got: kin.mass_sq().len() });
    }
    let dim = kin.space().dim();
    let mut partial = vec![Rational::zero(); dim];
    let mut denom = rational::one();
    for i in 0..n_vertices - 1 {
        for (s, p) in partial.iter_mut().zip(&kin.momenta()[i]) {
            *s += p;
        }
        let f = kin.space().q(&partial) - &kin.mass_sq()[i];
        if f.is_zero() {
            return Err(Error::Pole { edge: i });
        }
        denom *= f;
    }
    Ok(denom.recip())
}

/// `1 / prod_e f_e` at the unique point of the fibre of a tree graph.
pub fn tree_amplitude_direct(g: &Graph, kin: &Kinematics) -> Result<Rational> {
    kin.check(g)?;
    let c = Configuration::from_graph(g);
    if c.genus() != 0 {
        return Err(Error::Inconsistent("graph has loops".into()));
    }
    let tree: Vec<usize> = (0..g.n_edges()).collect();
    let t = g.route(&tree, kin.momenta())?;
    let mut denom = rational::one();
    for (e, te) in t.iter().enumerate() {
        let f = kin.space().q(te) - &kin.mass_sq()[e];
        if f.is_zero() {
            return Err(Error::Pole { edge: e });
        }
        denom *= f;
    }
    Ok(denom.recip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use crate::symanzik::{second_symanzik, PhiMethod};

    fn bubble() -> Graph {
        build_graph(&[(1, 2), (1, 2)]).unwrap()
    }

    fn scalar(ps: &[i64]) -> Vec<Vec<Rational>> {
        ps.iter().map(|&p| vec![int(p)]).collect()
    }

    #[test]
    fn bubble_phi_massless_and_massive() {
        let g = bubble();
        let kin = Kinematics::new(QuadraticSpace::euclidean(1), scalar(&[2, -2]), vec![int(0), int(0)]).unwrap();
        let phi = phi_massive(&g, &kin).unwrap();
        assert_eq!(phi, "4*A1*A2".parse().unwrap());
        let c = Configuration::from_graph(&g);
        assert_eq!(phi, second_symanzik(&c, &kin.momentum_vector(), PhiMethod::BorderedDeterminant).unwrap());
        let massive = Kinematics::new(QuadraticSpace::euclidean(1), scalar(&[1, -1]), vec![int(1), int(2)]).unwrap();
        let expect: MultiPoly = "A1*A2 - A1^2 - 5*A1*A2 - 4*A2^2".parse().unwrap();
        assert_eq!(phi_massive(&g, &massive).unwrap(), expect);
    }

    #[test]
    fn quotient_metric_examples() {
        let g = bubble();
        let kin = Kinematics::new(QuadraticSpace::euclidean(1), scalar(&[1, -1]), vec![int(0), int(0)]).unwrap();
        assert_eq!(quotient_metric(&g, &[int(1), int(1)], &kin).unwrap(), frac(1, 2));
        assert_eq!(quotient_metric(&g, &[int(1), int(3)], &kin).unwrap(), frac(3, 4));
        let zero = Kinematics::new(QuadraticSpace::euclidean(1), scalar(&[0, 0]), vec![int(0), int(0)]).unwrap();
        assert_eq!(quotient_metric(&g, &[int(1), int(3)], &zero).unwrap(), int(0));
        assert_eq!(quotient_metric(&g, &[int(0), int(3)], &kin), Err(Error::NonPositiveWeight { edge: 0 }));
    }

    #[test]
    fn exponents_and_log_divergence() {
        let g = bubble();
        let kin = Kinematics::new(QuadraticSpace::euclidean(1), scalar(&[1, -1]), vec![int(0), int(0)]).unwrap();
        let d2 = parametric_integrand(&g, 2, &kin).unwrap();
        assert_eq!((d2.psi_exponent, d2.phi_exponent, d2.log_divergent), (0.0, 1.0, false));
        let d4 = parametric_integrand(&g, 4, &kin).unwrap();
        assert!(d4.log_divergent);
        assert_eq!(d4.psi_exponent, -2.0);
    }

    #[test]
    fn chain_examples() {
        let kin = Kinematics::new(QuadraticSpace::euclidean(1), scalar(&[2, -2]), vec![int(1)]).unwrap();
        assert_eq!(tree_chain_amplitude(2, &kin).unwrap(), frac(1, 3));
        let kin3 = Kinematics::new(QuadraticSpace::euclidean(1), scalar(&[1, 1, -2]), vec![int(0), int(0)]).unwrap();
        assert_eq!(tree_chain_amplitude(3, &kin3).unwrap(), frac(1, 4));
        assert_eq!(tree_amplitude_direct(&chain_graph(3).unwrap(), &kin3).unwrap(), frac(1, 4));
        let pole = Kinematics::new(QuadraticSpace::euclidean(1), scalar(&[1, -1]), vec![int(1)]).unwrap();
        assert_eq!(tree_chain_amplitude(2, &pole), Err(Error::Pole { edge: 0 }));
    }
}
