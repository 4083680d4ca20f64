//! Configurations `H ⊂ Q^E`, their rank-one pencils and the first and second Symanzik
//! polynomials.
//!
//! Sign convention for the second polynomial: `phi` is `psi` of the enlarged
//! configuration spanned by `H` and a lift of `w`. For a lift `t` this expands to
//! `S * psi - sum_ij adj(M)_ij <W_i, W_j>` with `S = sum_e A_e q(t_e)` and
//! `W_i = sum_e A_e c_{e,i} t_e`, so `phi / psi` is the minimum of `sum_e A_e q(x_e)`
//! over lifts `x` of `w` when `q` is positive definite.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::QMatrix;
use crate::poly::{self, MultiPoly, PolyMatrix};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    basis: QMatrix,
    vars: Vec<String>,
    graph: Option<Graph>,
}

/// `M_e = c_e c_e^T` for every column `c_e` of the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOnePencil {
    pub matrices: Vec<QMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiMethod {
    Determinant,
    SpanningTree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiMethod {
    EnlargedConfig,
    BorderedDeterminant,
}

impl Configuration {
    /// `basis` is `g x n` with full row rank; `vars` names the columns.
    pub fn new(basis: QMatrix, vars: Vec<String>) -> Result<Self> {
        if vars.len() != basis.cols() {
            return Err(Error::DimensionMismatch { expected: basis.cols(), got: vars.len() });
        }
        if basis.rank() != basis.rows() {
            return Err(Error::RankDeficient);
        }
        Ok(Self { basis, vars, graph: None })
    }

    /// `H = H_1(G)` with the fundamental cycle basis.
    pub fn from_graph(g: &Graph) -> Self {
        let cb = g.cycle_basis();
        let basis = QMatrix::from_i64_rows(&cb.rows, g.n_edges()).expect("rows have |E| entries");
        Self { basis, vars: g.edge_names().to_vec(), graph: Some(g.clone()) }
    }

    /// Replaces the basis by `u * basis` for an invertible `g x g` matrix `u`.
    pub fn change_basis(&self, u: &QMatrix) -> Result<Self> {
        if u.rows() != self.genus() || u.cols() != self.genus() {
            return Err(Error::DimensionMismatch { expected: self.genus(), got: u.rows() });
        }
        if u.det()?.is_zero() {
            return Err(Error::Singular);
        }
        Ok(Self { basis: u.mul(&self.basis)?, vars: self.vars.clone(), graph: self.graph.clone() })
    }

    pub fn genus(&self) -> usize {
        self.basis.rows()
    }

    pub fn n_edges(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &QMatrix {
        &self.basis
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn graph(&self) -> Option<&Graph> {
        self.graph.as_ref()
    }

    /// Column `c_e`: the functional `e^∨` in basis coordinates.
    pub fn column(&self, e: usize) -> Vec<Rational> {
        self.basis.column(e)
    }

    /// `sum_e a_e M_e` at a numeric point.
    pub fn matrix_at(&self, a: &[Rational]) -> Result<QMatrix> {
        if a.len() != self.n_edges() {
            return Err(Error::DimensionMismatch { expected: self.n_edges(), got: a.len() });
        }
        let g = self.genus();
        let mut m = QMatrix::zeros(g, g);
        for (e, ae) in a.iter().enumerate() {
            if ae.is_zero() {
                continue;
            }
            let c = self.column(e);
            for i in 0..g {
                if c[i].is_zero() {
                    continue;
                }
                for j in 0..g {
                    m[(i, j)] += ae * &c[i] * &c[j];
                }
            }
        }
        Ok(m)
    }

    /// `M = sum_e A_e M_e` with symbolic `A_e`.
    pub fn symbolic_matrix(&self) -> PolyMatrix {
        let g = self.genus();
        (0..g)
            .map(|i| {
                (0..g)
                    .map(|j| {
                        let coeffs: Vec<Rational> =
                            (0..self.n_edges()).map(|e| &self.basis[(i, e)] * &self.basis[(j, e)]).collect();
                        MultiPoly::linear(&self.vars, &coeffs)
                    })
                    .collect()
            })
            .collect()
    }

    /// `W_i = sum_e A_e c_{e,i} t_e` for a scalar edge chain `t`.
    fn coupling(&self, t: &[Rational]) -> Vec<MultiPoly> {
        (0..self.genus())
            .map(|i| {
                let coeffs: Vec<Rational> = (0..self.n_edges()).map(|e| &self.basis[(i, e)] * &t[e]).collect();
                MultiPoly::linear(&self.vars, &coeffs)
            })
            .collect()
    }

    /// Lift of a degree-zero vertex assignment to an edge chain, routed through the
    /// fundamental spanning forest.
    pub fn lift(&self, w: &MomentumVector) -> Result<Vec<Vec<Rational>>> {
        let g = self.graph.as_ref().ok_or(Error::NotAGraph)?;
        g.route(&g.cycle_basis().tree, &w.values)
    }
}

pub fn pencil(c: &Configuration) -> RankOnePencil {
    let g = c.genus();
    let matrices = (0..c.n_edges())
        .map(|e| {
            let col = c.column(e);
            let mut m = QMatrix::zeros(g, g);
            for i in 0..g {
                for j in 0..g {
                    m[(i, j)] = &col[i] * &col[j];
                }
            }
            m
        })
        .collect();
    RankOnePencil { matrices }
}

pub fn first_symanzik(c: &Configuration, method: PsiMethod) -> Result<MultiPoly> {
    match method {
        PsiMethod::Determinant => poly::determinant(&c.symbolic_matrix())?.with_vars(&c.vars),
        PsiMethod::SpanningTree => {
            let g = c.graph.as_ref().ok_or(Error::NotAGraph)?;
            let n = g.n_edges();
            let mut psi = MultiPoly::zero(&c.vars);
            for tree in g.spanning_trees()? {
                let mut e = vec![1u32; n];
                for t in tree {
                    e[t] = 0;
                }
                psi = psi.add(&MultiPoly::from_terms(&c.vars, [(e, rational::one())])?);
            }
            Ok(psi)
        }
    }
}

/// Real quadratic form `sum_d sig_d v_d^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticSpace {
    signature: Vec<i8>,
}

impl QuadraticSpace {
    pub fn new(signature: Vec<i8>) -> Result<Self> {
        if let Some(&s) = signature.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidSignature(s));
        }
        Ok(Self { signature })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self { signature: vec![1; dim] }
    }

    /// `(+, -, ..., -)`.
    pub fn minkowski(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::NotMinkowski);
        }
        let mut signature = vec![-1; dim];
        signature[0] = 1;
        Ok(Self { signature })
    }

    pub fn dim(&self) -> usize {
        self.signature.len()
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn is_euclidean(&self) -> bool {
        self.signature.iter().all(|&s| s == 1)
    }

    pub fn is_minkowski(&self) -> bool {
        self.dim() >= 2 && self.signature[0] == 1 && self.signature[1..].iter().all(|&s| s == -1)
    }

    pub fn bilinear(&self, v: &[Rational], w: &[Rational]) -> Rational {
        self.signature
            .iter()
            .zip(v.iter().zip(w))
            .fold(Rational::zero(), |acc, (&s, (a, b))| if s == 1 { acc + a * b } else { acc - a * b })
    }

    pub fn q(&self, v: &[Rational]) -> Rational {
        self.bilinear(v, v)
    }

    pub fn bilinear_f64(&self, v: &[f64], w: &[f64]) -> f64 {
        self.signature.iter().zip(v.iter().zip(w)).map(|(&s, (a, b))| s as f64 * a * b).sum()
    }
}

/// Degree-zero assignment of vectors in a quadratic space to the vertices of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumVector {
    space: QuadraticSpace,
    values: Vec<Vec<Rational>>,
}

impl MomentumVector {
    pub fn new(space: QuadraticSpace, values: Vec<Vec<Rational>>) -> Result<Self> {
        let d = space.dim();
        if let Some(v) = values.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
        for k in 0..d {
            if !values.iter().fold(Rational::zero(), |acc, v| acc + &v[k]).is_zero() {
                return Err(Error::NotDegreeZero { component: 0 });
            }
        }
        Ok(Self { space, values })
    }

    /// One-dimensional Euclidean momenta.
    pub fn scalar(values: &[Rational]) -> Result<Self> {
        Self::new(QuadraticSpace::euclidean(1), values.iter().map(|v| vec![v.clone()]).collect())
    }

    pub fn zero(space: QuadraticSpace, n_vertices: usize) -> Self {
        let d = space.dim();
        Self { space, values: vec![vec![Rational::zero(); d]; n_vertices] }
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn add(&self, other: &MomentumVector) -> Result<MomentumVector> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        if self.values.len() != other.values.len() {
            return Err(Error::DimensionMismatch { expected: self.values.len(), got: other.values.len() });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(Self { space: self.space.clone(), values })
    }
}

pub fn second_symanzik(c: &Configuration, w: &MomentumVector, method: PhiMethod) -> Result<MultiPoly> {
    let t = c.lift(w)?;
    match method {
        PhiMethod::EnlargedConfig => {
            if w.space.dim() != 1 || !w.space.is_euclidean() {
                return Err(Error::NotScalar);
            }
            let scalar: Vec<Rational> = t.iter().map(|v| v[0].clone()).collect();
            enlarged_phi(c, &scalar)
        }
        PhiMethod::BorderedDeterminant => second_symanzik_lifted(c, &w.space, &t),
    }
}

/// `psi` of the configuration spanned by the basis rows and one extra scalar row.
fn enlarged_phi(c: &Configuration, t: &[Rational]) -> Result<MultiPoly> {
    let mut rows = c.basis.to_rows();
    rows.push(t.to_vec());
    let enlarged = QMatrix::from_rows(rows, c.n_edges())?;
    // a lift inside H gives a degenerate enlargement, whose Gram determinant is 0
    let cfg = Configuration { basis: enlarged, vars: c.vars.clone(), graph: None };
    first_symanzik(&cfg, PsiMethod::Determinant)
}

/// `phi` for an explicit lift `t` (one vector per edge), as the signed sum over
/// coordinates of bordered determinants `det [[M, W^d], [W^d^T, S^d]]`.
pub fn second_symanzik_lifted(c: &Configuration, space: &QuadraticSpace, t: &[Vec<Rational>]) -> Result<MultiPoly> {
    if t.len() != c.n_edges() {
        return Err(Error::DimensionMismatch { expected: c.n_edges(), got: t.len() });
    }
    if let Some(v) = t.iter().find(|v| v.len() != space.dim()) {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: v.len() });
    }
    let m = c.symbolic_matrix();
    let g = c.genus();
    let mut phi = MultiPoly::zero(&c.vars);
    for (d, &sig) in space.signature.iter().enumerate() {
        let td: Vec<Rational> = t.iter().map(|v| v[d].clone()).collect();
        if td.iter().all(Zero::is_zero) {
            continue;
        }
        let w = c.coupling(&td);
        let sq: Vec<Rational> = td.iter().map(|x| x * x).collect();
        let s = MultiPoly::linear(&c.vars, &sq);
        let mut bordered: PolyMatrix = m.clone();
        for (i, row) in bordered.iter_mut().enumerate() {
            row.push(w[i].clone());
        }
        let mut last = w.clone();
        last.push(s);
        bordered.push(last);
        debug_assert_eq!(bordered.len(), g + 1);
        let det = poly::determinant(&bordered)?.with_vars(&c.vars)?;
        phi = if sig == 1 { phi.add(&det) } else { phi.sub(&det) };
    }
    Ok(phi)
}

/// `phi(w + w') - phi(w) - phi(w')`.
pub fn polarize(c: &Configuration, w: &MomentumVector, w2: &MomentumVector) -> Result<MultiPoly> {
    let sum = w.add(w2)?;
    let f = |x: &MomentumVector| second_symanzik(c, x, PhiMethod::BorderedDeterminant);
    Ok(f(&sum)?.sub(&f(w)?).sub(&f(w2)?))
}

/// Polarization for explicit lifts.
pub fn polarize_lifted(
    c: &Configuration,
    space: &QuadraticSpace,
    t: &[Vec<Rational>],
    t2: &[Vec<Rational>],
) -> Result<MultiPoly> {
    if t.len() != t2.len() {
        return Err(Error::DimensionMismatch { expected: t.len(), got: t2.len() });
    }
    let sum: Vec<Vec<Rational>> = t.iter().zip(t2).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect();
    let f = |x: &[Vec<Rational>]| second_symanzik_lifted(c, space, x);
    Ok(f(&sum)?.sub(&f(t)?).sub(&f(t2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::rational::int;

    fn bubble() -> Configuration {
        Configuration::from_graph(&build_graph(&[(1, 2), (1, 2)]).unwrap())
    }

    fn p(s: &str) -> MultiPoly {
        s.parse().unwrap()
    }

    #[test]
    fn pencil_examples() {
        let pb = pencil(&bubble());
        assert!(pb.matrices.iter().all(|m| m[(0, 0)] == int(1)));
        let tri = Configuration::from_graph(&build_graph(&[(1, 2), (2, 3), (3, 1)]).unwrap());
        assert!(pencil(&tri).matrices.iter().all(|m| m[(0, 0)] == int(1)));
    }

    #[test]
    fn psi_examples() {
        let b = bubble();
        assert_eq!(first_symanzik(&b, PsiMethod::Determinant).unwrap(), p("A1 + A2"));
        assert_eq!(first_symanzik(&b, PsiMethod::SpanningTree).unwrap(), p("A1 + A2"));
        let chain = Configuration::from_graph(&build_graph(&[(1, 2), (2, 3)]).unwrap());
        let one = first_symanzik(&chain, PsiMethod::Determinant).unwrap();
        assert_eq!(one.as_constant(), Some(int(1)));
        let bare = Configuration::new(b.basis().clone(), b.vars().to_vec()).unwrap();
        assert_eq!(first_symanzik(&bare, PsiMethod::SpanningTree), Err(Error::NotAGraph));
    }

    #[test]
    fn phi_examples() {
        let b = bubble();
        let w = MomentumVector::scalar(&[int(3), int(-3)]).unwrap();
        let expect = p("9*A1*A2");
        assert_eq!(second_symanzik(&b, &w, PhiMethod::EnlargedConfig).unwrap(), expect);
        assert_eq!(second_symanzik(&b, &w, PhiMethod::BorderedDeterminant).unwrap(), expect);
        let zero = MomentumVector::scalar(&[int(0), int(0)]).unwrap();
        assert!(second_symanzik(&b, &zero, PhiMethod::EnlargedConfig).unwrap().is_zero());
        assert!(matches!(MomentumVector::scalar(&[int(1), int(0)]), Err(Error::NotDegreeZero { .. })));
        let unit = MomentumVector::scalar(&[int(1), int(-1)]).unwrap();
        assert_eq!(polarize(&b, &unit, &unit).unwrap(), p("2*A1*A2"));
        assert!(polarize(&b, &unit, &zero).unwrap().is_zero());
    }
}
