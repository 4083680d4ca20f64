//! Translation-invariant height on `H_g x Row_g x Col_g x C`, nilpotent-orbit points
//! built from graph data, and the string-tension limit `alpha' -> 0`.
//!
//! The height is `4 pi (Im alpha - Im W (Im Omega)^{-1} Im Z)`. The minus sign is the one
//! that makes the value invariant under `W -> W + l1 Omega + l2`, `alpha -> alpha + l1 Z`
//! and `Z -> Z + m1 - Omega m2`, `alpha -> alpha - W m2` for real `l, m`. Along the orbit
//! `z_e = X_e + i Y_e / alpha'` the product `alpha' * height` then tends to
//! `4 pi (S - W M^{-1} Z) = 2 pi * polar(delta, mu; Y) / psi(Y)`, where `polar` is the
//! polarization of the second Symanzik polynomial. So the normalization constant is
//! `kappa = 2 pi`.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::poly;
use crate::rational::{self, Rational};
use crate::symanzik::{polarize_lifted, Configuration, QuadraticSpace};

/// Graph-independent ratio between the tension limit and `polar / psi`.
pub const KAPPA: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct BiextensionPoint {
    pub omega: DMatrix<Complex64>,
    /// row vector
    pub w: DVector<Complex64>,
    /// column vector
    pub z: DVector<Complex64>,
    pub alpha: Complex64,
}

impl BiextensionPoint {
    pub fn zero(g: usize) -> Self {
        Self {
            omega: DMatrix::zeros(g, g),
            w: DVector::zeros(g),
            z: DVector::zeros(g),
            alpha: Complex64::zero(),
        }
    }

    pub fn genus(&self) -> usize {
        self.omega.nrows()
    }

    fn check(&self) -> Result<()> {
        let g = self.genus();
        if self.omega.ncols() != g || self.w.len() != g || self.z.len() != g {
            return Err(Error::DimensionMismatch { expected: g, got: self.w.len().max(self.z.len()) });
        }
        Ok(())
    }
}

fn im_matrix(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    m.map(|c| c.im)
}

fn im_vector(v: &DVector<Complex64>) -> DVector<f64> {
    v.map(|c| c.im)
}

pub fn height_norm(p: &BiextensionPoint) -> Result<f64> {
    p.check()?;
    let im_omega = im_matrix(&p.omega);
    let chol = Cholesky::new(im_omega).ok_or(Error::NotPositiveDefinite)?;
    let im_z = im_vector(&p.z);
    let im_w = im_vector(&p.w);
    let solved = chol.solve(&im_z);
    Ok(4.0 * std::f64::consts::PI * (p.alpha.im - im_w.dot(&solved)))
}

/// Graph data for the nilpotent orbit: the configuration (pencil `M_e = c_e c_e^T`),
/// crossing numbers `u`, `v` of the two divisors with the edges, and the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitData {
    pub config: Configuration,
    pub u: Vec<Rational>,
    pub v: Vec<Rational>,
    pub base: BiextensionPoint,
}

impl OrbitData {
    pub fn new(config: Configuration, u: Vec<Rational>, v: Vec<Rational>, base: BiextensionPoint) -> Result<Self> {
        let n = config.n_edges();
        for x in [&u, &v] {
            if x.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: x.len() });
            }
        }
        base.check()?;
        if base.genus() != config.genus() {
            return Err(Error::DimensionMismatch { expected: config.genus(), got: base.genus() });
        }
        Ok(Self { config, u, v, base })
    }

    /// Crossing numbers from tree routings of two degree-zero vertex divisors, so that
    /// `boundary(u) = delta` and `boundary(v) = mu`.
    pub fn from_graph(g: &Graph, delta: &[Rational], mu: &[Rational], base: BiextensionPoint) -> Result<Self> {
        let tree = g.cycle_basis().tree;
        let route = |d: &[Rational]| -> Result<Vec<Rational>> {
            let w: Vec<Vec<Rational>> = d.iter().map(|x| vec![x.clone()]).collect();
            Ok(g.route(&tree, &w)?.into_iter().map(|t| t[0].clone()).collect())
        };
        Self::new(Configuration::from_graph(g), route(delta)?, route(mu)?, base)
    }

    fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.config.n_edges()).map(|e| self.config.column(e).iter().map(rational::to_f64).collect()).collect()
    }

    /// `polar(delta, mu; Y) / psi(Y)` computed exactly.
    pub fn symanzik_ratio(&self, y: &[Rational]) -> Result<Rational> {
        let space = QuadraticSpace::euclidean(1);
        let lift = |x: &[Rational]| x.iter().map(|v| vec![v.clone()]).collect::<Vec<_>>();
        let polar = polarize_lifted(&self.config, &space, &lift(&self.u), &lift(&self.v))?;
        let psi = self.config.matrix_at(y)?.det()?;
        if psi.is_zero() {
            return Err(Error::Singular);
        }
        Ok(polar.evaluate(y)? / psi)
    }

    /// `S psi - W adj(M) Z` over `psi`, with `M = sum Y_e M_e`, `W = sum Y_e u_e c_e`,
    /// `Z = sum Y_e v_e c_e`, `S = sum Y_e u_e v_e`, using the symbolic adjugate.
    pub fn adjugate_form(&self, y: &[Rational]) -> Result<Rational> {
        let (det, adj) = poly::det_and_adjugate(&self.config.symbolic_matrix())?;
        let psi = det.evaluate(y)?;
        if psi.is_zero() {
            return Err(Error::Singular);
        }
        let g = self.config.genus();
        let n = self.config.n_edges();
        let weighted = |x: &[Rational]| -> Vec<Rational> {
            (0..g)
                .map(|i| (0..n).fold(Rational::zero(), |acc, e| acc + &y[e] * &x[e] * &self.config.basis()[(i, e)]))
                .collect()
        };
        let (w, z) = (weighted(&self.u), weighted(&self.v));
        let s = (0..n).fold(Rational::zero(), |acc, e| acc + &y[e] * &self.u[e] * &self.v[e]);
        let mut quad = Rational::zero();
        for i in 0..g {
            for j in 0..g {
                quad += &w[i] * adj[i][j].evaluate(y)? * &z[j];
            }
        }
        Ok((s * &psi - quad) / psi)
    }

    /// `S - W M^{-1} Z` in binary64 through a Cholesky solve.
    pub fn solve_form(&self, y: &[f64]) -> Result<f64> {
        let cols = self.columns();
        let g = self.config.genus();
        let mut m = DMatrix::<f64>::zeros(g, g);
        let mut w = DVector::<f64>::zeros(g);
        let mut z = DVector::<f64>::zeros(g);
        let mut s = 0.0;
        for (e, c) in cols.iter().enumerate() {
            let (ue, ve) = (rational::to_f64(&self.u[e]), rational::to_f64(&self.v[e]));
            s += y[e] * ue * ve;
            for i in 0..g {
                w[i] += y[e] * ue * c[i];
                z[i] += y[e] * ve * c[i];
                for j in 0..g {
                    m[(i, j)] += y[e] * c[i] * c[j];
                }
            }
        }
        let chol = Cholesky::new(m).ok_or(Error::NotPositiveDefinite)?;
        Ok(s - w.dot(&chol.solve(&z)))
    }
}

/// `Omega_inf + sum z_e M_e`, `W_inf + sum z_e u_e c_e`, `Z_inf + sum z_e v_e c_e`,
/// `alpha_inf + sum z_e u_e v_e`.
pub fn orbit_point(d: &OrbitData, z: &[Complex64]) -> Result<BiextensionPoint> {
    let n = d.config.n_edges();
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: z.len() });
    }
    let g = d.config.genus();
    let mut p = d.base.clone();
    for (e, c) in d.columns().iter().enumerate() {
        let (ue, ve) = (rational::to_f64(&d.u[e]), rational::to_f64(&d.v[e]));
        p.alpha += z[e] * ue * ve;
        for i in 0..g {
            p.w[i] += z[e] * ue * c[i];
            p.z[i] += z[e] * ve * c[i];
            for j in 0..g {
                p.omega[(i, j)] += z[e] * c[i] * c[j];
            }
        }
    }
    if g > 0 && Cholesky::new(im_matrix(&p.omega)).is_none() {
        let cols = d.columns();
        let edge = (0..n)
            .filter(|&e| cols[e].iter().any(|x| *x != 0.0))
            .min_by(|&a, &b| z[a].im.total_cmp(&z[b].im))
            .unwrap_or(0);
        return Err(Error::OrbitNotPositiveDefinite { edge });
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensionReport {
    pub schedule: Vec<f64>,
    pub ratios: Vec<f64>,
    pub fitted_limit: f64,
    pub symanzik_ratio: f64,
    /// `fitted_limit / symanzik_ratio`; absent when the ratio vanishes
    pub kappa: Option<f64>,
    /// least-squares slope of `log |ratio - limit|` against `log alpha'`
    pub error_slope: Option<f64>,
}

/// Evaluates `alpha' * height(orbit(X + i Y / alpha'))` along `schedule` and extrapolates
/// to `alpha' = 0` with Neville's scheme.
pub fn tension_limit(d: &OrbitData, y: &[f64], x: &[f64], schedule: &[f64]) -> Result<TensionReport> {
    let n = d.config.n_edges();
    if y.len() != n || x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len().min(x.len()) });
    }
    if let Some(e) = y.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::NonPositiveWeight { edge: e });
    }
    if schedule.is_empty() {
        return Err(Error::InvalidSchedule("empty".into()));
    }
    if schedule.iter().any(|&a| !(a > 0.0 && a.is_finite())) || schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidSchedule("entries must be positive and strictly decreasing".into()));
    }
    let mut ratios = Vec::with_capacity(schedule.len());
    for &ap in schedule {
        let z: Vec<Complex64> = (0..n).map(|e| Complex64::new(x[e], y[e] / ap)).collect();
        let p = orbit_point(d, &z).map_err(|err| match err {
            Error::OrbitNotPositiveDefinite { edge } => Error::InvalidSchedule(format!(
                "Im(Omega) not positive definite at alpha' = {ap}; shrink alpha' or increase Y on edge {edge}"
            )),
            other => other,
        })?;
        ratios.push(ap * height_norm(&p)?);
    }
    let fitted_limit = neville_at_zero(schedule, &ratios);
    let y_exact: Vec<Rational> = y.iter().map(|&v| rational::from_f64(v)).collect::<Result<_>>()?;
    let symanzik_ratio = rational::to_f64(&d.symanzik_ratio(&y_exact)?);
    let kappa = (symanzik_ratio != 0.0).then(|| fitted_limit / symanzik_ratio);
    let error_slope = slope_fit(schedule, &ratios, fitted_limit);
    Ok(TensionReport { schedule: schedule.to_vec(), ratios, fitted_limit, symanzik_ratio, kappa, error_slope })
}

/// Value at 0 of the interpolating polynomial through `(xs, ys)`.
pub fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i]);
        }
    }
    p[0]
}

fn slope_fit(xs: &[f64], ys: &[f64], limit: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .map(|(&a, &r)| (a.ln(), (r - limit).abs().ln()))
        .filter(|(_, e)| e.is_finite())
        .collect();
    if pts.len() < 2 || pts.len() != xs.len() {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::rational::int;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn height_examples() {
        let p = BiextensionPoint {
            omega: DMatrix::from_element(1, 1, c(0.0, 1.0)),
            w: DVector::from_element(1, c(0.0, 1.0)),
            z: DVector::from_element(1, c(0.0, 1.0)),
            alpha: c(0.0, 1.0),
        };
        assert!(height_norm(&p).unwrap().abs() < 1e-15);
        let mut q = p.clone();
        q.w[0] = c(0.0, 0.0);
        q.alpha = c(3.0, 0.0);
        assert_eq!(height_norm(&q).unwrap(), 0.0);
        let r = BiextensionPoint {
            omega: DMatrix::from_diagonal_element(2, 2, c(0.0, 1.0)),
            w: DVector::from_vec(vec![c(0.0, 1.0), c(0.0, 0.0)]),
            z: DVector::from_vec(vec![c(0.0, 0.0), c(0.0, 1.0)]),
            alpha: c(0.0, 0.0),
        };
        assert_eq!(height_norm(&r).unwrap(), 0.0);
        let mut bad = p;
        bad.omega[(0, 0)] = c(0.0, -1.0);
        assert_eq!(height_norm(&bad), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn bubble_orbit() {
        let g = build_graph(&[(1, 2), (1, 2)]).unwrap();
        let d = OrbitData::from_graph(&g, &[int(1), int(-1)], &[int(1), int(-1)], BiextensionPoint::zero(1)).unwrap();
        let p = orbit_point(&d, &[c(0.0, 5.0), c(0.0, 5.0)]).unwrap();
        assert_eq!(p.omega[(0, 0)], c(0.0, 10.0));
        let mut base = BiextensionPoint::zero(1);
        base.omega[(0, 0)] = c(0.5, 2.0);
        base.alpha = c(1.0, -1.0);
        let based = OrbitData { base: base.clone(), ..d.clone() };
        assert_eq!(orbit_point(&based, &[c(0.0, 0.0); 2]).unwrap(), base);
        let u = OrbitData::new(d.config.clone(), vec![int(1), int(0)], vec![int(0), int(1)], BiextensionPoint::zero(1)).unwrap();
        let q = orbit_point(&u, &[c(0.3, 2.0), c(0.1, 7.0)]).unwrap();
        assert_eq!(q.alpha, c(0.0, 0.0));
        assert!(matches!(orbit_point(&d, &[c(0.0, -1.0), c(0.0, -1.0)]), Err(Error::OrbitNotPositiveDefinite { .. })));
    }

    #[test]
    fn neville_recovers_polynomials() {
        let xs = [0.1, 0.01, 0.001];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 + 3.0 * x - x * x).collect();
        assert!((neville_at_zero(&xs, &ys) - 2.0).abs() < 1e-12);
    }
}
