//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Terms are kept in graded-lexicographic order keyed by dense exponent vectors, so equal
//! polynomials over the same variable list have identical term maps. Binary operations
//! on polynomials with different variable lists work over the union of the lists (left
//! operand's names first).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Exponent vector ordered by total degree, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, Rational>,
}

/// Standard edge-variable names `A1..An`.
pub fn edge_vars(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("A{k}")).collect()
}

fn union_vars(a: &[String], b: &[String]) -> Vec<String> {
    let mut out = a.to_vec();
    for v in b {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

impl MultiPoly {
    pub fn zero(vars: &[String]) -> Self {
        Self { vars: vars.to_vec(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &[String], c: Rational) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(Monomial(vec![0; vars.len()]), c);
        p
    }

    pub fn one(vars: &[String]) -> Self {
        Self::constant(vars, Rational::one())
    }

    /// The variable with index `i`.
    pub fn var(vars: &[String], i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        let mut p = Self::zero(vars);
        p.add_term(Monomial(e), Rational::one());
        p
    }

    /// Linear form `sum_i c_i * var_i`.
    pub fn linear(vars: &[String], coeffs: &[Rational]) -> Self {
        let mut p = Self::zero(vars);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; vars.len()];
            e[i] = 1;
            p.add_term(Monomial(e), c.clone());
        }
        p
    }

    pub fn from_terms(vars: &[String], terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Result<Self> {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(Error::DimensionMismatch { expected: vars.len(), got: e.len() });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: &[u32]) -> Rational {
        self.terms.get(&Monomial(exps.to_vec())).cloned().unwrap_or_else(Rational::zero)
    }

    /// The constant value if the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    /// Common degree of all terms; `None` for zero or mixed-degree polynomials.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(Monomial::degree);
        let d = degs.next()?;
        degs.all(|x| x == d).then_some(d)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Re-expresses the polynomial over `vars`, which must contain every variable that
    /// actually occurs.
    pub fn with_vars(&self, vars: &[String]) -> Result<Self> {
        let map: Vec<Option<usize>> = self.vars.iter().map(|v| vars.iter().position(|w| w == v)).collect();
        let mut out = Self::zero(vars);
        for (m, c) in &self.terms {
            let mut e = vec![0; vars.len()];
            for (i, &k) in m.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                match map[i] {
                    Some(j) => e[j] = k,
                    None => return Err(Error::PolyParse(format!("variable {} not in target list", self.vars[i]))),
                }
            }
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    fn aligned(&self, other: &MultiPoly) -> (MultiPoly, MultiPoly) {
        if self.vars == other.vars {
            return (self.clone(), other.clone());
        }
        let vars = union_vars(&self.vars, &other.vars);
        (self.with_vars(&vars).expect("superset"), other.with_vars(&vars).expect("superset"))
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        if self.vars != other.vars {
            let (a, b) = self.aligned(other);
            return a.add(&b);
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MultiPoly {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, s: &Rational) -> MultiPoly {
        if s.is_zero() {
            return Self::zero(&self.vars);
        }
        Self { vars: self.vars.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        if self.vars != other.vars {
            let (a, b) = self.aligned(other);
            return a.mul(&b);
        }
        let mut out = Self::zero(&self.vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let e = m1.0.iter().zip(&m2.0).map(|(a, b)| a + b).collect();
                out.add_term(Monomial(e), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        (0..k).fold(Self::one(&self.vars), |acc, _| acc.mul(self))
    }

    pub fn derivative(&self, i: usize) -> MultiPoly {
        let mut out = Self::zero(&self.vars);
        for (m, c) in &self.terms {
            let k = m.0[i];
            if k == 0 {
                continue;
            }
            let mut e = m.0.clone();
            e[i] -= 1;
            out.add_term(Monomial(e), c * rational::int(k as i64));
        }
        out
    }

    /// Mixed partial derivative with respect to each listed variable once.
    pub fn partial(&self, vars: &[usize]) -> MultiPoly {
        vars.iter().fold(self.clone(), |p, &i| p.derivative(i))
    }

    /// Substitutes `var_i := value` (the variable stays in the variable list).
    pub fn substitute(&self, i: usize, value: &Rational) -> MultiPoly {
        let mut out = Self::zero(&self.vars);
        for (m, c) in &self.terms {
            let k = m.0[i];
            let mut e = m.0.clone();
            e[i] = 0;
            out.add_term(Monomial(e), c * pow_rat(value, k));
        }
        out
    }

    /// Substitutes a polynomial for `var_i`.
    pub fn compose(&self, i: usize, value: &MultiPoly) -> MultiPoly {
        let (base, value) = self.aligned(value);
        let mut out = MultiPoly::zero(&base.vars);
        for (m, c) in &base.terms {
            let k = m.0[i];
            let mut e = m.0.clone();
            e[i] = 0;
            let mut t = MultiPoly::zero(&base.vars);
            t.add_term(Monomial(e), c.clone());
            out = out.add(&t.mul(&value.pow(k)));
        }
        out
    }

    pub fn evaluate(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.vars.len() {
            return Err(Error::DimensionMismatch { expected: self.vars.len(), got: point.len() });
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(&m.0) {
                if k > 0 {
                    t *= pow_rat(x, k);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Exact division; fails unless `divisor` divides `self`.
    pub fn div_exact(&self, divisor: &MultiPoly) -> Result<MultiPoly> {
        if divisor.is_zero() {
            return Err(Error::InexactDivision);
        }
        let (mut rem, d) = self.aligned(divisor);
        let (lm_d, lc_d) = d.terms.iter().next_back().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let mut quot = MultiPoly::zero(&rem.vars);
        while let Some((lm, lc)) = rem.terms.iter().next_back().map(|(m, c)| (m.clone(), c.clone())) {
            if !lm_d.divides(&lm) {
                return Err(Error::InexactDivision);
            }
            let e: Vec<u32> = lm.0.iter().zip(&lm_d.0).map(|(a, b)| a - b).collect();
            let mut t = MultiPoly::zero(&rem.vars);
            t.add_term(Monomial(e), lc / &lc_d);
            rem = rem.sub(&t.mul(&d));
            quot = quot.add(&t);
        }
        Ok(quot)
    }

    /// Evaluator in binary64 for hot loops.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            n_vars: self.vars.len(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let powers = m.0.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k as i32)).collect();
                    (rational::to_f64(c), powers)
                })
                .collect(),
        }
    }

    /// Parses using the given variable list; unknown names are an error.
    pub fn parse_with_vars(s: &str, vars: &[String]) -> Result<Self> {
        let p: MultiPoly = s.parse()?;
        p.with_vars(vars)
    }
}

pub fn pow_rat(x: &Rational, k: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        if self.vars == other.vars {
            return self.terms == other.terms;
        }
        let (a, b) = self.aligned(other);
        a.terms == b.terms
    }
}

impl Eq for MultiPoly {}

impl fmt::Display for MultiPoly {
    /// Descending graded-lex terms `c*A1^i1*A2^i2` joined by `" + "`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::with_capacity(self.terms.len());
        for (m, c) in self.terms.iter().rev() {
            let factors: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { self.vars[i].clone() } else { format!("{}^{}", self.vars[i], k) })
                .collect();
            let s = if factors.is_empty() {
                rational::format(c)
            } else if c.is_one() {
                factors.join("*")
            } else if *c == -Rational::one() {
                format!("-{}", factors.join("*"))
            } else {
                format!("{}*{}", rational::format(c), factors.join("*"))
            };
            parts.push(s);
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl FromStr for MultiPoly {
    type Err = Error;

    /// Accepts the output of `Display` plus ` - ` subtraction; variables are collected in
    /// order of first appearance.
    fn from_str(s: &str) -> Result<Self> {
        let err = |m: &str| Error::PolyParse(format!("{m} in {s:?}"));
        let mut terms_src: Vec<String> = Vec::new();
        let mut cur = String::new();
        let mut prev_sig: Option<char> = None;
        for ch in s.chars() {
            match ch {
                '+' => {
                    terms_src.push(std::mem::take(&mut cur));
                    prev_sig = Some('+');
                }
                '-' if matches!(prev_sig, Some(c) if c.is_ascii_alphanumeric() || c == '_') => {
                    terms_src.push(std::mem::take(&mut cur));
                    cur.push('-');
                    prev_sig = Some('-');
                }
                c if c.is_whitespace() => {}
                c => {
                    cur.push(c);
                    prev_sig = Some(c);
                }
            }
        }
        terms_src.push(cur);
        let mut vars: Vec<String> = Vec::new();
        let mut raw: Vec<(Vec<(usize, u32)>, Rational)> = Vec::new();
        for t in &terms_src {
            if t.is_empty() {
                return Err(err("empty term"));
            }
            let (neg, body) = match t.strip_prefix('-') {
                Some(r) => (true, r),
                None => (false, t.as_str()),
            };
            let mut coeff = Rational::one();
            let mut powers = Vec::new();
            for factor in body.split('*') {
                if factor.is_empty() {
                    return Err(err("empty factor"));
                }
                if factor.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
                    coeff *= rational::parse(factor).map_err(|_| err("bad coefficient"))?;
                    continue;
                }
                let (name, exp) = match factor.split_once('^') {
                    Some((n, e)) => (n, e.parse::<u32>().map_err(|_| err("bad exponent"))?),
                    None => (factor, 1),
                };
                let valid = name.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
                    && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                if !valid {
                    return Err(err("bad variable name"));
                }
                let idx = match vars.iter().position(|v| v == name) {
                    Some(i) => i,
                    None => {
                        vars.push(name.to_string());
                        vars.len() - 1
                    }
                };
                powers.push((idx, exp));
            }
            raw.push((powers, if neg { -coeff } else { coeff }));
        }
        let mut p = MultiPoly::zero(&vars);
        for (powers, c) in raw {
            let mut e = vec![0; vars.len()];
            for (i, k) in powers {
                e[i] += k;
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }
}

/// Binary64 evaluator produced by [`MultiPoly::compile`].
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    n_vars: usize,
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, pw)| pw.iter().fold(*c, |acc, &(i, k)| acc * if k == 1 { x[i] } else { x[i].powi(k) }))
            .sum()
    }
}

/// Square matrix of polynomials, stored by rows.
pub type PolyMatrix = Vec<Vec<MultiPoly>>;

fn check_square(m: &PolyMatrix) -> Result<usize> {
    let n = m.len();
    if let Some(r) = m.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare { rows: n, cols: r.len() });
    }
    Ok(n)
}

fn common_vars(m: &PolyMatrix) -> Vec<String> {
    m.iter().flatten().fold(Vec::new(), |acc, p| union_vars(&acc, p.vars()))
}

fn align_matrix(m: &PolyMatrix, vars: &[String]) -> PolyMatrix {
    m.iter().map(|r| r.iter().map(|p| p.with_vars(vars).expect("superset")).collect()).collect()
}

fn minor(m: &PolyMatrix, skip_r: usize, skip_c: usize) -> PolyMatrix {
    m.iter()
        .enumerate()
        .filter(|&(i, _)| i != skip_r)
        .map(|(_, r)| r.iter().enumerate().filter(|&(j, _)| j != skip_c).map(|(_, p)| p.clone()).collect())
        .collect()
}

fn cofactor_rec(m: &PolyMatrix, vars: &[String]) -> MultiPoly {
    let n = m.len();
    match n {
        0 => MultiPoly::one(vars),
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        _ => {
            let mut acc = MultiPoly::zero(vars);
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let t = m[0][j].mul(&cofactor_rec(&minor(m, 0, j), vars));
                acc = if j % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
            }
            acc
        }
    }
}

/// Laplace expansion along the first row.
pub fn det_cofactor(m: &PolyMatrix) -> Result<MultiPoly> {
    check_square(m)?;
    let vars = common_vars(m);
    Ok(cofactor_rec(&align_matrix(m, &vars), &vars))
}

/// Fraction-free Bareiss elimination with exact polynomial division.
pub fn det_bareiss(m: &PolyMatrix) -> Result<MultiPoly> {
    let n = check_square(m)?;
    let vars = common_vars(m);
    let mut a = align_matrix(m, &vars);
    if n == 0 {
        return Ok(MultiPoly::one(&vars));
    }
    let mut prev = MultiPoly::one(&vars);
    let mut negate = false;
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    negate = !negate;
                }
                None => return Ok(MultiPoly::zero(&vars)),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[k][k].mul(&a[i][j]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = num.div_exact(&prev)?;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Ok(if negate { d.neg() } else { d })
}

/// Cofactor expansion below 4x4, Bareiss from 4x4 on.
pub fn determinant(m: &PolyMatrix) -> Result<MultiPoly> {
    if check_square(m)? < 4 {
        det_cofactor(m)
    } else {
        det_bareiss(m)
    }
}

/// Determinant and adjugate (transpose of the cofactor matrix).
pub fn det_and_adjugate(m: &PolyMatrix) -> Result<(MultiPoly, PolyMatrix)> {
    let n = check_square(m)?;
    let vars = common_vars(m);
    let a = align_matrix(m, &vars);
    let det = determinant(&a)?;
    let mut adj = vec![vec![MultiPoly::zero(&vars); n]; n];
    if n == 1 {
        adj[0][0] = MultiPoly::one(&vars);
    } else {
        for i in 0..n {
            for j in 0..n {
                let c = determinant(&minor(&a, i, j))?.with_vars(&vars)?;
                adj[j][i] = if (i + j) % 2 == 0 { c } else { c.neg() };
            }
        }
    }
    Ok((det.with_vars(&vars)?, adj))
}

pub fn mat_mul(a: &PolyMatrix, b: &PolyMatrix) -> Result<PolyMatrix> {
    let inner = b.len();
    if a.iter().any(|r| r.len() != inner) {
        return Err(Error::DimensionMismatch { expected: inner, got: a.first().map_or(0, |r| r.len()) });
    }
    let cols = b.first().map_or(0, |r| r.len());
    let vars = union_vars(&common_vars(a), &common_vars(b));
    Ok(a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(MultiPoly::zero(&vars), |acc, k| acc.add(&row[k].mul(&b[k][j]))))
                .collect()
        })
        .collect())
}
