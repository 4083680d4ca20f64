//! Integration over the standard simplex `{a_e >= 0, sum a_e = 1}`.
//!
//! Estimates are in expectation form: the mean of the integrand under the uniform
//! (Dirichlet(1, ..., 1)) distribution, so the constant 1 integrates to 1. The Lebesgue
//! integral over the `(n-1)`-simplex is the expectation divided by `(n-1)!`.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PlainMc,
    Stratified,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub method: Method,
    /// False when the estimate looks divergent (variance growing with the sample
    /// count, or the halves of the run disagree).
    pub converged: bool,
}

const CHUNK: usize = 16_384;
const MAX_NODES: usize = 256;

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: usize,
    sum: KahanSum,
    sum_sq: KahanSum,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    fn merge(&mut self, o: &Moments) {
        self.count += o.count;
        self.sum.merge(&o.sum);
        self.sum_sq.merge(&o.sum_sq);
    }

    fn mean(&self) -> f64 {
        self.sum.value() / self.count as f64
    }

    fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let s = self.sum.value();
        ((self.sum_sq.value() - s * s / n) / (n - 1.0)).max(0.0)
    }
}

/// Uniform point of the simplex from `n - 1` uniforms: spacings of the sorted values.
fn simplex_point(uniforms: &mut [f64], out: &mut [f64]) {
    uniforms.sort_unstable_by(f64::total_cmp);
    let mut prev = 0.0;
    for (o, &u) in out.iter_mut().zip(uniforms.iter()) {
        *o = u - prev;
        prev = u;
    }
    out[out.len() - 1] = 1.0 - prev;
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Integrates `f` over the simplex in `n_vars` barycentric coordinates.
pub fn integrate_simplex<F>(n_vars: usize, f: F, method: Method, n_samples: usize, seed: u64) -> Result<IntegralEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if n_samples == 0 {
        return Err(Error::NoSamples);
    }
    if n_vars == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    if n_vars == 1 {
        let value = f(&[1.0]);
        return Ok(IntegralEstimate {
            value,
            std_error: 0.0,
            n_samples,
            seed,
            method,
            converged: value.is_finite(),
        });
    }
    match method {
        Method::PlainMc => Ok(plain_mc(n_vars, &f, n_samples, seed)),
        Method::Stratified => Ok(stratified(n_vars, &f, n_samples, seed)),
        Method::Quadrature => Ok(quadrature(n_vars, &f, n_samples, seed)),
    }
}

fn plain_mc<F: Fn(&[f64]) -> f64 + Sync>(n: usize, f: &F, n_samples: usize, seed: u64) -> IntegralEstimate {
    let cuts = [n_samples / 4, n_samples / 2];
    let n_chunks = n_samples.div_ceil(CHUNK);
    // each chunk reports moments split at the N/4 and N/2 boundaries
    let parts: Vec<[Moments; 3]> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut u = vec![0.0; n - 1];
            let mut a = vec![0.0; n];
            let mut m = [Moments::default(); 3];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                u.iter_mut().for_each(|x| *x = rng.random::<f64>());
                simplex_point(&mut u, &mut a);
                let slot = if i < cuts[0] { 0 } else if i < cuts[1] { 1 } else { 2 };
                m[slot].push(f(&a));
            }
            m
        })
        .collect();
    let mut seg = [Moments::default(); 3];
    for p in &parts {
        for k in 0..3 {
            seg[k].merge(&p[k]);
        }
    }
    let quarter = seg[0];
    let mut half = quarter;
    half.merge(&seg[1]);
    let mut all = half;
    all.merge(&seg[2]);
    let value = all.mean();
    let std_error = (all.variance() / n_samples as f64).sqrt();
    let mut converged = value.is_finite() && std_error.is_finite();
    if n_samples >= 64 && converged {
        let growing = all.variance() > 1.5 * quarter.variance() + f64::MIN_POSITIVE;
        let drift = (value - half.mean()).abs() > 5.0 * std_error;
        converged = !growing && !drift;
    }
    IntegralEstimate { value, std_error, n_samples, seed, method: Method::PlainMc, converged }
}

fn stratified<F: Fn(&[f64]) -> f64 + Sync>(n: usize, f: &F, n_samples: usize, seed: u64) -> IntegralEstimate {
    let n_chunks = n_samples.div_ceil(CHUNK);
    let inv = 1.0 / n_samples as f64;
    // per chunk: sum of values, sums over even/odd strata, sum of squared pair differences
    let parts: Vec<(KahanSum, KahanSum, KahanSum, KahanSum)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut u = vec![0.0; n - 1];
            let mut a = vec![0.0; n];
            let (mut s, mut even, mut odd, mut diff) = Default::default();
            let mut prev = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                u.iter_mut().for_each(|x| *x = rng.random::<f64>());
                u[0] = (i as f64 + u[0]) * inv;
                simplex_point(&mut u, &mut a);
                let v = f(&a);
                KahanSum::add(&mut s, v);
                if i % 2 == 0 {
                    KahanSum::add(&mut even, v);
                    prev = v;
                } else {
                    KahanSum::add(&mut odd, v);
                    KahanSum::add(&mut diff, (v - prev) * (v - prev));
                }
            }
            (s, even, odd, diff)
        })
        .collect();
    let (mut s, mut even, mut odd, mut diff) = (KahanSum::default(), KahanSum::default(), KahanSum::default(), KahanSum::default());
    for p in &parts {
        s.merge(&p.0);
        even.merge(&p.1);
        odd.merge(&p.2);
        diff.merge(&p.3);
    }
    let value = s.value() * inv;
    let pairs = n_samples / 2;
    let std_error = if pairs == 0 { 0.0 } else { diff.value().sqrt() / (2 * pairs) as f64 };
    let mut converged = value.is_finite() && std_error.is_finite();
    if pairs >= 32 && converged {
        let n_even = n_samples.div_ceil(2) as f64;
        let gap = (even.value() / n_even - odd.value() / pairs as f64).abs();
        converged = gap <= 5.0 * 2.0 * std_error.max(f64::MIN_POSITIVE);
    }
    IntegralEstimate { value, std_error, n_samples, seed, method: Method::Stratified, converged }
}

/// Tensor Gauss-Legendre on the cube mapped to the simplex by
/// `a_k = u_k prod_{j<k} (1 - u_j)`; error estimate from halving the rule.
fn quadrature<F: Fn(&[f64]) -> f64 + Sync>(n: usize, f: &F, n_samples: usize, seed: u64) -> IntegralEstimate {
    let dim = n - 1;
    let mut k = (n_samples as f64).powf(1.0 / dim as f64).floor() as usize;
    while k.pow(dim as u32) > n_samples && k > 2 {
        k -= 1;
    }
    let k = k.clamp(2, MAX_NODES);
    let fine = tensor_rule(n, f, k);
    let coarse = tensor_rule(n, f, (k / 2).max(1));
    let std_error = (fine - coarse).abs();
    IntegralEstimate {
        value: fine,
        std_error,
        n_samples: k.pow(dim as u32),
        seed,
        method: Method::Quadrature,
        converged: fine.is_finite() && std_error <= 1e-3 * fine.abs().max(1e-300),
    }
}

fn tensor_rule<F: Fn(&[f64]) -> f64 + Sync>(n: usize, f: &F, k: usize) -> f64 {
    let dim = n - 1;
    let rule = GaussLegendre::new(NonZeroUsize::new(k).expect("k >= 1"));
    let nodes: Vec<(f64, f64)> = rule.as_node_weight_pairs().iter().map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
    let total = k.pow(dim as u32);
    let factorial: f64 = (1..n).map(|i| i as f64).product();
    let sums: Vec<KahanSum> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = KahanSum::default();
            let mut a = vec![0.0; n];
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let mut rest = idx;
                let mut remaining = 1.0;
                let mut weight = 1.0;
                for (d, ad) in a.iter_mut().take(dim).enumerate() {
                    let (u, w) = nodes[rest % k];
                    rest /= k;
                    *ad = remaining * u;
                    weight *= w * (1.0 - u).powi((dim - 1 - d) as i32);
                    remaining *= 1.0 - u;
                }
                a[dim] = remaining;
                acc.add(weight * f(&a));
            }
            acc
        })
        .collect();
    let mut total_sum = KahanSum::default();
    for s in &sums {
        total_sum.merge(s);
    }
    factorial * total_sum.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrates_to_one() {
        for method in [Method::PlainMc, Method::Stratified, Method::Quadrature] {
            for n in 1..5 {
                let e = integrate_simplex(n, |_| 1.0, method, 1000, 1).unwrap();
                assert!((e.value - 1.0).abs() < 1e-12, "{method:?} {n}: {}", e.value);
                assert!(e.std_error < 1e-12);
            }
        }
        assert_eq!(integrate_simplex(2, |_| 1.0, Method::PlainMc, 0, 1), Err(Error::NoSamples));
    }

    #[test]
    fn linear_moment() {
        // E[a_1] = 1/n under the uniform distribution
        for method in [Method::PlainMc, Method::Stratified, Method::Quadrature] {
            let e = integrate_simplex(3, |a| a[0], method, 200_000, 4).unwrap();
            assert!((e.value - 1.0 / 3.0).abs() < 5.0 * e.std_error.max(1e-12), "{method:?} {e:?}");
            assert!(e.converged);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let f = |a: &[f64]| 1.0 / (1.0 + a[0] * a[1]);
        let a = integrate_simplex(3, f, Method::PlainMc, 50_000, 9).unwrap();
        let b = integrate_simplex(3, f, Method::PlainMc, 50_000, 9).unwrap();
        assert_eq!(a, b);
    }
}
