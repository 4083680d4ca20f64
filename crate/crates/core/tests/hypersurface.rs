use kirchhoff::corpus;
use kirchhoff::graph::build_graph;
use kirchhoff::hypersurface::{
    corank_at, epsilon_beta, jump_locus, loop_partitions, multiplicity_at, patterson_scan, ProjPoint,
};
use kirchhoff::linalg::rank_of;
use kirchhoff::poly::MultiPoly;
use kirchhoff::rational::{self, frac, Rational};
use kirchhoff::symanzik::{first_symanzik, Configuration, PsiMethod};
use kirchhoff::Error;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(name: &str) -> Configuration {
    Configuration::from_graph(&corpus::builtin(name).unwrap())
}

/// Order of vanishing at `a`: lowest total degree of `psi(a + T)`.
fn taylor_multiplicity(psi: &MultiPoly, a: &[Rational]) -> usize {
    let mut shifted = psi.clone();
    for (i, ai) in a.iter().enumerate() {
        let v = MultiPoly::var(psi.vars(), i).add(&MultiPoly::constant(psi.vars(), ai.clone()));
        shifted = shifted.compose(i, &v);
    }
    shifted.terms().map(|(m, _)| m.degree() as usize).min().unwrap_or(usize::MAX)
}

#[test]
fn corank_and_multiplicity_examples() {
    let bubble = Configuration::from_graph(&build_graph(&[(1, 2), (1, 2)]).unwrap());
    let on = ProjPoint::from_i64(&[1, -1]).unwrap();
    let off = ProjPoint::from_i64(&[1, 1]).unwrap();
    assert_eq!(corank_at(&bubble, &on).unwrap(), 1);
    assert_eq!(corank_at(&bubble, &off).unwrap(), 0);
    assert_eq!(multiplicity_at(&bubble, &on).unwrap(), 1);
    assert_eq!(multiplicity_at(&bubble, &off).unwrap(), 0);
    let db = config("double_bubble");
    let p = ProjPoint::from_i64(&[1, -1, 1, -1]).unwrap();
    assert_eq!(corank_at(&db, &p).unwrap(), 2);
    assert_eq!(multiplicity_at(&db, &p).unwrap(), 2);
    assert!(matches!(ProjPoint::from_i64(&[0, 0]), Err(Error::ZeroPoint)));
    assert!(corank_at(&db, &on).is_err());
}

#[test]
fn patterson_examples() {
    let bubble = Configuration::from_graph(&build_graph(&[(1, 2), (1, 2)]).unwrap());
    let r = patterson_scan(&bubble, 10, 0).unwrap();
    assert_eq!(r.samples.len(), 10);
    assert!(r.all_match);
    assert!(r.samples.iter().all(|s| s.corank == 1 && s.multiplicity == 1));

    let r = patterson_scan(&config("wheel3"), 100, 7).unwrap();
    assert_eq!(r.samples.len(), 100);
    assert!(r.all_match);

    let tree = patterson_scan(&config("chain4"), 10, 0).unwrap();
    assert!(tree.samples.is_empty());
    assert!(tree.diagnostic.unwrap().contains("X_G empty"));
}

#[test]
fn patterson_samples_agree_with_taylor_oracle() {
    for name in ["wheel3", "wheel4", "double_bubble", "banana4"] {
        let c = config(name);
        let psi = first_symanzik(&c, PsiMethod::Determinant).unwrap();
        let r = patterson_scan(&c, 24, 3).unwrap();
        let mut higher = 0;
        for s in &r.samples {
            let a: Vec<Rational> = s.point.iter().map(|x| rational::parse(x).unwrap()).collect();
            assert!(psi.evaluate(&a).unwrap().is_zero(), "{name}: sample not on X_G");
            assert_eq!(taylor_multiplicity(&psi, &a), s.multiplicity, "{name}");
            assert_eq!(s.corank, s.multiplicity, "{name}");
            higher += (s.corank > 1) as usize;
        }
        if name != "wheel3" {
            assert!(higher > 0, "{name}: no singular points sampled");
        }
    }
}

#[test]
fn corank_positive_exactly_on_hypersurface() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for name in ["triangle", "wheel3", "double_bubble"] {
        let c = config(name);
        let psi = first_symanzik(&c, PsiMethod::Determinant).unwrap();
        for _ in 0..50 {
            let a: Vec<Rational> = (0..c.n_edges()).map(|_| frac(rng.random_range(-2..=2), 1)).collect();
            if a.iter().all(Zero::is_zero) {
                continue;
            }
            let on = psi.evaluate(&a).unwrap().is_zero();
            let k = corank_at(&c, &ProjPoint::new(a).unwrap()).unwrap();
            assert_eq!(k >= 1, on, "{name}");
        }
    }
}

#[test]
fn repeated_partials_vanish() {
    for (name, g) in corpus::all() {
        let psi = first_symanzik(&Configuration::from_graph(&g), PsiMethod::Determinant).unwrap();
        for e in 0..g.n_edges() {
            assert!(psi.derivative(e).derivative(e).is_zero(), "{name} edge {e}");
        }
    }
}

#[test]
fn epsilon_examples() {
    let bubble = Configuration::from_graph(&build_graph(&[(1, 2), (1, 2)]).unwrap());
    assert_eq!(epsilon_beta(&bubble, &ProjPoint::from_i64(&[1]).unwrap()).unwrap(), 0);
    assert!(epsilon_beta(&bubble, &ProjPoint::from_i64(&[1, 2]).unwrap()).is_err());

    let w3 = config("wheel3");
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let beta: Vec<Rational> = (0..3).map(|_| frac(rng.random_range(-9..=9), rng.random_range(1..=4))).collect();
        if beta.iter().all(Zero::is_zero) {
            continue;
        }
        assert_eq!(epsilon_beta(&w3, &ProjPoint::new(beta).unwrap()).unwrap(), 0);
    }
    assert!(jump_locus(&w3).unwrap().is_empty());
}

#[test]
fn wheel4_jump_locus_is_four_points() {
    let c = config("wheel4");
    let locus = jump_locus(&c).unwrap();
    assert_eq!(locus.len(), 4);
    for comp in &locus {
        assert_eq!(comp.projective_dim(), 0);
        assert_eq!(comp.epsilon, 1);
        let beta = ProjPoint::new(comp.basis[0].clone()).unwrap();
        assert_eq!(epsilon_beta(&c, &beta).unwrap(), 1);
        // fibre dimension n - g - 1 + epsilon jumps from 3 to 4
        assert_eq!(c.n_edges() - c.genus() - 1 + 1, 4);
    }
    // away from the four points epsilon vanishes
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..300 {
        let beta: Vec<Rational> = (0..4).map(|_| frac(rng.random_range(-3..=3), 1)).collect();
        if beta.iter().all(Zero::is_zero) {
            continue;
        }
        let on_locus = locus.iter().any(|comp| rank_of(&[comp.basis[0].clone(), beta.clone()], 4) == 1);
        let eps = epsilon_beta(&c, &ProjPoint::new(beta).unwrap()).unwrap();
        assert_eq!(eps >= 1, on_locus);
    }
}

#[test]
fn loop_partition_examples() {
    assert!(loop_partitions(&corpus::builtin("wheel3").unwrap()).unwrap().is_empty());
    assert!(loop_partitions(&build_graph(&[(1, 2), (1, 2)]).unwrap()).unwrap().is_empty());
    let w4 = loop_partitions(&corpus::builtin("wheel4").unwrap()).unwrap();
    assert!(!w4.is_empty());
    for p in &w4 {
        assert!(p.rank_first < 4 && p.rank_second < 4);
        assert_eq!(p.first.len() + p.second.len(), 8);
    }
}
