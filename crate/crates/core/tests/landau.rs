use kirchhoff::amplitude::Kinematics;
use kirchhoff::corpus;
use kirchhoff::graph::{Graph, Modification};
use kirchhoff::landau::{
    banana_threshold, disconnection_check, find_physical_pinch, hessian_check, landau_residual, locate_threshold,
    LandauSystem, Verdict,
};
use kirchhoff::rational::{from_f64, int, Rational};
use kirchhoff::symanzik::QuadraticSpace;
use kirchhoff::{build_graph, Error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn banana(n: usize) -> Graph {
    build_graph(&vec![(1, 2); n]).unwrap()
}

/// Banana kinematics in two-dimensional Minkowski space with `a = (energy, 0)`.
fn banana_kin(masses: &[i64], energy: f64) -> Kinematics {
    let e = from_f64(energy).unwrap();
    Kinematics::new(
        QuadraticSpace::minkowski(2).unwrap(),
        vec![vec![e.clone(), int(0)], vec![-e, int(0)]],
        masses.iter().map(|&m| int(m)).collect(),
    )
    .unwrap()
}

fn sign_classes(masses: &[i64]) -> Vec<f64> {
    banana_threshold(masses.len(), &masses.iter().map(|&m| m as f64).collect::<Vec<_>>()).unwrap().values
}

#[test]
fn residual_examples() {
    let g = banana(2);
    let kin = Kinematics::new(QuadraticSpace::euclidean(1), vec![vec![int(2)], vec![int(-2)]], vec![int(1), int(1)]).unwrap();
    let sys = LandauSystem::new(&g, &kin).unwrap();
    // pick the loop momentum that puts the first edge momentum at the symmetric value
    let q0 = sys.edge_momentum(0, &[0.0])[0];
    let target = -1.0;
    let slope = sys.edge_momentum(0, &[1.0])[0] - q0;
    let x = [(target - q0) / slope];
    let r = landau_residual(&g, &kin, &[0.5, 0.5], &x).unwrap();
    assert!(r.iter().all(|v| v.abs() < 1e-14), "{r:?}");
    let off = landau_residual(&g, &kin, &[0.5, 0.5], &[x[0] + 0.3]).unwrap();
    assert!(off[0].abs() > 0.1 && off[1].abs() > 0.1);
    assert!(matches!(landau_residual(&g, &kin, &[0.0, 0.0], &x), Err(Error::ZeroPoint)));
    assert!(matches!(landau_residual(&g, &kin, &[1.0], &x), Err(Error::DimensionMismatch { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn residual_scales_with_c(seed in 0u64..u64::MAX, lambda in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = corpus::builtin("wheel3").unwrap();
        let p: Vec<Vec<Rational>> = {
            let mut v: Vec<Vec<Rational>> = (0..4).map(|_| (0..2).map(|_| int(rng.random_range(-3..=3))).collect()).collect();
            for d in 0..2 {
                let s: Rational = v.iter().map(|x| x[d].clone()).sum();
                v[3][d] -= s;
            }
            v
        };
        let kin = Kinematics::new(QuadraticSpace::minkowski(2).unwrap(), p, vec![int(1); 6]).unwrap();
        let c: Vec<f64> = (0..6).map(|_| rng.random_range(0.1..1.0)).collect();
        let x: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        let base = landau_residual(&g, &kin, &c, &x).unwrap();
        let scaled_c: Vec<f64> = c.iter().map(|v| v * lambda).collect();
        let scaled = landau_residual(&g, &kin, &scaled_c, &x).unwrap();
        for k in 0..6 {
            prop_assert_eq!(base[k], scaled[k]);
        }
        for k in 6..base.len() {
            prop_assert!((scaled[k] - lambda * base[k]).abs() <= 1e-12 * (1.0 + scaled[k].abs()));
        }
    }
}

#[test]
fn bubble_pinch_is_the_on_shell_split() {
    for masses in [[1i64, 1], [1, 2]] {
        let threshold = (masses[0] + masses[1]) as f64;
        let kin = banana_kin(&masses, threshold);
        let pinches = find_physical_pinch(&banana(2), &kin, 0, 32).unwrap();
        assert_eq!(pinches.len(), 1, "{masses:?}");
        let p = &pinches[0];
        let sys = LandauSystem::new(&banana(2), &kin).unwrap();
        for e in 0..2 {
            // each edge carries the fraction m_e / (m_1 + m_2) of the total momentum
            let q = sys.edge_momentum(e, &p.x);
            assert!((q[0].abs() - masses[e] as f64).abs() < 1e-9 && q[1].abs() < 1e-9, "{q:?}");
        }
        assert!((p.c.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.on_shell.iter().all(|f| f.abs() <= 1e-10));
        assert!(p.gradient_norm <= 1e-10);
    }
}

#[test]
fn pinches_only_at_thresholds() {
    for masses in [vec![1i64, 1], vec![1, 2], vec![1, 1, 1]] {
        let g = banana(masses.len());
        let classes = sign_classes(&masses);
        let mut hits = 0;
        for k in 1..=40 {
            let a = k as f64 * 0.125;
            if classes.iter().any(|t| (a - t).abs() < 0.1) {
                continue;
            }
            assert!(find_physical_pinch(&g, &banana_kin(&masses, a), 3, 16).unwrap().is_empty(), "{masses:?} at {a}");
            hits += 1;
        }
        assert!(hits > 30);
        let physical: f64 = masses.iter().sum::<i64>() as f64;
        assert_eq!(find_physical_pinch(&g, &banana_kin(&masses, physical), 3, 16).unwrap().len(), 1);
    }
}

#[test]
fn single_edge_and_trees_have_no_pinch() {
    let g = build_graph(&[(1, 2)]).unwrap();
    let kin = Kinematics::new(QuadraticSpace::euclidean(1), vec![vec![int(1)], vec![int(-1)]], vec![int(1)]).unwrap();
    assert!(find_physical_pinch(&g, &kin, 0, 8).unwrap().is_empty());
}

#[test]
fn bisection_locates_thresholds() {
    for (masses, lo, hi) in [(vec![1i64, 1], 1.5, 2.5), (vec![1, 2], 2.5, 3.5), (vec![1, 1, 1], 2.5, 3.5), (vec![1, 2, 3], 5.5, 6.5)] {
        let s = locate_threshold(&banana(masses.len()), &banana_kin(&masses, 1.0), lo, hi, 1).unwrap();
        let expect: f64 = masses.iter().sum::<i64>() as f64;
        assert!((s - expect).abs() <= 1e-8, "{masses:?}: {s}");
    }
    assert!(matches!(locate_threshold(&banana(2), &banana_kin(&[1, 1], 1.0), 2.5, 3.5, 1), Err(Error::NoBracket { .. })));
}

#[test]
fn banana_threshold_examples() {
    assert_eq!(banana_threshold(2, &[1.0, 1.0]).unwrap().values, vec![0.0, 2.0]);
    let b = banana_threshold(2, &[1.0, 2.0]).unwrap();
    assert_eq!((b.values, b.physical), (vec![1.0, 3.0], 3.0));
    let b = banana_threshold(3, &[1.0, 1.0, 1.0]).unwrap();
    assert_eq!((b.values, b.physical), (vec![1.0, 3.0], 3.0));
    assert_eq!(banana_threshold(4, &[1.0, 2.0, 3.0, 5.0]).unwrap().values, vec![1.0, 3.0, 5.0, 7.0, 9.0, 11.0]);
    assert!(matches!(banana_threshold(2, &[1.0, -1.0]), Err(Error::InvalidMass { edge: 1, .. })));
    assert!(banana_threshold(1, &[1.0]).is_err());
}

#[test]
fn hessian_is_negative_definite_at_physical_pinches() {
    for masses in [vec![1i64, 1], vec![1, 2], vec![1, 1, 1], vec![1, 2, 3], vec![2, 1, 1, 1]] {
        let g = banana(masses.len());
        let kin = banana_kin(&masses, masses.iter().sum::<i64>() as f64);
        let pinches = find_physical_pinch(&g, &kin, 11, 32).unwrap();
        assert!(!pinches.is_empty(), "{masses:?}");
        for p in &pinches {
            let h = hessian_check(p, &g, &kin).unwrap();
            assert_eq!(h.gradient_rank, masses.len() - 1);
            assert_eq!(h.verdict, Verdict::NegativeDefinite, "{masses:?}: {:?}", h.eigenvalues);
            assert!(h.eigenvalues.iter().all(|&v| v < -1e-10));
            assert_eq!(p.hessian_signature, Some(h.signature));
        }
    }
}

#[test]
fn hessian_preconditions() {
    let g = banana(2);
    let kin = banana_kin(&[1, 1], 2.0);
    let p = find_physical_pinch(&g, &kin, 0, 8).unwrap().remove(0);
    let eu = Kinematics::new(QuadraticSpace::euclidean(2), kin.momenta().to_vec(), vec![int(1), int(1)]).unwrap();
    assert!(matches!(hessian_check(&p, &g, &eu), Err(Error::NotMinkowski)));
    let massless = Kinematics::new(QuadraticSpace::minkowski(2).unwrap(), kin.momenta().to_vec(), vec![int(1), int(0)]).unwrap();
    assert!(matches!(hessian_check(&p, &g, &massless), Err(Error::InvalidMass { edge: 1, .. })));
}

#[test]
fn connected_cuts_admit_no_gradient_relation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (name, g) in corpus::all() {
        let n = g.n_edges();
        let p: Vec<Vec<Rational>> = {
            let mut v: Vec<Vec<Rational>> = (0..g.n_vertices()).map(|_| (0..2).map(|_| int(rng.random_range(-3..=3))).collect()).collect();
            for d in 0..2 {
                let s: Rational = v.iter().map(|x| x[d].clone()).sum();
                v[0][d] -= s;
            }
            v
        };
        let kin = Kinematics::new(QuadraticSpace::minkowski(2).unwrap(), p, vec![int(1); n]).unwrap();
        let mut subsets = 0;
        for mask in 1u32..(1 << n) {
            let subset: Vec<usize> = (0..n).filter(|e| mask & (1 << e) != 0).collect();
            let mut rest = g.clone();
            for &e in subset.iter().rev() {
                rest = rest.modify(e, Modification::Delete).unwrap();
            }
            if !rest.is_connected() {
                continue;
            }
            let good = disconnection_check(&g, &kin, &subset, 100, mask as u64).unwrap();
            assert_eq!(good, 100, "{name} {subset:?}");
            subsets += 1;
        }
        assert_eq!(subsets > 0, g.loop_number() > 0, "{name}");
    }
}
