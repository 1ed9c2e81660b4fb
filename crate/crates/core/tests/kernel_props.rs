mod common;

use common::*;
use gpucb::{GramMatrix, Kernel, MaternNu, Point};
use proptest::prelude::*;

fn coords(d: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-3.0f64..3.0, d)
}

proptest! {
    #[test]
    fn kernels_are_symmetric(
        kind in 0usize..5,
        l in 0.05f64..3.0,
        s2 in 0.1f64..5.0,
        (a, b) in (1usize..4).prop_flat_map(|d| (coords(d), coords(d))),
    ) {
        let k = kernel_by_index(kind, l, s2);
        let x = Point::new(a).unwrap();
        let y = Point::new(b).unwrap();
        prop_assert!((k.eval(&x, &y).unwrap() - k.eval(&y, &x).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn stationary_kernels_are_normalized(
        kind in 1usize..5,
        l in 0.05f64..3.0,
        s2 in 0.1f64..5.0,
        a in coords(3),
    ) {
        let k = kernel_by_index(kind, l, s2);
        let x = Point::new(a).unwrap();
        prop_assert_eq!(k.eval(&x, &x).unwrap(), s2);
    }
}

#[test]
fn gram_is_psd_for_random_pools() {
    let mut r = rng(101);
    for kind in 0..5 {
        for _ in 0..100 {
            let n = rand::Rng::random_range(&mut r, 1..=50);
            let d = rand::Rng::random_range(&mut r, 1..=3);
            let pool = random_pool(&mut r, n, d);
            let k = kernel_by_index(kind, rand::Rng::random_range(&mut r, 0.05..1.0), 1.0);
            let g = GramMatrix::new(&k, &pool).unwrap();
            let ev = jacobi_eigenvalues(g.entries());
            let lmax = ev[0];
            assert!(
                *ev.last().unwrap() >= -1e-8 * lmax,
                "kernel {kind}: min eigenvalue {} vs max {lmax}",
                ev.last().unwrap()
            );
        }
    }
}

#[test]
fn gram_matches_pointwise_eval() {
    let mut r = rng(5);
    let pool = random_pool(&mut r, 5, 2);
    let k = Kernel::squared_exponential(0.4, 1.3).unwrap();
    let g = GramMatrix::new(&k, &pool).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            assert_eq!(g.get(i, j), k.eval(&pool[i], &pool[j]).unwrap());
            assert_eq!(g.get(i, j), g.get(j, i));
        }
    }
    let ev = jacobi_eigenvalues(g.entries());
    assert!(ev[4] >= -1e-8 * ev[0]);
}

#[test]
fn matern_smoothness_ordering() {
    // the ordering M½ ≤ M3/2 ≤ M5/2 ≤ SE holds while r/ℓ stays below ≈1.95;
    // past that the Gaussian tail falls under the Matérn tails
    let fam = |nu| Kernel::matern(nu, 1.0, 1.0).unwrap();
    let (m12, m32, m52) = (
        fam(MaternNu::Half),
        fam(MaternNu::ThreeHalves),
        fam(MaternNu::FiveHalves),
    );
    let se = Kernel::squared_exponential(1.0, 1.0).unwrap();
    let o = point(&[0.0]);
    for i in 1..=190 {
        let x = point(&[i as f64 * 0.01]);
        let v = [&m12, &m32, &m52, &se].map(|k| k.eval(&o, &x).unwrap());
        assert!(v[0] <= v[1] && v[1] <= v[2] && v[2] <= v[3], "r = {}: {v:?}", i as f64 * 0.01);
    }
    // and the crossing really exists
    let far = point(&[3.0]);
    assert!(se.eval(&o, &far).unwrap() < m12.eval(&o, &far).unwrap());
}

#[test]
fn spectrum_matches_dense_eigensolver() {
    let pool = grid_1d(10);
    let k = Kernel::squared_exponential(0.2, 1.0).unwrap();
    let g = GramMatrix::new(&k, &pool).unwrap();
    let s = g.spectrum().unwrap();
    let oracle = jacobi_eigenvalues(g.entries());
    assert_eq!(s.eigenvalues.len(), 10);
    let lmax = oracle[0];
    for (a, b) in s.eigenvalues.iter().zip(&oracle) {
        assert!((a - b.max(0.0)).abs() <= 1e-8 * lmax, "{a} vs {b}");
    }
    assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn spectrum_sums_to_trace() {
    let mut r = rng(77);
    for kind in 0..5 {
        let pool = random_pool(&mut r, 25, 2);
        let g = GramMatrix::new(&kernel_by_index(kind, 0.3, 1.7), &pool).unwrap();
        let s = g.spectrum().unwrap();
        let sum: f64 = s.eigenvalues.iter().sum();
        assert!((sum - s.trace).abs() <= 1e-8 * s.trace.abs());
        assert_eq!(s.trace, g.entries().trace());
    }
}
