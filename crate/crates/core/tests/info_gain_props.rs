mod common;

use common::*;
use gpucb::info_gain::{greedy_gamma, info_gain_of_set, marginal_gain, trace_gain};
use gpucb::{GramMatrix, Point};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

#[test]
fn marginal_gain_matches_set_difference() {
    let mut r = rng(8);
    for _ in 0..20 {
        let g = GramMatrix::from_entries(random_psd(&mut r, 8, 5)).unwrap();
        let noise = r.random_range(0.05..1.0);
        let mut current: Vec<usize> = (0..8).filter(|_| r.random_bool(0.4)).collect();
        let Some(candidate) = (0..8).find(|i| !current.contains(i)) else {
            continue;
        };
        let mg = marginal_gain(&g, &current, candidate, noise).unwrap();
        let before = dense_info_gain(&g.submatrix(&current), noise);
        current.push(candidate);
        let after = dense_info_gain(&g.submatrix(&current), noise);
        assert!((mg - (after - before)).abs() < 1e-8, "{mg} vs {}", after - before);
    }
}

#[test]
fn set_value_matches_dense_log_det() {
    let g = GramMatrix::from_entries(DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0, 0.25])))
        .unwrap();
    let v = info_gain_of_set(&g, &[0, 1, 2], 1.0).unwrap();
    assert!((v - dense_info_gain(g.entries(), 1.0)).abs() < 1e-12);
}

#[test]
fn chain_rule_on_random_paths() {
    let mut r = rng(20);
    for _ in 0..10 {
        let k = random_kernel(&mut r);
        let noise = r.random_range(0.01..0.5);
        let path = random_pool(&mut r, 20, 2);
        let trace = trace_gain(&path, &k, noise).unwrap();
        let oneshot = dense_info_gain(&dense_gram(&k, &path), noise);
        let sum: f64 = trace.marginal_gains.iter().sum();
        assert!((sum - oneshot).abs() < 1e-8, "{sum} vs {oneshot}");
        assert!((trace.cumulative - sum).abs() < 1e-10);
        assert!(trace.marginal_gains.iter().all(|&g| g >= 0.0));
    }
}

#[test]
fn submodularity_exhaustive() {
    let mut r = rng(3);
    for _ in 0..5 {
        let n = 6;
        let g = GramMatrix::from_entries(random_psd(&mut r, n, 4)).unwrap();
        let noise = r.random_range(0.1..1.0);
        // all pairs A ⊆ B ⊆ V \ {x}
        for x in 0..n {
            let others: Vec<usize> = (0..n).filter(|&i| i != x).collect();
            for bmask in 0u32..(1 << others.len()) {
                let b: Vec<usize> = others
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| bmask >> j & 1 == 1)
                    .map(|(_, &i)| i)
                    .collect();
                let gb = marginal_gain(&g, &b, x, noise).unwrap();
                // walk subsets of B
                let mut amask = bmask;
                loop {
                    let a: Vec<usize> = others
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| amask >> j & 1 == 1)
                        .map(|(_, &i)| i)
                        .collect();
                    let ga = marginal_gain(&g, &a, x, noise).unwrap();
                    assert!(ga >= gb - 1e-9);
                    if amask == 0 {
                        break;
                    }
                    amask = (amask - 1) & bmask;
                }
            }
        }
    }
}

#[test]
fn set_value_is_monotone() {
    let mut r = rng(12);
    for _ in 0..20 {
        let g = GramMatrix::from_entries(random_psd(&mut r, 10, 6)).unwrap();
        let mut set = Vec::new();
        let mut prev = 0.0;
        for i in 0..10 {
            set.push(i);
            let v = info_gain_of_set(&g, &set, 0.3).unwrap();
            assert!(v >= prev - 1e-10);
            prev = v;
        }
    }
}

#[test]
fn greedy_steps_are_nonincreasing_and_distinct() {
    let mut r = rng(40);
    for _ in 0..10 {
        let k = random_kernel(&mut r);
        let pool = random_pool(&mut r, 30, 2);
        let g = GramMatrix::new(&k, &pool).unwrap();
        let d = greedy_gamma(&g, 12, 0.1).unwrap();
        let mut seen = d.indices.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 12);
        assert!(d.step_gains.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let direct = info_gain_of_set(&g, &d.indices, 0.1).unwrap();
        assert!((direct - d.gain).abs() < 1e-8);
    }
}

#[test]
fn greedy_full_pool_equals_set_value() {
    let mut r = rng(41);
    let pool = random_pool(&mut r, 9, 1);
    let k = random_kernel(&mut r);
    let g = GramMatrix::new(&k, &pool).unwrap();
    let d = greedy_gamma(&g, 9, 0.2).unwrap();
    let all: Vec<usize> = (0..9).collect();
    assert!((d.gain - info_gain_of_set(&g, &all, 0.2).unwrap()).abs() < 1e-8);
}

#[test]
fn doubling_noise_shrinks_gains() {
    let mut r = rng(55);
    for _ in 0..20 {
        let g = GramMatrix::from_entries(random_psd(&mut r, 7, 7)).unwrap();
        let noise = r.random_range(0.05..1.0);
        let current = vec![0, 3];
        for c in [1usize, 2, 4, 5, 6] {
            let a = marginal_gain(&g, &current, c, noise).unwrap();
            let b = marginal_gain(&g, &current, c, 2.0 * noise).unwrap();
            if a > 0.0 {
                assert!(b < a);
            }
        }
    }
}

#[test]
fn duplicate_path_points_still_add_information() {
    let k = gpucb::Kernel::squared_exponential(1.0, 1.0).unwrap();
    let x = Point::new(vec![0.0]).unwrap();
    let t = trace_gain(&[x.clone(), x], &k, 1.0).unwrap();
    assert!((t.marginal_gains[1] - 0.5 * 1.5f64.ln()).abs() < 1e-12);
}
