#![allow(dead_code)]

use gpucb::{Kernel, MaternNu, Observation, Point};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn point(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

pub fn grid_1d(n: usize) -> Vec<Point> {
    (0..n)
        .map(|i| point(&[i as f64 / (n.max(2) - 1) as f64]))
        .collect()
}

pub fn random_pool(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Point> {
    (0..n)
        .map(|_| Point::new((0..d).map(|_| rng.random::<f64>()).collect()).unwrap())
        .collect()
}

/// One kernel from every family, index-selected.
pub fn kernel_by_index(i: usize, lengthscale: f64, s2: f64) -> Kernel {
    match i % 5 {
        0 => Kernel::linear(s2).unwrap(),
        1 => Kernel::squared_exponential(lengthscale, s2).unwrap(),
        2 => Kernel::matern(MaternNu::Half, lengthscale, s2).unwrap(),
        3 => Kernel::matern(MaternNu::ThreeHalves, lengthscale, s2).unwrap(),
        _ => Kernel::matern(MaternNu::FiveHalves, lengthscale, s2).unwrap(),
    }
}

pub fn random_kernel(rng: &mut ChaCha8Rng) -> Kernel {
    let i = rng.random_range(0..5);
    let l = rng.random_range(0.1..1.0);
    let s2 = rng.random_range(0.5..2.0);
    kernel_by_index(i, l, s2)
}

pub fn dense_gram(kernel: &Kernel, xs: &[Point]) -> DMatrix<f64> {
    DMatrix::from_fn(xs.len(), xs.len(), |i, j| kernel.eval(&xs[i], &xs[j]).unwrap())
}

/// Posterior mean/variance through an explicit inverse of `K + σ²I` (LU).
pub fn dense_posterior(
    kernel: &Kernel,
    noise: f64,
    obs: &[Observation],
    x: &Point,
) -> (f64, f64) {
    let kxx = kernel.eval(x, x).unwrap();
    if obs.is_empty() {
        return (0.0, kxx);
    }
    let xs: Vec<Point> = obs.iter().map(|o| o.x.clone()).collect();
    let a = dense_gram(kernel, &xs) + DMatrix::identity(xs.len(), xs.len()) * noise;
    let inv = a.try_inverse().expect("K + σ²I invertible");
    let k = DVector::from_iterator(xs.len(), xs.iter().map(|o| kernel.eval(o, x).unwrap()));
    let y = DVector::from_iterator(obs.len(), obs.iter().map(|o| o.y));
    let mean = (k.transpose() * &inv * y)[(0, 0)];
    let var = kxx - (k.transpose() * &inv * &k)[(0, 0)];
    (mean, var)
}

/// `½ ln det(I + σ⁻²K)` through an LU determinant.
pub fn dense_info_gain(k: &DMatrix<f64>, noise: f64) -> f64 {
    let n = k.nrows();
    if n == 0 {
        return 0.0;
    }
    let m = DMatrix::identity(n, n) + k / noise;
    0.5 * m.lu().determinant().ln()
}

/// Cyclic Jacobi eigenvalue iteration for symmetric matrices, sorted descending.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Random symmetric PSD matrix `B·Bᵀ / k` with `k` latent columns.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
    (&b * b.transpose()) / k as f64
}
