#![allow(dead_code)]

use std::path::{Path, PathBuf};

use gpucb_bench::trace::{read_trace, TraceRow};

pub fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

pub fn read_trace_file(path: &Path) -> Vec<TraceRow> {
    read_trace(std::fs::File::open(path).unwrap()).unwrap()
}

/// Parsed CSV as (header, rows of strings).
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let head = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (head, rows)
}

/// Every file under `dir`, relative path → bytes, in sorted order.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let bytes = std::fs::read(&p).unwrap();
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), bytes));
            }
        }
    }
    out.sort();
    out
}

/// LU factorization with partial pivoting. Deliberately naive: it is the
/// reference the library is checked against, not the thing under test.
pub struct Lu {
    m: Vec<Vec<f64>>,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn new(a: &[Vec<f64>]) -> Self {
        let n = a.len();
        let mut m = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
                .unwrap();
            if p != k {
                m.swap(p, k);
                perm.swap(p, k);
                sign = -sign;
            }
            for i in k + 1..n {
                let f = m[i][k] / m[k][k];
                m[i][k] = f;
                for j in k + 1..n {
                    m[i][j] -= f * m[k][j];
                }
            }
        }
        Self { m, perm, sign }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.m.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.m[i][j] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.m[i][j] * y[j];
            }
            y[i] /= self.m[i][i];
        }
        y
    }

    /// `ln det A`; panics unless the determinant is positive.
    pub fn log_det(&self) -> f64 {
        let mut s = self.sign;
        let mut acc = 0.0;
        for (i, row) in self.m.iter().enumerate() {
            acc += row[i].abs().ln();
            s *= row[i].signum();
        }
        assert!(s > 0.0, "determinant is not positive");
        acc
    }
}

/// `½ ln det(I + K/σ²)` by direct factorization.
pub fn dense_info_gain(k: &[Vec<f64>], noise_variance: f64) -> f64 {
    let n = k.len();
    if n == 0 {
        return 0.0;
    }
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| k[i][j] / noise_variance + if i == j { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    0.5 * Lu::new(&a).log_det()
}
