//! Symmetric tridiagonal eigensolver (implicit QL with Wilkinson shifts).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigen-decomposition of a real symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagEigen<T> {
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// `vectors[j]` is the unit eigenvector belonging to `values[j]`.
    pub vectors: Vec<Vec<T>>,
}

/// Diagonalizes the matrix with diagonal `diag` and off-diagonal `off`
/// (`off[i]` couples rows `i` and `i+1`).
pub fn symmetric_tridiagonal<T: Real>(diag: &[T], off: &[T]) -> Result<TridiagEigen<T>> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "tridiagonal shape mismatch: {} diagonal, {} off-diagonal",
            n,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e: Vec<T> = off.iter().copied().chain(std::iter::once(T::zero())).collect();
    // z[row][col], columns are eigenvectors
    let mut z = vec![vec![T::zero(); n]; n];
    for (i, row) in z.iter_mut().enumerate() {
        row[i] = T::one();
    }
    const MAX_ITER: usize = 60;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::eps() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_ITER {
                return Err(Error::NotConverged {
                    what: "tridiagonal QL".into(),
                    iterations: MAX_ITER,
                    residual: e[l].abs().to_f64_lossy(),
                });
            }
            let two = T::lit(2.0);
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + r.abs() * g.signum());
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    let values = order.iter().map(|&j| d[j]).collect();
    let vectors = order
        .iter()
        .map(|&j| z.iter().map(|row| row[j]).collect())
        .collect();
    Ok(TridiagEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(diag: &[f64], off: &[f64], eig: &TridiagEigen<f64>) -> f64 {
        let n = diag.len();
        let mut worst: f64 = 0.0;
        for (lam, v) in eig.values.iter().zip(&eig.vectors) {
            for i in 0..n {
                let mut hv = diag[i] * v[i];
                if i > 0 {
                    hv += off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    hv += off[i] * v[i + 1];
                }
                worst = worst.max((hv - lam * v[i]).abs());
            }
        }
        worst
    }

    #[test]
    fn two_by_two() {
        let e = symmetric_tridiagonal(&[1.0f64, 1.0], &[1.0]).unwrap();
        assert!((e.values[0] - 0.0).abs() < 1e-14);
        assert!((e.values[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn free_chain_spectrum() {
        // -1 hopping chain of length n: eigenvalues -2 cos(pi j/(n+1))
        let n = 12;
        let e = symmetric_tridiagonal(&vec![0.0; n], &vec![-1.0; n - 1]).unwrap();
        let mut expect: Vec<f64> = (1..=n)
            .map(|j| -2.0 * (std::f64::consts::PI * j as f64 / (n as f64 + 1.0)).cos())
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in e.values.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn random_matrices_diagonalize(
            diag in proptest::collection::vec(-10.0f64..10.0, 1..30),
            seed in proptest::collection::vec(-3.0f64..3.0, 30),
        ) {
            let off: Vec<f64> = seed.iter().take(diag.len() - 1).copied().collect();
            let e = symmetric_tridiagonal(&diag, &off).unwrap();
            prop_assert!(residual(&diag, &off, &e) < 1e-11);
            for w in e.values.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            for v in &e.vectors {
                let n: f64 = v.iter().map(|x| x * x).sum();
                prop_assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }
}
