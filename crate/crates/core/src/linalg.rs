//! Small dense linear algebra: row-major square matrices, LU with partial
//! pivoting, power iteration and a tridiagonal solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.row_mut(i).copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n.max(1))
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: SquareMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(mut a: SquareMatrix) -> Result<Self> {
        let n = a.dim();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.entries().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, a.get(i, k).abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pivot <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::SingularSystem { row: k, pivot });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = a.get(k, j);
                    a.set(k, j, a.get(p, j));
                    a.set(p, j, tmp);
                }
            }
            let akk = a.get(k, k);
            for i in (k + 1)..n {
                let f = a.get(i, k) / akk;
                a.set(i, k, f);
                if f != 0.0 {
                    for j in (k + 1)..n {
                        let v = a.get(i, j) - f * a.get(k, j);
                        a.set(i, j, v);
                    }
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.dim();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu.get(i, j) * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|j| self.lu.get(i, j) * x[j]).sum();
            x[i] = (x[i] - s) / self.lu.get(i, i);
        }
        x
    }
}

/// Dominant eigenpair of a matrix with a positive dominant eigenvalue.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    /// Normalized to unit maximum.
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Power iteration on `a`, stopping when `‖a h − μ h‖ ≤ tol ‖h‖` (Euclidean norms).
pub fn power_iteration(a: &SquareMatrix, tol: f64, max_iter: usize) -> Result<Eigenpair> {
    let n = a.dim();
    let mut h = vec![1.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let ah = a.mul_vec(&h);
        let hh: f64 = h.iter().map(|x| x * x).sum();
        let mu = ah.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>() / hh;
        residual = ah
            .iter()
            .zip(&h)
            .map(|(a, b)| (a - mu * b).powi(2))
            .sum::<f64>()
            .sqrt()
            / hh.sqrt();
        if residual <= tol * mu.abs().max(1.0) {
            let vector = normalize_max(h);
            return Ok(Eigenpair {
                value: mu,
                vector,
                residual,
                iterations: it,
            });
        }
        h = normalize_max(ah);
    }
    Err(Error::NoConvergence {
        method: "power iteration",
        iterations: max_iter,
        residual,
    })
}

fn normalize_max(mut v: Vec<f64>) -> Vec<f64> {
    let m = v
        .iter()
        .copied()
        .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if m != 0.0 {
        v.iter_mut().for_each(|x| *x /= m);
    }
    v
}

/// Tridiagonal system `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n-1]` are ignored. Thomas algorithm; the matrices
/// built by the PDE solver are diagonally dominant so no pivoting is needed.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut Vec<f64>) {
    let n = diag.len();
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut denom = diag[0];
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_iteration_symmetric_two_by_two() {
        let a = SquareMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = power_iteration(&a, 1e-12, 10_000).unwrap();
        assert!((e.value - 3.0).abs() < 1e-12);
        assert!((e.vector[0] - 1.0).abs() < 1e-12 && (e.vector[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_reports_nonconvergence() {
        // Rotation: no dominant real eigenvalue.
        let a = SquareMatrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        assert!(matches!(
            power_iteration(&a, 1e-12, 50),
            Err(Error::NoConvergence { iterations: 50, .. })
        ));
    }

    #[test]
    fn lu_solves_and_detects_singularity() {
        let a = SquareMatrix::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ]);
        let x = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x);
        let got = Lu::factor(a).unwrap().solve(&b);
        for (g, e) in got.iter().zip(x) {
            assert!((g - e).abs() < 1e-14);
        }
        let s = SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(Lu::factor(s), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn thomas_matches_dense() {
        let lower = [0.0, -1.0, -1.0, -1.0];
        let diag = [4.0, 4.0, 4.0, 4.0];
        let upper = [-1.0, -1.0, -1.0, 0.0];
        let x = [1.0, 2.0, 3.0, 4.0];
        let mut rhs: Vec<f64> = (0..4)
            .map(|i| {
                diag[i] * x[i]
                    + if i > 0 { lower[i] * x[i - 1] } else { 0.0 }
                    + if i < 3 { upper[i] * x[i + 1] } else { 0.0 }
            })
            .collect();
        let mut scratch = Vec::new();
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs, &mut scratch);
        for (g, e) in rhs.iter().zip(x) {
            assert!((g - e).abs() < 1e-14);
        }
    }
}
