//! Small dense linear algebra on row-list matrices.

use alloc::vec::Vec;

use num_traits::Float;

use crate::{Error, Result};

/// Square matrix stored as a list of rows.
pub type Matrix = Vec<Vec<f64>>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// `A Aᵀ`.
pub fn gram(a: &[Vec<f64>]) -> Matrix {
    a.iter().map(|ri| a.iter().map(|rj| dot(ri, rj)).collect()).collect()
}

pub fn is_square(m: &[Vec<f64>], n: usize) -> bool {
    m.len() == n && m.iter().all(|row| row.len() == n)
}

/// Largest `|m_ij - m_ji|` relative to the largest entry.
pub fn asymmetry(m: &[Vec<f64>]) -> f64 {
    let scale = m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for i in 0..m.len() {
        for j in 0..i {
            worst = worst.max((m[i][j] - m[j][i]).abs());
        }
    }
    worst / scale
}

/// `(M + Mᵀ)/2`.
pub fn symmetrize(m: &[Vec<f64>]) -> Matrix {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| 0.5 * (m[i][j] + m[j][i])).collect()).collect()
}

/// Lower-triangular factor `L` with `M = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    n: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric matrix; only the lower triangle is read.
    pub fn factor(m: &[Vec<f64>], what: &'static str) -> Result<Self> {
        let n = m.len();
        if !is_square(m, n) || n == 0 {
            return Err(Error::DimensionMismatch("matrix must be square and nonempty"));
        }
        let scale = (0..n).fold(0.0f64, |acc, i| acc.max(m[i][i].abs()));
        let mut lower = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = m[i][j];
                for k in 0..j {
                    sum -= lower[i * n + k] * lower[j * n + k];
                }
                if i == j {
                    if !(sum > 1e-14 * scale) || !sum.is_finite() {
                        return Err(Error::NotPositiveDefinite { what });
                    }
                    lower[i * n + i] = sum.sqrt();
                } else {
                    lower[i * n + j] = sum / lower[j * n + j];
                }
            }
        }
        Ok(Cholesky { n, lower })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut sum = y[i];
            for k in 0..i {
                sum -= l[i * n + k] * y[k];
            }
            y[i] = sum / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in i + 1..n {
                sum -= l[k * n + i] * y[k];
            }
            y[i] = sum / l[i * n + i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn solve_small_system() {
        let m = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let x = Cholesky::factor(&m, "m").unwrap().solve(&[2.0, 1.0]);
        let back = mat_vec(&m, &x);
        assert!((back[0] - 2.0).abs() < 1e-15 && (back[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_indefinite() {
        let m = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert_eq!(Cholesky::factor(&m, "m"), Err(Error::NotPositiveDefinite { what: "m" }));
        let singular = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(Cholesky::factor(&singular, "m").is_err());
    }

    #[test]
    fn gram_and_symmetrize() {
        let a = vec![vec![1.0, 2.0], vec![0.0, 3.0]];
        assert_eq!(gram(&a), vec![vec![5.0, 6.0], vec![6.0, 9.0]]);
        assert_eq!(symmetrize(&a), vec![vec![1.0, 1.0], vec![1.0, 3.0]]);
        assert!(asymmetry(&a) > 0.5);
    }
}
