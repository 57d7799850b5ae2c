//! Dense LU factorization with partial pivoting over any coefficient field.

use crate::ring::Coeff;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is singular (pivot column {0})")]
    Singular(usize),
    #[error("dimension mismatch: {0}")]
    Shape(&'static str),
}

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<C> {
    pub n: usize,
    pub data: Vec<C>,
}

impl<C: Coeff> Matrix<C> {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![C::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C>>) -> Result<Self, LinalgError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(LinalgError::Shape("rows must form a square matrix"));
        }
        Ok(Matrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn get(&self, i: usize, j: usize) -> &C {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, x: &[C]) -> Vec<C> {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(C::zero(), |acc, j| acc + self.get(i, j).clone() * x[j].clone())
            })
            .collect()
    }
}

/// PA = LU with unit lower L stored below the diagonal.
#[derive(Debug, Clone)]
pub struct Lu<C> {
    lu: Matrix<C>,
    perm: Vec<usize>,
}

/// Factorizes, pivoting on the largest magnitude; exact zero pivots fail.
pub fn lu_factor<C: Coeff>(mut a: Matrix<C>) -> Result<Lu<C>, LinalgError> {
    let n = a.n;
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut best = k;
        let mut best_mag = -1.0;
        for i in k..n {
            let m = a.get(i, k).to_f64().abs();
            let nonzero = !a.get(i, k).is_zero();
            if nonzero && m > best_mag {
                best = i;
                best_mag = m;
            }
        }
        if best_mag < 0.0 {
            return Err(LinalgError::Singular(k));
        }
        if best != k {
            for j in 0..n {
                a.data.swap(k * n + j, best * n + j);
            }
            perm.swap(k, best);
        }
        let pivot = a.get(k, k).clone();
        for i in k + 1..n {
            if a.get(i, k).is_zero() {
                continue;
            }
            let factor = a.get(i, k).clone() / pivot.clone();
            for j in k + 1..n {
                let v = a.get(i, j).clone() - factor.clone() * a.get(k, j).clone();
                a.set(i, j, v);
            }
            a.set(i, k, factor);
        }
    }
    Ok(Lu { lu: a, perm })
}

impl<C: Coeff> Lu<C> {
    pub fn dim(&self) -> usize {
        self.lu.n
    }

    pub fn solve(&self, b: &[C]) -> Vec<C> {
        let n = self.lu.n;
        let mut x: Vec<C> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i].clone() - self.lu.get(i, j).clone() * x[j].clone();
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i].clone() - self.lu.get(i, j).clone() * x[j].clone();
            }
            x[i] = x[i].clone() / self.lu.get(i, i).clone();
        }
        x
    }

    /// Ratio of largest to smallest pivot magnitude, a cheap conditioning proxy.
    pub fn pivot_ratio(&self) -> f64 {
        let mags: Vec<f64> = (0..self.lu.n).map(|i| self.lu.get(i, i).to_f64().abs()).collect();
        let max = mags.iter().cloned().fold(0.0, f64::max);
        let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// Solves Ax = b in one call.
pub fn solve<C: Coeff>(a: Matrix<C>, b: &[C]) -> Result<Vec<C>, LinalgError> {
    if b.len() != a.n {
        return Err(LinalgError::Shape("right-hand side length"));
    }
    Ok(lu_factor(a)?.solve(b))
}

/// Rank by Gaussian elimination with relative tolerance `tol` (ignored for exact fields).
pub fn rank<C: Coeff>(rows: &[Vec<C>], tol: f64) -> usize {
    let mut m: Vec<Vec<C>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let scale = m
        .iter()
        .flatten()
        .map(|c| c.to_f64().abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let negligible = |c: &C| c.is_zero() || (!C::EXACT && c.to_f64().abs() <= tol * scale);
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..m.len())
            .filter(|&i| !negligible(&m[i][col]))
            .max_by(|&i, &j| m[i][col].to_f64().abs().total_cmp(&m[j][col].to_f64().abs()))
        else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            let f = m[i][col].clone() / m[r][col].clone();
            for j in col..ncols {
                m[i][j] = m[i][j].clone() - f.clone() * m[r][j].clone();
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{Rational, Scalar};

    #[test]
    fn solves_with_pivoting() {
        let a = Matrix::from_rows(vec![vec![0.0, 2.0], vec![3.0, 1.0]]).unwrap();
        let x = solve(a, &[4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_singular_detected() {
        let q = |n| Rational::from_i64(n);
        let a = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(4)]]).unwrap();
        assert_eq!(lu_factor(a).err(), Some(LinalgError::Singular(1)));
    }

    #[test]
    fn rank_of_dependent_rows() {
        let rows = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![0.0, 1.0, 0.0]];
        assert_eq!(rank(&rows, 1e-12), 2);
    }
}
