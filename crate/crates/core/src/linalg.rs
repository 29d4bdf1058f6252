//! Dense complex matrices, row-pivoted LU factorization and a 1-norm
//! condition estimator.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(ZERO, |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    /// `y = self * x` into a caller-owned buffer; lengths are not re-checked.
    pub(crate) fn mul_vec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self
                .row(i)
                .iter()
                .zip(x)
                .fold(ZERO, |acc, (a, b)| acc + a * b);
        }
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: rhs.rows,
            });
        }
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let src = rhs.row(k);
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn norm2(x: &[Complex64]) -> f64 {
    libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum())
}

pub fn norm1(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm()).sum()
}

/// LU factorization `P A = L U` with partial (row) pivoting.
///
/// L is unit lower triangular and shares storage with U. A zero pivot does
/// not abort the factorization; it is recorded and `solve` refuses to run.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: ComplexMatrix,
    /// `perm[k]` is the original row that ended up in row `k`.
    perm: Vec<usize>,
    zero_pivot: Option<usize>,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                actual: a.cols(),
            });
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut zero_pivot = None;

        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            if pmax == 0.0 {
                zero_pivot.get_or_insert(k);
                continue;
            }
            let pivot = lu[(k, k)];
            let (head, tail) = lu.data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..(k + 1) * n];
            for row in tail.chunks_exact_mut(n) {
                let factor = row[k] / pivot;
                row[k] = factor;
                if factor == ZERO {
                    continue;
                }
                for j in (k + 1)..n {
                    row[j] -= factor * pivot_row[j];
                }
            }
        }

        Ok(Self {
            factors: lu,
            perm,
            zero_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.factors.rows()
    }

    pub fn is_singular(&self) -> bool {
        self.zero_pivot.is_some()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: b.len(),
            });
        }
        if self.is_singular() {
            return Err(Error::NearSingular {
                condition: f64::INFINITY,
            });
        }
        let lu = &self.factors;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = lu.row(i);
            let s = row[..i].iter().zip(&x[..i]).fold(ZERO, |acc, (l, xj)| acc + l * xj);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = lu.row(i);
            let s = row[i + 1..]
                .iter()
                .zip(&x[i + 1..])
                .fold(ZERO, |acc, (u, xj)| acc + u * xj);
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }

    /// Solves `A^H x = b`.
    pub fn solve_adjoint(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: b.len(),
            });
        }
        if self.is_singular() {
            return Err(Error::NearSingular {
                condition: f64::INFINITY,
            });
        }
        let lu = &self.factors;
        // A^H = U^H L^H P, so solve U^H y = b, L^H z = y, x = P^T z.
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = ZERO;
            for j in 0..i {
                s += lu[(j, i)].conj() * y[j];
            }
            y[i] = (y[i] - s) / lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut s = ZERO;
            for j in (i + 1)..n {
                s += lu[(j, i)].conj() * y[j];
            }
            y[i] -= s;
        }
        let mut x = vec![ZERO; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        Ok(x)
    }

    /// Estimate of `||A^{-1}||_1` (Hager's method with Higham's refinements).
    pub fn inverse_norm_one_estimate(&self) -> f64 {
        let n = self.dim();
        if self.is_singular() {
            return f64::INFINITY;
        }
        if n == 0 {
            return 0.0;
        }
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut estimate = 0.0;
        let mut last_index = usize::MAX;
        for iteration in 0..5 {
            let y = match self.solve(&x) {
                Ok(y) => y,
                Err(_) => return f64::INFINITY,
            };
            let y_norm = norm1(&y);
            if iteration > 0 && y_norm <= estimate {
                break;
            }
            estimate = y_norm;
            let signs: Vec<Complex64> = y
                .iter()
                .map(|z| {
                    let r = z.norm();
                    if r == 0.0 {
                        ONE
                    } else {
                        z / r
                    }
                })
                .collect();
            let z = match self.solve_adjoint(&signs) {
                Ok(z) => z,
                Err(_) => return f64::INFINITY,
            };
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if j == last_index || zmax <= ztx {
                break;
            }
            last_index = j;
            x.iter_mut().for_each(|v| *v = ZERO);
            x[j] = ONE;
        }
        // Alternating test vector guards against the estimator being fooled by
        // cancellation in the power iteration.
        let alt: Vec<Complex64> = (0..n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let scale = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
                Complex64::new(sign * (1.0 + scale), 0.0)
            })
            .collect();
        if let Ok(y) = self.solve(&alt) {
            let alt_estimate = 2.0 * norm1(&y) / (3.0 * n as f64);
            if alt_estimate > estimate {
                estimate = alt_estimate;
            }
        }
        estimate
    }
}

/// 1-norm condition number estimate `||A||_1 * est(||A^{-1}||_1)`.
pub fn condition_estimate(a: &ComplexMatrix, lu: &Lu) -> f64 {
    let inv = lu.inverse_norm_one_estimate();
    if inv.is_infinite() {
        return f64::INFINITY;
    }
    a.norm_one() * inv
}

/// Solves `A x = b` and applies one step of iterative refinement.
pub fn solve_refined(a: &ComplexMatrix, lu: &Lu, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut x = lu.solve(b)?;
    let ax = a.mul_vec(&x)?;
    let r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let dx = lu.solve(&r)?;
    x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
    Ok(x)
}
