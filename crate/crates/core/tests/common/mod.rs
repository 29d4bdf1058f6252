#![allow(dead_code)]

use chiral_array_core::lattice::{build_coupling_matrix, build_drive_vector};
use chiral_array_core::linalg::ComplexMatrix;
use chiral_array_core::solver::steady_state;
use chiral_array_core::{ArrayGeometry, ChiralCoupling, Complex64, CouplingMatrix, DriveField, SteadyStateSolution};

pub struct Case {
    pub geometry: ArrayGeometry,
    pub coupling: ChiralCoupling,
    pub drive: DriveField,
}

impl Case {
    pub fn new(n: usize, m: usize, xi1: f64, xi2: f64, d: f64) -> Self {
        Case {
            geometry: ArrayGeometry::new(n, m, xi1, xi2).unwrap(),
            coupling: ChiralCoupling::new(d).unwrap(),
            drive: DriveField::uniform(n),
        }
    }

    pub fn centered(n: usize, xi1: f64, xi2: f64, d: f64) -> Self {
        Self::new(n, n.div_ceil(2), xi1, xi2, d)
    }

    pub fn with_drive(mut self, drive: DriveField) -> Self {
        self.drive = drive;
        self
    }

    pub fn matrix(&self) -> CouplingMatrix {
        build_coupling_matrix(&self.geometry, &self.coupling, &self.drive).unwrap()
    }

    pub fn drive_vector(&self) -> Vec<Complex64> {
        build_drive_vector(&self.geometry, &self.drive)
    }

    pub fn solve(&self) -> chiral_array_core::Result<SteadyStateSolution> {
        steady_state(&self.matrix(), &self.drive_vector(), self.drive.rabi())
    }
}

pub fn scaled(a: &ComplexMatrix, s: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] * s)
}

pub fn added(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] + b[(i, j)])
}

/// `e^{A}` by a scaled Taylor series followed by repeated squaring.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let norm = a.norm_one();
    let mut squarings = 0u32;
    while norm / 2f64.powi(squarings as i32) > 0.5 {
        squarings += 1;
    }
    let b = scaled(a, Complex64::new(2f64.powi(-(squarings as i32)), 0.0));
    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..40 {
        term = scaled(&term.matmul(&b).unwrap(), Complex64::new(1.0 / k as f64, 0.0));
        sum = added(&sum, &term);
        if term.norm_one() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum).unwrap();
    }
    sum
}

/// Inverse by Gauss-Jordan elimination with full pivoting.
pub fn gauss_jordan_inverse(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut work: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut row: Vec<Complex64> = a.row(i).to_vec();
            row.extend((0..n).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)));
            row
        })
        .collect();
    let mut col_perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, 0.0);
        for (i, row) in work.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().take(n).skip(k) {
                if v.norm() > best {
                    best = v.norm();
                    pr = i;
                    pc = j;
                }
            }
        }
        work.swap(k, pr);
        for row in work.iter_mut() {
            row.swap(k, pc);
        }
        col_perm.swap(k, pc);
        let pivot = work[k][k];
        for v in work[k].iter_mut() {
            *v /= pivot;
        }
        let pivot_row = work[k].clone();
        for (i, row) in work.iter_mut().enumerate() {
            if i != k {
                let f = row[k];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
    }
    // Row k of the reduced system holds unknown col_perm[k].
    let mut inv = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        for j in 0..n {
            inv[(col_perm[k], j)] = work[k][n + j];
        }
    }
    inv
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}
