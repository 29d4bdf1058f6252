//! Closed forms for the reciprocal (`D = 0`) array at perpendicular incidence.
//!
//! For `D = 0` the coupling matrix has a tridiagonal inverse, which gives the
//! steady-state amplitudes, the biased population and the half-depletion
//! boundary in closed form. These serve as independent checks of the dense
//! solver.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Phases closer than this to 0 or π are rejected as poles.
pub const SINGULAR_GUARD: f64 = 1e-6;

fn check_regular(xi: f64) -> Result<()> {
    if !xi.is_finite() || xi <= SINGULAR_GUARD || xi >= PI - SINGULAR_GUARD {
        return Err(Error::SingularPhase { xi });
    }
    Ok(())
}

fn check_interface(n: usize, m: usize) -> Result<()> {
    if n < 3 || m <= 1 || m >= n {
        return Err(Error::invalid("m", format!("need 1 < m < N, got m = {m}, N = {n}")));
    }
    Ok(())
}

/// `1 - e^{2iξ}`
fn gap(xi: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) - Complex64::cis(2.0 * xi)
}

fn bulk_diagonal(xi: f64) -> Complex64 {
    -2.0 * (Complex64::new(1.0, 0.0) + Complex64::cis(2.0 * xi)) / gap(xi)
}

fn end_diagonal(xi: f64) -> Complex64 {
    -2.0 / gap(xi)
}

fn neighbour(xi: f64) -> Complex64 {
    2.0 * Complex64::cis(xi) / gap(xi)
}

/// Inverse of the homogeneous reciprocal coupling matrix (tridiagonal).
pub fn homogeneous_inverse(n: usize, xi: f64) -> Result<ComplexMatrix> {
    check_regular(xi)?;
    if n < 2 {
        return Err(Error::invalid("n", "need at least 2 atoms"));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            if i == 0 || i == n - 1 {
                end_diagonal(xi)
            } else {
                bulk_diagonal(xi)
            }
        } else if i.abs_diff(j) == 1 {
            neighbour(xi)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Inverse of the dissimilar reciprocal coupling matrix (tridiagonal).
///
/// `m` is the 1-based interface index.
pub fn dissimilar_inverse(n: usize, m: usize, xi1: f64, xi2: f64) -> Result<ComplexMatrix> {
    check_interface(n, m)?;
    check_regular(xi1)?;
    check_regular(xi2)?;
    let site_m = m - 1;
    let interface_diagonal = -2.0 * gap(xi1 + xi2) / (gap(xi1) * gap(xi2));
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            match i {
                0 => end_diagonal(xi1),
                k if k == n - 1 => end_diagonal(xi2),
                k if k < site_m => bulk_diagonal(xi1),
                k if k > site_m => bulk_diagonal(xi2),
                _ => interface_diagonal,
            }
        } else if i.abs_diff(j) == 1 {
            // The bond between sites i and i+1 lies in the left segment when
            // its right end is at or before the interface.
            if i.max(j) <= site_m {
                neighbour(xi1)
            } else {
                neighbour(xi2)
            }
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Applicability of a closed-form result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    /// Always zero: the closed forms exist only for reciprocal coupling.
    pub directionality: f64,
    /// Distance of the nearest lattice phase to a pole at 0 or π.
    pub pole_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormAmplitudes {
    pub amplitudes: Vec<Complex64>,
    pub validity: Validity,
}

/// Five-case steady-state amplitudes of the reciprocal dissimilar array.
pub fn dissimilar_steady_state(
    n: usize,
    m: usize,
    xi1: f64,
    xi2: f64,
    rabi: f64,
) -> Result<ClosedFormAmplitudes> {
    check_interface(n, m)?;
    check_regular(xi1)?;
    check_regular(xi2)?;
    let t1 = libm::tan(xi1 / 2.0);
    let t2 = libm::tan(xi2 / 2.0);
    let i = Complex64::new(0.0, 1.0);
    let amplitudes = (1..=n)
        .map(|mu| {
            let value = if mu == 1 {
                i + t1
            } else if mu < m {
                Complex64::new(2.0 * t1, 0.0)
            } else if mu == m {
                Complex64::new(t1 + t2, 0.0)
            } else if mu < n {
                Complex64::new(2.0 * t2, 0.0)
            } else {
                i + t2
            };
            -rabi * value
        })
        .collect();
    let pole_distance = [xi1, PI - xi1, xi2, PI - xi2]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(ClosedFormAmplitudes {
        amplitudes,
        validity: Validity {
            directionality: 0.0,
            pole_distance,
        },
    })
}

/// Segment weights of the closed-form biased population.
fn weights(n: usize, m: usize, xi1: f64, xi2: f64) -> (f64, f64) {
    let t1 = libm::tan(xi1 / 2.0);
    let t2 = libm::tan(xi2 / 2.0);
    let left = (m as f64 - 1.75) * t1 * t1;
    let right = (n as f64 - m as f64 - 0.75) * t2 * t2;
    (left, right)
}

/// Closed-form `B_D` for general interface index `m`.
pub fn biased_population_closed_form(n: usize, m: usize, xi1: f64, xi2: f64) -> Result<f64> {
    check_interface(n, m)?;
    check_regular(xi1)?;
    check_regular(xi2)?;
    let (left, right) = weights(n, m, xi1, xi2);
    Ok(1.0 - (left - right).abs() / (0.5 + left + right))
}

/// Closed-form `B_D` for even `N` with the interface at `N/2`.
pub fn biased_population_even_centered(n: usize, xi1: f64, xi2: f64) -> Result<f64> {
    if !n.is_multiple_of(2) {
        return Err(Error::invalid("n", format!("need an even atom count, got {n}")));
    }
    check_regular(xi1)?;
    check_regular(xi2)?;
    let half = n as f64 / 2.0;
    let t1 = libm::tan(xi1 / 2.0);
    let t2 = libm::tan(xi2 / 2.0);
    let left = (half - 1.75) * t1 * t1;
    let right = (half - 0.75) * t2 * t2;
    Ok(1.0 - (left - right).abs() / (0.5 + left + right))
}

/// Exact `ξ₂` at which the closed-form `B_D` falls to `1/N` on the branch
/// where the right segment dominates.
///
/// On that branch `B_D = (1/2 + 2A) / (1/2 + A + B tan²(ξ₂/2))` with
/// `A = (m - 7/4) tan²(ξ₁/2)` and `B = N - m - 3/4`, which inverts directly.
pub fn exact_critical_xi2(n: usize, m: usize, xi1: f64) -> Result<f64> {
    check_interface(n, m)?;
    check_regular(xi1)?;
    let t1 = libm::tan(xi1 / 2.0);
    let a = (m as f64 - 1.75) * t1 * t1;
    let b = n as f64 - m as f64 - 0.75;
    if b <= 0.0 {
        return Err(Error::NoSolution);
    }
    let t_sq = (n as f64 * (0.5 + 2.0 * a) - 0.5 - a) / b;
    tan_sq_to_phase(t_sq)
}

/// Half-depletion onset for even `N`, small `ξ₁`, interface at `N/2`:
/// `tan²(ξ₂/2) ≥ [(N² - 2N + 7/4) tan²(ξ₁/2) + (N - 1)/2] / (N/2 - 3/4)`.
pub fn hd_boundary_xi2(n: usize, xi1: f64) -> Result<f64> {
    if !n.is_multiple_of(2) || n < 4 {
        return Err(Error::invalid("n", format!("need an even atom count >= 4, got {n}")));
    }
    check_regular(xi1)?;
    let nf = n as f64;
    let t1 = libm::tan(xi1 / 2.0);
    let rhs = ((nf * nf - 2.0 * nf + 1.75) * t1 * t1 + (nf - 1.0) / 2.0) / (nf / 2.0 - 0.75);
    tan_sq_to_phase(rhs)
}

fn tan_sq_to_phase(t_sq: f64) -> Result<f64> {
    if !t_sq.is_finite() || t_sq <= 0.0 {
        return Err(Error::NoSolution);
    }
    let xi = 2.0 * libm::atan(libm::sqrt(t_sq));
    if xi >= PI {
        return Err(Error::NoSolution);
    }
    Ok(xi)
}
