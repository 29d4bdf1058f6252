//! Driven steady state, normalized populations and transient dynamics.
//!
//! Amplitudes obey `dp/dt = -iΩ v + M p`, so the steady state solves
//! `M p = iΩ v`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::CouplingMatrix;
use crate::linalg::{self, norm2};

/// Condition estimates above this are treated as the decoherence-free divergence.
pub const NEAR_SINGULAR_THRESHOLD: f64 = 1e12;

/// Residual bound relative to `||iΩ v||`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Total excitation above which the single-excitation truncation is suspect.
pub const WEAK_DRIVE_LIMIT: f64 = 0.1;

/// `h * ||M||_inf` must stay below this for the fourth-order integrator.
pub const RK4_STABILITY_BOUND: f64 = 2.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateSolution {
    pub amplitudes: Vec<Complex64>,
    pub populations: Vec<f64>,
    pub residual_norm: f64,
    pub total_excitation: f64,
    pub condition_estimate: f64,
    pub rabi: f64,
}

impl SteadyStateSolution {
    pub fn weak_drive_check(&self) -> WeakDriveCheck {
        WeakDriveCheck::from_amplitudes(&self.amplitudes)
    }

    /// Amplitudes divided by Ω; independent of the drive strength.
    pub fn scaled_amplitudes(&self) -> Vec<Complex64> {
        self.amplitudes.iter().map(|p| p / self.rabi).collect()
    }
}

/// Solves `M p = iΩ v` with one step of iterative refinement.
pub fn steady_state(
    matrix: &CouplingMatrix,
    drive_vector: &[Complex64],
    rabi: f64,
) -> Result<SteadyStateSolution> {
    let n = matrix.dim();
    if drive_vector.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: drive_vector.len(),
        });
    }
    let condition = matrix.condition_estimate();
    if !(condition <= NEAR_SINGULAR_THRESHOLD) {
        return Err(Error::NearSingular { condition });
    }
    let rhs: Vec<Complex64> = drive_vector
        .iter()
        .map(|v| Complex64::new(0.0, rabi) * v)
        .collect();
    let amplitudes = linalg::solve_refined(matrix.entries(), matrix.lu(), &rhs)?;

    let applied = matrix.entries().mul_vec(&amplitudes)?;
    let residual: Vec<Complex64> = applied.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let residual_norm = norm2(&residual);
    let tolerance = RESIDUAL_TOLERANCE * norm2(&rhs);
    if residual_norm > tolerance {
        return Err(Error::ResidualTooLarge {
            residual: residual_norm,
            tolerance,
        });
    }

    let populations = normalized_populations(&amplitudes)?;
    let total_excitation = amplitudes.iter().map(|p| p.norm_sqr()).sum();
    Ok(SteadyStateSolution {
        amplitudes,
        populations,
        residual_norm,
        total_excitation,
        condition_estimate: condition,
        rabi,
    })
}

/// `P_j = |p_j|^2 / Σ_k |p_k|^2`.
pub fn normalized_populations(amplitudes: &[Complex64]) -> Result<Vec<f64>> {
    let weights: Vec<f64> = amplitudes.iter().map(|p| p.norm_sqr()).collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakDriveCheck {
    pub total_excitation: f64,
    pub exceeds_limit: bool,
}

impl WeakDriveCheck {
    pub fn from_amplitudes(amplitudes: &[Complex64]) -> Self {
        let total_excitation: f64 = amplitudes.iter().map(|p| p.norm_sqr()).sum();
        Self {
            total_excitation,
            exceeds_limit: total_excitation > WEAK_DRIVE_LIMIT,
        }
    }
}

pub fn weak_drive_check(solution: &SteadyStateSolution) -> WeakDriveCheck {
    solution.weak_drive_check()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub amplitude_snapshots: Vec<Vec<Complex64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[Complex64] {
        self.amplitude_snapshots
            .last()
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// Fixed-step classical Runge-Kutta integration from `t = 0` to `t_final`.
///
/// The returned trajectory holds `n_steps + 1` snapshots including the
/// initial state.
pub fn time_evolve(
    matrix: &CouplingMatrix,
    drive_vector: &[Complex64],
    rabi: f64,
    initial: &[Complex64],
    t_final: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    let n = matrix.dim();
    for len in [drive_vector.len(), initial.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::invalid("t_final", "final time must be positive"));
    }
    if n_steps == 0 {
        return Err(Error::invalid("n_steps", "need at least one step"));
    }
    let h = t_final / n_steps as f64;
    let norm = matrix.entries().norm_inf();
    if h * norm > RK4_STABILITY_BOUND {
        return Err(Error::StepTooLarge {
            step: h,
            bound: RK4_STABILITY_BOUND / norm,
        });
    }

    let forcing: Vec<Complex64> = drive_vector
        .iter()
        .map(|v| Complex64::new(0.0, -rabi) * v)
        .collect();
    let mut stepper = Rk4::new(matrix, &forcing);
    let mut state = initial.to_vec();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut snapshots = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    snapshots.push(state.clone());
    for step in 1..=n_steps {
        stepper.advance(&mut state, h);
        times.push(h * step as f64);
        snapshots.push(state.clone());
    }
    Ok(Trajectory {
        times,
        amplitude_snapshots: snapshots,
    })
}

struct Rk4<'a> {
    matrix: &'a CouplingMatrix,
    forcing: &'a [Complex64],
    k: [Vec<Complex64>; 4],
    scratch: Vec<Complex64>,
}

impl<'a> Rk4<'a> {
    fn new(matrix: &'a CouplingMatrix, forcing: &'a [Complex64]) -> Self {
        let n = forcing.len();
        let zero = Complex64::new(0.0, 0.0);
        Self {
            matrix,
            forcing,
            k: [vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]],
            scratch: vec![zero; n],
        }
    }

    fn rhs(matrix: &CouplingMatrix, forcing: &[Complex64], p: &[Complex64], out: &mut [Complex64]) {
        matrix.entries().mul_vec_into(p, out);
        out.iter_mut().zip(forcing).for_each(|(o, f)| *o += f);
    }

    fn advance(&mut self, state: &mut [Complex64], h: f64) {
        let (m, f) = (self.matrix, self.forcing);
        let [k1, k2, k3, k4] = &mut self.k;
        let y = &mut self.scratch;

        Self::rhs(m, f, state, k1);
        for i in 0..state.len() {
            y[i] = state[i] + k1[i] * (h / 2.0);
        }
        Self::rhs(m, f, y, k2);
        for i in 0..state.len() {
            y[i] = state[i] + k2[i] * (h / 2.0);
        }
        Self::rhs(m, f, y, k3);
        for i in 0..state.len() {
            y[i] = state[i] + k3[i] * h;
        }
        Self::rhs(m, f, y, k4);
        for i in 0..state.len() {
            state[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}
