//! Array geometry, chiral coupling, drive field and the coupling matrix.
//!
//! All rates are in units of the total guided decay rate `γ = γ_L + γ_R = 1`.
//! Positions are phases `k x_μ` measured from the first atom.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, Lu};
use crate::PI_TOLERANCE;

/// Two-spacing chain: sites `1..=m` are spaced by `xi1`, sites `m..=n` by `xi2`.
///
/// The interface index is 1-based, matching the usual site labelling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    n_atoms: usize,
    interface: usize,
    xi1: f64,
    xi2: f64,
}

fn check_phase(name: &'static str, xi: f64) -> Result<()> {
    if !xi.is_finite() || xi <= 0.0 || xi > PI + 1e-12 {
        return Err(Error::invalid(name, format!("{xi} rad is outside (0, π]")));
    }
    Ok(())
}

impl ArrayGeometry {
    pub fn new(n_atoms: usize, interface: usize, xi1: f64, xi2: f64) -> Result<Self> {
        if n_atoms < 3 {
            return Err(Error::invalid("n", format!("need at least 3 atoms, got {n_atoms}")));
        }
        if interface <= 1 || interface >= n_atoms {
            return Err(Error::invalid(
                "m",
                format!("interface index {interface} must satisfy 1 < m < {n_atoms}"),
            ));
        }
        check_phase("xi1", xi1)?;
        check_phase("xi2", xi2)?;
        Ok(Self {
            n_atoms,
            interface,
            xi1: xi1.min(PI),
            xi2: xi2.min(PI),
        })
    }

    /// Interface atom at `⌈N/2⌉`.
    pub fn centered(n_atoms: usize, xi1: f64, xi2: f64) -> Result<Self> {
        Self::new(n_atoms, default_interface(n_atoms), xi1, xi2)
    }

    /// Same geometry with the two segments swapped end for end.
    pub fn reflected(&self) -> Self {
        Self {
            n_atoms: self.n_atoms,
            interface: self.n_atoms + 1 - self.interface,
            xi1: self.xi2,
            xi2: self.xi1,
        }
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn interface(&self) -> usize {
        self.interface
    }

    pub fn xi1(&self) -> f64 {
        self.xi1
    }

    pub fn xi2(&self) -> f64 {
        self.xi2
    }

    pub fn is_homogeneous(&self) -> bool {
        self.xi1 == self.xi2
    }

    /// True when either spacing sits at the ξ = π special point.
    pub fn touches_pi(&self) -> bool {
        (self.xi1 - PI).abs() <= PI_TOLERANCE || (self.xi2 - PI).abs() <= PI_TOLERANCE
    }

    pub fn positions(&self) -> Vec<f64> {
        atom_positions(self)
    }
}

pub fn default_interface(n_atoms: usize) -> usize {
    n_atoms.div_ceil(2)
}

/// Directionality `D = γ_R - γ_L` with `γ_L + γ_R = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiralCoupling {
    directionality: f64,
}

impl ChiralCoupling {
    pub fn new(directionality: f64) -> Result<Self> {
        if !directionality.is_finite() || !(-1.0..=1.0).contains(&directionality) {
            return Err(Error::invalid(
                "d",
                format!("directionality {directionality} is outside [-1, 1]"),
            ));
        }
        Ok(Self { directionality })
    }

    pub fn reciprocal() -> Self {
        Self { directionality: 0.0 }
    }

    pub fn directionality(&self) -> f64 {
        self.directionality
    }

    pub fn gamma_left(&self) -> f64 {
        (1.0 - self.directionality) / 2.0
    }

    pub fn gamma_right(&self) -> f64 {
        (1.0 + self.directionality) / 2.0
    }

    pub fn reversed(&self) -> Self {
        Self {
            directionality: -self.directionality,
        }
    }
}

/// Laser drive: Rabi frequency, incidence angle and per-site detunings.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveField {
    rabi: f64,
    theta: f64,
    detunings: Vec<f64>,
}

impl DriveField {
    pub const DEFAULT_RABI: f64 = 1e-2;
    pub const DEFAULT_THETA: f64 = PI / 2.0;

    pub fn new(rabi: f64, theta: f64, detunings: Vec<f64>) -> Result<Self> {
        if !rabi.is_finite() || rabi <= 0.0 {
            return Err(Error::invalid("rabi", format!("Rabi frequency {rabi} must be > 0")));
        }
        if !theta.is_finite() {
            return Err(Error::invalid("theta", "incidence angle must be finite"));
        }
        if let Some(bad) = detunings.iter().find(|d| !d.is_finite()) {
            return Err(Error::invalid("detunings", format!("non-finite detuning {bad}")));
        }
        Ok(Self {
            rabi,
            theta,
            detunings,
        })
    }

    /// Perpendicular incidence, no detuning, default weak Rabi frequency.
    pub fn uniform(n_atoms: usize) -> Self {
        Self {
            rabi: Self::DEFAULT_RABI,
            theta: Self::DEFAULT_THETA,
            detunings: vec![0.0; n_atoms],
        }
    }

    pub fn with_rabi(mut self, rabi: f64) -> Result<Self> {
        if !rabi.is_finite() || rabi <= 0.0 {
            return Err(Error::invalid("rabi", format!("Rabi frequency {rabi} must be > 0")));
        }
        self.rabi = rabi;
        Ok(self)
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    fn check_len(&self, n_atoms: usize) -> Result<()> {
        if self.detunings.len() != n_atoms {
            return Err(Error::DimensionMismatch {
                expected: n_atoms,
                actual: self.detunings.len(),
            });
        }
        Ok(())
    }
}

/// Coupling matrix `M` together with its LU factors and a condition estimate.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    entries: ComplexMatrix,
    lu: Lu,
    condition_estimate: f64,
}

impl CouplingMatrix {
    /// Wraps an arbitrary square matrix, factoring it once.
    pub fn from_matrix(entries: ComplexMatrix) -> Result<Self> {
        let lu = Lu::factor(&entries)?;
        let condition_estimate = linalg::condition_estimate(&entries, &lu);
        Ok(Self {
            entries,
            lu,
            condition_estimate,
        })
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    pub fn lu(&self) -> &Lu {
        &self.lu
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }
}

/// Phases `k x_μ`, starting at zero.
pub fn atom_positions(geometry: &ArrayGeometry) -> Vec<f64> {
    let m = geometry.interface;
    (1..=geometry.n_atoms)
        .map(|mu| {
            if mu <= m {
                (mu - 1) as f64 * geometry.xi1
            } else {
                (m - 1) as f64 * geometry.xi1 + (mu - m) as f64 * geometry.xi2
            }
        })
        .collect()
}

/// Raw coupling entries for arbitrary ordered positions.
///
/// `M_μν = -γ_L e^{i|kx_μ - kx_ν|}` above the diagonal, `-γ_R e^{i|kx_μ - kx_ν|}`
/// below it, and `iδ_μ - 1/2` on the diagonal.
pub fn coupling_entries(
    positions: &[f64],
    coupling: &ChiralCoupling,
    detunings: &[f64],
) -> Result<ComplexMatrix> {
    let n = positions.len();
    if detunings.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: detunings.len(),
        });
    }
    let gl = coupling.gamma_left();
    let gr = coupling.gamma_right();
    Ok(ComplexMatrix::from_fn(n, n, |mu, nu| {
        if mu == nu {
            return Complex64::new(-0.5, detunings[mu]);
        }
        let phase = Complex64::cis((positions[mu] - positions[nu]).abs());
        let rate = if mu < nu { gl } else { gr };
        -rate * phase
    }))
}

pub fn coupling_matrix_from_positions(
    positions: &[f64],
    coupling: &ChiralCoupling,
    detunings: &[f64],
) -> Result<CouplingMatrix> {
    CouplingMatrix::from_matrix(coupling_entries(positions, coupling, detunings)?)
}

pub fn build_coupling_matrix(
    geometry: &ArrayGeometry,
    coupling: &ChiralCoupling,
    drive: &DriveField,
) -> Result<CouplingMatrix> {
    drive.check_len(geometry.n_atoms)?;
    coupling_matrix_from_positions(&atom_positions(geometry), coupling, &drive.detunings)
}

/// Drive phases `e^{i kx_μ cos θ}` for arbitrary positions.
pub fn drive_vector_from_positions(positions: &[f64], theta: f64) -> Vec<Complex64> {
    let c = libm::cos(theta);
    // cos(π/2) is 6e-17 in floating point; treat perpendicular incidence exactly.
    let c = if c.abs() < 1e-15 { 0.0 } else { c };
    positions.iter().map(|x| Complex64::cis(x * c)).collect()
}

pub fn build_drive_vector(geometry: &ArrayGeometry, drive: &DriveField) -> Vec<Complex64> {
    drive_vector_from_positions(&atom_positions(geometry), drive.theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn positions_piecewise_linear() {
        let g = ArrayGeometry::new(4, 2, PI / 2.0, PI).unwrap();
        let x = atom_positions(&g);
        let expected = [0.0, PI / 2.0, 1.5 * PI, 2.5 * PI];
        assert!(x.iter().zip(expected).all(|(a, b)| close(*a, b)));
    }

    #[test]
    fn homogeneous_positions() {
        let xi = 0.37;
        let g = ArrayGeometry::new(3, 2, xi, xi).unwrap();
        assert_eq!(atom_positions(&g), vec![0.0, xi, 2.0 * xi]);
    }

    #[test]
    fn spacing_switches_at_interface() {
        let g = ArrayGeometry::new(9, 4, 0.3, 1.1).unwrap();
        let x = atom_positions(&g);
        assert_eq!(x[0], 0.0);
        for mu in 1..9 {
            let expected = if mu < 4 { 0.3 } else { 1.1 };
            assert!(close(x[mu] - x[mu - 1], expected));
        }
    }

    #[test]
    fn geometry_validation() {
        assert!(ArrayGeometry::new(2, 1, 1.0, 1.0).is_err());
        assert!(ArrayGeometry::new(10, 1, 1.0, 1.0).is_err());
        assert!(ArrayGeometry::new(10, 10, 1.0, 1.0).is_err());
        assert!(ArrayGeometry::new(10, 5, 0.0, 1.0).is_err());
        assert!(ArrayGeometry::new(10, 5, 1.0, PI + 0.01).is_err());
        assert!(ArrayGeometry::new(10, 5, 1.0, f64::NAN).is_err());
        assert!(ArrayGeometry::new(10, 5, PI, PI).is_ok());
        match ArrayGeometry::new(10, 5, 0.0, 1.0) {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "xi1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn centered_interface_is_ceil_half() {
        assert_eq!(ArrayGeometry::centered(100, 1.0, 1.0).unwrap().interface(), 50);
        assert_eq!(ArrayGeometry::centered(101, 1.0, 1.0).unwrap().interface(), 51);
    }

    #[test]
    fn coupling_rates() {
        let c = ChiralCoupling::new(0.3).unwrap();
        assert!(close(c.gamma_left() + c.gamma_right(), 1.0));
        assert!(close(c.gamma_right() - c.gamma_left(), 0.3));
        assert!(ChiralCoupling::new(1.2).is_err());
    }

    #[test]
    fn drive_validation() {
        assert!(DriveField::new(0.0, PI / 2.0, vec![0.0; 3]).is_err());
        assert!(DriveField::new(-1.0, PI / 2.0, vec![0.0; 3]).is_err());
        let g = ArrayGeometry::new(5, 3, 1.0, 1.0).unwrap();
        let short = DriveField::new(0.01, PI / 2.0, vec![0.0; 3]).unwrap();
        assert!(build_coupling_matrix(&g, &ChiralCoupling::reciprocal(), &short).is_err());
    }

    #[test]
    fn diagonal_is_detuning_minus_half() {
        let g = ArrayGeometry::new(5, 3, 0.4, 0.9).unwrap();
        let drive = DriveField::uniform(5);
        let m = build_coupling_matrix(&g, &ChiralCoupling::new(0.2).unwrap(), &drive).unwrap();
        for i in 0..5 {
            assert_eq!(m.entries()[(i, i)], Complex64::new(-0.5, 0.0));
        }
        let det = vec![0.1, -0.2, 0.0, 0.3, 1.0];
        let drive = DriveField::new(0.01, PI / 2.0, det.clone()).unwrap();
        let m = build_coupling_matrix(&g, &ChiralCoupling::new(0.2).unwrap(), &drive).unwrap();
        for (i, &d) in det.iter().enumerate() {
            assert_eq!(m.entries()[(i, i)], Complex64::new(-0.5, d));
        }
    }

    #[test]
    fn unidirectional_triangles_vanish() {
        let g = ArrayGeometry::new(6, 3, 0.4, 0.9).unwrap();
        let drive = DriveField::uniform(6);
        let right = build_coupling_matrix(&g, &ChiralCoupling::new(1.0).unwrap(), &drive).unwrap();
        let left = build_coupling_matrix(&g, &ChiralCoupling::new(-1.0).unwrap(), &drive).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if i < j {
                    assert_eq!(right.entries()[(i, j)].norm(), 0.0);
                } else if i > j {
                    assert_eq!(left.entries()[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn off_diagonal_moduli_are_decay_rates() {
        let g = ArrayGeometry::new(7, 4, 0.3, 2.0).unwrap();
        let c = ChiralCoupling::new(-0.35).unwrap();
        let m = build_coupling_matrix(&g, &c, &DriveField::uniform(7)).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let expected = match i.cmp(&j) {
                    core::cmp::Ordering::Less => c.gamma_left(),
                    core::cmp::Ordering::Greater => c.gamma_right(),
                    core::cmp::Ordering::Equal => continue,
                };
                assert!(close(m.entries()[(i, j)].norm(), expected));
            }
        }
    }

    #[test]
    fn homogeneous_reciprocal_matches_normalized_form() {
        // -(1/2) e^{iξ|μ-ν|} off the diagonal, -1/2 on it.
        let xi = 0.3 * PI;
        let g = ArrayGeometry::new(6, 3, xi, xi).unwrap();
        let m = build_coupling_matrix(&g, &ChiralCoupling::reciprocal(), &DriveField::uniform(6))
            .unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let d = (i as f64 - j as f64).abs();
                let expected = -0.5 * Complex64::cis(xi * d);
                assert!((m.entries()[(i, j)] - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn equal_spacings_make_interface_immaterial() {
        let xi = 0.41 * PI;
        let c = ChiralCoupling::new(0.25).unwrap();
        let drive = DriveField::uniform(8);
        let reference = build_coupling_matrix(&ArrayGeometry::new(8, 2, xi, xi).unwrap(), &c, &drive)
            .unwrap();
        for m in 3..8 {
            let other = build_coupling_matrix(&ArrayGeometry::new(8, m, xi, xi).unwrap(), &c, &drive)
                .unwrap();
            assert!(reference.entries().max_abs_diff(other.entries()) < 1e-13);
        }
    }

    #[test]
    fn reflection_maps_to_transpose() {
        let g = ArrayGeometry::new(9, 3, 0.27 * PI, 0.81 * PI).unwrap();
        let c = ChiralCoupling::new(0.45).unwrap();
        let drive = DriveField::uniform(9);
        let m = build_coupling_matrix(&g, &c, &drive).unwrap();
        let r = build_coupling_matrix(&g.reflected(), &c.reversed(), &drive).unwrap();
        let n = 9;
        for i in 0..n {
            for j in 0..n {
                let a = m.entries()[(i, j)];
                let b = r.entries()[(n - 1 - i, n - 1 - j)];
                assert!((a - b).norm() < 1e-13, "({i},{j}) {a} vs {b}");
            }
        }
    }

    #[test]
    fn drive_vector_cases() {
        let g = ArrayGeometry::new(7, 4, 0.3, 0.8).unwrap();
        let v = build_drive_vector(&g, &DriveField::uniform(7));
        assert!(v.iter().all(|z| *z == Complex64::new(1.0, 0.0)));

        let g = ArrayGeometry::new(3, 2, PI, PI).unwrap();
        let drive = DriveField::new(0.01, 0.0, vec![0.0; 3]).unwrap();
        let v = build_drive_vector(&g, &drive);
        let expected = [1.0, -1.0, 1.0];
        for (z, e) in v.iter().zip(expected) {
            assert!((z - Complex64::new(e, 0.0)).norm() < 1e-14);
        }

        let drive = DriveField::new(0.01, 0.77, vec![0.0; 3]).unwrap();
        assert!(build_drive_vector(&g, &drive)
            .iter()
            .all(|z| (z.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn singular_point_has_huge_condition() {
        let g = ArrayGeometry::new(10, 5, PI, PI).unwrap();
        let m = build_coupling_matrix(&g, &ChiralCoupling::reciprocal(), &DriveField::uniform(10))
            .unwrap();
        assert!(m.condition_estimate() > 1e12);
    }
}
