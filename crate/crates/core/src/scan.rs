//! Parameter sweeps, half-depletion maps and critical-`ξ₂` extraction.

pub mod fit;

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::analytic;
use crate::error::{Error, Result};
use crate::lattice::{build_coupling_matrix, build_drive_vector, ArrayGeometry, ChiralCoupling, DriveField};
use crate::phases::{classify_populations, InterfaceAssignment, PhaseLabel, Thresholds};
use crate::solver::steady_state;

pub use fit::{fit_scaling, FitOptions, ScalingFit};

/// A grid over `(D, ξ₂)` at fixed `N`, `m`, `ξ₁` and drive.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n_atoms: usize,
    pub interface: usize,
    pub xi1: f64,
    pub theta: f64,
    pub rabi: f64,
    /// Per-site detunings; empty means resonant drive.
    pub detunings: Vec<f64>,
    pub xi2_values: Vec<f64>,
    pub d_values: Vec<f64>,
    pub thresholds: Thresholds,
    pub assignment: InterfaceAssignment,
}

impl SweepSpec {
    /// Spec with the default drive, thresholds and shared interface.
    pub fn new(n_atoms: usize, interface: usize, xi1: f64, xi2_values: Vec<f64>, d_values: Vec<f64>) -> Self {
        SweepSpec {
            n_atoms,
            interface,
            xi1,
            theta: DriveField::DEFAULT_THETA,
            rabi: DriveField::DEFAULT_RABI,
            detunings: Vec::new(),
            xi2_values,
            d_values,
            thresholds: Thresholds::default(),
            assignment: InterfaceAssignment::Shared,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.xi2_values.is_empty() {
            return Err(Error::invalid("xi2", "sweep axis is empty"));
        }
        if self.d_values.is_empty() {
            return Err(Error::invalid("d", "sweep axis is empty"));
        }
        ArrayGeometry::new(self.n_atoms, self.interface, self.xi1, self.xi1)?;
        for &xi2 in &self.xi2_values {
            ArrayGeometry::new(self.n_atoms, self.interface, self.xi1, xi2)?;
        }
        for &d in &self.d_values {
            ChiralCoupling::new(d)?;
        }
        self.drive()?;
        self.thresholds.validate()
    }

    pub fn drive(&self) -> Result<DriveField> {
        let detunings = if self.detunings.is_empty() {
            alloc::vec![0.0; self.n_atoms]
        } else {
            self.detunings.clone()
        };
        DriveField::new(self.rabi, self.theta, detunings)
    }

    pub fn cell_count(&self) -> usize {
        self.xi2_values.len() * self.d_values.len()
    }

    /// `(D, ξ₂)` of every cell in row-major order: one row per `D`.
    pub fn cell_parameters(&self) -> Vec<(f64, f64)> {
        self.d_values
            .iter()
            .flat_map(|&d| self.xi2_values.iter().map(move |&xi2| (d, xi2)))
            .collect()
    }
}

/// Summary of one regular cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub biased_population: f64,
    pub hd_flag: bool,
    pub left: PhaseLabel,
    pub right: PhaseLabel,
    pub left_shape: PhaseLabel,
    pub right_shape: PhaseLabel,
    pub composite_name: String,
    pub total_excitation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub directionality: f64,
    pub xi2: f64,
    /// `Err` marks a singular or otherwise unsolvable cell.
    pub outcome: core::result::Result<CellRecord, Error>,
}

impl SweepCell {
    pub fn is_singular(&self) -> bool {
        self.outcome.is_err()
    }

    pub fn record(&self) -> Option<&CellRecord> {
        self.outcome.as_ref().ok()
    }
}

/// Solves and classifies one cell.
pub fn evaluate_cell(spec: &SweepSpec, directionality: f64, xi2: f64) -> SweepCell {
    SweepCell {
        directionality,
        xi2,
        outcome: solve_cell(spec, directionality, xi2),
    }
}

fn solve_cell(spec: &SweepSpec, directionality: f64, xi2: f64) -> Result<CellRecord> {
    let geometry = ArrayGeometry::new(spec.n_atoms, spec.interface, spec.xi1, xi2)?;
    let coupling = ChiralCoupling::new(directionality)?;
    let drive = spec.drive()?;
    let matrix = build_coupling_matrix(&geometry, &coupling, &drive)?;
    let solution = steady_state(&matrix, &build_drive_vector(&geometry, &drive), spec.rabi)?;
    let report = classify_populations(&solution.populations, &geometry, spec.assignment, &spec.thresholds)?;
    Ok(CellRecord {
        biased_population: report.biased_population,
        hd_flag: report.hd_flag,
        left: report.left,
        right: report.right,
        left_shape: report.left_shape,
        right_shape: report.right_shape,
        composite_name: report.composite_name,
        total_excitation: solution.total_excitation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub spec: SweepSpec,
    /// Row-major over `(D, ξ₂)`.
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    /// Assembles a grid from cells evaluated in [`SweepSpec::cell_parameters`] order.
    pub fn from_cells(spec: SweepSpec, cells: Vec<SweepCell>) -> Result<Self> {
        if cells.len() != spec.cell_count() {
            return Err(Error::DimensionMismatch {
                expected: spec.cell_count(),
                actual: cells.len(),
            });
        }
        Ok(SweepGrid { spec, cells })
    }

    pub fn cell(&self, d_index: usize, xi2_index: usize) -> &SweepCell {
        &self.cells[d_index * self.spec.xi2_values.len() + xi2_index]
    }

    pub fn singular_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_singular()).count()
    }
}

/// Evaluates every cell sequentially.
pub fn sweep(spec: &SweepSpec) -> Result<SweepGrid> {
    spec.validate()?;
    let cells = spec
        .cell_parameters()
        .into_iter()
        .map(|(d, xi2)| evaluate_cell(spec, d, xi2))
        .collect();
    SweepGrid::from_cells(spec.clone(), cells)
}

/// Half-depletion map over `(D, ξ₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HdRegion {
    pub xi2_values: Vec<f64>,
    pub d_values: Vec<f64>,
    /// Row-major like [`SweepGrid`]; `None` marks a singular cell.
    pub flags: Vec<Option<bool>>,
    /// HD cells over regular cells.
    pub area_fraction: f64,
    /// `(d_index, xi2_index)` of HD cells with a regular non-HD neighbour.
    pub boundary_cells: Vec<(usize, usize)>,
}

impl HdRegion {
    pub fn from_grid(grid: &SweepGrid) -> Self {
        let rows = grid.spec.d_values.len();
        let cols = grid.spec.xi2_values.len();
        let flags: Vec<Option<bool>> = grid.cells.iter().map(|c| c.record().map(|r| r.hd_flag)).collect();
        let regular = flags.iter().filter(|f| f.is_some()).count();
        let hd = flags.iter().filter(|f| **f == Some(true)).count();
        let area_fraction = if regular == 0 { 0.0 } else { hd as f64 / regular as f64 };
        let at = |r: usize, c: usize| flags[r * cols + c];
        let mut boundary_cells = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if at(r, c) != Some(true) {
                    continue;
                }
                let mut neighbours = Vec::with_capacity(4);
                if r > 0 {
                    neighbours.push(at(r - 1, c));
                }
                if r + 1 < rows {
                    neighbours.push(at(r + 1, c));
                }
                if c > 0 {
                    neighbours.push(at(r, c - 1));
                }
                if c + 1 < cols {
                    neighbours.push(at(r, c + 1));
                }
                if neighbours.contains(&Some(false)) {
                    boundary_cells.push((r, c));
                }
            }
        }
        HdRegion {
            xi2_values: grid.spec.xi2_values.clone(),
            d_values: grid.spec.d_values.clone(),
            flags,
            area_fraction,
            boundary_cells,
        }
    }

    pub fn flag(&self, d_index: usize, xi2_index: usize) -> Option<bool> {
        self.flags[d_index * self.xi2_values.len() + xi2_index]
    }
}

/// Default HD-map axes: `ξ₂ = π(k+1)/r` and `D = j/(r-1)`.
pub fn hd_axes(resolution: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if resolution < 8 {
        return Err(Error::invalid("resolution", "need at least 8 points per axis"));
    }
    let xi2 = (0..resolution).map(|k| PI * (k + 1) as f64 / resolution as f64).collect();
    let d = (0..resolution).map(|j| j as f64 / (resolution - 1) as f64).collect();
    Ok((xi2, d))
}

/// HD map on the default axes.
pub fn hd_region(n_atoms: usize, interface: usize, xi1: f64, resolution: usize) -> Result<HdRegion> {
    let (xi2, d) = hd_axes(resolution)?;
    let grid = sweep(&SweepSpec::new(n_atoms, interface, xi1, xi2, d))?;
    Ok(HdRegion::from_grid(&grid))
}

/// How `B_D(ξ₂)` is evaluated during root finding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiasEvaluator {
    /// Reciprocal closed form; requires `D = 0`.
    ClosedForm,
    /// Dense steady-state solve at perpendicular incidence.
    Numeric,
}

/// `B_D` from a dense solve at perpendicular incidence.
pub fn numeric_biased_population(
    n_atoms: usize,
    interface: usize,
    xi1: f64,
    xi2: f64,
    directionality: f64,
) -> Result<f64> {
    let geometry = ArrayGeometry::new(n_atoms, interface, xi1, xi2)?;
    let coupling = ChiralCoupling::new(directionality)?;
    let drive = DriveField::uniform(n_atoms);
    let matrix = build_coupling_matrix(&geometry, &coupling, &drive)?;
    let solution = steady_state(&matrix, &build_drive_vector(&geometry, &drive), drive.rabi())?;
    crate::phases::biased_population(&solution.populations, interface)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalSearch {
    /// Search bracket; `None` selects `(ξ₁ + 0.01π, 0.999π)`.
    pub bracket: Option<(f64, f64)>,
    /// Final bracket width.
    pub tolerance: f64,
    pub prescan_points: usize,
    pub evaluator: BiasEvaluator,
}

impl Default for CriticalSearch {
    fn default() -> Self {
        CriticalSearch {
            bracket: None,
            tolerance: 1e-4 * PI,
            prescan_points: 64,
            evaluator: BiasEvaluator::Numeric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub xi2: f64,
    /// Final bisection bracket.
    pub lo: f64,
    pub hi: f64,
    pub evaluations: usize,
}

/// Smallest `ξ₂` above the `B_D` peak where `B_D` falls to `1/N`.
pub fn critical_xi2(
    n_atoms: usize,
    interface: usize,
    xi1: f64,
    directionality: f64,
    search: &CriticalSearch,
) -> Result<CriticalPoint> {
    let (lo, hi) = search.bracket.unwrap_or((xi1 + 0.01 * PI, 0.999 * PI));
    if !(lo < hi) || lo <= xi1 || hi > PI {
        return Err(Error::invalid("bracket", "need xi1 < lo < hi <= π"));
    }
    if !(search.tolerance > 0.0) {
        return Err(Error::invalid("tolerance", "must be positive"));
    }
    if search.prescan_points < 2 {
        return Err(Error::invalid("prescan_points", "need at least 2"));
    }
    if search.evaluator == BiasEvaluator::ClosedForm && directionality != 0.0 {
        return Err(Error::invalid("d", "the closed form needs D = 0"));
    }
    let threshold = 1.0 / n_atoms as f64;
    let mut evaluations = 0usize;
    let mut f = |xi2: f64| -> Result<f64> {
        evaluations += 1;
        let bd = match search.evaluator {
            BiasEvaluator::ClosedForm => analytic::biased_population_closed_form(n_atoms, interface, xi1, xi2)?,
            BiasEvaluator::Numeric => numeric_biased_population(n_atoms, interface, xi1, xi2, directionality)?,
        };
        Ok(bd - threshold)
    };

    let k = search.prescan_points;
    let xs: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect();
    let mut fs = Vec::with_capacity(k);
    for &x in &xs {
        fs.push(f(x)?);
    }
    let peak = (0..k).fold(0, |best, i| if fs[i] > fs[best] { i } else { best });
    let start = (peak..k - 1)
        .find(|&i| fs[i] > 0.0 && fs[i + 1] <= 0.0)
        .ok_or(Error::NoCrossing { lo, hi })?;

    let (mut a, mut b) = (xs[start], xs[start + 1]);
    while b - a > search.tolerance {
        let mid = 0.5 * (a + b);
        if f(mid)? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(CriticalPoint {
        xi2: 0.5 * (a + b),
        lo: a,
        hi: b,
        evaluations,
    })
}
