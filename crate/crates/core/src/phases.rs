//! Phase metrics and the segment/array classifier.
//!
//! Each segment is oriented so that its outer end (the array boundary) and
//! its inner end (the interface side) can be compared against the bulk
//! median. Labels follow a fixed cascade whose constants live in
//! [`Thresholds`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::ArrayGeometry;
use crate::solver::SteadyStateSolution;

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseLabel {
    Etd,
    Co,
    Be,
    Bh,
    ECfd,
    OCfd,
    Eh,
    He,
    Hd,
}

impl PhaseLabel {
    pub const ALL: [PhaseLabel; 9] = [
        PhaseLabel::Etd,
        PhaseLabel::Co,
        PhaseLabel::Be,
        PhaseLabel::Bh,
        PhaseLabel::ECfd,
        PhaseLabel::OCfd,
        PhaseLabel::Eh,
        PhaseLabel::He,
        PhaseLabel::Hd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLabel::Etd => "ETD",
            PhaseLabel::Co => "CO",
            PhaseLabel::Be => "BE",
            PhaseLabel::Bh => "BH",
            PhaseLabel::ECfd => "eCFD",
            PhaseLabel::OCfd => "oCFD",
            PhaseLabel::Eh => "EH",
            PhaseLabel::He => "HE",
            PhaseLabel::Hd => "HD",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which segment(s) the interface site belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum InterfaceAssignment {
    Left,
    Right,
    #[default]
    Shared,
    Excluded,
}

impl InterfaceAssignment {
    pub const ALL: [InterfaceAssignment; 4] = [
        InterfaceAssignment::Left,
        InterfaceAssignment::Right,
        InterfaceAssignment::Shared,
        InterfaceAssignment::Excluded,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InterfaceAssignment::Left => "left",
            InterfaceAssignment::Right => "right",
            InterfaceAssignment::Shared => "shared",
            InterfaceAssignment::Excluded => "excluded",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str() == s)
    }

    fn left_has_interface(self) -> bool {
        matches!(self, InterfaceAssignment::Left | InterfaceAssignment::Shared)
    }

    fn right_has_interface(self) -> bool {
        matches!(self, InterfaceAssignment::Right | InterfaceAssignment::Shared)
    }
}

/// Side of the interface a segment lies on; fixes which end is outer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentSide {
    Left,
    Right,
}

/// Classifier constants. Ratios are relative to the bulk median.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Outer end counts as excited at or above this ratio.
    pub outer_excited: f64,
    /// Outer end counts as a hole at or below this ratio.
    pub outer_hole: f64,
    /// Inner end counts as a spike at or above this ratio.
    pub inner_spike: f64,
    /// Site next to a spiking inner end must reach this ratio for an extended spike.
    pub inner_spike_extended: f64,
    /// A dip at or below this ratio next to the inner end counts as a hole.
    pub inner_hole: f64,
    /// Number of sites after the inner end searched for a hole.
    pub inner_window: usize,
    /// Bulk modulation (MAD over median) at or above which a segment is CO.
    pub co_modulation: f64,
    /// Fraction of differences that must agree for monotone/convex CFD shapes.
    pub cfd_fraction: f64,
    /// Minimum R² of a linear fit for the even CFD ramp.
    pub cfd_linearity: f64,
    /// Distance from π below which a segment phase counts as π.
    pub pi_tolerance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            outer_excited: 1.25,
            outer_hole: 0.85,
            inner_spike: 1.6,
            inner_spike_extended: 1.4,
            inner_hole: 0.96,
            inner_window: 3,
            co_modulation: 0.04,
            cfd_fraction: 0.9,
            cfd_linearity: 0.97,
            pi_tolerance: crate::PI_TOLERANCE,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("outer_excited", self.outer_excited),
            ("outer_hole", self.outer_hole),
            ("inner_spike", self.inner_spike),
            ("inner_spike_extended", self.inner_spike_extended),
            ("inner_hole", self.inner_hole),
            ("co_modulation", self.co_modulation),
            ("pi_tolerance", self.pi_tolerance),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        for (name, v) in [("cfd_fraction", self.cfd_fraction), ("cfd_linearity", self.cfd_linearity)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        if self.outer_hole >= self.outer_excited {
            return Err(Error::invalid("outer_hole", "must be below outer_excited"));
        }
        if self.inner_window == 0 {
            return Err(Error::invalid("inner_window", "must be at least 1"));
        }
        Ok(())
    }
}

/// `1 / Σ P²` of a normalized distribution.
pub fn participation_ratio(populations: &[f64]) -> Result<f64> {
    check_normalized(populations)?;
    let sum_sq: f64 = populations.iter().map(|p| p * p).sum();
    Ok(1.0 / sum_sq)
}

fn check_normalized(populations: &[f64]) -> Result<()> {
    if populations.is_empty() {
        return Err(Error::EmptySegment);
    }
    let sum: f64 = populations.iter().sum();
    if !((sum - 1.0).abs() <= NORMALIZATION_TOLERANCE) || populations.iter().any(|&p| p < 0.0) {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

/// `|Σ_j q_j e^{iκj}|²` of a normalized segment.
pub fn structure_factor(segment: &[f64], kappa: f64) -> Result<f64> {
    check_normalized(segment)?;
    let sum: Complex64 = segment
        .iter()
        .enumerate()
        .map(|(j, &q)| Complex64::from_polar(q, kappa * j as f64))
        .sum();
    Ok(sum.norm_sqr())
}

/// Largest structure factor over `κ = 2πl/n`, `l = 1 … n-1`, with its `κ`.
pub fn structure_peak(segment: &[f64]) -> Result<(f64, f64)> {
    check_normalized(segment)?;
    let n = segment.len();
    let mut best = (0.0, 0.0);
    for l in 1..n {
        let kappa = 2.0 * PI * l as f64 / n as f64;
        let s = structure_factor(segment, kappa)?;
        if s > best.0 {
            best = (s, kappa);
        }
    }
    Ok(best)
}

/// Segment population imbalance around the 1-based interface `m`.
///
/// Accepts unnormalized populations; the result is scale invariant.
pub fn biased_population(populations: &[f64], m: usize) -> Result<f64> {
    let n = populations.len();
    if m <= 1 || m >= n {
        return Err(Error::invalid("m", format!("need 1 < m < N, got m = {m}, N = {n}")));
    }
    let left: f64 = populations[..m - 1].iter().sum();
    let right: f64 = populations[m..].iter().sum();
    let denominator = left + right;
    if !(denominator > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    Ok((1.0 - (left - right).abs() / denominator).clamp(0.0, 1.0))
}

fn median(values: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn fraction(count: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        count as f64 / total as f64
    }
}

fn linear_fit_r2(q: &[f64]) -> f64 {
    let n = q.len() as f64;
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = q.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (j, &y) in q.iter().enumerate() {
        let dx = j as f64 - mean_x;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}

/// Shape descriptors of one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMetrics {
    pub side: SegmentSide,
    pub len: usize,
    pub participation_ratio: f64,
    pub pr_fraction: f64,
    pub structure_peak: f64,
    pub structure_wavenumber: f64,
    /// Segment-normalized populations of the first and last site.
    pub edge_left: f64,
    pub edge_right: f64,
    pub bulk_mean: f64,
    pub bulk_cv: f64,
    pub bulk_median: f64,
    /// Median absolute deviation of the bulk over its median.
    pub modulation: f64,
    /// Outer end over bulk median.
    pub outer_ratio: f64,
    /// Inner end over bulk median.
    pub inner_ratio: f64,
    /// Site next to the inner end over bulk median.
    pub inner_next_ratio: f64,
    /// Smallest ratio in the window following the inner end.
    pub inner_window_min: f64,
    pub monotone_fraction: f64,
    pub convex_fraction: f64,
    pub linearity: f64,
    /// Share of the whole array population, interface site excluded.
    pub population_share: f64,
}

impl SegmentMetrics {
    /// `segment` holds raw populations in site order; `share` is the
    /// segment's fraction of the array population.
    pub fn compute(
        segment: &[f64],
        side: SegmentSide,
        share: f64,
        thresholds: &Thresholds,
    ) -> Result<Self> {
        let len = segment.len();
        if len == 0 {
            return Err(Error::EmptySegment);
        }
        if len < 3 {
            return Err(Error::invalid("segment", format!("need at least 3 sites, got {len}")));
        }
        let total: f64 = segment.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroVector);
        }
        let q: Vec<f64> = segment.iter().map(|p| p / total).collect();
        let participation_ratio = participation_ratio(&q)?;
        let (structure_peak, structure_wavenumber) = structure_peak(&q)?;

        let bulk = &q[1..len - 1];
        let bulk_mean = bulk.iter().sum::<f64>() / bulk.len() as f64;
        let variance =
            bulk.iter().map(|b| (b - bulk_mean) * (b - bulk_mean)).sum::<f64>() / bulk.len() as f64;
        let bulk_cv = libm::sqrt(variance) / bulk_mean;
        let bulk_median = median(bulk);
        let deviations: Vec<f64> = bulk.iter().map(|b| (b - bulk_median).abs()).collect();
        let modulation = median(&deviations) / bulk_median;

        // Ratios ordered from the inner end outwards.
        let ratio = |p: f64| p / bulk_median;
        let inward: Vec<f64> = match side {
            SegmentSide::Left => q.iter().rev().map(|&p| ratio(p)).collect(),
            SegmentSide::Right => q.iter().map(|&p| ratio(p)).collect(),
        };
        let outer_ratio = inward[len - 1];
        let window_end = (1 + thresholds.inner_window).min(len);
        let inner_window_min = inward[1..window_end].iter().copied().fold(f64::INFINITY, f64::min);

        let diffs: Vec<f64> = q.windows(2).map(|w| w[1] - w[0]).collect();
        let rising = diffs.iter().filter(|&&d| d >= 0.0).count();
        let falling = diffs.iter().filter(|&&d| d <= 0.0).count();
        let monotone_fraction = fraction(rising.max(falling), diffs.len());
        let convex = diffs.windows(2).filter(|w| w[1] - w[0] >= 0.0).count();
        let convex_fraction = fraction(convex, diffs.len().saturating_sub(1));

        Ok(SegmentMetrics {
            side,
            len,
            participation_ratio,
            pr_fraction: participation_ratio / len as f64,
            structure_peak,
            structure_wavenumber,
            edge_left: q[0],
            edge_right: q[len - 1],
            bulk_mean,
            bulk_cv,
            bulk_median,
            modulation,
            outer_ratio,
            inner_ratio: inward[0],
            inner_next_ratio: inward[1],
            inner_window_min,
            monotone_fraction,
            convex_fraction,
            linearity: linear_fit_r2(&q),
            population_share: share,
        })
    }

    pub fn parity_even(&self) -> bool {
        self.len.is_multiple_of(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OuterEnd {
    Excited,
    Hole,
    Neutral,
}

/// Shape label of one segment with lattice phase `xi`.
///
/// Cascade: CFD at `ξ = π`, then CO by bulk modulation, then the end-state
/// table. HD is never produced here.
pub fn classify_segment(metrics: &SegmentMetrics, xi: f64, thresholds: &Thresholds) -> PhaseLabel {
    if (xi - PI).abs() <= thresholds.pi_tolerance {
        let monotone = metrics.monotone_fraction >= thresholds.cfd_fraction;
        if monotone && metrics.linearity >= thresholds.cfd_linearity {
            return PhaseLabel::ECfd;
        }
        if metrics.convex_fraction >= thresholds.cfd_fraction {
            return PhaseLabel::OCfd;
        }
        return if metrics.parity_even() {
            PhaseLabel::ECfd
        } else {
            PhaseLabel::OCfd
        };
    }
    if metrics.modulation >= thresholds.co_modulation {
        return PhaseLabel::Co;
    }

    let outer = if metrics.outer_ratio >= thresholds.outer_excited {
        OuterEnd::Excited
    } else if metrics.outer_ratio <= thresholds.outer_hole {
        OuterEnd::Hole
    } else {
        OuterEnd::Neutral
    };
    let spike = metrics.inner_ratio >= thresholds.inner_spike;
    let extended = spike && metrics.inner_next_ratio >= thresholds.inner_spike_extended;
    let hole = metrics.inner_window_min <= thresholds.inner_hole;
    // Mixed labels read from the left array end to the right one.
    let (outer_excited_mixed, outer_hole_mixed) = match metrics.side {
        SegmentSide::Left => (PhaseLabel::Eh, PhaseLabel::He),
        SegmentSide::Right => (PhaseLabel::He, PhaseLabel::Eh),
    };

    match outer {
        OuterEnd::Excited if spike => PhaseLabel::Be,
        OuterEnd::Excited if hole => outer_excited_mixed,
        OuterEnd::Excited => PhaseLabel::Be,
        OuterEnd::Hole if extended => outer_hole_mixed,
        OuterEnd::Hole => PhaseLabel::Bh,
        OuterEnd::Neutral if spike => PhaseLabel::Be,
        OuterEnd::Neutral if hole => PhaseLabel::Bh,
        OuterEnd::Neutral => PhaseLabel::Etd,
    }
}

/// Labels and metrics under one interface assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentOutcome {
    pub assignment: InterfaceAssignment,
    pub left: PhaseLabel,
    pub right: PhaseLabel,
    pub left_metrics: SegmentMetrics,
    pub right_metrics: SegmentMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    /// Labels after the HD override.
    pub left: PhaseLabel,
    pub right: PhaseLabel,
    /// Labels before the HD override.
    pub left_shape: PhaseLabel,
    pub right_shape: PhaseLabel,
    pub composite_name: String,
    pub shape_name: String,
    pub left_metrics: SegmentMetrics,
    pub right_metrics: SegmentMetrics,
    pub biased_population: f64,
    pub hd_flag: bool,
    pub interface_assignment: InterfaceAssignment,
    /// Outcomes for all four assignments, in [`InterfaceAssignment::ALL`] order.
    pub assignments: Vec<AssignmentOutcome>,
}

/// Both outer array ends excited with mixed segment labels.
fn overall_be(left: PhaseLabel, right: PhaseLabel) -> bool {
    use PhaseLabel::*;
    matches!(left, Be | Eh) && matches!(right, Be | He) && !(left == Be && right == Be)
}

/// Display name of a label pair.
pub fn composite_name(left: PhaseLabel, right: PhaseLabel) -> String {
    if left == right && left == PhaseLabel::Etd {
        return String::from("ETD");
    }
    if overall_be(left, right) {
        format!("{left}-{right} (overall BE)")
    } else {
        format!("{left}-{right}")
    }
}

/// Classifies the steady state of `geometry`.
pub fn classify_array(
    solution: &SteadyStateSolution,
    geometry: &ArrayGeometry,
    assignment: InterfaceAssignment,
    thresholds: &Thresholds,
) -> Result<PhaseReport> {
    classify_populations(&solution.populations, geometry, assignment, thresholds)
}

/// Classifies a population profile laid out on `geometry`.
pub fn classify_populations(
    populations: &[f64],
    geometry: &ArrayGeometry,
    assignment: InterfaceAssignment,
    thresholds: &Thresholds,
) -> Result<PhaseReport> {
    let n = geometry.n_atoms();
    if populations.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: populations.len(),
        });
    }
    thresholds.validate()?;
    let m = geometry.interface();
    let total: f64 = populations.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroVector);
    }
    let left_share = populations[..m - 1].iter().sum::<f64>() / total;
    let right_share = populations[m..].iter().sum::<f64>() / total;
    let biased = biased_population(populations, m)?;
    let hd_flag = biased <= 1.0 / n as f64;

    let mut assignments = Vec::with_capacity(4);
    for a in InterfaceAssignment::ALL {
        let left_end = if a.left_has_interface() { m } else { m - 1 };
        let right_start = if a.right_has_interface() { m - 1 } else { m };
        let left_metrics =
            SegmentMetrics::compute(&populations[..left_end], SegmentSide::Left, left_share, thresholds)?;
        let right_metrics = SegmentMetrics::compute(
            &populations[right_start..],
            SegmentSide::Right,
            right_share,
            thresholds,
        )?;
        assignments.push(AssignmentOutcome {
            assignment: a,
            left: classify_segment(&left_metrics, geometry.xi1(), thresholds),
            right: classify_segment(&right_metrics, geometry.xi2(), thresholds),
            left_metrics,
            right_metrics,
        });
    }

    let chosen = assignments
        .iter()
        .find(|o| o.assignment == assignment)
        .cloned()
        .ok_or(Error::NoSolution)?;
    let (mut left, mut right) = (chosen.left, chosen.right);
    if hd_flag {
        if left_share <= right_share {
            left = PhaseLabel::Hd;
        } else {
            right = PhaseLabel::Hd;
        }
    }
    Ok(PhaseReport {
        left,
        right,
        left_shape: chosen.left,
        right_shape: chosen.right,
        composite_name: composite_name(left, right),
        shape_name: composite_name(chosen.left, chosen.right),
        left_metrics: chosen.left_metrics,
        right_metrics: chosen.right_metrics,
        biased_population: biased,
        hd_flag,
        interface_assignment: assignment,
        assignments,
    })
}
