//! Least-squares fit of `y = a N^b + c N^d + 1`.
//!
//! The exponents are searched by Nelder–Mead; for fixed `(b, d)` the
//! amplitudes `(a, c)` solve a 2×2 linear least-squares problem.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const STARTS: [f64; 3] = [-0.3, -0.5, -0.7];
const INFEASIBLE: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Minimum `|b - d|`; closer exponents make the amplitudes unidentifiable.
    pub exponent_gap: f64,
    /// Largest accepted residual sum of squares.
    pub residual_ceiling: f64,
    pub max_iterations: usize,
    /// Simplex stops once its objective spread falls below this.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            exponent_gap: 0.05,
            residual_ceiling: 1e-2,
            max_iterations: 4000,
            tolerance: 1e-24,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub residual_sum: f64,
    pub max_residual: f64,
    pub points: Vec<(f64, f64)>,
}

impl ScalingFit {
    pub fn model(&self, n: f64) -> f64 {
        self.a * libm::pow(n, self.b) + self.c * libm::pow(n, self.d) + 1.0
    }
}

struct Problem<'a> {
    points: &'a [(f64, f64)],
    gap: f64,
}

impl Problem<'_> {
    /// Best `(a, c)` and residual sum for fixed exponents.
    fn amplitudes(&self, b: f64, d: f64) -> Option<(f64, f64, f64)> {
        let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(n, y) in self.points {
            let u = libm::pow(n, b);
            let v = libm::pow(n, d);
            let t = y - 1.0;
            s11 += u * u;
            s12 += u * v;
            s22 += v * v;
            r1 += u * t;
            r2 += v * t;
        }
        let det = s11 * s22 - s12 * s12;
        if !(det.abs() > 1e-300) {
            return None;
        }
        let a = (r1 * s22 - r2 * s12) / det;
        let c = (s11 * r2 - s12 * r1) / det;
        let rss = self
            .points
            .iter()
            .map(|&(n, y)| {
                let e = a * libm::pow(n, b) + c * libm::pow(n, d) + 1.0 - y;
                e * e
            })
            .sum();
        Some((a, c, rss))
    }

    fn violation(&self, b: f64, d: f64) -> f64 {
        b.max(0.0) + d.max(0.0) + (self.gap - (b - d).abs()).max(0.0)
    }

    fn objective(&self, x: [f64; 2]) -> f64 {
        let violation = self.violation(x[0], x[1]);
        if violation > 0.0 {
            return INFEASIBLE * (1.0 + violation);
        }
        match self.amplitudes(x[0], x[1]) {
            Some((_, _, rss)) if rss.is_finite() => rss,
            _ => INFEASIBLE,
        }
    }
}

fn nelder_mead(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], options: &FitOptions) -> ([f64; 2], f64) {
    let step = 0.1;
    let mut simplex = [start, [start[0] + step, start[1]], [start[0], start[1] + step]];
    let mut values = simplex.map(&f);
    for _ in 0..options.max_iterations {
        let mut order = [0usize, 1, 2];
        order.sort_unstable_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        if values[2] - values[0] <= options.tolerance {
            break;
        }
        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };
        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] { along(-0.5) } else { along(0.5) };
            let fc = f(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = [
                        0.5 * (simplex[0][0] + simplex[k][0]),
                        0.5 * (simplex[0][1] + simplex[k][1]),
                    ];
                    values[k] = f(simplex[k]);
                }
            }
        }
    }
    let best = (0..3).fold(0, |b, i| if values[i] < values[b] { i } else { b });
    (simplex[best], values[best])
}

/// Fits `(N, y)` points with both exponents negative and at least
/// `exponent_gap` apart.
pub fn fit_scaling(points: &[(f64, f64)], options: &FitOptions) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::invalid("points", format!("need at least 4 points, got {}", points.len())));
    }
    for (i, &(n, y)) in points.iter().enumerate() {
        if !(n > 0.0 && n.is_finite() && y.is_finite()) {
            return Err(Error::invalid("points", format!("point {i} is not a positive N with finite value")));
        }
        if points[..i].iter().any(|&(m, _)| m == n) {
            return Err(Error::invalid("points", format!("N = {n} appears twice")));
        }
    }
    if !(options.exponent_gap >= 0.0) {
        return Err(Error::invalid("exponent_gap", "must be nonnegative"));
    }
    let problem = Problem {
        points,
        gap: options.exponent_gap,
    };
    let objective = |x: [f64; 2]| problem.objective(x);

    let mut best: Option<([f64; 2], f64)> = None;
    for b in STARTS {
        for d in STARTS {
            let (x, value) = nelder_mead(objective, [b, d], options);
            if best.is_none_or(|(_, v)| value < v) {
                best = Some((x, value));
            }
        }
    }
    let ([b, d], rss) = best.ok_or(Error::FitDiverged { residual: f64::INFINITY })?;
    if !(rss <= options.residual_ceiling) || problem.violation(b, d) > 0.0 {
        return Err(Error::FitDiverged { residual: rss });
    }
    let (a, c, residual_sum) = problem.amplitudes(b, d).ok_or(Error::FitDiverged { residual: rss })?;
    let mut fit = ScalingFit {
        a,
        b,
        c,
        d,
        residual_sum,
        max_residual: 0.0,
        points: points.to_vec(),
    };
    fit.max_residual = points
        .iter()
        .map(|&(n, y)| (fit.model(n) - y).abs())
        .fold(0.0, f64::max);
    Ok(fit)
}
