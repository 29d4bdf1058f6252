use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use chiral_array_core::gallery::GALLERY;
use chiral_array_core::lattice::{build_coupling_matrix, build_drive_vector};
use chiral_array_core::phases::{classify_array, PhaseReport, SegmentMetrics};
use chiral_array_core::scan::{
    critical_xi2, evaluate_cell, fit_scaling, BiasEvaluator, CriticalSearch, FitOptions, SweepGrid, SweepSpec,
};
use chiral_array_core::solver::steady_state;
use chiral_array_core::{ArrayGeometry, ChiralCoupling, DriveField, Error as CoreError, SteadyStateSolution};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{EvaluatorChoice, RunConfig};
use crate::error::CliError;
use crate::output::{Sink, Table};

pub const POPULATION_COLUMNS: [&str; 5] = [
    "site_index",
    "kx_over_pi",
    "re_amplitude_over_omega",
    "im_amplitude_over_omega",
    "population",
];

pub const SWEEP_COLUMNS: [&str; 8] = [
    "xi2_over_pi",
    "D",
    "B_D",
    "hd_flag",
    "left_label",
    "right_label",
    "composite_name",
    "singular_flag",
];

pub fn sink(config: &RunConfig) -> Result<Sink, CliError> {
    let s = Sink {
        directory: config.output.directory.clone(),
        format: config.output.format,
        precision: config.output.precision,
    };
    if s.precision == 0 || s.precision > 17 {
        return Err(CliError::validation("output.precision", "must lie in 1..=17"));
    }
    s.prepare()?;
    Ok(s)
}

/// Writes the fully resolved configuration next to the outputs.
pub fn write_resolved(sink: &Sink, config: &RunConfig, command: &str) -> Result<(), CliError> {
    let text = config.resolved()?.to_toml()?;
    sink.raw(&format!("{command}.config.toml"), text.as_bytes())?;
    Ok(())
}

fn solve(
    geometry: &ArrayGeometry,
    coupling: &ChiralCoupling,
    drive: &DriveField,
) -> Result<SteadyStateSolution, CliError> {
    let matrix = build_coupling_matrix(geometry, coupling, drive).map_err(|e| CliError::from_core("drive", e))?;
    steady_state(&matrix, &build_drive_vector(geometry, drive), drive.rabi())
        .map_err(|e| CliError::from_core("solve", e))
}

fn population_table(geometry: &ArrayGeometry, solution: &SteadyStateSolution) -> Table {
    let mut t = Table::new(&POPULATION_COLUMNS);
    let scaled = solution.scaled_amplitudes();
    for (j, (kx, (a, p))) in geometry
        .positions()
        .into_iter()
        .zip(scaled.iter().zip(&solution.populations))
        .enumerate()
    {
        t.push(vec![(j + 1).into(), (kx / PI).into(), a.re.into(), a.im.into(), (*p).into()]);
    }
    t
}

fn metrics_json(m: &SegmentMetrics) -> Value {
    json!({
        "sites": m.len,
        "participation_ratio": m.participation_ratio,
        "pr_fraction": m.pr_fraction,
        "structure_peak": m.structure_peak,
        "structure_wavenumber_over_pi": m.structure_wavenumber / PI,
        "bulk_modulation": m.modulation,
        "outer_ratio": m.outer_ratio,
        "inner_ratio": m.inner_ratio,
        "population_share": m.population_share,
    })
}

fn report_json(report: &PhaseReport) -> Value {
    json!({
        "B_D": report.biased_population,
        "hd_flag": report.hd_flag,
        "left_label": report.left.as_str(),
        "right_label": report.right.as_str(),
        "left_shape": report.left_shape.as_str(),
        "right_shape": report.right_shape.as_str(),
        "composite_name": report.composite_name,
        "shape_name": report.shape_name,
        "interface_assignment": report.interface_assignment.as_str(),
        "left_metrics": metrics_json(&report.left_metrics),
        "right_metrics": metrics_json(&report.right_metrics),
    })
}

fn write_json(sink: &Sink, name: &str, value: &Value) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    bytes.push(b'\n');
    sink.raw(name, &bytes)?;
    Ok(())
}

/// Single steady state: populations table plus a phase summary.
pub fn run_solve(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let geometry = config.geometry()?;
    let coupling = config.coupling()?;
    let drive = config.drive(geometry.n_atoms())?;
    let thresholds = config.thresholds.thresholds()?;
    let assignment = config.thresholds.assignment()?;
    let sink = sink(config)?;

    let solution = solve(&geometry, &coupling, &drive)?;
    let path = sink.table("populations", &population_table(&geometry, &solution))?;
    // Segments shorter than the classifier needs leave the phase unset.
    let report = match classify_array(&solution, &geometry, assignment, &thresholds) {
        Ok(r) => Some(r),
        Err(CoreError::InvalidParameter { .. }) => None,
        Err(e) => return Err(CliError::from_core("classify", e)),
    };
    let check = solution.weak_drive_check();
    write_json(
        &sink,
        "summary.json",
        &json!({
            "N": geometry.n_atoms(),
            "m": geometry.interface(),
            "residual_norm": solution.residual_norm,
            "condition_estimate": solution.condition_estimate,
            "total_excitation": solution.total_excitation,
            "weak_drive_exceeded": check.exceeds_limit,
            "phase": report.as_ref().map_or(Value::Null, report_json),
        }),
    )?;
    write_resolved(&sink, config, "solve")?;
    let mut lines = vec![format!("wrote {}", path.display())];
    if let Some(r) = report {
        lines.push(format!(
            "B_D = {:.6}  hd = {}  phase = {}",
            r.biased_population, r.hd_flag, r.composite_name
        ));
    }
    Ok(lines)
}

/// Phase report under every interface assignment.
pub fn run_classify(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let geometry = config.geometry()?;
    let coupling = config.coupling()?;
    let drive = config.drive(geometry.n_atoms())?;
    let thresholds = config.thresholds.thresholds()?;
    let assignment = config.thresholds.assignment()?;
    let sink = sink(config)?;

    let solution = solve(&geometry, &coupling, &drive)?;
    let report =
        classify_array(&solution, &geometry, assignment, &thresholds).map_err(|e| CliError::from_core("classify", e))?;
    let mut t = Table::new(&["interface_assignment", "left_label", "right_label", "left_share", "right_share"]);
    for a in &report.assignments {
        t.push(vec![
            a.assignment.as_str().into(),
            a.left.as_str().into(),
            a.right.as_str().into(),
            a.left_metrics.population_share.into(),
            a.right_metrics.population_share.into(),
        ]);
    }
    let path = sink.table("assignments", &t)?;
    write_json(&sink, "phase.json", &report_json(&report))?;
    write_resolved(&sink, config, "classify")?;
    let mut lines = vec![format!("phase = {}  (shape {})", report.composite_name, report.shape_name)];
    lines.push(format!("B_D = {:.6}  hd = {}", report.biased_population, report.hd_flag));
    lines.push(format!("wrote {}", path.display()));
    Ok(lines)
}

pub fn sweep_spec(config: &RunConfig) -> Result<SweepSpec, CliError> {
    let g = &config.geometry;
    let xi2: Vec<f64> = config.sweep.xi2.values("sweep.xi2")?.into_iter().map(|x| x * PI).collect();
    let d = config.sweep.d.values("sweep.d")?;
    let mut spec = SweepSpec::new(g.n, config.interface(g.n), g.xi1 * PI, xi2, d);
    spec.theta = config.drive.theta * PI;
    spec.rabi = config.drive.rabi;
    spec.detunings = config.detunings(g.n)?;
    spec.thresholds = config.thresholds.thresholds()?;
    spec.assignment = config.thresholds.assignment()?;
    spec.validate().map_err(|e| CliError::from_core("sweep", e))?;
    Ok(spec)
}

/// Cells are evaluated in parallel and reassembled in row-major order.
pub fn parallel_sweep(spec: SweepSpec) -> Result<SweepGrid, CliError> {
    let cells = spec
        .cell_parameters()
        .into_par_iter()
        .map(|(d, xi2)| evaluate_cell(&spec, d, xi2))
        .collect();
    SweepGrid::from_cells(spec, cells).map_err(|e| CliError::from_core("sweep", e))
}

pub fn sweep_table(grid: &SweepGrid) -> Table {
    let mut t = Table::new(&SWEEP_COLUMNS);
    for cell in &grid.cells {
        let r = cell.record();
        t.push(vec![
            (cell.xi2 / PI).into(),
            cell.directionality.into(),
            r.map(|r| r.biased_population).into(),
            r.map(|r| r.hd_flag).into(),
            r.map(|r| r.left.as_str()).into(),
            r.map(|r| r.right.as_str()).into(),
            r.map(|r| r.composite_name.clone()).into(),
            cell.is_singular().into(),
        ]);
    }
    t
}

pub fn run_sweep(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let spec = sweep_spec(config)?;
    let sink = sink(config)?;
    let grid = parallel_sweep(spec)?;
    let path = sink.table("sweep", &sweep_table(&grid))?;
    write_resolved(&sink, config, "sweep")?;
    let hd = grid.cells.iter().filter(|c| c.record().is_some_and(|r| r.hd_flag)).count();
    Ok(vec![
        format!("wrote {}", path.display()),
        format!(
            "{} cells, {} half-depleted, {} singular",
            grid.cells.len(),
            hd,
            grid.singular_count()
        ),
    ])
}

pub fn run_critical(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let c = &config.critical;
    if c.n_values.is_empty() {
        return Err(CliError::validation("critical.n_values", "no array sizes given"));
    }
    let evaluator = match c.evaluator {
        EvaluatorChoice::Numeric => BiasEvaluator::Numeric,
        EvaluatorChoice::ClosedForm => BiasEvaluator::ClosedForm,
    };
    let search = CriticalSearch {
        bracket: c.bracket.map(|[lo, hi]| (lo * PI, hi * PI)),
        tolerance: c.tolerance * PI,
        prescan_points: c.prescan,
        evaluator,
    };
    let xi1 = config.geometry.xi1 * PI;
    let d = config.coupling()?.directionality();
    let sink = sink(config)?;

    let results: Vec<_> = c
        .n_values
        .par_iter()
        .map(|&n| {
            let m = config.interface(n);
            critical_xi2(n, m, xi1, d, &search).map(|p| (n, m, p))
        })
        .collect();
    let mut t = Table::new(&["N", "m", "critical_xi2_over_pi", "lo_over_pi", "hi_over_pi", "evaluations"]);
    let mut lines = Vec::new();
    for r in results {
        let (n, m, p) = r.map_err(|e| CliError::from_core("critical", e))?;
        lines.push(format!("N = {n:>6}  critical xi2/pi = {:.6}", p.xi2 / PI));
        t.push(vec![
            n.into(),
            m.into(),
            (p.xi2 / PI).into(),
            (p.lo / PI).into(),
            (p.hi / PI).into(),
            p.evaluations.into(),
        ]);
    }
    let path = sink.table("critical", &t)?;
    write_resolved(&sink, config, "critical")?;
    lines.push(format!("wrote {}", path.display()));
    Ok(lines)
}

fn read_fit_input(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let bad = |msg: String| CliError::validation("fit.input", format!("{}: {msg}", path.display()));
    if path.extension().is_some_and(|e| e == "json") {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let rows: Vec<Value> = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        return rows
            .iter()
            .map(|r| match (r["N"].as_f64(), r["critical_xi2_over_pi"].as_f64()) {
                (Some(n), Some(y)) => Ok((n, y)),
                _ => Err(bad("rows need numeric N and critical_xi2_over_pi".into())),
            })
            .collect();
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("missing column {name}")))
    };
    let (ni, yi) = (col("N")?, col("critical_xi2_over_pi")?);
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let parse = |i: usize| {
            record
                .get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| bad(format!("unparseable row {record:?}")))
        };
        points.push((parse(ni)?, parse(yi)?));
    }
    Ok(points)
}

pub fn run_fit(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let f = &config.fit;
    let points: Vec<(f64, f64)> = match (&f.points, &f.input) {
        (Some(p), _) => p.iter().map(|&[n, y]| (n, y)).collect(),
        (None, Some(path)) => read_fit_input(path)?,
        (None, None) => return Err(CliError::validation("fit.points", "give fit.points or fit.input")),
    };
    let options = FitOptions {
        exponent_gap: f.exponent_gap,
        residual_ceiling: f.residual_ceiling,
        ..FitOptions::default()
    };
    let sink = sink(config)?;
    let fit = fit_scaling(&points, &options).map_err(|e| CliError::from_core("fit", e))?;

    let mut t = Table::new(&["N", "critical_xi2_over_pi", "model", "residual"]);
    for &(n, y) in &fit.points {
        let model = fit.model(n);
        t.push(vec![n.into(), y.into(), model.into(), (y - model).into()]);
    }
    let path = sink.table("fit_points", &t)?;
    let mut p = Table::new(&["a", "b", "c", "d", "residual_sum", "max_residual"]);
    p.push(vec![
        fit.a.into(),
        fit.b.into(),
        fit.c.into(),
        fit.d.into(),
        fit.residual_sum.into(),
        fit.max_residual.into(),
    ]);
    sink.table("fit", &p)?;
    write_resolved(&sink, config, "fit")?;
    Ok(vec![
        format!(
            "xi2_c/pi = {:.4} N^{:.4} + {:.4} N^{:.4}",
            fit.a, fit.b, fit.c, fit.d
        ),
        format!("max residual {:.2e}", fit.max_residual),
        format!("wrote {}", path.display()),
    ])
}

/// Solves every reference phase and writes one population file each
/// plus a manifest comparing the observed shape labels.
pub fn run_gallery(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let thresholds = config.thresholds.thresholds()?;
    let assignment = config.thresholds.assignment()?;
    let sink = sink(config)?;
    let dir = Sink {
        directory: sink.directory.join("gallery"),
        ..sink.clone()
    };
    dir.prepare()?;

    let solved: Vec<Result<_, CliError>> = GALLERY
        .par_iter()
        .map(|entry| {
            let ctx = |e: CoreError| CliError::from_core("gallery", e);
            let geometry = entry.geometry().map_err(ctx)?;
            let coupling = entry.coupling().map_err(ctx)?;
            let drive = DriveField::new(config.drive.rabi, config.drive.theta * PI, vec![0.0; entry.n_atoms])
                .map_err(|e| CliError::from_core("drive", e))?;
            let solution = solve(&geometry, &coupling, &drive)?;
            let report = classify_array(&solution, &geometry, assignment, &thresholds).map_err(ctx)?;
            Ok((entry, geometry, solution, report))
        })
        .collect();

    let mut manifest = Table::new(&[
        "tag",
        "expected_label",
        "observed_label",
        "matches",
        "composite_name",
        "D",
        "xi1_over_pi",
        "xi2_over_pi",
        "N",
        "B_D",
        "hd_flag",
        "file",
    ]);
    let mut matched = 0;
    for item in solved {
        let (entry, geometry, solution, report) = item?;
        let file = dir.table(&entry.tag.to_string(), &population_table(&geometry, &solution))?;
        let observed = format!("{}-{}", report.left_shape, report.right_shape);
        let ok = observed == entry.label;
        matched += usize::from(ok);
        manifest.push(vec![
            entry.tag.to_string().into(),
            entry.label.into(),
            observed.into(),
            ok.into(),
            report.composite_name.clone().into(),
            entry.directionality.into(),
            entry.xi1_over_pi.into(),
            entry.xi2_over_pi.into(),
            entry.n_atoms.into(),
            report.biased_population.into(),
            report.hd_flag.into(),
            format!("gallery/{}", file.file_name().unwrap_or_default().to_string_lossy()).into(),
        ]);
    }
    let path = sink.table("manifest", &manifest)?;
    write_resolved(&sink, config, "gallery")?;
    Ok(vec![
        format!("{matched}/{} reference phases reproduced", GALLERY.len()),
        format!("wrote {}", path.display()),
    ])
}
