//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so that every criterion is evaluated and
//! reported even when an earlier one fails. The process exits nonzero if any
//! criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;

use chiral_array_core::analytic::{
    dissimilar_inverse, dissimilar_steady_state, exact_critical_xi2, hd_boundary_xi2,
};
use chiral_array_core::gallery::GALLERY;
use chiral_array_core::linalg::ComplexMatrix;
use chiral_array_core::phases::{biased_population, classify_array, InterfaceAssignment, PhaseLabel, Thresholds};
use chiral_array_core::scan::{critical_xi2, fit_scaling, sweep, BiasEvaluator, CriticalSearch, FitOptions, SweepSpec};
use chiral_array_core::solver::time_evolve;
use chiral_array_core::{Complex64, DriveField};
use common::{expm, max_abs, max_abs_diff, Case};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const CRIT1_TOL: f64 = 1e-9;
const CRIT2_TOL: f64 = 0.002;
const CRIT2_CROSS_TOL: f64 = 2e-4;
const CRIT3_REL_TOL: f64 = 0.15;
const CRIT4_TOL: f64 = 0.005;
const CRIT7_TOL: f64 = 1e-6;
const CRIT7_DECAY: f64 = 1e-8;
const CRIT8_OMEGA_TOL: f64 = 1e-12;
const CRIT8_REFLECT_TOL: f64 = 1e-10;
const CRIT8_SHIELD_TOL: f64 = 1e-12;
const CRIT8_NORM_TOL: f64 = 1e-12;
const CRIT8_INVERSE_TOL: f64 = 1e-12;
const CRIT8_CASES: usize = 50;
const CRIT9_TOL: f64 = 0.01;

const TABLE_N: [usize; 5] = [100, 200, 500, 1000, 2000];
const TABLE_SMALL_XI1: [f64; 5] = [0.529, 0.553, 0.607, 0.665, 0.731];
const TABLE_LARGE_XI1: [f64; 5] = [0.976, 0.984, 0.990, 0.992, 0.994];

struct Report {
    failures: Vec<String>,
}

impl Report {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        println!("{} [{id}] {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures.push(id.to_string());
        }
    }

    fn info(&self, id: &str, detail: String) {
        println!("INFO [{id}] {detail}");
    }
}

fn grid(k: usize) -> Vec<f64> {
    (0..20).map(|i| (0.02 + 0.96 * i as f64 / 19.0) * PI).take(k).collect()
}

fn criterion_1(r: &mut Report) {
    let mut worst = 0.0f64;
    for n in [10, 100] {
        let m = n / 2;
        for &xi1 in &grid(20) {
            for &xi2 in &grid(20) {
                let numeric = Case::new(n, m, xi1, xi2, 0.0).solve().unwrap();
                let closed = dissimilar_steady_state(n, m, xi1, xi2, numeric.rabi).unwrap();
                let rel = max_abs_diff(&numeric.amplitudes, &closed.amplitudes) / max_abs(&closed.amplitudes);
                worst = worst.max(rel);
            }
        }
    }
    r.check(
        "1",
        worst < CRIT1_TOL,
        format!("closed-form vs dense amplitudes, 2x400 cases: max rel diff {worst:.2e} (< {CRIT1_TOL:e})"),
    );
}

fn certified_critical() -> Vec<f64> {
    let search = CriticalSearch {
        evaluator: BiasEvaluator::ClosedForm,
        ..CriticalSearch::default()
    };
    TABLE_N
        .iter()
        .map(|&n| critical_xi2(n, n / 2, 0.02 * PI, 0.0, &search).unwrap().xi2 / PI)
        .collect()
}

fn criterion_2(r: &mut Report) -> Vec<f64> {
    let found = certified_critical();
    let worst = found
        .iter()
        .zip(TABLE_SMALL_XI1)
        .map(|(f, t)| (f - t).abs())
        .fold(0.0, f64::max);
    let listing: Vec<String> = found.iter().map(|v| format!("{v:.4}")).collect();
    r.check(
        "2",
        worst <= CRIT2_TOL,
        format!(
            "critical xi2/pi at xi1=0.02pi, N={TABLE_N:?}: [{}]; max |diff| to table {worst:.4} (<= {CRIT2_TOL})",
            listing.join(", ")
        ),
    );

    let numeric = CriticalSearch::default();
    let mut cross = 0.0f64;
    for (i, &n) in TABLE_N.iter().enumerate().filter(|(_, &n)| n <= 500) {
        let v = critical_xi2(n, n / 2, 0.02 * PI, 0.0, &numeric).unwrap().xi2 / PI;
        cross = cross.max((v - found[i]).abs());
    }
    r.check(
        "2-numeric",
        cross <= CRIT2_CROSS_TOL,
        format!("dense-solver bisection vs closed form for N <= 500: max |diff| {cross:.2e} (<= {CRIT2_CROSS_TOL:e})"),
    );

    let search = CriticalSearch {
        evaluator: BiasEvaluator::ClosedForm,
        bracket: Some((0.21 * PI, 0.9999 * PI)),
        ..CriticalSearch::default()
    };
    let other: Vec<String> = TABLE_N
        .iter()
        .zip(TABLE_LARGE_XI1)
        .map(|(&n, t)| match critical_xi2(n, n / 2, 0.2 * PI, 0.0, &search) {
            Ok(p) => format!("N={n}: {:.4} (table {t})", p.xi2 / PI),
            Err(e) => format!("N={n}: {e} (table {t})"),
        })
        .collect();
    r.info("2", format!("xi1=0.2pi column, reported only: {}", other.join("; ")));
    found
}

fn criterion_3(r: &mut Report) {
    let cases = [
        ("a", 0.0, 0.8, 0.02, 0.0013),
        ("b", 0.1, 1e-5, 0.3, 0.0049),
        ("c", 0.2, 0.5, 1.0, 0.0065),
        ("d", 0.4, 0.2, 0.9, 0.0018),
    ];
    for (tag, d, xi1, xi2, expected) in cases {
        let sol = Case::new(100, 50, xi1 * PI, xi2 * PI, d).solve().unwrap();
        let bd = biased_population(&sol.populations, 50).unwrap();
        let rel = (bd - expected).abs() / expected;
        r.check(
            &format!("3{tag}"),
            rel <= CRIT3_REL_TOL,
            format!(
                "B_D at D={d}, xi1={xi1}pi, xi2={xi2}pi: {bd:.5} vs {expected} (rel diff {rel:.3}, <= {CRIT3_REL_TOL})"
            ),
        );
    }
}

fn criterion_4(r: &mut Report) {
    let boundary = hd_boundary_xi2(100, 0.02 * PI).unwrap() / PI;
    let exact = exact_critical_xi2(100, 50, 0.02 * PI).unwrap() / PI;
    let diff = (boundary - exact).abs();
    r.check(
        "4",
        diff <= CRIT4_TOL,
        format!("boundary formula {boundary:.5}pi vs exact crossing {exact:.5}pi: |diff| {diff:.5} (<= {CRIT4_TOL})"),
    );
}

fn criterion_5(r: &mut Report) {
    let thresholds = Thresholds::default();
    let mut mismatches = Vec::new();
    for entry in &GALLERY {
        let case = Case {
            geometry: entry.geometry().unwrap(),
            coupling: entry.coupling().unwrap(),
            drive: DriveField::uniform(entry.n_atoms),
        };
        let sol = case.solve().unwrap();
        let report = classify_array(&sol, &case.geometry, InterfaceAssignment::Shared, &thresholds).unwrap();
        let shape = format!("{}-{}", report.left_shape, report.right_shape);
        if shape != entry.label {
            mismatches.push(format!("({}) {shape} != {}", entry.tag, entry.label));
        }
    }
    r.check(
        "5",
        mismatches.is_empty(),
        format!(
            "gallery labels: {}/17 match{}",
            17 - mismatches.len(),
            if mismatches.is_empty() { String::new() } else { format!("; {}", mismatches.join(", ")) }
        ),
    );
}

fn criterion_6(r: &mut Report) {
    let mut xi2: Vec<f64> = (0..).map(|k| 0.001 + 0.0025 * k as f64).take_while(|&x| x < 1.0).collect();
    xi2.push(1.0);
    let spec = SweepSpec::new(100, 50, 0.02 * PI, xi2.iter().map(|x| x * PI).collect(), vec![0.2]);
    let grid = sweep(&spec).unwrap();
    let mut sequence: Vec<&str> = Vec::new();
    for cell in &grid.cells {
        let label = match cell.record().map(|c| c.right_shape) {
            Some(PhaseLabel::ECfd | PhaseLabel::OCfd) => "CFD",
            Some(l) => l.as_str(),
            None => "singular",
        };
        if sequence.last() != Some(&label) {
            sequence.push(label);
        }
    }
    let expected = ["ETD", "CO", "BE", "BH", "CO", "CFD"];
    r.check(
        "6",
        sequence == expected,
        format!("right-segment sequence over {} xi2 cells: {}", xi2.len(), sequence.join(" -> ")),
    );
}

fn criterion_7(r: &mut Report) {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut accepted = 0;
    let mut drawn = 0;
    while accepted < 10 {
        drawn += 1;
        let n = rng.gen_range(3..=6);
        let m = rng.gen_range(2..n);
        let xi1 = rng.gen_range(0.05..0.95) * PI;
        let xi2 = rng.gen_range(0.05..0.95) * PI;
        let d = rng.gen_range(-0.9..0.9);
        let theta = rng.gen_range(0.1..0.9) * PI;
        let drive = DriveField::new(1e-2, theta, vec![0.0; n]).unwrap();
        let case = Case::new(n, m, xi1, xi2, d).with_drive(drive);
        let matrix = case.matrix();
        let propagator = expm(&common::scaled(matrix.entries(), Complex64::new(200.0, 0.0)));
        if propagator.norm_one() > CRIT7_DECAY {
            continue;
        }
        accepted += 1;
        let sol = case.solve().unwrap();
        let zero = vec![Complex64::new(0.0, 0.0); n];
        let traj = time_evolve(&matrix, &case.drive_vector(), 1e-2, &zero, 200.0, 20_000).unwrap();
        let rel = max_abs_diff(traj.last(), &sol.amplitudes) / max_abs(&sol.amplitudes);
        worst = worst.max(rel);
    }
    r.check(
        "7",
        worst < CRIT7_TOL,
        format!(
            "RK4 at t=200 vs steady state, 10 sets ({drawn} drawn, slow subradiant sets skipped): max rel diff {worst:.2e} (< {CRIT7_TOL:e})"
        ),
    );
}

fn random_case(rng: &mut StdRng) -> (usize, usize, f64, f64) {
    let n = rng.gen_range(4..=40);
    let m = rng.gen_range(2..n);
    let xi1 = rng.gen_range(0.02..0.98) * PI;
    let xi2 = rng.gen_range(0.02..0.98) * PI;
    (n, m, xi1, xi2)
}

fn criterion_8(r: &mut Report) {
    let mut rng = StdRng::seed_from_u64(8);

    let mut omega = 0.0f64;
    let mut reflect = 0.0f64;
    let mut norm = 0.0f64;
    let mut bd_ok = true;
    for _ in 0..CRIT8_CASES {
        let d = rng.gen_range(-1.0..1.0);
        let (n, m, xi1, xi2) = random_case(&mut rng);
        let base = Case::new(n, m, xi1, xi2, d);
        let a = base.solve().unwrap();
        let scale = rng.gen_range(1e-4..1e-1);
        let b = Case::new(n, m, xi1, xi2, d)
            .with_drive(DriveField::uniform(n).with_rabi(scale).unwrap())
            .solve()
            .unwrap();
        omega = omega.max(a.populations.iter().zip(&b.populations).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));

        let mirrored = Case::new(n, n + 1 - m, xi2, xi1, -d).solve().unwrap();
        let diff = (0..n)
            .map(|j| (a.populations[j] - mirrored.populations[n - 1 - j]).abs())
            .fold(0.0, f64::max);
        reflect = reflect.max(diff);

        norm = norm.max((a.populations.iter().sum::<f64>() - 1.0).abs());
        let bd = biased_population(&a.populations, m).unwrap();
        bd_ok &= (0.0..=1.0).contains(&bd);
    }
    r.check("8-omega", omega <= CRIT8_OMEGA_TOL, format!("{CRIT8_CASES} cases: max population change under rescaled drive {omega:.2e} (<= {CRIT8_OMEGA_TOL:e})"));
    r.check("8-reflect", reflect <= CRIT8_REFLECT_TOL, format!("{CRIT8_CASES} cases: max mirror mismatch {reflect:.2e} (<= {CRIT8_REFLECT_TOL:e})"));
    r.check("8-norm", norm <= CRIT8_NORM_TOL, format!("{CRIT8_CASES} cases: max |sum P - 1| {norm:.2e} (<= {CRIT8_NORM_TOL:e})"));
    r.check("8-bd-range", bd_ok, format!("{CRIT8_CASES} cases: B_D within [0, 1]"));

    let mut shield = 0.0f64;
    for _ in 0..CRIT8_CASES {
        let (n, m, xi1, xi2) = random_case(&mut rng);
        let sol = Case::new(n, m, xi1, xi2, 1.0).solve().unwrap();
        let expected = Complex64::new(0.0, -2.0 * sol.rabi);
        shield = shield.max((sol.amplitudes[0] - expected).norm() / sol.rabi);
    }
    r.check("8-shield", shield <= CRIT8_SHIELD_TOL, format!("{CRIT8_CASES} cases at D=1: max |p1 + 2i Omega|/Omega {shield:.2e} (<= {CRIT8_SHIELD_TOL:e})"));

    let mut inverse = 0.0f64;
    for _ in 0..CRIT8_CASES {
        let n = rng.gen_range(3..=12);
        let m = rng.gen_range(2..n);
        let xi1 = rng.gen_range(0.02..0.98) * PI;
        let xi2 = rng.gen_range(0.02..0.98) * PI;
        let built = Case::new(n, m, xi1, xi2, 0.0).matrix();
        let product = built.entries().matmul(&dissimilar_inverse(n, m, xi1, xi2).unwrap()).unwrap();
        inverse = inverse.max(product.max_abs_diff(&ComplexMatrix::identity(n)));
    }
    r.check("8-inverse", inverse <= CRIT8_INVERSE_TOL, format!("{CRIT8_CASES} cases: max |M M^-1 - I| {inverse:.2e} (<= {CRIT8_INVERSE_TOL:e})"));
}

fn criterion_9(r: &mut Report, critical: &[f64]) {
    let points: Vec<(f64, f64)> = TABLE_N.iter().zip(critical).map(|(&n, &y)| (n as f64, y)).collect();
    match fit_scaling(&points, &FitOptions::default()) {
        Ok(fit) => {
            let probes: Vec<f64> = (0..40).map(|k| 2000.0 * 10f64.powf(k as f64 * 0.15)).collect();
            let values: Vec<f64> = probes.iter().map(|&n| fit.model(n)).collect();
            let monotone = values.windows(2).all(|w| w[1] >= w[0]) && values.iter().all(|&v| v <= 1.0);
            let pass = fit.max_residual < CRIT9_TOL && fit.b < 0.0 && fit.d < 0.0 && monotone;
            r.check(
                "9",
                pass,
                format!(
                    "fit (a,b,c,d)=({:.2}, {:.3}, {:.2}, {:.3}), max residual {:.4} (< {CRIT9_TOL}), exponents negative, model rises monotonically to 1 beyond N=2000: {monotone}",
                    fit.a, fit.b, fit.c, fit.d, fit.max_residual
                ),
            );
        }
        Err(e) => r.check("9", false, format!("fit failed: {e}")),
    }
}

fn main() -> ExitCode {
    let mut report = Report { failures: Vec::new() };
    criterion_1(&mut report);
    let critical = criterion_2(&mut report);
    criterion_3(&mut report);
    criterion_4(&mut report);
    criterion_5(&mut report);
    criterion_6(&mut report);
    criterion_7(&mut report);
    criterion_8(&mut report);
    criterion_9(&mut report, &critical);

    if report.failures.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {:?}", report.failures);
        ExitCode::FAILURE
    }
}
