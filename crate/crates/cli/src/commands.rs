//! The four subcommands. Each returns its checks; files go to `out`.

use std::path::Path;

use altlin::catalog::CatalogId;
use altlin::dynamics::{figure1_curves, figure1_exact, fitted_order, integrate, larmor_constants, FlowProblem, MagneticSystem};
use altlin::geometry::pushforward_frame_2d;
use altlin::linstruct::{check_axioms, LinearStructure, Point};
use altlin::moyal::{bracket_in_chart_at, moyal_bracket, poisson_bracket, richardson_limit, Chart, PhasePoly};
use altlin::weyl::{
    adjoint_mismatch_residual, ccr_expectation, drifting_gaussians, finite_weyl_residual, interior_gaussians,
    non_closure_witness, non_isometry_witness, weyl_composition_residual, Derivative, Grid1D,
};
use nalgebra::Vector4;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::report::{csv_table, ensure_dir, svg_polylines, write_file, Check, Report};
use crate::scenario::{Format, Scenario};

/// Default seeds of `curves`: eight points on two squares.
const CURVE_SEEDS: [&[f64]; 8] =
    [&[0.5, 0.0], &[0.0, 0.5], &[-0.5, 0.0], &[0.0, -0.5], &[1.0, 1.0], &[-1.0, 1.0], &[-1.0, -1.0], &[1.0, -1.0]];

/// Default `(Q¹, Q², U¹, U²)` of `magnetic`.
const MAGNETIC_SEEDS: [&[f64]; 1] = [&[1.0, 0.0, 0.0, 1.0]];

/// Thresholds of the two-measure witnesses and the Moyal limit order. These
/// are lower bounds on signals, not tolerances, so `ALTLIN_TOL_SCALE` leaves
/// them alone.
pub const ISOMETRY_WITNESS_MIN: f64 = 0.05;
pub const CLOSURE_WITNESS_FACTOR: f64 = 0.1;
pub const MOYAL_ORDER_MIN: f64 = 1.9;

pub fn axioms(s: &Scenario, tol_scale: f64, out: &Path) -> Result<Report, CliError> {
    let structure = s.structure()?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let samples = structure.axiom_samples(&mut rng, s.samples);
    let ls = LinearStructure::new(structure)?;
    let r = check_axioms(&ls, &samples)?;
    let tol = s.linstruct_tolerances(tol_scale);
    let mut report = Report::default();
    for (law, res, t) in r.rows(&tol) {
        report.checks.push(Check::at_most(law, res, t));
    }
    ensure_dir(out)?;
    report.files.push(write_file(&out.join("axioms.csv"), &report.checks_csv())?);
    Ok(report)
}

pub fn curves(s: &Scenario, tol_scale: f64, out: &Path) -> Result<Report, CliError> {
    if s.catalog_id()? != CatalogId::KTransform {
        return Err(CliError::Config(format!("curves needs structure_id k-transform, got {}", s.structure_id)));
    }
    let t = s.k_transform()?;
    let seeds = s.seeds_of_dim(2, &CURVE_SEEDS)?;
    let [t0, t1] = s.integrator.t_span;
    let all = figure1_curves(&t, &seeds, (t0, t1), s.integrator.dt)?;
    ensure_dir(out)?;
    let mut report = Report::default();
    let mut worst = 0.0_f64;
    let mut lines = Vec::new();
    for c in &all {
        let seed = &seeds[c.seed];
        let mut rows = Vec::with_capacity(c.trajectory.len());
        for (time, x) in c.trajectory.times.iter().zip(&c.trajectory.states) {
            let exact = figure1_exact(&t, c.field, seed, time - t0);
            worst = worst.max((x - exact).amax());
            rows.push(vec![*time, x[0], x[1]]);
        }
        let name = format!("curve_{:02}_{}.csv", c.seed, c.field.label());
        report.files.push(write_file(&out.join(name), &csv_table(&["t", "q", "p"], &rows))?);
        let class = usize::from(c.field != altlin::dynamics::FrameField::DQ);
        lines.push((class, c.trajectory.states.iter().map(|x| (x[0], x[1])).collect()));
    }
    if s.output.format == Format::Svg {
        report.files.push(write_file(&out.join("curves.svg"), &svg_polylines(&lines))?);
    }
    report.checks.push(Check::info("curves", all.len() as f64));
    report.checks.push(Check::at_most("max_deviation_from_exact_flow", worst, s.tolerance("curve", tol_scale)));
    Ok(report)
}

pub fn magnetic(s: &Scenario, tol_scale: f64, out: &Path) -> Result<Report, CliError> {
    let sys = MagneticSystem::new(s.b);
    let seeds = s.seeds_of_dim(4, &MAGNETIC_SEEDS)?;
    let [t0, t1] = s.integrator.t_span;
    let g = sys.g();
    let field = |x: &Point| {
        let v = g * Vector4::new(x[0], x[1], x[2], x[3]);
        Point::from_column_slice(v.as_slice())
    };
    ensure_dir(out)?;
    let mut report = Report::default();
    let mut summary = Vec::new();
    for (i, seed) in seeds.iter().enumerate() {
        let x0 = Vector4::new(seed[0], seed[1], seed[2], seed[3]);
        let rk4 = integrate(&FlowProblem::new(field, (t0, t1), s.integrator.dt, seed.clone()))?;
        let (c1, c2) = larmor_constants(&x0, s.b);
        let e0 = sys.hamiltonian(&x0);
        let (mut sympl, mut larmor, mut energy, mut expm, mut dev) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        let mut rows = Vec::with_capacity(rk4.len());
        for (time, y) in rk4.times.iter().zip(&rk4.states) {
            let dt = time - t0;
            let x = sys.evolve(&x0, dt);
            let (d1, d2) = larmor_constants(&x, s.b);
            let e = sys.hamiltonian(&x);
            sympl = sympl.max(sys.symplectic_residual(dt));
            larmor = larmor.max((d1 - c1).abs()).max((d2 - c2).abs());
            energy = energy.max((e - e0).abs());
            expm = expm.max((sys.f(dt) - sys.f_expm(dt)).amax());
            dev = dev.max((y - Point::from_column_slice(x.as_slice())).amax());
            rows.push(vec![*time, x[0], x[1], x[2], x[3], d1, d2, e]);
        }
        let name = format!("magnetic_{i:02}.csv");
        let header = ["t", "Q1", "Q2", "U1", "U2", "chi1", "chi2", "energy"];
        report.files.push(write_file(&out.join(name), &csv_table(&header, &rows))?);
        summary.push(vec![i as f64, sympl, larmor, energy, expm, dev]);
        report.checks.push(Check::at_most(format!("seed{i:02}_symplectic"), sympl, s.tolerance("symplectic", tol_scale)));
        report.checks.push(Check::at_most(format!("seed{i:02}_larmor_drift"), larmor, s.tolerance("larmor", tol_scale)));
        report.checks.push(Check::at_most(format!("seed{i:02}_energy_drift"), energy, s.tolerance("energy", tol_scale)));
        report.checks.push(Check::at_most(format!("seed{i:02}_closed_form_vs_expm"), expm, s.tolerance("expm", tol_scale)));
        report.checks.push(Check::at_most(format!("seed{i:02}_rk4_vs_exact"), dev, s.tolerance("rk4", tol_scale)));
    }
    let header = ["seed", "max_symplectic_residual", "max_larmor_drift", "energy_drift", "closed_form_vs_expm", "rk4_vs_exact"];
    report.files.push(write_file(&out.join("magnetic_summary.csv"), &csv_table(&header, &summary))?);
    Ok(report)
}

/// Fixed pair for the classical-limit fit: `f = q³p − 2p³ + q²/2`,
/// `g = (3/2)qp³ + q³`.
pub fn moyal_limit_pair() -> (PhasePoly, PhasePoly) {
    let f = &(&PhasePoly::monomial(3, 1, 1.0) + &PhasePoly::monomial(0, 3, -2.0)) + &PhasePoly::monomial(2, 0, 0.5);
    let g = &PhasePoly::monomial(1, 3, 1.5) + &PhasePoly::monomial(3, 0, 1.0);
    (f, g)
}

pub const MOYAL_HBARS: [f64; 3] = [1e-1, 1e-2, 1e-3];

pub fn quantum(s: &Scenario, tol_scale: f64, out: &Path) -> Result<Report, CliError> {
    let grid = Grid1D::new(s.grid.n, s.grid.extent).map_err(|e| CliError::Config(e.to_string()))?;
    let t = s.k_transform()?;
    let hbar = s.hbar;
    let x = grid.extent();
    let d = grid.delta();
    let mut report = Report::default();

    let finite = (2..=16).map(finite_weyl_residual).collect::<Result<Vec<_>, _>>()?;
    report.checks.push(Check::at_most("finite_weyl_relation", finite.into_iter().fold(0.0, f64::max), s.tolerance("weyl", tol_scale)));

    let unit = std::f64::consts::PI * hbar / x;
    let comp = weyl_composition_residual(&grid, (3.0 * d, 2.0 * unit), (-5.0 * d, 3.0 * unit), hbar);
    report.checks.push(Check::at_most("weyl_composition_phase", comp, s.tolerance("composition", tol_scale)));

    let psi = grid.gaussian(0.0, 0.2 * x, 0.0);
    let ccr = (ccr_expectation(&grid, hbar, Derivative::Central, &psi) - 1.0).norm();
    report.checks.push(Check::at_most("ccr_expectation_deviation", ccr, s.tolerance("ccr", tol_scale)));

    let interior = interior_gaussians(&grid);
    let corrected = adjoint_mismatch_residual(&grid, &t, hbar, 1.0, &interior);
    let opposite = adjoint_mismatch_residual(&grid, &t, hbar, -1.0, &interior);
    report.checks.push(Check::at_most("adjoint_mismatch_vs_plus_profile", corrected, s.tolerance("mismatch", tol_scale)));
    report.checks.push(Check::info("adjoint_mismatch_vs_minus_profile", opposite));

    let drifting = drifting_gaussians(&grid);
    let iso = non_isometry_witness(&grid, &t, &drifting);
    let nc = non_closure_witness(&grid, &t, hbar, &drifting);
    if t.lambda() > 0.0 {
        report.checks.push(Check::at_least("non_isometry_witness", iso, ISOMETRY_WITNESS_MIN));
        report.checks.push(Check::at_least("non_closure_norm", nc.norm, CLOSURE_WITNESS_FACTOR * t.lambda()));
    } else {
        report.checks.push(Check::info("non_isometry_witness", iso));
        report.checks.push(Check::info("non_closure_norm", nc.norm));
    }
    report.checks.push(Check::info("non_closure_outside_span", nc.outside_span));

    let (f, g) = moyal_limit_pair();
    let classical = poisson_bracket(&f, &g);
    let errs = MOYAL_HBARS.iter().map(|&h| Ok(moyal_bracket(&f, &g, h)?.distance(&classical))).collect::<Result<Vec<_>, altlin::Error>>()?;
    report.checks.push(Check::at_least("moyal_limit_order", fitted_order(&MOYAL_HBARS, &errs), MOYAL_ORDER_MIN));

    let point = (1.1, 0.0);
    let chart = Chart::Deformed(t);
    let vals = MOYAL_HBARS
        .iter()
        .map(|&h| Ok(bracket_in_chart_at(&PhasePoly::q(), &PhasePoly::p(), h, &chart, point.0, point.1)?.re))
        .collect::<Result<Vec<_>, altlin::Error>>()?;
    let limit = richardson_limit(&MOYAL_HBARS, &vals);
    let jac = pushforward_frame_2d(&t, &Point::from_vec(vec![point.0, point.1]))?.d;
    report.checks.push(Check::info("chart_bracket_limit", limit));
    report.checks.push(Check::at_most("chart_bracket_limit_vs_det", (limit - jac).abs(), s.tolerance("limit", tol_scale)));

    ensure_dir(out)?;
    report.files.push(write_file(&out.join("quantum.csv"), &report.checks_csv())?);
    Ok(report)
}
