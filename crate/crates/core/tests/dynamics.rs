//! Whole-run properties of the solver and the controller.

use std::f64::consts::PI;

use cfor_burgers::cfor::{calibrate_eta, CforController};
use cfor_burgers::exact::ColeSolution;
use cfor_burgers::grid::{Field, Grid};
use cfor_burgers::kernels::KernelSpec;
use cfor_burgers::solver::{BurgersSolver, ProblemSpec, Reynolds};
use cfor_burgers::spectrum::emit_fourier_image;

fn problem(re: Reynolds, n: usize, dt: f64, t_final: f64) -> ProblemSpec {
    ProblemSpec::new(re, Grid::unit(n).unwrap(), dt, t_final, 35, 4.5).unwrap()
}

fn calibrated(p: &ProblemSpec) -> CforController {
    let lp = KernelSpec::new(p.grid.spacing(), 3.2, 35, 0).unwrap();
    let template = CforController::new(1.0, lp, 3).unwrap();
    let reference = p
        .clone()
        .with_reynolds(Reynolds::Finite(100.0))
        .unwrap()
        .with_t_final(3.0)
        .unwrap();
    let eta = calibrate_eta(p, &template, &reference).unwrap();
    template.with_eta(eta).unwrap()
}

fn shock_problem() -> ProblemSpec {
    problem(Reynolds::Finite(1e5), 64, 0.001, 0.5)
}

/// Sine coefficients of the interior values (plain O(N²) sum).
fn sine_coefficients(u: &[f64], count: usize) -> Vec<f64> {
    let m = u.len() - 1;
    (1..=count)
        .map(|k| {
            2.0 / m as f64
                * (1..m)
                    .map(|j| u[j] * (PI * (k * j) as f64 / m as f64).sin())
                    .sum::<f64>()
        })
        .collect()
}

#[test]
fn time_error_is_fourth_order() {
    let base = problem(Reynolds::Finite(100.0), 41, 0.01, 0.4);
    let run = |dt: f64| {
        let mut p = base.clone();
        p.dt = dt;
        BurgersSolver::new(p)
            .unwrap()
            .run(None, &[])
            .unwrap()
            .final_state
            .field
    };
    let reference = run(0.000625);
    let err = |f: &Field| {
        f.values()
            .iter()
            .zip(reference.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    };
    let (e1, e2) = (err(&run(0.01)), err(&run(0.005)));
    assert!(e1 / e2 >= 2f64.powf(3.5), "{e1:.3e} / {e2:.3e}");
}

#[test]
fn smooth_run_decays_monotonically_and_tracks_exact_maximum() {
    let p = problem(Reynolds::Finite(100.0), 41, 0.01, 3.0);
    let times: Vec<f64> = (0..=25).map(|k| 0.5 + 0.1 * k as f64).collect();
    let trace = BurgersSolver::new(p).unwrap().run(None, &times).unwrap();
    let exact = ColeSolution::for_reynolds(100.0).unwrap();
    let mut last = f64::INFINITY;
    for s in &trace.snapshots {
        let m = s.field.max_abs();
        assert!(m < last, "t = {}", s.t);
        last = m;
        let em = exact.sample(s.field.grid(), s.t).unwrap().max_abs();
        assert!((m - em).abs() < 5e-3, "t = {}: {m} vs {em}", s.t);
    }
    assert!(trace.peak_abs <= 1.0);
}

#[test]
fn controlled_run_matches_plain_run_until_first_trigger() {
    let p = shock_problem();
    let solver = BurgersSolver::new(p.clone()).unwrap();
    let mut c = calibrated(&p);
    let mut plain = solver.initial_state();
    let mut ctl = solver.initial_state();
    c.reset();
    loop {
        plain = solver.rk4_step(&plain).unwrap();
        let (next, triggered) = c.check_and_filter(solver.rk4_step(&ctl).unwrap()).unwrap();
        if triggered {
            assert_ne!(next, plain);
            break;
        }
        assert_eq!(next, plain, "diverged before any trigger at t = {}", next.t);
        ctl = next;
        assert!(ctl.t < 0.5, "no trigger before t = 0.5");
    }
}

#[test]
fn shock_run_triggers_at_onset_and_filtering_lowers_the_measure() {
    let p = shock_problem();
    let mut c = calibrated(&p);
    let trace = BurgersSolver::new(p)
        .unwrap()
        .run(Some(&mut c), &[])
        .unwrap();
    let first = trace.events.first().expect("at least one trigger").t;
    assert!((0.25..=0.40).contains(&first), "first trigger at {first}");
    for e in &trace.events {
        assert!(e.measure_after <= e.measure_before, "{e:?}");
    }
    assert_eq!(trace.measures.len(), 500);
}

#[test]
fn uncontrolled_shock_run_oscillates() {
    let trace = BurgersSolver::new(shock_problem())
        .unwrap()
        .run(None, &[0.5])
        .unwrap();
    let u = &trace.snapshot_at(0.5).unwrap().field;
    assert!(
        u.total_variation() >= 2.0 * 2.2,
        "TV {}",
        u.total_variation()
    );
    let img = emit_fourier_image(u).unwrap();
    assert!(img.argmax() <= 2);
    // a second, separate peak sits near Nyquist
    let mid = img.magnitude[img.magnitude.len() / 2];
    let high = img.peak_above(0.9);
    assert!(high >= 0.1 && high >= 4.0 * mid, "high {high}, mid {mid}");
}

#[test]
fn controller_keeps_the_low_frequencies() {
    let p = shock_problem();
    let solver = BurgersSolver::new(p.clone()).unwrap();
    let plain = solver.run(None, &[0.5]).unwrap();
    let mut c = calibrated(&p);
    let ctl = solver.run(Some(&mut c), &[0.5]).unwrap();
    let a = sine_coefficients(ctl.snapshot_at(0.5).unwrap().field.values(), 5);
    let b = sine_coefficients(plain.snapshot_at(0.5).unwrap().field.values(), 5);
    for (k, (x, y)) in a.iter().zip(&b).enumerate() {
        assert!(
            (x - y).abs() <= 0.05 * y.abs(),
            "mode {}: {x} vs {y}",
            k + 1
        );
    }
    let img = emit_fourier_image(&ctl.snapshot_at(0.5).unwrap().field).unwrap();
    assert!(img.peak_above(0.9) <= 1e-2);
}

#[test]
fn conservative_form_stays_close_on_smooth_problem() {
    use cfor_burgers::solver::AdvectionForm;
    let p = problem(Reynolds::Finite(100.0), 41, 0.01, 0.4);
    let a = BurgersSolver::new(p.clone())
        .unwrap()
        .run(None, &[])
        .unwrap();
    let b = BurgersSolver::new(p.with_advection(AdvectionForm::Conservative))
        .unwrap()
        .run(None, &[])
        .unwrap();
    let exact = ColeSolution::for_reynolds(100.0)
        .unwrap()
        .sample(&Grid::unit(41).unwrap(), 0.4)
        .unwrap();
    let err = |f: &Field| {
        f.values()
            .iter()
            .zip(exact.values())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    };
    assert!(err(&a.final_state.field) < 1.2e-2);
    assert!(err(&b.final_state.field) < 1.2e-2);
}
