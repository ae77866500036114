//! Runs one configured scenario and writes its artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cfor::{calibrate_eta, CforController, TriggerEvent};
use crate::config::{Eta, Mode, RunConfig, CALIBRATION_HORIZON, CALIBRATION_REYNOLDS};
use crate::error::{Error, Result};
use crate::exact::{compare, ColeSolution, ErrorReport, VALIDATED_MAX_REYNOLDS};
use crate::grid::{Field, Grid};
use crate::kernels::{build_taps, frequency_response, Centering, KernelSpec};
use crate::solver::{BurgersSolver, MeasureSample, ProblemSpec, Reynolds, RunTrace, Snapshot};
use crate::spectrum::emit_fourier_image;
use crate::wavelet::{dwt_forward, WaveletFilterBank};

/// Samples per frequency-response curve.
pub const RESPONSE_SAMPLES: usize = 513;

#[derive(Debug, Clone, Serialize)]
pub struct BlowUpInfo {
    pub t: f64,
    pub node: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub mode: Mode,
    pub config: String,
    pub status: &'static str,
    pub reynolds: String,
    pub n_points: usize,
    pub dt: f64,
    pub t_final: f64,
    pub t_reached: f64,
    pub steps: usize,
    pub eta: Option<f64>,
    pub trigger_count: usize,
    pub first_trigger_t: Option<f64>,
    pub events: Vec<TriggerEvent>,
    pub max_abs_u: Option<f64>,
    pub final_total_variation: Option<f64>,
    pub errors: Vec<ErrorReport>,
    pub blowup: Option<BlowUpInfo>,
}

impl RunSummary {
    fn new(cfg: &RunConfig) -> Self {
        Self {
            mode: cfg.mode,
            config: cfg.to_text(),
            status: "ok",
            reynolds: cfg.reynolds.to_string(),
            n_points: cfg.n_points,
            dt: cfg.dt,
            t_final: cfg.effective_t_final(),
            t_reached: 0.0,
            steps: 0,
            eta: None,
            trigger_count: 0,
            first_trigger_t: None,
            events: Vec::new(),
            max_abs_u: None,
            final_total_variation: None,
            errors: Vec::new(),
            blowup: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub summary: RunSummary,
    pub files: Vec<PathBuf>,
}

/// Problem spec for a config (grid, kernels and horizon).
pub fn build_problem(cfg: &RunConfig) -> Result<ProblemSpec> {
    ProblemSpec::new(
        cfg.reynolds,
        Grid::unit(cfg.n_points)?,
        cfg.dt,
        cfg.effective_t_final(),
        cfg.w,
        cfg.sigma_ratio_deriv,
    )
}

pub fn build_controller(
    cfg: &RunConfig,
    problem: &ProblemSpec,
    eta: f64,
) -> Result<CforController> {
    let lowpass = KernelSpec::new(problem.grid.spacing(), cfg.sigma_ratio_lowpass, cfg.w, 0)?;
    CforController::new(eta, lowpass, cfg.scales)
}

/// Smooth reference used for automatic η: same grid, step and kernels.
pub fn calibration_reference(problem: &ProblemSpec) -> Result<ProblemSpec> {
    problem
        .clone()
        .with_reynolds(Reynolds::Finite(CALIBRATION_REYNOLDS))?
        .with_t_final(problem.t_final.max(CALIBRATION_HORIZON))
}

pub fn resolve_eta(cfg: &RunConfig, problem: &ProblemSpec) -> Result<f64> {
    match cfg.eta {
        Eta::Value(v) => Ok(v),
        Eta::Auto => {
            let template = build_controller(cfg, problem, 1.0)?;
            calibrate_eta(problem, &template, &calibration_reference(problem)?)
        }
    }
}

/// Exact solution for the snapshot columns. The table mode insists on one
/// even outside the validated range.
fn exact_for(mode: Mode, reynolds: Reynolds) -> Result<Option<ColeSolution>> {
    match reynolds {
        Reynolds::Finite(re) if re <= VALIDATED_MAX_REYNOLDS => {
            Ok(Some(ColeSolution::for_reynolds(re)?))
        }
        Reynolds::Finite(re) if mode == Mode::Table1 => {
            eprintln!("warning: Re = {re} is above {VALIDATED_MAX_REYNOLDS}; exact values are unvalidated");
            Ok(Some(ColeSolution::for_reynolds(re)?))
        }
        _ => Ok(None),
    }
}

fn time_tag(t: f64) -> String {
    format!("{t}")
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn snapshot(
        &mut self,
        prefix: &str,
        snap: &Snapshot,
        exact: Option<&ColeSolution>,
    ) -> Result<Option<ErrorReport>> {
        let path = self.path(&format!("{prefix}_t{}.csv", time_tag(snap.t)));
        match exact {
            None => {
                snap.field.save_csv(&path)?;
                Ok(None)
            }
            Some(sol) => {
                let reference = sol.sample(snap.field.grid(), snap.t)?;
                write_with_exact(&path, &snap.field, &reference)?;
                Ok(Some(compare(&snap.field, &reference, snap.t)))
            }
        }
    }

    fn triggers(&mut self, events: &[TriggerEvent]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path("triggers.csv"))?;
        w.write_record(["t", "measure_before", "measure_after"])?;
        for e in events {
            w.write_record([
                e.t.to_string(),
                e.measure_before.to_string(),
                e.measure_after.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    fn measures(&mut self, name: &str, samples: &[MeasureSample]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(["t", "measure"])?;
        for s in samples {
            w.write_record([s.t.to_string(), s.total.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    fn summary(&mut self, summary: &RunSummary) -> Result<()> {
        let path = self.path("summary.json");
        let mut text = serde_json::to_string_pretty(summary)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

fn write_with_exact(path: &Path, numeric: &Field, exact: &Field) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "u", "u_exact", "error"])?;
    for ((x, u), e) in numeric
        .grid()
        .nodes()
        .zip(numeric.values())
        .zip(exact.values())
    {
        w.write_record([
            x.to_string(),
            u.to_string(),
            e.to_string(),
            (u - e).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs `cfg`. On blow-up the partial outputs are written before the error
/// is returned.
pub fn run_scenario(cfg: &RunConfig, verbose: bool) -> Result<ScenarioOutcome> {
    cfg.validate()?;
    let mut out = Writer::new(&cfg.output_dir)?;
    let mut summary = RunSummary::new(cfg);
    let result = match cfg.mode {
        Mode::Filters => run_filters(cfg, &mut out),
        Mode::Dsc | Mode::Cfor | Mode::Table1 => {
            run_evolution(cfg, &mut out, &mut summary, verbose)
        }
        Mode::Fourier => run_fourier(cfg, &mut out, &mut summary),
    };
    if let Err(Error::BlowUp { t, node, .. }) = &result {
        summary.status = "blowup";
        summary.blowup = Some(BlowUpInfo { t: *t, node: *node });
    }
    if result.is_ok() || summary.blowup.is_some() {
        out.summary(&summary)?;
    }
    result?;
    Ok(ScenarioOutcome {
        summary,
        files: out.files,
    })
}

fn run_filters(cfg: &RunConfig, out: &mut Writer) -> Result<()> {
    let grid = Grid::unit(cfg.n_points)?;
    let lowpass = KernelSpec::new(grid.spacing(), cfg.sigma_ratio_lowpass, cfg.w, 0)?;
    let curves = [
        ("lowpass", build_taps(&lowpass, Centering::HalfGrid)),
        ("d1", build_taps(&lowpass.with_order(1)?, Centering::OnGrid)),
        ("d2", build_taps(&lowpass.with_order(2)?, Centering::OnGrid)),
    ];
    for (name, taps) in &curves {
        frequency_response(taps, RESPONSE_SAMPLES, true)
            .save_csv(&out.path(&format!("response_{name}.csv")))?;
        taps.save_csv(&out.path(&format!("taps_{name}.csv")))?;
    }
    Ok(())
}

fn summarize_trace(summary: &mut RunSummary, trace: &RunTrace, eta: Option<f64>) {
    summary.t_reached = trace.final_state.t;
    summary.steps = trace.final_state.step;
    summary.eta = eta;
    summary.trigger_count = trace.events.len();
    summary.first_trigger_t = trace.events.first().map(|e| e.t);
    summary.events = trace.events.clone();
    summary.max_abs_u = Some(trace.peak_abs);
    summary.final_total_variation = Some(trace.final_state.field.total_variation());
}

fn run_evolution(
    cfg: &RunConfig,
    out: &mut Writer,
    summary: &mut RunSummary,
    verbose: bool,
) -> Result<()> {
    let problem = build_problem(cfg)?;
    let exact = exact_for(cfg.mode, cfg.reynolds)?;
    let solver = BurgersSolver::new(problem.clone())?;
    let times = cfg.effective_snapshots();

    let (eta, mut controller) = if cfg.mode == Mode::Cfor {
        let eta = resolve_eta(cfg, &problem)?;
        if verbose {
            eprintln!("alarm threshold eta = {eta}");
        }
        (Some(eta), Some(build_controller(cfg, &problem, eta)?))
    } else {
        (None, None)
    };

    let (trace, failure) = match solver.run(controller.as_mut(), &times) {
        Ok(tr) => (tr, None),
        Err(Error::BlowUp { t, node, trace }) => (*trace, Some((t, node))),
        Err(e) => return Err(e),
    };
    summarize_trace(summary, &trace, eta);

    let prefix = if cfg.mode == Mode::Cfor {
        "cfor"
    } else {
        "dsc"
    };
    for snap in &trace.snapshots {
        if let Some(report) = out.snapshot(prefix, snap, exact.as_ref())? {
            summary.errors.push(report);
        }
    }
    if cfg.mode == Mode::Cfor {
        out.triggers(&trace.events)?;
        out.measures("measures.csv", &trace.measures)?;
        if failure.is_none() {
            let bank = WaveletFilterBank::cdf97();
            dwt_forward(trace.final_state.field.values(), &bank, cfg.scales)?
                .save_csv(&cfg.output_dir.join("wavelet"))?;
        }
    }
    if cfg.mode == Mode::Table1 {
        write_table(cfg, out, &summary.errors, verbose)?;
    }
    if let Some((t, node)) = failure {
        return Err(Error::BlowUp {
            t,
            node,
            trace: Box::new(trace),
        });
    }
    Ok(())
}

fn write_table(
    cfg: &RunConfig,
    out: &mut Writer,
    rows: &[ErrorReport],
    verbose: bool,
) -> Result<()> {
    let mut w = csv::Writer::from_path(out.path("table1.csv"))?;
    let mut header = vec!["time", "l_inf", "l_1"];
    if verbose {
        header.push("l_1_sum");
    }
    w.write_record(&header)?;
    println!(
        "Re = {}, N = {}, dt = {}",
        cfg.reynolds, cfg.n_points, cfg.dt
    );
    println!("{:>8}  {:>12}  {:>12}", "time", "L_inf", "L_1");
    for r in rows {
        let mut rec = vec![r.t.to_string(), r.l_inf.to_string(), r.l_1.to_string()];
        if verbose {
            rec.push(r.l_1_sum.to_string());
        }
        w.write_record(&rec)?;
        println!("{:>8}  {:>12.3e}  {:>12.3e}", r.t, r.l_inf, r.l_1);
    }
    w.flush()?;
    Ok(())
}

fn run_fourier(cfg: &RunConfig, out: &mut Writer, summary: &mut RunSummary) -> Result<()> {
    let problem = build_problem(cfg)?;
    let solver = BurgersSolver::new(problem.clone())?;
    let t_final = problem.t_final;

    let plain = solver.run(None, &[t_final])?;
    let mut plain_ctl = build_controller(cfg, &problem, f64::MAX)?;
    let plain_measures = solver.run(Some(&mut plain_ctl), &[])?.measures;

    let eta = resolve_eta(cfg, &problem)?;
    let mut controller = build_controller(cfg, &problem, eta)?;
    let controlled = solver.run(Some(&mut controller), &[t_final])?;
    summarize_trace(summary, &controlled, Some(eta));

    for (name, trace) in [("uncontrolled", &plain), ("cfor", &controlled)] {
        let field = &trace.final_state.field;
        emit_fourier_image(field)?.save_csv(&out.path(&format!("fourier_{name}.csv")))?;
        field.save_csv(&out.path(&format!("profile_{name}.csv")))?;
    }
    out.measures("measures_uncontrolled.csv", &plain_measures)?;
    out.measures("measures_cfor.csv", &controlled.measures)?;
    out.triggers(&controlled.events)?;
    Ok(())
}
