//! Method-of-lines discretization of Burgers' equation
//!
//! ```text
//! u_t + u·u_x = (1/Re)·u_xx,   u(x,0) = sin(πx),   u(0,t) = u(1,t) = 0
//! ```
//!
//! with DSC derivative filters in space and classical RK4 in time.

use std::f64::consts::PI;

use serde::Serialize;

use crate::cfor::{CforController, TriggerEvent};
use crate::error::{Error, Result};
use crate::grid::{convolve_odd, Field, Grid};
use crate::kernels::{build_taps, Centering, FilterTaps, KernelSpec};

/// Any |u| above this aborts the run.
pub const BLOWUP_LIMIT: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Reynolds {
    Finite(f64),
    /// Drops the diffusion term entirely.
    Inviscid,
}

impl Reynolds {
    pub fn viscosity(&self) -> Option<f64> {
        match self {
            Reynolds::Finite(re) => Some(1.0 / re),
            Reynolds::Inviscid => None,
        }
    }
}

impl std::fmt::Display for Reynolds {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Reynolds::Finite(re) => write!(f, "{re}"),
            Reynolds::Inviscid => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum AdvectionForm {
    /// u·D₁u, as the equation is written.
    #[default]
    NonConservative,
    /// D₁(u²/2).
    Conservative,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    SinePi,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub reynolds: Reynolds,
    pub grid: Grid,
    pub dt: f64,
    pub t_final: f64,
    pub deriv_first: KernelSpec,
    pub deriv_second: KernelSpec,
    pub advection: AdvectionForm,
    pub initial: InitialCondition,
}

impl ProblemSpec {
    /// Problem on `grid` with shared (W, σ/Δ) for both derivative filters.
    pub fn new(
        reynolds: Reynolds,
        grid: Grid,
        dt: f64,
        t_final: f64,
        half_width: usize,
        sigma_ratio: f64,
    ) -> Result<Self> {
        let first = KernelSpec::new(grid.spacing(), sigma_ratio, half_width, 1)?;
        let spec = Self {
            reynolds,
            grid,
            dt,
            t_final,
            deriv_first: first,
            deriv_second: first.with_order(2)?,
            advection: AdvectionForm::default(),
            initial: InitialCondition::SinePi,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_advection(mut self, advection: AdvectionForm) -> Self {
        self.advection = advection;
        self
    }

    pub fn with_initial(mut self, initial: InitialCondition) -> Result<Self> {
        self.initial = initial;
        self.validate()?;
        Ok(self)
    }

    pub fn with_t_final(mut self, t_final: f64) -> Result<Self> {
        self.t_final = t_final;
        self.validate()?;
        Ok(self)
    }

    pub fn with_reynolds(mut self, reynolds: Reynolds) -> Result<Self> {
        self.reynolds = reynolds;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if let Reynolds::Finite(re) = self.reynolds {
            if !(re.is_finite() && re > 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "Reynolds number must be positive, got {re}"
                )));
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::InvalidProblem(format!(
                "bad final time {}",
                self.t_final
            )));
        }
        if self.deriv_first.order() != 1 || self.deriv_second.order() != 2 {
            return Err(Error::InvalidProblem(
                "derivative kernels must have orders 1 and 2".into(),
            ));
        }
        for k in [&self.deriv_first, &self.deriv_second] {
            if (k.delta() - self.grid.spacing()).abs() > 1e-12 * self.grid.spacing() {
                return Err(Error::InvalidProblem(
                    "kernel spacing differs from grid spacing".into(),
                ));
            }
            if k.half_width() >= self.grid.n_points() {
                return Err(Error::PadTooLarge {
                    pad: k.half_width(),
                    n_points: self.grid.n_points(),
                });
            }
        }
        if let InitialCondition::Custom(v) = &self.initial {
            if v.len() != self.grid.n_points() {
                return Err(Error::InvalidProblem(format!(
                    "initial profile has {} values for {} nodes",
                    v.len(),
                    self.grid.n_points()
                )));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub step: usize,
    pub field: Field,
}

/// sin(πx_k) with exact zeros at both ends.
pub fn initial_condition(grid: &Grid) -> Field {
    let mut f = Field::from_fn(*grid, |x| (PI * x).sin());
    f.pin_boundaries();
    f
}

/// One classical RK4 step for du/dt = f(u).
pub fn rk4<E>(
    u: &[f64],
    dt: f64,
    mut f: impl FnMut(&[f64]) -> Result<Vec<f64>, E>,
) -> Result<Vec<f64>, E> {
    let axpy =
        |a: f64, k: &[f64]| -> Vec<f64> { u.iter().zip(k).map(|(ui, ki)| ui + a * ki).collect() };
    let k1 = f(u)?;
    let k2 = f(&axpy(0.5 * dt, &k1))?;
    let k3 = f(&axpy(0.5 * dt, &k2))?;
    let k4 = f(&axpy(dt, &k3))?;
    Ok((0..u.len())
        .map(|i| u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub step: usize,
    pub field: Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureSample {
    pub t: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub initial: Field,
    pub snapshots: Vec<Snapshot>,
    /// Per-step high-pass measure, recorded only with a controller attached.
    pub measures: Vec<MeasureSample>,
    pub events: Vec<TriggerEvent>,
    pub final_state: SolverState,
    /// max |u| over every completed step (after filtering).
    pub peak_abs: f64,
}

impl RunTrace {
    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

/// A problem with its derivative filters sampled once.
#[derive(Debug, Clone)]
pub struct BurgersSolver {
    problem: ProblemSpec,
    first: FilterTaps,
    second: FilterTaps,
}

impl BurgersSolver {
    pub fn new(problem: ProblemSpec) -> Result<Self> {
        problem.validate()?;
        let first = build_taps(&problem.deriv_first, Centering::OnGrid);
        let second = build_taps(&problem.deriv_second, Centering::OnGrid);
        Ok(Self {
            problem,
            first,
            second,
        })
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn initial_state(&self) -> SolverState {
        let field = match &self.problem.initial {
            InitialCondition::SinePi => initial_condition(&self.problem.grid),
            InitialCondition::Custom(v) => {
                let mut f = Field::new(self.problem.grid, v.clone()).expect("validated length");
                f.pin_boundaries();
                f
            }
        };
        SolverState {
            t: 0.0,
            step: 0,
            field,
        }
    }

    fn rhs_values(&self, u: &[f64], t: f64) -> Result<Vec<f64>> {
        if let Some(node) = u.iter().position(|v| !v.is_finite()) {
            return Err(self.blowup_without_trace(t, node));
        }
        let mut r = match self.problem.advection {
            AdvectionForm::NonConservative => {
                let du = convolve_odd(u, &self.first)?;
                u.iter()
                    .zip(&du)
                    .map(|(ui, di)| -ui * di)
                    .collect::<Vec<_>>()
            }
            AdvectionForm::Conservative => {
                let flux: Vec<f64> = u.iter().map(|v| 0.5 * v * v).collect();
                // u² is even about both boundaries
                let df = convolve_even(&flux, &self.first);
                df.into_iter().map(|d| -d).collect()
            }
        };
        if let Some(nu) = self.problem.reynolds.viscosity() {
            let d2 = convolve_odd(u, &self.second)?;
            r.iter_mut().zip(&d2).for_each(|(ri, di)| *ri += nu * di);
        }
        let n = r.len();
        r[0] = 0.0;
        r[n - 1] = 0.0;
        if let Some(node) = r.iter().position(|v| !v.is_finite()) {
            return Err(self.blowup_without_trace(t, node));
        }
        Ok(r)
    }

    fn blowup_without_trace(&self, t: f64, node: usize) -> Error {
        Error::BlowUp {
            t,
            node,
            trace: Box::new(RunTrace {
                initial: self.initial_state().field,
                snapshots: Vec::new(),
                measures: Vec::new(),
                events: Vec::new(),
                final_state: self.initial_state(),
                peak_abs: self.initial_state().field.max_abs(),
            }),
        }
    }

    /// −u·D₁u + (1/Re)·D₂u (or −D₁(u²/2) + … in conservative form).
    pub fn rhs(&self, state: &SolverState) -> Result<Field> {
        let values = self.rhs_values(state.field.values(), state.t)?;
        Field::new(self.problem.grid, values)
    }

    pub fn rk4_step(&self, state: &SolverState) -> Result<SolverState> {
        let dt = self.problem.dt;
        let t = state.t;
        let next = rk4(state.field.values(), dt, |u| self.rhs_values(u, t))?;
        let mut field = Field::new(self.problem.grid, next)?;
        field.pin_boundaries();
        Ok(SolverState {
            t: (state.step + 1) as f64 * dt,
            step: state.step + 1,
            field,
        })
    }

    /// Integrates to `t_final`, calling the controller (if any) after each
    /// step. Snapshots are taken at the completed step nearest to each
    /// requested time.
    pub fn run(
        &self,
        mut controller: Option<&mut CforController>,
        snapshot_times: &[f64],
    ) -> Result<RunTrace> {
        let n_steps = self.problem.n_steps();
        let dt = self.problem.dt;
        let mut wanted: Vec<usize> = Vec::with_capacity(snapshot_times.len());
        for &t in snapshot_times {
            if !(t >= 0.0 && t <= self.problem.t_final + 0.5 * dt) {
                return Err(Error::InvalidProblem(format!(
                    "snapshot time {t} outside [0, {}]",
                    self.problem.t_final
                )));
            }
            wanted.push(((t / dt).round() as usize).min(n_steps));
        }

        let mut state = self.initial_state();
        let mut trace = RunTrace {
            initial: state.field.clone(),
            snapshots: Vec::new(),
            measures: Vec::new(),
            events: Vec::new(),
            final_state: state.clone(),
            peak_abs: state.field.max_abs(),
        };
        if let Some(c) = controller.as_deref_mut() {
            c.reset();
        }
        let record = |trace: &mut RunTrace, state: &SolverState| {
            for _ in wanted.iter().filter(|&&s| s == state.step) {
                trace.snapshots.push(Snapshot {
                    t: state.t,
                    step: state.step,
                    field: state.field.clone(),
                });
            }
        };
        record(&mut trace, &state);

        for _ in 0..n_steps {
            let stepped = match self.rk4_step(&state) {
                Ok(s) => s,
                Err(Error::BlowUp { t, node, .. }) => {
                    return Err(self.abort(trace, controller.as_deref(), state, t, node));
                }
                Err(e) => return Err(e),
            };
            state = match controller.as_deref_mut() {
                Some(c) => {
                    let (s, _) = c.check_and_filter(stepped)?;
                    if let Some(m) = c.last_measure() {
                        trace.measures.push(MeasureSample { t: s.t, total: m });
                    }
                    s
                }
                None => stepped,
            };
            let values = state.field.values();
            trace.peak_abs = values.iter().fold(trace.peak_abs, |m, v| m.max(v.abs()));
            if let Some(node) = values
                .iter()
                .position(|v| !v.is_finite() || v.abs() > BLOWUP_LIMIT)
            {
                let t = state.t;
                record(&mut trace, &state);
                return Err(self.abort(trace, controller.as_deref(), state, t, node));
            }
            record(&mut trace, &state);
        }

        if let Some(c) = controller.as_deref() {
            trace.events = c.events().to_vec();
        }
        trace.final_state = state;
        Ok(trace)
    }

    fn abort(
        &self,
        mut trace: RunTrace,
        controller: Option<&CforController>,
        state: SolverState,
        t: f64,
        node: usize,
    ) -> Error {
        if let Some(c) = controller {
            trace.events = c.events().to_vec();
        }
        trace.final_state = state;
        Error::BlowUp {
            t,
            node,
            trace: Box::new(trace),
        }
    }
}

/// Convolution over the even extension (for fields even about both ends).
fn convolve_even(u: &[f64], taps: &FilterTaps) -> Vec<f64> {
    let n = u.len() as isize;
    let period = 2 * (n - 1);
    let at = |i: isize| {
        let j = i.rem_euclid(period);
        u[(if j < n { j } else { period - j }) as usize]
    };
    let w = taps.half_width() as isize;
    let weights = taps.weights();
    (0..n)
        .map(|i| {
            let mut acc = weights[w as usize] * u[i as usize];
            for m in 1..=w {
                acc +=
                    weights[(w + m) as usize] * at(i - m) + weights[(w - m) as usize] * at(i + m);
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(re: Reynolds, n: usize, dt: f64, t_final: f64) -> ProblemSpec {
        ProblemSpec::new(re, Grid::unit(n).unwrap(), dt, t_final, 35, 4.5).unwrap()
    }

    #[test]
    fn initial_condition_values() {
        let f = initial_condition(&Grid::unit(3).unwrap());
        assert_eq!(f.values(), &[0.0, 1.0, 0.0]);
        let f = initial_condition(&Grid::unit(41).unwrap());
        assert!((f.values()[10] - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(f.values()[40], 0.0);
        for n in [4, 17, 64, 101] {
            let f = initial_condition(&Grid::unit(n).unwrap());
            let (imax, vmax) = f
                .values()
                .iter()
                .enumerate()
                .fold(
                    (0, f64::MIN),
                    |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
                );
            assert!(vmax <= 1.0);
            let x = f.grid().node(imax);
            assert!(
                (x - 0.5).abs() <= 0.5 * f.grid().spacing() + 1e-12,
                "n = {n}"
            );
        }
    }

    #[test]
    fn problem_validation() {
        let g = Grid::unit(41).unwrap();
        assert!(ProblemSpec::new(Reynolds::Finite(-1.0), g, 0.01, 1.0, 35, 4.5).is_err());
        assert!(ProblemSpec::new(Reynolds::Finite(100.0), g, 0.0, 1.0, 35, 4.5).is_err());
        assert!(ProblemSpec::new(Reynolds::Finite(100.0), g, 0.01, 1.0, 41, 4.5).is_err());
        assert!(ProblemSpec::new(Reynolds::Inviscid, g, 0.01, 0.0, 35, 4.5).is_ok());
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let s = BurgersSolver::new(
            problem(Reynolds::Finite(100.0), 41, 0.01, 1.0)
                .with_initial(InitialCondition::Custom(vec![0.0; 41]))
                .unwrap(),
        )
        .unwrap();
        let st = s.initial_state();
        assert!(s.rhs(&st).unwrap().values().iter().all(|&v| v == 0.0));
        let next = s.rk4_step(&st).unwrap();
        assert!(next.field.values().iter().all(|&v| v == 0.0));
        assert!((next.t - 0.01).abs() < 1e-15);
    }

    #[test]
    fn rhs_of_sine() {
        let g = Grid::unit(41).unwrap();
        for (re, nu) in [(Reynolds::Inviscid, 0.0), (Reynolds::Finite(100.0), 0.01)] {
            let s = BurgersSolver::new(problem(re, 41, 0.01, 1.0)).unwrap();
            let r = s.rhs(&s.initial_state()).unwrap();
            for (x, v) in g.nodes().zip(r.values()) {
                let exact = -0.5 * PI * (2.0 * PI * x).sin() - nu * PI * PI * (PI * x).sin();
                assert!((v - exact).abs() < 1e-7, "x = {x}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn conservative_form_agrees_on_smooth_data() {
        let p = problem(Reynolds::Finite(100.0), 41, 0.01, 1.0);
        let a = BurgersSolver::new(p.clone()).unwrap();
        let b = BurgersSolver::new(p.with_advection(AdvectionForm::Conservative)).unwrap();
        let ra = a.rhs(&a.initial_state()).unwrap();
        let rb = b.rhs(&b.initial_state()).unwrap();
        for (x, y) in ra.values().iter().zip(rb.values()) {
            assert!((x - y).abs() < 1e-7);
        }
    }

    #[test]
    fn rk4_order_on_linear_decay() {
        let lambda = -PI * PI / 100.0;
        for dt in [0.5, 0.1, 0.01] {
            let z: f64 = lambda * dt;
            let y = rk4::<()>(&[1.0], dt, |u| Ok(vec![lambda * u[0]])).unwrap()[0];
            let err = (y - z.exp()).abs();
            // local error of RK4 is z⁵/120 + O(z⁶)
            assert!(
                err <= z.abs().powi(5) / 120.0 * 1.5 + 1e-16,
                "dt {dt}: {err}"
            );
        }
    }

    #[test]
    fn boundaries_stay_pinned() {
        let s = BurgersSolver::new(problem(Reynolds::Finite(100.0), 41, 0.01, 0.5)).unwrap();
        let mut st = s.initial_state();
        for _ in 0..50 {
            st = s.rk4_step(&st).unwrap();
            assert_eq!(st.field.values()[0], 0.0);
            assert_eq!(st.field.values()[40], 0.0);
        }
    }

    #[test]
    fn empty_run_has_only_initial_condition() {
        let s = BurgersSolver::new(problem(Reynolds::Finite(100.0), 41, 0.01, 0.0)).unwrap();
        let tr = s.run(None, &[0.0]).unwrap();
        assert_eq!(tr.snapshots.len(), 1);
        assert_eq!(tr.snapshots[0].field, tr.initial);
        assert_eq!(tr.final_state.step, 0);
        assert_eq!(tr.peak_abs, 1.0);
        assert!(tr.measures.is_empty() && tr.events.is_empty());
    }

    #[test]
    fn snapshot_outside_run_is_rejected() {
        let s = BurgersSolver::new(problem(Reynolds::Finite(100.0), 41, 0.01, 0.1)).unwrap();
        assert!(s.run(None, &[0.5]).is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        let s = BurgersSolver::new(problem(Reynolds::Finite(1e5), 64, 0.001, 0.2)).unwrap();
        let a = s.run(None, &[0.1, 0.2]).unwrap();
        let b = s.run(None, &[0.1, 0.2]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn blowup_returns_partial_trace() {
        // an absurd time step makes the explicit scheme explode
        let s = BurgersSolver::new(problem(Reynolds::Finite(100.0), 41, 1.0, 100.0)).unwrap();
        match s.run(None, &[0.0]) {
            Err(Error::BlowUp { trace, .. }) => {
                assert_eq!(trace.snapshots.len(), 1);
                assert!(trace.final_state.step > 0);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }
}
