//! Conjugated filter oscillation reduction.
//!
//! After each time step the wavelet high-pass measure ‖𝒲ⁿ⁺¹‖ of the
//! solution is compared with the previous one; when
//! ‖𝒲ⁿ⁺¹‖ − ‖𝒲ⁿ‖ ≥ η the conjugated low-pass filter is applied to the
//! whole field.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::LowpassFilter;
use crate::kernels::KernelSpec;
use crate::solver::{BurgersSolver, ProblemSpec, SolverState};
use crate::wavelet::{highpass_measure, WaveletFilterBank};

/// η = safety factor × largest per-step measure increment of the reference.
pub const DEFAULT_SAFETY_FACTOR: f64 = 5.0;
pub const DEFAULT_SCALES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriggerEvent {
    pub t: f64,
    pub measure_before: f64,
    pub measure_after: f64,
}

#[derive(Debug, Clone)]
pub struct CforController {
    eta: f64,
    lowpass: LowpassFilter,
    bank: WaveletFilterBank,
    scales: usize,
    max_applications: usize,
    last_measure: Option<f64>,
    events: Vec<TriggerEvent>,
}

impl CforController {
    pub fn new(eta: f64, lowpass_spec: KernelSpec, scales: usize) -> Result<Self> {
        if eta.is_nan() || eta <= 0.0 {
            return Err(Error::InvalidProblem(format!(
                "alarm threshold must be positive, got {eta}"
            )));
        }
        if scales == 0 {
            return Err(Error::InvalidProblem(
                "need at least one wavelet scale".into(),
            ));
        }
        Ok(Self {
            eta,
            lowpass: LowpassFilter::new(lowpass_spec)?,
            bank: WaveletFilterBank::cdf97(),
            scales,
            max_applications: 1,
            last_measure: None,
            events: Vec::new(),
        })
    }

    /// Number of low-pass passes per trigger (default 1).
    pub fn with_max_applications(mut self, n: usize) -> Self {
        self.max_applications = n.max(1);
        self
    }

    /// Same controller with a different threshold and a fresh state.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        let mut c = Self::new(eta, *self.lowpass.spec(), self.scales)?
            .with_max_applications(self.max_applications);
        c.bank = self.bank.clone();
        Ok(c)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn scales(&self) -> usize {
        self.scales
    }

    pub fn bank(&self) -> &WaveletFilterBank {
        &self.bank
    }

    pub fn lowpass(&self) -> &LowpassFilter {
        &self.lowpass
    }

    pub fn last_measure(&self) -> Option<f64> {
        self.last_measure
    }

    pub fn events(&self) -> &[TriggerEvent] {
        &self.events
    }

    pub fn reset(&mut self) {
        self.last_measure = None;
        self.events.clear();
    }

    pub fn measure(&self, state: &SolverState) -> Result<f64> {
        Ok(highpass_measure(state.field.values(), &self.bank, self.scales)?.total)
    }

    /// Updates the stored measure and filters when the increment reaches η.
    pub fn check_and_filter(&mut self, mut state: SolverState) -> Result<(SolverState, bool)> {
        state.field.check_finite()?;
        let current = self.measure(&state)?;
        let triggered = matches!(self.last_measure, Some(prev) if current - prev >= self.eta);
        if triggered {
            for _ in 0..self.max_applications {
                state.field = self.lowpass.apply(&state.field)?;
            }
            let after = self.measure(&state)?;
            self.events.push(TriggerEvent {
                t: state.t,
                measure_before: current,
                measure_after: after,
            });
            self.last_measure = Some(after);
        } else {
            self.last_measure = Some(current);
        }
        Ok((state, triggered))
    }
}

/// Largest increment of the high-pass measure between consecutive steps of
/// an uncontrolled run of `reference`, as seen by `template`.
pub fn max_measure_increment(template: &CforController, reference: &ProblemSpec) -> Result<f64> {
    let solver = BurgersSolver::new(reference.clone())?;
    let mut state = solver.initial_state();
    let mut last: Option<f64> = None;
    let mut delta_max = f64::NEG_INFINITY;
    for _ in 0..reference.n_steps() {
        state = solver.rk4_step(&state)?;
        let m = template.measure(&state)?;
        if let Some(prev) = last {
            delta_max = delta_max.max(m - prev);
        }
        last = Some(m);
    }
    Ok(delta_max)
}

/// Picks η from a smooth reference run on the same grid and time step.
pub fn calibrate_eta(
    problem: &ProblemSpec,
    template: &CforController,
    smooth_reference: &ProblemSpec,
) -> Result<f64> {
    calibrate_eta_with(problem, template, smooth_reference, DEFAULT_SAFETY_FACTOR)
}

pub fn calibrate_eta_with(
    problem: &ProblemSpec,
    template: &CforController,
    smooth_reference: &ProblemSpec,
    safety_factor: f64,
) -> Result<f64> {
    if problem.grid != smooth_reference.grid || problem.dt != smooth_reference.dt {
        return Err(Error::InvalidProblem(
            "calibration reference must share the problem's grid and time step".into(),
        ));
    }
    if safety_factor.is_nan() || safety_factor <= 1.0 {
        return Err(Error::InvalidProblem(format!(
            "safety factor must exceed 1, got {safety_factor}"
        )));
    }
    let delta_max = max_measure_increment(template, smooth_reference)?;
    if delta_max.is_nan() || delta_max <= 0.0 {
        return Err(Error::DegenerateCalibration);
    }
    Ok(safety_factor * delta_max)
}
