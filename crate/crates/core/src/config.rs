//! Scenario configuration and its `key = value` text form.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{DEFAULT_HALF_WIDTH, DEFAULT_SIGMA_RATIO_DERIV, DEFAULT_SIGMA_RATIO_LOWPASS};
use crate::solver::Reynolds;

/// Times of the error table.
pub const TABLE_TIMES: [f64; 8] = [0.4, 0.8, 1.2, 3.0, 10.0, 30.0, 60.0, 90.0];
/// Default snapshot times for evolution runs (clipped to t_final).
pub const PROFILE_TIMES: [f64; 5] = [0.2, 0.5, 1.0, 1.5, 2.0];
/// The smooth calibration reference is integrated at least this far.
pub const CALIBRATION_HORIZON: f64 = 3.0;
/// Reynolds number of the smooth calibration reference.
pub const CALIBRATION_REYNOLDS: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Plain DSC run, no controller.
    Dsc,
    /// DSC run with the oscillation controller attached.
    Cfor,
    /// Frequency responses of the conjugated filters.
    Filters,
    /// Error table against the exact solution.
    Table1,
    /// Fourier images of uncontrolled and controlled runs.
    Fourier,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Dsc => "dsc",
            Mode::Cfor => "cfor",
            Mode::Filters => "filters",
            Mode::Table1 => "table1",
            Mode::Fourier => "fourier",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dsc" => Ok(Mode::Dsc),
            "cfor" => Ok(Mode::Cfor),
            "filters" => Ok(Mode::Filters),
            "table1" => Ok(Mode::Table1),
            "fourier" => Ok(Mode::Fourier),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Eta {
    Auto,
    Value(f64),
}

impl fmt::Display for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eta::Auto => f.write_str("auto"),
            Eta::Value(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Eta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Eta::Auto);
        }
        Ok(Eta::Value(parse_f64("eta", s)?))
    }
}

pub fn parse_reynolds(s: &str) -> Result<Reynolds> {
    let s = s.trim();
    if matches!(
        s.to_ascii_lowercase().as_str(),
        "inf" | "infinity" | "inviscid"
    ) {
        return Ok(Reynolds::Inviscid);
    }
    let v = parse_f64("re", s)?;
    if v.is_infinite() {
        return Ok(Reynolds::Inviscid);
    }
    Ok(Reynolds::Finite(v))
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: '{s}' is not a number")))
}

fn parse_usize(key: &str, s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: '{s}' is not a non-negative integer")))
}

pub fn parse_times(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| parse_f64("snapshots", p))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub reynolds: Reynolds,
    pub n_points: usize,
    pub dt: f64,
    /// None picks the mode's default.
    pub t_final: Option<f64>,
    pub w: usize,
    pub sigma_ratio_deriv: f64,
    pub sigma_ratio_lowpass: f64,
    pub eta: Eta,
    pub scales: usize,
    /// None picks the mode's default.
    pub snapshot_times: Option<Vec<f64>>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Dsc,
            reynolds: Reynolds::Finite(100.0),
            n_points: 41,
            dt: 0.01,
            t_final: None,
            w: DEFAULT_HALF_WIDTH,
            sigma_ratio_deriv: DEFAULT_SIGMA_RATIO_DERIV,
            sigma_ratio_lowpass: DEFAULT_SIGMA_RATIO_LOWPASS,
            eta: Eta::Auto,
            scales: 3,
            snapshot_times: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn effective_t_final(&self) -> f64 {
        if let Some(t) = self.t_final {
            return t;
        }
        match self.mode {
            Mode::Table1 => TABLE_TIMES[TABLE_TIMES.len() - 1],
            Mode::Fourier => 0.5,
            Mode::Filters => 0.0,
            Mode::Dsc | Mode::Cfor => 2.0,
        }
    }

    pub fn effective_snapshots(&self) -> Vec<f64> {
        if let Some(ts) = &self.snapshot_times {
            return ts.clone();
        }
        let t_final = self.effective_t_final();
        let base: &[f64] = match self.mode {
            Mode::Table1 => &TABLE_TIMES,
            Mode::Filters => &[],
            Mode::Fourier => &[],
            Mode::Dsc | Mode::Cfor => &PROFILE_TIMES,
        };
        let mut ts: Vec<f64> = base
            .iter()
            .copied()
            .filter(|&t| t <= t_final + 1e-12)
            .collect();
        if self.mode != Mode::Filters && !ts.iter().any(|&t| (t - t_final).abs() < 1e-12) {
            ts.push(t_final);
        }
        ts
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        if let Reynolds::Finite(re) = self.reynolds {
            positive("re", re)?;
        }
        if self.n_points < 3 {
            return Err(Error::Config(format!(
                "n must be at least 3, got {}",
                self.n_points
            )));
        }
        positive("dt", self.dt)?;
        if let Some(t) = self.t_final {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Config(format!(
                    "t_final must be non-negative, got {t}"
                )));
            }
        }
        if self.w == 0 {
            return Err(Error::Config("w must be positive".into()));
        }
        if self.w >= self.n_points {
            return Err(Error::Config(format!(
                "w = {} needs more than {} grid points",
                self.w, self.n_points
            )));
        }
        positive("sigma_deriv", self.sigma_ratio_deriv)?;
        positive("sigma_lowpass", self.sigma_ratio_lowpass)?;
        if let Eta::Value(v) = self.eta {
            positive("eta", v)?;
        }
        if self.scales == 0 {
            return Err(Error::Config("scales must be positive".into()));
        }
        let t_final = self.effective_t_final();
        for &t in self.snapshot_times.iter().flatten() {
            if !(t.is_finite() && t >= 0.0 && t <= t_final + 1e-12) {
                return Err(Error::Config(format!(
                    "snapshot time {t} outside [0, {t_final}]"
                )));
            }
        }
        match self.mode {
            Mode::Table1 => {
                if self.reynolds == Reynolds::Inviscid {
                    return Err(Error::Config(
                        "table1 needs a finite Reynolds number".into(),
                    ));
                }
            }
            Mode::Cfor | Mode::Fourier => {
                let min = crate::wavelet::min_length(self.scales);
                if self.n_points < min {
                    return Err(Error::Config(format!(
                        "{} scales need at least {min} grid points, got {}",
                        self.scales, self.n_points
                    )));
                }
            }
            Mode::Dsc | Mode::Filters => {}
        }
        Ok(())
    }

    /// Applies one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "mode" => self.mode = value.parse()?,
            "re" | "reynolds" => self.reynolds = parse_reynolds(value)?,
            "n" | "n_points" => self.n_points = parse_usize(key, value)?,
            "dt" => self.dt = parse_f64(key, value)?,
            "t_final" => self.t_final = Some(parse_f64(key, value)?),
            "w" => self.w = parse_usize(key, value)?,
            "sigma_deriv" => self.sigma_ratio_deriv = parse_f64(key, value)?,
            "sigma_lowpass" => self.sigma_ratio_lowpass = parse_f64(key, value)?,
            "eta" => self.eta = value.parse()?,
            "scales" => self.scales = parse_usize(key, value)?,
            "snapshots" => self.snapshot_times = Some(parse_times(value)?),
            "out" | "output_dir" => self.output_dir = PathBuf::from(value),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        line("mode", self.mode.to_string());
        line("re", self.reynolds.to_string());
        line("n", self.n_points.to_string());
        line("dt", self.dt.to_string());
        if let Some(t) = self.t_final {
            line("t_final", t.to_string());
        }
        line("w", self.w.to_string());
        line("sigma_deriv", self.sigma_ratio_deriv.to_string());
        line("sigma_lowpass", self.sigma_ratio_lowpass.to_string());
        line("eta", self.eta.to_string());
        line("scales", self.scales.to_string());
        if let Some(ts) = &self.snapshot_times {
            line(
                "snapshots",
                ts.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            );
        }
        line("out", self.output_dir.display().to_string());
        s
    }
}
