//! Regularized Shannon (sinc × Gaussian) kernels and their sampled filters.
//!
//! The low-pass kernel is
//!
//! ```text
//! φ(x) = sin(πx/Δ) / (πx/Δ) · exp(−x² / 2σ²)
//! ```
//!
//! and the high-pass conjugates are its first and second derivatives. All
//! three share one generating function, so they share regularity and
//! effective bandwidth. Derivatives are evaluated in closed form (product
//! rule on sinc × Gaussian); a Taylor branch takes over for |x| < 1e-8·Δ
//! where the direct formulas cancel catastrophically.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Relative width (in units of Δ) of the Taylor branch around x = 0.
/// The second-derivative formula cancels like ε_mach/(πx/Δ)², so the branch
/// has to be wide enough for that to stay below the truncated x⁸ term.
pub const SINGULAR_EPS: f64 = 1e-3;

/// σ/Δ used for the derivative filters by default.
pub const DEFAULT_SIGMA_RATIO_DERIV: f64 = 4.5;
/// σ/Δ used for the conjugated low-pass filter by default.
pub const DEFAULT_SIGMA_RATIO_LOWPASS: f64 = 3.2;
/// Default stencil half-width W.
pub const DEFAULT_HALF_WIDTH: usize = 35;

/// Parameters of one conjugated filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    delta: f64,
    sigma_ratio: f64,
    half_width: usize,
    order: u8,
}

impl KernelSpec {
    pub fn new(delta: f64, sigma_ratio: f64, half_width: usize, order: u8) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidKernel(format!(
                "grid spacing must be positive, got {delta}"
            )));
        }
        if !(sigma_ratio.is_finite() && sigma_ratio >= 1.0) {
            return Err(Error::InvalidKernel(format!(
                "sigma/delta must be at least 1, got {sigma_ratio}"
            )));
        }
        if half_width == 0 {
            return Err(Error::InvalidKernel("half-width must be at least 1".into()));
        }
        if order > 2 {
            return Err(Error::InvalidKernel(format!(
                "order must be 0, 1 or 2, got {order}"
            )));
        }
        Ok(Self {
            delta,
            sigma_ratio,
            half_width,
            order,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sigma_ratio(&self) -> f64 {
        self.sigma_ratio
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_ratio * self.delta
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    /// Same kernel, different derivative order.
    pub fn with_order(&self, order: u8) -> Result<Self> {
        Self::new(self.delta, self.sigma_ratio, self.half_width, order)
    }

    /// φ⁽ⁿ⁾ at physical offset `x` from the kernel centre.
    pub fn eval(&self, x: f64) -> f64 {
        eval_kernel(self, x)
    }
}

/// sin(πr), cos(πr) with exact zeros/signs at integer `r`.
fn sincos_pi(r: f64) -> (f64, f64) {
    let k = r.round();
    let mut f = r - k;
    // x = mΔ rarely divides back to exactly m
    if f.abs() <= 8.0 * f64::EPSILON * r.abs().max(1.0) {
        f = 0.0;
    }
    let sign = if k.rem_euclid(2.0) == 0.0 { 1.0 } else { -1.0 };
    if f == 0.0 {
        (0.0, sign)
    } else {
        let (s, c) = (PI * f).sin_cos();
        (sign * s, sign * c)
    }
}

/// Evaluates φ⁽ⁿ⁾_{Δ,σ}(x) for the order stored in `spec`.
pub fn eval_kernel(spec: &KernelSpec, x: f64) -> f64 {
    let a = PI / spec.delta;
    let sigma2 = spec.sigma() * spec.sigma();

    if x.abs() < SINGULAR_EPS * spec.delta {
        let c2 = a * a / 6.0 + 1.0 / (2.0 * sigma2);
        let c4 = a.powi(4) / 120.0 + a * a / (12.0 * sigma2) + 1.0 / (8.0 * sigma2 * sigma2);
        let c6 = a.powi(6) / 5040.0
            + a.powi(4) / (240.0 * sigma2)
            + a * a / (48.0 * sigma2 * sigma2)
            + 1.0 / (48.0 * sigma2 * sigma2 * sigma2);
        let x2 = x * x;
        return match spec.order {
            0 => 1.0 - c2 * x2 + c4 * x2 * x2 - c6 * x2 * x2 * x2,
            1 => x * (-2.0 * c2 + 4.0 * c4 * x2 - 6.0 * c6 * x2 * x2),
            _ => -2.0 * c2 + 12.0 * c4 * x2 - 30.0 * c6 * x2 * x2,
        };
    }

    let (s, c) = sincos_pi(x / spec.delta);
    let ax = a * x;
    let sinc = s / ax;
    let g = (-x * x / (2.0 * sigma2)).exp();

    match spec.order {
        0 => sinc * g,
        1 => {
            let dsinc = c / x - s / (ax * x);
            let dg = -x / sigma2 * g;
            dsinc * g + sinc * dg
        }
        _ => {
            let dsinc = c / x - s / (ax * x);
            let d2sinc = -a * s / x - 2.0 * c / (x * x) + 2.0 * s / (ax * x * x);
            let dg = -x / sigma2 * g;
            let d2g = (x * x / (sigma2 * sigma2) - 1.0 / sigma2) * g;
            d2sinc * g + 2.0 * dsinc * dg + sinc * d2g
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centering {
    /// Offsets mΔ, m = −W..W.
    OnGrid,
    /// Offsets (m + ½)Δ, m = −W..W.
    HalfGrid,
}

/// Kernel samples forming a discrete FIR filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterTaps {
    order: u8,
    centering: Centering,
    half_width: usize,
    delta: f64,
    weights: Vec<f64>,
}

impl FilterTaps {
    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn centering(&self) -> Centering {
        self.centering
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Offset of tap `i` in grid units.
    pub fn offset(&self, i: usize) -> f64 {
        let m = i as f64 - self.half_width as f64;
        match self.centering {
            Centering::OnGrid => m,
            Centering::HalfGrid => m + 0.5,
        }
    }

    /// Weight at integer offset m (on-grid taps only).
    pub fn weight(&self, m: isize) -> f64 {
        self.weights[(m + self.half_width as isize) as usize]
    }

    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.weights.len()).map(|i| self.offset(i))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["offset", "weight"])?;
        for (i, weight) in self.weights.iter().enumerate() {
            w.write_record([self.offset(i).to_string(), weight.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

pub fn build_taps(spec: &KernelSpec, centering: Centering) -> FilterTaps {
    let w = spec.half_width as isize;
    let weights = (-w..=w)
        .map(|m| {
            let r = match centering {
                Centering::OnGrid => m as f64,
                Centering::HalfGrid => m as f64 + 0.5,
            };
            eval_kernel(spec, r * spec.delta)
        })
        .collect();
    FilterTaps {
        order: spec.order,
        centering,
        half_width: spec.half_width,
        delta: spec.delta,
        weights,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub omega: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub normalized: bool,
}

impl FrequencyResponse {
    pub fn peak(&self) -> f64 {
        self.magnitude.iter().cloned().fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega", "magnitude"])?;
        for (om, mag) in self.omega.iter().zip(&self.magnitude) {
            w.write_record([om.to_string(), mag.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// |Σ_m w(m)·exp(−iω·offset(m)·Δ)| on `n_samples` points over [0, π/Δ].
pub fn frequency_response(
    taps: &FilterTaps,
    n_samples: usize,
    normalize: bool,
) -> FrequencyResponse {
    assert!(
        n_samples >= 2,
        "frequency_response needs at least two samples"
    );
    let nyquist = PI / taps.delta;
    let omega: Vec<f64> = (0..n_samples)
        .map(|j| nyquist * j as f64 / (n_samples - 1) as f64)
        .collect();
    let mut magnitude: Vec<f64> = omega
        .iter()
        .map(|&om| {
            let (re, im) =
                taps.offsets()
                    .zip(&taps.weights)
                    .fold((0.0, 0.0), |(re, im), (off, w)| {
                        let (s, c) = (om * off * taps.delta).sin_cos();
                        (re + w * c, im - w * s)
                    });
            re.hypot(im)
        })
        .collect();
    if normalize {
        let peak = magnitude.iter().cloned().fold(0.0, f64::max);
        if peak > 0.0 {
            magnitude.iter_mut().for_each(|m| *m /= peak);
        }
    }
    FrequencyResponse {
        omega,
        magnitude,
        normalized: normalize,
    }
}
