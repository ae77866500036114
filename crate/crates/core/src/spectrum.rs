//! Fourier image of a solution profile.

use std::io::Write;
use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::grid::Field;

/// |DFT| of the odd-extended field; `omega` in units of π/Δ, 0..=1.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierImage {
    pub omega: Vec<f64>,
    pub magnitude: Vec<f64>,
}

impl FourierImage {
    /// Largest normalized magnitude with ω ≥ `from` (in units of π/Δ).
    pub fn peak_above(&self, from: f64) -> f64 {
        self.omega
            .iter()
            .zip(&self.magnitude)
            .filter(|(w, _)| **w >= from - 1e-12)
            .fold(0.0, |m, (_, a)| m.max(*a))
    }

    /// Bin holding the global maximum.
    pub fn argmax(&self) -> usize {
        self.magnitude
            .iter()
            .enumerate()
            .fold(
                (0, f64::MIN),
                |acc, (i, &m)| if m > acc.1 { (i, m) } else { acc },
            )
            .0
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega", "magnitude"])?;
        for (o, m) in self.omega.iter().zip(&self.magnitude) {
            w.write_record([o.to_string(), m.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Extends u on [0,1] oddly about x = 1 to one period on [0,2], transforms
/// it and keeps bins 0..=N−1, normalized to unit maximum (an all-zero field
/// stays zero).
pub fn emit_fourier_image(field: &Field) -> Result<FourierImage> {
    field.check_finite()?;
    let u = field.values();
    let n = u.len();
    let period = 2 * (n - 1);
    let mut buf: Vec<Complex<f64>> = (0..period)
        .map(|k| {
            let v = if k < n { u[k] } else { -u[period - k] };
            Complex::new(v, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(period).process(&mut buf);
    let mut magnitude: Vec<f64> = buf[..n].iter().map(|c| c.norm()).collect();
    let peak = magnitude.iter().cloned().fold(0.0, f64::max);
    if peak > 0.0 {
        magnitude.iter_mut().for_each(|m| *m /= peak);
    }
    let omega = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
    Ok(FourierImage { omega, magnitude })
}
