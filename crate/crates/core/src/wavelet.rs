//! CDF 9/7 biorthogonal wavelet analysis and the multiscale high-pass
//! measure used as an oscillation alarm.
//!
//! One analysis level filters the whole-point symmetric extension of the
//! signal with centred filters and keeps even low-pass / odd high-pass
//! samples, so a length-n signal splits into ⌈n/2⌉ approximation and ⌊n/2⌋
//! detail coefficients. The cascade re-applies the level to the
//! approximation, treating it as a fresh signal with its own symmetric
//! extension; the total coefficient count always equals the input length.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Analysis low-pass (9 taps, centred, unit DC gain).
#[allow(clippy::excessive_precision)]
const CDF97_ANALYSIS_LOWPASS: [f64; 9] = [
    0.026_748_757_410_810_088,
    -0.016_864_118_442_874_954,
    -0.078_223_266_528_990_263,
    0.266_864_118_442_874_954,
    0.602_949_018_236_360_348,
    0.266_864_118_442_874_954,
    -0.078_223_266_528_990_263,
    -0.016_864_118_442_874_954,
    0.026_748_757_410_810_088,
];

/// Synthesis low-pass (7 taps, centred, DC gain 2).
#[allow(clippy::excessive_precision)]
const CDF97_SYNTHESIS_LOWPASS: [f64; 7] = [
    -0.091_271_763_114_250_091,
    -0.057_543_526_228_500_182,
    0.591_271_763_114_250_091,
    1.115_087_052_457_000_365,
    0.591_271_763_114_250_091,
    -0.057_543_526_228_500_182,
    -0.091_271_763_114_250_091,
];

/// Filter radius that sets the minimum usable signal length per scale.
const MIN_LEN_PER_SCALE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilterBank {
    pub analysis_lowpass: Vec<f64>,
    pub analysis_highpass: Vec<f64>,
    pub synthesis_lowpass: Vec<f64>,
    pub synthesis_highpass: Vec<f64>,
}

impl WaveletFilterBank {
    /// Cohen–Daubechies–Feauveau 9/7 (a.k.a. Daubechies 7/9).
    ///
    /// The high-pass filters are the quadrature mirrors of the opposite
    /// low-pass filters: `h1[n] = (−1)ⁿ g0[n]`, `g1[n] = (−1)ⁿ h0[n]`.
    pub fn cdf97() -> Self {
        let alternate = |taps: &[f64]| -> Vec<f64> {
            let r = (taps.len() / 2) as isize;
            taps.iter()
                .enumerate()
                .map(|(i, &c)| if (i as isize - r) % 2 == 0 { c } else { -c })
                .collect()
        };
        Self {
            analysis_lowpass: CDF97_ANALYSIS_LOWPASS.to_vec(),
            analysis_highpass: alternate(&CDF97_SYNTHESIS_LOWPASS),
            synthesis_lowpass: CDF97_SYNTHESIS_LOWPASS.to_vec(),
            synthesis_highpass: alternate(&CDF97_ANALYSIS_LOWPASS),
        }
    }
}

impl Default for WaveletFilterBank {
    fn default() -> Self {
        Self::cdf97()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiscaleDecomposition {
    /// Detail coefficients, finest scale first.
    pub details: Vec<Vec<f64>>,
    /// Coarsest approximation.
    pub approximation: Vec<f64>,
}

impl MultiscaleDecomposition {
    pub fn scales(&self) -> usize {
        self.details.len()
    }

    pub fn coefficient_count(&self) -> usize {
        self.approximation.len() + self.details.iter().map(Vec::len).sum::<usize>()
    }

    /// One CSV per scale (`scale_<m>.csv`, m = 1 finest) plus `approximation.csv`.
    pub fn save_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (m, d) in self.details.iter().enumerate() {
            write_coefficients(
                std::fs::File::create(dir.join(format!("scale_{}.csv", m + 1)))?,
                d,
            )?;
        }
        write_coefficients(
            std::fs::File::create(dir.join("approximation.csv"))?,
            &self.approximation,
        )
    }
}

fn write_coefficients<W: Write>(out: W, coeffs: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "coefficient"])?;
    for (i, c) in coeffs.iter().enumerate() {
        w.write_record([i.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-scale absolute sums of the detail coefficients and their total.
#[derive(Debug, Clone, PartialEq)]
pub struct HighPassMeasure {
    pub per_scale: Vec<f64>,
    pub total: f64,
}

/// Whole-point symmetric index folding onto 0..n.
fn fold_symmetric(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let j = i.rem_euclid(period);
    if j < n as isize {
        j as usize
    } else {
        (period - j) as usize
    }
}

fn filter_at(x: &[f64], taps: &[f64], at: isize) -> f64 {
    let r = (taps.len() / 2) as isize;
    taps.iter()
        .enumerate()
        .map(|(i, &c)| c * x[fold_symmetric(at - (i as isize - r), x.len())])
        .sum()
}

fn analyze_level(x: &[f64], bank: &WaveletFilterBank) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() as isize;
    let approx = (0..n)
        .step_by(2)
        .map(|i| filter_at(x, &bank.analysis_lowpass, i))
        .collect();
    let detail = (1..n)
        .step_by(2)
        .map(|i| filter_at(x, &bank.analysis_highpass, i))
        .collect();
    (approx, detail)
}

fn synthesize_level(approx: &[f64], detail: &[f64], bank: &WaveletFilterBank) -> Vec<f64> {
    let n = approx.len() + detail.len();
    let mut up_lo = vec![0.0; n];
    let mut up_hi = vec![0.0; n];
    for (k, a) in approx.iter().enumerate() {
        up_lo[2 * k] = *a;
    }
    for (k, d) in detail.iter().enumerate() {
        up_hi[2 * k + 1] = *d;
    }
    (0..n as isize)
        .map(|i| {
            filter_at(&up_lo, &bank.synthesis_lowpass, i)
                + filter_at(&up_hi, &bank.synthesis_highpass, i)
        })
        .collect()
}

pub fn min_length(scales: usize) -> usize {
    MIN_LEN_PER_SCALE << scales
}

pub fn dwt_forward(
    signal: &[f64],
    bank: &WaveletFilterBank,
    scales: usize,
) -> Result<MultiscaleDecomposition> {
    let min = min_length(scales);
    if scales == 0 || signal.len() < min {
        return Err(Error::SignalTooShort {
            len: signal.len(),
            scales,
            min,
        });
    }
    let mut details = Vec::with_capacity(scales);
    let mut approx = signal.to_vec();
    for _ in 0..scales {
        let (a, d) = analyze_level(&approx, bank);
        details.push(d);
        approx = a;
    }
    Ok(MultiscaleDecomposition {
        details,
        approximation: approx,
    })
}

pub fn dwt_inverse(decomp: &MultiscaleDecomposition, bank: &WaveletFilterBank) -> Result<Vec<f64>> {
    let mut approx = decomp.approximation.clone();
    for (m, detail) in decomp.details.iter().enumerate().rev() {
        // a level of length n splits into ⌈n/2⌉ + ⌊n/2⌋
        if approx.len() != detail.len() && approx.len() != detail.len() + 1 {
            return Err(Error::ShapeMismatch(format!(
                "scale {}: {} approximation vs {} detail coefficients",
                m + 1,
                approx.len(),
                detail.len()
            )));
        }
        approx = synthesize_level(&approx, detail, bank);
    }
    Ok(approx)
}

pub fn highpass_measure(
    signal: &[f64],
    bank: &WaveletFilterBank,
    scales: usize,
) -> Result<HighPassMeasure> {
    let decomp = dwt_forward(signal, bank, scales)?;
    let per_scale: Vec<f64> = decomp
        .details
        .iter()
        .map(|d| d.iter().map(|c| c.abs()).sum())
        .collect();
    let total = per_scale.iter().sum();
    Ok(HighPassMeasure { per_scale, total })
}
