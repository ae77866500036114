//! Uniform grids, fields, odd boundary extension and the discrete
//! DSC operators built on it.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernels::{build_taps, Centering, FilterTaps, KernelSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_points: usize,
    x_min: f64,
    x_max: f64,
}

impl Grid {
    pub fn new(n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n_points < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points, got {n_points}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidGrid(format!(
                "bad interval [{x_min}, {x_max}]"
            )));
        }
        Ok(Self {
            n_points,
            x_min,
            x_max,
        })
    }

    /// `n_points` nodes on [0, 1].
    pub fn unit(n_points: usize) -> Result<Self> {
        Self::new(n_points, 0.0, 1.0)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.n_points - 1 {
            self.x_max
        } else {
            self.x_min + k as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |k| self.node(k))
    }
}

/// Nodal values u(x_k) on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidGrid(format!(
                "field has {} values for a {}-point grid",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_points()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.nodes().map(f).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First non-finite node, if any.
    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(node) => Err(Error::NonFinite { node }),
            None => Ok(()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Pins both boundary nodes to zero.
    pub fn pin_boundaries(&mut self) {
        let n = self.values.len();
        self.values[0] = 0.0;
        self.values[n - 1] = 0.0;
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "u"])?;
        for (x, u) in self.grid.nodes().zip(&self.values) {
            w.write_record([x.to_string(), u.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Extends `field` by `pad` nodes past each boundary with odd reflection
/// about the boundary nodes: u(x_min − s) = −u(x_min + s) and
/// u(x_max + s) = −u(x_max − s).
pub fn extend_odd(field: &Field, pad: usize) -> Result<Vec<f64>> {
    extend_odd_slice(field.values(), pad)
}

pub(crate) fn extend_odd_slice(u: &[f64], pad: usize) -> Result<Vec<f64>> {
    let n = u.len();
    if pad >= n {
        return Err(Error::PadTooLarge { pad, n_points: n });
    }
    let mut out = Vec::with_capacity(n + 2 * pad);
    out.extend((1..=pad).rev().map(|j| -u[j]));
    out.extend_from_slice(u);
    out.extend((1..=pad).map(|j| -u[n - 1 - j]));
    Ok(out)
}

/// Discrete convolution with on-grid taps over the odd extension:
/// `result(i) = Σ_m w(m)·u(x_i − mΔ)`, i.e. `Σ_k φ⁽ⁿ⁾(x_i − x_k)·u_k`.
pub fn apply_taps(field: &Field, taps: &FilterTaps) -> Result<Field> {
    if taps.centering() != Centering::OnGrid {
        return Err(Error::InvalidKernel("apply_taps needs on-grid taps".into()));
    }
    check_spacing(field.grid(), taps.delta())?;
    field.check_finite()?;
    let values = convolve_odd(field.values(), taps)?;
    Field::new(*field.grid(), values)
}

pub(crate) fn convolve_odd(u: &[f64], taps: &FilterTaps) -> Result<Vec<f64>> {
    let w = taps.half_width();
    let ext = extend_odd_slice(u, w)?;
    let weights = taps.weights();
    // pair the ±m taps so antisymmetric filters cancel constants exactly
    Ok((0..u.len())
        .map(|i| {
            let c = i + w;
            let mut acc = weights[w] * ext[c];
            for m in 1..=w {
                acc += weights[w + m] * ext[c - m] + weights[w - m] * ext[c + m];
            }
            acc
        })
        .collect())
}

fn check_spacing(grid: &Grid, delta: f64) -> Result<()> {
    let h = grid.spacing();
    if (h - delta).abs() > 1e-12 * h {
        return Err(Error::InvalidKernel(format!(
            "kernel spacing {delta} does not match grid spacing {h}"
        )));
    }
    Ok(())
}

/// The conjugated low-pass filter realized as a half-grid round trip:
/// nodes → midpoints → nodes, each pass a DSC interpolation with the
/// order-0 kernel sampled at (m + ½)Δ.
#[derive(Debug, Clone)]
pub struct LowpassFilter {
    spec: KernelSpec,
    taps: FilterTaps,
}

impl LowpassFilter {
    pub fn new(spec: KernelSpec) -> Result<Self> {
        if spec.order() != 0 {
            return Err(Error::InvalidKernel(format!(
                "low-pass filter needs an order-0 kernel, got order {}",
                spec.order()
            )));
        }
        Ok(Self {
            spec,
            taps: build_taps(&spec, Centering::HalfGrid),
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn taps(&self) -> &FilterTaps {
        &self.taps
    }

    pub fn apply(&self, field: &Field) -> Result<Field> {
        check_spacing(field.grid(), self.spec.delta())?;
        field.check_finite()?;
        let u = field.values();
        let n = u.len();
        let w = self.spec.half_width() as isize;
        let weights = self.taps.weights();

        // midpoint i sits at x_i + Δ/2; offset to node k is (i − k + ½)Δ
        let ext = extend_odd_slice(u, (w + 1) as usize)?;
        let pad = w + 1;
        let mids: Vec<f64> = (0..n as isize - 1)
            .map(|i| {
                (-w..=w)
                    .zip(weights)
                    .map(|(m, wt)| wt * ext[(i - m + pad) as usize])
                    .sum()
            })
            .collect();

        // node i from midpoints k: offset (i − k − ½)Δ = (m + ½)Δ with k = i − m − 1
        let out: Vec<f64> = (0..n as isize)
            .map(|i| {
                (-w..=w)
                    .zip(weights)
                    .map(|(m, wt)| wt * midpoint_odd(&mids, i - m - 1))
                    .sum()
            })
            .collect();

        let mut filtered = Field::new(*field.grid(), out)?;
        filtered.pin_boundaries();
        Ok(filtered)
    }
}

/// Midpoint value under odd reflection about both boundary nodes.
/// Midpoints k and −k−1 mirror about x_min; k and 2M−1−k about x_max.
fn midpoint_odd(mids: &[f64], k: isize) -> f64 {
    let m = mids.len() as isize;
    let j = k.rem_euclid(2 * m);
    if j < m {
        mids[j as usize]
    } else {
        -mids[(2 * m - 1 - j) as usize]
    }
}

pub fn conjugate_lowpass(field: &Field, spec: &KernelSpec) -> Result<Field> {
    LowpassFilter::new(*spec)?.apply(field)
}
