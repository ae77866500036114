//! Cole's exact solution of the sine-initialized viscous Burgers problem.
//!
//! The Cole–Hopf substitution u = −2ν φₓ/φ turns the problem into the heat
//! equation with φ(x,0) = exp(−z(1 − cos πx)), z = 1/(2πν). Expanding φ in
//! a cosine series gives
//!
//! ```text
//! u = 2πν Σ n aₙ e^{−n²π²νt} sin nπx / Σ aₙ e^{−n²π²νt} cos nπx
//! ```
//!
//! Near x = 1 the denominator is a tiny difference of large alternating
//! terms, so there the heat-kernel form
//! u = (1/t) ∫(x−ξ) G φ₀ dξ / ∫ G φ₀ dξ is integrated directly instead.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// Above this the coefficients are computable but untrusted.
pub const VALIDATED_MAX_REYNOLDS: f64 = 500.0;

const TERM_RATIO: f64 = 1e-16;
const COEFF_TOL: f64 = 1e-15;
const MAX_QUADRATURE_POINTS: usize = 1 << 20;
/// Series is used only while |den| / Σ|den terms| stays above this.
const SERIES_CONDITION_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactSolutionSpec {
    pub reynolds: f64,
    /// Hard cap on the number of cosine coefficients.
    pub series_terms: usize,
    /// Starting point count for the coefficient quadrature, doubled as needed.
    pub quadrature_points: usize,
}

impl ExactSolutionSpec {
    pub fn new(reynolds: f64) -> Result<Self> {
        let spec = Self {
            reynolds,
            series_terms: 4096,
            quadrature_points: 256,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reynolds.is_finite() && self.reynolds > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "exact solution needs a finite positive Reynolds number, got {}",
                self.reynolds
            )));
        }
        if self.series_terms < 2 || self.quadrature_points < 2 {
            return Err(Error::InvalidProblem(
                "series_terms and quadrature_points must be at least 2".into(),
            ));
        }
        Ok(())
    }

    pub fn in_validated_range(&self) -> bool {
        self.reynolds <= VALIDATED_MAX_REYNOLDS
    }

    pub fn viscosity(&self) -> f64 {
        1.0 / self.reynolds
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Coefficients aₙ for one Reynolds number, computed once.
#[derive(Debug, Clone)]
pub struct ColeSolution {
    spec: ExactSolutionSpec,
    coeffs: Vec<f64>,
    converged_tail: bool,
}

impl ColeSolution {
    pub fn new(spec: ExactSolutionSpec) -> Result<Self> {
        spec.validate()?;
        let z = spec.reynolds / (2.0 * PI);
        let mut nq = spec.quadrature_points;
        let mut prev = cosine_coefficients(z, nq, spec.series_terms);
        loop {
            nq *= 2;
            if nq > MAX_QUADRATURE_POINTS {
                return Err(Error::SeriesNonConvergence {
                    reynolds: spec.reynolds,
                    t: 0.0,
                });
            }
            let next = cosine_coefficients(z, nq, spec.series_terms);
            let scale = next.iter().fold(0.0f64, |m, a| m.max(a.abs()));
            let diff = next
                .iter()
                .zip(&prev)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            prev = next;
            if diff <= COEFF_TOL * scale {
                break;
            }
        }
        let a0 = prev[0].abs();
        // keep coefficients until three in a row fall below the ratio
        let mut keep = prev.len();
        let mut converged_tail = false;
        let mut run = 0;
        for (n, a) in prev.iter().enumerate().skip(1) {
            if a.abs() < TERM_RATIO * a0 {
                run += 1;
                if run == 3 {
                    keep = n + 1;
                    converged_tail = true;
                    break;
                }
            } else {
                run = 0;
            }
        }
        prev.truncate(keep);
        Ok(Self {
            spec,
            coeffs: prev,
            converged_tail,
        })
    }

    pub fn for_reynolds(reynolds: f64) -> Result<Self> {
        Self::new(ExactSolutionSpec::new(reynolds)?)
    }

    pub fn spec(&self) -> &ExactSolutionSpec {
        &self.spec
    }

    /// a₀, a₁, … (a₀ carries no factor 2).
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// u(x, t). Exact zeros at the boundaries and sin(πx) at t = 0.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) || !x.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "cannot evaluate exact solution at (x={x}, t={t})"
            )));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidProblem(format!("x = {x} outside [0, 1]")));
        }
        if x == 0.0 || x == 1.0 {
            return Ok(0.0);
        }
        if t == 0.0 {
            return Ok((PI * x).sin());
        }
        match self.eval_series(x, t)? {
            Some(u) => Ok(u),
            None => self.eval_integral(x, t),
        }
    }

    /// Series value, or None where cancellation makes it untrustworthy.
    fn eval_series(&self, x: f64, t: f64) -> Result<Option<f64>> {
        let nu = self.spec.viscosity();
        let a0 = self.coeffs[0];
        let k = self.coeffs.len() - 1;
        let tail_decay = (-(k as f64).powi(2) * PI * PI * nu * t).exp();
        if !self.converged_tail
            && (self.coeffs[k].abs() * tail_decay * k as f64) > TERM_RATIO * a0.abs()
        {
            return Err(Error::SeriesNonConvergence {
                reynolds: self.spec.reynolds,
                t,
            });
        }
        let mut num = CompensatedSum::default();
        let mut den = CompensatedSum::default();
        den.add(a0);
        let mut den_abs = a0.abs();
        for (n, a) in self.coeffs.iter().enumerate().skip(1) {
            let nf = n as f64;
            let e = a * (-nf * nf * PI * PI * nu * t).exp();
            if e == 0.0 {
                break;
            }
            let (s, c) = (nf * PI * x).sin_cos();
            num.add(nf * e * s);
            den.add(e * c);
            den_abs += (e * c).abs();
        }
        let d = den.value();
        if d.abs() < SERIES_CONDITION_MIN * den_abs {
            return Ok(None);
        }
        Ok(Some(2.0 * PI * nu * num.value() / d))
    }

    /// Direct heat-kernel quadrature on the real line.
    fn eval_integral(&self, x: f64, t: f64) -> Result<f64> {
        let nu = self.spec.viscosity();
        let z = self.spec.reynolds / (2.0 * PI);
        let s2 = 4.0 * nu * t;
        let half = (s2 * (40.0 + 2.0 * z)).sqrt();
        let exponent = |xi: f64| -(x - xi).powi(2) / s2 - z * (1.0 - (PI * xi).cos());
        let mut intervals = 64usize;
        let mut prev: Option<f64> = None;
        while intervals <= MAX_QUADRATURE_POINTS {
            let h = 2.0 * half / intervals as f64;
            let nodes = (0..=intervals).map(|j| x - half + j as f64 * h);
            let e: Vec<f64> = nodes.clone().map(exponent).collect();
            let emax = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut num = CompensatedSum::default();
            let mut den = CompensatedSum::default();
            for (j, (xi, ej)) in nodes.zip(&e).enumerate() {
                let end = if j == 0 || j == intervals { 0.5 } else { 1.0 };
                let w = end * (ej - emax).exp();
                num.add((x - xi) * w);
                den.add(w);
            }
            let u = num.value() / den.value() / t;
            if let Some(p) = prev {
                if (u - p).abs() <= 1e-14 * u.abs().max(1e-3) {
                    return Ok(u);
                }
            }
            prev = Some(u);
            intervals *= 2;
        }
        Err(Error::SeriesNonConvergence {
            reynolds: self.spec.reynolds,
            t,
        })
    }

    /// The exact solution sampled on every node of `grid`.
    pub fn sample(&self, grid: &Grid, t: f64) -> Result<Field> {
        let values = grid
            .nodes()
            .map(|x| self.eval(x.clamp(0.0, 1.0), t))
            .collect::<Result<Vec<_>>>()?;
        let mut f = Field::new(*grid, values)?;
        f.pin_boundaries();
        Ok(f)
    }
}

/// aₙ by the trapezoid rule on nq intervals (spectral here: the integrand
/// is a smooth function of cos πx).
fn cosine_coefficients(z: f64, nq: usize, cap: usize) -> Vec<f64> {
    let terms = cap.min(nq / 2);
    let h = 1.0 / nq as f64;
    let f: Vec<f64> = (0..=nq)
        .map(|j| {
            let x = j as f64 * h;
            let w = if j == 0 || j == nq { 0.5 } else { 1.0 };
            w * h * (-z * (1.0 - (PI * x).cos())).exp()
        })
        .collect();
    (0..terms)
        .map(|n| {
            let mut s = CompensatedSum::default();
            for (j, fj) in f.iter().enumerate() {
                // cos(nπ j/nq) via exact reduction of n·j mod 2nq
                let r = (n * j) % (2 * nq);
                s.add(fj * (PI * r as f64 / nq as f64).cos());
            }
            if n == 0 {
                s.value()
            } else {
                2.0 * s.value()
            }
        })
        .collect()
}

/// Convenience wrapper over [`ColeSolution::eval`].
pub fn cole_exact(x: f64, t: f64, spec: &ExactSolutionSpec) -> Result<f64> {
    ColeSolution::new(*spec)?.eval(x, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub t: f64,
    pub l_inf: f64,
    /// Mean absolute error.
    pub l_1: f64,
    /// Unnormalized sum of absolute errors.
    pub l_1_sum: f64,
}

pub fn error_norms(numeric: &Field, t: f64, exact: &ColeSolution) -> Result<ErrorReport> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidProblem(format!("negative time {t}")));
    }
    let reference = exact.sample(numeric.grid(), t)?;
    Ok(compare(numeric, &reference, t))
}

/// Norms of numeric − reference on a shared grid.
pub fn compare(numeric: &Field, reference: &Field, t: f64) -> ErrorReport {
    let diffs = numeric
        .values()
        .iter()
        .zip(reference.values())
        .map(|(a, b)| (a - b).abs());
    let (mut l_inf, mut sum) = (0.0f64, CompensatedSum::default());
    for d in diffs {
        l_inf = l_inf.max(d);
        sum.add(d);
    }
    let l_1_sum = sum.value();
    ErrorReport {
        t,
        l_inf,
        l_1: l_1_sum / numeric.len() as f64,
        l_1_sum,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re100() -> ColeSolution {
        ColeSolution::for_reynolds(100.0).unwrap()
    }

    /// e^{-z} Iₙ(z) from the power series, summed in log space.
    fn scaled_bessel_i(n: usize, z: f64) -> f64 {
        let ln_half = (z / 2.0).ln();
        let mut ln_fact = vec![0.0f64; 400];
        for k in 1..400 {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        (0..400 - n)
            .map(|k| ((2 * k + n) as f64 * ln_half - ln_fact[k] - ln_fact[k + n] - z).exp())
            .sum()
    }

    #[test]
    fn spec_validation() {
        assert!(ExactSolutionSpec::new(0.0).is_err());
        assert!(ExactSolutionSpec::new(f64::INFINITY).is_err());
        assert!(ExactSolutionSpec::new(100.0).unwrap().in_validated_range());
        assert!(!ExactSolutionSpec::new(1e4).unwrap().in_validated_range());
    }

    #[test]
    fn coefficients_match_bessel_closed_form() {
        let sol = re100();
        let z = 100.0 / (2.0 * PI);
        for (n, a) in sol.coefficients().iter().enumerate().take(40) {
            let want = if n == 0 { 1.0 } else { 2.0 } * scaled_bessel_i(n, z);
            assert!((a - want).abs() <= 1e-14, "a_{n}: {a} vs {want}");
        }
    }

    #[test]
    fn boundaries_and_initial_profile() {
        let sol = re100();
        for t in [0.0, 0.01, 0.4, 3.0, 90.0] {
            assert_eq!(sol.eval(0.0, t).unwrap(), 0.0);
            assert_eq!(sol.eval(1.0, t).unwrap(), 0.0);
        }
        for k in 0..=20 {
            let x = k as f64 / 20.0;
            assert!((sol.eval(x, 0.0).unwrap() - (PI * x).sin()).abs() <= 1e-12);
        }
        // the series itself reproduces the initial profile where it is well conditioned
        for x in [0.05, 0.1, 0.15] {
            let u = sol.eval_series(x, 1e-9).unwrap().unwrap();
            assert!((u - (PI * x).sin()).abs() < 1e-6, "x = {x}: {u}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let sol = re100();
        assert!(sol.eval(0.5, -1.0).is_err());
        assert!(sol.eval(1.5, 0.1).is_err());
        assert!(sol.eval(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn series_and_integral_agree_where_both_are_good() {
        let sol = re100();
        let mut compared = 0;
        for t in [0.2, 0.4, 1.2, 3.0] {
            for k in 1..20 {
                let x = k as f64 / 20.0;
                if let Some(a) = sol.eval_series(x, t).unwrap() {
                    let b = sol.eval_integral(x, t).unwrap();
                    assert!((a - b).abs() < 1e-11, "({x}, {t}): {a} vs {b}");
                    compared += 1;
                }
            }
        }
        assert!(compared >= 20, "only {compared} points used the series");
    }

    #[test]
    fn positive_inside_the_domain() {
        let sol = re100();
        for t in [0.05, 0.4, 1.0, 3.0, 10.0] {
            for k in 1..200 {
                let x = k as f64 / 200.0;
                assert!(sol.eval(x, t).unwrap() > 0.0, "u({x}, {t}) not positive");
            }
        }
    }

    #[test]
    fn maximum_decays_monotonically() {
        let sol = re100();
        let g = Grid::unit(401).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..=25 {
            let t = 0.5 + 0.1 * k as f64;
            let m = sol.sample(&g, t).unwrap().max_abs();
            assert!(m < last, "t = {t}: {m} >= {last}");
            last = m;
        }
    }

    fn residual(sol: &ColeSolution, x: f64, t: f64) -> f64 {
        let (h, k) = (2e-3, 1e-3);
        let u = |x: f64, t: f64| sol.eval(x, t).unwrap();
        let c1 = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
        let c2 = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];
        let (mut ut, mut ux, mut uxx) = (0.0, 0.0, 0.0);
        for j in 0..7 {
            let s = j as f64 - 3.0;
            ut += c1[j] * u(x, t + s * k);
            let v = u(x + s * h, t);
            ux += c1[j] * v;
            uxx += c2[j] * v;
        }
        ut /= 60.0 * k;
        ux /= 60.0 * h;
        uxx /= 180.0 * h * h;
        ut + u(x, t) * ux - uxx / 100.0
    }

    #[test]
    fn satisfies_the_pde() {
        let sol = re100();
        for t in [0.4, 1.2] {
            for k in 1..=19 {
                let x = k as f64 / 20.0;
                let r = residual(&sol, x, t);
                assert!(r.abs() <= 1e-6, "residual at ({x}, {t}) = {r}");
            }
        }
    }

    #[test]
    fn norms_of_exact_and_perturbed_samples() {
        let sol = re100();
        let g = Grid::unit(41).unwrap();
        let exact = sol.sample(&g, 0.4).unwrap();
        let r = error_norms(&exact, 0.4, &sol).unwrap();
        assert_eq!((r.l_inf, r.l_1), (0.0, 0.0));
        let mut bumped = exact.clone();
        bumped.values_mut()[17] += 1e-3;
        let r = error_norms(&bumped, 0.4, &sol).unwrap();
        assert!((r.l_inf - 1e-3).abs() < 1e-15);
        assert!((r.l_1 - 1e-3 / 41.0).abs() < 1e-16);
        assert!(r.l_1 <= r.l_inf);
    }

    #[test]
    fn wrapper_matches_cached_solution() {
        let spec = ExactSolutionSpec::new(100.0).unwrap();
        assert_eq!(
            cole_exact(0.25, 0.4, &spec).unwrap(),
            re100().eval(0.25, 0.4).unwrap()
        );
    }
}
