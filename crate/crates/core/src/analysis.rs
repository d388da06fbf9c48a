//! Probe spectra and the variance of the index function as a function of
//! the Sobolev order.

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;

use crate::dsm::{DsmConfig, DsmReconstructor};
use crate::error::{ensure, Result};
use crate::grid::{AngleSet, GridGeometry};
use crate::io::write_csv;
use crate::probe::{probe_freq_2d, probe_freq_3d};
use crate::quadrature::GaussLegendre;
use crate::specfun::sphere_area;

/// Sampled curve with the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveResult {
    pub dim: usize,
    pub h: f64,
    pub x_label: &'static str,
    pub y_label: &'static str,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl CurveResult {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_csv(&[(self.x_label, &self.x), (self.y_label, &self.y)], path)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    ensure!(dim == 2 || dim == 3, Validation, "dimension must be 2 or 3, got {dim}");
    Ok(())
}

/// Probe spectrum for `dim`.
pub fn probe_freq(dim: usize, h: f64, omega: f64) -> f64 {
    if dim == 3 {
        probe_freq_3d(h, omega)
    } else {
        probe_freq_2d(h, omega)
    }
}

/// Probe spectrum on `n_points` uniform frequencies in `[0, omega_max]`.
pub fn freq_curve(dim: usize, h: f64, omega_max: f64, n_points: usize) -> Result<CurveResult> {
    check_dim(dim)?;
    ensure!(h > 0.0 && h < 1.0, Validation, "h must lie in (0, 1), got {h}");
    ensure!(omega_max > 0.0, Validation, "omega_max must be positive");
    ensure!(n_points >= 2, Validation, "need at least two points");
    let x: Vec<f64> = (0..n_points)
        .map(|i| omega_max * i as f64 / (n_points - 1) as f64)
        .collect();
    let y = x.iter().map(|&w| probe_freq(dim, h, w)).collect();
    Ok(CurveResult {
        dim,
        h,
        x_label: "omega",
        y_label: "spectrum",
        x,
        y,
    })
}

/// Default panel count of the radial rule in [`variance_curve`].
pub const VARIANCE_PANELS: usize = 64;

/// `|S^(n-1)| int_0^(1/(2h)) (2 pi w)^(4 gamma) F(w)^2 w^(n-1) dw` with a
/// composite 20-point Gauss rule on `panels` panels.
///
/// The symbol `(2 pi w)^(2 gamma)` is the one used by the reconstruction, so
/// the ratio to `n(0)^2` does not depend on the Fourier convention.
pub fn spectral_energy(dim: usize, h: f64, gamma: f64, panels: usize) -> f64 {
    let rule = GaussLegendre::standard();
    let top = 0.5 / h;
    let p = dim as f64 - 1.0;
    // w = top * u^2 removes the weak singularity at the origin
    let f = |u: f64| {
        let w = top * u * u;
        let s = probe_freq(dim, h, w);
        (2.0 * PI * w).powf(4.0 * gamma) * w.powf(p) * s * s * 2.0 * top * u
    };
    sphere_area(dim) * rule.composite(f, 0.0, 1.0, panels)
}

/// Normalization `n(0)` on `[-0.5, 0.5]^dim` for the given Sobolev order.
pub fn normalization_at_origin(dim: usize, h: f64, gamma: f64) -> Result<f64> {
    let config = DsmConfig::new(dim, h).with_gamma(gamma);
    let angles = if dim == 3 {
        AngleSet::fibonacci_hemisphere(400)?
    } else {
        AngleSet::uniform_2d(180)?
    };
    let origin = GridGeometry::new(vec![1; dim], vec![0.0; dim], vec![h; dim])?;
    Ok(DsmReconstructor::new(config, &angles, &origin)?.normalization.values[0])
}

/// `ln v(gamma)` scaled so that its maximum over `gammas` is zero, with
/// `v = spectral_energy / n(0)^2`.
pub fn variance_curve(dim: usize, h: f64, gammas: &[f64]) -> Result<CurveResult> {
    variance_curve_with(dim, h, gammas, VARIANCE_PANELS)
}

pub fn variance_curve_with(dim: usize, h: f64, gammas: &[f64], panels: usize) -> Result<CurveResult> {
    check_dim(dim)?;
    ensure!(h > 0.0 && h < 1.0, Validation, "h must lie in (0, 1), got {h}");
    ensure!(!gammas.is_empty(), Validation, "empty gamma grid");
    for &g in gammas {
        ensure!(
            g > 0.0 && g < 1.0,
            Validation,
            "gamma must lie in (0, 1) for a square-integrable spectrum, got {g}"
        );
    }
    let v: Vec<f64> = gammas
        .par_iter()
        .map(|&g| {
            let n0 = normalization_at_origin(dim, h, g)?;
            Ok(spectral_energy(dim, h, g, panels) / (n0 * n0))
        })
        .collect::<Result<_>>()?;
    let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(CurveResult {
        dim,
        h,
        x_label: "gamma",
        y_label: "ln_variance",
        x: gammas.to_vec(),
        y: v.iter().map(|x| (x / top).ln()).collect(),
    })
}

/// `0.2, 0.225, ..., 0.975`.
pub fn default_gamma_grid() -> Vec<f64> {
    (0..32).map(|i| 0.2 + 0.025 * i as f64).collect()
}
