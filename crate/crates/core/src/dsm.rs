//! Direct sampling reconstruction.
//!
//! Off line, the Radon profile of the probe is computed once and passed
//! through the spectral fractional Laplacian, giving the kernel `K`. On line,
//! each projection is correlated with `K` (a Toeplitz product evaluated by
//! FFT), the result is back projected and divided by the same quantity
//! computed for the indicator of the domain.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;

use crate::error::{ensure, Error, Result};
use crate::grid::{AngleSet, GridGeometry, ImageGrid, Sinogram, TAxis};
use crate::metrics::{err_l2, err_linf};
use crate::probe::{frac_laplacian_padded, radon_probe_value, ProbeParams};
use crate::radon::{back_project, domain_indicator_sinogram, limited_angle_weights};
use crate::specfun::gamma as gamma_fn;

/// Angular window for limited-angle data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitedAngle {
    pub phi: f64,
    pub lambda: f64,
}

/// Reconstruction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsmConfig {
    pub dim: usize,
    /// Sobolev order of the duality product.
    pub gamma: f64,
    pub alpha: f64,
    /// Probe radius and offset spacing.
    pub h: f64,
    /// Radius of a ball containing the domain.
    pub r2: f64,
    /// Half-width of the cubic domain used for the normalization.
    pub half_width: f64,
    pub limited_angle: Option<LimitedAngle>,
}

/// Normalizing constant `sqrt(pi) / ((4 pi)^((n-1)/2) Gamma(n/2))`.
pub fn dual_constant(dim: usize) -> f64 {
    PI.sqrt() / ((4.0 * PI).powf(0.5 * (dim as f64 - 1.0)) * gamma_fn(0.5 * dim as f64))
}

impl DsmConfig {
    /// Defaults for the domain `[-0.5, 0.5]^dim` and probe radius `h`:
    /// `gamma` 0.4 in the plane and 0.9 in space, `alpha = dim + 1`.
    pub fn new(dim: usize, h: f64) -> Self {
        let gamma = if dim == 3 { 0.9 } else { 0.4 };
        DsmConfig {
            dim,
            gamma,
            alpha: dim as f64 + 1.0,
            h,
            r2: 0.5 * (dim as f64).sqrt(),
            half_width: 0.5,
            limited_angle: None,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_limited_angle(mut self, phi: f64, lambda: f64) -> Self {
        self.limited_angle = Some(LimitedAngle { phi, lambda });
        self
    }

    pub fn d_n(&self) -> f64 {
        dual_constant(self.dim)
    }

    pub fn probe(&self) -> Result<ProbeParams> {
        ProbeParams::with_alpha(self.dim, self.alpha, self.h)
    }

    pub fn validate(&self) -> Result<()> {
        self.probe()?;
        ensure!(
            self.gamma > 0.0 && self.gamma < 0.5 * self.dim as f64,
            Validation,
            "gamma must lie in (0, {}), got {}",
            0.5 * self.dim as f64,
            self.gamma
        );
        ensure!(
            self.half_width > 0.0 && self.r2 >= self.half_width * (self.dim as f64).sqrt() * (1.0 - 1e-12),
            Validation,
            "r2 = {} does not contain the domain of half-width {}",
            self.r2,
            self.half_width
        );
        if let Some(la) = self.limited_angle {
            ensure!(
                self.dim == 2,
                Unsupported,
                "limited-angle reconstruction is planar only"
            );
            ensure!(
                la.phi > 0.0 && la.lambda >= 0.0 && la.phi + la.lambda < 0.5 * PI,
                Validation,
                "limited-angle window needs 0 < phi and phi + lambda < pi/2"
            );
        }
        Ok(())
    }

    /// Offset axis with spacing `h` covering `[-r2, r2]`.
    pub fn tau_axis(&self) -> Result<TAxis> {
        TAxis::centered(self.r2, self.h)
    }
}

/// Kernel `(-Delta)^gamma R(eta)` sampled at offsets `m * spacing`,
/// `|m| <= max_offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTable {
    pub params: ProbeParams,
    pub gamma: f64,
    pub spacing: f64,
    pub max_offset: usize,
    /// Index `m + max_offset` holds offset `m`.
    pub values: Vec<f64>,
}

/// Extension of the profile beyond the needed offsets before filtering.
const PROFILE_EXTENSION: usize = 16;
const SPECTRAL_PADDING: usize = 4;

impl ProbeTable {
    /// Table with arbitrary spacing; the profile is evaluated out to
    /// `PROFILE_EXTENSION` times the needed range and filtered with zero
    /// padding.
    pub fn build(params: ProbeParams, gamma: f64, spacing: f64, max_offset: usize) -> Result<Self> {
        params.validate()?;
        ensure!(
            gamma >= 0.0 && gamma.is_finite(),
            Validation,
            "gamma must be non-negative, got {gamma}"
        );
        ensure!(spacing > 0.0, Validation, "table spacing must be positive");
        let ext = PROFILE_EXTENSION * max_offset.max(1);
        let raw: Vec<f64> = (0..=2 * ext)
            .into_par_iter()
            .map(|i| radon_probe_value(&params, (i as f64 - ext as f64) * spacing))
            .collect();
        let filtered = frac_laplacian_padded(&raw, spacing, gamma, SPECTRAL_PADDING)?;
        let values = filtered[ext - max_offset..=ext + max_offset].to_vec();
        Ok(ProbeTable {
            params,
            gamma,
            spacing,
            max_offset,
            values,
        })
    }

    pub fn at(&self, m: isize) -> f64 {
        self.values[(m + self.max_offset as isize) as usize]
    }
}

/// Off-line table for a configuration: spacing `h`, offsets up to the
/// diameter of the `r2`-ball plus one step.
pub fn precompute_probe_table(config: &DsmConfig) -> Result<ProbeTable> {
    config.validate()?;
    let axis = config.tau_axis()?;
    ProbeTable::build(config.probe()?, config.gamma, config.h, axis.nt)
}

/// Spectrum of the Toeplitz kernel for one axis length, reusable across
/// projections.
pub struct ToeplitzKernel {
    nt: usize,
    len: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    spectrum: Vec<Complex64>,
}

impl std::fmt::Debug for ToeplitzKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToeplitzKernel")
            .field("nt", &self.nt)
            .field("len", &self.len)
            .finish()
    }
}

/// Work buffers for [`ToeplitzKernel::apply`].
#[derive(Debug, Default)]
pub struct ToeplitzScratch {
    real: Vec<f64>,
    freq: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl ToeplitzKernel {
    pub fn new(table: &ProbeTable, nt: usize) -> Result<Self> {
        ensure!(
            nt >= 1 && nt - 1 <= table.max_offset,
            Validation,
            "table covers offsets up to {} samples, axis needs {}",
            table.max_offset,
            nt.saturating_sub(1)
        );
        let len = (2 * nt - 1).next_power_of_two().max(2);
        let mut planner = RealFftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        // H_k = sum_j c[k - j] g_j with c[d] = h K(-d)
        let mut taps = vec![0.0; len];
        for d in -(nt as isize - 1)..=(nt as isize - 1) {
            taps[d.rem_euclid(len as isize) as usize] = table.spacing * table.at(-d);
        }
        let mut spectrum = forward.make_output_vec();
        forward.process(&mut taps, &mut spectrum).expect("kernel transform");
        let scale = 1.0 / len as f64;
        spectrum.iter_mut().for_each(|c| *c *= scale);
        Ok(ToeplitzKernel {
            nt,
            len,
            forward,
            inverse,
            spectrum,
        })
    }

    /// Correlate one projection with the kernel.
    pub fn apply(&self, row: &[f64], out: &mut [f64], s: &mut ToeplitzScratch) {
        s.real.clear();
        s.real.extend_from_slice(row);
        s.real.resize(self.len, 0.0);
        s.freq.resize(self.len / 2 + 1, Complex64::new(0.0, 0.0));
        let need = self.forward.get_scratch_len().max(self.inverse.get_scratch_len());
        s.work.resize(need, Complex64::new(0.0, 0.0));
        // lengths match by construction, so neither transform can fail
        self.forward
            .process_with_scratch(&mut s.real, &mut s.freq, &mut s.work)
            .expect("forward transform");
        for (b, k) in s.freq.iter_mut().zip(&self.spectrum) {
            *b *= k;
        }
        // the imaginary parts of the end bins are round-off only
        s.freq[0].im = 0.0;
        s.freq[self.len / 2].im = 0.0;
        self.inverse
            .process_with_scratch(&mut s.freq, &mut s.real, &mut s.work)
            .expect("inverse transform");
        out.copy_from_slice(&s.real[..out.len()]);
    }

    /// All projections, in parallel; each row is computed independently.
    pub fn apply_all(&self, sino: &Sinogram) -> Result<Sinogram> {
        ensure!(
            sino.axis.nt == self.nt,
            Validation,
            "kernel built for {} samples, sinogram has {}",
            self.nt,
            sino.axis.nt
        );
        let nt = self.nt;
        let mut values = vec![0.0; sino.values.len()];
        values.par_chunks_mut(nt).enumerate().for_each_init(
            ToeplitzScratch::default,
            |s, (i, out)| self.apply(sino.row(i), out, s),
        );
        Sinogram::new(sino.angles.clone(), sino.axis, values)
    }
}

/// `H(theta_i, tau_k) = h sum_j K(t_j - tau_k) g(theta_i, t_j)` on the
/// sinogram's own axis.
pub fn compute_h(sino: &Sinogram, table: &ProbeTable) -> Result<Sinogram> {
    sino.validate()?;
    ensure!(
        (sino.axis.dt - table.spacing).abs() <= 1e-9 * table.spacing,
        Validation,
        "sinogram spacing {} differs from table spacing {}",
        sino.axis.dt,
        table.spacing
    );
    ToeplitzKernel::new(table, sino.axis.nt)?.apply_all(sino)
}

/// Catmull-Rom resampling of every projection onto spacing `dt`, keeping
/// the axis symmetric and covering the original range.
pub fn resample_sinogram(sino: &Sinogram, dt: f64) -> Result<Sinogram> {
    sino.validate()?;
    let old = sino.axis;
    let radius = old.t0.abs().max(old.t_last().abs());
    let axis = TAxis::centered(radius, dt)?;
    let sample = |row: &[f64], j: isize| -> f64 {
        if j < 0 || j >= old.nt as isize {
            0.0
        } else {
            row[j as usize]
        }
    };
    let mut values = vec![0.0; sino.n_angles() * axis.nt];
    values
        .par_chunks_mut(axis.nt)
        .enumerate()
        .for_each(|(i, out)| {
            let row = sino.row(i);
            for (k, v) in out.iter_mut().enumerate() {
                let f = (axis.t(k) - old.t0) / old.dt;
                let j = f.floor() as isize;
                let u = f - j as f64;
                let (p0, p1, p2, p3) = (
                    sample(row, j - 1),
                    sample(row, j),
                    sample(row, j + 1),
                    sample(row, j + 2),
                );
                *v = p1
                    + 0.5
                        * u
                        * (p2 - p0
                            + u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3
                                + u * (3.0 * (p1 - p2) + p3 - p0)));
            }
        });
    Sinogram::new(sino.angles.clone(), axis, values)
}

/// Reconstruction machinery for one configuration, angle set and grid:
/// kernel spectrum, back-projection weights and the normalization field.
#[derive(Debug)]
pub struct DsmReconstructor {
    pub config: DsmConfig,
    pub table: ProbeTable,
    pub axis: TAxis,
    pub angles: AngleSet,
    pub weights: Option<Vec<f64>>,
    pub geometry: GridGeometry,
    pub normalization: ImageGrid,
    kernel: ToeplitzKernel,
}

impl DsmReconstructor {
    pub fn new(config: DsmConfig, angles: &AngleSet, geometry: &GridGeometry) -> Result<Self> {
        config.validate()?;
        angles.validate()?;
        geometry.validate()?;
        ensure!(
            angles.dim() == config.dim && geometry.dim() == config.dim,
            Validation,
            "configuration is {}D, angles {}D, grid {}D",
            config.dim,
            angles.dim(),
            geometry.dim()
        );
        let table = precompute_probe_table(&config)?;
        let axis = config.tau_axis()?;
        let kernel = ToeplitzKernel::new(&table, axis.nt)?;
        let weights = match config.limited_angle {
            Some(la) => Some(limited_angle_weights(angles, la.phi, la.lambda)?),
            None => None,
        };
        let indicator = domain_indicator_sinogram(angles, axis, config.half_width)?;
        let h_ind = kernel.apply_all(&indicator)?;
        let mut normalization = back_project(&h_ind, geometry, weights.as_deref())?;
        let d_n = config.d_n();
        normalization.values.iter_mut().for_each(|v| *v *= d_n);
        Ok(DsmReconstructor {
            config,
            table,
            axis,
            angles: angles.clone(),
            weights,
            geometry: geometry.clone(),
            normalization,
            kernel,
        })
    }

    /// Bring a sinogram onto the offset axis of the reconstructor.
    fn align(&self, sino: &Sinogram) -> Result<Sinogram> {
        ensure!(
            sino.angles == self.angles,
            Validation,
            "sinogram angles differ from the reconstructor's"
        );
        let r2 = self.config.r2;
        if !sino.axis.covers(r2) {
            return Err(Error::Coverage(format!(
                "t axis [{}, {}] does not cover [-{r2}, {r2}]",
                sino.axis.t0,
                sino.axis.t_last()
            )));
        }
        let s = if (sino.axis.dt - self.axis.dt).abs() > 1e-9 * self.axis.dt {
            resample_sinogram(sino, self.axis.dt)?
        } else {
            sino.clone()
        };
        // crop or zero-extend onto the tau axis; offsets are integral steps
        let shift = (s.axis.t0 - self.axis.t0) / self.axis.dt;
        let shift_i = shift.round();
        ensure!(
            (shift - shift_i).abs() < 1e-6,
            Validation,
            "sinogram offsets are not aligned with the probe grid"
        );
        let shift_i = shift_i as isize;
        let nt = self.axis.nt;
        let mut values = vec![0.0; s.n_angles() * nt];
        for (i, out) in values.chunks_mut(nt).enumerate() {
            let row = s.row(i);
            for (k, v) in out.iter_mut().enumerate() {
                let j = k as isize - shift_i;
                if j >= 0 && (j as usize) < row.len() {
                    *v = row[j as usize];
                }
            }
        }
        Sinogram::new(s.angles.clone(), self.axis, values)
    }

    /// Raw duality product `d_n R*(H)` before normalization.
    pub fn numerator(&self, sino: &Sinogram) -> Result<ImageGrid> {
        let s = self.align(sino)?;
        let h = self.kernel.apply_all(&s)?;
        let mut num = back_project(&h, &self.geometry, self.weights.as_deref())?;
        let d_n = self.config.d_n();
        num.values.iter_mut().for_each(|v| *v *= d_n);
        Ok(num)
    }

    pub fn reconstruct(&self, sino: &Sinogram) -> Result<ImageGrid> {
        let mut out = self.numerator(sino)?;
        for (v, n) in out.values.iter_mut().zip(&self.normalization.values) {
            *v /= n;
        }
        Ok(out)
    }
}

/// Normalization field `n(z)`: the index numerator of the domain indicator.
pub fn normalization_field(
    config: &DsmConfig,
    angles: &AngleSet,
    geometry: &GridGeometry,
) -> Result<ImageGrid> {
    Ok(DsmReconstructor::new(*config, angles, geometry)?.normalization)
}

/// Index function `I(z) = d_n R*(H)(z) / n(z)` on `geometry`.
pub fn dsm_reconstruct(sino: &Sinogram, config: &DsmConfig, geometry: &GridGeometry) -> Result<ImageGrid> {
    DsmReconstructor::new(*config, &sino.angles, geometry)?.reconstruct(sino)
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub alpha: f64,
    pub err_l2: f64,
    pub err_linf: f64,
}

/// Reconstruct `sino` for every `(gamma, alpha)` pair and score against `truth`.
pub fn gamma_alpha_sweep(
    sino: &Sinogram,
    truth: &ImageGrid,
    config: &DsmConfig,
    gammas: &[f64],
    alphas: &[f64],
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(gammas.len() * alphas.len());
    for &alpha in alphas {
        for &gamma in gammas {
            let cfg = config.with_gamma(gamma).with_alpha(alpha);
            let rec = dsm_reconstruct(sino, &cfg, &truth.geometry)?;
            rows.push(SweepRow {
                gamma,
                alpha,
                err_l2: err_l2(&rec, truth)?,
                err_linf: err_linf(&rec, truth)?,
            });
        }
    }
    Ok(rows)
}
