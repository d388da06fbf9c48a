//! Probing functions: the smoothed power law `eta`, its flat-capped twin,
//! the one-dimensional Radon profile of `eta`, the spectral fractional
//! Laplacian and the closed-form spectra of the flat-capped probe.
//!
//! `eta(r) = r^-alpha` for `r >= h`. Inside the ball it is the constant
//! `h^-k` on `[0, b)` with `b = h - h^2/n`, followed by a quintic on `[b, h]`
//! that leaves `b` with zero first and second derivatives.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{ensure, Result};
use crate::grid::TAxis;
use crate::quadrature::{adaptive, GaussLegendre};
use crate::specfun::{bessel_j0, bessel_j1, gamma, sine_integral, sphere_area, struve};

/// Dimension, decay exponent and cap radius of a probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeParams {
    pub dim: usize,
    pub alpha: f64,
    pub h: f64,
}

impl ProbeParams {
    /// Probe with the default exponent `alpha = dim + 1`.
    pub fn new(dim: usize, h: f64) -> Result<Self> {
        ProbeParams::with_alpha(dim, dim as f64 + 1.0, h)
    }

    pub fn with_alpha(dim: usize, alpha: f64, h: f64) -> Result<Self> {
        let p = ProbeParams { dim, alpha, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.dim == 2 || self.dim == 3,
            Validation,
            "probe dimension must be 2 or 3, got {}",
            self.dim
        );
        ensure!(
            self.h > 0.0 && self.h < 1.0,
            Validation,
            "probe radius h must lie in (0, 1), got {}",
            self.h
        );
        ensure!(
            self.alpha > self.dim as f64 && self.alpha.is_finite(),
            Validation,
            "probe exponent must exceed the dimension, got {}",
            self.alpha
        );
        Ok(())
    }

    /// Start of the polynomial transition, `h - h^2/n`.
    pub fn b(&self) -> f64 {
        self.h - self.h * self.h / self.dim as f64
    }

    fn cap(&self) -> f64 {
        self.h.powf(-self.alpha)
    }

    /// Smooth extension on `[0, h]` without the range check.
    fn psi_unchecked(&self, t: f64) -> f64 {
        let h = self.h;
        let k = self.alpha;
        let d = t - self.b();
        if d <= 0.0 {
            return self.cap();
        }
        let a = (k * k + k) / (2.0 * h.powi(4)) + 4.0 * k / h.powi(5);
        let a1 = (k * k + k) / (2.0 * h.powi(4)) + 3.0 * k / h.powi(5);
        let s = d / h;
        self.cap() * (1.0 + d * d * d * (s - 1.0) * (a1 * s - a))
    }

    fn eta(&self, r: f64) -> f64 {
        if r >= self.h {
            r.powf(-self.alpha)
        } else {
            self.psi_unchecked(r)
        }
    }
}

/// Inner branch of the probe on `[0, h]`.
pub fn psi(params: &ProbeParams, t: f64) -> Result<f64> {
    ensure!(
        (0.0..=params.h).contains(&t),
        Domain,
        "psi is defined on [0, {}], got {t}",
        params.h
    );
    Ok(params.psi_unchecked(t))
}

/// Probe `eta` as a function of the radius.
pub fn zeta(params: &ProbeParams, r: f64) -> f64 {
    params.eta(r.abs())
}

/// Flat-capped probe: `r^-alpha` outside the ball, `h^-alpha` inside.
pub fn zeta_tilde(params: &ProbeParams, r: f64) -> f64 {
    let r = r.abs();
    if r >= params.h {
        r.powf(-params.alpha)
    } else {
        params.cap()
    }
}

/// `int_{B(0,h)} |psi(|x|) - h^-k| dx`, the L1 gap between the two probes.
pub fn probe_l1_gap(params: &ProbeParams) -> f64 {
    let n = params.dim as i32;
    let cap = params.cap();
    let integrand = |r: f64| r.powi(n - 1) * (params.psi_unchecked(r) - cap).abs();
    // psi - h^-k keeps one sign on [b, h]
    let rule = GaussLegendre::standard();
    let v = rule.composite(integrand, params.b(), params.h, 64);
    sphere_area(params.dim) * v
}

/// What a [`RadialProfile`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Eta,
    EtaTilde,
    RadonOfEta,
    FracLapOfRadon,
}

/// Samples of a radial or offset profile on a uniform axis.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub axis: TAxis,
    pub values: Vec<f64>,
    pub kind: ProfileKind,
}

/// Radon transform of the probe along a single offset `tau`.
pub fn radon_probe_value(params: &ProbeParams, tau: f64) -> f64 {
    let tau = tau.abs();
    let h = params.h;
    let alpha = params.alpha;
    match params.dim {
        2 => {
            if tau >= h {
                // 2 int_0^inf (tau^2 + s^2)^(-alpha/2) ds
                return 2.0 * tau.powf(1.0 - alpha) * wallis(alpha - 2.0);
            }
            let s_h = (h * h - tau * tau).sqrt();
            let b = params.b();
            let cap = if tau < b {
                let s_b = (b * b - tau * tau).sqrt();
                let poly = adaptive(
                    |s| params.psi_unchecked((tau * tau + s * s).sqrt()),
                    s_b,
                    s_h,
                    1e-13 * params.cap() * h,
                );
                s_b * params.cap() + poly
            } else {
                adaptive(
                    |s| params.psi_unchecked((tau * tau + s * s).sqrt()),
                    0.0,
                    s_h,
                    1e-13 * params.cap() * h,
                )
            };
            2.0 * (cap + line_tail(alpha, tau, s_h))
        }
        _ => {
            let tail = h.powf(2.0 - alpha) / (alpha - 2.0);
            if tau >= h {
                return 2.0 * PI * tau.powf(2.0 - alpha) / (alpha - 2.0);
            }
            let b = params.b();
            let lo = tau.max(b);
            let flat = if tau < b {
                0.5 * params.cap() * (b * b - tau * tau)
            } else {
                0.0
            };
            let poly = adaptive(
                |r| params.psi_unchecked(r) * r,
                lo,
                h,
                1e-13 * params.cap() * h * h,
            );
            2.0 * PI * (flat + poly + tail)
        }
    }
}

/// `int_0^{pi/2} sin^p u du`.
fn wallis(p: f64) -> f64 {
    0.5 * PI.sqrt() * gamma(0.5 * (p + 1.0)) / gamma(0.5 * p + 1.0)
}

/// `int_{s0}^inf (tau^2 + s^2)^(-alpha/2) ds` for `s0 > 0`.
fn line_tail(alpha: f64, tau: f64, s0: f64) -> f64 {
    if tau == 0.0 {
        return s0.powf(1.0 - alpha) / (alpha - 1.0);
    }
    // s = tau cot(u): tau^(1-alpha) int_0^beta sin^(alpha-2) u du
    let beta = (tau / s0).atan();
    let p = alpha - 2.0;
    let inner = if (p - 1.0).abs() < 1e-15 {
        1.0 - beta.cos()
    } else {
        let scale = beta.powf(p + 1.0) / (p + 1.0);
        adaptive(|u| u.sin().powf(p), 0.0, beta, 1e-15 * scale)
    };
    tau.powf(1.0 - alpha) * inner
}

/// Radon profile of the probe on a symmetric axis.
pub fn radon_probe_profile(params: &ProbeParams, axis: TAxis) -> Result<RadialProfile> {
    params.validate()?;
    axis.validate()?;
    let mid = -(axis.nt as f64 - 1.0) * 0.5 * axis.dt;
    ensure!(
        (axis.t0 - mid).abs() <= 1e-9 * axis.dt,
        Validation,
        "profile axis must be symmetric about zero"
    );
    let values = (0..axis.nt)
        .map(|j| radon_probe_value(params, axis.t(j)))
        .collect();
    Ok(RadialProfile {
        axis,
        values,
        kind: ProfileKind::RadonOfEta,
    })
}

/// Fourier multiplier `(2 pi |xi|)^(2 gamma)` with `xi` in cycles per unit.
pub fn frac_laplacian_1d(profile: &RadialProfile, gamma: f64) -> Result<RadialProfile> {
    let values = frac_laplacian_padded(&profile.values, profile.axis.dt, gamma, 4)?;
    Ok(RadialProfile {
        axis: profile.axis,
        values,
        kind: ProfileKind::FracLapOfRadon,
    })
}

/// Spectral fractional Laplacian of `values` (spacing `dt`) after zero
/// padding to `pad` times the length; `pad = 1` treats the input as periodic.
pub fn frac_laplacian_padded(values: &[f64], dt: f64, gamma: f64, pad: usize) -> Result<Vec<f64>> {
    ensure!(
        gamma >= 0.0 && gamma.is_finite(),
        Validation,
        "fractional order must be non-negative, got {gamma}"
    );
    ensure!(pad >= 1, Validation, "padding factor must be at least 1");
    ensure!(dt > 0.0, Validation, "sample spacing must be positive");
    if gamma == 0.0 {
        return Ok(values.to_vec());
    }
    let n = values.len();
    let len = n * pad;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut buf: Vec<Complex64> = (0..len)
        .map(|i| Complex64::new(if i < n { values[i] } else { 0.0 }, 0.0))
        .collect();
    fwd.process(&mut buf);
    let symbols = multiplier(len, dt, gamma);
    for (c, m) in buf.iter_mut().zip(&symbols) {
        *c *= m / len as f64;
    }
    inv.process(&mut buf);
    Ok(buf[..n].iter().map(|c| c.re).collect())
}

/// `(2 pi |xi_k|)^(2 gamma)` for the DFT frequencies of a length-`len` grid.
pub(crate) fn multiplier(len: usize, dt: f64, gamma: f64) -> Vec<f64> {
    (0..len)
        .map(|k| {
            let kk = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
            let xi = kk / (len as f64 * dt);
            if xi == 0.0 {
                0.0
            } else {
                (2.0 * PI * xi.abs()).powf(2.0 * gamma)
            }
        })
        .collect()
}

/// Shared FFT plans for a fixed length.
pub(crate) struct FftPair {
    pub len: usize,
    pub forward: Arc<dyn rustfft::Fft<f64>>,
    pub inverse: Arc<dyn rustfft::Fft<f64>>,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }
}

impl std::fmt::Debug for FftPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPair").field("len", &self.len).finish()
    }
}

/// Fourier transform of the flat-capped probe in the plane,
/// `lambda = 2 pi omega h`.
pub fn probe_freq_2d(h: f64, omega: f64) -> f64 {
    let lam = 2.0 * PI * omega.abs() * h;
    if lam == 0.0 {
        return 1.5 / h;
    }
    let j0 = bessel_j0(lam);
    let j1 = bessel_j1(lam);
    let h0 = struve(0, lam);
    let h1 = struve(1, lam);
    let half_pi = 0.5 * PI * lam;
    (j1 / lam + (lam * lam + 1.0) * j0 - half_pi * lam * h1 * j0 - lam * (1.0 - half_pi * h0) * j1
        - lam)
        / h
}

/// Fourier transform of the flat-capped probe in space.
pub fn probe_freq_3d(h: f64, omega: f64) -> f64 {
    let lam = 2.0 * PI * omega.abs() * h;
    let (s, c) = lam.sin_cos();
    let head = if lam < 0.05 {
        let l2 = lam * lam;
        1.0 / 3.0 - l2 / 30.0 + l2 * l2 / 840.0
    } else {
        (s - lam * c) / lam.powi(3)
    };
    let rest = if lam == 0.0 {
        1.0
    } else {
        lam * (-0.25 * PI + 0.5 * sine_integral(lam)) + s / (2.0 * lam) + 0.5 * c
    };
    4.0 * PI / h * (head + rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_pieces;

    fn p2(h: f64) -> ProbeParams {
        ProbeParams::new(2, h).unwrap()
    }

    #[test]
    fn psi_at_transition_start() {
        for (dim, h) in [(2, 0.1), (3, 0.02)] {
            let p = ProbeParams::new(dim, h).unwrap();
            assert_eq!(psi(&p, p.b()).unwrap(), h.powi(-(dim as i32 + 1)));
            assert_eq!(psi(&p, 0.0).unwrap(), h.powi(-(dim as i32 + 1)));
        }
    }

    #[test]
    fn psi_is_flat_to_second_order_at_b() {
        let p = p2(0.1);
        let b = p.b();
        let f = |t: f64| p.psi_unchecked(t);
        // cubic onset: (f(b + e) - f(b)) / e^3 settles to a constant
        let onset = |e: f64| (f(b + e) - f(b)) / (e * e * e);
        let e = 1e-4 * p.h;
        let (r1, r2) = (onset(e), onset(0.5 * e));
        assert!(r1 != 0.0 && ((r1 - r2) / r1).abs() < 1e-3, "{r1} {r2}");
        assert_eq!(f(b - e), f(b));
    }

    #[test]
    fn psi_range_is_checked() {
        let p = p2(0.1);
        assert!(psi(&p, 0.11).is_err());
        assert!(psi(&p, -1e-9).is_err());
    }

    #[test]
    fn zeta_branches() {
        let p = p2(0.1);
        assert_eq!(zeta_tilde(&p, 0.05), 0.1f64.powi(-3));
        assert_eq!(zeta(&p, 0.2), 0.2f64.powi(-3));
    }

    #[test]
    fn zeta_mismatch_at_h_is_order_h() {
        // measured relative jumps: about 1.44 h to 1.5 h in the plane and
        // 0.59 h in space
        for h in [0.1, 0.02, 0.005] {
            for (dim, bound) in [(2, 1.6), (3, 0.6)] {
                let p = ProbeParams::new(dim, h).unwrap();
                let inner = p.psi_unchecked(h);
                let outer = h.powf(-p.alpha);
                let rel = (inner - outer).abs() / outer;
                assert!(rel <= bound * h, "dim {dim} h {h}: {}", rel / h);
            }
        }
    }

    #[test]
    fn profile_is_even() {
        let p = p2(0.1);
        let axis = TAxis::new(-2.0, 0.05, 81).unwrap();
        for j in 0..81 {
            let t = axis.t(j);
            assert_eq!(radon_probe_value(&p, t), radon_probe_value(&p, -t), "{t}");
        }
    }

    #[test]
    fn profile_at_zero_against_radial_quadrature() {
        // 2 [ int_0^h psi dr + int_h^inf r^-3 dr ]
        let p = p2(0.1);
        let inner = adaptive_pieces(|r| p.psi_unchecked(r), &[0.0, p.b(), p.h], 1e-14);
        let want = 2.0 * (inner + 1.0 / (2.0 * p.h * p.h));
        let got = radon_probe_value(&p, 0.0);
        assert!((got / want - 1.0).abs() < 1e-8, "{got} {want}");
    }

    #[test]
    fn profile_inside_cap_against_line_quadrature() {
        for (dim, alpha) in [(2, 3.0), (2, 4.0), (3, 4.0)] {
            let p = ProbeParams::with_alpha(dim, alpha, 0.1).unwrap();
            for tau in [0.0, 0.03, 0.07, 0.095, 0.1, 0.3] {
                let got = radon_probe_value(&p, tau);
                let want = if dim == 2 {
                    // s-quadrature over the line with a long explicit range
                    let f = |s: f64| p.eta((tau * tau + s * s).sqrt());
                    let mut breaks = vec![0.0];
                    let mut x: f64 = 0.01;
                    while x < 1e4 {
                        breaks.push(x);
                        x *= 1.5;
                    }
                    let tail = 1e4f64.powf(1.0 - alpha) / (alpha - 1.0);
                    2.0 * (adaptive_pieces(f, &breaks, 1e-15) + tail)
                } else {
                    let f = |r: f64| p.eta(r) * r;
                    let lo = tau;
                    let mut breaks = vec![lo];
                    for edge in [p.b(), p.h] {
                        if edge > lo {
                            breaks.push(edge);
                        }
                    }
                    let mut x = lo.max(p.h) * 1.5;
                    while x < 1e4 {
                        breaks.push(x);
                        x *= 1.5;
                    }
                    let last = *breaks.last().unwrap();
                    let tail = last.powf(2.0 - alpha) / (alpha - 2.0);
                    2.0 * PI * (adaptive_pieces(f, &breaks, 1e-14) + tail)
                };
                assert!((got / want - 1.0).abs() < 1e-8, "dim {dim} tau {tau}: {got} {want}");
            }
        }
    }

    #[test]
    fn profile_tail_slope() {
        let p = p2(0.01);
        let a = radon_probe_value(&p, 0.1);
        let b = radon_probe_value(&p, 1.0);
        let slope = (b / a).ln() / 10f64.ln();
        assert!((slope + 2.0).abs() < 0.05);
    }

    #[test]
    fn fractional_laplacian_identity_and_eigenfunctions() {
        let v: Vec<f64> = (0..64).map(|i| (i as f64 * 0.3).sin()).collect();
        assert_eq!(frac_laplacian_padded(&v, 0.1, 0.0, 4).unwrap(), v);
        let n = 128;
        let dt = 1.0 / n as f64;
        let f = 5.0;
        let c: Vec<f64> = (0..n).map(|i| (2.0 * PI * f * i as f64 * dt).cos()).collect();
        for g in [0.3, 0.5, 0.9] {
            let out = frac_laplacian_padded(&c, dt, g, 1).unwrap();
            let s = (2.0 * PI * f).powf(2.0 * g);
            for i in 0..n {
                assert!((out[i] - s * c[i]).abs() < 1e-9 * s);
            }
        }
        assert!(frac_laplacian_padded(&c, dt, -0.1, 1).is_err());
    }

    #[test]
    fn order_one_is_minus_second_derivative() {
        // smooth compact bump (C^2 quartic-power window)
        let n = 2001;
        let dt = 4.0 / (n - 1) as f64;
        let x = |i: usize| -2.0 + i as f64 * dt;
        let bump = |t: f64| {
            if t.abs() >= 1.0 {
                0.0
            } else {
                (1.0 - t * t).powi(6)
            }
        };
        let v: Vec<f64> = (0..n).map(|i| bump(x(i))).collect();
        let out = frac_laplacian_padded(&v, dt, 1.0, 4).unwrap();
        for i in (n / 2 - 300..n / 2 + 300).step_by(37) {
            let fd = -(v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dt * dt);
            assert!((out[i] - fd).abs() < 1e-4 * fd.abs().max(1.0), "{} {}", out[i], fd);
        }
    }

    #[test]
    fn small_frequency_limits() {
        assert!((probe_freq_2d(0.1, 1e-6) - 15.0).abs() < 1e-3);
        assert!((probe_freq_3d(0.1, 1e-6) - 167.55).abs() < 0.01);
        assert_eq!(probe_freq_2d(0.1, 0.0), 15.0);
    }

    #[test]
    fn spectra_decay_at_band_edge() {
        let h = 0.1;
        let w = 1.0 / (2.0 * h);
        assert!(probe_freq_2d(h, w).abs() <= 0.05 * probe_freq_2d(h, 1e-9));
        assert!(probe_freq_3d(h, w).abs() <= 0.05 * probe_freq_3d(h, 1e-9));
    }
}
