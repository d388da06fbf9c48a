//! Discrete Radon transform, its dual (back projection), exact transforms
//! of the domain indicator and limited-angle weights.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::error::{ensure, Error, Result};
use crate::grid::{AngleSet, Directions, GridGeometry, ImageGrid, Sinogram, TAxis};
use crate::phantom::{box_section_area, plane_basis, Shape};

/// Per-direction multipliers in `[0, 1]` applied during back projection.
pub type BackProjectionWeights = Vec<f64>;

impl AngleSet {
    /// `n` angles uniform on `[-pi/2, pi/2)`, weight `pi/n` each.
    pub fn uniform_2d(n: usize) -> Result<AngleSet> {
        ensure!(n > 0, Validation, "angle count must be positive");
        let step = PI / n as f64;
        let angles = (0..n).map(|i| -FRAC_PI_2 + i as f64 * step).collect();
        AngleSet::new(Directions::Planar(angles), vec![step; n])
    }

    /// Angles `-pi/2 + k * step` for `k = 0..`, covering `[-pi/2, pi/2)`.
    pub fn from_increment_2d(step: f64) -> Result<AngleSet> {
        ensure!(
            step > 0.0 && step <= PI,
            Validation,
            "angular increment must lie in (0, pi]"
        );
        AngleSet::uniform_2d((PI / step).round().max(1.0) as usize)
    }

    /// `n` Fibonacci-lattice directions on the upper hemisphere, weight
    /// `2 pi / n` each.
    pub fn fibonacci_hemisphere(n: usize) -> Result<AngleSet> {
        ensure!(n > 0, Validation, "direction count must be positive");
        let golden = PI * (3.0 - 5f64.sqrt());
        let dirs = (0..n)
            .map(|i| {
                let z = (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let (s, c) = (golden * i as f64).sin_cos();
                let v = [r * c, r * s, z];
                let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                [v[0] / norm, v[1] / norm, v[2] / norm]
            })
            .collect();
        AngleSet::new(Directions::Spatial(dirs), vec![2.0 * PI / n as f64; n])
    }
}

impl GridGeometry {
    /// Radius of the smallest origin-centred ball containing the cell box
    /// (sample box grown by half a cell on each side).
    pub fn domain_radius(&self) -> f64 {
        (0..self.dim())
            .map(|a| {
                let lo = self.origin[a] - 0.5 * self.spacing[a];
                let hi = lo + self.shape[a] as f64 * self.spacing[a];
                lo.abs().max(hi.abs()).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Range of `z . dir` over the sample points.
    fn projection_range(&self, dir: [f64; 3]) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (a, d) in dir.iter().enumerate().take(self.dim()) {
            let first = self.origin[a] * d;
            let last = (self.origin[a] + (self.shape[a] - 1) as f64 * self.spacing[a]) * d;
            lo += first.min(last);
            hi += first.max(last);
        }
        (lo, hi)
    }
}

fn check_dims(image_dim: usize, angles: &AngleSet) -> Result<()> {
    ensure!(
        image_dim == angles.dim(),
        Validation,
        "dimension mismatch: {}D grid with {}D directions",
        image_dim,
        angles.dim()
    );
    Ok(())
}

/// Line (2D) or plane (3D) integrals of the multilinear interpolant of
/// `image`, sampled with step `min(spacing)/2`.
pub fn forward_radon(image: &ImageGrid, angles: &AngleSet, axis: TAxis) -> Result<Sinogram> {
    image.validate()?;
    angles.validate()?;
    axis.validate()?;
    check_dims(image.dim(), angles)?;
    let geom = &image.geometry;
    let radius = geom.support_radius();
    let step = 0.5 * geom.min_spacing();
    let half = (radius / step).ceil() as i64;
    let nt = axis.nt;
    let mut values = vec![0.0; angles.len() * nt];
    values
        .par_chunks_mut(nt)
        .enumerate()
        .for_each(|(i, row)| {
            let dir = angles.directions.unit(i);
            match image.dim() {
                2 => {
                    let perp = [-dir[1], dir[0]];
                    for (j, out) in row.iter_mut().enumerate() {
                        let t = axis.t(j);
                        if t.abs() > radius {
                            continue;
                        }
                        let mut acc = 0.0;
                        for k in -half..=half {
                            let s = k as f64 * step;
                            let p = [t * dir[0] + s * perp[0], t * dir[1] + s * perp[1], 0.0];
                            acc += image.interpolate(&p);
                        }
                        *out = acc * step;
                    }
                }
                _ => {
                    let (u, v) = plane_basis(dir);
                    for (j, out) in row.iter_mut().enumerate() {
                        let t = axis.t(j);
                        if t.abs() > radius {
                            continue;
                        }
                        let rho2 = radius * radius - t * t;
                        let mut acc = 0.0;
                        for a in -half..=half {
                            let s = a as f64 * step;
                            let rem = rho2 - s * s;
                            if rem < 0.0 {
                                continue;
                            }
                            let kmax = (rem.sqrt() / step).ceil() as i64;
                            for b in -kmax..=kmax {
                                let r = b as f64 * step;
                                let p = [
                                    t * dir[0] + s * u[0] + r * v[0],
                                    t * dir[1] + s * u[1] + r * v[1],
                                    t * dir[2] + s * u[2] + r * v[2],
                                ];
                                acc += image.interpolate(&p);
                            }
                        }
                        *out = acc * step * step;
                    }
                }
            }
        });
    Sinogram::new(angles.clone(), axis, values)
}

/// `R* g (z) = sum_i w_i q_i g(theta_i, z . theta_i)` with linear
/// interpolation in `t`; `q_i` are the angular quadrature weights and `w_i`
/// the optional limited-angle multipliers.
pub fn back_project(
    sino: &Sinogram,
    target: &GridGeometry,
    weights: Option<&[f64]>,
) -> Result<ImageGrid> {
    sino.validate()?;
    target.validate()?;
    check_dims(target.dim(), &sino.angles)?;
    if let Some(w) = weights {
        ensure!(
            w.len() == sino.n_angles(),
            Validation,
            "{} back-projection weights for {} directions",
            w.len(),
            sino.n_angles()
        );
        ensure!(
            w.iter().all(|x| (0.0..=1.0).contains(x)),
            Validation,
            "back-projection weights must lie in [0, 1]"
        );
    }
    let axis = sino.axis;
    let eps = 1e-9 * axis.dt;
    let dirs: Vec<[f64; 3]> = (0..sino.n_angles())
        .map(|i| sino.angles.directions.unit(i))
        .collect();
    for d in &dirs {
        let (lo, hi) = target.projection_range(*d);
        if lo < axis.t0 - eps || hi > axis.t_last() + eps {
            return Err(Error::Coverage(format!(
                "t axis [{}, {}] does not cover projections [{lo}, {hi}]",
                axis.t0,
                axis.t_last()
            )));
        }
    }
    let coef: Vec<f64> = (0..dirs.len())
        .map(|i| sino.angles.weights[i] * weights.map_or(1.0, |w| w[i]))
        .collect();
    let active: Vec<usize> = (0..dirs.len()).filter(|&i| coef[i] != 0.0).collect();
    let inner = *target.shape.last().unwrap();
    let mut values = vec![0.0; target.len()];
    values
        .par_chunks_mut(inner)
        .enumerate()
        .for_each(|(line, out)| {
            let base = target.point(line * inner);
            let last = target.dim() - 1;
            let dz = target.spacing[last];
            for (k, v) in out.iter_mut().enumerate() {
                let mut p = base;
                p[last] += k as f64 * dz;
                let mut acc = 0.0;
                for &i in &active {
                    let d = dirs[i];
                    let t = p[0] * d[0] + p[1] * d[1] + p[2] * d[2];
                    acc += coef[i] * axis.interpolate(sino.row(i), t);
                }
                *v = acc;
            }
        });
    ImageGrid::new(target.clone(), values)
}

/// Length of the line `x . theta = t` inside `[-a, a]^2`.
pub fn chord_length_square(theta: f64, t: f64, a: f64) -> f64 {
    Shape::square(a).chord(theta, t).unwrap_or(0.0)
}

/// Area of the plane `x . dir = t` inside `[-a, a]^3`.
pub fn cube_section_area(dir: [f64; 3], t: f64, a: f64) -> f64 {
    box_section_area([-a; 3], [a; 3], dir, t)
}

/// Exact Radon transform of the indicator of `[-a, a]^dim`.
pub fn domain_indicator_sinogram(angles: &AngleSet, axis: TAxis, a: f64) -> Result<Sinogram> {
    let nt = axis.nt;
    let mut values = vec![0.0; angles.len() * nt];
    values
        .par_chunks_mut(nt)
        .enumerate()
        .for_each(|(i, row)| match &angles.directions {
            Directions::Planar(th) => {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = chord_length_square(th[i], axis.t(j), a);
                }
            }
            Directions::Spatial(d) => {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = cube_section_area(d[i], axis.t(j), a);
                }
            }
        });
    Sinogram::new(angles.clone(), axis, values)
}

/// Reduce an angle to `[-pi/2, pi/2)`.
pub fn wrap_half_turn(theta: f64) -> f64 {
    theta - PI * ((theta + FRAC_PI_2) / PI).floor()
}

/// Limited-angle taper: 1 for `|theta| <= phi`, linear to 0 over
/// `[phi, phi + lambda]`, 0 beyond; angles taken modulo pi.
pub fn limited_angle_weight(theta: f64, phi: f64, lambda: f64) -> f64 {
    let a = wrap_half_turn(theta).abs();
    if a <= phi {
        1.0
    } else if a < phi + lambda {
        1.0 - (a - phi) / lambda
    } else {
        0.0
    }
}

pub fn limited_angle_weights(
    angles: &AngleSet,
    phi: f64,
    lambda: f64,
) -> Result<BackProjectionWeights> {
    ensure!(
        phi > 0.0 && phi < FRAC_PI_2,
        Validation,
        "limited-angle half-width must lie in (0, pi/2), got {phi}"
    );
    ensure!(
        lambda >= 0.0 && lambda.is_finite(),
        Validation,
        "taper width must be non-negative, got {lambda}"
    );
    ensure!(
        phi + lambda < FRAC_PI_2,
        Validation,
        "taper overlaps the opposite wedge: phi + lambda = {} >= pi/2",
        phi + lambda
    );
    match &angles.directions {
        Directions::Planar(th) => Ok(th
            .iter()
            .map(|&t| limited_angle_weight(t, phi, lambda))
            .collect()),
        Directions::Spatial(_) => Err(Error::Unsupported(
            "limited-angle weights are defined for planar angle sets".into(),
        )),
    }
}
