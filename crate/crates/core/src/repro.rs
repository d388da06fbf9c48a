//! End-to-end numerical experiments: exact data, noise, DSM and FBP
//! reconstructions, and their errors against the rasterized phantom.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;

use crate::dsm::{DsmConfig, DsmReconstructor};
use crate::error::{ensure, Result};
use crate::fbp::{fbp_reconstruct, fbp_reconstruct_3d, FbpFilterSpec};
use crate::grid::{AngleSet, Directions, ImageGrid, Sinogram, TAxis};
use crate::io::write_table;
use crate::metrics::{err_l2, err_linf};
use crate::noise::{add_noise, NoiseSpec};
use crate::phantom::{Phantom, PhantomName, PhantomSpec};
use crate::radon::{limited_angle_weights, wrap_half_turn};

/// Grid resolution and angle count of a planar experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scale {
    pub resolution: usize,
    pub n_angles: usize,
    /// Samples per axis of the spatial experiment.
    pub resolution_3d: usize,
    pub n_directions_3d: usize,
}

impl Scale {
    pub fn desk() -> Self {
        Scale {
            resolution: 128,
            n_angles: 180,
            resolution_3d: 48,
            n_directions_3d: 400,
        }
    }

    /// `h = 0.005` and a quarter-degree increment in the plane; `h = 0.01`
    /// and 900 directions in space.
    pub fn paper() -> Self {
        Scale {
            resolution: 200,
            n_angles: 720,
            resolution_3d: 100,
            n_directions_3d: 900,
        }
    }
}

/// One reconstruction scored against the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ReproRow {
    pub example: u8,
    pub case: String,
    pub method: &'static str,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub noise: String,
    pub err_l2: f64,
    pub err_linf: f64,
    pub seconds: f64,
}

pub const REPRO_HEADER: [&str; 9] = [
    "example", "case", "method", "gamma", "alpha", "noise", "err_l2", "err_linf", "seconds",
];

impl ReproRow {
    pub fn fields(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        vec![
            self.example.to_string(),
            self.case.clone(),
            self.method.to_string(),
            opt(self.gamma),
            opt(self.alpha),
            self.noise.clone(),
            format!("{}", self.err_l2),
            format!("{}", self.err_linf),
            format!("{:.3}", self.seconds),
        ]
    }
}

pub fn write_rows(rows: &[ReproRow], path: impl AsRef<std::path::Path>) -> Result<()> {
    let body: Vec<Vec<String>> = rows.iter().map(ReproRow::fields).collect();
    write_table(&REPRO_HEADER, &body, path)
}

/// Exact Radon data of an analytic phantom.
pub fn analytic_sinogram(phantom: &Phantom, angles: &AngleSet, axis: TAxis) -> Result<Sinogram> {
    ensure!(
        phantom.dim == angles.dim(),
        Validation,
        "phantom is {}D but directions are {}D",
        phantom.dim,
        angles.dim()
    );
    let nt = axis.nt;
    let values: Vec<f64> = (0..angles.len())
        .into_par_iter()
        .map(|i| {
            (0..nt)
                .map(|j| match &angles.directions {
                    Directions::Planar(th) => phantom.line_integral(th[i], axis.t(j)),
                    Directions::Spatial(d) => phantom.plane_integral(d[i], axis.t(j)),
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    Sinogram::new(angles.clone(), axis, values)
}

/// Truth image, exact data and matching DSM defaults for a phantom.
#[derive(Debug, Clone)]
pub struct Case {
    pub truth: ImageGrid,
    pub exact: Sinogram,
    pub config: DsmConfig,
}

/// Phantom on `resolution^dim` cells with `h` equal to the cell size and
/// offsets sampled at `h` over the ball containing the domain.
pub fn setup_case(name: PhantomName, resolution: usize, angles: &AngleSet) -> Result<Case> {
    let spec = PhantomSpec::new(name, resolution);
    spec.validate()?;
    let geometry = spec.geometry()?;
    let h = 2.0 * spec.half_width / resolution as f64;
    let config = DsmConfig::new(name.dim(), h);
    let phantom = spec.phantom();
    let exact = analytic_sinogram(&phantom, angles, config.tau_axis()?)?;
    Ok(Case {
        truth: phantom.rasterize(&geometry),
        exact,
        config,
    })
}

/// Copy the projection at `+-phi` onto the taper band `phi < |theta| <= phi +
/// lambda` and zero every other unmeasured angle.
pub fn extend_limited_angle(sino: &Sinogram, phi: f64, lambda: f64) -> Result<Sinogram> {
    let th = match &sino.angles.directions {
        Directions::Planar(t) => t.clone(),
        Directions::Spatial(_) => {
            return Err(crate::Error::Unsupported(
                "limited-angle data is planar only".into(),
            ))
        }
    };
    let wrapped: Vec<f64> = th.iter().map(|t| wrap_half_turn(*t)).collect();
    let edge = |sign: f64| {
        (0..th.len())
            .filter(|&i| wrapped[i].abs() <= phi && wrapped[i] * sign >= 0.0)
            .max_by(|&a, &b| wrapped[a].abs().total_cmp(&wrapped[b].abs()))
    };
    let (lo, hi) = (edge(-1.0), edge(1.0));
    ensure!(
        lo.is_some() && hi.is_some(),
        Validation,
        "no measured angle within [-{phi}, {phi}]"
    );
    let nt = sino.axis.nt;
    let mut values = vec![0.0; sino.values.len()];
    for (i, out) in values.chunks_mut(nt).enumerate() {
        let a = wrapped[i].abs();
        let src = if a <= phi {
            Some(i)
        } else if a <= phi + lambda {
            if wrapped[i] < 0.0 {
                lo
            } else {
                hi
            }
        } else {
            None
        };
        if let Some(s) = src {
            out.copy_from_slice(sino.row(s));
        }
    }
    sino.with_values(values)
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

struct Scored {
    err_l2: f64,
    err_linf: f64,
    seconds: f64,
}

fn score(rec: &ImageGrid, truth: &ImageGrid, seconds: f64) -> Result<Scored> {
    Ok(Scored {
        err_l2: err_l2(rec, truth)?,
        err_linf: err_linf(rec, truth)?,
        seconds,
    })
}

fn row(example: u8, case: &str, method: &'static str, cfg: Option<&DsmConfig>, noise: &str, s: Scored) -> ReproRow {
    ReproRow {
        example,
        case: case.to_string(),
        method,
        gamma: cfg.map(|c| c.gamma),
        alpha: cfg.map(|c| c.alpha),
        noise: noise.to_string(),
        err_l2: s.err_l2,
        err_linf: s.err_linf,
        seconds: s.seconds,
    }
}

/// DSM against FBP (Hamming) on one noisy sinogram.
#[allow(clippy::too_many_arguments)]
fn compare(
    example: u8,
    label: &str,
    case: &Case,
    config: &DsmConfig,
    noisy: &Sinogram,
    noise: &str,
    weights: Option<&[f64]>,
    out: &mut Vec<ReproRow>,
) -> Result<()> {
    let (dsm, t) = timed(|| DsmReconstructor::new(*config, &noisy.angles, &case.truth.geometry)?.reconstruct(noisy))?;
    out.push(row(example, label, "dsm", Some(config), noise, score(&dsm, &case.truth, t)?));
    let (fbp, t) = timed(|| {
        if noisy.dim() == 3 {
            fbp_reconstruct_3d(noisy, &FbpFilterSpec::hamming(), &case.truth.geometry)
        } else {
            fbp_reconstruct(noisy, &FbpFilterSpec::hamming(), &case.truth.geometry, weights)
        }
    })?;
    out.push(row(example, label, "fbp", None, noise, score(&fbp, &case.truth, t)?));
    Ok(())
}

/// Sobolev-order and exponent sweeps on shared noisy data.
pub fn example1(scale: Scale, seed: u64) -> Result<Vec<ReproRow>> {
    let angles = AngleSet::uniform_2d(scale.n_angles)?;
    let case = setup_case(PhantomName::Shapes2d, scale.resolution, &angles)?;
    let mut rows = Vec::new();
    let noisy = add_noise(&case.exact, &NoiseSpec::gaussian(0.2, seed))?;
    for gamma in [0.3, 0.4, 0.5, 0.6] {
        let cfg = case.config.with_gamma(gamma).with_alpha(3.0);
        let (rec, t) = timed(|| DsmReconstructor::new(cfg, &angles, &case.truth.geometry)?.reconstruct(&noisy))?;
        rows.push(row(1, "gamma_sweep", "dsm", Some(&cfg), "gaussian_0.2", score(&rec, &case.truth, t)?));
    }
    let noisy = add_noise(&case.exact, &NoiseSpec::gaussian(0.3, seed.wrapping_add(1)))?;
    for alpha in [3.0, 4.0, 5.0] {
        let cfg = case.config.with_gamma(0.4).with_alpha(alpha);
        let (rec, t) = timed(|| DsmReconstructor::new(cfg, &angles, &case.truth.geometry)?.reconstruct(&noisy))?;
        rows.push(row(1, "alpha_sweep", "dsm", Some(&cfg), "gaussian_0.3", score(&rec, &case.truth, t)?));
    }
    Ok(rows)
}

/// 20% Gaussian noise: shapes with `gamma = 0.4`, head with `gamma = 0.55`.
pub fn example2(scale: Scale, seed: u64) -> Result<Vec<ReproRow>> {
    let angles = AngleSet::uniform_2d(scale.n_angles)?;
    let mut rows = Vec::new();
    for (k, (name, gamma)) in [(PhantomName::Shapes2d, 0.4), (PhantomName::SheppLogan, 0.55)]
        .into_iter()
        .enumerate()
    {
        let case = setup_case(name, scale.resolution, &angles)?;
        let noisy = add_noise(&case.exact, &NoiseSpec::gaussian(0.2, seed.wrapping_add(k as u64)))?;
        let cfg = case.config.with_gamma(gamma);
        compare(2, name.as_str(), &case, &cfg, &noisy, "gaussian_0.2", None, &mut rows)?;
    }
    Ok(rows)
}

/// 8% salt-and-pepper noise on both planar phantoms.
pub fn example3(scale: Scale, seed: u64) -> Result<Vec<ReproRow>> {
    let angles = AngleSet::uniform_2d(scale.n_angles)?;
    let mut rows = Vec::new();
    for (k, name) in [PhantomName::Shapes2d, PhantomName::SheppLogan].into_iter().enumerate() {
        let case = setup_case(name, scale.resolution, &angles)?;
        let noisy = add_noise(&case.exact, &NoiseSpec::salt_pepper(0.08, seed.wrapping_add(k as u64)))?;
        compare(3, name.as_str(), &case, &case.config, &noisy, "salt_pepper_0.08", None, &mut rows)?;
    }
    Ok(rows)
}

/// 18 and 10 uniformly spread angles, 5% Gaussian noise.
pub fn example4(scale: Scale, seed: u64) -> Result<Vec<ReproRow>> {
    let mut rows = Vec::new();
    for (k, n) in [18usize, 10].into_iter().enumerate() {
        let angles = AngleSet::uniform_2d(n)?;
        let case = setup_case(PhantomName::Shapes2d, scale.resolution, &angles)?;
        let noisy = add_noise(&case.exact, &NoiseSpec::gaussian(0.05, seed.wrapping_add(k as u64)))?;
        compare(4, &format!("{n}_angles"), &case, &case.config, &noisy, "gaussian_0.05", None, &mut rows)?;
    }
    Ok(rows)
}

/// Limited angular range `[-phi, phi]` with a linear taper of width pi/18,
/// 10% Gaussian noise.
pub fn example5(scale: Scale, seed: u64) -> Result<Vec<ReproRow>> {
    let angles = AngleSet::uniform_2d(scale.n_angles)?;
    let case = setup_case(PhantomName::Shapes2d, scale.resolution, &angles)?;
    let lambda = PI / 18.0;
    let mut rows = Vec::new();
    for (k, (label, phi)) in [("phi_pi_3", PI / 3.0), ("phi_2pi_9", 2.0 * PI / 9.0)]
        .into_iter()
        .enumerate()
    {
        let noisy = add_noise(&case.exact, &NoiseSpec::gaussian(0.1, seed.wrapping_add(k as u64)))?;
        let data = extend_limited_angle(&noisy, phi, lambda)?;
        let cfg = case.config.with_limited_angle(phi, lambda);
        let w = limited_angle_weights(&angles, phi, lambda)?;
        compare(5, label, &case, &cfg, &data, "gaussian_0.1", Some(&w), &mut rows)?;
    }
    Ok(rows)
}

/// Box and two balls in space, 1% Gaussian noise, `alpha = 4`, `gamma = 0.9`.
pub fn example6(scale: Scale, seed: u64) -> Result<Vec<ReproRow>> {
    let (rows, _) = example6_with_images(scale, seed)?;
    Ok(rows)
}

/// As [`example6`], also returning the truth and the DSM image.
pub fn example6_with_images(scale: Scale, seed: u64) -> Result<(Vec<ReproRow>, [ImageGrid; 3])> {
    let angles = AngleSet::fibonacci_hemisphere(scale.n_directions_3d)?;
    let case = setup_case(PhantomName::BoxBalls3d, scale.resolution_3d, &angles)?;
    let noisy = add_noise(&case.exact, &NoiseSpec::gaussian(0.01, seed))?;
    let cfg = case.config.with_alpha(4.0).with_gamma(0.9);
    let (dsm, t_dsm) = timed(|| DsmReconstructor::new(cfg, &angles, &case.truth.geometry)?.reconstruct(&noisy))?;
    let (fbp, t_fbp) = timed(|| fbp_reconstruct_3d(&noisy, &FbpFilterSpec::hamming(), &case.truth.geometry))?;
    let rows = vec![
        row(6, "box_balls_3d", "dsm", Some(&cfg), "gaussian_0.01", score(&dsm, &case.truth, t_dsm)?),
        row(6, "box_balls_3d", "fbp", None, "gaussian_0.01", score(&fbp, &case.truth, t_fbp)?),
    ];
    Ok((rows, [case.truth, dsm, fbp]))
}

/// Run experiment `k` in `1..=6`.
pub fn run_example(k: u8, scale: Scale, seed: u64) -> Result<Vec<ReproRow>> {
    match k {
        1 => example1(scale, seed),
        2 => example2(scale, seed),
        3 => example3(scale, seed),
        4 => example4(scale, seed),
        5 => example5(scale, seed),
        6 => example6(scale, seed),
        _ => Err(crate::Error::Validation(format!(
            "example must be in 1..=6, got {k}"
        ))),
    }
}

/// Number of 6-connected components of `{|v| >= threshold}` on a 3D grid.
pub fn count_components(img: &ImageGrid, threshold: f64) -> usize {
    label_components(img, threshold).1
}

/// 6-connected labels of `{|v| >= threshold}`: 0 off the set, `1..=count`
/// on it, numbered in scan order.
pub fn label_components(img: &ImageGrid, threshold: f64) -> (Vec<usize>, usize) {
    let shape = &img.geometry.shape;
    let (nx, ny, nz) = (shape[0], shape[1], shape.get(2).copied().unwrap_or(1));
    let on: Vec<bool> = img.values.iter().map(|v| v.abs() >= threshold).collect();
    let mut label = vec![0usize; on.len()];
    let idx = |x: usize, y: usize, z: usize| (x * ny + y) * nz + z;
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..on.len() {
        if !on[start] || label[start] != 0 {
            continue;
        }
        count += 1;
        label[start] = count;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y, z) = (i / (ny * nz), (i / nz) % ny, i % nz);
            let mut visit = |x: usize, y: usize, z: usize| {
                let j = idx(x, y, z);
                if on[j] && label[j] == 0 {
                    label[j] = count;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(x - 1, y, z);
            }
            if x + 1 < nx {
                visit(x + 1, y, z);
            }
            if y > 0 {
                visit(x, y - 1, z);
            }
            if y + 1 < ny {
                visit(x, y + 1, z);
            }
            if z > 0 {
                visit(x, y, z - 1);
            }
            if z + 1 < nz {
                visit(x, y, z + 1);
            }
        }
    }
    (label, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridGeometry;

    #[test]
    fn analytic_rows_carry_the_phantom_mass() {
        let angles = AngleSet::uniform_2d(8).unwrap();
        let case = setup_case(PhantomName::Shapes2d, 64, &angles).unwrap();
        let mass = PhantomSpec::new(PhantomName::Shapes2d, 64).phantom().integral();
        for row in case.exact.rows() {
            let m: f64 = row.iter().sum::<f64>() * case.exact.axis.dt;
            assert!((m - mass).abs() < 5e-3 * mass, "{m} {mass}");
        }
    }

    #[test]
    fn limited_angle_extension_copies_edges() {
        let angles = AngleSet::uniform_2d(36).unwrap();
        let axis = TAxis::centered(0.5, 0.1).unwrap();
        let values = (0..36 * axis.nt).map(|i| (i / axis.nt) as f64).collect();
        let sino = Sinogram::new(angles, axis, values).unwrap();
        let ext = extend_limited_angle(&sino, PI / 3.0 + 1e-9, PI / 18.0).unwrap();
        // angles are -90 + 5k degrees; the edge at +60 is row 30, at -60 row 6
        assert_eq!(ext.row(31)[0], 30.0);
        assert_eq!(ext.row(32)[0], 30.0);
        assert_eq!(ext.row(5)[0], 6.0);
        assert_eq!(ext.row(4)[0], 6.0);
        assert_eq!(ext.row(33)[0], 0.0);
        assert_eq!(ext.row(18)[0], 18.0);
    }

    #[test]
    fn components_are_counted() {
        let g = GridGeometry::centered_cube(3, 10, 0.5).unwrap();
        let img = ImageGrid::from_fn(g, |p| {
            if p[0] < -0.2 || (p[0] > 0.2 && p[1] > 0.0) || (p[0] > 0.2 && p[1] < -0.2) {
                1.0
            } else {
                0.0
            }
        });
        assert_eq!(count_components(&img, 0.5), 3);
    }

    #[test]
    fn unknown_example_is_rejected() {
        assert!(run_example(7, Scale::desk(), 0).is_err());
    }
}
