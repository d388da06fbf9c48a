//! Core data model: Cartesian image grids, angle sets and sinograms.
//!
//! Values are stored row-major with the last axis fastest. Axis `a` of a
//! grid is the `a`-th Cartesian coordinate (x, y, z), so sample `j` of axis
//! `a` sits at `origin[a] + j * spacing[a]`.

use crate::error::{ensure, Result};

/// Sampling geometry of an [`ImageGrid`] without its values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGeometry {
    pub shape: Vec<usize>,
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
}

impl GridGeometry {
    pub fn new(shape: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>) -> Result<Self> {
        let g = GridGeometry {
            shape,
            origin,
            spacing,
        };
        g.validate()?;
        Ok(g)
    }

    /// Cell-centred grid over `[-a, a]^dim` with `resolution` samples per axis.
    pub fn centered_cube(dim: usize, resolution: usize, half_width: f64) -> Result<Self> {
        ensure!(resolution > 0, Validation, "resolution must be positive");
        ensure!(
            half_width > 0.0 && half_width.is_finite(),
            Validation,
            "half width must be positive, got {half_width}"
        );
        let step = 2.0 * half_width / resolution as f64;
        GridGeometry::new(
            vec![resolution; dim],
            vec![-half_width + 0.5 * step; dim],
            vec![step; dim],
        )
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.shape.len();
        ensure!(
            dim == 2 || dim == 3,
            Validation,
            "grid dimension must be 2 or 3, got {dim}"
        );
        ensure!(
            self.origin.len() == dim && self.spacing.len() == dim,
            Validation,
            "shape, origin and spacing must have equal length"
        );
        ensure!(
            self.spacing.iter().all(|&s| s > 0.0 && s.is_finite()),
            Validation,
            "grid spacing must be positive and finite"
        );
        ensure!(
            self.origin.iter().all(|o| o.is_finite()),
            Validation,
            "grid origin must be finite"
        );
        ensure!(
            self.shape.iter().all(|&n| n > 0),
            Validation,
            "grid shape entries must be positive"
        );
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Physical coordinates of the sample with flat index `idx`; unused
    /// trailing components are zero.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let mut p = [0.0; 3];
        let mut rem = idx;
        for a in (0..self.dim()).rev() {
            let j = rem % self.shape[a];
            rem /= self.shape[a];
            p[a] = self.origin[a] + j as f64 * self.spacing[a];
        }
        p
    }

    /// Largest distance from the origin to any sample point.
    pub fn max_radius(&self) -> f64 {
        (0..self.dim())
            .map(|a| {
                let lo = self.origin[a];
                let hi = lo + (self.shape[a] - 1) as f64 * self.spacing[a];
                lo.abs().max(hi.abs()).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Radius of the smallest origin-centred ball containing the support of
    /// the multilinear interpolant (sample box grown by one cell).
    pub fn support_radius(&self) -> f64 {
        (0..self.dim())
            .map(|a| {
                let lo = self.origin[a] - self.spacing[a];
                let hi = self.origin[a] + self.shape[a] as f64 * self.spacing[a];
                lo.abs().max(hi.abs()).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Multilinear interpolation of `values` at `p`, zero outside the sample box.
    pub fn interpolate(&self, values: &[f64], p: &[f64; 3]) -> f64 {
        match self.dim() {
            2 => self.interp2(values, p[0], p[1]),
            _ => self.interp3(values, p),
        }
    }

    fn interp2(&self, values: &[f64], x: f64, y: f64) -> f64 {
        let (nx, ny) = (self.shape[0] as isize, self.shape[1] as isize);
        let fx = (x - self.origin[0]) / self.spacing[0];
        let fy = (y - self.origin[1]) / self.spacing[1];
        let (ix, iy) = (fx.floor(), fy.floor());
        let (wx, wy) = (fx - ix, fy - iy);
        let (ix, iy) = (ix as isize, iy as isize);
        if ix < -1 || iy < -1 || ix >= nx || iy >= ny {
            return 0.0;
        }
        let at = |i: isize, j: isize| -> f64 {
            if i < 0 || j < 0 || i >= nx || j >= ny {
                0.0
            } else {
                values[(i * ny + j) as usize]
            }
        };
        (1.0 - wx) * ((1.0 - wy) * at(ix, iy) + wy * at(ix, iy + 1))
            + wx * ((1.0 - wy) * at(ix + 1, iy) + wy * at(ix + 1, iy + 1))
    }

    fn interp3(&self, values: &[f64], p: &[f64; 3]) -> f64 {
        let n = [
            self.shape[0] as isize,
            self.shape[1] as isize,
            self.shape[2] as isize,
        ];
        let mut i0 = [0isize; 3];
        let mut w = [0.0; 3];
        for a in 0..3 {
            let f = (p[a] - self.origin[a]) / self.spacing[a];
            let fl = f.floor();
            i0[a] = fl as isize;
            w[a] = f - fl;
            if i0[a] < -1 || i0[a] >= n[a] {
                return 0.0;
            }
        }
        let mut acc = 0.0;
        for dx in 0..2 {
            let i = i0[0] + dx;
            if i < 0 || i >= n[0] {
                continue;
            }
            let wx = if dx == 0 { 1.0 - w[0] } else { w[0] };
            for dy in 0..2 {
                let j = i0[1] + dy;
                if j < 0 || j >= n[1] {
                    continue;
                }
                let wy = if dy == 0 { 1.0 - w[1] } else { w[1] };
                for dz in 0..2 {
                    let k = i0[2] + dz;
                    if k < 0 || k >= n[2] {
                        continue;
                    }
                    let wz = if dz == 0 { 1.0 - w[2] } else { w[2] };
                    acc += wx * wy * wz * values[((i * n[1] + j) * n[2] + k) as usize];
                }
            }
        }
        acc
    }
}

/// Uniform Cartesian scalar field in 2D or 3D.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    pub geometry: GridGeometry,
    pub values: Vec<f64>,
}

impl ImageGrid {
    pub fn new(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        geometry.validate()?;
        ensure!(
            geometry.len() == values.len(),
            Validation,
            "shape {:?} needs {} values, got {}",
            geometry.shape,
            geometry.len(),
            values.len()
        );
        Ok(ImageGrid { geometry, values })
    }

    pub fn zeros(geometry: GridGeometry) -> Self {
        let n = geometry.len();
        ImageGrid {
            geometry,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(geometry: GridGeometry, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..geometry.len()).map(|i| f(geometry.point(i))).collect();
        ImageGrid { geometry, values }
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        ensure!(
            self.geometry.len() == self.values.len(),
            Validation,
            "shape {:?} needs {} values, got {}",
            self.geometry.shape,
            self.geometry.len(),
            self.values.len()
        );
        Ok(())
    }

    pub fn interpolate(&self, p: &[f64; 3]) -> f64 {
        self.geometry.interpolate(&self.values, p)
    }
}

/// Projection directions: angles in the plane or unit vectors in space.
#[derive(Debug, Clone, PartialEq)]
pub enum Directions {
    Planar(Vec<f64>),
    Spatial(Vec<[f64; 3]>),
}

impl Directions {
    pub fn len(&self) -> usize {
        match self {
            Directions::Planar(a) => a.len(),
            Directions::Spatial(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            Directions::Planar(_) => 2,
            Directions::Spatial(_) => 3,
        }
    }

    /// Unit normal of projection `i` embedded in 3-space.
    pub fn unit(&self, i: usize) -> [f64; 3] {
        match self {
            Directions::Planar(a) => [a[i].cos(), a[i].sin(), 0.0],
            Directions::Spatial(d) => d[i],
        }
    }
}

/// Projection directions with per-direction angular quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSet {
    pub directions: Directions,
    pub weights: Vec<f64>,
}

impl AngleSet {
    pub fn new(directions: Directions, weights: Vec<f64>) -> Result<Self> {
        let set = AngleSet {
            directions,
            weights,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            !self.directions.is_empty(),
            Validation,
            "angle set is empty"
        );
        ensure!(
            self.weights.len() == self.directions.len(),
            Validation,
            "{} directions but {} weights",
            self.directions.len(),
            self.weights.len()
        );
        ensure!(
            self.weights.iter().all(|&w| w > 0.0 && w.is_finite()),
            Validation,
            "angular weights must be positive"
        );
        match &self.directions {
            Directions::Planar(a) => {
                ensure!(
                    a.iter().all(|t| t.is_finite()),
                    Validation,
                    "angles must be finite"
                );
            }
            Directions::Spatial(d) => {
                for v in d {
                    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                    ensure!(
                        (norm - 1.0).abs() <= 1e-12,
                        Validation,
                        "direction {v:?} is not a unit vector (norm {norm})"
                    );
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.directions.dim()
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Keeps only the directions for which `keep` returns true.
    pub fn subset(&self, keep: impl Fn(usize) -> bool) -> AngleSet {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        let directions = match &self.directions {
            Directions::Planar(a) => Directions::Planar(idx.iter().map(|&i| a[i]).collect()),
            Directions::Spatial(d) => Directions::Spatial(idx.iter().map(|&i| d[i]).collect()),
        };
        AngleSet {
            directions,
            weights: idx.iter().map(|&i| self.weights[i]).collect(),
        }
    }
}

/// Uniform sampling of the offset axis `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TAxis {
    pub t0: f64,
    pub dt: f64,
    pub nt: usize,
}

impl TAxis {
    pub fn new(t0: f64, dt: f64, nt: usize) -> Result<Self> {
        let axis = TAxis { t0, dt, nt };
        axis.validate()?;
        Ok(axis)
    }

    /// Axis with spacing `dt`, symmetric about zero, covering `[-radius, radius]`.
    pub fn centered(radius: f64, dt: f64) -> Result<Self> {
        ensure!(dt > 0.0 && dt.is_finite(), Validation, "dt must be positive");
        ensure!(radius >= 0.0, Validation, "radius must be non-negative");
        let half = (radius / dt - 1e-9).ceil().max(0.0) as usize;
        TAxis::new(-(half as f64) * dt, dt, 2 * half + 1)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.dt > 0.0 && self.dt.is_finite(),
            Validation,
            "t spacing must be positive, got {}",
            self.dt
        );
        ensure!(self.t0.is_finite(), Validation, "t0 must be finite");
        ensure!(self.nt >= 2, Validation, "t axis needs at least 2 samples");
        Ok(())
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn t_last(&self) -> f64 {
        self.t(self.nt - 1)
    }

    pub fn covers(&self, radius: f64) -> bool {
        let eps = 1e-9 * self.dt;
        self.t0 <= -radius + eps && self.t_last() >= radius - eps
    }

    /// Linear interpolation of one row at offset `t`; zero outside the axis.
    pub fn interpolate(&self, row: &[f64], t: f64) -> f64 {
        let f = (t - self.t0) / self.dt;
        if f < 0.0 {
            return if f > -1e-9 { row[0] } else { 0.0 };
        }
        let j = f.floor() as usize;
        if j + 1 >= self.nt {
            let last = (self.nt - 1) as f64;
            return if f - last < 1e-9 { row[self.nt - 1] } else { 0.0 };
        }
        let w = f - j as f64;
        (1.0 - w) * row[j] + w * row[j + 1]
    }
}

/// Radon data sampled on an [`AngleSet`] times a uniform [`TAxis`].
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    pub angles: AngleSet,
    pub axis: TAxis,
    /// `[n_angles x nt]`, row-major.
    pub values: Vec<f64>,
}

impl Sinogram {
    pub fn new(angles: AngleSet, axis: TAxis, values: Vec<f64>) -> Result<Self> {
        let s = Sinogram {
            angles,
            axis,
            values,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn zeros(angles: AngleSet, axis: TAxis) -> Self {
        let n = angles.len() * axis.nt;
        Sinogram {
            angles,
            axis,
            values: vec![0.0; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.angles.validate()?;
        self.axis.validate()?;
        ensure!(
            self.values.len() == self.angles.len() * self.axis.nt,
            Validation,
            "sinogram needs {} x {} values, got {}",
            self.angles.len(),
            self.axis.nt,
            self.values.len()
        );
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.angles.dim()
    }

    pub fn n_angles(&self) -> usize {
        self.angles.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.axis.nt..(i + 1) * self.axis.nt]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.axis.nt)
    }

    /// Same angles and axis, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Sinogram::new(self.angles.clone(), self.axis, values)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_is_row_major_last_axis_fastest() {
        let g = GridGeometry::new(vec![3, 2], vec![0.0, 10.0], vec![1.0, 0.5]).unwrap();
        assert_eq!(g.point(0), [0.0, 10.0, 0.0]);
        assert_eq!(g.point(1), [0.0, 10.5, 0.0]);
        assert_eq!(g.point(2), [1.0, 10.0, 0.0]);
        assert_eq!(g.point(5), [2.0, 10.5, 0.0]);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let g = GridGeometry::new(vec![3, 2], vec![0.0; 2], vec![1.0; 2]).unwrap();
        assert!(matches!(
            ImageGrid::new(g, vec![0.0; 5]),
            Err(crate::Error::Validation(_))
        ));
    }

    #[test]
    fn bilinear_hits_samples_and_vanishes_outside() {
        let g = GridGeometry::new(vec![2, 2], vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(g.interpolate(&v, &[1.0, 0.0, 0.0]), 3.0);
        assert!((g.interpolate(&v, &[0.5, 0.5, 0.0]) - 2.5).abs() < 1e-15);
        assert_eq!(g.interpolate(&v, &[-1.5, 0.0, 0.0]), 0.0);
        // half a cell beyond the edge the interpolant is half the edge value
        assert!((g.interpolate(&v, &[-0.5, 0.0, 0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn centered_axis_covers_radius() {
        let ax = TAxis::centered(0.7, 0.01).unwrap();
        assert!(ax.covers(0.7));
        assert_eq!(ax.nt % 2, 1);
        assert!((ax.t(ax.nt / 2)).abs() < 1e-15);
    }

    #[test]
    fn unit_vector_check() {
        let bad = AngleSet::new(Directions::Spatial(vec![[1.0, 1.0, 0.0]]), vec![1.0]);
        assert!(bad.is_err());
    }
}
