//! Test images and their exact Radon data.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{ensure, Error, Result};
use crate::grid::{GridGeometry, ImageGrid};

/// Primitive supports with closed-form line and plane integrals.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    /// Semi-axes `axes`, rotated counter-clockwise by `angle` radians.
    Ellipse {
        center: [f64; 2],
        axes: [f64; 2],
        angle: f64,
    },
    /// Convex polygon, vertices in either orientation.
    Polygon { vertices: Vec<[f64; 2]> },
    Ball {
        center: [f64; 3],
        radius: f64,
    },
    Cuboid {
        lo: [f64; 3],
        hi: [f64; 3],
    },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Ball { .. } | Shape::Cuboid { .. } => 3,
            _ => 2,
        }
    }

    pub fn rectangle(lo: [f64; 2], hi: [f64; 2]) -> Shape {
        Shape::Polygon {
            vertices: vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]],
        }
    }

    pub fn square(half_width: f64) -> Shape {
        Shape::rectangle([-half_width; 2], [half_width; 2])
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        match self {
            Shape::Disk { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                dx * dx + dy * dy <= radius * radius
            }
            Shape::Ellipse {
                center,
                axes,
                angle,
            } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                let (s, c) = angle.sin_cos();
                let u = dx * c + dy * s;
                let v = -dx * s + dy * c;
                (u / axes[0]).powi(2) + (v / axes[1]).powi(2) <= 1.0
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut pos = false;
                let mut neg = false;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                    pos |= cross > 0.0;
                    neg |= cross < 0.0;
                }
                !(pos && neg)
            }
            Shape::Ball { center, radius } => {
                let d2: f64 = (0..3).map(|a| (p[a] - center[a]).powi(2)).sum();
                d2 <= radius * radius
            }
            Shape::Cuboid { lo, hi } => (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a]),
        }
    }

    /// Length of the intersection of the line `x . (cos theta, sin theta) = t`
    /// with a planar shape.
    pub fn chord(&self, theta: f64, t: f64) -> Result<f64> {
        let (s, c) = theta.sin_cos();
        match self {
            Shape::Disk { center, radius } => {
                let d = t - (center[0] * c + center[1] * s);
                Ok(2.0 * (radius * radius - d * d).max(0.0).sqrt())
            }
            Shape::Ellipse {
                center,
                axes,
                angle,
            } => {
                let d = t - (center[0] * c + center[1] * s);
                let (sa, ca) = (theta - angle).sin_cos();
                let s2 = (axes[0] * ca).powi(2) + (axes[1] * sa).powi(2);
                Ok(2.0 * axes[0] * axes[1] * (s2 - d * d).max(0.0).sqrt() / s2)
            }
            Shape::Polygon { vertices } => Ok(polygon_chord(vertices, [c, s], t)),
            _ => Err(Error::Unsupported(
                "line integrals are defined for planar shapes only".into(),
            )),
        }
    }

    /// Area of the intersection of the plane `x . dir = t` with a solid shape.
    pub fn section_area(&self, dir: [f64; 3], t: f64) -> Result<f64> {
        match self {
            Shape::Ball { center, radius } => {
                let d = t - (0..3).map(|a| center[a] * dir[a]).sum::<f64>();
                Ok(PI * (radius * radius - d * d).max(0.0))
            }
            Shape::Cuboid { lo, hi } => Ok(box_section_area(*lo, *hi, dir, t)),
            _ => Err(Error::Unsupported(
                "plane integrals are defined for solid shapes only".into(),
            )),
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            Shape::Disk { radius, .. } => PI * radius * radius,
            Shape::Ellipse { axes, .. } => PI * axes[0] * axes[1],
            Shape::Polygon { vertices } => polygon_area(vertices),
            Shape::Ball { radius, .. } => 4.0 / 3.0 * PI * radius.powi(3),
            Shape::Cuboid { lo, hi } => (0..3).map(|a| hi[a] - lo[a]).product(),
        }
    }
}

fn polygon_area(vertices: &[[f64; 2]]) -> f64 {
    let n = vertices.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    0.5 * twice.abs()
}

/// Clip the line `p = t*theta + s*perp` against a convex polygon.
fn polygon_chord(vertices: &[[f64; 2]], theta: [f64; 2], t: f64) -> f64 {
    let n = vertices.len();
    let perp = [-theta[1], theta[0]];
    let base = [t * theta[0], t * theta[1]];
    // orientation sign so that interior satisfies cross >= 0
    let orient = if signed_area(vertices) >= 0.0 { 1.0 } else { -1.0 };
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let e = [b[0] - a[0], b[1] - a[1]];
        // inside: orient * cross(e, p - a) >= 0, linear in s: c0 + c1*s >= 0
        let c0 = orient * (e[0] * (base[1] - a[1]) - e[1] * (base[0] - a[0]));
        let c1 = orient * (e[0] * perp[1] - e[1] * perp[0]);
        if c1.abs() < 1e-300 {
            if c0 < 0.0 {
                return 0.0;
            }
        } else if c1 > 0.0 {
            lo = lo.max(-c0 / c1);
        } else {
            hi = hi.min(-c0 / c1);
        }
    }
    // edge lengths scale c0/c1 equally, so s is in length units
    (hi - lo).max(0.0)
}

fn signed_area(vertices: &[[f64; 2]]) -> f64 {
    let n = vertices.len();
    0.5 * (0..n)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

/// Orthonormal basis of the plane orthogonal to the unit vector `dir`.
pub(crate) fn plane_basis(dir: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if dir[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let mut u = cross(dir, helper);
    let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u.iter_mut().for_each(|x| *x /= nu);
    let v = cross(dir, u);
    (u, v)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Area of the plane `x . dir = t` inside the box `[lo, hi]`, by clipping a
/// covering square in plane coordinates against the six faces.
pub(crate) fn box_section_area(lo: [f64; 3], hi: [f64; 3], dir: [f64; 3], t: f64) -> f64 {
    let (u, v) = plane_basis(dir);
    let extent: f64 = (0..3)
        .map(|a| lo[a].abs().max(hi[a].abs()).powi(2))
        .sum::<f64>()
        .sqrt()
        * 2.0
        + 1.0;
    let mut poly = vec![
        [-extent, -extent],
        [extent, -extent],
        [extent, extent],
        [-extent, extent],
    ];
    for a in 0..3 {
        // x_a = t*dir_a + s*u_a + r*v_a
        for (bound, sign) in [(hi[a], 1.0), (lo[a], -1.0)] {
            // keep sign*(x_a - bound) <= 0
            let c0 = sign * (t * dir[a] - bound);
            let cs = sign * u[a];
            let cr = sign * v[a];
            poly = clip_half_plane(&poly, |p| c0 + cs * p[0] + cr * p[1]);
            if poly.len() < 3 {
                return 0.0;
            }
        }
    }
    polygon_area(&poly)
}

/// Sutherland-Hodgman step keeping `g(p) <= 0`, `g` affine.
fn clip_half_plane(poly: &[[f64; 2]], g: impl Fn([f64; 2]) -> f64) -> Vec<[f64; 2]> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let gp = g(p);
        let gq = g(q);
        if gp <= 0.0 {
            out.push(p);
        }
        if (gp < 0.0 && gq > 0.0) || (gp > 0.0 && gq < 0.0) {
            let w = gp / (gp - gq);
            out.push([p[0] + w * (q[0] - p[0]), p[1] + w * (q[1] - p[1])]);
        }
    }
    out
}

/// Additive superposition of constant-valued shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub dim: usize,
    pub objects: Vec<(Shape, f64)>,
}

impl Phantom {
    pub fn value_at(&self, p: [f64; 3]) -> f64 {
        self.objects
            .iter()
            .filter(|(s, _)| s.contains(p))
            .map(|(_, v)| v)
            .sum()
    }

    /// Cell-value sampling at the grid points (no anti-aliasing).
    pub fn rasterize(&self, geometry: &GridGeometry) -> ImageGrid {
        use rayon::prelude::*;
        let values = (0..geometry.len())
            .into_par_iter()
            .map(|i| self.value_at(geometry.point(i)))
            .collect();
        ImageGrid {
            geometry: geometry.clone(),
            values,
        }
    }

    /// Exact Radon transform in the plane.
    pub fn line_integral(&self, theta: f64, t: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (s, v) in &self.objects {
            acc += v * s.chord(theta, t)?;
        }
        Ok(acc)
    }

    /// Exact Radon transform in space.
    pub fn plane_integral(&self, dir: [f64; 3], t: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (s, v) in &self.objects {
            acc += v * s.section_area(dir, t)?;
        }
        Ok(acc)
    }

    pub fn integral(&self) -> f64 {
        self.objects.iter().map(|(s, v)| v * s.measure()).sum()
    }
}

/// Named test images.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomName {
    Shapes2d,
    SheppLogan,
    Disk,
    BoxBalls3d,
    /// Indicator of the whole square domain.
    Constant2d,
    /// Indicator of the whole cubic domain.
    Constant3d,
    /// Centred ball of radius 0.3.
    Ball3d,
}

impl PhantomName {
    pub const ALL: [PhantomName; 7] = [
        PhantomName::Shapes2d,
        PhantomName::SheppLogan,
        PhantomName::Disk,
        PhantomName::BoxBalls3d,
        PhantomName::Constant2d,
        PhantomName::Constant3d,
        PhantomName::Ball3d,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PhantomName::Shapes2d => "shapes2d",
            PhantomName::SheppLogan => "shepp_logan",
            PhantomName::Disk => "disk",
            PhantomName::BoxBalls3d => "box_balls_3d",
            PhantomName::Constant2d => "constant2d",
            PhantomName::Constant3d => "constant3d",
            PhantomName::Ball3d => "ball3d",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PhantomName::BoxBalls3d | PhantomName::Constant3d | PhantomName::Ball3d => 3,
            _ => 2,
        }
    }
}

impl FromStr for PhantomName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PhantomName::ALL
            .iter()
            .find(|n| n.as_str() == s)
            .copied()
            .ok_or_else(|| Error::Validation(format!("unknown phantom name '{s}'")))
    }
}

impl std::fmt::Display for PhantomName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Phantom name, samples per axis and domain half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhantomSpec {
    pub name: PhantomName,
    pub resolution: usize,
    pub half_width: f64,
}

impl PhantomSpec {
    pub fn new(name: PhantomName, resolution: usize) -> Self {
        PhantomSpec {
            name,
            resolution,
            half_width: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.resolution >= 8,
            Validation,
            "phantom resolution must be at least 8, got {}",
            self.resolution
        );
        ensure!(
            self.half_width > 0.0 && self.half_width.is_finite(),
            Validation,
            "domain half-width must be positive"
        );
        Ok(())
    }

    pub fn geometry(&self) -> Result<GridGeometry> {
        GridGeometry::centered_cube(self.name.dim(), self.resolution, self.half_width)
    }

    /// Shape list, laid out for half-width 0.5 and scaled to `half_width`.
    pub fn phantom(&self) -> Phantom {
        let k = self.half_width / 0.5;
        let p2 = |x: f64, y: f64| [k * x, k * y];
        let p3 = |x: f64, y: f64, z: f64| [k * x, k * y, k * z];
        let objects = match self.name {
            PhantomName::Shapes2d => vec![
                (
                    Shape::Disk {
                        center: p2(-0.25, 0.25),
                        radius: k * 0.12,
                    },
                    1.0,
                ),
                (
                    Shape::Ellipse {
                        center: p2(0.25, 0.25),
                        axes: [k * 0.18, k * 0.08],
                        angle: 30f64.to_radians(),
                    },
                    0.8,
                ),
                (
                    Shape::Polygon {
                        vertices: vec![p2(-0.38, -0.1), p2(-0.1, -0.1), p2(-0.24, -0.38)],
                    },
                    0.9,
                ),
                (Shape::rectangle(p2(0.1, -0.35), p2(0.4, -0.15)), 0.7),
            ],
            PhantomName::SheppLogan => shepp_logan(self.half_width),
            PhantomName::Disk => vec![(
                Shape::Disk {
                    center: [0.0, 0.0],
                    radius: k * 0.3,
                },
                1.0,
            )],
            PhantomName::BoxBalls3d => {
                let a = self.half_width;
                vec![
                    (
                        Shape::Cuboid {
                            lo: [-a; 3],
                            hi: [a; 3],
                        },
                        0.3,
                    ),
                    (
                        Shape::Cuboid {
                            lo: p3(-0.3, -0.3, -0.3),
                            hi: p3(-0.05, -0.05, -0.05),
                        },
                        0.2,
                    ),
                    (
                        Shape::Ball {
                            center: p3(0.2, 0.2, 0.0),
                            radius: k * 0.12,
                        },
                        0.2,
                    ),
                    (
                        Shape::Ball {
                            center: p3(0.2, -0.05, 0.0),
                            radius: k * 0.12,
                        },
                        0.2,
                    ),
                ]
            }
            PhantomName::Constant2d => vec![(Shape::square(self.half_width), 1.0)],
            PhantomName::Constant3d => vec![(
                Shape::Cuboid {
                    lo: [-self.half_width; 3],
                    hi: [self.half_width; 3],
                },
                1.0,
            )],
            PhantomName::Ball3d => vec![(
                Shape::Ball {
                    center: [0.0; 3],
                    radius: k * 0.3,
                },
                1.0,
            )],
        };
        Phantom {
            dim: self.name.dim(),
            objects,
        }
    }
}

/// Modified Shepp-Logan head (ten ellipses, additive intensities) on
/// `[-a, a]^2`.
fn shepp_logan(a: f64) -> Vec<(Shape, f64)> {
    // value, semi-axis x, semi-axis y, centre x, centre y, angle (degrees)
    const TABLE: [[f64; 6]; 10] = [
        [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
        [-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0],
        [-0.2, 0.11, 0.31, 0.22, 0.0, -18.0],
        [-0.2, 0.16, 0.41, -0.22, 0.0, 18.0],
        [0.1, 0.21, 0.25, 0.0, 0.35, 0.0],
        [0.1, 0.046, 0.046, 0.0, 0.1, 0.0],
        [0.1, 0.046, 0.046, 0.0, -0.1, 0.0],
        [0.1, 0.046, 0.023, -0.08, -0.605, 0.0],
        [0.1, 0.023, 0.023, 0.0, -0.606, 0.0],
        [0.1, 0.023, 0.046, 0.06, -0.605, 0.0],
    ];
    TABLE
        .iter()
        .map(|r| {
            (
                Shape::Ellipse {
                    center: [a * r[3], a * r[4]],
                    axes: [a * r[1], a * r[2]],
                    angle: r[5].to_radians(),
                },
                r[0],
            )
        })
        .collect()
}

/// Rasterized phantom on the cell-centred grid over `[-a, a]^dim`.
pub fn make_phantom(spec: &PhantomSpec) -> Result<ImageGrid> {
    spec.validate()?;
    Ok(spec.phantom().rasterize(&spec.geometry()?))
}

/// Exact line integral of a unit-valued planar shape.
pub fn analytic_radon(shape: &Shape, theta: f64, t: f64) -> Result<f64> {
    match shape {
        Shape::Disk { radius, .. } => {
            ensure!(*radius > 0.0, Validation, "disk radius must be positive")
        }
        Shape::Ellipse { axes, .. } => {
            ensure!(
                axes[0] > 0.0 && axes[1] > 0.0,
                Validation,
                "ellipse semi-axes must be positive"
            )
        }
        Shape::Polygon { vertices } => {
            ensure!(vertices.len() >= 3, Validation, "polygon needs 3 vertices")
        }
        _ => {}
    }
    shape.chord(theta, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_pieces;

    #[test]
    fn box_balls_value_range() {
        let img = make_phantom(&PhantomSpec::new(PhantomName::BoxBalls3d, 32)).unwrap();
        let min = img.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = img.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((min - 0.3).abs() < 1e-15);
        assert!((max - 0.5).abs() < 1e-15);
    }

    #[test]
    fn disk_membership() {
        let ph = PhantomSpec::new(PhantomName::Disk, 64).phantom();
        assert_eq!(ph.value_at([0.0; 3]), 1.0);
        assert_eq!(ph.value_at([0.45, 0.45, 0.0]), 0.0);
    }

    #[test]
    fn shapes2d_area_fraction() {
        let spec = PhantomSpec::new(PhantomName::Shapes2d, 512);
        let img = make_phantom(&spec).unwrap();
        let frac = img.values.iter().filter(|&&v| v != 0.0).count() as f64 / img.values.len() as f64;
        let area: f64 = spec.phantom().objects.iter().map(|(s, _)| s.measure()).sum();
        assert!((frac / area - 1.0).abs() < 0.02, "{frac} vs {area}");
    }

    #[test]
    fn shapes2d_values_in_unit_interval() {
        let img = make_phantom(&PhantomSpec::new(PhantomName::Shapes2d, 64)).unwrap();
        assert!(img.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn resolution_below_eight_is_rejected() {
        assert!(make_phantom(&PhantomSpec::new(PhantomName::Disk, 4)).is_err());
        assert!("nope".parse::<PhantomName>().is_err());
    }

    #[test]
    fn square_chords() {
        let sq = Shape::square(0.5);
        assert!((analytic_radon(&sq, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let d = analytic_radon(&sq, PI / 4.0, 0.0).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(analytic_radon(&sq, 0.3, 0.75).unwrap(), 0.0);
    }

    #[test]
    fn disk_chord_formula() {
        let disk = Shape::Disk {
            center: [0.0, 0.0],
            radius: 0.3,
        };
        for t in [-0.31, -0.2, 0.0, 0.1, 0.29] {
            let want = 2.0 * (0.09f64 - t * t).max(0.0).sqrt();
            assert!((analytic_radon(&disk, 1.1, t).unwrap() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn chord_integrates_to_area() {
        let shapes = PhantomSpec::new(PhantomName::Shapes2d, 8).phantom();
        for (shape, _) in &shapes.objects {
            for theta in [0.0, 0.4, -1.2] {
                let breaks: Vec<f64> = (0..=40).map(|i| -0.8 + 1.6 * i as f64 / 40.0).collect();
                let q = adaptive_pieces(|t| shape.chord(theta, t).unwrap(), &breaks, 1e-12);
                assert!((q / shape.measure() - 1.0).abs() < 1e-6, "{shape:?} {q}");
            }
        }
    }

    #[test]
    fn ball_and_box_sections() {
        let ball = Shape::Ball {
            center: [0.1, 0.0, 0.0],
            radius: 0.2,
        };
        let a = ball.section_area([1.0, 0.0, 0.0], 0.1).unwrap();
        assert!((a - PI * 0.04).abs() < 1e-15);
        let cube = Shape::Cuboid {
            lo: [-0.5; 3],
            hi: [0.5; 3],
        };
        assert!((cube.section_area([0.0, 0.0, 1.0], 0.2).unwrap() - 1.0).abs() < 1e-12);
        let s = 1.0 / 3f64.sqrt();
        // hexagonal mid-section of the unit cube
        let hex = cube.section_area([s, s, s], 0.0).unwrap();
        assert!((hex - 3.0 * 3f64.sqrt() / 4.0).abs() < 1e-12, "{hex}");
    }
}
