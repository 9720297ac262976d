//! Domain surfaces: the round sphere and flat tori, with quadrature grids.
//!
//! The sphere is covered by two stereographic charts, `z` (north) and
//! `ζ = 1/z` (south); both carry the same density formula. The quadrature
//! splits the sphere along the equator and integrates each closed hemisphere
//! in polar coordinates of its own chart, Gauss–Legendre in the polar angle and
//! uniform in the azimuth. Torus grids are the cell-centred periodic grids of
//! [`crate::spectral`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::Lattice;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceKind {
    Sphere,
    Torus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    North,
    South,
    /// Fundamental cell of a torus lattice.
    Cell,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub chart: Chart,
    pub z: C64,
}

impl SurfacePoint {
    pub fn north(z: C64) -> Self {
        SurfacePoint { chart: Chart::North, z }
    }

    pub fn south(z: C64) -> Self {
        SurfacePoint { chart: Chart::South, z }
    }

    pub fn cell(z: C64) -> Self {
        SurfacePoint { chart: Chart::Cell, z }
    }

    /// The sphere point at infinity of the north chart.
    pub fn south_pole() -> Self {
        SurfacePoint::south(Complex64::new(0.0, 0.0))
    }

    /// Unit vector in `R³` for a sphere point.
    pub fn unit_vector(&self) -> [f64; 3] {
        let w = self.z;
        let r2 = w.norm_sqr();
        let d = 1.0 + r2;
        match self.chart {
            Chart::North => [2.0 * w.re / d, 2.0 * w.im / d, (r2 - 1.0) / d],
            // z = 1/ζ: 2z/(1+|z|²) = 2ζ̄/(1+|ζ|²)
            Chart::South => [2.0 * w.re / d, -2.0 * w.im / d, (1.0 - r2) / d],
            Chart::Cell => [w.re, w.im, 0.0],
        }
    }

    /// The same sphere point expressed in the other stereographic chart.
    pub fn swap_chart(&self) -> SurfacePoint {
        match self.chart {
            Chart::North => SurfacePoint::south(1.0 / self.z),
            Chart::South => SurfacePoint::north(1.0 / self.z),
            Chart::Cell => *self,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGeometry {
    kind: SurfaceKind,
    genus: u32,
    kappa0: f64,
    volume: f64,
    /// Torus only: the period lattice.
    lattice: Option<Lattice>,
    /// Torus only: the constant conformal factor `λ²`.
    density: f64,
}

impl SurfaceGeometry {
    /// Round sphere of Gauss curvature `kappa0 > 0`.
    pub fn sphere(kappa0: f64) -> Result<Self> {
        if !(kappa0 > 0.0 && kappa0.is_finite()) {
            return Err(Error::InvalidGeometry(format!("sphere needs kappa0 > 0, got {kappa0}")));
        }
        Ok(SurfaceGeometry {
            kind: SurfaceKind::Sphere,
            genus: 0,
            kappa0,
            volume: 4.0 * PI / kappa0,
            lattice: None,
            density: 0.0,
        })
    }

    /// Flat torus `C/lattice` with the Euclidean metric.
    pub fn torus(lattice: Lattice) -> Self {
        SurfaceGeometry {
            kind: SurfaceKind::Torus,
            genus: 1,
            kappa0: 0.0,
            volume: lattice.area(),
            lattice: Some(lattice),
            density: 1.0,
        }
    }

    /// Flat torus with metric `density·|dz|²`.
    pub fn torus_with_density(lattice: Lattice, density: f64) -> Result<Self> {
        if !(density > 0.0 && density.is_finite()) {
            return Err(Error::InvalidGeometry(format!("torus density must be positive, got {density}")));
        }
        Ok(SurfaceGeometry { volume: lattice.area() * density, density, ..SurfaceGeometry::torus(lattice) })
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    /// Euler characteristic `2 - 2g`.
    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64
    }

    /// Conformal factor `λ²` at the chart coordinate `z`.
    pub fn metric_density(&self, z: C64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => {
                let d = 1.0 + z.norm_sqr();
                4.0 / (self.kappa0 * d * d)
            }
            SurfaceKind::Torus => self.density,
        }
    }

    /// `-Δ₀ log λ / λ²` in closed form.
    pub fn gauss_curvature(&self, z: C64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => {
                // log λ = ½log(4/κ₀) - log(1+|z|²), Δ₀ log(1+|z|²) = 4/(1+|z|²)²
                let d = 1.0 + z.norm_sqr();
                let lap_log_lambda = -4.0 / (d * d);
                -lap_log_lambda / self.metric_density(z)
            }
            SurfaceKind::Torus => 0.0,
        }
    }

    /// Geodesic distance between two points of the surface.
    pub fn distance(&self, a: &SurfacePoint, b: &SurfacePoint) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => {
                let (u, v) = (a.unit_vector(), b.unit_vector());
                let cross = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
                let sin = (cross[0].powi(2) + cross[1].powi(2) + cross[2].powi(2)).sqrt();
                let cos = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
                sin.atan2(cos) / self.kappa0.sqrt()
            }
            SurfaceKind::Torus => {
                let lat = self.lattice.as_ref().expect("torus carries a lattice");
                lat.reduce(a.z - b.z).norm() * self.density.sqrt()
            }
        }
    }

    /// Area of a geodesic disk of radius `r`.
    pub fn disk_area(&self, r: f64) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => {
                let big_r2 = 1.0 / self.kappa0;
                (2.0 * PI * big_r2 * (1.0 - (r * self.kappa0.sqrt()).cos())).min(self.volume)
            }
            SurfaceKind::Torus => PI * r * r,
        }
    }

    /// Typical spacing of a grid at resolution `res`.
    pub fn grid_spacing(&self, res: usize) -> f64 {
        match self.kind {
            SurfaceKind::Sphere => 2.0 * PI / (self.kappa0.sqrt() * res as f64),
            SurfaceKind::Torus => {
                let lat = self.lattice.as_ref().expect("torus carries a lattice");
                lat.omega1().norm().max(lat.omega2().norm()) * self.density.sqrt() / res as f64
            }
        }
    }

    /// Default exclusion radius around field zeros: five grid spacings.
    pub fn default_exclusion_radius(&self, res: usize) -> f64 {
        5.0 * self.grid_spacing(res)
    }

    /// Build a quadrature grid, dropping points inside the exclusion disks.
    pub fn build_grid(&self, resolution: usize, exclusions: &[Exclusion]) -> Result<SampleGrid> {
        if resolution < 8 {
            return Err(Error::ResolutionTooSmall(resolution));
        }
        let excluded: f64 = exclusions.iter().map(|e| self.disk_area(e.radius)).sum();
        let fraction = excluded / self.volume;
        if fraction > 0.5 {
            return Err(Error::ExclusionTooLarge(fraction));
        }
        let (points, weights) = match self.kind {
            SurfaceKind::Sphere => self.sphere_nodes(resolution),
            SurfaceKind::Torus => self.torus_nodes(resolution),
        };
        let keep = |p: &SurfacePoint| exclusions.iter().all(|e| self.distance(p, &e.center) >= e.radius);
        let (points, weights): (Vec<_>, Vec<_>) = points.into_iter().zip(weights).filter(|(p, _)| keep(p)).unzip();
        Ok(SampleGrid {
            resolution,
            full: exclusions.is_empty(),
            exclusion_radius: exclusions.iter().fold(0.0, |m, e| m.max(e.radius)),
            points,
            weights,
        })
    }

    fn sphere_nodes(&self, res: usize) -> (Vec<SurfacePoint>, Vec<f64>) {
        let n_theta = res.div_ceil(2);
        let (nodes, gl) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / res as f64;
        let mut points = Vec::with_capacity(2 * n_theta * res);
        let mut weights = Vec::with_capacity(2 * n_theta * res);
        for chart in [Chart::North, Chart::South] {
            for (&x, &w) in nodes.iter().zip(&gl) {
                // map [-1, 1] onto the polar angle range [0, π/2]
                let theta = PI / 4.0 * (x + 1.0);
                let r = (theta / 2.0).tan();
                let weight = w * PI / 4.0 * dphi * theta.sin() / self.kappa0;
                for k in 0..res {
                    let phi = (k as f64 + 0.5) * dphi;
                    points.push(SurfacePoint { chart, z: Complex64::from_polar(r, phi) });
                    weights.push(weight);
                }
            }
        }
        (points, weights)
    }

    fn torus_nodes(&self, res: usize) -> (Vec<SurfacePoint>, Vec<f64>) {
        let lat = self.lattice.as_ref().expect("torus carries a lattice");
        let n = res as f64;
        let weight = self.volume / (n * n);
        let points = (0..res)
            .flat_map(|i| (0..res).map(move |j| (i, j)))
            .map(|(i, j)| SurfacePoint::cell(lat.point((i as f64 + 0.5) / n, (j as f64 + 0.5) / n)))
            .collect();
        (points, vec![weight; res * res])
    }
}

/// A geodesic disk removed from a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub center: SurfacePoint,
    pub radius: f64,
}

impl Exclusion {
    pub fn new(center: SurfacePoint, radius: f64) -> Self {
        Exclusion { center, radius }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub resolution: usize,
    /// True when no points were dropped; torus grids are then spectral grids.
    pub full: bool,
    pub exclusion_radius: f64,
    pub points: Vec<SurfacePoint>,
    /// Quadrature weights including the metric volume factor.
    pub weights: Vec<f64>,
}

impl SampleGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(&SurfacePoint) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    /// Integrate already-sampled values.
    pub fn integrate_samples(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// Free-function form of [`SurfaceGeometry::metric_density`].
pub fn metric_density(geom: &SurfaceGeometry, z: C64) -> f64 {
    geom.metric_density(z)
}

/// Free-function form of [`SurfaceGeometry::gauss_curvature`].
pub fn gauss_curvature(geom: &SurfaceGeometry, z: C64) -> f64 {
    geom.gauss_curvature(z)
}

/// Free-function form of [`SurfaceGeometry::build_grid`].
pub fn build_grid(geom: &SurfaceGeometry, resolution: usize, exclusions: &[Exclusion]) -> Result<SampleGrid> {
    geom.build_grid(resolution, exclusions)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
