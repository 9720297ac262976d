//! Residuals of the second-order vortex equations away from the zeros.
//!
//! Scalar: `r = Δ log ρ + 2κρ - 2κ₀`. On the torus `log ρ` minus the
//! periodic Green's functions of the zeros is smooth and differentiated
//! spectrally; on the sphere fourth-order finite differences are used.
//!
//! Matrix: the curvature `F` of `H = h_Σ⁻¹ ψ*h_X` is computed by finite
//! differences of `K = log H̃`, where `H̃` is `H` congruence-normalised to the
//! identity at the centre point, via `F = ¼Δ₀K + (i/4)[∂ₓK, ∂ᵧK]`. Then
//! `B = -2F/λ²` and the residual is `-2(B + κ₀𝟙 - κΦ)`, scaled so that it
//! coincides with `r` when `n = 1`.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{par_map, VortexField};
use crate::elliptic::lattice_invariants;
use crate::error::{Error, Result};
use crate::holomap::Jet;
use crate::spectral::PeriodicGrid;
use crate::surface::{Chart, SampleGrid, SurfaceKind, SurfacePoint};
use crate::C64;

/// Finite-difference step in chart coordinates.
const FD_STEP: f64 = 1e-3;
pub const SPHERE_TOL: f64 = 1e-5;
pub const TORUS_TOL: f64 = 1e-6;
pub const MATRIX_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub sup_residual: f64,
    /// Area-weighted mean of `|r|`.
    pub mean_residual: f64,
    pub excluded_area: f64,
    pub resolution: usize,
    pub points: usize,
    /// Default tolerance for this kind of check.
    pub tolerance: f64,
}

impl ResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.sup_residual < tol
    }

    pub fn passed(&self) -> bool {
        self.passes(self.tolerance)
    }

    fn from_values(field: &VortexField, grid: &SampleGrid, values: &[f64], tolerance: f64) -> Self {
        let total = grid.total_weight();
        let mean = if total > 0.0 { grid.integrate_samples(values) / total } else { 0.0 };
        ResidualReport {
            sup_residual: values.iter().fold(0.0, |m, v| m.max(*v)),
            mean_residual: mean,
            excluded_area: (field.geom().volume() - total).max(0.0),
            resolution: grid.resolution,
            points: grid.len(),
            tolerance,
        }
    }
}

fn key(p: &SurfacePoint) -> (u8, u64, u64) {
    let chart = match p.chart {
        Chart::North => 0,
        Chart::South => 1,
        Chart::Cell => 2,
    };
    (chart, p.z.re.to_bits(), p.z.im.to_bits())
}

/// Index of every grid point in the field's sample arrays.
fn locate(field: &VortexField, grid: &SampleGrid) -> Result<Vec<usize>> {
    if grid.resolution != field.resolution() {
        return Err(Error::ResolutionMismatch(format!("grid {} vs field {}", grid.resolution, field.resolution())));
    }
    let index: HashMap<_, usize> = field.points().iter().enumerate().map(|(i, p)| (key(p), i)).collect();
    grid.points
        .iter()
        .map(|p| {
            index
                .get(&key(p))
                .copied()
                .ok_or_else(|| Error::ResolutionMismatch("grid point not sampled by the field".into()))
        })
        .collect()
}

/// `Δ log ρ + 2κρ - 2κ₀` on every sample of a torus field, spectrally.
fn torus_scalar_residual(field: &VortexField) -> Result<Vec<f64>> {
    let geom = field.geom();
    let lat = *geom.lattice().expect("torus carries a lattice");
    let data = lattice_invariants(&lat)?;
    let green = data.green_kernel()?;
    let grid = PeriodicGrid::new(lat, field.resolution())?;
    let multiplicity: f64 = field.zeros().iter().map(|z| z.multiplicity as f64).sum();
    let smooth: Vec<f64> = field
        .points()
        .iter()
        .zip(field.rho())
        .map(|(p, &rho)| {
            let singular = field
                .zeros()
                .iter()
                .map(|z| Ok(z.multiplicity as f64 * green.eval(p.z - z.location.z)?))
                .sum::<Result<f64>>()?;
            Ok(rho.ln() - singular)
        })
        .collect::<Result<_>>()?;
    let lap = grid.laplacian(&smooth);
    let c = geom.metric_density(Complex64::new(0.0, 0.0));
    let (kappa, kappa0) = (field.target().kappa(), geom.kappa0());
    let source = 4.0 * PI * multiplicity / lat.area();
    Ok(lap.iter().zip(field.rho()).map(|(l, rho)| (l - source) / c + 2.0 * kappa * rho - 2.0 * kappa0).collect())
}

/// Fourth-order cross stencil offsets: `(dx, dy, weight for Δ₀, weight for ∂ₓ, weight for ∂ᵧ)`.
fn stencil(h: f64) -> [(f64, f64, f64, f64, f64); 9] {
    let l = 1.0 / (12.0 * h * h);
    let d = 1.0 / (12.0 * h);
    [
        (0.0, 0.0, -60.0 * l, 0.0, 0.0),
        (h, 0.0, 16.0 * l, 8.0 * d, 0.0),
        (-h, 0.0, 16.0 * l, -8.0 * d, 0.0),
        (2.0 * h, 0.0, -l, -d, 0.0),
        (-2.0 * h, 0.0, -l, d, 0.0),
        (0.0, h, 16.0 * l, 0.0, 8.0 * d),
        (0.0, -h, 16.0 * l, 0.0, -8.0 * d),
        (0.0, 2.0 * h, -l, 0.0, -d),
        (0.0, -2.0 * h, -l, 0.0, d),
    ]
}

/// Matrix curvature data at one sphere sample.
pub(crate) struct MatrixTerms {
    /// Magnetic field from finite differences, orthonormal frame.
    pub b: DMatrix<C64>,
    pub phi: DMatrix<C64>,
    pub rho: f64,
}

fn hermitian_log(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = m.clone().symmetric_eigen();
    let logs = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| Complex64::new(x.ln(), 0.0)));
    &eig.eigenvectors * logs * eig.eigenvectors.adjoint()
}

fn op_norm(m: &DMatrix<C64>) -> f64 {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    herm.symmetric_eigenvalues().iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub(crate) fn matrix_terms(field: &VortexField, p: &SurfacePoint) -> Result<MatrixTerms> {
    let (map, target, geom) = (field.map(), field.target(), field.geom());
    let n = target.n();
    let centre = map.jet(p)?;
    let chart = centre.chart;
    let m = (0..n).max_by(|&a, &b| centre.dw[a].norm().total_cmp(&centre.dw[b].norm())).expect("n ≥ 1");
    // Gram matrix of φ-adapted frame: hᵀ|∂ψ_m|²/h_Σ, holomorphic rescaling leaves F unchanged
    let gram = |z: C64| -> Result<DMatrix<C64>> {
        let q = SurfacePoint { chart: p.chart, z };
        let (v, dv) = map.homogeneous(&q)?;
        let jet = Jet::in_chart(&v, &dv, chart);
        let scale = jet.dw[m].norm_sqr() * 2.0 / geom.metric_density(z);
        Ok(target.fs_metric(&jet.w).transpose() * Complex64::new(scale, 0.0))
    };
    let g0 = gram(p.z)?;
    let l = g0.clone().cholesky().ok_or_else(|| Error::DegenerateMap("Gram matrix not positive".into()))?.l();
    let l_inv = l.clone().try_inverse().expect("Cholesky factor is invertible");
    let mut lap = DMatrix::zeros(n, n);
    let mut kx = DMatrix::zeros(n, n);
    let mut ky = DMatrix::zeros(n, n);
    for (dx, dy, wl, wx, wy) in stencil(FD_STEP) {
        let g = gram(p.z + Complex64::new(dx, dy))?;
        let k = hermitian_log(&(&l_inv * g * l_inv.adjoint()));
        lap += &k * Complex64::new(wl, 0.0);
        kx += &k * Complex64::new(wx, 0.0);
        ky += &k * Complex64::new(wy, 0.0);
    }
    let i = Complex64::i();
    let f = lap * Complex64::new(0.25, 0.0) + (&kx * &ky - &ky * &kx) * (i * 0.25);
    let lambda2 = geom.metric_density(p.z);
    let b = f * Complex64::new(-2.0 / lambda2, 0.0);
    // Φ in the same frame: L†v = |∂ψ_m|ṽ/√h_Σ with ṽ the field's frame
    let v = nalgebra::DVector::from_column_slice(&centre.dw);
    let vt = l_inv.clone() * g0 * &v;
    let phi = &vt * vt.adjoint() / Complex64::new(centre.dw[m].norm_sqr(), 0.0);
    let rho = phi.trace().re;
    Ok(MatrixTerms { b, phi, rho })
}

fn sphere_matrix_residual(
    field: &VortexField,
    grid: &SampleGrid,
    residual: impl Fn(&MatrixTerms) -> DMatrix<C64> + Sync + Send,
) -> Result<Vec<f64>> {
    let idx = locate(field, grid)?;
    let pairs: Vec<(usize, SurfacePoint)> = idx.into_iter().zip(grid.points.iter().copied()).collect();
    par_map(&pairs, |(i, p)| {
        let mut t = matrix_terms(field, p)?;
        if field.target().n() == 1 {
            // anchor the algebraic terms to the stored sample
            let rho = field.rho()[*i];
            t.phi = DMatrix::from_element(1, 1, Complex64::new(rho, 0.0));
            t.rho = rho;
        }
        Ok(op_norm(&residual(&t)))
    })
    .into_iter()
    .collect()
}

fn sphere_scalar_residual(field: &VortexField, grid: &SampleGrid) -> Result<Vec<f64>> {
    let idx = locate(field, grid)?;
    let (map, target, geom) = (field.map(), field.target(), field.geom());
    let (kappa, kappa0) = (target.kappa(), geom.kappa0());
    let pairs: Vec<(usize, SurfacePoint)> = idx.into_iter().zip(grid.points.iter().copied()).collect();
    par_map(&pairs, |(i, p)| {
        let chart = map.jet(p)?.chart;
        let mut lap = 0.0;
        for (dx, dy, wl, _, _) in stencil(FD_STEP) {
            let q = SurfacePoint { chart: p.chart, z: p.z + Complex64::new(dx, dy) };
            let (v, dv) = map.homogeneous(&q)?;
            let jet = Jet::in_chart(&v, &dv, chart);
            lap += wl * super::abelian_density(target, geom, &q, &jet).ln();
        }
        let rho = field.rho()[*i];
        Ok((lap / geom.metric_density(p.z) + 2.0 * kappa * rho - 2.0 * kappa0).abs())
    })
    .into_iter()
    .collect()
}

/// Scalar Liouville residual of an abelian field on the points of `grid`.
pub fn abelian_residual(field: &VortexField, grid: &SampleGrid) -> Result<ResidualReport> {
    if field.target().n() != 1 {
        return Err(Error::Precondition("abelian residual needs a CP^1 target".into()));
    }
    match field.geom().kind() {
        SurfaceKind::Torus => {
            let idx = locate(field, grid)?;
            let all = torus_scalar_residual(field)?;
            let values: Vec<f64> = idx.iter().map(|&i| all[i].abs()).collect();
            Ok(ResidualReport::from_values(field, grid, &values, TORUS_TOL))
        }
        SurfaceKind::Sphere => {
            let values = sphere_scalar_residual(field, grid)?;
            Ok(ResidualReport::from_values(field, grid, &values, SPHERE_TOL))
        }
    }
}

fn matrix_report(
    field: &VortexField,
    grid: &SampleGrid,
    residual: impl Fn(&MatrixTerms) -> DMatrix<C64> + Sync + Send,
) -> Result<ResidualReport> {
    match field.geom().kind() {
        // torus maps target CP¹, where every matrix is the scalar residual
        SurfaceKind::Torus => abelian_residual(field, grid).map(|r| ResidualReport { tolerance: MATRIX_TOL, ..r }),
        SurfaceKind::Sphere => {
            let values = sphere_matrix_residual(field, grid, residual)?;
            Ok(ResidualReport::from_values(field, grid, &values, MATRIX_TOL))
        }
    }
}

/// Operator norm of `-2(B + κ₀𝟙 - κΦ)`, the matrix vortex equation with
/// `B` the curvature of the constructed Hermitian metric.
pub fn nonabelian_residual(field: &VortexField, grid: &SampleGrid) -> Result<ResidualReport> {
    let (kappa, kappa0) = (field.target().kappa(), field.geom().kappa0());
    let n = field.target().n();
    matrix_report(field, grid, |t| {
        (&t.b + DMatrix::identity(n, n) * Complex64::new(kappa0, 0.0) - &t.phi * Complex64::new(kappa, 0.0))
            * Complex64::new(-2.0, 0.0)
    })
}

/// Operator norm of `-2(B + κ₀𝟙 - ½κ(ρ𝟙 + Φ))`, the curvature identity that
/// constant holomorphic sectional curvature actually implies.
pub fn identity_residual(field: &VortexField, grid: &SampleGrid) -> Result<ResidualReport> {
    let (kappa, kappa0) = (field.target().kappa(), field.geom().kappa0());
    let n = field.target().n();
    matrix_report(field, grid, |t| {
        let expected =
            (DMatrix::identity(n, n) * Complex64::new(t.rho, 0.0) + &t.phi) * Complex64::new(0.5 * kappa, 0.0);
        (&t.b + DMatrix::identity(n, n) * Complex64::new(kappa0, 0.0) - expected) * Complex64::new(-2.0, 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::Lattice;
    use crate::holomap::{olesen_map, HolomorphicMap, RationalMap, TwistData};
    use crate::spaceform::SpaceFormTarget;
    use crate::surface::SurfaceGeometry;
    use crate::vortex::{build_abelian, build_nonabelian};

    fn sphere(map: &str, n: usize, target: SpaceFormTarget, res: usize) -> VortexField {
        let map: HolomorphicMap = if n == 1 {
            RationalMap::parse(map).unwrap().into()
        } else {
            let comps =
                map.split(',').map(|s| crate::holomap::Expr::parse(s).unwrap().to_rational().unwrap().0).collect();
            RationalMap::polynomial(comps).unwrap().into()
        };
        let geom = SurfaceGeometry::sphere(1.0).unwrap();
        build_nonabelian(&map, &TwistData::trivial(n), &geom, &target, res).unwrap()
    }

    #[test]
    fn liouville_coefficients_for_square_map() {
        let f = sphere("z^2", 1, SpaceFormTarget::new(1, 1.0).unwrap(), 48);
        let g = f.residual_grid().unwrap();
        let r = abelian_residual(&f, &g).unwrap();
        assert!(r.sup_residual < 1e-5, "{r:?}");
        assert!(r.mean_residual <= r.sup_residual);
        assert!(r.excluded_area > 0.0);
    }

    #[test]
    fn scaled_density_is_detected() {
        let f = sphere("z^2", 1, SpaceFormTarget::new(1, 1.0).unwrap(), 32);
        let bad = f.with_modified_density(1.1, None).unwrap();
        let g = f.residual_grid().unwrap();
        assert!(abelian_residual(&bad, &g).unwrap().sup_residual > 0.01);
    }

    #[test]
    fn matrix_residual_equals_scalar_for_n1() {
        let f = sphere("(z^3 - 2)/(z + 1)", 1, SpaceFormTarget::new(1, 1.0).unwrap(), 64);
        let g = f.residual_grid().unwrap();
        let scalar = sphere_scalar_residual(&f, &g).unwrap();
        let matrix = sphere_matrix_residual(&f, &g, |t| {
            (&t.b + DMatrix::identity(1, 1) * Complex64::new(1.0, 0.0) - &t.phi) * Complex64::new(-2.0, 0.0)
        })
        .unwrap();
        let worst = scalar.iter().zip(&matrix).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // the two stencils round differently; ε/h² sets the floor
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn finite_difference_curvature_matches_closed_form() {
        let f = sphere("z,z^2", 2, SpaceFormTarget::new(2, 1.0).unwrap(), 16);
        let bm = f.b_matrix().unwrap();
        let hm = f.higgs_matrix().unwrap();
        for (i, p) in f.points().iter().enumerate().step_by(11) {
            let t = matrix_terms(&f, p).unwrap();
            assert!(op_norm(&(&t.b - &bm[i])) < 1e-5, "{} vs {}", t.b, bm[i]);
            assert!(op_norm(&(&t.phi - &hm[i])) < 1e-10);
        }
    }

    #[test]
    fn cp2_fields_satisfy_identity_not_projection_equation() {
        for maps in ["z,0", "z,z^2"] {
            let f = sphere(maps, 2, SpaceFormTarget::new(2, 1.0).unwrap(), 24);
            let g = f.residual_grid().unwrap();
            assert!(identity_residual(&f, &g).unwrap().sup_residual < 1e-4);
            // the projection form fails by κρ
            let spec = nonabelian_residual(&f, &g).unwrap();
            assert!(spec.sup_residual > 0.1, "{maps}: {spec:?}");
        }
    }

    #[test]
    fn corrupted_normalisation_is_detected() {
        let s = SpaceFormTarget::new(2, 1.0).unwrap().scale();
        let f = sphere("z,z^2", 2, SpaceFormTarget::with_scale(2, 1.0, 2.0 * s), 16);
        let g = f.residual_grid().unwrap();
        assert!(identity_residual(&f, &g).unwrap().sup_residual > 0.1);
    }

    #[test]
    fn olesen_torus_residual() {
        let lat = Lattice::rectangle(1.0, 1.0).unwrap();
        let map: HolomorphicMap = olesen_map(&lat).unwrap().into();
        let f = build_abelian(
            &map,
            &TwistData::trivial(1),
            &SurfaceGeometry::torus(lat),
            &SpaceFormTarget::new(1, 1.0).unwrap(),
            64,
        )
        .unwrap();
        let g = f.residual_grid().unwrap();
        let r = abelian_residual(&f, &g).unwrap();
        assert!(r.sup_residual < 1e-4, "{r:?}");
    }

    #[test]
    fn resolution_mismatch() {
        let f = sphere("z^2", 1, SpaceFormTarget::new(1, 1.0).unwrap(), 16);
        let g = f.geom().build_grid(24, &[]).unwrap();
        assert!(matches!(abelian_residual(&f, &g), Err(Error::ResolutionMismatch(_))));
    }
}
