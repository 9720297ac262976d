//! Vortex fields built from holomorphic maps, with residual checks, flux
//! quadrature and a Newton corrector.
//!
//! For a map `ψ` into `CPⁿ` with Fubini–Study metric `h_X` the Higgs field is
//! `φ = ∂ψ`, a section of `K_Σ ⊗ ψ*T_X`. Its density is
//! `ρ = |∂ψ|²_{h_X} / h_Σ` with `h_Σ = λ²/2`, and the Chern curvature of
//! `h_Σ⁻¹ ⊗ ψ*h_X` gives the magnetic field `B = R(∂ψ, ∂̄ψ)/h_Σ - κ₀𝟙` in an
//! orthonormal frame. For `n = 1` this collapses to `B = κρ - κ₀`.

mod newton;
mod residual;
mod zeros;

pub use newton::{newton_polish, NewtonOptions, NewtonReport};
pub use residual::{
    abelian_residual, identity_residual, nonabelian_residual, ResidualReport, MATRIX_TOL, SPHERE_TOL, TORUS_TOL,
};
pub use zeros::find_zeros;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holomap::{HolomorphicMap, Jet, TwistData};
use crate::spaceform::SpaceFormTarget;
use crate::surface::{Exclusion, SampleGrid, SurfaceGeometry, SurfacePoint};
use crate::C64;

/// Distance to the nearest integer tolerated by [`vortex_number`].
pub const FLUX_TOL: f64 = 1e-3;

/// A zero of the Higgs field with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub location: SurfacePoint,
    pub multiplicity: u32,
}

/// Grid samples of a constructed vortex.
#[derive(Clone, Debug)]
pub struct VortexField {
    geom: SurfaceGeometry,
    target: SpaceFormTarget,
    map: HolomorphicMap,
    twist: TwistData,
    grid: SampleGrid,
    rho: Vec<f64>,
    /// Trace of the magnetic field.
    b: Vec<f64>,
    higgs_matrix: Option<Vec<DMatrix<C64>>>,
    b_matrix: Option<Vec<DMatrix<C64>>>,
    zeros: Vec<Zero>,
    flux: f64,
    k: i64,
}

impl VortexField {
    pub fn geom(&self) -> &SurfaceGeometry {
        &self.geom
    }

    pub fn target(&self) -> &SpaceFormTarget {
        &self.target
    }

    pub fn map(&self) -> &HolomorphicMap {
        &self.map
    }

    pub fn twist(&self) -> &TwistData {
        &self.twist
    }

    /// The full quadrature grid the samples live on.
    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn resolution(&self) -> usize {
        self.grid.resolution
    }

    pub fn points(&self) -> &[SurfacePoint] {
        &self.grid.points
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn higgs_matrix(&self) -> Option<&[DMatrix<C64>]> {
        self.higgs_matrix.as_deref()
    }

    pub fn b_matrix(&self) -> Option<&[DMatrix<C64>]> {
        self.b_matrix.as_deref()
    }

    pub fn zeros(&self) -> &[Zero] {
        &self.zeros
    }

    pub fn flux(&self) -> f64 {
        self.flux
    }

    /// Nearest integer to the flux.
    pub fn k(&self) -> i64 {
        self.k
    }

    /// Grid with the default exclusion disks around every zero.
    pub fn residual_grid(&self) -> Result<SampleGrid> {
        let r = self.geom.default_exclusion_radius(self.resolution());
        let ex: Vec<Exclusion> = self.zeros.iter().map(|z| Exclusion::new(z.location, r)).collect();
        self.geom.build_grid(self.resolution(), &ex)
    }

    /// Copy with `ρ` multiplied by `factor·e^{δ}` pointwise and `B` rebuilt
    /// from the abelian identity. Used to probe residual sensitivity.
    pub fn with_modified_density(&self, factor: f64, delta: Option<&[f64]>) -> Result<VortexField> {
        if self.target.n() != 1 {
            return Err(Error::Precondition("density modification is defined for n = 1 fields".into()));
        }
        if let Some(d) = delta {
            if d.len() != self.rho.len() {
                return Err(Error::ResolutionMismatch(format!("{} samples for {} points", d.len(), self.rho.len())));
            }
        }
        let rho: Vec<f64> =
            self.rho.iter().enumerate().map(|(i, r)| r * factor * delta.map_or(1.0, |d| d[i].exp())).collect();
        Ok(self.with_rho(rho))
    }

    fn with_rho(&self, rho: Vec<f64>) -> VortexField {
        let (kappa, kappa0) = (self.target.kappa(), self.geom.kappa0());
        let b: Vec<f64> = rho.iter().map(|r| kappa * r - kappa0).collect();
        let flux = self.grid.integrate_samples(&b) / (2.0 * PI);
        let higgs_matrix = self
            .higgs_matrix
            .as_ref()
            .map(|_| rho.iter().map(|&r| DMatrix::from_element(1, 1, C64::new(r, 0.0))).collect());
        let b_matrix =
            self.b_matrix.as_ref().map(|_| b.iter().map(|&x| DMatrix::from_element(1, 1, C64::new(x, 0.0))).collect());
        VortexField { rho, b, higgs_matrix, b_matrix, flux, k: flux.round() as i64, ..self.clone() }
    }
}

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.iter().map(f).collect()
}

/// Per-point field values.
pub(crate) struct PointSample {
    pub rho: f64,
    pub b: f64,
    pub higgs: Option<DMatrix<C64>>,
    pub b_matrix: Option<DMatrix<C64>>,
}

/// `ρ = σ(w)|w'|²/λ²` from a jet; the chart choice does not matter.
pub(crate) fn abelian_density(target: &SpaceFormTarget, geom: &SurfaceGeometry, p: &SurfacePoint, jet: &Jet) -> f64 {
    target.area_density(jet.w[0]) * jet.dw[0].norm_sqr() / geom.metric_density(p.z)
}

/// `Φ`, `B` and `ρ` in the orthonormal frame `ṽ = L†v`, where `hᵀ = LL†`.
pub(crate) fn matrix_sample(
    target: &SpaceFormTarget,
    geom: &SurfaceGeometry,
    p: &SurfacePoint,
    jet: &Jet,
) -> Result<PointSample> {
    let n = target.n();
    let frame = target.curvature_tensor(&jet.w);
    let gram = frame.metric.transpose();
    let l = gram.cholesky().ok_or_else(|| Error::DegenerateMap("target metric lost positivity".into()))?.l();
    let l_inv = l.clone().try_inverse().expect("Cholesky factor is invertible");
    let v = DVector::from_column_slice(&jet.dw);
    let vt = l.adjoint() * &v;
    let h_sigma = geom.metric_density(p.z) / 2.0;
    let phi = &vt * vt.adjoint() / C64::new(h_sigma, 0.0);
    let c = frame.contract(&jet.dw, &jet.dw);
    let e = &l_inv * c.transpose() * l_inv.adjoint();
    let b = e / C64::new(h_sigma, 0.0) - DMatrix::identity(n, n) * C64::new(geom.kappa0(), 0.0);
    Ok(PointSample { rho: phi.trace().re, b: b.trace().re, higgs: Some(phi), b_matrix: Some(b) })
}

fn check_inputs(
    map: &HolomorphicMap,
    twist: &TwistData,
    geom: &SurfaceGeometry,
    target: &SpaceFormTarget,
) -> Result<()> {
    if target.n() != map.n() {
        return Err(Error::Precondition(format!("map targets CP^{} but the space form is CP^{}", map.n(), target.n())));
    }
    map.check_compatible(twist, geom)
}

fn assemble(
    map: &HolomorphicMap,
    twist: &TwistData,
    geom: &SurfaceGeometry,
    target: &SpaceFormTarget,
    resolution: usize,
    sample: impl Fn(&SurfacePoint) -> Result<PointSample> + Sync + Send,
) -> Result<VortexField> {
    let grid = geom.build_grid(resolution, &[])?;
    let samples = par_map(&grid.points, |p| sample(p)).into_iter().collect::<Result<Vec<_>>>()?;
    let rho: Vec<f64> = samples.iter().map(|s| s.rho).collect();
    let b: Vec<f64> = samples.iter().map(|s| s.b).collect();
    let matrices = samples.iter().all(|s| s.higgs.is_some());
    let (higgs_matrix, b_matrix) = if matrices {
        let (h, bm) = samples.into_iter().map(|s| (s.higgs.expect("checked"), s.b_matrix.expect("checked"))).unzip();
        (Some(h), Some(bm))
    } else {
        (None, None)
    };
    let flux = grid.integrate_samples(&b) / (2.0 * PI);
    let mut field = VortexField {
        geom: geom.clone(),
        target: *target,
        map: map.clone(),
        twist: twist.clone(),
        grid,
        rho,
        b,
        higgs_matrix,
        b_matrix,
        zeros: Vec::new(),
        flux,
        k: flux.round() as i64,
    };
    field.zeros = find_zeros(&field)?;
    Ok(field)
}

/// Abelian field of a map into `CP¹`: `ρ = σ(ψ)|ψ'|²/λ²`, `B = κρ - κ₀`.
pub fn build_abelian(
    map: &HolomorphicMap,
    twist: &TwistData,
    geom: &SurfaceGeometry,
    target: &SpaceFormTarget,
    resolution: usize,
) -> Result<VortexField> {
    if target.n() != 1 {
        return Err(Error::Precondition("abelian construction needs a CP^1 target".into()));
    }
    check_inputs(map, twist, geom, target)?;
    let (kappa, kappa0) = (target.kappa(), geom.kappa0());
    assemble(map, twist, geom, target, resolution, |p| {
        let rho = abelian_density(target, geom, p, &map.jet(p)?);
        Ok(PointSample { rho, b: kappa * rho - kappa0, higgs: None, b_matrix: None })
    })
}

/// Matrix-valued field of a map into `CPⁿ`, with `Φ = φφ†` and `B` from the
/// Chern curvature of the target.
pub fn build_nonabelian(
    map: &HolomorphicMap,
    twist: &TwistData,
    geom: &SurfaceGeometry,
    target: &SpaceFormTarget,
    resolution: usize,
) -> Result<VortexField> {
    check_inputs(map, twist, geom, target)?;
    assemble(map, twist, geom, target, resolution, |p| matrix_sample(target, geom, p, &map.jet(p)?))
}

/// `(1/2π)∫ tr B` over the full grid.
pub fn flux(field: &VortexField) -> f64 {
    field.flux
}

/// Nearest integer to the flux; fails when the flux is not quantised.
pub fn vortex_number(field: &VortexField) -> Result<i64> {
    vortex_number_with_tol(field, FLUX_TOL)
}

pub fn vortex_number_with_tol(field: &VortexField, tol: f64) -> Result<i64> {
    let dist = (field.flux - field.flux.round()).abs();
    if dist > tol {
        return Err(Error::FluxNotQuantized(field.flux, dist));
    }
    Ok(field.k)
}

/// `k = n(2g-2) + (n+1)·deg ψ` for untwisted maps.
pub fn riemann_hurwitz(n: usize, genus: u32, degree: usize) -> i64 {
    n as i64 * (2 * genus as i64 - 2) + (n as i64 + 1) * degree as i64
}
