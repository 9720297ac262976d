//! Conformal rescaling of a non-constant metric on the torus.
//!
//! For `ds² = e^{g₀}|dz|²` the factor `f₀` with `e^{f₀+g₀}|dz|²` of constant
//! curvature `κ₀` solves, to linear order, `Δ₀f = -Δ₀g₀ - 2κ₀e^{g₀}`. On the
//! torus Gauss–Bonnet forces `κ₀ = 0`, the source has zero mean and the
//! periodic Poisson problem is solved spectrally with `mean f₀ = 0`.

use serde::{Deserialize, Serialize};

use crate::elliptic::Lattice;
use crate::error::{Error, Result};
use crate::holomap::{HolomorphicMap, TwistData};
use crate::spaceform::SpaceFormTarget;
use crate::spectral::PeriodicGrid;
use crate::surface::SurfaceGeometry;
use crate::vortex::{build_abelian, VortexField};

/// Largest source mean accepted as round-off.
pub const SOURCE_MEAN_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalProblem {
    pub lattice: Lattice,
    /// `g₀` on the cell-centred periodic grid, row-major with the `ω₁` index slow.
    pub log_density: Vec<f64>,
    pub resolution: usize,
    /// Target curvature; only `0` is consistent on a torus.
    #[serde(default)]
    pub kappa0: f64,
}

impl ConformalProblem {
    /// Sample `g₀` from a function of the point.
    pub fn from_fn(lattice: Lattice, resolution: usize, g0: impl Fn(crate::C64) -> f64) -> Result<Self> {
        let grid = PeriodicGrid::new(lattice, resolution)?;
        Ok(ConformalProblem {
            lattice,
            log_density: grid.points().into_iter().map(g0).collect(),
            resolution,
            kappa0: 0.0,
        })
    }

    fn validate(&self) -> Result<PeriodicGrid> {
        if !self.resolution.is_power_of_two() {
            return Err(Error::Precondition(format!("resolution {} is not a power of two", self.resolution)));
        }
        let n = self.resolution * self.resolution;
        if self.log_density.len() != n {
            return Err(Error::ResolutionMismatch(format!(
                "{} samples for a {}² grid",
                self.log_density.len(),
                self.resolution
            )));
        }
        if self.log_density.iter().any(|g| !g.is_finite()) {
            return Err(Error::Precondition("log density must be finite".into()));
        }
        PeriodicGrid::new(self.lattice, self.resolution)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Uniformization {
    /// Conformal factor on the grid, zero mean.
    pub f0: Vec<f64>,
    /// Mean removed from the source before inversion.
    pub projected_mean: f64,
    /// `sup |Δ₀f₀ - (s - mean s)|`.
    pub solver_residual: f64,
    /// `sup |K - κ₀|` for the metric `e^{f₀+g₀}|dz|²`.
    pub curvature_deviation: f64,
    /// Mean of `e^{f₀+g₀}`, the constant density of the flat metric.
    pub density: f64,
    /// `max - min` of `e^{f₀+g₀}`.
    pub density_spread: f64,
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Spectral solve for the uniformising factor.
pub fn solve_uniformizing_factor(prob: &ConformalProblem) -> Result<Uniformization> {
    solve_uniformizing_factor_with_tol(prob, SOURCE_MEAN_TOL)
}

/// As [`solve_uniformizing_factor`] with an explicit bound on the source mean.
pub fn solve_uniformizing_factor_with_tol(prob: &ConformalProblem, mean_tol: f64) -> Result<Uniformization> {
    let grid = prob.validate()?;
    let g0 = &prob.log_density;
    let lap_g0 = grid.laplacian(g0);
    let source: Vec<f64> = lap_g0.iter().zip(g0).map(|(l, g)| -l - 2.0 * prob.kappa0 * g.exp()).collect();
    let (f0, mean) = grid.poisson(&source);
    if mean.abs() > mean_tol {
        return Err(Error::InconsistentSource(mean, mean_tol));
    }
    let lap_f0 = grid.laplacian(&f0);
    let solver_residual = sup(&lap_f0.iter().zip(&source).map(|(l, s)| l - (s - mean)).collect::<Vec<_>>());
    let total: Vec<f64> = f0.iter().zip(g0).map(|(f, g)| f + g).collect();
    let lap_total = grid.laplacian(&total);
    let curvature: Vec<f64> = lap_total.iter().zip(&total).map(|(l, t)| -0.5 * l * (-t).exp() - prob.kappa0).collect();
    let density: Vec<f64> = total.iter().map(|t| t.exp()).collect();
    let (lo, hi) = density.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(*d), hi.max(*d)));
    Ok(Uniformization {
        projected_mean: mean,
        solver_residual,
        curvature_deviation: sup(&curvature),
        density: density.iter().sum::<f64>() / density.len() as f64,
        density_spread: hi - lo,
        f0,
    })
}

/// Abelian vortex over the uniformised metric of `prob`.
pub fn build_on_nonconstant_metric(
    map: &HolomorphicMap,
    twist: &TwistData,
    prob: &ConformalProblem,
    target: &SpaceFormTarget,
) -> Result<VortexField> {
    let u = solve_uniformizing_factor(prob)?;
    let geom = SurfaceGeometry::torus_with_density(prob.lattice, u.density)?;
    build_abelian(map, twist, &geom, target, prob.resolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holomap::olesen_map;
    use crate::vortex::{abelian_residual, vortex_number};
    use std::f64::consts::PI;

    fn square() -> Lattice {
        Lattice::rectangle(1.0, 1.0).unwrap()
    }

    fn cos_problem(res: usize) -> ConformalProblem {
        ConformalProblem::from_fn(square(), res, |z| 0.3 * (2.0 * PI * z.re).cos()).unwrap()
    }

    /// Fourth-order periodic finite-difference curvature of `e^{u}|dz|²`.
    fn fd_curvature(u: &[f64], n: usize, h: f64) -> Vec<f64> {
        let at = |i: i64, j: i64| u[(i.rem_euclid(n as i64) as usize) * n + j.rem_euclid(n as i64) as usize];
        let mut k = Vec::with_capacity(n * n);
        for i in 0..n as i64 {
            for j in 0..n as i64 {
                let d2 = |di: i64, dj: i64| {
                    -at(i + 2 * di, j + 2 * dj) + 16.0 * at(i + di, j + dj) - 30.0 * at(i, j)
                        + 16.0 * at(i - di, j - dj)
                        - at(i - 2 * di, j - 2 * dj)
                };
                let lap = (d2(1, 0) + d2(0, 1)) / (12.0 * h * h);
                k.push(-0.5 * lap * (-at(i, j)).exp());
            }
        }
        k
    }

    #[test]
    fn constant_input_gives_zero_factor() {
        let p = ConformalProblem::from_fn(square(), 32, |_| 0.7).unwrap();
        let u = solve_uniformizing_factor(&p).unwrap();
        assert!(sup(&u.f0) < 1e-14);
        assert!((u.density - 0.7f64.exp()).abs() < 1e-13);
    }

    #[test]
    fn cos_perturbation_is_flattened() {
        let p = cos_problem(128);
        let u = solve_uniformizing_factor(&p).unwrap();
        assert!(u.curvature_deviation < 1e-8, "{}", u.curvature_deviation);
        assert!(u.solver_residual < 1e-10);
        let total: Vec<f64> = u.f0.iter().zip(&p.log_density).map(|(f, g)| f + g).collect();
        let k = fd_curvature(&total, 128, 1.0 / 128.0);
        assert!(sup(&k) < 1e-8, "{}", sup(&k));
        // the input itself is curved
        assert!(sup(&fd_curvature(&p.log_density, 128, 1.0 / 128.0)) > 1.0);
    }

    #[test]
    fn factor_cancels_the_oscillation() {
        // on a flat torus f₀ = mean(g₀) - g₀
        let p = cos_problem(64);
        let u = solve_uniformizing_factor(&p).unwrap();
        let mean = p.log_density.iter().sum::<f64>() / p.log_density.len() as f64;
        for (f, g) in u.f0.iter().zip(&p.log_density) {
            assert!((f - (mean - g)).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_is_linear() {
        let a = ConformalProblem::from_fn(square(), 32, |z| (2.0 * PI * z.im).sin()).unwrap();
        let b = ConformalProblem::from_fn(square(), 32, |z| 0.2 * (4.0 * PI * (z.re + z.im)).cos()).unwrap();
        let sum = ConformalProblem {
            log_density: a.log_density.iter().zip(&b.log_density).map(|(x, y)| x + y).collect(),
            ..a.clone()
        };
        let (fa, fb, fs) = (
            solve_uniformizing_factor(&a).unwrap().f0,
            solve_uniformizing_factor(&b).unwrap().f0,
            solve_uniformizing_factor(&sum).unwrap().f0,
        );
        for i in 0..fs.len() {
            assert!((fs[i] - fa[i] - fb[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn nonzero_target_curvature_is_inconsistent() {
        let p = ConformalProblem { kappa0: 0.5, ..cos_problem(32) };
        assert!(matches!(solve_uniformizing_factor(&p), Err(Error::InconsistentSource(..))));
    }

    #[test]
    fn malformed_problems() {
        let p = ConformalProblem { resolution: 48, ..cos_problem(32) };
        assert!(matches!(solve_uniformizing_factor(&p), Err(Error::Precondition(_))));
        let mut p = cos_problem(32);
        p.log_density.pop();
        assert!(matches!(solve_uniformizing_factor(&p), Err(Error::ResolutionMismatch(_))));
    }

    #[test]
    fn olesen_over_perturbed_metric() {
        let map: HolomorphicMap = olesen_map(&square()).unwrap().into();
        let target = SpaceFormTarget::new(1, 1.0).unwrap();
        let f = build_on_nonconstant_metric(&map, &TwistData::trivial(1), &cos_problem(128), &target).unwrap();
        assert_eq!(vortex_number(&f).unwrap(), 4);
        let r = abelian_residual(&f, &f.residual_grid().unwrap()).unwrap();
        assert!(r.sup_residual < 1e-6, "{r:?}");
    }

    #[test]
    fn constant_input_matches_plain_build() {
        let map: HolomorphicMap = olesen_map(&square()).unwrap().into();
        let target = SpaceFormTarget::new(1, 1.0).unwrap();
        let p = ConformalProblem::from_fn(square(), 32, |_| 0.0).unwrap();
        let a = build_on_nonconstant_metric(&map, &TwistData::trivial(1), &p, &target).unwrap();
        let b = build_abelian(&map, &TwistData::trivial(1), &SurfaceGeometry::torus(square()), &target, 32).unwrap();
        assert_eq!(a.rho(), b.rho());
    }

    #[test]
    fn scaling_density_keeps_flux() {
        let map: HolomorphicMap = olesen_map(&square()).unwrap().into();
        let target = SpaceFormTarget::new(1, 1.0).unwrap();
        let p = ConformalProblem::from_fn(square(), 64, |_| 2f64.ln()).unwrap();
        let f = build_on_nonconstant_metric(&map, &TwistData::trivial(1), &p, &target).unwrap();
        assert!((f.geom().volume() - 2.0).abs() < 1e-12);
        assert_eq!(vortex_number(&f).unwrap(), 4);
    }
}
