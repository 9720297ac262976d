//! Newton polishing of abelian torus fields.
//!
//! Writing `log ρ = v + S` with `S = Σ mⱼP(z - zⱼ)` the Green's functions of
//! the zeros, the Liouville equation becomes the smooth problem
//! `F(v) = (Δ₀v - 4πM/A)/λ² + 2κe^{v+S} - 2κ₀ = 0`. Its Jacobian
//! `J = Δ₀/λ² + 2κρ` is symmetric and indefinite, so each step is solved with
//! preconditioned MINRES. Post-composition with `PSL(2,ℂ)` moves along a
//! family of solutions with the same zeros, so `J` annihilates the three
//! sphere coordinates `n(ψ)` of the map. Steps are taken orthogonal to that
//! kernel (Gauss-Newton on the range), which keeps them bounded.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::VortexField;
use crate::elliptic::lattice_invariants;
use crate::error::{Error, Result};
use crate::spectral::PeriodicGrid;
use crate::surface::{SurfaceKind, SurfacePoint};

/// Largest starting residual accepted by [`newton_polish`], measured as the
/// root mean square so that isolated density peaks do not dominate.
pub const START_TOL: f64 = 0.1;
/// Residuals below this that stop decreasing are taken as rounding noise.
const FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Stop once the sup residual drops below this.
    pub tol: f64,
    /// Also estimate the Jacobian eigenvalues nearest zero.
    pub eigen_probe: bool,
    pub probe_count: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_iterations: 20, tol: 1e-10, eigen_probe: false, probe_count: 8 }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonReport {
    pub field: VortexField,
    pub iterations: usize,
    pub final_residual: f64,
    /// Sup residual before each step and after the last.
    pub residual_history: Vec<f64>,
    /// Three consecutive residual increases.
    pub diverged: bool,
    /// Jacobian eigenvalues of smallest modulus, ascending in modulus.
    pub smallest_eigenvalues: Vec<f64>,
    /// Number of `PSL(2,ℂ)` zero modes projected out of each step.
    pub kernel_dimension: usize,
}

/// Discretised problem on the spectral grid.
struct Liouville {
    grid: PeriodicGrid,
    singular: Vec<f64>,
    source: f64,
    lambda2: f64,
    kappa: f64,
    kappa0: f64,
}

impl Liouville {
    fn new(field: &VortexField) -> Result<Self> {
        let geom = field.geom();
        if geom.kind() != SurfaceKind::Torus || field.target().n() != 1 {
            return Err(Error::Precondition("Newton polishing needs an abelian torus field".into()));
        }
        let lat = *geom.lattice().expect("torus carries a lattice");
        let data = lattice_invariants(&lat)?;
        let green = data.green_kernel()?;
        let singular = field
            .points()
            .iter()
            .map(|p| field.zeros().iter().map(|z| Ok(z.multiplicity as f64 * green.eval(p.z - z.location.z)?)).sum())
            .collect::<Result<Vec<f64>>>()?;
        let m: f64 = field.zeros().iter().map(|z| z.multiplicity as f64).sum();
        Ok(Liouville {
            grid: PeriodicGrid::new(lat, field.resolution())?,
            singular,
            source: 4.0 * PI * m / lat.area(),
            lambda2: geom.metric_density(num_complex::Complex64::new(0.0, 0.0)),
            kappa: field.target().kappa(),
            kappa0: geom.kappa0(),
        })
    }

    fn rho(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.singular).map(|(v, s)| (v + s).exp()).collect()
    }

    fn residual(&self, v: &[f64]) -> Vec<f64> {
        // the FFT rounds relative to |v|; the mean carries no curvature
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let centred: Vec<f64> = v.iter().map(|x| x - mean).collect();
        let lap = self.grid.laplacian(&centred);
        lap.iter()
            .zip(self.rho(v))
            .map(|(l, rho)| (l - self.source) / self.lambda2 + 2.0 * self.kappa * rho - 2.0 * self.kappa0)
            .collect()
    }

    fn jacobian<'a>(&'a self, rho: &'a [f64], shift: f64) -> impl Fn(&[f64]) -> Vec<f64> + 'a {
        move |x| {
            let lap = self.grid.laplacian(x);
            lap.iter()
                .zip(rho)
                .zip(x)
                .map(|((l, r), x)| l / self.lambda2 + (2.0 * self.kappa * r - shift) * x)
                .collect()
        }
    }

    /// `(-Δ₀/λ² + μ)⁻¹`, positive definite.
    fn preconditioner(&self, mu: f64) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
        move |x| self.grid.apply_multiplier(x, |s| 1.0 / (-s / self.lambda2 + mu))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rms(a: &[f64]) -> f64 {
    (dot(a, a) / a.len() as f64).sqrt()
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Preconditioned MINRES for symmetric `A` and SPD `M`, starting from zero.
fn minres(
    a: impl Fn(&[f64]) -> Vec<f64>,
    m: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    rtol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut y = m(&r1);
    let beta1 = dot(&r1, &y).max(0.0).sqrt();
    if beta1 == 0.0 {
        return x;
    }
    let mut r2 = r1.clone();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0, 0.0);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    for itn in 0..max_iter {
        let v: Vec<f64> = y.iter().map(|t| t / beta).collect();
        y = a(&v);
        if itn > 0 {
            for (yi, ri) in y.iter_mut().zip(&r1) {
                *yi -= beta / oldb * ri;
            }
        }
        let alfa = dot(&v, &y);
        for (yi, ri) in y.iter_mut().zip(&r2) {
            *yi -= alfa / beta * ri;
        }
        r1 = std::mem::replace(&mut r2, y);
        y = m(&r2);
        oldb = beta;
        beta = dot(&r2, &y).max(0.0).sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let w1 = std::mem::replace(&mut w2, w);
        w = v.iter().zip(&w1).zip(&w2).map(|((v, a), b)| (v - oldeps * a - delta * b) / gamma).collect();
        for (xi, wi) in x.iter_mut().zip(&w) {
            *xi += phi * wi;
        }
        if phibar < rtol * beta1 || beta == 0.0 {
            break;
        }
    }
    x
}

fn orthonormalise(vectors: &mut Vec<Vec<f64>>) {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for mut v in vectors.drain(..) {
        for k in &kept {
            let p = dot(&v, k);
            v.iter_mut().zip(k).for_each(|(a, b)| *a -= p * b);
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            kept.push(v);
        }
    }
    *vectors = kept;
}

fn project_out(x: &mut [f64], basis: &[Vec<f64>]) {
    for k in basis {
        let p = dot(x, k);
        x.iter_mut().zip(k).for_each(|(a, b)| *a -= p * b);
    }
}

fn sphere_coords(field: &VortexField, p: &SurfacePoint) -> Result<[f64; 3]> {
    let (v, _) = field.map().homogeneous(p)?;
    let (a, b) = (v[0], v[1]);
    let norm = a.norm_sqr() + b.norm_sqr();
    let ab = a.conj() * b;
    Ok([2.0 * ab.re / norm, 2.0 * ab.im / norm, (a.norm_sqr() - b.norm_sqr()) / norm])
}

/// Periodic combinations of the sphere coordinates `n(ψ)`, which `J`
/// annihilates at an exact solution. A twist rotates `n`, so only the
/// directions fixed by every transition survive.
fn zero_modes(field: &VortexField) -> Result<Vec<Vec<f64>>> {
    let lat = *field.geom().lattice().expect("torus carries a lattice");
    let mut rows = Vec::new();
    for k in 0..8 {
        let z = lat.point(0.137 + 0.113 * k as f64, 0.291 + 0.071 * k as f64);
        let base = sphere_coords(field, &SurfacePoint::cell(z))?;
        for w in [lat.omega1(), lat.omega2()] {
            let moved = sphere_coords(field, &SurfacePoint::cell(z + w))?;
            rows.extend((0..3).map(|i| moved[i] - base[i]));
        }
    }
    let jumps = DMatrix::from_row_slice(rows.len() / 3, 3, &rows);
    let svd = jumps.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let fixed: Vec<[f64; 3]> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] < 1e-8)
        .map(|i| [v_t[(i, 0)], v_t[(i, 1)], v_t[(i, 2)]])
        .collect();
    let coords = field.points().iter().map(|p| sphere_coords(field, p)).collect::<Result<Vec<_>>>()?;
    let mut modes: Vec<Vec<f64>> =
        fixed.iter().map(|a| coords.iter().map(|n| a[0] * n[0] + a[1] * n[1] + a[2] * n[2]).collect()).collect();
    orthonormalise(&mut modes);
    Ok(modes)
}

/// Track the near-null space of `J` at the current iterate by shifted
/// inverse iteration from the previous basis.
fn refine_kernel(problem: &Liouville, rho: &[f64], basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    const SHIFT: f64 = 1e-4;
    let shifted = problem.jacobian(rho, SHIFT);
    let pre = problem.preconditioner(1.0);
    let mut next = basis.to_vec();
    for _ in 0..2 {
        next = next.iter().map(|k| minres(&shifted, &pre, k, 1e-10, 500)).collect();
        orthonormalise(&mut next);
    }
    next
}

/// Eigenvalues of `J` nearest zero by block shifted inverse iteration.
fn probe(problem: &Liouville, rho: &[f64], count: usize) -> Vec<f64> {
    const SHIFT: f64 = 1e-3;
    let n = rho.len();
    let shifted = problem.jacobian(rho, SHIFT);
    let op = problem.jacobian(rho, 0.0);
    let pre = problem.preconditioner(1.0);
    // deterministic, generic start vectors
    let mut block: Vec<Vec<f64>> = (0..count)
        .map(|k| (0..n).map(|i| ((i * (2 * k + 3)) as f64 * 0.618_033_988_75 + k as f64).sin()).collect())
        .collect();
    let mut ritz = Vec::new();
    for _ in 0..12 {
        let mut next: Vec<Vec<f64>> = block.iter().map(|x| minres(&shifted, &pre, x, 1e-10, 400)).collect();
        orthonormalise(&mut next);
        let count = next.len();
        let images: Vec<Vec<f64>> = next.iter().map(|x| op(x)).collect();
        let t = DMatrix::from_fn(count, count, |i, j| dot(&next[i], &images[j]));
        let t = (&t + t.transpose()) * 0.5;
        let eig = t.symmetric_eigen();
        block = (0..count)
            .map(|c| (0..n).map(|i| (0..count).map(|k| eig.eigenvectors[(k, c)] * next[k][i]).sum()).collect())
            .collect();
        ritz = eig.eigenvalues.iter().copied().collect();
    }
    ritz.sort_by(|a: &f64, b| a.abs().total_cmp(&b.abs()));
    ritz
}

/// Refine an approximate abelian torus field by Newton's method.
///
/// Fails with `Precondition` when the starting residual exceeds
/// [`START_TOL`]; divergence is reported rather than raised.
pub fn newton_polish(field: &VortexField, opts: &NewtonOptions) -> Result<NewtonReport> {
    let problem = Liouville::new(field)?;
    if field.rho().iter().any(|r| *r <= 0.0) {
        return Err(Error::Precondition("density must be positive on the grid".into()));
    }
    let mut v: Vec<f64> = field.rho().iter().zip(&problem.singular).map(|(r, s)| r.ln() - s).collect();
    let mut f = problem.residual(&v);
    let start = rms(&f);
    if start > START_TOL {
        return Err(Error::Precondition(format!("starting rms residual {start:.3e} exceeds {START_TOL}")));
    }
    let mut res = sup(&f);
    let mut history = vec![res];
    let mut kernel = zero_modes(field)?;
    let (mut iterations, mut increases, mut diverged) = (0, 0, false);
    while iterations < opts.max_iterations && res >= opts.tol {
        let rho = problem.rho(&v);
        kernel = refine_kernel(&problem, &rho, &kernel);
        let mut rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        project_out(&mut rhs, &kernel);
        let mut step = minres(problem.jacobian(&rho, 0.0), problem.preconditioner(1.0), &rhs, 1e-12, 500);
        project_out(&mut step, &kernel);
        v.iter_mut().zip(&step).for_each(|(a, d)| *a += d);
        f = problem.residual(&v);
        let next = sup(&f);
        iterations += 1;
        increases = if next > res { increases + 1 } else { 0 };
        // at the rounding floor further steps only shuffle noise
        let stalled = next > 0.5 * res && next < FLOOR;
        res = next;
        history.push(res);
        if stalled {
            break;
        }
        if increases >= 3 {
            diverged = true;
            break;
        }
    }
    let polished = if iterations == 0 { field.clone() } else { field.with_rho(problem.rho(&v)) };
    let smallest_eigenvalues = if opts.eigen_probe && opts.probe_count > 0 {
        probe(&problem, &problem.rho(&v), opts.probe_count)
    } else {
        Vec::new()
    };
    Ok(NewtonReport {
        field: polished,
        iterations,
        final_residual: res,
        residual_history: history,
        diverged,
        smallest_eigenvalues,
        kernel_dimension: kernel.len(),
    })
}
