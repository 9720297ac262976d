//! Zeros of the Higgs field `φ = ∂ψ`.
//!
//! A coarse scan of `ρ` seeds Newton's method on a generic linear combination
//! of the components of `∂ψ` in a fixed target chart. Candidates are accepted
//! only when every component vanishes, then clustered, and the multiplicity
//! is the winding number of the combination on a small circle.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{par_map, VortexField, Zero};
use crate::error::{Error, Result};
use crate::holomap::{HolomorphicMap, Jet};
use crate::spaceform::SpaceFormTarget;
use crate::surface::{Chart, SurfaceGeometry, SurfaceKind, SurfacePoint};
use crate::C64;

/// Half-width of the scanned square in each sphere chart.
const SPHERE_SCAN_RADIUS: f64 = 1.25;
const NEWTON_MAX_ITER: usize = 100;
/// A converged candidate must satisfy `ρ < ACCEPT·max ρ`.
const ACCEPT: f64 = 1e-14;
/// Candidates closer than this (relative to the length scale) are one zero.
/// Plain Newton stalls near `1e-7` at a triple zero, so this must be larger.
const CLUSTER: f64 = 1e-4;

/// Density `Σ h_{ij̄} ∂ψⁱ ∂ψ̄ʲ / h_Σ`, valid in any target chart.
pub(crate) fn density(
    map: &HolomorphicMap,
    target: &SpaceFormTarget,
    geom: &SurfaceGeometry,
    p: &SurfacePoint,
) -> Result<f64> {
    let jet = map.jet(p)?;
    Ok(jet_density(target, geom, p, &jet))
}

fn jet_density(target: &SpaceFormTarget, geom: &SurfaceGeometry, p: &SurfacePoint, jet: &Jet) -> f64 {
    let h = target.fs_metric(&jet.w);
    let n = jet.dw.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (h[(i, j)] * jet.dw[i] * jet.dw[j].conj()).re;
        }
    }
    2.0 * s / geom.metric_density(p.z)
}

/// Fixed generic weights for combining the components of `∂ψ`.
fn weights(n: usize) -> Vec<C64> {
    (0..n).map(|m| Complex64::from_polar(1.0 + 0.37 * m as f64, 0.7 + 1.3 * m as f64)).collect()
}

struct Combination<'a> {
    map: &'a HolomorphicMap,
    chart: Chart,
    target_chart: usize,
    weights: Vec<C64>,
}

impl Combination<'_> {
    fn jet(&self, z: C64) -> Result<Jet> {
        let (v, dv) = self.map.homogeneous(&SurfacePoint { chart: self.chart, z })?;
        Ok(Jet::in_chart(&v, &dv, self.target_chart))
    }

    fn eval(&self, z: C64) -> Result<C64> {
        let jet = self.jet(z)?;
        Ok(jet.dw.iter().zip(&self.weights).map(|(d, a)| d * a).sum())
    }

    fn derivative(&self, z: C64, h: f64) -> Result<C64> {
        Ok((self.eval(z + h)? - self.eval(z - h)?) / (2.0 * h))
    }

    /// Newton iteration, damped to steps below `max_step`; `m` is the
    /// multiplicity used for the modified update.
    fn newton(&self, mut z: C64, scale: f64, m: f64) -> Result<Option<C64>> {
        let h = 1e-6 * scale;
        for _ in 0..NEWTON_MAX_ITER {
            let g = match self.eval(z) {
                Ok(g) => g,
                // a pole of the building blocks; the chart value stays regular there
                Err(Error::Pole(..)) => return Ok(Some(z)),
                Err(e) => return Err(e),
            };
            if g.norm() == 0.0 {
                return Ok(Some(z));
            }
            let d = self.derivative(z, h)?;
            if d.norm() == 0.0 {
                return Ok(None);
            }
            let mut step = g / d * m;
            if step.norm() > 0.1 * scale {
                step *= 0.1 * scale / step.norm();
            }
            z -= step;
            if !z.is_finite() {
                return Ok(None);
            }
            if step.norm() < 1e-15 * scale {
                return Ok(Some(z));
            }
        }
        Ok(Some(z))
    }

    /// Winding number of the combination on a circle of radius `r` about `z`.
    fn winding(&self, z: C64, r: f64) -> Result<i64> {
        let steps = 256;
        let mut total = 0.0;
        let mut prev = self.eval(z + r)?.arg();
        for k in 1..=steps {
            let arg = self.eval(z + Complex64::from_polar(r, 2.0 * PI * k as f64 / steps as f64))?.arg();
            let mut d = arg - prev;
            d -= 2.0 * PI * (d / (2.0 * PI)).round();
            total += d;
            prev = arg;
        }
        Ok((total / (2.0 * PI)).round() as i64)
    }
}

struct Scan {
    points: Vec<SurfacePoint>,
    /// Neighbour indices of each point.
    neighbours: Vec<Vec<usize>>,
}

fn sphere_scan(m: usize) -> Scan {
    let mut points = Vec::new();
    let mut index = vec![None; 2 * m * m];
    for (c, chart) in [Chart::North, Chart::South].into_iter().enumerate() {
        for i in 0..m {
            for j in 0..m {
                let x = -SPHERE_SCAN_RADIUS + 2.0 * SPHERE_SCAN_RADIUS * (i as f64 + 0.5) / m as f64;
                let y = -SPHERE_SCAN_RADIUS + 2.0 * SPHERE_SCAN_RADIUS * (j as f64 + 0.5) / m as f64;
                let z = Complex64::new(x, y);
                if z.norm() <= SPHERE_SCAN_RADIUS {
                    index[(c * m + i) * m + j] = Some(points.len());
                    points.push(SurfacePoint { chart, z });
                }
            }
        }
    }
    let mut neighbours = vec![Vec::new(); points.len()];
    for c in 0..2 {
        for i in 0..m {
            for j in 0..m {
                let Some(a) = index[(c * m + i) * m + j] else { continue };
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let (ni, nj) = (i as i64 + di, j as i64 + dj);
                        if (di, dj) == (0, 0) || ni < 0 || nj < 0 || ni >= m as i64 || nj >= m as i64 {
                            continue;
                        }
                        if let Some(b) = index[(c * m + ni as usize) * m + nj as usize] {
                            neighbours[a].push(b);
                        }
                    }
                }
            }
        }
    }
    Scan { points, neighbours }
}

fn torus_scan(geom: &SurfaceGeometry, m: usize) -> Scan {
    let lat = geom.lattice().expect("torus carries a lattice");
    let mut points = Vec::with_capacity(m * m);
    let mut neighbours = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            points.push(SurfacePoint::cell(lat.point((i as f64 + 0.5) / m as f64, (j as f64 + 0.5) / m as f64)));
            let mut nb = Vec::with_capacity(8);
            for di in [m - 1, 0, 1] {
                for dj in [m - 1, 0, 1] {
                    if (di, dj) != (0, 0) {
                        nb.push(((i + di) % m) * m + (j + dj) % m);
                    }
                }
            }
            neighbours.push(nb);
        }
    }
    Scan { points, neighbours }
}

fn canonical(geom: &SurfaceGeometry, p: SurfacePoint) -> SurfacePoint {
    match p.chart {
        Chart::Cell => {
            let lat = geom.lattice().expect("torus carries a lattice");
            SurfacePoint::cell(lat.reduce(p.z))
        }
        _ if p.z.norm() > 1.0 => p.swap_chart(),
        _ => p,
    }
}

/// Locate the zeros of `∂ψ` with their multiplicities.
pub fn find_zeros(field: &VortexField) -> Result<Vec<Zero>> {
    let (map, target, geom) = (field.map(), field.target(), field.geom());
    let m = (field.resolution() / 2).clamp(32, 96);
    let scan = match geom.kind() {
        SurfaceKind::Sphere => sphere_scan(m),
        SurfaceKind::Torus => torus_scan(geom, m),
    };
    let scale = match geom.lattice() {
        Some(lat) => lat.shortest(),
        None => 1.0,
    };
    let values: Vec<f64> = par_map(&scan.points, |p| density(map, target, geom, p).unwrap_or(f64::INFINITY));
    let rho_max = values.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let seeds: Vec<usize> = (0..scan.points.len())
        .filter(|&a| values[a].is_finite() && scan.neighbours[a].iter().all(|&b| values[a] <= values[b]))
        .collect();

    let n = map.n();
    let refine = |seed: &usize| -> Option<(SurfacePoint, usize)> {
        let p = scan.points[*seed];
        let chart = map.jet(&p).ok()?.chart;
        let comb = Combination { map, chart: p.chart, target_chart: chart, weights: weights(n) };
        let z = comb.newton(p.z, scale, 1.0).ok()??;
        let q = SurfacePoint { chart: p.chart, z };
        if p.chart != Chart::Cell && z.norm() > SPHERE_SCAN_RADIUS * 1.5 {
            return None;
        }
        let vanishes = match density(map, target, geom, &q) {
            Ok(rho) => rho <= ACCEPT * rho_max,
            // ρ cannot be evaluated on the pole itself; a zero shows as ρ ~ |z - q|^{2m}
            Err(Error::Pole(..)) => {
                let d = 1e-4 * scale;
                let near = |t: f64| density(map, target, geom, &SurfacePoint { chart: q.chart, z: q.z + t });
                let (a, b) = (near(d).ok()?, near(2.0 * d).ok()?);
                b > 3.0 * a
            }
            Err(_) => false,
        };
        vanishes.then_some((q, chart))
    };
    let candidates: Vec<(SurfacePoint, usize)> = par_map(&seeds, refine).into_iter().flatten().collect();

    let mut found: Vec<(SurfacePoint, usize)> = Vec::new();
    for (q, chart) in candidates {
        let c = canonical(geom, q);
        if found.iter().all(|(f, _)| geom.distance(f, &c) > CLUSTER * scale) {
            // keep the Newton chart pairing with the point as located
            found.push((c, if c.chart == q.chart { chart } else { usize::MAX }));
        }
    }

    let mut zeros = Vec::with_capacity(found.len());
    for (idx, (p, chart)) in found.iter().enumerate() {
        let sep = found
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != idx)
            .map(|(_, (q, _))| geom.distance(p, q))
            .fold(f64::INFINITY, f64::min);
        // chart radius of a geodesic distance is smaller on the sphere; stay conservative
        let r = (0.2 * sep).min(0.05 * scale);
        let target_chart = if *chart == usize::MAX { map.jet(p)?.chart } else { *chart };
        let comb = Combination { map, chart: p.chart, target_chart, weights: weights(n) };
        let mult = comb.winding(p.z, r)?.max(1);
        let location = if mult > 1 {
            let z = comb.newton(p.z, scale, mult as f64)?.unwrap_or(p.z);
            canonical(geom, SurfacePoint { chart: p.chart, z })
        } else {
            *p
        };
        zeros.push(Zero { location, multiplicity: mult as u32 });
    }
    Ok(zeros)
}
