//! Rational maps `CP¹ → CPⁿ` given by `n+1` homogeneous components.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expr::Expr;
use super::mobius::MobiusMap;
use super::poly::Poly;
use super::Jet;
use crate::error::{Error, Result};
use crate::surface::{Chart, SurfacePoint};
use crate::C64;

/// Relative size below which a component value counts as a common zero.
const COMMON_ROOT_TOL: f64 = 1e-7;

/// `z ↦ [P₀(z) : P₁(z) : … : Pₙ(z)]`, affine coordinates `wᵢ = Pᵢ/P₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRational", into = "RawRational")]
pub struct RationalMap {
    components: Vec<Poly>,
    degree: usize,
    /// Components in the chart `ζ = 1/z`.
    south: Vec<Poly>,
}

#[derive(Serialize, Deserialize)]
struct RawRational {
    components: Vec<Poly>,
}

impl TryFrom<RawRational> for RationalMap {
    type Error = Error;
    fn try_from(raw: RawRational) -> Result<Self> {
        RationalMap::from_components(raw.components)
    }
}

impl From<RationalMap> for RawRational {
    fn from(m: RationalMap) -> Self {
        RawRational { components: m.components }
    }
}

impl RationalMap {
    pub fn from_components(components: Vec<Poly>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::DegenerateMap("need at least two homogeneous components".into()));
        }
        let degree = components.iter().filter_map(Poly::degree).max();
        let Some(degree) = degree else {
            return Err(Error::DegenerateMap("all components vanish".into()));
        };
        if degree == 0 {
            return Err(Error::DegenerateMap("constant map".into()));
        }
        check_no_common_root(&components)?;
        let south = components.iter().map(|p| p.reversed(degree)).collect();
        Ok(RationalMap { components, degree, south })
    }

    /// `ψ = num/den` into `CP¹`.
    pub fn from_function(num: Poly, den: Poly) -> Result<Self> {
        RationalMap::from_components(vec![den, num])
    }

    /// `z ↦ (p₁(z), …, pₙ(z))` into the affine chart of `CPⁿ`.
    pub fn polynomial(polys: Vec<Poly>) -> Result<Self> {
        let mut comps = vec![Poly::constant(Complex64::new(1.0, 0.0))];
        comps.extend(polys);
        RationalMap::from_components(comps)
    }

    /// Parse an expression in `z`, e.g. `"(z^2+1)/(z-3)"`; common factors are cancelled.
    pub fn parse(src: &str) -> Result<Self> {
        let expr = Expr::parse(src)?;
        if expr.uses_elliptic() {
            return Err(Error::Parse("rational map expressions may only use z".into()));
        }
        let (num, den) = expr.to_rational()?;
        let (num, den) = cancel_common_roots(num, den);
        RationalMap::from_function(num, den)
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    /// Target dimension `n`.
    pub fn n(&self) -> usize {
        self.components.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Homogeneous components and their derivatives in the given domain chart.
    pub fn homogeneous(&self, p: &SurfacePoint) -> Result<(Vec<C64>, Vec<C64>)> {
        let polys = match p.chart {
            Chart::North => &self.components,
            Chart::South => &self.south,
            Chart::Cell => return Err(Error::InvalidGeometry("rational maps live on the sphere".into())),
        };
        Ok(polys.iter().map(|q| q.eval_with_derivative(p.z)).unzip())
    }

    pub fn jet(&self, p: &SurfacePoint) -> Result<Jet> {
        let (v, dv) = self.homogeneous(p)?;
        Ok(Jet::from_homogeneous(&v, &dv))
    }

    /// Affine value in the target for a north-chart `z`; `None` off the chart.
    pub fn value(&self, z: C64) -> Option<Vec<C64>> {
        let v: Vec<C64> = self.components.iter().map(|q| q.eval(z)).collect();
        if v[0].norm() == 0.0 {
            return None;
        }
        Some(v[1..].iter().map(|x| x / v[0]).collect())
    }

    /// `M ∘ ψ`.
    pub fn post_compose(&self, m: &MobiusMap) -> Result<Self> {
        if m.dim() != self.components.len() {
            return Err(Error::DegenerateMap("Möbius map dimension does not match target".into()));
        }
        let mat = m.matrix();
        let comps = (0..self.components.len())
            .map(|i| {
                self.components.iter().enumerate().fold(Poly::zero(), |acc, (j, p)| acc.add(&p.scale(mat[(i, j)])))
            })
            .collect();
        RationalMap::from_components(comps)
    }
}

fn check_no_common_root(components: &[Poly]) -> Result<()> {
    let nonzero: Vec<&Poly> = components.iter().filter(|p| !p.is_zero()).collect();
    let Some(pivot) = nonzero.iter().min_by_key(|p| p.degree().unwrap_or(0)) else {
        return Ok(());
    };
    for r in pivot.roots() {
        let common = nonzero.iter().all(|p| {
            let scale = p.l1() * r.norm().max(1.0).powi(p.degree().unwrap_or(0) as i32);
            p.eval(r).norm() <= COMMON_ROOT_TOL * scale
        });
        if common {
            return Err(Error::DegenerateMap(format!("components share the root {r}")));
        }
    }
    Ok(())
}

/// Remove roots shared by numerator and denominator.
fn cancel_common_roots(num: Poly, den: Poly) -> (Poly, Poly) {
    if num.is_zero() || den.degree().unwrap_or(0) == 0 || num.degree().unwrap_or(0) == 0 {
        return (num, den);
    }
    let mut nr = num.roots();
    let mut dr = den.roots();
    let mut cancelled = false;
    let mut i = 0;
    while i < nr.len() {
        let tol = 1e-6 * (1.0 + nr[i].norm());
        if let Some(j) = dr.iter().position(|d| (*d - nr[i]).norm() < tol) {
            dr.swap_remove(j);
            nr.swap_remove(i);
            cancelled = true;
        } else {
            i += 1;
        }
    }
    if !cancelled {
        return (num, den);
    }
    (Poly::from_roots(num.leading(), &nr), Poly::from_roots(den.leading(), &dr))
}
