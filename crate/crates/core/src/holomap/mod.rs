//! Holomorphic maps from the domain surface into `CPⁿ`, possibly twisted by a
//! flat `PSU(n+1)` bundle.
//!
//! Homogeneous vectors are ordered `(1, w₁, …, wₙ)` throughout. A [`Jet`]
//! records the value and `z`-derivative of a map in the affine target chart
//! where the largest homogeneous component is normalised to one, so values
//! stay bounded near poles.

mod elliptic_map;
mod expr;
mod mobius;
mod poly;
mod rational;
mod twist;

pub use elliptic_map::{full_period_twist, olesen_map, quarter_cell_restriction, EllipticMap};
pub use expr::Expr;
pub use mobius::MobiusMap;
pub use poly::Poly;
pub use rational::RationalMap;
pub use twist::{commutator_class, TwistData, TWIST_TOL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::{Chart, SurfaceGeometry, SurfaceKind, SurfacePoint};
use crate::C64;

/// First-order data of a map at a point.
///
/// `chart = j` means the target chart `{P_j ≠ 0}`; `w` lists `P_m/P_j` for
/// `m ≠ j` in ascending order and `dw` their `z`-derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub chart: usize,
    pub w: Vec<C64>,
    pub dw: Vec<C64>,
}

impl Jet {
    pub fn from_homogeneous(v: &[C64], dv: &[C64]) -> Jet {
        let chart = v.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).map(|(j, _)| j).unwrap_or(0);
        Jet::in_chart(v, dv, chart)
    }

    /// Jet in a prescribed target chart; stencils keep one chart across points.
    pub fn in_chart(v: &[C64], dv: &[C64], chart: usize) -> Jet {
        let pj = v[chart];
        let dpj = dv[chart];
        let (w, dw) =
            (0..v.len()).filter(|&m| m != chart).map(|m| (v[m] / pj, (dv[m] * pj - v[m] * dpj) / (pj * pj))).unzip();
        Jet { chart, w, dw }
    }

    /// Affine coordinates in the standard chart `{P₀ ≠ 0}`, if finite.
    pub fn standard_value(&self) -> Option<Vec<C64>> {
        if self.chart == 0 {
            return Some(self.w.clone());
        }
        // w[chart - 1] stands for P_0/P_j
        let p0 = self.w[0];
        if p0.norm() == 0.0 {
            return None;
        }
        let n = self.w.len();
        Some(
            (1..=n)
                .map(|m| {
                    if m == self.chart {
                        C64::new(1.0, 0.0) / p0
                    } else {
                        self.w[if m < self.chart { m } else { m - 1 }] / p0
                    }
                })
                .collect(),
        )
    }
}

/// A holomorphic map from the sphere or a torus into `CPⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)] // built once per field, never stored in bulk
pub enum HolomorphicMap {
    Rational(RationalMap),
    Elliptic(EllipticMap),
}

impl HolomorphicMap {
    pub fn n(&self) -> usize {
        match self {
            HolomorphicMap::Rational(m) => m.n(),
            HolomorphicMap::Elliptic(_) => 1,
        }
    }

    /// Domain surface kind the map lives on.
    pub fn domain_kind(&self) -> SurfaceKind {
        match self {
            HolomorphicMap::Rational(_) => SurfaceKind::Sphere,
            HolomorphicMap::Elliptic(_) => SurfaceKind::Torus,
        }
    }

    /// Homogeneous components and their `z`-derivatives at `p`.
    pub fn homogeneous(&self, p: &SurfacePoint) -> Result<(Vec<C64>, Vec<C64>)> {
        match (self, p.chart) {
            (HolomorphicMap::Rational(m), _) => m.homogeneous(p),
            (HolomorphicMap::Elliptic(m), Chart::Cell) => {
                let (v, d) = m.eval(p.z)?;
                Ok((vec![C64::new(1.0, 0.0), v], vec![C64::new(0.0, 0.0), d]))
            }
            (HolomorphicMap::Elliptic(_), _) => Err(Error::InvalidGeometry("elliptic maps live on a torus".into())),
        }
    }

    pub fn jet(&self, p: &SurfacePoint) -> Result<Jet> {
        match (self, p.chart) {
            (HolomorphicMap::Rational(m), _) => m.jet(p),
            (HolomorphicMap::Elliptic(m), Chart::Cell) => m.jet(p.z),
            (HolomorphicMap::Elliptic(_), _) => Err(Error::InvalidGeometry("elliptic maps live on a torus".into())),
        }
    }

    pub fn degree(&self) -> Result<usize> {
        match self {
            HolomorphicMap::Rational(m) => Ok(m.degree()),
            HolomorphicMap::Elliptic(m) => m.degree(),
        }
    }

    pub fn post_compose(&self, m: &MobiusMap) -> Result<HolomorphicMap> {
        Ok(match self {
            HolomorphicMap::Rational(r) => HolomorphicMap::Rational(r.post_compose(m)?),
            HolomorphicMap::Elliptic(e) => HolomorphicMap::Elliptic(e.post_compose(m)?),
        })
    }

    /// Reject map, twist and surface combinations that do not fit together.
    pub fn check_compatible(&self, twist: &TwistData, geom: &SurfaceGeometry) -> Result<()> {
        if self.domain_kind() != geom.kind() {
            return Err(Error::Precondition(format!("{:?} map on a {:?} domain", self.domain_kind(), geom.kind())));
        }
        if twist.n() != self.n() {
            return Err(Error::TwistInconsistent(format!(
                "twist acts on CP^{} but the map targets CP^{}",
                twist.n(),
                self.n()
            )));
        }
        twist.check_genus(geom.genus())?;
        if let (HolomorphicMap::Elliptic(e), Some(lat)) = (self, geom.lattice()) {
            if (e.domain().omega1() - lat.omega1()).norm() > 1e-12
                || (e.domain().omega2() - lat.omega2()).norm() > 1e-12
            {
                return Err(Error::Precondition("map domain lattice differs from the surface lattice".into()));
            }
            e.check_twist(twist)?;
        }
        Ok(())
    }
}

impl From<RationalMap> for HolomorphicMap {
    fn from(m: RationalMap) -> Self {
        HolomorphicMap::Rational(m)
    }
}

impl From<EllipticMap> for HolomorphicMap {
    fn from(m: EllipticMap) -> Self {
        HolomorphicMap::Elliptic(m)
    }
}

/// `∂ψ/∂z` at `p` in the target chart chosen by the jet. Constant transitions
/// make the covariant derivative the plain derivative in any trivialisation.
pub fn differential(map: &HolomorphicMap, twist: &TwistData, geom: &SurfaceGeometry, p: &SurfacePoint) -> Result<Jet> {
    map.check_compatible(twist, geom)?;
    map.jet(p)
}

pub fn map_degree(map: &HolomorphicMap) -> Result<usize> {
    map.degree()
}
