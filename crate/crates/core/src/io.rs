//! Serializable run inputs and CSV field grids.
//!
//! A [`VerifySpec`] names a map, the domain metric and the target curvature;
//! [`VerifySpec::setup`] turns it into the objects the field builders take.
//! Field grids are written one row per quadrature point with the columns of
//! [`FieldRow`].

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::Lattice;
use crate::error::{Error, Result};
use crate::holomap::Expr;
use crate::holomap::{olesen_map, quarter_cell_restriction, EllipticMap, HolomorphicMap, Poly, RationalMap, TwistData};
use crate::spaceform::SpaceFormTarget;
use crate::surface::{Chart, SurfaceGeometry, SurfacePoint};
use crate::vortex::{build_abelian, build_nonabelian, VortexField};

/// Map description. Expressions use the grammar of [`Expr`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    /// `ψ = expr(z)` into `CP¹`.
    Rational { expr: String },
    /// `z ↦ (p₁(z), …, pₙ(z))` in the affine chart of `CPⁿ`.
    Polynomial { components: Vec<String> },
    /// `ψ = expr(℘, ℘')` on `C/lattice`.
    Elliptic { expr: String, lattice: Lattice },
    /// Olesen's symmetric degree-2 map on a rectangle.
    Olesen { lattice: Lattice },
    /// The Olesen map on the quarter cell with its half-period twist.
    QuarterCell { lattice: Lattice },
}

fn default_one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySpec {
    pub map: MapSpec,
    /// Holomorphic sectional curvature of the target.
    #[serde(default = "default_one")]
    pub kappa: f64,
    /// Sphere curvature; ignored on a torus.
    #[serde(default = "default_one")]
    pub kappa0: f64,
    /// Constant metric density on a torus; ignored on the sphere.
    #[serde(default = "default_one")]
    pub density: f64,
}

/// Everything a field builder needs.
#[derive(Clone, Debug)]
pub struct Setup {
    pub map: HolomorphicMap,
    pub twist: TwistData,
    pub geom: SurfaceGeometry,
    pub target: SpaceFormTarget,
}

fn polynomial(src: &str) -> Result<Poly> {
    let expr = Expr::parse(src)?;
    if expr.uses_elliptic() {
        return Err(Error::Parse(format!("`{src}` is not a polynomial in z")));
    }
    let (num, den) = expr.to_rational()?;
    if den.degree() != Some(0) {
        return Err(Error::Parse(format!("`{src}` is not a polynomial in z")));
    }
    Ok(num.scale(Complex64::new(1.0, 0.0) / den.leading()))
}

impl MapSpec {
    /// Map and twist; the domain lattice for torus maps is the map's domain.
    pub fn build(&self) -> Result<(HolomorphicMap, TwistData)> {
        Ok(match self {
            MapSpec::Rational { expr } => (RationalMap::parse(expr)?.into(), TwistData::trivial(1)),
            MapSpec::Polynomial { components } => {
                let polys = components.iter().map(|c| polynomial(c)).collect::<Result<Vec<_>>>()?;
                let n = polys.len();
                (RationalMap::polynomial(polys)?.into(), TwistData::trivial(n))
            }
            MapSpec::Elliptic { expr, lattice } => (EllipticMap::parse(expr, *lattice)?.into(), TwistData::trivial(1)),
            MapSpec::Olesen { lattice } => (olesen_map(lattice)?.into(), TwistData::trivial(1)),
            MapSpec::QuarterCell { lattice } => {
                let (m, t) = quarter_cell_restriction(&olesen_map(lattice)?)?;
                (m.into(), t)
            }
        })
    }
}

impl VerifySpec {
    pub fn new(map: MapSpec) -> Self {
        VerifySpec { map, kappa: 1.0, kappa0: 1.0, density: 1.0 }
    }

    pub fn setup(&self) -> Result<Setup> {
        let (map, twist) = self.map.build()?;
        let geom = match &map {
            HolomorphicMap::Rational(_) => SurfaceGeometry::sphere(self.kappa0)?,
            HolomorphicMap::Elliptic(e) => SurfaceGeometry::torus_with_density(*e.domain(), self.density)?,
        };
        let target = SpaceFormTarget::new(map.n(), self.kappa)?;
        Ok(Setup { map, twist, geom, target })
    }
}

impl Setup {
    /// Abelian construction for `n = 1`, matrix construction otherwise.
    pub fn build_field(&self, resolution: usize) -> Result<VortexField> {
        if self.target.n() == 1 {
            build_abelian(&self.map, &self.twist, &self.geom, &self.target, resolution)
        } else {
            build_nonabelian(&self.map, &self.twist, &self.geom, &self.target, resolution)
        }
    }
}

/// One quadrature point of a field grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    /// `north`, `south` or `cell`.
    pub chart: String,
    pub x: f64,
    pub y: f64,
    /// Quadrature weight including the metric factor.
    pub weight: f64,
    pub rho: f64,
    /// Trace of the magnetic field.
    pub b: f64,
}

fn chart_name(c: Chart) -> &'static str {
    match c {
        Chart::North => "north",
        Chart::South => "south",
        Chart::Cell => "cell",
    }
}

impl FieldRow {
    pub fn point(&self) -> Result<SurfacePoint> {
        let z = Complex64::new(self.x, self.y);
        match self.chart.as_str() {
            "north" => Ok(SurfacePoint::north(z)),
            "south" => Ok(SurfacePoint::south(z)),
            "cell" => Ok(SurfacePoint::cell(z)),
            other => Err(Error::Parse(format!("unknown chart `{other}`"))),
        }
    }
}

pub fn field_rows(field: &VortexField) -> Vec<FieldRow> {
    let g = field.grid();
    g.points
        .iter()
        .zip(&g.weights)
        .zip(field.rho().iter().zip(field.b()))
        .map(|((p, &weight), (&rho, &b))| FieldRow {
            chart: chart_name(p.chart).into(),
            x: p.z.re,
            y: p.z.im,
            weight,
            rho,
            b,
        })
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// Header `chart,x,y,weight,rho,b`, then one row per point.
pub fn write_field_csv<W: Write>(field: &VortexField, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in field_rows(field) {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(format!("csv: {e}")))
}

pub fn read_field_csv<R: Read>(input: R) -> Result<Vec<FieldRow>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(csv_err)).collect()
}

pub fn from_json<T: serde::de::DeserializeOwned>(src: &str) -> Result<T> {
    serde_json::from_str(src).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uniformize::ConformalProblem;

    fn square() -> Lattice {
        Lattice::rectangle(1.0, 1.0).unwrap()
    }

    #[test]
    fn map_spec_json_roundtrip() {
        let specs = [
            MapSpec::Rational { expr: "z^2".into() },
            MapSpec::Polynomial { components: vec!["z".into(), "z^2".into()] },
            MapSpec::Elliptic { expr: "wpp/10".into(), lattice: square() },
            MapSpec::Olesen { lattice: square() },
            MapSpec::QuarterCell { lattice: square() },
        ];
        for s in specs {
            let v = VerifySpec::new(s);
            let back: VerifySpec = from_json(&serde_json::to_string(&v).unwrap()).unwrap();
            assert_eq!(back, v);
        }
    }

    #[test]
    fn defaults_fill_in() {
        let v: VerifySpec = from_json(r#"{"map":{"kind":"rational","expr":"z"}}"#).unwrap();
        assert_eq!((v.kappa, v.kappa0, v.density), (1.0, 1.0, 1.0));
        let v: VerifySpec =
            from_json(r#"{"map":{"kind":"olesen","lattice":{"omega1":[1,0],"omega2":[0,1]}},"kappa":2}"#).unwrap();
        assert_eq!(v.map, MapSpec::Olesen { lattice: square() });
        assert_eq!(v.kappa, 2.0);
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(from_json::<VerifySpec>("{").unwrap_err().is_parse());
        assert!(from_json::<VerifySpec>(r#"{"map":{"kind":"moebius"}}"#).unwrap_err().is_parse());
        // a degenerate lattice fails inside deserialisation
        let bad = r#"{"map":{"kind":"olesen","lattice":{"omega1":[1,0],"omega2":[2,0]}}}"#;
        assert!(from_json::<VerifySpec>(bad).is_err());
    }

    #[test]
    fn setups_pick_the_right_surface() {
        let s = VerifySpec::new(MapSpec::Polynomial { components: vec!["z".into(), "z^2".into()] }).setup().unwrap();
        assert_eq!(s.target.n(), 2);
        assert_eq!(s.twist.n(), 2);
        assert_eq!(s.geom.genus(), 0);
        let s = VerifySpec::new(MapSpec::QuarterCell { lattice: square() }).setup().unwrap();
        assert_eq!(s.geom.genus(), 1);
        assert!((s.geom.volume() - 0.25).abs() < 1e-12);
        assert_eq!(s.twist.class(), 1);
    }

    #[test]
    fn polynomial_components_reject_fractions() {
        let spec = MapSpec::Polynomial { components: vec!["1/z".into()] };
        assert!(spec.build().unwrap_err().is_parse());
        assert_eq!(polynomial("(2z^2+4)/2").unwrap(), Poly::from_real(&[2.0, 0.0, 1.0]));
    }

    #[test]
    fn field_csv_roundtrip() {
        let setup = VerifySpec::new(MapSpec::Rational { expr: "z^2".into() }).setup().unwrap();
        let f = setup.build_field(16).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("chart,x,y,weight,rho,b\n"));
        let rows = read_field_csv(buf.as_slice()).unwrap();
        assert_eq!(rows, field_rows(&f));
        assert_eq!(rows[0].point().unwrap(), f.points()[0]);
        // quadrature of B reproduces the flux
        let flux: f64 = rows.iter().map(|r| r.weight * r.b).sum::<f64>() / (2.0 * std::f64::consts::PI);
        assert!((flux - f.flux()).abs() < 1e-9);
    }

    #[test]
    fn problem_json_roundtrip() {
        let p = ConformalProblem::from_fn(square(), 8, |z| z.re.sin()).unwrap();
        let back: ConformalProblem = from_json(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        let no_kappa = r#"{"lattice":{"omega1":[1,0],"omega2":[0,1]},"log_density":[0,0,0,0],"resolution":2}"#;
        assert_eq!(from_json::<ConformalProblem>(no_kappa).unwrap().kappa0, 0.0);
    }
}
