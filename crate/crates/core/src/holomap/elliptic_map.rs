//! Elliptic maps `C/Λ → CP¹` built from `℘` and `℘'`.
//!
//! The expression lives on the function lattice `Λ`; the domain torus may be
//! a quotient by a coarser sublattice `Λ' ⊃ Λ`, in which case the map is a
//! section of a flat `CP¹` bundle described by [`TwistData`].

use serde::{Deserialize, Serialize};

use super::expr::Expr;
use super::mobius::MobiusMap;
use super::twist::TwistData;
use super::Jet;
use crate::elliptic::{chordal, half_period_mobius, lattice_invariants, Lattice, Shift, WeierstrassData};
use crate::error::{Error, Result};
use crate::C64;

use num_complex::Complex64;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawElliptic", into = "RawElliptic")]
pub struct EllipticMap {
    expr: Expr,
    data: WeierstrassData,
    domain: Lattice,
}

#[derive(Serialize, Deserialize)]
struct RawElliptic {
    expr: Expr,
    lattice: Lattice,
    domain: Lattice,
}

impl TryFrom<RawElliptic> for EllipticMap {
    type Error = Error;
    fn try_from(raw: RawElliptic) -> Result<Self> {
        EllipticMap::new(raw.expr, raw.lattice)?.with_domain(raw.domain)
    }
}

impl From<EllipticMap> for RawElliptic {
    fn from(m: EllipticMap) -> Self {
        RawElliptic { expr: m.expr, lattice: m.data.lattice, domain: m.domain }
    }
}

impl PartialEq for EllipticMap {
    fn eq(&self, other: &Self) -> bool {
        self.expr == other.expr && self.data.lattice == other.data.lattice && self.domain == other.domain
    }
}

impl EllipticMap {
    pub fn new(expr: Expr, lattice: Lattice) -> Result<Self> {
        if expr.uses_z() {
            return Err(Error::Parse("elliptic expressions may not use z directly".into()));
        }
        if !expr.uses_elliptic() {
            return Err(Error::DegenerateMap("constant map".into()));
        }
        let data = lattice_invariants(&lattice)?;
        Ok(EllipticMap { expr, data, domain: lattice })
    }

    pub fn parse(src: &str, lattice: Lattice) -> Result<Self> {
        EllipticMap::new(Expr::parse(src)?, lattice)
    }

    /// Same expression viewed on the domain torus `C/domain`.
    pub fn with_domain(mut self, domain: Lattice) -> Result<Self> {
        // each function-lattice generator must be an integer combination of the domain generators
        for w in [self.data.lattice.omega1(), self.data.lattice.omega2()] {
            let (s, t) = domain.coords(w);
            if (s - s.round()).abs() > 1e-9 || (t - t.round()).abs() > 1e-9 {
                return Err(Error::InvalidGeometry("function lattice is not a sublattice of the domain".into()));
            }
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn data(&self) -> &WeierstrassData {
        &self.data
    }

    /// Period lattice of the expression.
    pub fn lattice(&self) -> &Lattice {
        &self.data.lattice
    }

    /// Period lattice of the domain torus.
    pub fn domain(&self) -> &Lattice {
        &self.domain
    }

    /// `(ψ(z), ψ'(z))`.
    pub fn eval(&self, z: C64) -> Result<(C64, C64)> {
        self.expr.eval_elliptic(&self.data, z)
    }

    pub fn jet(&self, z: C64) -> Result<Jet> {
        let (v, d) = self.eval(z)?;
        let one = Complex64::new(1.0, 0.0);
        Ok(Jet::from_homogeneous(&[one, v], &[Complex64::new(0.0, 0.0), d]))
    }

    /// Degree as a map to `CP¹`: `(1/π)∫|ψ'|²/(1+|ψ|²)² dA` over the function cell.
    ///
    /// The target is first rescaled by the geometric mean of `|ψ|` so the
    /// integrand is not concentrated in tiny disks; the grid doubles until the
    /// value is integral.
    pub fn degree(&self) -> Result<usize> {
        let lat = self.data.lattice;
        let mut n = 64;
        loop {
            let vals = (0..n * n)
                .map(|k| self.eval(lat.point(((k / n) as f64 + 0.5) / n as f64, ((k % n) as f64 + 0.5) / n as f64)))
                .collect::<Result<Vec<_>>>()?;
            let log_mean =
                vals.iter().map(|(v, _)| v.norm().max(f64::MIN_POSITIVE).ln()).sum::<f64>() / vals.len() as f64;
            let s = log_mean.exp();
            let total: f64 = vals
                .iter()
                .map(|(v, d)| {
                    let (v, d) = (v / s, d / s);
                    if v.norm() <= 1.0 {
                        d.norm_sqr() / (1.0 + v.norm_sqr()).powi(2)
                    } else {
                        // chart at infinity: w = 1/v
                        (d / (v * v)).norm_sqr() / (1.0 + v.inv().norm_sqr()).powi(2)
                    }
                })
                .sum();
            let deg = total * lat.area() / (n * n) as f64 / std::f64::consts::PI;
            if (deg - deg.round()).abs() < 1e-6 {
                return Ok(deg.round() as usize);
            }
            if n >= 512 {
                return Err(Error::DegenerateMap(format!("non-integral degree {deg}")));
            }
            n *= 2;
        }
    }

    /// `M ∘ ψ` as a new expression.
    pub fn post_compose(&self, m: &MobiusMap) -> Result<Self> {
        if m.dim() != 2 {
            return Err(Error::DegenerateMap("elliptic maps target CP¹".into()));
        }
        let [a, b, cc, d] = m.coefficients();
        let e = || self.expr.clone();
        let num = Expr::Const(a) * e() + Expr::Const(b);
        let den = Expr::Const(cc) * e() + Expr::Const(d);
        EllipticMap::new(num / den, self.data.lattice)?.with_domain(self.domain)
    }

    /// Check `ψ(z + ωᵢ) = Mᵢ(ψ(z))` for the domain generators at generic points.
    pub fn check_twist(&self, twist: &TwistData) -> Result<f64> {
        let identity = MobiusMap::identity(2);
        let maps: [&MobiusMap; 2] = match twist.transitions() {
            [] => [&identity, &identity],
            [m1, m2] => [m1, m2],
            _ => return Err(Error::TwistInconsistent("a torus needs two transitions".into())),
        };
        let shifts = [self.domain.omega1(), self.domain.omega2()];
        let mut worst: f64 = 0.0;
        for k in 0..12 {
            let z = self.domain.point((0.137 + 0.283 * k as f64).fract(), (0.059 + 0.411 * k as f64).fract());
            let base = self.eval(z)?.0;
            for (m, shift) in maps.iter().zip(shifts) {
                let moved = self.eval(z + shift)?.0;
                worst = worst.max(chordal(m.apply(base), moved));
            }
        }
        if worst > 1e-9 {
            return Err(Error::TwistInconsistent(format!("transition mismatch {worst:e}")));
        }
        Ok(worst)
    }
}

/// Olesen's symmetric map `ψ₄ = (℘ - e₃)/√((e₃-e₁)(e₂-e₃))` on a rectangle.
pub fn olesen_map(lat: &Lattice) -> Result<EllipticMap> {
    if !lat.is_rectangular(1e-12) {
        return Err(Error::NonRectangular(format!("periods {} and {}", lat.omega1(), lat.omega2())));
    }
    let data = lattice_invariants(lat)?;
    let s = ((data.e3 - data.e1) * (data.e2 - data.e3)).sqrt();
    let expr = (Expr::Wp - Expr::Const(data.e3)) / Expr::Const(s);
    EllipticMap::new(expr, *lat)
}

/// Restrict a map on `C/Λ` to the quarter cell `C/(½Λ)` together with the
/// half-period transitions.
pub fn quarter_cell_restriction(map: &EllipticMap) -> Result<(EllipticMap, TwistData)> {
    let lat = *map.lattice();
    let m1 = half_period_mobius_for(map, Shift::Half1)?;
    let m2 = half_period_mobius_for(map, Shift::Half2)?;
    let twist = TwistData::from_transitions(1, m1, m2)?;
    let restricted = map.clone().with_domain(lat.refined(2.0, 2.0))?;
    restricted.check_twist(&twist)?;
    Ok((restricted, twist))
}

/// Transitions along full periods; the trivial-twist control.
pub fn full_period_twist(map: &EllipticMap) -> Result<TwistData> {
    let m1 = half_period_mobius_for(map, Shift::Full1)?;
    let m2 = half_period_mobius_for(map, Shift::Full2)?;
    TwistData::from_transitions(1, m1, m2)
}

fn half_period_mobius_for(map: &EllipticMap, shift: Shift) -> Result<MobiusMap> {
    let olesen = olesen_map(map.lattice())?;
    if olesen != *map && olesen.expr() != map.expr() {
        return Err(Error::Precondition("quarter-cell restriction expects the Olesen map".into()));
    }
    half_period_mobius(map.data(), shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        Complex64::new(re, im)
    }

    /// Number of poles in the cell via the argument principle on `1/ψ`.
    fn contour_pole_count(m: &EllipticMap) -> f64 {
        // contour: boundary of a shifted cell so that no pole or zero sits on it
        let lat = *m.lattice();
        let origin = lat.point(-0.0731, -0.0419);
        let corners = [origin, origin + lat.omega1(), origin + lat.omega1() + lat.omega2(), origin + lat.omega2()];
        let steps = 4000;
        let mut phase = 0.0;
        let mut prev = m.eval(corners[0]).unwrap().0.arg();
        for side in 0..4 {
            let (a, b) = (corners[side], corners[(side + 1) % 4]);
            for k in 1..=steps {
                let z = a + (b - a) * (k as f64 / steps as f64);
                let arg = m.eval(z).unwrap().0.arg();
                let mut d = arg - prev;
                while d > PI {
                    d -= 2.0 * PI;
                }
                while d < -PI {
                    d += 2.0 * PI;
                }
                phase += d;
                prev = arg;
            }
        }
        // zeros minus poles of ψ - 17 equals zero for elliptic functions; count
        // poles instead through ψ winding of ψ - a at a value not attained on the contour
        phase / (2.0 * PI)
    }

    #[test]
    fn olesen_degree_two() {
        let lat = Lattice::rectangle(1.0, 1.0).unwrap();
        let m = olesen_map(&lat).unwrap();
        assert_eq!(m.degree().unwrap(), 2);
        // elliptic functions have as many zeros as poles: contour winding vanishes
        assert!(contour_pole_count(&m).abs() < 1e-6);
    }

    #[test]
    fn pole_count_oracle_on_small_disks() {
        // count poles of ψ as winding of 1/ψ around small circles at lattice points
        for (src, expected) in [("wp", 2), ("wpp", 3), ("(wp - 1)/(wp + 2)", 2)] {
            let lat = Lattice::rectangle(1.0, 1.4).unwrap();
            let m = EllipticMap::parse(src, lat).unwrap();
            assert_eq!(m.degree().unwrap(), expected, "{src}");
        }
    }

    #[test]
    fn wp_prime_pole_order_by_winding() {
        let lat = Lattice::rectangle(1.0, 1.0).unwrap();
        let m = EllipticMap::parse("wpp", lat).unwrap();
        let r = 0.05;
        let steps = 2000;
        let mut phase = 0.0;
        let mut prev = (1.0 / m.eval(c(r, 0.0)).unwrap().0).arg();
        for k in 1..=steps {
            let z = Complex64::from_polar(r, 2.0 * PI * k as f64 / steps as f64);
            let arg = (1.0 / m.eval(z).unwrap().0).arg();
            let mut d = arg - prev;
            d -= 2.0 * PI * (d / (2.0 * PI)).round();
            phase += d;
            prev = arg;
        }
        assert!((phase / (2.0 * PI) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn olesen_rejects_skew_lattice() {
        let lat = Lattice::new(c(1.0, 0.0), c(0.3, 1.0)).unwrap();
        assert!(matches!(olesen_map(&lat), Err(Error::NonRectangular(_))));
    }

    #[test]
    fn olesen_not_half_periodic() {
        let lat = Lattice::rectangle(1.0, 1.0).unwrap();
        let m = olesen_map(&lat).unwrap();
        let z = c(0.21, 0.33);
        let a = m.eval(z).unwrap().0;
        let b = m.eval(z + 0.5).unwrap().0;
        assert!((a - b).norm() > 0.1);
    }

    #[test]
    fn quarter_cell_twist_class() {
        let lat = Lattice::rectangle(1.0, 1.0).unwrap();
        let m = olesen_map(&lat).unwrap();
        let (q, twist) = quarter_cell_restriction(&m).unwrap();
        assert_eq!(twist.class(), 1);
        let comm = twist.commutator().unwrap();
        assert!((comm + nalgebra::DMatrix::identity(2, 2)).norm() < 1e-9);
        assert!((q.domain().omega1() - c(0.5, 0.0)).norm() < 1e-15);
        let control = full_period_twist(&m).unwrap();
        assert_eq!(control.class(), 0);
        assert!(control.is_trivial());
    }

    #[test]
    fn square_lattice_half_period_matrices() {
        // on the square lattice the half-period maps are [[1,1],[1,-1]] and [[-1,1],[1,1]] projectively
        let lat = Lattice::rectangle(1.0, 1.0).unwrap();
        let m = olesen_map(&lat).unwrap();
        let (_, twist) = quarter_cell_restriction(&m).unwrap();
        let expect = [
            MobiusMap::from_coefficients(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)).unwrap(),
            MobiusMap::from_coefficients(c(-1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)).unwrap(),
        ];
        for (got, want) in twist.transitions().iter().zip(&expect) {
            assert!(got.compose(&want.inverse()).is_identity(1e-9));
        }
    }

    #[test]
    fn post_composition_matches_pointwise() {
        let lat = Lattice::rectangle(1.0, 2.0).unwrap();
        let m = olesen_map(&lat).unwrap();
        let mob = MobiusMap::from_coefficients(c(2.0, 0.0), c(0.0, 1.0), c(0.5, 0.0), c(1.0, 0.0)).unwrap();
        let comp = m.post_compose(&mob).unwrap();
        let z = c(0.31, 0.77);
        assert!((comp.eval(z).unwrap().0 - mob.apply(m.eval(z).unwrap().0)).norm() < 1e-10);
        assert_eq!(comp.degree().unwrap(), 2);
    }

    #[test]
    fn json_round_trip() {
        let m = olesen_map(&Lattice::rectangle(1.0, 1.5).unwrap()).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: EllipticMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
