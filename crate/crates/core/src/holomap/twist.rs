//! Flat `PSU(n+1)` bundles given by constant transition maps on cycle
//! generators, and their topological class in `Z_{n+1}`.
//!
//! On a torus the two transitions commute in `PSU(n+1)`. Their `SU(n+1)`
//! lifts commute up to a central element `exp(2πic/(n+1))·𝟙`; the integer
//! `c mod (n+1)` is the obstruction class. Individual lift signs are not
//! invariants, the commutator is.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mobius::MobiusMap;
use crate::error::{Error, Result};
use crate::C64;

/// Tolerance for the commutator being central and a root of unity.
pub const TWIST_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistData {
    n: usize,
    transitions: Vec<MobiusMap>,
    class: u32,
}

impl TwistData {
    /// The trivial bundle over any surface.
    pub fn trivial(n: usize) -> Self {
        TwistData { n, transitions: Vec::new(), class: 0 }
    }

    /// Torus transitions `M₁, M₂` along the two lattice generators.
    pub fn from_transitions(n: usize, m1: MobiusMap, m2: MobiusMap) -> Result<Self> {
        if m1.dim() != n + 1 || m2.dim() != n + 1 {
            return Err(Error::TwistInconsistent(format!("transitions must be {0}×{0}", n + 1)));
        }
        let class = commutator_class(&m1, &m2)?;
        Ok(TwistData { n, transitions: vec![m1, m2], class })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn transitions(&self) -> &[MobiusMap] {
        &self.transitions
    }

    /// Class `c ∈ Z_{n+1}`; zero for the trivial bundle.
    pub fn class(&self) -> u32 {
        self.class
    }

    pub fn order(&self) -> u32 {
        self.n as u32 + 1
    }

    pub fn is_trivial(&self) -> bool {
        self.transitions.iter().all(|m| m.is_identity(TWIST_TOL))
    }

    /// Genus-0 surfaces carry only the trivial bundle.
    pub fn check_genus(&self, genus: u32) -> Result<()> {
        match genus {
            0 if !self.transitions.is_empty() && !self.is_trivial() => Err(Error::NontrivialClassOnSphere),
            0 => Ok(()),
            1 if self.transitions.is_empty() || self.transitions.len() == 2 => Ok(()),
            1 => Err(Error::TwistInconsistent("a torus needs two transitions".into())),
            g => Err(Error::InvalidGeometry(format!("genus {g} domains are not supported"))),
        }
    }

    /// Lifted commutator `A B A⁻¹ B⁻¹` of the transitions.
    pub fn commutator(&self) -> Option<DMatrix<C64>> {
        match self.transitions.as_slice() {
            [m1, m2] => lifted_commutator(m1, m2).ok(),
            _ => None,
        }
    }

    /// Conjugate both transitions by a common matrix.
    pub fn conjugated(&self, u: &MobiusMap) -> Result<TwistData> {
        match self.transitions.as_slice() {
            [m1, m2] => {
                let inv = u.inverse();
                TwistData::from_transitions(self.n, u.compose(m1).compose(&inv), u.compose(m2).compose(&inv))
            }
            _ => Ok(self.clone()),
        }
    }
}

fn lifted_commutator(m1: &MobiusMap, m2: &MobiusMap) -> Result<DMatrix<C64>> {
    let a = m1.su_lift(TWIST_TOL)?;
    let b = m2.su_lift(TWIST_TOL)?;
    let ai = a.clone().try_inverse().expect("unimodular");
    let bi = b.clone().try_inverse().expect("unimodular");
    Ok(&a * &b * ai * bi)
}

/// The class `c` with commutator `exp(2πic/(n+1))·𝟙`.
pub fn commutator_class(m1: &MobiusMap, m2: &MobiusMap) -> Result<u32> {
    let comm = lifted_commutator(m1, m2)?;
    let dim = comm.nrows();
    let omega = comm.trace() / dim as f64;
    let off = (&comm - DMatrix::identity(dim, dim) * omega).norm();
    if off > TWIST_TOL * (dim as f64).sqrt() {
        return Err(Error::TwistInconsistent(format!("lifted commutator is not central (deviation {off:e})")));
    }
    let turns = omega.arg() * dim as f64 / (2.0 * PI);
    let c = turns.round().rem_euclid(dim as f64) as u32;
    let root = Complex64::from_polar(1.0, 2.0 * PI * c as f64 / dim as f64);
    if (omega - root).norm() > TWIST_TOL {
        return Err(Error::TwistInconsistent(format!("commutator scalar {omega} is not a root of unity")));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(re: f64, im: f64) -> C64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> MobiusMap {
        MobiusMap::from_coefficients(z(0.0, 0.0), z(1.0, 0.0), z(1.0, 0.0), z(0.0, 0.0)).unwrap()
    }

    fn pauli_z() -> MobiusMap {
        MobiusMap::from_coefficients(z(1.0, 0.0), z(0.0, 0.0), z(0.0, 0.0), z(-1.0, 0.0)).unwrap()
    }

    #[test]
    fn anticommuting_pair_has_nontrivial_class() {
        let t = TwistData::from_transitions(1, pauli_x(), pauli_z()).unwrap();
        assert_eq!(t.class(), 1);
        let comm = t.commutator().unwrap();
        assert!((comm + DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn commuting_pair_is_class_zero() {
        let t = TwistData::from_transitions(1, pauli_z(), pauli_z()).unwrap();
        assert_eq!(t.class(), 0);
        let id = MobiusMap::identity(2);
        assert_eq!(TwistData::from_transitions(1, id.clone(), id).unwrap().class(), 0);
    }

    #[test]
    fn clock_and_shift_generate_all_classes() {
        for n in 1..4usize {
            let dim = n + 1;
            let omega = Complex64::from_polar(1.0, 2.0 * PI / dim as f64);
            let clock = DMatrix::from_fn(dim, dim, |i, j| if i == j { omega.powu(i as u32) } else { z(0.0, 0.0) });
            let shift = DMatrix::from_fn(dim, dim, |i, j| if (j + 1) % dim == i { z(1.0, 0.0) } else { z(0.0, 0.0) });
            let mut power = DMatrix::identity(dim, dim);
            for k in 0..dim {
                let t = TwistData::from_transitions(
                    n,
                    MobiusMap::new(power.clone()).unwrap(),
                    MobiusMap::new(shift.clone()).unwrap(),
                );
                assert_eq!(t.unwrap().class() as usize, k, "n={n} k={k}");
                power = &power * &clock;
            }
        }
    }

    #[test]
    fn class_invariant_under_common_unitary_conjugation() {
        let t = TwistData::from_transitions(1, pauli_x(), pauli_z()).unwrap();
        let theta: f64 = 0.7;
        let u = MobiusMap::new(DMatrix::from_row_slice(
            2,
            2,
            &[z(theta.cos(), 0.0), z(0.0, theta.sin()), z(0.0, theta.sin()), z(theta.cos(), 0.0)],
        ))
        .unwrap();
        assert_eq!(t.conjugated(&u).unwrap().class(), 1);
    }

    #[test]
    fn non_isometric_or_noncommuting_rejected() {
        let dil = MobiusMap::from_coefficients(z(2.0, 0.0), z(0.0, 0.0), z(0.0, 0.0), z(1.0, 0.0)).unwrap();
        assert!(TwistData::from_transitions(1, dil, pauli_z()).is_err());
        let theta: f64 = 0.3;
        let rot = MobiusMap::new(DMatrix::from_row_slice(
            2,
            2,
            &[z(theta.cos(), 0.0), z(-theta.sin(), 0.0), z(theta.sin(), 0.0), z(theta.cos(), 0.0)],
        ))
        .unwrap();
        assert!(matches!(TwistData::from_transitions(1, rot, pauli_z()), Err(Error::TwistInconsistent(_))));
    }

    #[test]
    fn sphere_accepts_only_trivial() {
        assert!(TwistData::trivial(1).check_genus(0).is_ok());
        let t = TwistData::from_transitions(1, pauli_x(), pauli_z()).unwrap();
        assert_eq!(t.check_genus(0), Err(Error::NontrivialClassOnSphere));
        assert!(t.check_genus(1).is_ok());
    }
}
