//! Projective linear maps of `CPⁿ`.
//!
//! Matrices act on homogeneous vectors ordered `(1, w₁, …, wₙ)`, the same
//! ordering used for map components. For `n = 1` the textbook map
//! `w ↦ (aw + b)/(cw + d)` is therefore stored as `[[d, c], [b, a]]`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DMatrix<C64>", into = "DMatrix<C64>")]
pub struct MobiusMap {
    matrix: DMatrix<C64>,
}

impl TryFrom<DMatrix<C64>> for MobiusMap {
    type Error = Error;
    fn try_from(m: DMatrix<C64>) -> Result<Self> {
        MobiusMap::new(m)
    }
}

impl From<MobiusMap> for DMatrix<C64> {
    fn from(m: MobiusMap) -> Self {
        m.matrix
    }
}

fn c(re: f64) -> C64 {
    Complex64::new(re, 0.0)
}

/// Textbook Möbius matrix sending `(z1, z2, z3)` to `(0, 1, ∞)`.
fn to_standard_triple(z: [C64; 3]) -> Result<[C64; 4]> {
    let [z1, z2, z3] = z;
    if (z1 - z2).norm() == 0.0 || (z2 - z3).norm() == 0.0 || (z1 - z3).norm() == 0.0 {
        return Err(Error::DegenerateMap("coincident interpolation points".into()));
    }
    Ok([z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1)])
}

impl MobiusMap {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() < 2 {
            return Err(Error::DegenerateMap("Möbius matrix must be square of size ≥ 2".into()));
        }
        let scale = matrix.norm();
        let det = matrix.determinant();
        if scale.is_nan() || scale <= 0.0 || det.norm() <= 1e-12 * scale.powi(matrix.nrows() as i32) || !det.is_finite()
        {
            return Err(Error::DegenerateMap("singular Möbius matrix".into()));
        }
        Ok(MobiusMap { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        MobiusMap { matrix: DMatrix::identity(dim, dim) }
    }

    /// `w ↦ (aw + b)/(cw + d)`.
    pub fn from_coefficients(a: C64, b: C64, cc: C64, d: C64) -> Result<Self> {
        MobiusMap::new(DMatrix::from_row_slice(2, 2, &[d, cc, b, a]))
    }

    /// `(a, b, c, d)` of the textbook form; `n = 1` only.
    pub fn coefficients(&self) -> [C64; 4] {
        let m = &self.matrix;
        [m[(1, 1)], m[(1, 0)], m[(0, 1)], m[(0, 0)]]
    }

    /// The unique map with `src[i] ↦ dst[i]`, via cross ratios.
    pub fn from_three_points(src: [C64; 3], dst: [C64; 3]) -> Result<Self> {
        let a = to_standard_triple(src)?;
        let b = to_standard_triple(dst)?;
        // M = B⁻¹A in textbook form
        let (ba, bb, bc, bd) = (b[0], b[1], b[2], b[3]);
        let binv = [bd, -bb, -bc, ba];
        let m = [
            binv[0] * a[0] + binv[1] * a[2],
            binv[0] * a[1] + binv[1] * a[3],
            binv[2] * a[0] + binv[3] * a[2],
            binv[2] * a[1] + binv[3] * a[3],
        ];
        MobiusMap::from_coefficients(m[0], m[1], m[2], m[3])
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Action on `CP¹`; non-finite input stands for `∞`.
    pub fn apply(&self, w: C64) -> C64 {
        let [a, b, cc, d] = self.coefficients();
        if !w.is_finite() {
            return if cc.norm() == 0.0 { Complex64::new(f64::INFINITY, 0.0) } else { a / cc };
        }
        let den = cc * w + d;
        if den.norm() == 0.0 {
            return Complex64::new(f64::INFINITY, 0.0);
        }
        (a * w + b) / den
    }

    /// Action on the affine chart of `CPⁿ`.
    pub fn apply_affine(&self, w: &[C64]) -> Vec<C64> {
        let v = self.apply_homogeneous(&std::iter::once(c(1.0)).chain(w.iter().copied()).collect::<Vec<_>>());
        v[1..].iter().map(|x| x / v[0]).collect()
    }

    pub fn apply_homogeneous(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)] * v[j]).sum()).collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        MobiusMap { matrix: &self.matrix * &other.matrix }
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap { matrix: self.matrix.clone().try_inverse().expect("nonsingular by construction") }
    }

    /// Representative with determinant one (principal root).
    pub fn normalized(&self) -> DMatrix<C64> {
        let n = self.dim() as f64;
        let det = self.matrix.determinant();
        let root = det.powf(1.0 / n);
        &self.matrix / root
    }

    /// True when the matrix is a scalar multiple of the identity.
    pub fn is_identity(&self, tol: f64) -> bool {
        let n = self.dim();
        let t = self.matrix.trace() / n as f64;
        let diff = &self.matrix - DMatrix::identity(n, n) * t;
        diff.norm() <= tol * t.norm() * (n as f64).sqrt()
    }

    /// True when the projective class lies in `PSU(n+1)`.
    pub fn is_unitarizable(&self, tol: f64) -> bool {
        let n = self.dim();
        let p = &self.matrix * self.matrix.adjoint();
        let t = p.trace() / n as f64;
        let diff = &p - DMatrix::identity(n, n) * t;
        diff.norm() <= tol * t.norm() * (n as f64).sqrt()
    }

    /// Lift to `SU(n+1)`, defined up to an `(n+1)`-th root of unity.
    pub fn su_lift(&self, tol: f64) -> Result<DMatrix<C64>> {
        if !self.is_unitarizable(tol) {
            return Err(Error::TwistInconsistent("transition is not an isometry of the target".into()));
        }
        Ok(self.normalized())
    }
}
