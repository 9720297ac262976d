//! Dense complex polynomials with Aberth–Ehrlich root finding.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::C64;

/// Coefficients in ascending order; trailing zeros are trimmed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Poly::new(vec![c])
    }

    /// The identity polynomial `z`.
    pub fn z() -> Self {
        Poly::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `lead · Π (z - rᵢ)`.
    pub fn from_roots(lead: C64, roots: &[C64]) -> Self {
        let mut p = Poly::constant(lead);
        for &r in roots {
            p = p.mul(&Poly::new(vec![-r, Complex64::new(1.0, 0.0)]));
        }
        p
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `(p(z), p'(z))` by Horner.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let zero = Complex64::new(0.0, 0.0);
        self.coeffs.iter().rev().fold((zero, zero), |(p, dp), &c| (p * z + c, dp * z + p))
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Poly, k: usize| p.coeffs.get(k).copied().unwrap_or_default();
        Poly::new((0..n).map(|k| get(self, k) + get(other, k)).collect())
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::constant(Complex64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    /// `ζᵈ p(1/ζ)`: the polynomial in the chart at infinity for a map of degree `d`.
    pub fn reversed(&self, d: usize) -> Poly {
        let mut c = self.coeffs.clone();
        c.resize(d + 1, Complex64::new(0.0, 0.0));
        c.reverse();
        Poly::new(c)
    }

    /// Sum of absolute coefficient values.
    pub fn l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// All complex roots, by simultaneous Aberth–Ehrlich iteration followed by
    /// a Newton polish.
    pub fn roots(&self) -> Vec<C64> {
        let Some(d) = self.degree() else { return Vec::new() };
        if d == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let monic: Vec<C64> = self.coeffs.iter().map(|c| c / lead).collect();
        let monic = Poly { coeffs: monic };
        let deriv = monic.derivative();
        // Cauchy bound for the initial circle
        let radius = 1.0 + monic.coeffs[..d].iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let mut z: Vec<C64> = (0..d)
            .map(|k| {
                Complex64::from_polar(0.5 * radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / d as f64 + 0.4)
            })
            .collect();
        for _ in 0..500 {
            let mut moved = 0.0f64;
            for i in 0..d {
                let p = monic.eval(z[i]);
                if p.norm() == 0.0 {
                    continue;
                }
                let ratio = p / deriv.eval(z[i]);
                let repel: C64 = (0..d).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
                let step = ratio / (1.0 - ratio * repel);
                if step.is_finite() {
                    z[i] -= step;
                    moved = moved.max(step.norm() / (1.0 + z[i].norm()));
                }
            }
            if moved < 1e-15 {
                break;
            }
        }
        for r in z.iter_mut() {
            for _ in 0..3 {
                let (p, dp) = monic.eval_with_derivative(*r);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                if !step.is_finite() || step.norm() > 1e-6 * (1.0 + r.norm()) {
                    break;
                }
                *r -= step;
            }
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluation_and_derivative() {
        let p = Poly::from_real(&[1.0, 0.0, 1.0]);
        let (v, d) = p.eval_with_derivative(c(2.0, 1.0));
        assert_eq!(v, c(2.0, 1.0) * c(2.0, 1.0) + 1.0);
        assert_eq!(d, c(4.0, 2.0));
        assert_eq!(p.derivative(), Poly::from_real(&[0.0, 2.0]));
        assert_eq!(p.degree(), Some(2));
        assert_eq!(Poly::zero().degree(), None);
    }

    #[test]
    fn reversed_matches_chart_at_infinity() {
        let p = Poly::from_real(&[3.0, -1.0]);
        let q = p.reversed(2);
        let zeta = c(0.3, 0.2);
        let expected = zeta * zeta * p.eval(1.0 / zeta);
        assert!((q.eval(zeta) - expected).norm() < 1e-14);
    }

    #[test]
    fn roots_of_cyclotomic() {
        let p = Poly::from_real(&[-1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let roots = p.roots();
        assert_eq!(roots.len(), 5);
        for r in roots {
            assert!((r.norm() - 1.0).abs() < 1e-12);
            assert!((r.powu(5) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn double_root_found_to_half_precision() {
        let p = Poly::from_roots(c(1.0, 0.0), &[c(1.0, 1.0), c(1.0, 1.0), c(-2.0, 0.0)]);
        let roots = p.roots();
        let near = roots.iter().filter(|r| (**r - c(1.0, 1.0)).norm() < 1e-6).count();
        assert_eq!(near, 2);
    }

    proptest! {
        #[test]
        fn roots_reconstruct_polynomial(
            re in proptest::collection::vec(-3.0f64..3.0, 1..6),
            im in proptest::collection::vec(-3.0f64..3.0, 6),
        ) {
            let roots: Vec<C64> = re.iter().zip(&im).map(|(&a, &b)| c(a, b)).collect();
            let p = Poly::from_roots(c(2.0, -1.0), &roots);
            let found = p.roots();
            let q = Poly::from_roots(c(2.0, -1.0), &found);
            for (a, b) in p.coeffs().iter().zip(q.coeffs()) {
                prop_assert!((a - b).norm() < 1e-6 * (1.0 + a.norm()));
            }
        }
    }
}
