//! `CPⁿ` with the Fubini–Study metric of constant holomorphic sectional
//! curvature `κ`, in the affine chart `w ∈ Cⁿ`.
//!
//! The Hermitian metric is `h_{ij̄} = s[(1+|w|²)δᵢⱼ - w̄ᵢwⱼ]/(1+|w|²)²`. The
//! scale `s` is found by bisection on the curvature self-test and comes out as
//! `s = 2/κ`. Curvature components are `R_{ij̄kl̄} = R(∂ᵢ, ∂̄ⱼ, ∂ₖ, ∂̄ₗ)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceFormTarget {
    n: usize,
    kappa: f64,
    scale: f64,
}

fn zero() -> C64 {
    Complex64::new(0.0, 0.0)
}

fn norm_sqr(w: &[C64]) -> f64 {
    w.iter().map(|x| x.norm_sqr()).sum()
}

impl SpaceFormTarget {
    /// `CPⁿ` normalised so that every holomorphic sectional curvature is `kappa`.
    pub fn new(n: usize, kappa: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGeometry("target dimension must be positive".into()));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidGeometry(format!("kappa must be positive, got {kappa}")));
        }
        let scale = calibrate_scale(n, kappa);
        Ok(SpaceFormTarget { n, kappa, scale })
    }

    /// Target with an explicit metric scale; no normalisation is enforced.
    pub fn with_scale(n: usize, kappa: f64, scale: f64) -> Self {
        SpaceFormTarget { n, kappa, scale }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Hermitian metric `h_{ij̄}` at `w` (row `i`, column `j`).
    pub fn fs_metric(&self, w: &[C64]) -> DMatrix<C64> {
        assert_eq!(w.len(), self.n);
        let a = 1.0 + norm_sqr(w);
        DMatrix::from_fn(self.n, self.n, |i, j| {
            let delta = if i == j { a } else { 0.0 };
            (Complex64::new(delta, 0.0) - w[i].conj() * w[j]) * (self.scale / (a * a))
        })
    }

    /// For `n = 1`: the conformal factor `g = σ(w)|dw|²` of the underlying round
    /// metric, `σ = 2h = 4/(κ(1+|w|²)²)` at the calibrated scale.
    pub fn area_density(&self, w: C64) -> f64 {
        let a = 1.0 + w.norm_sqr();
        2.0 * self.scale / (a * a)
    }

    /// `∂ₖ h_{ij̄}` in closed form.
    fn d_metric(&self, w: &[C64], k: usize) -> DMatrix<C64> {
        let a = 1.0 + norm_sqr(w);
        let s = self.scale;
        DMatrix::from_fn(self.n, self.n, |i, j| {
            let mut v = w[i].conj() * w[j] * w[k].conj() * (2.0 / (a * a * a));
            if i == j {
                v -= w[k].conj() / (a * a);
            }
            if j == k {
                v -= w[i].conj() / (a * a);
            }
            v * s
        })
    }

    /// `∂̄ₗ h_{ij̄}` in closed form.
    fn dbar_metric(&self, w: &[C64], l: usize) -> DMatrix<C64> {
        let a = 1.0 + norm_sqr(w);
        let s = self.scale;
        DMatrix::from_fn(self.n, self.n, |i, j| {
            let mut v = w[i].conj() * w[j] * w[l] * (2.0 / (a * a * a));
            if i == j {
                v -= w[l] / (a * a);
            }
            if i == l {
                v -= w[j] / (a * a);
            }
            v * s
        })
    }

    /// `∂ₖ∂̄ₗ h_{ij̄}` in closed form.
    fn ddbar_metric(&self, w: &[C64], k: usize, l: usize) -> DMatrix<C64> {
        let a = 1.0 + norm_sqr(w);
        let (a2, a3, a4) = (a * a, a * a * a, a * a * a * a);
        let s = self.scale;
        let d = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
        DMatrix::from_fn(self.n, self.n, |i, j| {
            let mut v = w[i].conj() * w[j] * w[k].conj() * w[l] * (-6.0 / a4);
            v += w[k].conj() * w[l] * (2.0 * d(i, j) / a3);
            v += w[i].conj() * w[l] * (2.0 * d(j, k) / a3);
            v += w[j] * w[k].conj() * (2.0 * d(i, l) / a3);
            v += w[i].conj() * w[j] * (2.0 * d(k, l) / a3);
            v -= Complex64::new((d(i, j) * d(k, l) + d(i, l) * d(j, k)) / a2, 0.0);
            v * s
        })
    }

    /// Metric, Chern connection and curvature at `w`.
    pub fn curvature_tensor(&self, w: &[C64]) -> HermitianFrameData {
        let n = self.n;
        let h = self.fs_metric(w);
        let h_inv = h.clone().try_inverse().expect("Fubini–Study metric is positive definite");
        let dh: Vec<_> = (0..n).map(|k| self.d_metric(w, k)).collect();
        let dbh: Vec<_> = (0..n).map(|l| self.dbar_metric(w, l)).collect();
        // Γₖ = G⁻¹∂ₖG with G = hᵀ
        let g_inv = h_inv.transpose();
        let connection = dh.iter().map(|d| &g_inv * d.transpose()).collect();
        let mut curvature = vec![zero(); n * n * n * n];
        for k in 0..n {
            for l in 0..n {
                let block = &dh[k] * &h_inv * &dbh[l] - self.ddbar_metric(w, k, l);
                for i in 0..n {
                    for j in 0..n {
                        curvature[((i * n + j) * n + k) * n + l] = block[(i, j)];
                    }
                }
            }
        }
        HermitianFrameData { point: w.to_vec(), metric: h, connection, curvature }
    }

    /// `H(ξ) = R(ξ, ξ̄, ξ, ξ̄)/|ξ|⁴`.
    pub fn holomorphic_sectional_curvature(&self, w: &[C64], xi: &[C64]) -> Result<f64> {
        if norm_sqr(xi) == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.curvature_tensor(w).holomorphic_sectional_curvature(xi))
    }

    /// Fractional-linear action of a unitary `U ∈ U(n+1)` on the affine chart.
    pub fn act(u: &DMatrix<C64>, w: &[C64]) -> Vec<C64> {
        let mut v = vec![Complex64::new(1.0, 0.0)];
        v.extend_from_slice(w);
        let img: Vec<C64> = (0..v.len()).map(|i| (0..v.len()).map(|j| u[(i, j)] * v[j]).sum()).collect();
        img[1..].iter().map(|x| x / img[0]).collect()
    }
}

/// `H` at a fixed probe point as a function of the scale; `H ∝ 1/s`.
fn probe_hsc(n: usize, scale: f64) -> f64 {
    let t = SpaceFormTarget { n, kappa: 1.0, scale };
    let w: Vec<C64> = (0..n).map(|i| Complex64::new(0.3 - 0.1 * i as f64, 0.2 + 0.05 * i as f64)).collect();
    let xi: Vec<C64> = (0..n).map(|i| Complex64::new(1.0, 0.5 * i as f64)).collect();
    t.curvature_tensor(&w).holomorphic_sectional_curvature(&xi)
}

fn calibrate_scale(n: usize, kappa: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if probe_hsc(n, mid.exp()) > kappa {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermitianFrameData {
    pub point: Vec<C64>,
    pub metric: DMatrix<C64>,
    /// `Γₖ = G⁻¹∂ₖG`, with `G = hᵀ` the Gram matrix of the coordinate frame.
    pub connection: Vec<DMatrix<C64>>,
    /// `R_{ij̄kl̄}` flattened as `((i·n + j)·n + k)·n + l`.
    pub curvature: Vec<C64>,
}

impl HermitianFrameData {
    pub fn n(&self) -> usize {
        self.metric.nrows()
    }

    pub fn r(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        let n = self.n();
        self.curvature[((i * n + j) * n + k) * n + l]
    }

    /// `h(u, v̄) = Σ h_{ij̄} uᵢ v̄ⱼ`.
    #[allow(clippy::needless_range_loop)] // tensor indices read best as indices
    pub fn inner(&self, u: &[C64], v: &[C64]) -> C64 {
        let n = self.n();
        let mut s = zero();
        for i in 0..n {
            for j in 0..n {
                s += self.metric[(i, j)] * u[i] * v[j].conj();
            }
        }
        s
    }

    #[allow(clippy::needless_range_loop)]
    pub fn holomorphic_sectional_curvature(&self, xi: &[C64]) -> f64 {
        let n = self.n();
        let mut num = zero();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        num += self.r(i, j, k, l) * xi[i] * xi[j].conj() * xi[k] * xi[l].conj();
                    }
                }
            }
        }
        num.re / self.inner(xi, xi).re.powi(2)
    }

    /// `C_{ij} = Σ R_{ij̄kl̄} uₖ v̄ₗ`.
    #[allow(clippy::needless_range_loop)]
    pub fn contract(&self, u: &[C64], v: &[C64]) -> DMatrix<C64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| {
            let mut s = zero();
            for k in 0..n {
                for l in 0..n {
                    s += self.r(i, j, k, l) * u[k] * v[l].conj();
                }
            }
            s
        })
    }

    /// Lowered components of `G(v, w) = R(v, Jw)` on the `(1,0)` block, for real
    /// tangent vectors given by their `(1,0)` parts.
    pub fn symmetric_tensor(&self, v: &[C64], w: &[C64]) -> DMatrix<C64> {
        let i = Complex64::i();
        (self.contract(v, w) + self.contract(w, v)) * (-i)
    }

    /// Ricci form components `-∂ₖ∂̄ₗ log det h` computed as `Σᵢⱼ h^{ji} R_{ij̄kl̄}`.
    pub fn ricci(&self) -> DMatrix<C64> {
        let n = self.n();
        let h_inv = self.metric.clone().try_inverse().expect("metric invertible");
        DMatrix::from_fn(n, n, |k, l| {
            let mut s = zero();
            for i in 0..n {
                for j in 0..n {
                    s += h_inv[(j, i)] * self.r(i, j, k, l);
                }
            }
            s
        })
    }

    /// Real Riemann tensor `g(R(u,v)w,x)`; real vectors are given by their
    /// `(1,0)` parts, `u = U + Ū`.
    pub fn riemann(&self, u: &[C64], v: &[C64], w: &[C64], x: &[C64]) -> f64 {
        let n = self.n();
        let mut s = zero();
        for i in 0..n {
            for j in 0..n {
                let uv = u[i] * v[j].conj() - v[i] * u[j].conj();
                for k in 0..n {
                    for l in 0..n {
                        let wx = w[k] * x[l].conj() - x[k] * w[l].conj();
                        s += self.r(i, j, k, l) * uv * wx;
                    }
                }
            }
        }
        s.re
    }

    /// Riemannian metric `g(u, v) = 2 Re h(U, V̄)`.
    pub fn real_metric(&self, u: &[C64], v: &[C64]) -> f64 {
        2.0 * self.inner(u, v).re
    }
}

/// Free-function form of [`SpaceFormTarget::fs_metric`].
pub fn fs_metric(target: &SpaceFormTarget, w: &[C64]) -> DMatrix<C64> {
    target.fs_metric(w)
}

/// Free-function form of [`SpaceFormTarget::holomorphic_sectional_curvature`].
pub fn holomorphic_sectional_curvature(target: &SpaceFormTarget, w: &[C64], xi: &[C64]) -> Result<f64> {
    target.holomorphic_sectional_curvature(w, xi)
}

/// Free-function form of [`SpaceFormTarget::curvature_tensor`].
pub fn curvature_tensor(target: &SpaceFormTarget, w: &[C64]) -> HermitianFrameData {
    target.curvature_tensor(w)
}
