//! Periodic FFT calculus on the fundamental cell of a lattice.
//!
//! Samples live on the cell-centred grid `z_ij = (i+½)/N·ω₁ + (j+½)/N·ω₂`,
//! stored row-major with `i` (the `ω₁` direction) as the slow index.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::elliptic::Lattice;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone)]
pub struct PeriodicGrid {
    lattice: Lattice,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Fourier symbol of the flat Laplacian `Δ₀`, same layout as the samples.
    symbol: Vec<f64>,
}

impl std::fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicGrid").field("lattice", &self.lattice).field("n", &self.n).finish()
    }
}

fn wavenumber(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

impl PeriodicGrid {
    pub fn new(lattice: Lattice, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::ResolutionTooSmall(n));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        // Δ₀ e^{2πi(ps+qt)} = -kᵀ(MᵀM)⁻¹k e^{..}, k = 2π(p, q)
        let (w1, w2) = (lattice.omega1(), lattice.omega2());
        let g11 = w1.norm_sqr();
        let g22 = w2.norm_sqr();
        let g12 = (w1.conj() * w2).re;
        let det = g11 * g22 - g12 * g12;
        let (i11, i22, i12) = (g22 / det, g11 / det, -g12 / det);
        let mut symbol = vec![0.0; n * n];
        for a in 0..n {
            let p = 2.0 * PI * wavenumber(a, n);
            for b in 0..n {
                let q = 2.0 * PI * wavenumber(b, n);
                symbol[a * n + b] = -(i11 * p * p + 2.0 * i12 * p * q + i22 * q * q);
            }
        }
        Ok(PeriodicGrid { lattice, n, forward, inverse, symbol })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn point(&self, i: usize, j: usize) -> C64 {
        let n = self.n as f64;
        self.lattice.point((i as f64 + 0.5) / n, (j as f64 + 0.5) / n)
    }

    pub fn points(&self) -> Vec<C64> {
        (0..self.n).flat_map(|i| (0..self.n).map(move |j| (i, j))).map(|(i, j)| self.point(i, j)).collect()
    }

    /// Flat Laplacian eigenvalues in FFT order.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    fn transform(&self, data: &mut [C64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for b in 0..n {
            for a in 0..n {
                col[a] = data[a * n + b];
            }
            plan.process(&mut col);
            for a in 0..n {
                data[a * n + b] = col[a];
            }
        }
    }

    pub fn forward(&self, values: &[f64]) -> Vec<C64> {
        let mut data: Vec<C64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        data
    }

    pub fn inverse(&self, mut coeffs: Vec<C64>) -> Vec<f64> {
        self.transform(&mut coeffs, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        coeffs.iter().map(|c| c.re * scale).collect()
    }

    /// Multiply the Fourier coefficients by `f(Δ₀ symbol)`.
    pub fn apply_multiplier(&self, values: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        assert_eq!(values.len(), self.len());
        let mut coeffs = self.forward(values);
        for (c, &s) in coeffs.iter_mut().zip(&self.symbol) {
            *c *= f(s);
        }
        self.inverse(coeffs)
    }

    /// Flat Laplacian `Δ₀`.
    pub fn laplacian(&self, values: &[f64]) -> Vec<f64> {
        self.apply_multiplier(values, |s| s)
    }

    /// Solve `Δ₀f = s - mean(s)` with `mean(f) = 0`; returns `(f, mean(s))`.
    pub fn poisson(&self, source: &[f64]) -> (Vec<f64>, f64) {
        let mean = source.iter().sum::<f64>() / source.len() as f64;
        let f = self.apply_multiplier(source, |s| if s == 0.0 { 0.0 } else { 1.0 / s });
        (f, mean)
    }

    /// Largest `|symbol|`, the squared Nyquist wavenumber.
    pub fn max_symbol(&self) -> f64 {
        self.symbol.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }
}
