//! Exotic vortices on constant-curvature Riemann surfaces.
//!
//! Solutions of the vortex equations with negative coupling `e² = -κ` are
//! built from (twisted) holomorphic maps into `CPⁿ` carrying the Fubini–Study
//! metric of holomorphic sectional curvature `κ`. The Higgs density is the
//! pulled-back area form, the magnetic field follows from the Chern
//! curvature of `K_Σ ⊗ ψ*T`, and the vortex number is the flux divided by
//! `2π`.
//!
//! Module map:
//!
//! * [`surface`]: domain geometry (round sphere, flat torus) and quadrature grids.
//! * [`elliptic`]: Weierstrass `℘`, `℘'`, `σ`, lattice invariants, periodic Green's function.
//! * [`spaceform`]: Fubini–Study metric, Chern connection and curvature.
//! * [`holomap`]: rational and elliptic maps, Möbius transitions, twist classes.
//! * [`vortex`]: field construction, residuals, flux, Newton polishing.
//! * [`topo_arith`]: selection rules, moduli indices, Witten-index counting.
//! * [`uniformize`]: conformal rescaling of non-constant metrics on the torus.
//! * [`spectral`]: periodic FFT Laplacian shared by the torus code paths.
//!
//! Sign and normalisation conventions are collected in [`conventions`].

pub mod conventions;
pub mod elliptic;
pub mod error;
pub mod holomap;
pub mod io;
pub mod spaceform;
pub mod spectral;
pub mod surface;
pub mod topo_arith;
pub mod uniformize;
pub mod vortex;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
