//! Cross-module properties: map specs through construction, flux and residuals.

use std::f64::consts::PI;

use exotic_vortex::elliptic::Lattice;
use exotic_vortex::holomap::{HolomorphicMap, MobiusMap, Poly, RationalMap, TwistData};
use exotic_vortex::io::{from_json, MapSpec, VerifySpec};
use exotic_vortex::spaceform::SpaceFormTarget;
use exotic_vortex::surface::SurfaceGeometry;
use exotic_vortex::topo_arith::{allowed_vortex_numbers, moduli_index, IndexKind, IndexParams};
use exotic_vortex::uniformize::{solve_uniformizing_factor, ConformalProblem};
use exotic_vortex::vortex::{abelian_residual, build_abelian, riemann_hurwitz, vortex_number};
use exotic_vortex::C64;
use proptest::prelude::*;

fn sphere_field(map: RationalMap, kappa: f64, kappa0: f64, res: usize) -> exotic_vortex::vortex::VortexField {
    let geom = SurfaceGeometry::sphere(kappa0).unwrap();
    let target = SpaceFormTarget::new(1, kappa).unwrap();
    build_abelian(&map.into(), &TwistData::trivial(1), &geom, &target, res).unwrap()
}

fn root() -> impl Strategy<Value = C64> {
    (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(a, b)| C64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Rational maps with distinct simple roots and poles: k = 2d - 2 whatever
    /// the curvatures, since the flux is topological.
    #[test]
    fn flux_follows_degree(zeros in prop::collection::vec(root(), 1..4), pole in root(), kappa in 0.5f64..3.0) {
        let num = Poly::from_roots(C64::new(1.0, 0.0), &zeros);
        let den = Poly::from_roots(C64::new(1.0, 0.0), &[pole]);
        prop_assume!(zeros.iter().all(|z| (z - pole).norm() > 0.2));
        let map = RationalMap::from_function(num, den).unwrap();
        let d = map.degree();
        let f = sphere_field(map, kappa, 1.0, 192);
        prop_assert_eq!(vortex_number(&f).unwrap(), 2 * d as i64 - 2);
    }

    /// Any rotation of the target sphere leaves ρ unchanged.
    #[test]
    fn target_rotations_preserve_density(th in 0.0f64..PI, ph in 0.0f64..2.0 * PI, ch in 0.0f64..2.0 * PI) {
        let a = C64::from_polar(th.cos(), ph);
        let b = C64::from_polar(th.sin(), ch);
        let u = MobiusMap::from_coefficients(a, b, -b.conj(), a.conj()).unwrap();
        let map = RationalMap::parse("(z^2-1)/(2z+3)").unwrap();
        let base = sphere_field(map.clone(), 1.0, 1.0, 32);
        let HolomorphicMap::Rational(rotated) = HolomorphicMap::from(map).post_compose(&u).unwrap() else { unreachable!() };
        let moved = sphere_field(rotated, 1.0, 1.0, 32);
        let diff = base.rho().iter().zip(moved.rho()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-10, "{}", diff);
    }

    /// Untwisted Riemann-Hurwitz values always satisfy the trivial-class selection rule.
    #[test]
    fn riemann_hurwitz_obeys_selection(n in 1usize..6, genus in 0u32..5, degree in 0usize..20) {
        let rule = allowed_vortex_numbers(n as u32, genus, 0).unwrap();
        prop_assert!(rule.contains(riemann_hurwitz(n, genus, degree)));
    }

    /// The exotic index equals the vortex index with N_c = n, N_f = 1.
    #[test]
    fn indices_agree(n in 1u32..12, genus in 0u32..8, k in -50i64..50) {
        let p = IndexParams { genus, k, n_c: n, n_f: 1, n };
        prop_assert_eq!(moduli_index(&p, IndexKind::ExoticNonAbelian), moduli_index(&p, IndexKind::Vortex));
        prop_assert_eq!(
            moduli_index(&p, IndexKind::FlatConnection) + moduli_index(&p, IndexKind::TwistedSection),
            moduli_index(&p, IndexKind::ExoticNonAbelian)
        );
    }

    /// Smooth periodic log-densities are flattened to spectral accuracy.
    #[test]
    fn uniformisation_flattens(a in -0.4f64..0.4, b in -0.4f64..0.4, p in 1i32..3, q in -2i32..3) {
        let lat = Lattice::rectangle(1.0, 1.3).unwrap();
        let prob = ConformalProblem::from_fn(lat, 64, |z| {
            let (s, t) = lat.coords(z);
            a * (2.0 * PI * (p as f64 * s + q as f64 * t)).cos() + b * (2.0 * PI * t).sin()
        }).unwrap();
        let u = solve_uniformizing_factor(&prob).unwrap();
        prop_assert!(u.curvature_deviation < 1e-9, "{}", u.curvature_deviation);
    }
}

#[test]
fn json_spec_builds_the_same_field() {
    let json = r#"{"map":{"kind":"rational","expr":"(z^3-2)/(z+1)"},"kappa":2.0,"kappa0":0.5}"#;
    let spec: VerifySpec = from_json(json).unwrap();
    let a = spec.setup().unwrap().build_field(48).unwrap();
    let b = sphere_field(RationalMap::parse("(z^3-2)/(z+1)").unwrap(), 2.0, 0.5, 48);
    assert_eq!(a.rho(), b.rho());
    assert_eq!(a.k(), 4);
}

#[test]
fn curvatures_rescale_density_not_flux() {
    // ρ scales like κ₀/κ, so B = κρ - κ₀ scales by κ₀ and the flux stays put
    let map = || RationalMap::parse("z^2").unwrap();
    let a = sphere_field(map(), 1.0, 1.0, 48);
    let b = sphere_field(map(), 2.0, 1.0, 48);
    for (x, y) in a.rho().iter().zip(b.rho()) {
        assert!((x - 2.0 * y).abs() < 1e-12 * x.abs().max(1.0));
    }
    assert_eq!(a.k(), b.k());
}

#[test]
fn every_map_kind_passes_its_residual() {
    let lat = Lattice::rectangle(1.0, 1.0).unwrap();
    let specs = [
        (MapSpec::Rational { expr: "z^3+2z".into() }, 64),
        (MapSpec::Elliptic { expr: "wp".into(), lattice: lat }, 128),
        (MapSpec::Olesen { lattice: Lattice::rectangle(1.0, 1.6).unwrap() }, 64),
        (MapSpec::QuarterCell { lattice: lat }, 64),
    ];
    for (spec, res) in specs {
        let f = VerifySpec::new(spec.clone()).setup().unwrap().build_field(res).unwrap();
        let r = abelian_residual(&f, &f.residual_grid().unwrap()).unwrap();
        assert!(r.passed(), "{spec:?}: {r:?}");
    }
}
