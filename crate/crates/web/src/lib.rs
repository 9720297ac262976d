//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes plain arguments and returns a JSON string. The work is
//! done by `*_json` functions that return `Result<Value, String>` so they can
//! be tested natively; the wasm wrappers only convert errors to `JsError`.
//! Integer arguments of the exports are `i32` so they arrive as JS numbers.

use exotic_vortex::elliptic::Lattice;
use exotic_vortex::io::{from_json, VerifySpec};
use exotic_vortex::surface::{Chart, SurfaceKind, SurfacePoint};
use exotic_vortex::topo_arith::{
    allowed_vortex_numbers, bradlow_check, gated_witten_index, witten_index, CountingParams,
};
use exotic_vortex::vortex::{abelian_residual, identity_residual, nonabelian_residual};
use num_rational::BigRational;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest grid the page may request; keeps a build under a few seconds.
pub const MAX_RESOLUTION: usize = 256;

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Plot coordinates in `[0, 1]²`: cell coordinates on a torus, and on the
/// sphere the orthographic image of each hemisphere (north left, south right).
fn plot_coords(p: &SurfacePoint, lattice: Option<&Lattice>) -> (f64, f64) {
    match (p.chart, lattice) {
        (Chart::Cell, Some(lat)) => {
            let (s, t) = lat.coords(p.z);
            (s.rem_euclid(1.0), t.rem_euclid(1.0))
        }
        _ => {
            let [x, y, z] = p.unit_vector();
            // the south disc is mirrored so both hemispheres share the equator orientation
            let (offset, x) = if z >= 0.0 { (0.0, x) } else { (0.5, -x) };
            (offset + 0.25 * (1.0 + x), 0.5 * (1.0 + y))
        }
    }
}

pub fn vortex_json(spec: &str, resolution: usize) -> Result<Value, String> {
    if !(8..=MAX_RESOLUTION).contains(&resolution) {
        return Err(format!("resolution must lie in 8..={MAX_RESOLUTION}"));
    }
    let spec: VerifySpec = from_json(spec).map_err(text)?;
    let setup = spec.setup().map_err(text)?;
    let field = setup.build_field(resolution).map_err(text)?;
    let grid = field.residual_grid().map_err(text)?;
    let n = field.target().n();
    let residual = if n == 1 {
        json!({ "vortex": abelian_residual(&field, &grid).map_err(text)?.sup_residual })
    } else {
        json!({
            "vortex": nonabelian_residual(&field, &grid).map_err(text)?.sup_residual,
            "identity": identity_residual(&field, &grid).map_err(text)?.sup_residual,
        })
    };
    let lattice = field.geom().lattice();
    let zeros: Vec<Value> = field
        .zeros()
        .iter()
        .map(|z| {
            let (u, v) = plot_coords(&z.location, lattice);
            json!({ "chart": z.location.chart, "re": z.location.z.re, "im": z.location.z.im, "multiplicity": z.multiplicity, "u": u, "v": v })
        })
        .collect();
    let (u, v): (Vec<f64>, Vec<f64>) = field.points().iter().map(|p| plot_coords(p, lattice)).unzip();
    Ok(json!({
        "surface": match field.geom().kind() { SurfaceKind::Sphere => "sphere", SurfaceKind::Torus => "torus" },
        "n": n,
        "flux": field.flux(),
        "k": field.k(),
        "zeros": zeros,
        "residual": residual,
        "resolution": resolution,
        "u": u,
        "v": v,
        "rho": field.rho(),
    }))
}

pub fn count_json(genus: u32, n_f: u32, level: i64, area: &str, k_min: i64, k_max: i64) -> Result<Value, String> {
    if k_max < k_min || k_max - k_min > 200 {
        return Err("need k_min <= k_max and at most 200 rows".into());
    }
    let area: BigRational =
        area.trim().parse().map_err(|_| format!("area must be an exact rational p/q, got {area:?}"))?;
    let rows = (k_min..=k_max)
        .map(|k| {
            let p = CountingParams { genus, n_f, level, area: area.clone(), k };
            Ok(json!({
                "k": k,
                "witten_index": witten_index(&p).map_err(text)?.to_string(),
                "gated_index": gated_witten_index(&p).map_err(text)?.to_string(),
                "bradlow": bradlow_check(&p).satisfied,
            }))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(json!({ "area": area.to_string(), "rows": rows }))
}

pub fn selection_json(n: u32, genus: u32, class: u32, k_min: i64, k_max: i64) -> Result<Value, String> {
    let rule = allowed_vortex_numbers(n, genus, class).map_err(text)?;
    Ok(json!({
        "modulus": rule.modulus,
        "residue": rule.residue,
        "members": rule.members(k_min, k_max),
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

/// Build a vortex from a JSON verify spec and return its density samples.
#[wasm_bindgen]
pub fn vortex(spec: &str, resolution: usize) -> Result<String, JsError> {
    to_js(vortex_json(spec, resolution))
}

/// Witten index and Bradlow verdict for `k_min..=k_max`.
#[wasm_bindgen]
pub fn count_table(genus: u32, n_f: u32, level: i32, area: &str, k_min: i32, k_max: i32) -> Result<String, JsError> {
    to_js(count_json(genus, n_f, level.into(), area, k_min.into(), k_max.into()))
}

/// Residue class of vortex numbers allowed by a twist class.
#[wasm_bindgen]
pub fn selection(n: u32, genus: u32, class: u32, k_min: i32, k_max: i32) -> Result<String, JsError> {
    to_js(selection_json(n, genus, class, k_min.into(), k_max.into()))
}
