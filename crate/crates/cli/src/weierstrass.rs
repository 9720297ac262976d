use clap::Args;
use exotic_vortex::elliptic::WeierstrassData;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::parse;
use crate::report::CliResult;
use crate::report::Outcome;

#[derive(Args, Debug)]
pub struct WeierstrassArgs {
    /// Periods: `a,b` for the rectangle (a, ib) or `x1,y1,x2,y2`
    #[arg(long, default_value = "1,1")]
    pub lattice: String,
    /// Evaluate ℘ and ℘' at `re,im` (repeatable)
    #[arg(long)]
    pub at: Vec<String>,
    /// Number of generic points for the differential-equation check
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Relative tolerance for (℘')² = 4℘³ - g₂℘ - g₃
    #[arg(long, default_value_t = 1e-10)]
    pub identity_tol: f64,
    /// Tolerance for e₁ + e₂ + e₃ = 0, relative to max |eᵢ|
    #[arg(long, default_value_t = 1e-12)]
    pub sum_tol: f64,
    /// Largest accepted relative imaginary part on rectangular lattices
    #[arg(long, default_value_t = 1e-12)]
    pub real_tol: f64,
}

fn cx(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Low-discrepancy points of the cell (additive recurrence with the plastic number).
fn generic_points(count: usize) -> impl Iterator<Item = (f64, f64)> {
    const A1: f64 = 0.754_877_666_246_692_7;
    const A2: f64 = 0.569_840_290_998_053_2;
    (1..=count).map(|k| ((0.5 + A1 * k as f64).fract(), (0.5 + A2 * k as f64).fract()))
}

pub fn run(args: &WeierstrassArgs) -> CliResult<Outcome> {
    let lat = parse::lattice(&args.lattice)?;
    let data = WeierstrassData::new(&lat)?;
    let (g2, g3) = (data.g2, data.g3);

    let mut identity_err = 0.0f64;
    let mut imag_err = 0.0f64;
    let rectangular = lat.is_rectangular(1e-12);
    let mut used = 0;
    for (s, t) in generic_points(args.points) {
        let z = lat.point(s, t);
        if lat.distance_to_lattice(z) < 0.05 * lat.shortest() {
            continue;
        }
        let (p, dp) = data.wp_pair(z)?;
        let rhs = 4.0 * p * p * p - g2 * p - g3;
        let scale = dp.norm_sqr() + rhs.norm() + 4.0 * p.norm().powi(3);
        identity_err = identity_err.max((dp * dp - rhs).norm() / scale);
        used += 1;
        if rectangular {
            // ℘ is real on the real axis of a rectangular lattice
            let x = lat.point(s, 0.0);
            if lat.distance_to_lattice(x) > 0.05 * lat.shortest() {
                let v = data.wp(x)?;
                imag_err = imag_err.max(v.im.abs() / v.norm());
            }
        }
    }
    let es = [data.e1, data.e2, data.e3];
    let e_max = es.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let sum_err = (data.e1 + data.e2 + data.e3).norm() / e_max;
    if rectangular {
        // invariants scale like e², e³; near-zero values are judged against that scale
        let inv = [(g2, e_max * e_max), (g3, e_max.powi(3))]
            .into_iter()
            .chain(es.map(|e| (e, e_max)))
            .map(|(v, scale)| v.im.abs() / scale)
            .fold(0.0, f64::max);
        imag_err = imag_err.max(inv);
    }
    let identity_ok = identity_err < args.identity_tol;
    let sum_ok = sum_err < args.sum_tol;
    let real_ok = !rectangular || imag_err < args.real_tol;

    let values = args
        .at
        .iter()
        .map(|src| {
            let z = parse::complex(src)?;
            let (p, dp) = data.wp_pair(z)?;
            Ok(json!({"z": cx(z), "wp": cx(p), "wp_prime": cx(dp)}))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let outputs = json!({
        "g2": cx(g2),
        "g3": cx(g3),
        "e": es.map(cx),
        "identity": {"points": used, "max_relative_error": identity_err, "tolerance": args.identity_tol, "passed": identity_ok},
        "root_sum": {"relative_error": sum_err, "tolerance": args.sum_tol, "passed": sum_ok},
        "real_values": {"rectangular": rectangular, "max_relative_imaginary": imag_err, "tolerance": args.real_tol, "passed": real_ok},
        "values": values,
    });
    let summary = vec![
        format!("g2 = {g2:.12}, g3 = {g3:.12}"),
        format!("max relative ODE error {identity_err:.2e} over {used} points, root sum {sum_err:.2e}"),
    ];
    let inputs = json!({"lattice": lat, "points": args.points, "at": args.at});
    Ok(Outcome { inputs, outputs, passed: identity_ok && sum_ok && real_ok, summary })
}
