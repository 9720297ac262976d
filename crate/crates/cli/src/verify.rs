use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::{ArgGroup, Args, ValueEnum};
use exotic_vortex::io::{from_json, write_field_csv, MapSpec, Setup, VerifySpec};
use exotic_vortex::surface::{Chart, SurfaceKind};
use exotic_vortex::vortex::{
    abelian_residual, identity_residual, newton_polish, nonabelian_residual, riemann_hurwitz, NewtonOptions,
    ResidualReport, VortexField, FLUX_TOL,
};
use serde_json::{json, Value};

use crate::parse;
use crate::report::{CliError, CliResult, Outcome};

/// Map, surface and target selection shared by `verify` and `sample`.
#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["map", "olesen", "quarter_cell", "rational", "polynomial", "elliptic"])))]
pub struct MapArgs {
    /// JSON map spec, inline (`{"kind":"rational","expr":"z^2"}`) or a file path
    #[arg(long)]
    pub map: Option<String>,
    /// Olesen's symmetric map on the `--lattice` rectangle
    #[arg(long)]
    pub olesen: bool,
    /// Olesen map restricted to the quarter cell, with its half-period twist
    #[arg(long)]
    pub quarter_cell: bool,
    /// Rational function of z into CP^1, e.g. "(z^3-2)/(z+1)"
    #[arg(long)]
    pub rational: Option<String>,
    /// Comma-separated polynomials p_1,...,p_n for z -> (p_1(z),...,p_n(z)) in CP^n
    #[arg(long, value_delimiter = ',')]
    pub polynomial: Option<Vec<String>>,
    /// Expression in wp and wpp on the `--lattice` torus, e.g. "wpp/10"
    #[arg(long)]
    pub elliptic: Option<String>,
    /// Torus periods: `a,b` for the rectangle (a, ib) or `x1,y1,x2,y2`
    #[arg(long, default_value = "1,1")]
    pub lattice: String,
    /// Require the domain to be the round sphere (rational maps only)
    #[arg(long)]
    pub sphere: bool,
    /// Holomorphic sectional curvature of the target
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Curvature of the round sphere
    #[arg(long, default_value_t = 1.0)]
    pub kappa0: f64,
    /// Constant metric density on the torus
    #[arg(long, default_value_t = 1.0)]
    pub density: f64,
    /// Grid resolution
    #[arg(long, default_value_t = 128)]
    pub res: usize,
}

impl MapArgs {
    pub fn spec(&self) -> CliResult<VerifySpec> {
        let lattice = || parse::lattice(&self.lattice);
        let map = if let Some(src) = &self.map {
            from_json::<MapSpec>(&parse::json_source(src)?)?
        } else if self.olesen {
            MapSpec::Olesen { lattice: lattice()? }
        } else if self.quarter_cell {
            MapSpec::QuarterCell { lattice: lattice()? }
        } else if let Some(expr) = &self.rational {
            MapSpec::Rational { expr: expr.clone() }
        } else if let Some(components) = &self.polynomial {
            MapSpec::Polynomial { components: components.clone() }
        } else if let Some(expr) = &self.elliptic {
            MapSpec::Elliptic { expr: expr.clone(), lattice: lattice()? }
        } else {
            return Err(CliError::parse("no map given"));
        };
        Ok(VerifySpec { map, kappa: self.kappa, kappa0: self.kappa0, density: self.density })
    }

    pub fn setup(&self) -> CliResult<(VerifySpec, Setup)> {
        let spec = self.spec()?;
        let setup = spec.setup()?;
        if self.sphere && setup.geom.kind() != SurfaceKind::Sphere {
            return Err(CliError::precondition("--sphere given for a torus map"));
        }
        Ok((spec, setup))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ResidualForm {
    /// Matrix vortex equation B + κ₀ = κΦ (scalar Liouville equation for n = 1)
    Vortex,
    /// Curvature identity B + κ₀ = ½κ(ρ + Φ) (n ≥ 2 only)
    Identity,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Sup residual tolerance away from zeros [default: 1e-5 sphere, 1e-6 torus, 1e-4 matrix]
    #[arg(long)]
    pub residual_tol: Option<f64>,
    /// Largest accepted distance of flux/2π from an integer
    #[arg(long, default_value_t = FLUX_TOL)]
    pub flux_tol: f64,
    /// Which equation the residual measures
    #[arg(long, value_enum, default_value_t = ResidualForm::Vortex)]
    pub residual_form: ResidualForm,
    /// Write the field grid as CSV (columns chart,x,y,weight,rho,b)
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Run Newton polishing of the Liouville equation (torus, n = 1)
    #[arg(long)]
    pub polish: bool,
    /// Multiply ρ by exp(AMP·sin 2πs·cos 2πt) before polishing; s, t are lattice coordinates
    #[arg(long, default_value_t = 0.0, requires = "polish")]
    pub perturb: f64,
    /// Newton stopping tolerance on the sup residual
    #[arg(long, default_value_t = 1e-10)]
    pub newton_tol: f64,
    /// Newton iteration cap
    #[arg(long, default_value_t = 20)]
    pub newton_iters: usize,
}

fn chart_name(c: Chart) -> &'static str {
    match c {
        Chart::North => "north",
        Chart::South => "south",
        Chart::Cell => "cell",
    }
}

pub fn zeros_json(field: &VortexField) -> Value {
    field
        .zeros()
        .iter()
        .map(|z| json!({"chart": chart_name(z.location.chart), "x": z.location.z.re, "y": z.location.z.im, "multiplicity": z.multiplicity}))
        .collect()
}

/// Whether the zero set of a torus field is invariant under both half-period shifts.
fn half_period_symmetric(field: &VortexField) -> Option<bool> {
    let lat = field.geom().lattice()?;
    let zs: Vec<_> = field.zeros().iter().map(|z| z.location.z).collect();
    let tol = 1e-6 * lat.shortest();
    let symmetric = [lat.omega1() / 2.0, lat.omega2() / 2.0]
        .iter()
        .all(|&h| zs.iter().all(|&a| zs.iter().any(|&b| lat.distance_to_lattice(a + h - b) < tol)));
    Some(symmetric)
}

fn residual_json(r: &ResidualReport, tol: f64, form: &str) -> Value {
    json!({
        "form": form,
        "sup": r.sup_residual,
        "mean": r.mean_residual,
        "points": r.points,
        "excluded_area": r.excluded_area,
        "tolerance": tol,
        "passed": r.passes(tol),
    })
}

pub fn run(args: &VerifyArgs) -> CliResult<Outcome> {
    let (spec, setup) = args.map.setup()?;
    let field = setup.build_field(args.map.res)?;
    let grid = field.residual_grid()?;
    let n = setup.target.n();
    let (report, form) = match (n, args.residual_form) {
        (1, ResidualForm::Vortex) => (abelian_residual(&field, &grid)?, "liouville"),
        (1, ResidualForm::Identity) => {
            return Err(CliError::precondition("the identity residual is for n >= 2 targets"));
        }
        (_, ResidualForm::Vortex) => (nonabelian_residual(&field, &grid)?, "matrix_vortex"),
        (_, ResidualForm::Identity) => (identity_residual(&field, &grid)?, "curvature_identity"),
    };
    let tol = args.residual_tol.unwrap_or(report.tolerance);
    let flux_distance = (field.flux() - field.flux().round()).abs();
    let flux_ok = flux_distance <= args.flux_tol;
    let degree = setup.map.degree()?;
    let expected = setup.twist.is_trivial().then(|| riemann_hurwitz(n, setup.geom.genus(), degree));
    let mut passed = flux_ok && report.passes(tol);
    let mut summary = vec![
        format!("k = {} (flux/2π = {:.9}, distance {:.2e})", field.k(), field.flux(), flux_distance),
        format!("{} residual sup = {:.3e} (tol {:.1e})", form, report.sup_residual, tol),
    ];

    let mut outputs = json!({
        "surface": if setup.geom.kind() == SurfaceKind::Sphere { "sphere" } else { "torus" },
        "genus": setup.geom.genus(),
        "n": n,
        "degree": degree,
        "twist_class": setup.twist.class(),
        "flux": field.flux(),
        "flux_distance": flux_distance,
        "flux_tolerance": args.flux_tol,
        "flux_quantized": flux_ok,
        "k": field.k(),
        "expected_k": expected,
        "zeros": zeros_json(&field),
        "half_period_symmetric": half_period_symmetric(&field),
        "residual": residual_json(&report, tol, form),
    });

    if args.polish {
        let start = if args.perturb != 0.0 {
            let lat = *setup.geom.lattice().ok_or_else(|| CliError::precondition("--perturb needs a torus map"))?;
            let delta: Vec<f64> = field
                .points()
                .iter()
                .map(|p| {
                    let (s, t) = lat.coords(p.z);
                    args.perturb * (2.0 * PI * s).sin() * (2.0 * PI * t).cos()
                })
                .collect();
            field.with_modified_density(1.0, Some(&delta))?
        } else {
            field.clone()
        };
        let opts =
            NewtonOptions { max_iterations: args.newton_iters, tol: args.newton_tol, ..NewtonOptions::default() };
        let nr = newton_polish(&start, &opts)?;
        let converged = nr.final_residual < args.newton_tol && !nr.diverged;
        passed &= converged;
        summary.push(format!("newton: {} iterations, residual {:.3e}", nr.iterations, nr.final_residual));
        outputs["newton"] = json!({
            "perturbation": args.perturb,
            "iterations": nr.iterations,
            "residual_history": nr.residual_history,
            "final_residual": nr.final_residual,
            "tolerance": args.newton_tol,
            "diverged": nr.diverged,
            "kernel_dimension": nr.kernel_dimension,
            "converged": converged,
        });
    }

    if let Some(path) = &args.csv {
        write_field_csv(&field, BufWriter::new(File::create(path)?))?;
        outputs["csv"] = json!(path.display().to_string());
    }

    let inputs = json!({
        "spec": spec,
        "resolution": args.map.res,
        "residual_form": form,
    });
    Ok(Outcome { inputs, outputs, passed, summary })
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Output CSV with columns chart,x,y,weight,rho,b (weight includes the metric factor; b is tr B)
    #[arg(long)]
    pub out: PathBuf,
}

pub fn sample(args: &SampleArgs) -> CliResult<Outcome> {
    let (spec, setup) = args.map.setup()?;
    let field = setup.build_field(args.map.res)?;
    write_field_csv(&field, BufWriter::new(File::create(&args.out)?))?;
    let outputs = json!({
        "points": field.points().len(),
        "flux": field.flux(),
        "k": field.k(),
        "zeros": zeros_json(&field),
        "csv": args.out.display().to_string(),
        "columns": ["chart", "x", "y", "weight", "rho", "b"],
    });
    let summary = vec![format!("wrote {} points to {}", field.points().len(), args.out.display())];
    Ok(Outcome { inputs: json!({"spec": spec, "resolution": args.map.res}), outputs, passed: true, summary })
}
