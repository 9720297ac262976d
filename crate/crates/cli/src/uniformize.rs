use std::f64::consts::PI;
use std::fs::File;
use std::path::PathBuf;

use clap::{ArgGroup, Args};
use exotic_vortex::holomap::{olesen_map, HolomorphicMap, TwistData};
use exotic_vortex::io::from_json;
use exotic_vortex::spaceform::SpaceFormTarget;
use exotic_vortex::spectral::PeriodicGrid;
use exotic_vortex::uniformize::{
    build_on_nonconstant_metric, solve_uniformizing_factor_with_tol, ConformalProblem, SOURCE_MEAN_TOL,
};
use exotic_vortex::vortex::{abelian_residual, FLUX_TOL, TORUS_TOL};
use serde_json::json;

use crate::parse;
use crate::report::{CliResult, Outcome};

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("input").required(true).args(["problem", "cos", "constant"])))]
pub struct UniformizeArgs {
    /// Problem JSON (inline or a path): {"lattice", "log_density", "resolution", "kappa0"}
    #[arg(long)]
    pub problem: Option<String>,
    /// Generate g₀ = AMP·cos 2πs on the `--lattice` cell
    #[arg(long, allow_negative_numbers = true)]
    pub cos: Option<f64>,
    /// Generate a constant g₀
    #[arg(long, allow_negative_numbers = true)]
    pub constant: Option<f64>,
    /// Torus periods for generated problems: `a,b` or `x1,y1,x2,y2`
    #[arg(long, default_value = "1,1")]
    pub lattice: String,
    /// Grid resolution for generated problems (power of two)
    #[arg(long, default_value_t = 128)]
    pub res: usize,
    /// Target curvature for generated problems; only 0 is consistent on a torus
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub kappa0: f64,
    /// Largest source mean accepted as round-off
    #[arg(long, default_value_t = SOURCE_MEAN_TOL)]
    pub mean_tol: f64,
    /// Largest accepted sup |K - κ₀| of the rescaled metric
    #[arg(long, default_value_t = 1e-8)]
    pub curvature_tol: f64,
    /// Also build the Olesen vortex over the rescaled metric
    #[arg(long)]
    pub olesen: bool,
    /// Liouville residual tolerance for --olesen
    #[arg(long, default_value_t = TORUS_TOL)]
    pub residual_tol: f64,
    /// Flux quantisation tolerance for --olesen
    #[arg(long, default_value_t = FLUX_TOL)]
    pub flux_tol: f64,
    /// Write the grid as CSV with columns x,y,g0,f0
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn problem(args: &UniformizeArgs) -> CliResult<ConformalProblem> {
    if let Some(src) = &args.problem {
        return Ok(from_json(&parse::json_source(src)?)?);
    }
    let lattice = parse::lattice(&args.lattice)?;
    let p = match (args.cos, args.constant) {
        (Some(a), _) => ConformalProblem::from_fn(lattice, args.res, |z| a * (2.0 * PI * lattice.coords(z).0).cos())?,
        (None, Some(c)) => ConformalProblem::from_fn(lattice, args.res, |_| c)?,
        (None, None) => unreachable!("clap requires an input"),
    };
    Ok(ConformalProblem { kappa0: args.kappa0, ..p })
}

pub fn run(args: &UniformizeArgs) -> CliResult<Outcome> {
    let prob = problem(args)?;
    let u = solve_uniformizing_factor_with_tol(&prob, args.mean_tol)?;
    let f0_sup = u.f0.iter().fold(0.0f64, |m, f| m.max(f.abs()));
    let flat = u.curvature_deviation < args.curvature_tol;
    let mut passed = flat;
    let mut summary = vec![format!(
        "curvature deviation {:.3e} (tol {:.1e}), density {:.9}",
        u.curvature_deviation, args.curvature_tol, u.density
    )];
    let mut outputs = json!({
        "f0_sup": f0_sup,
        "projected_mean": u.projected_mean,
        "solver_residual": u.solver_residual,
        "curvature_deviation": u.curvature_deviation,
        "curvature_tolerance": args.curvature_tol,
        "flat": flat,
        "density": u.density,
        "density_spread": u.density_spread,
    });
    if args.olesen {
        let map: HolomorphicMap = olesen_map(&prob.lattice)?.into();
        let target = SpaceFormTarget::new(1, 1.0)?;
        let field = build_on_nonconstant_metric(&map, &TwistData::trivial(1), &prob, &target)?;
        let r = abelian_residual(&field, &field.residual_grid()?)?;
        let dist = (field.flux() - field.flux().round()).abs();
        let ok = r.passes(args.residual_tol) && dist <= args.flux_tol;
        passed &= ok;
        summary.push(format!("olesen: k = {}, residual {:.3e}", field.k(), r.sup_residual));
        outputs["olesen"] = json!({
            "k": field.k(),
            "flux": field.flux(),
            "flux_distance": dist,
            "residual_sup": r.sup_residual,
            "residual_tolerance": args.residual_tol,
            "passed": ok,
        });
    }
    if let Some(path) = &args.csv {
        let grid = PeriodicGrid::new(prob.lattice, prob.resolution)?;
        let mut w = csv::Writer::from_writer(File::create(path)?);
        w.write_record(["x", "y", "g0", "f0"])?;
        for ((z, g), f) in grid.points().iter().zip(&prob.log_density).zip(&u.f0) {
            w.write_record([z.re, z.im, *g, *f].map(|v| v.to_string()))?;
        }
        w.flush()?;
        outputs["csv"] = json!(path.display().to_string());
    }
    let inputs = json!({
        "lattice": prob.lattice,
        "resolution": prob.resolution,
        "kappa0": prob.kappa0,
        "source": if args.problem.is_some() { "json" } else if args.cos.is_some() { "cos" } else { "constant" },
    });
    Ok(Outcome { inputs, outputs, passed, summary })
}
