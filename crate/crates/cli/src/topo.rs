use std::fs::File;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use exotic_vortex::topo_arith::{
    allowed_vortex_numbers, bradlow_check, gated_witten_index, moduli_index, witten_index, CountingParams, IndexKind,
    IndexParams,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::parse;
use crate::report::{CliError, CliResult, Outcome};

/// Exact integers as JSON numbers when they fit in 64 bits, else as strings.
fn big(x: &BigInt) -> Value {
    x.to_i64().map_or_else(|| json!(x.to_string()), |v| json!(v))
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[arg(long, default_value_t = 0)]
    pub genus: u32,
    /// Number of flavours N_f
    #[arg(long, default_value_t = 1)]
    pub nf: u32,
    /// Chern–Simons level λ; the exotic regime is λ = -N_f
    #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
    pub level: i64,
    /// Normalised area as an exact rational: `p/q`, an integer or a finite decimal
    #[arg(long, default_value = "0", allow_negative_numbers = true, conflicts_with = "area_approx")]
    pub area: String,
    /// Floating-point area from geometry, rounded to the nearest rational with denominator <= --max-denominator
    #[arg(long, allow_negative_numbers = true)]
    pub area_approx: Option<f64>,
    /// Largest accepted |area_approx - p/q| when rounding
    #[arg(long, default_value_t = 1e-9)]
    pub area_tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_denominator: i64,
    /// Vortex number
    #[arg(long, allow_negative_numbers = true, required_unless_present = "table")]
    pub k: Option<i64>,
    /// Sweep k over [--k-min, --k-max] into a CSV with columns k,witten_index,gated_index,bradlow
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub k_min: i64,
    #[arg(long, default_value_t = 20, allow_negative_numbers = true)]
    pub k_max: i64,
}

fn counting(args: &CountArgs, area: &BigRational, k: i64) -> CountingParams {
    CountingParams { genus: args.genus, n_f: args.nf, level: args.level, area: area.clone(), k }
}

pub fn count(args: &CountArgs) -> CliResult<Outcome> {
    let area = match args.area_approx {
        Some(x) => parse::snap_rational(x, args.area_tol, args.max_denominator)?,
        None => parse::rational(&args.area)?,
    };
    let inputs = json!({
        "genus": args.genus, "n_f": args.nf, "level": args.level, "area": area.to_string(), "k": args.k,
    });
    let mut outputs = json!({});
    let mut summary = Vec::new();
    if let Some(k) = args.k {
        let p = counting(args, &area, k);
        let index = witten_index(&p)?;
        let verdict = bradlow_check(&p);
        summary.push(format!("witten index = {index}"));
        summary.push(verdict.explanation.clone());
        outputs = json!({
            "witten_index": big(&index),
            "gated_index": big(&gated_witten_index(&p)?),
            "bradlow": verdict,
        });
    }
    if let Some(path) = &args.table {
        if args.k_min > args.k_max {
            return Err(CliError::precondition("--k-min exceeds --k-max"));
        }
        let mut w = csv::Writer::from_writer(File::create(path)?);
        w.write_record(["k", "witten_index", "gated_index", "bradlow"])?;
        for k in args.k_min..=args.k_max {
            let p = counting(args, &area, k);
            let ok = bradlow_check(&p).satisfied;
            w.write_record([
                k.to_string(),
                witten_index(&p)?.to_string(),
                gated_witten_index(&p)?.to_string(),
                ok.to_string(),
            ])?;
        }
        w.flush()?;
        outputs["table"] = json!(path.display().to_string());
        summary.push(format!("wrote k = {}..={} to {}", args.k_min, args.k_max, path.display()));
    }
    Ok(Outcome { inputs, outputs, passed: true, summary })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    /// Flat PSU(n+1) connections, ((n+1)^2-1)(2g-2)
    #[value(name = "flat", alias = "flat-connection")]
    Flat,
    /// Twisted holomorphic sections
    TwistedSection,
    /// Flat connection plus section, n = 1: 2k
    CombinedAbelian,
    /// 2k + n(1-n)(2-2g)
    ExoticNonAbelian,
    /// 2k + N_c(N_f-N_c)(2-2g)
    Vortex,
    /// Every index above
    All,
}

impl Which {
    fn kinds(self) -> Vec<IndexKind> {
        match self {
            Which::Flat => vec![IndexKind::FlatConnection],
            Which::TwistedSection => vec![IndexKind::TwistedSection],
            Which::CombinedAbelian => vec![IndexKind::CombinedAbelian],
            Which::ExoticNonAbelian => vec![IndexKind::ExoticNonAbelian],
            Which::Vortex => vec![IndexKind::Vortex],
            Which::All => IndexKind::ALL.to_vec(),
        }
    }
}

fn kind_name(k: IndexKind) -> String {
    serde_json::to_value(k).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

#[derive(Args, Debug)]
pub struct IndexArgs {
    #[arg(long, value_enum, default_value_t = Which::All)]
    pub which: Which,
    #[arg(long, default_value_t = 0)]
    pub genus: u32,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub k: i64,
    /// Number of colours N_c
    #[arg(long, default_value_t = 1)]
    pub nc: u32,
    /// Number of flavours N_f
    #[arg(long, default_value_t = 1)]
    pub nf: u32,
    /// Target dimension n of CP^n
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Sweep k over [--k-min, --k-max] into a CSV with one column per index
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, default_value_t = -10, allow_negative_numbers = true)]
    pub k_min: i64,
    #[arg(long, default_value_t = 10, allow_negative_numbers = true)]
    pub k_max: i64,
}

pub fn index(args: &IndexArgs) -> CliResult<Outcome> {
    let params = |k| IndexParams { genus: args.genus, k, n_c: args.nc, n_f: args.nf, n: args.n };
    let kinds = args.which.kinds();
    let p = params(args.k);
    let mut outputs = json!({});
    let mut summary = Vec::new();
    for &kind in &kinds {
        let v = moduli_index(&p, kind);
        summary.push(format!("{} = {v}", kind_name(kind)));
        outputs[kind_name(kind)] = json!(v);
    }
    if kinds.len() == 1 {
        outputs["value"] = json!(moduli_index(&p, kinds[0]));
    }
    if let Some(path) = &args.table {
        if args.k_min > args.k_max {
            return Err(CliError::precondition("--k-min exceeds --k-max"));
        }
        let mut w = csv::Writer::from_writer(File::create(path)?);
        let mut header = vec!["k".to_string()];
        header.extend(kinds.iter().map(|&k| kind_name(k)));
        w.write_record(&header)?;
        for k in args.k_min..=args.k_max {
            let mut row = vec![k.to_string()];
            row.extend(kinds.iter().map(|&kind| moduli_index(&params(k), kind).to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        outputs["table"] = json!(path.display().to_string());
    }
    let inputs = json!({"genus": args.genus, "k": args.k, "n_c": args.nc, "n_f": args.nf, "n": args.n});
    Ok(Outcome { inputs, outputs, passed: true, summary })
}

#[derive(Args, Debug)]
pub struct SelectionArgs {
    /// Target dimension n of CP^n
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub genus: u32,
    /// Twist class in Z_{n+1}; 0 is the trivial bundle
    #[arg(long, default_value_t = 0)]
    pub class: u32,
    /// Members are listed over [--k-min, --k-max]
    #[arg(long, default_value_t = -10, allow_negative_numbers = true)]
    pub k_min: i64,
    #[arg(long, default_value_t = 10, allow_negative_numbers = true)]
    pub k_max: i64,
}

pub fn selection(args: &SelectionArgs) -> CliResult<Outcome> {
    let rule = allowed_vortex_numbers(args.n, args.genus, args.class)?;
    let outputs = json!({
        "description": rule.to_string(),
        "modulus": rule.modulus,
        "residue": rule.residue,
        "members": rule.members(args.k_min, args.k_max),
    });
    let inputs =
        json!({"n": args.n, "genus": args.genus, "class": args.class, "k_min": args.k_min, "k_max": args.k_max});
    Ok(Outcome { inputs, outputs, passed: true, summary: vec![rule.to_string()] })
}
