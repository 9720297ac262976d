use std::fs;

use exotic_vortex::elliptic::Lattice;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use crate::report::{CliError, CliResult};

fn numbers(src: &str) -> CliResult<Vec<f64>> {
    src.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::parse(format!("`{t}` is not a number in `{src}`"))))
        .collect()
}

/// `a,b` is the rectangle `(a, ib)`; `x1,y1,x2,y2` is `ω₁ = x1+iy1`, `ω₂ = x2+iy2`.
pub fn lattice(src: &str) -> CliResult<Lattice> {
    let v = numbers(src)?;
    let lat = match v[..] {
        [a, b] => Lattice::rectangle(a, b),
        [x1, y1, x2, y2] => Lattice::new(Complex64::new(x1, y1), Complex64::new(x2, y2)),
        _ => return Err(CliError::parse(format!("lattice `{src}` needs 2 or 4 numbers"))),
    };
    Ok(lat?)
}

pub fn complex(src: &str) -> CliResult<Complex64> {
    match numbers(src)?[..] {
        [re, im] => Ok(Complex64::new(re, im)),
        _ => Err(CliError::parse(format!("point `{src}` needs the form re,im"))),
    }
}

/// Inline JSON when the argument starts with `{`, otherwise a file path.
pub fn json_source(src: &str) -> CliResult<String> {
    if src.trim_start().starts_with('{') {
        Ok(src.to_string())
    } else {
        fs::read_to_string(src).map_err(|e| CliError::precondition(format!("cannot read `{src}`: {e}")))
    }
}

/// Exact rational from `p/q`, an integer or a finite decimal such as `-1.25`.
pub fn rational(src: &str) -> CliResult<BigRational> {
    let bad = || CliError::parse(format!("`{src}` is not an exact rational"));
    let s = src.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let (negative, int) = match int.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, int.strip_prefix('+').unwrap_or(int)),
    };
    let digits = format!("{int}{frac}");
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mantissa: BigInt = digits.parse().map_err(|_| bad())?;
    let r = BigRational::new(mantissa, BigInt::from(10u32).pow(frac.len() as u32));
    Ok(if negative { -r } else { r })
}

/// Nearest rational with denominator at most `max_den` (continued fractions);
/// fails unless it lies within `tol` of `x`.
pub fn snap_rational(x: f64, tol: f64, max_den: i64) -> CliResult<BigRational> {
    if !x.is_finite() {
        return Err(CliError::parse(format!("area {x} is not finite")));
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    let mut best = (x.round() as i64, 1i64);
    for _ in 0..64 {
        let a = r.floor();
        let (h2, k2) = (a as i64 * h1 + h0, a as i64 * k1 + k0);
        if k2 > max_den {
            break;
        }
        best = (h2, k2);
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    if (best.0 as f64 / best.1 as f64 - x).abs() > tol {
        return Err(CliError::precondition(format!(
            "area {x} has no rational approximation with denominator <= {max_den} within {tol:e}"
        )));
    }
    Ok(BigRational::new(best.0.into(), best.1.into()))
}
