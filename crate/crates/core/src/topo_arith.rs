//! Exact topological arithmetic: selection rules, expected dimensions of
//! moduli spaces, the Bradlow inequality and the Witten-index sum.
//!
//! Everything here is integer or rational; nothing touches floating point.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residue class `k ≡ residue (mod modulus)` of achievable vortex numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRule {
    pub modulus: i64,
    /// Least nonnegative representative.
    pub residue: i64,
}

impl SelectionRule {
    pub fn contains(&self, k: i64) -> bool {
        k.mod_floor(&self.modulus) == self.residue
    }

    /// Members of the class in `[lo, hi]`.
    pub fn members(&self, lo: i64, hi: i64) -> Vec<i64> {
        (lo..=hi).filter(|&k| self.contains(k)).collect()
    }
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k ≡ {} mod {}", self.residue, self.modulus)
    }
}

/// Vortex numbers reachable from twisted maps into `CPⁿ` on a genus-`g`
/// surface with twist class `class ∈ Z_{n+1}` (0 for the trivial class).
///
/// Flat `PSU(n+1)` bundles over the sphere are trivial, so a nonzero class
/// at `g = 0` is rejected.
pub fn allowed_vortex_numbers(n: u32, genus: u32, class: u32) -> Result<SelectionRule> {
    if n == 0 {
        return Err(Error::Precondition("target dimension must be positive".into()));
    }
    let modulus = n as i64 + 1;
    let class = class as i64 % modulus;
    if genus == 0 && class != 0 {
        return Err(Error::NontrivialClassOnSphere);
    }
    let base = n as i64 * (2 * genus as i64 - 2);
    Ok(SelectionRule { modulus, residue: (base + class).mod_floor(&modulus) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexParams {
    pub genus: u32,
    pub k: i64,
    pub n_c: u32,
    pub n_f: u32,
    /// Complex dimension of the target space form.
    pub n: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    /// Flat `PSU(n+1)` connections: `dim PSU(n+1)·(2g-2)`.
    FlatConnection,
    /// Twisted holomorphic sections, the exotic index minus the flat part.
    TwistedSection,
    /// Flat connection plus section for `n = 1`: `2k`.
    CombinedAbelian,
    /// `2k + n(1-n)(2-2g)`.
    ExoticNonAbelian,
    /// `2k + N_c(N_f - N_c)(2-2g)`.
    Vortex,
}

impl IndexKind {
    pub const ALL: [IndexKind; 5] = [
        IndexKind::FlatConnection,
        IndexKind::TwistedSection,
        IndexKind::CombinedAbelian,
        IndexKind::ExoticNonAbelian,
        IndexKind::Vortex,
    ];
}

/// Real expected dimension of the selected moduli problem.
pub fn moduli_index(p: &IndexParams, which: IndexKind) -> i64 {
    let chi = 2 - 2 * p.genus as i64;
    let n = p.n as i64;
    let flat = ((n + 1) * (n + 1) - 1) * -chi;
    let exotic = 2 * p.k + n * (1 - n) * chi;
    match which {
        IndexKind::FlatConnection => flat,
        IndexKind::TwistedSection => exotic - flat,
        IndexKind::CombinedAbelian => 2 * p.k,
        IndexKind::ExoticNonAbelian => exotic,
        IndexKind::Vortex => {
            let (nc, nf) = (p.n_c as i64, p.n_f as i64);
            2 * p.k + nc * (nf - nc) * chi
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingParams {
    pub genus: u32,
    pub n_f: u32,
    /// Chern–Simons level.
    pub level: i64,
    /// Normalised area.
    pub area: BigRational,
    pub k: i64,
}

impl CountingParams {
    /// The exotic regime pairs negative coupling with `λ = -N_f`.
    pub fn is_exotic(&self) -> bool {
        self.level == -(self.n_f as i64)
    }
}

fn factorial_ratio(top: &BigInt, m: u64) -> BigInt {
    // falling factorial top(top-1)…(top-m+1)/m!, exact at every step
    let mut acc = BigInt::one();
    for i in 0..m {
        acc = acc * (top - BigInt::from(i)) / BigInt::from(i + 1);
    }
    acc
}

/// Binomial coefficient for arbitrary integers, extended so that
/// `C(x, m) = C(x, x - m)` holds for every integer `x`.
///
/// For `x ≥ 0` this is the usual coefficient (zero outside `0 ≤ m ≤ x`).
/// For `x < 0` it is `(-1)^m C(m - x - 1, m)` when `m ≥ 0`,
/// `(-1)^{x-m} C(-m - 1, x - m)` when `m ≤ x`, and zero in between.
pub fn binomial(x: &BigInt, m: &BigInt) -> BigInt {
    let sign = |e: &BigInt| if e.is_odd() { -BigInt::one() } else { BigInt::one() };
    if !x.is_negative() {
        if m.is_negative() || m > x {
            return BigInt::zero();
        }
        let m = m.min(&(x - m)).clone();
        return factorial_ratio(x, m.to_u64().expect("bottom fits in u64"));
    }
    if !m.is_negative() {
        return sign(m) * binomial(&(m - x - BigInt::one()), m);
    }
    if m <= x {
        let e = x - m;
        return sign(&e) * binomial(&(-m - BigInt::one()), &e);
    }
    BigInt::zero()
}

/// `x(x-1)…(x-m+1)/m!` with `C(x, m) = 0` for `m < 0`. Agrees with
/// [`binomial`] except for `m ≤ x < 0`.
pub fn falling_binomial(x: &BigInt, m: &BigInt) -> BigInt {
    if m.is_negative() {
        return BigInt::zero();
    }
    factorial_ratio(x, m.to_u64().expect("bottom fits in u64"))
}

fn integer_top(p: &CountingParams) -> Result<BigInt> {
    let shifted = (&p.area - BigRational::from_integer(p.k.into())) * BigRational::from_integer(p.level.into());
    if !shifted.is_integer() {
        return Err(Error::NonIntegerTop(format!("λ(A - k) = {shifted}")));
    }
    Ok(shifted.to_integer())
}

/// Formal Euler character of the `k`-vortex moduli space:
/// `Σⱼ λʲ N_f^{g-j} C(g,j) C(λ(A-k) + N_f(k-g+1) - 1, N_f(k-g+1) + g - j - 1)`.
pub fn witten_index(p: &CountingParams) -> Result<BigInt> {
    let shifted = integer_top(p)?;
    let g = p.genus as i64;
    let nf = BigInt::from(p.n_f);
    let lambda = BigInt::from(p.level);
    let base = &nf * BigInt::from(p.k - g + 1);
    let top = shifted + &base - BigInt::one();
    let mut total = BigInt::zero();
    for j in 0..=g {
        let weight = num_traits::pow(lambda.clone(), j as usize)
            * num_traits::pow(nf.clone(), (g - j) as usize)
            * binomial(&BigInt::from(g), &BigInt::from(j));
        let bottom = &base + BigInt::from(g - j - 1);
        total += weight * binomial(&top, &bottom);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BradlowVerdict {
    pub satisfied: bool,
    pub exotic: bool,
    pub explanation: String,
}

/// Strict area inequality: `k > A` in the exotic regime, `k < A` otherwise.
pub fn bradlow_check(p: &CountingParams) -> BradlowVerdict {
    let k = BigRational::from_integer(p.k.into());
    let exotic = p.is_exotic();
    let satisfied = if exotic { k > p.area } else { k < p.area };
    let explanation = if exotic {
        format!("exotic regime (level = -N_f): vortices produce area, need k = {} > A = {}", p.k, p.area)
    } else {
        format!("conventional regime: vortices take up area, need k = {} < A = {}", p.k, p.area)
    };
    BradlowVerdict { satisfied, exotic, explanation }
}

/// Witten index with sectors violating the Bradlow inequality set to zero.
pub fn gated_witten_index(p: &CountingParams) -> Result<BigInt> {
    let index = witten_index(p)?;
    Ok(if bradlow_check(p).satisfied { index } else { BigInt::zero() })
}
