//! Convention ledger.
//!
//! | quantity | convention |
//! |---|---|
//! | domain metric | `ds² = λ²(z)|dz|²`, `λ²` returned by `metric_density` |
//! | sphere chart | `λ² = 4 / (κ₀ (1 + |z|²)²)`, area `4π/κ₀`; south chart `ζ = 1/z` |
//! | torus chart | `λ² = c` constant (`c = 1` unless uniformised), area `c·Im(ω̄₁ω₂)` |
//! | flat Laplacian | `Δ₀ = ∂²ₓ + ∂²ᵧ = 4∂∂̄`, metric Laplacian `Δ = Δ₀/λ²` |
//! | Gauss curvature | `K = -Δ₀ log λ / λ²` |
//! | Hermitian metric | `h_{ij̄} = g(∂ᵢ, ∂̄ⱼ)` (complex-bilinear extension), so `g = 2 Re h` |
//! | Fubini–Study | `h = s[(1+|w|²)δ - w̄ᵢwⱼ]/(1+|w|²)²`, `s = 2/κ` fixed by the HSC check |
//! | Chern curvature | `R_{ij̄kl̄} = -∂ₖ∂̄ₗh_{ij̄} + (∂ₖh · h⁻¹ · ∂̄ₗh)_{ij}` |
//! | HSC | `H(ξ) = R(ξ,ξ̄,ξ,ξ̄)/|ξ|⁴`, positive on `CPⁿ` |
//! | Higgs density | `ρ = |∂ψ|²_h / h_Σ` with `h_Σ = λ²/2`; for `n = 1`, `ρ = σ(ψ)|ψ'|²/λ²`, `σ = 4/(κ(1+|w|²)²)` |
//! | magnetic field | `B = *F/i` oriented so that `B = κρ - κ₀` for `n = 1` |
//! | matrix field | `B = R(∂ψ, ∂̄ψ)/h_Σ - κ₀𝟙` in an `h`-orthonormal frame |
//! | second-order equation | `Δ log ρ + 2κρ - 2κ₀ = 0` away from zeros |
//! | vortex number | `k = (1/2π) ∫ tr B`, equal to `n(2g-2) + (n+1)·deg ψ` untwisted |
//! | twist class | commutator of `SU(n+1)` lifts `= exp(2πi c/(n+1))·𝟙`, `c ∈ Z_{n+1}` |
//! | selection rule | `k ≡ n(2g-2) + c (mod n+1)` |
//! | binomial | integer `C(x, m)` with the symmetric extension to negative `x` |

use sha2::{Digest, Sha256};

/// Machine-readable copy of the table above; hashed into run reports.
pub const LEDGER: &str = "\
metric=lambda^2|dz|^2;\
sphere=4/(kappa0(1+|z|^2)^2),south=1/z;\
torus=const;\
laplacian=4ddbar/lambda^2;\
gauss=-lap0(log lambda)/lambda^2;\
hermitian=g(d_i,dbar_j);\
fubini_study=s[(1+|w|^2)delta-conj(w_i)w_j]/(1+|w|^2)^2,s=2/kappa;\
chern=-d_k dbar_l h+dh h^-1 dbar h;\
hsc=R(xi,xibar,xi,xibar)/|xi|^4;\
rho=|dpsi|_h^2/h_sigma,h_sigma=lambda^2/2;\
b=kappa*rho-kappa0;\
bmatrix=R(dpsi,dpsibar)/h_sigma-kappa0;\
liouville=lap(log rho)+2kappa rho-2kappa0;\
k=flux/2pi;\
twist=commutator=exp(2pi i c/(n+1));\
selection=k=n(2g-2)+c mod n+1;\
binomial=symmetric-extension";

/// Hex SHA-256 of [`LEDGER`].
pub fn ledger_hash() -> String {
    let digest = Sha256::digest(LEDGER.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
