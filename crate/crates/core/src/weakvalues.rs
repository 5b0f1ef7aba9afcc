//! Weak values for pure and mixed pre-selections, and Gaussian pointer states.

use std::f64::consts::PI;

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmath::{c, inner, Complex, ComplexMatrix, DensityMatrix, StateVector};

/// Below this overlap (or post-selection probability) the weak value is singular.
pub const ORTHOGONALITY_TOL: f64 = 1e-14;

/// `⟨φ|A|ψ⟩ / ⟨φ|ψ⟩`.
pub fn weak_value_pure(obs: &ComplexMatrix, pre: &StateVector, post: &StateVector) -> Result<Complex> {
    let overlap = post.inner(pre)?;
    if overlap.norm() <= ORTHOGONALITY_TOL {
        return Err(Error::OrthogonalPostselection(overlap.norm()));
    }
    let a_pre = obs.apply(pre)?;
    Ok(inner(post.amplitudes(), &a_pre)? / overlap)
}

/// `⟨φ|Aρ|φ⟩ / ⟨φ|ρ|φ⟩`.
pub fn weak_value_mixed(obs: &ComplexMatrix, pre: &DensityMatrix, post: &StateVector) -> Result<Complex> {
    let rho = pre.matrix();
    let prob = post.expectation(rho)?.re;
    if prob <= ORTHOGONALITY_TOL {
        return Err(Error::OrthogonalPostselection(prob));
    }
    let a_rho = obs.matmul(rho)?;
    Ok(post.expectation(&a_rho)? / prob)
}

/// Canonical purification `Σ √p_i |ψ_i⟩ ⊗ |e_i⟩` from the eigendecomposition
/// of `rho`, ordered system ⊗ ancilla with ancilla dimension equal to the
/// system dimension.
pub fn purify(rho: &DensityMatrix) -> Result<StateVector> {
    let d = rho.dim();
    let eig = rho.eigen()?;
    let mut amps = vec![c(0.0, 0.0); d * d];
    for (k, &p) in eig.values.iter().enumerate() {
        let weight = p.max(0.0).sqrt();
        for s in 0..d {
            amps[s * d + k] += eig.vectors[(s, k)] * weight;
        }
    }
    StateVector::normalized(amps)
}

/// Weak value of `A ⊗ 1` between the purified pre-selection `|Ψ⟩` and the
/// post-selected joint state `|Φ⟩ = N |φ⟩ ⊗ Σ √p_i ⟨φ|ψ_i⟩ |e_i⟩`.
///
/// Agrees with [`weak_value_mixed`]; kept as a separate code path that works
/// in the enlarged system–ancilla space.
pub fn postselected_purification_weak_value(
    obs: &ComplexMatrix,
    rho: &DensityMatrix,
    post: &StateVector,
) -> Result<Complex> {
    let d = rho.dim();
    if post.dim() != d || obs.rows() != d {
        return Err(Error::Dimension("observable, state and post-selection disagree".into()));
    }
    let eig = rho.eigen()?;
    let big_psi = purify(rho)?;

    let ancilla: Vec<Complex> = eig
        .values
        .iter()
        .enumerate()
        .map(|(k, &p)| inner(post.amplitudes(), &eig.vector(k)).map(|ov| ov * p.max(0.0).sqrt()))
        .collect::<Result<_>>()?;
    let weight: f64 = ancilla.iter().map(|z| z.norm_sqr()).sum();
    if weight <= ORTHOGONALITY_TOL {
        return Err(Error::OrthogonalPostselection(weight));
    }
    let big_phi = StateVector::normalized(post.tensor(&StateVector::normalized(ancilla)?).amplitudes().to_vec())?;

    let lifted = obs.kron(&ComplexMatrix::identity(d));
    weak_value_pure(&lifted, &big_psi, &big_phi)
}

/// Gaussian pointer `ξ(x) = (2πδ²)^(-1/4) e^{i k x} exp(-(x - c)² / 4δ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointerWavefunction {
    pub center: f64,
    pub width: f64,
    pub phase_rate: f64,
}

impl PointerWavefunction {
    pub fn new(center: f64, width: f64, phase_rate: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidParameter(format!("pointer width must be positive, got {width}")));
        }
        if !center.is_finite() || !phase_rate.is_finite() {
            return Err(Error::NonFinite("pointer"));
        }
        Ok(Self { center, width, phase_rate })
    }

    /// The ready state, centred at the origin.
    pub fn ready(width: f64) -> Result<Self> {
        Self::new(0.0, width, 0.0)
    }

    pub fn amplitude(&self, x: f64) -> Complex {
        let env = (2.0 * PI * self.width * self.width).powf(-0.25)
            * (-(x - self.center).powi(2) / (4.0 * self.width * self.width)).exp();
        Complex::from_polar(env, self.phase_rate * x)
    }

    /// `ln ‖ξ(x)‖²`, finite far into the tails.
    pub fn log_density(&self, x: f64) -> f64 {
        let var = self.width * self.width;
        -0.5 * (2.0 * PI * var).ln() - (x - self.center).powi(2) / (2.0 * var)
    }
}

/// First-order pointer after a weak measurement with weak value `wv`.
pub fn pointer_after_wma(wv: Complex, gamma: f64, delta: f64) -> Result<PointerWavefunction> {
    PointerWavefunction::new(gamma * wv.re, delta, gamma * wv.im)
}

/// Pointer translated by `γ·wv_real` to all orders.
///
/// The translation is exact only when the weak value is an eigenvalue (±1) of
/// the measured observable; other values are accepted but logged.
pub fn pointer_exact_shift(wv_real: f64, gamma: f64, delta: f64) -> Result<PointerWavefunction> {
    if (wv_real.abs() - 1.0).abs() > 1e-12 {
        warn!("exact pointer shift requested for weak value {wv_real}, which is not an eigenvalue ±1");
    }
    PointerWavefunction::new(gamma * wv_real, delta, 0.0)
}

/// `‖ξ(x)‖²`; independent of the phase rate.
pub fn gaussian_density(p: &PointerWavefunction, x: f64) -> f64 {
    p.log_density(x).exp()
}

/// How the product `ξ_a(x) ξ_b(x)` of two real Gaussians is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CrossTerm {
    /// The exact product.
    Exact,
    /// First-order rule: drop the `exp(-(c_a - c_b)² / 8δ²)` overlap factor,
    /// leaving the density centred at the midpoint.
    Wma,
}

/// `ln` of the cross term; see [`gaussian_cross_term`].
pub fn log_gaussian_cross_term(
    a: &PointerWavefunction,
    b: &PointerWavefunction,
    x: f64,
    rule: CrossTerm,
) -> Result<f64> {
    if (a.width - b.width).abs() > 1e-15 * a.width.max(b.width) {
        return Err(Error::InvalidParameter("cross term needs equal pointer widths".into()));
    }
    if a.phase_rate != 0.0 || b.phase_rate != 0.0 {
        return Err(Error::InvalidParameter("cross term needs real pointers".into()));
    }
    let var = a.width * a.width;
    let mid = PointerWavefunction { center: 0.5 * (a.center + b.center), ..*a };
    let overlap = match rule {
        CrossTerm::Exact => -(a.center - b.center).powi(2) / (8.0 * var),
        CrossTerm::Wma => 0.0,
    };
    Ok(mid.log_density(x) + overlap)
}

/// `ξ_a(x) ξ_b(x)` for two real pointers of equal width.
///
/// For centres `±γ` this is `‖ξ(x)‖² exp(-γ²/2δ²)` exactly, or `‖ξ(x)‖²`
/// under [`CrossTerm::Wma`].
pub fn gaussian_cross_term(a: &PointerWavefunction, b: &PointerWavefunction, x: f64, rule: CrossTerm) -> Result<f64> {
    Ok(log_gaussian_cross_term(a, b, x, rule)?.exp())
}
