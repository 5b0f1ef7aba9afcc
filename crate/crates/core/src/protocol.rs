//! Entanglement-based protocol: Bell states, the depolarizing channel, Bob's
//! post-selection states and the weakly measured observable `1 ⊗ σ_z`.
//!
//! Qubit order is Alice ⊗ Bob, computational index `2a + b`. Bell states are
//! indexed 0..4 in the order Φ⁺, Φ⁻, Ψ⁺, Ψ⁻; Eve's purifying basis `|ν_i⟩`
//! follows the same order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{ComplexMatrix, DensityMatrix, StateVector};

/// A raw key bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub const BOTH: [Bit; 2] = [Bit::Zero, Bit::One];

    pub fn index(self) -> usize {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    /// `(-1)^bit`.
    pub fn sign(self) -> f64 {
        match self {
            Bit::Zero => 1.0,
            Bit::One => -1.0,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            _ => Err(Error::InvalidParameter(format!("bit must be 0 or 1, got {i}"))),
        }
    }
}

const WEIGHT_TOL: f64 = 1e-12;

/// Bell-diagonal channel with weights `λ₁..λ₄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelModel {
    /// Depolarizing noise, when the channel was built from it.
    pub eta: Option<f64>,
    pub lambdas: [f64; 4],
}

impl ChannelModel {
    /// `λ₁ = 1 - 3η/2`, `λ₂ = λ₃ = λ₄ = η/2`.
    pub fn depolarizing(eta: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&eta) {
            return Err(Error::InvalidParameter(format!("eta must lie in [0, 1/2], got {eta}")));
        }
        let h = eta / 2.0;
        Ok(Self { eta: Some(eta), lambdas: [1.0 - 1.5 * eta, h, h, h] })
    }

    pub fn bell_diagonal(lambdas: [f64; 4]) -> Result<Self> {
        if lambdas.iter().any(|&l| !(l >= 0.0)) {
            return Err(Error::InvalidParameter(format!("negative Bell weight in {lambdas:?}")));
        }
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidParameter(format!("Bell weights sum to {sum}")));
        }
        Ok(Self { eta: None, lambdas })
    }

    /// Weights of the branches whose pointer moves towards `+γ` for Alice's
    /// bit 0, i.e. `λ₁ + λ₂`.
    pub fn aligned_weight(&self) -> f64 {
        self.lambdas[0] + self.lambdas[1]
    }
}

/// Measurement and pointer parameters of a protocol run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Interaction strength γ.
    pub gamma: f64,
    /// Pointer width δ.
    pub delta: f64,
    /// Bin centre α.
    pub alpha: f64,
    /// Bin width w.
    pub bin_width: f64,
}

impl ProtocolParams {
    pub fn new(gamma: f64, delta: f64, alpha: f64, bin_width: f64) -> Result<Self> {
        let finite = [gamma, delta, alpha, bin_width].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("protocol parameters"));
        }
        if gamma < 0.0 {
            return Err(Error::InvalidParameter(format!("gamma must be ≥ 0, got {gamma}")));
        }
        if delta <= 0.0 {
            return Err(Error::InvalidParameter(format!("delta must be > 0, got {delta}")));
        }
        if alpha < 0.0 {
            return Err(Error::InvalidParameter(format!("alpha must be ≥ 0, got {alpha}")));
        }
        if bin_width <= 0.0 {
            return Err(Error::InvalidParameter(format!("bin width must be > 0, got {bin_width}")));
        }
        if alpha > 0.0 && bin_width >= 2.0 * alpha {
            return Err(Error::InvalidParameter(format!("bins of width {bin_width} around ±{alpha} overlap")));
        }
        Ok(Self { gamma, delta, alpha, bin_width })
    }

    /// Bin width defaults to `0.1 δ`.
    pub fn with_default_bins(gamma: f64, delta: f64, alpha: f64) -> Result<Self> {
        Self::new(gamma, delta, alpha, 0.1 * delta)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.gamma, self.delta, alpha, self.bin_width)
    }

    /// `2γα/δ²`, the log-ratio of the two pointer branches at `x = α`.
    pub fn separation_exponent(&self) -> f64 {
        2.0 * self.gamma * self.alpha / (self.delta * self.delta)
    }
}

/// Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
pub fn bell_states() -> [StateVector; 4] {
    let v = |a: [f64; 4]| StateVector::from_real(&a).expect("Bell state is normalizable");
    [v([1.0, 0.0, 0.0, 1.0]), v([1.0, 0.0, 0.0, -1.0]), v([0.0, 1.0, 1.0, 0.0]), v([0.0, 1.0, -1.0, 0.0])]
}

/// `Σ λ_i |Φ_i⟩⟨Φ_i|`.
pub fn rho_ab(channel: &ChannelModel) -> Result<DensityMatrix> {
    let mut m = ComplexMatrix::zeros(4, 4);
    for (lambda, phi) in channel.lambdas.iter().zip(bell_states()) {
        m = m.add(&phi.projector().scale_real(*lambda))?;
    }
    DensityMatrix::new(m.hermitian_part())
}

/// `|ψ^a⟩ = |a⟩ ⊗ |+⟩`.
pub fn postselection_state(a: Bit) -> StateVector {
    let plus = StateVector::from_real(&[1.0, 1.0]).expect("|+⟩");
    StateVector::basis(2, a.index()).tensor(&plus)
}

/// `σ = 1 ⊗ σ_z`.
pub fn sigma_observable() -> ComplexMatrix {
    ComplexMatrix::identity(2).kron(&ComplexMatrix::diagonal(&[1.0, -1.0]))
}

/// Weak values `⟨σ^a_i⟩_w` of `σ` for pre-selection `|Φ_i⟩` and
/// post-selection `|ψ^a⟩`, indexed `[a][i]`.
pub const WEAK_VALUE_TABLE: [[f64; 4]; 2] = [[1.0, 1.0, -1.0, -1.0], [-1.0, -1.0, 1.0, 1.0]];

pub fn weak_value_table() -> [[f64; 4]; 2] {
    WEAK_VALUE_TABLE
}

/// Sign of `⟨ψ^a|Φ_i⟩` (its magnitude is always ½), indexed `[a][i]`.
pub const BELL_OVERLAP_SIGNS: [[f64; 4]; 2] = [[1.0, 1.0, 1.0, 1.0], [1.0, -1.0, 1.0, -1.0]];

/// Weak value of `σ` for the mixed pre-selection `ρ_AB` and post-selection
/// `|ψ^a⟩`: `(-1)^a (λ₁ + λ₂ - λ₃ - λ₄)`, which is `(-1)^a (1 - 2η)` for the
/// depolarizing channel.
pub fn weak_value_sigma(channel: &ChannelModel, a: Bit) -> f64 {
    let l = channel.lambdas;
    a.sign() * (l[0] + l[1] - l[2] - l[3])
}
