//! All-orders analysis. Each pointer branch is translated by exactly `±γ`
//! and the product of opposite branches keeps its overlap factor
//! `exp(-γ²/2δ²)`, so Eve's conditional states are Gram matrices and must be
//! positive.

use serde::Serialize;

use super::{
    assemble_report, eve_matrix, log_reference, post_selection_probability, tolerance_search, wma, EveStates, Regime,
    SecurityReport, ToleranceResult,
};
use crate::error::{Error, Result};
use crate::protocol::{Bit, ChannelModel, ProtocolParams};
use crate::qmath::{ComplexMatrix, DensityMatrix, JointDistribution};
use crate::quad::gauss_legendre_5;
use crate::weakvalues::{gaussian_density, CrossTerm, PointerWavefunction};

/// `P_a(x) = (λ₁+λ₂)‖ξ^±(x)‖² + (λ₃+λ₄)‖ξ^∓(x)‖²`, upper signs for `a = 0`.
pub fn pointer_density_exact(a: Bit, x: f64, channel: &ChannelModel, params: &ProtocolParams) -> f64 {
    let shifted = |c: f64| PointerWavefunction { center: c, width: params.delta, phase_rate: 0.0 };
    let towards = a.sign() * params.gamma;
    let aligned = channel.aligned_weight();
    aligned * gaussian_density(&shifted(towards), x) + (1.0 - aligned) * gaussian_density(&shifted(-towards), x)
}

/// `P(a=b) = [(1-η) + η e^{-s}] / [2(1+e^{-s})]`,
/// `P(a≠b) = [(1-η)e^{-s} + η] / [2(1+e^{-s})]`, `s = 2γα/δ²`.
pub fn joint_prob_exact(eta: f64, params: &ProtocolParams) -> Result<JointDistribution> {
    ChannelModel::depolarizing(eta)?;
    let q = (-params.separation_exponent()).exp();
    let norm = 2.0 * (1.0 + q);
    let same = ((1.0 - eta) + eta * q) / norm;
    let diff = ((1.0 - eta) * q + eta) / norm;
    JointDistribution::new([[same, diff], [diff, same]])
}

/// Unnormalized conditional state `ρ^a_E(x)` on the common scale of all four
/// ccq cells; its trace is proportional to `P̃(a, b)`.
fn unnormalized_state(a: Bit, x: f64, channel: &ChannelModel, params: &ProtocolParams) -> Result<ComplexMatrix> {
    eve_matrix(a, x, channel, params, CrossTerm::Exact, log_reference(params.alpha, params))
}

/// Joint table for an arbitrary Bell-diagonal channel, from the traces of the
/// unnormalized conditional states.
pub fn joint_prob_exact_channel(channel: &ChannelModel, params: &ProtocolParams) -> Result<JointDistribution> {
    let mut w = [[0.0; 2]; 2];
    for a in Bit::BOTH {
        for b in Bit::BOTH {
            w[a.index()][b.index()] = unnormalized_state(a, b.sign() * params.alpha, channel, params)?.trace()?.re;
        }
    }
    JointDistribution::from_weights(w)
}

/// `ρ^{a,b}_E = ρ^a_E((-1)^b α)`, trace-normalized. Fails if the state is not
/// positive within `1e-10`.
pub fn eve_state_exact(a: Bit, b: Bit, eta: f64, params: &ProtocolParams) -> Result<DensityMatrix> {
    let channel = ChannelModel::depolarizing(eta)?;
    eve_state_exact_channel(a, b, &channel, params)
}

pub fn eve_state_exact_channel(
    a: Bit,
    b: Bit,
    channel: &ChannelModel,
    params: &ProtocolParams,
) -> Result<DensityMatrix> {
    DensityMatrix::from_unnormalized(unnormalized_state(a, b.sign() * params.alpha, channel, params)?)
}

fn eve_states(channel: &ChannelModel, params: &ProtocolParams) -> Result<EveStates> {
    let s = |a, b| eve_state_exact_channel(a, b, channel, params);
    Ok([[s(Bit::Zero, Bit::Zero)?, s(Bit::Zero, Bit::One)?], [s(Bit::One, Bit::Zero)?, s(Bit::One, Bit::One)?]])
}

pub fn holevo_exact(eta: f64, params: &ProtocolParams) -> Result<f64> {
    Ok(secret_fraction_exact(eta, params)?.holevo)
}

pub fn secret_fraction_exact(eta: f64, params: &ProtocolParams) -> Result<SecurityReport> {
    let channel = ChannelModel::depolarizing(eta)?;
    let joint = joint_prob_exact(eta, params)?;
    let eve = eve_states(&channel, params)?;
    let omega = post_selection_probability(params, |a, x| pointer_density_exact(a, x, &channel, params));
    assemble_report(Regime::Exact, eta, params, joint, &eve, omega, 0.0)
}

/// Holevo quantity with Eve's states and the joint table averaged over the
/// bins by 5-point Gauss–Legendre quadrature instead of evaluated at the bin
/// centres.
pub fn holevo_exact_bin_averaged(eta: f64, params: &ProtocolParams) -> Result<f64> {
    if params.alpha == 0.0 {
        return Err(Error::InvalidParameter("bins around ±0 coincide".into()));
    }
    let channel = ChannelModel::depolarizing(eta)?;
    let half = 0.5 * params.bin_width;
    let mut weights = [[0.0; 2]; 2];
    let mut mats = Vec::with_capacity(4);
    for a in Bit::BOTH {
        for b in Bit::BOTH {
            let centre = b.sign() * params.alpha;
            let mut acc = ComplexMatrix::zeros(4, 4);
            for (x, w) in gauss_legendre_5(centre - half, centre + half) {
                acc = acc.add(&unnormalized_state(a, x, &channel, params)?.scale_real(w))?;
            }
            weights[a.index()][b.index()] = acc.trace()?.re;
            mats.push(DensityMatrix::from_unnormalized(acc)?);
        }
    }
    let joint = JointDistribution::from_weights(weights)?;
    let mut it = mats.into_iter();
    let mut next = || it.next().expect("four cells");
    let eve = [[next(), next()], [next(), next()]];
    super::holevo_quantity(&joint, &eve)
}

/// Largest η with a positive all-orders secret fraction.
pub fn tolerance_exact(params: &ProtocolParams) -> Result<ToleranceResult> {
    tolerance_search(Regime::Exact, params, |eta| Ok(secret_fraction_exact(eta, params)?.secret_fraction))
}

/// Bin centres used by [`sixstate_limit_check`].
pub const SIXSTATE_ALPHAS: [f64; 4] = [10.0, 20.0, 40.0, 80.0];

/// Convergence of the all-orders QBER to the channel noise as `α` grows.
#[derive(Debug, Clone, Serialize)]
pub struct SixStateLimit {
    pub eta: f64,
    pub alphas: Vec<f64>,
    pub qbers: Vec<f64>,
    /// `|QBER - η|` per α.
    pub deviations: Vec<f64>,
    pub strictly_decreasing: bool,
}

pub fn sixstate_limit_check(eta: f64, params: &ProtocolParams) -> Result<SixStateLimit> {
    let mut qbers = Vec::with_capacity(SIXSTATE_ALPHAS.len());
    for &alpha in &SIXSTATE_ALPHAS {
        qbers.push(joint_prob_exact(eta, &params.with_alpha(alpha)?)?.qber());
    }
    let deviations: Vec<f64> = qbers.iter().map(|q| (q - eta).abs()).collect();
    let strictly_decreasing = deviations.windows(2).all(|w| w[1] < w[0]);
    Ok(SixStateLimit { eta, alphas: SIXSTATE_ALPHAS.to_vec(), qbers, deviations, strictly_decreasing })
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeComparison {
    pub eta: f64,
    pub f_wma: f64,
    pub f_exact: f64,
    /// `f_wma - f_exact`.
    pub gap: f64,
    /// The first-order analysis claims security where the exact one does not.
    pub conclusion_flips: bool,
}

pub fn wma_vs_exact_report(eta_grid: &[f64], params: &ProtocolParams) -> Result<Vec<RegimeComparison>> {
    eta_grid
        .iter()
        .map(|&eta| {
            let w = wma::secret_fraction_wma(eta, params)?;
            let e = secret_fraction_exact(eta, params)?;
            Ok(RegimeComparison {
                eta,
                f_wma: w.secret_fraction,
                f_exact: e.secret_fraction,
                gap: w.secret_fraction - e.secret_fraction,
                conclusion_flips: w.is_secure() && !e.is_secure(),
            })
        })
        .collect()
}
