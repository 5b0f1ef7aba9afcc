//! First-order (weak-measurement approximation) analysis.
//!
//! Every pointer branch is displaced by `γ` times its weak value and the
//! branch product `ξ⁺ξ⁻` is replaced by `‖ξ‖²`. The resulting conditional
//! states of Eve are not guaranteed to be positive; small negative
//! eigenvalues are clipped.

use log::{debug, warn};

use super::{
    assemble_report, eve_matrix, log_reference, post_selection_probability, tolerance_search, EveStates, Regime,
    SecurityReport, ToleranceResult,
};
use crate::error::Result;
use crate::protocol::{weak_value_sigma, Bit, ChannelModel, ProtocolParams};
use crate::qmath::{hermitian_eigen, DensityMatrix, JointDistribution};
use crate::weakvalues::{gaussian_density, CrossTerm, PointerWavefunction};

/// Negative eigenvalues below this are reported as an approximation artifact.
pub const CLIP_WARNING: f64 = 1e-8;

fn exponent(eta: f64, params: &ProtocolParams) -> f64 {
    (1.0 - 2.0 * eta) * params.separation_exponent()
}

/// `P(a=b) = 1/[2(1+e^{-t})]`, `P(a≠b) = 1/[2(1+e^{t})]`,
/// `t = 2(1-2η)γα/δ²`.
pub fn joint_prob_wma(eta: f64, params: &ProtocolParams) -> Result<JointDistribution> {
    ChannelModel::depolarizing(eta)?;
    let t = exponent(eta, params);
    let same = 0.5 / (1.0 + (-t).exp());
    let diff = 0.5 / (1.0 + t.exp());
    JointDistribution::new([[same, diff], [diff, same]])
}

/// `Q = 1/(1 + e^{t})`.
pub fn qber_wma(eta: f64, params: &ProtocolParams) -> Result<f64> {
    ChannelModel::depolarizing(eta)?;
    Ok(1.0 / (1.0 + exponent(eta, params).exp()))
}

/// Gaussian pointer density centred at `γ⟨σ^a⟩_w = γ(-1)^a(1-2η)`.
pub fn pointer_density_wma(a: Bit, x: f64, eta: f64, params: &ProtocolParams) -> Result<f64> {
    let channel = ChannelModel::depolarizing(eta)?;
    Ok(gaussian_density(&wma_pointer(a, &channel, params), x))
}

fn wma_pointer(a: Bit, channel: &ChannelModel, params: &ProtocolParams) -> PointerWavefunction {
    PointerWavefunction { center: params.gamma * weak_value_sigma(channel, a), width: params.delta, phase_rate: 0.0 }
}

/// Eve's memory after the pointer is found at `x`, trace-normalized.
pub fn eve_state_wma(a: Bit, x: f64, eta: f64, params: &ProtocolParams) -> Result<DensityMatrix> {
    Ok(eve_state_wma_clipped(a, x, eta, params)?.0)
}

/// Same as [`eve_state_wma`], also returning the most negative eigenvalue
/// that was removed (0 when the matrix was already positive).
pub fn eve_state_wma_clipped(a: Bit, x: f64, eta: f64, params: &ProtocolParams) -> Result<(DensityMatrix, f64)> {
    let channel = ChannelModel::depolarizing(eta)?;
    let m = eve_matrix(a, x, &channel, params, CrossTerm::Wma, log_reference(x, params))?;
    let tr = m.trace()?.re;
    let m = m.scale_real(1.0 / tr);
    let eig = hermitian_eigen(&m)?;
    let min = eig.values.iter().copied().fold(0.0, f64::min);
    if min >= 0.0 {
        return Ok((DensityMatrix::from_unnormalized(m)?, 0.0));
    }
    if min < -CLIP_WARNING {
        warn!("WMA state for a={}, x={x}, eta={eta} has eigenvalue {min:e}; clipped", a.index());
    } else {
        debug!("clipping WMA eigenvalue {min:e}");
    }
    let clipped: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
    Ok((DensityMatrix::from_unnormalized(eig.reconstruct(&clipped)?)?, min))
}

fn eve_states(eta: f64, params: &ProtocolParams) -> Result<(EveStates, f64)> {
    let mut worst = 0.0f64;
    let mut state = |a: Bit, b: Bit| -> Result<DensityMatrix> {
        let (rho, clipped) = eve_state_wma_clipped(a, b.sign() * params.alpha, eta, params)?;
        worst = worst.min(clipped);
        Ok(rho)
    };
    let states = [
        [state(Bit::Zero, Bit::Zero)?, state(Bit::Zero, Bit::One)?],
        [state(Bit::One, Bit::Zero)?, state(Bit::One, Bit::One)?],
    ];
    Ok((states, worst))
}

pub fn holevo_wma(eta: f64, params: &ProtocolParams) -> Result<f64> {
    Ok(secret_fraction_wma(eta, params)?.holevo)
}

pub fn secret_fraction_wma(eta: f64, params: &ProtocolParams) -> Result<SecurityReport> {
    let joint = joint_prob_wma(eta, params)?;
    let (eve, clipped) = eve_states(eta, params)?;
    let channel = ChannelModel::depolarizing(eta)?;
    let omega = post_selection_probability(params, |a, x| gaussian_density(&wma_pointer(a, &channel, params), x));
    assemble_report(Regime::Wma, eta, params, joint, &eve, omega, clipped)
}

/// Largest η with a positive first-order secret fraction.
pub fn tolerance_wma(params: &ProtocolParams) -> Result<ToleranceResult> {
    tolerance_search(Regime::Wma, params, |eta| Ok(secret_fraction_wma(eta, params)?.secret_fraction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{binary_entropy, von_neumann_entropy, ComplexMatrix};
    use crate::quad::adaptive_simpson;

    fn params(alpha: f64) -> ProtocolParams {
        ProtocolParams::with_default_bins(0.1, 1.0, alpha).unwrap()
    }

    #[test]
    fn joint_examples() {
        let p = joint_prob_wma(0.5, &params(30.0)).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert!((p.get(a, b) - 0.25).abs() < 1e-15);
            }
        }
        let p = joint_prob_wma(0.1, &params(30.0)).unwrap();
        let expected = 0.5 / (1.0 + 4.8f64.exp());
        assert!((p.get(0, 1) - expected).abs() < 1e-15);
        assert_eq!(p.get(0, 0), p.get(1, 1));
        assert_eq!(p.get(0, 1), p.get(1, 0));
        assert!((p.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn qber_examples() {
        assert_eq!(qber_wma(0.5, &params(30.0)).unwrap(), 0.5);
        let q = qber_wma(0.1, &params(30.0)).unwrap();
        assert!((q - 1.0 / (1.0 + 4.8f64.exp())).abs() < 1e-15);
        let p = joint_prob_wma(0.1, &params(30.0)).unwrap();
        assert!((q - p.qber()).abs() < 1e-12);
        assert!(qber_wma(0.2, &params(5000.0)).unwrap() < 1e-100);
        assert!(qber_wma(0.6, &params(30.0)).is_err());
    }

    #[test]
    fn pointer_density_centres_and_mass() {
        let p = params(30.0);
        let peak = |a: Bit, eta: f64| {
            let f = |x: f64| pointer_density_wma(a, x, eta, &p).unwrap();
            let m = adaptive_simpson(&f, -12.0, 12.0, 1e-12);
            let mean = adaptive_simpson(&|x: f64| x * f(x), -12.0, 12.0, 1e-12);
            (m, mean)
        };
        let (m, mean) = peak(Bit::Zero, 0.0);
        assert!((m - 1.0).abs() < 1e-8 && (mean - 0.1).abs() < 1e-8);
        let (_, mean) = peak(Bit::One, 0.5);
        assert!(mean.abs() < 1e-10);
        let (_, mean) = peak(Bit::One, 0.2);
        assert!((mean + 0.06).abs() < 1e-8);
    }

    #[test]
    fn noiseless_state_is_pure_nu1() {
        let rho = eve_state_wma(Bit::Zero, 2.0, 0.0, &params(2.0)).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(von_neumann_entropy(&rho).unwrap().abs() < 1e-9);
    }

    // Hand transcription of the first-order 4×4 memory in the ν basis.
    fn transcribed(a: Bit, x: f64, eta: f64, p: &ProtocolParams) -> ComplexMatrix {
        let g = |c: f64| (-(x - c).powi(2) / (2.0 * p.delta * p.delta)).exp();
        let (s_plus, s_minus, s) = (g(p.gamma), g(-p.gamma), g(0.0));
        let l1 = 1.0 - 1.5 * eta;
        let h = eta / 2.0;
        let k = (l1 * h).sqrt();
        let (s_a, s_b) = if a == Bit::Zero { (s_plus, s_minus) } else { (s_minus, s_plus) };
        let sg = if a == Bit::Zero { [1.0, 1.0, 1.0, 1.0] } else { [1.0, -1.0, 1.0, -1.0] };
        let raw = [
            [l1 * s_a, k * s_a, k * s, k * s],
            [k * s_a, h * s_a, h * s, h * s],
            [k * s, h * s, h * s_b, h * s_b],
            [k * s, h * s, h * s_b, h * s_b],
        ];
        let m = ComplexMatrix::from_fn(4, 4, |i, j| crate::qmath::c(sg[i] * sg[j] * raw[i][j], 0.0));
        let tr = m.trace().unwrap().re;
        m.scale_real(1.0 / tr)
    }

    #[test]
    fn matches_transcribed_matrix_before_clipping() {
        let p = params(2.0);
        for a in Bit::BOTH {
            for (x, eta) in [(2.0, 0.2), (-2.0, 0.1), (0.3, 0.45)] {
                let channel = ChannelModel::depolarizing(eta).unwrap();
                let m = eve_matrix(a, x, &channel, &p, CrossTerm::Wma, log_reference(x, &p)).unwrap();
                let m = m.scale_real(1.0 / m.trace().unwrap().re);
                assert!(m.max_abs_diff(&transcribed(a, x, eta, &p)).unwrap() < 1e-13);
            }
        }
    }

    #[test]
    fn clipping_is_small_and_reported() {
        let (rho, clipped) = eve_state_wma_clipped(Bit::Zero, 30.0, 0.25, &params(30.0)).unwrap();
        assert!(clipped <= 0.0);
        assert!(rho.eigen().unwrap().values.iter().all(|&v| v >= -1e-12));
    }

    #[test]
    fn holevo_bounds() {
        assert!(holevo_wma(0.0, &params(30.0)).unwrap().abs() < 1e-9);
        for eta in [0.05, 0.2, 0.4] {
            let chi = holevo_wma(eta, &params(20.0)).unwrap();
            assert!((0.0..=2.0).contains(&chi));
        }
    }

    #[test]
    fn secret_fraction_examples() {
        let r = secret_fraction_wma(0.0, &params(30.0)).unwrap();
        let q = qber_wma(0.0, &params(30.0)).unwrap();
        assert!((r.secret_fraction - (1.0 - binary_entropy(q))).abs() < 1e-9);
        assert!(secret_fraction_wma(0.5, &params(30.0)).unwrap().secret_fraction <= 0.0);
        let r = secret_fraction_wma(0.25, &params(30.0)).unwrap();
        assert!(r.secret_fraction > 0.0);
        assert!((r.secret_fraction - (r.mi - r.holevo)).abs() < 1e-12);
        assert_eq!(r.regime, Regime::Wma);
        let omega = r.post_selection_probability.unwrap();
        assert!(omega > 0.0 && omega < 0.5);
        assert!((r.dw_rate.unwrap() - omega * r.secret_fraction).abs() < 1e-15);
    }

    #[test]
    fn noiseless_fraction_positive() {
        for (gamma, alpha) in [(0.1, 1.0), (0.2, 5.0), (0.05, 0.5)] {
            let p = ProtocolParams::with_default_bins(gamma, 1.0, alpha).unwrap();
            assert!(secret_fraction_wma(0.0, &p).unwrap().is_secure());
        }
    }

    #[test]
    fn tolerance_examples() {
        let zero = tolerance_wma(&params(0.0)).unwrap();
        assert_eq!(zero.eta_tol, 0.0);
        let t = tolerance_wma(&params(35.0)).unwrap();
        assert!(t.eta_tol > 0.25, "{}", t.eta_tol);
        assert!(t.bisection_iterations >= 9);
    }
}
