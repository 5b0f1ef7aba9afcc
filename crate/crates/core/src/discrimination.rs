//! Discrimination of two Gaussian pointer states: the Helstrom minimum-error
//! bound and a threshold scheme that only accepts outlier positions.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::table::{fmt_sig, write_csv};
use crate::weakvalues::{gaussian_density, PointerWavefunction};

/// `ψ±(x)` centred at `±ε` with common width `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianPair {
    pub separation: f64,
    pub width: f64,
}

impl GaussianPair {
    pub fn new(separation: f64, width: f64) -> Result<Self> {
        if !(separation >= 0.0) || !separation.is_finite() {
            return Err(Error::InvalidParameter(format!("separation must be ≥ 0, got {separation}")));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidParameter(format!("width must be > 0, got {width}")));
        }
        Ok(Self { separation, width })
    }

    fn pointers(&self) -> [PointerWavefunction; 2] {
        [
            PointerWavefunction { center: self.separation, width: self.width, phase_rate: 0.0 },
            PointerWavefunction { center: -self.separation, width: self.width, phase_rate: 0.0 },
        ]
    }
}

/// Accept positions near `+α` (guess `ψ+`) or `-α` (guess `ψ-`); anything else
/// is inconclusive. The bins have width `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdScheme {
    pub alpha: f64,
    pub bin_width: f64,
}

impl ThresholdScheme {
    pub fn new(alpha: f64, bin_width: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be ≥ 0, got {alpha}")));
        }
        if !(bin_width > 0.0) || !bin_width.is_finite() {
            return Err(Error::InvalidParameter(format!("bin width must be > 0, got {bin_width}")));
        }
        if alpha > 0.0 && bin_width >= 2.0 * alpha {
            return Err(Error::InvalidParameter(format!("bins of width {bin_width} around ±{alpha} overlap")));
        }
        Ok(Self { alpha, bin_width })
    }

    /// Default bin width `0.1 δ`.
    pub fn with_default_bins(alpha: f64, width: f64) -> Result<Self> {
        Self::new(alpha, 0.1 * width)
    }
}

/// `|⟨ψ+|ψ-⟩| = exp(-ε²/2δ²)`.
pub fn gaussian_overlap(pair: &GaussianPair) -> f64 {
    (-(pair.separation / pair.width).powi(2) / 2.0).exp()
}

/// Helstrom bound `½(1 - √(1 - |⟨ψ+|ψ-⟩|²))` for equal priors.
pub fn helstrom_error(pair: &GaussianPair) -> f64 {
    let ov = gaussian_overlap(pair);
    0.5 * (1.0 - (1.0 - ov * ov).max(0.0).sqrt())
}

/// Error probability of the threshold scheme conditioned on a conclusive
/// outcome: `1 / (1 + exp(2αε/δ²))`. Independent of the bin width.
pub fn threshold_error(scheme: &ThresholdScheme, pair: &GaussianPair) -> f64 {
    threshold_error_from_ratio(scheme.alpha * pair.separation / (pair.width * pair.width))
}

/// Same as [`threshold_error`] with `αε/δ²` precomputed.
pub fn threshold_error_from_ratio(alpha_eps_over_delta_sq: f64) -> f64 {
    1.0 / (1.0 + (2.0 * alpha_eps_over_delta_sq).exp())
}

/// Probability of a conclusive outcome with finite bins, averaged over both
/// hypotheses.
pub fn conclusive_probability(scheme: &ThresholdScheme, pair: &GaussianPair) -> Result<f64> {
    if scheme.alpha == 0.0 {
        return Err(Error::InvalidParameter("bins around ±0 coincide; conclusive probability undefined".into()));
    }
    let half = 0.5 * scheme.bin_width;
    let tol = 1e-10;
    let mut total = 0.0;
    for p in pair.pointers() {
        let f = |x: f64| gaussian_density(&p, x);
        for centre in [scheme.alpha, -scheme.alpha] {
            total += adaptive_simpson(&f, centre - half, centre + half, tol);
        }
    }
    Ok(0.5 * total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub p_err: f64,
}

/// Threshold-scheme error as a function of α at fixed `ε/δ²`.
pub fn fig31_curve(eps_over_delta_sq: f64, alphas: &[f64]) -> Result<Vec<CurvePoint>> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("empty alpha sequence".into()));
    }
    if !(eps_over_delta_sq >= 0.0) {
        return Err(Error::InvalidParameter(format!("ε/δ² must be ≥ 0, got {eps_over_delta_sq}")));
    }
    alphas
        .iter()
        .map(|&alpha| {
            if !(alpha >= 0.0) {
                return Err(Error::InvalidParameter(format!("alpha must be ≥ 0, got {alpha}")));
            }
            Ok(CurvePoint { alpha, p_err: threshold_error_from_ratio(alpha * eps_over_delta_sq) })
        })
        .collect()
}

/// Writes the curve as CSV with header `alpha,p_err`.
pub fn write_fig31_csv<W: Write>(out: W, curve: &[CurvePoint]) -> Result<()> {
    let rows = curve.iter().map(|p| vec![fmt_sig(p.alpha), fmt_sig(p.p_err)]);
    write_csv(out, &["alpha", "p_err"], rows)
}
