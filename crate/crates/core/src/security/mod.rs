//! Secret-fraction analysis of the protocol in two regimes: the first-order
//! weak-measurement approximation ([`wma`]) and the all-orders treatment
//! ([`exact`]).
//!
//! Both regimes share the ccq-state bookkeeping implemented here: Eve's
//! conditional memories `ρ^{a,b}_E = ρ^a_E((-1)^b α)`, the per-bit mixtures
//! `Ω^a_E`, the Holevo quantity and the noise-tolerance search.

pub mod exact;
pub mod wma;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{Bit, ChannelModel, ProtocolParams, BELL_OVERLAP_SIGNS, WEAK_VALUE_TABLE};
use crate::qmath::{c, mutual_information, von_neumann_entropy, ComplexMatrix, DensityMatrix, JointDistribution};
use crate::quad::adaptive_simpson;
use crate::weakvalues::{log_gaussian_cross_term, CrossTerm, PointerWavefunction};

/// A secret fraction above this many bits counts as positive.
pub const POSITIVE_FRACTION: f64 = 1e-9;
/// Step of the coarse η scan in the tolerance search.
pub const TOLERANCE_GRID_STEP: f64 = 1e-3;
/// Width of the final bisection bracket.
pub const TOLERANCE_BISECTION_WIDTH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Wma,
    Exact,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Wma => "wma",
            Regime::Exact => "exact",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything computed for one `(η, params, regime)` point.
#[derive(Debug, Clone, Serialize)]
pub struct SecurityReport {
    pub regime: Regime,
    pub eta: f64,
    pub params: ProtocolParams,
    pub joint: JointDistribution,
    pub qber: f64,
    /// `I(A:B)` in bits.
    pub mi: f64,
    /// `χ(A:E)` in bits.
    pub holevo: f64,
    /// `I(A:B) - χ(A:E)`.
    pub secret_fraction: f64,
    /// Fraction of all rounds that end up in the raw key.
    pub post_selection_probability: Option<f64>,
    /// Devetak–Winter rate per round, `Ω · F_sec`.
    pub dw_rate: Option<f64>,
    /// Most negative eigenvalue removed from Eve's states (0 when none).
    pub clipped_eigenvalue: f64,
}

impl SecurityReport {
    pub fn is_secure(&self) -> bool {
        self.secret_fraction > POSITIVE_FRACTION
    }
}

/// Eve's conditional memories `ρ^{a,b}_E`, indexed `[a][b]`.
pub type EveStates = [[DensityMatrix; 2]; 2];

/// `χ(A:E) = S(Ω_E) - ½[S(Ω⁰_E) + S(Ω¹_E)]`.
pub fn holevo_quantity(joint: &JointDistribution, eve: &EveStates) -> Result<f64> {
    let mut omegas = Vec::with_capacity(2);
    for a in 0..2 {
        let (p0, p1) = (joint.get(a, 0), joint.get(a, 1));
        let row = p0 + p1;
        if !(row > 0.0) {
            return Err(Error::InvalidDistribution(format!("Alice's bit {a} has zero probability")));
        }
        omegas.push(DensityMatrix::mixture(&[(p0 / row, &eve[a][0]), (p1 / row, &eve[a][1])])?);
    }
    let omega = DensityMatrix::mixture(&[(0.5, &omegas[0]), (0.5, &omegas[1])])?;
    let chi =
        von_neumann_entropy(&omega)? - 0.5 * (von_neumann_entropy(&omegas[0])? + von_neumann_entropy(&omegas[1])?);
    Ok(chi.clamp(0.0, 2.0))
}

pub(crate) fn assemble_report(
    regime: Regime,
    eta: f64,
    params: &ProtocolParams,
    joint: JointDistribution,
    eve: &EveStates,
    post_selection_probability: Option<f64>,
    clipped_eigenvalue: f64,
) -> Result<SecurityReport> {
    let mi = mutual_information(&joint);
    let holevo = holevo_quantity(&joint, eve)?;
    let secret_fraction = mi - holevo;
    Ok(SecurityReport {
        regime,
        eta,
        params: *params,
        qber: joint.qber(),
        joint,
        mi,
        holevo,
        secret_fraction,
        post_selection_probability,
        dw_rate: post_selection_probability.map(|omega| omega * secret_fraction),
        clipped_eigenvalue,
    })
}

/// Pointer branch `ξ^a_i`: translated by `γ⟨σ^a_i⟩_w`.
pub(crate) fn branch_pointer(a: Bit, i: usize, params: &ProtocolParams) -> PointerWavefunction {
    PointerWavefunction { center: params.gamma * WEAK_VALUE_TABLE[a.index()][i], width: params.delta, phase_rate: 0.0 }
}

/// Log of the unshifted pointer density at `x`; a common scale for all four
/// ccq cells because it is even in `x`.
pub(crate) fn log_reference(x: f64, params: &ProtocolParams) -> f64 {
    PointerWavefunction { center: 0.0, width: params.delta, phase_rate: 0.0 }.log_density(x)
}

/// `Σ_ij √(λ_i λ_j) ⟨ψ^a|Φ_i⟩⟨Φ_j|ψ^a⟩ ξ^a_i(x) ξ^a_j(x) |ν_i⟩⟨ν_j|` up to the
/// constant `¼ exp(log_ref)`.
///
/// Diagonal branch products are always exact; the off-diagonal branch product
/// `ξ⁺ξ⁻` follows `rule`. The trace equals `P_a(x)` on the same scale.
pub(crate) fn eve_matrix(
    a: Bit,
    x: f64,
    channel: &ChannelModel,
    params: &ProtocolParams,
    rule: CrossTerm,
    log_ref: f64,
) -> Result<ComplexMatrix> {
    let pointers: Vec<_> = (0..4).map(|i| branch_pointer(a, i, params)).collect();
    let coeff: Vec<f64> = (0..4).map(|i| BELL_OVERLAP_SIGNS[a.index()][i] * channel.lambdas[i].sqrt()).collect();
    let mut m = ComplexMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in i..4 {
            let pi = &pointers[i];
            let pj = &pointers[j];
            let log_k =
                if pi.center == pj.center { pi.log_density(x) } else { log_gaussian_cross_term(pi, pj, x, rule)? };
            let v = coeff[i] * coeff[j] * (log_k - log_ref).exp();
            m[(i, j)] = c(v, 0.0);
            m[(j, i)] = c(v, 0.0);
        }
    }
    if m.entries().iter().any(|z| !z.re.is_finite()) {
        return Err(Error::Numerical(format!("Eve's state overflows at x = {x}")));
    }
    Ok(m)
}

/// Post-selection probability: Bob's `|+⟩` outcome (½) times the chance that
/// the pointer lands in either bin, averaged over Alice's bit.
pub(crate) fn post_selection_probability(params: &ProtocolParams, density: impl Fn(Bit, f64) -> f64) -> Option<f64> {
    if params.alpha == 0.0 {
        return None;
    }
    let half = 0.5 * params.bin_width;
    let mut conclusive = 0.0;
    for a in Bit::BOTH {
        let f = |x: f64| density(a, x);
        for b in Bit::BOTH {
            let centre = b.sign() * params.alpha;
            conclusive += 0.5 * adaptive_simpson(&f, centre - half, centre + half, 1e-12);
        }
    }
    Some(0.5 * conclusive)
}

/// Result of a noise-tolerance search.
#[derive(Debug, Clone, Serialize)]
pub struct ToleranceResult {
    pub regime: Regime,
    pub params: ProtocolParams,
    /// Largest η found with a positive secret fraction (0 when none).
    pub eta_tol: f64,
    pub grid_step: f64,
    pub grid_points: usize,
    pub bisection_iterations: usize,
}

/// Scans η on a `1e-3` grid, then bisects the bracket after the last positive
/// grid point down to `1e-6`.
pub(crate) fn tolerance_search(
    regime: Regime,
    params: &ProtocolParams,
    fraction: impl Fn(f64) -> Result<f64> + Sync,
) -> Result<ToleranceResult> {
    let steps = (0.5 / TOLERANCE_GRID_STEP).round() as usize;
    let values: Vec<f64> =
        (0..=steps).into_par_iter().map(|k| fraction(k as f64 * TOLERANCE_GRID_STEP)).collect::<Result<_>>()?;
    let last = values.iter().rposition(|&f| f > POSITIVE_FRACTION);
    let mut result = ToleranceResult {
        regime,
        params: *params,
        eta_tol: 0.0,
        grid_step: TOLERANCE_GRID_STEP,
        grid_points: steps + 1,
        bisection_iterations: 0,
    };
    let Some(k) = last else { return Ok(result) };
    if k == steps {
        result.eta_tol = 0.5;
        return Ok(result);
    }
    let mut lo = k as f64 * TOLERANCE_GRID_STEP;
    let mut hi = (k + 1) as f64 * TOLERANCE_GRID_STEP;
    while hi - lo > TOLERANCE_BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if fraction(mid)? > POSITIVE_FRACTION {
            lo = mid;
        } else {
            hi = mid;
        }
        result.bisection_iterations += 1;
    }
    result.eta_tol = lo;
    Ok(result)
}
