//! Brute-force validation: seeded sampling of protocol rounds and explicit
//! reconstruction of Eve's memory from the full post-measurement state on a
//! discretized pointer.
//!
//! Nothing here uses the weak-value table or the closed-form joint tables;
//! branch displacements follow from Bob's computational-basis value alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{bell_states, Bit, ChannelModel, ProtocolParams};
use crate::qmath::{c, ComplexMatrix, DensityMatrix, JointDistribution};
use crate::security::exact::{eve_state_exact, holevo_exact, joint_prob_exact};
use crate::security::holevo_quantity;
use crate::security::wma::holevo_wma;
use crate::weakvalues::PointerWavefunction;

pub const DEFAULT_GRID_HALF_WIDTH: f64 = 8.0;
pub const DEFAULT_GRID_POINTS: usize = 4096;
pub const MIN_GRID_POINTS: usize = 256;
/// Oracle disagreement with the closed form that counts as a resolution failure.
pub const RESOLUTION_LIMIT: f64 = 1e-4;
/// Required oracle agreement with the closed form.
pub const ORACLE_TOL: f64 = 1e-6;
/// Rounds per RNG stream. Fixed so results do not depend on the thread count.
const CHUNK_ROUNDS: u64 = 1 << 16;
/// Fewer conclusive rounds than this make the statistical checks uninformative.
pub const LOW_POWER_CONCLUSIVE: u64 = 400;
pub const Z_LIMIT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub rounds: u64,
    pub seed: u64,
    /// Grid extends `grid_half_width · δ` beyond the bins.
    pub grid_half_width: f64,
    pub grid_points: usize,
    pub eta: f64,
    pub params: ProtocolParams,
}

impl SimConfig {
    pub fn new(eta: f64, params: ProtocolParams, rounds: u64, seed: u64) -> Result<Self> {
        let cfg = Self {
            rounds,
            seed,
            grid_half_width: DEFAULT_GRID_HALF_WIDTH,
            grid_points: DEFAULT_GRID_POINTS,
            eta,
            params,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ChannelModel::depolarizing(self.eta)?;
        if self.rounds == 0 {
            return Err(Error::InvalidParameter("at least one round is required".into()));
        }
        if self.grid_points < MIN_GRID_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid_points must be ≥ {MIN_GRID_POINTS}, got {}",
                self.grid_points
            )));
        }
        if !(self.grid_half_width > 0.0 && self.grid_half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid_half_width must be > 0, got {}", self.grid_half_width)));
        }
        Ok(())
    }
}

/// What Bob records in one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Bit(Bit),
    Inconclusive,
    /// Post-selection onto `|+⟩` failed.
    Discarded,
}

impl Outcome {
    fn slot(self) -> usize {
        match self {
            Outcome::Bit(b) => b.index(),
            Outcome::Inconclusive => 2,
            Outcome::Discarded => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OutcomeCounts {
    pub bit0: u64,
    pub bit1: u64,
    pub inconclusive: u64,
    pub discarded: u64,
}

impl OutcomeCounts {
    fn from_slots(s: [u64; 4]) -> Self {
        Self { bit0: s[0], bit1: s[1], inconclusive: s[2], discarded: s[3] }
    }

    pub fn get(&self, b: Bit) -> u64 {
        match b {
            Bit::Zero => self.bit0,
            Bit::One => self.bit1,
        }
    }

    pub fn sum(&self) -> u64 {
        self.bit0 + self.bit1 + self.inconclusive + self.discarded
    }
}

/// Counts per Alice's bit and Bob's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EmpiricalCounts {
    pub a0: OutcomeCounts,
    pub a1: OutcomeCounts,
    pub total: u64,
}

impl EmpiricalCounts {
    pub fn for_bit(&self, a: Bit) -> &OutcomeCounts {
        match a {
            Bit::Zero => &self.a0,
            Bit::One => &self.a1,
        }
    }

    pub fn conclusive(&self) -> u64 {
        Bit::BOTH.iter().map(|&a| self.for_bit(a).bit0 + self.for_bit(a).bit1).sum()
    }

    pub fn disagreements(&self) -> u64 {
        self.a0.bit1 + self.a1.bit0
    }

    pub fn discarded(&self) -> u64 {
        self.a0.discarded + self.a1.discarded
    }
}

/// `[α - w/2, α + w/2)` → 0, `[-α - w/2, -α + w/2)` → 1, else inconclusive.
pub fn classify(x: f64, params: &ProtocolParams) -> Outcome {
    let half = 0.5 * params.bin_width;
    for b in Bit::BOTH {
        let centre = b.sign() * params.alpha;
        if x >= centre - half && x < centre + half {
            return Outcome::Bit(b);
        }
    }
    Outcome::Inconclusive
}

fn sample_chunk(cfg: &SimConfig, lambdas: &[f64; 4], stream: u64, rounds: u64) -> [[u64; 4]; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut counts = [[0u64; 4]; 2];
    let p = &cfg.params;
    for _ in 0..rounds {
        let u: f64 = rng.random();
        let mut i = 0;
        let mut acc = lambdas[0];
        while u >= acc && i < 3 {
            i += 1;
            acc += lambdas[i];
        }
        // Every Bell state has a uniform marginal on Alice's side.
        let a = if rng.random::<bool>() { Bit::One } else { Bit::Zero };
        // Φ± keep Bob's computational value equal to Alice's, Ψ± flip it.
        let bob_z = if i < 2 { a } else { flip(a) };
        let outcome = if rng.random::<bool>() {
            Outcome::Discarded
        } else {
            let z: f64 = rng.sample(StandardNormal);
            let x = bob_z.sign() * p.gamma + p.delta * z;
            classify(x, p)
        };
        counts[a.index()][outcome.slot()] += 1;
    }
    counts
}

fn flip(b: Bit) -> Bit {
    match b {
        Bit::Zero => Bit::One,
        Bit::One => Bit::Zero,
    }
}

/// Samples `cfg.rounds` protocol rounds. Bit-identical for a fixed seed,
/// independent of the number of worker threads.
pub fn sample_rounds(cfg: &SimConfig) -> Result<EmpiricalCounts> {
    cfg.validate()?;
    let lambdas = ChannelModel::depolarizing(cfg.eta)?.lambdas;
    let chunks = cfg.rounds.div_ceil(CHUNK_ROUNDS);
    let merged = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let n = CHUNK_ROUNDS.min(cfg.rounds - k * CHUNK_ROUNDS);
            sample_chunk(cfg, &lambdas, k, n)
        })
        .reduce(
            || [[0u64; 4]; 2],
            |mut x, y| {
                for a in 0..2 {
                    for s in 0..4 {
                        x[a][s] += y[a][s];
                    }
                }
                x
            },
        );
    Ok(EmpiricalCounts {
        a0: OutcomeCounts::from_slots(merged[0]),
        a1: OutcomeCounts::from_slots(merged[1]),
        total: cfg.rounds,
    })
}

/// Uniform pointer grid containing both bin centres as nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerGrid {
    pub spacing: f64,
    /// Nodes are `k · spacing` for `|k| ≤ half_nodes`.
    pub half_nodes: i64,
}

impl PointerGrid {
    pub fn for_config(cfg: &SimConfig) -> Self {
        let p = &cfg.params;
        let reach = p.alpha + cfg.grid_half_width * p.delta;
        let nominal = 2.0 * reach / (cfg.grid_points - 1) as f64;
        let spacing = if p.alpha > 0.0 { p.alpha / (p.alpha / nominal).ceil() } else { nominal };
        let half_nodes = (reach / spacing).ceil() as i64;
        Self { spacing, half_nodes }
    }

    pub fn len(&self) -> usize {
        (2 * self.half_nodes + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, k: i64) -> f64 {
        k as f64 * self.spacing
    }

    pub fn nearest(&self, x: f64) -> i64 {
        ((x / self.spacing).round() as i64).clamp(-self.half_nodes, self.half_nodes)
    }
}

/// Eve's unnormalized vector after Alice finds `a`, Bob post-selects `|+⟩`
/// and the pointer is found at `x`, scaled by `exp(-log_ref)`.
///
/// Built from the full state `Σ_i √λ_i |Φ_i⟩_AB |ν_i⟩_E |ξ⟩_P` after the
/// coupling that displaces the pointer by `+γ` when Bob's qubit is `|0⟩` and
/// by `-γ` when it is `|1⟩`.
fn projected_vector(a: Bit, x: f64, lambdas: &[f64; 4], params: &ProtocolParams, log_ref: f64) -> [f64; 4] {
    let bells = bell_states();
    let plus = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = [0.0; 4];
    for (i, bell) in bells.iter().enumerate() {
        let amps = bell.amplitudes();
        for bob in Bit::BOTH {
            let amp = amps[2 * a.index() + bob.index()].re;
            if amp == 0.0 {
                continue;
            }
            let pointer =
                PointerWavefunction { center: bob.sign() * params.gamma, width: params.delta, phase_rate: 0.0 };
            // real Gaussian amplitude is the square root of the density
            let xi = (0.5 * pointer.log_density(x) - log_ref).exp();
            v[i] += lambdas[i].sqrt() * amp * plus * xi;
        }
    }
    v
}

fn oracle_cell(a: Bit, b: Bit, cfg: &SimConfig) -> Result<([f64; 4], f64)> {
    cfg.validate()?;
    let p = &cfg.params;
    let lambdas = ChannelModel::depolarizing(cfg.eta)?.lambdas;
    let grid = PointerGrid::for_config(cfg);
    let x = grid.node(grid.nearest(b.sign() * p.alpha));
    // common scale for all four cells: half the log-density of the centred
    // pointer at the bin centre
    let ready = PointerWavefunction { center: 0.0, width: p.delta, phase_rate: 0.0 };
    let log_ref = 0.5 * ready.log_density(p.alpha);
    let v = projected_vector(a, x, &lambdas, p, log_ref);
    let weight: f64 = v.iter().map(|z| z * z).sum();
    if !(weight > 0.0 && weight.is_finite()) {
        return Err(Error::Numerical(format!("projected state vanishes at x = {x}")));
    }
    Ok((v, weight))
}

fn state_from_vector(v: &[f64; 4], weight: f64) -> Result<DensityMatrix> {
    let m = ComplexMatrix::from_fn(4, 4, |i, j| c(v[i] * v[j] / weight, 0.0));
    DensityMatrix::new(m)
}

/// Largest entry-wise difference between the grid reconstruction and the
/// closed-form state.
pub fn oracle_deviation(a: Bit, b: Bit, cfg: &SimConfig) -> Result<f64> {
    let (v, w) = oracle_cell(a, b, cfg)?;
    let oracle = state_from_vector(&v, w)?;
    let closed = eve_state_exact(a, b, cfg.eta, &cfg.params)?;
    oracle.matrix().max_abs_diff(closed.matrix())
}

/// Eve's memory `ρ^{a,b}_E` reconstructed from the full state on the pointer
/// grid by projecting onto the node nearest `(-1)^b α`.
pub fn density_oracle(a: Bit, b: Bit, cfg: &SimConfig) -> Result<DensityMatrix> {
    let (v, w) = oracle_cell(a, b, cfg)?;
    let rho = state_from_vector(&v, w)?;
    let closed = eve_state_exact(a, b, cfg.eta, &cfg.params)?;
    let dev = rho.matrix().max_abs_diff(closed.matrix())?;
    if dev > RESOLUTION_LIMIT {
        return Err(Error::Resolution(format!(
            "oracle differs from the closed form by {dev:e}; raise grid_points above {}",
            cfg.grid_points
        )));
    }
    Ok(rho)
}

/// Joint table of the grid reconstruction, from the norms of Eve's projected
/// vectors.
pub fn oracle_joint(cfg: &SimConfig) -> Result<JointDistribution> {
    let mut w = [[0.0; 2]; 2];
    for a in Bit::BOTH {
        for b in Bit::BOTH {
            w[a.index()][b.index()] = oracle_cell(a, b, cfg)?.1;
        }
    }
    JointDistribution::from_weights(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyProbe {
    pub eta: f64,
    pub params: ProtocolParams,
    pub chi_oracle: f64,
    pub chi_exact: f64,
    pub chi_wma: f64,
    pub exact_deviation: f64,
    pub wma_deviation: f64,
    pub agrees_with_exact: bool,
    pub sides_with_exact: bool,
}

/// Holevo quantity of the grid reconstruction against both closed forms.
pub fn wma_discrepancy_probe(cfg: &SimConfig) -> Result<DiscrepancyProbe> {
    let joint = oracle_joint(cfg)?;
    let s = |a, b| density_oracle(a, b, cfg);
    let eve = [[s(Bit::Zero, Bit::Zero)?, s(Bit::Zero, Bit::One)?], [s(Bit::One, Bit::Zero)?, s(Bit::One, Bit::One)?]];
    let chi_oracle = holevo_quantity(&joint, &eve)?;
    let chi_exact = holevo_exact(cfg.eta, &cfg.params)?;
    let chi_wma = holevo_wma(cfg.eta, &cfg.params)?;
    let exact_deviation = (chi_oracle - chi_exact).abs();
    let wma_deviation = (chi_oracle - chi_wma).abs();
    Ok(DiscrepancyProbe {
        eta: cfg.eta,
        params: cfg.params,
        chi_oracle,
        chi_exact,
        chi_wma,
        exact_deviation,
        wma_deviation,
        agrees_with_exact: exact_deviation < ORACLE_TOL,
        sides_with_exact: exact_deviation <= wma_deviation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatisticalTarget {
    pub observed: f64,
    pub expected: f64,
    pub std_error: f64,
    pub z_score: f64,
    pub trials: u64,
}

impl StatisticalTarget {
    fn binomial(successes: u64, trials: u64, expected: f64) -> Self {
        let observed = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        let std_error = if trials == 0 { f64::INFINITY } else { (expected * (1.0 - expected) / trials as f64).sqrt() };
        let z_score = if std_error > 0.0 && std_error.is_finite() {
            (observed - expected) / std_error
        } else if observed == expected {
            0.0
        } else {
            f64::INFINITY
        };
        Self { observed, expected, std_error, z_score, trials }
    }
}

/// Full validation summary of one configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub schema_version: u32,
    pub config: SimConfig,
    pub counts: EmpiricalCounts,
    /// Empirical conclusive-conditional joint table `P(a, b)`.
    pub empirical_joint: [[f64; 2]; 2],
    pub analytic_joint: [[f64; 2]; 2],
    pub error_rate: StatisticalTarget,
    pub discard_rate: StatisticalTarget,
    /// Max-entry deviation of the grid reconstruction per `(a, b)`.
    pub oracle_deviations: [[f64; 2]; 2],
    pub low_power: bool,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn validate(cfg: &SimConfig) -> Result<ValidationReport> {
    let counts = sample_rounds(cfg)?;
    let analytic = joint_prob_exact(cfg.eta, &cfg.params)?;
    let conclusive = counts.conclusive();
    let mut empirical = [[0.0; 2]; 2];
    for a in Bit::BOTH {
        for b in Bit::BOTH {
            if conclusive > 0 {
                empirical[a.index()][b.index()] = counts.for_bit(a).get(b) as f64 / conclusive as f64;
            }
        }
    }
    let error_rate = StatisticalTarget::binomial(counts.disagreements(), conclusive, analytic.qber());
    let discard_rate = StatisticalTarget::binomial(counts.discarded(), counts.total, 0.5);
    let low_power = conclusive < LOW_POWER_CONCLUSIVE;

    let mut oracle_deviations = [[0.0; 2]; 2];
    for a in Bit::BOTH {
        for b in Bit::BOTH {
            density_oracle(a, b, cfg)?;
            oracle_deviations[a.index()][b.index()] = oracle_deviation(a, b, cfg)?;
        }
    }
    let worst = oracle_deviations.iter().flatten().copied().fold(0.0, f64::max);

    let statistical = |name: &str, t: &StatisticalTarget, low: bool| Check {
        name: name.into(),
        passed: low || t.z_score.abs() < Z_LIMIT,
        detail: if low {
            format!("z = {:.3} over {} trials; too few trials to be informative", t.z_score, t.trials)
        } else {
            format!("z = {:.3} over {} trials", t.z_score, t.trials)
        },
    };
    let checks = vec![
        statistical("conclusive error rate", &error_rate, low_power),
        statistical("post-selection discard rate", &discard_rate, counts.total < LOW_POWER_CONCLUSIVE),
        Check {
            name: "oracle vs closed-form Eve states".into(),
            passed: worst < ORACLE_TOL,
            detail: format!("max entry deviation {worst:e}"),
        },
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        schema_version: 1,
        config: *cfg,
        counts,
        empirical_joint: empirical,
        analytic_joint: analytic.cells(),
        error_rate,
        discard_rate,
        oracle_deviations,
        low_power,
        checks,
        passed,
    })
}
