use serde::Serialize;

use super::matrix::DensityMatrix;
use crate::error::{Error, Result};

/// Eigenvalues in `[-CLIP_WINDOW, 0)` are treated as zero.
pub const CLIP_WINDOW: f64 = 1e-10;
pub const DISTRIBUTION_TOL: f64 = 1e-10;

/// `-Σ λ log₂ λ` over a spectrum, with `0·log 0 = 0`.
///
/// Eigenvalues below `-CLIP_WINDOW` are rejected.
pub fn entropy_of_spectrum(values: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &v in values {
        if v < -CLIP_WINDOW {
            return Err(Error::NotPositive(v));
        }
        if v > 0.0 {
            s -= v * v.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_of_spectrum(&rho.eigen()?.values)
}

pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Joint distribution of two key bits, indexed `[a][b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointDistribution([[f64; 2]; 2]);

impl JointDistribution {
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self> {
        let flat = p.iter().flatten();
        if let Some(bad) = flat.clone().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidDistribution(format!("entry {bad}")));
        }
        let sum: f64 = flat.sum();
        if (sum - 1.0).abs() > DISTRIBUTION_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self(p))
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(w: [[f64; 2]; 2]) -> Result<Self> {
        let sum: f64 = w.iter().flatten().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidDistribution(format!("weights sum to {sum}")));
        }
        Self::new(w.map(|row| row.map(|x| x / sum)))
    }

    pub fn uniform() -> Self {
        Self([[0.25; 2]; 2])
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.0[a][b]
    }

    pub fn cells(&self) -> [[f64; 2]; 2] {
        self.0
    }

    pub fn marginal_a(&self) -> [f64; 2] {
        [self.0[0][0] + self.0[0][1], self.0[1][0] + self.0[1][1]]
    }

    pub fn marginal_b(&self) -> [f64; 2] {
        [self.0[0][0] + self.0[1][0], self.0[0][1] + self.0[1][1]]
    }

    /// Probability that the two bits disagree.
    pub fn qber(&self) -> f64 {
        self.0[0][1] + self.0[1][0]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().flatten().sum()
    }
}

/// `I(A:B)` in bits.
pub fn mutual_information(p: &JointDistribution) -> f64 {
    let pa = p.marginal_a();
    let pb = p.marginal_b();
    let mut mi = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let pab = p.get(a, b);
            if pab > 0.0 {
                mi += pab * (pab / (pa[a] * pb[b])).log2();
            }
        }
    }
    mi.clamp(0.0, 1.0)
}
