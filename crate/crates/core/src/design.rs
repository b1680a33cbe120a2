//! Options and bookkeeping shared by the VSC and UVC design routines.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{PolytopicPlant, SimplexWeight};
use crate::scalar::Real;
use crate::sdp::{SdpSolution, SdpStatus, SolverOptions};
use crate::search::LineSearchOptions;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct DesignOptions<T: Real> {
    pub solver: SolverOptions<T>,
    pub line_search: LineSearchOptions,
    /// Random simplex weights at which the unscaled inequality is re-checked.
    pub audit_samples: usize,
    /// Smallest acceptable block margin when re-verifying a certificate.
    pub recheck_tolerance: T,
    pub seed: u64,
}

impl<T: Real> Default for DesignOptions<T> {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            line_search: LineSearchOptions::default(),
            audit_samples: 50,
            recheck_tolerance: T::lit(1e-6),
            seed: 0,
        }
    }
}

/// Solver diagnostics carried along with a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SolveInfo<T: Real> {
    pub iterations: usize,
    pub relative_gap: T,
    pub min_block_margin: T,
}

impl<T: Real> From<&SdpSolution<T>> for SolveInfo<T> {
    fn from(s: &SdpSolution<T>) -> Self {
        Self {
            iterations: s.iterations,
            relative_gap: s.relative_gap,
            min_block_margin: s.min_block_margin,
        }
    }
}

/// Result of re-checking the unscaled matrix inequality on random members
/// of the polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RobustnessAudit<T: Real> {
    pub samples: usize,
    /// Largest eigenvalue found; negative means every sample passed.
    pub worst_max_eig: T,
}

impl<T: Real> RobustnessAudit<T> {
    pub fn passed(&self) -> bool {
        self.worst_max_eig < T::zero()
    }
}

pub(crate) fn check_sigma0<T: Real>(plant: &PolytopicPlant<T>, sigma0: &[T]) -> Result<()> {
    if sigma0.len() != plant.n() {
        return Err(Error::invalid(format!(
            "initial state has {} entries, plant has n = {}",
            sigma0.len(),
            plant.n()
        )));
    }
    if sigma0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("initial state must be finite"));
    }
    Ok(())
}

pub(crate) fn check_alpha<T: Real>(alpha_u: Option<T>) -> Result<()> {
    match alpha_u {
        Some(a) if !(a > T::zero() && a.is_finite()) => {
            Err(Error::invalid(format!("control budget {a} must be positive")))
        }
        _ => Ok(()),
    }
}

pub(crate) fn check_gain<T: Real>(plant: &PolytopicPlant<T>, gain: &Matrix<T>) -> Result<()> {
    if gain.shape() != (plant.m(), plant.n()) {
        return Err(Error::invalid(format!(
            "gain is {:?}, plant needs {}x{}",
            gain.shape(),
            plant.m(),
            plant.n()
        )));
    }
    if !gain.is_finite() {
        return Err(Error::invalid("gain must be finite"));
    }
    Ok(())
}

/// `M + Mᵀ`.
pub(crate) fn sym_part<T: Real>(m: &Matrix<T>) -> Matrix<T> {
    m + &m.transpose()
}

/// Unit matrix `E_rc` of the given shape.
pub(crate) fn unit<T: Real>(rows: usize, cols: usize, r: usize, c: usize) -> Matrix<T> {
    let mut e = Matrix::zeros(rows, cols);
    e[(r, c)] = T::one();
    e
}

/// Seeded simplex samples for the robustness audit.
pub(crate) fn audit_weights<T: Real>(seed: u64, count: usize, n: usize) -> Vec<SimplexWeight<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| SimplexWeight::sample(&mut rng, n)).collect()
}

/// Turns a non-optimal solver status into the matching error.
pub(crate) fn require_optimal<T: Real>(sol: &SdpSolution<T>, infeasible: impl FnOnce() -> Error) -> Result<()> {
    match sol.status {
        SdpStatus::Optimal => Ok(()),
        SdpStatus::Infeasible => Err(infeasible()),
        SdpStatus::NumericalFailure => Err(Error::NumericalFailure(format!(
            "solver stopped after {} iterations with relative gap {}",
            sol.iterations, sol.relative_gap
        ))),
    }
}
