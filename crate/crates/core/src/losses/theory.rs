//! Residual checks for the identities linking the expectation losses to the
//! expected misclassification probability, and the Cauchy–Schwarz divergence
//! to cross entropy plus half the Rényi quadratic entropy.

use crate::error::{Error, Result};
use crate::numerics::{clamped_ln, Dense2};

use super::{expectation_loss, Sigma};

const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// Residuals of the expectation-loss identities on one batch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpectationResidual {
    /// `|mean ‖y − p‖₁ − (2 − 2·mean ⟨y, p⟩)|`
    pub l1: f64,
    /// `|mean ‖y − p‖₂² − (−2·mean ⟨y, p⟩ + mean ‖p‖₂² + 1)|`
    pub l2: f64,
}

impl ExpectationResidual {
    pub fn max(&self) -> f64 {
        self.l1.max(self.l2)
    }
}

fn validate(y: &Dense2, p: &Dense2) -> Result<()> {
    if y.shape() != p.shape() {
        return Err(Error::ShapeMismatch {
            op: "identity check",
            left: y.shape(),
            right: p.shape(),
        });
    }
    for (row, (yr, pr)) in y.row_iter().zip(p.row_iter()).enumerate() {
        let ones = yr.iter().filter(|&&v| v == 1.0).count();
        let zeros = yr.iter().filter(|&&v| v == 0.0).count();
        if ones != 1 || ones + zeros != yr.len() {
            return Err(Error::NotOneHot { row });
        }
        let sum: f64 = pr.iter().sum();
        if !sum.is_finite() || pr.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE
        {
            return Err(Error::NotADistribution { row, sum });
        }
    }
    Ok(())
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.sum::<f64>() / n as f64
}

/// Evaluates both sides of the expectation-loss identities directly from
/// `(y, p)` and returns their absolute differences.
pub fn verify_expectation_identity(y: &Dense2, p: &Dense2) -> Result<ExpectationResidual> {
    validate(y, p)?;
    let n = y.rows().max(1);
    let pairs = || y.row_iter().zip(p.row_iter());

    let l1 = mean(pairs().map(|(y, p)| y.iter().zip(p).map(|(y, p)| (y - p).abs()).sum()), n);
    let l2 = mean(pairs().map(|(y, p)| y.iter().zip(p).map(|(y, p)| (y - p) * (y - p)).sum()), n);
    let hit = mean(pairs().map(|(y, p)| y.iter().zip(p).map(|(y, p)| y * p).sum()), n);
    let p_norm_sq = mean(p.row_iter().map(|p| p.iter().map(|v| v * v).sum()), n);

    Ok(ExpectationResidual {
        l1: (l1 - (2.0 - 2.0 * hit)).abs(),
        l2: (l2 - (-2.0 * hit + p_norm_sq + 1.0)).abs(),
    })
}

/// `|mean D_CS − mean log loss − (1/2N) Σ ln ‖p_i‖₂²|` for one-hot `y`.
pub fn verify_cs_decomposition(y: &Dense2, p: &Dense2) -> Result<f64> {
    validate(y, p)?;
    let n = y.rows().max(1);
    let pairs = || y.row_iter().zip(p.row_iter());

    let d_cs = mean(
        pairs().map(|(y, p)| {
            let s: f64 = y.iter().zip(p).map(|(y, p)| y * p).sum();
            let p_norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            -clamped_ln(s / (p_norm * y_norm))
        }),
        n,
    );
    let log = mean(
        pairs().map(|(y, p)| -y.iter().zip(p).map(|(y, p)| y * clamped_ln(*p)).sum::<f64>()),
        n,
    );
    let half_log_norm = p
        .row_iter()
        .map(|p| p.iter().map(|v| v * v).sum::<f64>().ln())
        .sum::<f64>()
        / (2 * n) as f64;
    Ok((d_cs - log - half_log_norm).abs())
}

/// `∂(L1∘sigmoid)/∂o` for a single output with a positive label.
pub fn sigmoid_expectation_slope(o: f64) -> Result<f64> {
    let y = Dense2::new(1, 1, vec![1.0])?;
    let out = Dense2::new(1, 1, vec![o])?;
    Ok(expectation_loss(1, &y, &out, Sigma::Sigmoid)?.grad.get(0, 0))
}
