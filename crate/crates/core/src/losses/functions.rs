//! The twelve classification losses as `(batch-mean value, ∂value/∂o)` pairs.
//!
//! Losses that consume probability estimates compute `p = σ(o)` row by row,
//! form the closed-form per-sample derivative `g = ∂ℓ/∂p`, and pull it back
//! through σ:
//!
//! * softmax: `∂ℓ/∂o_k = p_k (g_k − Σ_j g_j p_j)`
//! * sigmoid: `∂ℓ/∂o_k = g_k p_k (1 − p_k)`
//!
//! The log family skips `g` and uses `∂ln p_j/∂o_k` directly (`δ_jk − p_k` for
//! softmax, `δ_jk (1 − p_j)` for sigmoid), which keeps cross entropy's gradient
//! at exactly `p − y`.
//!
//! Per-sample derivatives w.r.t. `p`, with `s = Σ p_j y_j`, `P = ‖p‖²`,
//! `Y = ‖y‖²`:
//!
//! * L1∘σ: `sign(p_k − y_k)`; L2∘σ: `2 (p_k − y_k)`
//! * Chebyshev: `sign(p_m − y_m)` at the attaining coordinate `m`, else 0
//! * Tanimoto `−s / (P + Y − s)`: `−(y_k D − s (2 p_k − y_k)) / D²` with `D = P + Y − s`
//! * Cauchy–Schwarz `−ln s + ½ ln P + ½ ln Y`: `−y_k / s + p_k / P`
//!
//! Kinks (|·| at 0, hinge margin boundary, Chebyshev ties) take the zero
//! subgradient or route to the lowest index.

use crate::error::{Error, Result};
use crate::numerics::{clamped_ln, sigmoid_scalar, softmax_in_place, Dense2, PROB_FLOOR};

/// Probability transform applied to the network output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sigma {
    Softmax,
    Sigmoid,
}

impl Sigma {
    pub fn name(self) -> &'static str {
        match self {
            Sigma::Softmax => "softmax",
            Sigma::Sigmoid => "sigmoid",
        }
    }
}

/// Batch-mean loss value and its gradient w.r.t. the network output.
#[derive(Clone, Debug)]
pub struct LossEval {
    pub value: f64,
    pub grad: Dense2,
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_shapes(op: &'static str, y: &Dense2, o: &Dense2) -> Result<()> {
    if y.shape() != o.shape() {
        return Err(Error::ShapeMismatch {
            op,
            left: y.shape(),
            right: o.shape(),
        });
    }
    if !o.is_finite() {
        return Err(Error::NonFinite { op });
    }
    Ok(())
}

fn check_order(op: &str, order: u32, allowed: &[u32]) -> Result<()> {
    if allowed.contains(&order) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{op}: unsupported order {order}, expected one of {allowed:?}"
        )))
    }
}

fn probabilities_into(sigma: Sigma, o: &[f64], p: &mut [f64]) {
    p.copy_from_slice(o);
    match sigma {
        // inputs were checked finite, so softmax cannot fail here
        Sigma::Softmax => softmax_in_place(p).expect("finite logits"),
        Sigma::Sigmoid => p.iter_mut().for_each(|v| *v = sigmoid_scalar(*v)),
    }
}

/// Pulls `dl_dp` back through σ into `out`.
fn pull_back(sigma: Sigma, p: &[f64], dl_dp: &[f64], out: &mut [f64]) {
    match sigma {
        Sigma::Softmax => {
            let dot: f64 = dl_dp.iter().zip(p).map(|(g, p)| g * p).sum();
            for ((o, &g), &p) in out.iter_mut().zip(dl_dp).zip(p) {
                *o = p * (g - dot);
            }
        }
        Sigma::Sigmoid => {
            for ((o, &g), &p) in out.iter_mut().zip(dl_dp).zip(p) {
                *o = g * p * (1.0 - p);
            }
        }
    }
}

/// Shared driver for losses of `p = σ(o)`. `per_sample` returns the sample
/// loss and writes `∂ℓ/∂p` into its last argument.
fn probability_loss<F>(op: &'static str, y: &Dense2, o: &Dense2, sigma: Sigma, per_sample: F) -> Result<LossEval>
where
    F: Fn(&[f64], &[f64], &mut [f64]) -> f64,
{
    check_shapes(op, y, o)?;
    let (n, k) = o.shape();
    let mut grad = Dense2::zeros(n, k);
    let mut p = vec![0.0; k];
    let mut dl_dp = vec![0.0; k];
    let mut total = 0.0;
    let scale = 1.0 / n.max(1) as f64;
    for r in 0..n {
        probabilities_into(sigma, o.row(r), &mut p);
        total += per_sample(y.row(r), &p, &mut dl_dp);
        let g = grad.row_mut(r);
        pull_back(sigma, &p, &dl_dp, g);
        g.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(LossEval {
        value: total * scale,
        grad,
    })
}

/// Raw-output L1 (`order` 1) or squared L2 (`order` 2) distance to the one-hot label.
pub fn lp_loss(order: u32, y: &Dense2, o: &Dense2) -> Result<LossEval> {
    check_order("lp_loss", order, &[1, 2])?;
    check_shapes("lp_loss", y, o)?;
    let n = o.rows().max(1) as f64;
    let mut grad = Dense2::zeros(o.rows(), o.cols());
    let mut total = 0.0;
    for ((g, &yv), &ov) in grad.as_mut_slice().iter_mut().zip(y.as_slice()).zip(o.as_slice()) {
        let diff = ov - yv;
        if order == 1 {
            total += diff.abs();
            *g = sign(diff) / n;
        } else {
            total += diff * diff;
            *g = 2.0 * diff / n;
        }
    }
    Ok(LossEval {
        value: total / n,
        grad,
    })
}

/// Expectation loss (`order` 1) and regularised expectation loss (`order` 2):
/// the L1 / squared L2 distance between the label and `σ(o)`.
pub fn expectation_loss(order: u32, y: &Dense2, o: &Dense2, sigma: Sigma) -> Result<LossEval> {
    check_order("expectation_loss", order, &[1, 2])?;
    probability_loss("expectation_loss", y, o, sigma, |y, p, g| {
        let mut value = 0.0;
        for ((g, &y), &p) in g.iter_mut().zip(y).zip(p) {
            let diff = p - y;
            if order == 1 {
                value += diff.abs();
                *g = sign(diff);
            } else {
                value += diff * diff;
                *g = 2.0 * diff;
            }
        }
        value
    })
}

/// Chebyshev loss `max_j |σ(o)_j − y_j|`.
pub fn chebyshev_loss(y: &Dense2, o: &Dense2, sigma: Sigma) -> Result<LossEval> {
    probability_loss("chebyshev_loss", y, o, sigma, |y, p, g| {
        let mut best = 0;
        let mut best_abs = f64::NEG_INFINITY;
        for (j, (&y, &p)) in y.iter().zip(p).enumerate() {
            let d = (p - y).abs();
            if d > best_abs {
                best_abs = d;
                best = j;
            }
        }
        g.fill(0.0);
        if !g.is_empty() {
            g[best] = sign(p[best] - y[best]);
        }
        best_abs.max(0.0)
    })
}

/// `Σ_j max(0, margin − ŷ_j o_j)^power` on ±1 labels.
pub fn hinge_loss(power: u32, y_sign: &Dense2, o: &Dense2, margin: f64) -> Result<LossEval> {
    check_order("hinge_loss", power, &[1, 2, 3])?;
    check_shapes("hinge_loss", y_sign, o)?;
    let cols = o.cols();
    let n = o.rows().max(1) as f64;
    let mut grad = Dense2::zeros(o.rows(), cols);
    let mut total = 0.0;
    for (i, ((g, &s), &ov)) in grad
        .as_mut_slice()
        .iter_mut()
        .zip(y_sign.as_slice())
        .zip(o.as_slice())
        .enumerate()
    {
        if s != 1.0 && s != -1.0 {
            return Err(Error::BadSignLabel {
                row: i / cols,
                col: i % cols,
                value: s,
            });
        }
        let slack = margin - s * ov;
        if slack > 0.0 {
            total += slack.powi(power as i32);
            *g = -(power as f64) * s * slack.powi(power as i32 - 1) / n;
        }
    }
    Ok(LossEval {
        value: total / n,
        grad,
    })
}

/// Cross entropy (`power` 1) or squared log loss `Σ_j (y_j ln σ(o)_j)²` (`power` 2).
///
/// Probabilities are floored at [`PROB_FLOOR`] inside the logarithm.
pub fn log_loss(power: u32, y: &Dense2, o: &Dense2, sigma: Sigma) -> Result<LossEval> {
    check_order("log_loss", power, &[1, 2])?;
    check_shapes("log_loss", y, o)?;
    let (n, k) = o.shape();
    let scale = 1.0 / n.max(1) as f64;
    let mut grad = Dense2::zeros(n, k);
    let mut p = vec![0.0; k];
    // coefficient of ∂ln p_j/∂o in the per-sample gradient
    let mut w = vec![0.0; k];
    let mut total = 0.0;
    for r in 0..n {
        probabilities_into(sigma, o.row(r), &mut p);
        let yr = y.row(r);
        for j in 0..k {
            let ln_p = clamped_ln(p[j]);
            if power == 1 {
                total -= yr[j] * ln_p;
                w[j] = -yr[j];
            } else {
                let t = yr[j] * ln_p;
                total += t * t;
                w[j] = 2.0 * yr[j] * t;
            }
        }
        let g = grad.row_mut(r);
        match sigma {
            Sigma::Softmax => {
                let w_sum: f64 = w.iter().sum();
                for j in 0..k {
                    g[j] = (w[j] - p[j] * w_sum) * scale;
                }
            }
            Sigma::Sigmoid => {
                for j in 0..k {
                    g[j] = w[j] * (1.0 - p[j]) * scale;
                }
            }
        }
    }
    Ok(LossEval {
        value: total * scale,
        grad,
    })
}

/// Squared log loss with the leading minus sign kept, `−Σ_j (y_j ln σ(o)_j)²`.
///
/// Unbounded below; only useful for comparing against [`log_loss`] with power 2.
pub fn squared_log_loss_negated(y: &Dense2, o: &Dense2, sigma: Sigma) -> Result<LossEval> {
    let mut eval = log_loss(2, y, o, sigma)?;
    eval.value = -eval.value;
    eval.grad.as_mut_slice().iter_mut().for_each(|g| *g = -*g);
    Ok(eval)
}

/// Negated Tanimoto similarity `−s / (‖p‖² + ‖y‖² − s)` with `s = ⟨p, y⟩`.
pub fn tanimoto_loss(y: &Dense2, o: &Dense2, sigma: Sigma) -> Result<LossEval> {
    probability_loss("tanimoto_loss", y, o, sigma, |y, p, g| {
        let s: f64 = p.iter().zip(y).map(|(p, y)| p * y).sum();
        let pp: f64 = p.iter().map(|p| p * p).sum();
        let yy: f64 = y.iter().map(|y| y * y).sum();
        let d = pp + yy - s;
        for ((g, &y), &p) in g.iter_mut().zip(y).zip(p) {
            *g = -(y * d - s * (2.0 * p - y)) / (d * d);
        }
        -s / d
    })
}

/// Cauchy–Schwarz divergence `−ln(⟨p, y⟩ / (‖p‖ ‖y‖))`.
pub fn cauchy_schwarz_loss(y: &Dense2, o: &Dense2, sigma: Sigma) -> Result<LossEval> {
    probability_loss("cauchy_schwarz_loss", y, o, sigma, |y, p, g| {
        let s: f64 = p.iter().zip(y).map(|(p, y)| p * y).sum();
        let pp: f64 = p.iter().map(|p| p * p).sum();
        let yy: f64 = y.iter().map(|y| y * y).sum();
        let s_active = s >= PROB_FLOOR;
        for ((g, &y), &p) in g.iter_mut().zip(y).zip(p) {
            let from_s = if s_active { -y / s } else { 0.0 };
            *g = from_s + p / pp;
        }
        -clamped_ln(s) + 0.5 * pp.ln() + 0.5 * yy.ln()
    })
}
