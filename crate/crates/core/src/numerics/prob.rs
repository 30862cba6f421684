use crate::error::{Error, Result};

use super::Dense2;

/// Lower clamp applied to probabilities before any logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// `ln(max(p, PROB_FLOOR))`
pub fn clamped_ln(p: f64) -> f64 {
    p.clamp(PROB_FLOOR, 1.0).ln()
}

/// Softmax with max-subtraction.
pub fn softmax(o: &[f64]) -> Result<Vec<f64>> {
    let mut out = o.to_vec();
    softmax_in_place(&mut out)?;
    Ok(out)
}

pub fn softmax_in_place(v: &mut [f64]) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { op: "softmax" });
    }
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    for x in v.iter_mut() {
        *x /= total;
    }
    Ok(())
}

/// Row-wise softmax of a batch.
pub fn softmax_rows(o: &Dense2) -> Result<Dense2> {
    let mut p = o.clone();
    for r in 0..p.rows() {
        softmax_in_place(p.row_mut(r))?;
    }
    Ok(p)
}

/// Logistic function. Exact 0.5 at 0 and never negative.
pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(o: &[f64]) -> Result<Vec<f64>> {
    if o.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { op: "sigmoid" });
    }
    Ok(o.iter().map(|&x| sigmoid_scalar(x)).collect())
}

pub fn sigmoid_rows(o: &Dense2) -> Result<Dense2> {
    if !o.is_finite() {
        return Err(Error::NonFinite { op: "sigmoid" });
    }
    Ok(o.map(sigmoid_scalar))
}
