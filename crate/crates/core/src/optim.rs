//! Bias-corrected Adam.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 3e-5,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            ..Self::default()
        }
    }
}

/// Moment buffers for a fixed list of parameter tensors.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub config: AdamConfig,
    step: u64,
    labels: Vec<String>,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    /// One moment buffer per `(label, len)` tensor; labels name tensors in errors.
    pub fn new(config: AdamConfig, tensors: &[(String, usize)]) -> Self {
        AdamState {
            config,
            step: 0,
            labels: tensors.iter().map(|(l, _)| l.clone()).collect(),
            m: tensors.iter().map(|&(_, n)| vec![0.0; n]).collect(),
            v: tensors.iter().map(|&(_, n)| vec![0.0; n]).collect(),
        }
    }

    pub fn for_model(config: AdamConfig, model: &mut crate::nn::MlpModel) -> Self {
        let labels = model.param_labels();
        let lens: Vec<usize> = model.param_slices_mut().iter().map(|s| s.len()).collect();
        let tensors: Vec<(String, usize)> = labels.into_iter().zip(lens).collect();
        Self::new(config, &tensors)
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &[Vec<f64>] {
        &self.m
    }

    pub fn second_moment(&self) -> &[Vec<f64>] {
        &self.v
    }

    /// Applies one update. Nothing is modified if any gradient is non-finite
    /// or a shape is off.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::InvalidArgument(format!(
                "adam: {} tensors registered, got {} parameters and {} gradients",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != self.m[i].len() || g.len() != self.m[i].len() {
                return Err(Error::ShapeMismatch {
                    op: "adam_step",
                    left: (1, p.len()),
                    right: (1, g.len()),
                });
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient {
                    tensor: self.labels[i].clone(),
                });
            }
        }

        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let t = self.step as i32;
        let inv_bias1 = 1.0 / (1.0 - beta1.powi(t));
        let inv_bias2 = 1.0 / (1.0 - beta2.powi(t));
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for (((p, &g), m), v) in p.iter_mut().zip(g.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m * inv_bias1;
                let v_hat = *v * inv_bias2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
