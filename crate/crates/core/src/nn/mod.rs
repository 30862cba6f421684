//! Feed-forward rectifier networks with inverted dropout and hand-written
//! backpropagation.

mod checkpoint;

use crate::error::{Error, Result};
use crate::numerics::{Dense2, Rng};

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC};

/// Rows per chunk when evaluating large datasets.
const EVAL_CHUNK: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Linear => "linear",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    /// Probability of keeping a unit; 1 disables dropout.
    pub dropout_keep: f64,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation, dropout_keep: f64) -> Self {
        LayerSpec {
            in_dim,
            out_dim,
            activation,
            dropout_keep,
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        if !(self.dropout_keep > 0.0 && self.dropout_keep <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "layer {index}: dropout keep probability {} outside (0, 1]",
                self.dropout_keep
            )));
        }
        if self.in_dim == 0 || self.out_dim == 0 {
            return Err(Error::InvalidArgument(format!("layer {index}: zero-sized layer")));
        }
        Ok(())
    }
}

/// `hidden_layers` ReLU layers of `width` units with dropout, then a linear
/// output layer without dropout. Zero hidden layers gives a linear model.
pub fn mlp_specs(
    input: usize,
    hidden_layers: usize,
    width: usize,
    classes: usize,
    dropout_keep: f64,
) -> Vec<LayerSpec> {
    let mut specs = Vec::with_capacity(hidden_layers + 1);
    let mut fan_in = input;
    for _ in 0..hidden_layers {
        specs.push(LayerSpec::new(fan_in, width, Activation::Relu, dropout_keep));
        fan_in = width;
    }
    specs.push(LayerSpec::new(fan_in, classes, Activation::Linear, 1.0));
    specs
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub spec: LayerSpec,
    /// `in_dim × out_dim`
    pub weights: Dense2,
    pub bias: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    layers: Vec<Layer>,
    mode: Mode,
}

/// Activations kept by a train-mode forward pass for the matching backward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    inputs: Vec<Dense2>,
    pre_activations: Vec<Dense2>,
    /// Entries are 0 or 1/keep.
    dropout_masks: Vec<Option<Dense2>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrad {
    pub weights: Dense2,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

impl Gradients {
    /// Per-tensor slices in the order of [`MlpModel::param_slices_mut`].
    pub fn slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|g| [g.weights.as_slice(), g.bias.as_slice()])
            .collect()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.slices().concat()
    }
}

impl MlpModel {
    /// He initialisation: weights ~ N(0, 2 / in_dim), zero biases.
    pub fn init(specs: &[LayerSpec], rng: &mut Rng) -> Result<Self> {
        Self::check_chain(specs)?;
        let layers = specs
            .iter()
            .map(|spec| {
                let sd = (2.0 / spec.in_dim as f64).sqrt();
                let data = (0..spec.in_dim * spec.out_dim)
                    .map(|_| sd * rng.normal())
                    .collect();
                Layer {
                    spec: *spec,
                    weights: Dense2::new(spec.in_dim, spec.out_dim, data).expect("sized above"),
                    bias: vec![0.0; spec.out_dim],
                }
            })
            .collect();
        Ok(MlpModel {
            layers,
            mode: Mode::Train,
        })
    }

    /// Assembles a model from explicit layers.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let specs: Vec<LayerSpec> = layers.iter().map(|l| l.spec).collect();
        Self::check_chain(&specs)?;
        for (i, l) in layers.iter().enumerate() {
            if l.weights.shape() != (l.spec.in_dim, l.spec.out_dim) || l.bias.len() != l.spec.out_dim {
                return Err(Error::InvalidArgument(format!(
                    "layer {i}: parameter shapes do not match its spec"
                )));
            }
        }
        Ok(MlpModel {
            layers,
            mode: Mode::Eval,
        })
    }

    fn check_chain(specs: &[LayerSpec]) -> Result<()> {
        if specs.is_empty() {
            return Err(Error::InvalidArgument("model needs at least one layer".into()));
        }
        for (i, spec) in specs.iter().enumerate() {
            spec.validate(i)?;
            if i > 0 && specs[i - 1].out_dim != spec.in_dim {
                return Err(Error::BrokenChain {
                    layer: i,
                    expected: specs[i - 1].out_dim,
                    found: spec.in_dim,
                });
            }
        }
        Ok(())
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].spec.in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].spec.out_dim
    }

    pub fn hidden_layers(&self) -> usize {
        self.layers.len() - 1
    }

    fn check_input(&self, x: &Dense2) -> Result<()> {
        if x.cols() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                op: "forward",
                left: x.shape(),
                right: (self.input_dim(), self.layers[0].spec.out_dim),
            });
        }
        Ok(())
    }

    /// Forward pass keeping what [`backward`](Self::backward) needs.
    ///
    /// In train mode every layer with `dropout_keep < 1` zeroes units with
    /// probability `1 − keep` after its activation and scales survivors by
    /// `1 / keep`. Eval mode never touches `rng`.
    pub fn forward(&self, x: &Dense2, rng: &mut Rng) -> Result<(Dense2, ForwardCache)> {
        self.check_input(x)?;
        let n = self.layers.len();
        let mut cache = ForwardCache {
            inputs: Vec::with_capacity(n),
            pre_activations: Vec::with_capacity(n),
            dropout_masks: Vec::with_capacity(n),
        };
        let mut current = x.clone();
        for layer in &self.layers {
            let mut pre = current.matmul(&layer.weights)?;
            pre.add_bias(&layer.bias)?;
            let mut out = match layer.spec.activation {
                Activation::Relu => pre.map(|v| v.max(0.0)),
                Activation::Linear => pre.clone(),
            };
            let keep = layer.spec.dropout_keep;
            let mask = if self.mode == Mode::Train && keep < 1.0 {
                let scale = 1.0 / keep;
                let mask = Dense2::new(
                    out.rows(),
                    out.cols(),
                    (0..out.rows() * out.cols())
                        .map(|_| if rng.uniform() < keep { scale } else { 0.0 })
                        .collect(),
                )?;
                for (v, m) in out.as_mut_slice().iter_mut().zip(mask.as_slice()) {
                    *v *= m;
                }
                Some(mask)
            } else {
                None
            };
            cache.inputs.push(std::mem::replace(&mut current, out));
            cache.pre_activations.push(pre);
            cache.dropout_masks.push(mask);
        }
        Ok((current, cache))
    }

    /// Deterministic forward pass without dropout or caching.
    pub fn forward_eval(&self, x: &Dense2) -> Result<Dense2> {
        self.check_input(x)?;
        let mut current = x.clone();
        for layer in &self.layers {
            let mut pre = current.matmul(&layer.weights)?;
            pre.add_bias(&layer.bias)?;
            if layer.spec.activation == Activation::Relu {
                pre.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0));
            }
            current = pre;
        }
        Ok(current)
    }

    /// Parameter gradients given `∂loss/∂o` for the batch cached by `forward`.
    pub fn backward(&self, cache: &ForwardCache, d_out: &Dense2) -> Result<Gradients> {
        if cache.inputs.len() != self.layers.len() {
            return Err(Error::StaleCache(format!(
                "cache holds {} layers, model has {}",
                cache.inputs.len(),
                self.layers.len()
            )));
        }
        for (i, (layer, input)) in self.layers.iter().zip(&cache.inputs).enumerate() {
            if input.cols() != layer.spec.in_dim || input.rows() != d_out.rows() {
                return Err(Error::StaleCache(format!("layer {i} input is {:?}", input.shape())));
            }
        }
        let out_shape = (d_out.rows(), self.output_dim());
        if d_out.shape() != out_shape {
            return Err(Error::ShapeMismatch {
                op: "backward",
                left: d_out.shape(),
                right: out_shape,
            });
        }

        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = d_out.clone();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            if let Some(mask) = &cache.dropout_masks[i] {
                for (d, m) in delta.as_mut_slice().iter_mut().zip(mask.as_slice()) {
                    *d *= m;
                }
            }
            if layer.spec.activation == Activation::Relu {
                for (d, &z) in delta
                    .as_mut_slice()
                    .iter_mut()
                    .zip(cache.pre_activations[i].as_slice())
                {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let weights = cache.inputs[i].matmul_tn(&delta)?;
            let bias = delta.column_sums();
            if i > 0 {
                delta = delta.matmul_nt(&layer.weights)?;
            }
            grads.push(LayerGrad { weights, bias });
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }

    /// Argmax of the eval-mode output; ties go to the lowest class index.
    pub fn predict_classes(&self, x: &Dense2) -> Result<Vec<usize>> {
        let mut labels = Vec::with_capacity(x.rows());
        let all: Vec<usize> = (0..x.rows()).collect();
        for chunk in all.chunks(EVAL_CHUNK) {
            let part = if chunk.len() == x.rows() {
                x.clone()
            } else {
                x.select_rows(chunk)
            };
            labels.extend(self.forward_eval(&part)?.argmax_rows());
        }
        Ok(labels)
    }

    /// Fraction of rows whose predicted class equals `labels`.
    pub fn accuracy(&self, x: &Dense2, labels: &[usize]) -> Result<f64> {
        if labels.len() != x.rows() {
            return Err(Error::ShapeMismatch {
                op: "accuracy",
                left: x.shape(),
                right: (labels.len(), 1),
            });
        }
        if labels.is_empty() {
            return Ok(0.0);
        }
        let predicted = self.predict_classes(x)?;
        let hits = predicted.iter().zip(labels).filter(|(a, b)| a == b).count();
        Ok(hits as f64 / labels.len() as f64)
    }

    /// Names for each tensor of [`param_slices_mut`](Self::param_slices_mut).
    pub fn param_labels(&self) -> Vec<String> {
        (0..self.layers.len())
            .flat_map(|i| [format!("layer {i} weights"), format!("layer {i} bias")])
            .collect()
    }

    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                values.len()
            )));
        }
        let mut offset = 0;
        for slice in self.param_slices_mut() {
            let len = slice.len();
            slice.copy_from_slice(&values[offset..offset + len]);
            offset += len;
        }
        Ok(())
    }
}
