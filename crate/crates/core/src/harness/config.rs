use crate::error::{Error, Result};
use crate::losses::{LossId, LossSpec, Sigma};
use crate::optim::AdamConfig;

pub const MAX_HIDDEN_LAYERS: usize = 5;

/// Everything that determines a training run besides the data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub loss: LossSpec,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub dropout_keep: f64,
    pub adam: AdamConfig,
    pub iterations: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub eval_every: usize,
}

impl TrainConfig {
    /// Toy protocol: 200-unit layers, no dropout, 60k iterations of batch 50.
    pub fn toy(loss: LossId) -> Self {
        TrainConfig {
            loss: LossSpec::new(loss),
            hidden_layers: 5,
            hidden_width: 200,
            dropout_keep: 1.0,
            adam: AdamConfig::default(),
            iterations: 60_000,
            batch_size: 50,
            seed: 0,
            eval_every: 500,
        }
    }

    /// MNIST protocol: 512-unit layers, dropout 0.5, 100k iterations of batch 100.
    pub fn mnist(loss: LossId) -> Self {
        TrainConfig {
            loss: LossSpec::new(loss),
            hidden_layers: 0,
            hidden_width: 512,
            dropout_keep: 0.5,
            adam: AdamConfig::default(),
            iterations: 100_000,
            batch_size: 100,
            seed: 0,
            eval_every: 1000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.iterations == 0 {
            return bad("iterations must be positive".into());
        }
        if self.eval_every == 0 || self.iterations % self.eval_every != 0 {
            return bad(format!(
                "eval_every {} must divide iterations {}",
                self.eval_every, self.iterations
            ));
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        if self.hidden_layers > MAX_HIDDEN_LAYERS {
            return bad(format!(
                "{} hidden layers requested, at most {MAX_HIDDEN_LAYERS} supported",
                self.hidden_layers
            ));
        }
        if self.hidden_layers > 0 && self.hidden_width == 0 {
            return bad("hidden width must be positive".into());
        }
        if !(self.dropout_keep > 0.0 && self.dropout_keep <= 1.0) {
            return bad(format!("dropout keep {} outside (0, 1]", self.dropout_keep));
        }
        if !(self.adam.lr > 0.0) {
            return bad(format!("learning rate {} must be positive", self.adam.lr));
        }
        Ok(())
    }

    /// `key=value` pairs fully describing the config, in a fixed order.
    pub fn manifest_entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("loss", self.loss.id.id().to_string()),
            ("sigma", self.loss.sigma.name().to_string()),
            ("hinge_margin", self.loss.hinge_margin.to_string()),
            ("negated_log2", self.loss.negated_log2.to_string()),
            ("hidden_layers", self.hidden_layers.to_string()),
            ("hidden_width", self.hidden_width.to_string()),
            ("dropout_keep", self.dropout_keep.to_string()),
            ("lr", self.adam.lr.to_string()),
            ("beta1", self.adam.beta1.to_string()),
            ("beta2", self.adam.beta2.to_string()),
            ("eps", self.adam.eps.to_string()),
            ("iterations", self.iterations.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("seed", self.seed.to_string()),
            ("eval_every", self.eval_every.to_string()),
        ]
    }

    /// Sets one field from its manifest key. Returns `false` for keys that
    /// are not config fields.
    pub fn apply_entry(&mut self, key: &str, value: &str) -> Result<bool> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{key}: cannot parse `{value}`")))
        }
        match key {
            "loss" => self.loss.id = value.parse()?,
            "sigma" => {
                self.loss.sigma = match value {
                    "softmax" => Sigma::Softmax,
                    "sigmoid" => Sigma::Sigmoid,
                    _ => return Err(Error::InvalidArgument(format!("sigma: unknown `{value}`"))),
                }
            }
            "hinge_margin" => self.loss.hinge_margin = num(key, value)?,
            "negated_log2" => self.loss.negated_log2 = num(key, value)?,
            "hidden_layers" => self.hidden_layers = num(key, value)?,
            "hidden_width" => self.hidden_width = num(key, value)?,
            "dropout_keep" => self.dropout_keep = num(key, value)?,
            "lr" => self.adam.lr = num(key, value)?,
            "beta1" => self.adam.beta1 = num(key, value)?,
            "beta2" => self.adam.beta2 = num(key, value)?,
            "eps" => self.adam.eps = num(key, value)?,
            "iterations" => self.iterations = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "eval_every" => self.eval_every = num(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Applies every recognised `key=value` line of a manifest. Blank lines and
    /// `#` comments are skipped; unrecognised keys are returned.
    pub fn apply_manifest(&mut self, text: &str) -> Result<Vec<String>> {
        let mut unknown = Vec::new();
        for (pairs, line) in parse_manifest(text)?.into_iter().zip(1..) {
            let (key, value) = pairs;
            match self.apply_entry(&key, &value) {
                Ok(true) => {}
                Ok(false) => unknown.push(key),
                Err(e) => return Err(Error::InvalidArgument(format!("manifest entry {line}: {e}"))),
            }
        }
        Ok(unknown)
    }
}

/// Splits `key=value` lines.
pub fn parse_manifest(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("manifest line {}: missing `=`", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        TrainConfig::toy(LossId::Log).validate().unwrap();
        TrainConfig::mnist(LossId::Hinge2).validate().unwrap();
    }

    #[test]
    fn validation_failures() {
        let mut c = TrainConfig::toy(LossId::Log);
        c.eval_every = 7;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::toy(LossId::Log);
        c.hidden_layers = 6;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::toy(LossId::Log);
        c.iterations = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let mut c = TrainConfig::mnist(LossId::Tanimoto);
        c.seed = 77;
        c.adam.lr = 1e-3;
        c.loss.sigma = Sigma::Sigmoid;
        let text: String = c
            .manifest_entries()
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        let mut back = TrainConfig::toy(LossId::L1);
        let unknown = back.apply_manifest(&format!("# run\n{text}dataset=mnist\n")).unwrap();
        assert_eq!(back, c);
        assert_eq!(unknown, vec!["dataset".to_string()]);
    }

    #[test]
    fn manifest_errors() {
        let mut c = TrainConfig::toy(LossId::Log);
        assert!(c.apply_manifest("seed").is_err());
        assert!(c.apply_manifest("seed=abc").is_err());
        assert!(c.apply_manifest("loss=softplus").is_err());
    }
}
