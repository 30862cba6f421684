//! Plain-text model checkpoints.
//!
//! ```text
//! lossforge-mlp 1
//! layers <count>
//! layer <in_dim> <out_dim> <relu|linear> <dropout_keep>
//! weights <in_dim·out_dim values, row-major>
//! bias <out_dim values>
//! ...one layer/weights/bias triple per layer
//! ```
//!
//! Values are written in shortest round-trip scientific notation, so a load
//! restores every parameter bit for bit. Loaded models start in eval mode.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::numerics::Dense2;

use super::{Activation, Layer, LayerSpec, MlpModel};

pub const CHECKPOINT_MAGIC: &str = "lossforge-mlp";
const VERSION: u32 = 1;

fn fmt_err(e: std::io::Error) -> Error {
    Error::Checkpoint(e.to_string())
}

fn write_values(w: &mut impl Write, tag: &str, values: &[f64]) -> std::io::Result<()> {
    w.write_all(tag.as_bytes())?;
    for v in values {
        write!(w, " {v:e}")?;
    }
    writeln!(w)
}

pub fn save_checkpoint(model: &MlpModel, mut w: impl Write) -> Result<()> {
    let out = &mut w;
    (|| -> std::io::Result<()> {
        writeln!(out, "{CHECKPOINT_MAGIC} {VERSION}")?;
        writeln!(out, "layers {}", model.layers().len())?;
        for layer in model.layers() {
            let s = &layer.spec;
            writeln!(
                out,
                "layer {} {} {} {:e}",
                s.in_dim,
                s.out_dim,
                s.activation.name(),
                s.dropout_keep
            )?;
            write_values(out, "weights", layer.weights.as_slice())?;
            write_values(out, "bias", &layer.bias)?;
        }
        out.flush()
    })()
    .map_err(fmt_err)
}

struct Lines<R> {
    inner: std::io::Lines<BufReader<R>>,
    number: usize,
}

impl<R: Read> Lines<R> {
    fn next_tagged(&mut self, tag: &str) -> Result<Vec<String>> {
        self.number += 1;
        let line = self
            .inner
            .next()
            .ok_or_else(|| Error::Checkpoint(format!("line {}: expected `{tag}`, found end of file", self.number)))?
            .map_err(fmt_err)?;
        let mut fields = line.split_ascii_whitespace().map(str::to_owned);
        match fields.next() {
            Some(t) if t == tag => Ok(fields.collect()),
            other => Err(Error::Checkpoint(format!(
                "line {}: expected `{tag}`, found {:?}",
                self.number,
                other.unwrap_or_default()
            ))),
        }
    }
}

fn parse<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Checkpoint(format!("cannot parse {what} from `{field}`")))
}

fn parse_values(fields: &[String], expected: usize, what: &str) -> Result<Vec<f64>> {
    if fields.len() != expected {
        return Err(Error::Checkpoint(format!(
            "{what}: expected {expected} values, found {}",
            fields.len()
        )));
    }
    fields.iter().map(|f| parse(f, what)).collect()
}

pub fn load_checkpoint(r: impl Read) -> Result<MlpModel> {
    let mut lines = Lines {
        inner: BufReader::new(r).lines(),
        number: 0,
    };
    let header = lines.next_tagged(CHECKPOINT_MAGIC)?;
    let version: u32 = parse(header.first().map_or("", String::as_str), "version")?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let count: usize = parse(
        lines.next_tagged("layers")?.first().map_or("", String::as_str),
        "layer count",
    )?;
    let mut layers = Vec::with_capacity(count);
    for i in 0..count {
        let head = lines.next_tagged("layer")?;
        if head.len() != 4 {
            return Err(Error::Checkpoint(format!("layer {i}: malformed header")));
        }
        let in_dim: usize = parse(&head[0], "in_dim")?;
        let out_dim: usize = parse(&head[1], "out_dim")?;
        let activation = match head[2].as_str() {
            "relu" => Activation::Relu,
            "linear" => Activation::Linear,
            other => return Err(Error::Checkpoint(format!("layer {i}: unknown activation `{other}`"))),
        };
        let keep: f64 = parse(&head[3], "dropout_keep")?;
        let weights = parse_values(&lines.next_tagged("weights")?, in_dim * out_dim, "weights")?;
        let bias = parse_values(&lines.next_tagged("bias")?, out_dim, "bias")?;
        layers.push(Layer {
            spec: LayerSpec::new(in_dim, out_dim, activation, keep),
            weights: Dense2::new(in_dim, out_dim, weights)?,
            bias,
        });
    }
    MlpModel::from_layers(layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{mlp_specs, Mode};
    use crate::numerics::Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut model = MlpModel::init(&mlp_specs(5, 2, 7, 3, 0.5), &mut Rng::new(12)).unwrap();
        model.layers_mut()[0].bias[1] = 1e-300;
        let mut buf = Vec::new();
        save_checkpoint(&model, &mut buf).unwrap();
        let loaded = load_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(loaded.mode(), Mode::Eval);
        assert_eq!(loaded.layers(), model.layers());
    }

    #[test]
    fn corrupt_files_are_rejected() {
        assert!(load_checkpoint("not-a-model 1\n".as_bytes()).is_err());
        assert!(load_checkpoint("lossforge-mlp 9\nlayers 0\n".as_bytes()).is_err());
        let truncated = "lossforge-mlp 1\nlayers 1\nlayer 2 1 linear 1e0\nweights 1e0\n";
        let err = load_checkpoint(truncated.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("expected 2 values"), "{err}");
    }
}
