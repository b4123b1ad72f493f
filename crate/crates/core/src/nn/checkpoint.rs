//! Plain-text weight files.
//!
//! ```text
//! tiny-nn-checkpoint v1
//! layers <count>
//! layer <fan_in> <fan_out> <relu|tanh|identity>
//! <fan_in lines of fan_out weights, space separated>
//! <one line of fan_out biases>
//! ...
//! ```
//!
//! Numbers are written in shortest round-trip form, so a save/load cycle
//! reproduces every parameter bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{Activation, Layer, Mlp};
use crate::error::{Error, Result};

const MAGIC: &str = "tiny-nn-checkpoint v1";

fn bad(detail: impl Into<String>) -> Error {
    Error::Parse { what: "checkpoint", detail: detail.into() }
}

fn numbers(line: Option<&str>, expected: usize) -> Result<Vec<f64>> {
    let line = line.ok_or_else(|| bad("unexpected end of file"))?;
    let v = line
        .split_ascii_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad number `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    if v.len() != expected {
        return Err(bad(format!("expected {expected} values, found {}", v.len())));
    }
    Ok(v)
}

impl Mlp {
    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC}\nlayers {}\n", self.layers.len());
        let join = |it: &mut dyn Iterator<Item = &f64>| it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        for l in &self.layers {
            let _ = writeln!(out, "layer {} {} {}", l.fan_in(), l.fan_out(), l.act.name());
            for row in l.w.rows() {
                let _ = writeln!(out, "{}", join(&mut row.iter()));
            }
            let _ = writeln!(out, "{}", join(&mut l.b.iter()));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err(bad(format!("missing `{MAGIC}` header")));
        }
        let count: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("layers "))
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| bad("missing `layers <count>` line"))?;
        let mut layers = Vec::with_capacity(count);
        for i in 0..count {
            let head: Vec<&str> = lines.next().unwrap_or("").split_ascii_whitespace().collect();
            let (fan_in, fan_out, act) = match head.as_slice() {
                ["layer", a, b, act] => (
                    a.parse::<usize>().map_err(|_| bad(format!("layer {i}: bad width `{a}`")))?,
                    b.parse::<usize>().map_err(|_| bad(format!("layer {i}: bad width `{b}`")))?,
                    Activation::parse(act).ok_or_else(|| bad(format!("layer {i}: unknown activation `{act}`")))?,
                ),
                _ => return Err(bad(format!("layer {i}: malformed header"))),
            };
            let mut w = Vec::with_capacity(fan_in * fan_out);
            for _ in 0..fan_in {
                w.extend(numbers(lines.next(), fan_out)?);
            }
            let b = numbers(lines.next(), fan_out)?;
            layers.push(Layer {
                w: Array2::from_shape_vec((fan_in, fan_out), w).expect("row count checked"),
                b: Array1::from(b),
                act,
            });
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(bad("trailing content after the last layer"));
        }
        Mlp::from_layers(layers)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Mlp::from_text(&text)
    }
}
