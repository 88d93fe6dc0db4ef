//! Plain-text checkpoint format.
//!
//! ```text
//! bemap-checkpoint 1
//! activation relu
//! message_passing true
//! adam_step 120
//! tensor W0 8 128
//! <row 0 values, space separated>
//! …
//! tensor M0 8 128
//! …
//! ```
//!
//! One `tensor <name> <rows> <cols>` block per matrix followed by its rows
//! in row-major order. `W{l}` are the layer weights, `M{l}` / `V{l}` the
//! Adam moments. Values use the shortest representation that round-trips.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::Array2;

use super::{Activation, AdamState, GcnParams};
use crate::error::{Error, Result};

const MAGIC: &str = "bemap-checkpoint 1";

pub fn write_checkpoint<W: Write>(mut w: W, params: &GcnParams) -> std::io::Result<()> {
    writeln!(w, "{MAGIC}")?;
    let act = match params.activation {
        Activation::Relu => "relu",
        Activation::Linear => "linear",
    };
    writeln!(w, "activation {act}")?;
    writeln!(w, "message_passing {}", params.message_passing)?;
    writeln!(w, "adam_step {}", params.adam.step)?;
    let blocks = [("W", &params.weights), ("M", &params.adam.m), ("V", &params.adam.v)];
    for (prefix, mats) in blocks {
        for (l, m) in mats.iter().enumerate() {
            writeln!(w, "tensor {prefix}{l} {} {}", m.nrows(), m.ncols())?;
            for row in m.rows() {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                writeln!(w, "{}", line.join(" "))?;
            }
        }
    }
    Ok(())
}

pub fn save_checkpoint(path: &Path, params: &GcnParams) -> Result<()> {
    let mut buf = Vec::new();
    write_checkpoint(&mut buf, params).expect("writing to memory");
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<GcnParams> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(BufReader::new(file), &path.display().to_string())
}

pub fn read_checkpoint<R: BufRead>(r: R, name: &str) -> Result<GcnParams> {
    let err = |line: usize, msg: &str| Error::Parse {
        path: name.to_string(),
        line,
        msg: msg.to_string(),
    };
    let lines: Vec<String> = r
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::Io {
            path: name.to_string(),
            source: e,
        })?;
    let mut it = lines.iter().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| it.next().ok_or_else(|| err(lines.len(), &format!("missing {what}")));

    let (ln, magic) = next("header")?;
    if magic != MAGIC {
        return Err(err(ln, "not a bemap checkpoint"));
    }
    let (ln, act) = next("activation")?;
    let activation = match act {
        "activation relu" => Activation::Relu,
        "activation linear" => Activation::Linear,
        _ => return Err(err(ln, "bad activation line")),
    };
    let (ln, mp) = next("message_passing")?;
    let message_passing = match mp {
        "message_passing true" => true,
        "message_passing false" => false,
        _ => return Err(err(ln, "bad message_passing line")),
    };
    let (ln, step) = next("adam_step")?;
    let step: u64 = step
        .strip_prefix("adam_step ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(ln, "bad adam_step line"))?;

    let mut tensors: Vec<(String, Array2<f64>)> = Vec::new();
    while let Ok((ln, header)) = next("tensor") {
        if header.is_empty() {
            continue;
        }
        let parts: Vec<&str> = header.split_whitespace().collect();
        let (rows, cols) = match parts.as_slice() {
            ["tensor", _, r, c] => (
                r.parse::<usize>().map_err(|_| err(ln, "bad row count"))?,
                c.parse::<usize>().map_err(|_| err(ln, "bad column count"))?,
            ),
            _ => return Err(err(ln, "expected `tensor <name> <rows> <cols>`")),
        };
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (ln, row) = next("tensor row")?;
            let before = values.len();
            for tok in row.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|_| err(ln, "bad tensor value"))?);
            }
            if values.len() - before != cols {
                return Err(err(ln, "row length does not match the declared shape"));
            }
        }
        let m = Array2::from_shape_vec((rows, cols), values).expect("shape checked");
        tensors.push((parts[1].to_string(), m));
    }

    let take = |prefix: &str| -> Vec<Array2<f64>> {
        let mut out = Vec::new();
        while let Some((_, m)) = tensors.iter().find(|(n, _)| *n == format!("{prefix}{}", out.len())) {
            out.push(m.clone());
        }
        out
    };
    let weights = take("W");
    let m = take("M");
    let v = take("V");
    if weights.is_empty() {
        return Err(err(lines.len(), "checkpoint holds no weight tensors"));
    }
    if weights.windows(2).any(|w| w[0].ncols() != w[1].nrows()) {
        return Err(Error::validation("checkpoint weight shapes do not chain"));
    }
    let adam = if m.is_empty() && v.is_empty() {
        AdamState::for_weights(&weights)
    } else {
        let same = |xs: &[Array2<f64>]| xs.len() == weights.len() && xs.iter().zip(&weights).all(|(a, b)| a.dim() == b.dim());
        if !same(&m) || !same(&v) {
            return Err(Error::validation("Adam moments do not mirror the weight shapes"));
        }
        AdamState { m, v, step }
    };
    Ok(GcnParams {
        weights,
        activation,
        message_passing,
        adam,
    })
}
