//! Versioned plain-text model checkpoints.
//!
//! One `key value...` record per line. Arrays are written as `key <len> v0 v1 ...`
//! with shortest round-trip decimal formatting, so a save/load cycle restores
//! every parameter bit-exactly. The shift operator is stored alongside the
//! parameters; neighborhoods are rebuilt from its sparsity pattern.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use super::activation::{Activation, DynamicMedian};
use super::filter::FilterBank;
use super::model::{Architecture, GraphContext, Model, ModelParams};
use super::readout::Readout;
use crate::error::{Error, Result};
use crate::graph::{build_neighborhood_table, Direction, Graph, ShiftMatrix};

pub const MAGIC: &str = "medgnn-checkpoint";
pub const VERSION: u32 = 1;

pub fn to_string(model: &Model) -> String {
    let arch = model.architecture();
    let ctx = model.context();
    let p = model.params();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "activation {}", arch.activation);
    let direction = match ctx.table().direction() {
        Direction::In => "in",
        Direction::Out => "out",
    };
    let _ = writeln!(out, "direction {direction}");
    let _ = writeln!(out, "max_hop {}", ctx.table().max_hop());
    for (key, v) in [
        ("nodes", arch.nodes),
        ("features_in", arch.features_in),
        ("filters", arch.filters),
        ("taps", arch.taps),
        ("classes", arch.classes),
    ] {
        let _ = writeln!(out, "{key} {v}");
    }
    write_array(&mut out, "gso", ctx.shift().entries());
    for (name, values) in p.tensors() {
        write_array(&mut out, name, values);
    }
    out
}

fn write_array(out: &mut String, key: &str, values: &[f64]) {
    let _ = write!(out, "{key} {}", values.len());
    for v in values {
        let _ = write!(out, " {v:?}");
    }
    out.push('\n');
}

pub fn from_str(text: &str) -> Result<Model> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        msg: "empty checkpoint".into(),
    })?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("not a checkpoint (expected `{MAGIC}`)"),
        });
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing checkpoint version".into(),
        })?;
    if version != VERSION {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unsupported checkpoint version {version}"),
        });
    }

    let mut records: HashMap<String, (usize, Vec<String>)> = HashMap::new();
    for (idx, line) in lines {
        let mut fields = line.split_whitespace();
        let Some(key) = fields.next() else { continue };
        records.insert(key.to_string(), (idx + 1, fields.map(str::to_string).collect()));
    }
    let field = |key: &str| -> Result<&(usize, Vec<String>)> {
        records.get(key).ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("checkpoint is missing `{key}`"),
        })
    };
    let scalar = |key: &str| -> Result<String> {
        let (line, vals) = field(key)?;
        match vals.as_slice() {
            [v] => Ok(v.clone()),
            _ => Err(Error::Parse {
                line: *line,
                msg: format!("`{key}` takes one value"),
            }),
        }
    };
    let count = |key: &str| -> Result<usize> {
        let (line, _) = field(key)?;
        scalar(key)?.parse().map_err(|_| Error::Parse {
            line: *line,
            msg: format!("`{key}` is not a count"),
        })
    };
    let array = |key: &str| -> Result<Vec<f64>> {
        let (line, vals) = field(key)?;
        let bad = |msg: String| Error::Parse { line: *line, msg };
        let (len, rest) = vals
            .split_first()
            .ok_or_else(|| bad(format!("`{key}` has no length")))?;
        let len: usize = len.parse().map_err(|_| bad(format!("bad length for `{key}`")))?;
        if rest.len() != len {
            return Err(bad(format!("`{key}` declares {len} values, has {}", rest.len())));
        }
        rest.iter()
            .map(|v| v.parse::<f64>().map_err(|_| bad(format!("bad number `{v}` in `{key}`"))))
            .collect()
    };

    let activation: Activation = scalar("activation")?.parse()?;
    let direction = match scalar("direction")?.as_str() {
        "in" => Direction::In,
        "out" => Direction::Out,
        other => {
            return Err(Error::Parse {
                line: field("direction")?.0,
                msg: format!("unknown direction `{other}`"),
            })
        }
    };
    let arch = Architecture {
        nodes: count("nodes")?,
        features_in: count("features_in")?,
        filters: count("filters")?,
        taps: count("taps")?,
        classes: count("classes")?,
        activation,
    };
    let max_hop = count("max_hop")?;

    let shift = ShiftMatrix::from_entries(arch.nodes, array("gso")?)?;
    let pattern = Graph::from_shift_pattern(&shift, true)?;
    let table = build_neighborhood_table(&pattern, max_hop, direction);
    let context = Arc::new(GraphContext::new(shift, table)?);

    let filter = FilterBank::from_coefficients(arch.features_in, arch.filters, arch.taps, array("filter")?)?;
    let median = match activation {
        Activation::DynamicMedian { .. } => Some(DynamicMedian::from_weights(array("omega")?)?),
        _ => None,
    };
    let readout = Readout::from_parts(
        arch.filters * arch.nodes,
        arch.classes,
        array("readout.weight")?,
        array("readout.bias")?,
    )?;
    Model::from_parts(
        arch,
        ModelParams {
            filter,
            median,
            readout,
        },
        context,
    )
}
