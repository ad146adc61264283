//! Plain-text parameter snapshots.
//!
//! ```text
//! dine-flow-snapshot 1
//! data_dim 2
//! cond_dim 1
//! n_components 16
//! hidden_dim 4
//! epochs 100
//! batch_size 64
//! learning_rate 1e-2
//! seed 7
//! tensor dim0.conditioner.w1 4,1 <4 scalars>
//! ...
//! ```
//!
//! Scalars use the shortest round-tripping exponent form, so a snapshot
//! restores bit-identical parameters.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::flow::config::{FlowConfig, TrainConfig};
use crate::flow::model::ConditionalFlow;

const MAGIC: &str = "dine-flow-snapshot";
const VERSION: u32 = 1;

impl ConditionalFlow {
    pub fn to_snapshot(&self) -> String {
        let c = self.config();
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {VERSION}");
        let _ = writeln!(out, "data_dim {}", c.data_dim);
        let _ = writeln!(out, "cond_dim {}", c.cond_dim);
        let _ = writeln!(out, "n_components {}", c.n_components);
        let _ = writeln!(out, "hidden_dim {}", c.hidden_dim);
        let _ = writeln!(out, "epochs {}", c.train.epochs);
        let _ = writeln!(out, "batch_size {}", c.train.batch_size);
        let _ = writeln!(out, "learning_rate {:e}", c.train.learning_rate);
        let _ = writeln!(out, "seed {}", c.train.seed);
        let values = self.params().values();
        for spec in self.params().layout() {
            let shape: Vec<String> = spec.shape.iter().map(|s| s.to_string()).collect();
            let _ = write!(out, "tensor {} {}", spec.name, shape.join(","));
            for v in &values[spec.range()] {
                let _ = write!(out, " {v:e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Data(format!("snapshot: {msg}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(MAGIC) {
            return Err(bad("missing header".into()));
        }
        let version: u32 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("missing version".into()))?;
        if version != VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad(format!("missing {name}")))?;
            match line.split_once(' ') {
                Some((k, v)) if k == name => Ok(v.trim().to_string()),
                _ => Err(bad(format!("expected {name}, found {line:?}"))),
            }
        };
        let num = |s: String, name: &str| -> Result<usize> { s.parse().map_err(|_| bad(format!("bad {name}"))) };
        let data_dim = num(field("data_dim")?, "data_dim")?;
        let cond_dim = num(field("cond_dim")?, "cond_dim")?;
        let n_components = num(field("n_components")?, "n_components")?;
        let hidden_dim = num(field("hidden_dim")?, "hidden_dim")?;
        let epochs = num(field("epochs")?, "epochs")?;
        let batch_size = num(field("batch_size")?, "batch_size")?;
        let learning_rate: f64 = field("learning_rate")?
            .parse()
            .map_err(|_| bad("bad learning_rate".into()))?;
        let seed: u64 = field("seed")?.parse().map_err(|_| bad("bad seed".into()))?;
        let config = FlowConfig {
            data_dim,
            cond_dim,
            n_components,
            hidden_dim,
            train: TrainConfig {
                epochs,
                batch_size,
                learning_rate,
                seed,
            },
        };
        let mut flow = ConditionalFlow::with_zero_parameters(config)?;
        let specs = flow.params().layout().to_vec();
        let mut values = vec![0.0; flow.params().len()];
        for spec in &specs {
            let line = lines.next().ok_or_else(|| bad(format!("missing tensor {}", spec.name)))?;
            let mut tok = line.split_whitespace();
            if tok.next() != Some("tensor") || tok.next() != Some(spec.name.as_str()) {
                return Err(bad(format!("expected tensor {}, found {line:?}", spec.name)));
            }
            let shape: Vec<usize> = tok
                .next()
                .unwrap_or("")
                .split(',')
                .map(|s| s.parse().map_err(|_| bad(format!("bad shape for {}", spec.name))))
                .collect::<Result<_>>()?;
            if shape != spec.shape {
                return Err(bad(format!("shape mismatch for {}", spec.name)));
            }
            let payload: Vec<f64> = tok
                .map(|s| s.parse().map_err(|_| bad(format!("bad scalar in {}", spec.name))))
                .collect::<Result<_>>()?;
            if payload.len() != spec.len() {
                return Err(bad(format!("{} holds {} scalars, expected {}", spec.name, payload.len(), spec.len())));
            }
            values[spec.range()].copy_from_slice(&payload);
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(bad("trailing content".into()));
        }
        flow.params_mut().assign(&values)?;
        Ok(flow)
    }
}
