//! Text model format. Floats are written with 17 significant digits so a
//! write/read cycle is exact.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{ClassWeighting, LogRegHyper, LogRegModel};
use crate::{Error, Result};

const MAGIC: &str = "hatewatch-logreg v1";
const CLASS_ORDER: &str = "classes hate abusive neither";

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

impl LogRegModel {
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let h = &self.hyper;
        let weights = match h.class_weights {
            ClassWeighting::Equal => "equal".to_string(),
            ClassWeighting::InverseFrequency => "inverse".to_string(),
            ClassWeighting::Custom(c) => format!("custom {} {} {}", f(c[0]), f(c[1]), f(c[2])),
        };
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "{CLASS_ORDER}")?;
        writeln!(w, "dim {}", self.dim)?;
        writeln!(w, "lambda {}", f(h.lambda))?;
        writeln!(w, "class_weights {weights}")?;
        writeln!(w, "max_iter {}", h.max_iter)?;
        writeln!(w, "learning_rate {}", f(h.learning_rate))?;
        writeln!(w, "batch_size {}", h.batch_size)?;
        writeln!(w, "seed {}", h.seed)?;
        writeln!(w, "tol {}", f(h.tol))?;
        writeln!(w, "patience {}", h.patience)?;
        writeln!(w, "bias {} {} {}", f(self.bias[0]), f(self.bias[1]), f(self.bias[2]))?;
        for c in 0..3 {
            let mut line = String::with_capacity(self.dim * 24);
            for (j, v) in self.row(c).iter().enumerate() {
                if j > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{v:.16e}");
            }
            writeln!(w, "{line}")?;
        }
        w.flush()
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::ModelFormat(format!("missing {what}")))?
                .map_err(|e| Error::ModelFormat(e.to_string()))
        };
        if next("magic")? != MAGIC {
            return Err(Error::ModelFormat("bad magic line".into()));
        }
        if next("class order")? != CLASS_ORDER {
            return Err(Error::ModelFormat("unexpected class order".into()));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = next(key)?;
            line.strip_prefix(key)
                .and_then(|s| s.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| Error::ModelFormat(format!("expected {key:?}, got {line:?}")))
        };
        let num = |s: &str, key: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::ModelFormat(format!("bad {key}: {s:?}")))
        };
        let int = |s: &str, key: &str| -> Result<u64> {
            s.parse::<u64>()
                .map_err(|_| Error::ModelFormat(format!("bad {key}: {s:?}")))
        };
        let dim = int(&field("dim")?, "dim")? as usize;
        let lambda = num(&field("lambda")?, "lambda")?;
        let cw = field("class_weights")?;
        let class_weights = match cw.split(' ').collect::<Vec<_>>().as_slice() {
            ["equal"] => ClassWeighting::Equal,
            ["inverse"] => ClassWeighting::InverseFrequency,
            ["custom", a, b, c] => ClassWeighting::Custom([num(a, "w")?, num(b, "w")?, num(c, "w")?]),
            _ => return Err(Error::ModelFormat(format!("bad class_weights {cw:?}"))),
        };
        let hyper = LogRegHyper {
            lambda,
            class_weights,
            max_iter: int(&field("max_iter")?, "max_iter")? as usize,
            learning_rate: num(&field("learning_rate")?, "learning_rate")?,
            batch_size: int(&field("batch_size")?, "batch_size")? as usize,
            seed: int(&field("seed")?, "seed")?,
            tol: num(&field("tol")?, "tol")?,
            patience: int(&field("patience")?, "patience")? as usize,
        };
        let bias_line = field("bias")?;
        let b: Vec<f64> = bias_line
            .split(' ')
            .map(|s| num(s, "bias"))
            .collect::<Result<_>>()?;
        if b.len() != 3 {
            return Err(Error::ModelFormat("bias needs 3 values".into()));
        }
        let mut weights = Vec::with_capacity(3 * dim);
        for c in 0..3 {
            let line = next("weight row")?;
            let row: Vec<f64> = if dim == 0 {
                Vec::new()
            } else {
                line.split(' ').map(|s| num(s, "weight")).collect::<Result<_>>()?
            };
            if row.len() != dim {
                return Err(Error::ModelFormat(format!("row {c} has {} values, expected {dim}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::ModelFormat(format!("row {c} has non-finite weights")));
            }
            weights.extend(row);
        }
        Ok(Self {
            dim,
            weights,
            bias: [b[0], b[1], b[2]],
            hyper,
        })
    }
}
