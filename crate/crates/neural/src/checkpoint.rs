//! Text checkpoint: a header with the config as JSON, then one block per
//! parameter tensor in layer order, then the batchnorm inference statistics.

use std::io::{BufRead, Write};

use crate::config::NetConfig;
use crate::net::Network;
use crate::{Error, Result};

const MAGIC: &str = "hatewatch-cnn-bilstm v1";

fn floats(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ")
}

fn parse_floats(line: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = if line.is_empty() {
        Vec::new()
    } else {
        line.split(' ')
            .map(|s| s.parse::<f64>().map_err(|_| Error::Checkpoint(format!("bad number {s:?} in {what}"))))
            .collect::<Result<_>>()?
    };
    if v.len() != expected {
        return Err(Error::Checkpoint(format!("{what}: {} values, expected {expected}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Checkpoint(format!("{what}: non-finite value")));
    }
    Ok(v)
}

impl Network {
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "config {}", serde_json::to_string(&self.config).expect("config serializes"))?;
        for (name, t) in self.names.iter().zip(&self.params) {
            let shape: Vec<String> = t.shape.iter().map(usize::to_string).collect();
            writeln!(w, "param {name} {}", shape.join("x"))?;
            writeln!(w, "{}", floats(&t.values))?;
        }
        for (b, (m, v)) in self.bn_mean.iter().zip(&self.bn_var).enumerate() {
            writeln!(w, "bn {b}")?;
            writeln!(w, "{}", floats(m))?;
            writeln!(w, "{}", floats(v))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_checkpoint<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Checkpoint(format!("truncated before {what}")))?
                .map_err(Error::from)
        };
        if next("header")? != MAGIC {
            return Err(Error::Checkpoint("bad header".into()));
        }
        let cfg_line = next("config")?;
        let json = cfg_line
            .strip_prefix("config ")
            .ok_or_else(|| Error::Checkpoint("missing config line".into()))?;
        let config: NetConfig = serde_json::from_str(json).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let mut net = Network::new(config)?;
        for i in 0..net.params.len() {
            let head = next("parameter header")?;
            let shape: Vec<String> = net.params[i].shape.iter().map(usize::to_string).collect();
            let want = format!("param {} {}", net.names[i], shape.join("x"));
            if head != want {
                return Err(Error::Checkpoint(format!("expected {want:?}, found {head:?}")));
            }
            let n = net.params[i].len();
            net.params[i].values = parse_floats(&next(&net.names[i])?, n, &net.names[i])?;
        }
        let f = net.config.filters;
        for b in 0..net.bn_mean.len() {
            if next("batchnorm header")? != format!("bn {b}") {
                return Err(Error::Checkpoint(format!("missing batchnorm block {b}")));
            }
            net.bn_mean[b] = parse_floats(&next("bn mean")?, f, "bn mean")?;
            net.bn_var[b] = parse_floats(&next("bn var")?, f, "bn var")?;
        }
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_round_trip() {
        let cfg = NetConfig { vocab_size: 20, embed_dim: 4, filters: 3, hidden: 2, dense: 5, lstm: [true, false], ..NetConfig::default() };
        let mut net = Network::new(cfg).unwrap();
        net.bn_mean[0][1] = 0.1234567890123;
        let mut buf = Vec::new();
        net.write_checkpoint(&mut buf).unwrap();
        let back = Network::read_checkpoint(&buf[..]).unwrap();
        assert_eq!(back.params, net.params);
        assert_eq!(back.bn_mean, net.bn_mean);
        assert_eq!(back.forward(&[1, 2, 3]).unwrap(), net.forward(&[1, 2, 3]).unwrap());
    }

    #[test]
    fn rejects_truncation() {
        let net = Network::new(NetConfig { vocab_size: 10, embed_dim: 2, filters: 2, hidden: 2, dense: 2, ..NetConfig::default() }).unwrap();
        let mut buf = Vec::new();
        net.write_checkpoint(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: Vec<&str> = text.lines().collect();
        let cut = cut[..cut.len() - 3].join("\n");
        assert!(Network::read_checkpoint(cut.as_bytes()).is_err());
    }
}
