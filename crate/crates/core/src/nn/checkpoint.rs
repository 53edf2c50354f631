//! `ckpt/1` network checkpoints.
//!
//! Layout: an ASCII header of newline-terminated lines
//!
//! ```text
//! RRN-CKPT
//! format ckpt/1
//! mode residual
//! episodes 250
//! net actor sizes=21,256,256,2 dropout_p=0.2 hidden=relu output=tanh
//! net critic1 sizes=23,256,256,1 dropout_p=0 hidden=relu output=identity
//! end
//! ```
//!
//! followed by the parameters of every listed net, in header order, as
//! little-endian `f64`, row-major, weights then bias per layer.

use std::path::Path;

use super::{Mlp, OutputActivation};
use crate::env::ObsMode;
use crate::error::{usage_err, Error, Result};

pub const CHECKPOINT_MAGIC: &str = "RRN-CKPT";
pub const CHECKPOINT_VERSION: &str = "ckpt/1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub mode: ObsMode,
    /// Training episodes completed when the checkpoint was written.
    pub episodes: u64,
    pub nets: Vec<(String, Mlp)>,
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(format!("checkpoint: {}", msg.into()))
}

impl Checkpoint {
    pub fn new(mode: ObsMode, episodes: u64, nets: Vec<(String, Mlp)>) -> Self {
        Self { mode, episodes, nets }
    }

    pub fn net(&self, name: &str) -> Option<&Mlp> {
        self.nets.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn actor(&self) -> Result<&Mlp> {
        self.net("actor")
            .ok_or_else(|| usage_err("checkpoint contains no actor network"))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut header = format!(
            "{CHECKPOINT_MAGIC}\nformat {CHECKPOINT_VERSION}\nmode {}\nepisodes {}\n",
            self.mode.as_str(),
            self.episodes
        );
        for (name, net) in &self.nets {
            let sizes: Vec<String> = net.sizes().iter().map(|s| s.to_string()).collect();
            header.push_str(&format!(
                "net {name} sizes={} dropout_p={:?} hidden=relu output={}\n",
                sizes.join(","),
                net.dropout_p(),
                net.output_activation().tag()
            ));
        }
        header.push_str("end\n");
        let mut bytes = header.into_bytes();
        for (_, net) in &self.nets {
            for p in net.params() {
                bytes.extend_from_slice(&p.to_le_bytes());
            }
        }
        bytes
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let mut next_line = || -> Result<&str> {
            let rest = &bytes[pos..];
            let end = rest
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| format_err("truncated header"))?;
            pos += end + 1;
            std::str::from_utf8(&rest[..end]).map_err(|_| format_err("header is not ASCII"))
        };

        if next_line()? != CHECKPOINT_MAGIC {
            return Err(format_err("bad magic string"));
        }
        let version = next_line()?;
        if version != format!("format {CHECKPOINT_VERSION}") {
            return Err(format_err(format!("unsupported version line {version:?}")));
        }
        let mode = next_line()?
            .strip_prefix("mode ")
            .ok_or_else(|| format_err("missing mode line"))?
            .parse::<ObsMode>()
            .map_err(|e| format_err(e.to_string()))?;
        let episodes = next_line()?
            .strip_prefix("episodes ")
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| format_err("missing episodes line"))?;

        let mut specs = Vec::new();
        loop {
            let line = next_line()?;
            if line == "end" {
                break;
            }
            specs.push(parse_net_line(line)?);
        }

        let mut nets = Vec::with_capacity(specs.len());
        let mut offset = pos;
        for (name, sizes, dropout_p, output) in specs {
            let n = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum::<usize>();
            let end = offset + 8 * n;
            if end > bytes.len() {
                return Err(format_err(format!("parameters of net {name} are truncated")));
            }
            let params = bytes[offset..end]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect();
            offset = end;
            let net = Mlp::from_params(&sizes, output, dropout_p, params).map_err(|e| format_err(e.to_string()))?;
            nets.push((name, net));
        }
        if offset != bytes.len() {
            return Err(format_err(format!("{} trailing bytes", bytes.len() - offset)));
        }
        Ok(Self { mode, episodes, nets })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

fn parse_net_line(line: &str) -> Result<(String, Vec<usize>, f64, OutputActivation)> {
    let mut parts = line.split(' ');
    if parts.next() != Some("net") {
        return Err(format_err(format!("expected a net line, got {line:?}")));
    }
    let name = parts
        .next()
        .filter(|n| !n.is_empty())
        .ok_or_else(|| format_err("net line without a name"))?
        .to_string();
    let (mut sizes, mut dropout_p, mut output, mut hidden) = (None, None, None, None);
    for field in parts {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| format_err(format!("malformed field {field:?}")))?;
        match key {
            "sizes" => {
                sizes = Some(
                    value
                        .split(',')
                        .map(|s| s.parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| format_err(format!("bad sizes {value:?}")))?,
                )
            }
            "dropout_p" => dropout_p = value.parse::<f64>().ok(),
            "hidden" => hidden = Some(value.to_string()),
            "output" => output = OutputActivation::from_tag(value),
            other => return Err(format_err(format!("unknown net field {other:?}"))),
        }
    }
    if hidden.as_deref() != Some("relu") {
        return Err(format_err(format!("net {name}: only relu hidden layers are supported")));
    }
    Ok((
        name.clone(),
        sizes.ok_or_else(|| format_err(format!("net {name}: missing sizes")))?,
        dropout_p.ok_or_else(|| format_err(format!("net {name}: missing dropout_p")))?,
        output.ok_or_else(|| format_err(format!("net {name}: missing or unknown output activation")))?,
    ))
}
