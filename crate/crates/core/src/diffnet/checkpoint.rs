//! Binary parameter checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! | bytes | field                                  |
//! |-------|----------------------------------------|
//! | 4     | magic `WPNN`                           |
//! | 4     | format version (u32, currently 1)      |
//! | 4×4   | input_dim, output_dim, hidden_layers, hidden_width (u32) |
//! | 8×2   | omega0, omega_hidden (f64)             |
//! | 1     | init scheme (0 = xavier, 1 = siren)    |
//! | 8     | seed (u64)                             |
//! | 8     | parameter count (u64)                  |
//! | 8×n   | parameters (f64)                       |

use std::io::{Read, Write};

use super::mlp::{InitScheme, MlpConfig, ParamVector};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"WPNN";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn save_checkpoint<W: Write>(mut w: W, cfg: &MlpConfig, params: &ParamVector) -> Result<()> {
    if params.len() != cfg.param_count() {
        return Err(Error::ShapeMismatch { expected: cfg.param_count(), got: params.len() });
    }
    let mut buf = Vec::with_capacity(64 + 8 * params.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    for d in [cfg.input_dim, cfg.output_dim, cfg.hidden_layers, cfg.hidden_width] {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    buf.extend_from_slice(&cfg.omega0.to_le_bytes());
    buf.extend_from_slice(&cfg.omega_hidden.to_le_bytes());
    buf.push(match cfg.init {
        InitScheme::Xavier => 0,
        InitScheme::Siren => 1,
    });
    buf.extend_from_slice(&cfg.seed.to_le_bytes());
    buf.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for v in &params.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn load_checkpoint<R: Read>(mut r: R) -> Result<(MlpConfig, ParamVector)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };
    if cur.take(4)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = cur.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let input_dim = cur.u32()? as usize;
    let output_dim = cur.u32()? as usize;
    let hidden_layers = cur.u32()? as usize;
    let hidden_width = cur.u32()? as usize;
    let omega0 = cur.f64()?;
    let omega_hidden = cur.f64()?;
    let init = match cur.take(1)?[0] {
        0 => InitScheme::Xavier,
        1 => InitScheme::Siren,
        other => return Err(Error::Checkpoint(format!("unknown init scheme tag {other}"))),
    };
    let seed = cur.u64()?;
    let cfg = MlpConfig { input_dim, output_dim, hidden_layers, hidden_width, omega0, omega_hidden, init, seed };
    cfg.validate()?;
    let n = cur.u64()? as usize;
    if n != cfg.param_count() {
        return Err(Error::Checkpoint(format!(
            "parameter count {n} does not match topology ({})",
            cfg.param_count()
        )));
    }
    let mut params = ParamVector::zeros(&cfg);
    for v in &mut params.data {
        *v = cur.f64()?;
    }
    if cur.pos != bytes.len() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    Ok((cfg, params))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Checkpoint("truncated file".into()));
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffnet::mlp::init_params;

    #[test]
    fn round_trip_is_exact() {
        let cfg = MlpConfig { hidden_layers: 2, hidden_width: 5, init: InitScheme::Siren, ..MlpConfig::default() };
        let p = init_params(&cfg).unwrap();
        let mut buf = Vec::new();
        save_checkpoint(&mut buf, &cfg, &p).unwrap();
        assert_eq!(&buf[..4], b"WPNN");
        assert_eq!(buf.len(), 4 + 4 + 16 + 16 + 1 + 8 + 8 + 8 * p.len());
        let (cfg2, p2) = load_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(p, p2);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let cfg = MlpConfig { hidden_layers: 1, hidden_width: 2, ..MlpConfig::default() };
        let p = init_params(&cfg).unwrap();
        let mut buf = Vec::new();
        save_checkpoint(&mut buf, &cfg, &p).unwrap();
        assert!(load_checkpoint(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(load_checkpoint(bad.as_slice()).is_err());
        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(load_checkpoint(bad.as_slice()).is_err());
        let mut long = buf;
        long.push(0);
        assert!(load_checkpoint(long.as_slice()).is_err());
    }
}
