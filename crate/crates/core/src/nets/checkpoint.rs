//! Network checkpoint format.
//!
//! Binary layout (little-endian):
//!
//! ```text
//! magic "DOAC" | version u32 | kind u8 | M u32 | N u32 | T u32 | gamma f64
//! per layer, arrays then scalars in the flatten order of the kind:
//!   complex arrays as interleaved (re f64, im f64); rho f64 (ADMM family);
//!   beta f64
//! final_beta f64
//! dictionary id: len u32 | utf-8 bytes
//! ```
//!
//! A JSON manifest at `<path>.json` records init provenance and the training
//! config hash. Writes are atomic (temp file then rename).

use super::{LayerParams, NetKind, Network};
use crate::array_signal::sidecar_path;
use crate::error::{DoaError, Result};
use crate::linalg::CMat;
use crate::scalar::{fl, Scalar, C};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"DOAC";
const VERSION: u32 = 1;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CheckpointMeta {
    pub format: String,
    pub kind: NetKind,
    pub m: usize,
    pub n: usize,
    pub layers: usize,
    pub gamma: f64,
    pub dictionary_id: String,
    pub init_provenance: String,
    pub train_config_hash: Option<String>,
}

impl CheckpointMeta {
    pub fn for_network<T: Scalar>(
        net: &Network<T>,
        init_provenance: &str,
        train_config_hash: Option<String>,
    ) -> Self {
        Self {
            format: "doa-checkpoint-v1".into(),
            kind: net.kind(),
            m: net.m(),
            n: net.n(),
            layers: net.depth(),
            gamma: net.gamma().to_f64().unwrap(),
            dictionary_id: net.dictionary_id().to_string(),
            init_provenance: init_provenance.to_string(),
            train_config_hash,
        }
    }
}

fn kind_tag(kind: NetKind) -> u8 {
    match kind {
        NetKind::Lista => 0,
        NetKind::Tlista => 1,
        NetKind::Thlista => 2,
        NetKind::AdmmNet => 3,
        NetKind::CadmmNet => 4,
        NetKind::ChadmmNet => 5,
    }
}

fn kind_from_tag(tag: u8) -> Result<NetKind> {
    Ok(match tag {
        0 => NetKind::Lista,
        1 => NetKind::Tlista,
        2 => NetKind::Thlista,
        3 => NetKind::AdmmNet,
        4 => NetKind::CadmmNet,
        5 => NetKind::ChadmmNet,
        t => return Err(DoaError::Format(format!("unknown kind tag {t}"))),
    })
}

fn write_cvec<W: Write, T: Scalar>(w: &mut W, v: &[C<T>]) -> Result<()> {
    for z in v {
        w.write_f64::<LittleEndian>(z.re.to_f64().unwrap())?;
        w.write_f64::<LittleEndian>(z.im.to_f64().unwrap())?;
    }
    Ok(())
}

fn read_cvec<R: Read, T: Scalar>(r: &mut R, len: usize) -> Result<Vec<C<T>>> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let re = r.read_f64::<LittleEndian>()?;
        let im = r.read_f64::<LittleEndian>()?;
        out.push(Complex::new(fl(re), fl(im)));
    }
    Ok(out)
}

/// Saves the network and its manifest.
pub fn save_checkpoint<T: Scalar>(
    path: &Path,
    net: &Network<T>,
    meta: &CheckpointMeta,
) -> Result<()> {
    let tmp = path.with_extension("ckpt.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u8(kind_tag(net.kind()))?;
        w.write_u32::<LittleEndian>(net.m() as u32)?;
        w.write_u32::<LittleEndian>(net.n() as u32)?;
        w.write_u32::<LittleEndian>(net.depth() as u32)?;
        w.write_f64::<LittleEndian>(net.gamma().to_f64().unwrap())?;
        for layer in net.layers() {
            match layer {
                LayerParams::Lista { w1, w2, beta } => {
                    write_cvec(&mut w, w1.data())?;
                    write_cvec(&mut w, w2.data())?;
                    w.write_f64::<LittleEndian>(beta.to_f64().unwrap())?;
                }
                LayerParams::Tlista { w1, w2, beta } | LayerParams::Thlista { w1, w2, beta } => {
                    write_cvec(&mut w, w1)?;
                    write_cvec(&mut w, w2.data())?;
                    w.write_f64::<LittleEndian>(beta.to_f64().unwrap())?;
                }
                LayerParams::AdmmNet { w: mat, rho, beta } => {
                    write_cvec(&mut w, mat.data())?;
                    w.write_f64::<LittleEndian>(rho.to_f64().unwrap())?;
                    w.write_f64::<LittleEndian>(beta.to_f64().unwrap())?;
                }
                LayerParams::CadmmNet { w: wv, rho, beta }
                | LayerParams::ChadmmNet { w: wv, rho, beta } => {
                    write_cvec(&mut w, wv)?;
                    w.write_f64::<LittleEndian>(rho.to_f64().unwrap())?;
                    w.write_f64::<LittleEndian>(beta.to_f64().unwrap())?;
                }
            }
        }
        w.write_f64::<LittleEndian>(net.final_beta().to_f64().unwrap())?;
        let id = net.dictionary_id().as_bytes();
        w.write_u32::<LittleEndian>(id.len() as u32)?;
        w.write_all(id)?;
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    let json = serde_json::to_string_pretty(meta)
        .map_err(|e| DoaError::Format(format!("manifest encode: {e}")))?;
    std::fs::write(sidecar_path(path), json)?;
    Ok(())
}

/// Loads a checkpoint saved by [`save_checkpoint`].
pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<Network<T>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(DoaError::Format("bad checkpoint magic".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(DoaError::Format(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let kind = kind_from_tag(r.read_u8()?)?;
    let m = r.read_u32::<LittleEndian>()? as usize;
    let n = r.read_u32::<LittleEndian>()? as usize;
    let t = r.read_u32::<LittleEndian>()? as usize;
    let gamma = r.read_f64::<LittleEndian>()?;

    let mut layers = Vec::with_capacity(t);
    for _ in 0..t {
        layers.push(match kind {
            NetKind::Lista => LayerParams::Lista {
                w1: CMat::from_rows(n, n, read_cvec(&mut r, n * n)?),
                w2: CMat::from_rows(n, m, read_cvec(&mut r, n * m)?),
                beta: fl(r.read_f64::<LittleEndian>()?),
            },
            NetKind::Tlista | NetKind::Thlista => {
                let w1 = read_cvec(&mut r, 2 * n - 1)?;
                let w2 = CMat::from_rows(n, m, read_cvec(&mut r, n * m)?);
                let beta = fl(r.read_f64::<LittleEndian>()?);
                if kind == NetKind::Tlista {
                    LayerParams::Tlista { w1, w2, beta }
                } else {
                    LayerParams::Thlista { w1, w2, beta }
                }
            }
            NetKind::AdmmNet => LayerParams::AdmmNet {
                w: CMat::from_rows(n, n, read_cvec(&mut r, n * n)?),
                rho: fl(r.read_f64::<LittleEndian>()?),
                beta: fl(r.read_f64::<LittleEndian>()?),
            },
            NetKind::CadmmNet | NetKind::ChadmmNet => {
                let w = read_cvec(&mut r, n)?;
                let rho = fl(r.read_f64::<LittleEndian>()?);
                let beta = fl(r.read_f64::<LittleEndian>()?);
                if kind == NetKind::CadmmNet {
                    LayerParams::CadmmNet { w, rho, beta }
                } else {
                    LayerParams::ChadmmNet { w, rho, beta }
                }
            }
        });
    }
    let final_beta = fl(r.read_f64::<LittleEndian>()?);
    let id_len = r.read_u32::<LittleEndian>()? as usize;
    let mut id_bytes = vec![0u8; id_len];
    r.read_exact(&mut id_bytes)?;
    let dictionary_id =
        String::from_utf8(id_bytes).map_err(|_| DoaError::Format("bad id encoding".into()))?;

    Ok(Network {
        kind,
        m,
        n,
        gamma: fl(gamma),
        layers,
        final_beta,
        dictionary_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_signal::{make_ula, Dictionary};

    #[test]
    fn roundtrip_is_bit_identical() {
        let dic = Dictionary::build(make_ula::<f64>(6).unwrap(), 24).unwrap();
        let dir = std::env::temp_dir().join("doa_ckpt_test");
        std::fs::create_dir_all(&dir).unwrap();
        for kind in NetKind::ALL {
            let net = Network::init(kind, &dic, 3, 0.1, 1.0).unwrap();
            let path = dir.join(format!("{kind}.ckpt"));
            let meta = CheckpointMeta::for_network(&net, "unit-test", None);
            save_checkpoint(&path, &net, &meta).unwrap();
            let back: Network<f64> = load_checkpoint(&path).unwrap();
            assert_eq!(back.kind(), kind);
            assert_eq!(back.depth(), 3);
            assert_eq!(back.flatten(), net.flatten(), "{kind}");
            assert_eq!(back.dictionary_id(), net.dictionary_id());
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn truncated_checkpoint_rejected() {
        let dir = std::env::temp_dir().join("doa_ckpt_bad");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("short.ckpt");
        std::fs::write(&path, b"DOAC\x01\x00\x00\x00").unwrap();
        assert!(load_checkpoint::<f64>(&path).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
