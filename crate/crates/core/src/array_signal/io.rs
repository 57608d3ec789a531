//! Binary dataset container with a JSON sidecar manifest.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic "DOAD" | version u32 | M u32 | N u32 | gamma f64 | kind u8
//! positions: M x u64
//! grid: N x f64
//! then per sample: K u32 | K x f64 true freqs | K x (re f64, im f64)
//!                  amplitudes | M x (re f64, im f64) measurement
//! ```
//!
//! The record count, the SNR schedule and the generator seed live in the
//! manifest at `<path>.json`. Samples are stored level-major for sweep
//! schedules, so the per-sample SNR is recovered from the index.

use super::scene::{DatasetSpec, GroundTruthScene, Sample};
use super::{ArrayGeometry, ArrayKind, Dictionary};
use crate::error::{DoaError, Result};
use crate::scalar::{c_zero, fl, norm_sq, Scalar, C};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 4] = b"DOAD";
const VERSION: u32 = 1;

/// Human-readable provenance stored next to the binary container.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub spec: DatasetSpec,
    pub m: usize,
    pub n: usize,
    pub gamma: f64,
    pub kind: ArrayKind,
    pub total_count: usize,
}

impl DatasetManifest {
    pub fn new<T: Scalar>(dic: &Dictionary<T>, spec: &DatasetSpec, total_count: usize) -> Self {
        Self {
            format: "doa-dataset-v1".into(),
            spec: spec.clone(),
            m: dic.m(),
            n: dic.n(),
            gamma: dic.gamma().to_f64().unwrap(),
            kind: dic.geometry().kind(),
            total_count,
        }
    }
}

/// Path of the JSON manifest belonging to a dataset file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".json");
    PathBuf::from(os)
}

fn write_complex<W: Write, T: Scalar>(w: &mut W, z: &C<T>) -> Result<()> {
    w.write_f64::<LittleEndian>(z.re.to_f64().unwrap())?;
    w.write_f64::<LittleEndian>(z.im.to_f64().unwrap())?;
    Ok(())
}

fn read_complex<R: Read, T: Scalar>(r: &mut R) -> Result<C<T>> {
    let re = r.read_f64::<LittleEndian>()?;
    let im = r.read_f64::<LittleEndian>()?;
    Ok(Complex::new(fl(re), fl(im)))
}

/// Writes samples plus manifest; the data file is written atomically.
pub fn write_dataset<T: Scalar>(
    path: &Path,
    dic: &Dictionary<T>,
    samples: &[Sample<T>],
    manifest: &DatasetManifest,
) -> Result<()> {
    if manifest.total_count != samples.len() {
        return Err(DoaError::Format(format!(
            "manifest count {} != sample count {}",
            manifest.total_count,
            samples.len()
        )));
    }
    let expected = manifest.spec.count * manifest.spec.snr.levels().len();
    if expected != samples.len() {
        return Err(DoaError::Format(format!(
            "spec implies {expected} samples, got {}",
            samples.len()
        )));
    }

    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u32::<LittleEndian>(dic.m() as u32)?;
        w.write_u32::<LittleEndian>(dic.n() as u32)?;
        w.write_f64::<LittleEndian>(dic.gamma().to_f64().unwrap())?;
        w.write_u8(match dic.geometry().kind() {
            ArrayKind::Ula => 0,
            ArrayKind::Sla => 1,
        })?;
        for &p in dic.geometry().positions() {
            w.write_u64::<LittleEndian>(p as u64)?;
        }
        for &g in dic.grid() {
            w.write_f64::<LittleEndian>(g.to_f64().unwrap())?;
        }
        for s in samples {
            if s.measurement.len() != dic.m() {
                return Err(DoaError::DimensionMismatch(
                    "sample measurement length != M".into(),
                ));
            }
            w.write_u32::<LittleEndian>(s.scene.k_targets as u32)?;
            for &f in &s.scene.true_freqs {
                w.write_f64::<LittleEndian>(f.to_f64().unwrap())?;
            }
            for a in &s.scene.amplitudes {
                write_complex(&mut w, a)?;
            }
            for y in &s.measurement {
                write_complex(&mut w, y)?;
            }
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| DoaError::Format(format!("manifest encode: {e}")))?;
    std::fs::write(sidecar_path(path), json)?;
    Ok(())
}

/// Loads a dataset, rebuilding the dictionary from the stored geometry.
pub fn load_dataset<T: Scalar>(
    path: &Path,
) -> Result<(Dictionary<T>, Vec<Sample<T>>, DatasetManifest)> {
    let manifest: DatasetManifest = {
        let text = std::fs::read_to_string(sidecar_path(path))?;
        serde_json::from_str(&text).map_err(|e| DoaError::Format(format!("manifest: {e}")))?
    };

    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(DoaError::Format("bad magic".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(DoaError::Format(format!("unsupported version {version}")));
    }
    let m = r.read_u32::<LittleEndian>()? as usize;
    let n = r.read_u32::<LittleEndian>()? as usize;
    let gamma = r.read_f64::<LittleEndian>()?;
    let kind = match r.read_u8()? {
        0 => ArrayKind::Ula,
        1 => ArrayKind::Sla,
        k => return Err(DoaError::Format(format!("unknown array kind {k}"))),
    };
    let mut positions = Vec::with_capacity(m);
    for _ in 0..m {
        positions.push(r.read_u64::<LittleEndian>()? as usize);
    }
    let geom = ArrayGeometry::new(positions, fl::<T>(gamma), kind)?;
    let dic = Dictionary::build(geom, n)?;
    for i in 0..n {
        let g = r.read_f64::<LittleEndian>()?;
        if (g - dic.grid()[i].to_f64().unwrap()).abs() > 1e-12 {
            return Err(DoaError::Format(format!("grid mismatch at bin {i}")));
        }
    }

    let levels = manifest.spec.snr.levels();
    if manifest.total_count != manifest.spec.count * levels.len() {
        return Err(DoaError::Format("manifest count inconsistent".into()));
    }
    let mut samples = Vec::with_capacity(manifest.total_count);
    for idx in 0..manifest.total_count {
        let k = r.read_u32::<LittleEndian>()? as usize;
        let mut true_freqs = Vec::with_capacity(k);
        for _ in 0..k {
            true_freqs.push(fl::<T>(r.read_f64::<LittleEndian>()?));
        }
        let mut amplitudes = Vec::with_capacity(k);
        for _ in 0..k {
            amplitudes.push(read_complex::<_, T>(&mut r)?);
        }
        let mut measurement = Vec::with_capacity(m);
        for _ in 0..m {
            measurement.push(read_complex::<_, T>(&mut r)?);
        }
        let grid_indices: Vec<usize> = true_freqs.iter().map(|&f| dic.nearest_bin(f)).collect();
        let mut sparse_x = vec![c_zero(); n];
        for (&b, &a) in grid_indices.iter().zip(&amplitudes) {
            sparse_x[b] = a;
        }
        let snr_db = fl::<T>(levels[idx / manifest.spec.count]);
        let noise_sigma_sq = if snr_db == T::infinity() {
            T::zero()
        } else {
            // Same formula the generator used; the signal is recomputable.
            let mut signal = vec![c_zero(); m];
            for (&f, &a) in true_freqs.iter().zip(&amplitudes) {
                let sv = super::steering_vector(dic.geometry(), f)?;
                for (s, v) in signal.iter_mut().zip(&sv) {
                    *s += v * a;
                }
            }
            fl::<T>(10.0).powf(-snr_db / fl(10.0)) * norm_sq(&signal)
        };
        samples.push(Sample {
            measurement,
            scene: GroundTruthScene {
                k_targets: k,
                true_freqs,
                grid_indices,
                amplitudes,
                sparse_x,
            },
            snr_db,
            noise_sigma_sq,
        });
    }
    Ok((dic, samples, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_signal::scene::{generate_dataset, NoiseConvention, SnrSpec};
    use crate::array_signal::make_sla;

    #[test]
    fn roundtrip_preserves_bits() {
        let dic =
            Dictionary::build(make_sla::<f64>(8, 20, 3).unwrap(), 48).unwrap();
        let spec = DatasetSpec {
            count: 10,
            k_min: 1,
            k_max: 3,
            min_sep: 1.0 / 8.0,
            snr: SnrSpec::SweepDb(vec![5.0, 25.0]),
            noise_convention: NoiseConvention::SignalRelative,
            seed: 21,
        };
        let samples = generate_dataset(&dic, &spec).unwrap();
        let dir = std::env::temp_dir().join("doa_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.doa");
        let manifest = DatasetManifest::new(&dic, &spec, samples.len());
        write_dataset(&path, &dic, &samples, &manifest).unwrap();

        let (dic2, loaded, man2) = load_dataset::<f64>(&path).unwrap();
        assert_eq!(dic2.m(), dic.m());
        assert_eq!(dic2.n(), dic.n());
        assert_eq!(man2.total_count, 20);
        for (a, b) in samples.iter().zip(&loaded) {
            assert_eq!(a.measurement, b.measurement);
            assert_eq!(a.scene.true_freqs, b.scene.true_freqs);
            assert_eq!(a.scene.amplitudes, b.scene.amplitudes);
            assert_eq!(a.scene.grid_indices, b.scene.grid_indices);
            assert_eq!(a.snr_db, b.snr_db);
            assert!((a.noise_sigma_sq - b.noise_sigma_sq).abs() < 1e-15);
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn bad_magic_rejected() {
        let dir = std::env::temp_dir().join("doa_io_bad");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("junk.doa");
        std::fs::write(&path, b"NOPE").unwrap();
        std::fs::write(sidecar_path(&path), "{}").unwrap();
        assert!(load_dataset::<f64>(&path).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
