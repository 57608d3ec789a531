//! Run configuration: JSON files, presets and the run manifest.
//!
//! Every command resolves one fully-populated config struct (unknown keys
//! rejected), echoes it into `<out>/run_manifest.json` together with its
//! SHA-256 hash, and derives all randomness from the single `seed` field.

use doa_core::array_signal::NoiseConvention;
use doa_core::error::{DoaError, Result};
use doa_core::training::{config_hash, ConstraintMode, ConvolutionMode};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const OUT_ROOT_ENV: &str = "DOA_OUT_ROOT";

/// Resolves a possibly-relative output directory against `DOA_OUT_ROOT`.
pub fn resolve_out_dir(dir: &Path) -> PathBuf {
    if dir.is_absolute() {
        return dir.to_path_buf();
    }
    match std::env::var_os(OUT_ROOT_ENV) {
        Some(root) => PathBuf::from(root).join(dir),
        None => dir.to_path_buf(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Paper,
    Desk,
}

impl std::str::FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            other => Err(format!("unknown preset '{other}' (expected paper|desk)")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySpec {
    /// "ula" or "sla".
    pub kind: String,
    pub m: usize,
    /// Maximum element index; required for "sla".
    #[serde(default)]
    pub aperture: Option<usize>,
    /// Subsampling seed; required for "sla".
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ArraySpec {
    pub fn build(&self) -> Result<doa_core::array_signal::ArrayGeometry<f64>> {
        match self.kind.to_ascii_lowercase().as_str() {
            "ula" => doa_core::array_signal::make_ula(self.m),
            "sla" => {
                let aperture = self.aperture.ok_or_else(|| {
                    DoaError::Config("sla needs an 'aperture' field".into())
                })?;
                let seed = self
                    .seed
                    .ok_or_else(|| DoaError::Config("sla needs a 'seed' field".into()))?;
                doa_core::array_signal::make_sla(self.m, aperture, seed)
            }
            other => Err(DoaError::Config(format!("unknown array kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenDataConfig {
    pub array: ArraySpec,
    pub grid_size: usize,
    pub train_count: usize,
    pub val_count: usize,
    pub test_count_per_snr: usize,
    pub train_snr_db: f64,
    pub test_snr_db: Vec<f64>,
    pub k_min: usize,
    pub k_max: usize,
    pub train_min_sep: f64,
    pub test_min_sep: f64,
    #[serde(default)]
    pub noise_convention: NoiseConvention,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl GenDataConfig {
    pub fn preset(p: Preset, sla: bool) -> Self {
        let (m, n) = match p {
            Preset::Paper => (30usize, 256usize),
            Preset::Desk => (16, 64),
        };
        let array = if sla {
            ArraySpec {
                kind: "sla".into(),
                m,
                aperture: Some(2 * m),
                seed: Some(7),
            }
        } else {
            ArraySpec {
                kind: "ula".into(),
                m,
                aperture: None,
                seed: None,
            }
        };
        let (train_count, val_count, test_count) = match p {
            Preset::Paper => (100_000, 20_000, 1_000),
            Preset::Desk => (10_000, 2_000, 1_000),
        };
        Self {
            array,
            grid_size: n,
            train_count,
            val_count,
            test_count_per_snr: test_count,
            train_snr_db: 15.0,
            test_snr_db: (0..=7).map(|i| 5.0 * i as f64).collect(),
            k_min: 1,
            k_max: 8,
            train_min_sep: 1.0 / m as f64,
            test_min_sep: 1.0 / (3.0 * m as f64),
            noise_convention: NoiseConvention::SignalRelative,
            seed: 1,
            out_dir: PathBuf::from(match p {
                Preset::Paper => "data/paper",
                Preset::Desk => "data/desk",
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    pub kernel_scale: f64,
    #[serde(default)]
    pub mode: ConvolutionMode,
}

impl Default for LossSpec {
    fn default() -> Self {
        Self {
            kernel_scale: 0.5,
            mode: ConvolutionMode::Circular,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainCliConfig {
    pub train_data: PathBuf,
    pub val_data: PathBuf,
    pub kind: String,
    pub layers: usize,
    pub beta0: f64,
    pub rho0: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub validation_every: usize,
    #[serde(default)]
    pub constraint_mode: ConstraintMode,
    #[serde(default)]
    pub loss: LossSpec,
    pub seed: u64,
    #[serde(default)]
    pub resume_from: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl TrainCliConfig {
    pub fn preset(p: Preset) -> Self {
        let (layers, epochs, batch, lr) = match p {
            Preset::Paper => (30usize, 50usize, 2048usize, 1e-4),
            Preset::Desk => (10, 20, 256, 1e-3),
        };
        let data_dir = match p {
            Preset::Paper => "data/paper",
            Preset::Desk => "data/desk",
        };
        Self {
            train_data: PathBuf::from(format!("{data_dir}/train.doa")),
            val_data: PathBuf::from(format!("{data_dir}/val.doa")),
            kind: "chadmmnet".into(),
            layers,
            beta0: 0.1,
            rho0: 1.0,
            epochs,
            batch_size: batch,
            learning_rate: lr,
            validation_every: 1,
            constraint_mode: ConstraintMode::UpdateThenProject,
            loss: LossSpec::default(),
            seed: 0,
            resume_from: None,
            out_dir: PathBuf::from(match p {
                Preset::Paper => "runs/paper",
                Preset::Desk => "runs/desk",
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorSpec {
    Ista {
        iterations: usize,
        lambda: f64,
    },
    Admm {
        iterations: usize,
        lambda: f64,
        rho: f64,
    },
    FastCompactAdmm {
        iterations: usize,
        lambda: f64,
        rho: f64,
    },
    Network {
        checkpoint: PathBuf,
        #[serde(default)]
        label: Option<String>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchSpec {
    pub delta_bins: usize,
    pub amp_ratio: f64,
}

impl Default for MatchSpec {
    fn default() -> Self {
        Self {
            delta_bins: 2,
            amp_ratio: 0.4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalCliConfig {
    /// One dataset file per SNR level.
    pub test_data: Vec<PathBuf>,
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default)]
    pub match_config: MatchSpec,
    pub out_dir: PathBuf,
}

impl EvalCliConfig {
    pub fn preset(p: Preset) -> Self {
        let data_dir = match p {
            Preset::Paper => "data/paper",
            Preset::Desk => "data/desk",
        };
        Self {
            test_data: (0..=7)
                .map(|i| PathBuf::from(format!("{data_dir}/test_snr{}.doa", 5 * i)))
                .collect(),
            estimators: vec![
                EstimatorSpec::Ista {
                    iterations: 100,
                    lambda: 0.1,
                },
                EstimatorSpec::Admm {
                    iterations: 100,
                    lambda: 0.1,
                    rho: 1.0,
                },
            ],
            match_config: MatchSpec::default(),
            out_dir: PathBuf::from(match p {
                Preset::Paper => "evals/paper",
                Preset::Desk => "evals/desk",
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchCliConfig {
    pub m: usize,
    pub sizes: Vec<usize>,
    pub layers: usize,
    pub reps: usize,
    pub kinds: Vec<String>,
    pub out_dir: PathBuf,
}

impl BenchCliConfig {
    pub fn preset(p: Preset) -> Self {
        match p {
            Preset::Paper => Self {
                m: 30,
                sizes: vec![256, 512, 1024],
                layers: 10,
                reps: 50,
                kinds: vec!["admmnet".into(), "cadmmnet".into(), "chadmmnet".into()],
                out_dir: PathBuf::from("bench/paper"),
            },
            Preset::Desk => Self {
                m: 16,
                sizes: vec![64, 128],
                layers: 6,
                reps: 30,
                kinds: vec!["admmnet".into(), "cadmmnet".into()],
                out_dir: PathBuf::from("bench/desk"),
            },
        }
    }
}

/// Loads a config file, rejecting unknown keys.
pub fn load_config<C: for<'de> Deserialize<'de>>(path: &Path) -> Result<C> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| DoaError::Config(format!("{}: {e}", path.display())))
}

/// Writes `run_manifest.json` echoing the resolved config and its hash.
pub fn write_manifest<C: Serialize>(out_dir: &Path, command: &str, config: &C) -> Result<String> {
    let config_json = serde_json::to_string_pretty(config)
        .map_err(|e| DoaError::Format(format!("manifest: {e}")))?;
    let hash = config_hash(&config_json);
    let manifest = serde_json::json!({
        "command": command,
        "config_hash": hash,
        "config": serde_json::from_str::<serde_json::Value>(&config_json).unwrap(),
    });
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(
        out_dir.join("run_manifest.json"),
        serde_json::to_string_pretty(&manifest).unwrap(),
    )?;
    Ok(hash)
}
