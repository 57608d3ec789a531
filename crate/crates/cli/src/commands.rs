//! The five subcommands.

use crate::config::*;
use doa_core::array_signal::{
    derive_seed, generate_dataset, load_dataset, write_dataset, DatasetManifest, DatasetSpec,
    Dictionary, Sample, SnrSpec,
};
use doa_core::error::{DoaError, Result};
use doa_core::evaluation::{
    estimators::*, snr_sweep, write_sweep_csv, write_sweep_json, Estimator, MatchConfig,
};
use doa_core::nets::{load_checkpoint, NetKind, Network};
use doa_core::solvers::SolverConfig;
use doa_core::training::{train, LossConfig, TrainConfig};
use std::path::Path;
use std::time::Instant;

pub fn cmd_gen_data(cfg: &GenDataConfig) -> Result<()> {
    let out_dir = resolve_out_dir(&cfg.out_dir);
    write_manifest(&out_dir, "gen-data", cfg)?;
    let geom = cfg.array.build()?;
    let dic = Dictionary::build(geom, cfg.grid_size)?;

    let write_split = |name: &str, spec: &DatasetSpec| -> Result<usize> {
        let samples = generate_dataset(&dic, spec)?;
        let manifest = DatasetManifest::new(&dic, spec, samples.len());
        write_dataset(&out_dir.join(name), &dic, &samples, &manifest)?;
        Ok(samples.len())
    };

    let train_spec = DatasetSpec {
        count: cfg.train_count,
        k_min: cfg.k_min,
        k_max: cfg.k_max,
        min_sep: cfg.train_min_sep,
        snr: SnrSpec::FixedDb(cfg.train_snr_db),
        noise_convention: cfg.noise_convention,
        seed: derive_seed(cfg.seed, 0, 0x01),
    };
    let n_train = write_split("train.doa", &train_spec)?;

    let val_spec = DatasetSpec {
        count: cfg.val_count,
        seed: derive_seed(cfg.seed, 1, 0x01),
        ..train_spec.clone()
    };
    let n_val = write_split("val.doa", &val_spec)?;

    let mut n_test = 0usize;
    for (i, &snr) in cfg.test_snr_db.iter().enumerate() {
        let test_spec = DatasetSpec {
            count: cfg.test_count_per_snr,
            k_min: cfg.k_min,
            k_max: cfg.k_max,
            min_sep: cfg.test_min_sep,
            snr: SnrSpec::FixedDb(snr),
            noise_convention: cfg.noise_convention,
            seed: derive_seed(cfg.seed, 2 + i as u64, 0x01),
        };
        n_test += write_split(&format!("test_snr{snr}.doa"), &test_spec)?;
    }
    println!(
        "wrote {} train / {} val / {} test samples (M={}, N={}) to {}",
        n_train,
        n_val,
        n_test,
        dic.m(),
        dic.n(),
        out_dir.display()
    );
    Ok(())
}

pub fn cmd_train(cfg: &TrainCliConfig) -> Result<()> {
    let out_dir = resolve_out_dir(&cfg.out_dir);
    write_manifest(&out_dir, "train", cfg)?;
    let kind = NetKind::parse(&cfg.kind)?;
    let (dic, train_set, _) = load_dataset::<f64>(&resolve_out_dir(&cfg.train_data))?;
    let (val_dic, val_set, _) = load_dataset::<f64>(&resolve_out_dir(&cfg.val_data))?;
    if val_dic.id() != dic.id() {
        return Err(DoaError::DimensionMismatch(
            "train and validation sets use different dictionaries".into(),
        ));
    }

    let net = match &cfg.resume_from {
        Some(path) => {
            let net: Network<f64> = load_checkpoint(&resolve_out_dir(path))?;
            if net.kind() != kind || net.m() != dic.m() || net.n() != dic.n() {
                return Err(DoaError::DimensionMismatch(
                    "checkpoint does not match the requested kind/dims".into(),
                ));
            }
            net
        }
        None => Network::init(kind, &dic, cfg.layers, cfg.beta0, cfg.rho0)?,
    };

    let train_cfg = TrainConfig {
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        learning_rate: cfg.learning_rate,
        seed: cfg.seed,
        validation_every: cfg.validation_every,
        checkpoint_dir: Some(out_dir.clone()),
        constraint_mode: cfg.constraint_mode,
    };
    let loss_cfg = LossConfig {
        kernel_scale: cfg.loss.kernel_scale,
        mode: cfg.loss.mode,
    };
    let outcome = train(net, &dic, &train_set, &val_set, &train_cfg, &loss_cfg)?;
    println!(
        "trained {} for {} epochs: val {:.6} at epoch 0 -> best {:.6} at epoch {} ({} skipped steps)",
        kind,
        cfg.epochs,
        outcome.history[0].val_loss,
        outcome.best_val_loss,
        outcome.best_epoch,
        outcome.skipped_steps
    );
    println!(
        "checkpoints and history in {} (best.ckpt, final.ckpt, history.csv)",
        out_dir.display()
    );
    Ok(())
}

pub fn cmd_eval(cfg: &EvalCliConfig) -> Result<()> {
    if cfg.estimators.is_empty() {
        return Err(DoaError::Config("empty estimator list".into()));
    }
    let out_dir = resolve_out_dir(&cfg.out_dir);
    let hash = write_manifest(&out_dir, "eval", cfg)?;

    let mut test_sets: Vec<(f64, Vec<Sample<f64>>)> = Vec::new();
    let mut dic: Option<Dictionary<f64>> = None;
    for path in &cfg.test_data {
        let (d, samples, manifest) = load_dataset::<f64>(&resolve_out_dir(path))?;
        let snr = match &manifest.spec.snr {
            SnrSpec::FixedDb(db) => *db,
            SnrSpec::Noiseless => f64::INFINITY,
            SnrSpec::SweepDb(_) => {
                return Err(DoaError::Config(format!(
                    "{}: per-SNR eval expects fixed-SNR files",
                    path.display()
                )))
            }
        };
        match &dic {
            None => dic = Some(d),
            Some(existing) => {
                if existing.id() != d.id() {
                    return Err(DoaError::DimensionMismatch(
                        "test sets use different dictionaries".into(),
                    ));
                }
            }
        }
        test_sets.push((snr, samples));
    }
    let dic = dic.ok_or_else(|| DoaError::Config("no test data given".into()))?;
    test_sets.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Networks are loaded first so the estimator list can borrow them.
    let mut nets: Vec<(String, Network<f64>)> = Vec::new();
    for spec in &cfg.estimators {
        if let EstimatorSpec::Network { checkpoint, label } = spec {
            let net: Network<f64> = load_checkpoint(&resolve_out_dir(checkpoint))?;
            if net.m() != dic.m() || net.n() != dic.n() {
                return Err(DoaError::DimensionMismatch(format!(
                    "{}: checkpoint dims do not match the test data",
                    checkpoint.display()
                )));
            }
            let label = label.clone().unwrap_or_else(|| {
                format!("{}_{}", net.kind(), checkpoint.file_stem().unwrap().to_string_lossy())
            });
            nets.push((label, net));
        }
    }

    enum Built<'a> {
        Ista(IstaEstimator<f64>),
        Admm(AdmmEstimator<f64>),
        Fast(FastCompactAdmmEstimator<f64>),
        Net(NetworkEstimator<'a, f64>),
    }
    let mut built: Vec<Built> = Vec::new();
    let mut net_iter = nets.iter();
    for spec in &cfg.estimators {
        built.push(match spec {
            EstimatorSpec::Ista { iterations, lambda } => Built::Ista(IstaEstimator {
                cfg: SolverConfig::for_dictionary(&dic, *lambda, 1.0, *iterations),
            }),
            EstimatorSpec::Admm {
                iterations,
                lambda,
                rho,
            } => Built::Admm(AdmmEstimator {
                cfg: SolverConfig::for_dictionary(&dic, *lambda, *rho, *iterations),
            }),
            EstimatorSpec::FastCompactAdmm {
                iterations,
                lambda,
                rho,
            } => Built::Fast(FastCompactAdmmEstimator {
                cfg: SolverConfig::for_dictionary(&dic, *lambda, *rho, *iterations),
            }),
            EstimatorSpec::Network { .. } => {
                let (label, net) = net_iter.next().unwrap();
                Built::Net(NetworkEstimator::new(label.clone(), net)?)
            }
        });
    }
    let est_refs: Vec<&dyn Estimator<f64>> = built
        .iter()
        .map(|b| match b {
            Built::Ista(e) => e as &dyn Estimator<f64>,
            Built::Admm(e) => e as &dyn Estimator<f64>,
            Built::Fast(e) => e as &dyn Estimator<f64>,
            Built::Net(e) => e as &dyn Estimator<f64>,
        })
        .collect();

    let match_cfg = MatchConfig {
        delta_bins: cfg.match_config.delta_bins,
        amp_ratio: cfg.match_config.amp_ratio,
    };
    let reports = snr_sweep(&dic, &est_refs, &test_sets, &match_cfg, &hash)?;
    write_sweep_csv(&out_dir.join("sweep.csv"), &reports)?;
    write_sweep_json(&out_dir.join("sweep.json"), &reports)?;
    for rep in &reports {
        for row in &rep.rows {
            println!(
                "{:24} snr {:5.1} dB: P_d {:.3}  RMSE {:7.3} deg  NMSE {:.4}  ({} vectors, {} detected)",
                rep.estimator, row.snr_db, row.p_d, row.rmse_deg, row.nmse, row.n_vectors,
                row.n_detected
            );
        }
    }
    println!("sweep written to {}", out_dir.display());
    Ok(())
}

pub fn cmd_verify(seed: u64) -> Result<bool> {
    let checks = doa_core::verify::run_all(seed)?;
    let mut all = true;
    for c in &checks {
        println!(
            "[{}] {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        all &= c.passed;
    }
    Ok(all)
}

pub fn cmd_bench(cfg: &BenchCliConfig) -> Result<()> {
    let out_dir = resolve_out_dir(&cfg.out_dir);
    write_manifest(&out_dir, "bench", cfg)?;
    let mut csv = String::from("kind,n,per_layer_us\n");
    for kind_name in &cfg.kinds {
        let kind = NetKind::parse(kind_name)?;
        for &n in &cfg.sizes {
            let dic = Dictionary::build(doa_core::array_signal::make_ula::<f64>(cfg.m)?, n)?;
            let us = per_layer_micros(&dic, kind, cfg.layers, cfg.reps)?;
            println!("{kind:10} N={n:5}: {us:10.2} us/layer");
            csv.push_str(&format!("{kind},{n},{us}\n"));
        }
    }
    std::fs::write(out_dir.join("bench.csv"), csv)?;
    println!("timings written to {}", out_dir.display());
    Ok(())
}

/// Mean per-layer forward wall time over `reps` runs with a compiled
/// network (factorizations and plans excluded, solves included).
pub fn per_layer_micros(
    dic: &Dictionary<f64>,
    kind: NetKind,
    layers: usize,
    reps: usize,
) -> Result<f64> {
    let net = Network::init(kind, dic, layers, 0.1, 1.0)?;
    let compiled = net.compile()?;
    let scene = doa_core::array_signal::draw_scene(dic, 2..=4, 1.0 / dic.m() as f64, 11)?;
    let y = doa_core::array_signal::synthesize_measurement(dic, &scene, 15.0, 12)?.measurement;
    for _ in 0..3 {
        let _ = compiled.forward_output(dic, &y)?;
    }
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(compiled.forward_output(dic, std::hint::black_box(&y))?);
    }
    let total = start.elapsed().as_secs_f64();
    Ok(total * 1e6 / (reps as f64 * layers as f64))
}

/// Maps an error to the documented exit code: 2 config, 3 io, 4 numerical.
pub fn exit_code(err: &DoaError) -> i32 {
    match err {
        DoaError::Config(_)
        | DoaError::Format(_)
        | DoaError::DimensionMismatch(_)
        | DoaError::InvalidGeometry(_)
        | DoaError::GridTooSmall(_)
        | DoaError::InvalidScene(_)
        | DoaError::Aliasing { .. }
        | DoaError::UndefinedLoss(_) => 2,
        DoaError::Io(_) => 3,
        DoaError::Divergence(_)
        | DoaError::Numerical(_)
        | DoaError::NearSingularLayer(_)
        | DoaError::StructureViolation(_)
        | DoaError::SamplingFailure(_) => 4,
    }
}

/// `path` must exist and be a directory the command can write into.
pub fn ensure_parent_exists(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() && !parent.exists() {
            return Err(DoaError::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("missing directory {}", parent.display()),
            )));
        }
    }
    Ok(())
}
