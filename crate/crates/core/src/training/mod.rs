//! Training: complex-aware Adam, the epoch loop, and gradient verification.
//!
//! Complex parameters are optimized as independent real/imaginary parts
//! through [`Network::flatten`]. After every optimizer step the structural
//! constraints are re-applied (non-negative thresholds, positive `rho`, the
//! Hermitian-circulant and Hermitian-Toeplitz ties), so constrained kinds
//! stay feasible throughout training.

mod backward;
pub mod loss;

pub use backward::backward;
pub use loss::{ConvolutionMode, LossConfig, SmoothedLoss};

use crate::array_signal::{derive_seed, Dictionary, Sample};
use crate::error::{DoaError, Result};
use crate::nets::{save_checkpoint, CheckpointMeta, CompiledNet, Network};
use crate::scalar::{fl, Scalar};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::time::Instant;

/// Fixed work-unit size for data-parallel reductions; results are summed in
/// chunk order, so they do not depend on the worker count.
const GRAD_CHUNK: usize = 64;

/// First/second-moment state of Adam over the flattened real parameters.
#[derive(Debug, Clone)]
pub struct AdamState<T: Scalar> {
    first: Vec<T>,
    second: Vec<T>,
    step_count: u64,
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    /// Steps dropped because a gradient was non-finite.
    pub skipped_steps: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(num_params: usize, learning_rate: T) -> Self {
        Self {
            first: vec![T::zero(); num_params],
            second: vec![T::zero(); num_params],
            step_count: 0,
            learning_rate,
            beta1: fl(0.9),
            beta2: fl(0.999),
            epsilon: fl(1e-8),
            skipped_steps: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One bias-corrected Adam update. Non-finite gradients skip the step
    /// and bump [`AdamState::skipped_steps`].
    pub fn step(&mut self, params: &mut [T], grads: &[T]) {
        assert_eq!(params.len(), self.first.len());
        assert_eq!(grads.len(), self.first.len());
        if grads.iter().any(|g| !g.is_finite()) {
            self.skipped_steps += 1;
            return;
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = T::one() - self.beta1.powi(t);
        let bc2 = T::one() - self.beta2.powi(t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first.iter_mut().zip(self.second.iter_mut()))
        {
            *m = self.beta1 * *m + (T::one() - self.beta1) * *g;
            *v = self.beta2 * *v + (T::one() - self.beta2) * *g * *g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p = *p - self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// How tied parameters interact with the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// Update all raw entries, then re-project onto the constraint set.
    #[default]
    UpdateThenProject,
    /// Fold tied-entry gradients into their free counterparts before the
    /// update (projection still runs afterwards; it is then a no-op up to
    /// the optimizer's view of the tied slots).
    AccumulateThenUpdate,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Validate every this many epochs.
    pub validation_every: usize,
    /// When set, best/final checkpoints and `history.csv` land here.
    pub checkpoint_dir: Option<PathBuf>,
    #[serde(default)]
    pub constraint_mode: ConstraintMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 2048,
            learning_rate: 1e-4,
            seed: 0,
            validation_every: 1,
            checkpoint_dir: None,
            constraint_mode: ConstraintMode::UpdateThenProject,
        }
    }
}

/// One row of the training history. `val_loss` is NaN on epochs that were
/// not validated; the epoch-0 row holds the pre-training validation loss.
#[derive(Debug, Clone, Copy)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub wall_seconds: f64,
}

#[derive(Debug)]
pub struct TrainOutcome<T: Scalar> {
    pub final_net: Network<T>,
    pub best_net: Network<T>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub history: Vec<EpochRecord>,
    pub skipped_steps: u64,
}

/// SHA-256 hex digest of a config string, for run manifests.
pub fn config_hash(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Mean loss plus summed gradients over one batch. Samples with zero ground
/// truth are skipped. Deterministic for a fixed [`GRAD_CHUNK`].
fn batch_gradient<T: Scalar>(
    compiled: &CompiledNet<'_, T>,
    dic: &Dictionary<T>,
    batch: &[Sample<T>],
    loss: &SmoothedLoss<T>,
) -> Result<(Network<T>, T, usize)> {
    let chunks: Vec<(Network<T>, T, usize)> = batch
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| -> Result<(Network<T>, T, usize)> {
            let mut grads = compiled.network().zeros_like();
            let mut loss_sum = T::zero();
            let mut valid = 0usize;
            for sample in chunk {
                let (_, trace) = compiled.forward(dic, &sample.measurement)?;
                match backward(compiled, &trace, &sample.scene.sparse_x, loss, &mut grads) {
                    Ok(l) => {
                        loss_sum += l;
                        valid += 1;
                    }
                    Err(DoaError::UndefinedLoss(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            Ok((grads, loss_sum, valid))
        })
        .collect::<Result<_>>()?;

    let mut grads = compiled.network().zeros_like();
    let mut loss_sum = T::zero();
    let mut valid = 0usize;
    for (g, l, v) in &chunks {
        grads.accumulate(g);
        loss_sum += *l;
        valid += *v;
    }
    Ok((grads, loss_sum, valid))
}

/// Mean forward loss over a dataset (validation path).
pub fn dataset_loss<T: Scalar>(
    net: &Network<T>,
    dic: &Dictionary<T>,
    samples: &[Sample<T>],
    loss: &SmoothedLoss<T>,
) -> Result<f64> {
    let compiled = net.compile()?;
    let chunks: Vec<(T, usize)> = samples
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| -> Result<(T, usize)> {
            let mut sum = T::zero();
            let mut valid = 0usize;
            for sample in chunk {
                let x = compiled.forward_output(dic, &sample.measurement)?;
                match loss.loss(&x, &sample.scene.sparse_x) {
                    Ok(l) => {
                        sum += l;
                        valid += 1;
                    }
                    Err(DoaError::UndefinedLoss(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            Ok((sum, valid))
        })
        .collect::<Result<_>>()?;
    let (sum, valid) = chunks
        .iter()
        .fold((T::zero(), 0usize), |(s, v), (cs, cv)| (s + *cs, v + *cv));
    if valid == 0 {
        return Err(DoaError::UndefinedLoss("no valid validation sample".into()));
    }
    Ok(sum.to_f64().unwrap() / valid as f64)
}

fn check_dataset<T: Scalar>(net: &Network<T>, samples: &[Sample<T>], what: &str) -> Result<()> {
    for s in samples {
        if s.measurement.len() != net.m() || s.scene.sparse_x.len() != net.n() {
            return Err(DoaError::DimensionMismatch(format!(
                "{what} sample dims do not match the {}x{} network",
                net.m(),
                net.n()
            )));
        }
    }
    Ok(())
}

/// Epoch loop with seeded shuffling, periodic validation and checkpointing
/// of the best-validation parameters. Deterministic given the seed and a
/// fixed chunking, independent of the worker count.
pub fn train<T: Scalar>(
    mut net: Network<T>,
    dic: &Dictionary<T>,
    train_set: &[Sample<T>],
    val_set: &[Sample<T>],
    cfg: &TrainConfig,
    loss_cfg: &LossConfig,
) -> Result<TrainOutcome<T>> {
    if cfg.batch_size < 1 || cfg.validation_every < 1 {
        return Err(DoaError::Config(
            "batch_size and validation_every must be >= 1".into(),
        ));
    }
    if net.m() != dic.m() || net.n() != dic.n() {
        return Err(DoaError::DimensionMismatch(
            "network and dictionary disagree".into(),
        ));
    }
    check_dataset(&net, train_set, "training")?;
    check_dataset(&net, val_set, "validation")?;
    if train_set.is_empty() {
        return Err(DoaError::Config("empty training set".into()));
    }

    let loss = SmoothedLoss::new(net.n(), loss_cfg)?;
    let cfg_hash = config_hash(&format!(
        "{}|{}",
        serde_json::to_string(cfg).unwrap_or_default(),
        serde_json::to_string(loss_cfg).unwrap_or_default()
    ));
    let mut adam = AdamState::new(net.real_param_count(), fl::<T>(cfg.learning_rate));

    let mut history = Vec::with_capacity(cfg.epochs + 1);
    let val0 = dataset_loss(&net, dic, val_set, &loss)?;
    history.push(EpochRecord {
        epoch: 0,
        train_loss: f64::NAN,
        val_loss: val0,
        wall_seconds: 0.0,
    });
    let mut best_net = net.clone();
    let mut best_epoch = 0usize;
    let mut best_val = val0;
    let save_best = |net: &Network<T>| -> Result<()> {
        if let Some(dir) = &cfg.checkpoint_dir {
            std::fs::create_dir_all(dir)?;
            let meta =
                CheckpointMeta::for_network(net, "best-validation", Some(cfg_hash.clone()));
            save_checkpoint(&dir.join("best.ckpt"), net, &meta)?;
        }
        Ok(())
    };
    save_best(&best_net)?;

    let start = Instant::now();
    let mut indices: Vec<usize> = (0..train_set.len()).collect();
    let mut scratch: Vec<Sample<T>> = Vec::with_capacity(cfg.batch_size);

    for epoch in 1..=cfg.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, epoch as u64, 0xE0));
        indices.shuffle(&mut rng);

        let mut epoch_loss = T::zero();
        let mut epoch_valid = 0usize;
        for batch_ids in indices.chunks(cfg.batch_size) {
            scratch.clear();
            scratch.extend(batch_ids.iter().map(|&i| train_set[i].clone()));
            let (mut grads, loss_sum, valid) = {
                let compiled = net.compile()?;
                batch_gradient(&compiled, dic, &scratch, &loss)?
            };
            epoch_loss += loss_sum;
            epoch_valid += valid;
            if valid == 0 {
                continue;
            }
            if cfg.constraint_mode == ConstraintMode::AccumulateThenUpdate {
                Network::accumulate_tied_gradients(&mut grads);
            }
            let mut flat_grads = grads.flatten();
            let scale = T::one() / T::from_usize(valid).unwrap();
            for g in flat_grads.iter_mut() {
                *g *= scale;
            }
            let mut params = net.flatten();
            adam.step(&mut params, &flat_grads);
            net.assign_from_flat(&params);
            net.apply_constraints();
        }
        let train_loss = if epoch_valid > 0 {
            epoch_loss.to_f64().unwrap() / epoch_valid as f64
        } else {
            f64::NAN
        };

        let val_loss = if epoch % cfg.validation_every == 0 || epoch == cfg.epochs {
            let v = dataset_loss(&net, dic, val_set, &loss)?;
            if v < best_val {
                best_val = v;
                best_epoch = epoch;
                best_net = net.clone();
                save_best(&best_net)?;
            }
            v
        } else {
            f64::NAN
        };
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }

    if let Some(dir) = &cfg.checkpoint_dir {
        std::fs::create_dir_all(dir)?;
        let meta = CheckpointMeta::for_network(&net, "final", Some(cfg_hash.clone()));
        save_checkpoint(&dir.join("final.ckpt"), &net, &meta)?;
        write_history_csv(&dir.join("history.csv"), &history)?;
    }

    Ok(TrainOutcome {
        final_net: net,
        best_net,
        best_epoch,
        best_val_loss: best_val,
        history,
        skipped_steps: adam.skipped_steps,
    })
}

/// Writes the history as `epoch,train_loss,val_loss,wall_seconds`.
pub fn write_history_csv(path: &std::path::Path, history: &[EpochRecord]) -> Result<()> {
    let mut text = String::from("epoch,train_loss,val_loss,wall_seconds\n");
    for r in history {
        text.push_str(&format!(
            "{},{},{},{}\n",
            r.epoch, r.train_loss, r.val_loss, r.wall_seconds
        ));
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Central-difference verification of [`backward`] over every real
/// parameter. Returns the worst per-parameter error
/// `|numeric - analytic| / max(|analytic|, |numeric|, floor)`.
///
/// A central difference of an O(1) loss at step `eps` in 64-bit arithmetic
/// only resolves gradients down to about `1e-16/eps` in absolute terms, so
/// the denominator floor is scale-aware: `1e-3 * max_j |analytic_j|`
/// (clamped below at 1e-12). Components above the floor are held to the
/// relative tolerance; components below it are checked absolutely at the
/// resolution the difference quotient actually has.
pub fn grad_check<T: Scalar>(
    net: &Network<T>,
    dic: &Dictionary<T>,
    sample: &Sample<T>,
    loss_cfg: &LossConfig,
    eps: T,
) -> Result<T> {
    let loss = SmoothedLoss::new(net.n(), loss_cfg)?;
    let analytic = {
        let compiled = net.compile()?;
        let (_, trace) = compiled.forward(dic, &sample.measurement)?;
        let mut grads = net.zeros_like();
        backward(&compiled, &trace, &sample.scene.sparse_x, &loss, &mut grads)?;
        grads.flatten()
    };

    let eval = |probe: &Network<T>| -> Result<T> {
        let compiled = probe.compile()?;
        let x = compiled.forward_output(dic, &sample.measurement)?;
        loss.loss(&x, &sample.scene.sparse_x)
    };

    let base = net.flatten();
    let mut buf = base.clone();
    let mut probe = net.clone();
    let scale = analytic
        .iter()
        .map(|a| a.abs())
        .fold(T::zero(), |m, a| m.max(a));
    let floor: T = (fl::<T>(1e-3) * scale).max(fl(1e-12));
    let mut worst = T::zero();
    for i in 0..base.len() {
        buf[i] = base[i] + eps;
        probe.assign_from_flat(&buf);
        let lp = eval(&probe)?;
        buf[i] = base[i] - eps;
        probe.assign_from_flat(&buf);
        let lm = eval(&probe)?;
        buf[i] = base[i];
        let numeric = (lp - lm) / (eps + eps);
        let denom = numeric.abs().max(analytic[i].abs()).max(floor);
        worst = worst.max((numeric - analytic[i]).abs() / denom);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_signal::{draw_scene, make_ula, synthesize_measurement};
    use crate::nets::NetKind;

    fn small_dict() -> Dictionary<f64> {
        Dictionary::build(make_ula::<f64>(8).unwrap(), 16).unwrap()
    }

    fn small_sample(dic: &Dictionary<f64>, seed: u64) -> Sample<f64> {
        let scene = draw_scene(dic, 1..=3, 1.0 / 8.0, seed).unwrap();
        synthesize_measurement(dic, &scene, 12.0, seed + 1000).unwrap()
    }

    #[test]
    fn adam_zero_gradient_keeps_parameters() {
        let mut adam = AdamState::<f64>::new(4, 1e-3);
        let mut p = vec![1.0, -2.0, 0.5, 3.0];
        let snapshot = p.clone();
        adam.step(&mut p, &[0.0; 4]);
        assert_eq!(p, snapshot);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn adam_first_step_has_learning_rate_magnitude() {
        let mut adam = AdamState::<f64>::new(1, 1e-4);
        let mut p = vec![0.7];
        adam.step(&mut p, &[1.0]);
        // Bias correction makes m_hat = g, v_hat = g^2: step = lr * g/|g|.
        assert!((p[0] - (0.7 - 1e-4)).abs() < 1e-9);
    }

    #[test]
    fn adam_skips_non_finite_gradients() {
        let mut adam = AdamState::<f64>::new(2, 1e-3);
        let mut p = vec![1.0, 2.0];
        adam.step(&mut p, &[f64::NAN, 0.0]);
        assert_eq!(p, vec![1.0, 2.0]);
        assert_eq!(adam.skipped_steps, 1);
        assert_eq!(adam.step_count(), 0);
    }

    #[test]
    fn gradients_verified_by_finite_differences_all_kinds() {
        let dic = small_dict();
        let sample = small_sample(&dic, 42);
        let loss_cfg = LossConfig::default();
        for kind in NetKind::ALL {
            // A small threshold keeps intermediate states dense, so every
            // parameter has finite-difference signal above the noise floor.
            let net = Network::init(kind, &dic, 2, 0.02, 1.0).unwrap();
            let err = grad_check(&net, &dic, &sample, &loss_cfg, 1e-6).unwrap();
            assert!(err < 1e-5, "{kind}: gradient error {err:.3e}");
        }
    }

    #[test]
    fn zero_input_batch_gives_zero_weight_gradients() {
        let dic = small_dict();
        let scene = draw_scene(&dic, 2..=2, 1.0 / 8.0, 7).unwrap();
        let zero_y = Sample {
            measurement: vec![num_complex::Complex::new(0.0, 0.0); dic.m()],
            scene: scene.clone(),
            snr_db: f64::INFINITY,
            noise_sigma_sq: 0.0,
        };
        let net = Network::init(NetKind::CadmmNet, &dic, 2, 0.1, 1.0).unwrap();
        let loss = SmoothedLoss::new(dic.n(), &LossConfig::default()).unwrap();
        let compiled = net.compile().unwrap();
        let (_, trace) = compiled.forward(&dic, &zero_y.measurement).unwrap();
        let mut grads = net.zeros_like();
        backward(&compiled, &trace, &scene.sparse_x, &loss, &mut grads).unwrap();
        // All states are zero, so nothing reaches the spectra.
        for layer in grads.layers() {
            if let crate::nets::LayerParams::CadmmNet { w, .. } = layer {
                assert!(w.iter().all(|z| z.norm() == 0.0));
            }
        }
    }

    #[test]
    fn beta_gradient_positive_when_threshold_suppresses_output() {
        // With the output threshold just below max|u|, raising it pushes the
        // estimate toward zero and the loss toward 1.
        let dic = small_dict();
        let sample = small_sample(&dic, 3);
        let mut net = Network::init(NetKind::CadmmNet, &dic, 3, 0.1, 1.0).unwrap();
        let (_, trace) = net.forward(&dic, &sample.measurement).unwrap();
        let max_u = trace
            .states
            .last()
            .unwrap()
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        net.set_final_beta(0.9 * max_u);
        let loss = SmoothedLoss::new(dic.n(), &LossConfig::default()).unwrap();
        let compiled = net.compile().unwrap();
        let (_, trace) = compiled.forward(&dic, &sample.measurement).unwrap();
        let mut grads = net.zeros_like();
        backward(&compiled, &trace, &sample.scene.sparse_x, &loss, &mut grads).unwrap();
        assert!(
            grads.final_beta() > 0.0,
            "output-threshold gradient {}",
            grads.final_beta()
        );
    }

    #[test]
    fn lr_zero_training_is_bit_identical() {
        let dic = small_dict();
        let train_set: Vec<Sample<f64>> = (0..8).map(|i| small_sample(&dic, 100 + i)).collect();
        let val_set: Vec<Sample<f64>> = (0..4).map(|i| small_sample(&dic, 200 + i)).collect();
        for kind in [NetKind::ChadmmNet, NetKind::Thlista] {
            let net = Network::init(kind, &dic, 2, 0.1, 1.0).unwrap();
            let before = net.flatten();
            let cfg = TrainConfig {
                epochs: 2,
                batch_size: 4,
                learning_rate: 0.0,
                seed: 1,
                validation_every: 1,
                checkpoint_dir: None,
                constraint_mode: ConstraintMode::UpdateThenProject,
            };
            let out = train(net, &dic, &train_set, &val_set, &cfg, &LossConfig::default())
                .unwrap();
            assert_eq!(out.final_net.flatten(), before, "{kind}");
        }
    }

    #[test]
    fn zero_epochs_returns_initialized_network() {
        let dic = small_dict();
        let train_set = vec![small_sample(&dic, 1)];
        let val_set = vec![small_sample(&dic, 2)];
        let net = Network::init(NetKind::Lista, &dic, 2, 0.1, 1.0).unwrap();
        let before = net.flatten();
        let cfg = TrainConfig {
            epochs: 0,
            batch_size: 1,
            learning_rate: 1e-3,
            seed: 0,
            validation_every: 1,
            checkpoint_dir: None,
            constraint_mode: ConstraintMode::UpdateThenProject,
        };
        let out = train(net, &dic, &train_set, &val_set, &cfg, &LossConfig::default()).unwrap();
        assert_eq!(out.final_net.flatten(), before);
        assert_eq!(out.history.len(), 1);
        assert!(out.history[0].val_loss.is_finite());
    }

    #[test]
    fn training_reduces_loss_on_small_problem() {
        let dic = small_dict();
        let train_set: Vec<Sample<f64>> = (0..64).map(|i| small_sample(&dic, 300 + i)).collect();
        let val_set: Vec<Sample<f64>> = (0..32).map(|i| small_sample(&dic, 900 + i)).collect();
        let net = Network::init(NetKind::CadmmNet, &dic, 3, 0.1, 1.0).unwrap();
        let cfg = TrainConfig {
            epochs: 10,
            batch_size: 16,
            learning_rate: 5e-3,
            seed: 3,
            validation_every: 1,
            checkpoint_dir: None,
            constraint_mode: ConstraintMode::UpdateThenProject,
        };
        let out = train(net, &dic, &train_set, &val_set, &cfg, &LossConfig::default()).unwrap();
        let val0 = out.history[0].val_loss;
        assert!(
            out.best_val_loss < val0,
            "no improvement: {} !< {val0}",
            out.best_val_loss
        );
    }

    #[test]
    fn constraint_modes_agree_for_sgd_like_behaviour() {
        // Both constraint paths must leave the network feasible.
        let dic = small_dict();
        let train_set: Vec<Sample<f64>> = (0..16).map(|i| small_sample(&dic, 400 + i)).collect();
        let val_set: Vec<Sample<f64>> = (0..8).map(|i| small_sample(&dic, 500 + i)).collect();
        for mode in [
            ConstraintMode::UpdateThenProject,
            ConstraintMode::AccumulateThenUpdate,
        ] {
            let net = Network::init(NetKind::ChadmmNet, &dic, 2, 0.1, 1.0).unwrap();
            let cfg = TrainConfig {
                epochs: 3,
                batch_size: 8,
                learning_rate: 1e-3,
                seed: 5,
                validation_every: 1,
                checkpoint_dir: None,
                constraint_mode: mode,
            };
            let out = train(net, &dic, &train_set, &val_set, &cfg, &LossConfig::default())
                .unwrap();
            for layer in out.final_net.layers() {
                if let crate::nets::LayerParams::ChadmmNet { w, rho, beta } = layer {
                    let n = w.len();
                    for i in (n / 2 + 1)..n {
                        assert_eq!(w[i], w[n - i].conj(), "tie violated ({mode:?})");
                    }
                    assert!(*rho > 0.0 && *beta >= 0.0);
                }
            }
        }
    }

    #[test]
    fn config_hash_is_stable() {
        let h1 = config_hash("abc");
        let h2 = config_hash("abc");
        assert_eq!(h1, h2);
        assert_eq!(h1.len(), 64);
        assert_ne!(h1, config_hash("abd"));
    }
}
