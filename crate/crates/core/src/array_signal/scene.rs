//! Randomized scene and measurement synthesis.
//!
//! Everything is a pure function of `(inputs, seed)`. Dataset generation
//! derives one seed per sample index from the dataset seed with a
//! splitmix-style mixer, so samples can be produced independently, one at a
//! time, in any order, and on any number of workers.

use super::{steering_vector, Dictionary};
use crate::error::{DoaError, Result};
use crate::scalar::{c_zero, fl, norm_sq, Scalar, C};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SCENE_RETRY_CAP: usize = 10_000;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-sample sub-seed from a dataset seed, a sample counter and a salt.
pub fn derive_seed(base: u64, index: u64, salt: u64) -> u64 {
    splitmix64(base ^ splitmix64(index.wrapping_add(splitmix64(salt))))
}

/// Wrap-aware distance on the unit frequency circle `[-1/2, 1/2)`.
fn circular_distance<T: Scalar>(a: T, b: T) -> T {
    let d = (a - b).abs() % T::one();
    d.min(T::one() - d)
}

/// Ground truth for one synthetic snapshot.
#[derive(Debug, Clone)]
pub struct GroundTruthScene<T: Scalar> {
    pub k_targets: usize,
    /// Off-grid true frequencies.
    pub true_freqs: Vec<T>,
    /// Nearest grid bin per true frequency.
    pub grid_indices: Vec<usize>,
    /// Complex amplitudes, one per target.
    pub amplitudes: Vec<C<T>>,
    /// Length-N sparse vector with amplitudes at the snapped bins.
    pub sparse_x: Vec<C<T>>,
}

/// One measurement with its generating scene.
#[derive(Debug, Clone)]
pub struct Sample<T: Scalar> {
    pub measurement: Vec<C<T>>,
    pub scene: GroundTruthScene<T>,
    /// `+inf` denotes a noiseless sample.
    pub snr_db: T,
    pub noise_sigma_sq: T,
}

/// How the displayed noise power translates to per-element variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseConvention {
    /// Per-element variance `sigma^2 / M`, so the realized total noise power
    /// relative to the signal matches `10^(-SNR/10)`.
    #[default]
    SignalRelative,
    /// Per-element variance `sigma^2` as displayed, giving total noise power
    /// `M` times the signal-relative target.
    PaperLiteral,
}

/// Draws `K` targets with wrap-aware pairwise separation at least `min_sep`.
pub fn draw_scene<T: Scalar>(
    dic: &Dictionary<T>,
    k_range: std::ops::RangeInclusive<usize>,
    min_sep: T,
    seed: u64,
) -> Result<GroundTruthScene<T>> {
    let (k_min, k_max) = (*k_range.start(), *k_range.end());
    if k_min < 1 || k_min > k_max {
        return Err(DoaError::InvalidScene(format!(
            "bad target count range {k_min}..={k_max}"
        )));
    }
    if min_sep * T::from_usize(k_max).unwrap() >= T::one() {
        return Err(DoaError::SamplingFailure(format!(
            "cannot pack {k_max} targets with separation {min_sep} on the unit circle"
        )));
    }
    let gamma = dic.gamma();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(k_min..=k_max);

    let two_gamma = gamma + gamma;
    'attempt: for _ in 0..SCENE_RETRY_CAP {
        let freqs: Vec<T> = (0..k)
            .map(|_| -gamma + two_gamma * T::uniform_01(&mut rng))
            .collect();
        for i in 0..k {
            for j in (i + 1)..k {
                if circular_distance(freqs[i], freqs[j]) < min_sep {
                    continue 'attempt;
                }
            }
        }
        let bins: Vec<usize> = freqs.iter().map(|&f| dic.nearest_bin(f)).collect();
        let mut sorted = bins.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            continue 'attempt;
        }

        let amplitudes: Vec<C<T>> = (0..k)
            .map(|_| {
                let mut mag = T::uniform_01(&mut rng);
                while mag == T::zero() {
                    mag = T::uniform_01(&mut rng);
                }
                let phase = (T::PI() + T::PI()) * T::uniform_01(&mut rng);
                Complex::from_polar(mag, phase)
            })
            .collect();
        let mut sparse_x = vec![c_zero(); dic.n()];
        for (&b, &a) in bins.iter().zip(&amplitudes) {
            sparse_x[b] = a;
        }
        return Ok(GroundTruthScene {
            k_targets: k,
            true_freqs: freqs,
            grid_indices: bins,
            amplitudes,
            sparse_x,
        });
    }
    Err(DoaError::SamplingFailure(format!(
        "no admissible scene after {SCENE_RETRY_CAP} attempts (K={k}, min_sep={min_sep})"
    )))
}

/// Noisy snapshot `y = sum_k x_k a(f*_k) + n` for the given scene.
pub fn synthesize_measurement<T: Scalar>(
    dic: &Dictionary<T>,
    scene: &GroundTruthScene<T>,
    snr_db: T,
    seed: u64,
) -> Result<Sample<T>> {
    synthesize_measurement_with(dic, scene, snr_db, NoiseConvention::SignalRelative, seed)
}

/// As [`synthesize_measurement`], with an explicit noise-power convention.
pub fn synthesize_measurement_with<T: Scalar>(
    dic: &Dictionary<T>,
    scene: &GroundTruthScene<T>,
    snr_db: T,
    convention: NoiseConvention,
    seed: u64,
) -> Result<Sample<T>> {
    if scene.k_targets == 0 || scene.amplitudes.is_empty() {
        return Err(DoaError::InvalidScene("empty scene".into()));
    }
    let m = dic.m();
    let mut signal = vec![c_zero(); m];
    for (&f, &x) in scene.true_freqs.iter().zip(&scene.amplitudes) {
        let a = steering_vector(dic.geometry(), f)?;
        for (s, av) in signal.iter_mut().zip(&a) {
            *s += av * x;
        }
    }

    if snr_db == T::infinity() {
        return Ok(Sample {
            measurement: signal,
            scene: scene.clone(),
            snr_db,
            noise_sigma_sq: T::zero(),
        });
    }

    let sigma_sq = fl::<T>(10.0).powf(-snr_db / fl(10.0)) * norm_sq(&signal);
    let per_element_var = match convention {
        NoiseConvention::SignalRelative => sigma_sq / T::from_usize(m).unwrap(),
        NoiseConvention::PaperLiteral => sigma_sq,
    };
    // Circular complex Gaussian: each part has variance var/2.
    let part_std = (per_element_var / fl(2.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let measurement: Vec<C<T>> = signal
        .into_iter()
        .map(|s| {
            let re = T::standard_normal(&mut rng) * part_std;
            let im = T::standard_normal(&mut rng) * part_std;
            s + Complex::new(re, im)
        })
        .collect();
    Ok(Sample {
        measurement,
        scene: scene.clone(),
        snr_db,
        noise_sigma_sq: sigma_sq,
    })
}

/// SNR schedule for a dataset.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrSpec {
    Noiseless,
    FixedDb(f64),
    /// One batch of `count` samples per listed level.
    SweepDb(Vec<f64>),
}

impl SnrSpec {
    pub fn levels(&self) -> Vec<f64> {
        match self {
            SnrSpec::Noiseless => vec![f64::INFINITY],
            SnrSpec::FixedDb(db) => vec![*db],
            SnrSpec::SweepDb(v) => v.clone(),
        }
    }
}

/// Full recipe for a synthetic dataset.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DatasetSpec {
    /// Samples per SNR level.
    pub count: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub min_sep: f64,
    pub snr: SnrSpec,
    #[serde(default)]
    pub noise_convention: NoiseConvention,
    pub seed: u64,
}

/// The `index`-th sample of the dataset described by `spec`.
///
/// Samples are numbered level-major: `index = level * count + j`.
pub fn sample_at<T: Scalar>(
    dic: &Dictionary<T>,
    spec: &DatasetSpec,
    index: u64,
) -> Result<Sample<T>> {
    let levels = spec.snr.levels();
    let level = (index / spec.count as u64) as usize;
    if level >= levels.len() {
        return Err(DoaError::InvalidScene(format!(
            "sample index {index} out of range"
        )));
    }
    let scene = draw_scene(
        dic,
        spec.k_min..=spec.k_max,
        fl(spec.min_sep),
        derive_seed(spec.seed, index, 0),
    )?;
    synthesize_measurement_with(
        dic,
        &scene,
        fl(levels[level]),
        spec.noise_convention,
        derive_seed(spec.seed, index, 1),
    )
}

/// Generates `count` samples per SNR level, in parallel over sample index.
pub fn generate_dataset<T: Scalar>(
    dic: &Dictionary<T>,
    spec: &DatasetSpec,
) -> Result<Vec<Sample<T>>> {
    if spec.count < 1 {
        return Err(DoaError::InvalidScene("count must be >= 1".into()));
    }
    let total = spec.count as u64 * spec.snr.levels().len() as u64;
    (0..total)
        .into_par_iter()
        .map(|i| sample_at(dic, spec, i))
        .collect()
}
