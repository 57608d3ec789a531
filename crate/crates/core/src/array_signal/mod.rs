//! Array geometry, steering vectors and the overcomplete dictionary.
//!
//! A linear array has elements at integer positions `l_m` in units of
//! `gamma * lambda`. A narrowband source at electrical frequency `f` produces
//! the steering vector `a(f)(m) = exp(j*2*pi*f*l_m)`, and the dictionary `A`
//! collects steering vectors over a uniform grid of `N` frequencies
//! `f_i = -gamma + 2*gamma*i/N` (`i = 0..N-1`). For `gamma = 1/2` the Gram
//! matrix `A^H A` is circulant, which the fast solvers and the structured
//! networks exploit.

mod io;
mod scene;

pub use io::{load_dataset, sidecar_path, write_dataset, DatasetManifest};
pub use scene::{
    derive_seed, draw_scene, generate_dataset, sample_at, synthesize_measurement,
    synthesize_measurement_with, DatasetSpec, GroundTruthScene, NoiseConvention, Sample, SnrSpec,
};

use crate::error::{DoaError, Result};
use crate::fft::dft;
use crate::linalg::CMat;
use crate::scalar::{fl, norm_sq, Scalar, C};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ArrayKind {
    Ula,
    Sla,
}

/// Element positions (integer multiples of `gamma * lambda`) plus the scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry<T: Scalar> {
    positions: Vec<usize>,
    gamma: T,
    kind: ArrayKind,
}

impl<T: Scalar> ArrayGeometry<T> {
    fn validate(positions: &[usize], gamma: T) -> Result<()> {
        if positions.len() < 2 {
            return Err(DoaError::InvalidGeometry(format!(
                "need at least 2 elements, got {}",
                positions.len()
            )));
        }
        if !positions.windows(2).all(|w| w[0] < w[1]) {
            return Err(DoaError::InvalidGeometry(
                "positions must be strictly increasing".into(),
            ));
        }
        if !(gamma > T::zero() && gamma <= fl(0.5)) {
            return Err(DoaError::InvalidGeometry(
                "gamma must lie in (0, 1/2]".into(),
            ));
        }
        Ok(())
    }

    pub fn new(positions: Vec<usize>, gamma: T, kind: ArrayKind) -> Result<Self> {
        Self::validate(&positions, gamma)?;
        Ok(Self {
            positions,
            gamma,
            kind,
        })
    }

    /// Replaces the wavelength-unit scale, keeping positions.
    pub fn with_gamma(mut self, gamma: T) -> Result<Self> {
        Self::validate(&self.positions, gamma)?;
        self.gamma = gamma;
        Ok(self)
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn kind(&self) -> ArrayKind {
        self.kind
    }

    /// Number of elements `M`.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Largest element index `k_M`.
    pub fn max_position(&self) -> usize {
        *self.positions.last().unwrap()
    }

    /// True when the scale sits exactly at the circulant point `gamma = 1/2`.
    pub fn is_half_wavelength(&self) -> bool {
        self.gamma == fl(0.5)
    }
}

/// Uniform linear array with elements `0..m-1` and `gamma = 1/2`.
pub fn make_ula<T: Scalar>(m: usize) -> Result<ArrayGeometry<T>> {
    ArrayGeometry::new((0..m).collect(), fl(0.5), ArrayKind::Ula)
}

/// Sparse linear array: `m` elements drawn without replacement from
/// `{0, ..., aperture}`, endpoints pinned so the aperture is exact.
pub fn make_sla<T: Scalar>(m: usize, aperture: usize, seed: u64) -> Result<ArrayGeometry<T>> {
    if aperture < 1 {
        return Err(DoaError::InvalidGeometry("aperture must be >= 1".into()));
    }
    if m > aperture + 1 {
        return Err(DoaError::InvalidGeometry(format!(
            "cannot place {m} distinct elements in 0..={aperture}"
        )));
    }
    if m < 2 {
        return Err(DoaError::InvalidGeometry(
            "need at least 2 elements".into(),
        ));
    }
    let mut positions: Vec<usize> = if m == aperture + 1 {
        (0..=aperture).collect()
    } else {
        let mut interior: Vec<usize> = (1..aperture).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Partial Fisher-Yates: the first m-2 slots become the sample.
        for i in 0..(m - 2) {
            let j = rng.gen_range(i..interior.len());
            interior.swap(i, j);
        }
        let mut p: Vec<usize> = interior[..m - 2].to_vec();
        p.push(0);
        p.push(aperture);
        p
    };
    positions.sort_unstable();
    ArrayGeometry::new(positions, fl(0.5), ArrayKind::Sla)
}

/// Steering vector `a(f)(m) = exp(j*2*pi*f*l_m)`.
pub fn steering_vector<T: Scalar>(geom: &ArrayGeometry<T>, f: T) -> Result<Vec<C<T>>> {
    if f < -geom.gamma || f > geom.gamma {
        return Err(DoaError::Aliasing {
            f: f.to_f64().unwrap_or(f64::NAN),
            gamma: geom.gamma.to_f64().unwrap_or(f64::NAN),
        });
    }
    let two_pi = T::PI() + T::PI();
    Ok(geom
        .positions
        .iter()
        .map(|&l| {
            let phase = two_pi * f * T::from_usize(l).unwrap();
            Complex::new(phase.cos(), phase.sin())
        })
        .collect())
}

/// The overcomplete steering dictionary over a uniform frequency grid.
#[derive(Debug, Clone)]
pub struct Dictionary<T: Scalar> {
    geometry: ArrayGeometry<T>,
    grid: Vec<T>,
    matrix_a: CMat<T>,
    gram_col: Vec<C<T>>,
    gram_col_dft: Vec<C<T>>,
    sigma_max_sq: T,
    id: String,
}

impl<T: Scalar> Dictionary<T> {
    /// Builds the `M x N` dictionary. Requires `n > M` and `n > k_M + 1`.
    pub fn build(geometry: ArrayGeometry<T>, n: usize) -> Result<Self> {
        let m = geometry.len();
        if n <= m {
            return Err(DoaError::GridTooSmall(format!(
                "grid size {n} must exceed the element count {m}"
            )));
        }
        if n <= geometry.max_position() + 1 {
            return Err(DoaError::GridTooSmall(format!(
                "grid size {n} must exceed max element index {} + 1",
                geometry.max_position()
            )));
        }
        let gamma = geometry.gamma();
        let two_gamma = gamma + gamma;
        let n_t = T::from_usize(n).unwrap();
        let grid: Vec<T> = (0..n)
            .map(|i| -gamma + two_gamma * T::from_usize(i).unwrap() / n_t)
            .collect();
        let two_pi = T::PI() + T::PI();
        let matrix_a = CMat::from_fn(m, n, |r, c| {
            let phase = two_pi * grid[c] * T::from_usize(geometry.positions()[r]).unwrap();
            Complex::new(phase.cos(), phase.sin())
        });
        // b = (A^H A)(:, 0) = A^H a(f_0).
        let first_col: Vec<C<T>> = (0..m).map(|r| matrix_a.at(r, 0)).collect();
        let gram_col = matrix_a.adjoint_matvec(&first_col);
        let gram_col_dft = dft(&gram_col);

        let id = {
            let mut s = format!(
                "g{}:n{}:p",
                geometry.gamma().to_f64().unwrap_or(f64::NAN),
                n
            );
            for p in geometry.positions() {
                s.push_str(&format!("{p},"));
            }
            s
        };

        let mut dict = Self {
            geometry,
            grid,
            matrix_a,
            gram_col,
            gram_col_dft,
            sigma_max_sq: T::zero(),
            id,
        };
        dict.sigma_max_sq = dict.power_iteration_sigma_max_sq();
        Ok(dict)
    }

    /// Largest squared singular value of `A`, by power iteration on `A^H A`
    /// (tolerance 1e-10, at most 1000 iterations).
    fn power_iteration_sigma_max_sq(&self) -> T {
        let n = self.n();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_D1C7);
        let mut v: Vec<C<T>> = (0..n)
            .map(|_| {
                Complex::new(
                    T::standard_normal(&mut rng),
                    T::standard_normal(&mut rng),
                )
            })
            .collect();
        let s = T::one() / norm_sq(&v).sqrt();
        for z in v.iter_mut() {
            *z = z.scale(s);
        }
        let tol: T = fl(1e-10);
        let mut lambda = T::zero();
        for _ in 0..1000 {
            let w = self.adjoint_apply(&self.apply(&v));
            let new_lambda = v
                .iter()
                .zip(&w)
                .map(|(a, b)| (a.conj() * b).re)
                .fold(T::zero(), |acc, x| acc + x);
            let wn = norm_sq(&w).sqrt();
            if wn == T::zero() {
                return T::zero();
            }
            let s = T::one() / wn;
            v = w.into_iter().map(|z| z.scale(s)).collect();
            if (new_lambda - lambda).abs() <= tol * new_lambda.abs().max(T::one()) {
                return new_lambda;
            }
            lambda = new_lambda;
        }
        lambda
    }

    pub fn geometry(&self) -> &ArrayGeometry<T> {
        &self.geometry
    }

    /// Element count `M`.
    pub fn m(&self) -> usize {
        self.geometry.len()
    }

    /// Grid size `N`.
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn gamma(&self) -> T {
        self.geometry.gamma()
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix_a
    }

    /// First column `b` of the Gram matrix `A^H A`.
    pub fn gram_col(&self) -> &[C<T>] {
        &self.gram_col
    }

    /// DFT of `b`; the eigenvalues of the Gram matrix when it is circulant.
    pub fn gram_col_dft(&self) -> &[C<T>] {
        &self.gram_col_dft
    }

    pub fn sigma_max_sq(&self) -> T {
        self.sigma_max_sq
    }

    /// Default ISTA step size `1 / sigma_max(A)^2`.
    pub fn default_step(&self) -> T {
        T::one() / self.sigma_max_sq
    }

    /// Stable identifier of (positions, gamma, N), for checkpoint provenance.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// `A x` (length `M`).
    pub fn apply(&self, x: &[C<T>]) -> Vec<C<T>> {
        self.matrix_a.matvec(x)
    }

    /// `A^H y` (length `N`), dense evaluation.
    pub fn adjoint_apply(&self, y: &[C<T>]) -> Vec<C<T>> {
        self.matrix_a.adjoint_matvec(y)
    }

    /// `A^H y` evaluated as one N-point DFT of the zero-scattered snapshot.
    ///
    /// Valid only at `gamma = 1/2`: with `f_i = -1/2 + i/N`,
    /// `(A^H y)(i) = sum_m y_m (-1)^{l_m} exp(-j*2*pi*i*l_m/N)`.
    pub fn adjoint_apply_fft(&self, y: &[C<T>]) -> Result<Vec<C<T>>> {
        if !self.geometry.is_half_wavelength() {
            return Err(DoaError::StructureViolation(
                "scatter-DFT adjoint requires gamma = 1/2".into(),
            ));
        }
        if y.len() != self.m() {
            return Err(DoaError::DimensionMismatch(format!(
                "snapshot length {} != M = {}",
                y.len(),
                self.m()
            )));
        }
        let n = self.n();
        let mut scattered = vec![Complex::new(T::zero(), T::zero()); n];
        for (ym, &l) in y.iter().zip(self.geometry.positions()) {
            scattered[l] = if l % 2 == 0 { *ym } else { -*ym };
        }
        Ok(dft(&scattered))
    }

    /// Dense Gram matrix `A^H A` (N x N); used by diagnostics and tests.
    pub fn gram_dense(&self) -> CMat<T> {
        let m = self.m();
        let n = self.n();
        CMat::from_fn(n, n, |i, j| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for r in 0..m {
                acc += self.matrix_a.at(r, i).conj() * self.matrix_a.at(r, j);
            }
            acc
        })
    }

    /// Index of the grid bin nearest to `f` (wrap-aware when `gamma = 1/2`).
    pub fn nearest_bin(&self, f: T) -> usize {
        let n = self.n();
        let gamma = self.gamma();
        let delta = (gamma + gamma) / T::from_usize(n).unwrap();
        let pos = ((f + gamma) / delta).round();
        let idx = pos.to_f64().unwrap().max(0.0) as usize;
        if self.geometry.is_half_wavelength() {
            idx % n
        } else {
            idx.min(n - 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rel_l2_dist;

    #[test]
    fn ula_positions() {
        let g = make_ula::<f64>(3).unwrap();
        assert_eq!(g.positions(), &[0, 1, 2]);
        assert_eq!(g.gamma(), 0.5);
        let g30 = make_ula::<f64>(30).unwrap();
        assert_eq!(g30.positions().len(), 30);
        assert_eq!(g30.max_position(), 29);
    }

    #[test]
    fn degenerate_ula_rejected() {
        assert!(make_ula::<f64>(1).is_err());
    }

    #[test]
    fn sla_endpoints_pinned() {
        let g = make_sla::<f64>(30, 60, 7).unwrap();
        assert_eq!(g.positions().len(), 30);
        assert_eq!(g.positions()[0], 0);
        assert_eq!(g.max_position(), 60);
        assert!(g.positions().windows(2).all(|w| w[0] < w[1]));
        // Deterministic in the seed.
        let g2 = make_sla::<f64>(30, 60, 7).unwrap();
        assert_eq!(g.positions(), g2.positions());
        let g3 = make_sla::<f64>(30, 60, 8).unwrap();
        assert_ne!(g.positions(), g3.positions());
    }

    #[test]
    fn sla_degenerate_cases() {
        let full = make_sla::<f64>(6, 5, 123).unwrap();
        assert_eq!(full.positions(), &[0, 1, 2, 3, 4, 5]);
        let two = make_sla::<f64>(2, 5, 9).unwrap();
        assert_eq!(two.positions(), &[0, 5]);
        assert!(make_sla::<f64>(7, 5, 0).is_err());
    }

    #[test]
    fn steering_zero_frequency_is_ones() {
        let g = make_ula::<f64>(4).unwrap();
        let a = steering_vector(&g, 0.0).unwrap();
        for z in a {
            assert!((z - Complex::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn steering_quarter_band() {
        let g = make_ula::<f64>(2).unwrap();
        let a = steering_vector(&g, 0.25).unwrap();
        assert!((a[0] - Complex::new(1.0, 0.0)).norm() < 1e-15);
        assert!((a[1] - Complex::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn steering_rejects_aliased_frequency() {
        let g = make_ula::<f64>(4).unwrap().with_gamma(0.25).unwrap();
        assert!(steering_vector(&g, 0.3).is_err());
        assert!(steering_vector(&g, 0.25).is_ok());
    }

    #[test]
    fn dictionary_columns_match_steering() {
        let g = make_ula::<f64>(5).unwrap();
        let d = Dictionary::build(g.clone(), 16).unwrap();
        for i in [0usize, 3, 15] {
            let col: Vec<C<f64>> = (0..d.m()).map(|r| d.matrix().at(r, i)).collect();
            let a = steering_vector(&g, d.grid()[i]).unwrap();
            assert!(rel_l2_dist(&col, &a) < 1e-12);
        }
    }

    #[test]
    fn dictionary_column_norms_and_gram_col() {
        let d = Dictionary::build(make_ula::<f64>(2).unwrap(), 4).unwrap();
        // Unit-modulus entries: every column has squared norm exactly M.
        for j in 0..d.n() {
            let s: f64 = (0..d.m()).map(|i| d.matrix().at(i, j).norm_sqr()).sum();
            assert!((s - 2.0).abs() < 1e-12);
        }
        assert!((d.gram_col()[0] - Complex::new(2.0, 0.0)).norm() < 1e-12);
        // gram_col_dft consistent with a direct DFT.
        let direct = crate::fft::dft(d.gram_col());
        assert!(rel_l2_dist(d.gram_col_dft(), &direct) < 1e-12);
    }

    #[test]
    fn paper_scale_dimensions() {
        let d = Dictionary::build(make_ula::<f64>(30).unwrap(), 256).unwrap();
        assert_eq!(d.m(), 30);
        assert_eq!(d.n(), 256);
        assert_eq!(d.grid().len(), 256);
        assert!((d.grid()[0] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_too_small_rejected() {
        let g = make_sla::<f64>(4, 20, 0).unwrap();
        assert!(Dictionary::build(g.clone(), 21).is_err());
        assert!(Dictionary::build(g, 32).is_ok());
        // n must also exceed M.
        let ula = make_ula::<f64>(8).unwrap();
        assert!(Dictionary::build(ula, 8).is_err());
    }

    #[test]
    fn sigma_max_for_half_wavelength_ula_is_n() {
        // At gamma = 1/2 the Gram matrix has eigenvalues in {0, N}.
        let d = Dictionary::build(make_ula::<f64>(8).unwrap(), 32).unwrap();
        assert!((d.sigma_max_sq() - 32.0).abs() < 1e-6);
    }

    #[test]
    fn scatter_dft_adjoint_matches_dense() {
        let g = make_sla::<f64>(6, 12, 3).unwrap();
        let d = Dictionary::build(g, 32).unwrap();
        let y: Vec<C<f64>> = (0..6)
            .map(|i| Complex::new((i as f64).cos(), (i as f64 * 1.3).sin()))
            .collect();
        let dense = d.adjoint_apply(&y);
        let fast = d.adjoint_apply_fft(&y).unwrap();
        assert!(rel_l2_dist(&fast, &dense) < 1e-12);
    }

    #[test]
    fn nearest_bin_wraps_at_half_wavelength() {
        let d = Dictionary::build(make_ula::<f64>(4).unwrap(), 16).unwrap();
        assert_eq!(d.nearest_bin(-0.5), 0);
        assert_eq!(d.nearest_bin(0.0), 8);
        // 0.499 is closer to -0.5 (bin 0) around the circle than to bin 15.
        assert_eq!(d.nearest_bin(0.499), 0);
        let off = Dictionary::build(
            make_ula::<f64>(4).unwrap().with_gamma(0.25).unwrap(),
            16,
        )
        .unwrap();
        assert_eq!(off.nearest_bin(0.25), 15); // clamped, no wrap
        assert_eq!(off.nearest_bin(-0.25), 0);
    }
}
