//! Iterative LASSO solvers and circulant utilities.
//!
//! All solvers target `min_x 0.5*||y - A x||^2 + lambda*||x||_1` over complex
//! vectors. Four routes are implemented:
//!
//! * [`ista`] — proximal gradient iteration with step `mu`.
//! * [`admm`] — the three-variable alternating scheme with the
//!   `(A^H A + rho I)` system factored once per solve.
//! * [`compact_admm`] — the single-state recursion over `u = x + v`,
//!   algebraically equivalent to [`admm`] apart from the final readout
//!   `S_kappa(u)`.
//! * [`fast_compact_admm`] — same recursion with the Gram solve
//!   diagonalized by the DFT; valid only at `gamma = 1/2`, where the Gram
//!   matrix is circulant, and costs `O(N log N)` per iteration.
//!
//! ADMM thresholds with `kappa2 = rho * lambda`; at `rho = 1` the fixed
//! point is the LASSO solution for `lambda` itself.

use crate::array_signal::Dictionary;
use crate::error::{DoaError, Result};
use crate::fft::FftPair;
use crate::linalg::{CMat, LuFactors};
use crate::scalar::{all_finite, c_zero, fl, Scalar, C};
use num_complex::Complex;

/// Shared solver hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig<T: Scalar> {
    /// l1 weight.
    pub lambda: T,
    /// Augmented-Lagrangian weight.
    pub rho: T,
    /// Iteration count.
    pub iterations: usize,
    /// ISTA step size; `1/sigma_max(A)^2` guarantees convergence.
    pub mu: T,
}

impl<T: Scalar> SolverConfig<T> {
    /// Config with the default step `mu = 1/sigma_max(A)^2`.
    pub fn for_dictionary(dic: &Dictionary<T>, lambda: T, rho: T, iterations: usize) -> Self {
        Self {
            lambda,
            rho,
            iterations,
            mu: dic.default_step(),
        }
    }

    /// ISTA threshold `kappa1 = mu * lambda`.
    pub fn kappa1(&self) -> T {
        self.mu * self.lambda
    }

    /// ADMM threshold `kappa2 = rho * lambda`.
    pub fn kappa2(&self) -> T {
        self.rho * self.lambda
    }
}

/// Complex soft-thresholding `S_kappa(z) = exp(j*arg(z)) * max(|z|-kappa, 0)`.
///
/// `S_kappa(0) = 0`; the phase factor never materializes for `|z| <= kappa`.
#[inline]
pub fn soft_threshold<T: Scalar>(z: C<T>, kappa: T) -> C<T> {
    debug_assert!(kappa >= T::zero());
    let r = z.norm();
    if r <= kappa {
        c_zero()
    } else {
        z.scale((r - kappa) / r)
    }
}

/// Elementwise soft-thresholding.
pub fn soft_threshold_vec<T: Scalar>(z: &[C<T>], kappa: T) -> Vec<C<T>> {
    z.iter().map(|&v| soft_threshold(v, kappa)).collect()
}

/// LASSO objective `0.5*||y - A x||^2 + lambda*||x||_1`.
pub fn lasso_objective<T: Scalar>(dic: &Dictionary<T>, y: &[C<T>], x: &[C<T>], lambda: T) -> T {
    let ax = dic.apply(x);
    let data: T = ax
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b).norm_sqr())
        .fold(T::zero(), |acc, v| acc + v);
    let l1 = x.iter().map(|z| z.norm()).fold(T::zero(), |acc, v| acc + v);
    data * fl(0.5) + lambda * l1
}

/// ISTA with per-iterate callback.
pub fn ista_trace<T: Scalar>(
    dic: &Dictionary<T>,
    y: &[C<T>],
    cfg: &SolverConfig<T>,
    mut on_iter: impl FnMut(usize, &[C<T>]),
) -> Result<Vec<C<T>>> {
    let kappa1 = cfg.kappa1();
    let mu = cfg.mu;
    let mut x = vec![c_zero(); dic.n()];
    for t in 1..=cfg.iterations {
        let residual: Vec<C<T>> = dic.apply(&x).iter().zip(y).map(|(a, b)| a - b).collect();
        let grad = dic.adjoint_apply(&residual);
        for (xi, gi) in x.iter_mut().zip(&grad) {
            *xi = soft_threshold(*xi - gi.scale(mu), kappa1);
        }
        if !all_finite(&x) {
            return Err(DoaError::Divergence(t));
        }
        on_iter(t, &x);
    }
    Ok(x)
}

/// ISTA for `cfg.iterations` steps from `x = 0`.
pub fn ista<T: Scalar>(dic: &Dictionary<T>, y: &[C<T>], cfg: &SolverConfig<T>) -> Result<Vec<C<T>>> {
    ista_trace(dic, y, cfg, |_, _| {})
}

/// Full ADMM with per-iterate callback `(t, x, z, v)`. Returns `z`.
pub fn admm_trace<T: Scalar>(
    dic: &Dictionary<T>,
    y: &[C<T>],
    cfg: &SolverConfig<T>,
    mut on_iter: impl FnMut(usize, &[C<T>], &[C<T>], &[C<T>]),
) -> Result<Vec<C<T>>> {
    let n = dic.n();
    let rho = cfg.rho;
    let kappa2 = cfg.kappa2();
    let mut k = dic.gram_dense();
    for i in 0..n {
        *k.at_mut(i, i) += Complex::new(rho, T::zero());
    }
    let lu = LuFactors::new(&k, fl(1e-300))
        .map_err(|_| DoaError::Numerical("A^H A + rho I factorization failed".into()))?;
    let y_f = dic.adjoint_apply(y);

    let mut z: Vec<C<T>> = vec![c_zero(); n];
    let mut v: Vec<C<T>> = vec![c_zero(); n];
    for t in 1..=cfg.iterations {
        let rhs: Vec<C<T>> = y_f
            .iter()
            .zip(z.iter().zip(&v))
            .map(|(yf, (zi, vi))| yf + (zi - vi).scale(rho))
            .collect();
        let x = lu.solve(&rhs);
        let xv: Vec<C<T>> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
        z = soft_threshold_vec(&xv, kappa2);
        v = xv.iter().zip(&z).map(|(a, b)| a - b).collect();
        if !all_finite(&z) || !all_finite(&v) {
            return Err(DoaError::Divergence(t));
        }
        on_iter(t, &x, &z, &v);
    }
    Ok(z)
}

/// ADMM for `cfg.iterations` steps; returns the sparse iterate `z`.
pub fn admm<T: Scalar>(dic: &Dictionary<T>, y: &[C<T>], cfg: &SolverConfig<T>) -> Result<Vec<C<T>>> {
    admm_trace(dic, y, cfg, |_, _, _, _| {})
}

/// Compact approximate ADMM with per-iterate callback on `u`.
pub fn compact_admm_trace<T: Scalar>(
    dic: &Dictionary<T>,
    y: &[C<T>],
    cfg: &SolverConfig<T>,
    mut on_iter: impl FnMut(usize, &[C<T>]),
) -> Result<Vec<C<T>>> {
    let n = dic.n();
    let rho = cfg.rho;
    let kappa2 = cfg.kappa2();
    let mut k = dic.gram_dense();
    for i in 0..n {
        *k.at_mut(i, i) += Complex::new(rho, T::zero());
    }
    let lu = LuFactors::new(&k, fl(1e-300))
        .map_err(|_| DoaError::Numerical("A^H A + rho I factorization failed".into()))?;
    let y_f = dic.adjoint_apply(y);

    let mut u = vec![c_zero(); n];
    for t in 1..=cfg.iterations {
        let s = soft_threshold_vec(&u, kappa2);
        let rhs: Vec<C<T>> = y_f
            .iter()
            .zip(s.iter().zip(&u))
            .map(|(yf, (si, ui))| yf + (si + si - ui).scale(rho))
            .collect();
        let m = lu.solve(&rhs);
        u = m
            .iter()
            .zip(u.iter().zip(&s))
            .map(|(mi, (ui, si))| mi + ui - si)
            .collect();
        if !all_finite(&u) {
            return Err(DoaError::Divergence(t));
        }
        on_iter(t, &u);
    }
    Ok(soft_threshold_vec(&u, kappa2))
}

/// Compact approximate ADMM; returns `S_kappa2(u^(T))`.
pub fn compact_admm<T: Scalar>(
    dic: &Dictionary<T>,
    y: &[C<T>],
    cfg: &SolverConfig<T>,
) -> Result<Vec<C<T>>> {
    compact_admm_trace(dic, y, cfg, |_, _| {})
}

/// Fast compact ADMM with per-iterate callback on `u`.
///
/// Requires `gamma = 1/2`, where `A^H A` is circulant: the Gram solve becomes
/// an elementwise division in the DFT domain and `y_F = A^H y` reduces to one
/// N-point DFT of the zero-scattered snapshot.
pub fn fast_compact_admm_trace<T: Scalar>(
    dic: &Dictionary<T>,
    y: &[C<T>],
    cfg: &SolverConfig<T>,
    mut on_iter: impl FnMut(usize, &[C<T>]),
) -> Result<Vec<C<T>>> {
    if !dic.geometry().is_half_wavelength() {
        return Err(DoaError::StructureViolation(
            "fast compact ADMM requires gamma = 1/2".into(),
        ));
    }
    let n = dic.n();
    let rho = cfg.rho;
    let kappa2 = cfg.kappa2();
    let y_f = dic.adjoint_apply_fft(y)?;
    let q: Vec<C<T>> = dic
        .gram_col_dft()
        .iter()
        .map(|&e| Complex::new(T::one(), T::zero()) / (e + Complex::new(rho, T::zero())))
        .collect();
    let fft = FftPair::new(n);

    let mut u = vec![c_zero(); n];
    for t in 1..=cfg.iterations {
        let s = soft_threshold_vec(&u, kappa2);
        let a: Vec<C<T>> = y_f
            .iter()
            .zip(s.iter().zip(&u))
            .map(|(yf, (si, ui))| yf + (si + si - ui).scale(rho))
            .collect();
        let mut a_hat = fft.fwd(&a);
        for (h, qi) in a_hat.iter_mut().zip(&q) {
            *h *= qi;
        }
        let m = fft.inv(&a_hat);
        u = m
            .iter()
            .zip(u.iter().zip(&s))
            .map(|(mi, (ui, si))| mi + ui - si)
            .collect();
        if !all_finite(&u) {
            return Err(DoaError::Divergence(t));
        }
        on_iter(t, &u);
    }
    Ok(soft_threshold_vec(&u, kappa2))
}

/// Fast compact ADMM; returns `S_kappa2(u^(T))`.
pub fn fast_compact_admm<T: Scalar>(
    dic: &Dictionary<T>,
    y: &[C<T>],
    cfg: &SolverConfig<T>,
) -> Result<Vec<C<T>>> {
    fast_compact_admm_trace(dic, y, cfg, |_, _| {})
}

/// Circulant matrix represented by its first column, applied via the DFT.
#[derive(Debug, Clone)]
pub struct CirculantOperator<T: Scalar> {
    source_col: Vec<C<T>>,
    eigenvalues: Vec<C<T>>,
    fft: FftPair<T>,
}

impl<T: Scalar> CirculantOperator<T> {
    pub fn from_first_column(col: Vec<C<T>>) -> Self {
        let fft = FftPair::new(col.len());
        let eigenvalues = fft.fwd(&col);
        Self {
            source_col: col,
            eigenvalues,
            fft,
        }
    }

    pub fn eigenvalues(&self) -> &[C<T>] {
        &self.eigenvalues
    }

    pub fn source_col(&self) -> &[C<T>] {
        &self.source_col
    }

    /// `C x = F^{-1}(eig .* F x)`.
    pub fn apply(&self, x: &[C<T>]) -> Vec<C<T>> {
        let mut spec = self.fft.fwd(x);
        for (s, e) in spec.iter_mut().zip(&self.eigenvalues) {
            *s *= e;
        }
        self.fft.inv(&spec)
    }

    /// `C^{-1} x`; errors when an eigenvalue magnitude is below 1e-12.
    pub fn apply_inv(&self, x: &[C<T>]) -> Result<Vec<C<T>>> {
        let floor = fl::<T>(1e-12);
        if self.eigenvalues.iter().any(|e| e.norm() < floor) {
            return Err(DoaError::NearSingularLayer(1e-12));
        }
        let mut spec = self.fft.fwd(x);
        for (s, e) in spec.iter_mut().zip(&self.eigenvalues) {
            *s /= e;
        }
        Ok(self.fft.inv(&spec))
    }
}

/// True when the square matrix is circulant: entry `(i, j)` equals the first
/// column at lag `(i - j) mod N`, within `tol` per entry.
pub fn is_circulant<T: Scalar>(mat: &CMat<T>, tol: T) -> bool {
    assert_eq!(mat.rows(), mat.cols(), "is_circulant needs a square matrix");
    let n = mat.rows();
    for i in 0..n {
        for j in 0..n {
            let lag = (n + i - j) % n;
            if (mat.at(i, j) - mat.at(lag, 0)).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// KKT residual of the LASSO problem at `x`.
///
/// With `g = A^H (A x - y)`: on the support the stationarity defect
/// `|g + lambda * x/|x||`, off the support the bound excess
/// `max(|g| - lambda, 0)`; the maximum over entries is zero iff `x` solves
/// the problem.
pub fn lasso_optimality_residual<T: Scalar>(
    dic: &Dictionary<T>,
    y: &[C<T>],
    lambda: T,
    x: &[C<T>],
) -> T {
    let residual: Vec<C<T>> = dic.apply(x).iter().zip(y).map(|(a, b)| a - b).collect();
    let g = dic.adjoint_apply(&residual);
    let mut worst = T::zero();
    for (xi, gi) in x.iter().zip(&g) {
        let r = xi.norm();
        let defect = if r > T::zero() {
            (gi + xi.scale(lambda / r)).norm()
        } else {
            (gi.norm() - lambda).max(T::zero())
        };
        worst = worst.max(defect);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_signal::{make_ula, steering_vector};
    use crate::scalar::{norm, rel_l2_dist};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn desk_dict() -> Dictionary<f64> {
        Dictionary::build(make_ula::<f64>(16).unwrap(), 64).unwrap()
    }

    fn random_y(m: usize, seed: u64) -> Vec<C<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn soft_threshold_basics() {
        assert_eq!(
            soft_threshold(Complex::new(2.0, 0.0), 1.0),
            Complex::new(1.0, 0.0)
        );
        assert_eq!(
            soft_threshold(Complex::new(0.5, 0.0), 1.0),
            Complex::new(0.0, 0.0)
        );
        let out = soft_threshold(Complex::new(0.0, 1.0), 0.5);
        assert!((out - Complex::new(0.0, 0.5)).norm() < 1e-15);
        assert_eq!(soft_threshold(Complex::new(0.0, 0.0), 0.3), c_zero());
    }

    #[test]
    fn ista_zero_input_stays_zero() {
        let dic = desk_dict();
        let cfg = SolverConfig::for_dictionary(&dic, 0.1, 1.0, 25);
        let x = ista(&dic, &vec![c_zero(); dic.m()], &cfg).unwrap();
        assert_eq!(norm(&x), 0.0);
    }

    #[test]
    fn ista_large_threshold_kills_first_step() {
        let dic = desk_dict();
        let y = random_y(dic.m(), 1);
        let yf = dic.adjoint_apply(&y);
        let max_corr = yf.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        let mut cfg = SolverConfig::for_dictionary(&dic, 0.0, 1.0, 1);
        // kappa1 = mu*lambda >= mu*max|A^H y| elementwise.
        cfg.lambda = max_corr * 1.01;
        let x = ista(&dic, &y, &cfg).unwrap();
        assert_eq!(norm(&x), 0.0);
    }

    #[test]
    fn ista_objective_monotone() {
        let dic = desk_dict();
        for seed in 0..3u64 {
            let y = random_y(dic.m(), seed);
            let cfg = SolverConfig::for_dictionary(&dic, 0.05, 1.0, 60);
            let mut prev = f64::INFINITY;
            ista_trace(&dic, &y, &cfg, |_, x| {
                let obj = lasso_objective(&dic, &y, x, cfg.lambda);
                assert!(obj <= prev * (1.0 + 1e-12) + 1e-15, "seed {seed}");
                prev = obj;
            })
            .unwrap();
        }
    }

    #[test]
    fn ista_divergence_guard_trips() {
        let dic = desk_dict();
        let y = random_y(dic.m(), 2);
        let mut cfg = SolverConfig::for_dictionary(&dic, 0.01, 1.0, 4000);
        cfg.mu = 40.0 * cfg.mu;
        match ista(&dic, &y, &cfg) {
            Err(DoaError::Divergence(_)) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn admm_zero_input_stays_zero() {
        let dic = desk_dict();
        let cfg = SolverConfig::for_dictionary(&dic, 0.1, 1.0, 50);
        let z = admm(&dic, &vec![c_zero(); dic.m()], &cfg).unwrap();
        assert_eq!(norm(&z), 0.0);
        let u = compact_admm(&dic, &vec![c_zero(); dic.m()], &cfg).unwrap();
        assert_eq!(norm(&u), 0.0);
        let f = fast_compact_admm(&dic, &vec![c_zero(); dic.m()], &cfg).unwrap();
        assert_eq!(norm(&f), 0.0);
    }

    #[test]
    fn compact_admm_single_step_closed_form() {
        // From u = 0: u^(1) = Q y_F, output S_kappa2(Q y_F).
        let dic = desk_dict();
        let y = random_y(dic.m(), 3);
        let cfg = SolverConfig::for_dictionary(&dic, 0.2, 1.5, 1);
        let out = compact_admm(&dic, &y, &cfg).unwrap();

        let n = dic.n();
        let mut k = dic.gram_dense();
        for i in 0..n {
            *k.at_mut(i, i) += Complex::new(cfg.rho, 0.0);
        }
        let lu = LuFactors::new(&k, 1e-300).unwrap();
        let u1 = lu.solve(&dic.adjoint_apply(&y));
        let expect = soft_threshold_vec(&u1, cfg.kappa2());
        assert!(rel_l2_dist(&out, &expect) < 1e-12);
    }

    #[test]
    fn fast_matches_compact_on_iterates() {
        let dic = desk_dict();
        let y = random_y(dic.m(), 4);
        let cfg = SolverConfig::for_dictionary(&dic, 0.1, 1.0, 80);
        let mut compact_iters: Vec<Vec<C<f64>>> = Vec::new();
        let out_c = compact_admm_trace(&dic, &y, &cfg, |_, u| compact_iters.push(u.to_vec()))
            .unwrap();
        let mut worst = 0.0f64;
        let out_f = fast_compact_admm_trace(&dic, &y, &cfg, |t, u| {
            worst = worst.max(rel_l2_dist(u, &compact_iters[t - 1]));
        })
        .unwrap();
        assert!(worst < 1e-10, "iterate drift {worst}");
        assert!(rel_l2_dist(&out_f, &out_c) < 1e-10);
    }

    #[test]
    fn fast_rejects_off_half_wavelength() {
        let geom = make_ula::<f64>(8).unwrap().with_gamma(0.25).unwrap();
        let dic = Dictionary::build(geom, 32).unwrap();
        let cfg = SolverConfig::for_dictionary(&dic, 0.1, 1.0, 5);
        match fast_compact_admm(&dic, &random_y(8, 5), &cfg) {
            Err(DoaError::StructureViolation(_)) => {}
            other => panic!("expected structure violation, got {other:?}"),
        }
    }

    #[test]
    fn circulant_operator_identity_and_column() {
        let n = 16;
        let ones = vec![Complex::new(1.0, 0.0); n];
        // eigenvalues all 1 <=> first column e_1.
        let mut e1 = vec![c_zero(); n];
        e1[0] = Complex::new(1.0, 0.0);
        let op = CirculantOperator::from_first_column(e1.clone());
        let x = random_y(n, 6);
        assert!(rel_l2_dist(&op.apply(&x), &x) < 1e-12);
        for (e, o) in op.eigenvalues().iter().zip(&ones) {
            assert!((e - o).norm() < 1e-12);
        }

        let dic = desk_dict();
        let op_b = CirculantOperator::from_first_column(dic.gram_col().to_vec());
        let mut e1n = vec![c_zero(); dic.n()];
        e1n[0] = Complex::new(1.0, 0.0);
        let col = op_b.apply(&e1n);
        assert!(rel_l2_dist(&col, dic.gram_col()) < 1e-10);
    }

    #[test]
    fn circulant_apply_matches_dense() {
        for n in [5usize, 16, 64] {
            let col = random_y(n, 100 + n as u64);
            let op = CirculantOperator::from_first_column(col.clone());
            let dense = CMat::from_fn(n, n, |i, j| col[(n + i - j) % n]);
            let x = random_y(n, 200 + n as u64);
            let want = dense.matvec(&x);
            let got = op.apply(&x);
            assert!(rel_l2_dist(&got, &want) < 1e-10, "n={n}");
            // Inverse roundtrip.
            let back = op.apply(&op.apply_inv(&x).unwrap());
            assert!(rel_l2_dist(&back, &x) < 1e-9);
        }
    }

    #[test]
    fn wrong_normalization_is_caught_by_dense_oracle() {
        // A tampered eigenvalue scaling (for instance treating the unitary
        // DFT of the column as the spectrum) must not slip past the dense
        // multiply comparison.
        let n = 16usize;
        let col = random_y(n, 55);
        let op = CirculantOperator::from_first_column(col.clone());
        let dense = CMat::from_fn(n, n, |i, j| col[(n + i - j) % n]);
        let x = random_y(n, 56);
        let want = dense.matvec(&x);
        let scale = 1.0 / (n as f64).sqrt();
        let tampered: Vec<C<f64>> = {
            let bad_eigs: Vec<C<f64>> = op.eigenvalues().iter().map(|e| e.scale(scale)).collect();
            let fft = crate::fft::FftPair::new(n);
            let mut spec = fft.fwd(&x);
            for (s, e) in spec.iter_mut().zip(&bad_eigs) {
                *s *= e;
            }
            fft.inv(&spec)
        };
        assert!(rel_l2_dist(&op.apply(&x), &want) < 1e-10);
        assert!(rel_l2_dist(&tampered, &want) > 1e-2);
    }

    #[test]
    fn is_circulant_identity_and_gram() {
        let eye = CMat::<f64>::identity(12);
        assert!(is_circulant(&eye, 1e-12));

        let dic = desk_dict();
        let tol = 1e-10 * dic.m() as f64;
        assert!(is_circulant(&dic.gram_dense(), tol));

        let off = Dictionary::build(
            make_ula::<f64>(4).unwrap().with_gamma(0.25).unwrap(),
            16,
        )
        .unwrap();
        assert!(!is_circulant(&off.gram_dense(), tol));
    }

    #[test]
    fn kkt_residual_zero_cases() {
        let dic = desk_dict();
        let y = random_y(dic.m(), 8);
        let yf = dic.adjoint_apply(&y);
        let max_corr = yf.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        let zero = vec![c_zero(); dic.n()];
        // x = 0 optimal for lambda >= max|A^H y|.
        let r = lasso_optimality_residual(&dic, &y, max_corr * 1.5, &zero);
        assert_eq!(r, 0.0);
        // Otherwise residual is max|A^H y| - lambda.
        let lam = 0.25 * max_corr;
        let r2 = lasso_optimality_residual(&dic, &y, lam, &zero);
        assert!((r2 - (max_corr - lam)).abs() < 1e-12);
    }

    #[test]
    fn solvers_run_in_single_precision() {
        let dic = Dictionary::build(make_ula::<f32>(8).unwrap(), 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let y: Vec<C<f32>> = (0..8)
            .map(|_| Complex::new(rng.gen_range(-1.0f32..1.0), rng.gen_range(-1.0f32..1.0)))
            .collect();
        let cfg = SolverConfig::for_dictionary(&dic, 0.1f32, 1.0, 50);
        let dense = compact_admm(&dic, &y, &cfg).unwrap();
        let fast = fast_compact_admm(&dic, &y, &cfg).unwrap();
        assert!(rel_l2_dist(&fast, &dense) < 1e-4);
    }

    #[test]
    fn noiseless_single_target_recovered() {
        let dic = desk_dict();
        let f = dic.grid()[20];
        let a = steering_vector(dic.geometry(), f).unwrap();
        let amp = Complex::new(0.8, 0.3);
        let y: Vec<C<f64>> = a.iter().map(|v| v * amp).collect();
        let max_corr = dic
            .adjoint_apply(&y)
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        let cfg = SolverConfig::for_dictionary(&dic, 0.1 * max_corr, 1.0, 1000);
        let x = ista(&dic, &y, &cfg).unwrap();
        let best = x
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap()
            .0;
        assert_eq!(best, 20);
        let res = lasso_optimality_residual(&dic, &y, cfg.lambda, &x);
        assert!(res < 1e-6, "KKT residual {res}");
    }
}
