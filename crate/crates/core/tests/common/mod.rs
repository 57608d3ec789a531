//! Shared test oracles, kept independent of the solver implementations they
//! check.

use doa_core::array_signal::Dictionary;
use num_complex::Complex;

pub type C64 = Complex<f64>;

/// Complex LASSO by cyclic coordinate descent, run to a tight tolerance.
///
/// Solves `min_x 0.5*||y - A x||^2 + lambda*||x||_1` using only dictionary
/// entries and its own shrinkage; the per-coordinate subproblem is closed-
/// form because every column of `A` has squared norm `M`.
pub fn coordinate_descent_lasso(
    dic: &Dictionary<f64>,
    y: &[C64],
    lambda: f64,
    tol: f64,
    max_sweeps: usize,
) -> Vec<C64> {
    let (m, n) = (dic.m(), dic.n());
    let a = dic.matrix();
    let col_norm_sq = m as f64;
    let mut x = vec![C64::new(0.0, 0.0); n];
    let mut residual: Vec<C64> = y.to_vec();
    for _ in 0..max_sweeps {
        let mut max_step = 0.0f64;
        for j in 0..n {
            let mut z = x[j] * col_norm_sq;
            for i in 0..m {
                z += a.at(i, j).conj() * residual[i];
            }
            // Shrink: S_lambda(z)/M, written out so this oracle does not
            // share code with the solvers under test.
            let r = z.norm();
            let x_new = if r <= lambda {
                C64::new(0.0, 0.0)
            } else {
                z * ((r - lambda) / (r * col_norm_sq))
            };
            let delta = x_new - x[j];
            if delta.norm() > 0.0 {
                for i in 0..m {
                    residual[i] -= a.at(i, j) * delta;
                }
                x[j] = x_new;
            }
            max_step = max_step.max(delta.norm());
        }
        if max_step < tol {
            break;
        }
    }
    x
}

/// NMSE between two complex vectors.
pub fn nmse(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    num / den
}

/// Brute-force matcher over all bins, written directly from the detection
/// definitions: candidates within `delta1` wrap-aware bins whose peak value
/// reaches `delta2` of the true amplitude.
pub struct BruteForceMatch {
    pub p_d: f64,
    /// Mean squared angular error over detected targets (radians^2).
    pub mean_sq_err: Option<f64>,
}

pub fn brute_force_match(
    dic: &Dictionary<f64>,
    true_bins: &[usize],
    true_amps: &[C64],
    x_pk: &[f64],
    delta1: usize,
    delta2: f64,
) -> BruteForceMatch {
    let n = x_pk.len();
    let gamma = dic.gamma();
    let angle = |bin: usize| -> f64 { -(dic.grid()[bin] / gamma).clamp(-1.0, 1.0).asin() };
    let circ = |a: usize, b: usize| -> usize {
        let d = a.abs_diff(b);
        d.min(n - d)
    };
    let mut hits = 0usize;
    let mut sq_sum = 0.0f64;
    for (&r, amp) in true_bins.iter().zip(true_amps) {
        let mut best: Option<usize> = None;
        for j in 0..n {
            if x_pk[j] <= 0.0 || circ(r, j) > delta1 {
                continue;
            }
            if x_pk[j] / amp.norm() < delta2 {
                continue;
            }
            best = match best {
                None => Some(j),
                Some(cur) => {
                    if (circ(r, j), j) < (circ(r, cur), cur) {
                        Some(j)
                    } else {
                        Some(cur)
                    }
                }
            };
        }
        if let Some(j) = best {
            hits += 1;
            let d = angle(r) - angle(j);
            sq_sum += d * d;
        }
    }
    BruteForceMatch {
        p_d: hits as f64 / true_bins.len() as f64,
        mean_sq_err: (hits > 0).then(|| sq_sum / hits as f64),
    }
}
