//! Built-in cross-checks between independently implemented routes.
//!
//! These are the fast diagnostics an operator can run on any build:
//! the FFT-diagonalized solver against the dense-factorization solver, each
//! network at initialization against its parent iterative method, the
//! circulant structure test on both sides of the `gamma = 1/2` boundary, and
//! finite-difference verification of the hand-written gradients.

use crate::array_signal::{draw_scene, make_sla, make_ula, synthesize_measurement, Dictionary};
use crate::error::Result;
use crate::nets::{NetKind, Network};
use crate::scalar::{rel_l2_dist, C};
use crate::solvers::{
    compact_admm, fast_compact_admm, is_circulant, ista, SolverConfig,
};
use crate::training::{grad_check, LossConfig};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

fn random_snapshot(dic: &Dictionary<f64>, seed: u64) -> Result<Vec<C<f64>>> {
    let scene = draw_scene(dic, 1..=4, 1.0 / dic.m() as f64, seed)?;
    Ok(synthesize_measurement(dic, &scene, 15.0, seed ^ 0xABCD)?.measurement)
}

/// Alg. 2 (FFT route) against Alg. 1 (dense factorization) on random
/// ULA/SLA instances.
pub fn check_fast_admm_equivalence(seed: u64) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for i in 0..6u64 {
        let dic = if i % 2 == 0 {
            Dictionary::build(make_ula::<f64>(16)?, 64)?
        } else {
            Dictionary::build(make_sla::<f64>(16, 40, seed + i)?, 64)?
        };
        let y = random_snapshot(&dic, seed + 10 + i)?;
        let cfg = SolverConfig::for_dictionary(&dic, 0.1, 1.0, 100);
        let dense = compact_admm(&dic, &y, &cfg)?;
        let fast = fast_compact_admm(&dic, &y, &cfg)?;
        worst = worst.max(rel_l2_dist(&fast, &dense));
    }
    Ok(CheckResult::new(
        "fft-solver-equivalence",
        worst < 1e-10,
        format!("worst relative l2 difference {worst:.2e} (bound 1e-10)"),
    ))
}

/// Every architecture at initialization reproduces its parent method.
pub fn check_init_equivalence(seed: u64) -> Result<CheckResult> {
    let dic = Dictionary::build(make_ula::<f64>(16)?, 64)?;
    let t = 30;
    let beta0 = 0.1;
    let rho0 = 1.0;
    let mut worst = (0.0f64, String::new());
    for i in 0..3u64 {
        let y = random_snapshot(&dic, seed + 20 + i)?;
        let admm_cfg = SolverConfig::for_dictionary(&dic, beta0 / rho0, rho0, t);
        let parent_admm = compact_admm(&dic, &y, &admm_cfg)?;
        let mut ista_cfg = SolverConfig::for_dictionary(&dic, 0.0, rho0, t);
        ista_cfg.lambda = beta0 / ista_cfg.mu;
        let parent_ista = ista(&dic, &y, &ista_cfg)?;
        for kind in NetKind::ALL {
            let net = Network::init(kind, &dic, t, beta0, rho0)?;
            let (x, _) = net.forward(&dic, &y)?;
            let parent = if kind.is_admm_family() {
                &parent_admm
            } else {
                &parent_ista
            };
            let d = rel_l2_dist(&x, parent);
            if d > worst.0 {
                worst = (d, kind.to_string());
            }
        }
    }
    Ok(CheckResult::new(
        "init-equivalence",
        worst.0 < 1e-9,
        format!("worst deviation {:.2e} ({}) (bound 1e-9)", worst.0, worst.1),
    ))
}

/// The Gram matrix is circulant exactly at `gamma = 1/2`.
pub fn check_circulant_boundary(seed: u64) -> Result<CheckResult> {
    let mut ok = true;
    let mut detail = String::new();
    for i in 0..4u64 {
        let geom = make_sla::<f64>(12, 40, seed + 30 + i)?;
        let dic_half = Dictionary::build(geom.clone(), 64)?;
        let tol = 1e-10 * dic_half.m() as f64;
        if !is_circulant(&dic_half.gram_dense(), tol) {
            ok = false;
            detail = format!("gamma=1/2 Gram not circulant (sla seed {})", seed + 30 + i);
            break;
        }
        for gamma in [0.2, 0.25, 0.4] {
            let dic_off = Dictionary::build(geom.clone().with_gamma(gamma)?, 64)?;
            if is_circulant(&dic_off.gram_dense(), tol) {
                ok = false;
                detail = format!("gamma={gamma} Gram wrongly circulant");
                break;
            }
        }
    }
    if ok {
        detail = "circulant at gamma=1/2, non-circulant at 0.2/0.25/0.4".into();
    }
    Ok(CheckResult::new("circulant-boundary", ok, detail))
}

/// Finite-difference verification of the backward pass, all architectures.
pub fn check_gradients(seed: u64) -> Result<CheckResult> {
    let dic = Dictionary::build(make_ula::<f64>(8)?, 16)?;
    let scene = draw_scene(&dic, 1..=3, 1.0 / 8.0, seed + 40)?;
    let sample = synthesize_measurement(&dic, &scene, 12.0, seed + 41)?;
    let mut worst = (0.0f64, String::new());
    for kind in NetKind::ALL {
        let net = Network::init(kind, &dic, 3, 0.1, 1.0)?;
        let err = grad_check(&net, &dic, &sample, &LossConfig::default(), 1e-6)?;
        if err > worst.0 {
            worst = (err, kind.to_string());
        }
    }
    Ok(CheckResult::new(
        "gradient-check",
        worst.0 < 1e-5,
        format!("worst error {:.2e} ({}) (bound 1e-5)", worst.0, worst.1),
    ))
}

/// Runs the whole suite.
pub fn run_all(seed: u64) -> Result<Vec<CheckResult>> {
    Ok(vec![
        check_fast_admm_equivalence(seed)?,
        check_init_equivalence(seed)?,
        check_circulant_boundary(seed)?,
        check_gradients(seed)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_build_passes_all_checks() {
        for check in run_all(7).unwrap() {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
    }
}
