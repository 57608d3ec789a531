//! Compiled forward passes for the six architectures.
//!
//! [`Network::compile`] precomputes what inference reuses across samples:
//! LU factors of `(W + rho I)` for ADMM-Net, the diagonal `1/(w + rho)` (or
//! `1/(Fw + rho)`) for the circulant variants, and the length-2N embedding
//! spectrum of the Toeplitz generator for TLISTA/THLISTA. The trace returned
//! by [`CompiledNet::forward`] carries exactly the intermediates the
//! backward pass consumes.

use super::{LayerParams, NetKind, Network};
use crate::array_signal::Dictionary;
use crate::error::{DoaError, Result};
use crate::fft::FftPair;
use crate::linalg::{CMat, LuFactors};
use crate::scalar::{c_zero, fl, Scalar, C};
use crate::solvers::soft_threshold_vec;
use num_complex::Complex;

/// Per-layer data derived from the parameters, fixed during a forward pass.
#[derive(Debug)]
pub(crate) enum CompiledLayer<T: Scalar> {
    /// LISTA: parameters are used directly.
    Plain,
    /// TLISTA/THLISTA: spectrum of the length-2N circulant embedding of the
    /// generator.
    ToeplitzSpec { w1_spec: Vec<C<T>> },
    /// ADMM-Net: factored `(W + rho I)`.
    Factored { lu: LuFactors<T> },
    /// CADMM-Net / CHADMM-Net: elementwise `1/(spectrum + rho)`.
    Diagonal { q: Vec<C<T>> },
}

/// A network plus everything precomputable for repeated forward passes.
#[derive(Debug)]
pub struct CompiledNet<'a, T: Scalar> {
    pub(crate) net: &'a Network<T>,
    pub(crate) layers: Vec<CompiledLayer<T>>,
    pub(crate) fft_n: Option<FftPair<T>>,
    pub(crate) fft_2n: Option<FftPair<T>>,
}

/// Layer intermediates cached for the backward pass.
#[derive(Debug, Clone)]
pub enum LayerAux<T: Scalar> {
    /// ISTA family: pre-threshold activation.
    Pre { p: Vec<C<T>> },
    /// TLISTA family: pre-threshold activation and the spectrum of the
    /// zero-padded layer input.
    PreSpec { p: Vec<C<T>>, x_spec: Vec<C<T>> },
    /// ADMM-Net: the linear-solve output `m = (W + rho I)^{-1} a`.
    Solve { m: Vec<C<T>> },
    /// Circulant ADMM variants: the spectrum of the solve input `a`.
    Spec { a_hat: Vec<C<T>> },
}

/// Full activation record of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T: Scalar> {
    /// `u^(0)..u^(T)` for the ADMM family, `x^(0)..x^(T)` for the ISTA
    /// family.
    pub states: Vec<Vec<C<T>>>,
    pub aux: Vec<LayerAux<T>>,
    /// The input snapshot.
    pub y: Vec<C<T>>,
    /// `A^H y`, present for the ADMM family.
    pub y_f: Option<Vec<C<T>>>,
    pub x_out: Vec<C<T>>,
}

impl<T: Scalar> Network<T> {
    /// Precomputes per-layer solve data; fails on near-singular layers.
    pub fn compile(&self) -> Result<CompiledNet<'_, T>> {
        let n = self.n();
        let needs_fft_n = matches!(self.kind(), NetKind::CadmmNet | NetKind::ChadmmNet);
        let needs_fft_2n = matches!(self.kind(), NetKind::Tlista | NetKind::Thlista);
        let fft_n = needs_fft_n.then(|| FftPair::new(n));
        let fft_2n = needs_fft_2n.then(|| FftPair::new(2 * n));

        let mut layers = Vec::with_capacity(self.depth());
        for params in self.layers() {
            layers.push(match params {
                LayerParams::Lista { .. } => CompiledLayer::Plain,
                LayerParams::Tlista { w1, .. } | LayerParams::Thlista { w1, .. } => {
                    let fft = fft_2n.as_ref().unwrap();
                    CompiledLayer::ToeplitzSpec {
                        w1_spec: fft.fwd(&embed_generator(w1)),
                    }
                }
                LayerParams::AdmmNet { w, rho, .. } => {
                    CompiledLayer::Factored {
                        lu: factor_shifted(w, *rho)?,
                    }
                }
                LayerParams::CadmmNet { w, rho, .. } => CompiledLayer::Diagonal {
                    q: diagonal_inverse(w, *rho)?,
                },
                LayerParams::ChadmmNet { w, rho, .. } => {
                    let spectrum = fft_n.as_ref().unwrap().fwd(w);
                    CompiledLayer::Diagonal {
                        q: diagonal_inverse(&spectrum, *rho)?,
                    }
                }
            });
        }
        Ok(CompiledNet {
            net: self,
            layers,
            fft_n,
            fft_2n,
        })
    }

    /// Convenience single-shot forward; compiles first.
    pub fn forward(
        &self,
        dic: &Dictionary<T>,
        y: &[C<T>],
    ) -> Result<(Vec<C<T>>, ForwardTrace<T>)> {
        self.compile()?.forward(dic, y)
    }
}

/// `(W + rho I)` factored, with a Tikhonov retry when the factorization
/// fails.
fn factor_shifted<T: Scalar>(w: &CMat<T>, rho: T) -> Result<LuFactors<T>> {
    let n = w.rows();
    let mut k = w.clone();
    for i in 0..n {
        *k.at_mut(i, i) += Complex::new(rho, T::zero());
    }
    match LuFactors::new(&k, fl(1e-300)) {
        Ok(lu) => Ok(lu),
        Err(_) => {
            let ridge: T = fl(1e-10);
            for i in 0..n {
                *k.at_mut(i, i) += Complex::new(ridge, T::zero());
            }
            LuFactors::new(&k, fl(1e-300))
                .map_err(|_| DoaError::Numerical("layer system singular even with ridge".into()))
        }
    }
}

fn diagonal_inverse<T: Scalar>(spectrum: &[C<T>], rho: T) -> Result<Vec<C<T>>> {
    let one = Complex::new(T::one(), T::zero());
    let shift = Complex::new(rho, T::zero());
    let floor: T = fl(1e-12);
    spectrum
        .iter()
        .map(|&s| {
            let d = s + shift;
            if d.norm() < floor {
                Err(DoaError::NearSingularLayer(1e-12))
            } else {
                Ok(one / d)
            }
        })
        .collect()
}

/// Circulant embedding (length 2N) of a `2N-1` Toeplitz generator.
pub(crate) fn embed_generator<T: Scalar>(gen: &[C<T>]) -> Vec<C<T>> {
    let n = (gen.len() + 1) / 2;
    let l = 2 * n;
    let mut c = vec![c_zero(); l];
    c[..n].copy_from_slice(&gen[n - 1..]);
    for s in 1..n {
        c[l - s] = gen[n - 1 - s];
    }
    c
}

/// `Toeplitz(gen) x` through the embedding spectrum. Returns the product and
/// the padded-input spectrum (reused by the backward pass).
pub(crate) fn toeplitz_multiply<T: Scalar>(
    w1_spec: &[C<T>],
    x: &[C<T>],
    fft: &FftPair<T>,
) -> (Vec<C<T>>, Vec<C<T>>) {
    let l = w1_spec.len();
    let n = l / 2;
    let mut padded = vec![c_zero(); l];
    padded[..n].copy_from_slice(x);
    let x_spec = fft.fwd(&padded);
    let prod: Vec<C<T>> = w1_spec.iter().zip(&x_spec).map(|(a, b)| a * b).collect();
    let mut full = fft.inv(&prod);
    full.truncate(n);
    (full, x_spec)
}

/// `Toeplitz(gen)^H g`; the embedding spectrum of the adjoint is the
/// conjugate of the forward spectrum.
pub(crate) fn toeplitz_adjoint_multiply<T: Scalar>(
    w1_spec: &[C<T>],
    g: &[C<T>],
    fft: &FftPair<T>,
) -> Vec<C<T>> {
    let l = w1_spec.len();
    let n = l / 2;
    let mut padded = vec![c_zero(); l];
    padded[..n].copy_from_slice(g);
    let g_spec = fft.fwd(&padded);
    let prod: Vec<C<T>> = w1_spec
        .iter()
        .zip(&g_spec)
        .map(|(a, b)| a.conj() * b)
        .collect();
    let mut full = fft.inv(&prod);
    full.truncate(n);
    full
}

struct LayerOut<T: Scalar> {
    state: Vec<C<T>>,
    aux: LayerAux<T>,
}

fn lista_step<T: Scalar>(
    w1: &CMat<T>,
    w2: &CMat<T>,
    beta: T,
    x_prev: &[C<T>],
    y: &[C<T>],
) -> LayerOut<T> {
    let mut p = w1.matvec(x_prev);
    let w2y = w2.matvec(y);
    for (pi, vi) in p.iter_mut().zip(&w2y) {
        *pi += vi;
    }
    let state = soft_threshold_vec(&p, beta);
    LayerOut {
        state,
        aux: LayerAux::Pre { p },
    }
}

fn tlista_step<T: Scalar>(
    w1_spec: &[C<T>],
    w2: &CMat<T>,
    beta: T,
    x_prev: &[C<T>],
    y: &[C<T>],
    fft: &FftPair<T>,
) -> LayerOut<T> {
    let (mut p, x_spec) = toeplitz_multiply(w1_spec, x_prev, fft);
    let w2y = w2.matvec(y);
    for (pi, vi) in p.iter_mut().zip(&w2y) {
        *pi += vi;
    }
    let state = soft_threshold_vec(&p, beta);
    LayerOut {
        state,
        aux: LayerAux::PreSpec { p, x_spec },
    }
}

/// Shared ADMM-family solve input `a = y_F + rho*(2 S_beta(u) - u)`; also
/// returns `s = S_beta(u)`.
fn admm_solve_input<T: Scalar>(
    y_f: &[C<T>],
    u_prev: &[C<T>],
    rho: T,
    beta: T,
) -> (Vec<C<T>>, Vec<C<T>>) {
    let s = soft_threshold_vec(u_prev, beta);
    let a = y_f
        .iter()
        .zip(s.iter().zip(u_prev))
        .map(|(yf, (si, ui))| *yf + (*si + *si - *ui).scale(rho))
        .collect();
    (a, s)
}

fn admm_finish<T: Scalar>(m: &[C<T>], u_prev: &[C<T>], s: &[C<T>]) -> Vec<C<T>> {
    m.iter()
        .zip(u_prev.iter().zip(s))
        .map(|(mi, (ui, si))| *mi + *ui - *si)
        .collect()
}

fn admm_dense_step<T: Scalar>(
    lu: &LuFactors<T>,
    rho: T,
    beta: T,
    u_prev: &[C<T>],
    y_f: &[C<T>],
) -> LayerOut<T> {
    let (a, s) = admm_solve_input(y_f, u_prev, rho, beta);
    let m = lu.solve(&a);
    let state = admm_finish(&m, u_prev, &s);
    LayerOut {
        state,
        aux: LayerAux::Solve { m },
    }
}

fn admm_diag_step<T: Scalar>(
    q: &[C<T>],
    rho: T,
    beta: T,
    u_prev: &[C<T>],
    y_f: &[C<T>],
    fft: &FftPair<T>,
) -> LayerOut<T> {
    let (a, s) = admm_solve_input(y_f, u_prev, rho, beta);
    let a_hat = fft.fwd(&a);
    let h: Vec<C<T>> = q.iter().zip(&a_hat).map(|(qi, ai)| qi * ai).collect();
    let m = fft.inv(&h);
    let state = admm_finish(&m, u_prev, &s);
    LayerOut {
        state,
        aux: LayerAux::Spec { a_hat },
    }
}

impl<T: Scalar> CompiledNet<'_, T> {
    pub fn network(&self) -> &Network<T> {
        self.net
    }

    /// Runs the network on one snapshot, returning the output spectrum and
    /// the activation trace for the backward pass.
    pub fn forward(&self, dic: &Dictionary<T>, y: &[C<T>]) -> Result<(Vec<C<T>>, ForwardTrace<T>)> {
        let net = self.net;
        if y.len() != net.m() || dic.m() != net.m() || dic.n() != net.n() {
            return Err(DoaError::DimensionMismatch(format!(
                "network is {}x{}, got snapshot of length {} on a {}x{} dictionary",
                net.m(),
                net.n(),
                y.len(),
                dic.m(),
                dic.n()
            )));
        }
        let n = net.n();
        let admm_family = net.kind().is_admm_family();
        let y_f = if admm_family {
            Some(match net.kind() {
                // The circulant variants already require gamma = 1/2, where
                // A^H y is one zero-scattered N-point DFT.
                NetKind::CadmmNet | NetKind::ChadmmNet => dic.adjoint_apply_fft(y)?,
                _ => dic.adjoint_apply(y),
            })
        } else {
            None
        };

        let mut states: Vec<Vec<C<T>>> = Vec::with_capacity(net.depth() + 1);
        states.push(vec![c_zero(); n]);
        let mut aux: Vec<LayerAux<T>> = Vec::with_capacity(net.depth());

        for (params, compiled) in net.layers().iter().zip(&self.layers) {
            let prev = states.last().unwrap();
            let out = match (params, compiled) {
                (LayerParams::Lista { w1, w2, beta }, CompiledLayer::Plain) => {
                    lista_step(w1, w2, *beta, prev, y)
                }
                (
                    LayerParams::Tlista { w2, beta, .. } | LayerParams::Thlista { w2, beta, .. },
                    CompiledLayer::ToeplitzSpec { w1_spec },
                ) => tlista_step(w1_spec, w2, *beta, prev, y, self.fft_2n.as_ref().unwrap()),
                (LayerParams::AdmmNet { rho, beta, .. }, CompiledLayer::Factored { lu }) => {
                    admm_dense_step(lu, *rho, *beta, prev, y_f.as_ref().unwrap())
                }
                (
                    LayerParams::CadmmNet { rho, beta, .. }
                    | LayerParams::ChadmmNet { rho, beta, .. },
                    CompiledLayer::Diagonal { q },
                ) => admm_diag_step(
                    q,
                    *rho,
                    *beta,
                    prev,
                    y_f.as_ref().unwrap(),
                    self.fft_n.as_ref().unwrap(),
                ),
                _ => unreachable!("layer kind and compiled kind always match"),
            };
            states.push(out.state);
            aux.push(out.aux);
        }

        let x_out = if admm_family {
            soft_threshold_vec(states.last().unwrap(), net.final_beta())
        } else {
            states.last().unwrap().clone()
        };
        let trace = ForwardTrace {
            states,
            aux,
            y: y.to_vec(),
            y_f,
            x_out: x_out.clone(),
        };
        Ok((x_out, trace))
    }

    /// Forward pass without keeping the trace.
    pub fn forward_output(&self, dic: &Dictionary<T>, y: &[C<T>]) -> Result<Vec<C<T>>> {
        Ok(self.forward(dic, y)?.0)
    }
}

/// One layer applied to `prev`. `input` is the snapshot `y` for the ISTA
/// family and the correlation `y_F = A^H y` for the ADMM family.
pub fn forward_layer<T: Scalar>(
    params: &LayerParams<T>,
    prev: &[C<T>],
    input: &[C<T>],
) -> Result<Vec<C<T>>> {
    let out = match params {
        LayerParams::Lista { w1, w2, beta } => lista_step(w1, w2, *beta, prev, input),
        LayerParams::Tlista { w1, w2, beta } | LayerParams::Thlista { w1, w2, beta } => {
            let n = prev.len();
            let fft = FftPair::new(2 * n);
            let w1_spec = fft.fwd(&embed_generator(w1));
            tlista_step(&w1_spec, w2, *beta, prev, input, &fft)
        }
        LayerParams::AdmmNet { w, rho, beta } => {
            let lu = factor_shifted(w, *rho)?;
            admm_dense_step(&lu, *rho, *beta, prev, input)
        }
        LayerParams::CadmmNet { w, rho, beta } => {
            let q = diagonal_inverse(w, *rho)?;
            admm_diag_step(&q, *rho, *beta, prev, input, &FftPair::new(prev.len()))
        }
        LayerParams::ChadmmNet { w, rho, beta } => {
            let fft = FftPair::new(prev.len());
            let q = diagonal_inverse(&fft.fwd(w), *rho)?;
            admm_diag_step(&q, *rho, *beta, prev, input, &fft)
        }
    };
    Ok(out.state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_signal::{draw_scene, make_ula, synthesize_measurement};
    use crate::scalar::{norm, rel_l2_dist};
    use crate::solvers::{fast_compact_admm, ista, SolverConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dict() -> Dictionary<f64> {
        Dictionary::build(make_ula::<f64>(8).unwrap(), 32).unwrap()
    }

    fn sample_y(dic: &Dictionary<f64>, seed: u64) -> Vec<C<f64>> {
        let scene = draw_scene(dic, 1..=3, 1.0 / 8.0, seed).unwrap();
        synthesize_measurement(dic, &scene, 15.0, seed + 1)
            .unwrap()
            .measurement
    }

    #[test]
    fn toeplitz_multiply_matches_dense() {
        let n = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let gen: Vec<C<f64>> = (0..2 * n - 1)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let x: Vec<C<f64>> = (0..n)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let fft = FftPair::new(2 * n);
        let spec = fft.fwd(&embed_generator(&gen));
        let (fast, _) = toeplitz_multiply(&spec, &x, &fft);
        let dense = super::super::toeplitz_dense(&gen);
        let want = dense.matvec(&x);
        assert!(rel_l2_dist(&fast, &want) < 1e-12);

        // Adjoint route.
        let g: Vec<C<f64>> = (0..n)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let fast_adj = toeplitz_adjoint_multiply(&spec, &g, &fft);
        let dense_adj = CMat::from_fn(n, n, |i, j| dense.at(j, i).conj());
        let want_adj = dense_adj.matvec(&g);
        assert!(rel_l2_dist(&fast_adj, &want_adj) < 1e-12);
    }

    #[test]
    fn zero_snapshot_gives_zero_output() {
        let dic = dict();
        let y = vec![c_zero(); dic.m()];
        for kind in NetKind::ALL {
            let net = Network::init(kind, &dic, 4, 0.1, 1.0).unwrap();
            let (x, _) = net.forward(&dic, &y).unwrap();
            assert_eq!(norm(&x), 0.0, "{kind}");
        }
    }

    #[test]
    fn cadmm_net_at_init_equals_fast_solver() {
        let dic = dict();
        let y = sample_y(&dic, 3);
        for t in [1usize, 10, 30] {
            let net = Network::init(NetKind::CadmmNet, &dic, t, 0.1, 1.0).unwrap();
            let (x, _) = net.forward(&dic, &y).unwrap();
            // kappa2 = rho*lambda = beta0 at rho=1, lambda=beta0.
            let cfg = SolverConfig::for_dictionary(&dic, 0.1, 1.0, t);
            let solver = fast_compact_admm(&dic, &y, &cfg).unwrap();
            assert!(rel_l2_dist(&x, &solver) < 1e-10, "t={t}");
        }
    }

    #[test]
    fn chadmm_net_at_init_equals_fast_solver() {
        let dic = dict();
        let y = sample_y(&dic, 4);
        let net = Network::init(NetKind::ChadmmNet, &dic, 12, 0.1, 1.0).unwrap();
        let (x, _) = net.forward(&dic, &y).unwrap();
        let cfg = SolverConfig::for_dictionary(&dic, 0.1, 1.0, 12);
        let solver = fast_compact_admm(&dic, &y, &cfg).unwrap();
        assert!(rel_l2_dist(&x, &solver) < 1e-9);
    }

    #[test]
    fn tlista_layer_equals_one_ista_iteration() {
        let dic = dict();
        let y = sample_y(&dic, 5);
        let mut cfg = SolverConfig::for_dictionary(&dic, 0.0, 1.0, 1);
        // Match the layer threshold: kappa1 = mu*lambda = beta0.
        cfg.lambda = 0.1 / cfg.mu;
        let one_iter = ista(&dic, &y, &cfg).unwrap();

        for kind in [NetKind::Lista, NetKind::Tlista, NetKind::Thlista] {
            let net = Network::init(kind, &dic, 1, 0.1, 1.0).unwrap();
            let x0 = vec![c_zero(); dic.n()];
            let out = forward_layer(&net.layers()[0], &x0, &y).unwrap();
            assert!(rel_l2_dist(&out, &one_iter) < 1e-10, "{kind}");
        }
    }

    #[test]
    fn forward_layer_matches_full_forward() {
        let dic = dict();
        let y = sample_y(&dic, 6);
        let net = Network::init(NetKind::AdmmNet, &dic, 2, 0.1, 1.0).unwrap();
        let (_, trace) = net.forward(&dic, &y).unwrap();
        let y_f = dic.adjoint_apply(&y);
        let u1 = forward_layer(&net.layers()[0], &trace.states[0], &y_f).unwrap();
        assert!(rel_l2_dist(&u1, &trace.states[1]) < 1e-12);
        let u2 = forward_layer(&net.layers()[1], &u1, &y_f).unwrap();
        assert!(rel_l2_dist(&u2, &trace.states[2]) < 1e-12);
    }

    #[test]
    fn near_singular_layer_rejected() {
        let dic = dict();
        let mut net = Network::init(NetKind::CadmmNet, &dic, 1, 0.1, 1.0).unwrap();
        if let LayerParams::CadmmNet { w, rho, .. } = &mut net.layers_mut()[0] {
            let r = *rho;
            for wi in w.iter_mut() {
                *wi = Complex::new(-r, 0.0);
            }
        }
        match net.compile() {
            Err(DoaError::NearSingularLayer(_)) => {}
            other => panic!("expected near-singular error, got {other:?}"),
        }
    }
}
