//! Hand-written reverse-mode gradients through all six architectures.
//!
//! Complex parameters are differentiated as independent (re, im) pairs; a
//! gradient of a complex quantity `z` is carried as the complex number
//! `dL/d(re z) + j dL/d(im z)`, so `dL = Re(sum conj(g_i) dz_i)`. Under this
//! inner product the adjoint of a linear map is its conjugate transpose: the
//! plain DFT pulls back through the unscaled inverse transform, the
//! `1/L`-scaled inverse pulls back through the `1/L`-scaled forward, `W x`
//! pulls back through `W^H x`, and a linear solve pulls back through the
//! adjoint solve of the same factorization.
//!
//! The soft threshold is differentiated through its real 2x2 Jacobian,
//! which is symmetric; at and below the kink (`|z| <= kappa`) the
//! subgradient is taken as zero.

use crate::error::{DoaError, Result};
use crate::fft::FftPair;
use crate::linalg::CMat;
use crate::nets::forward::CompiledLayer;
use crate::nets::{CompiledNet, ForwardTrace, LayerAux, LayerParams, Network};
use crate::scalar::{c_zero, Scalar, C};
use crate::solvers::soft_threshold_vec;
use crate::training::loss::SmoothedLoss;

/// Pulls a gradient back through `S_kappa` applied elementwise to `z`.
///
/// Returns the gradient with respect to `kappa` and, elementwise, the
/// gradient with respect to `z`. For `|z| > kappa` the Jacobian is
/// `(1 - kappa/r) I + (kappa/r^3) zz^T` over the real parts (symmetric), and
/// `dS/dkappa = -z/r`; both vanish at and below the kink.
pub(crate) fn soft_threshold_backward<T: Scalar>(
    z: &[C<T>],
    kappa: T,
    g_out: &[C<T>],
) -> (T, Vec<C<T>>) {
    let mut g_kappa = T::zero();
    let g_z = z
        .iter()
        .zip(g_out)
        .map(|(&zi, &gi)| {
            let r = zi.norm();
            if r <= kappa {
                c_zero()
            } else {
                // Radial component Re(conj(z) g).
                let proj = zi.re * gi.re + zi.im * gi.im;
                g_kappa -= proj / r;
                gi.scale(T::one() - kappa / r) + zi.scale(kappa * proj / (r * r * r))
            }
        })
        .collect();
    (g_kappa, g_z)
}

fn real_inner<T: Scalar>(g: &[C<T>], v: &[C<T>]) -> T {
    g.iter()
        .zip(v)
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .fold(T::zero(), |acc, x| acc + x)
}

/// Shared tail of every ADMM-family layer backward: the paths through
/// `a = y_F + rho*(2 S_beta(u_prev) - u_prev)` and the residual-feedthrough
/// terms `u_prev - S_beta(u_prev)`. Accumulates into `g_rho`/`g_beta` and
/// returns the gradient for `u_prev`.
fn admm_tail<T: Scalar>(
    u_prev: &[C<T>],
    rho: T,
    beta: T,
    g_u: &[C<T>],
    g_a: &[C<T>],
    g_rho: &mut T,
    g_beta: &mut T,
) -> Vec<C<T>> {
    let s = soft_threshold_vec(u_prev, beta);
    let r1: Vec<C<T>> = s
        .iter()
        .zip(u_prev)
        .map(|(si, ui)| *si + *si - *ui)
        .collect();
    *g_rho += real_inner(g_a, &r1);
    // Into the threshold: g_s = 2 rho g_a - g_u; around it: g_u - rho g_a.
    let g_s: Vec<C<T>> = g_a
        .iter()
        .zip(g_u)
        .map(|(ga, gu)| ga.scale(rho + rho) - gu)
        .collect();
    let (g_b, g_through) = soft_threshold_backward(u_prev, beta, &g_s);
    *g_beta += g_b;
    g_a.iter()
        .zip(g_u.iter().zip(&g_through))
        .map(|(ga, (gu, gt))| *gu - ga.scale(rho) + *gt)
        .collect()
}

/// Backward through `q = 1/(spectrum + rho)`: given `g_q`, returns the
/// spectrum gradient and adds the `rho` contribution.
fn reciprocal_backward<T: Scalar>(q: &[C<T>], g_q: &[C<T>], g_rho: &mut T) -> Vec<C<T>> {
    let mut g_spec = Vec::with_capacity(q.len());
    let mut acc = T::zero();
    for (qi, gq) in q.iter().zip(g_q) {
        let m_q2 = -(qi * qi);
        acc += m_q2.re * gq.re + m_q2.im * gq.im;
        g_spec.push(m_q2.conj() * gq);
    }
    *g_rho += acc;
    g_spec
}

/// Backward through the elementwise product `h = q .* a_hat` and the
/// surrounding `1/L`-inverse / plain-forward DFT pair of the circulant
/// layers. Returns `(g_q, g_a)`.
fn diag_solve_backward<T: Scalar>(
    q: &[C<T>],
    a_hat: &[C<T>],
    g_u: &[C<T>],
    fft: &FftPair<T>,
) -> (Vec<C<T>>, Vec<C<T>>) {
    let g_h = fft.fwd_scaled(g_u);
    let g_q: Vec<C<T>> = a_hat
        .iter()
        .zip(&g_h)
        .map(|(a, g)| a.conj() * g)
        .collect();
    let g_a_hat: Vec<C<T>> = q.iter().zip(&g_h).map(|(qi, g)| qi.conj() * g).collect();
    let g_a = fft.inv_raw(&g_a_hat);
    (g_q, g_a)
}

/// Accumulates the generator gradient `g_w1(s) = sum_n g_p(n) conj(x(n-s))`
/// via the circular correlation theorem on the length-2N embedding.
fn toeplitz_generator_grad_acc<T: Scalar>(
    g_p: &[C<T>],
    x_spec: &[C<T>],
    fft: &FftPair<T>,
    g_w1: &mut [C<T>],
) {
    let l = x_spec.len();
    let n = l / 2;
    let mut padded = vec![c_zero(); l];
    padded[..n].copy_from_slice(g_p);
    let g_spec = fft.fwd(&padded);
    let prod: Vec<C<T>> = g_spec
        .iter()
        .zip(x_spec)
        .map(|(g, x)| g * x.conj())
        .collect();
    let corr = fft.inv(&prod);
    // Lag s >= 0 lives at corr[s]; lag -s at corr[2N - s].
    for s in 0..n {
        g_w1[n - 1 + s] += corr[s];
    }
    for s in 1..n {
        g_w1[n - 1 - s] += corr[l - s];
    }
}

fn lista_backward<T: Scalar>(
    w1: &CMat<T>,
    p: &[C<T>],
    beta: T,
    g_state: &[C<T>],
    x_prev: &[C<T>],
    y: &[C<T>],
    g_w1: &mut CMat<T>,
    g_w2: &mut CMat<T>,
    g_beta: &mut T,
) -> Vec<C<T>> {
    let (g_b, g_p) = soft_threshold_backward(p, beta, g_state);
    *g_beta += g_b;
    g_w1.outer_acc(T::one(), &g_p, x_prev);
    g_w2.outer_acc(T::one(), &g_p, y);
    w1.adjoint_matvec(&g_p)
}

/// Accumulates the loss gradient of one sample into `grads` (a
/// [`Network::zeros_like`] container) and returns the loss value.
pub fn backward<T: Scalar>(
    compiled: &CompiledNet<'_, T>,
    trace: &ForwardTrace<T>,
    truth: &[C<T>],
    loss: &SmoothedLoss<T>,
    grads: &mut Network<T>,
) -> Result<T> {
    let net = compiled.network();
    if grads.kind() != net.kind() || grads.depth() != net.depth() || grads.n() != net.n() {
        return Err(DoaError::DimensionMismatch(
            "gradient container does not match the network".into(),
        ));
    }
    if trace.states.len() != net.depth() + 1 || trace.aux.len() != net.depth() {
        return Err(DoaError::DimensionMismatch(
            "trace does not match the network".into(),
        ));
    }
    let (loss_value, g_xout) = loss.loss_and_grad(&trace.x_out, truth)?;

    // Output stage: learnable threshold for the ADMM family, identity for
    // the ISTA family.
    let mut g_state = if net.kind().is_admm_family() {
        let u_final = trace.states.last().unwrap();
        let (g_fb, g_u) = soft_threshold_backward(u_final, net.final_beta(), &g_xout);
        grads.set_final_beta(grads.final_beta() + g_fb);
        g_u
    } else {
        g_xout
    };

    for t in (0..net.depth()).rev() {
        let prev = &trace.states[t];
        let params = &net.layers()[t];
        let aux = &trace.aux[t];
        let compiled_layer = &compiled.layers[t];
        let g_layer = &mut grads.layers_mut()[t];

        g_state = match (params, aux, compiled_layer, g_layer) {
            (
                LayerParams::Lista { w1, beta, .. },
                LayerAux::Pre { p },
                CompiledLayer::Plain,
                LayerParams::Lista {
                    w1: g_w1,
                    w2: g_w2,
                    beta: g_beta,
                },
            ) => lista_backward(w1, p, *beta, &g_state, prev, &trace.y, g_w1, g_w2, g_beta),
            (
                LayerParams::Tlista { beta, .. } | LayerParams::Thlista { beta, .. },
                LayerAux::PreSpec { p, x_spec },
                CompiledLayer::ToeplitzSpec { w1_spec },
                LayerParams::Tlista {
                    w1: g_w1,
                    w2: g_w2,
                    beta: g_beta,
                }
                | LayerParams::Thlista {
                    w1: g_w1,
                    w2: g_w2,
                    beta: g_beta,
                },
            ) => {
                let fft = compiled.fft_2n.as_ref().unwrap();
                let (g_b, g_p) = soft_threshold_backward(p, *beta, &g_state);
                *g_beta += g_b;
                g_w2.outer_acc(T::one(), &g_p, &trace.y);
                toeplitz_generator_grad_acc(&g_p, x_spec, fft, g_w1);
                crate::nets::forward::toeplitz_adjoint_multiply(w1_spec, &g_p, fft)
            }
            (
                LayerParams::AdmmNet { rho, beta, .. },
                LayerAux::Solve { m },
                CompiledLayer::Factored { lu },
                LayerParams::AdmmNet {
                    w: g_w,
                    rho: g_rho,
                    beta: g_beta,
                },
            ) => {
                let g_a = lu.solve_adjoint(&g_state);
                // d(solve)/dK contributes -(g_a m^H); its diagonal carries
                // the rho-shift term.
                g_w.outer_acc(-T::one(), &g_a, m);
                *g_rho -= real_inner(&g_a, m);
                admm_tail(prev, *rho, *beta, &g_state, &g_a, g_rho, g_beta)
            }
            (
                LayerParams::CadmmNet { rho, beta, .. },
                LayerAux::Spec { a_hat },
                CompiledLayer::Diagonal { q },
                LayerParams::CadmmNet {
                    w: g_w,
                    rho: g_rho,
                    beta: g_beta,
                },
            ) => {
                let fft = compiled.fft_n.as_ref().unwrap();
                let (g_q, g_a) = diag_solve_backward(q, a_hat, &g_state, fft);
                let g_spec = reciprocal_backward(q, &g_q, g_rho);
                for (gw, gs) in g_w.iter_mut().zip(&g_spec) {
                    *gw += *gs;
                }
                admm_tail(prev, *rho, *beta, &g_state, &g_a, g_rho, g_beta)
            }
            (
                LayerParams::ChadmmNet { rho, beta, .. },
                LayerAux::Spec { a_hat },
                CompiledLayer::Diagonal { q },
                LayerParams::ChadmmNet {
                    w: g_w,
                    rho: g_rho,
                    beta: g_beta,
                },
            ) => {
                let fft = compiled.fft_n.as_ref().unwrap();
                let (g_q, g_a) = diag_solve_backward(q, a_hat, &g_state, fft);
                let g_spec = reciprocal_backward(q, &g_q, g_rho);
                // The spectrum is F w; pull back through the plain DFT.
                let g_w_layer = fft.inv_raw(&g_spec);
                for (gw, gs) in g_w.iter_mut().zip(&g_w_layer) {
                    *gw += *gs;
                }
                admm_tail(prev, *rho, *beta, &g_state, &g_a, g_rho, g_beta)
            }
            _ => unreachable!("trace, params and gradient container share the kind"),
        };
    }
    Ok(loss_value)
}
