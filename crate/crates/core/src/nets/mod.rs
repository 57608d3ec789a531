//! Unfolded network architectures.
//!
//! Six architectures share one container: the ISTA family (LISTA, TLISTA,
//! THLISTA) unrolls the proximal-gradient iteration, the ADMM family
//! (ADMM-Net, CADMM-Net, CHADMM-Net) unrolls the compact single-state ADMM
//! recursion. The structured variants replace dense `N x N` weights with a
//! Toeplitz generator (2N-1 entries), a spectrum vector (N entries) or a
//! Hermitian-tied first column (about N/2 free entries), and their forward
//! passes run entirely through length-N or length-2N FFTs.
//!
//! At initialization every architecture reproduces its parent iterative
//! method layer for layer, so an untrained network is exactly a truncated
//! solver.

mod checkpoint;
pub(crate) mod forward;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta};
pub use forward::{forward_layer, CompiledNet, ForwardTrace, LayerAux};

use crate::array_signal::Dictionary;
use crate::error::{DoaError, Result};
use crate::linalg::CMat;
use crate::scalar::{fl, Scalar, C};
use num_complex::Complex;

/// Architecture tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetKind {
    Lista,
    Tlista,
    Thlista,
    AdmmNet,
    CadmmNet,
    ChadmmNet,
}

impl NetKind {
    pub const ALL: [NetKind; 6] = [
        NetKind::Lista,
        NetKind::Tlista,
        NetKind::Thlista,
        NetKind::AdmmNet,
        NetKind::CadmmNet,
        NetKind::ChadmmNet,
    ];

    /// ADMM family layers consume `y_F = A^H y`; the ISTA family consumes `y`.
    pub fn is_admm_family(self) -> bool {
        matches!(
            self,
            NetKind::AdmmNet | NetKind::CadmmNet | NetKind::ChadmmNet
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            NetKind::Lista => "lista",
            NetKind::Tlista => "tlista",
            NetKind::Thlista => "thlista",
            NetKind::AdmmNet => "admmnet",
            NetKind::CadmmNet => "cadmmnet",
            NetKind::ChadmmNet => "chadmmnet",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lista" => Ok(NetKind::Lista),
            "tlista" => Ok(NetKind::Tlista),
            "thlista" => Ok(NetKind::Thlista),
            "admmnet" | "admm-net" => Ok(NetKind::AdmmNet),
            "cadmmnet" | "cadmm-net" => Ok(NetKind::CadmmNet),
            "chadmmnet" | "chadmm-net" => Ok(NetKind::ChadmmNet),
            other => Err(DoaError::Config(format!("unknown architecture '{other}'"))),
        }
    }
}

impl std::fmt::Display for NetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Learnable parameters of one layer.
///
/// Toeplitz generators (`Tlista`, `Thlista`) have length `2N-1` with lag `s`
/// stored at index `N-1+s`, `s = -(N-1)..=N-1`. `CadmmNet` learns the
/// spectrum (DFT-of-first-column) domain directly; `ChadmmNet` learns the
/// first column itself with the conjugate tie of the Hermitian-circulant
/// class.
#[derive(Debug, Clone)]
pub enum LayerParams<T: Scalar> {
    Lista { w1: CMat<T>, w2: CMat<T>, beta: T },
    Tlista { w1: Vec<C<T>>, w2: CMat<T>, beta: T },
    Thlista { w1: Vec<C<T>>, w2: CMat<T>, beta: T },
    AdmmNet { w: CMat<T>, rho: T, beta: T },
    CadmmNet { w: Vec<C<T>>, rho: T, beta: T },
    ChadmmNet { w: Vec<C<T>>, rho: T, beta: T },
}

impl<T: Scalar> LayerParams<T> {
    pub fn kind(&self) -> NetKind {
        match self {
            LayerParams::Lista { .. } => NetKind::Lista,
            LayerParams::Tlista { .. } => NetKind::Tlista,
            LayerParams::Thlista { .. } => NetKind::Thlista,
            LayerParams::AdmmNet { .. } => NetKind::AdmmNet,
            LayerParams::CadmmNet { .. } => NetKind::CadmmNet,
            LayerParams::ChadmmNet { .. } => NetKind::ChadmmNet,
        }
    }

    pub fn beta(&self) -> T {
        match self {
            LayerParams::Lista { beta, .. }
            | LayerParams::Tlista { beta, .. }
            | LayerParams::Thlista { beta, .. }
            | LayerParams::AdmmNet { beta, .. }
            | LayerParams::CadmmNet { beta, .. }
            | LayerParams::ChadmmNet { beta, .. } => *beta,
        }
    }

    pub fn rho(&self) -> Option<T> {
        match self {
            LayerParams::AdmmNet { rho, .. }
            | LayerParams::CadmmNet { rho, .. }
            | LayerParams::ChadmmNet { rho, .. } => Some(*rho),
            _ => None,
        }
    }
}

/// Enforces the Hermitian-circulant tie `w(i) = conj(w(N-i))` for
/// `i = floor(N/2)+1 .. N-1` (0-based), copying conjugates from the free
/// half. Entries `0..=floor(N/2)` stay untouched. Idempotent.
pub fn project_hermitian_circulant<T: Scalar>(w: &mut [C<T>]) {
    let n = w.len();
    for i in (n / 2 + 1)..n {
        w[i] = w[n - i].conj();
    }
}

/// Enforces the Hermitian-Toeplitz tie on a `2N-1` generator: lag 0 becomes
/// real, lag `-s` becomes the conjugate of lag `s`. Idempotent.
pub fn toeplitz_tie<T: Scalar>(gen: &mut [C<T>]) {
    assert!(gen.len() % 2 == 1, "generator length must be 2N-1");
    let center = gen.len() / 2;
    gen[center] = Complex::new(gen[center].re, T::zero());
    for s in 1..=center {
        gen[center - s] = gen[center + s].conj();
    }
}

/// Builds the dense `N x N` Toeplitz matrix from a `2N-1` generator
/// (`W(i, j) = gen(i - j)`); test and diagnostics helper.
pub fn toeplitz_dense<T: Scalar>(gen: &[C<T>]) -> CMat<T> {
    let n = (gen.len() + 1) / 2;
    CMat::from_fn(n, n, |i, j| gen[n - 1 + i - j])
}

/// Builds the dense circulant from a first column; test helper.
pub fn circulant_dense<T: Scalar>(col: &[C<T>]) -> CMat<T> {
    let n = col.len();
    CMat::from_fn(n, n, |i, j| col[(n + i - j) % n])
}

/// A `T`-layer unfolded network plus the output-stage threshold.
#[derive(Debug, Clone)]
pub struct Network<T: Scalar> {
    kind: NetKind,
    m: usize,
    n: usize,
    gamma: T,
    layers: Vec<LayerParams<T>>,
    final_beta: T,
    dictionary_id: String,
}

impl<T: Scalar> Network<T> {
    /// Initializes per the parent iterative method: `W1 = I - mu A^H A`,
    /// `W2 = mu A^H` for the ISTA family; `W = A^H A`, the Gram spectrum
    /// `Fb`, or the Gram first column `b` for ADMM-Net, CADMM-Net and
    /// CHADMM-Net respectively; all thresholds `beta0`, all `rho0`.
    pub fn init(
        kind: NetKind,
        dic: &Dictionary<T>,
        t_layers: usize,
        beta0: T,
        rho0: T,
    ) -> Result<Self> {
        if t_layers < 1 {
            return Err(DoaError::Config("need at least one layer".into()));
        }
        if matches!(kind, NetKind::CadmmNet | NetKind::ChadmmNet)
            && !dic.geometry().is_half_wavelength()
        {
            return Err(DoaError::StructureViolation(format!(
                "{kind} requires the circulant Gram structure (gamma = 1/2)"
            )));
        }
        let m = dic.m();
        let n = dic.n();
        let mu = dic.default_step();

        let template: LayerParams<T> = match kind {
            NetKind::Lista => LayerParams::Lista {
                w1: ista_weight_dense(dic, mu),
                w2: scaled_adjoint(dic, mu),
                beta: beta0,
            },
            NetKind::Tlista => LayerParams::Tlista {
                w1: ista_weight_generator(dic, mu),
                w2: scaled_adjoint(dic, mu),
                beta: beta0,
            },
            NetKind::Thlista => LayerParams::Thlista {
                w1: ista_weight_generator(dic, mu),
                w2: scaled_adjoint(dic, mu),
                beta: beta0,
            },
            NetKind::AdmmNet => LayerParams::AdmmNet {
                w: dic.gram_dense(),
                rho: rho0,
                beta: beta0,
            },
            NetKind::CadmmNet => LayerParams::CadmmNet {
                w: dic.gram_col_dft().to_vec(),
                rho: rho0,
                beta: beta0,
            },
            NetKind::ChadmmNet => LayerParams::ChadmmNet {
                w: dic.gram_col().to_vec(),
                rho: rho0,
                beta: beta0,
            },
        };

        let mut net = Self {
            kind,
            m,
            n,
            gamma: dic.gamma(),
            layers: vec![template; t_layers],
            final_beta: beta0,
            dictionary_id: dic.id().to_string(),
        };
        net.apply_constraints();
        Ok(net)
    }

    pub fn kind(&self) -> NetKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[LayerParams<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerParams<T>] {
        &mut self.layers
    }

    pub fn final_beta(&self) -> T {
        self.final_beta
    }

    pub fn set_final_beta(&mut self, b: T) {
        self.final_beta = b;
    }

    pub fn dictionary_id(&self) -> &str {
        &self.dictionary_id
    }

    /// Learnable count per layer, complex entries counted by complex length:
    /// ADMM-Net `N^2+2`, CADMM-Net `N+2`, CHADMM-Net `floor(N/2)+3`, LISTA
    /// `N^2+NM+1`, TLISTA `2N-1+NM+1`, THLISTA `N+NM+1` (free generator lags
    /// counted as complex, mirroring the Hermitian-circulant accounting).
    pub fn layer_param_count(kind: NetKind, m: usize, n: usize) -> usize {
        match kind {
            NetKind::AdmmNet => n * n + 2,
            NetKind::CadmmNet => n + 2,
            NetKind::ChadmmNet => n / 2 + 3,
            NetKind::Lista => n * n + n * m + 1,
            NetKind::Tlista => (2 * n - 1) + n * m + 1,
            NetKind::Thlista => n + n * m + 1,
        }
    }

    /// Total learnable count: per-layer counts plus the output threshold.
    pub fn param_count(&self) -> usize {
        self.layers.len() * Self::layer_param_count(self.kind, self.m, self.n) + 1
    }

    /// Number of real degrees of freedom seen by the optimizer.
    pub fn real_param_count(&self) -> usize {
        self.flatten().len()
    }

    /// Flattens every learnable real degree of freedom, layer by layer:
    /// complex arrays as interleaved (re, im), then `rho` when present, then
    /// `beta`; the output threshold comes last.
    pub fn flatten(&self) -> Vec<T> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                LayerParams::Lista { w1, w2, beta } => {
                    push_cmat(&mut out, w1);
                    push_cmat(&mut out, w2);
                    out.push(*beta);
                }
                LayerParams::Tlista { w1, w2, beta } | LayerParams::Thlista { w1, w2, beta } => {
                    push_cvec(&mut out, w1);
                    push_cmat(&mut out, w2);
                    out.push(*beta);
                }
                LayerParams::AdmmNet { w, rho, beta } => {
                    push_cmat(&mut out, w);
                    out.push(*rho);
                    out.push(*beta);
                }
                LayerParams::CadmmNet { w, rho, beta } | LayerParams::ChadmmNet { w, rho, beta } => {
                    push_cvec(&mut out, w);
                    out.push(*rho);
                    out.push(*beta);
                }
            }
        }
        out.push(self.final_beta);
        out
    }

    /// Inverse of [`Network::flatten`].
    pub fn assign_from_flat(&mut self, flat: &[T]) {
        let mut pos = 0usize;
        for layer in &mut self.layers {
            match layer {
                LayerParams::Lista { w1, w2, beta } => {
                    pos = pull_cmat(flat, pos, w1);
                    pos = pull_cmat(flat, pos, w2);
                    *beta = flat[pos];
                    pos += 1;
                }
                LayerParams::Tlista { w1, w2, beta } | LayerParams::Thlista { w1, w2, beta } => {
                    pos = pull_cvec(flat, pos, w1);
                    pos = pull_cmat(flat, pos, w2);
                    *beta = flat[pos];
                    pos += 1;
                }
                LayerParams::AdmmNet { w, rho, beta } => {
                    pos = pull_cmat(flat, pos, w);
                    *rho = flat[pos];
                    *beta = flat[pos + 1];
                    pos += 2;
                }
                LayerParams::CadmmNet { w, rho, beta } | LayerParams::ChadmmNet { w, rho, beta } => {
                    pos = pull_cvec(flat, pos, w);
                    *rho = flat[pos];
                    *beta = flat[pos + 1];
                    pos += 2;
                }
            }
        }
        self.final_beta = flat[pos];
        pos += 1;
        assert_eq!(pos, flat.len(), "flat parameter length mismatch");
    }

    /// Same-shape container with all parameters zeroed; holds gradients.
    pub fn zeros_like(&self) -> Network<T> {
        let mut g = self.clone();
        for layer in &mut g.layers {
            match layer {
                LayerParams::Lista { w1, w2, beta } => {
                    zero_cmat(w1);
                    zero_cmat(w2);
                    *beta = T::zero();
                }
                LayerParams::Tlista { w1, w2, beta } | LayerParams::Thlista { w1, w2, beta } => {
                    zero_cvec(w1);
                    zero_cmat(w2);
                    *beta = T::zero();
                }
                LayerParams::AdmmNet { w, rho, beta } => {
                    zero_cmat(w);
                    *rho = T::zero();
                    *beta = T::zero();
                }
                LayerParams::CadmmNet { w, rho, beta } | LayerParams::ChadmmNet { w, rho, beta } => {
                    zero_cvec(w);
                    *rho = T::zero();
                    *beta = T::zero();
                }
            }
        }
        g.final_beta = T::zero();
        g
    }

    /// Clamps `beta >= 0` and `rho >= 1e-6` and re-applies the structural
    /// ties (Hermitian-circulant and Hermitian-Toeplitz). Call after every
    /// optimizer update.
    pub fn apply_constraints(&mut self) {
        for layer in &mut self.layers {
            match layer {
                LayerParams::Lista { beta, .. } | LayerParams::Tlista { beta, .. } => {
                    *beta = beta.max(T::zero());
                }
                LayerParams::Thlista { w1, beta, .. } => {
                    toeplitz_tie(w1);
                    *beta = beta.max(T::zero());
                }
                LayerParams::AdmmNet { rho, beta, .. } => {
                    *rho = rho.max(fl(1e-6));
                    *beta = beta.max(T::zero());
                }
                LayerParams::CadmmNet { rho, beta, .. } => {
                    *rho = rho.max(fl(1e-6));
                    *beta = beta.max(T::zero());
                }
                LayerParams::ChadmmNet { w, rho, beta } => {
                    project_hermitian_circulant(w);
                    *rho = rho.max(fl(1e-6));
                    *beta = beta.max(T::zero());
                }
            }
        }
        self.final_beta = self.final_beta.max(T::zero());
    }

    /// Elementwise `self += other` over every parameter slot; used to merge
    /// per-chunk gradient accumulators.
    pub fn accumulate(&mut self, other: &Network<T>) {
        assert_eq!(self.kind, other.kind);
        assert_eq!(self.layers.len(), other.layers.len());
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            match (a, b) {
                (
                    LayerParams::Lista { w1, w2, beta },
                    LayerParams::Lista {
                        w1: ow1,
                        w2: ow2,
                        beta: ob,
                    },
                ) => {
                    w1.add_assign(ow1);
                    w2.add_assign(ow2);
                    *beta += *ob;
                }
                (
                    LayerParams::Tlista { w1, w2, beta } | LayerParams::Thlista { w1, w2, beta },
                    LayerParams::Tlista {
                        w1: ow1,
                        w2: ow2,
                        beta: ob,
                    }
                    | LayerParams::Thlista {
                        w1: ow1,
                        w2: ow2,
                        beta: ob,
                    },
                ) => {
                    for (x, y) in w1.iter_mut().zip(ow1) {
                        *x += *y;
                    }
                    w2.add_assign(ow2);
                    *beta += *ob;
                }
                (
                    LayerParams::AdmmNet { w, rho, beta },
                    LayerParams::AdmmNet {
                        w: ow,
                        rho: orho,
                        beta: ob,
                    },
                ) => {
                    w.add_assign(ow);
                    *rho += *orho;
                    *beta += *ob;
                }
                (
                    LayerParams::CadmmNet { w, rho, beta } | LayerParams::ChadmmNet { w, rho, beta },
                    LayerParams::CadmmNet {
                        w: ow,
                        rho: orho,
                        beta: ob,
                    }
                    | LayerParams::ChadmmNet {
                        w: ow,
                        rho: orho,
                        beta: ob,
                    },
                ) => {
                    for (x, y) in w.iter_mut().zip(ow) {
                        *x += *y;
                    }
                    *rho += *orho;
                    *beta += *ob;
                }
                _ => unreachable!("kinds already checked"),
            }
        }
        self.final_beta += other.final_beta;
    }

    /// Folds gradients of tied entries into their free counterparts and
    /// zeroes the tied slots (the accumulate-then-update alternative to
    /// update-then-project).
    pub fn accumulate_tied_gradients(grads: &mut Network<T>) {
        for layer in &mut grads.layers {
            match layer {
                LayerParams::ChadmmNet { w, .. } => {
                    let n = w.len();
                    for i in (n / 2 + 1)..n {
                        let g = w[i].conj();
                        w[n - i] += g;
                        w[i] = Complex::new(T::zero(), T::zero());
                    }
                }
                LayerParams::Thlista { w1, .. } => {
                    let center = w1.len() / 2;
                    for s in 1..=center {
                        let g = w1[center - s].conj();
                        w1[center + s] += g;
                        w1[center - s] = Complex::new(T::zero(), T::zero());
                    }
                    w1[center] = Complex::new(w1[center].re, T::zero());
                }
                _ => {}
            }
        }
    }
}

fn push_cmat<T: Scalar>(out: &mut Vec<T>, m: &CMat<T>) {
    for z in m.data() {
        out.push(z.re);
        out.push(z.im);
    }
}

fn push_cvec<T: Scalar>(out: &mut Vec<T>, v: &[C<T>]) {
    for z in v {
        out.push(z.re);
        out.push(z.im);
    }
}

fn pull_cmat<T: Scalar>(flat: &[T], mut pos: usize, m: &mut CMat<T>) -> usize {
    for z in m.data_mut() {
        *z = Complex::new(flat[pos], flat[pos + 1]);
        pos += 2;
    }
    pos
}

fn pull_cvec<T: Scalar>(flat: &[T], mut pos: usize, v: &mut [C<T>]) -> usize {
    for z in v.iter_mut() {
        *z = Complex::new(flat[pos], flat[pos + 1]);
        pos += 2;
    }
    pos
}

fn zero_cmat<T: Scalar>(m: &mut CMat<T>) {
    for z in m.data_mut() {
        *z = Complex::new(T::zero(), T::zero());
    }
}

fn zero_cvec<T: Scalar>(v: &mut [C<T>]) {
    for z in v.iter_mut() {
        *z = Complex::new(T::zero(), T::zero());
    }
}

/// `I - mu A^H A` as a dense matrix.
fn ista_weight_dense<T: Scalar>(dic: &Dictionary<T>, mu: T) -> CMat<T> {
    let mut w = dic.gram_dense();
    w.scale_in_place(-mu);
    for i in 0..w.rows() {
        *w.at_mut(i, i) += Complex::new(T::one(), T::zero());
    }
    w
}

/// Toeplitz generator of `I - mu A^H A`; exact Hermitian tie by construction.
fn ista_weight_generator<T: Scalar>(dic: &Dictionary<T>, mu: T) -> Vec<C<T>> {
    let n = dic.n();
    let b = dic.gram_col();
    let mut gen = vec![Complex::new(T::zero(), T::zero()); 2 * n - 1];
    gen[n - 1] = Complex::new(T::one() - mu * b[0].re, T::zero());
    for s in 1..n {
        let v = b[s].scale(-mu);
        gen[n - 1 + s] = v;
        gen[n - 1 - s] = v.conj();
    }
    gen
}

/// `mu A^H` as a dense `N x M` matrix.
fn scaled_adjoint<T: Scalar>(dic: &Dictionary<T>, mu: T) -> CMat<T> {
    let a = dic.matrix();
    CMat::from_fn(dic.n(), dic.m(), |i, j| a.at(j, i).conj().scale(mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_signal::make_ula;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dict(n: usize, m: usize) -> Dictionary<f64> {
        Dictionary::build(make_ula::<f64>(m).unwrap(), n).unwrap()
    }

    #[test]
    fn table_parameter_counts() {
        for &n in &[17usize, 64, 256] {
            let m = 8;
            assert_eq!(
                Network::<f64>::layer_param_count(NetKind::AdmmNet, m, n),
                n * n + 2
            );
            assert_eq!(
                Network::<f64>::layer_param_count(NetKind::CadmmNet, m, n),
                n + 2
            );
            assert_eq!(
                Network::<f64>::layer_param_count(NetKind::ChadmmNet, m, n),
                n / 2 + 3
            );
        }
        assert_eq!(
            Network::<f64>::layer_param_count(NetKind::CadmmNet, 30, 256),
            258
        );
        assert_eq!(
            Network::<f64>::layer_param_count(NetKind::ChadmmNet, 30, 256),
            131
        );
        assert_eq!(
            Network::<f64>::layer_param_count(NetKind::AdmmNet, 30, 256),
            65538
        );
    }

    #[test]
    fn init_values_follow_parent_methods() {
        let dic = dict(32, 8);
        let mu = dic.default_step();
        let cadmm = Network::init(NetKind::CadmmNet, &dic, 3, 0.1, 1.0).unwrap();
        assert_eq!(cadmm.depth(), 3);
        for layer in cadmm.layers() {
            match layer {
                LayerParams::CadmmNet { w, rho, beta } => {
                    assert_eq!(*rho, 1.0);
                    assert_eq!(*beta, 0.1);
                    for (a, b) in w.iter().zip(dic.gram_col_dft()) {
                        assert!((a - b).norm() < 1e-12);
                    }
                }
                _ => panic!("wrong layer kind"),
            }
        }
        let chadmm = Network::init(NetKind::ChadmmNet, &dic, 2, 0.1, 1.0).unwrap();
        match &chadmm.layers()[0] {
            LayerParams::ChadmmNet { w, .. } => {
                for (a, b) in w.iter().zip(dic.gram_col()) {
                    assert!((a - b).norm() < 1e-10);
                }
            }
            _ => panic!(),
        }
        let lista = Network::init(NetKind::Lista, &dic, 1, 0.1, 1.0).unwrap();
        match &lista.layers()[0] {
            LayerParams::Lista { w1, w2, .. } => {
                // W2 = mu A^H.
                assert!((w2.at(0, 0) - dic.matrix().at(0, 0).conj().scale(mu)).norm() < 1e-14);
                // W1 = I - mu A^H A has unit-minus-mu*M diagonal.
                assert!((w1.at(0, 0).re - (1.0 - mu * 8.0)).abs() < 1e-12);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn structured_kinds_require_half_wavelength() {
        let geom = make_ula::<f64>(8).unwrap().with_gamma(0.25).unwrap();
        let dic = Dictionary::build(geom, 32).unwrap();
        assert!(Network::init(NetKind::CadmmNet, &dic, 2, 0.1, 1.0).is_err());
        assert!(Network::init(NetKind::ChadmmNet, &dic, 2, 0.1, 1.0).is_err());
        assert!(Network::init(NetKind::AdmmNet, &dic, 2, 0.1, 1.0).is_ok());
        assert!(Network::init(NetKind::Lista, &dic, 2, 0.1, 1.0).is_ok());
    }

    #[test]
    fn hermitian_circulant_projection() {
        // N=4: [a, b, c, d] -> [a, b, c, conj(b)].
        let mut w = vec![
            Complex::new(1.0, 2.0),
            Complex::new(3.0, 4.0),
            Complex::new(5.0, 6.0),
            Complex::new(7.0, 8.0),
        ];
        project_hermitian_circulant(&mut w);
        assert_eq!(w[0], Complex::new(1.0, 2.0));
        assert_eq!(w[1], Complex::new(3.0, 4.0));
        assert_eq!(w[2], Complex::new(5.0, 6.0));
        assert_eq!(w[3], Complex::new(3.0, -4.0));
        // Idempotent.
        let snapshot = w.clone();
        project_hermitian_circulant(&mut w);
        assert_eq!(w, snapshot);
    }

    #[test]
    fn projected_circulant_hermitian_defect_confined_to_free_lags() {
        let n = 16;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut w: Vec<C<f64>> = (0..n)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        project_hermitian_circulant(&mut w);
        let c = circulant_dense(&w);
        // Hermitian defect per lag: c(s) - conj(c(N-s)); after projection it
        // can only survive at the free lags 0 and N/2.
        for s in 0..n {
            let defect = (w[s] - w[(n - s) % n].conj()).norm();
            if s == 0 || (n % 2 == 0 && s == n / 2) {
                continue;
            }
            assert!(defect < 1e-15, "lag {s} defect {defect}");
        }
        // Same statement at the matrix level.
        for i in 0..n {
            for j in 0..n {
                let lag = (n + i - j) % n;
                let d = (c.at(i, j) - c.at(j, i).conj()).norm();
                if lag == 0 || (n % 2 == 0 && lag == n / 2) {
                    continue;
                }
                assert!(d < 1e-15);
            }
        }
    }

    #[test]
    fn toeplitz_tie_behaviour() {
        let dic = dict(16, 4);
        // Generator of I - mu*Gram is already Hermitian: tie is a no-op.
        let gen = ista_weight_generator(&dic, dic.default_step());
        let mut tied = gen.clone();
        toeplitz_tie(&mut tied);
        assert_eq!(gen, tied);

        // A pure imaginary center becomes 0.
        let mut g2 = vec![Complex::new(0.0, 0.0); 7];
        g2[3] = Complex::new(0.0, 1.0);
        toeplitz_tie(&mut g2);
        assert_eq!(g2[3], Complex::new(0.0, 0.0));

        // Random generator: tied dense Toeplitz is exactly Hermitian.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut g3: Vec<C<f64>> = (0..15)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        toeplitz_tie(&mut g3);
        let t = toeplitz_dense(&g3);
        for i in 0..t.rows() {
            for j in 0..t.cols() {
                assert_eq!(t.at(i, j), t.at(j, i).conj());
            }
        }
    }

    #[test]
    fn flatten_roundtrip_all_kinds() {
        let dic = dict(16, 4);
        for kind in NetKind::ALL {
            let net = Network::init(kind, &dic, 2, 0.1, 1.0).unwrap();
            let flat = net.flatten();
            let mut copy = net.zeros_like();
            assert_eq!(copy.flatten().len(), flat.len());
            copy.assign_from_flat(&flat);
            assert_eq!(copy.flatten(), flat, "{kind}");
        }
    }

    #[test]
    fn total_param_count_includes_output_threshold() {
        let dic = dict(16, 4);
        let net = Network::init(NetKind::CadmmNet, &dic, 5, 0.1, 1.0).unwrap();
        assert_eq!(net.param_count(), 5 * (16 + 2) + 1);
    }
}
