//! Independent reference computations shared by the integration tests:
//! explicit alignment enumeration and quadrature over a half line.

#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use seqkern::alignment::{
    alignment_kernel, heavy_tailed_alignment_gaps, heavy_tailed_alignment_matches, local_alignment_kernel,
    AlignmentParams, GapStart,
};
use seqkern::embedding::{embedding_kernel, Embedding, EuclideanKernel, RandomBallEmbedding, ScaledEmbedding};
use seqkern::kernel::{normalize_kernel, Kernel};
use seqkern::positional::{base_positionwise, exp_hamming, imq_hamming, imq_hamming_lag, weighted_degree, LetterKernel};
use seqkern::seq::{enumerate_up_to, Alphabet, Letter, Sequence};
use seqkern::spectrum::{finite_spectrum, heavy_tailed_gapped_spectrum, infinite_spectrum};

pub fn ab() -> Arc<Alphabet> {
    Alphabet::from_chars("AB").unwrap()
}

pub fn parse(alphabet: &Arc<Alphabet>, s: &str) -> Sequence {
    Sequence::parse(alphabet, s).unwrap()
}

pub fn all_up_to(alphabet: &Arc<Alphabet>, len: usize) -> Vec<Sequence> {
    enumerate_up_to(alphabet, len)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Scoring used by the enumeration oracle. `delta_mu = None` is an infinite
/// gap-start penalty.
pub struct OracleScoring<'a> {
    pub score: &'a dyn Fn(Letter, Letter) -> f64,
    pub counted: &'a dyn Fn(Letter, Letter) -> bool,
    pub mu: f64,
    pub delta_mu: Option<f64>,
    pub local: bool,
}

impl OracleScoring<'_> {
    /// Score of one unmatched block of `len` letters on one side.
    fn block(&self, len: usize, boundary: bool) -> f64 {
        if len == 0 {
            1.0
        } else if boundary && self.local {
            (-self.mu * len as f64).exp()
        } else {
            match self.delta_mu {
                Some(d) => (-d - self.mu * len as f64).exp(),
                None => 0.0,
            }
        }
    }
}

/// Sums alignment scores by listing every set of matched pairs
/// `(i_1, j_1) < (i_2, j_2) < ...` explicitly. Entry `L` of the result holds
/// alignments with exactly `L` counted pairs.
pub fn enumerate_alignments(x: &[Letter], y: &[Letter], sc: &OracleScoring) -> Vec<f64> {
    let mut r = vec![0.0; x.len().min(y.len()) + 1];
    // the alignment without matches has one block on each side
    r[0] += sc.block(x.len(), true) * sc.block(y.len(), true);
    extend(x, y, sc, 0, 0, 1.0, 0, true, &mut r);
    r
}

#[allow(clippy::too_many_arguments)]
fn extend(
    x: &[Letter],
    y: &[Letter],
    sc: &OracleScoring,
    from_i: usize,
    from_j: usize,
    weight: f64,
    count: usize,
    first: bool,
    r: &mut [f64],
) {
    for i in from_i..x.len() {
        for j in from_j..y.len() {
            let gaps = sc.block(i - from_i, first) * sc.block(j - from_j, first);
            if gaps == 0.0 {
                continue;
            }
            let w = weight * gaps * (sc.score)(x[i], y[j]);
            let c = count + usize::from((sc.counted)(x[i], y[j]));
            // close the alignment after this match
            r[c] += w * sc.block(x.len() - i - 1, true) * sc.block(y.len() - j - 1, true);
            extend(x, y, sc, i + 1, j + 1, w, c, false, r);
        }
    }
}

pub fn enumerate_total(x: &[Letter], y: &[Letter], sc: &OracleScoring) -> f64 {
    enumerate_alignments(x, y, sc).iter().sum()
}

/// `∫_0^∞ f(t) dt` by double-exponential quadrature. The substitution
/// `t = s²` softens `t^(β-1)` endpoint singularities, then `s = u / (1 - u)`
/// maps the half line onto `[0, 1)`, split at `s = 1`.
pub fn integrate_half_line(f: impl Fn(f64) -> f64) -> f64 {
    let g = |u: f64| {
        let s = u / (1.0 - u);
        2.0 * s * f(s * s) / ((1.0 - u) * (1.0 - u))
    };
    let tol = 1e-12;
    let lo = quadrature::double_exponential::integrate(g, 0.0, 0.5, tol);
    let hi = quadrature::double_exponential::integrate(g, 0.5, 1.0, tol);
    lo.integral + hi.integral
}

/// Gamma density with shape `β` and rate `C`: `t^(β-1) e^(-C t) C^β / Γ(β)`,
/// without the `C^β` factor.
pub fn gamma_weight(beta: f64, c: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    ((beta - 1.0) * t.ln() - c * t - statrs::function::gamma::ln_gamma(beta)).exp()
}

/// One representative of every kernel family that accepts arbitrary DNA
/// strings.
pub fn kernel_families() -> Vec<Kernel> {
    let embedding: Arc<dyn Embedding> = Arc::new(RandomBallEmbedding::new(5, 16).unwrap());
    let scaled: Arc<dyn Embedding> = Arc::new(ScaledEmbedding::new(embedding.clone(), 0.1, 4).unwrap());
    let align = AlignmentParams::exponential(4, 1.0, 0.5, GapStart::Finite(0.5)).unwrap();
    vec![
        weighted_degree(2).unwrap(),
        exp_hamming(0.8).unwrap(),
        imq_hamming(1.0, 1.0).unwrap(),
        imq_hamming_lag(1.0, 0.5, 2).unwrap(),
        base_positionwise(LetterKernel::exponential(4, 1.0).unwrap()),
        alignment_kernel(align.clone()),
        local_alignment_kernel(align),
        heavy_tailed_alignment_matches(1.0, 1.0, 0.3, GapStart::Finite(0.3)).unwrap(),
        heavy_tailed_alignment_gaps(1.0, 1.0, GapStart::Finite(0.3), DMatrix::identity(4, 4)).unwrap(),
        finite_spectrum(3).unwrap(),
        infinite_spectrum(),
        heavy_tailed_gapped_spectrum(1.0, 1.0, GapStart::Finite(0.5)).unwrap(),
        embedding_kernel(embedding, EuclideanKernel::Imq),
        embedding_kernel(scaled, EuclideanKernel::rbf(0.5).unwrap()),
        normalize_kernel(imq_hamming(2.0, 1.5).unwrap()),
    ]
}
