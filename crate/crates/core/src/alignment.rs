//! Alignment kernels.
//!
//! The global alignment kernel sums, over every pairwise alignment of `x` and
//! `y`, the product of letter scores `k_s` on matched pairs and affine gap
//! scores on the unmatched blocks between matches. A block of `n > 0` letters
//! on one side scores `exp(-Δμ - nμ)`; an empty block scores 1. The local
//! variant drops the gap-start penalty on the leading and trailing blocks.
//!
//! All kernels here are evaluated with one dynamic programme over the tables
//! `M` (alignment ends in a match), `I_X` (ends in an insertion in `x`) and
//! `I_Y` (ends in an insertion in `y`), with an optional axis counting matched
//! pairs of a designated type. Between two matches, insertions in `x` are
//! placed before insertions in `y`, so every alignment is counted once.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelInfo, MassStatus, SequenceKernel};
use crate::positional::check_strictly_pd;
use crate::seq::{Letter, Sequence};

/// The gap-start penalty `Δμ`, which may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapStart {
    Finite(f64),
    Infinite,
}

impl GapStart {
    pub fn new(delta_mu: f64) -> Result<Self> {
        if delta_mu == f64::INFINITY {
            Ok(GapStart::Infinite)
        } else if delta_mu >= 0.0 && delta_mu.is_finite() {
            Ok(GapStart::Finite(delta_mu))
        } else {
            Err(Error::param("delta_mu", format!("must be non-negative, got {delta_mu}")))
        }
    }

    /// `exp(-Δμ)`, exactly 0 when infinite.
    pub fn factor(self) -> f64 {
        match self {
            GapStart::Finite(d) => (-d).exp(),
            GapStart::Infinite => 0.0,
        }
    }

    /// `exp(-Δμ · g)` with the convention `exp(-∞ · 0) = 1`.
    pub fn weight(self, gaps: usize) -> f64 {
        match self {
            GapStart::Finite(d) => (-d * gaps as f64).exp(),
            GapStart::Infinite if gaps == 0 => 1.0,
            GapStart::Infinite => 0.0,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            GapStart::Finite(d) => d,
            GapStart::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, GapStart::Infinite)
    }
}

impl FromStr for GapStart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(GapStart::Infinite),
            t => {
                let v: f64 = t
                    .parse()
                    .map_err(|_| Error::param("delta_mu", format!("cannot parse `{s}`")))?;
                GapStart::new(v)
            }
        }
    }
}

impl fmt::Display for GapStart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GapStart::Finite(d) => write!(f, "{d}"),
            GapStart::Infinite => f.write_str("inf"),
        }
    }
}

/// Raw scoring inputs to the dynamic programme: letter scores on `B` and the
/// affine gap penalties. No positive-definiteness is required here; the
/// heavy-tailed kernels use singular score matrices such as all-ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Scoring {
    size: usize,
    scores: Vec<f64>,
    pub mu: f64,
    pub delta_mu: GapStart,
}

impl Scoring {
    pub fn new(k_s: &DMatrix<f64>, mu: f64, delta_mu: GapStart) -> Result<Self> {
        if k_s.nrows() != k_s.ncols() {
            return Err(Error::DimensionMismatch {
                expected: k_s.nrows(),
                found: k_s.ncols(),
            });
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::param("mu", format!("must be non-negative, got {mu}")));
        }
        let size = k_s.nrows();
        let scores = (0..size * size).map(|i| k_s[(i / size, i % size)]).collect();
        Ok(Scoring {
            size,
            scores,
            mu,
            delta_mu,
        })
    }

    #[inline]
    pub fn score(&self, a: Letter, b: Letter) -> f64 {
        self.scores[usize::from(a) * self.size + usize::from(b)]
    }

    pub fn alphabet_size(&self) -> usize {
        self.size
    }

    fn open(&self) -> f64 {
        self.delta_mu.factor() * (-self.mu).exp()
    }

    fn extend(&self) -> f64 {
        (-self.mu).exp()
    }

    fn check(&self, x: &Sequence, y: &Sequence) -> Result<()> {
        x.check_alphabet(y)?;
        if x.alphabet().len() != self.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                found: x.alphabet().len(),
            });
        }
        Ok(())
    }
}

/// `exp(-λ 1(b ≠ b'))` on an alphabet of the given size.
pub fn exponential_scores(alphabet_size: usize, lambda: f64) -> DMatrix<f64> {
    let off = (-lambda).exp();
    DMatrix::from_fn(alphabet_size, alphabet_size, |i, j| if i == j { 1.0 } else { off })
}

/// Hyperparameters of the alignment kernels, with a strictly positive
/// definite letter kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentParams {
    scoring: Scoring,
    sigma: f64,
}

impl AlignmentParams {
    pub fn new(k_s: DMatrix<f64>, mu: f64, delta_mu: GapStart) -> Result<Self> {
        check_strictly_pd(&k_s, "k_s")?;
        let n = k_s.nrows();
        let ones = nalgebra::DVector::from_element(n, 1.0);
        let solved = k_s
            .clone()
            .cholesky()
            .ok_or_else(|| Error::param("k_s", "Cholesky factorization failed"))?
            .solve(&ones);
        let sigma = ones.dot(&solved);
        Ok(AlignmentParams {
            scoring: Scoring::new(&k_s, mu, delta_mu)?,
            sigma,
        })
    }

    /// Letter kernel `exp(-λ 1(b ≠ b'))`.
    pub fn exponential(alphabet_size: usize, lambda: f64, mu: f64, delta_mu: GapStart) -> Result<Self> {
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
        }
        Self::new(exponential_scores(alphabet_size, lambda), mu, delta_mu)
    }

    /// Letter kernel `scale · 1(b = b')`.
    pub fn diagonal(alphabet_size: usize, scale: f64, mu: f64, delta_mu: GapStart) -> Result<Self> {
        Self::new(DMatrix::identity(alphabet_size, alphabet_size) * scale, mu, delta_mu)
    }

    pub fn scoring(&self) -> &Scoring {
        &self.scoring
    }

    pub fn mu(&self) -> f64 {
        self.scoring.mu
    }

    pub fn delta_mu(&self) -> GapStart {
        self.scoring.delta_mu
    }

    /// `σ = 1ᵀ K⁻¹ 1`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `ζ = 2μ - log σ + log |B|`.
    pub fn zeta(&self) -> f64 {
        2.0 * self.scoring.mu - self.sigma.ln() + (self.scoring.size as f64).ln()
    }
}

/// Discrete-mass condition for the global alignment kernel.
pub fn has_discrete_masses_alignment(p: &AlignmentParams) -> bool {
    let (two_mu, log_sigma) = (2.0 * p.mu(), p.sigma().ln());
    match p.delta_mu() {
        GapStart::Infinite => true,
        GapStart::Finite(d) if d > 0.0 => two_mu >= log_sigma,
        GapStart::Finite(_) => two_mu > log_sigma,
    }
}

/// Discrete-mass condition for the local alignment kernel.
pub fn has_discrete_masses_local(p: &AlignmentParams) -> bool {
    has_discrete_masses_alignment(p)
}

/// Which matched pairs the optional counting axis of the DP tracks.
#[derive(Clone, Copy)]
pub enum PairCount<'a> {
    /// Do not count; the DP collapses to a single plane.
    None,
    /// Count every matched pair.
    All,
    /// Count matched pairs whose letters differ.
    Mismatches,
    Custom(&'a (dyn Fn(Letter, Letter) -> bool + Sync)),
}

impl PairCount<'_> {
    #[inline]
    fn counts(&self, a: Letter, b: Letter) -> bool {
        match self {
            PairCount::None => false,
            PairCount::All => true,
            PairCount::Mismatches => a != b,
            PairCount::Custom(f) => f(a, b),
        }
    }
}

/// `R(L)`: the summed score of all alignments of `x` and `y` with exactly `L`
/// matched pairs of the counted type, for `L = 0..=min(|x|, |y|)`. With
/// [`PairCount::None`] the vector has the single entry `R(0)`, the alignment
/// kernel itself.
pub fn alignment_dp_r(x: &Sequence, y: &Sequence, scoring: &Scoring, count: PairCount<'_>) -> Result<Vec<f64>> {
    scoring.check(x, y)?;
    global_dp(x.symbols(), y.symbols(), scoring, count)
}

fn global_dp(x: &[Letter], y: &[Letter], sc: &Scoring, count: PairCount<'_>) -> Result<Vec<f64>> {
    let (n, m) = (x.len(), y.len());
    let planes = match count {
        PairCount::None => 1,
        _ => n.min(m) + 1,
    };
    let (open, ext) = (sc.open(), sc.extend());
    let cols = m + 1;
    let idx = |i: usize, j: usize| (i * cols + j) * planes;
    let size = (n + 1) * cols * planes;
    let mut mt = vec![0.0; size];
    let mut ix = vec![0.0; size];
    let mut iy = vec![0.0; size];
    mt[0] = 1.0;

    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let here = idx(i, j);
            if i > 0 && j > 0 {
                let (a, b) = (x[i - 1], y[j - 1]);
                let s = sc.score(a, b);
                let diag = idx(i - 1, j - 1);
                if count.counts(a, b) {
                    for l in 1..planes {
                        let p = diag + l - 1;
                        mt[here + l] = s * (mt[p] + ix[p] + iy[p]);
                    }
                } else {
                    for l in 0..planes {
                        let p = diag + l;
                        mt[here + l] = s * (mt[p] + ix[p] + iy[p]);
                    }
                }
            }
            if i > 0 {
                let up = idx(i - 1, j);
                for l in 0..planes {
                    ix[here + l] = open * mt[up + l] + ext * ix[up + l];
                }
            }
            if j > 0 {
                let left = idx(i, j - 1);
                for l in 0..planes {
                    iy[here + l] = open * (mt[left + l] + ix[left + l]) + ext * iy[left + l];
                }
            }
        }
    }

    let end = idx(n, m);
    let r: Vec<f64> = (0..planes).map(|l| mt[end + l] + ix[end + l] + iy[end + l]).collect();
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalOverflow("alignment dynamic programme"));
    }
    Ok(r)
}

/// Local alignment kernel value: leading and trailing blocks score
/// `exp(-μ(|X'| + |Y'|))` without the gap-start penalty.
fn local_dp(x: &[Letter], y: &[Letter], sc: &Scoring) -> Result<f64> {
    let (n, m) = (x.len(), y.len());
    let (open, ext) = (sc.open(), sc.extend());
    let decay = ext;
    let cols = m + 1;
    // powers of exp(-μ) for the free boundary blocks
    let mut pow = vec![1.0; n + m + 1];
    for k in 1..pow.len() {
        pow[k] = pow[k - 1] * decay;
    }
    let mut mt = vec![0.0; (n + 1) * cols];
    let mut ix = vec![0.0; (n + 1) * cols];
    let mut iy = vec![0.0; (n + 1) * cols];
    let mut total = pow[n + m];

    for i in 0..=n {
        for j in 0..=m {
            let here = i * cols + j;
            if i > 0 && j > 0 {
                let d = (i - 1) * cols + (j - 1);
                let before = pow[i - 1 + j - 1] + mt[d] + ix[d] + iy[d];
                mt[here] = sc.score(x[i - 1], y[j - 1]) * before;
                total += mt[here] * pow[(n - i) + (m - j)];
            }
            if i > 0 {
                let up = here - cols;
                ix[here] = open * mt[up] + ext * ix[up];
            }
            if j > 0 {
                let left = here - 1;
                iy[here] = open * (mt[left] + ix[left]) + ext * iy[left];
            }
        }
    }
    if !total.is_finite() {
        return Err(Error::NumericalOverflow("local alignment dynamic programme"));
    }
    Ok(total)
}

fn alignment_info(family: &str, p: &AlignmentParams, status: bool) -> KernelInfo {
    KernelInfo::new(
        family,
        if status {
            MassStatus::HasDiscreteMasses
        } else {
            MassStatus::LacksDiscreteMasses
        },
    )
    .with("mu", p.mu())
    .with("delta_mu", p.delta_mu().value())
    .with("sigma", p.sigma())
}

pub struct AlignmentKernel {
    params: AlignmentParams,
}

impl SequenceKernel for AlignmentKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        Ok(alignment_dp_r(x, y, self.params.scoring(), PairCount::None)?[0])
    }

    fn info(&self) -> KernelInfo {
        alignment_info("alignment", &self.params, has_discrete_masses_alignment(&self.params))
    }
}

pub fn alignment_kernel(params: AlignmentParams) -> Kernel {
    Kernel::new(AlignmentKernel { params })
}

pub struct LocalAlignmentKernel {
    params: AlignmentParams,
}

impl SequenceKernel for LocalAlignmentKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        let sc = self.params.scoring();
        sc.check(x, y)?;
        local_dp(x.symbols(), y.symbols(), sc)
    }

    fn info(&self) -> KernelInfo {
        alignment_info("local_alignment", &self.params, has_discrete_masses_local(&self.params))
    }
}

pub fn local_alignment_kernel(params: AlignmentParams) -> Kernel {
    Kernel::new(LocalAlignmentKernel { params })
}

fn check_heavy_tail(c: f64, beta: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param("C", format!("must be positive, got {c}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    Ok(())
}

/// Alignment kernel with a power-law rather than exponential penalty on the
/// number of mismatched matched pairs: `Σ_L (C + L)^(-β) R(L)`.
pub struct HeavyTailedMatchesKernel {
    c: f64,
    beta: f64,
    mu: f64,
    delta_mu: GapStart,
}

impl SequenceKernel for HeavyTailedMatchesKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        let b = x.alphabet().len();
        let sc = Scoring::new(&DMatrix::from_element(b, b, 1.0), self.mu, self.delta_mu)?;
        let r = alignment_dp_r(x, y, &sc, PairCount::Mismatches)?;
        Ok(r.iter()
            .enumerate()
            .map(|(l, rl)| (self.c + l as f64).powf(-self.beta) * rl)
            .sum())
    }

    fn info(&self) -> KernelInfo {
        let status = if self.mu > 0.0 || self.delta_mu.is_infinite() {
            MassStatus::HasDiscreteMasses
        } else {
            MassStatus::Unknown
        };
        KernelInfo::new("ht_alignment_matches", status)
            .with("C", self.c)
            .with("beta", self.beta)
            .with("mu", self.mu)
            .with("delta_mu", self.delta_mu.value())
    }
}

pub fn heavy_tailed_alignment_matches(c: f64, beta: f64, mu: f64, delta_mu: GapStart) -> Result<Kernel> {
    check_heavy_tail(c, beta)?;
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::param("mu", format!("must be non-negative, got {mu}")));
    }
    Ok(Kernel::new(HeavyTailedMatchesKernel {
        c,
        beta,
        mu,
        delta_mu,
    }))
}

/// Alignment kernel with a power-law penalty on total inserted length:
/// `Σ_L (C + |x| + |y| - 2L)^(-β) R'(L)`, `R'` counting all matches at `μ = 0`.
pub struct HeavyTailedGapsKernel {
    c: f64,
    beta: f64,
    scoring: Scoring,
}

impl SequenceKernel for HeavyTailedGapsKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        let r = alignment_dp_r(x, y, &self.scoring, PairCount::All)?;
        let total = (x.len() + y.len()) as f64;
        Ok(r.iter()
            .enumerate()
            .map(|(l, rl)| (self.c + total - 2.0 * l as f64).powf(-self.beta) * rl)
            .sum())
    }

    fn info(&self) -> KernelInfo {
        KernelInfo::new("ht_alignment_gaps", MassStatus::HasDiscreteMasses)
            .with("C", self.c)
            .with("beta", self.beta)
            .with("delta_mu", self.scoring.delta_mu.value())
    }
}

pub fn heavy_tailed_alignment_gaps(c: f64, beta: f64, delta_mu: GapStart, k_s: DMatrix<f64>) -> Result<Kernel> {
    check_heavy_tail(c, beta)?;
    check_strictly_pd(&k_s, "k_s")?;
    Ok(Kernel::new(HeavyTailedGapsKernel {
        c,
        beta,
        scoring: Scoring::new(&k_s, 0.0, delta_mu)?,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::Alphabet;

    fn seq(ab: &std::sync::Arc<Alphabet>, s: &str) -> Sequence {
        Sequence::parse(ab, s).unwrap()
    }

    #[test]
    fn empty_pair_scores_one() {
        let ab = Alphabet::from_chars("AB").unwrap();
        let p = AlignmentParams::exponential(2, 1.0, 0.5, GapStart::Finite(0.3)).unwrap();
        let e = seq(&ab, "");
        assert_eq!(alignment_kernel(p.clone()).eval(&e, &e).unwrap(), 1.0);
        assert_eq!(local_alignment_kernel(p.clone()).eval(&e, &e).unwrap(), 1.0);
        assert_eq!(alignment_dp_r(&e, &e, p.scoring(), PairCount::All).unwrap(), vec![1.0]);
    }

    #[test]
    fn one_letter_by_hand() {
        let ab = Alphabet::from_chars("A").unwrap();
        let (mu, dmu, kaa) = (0.4, 0.7, 1.3);
        let p = AlignmentParams::diagonal(1, kaa, mu, GapStart::Finite(dmu)).unwrap();
        let a = seq(&ab, "A");
        let v = alignment_kernel(p).eval(&a, &a).unwrap();
        let expected = (-2.0 * (dmu + mu)).exp() + kaa;
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn one_sided_gap() {
        let ab = Alphabet::from_chars("AB").unwrap();
        let p = AlignmentParams::exponential(2, 1.0, 0.5, GapStart::Finite(0.25)).unwrap();
        let v = alignment_kernel(p).eval(&seq(&ab, "ABB"), &seq(&ab, "")).unwrap();
        assert!((v - (-0.25f64 - 1.5).exp()).abs() < 1e-15);
    }

    #[test]
    fn r_sums_to_kernel_when_uncounted() {
        let ab = Alphabet::from_chars("AB").unwrap();
        let p = AlignmentParams::exponential(2, 0.8, 0.3, GapStart::Finite(0.5)).unwrap();
        let (x, y) = (seq(&ab, "ABBA"), seq(&ab, "BAB"));
        let k = alignment_kernel(p.clone()).eval(&x, &y).unwrap();
        let r = alignment_dp_r(&x, &y, p.scoring(), PairCount::None).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - k).abs() < 1e-15);
        let counted = alignment_dp_r(&x, &y, p.scoring(), PairCount::Mismatches).unwrap();
        assert_eq!(counted.len(), 4);
        assert!((counted.iter().sum::<f64>() - k).abs() < 1e-12 * k);
    }

    #[test]
    fn infinite_gap_start_is_positionwise() {
        let ab = Alphabet::from_chars("AB").unwrap();
        let p = AlignmentParams::exponential(2, 1.0, 0.5, GapStart::Infinite).unwrap();
        let k = alignment_kernel(p);
        let v = k.eval(&seq(&ab, "ABA"), &seq(&ab, "AAA")).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(k.eval(&seq(&ab, "AB"), &seq(&ab, "ABA")).unwrap(), 0.0);
    }

    #[test]
    fn sigma_closed_form() {
        let lambda = 1.0;
        let p = AlignmentParams::exponential(4, lambda, 0.8, GapStart::Finite(1.0)).unwrap();
        let expected = 1.0 / (0.25 + 0.75 * (-lambda).exp());
        assert!((p.sigma() - expected).abs() < 1e-12);
        assert!((p.sigma() - 1.901_4).abs() < 1e-3);
        assert!(has_discrete_masses_alignment(&p));

        let id = AlignmentParams::diagonal(5, 1.0, 0.0, GapStart::Finite(0.0)).unwrap();
        assert!((id.sigma() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn mass_conditions_boundary() {
        let p = AlignmentParams::exponential(4, 1.0, 0.0, GapStart::Finite(0.0)).unwrap();
        let mu = p.sigma().ln() / 2.0;
        let at = |d: GapStart| AlignmentParams::exponential(4, 1.0, mu, d).unwrap();
        assert_eq!(2.0 * mu, p.sigma().ln());
        assert!(!has_discrete_masses_alignment(&at(GapStart::Finite(0.0))));
        assert!(!has_discrete_masses_local(&at(GapStart::Finite(0.0))));
        assert!(has_discrete_masses_alignment(&at(GapStart::Finite(0.5))));
        assert!(has_discrete_masses_local(&at(GapStart::Finite(0.5))));
        let below = AlignmentParams::exponential(4, 1.0, mu * 0.9, GapStart::Finite(0.5)).unwrap();
        assert!(!has_discrete_masses_alignment(&below));
        assert!(!has_discrete_masses_local(&below));
        let inf = AlignmentParams::exponential(4, 1.0, 0.0, GapStart::Infinite).unwrap();
        assert!(has_discrete_masses_local(&inf));
        assert!(has_discrete_masses_alignment(&inf));
    }

    #[test]
    fn local_and_global_agree_without_gaps_to_place() {
        // with one letter each there is no boundary block to exempt
        let ab = Alphabet::from_chars("AB").unwrap();
        let p = AlignmentParams::exponential(2, 0.6, 0.4, GapStart::Finite(0.0)).unwrap();
        let (x, y) = (seq(&ab, "A"), seq(&ab, "B"));
        let g = alignment_kernel(p.clone()).eval(&x, &y).unwrap();
        let l = local_alignment_kernel(p).eval(&x, &y).unwrap();
        assert!((g - l).abs() < 1e-15);
    }

    #[test]
    fn heavy_tailed_empty_pairs() {
        let ab = Alphabet::from_chars("AB").unwrap();
        let e = seq(&ab, "");
        let m = heavy_tailed_alignment_matches(2.0, 1.5, 0.3, GapStart::Finite(0.2)).unwrap();
        assert!((m.eval(&e, &e).unwrap() - 2.0f64.powf(-1.5)).abs() < 1e-15);
        let g = heavy_tailed_alignment_gaps(2.0, 1.5, GapStart::Finite(0.2), DMatrix::identity(2, 2)).unwrap();
        assert!((g.eval(&e, &e).unwrap() - 2.0f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn heavy_tailed_matches_rewards_fixing_a_mismatch() {
        let ab = Alphabet::from_chars("AB").unwrap();
        let k = heavy_tailed_alignment_matches(1.0, 2.0, 0.5, GapStart::Finite(0.5)).unwrap();
        let base = seq(&ab, "ABAB");
        let worse = k.eval(&base, &seq(&ab, "ABBB")).unwrap();
        let better = k.eval(&base, &seq(&ab, "ABAB")).unwrap();
        assert!(better > worse);
    }

    #[test]
    fn gap_start_parsing() {
        assert_eq!("inf".parse::<GapStart>().unwrap(), GapStart::Infinite);
        assert_eq!("0.5".parse::<GapStart>().unwrap(), GapStart::Finite(0.5));
        assert!("-1".parse::<GapStart>().is_err());
        assert_eq!(GapStart::Infinite.weight(0), 1.0);
        assert_eq!(GapStart::Infinite.weight(2), 0.0);
    }

    #[test]
    fn overflow_is_reported() {
        let ab = Alphabet::from_chars("A").unwrap();
        let p = AlignmentParams::diagonal(1, 1e300, 0.0, GapStart::Finite(0.0)).unwrap();
        let x = seq(&ab, "AAAA");
        assert_eq!(
            alignment_kernel(p).eval(&x, &x),
            Err(Error::NumericalOverflow("alignment dynamic programme"))
        );
    }
}
