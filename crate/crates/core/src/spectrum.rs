//! Kmer spectrum kernels: the finite contiguous spectrum, the infinite
//! substring-count kernel, gapped kmer features and the heavy-tailed gapped
//! spectrum kernel.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::alignment::{alignment_dp_r, GapStart, PairCount, Scoring};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelInfo, MassStatus, SequenceKernel};
use crate::seq::{Letter, Sequence};

/// Longest sequence whose gapped features are enumerated explicitly.
pub const FEATURE_ENUMERATION_MAX_LEN: usize = 16;

/// Number of (possibly overlapping) contiguous occurrences of `v` in `x`.
/// The empty kmer occurs `|x| + 1` times.
pub fn occurrences(v: &[Letter], x: &[Letter]) -> usize {
    if v.is_empty() {
        return x.len() + 1;
    }
    if v.len() > x.len() {
        return 0;
    }
    x.windows(v.len()).filter(|w| *w == v).count()
}

fn kmer_counts(x: &[Letter], max_len: usize) -> HashMap<&[Letter], usize> {
    let mut counts = HashMap::new();
    for start in 0..x.len() {
        for end in start + 1..=(start + max_len).min(x.len()) {
            *counts.entry(&x[start..end]).or_insert(0) += 1;
        }
    }
    counts
}

/// `Σ_{1 ≤ |V| ≤ L_max} occ(V, x) occ(V, y)`.
pub struct FiniteSpectrumKernel {
    max_len: usize,
}

impl SequenceKernel for FiniteSpectrumKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        x.check_alphabet(y)?;
        let (cx, cy) = (kmer_counts(x.symbols(), self.max_len), kmer_counts(y.symbols(), self.max_len));
        let (small, large) = if cx.len() <= cy.len() { (&cx, &cy) } else { (&cy, &cx) };
        Ok(small
            .iter()
            .map(|(v, n)| (n * large.get(v).copied().unwrap_or(0)) as f64)
            .sum())
    }

    fn info(&self) -> KernelInfo {
        KernelInfo::new("finite_spectrum", MassStatus::LacksDiscreteMasses).with("L_max", self.max_len as f64)
    }
}

pub fn finite_spectrum(max_len: usize) -> Result<Kernel> {
    if max_len == 0 {
        return Err(Error::param("L_max", "must be at least 1"));
    }
    Ok(Kernel::new(FiniteSpectrumKernel { max_len }))
}

/// `1 + Σ_{|V| ≥ 1} occ(V, x) occ(V, y)`, the empty kmer counted once.
///
/// Every pair of start positions `(i, j)` contributes the length of the
/// longest common prefix of `x[i..]` and `y[j..]`, so the sum is one pass of
/// an LCP table.
pub struct InfiniteSpectrumKernel;

impl SequenceKernel for InfiniteSpectrumKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        x.check_alphabet(y)?;
        let (x, y) = (x.symbols(), y.symbols());
        let m = y.len();
        let mut next = vec![0u64; m + 1];
        let mut row = vec![0u64; m + 1];
        let mut total: u64 = 1;
        for i in (0..x.len()).rev() {
            for j in (0..m).rev() {
                row[j] = if x[i] == y[j] { next[j + 1] + 1 } else { 0 };
                total += row[j];
            }
            std::mem::swap(&mut row, &mut next);
        }
        Ok(total as f64)
    }

    fn info(&self) -> KernelInfo {
        KernelInfo::new("infinite_spectrum", MassStatus::HasDiscreteMasses)
    }
}

pub fn infinite_spectrum() -> Kernel {
    Kernel::new(InfiniteSpectrumKernel)
}

/// A selection of positions `J` inside a window of length `len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GappedKmerIndex {
    positions: Vec<usize>,
    len: usize,
}

impl GappedKmerIndex {
    pub fn new(positions: Vec<usize>, len: usize) -> Result<Self> {
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("positions", "must be strictly increasing"));
        }
        if positions.last().is_some_and(|&p| p >= len) {
            return Err(Error::param("positions", format!("must lie below {len}")));
        }
        Ok(GappedKmerIndex { positions, len })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Number of maximal runs of unselected positions, counting runs at
    /// either end.
    pub fn gaps(&self) -> usize {
        gap_runs(self.len, self.positions.iter().copied())
    }

    pub fn select(&self, x: &Sequence) -> Option<Vec<Letter>> {
        (x.len() == self.len).then(|| self.positions.iter().map(|&p| x.symbols()[p]).collect())
    }
}

fn gap_runs(len: usize, selected: impl Iterator<Item = usize>) -> usize {
    let mut runs = 0;
    let mut cursor = 0;
    for p in selected {
        if p > cursor {
            runs += 1;
        }
        cursor = p + 1;
    }
    runs + usize::from(cursor < len)
}

/// Unscaled gapped features `ũ_V(x) = Σ_J e^{-Δμ g(J)} 1(x_J = V)` for every
/// subsequence `V` of `x`, by enumerating all `2^|x|` selections.
pub fn unscaled_gapped_features(x: &Sequence, delta_mu: GapStart) -> Result<HashMap<Vec<Letter>, f64>> {
    let n = x.len();
    if n > FEATURE_ENUMERATION_MAX_LEN {
        return Err(Error::EnumerationBudget {
            len: n,
            max: FEATURE_ENUMERATION_MAX_LEN,
        });
    }
    let mut out: HashMap<Vec<Letter>, f64> = HashMap::new();
    for mask in 0u32..(1u32 << n) {
        let selected = (0..n).filter(|&p| mask >> p & 1 == 1);
        let weight = delta_mu.weight(gap_runs(n, selected.clone()));
        if weight == 0.0 {
            continue;
        }
        let v: Vec<Letter> = selected.map(|p| x.symbols()[p]).collect();
        *out.entry(v).or_insert(0.0) += weight;
    }
    Ok(out)
}

/// Features `u_V(x) = e^{ζ|V|/2} ũ_V(x)` for every subsequence `V` of `x`.
pub fn gapped_kmer_features(x: &Sequence, zeta: f64, delta_mu: GapStart) -> Result<HashMap<Vec<Letter>, f64>> {
    let mut feats = unscaled_gapped_features(x, delta_mu)?;
    for (v, u) in feats.iter_mut() {
        *u *= (0.5 * zeta * v.len() as f64).exp();
    }
    Ok(feats)
}

/// A single feature `u_V(x)`.
pub fn gapped_kmer_feature(v: &Sequence, x: &Sequence, zeta: f64, delta_mu: GapStart) -> Result<f64> {
    v.check_alphabet(x)?;
    if v.len() > x.len() {
        return Ok(0.0);
    }
    Ok(gapped_kmer_features(x, zeta, delta_mu)?
        .get(v.symbols())
        .copied()
        .unwrap_or(0.0))
}

/// `Σ_V (C + (|x|+|y|)/2 - |V|)^(-β) ũ_V(x) ũ_V(y)`, computed through the
/// alignment dynamic programme with identity letter scores and no extension
/// penalty.
pub struct HeavyTailedGappedSpectrumKernel {
    c: f64,
    beta: f64,
    delta_mu: GapStart,
}

impl SequenceKernel for HeavyTailedGappedSpectrumKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        let b = x.alphabet().len();
        let scoring = Scoring::new(&DMatrix::identity(b, b), 0.0, self.delta_mu)?;
        let r = alignment_dp_r(x, y, &scoring, PairCount::All)?;
        let half = 0.5 * (x.len() + y.len()) as f64;
        Ok(r.iter()
            .enumerate()
            .map(|(l, rl)| (self.c + half - l as f64).powf(-self.beta) * rl)
            .sum())
    }

    fn info(&self) -> KernelInfo {
        KernelInfo::new("ht_gapped_spectrum", MassStatus::HasDiscreteMasses)
            .with("C", self.c)
            .with("beta", self.beta)
            .with("delta_mu", self.delta_mu.value())
    }
}

pub fn heavy_tailed_gapped_spectrum(c: f64, beta: f64, delta_mu: GapStart) -> Result<Kernel> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param("C", format!("must be positive, got {c}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    Ok(Kernel::new(HeavyTailedGappedSpectrumKernel { c, beta, delta_mu }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::Alphabet;

    fn seq(s: &str) -> Sequence {
        Sequence::parse(&Alphabet::from_chars("AB").unwrap(), s).unwrap()
    }

    #[test]
    fn finite_spectrum_by_hand() {
        let k = finite_spectrum(3).unwrap();
        assert_eq!(k.eval(&seq("A"), &seq("A")).unwrap(), 1.0);
        let k2 = finite_spectrum(2).unwrap();
        assert_eq!(k2.eval(&seq("AA"), &seq("AA")).unwrap(), 5.0);
        assert_eq!(k2.eval(&seq("AAA"), &seq("BB")).unwrap(), 0.0);
        assert!(finite_spectrum(0).is_err());
    }

    #[test]
    fn infinite_spectrum_by_hand() {
        let k = infinite_spectrum();
        assert_eq!(k.eval(&seq("A"), &seq("A")).unwrap(), 2.0);
        assert_eq!(k.eval(&seq("A"), &seq("B")).unwrap(), 1.0);
        assert_eq!(k.eval(&seq(""), &seq("ABAB")).unwrap(), 1.0);
        // AB vs AB: ∅, A, B, AB
        assert_eq!(k.eval(&seq("AB"), &seq("AB")).unwrap(), 4.0);
        // AA vs A: ∅ plus A twice
        assert_eq!(k.eval(&seq("AA"), &seq("A")).unwrap(), 3.0);
    }

    #[test]
    fn occurrence_counts() {
        assert_eq!(occurrences(&[0, 0], &[0, 0, 0]), 2);
        assert_eq!(occurrences(&[], &[0, 1]), 3);
        assert_eq!(occurrences(&[], &[]), 1);
        assert_eq!(occurrences(&[1], &[]), 0);
    }

    #[test]
    fn gap_run_convention() {
        assert_eq!(GappedKmerIndex::new(vec![], 0).unwrap().gaps(), 0);
        assert_eq!(GappedKmerIndex::new(vec![], 3).unwrap().gaps(), 1);
        assert_eq!(GappedKmerIndex::new(vec![0, 1, 2], 3).unwrap().gaps(), 0);
        assert_eq!(GappedKmerIndex::new(vec![1], 3).unwrap().gaps(), 2);
        assert_eq!(GappedKmerIndex::new(vec![0, 2], 3).unwrap().gaps(), 1);
        assert_eq!(GappedKmerIndex::new(vec![1, 3], 5).unwrap().gaps(), 3);
        assert!(GappedKmerIndex::new(vec![2, 1], 3).is_err());
        assert!(GappedKmerIndex::new(vec![3], 3).is_err());
    }

    #[test]
    fn features_of_short_sequences() {
        let zeta = 0.7;
        let d = GapStart::Finite(0.4);
        assert_eq!(gapped_kmer_feature(&seq("ABA"), &seq("AB"), zeta, d).unwrap(), 0.0);
        let full = gapped_kmer_feature(&seq("AB"), &seq("AB"), zeta, d).unwrap();
        assert!((full - zeta.exp()).abs() < 1e-15);
        // A in AA: either position, one gap each
        let a = gapped_kmer_feature(&seq("A"), &seq("AA"), zeta, d).unwrap();
        assert!((a - 2.0 * (0.5 * zeta).exp() * (-0.4f64).exp()).abs() < 1e-15);
        let inf = gapped_kmer_feature(&seq("A"), &seq("AA"), zeta, GapStart::Infinite).unwrap();
        assert_eq!(inf, 0.0);
    }

    #[test]
    fn heavy_tailed_gapped_spectrum_empty_pair() {
        let k = heavy_tailed_gapped_spectrum(2.0, 1.5, GapStart::Finite(0.3)).unwrap();
        assert!((k.eval(&seq(""), &seq("")).unwrap() - 2.0f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn enumeration_budget() {
        let long = seq(&"AB".repeat(9));
        assert!(matches!(
            unscaled_gapped_features(&long, GapStart::Finite(0.0)),
            Err(Error::EnumerationBudget { .. })
        ));
    }
}
