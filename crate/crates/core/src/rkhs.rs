//! Gram matrices, kernel regression, MMD between weighted samples and the
//! inverse-Gram diagnostic for discrete masses.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::seq::Sequence;

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-10;

const JITTER_START: f64 = 1e-12;
const JITTER_MAX: f64 = 1e-6;

/// `k(s_i, s_j)` over a list of distinct sequences.
pub struct GramMatrix {
    sequences: Vec<Sequence>,
    matrix: DMatrix<f64>,
    kernel: Kernel,
    eigen: OnceLock<SymmetricEigen<f64, nalgebra::Dyn>>,
}

/// Evaluates `k` on every pair `(xs[i], ys[j])` in parallel.
pub fn cross_gram(kernel: &Kernel, xs: &[Sequence], ys: &[Sequence]) -> Result<DMatrix<f64>> {
    let values: Vec<f64> = (0..xs.len() * ys.len())
        .into_par_iter()
        .map(|p| kernel.eval(&xs[p / ys.len()], &ys[p % ys.len()]))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_row_slice(xs.len(), ys.len(), &values))
}

fn symmetric_gram(kernel: &Kernel, xs: &[Sequence]) -> Result<DMatrix<f64>> {
    let n = xs.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| kernel.eval(&xs[i], &xs[j]))
        .collect::<Result<_>>()?;
    let mut m = DMatrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(values) {
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    Ok(m)
}

pub fn gram(kernel: &Kernel, sequences: &[Sequence]) -> Result<GramMatrix> {
    let mut seen = HashSet::with_capacity(sequences.len());
    for s in sequences {
        if !seen.insert(s) {
            return Err(Error::DuplicateSequence(s.to_string()));
        }
    }
    Ok(GramMatrix {
        matrix: symmetric_gram(kernel, sequences)?,
        sequences: sequences.to_vec(),
        kernel: kernel.clone(),
        eigen: OnceLock::new(),
    })
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.sequences.len()
    }

    pub fn sequences(&self) -> &[Sequence] {
        &self.sequences
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn eigen(&self) -> &SymmetricEigen<f64, nalgebra::Dyn> {
        self.eigen.get_or_init(|| self.matrix.clone().symmetric_eigen())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigen().eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest eigenvalue at least `-tol · trace`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.dim() == 0 || self.min_eigenvalue() >= -tol * self.trace().abs()
    }

    /// Rows and columns `indices` as a new Gram matrix.
    pub fn submatrix(&self, indices: &[usize]) -> GramMatrix {
        GramMatrix {
            sequences: indices.iter().map(|&i| self.sequences[i].clone()).collect(),
            matrix: DMatrix::from_fn(indices.len(), indices.len(), |a, b| self.matrix[(indices[a], indices[b])]),
            kernel: self.kernel.clone(),
            eigen: OnceLock::new(),
        }
    }

    fn eigen_cutoff(&self) -> f64 {
        PINV_RELATIVE_CUTOFF * self.max_eigenvalue().max(0.0)
    }

    /// Minimum-norm least-squares solution of `G a = b`.
    pub fn pinv_solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let eig = self.eigen();
        let cutoff = self.eigen_cutoff();
        let coords = eig.eigenvectors.tr_mul(b);
        let scaled = DVector::from_fn(coords.len(), |i, _| {
            let l = eig.eigenvalues[i];
            if l > cutoff {
                coords[i] / l
            } else {
                0.0
            }
        });
        &eig.eigenvectors * scaled
    }

    /// Solves `(G + ρ I) a = b` by Cholesky, adding escalating jitter when the
    /// factorization fails and falling back to the pseudo-inverse.
    pub fn solve(&self, b: &DVector<f64>, ridge: f64) -> DVector<f64> {
        let n = self.dim();
        let base = &self.matrix + DMatrix::identity(n, n) * ridge;
        let scale = base.trace().abs().max(f64::MIN_POSITIVE);
        let mut jitter = 0.0;
        loop {
            let m = &base + DMatrix::identity(n, n) * jitter;
            if let Some(ch) = m.cholesky() {
                return ch.solve(b);
            }
            jitter = if jitter == 0.0 { JITTER_START * scale } else { jitter * 10.0 };
            if jitter > JITTER_MAX * scale * (1.0 + 1e-9) {
                break;
            }
        }
        let eig = base.clone().symmetric_eigen();
        let cutoff = PINV_RELATIVE_CUTOFF * eig.eigenvalues.max().max(0.0);
        let coords = eig.eigenvectors.tr_mul(b);
        let scaled = DVector::from_fn(n, |i, _| {
            let l = eig.eigenvalues[i];
            if l > cutoff {
                coords[i] / l
            } else {
                0.0
            }
        });
        &eig.eigenvectors * scaled
    }

    /// `(G⁻¹)_{ii}`, or `None` when `G` is numerically singular.
    pub fn inverse_diagonal(&self, i: usize) -> Option<f64> {
        let eig = self.eigen();
        let cutoff = self.eigen_cutoff();
        if eig.eigenvalues.iter().any(|&l| l <= cutoff) {
            return None;
        }
        Some(
            eig.eigenvalues
                .iter()
                .enumerate()
                .map(|(k, l)| eig.eigenvectors[(i, k)].powi(2) / l)
                .sum(),
        )
    }
}

pub struct RegressionFit {
    pub support: Vec<Sequence>,
    pub alpha: DVector<f64>,
    pub ridge: f64,
    pub kernel: Kernel,
}

/// Kernel ridge regression; `ridge = 0` gives the minimum-norm least-squares
/// fit through the pseudo-inverse.
pub fn fit_regression(g: &GramMatrix, y: &[f64], ridge: f64) -> Result<RegressionFit> {
    if y.len() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: y.len(),
        });
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::param("ridge", format!("must be non-negative, got {ridge}")));
    }
    let b = DVector::from_column_slice(y);
    let alpha = if ridge == 0.0 { g.pinv_solve(&b) } else { g.solve(&b, ridge) };
    Ok(RegressionFit {
        support: g.sequences().to_vec(),
        alpha,
        ridge,
        kernel: g.kernel().clone(),
    })
}

/// `Σ_n α_n k(s_n, x)`.
pub fn predict(fit: &RegressionFit, x: &Sequence) -> Result<f64> {
    fit.support
        .iter()
        .zip(fit.alpha.iter())
        .try_fold(0.0, |acc, (s, a)| Ok(acc + a * fit.kernel.eval(s, x)?))
}

pub fn predict_many(fit: &RegressionFit, xs: &[Sequence]) -> Result<Vec<f64>> {
    xs.par_iter().map(|x| predict(fit, x)).collect()
}

/// Finitely supported signed measure on sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    atoms: Vec<(Sequence, f64)>,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Vec<(Sequence, f64)>) -> Result<Self> {
        if let Some((_, w)) = atoms.iter().find(|(_, w)| !w.is_finite()) {
            return Err(Error::param("weight", format!("must be finite, got {w}")));
        }
        Ok(EmpiricalMeasure { atoms })
    }

    /// Weight `1/n` on each listed sequence; repeats accumulate.
    pub fn uniform(sequences: &[Sequence]) -> Result<Self> {
        if sequences.is_empty() {
            return Err(Error::EmptySample);
        }
        let w = 1.0 / sequences.len() as f64;
        Self::new(sequences.iter().map(|s| (s.clone(), w)).collect())
    }

    pub fn point(x: &Sequence) -> Self {
        EmpiricalMeasure {
            atoms: vec![(x.clone(), 1.0)],
        }
    }

    pub fn atoms(&self) -> &[(Sequence, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Atoms with repeated sequences merged, in first-seen order.
    pub fn collapsed(&self) -> (Vec<Sequence>, Vec<f64>) {
        let mut index: HashMap<&Sequence, usize> = HashMap::new();
        let (mut seqs, mut weights) = (Vec::new(), Vec::<f64>::new());
        for (s, w) in &self.atoms {
            match index.get(s) {
                Some(&i) => weights[i] += w,
                None => {
                    index.insert(s, seqs.len());
                    seqs.push(s.clone());
                    weights.push(*w);
                }
            }
        }
        (seqs, weights)
    }

    /// `self - other` as one signed measure.
    pub fn difference(&self, other: &EmpiricalMeasure) -> EmpiricalMeasure {
        let atoms = self
            .atoms
            .iter()
            .cloned()
            .chain(other.atoms.iter().map(|(s, w)| (s.clone(), -w)))
            .collect();
        EmpiricalMeasure { atoms }
    }
}

/// `‖Σ_i w_i k(x_i, ·)‖²` for a signed measure.
pub fn rkhs_norm_squared(kernel: &Kernel, m: &EmpiricalMeasure) -> Result<f64> {
    let (seqs, w) = m.collapsed();
    let g = symmetric_gram(kernel, &seqs)?;
    let w = DVector::from_vec(w);
    Ok(w.dot(&(&g * &w)))
}

pub fn mmd_squared(kernel: &Kernel, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    if let (Some((x, _)), Some((y, _))) = (mu.atoms.first(), nu.atoms.first()) {
        x.check_alphabet(y)?;
    }
    Ok(rkhs_norm_squared(kernel, &mu.difference(nu))?.max(0.0))
}

pub fn mmd(kernel: &Kernel, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    Ok(mmd_squared(kernel, mu, nu)?.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub set_size: usize,
    /// `sqrt((K_B⁻¹)_{XX})`, infinite when `K_B` is numerically singular.
    pub c: f64,
    pub min_eigenvalue: f64,
}

/// `C_{B,X} = sqrt((K_B⁻¹)_{XX})` over a strictly growing nested family of
/// sets `B`. Bounded growth is evidence, not proof, that `δ_X` lies in the
/// RKHS: only the supplied sets are examined.
pub fn discrete_mass_diagnostic(
    kernel: &Kernel,
    target: &Sequence,
    nested_sets: &[Vec<Sequence>],
) -> Result<Vec<DiagnosticRow>> {
    let Some(largest) = nested_sets.last() else {
        return Ok(Vec::new());
    };
    let full = gram(kernel, largest)?;
    let position: HashMap<&Sequence, usize> = largest.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut previous: Option<&Vec<Sequence>> = None;
    let mut rows = Vec::with_capacity(nested_sets.len());
    for (n, set) in nested_sets.iter().enumerate() {
        let indices: Vec<usize> = set
            .iter()
            .map(|s| {
                position
                    .get(s)
                    .copied()
                    .ok_or_else(|| Error::param("nested_sets", format!("set {n} is not contained in the last set")))
            })
            .collect::<Result<_>>()?;
        if indices.iter().collect::<HashSet<_>>().len() != indices.len() {
            return Err(Error::param("nested_sets", format!("set {n} has repeated sequences")));
        }
        if let Some(prev) = previous {
            let members: HashSet<&Sequence> = set.iter().collect();
            if set.len() <= prev.len() || !prev.iter().all(|s| members.contains(s)) {
                return Err(Error::param("nested_sets", format!("set {n} does not strictly contain set {}", n - 1)));
            }
        }
        let at = set.iter().position(|s| s == target).ok_or(Error::TargetMissing(n))?;
        let sub = full.submatrix(&indices);
        let c = sub.inverse_diagonal(at).map_or(f64::INFINITY, |v| v.max(0.0).sqrt());
        rows.push(DiagnosticRow {
            set_size: set.len(),
            c,
            min_eigenvalue: sub.min_eigenvalue(),
        });
        previous = Some(set);
    }
    Ok(rows)
}
