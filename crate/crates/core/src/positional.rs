//! Position-wise comparison kernels: the weighted-degree (Hamming of lag `L`)
//! baseline, the base position-wise product kernel, exponential and inverse
//! multiquadric Hamming kernels, and the centre-justified and shifted
//! constructions.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::{tensor_kernel, Kernel, KernelInfo, MassStatus, SequenceKernel, TensorKernel};
use crate::seq::{hamming_unchecked, Alphabet, Letter, Sequence};

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::param(name, format!("must be a positive finite number, got {v}")))
    }
}

/// Number of positions at which the two sequences carry the same `window`-mer.
/// Windows that overlap the stop padding match nothing.
pub(crate) fn matching_windows(x: &[Letter], y: &[Letter], window: usize) -> usize {
    let n = x.len().min(y.len());
    if n < window {
        return 0;
    }
    (0..=n - window)
        .filter(|&l| x[l..l + window] == y[l..l + window])
        .count()
}

/// Counts the positions where `x` and `y` share the same `L`-mer.
#[derive(Debug, Clone, Copy)]
pub struct WeightedDegreeKernel {
    window: usize,
}

impl SequenceKernel for WeightedDegreeKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        x.check_alphabet(y)?;
        Ok(matching_windows(x.symbols(), y.symbols(), self.window) as f64)
    }

    fn info(&self) -> KernelInfo {
        KernelInfo::new("weighted_degree", MassStatus::LacksDiscreteMasses)
            .with("L", self.window as f64)
    }
}

pub fn weighted_degree(window: usize) -> Result<Kernel> {
    if window == 0 {
        return Err(Error::param("L", "window length must be at least 1"));
    }
    Ok(Kernel::new(WeightedDegreeKernel { window }))
}

/// A strictly positive definite kernel on `B ∪ {$}` with `k($,$) = 1`.
///
/// Stored as the `(|B|+1)×(|B|+1)` extended matrix; the last index is the
/// stop symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct LetterKernel {
    size: usize,
    extended: Vec<f64>,
}

impl LetterKernel {
    /// `matrix` is the `|B|×|B|` kernel on letters, `stop_row[b] = k(b, $)`.
    pub fn new(matrix: &DMatrix<f64>, stop_row: &[f64]) -> Result<Self> {
        let b = matrix.nrows();
        if matrix.ncols() != b {
            return Err(Error::DimensionMismatch {
                expected: b,
                found: matrix.ncols(),
            });
        }
        if stop_row.len() != b {
            return Err(Error::DimensionMismatch {
                expected: b,
                found: stop_row.len(),
            });
        }
        let n = b + 1;
        let ext = DMatrix::from_fn(n, n, |i, j| match (i == b, j == b) {
            (true, true) => 1.0,
            (true, false) => stop_row[j],
            (false, true) => stop_row[i],
            (false, false) => matrix[(i, j)],
        });
        check_strictly_pd(&ext, "k_s")?;
        Ok(LetterKernel {
            size: b,
            extended: ext.as_slice().to_vec(),
        })
    }

    /// `k(b, b') = exp(-λ 1(b ≠ b'))` with `$` treated as one more letter.
    pub fn exponential(alphabet_size: usize, lambda: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        let off = (-lambda).exp();
        let m = DMatrix::from_fn(alphabet_size, alphabet_size, |i, j| if i == j { 1.0 } else { off });
        LetterKernel::new(&m, &vec![off; alphabet_size])
    }

    pub fn alphabet_size(&self) -> usize {
        self.size
    }

    /// `k_s(a, b)` where `None` stands for the stop symbol.
    #[inline]
    pub fn value(&self, a: Option<Letter>, b: Option<Letter>) -> f64 {
        let i = a.map_or(self.size, usize::from);
        let j = b.map_or(self.size, usize::from);
        self.extended[i + j * (self.size + 1)]
    }
}

pub(crate) fn check_strictly_pd(m: &DMatrix<f64>, name: &str) -> Result<()> {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::param(name, "matrix is not symmetric"));
            }
        }
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::param(name, "matrix has non-finite entries"));
    }
    let min = m.clone().symmetric_eigenvalues().min();
    if min > 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            name,
            format!("matrix is not strictly positive definite (smallest eigenvalue {min:e})"),
        ))
    }
}

/// `Π_l k_s(x_l, y_l)` over stop-padded positions.
#[derive(Debug, Clone)]
pub struct BasePositionwiseKernel {
    letters: LetterKernel,
}

impl SequenceKernel for BasePositionwiseKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        x.check_alphabet(y)?;
        if x.alphabet().len() != self.letters.alphabet_size() {
            return Err(Error::DimensionMismatch {
                expected: self.letters.alphabet_size(),
                found: x.alphabet().len(),
            });
        }
        let n = x.len().max(y.len());
        let mut prod = 1.0;
        for l in 0..n {
            prod *= self.letters.value(x.padded(l), y.padded(l));
        }
        Ok(prod)
    }

    fn info(&self) -> KernelInfo {
        KernelInfo::new("base_positionwise", MassStatus::HasDiscreteMasses)
    }
}

pub fn base_positionwise(letters: LetterKernel) -> Kernel {
    Kernel::new(BasePositionwiseKernel { letters })
}

/// `exp(-λ d_H(x, y))`.
#[derive(Debug, Clone, Copy)]
pub struct ExpHammingKernel {
    lambda: f64,
}

impl SequenceKernel for ExpHammingKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        x.check_alphabet(y)?;
        let d = hamming_unchecked(x.symbols(), y.symbols());
        Ok((-self.lambda * d as f64).exp())
    }

    fn info(&self) -> KernelInfo {
        KernelInfo::new("exp_hamming", MassStatus::HasDiscreteMasses).with("lambda", self.lambda)
    }
}

pub fn exp_hamming(lambda: f64) -> Result<Kernel> {
    Ok(Kernel::new(ExpHammingKernel {
        lambda: positive("lambda", lambda)?,
    }))
}

/// Inverse multiquadric Hamming kernel `(C + d)^(-β)`, where `d` counts the
/// positions below `max(|x|, |y|)` whose stop-padded `L`-mers differ. With
/// `L = 1`, `d` is the Hamming distance.
#[derive(Debug, Clone, Copy)]
pub struct ImqHammingKernel {
    c: f64,
    beta: f64,
    window: usize,
}

impl ImqHammingKernel {
    fn mismatches(&self, x: &[Letter], y: &[Letter]) -> usize {
        if self.window == 1 {
            return hamming_unchecked(x, y);
        }
        let at = |s: &[Letter], i: usize| s.get(i).copied();
        (0..x.len().max(y.len()))
            .filter(|&l| (l..l + self.window).any(|i| at(x, i) != at(y, i)))
            .count()
    }
}

impl SequenceKernel for ImqHammingKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        x.check_alphabet(y)?;
        let d = self.mismatches(x.symbols(), y.symbols());
        Ok((self.c + d as f64).powf(-self.beta))
    }

    fn info(&self) -> KernelInfo {
        let family = if self.window == 1 { "imq_hamming" } else { "imq_hamming_lag" };
        let info = KernelInfo::new(family, MassStatus::HasDiscreteMasses)
            .with("C", self.c)
            .with("beta", self.beta);
        if self.window == 1 {
            info
        } else {
            info.with("L", self.window as f64)
        }
    }
}

pub fn imq_hamming(c: f64, beta: f64) -> Result<Kernel> {
    imq_hamming_lag(c, beta, 1)
}

pub fn imq_hamming_lag(c: f64, beta: f64, window: usize) -> Result<Kernel> {
    if window == 0 {
        return Err(Error::param("L", "window length must be at least 1"));
    }
    Ok(Kernel::new(ImqHammingKernel {
        c: positive("C", c)?,
        beta: positive("beta", beta)?,
        window,
    }))
}

/// Tensor product of `k` with itself on (left, right) sequence pairs.
///
/// Left components are compared from their first letter; callers that want
/// them right-aligned at the reference point must reverse them first.
pub fn centre_justified_kernel(k: Kernel) -> TensorKernel {
    tensor_kernel(k.clone(), k)
}

/// Centre-justified kernel over single sequences that carry a separator
/// letter marking the reference point. The part before the first separator
/// is reversed and compared from the reference point outwards.
pub struct CentreJustifiedKernel {
    pair: TensorKernel,
    separator: Letter,
}

impl CentreJustifiedKernel {
    fn split(&self, x: &Sequence) -> Result<(Sequence, Sequence)> {
        let pos = x
            .symbols()
            .iter()
            .position(|&s| s == self.separator)
            .ok_or_else(|| {
                Error::param("separator", format!("sequence `{x}` has no reference point"))
            })?;
        let left = x.with_symbols(x.symbols()[..pos].iter().rev().copied().collect());
        let right = x.with_symbols(x.symbols()[pos + 1..].to_vec());
        Ok((left, right))
    }
}

impl SequenceKernel for CentreJustifiedKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        x.check_alphabet(y)?;
        let (xl, xr) = self.split(x)?;
        let (yl, yr) = self.split(y)?;
        self.pair.eval_pair((&xl, &xr), (&yl, &yr))
    }

    fn info(&self) -> KernelInfo {
        let inner = self.pair.left().info();
        KernelInfo {
            family: format!("centre_justified({})", inner.family),
            params: inner.params,
            mass_status: self.pair.mass_status(),
        }
    }
}

pub fn centre_justified_with_separator(
    k: Kernel,
    alphabet: &Arc<Alphabet>,
    separator: &str,
) -> Result<Kernel> {
    Ok(Kernel::new(CentreJustifiedKernel {
        pair: centre_justified_kernel(k),
        separator: alphabet.letter(separator)?,
    }))
}

/// `Σ_{l=0}^{shift_max} k(x_(l:), y) + k(x, y_(l:))`.
///
/// Symmetric, but the cross terms `k(x_(l:), y)` do not come from a single
/// feature map, so Gram matrices can have negative eigenvalues (exponential
/// Hamming with `λ = 3` over short DNA strings already does). The mass status
/// is therefore reported as unknown.
pub struct ShiftedKernel {
    inner: Kernel,
    shift_max: usize,
}

impl SequenceKernel for ShiftedKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        let mut total = 0.0;
        for l in 0..=self.shift_max {
            total += shift_term(&self.inner, l, x, y)?;
        }
        Ok(total)
    }

    fn info(&self) -> KernelInfo {
        let inner = self.inner.info();
        let mut params = inner.params;
        params.push(("shift_max".into(), self.shift_max as f64));
        KernelInfo {
            family: format!("shifted({})", inner.family),
            params,
            mass_status: MassStatus::Unknown,
        }
    }
}

fn shift_term(k: &Kernel, l: usize, x: &Sequence, y: &Sequence) -> Result<f64> {
    if l == 0 {
        return Ok(2.0 * k.eval(x, y)?);
    }
    Ok(k.eval(&x.suffix(l), y)? + k.eval(x, &y.suffix(l))?)
}

pub fn shifted_kernel(k: Kernel, shift_max: usize) -> Kernel {
    Kernel::new(ShiftedKernel {
        inner: k,
        shift_max,
    })
}

/// The single offset `l` summand of [`shifted_kernel`]:
/// `k(x_(l:), y) + k(x, y_(l:))`.
pub struct ShiftTermKernel {
    inner: Kernel,
    offset: usize,
}

impl SequenceKernel for ShiftTermKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        shift_term(&self.inner, self.offset, x, y)
    }

    fn info(&self) -> KernelInfo {
        let inner = self.inner.info();
        KernelInfo {
            family: format!("shift_term({})", inner.family),
            params: vec![("offset".into(), self.offset as f64)],
            mass_status: MassStatus::Unknown,
        }
    }
}

pub fn shift_term_kernel(k: Kernel, offset: usize) -> Kernel {
    Kernel::new(ShiftTermKernel { inner: k, offset })
}
