//! The kernel abstraction and the combinators that preserve discrete masses:
//! weighted sums, tilting, tensor products and evaluation on vector-encoded
//! (reparameterized) sequences.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::seq::{Alphabet, Letter, Sequence, VectorSequence};

/// Whether a kernel family has discrete masses under its hyperparameters.
///
/// This is metadata derived from closed-form conditions; it is never
/// established numerically. See [`crate::rkhs::discrete_mass_diagnostic`] for
/// the finite-set diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MassStatus {
    HasDiscreteMasses,
    LacksDiscreteMasses,
    Unknown,
}

impl fmt::Display for MassStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MassStatus::HasDiscreteMasses => "has_discrete_masses",
            MassStatus::LacksDiscreteMasses => "lacks_discrete_masses",
            MassStatus::Unknown => "unknown",
        })
    }
}

/// Family tag, hyperparameters and mass status of a kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelInfo {
    pub family: String,
    pub params: Vec<(String, f64)>,
    pub mass_status: MassStatus,
}

impl KernelInfo {
    pub fn new(family: impl Into<String>, mass_status: MassStatus) -> Self {
        KernelInfo {
            family: family.into(),
            params: Vec::new(),
            mass_status,
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.params.push((name.to_string(), value));
        self
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

/// A positive semi-definite similarity on sequences.
///
/// Implementations must be pure and deterministic: evaluators may be called
/// concurrently from many threads and must not mutate observable state.
pub trait SequenceKernel: Send + Sync {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64>;

    fn info(&self) -> KernelInfo;
}

/// A shared, type-erased [`SequenceKernel`].
#[derive(Clone)]
pub struct Kernel(Arc<dyn SequenceKernel>);

impl Kernel {
    pub fn new<K: SequenceKernel + 'static>(kernel: K) -> Self {
        Kernel(Arc::new(kernel))
    }

    #[inline]
    pub fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        self.0.eval(x, y)
    }

    pub fn info(&self) -> KernelInfo {
        self.0.info()
    }

    pub fn family(&self) -> String {
        self.0.info().family
    }

    pub fn mass_status(&self) -> MassStatus {
        self.0.info().mass_status
    }
}

impl SequenceKernel for Kernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        self.0.eval(x, y)
    }

    fn info(&self) -> KernelInfo {
        self.0.info()
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let info = self.info();
        write!(f, "Kernel({}", info.family)?;
        for (name, v) in &info.params {
            write!(f, ", {name}={v}")?;
        }
        write!(f, ")")
    }
}

/// The identity kernel `k(x, y) = 1(x = y)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityKernel;

impl SequenceKernel for IdentityKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        x.check_alphabet(y)?;
        Ok(if x.symbols() == y.symbols() { 1.0 } else { 0.0 })
    }

    fn info(&self) -> KernelInfo {
        KernelInfo::new("identity", MassStatus::HasDiscreteMasses)
    }
}

pub fn identity_kernel() -> Kernel {
    Kernel::new(IdentityKernel)
}

/// `Σ αₙ kₙ` with positive weights.
pub struct SumKernel {
    parts: Vec<(f64, Kernel)>,
}

impl SequenceKernel for SumKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        let mut total = 0.0;
        for (w, k) in &self.parts {
            total += w * k.eval(x, y)?;
        }
        Ok(total)
    }

    fn info(&self) -> KernelInfo {
        let statuses: Vec<MassStatus> = self.parts.iter().map(|(_, k)| k.mass_status()).collect();
        let status = if statuses.contains(&MassStatus::HasDiscreteMasses) {
            MassStatus::HasDiscreteMasses
        } else {
            MassStatus::Unknown
        };
        let mut info = KernelInfo::new("sum", status);
        for (i, (w, _)) in self.parts.iter().enumerate() {
            info = info.with(&format!("weight{i}"), *w);
        }
        info
    }
}

/// A positively weighted sum of kernels. It has discrete masses as soon as
/// one part does.
pub fn sum_kernel(parts: Vec<(f64, Kernel)>) -> Result<Kernel> {
    if parts.is_empty() {
        return Err(Error::EmptyKernelSum);
    }
    if let Some((w, _)) = parts.iter().find(|(w, _)| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::param("weight", format!("must be positive, got {w}")));
    }
    Ok(Kernel::new(SumKernel { parts }))
}

type TiltFn = Arc<dyn Fn(&Sequence) -> Result<f64> + Send + Sync>;

/// `kᴬ(x, y) = A(x) k(x, y) A(y)`.
pub struct TiltedKernel {
    inner: Kernel,
    tilt: TiltFn,
    label: String,
}

impl TiltedKernel {
    fn factor(&self, x: &Sequence) -> Result<f64> {
        let a = (self.tilt)(x)?;
        if a > 0.0 && a.is_finite() {
            Ok(a)
        } else {
            Err(Error::NonPositiveTilt(a))
        }
    }
}

impl SequenceKernel for TiltedKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        let ax = self.factor(x)?;
        let ay = if x == y { ax } else { self.factor(y)? };
        Ok(ax * self.inner.eval(x, y)? * ay)
    }

    fn info(&self) -> KernelInfo {
        let inner = self.inner.info();
        KernelInfo {
            family: format!("{}({})", self.label, inner.family),
            params: inner.params,
            mass_status: inner.mass_status,
        }
    }
}

/// Tilts `k` by a strictly positive function. Positivity is checked at each
/// evaluation.
pub fn tilt_kernel<F>(k: Kernel, tilt: F) -> Kernel
where
    F: Fn(&Sequence) -> f64 + Send + Sync + 'static,
{
    Kernel::new(TiltedKernel {
        inner: k,
        tilt: Arc::new(move |x| Ok(tilt(x))),
        label: "tilted".into(),
    })
}

/// Tilts by `A(x) = exp(rate · |x|)`.
pub fn length_tilt(k: Kernel, rate: f64) -> Kernel {
    Kernel::new(TiltedKernel {
        inner: k,
        tilt: Arc::new(move |x| Ok((rate * x.len() as f64).exp())),
        label: "length_tilted".into(),
    })
}

/// `k(x, y) / sqrt(k(x, x) k(y, y))`, the tilt by `A(x) = k(x, x)^(-1/2)`.
/// The diagonal is exactly 1.
pub struct NormalizedKernel {
    inner: Kernel,
}

impl NormalizedKernel {
    fn self_value(&self, x: &Sequence) -> Result<f64> {
        let v = self.inner.eval(x, x)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonPositiveTilt(v))
        }
    }
}

impl SequenceKernel for NormalizedKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        if x == y {
            self.self_value(x)?;
            return Ok(1.0);
        }
        let (kx, ky) = (self.self_value(x)?, self.self_value(y)?);
        Ok(self.inner.eval(x, y)? / (kx * ky).sqrt())
    }

    fn info(&self) -> KernelInfo {
        let inner = self.inner.info();
        KernelInfo {
            family: format!("normalized({})", inner.family),
            params: inner.params,
            mass_status: inner.mass_status,
        }
    }
}

pub fn normalize_kernel(k: Kernel) -> Kernel {
    Kernel::new(NormalizedKernel { inner: k })
}

/// Product kernel on pairs of sequences.
#[derive(Clone)]
pub struct TensorKernel {
    left: Kernel,
    right: Kernel,
}

impl TensorKernel {
    pub fn eval_pair(&self, x: (&Sequence, &Sequence), y: (&Sequence, &Sequence)) -> Result<f64> {
        let l = self.left.eval(x.0, y.0)?;
        if l == 0.0 {
            return Ok(0.0);
        }
        Ok(l * self.right.eval(x.1, y.1)?)
    }

    pub fn left(&self) -> &Kernel {
        &self.left
    }

    pub fn right(&self) -> &Kernel {
        &self.right
    }

    pub fn mass_status(&self) -> MassStatus {
        match (self.left.mass_status(), self.right.mass_status()) {
            (MassStatus::HasDiscreteMasses, MassStatus::HasDiscreteMasses) => {
                MassStatus::HasDiscreteMasses
            }
            _ => MassStatus::Unknown,
        }
    }
}

pub fn tensor_kernel(left: Kernel, right: Kernel) -> TensorKernel {
    TensorKernel { left, right }
}

/// Largest number of letter assignments `eval_vector_encoded` will expand.
pub const VECTOR_EXPANSION_BUDGET: usize = 1 << 22;

/// Evaluates `k` on vector-encoded sequences by expanding
/// `Σ_X Σ_Y (Π v_{l,X_l})(Π w_{l,Y_l}) k(X, Y)` over all letter assignments.
///
/// Exponential in the sequence lengths; meant for small oracle checks.
pub fn eval_vector_encoded(
    k: &Kernel,
    alphabet: &Arc<Alphabet>,
    v: &VectorSequence,
    w: &VectorSequence,
) -> Result<f64> {
    let xs = expand(alphabet, v)?;
    let ys = expand(alphabet, w)?;
    if xs.len().saturating_mul(ys.len()) > VECTOR_EXPANSION_BUDGET {
        return Err(Error::EnumerationBudget {
            len: v.len().max(w.len()),
            max: VECTOR_EXPANSION_BUDGET,
        });
    }
    let mut total = 0.0;
    for (x, cx) in &xs {
        for (y, cy) in &ys {
            total += cx * cy * k.eval(x, y)?;
        }
    }
    Ok(total)
}

/// Letter assignments with non-zero weight, and their weights.
fn expand(alphabet: &Arc<Alphabet>, v: &VectorSequence) -> Result<Vec<(Sequence, f64)>> {
    let b = alphabet.len();
    if let Some(col) = v.columns().iter().find(|c| c.len() != b) {
        return Err(Error::DimensionMismatch {
            expected: b,
            found: col.len(),
        });
    }
    let mut partial: Vec<(Vec<Letter>, f64)> = vec![(Vec::with_capacity(v.len()), 1.0)];
    for col in v.columns() {
        let mut next = Vec::with_capacity(partial.len() * b);
        for (prefix, weight) in &partial {
            for (letter, &c) in col.iter().enumerate() {
                if c != 0.0 {
                    let mut p = prefix.clone();
                    p.push(letter as Letter);
                    next.push((p, weight * c));
                }
            }
        }
        if next.len() > VECTOR_EXPANSION_BUDGET {
            return Err(Error::EnumerationBudget {
                len: v.len(),
                max: VECTOR_EXPANSION_BUDGET,
            });
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|(s, c)| Ok((Sequence::new(alphabet, s)?, c)))
        .collect()
}
