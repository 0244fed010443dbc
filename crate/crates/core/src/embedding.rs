//! Embedding kernels `k(x, y) = k_E(F(x), F(y))` for a map `F` from sequences
//! to `R^D` and a translation-invariant Euclidean kernel `k_E`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::{Arc, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelInfo, MassStatus, SequenceKernel};
use crate::seq::{Alphabet, Letter, Sequence};

pub type Representation = Arc<[f64]>;

pub trait Embedding: Send + Sync {
    fn embed(&self, x: &Sequence) -> Result<Representation>;

    fn dim(&self) -> usize;

    fn name(&self) -> String;

    /// Whether the image of sequence space is free of accumulation points,
    /// when that is known.
    fn mass_hint(&self) -> MassStatus {
        MassStatus::Unknown
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit FNV-1a hash of the letters and length of a sequence.
fn sequence_hash(symbols: &[Letter]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in symbols.iter().chain((symbols.len() as u64).to_le_bytes().iter()) {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Independent uniform draws from the unit ball in `R^D`, one per sequence,
/// generated on first use from a hash of the sequence and the seed.
pub struct RandomBallEmbedding {
    seed: u64,
    dim: usize,
    cache: RwLock<HashMap<Vec<Letter>, Representation>>,
}

impl RandomBallEmbedding {
    pub fn new(seed: u64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("D", "must be at least 1"));
        }
        Ok(RandomBallEmbedding {
            seed,
            dim,
            cache: RwLock::new(HashMap::new()),
        })
    }

    fn draw(&self, symbols: &[Letter]) -> Representation {
        let key = splitmix64(sequence_hash(symbols) ^ splitmix64(self.seed));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        let mut v: Vec<f64> = loop {
            let v: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
            if v.iter().any(|c| *c != 0.0) {
                break v;
            }
        };
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let radius = rng.random::<f64>().powf(1.0 / self.dim as f64);
        v.iter_mut().for_each(|c| *c *= radius / norm);
        v.into()
    }
}

impl Embedding for RandomBallEmbedding {
    fn embed(&self, x: &Sequence) -> Result<Representation> {
        if let Some(v) = self.cache.read().expect("embedding cache poisoned").get(x.symbols()) {
            return Ok(v.clone());
        }
        let v = self.draw(x.symbols());
        // a racing writer computed the same vector, so either copy is canonical
        let mut cache = self.cache.write().expect("embedding cache poisoned");
        Ok(cache.entry(x.symbols().to_vec()).or_insert(v).clone())
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> String {
        format!("random_ball(seed={}, D={})", self.seed, self.dim)
    }

    fn mass_hint(&self) -> MassStatus {
        MassStatus::LacksDiscreteMasses
    }
}

/// `F(x) = |B|^((1+ε)|x|/D) F̃(x)`: representations of longer sequences are
/// pushed outwards fast enough that the image has no accumulation points.
pub struct ScaledEmbedding {
    base: Arc<dyn Embedding>,
    epsilon: f64,
    log_alphabet: f64,
}

impl ScaledEmbedding {
    pub fn new(base: Arc<dyn Embedding>, epsilon: f64, alphabet_size: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::param("scale_epsilon", format!("must be positive, got {epsilon}")));
        }
        if alphabet_size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Ok(ScaledEmbedding {
            base,
            epsilon,
            log_alphabet: (alphabet_size as f64).ln(),
        })
    }

    pub fn scale(&self, len: usize) -> f64 {
        ((1.0 + self.epsilon) * len as f64 * self.log_alphabet / self.base.dim() as f64).exp()
    }
}

impl Embedding for ScaledEmbedding {
    fn embed(&self, x: &Sequence) -> Result<Representation> {
        let s = self.scale(x.len());
        if !s.is_finite() {
            return Err(Error::NumericalOverflow("embedding scale factor"));
        }
        Ok(self.base.embed(x)?.iter().map(|c| c * s).collect())
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn name(&self) -> String {
        format!("scaled({}, epsilon={})", self.base.name(), self.epsilon)
    }

    fn mass_hint(&self) -> MassStatus {
        MassStatus::HasDiscreteMasses
    }
}

/// Representations read from a table; sequences outside it are an error.
pub struct TableEmbedding {
    dim: usize,
    table: HashMap<Vec<Letter>, Representation>,
}

impl TableEmbedding {
    pub fn new(entries: Vec<(Sequence, Vec<f64>)>) -> Result<Self> {
        let dim = entries.first().map_or(0, |(_, v)| v.len());
        if dim == 0 {
            return Err(Error::param("table", "needs at least one non-empty row"));
        }
        let mut table = HashMap::with_capacity(entries.len());
        for (s, v) in entries {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if table.insert(s.symbols().to_vec(), v.into()).is_some() {
                return Err(Error::DuplicateSequence(s.to_string()));
            }
        }
        Ok(TableEmbedding { dim, table })
    }

    /// Reads rows `sequence,v_1,...,v_D`. A first row whose second field is
    /// not a number is taken as a header.
    pub fn from_csv(path: &Path, alphabet: &Arc<Alphabet>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_path(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut entries = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().skip(1).map(|f| f.trim().parse::<f64>()).collect();
            match parsed {
                Ok(v) => entries.push((Sequence::parse(alphabet, &record[0])?, v)),
                Err(_) if row == 0 => continue,
                Err(e) => return Err(Error::Io(format!("{} row {}: {e}", path.display(), row + 1))),
            }
        }
        Self::new(entries)
    }
}

impl Embedding for TableEmbedding {
    fn embed(&self, x: &Sequence) -> Result<Representation> {
        self.table
            .get(x.symbols())
            .cloned()
            .ok_or_else(|| Error::EmbeddingLookup(x.to_string()))
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> String {
        format!("table({} rows, D={})", self.table.len(), self.dim)
    }
}

type EmbedFn = dyn Fn(&Sequence) -> Result<Vec<f64>> + Send + Sync;

/// An embedding given by a closure.
pub struct FnEmbedding {
    name: String,
    dim: usize,
    map: Box<EmbedFn>,
    hint: MassStatus,
}

impl FnEmbedding {
    pub fn new<F>(name: &str, dim: usize, hint: MassStatus, map: F) -> Self
    where
        F: Fn(&Sequence) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        FnEmbedding {
            name: name.to_string(),
            dim,
            map: Box::new(map),
            hint,
        }
    }
}

impl Embedding for FnEmbedding {
    fn embed(&self, x: &Sequence) -> Result<Representation> {
        let v = (self.map)(x)?;
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(v.into())
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn mass_hint(&self) -> MassStatus {
        self.hint
    }
}

/// One-letter embedding `F(A) = 0`, `F(n×A) = 1/n` for `n ≥ 2`, `F(∅) = -1`.
/// It is injective, but `F(n×A) → F(A)`, so `A` is an accumulation point.
pub fn accumulation_embedding() -> FnEmbedding {
    FnEmbedding::new("accumulation", 1, MassStatus::LacksDiscreteMasses, |x| {
        if x.alphabet().len() != 1 {
            return Err(Error::param(
                "alphabet",
                format!("the accumulation embedding needs one letter, got {}", x.alphabet().len()),
            ));
        }
        Ok(vec![match x.len() {
            0 => -1.0,
            1 => 0.0,
            n => 1.0 / n as f64,
        }])
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EuclideanKernel {
    /// `(1 + ‖u - v‖²)^(-1)`
    Imq,
    /// `exp(-γ ‖u - v‖²)`
    Rbf { gamma: f64 },
}

impl EuclideanKernel {
    pub fn rbf(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", format!("must be positive, got {gamma}")));
        }
        Ok(EuclideanKernel::Rbf { gamma })
    }

    pub fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        match self {
            EuclideanKernel::Imq => 1.0 / (1.0 + d2),
            EuclideanKernel::Rbf { gamma } => (-gamma * d2).exp(),
        }
    }
}

impl fmt::Display for EuclideanKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EuclideanKernel::Imq => f.write_str("imq"),
            EuclideanKernel::Rbf { gamma } => write!(f, "rbf(gamma={gamma})"),
        }
    }
}

pub struct EmbeddingKernel {
    embedding: Arc<dyn Embedding>,
    base: EuclideanKernel,
}

impl EmbeddingKernel {
    pub fn embedding(&self) -> &Arc<dyn Embedding> {
        &self.embedding
    }
}

impl SequenceKernel for EmbeddingKernel {
    fn eval(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        x.check_alphabet(y)?;
        if x == y {
            self.embedding.embed(x)?;
            return Ok(1.0);
        }
        Ok(self.base.eval(&self.embedding.embed(x)?, &self.embedding.embed(y)?))
    }

    fn info(&self) -> KernelInfo {
        let mut info = KernelInfo::new("embedding", self.embedding.mass_hint()).with("D", self.embedding.dim() as f64);
        if let EuclideanKernel::Rbf { gamma } = self.base {
            info = info.with("gamma", gamma);
        }
        info
    }
}

pub fn embedding_kernel(embedding: Arc<dyn Embedding>, base: EuclideanKernel) -> Kernel {
    Kernel::new(EmbeddingKernel { embedding, base })
}
