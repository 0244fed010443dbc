//! Building kernels from flat key-value settings.
//!
//! The `family` key selects the kernel; each family reads its own
//! hyperparameters and rejects any key it does not know. Every family also
//! accepts `normalize = true`, which tilts the kernel to unit diagonal.
//! Composite families (`centre_justified`, `shifted`) name their base kernel
//! with `inner` and pass the remaining keys to it.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::alignment::{
    alignment_kernel, exponential_scores, heavy_tailed_alignment_gaps, heavy_tailed_alignment_matches,
    local_alignment_kernel, AlignmentParams, GapStart,
};
use crate::embedding::{embedding_kernel, Embedding, EuclideanKernel, RandomBallEmbedding, ScaledEmbedding, TableEmbedding};
use crate::error::{Error, Result};
use crate::kernel::{identity_kernel, normalize_kernel, Kernel};
use crate::positional::{
    centre_justified_with_separator, exp_hamming, imq_hamming, imq_hamming_lag, shifted_kernel, weighted_degree,
};
use crate::seq::Alphabet;
use crate::spectrum::{finite_spectrum, heavy_tailed_gapped_spectrum, infinite_spectrum};

pub const FAMILIES: &[&str] = &[
    "identity",
    "weighted_degree",
    "exp_hamming",
    "imq_hamming",
    "imq_hamming_lag",
    "centre_justified",
    "shifted",
    "alignment",
    "local_alignment",
    "ht_alignment_matches",
    "ht_alignment_gaps",
    "finite_spectrum",
    "infinite_spectrum",
    "ht_gapped_spectrum",
    "embedding",
];

/// Key-value settings with tracking of which keys were read.
pub struct Settings<'a> {
    values: &'a BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl<'a> Settings<'a> {
    pub fn new(values: &'a BTreeMap<String, String>) -> Self {
        Settings {
            values,
            used: BTreeSet::new(),
        }
    }

    pub fn raw(&mut self, key: &str) -> Option<&'a str> {
        let v = self.values.get(key)?;
        self.used.insert(key.to_string());
        Some(v.as_str())
    }

    pub fn required(&mut self, key: &str) -> Result<&'a str> {
        self.raw(key).ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    pub fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.trim()
                    .parse::<T>()
                    .map_err(|e| Error::Config(format!("key `{key}`: cannot parse `{v}`: {e}")))
            })
            .transpose()
    }

    pub fn parse_required<T: std::str::FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    pub fn flag(&mut self, key: &str) -> Result<bool> {
        match self.raw(key).map(|v| v.trim().to_ascii_lowercase()) {
            None => Ok(false),
            Some(v) if matches!(v.as_str(), "true" | "yes" | "1") => Ok(true),
            Some(v) if matches!(v.as_str(), "false" | "no" | "0") => Ok(false),
            Some(v) => Err(Error::Config(format!("key `{key}`: expected a boolean, got `{v}`"))),
        }
    }

    /// Keys not read so far.
    pub fn unused(&self) -> Vec<&'a str> {
        self.values
            .keys()
            .filter(|k| !self.used.contains(*k))
            .map(String::as_str)
            .collect()
    }

    pub fn finish(self, section: &str) -> Result<()> {
        let unused = self.unused();
        if unused.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!("unknown key(s) in [{section}]: {}", unused.join(", "))))
        }
    }
}

/// Resolves `path` against the directory of the configuration file.
fn resolve(base_dir: Option<&Path>, path: &str) -> PathBuf {
    let p = Path::new(path);
    match base_dir {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

/// Reads a square matrix of letter scores, one row per line.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config(format!("{}: expected a square matrix", path.display())));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn letter_scores(s: &mut Settings, alphabet: &Alphabet, base_dir: Option<&Path>) -> Result<DMatrix<f64>> {
    let lambda: Option<f64> = s.parse("lambda")?;
    let path = s.raw("k_s");
    let m = match (lambda, path) {
        (Some(_), Some(_)) => return Err(Error::Config("give either `lambda` or `k_s`, not both".into())),
        (Some(l), None) => {
            if l.is_nan() || l <= 0.0 {
                return Err(Error::param("lambda", format!("must be positive, got {l}")));
            }
            exponential_scores(alphabet.len(), l)
        }
        (None, Some(p)) => read_matrix_csv(&resolve(base_dir, p))?,
        (None, None) => return Err(Error::Config("one of `lambda` or `k_s` is required".into())),
    };
    if m.nrows() != alphabet.len() {
        return Err(Error::DimensionMismatch {
            expected: alphabet.len(),
            found: m.nrows(),
        });
    }
    Ok(m)
}

fn gap_start(s: &mut Settings) -> Result<GapStart> {
    s.required("delta_mu")?.parse()
}

/// Builds the kernel described by `values`. Relative file paths are taken
/// relative to `base_dir`.
pub fn kernel_from_settings(
    values: &BTreeMap<String, String>,
    alphabet: &Arc<Alphabet>,
    base_dir: Option<&Path>,
) -> Result<Kernel> {
    let mut s = Settings::new(values);
    let normalize = s.flag("normalize")?;
    let family = s.required("family")?;
    let kernel = build(family, &mut s, alphabet, base_dir)?;
    s.finish("kernel")?;
    Ok(if normalize { normalize_kernel(kernel) } else { kernel })
}

fn build(family: &str, s: &mut Settings, alphabet: &Arc<Alphabet>, base_dir: Option<&Path>) -> Result<Kernel> {
    Ok(match family {
        "identity" => identity_kernel(),
        "weighted_degree" => weighted_degree(s.parse_required("L")?)?,
        "exp_hamming" => exp_hamming(s.parse_required("lambda")?)?,
        "imq_hamming" => imq_hamming(s.parse_required("C")?, s.parse_required("beta")?)?,
        "imq_hamming_lag" => imq_hamming_lag(s.parse_required("C")?, s.parse_required("beta")?, s.parse_required("L")?)?,
        "centre_justified" | "shifted" => {
            let inner_family = s.required("inner")?;
            if matches!(inner_family, "centre_justified" | "shifted") {
                return Err(Error::Config(format!("`{family}` cannot wrap `{inner_family}`")));
            }
            let outer: Option<String> = match family {
                "centre_justified" => Some(s.required("separator")?.trim().to_string()),
                _ => None,
            };
            let shift_max: Option<usize> = match family {
                "shifted" => Some(s.parse_required("shift_max")?),
                _ => None,
            };
            // the remaining keys belong to the base kernel
            let rest: BTreeMap<String, String> = s
                .unused()
                .into_iter()
                .map(|k| (k.to_string(), s.values[k].clone()))
                .collect();
            for k in rest.keys() {
                s.raw(k);
            }
            let mut inner_settings = Settings::new(&rest);
            let inner = build(inner_family, &mut inner_settings, alphabet, base_dir)?;
            inner_settings.finish("kernel")?;
            match (outer, shift_max) {
                (Some(sep), _) => centre_justified_with_separator(inner, alphabet, &sep)?,
                (_, Some(m)) => shifted_kernel(inner, m),
                _ => unreachable!(),
            }
        }
        "alignment" | "local_alignment" => {
            let mu = s.parse_required("mu")?;
            let delta_mu = gap_start(s)?;
            let p = AlignmentParams::new(letter_scores(s, alphabet, base_dir)?, mu, delta_mu)?;
            if family == "alignment" {
                alignment_kernel(p)
            } else {
                local_alignment_kernel(p)
            }
        }
        "ht_alignment_matches" => heavy_tailed_alignment_matches(
            s.parse_required("C")?,
            s.parse_required("beta")?,
            s.parse_required("mu")?,
            gap_start(s)?,
        )?,
        "ht_alignment_gaps" => {
            let (c, beta) = (s.parse_required("C")?, s.parse_required("beta")?);
            let delta_mu = gap_start(s)?;
            heavy_tailed_alignment_gaps(c, beta, delta_mu, letter_scores(s, alphabet, base_dir)?)?
        }
        "finite_spectrum" => finite_spectrum(s.parse_required("L_max")?)?,
        "infinite_spectrum" => infinite_spectrum(),
        "ht_gapped_spectrum" => {
            heavy_tailed_gapped_spectrum(s.parse_required("C")?, s.parse_required("beta")?, gap_start(s)?)?
        }
        "embedding" => {
            let base = s.required("base")?;
            let embedding: Arc<dyn Embedding> = if base == "random_ball" {
                let dim = s.parse_required("D")?;
                let seed = s.parse("seed")?.unwrap_or(0);
                Arc::new(RandomBallEmbedding::new(seed, dim)?)
            } else if let Some(path) = base.strip_prefix("table:") {
                Arc::new(TableEmbedding::from_csv(&resolve(base_dir, path), alphabet)?)
            } else {
                return Err(Error::Config(format!(
                    "unknown embedding base `{base}` (expected random_ball or table:<path>)"
                )));
            };
            let epsilon: f64 = s.parse("scale_epsilon")?.unwrap_or(0.0);
            let embedding: Arc<dyn Embedding> = if epsilon > 0.0 {
                Arc::new(ScaledEmbedding::new(embedding, epsilon, alphabet.len())?)
            } else if epsilon == 0.0 {
                embedding
            } else {
                return Err(Error::param("scale_epsilon", "must be non-negative"));
            };
            let k_e = match s.required("k_E")? {
                "imq" => EuclideanKernel::Imq,
                "rbf" => EuclideanKernel::rbf(s.parse_required("gamma")?)?,
                other => return Err(Error::Config(format!("unknown k_E `{other}` (expected imq or rbf)"))),
            };
            embedding_kernel(embedding, k_e)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown kernel family `{other}`; known families: {}",
                FAMILIES.join(", ")
            )))
        }
    })
}
