//! Kernel two-sample testing with the unbiased MMD² statistic.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::rkhs::gram;
use crate::seq::Sequence;

pub const MIN_BOOTSTRAP: usize = 100;

/// Independent generator number `index` derived from `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BootstrapMethod {
    /// Recompute the statistic under random relabelling of the pooled sample.
    #[default]
    Permutation,
    /// Rademacher-weighted sums of the double-centred core; needs equal
    /// sample sizes.
    Multiplier,
}

impl FromStr for BootstrapMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "permutation" => Ok(BootstrapMethod::Permutation),
            "multiplier" => Ok(BootstrapMethod::Multiplier),
            other => Err(Error::param("method", format!("unknown bootstrap method `{other}`"))),
        }
    }
}

impl fmt::Display for BootstrapMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BootstrapMethod::Permutation => "permutation",
            BootstrapMethod::Multiplier => "multiplier",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOptions {
    pub n_bootstrap: usize,
    pub level: f64,
    pub seed: u64,
    pub method: BootstrapMethod,
}

impl Default for TestOptions {
    fn default() -> Self {
        TestOptions {
            n_bootstrap: 500,
            level: 0.05,
            seed: 0,
            method: BootstrapMethod::Permutation,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    /// Unbiased estimate of MMD², which may be negative.
    pub mmd_observed: f64,
    pub p_value: f64,
    pub n_bootstrap: usize,
    pub rejected: bool,
    pub level: f64,
    pub seed: u64,
    pub method: BootstrapMethod,
}

/// Kernel values on the pooled sample `x ++ y`, evaluated once per distinct
/// sequence.
struct PooledGram {
    n: usize,
    values: Vec<f64>,
}

impl PooledGram {
    fn new(kernel: &Kernel, xs: &[Sequence], ys: &[Sequence]) -> Result<Self> {
        let mut index: HashMap<&Sequence, usize> = HashMap::new();
        let mut unique = Vec::new();
        let ids: Vec<usize> = xs
            .iter()
            .chain(ys)
            .map(|s| {
                *index.entry(s).or_insert_with(|| {
                    unique.push(s.clone());
                    unique.len() - 1
                })
            })
            .collect();
        let g = gram(kernel, &unique)?;
        let n = ids.len();
        let mut values = Vec::with_capacity(n * n);
        for &a in &ids {
            values.extend(ids.iter().map(|&b| g.get(a, b)));
        }
        Ok(PooledGram { n, values })
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    fn block_sum(&self, rows: &[usize], cols: &[usize]) -> f64 {
        rows.iter()
            .map(|&i| {
                let r = self.row(i);
                cols.iter().map(|&j| r[j]).sum::<f64>()
            })
            .sum()
    }

    fn diagonal_sum(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.values[i * self.n + i]).sum()
    }

    /// Unbiased MMD² with the first `n_x` entries of `order` as sample x.
    fn u_statistic(&self, order: &[usize], n_x: usize) -> f64 {
        let (x, y) = order.split_at(n_x);
        let (n, m) = (x.len() as f64, y.len() as f64);
        let xx = self.block_sum(x, x) - self.diagonal_sum(x);
        let yy = self.block_sum(y, y) - self.diagonal_sum(y);
        let xy = self.block_sum(x, y);
        xx / (n * (n - 1.0)) + yy / (m * (m - 1.0)) - 2.0 * xy / (n * m)
    }

    fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

pub fn mmd_two_sample_test(
    kernel: &Kernel,
    xs: &[Sequence],
    ys: &[Sequence],
    n_bootstrap: usize,
    level: f64,
    seed: u64,
) -> Result<TestResult> {
    mmd_two_sample_test_with(
        kernel,
        xs,
        ys,
        &TestOptions {
            n_bootstrap,
            level,
            seed,
            method: BootstrapMethod::Permutation,
        },
    )
}

pub fn mmd_two_sample_test_with(kernel: &Kernel, xs: &[Sequence], ys: &[Sequence], opts: &TestOptions) -> Result<TestResult> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptySample);
    }
    if xs.len() < 2 || ys.len() < 2 {
        return Err(Error::param("sample", "the unbiased statistic needs at least two sequences per sample"));
    }
    if opts.n_bootstrap < MIN_BOOTSTRAP {
        return Err(Error::TooFewBootstrap(opts.n_bootstrap));
    }
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::param("level", format!("must lie in (0, 1), got {}", opts.level)));
    }
    let pooled = PooledGram::new(kernel, xs, ys)?;
    let identity: Vec<usize> = (0..pooled.n).collect();
    let observed = pooled.u_statistic(&identity, xs.len());

    let replicates: Vec<f64> = match opts.method {
        BootstrapMethod::Permutation => (0..opts.n_bootstrap)
            .into_par_iter()
            .map(|b| {
                let mut rng = substream(opts.seed, b as u64);
                let mut order = identity.clone();
                order.shuffle(&mut rng);
                pooled.u_statistic(&order, xs.len())
            })
            .collect(),
        BootstrapMethod::Multiplier => {
            if xs.len() != ys.len() {
                return Err(Error::param(
                    "method",
                    "the multiplier bootstrap needs equal sample sizes",
                ));
            }
            let core = centred_core(&pooled, xs.len());
            let n = xs.len();
            let norm = (n * (n - 1)) as f64;
            (0..opts.n_bootstrap)
                .into_par_iter()
                .map(|b| {
                    let mut rng = substream(opts.seed, b as u64);
                    let w: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
                    let mut s = 0.0;
                    for i in 0..n {
                        let row = &core[i * n..(i + 1) * n];
                        let inner: f64 = (0..n).filter(|&j| j != i).map(|j| w[j] * row[j]).sum();
                        s += w[i] * inner;
                    }
                    s / norm
                })
                .collect()
        }
    };

    let tol = 1e-12 * pooled.max_abs().max(f64::MIN_POSITIVE);
    let exceed = replicates.iter().filter(|&&r| r >= observed - tol).count();
    let p_value = (1 + exceed) as f64 / (1 + opts.n_bootstrap) as f64;
    Ok(TestResult {
        mmd_observed: observed,
        p_value,
        n_bootstrap: opts.n_bootstrap,
        rejected: p_value < opts.level,
        level: opts.level,
        seed: opts.seed,
        method: opts.method,
    })
}

/// `h(i, j) = k(x_i,x_j) + k(y_i,y_j) - k(x_i,y_j) - k(x_j,y_i)` with row,
/// column and grand means removed.
fn centred_core(pooled: &PooledGram, n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] = pooled.row(i)[j] + pooled.row(n + i)[n + j] - pooled.row(i)[n + j] - pooled.row(j)[n + i];
        }
    }
    let row_means: Vec<f64> = (0..n).map(|i| h[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    // h is symmetric, so column means equal row means
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += grand - row_means[i] - row_means[j];
        }
    }
    h
}

/// Draws `n` sequences.
pub type Sampler = dyn Fn(&mut ChaCha8Rng, usize) -> Vec<Sequence> + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPoint {
    pub n: usize,
    pub rejection_rate: f64,
}

/// Fraction of `trials` independent tests that reject, for each sample size.
#[allow(clippy::too_many_arguments)]
pub fn power_curve(
    kernel: &Kernel,
    sampler_p: &Sampler,
    sampler_q: &Sampler,
    sizes: &[usize],
    trials: usize,
    level: f64,
    n_bootstrap: usize,
    seed: u64,
) -> Result<Vec<PowerPoint>> {
    if trials < 10 {
        return Err(Error::param("trials", format!("at least 10 are required, got {trials}")));
    }
    sizes
        .iter()
        .enumerate()
        .map(|(s, &n)| {
            let rejections = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let index = ((s as u64) << 32) | t as u64;
                    let mut rng = substream(seed, index);
                    let (xs, ys) = (sampler_p(&mut rng, n), sampler_q(&mut rng, n));
                    let test_seed = rng.random::<u64>();
                    mmd_two_sample_test(kernel, &xs, &ys, n_bootstrap, level, test_seed).map(|r| r.rejected)
                })
                .collect::<Result<Vec<bool>>>()?;
            Ok(PowerPoint {
                n,
                rejection_rate: rejections.iter().filter(|&&r| r).count() as f64 / trials as f64,
            })
        })
        .collect()
}
