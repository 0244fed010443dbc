//! Greedy single-edit search for a sequence whose point mass is close, in
//! MMD, to a target measure.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::rkhs::{rkhs_norm_squared, EmpiricalMeasure};
use crate::seq::{Letter, Sequence};

pub const DEFAULT_MIN_IMPROVEMENT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edit {
    Substitution { position: usize, letter: Letter },
    Deletion { position: usize },
    Insertion { position: usize, letter: Letter },
    None,
}

impl Edit {
    pub fn apply(&self, x: &Sequence) -> Sequence {
        let mut s = x.symbols().to_vec();
        match *self {
            Edit::Substitution { position, letter } => s[position] = letter,
            Edit::Deletion { position } => {
                s.remove(position);
            }
            Edit::Insertion { position, letter } => s.insert(position, letter),
            Edit::None => {}
        }
        x.with_symbols(s)
    }

    /// Human-readable form using the alphabet's tokens.
    pub fn describe(&self, x: &Sequence) -> String {
        let token = |l: Letter| x.alphabet().token(l).to_string();
        match *self {
            Edit::Substitution { position, letter } => format!("sub({position},{})", token(letter)),
            Edit::Deletion { position } => format!("del({position})"),
            Edit::Insertion { position, letter } => format!("ins({position},{})", token(letter)),
            Edit::None => "none".to_string(),
        }
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Edit::Substitution { position, letter } => write!(f, "sub({position},#{letter})"),
            Edit::Deletion { position } => write!(f, "del({position})"),
            Edit::Insertion { position, letter } => write!(f, "ins({position},#{letter})"),
            Edit::None => f.write_str("none"),
        }
    }
}

/// All single-edit neighbours of `x`: substitutions by position then letter,
/// deletions by position, insertions by position then letter.
pub fn neighbors(x: &Sequence) -> Vec<(Edit, Sequence)> {
    let b = x.alphabet().len();
    let n = x.len();
    let mut out = Vec::with_capacity(n * b.saturating_sub(1) + n + (n + 1) * b);
    for position in 0..n {
        for letter in 0..b as Letter {
            if letter != x.symbols()[position] {
                out.push(Edit::Substitution { position, letter });
            }
        }
    }
    out.extend((0..n).map(|position| Edit::Deletion { position }));
    for position in 0..=n {
        out.extend((0..b as Letter).map(|letter| Edit::Insertion { position, letter }));
    }
    out.into_iter().map(|e| (e, e.apply(x))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub step: usize,
    pub sequence: Sequence,
    pub mmd: f64,
    pub edit: Edit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub steps: Vec<TraceStep>,
    /// No neighbour improved on the last sequence before the step budget ran
    /// out.
    pub converged: bool,
}

impl OptimizationTrace {
    pub fn last(&self) -> &TraceStep {
        self.steps.last().expect("a trace always holds its initial step")
    }
}

/// `MMD²(δ_x, target)` as `k(x,x) - 2 Σ w_n k(x, y_n) + const`.
struct Objective<'a> {
    kernel: &'a Kernel,
    atoms: Vec<Sequence>,
    weights: Vec<f64>,
    constant: f64,
}

impl Objective<'_> {
    fn squared(&self, x: &Sequence) -> Result<f64> {
        let mut cross = 0.0;
        for (y, w) in self.atoms.iter().zip(&self.weights) {
            cross += w * self.kernel.eval(x, y)?;
        }
        Ok(self.kernel.eval(x, x)? - 2.0 * cross + self.constant)
    }
}

pub fn greedy_mmd_optimize(
    kernel: &Kernel,
    target: &EmpiricalMeasure,
    init: &Sequence,
    max_steps: usize,
    min_improvement: f64,
) -> Result<OptimizationTrace> {
    if max_steps == 0 {
        return Err(Error::param("max_steps", "must be at least 1"));
    }
    if target.is_empty() {
        return Err(Error::EmptySample);
    }
    if min_improvement.is_nan() || min_improvement < 0.0 {
        return Err(Error::param("min_improvement", "must be non-negative"));
    }
    let (atoms, weights) = target.collapsed();
    atoms[0].check_alphabet(init)?;
    let objective = Objective {
        kernel,
        constant: rkhs_norm_squared(kernel, target)?,
        atoms,
        weights,
    };
    let mmd_of = |sq: f64| sq.max(0.0).sqrt();

    let mut cache: HashMap<Sequence, f64> = HashMap::new();
    let start = objective.squared(init)?;
    cache.insert(init.clone(), start);
    let mut steps = vec![TraceStep {
        step: 0,
        sequence: init.clone(),
        mmd: mmd_of(start),
        edit: Edit::None,
    }];

    for step in 1..=max_steps {
        let current = steps.last().expect("non-empty trace");
        let candidates = neighbors(&current.sequence);
        let fresh: Vec<&Sequence> = candidates
            .iter()
            .map(|(_, s)| s)
            .filter(|s| !cache.contains_key(*s))
            .collect();
        let values: Vec<f64> = fresh.par_iter().map(|s| objective.squared(s)).collect::<Result<_>>()?;
        for (s, v) in fresh.into_iter().zip(values) {
            cache.insert(s.clone(), v);
        }
        // first strictly smallest wins, so ties fall back to generation order
        let mut best: Option<(f64, &Edit, &Sequence)> = None;
        for (edit, s) in &candidates {
            let v = mmd_of(cache[s]);
            if best.is_none_or(|(b, _, _)| v < b) {
                best = Some((v, edit, s));
            }
        }
        match best {
            Some((v, edit, s)) if current.mmd - v >= min_improvement && v < current.mmd => {
                steps.push(TraceStep {
                    step,
                    sequence: s.clone(),
                    mmd: v,
                    edit: *edit,
                });
            }
            _ => return Ok(OptimizationTrace { steps, converged: true }),
        }
    }
    Ok(OptimizationTrace { steps, converged: false })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthSummary {
    pub final_length: usize,
    pub target_min: usize,
    pub target_mean: f64,
    pub target_max: usize,
}

/// Final sequence length against the length distribution of the target.
pub fn length_statistics(trace: &OptimizationTrace, target: &EmpiricalMeasure) -> Result<LengthSummary> {
    if target.is_empty() {
        return Err(Error::EmptySample);
    }
    let total = target.total_mass();
    if total == 0.0 {
        return Err(Error::param("target", "total mass is zero"));
    }
    let lens = target.atoms().iter().map(|(s, _)| s.len());
    Ok(LengthSummary {
        final_length: trace.last().sequence.len(),
        target_min: lens.clone().min().unwrap_or(0),
        target_max: lens.max().unwrap_or(0),
        target_mean: target.atoms().iter().map(|(s, w)| w * s.len() as f64).sum::<f64>() / total,
    })
}
