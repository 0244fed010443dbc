use std::collections::HashMap;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqkern::config::kernel_from_settings;
use seqkern::optimize::{greedy_mmd_optimize, DEFAULT_MIN_IMPROVEMENT};
use seqkern::rkhs::{discrete_mass_diagnostic, fit_regression, gram, predict_many, EmpiricalMeasure};
use seqkern::seq::{enumerate_up_to, Alphabet, Sequence};
use seqkern::stats::{mmd_two_sample_test_with, BootstrapMethod, TestOptions};
use seqkern::synth::{sample_cdr3_like, sample_mirrored, sample_uniform, toy_regression, Cdr3Shape};
use seqkern::Kernel;

use crate::failure::Failure;
use crate::fasta::{read_fasta, write_fasta, Record};
use crate::output::{csv_writer, fmt_f64, open_output};
use crate::run_config::{Keys, RunConfig};

/// Upper bound on the number of sequences `diagnose` enumerates from length
/// cutoffs.
const MAX_ENUMERATED: usize = 5000;

pub const GRAM_KEYS: Keys = Keys { data: &["input"], run: &[] };
pub const REGRESS_KEYS: Keys = Keys {
    data: &["input", "labels"],
    run: &["ridge", "train_fraction"],
};
pub const MMD_TEST_KEYS: Keys = Keys {
    data: &["x", "y"],
    run: &["n_bootstrap", "level", "method"],
};
pub const OPTIMIZE_KEYS: Keys = Keys {
    data: &["target", "init"],
    run: &["max_steps", "min_improvement", "normalize"],
};
pub const DIAGNOSE_KEYS: Keys = Keys {
    data: &["target", "cutoffs", "sets"],
    run: &[],
};
pub const SYNTH_KEYS: Keys = Keys {
    data: &["labels"],
    run: &["preset", "n", "len", "half"],
};

/// Everything a subcommand needs: the merged configuration, the alphabet
/// and the seed.
pub struct Context {
    pub cfg: RunConfig,
    pub alphabet: Arc<Alphabet>,
    pub seed: u64,
}

impl Context {
    fn kernel(&self) -> Result<Kernel, Failure> {
        if self.cfg.kernel.is_empty() {
            return Err(Failure::config("no kernel configured; set `family` in [kernel] or pass `--family`"));
        }
        Ok(kernel_from_settings(&self.cfg.kernel, &self.alphabet, self.cfg.base_dir.as_deref())?)
    }

    fn fasta(&self, key: &str) -> Result<Vec<Record>, Failure> {
        let path = self
            .cfg
            .data_path(key)
            .ok_or_else(|| Failure::config(format!("missing data key `{key}`")))?;
        read_fasta(&path, &self.alphabet)
    }

    fn run_value<T: FromStr>(&self, key: &str, default: T) -> Result<T, Failure>
    where
        T::Err: std::fmt::Display,
    {
        match self.cfg.run.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| Failure::config(format!("[run] {key} = `{v}`: {e}"))),
        }
    }

    fn run_flag(&self, key: &str) -> Result<bool, Failure> {
        match self.cfg.run.get(key).map(|v| v.to_ascii_lowercase()) {
            None => Ok(false),
            Some(v) if matches!(v.as_str(), "true" | "yes" | "1") => Ok(true),
            Some(v) if matches!(v.as_str(), "false" | "no" | "0") => Ok(false),
            Some(v) => Err(Failure::config(format!("[run] {key}: expected a boolean, got `{v}`"))),
        }
    }

    fn output(&self) -> Result<csv::Writer<Box<dyn Write>>, Failure> {
        Ok(csv_writer(open_output(self.cfg.output_path().as_deref())?))
    }
}

fn sequences(records: &[Record]) -> Vec<Sequence> {
    records.iter().map(|r| r.sequence.clone()).collect()
}

pub fn gram_cmd(ctx: &Context) -> Result<(), Failure> {
    let kernel = ctx.kernel()?;
    let records = ctx.fasta("input")?;
    let g = gram(&kernel, &sequences(&records))?;
    let mut out = ctx.output()?;
    out.write_record(records.iter().map(|r| r.id.as_str()))?;
    for i in 0..g.dim() {
        out.write_record((0..g.dim()).map(|j| fmt_f64(g.get(i, j))))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads `id,label` rows; a first row whose label does not parse is a header.
fn read_labels(ctx: &Context) -> Result<HashMap<String, f64>, Failure> {
    let path = ctx
        .cfg
        .data_path("labels")
        .ok_or_else(|| Failure::config("missing data key `labels`"))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(&path)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let mut labels = HashMap::new();
    for (n, row) in reader.records().enumerate() {
        let row = row?;
        if row.len() != 2 {
            return Err(Failure::data(format!("{}: row {} needs `id,label`", path.display(), n + 1)));
        }
        let value = match row[1].parse::<f64>() {
            Ok(v) => v,
            Err(_) if n == 0 => continue,
            Err(e) => return Err(Failure::data(format!("{}: row {}: {e}", path.display(), n + 1))),
        };
        if labels.insert(row[0].to_string(), value).is_some() {
            return Err(Failure::data(format!("duplicate label for `{}`", &row[0])));
        }
    }
    Ok(labels)
}

/// RMSE divided by the standard deviation of the labels; 0 with a warning
/// when the labels are constant.
fn normalized_rmse(pred: &[f64], truth: &[f64], split: &str) -> f64 {
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let std = (truth.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n).sqrt();
    if std == 0.0 {
        eprintln!("warning: {split} labels are constant; normalized RMSE reported as 0");
        return 0.0;
    }
    let mse = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / n;
    mse.sqrt() / std
}

pub fn regress_cmd(ctx: &Context) -> Result<(), Failure> {
    let kernel = ctx.kernel()?;
    let records = ctx.fasta("input")?;
    let labels = read_labels(ctx)?;
    if records.len() != labels.len() {
        return Err(Failure::data(format!(
            "{} sequences but {} labels",
            records.len(),
            labels.len()
        )));
    }
    let truth: Vec<f64> = records
        .iter()
        .map(|r| labels.get(&r.id).copied().ok_or_else(|| Failure::data(format!("no label for `{}`", r.id))))
        .collect::<Result<_, _>>()?;
    let ridge: f64 = ctx.run_value("ridge", 0.0)?;
    let fraction: f64 = ctx.run_value("train_fraction", 1.0)?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Failure::config(format!("train_fraction must lie in (0, 1], got {fraction}")));
    }

    let mut order: Vec<usize> = (0..records.len()).collect();
    if fraction < 1.0 {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(ctx.seed));
    }
    let n_train = ((fraction * records.len() as f64).ceil() as usize).max(1);
    let mut is_train = vec![false; records.len()];
    for &i in &order[..n_train] {
        is_train[i] = true;
    }
    let pick = |want: bool| -> Vec<usize> { (0..records.len()).filter(|&i| is_train[i] == want).collect() };
    let (train, test) = (pick(true), pick(false));

    let train_seqs: Vec<Sequence> = train.iter().map(|&i| records[i].sequence.clone()).collect();
    let train_y: Vec<f64> = train.iter().map(|&i| truth[i]).collect();
    let fit = fit_regression(&gram(&kernel, &train_seqs)?, &train_y, ridge)?;
    let predicted = predict_many(&fit, &sequences(&records))?;

    let mut out = ctx.output()?;
    out.write_record(["id", "split", "label", "prediction"])?;
    for (i, r) in records.iter().enumerate() {
        let split = if is_train[i] { "train" } else { "test" };
        out.write_record([r.id.clone(), split.into(), fmt_f64(truth[i]), fmt_f64(predicted[i])])?;
    }
    out.flush()?;

    let score = |idx: &[usize], split: &str| {
        let p: Vec<f64> = idx.iter().map(|&i| predicted[i]).collect();
        let t: Vec<f64> = idx.iter().map(|&i| truth[i]).collect();
        normalized_rmse(&p, &t, split)
    };
    let mut summary = format!("normalized_rmse train={}", fmt_f64(score(&train, "train")));
    if !test.is_empty() {
        summary.push_str(&format!(" test={}", fmt_f64(score(&test, "test"))));
    }
    eprintln!("{summary}");
    Ok(())
}

pub fn mmd_test_cmd(ctx: &Context) -> Result<(), Failure> {
    let kernel = ctx.kernel()?;
    let (xs, ys) = (sequences(&ctx.fasta("x")?), sequences(&ctx.fasta("y")?));
    let opts = TestOptions {
        n_bootstrap: ctx.run_value("n_bootstrap", TestOptions::default().n_bootstrap)?,
        level: ctx.run_value("level", TestOptions::default().level)?,
        method: ctx.run_value("method", BootstrapMethod::default())?,
        seed: ctx.seed,
    };
    let r = mmd_two_sample_test_with(&kernel, &xs, &ys, &opts)?;
    let mut out = ctx.output()?;
    out.write_record(["mmd_observed", "p_value", "rejected", "level", "seed", "n_bootstrap", "method"])?;
    out.write_record([
        fmt_f64(r.mmd_observed),
        fmt_f64(r.p_value),
        r.rejected.to_string(),
        fmt_f64(r.level),
        r.seed.to_string(),
        r.n_bootstrap.to_string(),
        r.method.to_string(),
    ])?;
    out.flush()?;
    Ok(())
}

pub fn optimize_cmd(ctx: &Context) -> Result<(), Failure> {
    let kernel = ctx.kernel()?;
    let target = sequences(&ctx.fasta("target")?);
    let measure = EmpiricalMeasure::uniform(&target)?;
    let init = match ctx.cfg.data.get("init") {
        Some(text) => Sequence::parse(&ctx.alphabet, text).map_err(|e| Failure::data(format!("init: {e}")))?,
        None => target[0].concat(&target[0])?,
    };
    let max_steps = ctx.run_value("max_steps", 100usize)?;
    let min_improvement = ctx.run_value("min_improvement", DEFAULT_MIN_IMPROVEMENT)?;
    let trace = greedy_mmd_optimize(&kernel, &measure, &init, max_steps, min_improvement)?;
    let scale = match trace.steps[0].mmd {
        m if ctx.run_flag("normalize")? && m > 0.0 => m,
        _ => 1.0,
    };
    let mut out = ctx.output()?;
    out.write_record(["step", "sequence", "mmd", "edit"])?;
    let mut previous = &init;
    for s in &trace.steps {
        out.write_record([
            s.step.to_string(),
            s.sequence.to_string(),
            fmt_f64(s.mmd / scale),
            s.edit.describe(previous),
        ])?;
        previous = &s.sequence;
    }
    out.flush()?;
    if !trace.converged {
        eprintln!("warning: step budget of {max_steps} exhausted before convergence");
    }
    Ok(())
}

fn parse_cutoffs(text: &str) -> Result<Vec<usize>, Failure> {
    text.split(',')
        .map(|c| {
            c.trim()
                .parse::<usize>()
                .map_err(|e| Failure::config(format!("cutoffs: `{c}`: {e}")))
        })
        .collect()
}

pub fn diagnose_cmd(ctx: &Context) -> Result<(), Failure> {
    let kernel = ctx.kernel()?;
    let target_text = ctx
        .cfg
        .data
        .get("target")
        .ok_or_else(|| Failure::config("missing data key `target`"))?;
    let target = Sequence::parse(&ctx.alphabet, target_text).map_err(|e| Failure::data(format!("target: {e}")))?;
    let sets: Vec<Vec<Sequence>> = match (ctx.cfg.data.get("cutoffs"), ctx.cfg.data_paths("sets")) {
        (Some(c), None) => {
            let cutoffs = parse_cutoffs(c)?;
            let b = ctx.alphabet.len() as f64;
            let largest = cutoffs.iter().copied().max().unwrap_or(0);
            if (0..=largest).map(|l| b.powi(l as i32)).sum::<f64>() > MAX_ENUMERATED as f64 {
                return Err(Failure::config(format!(
                    "cutoff {largest} enumerates more than {MAX_ENUMERATED} sequences"
                )));
            }
            cutoffs.iter().map(|&l| enumerate_up_to(&ctx.alphabet, l)).collect()
        }
        (None, Some(paths)) => paths
            .iter()
            .map(|p| read_fasta(p, &ctx.alphabet).map(|r| sequences(&r)))
            .collect::<Result<_, _>>()?,
        _ => return Err(Failure::config("set exactly one of `cutoffs` and `sets` in [data]")),
    };
    let rows = discrete_mass_diagnostic(&kernel, &target, &sets)?;
    let mut out = ctx.output()?;
    out.write_record(["set_size", "c", "min_eigenvalue"])?;
    for r in rows {
        out.write_record([r.set_size.to_string(), fmt_f64(r.c), fmt_f64(r.min_eigenvalue)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn synth_cmd(ctx: &Context) -> Result<(), Failure> {
    if !ctx.cfg.kernel.is_empty() {
        return Err(Failure::config("synth takes no kernel settings"));
    }
    let preset = ctx
        .cfg
        .run
        .get("preset")
        .ok_or_else(|| Failure::config("missing run key `preset` (toy-regression, mirrored-halves or tcr-like)"))?;
    let n: usize = ctx.run_value("n", 100)?;
    let len: usize = ctx.run_value("len", 4)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let named = |seqs: Vec<Sequence>| -> Vec<Record> {
        seqs.into_iter()
            .enumerate()
            .map(|(i, sequence)| Record {
                id: format!("seq{}", i + 1),
                sequence,
            })
            .collect()
    };
    let records = match preset.as_str() {
        "toy-regression" => {
            let (xs, ys) = toy_regression(len);
            let records = named(xs);
            let path = ctx
                .cfg
                .data_path("labels")
                .ok_or_else(|| Failure::config("toy-regression needs `labels`, the path for the label CSV"))?;
            let mut labels = csv_writer(open_output(Some(&path))?);
            labels.write_record(["id", "label"])?;
            for (r, y) in records.iter().zip(ys) {
                labels.write_record([r.id.clone(), fmt_f64(y)])?;
            }
            labels.flush()?;
            records
        }
        "mirrored-halves" => {
            let mirrored = match ctx.cfg.run.get("half").map(String::as_str) {
                None | Some("mirrored") => true,
                Some("uniform") => false,
                Some(other) => return Err(Failure::config(format!("half must be `mirrored` or `uniform`, got `{other}`"))),
            };
            let seqs = (0..n)
                .map(|_| {
                    if mirrored {
                        sample_mirrored(&mut rng, &ctx.alphabet, len)
                    } else {
                        Ok(sample_uniform(&mut rng, &ctx.alphabet, len))
                    }
                })
                .collect::<Result<_, _>>()?;
            named(seqs)
        }
        "tcr-like" => named(
            (0..n)
                .map(|_| sample_cdr3_like(&mut rng, &Cdr3Shape::default()))
                .collect::<Result<_, _>>()?,
        ),
        other => return Err(Failure::config(format!("unknown preset `{other}`"))),
    };
    let mut out = open_output(ctx.cfg.output_path().as_deref())?;
    write_fasta(&mut out, &records)?;
    out.flush()?;
    Ok(())
}
