mod common;

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use common::rel_err;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rayon::prelude::*;
use seqkern::alignment::{alignment_kernel, AlignmentParams, GapStart};
use seqkern::embedding::{Embedding, RandomBallEmbedding, ScaledEmbedding};
use seqkern::kernel::{eval_vector_encoded, sum_kernel, tilt_kernel};
use seqkern::optimize::{greedy_mmd_optimize, neighbors};
use seqkern::positional::{
    base_positionwise, centre_justified_with_separator, exp_hamming, imq_hamming, shift_term_kernel, shifted_kernel,
    LetterKernel,
};
use seqkern::rkhs::{fit_regression, gram, mmd, mmd_squared, EmpiricalMeasure};
use seqkern::seq::{enumerate_sequences, enumerate_up_to, hamming_distance, Alphabet, Sequence, VectorSequence};

fn dna_string(max_len: usize) -> impl Strategy<Value = String> {
    proptest::string::string_regex(&format!("[ACGT]{{0,{max_len}}}")).unwrap()
}

fn dna(s: &str) -> Sequence {
    Sequence::parse(&Alphabet::dna(), s).unwrap()
}

fn distinct_set(max_size: usize, max_len: usize) -> impl Strategy<Value = Vec<Sequence>> {
    proptest::collection::btree_set(dna_string(max_len), 1..=max_size)
        .prop_map(|set: BTreeSet<String>| set.iter().map(|s| dna(s)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hamming_is_a_metric(a in dna_string(8), b in dna_string(8), c in dna_string(8)) {
        let (x, y, z) = (dna(&a), dna(&b), dna(&c));
        let d = |u: &Sequence, v: &Sequence| hamming_distance(u, v).unwrap();
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z));
        prop_assert!(d(&x, &y) <= x.len().max(y.len()));
        prop_assert_eq!(d(&x, &x), 0);
    }

    #[test]
    fn appending_below_the_other_length_fixes_at_most_one_mismatch(a in dna_string(6), b in dna_string(8), letter in 0u8..4) {
        let (x, y) = (dna(&a), dna(&b));
        prop_assume!(x.len() < y.len());
        let mut longer = x.symbols().to_vec();
        longer.push(letter);
        let x2 = Sequence::new(&Alphabet::dna(), longer).unwrap();
        let (before, after) = (hamming_distance(&x, &y).unwrap(), hamming_distance(&x2, &y).unwrap());
        // the new position mismatched the stop symbol before
        let fixed = usize::from(y.symbols()[x.len()] == letter);
        prop_assert_eq!(after, before - fixed);
    }

    #[test]
    fn kernel_families_are_symmetric_and_psd(seqs in distinct_set(12, 7)) {
        for k in common::kernel_families() {
            for x in &seqs {
                for y in &seqs {
                    let (a, b) = (k.eval(x, y).unwrap(), k.eval(y, x).unwrap());
                    prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{}", k.family());
                }
            }
            let g = gram(&k, &seqs).unwrap();
            prop_assert!(g.min_eigenvalue() >= -1e-9 * g.trace().max(1.0), "{}: {}", k.family(), g.min_eigenvalue());
        }
    }

    #[test]
    fn centre_justified_is_symmetric_and_psd(
        set in proptest::collection::btree_set(proptest::string::string_regex("[ACG]{0,3}T[ACG]{0,3}").unwrap(), 1..=12),
    ) {
        let k = centre_justified_with_separator(exp_hamming(0.5).unwrap(), &Alphabet::dna(), "T").unwrap();
        let seqs: Vec<Sequence> = set.iter().map(|s| dna(s)).collect();
        let g = gram(&k, &seqs).unwrap();
        prop_assert!((g.matrix() - g.matrix().transpose()).amax() < 1e-14);
        prop_assert!(g.min_eigenvalue() >= -1e-9 * g.trace());
    }

    #[test]
    fn shifted_kernel_is_the_sum_of_its_terms(a in dna_string(7), b in dna_string(7), shift_max in 0usize..4) {
        let (x, y) = (dna(&a), dna(&b));
        let inner = exp_hamming(0.6).unwrap();
        let shifted = shifted_kernel(inner.clone(), shift_max);
        let parts = (0..=shift_max).map(|l| (1.0, shift_term_kernel(inner.clone(), l))).collect();
        let summed = sum_kernel(parts).unwrap();
        let v = shifted.eval(&x, &y).unwrap();
        prop_assert!(rel_err(v, summed.eval(&x, &y).unwrap()) < 1e-12);
        prop_assert!(rel_err(v, shifted.eval(&y, &x).unwrap()) < 1e-12);
    }

    #[test]
    fn tilts_compose(seqs in distinct_set(6, 6), r1 in -1.0f64..1.0, r2 in -1.0f64..1.0) {
        let base = imq_hamming(1.0, 1.0).unwrap();
        let a = move |x: &Sequence| (r1 * x.len() as f64).exp();
        let b = move |x: &Sequence| 1.0 + (r2 * x.len() as f64).exp();
        let twice = tilt_kernel(tilt_kernel(base.clone(), a), b);
        let once = tilt_kernel(base, move |x| a(x) * b(x));
        for x in &seqs {
            for y in &seqs {
                prop_assert!(rel_err(twice.eval(x, y).unwrap(), once.eval(x, y).unwrap()) < 1e-12);
            }
        }
    }

    #[test]
    fn imq_hamming_decreases_with_distance(c in 0.1f64..5.0, beta in 0.1f64..3.0, a in dna_string(6), b in dna_string(6), d in dna_string(6)) {
        let k = imq_hamming(c, beta).unwrap();
        let (x, y, z) = (dna(&a), dna(&b), dna(&d));
        let (dy, dz) = (hamming_distance(&x, &y).unwrap(), hamming_distance(&x, &z).unwrap());
        let (ky, kz) = (k.eval(&x, &y).unwrap(), k.eval(&x, &z).unwrap());
        if dy < dz {
            prop_assert!(ky > kz);
        } else if dy == dz {
            prop_assert_eq!(ky, kz);
        }
    }

    #[test]
    fn mmd_is_a_pseudo_metric(
        s1 in distinct_set(4, 5), s2 in distinct_set(4, 5), s3 in distinct_set(4, 5),
    ) {
        let k = alignment_kernel(AlignmentParams::exponential(4, 1.0, 0.4, GapStart::Finite(0.2)).unwrap());
        let (p, q, r) = (
            EmpiricalMeasure::uniform(&s1).unwrap(),
            EmpiricalMeasure::uniform(&s2).unwrap(),
            EmpiricalMeasure::uniform(&s3).unwrap(),
        );
        let d = |a: &EmpiricalMeasure, b: &EmpiricalMeasure| mmd(&k, a, b).unwrap();
        prop_assert!(d(&p, &p) < 1e-7);
        prop_assert!((d(&p, &q) - d(&q, &p)).abs() < 1e-12);
        prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-9);
    }

    #[test]
    fn mmd_squared_expands_through_the_gram(s1 in distinct_set(5, 5), s2 in distinct_set(5, 5)) {
        let k = imq_hamming(1.0, 0.7).unwrap();
        let (p, q) = (EmpiricalMeasure::uniform(&s1).unwrap(), EmpiricalMeasure::uniform(&s2).unwrap());
        let (atoms, weights) = p.difference(&q).collapsed();
        let g = gram(&k, &atoms).unwrap();
        let w = DVector::from_vec(weights);
        let expanded = w.dot(&(g.matrix() * &w));
        prop_assert!((mmd_squared(&k, &p, &q).unwrap() - expanded.max(0.0)).abs() < 1e-10);
    }

    #[test]
    fn interpolation_on_strictly_pd_grams(seqs in distinct_set(10, 6), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<f64> = seqs.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = gram(&imq_hamming(1.0, 1.0).unwrap(), &seqs).unwrap();
        let fit = fit_regression(&g, &labels, 0.0).unwrap();
        let fitted = g.matrix() * &fit.alpha;
        for (f, y) in fitted.iter().zip(&labels) {
            prop_assert!((f - y).abs() < 1e-8);
        }
    }

    #[test]
    fn neighbourhood_sizes(a in dna_string(8)) {
        let x = dna(&a);
        let (n, b) = (x.len(), 4);
        let all = neighbors(&x);
        prop_assert_eq!(all.len(), n * (b - 1) + n + (n + 1) * b);
        let distinct: HashSet<_> = all.iter().map(|(_, s)| s.clone()).collect();
        prop_assert!(!distinct.contains(&x));
        prop_assert!(distinct.len() <= all.len());
    }
}

#[test]
fn shifted_kernel_gram_can_be_indefinite() {
    let seqs = enumerate_up_to(&Alphabet::dna(), 3);
    let g = gram(&shifted_kernel(exp_hamming(3.0).unwrap(), 2), &seqs).unwrap();
    assert!(g.min_eigenvalue() < -1.0);
}

#[test]
fn one_hot_reparameterization_keeps_gram_rank() {
    let alphabet = Alphabet::from_chars("ABC").unwrap();
    let k = exp_hamming(0.9).unwrap();
    let change = DMatrix::<f64>::from_row_slice(3, 3, &[1.0, 0.5, -0.2, 0.3, 1.2, 0.1, -0.4, 0.2, 0.9]);
    assert!(change.determinant().abs() > 0.1);
    for len in 1..=2 {
        let seqs = enumerate_sequences(&alphabet, len);
        let encode = |s: &Sequence| {
            VectorSequence::new(
                VectorSequence::one_hot(s)
                    .columns()
                    .iter()
                    .map(|c| (&change * DVector::from_column_slice(c)).iter().copied().collect())
                    .collect(),
            )
        };
        let n = seqs.len();
        let plain = DMatrix::from_fn(n, n, |i, j| k.eval(&seqs[i], &seqs[j]).unwrap());
        let moved = DMatrix::from_fn(n, n, |i, j| {
            eval_vector_encoded(&k, &alphabet, &encode(&seqs[i]), &encode(&seqs[j])).unwrap()
        });
        assert_eq!(plain.rank(1e-9), moved.rank(1e-9));
        assert_eq!(plain.rank(1e-9), n);
    }
}

#[test]
fn base_positionwise_is_strictly_pd_on_short_sequences() {
    let alphabet = Alphabet::from_chars("AB").unwrap();
    let letters = LetterKernel::new(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]), &[0.0, 0.0]).unwrap();
    let g = gram(&base_positionwise(letters), &enumerate_up_to(&alphabet, 2)).unwrap();
    assert!(g.min_eigenvalue() > 1e-12, "{}", g.min_eigenvalue());
}

#[test]
fn embeddings_are_deterministic_under_concurrency() {
    let seqs = enumerate_up_to(&Alphabet::dna(), 4);
    let reference: Vec<_> = {
        let e = RandomBallEmbedding::new(11, 8).unwrap();
        seqs.iter().map(|s| e.embed(s).unwrap()).collect()
    };
    let shared = RandomBallEmbedding::new(11, 8).unwrap();
    for _ in 0..4 {
        let raced: Vec<_> = seqs.par_iter().map(|s| shared.embed(s).unwrap()).collect();
        assert_eq!(raced, reference);
    }
}

#[test]
fn random_ball_points_do_not_collide() {
    let e = RandomBallEmbedding::new(3, 4).unwrap();
    let seqs = enumerate_up_to(&Alphabet::dna(), 6);
    let keys: HashSet<Vec<u64>> = seqs
        .iter()
        .map(|s| e.embed(s).unwrap().iter().map(|v| v.to_bits()).collect())
        .collect();
    assert_eq!(keys.len(), seqs.len());
    assert!(seqs.iter().all(|s| e.embed(s).unwrap().iter().map(|v| v * v).sum::<f64>() <= 1.0));
}

#[test]
fn scaling_multiplies_by_a_length_factor() {
    let base: Arc<dyn Embedding> = Arc::new(RandomBallEmbedding::new(9, 4).unwrap());
    let scaled = ScaledEmbedding::new(base.clone(), 0.1, 4).unwrap();
    let expected = |len: usize| 4f64.powf(1.1 * len as f64 / 4.0);
    for s in enumerate_up_to(&Alphabet::dna(), 3) {
        let factor = scaled.scale(s.len());
        assert!(rel_err(factor, expected(s.len())) < 1e-14);
        let (u, v) = (base.embed(&s).unwrap(), scaled.embed(&s).unwrap());
        assert!(u.iter().zip(v.iter()).all(|(a, b)| rel_err(a * factor, *b) < 1e-14));
    }
}

#[test]
fn greedy_trace_is_monotone_and_deterministic() {
    let k = imq_hamming(1.0, 1.0).unwrap();
    let target = EmpiricalMeasure::uniform(&["ACGT", "ACGA", "TCGT"].map(dna)).unwrap();
    let min_improvement = 1e-6;
    let run = || greedy_mmd_optimize(&k, &target, &dna("GGGGGG"), 50, min_improvement).unwrap();
    let trace = run();
    assert!(trace.converged);
    for w in trace.steps.windows(2) {
        assert!(w[0].mmd - w[1].mmd >= min_improvement);
    }
    assert_eq!(trace, run());
}
