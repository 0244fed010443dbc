mod common;

use common::{ab, all_up_to, rel_err};
use seqkern::alignment::{alignment_kernel, local_alignment_kernel, AlignmentParams, GapStart};
use seqkern::rkhs::gram;
use seqkern::seq::{enumerate_sequences, enumerate_up_to, Alphabet};
use seqkern::spectrum::{
    finite_spectrum, gapped_kmer_features, heavy_tailed_gapped_spectrum, infinite_spectrum, occurrences,
    unscaled_gapped_features,
};

fn dot(a: &std::collections::HashMap<Vec<u8>, f64>, b: &std::collections::HashMap<Vec<u8>, f64>) -> f64 {
    a.iter().filter_map(|(v, x)| b.get(v).map(|y| x * y)).sum()
}

#[test]
fn gapped_features_reproduce_tilted_alignment_kernel() {
    let alphabet = ab();
    let seqs = all_up_to(&alphabet, 4);
    for (mu, scale, dmu) in [
        (0.5, 1.0, GapStart::Finite(0.0)),
        (0.3, 0.7, GapStart::Finite(0.8)),
        (0.1, 2.0, GapStart::Finite(0.25)),
        (0.6, 1.2, GapStart::Infinite),
    ] {
        let p = AlignmentParams::diagonal(2, scale, mu, dmu).unwrap();
        let zeta = p.zeta();
        assert!((zeta - (2.0 * mu + f64::ln(scale))).abs() < 1e-12);
        let k = alignment_kernel(p);
        let feats: Vec<_> = seqs.iter().map(|x| gapped_kmer_features(x, zeta, dmu).unwrap()).collect();
        for (x, fx) in seqs.iter().zip(&feats) {
            for (y, fy) in seqs.iter().zip(&feats) {
                let lhs = (mu * (x.len() + y.len()) as f64).exp() * k.eval(x, y).unwrap();
                let rhs = dot(fx, fy);
                assert!(rel_err(lhs, rhs) < 1e-8, "{x:?} {y:?}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn infinite_spectrum_is_a_tilted_local_alignment_kernel() {
    let alphabet = ab();
    let seqs = all_up_to(&alphabet, 6);
    let spec = infinite_spectrum();
    for (mu, scale) in [(0.0, 1.0), (0.5, (-1.0f64).exp()), (0.2, (-0.4f64).exp())] {
        let p = AlignmentParams::diagonal(2, scale, mu, GapStart::Infinite).unwrap();
        assert!(p.zeta().abs() < 1e-12);
        let la = local_alignment_kernel(p);
        for x in &seqs {
            for y in &seqs {
                let tilted = (mu * (x.len() + y.len()) as f64).exp() * la.eval(x, y).unwrap();
                assert!(rel_err(spec.eval(x, y).unwrap(), tilted) < 1e-10);
            }
        }
    }
}

#[test]
fn infinite_spectrum_counts_shared_substrings() {
    let alphabet = ab();
    let spec = infinite_spectrum();
    let kmers = enumerate_up_to(&alphabet, 5);
    for x in all_up_to(&alphabet, 4) {
        for y in all_up_to(&alphabet, 4) {
            let brute: usize = 1 + kmers
                .iter()
                .skip(1)
                .map(|v| occurrences(v.symbols(), x.symbols()) * occurrences(v.symbols(), y.symbols()))
                .sum::<usize>();
            assert_eq!(spec.eval(&x, &y).unwrap(), brute as f64);
        }
    }
}

#[test]
fn heavy_tailed_gapped_spectrum_matches_feature_sum() {
    let alphabet = ab();
    let seqs = all_up_to(&alphabet, 4);
    let (c, beta) = (1.5, 1.2);
    for dmu in [GapStart::Finite(0.0), GapStart::Finite(0.7), GapStart::Infinite] {
        let k = heavy_tailed_gapped_spectrum(c, beta, dmu).unwrap();
        let feats: Vec<_> = seqs.iter().map(|x| unscaled_gapped_features(x, dmu).unwrap()).collect();
        for (x, fx) in seqs.iter().zip(&feats) {
            for (y, fy) in seqs.iter().zip(&feats) {
                let half = 0.5 * (x.len() + y.len()) as f64;
                let want: f64 = fx
                    .iter()
                    .filter_map(|(v, ux)| fy.get(v).map(|uy| (c + half - v.len() as f64).powf(-beta) * ux * uy))
                    .sum();
                assert!(rel_err(k.eval(x, y).unwrap(), want) < 1e-8);
            }
        }
    }
}

#[test]
fn finite_spectrum_gram_is_rank_limited() {
    // with L_max = 2 over two letters there are only 6 features
    let alphabet = ab();
    let seqs: Vec<_> = enumerate_up_to(&alphabet, 3).into_iter().skip(1).collect();
    assert!(seqs.len() > 6);
    let g = gram(&finite_spectrum(2).unwrap(), &seqs).unwrap();
    assert!(g.min_eigenvalue() <= 1e-8 * g.trace());
    let nonzero = g.eigen().eigenvalues.iter().filter(|&&l| l > 1e-8 * g.trace()).count();
    assert!(nonzero <= 6);
}

#[test]
fn infinite_spectrum_gram_is_strictly_pd() {
    let alphabet = ab();
    let g = gram(&infinite_spectrum(), &enumerate_up_to(&alphabet, 6)).unwrap();
    assert!(g.min_eigenvalue() > 1e-10, "{}", g.min_eigenvalue());
}

#[test]
fn occurrence_counts_shrink_under_extension() {
    let dna = Alphabet::dna();
    let xs = enumerate_sequences(&dna, 5);
    for v in enumerate_up_to(&dna, 2) {
        for b in 0..4u8 {
            let mut longer = v.symbols().to_vec();
            longer.push(b);
            for x in xs.iter().step_by(7) {
                assert!(occurrences(v.symbols(), x.symbols()) >= occurrences(&longer, x.symbols()));
            }
        }
    }
}
