mod common;

use common::{ab, all_up_to, gamma_weight, integrate_half_line, rel_err};
use nalgebra::DMatrix;
use seqkern::alignment::{
    alignment_dp_r, exponential_scores, heavy_tailed_alignment_gaps, heavy_tailed_alignment_matches, GapStart,
    PairCount, Scoring,
};
use seqkern::positional::{exp_hamming, imq_hamming};
use seqkern::seq::{Alphabet, Sequence};
use seqkern::spectrum::{heavy_tailed_gapped_spectrum, unscaled_gapped_features};

const SHAPES: [(f64, f64); 3] = [(1.0, 0.5), (0.6, 1.0), (2.5, 2.2)];

fn pairs() -> Vec<(Sequence, Sequence)> {
    let seqs = all_up_to(&ab(), 3);
    let mut out = Vec::new();
    for (i, x) in seqs.iter().enumerate() {
        for y in seqs.iter().skip(i).step_by(3) {
            out.push((x.clone(), y.clone()));
        }
    }
    out
}

#[test]
fn gamma_weight_integrates_to_rate_power() {
    for (c, beta) in SHAPES {
        let total = integrate_half_line(|t| gamma_weight(beta, c, t));
        assert!(rel_err(total, c.powf(-beta)) < 1e-9, "{c} {beta}: {total} vs {}", c.powf(-beta));
    }
}

#[test]
fn imq_hamming_mixes_exponential_hamming() {
    let dna = Alphabet::dna();
    let xs = ["", "A", "ACGT", "TTTTTT", "GATTACA"].map(|s| Sequence::parse(&dna, s).unwrap());
    for (c, beta) in SHAPES {
        let k = imq_hamming(c, beta).unwrap();
        for x in &xs {
            for y in &xs {
                let q = integrate_half_line(|t| gamma_weight(beta, c, t) * exp_hamming(t).unwrap().eval(x, y).unwrap());
                assert!(rel_err(k.eval(x, y).unwrap(), q) < 1e-6);
            }
        }
    }
}

#[test]
fn alignment_mixtures_match_closed_forms() {
    let gap_starts = [GapStart::Finite(0.0), GapStart::Finite(1.1), GapStart::Infinite];
    let k_s = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 0.8]);
    for (c, beta) in SHAPES {
        for dmu in gap_starts {
            let mu = 0.25;
            let matches = heavy_tailed_alignment_matches(c, beta, mu, dmu).unwrap();
            let gaps = heavy_tailed_alignment_gaps(c, beta, dmu, k_s.clone()).unwrap();
            for (x, y) in pairs() {
                let q = integrate_half_line(|t| {
                    let sc = Scoring::new(&exponential_scores(2, t), mu, dmu).unwrap();
                    gamma_weight(beta, c, t) * alignment_dp_r(&x, &y, &sc, PairCount::None).unwrap()[0]
                });
                assert!(rel_err(matches.eval(&x, &y).unwrap(), q) < 1e-6, "{x:?} {y:?}");

                let q = integrate_half_line(|t| {
                    let sc = Scoring::new(&k_s, t, dmu).unwrap();
                    gamma_weight(beta, c, t) * alignment_dp_r(&x, &y, &sc, PairCount::None).unwrap()[0]
                });
                assert!(rel_err(gaps.eval(&x, &y).unwrap(), q) < 1e-6, "{x:?} {y:?}");
            }
        }
    }
}

#[test]
fn gapped_spectrum_mixture_matches_closed_form() {
    for (c, beta) in SHAPES {
        for dmu in [GapStart::Finite(0.0), GapStart::Finite(0.4)] {
            let k = heavy_tailed_gapped_spectrum(c, beta, dmu).unwrap();
            for (x, y) in pairs() {
                let (fx, fy) = (unscaled_gapped_features(&x, dmu).unwrap(), unscaled_gapped_features(&y, dmu).unwrap());
                let half = 0.5 * (x.len() + y.len()) as f64;
                let q = integrate_half_line(|t| {
                    let inner: f64 = fx
                        .iter()
                        .filter_map(|(v, a)| fy.get(v).map(|b| (-t * (half - v.len() as f64)).exp() * a * b))
                        .sum();
                    gamma_weight(beta, c, t) * inner
                });
                assert!(rel_err(k.eval(&x, &y).unwrap(), q) < 1e-6);
            }
        }
    }
}
