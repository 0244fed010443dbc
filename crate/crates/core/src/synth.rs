//! Synthetic data sets: exhaustive toy regression, the level-set labels that
//! defeat the weighted-degree kernel, mirrored-halves samplers and random
//! CDR3-like protein strings.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seq::{enumerate_sequences, Alphabet, Letter, Sequence};

/// Every DNA sequence of length `len`, labelled by the count of its most
/// common letter.
pub fn toy_regression(len: usize) -> (Vec<Sequence>, Vec<f64>) {
    let ab = Alphabet::dna();
    let xs = enumerate_sequences(&ab, len);
    let ys = xs.iter().map(|x| most_common_count(x) as f64).collect();
    (xs, ys)
}

pub fn most_common_count(x: &Sequence) -> usize {
    let mut counts = vec![0usize; x.alphabet().len()];
    for &s in x.symbols() {
        counts[usize::from(s)] += 1;
    }
    counts.into_iter().max().unwrap_or(0)
}

/// Sequences of length `window + 1` whose last letter equals the first.
pub fn wraparound_set(alphabet: &Arc<Alphabet>, window: usize) -> Vec<Sequence> {
    enumerate_sequences(alphabet, window + 1)
        .into_iter()
        .filter(|x| x.symbols().first() == x.symbols().last())
        .collect()
}

/// All sequences of length `window + 1`, labelled `|B| - 1` when the last
/// letter repeats the first and `-1` otherwise. The labels average to zero
/// on both the full set and the wraparound subset.
pub fn wraparound_labels(alphabet: &Arc<Alphabet>, window: usize) -> (Vec<Sequence>, Vec<f64>) {
    let xs = enumerate_sequences(alphabet, window + 1);
    let b = alphabet.len() as f64;
    let ys = xs
        .iter()
        .map(|x| if x.symbols().first() == x.symbols().last() { b - 1.0 } else { -1.0 })
        .collect();
    (xs, ys)
}

fn random_letters<R: Rng + ?Sized>(rng: &mut R, alphabet_size: usize, len: usize) -> Vec<Letter> {
    (0..len).map(|_| rng.random_range(0..alphabet_size) as Letter).collect()
}

/// Uniform sequence of length `len`.
pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, alphabet: &Arc<Alphabet>, len: usize) -> Sequence {
    Sequence::new(alphabet, random_letters(rng, alphabet.len(), len)).expect("letters drawn from the alphabet")
}

/// Uniform first half, second half a copy of the first. `len` must be even.
pub fn sample_mirrored<R: Rng + ?Sized>(rng: &mut R, alphabet: &Arc<Alphabet>, len: usize) -> Result<Sequence> {
    if !len.is_multiple_of(2) {
        return Err(Error::param("length", format!("mirrored sequences need an even length, got {len}")));
    }
    let mut s = random_letters(rng, alphabet.len(), len / 2);
    s.extend_from_within(..);
    Sequence::new(alphabet, s)
}

/// Shape of the random receptor-like strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Cdr3Shape {
    pub min_len: usize,
    pub max_len: usize,
    pub first: char,
    pub last: char,
}

impl Default for Cdr3Shape {
    fn default() -> Self {
        Cdr3Shape {
            min_len: 10,
            max_len: 17,
            first: 'C',
            last: 'F',
        }
    }
}

// rough residue preferences of CDR3 loops, in PROTEIN_LETTERS order
const CDR3_WEIGHTS: [f64; 20] = [
    8.0, 1.0, 5.0, 6.0, 4.0, 9.0, 1.5, 2.0, 2.0, 5.0, 1.0, 5.0, 4.0, 7.0, 4.0, 12.0, 7.0, 3.0, 1.5, 6.0,
];

/// Protein strings with length uniform in `[min_len, max_len]`, fixed end
/// residues and a skewed interior composition.
pub fn sample_cdr3_like<R: Rng + ?Sized>(rng: &mut R, shape: &Cdr3Shape) -> Result<Sequence> {
    if shape.min_len < 2 || shape.max_len < shape.min_len {
        return Err(Error::param("length", "need 2 <= min_len <= max_len"));
    }
    let ab = Alphabet::protein();
    let dist = rand::distr::weighted::WeightedIndex::new(CDR3_WEIGHTS).expect("positive weights");
    let len = rng.random_range(shape.min_len..=shape.max_len);
    let mut s = Vec::with_capacity(len);
    s.push(ab.letter(&shape.first.to_string())?);
    s.extend((0..len - 2).map(|_| rng.sample(&dist) as Letter));
    s.push(ab.letter(&shape.last.to_string())?);
    Sequence::new(&ab, s)
}
