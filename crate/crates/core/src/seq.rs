//! Alphabets, sequences and the stop-padding conventions used by every kernel.
//!
//! A [`Sequence`] stores letters only. Comparisons treat every sequence as
//! followed by an infinite tail of the stop symbol `$`; the padding is never
//! materialized, [`Sequence::padded`] simply returns `None` past the end.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Index of a letter within its [`Alphabet`].
pub type Letter = u8;

/// The reserved stop symbol.
pub const STOP: &str = "$";

/// The twenty standard amino acids, in one-letter code.
pub const PROTEIN_LETTERS: &str = "ACDEFGHIKLMNPQRSTVWY";

/// An ordered, finite set of letter tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    letters: Vec<String>,
    index: HashMap<String, Letter>,
    single_char: bool,
}

impl Alphabet {
    /// Builds an alphabet from arbitrary tokens, in the given order.
    pub fn new<I, S>(tokens: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let letters: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if letters.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if letters.len() > usize::from(Letter::MAX) {
            return Err(Error::AlphabetTooLarge(letters.len()));
        }
        let mut index = HashMap::with_capacity(letters.len());
        for (i, token) in letters.iter().enumerate() {
            if token == STOP {
                return Err(Error::ReservedStop);
            }
            if token.is_empty() {
                return Err(Error::param("alphabet", "empty letter token"));
            }
            if index.insert(token.clone(), i as Letter).is_some() {
                return Err(Error::DuplicateLetter(token.clone()));
            }
        }
        let single_char = letters.iter().all(|t| t.chars().count() == 1);
        Ok(Arc::new(Alphabet {
            letters,
            index,
            single_char,
        }))
    }

    /// One letter per character of `chars`.
    pub fn from_chars(chars: &str) -> Result<Arc<Self>> {
        Self::new(chars.chars().map(String::from))
    }

    pub fn dna() -> Arc<Self> {
        Self::from_chars("ACGT").expect("valid alphabet")
    }

    pub fn protein() -> Arc<Self> {
        Self::from_chars(PROTEIN_LETTERS).expect("valid alphabet")
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn token(&self, letter: Letter) -> &str {
        &self.letters[usize::from(letter)]
    }

    pub fn letter(&self, token: &str) -> Result<Letter> {
        self.index
            .get(token)
            .copied()
            .ok_or_else(|| Error::UnknownLetter(token.to_string()))
    }

    /// True when every token is a single character, so sequences can be
    /// written as plain strings.
    pub fn is_single_char(&self) -> bool {
        self.single_char
    }
}

/// A finite string over an [`Alphabet`], possibly empty.
#[derive(Clone)]
pub struct Sequence {
    alphabet: Arc<Alphabet>,
    symbols: Vec<Letter>,
}

impl Sequence {
    pub fn new(alphabet: &Arc<Alphabet>, symbols: Vec<Letter>) -> Result<Self> {
        if let Some(&bad) = symbols.iter().find(|&&s| usize::from(s) >= alphabet.len()) {
            return Err(Error::UnknownLetter(format!("#{bad}")));
        }
        Ok(Sequence {
            alphabet: Arc::clone(alphabet),
            symbols,
        })
    }

    pub fn empty(alphabet: &Arc<Alphabet>) -> Self {
        Sequence {
            alphabet: Arc::clone(alphabet),
            symbols: Vec::new(),
        }
    }

    /// Parses a string of single-character letters. Whitespace is ignored.
    pub fn parse(alphabet: &Arc<Alphabet>, text: &str) -> Result<Self> {
        let mut symbols = Vec::with_capacity(text.len());
        let mut buf = [0u8; 4];
        for c in text.chars().filter(|c| !c.is_whitespace()) {
            symbols.push(alphabet.letter(c.encode_utf8(&mut buf))?);
        }
        Ok(Sequence {
            alphabet: Arc::clone(alphabet),
            symbols,
        })
    }

    /// Builds a sequence from multi-character tokens.
    pub fn from_tokens<'a, I>(alphabet: &Arc<Alphabet>, tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let symbols = tokens
            .into_iter()
            .map(|t| alphabet.letter(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Sequence {
            alphabet: Arc::clone(alphabet),
            symbols,
        })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn symbols(&self) -> &[Letter] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Letter at position `l`, or `None` for the stop padding.
    #[inline]
    pub fn padded(&self, l: usize) -> Option<Letter> {
        self.symbols.get(l).copied()
    }

    /// The `len`-mer starting at `start`, or `None` when it would overlap the
    /// stop padding.
    pub fn window(&self, start: usize, len: usize) -> Option<&[Letter]> {
        let end = start.checked_add(len)?;
        if len == 0 || end > self.symbols.len() {
            None
        } else {
            Some(&self.symbols[start..end])
        }
    }

    /// All letters after the first `l` (empty if `l >= len`).
    pub fn suffix(&self, l: usize) -> Sequence {
        let start = l.min(self.symbols.len());
        self.with_symbols(self.symbols[start..].to_vec())
    }

    pub fn reversed(&self) -> Sequence {
        let mut s = self.symbols.clone();
        s.reverse();
        self.with_symbols(s)
    }

    pub fn concat(&self, other: &Sequence) -> Result<Sequence> {
        self.check_alphabet(other)?;
        let mut s = self.symbols.clone();
        s.extend_from_slice(&other.symbols);
        Ok(self.with_symbols(s))
    }

    /// `n` copies of this sequence, concatenated.
    pub fn repeat(&self, n: usize) -> Sequence {
        self.with_symbols(self.symbols.repeat(n))
    }

    pub(crate) fn with_symbols(&self, symbols: Vec<Letter>) -> Sequence {
        Sequence {
            alphabet: Arc::clone(&self.alphabet),
            symbols,
        }
    }

    pub fn same_alphabet(&self, other: &Sequence) -> bool {
        Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet
    }

    pub fn check_alphabet(&self, other: &Sequence) -> Result<()> {
        if self.same_alphabet(other) {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch)
        }
    }
}

impl PartialEq for Sequence {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols && self.same_alphabet(other)
    }
}

impl Eq for Sequence {}

impl Hash for Sequence {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.symbols.hash(state);
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symbols.is_empty() {
            return Ok(());
        }
        let sep = if self.alphabet.is_single_char() { "" } else { " " };
        for (i, &s) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            f.write_str(self.alphabet.token(s))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symbols.is_empty() {
            write!(f, "Sequence(∅)")
        } else {
            write!(f, "Sequence({self})")
        }
    }
}

/// Number of positions where the stop-padded sequences differ.
pub fn hamming_distance(x: &Sequence, y: &Sequence) -> Result<usize> {
    x.check_alphabet(y)?;
    Ok(hamming_unchecked(x.symbols(), y.symbols()))
}

pub(crate) fn hamming_unchecked(x: &[Letter], y: &[Letter]) -> usize {
    let (short, long) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let mismatched = short.iter().zip(long).filter(|(a, b)| a != b).count();
    mismatched + (long.len() - short.len())
}

/// The `len`-mer of `x` at `start`; `None` when it overlaps the padding.
pub fn window(x: &Sequence, start: usize, len: usize) -> Option<&[Letter]> {
    x.window(start, len)
}

/// All sequences of length exactly `len`, in lexicographic letter order.
pub fn enumerate_sequences(alphabet: &Arc<Alphabet>, len: usize) -> Vec<Sequence> {
    let b = alphabet.len();
    let total = b.checked_pow(len as u32).expect("enumeration size overflows usize");
    let mut out = Vec::with_capacity(total);
    let mut current = vec![0 as Letter; len];
    for _ in 0..total {
        out.push(Sequence {
            alphabet: Arc::clone(alphabet),
            symbols: current.clone(),
        });
        // odometer increment, last position fastest
        for pos in (0..len).rev() {
            if usize::from(current[pos]) + 1 < b {
                current[pos] += 1;
                break;
            }
            current[pos] = 0;
        }
    }
    out
}

/// All sequences of length `0..=max_len`, shortest first.
pub fn enumerate_up_to(alphabet: &Arc<Alphabet>, max_len: usize) -> Vec<Sequence> {
    (0..=max_len)
        .flat_map(|l| enumerate_sequences(alphabet, l))
        .collect()
}

/// A sequence of real vectors, one column of dimension `|B|` per position.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSequence {
    columns: Vec<Vec<f64>>,
}

impl VectorSequence {
    pub fn new(columns: Vec<Vec<f64>>) -> Self {
        VectorSequence { columns }
    }

    pub fn one_hot(x: &Sequence) -> Self {
        let b = x.alphabet().len();
        let columns = x
            .symbols()
            .iter()
            .map(|&s| {
                let mut c = vec![0.0; b];
                c[usize::from(s)] = 1.0;
                c
            })
            .collect();
        VectorSequence { columns }
    }

    /// Decodes back to a [`Sequence`] if every column is exactly one-hot.
    pub fn to_sequence(&self, alphabet: &Arc<Alphabet>) -> Option<Sequence> {
        let mut symbols = Vec::with_capacity(self.columns.len());
        for col in &self.columns {
            if col.len() != alphabet.len() {
                return None;
            }
            let mut hot = None;
            for (i, &v) in col.iter().enumerate() {
                if v == 1.0 && hot.is_none() {
                    hot = Some(i);
                } else if v != 0.0 {
                    return None;
                }
            }
            symbols.push(hot? as Letter);
        }
        Some(Sequence {
            alphabet: Arc::clone(alphabet),
            symbols,
        })
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}
