//! Corpus ingestion into `(m+1)`-gram counts and lag contingency tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::alphabet::{checked_pow, Alphabet, Sequence};
use crate::error::{MtdError, Result};
use crate::model::table_rows;

/// Occurrence counts of the observed words of length `k = m + 1`.
///
/// Only nonzero counts are stored; iteration is in ascending word index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramCounts {
    alphabet: Alphabet,
    word_len: usize,
    counts: BTreeMap<usize, u64>,
    total: u64,
}

impl NGramCounts {
    pub fn empty(alphabet: Alphabet, word_len: usize) -> Result<Self> {
        if word_len < 2 {
            return Err(MtdError::InvalidParameter(format!(
                "word length must be at least 2, got {word_len}"
            )));
        }
        table_rows(alphabet.size(), word_len - 1)?;
        Ok(NGramCounts {
            alphabet,
            word_len,
            counts: BTreeMap::new(),
            total: 0,
        })
    }

    /// Builds counts from explicit `(word index, count)` pairs.
    pub fn from_pairs(alphabet: Alphabet, word_len: usize, pairs: impl IntoIterator<Item = (usize, u64)>) -> Result<Self> {
        let mut c = NGramCounts::empty(alphabet, word_len)?;
        let limit = c.n_words();
        for (w, n) in pairs {
            if w >= limit {
                return Err(MtdError::ShapeMismatch(format!("word index {w} >= {limit}")));
            }
            c.add(w, n);
        }
        Ok(c)
    }

    fn add(&mut self, word: usize, n: u64) {
        if n > 0 {
            *self.counts.entry(word).or_insert(0) += n;
            self.total += n;
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn word_len(&self) -> usize {
        self.word_len
    }

    /// Model order these counts serve, `k - 1`.
    pub fn order(&self) -> usize {
        self.word_len - 1
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Number of distinct observed words.
    pub fn n_distinct(&self) -> usize {
        self.counts.len()
    }

    /// Size of the word space, `q^k`.
    pub fn n_words(&self) -> usize {
        checked_pow(self.alphabet.size(), self.word_len).expect("guarded at construction")
    }

    pub fn get(&self, word: usize) -> u64 {
        self.counts.get(&word).copied().unwrap_or(0)
    }

    /// `(word, count)` in ascending word order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&w, &n)| (w, n))
    }

    /// Writes `word<TAB>count` lines, words spelled oldest letter first.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("word\tcount\n");
        for (w, n) in self.iter() {
            let _ = writeln!(out, "{}\t{n}", self.alphabet.spell_word(w, self.word_len));
        }
        out
    }
}

/// Counts every window of `m + 1` letters lying inside one unbroken segment.
pub fn count_ngrams(sequences: &[Sequence], m: usize) -> Result<NGramCounts> {
    let alphabet = sequences
        .first()
        .map(|s| s.alphabet().clone())
        .ok_or_else(|| MtdError::InvalidParameter("no sequences given".into()))?;
    let mut counts = NGramCounts::empty(alphabet, m + 1)?;
    let q = counts.alphabet.size();
    let span = counts.n_words();
    for seq in sequences {
        if seq.alphabet() != &counts.alphabet {
            return Err(MtdError::AlphabetMismatch(format!(
                "{} vs {}",
                seq.alphabet(),
                counts.alphabet
            )));
        }
        for seg in seq.segments() {
            if seg.len() <= m {
                continue;
            }
            let mut w = seg[..m].iter().fold(0usize, |acc, &x| acc * q + x);
            for &y in &seg[m..] {
                w = (w * q + y) % span;
                counts.add(w, 1);
            }
        }
    }
    Ok(counts)
}

/// Pointwise sum of two count tables over the same alphabet and word length.
pub fn merge_counts(a: &NGramCounts, b: &NGramCounts) -> Result<NGramCounts> {
    if a.alphabet != b.alphabet || a.word_len != b.word_len {
        return Err(MtdError::AlphabetMismatch(format!(
            "cannot merge {}-words over {} with {}-words over {}",
            a.word_len, a.alphabet, b.word_len, b.alphabet
        )));
    }
    let mut out = a.clone();
    for (w, n) in b.iter() {
        out.add(w, n);
    }
    Ok(out)
}

/// Co-occurrence counts between the `l`-letter block at lags `g..g+l-1` and
/// the present letter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub lag: usize,
    pub block_len: usize,
    pub q: usize,
    /// Row-major `q^l x q`.
    pub table: Vec<u64>,
}

impl ContingencyTable {
    pub fn row(&self, block: usize) -> &[u64] {
        &self.table[block * self.q..(block + 1) * self.q]
    }

    pub fn sum(&self) -> u64 {
        self.table.iter().sum()
    }
}

/// Tallies lag `g` (1-based) blocks of length `l` against the last letter.
pub fn lag_contingency(counts: &NGramCounts, g: usize, l: usize) -> Result<ContingencyTable> {
    let m = counts.order();
    if l == 0 || l > m {
        return Err(MtdError::InvalidParameter(format!("block length {l} for order {m}")));
    }
    let max = m - l + 1;
    if g == 0 || g > max {
        return Err(MtdError::LagOutOfRange { lag: g, max });
    }
    let q = counts.alphabet.size();
    let shift = q.pow(g as u32);
    let rows = q.pow(l as u32);
    let mut table = vec![0u64; rows * q];
    for (w, n) in counts.iter() {
        let block = (w / shift) % rows;
        table[block * q + w % q] += n;
    }
    Ok(ContingencyTable {
        lag: g,
        block_len: l,
        q,
        table,
    })
}
