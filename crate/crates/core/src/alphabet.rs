//! Alphabets, symbol sequences and the word-index encoding shared by every
//! table in the crate.
//!
//! A word `(i_k, ..., i_1, i_0)` written oldest letter first is encoded as
//! `sum_g idx(i_g) * q^g`: the most recent letter is the least significant
//! digit. History rows of an order-`m` model use the same rule over the `m`
//! conditioning letters, so `word = history * q + next`.

use std::fmt;

use crate::error::{MtdError, Result};

/// Ordered set of distinct symbol labels. A symbol's index is its position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.len() < 2 {
            return Err(MtdError::InvalidParameter(format!(
                "alphabet needs at least 2 symbols, got {}",
                symbols.len()
            )));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.chars().any(char::is_whitespace) {
                return Err(MtdError::InvalidParameter(format!("invalid symbol label {s:?}")));
            }
            if symbols[..i].iter().any(|t| t.eq_ignore_ascii_case(s)) {
                return Err(MtdError::InvalidParameter(format!("duplicate symbol label {s:?}")));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// `a, c, g, t`.
    pub fn dna() -> Self {
        Alphabet::new(["a", "c", "g", "t"]).expect("static alphabet")
    }

    /// Labels `1..=q`, as used for the wood pewee song phrases.
    pub fn numeric(q: usize) -> Result<Self> {
        Alphabet::new((1..=q).map(|i| i.to_string()))
    }

    /// Parses `"acgt"`, `"a,c,g,t"` or the preset name `"dna"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.eq_ignore_ascii_case("dna") {
            return Ok(Alphabet::dna());
        }
        if spec.contains(',') {
            Alphabet::new(spec.split(',').map(str::trim))
        } else {
            Alphabet::new(spec.chars().map(String::from))
        }
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn label(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    /// Case-insensitive label lookup.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.eq_ignore_ascii_case(label))
    }

    /// True when every label is a single character, so sequences can be
    /// written without separators.
    pub fn is_single_char(&self) -> bool {
        self.symbols.iter().all(|s| s.chars().count() == 1)
    }

    pub fn check(&self, index: usize) -> Result<()> {
        if index < self.size() {
            Ok(())
        } else {
            Err(MtdError::InvalidSymbol {
                index,
                size: self.size(),
            })
        }
    }

    /// Spells a list of symbol indices, oldest first.
    pub fn spell(&self, letters: &[usize]) -> String {
        let sep = if self.is_single_char() { "" } else { " " };
        letters
            .iter()
            .map(|&i| self.symbols[i].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Spells the `len`-letter word with the given index, oldest letter first.
    pub fn spell_word(&self, index: usize, len: usize) -> String {
        self.spell(&decode_word(index, len, self.size()))
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.symbols.join(","))
    }
}

/// Encodes letters given oldest first.
pub fn encode_word(letters: &[usize], q: usize) -> usize {
    letters.iter().fold(0, |acc, &x| acc * q + x)
}

/// Inverse of [`encode_word`]; returns letters oldest first.
pub fn decode_word(mut index: usize, len: usize, q: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % q;
        index /= q;
    }
    out
}

/// `q^k`, or `None` on overflow.
pub fn checked_pow(q: usize, k: usize) -> Option<usize> {
    u32::try_from(k).ok().and_then(|k| q.checked_pow(k))
}

/// A run of symbols over an alphabet.
///
/// `breaks` lists positions `p` (sorted, `0 < p < len`) where a foreign
/// symbol was dropped between `data[p - 1]` and `data[p]`; no counting
/// window or likelihood term spans a break.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    alphabet: Alphabet,
    name: Option<String>,
    data: Vec<usize>,
    breaks: Vec<usize>,
}

impl Sequence {
    pub fn new(alphabet: Alphabet, data: Vec<usize>) -> Result<Self> {
        Sequence::with_breaks(alphabet, data, Vec::new())
    }

    pub fn with_breaks(alphabet: Alphabet, data: Vec<usize>, mut breaks: Vec<usize>) -> Result<Self> {
        for &x in &data {
            alphabet.check(x)?;
        }
        breaks.sort_unstable();
        breaks.dedup();
        breaks.retain(|&b| b > 0 && b < data.len());
        Ok(Sequence {
            alphabet,
            name: None,
            data,
            breaks,
        })
    }

    /// Parses a run of labels. With single-character alphabets every
    /// non-whitespace character is a symbol; otherwise labels are separated
    /// by whitespace. Unknown symbols become breaks.
    pub fn parse(alphabet: &Alphabet, text: &str) -> Self {
        let mut data = Vec::with_capacity(text.len());
        let mut breaks = Vec::new();
        let mut push = |tok: &str| match alphabet.index_of(tok) {
            Some(i) => data.push(i),
            None => {
                if breaks.last() != Some(&data.len()) {
                    breaks.push(data.len());
                }
            }
        };
        if alphabet.is_single_char() {
            let mut buf = [0u8; 4];
            for c in text.chars().filter(|c| !c.is_whitespace()) {
                push(c.encode_utf8(&mut buf));
            }
        } else {
            text.split_whitespace().for_each(push);
        }
        breaks.retain(|&b| b > 0 && b < data.len());
        Sequence {
            alphabet: alphabet.clone(),
            name: None,
            data,
            breaks,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn data(&self) -> &[usize] {
        &self.data
    }

    pub fn breaks(&self) -> &[usize] {
        &self.breaks
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Maximal unbroken runs.
    pub fn segments(&self) -> impl Iterator<Item = &[usize]> + '_ {
        let mut bounds = Vec::with_capacity(self.breaks.len() + 2);
        bounds.push(0);
        bounds.extend_from_slice(&self.breaks);
        bounds.push(self.data.len());
        (0..bounds.len() - 1).map(move |i| &self.data[bounds[i]..bounds[i + 1]])
    }

    /// Number of complete windows of `m + 1` letters.
    pub fn n_windows(&self, m: usize) -> usize {
        self.segments().map(|s| s.len().saturating_sub(m)).sum()
    }

    pub fn to_text(&self) -> String {
        self.alphabet.spell(&self.data)
    }
}
