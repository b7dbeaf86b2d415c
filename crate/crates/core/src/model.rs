//! Model value types, exact transition probabilities, likelihood and
//! sampling.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{checked_pow, Alphabet, Sequence};
use crate::error::{MtdError, Result};

/// Absolute tolerance for row sums and other probability identities.
pub const PROB_TOL: f64 = 1e-12;

/// Upper bound on `q^(m+1)` for anything that materializes a full table.
pub const MAX_TABLE_ENTRIES: u128 = 100_000_000;

/// Row-major matrix whose rows are probability vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(MtdError::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let m = StochasticMatrix { rows, cols, data };
        for r in 0..rows {
            let row = m.row(r);
            if let Some(&bad) = row.iter().find(|&&p| !(0.0..=1.0).contains(&p)) {
                return Err(MtdError::InvalidParameter(format!(
                    "row {r} has entry {bad} outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(MtdError::InvalidParameter(format!("row {r} sums to {sum}")));
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MtdError::ShapeMismatch("ragged rows".into()));
        }
        StochasticMatrix::new(rows.len(), cols, rows.concat())
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        StochasticMatrix {
            rows,
            cols,
            data: vec![1.0 / cols as f64; rows * cols],
        }
    }

    /// Skips validation; callers guarantee stochastic rows by construction.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        StochasticMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    /// Largest absolute entrywise difference; `inf` on shape mismatch.
    pub fn max_abs_diff(&self, other: &StochasticMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    /// One transition matrix per lag.
    #[default]
    General,
    /// A single matrix shared by every lag; requires lag order 1.
    SingleMatrix,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::General => "general",
            Variant::SingleMatrix => "single_matrix",
        })
    }
}

impl FromStr for Variant {
    type Err = MtdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Variant::General),
            "single_matrix" | "single-matrix" | "single" => Ok(Variant::SingleMatrix),
            other => Err(MtdError::InvalidParameter(format!("unknown variant {other:?}"))),
        }
    }
}

/// Anything that assigns a next-letter distribution to each `m`-letter
/// history index.
pub trait TransitionModel {
    fn alphabet(&self) -> &Alphabet;

    fn order(&self) -> usize;

    /// Writes the distribution of the next letter after history `h` into
    /// `out` (length `q`).
    fn row_into(&self, history: usize, out: &mut [f64]);

    fn prob(&self, history: usize, next: usize) -> f64 {
        let mut row = vec![0.0; self.alphabet().size()];
        self.row_into(history, &mut row);
        row[next]
    }
}

/// Mixture transition distribution of order `m` whose components read
/// blocks of `l` consecutive letters.
///
/// Component `g` (0-based here, lag `g + 1`) reads the block of letters at
/// lags `g + 1 ..= g + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct MtdModel {
    alphabet: Alphabet,
    order: usize,
    lag_order: usize,
    variant: Variant,
    phi: Vec<f64>,
    matrices: Vec<StochasticMatrix>,
}

impl MtdModel {
    pub fn new(
        alphabet: Alphabet,
        order: usize,
        lag_order: usize,
        variant: Variant,
        phi: Vec<f64>,
        matrices: Vec<StochasticMatrix>,
    ) -> Result<Self> {
        validate_orders(order, lag_order, variant)?;
        let q = alphabet.size();
        let g = order - lag_order + 1;
        if phi.len() != g {
            return Err(MtdError::ShapeMismatch(format!(
                "phi has {} entries, expected {g}",
                phi.len()
            )));
        }
        if phi.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(MtdError::InvalidParameter(format!("phi {phi:?} outside [0, 1]")));
        }
        let sum: f64 = phi.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(MtdError::InvalidParameter(format!("phi sums to {sum}")));
        }
        let expected = match variant {
            Variant::General => g,
            Variant::SingleMatrix => 1,
        };
        if matrices.len() != expected {
            return Err(MtdError::ShapeMismatch(format!(
                "{} matrices, expected {expected}",
                matrices.len()
            )));
        }
        let rows = block_rows(q, lag_order)?;
        for m in &matrices {
            if m.rows() != rows || m.cols() != q {
                return Err(MtdError::ShapeMismatch(format!(
                    "matrix is {}x{}, expected {rows}x{q}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(MtdModel {
            alphabet,
            order,
            lag_order,
            variant,
            phi,
            matrices,
        })
    }

    /// Skips validation; used by estimators whose updates are stochastic by
    /// construction.
    pub(crate) fn from_parts(template: &MtdModel, phi: Vec<f64>, matrices: Vec<StochasticMatrix>) -> Self {
        MtdModel {
            alphabet: template.alphabet.clone(),
            order: template.order,
            lag_order: template.lag_order,
            variant: template.variant,
            phi,
            matrices,
        }
    }

    pub fn lag_order(&self) -> usize {
        self.lag_order
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Number of mixture components, `m - l + 1`.
    pub fn n_components(&self) -> usize {
        self.order - self.lag_order + 1
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// The stored matrices: one per component, or a single shared one.
    pub fn matrices(&self) -> &[StochasticMatrix] {
        &self.matrices
    }

    /// Transition matrix of component `g` (0-based).
    pub fn matrix(&self, g: usize) -> &StochasticMatrix {
        match self.variant {
            Variant::General => &self.matrices[g],
            Variant::SingleMatrix => &self.matrices[0],
        }
    }

    /// Block row read by component `g` (0-based) from a history index.
    #[inline]
    pub fn block_index(&self, history: usize, g: usize) -> usize {
        let q = self.alphabet.size();
        let shift = q.pow(g as u32);
        let span = q.pow(self.lag_order as u32);
        (history / shift) % span
    }

    /// Mixture probability of `next` after the history with index `h`.
    pub fn prob_index(&self, history: usize, next: usize) -> f64 {
        (0..self.n_components())
            .map(|g| self.phi[g] * self.matrix(g).get(self.block_index(history, g), next))
            .sum()
    }

    /// Probability of `next` given `history` (oldest letter first, length `m`).
    pub fn transition_prob(&self, history: &[usize], next: usize) -> Result<f64> {
        let h = history_index(&self.alphabet, self.order, history)?;
        self.alphabet.check(next)?;
        Ok(self.prob_index(h, next))
    }

    /// Expands to the equivalent `q^m x q` transition table.
    pub fn full_transition_matrix(&self) -> Result<FullMarkovModel> {
        let q = self.alphabet.size();
        let rows = table_rows(q, self.order)?;
        let mut data = vec![0.0; rows * q];
        for (h, row) in data.chunks_mut(q).enumerate() {
            self.row_into(h, row);
        }
        Ok(FullMarkovModel {
            alphabet: self.alphabet.clone(),
            order: self.order,
            table: StochasticMatrix::from_raw(rows, q, data),
        })
    }
}

impl TransitionModel for MtdModel {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn order(&self) -> usize {
        self.order
    }

    fn row_into(&self, history: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for g in 0..self.n_components() {
            let w = self.phi[g];
            let row = self.matrix(g).row(self.block_index(history, g));
            for (o, p) in out.iter_mut().zip(row) {
                *o += w * p;
            }
        }
    }

    fn prob(&self, history: usize, next: usize) -> f64 {
        self.prob_index(history, next)
    }
}

/// Unconstrained order-`m` chain stored as a `q^m x q` table.
#[derive(Debug, Clone, PartialEq)]
pub struct FullMarkovModel {
    alphabet: Alphabet,
    order: usize,
    table: StochasticMatrix,
}

impl FullMarkovModel {
    pub fn new(alphabet: Alphabet, order: usize, table: StochasticMatrix) -> Result<Self> {
        let rows = table_rows(alphabet.size(), order)?;
        if table.rows() != rows || table.cols() != alphabet.size() {
            return Err(MtdError::ShapeMismatch(format!(
                "table is {}x{}, expected {rows}x{}",
                table.rows(),
                table.cols(),
                alphabet.size()
            )));
        }
        Ok(FullMarkovModel {
            alphabet,
            order,
            table,
        })
    }

    pub fn table(&self) -> &StochasticMatrix {
        &self.table
    }

    pub fn transition_prob(&self, history: &[usize], next: usize) -> Result<f64> {
        let h = history_index(&self.alphabet, self.order, history)?;
        self.alphabet.check(next)?;
        Ok(self.table.get(h, next))
    }
}

impl TransitionModel for FullMarkovModel {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn order(&self) -> usize {
        self.order
    }

    fn row_into(&self, history: usize, out: &mut [f64]) {
        out.copy_from_slice(self.table.row(history));
    }

    fn prob(&self, history: usize, next: usize) -> f64 {
        self.table.get(history, next)
    }
}

/// Conditional log-likelihood of a sequence or corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLik {
    /// `-inf` when some observed transition has probability zero.
    pub value: f64,
    /// Number of conditional terms summed.
    pub n_terms: u64,
    /// The first observed `(m+1)`-letter word with zero probability.
    pub impossible: Option<String>,
}

impl LogLik {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Sums `log P(y_t | y_{t-m..t-1})` over every position with a full,
/// unbroken history. The first `m` letters of each segment are conditioned on.
pub fn sequence_loglik<M: TransitionModel + ?Sized>(model: &M, seq: &Sequence) -> Result<LogLik> {
    if seq.alphabet() != model.alphabet() {
        return Err(MtdError::AlphabetMismatch(format!(
            "sequence over {} scored by model over {}",
            seq.alphabet(),
            model.alphabet()
        )));
    }
    let q = model.alphabet().size();
    let m = model.order();
    let span = table_rows(q, m).unwrap_or(usize::MAX);
    let mut value = 0.0;
    let mut n_terms = 0u64;
    let mut impossible = None;
    for seg in seq.segments() {
        if seg.len() <= m {
            continue;
        }
        let mut h = seg[..m].iter().fold(0usize, |acc, &x| (acc * q + x) % span);
        for &y in &seg[m..] {
            let p = model.prob(h, y);
            n_terms += 1;
            if p > 0.0 {
                value += p.ln();
            } else if impossible.is_none() {
                impossible = Some(model.alphabet().spell_word(h * q + y, m + 1));
            }
            h = (h * q + y) % span;
        }
    }
    if impossible.is_some() {
        value = f64::NEG_INFINITY;
    }
    Ok(LogLik {
        value,
        n_terms,
        impossible,
    })
}

/// How the first `m` letters of a sampled sequence are chosen.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitPolicy {
    /// Independent uniform letters.
    #[default]
    Uniform,
    /// A fixed prefix of exactly `m` letters.
    Prefix(Vec<usize>),
}

/// Draws a sequence of length `n`; deterministic given `seed`.
pub fn sample_sequence<M: TransitionModel + ?Sized>(
    model: &M,
    n: usize,
    seed: u64,
    init: &InitPolicy,
) -> Result<Sequence> {
    let alphabet = model.alphabet();
    let q = alphabet.size();
    let m = model.order();
    if n < m {
        return Err(MtdError::InvalidParameter(format!(
            "sequence length {n} shorter than order {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n);
    match init {
        InitPolicy::Uniform => data.extend((0..m).map(|_| rng.gen_range(0..q))),
        InitPolicy::Prefix(prefix) => {
            if prefix.len() != m {
                return Err(MtdError::ShapeMismatch(format!(
                    "prefix has {} letters, order is {m}",
                    prefix.len()
                )));
            }
            for &x in prefix {
                alphabet.check(x)?;
            }
            data.extend_from_slice(prefix);
        }
    }
    let span = table_rows(q, m)?;
    let mut h = data.iter().fold(0usize, |acc, &x| (acc * q + x) % span);
    let mut row = vec![0.0; q];
    while data.len() < n {
        model.row_into(h, &mut row);
        let y = draw(&row, rng.gen::<f64>());
        data.push(y);
        h = (h * q + y) % span;
    }
    Sequence::new(alphabet.clone(), data)
}

/// Inverse-CDF draw; falls back to the last positive entry on rounding.
fn draw(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (j, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return j;
        }
    }
    row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
}

/// A reproducible stream of `n` child seeds.
pub fn derive_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen()).collect()
}

/// Probability vector of `len` normalized uniform(0, 1] draws.
pub(crate) fn random_simplex<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

pub(crate) fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> StochasticMatrix {
    let data = (0..rows).flat_map(|_| random_simplex(rng, cols)).collect();
    StochasticMatrix::from_raw(rows, cols, data)
}

/// Random strictly positive model; deterministic given `seed`.
pub fn random_mtd(alphabet: &Alphabet, m: usize, l: usize, variant: Variant, seed: u64) -> Result<MtdModel> {
    validate_orders(m, l, variant)?;
    let q = alphabet.size();
    let rows = block_rows(q, l)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = m - l + 1;
    let phi = random_simplex(&mut rng, g);
    let n_mat = if variant == Variant::General { g } else { 1 };
    let matrices = (0..n_mat).map(|_| random_matrix(&mut rng, rows, q)).collect();
    MtdModel::new(alphabet.clone(), m, l, variant, phi, matrices)
}

/// Random strictly positive full chain of order `m`.
pub fn random_full_markov(alphabet: &Alphabet, m: usize, seed: u64) -> Result<FullMarkovModel> {
    let q = alphabet.size();
    let rows = table_rows(q, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = random_matrix(&mut rng, rows, q);
    FullMarkovModel::new(alphabet.clone(), m, table)
}

/// Index of an `m`-letter history given oldest letter first.
pub fn history_index(alphabet: &Alphabet, m: usize, history: &[usize]) -> Result<usize> {
    if history.len() != m {
        return Err(MtdError::ShapeMismatch(format!(
            "history has {} letters, order is {m}",
            history.len()
        )));
    }
    let q = alphabet.size();
    history.iter().try_fold(0usize, |acc, &x| {
        alphabet.check(x)?;
        Ok(acc * q + x)
    })
}

fn validate_orders(m: usize, l: usize, variant: Variant) -> Result<()> {
    if m == 0 || l == 0 || l > m {
        return Err(MtdError::InvalidParameter(format!(
            "need 1 <= lag order <= order, got l={l}, m={m}"
        )));
    }
    if variant == Variant::SingleMatrix && l != 1 {
        return Err(MtdError::InvalidParameter(
            "the single-matrix variant requires lag order 1".into(),
        ));
    }
    Ok(())
}

fn block_rows(q: usize, l: usize) -> Result<usize> {
    match checked_pow(q, l + 1) {
        Some(n) if n as u128 <= MAX_TABLE_ENTRIES => Ok(n / q),
        n => Err(MtdError::ModelTooLarge {
            entries: n.map_or(u128::MAX, |n| n as u128),
            limit: MAX_TABLE_ENTRIES,
        }),
    }
}

/// `q^m`, guarded so that the full `q^m x q` table fits the size limit.
pub fn table_rows(q: usize, m: usize) -> Result<usize> {
    block_rows(q, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn appendix_a_theta() -> MtdModel {
        let pi1 = StochasticMatrix::from_rows(&[
            vec![0.1, 0.2, 0.3, 0.4],
            vec![0.4, 0.3, 0.2, 0.1],
            vec![0.2, 0.2, 0.2, 0.4],
            vec![0.4, 0.2, 0.2, 0.2],
        ])
        .unwrap();
        let pi2 = StochasticMatrix::from_rows(&[
            vec![0.1, 0.1, 0.1, 0.7],
            vec![0.2, 0.2, 0.4, 0.2],
            vec![0.3, 0.3, 0.3, 0.1],
            vec![0.3, 0.2, 0.3, 0.2],
        ])
        .unwrap();
        MtdModel::new(Alphabet::dna(), 2, 1, Variant::General, vec![0.3, 0.7], vec![pi1, pi2]).unwrap()
    }

    #[test]
    fn appendix_a_row_aa_to_t() {
        let p = appendix_a_theta().transition_prob(&[0, 0], 3).unwrap();
        assert!((p - 0.61).abs() < 1e-12);
    }

    #[test]
    fn transition_prob_errors() {
        let m = appendix_a_theta();
        assert!(matches!(m.transition_prob(&[0], 1), Err(MtdError::ShapeMismatch(_))));
        assert!(matches!(
            m.transition_prob(&[0, 4], 1),
            Err(MtdError::InvalidSymbol { index: 4, size: 4 })
        ));
        assert!(matches!(
            m.transition_prob(&[0, 1], 7),
            Err(MtdError::InvalidSymbol { .. })
        ));
    }

    #[test]
    fn single_component_returns_matrix_entry() {
        let a = Alphabet::dna();
        let m = random_mtd(&a, 2, 2, Variant::General, 3).unwrap();
        for h in 0..16 {
            for j in 0..4 {
                assert_eq!(m.prob_index(h, j), m.matrix(0).get(h, j));
            }
        }
    }

    #[test]
    fn shared_matrix_mixes_both_lags() {
        let a = Alphabet::new(["x", "y", "z"]).unwrap();
        let p = random_mtd(&a, 1, 1, Variant::General, 9).unwrap().matrix(0).clone();
        let m = MtdModel::new(a, 2, 1, Variant::General, vec![0.5, 0.5], vec![p.clone(), p.clone()]).unwrap();
        for i2 in 0..3 {
            for i1 in 0..3 {
                for j in 0..3 {
                    let got = m.transition_prob(&[i2, i1], j).unwrap();
                    let expect = 0.5 * p.get(i1, j) + 0.5 * p.get(i2, j);
                    assert!((got - expect).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn constructor_rejects_bad_parameters() {
        let a = Alphabet::dna();
        let u = StochasticMatrix::uniform(4, 4);
        assert!(MtdModel::new(a.clone(), 2, 1, Variant::General, vec![0.5, 0.6], vec![u.clone(), u.clone()]).is_err());
        assert!(MtdModel::new(a.clone(), 2, 1, Variant::General, vec![1.0], vec![u.clone()]).is_err());
        assert!(MtdModel::new(a.clone(), 2, 2, Variant::SingleMatrix, vec![1.0], vec![u.clone()]).is_err());
        assert!(MtdModel::new(a.clone(), 2, 1, Variant::SingleMatrix, vec![0.5, 0.5], vec![u.clone()]).is_ok());
        assert!(MtdModel::new(a, 1, 2, Variant::General, vec![1.0], vec![u]).is_err());
        assert!(StochasticMatrix::from_rows(&[vec![0.5, 0.6]]).is_err());
        assert!(StochasticMatrix::from_rows(&[vec![1.5, -0.5]]).is_err());
    }

    #[test]
    fn full_expansion_guard() {
        let a = Alphabet::dna();
        let m = random_mtd(&a, 14, 1, Variant::General, 1).unwrap();
        assert!(matches!(m.full_transition_matrix(), Err(MtdError::ModelTooLarge { .. })));
    }

    #[test]
    fn m1_expansion_equals_matrix() {
        let a = Alphabet::dna();
        let m = random_mtd(&a, 1, 1, Variant::General, 5).unwrap();
        let full = m.full_transition_matrix().unwrap();
        assert_eq!(full.table(), m.matrix(0));
    }

    #[test]
    fn loglik_of_short_sequence_is_empty_sum() {
        let m = appendix_a_theta();
        let s = Sequence::new(Alphabet::dna(), vec![1, 2]).unwrap();
        let ll = sequence_loglik(&m, &s).unwrap();
        assert_eq!(ll.value, 0.0);
        assert_eq!(ll.n_terms, 0);
    }

    #[test]
    fn loglik_uniform_model() {
        let a = Alphabet::dna();
        let u = StochasticMatrix::uniform(4, 4);
        let m = MtdModel::new(a.clone(), 3, 1, Variant::General, vec![0.2, 0.3, 0.5], vec![u.clone(), u.clone(), u]).unwrap();
        let s = sample_sequence(&m, 200, 1, &InitPolicy::Uniform).unwrap();
        let ll = sequence_loglik(&m, &s).unwrap();
        assert_eq!(ll.n_terms, 197);
        assert!((ll.value + 197.0 * 4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn loglik_reports_impossible_word() {
        let a = Alphabet::new(["x", "y"]).unwrap();
        let p = StochasticMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let m = MtdModel::new(a.clone(), 1, 1, Variant::General, vec![1.0], vec![p]).unwrap();
        let s = Sequence::parse(&a, "xyxx");
        let ll = sequence_loglik(&m, &s).unwrap();
        assert_eq!(ll.value, f64::NEG_INFINITY);
        assert_eq!(ll.impossible.as_deref(), Some("xx"));
    }

    #[test]
    fn deterministic_continuation_from_prefix() {
        let a = Alphabet::new(["x", "y", "z"]).unwrap();
        // x -> y -> z -> x
        let p = StochasticMatrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]).unwrap();
        let m = MtdModel::new(a.clone(), 1, 1, Variant::General, vec![1.0], vec![p]).unwrap();
        let s = sample_sequence(&m, 7, 42, &InitPolicy::Prefix(vec![1])).unwrap();
        assert_eq!(s.to_text(), "yzxyzxy");
        assert!(matches!(
            sample_sequence(&m, 7, 42, &InitPolicy::Prefix(vec![1, 2])),
            Err(MtdError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn sampling_n_equals_m_returns_prefix_only() {
        let m = appendix_a_theta();
        let s = sample_sequence(&m, 2, 11, &InitPolicy::Uniform).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s, sample_sequence(&m, 2, 11, &InitPolicy::Uniform).unwrap());
    }

    #[test]
    fn random_models_are_valid_and_seeded() {
        let a = Alphabet::dna();
        for (l, v) in [(1, Variant::General), (2, Variant::General), (1, Variant::SingleMatrix)] {
            let m = random_mtd(&a, 3, l, v, 17).unwrap();
            assert!(m.phi().iter().all(|&p| p > 0.0));
            for mat in m.matrices() {
                assert!(StochasticMatrix::new(mat.rows(), mat.cols(), mat.as_slice().to_vec()).is_ok());
                assert!(mat.as_slice().iter().all(|&p| p > 0.0));
            }
            assert_eq!(m, random_mtd(&a, 3, l, v, 17).unwrap());
        }
    }

    #[test]
    fn different_seeds_give_different_models() {
        let a = Alphabet::dna();
        for s in 0..100u64 {
            let x = random_mtd(&a, 2, 1, Variant::General, 2 * s).unwrap();
            let y = random_mtd(&a, 2, 1, Variant::General, 2 * s + 1).unwrap();
            let diff = x
                .phi()
                .iter()
                .zip(y.phi())
                .map(|(a, b)| (a - b).abs())
                .chain(x.matrices().iter().zip(y.matrices()).map(|(a, b)| a.max_abs_diff(b)))
                .fold(0.0, f64::max);
            assert!(diff > 1e-6);
        }
    }
}
