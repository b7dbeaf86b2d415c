//! Stationary word distributions, total variation, and the two model
//! comparison experiments (estimation error by order, BIC difference).

use std::fmt::Write as _;

use crate::alphabet::{checked_pow, Alphabet, Sequence};
use crate::counts::{count_ngrams, NGramCounts};
use crate::em::{counts_loglik, fit_with_restarts, EmConfig};
use crate::error::{MtdError, Result};
use crate::model::{
    derive_seeds, random_full_markov, sample_sequence, table_rows, FullMarkovModel, InitPolicy, StochasticMatrix,
    TransitionModel, MAX_TABLE_ENTRIES,
};
use crate::selection::{bic, dim_full_markov, model_dimension};

pub const STATIONARY_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100_000;

/// Probabilities of every length-`k` word, indexed like counts (most recent
/// letter least significant).
#[derive(Debug, Clone, PartialEq)]
pub struct WordDistribution {
    pub alphabet: Alphabet,
    pub k: usize,
    pub probs: Vec<f64>,
}

/// Stationary law of the model's `q^m`-state history chain by power
/// iteration started from the uniform vector.
pub fn stationary_histories<M: TransitionModel + ?Sized>(model: &M) -> Result<Vec<f64>> {
    let q = model.alphabet().size();
    let n_hist = table_rows(q, model.order())?;
    let mut table = vec![0.0; n_hist * q];
    for (h, row) in table.chunks_mut(q).enumerate() {
        model.row_into(h, row);
    }
    let mut pi = vec![1.0 / n_hist as f64; n_hist];
    let mut next = vec![0.0; n_hist];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (h, &mass) in pi.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let base = (h * q) % n_hist;
            for (j, &p) in table[h * q..(h + 1) * q].iter().enumerate() {
                next[base + j] += mass * p;
            }
        }
        residual = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if residual < STATIONARY_TOL {
            return Ok(pi);
        }
    }
    Err(MtdError::NonConvergentStationary {
        sweeps: MAX_SWEEPS,
        residual,
    })
}

/// Distribution of a length-`k` window of the stationary process.
pub fn word_distribution<M: TransitionModel + ?Sized>(model: &M, k: usize) -> Result<WordDistribution> {
    let q = model.alphabet().size();
    let m = model.order();
    if k == 0 {
        return Err(MtdError::InvalidParameter("word length must be at least 1".into()));
    }
    let n_words = checked_pow(q, k).filter(|&n| (n as u128) <= MAX_TABLE_ENTRIES).ok_or(MtdError::ModelTooLarge {
        entries: (q as u128).saturating_pow(k as u32),
        limit: MAX_TABLE_ENTRIES,
    })?;
    let pi = stationary_histories(model)?;
    let probs = if k <= m {
        let mut out = vec![0.0; n_words];
        for (h, p) in pi.iter().enumerate() {
            out[h % n_words] += p;
        }
        out
    } else {
        let n_hist = pi.len();
        let mut row = vec![0.0; q];
        let mut cur = pi;
        for _ in m..k {
            let mut ext = vec![0.0; cur.len() * q];
            for (w, &mass) in cur.iter().enumerate() {
                model.row_into(w % n_hist, &mut row);
                for (j, &p) in row.iter().enumerate() {
                    ext[w * q + j] = mass * p;
                }
            }
            cur = ext;
        }
        cur
    };
    Ok(WordDistribution {
        alphabet: model.alphabet().clone(),
        k,
        probs,
    })
}

/// `sum |P(x) - Q(x)|` over all words, in `[0, 2]`.
pub fn tv_distance(p: &WordDistribution, q: &WordDistribution) -> Result<f64> {
    if p.alphabet != q.alphabet || p.k != q.k || p.probs.len() != q.probs.len() {
        return Err(MtdError::ShapeMismatch(format!(
            "word distributions differ: k={} over {} vs k={} over {}",
            p.k, p.alphabet, q.k, q.alphabet
        )));
    }
    Ok(p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum())
}

/// Maximum likelihood full Markov model. Histories never seen get the
/// uniform row.
pub fn full_markov_mle(counts: &NGramCounts) -> Result<FullMarkovModel> {
    let q = counts.alphabet().size();
    let m = counts.order();
    let n_hist = table_rows(q, m)?;
    let mut tally = vec![0.0; n_hist * q];
    for (w, n) in counts.iter() {
        tally[w] = n as f64;
    }
    for row in tally.chunks_mut(q) {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|x| *x /= s);
        } else {
            row.iter_mut().for_each(|x| *x = 1.0 / q as f64);
        }
    }
    FullMarkovModel::new(counts.alphabet().clone(), m, StochasticMatrix::from_raw(n_hist, q, tally))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvConfig {
    pub alphabet: Alphabet,
    pub generator_order: usize,
    pub seq_len: usize,
    pub fit_orders: Vec<usize>,
    pub replicates: usize,
    pub word_len: usize,
    pub seed: u64,
}

impl Default for TvConfig {
    fn default() -> Self {
        TvConfig {
            alphabet: Alphabet::dna(),
            generator_order: 5,
            seq_len: 5000,
            fit_orders: (2..=6).collect(),
            replicates: 20,
            word_len: 6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvResult {
    pub fit_orders: Vec<usize>,
    /// `tv[r][i]` is replicate `r` fitted at `fit_orders[i]`.
    pub tv: Vec<Vec<f64>>,
}

impl TvResult {
    pub fn mean_by_order(&self) -> Vec<f64> {
        let n = self.tv.len() as f64;
        (0..self.fit_orders.len())
            .map(|i| self.tv.iter().map(|r| r[i]).sum::<f64>() / n)
            .collect()
    }

    /// Fitted order with the smallest distance in each replicate (lowest
    /// order on ties).
    pub fn best_orders(&self) -> Vec<usize> {
        self.tv
            .iter()
            .map(|r| {
                let mut best = 0;
                for i in 1..r.len() {
                    if r[i] < r[best] {
                        best = i;
                    }
                }
                self.fit_orders[best]
            })
            .collect()
    }

    /// `replicate order tv` rows followed by one `mean` row per order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("replicate\torder\ttv\n");
        for (r, row) in self.tv.iter().enumerate() {
            for (order, tv) in self.fit_orders.iter().zip(row) {
                let _ = writeln!(out, "{r}\t{order}\t{tv}");
            }
        }
        if !self.tv.is_empty() {
            for (order, tv) in self.fit_orders.iter().zip(self.mean_by_order()) {
                let _ = writeln!(out, "mean\t{order}\t{tv}");
            }
        }
        out
    }
}

/// Samples `replicates` sequences from one random full Markov generator,
/// fits the full Markov MLE at each order and measures the distance between
/// length-`word_len` word laws.
pub fn tv_experiment(config: &TvConfig) -> Result<TvResult> {
    if config.fit_orders.contains(&0) || config.generator_order == 0 {
        return Err(MtdError::InvalidParameter("orders must be at least 1".into()));
    }
    let seeds = derive_seeds(config.seed, config.replicates + 1);
    let generator = random_full_markov(&config.alphabet, config.generator_order, seeds[0])?;
    let target = word_distribution(&generator, config.word_len)?;
    let mut tv = Vec::with_capacity(config.replicates);
    for &seed in &seeds[1..] {
        let seq = sample_sequence(&generator, config.seq_len, seed, &InitPolicy::Uniform)?;
        let seqs = [seq];
        let row = config
            .fit_orders
            .iter()
            .map(|&order| {
                let fitted = full_markov_mle(&count_ngrams(&seqs, order)?)?;
                tv_distance(&word_distribution(&fitted, config.word_len)?, &target)
            })
            .collect::<Result<Vec<_>>>()?;
        tv.push(row);
    }
    Ok(TvResult {
        fit_orders: config.fit_orders.clone(),
        tv,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BicRow {
    pub order: usize,
    pub lag_order: usize,
    pub loglik_full: f64,
    pub dim_full: u64,
    pub bic_full: f64,
    pub loglik_mtd: f64,
    pub dim_mtd: u64,
    pub bic_mtd: f64,
    /// `bic_full - bic_mtd`; positive favours the mixture model.
    pub delta: f64,
}

pub fn bic_table_tsv(rows: &[BicRow]) -> String {
    let mut out = String::from("order\tl\tloglik_full\tdim_full\tbic_full\tloglik_mtd\tdim_mtd\tbic_mtd\tdelta_bic\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.order, r.lag_order, r.loglik_full, r.dim_full, r.bic_full, r.loglik_mtd, r.dim_mtd, r.bic_mtd, r.delta
        );
    }
    out
}

/// BIC of the full Markov MLE against the best mixture fit at each order and
/// lag order (`l > m` pairs are skipped). The BIC sample size is the number
/// of likelihood terms unless `use_raw_length` asks for the total sequence
/// length.
pub fn bic_compare(
    sequences: &[Sequence],
    orders: &[usize],
    lag_orders: &[usize],
    config: &EmConfig,
    use_raw_length: bool,
) -> Result<Vec<BicRow>> {
    let raw_len: usize = sequences.iter().map(Sequence::len).sum();
    let mut rows = Vec::new();
    for &m in orders {
        let counts = count_ngrams(sequences, m)?;
        if counts.is_empty() {
            return Err(MtdError::EmptyCorpus);
        }
        let n = if use_raw_length { raw_len as u64 } else { counts.total() };
        let q = counts.alphabet().size();
        let full = full_markov_mle(&counts)?;
        let loglik_full = counts_loglik(&full, &counts)?.value;
        let dim_full = dim_full_markov(m, q);
        let bic_full = bic(loglik_full, dim_full, n);
        for &l in lag_orders.iter().filter(|&&l| l <= m) {
            let cfg = EmConfig {
                lag_order: l,
                ..config.clone()
            };
            let fit = fit_with_restarts(&counts, &cfg)?;
            let dim_mtd = model_dimension(&fit.model, config.dim_convention);
            let bic_mtd = bic(fit.final_loglik, dim_mtd, n);
            rows.push(BicRow {
                order: m,
                lag_order: l,
                loglik_full,
                dim_full,
                bic_full,
                loglik_mtd: fit.final_loglik,
                dim_mtd,
                bic_mtd,
                delta: bic_full - bic_mtd,
            });
        }
    }
    Ok(rows)
}
