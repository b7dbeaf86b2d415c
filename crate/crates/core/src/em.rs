//! EM estimation of mixture transition models.
//!
//! The lag used to emit each letter is treated as a hidden i.i.d. selector
//! with law `phi`. Its posterior given the surrounding `(m+1)`-letter word
//! does not depend on the position, so both steps run over the distinct
//! observed words weighted by their counts.

use std::fmt::Write as _;

use crate::counts::{lag_contingency, NGramCounts};
use crate::error::{MtdError, Result};
use crate::model::{derive_seeds, random_mtd, LogLik, MtdModel, StochasticMatrix, TransitionModel, Variant};
use crate::reparam::{to_theta_u, ThetaU};
use crate::selection::{bic, model_dimension, DimConvention};

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    /// Stop once an iteration raises the log-likelihood by less than this.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Total starting points: one contingency start plus random ones.
    pub n_restarts: usize,
    pub seed: u64,
    /// Lower bound applied to every component probability in the E-step.
    pub floor: Option<f64>,
    pub variant: Variant,
    pub lag_order: usize,
    /// Reference letter for the reported identifiable coordinates.
    pub reference: usize,
    pub dim_convention: DimConvention,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            epsilon: 1e-3,
            max_iters: 1000,
            n_restarts: 5,
            seed: 0,
            floor: None,
            variant: Variant::General,
            lag_order: 1,
            reference: 0,
            dim_convention: DimConvention::ThetaU,
        }
    }
}

impl EmConfig {
    fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 || self.max_iters == 0 {
            return Err(MtdError::InvalidParameter(format!(
                "need epsilon > 0 and max_iters >= 1, got {} and {}",
                self.epsilon, self.max_iters
            )));
        }
        if let Some(f) = self.floor {
            if !(f > 0.0 && f < 1.0) {
                return Err(MtdError::InvalidParameter(format!("floor {f} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Outcome of one estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: MtdModel,
    /// Log-likelihood of the starting point followed by one value per
    /// accepted iteration.
    pub loglik_trace: Vec<f64>,
    pub final_loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart_index: usize,
    pub theta_u: ThetaU,
    pub bic: f64,
}

impl FitReport {
    pub(crate) fn build(
        model: MtdModel,
        loglik_trace: Vec<f64>,
        iterations: usize,
        converged: bool,
        counts: &NGramCounts,
        reference: usize,
        convention: DimConvention,
    ) -> Result<Self> {
        let final_loglik = *loglik_trace.last().expect("trace starts with the initial value");
        let theta_u = to_theta_u(&model, reference)?;
        let bic = bic(final_loglik, model_dimension(&model, convention), counts.total().max(1));
        Ok(FitReport {
            model,
            loglik_trace,
            final_loglik,
            iterations,
            converged,
            restart_index: 0,
            theta_u,
            bic,
        })
    }

    /// `iter<TAB>loglik` lines with a header.
    pub fn trace_tsv(&self) -> String {
        let mut out = String::from("iter\tloglik\n");
        for (i, ll) in self.loglik_trace.iter().enumerate() {
            let _ = writeln!(out, "{i}\t{ll}");
        }
        out
    }
}

/// Posterior lag probabilities for every observed word, ascending word order.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTable {
    n_components: usize,
    words: Vec<usize>,
    probs: Vec<f64>,
}

impl PosteriorTable {
    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: usize) -> Option<&[f64]> {
        let i = self.words.binary_search(&word).ok()?;
        Some(&self.probs[i * self.n_components..(i + 1) * self.n_components])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        self.words.iter().copied().zip(self.probs.chunks(self.n_components))
    }

    /// Builds a table from explicit per-word vectors (ascending words).
    pub fn from_vectors(n_components: usize, entries: Vec<(usize, Vec<f64>)>) -> Result<Self> {
        let mut words = Vec::with_capacity(entries.len());
        let mut probs = Vec::with_capacity(entries.len() * n_components);
        for (w, p) in entries {
            if p.len() != n_components {
                return Err(MtdError::ShapeMismatch(format!("posterior for word {w} has {} entries", p.len())));
            }
            if words.last().is_some_and(|&last| last >= w) {
                return Err(MtdError::InvalidParameter("posterior words must ascend".into()));
            }
            words.push(w);
            probs.extend(p);
        }
        Ok(PosteriorTable {
            n_components,
            words,
            probs,
        })
    }
}

fn check_compatible<M: TransitionModel + ?Sized>(model: &M, counts: &NGramCounts) -> Result<()> {
    if model.alphabet() != counts.alphabet() {
        return Err(MtdError::AlphabetMismatch(format!(
            "model over {} vs counts over {}",
            model.alphabet(),
            counts.alphabet()
        )));
    }
    if model.order() != counts.order() {
        return Err(MtdError::ShapeMismatch(format!(
            "model of order {} vs counts of {}-letter words",
            model.order(),
            counts.word_len()
        )));
    }
    Ok(())
}

/// `sum_w N(w) log p(w)` over observed words in ascending order.
pub fn counts_loglik<M: TransitionModel + ?Sized>(model: &M, counts: &NGramCounts) -> Result<LogLik> {
    check_compatible(model, counts)?;
    let q = model.alphabet().size();
    let mut value = 0.0;
    let mut impossible = None;
    for (w, n) in counts.iter() {
        let p = model.prob(w / q, w % q);
        if p > 0.0 {
            value += n as f64 * p.ln();
        } else if impossible.is_none() {
            impossible = Some(counts.alphabet().spell_word(w, counts.word_len()));
        }
    }
    if impossible.is_some() {
        value = f64::NEG_INFINITY;
    }
    Ok(LogLik {
        value,
        n_terms: counts.total(),
        impossible,
    })
}

/// Posterior `P(g | w) = phi_g pi_g(block_g, i_0) / sum_h phi_h pi_h(block_h, i_0)`.
pub fn e_step(model: &MtdModel, counts: &NGramCounts) -> Result<PosteriorTable> {
    e_step_with_floor(model, counts, None)
}

/// As [`e_step`], with each component probability raised to at least
/// `floor` before normalization.
pub fn e_step_with_floor(model: &MtdModel, counts: &NGramCounts, floor: Option<f64>) -> Result<PosteriorTable> {
    check_compatible(model, counts)?;
    let q = model.alphabet().size();
    let n_comp = model.n_components();
    let mut words = Vec::with_capacity(counts.n_distinct());
    let mut probs = Vec::with_capacity(counts.n_distinct() * n_comp);
    for (w, _) in counts.iter() {
        let (h, next) = (w / q, w % q);
        let start = probs.len();
        let mut denom = 0.0;
        for g in 0..n_comp {
            let mut p = model.matrix(g).get(model.block_index(h, g), next);
            if let Some(f) = floor {
                p = p.max(f);
            }
            let joint = model.phi()[g] * p;
            denom += joint;
            probs.push(joint);
        }
        if denom.is_nan() || denom <= 0.0 {
            return Err(MtdError::DegenerateLikelihood {
                word: counts.alphabet().spell_word(w, counts.word_len()),
                trace: Vec::new(),
            });
        }
        probs[start..].iter_mut().for_each(|p| *p /= denom);
        words.push(w);
    }
    Ok(PosteriorTable {
        n_components: n_comp,
        words,
        probs,
    })
}

/// Closed-form maximizer of the expected complete-data log-likelihood.
///
/// `phi_g = sum_w P(g|w) N(w) / total`; each matrix row is the normalized
/// posterior-weighted tally of (block, next letter). The single-matrix
/// variant pools the tallies of every lag. Rows whose weighted tally is zero
/// keep their value from `previous`.
pub fn m_step(posteriors: &PosteriorTable, counts: &NGramCounts, previous: &MtdModel) -> Result<MtdModel> {
    check_compatible(previous, counts)?;
    let n_comp = previous.n_components();
    if posteriors.n_components != n_comp {
        return Err(MtdError::ShapeMismatch(format!(
            "posteriors over {} components for a model with {n_comp}",
            posteriors.n_components
        )));
    }
    let q = previous.alphabet().size();
    let rows = previous.matrices()[0].rows();
    let n_mat = previous.matrices().len();
    let mut phi_acc = vec![0.0; n_comp];
    let mut tally = vec![vec![0.0; rows * q]; n_mat];
    for (w, n) in counts.iter() {
        let post = posteriors.get(w).ok_or_else(|| {
            MtdError::ShapeMismatch(format!(
                "no posterior for observed word {}",
                counts.alphabet().spell_word(w, counts.word_len())
            ))
        })?;
        let (h, next) = (w / q, w % q);
        let n = n as f64;
        for g in 0..n_comp {
            let weight = post[g] * n;
            phi_acc[g] += weight;
            let t = if n_mat == 1 { 0 } else { g };
            tally[t][previous.block_index(h, g) * q + next] += weight;
        }
    }
    let total = counts.total() as f64;
    let phi = phi_acc.iter().map(|x| x / total).collect();
    let matrices = tally
        .into_iter()
        .enumerate()
        .map(|(t, mut data)| {
            let prev = &previous.matrices()[t];
            for (r, row) in data.chunks_mut(q).enumerate() {
                let denom: f64 = row.iter().sum();
                if denom > 0.0 {
                    row.iter_mut().for_each(|x| *x /= denom);
                } else {
                    row.copy_from_slice(prev.row(r));
                }
            }
            StochasticMatrix::from_raw(rows, q, data)
        })
        .collect();
    Ok(MtdModel::from_parts(previous, phi, matrices))
}

/// Starting point from lag contingency tables with one pseudocount per cell
/// and uniform mixing weights.
pub fn init_contingency(counts: &NGramCounts, lag_order: usize, variant: Variant) -> Result<MtdModel> {
    if counts.is_empty() {
        return Err(MtdError::EmptyCorpus);
    }
    let m = counts.order();
    if lag_order == 0 || lag_order > m {
        return Err(MtdError::InvalidParameter(format!("lag order {lag_order} for order {m}")));
    }
    let q = counts.alphabet().size();
    let n_comp = m - lag_order + 1;
    let tables = (1..=n_comp)
        .map(|g| lag_contingency(counts, g, lag_order))
        .collect::<Result<Vec<_>>>()?;
    let normalize = |cells: Vec<u64>| {
        let rows = cells.len() / q;
        let data = cells
            .chunks(q)
            .flat_map(|row| {
                let denom = (row.iter().sum::<u64>() + q as u64) as f64;
                row.iter().map(move |&c| (c + 1) as f64 / denom)
            })
            .collect();
        StochasticMatrix::from_raw(rows, q, data)
    };
    let matrices = match variant {
        Variant::General => tables.into_iter().map(|t| normalize(t.table)).collect(),
        Variant::SingleMatrix => {
            let mut pooled = vec![0u64; q * q];
            for t in &tables {
                pooled.iter_mut().zip(&t.table).for_each(|(a, b)| *a += b);
            }
            vec![normalize(pooled)]
        }
    };
    let phi = vec![1.0 / n_comp as f64; n_comp];
    MtdModel::new(counts.alphabet().clone(), m, lag_order, variant, phi, matrices)
}

/// Uniformly drawn starting point.
pub fn init_random(counts: &NGramCounts, lag_order: usize, variant: Variant, seed: u64) -> Result<MtdModel> {
    random_mtd(counts.alphabet(), counts.order(), lag_order, variant, seed)
}

/// Alternates E and M steps from `init` until the log-likelihood gain drops
/// below `config.epsilon` or `config.max_iters` updates have run.
pub fn em_fit(counts: &NGramCounts, init: &MtdModel, config: &EmConfig) -> Result<FitReport> {
    config.validate()?;
    check_compatible(init, counts)?;
    if counts.is_empty() {
        return Err(MtdError::EmptyCorpus);
    }
    let mut model = init.clone();
    let mut trace = vec![counts_loglik(&model, counts)?.value];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iters {
        let post = match e_step_with_floor(&model, counts, config.floor) {
            Ok(p) => p,
            Err(MtdError::DegenerateLikelihood { word, .. }) => {
                return Err(MtdError::DegenerateLikelihood { word, trace });
            }
            Err(e) => return Err(e),
        };
        model = m_step(&post, counts, &model)?;
        iterations += 1;
        let ll = counts_loglik(&model, counts)?.value;
        let gain = ll - trace[trace.len() - 1];
        trace.push(ll);
        if gain < config.epsilon {
            converged = true;
            break;
        }
    }
    FitReport::build(model, trace, iterations, converged, counts, config.reference, config.dim_convention)
}

/// Seeds for the random restarts, derived from `seed` alone.
pub fn restart_seeds(seed: u64, n: usize) -> Vec<u64> {
    derive_seeds(seed, n)
}

/// Runs EM from the contingency start and `n_restarts - 1` random starts and
/// keeps the highest final log-likelihood (earliest restart on ties).
pub fn fit_with_restarts(counts: &NGramCounts, config: &EmConfig) -> Result<FitReport> {
    config.validate()?;
    if config.n_restarts == 0 {
        return Err(MtdError::InvalidParameter("need at least one restart".into()));
    }
    let seeds = restart_seeds(config.seed, config.n_restarts - 1);
    let mut best: Option<FitReport> = None;
    let mut diagnostics = Vec::new();
    for index in 0..config.n_restarts {
        let init = if index == 0 {
            init_contingency(counts, config.lag_order, config.variant)?
        } else {
            init_random(counts, config.lag_order, config.variant, seeds[index - 1])?
        };
        match em_fit(counts, &init, config) {
            Ok(mut report) => {
                report.restart_index = index;
                if best.as_ref().is_none_or(|b| report.final_loglik > b.final_loglik) {
                    best = Some(report);
                }
            }
            Err(e @ MtdError::DegenerateLikelihood { .. }) => diagnostics.push(format!("restart {index}: {e}")),
            Err(e) => return Err(e),
        }
    }
    best.ok_or(MtdError::AllRestartsFailed { diagnostics })
}
