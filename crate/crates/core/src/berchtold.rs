//! Constrained coordinate ascent baseline: every probability vector (the
//! mixing weights and each matrix row) moves a mass `delta` from its
//! smallest-derivative component to its largest-derivative one.
//!
//! The step size follows accept-or-revert with geometric decay.

use crate::counts::NGramCounts;
use crate::em::{counts_loglik, FitReport};
use crate::error::{MtdError, Result};
use crate::model::{MtdModel, StochasticMatrix, TransitionModel};
use crate::selection::DimConvention;

#[derive(Debug, Clone, PartialEq)]
pub struct BerchtoldConfig {
    pub delta0: f64,
    pub delta_decay: f64,
    pub min_delta: f64,
    pub max_iters: usize,
    pub epsilon: f64,
    pub reference: usize,
}

impl Default for BerchtoldConfig {
    fn default() -> Self {
        BerchtoldConfig {
            delta0: 0.1,
            delta_decay: 0.5,
            min_delta: 1e-6,
            max_iters: 10_000,
            epsilon: 1e-3,
            reference: 0,
        }
    }
}

/// Partial derivatives of the conditional log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub d_phi: Vec<f64>,
    /// One row-major matrix per stored transition matrix.
    pub d_pi: Vec<Vec<f64>>,
}

/// `dL/dphi_g = sum_w N(w) pi_g(block_g, i_0) / p(w)` and
/// `dL/dpi_g(b, j) = sum_{w: block_g = b, i_0 = j} N(w) phi_g / p(w)`.
/// A shared matrix accumulates the contributions of every lag.
pub fn loglik_gradient(model: &MtdModel, counts: &NGramCounts) -> Result<GradientSet> {
    if model.alphabet() != counts.alphabet() || model.order() != counts.order() {
        return Err(MtdError::ShapeMismatch("model and counts disagree".into()));
    }
    let q = model.alphabet().size();
    let n_comp = model.n_components();
    let mut d_phi = vec![0.0; n_comp];
    let mut d_pi: Vec<Vec<f64>> = model.matrices().iter().map(|m| vec![0.0; m.as_slice().len()]).collect();
    let shared = d_pi.len() == 1;
    for (w, n) in counts.iter() {
        let (h, next) = (w / q, w % q);
        let p = model.prob_index(h, next);
        if p.is_nan() || p <= 0.0 {
            return Err(MtdError::DegenerateLikelihood {
                word: counts.alphabet().spell_word(w, counts.word_len()),
                trace: Vec::new(),
            });
        }
        let scale = n as f64 / p;
        for g in 0..n_comp {
            let cell = model.block_index(h, g) * q + next;
            d_phi[g] += scale * model.matrix(g).as_slice()[cell];
            d_pi[if shared { 0 } else { g }][cell] += scale * model.phi()[g];
        }
    }
    Ok(GradientSet { d_phi, d_pi })
}

/// Moves `min(delta, v[b], 1 - v[a])` from `b = argmin grad` to
/// `a = argmax grad`, lowest index on ties.
pub fn berchtold_step(v: &[f64], grad: &[f64], delta: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    if v.is_empty() {
        return out;
    }
    let mut a = 0;
    let mut b = 0;
    for (i, &g) in grad.iter().enumerate() {
        if g > grad[a] {
            a = i;
        }
        if g < grad[b] {
            b = i;
        }
    }
    if a == b {
        return out;
    }
    let moved = delta.min(v[b]).min(1.0 - v[a]).max(0.0);
    out[a] = (v[a] + moved).min(1.0);
    out[b] = (v[b] - moved).max(0.0);
    out
}

fn apply_steps(model: &MtdModel, grad: &GradientSet, delta: f64) -> MtdModel {
    let phi = berchtold_step(model.phi(), &grad.d_phi, delta);
    let matrices = model
        .matrices()
        .iter()
        .zip(&grad.d_pi)
        .map(|(mat, d)| {
            let q = mat.cols();
            let data = mat
                .as_slice()
                .chunks(q)
                .zip(d.chunks(q))
                .flat_map(|(row, drow)| berchtold_step(row, drow, delta))
                .collect();
            StochasticMatrix::from_raw(mat.rows(), q, data)
        })
        .collect();
    MtdModel::from_parts(model, phi, matrices)
}

/// Runs the baseline from `init`. Gradients are computed once per iteration,
/// then the mixing weights and every row (matrix by matrix, rows ascending)
/// take one step. A step that fails to raise the log-likelihood is reverted
/// and `delta` shrinks by `delta_decay`.
pub fn berchtold_fit(counts: &NGramCounts, init: &MtdModel, config: &BerchtoldConfig) -> Result<FitReport> {
    if !(config.delta0 > 0.0 && config.delta0 <= 1.0) || !(config.delta_decay > 0.0 && config.delta_decay < 1.0) {
        return Err(MtdError::InvalidParameter(format!(
            "need 0 < delta0 <= 1 and 0 < delta_decay < 1, got {} and {}",
            config.delta0, config.delta_decay
        )));
    }
    if counts.is_empty() {
        return Err(MtdError::EmptyCorpus);
    }
    let mut model = init.clone();
    let start = counts_loglik(&model, counts)?;
    if let Some(word) = start.impossible {
        return Err(MtdError::DegenerateLikelihood { word, trace: Vec::new() });
    }
    let mut trace = vec![start.value];
    let mut delta = config.delta0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iters {
        iterations += 1;
        let grad = loglik_gradient(&model, counts)?;
        let candidate = apply_steps(&model, &grad, delta);
        let ll = counts_loglik(&candidate, counts)?.value;
        let current = trace[trace.len() - 1];
        if ll > current {
            model = candidate;
            trace.push(ll);
            if ll - current < config.epsilon {
                converged = true;
                break;
            }
        } else {
            delta *= config.delta_decay;
            if delta < config.min_delta {
                converged = true;
                break;
            }
        }
    }
    FitReport::build(model, trace, iterations, converged, counts, config.reference, DimConvention::ThetaU)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{Alphabet, Sequence};
    use crate::counts::{count_ngrams, lag_contingency};
    use crate::model::{random_mtd, sample_sequence, InitPolicy, Variant};

    #[test]
    fn step_rules() {
        assert_eq!(berchtold_step(&[0.3, 0.7], &[2.0, 2.0], 0.1), vec![0.3, 0.7]);
        let s = berchtold_step(&[0.2, 0.8], &[1.0, 0.0], 0.1);
        assert!((s[0] - 0.3).abs() < 1e-15 && (s[1] - 0.7).abs() < 1e-15);
        assert_eq!(berchtold_step(&[0.95, 0.05], &[1.0, 0.0], 0.1), vec![1.0, 0.0]);
        // ties resolve to the lowest index
        let t = berchtold_step(&[0.25, 0.25, 0.25, 0.25], &[1.0, 1.0, 0.0, 0.0], 0.1);
        let expect = [0.35, 0.25, 0.15, 0.25];
        assert!(t.iter().zip(expect).all(|(x, y)| (x - y).abs() < 1e-15));
    }

    #[test]
    fn gradient_single_component() {
        let a = Alphabet::new(["a", "b", "c"]).unwrap();
        let m = random_mtd(&a, 2, 2, Variant::General, 1).unwrap();
        let s = sample_sequence(&m, 500, 1, &InitPolicy::Uniform).unwrap();
        let counts = count_ngrams(&[s], 2).unwrap();
        let g = loglik_gradient(&m, &counts).unwrap();
        assert!((g.d_phi[0] - counts.total() as f64).abs() < 1e-9);
    }

    #[test]
    fn gradient_of_uniform_model() {
        let a = Alphabet::dna();
        let u = StochasticMatrix::uniform(4, 4);
        let m = MtdModel::new(a.clone(), 2, 1, Variant::General, vec![0.4, 0.6], vec![u.clone(), u]).unwrap();
        let s = Sequence::parse(&a, "acgtttgcaagctagcatcgatcgggatcgatttagca");
        let counts = count_ngrams(&[s], 2).unwrap();
        let g = loglik_gradient(&m, &counts).unwrap();
        for lag in 1..=2 {
            let t = lag_contingency(&counts, lag, 1).unwrap();
            for (cell, &c) in t.table.iter().enumerate() {
                let expect = m.phi()[lag - 1] * 4.0 * c as f64;
                assert!((g.d_pi[lag - 1][cell] - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn bigram_mle_reached() {
        let a = Alphabet::new(["a", "b", "c"]).unwrap();
        let truth = random_mtd(&a, 1, 1, Variant::General, 5).unwrap();
        let s = sample_sequence(&truth, 3000, 6, &InitPolicy::Uniform).unwrap();
        let counts = count_ngrams(&[s], 1).unwrap();
        let mut mle = 0.0;
        for i in 0..3 {
            let n: u64 = (0..3).map(|j| counts.get(i * 3 + j)).sum();
            for j in 0..3 {
                let c = counts.get(i * 3 + j);
                if c > 0 {
                    mle += c as f64 * (c as f64 / n as f64).ln();
                }
            }
        }
        let init = random_mtd(&a, 1, 1, Variant::General, 99).unwrap();
        let cfg = BerchtoldConfig {
            epsilon: 1e-9,
            min_delta: 1e-9,
            ..BerchtoldConfig::default()
        };
        let r = berchtold_fit(&counts, &init, &cfg).unwrap();
        assert!((r.final_loglik - mle).abs() < 1e-3, "{} vs {mle}", r.final_loglik);
    }

    #[test]
    fn accepted_trace_strictly_increases() {
        let a = Alphabet::new(["a", "b", "c"]).unwrap();
        for seed in 0..50u64 {
            let truth = random_mtd(&a, 2, 1, Variant::General, seed).unwrap();
            let s = sample_sequence(&truth, 400, seed + 1000, &InitPolicy::Uniform).unwrap();
            let counts = count_ngrams(&[s], 2).unwrap();
            let init = random_mtd(&a, 2, 1, Variant::General, seed + 2000).unwrap();
            let r = berchtold_fit(&counts, &init, &BerchtoldConfig::default()).unwrap();
            assert!(r.loglik_trace.windows(2).all(|w| w[1] > w[0]));
            for mat in r.model.matrices() {
                assert!(StochasticMatrix::new(mat.rows(), mat.cols(), mat.as_slice().to_vec()).is_ok());
            }
            assert!((r.model.phi().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
