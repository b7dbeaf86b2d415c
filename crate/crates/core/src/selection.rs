//! Model dimensions and the Bayesian information criterion.

use crate::model::{MtdModel, Variant};

/// Which parameter count stands in for an MTD model's dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DimConvention {
    /// Size of the identifiable transition-probability coordinates.
    #[default]
    ThetaU,
    /// Size of the raw `(phi, pi)` parameter vector.
    Raw,
}

/// Free parameters of a full order-`m` chain: `q^m (q - 1)`.
pub fn dim_full_markov(m: usize, q: usize) -> u64 {
    let q = q as u64;
    q.saturating_pow(m as u32).saturating_mul(q - 1)
}

/// Free parameters of the raw mixture parametrization:
/// `(m - l) + (m - l + 1) q^l (q - 1)`.
pub fn dim_raw_mtd(m: usize, l: usize, q: usize) -> u64 {
    assert!(1 <= l && l <= m, "need 1 <= l <= m");
    let (g, qq) = ((m - l) as u64, q as u64);
    g + (g + 1) * qq.saturating_pow(l as u32).saturating_mul(qq - 1)
}

/// Upper bound on the dimension of the order-`m` model with `l`-blocks,
/// counted in identifiable coordinates:
/// `sum_{k=2..l} q^(k-2) (q-1)^3 (m-k+1) + (1 + m(q-1))(q-1)`.
pub fn dim_theta_u(m: usize, l: usize, q: usize) -> u64 {
    assert!(1 <= l && l <= m, "need 1 <= l <= m");
    let (m, qq) = (m as u64, q as u64);
    let cube = (qq - 1).pow(3);
    let blocks: u64 = (2..=l as u64)
        .map(|k| qq.saturating_pow((k - 2) as u32).saturating_mul(cube) * (m - k + 1))
        .sum();
    blocks + (1 + m * (qq - 1)) * (qq - 1)
}

/// The single-matrix model is identifiable: `(m - 1) + q (q - 1)`.
pub fn dim_single_matrix(m: usize, q: usize) -> u64 {
    (m as u64 - 1) + (q * (q - 1)) as u64
}

pub fn model_dimension(model: &MtdModel, convention: DimConvention) -> u64 {
    use crate::model::TransitionModel;
    let (m, l, q) = (model.order(), model.lag_order(), model.alphabet().size());
    match (model.variant(), convention) {
        (Variant::SingleMatrix, _) => dim_single_matrix(m, q),
        (Variant::General, DimConvention::ThetaU) => dim_theta_u(m, l, q),
        (Variant::General, DimConvention::Raw) => dim_raw_mtd(m, l, q),
    }
}

/// `-2 loglik + dim ln(n_terms)`; `+inf` when the likelihood is zero.
pub fn bic(loglik: f64, dim: u64, n_terms: u64) -> f64 {
    assert!(n_terms >= 1, "BIC needs at least one likelihood term");
    if loglik == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    -2.0 * loglik + dim as f64 * (n_terms as f64).ln()
}
