//! Identifiable coordinates for mixture transition models.
//!
//! Fix a reference letter `u`. For each component window `g` and each
//! `l`-letter block `b`, record the transition distribution from the history
//! that reads `u` everywhere except `b` in window `g`. Unlike the raw
//! `(phi, pi)` parameters these values are transition probabilities, so two
//! parameter vectors describing the same chain map to the same coordinates.
//!
//! Reconstruction: the transition law is a sum of functions each reading one
//! window of `l` consecutive letters, so its anchored (at `u`) decomposition
//! only has terms on position sets spanning at most `l` letters, and every
//! such term is an alternating sum of recorded rows. With `l = 1` this is
//! `P(i_m..i_1; j) = sum_g [p_u(g; i_g, j) - (m-1)/m p_u(j)]`.

use crate::alphabet::Alphabet;
use crate::error::{MtdError, Result};
use crate::model::{table_rows, FullMarkovModel, MtdModel, StochasticMatrix, TransitionModel};

/// Band around `[0, 1]` tolerated before a reconstruction is rejected.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaU {
    alphabet: Alphabet,
    reference: usize,
    order: usize,
    lag_order: usize,
    tables: Vec<StochasticMatrix>,
    base: Vec<f64>,
}

impl ThetaU {
    /// Validates shapes and that every window's all-`u` row equals `base`
    /// exactly.
    pub fn new(
        alphabet: Alphabet,
        reference: usize,
        order: usize,
        lag_order: usize,
        tables: Vec<StochasticMatrix>,
        base: Vec<f64>,
    ) -> Result<Self> {
        alphabet.check(reference)?;
        if lag_order == 0 || lag_order > order {
            return Err(MtdError::InvalidParameter(format!(
                "need 1 <= l <= m, got l={lag_order}, m={order}"
            )));
        }
        let q = alphabet.size();
        let rows = table_rows(q, lag_order)?;
        let g = order - lag_order + 1;
        if tables.len() != g {
            return Err(MtdError::ShapeMismatch(format!("{} tables, expected {g}", tables.len())));
        }
        if base.len() != q {
            return Err(MtdError::ShapeMismatch(format!("base row has {} entries", base.len())));
        }
        let theta = ThetaU {
            alphabet,
            reference,
            order,
            lag_order,
            tables,
            base,
        };
        let ub = theta.reference_block();
        for (i, t) in theta.tables.iter().enumerate() {
            if t.rows() != rows || t.cols() != q {
                return Err(MtdError::ShapeMismatch(format!(
                    "table {} is {}x{}, expected {rows}x{q}",
                    i + 1,
                    t.rows(),
                    t.cols()
                )));
            }
            if t.row(ub) != theta.base.as_slice() {
                return Err(MtdError::InvalidParameter(format!(
                    "table {} disagrees with the base row at the reference block",
                    i + 1
                )));
            }
        }
        Ok(theta)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn lag_order(&self) -> usize {
        self.lag_order
    }

    /// Table for window `g` (0-based): rows are blocks, columns next letters.
    pub fn tables(&self) -> &[StochasticMatrix] {
        &self.tables
    }

    /// Transition row from the all-`u` history.
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    /// `p_u(g; block, j)` with 1-based window `g`.
    pub fn get(&self, g: usize, block: usize, j: usize) -> f64 {
        self.tables[g - 1].get(block, j)
    }

    fn reference_block(&self) -> usize {
        repeat_letter(self.reference, self.lag_order, self.alphabet.size())
    }

    /// Largest entrywise difference to another set of coordinates; `inf`
    /// on shape mismatch.
    pub fn max_abs_diff(&self, other: &ThetaU) -> f64 {
        if self.tables.len() != other.tables.len() {
            return f64::INFINITY;
        }
        self.tables
            .iter()
            .zip(&other.tables)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// Row of the history holding letters `x` (index 0 = most recent) on the
    /// positions in `mask` and `u` elsewhere. The mask must span at most `l`
    /// positions.
    fn lookup(&self, x: &[usize], mask: u64) -> &[f64] {
        if mask == 0 {
            return &self.base;
        }
        let q = self.alphabet.size();
        let lo = mask.trailing_zeros() as usize;
        let window = lo.min(self.tables.len() - 1);
        let block = (0..self.lag_order).rev().fold(0usize, |acc, k| {
            let p = window + k;
            let letter = if mask >> p & 1 == 1 { x[p] } else { self.reference };
            acc * q + letter
        });
        self.tables[window].row(block)
    }
}

/// `u` repeated `len` times, as a word index.
fn repeat_letter(u: usize, len: usize, q: usize) -> usize {
    (0..len).fold(0, |acc, _| acc * q + u)
}

/// Records the coordinates of `model` relative to reference letter `u`,
/// evaluating only the `(m - l + 1) q^l + 1` histories involved.
pub fn to_theta_u(model: &MtdModel, u: usize) -> Result<ThetaU> {
    let alphabet = model.alphabet().clone();
    alphabet.check(u)?;
    let (q, m, l) = (alphabet.size(), model.order(), model.lag_order());
    let rows = table_rows(q, l)?;
    let all_u = repeat_letter(u, m, q);
    let u_block = repeat_letter(u, l, q);
    let mut base = vec![0.0; q];
    model.row_into(all_u, &mut base);
    let tables = (0..model.n_components())
        .map(|g| {
            let shift = q.pow(g as u32);
            let mut data = vec![0.0; rows * q];
            for (b, row) in data.chunks_mut(q).enumerate() {
                model.row_into(all_u - u_block * shift + b * shift, row);
            }
            StochasticMatrix::from_raw(rows, q, data)
        })
        .collect();
    ThetaU::new(alphabet, u, m, l, tables, base)
}

/// Rebuilds the full transition table from the coordinates.
///
/// Fails with [`MtdError::NotAnMtdPoint`] when a reconstructed probability
/// leaves `[0, 1]` by more than [`RECONSTRUCTION_TOL`]: not every point of
/// the coordinate space describes a mixture model.
pub fn from_theta_u(theta: &ThetaU) -> Result<FullMarkovModel> {
    let q = theta.alphabet.size();
    let m = theta.order;
    let rows = table_rows(q, m)?;
    let mut data = vec![0.0; rows * q];
    for (h, row) in data.chunks_mut(q).enumerate() {
        if theta.lag_order == 1 {
            single_lag_row(theta, h, row);
        } else {
            anchored_row(theta, h, row);
        }
        let mut clamped = false;
        for (j, p) in row.iter_mut().enumerate() {
            if !(-RECONSTRUCTION_TOL..=1.0 + RECONSTRUCTION_TOL).contains(p) {
                return Err(MtdError::NotAnMtdPoint {
                    history: h,
                    next: j,
                    value: *p,
                });
            }
            if !(0.0..=1.0).contains(p) {
                *p = p.clamp(0.0, 1.0);
                clamped = true;
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > RECONSTRUCTION_TOL {
            return Err(MtdError::InvalidParameter(format!(
                "reconstructed row {h} sums to {sum}"
            )));
        }
        if clamped {
            row.iter_mut().for_each(|p| *p /= sum);
        }
    }
    FullMarkovModel::new(theta.alphabet.clone(), m, StochasticMatrix::from_raw(rows, q, data))
}

/// `sum_g [p_u(g; i_g, j) - (m-1)/m p_u(j)]`.
fn single_lag_row(theta: &ThetaU, history: usize, out: &mut [f64]) {
    let q = theta.alphabet.size();
    let m = theta.order;
    let shrink = (m - 1) as f64 / m as f64;
    out.iter_mut().for_each(|x| *x = 0.0);
    let mut h = history;
    for table in &theta.tables {
        let row = table.row(h % q);
        for (o, (p, b)) in out.iter_mut().zip(row.iter().zip(&theta.base)) {
            *o += p - shrink * b;
        }
        h /= q;
    }
}

/// Anchored decomposition: `P(x) = sum_S f_S(x)` over position sets `S`
/// inside the support of `x` spanning at most `l` letters, with
/// `f_S = sum_{T subset S} (-1)^{|S - T|} P(x_T u_rest)`.
pub(crate) fn anchored_row(theta: &ThetaU, history: usize, out: &mut [f64]) {
    let q = theta.alphabet.size();
    let (m, l) = (theta.order, theta.lag_order);
    let u = theta.reference;
    let mut x = vec![0usize; m];
    let mut h = history;
    for slot in x.iter_mut() {
        *slot = h % q;
        h /= q;
    }
    let support: u64 = (0..m).filter(|&p| x[p] != u).fold(0, |acc, p| acc | 1 << p);
    out.copy_from_slice(&theta.base);
    for a in 0..m {
        if support >> a & 1 == 0 {
            continue;
        }
        // positions after `a` within the same l-window
        let tail: u64 = (a + 1..(a + l).min(m))
            .filter(|&p| support >> p & 1 == 1)
            .fold(0, |acc, p| acc | 1 << p);
        let mut sub_tail = tail;
        loop {
            let s = sub_tail | 1 << a;
            let s_size = s.count_ones();
            let mut t = s;
            loop {
                let sign = if (s_size - t.count_ones()).is_multiple_of(2) { 1.0 } else { -1.0 };
                for (o, p) in out.iter_mut().zip(theta.lookup(&x, t)) {
                    *o += sign * p;
                }
                if t == 0 {
                    break;
                }
                t = (t - 1) & s;
            }
            if sub_tail == 0 {
                break;
            }
            sub_tail = (sub_tail - 1) & tail;
        }
    }
}
