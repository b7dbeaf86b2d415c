//! Published parameter fixtures shared by the integration tests.
#![allow(dead_code)]

use mtd_core::{Alphabet, MtdModel, StochasticMatrix, Variant};

fn mtd(alphabet: Alphabet, phi: [f64; 2], pi1: &[&[f64]], pi2: &[&[f64]]) -> MtdModel {
    let rows = |m: &[&[f64]]| StochasticMatrix::from_rows(&m.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
    MtdModel::new(alphabet, 2, 1, Variant::General, phi.to_vec(), vec![rows(pi1), rows(pi2)]).unwrap()
}

/// Two parameter sets of the same order-2 DNA chain.
pub fn equivalent_pair() -> (MtdModel, MtdModel) {
    let theta = mtd(
        Alphabet::dna(),
        [0.3, 0.7],
        &[&[0.1, 0.2, 0.3, 0.4], &[0.4, 0.3, 0.2, 0.1], &[0.2, 0.2, 0.2, 0.4], &[0.4, 0.2, 0.2, 0.2]],
        &[&[0.1, 0.1, 0.1, 0.7], &[0.2, 0.2, 0.4, 0.2], &[0.3, 0.3, 0.3, 0.1], &[0.3, 0.2, 0.3, 0.2]],
    );
    let theta2 = mtd(
        Alphabet::dna(),
        [0.2, 0.8],
        &[&[0.2, 0.1, 0.2, 0.5], &[0.65, 0.25, 0.05, 0.05], &[0.35, 0.1, 0.05, 0.5], &[0.65, 0.1, 0.05, 0.2]],
        &[
            &[0.075, 0.1375, 0.15, 0.6375],
            &[0.1625, 0.225, 0.4125, 0.2],
            &[0.25, 0.3125, 0.325, 0.1125],
            &[0.25, 0.225, 0.325, 0.2],
        ],
    );
    (theta, theta2)
}

/// Printed two-decimal transition table of the pair, rows `aa, ac, ..., tt`.
pub const EQUIVALENT_PI: [[f64; 4]; 16] = [
    [0.1, 0.13, 0.16, 0.61],
    [0.19, 0.16, 0.13, 0.52],
    [0.13, 0.13, 0.13, 0.61],
    [0.19, 0.13, 0.13, 0.55],
    [0.17, 0.2, 0.37, 0.26],
    [0.26, 0.23, 0.34, 0.17],
    [0.2, 0.2, 0.34, 0.26],
    [0.26, 0.2, 0.34, 0.2],
    [0.24, 0.27, 0.3, 0.19],
    [0.33, 0.3, 0.27, 0.1],
    [0.27, 0.27, 0.27, 0.19],
    [0.33, 0.27, 0.27, 0.13],
    [0.24, 0.2, 0.3, 0.26],
    [0.33, 0.23, 0.27, 0.17],
    [0.27, 0.2, 0.27, 0.26],
    [0.33, 0.2, 0.27, 0.2],
];

pub fn pewee_em() -> MtdModel {
    mtd(
        Alphabet::numeric(3).unwrap(),
        [0.275, 0.725],
        &[&[0.102, 0.729, 0.169], &[0.969, 0.0, 0.031], &[0.987, 0.013, 0.0]],
        &[&[1.0, 0.0, 0.0], &[0.151, 0.015, 0.834], &[0.0, 1.0, 0.0]],
    )
}

pub fn pewee_berchtold() -> MtdModel {
    mtd(
        Alphabet::numeric(3).unwrap(),
        [0.269, 0.731],
        &[&[0.097, 0.739, 0.164], &[0.980, 0.0, 0.020], &[0.987, 0.013, 0.0]],
        &[&[0.996, 0.0, 0.004], &[0.152, 0.020, 0.828], &[0.003, 0.997, 0.0]],
    )
}

pub fn crystallin_em() -> MtdModel {
    mtd(
        Alphabet::dna(),
        [0.562, 0.438],
        &[
            &[0.225, 0.140, 0.506, 0.129],
            &[0.354, 0.300, 0.008, 0.338],
            &[0.271, 0.123, 0.456, 0.150],
            &[0.166, 0.191, 0.430, 0.213],
        ],
        &[
            &[0.094, 0.600, 0.149, 0.157],
            &[0.335, 0.271, 0.153, 0.241],
            &[0.185, 0.415, 0.099, 0.301],
            &[0.192, 0.370, 0.129, 0.309],
        ],
    )
}

pub const PEWEE_EM_PI: [[f64; 3]; 9] = [
    [0.75305, 0.200475, 0.046475],
    [0.991475, 0.0, 0.008525],
    [0.996425, 0.003575, 0.0],
    [0.137525, 0.21135, 0.651125],
    [0.37595, 0.010875, 0.613175],
    [0.3809, 0.01445, 0.60465],
    [0.02805, 0.925475, 0.046475],
    [0.266475, 0.725, 0.008525],
    [0.271425, 0.728575, 0.0],
];

pub const PEWEE_B_PI: [[f64; 3]; 9] = [
    [0.754169, 0.198791, 0.047040],
    [0.991696, 0.0, 0.008304],
    [0.993579, 0.003497, 0.02924],
    [0.137205, 0.213411, 0.649384],
    [0.374732, 0.01462, 0.610648],
    [0.376615, 0.018117, 0.605268],
    [0.028286, 0.927598, 0.044116],
    [0.265813, 0.728807, 0.00538],
    [0.267696, 0.732304, 0.0],
];

pub const CRYSTALLIN_EM_PI: [[f64; 4]; 16] = [
    [0.167622, 0.341480, 0.349634, 0.141264],
    [0.240120, 0.431400, 0.069758, 0.258722],
    [0.193474, 0.331926, 0.321534, 0.153066],
    [0.134464, 0.370142, 0.306922, 0.188472],
    [0.273180, 0.197378, 0.351386, 0.178056],
    [0.345678, 0.287298, 0.071510, 0.295514],
    [0.299032, 0.187824, 0.323286, 0.189858],
    [0.240022, 0.226040, 0.308674, 0.225264],
    [0.207480, 0.260450, 0.327734, 0.204336],
    [0.279978, 0.350370, 0.047858, 0.321794],
    [0.233332, 0.250896, 0.299634, 0.216138],
    [0.174322, 0.289112, 0.285022, 0.251544],
    [0.210546, 0.240740, 0.340874, 0.207840],
    [0.283044, 0.330660, 0.060998, 0.325298],
    [0.236398, 0.231186, 0.312774, 0.219642],
    [0.177388, 0.269402, 0.298162, 0.255048],
];

/// Printed identifiable coordinates with reference letter `1`:
/// `[window][block][next]` for the Berchtold and EM estimates.
pub const PEWEE_B_THETA: [[[f64; 3]; 3]; 2] = [
    [[0.754169, 0.198791, 0.073356], [0.991696, 0.0, 0.03462], [0.993579, 0.003497, 0.02924]],
    [[0.754169, 0.198791, 0.073356], [0.137205, 0.213411, 0.649384], [0.048023, 0.927598, 0.044116]],
];

pub const PEWEE_EM_THETA: [[[f64; 3]; 3]; 2] = [
    [[0.75305, 0.200475, 0.046475], [0.991475, 0.0, 0.008525], [0.996425, 0.003575, 0.0]],
    [[0.75305, 0.200475, 0.046475], [0.137525, 0.21135, 0.651125], [0.02805, 0.925475, 0.046475]],
];

/// Compares a computed stochastic row against a printed one. A printed row
/// summing to one must match every cell within `tol`. A printed row that
/// does not sum to one may carry a single misprinted cell, which is checked
/// against the completion `1 - (other printed cells)` instead.
///
/// Returns the misprinted column, if any.
pub fn check_printed_row(computed: &[f64], printed: &[f64], tol: f64) -> Result<Option<usize>, String> {
    let printed_sum: f64 = printed.iter().sum();
    let off: Vec<usize> = (0..printed.len())
        .filter(|&j| (computed[j] - printed[j]).abs() > tol)
        .collect();
    if off.is_empty() {
        return Ok(None);
    }
    if (printed_sum - 1.0).abs() <= 1e-5 || off.len() > 1 {
        return Err(format!("computed {computed:?} vs printed {printed:?}"));
    }
    let j = off[0];
    let completion = 1.0 - (printed_sum - printed[j]);
    if (computed[j] - completion).abs() <= tol {
        Ok(Some(j))
    } else {
        Err(format!("cell {j}: computed {} vs completion {completion}", computed[j]))
    }
}
