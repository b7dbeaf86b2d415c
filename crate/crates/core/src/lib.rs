//! Mixture transition distribution models for high-order Markov chains.
//!
//! Words are indexed with the most recent letter as the least significant
//! base-`q` digit: the word `i_m ... i_1 i_0` (oldest first) has index
//! `sum_k i_k q^k`.

pub mod alphabet;
pub mod berchtold;
pub mod counts;
pub mod em;
pub mod error;
pub mod experiments;
pub mod io;
pub mod model;
pub mod reparam;
pub mod selection;

pub use alphabet::{Alphabet, Sequence};
pub use berchtold::{berchtold_fit, BerchtoldConfig};
pub use counts::{count_ngrams, merge_counts, NGramCounts};
pub use em::{em_fit, fit_with_restarts, EmConfig, FitReport};
pub use error::{MtdError, Result};
pub use experiments::{tv_distance, word_distribution, WordDistribution};
pub use io::{ModelFile, SeqFormat, StoredModel};
pub use model::{FullMarkovModel, MtdModel, StochasticMatrix, TransitionModel, Variant};
pub use reparam::{from_theta_u, to_theta_u, ThetaU};
pub use selection::{bic, DimConvention};
