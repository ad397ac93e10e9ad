//! Fine-scale statistics of the sequence.

pub mod approximants;
pub mod gaps;
pub mod intervals;
pub mod paircorr;
pub mod smooth;
pub mod window;

pub use approximants::{build_approximants, Approximants};
pub use gaps::{gap_distribution, GapSample};
pub use intervals::{Interval, IntervalSet};
pub use paircorr::{
    pair_correlation, pair_correlation_general, pair_correlation_histogram, CorrelationHistogram, PairCorrelation,
};
pub use smooth::{
    q_n_direct, q_n_divisor_decomposition, q_n_theta, smooth_pair_correlation, smooth_pair_correlation_cross,
    DivisorDecomposition,
};
pub use window::{window_average, WindowAverage, WindowWeight};
