//! Fixtures shared by the benchmarks.

use truncio::{FeatureModel, TruncationVector};

/// Unit-variance negatives at 0, positives at 0.75 with standard deviation `sd1`.
pub fn model(dim: usize, sd1: f64, sigma: f64) -> FeatureModel {
    FeatureModel::iid(dim, (0.0, 1.0), (0.75, sd1), sigma).expect("valid model")
}

pub fn shared(dim: usize, tau: f64) -> TruncationVector {
    TruncationVector::shared(tau, dim).expect("finite threshold")
}
