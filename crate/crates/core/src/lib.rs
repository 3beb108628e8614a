//! Ideal observer for binary detection tasks under lefthand feature truncation.
//!
//! Features below a per-feature threshold are rejected before internal noise is added.
//! The observer rates each image by the log-likelihood ratio of whichever features
//! survived, and images with no surviving feature go unrated. Performance is the area
//! under the completed ROC curve, split into an analysis part (rated vs rated), a gist
//! part (rated positives against unrated negatives) and a guessing part (unrated pairs).
//!
//! Every analytic result here can be checked against [`oracle::forced_choice_auc`], a
//! brute-force simulation of the two-alternative forced-choice experiment.

pub mod distributions;
pub mod error;
pub mod extraction;
pub mod observer;
pub mod oracle;
pub mod quadrature;
pub mod ranks;
pub mod rng;
pub mod roc;
pub mod sweep;

pub use distributions::{
    acceptance_prob, log_normal_cdf, normal_cdf, normal_pdf, truncated_noised_logpdf, Class,
    ClassParams, InternalNoise, TruncatedNoisedDensity,
};
pub use error::{Error, Result};
pub use extraction::{
    composite_step, extraction_prob, full_rejection_prob, pattern_from_features, ExtractionPattern,
    TruncationVector, MAX_FEATURES,
};
pub use observer::{llr, rate_image, sample_external, FeatureModel, Observer, RatingOutcome};
pub use oracle::{
    empirical_rejection, forced_choice_auc, forced_choice_auc_with, ForcedChoiceResult, Guessing,
};
pub use roc::{
    analysis_component, asymptotic_auc, binormal_auc, gist_component, guess_component, roc_curve,
    total_auc, AnalysisEstimate, AucDecomposition, Completion, Method, RocCurve,
};
pub use sweep::{
    optimize, sweep, truncation_efficiency, GridAxis, Optimum, SweepGrid, SweepRecord,
};
