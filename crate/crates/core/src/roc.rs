//! Area under the completed ROC curve and its three components.
//!
//! * analysis: a rated positive outranks a rated negative,
//! * gist: a rated positive against an unrated negative (unrated images are assigned
//!   the lowest possible rating),
//! * guessing: both images unrated, won with even odds.
//!
//! Gist and guessing depend only on the rejection probabilities, so they are exact.
//! The analysis component is estimated either by quadrature (one feature) or by Monte
//! Carlo with a Mann–Whitney statistic over rated pairs.

use crate::distributions::{phi, Class};
use crate::error::{domain, Result};
use crate::extraction::{full_rejection_prob, TruncationVector};
use crate::observer::{FeatureModel, Observer};
use crate::quadrature::{single_feature_ratings, RatingDistribution, DEFAULT_CELLS};
use crate::ranks::mann_whitney;
use crate::rng::Purpose;

/// How the analysis component is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Deterministic quadrature; single-feature models only.
    Quadrature { cells: usize },
    /// `n` simulated images per class.
    MonteCarlo { n: usize, seed: u64 },
}

impl Method {
    pub const DEFAULT_SAMPLES: usize = 1_000_000;
    pub const MIN_SAMPLES: usize = 10_000;

    pub fn quadrature() -> Self {
        Method::Quadrature {
            cells: DEFAULT_CELLS,
        }
    }

    pub fn monte_carlo(n: usize, seed: u64) -> Self {
        Method::MonteCarlo { n, seed }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Method::MonteCarlo { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisEstimate {
    pub value: f64,
    /// Monte Carlo standard error, or an a-posteriori discretization error estimate for
    /// quadrature.
    pub se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AucDecomposition {
    pub az: f64,
    pub az1: f64,
    pub az2: f64,
    pub az3: f64,
    /// Probability that a negative image is unrated.
    pub rej0: f64,
    /// Probability that a positive image is unrated.
    pub rej1: f64,
    pub az1_se: f64,
}

impl AucDecomposition {
    /// Area when unrated images are left out of the tallies (partial curve only).
    pub fn incomplete_az(&self) -> f64 {
        self.az1
    }

    /// Standard error of `az`; the gist and guessing parts are exact.
    pub fn se(&self) -> f64 {
        self.az1_se
    }
}

pub(crate) fn rejections(model: &FeatureModel, taus: &TruncationVector) -> Result<(f64, f64)> {
    taus.check_dim(model.dim())?;
    Ok((
        full_rejection_prob(model.params(Class::Negative), taus),
        full_rejection_prob(model.params(Class::Positive), taus),
    ))
}

/// Rated positives against unrated negatives: `(1 - rej1) * rej0`.
pub fn gist_component(model: &FeatureModel, taus: &TruncationVector) -> Result<f64> {
    let (rej0, rej1) = rejections(model, taus)?;
    Ok((1.0 - rej1) * rej0)
}

/// Coin flips on unrated pairs: `rej1 * rej0 / 2`.
pub fn guess_component(model: &FeatureModel, taus: &TruncationVector) -> Result<f64> {
    let (rej0, rej1) = rejections(model, taus)?;
    Ok(0.5 * rej1 * rej0)
}

/// Limit of the total area as internal noise grows without bound, where every rated
/// comparison becomes a coin flip.
pub fn asymptotic_auc(model: &FeatureModel, taus: &TruncationVector) -> Result<f64> {
    let (rej0, rej1) = rejections(model, taus)?;
    Ok(0.5 * (1.0 + rej0 - rej1))
}

/// Area for two normal rating distributions: `Phi((mu1 - mu0) / sqrt(var0 + var1))`.
pub fn binormal_auc(mu0: f64, var0: f64, mu1: f64, var1: f64) -> Result<f64> {
    if !(var0 > 0.0 && var1 > 0.0 && var0.is_finite() && var1.is_finite()) {
        return domain("binormal variances must be positive and finite");
    }
    if !(mu0.is_finite() && mu1.is_finite()) {
        return domain("binormal means must be finite");
    }
    Ok(phi((mu1 - mu0) / (var0 + var1).sqrt()))
}

/// Probability that a rated positive outranks a rated negative, weighted by the
/// probability that both are rated.
pub fn analysis_component(
    model: &FeatureModel,
    taus: &TruncationVector,
    method: Method,
) -> Result<AnalysisEstimate> {
    let (rej0, rej1) = rejections(model, taus)?;
    let weight = (1.0 - rej1) * (1.0 - rej0);
    match method {
        Method::Quadrature { cells } => {
            if model.dim() != 1 {
                return domain(format!(
                    "quadrature is available for one feature only; use Monte Carlo for {} features",
                    model.dim()
                ));
            }
            if cells < 64 {
                return domain(format!("quadrature needs at least 64 cells, got {cells}"));
            }
            let observer = Observer::new(model, taus)?;
            if (0..2).any(|c| {
                let class = if c == 0 {
                    Class::Negative
                } else {
                    Class::Positive
                };
                observer.density(class, 0).is_degenerate()
            }) {
                // one class is (numerically) never rated
                return Ok(AnalysisEstimate {
                    value: 0.0,
                    se: 0.0,
                });
            }
            // the error is second order in the cell width, so one Richardson step
            // removes its leading term; the next coarser extrapolation bounds what is left
            let fine = conditional_auc(&observer, cells)?;
            let mid = conditional_auc(&observer, cells / 2)?;
            let coarse = conditional_auc(&observer, cells / 4)?;
            let extrapolated = fine + (fine - mid) / 3.0;
            let previous = mid + (mid - coarse) / 3.0;
            Ok(AnalysisEstimate {
                value: weight * extrapolated.clamp(0.0, 1.0),
                se: weight * (extrapolated - previous).abs(),
            })
        }
        Method::MonteCarlo { n, seed } => {
            if n < Method::MIN_SAMPLES {
                return domain(format!(
                    "Monte Carlo needs at least {} samples per class, got {n}",
                    Method::MIN_SAMPLES
                ));
            }
            let observer = Observer::new(model, taus)?;
            let pos =
                observer.simulate(model.params(Class::Positive), n, seed, Purpose::Ratings)?;
            let neg =
                observer.simulate(model.params(Class::Negative), n, seed, Purpose::Ratings)?;
            let mw = mann_whitney(&pos.rated, &neg.rated)?;
            Ok(AnalysisEstimate {
                value: weight * mw.auc,
                se: weight * mw.se,
            })
        }
    }
}

fn conditional_auc(observer: &Observer, cells: usize) -> Result<f64> {
    let [neg, pos] = single_feature_ratings(observer, cells)?;
    Ok(pos.prob_exceeds(&neg))
}

/// Total area with its analysis, gist and guessing parts.
pub fn total_auc(
    model: &FeatureModel,
    taus: &TruncationVector,
    method: Method,
) -> Result<AucDecomposition> {
    let (rej0, rej1) = rejections(model, taus)?;
    let analysis = analysis_component(model, taus, method)?;
    let az2 = (1.0 - rej1) * rej0;
    let az3 = 0.5 * rej1 * rej0;
    Ok(AucDecomposition {
        az: analysis.value + az2 + az3,
        az1: analysis.value,
        az2,
        az3,
        rej0,
        rej1,
        az1_se: analysis.se,
    })
}

/// Segments that complete a partial curve ending short of `(1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completion {
    /// From the partial endpoint across to `FPF = 1`; bounds the gist rectangle.
    pub gist_extension: [(f64, f64); 2],
    /// Straight line from the partial endpoint to `(1, 1)`.
    pub guess_segment: [(f64, f64); 2],
}

/// ROC points as `(FPF, TPF)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// Rated-only curve from `(0, 0)` to the endpoint, in order of decreasing threshold.
    pub points: Vec<(f64, f64)>,
    /// Where the rated-only curve stops: `(1 - rej0, 1 - rej1)`.
    pub endpoint: (f64, f64),
    /// Binomial standard errors of the endpoint coordinates (zero for quadrature).
    pub endpoint_se: (f64, f64),
    pub completion: Option<Completion>,
}

impl RocCurve {
    fn new(mut points: Vec<(f64, f64)>, endpoint_se: (f64, f64)) -> Self {
        points.dedup();
        let endpoint = *points.last().expect("curve has points");
        let completion = (endpoint != (1.0, 1.0)).then_some(Completion {
            gist_extension: [endpoint, (1.0, endpoint.1)],
            guess_segment: [endpoint, (1.0, 1.0)],
        });
        Self {
            points,
            endpoint,
            endpoint_se,
            completion,
        }
    }

    /// The rated-only points followed by `(1, 1)` when a completion exists.
    pub fn completed_points(&self) -> Vec<(f64, f64)> {
        let mut pts = self.points.clone();
        if self.completion.is_some() {
            pts.push((1.0, 1.0));
        }
        pts
    }

    /// Trapezoidal area under the completed curve.
    pub fn area(&self) -> f64 {
        trapezoid(&self.completed_points())
    }

    /// Trapezoidal area under the rated-only curve.
    pub fn partial_area(&self) -> f64 {
        trapezoid(&self.points)
    }
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1))
        .sum()
}

/// `n` thresholds from the top of the pooled rating distribution to its bottom, spaced
/// evenly in pooled probability. `pooled_survival` must be nonincreasing on `[lo, hi]`.
fn quantile_thresholds<F: Fn(f64) -> f64>(
    lo: f64,
    hi: f64,
    n: usize,
    pooled_survival: F,
) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k == 0 {
                return hi;
            }
            if k + 1 == n {
                return lo;
            }
            let level = k as f64 / (n - 1) as f64;
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if pooled_survival(mid) >= level {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            a
        })
        .collect()
}

/// Rated-only ROC curve swept over the pooled rating range, plus its completion.
pub fn roc_curve(
    model: &FeatureModel,
    taus: &TruncationVector,
    method: Method,
    n_thresholds: usize,
) -> Result<RocCurve> {
    if n_thresholds < 2 {
        return domain("an ROC curve needs at least 2 thresholds");
    }
    let (rej0, rej1) = rejections(model, taus)?;
    let observer = Observer::new(model, taus)?;
    let mut points = vec![(0.0, 0.0)];
    let endpoint_se;
    match method {
        Method::Quadrature { cells } => {
            if model.dim() != 1 {
                return domain("quadrature ROC curves need exactly one feature");
            }
            let [neg, pos] = single_feature_ratings(&observer, cells)?;
            let (lo, hi) = pooled_range(&[&neg, &pos]);
            let pooled = |t: f64| 0.5 * (neg.survival(t) + pos.survival(t));
            points.extend(
                quantile_thresholds(lo, hi, n_thresholds, pooled)
                    .into_iter()
                    .map(|t| {
                        (
                            (1.0 - rej0) * neg.survival(t),
                            (1.0 - rej1) * pos.survival(t),
                        )
                    }),
            );
            // pin the endpoint to its exact value
            *points.last_mut().unwrap() = (1.0 - rej0, 1.0 - rej1);
            endpoint_se = (0.0, 0.0);
        }
        Method::MonteCarlo { n, seed } => {
            if n < Method::MIN_SAMPLES {
                return domain(format!(
                    "Monte Carlo needs at least {} samples per class",
                    Method::MIN_SAMPLES
                ));
            }
            let mut pos =
                observer.simulate(model.params(Class::Positive), n, seed, Purpose::Ratings)?;
            let mut neg =
                observer.simulate(model.params(Class::Negative), n, seed, Purpose::Ratings)?;
            if pos.rated.is_empty() || neg.rated.is_empty() {
                return Err(crate::Error::Estimation(
                    "no rated images in one of the classes".into(),
                ));
            }
            pos.rated.sort_unstable_by(f64::total_cmp);
            neg.rated.sort_unstable_by(f64::total_cmp);
            let mut pooled: Vec<f64> = pos.rated.iter().chain(&neg.rated).copied().collect();
            pooled.sort_unstable_by(f64::total_cmp);
            let top = pooled.len() - 1;
            let at_or_above = |sorted: &[f64], t: f64| {
                (sorted.len() - sorted.partition_point(|&v| v < t)) as f64 / n as f64
            };
            points.extend((0..n_thresholds).map(|k| {
                // pooled order statistics from the largest down to the smallest
                let idx =
                    top - (top as f64 * k as f64 / (n_thresholds - 1) as f64).round() as usize;
                let t = pooled[idx];
                (at_or_above(&neg.rated, t), at_or_above(&pos.rated, t))
            }));
            let binom = |p: f64| (p * (1.0 - p) / n as f64).sqrt();
            let (fpf, tpf) = *points.last().unwrap();
            endpoint_se = (binom(fpf), binom(tpf));
        }
    }
    Ok(RocCurve::new(points, endpoint_se))
}

fn pooled_range(dists: &[&RatingDistribution]) -> (f64, f64) {
    dists
        .iter()
        .filter_map(|d| d.range())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
            (lo.min(a), hi.max(b))
        })
}
