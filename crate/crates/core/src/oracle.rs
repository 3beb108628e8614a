//! Brute-force forced-choice experiment.
//!
//! Each trial shows the observer one positive and one negative image. The observer
//! picks the higher-rated image when both are rated, picks the rated one when only one
//! is rated, and guesses when neither is. Nothing here uses extraction probabilities or
//! the area decomposition; only the observer itself is shared with [`crate::roc`].

use rand::Rng;
use rayon::prelude::*;

use crate::distributions::Class;
use crate::error::{domain, Result};
use crate::extraction::{pattern_from_features, TruncationVector};
use crate::observer::{draw_features, FeatureModel, Observer, RatingOutcome};
use crate::rng::{chunks, substream, Purpose};

/// How trials with two unrated images are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Guessing {
    /// Credit the expected half win.
    #[default]
    Expected,
    /// Flip a fair coin.
    CoinFlip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcedChoiceResult {
    pub n_pairs: usize,
    /// Correct identifications; ties and expected guesses count one half.
    pub wins: f64,
    pub auc_hat: f64,
    pub se: f64,
}

impl ForcedChoiceResult {
    fn from_wins(n_pairs: usize, wins: f64) -> Self {
        let auc_hat = wins / n_pairs as f64;
        Self {
            n_pairs,
            wins,
            auc_hat,
            se: (auc_hat * (1.0 - auc_hat) / n_pairs as f64).sqrt(),
        }
    }
}

pub fn forced_choice_auc(
    model: &FeatureModel,
    taus: &TruncationVector,
    n_pairs: usize,
    seed: u64,
) -> Result<ForcedChoiceResult> {
    forced_choice_auc_with(model, taus, n_pairs, seed, Guessing::Expected)
}

pub fn forced_choice_auc_with(
    model: &FeatureModel,
    taus: &TruncationVector,
    n_pairs: usize,
    seed: u64,
    guessing: Guessing,
) -> Result<ForcedChoiceResult> {
    if n_pairs == 0 {
        return domain("need at least one forced-choice pair");
    }
    let observer = Observer::new(model, taus)?;
    let pos_params = model.params(Class::Positive);
    let neg_params = model.params(Class::Negative);
    let dim = model.dim();

    // whole wins and half wins are tallied separately so the sum is exact
    let tallies = chunks(n_pairs)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(chunk, len)| {
            let mut rng = substream(seed, Purpose::ForcedChoice, None, chunk);
            let mut f_pos = vec![0.0; dim];
            let mut f_neg = vec![0.0; dim];
            let (mut wins, mut halves) = (0u64, 0u64);
            for _ in 0..len {
                draw_features(pos_params, &mut rng, &mut f_pos);
                let pos = observer.rate(&f_pos, &mut rng)?;
                draw_features(neg_params, &mut rng, &mut f_neg);
                let neg = observer.rate(&f_neg, &mut rng)?;
                match (pos, neg) {
                    (
                        RatingOutcome::Rated { lambda: a, .. },
                        RatingOutcome::Rated { lambda: b, .. },
                    ) => {
                        if a > b {
                            wins += 1;
                        } else if a == b {
                            halves += 1;
                        }
                    }
                    (RatingOutcome::Rated { .. }, RatingOutcome::Unrated) => wins += 1,
                    (RatingOutcome::Unrated, RatingOutcome::Rated { .. }) => {}
                    (RatingOutcome::Unrated, RatingOutcome::Unrated) => match guessing {
                        Guessing::Expected => halves += 1,
                        Guessing::CoinFlip => {
                            if rng.random::<bool>() {
                                wins += 1;
                            }
                        }
                    },
                }
            }
            Ok((wins, halves))
        })
        .collect::<Result<Vec<_>>>()?;

    let (wins, halves) = tallies
        .into_iter()
        .fold((0u64, 0u64), |(w, h), (a, b)| (w + a, h + b));
    Ok(ForcedChoiceResult::from_wins(
        n_pairs,
        wins as f64 + 0.5 * halves as f64,
    ))
}

/// Fraction of `n` simulated class images with every feature rejected.
pub fn empirical_rejection(
    model: &FeatureModel,
    taus: &TruncationVector,
    class: Class,
    n: usize,
    seed: u64,
) -> Result<f64> {
    if n < 10_000 {
        return domain(format!(
            "rejection estimates need at least 10000 samples, got {n}"
        ));
    }
    taus.check_dim(model.dim())?;
    let params = model.params(class);
    let unrated: usize = chunks(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(chunk, len)| {
            let mut rng = substream(seed, Purpose::Rejection, Some(class), chunk);
            let mut f = vec![0.0; params.dim()];
            (0..len)
                .filter(|_| {
                    draw_features(params, &mut rng, &mut f);
                    pattern_from_features(&f, taus).is_unrated()
                })
                .count()
        })
        .sum();
    Ok(unrated as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_classes_are_chance() {
        let same = FeatureModel::iid(1, (0.0, 1.0), (0.0, 1.0), 0.0).unwrap();
        let r = forced_choice_auc(&same, &TruncationVector::untruncated(1), 200_000, 3).unwrap();
        assert!((r.auc_hat - 0.5).abs() < 3.0 * r.se, "{r:?}");
    }

    #[test]
    fn small_runs_report_binomial_se() {
        let m = FeatureModel::iid(1, (0.0, 1.0), (0.75, 1.0), 0.0).unwrap();
        let r = forced_choice_auc(&m, &TruncationVector::untruncated(1), 10, 1).unwrap();
        assert!((r.se - (r.auc_hat * (1.0 - r.auc_hat) / 10.0).sqrt()).abs() < 1e-15);
        assert!(r.se > 0.1 && r.se <= 0.16);
        assert!(forced_choice_auc(&m, &TruncationVector::untruncated(1), 0, 1).is_err());
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let m = FeatureModel::iid(2, (0.0, 1.0), (0.75, 1.0), 0.5).unwrap();
        let t = TruncationVector::new(vec![0.0, 0.0]).unwrap();
        let a = forced_choice_auc(&m, &t, 50_000, 9).unwrap();
        let b = forced_choice_auc(&m, &t, 50_000, 9).unwrap();
        let c = forced_choice_auc(&m, &t, 50_000, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.wins, c.wins);
    }

    #[test]
    fn coin_flips_agree_with_expectation() {
        let m = FeatureModel::iid(1, (0.0, 1.0), (0.75, 1.0), 0.5).unwrap();
        let t = TruncationVector::new(vec![0.5]).unwrap();
        let a = forced_choice_auc_with(&m, &t, 400_000, 4, Guessing::Expected).unwrap();
        let b = forced_choice_auc_with(&m, &t, 400_000, 4, Guessing::CoinFlip).unwrap();
        assert!((a.auc_hat - b.auc_hat).abs() < 3.0 * (a.se * a.se + b.se * b.se).sqrt());
    }

    #[test]
    fn rejection_rates() {
        let m = FeatureModel::iid(1, (0.0, 1.0), (0.75, 1.0), 0.0).unwrap();
        let open = TruncationVector::untruncated(1);
        assert_eq!(
            empirical_rejection(&m, &open, Class::Positive, 10_000, 1).unwrap(),
            0.0
        );
        let t = TruncationVector::new(vec![0.0]).unwrap();
        let n = 200_000;
        let r = empirical_rejection(&m, &t, Class::Positive, n, 1).unwrap();
        let se = (0.2266 * 0.7734 / n as f64).sqrt();
        assert!((r - 0.226_627_4).abs() < 3.0 * se, "{r}");
        assert!(empirical_rejection(&m, &t, Class::Positive, 100, 1).is_err());
    }
}
