//! Mann–Whitney estimate of `P(X > Y) + P(X = Y) / 2` with a DeLong standard error.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    pub auc: f64,
    pub se: f64,
}

/// Ties count one half.
pub fn mann_whitney(positives: &[f64], negatives: &[f64]) -> Result<MannWhitney> {
    let (n1, n0) = (positives.len(), negatives.len());
    if n1 == 0 || n0 == 0 {
        return Err(Error::Estimation(format!(
            "Mann-Whitney needs samples in both groups, got {n1} positive and {n0} negative"
        )));
    }
    if positives.iter().chain(negatives).any(|v| v.is_nan()) {
        return Err(Error::Estimation("ratings contain NaN".into()));
    }

    let mut pooled: Vec<(f64, bool)> = positives
        .iter()
        .map(|&v| (v, true))
        .chain(negatives.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    let (n1f, n0f) = (n1 as f64, n0 as f64);
    let mut neg_below = 0usize;
    let mut pos_below = 0usize;
    // placement sums: V10 for positives, V01 for negatives
    let (mut s10, mut ss10, mut s01, mut ss01) = (0.0, 0.0, 0.0, 0.0);

    let mut start = 0;
    while start < pooled.len() {
        let value = pooled[start].0;
        let mut end = start;
        let (mut p, mut q) = (0usize, 0usize);
        while end < pooled.len() && pooled[end].0 == value {
            if pooled[end].1 {
                p += 1;
            } else {
                q += 1;
            }
            end += 1;
        }
        let pos_above = n1 - pos_below - p;
        let v10 = (neg_below as f64 + 0.5 * q as f64) / n0f;
        let v01 = (pos_above as f64 + 0.5 * p as f64) / n1f;
        s10 += p as f64 * v10;
        ss10 += p as f64 * v10 * v10;
        s01 += q as f64 * v01;
        ss01 += q as f64 * v01 * v01;
        neg_below += q;
        pos_below += p;
        start = end;
    }

    let auc = s10 / n1f;
    let var = |s: f64, ss: f64, n: f64| {
        if n < 2.0 {
            0.0
        } else {
            ((ss - s * s / n) / (n - 1.0)).max(0.0)
        }
    };
    let se = (var(s10, ss10, n1f) / n1f + var(s01, ss01, n0f) / n0f).sqrt();
    Ok(MannWhitney { auc, se })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(pos: &[f64], neg: &[f64]) -> f64 {
        let mut wins = 0.0;
        for &x in pos {
            for &y in neg {
                wins += if x > y {
                    1.0
                } else if x == y {
                    0.5
                } else {
                    0.0
                };
            }
        }
        wins / (pos.len() * neg.len()) as f64
    }

    #[test]
    fn separated_groups() {
        let m = mann_whitney(&[6.0, 7.0, 8.0], &[1.0, 2.0]).unwrap();
        assert_eq!(m.auc, 1.0);
        assert_eq!(m.se, 0.0);
        let m = mann_whitney(&[1.0, 2.0], &[6.0, 7.0, 8.0]).unwrap();
        assert_eq!(m.auc, 0.0);
    }

    #[test]
    fn all_tied() {
        let m = mann_whitney(&[0.0; 5], &[0.0; 7]).unwrap();
        assert_eq!(m.auc, 0.5);
    }

    #[test]
    fn empty_group_is_an_error() {
        assert!(mann_whitney(&[], &[1.0]).is_err());
        assert!(mann_whitney(&[1.0], &[]).is_err());
        assert!(mann_whitney(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn delong_matches_hand_computation() {
        // pos = [1, 3], neg = [2, 3]: V10 = [0, 0.75], V01 = [0.5, 0.25]
        let m = mann_whitney(&[1.0, 3.0], &[2.0, 3.0]).unwrap();
        assert!((m.auc - 0.375).abs() < 1e-15);
        let var10 = (0.375f64.powi(2) * 2.0) / 1.0;
        let var01 = (0.125f64.powi(2) * 2.0) / 1.0;
        assert!((m.se - (var10 / 2.0 + var01 / 2.0).sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn matches_pairwise_count(
            pos in prop::collection::vec(-5i32..5, 1..30),
            neg in prop::collection::vec(-5i32..5, 1..30),
        ) {
            let pos: Vec<f64> = pos.into_iter().map(f64::from).collect();
            let neg: Vec<f64> = neg.into_iter().map(f64::from).collect();
            let m = mann_whitney(&pos, &neg).unwrap();
            prop_assert!((m.auc - brute_force(&pos, &neg)).abs() < 1e-12);
            let flipped = mann_whitney(&neg, &pos).unwrap();
            prop_assert!((m.auc + flipped.auc - 1.0).abs() < 1e-12);
        }
    }
}
