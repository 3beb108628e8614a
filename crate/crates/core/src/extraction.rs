//! Extraction patterns: which features survive lefthand truncation.
//!
//! The thresholds split feature space into `2^M` disjoint regions, one per pattern of
//! kept and rejected features. The all-rejected pattern leaves an image unrated.

use std::fmt;

use crate::distributions::{acceptance_prob, ClassParams};
use crate::error::{domain, Error, Result};

/// Upper bound on `M`; patterns are enumerated exhaustively.
pub const MAX_FEATURES: usize = 20;

/// Lefthand thresholds, one per feature. `-inf` means the feature is never rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationVector(Vec<f64>);

impl TruncationVector {
    pub fn new(taus: Vec<f64>) -> Result<Self> {
        if taus.is_empty() || taus.len() > MAX_FEATURES {
            return domain(format!(
                "truncation vector needs between 1 and {MAX_FEATURES} entries, got {}",
                taus.len()
            ));
        }
        if let Some(t) = taus.iter().find(|t| t.is_nan() || **t == f64::INFINITY) {
            return domain(format!("threshold must be finite or -inf, got {t}"));
        }
        Ok(Self(taus))
    }

    pub fn untruncated(dim: usize) -> Self {
        Self(vec![f64::NEG_INFINITY; dim])
    }

    /// The same threshold on every feature.
    pub fn shared(tau: f64, dim: usize) -> Result<Self> {
        Self::new(vec![tau; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn is_untruncated(&self) -> bool {
        self.0.iter().all(|t| *t == f64::NEG_INFINITY)
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for TruncationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

/// Indicator vector over features, stored as a bitmask (bit `i` set = feature `i` kept).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtractionPattern {
    bits: u32,
    dim: u8,
}

impl ExtractionPattern {
    pub fn from_bits(bits: u32, dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_FEATURES {
            return domain(format!("pattern dimension must be in 1..={MAX_FEATURES}"));
        }
        if bits >> dim != 0 {
            return domain(format!("bits {bits:#b} exceed dimension {dim}"));
        }
        Ok(Self {
            bits,
            dim: dim as u8,
        })
    }

    pub fn from_indicators(alpha: &[bool]) -> Result<Self> {
        let bits = alpha
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &a)| acc | (u32::from(a) << i));
        Self::from_bits(bits, alpha.len())
    }

    /// Every feature extracted.
    pub fn all(dim: usize) -> Self {
        assert!((1..=MAX_FEATURES).contains(&dim));
        Self {
            bits: (1u32 << dim) - 1,
            dim: dim as u8,
        }
    }

    /// No feature extracted.
    pub fn unrated(dim: usize) -> Self {
        assert!((1..=MAX_FEATURES).contains(&dim));
        Self {
            bits: 0,
            dim: dim as u8,
        }
    }

    /// All `2^dim` patterns in bitmask order, starting with the unrated one.
    pub fn enumerate(dim: usize) -> impl Iterator<Item = ExtractionPattern> {
        assert!((1..=MAX_FEATURES).contains(&dim));
        (0..(1u32 << dim)).map(move |bits| ExtractionPattern {
            bits,
            dim: dim as u8,
        })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn dim(self) -> usize {
        usize::from(self.dim)
    }

    /// Number of extracted features.
    pub fn count(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_unrated(self) -> bool {
        self.bits == 0
    }

    pub fn is_extracted(self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    pub fn extracted(self) -> impl Iterator<Item = usize> {
        (0..self.dim()).filter(move |&i| self.is_extracted(i))
    }
}

impl fmt::Display for ExtractionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            f.write_str(if self.is_extracted(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[inline]
fn kept(f: f64, tau: f64) -> bool {
    // step(0) = 1: a value exactly at its threshold is extracted
    f >= tau
}

/// Whether `f` lies in the region of feature space assigned to `alpha`.
pub fn composite_step(
    f: &[f64],
    taus: &TruncationVector,
    alpha: ExtractionPattern,
) -> Result<bool> {
    if f.len() != taus.dim() {
        return Err(Error::DimensionMismatch {
            expected: taus.dim(),
            got: f.len(),
        });
    }
    taus.check_dim(alpha.dim())?;
    Ok(f.iter()
        .zip(taus.as_slice())
        .enumerate()
        .all(|(i, (&fi, &ti))| kept(fi, ti) == alpha.is_extracted(i)))
}

/// The unique pattern whose region contains `f`.
///
/// Panics if `f` and `taus` differ in length.
pub fn pattern_from_features(f: &[f64], taus: &TruncationVector) -> ExtractionPattern {
    assert_eq!(
        f.len(),
        taus.dim(),
        "feature vector and thresholds differ in length"
    );
    let bits = f
        .iter()
        .zip(taus.as_slice())
        .enumerate()
        .fold(0u32, |acc, (i, (&fi, &ti))| {
            acc | (u32::from(kept(fi, ti)) << i)
        });
    ExtractionPattern {
        bits,
        dim: taus.dim() as u8,
    }
}

/// Probability that a class image lands in `alpha`'s region (independent features).
pub fn extraction_prob(
    alpha: ExtractionPattern,
    params: &ClassParams,
    taus: &TruncationVector,
) -> f64 {
    debug_assert_eq!(params.dim(), taus.dim());
    (0..params.dim())
        .map(|i| {
            let accept = acceptance_prob(params, i, taus.get(i));
            if alpha.is_extracted(i) {
                accept
            } else {
                1.0 - accept
            }
        })
        .product()
}

/// Probability that every feature of a class image is rejected.
pub fn full_rejection_prob(params: &ClassParams, taus: &TruncationVector) -> f64 {
    extraction_prob(ExtractionPattern::unrated(params.dim()), params, taus)
}
