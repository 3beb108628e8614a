//! Threshold scans and grid optimization.
//!
//! Every grid point is evaluated with the same method, and in particular with the same
//! Monte Carlo seed, so neighbouring points see common random numbers and their
//! differences are much less noisy than their levels.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::extraction::TruncationVector;
use crate::observer::FeatureModel;
use crate::roc::{asymptotic_auc, rejections, total_auc, AucDecomposition, Method};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub n_steps: usize,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, n_steps: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return domain(format!("grid axis needs finite lo < hi, got [{lo}, {hi}]"));
        }
        if n_steps < 2 {
            return domain(format!("grid axis needs at least 2 steps, got {n_steps}"));
        }
        Ok(Self { lo, hi, n_steps })
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.hi - self.lo) / (self.n_steps - 1) as f64;
        (0..self.n_steps).map(move |k| {
            if k + 1 == self.n_steps {
                self.hi
            } else {
                self.lo + step * k as f64
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub axes: Vec<GridAxis>,
    /// Prepend the untruncated reference point.
    pub include_neg_infinity: bool,
    /// Apply the single axis to every feature.
    pub shared: bool,
}

impl SweepGrid {
    /// `[-3, 4]` in 141 steps plus the untruncated point.
    pub fn default_1d() -> Self {
        Self {
            axes: vec![GridAxis {
                lo: -3.0,
                hi: 4.0,
                n_steps: 141,
            }],
            include_neg_infinity: true,
            shared: false,
        }
    }

    /// 71 x 71 over `[-3, 4]` per axis plus the untruncated point.
    pub fn default_2d() -> Self {
        let axis = GridAxis {
            lo: -3.0,
            hi: 4.0,
            n_steps: 71,
        };
        Self {
            axes: vec![axis, axis],
            include_neg_infinity: true,
            shared: false,
        }
    }

    pub fn shared(axis: GridAxis) -> Self {
        Self {
            axes: vec![axis],
            include_neg_infinity: true,
            shared: true,
        }
    }

    /// Threshold vectors in lexicographic order, the untruncated point first.
    pub fn points(&self, dim: usize) -> Result<Vec<TruncationVector>> {
        let fits = self.axes.len() == dim || (self.shared && self.axes.len() == 1);
        if !(fits || self.axes.is_empty()) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.axes.len(),
            });
        }
        if self.axes.is_empty() && !self.include_neg_infinity {
            return domain("empty grid");
        }
        for a in &self.axes {
            GridAxis::new(a.lo, a.hi, a.n_steps)?;
        }
        let mut points = Vec::new();
        if self.include_neg_infinity {
            points.push(TruncationVector::untruncated(dim));
        }
        if self.axes.is_empty() {
            return Ok(points);
        }
        if self.shared && self.axes.len() == 1 {
            for t in self.axes[0].values() {
                points.push(TruncationVector::shared(t, dim)?);
            }
            return Ok(points);
        }
        let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &self.axes {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    axis.values().map(move |t| {
                        let mut v = prefix.clone();
                        v.push(t);
                        v
                    })
                })
                .collect();
        }
        for c in combos {
            points.push(TruncationVector::new(c)?);
        }
        Ok(points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub taus: TruncationVector,
    pub decomposition: AucDecomposition,
    /// High-noise limit at these thresholds.
    pub asymptote: f64,
}

impl SweepRecord {
    pub fn rej0(&self) -> f64 {
        self.decomposition.rej0
    }

    pub fn rej1(&self) -> f64 {
        self.decomposition.rej1
    }
}

/// Evaluates the total area at every grid point, in grid order.
pub fn sweep(model: &FeatureModel, grid: &SweepGrid, method: Method) -> Result<Vec<SweepRecord>> {
    grid.points(model.dim())?
        .into_par_iter()
        .map(|taus| {
            let decomposition = match total_auc(model, &taus, method) {
                Err(Error::Estimation(_)) => unidentified(model, &taus)?,
                other => other?,
            };
            let asymptote = asymptotic_auc(model, &taus)?;
            Ok(SweepRecord {
                taus,
                decomposition,
                asymptote,
            })
        })
        .collect()
}

// A simulation with no rated images in one class says nothing about the rated-vs-rated
// ordering, so the analysis part is reported as the midpoint of its possible range with
// that half-range as its error. Such points only occur where rating is very rare.
fn unidentified(model: &FeatureModel, taus: &TruncationVector) -> Result<AucDecomposition> {
    let (rej0, rej1) = rejections(model, taus)?;
    let half = 0.5 * (1.0 - rej1) * (1.0 - rej0);
    let az2 = (1.0 - rej1) * rej0;
    let az3 = 0.5 * rej1 * rej0;
    Ok(AucDecomposition {
        az: half + az2 + az3,
        az1: half,
        az2,
        az3,
        rej0,
        rej1,
        az1_se: half,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub taus: TruncationVector,
    pub record: SweepRecord,
}

fn argmax(records: Vec<SweepRecord>) -> Result<Optimum> {
    // records are in lexicographic order, so a strict comparison keeps the smallest
    // thresholds on ties
    let best = records
        .into_iter()
        .reduce(|best, r| {
            if r.decomposition.az > best.decomposition.az {
                r
            } else {
                best
            }
        })
        .ok_or_else(|| Error::Domain("empty grid".into()))?;
    Ok(Optimum {
        taus: best.taus.clone(),
        record: best,
    })
}

/// The grid point with the largest total area.
pub fn optimize(model: &FeatureModel, grid: &SweepGrid, method: Method) -> Result<Optimum> {
    argmax(sweep(model, grid, method)?)
}

/// Best area over the grid at internal noise `sigma`, relative to the noiseless
/// untruncated observer.
pub fn truncation_efficiency(
    model: &FeatureModel,
    grid: &SweepGrid,
    sigma: f64,
    method: Method,
) -> Result<f64> {
    use crate::distributions::InternalNoise;

    let reference = total_auc(
        &model.with_noise(InternalNoise::NONE),
        &TruncationVector::untruncated(model.dim()),
        method,
    )?;
    let guard = 0.5 + (2.0 * reference.se()).max(1e-6);
    if reference.az <= guard {
        return Err(Error::DegenerateModel(format!(
            "untruncated noiseless area {:.6} is not above chance",
            reference.az
        )));
    }
    let best = optimize(&model.with_noise(InternalNoise::new(sigma)?), grid, method)?;
    Ok(best.record.decomposition.az / reference.az)
}
