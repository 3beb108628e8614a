//! The truncated ideal observer.
//!
//! An image's features are compared with the thresholds to get its extraction pattern.
//! Internal noise is added to the extracted features only, and the image is rated by
//! the log-likelihood ratio of the noised extracted values under the two classes. The
//! observer knows the thresholds and the noise level, so it uses the exact
//! truncated-then-noised densities.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::distributions::{Class, ClassParams, InternalNoise, TruncatedNoisedDensity};
use crate::error::{domain, Error, Result};
use crate::extraction::{pattern_from_features, ExtractionPattern, TruncationVector, MAX_FEATURES};
use crate::rng::{chunks, substream, Purpose};

/// External-source parameters for both classes plus the internal noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureModel {
    class0: ClassParams,
    class1: ClassParams,
    noise: InternalNoise,
}

impl FeatureModel {
    pub fn new(class0: ClassParams, class1: ClassParams, noise: InternalNoise) -> Result<Self> {
        if class0.dim() != class1.dim() {
            return Err(Error::DimensionMismatch {
                expected: class0.dim(),
                got: class1.dim(),
            });
        }
        if class0.dim() > MAX_FEATURES {
            return domain(format!("at most {MAX_FEATURES} features are supported"));
        }
        Ok(Self {
            class0: class0.with_class(Class::Negative),
            class1: class1.with_class(Class::Positive),
            noise,
        })
    }

    /// `dim` independent features, identically distributed within each class.
    pub fn iid(
        dim: usize,
        (mean0, sd0): (f64, f64),
        (mean1, sd1): (f64, f64),
        sigma: f64,
    ) -> Result<Self> {
        Self::new(
            ClassParams::iid(Class::Negative, mean0, sd0, dim)?,
            ClassParams::iid(Class::Positive, mean1, sd1, dim)?,
            InternalNoise::new(sigma)?,
        )
    }

    pub fn dim(&self) -> usize {
        self.class0.dim()
    }

    pub fn params(&self, class: Class) -> &ClassParams {
        match class {
            Class::Negative => &self.class0,
            Class::Positive => &self.class1,
        }
    }

    pub fn noise(&self) -> InternalNoise {
        self.noise
    }

    pub fn with_noise(&self, noise: InternalNoise) -> Self {
        Self {
            noise,
            ..self.clone()
        }
    }

    /// The same model with the class labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            class0: self.class1.clone().with_class(Class::Negative),
            class1: self.class0.clone().with_class(Class::Positive),
            noise: self.noise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatingOutcome {
    Rated {
        lambda: f64,
        alpha: ExtractionPattern,
    },
    /// Every feature was rejected.
    Unrated,
}

impl RatingOutcome {
    pub fn rating(self) -> Option<f64> {
        match self {
            RatingOutcome::Rated { lambda, .. } => Some(lambda),
            RatingOutcome::Unrated => None,
        }
    }
}

/// Precomputed per-feature densities for one (model, thresholds) pair.
#[derive(Debug, Clone)]
pub struct Observer {
    taus: TruncationVector,
    noise: InternalNoise,
    densities: Vec<[TruncatedNoisedDensity; 2]>,
}

impl Observer {
    pub fn new(model: &FeatureModel, taus: &TruncationVector) -> Result<Self> {
        taus.check_dim(model.dim())?;
        let densities = (0..model.dim())
            .map(|i| {
                let make = |p: &ClassParams| {
                    TruncatedNoisedDensity::new(
                        p.means()[i],
                        p.stddevs()[i],
                        taus.get(i),
                        model.noise,
                    )
                };
                Ok([make(&model.class0)?, make(&model.class1)?])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            taus: taus.clone(),
            noise: model.noise,
            densities,
        })
    }

    pub fn dim(&self) -> usize {
        self.densities.len()
    }

    pub fn taus(&self) -> &TruncationVector {
        &self.taus
    }

    pub fn density(&self, class: Class, feature: usize) -> &TruncatedNoisedDensity {
        &self.densities[feature][class.index()]
    }

    fn check_feature(&self, i: usize) -> Result<()> {
        for class in [Class::Negative, Class::Positive] {
            let d = self.density(class, i);
            if d.is_degenerate() {
                return Err(Error::DegenerateTruncation {
                    feature: i,
                    class,
                    acceptance: d.acceptance(),
                });
            }
        }
        Ok(())
    }

    #[inline]
    fn feature_llr(&self, i: usize, e: f64) -> Result<f64> {
        let [d0, d1] = &self.densities[i];
        let (l0, l1) = (d0.ln_pdf(e), d1.ln_pdf(e));
        if l0 == f64::NEG_INFINITY || l1 == f64::NEG_INFINITY {
            return domain(format!(
                "feature {i} value {e} lies outside the truncated support"
            ));
        }
        Ok(l1 - l0)
    }

    /// LLR for `alpha` given a full-length vector; rejected coordinates are ignored.
    pub fn llr_full(&self, values: &[f64], alpha: ExtractionPattern) -> Result<f64> {
        if alpha.is_unrated() {
            return domain("an unrated image has no likelihood ratio");
        }
        let mut lambda = 0.0;
        for i in alpha.extracted() {
            self.check_feature(i)?;
            lambda += self.feature_llr(i, values[i])?;
        }
        Ok(lambda)
    }

    /// LLR for `alpha` given only the extracted values, in feature order.
    pub fn llr(&self, e: &[f64], alpha: ExtractionPattern) -> Result<f64> {
        self.taus.check_dim(alpha.dim())?;
        if e.len() != alpha.count() {
            return Err(Error::DimensionMismatch {
                expected: alpha.count(),
                got: e.len(),
            });
        }
        if alpha.is_unrated() {
            return domain("an unrated image has no likelihood ratio");
        }
        let mut lambda = 0.0;
        for (&ei, i) in e.iter().zip(alpha.extracted()) {
            self.check_feature(i)?;
            lambda += self.feature_llr(i, ei)?;
        }
        Ok(lambda)
    }

    /// Rates one image. When the observer is noisy, `dim` noise values are drawn for
    /// every image, extracted or not, so that streams stay aligned across thresholds.
    pub fn rate<R: Rng + ?Sized>(&self, f: &[f64], rng: &mut R) -> Result<RatingOutcome> {
        let dim = self.dim();
        if f.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: f.len(),
            });
        }
        let alpha = pattern_from_features(f, &self.taus);
        let mut values = [0.0; MAX_FEATURES];
        values[..dim].copy_from_slice(f);
        let sigma = self.noise.sigma();
        if sigma > 0.0 {
            for v in &mut values[..dim] {
                let z: f64 = rng.sample(StandardNormal);
                *v += sigma * z;
            }
        }
        if alpha.is_unrated() {
            return Ok(RatingOutcome::Unrated);
        }
        let lambda = self.llr_full(&values[..dim], alpha)?;
        Ok(RatingOutcome::Rated { lambda, alpha })
    }

    /// Simulates `n` class images with the given seed and returns the ratings of the
    /// rated ones.
    pub fn simulate(
        &self,
        params: &ClassParams,
        n: usize,
        seed: u64,
        purpose: Purpose,
    ) -> Result<RatingSample> {
        let parts = chunks(n)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(chunk, len)| {
                let mut rng = substream(seed, purpose, Some(params.class()), chunk);
                let mut f = vec![0.0; self.dim()];
                let mut rated = Vec::with_capacity(len);
                for _ in 0..len {
                    draw_features(params, &mut rng, &mut f);
                    if let Some(lambda) = self.rate(&f, &mut rng)?.rating() {
                        rated.push(lambda);
                    }
                }
                Ok(rated)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RatingSample {
            rated: parts.concat(),
            n_total: n,
        })
    }
}

/// Ratings of the rated images among `n_total` simulated ones.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingSample {
    pub rated: Vec<f64>,
    pub n_total: usize,
}

impl RatingSample {
    pub fn n_rated(&self) -> usize {
        self.rated.len()
    }

    pub fn n_unrated(&self) -> usize {
        self.n_total - self.rated.len()
    }

    pub fn rated_fraction(&self) -> f64 {
        self.rated.len() as f64 / self.n_total as f64
    }
}

#[inline]
pub(crate) fn draw_features<R: Rng + ?Sized>(params: &ClassParams, rng: &mut R, out: &mut [f64]) {
    for ((o, &m), &s) in out.iter_mut().zip(params.means()).zip(params.stddevs()) {
        let z: f64 = rng.sample(StandardNormal);
        *o = m + s * z;
    }
}

/// Generalized log-likelihood ratio of the extracted values `e` (one per set bit of
/// `alpha`, in feature order).
pub fn llr(
    e: &[f64],
    alpha: ExtractionPattern,
    model: &FeatureModel,
    taus: &TruncationVector,
) -> Result<f64> {
    Observer::new(model, taus)?.llr(e, alpha)
}

/// Rates a single image drawn by the caller from some class of `model`.
///
/// The observer is blind to the true class, so none is passed in.
pub fn rate_image<R: Rng + ?Sized>(
    f: &[f64],
    model: &FeatureModel,
    taus: &TruncationVector,
    rng: &mut R,
) -> Result<RatingOutcome> {
    Observer::new(model, taus)?.rate(f, rng)
}

/// `n` independent draws from the external source of `class`.
pub fn sample_external<R: Rng + ?Sized>(
    class: Class,
    model: &FeatureModel,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return domain("sample count must be at least 1");
    }
    let params = model.params(class);
    Ok((0..n)
        .map(|_| {
            let mut f = vec![0.0; params.dim()];
            draw_features(params, rng, &mut f);
            f
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::normal_cdf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn paper_model(sd1: f64, sigma: f64) -> FeatureModel {
        FeatureModel::iid(1, (0.0, 1.0), (0.75, sd1), sigma).unwrap()
    }

    fn binormal_llr(e: f64, (m0, s0): (f64, f64), (m1, s1): (f64, f64)) -> f64 {
        let l = |m: f64, s: f64| -0.5 * ((e - m) / s).powi(2) - s.ln();
        l(m1, s1) - l(m0, s0)
    }

    #[test]
    fn identical_classes_give_zero() {
        let model = FeatureModel::iid(2, (0.3, 1.2), (0.3, 1.2), 0.7).unwrap();
        let t = TruncationVector::new(vec![0.0, -1.0]).unwrap();
        for e in [[-2.0, 0.5], [0.0, 0.0], [3.0, -4.0]] {
            assert_eq!(llr(&e, ExtractionPattern::all(2), &model, &t).unwrap(), 0.0);
        }
    }

    #[test]
    fn homoskedastic_midpoint_is_zero() {
        let model = paper_model(1.0, 0.0);
        let open = TruncationVector::untruncated(1);
        let v = llr(&[0.375], ExtractionPattern::all(1), &model, &open).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn truncated_renormalization() {
        // log(Phi(0) / Phi(0.75)); the Gaussian part cancels at the midpoint
        let model = paper_model(1.0, 0.0);
        let t = TruncationVector::new(vec![0.0]).unwrap();
        let v = llr(&[0.375], ExtractionPattern::all(1), &model, &t).unwrap();
        let expected = (0.5 / normal_cdf(0.75).unwrap()).ln();
        assert!((v - expected).abs() < 1e-12);
        assert!((v + 0.436_152_9).abs() < 1e-6, "{v}");
    }

    #[test]
    fn reduces_to_binormal_llr() {
        for sd1 in [0.5, 1.0, 3.0] {
            let model = paper_model(sd1, 0.0);
            let open = TruncationVector::untruncated(1);
            for e in [-3.0, -0.2, 0.375, 1.7, 5.0] {
                let v = llr(&[e], ExtractionPattern::all(1), &model, &open).unwrap();
                assert!((v - binormal_llr(e, (0.0, 1.0), (0.75, sd1))).abs() < 1e-10);
            }
        }
        let noisy = paper_model(3.0, 2.0);
        let open = TruncationVector::untruncated(1);
        let v = llr(&[1.1], ExtractionPattern::all(1), &noisy, &open).unwrap();
        let expected = binormal_llr(1.1, (0.0, 5f64.sqrt()), (0.75, 13f64.sqrt()));
        assert!((v - expected).abs() < 1e-10);
    }

    #[test]
    fn swapping_classes_negates() {
        let model = FeatureModel::iid(2, (0.0, 1.0), (0.75, 3.0), 0.5).unwrap();
        let t = TruncationVector::new(vec![0.0, 0.4]).unwrap();
        let a = Observer::new(&model, &t).unwrap();
        let b = Observer::new(&model.swapped(), &t).unwrap();
        for alpha in ExtractionPattern::enumerate(2).skip(1) {
            for f in [[-0.3, 2.0], [1.0, 0.41], [5.0, -3.0]] {
                assert_eq!(
                    a.llr_full(&f, alpha).unwrap(),
                    -b.llr_full(&f, alpha).unwrap()
                );
            }
        }
    }

    #[test]
    fn noisy_homoskedastic_llr_is_continuous() {
        let model = paper_model(1.0, 0.5);
        let t = TruncationVector::new(vec![0.0]).unwrap();
        let obs = Observer::new(&model, &t).unwrap();
        let alpha = ExtractionPattern::all(1);
        let h = 1e-4;
        let mut prev = obs.llr(&[-4.0], alpha).unwrap();
        let mut e = -4.0;
        while e < 6.0 {
            e += h;
            let cur = obs.llr(&[e], alpha).unwrap();
            assert!((cur - prev).abs() < 1e-3, "jump at {e}");
            prev = cur;
        }
    }

    #[test]
    fn rate_image_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let model = paper_model(1.0, 0.5);
        let t = TruncationVector::new(vec![0.0]).unwrap();
        assert_eq!(
            rate_image(&[-0.1], &model, &t, &mut rng).unwrap(),
            RatingOutcome::Unrated
        );

        let noiseless = paper_model(1.0, 0.0);
        let open = TruncationVector::untruncated(1);
        let out = rate_image(&[1.3], &noiseless, &open, &mut rng).unwrap();
        assert_eq!(
            out,
            RatingOutcome::Rated {
                lambda: llr(&[1.3], ExtractionPattern::all(1), &noiseless, &open).unwrap(),
                alpha: ExtractionPattern::all(1),
            }
        );

        let once = rate_image(&[0.8], &model, &t, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let again = rate_image(&[0.8], &model, &t, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(once, again);
    }

    #[test]
    fn rejected_features_stay_out() {
        // the second feature is rejected, so its value must not matter
        let model = FeatureModel::iid(2, (0.0, 1.0), (0.75, 1.0), 0.0).unwrap();
        let t = TruncationVector::new(vec![0.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = rate_image(&[0.9, -0.1], &model, &t, &mut rng).unwrap();
        let b = rate_image(&[0.9, -3.0], &model, &t, &mut rng).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn llr_argument_checks() {
        let model = paper_model(1.0, 0.0);
        let t = TruncationVector::new(vec![0.0]).unwrap();
        assert!(llr(&[], ExtractionPattern::unrated(1), &model, &t).is_err());
        assert!(llr(&[1.0, 2.0], ExtractionPattern::all(1), &model, &t).is_err());
        // below the threshold with no noise: outside the support
        assert!(llr(&[-1.0], ExtractionPattern::all(1), &model, &t).is_err());
        let extreme = TruncationVector::new(vec![60.0]).unwrap();
        assert!(matches!(
            llr(&[61.0], ExtractionPattern::all(1), &model, &extreme),
            Err(Error::DegenerateTruncation { .. })
        ));
    }

    #[test]
    fn sample_means() {
        let model = paper_model(1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let neg = sample_external(Class::Negative, &model, n, &mut rng).unwrap();
        let mean0 = neg.iter().map(|f| f[0]).sum::<f64>() / n as f64;
        assert!(mean0.abs() < 4e-3, "{mean0}");
        let pos = sample_external(Class::Positive, &model, 200_000, &mut rng).unwrap();
        let mean1 = pos.iter().map(|f| f[0]).sum::<f64>() / 200_000.0;
        assert!((mean1 - 0.75).abs() < 4.0 / 200_000f64.sqrt(), "{mean1}");

        let a = sample_external(
            Class::Positive,
            &model,
            1,
            &mut ChaCha8Rng::seed_from_u64(9),
        )
        .unwrap();
        let b = sample_external(
            Class::Positive,
            &model,
            1,
            &mut ChaCha8Rng::seed_from_u64(9),
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(sample_external(Class::Positive, &model, 0, &mut rng).is_err());
    }

    #[test]
    fn likelihood_ratio_has_unit_mean_under_negatives() {
        let model = FeatureModel::iid(2, (0.0, 1.0), (0.75, 1.0), 0.5).unwrap();
        let t = TruncationVector::new(vec![0.0, -0.5]).unwrap();
        let obs = Observer::new(&model, &t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut f = [0.0; 2];
        let (mut sum, mut sum_sq, mut n) = (0.0, 0.0, 0usize);
        let params = model.params(Class::Negative);
        // restrict to the all-extracted pattern: E[LR | alpha, c=0] = 1 there too
        while n < 100_000 {
            draw_features(params, &mut rng, &mut f);
            if let RatingOutcome::Rated { lambda, alpha } = obs.rate(&f, &mut rng).unwrap() {
                if alpha == ExtractionPattern::all(2) {
                    let lr = lambda.exp();
                    sum += lr;
                    sum_sq += lr * lr;
                    n += 1;
                }
            }
        }
        let mean = sum / n as f64;
        let se = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn simulation_is_reproducible() {
        let model = FeatureModel::iid(2, (0.0, 1.0), (0.75, 1.0), 0.5).unwrap();
        let t = TruncationVector::new(vec![0.0, 0.0]).unwrap();
        let obs = Observer::new(&model, &t).unwrap();
        let a = obs
            .simulate(model.params(Class::Positive), 40_000, 3, Purpose::Ratings)
            .unwrap();
        let b = obs
            .simulate(model.params(Class::Positive), 40_000, 3, Purpose::Ratings)
            .unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool
            .install(|| obs.simulate(model.params(Class::Positive), 40_000, 3, Purpose::Ratings))
            .unwrap();
        assert_eq!(a, c);
    }
}
