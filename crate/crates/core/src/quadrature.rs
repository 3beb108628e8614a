//! Deterministic rating distributions for the single-feature observer.
//!
//! The extracted feature axis is cut into cells. Each cell's class mass comes from
//! 8-point Gauss–Legendre quadrature of the truncated-then-noised density, and within
//! a cell the mass is spread uniformly over the range of ratings the cell maps to. The
//! rating axis is never required to be monotone in the feature, so heteroskedastic
//! (quadratic) likelihood ratios are handled the same way as linear ones.

use crate::distributions::{Class, TruncatedNoisedDensity};
use crate::error::{domain, Result};
use crate::observer::Observer;

const GAUSS_LEGENDRE_8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_69),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_34),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_05),
    (-0.183_434_642_495_649_78, 0.362_683_783_378_361_77),
    (0.183_434_642_495_649_78, 0.362_683_783_378_361_77),
    (0.525_532_409_916_329, 0.313_706_645_877_887_05),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_34),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_69),
];

/// Support half-width in standard deviations.
const SUPPORT_WIDTH: f64 = 12.0;

pub const DEFAULT_CELLS: usize = 4096;

/// Integral of `f` over `[lo, hi]` by 8-point Gauss–Legendre.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(lo: f64, hi: f64, mut f: F) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    GAUSS_LEGENDRE_8
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    lo: f64,
    hi: f64,
    mass: f64,
}

/// A rating distribution made of uniform pieces and point masses. Masses need not sum
/// to one; queries are normalized by the total.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RatingDistribution {
    segments: Vec<Segment>,
    atoms: Vec<(f64, f64)>,
    total: f64,
}

impl RatingDistribution {
    pub fn push(&mut self, lo: f64, hi: f64, mass: f64) {
        if mass <= 0.0 {
            return;
        }
        self.total += mass;
        if hi - lo <= 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
            self.atoms.push((0.5 * (lo + hi), mass));
        } else {
            self.segments.push(Segment { lo, hi, mass });
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0.0
    }

    /// Smallest and largest rating carrying mass.
    pub fn range(&self) -> Option<(f64, f64)> {
        let lows = self
            .segments
            .iter()
            .map(|s| s.lo)
            .chain(self.atoms.iter().map(|a| a.0));
        let highs = self
            .segments
            .iter()
            .map(|s| s.hi)
            .chain(self.atoms.iter().map(|a| a.0));
        let lo = lows.fold(f64::INFINITY, f64::min);
        let hi = highs.fold(f64::NEG_INFINITY, f64::max);
        (lo <= hi).then_some((lo, hi))
    }

    /// Normalized `P(R >= t)`.
    pub fn survival(&self, t: f64) -> f64 {
        let seg: f64 = self
            .segments
            .iter()
            .map(|s| s.mass * ((s.hi - t) / (s.hi - s.lo)).clamp(0.0, 1.0))
            .sum();
        let atoms: f64 = self.atoms.iter().filter(|a| a.0 >= t).map(|a| a.1).sum();
        (seg + atoms) / self.total
    }

    /// `P(R_self > R_other) + P(R_self = R_other) / 2` for independent draws.
    pub fn prob_exceeds(&self, other: &RatingDistribution) -> f64 {
        let (pos, neg) = (self, other);
        let mut points: Vec<f64> = [pos, neg]
            .iter()
            .flat_map(|d| {
                d.segments
                    .iter()
                    .flat_map(|s| [s.lo, s.hi])
                    .chain(d.atoms.iter().map(|a| a.0))
            })
            .collect();
        points.sort_unstable_by(f64::total_cmp);
        points.dedup();
        let k = points.len();
        let index = |v: f64| points.binary_search_by(|p| p.total_cmp(&v)).unwrap();

        // density changes at each breakpoint, and atom masses
        let mut d_pos = vec![0.0; k];
        let mut d_neg = vec![0.0; k];
        let mut a_pos = vec![0.0; k];
        let mut a_neg = vec![0.0; k];
        for (dist, dens, atoms) in [(pos, &mut d_pos, &mut a_pos), (neg, &mut d_neg, &mut a_neg)] {
            for s in &dist.segments {
                let d = s.mass / (s.hi - s.lo);
                dens[index(s.lo)] += d;
                dens[index(s.hi)] -= d;
            }
            for &(v, m) in &dist.atoms {
                atoms[index(v)] += m;
            }
        }
        // running densities on (points[i], points[i + 1])
        let mut run_pos = 0.0;
        let mut run_neg = 0.0;
        for i in 0..k {
            run_pos += d_pos[i];
            run_neg += d_neg[i];
            d_pos[i] = run_pos;
            d_neg[i] = run_neg;
        }

        let mut above = 0.0; // positive mass strictly above the current breakpoint
        let mut acc = 0.0;
        for i in (0..k).rev() {
            acc += a_neg[i] * (above + 0.5 * a_pos[i]);
            let at_or_above = above + a_pos[i];
            if i == 0 {
                break;
            }
            let w = points[i] - points[i - 1];
            let (dp, dn) = (d_pos[i - 1].max(0.0), d_neg[i - 1].max(0.0));
            acc += dn * (at_or_above * w + 0.5 * dp * w * w);
            above = at_or_above + dp * w;
        }
        acc / (pos.total * neg.total)
    }
}

/// Feature-axis nodes covering both class densities, refined around the threshold when
/// the internal noise is narrow compared to the cell width.
fn feature_grid(
    densities: &[TruncatedNoisedDensity; 2],
    tau: f64,
    sigma: f64,
    cells: usize,
) -> Vec<f64> {
    let (lo, hi) = densities
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
            let (a, b) = d.effective_support(SUPPORT_WIDTH);
            (lo.min(a), hi.max(b))
        });
    let h = (hi - lo) / cells as f64;
    let mut nodes: Vec<f64> = (0..=cells).map(|k| lo + h * k as f64).collect();
    nodes[cells] = hi;
    if tau.is_finite() && sigma > 0.0 && 24.0 * sigma < 64.0 * h {
        let (a, b) = (
            (tau - SUPPORT_WIDTH * sigma).max(lo),
            (tau + SUPPORT_WIDTH * sigma).min(hi),
        );
        let fine = 256;
        nodes.extend((0..=fine).map(|k| a + (b - a) * k as f64 / fine as f64));
        nodes.sort_unstable_by(f64::total_cmp);
        nodes.dedup();
    }
    nodes
}

/// Rating distributions of rated negatives and positives for a one-feature observer.
pub fn single_feature_ratings(
    observer: &Observer,
    cells: usize,
) -> Result<[RatingDistribution; 2]> {
    if observer.dim() != 1 {
        return domain(format!(
            "quadrature ratings need exactly one feature, got {}",
            observer.dim()
        ));
    }
    if cells < 16 {
        return domain("quadrature needs at least 16 cells");
    }
    let densities = [
        *observer.density(Class::Negative, 0),
        *observer.density(Class::Positive, 0),
    ];
    for (c, d) in densities.iter().enumerate() {
        if d.is_degenerate() {
            return domain(format!("class {c} has degenerate truncation"));
        }
    }
    let tau = observer.taus().get(0);
    let sigma = densities[0].noise_sigma();
    let nodes = feature_grid(&densities, tau, sigma, cells);

    let llr_at = |e: f64| densities[1].ln_pdf(e) - densities[0].ln_pdf(e);
    let node_llr: Vec<f64> = nodes.iter().map(|&e| llr_at(e)).collect();

    let mut out = [RatingDistribution::default(), RatingDistribution::default()];
    for k in 0..nodes.len() - 1 {
        let (x0, x1) = (nodes[k], nodes[k + 1]);
        let half = 0.5 * (x1 - x0);
        let mid = 0.5 * (x1 + x0);
        let (mut lo, mut hi) = (
            node_llr[k].min(node_llr[k + 1]),
            node_llr[k].max(node_llr[k + 1]),
        );
        let mut mass = [0.0; 2];
        for &(x, w) in &GAUSS_LEGENDRE_8 {
            let e = mid + half * x;
            let l0 = densities[0].ln_pdf(e);
            let l1 = densities[1].ln_pdf(e);
            mass[0] += w * l0.exp();
            mass[1] += w * l1.exp();
            let lambda = l1 - l0;
            lo = lo.min(lambda);
            hi = hi.max(lambda);
        }
        if !(lo.is_finite() && hi.is_finite()) {
            continue;
        }
        for c in 0..2 {
            out[c].push(lo, hi, mass[c] * half);
        }
    }
    if out.iter().any(RatingDistribution::is_empty) {
        return domain("rating distribution has no mass on the quadrature grid");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let v = gauss_legendre(-1.0, 2.0, |x| x.powi(15) - 3.0 * x * x + 1.0);
        let exact = (2f64.powi(16) - 1.0) / 16.0 - (8.0 + 1.0) + 3.0;
        assert!((v - exact).abs() < 1e-9 * exact.abs());
    }

    #[test]
    fn uniform_pieces() {
        let mut a = RatingDistribution::default();
        a.push(0.0, 1.0, 1.0);
        let mut b = RatingDistribution::default();
        b.push(0.0, 1.0, 2.0);
        assert!((a.prob_exceeds(&b) - 0.5).abs() < 1e-15);
        assert!((a.survival(0.25) - 0.75).abs() < 1e-15);

        // U(1,2) vs U(0,1)
        let mut c = RatingDistribution::default();
        c.push(1.0, 2.0, 1.0);
        assert!((c.prob_exceeds(&a) - 1.0).abs() < 1e-15);
        assert!(a.prob_exceeds(&c).abs() < 1e-15);

        // U(0,2) vs U(0,1): 3/4
        let mut d = RatingDistribution::default();
        d.push(0.0, 2.0, 1.0);
        assert!((d.prob_exceeds(&a) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn atoms_tie_at_one_half() {
        let mut a = RatingDistribution::default();
        a.push(0.0, 0.0, 0.3);
        let mut b = RatingDistribution::default();
        b.push(0.0, 0.0, 5.0);
        assert_eq!(a.prob_exceeds(&b), 0.5);

        // atom at 0.5 against U(0,1)
        let mut u = RatingDistribution::default();
        u.push(0.0, 1.0, 1.0);
        let mut half = RatingDistribution::default();
        half.push(0.5, 0.5, 1.0);
        assert!((half.prob_exceeds(&u) - 0.5).abs() < 1e-15);
        let mut high = RatingDistribution::default();
        high.push(0.75, 0.75, 1.0);
        assert!((high.prob_exceeds(&u) - 0.75).abs() < 1e-15);
        assert!((u.prob_exceeds(&high) - 0.25).abs() < 1e-15);
    }
}
