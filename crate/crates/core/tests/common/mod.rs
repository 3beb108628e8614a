#![allow(dead_code)]

use truncio::{normal_pdf, FeatureModel, TruncatedNoisedDensity, TruncationVector};

/// Adaptive Simpson integration started on 64 panels so narrow peaks are not missed.
/// Every accepted subinterval meets `tol / 64` locally.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let panels = 64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + h * k as f64;
            let hi = if k + 1 == panels { b } else { lo + h };
            simpson_panel(f, lo, hi, tol / panels as f64)
        })
        .sum()
}

// (a, f(a)), (b, f(b)) and f at the midpoint, with the Simpson estimate over [a, b]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

impl Panel {
    fn new(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> Self {
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        Self {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
        }
    }
}

fn simpson_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (p.a + p.b);
        let left = Panel::new(p.a, m, p.fa, f(0.5 * (p.a + m)), p.fm);
        let right = Panel::new(m, p.b, p.fm, f(0.5 * (m + p.b)), p.fb);
        let delta = left.whole + right.whole - p.whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left.whole + right.whole + delta / 15.0;
        }
        step(f, left, tol, depth - 1) + step(f, right, tol, depth - 1)
    }
    step(f, Panel::new(a, b, f(a), f(0.5 * (a + b)), f(b)), tol, 30)
}

/// Noiseless truncated normal density.
pub fn truncated_normal(f: f64, mean: f64, sd: f64, tau: f64) -> f64 {
    if f < tau {
        return 0.0;
    }
    let z = 0.5 * libm_free_erfc((tau - mean) / sd / std::f64::consts::SQRT_2);
    normal_pdf(f, mean, sd * sd).unwrap() / z
}

// complementary error function by continued fraction / series, kept independent of the
// library's special-function backend
fn libm_free_erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - libm_free_erfc(-x);
    }
    if x < 2.5 {
        // Maclaurin series of erf
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -x * x / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        // Lentz continued fraction
        let tiny = 1e-300;
        let mut f = x;
        let mut c = x;
        let mut d = 0.0;
        for k in 1..200 {
            let a = k as f64 / 2.0;
            d = x + a * d;
            d = if d.abs() < tiny { tiny } else { d };
            c = x + a / c;
            c = if c.abs() < tiny { tiny } else { c };
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / std::f64::consts::PI.sqrt() / f
    }
}

/// Standard normal CDF from the independent erfc above.
pub fn phi(x: f64) -> f64 {
    0.5 * libm_free_erfc(-x / std::f64::consts::SQRT_2)
}

pub fn density(mean: f64, sd: f64, tau: f64, sigma: f64) -> TruncatedNoisedDensity {
    TruncatedNoisedDensity::new(mean, sd, tau, truncio::InternalNoise::new(sigma).unwrap()).unwrap()
}

pub fn model(dim: usize, sd1: f64, sigma: f64) -> FeatureModel {
    FeatureModel::iid(dim, (0.0, 1.0), (0.75, sd1), sigma).unwrap()
}

pub fn taus(dim: usize, tau: f64) -> TruncationVector {
    if tau == f64::NEG_INFINITY {
        TruncationVector::untruncated(dim)
    } else {
        TruncationVector::shared(tau, dim).unwrap()
    }
}

/// Rejection probabilities recomputed from the independent CDF.
pub fn rejections(dim: usize, sd1: f64, tau: f64) -> (f64, f64) {
    if tau == f64::NEG_INFINITY {
        return (0.0, 0.0);
    }
    (
        phi(tau).powi(dim as i32),
        phi((tau - 0.75) / sd1).powi(dim as i32),
    )
}

/// Maximum pointwise gap between the closed-form density and the truncated normal
/// convolved numerically with the noise kernel, over `n` points.
pub fn convolution_gap(mean: f64, sd: f64, tau: f64, sigma: f64, n: usize) -> f64 {
    let d = density(mean, sd, tau, sigma);
    let total = (sd * sd + sigma * sigma).sqrt();
    let (lo, hi) = (tau.max(mean - 10.0 * sd) - 6.0 * sigma, mean + 10.0 * total);
    let f_hi = mean + 14.0 * sd;
    (0..n)
        .map(|k| {
            let e = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            let a = tau.max(e - 14.0 * sigma);
            let b = f_hi.min(e + 14.0 * sigma);
            let conv = if a < b {
                let kernel = |f: f64| {
                    truncated_normal(f, mean, sd, tau)
                        * normal_pdf(e - f, 0.0, sigma * sigma).unwrap()
                };
                simpson(&kernel, a, b, 1e-12)
            } else {
                0.0
            };
            (d.ln_pdf(e).exp() - conv).abs()
        })
        .fold(0.0, f64::max)
}

/// Integral of the closed-form density over its support.
pub fn total_mass(mean: f64, sd: f64, tau: f64, sigma: f64) -> f64 {
    let d = density(mean, sd, tau, sigma);
    let total = (sd * sd + sigma * sigma).sqrt();
    let lo = if sigma == 0.0 {
        tau.max(mean - 14.0 * sd)
    } else {
        tau.max(mean - 14.0 * sd) - 14.0 * sigma
    };
    let hi = mean + 14.0 * total;
    let pdf = |e: f64| d.ln_pdf(e).exp();
    // split at the threshold so the kink (or jump) sits on a panel edge
    if tau > lo && tau < hi {
        simpson(&pdf, lo, tau, 1e-12) + simpson(&pdf, tau, hi, 1e-12)
    } else {
        simpson(&pdf, lo, hi, 1e-12)
    }
}
