//! Small statistical helpers shared by the measure, invariance and checks
//! modules: deterministic reductions, least-squares fits and weighted
//! moments.

use crate::Real;

/// Pairwise (cascade) summation.  Deterministic for a fixed slice order and
/// much better conditioned than a running sum; used for every ensemble
/// reduction so that results do not depend on the worker count.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::zero(),
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Ordinary least-squares line fit y ~ slope * x + intercept.
#[derive(Debug, Clone, Copy)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> LineFit<T> {
    assert!(xs.len() == ys.len() && xs.len() >= 2, "need at least two points");
    let n = T::from_usize(xs.len()).unwrap();
    let mx = pairwise_sum(xs) / n;
    let my = pairwise_sum(ys) / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    let slope = sxy / sxx;
    let r_squared = if syy > T::zero() {
        sxy * sxy / (sxx * syy)
    } else {
        T::one()
    };
    LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    }
}

/// Weighted mean with its linearized standard error:
/// mean = sum w v / sum w,  se = sqrt(sum w^2 (v - mean)^2) / sum w.
pub fn weighted_mean_se<T: Real>(values: &[T], weights: &[T]) -> (T, T) {
    assert_eq!(values.len(), weights.len());
    let wsum = pairwise_sum(weights);
    assert!(wsum > T::zero(), "total weight must be positive");
    let prods: Vec<T> = values.iter().zip(weights).map(|(&v, &w)| v * w).collect();
    let mean = pairwise_sum(&prods) / wsum;
    let devs: Vec<T> = values
        .iter()
        .zip(weights)
        .map(|(&v, &w)| {
            let d = v - mean;
            w * w * d * d
        })
        .collect();
    let se = pairwise_sum(&devs).sqrt() / wsum;
    (mean, se)
}

/// Effective sample size (sum w)^2 / sum w^2 of an importance-weighted
/// ensemble.
pub fn effective_sample_size<T: Real>(weights: &[T]) -> T {
    let s = pairwise_sum(weights);
    let sq: Vec<T> = weights.iter().map(|&w| w * w).collect();
    let s2 = pairwise_sum(&sq);
    if s2 > T::zero() {
        s * s / s2
    } else {
        T::zero()
    }
}

/// q-th percentile (q in [0, 100]) by linear interpolation on a copy.
pub fn percentile<T: Real>(xs: &[T], q: T) -> T {
    assert!(!xs.is_empty());
    let mut v: Vec<T> = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q / T::of(100.0) * T::from_usize(v.len() - 1).unwrap();
    let lo = pos.floor().to_usize().unwrap().min(v.len() - 1);
    let hi = (lo + 1).min(v.len() - 1);
    let frac = pos - pos.floor();
    v[lo] + (v[hi] - v[lo]) * frac
}
