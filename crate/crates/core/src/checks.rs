//! Brute-force verification of the estimate ingredients: bilinear products
//! of eigenfunctions in L2, the lattice counting bound for
//! |tau + z_{n1}^2 + z_{n2}^2| near dyadic blocks, and representation
//! counts of integers as (4a-1)^2 + (4b-1)^2.  Everything here is either
//! exact enumeration over computed zeros or plain quadrature; nothing is
//! shared with the flow code beyond the basis tables.

use crate::basis::BesselBasis;
use crate::stats;
use crate::{Flagged, Real};

/// Parameters of one counting question.  All four block/window sizes are
/// dyadic (powers of two).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountingQuery<T> {
    pub tau: T,
    pub l1: u64,
    pub l2: u64,
    pub n1: u64,
    pub n2: u64,
}

impl<T: Real> CountingQuery<T> {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (name, x) in [("L1", self.l1), ("L2", self.l2), ("N1", self.n1), ("N2", self.n2)] {
            if x == 0 || !x.is_power_of_two() {
                v.push(format!("{name} must be a power of two, got {x}"));
            }
        }
        for (name, x) in [("N1", self.n1), ("N2", self.n2)] {
            if x > 4096 {
                v.push(format!("{name} = {x} exceeds the enumeration budget 4096"));
            }
        }
        if !self.tau.is_finite() {
            v.push(format!("tau must be finite, got {}", self.tau));
        }
        v
    }
}

/// ||e_{n1} e_{n2}||_{L2} by quadrature.  Resolved only when the grid can
/// integrate the product of squares, quad_order >= 2(z_{n1}+z_{n2})/pi.
pub fn bilinear_norm<T: Real>(basis: &BesselBasis<T>, n1: usize, n2: usize) -> Flagged<T> {
    let e1 = basis.eigen_row(n1);
    let e2 = basis.eigen_row(n2);
    let terms: Vec<T> = basis
        .quad_weights()
        .iter()
        .zip(e1.iter().zip(e2))
        .map(|(&w, (&a, &b))| {
            let p = a * b;
            w * p * p
        })
        .collect();
    let value = stats::pairwise_sum(&terms).sqrt();
    let needed = T::of(2.0) * (basis.zero(n1) + basis.zero(n2)) / T::PI();
    Flagged { value, resolved: T::from_usize(basis.quad_order()).unwrap() >= needed }
}

/// ||e_{n1} e'_{n2}|| / ||e'_{n2}||, both by the same quadrature.  Since
/// ||e_{n1}|| = 1 the ratio is the constant in the product bound.
pub fn bilinear_deriv_ratio<T: Real>(basis: &BesselBasis<T>, n1: usize, n2: usize) -> Flagged<T> {
    let e1 = basis.eigen_row(n1);
    let d2 = basis.eigen_deriv_row(n2);
    let num: Vec<T> = basis
        .quad_weights()
        .iter()
        .zip(e1.iter().zip(d2))
        .map(|(&w, (&a, &b))| w * (a * a) * (b * b))
        .collect();
    let den: Vec<T> = basis
        .quad_weights()
        .iter()
        .zip(d2)
        .map(|(&w, &b)| w * b * b)
        .collect();
    let value = (stats::pairwise_sum(&num) / stats::pairwise_sum(&den)).sqrt();
    let needed = T::of(2.0) * (basis.zero(n1) + basis.zero(n2)) / T::PI();
    Flagged { value, resolved: T::from_usize(basis.quad_order()).unwrap() >= needed }
}

/// Indices (0-based, half-open) of the zeros with N <= 1 + z_n <= 2N.
pub fn dyadic_block_range<T: Real>(zeros: &[T], dyadic_n: u64) -> std::ops::Range<usize> {
    let lo = T::of(dyadic_n as f64);
    let hi = T::of(2.0 * dyadic_n as f64);
    let start = zeros.partition_point(|&z| T::one() + z < lo);
    let end = zeros.partition_point(|&z| T::one() + z <= hi);
    start..end
}

/// Exact count of pairs (n1, n2) with <z_{n1}> in [N1, 2N1],
/// <z_{n2}> in [N2, 2N2] and <tau + z_{n1}^2 + z_{n2}^2> <= 2(L1+L2),
/// where <x> = 1 + |x|.  `zeros` must reach 2*max(N1, N2) - 1.
pub fn count_lambda_tilde<T: Real>(zeros: &[T], query: &CountingQuery<T>) -> usize {
    let bound = T::of(2.0 * (query.l1 + query.l2) as f64) - T::one();
    let r1 = dyadic_block_range(zeros, query.n1);
    let r2 = dyadic_block_range(zeros, query.n2);
    let mut count = 0;
    for i in r1 {
        let zi = zeros[i] * zeros[i];
        for j in r2.clone() {
            let s = query.tau + zi + zeros[j] * zeros[j];
            if s.abs() <= bound {
                count += 1;
            }
        }
    }
    count
}

/// Supremum over tau of count_lambda_tilde at fixed blocks, with a tau
/// attaining it.  Sorting the z^2 sums turns the sweep into one sliding
/// window pass, so the maximum is exact rather than sampled on a grid.
pub fn max_count_over_tau<T: Real>(
    zeros: &[T],
    l1: u64,
    l2: u64,
    n1: u64,
    n2: u64,
) -> (usize, T) {
    let bound = T::of(2.0 * (l1 + l2) as f64) - T::one();
    let r1 = dyadic_block_range(zeros, n1);
    let r2 = dyadic_block_range(zeros, n2);
    let mut sums = Vec::with_capacity(r1.len() * r2.len());
    for i in r1 {
        let zi = zeros[i] * zeros[i];
        for j in r2.clone() {
            sums.push(zi + zeros[j] * zeros[j]);
        }
    }
    if sums.is_empty() {
        return (0, T::zero());
    }
    sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let width = T::of(2.0) * bound;
    let mut best = (0usize, T::zero());
    let mut j = 0;
    for i in 0..sums.len() {
        if j < i {
            j = i;
        }
        while j + 1 < sums.len() && sums[j + 1] - sums[i] <= width {
            j += 1;
        }
        let count = j - i + 1;
        if count > best.0 {
            best = (count, -(sums[i] + bound));
        }
    }
    best
}

fn isqrt(v: u64) -> u64 {
    if v == 0 {
        return 0;
    }
    let mut x = (v as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|sq| sq > v) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= v) {
        x += 1;
    }
    x
}

/// Number of pairs (n1, n2) in [1, n_max]^2 with
/// (4 n1 - 1)^2 + (4 n2 - 1)^2 = l.  Exact integer arithmetic.
pub fn representation_count(l: u64, n_max: u64) -> u64 {
    let mut count = 0;
    let mut n1 = 1;
    while n1 <= n_max {
        let a = 4 * n1 - 1;
        let aa = a * a;
        if aa + 9 > l {
            break;
        }
        let rem = l - aa;
        let m = isqrt(rem);
        if m * m == rem && m % 4 == 3 {
            let n2 = (m + 1) / 4;
            if (1..=n_max).contains(&n2) {
                count += 1;
            }
        }
        n1 += 1;
    }
    count
}
