//! The orthonormal radial eigenbasis of the Dirichlet Laplacian on the
//! unit disc:  e_n(r) = J0(z_n r) / nu_n  with  nu_n^2 = int_0^1 J0(z_n r)^2 r dr.
//!
//! Norm convention used throughout the crate: radial integrals are
//! int_0^1 f(r) r dr with no angular 2*pi factor.  The quadrature grid is
//! Gauss-Legendre on [0,1] with the weight r absorbed into the returned
//! weights, so plain weighted sums produce the weighted integral.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::bessel;
use crate::error::{Error, Result};
use crate::io::{read_f64s, read_u64, write_f64s, write_u64, Fnv1a};
use crate::{Flagged, Real};

const BASIS_MAGIC: &[u8; 4] = b"GDBB";
const BASIS_VERSION: u32 = 1;

/// Gauss-Legendre nodes and weights on [-1, 1], ascending nodes.
/// Newton iteration on the Legendre recurrence; near machine accuracy for
/// orders into the tens of thousands.
pub fn gauss_legendre<T: Real>(k: usize) -> (Vec<T>, Vec<T>) {
    assert!(k >= 1, "quadrature order must be positive");
    let mut nodes = vec![T::zero(); k];
    let mut weights = vec![T::zero(); k];
    let kf = T::from_usize(k).unwrap();
    let legendre_pair = |x: T| {
        let mut p0 = T::one();
        let mut p1 = x;
        for j in 2..=k {
            let jf = T::from_usize(j).unwrap();
            let p2 = ((T::of(2.0) * jf - T::one()) * x * p1 - (jf - T::one()) * p0) / jf;
            p0 = p1;
            p1 = p2;
        }
        (p1, p0)
    };
    for i in 0..k.div_ceil(2) {
        let mut x = (T::PI() * (T::from_usize(i).unwrap() + T::of(0.75))
            / (kf + T::of(0.5)))
        .cos();
        for _ in 0..100 {
            let (p1, p0) = legendre_pair(x);
            let dp = kf * (x * p1 - p0) / (x * x - T::one());
            let dx = p1 / dp;
            x = x - dx;
            if dx.abs() <= T::epsilon() * T::of(2.0) {
                break;
            }
        }
        // evaluate the derivative at the converged node; a value left over
        // from the previous Newton iterate is stale by O(dx * k^2), which
        // pollutes the weights at high order
        let (p1, p0) = legendre_pair(x);
        let dp = kf * (x * p1 - p0) / (x * x - T::one());
        nodes[i] = -x;
        nodes[k - 1 - i] = x;
        let w = T::of(2.0) / ((T::one() - x * x) * dp * dp);
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    (nodes, weights)
}

/// Precomputed eigenbasis data: zeros, normalizations and the values of
/// e_n and e_n' on the quadrature grid.  Immutable once built.
#[derive(Debug, Clone)]
pub struct BesselBasis<T> {
    n_modes: usize,
    quad_order: usize,
    zeros: Vec<T>,
    norms: Vec<T>,
    quad_nodes: Vec<T>,
    quad_weights: Vec<T>,
    eigen_values: Vec<T>,       // row-major n_modes x quad_order
    eigen_deriv_values: Vec<T>, // row-major n_modes x quad_order
    grid_id: u64,
    content_id: u64,
}

/// Closed form for the squared normalization at a J0 zero:
/// int_0^1 J0(z r)^2 r dr = J1(z)^2 / 2.
pub fn norm_sq_closed_form<T: Real>(z: T) -> T {
    let j1 = bessel::j1(z);
    j1 * j1 * T::of(0.5)
}

impl<T: Real> BesselBasis<T> {
    /// Build the first `n_modes` eigenfunctions on a `quad_order`-point
    /// grid.  `quad_order` should be at least 2*n_modes so that products
    /// of basis functions are resolved (4*n_modes is the usual choice);
    /// anything below n_modes is rejected outright.
    pub fn build(n_modes: usize, quad_order: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::Config("n_modes must be at least 1".into()));
        }
        if quad_order < n_modes {
            return Err(Error::Config(format!(
                "quad_order {quad_order} < n_modes {n_modes}: grid cannot even represent the basis"
            )));
        }
        let zeros = bessel::zeros::<T>(n_modes)?;
        let (gl_nodes, gl_weights) = gauss_legendre::<T>(quad_order);
        let half = T::of(0.5);
        let quad_nodes: Vec<T> = gl_nodes.iter().map(|&x| (x + T::one()) * half).collect();
        // absorb both the [-1,1] -> [0,1] Jacobian and the radial weight r
        let quad_weights: Vec<T> = gl_weights
            .iter()
            .zip(&quad_nodes)
            .map(|(&w, &r)| w * half * r)
            .collect();

        let mut eigen_values = vec![T::zero(); n_modes * quad_order];
        let mut eigen_deriv_values = vec![T::zero(); n_modes * quad_order];
        let mut norms = Vec::with_capacity(n_modes);
        for (n, &z) in zeros.iter().enumerate() {
            let row = &mut eigen_values[n * quad_order..(n + 1) * quad_order];
            let drow = &mut eigen_deriv_values[n * quad_order..(n + 1) * quad_order];
            for (k, &r) in quad_nodes.iter().enumerate() {
                let (a, b) = bessel::j0_j1(z * r);
                row[k] = a;
                drow[k] = -z * b;
            }
            let mut nu_sq = T::zero();
            for (k, &w) in quad_weights.iter().enumerate() {
                nu_sq = nu_sq + w * row[k] * row[k];
            }
            // J0(z r)^2 on [0,1] maps to an oscillation of z radians per
            // unit of the Legendre variable; the rule is trustworthy once
            // its exactness degree 2K-1 clears that plus the Airy-scale
            // transition region, where truncation decays to rounding level.
            let degree_needed = z + T::of(6.0) * z.powf(T::of(1.0 / 3.0)) + T::of(10.0);
            let resolved = T::from_usize(2 * quad_order - 1).unwrap() >= degree_needed;
            if resolved {
                let closed = norm_sq_closed_form(z);
                if (nu_sq - closed).abs() > T::of(1e-10) {
                    return Err(Error::Format(format!(
                        "normalization cross-check failed for mode {}: quadrature {} vs closed form {}",
                        n + 1,
                        nu_sq,
                        closed
                    )));
                }
            }
            let nu = nu_sq.sqrt();
            for v in row.iter_mut() {
                *v = *v / nu;
            }
            for v in drow.iter_mut() {
                *v = *v / nu;
            }
            norms.push(nu);
        }

        let grid_id = Self::hash_grid(quad_order, &quad_nodes, &quad_weights);
        let content_id =
            Self::hash_content(n_modes, quad_order, &zeros, &norms, &quad_nodes, &quad_weights);
        Ok(BesselBasis {
            n_modes,
            quad_order,
            zeros,
            norms,
            quad_nodes,
            quad_weights,
            eigen_values,
            eigen_deriv_values,
            grid_id,
            content_id,
        })
    }

    fn hash_grid(k: usize, nodes: &[T], weights: &[T]) -> u64 {
        let mut h = Fnv1a::new();
        h.update_u64(k as u64);
        for &x in nodes {
            h.update_f64(x.to_f64().unwrap());
        }
        for &w in weights {
            h.update_f64(w.to_f64().unwrap());
        }
        h.finish()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    pub fn zeros(&self) -> &[T] {
        &self.zeros
    }

    pub fn norms(&self) -> &[T] {
        &self.norms
    }

    pub fn quad_nodes(&self) -> &[T] {
        &self.quad_nodes
    }

    pub fn quad_weights(&self) -> &[T] {
        &self.quad_weights
    }

    /// z_n, 1-based.
    pub fn zero(&self, n: usize) -> T {
        self.zeros[n - 1]
    }

    /// Values of e_n on the grid, 1-based mode index.
    pub fn eigen_row(&self, n: usize) -> &[T] {
        &self.eigen_values[(n - 1) * self.quad_order..n * self.quad_order]
    }

    /// Values of e_n' on the grid, 1-based mode index.
    pub fn eigen_deriv_row(&self, n: usize) -> &[T] {
        &self.eigen_deriv_values[(n - 1) * self.quad_order..n * self.quad_order]
    }

    /// Identifies the quadrature grid; nodal fields carry this to detect
    /// cross-grid mixing.
    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    /// Fingerprint of the basis content.  Zeros, norms and grid pin the
    /// tabulated values, so those three suffice; cached at build time.
    pub fn content_hash(&self) -> u64 {
        self.content_id
    }

    fn hash_content(
        n_modes: usize,
        quad_order: usize,
        zeros: &[T],
        norms: &[T],
        nodes: &[T],
        weights: &[T],
    ) -> u64 {
        let mut h = Fnv1a::new();
        h.update_u64(n_modes as u64);
        h.update_u64(quad_order as u64);
        for arr in [zeros, norms, nodes, weights] {
            for &x in arr.iter() {
                h.update_f64(x.to_f64().unwrap());
            }
        }
        h.finish()
    }

    /// Weighted integral of a grid function against the radial measure.
    pub fn integrate(&self, values: impl Iterator<Item = T>) -> T {
        let mut acc = T::zero();
        for (&w, v) in self.quad_weights.iter().zip(values) {
            acc = acc + w * v;
        }
        acc
    }

    /// (int_0^1 |e_n|^p r dr)^{1/p}; p = infinity gives the grid sup.
    /// The flag is false when the grid is too coarse to resolve the
    /// oscillation of |e_n|^p (quad_order < 4 z_n / pi).
    pub fn eigen_lp_norm(&self, n: usize, p: T) -> Flagged<T> {
        assert!(n >= 1 && n <= self.n_modes, "mode index out of range");
        assert!(p >= T::of(2.0), "p must be >= 2");
        let resolved = T::from_usize(self.quad_order).unwrap()
            >= T::of(4.0) * self.zeros[n - 1] / T::PI();
        let row = self.eigen_row(n);
        let value = if p.is_infinite() {
            row.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
        } else {
            let mut acc = T::zero();
            for (&w, &v) in self.quad_weights.iter().zip(row) {
                acc = acc + w * v.abs().powf(p);
            }
            acc.powf(p.recip())
        };
        Flagged { value, resolved }
    }

    /// ||e_n'||_{L^2} / z_n.  Equals 1 in exact arithmetic (the derivative
    /// norm of a Dirichlet eigenfunction is exactly z_n), so this doubles
    /// as a quadrature health check; the contract only pins it to a fixed
    /// interval.
    pub fn deriv_norm_ratio(&self, n: usize) -> T {
        assert!(n >= 1 && n <= self.n_modes, "mode index out of range");
        let drow = self.eigen_deriv_row(n);
        let mut acc = T::zero();
        for (&w, &v) in self.quad_weights.iter().zip(drow) {
            acc = acc + w * v * v;
        }
        acc.sqrt() / self.zeros[n - 1]
    }

    /// Max |G - I| entries of the Gram matrix: (diagonal error, off-diagonal
    /// error).
    pub fn gram_errors(&self) -> (T, T) {
        self.gram_errors_of(&self.eigen_values, |m, _| {
            if m == 0 {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// Same for the derivative rows; exact values are <e_m', e_n'> =
    /// z_n^2 delta_mn.  Returns (max diagonal error vs z_n^2 in absolute
    /// terms, max off-diagonal cross-orthogonality |<e_m', e_n'>| /
    /// (z_m z_n)).  The off-diagonal is normalized because the raw inner
    /// products scale like z_m z_n and would drown in roundoff at large N.
    pub fn deriv_gram_errors(&self) -> (T, T) {
        let zeros = self.zeros.clone();
        self.gram_errors_of(&self.eigen_deriv_values, move |m, n| {
            if m == 0 {
                zeros[n] * zeros[n]
            } else {
                T::zero()
            }
        })
    }

    fn gram_errors_of(&self, rows: &[T], expected: impl Fn(usize, usize) -> T) -> (T, T) {
        let k = self.quad_order;
        let mut diag = T::zero();
        let mut off = T::zero();
        let mut scratch = vec![T::zero(); k];
        for m in 0..self.n_modes {
            let rm = &rows[m * k..(m + 1) * k];
            for (i, (&w, &v)) in self.quad_weights.iter().zip(rm).enumerate() {
                scratch[i] = w * v;
            }
            for n in m..self.n_modes {
                let rn = &rows[n * k..(n + 1) * k];
                let mut g = T::zero();
                for (&a, &b) in scratch.iter().zip(rn) {
                    g = g + a * b;
                }
                let err = (g - expected(n - m, n)).abs();
                if n == m {
                    diag = diag.max(err);
                } else {
                    let scale = (expected(0, m) * expected(0, n)).sqrt();
                    off = off.max(err / scale);
                }
            }
        }
        (diag, off)
    }

    /// Serialize: magic, version, N, K, then little-endian f64 arrays in
    /// field order (zeros, norms, quad_nodes, quad_weights, eigen_values,
    /// eigen_deriv_values).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(BASIS_MAGIC)?;
        w.write_all(&BASIS_VERSION.to_le_bytes())?;
        write_u64(&mut w, self.n_modes as u64)?;
        write_u64(&mut w, self.quad_order as u64)?;
        write_f64s(&mut w, &self.zeros)?;
        write_f64s(&mut w, &self.norms)?;
        write_f64s(&mut w, &self.quad_nodes)?;
        write_f64s(&mut w, &self.quad_weights)?;
        write_f64s(&mut w, &self.eigen_values)?;
        write_f64s(&mut w, &self.eigen_deriv_values)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != BASIS_MAGIC {
            return Err(Error::Format("not a basis file (bad magic)".into()));
        }
        let mut ver = [0u8; 4];
        r.read_exact(&mut ver)?;
        let version = u32::from_le_bytes(ver);
        if version != BASIS_VERSION {
            return Err(Error::Format(format!(
                "unsupported basis file version {version}"
            )));
        }
        let n_modes = read_u64(&mut r)? as usize;
        let quad_order = read_u64(&mut r)? as usize;
        if n_modes == 0 || quad_order < n_modes {
            return Err(Error::Format("basis file header is inconsistent".into()));
        }
        let zeros = read_f64s(&mut r, n_modes)?;
        let norms = read_f64s(&mut r, n_modes)?;
        let quad_nodes = read_f64s(&mut r, quad_order)?;
        let quad_weights: Vec<T> = read_f64s(&mut r, quad_order)?;
        let eigen_values = read_f64s(&mut r, n_modes * quad_order)?;
        let eigen_deriv_values = read_f64s(&mut r, n_modes * quad_order)?;
        let grid_id = Self::hash_grid(quad_order, &quad_nodes, &quad_weights);
        let content_id =
            Self::hash_content(n_modes, quad_order, &zeros, &norms, &quad_nodes, &quad_weights);
        Ok(BesselBasis {
            n_modes,
            quad_order,
            zeros,
            norms,
            quad_nodes,
            quad_weights,
            eigen_values,
            eigen_deriv_values,
            grid_id,
            content_id,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::{j0, zero};

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            fa: f64,
            b: f64,
            fb: f64,
            fm: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let flm = f(0.5 * (a + m));
            let frm = f(0.5 * (m + b));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                left + right + delta / 15.0
            } else {
                rec(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1)
                    + rec(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, fa, b, fb, fm, whole, tol, 40)
    }

    #[test]
    fn quadrature_integrates_monomials_exactly() {
        let basis: BesselBasis<f64> = BesselBasis::build(2, 8).unwrap();
        for j in 0..=14u32 {
            let exact = 1.0 / (j as f64 + 2.0);
            let got = basis.integrate(basis.quad_nodes().iter().map(|&r| r.powi(j as i32)));
            assert!((got - exact).abs() < 1e-14, "monomial degree {j}");
        }
    }

    #[test]
    fn gauss_legendre_matches_reference_order_5() {
        // classical order-5 values
        let (x, w) = gauss_legendre::<f64>(5);
        assert!((x[2]).abs() < 1e-15);
        assert!((x[4] - 0.906179845938664).abs() < 1e-13);
        assert!((w[2] - 0.5688888888888889).abs() < 1e-13);
        assert!((w[4] - 0.23692688505618908).abs() < 1e-13);
    }

    #[test]
    fn small_basis_is_orthonormal() {
        let basis: BesselBasis<f64> = BesselBasis::build(8, 64).unwrap();
        let (diag, off) = basis.gram_errors();
        assert!(diag < 1e-10, "diag error {diag:.3e}");
        assert!(off < 1e-10, "off-diag error {off:.3e}");
    }

    #[test]
    fn rejects_underresolved_grid() {
        assert!(BesselBasis::<f64>::build(8, 7).is_err());
        assert!(BesselBasis::<f64>::build(0, 8).is_err());
    }

    #[test]
    fn norm_matches_adaptive_quadrature_and_closed_form() {
        let z1: f64 = zero(1).unwrap();
        let oracle = adaptive_simpson(&|r: f64| j0(z1 * r).powi(2) * r, 0.0, 1.0, 1e-13);
        let closed = norm_sq_closed_form(z1);
        assert!((oracle - closed).abs() < 1e-10);
        let basis: BesselBasis<f64> = BesselBasis::build(8, 64).unwrap();
        let nu1_sq = basis.norms()[0].powi(2);
        assert!((nu1_sq - oracle).abs() < 1e-10);
    }

    #[test]
    fn norm_decay_slope_is_minus_half() {
        let basis: BesselBasis<f64> = BesselBasis::build(256, 1024).unwrap();
        let idx: Vec<usize> = (16..=256).collect();
        let xs: Vec<f64> = idx.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = idx.iter().map(|&n| basis.norms()[n - 1].ln()).collect();
        let fit = crate::stats::linear_fit(&xs, &ys);
        assert!(
            (fit.slope + 0.5).abs() <= 0.05,
            "norm decay slope {}",
            fit.slope
        );
    }

    #[test]
    fn l2_norm_of_every_mode_is_one() {
        let basis: BesselBasis<f64> = BesselBasis::build(64, 256).unwrap();
        for n in 1..=64 {
            let v = basis.eigen_lp_norm(n, 2.0);
            assert!(v.resolved);
            assert!((v.value - 1.0).abs() < 1e-8, "mode {n}: {}", v.value);
        }
    }

    #[test]
    fn l6_norm_growth_slope() {
        let basis: BesselBasis<f64> = BesselBasis::build(256, 1024).unwrap();
        let idx: Vec<usize> = (16..=256).collect();
        let xs: Vec<f64> = idx.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = idx
            .iter()
            .map(|&n| basis.eigen_lp_norm(n, 6.0).value.ln())
            .collect();
        let fit = crate::stats::linear_fit(&xs, &ys);
        assert!(
            (fit.slope - 1.0 / 6.0).abs() <= 0.05,
            "L6 growth slope {}",
            fit.slope
        );
    }

    #[test]
    fn l4_fourth_power_tracks_log() {
        let basis: BesselBasis<f64> = BesselBasis::build(256, 1024).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for n in 16..=256 {
            let l4 = basis.eigen_lp_norm(n, 4.0).value;
            let ratio = l4.powi(4) / (1.0 + n as f64).ln();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        assert!(lo > 0.0);
        assert!(hi / lo <= 4.0, "L4^4 / log band [{lo}, {hi}]");
    }

    #[test]
    fn underresolved_lp_norm_is_flagged() {
        let basis: BesselBasis<f64> = BesselBasis::build(64, 64).unwrap();
        assert!(!basis.eigen_lp_norm(64, 4.0).resolved);
        assert!(basis.eigen_lp_norm(1, 4.0).resolved);
    }

    #[test]
    fn deriv_norm_ratio_pinned() {
        let basis: BesselBasis<f64> = BesselBasis::build(256, 1024).unwrap();
        for n in [1usize, 2, 4, 16, 64, 256] {
            let r = basis.deriv_norm_ratio(n);
            assert!(r > 0.3 && r < 3.0, "ratio({n}) = {r}");
        }
        let stab = basis.deriv_norm_ratio(256) / basis.deriv_norm_ratio(16);
        assert!(stab > 0.5 && stab < 2.0, "ratio stabilization {stab}");
    }

    #[test]
    fn deriv_rows_are_orthogonal() {
        let basis: BesselBasis<f64> = BesselBasis::build(32, 128).unwrap();
        let (diag, off) = basis.deriv_gram_errors();
        assert!(off < 1e-8, "deriv off-diag {off:.3e}");
        // diagonal equals z_n^2; with values up to ~1e4 allow 1e-6
        assert!(diag < 1e-6, "deriv diag err {diag:.3e}");
    }

    #[test]
    fn eigen_equation_residual_small() {
        // r e'' + e' + z^2 r e = 0, e'' by five-point finite differences of
        // fresh evaluations; tolerance 1e-6 z^2
        let basis: BesselBasis<f64> = BesselBasis::build(64, 256).unwrap();
        for &n in &[1usize, 4, 8, 16, 32, 64] {
            let z = basis.zero(n);
            let nu = basis.norms()[n - 1];
            let e = |r: f64| j0(z * r) / nu;
            let ep = |r: f64| -z * crate::bessel::j1(z * r) / nu;
            let h = 0.02 / z;
            let mut worst = 0.0f64;
            for i in 1..10 {
                let r = i as f64 / 10.0;
                let e2 = (-e(r + 2.0 * h) + 16.0 * e(r + h) - 30.0 * e(r)
                    + 16.0 * e(r - h)
                    - e(r - 2.0 * h))
                    / (12.0 * h * h);
                let res = (r * e2 + ep(r) + z * z * r * e(r)).abs();
                worst = worst.max(res);
            }
            assert!(worst < 1e-6 * z * z, "mode {n}: residual {worst:.3e}");
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("basis.bin");
        let basis: BesselBasis<f64> = BesselBasis::build(8, 32).unwrap();
        basis.save(&path).unwrap();
        let back: BesselBasis<f64> = BesselBasis::load(&path).unwrap();
        assert_eq!(back.n_modes(), 8);
        assert_eq!(back.quad_order(), 32);
        assert_eq!(back.zeros(), basis.zeros());
        assert_eq!(back.grid_id(), basis.grid_id());
        assert_eq!(back.content_hash(), basis.content_hash());
        // saving the loaded copy reproduces the file byte for byte
        let path2 = dir.path().join("basis2.bin");
        back.save(&path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn load_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"not a basis at all").unwrap();
        assert!(BesselBasis::<f64>::load(&path).is_err());
    }
}
