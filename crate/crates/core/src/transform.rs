//! Dense analysis/synthesis between Fourier-Bessel coefficients and nodal
//! values on the quadrature grid.  These work in the unweighted e_n frame;
//! the z_n^{-s} scaling of e_{n,s} is applied by callers (see `measure` and
//! `flow`).

use num_complex::Complex;

use crate::basis::BesselBasis;
use crate::error::{Error, Result};
use crate::{Cplx, Real};

/// Complex values of a radial function on the basis quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField<T> {
    pub values: Vec<Cplx<T>>,
    pub grid_id: u64,
}

impl<T: Real> NodalField<T> {
    pub fn zero(basis: &BesselBasis<T>) -> Self {
        NodalField {
            values: vec![Complex::new(T::zero(), T::zero()); basis.quad_order()],
            grid_id: basis.grid_id(),
        }
    }
}

fn check_grid<T: Real>(basis: &BesselBasis<T>, field: &NodalField<T>) -> Result<()> {
    if field.grid_id != basis.grid_id() || field.values.len() != basis.quad_order() {
        return Err(Error::GridMismatch {
            field: field.grid_id,
            basis: basis.grid_id(),
        });
    }
    Ok(())
}

/// Projections a_n = sum_k w_k f(r_k) e_n(r_k) ~ int_0^1 f e_n r dr for
/// n = 1..N.
pub fn analyze<T: Real>(basis: &BesselBasis<T>, field: &NodalField<T>) -> Result<Vec<Cplx<T>>> {
    check_grid(basis, field)?;
    let k = basis.quad_order();
    let mut weighted = Vec::with_capacity(k);
    for (&w, v) in basis.quad_weights().iter().zip(&field.values) {
        weighted.push(Complex::new(w * v.re, w * v.im));
    }
    let mut coeffs = Vec::with_capacity(basis.n_modes());
    for n in 1..=basis.n_modes() {
        let row = basis.eigen_row(n);
        let mut re = T::zero();
        let mut im = T::zero();
        for (&e, v) in row.iter().zip(&weighted) {
            re = re + e * v.re;
            im = im + e * v.im;
        }
        coeffs.push(Complex::new(re, im));
    }
    Ok(coeffs)
}

fn synthesize_rows<'a, T: Real>(
    basis: &'a BesselBasis<T>,
    coeffs: &[Cplx<T>],
    row: impl Fn(usize) -> &'a [T],
) -> NodalField<T> {
    assert!(
        coeffs.len() <= basis.n_modes(),
        "more coefficients than basis modes"
    );
    let mut values = vec![Complex::new(T::zero(), T::zero()); basis.quad_order()];
    for (i, c) in coeffs.iter().enumerate() {
        let r = row(i + 1);
        for (v, &e) in values.iter_mut().zip(r) {
            v.re = v.re + c.re * e;
            v.im = v.im + c.im * e;
        }
    }
    NodalField {
        values,
        grid_id: basis.grid_id(),
    }
}

/// Nodal values of sum_n c_n e_n.
pub fn synthesize<T: Real>(basis: &BesselBasis<T>, coeffs: &[Cplx<T>]) -> NodalField<T> {
    synthesize_rows(basis, coeffs, |n| basis.eigen_row(n))
}

/// Nodal values of the radial derivative sum_n c_n e_n'.
pub fn synthesize_deriv<T: Real>(basis: &BesselBasis<T>, coeffs: &[Cplx<T>]) -> NodalField<T> {
    synthesize_rows(basis, coeffs, |n| basis.eigen_deriv_row(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::j0;

    fn delta(basis: &BesselBasis<f64>, m: usize) -> Vec<Cplx<f64>> {
        let mut c = vec![Complex::new(0.0, 0.0); basis.n_modes()];
        c[m - 1] = Complex::new(1.0, 0.0);
        c
    }

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
    fn round_trip_is_identity() {
        let basis = BesselBasis::build(8, 32).unwrap();
        for m in 1..=8 {
            let coeffs = analyze(&basis, &synthesize(&basis, &delta(&basis, m))).unwrap();
            for (i, c) in coeffs.iter().enumerate() {
                let expect = if i + 1 == m { 1.0 } else { 0.0 };
                assert!(
                    (c.re - expect).abs() < 1e-10 && c.im.abs() < 1e-10,
                    "m = {m}, i = {i}"
                );
            }
        }
    }

    #[test]
    fn analyze_constant_field_matches_adaptive_quadrature() {
        let basis = BesselBasis::build(6, 48).unwrap();
        let ones = NodalField {
            values: vec![Complex::new(1.0, 0.0); basis.quad_order()],
            grid_id: basis.grid_id(),
        };
        let coeffs = analyze(&basis, &ones).unwrap();
        for n in 1..=6usize {
            let z = basis.zero(n);
            let nu = basis.norms()[n - 1];
            let oracle = adaptive_simpson(&|r: f64| j0(z * r) / nu * r, 0.0, 1.0, 1e-12);
            assert!(
                (coeffs[n - 1].re - oracle).abs() < 1e-8,
                "mode {n}: {} vs {oracle}",
                coeffs[n - 1].re
            );
        }
    }

    #[test]
    fn analyze_is_linear() {
        let basis = BesselBasis::build(8, 32).unwrap();
        let k = basis.quad_order();
        // deterministic pseudo-random fields
        let f: Vec<Cplx<f64>> = (0..k)
            .map(|i| Complex::new(((i * 37 + 11) % 101) as f64 / 50.5 - 1.0, (i as f64 * 0.37).sin()))
            .collect();
        let g: Vec<Cplx<f64>> = (0..k)
            .map(|i| Complex::new((i as f64 * 1.3).cos(), ((i * 53 + 7) % 97) as f64 / 48.5 - 1.0))
            .collect();
        let a = Complex::new(0.6, -1.1);
        let b = Complex::new(-0.4, 0.2);
        let combo: Vec<Cplx<f64>> = f
            .iter()
            .zip(&g)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let gid = basis.grid_id();
        let ca = analyze(&basis, &NodalField { values: f, grid_id: gid }).unwrap();
        let cb = analyze(&basis, &NodalField { values: g, grid_id: gid }).unwrap();
        let cc = analyze(&basis, &NodalField { values: combo, grid_id: gid }).unwrap();
        for n in 0..8 {
            let lin = a * ca[n] + b * cb[n];
            assert!((cc[n] - lin).norm() < 1e-12, "mode {}", n + 1);
        }
    }

    #[test]
    fn parseval_holds() {
        let basis = BesselBasis::build(16, 64).unwrap();
        let coeffs: Vec<Cplx<f64>> = (0..16)
            .map(|i| Complex::new((i as f64 * 0.71).sin(), (i as f64 * 1.13).cos() * 0.5))
            .collect();
        let field = synthesize(&basis, &coeffs);
        let phys: f64 = basis
            .quad_weights()
            .iter()
            .zip(&field.values)
            .map(|(&w, v)| w * v.norm_sqr())
            .sum();
        let spec: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        assert!((phys - spec).abs() < 1e-10);
    }

    #[test]
    fn synthesize_zero_gives_zero_field() {
        let basis = BesselBasis::build(4, 16).unwrap();
        let field = synthesize(&basis, &delta(&basis, 1).iter().map(|_| Complex::new(0.0, 0.0)).collect::<Vec<_>>());
        assert!(field.values.iter().all(|v| v.re == 0.0 && v.im == 0.0));
    }

    #[test]
    fn deriv_matches_finite_difference_of_synthesis() {
        // compare e_n'(r) against FD of fresh evaluations of e_n at r +- h
        let basis = BesselBasis::build(8, 64).unwrap();
        let h = 1e-6;
        for n in [1usize, 3, 8] {
            let z = basis.zero(n);
            let nu = basis.norms()[n - 1];
            let field = synthesize_deriv(&basis, &delta(&basis, n));
            for (k, &r) in basis.quad_nodes().iter().enumerate().step_by(7) {
                let fd = (j0(z * (r + h)) - j0(z * (r - h))) / (2.0 * h) / nu;
                assert!(
                    (field.values[k].re - fd).abs() < 1e-4,
                    "n = {n}, r = {r}"
                );
            }
        }
    }

    #[test]
    fn deriv_cross_orthogonality_via_transform() {
        let basis = BesselBasis::build(8, 64).unwrap();
        for m in 1..=8usize {
            let dm = synthesize_deriv(&basis, &delta(&basis, m));
            for n in (m + 1)..=8 {
                let dn = synthesize_deriv(&basis, &delta(&basis, n));
                let ip: f64 = basis
                    .quad_weights()
                    .iter()
                    .zip(dm.values.iter().zip(&dn.values))
                    .map(|(&w, (a, b))| w * (a.re * b.re + a.im * b.im))
                    .sum();
                assert!(ip.abs() < 1e-8, "<e_{m}', e_{n}'> = {ip:.3e}");
            }
        }
    }

    #[test]
    fn deriv_norm_ratio_consistent_with_basis() {
        let basis = BesselBasis::build(8, 64).unwrap();
        for n in 1..=8usize {
            let d = synthesize_deriv(&basis, &delta(&basis, n));
            let sq: f64 = basis
                .quad_weights()
                .iter()
                .zip(&d.values)
                .map(|(&w, v)| w * v.norm_sqr())
                .sum();
            let ratio = sq.sqrt() / basis.zero(n);
            assert!((ratio - basis.deriv_norm_ratio(n)).abs() < 1e-12);
            assert!(ratio > 0.3 && ratio < 3.0);
        }
    }

    #[test]
    fn aliasing_of_next_mode_is_small() {
        // analyze e_{N+1} on a basis truncated at N, grid resolving both
        let big = BesselBasis::build(9, 64).unwrap();
        let small = BesselBasis::build(8, 64).unwrap();
        assert_eq!(big.grid_id(), small.grid_id());
        let field = synthesize(&big, &delta(&big, 9));
        let coeffs = analyze(&small, &field).unwrap();
        for (i, c) in coeffs.iter().enumerate() {
            assert!(c.norm() < 1e-8, "mode {} leakage {}", i + 1, c.norm());
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = BesselBasis::build(8, 32).unwrap();
        let b = BesselBasis::build(8, 64).unwrap();
        let field = synthesize(&a, &delta(&a, 1));
        assert!(matches!(
            analyze(&b, &field),
            Err(Error::GridMismatch { .. })
        ));
    }
}
