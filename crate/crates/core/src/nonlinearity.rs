//! Gauge-invariant nonlinearities (V, F) with F = dV/d(conj z) in the
//! Wirtinger sense, d/d(conj z) = (d/dx + i d/dy)/2.
//!
//! Two families, both with sub-quadratic force growth degree alpha < 2:
//!
//! * `smooth_power`:  V = sign * (2/(alpha+2)) [(1+|z|^2)^{(alpha+2)/2} - c0],
//!   F = sign * (1+|z|^2)^{alpha/2} z.  Smooth everywhere.
//! * `pure_power`:    V = sign * (2/(alpha+2)) |z|^{alpha+2},
//!   F = sign * |z|^alpha z.  C^1 away from the origin.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::basis::BesselBasis;
use crate::transform::NodalField;
use crate::{Cplx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityKind {
    SmoothPower,
    PurePower,
}

/// Parameters of the potential.  `sign` is +1 (default) or -1; 0 is
/// tolerated so diagnostics can switch the potential off.
/// `normalize_at_zero` subtracts V(0) so the smooth family also vanishes
/// at the origin.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct NonlinearitySpec<T> {
    pub kind: NonlinearityKind,
    pub alpha: T,
    pub sign: T,
    #[serde(default = "default_true")]
    pub normalize_at_zero: bool,
}

fn default_true() -> bool {
    true
}

impl<T: Real> Default for NonlinearitySpec<T> {
    fn default() -> Self {
        NonlinearitySpec {
            kind: NonlinearityKind::SmoothPower,
            alpha: T::one(),
            sign: T::one(),
            normalize_at_zero: true,
        }
    }
}

impl<T: Real> NonlinearitySpec<T> {
    /// Configuration violations, empty when admissible.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.alpha > T::zero() && self.alpha < T::of(2.0)) {
            v.push(format!(
                "nonlinearity.alpha must lie in (0, 2), got {}",
                self.alpha
            ));
        }
        let s = self.sign;
        if s != T::one() && s != -T::one() && s != T::zero() {
            v.push(format!(
                "nonlinearity.sign must be +1, -1 (or 0 for diagnostics), got {s}"
            ));
        }
        v
    }

    /// base^(p/2) with a sqrt shortcut for the ubiquitous alpha = 1 case;
    /// powf dominates the force evaluation cost otherwise.
    fn half_power(base: T, p: T) -> T {
        if p == T::one() {
            base.sqrt()
        } else if p == T::of(3.0) {
            base * base.sqrt()
        } else {
            base.powf(p * T::of(0.5))
        }
    }

    /// V(z).
    pub fn potential(&self, z: Cplx<T>) -> T {
        let two = T::of(2.0);
        let scale = self.sign * two / (self.alpha + two);
        match self.kind {
            NonlinearityKind::SmoothPower => {
                let c0 = if self.normalize_at_zero {
                    T::one()
                } else {
                    T::zero()
                };
                scale * (Self::half_power(T::one() + z.norm_sqr(), self.alpha + two) - c0)
            }
            NonlinearityKind::PurePower => {
                scale * Self::half_power(z.norm_sqr(), self.alpha + two)
            }
        }
    }

    /// F(z) = dV/d(conj z).
    pub fn force(&self, z: Cplx<T>) -> Cplx<T> {
        let factor = match self.kind {
            NonlinearityKind::SmoothPower => Self::half_power(T::one() + z.norm_sqr(), self.alpha),
            NonlinearityKind::PurePower => Self::half_power(z.norm_sqr(), self.alpha),
        };
        let f = self.sign * factor;
        Complex::new(f * z.re, f * z.im)
    }

    /// F at a whole grid of nodal values, scaled by the quadrature weights:
    /// out = w .* F(u).  Equivalent to mapping `force`, but with the kind
    /// dispatch and the alpha = 1 shortcut hoisted out of the node loop so
    /// the loop body stays branch-free and vectorizes.
    pub fn force_nodes(
        &self,
        u_re: &[T],
        u_im: &[T],
        weights: &[T],
        out_re: &mut [T],
        out_im: &mut [T],
    ) {
        #[inline(always)]
        fn run<T: Real>(
            sign: T,
            u_re: &[T],
            u_im: &[T],
            weights: &[T],
            out_re: &mut [T],
            out_im: &mut [T],
            factor: impl Fn(T) -> T,
        ) {
            for k in 0..u_re.len() {
                let q = u_re[k] * u_re[k] + u_im[k] * u_im[k];
                let t = sign * factor(q) * weights[k];
                out_re[k] = t * u_re[k];
                out_im[k] = t * u_im[k];
            }
        }
        let alpha = self.alpha;
        let one_half = alpha == T::one();
        match (self.kind, one_half) {
            (NonlinearityKind::SmoothPower, true) => {
                run(self.sign, u_re, u_im, weights, out_re, out_im, |q| (T::one() + q).sqrt())
            }
            (NonlinearityKind::SmoothPower, false) => {
                run(self.sign, u_re, u_im, weights, out_re, out_im, |q| {
                    (T::one() + q).powf(alpha * T::of(0.5))
                })
            }
            (NonlinearityKind::PurePower, true) => {
                run(self.sign, u_re, u_im, weights, out_re, out_im, |q| q.sqrt())
            }
            (NonlinearityKind::PurePower, false) => {
                run(self.sign, u_re, u_im, weights, out_re, out_im, |q| {
                    q.powf(alpha * T::of(0.5))
                })
            }
        }
    }

    /// Quadrature approximation of int_0^1 V(u(r)) r dr.
    pub fn potential_integral(&self, basis: &BesselBasis<T>, field: &NodalField<T>) -> T {
        debug_assert_eq!(field.grid_id, basis.grid_id());
        let mut acc = T::zero();
        for (&w, v) in basis.quad_weights().iter().zip(&field.values) {
            acc = acc + w * self.potential(*v);
        }
        acc
    }
}
