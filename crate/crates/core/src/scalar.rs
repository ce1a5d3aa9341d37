//! Scalar abstraction shared by plain evaluation and forward-mode
//! differentiation.
//!
//! Every evaluation routine in the kernel is written once over [`Scalar`];
//! instantiating it with [`Dual`] yields exact directional derivatives of the
//! closed-form exp/log/geodesic formulas.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn value(self) -> f64;
    fn sqrt(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn acosh(self) -> Self;
    fn asinh(self) -> Self;

    fn scale(self, k: f64) -> Self {
        self * Self::from_f64(k)
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn value(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn acosh(self) -> Self {
        f64::acosh(self.max(1.0))
    }
    fn asinh(self) -> Self {
        f64::asinh(self)
    }
}

/// Value together with its gradient with respect to `N` seed directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const N: usize> {
    pub v: f64,
    pub d: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn constant(v: f64) -> Self {
        Self { v, d: [0.0; N] }
    }

    /// The `i`-th seed variable with value `v`.
    pub fn variable(v: f64, i: usize) -> Self {
        let mut d = [0.0; N];
        d[i] = 1.0;
        Self { v, d }
    }

    fn chain(self, v: f64, dv: f64) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x *= dv;
        }
        Self { v, d }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(o.d) {
            *a += b;
        }
        Self { v: self.v + o.v, d }
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(o.d) {
            *a -= b;
        }
        Self { v: self.v - o.v, d }
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut d = [0.0; N];
        for (i, x) in d.iter_mut().enumerate() {
            *x = self.d[i] * o.v + self.v * o.d[i];
        }
        Self { v: self.v * o.v, d }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.v;
        let mut d = [0.0; N];
        for (i, x) in d.iter_mut().enumerate() {
            *x = (self.d[i] * o.v - self.v * o.d[i]) * inv * inv;
        }
        Self { v: self.v * inv, d }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x = -*x;
        }
        Self { v: -self.v, d }
    }
}

impl<const N: usize> Scalar for Dual<N> {
    fn from_f64(x: f64) -> Self {
        Self::constant(x)
    }
    fn value(self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let ds = if s > 0.0 { 0.5 / s } else { 0.0 };
        self.chain(s, ds)
    }
    fn sinh(self) -> Self {
        self.chain(self.v.sinh(), self.v.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.v.cosh(), self.v.sinh())
    }
    fn acosh(self) -> Self {
        let x = self.v.max(1.0);
        let den = (x * x - 1.0).sqrt();
        let dv = if den > 0.0 { 1.0 / den } else { 0.0 };
        self.chain(x.acosh(), dv)
    }
    fn asinh(self) -> Self {
        self.chain(self.v.asinh(), 1.0 / (1.0 + self.v * self.v).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_matches_closed_form_derivatives() {
        let x = Dual::<1>::variable(0.7, 0);
        let y = (x.sinh() * x.cosh()) / (x * x + Dual::constant(1.0));
        let f = |t: f64| t.sinh() * t.cosh() / (t * t + 1.0);
        let h = 1e-6;
        let fd = (f(0.7 + h) - f(0.7 - h)) / (2.0 * h);
        assert!((y.d[0] - fd).abs() < 1e-8);
        let z = Dual::<1>::variable(2.5, 0).acosh();
        assert!((z.d[0] - 1.0 / (2.5f64 * 2.5 - 1.0).sqrt()).abs() < 1e-14);
    }
}
