//! Forward-mode dual numbers.
//!
//! `Dual<T>` carries a value and one infinitesimal component. Nesting
//! (`Dual<Dual<f64>>`) yields exact second derivatives, which is how the
//! Hessians in this crate are formed. All kernel functions are written
//! against the [`Scalar`] trait so the same code runs on `f64` and on duals.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::Result;

/// Minimal real-number interface shared by `f64` and dual numbers.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    /// The underlying real value.
    fn re(self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    /// Two-argument arctangent with `self` as the ordinate.
    fn atan2(self, x: Self) -> Self;
    fn powf(self, e: f64) -> Self;

    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }

    fn powi2(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn re(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    /// A seeded variable: value `re`, unit tangent.
    pub fn var(re: T) -> Self {
        Dual { re, eps: T::cst(1.0) }
    }

    fn chain(self, value: T, slope: T) -> Self {
        Dual { re: value, eps: self.eps * slope }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.eps * o.re + self.re * o.eps)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        let q = self.re * inv;
        Dual::new(q, (self.eps - q * o.eps) * inv)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> Add<f64> for Dual<T> {
    type Output = Self;
    fn add(self, o: f64) -> Self {
        Dual::new(self.re + o, self.eps)
    }
}

impl<T: Scalar> Sub<f64> for Dual<T> {
    type Output = Self;
    fn sub(self, o: f64) -> Self {
        Dual::new(self.re - o, self.eps)
    }
}

impl<T: Scalar> Mul<f64> for Dual<T> {
    type Output = Self;
    fn mul(self, o: f64) -> Self {
        Dual::new(self.re * o, self.eps * o)
    }
}

impl<T: Scalar> Div<f64> for Dual<T> {
    type Output = Self;
    fn div(self, o: f64) -> Self {
        Dual::new(self.re / o, self.eps / o)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn cst(v: f64) -> Self {
        Dual::new(T::cst(v), T::cst(0.0))
    }
    fn re(self) -> f64 {
        self.re.re()
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, (s * 2.0).recip())
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), self.re.recip())
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn sinh(self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }
    fn atan2(self, x: Self) -> Self {
        let denom = x.re * x.re + self.re * self.re;
        Dual::new(
            self.re.atan2(x.re),
            (x.re * self.eps - self.re * x.eps) / denom,
        )
    }
    fn powf(self, e: f64) -> Self {
        if e == 0.0 {
            return Self::cst(1.0);
        }
        self.chain(self.re.powf(e), self.re.powf(e - 1.0) * e)
    }
}

/// A scalar function of `N` real arguments, evaluable on any [`Scalar`].
pub trait ScalarFn<const N: usize> {
    fn eval<S: Scalar>(&self, x: [S; N]) -> Result<S>;
}

/// Value and gradient by `N` first-order passes.
pub fn gradient<F: ScalarFn<N>, const N: usize>(f: &F, x: [f64; N]) -> Result<(f64, [f64; N])> {
    let mut grad = [0.0; N];
    let mut value = 0.0;
    for (i, g) in grad.iter_mut().enumerate() {
        let args: [Dual<f64>; N] =
            std::array::from_fn(|k| Dual::new(x[k], if k == i { 1.0 } else { 0.0 }));
        let out = f.eval(args)?;
        value = out.re;
        *g = out.eps;
    }
    Ok((value, grad))
}

/// Value, gradient and Hessian by nested duals (one pass per upper-triangle entry).
pub fn hessian<F: ScalarFn<N>, const N: usize>(
    f: &F,
    x: [f64; N],
) -> Result<(f64, [f64; N], [[f64; N]; N])> {
    let mut grad = [0.0; N];
    let mut hess = [[0.0; N]; N];
    let mut value = 0.0;
    for i in 0..N {
        for j in i..N {
            let args: [Dual<Dual<f64>>; N] = std::array::from_fn(|k| {
                let di = if k == i { 1.0 } else { 0.0 };
                let dj = if k == j { 1.0 } else { 0.0 };
                Dual::new(Dual::new(x[k], dj), Dual::new(di, 0.0))
            });
            let out = f.eval(args)?;
            value = out.re.re;
            if i == j {
                grad[i] = out.eps.re;
            }
            hess[i][j] = out.eps.eps;
            hess[j][i] = out.eps.eps;
        }
    }
    Ok((value, grad, hess))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Poly;
    impl ScalarFn<2> for Poly {
        fn eval<S: Scalar>(&self, x: [S; 2]) -> Result<S> {
            // x^2 y + sin(y) * exp(x)
            Ok(x[0] * x[0] * x[1] + x[1].sin() * x[0].exp())
        }
    }

    #[test]
    fn first_derivatives_of_elementary_functions() {
        let x = Dual::var(0.7);
        assert!((x.sqrt().eps - 0.5 / 0.7f64.sqrt()).abs() < 1e-15);
        assert!((x.ln().eps - 1.0 / 0.7).abs() < 1e-15);
        assert!((x.sinh().eps - 0.7f64.cosh()).abs() < 1e-15);
        assert!((x.powf(2.5).eps - 2.5 * 0.7f64.powf(1.5)).abs() < 1e-15);
        let y = Dual::new(0.3, 0.0);
        // d/dx atan2(0.3, x) = -0.3 / (x^2 + 0.09)
        assert!((y.atan2(x).eps + 0.3 / (0.49 + 0.09)).abs() < 1e-15);
    }

    #[test]
    fn nested_duals_give_exact_hessian() {
        let (x, y) = (0.4f64, 1.3f64);
        let (v, g, h) = hessian(&Poly, [x, y]).unwrap();
        assert!((v - (x * x * y + y.sin() * x.exp())).abs() < 1e-15);
        assert!((g[0] - (2.0 * x * y + y.sin() * x.exp())).abs() < 1e-14);
        assert!((g[1] - (x * x + y.cos() * x.exp())).abs() < 1e-14);
        assert!((h[0][0] - (2.0 * y + y.sin() * x.exp())).abs() < 1e-14);
        assert!((h[0][1] - (2.0 * x + y.cos() * x.exp())).abs() < 1e-14);
        assert!((h[1][1] + y.sin() * x.exp()).abs() < 1e-14);
        assert_eq!(h[0][1], h[1][0]);
    }

    #[test]
    fn gradient_matches_hessian_pass() {
        let (_, g1) = gradient(&Poly, [0.2, -0.5]).unwrap();
        let (_, g2, _) = hessian(&Poly, [0.2, -0.5]).unwrap();
        for k in 0..2 {
            assert!((g1[k] - g2[k]).abs() < 1e-15);
        }
    }
}
