//! Forward-mode dual arithmetic.
//!
//! Every map and form coefficient in the crate is written once, generically
//! over [`Scalar`]. Evaluating with `f64` gives values; evaluating with
//! [`Dual`] gives values plus the exact directional derivative. `Dual` nests,
//! so `Dual<Dual<f64>>` carries mixed second derivatives, which is what the
//! exterior derivative of a pulled-back form needs.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
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
    /// Real part at the bottom of the nesting.
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    /// Square root with the derivative pinned to zero at the origin.
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn atan2(self, x: Self) -> Self;
    /// Apply a univariate function whose derivative is known in closed form.
    fn lift<U: Univariate + ?Sized>(self, f: &U) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
}

/// A real function of one variable that can be pushed through dual numbers
/// without being written in elementary operations (quadratures, inverses).
pub trait Univariate {
    fn value(&self, x: f64) -> f64;
    fn derivative<S: Scalar>(&self, x: S) -> S;
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    #[inline]
    fn lift<U: Univariate + ?Sized>(self, f: &U) -> Self {
        f.value(self)
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    pub fn constant(re: T) -> Self {
        Self { re, eps: T::zero() }
    }

    pub fn variable(re: T) -> Self {
        Self { re, eps: T::one() }
    }

    /// Seed a point with a tangent direction.
    pub fn seed(point: &[T], direction: &[T]) -> Vec<Self> {
        point
            .iter()
            .zip(direction)
            .map(|(&re, &eps)| Self { re, eps })
            .collect()
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Self::new(q, (self.eps - q * o.eps) / o.re)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> Add<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: f64) -> Self {
        Self::new(self.re + o, self.eps)
    }
}

impl<T: Scalar> Sub<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: f64) -> Self {
        Self::new(self.re - o, self.eps)
    }
}

impl<T: Scalar> Mul<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: f64) -> Self {
        Self::new(self.re * o, self.eps * o)
    }
}

impl<T: Scalar> Div<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: f64) -> Self {
        Self::new(self.re / o, self.eps / o)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn cst(v: f64) -> Self {
        Self::constant(T::cst(v))
    }

    fn value(self) -> f64 {
        self.re.value()
    }

    fn sin(self) -> Self {
        Self::new(self.re.sin(), self.eps * self.re.cos())
    }

    fn cos(self) -> Self {
        Self::new(self.re.cos(), -(self.eps * self.re.sin()))
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        Self::new(e, self.eps * e)
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        if s.value() == 0.0 {
            return Self::new(s, T::zero());
        }
        Self::new(s, self.eps / (s * 2.0))
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        Self::new(
            self.re.powi(n),
            self.eps * self.re.powi(n - 1) * f64::from(n),
        )
    }

    fn atan2(self, x: Self) -> Self {
        let r2 = self.re * self.re + x.re * x.re;
        Self::new(
            self.re.atan2(x.re),
            (x.re * self.eps - self.re * x.eps) / r2,
        )
    }

    fn lift<U: Univariate + ?Sized>(self, f: &U) -> Self {
        Self::new(self.re.lift(f), f.derivative(self.re) * self.eps)
    }
}

/// Derivative of a scalar function of one variable at `x`.
pub fn derivative<S: Scalar>(f: impl Fn(Dual<S>) -> Dual<S>, x: S) -> S {
    f(Dual::variable(x)).eps
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<S: Scalar>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_derivative() {
        let d = derivative(|x| x * x * x, 2.0);
        assert_eq!(d, 12.0);
    }

    #[test]
    fn nested_second_derivative() {
        // d²/dx² sin(x) = -sin(x)
        let x = 0.7;
        let inner = |y: Dual<Dual<f64>>| y.sin();
        let d2 = inner(Dual::new(Dual::variable(x), Dual::constant(1.0)))
            .eps
            .eps;
        assert!((d2 + x.sin()).abs() < 1e-15);
    }

    #[test]
    fn sqrt_at_zero_has_finite_derivative() {
        let s = Dual::new(0.0, 1.0).sqrt();
        assert_eq!(s.re, 0.0);
        assert_eq!(s.eps, 0.0);
    }

    #[test]
    fn atan2_matches_quotient_rule() {
        let y = Dual::new(0.3, 1.0);
        let x = Dual::constant(1.2);
        let a = y.atan2(x);
        let expected = 1.2 / (0.3f64 * 0.3 + 1.2 * 1.2);
        assert!((a.eps - expected).abs() < 1e-15);
    }

    struct Square;
    impl Univariate for Square {
        fn value(&self, x: f64) -> f64 {
            x * x
        }
        fn derivative<S: Scalar>(&self, x: S) -> S {
            x * 2.0
        }
    }

    #[test]
    fn lift_propagates_through_nesting() {
        let x = Dual::new(Dual::variable(3.0), Dual::constant(1.0));
        let y = x.lift(&Square);
        assert_eq!(y.re.re, 9.0);
        assert_eq!(y.eps.re, 6.0);
        assert_eq!(y.eps.eps, 2.0);
    }
}
