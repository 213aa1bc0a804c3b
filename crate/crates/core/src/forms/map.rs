use super::scalar::{Dual, Scalar};
use crate::error::{Error, Result};

/// A smooth map between coordinate spaces, written once over [`Scalar`] so
/// that values and exact directional derivatives come from the same code.
pub trait SmoothMap: Sync {
    fn domain_dim(&self) -> usize;
    fn codomain_dim(&self) -> usize;
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S>;

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.eval(x)
    }
}

impl<M: SmoothMap + ?Sized> SmoothMap for &M {
    fn domain_dim(&self) -> usize {
        (**self).domain_dim()
    }
    fn codomain_dim(&self) -> usize {
        (**self).codomain_dim()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        (**self).eval(x)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Value and pushforward of `direction` at `point`.
pub fn value_and_differential<M: SmoothMap, S: Scalar>(
    map: &M,
    point: &[S],
    direction: &[S],
) -> Result<(Vec<S>, Vec<S>)> {
    check_dim(map.domain_dim(), point.len())?;
    check_dim(map.domain_dim(), direction.len())?;
    let out = map.eval(&Dual::seed(point, direction));
    Ok(out.into_iter().map(|d| (d.re, d.eps)).unzip())
}

pub fn differential<M: SmoothMap>(map: &M, point: &[f64], direction: &[f64]) -> Result<Vec<f64>> {
    value_and_differential(map, point, direction).map(|(_, d)| d)
}

/// Full Jacobian, row-major `codomain × domain`.
pub fn jacobian<M: SmoothMap>(map: &M, point: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = map.domain_dim();
    check_dim(n, point.len())?;
    let mut jac = vec![vec![0.0; n]; map.codomain_dim()];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = differential(map, point, &e)?;
        for (row, v) in jac.iter_mut().zip(col) {
            row[j] = v;
        }
        e[j] = 0.0;
    }
    Ok(jac)
}

/// Finite-difference scheme for cross-checking differentials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdScheme {
    /// Central difference at step `h = 1e-6·max(1, |point|)`; truncation error `O(h²)`.
    Central,
    /// One Richardson step on the central differences at `h` and `h/2`;
    /// truncation error `O(h⁴)`.
    Richardson,
}

fn fd_step(point: &[f64]) -> f64 {
    1e-6 * point.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0)
}

fn central_at<M: SmoothMap>(map: &M, point: &[f64], direction: &[f64], h: f64) -> Vec<f64> {
    let shifted = |s: f64| -> Vec<f64> {
        let x: Vec<f64> = point
            .iter()
            .zip(direction)
            .map(|(a, d)| a + s * d)
            .collect();
        map.apply(&x)
    };
    let plus = shifted(h);
    let minus = shifted(-h);
    plus.iter()
        .zip(&minus)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect()
}

/// Central-difference directional derivative, step `1e-6·max(1, |point|)`.
/// Independent of the dual-number path; used only as a cross-check.
pub fn central_difference<M: SmoothMap>(map: &M, point: &[f64], direction: &[f64]) -> Vec<f64> {
    central_at(map, point, direction, fd_step(point))
}

/// `(4 D(h/2) − D(h)) / 3` for the central difference `D` at the same base step.
pub fn richardson_difference<M: SmoothMap>(map: &M, point: &[f64], direction: &[f64]) -> Vec<f64> {
    let h = fd_step(point);
    let coarse = central_at(map, point, direction, h);
    let fine = central_at(map, point, direction, 0.5 * h);
    coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect()
}

/// Worst `|AD − FD| / max(1, |AD|)` over the output components, with the
/// plain central difference.
pub fn ad_fd_discrepancy<M: SmoothMap>(map: &M, point: &[f64], direction: &[f64]) -> Result<f64> {
    ad_fd_discrepancy_with(map, point, direction, FdScheme::Central)
}

pub fn ad_fd_discrepancy_with<M: SmoothMap>(
    map: &M,
    point: &[f64],
    direction: &[f64],
    scheme: FdScheme,
) -> Result<f64> {
    let ad = differential(map, point, direction)?;
    let fd = match scheme {
        FdScheme::Central => central_difference(map, point, direction),
        FdScheme::Richardson => richardson_difference(map, point, direction),
    };
    Ok(ad
        .iter()
        .zip(&fd)
        .map(|(a, f)| (a - f).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max))
}

/// `outer ∘ inner`.
#[derive(Clone, Debug)]
pub struct Compose<A, B> {
    pub inner: A,
    pub outer: B,
}

impl<A: SmoothMap, B: SmoothMap> Compose<A, B> {
    pub fn new(inner: A, outer: B) -> Self {
        debug_assert_eq!(inner.codomain_dim(), outer.domain_dim());
        Self { inner, outer }
    }
}

impl<A: SmoothMap, B: SmoothMap> SmoothMap for Compose<A, B> {
    fn domain_dim(&self) -> usize {
        self.inner.domain_dim()
    }
    fn codomain_dim(&self) -> usize {
        self.outer.codomain_dim()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        self.outer.eval(&self.inner.eval(x))
    }
}

/// `x ↦ A·x` for a row-major matrix.
#[derive(Clone, Debug)]
pub struct LinearMap {
    pub rows: Vec<Vec<f64>>,
}

impl SmoothMap for LinearMap {
    fn domain_dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
    fn codomain_dim(&self) -> usize {
        self.rows.len()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x)
                    .fold(S::zero(), |acc, (&a, &xi)| acc + xi * a)
            })
            .collect()
    }
}

/// A map with constant value.
#[derive(Clone, Debug)]
pub struct ConstantMap {
    pub domain_dim: usize,
    pub value: Vec<f64>,
}

impl SmoothMap for ConstantMap {
    fn domain_dim(&self) -> usize {
        self.domain_dim
    }
    fn codomain_dim(&self) -> usize {
        self.value.len()
    }
    fn eval<S: Scalar>(&self, _x: &[S]) -> Vec<S> {
        self.value.iter().map(|&v| S::cst(v)).collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Identity(pub usize);

impl SmoothMap for Identity {
    fn domain_dim(&self) -> usize {
        self.0
    }
    fn codomain_dim(&self) -> usize {
        self.0
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        x.to_vec()
    }
}
