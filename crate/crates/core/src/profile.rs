//! Twist profile: the bump `f`, `f_k(x) = kπ f(c_k x)`, its integral, the
//! primitive `h_k`, the auxiliary function `h(y) = y / (1 + ∫₀^y f_k)`, and
//! bracketed inversion of monotone functions.

use std::f64::consts::PI;
use std::io::Write;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::forms::scalar::{derivative, Scalar, Univariate};

/// Nodes of the fixed Gauss–Legendre rule on the transition interval.
pub const QUADRATURE_NODES: usize = 64;
pub const MAX_BISECTIONS: usize = 200;

/// A smooth non-decreasing function, `0` on `(−∞, 1]` and `1` on `[2, ∞)`,
/// with derivative bounded by 2.
pub trait Bump: Send + Sync {
    fn eval<S: Scalar>(&self, x: S) -> S;
}

/// `s(x−1) / (s(x−1) + s(2−x))` with `s(u) = exp(−1/u)` for `u > 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SmoothStep;

impl Bump for SmoothStep {
    fn eval<S: Scalar>(&self, x: S) -> S {
        let v = x.value();
        if v <= 1.0 {
            return S::zero();
        }
        if v >= 2.0 {
            return S::one();
        }
        let a = ((x - 1.0).recip() * -1.0).exp();
        let b = ((-x + 2.0).recip() * -1.0).exp();
        a / (a + b)
    }
}

pub fn base_bump(x: f64) -> f64 {
    SmoothStep.eval(x)
}

pub fn base_bump_deriv(x: f64) -> f64 {
    derivative(|y| SmoothStep.eval(y), x)
}

#[derive(Clone, Debug)]
pub struct TwistProfile<B = SmoothStep> {
    k: u32,
    c_k: f64,
    bump: B,
    quad: GaussLegendre,
    /// `I(2/c_k)`, the start of the linear tail.
    plateau_integral: f64,
}

impl TwistProfile<SmoothStep> {
    /// Profile with the default scale `c_k = 4kπ`.
    pub fn new(k: u32) -> Result<Self> {
        Self::with_scale(k, 4.0 * f64::from(k) * PI)
    }

    pub fn with_scale(k: u32, c_k: f64) -> Result<Self> {
        Self::with_bump(k, c_k, SmoothStep)
    }
}

impl<B: Bump> TwistProfile<B> {
    pub fn with_bump(k: u32, c_k: f64, bump: B) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams(
                "twist multiplicity k must be ≥ 1".into(),
            ));
        }
        let kpi = f64::from(k) * PI;
        if !(c_k > 3.0 * kpi) || !c_k.is_finite() {
            return Err(Error::InvalidParams(format!(
                "scale c_k = {c_k} must exceed 3kπ = {}",
                3.0 * kpi
            )));
        }
        let quad = GaussLegendre::new(NonZeroUsize::new(QUADRATURE_NODES).unwrap());
        let mut profile = Self {
            k,
            c_k,
            bump,
            quad,
            plateau_integral: 0.0,
        };
        let (a, b) = profile.transition();
        profile.plateau_integral = profile.quad.integrate(a, b, |s| profile.f_k(s));
        Ok(profile)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn c_k(&self) -> f64 {
        self.c_k
    }

    pub fn kpi(&self) -> f64 {
        f64::from(self.k) * PI
    }

    /// `(−1)^k`
    pub fn parity(&self) -> f64 {
        if self.k % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Interval `[1/c_k, 2/c_k]` on which `f_k` increases.
    pub fn transition(&self) -> (f64, f64) {
        (1.0 / self.c_k, 2.0 / self.c_k)
    }

    /// Guaranteed lower bound `1 − 3kπ/c_k` for `h_k`.
    pub fn h_k_lower_bound(&self) -> f64 {
        1.0 - 3.0 * self.kpi() / self.c_k
    }

    /// Supremum `1/(kπ)` of `h`, not attained.
    pub fn h_aux_sup(&self) -> f64 {
        1.0 / self.kpi()
    }

    pub fn f_k<S: Scalar>(&self, x: S) -> S {
        self.bump.eval(x * self.c_k) * self.kpi()
    }

    /// `f_k'` at any scalar level.
    pub fn f_k_prime<S: Scalar>(&self, x: S) -> S {
        derivative(|y| self.f_k(y), x)
    }

    pub fn f_k_eval(&self, x: f64) -> Result<f64> {
        non_negative(x)?;
        Ok(self.f_k(x))
    }

    pub fn f_k_deriv(&self, x: f64) -> Result<f64> {
        non_negative(x)?;
        Ok(self.f_k_prime(x))
    }

    /// `I(y) = ∫₀^y f_k(s) ds`: quadrature on the transition interval, exact
    /// linear tail beyond it.
    pub fn integral(&self, y: f64) -> f64 {
        let (a, b) = self.transition();
        if y <= a {
            0.0
        } else if y <= b {
            self.quad.integrate(a, y, |s| self.f_k(s))
        } else {
            self.plateau_integral + self.kpi() * (y - b)
        }
    }

    pub fn f_k_integral(&self, y: f64) -> Result<f64> {
        non_negative(y)?;
        Ok(self.integral(y))
    }

    /// `I` at any scalar level (`I' = f_k`).
    pub fn integral_s<S: Scalar>(&self, y: S) -> S {
        y.lift(&Integral(self))
    }

    /// `h_k(y) = 1 − y f_k(y) + I(y)`.
    pub fn h_k<S: Scalar>(&self, y: S) -> S {
        -(y * self.f_k(y)) + self.integral_s(y) + 1.0
    }

    pub fn h_k_eval(&self, y: f64) -> Result<f64> {
        non_negative(y)?;
        Ok(self.h_k(y))
    }

    /// `h(y) = y / (1 + I(y))`.
    pub fn h_aux<S: Scalar>(&self, y: S) -> S {
        y / (self.integral_s(y) + 1.0)
    }

    pub fn h_aux_eval(&self, y: f64) -> Result<f64> {
        non_negative(y)?;
        Ok(self.h_aux(y))
    }

    /// Closed form `h'(y) = h_k(y) / (1 + I(y))²`.
    pub fn h_aux_prime<S: Scalar>(&self, y: S) -> S {
        let denom = self.integral_s(y) + 1.0;
        self.h_k(y) / (denom * denom)
    }

    /// `h⁻¹(target)` for `target ∈ [0, 1/(kπ))`.
    pub fn h_aux_inverse(&self, target: f64) -> Result<f64> {
        let sup = self.h_aux_sup();
        if !(0.0..sup).contains(&target) || target.is_nan() {
            return Err(Error::OutOfRange {
                target,
                lo: 0.0,
                hi: sup,
            });
        }
        let (_, b) = self.transition();
        let mut hi = b;
        let mut doublings = 0;
        while self.h_aux(hi) < target {
            hi *= 2.0;
            doublings += 1;
            if doublings > 1100 || !hi.is_finite() {
                return Err(Error::OutOfRange {
                    target,
                    lo: 0.0,
                    hi: sup,
                });
            }
        }
        monotone_invert(|y| self.h_aux(y), target, 0.0, hi)
    }

    /// `h⁻¹` at any scalar level.
    pub fn h_aux_inverse_s<S: Scalar>(&self, target: S) -> S {
        target.lift(&HAuxInverse(self))
    }

    /// Rows `y, f_k, I, h_k, h` at each grid point.
    pub fn table(&self, grid: &[f64]) -> Vec<[f64; 5]> {
        grid.iter()
            .map(|&y| [y, self.f_k(y), self.integral(y), self.h_k(y), self.h_aux(y)])
            .collect()
    }

    /// Geometric grid over `[0, 10·(2/c_k)]`, starting with `y = 0`.
    pub fn default_grid(&self, points: usize) -> Vec<f64> {
        let top = 10.0 * self.transition().1;
        geometric_grid(top * 1e-3, top, points)
    }

    /// CSV with header `y,f_k,I,h_k,h_aux`, 17 significant digits.
    pub fn write_table<W: Write>(&self, grid: &[f64], mut out: W) -> Result<()> {
        writeln!(out, "y,f_k,I,h_k,h_aux")?;
        for row in self.table(grid) {
            let cells: Vec<String> = row.iter().map(|&v| format_sig17(v)).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// `0` followed by `points − 1` geometrically spaced values in `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let mut grid = vec![0.0];
    let m = points.saturating_sub(1);
    if m == 1 {
        grid.push(hi);
    } else if m > 1 {
        let ratio = (hi / lo).ln() / (m - 1) as f64;
        grid.extend((0..m).map(|i| lo * (ratio * i as f64).exp()));
        *grid.last_mut().unwrap() = hi;
    }
    grid
}

fn non_negative(x: f64) -> Result<()> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::NegativeArgument(x));
    }
    Ok(())
}

struct Integral<'a, B>(&'a TwistProfile<B>);

impl<B: Bump> Univariate for Integral<'_, B> {
    fn value(&self, x: f64) -> f64 {
        self.0.integral(x)
    }
    fn derivative<S: Scalar>(&self, x: S) -> S {
        self.0.f_k(x)
    }
}

struct HAuxInverse<'a, B>(&'a TwistProfile<B>);

impl<B: Bump> Univariate for HAuxInverse<'_, B> {
    fn value(&self, x: f64) -> f64 {
        self.0.h_aux_inverse(x).unwrap_or(f64::NAN)
    }
    fn derivative<S: Scalar>(&self, x: S) -> S {
        let y = x.lift(self);
        self.0.h_aux_prime(y).recip()
    }
}

/// Solve `f(y) = target` for a non-decreasing `f` on `[lo, hi]` by bisection.
///
/// Fails with [`Error::OutOfRange`] when `target` is outside
/// `[f(lo), f(hi)]` by more than `1e-12·max(1, |target|)`.
pub fn monotone_invert(f: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64) -> Result<f64> {
    let tol = 1e-12 * target.abs().max(1.0);
    let (flo, fhi) = (f(lo), f(hi));
    if target.is_nan() || target < flo - tol || target > fhi + tol {
        return Err(Error::OutOfRange {
            target,
            lo: flo,
            hi: fhi,
        });
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (flo, fhi);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == target {
            return Ok(mid);
        }
        if fm < target {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    Ok(if (fa - target).abs() <= (fb - target).abs() {
        a
    } else {
        b
    })
}

/// `%.17g`-style rendering: 17 significant digits, trailing zeros dropped.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if negative { "-" } else { "" };
    if !(-5..17).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        let tail = if tail.is_empty() {
            String::new()
        } else {
            format!(".{tail}")
        };
        return format!("{sign}{head}{tail}e{exp}");
    }
    if exp >= 0 {
        let int_len = exp as usize + 1;
        if digits.len() <= int_len {
            format!("{sign}{digits}{}", "0".repeat(int_len - digits.len()))
        } else {
            format!("{sign}{}.{}", &digits[..int_len], &digits[int_len..])
        }
    } else {
        format!("{sign}0.{}{digits}", "0".repeat((-exp - 1) as usize))
    }
}
