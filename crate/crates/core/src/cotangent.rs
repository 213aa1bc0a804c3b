//! `T*S^{n−1}` as `{(q, p) ∈ ℝ^{2n} : |q| = 1, q ⊥ p}`, the canonical form
//! `λ = p·dq`, the k-fold Dehn twist, and the mapping-torus models built from
//! it.
//!
//! Ambient coordinates are `(q_1, …, q_n, p_1, …, p_n)` on the fiber and
//! `(t, q, p)` on ℝ × fiber.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{dot, norm, OneForm, Scalar, SmoothMap};
use crate::profile::{Bump, TwistProfile};

/// Tolerance on `||q| − 1|` and `|q·p|` for a valid cotangent point.
pub const COTANGENT_TOL: f64 = 1e-10;
const REPROJECT_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CotangentPoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl CotangentPoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                got: p.len(),
            });
        }
        let pt = Self { q, p };
        let residual = pt.constraint_residual();
        if residual > COTANGENT_TOL {
            return Err(Error::ConstraintViolation { residual });
        }
        Ok(pt)
    }

    pub(crate) fn new_unchecked(q: Vec<f64>, p: Vec<f64>) -> Self {
        Self { q, p }
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn p_norm(&self) -> f64 {
        norm(&self.p)
    }

    pub fn constraint_residual(&self) -> f64 {
        (norm(&self.q) - 1.0).abs().max(dot(&self.q, &self.p).abs())
    }

    /// `(q, p)` as one ambient vector.
    pub fn coords(&self) -> Vec<f64> {
        self.q.iter().chain(&self.p).copied().collect()
    }

    /// Split ambient coordinates, projecting back onto the constraints if
    /// they drifted by more than `1e-12`. Returns the point and the size of
    /// the correction.
    pub fn from_coords(x: &[f64]) -> (Self, f64) {
        let n = x.len() / 2;
        let mut pt = Self::new_unchecked(x[..n].to_vec(), x[n..].to_vec());
        let mut moved = 0.0;
        if pt.constraint_residual() > REPROJECT_THRESHOLD {
            let qn = norm(&pt.q);
            let q: Vec<f64> = pt.q.iter().map(|v| v / qn).collect();
            let d = dot(&q, &pt.p);
            let p: Vec<f64> = pt.p.iter().zip(&q).map(|(a, b)| a - d * b).collect();
            moved = (qn - 1.0).abs().max(d.abs());
            pt = Self::new_unchecked(q, p);
        }
        (pt, moved)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new_unchecked(
            self.q.iter().map(|v| v * s).collect(),
            self.p.iter().map(|v| v * s).collect(),
        )
    }
}

fn split<S: Scalar>(x: &[S]) -> (&[S], &[S]) {
    x.split_at(x.len() / 2)
}

/// Rotate `(q, p)` by `angle` in the frame `(q, p/|p|)`, keeping `|p|`.
fn frame_rotate<S: Scalar>(q: &[S], p: &[S], pn: S, angle: S) -> Vec<S> {
    let (c, s) = (angle.cos(), angle.sin());
    let s_over = s / pn;
    let s_times = s * pn;
    let mut out: Vec<S> = q
        .iter()
        .zip(p)
        .map(|(&qi, &pi)| qi * c + pi * s_over)
        .collect();
    out.extend(q.iter().zip(p).map(|(&qi, &pi)| pi * c - qi * s_times));
    out
}

/// `λ = Σ p_i dq_i` on ℝ^{2n}.
#[derive(Clone, Copy, Debug)]
pub struct LambdaCan {
    pub n: usize,
}

pub fn lambda_can(n: usize) -> LambdaCan {
    LambdaCan { n }
}

impl OneForm for LambdaCan {
    fn dim(&self) -> usize {
        2 * self.n
    }
    fn coefficients<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let (_, p) = split(x);
        let mut c = p.to_vec();
        c.extend(std::iter::repeat_n(S::zero(), self.n));
        c
    }
}

/// `λ + |p| d(f_k(|p|))`, the expected value of `τ_k*λ`.
#[derive(Clone, Copy, Debug)]
pub struct TwistedLambda<'a, B> {
    pub profile: &'a TwistProfile<B>,
    pub n: usize,
}

impl<B: Bump> OneForm for TwistedLambda<'_, B> {
    fn dim(&self) -> usize {
        2 * self.n
    }
    fn coefficients<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let (_, p) = split(x);
        let fp = self.profile.f_k_prime(norm(p));
        let mut c = p.to_vec();
        c.extend(p.iter().map(|&pi| pi * fp));
        c
    }
}

/// `dt + λ` on ℝ^{1+2n}.
#[derive(Clone, Copy, Debug)]
pub struct ContactProduct {
    pub n: usize,
}

impl OneForm for ContactProduct {
    fn dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn coefficients<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let mut c = vec![S::one()];
        c.extend_from_slice(&x[1 + self.n..]);
        c.extend(std::iter::repeat_n(S::zero(), self.n));
        c
    }
}

/// `β_k = h_k(|p|) dt − t|p| d(f_k(|p|)) + λ` on ℝ^{1+2n}.
#[derive(Clone, Copy, Debug)]
pub struct BetaK<'a, B> {
    pub profile: &'a TwistProfile<B>,
    pub n: usize,
}

pub fn beta_k<B: Bump>(profile: &TwistProfile<B>, n: usize) -> BetaK<'_, B> {
    BetaK { profile, n }
}

impl<B: Bump> OneForm for BetaK<'_, B> {
    fn dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn coefficients<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let t = x[0];
        let p = &x[1 + self.n..];
        let pn = norm(p);
        let fp = self.profile.f_k_prime(pn);
        let mut c = vec![self.profile.h_k(pn)];
        c.extend_from_slice(p);
        c.extend(p.iter().map(|&pi| -(t * fp * pi)));
        c
    }
}

/// `(1 + I(|p|)) dt + λ`, the expected value of `Ψ_k*β_k`.
#[derive(Clone, Copy, Debug)]
pub struct PsiPullbackTarget<'a, B> {
    pub profile: &'a TwistProfile<B>,
    pub n: usize,
}

impl<B: Bump> OneForm for PsiPullbackTarget<'_, B> {
    fn dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn coefficients<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let p = &x[1 + self.n..];
        let mut c = vec![self.profile.integral_s(norm(p)) + 1.0];
        c.extend_from_slice(p);
        c.extend(std::iter::repeat_n(S::zero(), self.n));
        c
    }
}

/// `τ_k` (or its inverse) on ℝ^{2n}.
#[derive(Clone, Copy, Debug)]
pub struct DehnTwist<'a, B> {
    pub profile: &'a TwistProfile<B>,
    pub n: usize,
    pub inverse: bool,
}

impl<'a, B: Bump> DehnTwist<'a, B> {
    pub fn new(profile: &'a TwistProfile<B>, n: usize) -> Self {
        Self {
            profile,
            n,
            inverse: false,
        }
    }

    pub fn inverse(profile: &'a TwistProfile<B>, n: usize) -> Self {
        Self {
            profile,
            n,
            inverse: true,
        }
    }

    fn twist<S: Scalar>(&self, q: &[S], p: &[S]) -> Vec<S> {
        let pn = norm(p);
        if pn.value() <= self.profile.transition().0 {
            let s = self.profile.parity();
            return q.iter().chain(p).map(|&v| v * s).collect();
        }
        let g = self.profile.f_k(pn) + self.profile.kpi();
        let angle = if self.inverse { -g } else { g };
        frame_rotate(q, p, pn, angle)
    }
}

impl<B: Bump> SmoothMap for DehnTwist<'_, B> {
    fn domain_dim(&self) -> usize {
        2 * self.n
    }
    fn codomain_dim(&self) -> usize {
        2 * self.n
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let (q, p) = split(x);
        self.twist(q, p)
    }
}

pub fn dehn_twist<B: Bump>(profile: &TwistProfile<B>, pt: &CotangentPoint) -> CotangentPoint {
    CotangentPoint::from_coords(&DehnTwist::new(profile, pt.n()).apply(&pt.coords())).0
}

pub fn dehn_twist_inverse<B: Bump>(
    profile: &TwistProfile<B>,
    pt: &CotangentPoint,
) -> CotangentPoint {
    CotangentPoint::from_coords(&DehnTwist::inverse(profile, pt.n()).apply(&pt.coords())).0
}

/// `φ_k(t; q, p) = (t + h_k(|p|); τ_k(q, p))`.
#[derive(Clone, Copy, Debug)]
pub struct GlueMap<'a, B> {
    pub profile: &'a TwistProfile<B>,
    pub n: usize,
}

impl<B: Bump> SmoothMap for GlueMap<'_, B> {
    fn domain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn codomain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let (q, p) = split(&x[1..]);
        let mut out = vec![x[0] + self.profile.h_k(norm(p))];
        out.extend(DehnTwist::new(self.profile, self.n).twist(q, p));
        out
    }
}

pub fn phi_k_glue<B: Bump>(
    profile: &TwistProfile<B>,
    t: f64,
    pt: &CotangentPoint,
) -> (f64, CotangentPoint) {
    let x: Vec<f64> = std::iter::once(t).chain(pt.coords()).collect();
    let y = GlueMap { profile, n: pt.n() }.apply(&x);
    (y[0], CotangentPoint::from_coords(&y[1..]).0)
}

/// `(t; q, p) ↦ (h_k(|p|) t; q, p)`, from the `∼_k` torus to the `φ_k` torus.
#[derive(Clone, Copy, Debug)]
pub struct Reparametrize<'a, B> {
    pub profile: &'a TwistProfile<B>,
    pub n: usize,
}

impl<B: Bump> SmoothMap for Reparametrize<'_, B> {
    fn domain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn codomain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let p = &x[1 + self.n..];
        let mut out = vec![x[0] * self.profile.h_k(norm(p))];
        out.extend_from_slice(&x[1..]);
        out
    }
}

/// `Ψ_k` from `M_k` to the `∼_k` torus (or its inverse): rotation by
/// `±t f_k(|p|)` in the frame `(q, p/|p|)`.
#[derive(Clone, Copy, Debug)]
pub struct Psi<'a, B> {
    pub profile: &'a TwistProfile<B>,
    pub n: usize,
    pub inverse: bool,
}

impl<B: Bump> SmoothMap for Psi<'_, B> {
    fn domain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn codomain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let t = x[0];
        let (q, p) = split(&x[1..]);
        let pn = norm(p);
        if pn.value() <= self.profile.transition().0 {
            return x.to_vec();
        }
        let a = t * self.profile.f_k(pn);
        let angle = if self.inverse { -a } else { a };
        let mut out = vec![t];
        out.extend(frame_rotate(q, p, pn, angle));
        out
    }
}

/// `(t; q, p) ↦ (t + 1; τ_k(q, p))`, the deck map of the `∼_k` torus.
#[derive(Clone, Copy, Debug)]
pub struct TwistDeck<'a, B> {
    pub profile: &'a TwistProfile<B>,
    pub n: usize,
}

impl<B: Bump> SmoothMap for TwistDeck<'_, B> {
    fn domain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn codomain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let mut out = vec![x[0] + 1.0];
        out.extend(DehnTwist::new(self.profile, self.n).eval(&x[1..]));
        out
    }
}

/// `σ_k(t, q, p) = (t + 1, (−1)^k q, (−1)^k p)`.
#[derive(Clone, Copy, Debug)]
pub struct Sigma {
    pub n: usize,
    pub k: u32,
}

impl SmoothMap for Sigma {
    fn domain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn codomain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let s = if self.k % 2 == 0 { 1.0 } else { -1.0 };
        let mut out = vec![x[0] + 1.0];
        out.extend(x[1..].iter().map(|&v| v * s));
        out
    }
}

/// `|q|² − 1` and `q·p` on ℝ^{2n}.
#[derive(Clone, Copy, Debug)]
pub struct CotangentConstraints {
    pub n: usize,
}

impl SmoothMap for CotangentConstraints {
    fn domain_dim(&self) -> usize {
        2 * self.n
    }
    fn codomain_dim(&self) -> usize {
        2
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let (q, p) = split(x);
        vec![dot(q, q) - 1.0, dot(q, p)]
    }
}

/// `|q|² − 1` and `q·p` on ℝ^{1+2n}; the `t` coordinate is free.
#[derive(Clone, Copy, Debug)]
pub struct TorusConstraints {
    pub n: usize,
}

impl SmoothMap for TorusConstraints {
    fn domain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn codomain_dim(&self) -> usize {
        2
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        CotangentConstraints { n: self.n }.eval(&x[1..])
    }
}

/// The sphere bundle `S_c T*S^{n−1}`: cotangent constraints and `|p|² = c²`.
#[derive(Clone, Copy, Debug)]
pub struct SphereBundleConstraints {
    pub n: usize,
    pub radius: f64,
}

impl SmoothMap for SphereBundleConstraints {
    fn domain_dim(&self) -> usize {
        2 * self.n
    }
    fn codomain_dim(&self) -> usize {
        3
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let (q, p) = split(x);
        vec![
            dot(q, q) - 1.0,
            dot(q, p),
            dot(p, p) - self.radius * self.radius,
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TorusModel {
    /// `ℝ × T*S^{n−1} / σ_k`
    #[serde(rename = "M")]
    M,
    /// `ℝ × T*S^{n−1} / ∼_k`
    #[serde(rename = "twist")]
    Twist,
    /// `ℝ × T*S^{n−1} / φ_k`
    #[serde(rename = "glued")]
    Glued,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub t: f64,
    #[serde(flatten)]
    pub base: CotangentPoint,
    pub model: TorusModel,
}

impl TorusPoint {
    pub fn new(t: f64, base: CotangentPoint, model: TorusModel) -> Self {
        Self { t, base, model }
    }

    pub fn coords(&self) -> Vec<f64> {
        std::iter::once(self.t).chain(self.base.coords()).collect()
    }

    pub fn from_coords(x: &[f64], model: TorusModel) -> Self {
        Self::new(x[0], CotangentPoint::from_coords(&x[1..]).0, model)
    }
}

/// `Ψ_k(t; q, p)` as a point of the `∼_k` torus.
pub fn psi_k<B: Bump>(profile: &TwistProfile<B>, t: f64, pt: &CotangentPoint) -> TorusPoint {
    let x: Vec<f64> = std::iter::once(t).chain(pt.coords()).collect();
    let y = Psi {
        profile,
        n: pt.n(),
        inverse: false,
    }
    .apply(&x);
    TorusPoint::from_coords(&y, TorusModel::Twist)
}

/// Inverse of [`psi_k`], returning `M_k` coordinates `(t, q, p)`.
pub fn psi_k_inverse<B: Bump>(profile: &TwistProfile<B>, tp: &TorusPoint) -> (f64, CotangentPoint) {
    let y = Psi {
        profile,
        n: tp.base.n(),
        inverse: true,
    }
    .apply(&tp.coords());
    (y[0], CotangentPoint::from_coords(&y[1..]).0)
}

/// Representative of the same class with `t` in the fundamental domain:
/// `[0, 1)` for `M_k` and `∼_k`, `[0, h_k(|p|))` for the `φ_k` torus.
pub fn normalize_torus_point<B: Bump>(profile: &TwistProfile<B>, tp: &TorusPoint) -> TorusPoint {
    let period = match tp.model {
        TorusModel::Glued => profile.h_k(tp.base.p_norm()),
        _ => 1.0,
    };
    let steps = (tp.t / period).floor();
    if steps == 0.0 {
        return tp.clone();
    }
    let mut t = tp.t - steps * period;
    if t >= period {
        t -= period;
    }
    let t = t.max(0.0);
    let count = steps.abs() as u64;
    let base = match tp.model {
        TorusModel::M => {
            if count % 2 == 1 {
                tp.base.scaled(profile.parity())
            } else {
                tp.base.clone()
            }
        }
        TorusModel::Twist | TorusModel::Glued => {
            // (t; x) ∼ (t + 1; τ x): moving t down by one applies τ⁻¹.
            let mut b = tp.base.clone();
            for _ in 0..count {
                b = if steps > 0.0 {
                    dehn_twist_inverse(profile, &b)
                } else {
                    dehn_twist(profile, &b)
                };
            }
            b
        }
    };
    TorusPoint::new(t, base, tp.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{exterior_derivative, pullback, pullback_two, ConstraintManifold, TwoForm};
    use crate::sampling::{combination, cotangent_point, rng_for, stratified_radius};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn lambda_examples() {
        let mut rng = rng_for(1, &[]);
        let pt = cotangent_point(&mut rng, 3, 0.7);
        let x = pt.coords();
        let v: Vec<f64> = pt.p.iter().copied().chain([0.0; 3]).collect();
        assert!((lambda_can(3).eval(&x, &v) - 0.49).abs() < 1e-14);
        let zero = CotangentPoint::new(pt.q.clone(), vec![0.0; 3]).unwrap();
        assert_eq!(lambda_can(3).eval(&zero.coords(), &v), 0.0);
    }

    #[test]
    fn liouville_field_contracts_to_lambda() {
        // ι_{p∂p} dλ = λ
        let d = exterior_derivative(lambda_can(3));
        let mut rng = rng_for(2, &[]);
        let mfd = ConstraintManifold::new(CotangentConstraints { n: 3 });
        for _ in 0..100 {
            let pt = cotangent_point(&mut rng, 3, 1.3);
            let x = pt.coords();
            let nu: Vec<f64> = [0.0; 3].iter().chain(&pt.p).copied().collect();
            let v = combination(&mut rng, &mfd.tangent_basis(&x).unwrap());
            let lhs = d.eval(&x, &nu, &v);
            assert!((lhs - lambda_can(3).eval(&x, &v)).abs() < 1e-10);
        }
    }

    #[test]
    fn twist_branches() {
        let profile = TwistProfile::new(3).unwrap();
        let (a, b) = profile.transition();
        let mut rng = rng_for(3, &[]);
        let small = cotangent_point(&mut rng, 3, 0.5 * a);
        let out = dehn_twist(&profile, &small);
        assert!(close(&out.coords(), &small.scaled(-1.0).coords(), 1e-15));
        let large = cotangent_point(&mut rng, 3, 2.5 * b);
        let out = dehn_twist(&profile, &large);
        assert!(close(&out.coords(), &large.coords(), 1e-12));
        let mid = cotangent_point(&mut rng, 3, 0.5 * (a + b));
        let out = dehn_twist(&profile, &mid);
        assert!((out.p_norm() - mid.p_norm()).abs() < 1e-12);
        assert!(out.constraint_residual() < 1e-12);
    }

    #[test]
    fn twist_round_trip() {
        let profile = TwistProfile::new(2).unwrap();
        let mut rng = rng_for(4, &[]);
        for i in 0..100 {
            let r = stratified_radius(&mut rng, &profile, i);
            let pt = cotangent_point(&mut rng, 4, r);
            let fwd = dehn_twist(&profile, &pt);
            assert!(close(
                &dehn_twist_inverse(&profile, &fwd).coords(),
                &pt.coords(),
                1e-10
            ));
            let back = dehn_twist_inverse(&profile, &pt);
            assert!(close(
                &dehn_twist(&profile, &back).coords(),
                &pt.coords(),
                1e-10
            ));
        }
    }

    #[test]
    fn twist_transforms_lambda() {
        for k in [1, 2, 5] {
            let profile = TwistProfile::new(k).unwrap();
            let n = 3;
            let tau = DehnTwist::new(&profile, n);
            let expected = TwistedLambda {
                profile: &profile,
                n,
            };
            let mfd = ConstraintManifold::new(CotangentConstraints { n });
            let mut rng = rng_for(5, &[u64::from(k)]);
            for i in 0..100 {
                let r = stratified_radius(&mut rng, &profile, i);
                let x = cotangent_point(&mut rng, n, r).coords();
                let v = combination(&mut rng, &mfd.tangent_basis(&x).unwrap());
                let lhs = pullback(&tau, &lambda_can(n), &x, &v).unwrap();
                assert!((lhs - expected.eval(&x, &v)).abs() < 1e-8, "k={k} r={r}");
            }
        }
    }

    #[test]
    fn twist_is_symplectic() {
        let profile = TwistProfile::new(3).unwrap();
        let n = 4;
        let tau = DehnTwist::new(&profile, n);
        let omega = exterior_derivative(lambda_can(n));
        let mfd = ConstraintManifold::new(CotangentConstraints { n });
        let mut rng = rng_for(6, &[]);
        for i in 0..100 {
            let r = stratified_radius(&mut rng, &profile, i);
            let x = cotangent_point(&mut rng, n, r).coords();
            let basis = mfd.tangent_basis(&x).unwrap();
            let (u, v) = (combination(&mut rng, &basis), combination(&mut rng, &basis));
            let lhs = pullback_two(&tau, &omega, &x, &u, &v).unwrap();
            assert!((lhs - omega.eval(&x, &u, &v)).abs() < 1e-8);
        }
    }

    #[test]
    fn glue_examples() {
        let profile = TwistProfile::new(3).unwrap();
        let mut rng = rng_for(7, &[]);
        let zero = cotangent_point(&mut rng, 3, 0.0);
        let (t, out) = phi_k_glue(&profile, 0.25, &zero);
        assert_eq!(t, 1.25);
        assert!(close(
            &out.q,
            &zero.q.iter().map(|v| -v).collect::<Vec<_>>(),
            1e-15
        ));
        let (_, b) = profile.transition();
        let far = cotangent_point(&mut rng, 3, 3.0 * b);
        let (t, _) = phi_k_glue(&profile, 0.0, &far);
        assert!((t - profile.h_k(b)).abs() < 1e-14 && t < 1.0);
    }

    #[test]
    fn beta_at_zero_section() {
        let profile = TwistProfile::new(2).unwrap();
        let beta = beta_k(&profile, 2);
        let x = [0.4, 1.0, 0.0, 0.0, 0.0];
        assert_eq!(beta.eval(&x, &[1.0, 0.0, 0.0, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn psi_examples() {
        let profile = TwistProfile::new(2).unwrap();
        let (a, b) = profile.transition();
        let mut rng = rng_for(8, &[]);
        let pt = cotangent_point(&mut rng, 3, 1.5 * b);
        assert_eq!(psi_k(&profile, 0.0, &pt).base, pt);
        let small = cotangent_point(&mut rng, 3, 0.9 * a);
        assert_eq!(psi_k(&profile, 0.77, &small).base, small);
        // flat region: rotation by −t·kπ
        let t = 0.3;
        let (_, inv) = psi_k_inverse(&profile, &TorusPoint::new(t, pt.clone(), TorusModel::Twist));
        let angle = -t * profile.kpi();
        let pn = pt.p_norm();
        let q: Vec<f64> =
            pt.q.iter()
                .zip(&pt.p)
                .map(|(q, p)| angle.cos() * q + angle.sin() * p / pn)
                .collect();
        assert!(close(&inv.q, &q, 1e-14));
    }

    #[test]
    fn psi_round_trip() {
        let profile = TwistProfile::new(5).unwrap();
        let mut rng = rng_for(9, &[]);
        for i in 0..100 {
            let r = stratified_radius(&mut rng, &profile, i);
            let pt = cotangent_point(&mut rng, 3, r);
            let t = 2.0 * (i as f64 / 100.0) - 0.5;
            let fwd = psi_k(&profile, t, &pt);
            let (t2, back) = psi_k_inverse(&profile, &fwd);
            assert_eq!(t2, t);
            assert!(close(&back.coords(), &pt.coords(), 1e-10));
            assert!((fwd.base.p_norm() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_examples() {
        let profile = TwistProfile::new(3).unwrap();
        let mut rng = rng_for(10, &[]);
        let (a, b) = profile.transition();
        let pt = cotangent_point(&mut rng, 3, 0.5 * (a + b));
        let tp = TorusPoint::new(0.3, pt.clone(), TorusModel::Twist);
        assert_eq!(normalize_torus_point(&profile, &tp), tp);

        let tp = TorusPoint::new(1.3, pt.clone(), TorusModel::Twist);
        let norm1 = normalize_torus_point(&profile, &tp);
        assert!((norm1.t - 0.3).abs() < 1e-15);
        // the representative maps back under the deck transformation
        let fwd = dehn_twist(&profile, &norm1.base);
        assert!(close(&fwd.coords(), &pt.coords(), 1e-12));
        assert_eq!(normalize_torus_point(&profile, &norm1), norm1);

        let tp = TorusPoint::new(2.0, pt.clone(), TorusModel::M);
        let n2 = normalize_torus_point(&profile, &tp);
        assert_eq!(n2.t, 0.0);
        assert_eq!(n2.base, pt);
        let tp = TorusPoint::new(-0.5, pt.clone(), TorusModel::M);
        let n3 = normalize_torus_point(&profile, &tp);
        assert_eq!(n3.t, 0.5);
        assert_eq!(n3.base, pt.scaled(-1.0));
    }

    #[test]
    fn glued_model_normalizes_into_shifted_period() {
        let profile = TwistProfile::new(2).unwrap();
        let mut rng = rng_for(11, &[]);
        let pt = cotangent_point(&mut rng, 3, 1.4 / profile.c_k());
        let tp = TorusPoint::new(3.7, pt.clone(), TorusModel::Glued);
        let norm = normalize_torus_point(&profile, &tp);
        let h = profile.h_k(pt.p_norm());
        assert!(norm.t >= 0.0 && norm.t < h);
        // walk back up with φ_k
        let mut cur = (norm.t, norm.base.clone());
        while cur.0 < tp.t - 1e-9 {
            cur = phi_k_glue(&profile, cur.0, &cur.1);
        }
        assert!((cur.0 - tp.t).abs() < 1e-12);
        assert!(close(&cur.1.coords(), &pt.coords(), 1e-10));
    }

    #[test]
    fn torus_point_json_shape() {
        let tp = TorusPoint::new(
            0.5,
            CotangentPoint::new(vec![1.0, 0.0], vec![0.0, 0.25]).unwrap(),
            TorusModel::Twist,
        );
        let json = serde_json::to_value(&tp).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"t": 0.5, "q": [1.0, 0.0], "p": [0.0, 0.25], "model": "twist"})
        );
        let back: TorusPoint = serde_json::from_value(json).unwrap();
        assert_eq!(back, tp);
    }

    #[test]
    fn invalid_cotangent_point_rejected() {
        assert!(CotangentPoint::new(vec![1.0, 0.0], vec![0.1, 0.0]).is_err());
        assert!(CotangentPoint::new(vec![1.1, 0.0], vec![0.0, 0.0]).is_err());
        assert!(CotangentPoint::new(vec![1.0], vec![0.0, 0.0]).is_err());
    }
}
