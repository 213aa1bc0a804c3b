//! Pages of the open book on `W`: the embedding `Φ_k` of the mapping torus
//! `M_k`, the rescaling `S_k`, the composite `C_k = Φ_k ∘ S_k⁻¹ ∘ Ψ_k⁻¹`, and
//! the checks that `α_k` is supported by the open book `(B, θ)`.

use nalgebra::Complex;
use rand::Rng;
use rayon::prelude::*;

use crate::brieskorn::{
    alpha_k, defect, sample_binding_with, AmbientPoint, BindingConstraints, BrieskornParams,
    PageConstraints, BINDING_TOL, DEFECT_TOL,
};
use crate::cotangent::{
    lambda_can, CotangentPoint, Psi, SphereBundleConstraints, TorusModel, TorusPoint,
};
use crate::error::{Error, Result};
use crate::forms::scalar::derivative;
use crate::forms::{
    contact_volume, dot, exterior_derivative, norm, power_wedge, symplectic_determinant, Compose,
    ConstraintManifold, OneForm, Scalar, SmoothMap, TwoForm, Univariate,
};
use crate::profile::{monotone_invert, Bump, TwistProfile};
use crate::report::{max_err, CheckReport, CheckResult};
use crate::sampling::{cotangent_point, label, rng_for, stratified_radius};

/// `F²` as a polynomial in `s = r²`: `((2 − s) + Σ_{j<k} (1 − s)^j) / 2`.
/// Equal to the quotient `(2 − (1−s)² − (1−s)^k) / (2s)` without the `0/0`.
fn f_sq<S: Scalar>(k: u32, s: S) -> S {
    let u = S::one() - s;
    let mut geometric = S::zero();
    for _ in 0..k {
        geometric = geometric * u + 1.0;
    }
    (S::cst(2.0) - s + geometric) * 0.5
}

fn g_sq<S: Scalar>(k: u32, s: S) -> S {
    let u = S::one() - s;
    (S::cst(2.0) - u * u + u.powi(k as i32)) * 0.5
}

/// `(F, G)` as functions of `s = |p|²`.
pub fn fg_of_sq<S: Scalar>(k: u32, s: S) -> (S, S) {
    (f_sq(k, s).sqrt(), g_sq(k, s).sqrt())
}

fn check_disk(r: f64) -> Result<()> {
    if r < 0.0 {
        return Err(Error::NegativeArgument(r));
    }
    if !(r < 1.0) {
        return Err(Error::OutsideDiskBundle(r));
    }
    Ok(())
}

pub fn f_cap(k: u32, r: f64) -> Result<f64> {
    check_disk(r)?;
    Ok(f_sq(k, r * r).sqrt())
}

pub fn g_cap(k: u32, r: f64) -> Result<f64> {
    check_disk(r)?;
    Ok(g_sq(k, r * r).sqrt())
}

/// `m(r) = r F(r) G(r) / (kπ)`, the left side of the rescaling equation.
pub fn page_radius_map<S: Scalar>(k: u32, r: S) -> S {
    let (f, g) = fg_of_sq(k, r * r);
    r * f * g / (f64::from(k) * std::f64::consts::PI)
}

/// `Φ_k(t, q, p) = (e^{2πit}(1 − |p|²), e^{πikt}(F p + i G q))`, interleaved.
#[derive(Clone, Copy, Debug)]
pub struct PhiEmbed {
    pub params: BrieskornParams,
}

impl SmoothMap for PhiEmbed {
    fn domain_dim(&self) -> usize {
        1 + 2 * self.params.n
    }
    fn codomain_dim(&self) -> usize {
        self.params.ambient_dim()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.params.n;
        let k = self.params.k;
        let t = x[0];
        let (q, p) = x[1..].split_at(n);
        let s = dot(p, p);
        let (f, g) = fg_of_sq(k, s);
        let a0 = t * (2.0 * std::f64::consts::PI);
        let r0 = S::one() - s;
        let mut out = vec![r0 * a0.cos(), r0 * a0.sin()];
        let a = t * (std::f64::consts::PI * f64::from(k));
        let (c, si) = (a.cos(), a.sin());
        for (&qj, &pj) in q.iter().zip(p) {
            let (re, im) = (f * pj, g * qj);
            out.push(re * c - im * si);
            out.push(re * si + im * c);
        }
        out
    }
}

pub fn phi_embed(params: &BrieskornParams, t: f64, pt: &CotangentPoint) -> Result<AmbientPoint> {
    if pt.n() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            got: pt.n(),
        });
    }
    check_disk(pt.p_norm())?;
    let x: Vec<f64> = std::iter::once(t).chain(pt.coords()).collect();
    Ok(AmbientPoint(PhiEmbed { params: *params }.apply(&x)))
}

/// `ρ ↦ r` with `m(r) = h(ρ)`: the page radius over a torus radius.
struct PageRadius<'a, B> {
    profile: &'a TwistProfile<B>,
}

impl<B: Bump> Univariate for PageRadius<'_, B> {
    fn value(&self, rho: f64) -> f64 {
        page_radius(self.profile, rho).unwrap_or(f64::NAN)
    }
    fn derivative<S: Scalar>(&self, rho: S) -> S {
        let r = rho.lift(self);
        let k = self.profile.k();
        let dm = derivative(|x| page_radius_map(k, x), r);
        self.profile.h_aux_prime(rho) / dm
    }
}

/// Solve `r F(r) G(r)/(kπ) = h(ρ)` for `r ∈ [0, 1)` by bisection.
pub fn page_radius<B: Bump>(profile: &TwistProfile<B>, rho: f64) -> Result<f64> {
    if rho < 0.0 {
        return Err(Error::NegativeArgument(rho));
    }
    let k = profile.k();
    let target = profile.h_aux(rho);
    let r = monotone_invert(|r| page_radius_map(k, r), target, 0.0, 1.0)?;
    Ok(r.min(1.0 - f64::EPSILON))
}

/// `g(r) = h⁻¹(r F(r) G(r)/(kπ))`.
pub fn rescale_radius<B: Bump>(profile: &TwistProfile<B>, r: f64) -> Result<f64> {
    check_disk(r)?;
    profile.h_aux_inverse(page_radius_map(profile.k(), r))
}

/// `S_k(t, q, p) = (t, q, (g(|p|)/|p|) p)` from the disk bundle to all of
/// `T*S^{n−1}`, using `g/r = (1 + I(g)) F G / (kπ)`.
#[derive(Clone, Copy, Debug)]
pub struct SRescale<'a, B> {
    pub profile: &'a TwistProfile<B>,
    pub n: usize,
}

impl<B: Bump> SmoothMap for SRescale<'_, B> {
    fn domain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn codomain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let k = self.profile.k();
        let p = &x[1 + self.n..];
        let r = norm(p);
        let g = self.profile.h_aux_inverse_s(page_radius_map(k, r));
        let (f, gc) = fg_of_sq(k, r * r);
        let ratio = (self.profile.integral_s(g) + 1.0) * f * gc / self.profile.kpi();
        let mut out = x[..=self.n].to_vec();
        out.extend(p.iter().map(|&v| v * ratio));
        out
    }
}

/// `S_k⁻¹`, using `r/ρ = kπ / ((1 + I(ρ)) F(r) G(r))`.
#[derive(Clone, Copy, Debug)]
pub struct SRescaleInverse<'a, B> {
    pub profile: &'a TwistProfile<B>,
    pub n: usize,
}

impl<B: Bump> SmoothMap for SRescaleInverse<'_, B> {
    fn domain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn codomain_dim(&self) -> usize {
        1 + 2 * self.n
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let k = self.profile.k();
        let p = &x[1 + self.n..];
        let rho = norm(p);
        let r = rho.lift(&PageRadius {
            profile: self.profile,
        });
        let (f, g) = fg_of_sq(k, r * r);
        let ratio = S::cst(self.profile.kpi()) / ((self.profile.integral_s(rho) + 1.0) * f * g);
        let mut out = x[..=self.n].to_vec();
        out.extend(p.iter().map(|&v| v * ratio));
        out
    }
}

fn with_t(t: f64, pt: &CotangentPoint) -> Vec<f64> {
    std::iter::once(t).chain(pt.coords()).collect()
}

pub fn s_rescale<B: Bump>(
    profile: &TwistProfile<B>,
    t: f64,
    pt: &CotangentPoint,
) -> Result<(f64, CotangentPoint)> {
    check_disk(pt.p_norm())?;
    let y = SRescale { profile, n: pt.n() }.apply(&with_t(t, pt));
    Ok((y[0], CotangentPoint::from_coords(&y[1..]).0))
}

pub fn s_rescale_inverse<B: Bump>(
    profile: &TwistProfile<B>,
    t: f64,
    pt: &CotangentPoint,
) -> Result<(f64, CotangentPoint)> {
    page_radius(profile, pt.p_norm())?;
    let y = SRescaleInverse { profile, n: pt.n() }.apply(&with_t(t, pt));
    Ok((y[0], CotangentPoint::from_coords(&y[1..]).0))
}

/// `C_k = Φ_k ∘ S_k⁻¹ ∘ Ψ_k⁻¹` on `(t, q, p)` coordinates of the `∼_k` torus.
pub type CMap<'a, B> = Compose<Compose<Psi<'a, B>, SRescaleInverse<'a, B>>, PhiEmbed>;

pub fn c_map_of<'a, B: Bump>(
    params: &BrieskornParams,
    profile: &'a TwistProfile<B>,
) -> CMap<'a, B> {
    let n = params.n;
    Compose::new(
        Compose::new(
            Psi {
                profile,
                n,
                inverse: true,
            },
            SRescaleInverse { profile, n },
        ),
        PhiEmbed { params: *params },
    )
}

fn check_profile<B: Bump>(params: &BrieskornParams, profile: &TwistProfile<B>) -> Result<()> {
    if params.k != profile.k() {
        return Err(Error::InvalidParams(format!(
            "profile built for k = {} used with k = {}",
            profile.k(),
            params.k
        )));
    }
    Ok(())
}

pub fn c_map<B: Bump>(
    params: &BrieskornParams,
    profile: &TwistProfile<B>,
    tp: &TorusPoint,
) -> Result<AmbientPoint> {
    check_profile(params, profile)?;
    if tp.model != TorusModel::Twist {
        return Err(Error::InvalidParams(
            "C_k expects a point of the twist torus".into(),
        ));
    }
    if tp.base.n() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            got: tp.base.n(),
        });
    }
    let z = AmbientPoint(c_map_of(params, profile).apply(&tp.coords()));
    if z.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::OutOfRange {
            target: tp.base.p_norm(),
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok(z)
}

/// Inverse of [`c_map`] with `t ∈ [0, 1)` read off from `θ(z)`.
///
/// `|z_0| = 1` is attained exactly on the image of the zero section and is
/// accepted; `|z_0| > 1` cannot occur on `W` and is rejected.
pub fn c_map_inverse<B: Bump>(
    params: &BrieskornParams,
    profile: &TwistProfile<B>,
    z: &AmbientPoint,
) -> Result<TorusPoint> {
    check_profile(params, profile)?;
    if z.0.len() != params.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: params.ambient_dim(),
            got: z.0.len(),
        });
    }
    let (d0, d1) = defect(params, z);
    if d0.max(d1) > DEFECT_TOL {
        return Err(Error::ConstraintViolation {
            residual: d0.max(d1),
        });
    }
    let z0 = z.z(0);
    let a = z0.norm();
    if a <= 1e-10 {
        return Err(Error::OnBinding);
    }
    if a > 1.0 + DEFECT_TOL {
        return Err(Error::SingularOrbit(a));
    }
    let mut t = z0.arg() / (2.0 * std::f64::consts::PI);
    if t < 0.0 {
        t += 1.0;
    }
    if t >= 1.0 {
        t = 0.0;
    }
    let s = (1.0 - a).max(0.0);
    let (f, g) = fg_of_sq(params.k, s);
    let rot = Complex::from_polar(1.0, -std::f64::consts::PI * f64::from(params.k) * t);
    let n = params.n;
    let mut coords = vec![0.0; 2 * n];
    for j in 0..n {
        let w = z.z(j + 1) * rot;
        coords[j] = w.im / g;
        coords[n + j] = w.re / f;
    }
    let (mut page, _) = CotangentPoint::from_coords(&coords);
    let pn = page.p_norm();
    if pn >= 1.0 {
        let shrink = (1.0 - f64::EPSILON) / pn;
        page.p.iter_mut().for_each(|v| *v *= shrink);
    }
    let (t, base) = s_rescale(profile, t, &page)?;
    let y = Psi {
        profile,
        n,
        inverse: false,
    }
    .apply(&with_t(t, &base));
    Ok(TorusPoint::from_coords(&y, TorusModel::Twist))
}

/// `4πk dt + 4 F G λ` on `(t, q, p)`, the expected value of `Φ_k*α_k`.
#[derive(Clone, Copy, Debug)]
pub struct PhiPullbackTarget {
    pub params: BrieskornParams,
}

impl OneForm for PhiPullbackTarget {
    fn dim(&self) -> usize {
        1 + 2 * self.params.n
    }
    fn coefficients<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.params.n;
        let p = &x[1 + n..];
        let (f, g) = fg_of_sq(self.params.k, dot(p, p));
        let mut c = vec![S::cst(
            4.0 * std::f64::consts::PI * f64::from(self.params.k),
        )];
        c.extend(p.iter().map(|&v| v * f * g * 4.0));
        c.extend(std::iter::repeat_n(S::zero(), n));
        c
    }
}

/// `μ = 4πk / (1 + I(|p|))`, so that `C_k*α_k = μ β_k`.
pub fn conformal_factor<B: Bump>(profile: &TwistProfile<B>, tp: &TorusPoint) -> f64 {
    4.0 * profile.kpi() / (1.0 + profile.integral(tp.base.p_norm()))
}

/// Largest page radius sampled by the page checks; the orthonormal page
/// frame degenerates as `|p| → 1`, where the page meets the binding.
pub const PAGE_RADIUS_MAX: f64 = 0.95;
/// Lower bound for the page skew-Gram determinant.
pub const PAGE_DET_MIN: f64 = 1e-6;
/// Radii of the sphere bundles used by the orientation check.
pub const ORIENTATION_RADII: [f64; 3] = [0.2, 0.5, 0.9];
pub const PLANARITY_TOL: f64 = 1e-9;
const PLANARITY_FIBER: usize = 8;

fn per_sample<T: Send>(samples: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..samples).into_par_iter().map(f).collect()
}

/// `α_k ∧ (dα_k)^{n−2}` on the binding: nonzero with one sign throughout.
pub fn binding_contact_check(params: &BrieskornParams, samples: usize, seed: u64) -> CheckResult {
    let name = "binding_contact";
    let mfd = ConstraintManifold::new(BindingConstraints { params: *params });
    let alpha = alpha_k(params);
    let vols = per_sample(samples, |i| {
        let mut rng = rng_for(
            seed,
            &[label(name), params.n as u64, u64::from(params.k), i as u64],
        );
        let z = sample_binding_with(params, &mut rng);
        contact_volume(&alpha, &mfd, &z.0).unwrap_or(f64::NAN)
    });
    let reference = vols.first().copied().unwrap_or(f64::NAN).signum();
    let violations = vols
        .iter()
        .filter(|v| !(v.abs() > 1e-12) || v.signum() != reference)
        .count();
    CheckResult::new(name, samples, violations as f64, 0.0)
}

/// A page point `Φ_k(t, q, p)` with `|p| ≤ PAGE_RADIUS_MAX`.
pub fn sample_page_point<R: Rng>(params: &BrieskornParams, rng: &mut R, t: f64) -> AmbientPoint {
    let r = PAGE_RADIUS_MAX * rng.random::<f64>();
    let pt = cotangent_point(rng, params.n, r);
    let x: Vec<f64> = std::iter::once(t).chain(pt.coords()).collect();
    AmbientPoint(PhiEmbed { params: *params }.apply(&x))
}

/// `det [dα_k(e_i, e_j)]` on tangent frames of the page `θ = 1` (and, for
/// every fourth sample, `θ = e^{iπ/3}`). Reports the shortfall below
/// [`PAGE_DET_MIN`].
pub fn page_symplectic_check(params: &BrieskornParams, samples: usize, seed: u64) -> CheckResult {
    let name = "page_symplectic";
    let dalpha = exterior_derivative(alpha_k(params));
    let dets = per_sample(samples, |i| {
        let mut rng = rng_for(
            seed,
            &[label(name), params.n as u64, u64::from(params.k), i as u64],
        );
        let t = if i % 4 == 3 { 1.0 / 6.0 } else { 0.0 };
        let z = sample_page_point(params, &mut rng, t);
        let mfd = ConstraintManifold::new(PageConstraints {
            params: *params,
            angle: 2.0 * std::f64::consts::PI * t,
        });
        symplectic_determinant(&dalpha, &mfd, &z.0).unwrap_or(f64::NAN)
    });
    let shortfall = max_err(dets.iter().map(|d| (PAGE_DET_MIN - d).max(0.0)));
    CheckResult::new(name, samples, shortfall, 0.0)
}

/// Signs of `(dλ)^{n−1}(ν, b…)` and `(λ ∧ (dλ)^{n−2})(b…)` on `S_c T*S^{n−1}`
/// with `ν = p ∂_p`; counts disagreements.
pub fn orientation_check(n: usize, samples: usize, seed: u64) -> CheckResult {
    let name = "orientation";
    let lambda = lambda_can(n);
    let dlambda = exterior_derivative(lambda);
    let bad = per_sample(samples, |i| {
        let c = ORIENTATION_RADII[i % ORIENTATION_RADII.len()];
        let mut rng = rng_for(seed, &[label(name), n as u64, i as u64]);
        let pt = cotangent_point(&mut rng, n, c);
        let x = pt.coords();
        let mfd = ConstraintManifold::new(SphereBundleConstraints { n, radius: c });
        let Ok(basis) = mfd.tangent_basis(&x) else {
            return true;
        };
        let mut nu = vec![0.0; n];
        nu.extend_from_slice(&pt.p);
        let with_nu: Vec<Vec<f64>> = std::iter::once(nu).chain(basis.iter().cloned()).collect();
        let dl = dlambda.freeze(&x);
        let lhs = power_wedge(None, &dl, n - 1, &with_nu);
        let rhs = power_wedge(Some(&lambda.freeze(&x)), &dl, n - 2, &basis);
        match (lhs, rhs) {
            (Ok(a), Ok(b)) => !(a.abs() > 1e-12 && b.abs() > 1e-12 && a.signum() == b.signum()),
            _ => true,
        }
    });
    CheckResult::new(
        name,
        samples,
        bad.iter().filter(|&&b| b).count() as f64,
        0.0,
    )
}

/// `C_k({t} × S_c)` lies in `{z_0 = w_0}`: spread of `z_0` over each fiber.
pub fn planarity_check<B: Bump>(
    params: &BrieskornParams,
    profile: &TwistProfile<B>,
    samples: usize,
    seed: u64,
) -> CheckResult {
    let name = "planarity";
    let cmap = c_map_of(params, profile);
    let spreads = per_sample(samples, |i| {
        let mut rng = rng_for(
            seed,
            &[label(name), params.n as u64, u64::from(params.k), i as u64],
        );
        let t: f64 = rng.random();
        let c = stratified_radius(&mut rng, profile, i);
        let z0s: Vec<Complex<f64>> = (0..PLANARITY_FIBER)
            .map(|_| {
                let pt = cotangent_point(&mut rng, params.n, c);
                let z = AmbientPoint(cmap.apply(&with_t(t, &pt)));
                z.z(0)
            })
            .collect();
        max_err(z0s.iter().map(|z| (z - z0s[0]).norm()))
    });
    CheckResult::new(name, samples, max_err(spreads), PLANARITY_TOL)
}

/// The supporting-open-book checks for one `(n, k)`.
pub fn verify_supporting<B: Bump>(
    params: &BrieskornParams,
    profile: &TwistProfile<B>,
    samples: usize,
    seed: u64,
) -> CheckReport {
    let checks = vec![
        binding_contact_check(params, samples, seed),
        page_symplectic_check(params, samples, seed),
        orientation_check(params.n, samples, seed),
        planarity_check(params, profile, samples, seed),
    ];
    CheckReport::new(params.n, params.k, seed, checks)
}

/// Is `z` off the binding and on `W`?
pub fn is_page_point(params: &BrieskornParams, z: &AmbientPoint) -> bool {
    let (a, b) = defect(params, z);
    a <= DEFECT_TOL && b <= DEFECT_TOL && z.z(0).norm() > BINDING_TOL
}
