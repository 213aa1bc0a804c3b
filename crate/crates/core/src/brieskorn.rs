//! The Brieskorn manifold `W = {z ∈ ℂ^{n+1} : z_0^k + z_1² + … + z_n² = 0,
//! |z|² = 2}`, its contact form, the fibration `z ↦ z_0/|z_0|`, the ℝ- and
//! `SO(n)`-actions, and the binding `{z_0 = 0}`.
//!
//! Ambient coordinates are interleaved: `(x_0, y_0, x_1, y_1, …, x_n, y_n)`.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{OneForm, Scalar, SmoothMap};
use crate::sampling::{gaussian_vec, rng_for};

/// Radius² of the ambient sphere.
pub const SPHERE_RADIUS_SQ: f64 = 2.0;
/// On-manifold gate for both defect residuals.
pub const DEFECT_TOL: f64 = 1e-9;
/// Below this `|z_0|` a point counts as lying on the binding.
pub const BINDING_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrieskornParams {
    pub n: usize,
    pub k: u32,
}

impl BrieskornParams {
    pub fn new(n: usize, k: u32) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(Error::InvalidParams(format!("n = {n} must lie in 2..=4")));
        }
        if k == 0 {
            return Err(Error::InvalidParams("k must be ≥ 1".into()));
        }
        Ok(Self { n, k })
    }

    pub fn ambient_dim(&self) -> usize {
        2 * (self.n + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AmbientPoint(pub Vec<f64>);

impl AmbientPoint {
    pub fn from_complex(z: &[Complex<f64>]) -> Self {
        Self(z.iter().flat_map(|c| [c.re, c.im]).collect())
    }

    pub fn z(&self, j: usize) -> Complex<f64> {
        Complex::new(self.0[2 * j], self.0[2 * j + 1])
    }

    pub fn to_complex(&self) -> Vec<Complex<f64>> {
        (0..self.0.len() / 2).map(|j| self.z(j)).collect()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// `(re, im)` of `z_0^k + Σ z_j²` at any scalar level.
pub fn poly_f_s<S: Scalar>(k: u32, x: &[S]) -> (S, S) {
    let (x0, y0) = (x[0], x[1]);
    let (mut re, mut im) = (S::one(), S::zero());
    for _ in 0..k {
        (re, im) = (re * x0 - im * y0, re * y0 + im * x0);
    }
    for c in x[2..].chunks_exact(2) {
        re = re + c[0] * c[0] - c[1] * c[1];
        im = im + c[0] * c[1] * 2.0;
    }
    (re, im)
}

pub fn poly_f(params: &BrieskornParams, z: &AmbientPoint) -> Complex<f64> {
    let zs = z.to_complex();
    zs[0].powu(params.k) + zs[1..].iter().map(|c| c * c).sum::<Complex<f64>>()
}

/// `z_0^k + |x|² − |y|² + 2i⟨x, y⟩`.
pub fn poly_f_real_form(params: &BrieskornParams, z: &AmbientPoint) -> Complex<f64> {
    let zs = z.to_complex();
    let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
    for c in &zs[1..] {
        xx += c.re * c.re;
        yy += c.im * c.im;
        xy += c.re * c.im;
    }
    zs[0].powu(params.k) + Complex::new(xx - yy, 2.0 * xy)
}

/// `(|f(z)|, ||z|² − 2|)`.
pub fn defect(params: &BrieskornParams, z: &AmbientPoint) -> (f64, f64) {
    let sq: f64 = z.0.iter().map(|v| v * v).sum();
    (poly_f(params, z).norm(), (sq - SPHERE_RADIUS_SQ).abs())
}

pub fn on_manifold(params: &BrieskornParams, z: &AmbientPoint) -> bool {
    let (a, b) = defect(params, z);
    a <= DEFECT_TOL && b <= DEFECT_TOL
}

/// `Re f`, `Im f`, `|z|² − 2`.
#[derive(Clone, Copy, Debug)]
pub struct BrieskornConstraints {
    pub params: BrieskornParams,
}

impl SmoothMap for BrieskornConstraints {
    fn domain_dim(&self) -> usize {
        self.params.ambient_dim()
    }
    fn codomain_dim(&self) -> usize {
        3
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let (re, im) = poly_f_s(self.params.k, x);
        let sq = x.iter().fold(S::zero(), |a, &v| a + v * v);
        vec![re, im, sq - SPHERE_RADIUS_SQ]
    }
}

/// The binding: Brieskorn constraints plus `x_0 = y_0 = 0`.
#[derive(Clone, Copy, Debug)]
pub struct BindingConstraints {
    pub params: BrieskornParams,
}

impl SmoothMap for BindingConstraints {
    fn domain_dim(&self) -> usize {
        self.params.ambient_dim()
    }
    fn codomain_dim(&self) -> usize {
        5
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let mut c = BrieskornConstraints {
            params: self.params,
        }
        .eval(x);
        c.push(x[0]);
        c.push(x[1]);
        c
    }
}

/// The page `θ⁻¹(e^{iφ})`: Brieskorn constraints plus `Im(e^{−iφ} z_0) = 0`.
#[derive(Clone, Copy, Debug)]
pub struct PageConstraints {
    pub params: BrieskornParams,
    pub angle: f64,
}

impl SmoothMap for PageConstraints {
    fn domain_dim(&self) -> usize {
        self.params.ambient_dim()
    }
    fn codomain_dim(&self) -> usize {
        4
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let mut c = BrieskornConstraints {
            params: self.params,
        }
        .eval(x);
        c.push(x[1] * self.angle.cos() - x[0] * self.angle.sin());
        c
    }
}

/// `α_k = k(x_0 dy_0 − y_0 dx_0) + 2 Σ_{j≥1} (x_j dy_j − y_j dx_j)`.
#[derive(Clone, Copy, Debug)]
pub struct AlphaK {
    pub params: BrieskornParams,
}

pub fn alpha_k(params: &BrieskornParams) -> AlphaK {
    AlphaK { params: *params }
}

impl OneForm for AlphaK {
    fn dim(&self) -> usize {
        self.params.ambient_dim()
    }
    fn coefficients<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let mut c = Vec::with_capacity(x.len());
        for (j, pair) in x.chunks_exact(2).enumerate() {
            let w = if j == 0 {
                f64::from(self.params.k)
            } else {
                2.0
            };
            c.push(-(pair[1] * w));
            c.push(pair[0] * w);
        }
        c
    }
}

/// `θ(z) = z_0 / |z_0|`.
pub fn theta(z: &AmbientPoint) -> Result<Complex<f64>> {
    let z0 = z.z(0);
    let r = z0.norm();
    if r <= BINDING_TOL {
        return Err(Error::OnBinding);
    }
    Ok(z0 / r)
}

/// `e^{it}·(z_0, …, z_n) = (e^{it} z_0, e^{ikt/2} z_1, …, e^{ikt/2} z_n)`.
#[derive(Clone, Copy, Debug)]
pub struct RAction {
    pub params: BrieskornParams,
    pub t: f64,
}

fn rotate_pair<S: Scalar>(x: S, y: S, angle: f64) -> [S; 2] {
    let (s, c) = angle.sin_cos();
    [x * c - y * s, x * s + y * c]
}

impl SmoothMap for RAction {
    fn domain_dim(&self) -> usize {
        self.params.ambient_dim()
    }
    fn codomain_dim(&self) -> usize {
        self.params.ambient_dim()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let half = 0.5 * f64::from(self.params.k) * self.t;
        x.chunks_exact(2)
            .enumerate()
            .flat_map(|(j, c)| rotate_pair(c[0], c[1], if j == 0 { self.t } else { half }))
            .collect()
    }
}

pub fn r_action(params: &BrieskornParams, t: f64, z: &AmbientPoint) -> AmbientPoint {
    AmbientPoint(RAction { params: *params, t }.apply(&z.0))
}

/// `A·(z_0, z_1, …, z_n) = (z_0, A·(z_1, …, z_n))` for `A ∈ SO(n)`.
#[derive(Clone, Debug)]
pub struct SoNAction {
    pub matrix: Vec<Vec<f64>>,
}

impl SoNAction {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrix.len();
        if matrix.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidParams("rotation must be square".into()));
        }
        let a = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
        let residual = (a.transpose() * &a - DMatrix::identity(n, n)).abs().max();
        if residual > 1e-10 {
            return Err(Error::NotOrthogonal(residual));
        }
        Ok(Self { matrix })
    }
}

impl SmoothMap for SoNAction {
    fn domain_dim(&self) -> usize {
        2 * (self.matrix.len() + 1)
    }
    fn codomain_dim(&self) -> usize {
        self.domain_dim()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let mut out = vec![x[0], x[1]];
        for row in &self.matrix {
            let (mut re, mut im) = (S::zero(), S::zero());
            for (a, c) in row.iter().zip(x[2..].chunks_exact(2)) {
                re = re + c[0] * *a;
                im = im + c[1] * *a;
            }
            out.push(re);
            out.push(im);
        }
        out
    }
}

pub fn so_n_action(matrix: &[Vec<f64>], z: &AmbientPoint) -> Result<AmbientPoint> {
    let action = SoNAction::new(matrix.to_vec())?;
    if action.domain_dim() != z.0.len() {
        return Err(Error::DimensionMismatch {
            expected: action.domain_dim(),
            got: z.0.len(),
        });
    }
    Ok(AmbientPoint(action.apply(&z.0)))
}

/// A point of the binding orbit: `z_0 = 0`, `(z_1, …, z_n) = u + iv` with
/// `u, v` a random orthonormal pair.
pub fn sample_binding_with<R: Rng>(params: &BrieskornParams, rng: &mut R) -> AmbientPoint {
    let n = params.n;
    loop {
        let u = gaussian_vec(rng, n);
        let mut v = gaussian_vec(rng, n);
        let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if un < 1e-8 {
            continue;
        }
        let u: Vec<f64> = u.iter().map(|x| x / un).collect();
        let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(&u).for_each(|(b, a)| *b -= d * a);
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vn < 1e-8 {
            continue;
        }
        let mut coords = vec![0.0, 0.0];
        for (a, b) in u.iter().zip(&v) {
            coords.push(*a);
            coords.push(b / vn);
        }
        return AmbientPoint(coords);
    }
}

pub fn sample_binding(params: &BrieskornParams, seed: u64) -> AmbientPoint {
    sample_binding_with(
        params,
        &mut rng_for(seed, &[0xb1d, params.n as u64, u64::from(params.k)]),
    )
}

/// Basis of the symplectic normal bundle of the binding at `z`.
///
/// `k ≠ 1`: `(1, 0, …)/√(2k)` and `(i, 0, …)/√(2k)`.
/// `k = 1`: `√(2/5)(1, −z̄_1/4, …, −z̄_n/4)` and `√(2/5)(i, −i z̄_1/4, …)`.
pub fn binding_normal_basis(
    params: &BrieskornParams,
    z: &AmbientPoint,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (d_poly, d_sphere) = defect(params, z);
    let z0_abs = z.z(0).norm();
    let defect = d_poly.max(d_sphere);
    if z0_abs > BINDING_TOL || defect > DEFECT_TOL {
        return Err(Error::OffBinding { z0_abs, defect });
    }
    let zs = z.to_complex();
    let (e1, e2): (Vec<Complex<f64>>, Vec<Complex<f64>>) = if params.k != 1 {
        let s = 1.0 / (2.0 * f64::from(params.k)).sqrt();
        let mut a = vec![Complex::new(0.0, 0.0); zs.len()];
        let mut b = a.clone();
        a[0] = Complex::new(s, 0.0);
        b[0] = Complex::new(0.0, s);
        (a, b)
    } else {
        let s = (2.0f64 / 5.0).sqrt();
        let a: Vec<Complex<f64>> = std::iter::once(Complex::new(s, 0.0))
            .chain(zs[1..].iter().map(|c| -c.conj() * (s / 4.0)))
            .collect();
        let b = a.iter().map(|c| c * Complex::i()).collect();
        (a, b)
    };
    Ok((
        AmbientPoint::from_complex(&e1).0,
        AmbientPoint::from_complex(&e2).0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{differential, exterior_derivative, pullback, ConstraintManifold, TwoForm};
    use crate::sampling::{combination, rotation};
    use std::f64::consts::PI;

    fn standard_binding(n: usize) -> AmbientPoint {
        let mut z = vec![Complex::new(0.0, 0.0); n + 1];
        z[1] = Complex::new(1.0, 0.0);
        z[2] = Complex::new(0.0, 1.0);
        AmbientPoint::from_complex(&z)
    }

    #[test]
    fn params_validation() {
        assert!(BrieskornParams::new(1, 1).is_err());
        assert!(BrieskornParams::new(5, 1).is_err());
        assert!(BrieskornParams::new(3, 0).is_err());
        assert!(BrieskornParams::new(4, 8).is_ok());
    }

    #[test]
    fn poly_examples() {
        for k in [1, 2, 3] {
            let p = BrieskornParams::new(3, k).unwrap();
            assert_eq!(poly_f(&p, &standard_binding(3)), Complex::new(0.0, 0.0));
            let z = AmbientPoint::from_complex(&[
                Complex::new(1.0, 0.0),
                Complex::new(0.0, 1.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
            ]);
            assert!(poly_f(&p, &z).norm() < 1e-15);
        }
    }

    #[test]
    fn poly_two_formulas_agree() {
        let mut rng = rng_for(1, &[]);
        for k in [1, 2, 3, 5, 8] {
            let p = BrieskornParams::new(4, k).unwrap();
            for _ in 0..50 {
                let z = AmbientPoint(gaussian_vec(&mut rng, 10));
                let a = poly_f(&p, &z);
                let b = poly_f_real_form(&p, &z);
                let (re, im) = poly_f_s(k, &z.0);
                assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
                assert!((a - Complex::new(re, im)).norm() <= 1e-12 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn defect_examples() {
        let p = BrieskornParams::new(3, 2).unwrap();
        assert_eq!(defect(&p, &standard_binding(3)), (0.0, 0.0));
        let scaled = AmbientPoint(standard_binding(3).0.iter().map(|v| 2.0 * v).collect());
        let (a, b) = defect(&p, &scaled);
        assert_eq!(a, 0.0);
        assert_eq!(b, 6.0);
        let off = AmbientPoint(vec![1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(defect(&p, &off).0 > 0.0);
    }

    #[test]
    fn alpha_hand_evaluation() {
        let p = BrieskornParams::new(3, 2).unwrap();
        let z = standard_binding(3);
        // (0, i, −1, 0)
        let v = AmbientPoint::from_complex(&[
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 1.0),
            Complex::new(-1.0, 0.0),
            Complex::new(0.0, 0.0),
        ]);
        assert!((alpha_k(&p).eval(&z.0, &v.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn alpha_is_rotation_invariant() {
        let mut rng = rng_for(2, &[]);
        for n in 2..=4 {
            let p = BrieskornParams::new(n, 3).unwrap();
            let a = SoNAction::new(rotation(&mut rng, n)).unwrap();
            for _ in 0..20 {
                let x = gaussian_vec(&mut rng, p.ambient_dim());
                let v = gaussian_vec(&mut rng, p.ambient_dim());
                let lhs = pullback(&a, &alpha_k(&p), &x, &v).unwrap();
                assert!((lhs - alpha_k(&p).eval(&x, &v)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn d_alpha_is_constant() {
        let p = BrieskornParams::new(3, 5).unwrap();
        let d = exterior_derivative(alpha_k(&p));
        let mut rng = rng_for(3, &[]);
        let reference = d.matrix(&gaussian_vec(&mut rng, 8));
        for _ in 0..10 {
            let m = d.matrix(&gaussian_vec(&mut rng, 8));
            let spread = m
                .iter()
                .flatten()
                .zip(reference.iter().flatten())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(spread <= 1e-12);
        }
        // dα = 2k dx0∧dy0 + 4 Σ dxj∧dyj
        assert_eq!(reference[0][1], 10.0);
        assert_eq!(reference[2][3], 4.0);
        assert_eq!(reference[3][2], -4.0);
    }

    #[test]
    fn theta_examples() {
        let z = AmbientPoint::from_complex(&[
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 1.0),
            Complex::new(0.0, 0.0),
        ]);
        assert_eq!(theta(&z).unwrap(), Complex::new(1.0, 0.0));
        assert!(matches!(theta(&standard_binding(2)), Err(Error::OnBinding)));
        let p = BrieskornParams::new(2, 3).unwrap();
        let t = 0.9;
        let moved = theta(&r_action(&p, t, &z)).unwrap();
        assert!((moved - Complex::from_polar(1.0, t)).norm() < 1e-10);
    }

    #[test]
    fn r_action_periodicity() {
        let mut rng = rng_for(4, &[]);
        for k in [2, 3] {
            let p = BrieskornParams::new(3, k).unwrap();
            let z = sample_binding_with(&p, &mut rng);
            let z = AmbientPoint(
                z.0.iter()
                    .enumerate()
                    .map(|(i, v)| if i < 2 { 0.0 } else { *v })
                    .collect(),
            );
            assert_eq!(r_action(&p, 0.0, &z), z);
            let w = r_action(&p, 2.0 * PI, &z);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            for (i, (a, b)) in w.0.iter().zip(&z.0).enumerate() {
                let expected = if i < 2 { *b } else { sign * b };
                assert!((a - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn so_n_action_checks() {
        let p = BrieskornParams::new(3, 2).unwrap();
        let z = sample_binding(&p, 9);
        let id = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert_eq!(so_n_action(&id, &z).unwrap(), z);
        let bad = vec![
            vec![1.0, 0.1, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert!(matches!(
            so_n_action(&bad, &z),
            Err(Error::NotOrthogonal(_))
        ));
        let mut rng = rng_for(5, &[]);
        let a = rotation(&mut rng, 3);
        let w = so_n_action(&a, &z).unwrap();
        let (d0, d1) = defect(&p, &w);
        assert!(d0 <= 1e-10 && d1 <= 1e-10);
        assert!((poly_f(&p, &w) - poly_f(&p, &z)).norm() <= 1e-12);
    }

    #[test]
    fn binding_samples() {
        let p = BrieskornParams::new(4, 3).unwrap();
        let a = sample_binding(&p, 17);
        assert_eq!(a, sample_binding(&p, 17));
        let (d0, d1) = defect(&p, &a);
        assert!(d0 <= 1e-12 && d1 <= 1e-12);
        assert!(theta(&a).is_err());
    }

    fn normal_basis_residuals(p: &BrieskornParams, z: &AmbientPoint) -> (f64, f64) {
        let (e1, e2) = binding_normal_basis(p, z).unwrap();
        let cons = BrieskornConstraints { params: *p };
        let alpha = alpha_k(p);
        let dalpha = exterior_derivative(alpha);
        let tb = ConstraintManifold::new(BindingConstraints { params: *p })
            .tangent_basis(&z.0)
            .unwrap();
        let mut worst: f64 = 0.0;
        for e in [&e1, &e2] {
            for c in differential(&cons, &z.0, e).unwrap() {
                worst = worst.max(c.abs());
            }
            worst = worst.max(alpha.eval(&z.0, e).abs());
            for w in &tb {
                worst = worst.max(dalpha.eval(&z.0, e, w).abs());
            }
        }
        (worst, dalpha.eval(&z.0, &e1, &e2))
    }

    #[test]
    fn normal_basis_k2_hand_values() {
        let p = BrieskornParams::new(3, 2).unwrap();
        let z = standard_binding(3);
        let (e1, _) = binding_normal_basis(&p, &z).unwrap();
        let df = differential(&BrieskornConstraints { params: p }, &z.0, &e1).unwrap();
        assert!(df[0].abs() < 1e-15 && df[1].abs() < 1e-15);
        let (worst, omega) = normal_basis_residuals(&p, &z);
        assert!(worst < 1e-10);
        assert!((omega - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normal_basis_k1() {
        for n in 2..=4 {
            let p = BrieskornParams::new(n, 1).unwrap();
            for seed in 0..10 {
                let z = sample_binding(&p, seed);
                let (worst, omega) = normal_basis_residuals(&p, &z);
                assert!(worst < 1e-10, "n={n} residual {worst}");
                assert!(omega > 0.0);
                // measured normalization of the k = 1 pair
                assert!((omega - 1.0).abs() < 1e-12, "dα(e1,e2) = {omega}");
            }
        }
    }

    #[test]
    fn normal_basis_rejects_off_binding() {
        let p = BrieskornParams::new(2, 2).unwrap();
        let z = AmbientPoint::from_complex(&[
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 1.0),
            Complex::new(0.0, 0.0),
        ]);
        assert!(matches!(
            binding_normal_basis(&p, &z),
            Err(Error::OffBinding { .. })
        ));
    }

    #[test]
    fn binding_tangent_dimension() {
        for n in 2..=4 {
            let p = BrieskornParams::new(n, 2).unwrap();
            let z = standard_binding(n);
            let w = ConstraintManifold::new(BrieskornConstraints { params: p });
            assert_eq!(w.tangent_basis(&z.0).unwrap().len(), 2 * n - 1);
            let b = ConstraintManifold::new(BindingConstraints { params: p });
            let basis = b.tangent_basis(&z.0).unwrap();
            assert_eq!(basis.len(), 2 * n - 3);
            let mut rng = rng_for(6, &[]);
            let v = combination(&mut rng, &basis);
            assert!(v[0].abs() < 1e-14 && v[1].abs() < 1e-14);
        }
    }

    #[test]
    fn ambient_point_json_is_interleaved_array() {
        let z = standard_binding(2);
        assert_eq!(
            serde_json::to_string(&z).unwrap(),
            "[0.0,0.0,1.0,0.0,0.0,1.0]"
        );
    }
}
