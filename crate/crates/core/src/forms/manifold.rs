use nalgebra::DMatrix;

use super::form::{exterior_derivative, wedge_eval, Frozen, OneForm, TwoForm};
use super::map::{jacobian, SmoothMap};
use crate::error::{Error, Result};

/// Acceptance gate on constraint residuals.
pub const ON_MANIFOLD_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-10;

/// Common zero set of the components of a smooth map `ℝ^N → ℝ^m`.
#[derive(Clone, Debug)]
pub struct ConstraintManifold<C> {
    pub constraints: C,
}

impl<C: SmoothMap> ConstraintManifold<C> {
    pub fn new(constraints: C) -> Self {
        Self { constraints }
    }

    pub fn ambient_dim(&self) -> usize {
        self.constraints.domain_dim()
    }

    pub fn dim(&self) -> usize {
        self.ambient_dim() - self.constraints.codomain_dim()
    }

    pub fn residual(&self, point: &[f64]) -> f64 {
        self.constraints
            .apply(point)
            .iter()
            .fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Orthonormal basis of the tangent space at `point`.
    ///
    /// The null space of the constraint jacobian comes from a column-pivoted
    /// QR of `[Jᵀ | 0]`. The basis is oriented so that `(∇c_1, …, ∇c_m, e_1,
    /// …, e_d)` is positively oriented in the ambient space, which fixes one
    /// orientation of the manifold independent of the point.
    pub fn tangent_basis(&self, point: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.ambient_dim();
        if point.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: point.len(),
            });
        }
        let residual = self.residual(point);
        if residual > ON_MANIFOLD_TOL {
            return Err(Error::ConstraintViolation { residual });
        }
        let jac = jacobian(&self.constraints, point)?;
        let m = jac.len();
        let padded = DMatrix::from_fn(n, n, |i, j| if j < m { jac[j][i] } else { 0.0 });
        let qr = padded.col_piv_qr();
        let r = qr.r();
        let rank = (0..m).filter(|&i| r[(i, i)].abs() > RANK_TOL).count();
        if rank < m {
            return Err(Error::RankDeficient { rank, expected: m });
        }
        let q = qr.q();
        let mut basis: Vec<Vec<f64>> = (m..n)
            .map(|j| (0..n).map(|i| q[(i, j)]).collect())
            .collect();

        let frame = DMatrix::from_fn(n, n, |i, j| if j < m { jac[j][i] } else { basis[j - m][i] });
        if frame.determinant() < 0.0 {
            if let Some(first) = basis.first_mut() {
                first.iter_mut().for_each(|x| *x = -*x);
            }
        }
        Ok(basis)
    }
}

/// `α ∧ (dα)^ℓ` on the oriented tangent basis of a `(2ℓ+1)`-manifold.
///
/// For `ℓ = 0` this is `α(e_1)`, signed. A nonzero value certifies the
/// contact condition at `point`.
pub fn contact_volume<W: OneForm, C: SmoothMap>(
    alpha: &W,
    mfd: &ConstraintManifold<C>,
    point: &[f64],
) -> Result<f64> {
    let d = mfd.dim();
    if d % 2 == 0 {
        return Err(Error::EvenDimension(d));
    }
    if d > super::form::MAX_WEDGE_DEGREE {
        return Err(Error::DimensionTooLarge(d));
    }
    let basis = mfd.tangent_basis(point)?;
    let ell = (d - 1) / 2;
    let mut forms = vec![alpha.freeze(point)];
    if ell > 0 {
        let dalpha = exterior_derivative(alpha).freeze(point);
        forms.extend(std::iter::repeat_n(dalpha, ell));
    }
    wedge_eval(&forms, &basis)
}

/// Skew Gram matrix `[ω(e_i, e_j)]` of a 2-form on a list of vectors.
pub fn skew_gram<B: TwoForm>(omega: &B, point: &[f64], basis: &[Vec<f64>]) -> DMatrix<f64> {
    let frozen = omega.freeze(point);
    let dim = basis.len();
    DMatrix::from_fn(dim, dim, |i, j| frozen.eval(&[&basis[i], &basis[j]]))
}

/// `det [ω(e_i, e_j)]` on the tangent basis; positive iff `ω` restricts to a
/// nondegenerate form (the determinant of a skew matrix is a square).
pub fn symplectic_determinant<B: TwoForm, C: SmoothMap>(
    omega: &B,
    mfd: &ConstraintManifold<C>,
    point: &[f64],
) -> Result<f64> {
    let basis = mfd.tangent_basis(point)?;
    Ok(skew_gram(omega, point, &basis).determinant())
}

/// Frozen wedge of a 1-form with a power of a 2-form, evaluated on `vectors`.
pub fn power_wedge(
    one: Option<&Frozen>,
    two: &Frozen,
    power: usize,
    vectors: &[Vec<f64>],
) -> Result<f64> {
    let mut forms: Vec<Frozen> = one.into_iter().cloned().collect();
    forms.extend(std::iter::repeat_n(two.clone(), power));
    wedge_eval(&forms, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::scalar::Scalar;

    struct Circle;
    impl SmoothMap for Circle {
        fn domain_dim(&self) -> usize {
            2
        }
        fn codomain_dim(&self) -> usize {
            1
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
            vec![x[0] * x[0] + x[1] * x[1] - 1.0]
        }
    }

    #[test]
    fn unit_circle_tangent() {
        let mfd = ConstraintManifold::new(Circle);
        let b = mfd.tangent_basis(&[1.0, 0.0]).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0][0].abs() < 1e-15);
        assert!((b[0][1].abs() - 1.0).abs() < 1e-15);
        // outward normal then tangent is positively oriented: (1,0),(0,1)
        assert!(b[0][1] > 0.0);
    }

    #[test]
    fn orientation_is_consistent_around_the_circle() {
        let mfd = ConstraintManifold::new(Circle);
        for i in 0..16 {
            let a = i as f64 * 0.4;
            let b = mfd.tangent_basis(&[a.cos(), a.sin()]).unwrap();
            // counter-clockwise tangent
            assert!((b[0][0] + a.sin()).abs() < 1e-12 && (b[0][1] - a.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn off_manifold_point_is_rejected() {
        let mfd = ConstraintManifold::new(Circle);
        assert!(matches!(
            mfd.tangent_basis(&[1.1, 0.0]),
            Err(Error::ConstraintViolation { .. })
        ));
    }

    struct Degenerate;
    impl SmoothMap for Degenerate {
        fn domain_dim(&self) -> usize {
            2
        }
        fn codomain_dim(&self) -> usize {
            1
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
            vec![x[0] * x[0]]
        }
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let mfd = ConstraintManifold::new(Degenerate);
        assert!(matches!(
            mfd.tangent_basis(&[0.0, 0.3]),
            Err(Error::RankDeficient {
                rank: 0,
                expected: 1
            })
        ));
    }
}
