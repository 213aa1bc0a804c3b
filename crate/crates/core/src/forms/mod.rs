//! Differential-geometry engine: dual-number maps, coefficient-based forms,
//! pullbacks, exterior derivatives, wedge evaluation, and tangent spaces of
//! constraint manifolds.

pub mod form;
pub mod manifold;
pub mod map;
pub mod scalar;

pub use form::{
    exterior_derivative, exterior_derivative_2, pullback, pullback_two, wedge_eval,
    ExteriorDerivative, Frozen, OneForm, PullbackOne, PullbackTwo, TwoForm,
};
pub use manifold::{
    contact_volume, power_wedge, skew_gram, symplectic_determinant, ConstraintManifold,
};
pub use map::{
    ad_fd_discrepancy, ad_fd_discrepancy_with, central_difference, differential, jacobian,
    richardson_difference, value_and_differential, Compose, ConstantMap, FdScheme, Identity,
    LinearMap, SmoothMap,
};
pub use scalar::{dot, norm, Dual, Scalar, Univariate};
