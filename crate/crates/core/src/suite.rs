//! The full verification suite over an `(n, k)` grid.

use std::collections::BTreeMap;

use nalgebra::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brieskorn::{
    alpha_k, binding_normal_basis, defect, poly_f, sample_binding_with, theta, AmbientPoint,
    BindingConstraints, BrieskornConstraints, BrieskornParams, RAction, SoNAction,
};
use crate::cotangent::{
    beta_k, lambda_can, ContactProduct, CotangentConstraints, CotangentPoint, DehnTwist, GlueMap,
    Psi, PsiPullbackTarget, Reparametrize, Sigma, TorusConstraints, TorusModel, TorusPoint,
    TwistDeck, TwistedLambda,
};
use crate::error::{Error, Result};
use crate::forms::scalar::derivative;
use crate::forms::{
    ad_fd_discrepancy_with, contact_volume, differential, exterior_derivative, pullback,
    ConstraintManifold, FdScheme, OneForm, SmoothMap, TwoForm,
};
use crate::openbook::{
    binding_contact_check, c_map, c_map_inverse, c_map_of, conformal_factor, orientation_check,
    page_radius_map, page_symplectic_check, planarity_check, rescale_radius, PhiEmbed,
    PhiPullbackTarget, SRescale, SRescaleInverse,
};
use crate::profile::TwistProfile;
use crate::report::{max_err, CheckReport, CheckResult};
use crate::sampling::{
    combination, cotangent_point, gaussian_vec, label, rng_for, rotation, stratified_radius,
    unit_vector,
};

pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_N: [usize; 3] = [2, 3, 4];
pub const DEFAULT_K: [u32; 5] = [1, 2, 3, 5, 8];
/// Points sampled by `phi_defect` per requested sample.
const PHI_DEFECT_FACTOR: usize = 5;
/// Size of the fixed radius grid for `s_equation`.
const S_EQUATION_GRID: usize = 1000;
/// Largest page radius sampled where the whole disk bundle is allowed.
const PAGE_R_MAX: f64 = 0.999;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_list: Vec<usize>,
    pub k_list: Vec<u32>,
    pub samples: usize,
    pub seed: u64,
    pub tol_overrides: BTreeMap<String, f64>,
    /// `None` runs every check.
    pub checks: Option<Vec<String>>,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_list: DEFAULT_N.to_vec(),
            k_list: DEFAULT_K.to_vec(),
            samples: DEFAULT_SAMPLES,
            seed: 0,
            tol_overrides: BTreeMap::new(),
            checks: None,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.k_list.is_empty() {
            return Err(Error::InvalidParams("empty n or k list".into()));
        }
        for &n in &self.n_list {
            for &k in &self.k_list {
                BrieskornParams::new(n, k)?;
            }
        }
        if self.samples == 0 {
            return Err(Error::InvalidParams("samples must be ≥ 1".into()));
        }
        let names = check_names();
        for name in self
            .tol_overrides
            .keys()
            .chain(self.checks.iter().flatten())
        {
            if !names.contains(&name.as_str()) {
                return Err(Error::InvalidParams(format!("unknown check `{name}`")));
            }
        }
        for (name, tol) in &self.tol_overrides {
            if !(*tol >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "tolerance for `{name}` must be ≥ 0"
                )));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidParams("thread count must be ≥ 1".into()));
        }
        Ok(())
    }

    fn selected(&self, name: &str) -> bool {
        self.checks
            .as_ref()
            .is_none_or(|c| c.iter().any(|s| s == name))
    }
}

/// One `(n, k)` cell.
pub struct Cell {
    pub params: BrieskornParams,
    pub profile: TwistProfile,
    pub samples: usize,
    pub seed: u64,
    /// Finite-difference scheme for the `ad_fd_*` checks.
    pub fd_scheme: FdScheme,
}

impl Cell {
    pub fn new(n: usize, k: u32, samples: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            params: BrieskornParams::new(n, k)?,
            profile: TwistProfile::new(k)?,
            samples,
            seed,
            fd_scheme: FdScheme::Richardson,
        })
    }

    fn n(&self) -> usize {
        self.params.n
    }

    fn rng(&self, name: &str, i: usize) -> ChaCha8Rng {
        rng_for(
            self.seed,
            &[
                label(name),
                self.n() as u64,
                u64::from(self.params.k),
                i as u64,
            ],
        )
    }

    /// Largest value of `f` over the cell's samples.
    fn sweep(
        &self,
        name: &str,
        count: usize,
        f: impl Fn(&mut ChaCha8Rng, usize) -> f64 + Sync + Send,
    ) -> (usize, f64) {
        let errs: Vec<f64> = (0..count)
            .into_par_iter()
            .map(|i| f(&mut self.rng(name, i), i))
            .collect();
        (count, max_err(errs))
    }

    /// Number of samples where `f` returns `false`.
    fn violations(
        &self,
        name: &str,
        f: impl Fn(&mut ChaCha8Rng, usize) -> bool + Sync + Send,
    ) -> (usize, f64) {
        let bad = (0..self.samples)
            .into_par_iter()
            .filter(|&i| !f(&mut self.rng(name, i), i))
            .count();
        (self.samples, bad as f64)
    }

    fn fiber_point(&self, rng: &mut ChaCha8Rng, i: usize) -> CotangentPoint {
        let r = stratified_radius(rng, &self.profile, i);
        cotangent_point(rng, self.n(), r)
    }

    /// `(t, q, p)` with `t ∈ [−1, 2)` and stratified `|p|`.
    fn torus_coords(&self, rng: &mut ChaCha8Rng, i: usize) -> Vec<f64> {
        let t = 3.0 * rng.random::<f64>() - 1.0;
        with_t(t, &self.fiber_point(rng, i))
    }

    /// `(t, q, p)` with `t ∈ [0, 1)` and `|p| < 1`.
    fn page_coords(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let t: f64 = rng.random();
        let r = PAGE_R_MAX * rng.random::<f64>();
        with_t(t, &cotangent_point(rng, self.n(), r))
    }

    fn w_point(&self, rng: &mut ChaCha8Rng) -> AmbientPoint {
        AmbientPoint(
            PhiEmbed {
                params: self.params,
            }
            .apply(&self.page_coords(rng)),
        )
    }
}

fn with_t(t: f64, pt: &CotangentPoint) -> Vec<f64> {
    std::iter::once(t).chain(pt.coords()).collect()
}

fn fiber_probe(rng: &mut ChaCha8Rng, x: &[f64]) -> Vec<f64> {
    let n = x.len() / 2;
    let basis = ConstraintManifold::new(CotangentConstraints { n })
        .tangent_basis(x)
        .expect("cotangent constraints have full rank");
    combination(rng, &basis)
}

fn torus_probe(rng: &mut ChaCha8Rng, x: &[f64]) -> Vec<f64> {
    let n = (x.len() - 1) / 2;
    let basis = ConstraintManifold::new(TorusConstraints { n })
        .tangent_basis(x)
        .expect("torus constraints have full rank");
    combination(rng, &basis)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    max_err(a.iter().zip(b).map(|(x, y)| x - y))
}

fn pullback_residual<M: SmoothMap, A: OneForm, B: OneForm>(
    map: &M,
    form: &A,
    expected: &B,
    x: &[f64],
    v: &[f64],
) -> f64 {
    match pullback(map, form, x, v) {
        Ok(lhs) => lhs - expected.eval(x, v),
        Err(_) => f64::NAN,
    }
}

type CheckFn = fn(&Cell) -> (usize, f64);

/// A named check with its default tolerance.
pub struct CheckSpec {
    pub name: &'static str,
    pub tolerance: f64,
    run: CheckFn,
}

impl CheckSpec {
    /// Run on `cell` against the default tolerance.
    pub fn run(&self, cell: &Cell) -> CheckResult {
        let (samples, err) = (self.run)(cell);
        CheckResult::new(self.name, samples, err, self.tolerance)
    }
}

macro_rules! checks {
    ($($name:literal => $tol:expr, $f:expr;)*) => {
        &[$(CheckSpec { name: $name, tolerance: $tol, run: $f }),*]
    };
}

pub static CHECKS: &[CheckSpec] = checks! {
    "profile_h_k_bound" => 0.0, profile_h_k_bound;
    "profile_h_aux_prime" => 1e-10, profile_h_aux_prime;
    "profile_h_aux_inverse" => 1e-10, profile_h_aux_inverse;
    "dehn_twist_lambda" => 1e-8, dehn_twist_lambda;
    "dehn_twist_round_trip" => 1e-10, dehn_twist_round_trip;
    "reprojection_drift" => 1e-10, reprojection_drift;
    "glue_contact" => 1e-8, glue_contact;
    "reparametrize_beta" => 1e-8, reparametrize_beta;
    "beta_deck" => 1e-8, beta_deck;
    "beta_contact" => 0.0, beta_contact;
    "psi_pullback" => 1e-8, psi_pullback;
    "psi_round_trip" => 1e-10, psi_round_trip;
    "phi_defect" => 1e-9, phi_defect;
    "phi_theta" => 1e-10, phi_theta;
    "phi_pullback" => 1e-8, phi_pullback;
    "phi_dt_coefficient" => 1e-9, phi_dt_coefficient;
    "s_equation" => 1e-12, s_equation;
    "s_round_trip" => 1e-9, s_round_trip;
    "c_pullback" => 1e-6, c_pullback;
    "c_theta" => 1e-9, c_theta;
    "c_deck" => 1e-8, c_deck;
    "c_round_trip" => 1e-8, c_round_trip;
    "alpha_contact" => 0.0, alpha_contact;
    "binding_contact" => 0.0, |c| counted(binding_contact_check(&c.params, c.samples, c.seed));
    "normal_basis" => 1e-10, normal_basis;
    "normal_basis_orientation" => 0.0, normal_basis_orientation;
    "page_symplectic" => 0.0, |c| counted(page_symplectic_check(&c.params, c.samples, c.seed));
    "orientation" => 0.0, |c| counted(orientation_check(c.n(), c.samples, c.seed));
    "planarity" => 1e-9, |c| counted(planarity_check(&c.params, &c.profile, c.samples, c.seed));
    "so_n_invariance" => 1e-10, so_n_invariance;
    "r_action_invariance" => 1e-10, r_action_invariance;
    "ad_fd_dehn_twist" => 1e-6, |c| ad_fd(c, "ad_fd_dehn_twist", Domain::Fiber, &DehnTwist::new(&c.profile, c.n()));
    "ad_fd_dehn_twist_inverse" => 1e-6, |c| ad_fd(c, "ad_fd_dehn_twist_inverse", Domain::Fiber, &DehnTwist::inverse(&c.profile, c.n()));
    "ad_fd_glue" => 1e-6, |c| ad_fd(c, "ad_fd_glue", Domain::Torus, &GlueMap { profile: &c.profile, n: c.n() });
    "ad_fd_reparametrize" => 1e-6, |c| ad_fd(c, "ad_fd_reparametrize", Domain::Torus, &Reparametrize { profile: &c.profile, n: c.n() });
    "ad_fd_psi" => 1e-6, |c| ad_fd(c, "ad_fd_psi", Domain::Torus, &Psi { profile: &c.profile, n: c.n(), inverse: false });
    "ad_fd_psi_inverse" => 1e-6, |c| ad_fd(c, "ad_fd_psi_inverse", Domain::Torus, &Psi { profile: &c.profile, n: c.n(), inverse: true });
    "ad_fd_twist_deck" => 1e-6, |c| ad_fd(c, "ad_fd_twist_deck", Domain::Torus, &TwistDeck { profile: &c.profile, n: c.n() });
    "ad_fd_sigma" => 1e-6, |c| ad_fd(c, "ad_fd_sigma", Domain::Torus, &Sigma { n: c.n(), k: c.params.k });
    "ad_fd_phi" => 1e-6, |c| ad_fd(c, "ad_fd_phi", Domain::Page, &PhiEmbed { params: c.params });
    "ad_fd_s_rescale" => 1e-6, |c| ad_fd(c, "ad_fd_s_rescale", Domain::PagePreimage, &SRescale { profile: &c.profile, n: c.n() });
    "ad_fd_s_rescale_inverse" => 1e-6, |c| ad_fd(c, "ad_fd_s_rescale_inverse", Domain::Torus, &SRescaleInverse { profile: &c.profile, n: c.n() });
    "ad_fd_c_map" => 1e-6, |c| ad_fd(c, "ad_fd_c_map", Domain::Torus, &c_map_of(&c.params, &c.profile));
    "ad_fd_r_action" => 1e-6, |c| ad_fd(c, "ad_fd_r_action", Domain::Ambient, &RAction { params: c.params, t: 0.7 });
    "ad_fd_so_n_action" => 1e-6, ad_fd_so_n;
    "ad_fd_brieskorn_constraints" => 1e-6, |c| ad_fd(c, "ad_fd_brieskorn_constraints", Domain::Ambient, &BrieskornConstraints { params: c.params });
};

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

fn counted(r: CheckResult) -> (usize, f64) {
    (r.samples, r.max_abs_err)
}

fn profile_h_k_bound(c: &Cell) -> (usize, f64) {
    let bound = c.profile.h_k_lower_bound();
    let b = c.profile.transition().1;
    c.sweep("profile_h_k_bound", c.samples, |rng, _| {
        let y = 20.0 * b * rng.random::<f64>();
        (bound - c.profile.h_k(y)).max(0.0)
    })
}

fn profile_h_aux_prime(c: &Cell) -> (usize, f64) {
    let b = c.profile.transition().1;
    c.sweep("profile_h_aux_prime", c.samples, |rng, _| {
        let y = 20.0 * b * rng.random::<f64>();
        derivative(|x| c.profile.h_aux(x), y) - c.profile.h_aux_prime(y)
    })
}

fn profile_h_aux_inverse(c: &Cell) -> (usize, f64) {
    let b = c.profile.transition().1;
    c.sweep("profile_h_aux_inverse", c.samples, |rng, _| {
        let y = 20.0 * b * rng.random::<f64>();
        c.profile
            .h_aux_inverse(c.profile.h_aux(y))
            .map_or(f64::NAN, |back| (back - y) / y.max(1.0))
    })
}

fn dehn_twist_lambda(c: &Cell) -> (usize, f64) {
    let tau = DehnTwist::new(&c.profile, c.n());
    let expected = TwistedLambda {
        profile: &c.profile,
        n: c.n(),
    };
    let lambda = lambda_can(c.n());
    c.sweep("dehn_twist_lambda", c.samples, |rng, i| {
        let x = c.fiber_point(rng, i).coords();
        let v = fiber_probe(rng, &x);
        pullback_residual(&tau, &lambda, &expected, &x, &v)
    })
}

fn dehn_twist_round_trip(c: &Cell) -> (usize, f64) {
    let tau = DehnTwist::new(&c.profile, c.n());
    let inv = DehnTwist::inverse(&c.profile, c.n());
    c.sweep("dehn_twist_round_trip", c.samples, |rng, i| {
        let x = c.fiber_point(rng, i).coords();
        dist(&inv.apply(&tau.apply(&x)), &x).max(dist(&tau.apply(&inv.apply(&x)), &x))
    })
}

/// Largest constraint correction applied while iterating `τ_k` and `τ_k⁻¹`.
fn reprojection_drift(c: &Cell) -> (usize, f64) {
    const STEPS: usize = 10;
    let tau = DehnTwist::new(&c.profile, c.n());
    let inv = DehnTwist::inverse(&c.profile, c.n());
    c.sweep("reprojection_drift", c.samples, |rng, i| {
        let start = c.fiber_point(rng, i);
        let mut pt = start.clone();
        let mut worst: f64 = 0.0;
        for step in 0..2 * STEPS {
            let map = if step < STEPS { &tau } else { &inv };
            let (next, moved) = CotangentPoint::from_coords(&map.apply(&pt.coords()));
            worst = worst.max(moved);
            pt = next;
        }
        worst.max(dist(&pt.coords(), &start.coords()))
    })
}

fn glue_contact(c: &Cell) -> (usize, f64) {
    let glue = GlueMap {
        profile: &c.profile,
        n: c.n(),
    };
    let form = ContactProduct { n: c.n() };
    c.sweep("glue_contact", c.samples, |rng, i| {
        let x = c.torus_coords(rng, i);
        let v = torus_probe(rng, &x);
        pullback_residual(&glue, &form, &form, &x, &v)
    })
}

fn reparametrize_beta(c: &Cell) -> (usize, f64) {
    let map = Reparametrize {
        profile: &c.profile,
        n: c.n(),
    };
    let form = ContactProduct { n: c.n() };
    let beta = beta_k(&c.profile, c.n());
    c.sweep("reparametrize_beta", c.samples, |rng, i| {
        let x = c.torus_coords(rng, i);
        let v = torus_probe(rng, &x);
        pullback_residual(&map, &form, &beta, &x, &v)
    })
}

fn beta_deck(c: &Cell) -> (usize, f64) {
    let deck = TwistDeck {
        profile: &c.profile,
        n: c.n(),
    };
    let beta = beta_k(&c.profile, c.n());
    c.sweep("beta_deck", c.samples, |rng, i| {
        let x = c.torus_coords(rng, i);
        let v = torus_probe(rng, &x);
        pullback_residual(&deck, &beta, &beta, &x, &v)
    })
}

fn signs_agree(values: &[f64]) -> f64 {
    let reference = values.first().copied().unwrap_or(f64::NAN).signum();
    values
        .iter()
        .filter(|v| !(v.abs() > 1e-12) || v.signum() != reference)
        .count() as f64
}

fn beta_contact(c: &Cell) -> (usize, f64) {
    let beta = beta_k(&c.profile, c.n());
    let mfd = ConstraintManifold::new(TorusConstraints { n: c.n() });
    let vols: Vec<f64> = (0..c.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = c.rng("beta_contact", i);
            let x = c.torus_coords(&mut rng, i);
            contact_volume(&beta, &mfd, &x).unwrap_or(f64::NAN)
        })
        .collect();
    (c.samples, signs_agree(&vols))
}

fn psi_pullback(c: &Cell) -> (usize, f64) {
    let psi = Psi {
        profile: &c.profile,
        n: c.n(),
        inverse: false,
    };
    let beta = beta_k(&c.profile, c.n());
    let expected = PsiPullbackTarget {
        profile: &c.profile,
        n: c.n(),
    };
    c.sweep("psi_pullback", c.samples, |rng, i| {
        let x = c.torus_coords(rng, i);
        let v = torus_probe(rng, &x);
        pullback_residual(&psi, &beta, &expected, &x, &v)
    })
}

fn psi_round_trip(c: &Cell) -> (usize, f64) {
    let fwd = Psi {
        profile: &c.profile,
        n: c.n(),
        inverse: false,
    };
    let inv = Psi {
        inverse: true,
        ..fwd
    };
    c.sweep("psi_round_trip", c.samples, |rng, i| {
        let x = c.torus_coords(rng, i);
        dist(&inv.apply(&fwd.apply(&x)), &x)
    })
}

fn phi_defect(c: &Cell) -> (usize, f64) {
    c.sweep("phi_defect", PHI_DEFECT_FACTOR * c.samples, |rng, _| {
        let (a, b) = defect(&c.params, &c.w_point(rng));
        a.max(b)
    })
}

fn phi_theta(c: &Cell) -> (usize, f64) {
    let phi = PhiEmbed { params: c.params };
    c.sweep("phi_theta", c.samples, |rng, _| {
        let x = c.page_coords(rng);
        let z = AmbientPoint(phi.apply(&x));
        theta(&z).map_or(f64::NAN, |th| {
            (th - Complex::from_polar(1.0, std::f64::consts::TAU * x[0])).norm()
        })
    })
}

fn phi_pullback(c: &Cell) -> (usize, f64) {
    let phi = PhiEmbed { params: c.params };
    let alpha = alpha_k(&c.params);
    let expected = PhiPullbackTarget { params: c.params };
    c.sweep("phi_pullback", c.samples, |rng, _| {
        let x = c.page_coords(rng);
        let v = torus_probe(rng, &x);
        pullback_residual(&phi, &alpha, &expected, &x, &v)
    })
}

fn phi_dt_coefficient(c: &Cell) -> (usize, f64) {
    let phi = PhiEmbed { params: c.params };
    let alpha = alpha_k(&c.params);
    let target = 4.0 * c.profile.kpi();
    c.sweep("phi_dt_coefficient", c.samples, |rng, _| {
        let x = c.page_coords(rng);
        let mut dt = vec![0.0; x.len()];
        dt[0] = 1.0;
        pullback(&phi, &alpha, &x, &dt).map_or(f64::NAN, |v| v - target)
    })
}

fn s_equation(c: &Cell) -> (usize, f64) {
    let k = c.params.k;
    let errs: Vec<f64> = (0..S_EQUATION_GRID)
        .into_par_iter()
        .map(|i| {
            let r = PAGE_R_MAX * i as f64 / S_EQUATION_GRID as f64;
            rescale_radius(&c.profile, r)
                .map_or(f64::NAN, |g| c.profile.h_aux(g) - page_radius_map(k, r))
        })
        .collect();
    (S_EQUATION_GRID, max_err(errs))
}

fn s_round_trip(c: &Cell) -> (usize, f64) {
    let fwd = SRescale {
        profile: &c.profile,
        n: c.n(),
    };
    let inv = SRescaleInverse {
        profile: &c.profile,
        n: c.n(),
    };
    c.sweep("s_round_trip", c.samples, |rng, _| {
        let x = c.page_coords(rng);
        dist(&inv.apply(&fwd.apply(&x)), &x)
    })
}

/// `C_k*α_k − μ β_k` with `μ = 4πk / (1 + I(|p|))`.
fn c_pullback(c: &Cell) -> (usize, f64) {
    let cmap = c_map_of(&c.params, &c.profile);
    let alpha = alpha_k(&c.params);
    let beta = beta_k(&c.profile, c.n());
    c.sweep("c_pullback", c.samples, |rng, i| {
        let x = c.torus_coords(rng, i);
        let v = torus_probe(rng, &x);
        let tp = TorusPoint::from_coords(&x, TorusModel::Twist);
        let mu = conformal_factor(&c.profile, &tp);
        pullback(&cmap, &alpha, &x, &v).map_or(f64::NAN, |lhs| lhs - mu * beta.eval(&x, &v))
    })
}

fn c_theta(c: &Cell) -> (usize, f64) {
    c.sweep("c_theta", c.samples, |rng, i| {
        let x = c.torus_coords(rng, i);
        let tp = TorusPoint::from_coords(&x, TorusModel::Twist);
        c_map(&c.params, &c.profile, &tp)
            .and_then(|z| theta(&z))
            .map_or(f64::NAN, |th| {
                (th - Complex::from_polar(1.0, std::f64::consts::TAU * x[0])).norm()
            })
    })
}

fn c_deck(c: &Cell) -> (usize, f64) {
    let cmap = c_map_of(&c.params, &c.profile);
    let deck = TwistDeck {
        profile: &c.profile,
        n: c.n(),
    };
    c.sweep("c_deck", c.samples, |rng, i| {
        let x = c.torus_coords(rng, i);
        dist(&cmap.apply(&deck.apply(&x)), &cmap.apply(&x))
    })
}

fn c_round_trip(c: &Cell) -> (usize, f64) {
    c.sweep("c_round_trip", c.samples, |rng, _| {
        let z = c.w_point(rng);
        c_map_inverse(&c.params, &c.profile, &z)
            .and_then(|tp| c_map(&c.params, &c.profile, &tp))
            .map_or(f64::NAN, |back| dist(&back.0, &z.0))
    })
}

/// `α_k ∧ (dα_k)^{n−1}` on `W`, at page points and every fifth sample on the
/// binding.
fn alpha_contact(c: &Cell) -> (usize, f64) {
    let alpha = alpha_k(&c.params);
    let mfd = ConstraintManifold::new(BrieskornConstraints { params: c.params });
    let vols: Vec<f64> = (0..c.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = c.rng("alpha_contact", i);
            let z = if i % 5 == 4 {
                sample_binding_with(&c.params, &mut rng)
            } else {
                c.w_point(&mut rng)
            };
            contact_volume(&alpha, &mfd, &z.0).unwrap_or(f64::NAN)
        })
        .collect();
    (c.samples, signs_agree(&vols))
}

/// Residuals of the normal-basis conditions: tangent to `W`, in `ker α`, and
/// `dα`-orthogonal to the binding.
fn normal_basis(c: &Cell) -> (usize, f64) {
    let cons = BrieskornConstraints { params: c.params };
    let alpha = alpha_k(&c.params);
    let dalpha = exterior_derivative(alpha);
    let binding = ConstraintManifold::new(BindingConstraints { params: c.params });
    c.sweep("normal_basis", c.samples, |rng, _| {
        let z = sample_binding_with(&c.params, rng);
        let Ok((e1, e2)) = binding_normal_basis(&c.params, &z) else {
            return f64::NAN;
        };
        let Ok(tb) = binding.tangent_basis(&z.0) else {
            return f64::NAN;
        };
        let mut errs = Vec::new();
        for e in [&e1, &e2] {
            errs.extend(differential(&cons, &z.0, e).unwrap_or_else(|_| vec![f64::NAN]));
            errs.push(alpha.eval(&z.0, e));
            errs.extend(tb.iter().map(|w| dalpha.eval(&z.0, e, w)));
        }
        max_err(errs)
    })
}

fn normal_basis_orientation(c: &Cell) -> (usize, f64) {
    let dalpha = exterior_derivative(alpha_k(&c.params));
    c.violations("normal_basis_orientation", |rng, _| {
        let z = sample_binding_with(&c.params, rng);
        binding_normal_basis(&c.params, &z).is_ok_and(|(e1, e2)| dalpha.eval(&z.0, &e1, &e2) > 0.0)
    })
}

fn so_n_invariance(c: &Cell) -> (usize, f64) {
    let alpha = alpha_k(&c.params);
    c.sweep("so_n_invariance", c.samples, |rng, _| {
        let Ok(action) = SoNAction::new(rotation(rng, c.n())) else {
            return f64::NAN;
        };
        let z = c.w_point(rng);
        let v = unit_vector(rng, c.params.ambient_dim());
        let moved = AmbientPoint(action.apply(&z.0));
        let form = pullback_residual(&action, &alpha, &alpha, &z.0, &v);
        let poly = (poly_f(&c.params, &moved) - poly_f(&c.params, &z)).norm();
        let (d0, d1) = defect(&c.params, &moved);
        max_err([form, poly, d0, d1])
    })
}

fn r_action_invariance(c: &Cell) -> (usize, f64) {
    let alpha = alpha_k(&c.params);
    c.sweep("r_action_invariance", c.samples, |rng, _| {
        let t = std::f64::consts::TAU * rng.random::<f64>();
        let action = RAction {
            params: c.params,
            t,
        };
        let z = c.w_point(rng);
        let v = unit_vector(rng, c.params.ambient_dim());
        let moved = AmbientPoint(action.apply(&z.0));
        let form = pullback_residual(&action, &alpha, &alpha, &z.0, &v);
        let (d0, d1) = defect(&c.params, &moved);
        let fiber = match (theta(&moved), theta(&z)) {
            (Ok(a), Ok(b)) => (a - b * Complex::from_polar(1.0, t)).norm(),
            _ => f64::NAN,
        };
        max_err([form, d0, d1, fiber])
    })
}

#[derive(Clone, Copy)]
enum Domain {
    /// `(q, p)` with stratified `|p|`.
    Fiber,
    /// `(t, q, p)` with stratified `|p|`.
    Torus,
    /// `(t, q, p)` with `|p| < 1`.
    Page,
    /// `S_k⁻¹` of a `Torus` sample, so `S_k` sees the same stratification
    /// of its image as the other maps.
    PagePreimage,
    /// Gaussian points of `ℂ^{n+1}`.
    Ambient,
}

/// Dual-number differential against a finite difference, by default the
/// extrapolated central difference. The plain difference at the base step carries an `O(h²)` truncation error
/// that exceeds `1e-6` inside the `f_k` transition once `k ≥ 2`.
fn ad_fd<M: SmoothMap + Sync>(c: &Cell, name: &str, domain: Domain, map: &M) -> (usize, f64) {
    c.sweep(name, c.samples, |rng, i| {
        let x = match domain {
            Domain::Fiber => c.fiber_point(rng, i).coords(),
            Domain::Torus => c.torus_coords(rng, i),
            Domain::Page => c.page_coords(rng),
            Domain::PagePreimage => SRescaleInverse {
                profile: &c.profile,
                n: c.n(),
            }
            .apply(&c.torus_coords(rng, i)),
            Domain::Ambient => gaussian_vec(rng, c.params.ambient_dim()),
        };
        let v = unit_vector(rng, x.len());
        ad_fd_discrepancy_with(map, &x, &v, c.fd_scheme).unwrap_or(f64::NAN)
    })
}

fn ad_fd_so_n(c: &Cell) -> (usize, f64) {
    let mut rng = c.rng("ad_fd_so_n_action", usize::MAX);
    match SoNAction::new(rotation(&mut rng, c.n())) {
        Ok(action) => ad_fd(c, "ad_fd_so_n_action", Domain::Ambient, &action),
        Err(_) => (c.samples, f64::NAN),
    }
}

/// Run the selected checks for one `(n, k)` cell.
pub fn run_cell(n: usize, k: u32, config: &RunConfig) -> Result<CheckReport> {
    let cell = Cell::new(n, k, config.samples, config.seed)?;
    let checks = CHECKS
        .iter()
        .filter(|spec| config.selected(spec.name))
        .map(|spec| {
            let (samples, err) = (spec.run)(&cell);
            let tol = config
                .tol_overrides
                .get(spec.name)
                .copied()
                .unwrap_or(spec.tolerance);
            CheckResult::new(spec.name, samples, err, tol)
        })
        .collect();
    Ok(CheckReport::new(n, k, config.seed, checks))
}

/// Run the suite over the configured grid, in `n`-major order.
pub fn run_verify(config: &RunConfig) -> Result<Vec<CheckReport>> {
    config.validate()?;
    let cells: Vec<(usize, u32)> = config
        .n_list
        .iter()
        .flat_map(|&n| config.k_list.iter().map(move |&k| (n, k)))
        .collect();
    let run = || {
        cells
            .par_iter()
            .map(|&(n, k)| run_cell(n, k, config))
            .collect()
    };
    match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidParams(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// Parallelism cap from `OPENBOOK_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("OPENBOOK_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&t| t > 0)
}
