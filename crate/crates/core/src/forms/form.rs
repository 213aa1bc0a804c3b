use super::map::SmoothMap;
use super::scalar::{dot, Dual, Scalar};
use crate::error::{Error, Result};

/// Largest total degree accepted by [`wedge_eval`].
pub const MAX_WEDGE_DEGREE: usize = 7;

/// A 1-form `Σ a_i(x) dx_i` given by its coefficient functions.
pub trait OneForm: Sync {
    fn dim(&self) -> usize;
    fn coefficients<S: Scalar>(&self, x: &[S]) -> Vec<S>;

    fn eval(&self, x: &[f64], v: &[f64]) -> f64 {
        dot(&self.coefficients(x), v)
    }

    fn freeze(&self, x: &[f64]) -> Frozen {
        Frozen::One(self.coefficients(x))
    }
}

/// A 2-form `Σ_{i,j} b_ij(x) dx_i ⊗ dx_j` with `b` antisymmetric, so that
/// `ω(u, v) = uᵀ b v`.
pub trait TwoForm: Sync {
    fn dim(&self) -> usize;
    fn matrix<S: Scalar>(&self, x: &[S]) -> Vec<Vec<S>>;

    fn eval(&self, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
        bilinear(&self.matrix(x), u, v)
    }

    fn freeze(&self, x: &[f64]) -> Frozen {
        Frozen::Two(self.matrix(x))
    }
}

impl<W: OneForm + ?Sized> OneForm for &W {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn coefficients<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        (**self).coefficients(x)
    }
    fn eval(&self, x: &[f64], v: &[f64]) -> f64 {
        (**self).eval(x, v)
    }
}

impl<B: TwoForm + ?Sized> TwoForm for &B {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn matrix<S: Scalar>(&self, x: &[S]) -> Vec<Vec<S>> {
        (**self).matrix(x)
    }
    fn eval(&self, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
        (**self).eval(x, u, v)
    }
}

fn bilinear<S: Scalar>(b: &[Vec<S>], u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (row, &ui) in b.iter().zip(u) {
        if ui == 0.0 {
            continue;
        }
        let rv: f64 = row.iter().zip(v).map(|(bij, vj)| bij.value() * vj).sum();
        acc += ui * rv;
    }
    acc
}

/// Directional derivative of the coefficients of `form` along `dir`.
fn coefficient_derivative<W: OneForm, S: Scalar>(form: &W, x: &[S], dir: &[S]) -> Vec<S> {
    form.coefficients(&Dual::seed(x, dir))
        .into_iter()
        .map(|d| d.eps)
        .collect()
}

/// `dω` for a 1-form `ω`, with `dω(u, v) = D_u(a)·v − D_v(a)·u`.
#[derive(Clone, Copy, Debug)]
pub struct ExteriorDerivative<W>(pub W);

impl<W: OneForm> TwoForm for ExteriorDerivative<W> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn matrix<S: Scalar>(&self, x: &[S]) -> Vec<Vec<S>> {
        let n = x.len();
        let mut e = vec![S::zero(); n];
        // grad[i][j] = ∂_i a_j
        let grad: Vec<Vec<S>> = (0..n)
            .map(|i| {
                e[i] = S::one();
                let g = coefficient_derivative(&self.0, x, &e);
                e[i] = S::zero();
                g
            })
            .collect();
        (0..n)
            .map(|i| (0..n).map(|j| grad[i][j] - grad[j][i]).collect())
            .collect()
    }

    fn eval(&self, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let du = coefficient_derivative(&self.0, x, u);
        let dv = coefficient_derivative(&self.0, x, v);
        dot(&du, v) - dot(&dv, u)
    }
}

pub fn exterior_derivative<W: OneForm>(form: W) -> ExteriorDerivative<W> {
    ExteriorDerivative(form)
}

/// `dβ(X, Y, Z)` for a 2-form `β`, treating `X, Y, Z` as constant fields.
pub fn exterior_derivative_2<B: TwoForm>(form: &B, x: &[f64], vs: [&[f64]; 3]) -> f64 {
    let deriv = |dir: &[f64], a: &[f64], b: &[f64]| -> f64 {
        let seeded = Dual::seed(x, dir);
        let m = form.matrix(&seeded);
        let mut acc = 0.0;
        for (row, &ai) in m.iter().zip(a) {
            let rb: f64 = row.iter().zip(b).map(|(bij, bj)| bij.eps * bj).sum();
            acc += ai * rb;
        }
        acc
    };
    let [a, b, c] = vs;
    deriv(a, b, c) + deriv(b, c, a) + deriv(c, a, b)
}

/// Pullback of a 1-form under a smooth map.
#[derive(Clone, Copy, Debug)]
pub struct PullbackOne<M, W> {
    pub map: M,
    pub form: W,
}

impl<M: SmoothMap, W: OneForm> PullbackOne<M, W> {
    pub fn new(map: M, form: W) -> Self {
        Self { map, form }
    }
}

impl<M: SmoothMap, W: OneForm> OneForm for PullbackOne<M, W> {
    fn dim(&self) -> usize {
        self.map.domain_dim()
    }

    fn coefficients<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let y = self.map.eval(x);
        let a = self.form.coefficients(&y);
        let n = x.len();
        let mut e = vec![S::zero(); n];
        (0..n)
            .map(|j| {
                e[j] = S::one();
                let col: Vec<S> = self
                    .map
                    .eval(&Dual::seed(x, &e))
                    .into_iter()
                    .map(|d| d.eps)
                    .collect();
                e[j] = S::zero();
                dot(&a, &col)
            })
            .collect()
    }

    fn eval(&self, x: &[f64], v: &[f64]) -> f64 {
        let out = self.map.eval(&Dual::seed(x, v));
        let (y, w): (Vec<f64>, Vec<f64>) = out.into_iter().map(|d| (d.re, d.eps)).unzip();
        self.form.eval(&y, &w)
    }
}

/// Pullback of a 2-form under a smooth map.
#[derive(Clone, Copy, Debug)]
pub struct PullbackTwo<M, B> {
    pub map: M,
    pub form: B,
}

impl<M: SmoothMap, B: TwoForm> PullbackTwo<M, B> {
    pub fn new(map: M, form: B) -> Self {
        Self { map, form }
    }
}

impl<M: SmoothMap, B: TwoForm> TwoForm for PullbackTwo<M, B> {
    fn dim(&self) -> usize {
        self.map.domain_dim()
    }

    fn matrix<S: Scalar>(&self, x: &[S]) -> Vec<Vec<S>> {
        let y = self.map.eval(x);
        let b = self.form.matrix(&y);
        let n = x.len();
        let mut e = vec![S::zero(); n];
        let cols: Vec<Vec<S>> = (0..n)
            .map(|j| {
                e[j] = S::one();
                let col = self
                    .map
                    .eval(&Dual::seed(x, &e))
                    .into_iter()
                    .map(|d| d.eps)
                    .collect();
                e[j] = S::zero();
                col
            })
            .collect();
        let bc: Vec<Vec<S>> = cols
            .iter()
            .map(|c| b.iter().map(|row| dot(row, c)).collect())
            .collect();
        (0..n)
            .map(|i| (0..n).map(|j| dot(&cols[i], &bc[j])).collect())
            .collect()
    }

    fn eval(&self, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let pu = self.map.eval(&Dual::seed(x, u));
        let pv = self.map.eval(&Dual::seed(x, v));
        let y: Vec<f64> = pu.iter().map(|d| d.re).collect();
        let wu: Vec<f64> = pu.iter().map(|d| d.eps).collect();
        let wv: Vec<f64> = pv.iter().map(|d| d.eps).collect();
        self.form.eval(&y, &wu, &wv)
    }
}

/// Pullback of a 1-form evaluated on one tangent vector.
pub fn pullback<M: SmoothMap, W: OneForm>(map: &M, form: &W, x: &[f64], v: &[f64]) -> Result<f64> {
    check_dims(map.domain_dim(), &[x, v])?;
    if map.codomain_dim() != form.dim() {
        return Err(Error::DimensionMismatch {
            expected: form.dim(),
            got: map.codomain_dim(),
        });
    }
    Ok(PullbackOne::new(map, form).eval(x, v))
}

/// Pullback of a 2-form evaluated on a pair of tangent vectors.
pub fn pullback_two<M: SmoothMap, B: TwoForm>(
    map: &M,
    form: &B,
    x: &[f64],
    u: &[f64],
    v: &[f64],
) -> Result<f64> {
    check_dims(map.domain_dim(), &[x, u, v])?;
    if map.codomain_dim() != form.dim() {
        return Err(Error::DimensionMismatch {
            expected: form.dim(),
            got: map.codomain_dim(),
        });
    }
    Ok(PullbackTwo::new(map, form).eval(x, u, v))
}

fn check_dims(expected: usize, vs: &[&[f64]]) -> Result<()> {
    for v in vs {
        if v.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: v.len(),
            });
        }
    }
    Ok(())
}

/// A form frozen at a point: a covector or an antisymmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum Frozen {
    One(Vec<f64>),
    Two(Vec<Vec<f64>>),
}

impl Frozen {
    pub fn degree(&self) -> usize {
        match self {
            Frozen::One(_) => 1,
            Frozen::Two(_) => 2,
        }
    }

    pub fn eval(&self, vs: &[&[f64]]) -> f64 {
        match self {
            Frozen::One(a) => dot(a, vs[0]),
            Frozen::Two(b) => bilinear(b, vs[0], vs[1]),
        }
    }
}

/// `(ω_1 ∧ … ∧ ω_m)(v_1, …, v_N)` as a signed sum over shuffles, so that a
/// wedge of 1-forms evaluates to a determinant.
pub fn wedge_eval(forms: &[Frozen], vectors: &[Vec<f64>]) -> Result<f64> {
    let total: usize = forms.iter().map(Frozen::degree).sum();
    if total != vectors.len() {
        return Err(Error::DimensionMismatch {
            expected: total,
            got: vectors.len(),
        });
    }
    if total > MAX_WEDGE_DEGREE {
        return Err(Error::DimensionTooLarge(total));
    }
    let mut order = Vec::with_capacity(total);
    let mut used = vec![false; total];
    Ok(shuffle_sum(forms, vectors, &mut order, &mut used))
}

fn shuffle_sum(
    forms: &[Frozen],
    vectors: &[Vec<f64>],
    order: &mut Vec<usize>,
    used: &mut [bool],
) -> f64 {
    let Some((first, rest)) = forms.split_first() else {
        return permutation_sign(order);
    };
    let free: Vec<usize> = (0..used.len()).filter(|&i| !used[i]).collect();
    let mut acc = 0.0;
    match first.degree() {
        1 => {
            for &i in &free {
                let val = first.eval(&[&vectors[i]]);
                if val == 0.0 {
                    continue;
                }
                used[i] = true;
                order.push(i);
                acc += val * shuffle_sum(rest, vectors, order, used);
                order.pop();
                used[i] = false;
            }
        }
        _ => {
            for (a, &i) in free.iter().enumerate() {
                for &j in &free[a + 1..] {
                    let val = first.eval(&[&vectors[i], &vectors[j]]);
                    if val == 0.0 {
                        continue;
                    }
                    used[i] = true;
                    used[j] = true;
                    order.push(i);
                    order.push(j);
                    acc += val * shuffle_sum(rest, vectors, order, used);
                    order.truncate(order.len() - 2);
                    used[i] = false;
                    used[j] = false;
                }
            }
        }
    }
    acc
}

fn permutation_sign(p: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
