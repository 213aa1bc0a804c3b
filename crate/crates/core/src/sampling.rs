//! Seeded random sampling: per-sample generators, unit vectors, cotangent
//! points, stratified momenta and rotations.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cotangent::CotangentPoint;
use crate::profile::{Bump, TwistProfile};

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one sample, derived only from `seed` and the stream labels,
/// so results do not depend on evaluation order.
pub fn rng_for(seed: u64, stream: &[u64]) -> ChaCha8Rng {
    let mixed = stream
        .iter()
        .fold(splitmix(seed), |acc, &s| splitmix(acc ^ splitmix(s)));
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Stable 64-bit label for a check name.
pub fn label(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vec(rng, n);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Unit `q` and `p ⊥ q` with `|p| = radius`.
pub fn cotangent_point<R: Rng>(rng: &mut R, n: usize, radius: f64) -> CotangentPoint {
    let q = unit_vector(rng, n);
    let p = loop {
        let mut v = gaussian_vec(rng, n);
        let d: f64 = v.iter().zip(&q).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(&q).for_each(|(a, b)| *a -= d * b);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            break v.into_iter().map(|x| radius * x / norm).collect();
        }
    };
    CotangentPoint::new_unchecked(q, p)
}

/// Momentum norm for sample `index`: a quarter in `[0, 1/c_k]`, half in the
/// transition `[1/c_k, 2/c_k]`, a quarter in `[2/c_k, 20/c_k]`.
pub fn stratified_radius<R: Rng, B: Bump>(
    rng: &mut R,
    profile: &TwistProfile<B>,
    index: usize,
) -> f64 {
    let (a, b) = profile.transition();
    let u: f64 = rng.random();
    match index % 4 {
        0 => a * u,
        1 | 2 => a + (b - a) * u,
        _ => b + 9.0 * b * u,
    }
}

/// Haar-random element of `SO(n)`, row-major.
pub fn rotation<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    (0..n)
        .map(|i| (0..n).map(|j| q[(i, j)]).collect())
        .collect()
}

/// Random unit combination of the vectors in `basis`.
pub fn combination<R: Rng>(rng: &mut R, basis: &[Vec<f64>]) -> Vec<f64> {
    let w = unit_vector(rng, basis.len());
    let dim = basis[0].len();
    let mut v = vec![0.0; dim];
    for (c, b) in w.iter().zip(basis) {
        v.iter_mut().zip(b).for_each(|(a, x)| *a += c * x);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = rng_for(7, &[1, 2]).random();
        let b: f64 = rng_for(7, &[1, 2]).random();
        let c: f64 = rng_for(7, &[2, 1]).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rotation_is_special_orthogonal() {
        let mut rng = rng_for(3, &[]);
        for n in 2..=4 {
            let a = rotation(&mut rng, n);
            let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
            let err = (m.transpose() * &m - DMatrix::identity(n, n)).abs().max();
            assert!(err < 1e-12);
            assert!((m.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cotangent_sample_satisfies_constraints() {
        let mut rng = rng_for(5, &[]);
        let pt = cotangent_point(&mut rng, 4, 0.3);
        assert!(pt.constraint_residual() < 1e-14);
        assert!((pt.p_norm() - 0.3).abs() < 1e-15);
    }
}
