//! Dense `f64` vector helpers shared across the crate.

use rand::Rng;
use rand_distr::StandardNormal;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn is_zero(a: &[f64]) -> bool {
    a.iter().all(|&v| v == 0.0)
}

pub fn basis(d: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[i] = 1.0;
    e
}

/// Uniformly random direction on the unit sphere in `d` dimensions.
pub fn random_unit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&g);
        if n > 1e-12 {
            return scaled(1.0 / n, &g);
        }
    }
}

/// Uniform sample from the unit ball in `d` dimensions.
pub fn random_in_ball<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    if d == 0 {
        return Vec::new();
    }
    let dir = random_unit(d, rng);
    let r: f64 = rng.random::<f64>().powf(1.0 / d as f64);
    scaled(r, &dir)
}

/// Removes the component of `v` along the unit vector `u`.
pub fn reject(v: &[f64], u: &[f64]) -> Vec<f64> {
    let c = dot(v, u);
    v.iter().zip(u).map(|(a, b)| a - c * b).collect()
}
