//! Seeded random inputs shared by the verification battery, the search and
//! the tests.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::poly::{CoeffPoly, CriticalSpec};
use crate::region::Region;

pub const DEFAULT_SEED: u64 = 0x4548_5031;

/// Independent generator for one named stream of a seed.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Uniform point in `D(center, radius)`.
pub fn point_in_disk<R: Rng>(rng: &mut R, center: Complex64, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    center + Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>())
}

/// Random complex vector of length `n` with moduli in `[0, 1)`.
pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| point_in_disk(rng, Complex64::new(0.0, 0.0), 1.0)).collect()
}

/// Normalized spec with prescribed dispersion `l1` and origin repulsion `l0`.
pub fn normalized_with_norms<R: Rng>(rng: &mut R, n: usize, l1: f64, l0: f64) -> Result<CriticalSpec> {
    let mut pts: Vec<Complex64> = random_vector(rng, n - 1);
    let mean = pts.iter().sum::<Complex64>() / (n - 1) as f64;
    for z in &mut pts {
        *z -= mean;
    }
    let size: f64 = pts.iter().map(|z| z.norm()).sum();
    if size > 0.0 {
        for z in &mut pts {
            *z *= l1 / size;
        }
    }
    let shift = (l0 / n as f64).powi(n as i32);
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let c0 = (-1.0 + sign * shift).min(0.0);
    CriticalSpec::normalized(pts, Complex64::new(c0, 0.0))
}

/// Normalized spec of total size `size`, split randomly between dispersion
/// and origin repulsion.
pub fn normalized_of_size<R: Rng>(rng: &mut R, n: usize, size: f64) -> Result<CriticalSpec> {
    let t: f64 = rng.random();
    normalized_with_norms(rng, n, size * t, size * (1.0 - t))
}

/// Monic polynomial with `n` roots uniform in `D(0, radius)`.
pub fn random_monic<R: Rng>(rng: &mut R, n: usize, radius: f64) -> Result<CoeffPoly> {
    let roots: Vec<Complex64> = (0..n)
        .map(|_| point_in_disk(rng, Complex64::new(0.0, 0.0), radius))
        .collect();
    CoeffPoly::from_roots(&roots)
}

/// Ten normalized polynomials with degree at most 9 and size at most 0.5.
pub fn conformal_suite(seed: u64) -> Result<Vec<CriticalSpec>> {
    let mut r = rng(seed, 1);
    (0..10)
        .map(|_| {
            let n = r.random_range(3..=9);
            let size = r.random_range(0.05..0.5);
            normalized_of_size(&mut r, n, size)
        })
        .collect()
}

/// Twenty normalized polynomials with the annulus they are measured on;
/// every critical point lies well inside the inner radius.
pub fn agreement_suite(seed: u64) -> Result<Vec<(CriticalSpec, Region)>> {
    let mut r = rng(seed, 2);
    (0..20)
        .map(|_| {
            let n = r.random_range(3..=9);
            let size = r.random_range(0.05..0.5);
            let spec = normalized_of_size(&mut r, n, size)?;
            let reach = spec.critical_points().iter().map(|z| z.norm()).fold(0.0, f64::max);
            let inner = (reach + 0.2).max(0.6);
            Ok((spec, Region::annulus(Complex64::new(0.0, 0.0), inner, 3.0)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prescribed_norms_are_met() {
        let mut r = rng(DEFAULT_SEED, 0);
        for n in [3usize, 6, 9] {
            let spec = normalized_with_norms(&mut r, n, 0.3, 0.2).unwrap();
            let norms = spec.norms();
            assert!((norms.l1_dispersion - 0.3).abs() < 1e-12);
            // `1 + p(0)` is tiny here, so it carries only a few correct digits.
            assert!((norms.origin_repulsion - 0.2).abs() < 2e-3, "{norms:?}");
            assert!(spec.is_normalized());
        }
    }

    #[test]
    fn suites_are_deterministic() {
        let a = conformal_suite(7).unwrap();
        let b = conformal_suite(7).unwrap();
        assert_eq!(a, b);
        assert_eq!(agreement_suite(7).unwrap().len(), 20);
    }
}
