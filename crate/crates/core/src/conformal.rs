//! Exterior conformal data of sublevel sets `E_R = {|p| < R}`, `R > 1`.
//!
//! The map `F(w) = w + a_0 + sum_k a_k w^{-k}` satisfies `p(F(w)) = w^n`; its
//! boundary values on `|w| = R^{1/n}` are found by continuation in the level.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::CoeffPoly;

const NEWTON_ITERATIONS: usize = 40;
const LEVEL_FACTOR: f64 = 0.7;
const MIN_LOG_STEP: f64 = 1e-7;

#[derive(Clone, Debug, Serialize)]
pub struct LaurentData {
    pub level: f64,
    pub degree: usize,
    /// `a_1 .. a_K`.
    pub coeffs: Vec<Complex64>,
    pub a_minus1: Complex64,
    pub a0: Complex64,
    /// `|a_{-1} - 1|`.
    pub capacity_check: f64,
    /// Boundary points `z(theta_j)`.
    #[serde(skip)]
    pub samples: Vec<Complex64>,
    /// `|a_K| R^{-K/n}`.
    pub tail: f64,
    /// `pi * sum_{k > K} k |a_k|^2 R^{-2k/n}` from the coefficients beyond `K`
    /// that the sampling still resolves.
    pub truncated_area: f64,
}

impl LaurentData {
    /// `R^{1/n}`.
    pub fn radius(&self) -> f64 {
        self.level.powf(1.0 / self.degree as f64)
    }

    /// Whether the last kept coefficient is below `1e-10 R^{1/n}`.
    pub fn tail_converged(&self) -> bool {
        self.tail <= 1e-10 * self.radius()
    }

    fn weighted(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let rho = self.radius();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, a)| ((i + 1) as f64, a.norm() * rho.powi(-(i as i32 + 1))))
    }
}

fn check_level(p: &CoeffPoly, level: f64) -> Result<()> {
    if !(level > 1.0) || !level.is_finite() {
        return Err(Error::BadParameter(format!("level must exceed 1, got {level}")));
    }
    let n = p.degree();
    let c = p.coeffs();
    let tol = 1e-9 * p.scale();
    if n >= 2 && c[n - 1].norm() > tol {
        return Err(Error::Precondition("polynomial is not centred (z^{n-1} coefficient nonzero)".into()));
    }
    if c[0].im.abs() > tol || c[0].re > tol {
        return Err(Error::Precondition("constant term must be a nonpositive real".into()));
    }
    Ok(())
}

/// Newton for `p(z) = target`; `None` when it fails to settle.
fn newton(p: &CoeffPoly, mut z: Complex64, target: Complex64) -> Option<Complex64> {
    let tol = 1e-14 * target.norm().max(1.0);
    for _ in 0..NEWTON_ITERATIONS {
        let (v, d, _) = p.eval_all(z);
        let r = v - target;
        if r.norm() <= tol {
            return Some(z);
        }
        if d.norm() == 0.0 {
            return None;
        }
        z -= r / d;
        if !z.is_finite() {
            return None;
        }
    }
    let r = p.eval(z) - target;
    (r.norm() <= 1e3 * tol).then_some(z)
}

/// The samples must wind once around the origin in order, with each step
/// turning by less than a quarter turn.
fn ordered(points: &[Complex64]) -> bool {
    let m = points.len();
    let mut total = 0.0;
    for j in 0..m {
        let step = (points[(j + 1) % m] / points[j]).arg();
        if !(step > 0.0 && step < 0.5 * PI) {
            return false;
        }
        total += step;
    }
    (total - 2.0 * PI).abs() < 1e-6
}

/// `M` points of `{|p| = R}` at `p(z_j) = R e^{i n theta_j}`, `theta_j = 2 pi j / M`.
pub fn boundary_param(p: &CoeffPoly, level: f64, m: usize) -> Result<Vec<Complex64>> {
    check_level(p, level)?;
    let n = p.degree();
    if !m.is_power_of_two() || m < 8 * n {
        return Err(Error::BadParameter(format!("sample count {m} must be a power of two >= {}", 8 * n)));
    }
    let nf = n as f64;
    let cmax = p.coeffs()[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let start = level.max((2.0 * (1.0 + cmax)).powi(n as i32));
    let theta: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
    let targets = |r: f64| -> Vec<Complex64> { theta.iter().map(|t| Complex64::from_polar(r, nf * t)).collect() };

    let rho = start.powf(1.0 / nf);
    let initial: Option<Vec<Complex64>> = theta
        .par_iter()
        .zip(targets(start))
        .map(|(t, w)| newton(p, Complex64::from_polar(rho, *t), w))
        .collect();
    let mut points = initial.filter(|z| ordered(z)).ok_or(Error::HomotopyStall { level: start })?;

    let mut current = start;
    let mut log_step = -LEVEL_FACTOR.ln();
    while current > level {
        let next = (current * (-log_step).exp()).max(level);
        let dl = (next / current).ln();
        let goal = targets(next);
        // Euler predictor in ln R: dz/d(ln R) = p / p'.
        let moved: Option<Vec<Complex64>> = points
            .par_iter()
            .zip(&goal)
            .map(|(z, w)| {
                let (v, d, _) = p.eval_all(*z);
                let guess = if d.norm() > 0.0 { z + v / d * dl } else { *z };
                newton(p, guess, *w)
            })
            .collect();
        match moved.filter(|z| ordered(z)) {
            Some(z) => {
                points = z;
                current = next;
                log_step = (log_step * 1.5).min(-LEVEL_FACTOR.ln());
            }
            None => {
                log_step *= 0.5;
                if log_step < MIN_LOG_STEP {
                    return Err(Error::HomotopyStall { level: current });
                }
            }
        }
    }
    Ok(points)
}

/// Default sample count for a degree and coefficient count.
pub fn default_samples(n: usize, k: usize) -> usize {
    (32 * n).max(8 * n).max(4 * k).next_power_of_two()
}

/// Laurent coefficients `a_1..a_K` of the exterior map of `E_R`.
pub fn laurent_coeffs(p: &CoeffPoly, level: f64, k: usize) -> Result<LaurentData> {
    let n = p.degree();
    let m = default_samples(n, k);
    let samples = boundary_param(p, level, m)?;
    let k = if k == 0 { (4 * n).min(m / 4) } else { k.min(m / 4) };
    let mut spectrum = samples.clone();
    FftPlanner::new().plan_fft_forward(m).process(&mut spectrum);
    let scale = 1.0 / m as f64;
    for c in spectrum.iter_mut() {
        *c *= scale;
    }
    let rho = level.powf(1.0 / n as f64);
    // Frequency +1 carries a_{-1} rho, frequency 0 carries a_0 and frequency
    // -k (index m-k) carries a_k rho^{-k}.
    let a_minus1 = spectrum[1] / rho;
    let a0 = spectrum[0];
    let coeff = |j: usize| spectrum[m - j] * rho.powi(j as i32);
    let coeffs: Vec<Complex64> = (1..=k).map(coeff).collect();
    let tail = coeffs.last().map_or(0.0, |a| a.norm() * rho.powi(-(k as i32)));
    let truncated_area = PI
        * (k + 1..m / 2)
            .map(|j| j as f64 * (spectrum[m - j].norm_sqr()))
            .sum::<f64>();
    Ok(LaurentData {
        level,
        degree: n,
        coeffs,
        a_minus1,
        a0,
        capacity_check: (a_minus1 - 1.0).norm(),
        samples,
        tail,
        truncated_area,
    })
}

/// `pi R^{2/n} - pi sum_k k |a_k|^2 R^{-2k/n}`.
pub fn gronwall_area(data: &LaurentData) -> f64 {
    let rho = data.radius();
    PI * (rho * rho - data.weighted().map(|(k, a)| k * a * a).sum::<f64>())
}

/// `2 pi (R^{2/n} + sum_k k^2 |a_k|^2 R^{-2k/n})^{1/2}`.
pub fn perimeter_bound(data: &LaurentData) -> f64 {
    let rho = data.radius();
    let s: f64 = data.weighted().map(|(k, a)| k * k * a * a).sum();
    2.0 * PI * (rho * rho + s).sqrt()
}

/// Radii with `D(0, inner) in E_R in closed D(0, outer)`.
pub fn inclusion_radii(data: &LaurentData) -> (f64, f64) {
    let rho = data.radius();
    let s: f64 = data.weighted().map(|(_, a)| a).sum();
    ((rho - s).max(0.0), rho + s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{family, Family};
    use crate::trace::trace_lemniscate;
    use crate::QuadratureBudget;

    fn p0(n: usize) -> CoeffPoly {
        family(Family::P0, n, 0.0).unwrap().poly().clone()
    }

    #[test]
    fn p0_boundary_inverts_directly() {
        let p = p0(4);
        let pts = boundary_param(&p, 2.0, 64).unwrap();
        for (j, z) in pts.iter().enumerate() {
            let t = 2.0 * PI * j as f64 / 64.0;
            let target = 1.0 + Complex64::from_polar(2.0, 4.0 * t);
            assert!((z.powi(4) - target).norm() < 1e-10);
        }
    }

    #[test]
    fn p0_laurent_leading_coefficient() {
        for n in [3usize, 9] {
            let d = laurent_coeffs(&p0(n), 4.0, 0).unwrap();
            assert!(d.capacity_check < 1e-10 && d.a0.norm() < 1e-10);
            let lead = d.coeffs[n - 2];
            assert!((lead - 1.0 / n as f64).norm() < 1e-10, "{lead}");
            for (i, a) in d.coeffs.iter().enumerate().take(n - 2) {
                assert!(a.norm() < 1e-12, "a_{} = {a}", i + 1);
            }
        }
    }

    #[test]
    fn zero_coefficients_give_the_circle() {
        let d = LaurentData {
            level: 8.0,
            degree: 3,
            coeffs: vec![Complex64::new(0.0, 0.0); 4],
            a_minus1: Complex64::new(1.0, 0.0),
            a0: Complex64::new(0.0, 0.0),
            capacity_check: 0.0,
            samples: vec![],
            tail: 0.0,
            truncated_area: 0.0,
        };
        assert!((gronwall_area(&d) - 4.0 * PI).abs() < 1e-12);
        assert!((perimeter_bound(&d) - 4.0 * PI).abs() < 1e-12);
        assert_eq!(inclusion_radii(&d), (2.0, 2.0));
    }

    #[test]
    fn perimeter_bound_dominates_trace() {
        let budget = QuadratureBudget::default();
        let p = p0(9);
        let d = laurent_coeffs(&p, 4.0, 0).unwrap();
        let traced = trace_lemniscate(&p, 4.0, &budget).unwrap().length();
        let circle = 2.0 * PI * 4f64.powf(1.0 / 9.0);
        let bound = perimeter_bound(&d);
        assert!(bound >= traced);
        assert!((bound / circle - 1.0).abs() < 0.15 && (traced / circle - 1.0).abs() < 0.15);
        let ex1 = family(Family::Example1, 9, 0.5).unwrap().poly().clone();
        let d = laurent_coeffs(&ex1, 4.0, 0).unwrap();
        assert!(perimeter_bound(&d) >= trace_lemniscate(&ex1, 4.0, &budget).unwrap().length());
    }

    #[test]
    fn inclusions_hold_for_example1() {
        let spec = family(Family::Example1, 9, 0.5).unwrap();
        let p = spec.poly().clone();
        let d = laurent_coeffs(&p, 2.0, 0).unwrap();
        let (inner, outer) = inclusion_radii(&d);
        assert!(spec.critical_points().iter().all(|z| z.norm() <= outer));
        for j in 0..64 {
            let u = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 64.0);
            assert!(p.eval(u * inner * 0.999).norm() < 2.0);
            assert!(p.eval(u * outer * 1.001).norm() > 2.0);
        }
    }

    #[test]
    fn level_below_critical_value_stalls() {
        // Critical values of z^2 - 4 sit at |p(0)| = 4 > 1.5.
        let p = CoeffPoly::monic(vec![Complex64::new(-4.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        assert!(matches!(boundary_param(&p, 1.5, 64), Err(Error::HomotopyStall { .. })));
        assert!(matches!(boundary_param(&p, 0.5, 64), Err(Error::BadParameter(_))));
    }
}
