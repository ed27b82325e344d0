//! Simultaneous root finding (Aberth–Ehrlich) and the lemniscate–circle
//! intersection solver.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{self, CoeffPoly};

/// Iteration cap for the simultaneous iteration.
pub const MAX_ITERATIONS: usize = 200;

/// Roots of a polynomial together with their residuals.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// A group of numerically coincident roots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cluster {
    pub center: Complex64,
    pub multiplicity: usize,
}

impl RootSet {
    /// Errors with `NoConvergence` unless every root converged.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence {
                iterations: self.iterations,
            })
        }
    }

    /// Groups roots closer than `1e-6 * max(1, max |root|)` (single linkage).
    pub fn clusters(&self) -> Vec<Cluster> {
        let scale = self.roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
        cluster_points(&self.roots, 1e-6 * scale)
    }
}

/// Single-linkage clustering of points at distance `tol`.
pub fn cluster_points(points: &[Complex64], tol: f64) -> Vec<Cluster> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut j = i;
        while parent[j] != r {
            let next = parent[j];
            parent[j] = r;
            j = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut out: Vec<(usize, Complex64, usize)> = Vec::new();
    for (i, z) in points.iter().enumerate() {
        let root = find(&mut parent, i);
        match out.iter_mut().find(|(r, _, _)| *r == root) {
            Some(entry) => {
                entry.1 += z;
                entry.2 += 1;
            }
            None => out.push((root, *z, 1)),
        }
    }
    out.into_iter()
        .map(|(_, sum, m)| Cluster {
            center: sum / m as f64,
            multiplicity: m,
        })
        .collect()
}

/// All roots of a monic polynomial.
///
/// Non-convergence is reported through `converged = false`, with the best
/// iterate returned; use [`RootSet::require_converged`] to turn it into an error.
pub fn all_roots(p: &CoeffPoly) -> RootSet {
    solve(p.coeffs(), None)
}

/// Roots of `p(z) - w`, optionally continued from a previous root set.
pub fn fiber(p: &CoeffPoly, w: Complex64, warm_start: Option<&RootSet>) -> RootSet {
    let mut coeffs = p.coeffs().to_vec();
    coeffs[0] -= w;
    solve(&coeffs, warm_start.map(|r| r.roots.as_slice()))
}

/// Roots of the polynomial with coefficients `coeffs` (lowest degree first,
/// nonzero leading coefficient). A warm start with the right number of
/// entries replaces the default initial guesses.
pub fn solve(coeffs: &[Complex64], warm_start: Option<&[Complex64]>) -> RootSet {
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg] == Complex64::new(0.0, 0.0) {
        deg -= 1;
    }
    let coeffs = &coeffs[..=deg];

    let mut zeros = 0;
    while zeros < deg && coeffs[zeros] == Complex64::new(0.0, 0.0) {
        zeros += 1;
    }
    let reduced = &coeffs[zeros..];
    let m = reduced.len() - 1;

    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let mut iterations = 0;
    let mut converged = true;
    if m > 0 {
        let start = match warm_start {
            Some(w) if w.len() == deg && zeros == 0 => w.to_vec(),
            _ => initial_guesses(reduced),
        };
        let (found, iters, ok) = aberth(reduced, start);
        roots.extend(found);
        iterations = iters;
        converged = ok;
    }
    let residuals = roots.iter().map(|z| poly::horner(coeffs, *z).norm()).collect();
    RootSet {
        roots,
        residuals,
        converged,
        iterations,
    }
}

/// Initial points on circles whose radii come from the upper convex hull of
/// `(k, ln |c_k|)`, so that roots of very different magnitudes start near the
/// right scale.
fn initial_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let pts: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(k, c)| (k, c.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut guesses = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (k0, l0) = w[0];
        let (k1, l1) = w[1];
        let count = k1 - k0;
        let radius = ((l0 - l1) / count as f64).exp();
        for j in 0..count {
            let angle = 2.0 * PI * j as f64 / count as f64 + 2.0 * PI * k1 as f64 / n as f64 + 0.4;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}

fn aberth(coeffs: &[Complex64], mut z: Vec<Complex64>) -> (Vec<Complex64>, usize, bool) {
    let n = z.len();
    let abs: Vec<f64> = coeffs.iter().map(|c| c.norm()).collect();
    let mut frozen = vec![false; n];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && frozen.iter().any(|f| !f) {
        iterations += 1;
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            let zi = z[i];
            let (p, dp) = horner_with_derivative(coeffs, zi);
            let bound = 4.0 * f64::EPSILON * horner_abs(&abs, zi.norm());
            if p.norm() <= bound {
                frozen[i] = true;
                continue;
            }
            let ratio = if dp.norm() == 0.0 {
                // Stationary point of p; push the iterate off it.
                Complex64::from_polar(1e-3 * zi.norm().max(1e-3), 0.7 + i as f64)
            } else {
                p / dp
            };
            let mut repulse = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    let d = zi - zj;
                    if d.norm() > 0.0 {
                        repulse += d.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * repulse;
            let step = if denom.norm() == 0.0 || !denom.is_finite() { ratio } else { ratio / denom };
            if !step.is_finite() {
                continue;
            }
            z[i] = zi - step;
            if step.norm() <= 2.0 * f64::EPSILON * z[i].norm() {
                frozen[i] = true;
            }
        }
    }
    let converged = frozen.iter().all(|f| *f) || all_small_residual(coeffs, &abs, &z);
    for zi in z.iter_mut() {
        polish(coeffs, zi);
    }
    (z, iterations, converged)
}

fn all_small_residual(coeffs: &[Complex64], abs: &[f64], z: &[Complex64]) -> bool {
    z.iter().all(|zi| {
        let (p, _) = horner_with_derivative(coeffs, *zi);
        p.norm() <= 64.0 * f64::EPSILON * horner_abs(abs, zi.norm())
    })
}

/// One Newton step, kept only if it lowers the residual.
fn polish(coeffs: &[Complex64], z: &mut Complex64) {
    let (p, dp) = horner_with_derivative(coeffs, *z);
    if dp.norm() == 0.0 || p.norm() == 0.0 {
        return;
    }
    let candidate = *z - p / dp;
    if candidate.is_finite() && poly::horner(coeffs, candidate).norm() < p.norm() {
        *z = candidate;
    }
}

pub(crate) fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let (mut p, mut d) = (zero, zero);
    for c in coeffs.iter().rev() {
        d = d * z + p;
        p = p * z + c;
    }
    (p, d)
}

pub(crate) fn horner_abs(abs: &[f64], r: f64) -> f64 {
    abs.iter().rev().fold(0.0, |acc, c| acc * r + c)
}

/// Points where the lemniscate `|p| = 1` meets the circle `|z| = r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircleSection {
    pub radius: f64,
    pub points: Vec<Complex64>,
    /// Per point: the crossing is (numerically) tangential.
    pub tangent: Vec<bool>,
    pub full_circle: bool,
}

/// Coefficients of `p(z) s(z) - z^n` with `s(z) = sum conj(c_k) r^{2k} z^{n-k}`:
/// on `|z| = r` this is `z^n (|p(z)|^2 - 1)`.
pub fn circle_polynomial(p: &CoeffPoly, r: f64) -> Vec<Complex64> {
    let c = p.coeffs();
    let n = p.degree();
    let r2 = r * r;
    let mut s = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut rk = 1.0;
    for k in 0..=n {
        s[n - k] = c[k].conj() * rk;
        rk *= r2;
    }
    let mut q = poly::mul(c, &s);
    q[n] -= 1.0;
    q
}

pub fn circle_intersections(p: &CoeffPoly, r: f64) -> Result<CircleSection> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::BadParameter(format!("radius must be positive, got {r}")));
    }
    let n = p.degree();
    let q = circle_polynomial(p, r);
    let scale = q.iter().map(|c| c.norm()).fold(1.0, f64::max);
    if q.iter().all(|c| c.norm() < 1e-12 * scale) {
        return Ok(CircleSection {
            radius: r,
            points: Vec::new(),
            tangent: Vec::new(),
            full_circle: true,
        });
    }
    let mut top = q.len() - 1;
    while top > 0 && q[top].norm() <= 1e-15 * scale {
        top -= 1;
    }
    let trimmed = &q[..=top];
    let mut points = Vec::new();
    if trimmed.len() > 1 {
        let set = solve(trimmed, None).require_converged()?;
        let filter_tol = 1e-6 * r;
        for z in set.roots {
            if (z.norm() - r).abs() <= filter_tol {
                points.push(polish_on_circle(p, r, z));
            }
        }
    }
    let dedupe_tol = 1e-8 * r.max(1.0);
    let mut merged: Vec<(Complex64, usize)> = Vec::new();
    for z in points {
        match merged.iter_mut().find(|(m, _)| (m - z).norm() <= dedupe_tol) {
            Some(entry) => entry.1 += 1,
            None => merged.push((z, 1)),
        }
    }
    merged.sort_by(|a, b| a.0.arg().total_cmp(&b.0.arg()));
    let tangent = merged
        .iter()
        .map(|(z, mult)| *mult > 1 || crossing_sine(p, *z).abs() < 1e-7)
        .collect();
    let points: Vec<Complex64> = merged.into_iter().map(|(z, _)| z).collect();
    debug_assert!(points.len() <= 2 * n);
    Ok(CircleSection {
        radius: r,
        points,
        tangent,
        full_circle: false,
    })
}

/// `sin arg(p / (z p'))` at a point; zero when the lemniscate touches the circle.
pub fn crossing_sine(p: &CoeffPoly, z: Complex64) -> f64 {
    let (v, d1, _) = p.eval_all(z);
    let w = v / (z * d1);
    if !w.is_finite() || w.norm() == 0.0 {
        return 0.0;
    }
    w.im / w.norm()
}

/// Newton on the angle `t` for `ln |p(r e^{it})| = 0`.
fn polish_on_circle(p: &CoeffPoly, r: f64, z0: Complex64) -> Complex64 {
    let mut t = z0.arg();
    let mut best = Complex64::from_polar(r, t);
    let mut best_res = (p.eval(best).norm() - 1.0).abs();
    for _ in 0..4 {
        let z = Complex64::from_polar(r, t);
        let (v, d1, _) = p.eval_all(z);
        if v.norm() == 0.0 {
            break;
        }
        let f = v.norm().ln();
        let df = (d1 / v * z * Complex64::i()).re;
        if df == 0.0 || !df.is_finite() {
            break;
        }
        let next = t - f / df;
        let zn = Complex64::from_polar(r, next);
        let res = (p.eval(zn).norm() - 1.0).abs();
        if res < best_res {
            best = zn;
            best_res = res;
            t = next;
        } else {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{family, Family};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn contains(set: &[Complex64], z: Complex64, tol: f64) -> bool {
        set.iter().any(|r| (r - z).norm() < tol)
    }

    #[test]
    fn roots_of_unity() {
        let p = family(Family::P0, 3, 0.0).unwrap();
        let set = all_roots(p.poly()).require_converged().unwrap();
        for k in 0..3 {
            assert!(contains(&set.roots, Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0), 1e-13));
        }
    }

    #[test]
    fn cassini_roots() {
        let p = family(Family::Cassini, 2, 1.5).unwrap();
        let set = all_roots(p.poly());
        assert!(contains(&set.roots, c(1.5, 0.0), 1e-13));
        assert!(contains(&set.roots, c(-1.5, 0.0), 1e-13));
    }

    #[test]
    fn example1_critical_points() {
        let spec = family(Family::Example1, 9, 0.5).unwrap();
        let recovered = spec.poly().to_critical_spec();
        let pts = recovered.critical_points();
        assert_eq!(pts.len(), 8);
        assert!(contains(pts, c(0.5, 0.0), 1e-10));
        assert!(contains(pts, c(-0.5, 0.0), 1e-10));
        // A sixfold zero is only resolved to about eps^(1/6).
        assert_eq!(pts.iter().filter(|z| z.norm() < 1e-2).count(), 6);
    }

    #[test]
    fn clusters_report_multiplicity() {
        let p = CoeffPoly::from_roots(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let set = all_roots(&p);
        let mut cl = set.clusters();
        cl.sort_by_key(|c| c.multiplicity);
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[1].multiplicity, 2);
    }

    #[test]
    fn fiber_of_p0() {
        let n = 7;
        let p = family(Family::P0, n, 0.0).unwrap();
        for alpha in [0.0, 1.0, 2.5, -3.0] {
            let w = Complex64::from_polar(1.0, alpha);
            let set = fiber(p.poly(), w, None);
            let radius = (Complex64::new(1.0, 0.0) + w).norm().powf(1.0 / n as f64);
            for z in &set.roots {
                assert!((z.norm() - radius).abs() < 1e-12, "alpha={alpha}");
            }
        }
    }

    #[test]
    fn fiber_double_root() {
        let p = family(Family::Cassini, 2, 1.0).unwrap();
        let set = fiber(p.poly(), c(-1.0, 0.0), None);
        let cl = set.clusters();
        assert_eq!(cl.len(), 1);
        assert_eq!(cl[0].multiplicity, 2);
        assert!(cl[0].center.norm() < 1e-12);
    }

    #[test]
    fn warm_start_keeps_order() {
        let n = 5;
        let p = family(Family::P0, n, 0.0).unwrap();
        let mut prev = fiber(p.poly(), c(1.0, 0.0), None);
        let steps = 200;
        for j in 1..=steps {
            let alpha = 0.99 * PI * j as f64 / steps as f64;
            let next = fiber(p.poly(), Complex64::from_polar(1.0, alpha), Some(&prev));
            let gap = min_gap(&prev.roots);
            for (a, b) in prev.roots.iter().zip(&next.roots) {
                assert!((a - b).norm() < gap / 2.0, "j={j}");
            }
            prev = next;
        }
    }

    fn min_gap(z: &[Complex64]) -> f64 {
        let mut g = f64::INFINITY;
        for i in 0..z.len() {
            for j in i + 1..z.len() {
                g = g.min((z[i] - z[j]).norm());
            }
        }
        g
    }

    #[test]
    fn circle_counts() {
        let p0 = family(Family::P0, 9, 0.0).unwrap();
        let sec = circle_intersections(p0.poly(), 0.5).unwrap();
        assert_eq!(sec.points.len(), 18);
        assert!(!sec.full_circle);
        for z in &sec.points {
            assert!((p0.poly().eval(*z).norm() - 1.0).abs() < 1e-12);
            assert!((z.norm() - 0.5).abs() < 1e-12);
        }

        let far = CoeffPoly::monic(vec![c(-100.0, 0.0), c(1.0, 0.0)]).unwrap();
        let sec = circle_intersections(&far, 1.0).unwrap();
        assert!(sec.points.is_empty() && !sec.full_circle);

        let ident = CoeffPoly::monic(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(circle_intersections(&ident, 1.0).unwrap().full_circle);
        assert!(circle_intersections(&ident, 0.0).is_err());
    }

    #[test]
    fn circle_polynomial_vanishes_on_lemniscate() {
        let spec = family(Family::Example1, 5, 0.3).unwrap();
        let p = spec.poly();
        let q = circle_polynomial(p, 0.8);
        let z = Complex64::from_polar(0.8, 0.3);
        let lhs = poly::horner(&q, z);
        let rhs = z.powu(5) * (p.eval(z).norm_sqr() - 1.0);
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
