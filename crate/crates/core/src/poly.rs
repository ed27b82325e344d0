//! Monic polynomials in two coordinate systems.
//!
//! [`CriticalSpec`] stores a monic polynomial of degree `n` through its `n - 1`
//! critical points and its value at the origin; [`CoeffPoly`] is the dense
//! coefficient form used for evaluation and root finding. The critical form is
//! the source of truth; the coefficient form is derived on demand and cached.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots;

/// Denominators below this magnitude are treated as exact zeros.
pub const POLE_TOLERANCE: f64 = 1e-300;

/// Dense monic polynomial `c_0 + c_1 z + ... + z^n`, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffPoly {
    coeffs: Vec<Complex64>,
}

impl CoeffPoly {
    /// Builds a monic polynomial; the last coefficient must be exactly `1`.
    pub fn monic(coeffs: Vec<Complex64>) -> Result<Self> {
        match coeffs.last() {
            None => Err(Error::BadParameter("empty coefficient list".into())),
            Some(_) if coeffs.len() < 2 => Err(Error::BadParameter("degree must be at least 1".into())),
            Some(lead) if *lead != Complex64::new(1.0, 0.0) => Err(Error::BadParameter(format!(
                "leading coefficient must be exactly 1, got {lead}"
            ))),
            Some(_) => Ok(Self { coeffs }),
        }
    }

    /// `prod (z - r)` over the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            coeffs = mul(&coeffs, &[-r, Complex64::new(1.0, 0.0)]);
        }
        *coeffs.last_mut().unwrap() = Complex64::new(1.0, 0.0);
        Self::monic(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Largest coefficient magnitude.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.coeffs, z)
    }

    /// `(p(z), p'(z), p''(z))` in one Horner pass.
    pub fn eval_all(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let (mut p, mut d1, mut d2) = (zero, zero, zero);
        for c in self.coeffs.iter().rev() {
            d2 = d2 * z + d1;
            d1 = d1 * z + p;
            p = p * z + c;
        }
        (p, d1, d2 * 2.0)
    }

    /// Coefficients of `p'`, lowest degree first (not monic).
    pub fn derivative_coeffs(&self) -> Vec<Complex64> {
        derivative(&self.coeffs)
    }

    /// `phi = p'/p`.
    pub fn phi(&self, z: Complex64) -> Result<Complex64> {
        let (p, d1, _) = self.eval_all(z);
        if p.norm() < POLE_TOLERANCE {
            return Err(Error::PoleAtZ { z, which: "p'/p" });
        }
        Ok(d1 / p)
    }

    /// `psi = p''/p'`.
    pub fn psi(&self, z: Complex64) -> Result<Complex64> {
        let (_, d1, d2) = self.eval_all(z);
        if d1.norm() < POLE_TOLERANCE {
            return Err(Error::PoleAtZ { z, which: "p''/p'" });
        }
        Ok(d2 / d1)
    }

    /// `(phi(z), psi(z))`; fails if either denominator vanishes.
    pub fn log_derivatives(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        Ok((self.phi(z)?, self.psi(z)?))
    }

    /// The polynomial with conjugated coefficients, so that `p~(conj z) = conj p(z)`.
    pub fn conjugate(&self) -> CoeffPoly {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    /// Taylor coefficients `p^(k)(c) / k!` at the point `c`.
    pub fn taylor_at(&self, c: Complex64) -> Vec<Complex64> {
        taylor(&self.coeffs, c)
    }

    /// Translates and rotates onto the normalized representative: zero
    /// `z^{n-1}` coefficient and constant term on the nonpositive real axis.
    pub fn normalize(&self) -> Normalized {
        let n = self.degree();
        let shift = self.coeffs[n - 1] / n as f64;
        let mut q = taylor(&self.coeffs, -shift);
        q[n - 1] = Complex64::new(0.0, 0.0);
        q[n] = Complex64::new(1.0, 0.0);

        let period = 2.0 * PI / n as f64;
        let rotation = if q[0].norm() == 0.0 {
            0.0
        } else {
            ((q[0].arg() - PI) / n as f64).rem_euclid(period)
        };
        let rotation = if rotation >= period { 0.0 } else { rotation };
        let mut coeffs: Vec<Complex64> = q
            .iter()
            .enumerate()
            .map(|(k, c)| c * Complex64::from_polar(1.0, (k as f64 - n as f64) * rotation))
            .collect();
        // The rotated constant is real and nonpositive up to rounding; pin it there.
        coeffs[0] = Complex64::new(-coeffs[0].norm(), 0.0);
        coeffs[n] = Complex64::new(1.0, 0.0);
        if n >= 2 {
            coeffs[n - 1] = Complex64::new(0.0, 0.0);
        }
        Normalized {
            poly: Self { coeffs },
            shift,
            rotation,
        }
    }

    /// Recovers critical-point coordinates by solving `p' = 0`.
    pub fn to_critical_spec(&self) -> CriticalSpec {
        let n = self.degree();
        let points = if n == 1 {
            Vec::new()
        } else {
            let monic: Vec<Complex64> = self.derivative_coeffs().iter().map(|c| c / n as f64).collect();
            roots::solve(&monic, None).roots
        };
        let spec = CriticalSpec {
            degree: n,
            critical_points: points,
            constant_term: self.coeffs[0],
            normalized: false,
            coeffs: OnceLock::new(),
        };
        let _ = spec.coeffs.set(self.clone());
        spec
    }
}

impl fmt::Display for CoeffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Result of [`CoeffPoly::normalize`]: `poly(z) = e^{-i n rotation} p(e^{i rotation} z - shift)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub poly: CoeffPoly,
    pub shift: Complex64,
    pub rotation: f64,
}

/// A monic polynomial through its critical points and constant term.
#[derive(Debug)]
pub struct CriticalSpec {
    degree: usize,
    critical_points: Vec<Complex64>,
    constant_term: Complex64,
    normalized: bool,
    coeffs: OnceLock<CoeffPoly>,
}

impl Clone for CriticalSpec {
    fn clone(&self) -> Self {
        let coeffs = OnceLock::new();
        if let Some(p) = self.coeffs.get() {
            let _ = coeffs.set(p.clone());
        }
        Self {
            degree: self.degree,
            critical_points: self.critical_points.clone(),
            constant_term: self.constant_term,
            normalized: self.normalized,
            coeffs,
        }
    }
}

impl PartialEq for CriticalSpec {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree
            && self.critical_points == other.critical_points
            && self.constant_term == other.constant_term
            && self.normalized == other.normalized
    }
}

impl CriticalSpec {
    /// Unnormalized spec; the degree is one more than the number of critical points.
    pub fn new(critical_points: Vec<Complex64>, constant_term: Complex64) -> Result<Self> {
        if critical_points.iter().any(|z| !z.is_finite()) || !constant_term.is_finite() {
            return Err(Error::BadParameter("non-finite critical data".into()));
        }
        Ok(Self {
            degree: critical_points.len() + 1,
            critical_points,
            constant_term,
            normalized: false,
            coeffs: OnceLock::new(),
        })
    }

    /// Normalized spec. Critical points off mean zero are re-centered by
    /// subtracting their mean; the constant term must be a nonpositive real.
    pub fn normalized(mut critical_points: Vec<Complex64>, constant_term: Complex64) -> Result<Self> {
        let scale = constant_term.norm().max(1.0);
        if constant_term.im.abs() > 1e-12 * scale || constant_term.re > 1e-12 * scale {
            return Err(Error::BadParameter(format!(
                "normalized constant term must be a nonpositive real, got {constant_term}"
            )));
        }
        if !critical_points.is_empty() {
            let mean = critical_points.iter().sum::<Complex64>() / critical_points.len() as f64;
            let size = critical_points.iter().map(|z| z.norm()).fold(1.0, f64::max);
            if mean.norm() > 1e-12 * size {
                for z in &mut critical_points {
                    *z -= mean;
                }
            }
        }
        let mut spec = Self::new(critical_points, Complex64::new(constant_term.re.min(0.0), 0.0))?;
        spec.normalized = true;
        Ok(spec)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn critical_points(&self) -> &[Complex64] {
        &self.critical_points
    }

    pub fn constant_term(&self) -> Complex64 {
        self.constant_term
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Coefficient form, computed once.
    pub fn poly(&self) -> &CoeffPoly {
        self.coeffs.get_or_init(|| expand(self))
    }

    /// `psi(z) = sum 1/(z - zeta)` by partial fractions.
    pub fn psi(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for zeta in &self.critical_points {
            let d = z - zeta;
            if d.norm() < POLE_TOLERANCE {
                return Err(Error::PoleAtZ { z, which: "p''/p'" });
            }
            acc += d.inv();
        }
        Ok(acc)
    }

    /// `sum 1/|z - zeta|`, the termwise majorant of `|psi|`.
    pub fn psi_majorant(&self, z: Complex64) -> f64 {
        self.critical_points.iter().map(|zeta| 1.0 / (z - zeta).norm()).sum()
    }

    pub fn norms(&self) -> NormBundle {
        norms(self)
    }

    pub fn delta(&self, z: Complex64) -> Result<f64> {
        delta(self, z)
    }
}

/// `p'(z) = n prod (z - zeta)`, integrated with `p(0) = constant_term`.
pub fn from_critical_points(spec: &CriticalSpec) -> CoeffPoly {
    spec.poly().clone()
}

fn expand(spec: &CriticalSpec) -> CoeffPoly {
    let n = spec.degree;
    let mut prod = vec![Complex64::new(1.0, 0.0)];
    for zeta in &spec.critical_points {
        prod = mul(&prod, &[-zeta, Complex64::new(1.0, 0.0)]);
    }
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(spec.constant_term);
    for (k, e) in prod.iter().enumerate() {
        coeffs.push(e * (n as f64 / (k + 1) as f64));
    }
    coeffs[n] = Complex64::new(1.0, 0.0);
    CoeffPoly { coeffs }
}

pub fn normalize(p: &CoeffPoly) -> Normalized {
    p.normalize()
}

pub fn eval_all(p: &CoeffPoly, z: Complex64) -> (Complex64, Complex64, Complex64) {
    p.eval_all(z)
}

pub fn log_derivatives(p: &CoeffPoly, z: Complex64) -> Result<(Complex64, Complex64)> {
    p.log_derivatives(z)
}

pub fn conjugate(p: &CoeffPoly) -> CoeffPoly {
    p.conjugate()
}

/// Dispersion, origin repulsion, total size and the l2 dispersion of a spec.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormBundle {
    pub l1_dispersion: f64,
    pub origin_repulsion: f64,
    pub total_size: f64,
    pub l2_dispersion: f64,
}

pub fn norms(spec: &CriticalSpec) -> NormBundle {
    let n = spec.degree as f64;
    let l1: f64 = spec.critical_points.iter().map(|z| z.norm()).sum();
    let l2: f64 = spec.critical_points.iter().map(|z| z.norm_sqr()).sum();
    let l0 = n * (Complex64::new(1.0, 0.0) + spec.constant_term).norm().powf(1.0 / n);
    NormBundle {
        l1_dispersion: l1,
        origin_repulsion: l0,
        total_size: l1 + l0,
        l2_dispersion: l2,
    }
}

/// `min |z - zeta| / |z|`.
pub fn delta(spec: &CriticalSpec, z: Complex64) -> Result<f64> {
    if z.norm() == 0.0 {
        return Err(Error::OriginInput);
    }
    let nearest = spec
        .critical_points
        .iter()
        .map(|zeta| (z - zeta).norm())
        .fold(f64::INFINITY, f64::min);
    // No critical points (degree 1): the distance is infinite.
    Ok(nearest / z.norm())
}

/// `sum |z_i - mean|`.
pub fn dispersion_l1(points: &[Complex64]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let mean = points.iter().sum::<Complex64>() / points.len() as f64;
    points.iter().map(|z| (z - mean).norm()).sum()
}

/// Number of critical points outside `D(0, r)`.
pub fn count_outside(spec: &CriticalSpec, r: f64) -> usize {
    spec.critical_points.iter().filter(|z| z.norm() >= r).count()
}

/// The two sides of the dispersion splitting bound at radius `r`:
/// `(||p||_1, sum_{|zeta| >= r} |zeta| + n Disp{zeta in D(0, r)})`.
pub fn dispersion_split(spec: &CriticalSpec, r: f64) -> (f64, f64) {
    let (inside, outside): (Vec<Complex64>, Vec<Complex64>) =
        spec.critical_points.iter().partition(|z| z.norm() < r);
    let far: f64 = outside.iter().map(|z| z.norm()).sum();
    let l1: f64 = spec.critical_points.iter().map(|z| z.norm()).sum();
    (l1, far + spec.degree as f64 * dispersion_l1(&inside))
}

/// Built-in polynomial families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `z^n - 1`.
    P0,
    /// `z^n - n/(n-2) a^2 z^{n-2} - 1`: two critical points moved to `+-a`.
    Example1,
    /// `z^n - 1 - (a/n)^n`: constant term pushed off `-1`.
    Example2,
    /// `z^2 - r^2`.
    Cassini,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p0" => Ok(Family::P0),
            "example1" | "example-1" => Ok(Family::Example1),
            "example2" | "example-2" => Ok(Family::Example2),
            "cassini" => Ok(Family::Cassini),
            other => Err(Error::BadParameter(format!("unknown family {other:?}"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::P0 => "p0",
            Family::Example1 => "example1",
            Family::Example2 => "example2",
            Family::Cassini => "cassini",
        })
    }
}

pub fn family(name: Family, n: usize, a_or_r: f64) -> Result<CriticalSpec> {
    let zero = Complex64::new(0.0, 0.0);
    let minus_one = Complex64::new(-1.0, 0.0);
    match name {
        Family::P0 => {
            if n < 1 {
                return Err(Error::BadParameter("p0 needs n >= 1".into()));
            }
            CriticalSpec::normalized(vec![zero; n - 1], minus_one)
        }
        Family::Example1 => {
            if n <= 2 || !(a_or_r > 0.0 && a_or_r < 1.0) {
                return Err(Error::BadParameter(format!(
                    "example1 needs n > 2 and 0 < a < 1, got n={n}, a={a_or_r}"
                )));
            }
            let mut pts = vec![Complex64::new(a_or_r, 0.0), Complex64::new(-a_or_r, 0.0)];
            pts.extend(std::iter::repeat_n(zero, n - 3));
            CriticalSpec::normalized(pts, minus_one)
        }
        Family::Example2 => {
            if n < 1 || !(a_or_r > 0.0 && a_or_r <= 1.0) {
                return Err(Error::BadParameter(format!(
                    "example2 needs 0 < a <= 1, got a={a_or_r}"
                )));
            }
            let c = -1.0 - (a_or_r / n as f64).powi(n as i32);
            CriticalSpec::normalized(vec![zero; n - 1], Complex64::new(c, 0.0))
        }
        Family::Cassini => {
            if n != 2 || !(a_or_r > 0.0 && a_or_r.is_finite()) {
                return Err(Error::BadParameter(format!(
                    "cassini needs n = 2 and r > 0, got n={n}, r={a_or_r}"
                )));
            }
            CriticalSpec::normalized(vec![zero], Complex64::new(-a_or_r * a_or_r, 0.0))
        }
    }
}

pub(crate) fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

pub(crate) fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

pub(crate) fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Taylor coefficients at `c` by repeated synthetic division.
pub(crate) fn taylor(coeffs: &[Complex64], c: Complex64) -> Vec<Complex64> {
    let mut t = coeffs.to_vec();
    let n = t.len();
    for k in 0..n {
        for j in (k..n - 1).rev() {
            let next = t[j + 1];
            t[j] += c * next;
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn p0_from_critical_points() {
        let spec = family(Family::P0, 3, 0.0).unwrap();
        assert_eq!(spec.poly().coeffs(), &[c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn example1_coefficients() {
        let spec = family(Family::Example1, 9, 0.5).unwrap();
        let p = spec.poly();
        let expected = -(9.0 / 7.0) * 0.25;
        assert!((p.coeffs()[7] - c(expected, 0.0)).norm() < 1e-15);
        for k in [1, 2, 3, 4, 5, 6, 8] {
            assert!(p.coeffs()[k].norm() < 1e-15, "k={k}");
        }
        assert_eq!(p.coeffs()[0], c(-1.0, 0.0));
    }

    #[test]
    fn cassini_is_z2_minus_r2() {
        let spec = family(Family::Cassini, 2, 3.0).unwrap();
        assert_eq!(spec.poly().coeffs(), &[c(-9.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(family(Family::Cassini, 3, 1.0).is_err());
    }

    #[test]
    fn example2_constant() {
        let spec = family(Family::Example2, 9, 0.5).unwrap();
        let expected = -1.0 - (1.0f64 / 18.0).powi(9);
        assert_eq!(spec.constant_term(), c(expected, 0.0));
        assert!(spec.critical_points().iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn family_rejects_bad_parameters() {
        assert!(family(Family::Example1, 2, 0.5).is_err());
        assert!(family(Family::Example1, 9, 1.0).is_err());
        assert!(family(Family::Example2, 9, 0.0).is_err());
        assert!(family(Family::Example2, 9, 1.5).is_err());
    }

    #[test]
    fn eval_all_hand_values() {
        let p0 = family(Family::P0, 3, 0.0).unwrap();
        assert_eq!(p0.poly().eval_all(c(1.0, 0.0)), (c(0.0, 0.0), c(3.0, 0.0), c(6.0, 0.0)));
        let p9 = family(Family::P0, 9, 0.0).unwrap();
        assert_eq!(p9.poly().eval_all(c(0.0, 0.0)), (c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn psi_of_p0_and_poles() {
        let p = family(Family::P0, 5, 0.0).unwrap();
        let z = c(0.3, -0.7);
        let psi = p.poly().psi(z).unwrap();
        assert!((psi - c(4.0, 0.0) / z).norm() < 1e-13);
        assert!(matches!(p.poly().psi(c(0.0, 0.0)), Err(Error::PoleAtZ { .. })));
        let q = family(Family::Example1, 9, 0.5).unwrap();
        // Partial fractions see the pole exactly; Horner only sees a tiny p'.
        assert!(q.psi(c(0.5, 0.0)).is_err());
        assert!(q.psi(c(-0.5, 0.0)).is_err());
    }

    #[test]
    fn psi_example1_at_one() {
        let spec = family(Family::Example1, 9, 0.5).unwrap();
        // 1/(1 - 1/2) + 1/(1 + 1/2) + 6/1
        let oracle = 2.0 + 2.0 / 3.0 + 6.0;
        let psi = spec.poly().psi(c(1.0, 0.0)).unwrap();
        assert!((psi - c(oracle, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn norms_of_families() {
        let p0 = family(Family::P0, 9, 0.0).unwrap().norms();
        assert_eq!(p0.total_size, 0.0);
        assert_eq!(p0.l2_dispersion, 0.0);
        for (n, a) in [(3, 0.2), (9, 0.5), (12, 0.9)] {
            let e1 = family(Family::Example1, n, a).unwrap().norms();
            assert!((e1.l1_dispersion - 2.0 * a).abs() < 1e-15);
            assert_eq!(e1.origin_repulsion, 0.0);
            let e2 = family(Family::Example2, n, a).unwrap().norms();
            assert_eq!(e2.l1_dispersion, 0.0);
            assert!((e2.origin_repulsion - a).abs() < 1e-3 * a, "n={n} a={a} {e2:?}");
        }
    }

    #[test]
    fn delta_values() {
        let p0 = family(Family::P0, 4, 0.0).unwrap();
        assert!((p0.delta(c(0.3, 0.4)).unwrap() - 1.0).abs() < 1e-15);
        let e1 = family(Family::Example1, 9, 0.5).unwrap();
        assert!((e1.delta(c(1.0, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(e1.delta(c(0.0, 0.0)), Err(Error::OriginInput));
    }

    #[test]
    fn conjugate_examples() {
        let p = CoeffPoly::monic(vec![c(3.0, 0.0), c(0.0, -1.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(p.conjugate().coeffs(), &[c(3.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)]);
        let p0 = family(Family::P0, 6, 0.0).unwrap();
        assert_eq!(p0.poly().conjugate(), *p0.poly());
    }

    #[test]
    fn normalize_examples() {
        let p = CoeffPoly::monic(vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let nz = p.normalize();
        assert_eq!(nz.poly, p);
        assert_eq!(nz.shift, c(0.0, 0.0));
        assert_eq!(nz.rotation, 0.0);

        // (z - 1)^3 - i
        let q = CoeffPoly::monic(vec![c(-1.0, -1.0), c(3.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)]).unwrap();
        let nz = q.normalize();
        let target = [c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        for (a, b) in nz.poly.coeffs().iter().zip(target) {
            assert!((a - b).norm() < 1e-14, "{a} vs {b}");
        }
        assert!((nz.shift - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((nz.rotation - PI / 6.0).abs() < 1e-14);
        // The defining relation normalized(z) = e^{-inθ} p(e^{iθ} z - shift).
        let z = c(0.4, 0.9);
        let lhs = nz.poly.eval(z);
        let rhs = Complex64::from_polar(1.0, -3.0 * nz.rotation)
            * q.eval(Complex64::from_polar(1.0, nz.rotation) * z - nz.shift);
        assert!((lhs - rhs).norm() < 1e-13);

        for n in 2..8 {
            let mut coeffs = vec![c(0.0, 0.0); n + 1];
            coeffs[0] = c(1.0, 0.0);
            coeffs[n] = c(1.0, 0.0);
            let nz = CoeffPoly::monic(coeffs).unwrap().normalize();
            assert!((nz.rotation - PI / n as f64).abs() < 1e-14);
            assert!((nz.poly.coeffs()[0] - c(-1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn normalized_builder_recenters() {
        let spec = CriticalSpec::normalized(vec![c(1.0, 0.0), c(2.0, 0.0)], c(-0.5, 0.0)).unwrap();
        let sum: Complex64 = spec.critical_points().iter().sum();
        assert!(sum.norm() < 1e-15);
        assert!(CriticalSpec::normalized(vec![c(0.0, 0.0)], c(0.5, 0.0)).is_err());
        assert!(CriticalSpec::normalized(vec![c(0.0, 0.0)], c(-0.5, 0.1)).is_err());
    }

    #[test]
    fn monic_rejects_bad_leading() {
        assert!(CoeffPoly::monic(vec![c(1.0, 0.0), c(2.0, 0.0)]).is_err());
        assert!(CoeffPoly::monic(vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn taylor_shift_matches_derivatives() {
        let p = family(Family::Example1, 6, 0.4).unwrap().poly().clone();
        let at = c(0.3, -0.2);
        let t = p.taylor_at(at);
        let (v, d1, d2) = p.eval_all(at);
        assert!((t[0] - v).norm() < 1e-13);
        assert!((t[1] - d1).norm() < 1e-13);
        assert!((t[2] - d2 / 2.0).norm() < 1e-13);
    }
}
