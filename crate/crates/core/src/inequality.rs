//! Executable defect and rearrangement inequalities, each producing a
//! [`VerificationReport`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arclength::{length_fiber, LengthResult};
use crate::error::{Error, Result};
use crate::measure::{area, equiv_radius, pair_defect_integral, pole_sum_integral, psi_measure, riesz_potential};
use crate::poly::{dispersion_l1, CoeffPoly, CriticalSpec};
use crate::quad::{Estimate, QuadratureBudget};
use crate::region::Region;
use crate::roots::circle_intersections;
use crate::trace::length_trace;

/// Whether a check's constant is explicit or fitted by calibration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Hard,
    Fitted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// Outcome of one check (or the worst case of a suite of trials).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_name: String,
    /// Short label of the inequality being exercised.
    pub anchor: String,
    pub kind: CheckKind,
    pub relation: Relation,
    pub passed: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// Slack in the direction of the relation; negative means violated.
    pub margin: f64,
    /// Allowed violation from quadrature error and rounding.
    pub tolerance: f64,
    pub fitted_constant: Option<f64>,
    pub trials: usize,
    pub violations: usize,
    pub notes: String,
}

impl VerificationReport {
    fn new(name: &str, anchor: &str, kind: CheckKind, relation: Relation, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = match relation {
            Relation::AtMost => rhs - lhs,
            Relation::AtLeast => lhs - rhs,
        };
        let passed = margin >= -tolerance;
        Self {
            check_name: name.to_string(),
            anchor: anchor.to_string(),
            kind,
            relation,
            passed,
            lhs,
            rhs,
            margin,
            tolerance,
            fitted_constant: None,
            trials: 1,
            violations: usize::from(!passed),
            notes: String::new(),
        }
    }

    fn fitted(mut self, c: f64) -> Self {
        self.fitted_constant = Some(c);
        self
    }

    fn note(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    /// Recomputes `passed` from the sides; used to audit serialized reports.
    pub fn consistent(&self) -> bool {
        let margin = match self.relation {
            Relation::AtMost => self.rhs - self.lhs,
            Relation::AtLeast => self.lhs - self.rhs,
        };
        self.trials > 1 || (margin >= -self.tolerance) == self.passed
    }
}

/// Folds trial reports into one: the worst trial's sides, with counts.
pub fn summarize(name: &str, reports: &[VerificationReport]) -> Option<VerificationReport> {
    let worst = reports
        .iter()
        .min_by(|a, b| (a.margin + a.tolerance).total_cmp(&(b.margin + b.tolerance)))?;
    let violations = reports.iter().map(|r| r.violations).sum();
    let mut out = worst.clone();
    out.check_name = name.to_string();
    out.trials = reports.iter().map(|r| r.trials).sum();
    out.violations = violations;
    out.passed = violations == 0;
    let detail = if worst.notes.is_empty() { String::new() } else { format!("; worst: {}", worst.notes) };
    out.notes = format!("{} trials, {} violations{}", out.trials, violations, detail);
    Some(out)
}

fn rounding(scale: f64) -> f64 {
    1e-12 * scale.max(1.0)
}

/// `sum |z_i| - |sum z_i| >= floor(n/2)/(n(n-1)) sum_{i,j} (|z_i| + |z_j| - |z_i + z_j|)`.
pub fn triangle_defect_check(zs: &[Complex64]) -> Result<VerificationReport> {
    let n = zs.len();
    if n < 2 {
        return Err(Error::BadParameter("triangle defect needs at least two numbers".into()));
    }
    let total: f64 = zs.iter().map(|z| z.norm()).sum();
    let lhs = total - zs.iter().sum::<Complex64>().norm();
    let mut pairs = 0.0;
    for a in zs {
        for b in zs {
            pairs += a.norm() + b.norm() - (a + b).norm();
        }
    }
    let rhs = (n / 2) as f64 / (n * (n - 1)) as f64 * pairs;
    Ok(VerificationReport::new(
        "triangle_defect",
        "triangle-defect",
        CheckKind::Hard,
        Relation::AtLeast,
        lhs,
        rhs,
        rounding(total),
    ))
}

/// `sum 1/|z - zeta| - |psi(z)| >= (c/n) sum_{zeta, zeta'} pair defect` with a fitted `c`.
pub fn psi_defect_check(spec: &CriticalSpec, z: Complex64, fitted_c: f64) -> Result<VerificationReport> {
    let psi = spec.psi(z)?;
    let inv: Vec<Complex64> = spec.critical_points().iter().map(|zeta| (z - zeta).inv()).collect();
    let majorant: f64 = inv.iter().map(|u| u.norm()).sum();
    let lhs = majorant - psi.norm();
    let mut pairs = 0.0;
    for a in &inv {
        for b in &inv {
            pairs += a.norm() + b.norm() - (a + b).norm();
        }
    }
    let rhs = fitted_c / spec.degree() as f64 * pairs;
    Ok(VerificationReport::new(
        "psi_defect",
        "psi-defect",
        CheckKind::Fitted,
        Relation::AtLeast,
        lhs,
        rhs,
        rounding(majorant),
    )
    .fitted(fitted_c))
}

/// Ratio window for the averaged pair defect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioWindow {
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
}

/// `I / |zeta - zeta'|` with `I` the pair defect integrated over `D(z0, r)`.
pub fn tridef_ratio(zeta: Complex64, zeta2: Complex64, z0: Complex64, r: f64, budget: &QuadratureBudget) -> Result<(f64, Estimate)> {
    let est = pair_defect_integral(&Region::disk(z0, r), zeta, zeta2, budget)?;
    let d = (zeta - zeta2).norm();
    Ok((if d > 0.0 { est.value / d } else { 0.0 }, est))
}

/// Whether `zeta in D(z0, r/2)` and `zeta' in D(z0, C r)`.
pub fn tridef_admissible(zeta: Complex64, zeta2: Complex64, z0: Complex64, r: f64, c: f64) -> bool {
    (zeta - z0).norm() < r / 2.0 && (zeta2 - z0).norm() < c * r
}

/// The averaged pair defect lies in the calibrated window times `|zeta - zeta'|`.
pub fn tridef_integral_check(
    zeta: Complex64,
    zeta2: Complex64,
    z0: Complex64,
    r: f64,
    c: f64,
    window: &RatioWindow,
    budget: &QuadratureBudget,
) -> Result<VerificationReport> {
    if !tridef_admissible(zeta, zeta2, z0, r, c) {
        return Err(Error::Precondition(format!("configuration not admissible for C = {c}")));
    }
    let (ratio, est) = tridef_ratio(zeta, zeta2, z0, r, budget)?;
    let d = (zeta - zeta2).norm();
    let tol = if d > 0.0 { est.error / d } else { est.error };
    let name = "tridef_integral";
    if d == 0.0 {
        return Ok(VerificationReport::new(name, "averaged-pair-defect", CheckKind::Fitted, Relation::AtMost, est.value, 0.0, est.error)
            .note("coincident points: integrand vanishes"));
    }
    // Report the tighter side of the window.
    let low = VerificationReport::new(name, "averaged-pair-defect", CheckKind::Fitted, Relation::AtLeast, ratio, window.lo, tol);
    let high = VerificationReport::new(name, "averaged-pair-defect", CheckKind::Fitted, Relation::AtMost, ratio, window.hi, tol);
    let pick = if low.margin <= high.margin { low } else { high };
    Ok(pick.fitted(window.center).note(format!("C = {c}, window [{}, {}]", window.lo, window.hi)))
}

fn radius_error(a: &Estimate) -> (f64, f64) {
    let r = equiv_radius(a.value);
    let dr = if r > 0.0 { a.error / (2.0 * PI * r) } else { (a.error / PI).sqrt() };
    (r, dr)
}

fn contains_disk(region: &Region, z0: Complex64, r: f64) -> bool {
    region.contains(z0)
        && (0..256).all(|j| {
            let u = Complex64::from_polar(r * (1.0 - 1e-9), 2.0 * PI * j as f64 / 256.0);
            region.contains(z0 + u) && region.contains(z0 + u * 0.5)
        })
}

/// `Psi(E) <= 2(n-1) r_E`.
pub fn psi_upper_effective(spec: &CriticalSpec, region: &Region, budget: &QuadratureBudget) -> Result<VerificationReport> {
    let (psi, rhs, tol) = psi_versus_radius(spec, region, budget)?;
    Ok(VerificationReport::new("psi_upper_effective", "psi-upper-2n", CheckKind::Hard, Relation::AtMost, psi.value, rhs, tol)
        .note(format!("gap {:.6}", rhs - psi.value)))
}

/// The effective bound together with the fitted sharpening
/// `Psi(E) <= 2(n-1) r_E - c Disp{zeta in D(z0, C r)}`, which needs
/// `r >= 10 ||p||_1 / n` and `D(z0, r)` inside `E`.
#[allow(clippy::too_many_arguments)]
pub fn psi_upper_check(
    spec: &CriticalSpec,
    region: &Region,
    z0: Complex64,
    r: f64,
    c: f64,
    c_fit: f64,
    budget: &QuadratureBudget,
) -> Result<[VerificationReport; 2]> {
    let n = spec.degree();
    let l1 = spec.norms().l1_dispersion;
    if r < 10.0 * l1 / n as f64 {
        return Err(Error::Precondition(format!("radius {r} below 10 ||p||_1 / n = {}", 10.0 * l1 / n as f64)));
    }
    if !contains_disk(region, z0, r) {
        return Err(Error::Precondition("region does not contain D(z0, r)".into()));
    }
    let (psi, rhs_base, tol) = psi_versus_radius(spec, region, budget)?;
    let hard = VerificationReport::new("psi_upper_effective", "psi-upper-2n", CheckKind::Hard, Relation::AtMost, psi.value, rhs_base, tol)
        .note(format!("gap {:.6}", rhs_base - psi.value));
    let disp = local_dispersion(spec, z0, c * r);
    let fitted = VerificationReport::new(
        "psi_upper_defect",
        "psi-upper-defect",
        CheckKind::Fitted,
        Relation::AtMost,
        psi.value,
        rhs_base - c_fit * disp,
        tol,
    )
    .fitted(c_fit)
    .note(format!("C = {c}, dispersion {disp:.6}"));
    Ok([hard, fitted])
}

/// `Disp{zeta in D(z0, radius)}`.
pub fn local_dispersion(spec: &CriticalSpec, z0: Complex64, radius: f64) -> f64 {
    let near: Vec<Complex64> = spec.critical_points().iter().copied().filter(|z| (z - z0).norm() < radius).collect();
    dispersion_l1(&near)
}

/// `(Psi(E), 2(n-1) r_E, combined tolerance)`.
pub fn psi_versus_radius(spec: &CriticalSpec, region: &Region, budget: &QuadratureBudget) -> Result<(Estimate, f64, f64)> {
    let n = spec.degree() as f64;
    let psi = psi_measure(spec, region, budget)?;
    let a = area(region, budget)?;
    let (r_e, dr) = radius_error(&a);
    Ok((psi, 2.0 * (n - 1.0) * r_e, psi.error + 2.0 * (n - 1.0) * dr))
}

/// `Psi(Ann(0, r/2, r)) >= (n-1) r - C ||p||_1`.
pub fn psi_lower_check(spec: &CriticalSpec, r: f64, c: f64, budget: &QuadratureBudget) -> Result<VerificationReport> {
    if !(r > 0.0) {
        return Err(Error::BadParameter(format!("radius must be positive, got {r}")));
    }
    let n = spec.degree() as f64;
    let l1 = spec.norms().l1_dispersion;
    let psi = psi_measure(spec, &Region::annulus(Complex64::new(0.0, 0.0), r / 2.0, r), budget)?;
    let rhs = (n - 1.0) * r - c * l1;
    Ok(VerificationReport::new("psi_lower", "psi-lower-annulus", CheckKind::Fitted, Relation::AtLeast, psi.value, rhs, psi.error)
        .fitted(c)
        .note(format!("r = {r}, dispersion {l1:.6}")))
}

/// `|sum z_i| >= sin(alpha/2) sum |z_i|` for arguments in an arc of length `pi - alpha`.
pub fn sector_lower_check(zs: &[Complex64], alpha: f64) -> Result<VerificationReport> {
    let allowed = PI - alpha;
    let span = argument_span(zs);
    if span > allowed + 1e-12 {
        return Err(Error::BadSector { span, allowed });
    }
    let total: f64 = zs.iter().map(|z| z.norm()).sum();
    let lhs = zs.iter().sum::<Complex64>().norm();
    let rhs = (alpha / 2.0).sin() * total;
    Ok(VerificationReport::new("sector_lower", "sector-lower", CheckKind::Hard, Relation::AtLeast, lhs, rhs, rounding(total)))
}

/// Length of the shortest arc containing every argument.
pub fn argument_span(zs: &[Complex64]) -> f64 {
    let mut args: Vec<f64> = zs.iter().filter(|z| z.norm() > 0.0).map(|z| z.arg()).collect();
    if args.len() < 2 {
        return 0.0;
    }
    args.sort_by(f64::total_cmp);
    let mut widest_gap = args[0] + 2.0 * PI - args[args.len() - 1];
    for w in args.windows(2) {
        widest_gap = widest_gap.max(w[1] - w[0]);
    }
    2.0 * PI - widest_gap
}

/// Lemniscate length: fiber method, falling back to the traced curve.
pub fn lemniscate_length(p: &CoeffPoly, budget: &QuadratureBudget) -> Result<LengthResult> {
    let fiber = length_fiber(p, &Region::Plane, budget);
    if matches!(&fiber, Ok(r) if !r.budget_exceeded) {
        return fiber;
    }
    let trace = length_trace(p, &Region::Plane, budget);
    match (fiber, trace) {
        (_, Ok(t)) if !t.budget_exceeded => Ok(t),
        (Ok(f), Ok(t)) => Ok(if t.error_estimate < f.error_estimate { t } else { f }),
        (Ok(f), Err(_)) => Ok(f),
        (Err(_), t) => t,
    }
}

/// Fitted constants consumed by [`stokes_gap_report`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StokesConstants {
    pub kappa: f64,
    /// Window for `Psi(E_2) - l` on `z^n - 1`.
    pub p0_gap_lo: f64,
    pub p0_gap_hi: f64,
}

/// `(l(dE_1), Psi(E_2))` with the error of the difference.
pub fn stokes_sides(spec: &CriticalSpec, length_budget: &QuadratureBudget, area_budget: &QuadratureBudget) -> Result<(f64, f64, f64)> {
    let len = lemniscate_length(spec.poly(), length_budget)?;
    let psi = psi_measure(spec, &Region::sublevel(spec.poly(), 2.0), area_budget)?;
    Ok((len.length, psi.value, len.error_estimate + psi.error))
}

/// `l(dE_1) <= Psi(E_2) + kappa sqrt(n)`; for `z^n - 1` also the gap window.
pub fn stokes_gap_report(
    spec: &CriticalSpec,
    constants: &StokesConstants,
    length_budget: &QuadratureBudget,
    area_budget: &QuadratureBudget,
) -> Result<Vec<VerificationReport>> {
    let n = spec.degree();
    let (len, psi, tol) = stokes_sides(spec, length_budget, area_budget)?;
    let gap = psi - len;
    let mut out = vec![VerificationReport::new(
        "stokes_gap",
        "length-vs-psi",
        CheckKind::Fitted,
        Relation::AtMost,
        len,
        psi + constants.kappa * (n as f64).sqrt(),
        tol,
    )
    .fitted(constants.kappa)
    .note(format!("n = {n}, length {len:.9}, Psi(E_2) {psi:.9}, gap {gap:.9}"))];
    if spec.norms().total_size == 0.0 {
        let low = VerificationReport::new("stokes_p0_window", "length-vs-psi", CheckKind::Fitted, Relation::AtLeast, gap, constants.p0_gap_lo, tol);
        let high = VerificationReport::new("stokes_p0_window", "length-vs-psi", CheckKind::Fitted, Relation::AtMost, gap, constants.p0_gap_hi, tol);
        let pick = if low.margin <= high.margin { low } else { high };
        out.push(pick.note(format!("n = {n}, window [{}, {}]", constants.p0_gap_lo, constants.p0_gap_hi)));
    }
    Ok(out)
}

/// `int_E 1/|z - z0| dA <= 2 pi r_E`.
pub fn riesz_bound_check(region: &Region, z0: Complex64, budget: &QuadratureBudget) -> Result<VerificationReport> {
    let lhs = riesz_potential(region, z0, budget)?;
    let (r_e, dr) = radius_error(&area(region, budget)?);
    Ok(VerificationReport::new(
        "riesz_bound",
        "riesz-rearrangement",
        CheckKind::Hard,
        Relation::AtMost,
        lhs.value,
        2.0 * PI * r_e,
        lhs.error + 2.0 * PI * dr + rounding(lhs.value),
    ))
}

/// `int_E sum_j 1/|z - zeta_j| dA <= 2 pi m r_E`.
pub fn multipole_check(region: &Region, poles: &[Complex64], budget: &QuadratureBudget) -> Result<VerificationReport> {
    let m = poles.len() as f64;
    let lhs = pole_sum_integral(region, poles, budget)?;
    let (r_e, dr) = radius_error(&area(region, budget)?);
    Ok(VerificationReport::new(
        "multipole_bound",
        "riesz-multipole",
        CheckKind::Hard,
        Relation::AtMost,
        lhs.value,
        2.0 * PI * m * r_e,
        lhs.error + 2.0 * PI * m * dr + rounding(lhs.value),
    ))
}

/// `|{sum_j 1/|z - zeta_j| >= lambda}| <= 4 pi m^2 / lambda^2`.
pub fn distributional_check(poles: &[Complex64], lambda: f64, budget: &QuadratureBudget) -> Result<VerificationReport> {
    let m = poles.len() as f64;
    let a = area(&Region::potential_superlevel(poles.to_vec(), lambda), budget)?;
    Ok(VerificationReport::new(
        "distributional_bound",
        "riesz-distributional",
        CheckKind::Hard,
        Relation::AtMost,
        a.value,
        4.0 * PI * m * m / (lambda * lambda),
        a.error,
    )
    .note(format!("m = {m}, lambda = {lambda}")))
}

/// The lemniscate meets `|z| = r` in at most `2n` points unless it contains the circle.
pub fn circle_count_check(p: &CoeffPoly, r: f64) -> Result<VerificationReport> {
    let section = circle_intersections(p, r)?;
    let n = p.degree() as f64;
    let count = if section.full_circle { 0.0 } else { section.points.len() as f64 };
    Ok(VerificationReport::new("circle_count", "circle-intersections", CheckKind::Hard, Relation::AtMost, count, 2.0 * n, 0.0)
        .note(format!("r = {r}, full circle: {}", section.full_circle)))
}

/// `|E_r(p)| <= pi r^{2/n}`, with `3 tol` relative slack.
pub fn polya_check(p: &CoeffPoly, r: f64, budget: &QuadratureBudget) -> Result<VerificationReport> {
    let a = area(&Region::sublevel(p, r), budget)?;
    let rhs = PI * r.powf(2.0 / p.degree() as f64);
    Ok(VerificationReport::new("polya", "polya-area", CheckKind::Hard, Relation::AtMost, a.value, rhs, 3.0 * budget.tol * rhs)
        .note(format!("n = {}, r = {r}", p.degree())))
}

/// `Psi(E) <= (1/pi) sum_zeta int_E 1/|z - zeta| dA`.
pub fn psi_triangle_check(spec: &CriticalSpec, region: &Region, budget: &QuadratureBudget) -> Result<VerificationReport> {
    let psi = psi_measure(spec, region, budget)?;
    let sum = pole_sum_integral(region, spec.critical_points(), budget)?;
    Ok(VerificationReport::new(
        "psi_triangle",
        "psi-majorant",
        CheckKind::Hard,
        Relation::AtMost,
        psi.value,
        sum.value / PI,
        psi.error + sum.error / PI + rounding(psi.value),
    ))
}

/// `|A u B| + |A n B| = |A| + |B|` within the summed error bounds.
pub fn additivity_check(a: &Region, b: &Region, budget: &QuadratureBudget) -> Result<VerificationReport> {
    let ua = area(&a.clone().union(b.clone()), budget)?;
    let ia = area(&a.clone().intersect(b.clone()), budget)?;
    let aa = area(a, budget)?;
    let ba = area(b, budget)?;
    let lhs = ua.value + ia.value;
    let rhs = aa.value + ba.value;
    let tol = ua.error + ia.error + aa.error + ba.error + rounding(rhs);
    let mut report = VerificationReport::new("area_additivity", "area-additivity", CheckKind::Hard, Relation::AtMost, (lhs - rhs).abs(), 0.0, tol);
    report.notes = format!("union + intersection {lhs:.9}, sum {rhs:.9}");
    Ok(report)
}
