//! Seeded random suites over every inequality check.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calibration::{tridef_config, Calibration, TRIDEF_CANONICAL};
use crate::error::{Error, Result};
use crate::inequality::*;
use crate::poly::{family, CriticalSpec, Family};
use crate::quad::QuadratureBudget;
use crate::region::Region;
use crate::suites::{normalized_of_size, point_in_disk, random_monic, random_vector, rng};

/// Which part of the battery to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Battery {
    Hard,
    Fitted,
    Full,
}

impl FromStr for Battery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard" => Ok(Battery::Hard),
            "fitted" => Ok(Battery::Fitted),
            "full" => Ok(Battery::Full),
            other => Err(Error::BadParameter(format!("unknown battery {other:?} (hard, fitted, full)"))),
        }
    }
}

/// Budgets used by the battery.
#[derive(Clone, Copy, Debug)]
pub struct BatteryBudget {
    pub area: QuadratureBudget,
    pub length: QuadratureBudget,
}

impl Default for BatteryBudget {
    fn default() -> Self {
        Self {
            area: QuadratureBudget::area(1e-3),
            length: QuadratureBudget::with_tol(1e-8),
        }
    }
}

/// 0 when everything passed, 1 on any hard failure, 2 when only fitted
/// checks failed.
pub fn exit_code(reports: &[VerificationReport]) -> i32 {
    if reports.iter().any(|r| !r.passed && r.kind == CheckKind::Hard) {
        1
    } else if reports.iter().any(|r| !r.passed) {
        2
    } else {
        0
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn suite<T, F>(name: &str, cases: Vec<T>, check: F) -> Result<VerificationReport>
where
    T: Sync,
    F: Fn(&T) -> Result<VerificationReport> + Sync + Send,
{
    let reports: Vec<VerificationReport> = cases.par_iter().map(check).collect::<Result<_>>()?;
    summarize(name, &reports).ok_or_else(|| Error::BadParameter(format!("suite {name} is empty")))
}

fn random_region(r: &mut ChaCha8Rng) -> Result<Region> {
    let zero = c(0.0, 0.0);
    Ok(match r.random_range(0..5) {
        0 => Region::disk(point_in_disk(r, zero, 1.0), r.random_range(0.1..1.0)),
        1 => {
            let inner = r.random_range(0.1..0.8);
            Region::annulus(point_in_disk(r, zero, 1.0), inner, inner + r.random_range(0.1..1.0))
        }
        2 => Region::disk(point_in_disk(r, zero, 1.0), r.random_range(0.1..0.8))
            .union(Region::disk(point_in_disk(r, zero, 1.0), r.random_range(0.1..0.8))),
        3 => {
            let n = r.random_range(2..=5);
            let p = random_monic(r, n, 1.0)?;
            Region::sublevel(&p, r.random_range(0.3..2.0))
        }
        _ => {
            let center = point_in_disk(r, zero, 1.0);
            Region::disk(center, 0.8).intersect(Region::disk(center + point_in_disk(r, zero, 0.6), 0.5).complement())
        }
    })
}

fn random_spec(r: &mut ChaCha8Rng, degrees: std::ops::RangeInclusive<usize>, max_size: f64) -> Result<CriticalSpec> {
    let n = r.random_range(degrees);
    let size = r.random_range(0.01..max_size);
    normalized_of_size(r, n, size)
}

/// Random `(zs, alpha)` with every argument in an arc of length `pi - alpha`.
fn sector_sample(r: &mut ChaCha8Rng) -> (Vec<Complex64>, f64) {
    let alpha = r.random_range(0.0..PI);
    let start = r.random_range(-PI..PI);
    let m = r.random_range(1..=12);
    let zs = (0..m)
        .map(|_| Complex64::from_polar(r.random_range(0.01..10.0), start + (PI - alpha) * r.random::<f64>()))
        .collect();
    (zs, alpha)
}

/// Checks with explicit constants; must never fail.
pub fn hard_battery(seed: u64, budget: &BatteryBudget) -> Result<Vec<VerificationReport>> {
    let ab = &budget.area;
    let mut out = Vec::new();

    let mut r = rng(seed, 30);
    let vectors: Vec<Vec<Complex64>> = (0..10_000)
        .map(|_| {
            let n = r.random_range(2..=10);
            let scale = 10f64.powf(r.random_range(-3.0..3.0));
            random_vector(&mut r, n).into_iter().map(|z| z * scale).collect()
        })
        .collect();
    out.push(suite("triangle_defect_suite", vectors, |zs| triangle_defect_check(zs))?);

    let mut r = rng(seed, 31);
    let pairs: Vec<Vec<Complex64>> = (0..1000).map(|_| random_vector(&mut r, 2)).collect();
    out.push(suite("triangle_identity_n2", pairs, |zs| {
        let rep = triangle_defect_check(zs)?;
        let mut exact = rep.clone();
        exact.relation = Relation::AtMost;
        exact.lhs = (rep.lhs - rep.rhs).abs();
        exact.rhs = 0.0;
        exact.margin = -exact.lhs;
        exact.passed = exact.lhs <= exact.tolerance;
        exact.violations = usize::from(!exact.passed);
        exact.notes = format!("defect {} vs pair bound {}", rep.lhs, rep.rhs);
        Ok(exact)
    })?);

    let mut r = rng(seed, 32);
    let sectors: Vec<(Vec<Complex64>, f64)> = (0..1000).map(|_| sector_sample(&mut r)).collect();
    out.push(suite("sector_lower_suite", sectors, |(zs, alpha)| sector_lower_check(zs, *alpha))?);

    let mut r = rng(seed, 33);
    let circles: Vec<(crate::CoeffPoly, f64)> = (0..1000)
        .map(|_| {
            let n = r.random_range(2..=8);
            Ok((random_monic(&mut r, n, 1.2)?, r.random_range(0.05..2.0)))
        })
        .collect::<Result<_>>()?;
    out.push(suite("circle_count_suite", circles, |(p, rad)| circle_count_check(p, *rad))?);

    let mut r = rng(seed, 34);
    let riesz: Vec<(Region, Complex64)> = (0..40)
        .map(|_| Ok((random_region(&mut r)?, point_in_disk(&mut r, c(0.0, 0.0), 2.0))))
        .collect::<Result<_>>()?;
    out.push(suite("riesz_bound_suite", riesz, |(e, z0)| riesz_bound_check(e, *z0, ab))?);

    let mut r = rng(seed, 35);
    let multi: Vec<(Region, Vec<Complex64>)> = (0..20)
        .map(|_| {
            let m = r.random_range(1..=6);
            Ok((random_region(&mut r)?, random_vector(&mut r, m)))
        })
        .collect::<Result<_>>()?;
    out.push(suite("multipole_suite", multi, |(e, poles)| multipole_check(e, poles, ab))?);

    let mut r = rng(seed, 36);
    let mut distrib = Vec::new();
    for _ in 0..10 {
        let m = r.random_range(1..=5);
        let poles = random_vector(&mut r, m);
        for factor in [0.5, 1.0, 2.0, 4.0, 8.0] {
            distrib.push((poles.clone(), factor * m as f64));
        }
    }
    out.push(suite("distributional_suite", distrib, |(poles, lambda)| distributional_check(poles, *lambda, ab))?);

    let mut r = rng(seed, 37);
    let specs: Vec<CriticalSpec> = (0..20).map(|_| random_spec(&mut r, 2..=9, 1.0)).collect::<Result<_>>()?;
    out.push(suite("psi_upper_effective_suite", specs, |s| {
        psi_upper_effective(s, &Region::sublevel(s.poly(), 2.0), ab)
    })?);

    let mut r = rng(seed, 38);
    let tri: Vec<(CriticalSpec, Region)> = (0..10)
        .map(|_| Ok((random_spec(&mut r, 3..=8, 1.0)?, random_region(&mut r)?)))
        .collect::<Result<_>>()?;
    out.push(suite("psi_majorant_suite", tri, |(s, e)| psi_triangle_check(s, e, ab))?);

    let mut r = rng(seed, 39);
    let polya: Vec<(crate::CoeffPoly, f64)> = (0..100)
        .map(|_| {
            let n = r.random_range(2..=8);
            random_monic(&mut r, n, 1.0)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flat_map(|p| [0.5, 1.0, 2.0].map(|level| (p.clone(), level)))
        .collect();
    out.push(suite("polya_suite", polya, |(p, level)| polya_check(p, *level, ab))?);

    let mut r = rng(seed, 40);
    let disks: Vec<(Region, Region)> = (0..20)
        .map(|_| {
            let a = Region::disk(point_in_disk(&mut r, c(0.0, 0.0), 1.0), r.random_range(0.2..1.0));
            let b = Region::disk(point_in_disk(&mut r, c(0.0, 0.0), 1.0), r.random_range(0.2..1.0));
            (a, b)
        })
        .collect();
    out.push(suite("area_additivity_suite", disks, |(a, b)| additivity_check(a, b, ab))?);
    Ok(out)
}

/// Checks judged against the frozen calibration.
pub fn fitted_battery(seed: u64, cal: &Calibration, budget: &BatteryBudget) -> Result<Vec<VerificationReport>> {
    let ab = &budget.area;
    let mut out = Vec::new();
    let zero = c(0.0, 0.0);

    let mut r = rng(seed, 50);
    let defect: Vec<(CriticalSpec, Complex64)> = (0..500)
        .map(|_| Ok((random_spec(&mut r, 3..=10, 2.0)?, point_in_disk(&mut r, zero, 1.5))))
        .collect::<Result<_>>()?;
    out.push(suite("psi_defect_suite", defect, |(s, z)| psi_defect_check(s, *z, cal.psi_defect_c))?);

    let (a, b, z0, rad) = TRIDEF_CANONICAL;
    out.push(tridef_integral_check(a.into(), b.into(), z0.into(), rad, 2.0, &cal.tridef_c2, ab)?);
    for (stream, cc) in [(51u64, 2.0), (52, 5.0)] {
        let mut r = rng(seed, stream);
        let window = *cal.tridef_window(cc).expect("calibrated constant");
        let configs: Vec<_> = (0..50).map(|_| tridef_config(&mut r, cc)).collect();
        out.push(suite(&format!("tridef_suite_c{cc}"), configs, |(a, b, z0, rad)| {
            tridef_integral_check(*a, *b, *z0, *rad, cc, &window, ab)
        })?);
    }

    let mut r = rng(seed, 53);
    let mut upper = Vec::new();
    for _ in 0..6 {
        let spec = random_spec(&mut r, 5..=10, 0.6)?;
        let rad = (10.0 * spec.norms().l1_dispersion / spec.degree() as f64).max(0.3);
        let e2 = Region::sublevel(spec.poly(), 2.0);
        for cc in [2.0, 5.0] {
            let fit = cal.psi_upper_c(cc).expect("calibrated constant");
            match psi_upper_check(&spec, &e2, zero, rad, cc, fit, ab) {
                Ok([_, fitted]) => upper.push(fitted),
                Err(Error::Precondition(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    if let Some(s) = summarize("psi_upper_defect_suite", &upper) {
        out.push(s);
    }

    let mut r = rng(seed, 54);
    let mut lower: Vec<(CriticalSpec, f64)> = (0..6)
        .map(|_| Ok((random_spec(&mut r, 3..=10, 1.0)?, r.random_range(0.2..1.0))))
        .collect::<Result<_>>()?;
    lower.push((family(Family::Example1, 9, 0.5)?, 0.5));
    out.push(suite("psi_lower_suite", lower, |(s, rad)| psi_lower_check(s, *rad, cal.psi_lower_c, ab))?);

    let mut stokes = vec![family(Family::Example2, 9, 0.5)?, family(Family::Cassini, 2, 1.0)?];
    for n in 3..=12 {
        stokes.push(family(Family::P0, n, 0.0)?);
    }
    let reports: Vec<Vec<VerificationReport>> = stokes
        .par_iter()
        .map(|s| stokes_gap_report(s, &cal.stokes, &budget.length, ab))
        .collect::<Result<_>>()?;
    let (main, windows): (Vec<_>, Vec<_>) = reports.into_iter().flatten().partition(|r| r.check_name == "stokes_gap");
    out.extend(summarize("stokes_gap_suite", &main));
    out.extend(summarize("stokes_p0_window_suite", &windows));
    Ok(out)
}

pub fn run_battery(which: Battery, seed: u64, cal: &Calibration, budget: &BatteryBudget) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    if matches!(which, Battery::Hard | Battery::Full) {
        out.extend(hard_battery(seed, budget)?);
    }
    if matches!(which, Battery::Fitted | Battery::Full) {
        out.extend(fitted_battery(seed, cal, budget)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let hard_fail = VerificationReport {
            check_name: "x".into(),
            anchor: "x".into(),
            kind: CheckKind::Hard,
            relation: Relation::AtMost,
            passed: false,
            lhs: 1.0,
            rhs: 0.0,
            margin: -1.0,
            tolerance: 0.0,
            fitted_constant: None,
            trials: 1,
            violations: 1,
            notes: String::new(),
        };
        let mut fitted_fail = hard_fail.clone();
        fitted_fail.kind = CheckKind::Fitted;
        let mut ok = hard_fail.clone();
        ok.passed = true;
        assert_eq!(exit_code(&[ok.clone()]), 0);
        assert_eq!(exit_code(&[ok.clone(), fitted_fail.clone()]), 2);
        assert_eq!(exit_code(&[fitted_fail, hard_fail]), 1);
        assert_eq!("full".parse::<Battery>().unwrap(), Battery::Full);
        assert!("all".parse::<Battery>().is_err());
    }
}
