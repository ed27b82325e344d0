//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the test harness so the lines appear in the test output;
//! the process exits nonzero when any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use lemlab_core::arclength::{length_fiber, length_radial, p0_asymptote};
use lemlab_core::battery::{hard_battery, BatteryBudget};
use lemlab_core::conformal::{gronwall_area, laurent_coeffs};
use lemlab_core::inequality::{lemniscate_length, polya_check, CheckKind};
use lemlab_core::measure::{area, psi_measure};
use lemlab_core::region::Region;
use lemlab_core::search::{local_search, perturbation_study, SearchConfig, SearchPoint};
use lemlab_core::suites::{agreement_suite, conformal_suite, random_monic, rng, DEFAULT_SEED};
use lemlab_core::trace::length_trace;
use lemlab_core::{family, CoeffPoly, Complex64, Family, QuadratureBudget, Result};
use rand::Rng;

/// `2^{1/n} B(1/2, 1/(2n))` for n = 2..=12, evaluated at 30 digits.
const P0_LENGTH: [f64; 11] = [
    7.4162987092054875,
    9.179724222343157,
    11.07002051725661,
    13.00681138191869,
    14.96573218965863,
    16.93690064825091,
    18.915553136286256,
    20.899111801667082,
    22.88606032816543,
    24.87544868514786,
    26.86665141361281,
];

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn p0_length(n: usize, budget: &QuadratureBudget) -> Result<f64> {
    Ok(length_fiber(family(Family::P0, n, 0.0)?.poly(), &Region::Plane, budget)?.length)
}

fn closed_form_lengths() -> Result<Outcome> {
    let start = Instant::now();
    let budget = QuadratureBudget::with_tol(1e-10);
    let mut worst: f64 = 0.0;
    for (i, want) in P0_LENGTH.iter().enumerate() {
        let got = p0_length(i + 2, &budget)?;
        worst = worst.max((got - want).abs() / want);
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && elapsed <= Duration::from_secs(30),
        format!("max relative error {worst:.2e} over n = 2..12 in {elapsed:.2?}"),
    )
}

fn asymptote() -> Result<Outcome> {
    let budget = QuadratureBudget::with_tol(1e-10);
    let mut worst: f64 = 0.0;
    for n in 4..=40 {
        let l = p0_length(n, &budget)?;
        worst = worst.max((l - p0_asymptote(n)).abs() * n as f64);
    }
    let a3 = p0_asymptote(3);
    let a9 = p0_asymptote(9);
    let figures = (a3 - 8.773).abs() < 5e-4 && (a9 - 20.773).abs() < 5e-3;
    outcome(
        worst <= 3.0 && figures,
        format!("max n|l - (2n + 4 ln 2)| = {worst:.4} for n = 4..40; asymptote {a3:.4} (n=3), {a9:.4} (n=9)"),
    )
}

fn family_deficit(name: Family, lo: f64, hi: f64, closed_hi: bool) -> Result<Outcome> {
    let budget = QuadratureBudget::with_tol(1e-10);
    let l = lemniscate_length(family(name, 9, 0.5)?.poly(), &budget)?;
    let d = P0_LENGTH[7] - l.length;
    let inside = d > lo && if closed_hi { d <= hi } else { d < hi };
    outcome(inside, format!("l(p0) - l(p) = {d:.6} (length {:.6}, {:?})", l.length, l.method))
}

fn polya() -> Result<Outcome> {
    let budget = QuadratureBudget::area(1e-4);
    let mut worst: f64 = 0.0;
    for n in [3usize, 6, 9] {
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[n] = Complex64::new(1.0, 0.0);
        let p = CoeffPoly::monic(c)?;
        for r in [0.5, 1.0, 2.0] {
            let a = area(&Region::sublevel(&p, r), &budget)?;
            let want = PI * r.powf(2.0 / n as f64);
            worst = worst.max((a.value - want).abs() / want);
        }
    }
    let budget = QuadratureBudget::area(1e-3);
    let mut r = rng(DEFAULT_SEED, 100);
    let mut violations = 0;
    for _ in 0..100 {
        let n = r.random_range(2..=8);
        let p = random_monic(&mut r, n, 1.0)?;
        let level = r.random_range(0.5..2.0);
        if !polya_check(&p, level, &budget)?.passed {
            violations += 1;
        }
    }
    outcome(
        worst <= 1e-3 && violations == 0,
        format!("max relative error of |E_r(z^n)| {worst:.2e}; {violations}/100 random monic violations"),
    )
}

fn gronwall() -> Result<Outcome> {
    let budget = QuadratureBudget::area(1e-4);
    let mut worst: f64 = 0.0;
    let mut disagreements = 0;
    for spec in conformal_suite(DEFAULT_SEED)? {
        for level in [2.0, 4.0] {
            let d = laurent_coeffs(spec.poly(), level, 0)?;
            let g = gronwall_area(&d);
            let q = area(&Region::sublevel(spec.poly(), level), &budget)?;
            let bound = q.error + d.truncated_area + 1e-9 * g;
            let gap = (g - q.value).abs();
            worst = worst.max(gap / bound);
            if gap > bound {
                disagreements += 1;
            }
        }
    }
    outcome(
        disagreements == 0,
        format!("{disagreements}/20 outside combined bounds; largest gap / bound = {worst:.3}"),
    )
}

fn psi_closed_forms() -> Result<Outcome> {
    let budget = QuadratureBudget::area(1e-5);
    let zero = Complex64::new(0.0, 0.0);
    let mut worst: f64 = 0.0;
    for n in [3usize, 6, 9] {
        let spec = family(Family::P0, n, 0.0)?;
        let m = (n - 1) as f64;
        for r in [0.25, 0.5, 1.0] {
            let disk = psi_measure(&spec, &Region::disk(zero, r), &budget)?.value;
            let ann = psi_measure(&spec, &Region::annulus(zero, 0.5 * r, r), &budget)?.value;
            worst = worst.max((disk - 2.0 * m * r).abs() / (2.0 * m * r));
            worst = worst.max((ann - m * r).abs() / (m * r));
        }
    }
    outcome(worst <= 1e-3, format!("max relative error {worst:.2e} for n in {{3, 6, 9}}"))
}

fn hard_inequalities() -> Result<Outcome> {
    let start = Instant::now();
    let reports = hard_battery(DEFAULT_SEED, &BatteryBudget::default())?;
    let elapsed = start.elapsed();
    let trials: usize = reports.iter().map(|r| r.trials).sum();
    let violations: usize = reports.iter().map(|r| r.violations).sum();
    let all_hard = reports.iter().all(|r| r.kind == CheckKind::Hard);
    let failing: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.check_name.as_str()).collect();
    outcome(
        violations == 0 && failing.is_empty() && all_hard && trials >= 10_000 && elapsed <= Duration::from_secs(300),
        format!("{violations} violations in {trials} trials over {} suites in {elapsed:.2?}{}", reports.len(), if failing.is_empty() { String::new() } else { format!("; failing {failing:?}") }),
    )
}

fn perturbations_shorten_p0() -> Result<Outcome> {
    let budget = QuadratureBudget::with_tol(1e-8);
    let magnitudes: Vec<f64> = (0..10).map(|i| 0.01 * 30f64.powf(i as f64 / 9.0)).collect();
    let mut total = 0;
    let mut nonpositive = 0;
    let mut failures = 0;
    let mut min_delta = f64::INFINITY;
    let mut escape: f64 = 0.0;
    for n in 3..=6 {
        let table = perturbation_study(n, &magnitudes, 20, DEFAULT_SEED, &budget)?;
        total += table.samples.len();
        failures += table.failures;
        for s in &table.samples {
            min_delta = min_delta.min(s.delta);
            if s.delta <= 0.0 || !(0.0095..=0.315).contains(&s.size) {
                nonpositive += 1;
            }
        }
        let start = SearchPoint::encode(&family(Family::P0, n, 0.0)?)?;
        let report = local_search(&start, &SearchConfig::default())?;
        escape = escape.max(report.per_restart[0].total_size);
    }
    outcome(
        total == 800 && failures == 0 && nonpositive == 0 && escape <= 0.01,
        format!("{nonpositive}/{total} perturbations without a shorter lemniscate (min delta {min_delta:.3e}); search from p0 reaches ||p|| = {escape:.2e}"),
    )
}

fn cross_method() -> Result<Outcome> {
    let budget = QuadratureBudget::with_tol(1e-9);
    let mut worst: f64 = 0.0;
    let mut disagreements = 0;
    for (spec, omega) in agreement_suite(DEFAULT_SEED)? {
        let p = spec.poly();
        let f = length_fiber(p, &omega, &budget)?;
        let r = length_radial(p, &omega, &budget)?;
        let t = length_trace(p, &omega, &budget)?;
        let errs = f.error_estimate + r.error_estimate + r.excluded_measure + t.error_estimate;
        let allowed = (1e-3 * f.length).max(errs);
        let spread = [f.length, r.length, t.length];
        let gap = spread.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b)) - spread.iter().fold(f64::INFINITY, |a, b| a.min(*b));
        worst = worst.max(gap / f.length);
        if gap > allowed {
            disagreements += 1;
        }
    }
    outcome(
        disagreements == 0,
        format!("{disagreements}/20 disagreements; max relative spread {worst:.2e}"),
    )
}

fn laurent_sanity() -> Result<Outcome> {
    let mut worst_cap: f64 = 0.0;
    let mut worst_a0: f64 = 0.0;
    for spec in conformal_suite(DEFAULT_SEED)? {
        for level in [2.0, 4.0] {
            let d = laurent_coeffs(spec.poly(), level, 0)?;
            worst_cap = worst_cap.max(d.capacity_check);
            worst_a0 = worst_a0.max(d.a0.norm());
        }
    }
    let mut worst_lead: f64 = 0.0;
    for n in 2..=12 {
        let d = laurent_coeffs(family(Family::P0, n, 0.0)?.poly(), 4.0, 0)?;
        let lead = d.coeffs[n - 2];
        worst_lead = worst_lead.max((lead - 1.0 / n as f64).norm() * n as f64);
    }
    outcome(
        worst_cap <= 1e-6 && worst_a0 <= 1e-6 && worst_lead <= 0.02,
        format!("max |a_-1 - 1| = {worst_cap:.2e}, max |a_0| = {worst_a0:.2e}, max n|a_(n-1) - 1/n| = {worst_lead:.2e}"),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("AC-1", closed_form_lengths),
        ("AC-2", asymptote),
        ("AC-3", || family_deficit(Family::Example1, 1.6, 2.4, true)),
        ("AC-4", || family_deficit(Family::Example2, 0.5, 1.0, false)),
        ("AC-5", polya),
        ("AC-6", gronwall),
        ("AC-7", psi_closed_forms),
        ("AC-8", hard_inequalities),
        ("AC-9", perturbations_shorten_p0),
        ("AC-10", cross_method),
        ("AC-11", laurent_sanity),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!(
            "{name} {} {detail} [{:.1?}]",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
