//! Lemniscate length by the fiber formula, the radial formula and the
//! closed forms for `z^n - 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::poly::CoeffPoly;
use crate::quad::{self, QuadratureBudget};
use crate::region::{self, Region};
use crate::roots::{self, cluster_points};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthMethod {
    Fiber,
    Radial,
    Trace,
    ClosedForm,
}

/// Length of `{|p| = 1}` inside a region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LengthResult {
    pub length: f64,
    pub error_estimate: f64,
    /// Upper bound on the length left out by exclusion disks.
    pub excluded_measure: f64,
    pub method: LengthMethod,
    pub evaluations: usize,
    pub budget_exceeded: bool,
}

impl LengthResult {
    pub fn strict(self) -> Result<Self> {
        if self.budget_exceeded {
            Err(Error::BudgetExceeded {
                value: self.length,
                error: self.error_estimate,
            })
        } else {
            Ok(self)
        }
    }
}

/// `2^{1/n} B(1/2, 1/(2n))`, the length of `{|z^n - 1| = 1}`.
pub fn length_p0_closed(n: usize) -> f64 {
    assert!(n >= 1, "degree must be at least 1");
    let nf = n as f64;
    let a = 0.5;
    let b = 0.5 / nf;
    let ln_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    (ln_beta + std::f64::consts::LN_2 / nf).exp()
}

/// Large-`n` asymptote `2n + 4 log 2` of [`length_p0_closed`].
pub fn p0_asymptote(n: usize) -> f64 {
    2.0 * n as f64 + 4.0 * std::f64::consts::LN_2
}

/// `int |1 + e^{ia}|^{-(n-1)/n} da` over the angles whose fiber radius
/// `|1 + e^{ia}|^{1/n}` is at least `r0`: the length of `{|z^n - 1| = 1}`
/// outside `D(0, r0)`.
pub fn length_p0_outer(n: usize, r0: f64) -> Result<f64> {
    if n < 1 || !(0.0..=1.0).contains(&r0) {
        return Err(Error::BadParameter(format!("need n >= 1 and 0 <= r0 <= 1, got n={n}, r0={r0}")));
    }
    let nf = n as f64;
    let expo = (nf - 1.0) / nf;
    // In beta = pi - alpha the integrand is (2 sin(beta/2))^{-expo}; beta runs
    // from beta_min to pi. Substituting beta = u^n removes the endpoint singularity.
    let beta_min = PI - 2.0 * (0.5 * r0.powf(nf)).acos();
    let beta_min = beta_min.max(0.0);
    let u0 = beta_min.powf(1.0 / nf);
    let u1 = PI.powf(1.0 / nf);
    let est = quad::integrate(
        |u| {
            let beta = u.powf(nf);
            if beta == 0.0 {
                return if n == 1 { 1.0 } else { nf * 2f64.powf(-expo) };
            }
            let jac = nf * u.powf(nf - 1.0);
            jac * (2.0 * (0.5 * beta).sin()).powf(-expo)
        },
        u0,
        u1,
        1e-14,
        40,
    );
    Ok(2.0 * est.value)
}

/// Where the fiber integrand needs a breakpoint. The angle is
/// `arg(unit) + offset`; breakpoints closer than the angle can resolve share
/// one `unit` and are told apart by their offsets, which are computed
/// relative to it without rounding through `arg`.
#[derive(Clone, Copy, Debug)]
struct Breakpoint {
    alpha: f64,
    unit: Complex64,
    offset: f64,
    group: usize,
    power: i32,
    /// Size of `p / unit - 1` over the critical points merged into this one;
    /// below it the integrand changes shape.
    spread: f64,
}

/// Critical points of `p` (roots of `p'/n`).
pub fn critical_points(p: &CoeffPoly) -> Vec<Complex64> {
    let n = p.degree();
    if n < 2 {
        return Vec::new();
    }
    let monic: Vec<Complex64> = p.derivative_coeffs().iter().map(|c| c / n as f64).collect();
    roots::solve(&monic, None).roots
}

struct RawBreak {
    value: Complex64,
    at: Complex64,
    /// Polynomial the value was taken from (`p` or a shift of it).
    shifted: Option<usize>,
    power: usize,
    partners: Vec<Complex64>,
}

fn fiber_breakpoints(p: &CoeffPoly, omega: &Region) -> Result<Vec<Breakpoint>> {
    let crit = critical_points(p);
    let scale = crit.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let clusters = cluster_points(&crit, 1e-3 * scale);
    let values: Vec<Complex64> = clusters.iter().map(|cl| p.eval(cl.center)).collect();
    let mut raw = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if v.norm() == 0.0 || (v.norm() - 1.0).abs() > 0.5 {
            continue;
        }
        // Nearby critical points sharing a critical value act as one point of
        // the summed multiplicity until the fiber resolves their separation;
        // the larger power is always safe.
        let partners: Vec<&roots::Cluster> = clusters
            .iter()
            .zip(&values)
            .filter(|(cl, w)| {
                (cl.center - clusters[i].center).norm() <= 0.1 * scale
                    && (*w - v).norm() <= 1e-9 * v.norm().max(1.0)
            })
            .map(|(cl, _)| cl)
            .collect();
        let power: usize = partners.iter().map(|cl| cl.multiplicity).sum();
        // Individual critical points behind the merged ones, plus midpoints,
        // mark the scale where the merged picture stops being accurate.
        let members: Vec<Complex64> = crit
            .iter()
            .copied()
            .filter(|z| partners.iter().any(|cl| (z - cl.center).norm() <= 1e-3 * scale * cl.multiplicity as f64))
            .collect();
        let mut probes = members.clone();
        for (a, za) in members.iter().enumerate() {
            for zb in &members[a + 1..] {
                probes.push(0.5 * (za + zb));
            }
        }
        raw.push(RawBreak {
            value: *v,
            at: clusters[i].center,
            shifted: None,
            power: power + 1,
            partners: probes,
        });
    }
    let mut shifts = Vec::new();
    for (center, radius) in omega.boundary_circles() {
        if radius <= 0.0 {
            continue;
        }
        let shifted = CoeffPoly::monic(p.taylor_at(center))?;
        let section = roots::circle_intersections(&shifted, radius)?;
        for z in section.points {
            raw.push(RawBreak {
                value: shifted.eval(z),
                at: z,
                shifted: Some(shifts.len()),
                power: 1,
                partners: Vec::new(),
            });
        }
        shifts.push(shifted);
    }
    if raw.is_empty() {
        return Ok(vec![Breakpoint {
            alpha: 0.0,
            unit: Complex64::new(1.0, 0.0),
            offset: 0.0,
            group: 0,
            power: 1,
            spread: 0.0,
        }]);
    }
    raw.sort_by(|a, b| a.value.arg().total_cmp(&b.value.arg()));

    // Group angles closer than 1e-9, including across the cut at -pi.
    let alphas: Vec<f64> = raw.iter().map(|r| r.value.arg()).collect();
    let mut group = vec![0usize; raw.len()];
    for i in 1..raw.len() {
        group[i] = group[i - 1] + usize::from(alphas[i] - alphas[i - 1] >= 1e-9);
    }
    let last = raw.len() - 1;
    if group[last] > 0 && alphas[0] + 2.0 * PI - alphas[last] < 1e-9 {
        let wrapped = group[last];
        for g in group.iter_mut().filter(|g| **g == wrapped) {
            *g = 0;
        }
    }

    let mut bps: Vec<Breakpoint> = Vec::with_capacity(raw.len());
    for (i, r) in raw.iter().enumerate() {
        let leader = group.iter().position(|g| *g == group[i]).unwrap();
        let unit = raw[leader].value / raw[leader].value.norm();
        // value / unit - 1, evaluated on the shifted constant term so that
        // offsets far below the resolution of the angle survive.
        let poly = r.shifted.map_or(p, |k| &shifts[k]);
        let mut lowered = poly.coeffs().to_vec();
        lowered[0] -= unit;
        let rel = horner(&lowered, r.at) / unit;
        let offset = rel.im.atan2(1.0 + rel.re);
        let spread = r
            .partners
            .iter()
            .map(|z| (horner(&lowered, *z) / unit - rel).norm())
            .fold(0.0, f64::max);
        // Distance of the value from the unit circle, without cancellation.
        let off_circle = (2.0 * rel.re + rel.norm_sqr()).abs() / ((1.0 + rel).norm() + 1.0);
        let spread = if r.shifted.is_none() { spread.max(off_circle) } else { spread };
        bps.push(Breakpoint {
            alpha: unit.arg() + offset,
            unit,
            offset,
            group: group[i],
            power: r.power as i32,
            spread,
        });
    }
    bps.sort_by(|a, b| {
        a.unit
            .arg()
            .total_cmp(&b.unit.arg())
            .then(a.offset.total_cmp(&b.offset))
    });
    let mut merged: Vec<Breakpoint> = Vec::new();
    for bp in bps {
        match merged.last_mut() {
            Some(last) if last.group == bp.group && last.offset == bp.offset => {
                last.power = last.power.max(bp.power);
                last.spread = last.spread.max(bp.spread);
            }
            _ => merged.push(bp),
        }
    }
    Ok(merged)
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// One substituted piece: `alpha = anchor + direction * half * t^power`, `t` in `[0, 1]`.
#[derive(Clone, Copy, Debug)]
struct FiberPiece {
    anchor: Breakpoint,
    direction: f64,
    half: f64,
}

/// `int_{-pi}^{pi} sum_{p(z) = e^{ia}, z in omega} 1/|p'(z)| da`.
///
/// The angle circle is cut at arguments of critical values near the unit
/// circle and at angles where the lemniscate meets circular boundaries of
/// `omega`. Each cut is approached with `alpha - b = h t^k`, `k` one more than
/// the multiplicity of the critical point, which makes the integrand bounded.
pub fn length_fiber(p: &CoeffPoly, omega: &Region, budget: &QuadratureBudget) -> Result<LengthResult> {
    budget.validate()?;
    omega.validate()?;
    let bps = fiber_breakpoints(p, omega)?;
    let mut pieces = Vec::with_capacity(2 * bps.len());
    for (i, bp) in bps.iter().enumerate() {
        let next = bps[(i + 1) % bps.len()];
        let mut gap = if next.group == bp.group {
            next.offset - bp.offset
        } else {
            next.alpha - bp.alpha
        };
        if gap <= 0.0 {
            gap += 2.0 * PI;
        }
        let half = 0.5 * gap;
        pieces.push(FiberPiece {
            anchor: *bp,
            direction: 1.0,
            half,
        });
        pieces.push(FiberPiece {
            anchor: next,
            direction: -1.0,
            half,
        });
    }
    let c0 = p.coeffs()[0];
    let mut coeffs = p.coeffs().to_vec();
    let coeff_scale = p.scale().max(1.0);
    // Pieces leaving a merged breakpoint are graded geometrically in `t` down
    // to the spread, where the integrand has structure a coarse rule misses.
    let mut spans = Vec::new();
    let mut owner = Vec::new();
    for (i, piece) in pieces.iter().enumerate() {
        let k = piece.anchor.power as f64;
        let mut lo = 0.0;
        if piece.anchor.spread > 0.0 {
            let mut cut = (piece.anchor.spread / piece.half).powf(1.0 / k);
            while cut < 0.5 {
                spans.push((lo, cut));
                owner.push(i);
                lo = cut;
                cut *= 2.0;
            }
        }
        spans.push((lo, 1.0));
        owner.push(i);
    }
    let mut warm: Vec<Option<Vec<Complex64>>> = vec![None; spans.len()];

    let est = quad::integrate_pieces(&spans, budget.tol, 1e-15, budget.max_depth, |j, ts, out| {
        let piece = pieces[owner[j]];
        let k = piece.anchor.power;
        let u = piece.anchor.unit;
        let base = c0 - u;
        for (t, o) in ts.iter().zip(out.iter_mut()) {
            let s = piece.anchor.offset + piece.direction * piece.half * t.powi(k);
            let half_s = 0.5 * s;
            let rot = Complex64::new(-2.0 * half_s.sin().powi(2), s.sin());
            coeffs[0] = base - u * rot;
            let roots = solve_fiber(&coeffs, warm[j].as_deref(), coeff_scale)?;
            let mut sum = 0.0;
            for z in &roots {
                if omega.contains(*z) {
                    let d = p.eval_all(*z).1.norm();
                    sum += 1.0 / d;
                }
            }
            let jac = k as f64 * piece.half * t.powi(k - 1);
            let val = jac * sum;
            *o = if val.is_finite() { val } else { 0.0 };
            warm[j] = Some(roots);
        }
        Ok::<(), Error>(())
    })?;

    Ok(LengthResult {
        length: est.value,
        error_estimate: est.error,
        excluded_measure: 0.0,
        method: LengthMethod::Fiber,
        evaluations: est.evaluations,
        budget_exceeded: est.budget_exceeded,
    })
}

fn solve_fiber(coeffs: &[Complex64], warm: Option<&[Complex64]>, scale: f64) -> Result<Vec<Complex64>> {
    let usable = warm.filter(|w| min_gap(w) > 1e-9 * scale);
    let set = roots::solve(coeffs, usable);
    if set.converged {
        return Ok(set.roots);
    }
    let cold = roots::solve(coeffs, None);
    if cold.converged || cold.residuals.iter().all(|r| *r <= 1e-10 * scale) {
        return Ok(cold.roots);
    }
    Err(Error::NoConvergence {
        iterations: cold.iterations,
    })
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

/// Default critical-point exclusion radius for a set of critical points.
pub fn eps_crit(critical: &[Complex64]) -> f64 {
    1e-3 * critical.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

/// `int sum_{z on the lemniscate, |z| = r, z in omega} 1/|sin arg(p/(z p'))| dr`.
///
/// The origin and critical points lying on the lemniscate are cut out by
/// disks of radius [`eps_crit`]; the omitted length is bounded in
/// `excluded_measure`.
pub fn length_radial(p: &CoeffPoly, omega: &Region, budget: &QuadratureBudget) -> Result<LengthResult> {
    budget.validate()?;
    omega.validate()?;
    let n = p.degree();
    let crit = critical_points(p);
    let eps = eps_crit(&crit);
    let (mut r_lo, r_hi) = omega.radial_extent();
    let r_hi = r_hi.min(region::sublevel_radius(p, 1.0) * 1.01);
    let mut excluded = 0.0;
    if r_lo < eps {
        r_lo = eps;
        excluded += 2.0 * PI * eps * n as f64;
    }
    let mut domain = omega.clone().intersect(Region::annulus(Complex64::new(0.0, 0.0), r_lo, r_hi));
    let scale = p.scale().max(1.0);
    for cl in cluster_points(&crit, 1e-6 * eps.max(1e-3)) {
        let on_level = (p.eval(cl.center).norm() - 1.0).abs() <= 1e-3;
        let near = omega.classify(&region::Rect::centered(cl.center, eps)) != region::CellClass::Outside;
        if on_level && near && cl.center.norm() > eps {
            domain = domain.intersect(Region::disk(cl.center, eps).complement());
            excluded += 2.0 * PI * eps * (cl.multiplicity + 1) as f64;
        }
    }
    let _ = scale;
    if !(r_hi > r_lo) {
        return Ok(LengthResult {
            length: 0.0,
            error_estimate: 0.0,
            excluded_measure: excluded,
            method: LengthMethod::Radial,
            evaluations: 0,
            budget_exceeded: false,
        });
    }

    let count = |r: f64| -> Result<usize> {
        let sec = roots::circle_intersections(p, r)?;
        if sec.full_circle {
            return Err(Error::TransversalityFailure { radius: r, angle: 0.0 });
        }
        Ok(sec.points.iter().filter(|z| domain.contains(**z)).count())
    };

    // Coarse grid, refined until every count change is bracketed tightly.
    let samples = budget.samples_1d.max(2);
    let mut grid: Vec<(f64, usize)> = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        let r = r_lo + (r_hi - r_lo) * i as f64 / samples as f64;
        let inner = r.clamp(r_lo * (1.0 + 1e-12), r_hi * (1.0 - 1e-12));
        grid.push((r, count(inner)?));
    }

    let mut evaluations = 0;
    for _attempt in 0..64 {
        let mut edges = locate_changes(&grid, &count)?;
        let last = edges.len() - 1;
        for e in &mut edges[1..last] {
            if let Some(tip) = refine_tip(p, *e) {
                *e = tip;
            }
        }
        edges.sort_by(f64::total_cmp);
        let mut spans = Vec::with_capacity(edges.len() - 1);
        let mut expected = Vec::with_capacity(edges.len() - 1);
        let mut dropped = 0.0;
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let mid = 0.5 * (a + b);
            let c = count(mid)?;
            if b - a <= 1e-14 * b {
                // Too narrow for the count to be stable; near a tangency the
                // arc over a radial width w has length O(sqrt(w r)).
                dropped += 2.0 * (c.max(2) as f64) * (2.0 * (b - a) * b).sqrt();
                continue;
            }
            spans.push((a, b));
            expected.push(c);
        }
        let pieces: Vec<(f64, f64)> = vec![(0.0, 1.0); spans.len()];
        let mut anomaly: Option<f64> = None;
        let result = quad::integrate_pieces(&pieces, budget.tol, 1e-15, budget.max_depth, |j, ss, out| {
            let (a, b) = spans[j];
            for (s, o) in ss.iter().zip(out.iter_mut()) {
                let r = a + (b - a) * s * s * (3.0 - 2.0 * s);
                let jac = (b - a) * 6.0 * s * (1.0 - s);
                let sec = roots::circle_intersections(p, r)?;
                let inside: Vec<Complex64> = sec.points.into_iter().filter(|z| domain.contains(*z)).collect();
                if inside.len() != expected[j] {
                    if s.min(1.0 - s) < 1e-4 {
                        *o = 0.0;
                        continue;
                    }
                    anomaly = Some(r);
                    return Err(Error::Precondition("count anomaly".into()));
                }
                let mut sum = 0.0;
                let near_end = s.min(1.0 - s) < 1e-4;
                for z in inside {
                    let sine = roots::crossing_sine(p, z);
                    if sine.abs() < 1e-10 && near_end {
                        // Rounding-level distance from a petal tip.
                        continue;
                    }
                    if sine.abs() < 1e-10 {
                        return Err(Error::TransversalityFailure {
                            radius: r,
                            angle: sine.asin(),
                        });
                    }
                    sum += 1.0 / sine.abs();
                }
                *o = jac * sum;
            }
            Ok(())
        });
        match result {
            Ok(est) => {
                evaluations += est.evaluations;
                return Ok(LengthResult {
                    length: est.value,
                    error_estimate: est.error + dropped,
                    excluded_measure: excluded,
                    method: LengthMethod::Radial,
                    evaluations,
                    budget_exceeded: est.budget_exceeded,
                });
            }
            Err(Error::Precondition(_)) if anomaly.is_some() => {
                let r = anomaly.unwrap();
                let c = count(r)?;
                let pos = grid.partition_point(|g| g.0 < r);
                grid.insert(pos, (r, c));
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::BudgetExceeded {
        value: f64::NAN,
        error: f64::INFINITY,
    })
}

/// Sharpens a count-change radius that sits at a petal tip, where the
/// lemniscate is tangent to the circle: Newton on `ln|p| = 0`, `Im(z p'/p) = 0`.
fn refine_tip(p: &CoeffPoly, r: f64) -> Option<f64> {
    let mut best: Option<(f64, Complex64)> = None;
    for side in [1.0 - 1e-9, 1.0 + 1e-9] {
        let sec = roots::circle_intersections(p, r * side).ok()?;
        for z in sec.points {
            let s = roots::crossing_sine(p, z).abs();
            if best.is_none_or(|(b, _)| s < b) {
                best = Some((s, z));
            }
        }
    }
    let (sine, mut z) = best?;
    if sine > 1e-2 {
        return None;
    }
    for _ in 0..30 {
        let (v, d1, d2) = p.eval_all(z);
        if v.norm() == 0.0 {
            return None;
        }
        let phi = d1 / v;
        let g = z * phi;
        let dphi = d2 / v - phi * phi;
        let dg = phi + z * dphi;
        let f1 = v.norm().ln();
        let f2 = g.im;
        // Rows: gradients of f1 and f2 in (x, y).
        let (a11, a12) = (phi.re, -phi.im);
        let (a21, a22) = (dg.im, dg.re);
        let det = a11 * a22 - a12 * a21;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = (f1 * a22 - f2 * a12) / det;
        let dy = (a11 * f2 - a21 * f1) / det;
        z -= Complex64::new(dx, dy);
        if dx.hypot(dy) <= 1e-15 * z.norm() {
            break;
        }
    }
    let tip = z.norm();
    ((tip - r).abs() <= 1e-6 * r).then_some(tip)
}

/// Radii where the count changes, located by bisection between grid samples
/// with different counts; includes both ends of the grid.
fn locate_changes<F>(grid: &[(f64, usize)], count: &F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<usize>,
{
    let mut edges = vec![grid[0].0];
    for w in grid.windows(2) {
        let (a, ca) = w[0];
        let (b, cb) = w[1];
        if ca != cb {
            bisect_changes(a, ca, b, cb, count, &mut edges, 0)?;
        }
    }
    edges.push(grid[grid.len() - 1].0);
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * x.abs().max(1.0));
    Ok(edges)
}

fn bisect_changes<F>(a: f64, ca: usize, b: f64, cb: usize, count: &F, out: &mut Vec<f64>, depth: u32) -> Result<()>
where
    F: Fn(f64) -> Result<usize>,
{
    if b - a <= 1e-13 * b.max(1e-300) || depth > 60 {
        out.push(0.5 * (a + b));
        return Ok(());
    }
    let m = 0.5 * (a + b);
    let cm = count(m)?;
    if cm != ca {
        bisect_changes(a, ca, m, cm, count, out, depth + 1)?;
    }
    if cm != cb {
        bisect_changes(m, cm, b, cb, count, out, depth + 1)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{family, Family};

    #[test]
    fn closed_form_values() {
        assert!((length_p0_closed(1) - 2.0 * PI).abs() < 1e-13);
        // Independent values from mpmath: 2^(1/n) * beta(1/2, 1/(2n)).
        assert!((length_p0_closed(3) - 9.179_724_222).abs() < 1e-8);
        assert!((length_p0_closed(9) - 20.899_111_802).abs() < 1e-8);
        assert!((length_p0_closed(12) - 26.866_651_414).abs() < 1e-8);
    }

    #[test]
    fn asymptote_values() {
        assert!((p0_asymptote(3) - 8.773).abs() < 5e-4);
        assert!((p0_asymptote(9) - 20.773).abs() < 5e-4);
    }

    #[test]
    fn outer_length_limits() {
        for n in [2, 5, 9] {
            let full = length_p0_outer(n, 0.0).unwrap();
            assert!((full - length_p0_closed(n)).abs() < 1e-9 * full, "n={n}");
        }
        let r0 = 0.5;
        let outer = length_p0_outer(9, r0).unwrap();
        let predicted = length_p0_closed(9) - 2.0 * 9.0 * r0;
        assert!((outer - predicted).abs() < 1e-5, "{outer} vs {predicted}");
    }

    #[test]
    fn fiber_unit_circle() {
        let p = CoeffPoly::monic(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        let res = length_fiber(&p, &Region::Plane, &QuadratureBudget::default()).unwrap();
        assert!((res.length - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn fiber_p0_matches_closed_form() {
        for n in [2, 3, 7] {
            let p = family(Family::P0, n, 0.0).unwrap();
            let res = length_fiber(p.poly(), &Region::Plane, &QuadratureBudget::default()).unwrap();
            let exact = length_p0_closed(n);
            assert!((res.length - exact).abs() < 1e-9 * exact, "n={n}: {res:?}");
        }
    }

    #[test]
    fn fiber_cassini_shrinks() {
        let mut prev = f64::INFINITY;
        for r in [4.0, 8.0, 16.0] {
            let p = family(Family::Cassini, 2, r).unwrap();
            let res = length_fiber(p.poly(), &Region::Plane, &QuadratureBudget::default()).unwrap();
            // Two near-circles of radius 1/(2r).
            assert!((res.length - 2.0 * PI / r).abs() < 0.05 * res.length, "r={r}: {res:?}");
            assert!(res.length < prev);
            prev = res.length;
        }
    }

    #[test]
    fn fiber_outside_disk_matches_outer_formula() {
        let p = family(Family::P0, 9, 0.0).unwrap();
        let omega = Region::disk(Complex64::new(0.0, 0.0), 0.5).complement();
        let res = length_fiber(p.poly(), &omega, &QuadratureBudget::default()).unwrap();
        let outer = length_p0_outer(9, 0.5).unwrap();
        assert!((res.length - outer).abs() < 1e-5, "{res:?} vs {outer}");
    }

    #[test]
    fn radial_inner_annulus_p0() {
        let p = family(Family::P0, 9, 0.0).unwrap();
        let omega = Region::annulus(Complex64::new(0.0, 0.0), 0.1, 0.5);
        let res = length_radial(p.poly(), &omega, &QuadratureBudget::with_tol(1e-8)).unwrap();
        assert!((res.length - 7.2).abs() < 1e-3, "{res:?}");
        let fib = length_fiber(p.poly(), &omega, &QuadratureBudget::default()).unwrap();
        assert!((res.length - fib.length).abs() < 1e-4 * fib.length, "{res:?} {fib:?}");
    }

    #[test]
    fn radial_origin_is_excluded() {
        let p = family(Family::P0, 4, 0.0).unwrap();
        let res = length_radial(p.poly(), &Region::disk(Complex64::new(0.0, 0.0), 0.5), &QuadratureBudget::default()).unwrap();
        assert!(res.excluded_measure > 0.0);
        assert!((res.length - 2.0 * 4.0 * (0.5 - eps_crit(&[Complex64::new(0.0, 0.0)]))).abs() < 1e-3);
    }

    #[test]
    fn radial_matches_fiber_with_petal_tips() {
        let spec = family(Family::Example1, 5, 0.4).unwrap();
        let omega = Region::annulus(Complex64::new(0.0, 0.0), 0.6, 3.0);
        let budget = QuadratureBudget::with_tol(1e-9);
        let rad = length_radial(spec.poly(), &omega, &budget).unwrap();
        let fib = length_fiber(spec.poly(), &omega, &budget).unwrap();
        assert!((rad.length - fib.length).abs() < 1e-5 * fib.length, "{rad:?} {fib:?}");
    }
}
