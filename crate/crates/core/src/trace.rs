//! Predictor–corrector tracing of level curves `{|p| = R}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::arclength::{critical_points, LengthMethod, LengthResult};
use crate::error::{Error, Result};
use crate::poly::CoeffPoly;
use crate::quad::QuadratureBudget;
use crate::region::Region;
use crate::roots::{self, cluster_points};

/// Largest step along the curve.
pub const MAX_STEP: f64 = 0.05;
/// Largest tangent turn accepted in one step (radians).
const MAX_TURN: f64 = 0.15;

/// One traced curve component.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    pub vertices: Vec<Complex64>,
    /// Unit tangent at each vertex, in the direction of travel.
    pub tangents: Vec<Complex64>,
    pub closed: bool,
    /// The component runs through a critical point on the level set.
    pub through_critical: bool,
    /// Step control gave up before the component closed.
    pub stalled: bool,
}

/// Polyline approximation of a level set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trace {
    pub level: f64,
    pub components: Vec<Component>,
}

impl Component {
    fn segments(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        (0..self.vertices.len().saturating_sub(1)).map(move |i| {
            let chord = (self.vertices[i + 1] - self.vertices[i]).norm();
            let turn = (self.tangents[i + 1] / self.tangents[i]).arg().abs();
            let arc = if turn > 1e-12 { chord * (0.5 * turn) / (0.5 * turn).sin() } else { chord };
            (i, chord, arc)
        })
    }

    /// Arc-corrected polyline length.
    pub fn length(&self) -> f64 {
        self.segments().map(|(_, _, arc)| arc).sum()
    }
}

impl Trace {
    pub fn closed_flags(&self) -> Vec<bool> {
        self.components.iter().map(|c| c.closed).collect()
    }

    pub fn length(&self) -> f64 {
        self.components.iter().map(|c| c.length()).sum()
    }

    /// Length inside a region, with crossings of the region boundary located
    /// by bisection along the chord.
    pub fn length_in(&self, omega: &Region) -> LengthResult {
        let mut total = 0.0;
        let mut err = 0.0;
        for comp in &self.components {
            for (i, chord, arc) in comp.segments() {
                let a = comp.vertices[i];
                let b = comp.vertices[i + 1];
                let (ina, inb) = (omega.contains(a), omega.contains(b));
                let correction = arc - chord;
                let turn = (comp.tangents[i + 1] / comp.tangents[i]).arg().abs();
                err += correction.abs() * turn;
                match (ina, inb) {
                    (true, true) => total += arc,
                    (false, false) => {}
                    _ => {
                        let (mut lo, mut hi) = (0.0, 1.0);
                        for _ in 0..50 {
                            let mid = 0.5 * (lo + hi);
                            if omega.contains(a + (b - a) * mid) == ina {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        let frac = if ina { lo } else { 1.0 - lo };
                        total += arc * frac;
                        err += correction.abs();
                    }
                }
            }
        }
        LengthResult {
            length: total,
            error_estimate: err,
            excluded_measure: 0.0,
            method: LengthMethod::Trace,
            evaluations: self.components.iter().map(|c| c.vertices.len()).sum(),
            budget_exceeded: self.components.iter().any(|c| c.stalled),
        }
    }
}

struct Tracer<'a> {
    p: &'a CoeffPoly,
    ln_level: f64,
    /// Critical points lying on the level set, with their jump radius.
    on_level: Vec<(Complex64, f64)>,
    max_step: f64,
    max_vertices: usize,
}

/// Traces every component of `{|p| = level}`.
///
/// Seeds come from fibers `p = level e^{ia}` at four angles (every component
/// covers the whole circle of values, so each angle meets each component)
/// and, at level 1, from circle intersections. Critical points on the level
/// set are crossed in a straight line, which keeps to one smooth branch.
pub fn trace_lemniscate(p: &CoeffPoly, level: f64, budget: &QuadratureBudget) -> Result<Trace> {
    trace_in(p, level, &Region::Plane, budget)
}

/// Traces the arcs of `{|p| = level}` inside `omega`.
///
/// Arcs are followed both ways from each seed until they close or leave
/// `omega`; the last vertex of an open arc lies just outside. Seeds are the
/// fiber points inside `omega` plus the crossings of its boundary circles, so
/// every arc that enters `omega` is found. Nothing outside `omega` is traced,
/// which keeps badly conditioned parts of the level set out of the way.
pub fn trace_in(p: &CoeffPoly, level: f64, omega: &Region, budget: &QuadratureBudget) -> Result<Trace> {
    omega.validate()?;
    if !(level > 0.0 && level.is_finite()) {
        return Err(Error::BadParameter(format!("level must be positive, got {level}")));
    }
    budget.validate()?;
    let crit = critical_points(p);
    let scale = crit.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut on_level = Vec::new();
    let clusters = cluster_points(&crit, 1e-6 * scale);
    for cl in &clusters {
        let v = p.eval(cl.center).norm();
        let roundoff = 64.0 * f64::EPSILON * p.coeffs().iter().enumerate().map(|(k, c)| c.norm() * cl.center.norm().powi(k as i32)).sum::<f64>();
        if (v - level).abs() <= roundoff.max(1e-300) {
            let others = clusters
                .iter()
                .filter(|o| o.center != cl.center)
                .map(|o| (o.center - cl.center).norm())
                .fold(f64::INFINITY, f64::min);
            // Inside the roundoff disk |p - p(zeta)| ~ 1e-11 the level set is
            // not resolved in double precision; jump over at least that.
            let t = p.taylor_at(cl.center);
            let lead = t[1..]
                .iter()
                .enumerate()
                .find(|(_, c)| c.norm() > 1e-9 * p.scale())
                .map(|(k, c)| (k + 1, c.norm()));
            let fuzz = lead.map_or(0.0, |(k, c)| (1e-11 * level.max(1.0) / c).powf(1.0 / k as f64));
            let radius = (1e-2 * cl.center.norm().max(1.0)).max(3.0 * fuzz).min(0.3 * others);
            on_level.push((cl.center, radius));
        }
    }
    // Resolution scales with the size of the level set.
    let extent = crate::region::sublevel_radius(p, level);
    let tracer = Tracer {
        p,
        ln_level: level.ln(),
        on_level,
        max_step: MAX_STEP.min(0.02 * extent),
        max_vertices: 400_000,
    };

    let mut seeds = Vec::new();
    for j in 0..4 {
        let alpha = 0.1 + j as f64 * PI / 2.0;
        let set = roots::fiber(p, Complex64::from_polar(level, alpha), None);
        seeds.extend(set.roots.into_iter().filter(|z| omega.contains(*z)));
    }
    if (level - 1.0).abs() < 1e-15 {
        let mut circles = omega.boundary_circles();
        if circles.is_empty() {
            circles = vec![(Complex64::new(0.0, 0.0), 0.5), (Complex64::new(0.0, 0.0), 1.0)];
        }
        for (center, r) in circles {
            let Ok(shifted) = CoeffPoly::monic(p.taylor_at(center)) else { continue };
            if let Ok(sec) = roots::circle_intersections(&shifted, r) {
                seeds.extend(sec.points.into_iter().map(|z| z + center));
            }
        }
    }

    let mut components: Vec<Component> = Vec::new();
    for seed in seeds {
        let Some(seed) = tracer.correct(seed) else { continue };
        if tracer.near_on_level(seed).is_some() {
            continue;
        }
        if components.iter().any(|c| covers(c, seed)) {
            continue;
        }
        let forward = tracer.follow(seed, None, omega);
        if forward.closed || forward.stalled {
            components.push(forward);
            continue;
        }
        let t = forward.tangents[0];
        let backward = tracer.follow(seed, Some(-t), omega);
        components.push(join(backward, forward));
    }
    Ok(Trace { level, components })
}

/// One open arc from a backward and a forward run out of the same seed.
fn join(backward: Component, forward: Component) -> Component {
    let mut vertices: Vec<Complex64> = backward.vertices.iter().rev().copied().collect();
    let mut tangents: Vec<Complex64> = backward.tangents.iter().rev().map(|t| -t).collect();
    vertices.extend_from_slice(&forward.vertices[1..]);
    tangents.extend_from_slice(&forward.tangents[1..]);
    Component {
        vertices,
        tangents,
        closed: false,
        through_critical: backward.through_critical || forward.through_critical,
        stalled: backward.stalled || forward.stalled,
    }
}

fn covers(c: &Component, z: Complex64) -> bool {
    c.vertices.windows(2).any(|w| {
        let len = (w[1] - w[0]).norm();
        segment_distance(w[0], w[1], z) < 0.03 * len.max(1e-12)
    })
}

fn segment_distance(a: Complex64, b: Complex64, z: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

impl Tracer<'_> {
    fn residual(&self, z: Complex64) -> f64 {
        self.p.eval(z).norm().ln() - self.ln_level
    }

    /// Newton along the gradient of `ln |p|`.
    fn correct(&self, mut z: Complex64) -> Option<Complex64> {
        for _ in 0..12 {
            let (v, d1, _) = self.p.eval_all(z);
            if v.norm() == 0.0 {
                return None;
            }
            let f = v.norm().ln() - self.ln_level;
            if f.abs() < 1e-13 {
                return Some(z);
            }
            let phi = d1 / v;
            if phi.norm() == 0.0 {
                return None;
            }
            z -= f / phi;
            if !z.is_finite() {
                return None;
            }
        }
        (self.residual(z).abs() < 1e-10).then_some(z)
    }

    fn tangent(&self, z: Complex64) -> Option<Complex64> {
        let (v, d1, _) = self.p.eval_all(z);
        let phi = d1 / v;
        let t = Complex64::i() * phi.conj();
        (t.norm() > 0.0 && t.is_finite()).then(|| t / t.norm())
    }

    fn step_hint(&self, z: Complex64) -> f64 {
        let (v, d1, d2) = self.p.eval_all(z);
        let bound = 0.5 * v.norm() * d1.norm() / d2.norm();
        if bound.is_finite() {
            bound.min(self.max_step)
        } else {
            self.max_step
        }
    }

    fn near_on_level(&self, z: Complex64) -> Option<(Complex64, f64)> {
        self.on_level.iter().copied().find(|(zeta, r)| (z - zeta).norm() < *r)
    }

    fn follow(&self, start: Complex64, direction: Option<Complex64>, clip: &Region) -> Component {
        let mut t = direction.or_else(|| self.tangent(start)).unwrap_or(Complex64::new(1.0, 0.0));
        let mut comp = Component {
            vertices: vec![start],
            tangents: vec![t],
            closed: false,
            through_critical: false,
            stalled: false,
        };
        let mut z = start;
        let mut h = self.step_hint(start).max(1e-6 * self.max_step);
        let mut travelled = 0.0;
        let mut largest_step: f64 = 0.0;
        while comp.vertices.len() < self.max_vertices {
            // Straight through a critical point on the level set.
            if let Some((zeta, radius)) = self.near_on_level(z) {
                let d = zeta - z;
                if (d * t.conj()).re > 0.5 * d.norm() {
                    let target = zeta + d;
                    if let Some(out) = self.correct(target) {
                        let dir = (out - zeta) / (out - zeta).norm();
                        let into = d / d.norm();
                        comp.vertices.push(zeta);
                        comp.tangents.push(into);
                        // The chord z -> zeta is straight; make its tangents agree.
                        let last = comp.tangents.len() - 2;
                        comp.tangents[last] = into;
                        comp.vertices.push(out);
                        comp.tangents.push(dir);
                        comp.through_critical = true;
                        travelled += d.norm() + (out - zeta).norm();
                        z = out;
                        t = dir;
                        h = (0.5 * radius).min(self.step_hint(z));
                        continue;
                    }
                }
            }

            // Close the loop once the start is within one step ahead.
            let back = start - z;
            if travelled > 4.0 * largest_step && back.norm() <= h.max(largest_step * 0.5) && (back * t.conj()).re > 0.0 {
                comp.vertices.push(start);
                comp.tangents.push(comp.tangents[0]);
                comp.closed = true;
                return comp;
            }

            let mut accepted = None;
            let mut trial = h;
            for _ in 0..60 {
                let predicted = z + t * trial;
                if let Some(next) = self.correct(predicted) {
                    if let Some(mut tn) = self.tangent(next) {
                        if (tn * t.conj()).re < 0.0 {
                            tn = -tn;
                        }
                        let turn = (tn / t).arg().abs();
                        let dist = (next - z).norm();
                        if turn <= MAX_TURN && dist <= 1.5 * trial && dist > 0.0 {
                            accepted = Some((next, tn, dist, turn));
                            break;
                        }
                    }
                }
                trial *= 0.5;
                if trial < 1e-14 * z.norm().max(1.0) {
                    break;
                }
            }
            let Some((next, tn, dist, turn)) = accepted else {
                comp.stalled = true;
                return comp;
            };
            comp.vertices.push(next);
            comp.tangents.push(tn);
            if !clip.contains(next) {
                return comp;
            }
            travelled += dist;
            largest_step = largest_step.max(dist);
            z = next;
            t = tn;
            let hint = self.step_hint(z);
            h = if turn < 0.05 { (trial * 1.5).min(self.max_step) } else { trial };
            h = h.min(hint.max(trial * 0.5));
        }
        comp.stalled = true;
        comp
    }
}

/// Length of the lemniscate inside `omega` from a trace at level 1.
pub fn length_trace(p: &CoeffPoly, omega: &Region, budget: &QuadratureBudget) -> Result<LengthResult> {
    let trace = trace_in(p, 1.0, omega, budget)?;
    Ok(trace.length_in(omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arclength::length_p0_closed;
    use crate::poly::{family, Family};

    #[test]
    fn bernoulli_lemniscate() {
        let p = family(Family::Cassini, 2, 1.0).unwrap();
        let tr = trace_lemniscate(p.poly(), 1.0, &QuadratureBudget::default()).unwrap();
        assert_eq!(tr.components.len(), 1);
        let comp = &tr.components[0];
        assert!(comp.closed && comp.through_critical && !comp.stalled);
        // Bernoulli lemniscate r^2 = 2 cos 2t has length sqrt(2) times the lemniscate constant 2 * 2.622057...
        let exact = 2f64.sqrt() * 2.0 * 2.622_057_554_292_119_8;
        assert!((tr.length() - exact).abs() < 1e-4 * exact, "{}", tr.length());
    }

    #[test]
    fn vertices_on_level() {
        let p = family(Family::Example1, 6, 0.4).unwrap();
        let tr = trace_lemniscate(p.poly(), 1.0, &QuadratureBudget::default()).unwrap();
        for c in &tr.components {
            assert!(c.closed);
            for w in c.vertices.windows(2) {
                assert!((w[1] - w[0]).norm() <= MAX_STEP * 1.5 + 1e-12);
            }
            for v in &c.vertices {
                assert!((p.poly().eval(*v).norm() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn p0_trace_length() {
        let p = family(Family::P0, 9, 0.0).unwrap();
        let tr = trace_lemniscate(p.poly(), 1.0, &QuadratureBudget::default()).unwrap();
        let exact = length_p0_closed(9);
        assert!((tr.length() - exact).abs() < 1e-3 * exact, "{} vs {exact}", tr.length());
        assert!(tr.components.iter().all(|c| c.closed));
    }

    #[test]
    fn example1_trace_deficit() {
        let p = family(Family::Example1, 9, 0.5).unwrap();
        let tr = trace_lemniscate(p.poly(), 1.0, &QuadratureBudget::default()).unwrap();
        let deficit = length_p0_closed(9) - tr.length();
        assert!((deficit - 2.0).abs() < 0.4, "{deficit}");
    }

    #[test]
    fn high_level_is_one_curve() {
        let p = family(Family::P0, 9, 0.0).unwrap();
        let tr = trace_lemniscate(p.poly(), 4.0, &QuadratureBudget::default()).unwrap();
        assert_eq!(tr.components.len(), 1);
        assert!(tr.components[0].closed);
    }
}
