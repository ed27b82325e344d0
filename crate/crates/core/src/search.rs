//! Derivative-free search for long lemniscates among normalized polynomials,
//! and perturbation studies around `z^n - 1`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::lemniscate_length;
use crate::poly::{family, CriticalSpec, Family};
use crate::quad::QuadratureBudget;
use crate::suites::{normalized_of_size, rng};

/// A normalized polynomial in search coordinates.
///
/// `params` holds the first `n - 2` critical points as interleaved
/// `(re, im)` pairs followed by `p(0)`; the last critical point is minus the
/// sum of the others.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchPoint {
    pub params: Vec<f64>,
    pub objective: f64,
    pub feasible: bool,
}

impl SearchPoint {
    pub fn param_count(n: usize) -> usize {
        2 * (n - 2) + 1
    }

    pub fn from_params(params: Vec<f64>) -> Result<Self> {
        if params.is_empty() || params.len().is_multiple_of(2) {
            return Err(Error::BadParameter(format!(
                "search point needs an odd number of parameters, got {}",
                params.len()
            )));
        }
        let feasible = is_feasible(&params);
        Ok(Self {
            params,
            objective: f64::NEG_INFINITY,
            feasible,
        })
    }

    /// Encodes a normalized spec of degree at least 2.
    pub fn encode(spec: &CriticalSpec) -> Result<Self> {
        let n = spec.degree();
        if n < 2 || !spec.is_normalized() {
            return Err(Error::BadParameter("search points encode normalized specs of degree >= 2".into()));
        }
        let mut params = Vec::with_capacity(Self::param_count(n));
        for z in &spec.critical_points()[..n - 2] {
            params.push(z.re);
            params.push(z.im);
        }
        params.push(spec.constant_term().re);
        Self::from_params(params)
    }

    pub fn degree(&self) -> usize {
        (self.params.len() - 1) / 2 + 2
    }

    pub fn decode(&self) -> Result<CriticalSpec> {
        decode(&self.params)
    }

    /// Moves the point onto the feasible set: `p(0)` clamped to be
    /// nonpositive, non-finite coordinates reset to zero.
    pub fn project(&mut self) {
        project(&mut self.params);
        self.feasible = true;
    }
}

fn is_feasible(params: &[f64]) -> bool {
    params.iter().all(|x| x.is_finite()) && params.last().is_some_and(|c| *c <= 0.0)
}

fn project(params: &mut [f64]) {
    for x in params.iter_mut() {
        if !x.is_finite() {
            *x = 0.0;
        }
    }
    if let Some(c) = params.last_mut() {
        *c = c.min(0.0);
    }
}

fn decode(params: &[f64]) -> Result<CriticalSpec> {
    let (pairs, c0) = params.split_at(params.len() - 1);
    let mut pts: Vec<Complex64> = pairs.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
    let sum: Complex64 = pts.iter().sum();
    pts.push(-sum);
    CriticalSpec::normalized(pts, Complex64::new(c0[0].min(0.0), 0.0))
}

/// Lemniscate length at a point; infeasible points and failed evaluations
/// give `-inf`.
pub fn objective(point: &SearchPoint, budget: &QuadratureBudget) -> f64 {
    evaluate(&point.params, budget)
}

fn evaluate(params: &[f64], budget: &QuadratureBudget) -> f64 {
    if !is_feasible(params) {
        return f64::NEG_INFINITY;
    }
    let Ok(spec) = decode(params) else {
        return f64::NEG_INFINITY;
    };
    match lemniscate_length(spec.poly(), budget) {
        Ok(r) if r.length.is_finite() => r.length,
        _ => f64::NEG_INFINITY,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Budget for the final evaluation; the search itself runs 10x looser.
    pub budget: QuadratureBudget,
    pub max_iterations: usize,
    pub diameter_tol: f64,
    pub initial_step: f64,
    /// `||p_best||` at or below this counts as having reached `z^n - 1`.
    pub p0_threshold: f64,
    /// Total size of the random starting points.
    pub start_size: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: QuadratureBudget::with_tol(1e-8),
            max_iterations: 400,
            diameter_tol: 1e-5,
            initial_step: 0.05,
            p0_threshold: 0.05,
            start_size: 0.3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub restart: usize,
    pub iteration: usize,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub objective: f64,
    pub total_size: f64,
    pub converged_to_p0: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub best: SearchPoint,
    pub restarts: usize,
    pub converged_to_p0: bool,
    pub history: Vec<HistoryEntry>,
    pub per_restart: Vec<RestartSummary>,
}

struct Vertex {
    x: Vec<f64>,
    f: f64,
}

/// Nelder-Mead on `-length` from `start`.
pub fn local_search(start: &SearchPoint, config: &SearchConfig) -> Result<SearchReport> {
    run_restart(0, start, config)
}

fn run_restart(restart: usize, start: &SearchPoint, config: &SearchConfig) -> Result<SearchReport> {
    config.budget.validate()?;
    let loose = config.budget.loosened(10.0);
    let f = |x: &[f64]| -evaluate(x, &loose);
    let dim = start.params.len();

    let build = |x0: Vec<f64>, f0: f64| {
        let mut simplex = vec![Vertex { x: x0.clone(), f: f0 }];
        for i in 0..dim {
            let mut x = x0.clone();
            // Step toward the feasible side on the p(0) axis.
            x[i] += if i + 1 == dim { -config.initial_step } else { config.initial_step };
            project(&mut x);
            simplex.push(Vertex { f: f(&x), x });
        }
        simplex
    };
    let mut x0 = start.params.clone();
    project(&mut x0);
    let f0 = f(&x0);
    let mut simplex = build(x0, f0);

    let mut history = Vec::new();
    let mut iteration = 0;
    // The maximum is a cone point where the simplex tends to collapse early;
    // a collapsed simplex is rebuilt around its best vertex for as long as
    // the rebuild keeps improving.
    let mut collapsed_at = f64::INFINITY;
    loop {
        simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
        history.push(HistoryEntry {
            restart,
            iteration,
            objective: -simplex[0].f,
        });
        let diameter = simplex[1..]
            .iter()
            .map(|v| distance(&v.x, &simplex[0].x))
            .fold(0.0, f64::max);
        if iteration >= config.max_iterations {
            break;
        }
        if diameter < config.diameter_tol {
            if simplex[0].f >= collapsed_at {
                break;
            }
            collapsed_at = simplex[0].f;
            let best = simplex.swap_remove(0);
            simplex = build(best.x, best.f);
            continue;
        }
        iteration += 1;

        let worst = simplex.len() - 1;
        let mut centroid = vec![0.0; dim];
        for v in &simplex[..worst] {
            for (c, x) in centroid.iter_mut().zip(&v.x) {
                *c += x / dim as f64;
            }
        }
        let along = |t: f64, towards: &[f64]| -> Vec<f64> {
            let mut x: Vec<f64> = centroid.iter().zip(towards).map(|(c, w)| c + t * (w - c)).collect();
            project(&mut x);
            x
        };
        let xr = along(-1.0, &simplex[worst].x);
        let fr = f(&xr);
        if fr < simplex[0].f {
            let xe = along(-2.0, &simplex[worst].x);
            let fe = f(&xe);
            simplex[worst] = if fe < fr { Vertex { x: xe, f: fe } } else { Vertex { x: xr, f: fr } };
            continue;
        }
        if fr < simplex[worst - 1].f {
            simplex[worst] = Vertex { x: xr, f: fr };
            continue;
        }
        let (xc, fc) = if fr < simplex[worst].f {
            let xc = along(-0.5, &simplex[worst].x);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(0.5, &simplex[worst].x);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < simplex[worst].f.min(fr) {
            simplex[worst] = Vertex { x: xc, f: fc };
            continue;
        }
        let best = simplex[0].x.clone();
        for v in &mut simplex[1..] {
            for (x, b) in v.x.iter_mut().zip(&best) {
                *x = b + 0.5 * (*x - b);
            }
            project(&mut v.x);
            v.f = f(&v.x);
        }
    }

    let mut best = SearchPoint::from_params(simplex[0].x.clone())?;
    best.objective = evaluate(&best.params, &config.budget);
    let total_size = best.decode()?.norms().total_size;
    let converged = total_size <= config.p0_threshold;
    Ok(SearchReport {
        best: best.clone(),
        restarts: 1,
        converged_to_p0: converged,
        history,
        per_restart: vec![RestartSummary {
            restart,
            objective: best.objective,
            total_size,
            converged_to_p0: converged,
            iterations: iteration,
        }],
    })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Seeded random starting point of degree `n` and total size `size`.
pub fn random_start(n: usize, size: f64, seed: u64, restart: usize) -> Result<SearchPoint> {
    let mut r = rng(seed, 0x1000 + restart as u64);
    SearchPoint::encode(&normalized_of_size(&mut r, n, size)?)
}

/// Local searches from `restarts` seeded random starts, run in parallel and
/// merged in restart order.
pub fn search(n: usize, restarts: usize, seed: u64, config: &SearchConfig) -> Result<SearchReport> {
    if n < 2 || restarts == 0 {
        return Err(Error::BadParameter(format!(
            "search needs n >= 2 and at least one restart, got n={n}, restarts={restarts}"
        )));
    }
    let reports: Vec<SearchReport> = (0..restarts)
        .into_par_iter()
        .map(|i| run_restart(i, &random_start(n, config.start_size, seed, i)?, config))
        .collect::<Result<_>>()?;
    Ok(merge(reports))
}

fn merge(reports: Vec<SearchReport>) -> SearchReport {
    let mut best_idx = 0;
    for (i, r) in reports.iter().enumerate() {
        if r.best.objective > reports[best_idx].best.objective {
            best_idx = i;
        }
    }
    let best = reports[best_idx].best.clone();
    let converged_to_p0 = reports[best_idx].converged_to_p0;
    let restarts = reports.len();
    let mut history = Vec::new();
    let mut per_restart = Vec::new();
    for r in reports {
        history.extend(r.history);
        per_restart.extend(r.per_restart);
    }
    SearchReport {
        best,
        restarts,
        converged_to_p0,
        history,
        per_restart,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationSample {
    pub magnitude: f64,
    /// Realized `||p||` of the sampled polynomial.
    pub size: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationRow {
    pub magnitude: f64,
    pub samples: usize,
    pub failures: usize,
    pub min_delta: f64,
    pub mean_delta: f64,
    /// Mean of `delta / ||p||`.
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationTable {
    pub n: usize,
    /// Length of `z^n - 1` at the study budget.
    pub reference: f64,
    pub rows: Vec<PerturbationRow>,
    pub samples: Vec<PerturbationSample>,
    /// Mean of `delta / ||p||` over every sample with `||p|| > 0`.
    pub c_fit: f64,
    pub failures: usize,
}

/// Draws a normalized spec whose realized size is within 5% of `size`.
///
/// The origin-repulsion part enters through `(l0/n)^n`, which rounds away
/// next to `-1` when small; such draws are redrawn.
fn perturbation<R: Rng>(r: &mut R, n: usize, size: f64) -> Result<CriticalSpec> {
    let mut spec = normalized_of_size(r, n, size)?;
    for _ in 0..500 {
        if size == 0.0 || (spec.norms().total_size - size).abs() <= 0.05 * size {
            break;
        }
        spec = normalized_of_size(r, n, size)?;
    }
    Ok(spec)
}

/// `l(z^n - 1) - l(p)` for `directions` random normalized perturbations at
/// each magnitude.
pub fn perturbation_study(
    n: usize,
    magnitudes: &[f64],
    directions: usize,
    seed: u64,
    budget: &QuadratureBudget,
) -> Result<PerturbationTable> {
    if n < 3 {
        return Err(Error::BadParameter(format!("perturbation study needs n >= 3, got {n}")));
    }
    let mut r = rng(seed, 0x2000 + n as u64);
    let mut specs = Vec::new();
    for &m in magnitudes {
        for _ in 0..directions {
            specs.push((m, perturbation(&mut r, n, m)?));
        }
    }
    tabulate(n, specs, budget)
}

/// The same table along one built-in family: `example1` with `a = m / 2`
/// (dispersion `m`) or `example2` with `a = m` (origin repulsion `m`).
pub fn direction_study(name: Family, n: usize, magnitudes: &[f64], budget: &QuadratureBudget) -> Result<PerturbationTable> {
    let specs = magnitudes
        .iter()
        .map(|&m| {
            let spec = match name {
                _ if m == 0.0 => family(Family::P0, n, 0.0),
                Family::Example1 => family(name, n, 0.5 * m),
                Family::Example2 => family(name, n, m),
                _ => Err(Error::BadParameter(format!("no perturbation direction for {name}"))),
            }?;
            Ok((m, spec))
        })
        .collect::<Result<Vec<_>>>()?;
    tabulate(n, specs, budget)
}

fn tabulate(n: usize, specs: Vec<(f64, CriticalSpec)>, budget: &QuadratureBudget) -> Result<PerturbationTable> {
    let reference = lemniscate_length(family(Family::P0, n, 0.0)?.poly(), budget)?.length;
    let lengths: Vec<Option<f64>> = specs
        .par_iter()
        .map(|(_, s)| lemniscate_length(s.poly(), budget).ok().map(|l| l.length).filter(|l| l.is_finite()))
        .collect();

    let mut samples = Vec::new();
    let mut rows: Vec<PerturbationRow> = Vec::new();
    let mut failures = 0;
    for ((m, spec), len) in specs.iter().zip(lengths) {
        if rows.last().is_none_or(|row| row.magnitude != *m) {
            rows.push(PerturbationRow {
                magnitude: *m,
                samples: 0,
                failures: 0,
                min_delta: f64::INFINITY,
                mean_delta: 0.0,
                slope: 0.0,
            });
        }
        let row = rows.last_mut().unwrap();
        let Some(len) = len else {
            row.failures += 1;
            failures += 1;
            continue;
        };
        let size = spec.norms().total_size;
        let delta = reference - len;
        row.samples += 1;
        row.min_delta = row.min_delta.min(delta);
        row.mean_delta += delta;
        if size > 0.0 {
            row.slope += delta / size;
        }
        samples.push(PerturbationSample {
            magnitude: *m,
            size,
            delta,
        });
    }
    for row in &mut rows {
        if row.samples > 0 {
            row.mean_delta /= row.samples as f64;
            row.slope /= row.samples as f64;
        }
    }
    let sloped: Vec<f64> = samples.iter().filter(|s| s.size > 0.0).map(|s| s.delta / s.size).collect();
    let c_fit = if sloped.is_empty() {
        0.0
    } else {
        sloped.iter().sum::<f64>() / sloped.len() as f64
    };
    Ok(PerturbationTable {
        n,
        reference,
        rows,
        samples,
        c_fit,
        failures,
    })
}
