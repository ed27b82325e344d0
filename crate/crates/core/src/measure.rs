//! Quadtree integration over regions: areas, the `|psi|` measure and Riesz
//! potentials.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::poly::CriticalSpec;
use crate::quad::{pairwise_sum, Estimate, QuadratureBudget, GAUSS2, GAUSS3, GAUSS5};
use crate::region::{CellClass, Rect, Region};

/// Depth limit for the local refinement of cells lying inside the region.
const LOCAL_DEPTH: u32 = 10;

/// `(area / pi)^{1/2}`.
pub fn equiv_radius(area: f64) -> f64 {
    (area.max(0.0) / PI).sqrt()
}

/// Integrand for the quadtree: either the constant 1 or a function with
/// inverse-distance poles, `f ~ w / |z - pole|` near each pole.
#[derive(Clone, Debug)]
enum Density {
    One,
    /// `(1/pi) |sum_j m_j / (z - zeta_j)|`.
    PsiAbs { poles: Vec<(Complex64, f64)> },
    /// `sum_j m_j / |z - zeta_j|`.
    PoleSum { poles: Vec<(Complex64, f64)> },
    /// `1/|z-a| + 1/|z-b| - |1/(z-a) + 1/(z-b)|`, bounded near both points.
    PairDefect { a: Complex64, b: Complex64 },
}

impl Density {
    fn poles(&self) -> &[(Complex64, f64)] {
        match self {
            Density::One | Density::PairDefect { .. } => &[],
            Density::PsiAbs { poles } | Density::PoleSum { poles } => poles,
        }
    }

    /// Weight of the `1/|z - pole|` singularity at each pole.
    fn pole_weight(&self, m: f64) -> f64 {
        match self {
            Density::One | Density::PairDefect { .. } => 0.0,
            Density::PsiAbs { .. } => m / PI,
            Density::PoleSum { .. } => m,
        }
    }

    /// The density minus the singular parts of the poles flagged in `near`.
    fn remainder(&self, z: Complex64, near: &[bool]) -> f64 {
        match self {
            Density::One => 1.0,
            Density::PsiAbs { poles } => {
                let mut psi = Complex64::new(0.0, 0.0);
                let mut singular = 0.0;
                for (k, (zeta, m)) in poles.iter().enumerate() {
                    let d = z - zeta;
                    if d.norm() == 0.0 {
                        return 0.0;
                    }
                    psi += *m / d;
                    if near[k] {
                        singular += m / d.norm();
                    }
                }
                (psi.norm() - singular) / PI
            }
            Density::PoleSum { poles } => poles
                .iter()
                .zip(near)
                .filter(|(_, n)| !**n)
                .map(|((zeta, m), _)| m / (z - zeta).norm())
                .sum(),
            Density::PairDefect { a, b } => {
                let (u, v) = (z - a, z - b);
                if u.norm() == 0.0 || v.norm() == 0.0 {
                    return 0.0;
                }
                let (u, v) = (u.inv(), v.inv());
                (u.norm() + v.norm() - (u + v).norm()).max(0.0)
            }
        }
    }
}

/// `int_0^a int_0^b dy dx / sqrt(x^2 + y^2)`, odd in each argument.
fn corner(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let (x, y) = (a.abs(), b.abs());
    let v = x * (y / x).asinh() + y * (x / y).asinh();
    v * a.signum() * b.signum()
}

/// `int_rect dA / |z - zeta|`, exact.
pub fn inverse_distance_integral(rect: &Rect, zeta: Complex64) -> f64 {
    let (x0, x1) = (rect.x0 - zeta.re, rect.x1 - zeta.re);
    let (y0, y1) = (rect.y0 - zeta.im, rect.y1 - zeta.im);
    corner(x1, y1) - corner(x0, y1) - corner(x1, y0) + corner(x0, y0)
}

fn tensor_rule(density: &Density, rect: &Rect, nodes: &[(f64, f64)], near: &[bool]) -> f64 {
    let c = rect.center();
    let (hx, hy) = (0.5 * rect.width(), 0.5 * rect.height());
    let mut acc = 0.0;
    for (xi, wi) in nodes {
        for (yj, wj) in nodes {
            let z = Complex64::new(c.re + hx * xi, c.im + hy * yj);
            acc += wi * wj * density.remainder(z, near);
        }
    }
    acc * hx * hy
}

/// Tensor Gauss rule on a cell with an error estimate from the next lower
/// order. Singular parts of nearby poles are subtracted and added back exactly.
fn cell_rule(density: &Density, rect: &Rect) -> (f64, f64) {
    if let Density::One = density {
        return (rect.area(), 0.0);
    }
    let w = rect.width();
    let poles = density.poles();
    let near: Vec<bool> = poles.iter().map(|(z, _)| rect.distance(*z) < 4.0 * w).collect();
    let (high, low): (&[_], &[_]) = if near.iter().any(|n| *n) { (&GAUSS5, &GAUSS3) } else { (&GAUSS3, &GAUSS2) };
    let value = tensor_rule(density, rect, high, &near);
    let check = tensor_rule(density, rect, low, &near);
    let mut exact = 0.0;
    for ((zeta, m), n) in poles.iter().zip(&near) {
        if *n {
            exact += density.pole_weight(*m) * inverse_distance_integral(rect, *zeta);
        }
    }
    (value + exact, (value - check).abs())
}

/// Adaptive integral of the density over a cell that lies inside the region.
/// A cell is accepted when its error estimate is at most
/// `tol (|value| + floor * area)`.
fn inside_integral(density: &Density, rect: &Rect, tol: f64, floor: f64, depth: u32) -> (f64, f64) {
    let (value, err) = cell_rule(density, rect);
    if err <= tol * (value.abs() + floor * rect.area()) || err <= 1e-300 || depth == 0 {
        return (value, err);
    }
    let parts: Vec<(f64, f64)> = rect
        .quadrants()
        .iter()
        .map(|k| inside_integral(density, k, tol, floor, depth - 1))
        .collect();
    (parts.iter().map(|p| p.0).sum(), parts.iter().map(|p| p.1).sum())
}

/// Breadth-first quadtree over the region's bounding square.
///
/// Interior cells are integrated; boundary cells are subdivided until their
/// total contribution is below `tol` times the running total, or the depth
/// limit is hit. Remaining boundary cells count half, with their full value
/// added to the error bound.
fn quadtree(region: &Region, density: &Density, budget: &QuadratureBudget) -> Result<Estimate> {
    budget.validate()?;
    region.validate()?;
    let root = region.require_bounded()?.squared();
    if root.is_empty() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            budget_exceeded: false,
        });
    }
    let local_tol = budget.tol * 0.1;
    // Mean density over the root square sets an absolute floor for cells
    // where the integrand is small.
    let floor = (cell_rule(density, &root).0 / root.area()).abs();
    let mut inside_values: Vec<f64> = Vec::new();
    let mut inside_errors: Vec<f64> = Vec::new();
    let mut frontier = vec![root];
    let mut cells = 0usize;
    let mut depth = 0;
    let mut boundary_values: Vec<f64>;
    loop {
        cells += frontier.len();
        let classified: Vec<(CellClass, f64, f64)> = frontier
            .par_iter()
            .map(|cell| match region.classify(cell) {
                CellClass::Outside => (CellClass::Outside, 0.0, 0.0),
                CellClass::Inside => {
                    let (v, e) = inside_integral(density, cell, local_tol, floor, LOCAL_DEPTH);
                    (CellClass::Inside, v, e)
                }
                CellClass::Boundary => (CellClass::Boundary, cell_rule(density, cell).0, 0.0),
            })
            .collect();
        let mut next = Vec::new();
        boundary_values = Vec::new();
        for (cell, (class, v, e)) in frontier.iter().zip(&classified) {
            match class {
                CellClass::Inside => {
                    inside_values.push(*v);
                    inside_errors.push(*e);
                }
                CellClass::Boundary => {
                    boundary_values.push(*v);
                    next.push(*cell);
                }
                CellClass::Outside => {}
            }
        }
        let interior = pairwise_sum(&inside_values);
        let pending = pairwise_sum(&boundary_values.iter().map(|v| v.abs()).collect::<Vec<_>>());
        let total = interior + 0.5 * pairwise_sum(&boundary_values);
        let small_enough = next.first().is_none_or(|c| c.width() < budget.min_cell);
        if pending <= budget.tol * total.abs() || depth >= budget.max_depth || small_enough {
            let value = total;
            let error = pending + pairwise_sum(&inside_errors);
            let exceeded = error > budget.tol * value.abs() && error > 0.0;
            return Ok(Estimate {
                value,
                error,
                evaluations: cells,
                budget_exceeded: exceeded,
            });
        }
        frontier = next.iter().flat_map(|c| c.quadrants()).collect();
        depth += 1;
    }
}

/// Area of a bounded region.
pub fn area(region: &Region, budget: &QuadratureBudget) -> Result<Estimate> {
    quadtree(region, &Density::One, budget)
}

fn grouped(points: &[Complex64]) -> Vec<(Complex64, f64)> {
    let mut out: Vec<(Complex64, f64)> = Vec::new();
    for z in points {
        match out.iter_mut().find(|(c, _)| c == z) {
            Some(entry) => entry.1 += 1.0,
            None => out.push((*z, 1.0)),
        }
    }
    out
}

/// `(1/pi) int_region |psi| dA`.
pub fn psi_measure(spec: &CriticalSpec, region: &Region, budget: &QuadratureBudget) -> Result<Estimate> {
    let density = Density::PsiAbs {
        poles: grouped(spec.critical_points()),
    };
    quadtree(region, &density, budget)
}

/// `int_region dA / |z - z0|`.
pub fn riesz_potential(region: &Region, z0: Complex64, budget: &QuadratureBudget) -> Result<Estimate> {
    let density = Density::PoleSum {
        poles: vec![(z0, 1.0)],
    };
    quadtree(region, &density, budget)
}

/// `int_region sum_j 1/|z - pole_j| dA`, poles repeated by multiplicity.
pub fn pole_sum_integral(region: &Region, poles: &[Complex64], budget: &QuadratureBudget) -> Result<Estimate> {
    let density = Density::PoleSum { poles: grouped(poles) };
    quadtree(region, &density, budget)
}

/// `int_region 1/|z-a| + 1/|z-b| - |1/(z-a) + 1/(z-b)| dA`.
pub fn pair_defect_integral(region: &Region, a: Complex64, b: Complex64, budget: &QuadratureBudget) -> Result<Estimate> {
    quadtree(region, &Density::PairDefect { a, b }, budget)
}
