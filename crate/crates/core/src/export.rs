//! CSV tables and self-contained SVG figures.

use std::fmt::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::poly::CriticalSpec;
use crate::search::{PerturbationTable, SearchReport};
use crate::trace::Trace;

/// SVG viewBox in the complex plane; `y` is the imaginary axis, drawn upward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ViewBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for ViewBox {
    fn default() -> Self {
        Self {
            x: -1.6,
            y: -1.6,
            width: 3.2,
            height: 3.2,
        }
    }
}

impl ViewBox {
    /// Square box around `D(0, radius)` with a 0.1 margin.
    pub fn around(radius: f64) -> Self {
        let r = radius + 0.1;
        Self {
            x: -r,
            y: -r,
            width: 2.0 * r,
            height: 2.0 * r,
        }
    }

    fn header(&self) -> String {
        format!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="640" height="640">"#,
            self.x, self.y, self.width, self.height
        )
    }
}

pub fn trace_csv(trace: &Trace) -> String {
    let mut out = String::from("component_id,vertex_index,re,im\n");
    for (c, comp) in trace.components.iter().enumerate() {
        for (i, z) in comp.vertices.iter().enumerate() {
            let _ = writeln!(out, "{c},{i},{},{}", z.re, z.im);
        }
    }
    out
}

fn polylines(trace: &Trace, stroke: &str, width: f64) -> String {
    let mut out = String::new();
    for comp in &trace.components {
        let mut pts = String::new();
        for z in &comp.vertices {
            let _ = write!(pts, "{:.6},{:.6} ", z.re, -z.im);
        }
        let tag = if comp.closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            out,
            r#"<{tag} points="{}" style="fill:none;stroke:{stroke};stroke-width:{width}"/>"#,
            pts.trim_end()
        );
    }
    out
}

fn axes(view: &ViewBox, width: f64) -> String {
    let (x0, x1) = (view.x, view.x + view.width);
    let (y0, y1) = (view.y, view.y + view.height);
    format!(
        r#"<line x1="{x0}" y1="0" x2="{x1}" y2="0" style="stroke:#bbbbbb;stroke-width:{width}"/>
<line x1="0" y1="{y0}" x2="0" y2="{y1}" style="stroke:#bbbbbb;stroke-width:{width}"/>
"#
    )
}

pub fn trace_svg(trace: &Trace, view: &ViewBox) -> String {
    let w = view.width / 400.0;
    let mut out = view.header();
    out.push('\n');
    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{}" height="{}" style="fill:#ffffff"/>"#,
        view.x, view.y, view.width, view.height
    );
    out.push_str(&axes(view, w));
    out.push_str(&polylines(trace, "#1f4e9c", 2.0 * w));
    out.push_str("</svg>\n");
    out
}

/// `|psi| / pi` sampled at cell centers of a regular grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsiGrid {
    pub view: ViewBox,
    pub nx: usize,
    pub ny: usize,
    /// Row-major from the top row (largest imaginary part).
    pub values: Vec<f64>,
}

impl PsiGrid {
    pub fn cell_center(&self, i: usize, j: usize) -> Complex64 {
        let dx = self.view.width / self.nx as f64;
        let dy = self.view.height / self.ny as f64;
        Complex64::new(
            self.view.x + (i as f64 + 0.5) * dx,
            self.view.y + self.view.height - (j as f64 + 0.5) * dy,
        )
    }
}

pub fn psi_grid(spec: &CriticalSpec, view: &ViewBox, resolution: usize) -> PsiGrid {
    let (nx, ny) = (resolution, resolution);
    let mut grid = PsiGrid {
        view: *view,
        nx,
        ny,
        values: Vec::new(),
    };
    let values: Vec<f64> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let z = grid.cell_center(k % nx, k / nx);
            spec.psi(z).map_or(f64::INFINITY, |v| v.norm() / std::f64::consts::PI)
        })
        .collect();
    grid.values = values;
    grid
}

pub fn psi_csv(grid: &PsiGrid) -> String {
    let mut out = String::from("x,y,psi_over_pi\n");
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let z = grid.cell_center(i, j);
            let _ = writeln!(out, "{},{},{}", z.re, z.im, grid.values[j * grid.nx + i]);
        }
    }
    out
}

/// Heat color for `t` in `[0, 1]`, dark blue through orange to pale yellow.
fn heat(t: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 4] = [
        (0.0, [13.0, 8.0, 135.0]),
        (0.4, [156.0, 23.0, 158.0]),
        (0.75, [237.0, 121.0, 83.0]),
        (1.0, [240.0, 249.0, 33.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    let k = STOPS.iter().rposition(|(s, _)| *s <= t).unwrap().min(STOPS.len() - 2);
    let (s0, c0) = STOPS[k];
    let (s1, c1) = STOPS[k + 1];
    let u = (t - s0) / (s1 - s0);
    let c: Vec<u8> = (0..3).map(|i| (c0[i] + u * (c1[i] - c0[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Heat map of `log |psi|` with an optional traced lemniscate on top.
pub fn psi_svg(grid: &PsiGrid, overlay: Option<&Trace>) -> String {
    let mut logs: Vec<f64> = grid.values.iter().filter(|v| v.is_finite() && **v > 0.0).map(|v| v.ln()).collect();
    logs.sort_by(f64::total_cmp);
    let (lo, hi) = if logs.is_empty() {
        (0.0, 1.0)
    } else {
        (logs[logs.len() / 100], logs[(logs.len() * 99) / 100])
    };
    let span = (hi - lo).max(1e-12);
    let view = &grid.view;
    let dx = view.width / grid.nx as f64;
    let dy = view.height / grid.ny as f64;
    let mut out = view.header();
    out.push('\n');
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let v = grid.values[j * grid.nx + i];
            let t = if v > 0.0 { (v.ln() - lo) / span } else { 0.0 };
            let z = grid.cell_center(i, j);
            let _ = writeln!(
                out,
                r#"<rect x="{:.6}" y="{:.6}" width="{:.6}" height="{:.6}" style="fill:{};stroke:none"/>"#,
                z.re - 0.5 * dx,
                -z.im - 0.5 * dy,
                dx * 1.01,
                dy * 1.01,
                heat(t)
            );
        }
    }
    if let Some(trace) = overlay {
        out.push_str(&polylines(trace, "#ffffff", view.width / 300.0));
    }
    out.push_str("</svg>\n");
    out
}

pub fn search_history_csv(report: &SearchReport) -> String {
    let mut out = String::from("restart,iteration,objective\n");
    for h in &report.history {
        let _ = writeln!(out, "{},{},{}", h.restart, h.iteration, h.objective);
    }
    out
}

pub fn perturbation_csv(table: &PerturbationTable) -> String {
    let mut out = String::from("magnitude,size,delta\n");
    for s in &table.samples {
        let _ = writeln!(out, "{},{},{}", s.magnitude, s.size, s.delta);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{family, Family};
    use crate::quad::QuadratureBudget;
    use crate::trace::trace_lemniscate;

    #[test]
    fn trace_exports_cover_every_vertex() {
        let spec = family(Family::P0, 3, 0.0).unwrap();
        let tr = trace_lemniscate(spec.poly(), 1.0, &QuadratureBudget::default()).unwrap();
        let csv = trace_csv(&tr);
        let rows = csv.lines().count() - 1;
        assert_eq!(rows, tr.components.iter().map(|c| c.vertices.len()).sum::<usize>());
        let svg = trace_svg(&tr, &ViewBox::default());
        assert!(svg.starts_with("<svg") && svg.contains(r#"viewBox="-1.6 -1.6 3.2 3.2""#));
        assert!(!svg.contains("href"));
    }

    #[test]
    fn psi_grid_matches_closed_form() {
        let spec = family(Family::P0, 4, 0.0).unwrap();
        let grid = psi_grid(&spec, &ViewBox::default(), 8);
        for j in 0..8 {
            for i in 0..8 {
                let z = grid.cell_center(i, j);
                let want = 3.0 / z.norm() / std::f64::consts::PI;
                assert!((grid.values[j * 8 + i] - want).abs() < 1e-12 * want);
            }
        }
        assert_eq!(psi_csv(&grid).lines().count(), 65);
        assert_eq!(psi_svg(&grid, None).matches("<rect").count(), 64);
    }

    #[test]
    fn heat_endpoints() {
        assert_eq!(heat(0.0), "#0d0887");
        assert_eq!(heat(1.0), "#f0f921");
    }
}
