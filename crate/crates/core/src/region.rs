//! Planar regions built from disks, annuli and polynomial sublevel sets.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::CoeffPoly;

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn centered(c: Complex64, half: f64) -> Self {
        Self {
            x0: c.re - half,
            y0: c.im - half,
            x1: c.re + half,
            y1: c.im + half,
        }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    /// Radius of the circumscribed disk.
    pub fn circumradius(&self) -> f64 {
        0.5 * self.width().hypot(self.height())
    }

    pub fn is_empty(&self) -> bool {
        !(self.x1 > self.x0 && self.y1 > self.y0)
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        }
    }

    pub fn hull(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    /// Square with the same center whose side is the larger of width and height.
    pub fn squared(&self) -> Rect {
        Rect::centered(self.center(), 0.5 * self.width().max(self.height()))
    }

    pub fn quadrants(&self) -> [Rect; 4] {
        let c = self.center();
        [
            Rect { x0: self.x0, y0: self.y0, x1: c.re, y1: c.im },
            Rect { x0: c.re, y0: self.y0, x1: self.x1, y1: c.im },
            Rect { x0: self.x0, y0: c.im, x1: c.re, y1: self.y1 },
            Rect { x0: c.re, y0: c.im, x1: self.x1, y1: self.y1 },
        ]
    }

    /// Distance from `z` to the rectangle (zero inside).
    pub fn distance(&self, z: Complex64) -> f64 {
        let dx = (self.x0 - z.re).max(0.0).max(z.re - self.x1);
        let dy = (self.y0 - z.im).max(0.0).max(z.im - self.y1);
        dx.hypot(dy)
    }
}

/// How a cell sits relative to a region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellClass {
    Inside,
    Outside,
    Boundary,
}

impl CellClass {
    fn complement(self) -> Self {
        match self {
            CellClass::Inside => CellClass::Outside,
            CellClass::Outside => CellClass::Inside,
            CellClass::Boundary => CellClass::Boundary,
        }
    }
}

/// A region of the plane.
///
/// Membership of boundary points is not significant: every integral over a
/// region ignores its (measure zero) boundary.
#[derive(Clone, Debug)]
pub enum Region {
    Plane,
    Disk { center: Complex64, radius: f64 },
    Annulus { center: Complex64, inner: f64, outer: f64 },
    /// `{ |p(z)| < level }`.
    Sublevel { poly: Arc<CoeffPoly>, level: f64 },
    /// `{ sum_j 1/|z - pole_j| >= lambda }`, poles repeated by multiplicity.
    PotentialSuperlevel { poles: Vec<Complex64>, lambda: f64 },
    Complement(Box<Region>),
    Intersection(Vec<Region>),
    Union(Vec<Region>),
}

impl Region {
    pub fn disk(center: Complex64, radius: f64) -> Self {
        Region::Disk { center, radius }
    }

    pub fn annulus(center: Complex64, inner: f64, outer: f64) -> Self {
        Region::Annulus { center, inner, outer }
    }

    pub fn sublevel(poly: &CoeffPoly, level: f64) -> Self {
        Region::Sublevel {
            poly: Arc::new(poly.clone()),
            level,
        }
    }

    pub fn potential_superlevel(poles: Vec<Complex64>, lambda: f64) -> Self {
        Region::PotentialSuperlevel { poles, lambda }
    }

    pub fn complement(self) -> Self {
        Region::Complement(Box::new(self))
    }

    pub fn intersect(self, other: Region) -> Self {
        match self {
            Region::Intersection(mut parts) => {
                parts.push(other);
                Region::Intersection(parts)
            }
            first => Region::Intersection(vec![first, other]),
        }
    }

    pub fn union(self, other: Region) -> Self {
        match self {
            Region::Union(mut parts) => {
                parts.push(other);
                Region::Union(parts)
            }
            first => Region::Union(vec![first, other]),
        }
    }

    /// Structural sanity: positive radii, positive levels.
    pub fn validate(&self) -> Result<()> {
        match self {
            Region::Plane => Ok(()),
            Region::Disk { radius, .. } if !(*radius >= 0.0) => {
                Err(Error::BadParameter(format!("disk radius {radius}")))
            }
            Region::Annulus { inner, outer, .. } if !(*inner >= 0.0 && outer >= inner) => {
                Err(Error::BadParameter(format!("annulus radii {inner}, {outer}")))
            }
            Region::Sublevel { level, .. } if !(*level > 0.0) => {
                Err(Error::BadParameter(format!("sublevel level {level}")))
            }
            Region::PotentialSuperlevel { lambda, .. } if !(*lambda > 0.0) => {
                Err(Error::BadParameter(format!("potential level {lambda}")))
            }
            Region::Complement(inner) => inner.validate(),
            Region::Intersection(parts) | Region::Union(parts) => parts.iter().try_for_each(|r| r.validate()),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            Region::Plane => true,
            Region::Disk { center, radius } => (z - center).norm() < *radius,
            Region::Annulus { center, inner, outer } => {
                let d = (z - center).norm();
                d > *inner && d < *outer
            }
            Region::Sublevel { poly, level } => poly.eval(z).norm() < *level,
            Region::PotentialSuperlevel { poles, lambda } => potential(poles, z) >= *lambda,
            Region::Complement(inner) => !inner.contains(z),
            Region::Intersection(parts) => parts.iter().all(|r| r.contains(z)),
            Region::Union(parts) => parts.iter().any(|r| r.contains(z)),
        }
    }

    /// Conservative classification of a cell through its circumscribed disk.
    pub fn classify(&self, cell: &Rect) -> CellClass {
        let c = cell.center();
        let rho = cell.circumradius();
        match self {
            Region::Plane => CellClass::Inside,
            Region::Disk { center, radius } => {
                let d = (c - center).norm();
                if d + rho <= *radius {
                    CellClass::Inside
                } else if d - rho >= *radius {
                    CellClass::Outside
                } else {
                    CellClass::Boundary
                }
            }
            Region::Annulus { center, inner, outer } => {
                let d = (c - center).norm();
                if d - rho >= *inner && d + rho <= *outer {
                    CellClass::Inside
                } else if d + rho <= *inner || d - rho >= *outer {
                    CellClass::Outside
                } else {
                    CellClass::Boundary
                }
            }
            Region::Sublevel { poly, level } => {
                let t = poly.taylor_at(c);
                let mut spread = 0.0;
                let mut rk = 1.0;
                for tk in &t[1..] {
                    rk *= rho;
                    spread += tk.norm() * rk;
                }
                let center_value = t[0].norm();
                // Leave a little room for rounding in the Taylor coefficients.
                let slack = 1e-12 * (center_value + spread);
                if center_value + spread + slack < *level {
                    CellClass::Inside
                } else if center_value - spread - slack > *level {
                    CellClass::Outside
                } else {
                    CellClass::Boundary
                }
            }
            Region::PotentialSuperlevel { poles, lambda } => {
                let mut lo = 0.0;
                let mut hi = 0.0;
                for zeta in poles {
                    let d = (c - zeta).norm();
                    lo += 1.0 / (d + rho);
                    hi += if d > rho { 1.0 / (d - rho) } else { f64::INFINITY };
                }
                if lo >= *lambda {
                    CellClass::Inside
                } else if hi < *lambda {
                    CellClass::Outside
                } else {
                    CellClass::Boundary
                }
            }
            Region::Complement(inner) => inner.classify(cell).complement(),
            Region::Intersection(parts) => {
                let mut all_inside = true;
                for r in parts {
                    match r.classify(cell) {
                        CellClass::Outside => return CellClass::Outside,
                        CellClass::Boundary => all_inside = false,
                        CellClass::Inside => {}
                    }
                }
                if all_inside {
                    CellClass::Inside
                } else {
                    CellClass::Boundary
                }
            }
            Region::Union(parts) => {
                let mut all_outside = true;
                for r in parts {
                    match r.classify(cell) {
                        CellClass::Inside => return CellClass::Inside,
                        CellClass::Boundary => all_outside = false,
                        CellClass::Outside => {}
                    }
                }
                if all_outside {
                    CellClass::Outside
                } else {
                    CellClass::Boundary
                }
            }
        }
    }

    /// A rectangle containing the region, or `None` if the region is unbounded
    /// (as far as this conservative analysis can tell).
    pub fn bounding_box(&self) -> Option<Rect> {
        match self {
            Region::Plane | Region::Complement(_) => None,
            Region::Disk { center, radius } => Some(Rect::centered(*center, *radius)),
            Region::Annulus { center, outer, .. } => Some(Rect::centered(*center, *outer)),
            Region::Sublevel { poly, level } => Some(Rect::centered(Complex64::new(0.0, 0.0), sublevel_radius(poly, *level))),
            Region::PotentialSuperlevel { poles, lambda } => {
                let first = poles.first()?;
                let reach = poles.len() as f64 / lambda;
                let mut rect = Rect::centered(*first, reach);
                for z in &poles[1..] {
                    rect = rect.hull(&Rect::centered(*z, reach));
                }
                Some(rect)
            }
            Region::Intersection(parts) => parts
                .iter()
                .filter_map(|r| r.bounding_box())
                .reduce(|a, b| a.intersect(&b)),
            Region::Union(parts) => {
                let mut acc: Option<Rect> = None;
                for r in parts {
                    let b = r.bounding_box()?;
                    acc = Some(match acc {
                        Some(a) => a.hull(&b),
                        None => b,
                    });
                }
                acc
            }
        }
    }

    /// Bounding box or [`Error::Unbounded`].
    pub fn require_bounded(&self) -> Result<Rect> {
        self.bounding_box().ok_or(Error::Unbounded)
    }

    /// Interval of `|z|` values the region can reach; the upper end may be infinite.
    pub fn radial_extent(&self) -> (f64, f64) {
        match self {
            Region::Plane | Region::Complement(_) => (0.0, f64::INFINITY),
            Region::Disk { center, radius } => ((center.norm() - radius).max(0.0), center.norm() + radius),
            Region::Annulus { center, inner, outer } => {
                let d = center.norm();
                let lo = if d <= *inner { inner - d } else { (d - outer).max(0.0) };
                (lo, d + outer)
            }
            Region::Sublevel { .. } | Region::PotentialSuperlevel { .. } => match self.bounding_box() {
                Some(b) => (0.0, b.circumradius() + b.center().norm()),
                None => (0.0, f64::INFINITY),
            },
            Region::Intersection(parts) => parts.iter().fold((0.0, f64::INFINITY), |(lo, hi), r| {
                let (a, b) = r.radial_extent();
                (lo.max(a), hi.min(b))
            }),
            Region::Union(parts) => parts.iter().fold((f64::INFINITY, 0.0), |(lo, hi), r| {
                let (a, b) = r.radial_extent();
                (lo.min(a), hi.max(b))
            }),
        }
    }

    /// Circles (center, radius) that carry part of the region's boundary.
    pub fn boundary_circles(&self) -> Vec<(Complex64, f64)> {
        let mut out = Vec::new();
        self.collect_circles(&mut out);
        out
    }

    fn collect_circles(&self, out: &mut Vec<(Complex64, f64)>) {
        match self {
            Region::Disk { center, radius } => out.push((*center, *radius)),
            Region::Annulus { center, inner, outer } => {
                if *inner > 0.0 {
                    out.push((*center, *inner));
                }
                out.push((*center, *outer));
            }
            Region::Complement(inner) => inner.collect_circles(out),
            Region::Intersection(parts) | Region::Union(parts) => {
                for r in parts {
                    r.collect_circles(out);
                }
            }
            _ => {}
        }
    }
}

/// `sum_j 1/|z - pole_j|`.
pub fn potential(poles: &[Complex64], z: Complex64) -> f64 {
    poles.iter().map(|p| 1.0 / (z - p).norm()).sum()
}

/// Radius of a disk about the origin containing `{ |p| <= level }`.
///
/// For `|z| >= rho >= 1` with `rho = S + level^{1/n}` and `S = sum_{k<n} |c_k|`,
/// `|p(z)| >= |z|^{n-1} (|z| - S) >= level`.
pub fn sublevel_radius(p: &CoeffPoly, level: f64) -> f64 {
    let n = p.degree();
    let s: f64 = p.coeffs()[..n].iter().map(|c| c.norm()).sum();
    (s + level.powf(1.0 / n as f64)).max(1.0) * 1.0001
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{family, Family};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn membership() {
        let d = Region::disk(c(1.0, 0.0), 1.0);
        assert!(d.contains(c(1.5, 0.0)));
        assert!(!d.contains(c(-0.5, 0.0)));
        let ann = Region::annulus(c(0.0, 0.0), 1.0, 2.0);
        assert!(ann.contains(c(0.0, 1.5)));
        assert!(!ann.contains(c(0.0, 0.5)));
        let p = family(Family::P0, 2, 0.0).unwrap();
        let e = Region::sublevel(p.poly(), 1.0);
        assert!(e.contains(c(1.0, 0.0)));
        assert!(!e.contains(c(0.0, 1.0)));
        assert!(e.clone().complement().contains(c(0.0, 1.0)));
        let both = Region::disk(c(0.0, 0.0), 2.0).intersect(e);
        assert!(both.contains(c(1.2, 0.0)));
        assert!(!both.contains(c(0.0, 1.9)));
    }

    #[test]
    fn classification_is_conservative() {
        let p = family(Family::Example1, 5, 0.4).unwrap();
        let region = Region::sublevel(p.poly(), 1.0)
            .union(Region::disk(c(0.5, 0.5), 0.3))
            .intersect(Region::annulus(c(0.0, 0.0), 0.2, 1.4));
        let bbox = Rect::centered(c(0.0, 0.0), 1.5);
        let mut cells = vec![bbox];
        for _ in 0..4 {
            cells = cells.iter().flat_map(|r| r.quadrants()).collect();
        }
        for cell in cells {
            let class = region.classify(&cell);
            if class == CellClass::Boundary {
                continue;
            }
            for i in 0..5 {
                for j in 0..5 {
                    let z = c(
                        cell.x0 + cell.width() * (i as f64 + 0.5) / 5.0,
                        cell.y0 + cell.height() * (j as f64 + 0.5) / 5.0,
                    );
                    assert_eq!(region.contains(z), class == CellClass::Inside, "{cell:?}");
                }
            }
        }
    }

    #[test]
    fn sublevel_box_contains_set() {
        let p = family(Family::Example2, 4, 1.0).unwrap();
        let r = sublevel_radius(p.poly(), 2.0);
        for k in 0..360 {
            let z = Complex64::from_polar(r, k as f64 * 0.017);
            assert!(p.poly().eval(z).norm() >= 2.0);
        }
    }

    #[test]
    fn bounding_boxes() {
        assert!(Region::Plane.bounding_box().is_none());
        assert!(Region::disk(c(0.0, 0.0), 1.0).complement().bounding_box().is_none());
        let b = Region::disk(c(0.0, 0.0), 1.0)
            .complement()
            .intersect(Region::disk(c(0.0, 0.0), 3.0))
            .bounding_box()
            .unwrap();
        assert_eq!(b, Rect::centered(c(0.0, 0.0), 3.0));
        let pot = Region::potential_superlevel(vec![c(0.0, 0.0), c(1.0, 0.0)], 4.0);
        let b = pot.bounding_box().unwrap();
        assert!(b.x0 <= -0.5 && b.x1 >= 1.5);
    }

    #[test]
    fn radial_extents() {
        assert_eq!(Region::annulus(c(0.0, 0.0), 0.1, 0.5).radial_extent(), (0.1, 0.5));
        assert_eq!(Region::disk(c(3.0, 0.0), 1.0).radial_extent(), (2.0, 4.0));
    }
}
