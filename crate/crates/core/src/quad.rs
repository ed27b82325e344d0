//! One-dimensional adaptive Gauss–Kronrod quadrature and shared budget types.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and limits for every numerical integral in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureBudget {
    /// Relative tolerance.
    pub tol: f64,
    /// Maximum subdivision depth (bisections of a 1-D piece, quadtree levels in 2-D).
    pub max_depth: u32,
    /// Smallest cell or interval width worth subdividing.
    pub min_cell: f64,
    /// Coarse sample count for sweeps (radial grid, trace seeding).
    pub samples_1d: usize,
}

impl Default for QuadratureBudget {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_depth: 30,
            min_cell: 1e-12,
            samples_1d: 64,
        }
    }
}

impl QuadratureBudget {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    /// Budget for area-type integrals, where boundary cells dominate the cost.
    pub fn area(tol: f64) -> Self {
        Self {
            tol,
            max_depth: 18,
            min_cell: 1e-9,
            samples_1d: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::BadParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_depth > 40 {
            return Err(Error::BadParameter(format!("max_depth must be at most 40, got {}", self.max_depth)));
        }
        if self.samples_1d < 2 {
            return Err(Error::BadParameter("samples_1d must be at least 2".into()));
        }
        Ok(())
    }

    /// The same budget with the tolerance scaled by `factor`.
    pub fn loosened(&self, factor: f64) -> Self {
        Self {
            tol: self.tol * factor,
            ..*self
        }
    }
}

/// An integral value with an error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    /// The tolerance was not met before the subdivision limits were reached.
    pub budget_exceeded: bool,
}

impl Estimate {
    /// Turns an exhausted budget into [`Error::BudgetExceeded`].
    pub fn strict(self) -> Result<Self> {
        if self.budget_exceeded {
            Err(Error::BudgetExceeded {
                value: self.value,
                error: self.error,
            })
        } else {
            Ok(self)
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// The 15 Kronrod nodes on `[a, b]` in increasing order.
pub fn kronrod_nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; 15];
    for i in 0..7 {
        x[i] = c - h * XGK[i];
        x[14 - i] = c + h * XGK[i];
    }
    x[7] = c;
    x
}

/// `(kronrod, gauss)` estimates from values at [`kronrod_nodes`].
fn kronrod_rule(a: f64, b: f64, fx: &[f64; 15]) -> (f64, f64) {
    let h = 0.5 * (b - a);
    let mut k = WGK[7] * fx[7];
    let mut g = WG[3] * fx[7];
    for i in 0..7 {
        let pair = fx[i] + fx[14 - i];
        k += WGK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    (k * h, g * h)
}

struct Segment {
    piece: usize,
    a: f64,
    b: f64,
    depth: u32,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
            .then_with(|| other.piece.cmp(&self.piece))
    }
}

/// Integrand evaluations after which adaptive integration gives up.
pub const MAX_EVALUATIONS: usize = 2_000_000;

/// Globally adaptive G7/K15 quadrature over a list of pieces.
///
/// `f(piece, xs, out)` fills `out[i]` with the integrand at `xs[i]`; the
/// nodes arrive sorted so that callers can continue state from node to node.
/// Iteration stops when the summed error is below `max(tol |value|, abs_tol)`.
pub fn integrate_pieces<E, F>(
    pieces: &[(f64, f64)],
    tol: f64,
    abs_tol: f64,
    max_depth: u32,
    mut f: F,
) -> std::result::Result<Estimate, E>
where
    F: FnMut(usize, &[f64], &mut [f64]) -> std::result::Result<(), E>,
{
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Segment> = Vec::new();
    let mut evaluations = 0;
    let mut eval = |piece: usize, a: f64, b: f64, depth: u32, evaluations: &mut usize| {
        let xs = kronrod_nodes(a, b);
        let mut fx = [0.0; 15];
        f(piece, &xs, &mut fx)?;
        *evaluations += 15;
        let (k, g) = kronrod_rule(a, b, &fx);
        let error = if k.is_finite() { (k - g).abs() } else { f64::INFINITY };
        Ok(Segment {
            piece,
            a,
            b,
            depth,
            value: k,
            error,
        })
    };
    for (i, &(a, b)) in pieces.iter().enumerate() {
        if b > a {
            heap.push(eval(i, a, b, 0, &mut evaluations)?);
        }
    }
    let mut exceeded = false;
    // Running sums steer the loop; the reported totals are recomputed exactly.
    let (mut value, mut error) = totals(heap.iter());
    loop {
        if error <= (tol * value.abs()).max(abs_tol) {
            break;
        }
        if evaluations >= MAX_EVALUATIONS {
            exceeded = true;
            break;
        }
        let Some(worst) = heap.pop() else {
            exceeded = true;
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        if worst.depth >= max_depth || mid <= worst.a || mid >= worst.b {
            done.push(worst);
            continue;
        }
        let left = eval(worst.piece, worst.a, mid, worst.depth + 1, &mut evaluations)?;
        let right = eval(worst.piece, mid, worst.b, worst.depth + 1, &mut evaluations)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        if !error.is_finite() || !value.is_finite() {
            (value, error) = totals(heap.iter().chain(done.iter()).chain([&left, &right]));
        }
        heap.push(left);
        heap.push(right);
    }
    let (value, error) = totals(heap.iter().chain(done.iter()));
    Ok(Estimate {
        value,
        error,
        evaluations,
        budget_exceeded: exceeded,
    })
}

fn totals<'a>(segs: impl Iterator<Item = &'a Segment>) -> (f64, f64) {
    let mut all: Vec<&Segment> = segs.collect();
    all.sort_by(|x, y| x.piece.cmp(&y.piece).then(x.a.total_cmp(&y.a)));
    let values: Vec<f64> = all.iter().map(|s| s.value).collect();
    let errors: Vec<f64> = all.iter().map(|s| s.error).collect();
    (pairwise_sum(&values), pairwise_sum(&errors))
}

/// Adaptive integral of a scalar function on `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Estimate {
    let res: std::result::Result<Estimate, ()> = integrate_pieces(&[(a, b)], tol, 0.0, max_depth, |_, xs, out| {
        for (x, o) in xs.iter().zip(out.iter_mut()) {
            *o = f(*x);
        }
        Ok(())
    });
    res.unwrap_or(Estimate {
        value: f64::NAN,
        error: f64::INFINITY,
        evaluations: 0,
        budget_exceeded: true,
    })
}

/// Pairwise (cascade) summation; the result does not depend on thread scheduling.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub const GAUSS2: [(f64, f64); 2] = [(-0.577_350_269_189_625_8, 1.0), (0.577_350_269_189_625_8, 1.0)];

pub const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];
pub const GAUSS5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let est = integrate(|x| x.powi(20), 0.0, 1.0, 1e-14, 0);
        assert!((est.value - 1.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_periodic() {
        let est = integrate(|x| (x.sin()).exp(), 0.0, 2.0 * PI, 1e-13, 20);
        // 2 pi I_0(1)
        assert!((est.value - 7.954_926_521_012_845).abs() < 1e-11, "{est:?}");
    }

    #[test]
    fn endpoint_singularity_converges() {
        let est = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 60);
        assert!((est.value - 2.0).abs() < 1e-8, "{est:?}");
    }

    #[test]
    fn exhaustion_is_flagged() {
        let est = integrate(|x| 1.0 / x, 0.0, 1.0, 1e-10, 5);
        assert!(est.budget_exceeded);
        assert!(est.strict().is_err());
    }

    #[test]
    fn nodes_sorted() {
        let x = kronrod_nodes(-2.0, 3.0);
        assert!(x.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn gauss_weights_sum() {
        assert!((GAUSS3.iter().map(|p| p.1).sum::<f64>() - 2.0).abs() < 1e-15);
        assert!((GAUSS5.iter().map(|p| p.1).sum::<f64>() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn budget_validation() {
        assert!(QuadratureBudget::default().validate().is_ok());
        assert!(QuadratureBudget::with_tol(0.0).validate().is_err());
        let deep = QuadratureBudget {
            max_depth: 41,
            ..Default::default()
        };
        assert!(deep.validate().is_err());
    }
}
