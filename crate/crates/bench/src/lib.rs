//! Fixtures shared by the benchmarks.

use lemlab_core::{family, CriticalSpec, Family};

/// `z^n - 1`, the two-critical-point deformation and the constant-term shift,
/// each at `n = 9`, `a = 0.5`.
pub fn fixtures() -> Vec<(&'static str, CriticalSpec)> {
    [("p0", Family::P0), ("example1", Family::Example1), ("example2", Family::Example2)]
        .into_iter()
        .map(|(name, f)| (name, family(f, 9, 0.5).expect("built-in family")))
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_have_degree_nine() {
        assert!(super::fixtures().iter().all(|(_, s)| s.degree() == 9));
    }
}
