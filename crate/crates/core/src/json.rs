//! Polynomial JSON documents.
//!
//! Two shapes are accepted:
//! `{"degree": n, "critical_points": [[re, im], ...], "constant_term": [re, im], "normalized": bool}`
//! and `{"coefficients": [[re, im], ...]}` (lowest degree first, last entry `[1, 0]`).
//! Emission is compact with shortest round-trip floats, so canonical
//! documents survive parse and emit byte for byte.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{CoeffPoly, CriticalSpec};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CriticalDoc {
    degree: usize,
    critical_points: Vec<[f64; 2]>,
    constant_term: [f64; 2],
    normalized: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffDoc {
    coefficients: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnyDoc {
    Critical(CriticalDoc),
    Coeff(CoeffDoc),
}

/// A parsed polynomial in whichever form the document used.
#[derive(Clone, Debug, PartialEq)]
pub enum PolyDoc {
    Critical(CriticalSpec),
    Coefficients(CoeffPoly),
}

impl PolyDoc {
    pub fn poly(&self) -> &CoeffPoly {
        match self {
            PolyDoc::Critical(s) => s.poly(),
            PolyDoc::Coefficients(p) => p,
        }
    }

    /// Critical-point form; coefficient input goes through a root solve.
    pub fn to_spec(&self) -> CriticalSpec {
        match self {
            PolyDoc::Critical(s) => s.clone(),
            PolyDoc::Coefficients(p) => p.to_critical_spec(),
        }
    }
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

pub fn parse_poly(text: &str) -> Result<PolyDoc> {
    let doc: AnyDoc = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    match doc {
        AnyDoc::Critical(d) => {
            if d.degree != d.critical_points.len() + 1 {
                return Err(Error::Schema(format!(
                    "degree {} needs {} critical points, got {}",
                    d.degree,
                    d.degree.saturating_sub(1),
                    d.critical_points.len()
                )));
            }
            let pts: Vec<Complex64> = d.critical_points.into_iter().map(complex).collect();
            let c0 = complex(d.constant_term);
            let spec = if d.normalized {
                CriticalSpec::normalized(pts, c0)
            } else {
                CriticalSpec::new(pts, c0)
            };
            spec.map(PolyDoc::Critical).map_err(|e| Error::Schema(e.to_string()))
        }
        AnyDoc::Coeff(d) => CoeffPoly::monic(d.coefficients.into_iter().map(complex).collect())
            .map(PolyDoc::Coefficients)
            .map_err(|e| Error::Schema(e.to_string())),
    }
}

pub fn emit_spec(spec: &CriticalSpec) -> String {
    let doc = CriticalDoc {
        degree: spec.degree(),
        critical_points: spec.critical_points().iter().copied().map(pair).collect(),
        constant_term: pair(spec.constant_term()),
        normalized: spec.is_normalized(),
    };
    serde_json::to_string(&doc).expect("finite floats serialize")
}

pub fn emit_coeffs(p: &CoeffPoly) -> String {
    let doc = CoeffDoc {
        coefficients: p.coeffs().iter().copied().map(pair).collect(),
    };
    serde_json::to_string(&doc).expect("finite floats serialize")
}

pub fn emit_poly(doc: &PolyDoc) -> String {
    match doc {
        PolyDoc::Critical(s) => emit_spec(s),
        PolyDoc::Coefficients(p) => emit_coeffs(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_documents_round_trip() {
        for text in [
            r#"{"degree":3,"critical_points":[[0.25,-0.1],[-0.25,0.1]],"constant_term":[-0.9,0.0],"normalized":true}"#,
            r#"{"degree":2,"critical_points":[[0.3333333333333333,1e-7]],"constant_term":[0.5,2.0],"normalized":false}"#,
            r#"{"coefficients":[[-1.0,0.0],[0.0,0.0],[1.0,0.0]]}"#,
        ] {
            let doc = parse_poly(text).unwrap();
            assert_eq!(emit_poly(&doc), text);
        }
    }

    #[test]
    fn malformed_documents_are_schema_errors() {
        for text in [
            r#"{"degree":3,"critical_points":[[0,0]],"constant_term":[-1,0],"normalized":true}"#,
            r#"{"coefficients":[[-1,0],[2,0]]}"#,
            r#"{"degree":2,"critical_points":[[0,0]],"constant_term":[0.5,0],"normalized":true}"#,
            r#"{"roots":[]}"#,
            "not json",
        ] {
            assert!(matches!(parse_poly(text), Err(Error::Schema(_))), "{text}");
        }
    }
}
