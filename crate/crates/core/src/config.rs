//! Run configuration: the JSON document consumed by every CLI command.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{load_spec, AlgebraDocument, LieAlgebraSpec};
use crate::error::{Error, Result};
use crate::lattice::Role;
use crate::rational::Rational;
use crate::spectral::{RBox, SpectrumBox};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub algebra: AlgebraDocument,
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub lattice: LatticeSection,
    #[serde(default)]
    pub verification: VerificationSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub a: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_boxes: Option<Vec<RBox>>,
    /// Absolute tolerance for suprema and measures.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_depth")]
    pub max_depth: u32,
    /// Subdivision budget for measure quadrature.
    #[serde(default = "default_max_boxes")]
    pub max_boxes: usize,
    /// Fibers with `|det B(λ)|` below this are treated as degenerate.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Rational>>,
    /// Decimal digits used when rounding `s^{1/d}` up.
    #[serde(default = "default_digits")]
    pub digits: u32,
    #[serde(default)]
    pub role: Role,
    /// Require the generator system to be an orthonormal basis.
    #[serde(default)]
    pub onb: bool,
    /// Largest number of boxes a single fiber window may be cut into.
    #[serde(default = "default_piece_limit")]
    pub piece_limit: usize,
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self {
            q: None,
            b: None,
            digits: default_digits(),
            role: Role::default(),
            onb: false,
            piece_limit: default_piece_limit(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationSection {
    /// Nodes per λ-axis; a single entry applies to every axis.
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<usize>,
    /// x-samples per translation cell and axis.
    #[serde(default = "default_x_points")]
    pub x_points: usize,
    /// Translation cells per axis covered by the x-grid.
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default = "default_trunc_m")]
    pub trunc_m: i64,
    #[serde(default = "default_trunc_kn")]
    pub trunc_k: i64,
    #[serde(default = "default_trunc_kn")]
    pub trunc_n: i64,
    #[serde(default = "default_defect_tol")]
    pub defect_tol: f64,
    #[serde(default = "default_ratio_tol")]
    pub ratio_tol: f64,
    #[serde(default = "default_gram_tol")]
    pub gram_tol: f64,
    /// Number of lattice elements in the truncated Gram matrix.
    #[serde(default = "default_gram_size")]
    pub gram_size: usize,
    /// Validation-grid points per axis for the tiling/packing check.
    #[serde(default = "default_tiling_points")]
    pub tiling_points: usize,
}

impl Default for VerificationSection {
    fn default() -> Self {
        Self {
            lambda_grid: default_lambda_grid(),
            x_points: default_x_points(),
            cells: default_cells(),
            trunc_m: default_trunc_m(),
            trunc_k: default_trunc_kn(),
            trunc_n: default_trunc_kn(),
            defect_tol: default_defect_tol(),
            ratio_tol: default_ratio_tol(),
            gram_tol: default_gram_tol(),
            gram_size: default_gram_size(),
            tiling_points: default_tiling_points(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    /// Window-field JSON written by `synthesize`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    /// Per-fiber defect CSV written by `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    /// Include wall-clock timings in the report (breaks byte-identity).
    #[serde(default)]
    pub timing: bool,
}

fn default_tol() -> f64 {
    1e-9
}
fn default_max_depth() -> u32 {
    80
}
fn default_max_boxes() -> usize {
    4_000_000
}
fn default_epsilon() -> f64 {
    1e-12
}
fn default_digits() -> u32 {
    12
}
fn default_piece_limit() -> usize {
    4096
}
fn default_lambda_grid() -> Vec<usize> {
    vec![16]
}
fn default_x_points() -> usize {
    64
}
fn default_cells() -> usize {
    4
}
fn default_trunc_m() -> i64 {
    32
}
fn default_trunc_kn() -> i64 {
    16
}
fn default_defect_tol() -> f64 {
    1e-3
}
fn default_ratio_tol() -> f64 {
    1e-2
}
fn default_gram_tol() -> f64 {
    1e-6
}
fn default_gram_size() -> usize {
    24
}
fn default_tiling_points() -> usize {
    48
}

impl ConfigDocument {
    /// Check cross-section consistency that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        let c = self
            .algebra
            .n
            .checked_sub(2 * self.algebra.d)
            .filter(|c| *c > 0)
            .ok_or_else(|| Error::Malformed("algebra.n must exceed 2·algebra.d".into()))?;
        let d = self.algebra.d;
        let len_check = |what: &str, expected: usize, got: usize| {
            if expected == got {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    what: what.into(),
                    expected,
                    got,
                })
            }
        };
        len_check("spectrum.a", c, self.spectrum.a.len())?;
        if let Some(q) = &self.lattice.q {
            len_check("lattice.q", d, q.len())?;
        }
        if let Some(b) = &self.lattice.b {
            len_check("lattice.b", d, b.len())?;
        }
        let positive = |what: &str, v: &[Rational]| {
            if v.iter().all(|x| x.to_f64() > 0.0) {
                Ok(())
            } else {
                Err(Error::Malformed(format!("{what} entries must be positive")))
            }
        };
        positive("spectrum.a", &self.spectrum.a)?;
        if let Some(q) = &self.lattice.q {
            positive("lattice.q", q)?;
        }
        if let Some(b) = &self.lattice.b {
            positive("lattice.b", b)?;
        }
        if !(self.spectrum.tol > 0.0) || !(self.spectrum.epsilon >= 0.0) {
            return Err(Error::Malformed(
                "spectrum.tol must be positive and spectrum.epsilon non-negative".into(),
            ));
        }
        let v = &self.verification;
        if v.lambda_grid.is_empty() || v.lambda_grid.contains(&0) {
            return Err(Error::Malformed(
                "verification.lambda_grid entries must be positive".into(),
            ));
        }
        if v.lambda_grid.len() != 1 {
            len_check("verification.lambda_grid", c, v.lambda_grid.len())?;
        }
        if v.x_points == 0 || v.cells == 0 {
            return Err(Error::Malformed(
                "verification.x_points and cells must be positive".into(),
            ));
        }
        if v.trunc_m < 0 || v.trunc_k < 0 || v.trunc_n < 0 {
            return Err(Error::Malformed("truncation ranges must be non-negative".into()));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<LieAlgebraSpec> {
        load_spec(&self.algebra)
    }

    pub fn spectrum_box(&self) -> Result<SpectrumBox> {
        let region = SpectrumBox::new(self.spectrum.a.iter().map(|r| r.0.clone()).collect())?;
        match &self.spectrum.sub_boxes {
            Some(b) => region.with_sub_boxes(b.clone()),
            None => Ok(region),
        }
    }

    /// λ-grid node counts, one per central coordinate.
    pub fn lambda_grid(&self) -> Vec<usize> {
        let c = self.spectrum.a.len();
        match self.verification.lambda_grid.as_slice() {
            [one] => vec![*one; c],
            many => many.to_vec(),
        }
    }
}

/// Parse a config document, naming the offending field and position on error.
pub fn parse_config_str(text: &str) -> Result<ConfigDocument> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ConfigDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Malformed(format!(
            "config field `{path}` (line {}, column {}): {inner}",
            inner.line(),
            inner.column()
        ))
    })?;
    doc.validate()?;
    Ok(doc)
}

pub fn parse_config(path: &Path) -> Result<ConfigDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn bundled_fixtures_parse() {
        for text in [
            fixtures::HEISENBERG_JSON,
            fixtures::EXAMPLE2_JSON,
            fixtures::EXAMPLE3_JSON,
        ] {
            let doc = parse_config_str(text).unwrap();
            doc.spec().unwrap();
            doc.spectrum_box().unwrap();
        }
    }

    #[test]
    fn missing_d_names_the_field() {
        let text = r#"{"algebra": {"n": 3, "brackets": []}, "spectrum": {"a": ["1"]}}"#;
        let err = parse_config_str(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("algebra") && msg.contains("`d`"), "{msg}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"algebra": {"n": 3, "d": 1}, "spectrum": {"a": ["1"], "bogus": 1}}"#;
        let msg = parse_config_str(text).unwrap_err().to_string();
        assert!(msg.contains("spectrum.bogus") || msg.contains("bogus"), "{msg}");
    }

    #[test]
    fn q_half_is_exact() {
        let text = r#"{"algebra": {"n": 3, "d": 1, "brackets": [{"pair": ["X1","Y1"], "value": ["1"]}]},
                      "spectrum": {"a": ["1"]}, "lattice": {"q": ["1/2"]}}"#;
        let doc = parse_config_str(text).unwrap();
        assert_eq!(doc.lattice.q.unwrap()[0], Rational::new(1, 2));
    }

    #[test]
    fn defaults_filled() {
        let doc = parse_config_str(fixtures::HEISENBERG_JSON).unwrap();
        assert_eq!(doc.spectrum.tol, 1e-9);
        assert_eq!(doc.verification.trunc_m, 32);
        assert_eq!(doc.verification.trunc_k, 16);
        assert_eq!(doc.lambda_grid(), vec![16]);
    }

    #[test]
    fn wrong_length_a_rejected() {
        let text = r#"{"algebra": {"n": 3, "d": 1}, "spectrum": {"a": ["1", "2"]}}"#;
        assert!(matches!(parse_config_str(text), Err(Error::DimensionMismatch { .. })));
    }
}
