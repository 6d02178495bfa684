//! Exact spectral data of the algebra: the matrices `M(λ)`, `V(λ)`, `B(λ)`,
//! the Plancherel density `r(λ) = |det B(λ)|`, certified suprema over boxes
//! and spectral measures.

pub mod matrix;
pub mod measure;
pub mod poly;
pub mod region;
pub mod supremum;

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::algebra::LieAlgebraSpec;
use crate::error::Result;

pub use matrix::PolyMatrix;
pub use measure::{spectral_measure, spectral_measure_bracket, MeasureQuery, MeasureResult};
pub use poly::{FloatPolynomial, SpectralPolynomial};
pub use region::{RBox, SpectrumBox};
pub use supremum::{sup_density, SupCertificate};

/// `M(λ)` over the full basis, `V(λ)` on the jump indices, and `B(λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMatrices {
    pub m: PolyMatrix,
    pub v: PolyMatrix,
    pub b: PolyMatrix,
}

/// Build `M(λ)_{ij} = λ[b_i, b_j]`, its restriction `V(λ)` to the top `2d`
/// indices, and `B(λ)_{ij} = −λ[X_i, Y_j]`.
pub fn build_matrices(spec: &LieAlgebraSpec) -> SpectralMatrices {
    let n = spec.n();
    let c = spec.center_dim();
    let d = spec.d();
    let mut m = PolyMatrix::zeros(n, n, c);
    for i in 0..n {
        for j in 0..n {
            let coeffs = spec.basis_bracket(i, j);
            m.set(i, j, SpectralPolynomial::linear(&coeffs));
        }
    }
    let jump: Vec<usize> = (c..n).collect();
    let v = m.select(&jump, &jump);
    let mut b = PolyMatrix::zeros(d, d, c);
    for i in 0..d {
        for j in 0..d {
            let entry = m.get(spec.x_index(i), spec.y_index(j));
            b.set(i, j, -entry);
        }
    }
    SpectralMatrices { m, v, b }
}

/// Symbolic `det B(λ)`.
pub fn det_b(spec: &LieAlgebraSpec) -> SpectralPolynomial {
    build_matrices(spec).b.determinant()
}

/// Outcome of the exact identity `det V = (det B)²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfaffianCheck {
    pub passed: bool,
    pub det_v: String,
    pub det_b_squared: String,
    /// `det V − (det B)²` when nonzero.
    pub witness: Option<String>,
    /// Whether `V = [[0, Bᵀ], [−B, 0]]` holds entrywise.
    pub block_form: bool,
}

/// Compare `det V` with `(det B)²` exactly for arbitrary matrices.
pub fn pfaffian_identity(v: &PolyMatrix, b: &PolyMatrix) -> PfaffianCheck {
    let dv = v.determinant();
    let db = b.determinant();
    let db2 = &db * &db;
    let diff = &dv - &db2;
    let d = b.rows();
    let block_form = v.rows() == 2 * d && {
        let zero_blocks = (0..d).all(|i| (0..d).all(|j| v.get(i, j).is_zero() && v.get(d + i, d + j).is_zero()));
        let off = (0..d).all(|i| (0..d).all(|j| v.get(i, d + j) == b.get(j, i) && *v.get(d + i, j) == -b.get(i, j)));
        zero_blocks && off
    };
    PfaffianCheck {
        passed: diff.is_zero(),
        det_v: dv.to_string(),
        det_b_squared: db2.to_string(),
        witness: (!diff.is_zero()).then(|| diff.to_string()),
        block_form,
    }
}

pub fn pfaffian_identity_check(spec: &LieAlgebraSpec) -> PfaffianCheck {
    let mats = build_matrices(spec);
    pfaffian_identity(&mats.v, &mats.b)
}

/// `r(λ) = |det B(λ)|` at a rational point, exactly.
pub fn eval_density_exact(det_b: &SpectralPolynomial, lambda: &[BigRational]) -> Result<BigRational> {
    det_b.eval_rational(lambda).map(|v| v.abs())
}

/// `r(λ) = |det B(λ)|` in binary64.
pub fn eval_density(det_b: &SpectralPolynomial, lambda: &[f64]) -> Result<f64> {
    det_b.eval_f64(lambda).map(f64::abs)
}
