//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use nilframe::algebra::{load_spec, AlgebraDocument, BracketEntry, LieAlgebraSpec};
use nilframe::rational::Rational;
use nilframe::spectral::SpectralPolynomial;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Cofactor expansion along the first row.
pub fn cofactor_det(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    if n == 0 {
        return rat(1, 1);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut total = BigRational::zero();
    for (j, a) in m[0].iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigRational>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = a * cofactor_det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// `B(λ)_{ij} = −λ([X_i, Y_j])` read straight from the structure constants.
pub fn b_at(spec: &LieAlgebraSpec, lambda: &[BigRational]) -> Vec<Vec<BigRational>> {
    let d = spec.d();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let br = spec.basis_bracket(spec.x_index(i), spec.y_index(j));
                    -br.iter()
                        .zip(lambda)
                        .map(|(c, l)| c * l)
                        .fold(BigRational::zero(), |s, t| s + t)
                })
                .collect()
        })
        .collect()
}

/// Points of a `(deg + 1)^c` grid. A polynomial of degree at most `deg` in
/// each variable is fixed by its values there.
pub fn interpolation_grid(c: usize, deg: u32) -> Vec<Vec<BigRational>> {
    let mut out = vec![Vec::new()];
    for _ in 0..c {
        out = out
            .into_iter()
            .flat_map(|p: Vec<BigRational>| {
                (0..=deg as i64).map(move |k| {
                    let mut q = p.clone();
                    q.push(rat(2 * k - 3, 2 + k));
                    q
                })
            })
            .collect();
    }
    out
}

/// Compare `poly` with the cofactor oracle on the interpolation grid.
pub fn matches_oracle(spec: &LieAlgebraSpec, poly: &SpectralPolynomial) -> bool {
    interpolation_grid(spec.center_dim(), spec.d() as u32)
        .iter()
        .all(|p| poly.eval_rational(p).unwrap() == cofactor_det(&b_at(spec, p)))
}

/// Whether the oracle determinant equals `±reference` with a single sign.
pub fn oracle_eq_up_to_sign(spec: &LieAlgebraSpec, reference: &SpectralPolynomial) -> bool {
    let pts = interpolation_grid(spec.center_dim(), spec.d() as u32);
    let vals: Vec<(BigRational, BigRational)> = pts
        .iter()
        .map(|p| (cofactor_det(&b_at(spec, p)), reference.eval_rational(p).unwrap()))
        .collect();
    vals.iter().all(|(o, r)| o == r) || vals.iter().all(|(o, r)| *o == -r.clone())
}

pub fn abs_equal(a: &BigRational, b: &BigRational) -> bool {
    a.abs() == b.abs()
}

/// Random step-two algebras whose only brackets are `[X_i, Y_j]`, with
/// small integer structure constants and a non-vanishing `det B`.
pub fn valid_spec() -> impl Strategy<Value = LieAlgebraSpec> {
    valid_spec_in(3, 3)
}

/// [`valid_spec`] with `d ≤ d_max` and center dimension `c ≤ c_max`.
pub fn valid_spec_in(d_max: usize, c_max: usize) -> impl Strategy<Value = LieAlgebraSpec> {
    (1usize..=d_max, 1usize..=c_max)
        .prop_flat_map(|(d, c)| (Just(d), Just(c), proptest::collection::vec(-3i64..=3, d * d * c)))
        .prop_map(|(d, c, vals)| {
            let mut brackets = Vec::new();
            for i in 0..d {
                for j in 0..d {
                    let base = (i * d + j) * c;
                    let mut value: Vec<Rational> = vals[base..base + c].iter().map(|&v| Rational::new(v, 1)).collect();
                    // A diagonal `[X_i, Y_i] = Z_1` term makes B(e_1) diagonally dominant.
                    if i == j {
                        value[0] = Rational::new(vals[base] + 10, 1);
                    }
                    brackets.push(BracketEntry {
                        pair: [format!("X{}", i + 1), format!("Y{}", j + 1)],
                        value,
                    });
                }
            }
            load_spec(&AlgebraDocument {
                n: c + 2 * d,
                d,
                brackets,
            })
            .expect("generated spec loads")
        })
}
