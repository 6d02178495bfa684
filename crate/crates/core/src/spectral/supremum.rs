//! Certified supremum of `|p|` over a union of boxes by branch and bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::poly::{FloatPolynomial, SpectralPolynomial};
use super::region::SpectrumBox;
use crate::error::{Error, Result};

/// Evidence for a supremum: the maximizing sample, the final bracket and
/// the depth of the subdivision tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupCertificate {
    /// Best lower bound found, attained at `argmax`.
    pub value: f64,
    /// Upper bound on the supremum; `upper − value ≤ tol`.
    pub upper: f64,
    pub argmax: Vec<f64>,
    pub max_depth: u32,
    pub boxes_examined: usize,
}

struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    upper: f64,
    depth: u32,
    seq: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper
            .total_cmp(&other.upper)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Upper bound of `|p|` over `[lo, hi]`: re-expand about the box centre and
/// apply the triangle inequality monomial by monomial.
pub(crate) fn box_upper_bound(p: &FloatPolynomial, lo: &[f64], hi: &[f64]) -> f64 {
    let center: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect();
    let half: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| 0.5 * (h - l)).collect();
    let (c0, rest) = p.taylor_shift(&center).split_bound(&half);
    let raw = c0.abs() + rest;
    // outward rounding slack for the float evaluation
    raw * (1.0 + 1e-12) + f64::MIN_POSITIVE
}

fn sample_points(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let v = lo.len();
    let mut pts = Vec::with_capacity((1 << v) + 1);
    pts.push(lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect());
    for mask in 0..(1usize << v) {
        pts.push((0..v).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect());
    }
    pts
}

/// Supremum of `|det_b|` over the region to within `tol`.
///
/// Returns the certificate on success; fails with the current bracket when a
/// box at `max_depth` still separates the bounds by more than `tol`.
pub fn sup_density(
    det_b: &SpectralPolynomial,
    region: &SpectrumBox,
    tol: f64,
    max_depth: u32,
) -> Result<SupCertificate> {
    if !(tol > 0.0) {
        return Err(Error::Precondition("sup_density tolerance must be positive".into()));
    }
    if det_b.nvars() != region.dim() {
        return Err(Error::DimensionMismatch {
            what: "spectrum box vs polynomial variables".into(),
            expected: det_b.nvars(),
            got: region.dim(),
        });
    }
    let p = det_b.to_float();
    let mut best = f64::NEG_INFINITY;
    let mut argmax = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let mut examined = 0usize;
    let mut deepest = 0u32;

    let consider = |lo: &[f64], hi: &[f64], best: &mut f64, argmax: &mut Vec<f64>| {
        for x in sample_points(lo, hi) {
            let v = p.eval(&x).abs();
            if v > *best {
                *best = v;
                *argmax = x;
            }
        }
    };

    for (lo, hi) in region.pieces() {
        consider(&lo, &hi, &mut best, &mut argmax);
        let upper = box_upper_bound(&p, &lo, &hi);
        heap.push(Node {
            lo,
            hi,
            upper,
            depth: 0,
            seq,
        });
        seq += 1;
    }
    if heap.is_empty() {
        return Ok(SupCertificate {
            value: 0.0,
            upper: 0.0,
            argmax: Vec::new(),
            max_depth: 0,
            boxes_examined: 0,
        });
    }

    while let Some(node) = heap.pop() {
        examined += 1;
        deepest = deepest.max(node.depth);
        if node.upper - best <= tol {
            return Ok(SupCertificate {
                value: best,
                upper: node.upper.max(best),
                argmax,
                max_depth: deepest,
                boxes_examined: examined,
            });
        }
        if node.depth >= max_depth {
            return Err(Error::NonConvergence {
                depth: max_depth,
                lower: best,
                upper: node.upper,
            });
        }
        let axis = (0..node.lo.len())
            .max_by(|&i, &j| (node.hi[i] - node.lo[i]).total_cmp(&(node.hi[j] - node.lo[j])))
            .unwrap_or(0);
        let mid = 0.5 * (node.lo[axis] + node.hi[axis]);
        for (l, h) in [(node.lo[axis], mid), (mid, node.hi[axis])] {
            let mut lo = node.lo.clone();
            let mut hi = node.hi.clone();
            lo[axis] = l;
            hi[axis] = h;
            consider(&lo, &hi, &mut best, &mut argmax);
            let upper = box_upper_bound(&p, &lo, &hi).min(node.upper);
            if upper - best > tol {
                heap.push(Node {
                    lo,
                    hi,
                    upper,
                    depth: node.depth + 1,
                    seq,
                });
                seq += 1;
            }
        }
    }
    // every box was pruned: the best sample is within tol of the supremum
    Ok(SupCertificate {
        value: best,
        upper: best + tol,
        argmax,
        max_depth: deepest,
        boxes_examined: examined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::spectral::det_b;

    #[test]
    fn example2_supremum_is_nine() {
        let p = det_b(&fixtures::example2_algebra());
        let region = SpectrumBox::from_ints(&[2, 3]).unwrap();
        let s = sup_density(&p, &region, 1e-9, 80).unwrap();
        assert!((s.value - 9.0).abs() <= 1e-9, "{s:?}");
        assert!(s.upper >= 9.0);
        assert_eq!(s.argmax, vec![0.0, 3.0]);
    }

    #[test]
    fn constant_polynomial_at_depth_zero() {
        let p = SpectralPolynomial::constant(2, num_rational::BigRational::from_integer((-4).into()));
        let region = SpectrumBox::from_ints(&[1, 1]).unwrap();
        let s = sup_density(&p, &region, 1e-9, 10).unwrap();
        assert_eq!(s.value, 4.0);
        assert_eq!(s.max_depth, 0);
    }

    #[test]
    fn heisenberg_supremum_is_a() {
        let p = det_b(&fixtures::heisenberg_algebra());
        let region = SpectrumBox::from_ints(&[5]).unwrap();
        let s = sup_density(&p, &region, 1e-9, 60).unwrap();
        assert!((s.value - 5.0).abs() <= 1e-9);
    }

    #[test]
    fn depth_exhaustion_reports_bracket() {
        let p = det_b(&fixtures::example3_algebra());
        let region = SpectrumBox::from_ints(&[1, 1, 1]).unwrap();
        match sup_density(&p, &region, 1e-12, 1) {
            Err(Error::NonConvergence { lower, upper, .. }) => assert!(lower <= upper),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let p = det_b(&fixtures::heisenberg_algebra());
        let region = SpectrumBox::from_ints(&[1]).unwrap();
        assert!(sup_density(&p, &region, 0.0, 10).is_err());
    }
}
