//! Plancherel measure `μ(E) = ∫_E |det B(λ)| dλ` by error-driven adaptive
//! subdivision with rigorous per-box brackets.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::poly::{FloatPolynomial, SpectralPolynomial};
use super::region::SpectrumBox;
use crate::error::{Error, Result};

/// Which set to integrate over.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureQuery {
    /// The whole region.
    Full,
    /// The part of the region where `|det B| ≤ threshold`.
    Sublevel { threshold: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    /// Midpoint of the bracket.
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub boxes: usize,
    pub max_depth: u32,
    /// Lebesgue volume of boxes certified to lie entirely in the queried set.
    pub certified_volume: f64,
    pub converged: bool,
}

impl MeasureResult {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

#[derive(Clone, Copy)]
struct Bracket {
    lo: f64,
    hi: f64,
    /// Box certified inside the query set.
    inside: bool,
}

struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    bracket: Bracket,
    depth: u32,
    seq: usize,
}

impl Cell {
    fn err(&self) -> f64 {
        self.bracket.hi - self.bracket.lo
    }
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err()
            .total_cmp(&other.err())
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn full_bracket(c0: f64, radius: f64, integral: f64, vol: f64) -> Bracket {
    if c0.abs() > radius {
        // sign is constant on the box, so the polynomial integral is exact
        let v = integral.abs();
        let slack = 1e-14 * v;
        return Bracket {
            lo: (v - slack).max(0.0),
            hi: v + slack,
            inside: true,
        };
    }
    let lo = integral.abs();
    // |p| = |∫p| + 2∫p₋ and p₋ ≤ R − |c0| pointwise
    let hi = ((c0.abs() + radius) * vol).min(lo + 2.0 * vol * (radius - c0.abs()));
    Bracket {
        lo,
        hi: hi.max(lo),
        inside: true,
    }
}

fn bracket(p: &FloatPolynomial, lo: &[f64], hi: &[f64], query: MeasureQuery) -> Bracket {
    let center: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect();
    let half: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| 0.5 * (h - l)).collect();
    let vol: f64 = half.iter().map(|h| 2.0 * h).product();
    let shifted = p.taylor_shift(&center);
    let (c0, rest) = shifted.split_bound(&half);
    let radius = rest * (1.0 + 1e-12);
    let integral = shifted.integrate_centered(&half);
    match query {
        MeasureQuery::Full => full_bracket(c0, radius, integral, vol),
        MeasureQuery::Sublevel { threshold } => {
            if c0.abs() - radius > threshold {
                Bracket {
                    lo: 0.0,
                    hi: 0.0,
                    inside: false,
                }
            } else if c0.abs() + radius <= threshold {
                full_bracket(c0, radius, integral, vol)
            } else {
                let full = full_bracket(c0, radius, integral, vol);
                Bracket {
                    lo: 0.0,
                    hi: (threshold * vol).min(full.hi),
                    inside: false,
                }
            }
        }
    }
}

/// Bracket `μ` over the region; never fails, and reports whether the
/// half-width reached `tol` within `max_boxes` subdivisions.
pub fn spectral_measure_bracket(
    det_b: &SpectralPolynomial,
    region: &SpectrumBox,
    query: MeasureQuery,
    tol: f64,
    max_boxes: usize,
) -> Result<MeasureResult> {
    if !(tol > 0.0) {
        return Err(Error::Precondition("measure tolerance must be positive".into()));
    }
    if det_b.nvars() != region.dim() {
        return Err(Error::DimensionMismatch {
            what: "spectrum box vs polynomial variables".into(),
            expected: det_b.nvars(),
            got: region.dim(),
        });
    }
    let p = det_b.to_float();
    let mut heap = BinaryHeap::new();
    let mut settled: Vec<Cell> = Vec::new();
    let mut seq = 0usize;
    let mut total_lo = 0.0;
    let mut total_hi = 0.0;
    for (lo, hi) in region.pieces() {
        let b = bracket(&p, &lo, &hi, query);
        total_lo += b.lo;
        total_hi += b.hi;
        heap.push(Cell {
            lo,
            hi,
            bracket: b,
            depth: 0,
            seq,
        });
        seq += 1;
    }
    let mut processed = 0usize;
    let mut deepest = 0u32;
    let mut converged = true;
    while 0.5 * (total_hi - total_lo) > tol {
        let Some(cell) = heap.pop() else { break };
        if cell.err() <= 0.0 {
            settled.push(cell);
            continue;
        }
        if processed >= max_boxes {
            heap.push(cell);
            converged = false;
            break;
        }
        processed += 1;
        total_lo -= cell.bracket.lo;
        total_hi -= cell.bracket.hi;
        let axis = (0..cell.lo.len())
            .max_by(|&i, &j| (cell.hi[i] - cell.lo[i]).total_cmp(&(cell.hi[j] - cell.lo[j])))
            .unwrap_or(0);
        let mid = 0.5 * (cell.lo[axis] + cell.hi[axis]);
        for (l, h) in [(cell.lo[axis], mid), (mid, cell.hi[axis])] {
            let mut lo = cell.lo.clone();
            let mut hi = cell.hi.clone();
            lo[axis] = l;
            hi[axis] = h;
            let b = bracket(&p, &lo, &hi, query);
            total_lo += b.lo;
            total_hi += b.hi;
            deepest = deepest.max(cell.depth + 1);
            heap.push(Cell {
                lo,
                hi,
                bracket: b,
                depth: cell.depth + 1,
                seq,
            });
            seq += 1;
        }
    }
    settled.extend(heap);
    // canonical order for a reproducible reduction
    settled.sort_by(|a, b| {
        a.lo.iter()
            .zip(&b.lo)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.depth.cmp(&b.depth))
    });
    let lower: f64 = settled.iter().map(|c| c.bracket.lo).sum();
    let upper: f64 = settled.iter().map(|c| c.bracket.hi).sum::<f64>().max(lower);
    let certified_volume = settled
        .iter()
        .filter(|c| c.bracket.inside)
        .map(|c| c.lo.iter().zip(&c.hi).map(|(l, h)| h - l).product::<f64>())
        .sum();
    Ok(MeasureResult {
        value: 0.5 * (lower + upper),
        lower,
        upper,
        boxes: settled.len(),
        max_depth: deepest,
        certified_volume,
        converged: converged && 0.5 * (upper - lower) <= tol * (1.0 + 1e-9),
    })
}

/// `μ` over the region to within `tol`; fails with the final bracket when the
/// subdivision budget runs out.
pub fn spectral_measure(
    det_b: &SpectralPolynomial,
    region: &SpectrumBox,
    query: MeasureQuery,
    tol: f64,
    max_boxes: usize,
) -> Result<MeasureResult> {
    let r = spectral_measure_bracket(det_b, region, query, tol, max_boxes)?;
    if r.converged {
        Ok(r)
    } else {
        Err(Error::NonConvergence {
            depth: r.max_depth,
            lower: r.lower,
            upper: r.upper,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::spectral::{det_b, RBox};
    use num_rational::BigRational;

    const BUDGET: usize = 2_000_000;

    #[test]
    fn example2_full_measure() {
        let p = det_b(&fixtures::example2_algebra());
        let region = SpectrumBox::from_ints(&[2, 3]).unwrap();
        let m = spectral_measure(&p, &region, MeasureQuery::Full, 1e-9, BUDGET).unwrap();
        assert!((m.value - 46.0 / 3.0).abs() < 1e-8, "{m:?}");
        assert!(m.lower <= 46.0 / 3.0 + 1e-12 && m.upper >= 46.0 / 3.0 - 1e-12);
    }

    #[test]
    fn heisenberg_measure_is_half_square() {
        let p = det_b(&fixtures::heisenberg_algebra());
        let region = SpectrumBox::from_ints(&[3]).unwrap();
        let m = spectral_measure(&p, &region, MeasureQuery::Full, 1e-12, 10).unwrap();
        assert!((m.value - 4.5).abs() < 1e-12);
        assert!(m.boxes <= 4);
    }

    #[test]
    fn heisenberg_sublevel() {
        // ∫₀¹ λ dλ on {λ ≤ 1} inside [0, 2]
        let p = det_b(&fixtures::heisenberg_algebra());
        let region = SpectrumBox::from_ints(&[2]).unwrap();
        let m = spectral_measure(&p, &region, MeasureQuery::Sublevel { threshold: 1.0 }, 1e-9, BUDGET).unwrap();
        assert!((m.value - 0.5).abs() < 1e-9, "{m:?}");
    }

    #[test]
    fn empty_region_is_zero() {
        let p = det_b(&fixtures::example2_algebra());
        let q = |n: i64| BigRational::from_integer(n.into());
        let region = SpectrumBox::from_ints(&[2, 3])
            .unwrap()
            .with_sub_boxes(vec![RBox::new(vec![q(1), q(1)], vec![q(1), q(2)])])
            .unwrap();
        let m = spectral_measure(&p, &region, MeasureQuery::Full, 1e-9, 10).unwrap();
        assert_eq!(m.value, 0.0);
    }

    #[test]
    fn budget_exhaustion_reports_bracket() {
        let p = det_b(&fixtures::example2_algebra());
        let region = SpectrumBox::from_ints(&[2, 3]).unwrap();
        match spectral_measure(&p, &region, MeasureQuery::Full, 1e-12, 3) {
            Err(Error::NonConvergence { lower, upper, .. }) => {
                assert!(lower <= 46.0 / 3.0 && 46.0 / 3.0 <= upper)
            }
            other => panic!("{other:?}"),
        }
    }
}
