use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{to_f64, Rational};

/// Axis-aligned rational box `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RBox {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
}

impl RBox {
    pub fn new(lo: Vec<BigRational>, hi: Vec<BigRational>) -> Self {
        Self {
            lo: lo.into_iter().map(Rational).collect(),
            hi: hi.into_iter().map(Rational).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo_f64(&self) -> Vec<f64> {
        self.lo.iter().map(Rational::to_f64).collect()
    }

    pub fn hi_f64(&self) -> Vec<f64> {
        self.hi.iter().map(Rational::to_f64).collect()
    }

    pub fn volume(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| h.to_f64() - l.to_f64())
            .product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *v >= l.to_f64() && *v <= h.to_f64())
    }
}

/// The spectral box `[0, a₁] × … × [0, aᵥ]`, optionally restricted to a
/// finite union of rational sub-boxes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumBox {
    a: Vec<BigRational>,
    sub_boxes: Option<Vec<RBox>>,
}

impl SpectrumBox {
    pub fn new(a: Vec<BigRational>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Malformed("spectrum.a must be non-empty".into()));
        }
        if let Some(bad) = a.iter().find(|x| !x.is_positive()) {
            return Err(Error::Malformed(format!(
                "spectrum.a entries must be positive, got {bad}"
            )));
        }
        Ok(Self { a, sub_boxes: None })
    }

    pub fn from_ints(a: &[i64]) -> Result<Self> {
        Self::new(a.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    /// Restrict to sub-boxes, each of which must lie inside the box.
    pub fn with_sub_boxes(mut self, boxes: Vec<RBox>) -> Result<Self> {
        for (k, b) in boxes.iter().enumerate() {
            if b.dim() != self.a.len() || b.hi.len() != self.a.len() {
                return Err(Error::DimensionMismatch {
                    what: format!("spectrum.sub_boxes[{k}]"),
                    expected: self.a.len(),
                    got: b.dim(),
                });
            }
            for i in 0..self.a.len() {
                let (l, h) = (&b.lo[i].0, &b.hi[i].0);
                if l.is_negative() || h > &self.a[i] || l > h {
                    return Err(Error::Malformed(format!(
                        "spectrum.sub_boxes[{k}] is not inside [0, a]"
                    )));
                }
            }
        }
        self.sub_boxes = Some(boxes);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[BigRational] {
        &self.a
    }

    pub fn a_f64(&self) -> Vec<f64> {
        self.a.iter().map(to_f64).collect()
    }

    pub fn sub_boxes(&self) -> Option<&[RBox]> {
        self.sub_boxes.as_deref()
    }

    /// The boxes making up the region, as `(lo, hi)` float pairs.
    pub fn pieces(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        match &self.sub_boxes {
            None => vec![(vec![0.0; self.a.len()], self.a_f64())],
            Some(bs) => bs
                .iter()
                .filter(|b| b.volume() > 0.0)
                .map(|b| (b.lo_f64(), b.hi_f64()))
                .collect(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.pieces()
            .iter()
            .any(|(lo, hi)| x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| v >= l && v <= h))
    }

    /// Lebesgue measure of the region (sub-boxes assumed disjoint).
    pub fn lebesgue(&self) -> f64 {
        self.pieces()
            .iter()
            .map(|(lo, hi)| lo.iter().zip(hi).map(|(l, h)| h - l).product::<f64>())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces().is_empty() || self.lebesgue().is_zero()
    }
}
