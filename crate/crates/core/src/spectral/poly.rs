//! Sparse multivariate polynomials in the central coordinates λ₁..λᵥ with
//! exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, to_f64};

/// Exponent vector, one entry per variable.
pub type Exponents = Vec<u32>;

/// Sparse polynomial; zero coefficients are never stored.
///
/// Terms are kept in a `BTreeMap`, whose key order is lexicographic on the
/// exponent vectors. The last entry is therefore the leading term for lex
/// order with λ₁ > λ₂ > … .
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpectralPolynomial {
    nvars: usize,
    terms: BTreeMap<Exponents, BigRational>,
}

impl SpectralPolynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    /// The coordinate function λ_{index+1}.
    pub fn var(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "variable index out of range");
        let mut e = vec![0; nvars];
        e[index] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, BigRational::one());
        p
    }

    /// Linear form Σ cᵢ λᵢ.
    pub fn linear(coeffs: &[BigRational]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    /// Build from `(exponents, coefficient)` pairs; like terms are merged.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponents, BigRational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    pub fn from_int_terms(nvars: usize, terms: &[(&[u32], i64)]) -> Self {
        Self::from_terms(
            nvars,
            terms
                .iter()
                .map(|(e, c)| (e.to_vec(), BigRational::from_integer(BigInt::from(*c)))),
        )
    }

    fn add_term(&mut self, e: Exponents, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, e: &[u32]) -> BigRational {
        self.terms.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn leading_term(&self) -> Option<(&Exponents, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Evaluate exactly at a rational point.
    pub fn eval_rational(&self, point: &[BigRational]) -> Result<BigRational> {
        self.check_dim(point.len())?;
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    m *= num_traits::pow(x.clone(), k as usize);
                }
            }
            acc += m;
        }
        Ok(acc)
    }

    /// Evaluate in binary64.
    pub fn eval_f64(&self, point: &[f64]) -> Result<f64> {
        self.check_dim(point.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(e, c)| to_f64(c) * point.iter().zip(e).map(|(x, &k)| x.powi(k as i32)).product::<f64>())
            .sum())
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.nvars {
            return Err(Error::DimensionMismatch {
                what: "evaluation point".into(),
                expected: self.nvars,
                got,
            });
        }
        Ok(())
    }

    /// Exact division `self / divisor`, or `None` when the quotient is not a
    /// polynomial. Uses multivariate division with respect to lex order.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        assert_eq!(self.nvars, divisor.nvars);
        let (lead_e, lead_c) = divisor.leading_term()?;
        let mut rem = self.clone();
        let mut quot = Self::zero(self.nvars);
        while let Some((e, c)) = rem.leading_term() {
            if e.iter().zip(lead_e).any(|(a, b)| a < b) {
                return None;
            }
            let qe: Exponents = e.iter().zip(lead_e).map(|(a, b)| a - b).collect();
            let qc = c / lead_c;
            let mono = Self::from_terms(self.nvars, [(qe, qc)]);
            rem = &rem - &(&mono * divisor);
            quot = &quot + &mono;
        }
        Some(quot)
    }

    /// Equal up to an overall sign.
    pub fn eq_up_to_sign(&self, other: &Self) -> bool {
        self == other || *self == -other
    }

    /// Coefficients as `(exponents, "p/q")` pairs in ascending lex order.
    pub fn coefficient_list(&self) -> Vec<(Exponents, String)> {
        self.terms
            .iter()
            .map(|(e, c)| (e.clone(), format_rational(c)))
            .collect()
    }

    /// Binary64 copy for numerical work.
    pub fn to_float(&self) -> FloatPolynomial {
        FloatPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), to_f64(c))).collect(),
        }
    }
}

impl Neg for &SpectralPolynomial {
    type Output = SpectralPolynomial;
    fn neg(self) -> SpectralPolynomial {
        SpectralPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Neg for SpectralPolynomial {
    type Output = SpectralPolynomial;
    fn neg(self) -> SpectralPolynomial {
        -&self
    }
}

impl Add for &SpectralPolynomial {
    type Output = SpectralPolynomial;
    fn add(self, rhs: &SpectralPolynomial) -> SpectralPolynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &SpectralPolynomial {
    type Output = SpectralPolynomial;
    fn sub(self, rhs: &SpectralPolynomial) -> SpectralPolynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }
}

impl Mul for &SpectralPolynomial {
    type Output = SpectralPolynomial;
    fn mul(self, rhs: &SpectralPolynomial) -> SpectralPolynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = SpectralPolynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for SpectralPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(j, &k)| {
                    if k == 1 {
                        format!("l{}", j + 1)
                    } else {
                        format!("l{}^{}", j + 1, k)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{}", format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&mag), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Binary64 polynomial used by the subdivision routines.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatPolynomial {
    pub nvars: usize,
    pub terms: Vec<(Exponents, f64)>,
}

impl FloatPolynomial {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * x.iter().zip(e).map(|(v, &k)| v.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// Coefficients of `t ↦ p(center + t)`.
    pub fn taylor_shift(&self, center: &[f64]) -> FloatPolynomial {
        let mut acc: BTreeMap<Exponents, f64> = BTreeMap::new();
        for (e, c) in &self.terms {
            // expand Π (cᵢ + tᵢ)^{eᵢ} by the binomial theorem per coordinate
            let mut partial: Vec<(Exponents, f64)> = vec![(Vec::with_capacity(self.nvars), *c)];
            for (i, &k) in e.iter().enumerate() {
                let mut next = Vec::with_capacity(partial.len() * (k as usize + 1));
                for (pe, pc) in &partial {
                    for j in 0..=k {
                        let coef = binomial(k, j) * center[i].powi((k - j) as i32);
                        if coef == 0.0 {
                            continue;
                        }
                        let mut ne = pe.clone();
                        ne.push(j);
                        next.push((ne, pc * coef));
                    }
                }
                partial = next;
            }
            for (pe, pc) in partial {
                *acc.entry(pe).or_insert(0.0) += pc;
            }
        }
        FloatPolynomial {
            nvars: self.nvars,
            terms: acc.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        }
    }

    /// Constant term and a bound on |p − p(0)| over |tᵢ| ≤ halfwidthᵢ,
    /// by the monomial-wise triangle inequality.
    pub fn split_bound(&self, halfwidth: &[f64]) -> (f64, f64) {
        let mut c0 = 0.0;
        let mut rest = 0.0;
        for (e, c) in &self.terms {
            if e.iter().all(|&k| k == 0) {
                c0 += c;
            } else {
                rest += c.abs() * halfwidth.iter().zip(e).map(|(h, &k)| h.powi(k as i32)).product::<f64>();
            }
        }
        (c0, rest)
    }

    /// Exact integral of the polynomial over the box `[lo, hi]`.
    pub fn integrate_box(&self, lo: &[f64], hi: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| {
                        let p = k as i32 + 1;
                        (hi[i].powi(p) - lo[i].powi(p)) / p as f64
                    })
                    .product::<f64>()
            })
            .sum()
    }

    /// Integral over a box centred at the origin with the given half-widths.
    /// Odd powers vanish by symmetry.
    pub fn integrate_centered(&self, halfwidth: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|(e, _)| e.iter().all(|k| k % 2 == 0))
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(halfwidth)
                    .map(|(&k, h)| 2.0 * h.powi(k as i32 + 1) / (k as f64 + 1.0))
                    .product::<f64>()
            })
            .sum()
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn arithmetic_cancels_and_multiplies() {
        let l1 = SpectralPolynomial::var(2, 0);
        let l2 = SpectralPolynomial::var(2, 1);
        let sum = &l1 + &l2;
        let diff = &l1 - &l2;
        let prod = &sum * &diff;
        let expected = SpectralPolynomial::from_int_terms(2, &[(&[2, 0], 1), (&[0, 2], -1)]);
        assert_eq!(prod, expected);
        assert!((&l1 - &l1).is_zero());
        assert_eq!(prod.to_string(), "l1^2 - l2^2");
    }

    #[test]
    fn evaluation_exact_and_float() {
        let p = SpectralPolynomial::from_int_terms(2, &[(&[2, 0], 1), (&[0, 2], -1)]);
        assert_eq!(p.eval_rational(&[q(0), q(3)]).unwrap(), q(-9));
        assert_eq!(p.eval_f64(&[1.0, 1.0]).unwrap(), 0.0);
        assert!(p.eval_f64(&[1.0]).is_err());
    }

    #[test]
    fn exact_division() {
        let l1 = SpectralPolynomial::var(2, 0);
        let l2 = SpectralPolynomial::var(2, 1);
        let a = &l1 + &l2;
        let b = &l1 - &l2;
        let p = &a * &b;
        assert_eq!(p.div_exact(&a).unwrap(), b);
        assert!(l1.div_exact(&l2).is_none());
        assert!((&l1 + &SpectralPolynomial::one(2)).div_exact(&l1).is_none());
    }

    #[test]
    fn taylor_shift_matches_evaluation() {
        let p = SpectralPolynomial::from_int_terms(2, &[(&[2, 1], 3), (&[0, 2], -1), (&[0, 0], 2)]).to_float();
        let s = p.taylor_shift(&[0.5, -1.5]);
        for t in [[0.0, 0.0], [0.25, 0.1], [-1.0, 2.0]] {
            let lhs = s.eval(&t);
            let rhs = p.eval(&[0.5 + t[0], -1.5 + t[1]]);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn box_integral() {
        // ∫₀² ∫₀³ (λ₁² − λ₂²) = 8 − 18
        let p = SpectralPolynomial::from_int_terms(2, &[(&[2, 0], 1), (&[0, 2], -1)]).to_float();
        assert!((p.integrate_box(&[0.0, 0.0], &[2.0, 3.0]) + 10.0).abs() < 1e-12);
        let c = p.taylor_shift(&[1.0, 1.5]);
        assert!((c.integrate_centered(&[1.0, 1.5]) + 10.0).abs() < 1e-12);
    }
}
