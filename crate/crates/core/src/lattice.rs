//! Quasi-lattices `Γ_{a,q,b}`, the per-fiber Gabor lattices they induce, and
//! the frame, basis and wavelet conditions on them.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::algebra::LieAlgebraSpec;
use crate::error::{Error, Result};
use crate::rational::{ceil_root, format_rational, from_f64, product, to_f64, Rational};
use crate::spectral::{
    build_matrices, spectral_measure_bracket, sup_density, MeasureQuery, MeasureResult, RBox, SpectralPolynomial,
    SpectrumBox, SupCertificate,
};

/// What the generator field is meant to be.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Parseval frame generator `η` over the whole spectral box.
    #[default]
    Frame,
    /// Discretizable continuous wavelet supported on the sublevel set.
    Wavelet,
}

/// Densities `a` (central), `q` (Y-directions) and `b` (X-directions).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiLatticeParams {
    pub a: Vec<Rational>,
    pub q: Vec<Rational>,
    pub b: Vec<Rational>,
}

impl QuasiLatticeParams {
    pub fn new(a: Vec<BigRational>, q: Vec<BigRational>, b: Vec<BigRational>) -> Result<Self> {
        if q.len() != b.len() {
            return Err(Error::DimensionMismatch {
                what: "lattice q vs b".into(),
                expected: b.len(),
                got: q.len(),
            });
        }
        for (name, v) in [("a", &a), ("q", &q), ("b", &b)] {
            if v.is_empty() || v.iter().any(|x| !x.is_positive()) {
                return Err(Error::Malformed(format!("lattice.{name} entries must be positive")));
            }
        }
        let wrap = |v: Vec<BigRational>| v.into_iter().map(Rational).collect();
        Ok(Self {
            a: wrap(a),
            q: wrap(q),
            b: wrap(b),
        })
    }

    pub fn from_ints(a: &[i64], q: &[i64], b: &[i64]) -> Result<Self> {
        let conv = |v: &[i64]| v.iter().map(|&x| BigRational::from_integer(x.into())).collect();
        Self::new(conv(a), conv(q), conv(b))
    }

    pub fn d(&self) -> usize {
        self.b.len()
    }

    fn raw(v: &[Rational]) -> impl Iterator<Item = &BigRational> {
        v.iter().map(Rational::inner)
    }

    pub fn prod_a(&self) -> BigRational {
        product(Self::raw(&self.a))
    }

    /// `∏ b_i q_i`.
    pub fn prod_bq(&self) -> BigRational {
        product(Self::raw(&self.b)) * product(Self::raw(&self.q))
    }

    /// `∏a · ∏b · ∏q`.
    pub fn prod_all(&self) -> BigRational {
        self.prod_a() * self.prod_bq()
    }

    pub fn a_f64(&self) -> Vec<f64> {
        self.a.iter().map(Rational::to_f64).collect()
    }

    pub fn q_f64(&self) -> Vec<f64> {
        self.q.iter().map(Rational::to_f64).collect()
    }

    pub fn b_f64(&self) -> Vec<f64> {
        self.b.iter().map(Rational::to_f64).collect()
    }

    /// Human-readable `Γ_{a,q,b}` label with exact entries.
    pub fn label(&self) -> String {
        let tuple = |v: &[Rational]| {
            let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("({})", parts.join(","))
        };
        format!("Γ_{{{},{},{}}}", tuple(&self.a), tuple(&self.q), tuple(&self.b))
    }
}

/// The Gabor lattice `A(b)Z^d × B(λ)D(q)Z^d` of one fiber.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberGaborLattice {
    pub lambda: Vec<f64>,
    /// Diagonal of `A(b) = diag(1/b_i)`.
    pub translation: Vec<f64>,
    /// `B(λ)·D(q)` with `D(q) = diag(1/q_i)`.
    pub modulation: DMatrix<f64>,
    /// `|det B(λ)| / ∏ b_i q_i`.
    pub volume: f64,
}

impl FiberGaborLattice {
    pub fn d(&self) -> usize {
        self.translation.len()
    }

    pub fn translation_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.translation))
    }

    /// `|det A(b) · det(B(λ)D(q))|` computed from the matrices.
    pub fn volume_from_matrices(&self) -> f64 {
        (self.translation.iter().product::<f64>() * self.modulation.determinant()).abs()
    }
}

/// Per-fiber lattice at `λ`.
pub fn fiber_lattice(spec: &LieAlgebraSpec, params: &QuasiLatticeParams, lambda: &[f64]) -> Result<FiberGaborLattice> {
    let d = spec.d();
    let c = spec.center_dim();
    if lambda.len() != c {
        return Err(Error::DimensionMismatch {
            what: "λ".into(),
            expected: c,
            got: lambda.len(),
        });
    }
    if params.d() != d || params.a.len() != c {
        return Err(Error::DimensionMismatch {
            what: "lattice parameters vs algebra".into(),
            expected: d,
            got: params.d(),
        });
    }
    let b = build_matrices(spec).b;
    let vals = b.eval_f64(lambda);
    let q = params.q_f64();
    let modulation = DMatrix::from_fn(d, d, |i, j| vals[i * d + j] / q[j]);
    let det_b = DMatrix::from_row_slice(d, d, &vals).determinant();
    let prod_bq = to_f64(&params.prod_bq());
    Ok(FiberGaborLattice {
        lambda: lambda.to_vec(),
        translation: params.b_f64().iter().map(|x| 1.0 / x).collect(),
        modulation,
        volume: det_b.abs() / prod_bq,
    })
}

/// A suggested change of a single lattice parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adjustment {
    pub parameter: String,
    pub current: String,
    pub required: f64,
    /// Exact form when `required` is a simple rational.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub required_exact: Option<String>,
    /// Whether the density condition still holds after the change.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_compatible: Option<bool>,
}

/// Verdict on one condition with its margins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    /// The inequality or identity being checked.
    pub instantiates: String,
    pub passed: bool,
    pub margins: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub exact: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub adjustments: Vec<Adjustment>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sub_checks: Vec<ConditionReport>,
    pub detail: String,
}

impl ConditionReport {
    fn new(condition: &str, instantiates: &str, passed: bool, detail: String) -> Self {
        Self {
            condition: condition.into(),
            instantiates: instantiates.into(),
            passed,
            margins: BTreeMap::new(),
            exact: BTreeMap::new(),
            adjustments: Vec::new(),
            sub_checks: Vec::new(),
            detail,
        }
    }

    fn margin(mut self, key: &str, v: f64) -> Self {
        self.margins.insert(key.into(), v);
        self
    }

    fn exact(mut self, key: &str, v: &BigRational) -> Self {
        self.exact.insert(key.into(), format_rational(v));
        self
    }

    pub fn sub_check(&self, name: &str) -> Option<&ConditionReport> {
        self.sub_checks.iter().find(|c| c.condition == name)
    }
}

/// Density verdict from an already certified supremum `s`.
///
/// Equality `s = ∏ b_i q_i` counts as satisfied.
pub fn density_report(sup: &SupCertificate, params: &QuasiLatticeParams, tol: f64) -> ConditionReport {
    let prod = to_f64(&params.prod_bq());
    let ratio = sup.value / prod;
    let passed = sup.value <= prod + tol;
    ConditionReport::new(
        "density",
        "sup |det B(λ)| / ∏ b_i q_i ≤ 1, i.e. vol Λ(λ) ≤ 1 for a.e. λ in the box",
        passed,
        format!("s = {}, ∏ b_i q_i = {}, s/∏ b_i q_i = {}", sup.value, prod, ratio),
    )
    .margin("s", sup.value)
    .margin("s_upper", sup.upper)
    .margin("prod_bq", prod)
    .margin("ratio", ratio)
    .exact("prod_bq", &params.prod_bq())
}

/// Certify `s` on the box and compare it with `∏ b_i q_i`.
pub fn check_density_condition(
    det_b: &SpectralPolynomial,
    params: &QuasiLatticeParams,
    region: &SpectrumBox,
    tol: f64,
    max_depth: u32,
) -> Result<(ConditionReport, SupCertificate)> {
    let sup = sup_density(det_b, region, tol, max_depth)?;
    Ok((density_report(&sup, params, tol), sup))
}

/// `a` from the box, `b_i = ⌈s^{1/d}⌉` at `digits` decimals, `q` from the
/// hint or all ones.
pub fn design_params(
    s: f64,
    region: &SpectrumBox,
    d: usize,
    q_hint: Option<Vec<BigRational>>,
    b_override: Option<Vec<BigRational>>,
    digits: u32,
) -> Result<QuasiLatticeParams> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Precondition(format!(
            "supremum {s} is not a finite non-negative number"
        )));
    }
    let b = match b_override {
        Some(b) => b,
        None => {
            let s_exact = from_f64(s);
            let bi = if s_exact.is_positive() {
                ceil_root(&s_exact, d as u32, digits)
            } else {
                BigRational::one()
            };
            vec![bi; d]
        }
    };
    let q = q_hint.unwrap_or_else(|| vec![BigRational::one(); d]);
    QuasiLatticeParams::new(region.a().to_vec(), q, b)
}

/// Best rational approximation with a small denominator, if one matches.
fn simple_rational(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    // continued-fraction convergents up to denominator 10^6
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        let ai = a.to_i64()?;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > 1_000_000 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64) / (k1 as f64) - x).abs() <= 1e-12 * x.abs().max(1.0) {
            return Some(BigRational::new(h1.into(), k1.into()));
        }
        let frac = r - a;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

/// Basis condition `μ(𝐈) = ∏a · ∏ q_i b_i`.
///
/// When it fails, each `q_i` and `b_i` is solved for in turn with the rest
/// held fixed; given `s`, each solution is checked against density.
pub fn check_onb_condition(params: &QuasiLatticeParams, mu_i: f64, s: Option<f64>, tol: f64) -> ConditionReport {
    let target = to_f64(&params.prod_all());
    let passed = (mu_i - target).abs() <= tol * target.max(1.0);
    let mut report = ConditionReport::new(
        "onb",
        "μ(𝐈) = ∏ a_k · ∏ q_i b_i",
        passed,
        format!("μ(𝐈) = {mu_i}, ∏a·∏qb = {target}"),
    )
    .margin("mu_i", mu_i)
    .margin("target", target)
    .margin("difference", mu_i - target)
    .exact("target", &params.prod_all());
    if passed {
        return report;
    }
    let factor = mu_i / target;
    let prod_bq = to_f64(&params.prod_bq());
    for (name, values) in [("q", &params.q), ("b", &params.b)] {
        for (i, v) in values.iter().enumerate() {
            let required = v.to_f64() * factor;
            let density_compatible = s.map(|s| s <= prod_bq * factor + tol);
            report.adjustments.push(Adjustment {
                parameter: format!("{name}{}", i + 1),
                current: v.to_string(),
                required,
                required_exact: simple_rational(required).map(|r| format_rational(&r)),
                density_compatible,
            });
        }
    }
    if let Some(s) = s {
        let conflicts = report
            .adjustments
            .iter()
            .filter(|a| a.density_compatible == Some(false))
            .count();
        report.detail.push_str(&format!(
            "; {conflicts} of {} single-parameter fixes violate density (s = {s})",
            report.adjustments.len()
        ));
    }
    report
}

/// Step-function multiplicity `m(λ)`: value `m` on each listed box, 0 elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplicityFunction {
    pub pieces: Vec<MultiplicityPiece>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplicityPiece {
    #[serde(rename = "box")]
    pub region: RBox,
    pub m: u32,
}

impl MultiplicityFunction {
    /// `m ≡ value` on the whole box.
    pub fn constant(value: u32, region: &SpectrumBox) -> Self {
        let zero = vec![BigRational::from_integer(0.into()); region.dim()];
        Self {
            pieces: vec![MultiplicityPiece {
                region: RBox::new(zero, region.a().to_vec()),
                m: value,
            }],
        }
    }

    pub fn eval(&self, lambda: &[f64]) -> u32 {
        self.pieces
            .iter()
            .find(|p| p.region.contains(lambda))
            .map_or(0, |p| p.m)
    }
}

/// Tolerances and budgets shared by the certified routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certification {
    pub tol: f64,
    pub max_depth: u32,
    pub max_boxes: usize,
}

impl Default for Certification {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_depth: 80,
            max_boxes: 4_000_000,
        }
    }
}

/// The four necessary conditions a Parseval system imposes.
pub fn check_necessary_bounds(
    det_b: &SpectralPolynomial,
    params: &QuasiLatticeParams,
    mu_i: f64,
    multiplicity: &MultiplicityFunction,
    region: &SpectrumBox,
    cert: Certification,
) -> Result<ConditionReport> {
    let prod_a = to_f64(&params.prod_a());
    let prod_bq = to_f64(&params.prod_bq());
    let tol = cert.tol;

    let target = prod_a * prod_bq;
    let measure = ConditionReport::new(
        "measure_bound",
        "μ(𝐈) ≤ ∏ q_i · ∏ b_i · ∏ a_k",
        mu_i <= target + tol,
        format!("μ(𝐈) = {mu_i} vs {target}"),
    )
    .margin("mu_i", mu_i)
    .margin("bound", target);

    let mut worst_super = 0.0f64;
    let mut worst_wavelet = 0.0f64;
    let mut admissibility = 0.0;
    for piece in multiplicity
        .pieces
        .iter()
        .filter(|p| p.m > 0 && p.region.volume() > 0.0)
    {
        let sub = SpectrumBox::new(region.a().to_vec())?.with_sub_boxes(vec![piece.region.clone()])?;
        let sup = sup_density(det_b, &sub, tol, cert.max_depth)?;
        let m = f64::from(piece.m);
        worst_super = worst_super.max(sup.value * m);
        worst_wavelet = worst_wavelet.max(m * prod_a * sup.value);
        let mu = spectral_measure_bracket(det_b, &sub, MeasureQuery::Full, tol, cert.max_boxes)?;
        admissibility += m * mu.value;
    }
    let superframe = ConditionReport::new(
        "superframe_bound",
        "|det B(λ)| · m(λ) ≤ ∏ b_i q_i a.e.",
        worst_super <= prod_bq + tol,
        format!("max |det B|·m = {worst_super} vs ∏ b_i q_i = {prod_bq}"),
    )
    .margin("max_density_times_m", worst_super)
    .margin("prod_bq", prod_bq);
    let wavelet = ConditionReport::new(
        "wavelet_multiplicity_bound",
        "m(λ) ≤ 1 / (∏ a_k · |det B(λ)|) a.e.",
        worst_wavelet <= 1.0 + tol,
        format!("max m·∏a·|det B| = {worst_wavelet}"),
    )
    .margin("max_m_prod_a_density", worst_wavelet);
    let leb = region.lebesgue();
    let norm_bound = prod_bq * leb;
    let admissible = ConditionReport::new(
        "admissibility_norm",
        "‖η‖² = ∫ m dμ ≤ ∫ ∏ b_i q_i dλ",
        admissibility <= norm_bound + tol,
        format!("∫ m dμ = {admissibility} vs {norm_bound}"),
    )
    .margin("norm_squared", admissibility)
    .margin("bound", norm_bound);

    let sub_checks = vec![measure, superframe, wavelet, admissible];
    let passed = sub_checks.iter().all(|c| c.passed);
    let mut report = ConditionReport::new(
        "necessary_bounds",
        "necessary conditions for a Parseval system generated by one vector",
        passed,
        format!(
            "{} of {} bounds hold",
            sub_checks.iter().filter(|c| c.passed).count(),
            sub_checks.len()
        ),
    );
    report.sub_checks = sub_checks;
    Ok(report)
}

/// Wavelet discretization: the exact product identity and the sublevel set
/// `𝐒 = {λ : |det B(λ)| ≤ ∏ b_i q_i}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveletReport {
    pub condition: ConditionReport,
    pub onb: ConditionReport,
    pub mu_s: MeasureResult,
    pub s_nonempty: bool,
}

pub fn check_wavelet_discretization(
    det_b: &SpectralPolynomial,
    params: &QuasiLatticeParams,
    region: &SpectrumBox,
    cert: Certification,
) -> Result<WaveletReport> {
    let prod = params.prod_all();
    let exact_one = prod.is_one();
    let threshold = to_f64(&params.prod_bq());
    let mu_s = spectral_measure_bracket(
        det_b,
        region,
        MeasureQuery::Sublevel { threshold },
        cert.tol,
        cert.max_boxes,
    )?;
    let s_nonempty = mu_s.lower > 0.0 || mu_s.certified_volume > 0.0;
    let condition = ConditionReport::new(
        "wavelet_discretization",
        "∏ b_i · ∏ q_i · ∏ a_k = 1",
        exact_one,
        format!("∏ b·∏ q·∏ a = {}", format_rational(&prod)),
    )
    .exact("product", &prod)
    .margin("mu_s", mu_s.value)
    .margin("mu_s_lower", mu_s.lower)
    .margin("mu_s_upper", mu_s.upper)
    .margin("s_certified_volume", mu_s.certified_volume);
    let onb_ok = exact_one && mu_s.lower >= 1.0 - cert.tol && mu_s.upper <= 1.0 + cert.tol;
    let onb = ConditionReport::new(
        "wavelet_onb",
        "μ(𝐒) = 1",
        onb_ok,
        format!("μ(𝐒) ∈ [{}, {}]", mu_s.lower, mu_s.upper),
    )
    .margin("mu_s", mu_s.value)
    .margin("deviation", mu_s.value - 1.0);
    Ok(WaveletReport {
        condition,
        onb,
        mu_s,
        s_nonempty,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::spectral::det_b;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn heisenberg_fiber_lattice() {
        let spec = fixtures::heisenberg_algebra();
        let p = QuasiLatticeParams::new(vec![r(2, 1)], vec![r(1, 2)], vec![r(2, 1)]).unwrap();
        let l = fiber_lattice(&spec, &p, &[0.75]).unwrap();
        assert_eq!(l.translation, vec![0.5]);
        // (λ/q) spacing, sign from B = −λ
        assert!((l.modulation[(0, 0)] + 1.5).abs() < 1e-15);
        assert!((l.volume - 0.75).abs() < 1e-15);
    }

    #[test]
    fn example2_volume_at_s_point() {
        let spec = fixtures::example2_algebra();
        let p = QuasiLatticeParams::from_ints(&[2, 3], &[1, 1], &[3, 3]).unwrap();
        let l = fiber_lattice(&spec, &p, &[0.0, 3.0]).unwrap();
        assert!((l.volume - 1.0).abs() < 1e-15);
        assert!((l.volume_from_matrices() - l.volume).abs() < 1e-12);
        let z = fiber_lattice(&spec, &p, &[1.5, 1.5]).unwrap();
        assert_eq!(z.volume, 0.0);
    }

    #[test]
    fn heisenberg_density_iff_q_at_least_one() {
        let spec = fixtures::heisenberg_algebra();
        let det = det_b(&spec);
        let region = SpectrumBox::from_ints(&[3]).unwrap();
        for (q, expect) in [(r(1, 1), true), (r(1, 2), false), (r(2, 1), true)] {
            let p = QuasiLatticeParams::new(vec![r(3, 1)], vec![q], vec![r(3, 1)]).unwrap();
            let (rep, _) = check_density_condition(&det, &p, &region, 1e-9, 60).unwrap();
            assert_eq!(rep.passed, expect, "{rep:?}");
        }
    }

    #[test]
    fn design_example2() {
        let region = SpectrumBox::from_ints(&[2, 3]).unwrap();
        let p = design_params(9.0, &region, 2, None, None, 12).unwrap();
        assert_eq!(p, QuasiLatticeParams::from_ints(&[2, 3], &[1, 1], &[3, 3]).unwrap());
        assert_eq!(p.label(), "Γ_{(2,3),(1,1),(3,3)}");
        let one = design_params(1.0, &region, 3, None, None, 12).unwrap();
        assert!(one.b.iter().all(|x| *x == Rational::integer(1)));
    }

    #[test]
    fn onb_heisenberg_requires_half() {
        let p = QuasiLatticeParams::from_ints(&[1], &[1], &[1]).unwrap();
        let rep = check_onb_condition(&p, 0.5, Some(1.0), 1e-9);
        assert!(!rep.passed);
        let q = rep.adjustments.iter().find(|a| a.parameter == "q1").unwrap();
        assert_eq!(q.required_exact.as_deref(), Some("1/2"));
        assert_eq!(q.density_compatible, Some(false));
    }

    #[test]
    fn onb_exact_passes() {
        let p = QuasiLatticeParams::from_ints(&[2, 3], &[1, 1], &[3, 3]).unwrap();
        assert!(check_onb_condition(&p, 54.0, None, 1e-9).passed);
        assert!(!check_onb_condition(&p, 46.0 / 3.0, None, 1e-9).passed);
    }

    #[test]
    fn necessary_bounds_cases() {
        let det = det_b(&fixtures::example2_algebra());
        let region = SpectrumBox::from_ints(&[2, 3]).unwrap();
        let p = QuasiLatticeParams::from_ints(&[2, 3], &[1, 1], &[3, 3]).unwrap();
        let cert = Certification::default();
        let one = check_necessary_bounds(
            &det,
            &p,
            46.0 / 3.0,
            &MultiplicityFunction::constant(1, &region),
            &region,
            cert,
        )
        .unwrap();
        assert!(one.sub_check("measure_bound").unwrap().passed);
        assert!(one.sub_check("superframe_bound").unwrap().passed);
        let two = check_necessary_bounds(
            &det,
            &p,
            46.0 / 3.0,
            &MultiplicityFunction::constant(2, &region),
            &region,
            cert,
        )
        .unwrap();
        let sf = two.sub_check("superframe_bound").unwrap();
        assert!(!sf.passed);
        assert!((sf.margins["max_density_times_m"] - 18.0).abs() < 1e-8);
        let zero = check_necessary_bounds(
            &det,
            &p,
            46.0 / 3.0,
            &MultiplicityFunction::constant(0, &region),
            &region,
            cert,
        )
        .unwrap();
        assert!(zero.passed);
        assert_eq!(
            zero.sub_check("admissibility_norm").unwrap().margins["norm_squared"],
            0.0
        );
    }

    #[test]
    fn wavelet_product_identity() {
        let det = det_b(&fixtures::example2_algebra());
        let region = SpectrumBox::from_ints(&[2, 3]).unwrap();
        let p = QuasiLatticeParams::from_ints(&[2, 3], &[1, 1], &[3, 3]).unwrap();
        let cert = Certification {
            tol: 1e-3,
            ..Default::default()
        };
        let w = check_wavelet_discretization(&det, &p, &region, cert).unwrap();
        assert!(!w.condition.passed);
        assert_eq!(w.condition.exact["product"], "54");

        let h = det_b(&fixtures::heisenberg_algebra());
        let region = SpectrumBox::from_ints(&[2]).unwrap();
        let p = QuasiLatticeParams::new(vec![r(2, 1)], vec![r(1, 2)], vec![r(1, 1)]).unwrap();
        let w = check_wavelet_discretization(&h, &p, &region, cert).unwrap();
        assert!(w.condition.passed);
        // 𝐒 = (0, 1/2], μ(𝐒) = 1/8
        assert!((w.mu_s.value - 0.125).abs() < 1e-3);
        assert!(!w.onb.passed);
    }
}
