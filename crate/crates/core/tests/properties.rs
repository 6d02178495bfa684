//! Property-based checks of the algebraic and numerical invariants.

mod common;

use common::{cofactor_det, matches_oracle, rat, valid_spec, valid_spec_in};
use nilframe::algebra::validate_class;
use nilframe::fixtures;
use nilframe::lattice::{check_density_condition, fiber_lattice, QuasiLatticeParams, Role};
use nilframe::rational::{format_rational, parse_rational};
use nilframe::spectral::{
    build_matrices, det_b, pfaffian_identity_check, spectral_measure, sup_density, MeasureQuery, RBox,
    SpectralPolynomial, SpectrumBox,
};
use nilframe::verify::{
    fiber_parseval_defect, frame_energy_ratio, sample_window, standard_test_fields, standard_x_profiles, window_tiling,
    BandlimitedField, TruncationSpec, XGrid,
};
use nilframe::window::{build_generator_field, synthesize_window, FieldOptions, FrameGeneratorField, LambdaGrid};
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;
use std::sync::OnceLock;

fn region(a: &[i64]) -> SpectrumBox {
    SpectrumBox::from_ints(a).unwrap()
}

fn heisenberg_generator() -> &'static FrameGeneratorField {
    static GEN: OnceLock<FrameGeneratorField> = OnceLock::new();
    GEN.get_or_init(|| {
        build_generator_field(
            &fixtures::heisenberg_algebra(),
            &QuasiLatticeParams::from_ints(&[1], &[1], &[1]).unwrap(),
            &region(&[1]),
            LambdaGrid::new(vec![1.0], vec![16]).unwrap(),
            FieldOptions {
                role: Role::Frame,
                epsilon: 1e-12,
                piece_limit: 4096,
                region_measure: 0.5,
            },
        )
        .unwrap()
    })
}

fn heisenberg_fiber_ratios(lambda: f64, scale: f64, k: u32) -> Vec<f64> {
    let p = QuasiLatticeParams::from_ints(&[1], &[1], &[1]).unwrap();
    let l = fiber_lattice(&fixtures::heisenberg_algebra(), &p, &[lambda]).unwrap();
    let w = synthesize_window(&l, 64).unwrap();
    let grid = XGrid::for_lattice(&l.translation, 32, 4);
    let g = sample_window(&w, &grid.step, scale);
    let tests: Vec<_> = standard_x_profiles()
        .iter()
        .map(|x| x.sample(&grid, &l.translation))
        .collect();
    fiber_parseval_defect(&l, &g, &tests, TruncationSpec { m: 0, k, n: 8 })
        .unwrap()
        .ratios
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn pfaffian_identity_holds(spec in valid_spec()) {
        prop_assert!(validate_class(&spec).passed);
        let p = pfaffian_identity_check(&spec);
        prop_assert!(p.passed, "{:?}", p.witness);
        prop_assert!(p.block_form);
    }

    #[test]
    fn det_b_matches_cofactor_oracle(spec in valid_spec()) {
        let b = build_matrices(&spec).b;
        let det = b.determinant();
        prop_assert!(matches_oracle(&spec, &det));
        prop_assert_eq!(det, b.determinant_by_elimination());
    }

    #[test]
    fn row_swap_negates_det(spec in valid_spec_in(3, 2).prop_filter("needs two rows", |s| s.d() >= 2)) {
        let b = build_matrices(&spec).b;
        let d = b.rows();
        let mut rows: Vec<usize> = (0..d).collect();
        rows.swap(0, d - 1);
        let cols: Vec<usize> = (0..d).collect();
        prop_assert_eq!(b.select(&rows, &cols).determinant(), -&b.determinant());
    }

    #[test]
    fn det_is_multiplicative(spec in valid_spec_in(3, 2), k in proptest::collection::vec(-3i64..=3, 9)) {
        let b = build_matrices(&spec).b;
        let d = b.rows();
        let c = b.nvars();
        let kmat: Vec<Vec<BigRational>> = (0..d).map(|i| (0..d).map(|j| rat(k[i * 3 + j], 1)).collect()).collect();
        let mut prod = nilframe::spectral::PolyMatrix::zeros(d, d, c);
        for i in 0..d {
            for j in 0..d {
                let mut e = SpectralPolynomial::zero(c);
                for (l, krow) in kmat.iter().enumerate() {
                    e = &e + &(b.get(i, l) * &SpectralPolynomial::constant(c, krow[j].clone()));
                }
                prod.set(i, j, e);
            }
        }
        let expected = b.determinant().scale(&cofactor_det(&kmat));
        prop_assert_eq!(prod.determinant(), expected);
    }

    #[test]
    fn rational_strings_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = rat(p, q);
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sup_dominates_samples(
        spec in valid_spec_in(2, 2),
        a in proptest::collection::vec(1i64..=3, 2),
        ts in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 20),
    ) {
        let c = spec.center_dim();
        let det = det_b(&spec);
        let cert = sup_density(&det, &region(&a[..c]), 1e-6, 48).unwrap();
        prop_assert!(cert.value <= cert.upper);
        for (u, v) in ts {
            let x: Vec<f64> = [u, v][..c].iter().zip(&a).map(|(t, a)| t * *a as f64).collect();
            prop_assert!(det.eval_f64(&x).unwrap().abs() <= cert.upper + 1e-9);
        }
    }

    #[test]
    fn measure_is_additive_and_monotone(spec in valid_spec_in(2, 2), a in proptest::collection::vec(1i64..=3, 2)) {
        let c = spec.center_dim();
        let det = det_b(&spec);
        let full = region(&a[..c]);
        let sup = sup_density(&det, &full, 1e-6, 48).unwrap().upper;
        let tol = 1e-6 * sup.max(1.0) * a[..c].iter().product::<i64>() as f64;
        let mu = |r: &SpectrumBox| spectral_measure(&det, r, MeasureQuery::Full, tol, 4_000_000).unwrap().value;
        let lo: Vec<BigRational> = vec![rat(0, 1); c];
        let hi: Vec<BigRational> = a[..c].iter().map(|&x| rat(x, 1)).collect();
        let mut mid = hi.clone();
        mid[0] = rat(a[0], 2);
        let mut mid_lo = lo.clone();
        mid_lo[0] = rat(a[0], 2);
        let left = full.clone().with_sub_boxes(vec![RBox::new(lo, mid)]).unwrap();
        let right = full.clone().with_sub_boxes(vec![RBox::new(mid_lo, hi)]).unwrap();
        let (m_full, m_left, m_right) = (mu(&full), mu(&left), mu(&right));
        prop_assert!((m_left + m_right - m_full).abs() <= 3.0 * tol, "{m_left} + {m_right} vs {m_full}");
        prop_assert!(m_left <= m_full + 2.0 * tol && m_right <= m_full + 2.0 * tol);
    }

    #[test]
    fn lattice_volume_identity(
        spec in valid_spec(),
        t in proptest::collection::vec(0.05f64..1.0, 3),
        q in proptest::collection::vec(1i64..=4, 3),
        b in proptest::collection::vec(1i64..=4, 3),
    ) {
        let (c, d) = (spec.center_dim(), spec.d());
        let params = QuasiLatticeParams::from_ints(&vec![1; c], &q[..d], &b[..d]).unwrap();
        let lambda = &t[..c];
        let l = fiber_lattice(&spec, &params, lambda).unwrap();
        let r = det_b(&spec).eval_f64(lambda).unwrap().abs();
        let prod: f64 = q[..d].iter().zip(&b[..d]).map(|(q, b)| (q * b) as f64).product();
        let expected = r / prod;
        prop_assert!((l.volume - expected).abs() <= 1e-12 * expected.max(1.0));
        prop_assert!((l.volume_from_matrices() - expected).abs() <= 1e-9 * expected.max(1.0));
    }

    #[test]
    fn density_is_monotone_in_q(
        spec in valid_spec_in(2, 2),
        q in proptest::collection::vec(1i64..=40, 2),
        bump in proptest::collection::vec(0i64..=3, 2),
    ) {
        let (c, d) = (spec.center_dim(), spec.d());
        let det = det_b(&spec);
        let r = region(&vec![1; c]);
        let coarse: Vec<i64> = q[..d].to_vec();
        let fine: Vec<i64> = q[..d].iter().zip(&bump).map(|(q, b)| q + b).collect();
        let pass = |qs: &[i64]| {
            let p = QuasiLatticeParams::from_ints(&vec![1; c], qs, &vec![1; d]).unwrap();
            check_density_condition(&det, &p, &r, 1e-9, 48).unwrap().0.passed
        };
        if pass(&coarse) {
            prop_assert!(pass(&fine));
        }
    }

    #[test]
    fn example2_windows_tile_with_volume_norm(u in 0.02f64..0.98, v in 0.02f64..0.98) {
        let spec = fixtures::example2_algebra();
        let p = QuasiLatticeParams::from_ints(&[2, 3], &[1, 1], &[3, 3]).unwrap();
        let lambda = [2.0 * u, 3.0 * v];
        prop_assume!((lambda[0] - lambda[1]).abs() > 0.05);
        let l = fiber_lattice(&spec, &p, &lambda).unwrap();
        let w = synthesize_window(&l, 4096).unwrap();
        prop_assert!((w.norm_sq() - l.volume).abs() <= 1e-9);
        prop_assert!(window_tiling(&w, &l, 12).is_exact());
    }

    #[test]
    fn fiber_energy_scales_quadratically(lambda in 0.2f64..1.0, c in 0.1f64..3.0) {
        let base = heisenberg_fiber_ratios(lambda, 1.0, 8);
        let scaled = heisenberg_fiber_ratios(lambda, c, 8);
        for (b, s) in base.iter().zip(&scaled) {
            prop_assert!((s - c * c * b).abs() <= 1e-9 * s.max(1.0));
        }
    }

    #[test]
    fn fiber_energy_grows_with_truncation(lambda in 0.2f64..1.0, k in 0u32..8) {
        let small = heisenberg_fiber_ratios(lambda, 1.0, k);
        let large = heisenberg_fiber_ratios(lambda, 1.0, k + 4);
        for (s, l) in small.iter().zip(&large) {
            prop_assert!(*l >= s - 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn frame_ratio_is_scale_invariant_in_psi(re in -2.0f64..2.0, im in -2.0f64..2.0, which in 0usize..3) {
        prop_assume!(re.hypot(im) > 0.1);
        let gen = heisenberg_generator();
        let psi = BandlimitedField::from_test(gen, &standard_test_fields()[which], 32, 4);
        let trunc = TruncationSpec { m: 8, k: 8, n: 8 };
        let base = frame_energy_ratio(&psi, gen, trunc).unwrap().ratio;
        let scaled = frame_energy_ratio(&psi.scaled(Complex64::new(re, im)), gen, trunc).unwrap().ratio;
        prop_assert!((base - scaled).abs() <= 1e-10);
    }

    #[test]
    fn frame_ratio_scales_with_generator(c in 0.25f64..3.0) {
        let gen = heisenberg_generator();
        let psi = BandlimitedField::from_test(gen, &standard_test_fields()[0], 32, 4);
        let trunc = TruncationSpec { m: 8, k: 8, n: 8 };
        let base = frame_energy_ratio(&psi, gen, trunc).unwrap().ratio;
        let scaled = frame_energy_ratio(&psi, &gen.scaled(c), trunc).unwrap().ratio;
        prop_assert!((scaled - c * c * base).abs() <= 1e-9 * scaled);
    }

    #[test]
    fn frame_ratio_grows_with_truncation(k in 1u32..6, which in 0usize..3) {
        let gen = heisenberg_generator();
        let psi = BandlimitedField::from_test(gen, &standard_test_fields()[which], 32, 4);
        let small = frame_energy_ratio(&psi, gen, TruncationSpec { m: 8, k, n: k }).unwrap().ratio;
        let large = frame_energy_ratio(&psi, gen, TruncationSpec { m: 8, k: 2 * k, n: 2 * k }).unwrap().ratio;
        prop_assert!(large >= small - 1e-12);
    }
}
