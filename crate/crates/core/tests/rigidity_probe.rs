use adsqf::element::{Isometry, JordanPoint};
use adsqf::form::{FormContext, Signature};
use adsqf::groups::{
    boost_example, build_quasifuchsian_pair, elliptic, fuchsian_diagonal_genus2, fuchsian_triangle,
    genus2_surface_group, hyperbolic, psl2_pair_to_po22, quasifuchsian_twisted_genus2, Mat2, MoebiusPair,
    GENUS2_LABELS, GENUS2_RELATOR,
};
use adsqf::presentation::Presentation;
use adsqf::rigidity::{
    algebra_dimension, cone_spread, fuchsian_verdict, invariant_subspace_search, jordan_spectrum, CaseLabel,
    Verdict,
};
use adsqf::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn max_ratio(points: &[JordanPoint]) -> f64 {
    cone_spread(points).unwrap().max_ratio
}

fn pair(l: Mat2, r: Mat2) -> Isometry {
    psl2_pair_to_po22(&MoebiusPair::new(l, r).unwrap()).unwrap()
}

/// Genus-two marking paired with its conjugate by `c`.
fn conjugated_marking_pair(c: Mat2) -> Presentation {
    let m = genus2_surface_group().generators();
    let ci = c.try_inverse().unwrap();
    let right: Vec<Mat2> = m.iter().map(|g| c * g * ci).collect();
    build_quasifuchsian_pair(&GENUS2_LABELS, &m, &right, &[GENUS2_RELATOR], "conjugated marking").unwrap()
}

#[test]
fn fuchsian_spectra_collapse_onto_the_axis() {
    for pres in [fuchsian_triangle(2, 3, 7).unwrap(), fuchsian_diagonal_genus2().unwrap()] {
        let points = jordan_spectrum(&pres, 6).unwrap();
        assert!(!points.is_empty());
        for p in &points {
            assert!(p.l2.abs() <= 1e-8 * p.l1.max(1.0), "{p:?}");
        }
    }
}

#[test]
fn twisted_spectrum_spreads_and_grows_with_length() {
    let pres = quasifuchsian_twisted_genus2().unwrap();
    let ratios: Vec<f64> = [2, 4, 6].iter().map(|&l| max_ratio(&jordan_spectrum(&pres, l).unwrap())).collect();
    assert!(ratios[2] > 0.01, "{ratios:?}");
    assert!(ratios.windows(2).all(|w| w[0] <= w[1]), "{ratios:?}");
}

#[test]
fn cone_spread_examples() {
    assert_eq!(max_ratio(&[JordanPoint::new(1.0, 0.0), JordanPoint::new(4.0, 0.0)]), 0.0);
    let one = cone_spread(&[JordanPoint::new(3.0, 1.0)]).unwrap();
    assert!((one.max_ratio - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(one.histogram.len(), 20);
    assert_eq!(one.histogram[6], 1);
    assert!(matches!(cone_spread(&[JordanPoint::new(1e-9, 0.0)]), Err(Error::InsufficientData(_))));
    assert!(matches!(cone_spread(&[]), Err(Error::InsufficientData(_))));
}

#[test]
fn embedded_fuchsian_group_fixes_the_last_axis() {
    let r = invariant_subspace_search(&fuchsian_triangle(2, 3, 7).unwrap(), 6, 8);
    assert!(r.found);
    assert_eq!(r.dimension, 1);
    assert_eq!(r.signature, Some(Signature { pos: 0, neg: 1, zero: 0 }));
    assert_eq!(r.case_label, CaseLabel::LorentzianK1);
    assert!(r.residual <= 1e-10);
    assert!((r.basis[0][3].abs() - 1.0).abs() < 1e-12);
}

#[test]
fn twisted_pair_has_no_invariant_subspace() {
    let r = invariant_subspace_search(&quasifuchsian_twisted_genus2().unwrap(), 6, 8);
    assert!(!r.found);
    assert_eq!(r.case_label, CaseLabel::None);
    assert!(r.seeds_tried >= 4 + 8);
}

#[test]
fn single_boost_has_an_invariant_line() {
    let r = invariant_subspace_search(&boost_example().unwrap(), 6, 8);
    assert!(r.found);
    assert_eq!(r.dimension, 1);
    let sig = r.signature.unwrap();
    assert_eq!(r.case_label, CaseLabel::of(&sig));
    if sig.zero > 0 {
        assert!((1..=2).contains(&sig.zero));
    }
}

#[test]
fn algebra_dimension_examples() {
    let ctx = FormContext::new(2).unwrap();
    let trivial = Presentation::new(ctx, vec![("e".into(), DMatrix::identity(4, 4))], vec![], "trivial").unwrap();
    assert_eq!(algebra_dimension(&trivial, 4), 1);
    let fuchsian = algebra_dimension(&fuchsian_triangle(2, 3, 7).unwrap(), 4);
    assert!(fuchsian <= 10, "{fuchsian}");
    assert_eq!(algebra_dimension(&quasifuchsian_twisted_genus2().unwrap(), 4), 16);
}

#[test]
fn verdict_examples() {
    let tri = fuchsian_verdict(&fuchsian_triangle(2, 3, 7).unwrap(), 6).unwrap();
    assert_eq!(tri.verdict, Verdict::FuchsianConsistent);
    assert!(!tri.irreducibility_certified);

    let twisted = fuchsian_verdict(&quasifuchsian_twisted_genus2().unwrap(), 6).unwrap();
    assert_eq!(twisted.verdict, Verdict::ZariskiDenseConsistent);
    assert!(twisted.irreducibility_certified);
    assert_eq!(twisted.full_algebra_dimension, 16);

    let c = hyperbolic(0.4) * elliptic(0.9);
    let conj = fuchsian_verdict(&conjugated_marking_pair(c), 5).unwrap();
    assert!(conj.cone.as_ref().unwrap().max_ratio <= 1e-6);
    assert_eq!(conj.verdict, Verdict::FuchsianConsistent, "{:?}", conj.subspace);

    let short = fuchsian_verdict(&quasifuchsian_twisted_genus2().unwrap(), 1).unwrap();
    assert_eq!(short.verdict, Verdict::Inconclusive);
}

#[test]
fn no_proximal_words_is_inconclusive() {
    let ctx = FormContext::new(2).unwrap();
    let rot = adsqf::element::rotation(&ctx, 0, 1, 1.0).into_matrix();
    let pres = Presentation::new(ctx, vec![("r".into(), rot)], vec![], "rotation").unwrap();
    let report = fuchsian_verdict(&pres, 3).unwrap();
    assert!(report.cone.is_none());
    assert_eq!(report.verdict, Verdict::Inconclusive);
}

fn sl2() -> impl Strategy<Value = Mat2> {
    (-0.6..0.6f64, -0.6..0.6f64, 0.0..std::f64::consts::TAU)
        .prop_map(|(a, b, t)| hyperbolic(a) * elliptic(t) * hyperbolic(b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn verdict_survives_global_conjugation(l in sl2(), r in sl2()) {
        let h = pair(l, r);
        for pres in [fuchsian_diagonal_genus2().unwrap(), quasifuchsian_twisted_genus2().unwrap()] {
            let before = fuchsian_verdict(&pres, 4).unwrap();
            let after = fuchsian_verdict(&pres.conjugated_by(&h).unwrap(), 4).unwrap();
            prop_assert_eq!(before.verdict, after.verdict);
            prop_assert_eq!(before.subspace.dimension, after.subspace.dimension);
            prop_assert_eq!(before.algebra_dimension, after.algebra_dimension);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cone_spread_matches_brute_force(raw in prop::collection::vec((0.0..5.0f64, 0.0..1.0f64), 1..40)) {
        let points: Vec<JordanPoint> = raw.iter().map(|&(l1, t)| JordanPoint::new(l1, t * l1)).collect();
        let oracle = points.iter().filter(|p| p.l1 > 1e-6).map(|p| p.l2 / p.l1).fold(None, |m: Option<f64>, r| {
            Some(m.map_or(r, |m| m.max(r)))
        });
        match (cone_spread(&points), oracle) {
            (Ok(c), Some(o)) => {
                prop_assert!((c.max_ratio - o).abs() <= 1e-15);
                prop_assert!((0.0..=1.0).contains(&c.max_ratio));
                prop_assert_eq!(c.histogram.iter().sum::<u64>() as usize, c.points_used);
            }
            (Err(Error::InsufficientData(_)), None) => {}
            (other, o) => prop_assert!(false, "{:?} vs {:?}", other.map(|c| c.max_ratio), o),
        }
    }

    #[test]
    fn cone_ratio_grows_with_more_points(raw in prop::collection::vec((0.1..5.0f64, 0.0..1.0f64), 2..40), cut in 1usize..40) {
        let points: Vec<JordanPoint> = raw.iter().map(|&(l1, t)| JordanPoint::new(l1, t * l1)).collect();
        let cut = cut.min(points.len());
        prop_assert!(max_ratio(&points[..cut]) <= max_ratio(&points));
    }
}
