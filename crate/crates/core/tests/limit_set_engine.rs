use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::sync::OnceLock;

use adsqf::element::JordanPoint;
use adsqf::form::{FormContext, ProjPoint};
use adsqf::graph::{
    check_distance_decreasing, circle_distance, geodesic_intersection, random_geodesics, regularity_probe,
    Geodesic, GraphFunction,
};
use adsqf::groups::{
    build_quasifuchsian_pair, elliptic, fuchsian_diagonal_genus2, fuchsian_triangle, hyperbolic,
    quasifuchsian_twisted_genus2,
};
use adsqf::limit_set::{harvest_limit_points, invariance_monitor, to_ein_coords, EinPoint, LimitSample};
use adsqf::presentation::Presentation;
use adsqf::words::{enumerate_words, reduced_word_count, reduced_words, Word};
use adsqf::{Error, Exec};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn two_generator_pair() -> Presentation {
    let a = hyperbolic(1.0);
    let b = elliptic(1.0) * hyperbolic(1.2) * elliptic(-1.0);
    build_quasifuchsian_pair(&["a", "b"], &[a, b], &[b, a], &[], "free pair").unwrap()
}

fn twisted_sample() -> &'static LimitSample {
    static S: OnceLock<LimitSample> = OnceLock::new();
    S.get_or_init(|| harvest_limit_points(&quasifuchsian_twisted_genus2().unwrap(), 6, 1e-6).unwrap())
}

fn diagonal_sample() -> &'static LimitSample {
    static S: OnceLock<LimitSample> = OnceLock::new();
    S.get_or_init(|| harvest_limit_points(&fuchsian_diagonal_genus2().unwrap(), 6, 1e-6).unwrap())
}

#[test]
fn word_counts() {
    let pres = two_generator_pair();
    assert_eq!(enumerate_words(&pres, 1).unwrap().len(), 4);
    assert_eq!(reduced_words(2, 2).len(), 16);
    assert_eq!(reduced_word_count(2, 2), 16);
    assert_eq!(enumerate_words(&pres, 2).unwrap().len(), 16);

    let tri = fuchsian_triangle(2, 3, 7).unwrap();
    let distinct = enumerate_words(&tri, 2).unwrap().len();
    assert!((distinct as u128) < reduced_word_count(3, 2), "{distinct}");
    assert!(matches!(enumerate_words(&tri, 0), Err(Error::ContractViolation(_))));
}

#[test]
fn enumerated_words_are_reduced_and_in_length_lex_order() {
    let pres = two_generator_pair();
    let words: Vec<Word> = enumerate_words(&pres, 4).unwrap().into_iter().map(|g| g.word).collect();
    for w in &words {
        assert!(w.is_reduced(2));
    }
    for pair in words.windows(2) {
        assert!(pair[0].len() <= pair[1].len());
    }
}

#[test]
fn fuchsian_samples_are_flat() {
    for pres in [fuchsian_triangle(2, 3, 7).unwrap(), fuchsian_diagonal_genus2().unwrap()] {
        let s = harvest_limit_points(&pres, 5, 1e-6).unwrap();
        assert!(!s.is_empty());
        assert!(s.theta_spread_from_zero() <= 1e-8, "{}", s.theta_spread_from_zero());
    }
}

#[test]
fn identity_presentation_has_empty_sample() {
    let ctx = FormContext::new(2).unwrap();
    let pres = Presentation::new(ctx, vec![("e".into(), DMatrix::identity(4, 4))], vec![], "trivial").unwrap();
    let s = harvest_limit_points(&pres, 3, 1e-6).unwrap();
    assert!(s.is_empty());
    assert_eq!(s.stats.proximal, 0);
}

#[test]
fn twisted_sample_is_not_flat() {
    let s = twisted_sample();
    assert!(s.len() >= 100, "{}", s.len());
    assert!(s.theta_spread() > 1e-3);
    assert_eq!(s.stats.failures, 0);
}

#[test]
fn ein_coordinate_examples() {
    let ctx = FormContext::new(2).unwrap();
    let s = FRAC_1_SQRT_2;
    let p = to_ein_coords(&ctx, &ProjPoint::from_coords(&[s, 0.0, s, 0.0]).unwrap()).unwrap();
    assert!((p.u[0] - 1.0).abs() < 1e-15 && p.u[1].abs() < 1e-15 && p.theta == 0.0);
    let p = to_ein_coords(&ctx, &ProjPoint::from_coords(&[0.0, s, 0.0, s]).unwrap()).unwrap();
    assert!((p.u[1] - 1.0).abs() < 1e-15 && (p.theta - PI / 2.0).abs() < 1e-15);
    let minus = to_ein_coords(&ctx, &ProjPoint::from_coords(&[-s, 0.0, s, 0.0]).unwrap()).unwrap();
    let antipode = to_ein_coords(&ctx, &ProjPoint::from_coords(&[s, 0.0, -s, 0.0]).unwrap()).unwrap();
    assert_eq!(minus, antipode);
    let a = minus.ambient();
    assert!((a[0] * a[0] + a[1] * a[1] - a[2] * a[2] - a[3] * a[3]).abs() <= 1e-10);
    assert!(to_ein_coords(&ctx, &ProjPoint::from_coords(&[1.0, 0.0, 0.0, 0.0]).unwrap()).is_err());
}

#[test]
fn harvested_points_are_isotropic_and_fixed_by_their_words() {
    let pres = quasifuchsian_twisted_genus2().unwrap();
    let s = twisted_sample();
    let ctx = *pres.ctx();
    for i in (0..s.len()).step_by(7) {
        let p = s.point(i);
        let a = p.ambient();
        let q: f64 = a[0] * a[0] + a[1] * a[1] - a[2] * a[2] - a[3] * a[3];
        assert!(q.abs() <= 1e-9);
        let g = pres.evaluate(&s.sources()[i]);
        let moved = g.matrix() * DVector::from_vec(a);
        let image = EinPoint::from_isotropic(&ctx, moved.as_slice()).unwrap();
        assert!(image.distance(&p) <= 1e-7, "{}", image.distance(&p));
    }
}

#[test]
fn distance_check_examples() {
    let flat = check_distance_decreasing(&GraphFunction::from_sample(diagonal_sample()).unwrap());
    assert_eq!(flat.violations, 0);
    assert_eq!(flat.max_ratio, 0.0);

    let twisted = check_distance_decreasing(&GraphFunction::from_sample(twisted_sample()).unwrap());
    assert_eq!(twisted.violations, 0);
    assert!(twisted.max_ratio < 1.0);

    let diagonal: Vec<(f64, f64)> = (0..2000).map(|k| (TAU * k as f64 / 2000.0, TAU * k as f64 / 2000.0)).collect();
    let iso = check_distance_decreasing(&GraphFunction::from_angles(&diagonal).unwrap());
    assert!((iso.max_ratio - 1.0).abs() < 1e-6, "{}", iso.max_ratio);
    assert!(iso.boundary_case);
    assert_eq!(iso.violations, 0);

    let steep: Vec<(f64, f64)> = (0..400).map(|k| (TAU * k as f64 / 400.0, 2.0 * TAU * k as f64 / 400.0)).collect();
    assert!(check_distance_decreasing(&GraphFunction::from_angles(&steep).unwrap()).violations > 0);
}

fn synthetic(f: impl Fn(f64) -> f64, m: usize) -> GraphFunction {
    let pts: Vec<(f64, f64)> = (0..m).map(|k| TAU * k as f64 / m as f64).map(|p| (p, f(p))).collect();
    GraphFunction::from_angles(&pts).unwrap()
}

/// Best fixed point of `t -> f(t)` over a uniform grid, by circle distance.
fn grid_scan(f: impl Fn(f64) -> f64, points: usize) -> f64 {
    (0..points)
        .map(|k| TAU * k as f64 / points as f64)
        .min_by(|&a, &b| circle_distance(f(a), a).total_cmp(&circle_distance(f(b), b)))
        .unwrap()
}

#[test]
fn geodesic_on_constant_graph() {
    let gf = synthetic(|_| 0.8, 500);
    for c in random_geodesics(2, 4, 11).unwrap().into_iter().chain([Geodesic::standard(2).unwrap()]) {
        let s = geodesic_intersection(&gf, &c).unwrap();
        assert!((s.theta - 0.8).abs() < 1e-12);
        assert!(s.converged);
    }
}

#[test]
fn geodesic_matches_grid_scan_on_lipschitz_half_graph() {
    let c = Geodesic::standard(2).unwrap();
    for offset in [0.0, 1.0, 4.0] {
        let f = move |p: f64| offset + 0.5 * p.sin();
        let s = geodesic_intersection(&synthetic(f, 50_000), &c).unwrap();
        let oracle = grid_scan(f, 1_000_000);
        assert!(circle_distance(s.theta, oracle) <= 1e-5, "{} vs {oracle}", s.theta);
    }
}

#[test]
fn geodesics_against_twisted_sample_converge() {
    let gf = GraphFunction::from_sample(twisted_sample()).unwrap();
    for c in random_geodesics(2, 8, 5).unwrap() {
        let s = geodesic_intersection(&gf, &c).unwrap();
        assert!(s.converged && s.spread <= 1e-6);
    }
}

#[test]
fn geodesic_rejects_sparse_samples() {
    let gf = synthetic(|_| 0.0, 20);
    let err = geodesic_intersection(&gf, &Geodesic::standard(2).unwrap()).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}

const SCALES: [f64; 4] = [0.04, 0.02, 0.01, 0.005];

#[test]
fn regularity_of_flat_sample() {
    let r = regularity_probe(&GraphFunction::from_sample(diagonal_sample()).unwrap(), &SCALES).unwrap();
    assert!(r.max_slope <= 1e-6);
    assert!(r.second_differences.iter().all(|d| d.max <= 1e-6));
    assert_eq!(r.spacelike_fraction, 1.0);
}

#[test]
fn second_differences_shrink_linearly_on_smooth_graph() {
    let r = regularity_probe(&synthetic(|p| 0.3 * (2.0 * p).sin(), 10_000), &[0.04, 0.02, 0.01]).unwrap();
    for w in r.second_differences.windows(2) {
        let ratio = w[0].max / w[1].max;
        assert!((1.5..=2.5).contains(&ratio), "{ratio}");
    }
    assert!((r.max_slope - 0.6).abs() < 1e-3);
    assert_eq!(r.spacelike_fraction, 1.0);
}

#[test]
fn regularity_of_twisted_sample() {
    // The curve is only Lipschitz: below h = 0.01 the central difference at
    // the maximum settles near 0.35 instead of vanishing.
    let r = regularity_probe(&GraphFunction::from_sample(twisted_sample()).unwrap(), &[0.04, 0.02]).unwrap();
    assert!(r.argmax_slope_value <= 0.1, "{}", r.argmax_slope_value);
    assert!(r.spacelike_fraction > 0.0 && r.spacelike_fraction <= 1.0);
}

#[test]
fn sample_is_nearly_invariant_under_generators() {
    let pres = quasifuchsian_twisted_genus2().unwrap();
    let r = invariance_monitor(&pres, twisted_sample(), 500, Exec::default()).unwrap();
    assert!(r.median <= 0.05, "{}", r.median);
    assert_eq!(r.per_generator.len(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ein_points_reconstruct_isotropic_vectors(phi in 0.0..TAU, t in -10.0..10.0f64, scale in 0.1..10.0f64) {
        let ctx = FormContext::new(2).unwrap();
        let v = [scale * phi.cos(), scale * phi.sin(), scale * t.cos(), scale * t.sin()];
        let p = EinPoint::from_isotropic(&ctx, &v).unwrap();
        prop_assert!(p.theta >= 0.0 && p.theta < PI);
        let a = p.ambient();
        prop_assert!((a[0] * a[0] + a[1] * a[1] - a[2] * a[2] - a[3] * a[3]).abs() <= 1e-12);
        let back = EinPoint::from_isotropic(&ctx, &a).unwrap();
        prop_assert!(back.distance(&p) <= 1e-12);
    }

    #[test]
    fn lifted_distance_is_symmetric(a in 0.0..TAU, s in 0.0..PI, b in 0.0..TAU, t in 0.0..PI) {
        let p = EinPoint::new(vec![a.cos(), a.sin()], s).unwrap();
        let q = EinPoint::new(vec![b.cos(), b.sin()], t).unwrap();
        prop_assert!((p.distance(&q) - q.distance(&p)).abs() <= 1e-14);
        prop_assert!(p.distance(&p) <= 1e-15);
    }

    #[test]
    fn dedup_never_keeps_close_pairs(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<EinPoint> = (0..200)
            .map(|_| {
                let a: f64 = rng.gen_range(0.0..0.01);
                EinPoint::new(vec![a.cos(), a.sin()], rng.gen_range(0.0..0.01)).unwrap()
            })
            .collect();
        let items = pts.into_iter().map(|p| (p, Word::EMPTY, JordanPoint::new(1.0, 0.0)));
        let s = LimitSample::from_points(2, items, 1e-3).unwrap();
        for i in 0..s.len() {
            for j in 0..i {
                prop_assert!(s.point(i).distance(&s.point(j)) > 1e-3);
            }
        }
    }
}
