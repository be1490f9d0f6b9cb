//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for each
//! and exits non-zero if any failed.

use std::f64::consts::TAU;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use adsqf::element::{
    attracting_point_by_iteration, attracting_point_with, jordan_projection, FixedPointOptions, Isometry,
};
use adsqf::graph::{
    check_distance_decreasing_with, circle_distance, geodesic_intersection, random_geodesics, regularity_probe,
    Geodesic, GraphFunction, GEODESIC_SEEDS,
};
use adsqf::groups::{elliptic, hyperbolic, psl2_pair_to_po22, Mat2, MoebiusPair};
use adsqf::limit_set::{harvest_limit_points, LimitSample};
use adsqf::linalg::inf_norm;
use adsqf::presentation::{load_presentation, Presentation};
use adsqf::rigidity::{
    fuchsian_verdict, fuchsian_verdict_from_spectrum, invariant_subspace_search,
    jordan_spectrum, VerdictOptions,
};
use adsqf::words::{enumerate_words, sweep_words, GroupElement, SweepOptions};
use adsqf::Exec;
use nalgebra::{DMatrix, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
/// Name, check and wall-clock budget in seconds where one applies.
type Criterion = (&'static str, fn() -> Outcome, Option<f64>);

const EXAMPLES: [&str; 4] = [
    "fuchsian_triangle_237.json",
    "fuchsian_diagonal_genus2.json",
    "quasifuchsian_twisted_genus2.json",
    "boost.json",
];

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presentations").join(name)
}

fn load(name: &str) -> Presentation {
    load_presentation(shipped(name)).expect("shipped presentation loads")
}

fn check(ok: bool, what: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what)
    }
}

/// The twisted-pair sample at word length 8, shared by criteria 4 and 5.
fn twisted_sample() -> &'static LimitSample {
    static S: OnceLock<LimitSample> = OnceLock::new();
    S.get_or_init(|| harvest_limit_points(&load(EXAMPLES[2]), 8, 1e-6).expect("harvest"))
}

fn spectral_symmetry() -> Outcome {
    let mut worst = [0.0f64; 3];
    let mut total = 0;
    for name in EXAMPLES {
        let pres = load(name);
        let words = enumerate_words(&pres, 6).map_err(|e| e.to_string())?;
        let stride = words.len().div_ceil(2000).max(1);
        for g in words.iter().step_by(stride) {
            let l = g.log_moduli(&pres).map_err(|e| format!("{name} {}: {e}", pres.render(&g.word)))?;
            let d = l.len();
            worst[0] = worst[0].max((l[0] + l[d - 1]).abs());
            worst[1] = worst[1].max((l[1] + l[d - 2]).abs());
            worst[2] = l[2..d - 2].iter().fold(worst[2], |m, x| m.max(x.abs()));
            total += 1;
        }
    }
    check(worst.iter().all(|&w| w <= 1e-7), format!("defects {worst:?}"))?;
    Ok(format!("{total} words, defects {worst:?}"))
}

fn fuchsian_collapse() -> Outcome {
    let pres = load(EXAMPLES[0]);
    let tested = sweep_words(&pres, &SweepOptions::new(8), |g: &GroupElement| {
        match g.leading_spectrum(&pres, 1e-6) {
            Ok((_, Some(_))) => Some(adsqf::element::o_n1_conjugacy_test(&g.element, 1e-8).unwrap_or(false)),
            _ => None,
        }
    })
    .map_err(|e| e.to_string())?;
    let failed = tested.iter().filter(|ok| !**ok).count();
    check(failed == 0, format!("{failed} of {} proximal words fail the O(n,1) test", tested.len()))?;

    let sample = harvest_limit_points(&pres, 8, 1e-6).map_err(|e| e.to_string())?;
    let spread = sample.theta_spread();
    check(!sample.is_empty() && spread <= 1e-8, format!("theta spread {spread:.3e} over {} points", sample.len()))?;

    let axis = invariant_subspace_search(&pres, 6, 8);
    check(axis.found && axis.residual <= 1e-10, format!("invariant axis {axis:?}"))?;

    let verdict = fuchsian_verdict(&pres, 8).map_err(|e| e.to_string())?;
    let code = verdict.verdict.exit_code();
    check(code == 0, format!("verdict {:?}", verdict.verdict))?;
    Ok(format!(
        "{} proximal words, {} points, theta spread {spread:.1e}, axis residual {:.1e}, exit {code}",
        tested.len(),
        sample.len(),
        axis.residual
    ))
}

fn quasi_fuchsian_spread() -> Outcome {
    let pres = load(EXAMPLES[2]);
    let points = jordan_spectrum(&pres, 8).map_err(|e| e.to_string())?;
    let opts = VerdictOptions::new(8);
    let report = fuchsian_verdict_from_spectrum(&pres, &opts, &points).map_err(|e| e.to_string())?;
    let ratio = report.cone.as_ref().map_or(0.0, |c| c.max_ratio);
    check(ratio > 0.01, format!("max ratio {ratio:.3e}"))?;
    check(opts.subspace_span == 6 && !report.subspace.found, format!("subspace {:?}", report.subspace))?;
    check(report.algebra_dimension == 16, format!("algebra dimension {}", report.algebra_dimension))?;
    let code = report.verdict.exit_code();
    check(code == 1, format!("verdict {:?}", report.verdict))?;
    Ok(format!("{} proximal words, max ratio {ratio:.4}, algebra 16, exit {code}", points.len()))
}

fn graph_property() -> Outcome {
    let sample = twisted_sample();
    let gf = GraphFunction::from_sample(sample).map_err(|e| e.to_string())?;
    let r = check_distance_decreasing_with(&gf, 1e-4, Exec::default());
    check(r.violations == 0, format!("{} violations, max ratio {:.6}", r.violations, r.max_ratio))?;
    Ok(format!("{} points, {} pairs examined ({:?}), max ratio {:.6}", sample.len(), r.pairs_examined, r.method, r.max_ratio))
}

/// Fixed point of `t -> f(t)` on a uniform grid of `points` parameters.
fn grid_scan(f: impl Fn(f64) -> f64, points: usize) -> f64 {
    (0..points)
        .map(|k| TAU * k as f64 / points as f64)
        .min_by(|&a, &b| circle_distance(f(a), a).total_cmp(&circle_distance(f(b), b)))
        .expect("nonempty grid")
}

fn cauchy_surface() -> Outcome {
    let gf = GraphFunction::from_sample(twisted_sample()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (i, c) in random_geodesics(2, 8, 2024).map_err(|e| e.to_string())?.iter().enumerate() {
        let s = geodesic_intersection(&gf, c).map_err(|e| format!("geodesic {i}: {e}"))?;
        check(s.converged && s.seed_limits.len() == GEODESIC_SEEDS, format!("geodesic {i} did not converge"))?;
        check(s.spread <= 1e-6, format!("geodesic {i}: seeds spread {:.3e}", s.spread))?;
        worst = worst.max(s.spread);
    }

    let f = |p: f64| 1.0 + 0.5 * p.sin();
    let m = 50_000;
    let pts: Vec<(f64, f64)> = (0..m).map(|k| TAU * k as f64 / m as f64).map(|p| (p, f(p))).collect();
    let synthetic = GraphFunction::from_angles(&pts).map_err(|e| e.to_string())?;
    let s = geodesic_intersection(&synthetic, &Geodesic::standard(2).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let oracle = grid_scan(f, 1_000_000);
    let err = circle_distance(s.theta, oracle);
    check(err <= 1e-5, format!("synthetic theta {} vs grid {oracle}", s.theta))?;
    Ok(format!("8 geodesics, worst seed spread {worst:.1e}; synthetic error {err:.1e}"))
}

/// Log-moduli of `X -> L X R^{-1}` on 2x2 matrices, built entry by entry.
fn kronecker_oracle(l: &Mat2, r: &Mat2) -> Vec<f64> {
    let ri = r.try_inverse().expect("invertible");
    let mut m = DMatrix::zeros(4, 4);
    for col in 0..4 {
        let mut x = Matrix2::zeros();
        x[(col / 2, col % 2)] = 1.0;
        let y = l * x * ri;
        for row in 0..4 {
            m[(row, col)] = y[(row / 2, row % 2)];
        }
    }
    let mut logs: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm().ln()).collect();
    logs.sort_by(|a, b| b.total_cmp(a));
    logs
}

fn random_sl2(rng: &mut ChaCha8Rng) -> Mat2 {
    hyperbolic(rng.gen_range(-1.0..1.0)) * elliptic(rng.gen_range(0.0..TAU)) * hyperbolic(rng.gen_range(-1.0..1.0))
}

fn image(l: Mat2, r: Mat2) -> Result<Isometry, String> {
    psl2_pair_to_po22(&MoebiusPair::new(l, r).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut jordan_err, mut hom_err) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (l, r) = (random_sl2(&mut rng), random_sl2(&mut rng));
        let j = jordan_projection(&image(l, r)?).map_err(|e| e.to_string())?;
        let o = kronecker_oracle(&l, &r);
        jordan_err = jordan_err.max((j.l1 - o[0]).abs()).max((j.l2 - o[1]).abs());

        let (l2, r2) = (random_sl2(&mut rng), random_sl2(&mut rng));
        let lhs = image(l * l2, r * r2)?;
        let rhs = image(l, r)?.compose(&image(l2, r2)?);
        hom_err = hom_err.max(inf_norm(&(lhs.matrix() - rhs.matrix())));
    }
    check(jordan_err <= 1e-9, format!("Jordan vs oracle {jordan_err:.3e}"))?;
    check(hom_err <= 1e-9, format!("homomorphism residual {hom_err:.3e}"))?;
    Ok(format!("100 pairs, Jordan error {jordan_err:.1e}, homomorphism residual {hom_err:.1e}"))
}

fn fixed_point_cross_validation() -> Outcome {
    let mut pool: Vec<(usize, GroupElement)> = Vec::new();
    let presentations: Vec<Presentation> = EXAMPLES.iter().map(|n| load(n)).collect();
    for (i, pres) in presentations.iter().enumerate() {
        let words = enumerate_words(pres, 5).map_err(|e| e.to_string())?;
        pool.extend(words.into_iter().filter(|g| matches!(g.leading_spectrum(pres, 1e-6), Ok((_, Some(_))))).map(|g| (i, g)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (i, g) = &pool[rng.gen_range(0..pool.len())];
        let label = format!("{} {}", EXAMPLES[*i], presentations[*i].render(&g.word));
        let eig = attracting_point_with(&g.element, FixedPointOptions { cross_check: false })
            .map_err(|e| format!("{label}: {e}"))?;
        let iter = attracting_point_by_iteration(&g.element).map_err(|e| format!("{label}: {e}"))?;
        worst = worst.max(eig.angle_to(&iter));
    }
    check(worst <= 1e-8, format!("largest angle {worst:.3e}"))?;
    Ok(format!("100 words from a pool of {}, largest angle {worst:.1e}", pool.len()))
}

fn regularity_sanity() -> Outcome {
    let m = 10_000;
    let pts: Vec<(f64, f64)> =
        (0..m).map(|k| TAU * k as f64 / m as f64).map(|p| (p, 0.3 * (2.0 * p).sin())).collect();
    let smooth = regularity_probe(&GraphFunction::from_angles(&pts).map_err(|e| e.to_string())?, &[0.04, 0.02, 0.01])
        .map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = smooth.second_differences.windows(2).map(|w| w[0].max / w[1].max).collect();
    check(ratios.iter().all(|r| (1.5..=2.5).contains(r)), format!("halving ratios {ratios:?}"))?;

    let mut flat = Vec::new();
    for name in &EXAMPLES[..2] {
        let sample = harvest_limit_points(&load(name), 6, 1e-6).map_err(|e| e.to_string())?;
        let gf = GraphFunction::from_sample(&sample).map_err(|e| e.to_string())?;
        let r = regularity_probe(&gf, &[0.04, 0.02, 0.01, 0.005]).map_err(|e| e.to_string())?;
        check(
            r.max_slope <= 1e-6 && r.spacelike_fraction == 1.0,
            format!("{name}: max slope {:.3e}, spacelike fraction {}", r.max_slope, r.spacelike_fraction),
        )?;
        flat.push(r.max_slope);
    }
    Ok(format!("halving ratios {ratios:?}; Fuchsian max slopes {flat:?}"))
}

fn limitset_artifacts(threads: &str, dir: &Path) -> Result<Vec<Vec<u8>>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_adsqf"))
        .args(["limitset", shipped(EXAMPLES[2]).to_str().unwrap(), "--words", "6", "--seed", "42", "--svg"])
        .args(["--threads", threads, "--out", dir.to_str().unwrap()])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("limitset exited with {:?}", out.status.code()));
    }
    let mut files: Vec<Vec<u8>> = ["limitset.csv", "limitset.json", "limitset.svg"]
        .iter()
        .map(|f| fs::read(dir.join(f)).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    files.push(out.stdout);
    Ok(files)
}

fn determinism() -> Outcome {
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().expect("tempdir")).collect();
    let one = limitset_artifacts("1", dirs[0].path())?;
    let eight = limitset_artifacts("8", dirs[1].path())?;
    let again = limitset_artifacts("8", dirs[2].path())?;
    check(one == eight, "1 vs 8 threads differ".into())?;
    check(eight == again, "repeated run differs".into())?;
    Ok(format!("csv {} bytes, identical across 1/8/8 threads", one[0].len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("spectral symmetry", spectral_symmetry, Some(30.0)),
        ("Fuchsian collapse", fuchsian_collapse, Some(60.0)),
        ("quasi-Fuchsian spread", quasi_fuchsian_spread, Some(120.0)),
        ("graph property", graph_property, None),
        ("Cauchy-surface property", cauchy_surface, None),
        ("oracle equivalence", oracle_equivalence, None),
        ("fixed-point cross-validation", fixed_point_cross_validation, None),
        ("regularity probe sanity", regularity_sanity, None),
        ("determinism", determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let outcome = match (outcome, budget) {
            (Ok(detail), Some(b)) if secs > *b => Err(format!("{detail}; runtime over the {b} s budget")),
            (outcome, _) => outcome,
        };
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.1} s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
