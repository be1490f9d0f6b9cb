use std::io::Write;
use std::path::Path;

use adsqf::element::{fixed_point_in_ads, o_n1_conjugacy_test, JordanPoint};
use adsqf::form::ProjPoint;
use adsqf::graph::{
    check_distance_decreasing_with, geodesic_intersection, random_geodesics, regularity_probe, DistanceReport, Geodesic,
    GeodesicSolution, GraphFunction, RegularityReport,
};
use adsqf::limit_set::{harvest_limit_points_with, to_ein_coords, write_csv, EinPoint, HarvestOptions, HarvestStats, LimitSample};
use adsqf::presentation::{load_presentation, Presentation};
use adsqf::rigidity::{cone_spread, fuchsian_verdict_with, jordan_spectrum_with, ConeSpread, VerdictOptions};
use adsqf::tol::{DELTA_SEP, TAU_CONJ};
use adsqf::words::{GroupElement, SweepOptions};
use adsqf::Exec;
use serde::Serialize;

use crate::artifacts::{emit_report, envelope, limit_set_svg, out_dir, to_json, write_file, ConfigEcho};
use crate::{CliError, RunFlags, EXIT_EMPTY, EXIT_RUNTIME};

pub const DEFAULT_SCALES: [f64; 4] = [0.04, 0.02, 0.01, 0.005];

fn load(path: &Path) -> Result<Presentation, CliError> {
    Ok(load_presentation(path)?)
}

fn harvest(pres: &Presentation, run: &RunFlags) -> Result<LimitSample, CliError> {
    let opts = HarvestOptions::new(run.words as usize).with_gap(run.gap).with_exec(Exec::default());
    Ok(harvest_limit_points_with(pres, &opts)?)
}

fn warn_empty(what: &str) -> u8 {
    eprintln!("warning: {what} produced no limit points");
    EXIT_EMPTY
}

#[derive(Debug, Serialize)]
struct ClassifyReport {
    input: String,
    word: String,
    /// Free reduction cancelled letters of the input.
    reduced: bool,
    identity: bool,
    log_moduli: Vec<f64>,
    gap: f64,
    proximal: bool,
    jordan: JordanPoint,
    conjugate_into_o_n1: Option<bool>,
    ads_fixed_point: Option<Vec<f64>>,
    attracting: Option<Vec<f64>>,
    attracting_ein: Option<EinPoint>,
    repelling: Option<Vec<f64>>,
}

pub fn classify(path: &Path, text: &str, run: &RunFlags) -> Result<u8, CliError> {
    let pres = load(path)?;
    let (word, reduced) = pres.parse_word(text)?;
    let k = pres.generators().len();
    let g = GroupElement { word, element: pres.evaluate(&word) };
    let log_moduli = g.log_moduli(&pres)?;
    let gap = log_moduli[0] - log_moduli[1];
    let proximal = gap > run.gap;
    let (mut attracting, mut attracting_ein, mut repelling, mut conjugate) = (None, None, None, None);
    if proximal {
        let plus = match g.leading_spectrum(&pres, run.gap)? {
            (_, Some(v)) => ProjPoint::from_vector(&v)?,
            (_, None) => unreachable!("gap checked above"),
        };
        let inv_word = word.inverse(k);
        let inv = GroupElement { word: inv_word, element: pres.evaluate(&inv_word) };
        if let (_, Some(v)) = inv.leading_spectrum(&pres, run.gap)? {
            repelling = Some(ProjPoint::from_vector(&v)?.coords().to_vec());
        }
        attracting_ein = to_ein_coords(pres.ctx(), &plus).ok();
        attracting = Some(plus.coords().to_vec());
        conjugate = Some(o_n1_conjugacy_test(&g.element, TAU_CONJ)?);
    }
    let report = ClassifyReport {
        input: text.to_string(),
        word: pres.render(&word),
        reduced,
        identity: word.is_empty(),
        jordan: JordanPoint::new(log_moduli[0], log_moduli[1]),
        log_moduli,
        gap,
        proximal,
        conjugate_into_o_n1: conjugate,
        ads_fixed_point: fixed_point_in_ads(&g.element)?.map(|p| p.coords().to_vec()),
        attracting,
        attracting_ein,
        repelling,
    };
    let config = ConfigEcho::new("classify", path, run).with("word", text);
    emit_report(&config, report, run, "classify")?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct LimitsetReport {
    points: usize,
    stats: HarvestStats,
    dedup_radius: f64,
    theta_spread: f64,
    csv: Option<String>,
    svg: Option<String>,
}

pub fn limitset(path: &Path, run: &RunFlags) -> Result<u8, CliError> {
    let pres = load(path)?;
    let sample = harvest(&pres, run)?;
    let mut csv = Vec::new();
    write_csv(&mut csv, &sample, &pres.labels())?;
    let config = ConfigEcho::new("limitset", path, run);
    let dir = out_dir(run)?;
    let report = LimitsetReport {
        points: sample.len(),
        stats: sample.stats,
        dedup_radius: sample.dedup_radius(),
        theta_spread: if sample.is_empty() { 0.0 } else { sample.theta_spread() },
        csv: dir.as_ref().map(|_| "limitset.csv".to_string()),
        svg: (dir.is_some() && run.svg).then(|| "limitset.svg".to_string()),
    };
    let sidecar = to_json(&envelope(&config, &report))?;
    match &dir {
        Some(dir) => {
            write_file(&dir.join("limitset.csv"), &csv)?;
            write_file(&dir.join("limitset.json"), sidecar.as_bytes())?;
            if run.svg {
                let meta = to_json(&envelope(&config, ()))?;
                write_file(&dir.join("limitset.svg"), limit_set_svg(&sample, &meta).as_bytes())?;
            }
            print!("{sidecar}");
        }
        None => {
            std::io::stdout().write_all(&csv).map_err(|e| CliError::Io("<stdout>".into(), e))?;
            eprint!("{sidecar}");
        }
    }
    Ok(if sample.is_empty() { warn_empty("harvest") } else { 0 })
}

#[derive(Debug, Serialize)]
struct JordanReport {
    proximal_words: usize,
    cone: Option<ConeSpread>,
}

pub fn jordan(path: &Path, run: &RunFlags) -> Result<u8, CliError> {
    let pres = load(path)?;
    let sweep = SweepOptions::new(run.words as usize).with_exec(Exec::default());
    let points = jordan_spectrum_with(&pres, &sweep, run.gap)?;
    if let Some(dir) = out_dir(run)? {
        let mut csv = String::from("lambda1,lambda2\n");
        for p in &points {
            csv.push_str(&format!("{:.16e},{:.16e}\n", p.l1, p.l2));
        }
        write_file(&dir.join("jordan.csv"), csv.as_bytes())?;
    }
    let report = JordanReport { proximal_words: points.len(), cone: cone_spread(&points).ok() };
    emit_report(&ConfigEcho::new("jordan", path, run), report, run, "jordan")?;
    Ok(0)
}

pub fn verdict(path: &Path, run: &RunFlags) -> Result<u8, CliError> {
    let pres = load(path)?;
    let mut opts = VerdictOptions::new(run.words as usize);
    opts.seed = run.seed;
    opts.eps_gap = run.gap;
    opts.exec = Exec::default();
    let report = fuchsian_verdict_with(&pres, &opts)?;
    let code = report.verdict.exit_code() as u8;
    let config = ConfigEcho::new("verdict", path, run)
        .with("subspace_span", opts.subspace_span)
        .with("algebra_span", opts.algebra_span)
        .with("trials", opts.trials);
    emit_report(&config, report, run, "verdict")?;
    Ok(code)
}

#[derive(Debug, Serialize)]
struct RegularityOutput {
    points: usize,
    regularity: RegularityReport,
    distance: DistanceReport,
}

pub fn regularity(path: &Path, scales: &[f64], run: &RunFlags) -> Result<u8, CliError> {
    let pres = load(path)?;
    let sample = harvest(&pres, run)?;
    if sample.is_empty() {
        return Ok(warn_empty("harvest"));
    }
    let gf = GraphFunction::from_sample(&sample)?;
    let report = RegularityOutput {
        points: sample.len(),
        regularity: regularity_probe(&gf, scales)?,
        distance: check_distance_decreasing_with(&gf, DELTA_SEP, Exec::default()),
    };
    let config = ConfigEcho::new("regularity", path, run).with("scales", scales);
    emit_report(&config, report, run, "regularity")?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct GeodesicOutcome {
    geodesic: Geodesic,
    #[serde(skip_serializing_if = "Option::is_none")]
    solution: Option<GeodesicSolution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn geodesic(
    path: &Path,
    explicit: Option<(Vec<f64>, Vec<f64>)>,
    count: usize,
    run: &RunFlags,
) -> Result<u8, CliError> {
    let pres = load(path)?;
    let n = pres.ctx().n();
    let geodesics = match &explicit {
        Some((p, d)) => {
            if p.len() != n || d.len() != n {
                return Err(CliError::Usage(format!("--point and --direction need {n} coordinates")));
            }
            vec![Geodesic::new(p.clone(), d.clone())?]
        }
        None => random_geodesics(n, count, run.seed)?,
    };
    let sample = harvest(&pres, run)?;
    if sample.is_empty() {
        return Ok(warn_empty("harvest"));
    }
    let gf = GraphFunction::from_sample(&sample)?;
    let outcomes: Vec<GeodesicOutcome> = geodesics
        .into_iter()
        .map(|c| match geodesic_intersection(&gf, &c) {
            Ok(s) => GeodesicOutcome { geodesic: c, solution: Some(s), error: None },
            Err(e) => GeodesicOutcome { geodesic: c, solution: None, error: Some(e.to_string()) },
        })
        .collect();
    let failed = outcomes.iter().any(|o| o.solution.as_ref().is_none_or(|s| !s.converged));
    let mut config = ConfigEcho::new("geodesic", path, run);
    config = match explicit {
        Some((p, d)) => config.with("point", p).with("direction", d),
        None => config.with("count", count),
    };
    emit_report(&config, outcomes, run, "geodesic")?;
    Ok(if failed { EXIT_RUNTIME } else { 0 })
}

#[derive(Debug, Serialize)]
struct RelatorCheck {
    relator: String,
    residual: f64,
}

#[derive(Debug, Serialize)]
struct ValidateReport {
    valid: bool,
    n: usize,
    generators: Vec<String>,
    max_isometry_residual: f64,
    relators: Vec<RelatorCheck>,
    provenance: String,
}

pub fn validate(path: &Path, run: &RunFlags) -> Result<u8, CliError> {
    let pres = load(path)?;
    let relators = pres
        .relators()
        .iter()
        .map(|r| Ok(RelatorCheck { relator: r.clone(), residual: pres.relator_residual(r)? }))
        .collect::<Result<Vec<_>, adsqf::Error>>()?;
    let report = ValidateReport {
        valid: true,
        n: pres.ctx().n(),
        generators: pres.labels(),
        max_isometry_residual: pres.generators().iter().map(|g| g.element.residual()).fold(0.0, f64::max),
        relators,
        provenance: pres.provenance().to_string(),
    };
    emit_report(&ConfigEcho::new("validate", path, run), report, run, "validate")?;
    Ok(0)
}
