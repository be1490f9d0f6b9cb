//! Diagnostics separating Fuchsian groups from Zariski-dense ones: spread of
//! Jordan projections, invariant subspaces, and the dimension of the
//! linear span of the group.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::element::JordanPoint;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::form::{subspace_signature, LorentzVector, Signature};
use crate::linalg;
use crate::presentation::Presentation;
use crate::tol::{Tolerances, EPS_GAP, TAU_INV, TAU_RANK, VERDICT_DENSE_MIN, VERDICT_FUCHSIAN_MAX};
use crate::words::{sweep_words, GroupElement, SweepOptions, Word};

/// Jordan points `(lambda1, lambda2)` of the proximal elements in the ball.
pub fn jordan_spectrum(pres: &Presentation, max_len: usize) -> Result<Vec<JordanPoint>> {
    jordan_spectrum_with(pres, &SweepOptions::new(max_len), EPS_GAP)
}

///
/// Conjugate elements share their spectrum, so each conjugacy class is
/// computed once, always on its least cyclic rotation. The result does not
/// depend on which word of the class came first.
pub fn jordan_spectrum_with(pres: &Presentation, opts: &SweepOptions, eps_gap: f64) -> Result<Vec<JordanPoint>> {
    let k = pres.generators().len();
    let classes = sweep_words(pres, opts, |g| Some(g.word.cyclic_class(k)))?;
    let mut index: HashMap<Word, usize> = HashMap::new();
    let mut reps: Vec<Word> = Vec::new();
    let ids: Vec<usize> = classes
        .iter()
        .map(|w| {
            *index.entry(*w).or_insert_with(|| {
                reps.push(*w);
                reps.len() - 1
            })
        })
        .collect();
    drop(index);
    let spectra = opts.exec.map(&reps, |w| {
        let g = GroupElement { word: *w, element: pres.evaluate(w) };
        match g.leading_spectrum(pres, eps_gap) {
            Ok((j, Some(_))) => Some(j),
            _ => None,
        }
    });
    Ok(ids.iter().filter_map(|&i| spectra[i]).collect())
}

pub const CONE_L1_MIN: f64 = 1e-6;
pub const CONE_BINS: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct ConeSpread {
    /// Points with `l1` above [`CONE_L1_MIN`].
    pub points_used: usize,
    pub max_ratio: f64,
    /// The point attaining `max_ratio`.
    pub extremal: JordanPoint,
    /// Counts of `l2 / l1` in 20 equal bins on `[0, 1]`.
    pub histogram: Vec<u64>,
}

pub fn cone_spread(points: &[JordanPoint]) -> Result<ConeSpread> {
    let mut histogram = vec![0u64; CONE_BINS];
    let mut used = 0;
    let mut best: Option<(f64, JordanPoint)> = None;
    for p in points.iter().filter(|p| p.l1 > CONE_L1_MIN) {
        let r = (p.l2 / p.l1).clamp(0.0, 1.0);
        used += 1;
        histogram[((r * CONE_BINS as f64) as usize).min(CONE_BINS - 1)] += 1;
        if best.is_none_or(|(b, _)| r > b) {
            best = Some((r, *p));
        }
    }
    let (max_ratio, extremal) = best.ok_or_else(|| {
        Error::InsufficientData(format!("no Jordan point with l1 > {CONE_L1_MIN:e}"))
    })?;
    Ok(ConeSpread { points_used: used, max_ratio, extremal, histogram })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseLabel {
    DegenerateDim1,
    DegenerateDim2,
    SignatureK2,
    LorentzianK1,
    PositiveDefinite,
    None,
}

impl CaseLabel {
    pub fn of(sig: &Signature) -> Self {
        match (sig.zero, sig.neg) {
            (1, _) => CaseLabel::DegenerateDim1,
            (z, _) if z >= 2 => CaseLabel::DegenerateDim2,
            (_, 2) => CaseLabel::SignatureK2,
            (_, 1) => CaseLabel::LorentzianK1,
            _ => CaseLabel::PositiveDefinite,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantSubspaceReport {
    pub found: bool,
    pub dimension: usize,
    pub signature: Option<Signature>,
    /// Orthonormal (Euclidean) basis, one row per vector.
    pub basis: Vec<Vec<f64>>,
    /// Largest `|(I - P) g b| / |g b|` over generators `g` and basis vectors `b`.
    pub residual: f64,
    pub case_label: CaseLabel,
    pub seeds_tried: usize,
    pub span_length: usize,
}

/// Orthonormal basis of the span of `{w v : |w| <= max_len}`.
fn orbit_span(letters: &[DMatrix<f64>], seed: &DVector<f64>, max_len: usize) -> Vec<DVector<f64>> {
    let d = seed.len();
    let Some(first) = linalg::normalized(seed) else {
        return Vec::new();
    };
    let mut basis = vec![first.clone()];
    let mut frontier = vec![first];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for f in &frontier {
            for g in letters {
                let w = g * f;
                let scale = w.norm();
                let r = linalg::reject(&w, &basis);
                if r.norm() > TAU_RANK * scale {
                    let r = r.normalize();
                    basis.push(r.clone());
                    next.push(r);
                    if basis.len() == d {
                        return basis;
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    basis
}

fn invariance_residual(gens: &[DMatrix<f64>], basis: &[DVector<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for g in gens {
        for b in basis {
            let w = g * b;
            let scale = w.norm();
            if scale > 0.0 {
                worst = worst.max(linalg::reject(&w, basis).norm() / scale);
            }
        }
    }
    worst
}

/// Real eigenvectors (one basis per eigenspace) of `m`.
fn real_eigenvectors(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let d = m.nrows();
    let scale = m.norm().max(1.0);
    let mut out = Vec::new();
    for lambda in linalg::real_eigenvalues(m, 1e-4 * scale, 1e-4 * scale) {
        let shifted = m - DMatrix::identity(d, d) * lambda;
        out.extend(linalg::null_space(&shifted, 1e-7));
    }
    out
}

/// A random element of the algebra of matrices commuting with every
/// generator.
fn random_commutant(gens: &[DMatrix<f64>], d: usize, rng: &mut ChaCha8Rng) -> Option<DMatrix<f64>> {
    if gens.is_empty() {
        return None;
    }
    let dd = d * d;
    let mut stacked = DMatrix::zeros(gens.len() * dd, dd);
    for (k, g) in gens.iter().enumerate() {
        let g = g / g.norm();
        // column-major vec: vec(gX - Xg) = (I kron g - g^T kron I) vec(X)
        let id = DMatrix::<f64>::identity(d, d);
        let block = id.kronecker(&g) - g.transpose().kronecker(&id);
        stacked.view_mut((k * dd, 0), (dd, dd)).copy_from(&block);
    }
    let null = linalg::null_space(&stacked, 1e-9);
    if null.len() <= 1 {
        return None;
    }
    let mut x = DVector::zeros(dd);
    for v in &null {
        x += v * rng.gen_range(-1.0..1.0);
    }
    Some(DMatrix::from_column_slice(d, d, x.as_slice()))
}

pub const SUBSPACE_SEED: u64 = 0x005e_ed0f_5ba5;

/// Searches for a proper invariant subspace among orbit spans of seed
/// vectors: the standard basis, `trials` random vectors, eigenvectors of
/// every generator and eigenvectors of a random commuting matrix.
pub fn invariant_subspace_search(pres: &Presentation, span_length: usize, trials: usize) -> InvariantSubspaceReport {
    invariant_subspace_search_seeded(pres, span_length, trials, SUBSPACE_SEED)
}

pub fn invariant_subspace_search_seeded(
    pres: &Presentation,
    span_length: usize,
    trials: usize,
    seed: u64,
) -> InvariantSubspaceReport {
    let ctx = *pres.ctx();
    let d = ctx.dim();
    let k = pres.generators().len();
    let gens: Vec<DMatrix<f64>> = pres.generators().iter().map(|g| g.element.matrix().clone()).collect();
    let letters: Vec<DMatrix<f64>> = (0..2 * k as u8).map(|l| pres.letter(l).matrix().clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut seeds: Vec<DVector<f64>> = (0..d).map(|i| DVector::from_fn(d, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
    for _ in 0..trials {
        seeds.push(DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)));
    }
    if let Some(c) = random_commutant(&gens, d, &mut rng) {
        seeds.extend(real_eigenvectors(&c));
    }
    for g in &gens {
        seeds.extend(real_eigenvectors(&(g / g.norm())));
    }

    let mut best: Option<(Vec<DVector<f64>>, f64)> = None;
    for s in &seeds {
        let span = orbit_span(&letters, s, span_length);
        if span.is_empty() || span.len() >= d {
            continue;
        }
        if best.as_ref().is_some_and(|(b, _)| b.len() <= span.len()) {
            continue;
        }
        let residual = invariance_residual(&gens, &span);
        if residual <= TAU_INV {
            best = Some((span, residual));
        }
    }
    let report = |found, dimension, signature, basis, residual, case_label| InvariantSubspaceReport {
        found,
        dimension,
        signature,
        basis,
        residual,
        case_label,
        seeds_tried: seeds.len(),
        span_length,
    };
    match best {
        Some((span, residual)) => {
            let lv: Vec<LorentzVector> = span.iter().map(|v| LorentzVector(v.clone())).collect();
            let sig = subspace_signature(&ctx, &lv).ok();
            let label = sig.as_ref().map_or(CaseLabel::None, CaseLabel::of);
            let basis = span.iter().map(|v| v.iter().copied().collect()).collect();
            report(true, span.len(), sig, basis, residual, label)
        }
        None => report(false, 0, None, Vec::new(), f64::NAN, CaseLabel::None),
    }
}

/// Dimension of the span of all word matrices of length at most `span_length`
/// (the identity included).
pub fn algebra_dimension(pres: &Presentation, span_length: usize) -> usize {
    let d = pres.ctx().dim();
    let k = pres.generators().len();
    let letters: Vec<DMatrix<f64>> = (0..2 * k as u8).map(|l| pres.letter(l).matrix().clone()).collect();
    let id = DMatrix::<f64>::identity(d, d);
    let first = DVector::from_column_slice(id.as_slice()).normalize();
    let mut basis = vec![first.clone()];
    let mut frontier = vec![first];
    for _ in 0..span_length {
        let mut next = Vec::new();
        for f in &frontier {
            let fm = DMatrix::from_column_slice(d, d, f.as_slice());
            for g in &letters {
                let w = DVector::from_column_slice((&fm * g).as_slice());
                let scale = w.norm();
                let r = linalg::reject(&w, &basis);
                if r.norm() > TAU_RANK * scale {
                    let r = r.normalize();
                    basis.push(r.clone());
                    next.push(r);
                    if basis.len() == d * d {
                        return d * d;
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    basis.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    FuchsianConsistent,
    ZariskiDenseConsistent,
    Inconclusive,
}

impl Verdict {
    /// CLI exit code.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::FuchsianConsistent => 0,
            Verdict::ZariskiDenseConsistent => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerdictOptions {
    pub max_len: usize,
    /// Word length for orbit spans; capped at 6 by default.
    pub subspace_span: usize,
    /// Word length for the algebra span; capped at 4 by default.
    pub algebra_span: usize,
    pub trials: usize,
    pub seed: u64,
    pub eps_gap: f64,
    pub exec: Exec,
}

impl VerdictOptions {
    pub fn new(max_len: usize) -> Self {
        Self {
            max_len,
            subspace_span: max_len.min(6),
            algebra_span: max_len.min(4),
            trials: 8,
            seed: SUBSPACE_SEED,
            eps_gap: EPS_GAP,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub max_len: usize,
    pub proximal_words: usize,
    /// `None` when no proximal word was found.
    pub cone: Option<ConeSpread>,
    pub subspace: InvariantSubspaceReport,
    pub algebra_dimension: usize,
    pub full_algebra_dimension: usize,
    /// A full-dimensional span rules out invariant subspaces over C
    /// (Burnside); this is the only one-sided certificate in the report.
    pub irreducibility_certified: bool,
    pub tolerances: Tolerances,
}

pub fn fuchsian_verdict(pres: &Presentation, max_len: usize) -> Result<VerdictReport> {
    fuchsian_verdict_with(pres, &VerdictOptions::new(max_len))
}

pub fn fuchsian_verdict_with(pres: &Presentation, opts: &VerdictOptions) -> Result<VerdictReport> {
    let sweep = SweepOptions::new(opts.max_len).with_exec(opts.exec);
    let points = jordan_spectrum_with(pres, &sweep, opts.eps_gap)?;
    fuchsian_verdict_from_spectrum(pres, opts, &points)
}

/// Verdict from a precomputed Jordan spectrum.
pub fn fuchsian_verdict_from_spectrum(
    pres: &Presentation,
    opts: &VerdictOptions,
    points: &[JordanPoint],
) -> Result<VerdictReport> {
    let cone = match cone_spread(points) {
        Ok(c) => Some(c),
        Err(Error::InsufficientData(_)) => None,
        Err(e) => return Err(e),
    };
    let subspace = invariant_subspace_search_seeded(pres, opts.subspace_span, opts.trials, opts.seed);
    let algebra = algebra_dimension(pres, opts.algebra_span);
    let d = pres.ctx().dim();
    let full = d * d;
    let verdict = match &cone {
        Some(c) if c.max_ratio <= VERDICT_FUCHSIAN_MAX && subspace.found => Verdict::FuchsianConsistent,
        Some(c) if c.max_ratio > VERDICT_DENSE_MIN && !subspace.found && algebra == full => {
            Verdict::ZariskiDenseConsistent
        }
        _ => Verdict::Inconclusive,
    };
    Ok(VerdictReport {
        verdict,
        max_len: opts.max_len,
        proximal_words: points.len(),
        cone,
        subspace,
        algebra_dimension: algebra,
        full_algebra_dimension: full,
        irreducibility_certified: algebra == full,
        tolerances: Tolerances::current(),
    })
}
