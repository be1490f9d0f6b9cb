//! Spectral analysis of single isometries of the (n,2) form.
//!
//! All computations run on a lift in O(n,2); the moduli of eigenvalues do not
//! depend on the choice of lift. For a proximal element the top and bottom of
//! the spectrum come from QR sweeps on `M` and on `M^{-1} = J M^T J`. The
//! middle eigenvalues are tiny next to the top one and are lost in a sweep on
//! `M`, so they are read off the restriction to the complement of the
//! attracting and repelling lines instead.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::{FormContext, ProjPoint};
use crate::linalg;
use crate::tol::{EPS_GAP, TAU_FIXED, TAU_ISO, TAU_ISOM, TAU_RANK, TAU_SPEC};

/// `||M^T J M - J||_inf`.
pub fn form_residual(ctx: &FormContext, m: &DMatrix<f64>) -> f64 {
    let j = ctx.gram_matrix();
    linalg::inf_norm(&(m.transpose() * &j * m - j))
}

/// A matrix in O(n,2).
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    ctx: FormContext,
    matrix: DMatrix<f64>,
}

impl Isometry {
    /// Validates the matrix against the form at `TAU_ISOM`.
    pub fn new(ctx: FormContext, matrix: DMatrix<f64>) -> Result<Self> {
        let d = ctx.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if matrix.nrows() != d { matrix.nrows() } else { matrix.ncols() },
            });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateInput("non-finite matrix entry".into()));
        }
        let residual = form_residual(&ctx, &matrix);
        if residual > TAU_ISOM {
            return Err(Error::NotAnIsometry { residual });
        }
        Ok(Self { ctx, matrix })
    }

    /// For products of already validated isometries; round-off grows with
    /// the norm, so the absolute bound is not re-applied.
    pub(crate) fn trusted(ctx: FormContext, matrix: DMatrix<f64>) -> Self {
        Self { ctx, matrix }
    }

    pub fn identity(ctx: FormContext) -> Self {
        Self::trusted(ctx, DMatrix::identity(ctx.dim(), ctx.dim()))
    }

    pub fn ctx(&self) -> &FormContext {
        &self.ctx
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn residual(&self) -> f64 {
        form_residual(&self.ctx, &self.matrix)
    }

    /// Exact inverse `J M^T J`.
    pub fn inverse(&self) -> Self {
        let ctx = self.ctx;
        let m = DMatrix::from_fn(ctx.dim(), ctx.dim(), |i, j| {
            ctx.sign(i) * self.matrix[(j, i)] * ctx.sign(j)
        });
        Self::trusted(ctx, m)
    }

    pub fn compose(&self, other: &Isometry) -> Self {
        Self::trusted(self.ctx, &self.matrix * &other.matrix)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.ctx);
        for _ in 0..k {
            acc = acc.compose(self);
        }
        acc
    }

    pub fn conjugate_by(&self, h: &Isometry) -> Self {
        h.compose(self).compose(&h.inverse())
    }
}

pub fn make_isometry(ctx: &FormContext, matrix: DMatrix<f64>) -> Result<Isometry> {
    Isometry::new(*ctx, matrix)
}

/// Jordan projection `(lambda_1, lambda_2)` in the closed chamber `l1 >= l2 >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JordanPoint {
    pub l1: f64,
    pub l2: f64,
}

impl JordanPoint {
    /// Clamps round-off below zero back into the chamber.
    pub fn new(l1: f64, l2: f64) -> Self {
        let l1 = l1.max(0.0);
        Self { l1, l2: l2.clamp(0.0, l1) }
    }

    pub fn ratio(&self) -> f64 {
        if self.l1 > 0.0 {
            self.l2 / self.l1
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    /// `lambda_1 >= ... >= lambda_{n+2}`.
    pub log_moduli: Vec<f64>,
    pub gap: f64,
    pub proximal: bool,
    pub plus: Option<ProjPoint>,
    pub minus: Option<ProjPoint>,
}

impl SpectralData {
    pub fn jordan(&self) -> JordanPoint {
        JordanPoint::new(self.log_moduli[0], self.log_moduli[1])
    }

    /// Largest violation of `lambda_i + lambda_{N+1-i} = 0` and of the
    /// vanishing of `lambda_3 .. lambda_n`.
    pub fn symmetry_defect(&self) -> f64 {
        symmetry_defect(&self.log_moduli)
    }
}

pub fn symmetry_defect(lambda: &[f64]) -> f64 {
    let d = lambda.len();
    let mut worst = 0.0f64;
    for i in 0..d / 2 {
        worst = worst.max((lambda[i] + lambda[d - 1 - i]).abs());
    }
    for l in lambda.iter().take(d - 2).skip(2) {
        worst = worst.max(l.abs());
    }
    worst
}

/// Options for the attracting-point computation.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointOptions {
    /// Cross-validate the eigenvector against power iteration.
    pub cross_check: bool,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { cross_check: cfg!(debug_assertions) }
    }
}

pub(crate) fn sorted_log_moduli(m: &DMatrix<f64>, what: &str) -> Result<Vec<f64>> {
    let eigs = linalg::eigenvalues(m).ok_or_else(|| Error::NumericalFailure {
        what: format!("Schur decomposition ({what})"),
        condition: condition_estimate(m),
    })?;
    let mut logs: Vec<f64> = eigs.iter().map(|z| z.norm().ln()).collect();
    if logs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure {
            what: format!("log-moduli ({what})"),
            condition: condition_estimate(m),
        });
    }
    logs.sort_by(|a, b| b.total_cmp(a));
    Ok(logs)
}

/// For an isometry `||M^{-1}|| = ||M||`, so the 2-norm condition is `||M||^2`.
fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let n = m.norm();
    n * n
}

/// Sorted logarithms of the moduli of the eigenvalues.
///
/// For a proximal element the middle of the spectrum is read off the
/// restriction to the form-orthogonal complement of the attracting and
/// repelling lines, where it is no longer dwarfed by the top eigenvalue.
pub fn log_moduli(g: &Isometry) -> Result<Vec<f64>> {
    let d = g.ctx.dim();
    let fwd = forward_spectrum(&g.matrix)?;
    if fwd.logs[0] - fwd.logs[1] > EPS_GAP {
        if let Ok((middle, _)) = middle_log_moduli(g, fwd.mu) {
            let bwd = sorted_log_moduli(g.inverse().matrix(), "inverse")?;
            let mut out = Vec::with_capacity(d);
            out.push(fwd.logs[0]);
            out.extend(middle);
            out.push(-bwd[0]);
            out.sort_by(|a, b| b.total_cmp(a));
            return Ok(out);
        }
    }
    let bwd = sorted_log_moduli(g.inverse().matrix(), "inverse")?;
    let half = d / 2;
    let mut out = vec![0.0; d];
    for i in 0..half {
        out[i] = fwd.logs[i];
        out[d - 1 - i] = -bwd[i];
    }
    if d % 2 == 1 {
        out[half] = 0.5 * (fwd.logs[half] - bwd[half]);
    }
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

pub(crate) struct ForwardSpectrum {
    /// Log-moduli, descending.
    pub logs: Vec<f64>,
    /// Top eigenvalue with sign.
    pub mu: f64,
}

pub(crate) fn forward_spectrum(m: &DMatrix<f64>) -> Result<ForwardSpectrum> {
    let eigs = linalg::eigenvalues(m).ok_or_else(|| Error::NumericalFailure {
        what: "Schur decomposition (element)".into(),
        condition: condition_estimate(m),
    })?;
    let mut by_modulus: Vec<_> = eigs.iter().collect();
    by_modulus.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let logs: Vec<f64> = by_modulus.iter().map(|z| z.norm().ln()).collect();
    if logs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure { what: "log-moduli".into(), condition: condition_estimate(m) });
    }
    let top = by_modulus[0];
    Ok(ForwardSpectrum { logs, mu: if top.re >= 0.0 { top.norm() } else { -top.norm() } })
}

/// Log-moduli (descending) of `g` restricted to `{g_+, g_-}^perp`, and the
/// attracting direction `g_+`.
fn middle_log_moduli(g: &Isometry, mu: f64) -> Result<(Vec<f64>, DVector<f64>)> {
    let (plus, minus) = attracting_repelling(g.ctx, &g.matrix, mu)?;
    let inv = g.inverse();
    let logs = factored_middle_log_moduli(g.ctx, &[&g.matrix], &[&inv.matrix], &plus, &minus)?;
    Ok((logs, plus))
}

/// Attracting and repelling directions of a proximal `m` with top eigenvalue
/// `mu`. The repelling line is `J y` for a left top eigenvector `y`, since
/// `M^{-1} = J M^T J`.
pub(crate) fn attracting_repelling(
    ctx: FormContext,
    m: &DMatrix<f64>,
    mu: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let plus = eigenvector_for(m, mu)?;
    let mut minus = eigenvector_for(&m.transpose(), mu)?;
    for (i, x) in minus.iter_mut().enumerate() {
        *x *= ctx.sign(i);
    }
    Ok((plus, minus))
}

/// Middle log-moduli (descending) of the product `factors[0] ... factors[k-1]`
/// with attracting line `plus` and repelling line `minus`.
///
/// The two lines are carried around the cyclic shifts of the product, `plus`
/// through suffixes and `minus` through inverse prefixes, so both transports
/// contract. The spectrum is then read off the product of the blocks
/// `B_i^T G_i B_{i+1}`, where `B_i` spans the complement at shift `i`. Those
/// blocks have moderate size even when the full product does not.
pub(crate) fn factored_middle_log_moduli(
    ctx: FormContext,
    factors: &[&DMatrix<f64>],
    inverses: &[&DMatrix<f64>],
    plus: &DVector<f64>,
    minus: &DVector<f64>,
) -> Result<Vec<f64>> {
    let k = factors.len();
    let d = ctx.dim();
    let transverse_failure = || Error::NumericalFailure {
        what: "attracting and repelling lines are not transverse".into(),
        condition: f64::INFINITY,
    };
    // Column i holds the line at shift i.
    let mut pluses = DMatrix::zeros(d, k);
    let mut minuses = DMatrix::zeros(d, k);
    pluses.column_mut(0).copy_from(&plus.normalize());
    minuses.column_mut(0).copy_from(&minus.normalize());
    let mut tmp = DVector::zeros(d);
    for i in (1..k).rev() {
        tmp.gemv(1.0, factors[i], &pluses.column((i + 1) % k), 0.0);
        pluses.column_mut(i).copy_from(&tmp.normalize());
    }
    for i in 1..k {
        tmp.gemv(1.0, inverses[i - 1], &minuses.column(i - 1), 0.0);
        minuses.column_mut(i).copy_from(&tmp.normalize());
    }
    let m = d - 2;
    let mut bases = DMatrix::zeros(d, k * m);
    let (mut dp, mut dm) = (vec![0.0; d], vec![0.0; d]);
    for i in 0..k {
        for j in 0..d {
            dp[j] = ctx.sign(j) * pluses[(j, i)];
            dm[j] = ctx.sign(j) * minuses[(j, i)];
        }
        if !linalg::complement_of_pair(&dp, &dm, TAU_RANK, bases.columns_mut(i * m, m)) {
            return Err(transverse_failure());
        }
    }
    let mut product = DMatrix::identity(m, m);
    let (mut left, mut block, mut next) = (DMatrix::zeros(m, d), DMatrix::zeros(m, m), DMatrix::zeros(m, m));
    for (i, factor) in factors.iter().enumerate() {
        left.gemm_tr(1.0, &bases.columns(i * m, m), factor, 0.0);
        block.gemm(1.0, &left, &bases.columns(((i + 1) % k) * m, m), 0.0);
        next.gemm(1.0, &product, &block, 0.0);
        std::mem::swap(&mut product, &mut next);
    }
    sorted_log_moduli(&product, "restriction")
}

pub fn is_proximal(g: &Isometry, eps_gap: f64) -> Result<bool> {
    let l = log_moduli(g)?;
    Ok(l[0] - l[1] > eps_gap)
}

pub fn jordan_projection(g: &Isometry) -> Result<JordanPoint> {
    let l = log_moduli(g)?;
    Ok(JordanPoint::new(l[0], l[1]))
}

/// Top eigenvalue with sign, from the Schur form.
fn top_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    let eigs = linalg::eigenvalues(m).ok_or_else(|| Error::NumericalFailure {
        what: "Schur decomposition (top eigenvalue)".into(),
        condition: condition_estimate(m),
    })?;
    let top = eigs
        .iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("nonempty spectrum");
    Ok(if top.re >= 0.0 { top.norm() } else { -top.norm() })
}

/// The lift of `g` whose top eigenvalue is positive.
pub fn distinguished_lift(g: &Isometry) -> Result<Isometry> {
    if top_eigenvalue(&g.matrix)? >= 0.0 {
        Ok(g.clone())
    } else {
        Ok(Isometry::trusted(g.ctx, -g.matrix.clone()))
    }
}

/// Eigendirection of the dominant real eigenvalue, via the smallest right
/// singular vector of `M - mu I` (scaled to unit norm first).
fn top_eigenvector(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    eigenvector_for(m, top_eigenvalue(m)?)
}

pub(crate) fn eigenvector_for(m: &DMatrix<f64>, mu: f64) -> Result<DVector<f64>> {
    let scale = m.norm();
    let d = m.nrows();
    let shifted = m / scale - DMatrix::identity(d, d) * (mu / scale);
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let (imin, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    if *smin > 1e-6 {
        return Err(Error::NumericalFailure {
            what: "top eigenvector extraction".into(),
            condition: condition_estimate(m),
        });
    }
    Ok(v_t.row(imin).transpose())
}

/// One normalized step `x -> p x / |p x|`, the projective change it made and
/// the growth `|p x|`.
fn power_step(p: &DMatrix<f64>, x: &DVector<f64>) -> Option<(DVector<f64>, f64, f64)> {
    let nx = p * x;
    let nn = nx.norm();
    if !(nn > 0.0 && nn.is_finite()) {
        return None;
    }
    let nx = nx / nn;
    let change = (&nx - x * nx.dot(x)).norm();
    Some((nx, change, nn))
}

/// Projective limit of `M^k xi`, accelerated by repeated squaring: after `k`
/// rounds the iterate is `M^(2^k - 1) xi`.
///
/// High powers of a far from normal matrix carry much more round-off than `M`
/// itself, so the iterate is then refined with the stored powers in
/// decreasing order. It is accepted once one step of `M` moves it by less
/// than 1e-10, or by less than a small multiple of that step's own round-off
/// `eps |M| / |M x|`.
pub fn power_iteration_limit(m: &DMatrix<f64>, xi: &DVector<f64>) -> Result<DVector<f64>> {
    let failure = || Error::NumericalFailure {
        what: "power iteration did not settle".into(),
        condition: condition_estimate(m),
    };
    let mut powers = vec![m / m.norm()];
    let mut x = xi / xi.norm();
    let (mut best, mut stalls) = (f64::INFINITY, 0);
    for _ in 0..80 {
        let p = powers.last().expect("nonempty");
        let Some((nx, change, _)) = power_step(p, &x) else { break };
        x = nx;
        if change < 1e-14 {
            return Ok(x);
        }
        if change < 0.5 * best {
            (best, stalls) = (change, 0);
        } else {
            stalls += 1;
            if stalls >= 3 && best < 1e-4 {
                break;
            }
        }
        let sq = p * p;
        let sn = sq.norm();
        if !(sn > 0.0 && sn.is_finite()) {
            break;
        }
        powers.push(sq / sn);
    }
    for p in powers.iter().rev() {
        for _ in 0..20 {
            x = power_step(p, &x).ok_or_else(failure)?.0;
        }
    }
    let (x, residual, growth) = power_step(&powers[0], &x).ok_or_else(failure)?;
    if residual < 1e-10_f64.max(100.0 * f64::EPSILON / growth) {
        Ok(x)
    } else {
        Err(failure())
    }
}

fn random_boundary_point(ctx: &FormContext, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let n = ctx.n();
    loop {
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if un < 1e-3 {
            continue;
        }
        let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut v = DVector::zeros(n + 2);
        for i in 0..n {
            v[i] = u[i] / un;
        }
        v[n] = t.cos();
        v[n + 1] = t.sin();
        return v;
    }
}

/// Attracting fixed point via power iteration from random boundary points
/// transverse to the repelling point.
pub fn attracting_point_by_iteration(g: &Isometry) -> Result<ProjPoint> {
    let ctx = g.ctx;
    let minus = top_eigenvector(g.inverse().matrix())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x00AD_5EED);
    for _ in 0..32 {
        let xi = random_boundary_point(&ctx, &mut rng);
        let pairing = ctx.dot_unchecked(xi.as_slice(), minus.as_slice()) / xi.norm();
        if pairing.abs() < 1e-3 {
            continue;
        }
        let x = power_iteration_limit(&g.matrix, &xi)?;
        return ProjPoint::from_vector(&x);
    }
    Err(Error::NumericalFailure {
        what: "no transverse starting point found".into(),
        condition: condition_estimate(&g.matrix),
    })
}

fn require_proximal(g: &Isometry, eps_gap: f64) -> Result<Vec<f64>> {
    let l = log_moduli(g)?;
    if l[0] - l[1] <= eps_gap {
        return Err(Error::ContractViolation(format!(
            "element is not proximal (gap {:.3e})",
            l[0] - l[1]
        )));
    }
    Ok(l)
}

/// Attracting fixed point `gamma_+` of a proximal element.
pub fn attracting_point(g: &Isometry) -> Result<ProjPoint> {
    attracting_point_with(g, FixedPointOptions::default())
}

pub fn attracting_point_with(g: &Isometry, opts: FixedPointOptions) -> Result<ProjPoint> {
    require_proximal(g, EPS_GAP)?;
    attracting_point_unchecked(g, opts)
}

pub(crate) fn attracting_point_unchecked(g: &Isometry, opts: FixedPointOptions) -> Result<ProjPoint> {
    let p = ProjPoint::from_vector(&top_eigenvector(&g.matrix)?)?;
    if opts.cross_check {
        let q = attracting_point_by_iteration(g)?;
        let angle = p.angle_to(&q);
        if angle > TAU_FIXED {
            return Err(Error::NumericalFailure {
                what: format!("eigenvector and power iteration disagree by {angle:.3e}"),
                condition: condition_estimate(&g.matrix),
            });
        }
    }
    Ok(p)
}

/// Repelling fixed point `gamma_- = (gamma^{-1})_+`.
pub fn repelling_point(g: &Isometry) -> Result<ProjPoint> {
    attracting_point(&g.inverse())
}

pub fn spectral_data(g: &Isometry, eps_gap: f64) -> Result<SpectralData> {
    spectral_data_with(g, eps_gap, FixedPointOptions::default())
}

pub fn spectral_data_with(g: &Isometry, eps_gap: f64, opts: FixedPointOptions) -> Result<SpectralData> {
    let log_moduli = log_moduli(g)?;
    let gap = log_moduli[0] - log_moduli[1];
    let proximal = gap > eps_gap;
    let (plus, minus) = if proximal {
        (
            Some(attracting_point_unchecked(g, opts)?),
            Some(attracting_point_unchecked(&g.inverse(), opts)?),
        )
    } else {
        (None, None)
    };
    Ok(SpectralData { log_moduli, gap, proximal, plus, minus })
}

/// `|lambda_2| <= tau * max(1, lambda_1)`: the element is conjugate into O(n,1).
pub fn o_n1_conjugacy_test(g: &Isometry, tau: f64) -> Result<bool> {
    let l = require_proximal(g, EPS_GAP)?;
    Ok(l[1].abs() <= tau * l[0].max(1.0))
}

/// A fixed point of `g` inside AdS: a real eigendirection of modulus one on
/// which the form is negative.
pub fn fixed_point_in_ads(g: &Isometry) -> Result<Option<ProjPoint>> {
    let ctx = g.ctx;
    let d = ctx.dim();
    let eigs = linalg::eigenvalues(&g.matrix).ok_or_else(|| Error::NumericalFailure {
        what: "Schur decomposition (fixed point search)".into(),
        condition: condition_estimate(&g.matrix),
    })?;
    let mut signs: Vec<f64> = Vec::new();
    for z in &eigs {
        if z.norm().ln().abs() > TAU_SPEC || z.im.abs() > 1e-6 {
            continue;
        }
        let s = if z.re >= 0.0 { 1.0 } else { -1.0 };
        if !signs.contains(&s) {
            signs.push(s);
        }
    }
    for s in signs {
        let shifted = &g.matrix - DMatrix::identity(d, d) * s;
        let basis = linalg::null_space(&shifted, 1e-9);
        if basis.is_empty() {
            continue;
        }
        let k = basis.len();
        let gram = DMatrix::from_fn(k, k, |i, j| {
            ctx.dot_unchecked(basis[i].as_slice(), basis[j].as_slice())
        });
        let eig = gram.symmetric_eigen();
        let (imin, emin) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        if *emin < -TAU_ISO {
            let c = eig.eigenvectors.column(imin);
            let mut v = DVector::zeros(d);
            for (i, b) in basis.iter().enumerate() {
                v.axpy(c[i], b, 1.0);
            }
            return Ok(Some(ProjPoint::from_vector(&v)?));
        }
    }
    Ok(None)
}

/// Hyperbolic rotation of rapidity `t` in the coordinate plane `(i, j)`,
/// `i` positive and `j` negative.
pub fn boost(ctx: &FormContext, i: usize, j: usize, t: f64) -> Isometry {
    let mut m = DMatrix::identity(ctx.dim(), ctx.dim());
    m[(i, i)] = t.cosh();
    m[(j, j)] = t.cosh();
    m[(i, j)] = t.sinh();
    m[(j, i)] = t.sinh();
    Isometry::trusted(*ctx, m)
}

/// Euclidean rotation by `angle` in the coordinate plane `(i, j)` of equal sign.
pub fn rotation(ctx: &FormContext, i: usize, j: usize, angle: f64) -> Isometry {
    let mut m = DMatrix::identity(ctx.dim(), ctx.dim());
    m[(i, i)] = angle.cos();
    m[(j, j)] = angle.cos();
    m[(i, j)] = -angle.sin();
    m[(j, i)] = angle.sin();
    Isometry::trusted(*ctx, m)
}
