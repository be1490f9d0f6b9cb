//! Einstein-universe coordinates on the boundary and the harvested proximal
//! limit set.
//!
//! A boundary line spanned by `(x, y)` with `x` in R^n and `y` in R^2 has
//! `|x| = |y|`, so it is the class of `(u, cos t, sin t)` with `u` a unit
//! vector. The pair `(u, t)` is defined up to `(-u, t + pi)`; we keep the
//! representative with `t` in `[0, pi)`.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Serialize;

use crate::element::JordanPoint;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::form::{classify_point, FormContext, PointClass, ProjPoint};
use crate::presentation::Presentation;
use crate::tol::{CANON_ZERO, DEDUP_RADIUS, EPS_GAP, TAU_SOURCE_FIXED};
use crate::words::{sweep_words, SweepOptions, Word, SWEEP_LIMIT};

/// Angle between unit vectors, accurate near 0 and pi.
pub fn sphere_distance(a: &[f64], b: &[f64]) -> f64 {
    let (mut diff, mut sum) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        diff += (x - y) * (x - y);
        sum += (x + y) * (x + y);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// Product-metric distance between `(u_a, t_a)` and `(u_b, t_b)`, minimized
/// over the two lifts of the second point. Angles are taken in `[0, pi)`.
fn lifted_distance(ua: &[f64], ta: f64, ub: &[f64], tb: f64) -> f64 {
    let du = sphere_distance(ua, ub);
    let dt = (ta - tb).abs();
    let direct = du.hypot(dt);
    let flipped = (PI - du).hypot(PI - dt);
    direct.min(flipped)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EinPoint {
    pub u: Vec<f64>,
    pub theta: f64,
}

impl EinPoint {
    /// Normalizes `u` and brings `theta` into `[0, pi)`.
    pub fn new(u: Vec<f64>, theta: f64) -> Result<Self> {
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > CANON_ZERO) || !theta.is_finite() {
            return Err(Error::DegenerateInput("sphere component vanishes".into()));
        }
        let mut u: Vec<f64> = u.iter().map(|x| x / norm).collect();
        let mut t = theta.rem_euclid(TAU);
        if t >= PI {
            t -= PI;
            u.iter_mut().for_each(|x| *x = -*x);
        }
        if PI - t <= CANON_ZERO {
            t = 0.0;
            u.iter_mut().for_each(|x| *x = -*x);
        }
        Ok(Self { u, theta: t })
    }

    /// From any nonzero vector on an isotropic line; no isotropy check.
    pub fn from_isotropic(ctx: &FormContext, v: &[f64]) -> Result<Self> {
        ctx.check_len(v.len())?;
        let n = ctx.n();
        let (x, y) = v.split_at(n);
        let ynorm = y[0].hypot(y[1]);
        let xnorm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if ynorm < CANON_ZERO || xnorm < CANON_ZERO {
            return Err(Error::DegenerateInput(format!(
                "boundary split has norms {xnorm:.3e} and {ynorm:.3e}"
            )));
        }
        let (c, mut s) = (y[0] / ynorm, y[1] / ynorm);
        if s.abs() <= CANON_ZERO {
            s = 0.0;
        }
        Self::new(x.to_vec(), s.atan2(c))
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    /// `(u, cos theta, sin theta)`, an isotropic vector of norm `sqrt 2`.
    pub fn ambient(&self) -> Vec<f64> {
        let mut v = self.u.clone();
        v.push(self.theta.cos());
        v.push(self.theta.sin());
        v
    }

    /// Angle of `u` in `[0, 2 pi)`; meaningful for `n = 2`.
    pub fn u_angle(&self) -> f64 {
        self.u[1].atan2(self.u[0]).rem_euclid(TAU)
    }

    pub fn distance(&self, other: &EinPoint) -> f64 {
        lifted_distance(&self.u, self.theta, &other.u, other.theta)
    }
}

/// Einstein-universe coordinates of a boundary point.
pub fn to_ein_coords(ctx: &FormContext, x: &ProjPoint) -> Result<EinPoint> {
    match classify_point(ctx, x)? {
        PointClass::Boundary => EinPoint::from_isotropic(ctx, x.coords()),
        other => Err(Error::ContractViolation(format!("expected a boundary point, got {other:?}"))),
    }
}

/// Spatial hash over `(u, theta)` with cells of side `radius`.
struct PointGrid {
    radius: f64,
    cells: HashMap<u64, Vec<u32>>,
}

fn mix(h: u64, x: i64) -> u64 {
    (h ^ (x as u64)).wrapping_mul(0x100_0000_01b3).rotate_left(29) ^ 0x9e37_79b9_7f4a_7c15
}

impl PointGrid {
    fn new(radius: f64) -> Self {
        Self { radius, cells: HashMap::new() }
    }

    fn coords(&self, u: &[f64], t: f64) -> Vec<i64> {
        u.iter().chain(std::iter::once(&t)).map(|x| (x / self.radius).floor() as i64).collect()
    }

    fn key(cell: &[i64]) -> u64 {
        cell.iter().fold(0xcbf2_9ce4_8422_2325, |h, &x| mix(h, x))
    }

    fn insert(&mut self, u: &[f64], t: f64, idx: u32) {
        let key = Self::key(&self.coords(u, t));
        self.cells.entry(key).or_default().push(idx);
    }

    /// Calls `f` on every stored index in the 3^(n+1) cells around `(u, t)`.
    fn for_neighbours(&self, u: &[f64], t: f64, mut f: impl FnMut(u32) -> bool) -> bool {
        let base = self.coords(u, t);
        let dims = base.len();
        let mut offset = vec![-1i64; dims];
        let mut cell = vec![0i64; dims];
        loop {
            for i in 0..dims {
                cell[i] = base[i] + offset[i];
            }
            if let Some(list) = self.cells.get(&Self::key(&cell)) {
                for &idx in list {
                    if f(idx) {
                        return true;
                    }
                }
            }
            let mut i = 0;
            while i < dims {
                offset[i] += 1;
                if offset[i] <= 1 {
                    break;
                }
                offset[i] = -1;
                i += 1;
            }
            if i == dims {
                return false;
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HarvestOptions {
    pub max_len: usize,
    pub eps_gap: f64,
    pub dedup_radius: f64,
    pub exec: Exec,
    pub limit: u128,
}

impl HarvestOptions {
    pub fn new(max_len: usize) -> Self {
        Self { max_len, eps_gap: EPS_GAP, dedup_radius: DEDUP_RADIUS, exec: Exec::default(), limit: SWEEP_LIMIT }
    }

    pub fn with_gap(mut self, eps_gap: f64) -> Self {
        self.eps_gap = eps_gap;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct HarvestStats {
    /// Distinct group elements visited.
    pub elements: usize,
    pub proximal: usize,
    /// Words with gap at most `eps_gap`, skipped.
    pub non_proximal: usize,
    /// Proximal words whose fixed point failed a numerical check.
    pub failures: usize,
    /// Points dropped by the dedup radius.
    pub duplicates: usize,
}

/// Harvested boundary points with the words that produced them. Storage is
/// flat: point `i` has sphere part `u[i*n..(i+1)*n]`.
#[derive(Debug, Clone)]
pub struct LimitSample {
    n: usize,
    u: Vec<f64>,
    theta: Vec<f64>,
    sources: Vec<Word>,
    jordan: Vec<JordanPoint>,
    dedup_radius: f64,
    pub stats: HarvestStats,
}

impl LimitSample {
    pub fn empty(n: usize, dedup_radius: f64) -> Self {
        Self {
            n,
            u: Vec::new(),
            theta: Vec::new(),
            sources: Vec::new(),
            jordan: Vec::new(),
            dedup_radius,
            stats: HarvestStats::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn dedup_radius(&self) -> f64 {
        self.dedup_radius
    }

    pub fn u(&self, i: usize) -> &[f64] {
        &self.u[i * self.n..(i + 1) * self.n]
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.theta[i]
    }

    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    pub fn point(&self, i: usize) -> EinPoint {
        EinPoint { u: self.u(i).to_vec(), theta: self.theta[i] }
    }

    pub fn points(&self) -> impl Iterator<Item = EinPoint> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    pub fn sources(&self) -> &[Word] {
        &self.sources
    }

    pub fn jordan(&self) -> &[JordanPoint] {
        &self.jordan
    }

    /// Largest distance of any theta from 0 in the circle of length pi.
    pub fn theta_spread_from_zero(&self) -> f64 {
        self.theta.iter().map(|t| t.min(PI - t)).fold(0.0, f64::max)
    }

    /// Largest pairwise circular distance between theta values, read mod pi.
    pub fn theta_spread(&self) -> f64 {
        if self.len() < 2 {
            return 0.0;
        }
        let mut t = self.theta.clone();
        t.sort_by(f64::total_cmp);
        let mut gap = PI - (t[t.len() - 1] - t[0]);
        for w in t.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        PI - gap
    }

    /// Builds a sample from explicit points, deduplicating in order.
    pub fn from_points(
        n: usize,
        points: impl IntoIterator<Item = (EinPoint, Word, JordanPoint)>,
        dedup_radius: f64,
    ) -> Result<Self> {
        let mut sample = Self::empty(n, dedup_radius);
        let mut grid = PointGrid::new(dedup_radius.max(f64::MIN_POSITIVE));
        for (p, w, j) in points {
            if p.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.n() });
            }
            if !sample.push_unique(&mut grid, p, w, j) {
                sample.stats.duplicates += 1;
            }
        }
        Ok(sample)
    }

    fn push_unique(&mut self, grid: &mut PointGrid, p: EinPoint, w: Word, j: JordanPoint) -> bool {
        let r = self.dedup_radius;
        let (u, t) = (&p.u, p.theta);
        let mut queries = vec![(u.clone(), t)];
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        if t < r {
            queries.push((neg.clone(), t + PI));
        }
        if t > PI - r {
            queries.push((neg, t - PI));
        }
        for (qu, qt) in &queries {
            let hit = grid.for_neighbours(qu, *qt, |idx| {
                let i = idx as usize;
                lifted_distance(u, t, self.u(i), self.theta[i]) <= r
            });
            if hit {
                return false;
            }
        }
        let idx = self.len() as u32;
        grid.insert(u, t, idx);
        self.u.extend_from_slice(u);
        self.theta.push(t);
        self.sources.push(w);
        self.jordan.push(j);
        true
    }
}

enum Outcome {
    Point(EinPoint, Word, JordanPoint),
    Failed,
}

/// Attracting fixed points of every proximal word of length at most `max_len`.
pub fn harvest_limit_points(pres: &Presentation, max_len: usize, eps_gap: f64) -> Result<LimitSample> {
    harvest_limit_points_with(pres, &HarvestOptions::new(max_len).with_gap(eps_gap))
}

pub fn harvest_limit_points_with(pres: &Presentation, opts: &HarvestOptions) -> Result<LimitSample> {
    let ctx = *pres.ctx();
    let non_proximal = AtomicUsize::new(0);
    let visited = AtomicUsize::new(0);
    let sweep = SweepOptions { max_len: opts.max_len, exec: opts.exec, limit: opts.limit };
    let outcomes = sweep_words(pres, &sweep, |g| {
        visited.fetch_add(1, Ordering::Relaxed);
        let (jordan, vector) = match g.leading_spectrum(pres, opts.eps_gap) {
            Ok(r) => r,
            Err(_) => return Some(Outcome::Failed),
        };
        let Some(v) = vector else {
            non_proximal.fetch_add(1, Ordering::Relaxed);
            return None;
        };
        let Ok(x) = ProjPoint::from_vector(&v) else {
            return Some(Outcome::Failed);
        };
        let moved = g.element.matrix() * x.rep();
        match ProjPoint::from_vector(&moved) {
            Ok(y) if y.angle_to(&x) <= TAU_SOURCE_FIXED => {}
            _ => return Some(Outcome::Failed),
        }
        match to_ein_coords(&ctx, &x) {
            Ok(p) => Some(Outcome::Point(p, g.word, jordan)),
            Err(_) => Some(Outcome::Failed),
        }
    })?;
    let mut failures = 0;
    let points = outcomes.into_iter().filter_map(|o| match o {
        Outcome::Point(p, w, j) => Some((p, w, j)),
        Outcome::Failed => {
            failures += 1;
            None
        }
    });
    let mut sample = LimitSample::from_points(ctx.n(), points, opts.dedup_radius)?;
    let non_proximal = non_proximal.into_inner();
    let elements = visited.into_inner();
    sample.stats = HarvestStats {
        elements,
        proximal: elements - non_proximal,
        non_proximal,
        failures,
        duplicates: sample.stats.duplicates,
    };
    Ok(sample)
}

/// Writes the point cloud as CSV: `u1,...,un,theta,word,lambda1,lambda2`.
pub fn write_csv<W: Write>(mut out: W, sample: &LimitSample, labels: &[String]) -> Result<()> {
    let n = sample.n();
    let mut header: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
    header.extend(["theta", "word", "lambda1", "lambda2"].map(String::from));
    writeln!(out, "{}", header.join(","))?;
    for i in 0..sample.len() {
        let mut row: Vec<String> = sample.u(i).iter().map(|x| format!("{x:.16e}")).collect();
        row.push(format!("{:.16e}", sample.theta(i)));
        row.push(sample.sources()[i].render(labels));
        let j = sample.jordan()[i];
        row.push(format!("{:.16e}", j.l1));
        row.push(format!("{:.16e}", j.l2));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Nearest-neighbour queries against a sample in the lifted product metric.
pub struct NearestIndex<'a> {
    sample: &'a LimitSample,
    /// For `n = 2`: `(phi, index, flipped)` over both lifts, sorted by `phi`.
    sorted: Option<Vec<(f64, u32, bool)>>,
}

impl<'a> NearestIndex<'a> {
    pub fn new(sample: &'a LimitSample) -> Self {
        let sorted = (sample.n() == 2).then(|| {
            let mut v: Vec<(f64, u32, bool)> = Vec::with_capacity(2 * sample.len());
            for i in 0..sample.len() {
                let u = sample.u(i);
                let phi = u[1].atan2(u[0]).rem_euclid(TAU);
                v.push((phi, i as u32, false));
                v.push(((phi + PI).rem_euclid(TAU), i as u32, true));
            }
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        });
        Self { sample, sorted }
    }

    pub fn nearest_distance(&self, p: &EinPoint) -> f64 {
        let s = self.sample;
        let Some(sorted) = &self.sorted else {
            return (0..s.len()).map(|i| lifted_distance(&p.u, p.theta, s.u(i), s.theta(i))).fold(f64::INFINITY, f64::min);
        };
        if sorted.is_empty() {
            return f64::INFINITY;
        }
        let phi = p.u_angle();
        let m = sorted.len();
        let start = sorted.partition_point(|e| e.0 < phi);
        let mut best = f64::INFINITY;
        let dist = |k: usize| {
            let (q, i, flipped) = sorted[k % m];
            let dphi = (q - phi).abs();
            let dphi = dphi.min(TAU - dphi);
            let dt = (p.theta - s.theta(i as usize)).abs();
            let dt = if flipped { PI - dt } else { dt };
            (dphi, dphi.hypot(dt))
        };
        for step in 0..m {
            let (dphi, d) = dist(start + step);
            best = best.min(d);
            if dphi > best {
                break;
            }
        }
        for step in 1..=m {
            let (dphi, d) = dist(start + m - step);
            best = best.min(d);
            if dphi > best {
                break;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorDrift {
    pub label: String,
    pub median: f64,
    pub max: f64,
}

/// How far the sample is from being invariant under the generators.
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub queries_per_generator: usize,
    pub per_generator: Vec<GeneratorDrift>,
    pub median: f64,
    pub max: f64,
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Applies each generator to (a stride subsample of) the harvested points and
/// measures the distance from each image to the sample.
pub fn invariance_monitor(
    pres: &Presentation,
    sample: &LimitSample,
    max_queries: usize,
    exec: Exec,
) -> Result<InvarianceReport> {
    if sample.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let ctx = *pres.ctx();
    let index = NearestIndex::new(sample);
    let stride = sample.len().div_ceil(max_queries.max(1));
    let picks: Vec<usize> = (0..sample.len()).step_by(stride).collect();
    let mut all = Vec::new();
    let mut per_generator = Vec::new();
    for g in pres.generators() {
        let mut d: Vec<f64> = exec.map(&picks, |&i| {
            let v = g.element.matrix() * nalgebra::DVector::from_vec(sample.point(i).ambient());
            match EinPoint::from_isotropic(&ctx, v.as_slice()) {
                Ok(q) => index.nearest_distance(&q),
                Err(_) => f64::INFINITY,
            }
        });
        let max = d.iter().copied().fold(0.0, f64::max);
        all.extend_from_slice(&d);
        per_generator.push(GeneratorDrift { label: g.label.clone(), median: median(&mut d), max });
    }
    let max = all.iter().copied().fold(0.0, f64::max);
    Ok(InvarianceReport { queries_per_generator: picks.len(), per_generator, median: median(&mut all), max })
}
