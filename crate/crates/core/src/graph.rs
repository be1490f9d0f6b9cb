//! The limit set as the graph of a map from the sphere to the circle:
//! extraction, the Lipschitz check, fixed points along spacelike geodesics
//! and difference-quotient statistics.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::limit_set::{sphere_distance, LimitSample};
use crate::tol::{DELTA_SEP, TAU_LIP, TAU_SLOPE};

/// Signed representative of `x` in `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Distance on the circle of length `2 pi`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Samples `(u_i, theta_i)` of a map `S^{n-1} -> S^1`. For `n = 2` the
/// samples are sorted by the angle of `u`.
#[derive(Debug, Clone)]
pub struct GraphFunction {
    n: usize,
    u: Vec<f64>,
    theta: Vec<f64>,
    phi: Vec<f64>,
}

impl GraphFunction {
    /// Picks one lift per sample point so that the lifted points form a single
    /// graph component: all lifted angles `theta` and `theta + pi` are placed
    /// on the circle, the circle is cut in the middle of its largest gap, and
    /// each point keeps the lift whose angle lands in the first half-turn
    /// after the cut. Of the two possible components the one keeping more
    /// points in their stored orientation wins.
    pub fn from_sample(sample: &LimitSample) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::InsufficientData("empty sample".into()));
        }
        let mut lifted: Vec<f64> = sample.thetas().iter().flat_map(|&t| [t, t + PI]).collect();
        lifted.sort_by(f64::total_cmp);
        let mut cut = lifted[lifted.len() - 1];
        let mut widest = lifted[0] + TAU - cut;
        for w in lifted.windows(2) {
            if w[1] - w[0] > widest {
                widest = w[1] - w[0];
                cut = w[0];
            }
        }
        let start = cut + widest / 2.0;
        let pick = |start: f64| -> Vec<bool> {
            sample.thetas().iter().map(|&t| (t - start).rem_euclid(TAU) < PI).collect()
        };
        let mut keep = pick(start);
        let kept = keep.iter().filter(|&&k| k).count();
        let mut window = start;
        if 2 * kept < keep.len() || (2 * kept == keep.len() && wrap_angle(start + PI / 2.0).abs() > PI / 2.0) {
            window = start + PI;
            keep = pick(window);
        }
        let centre = wrap_angle(window + PI / 2.0);
        let mut points = Vec::with_capacity(sample.len());
        for (i, &kept) in keep.iter().enumerate() {
            let t = sample.theta(i);
            let (u, t): (Vec<f64>, f64) =
                if kept { (sample.u(i).to_vec(), t) } else { (sample.u(i).iter().map(|x| -x).collect(), t + PI) };
            points.push((u, centre + wrap_angle(t - centre)));
        }
        Self::from_lifted(sample.n(), points)
    }

    /// From explicit lifted samples; `u` is normalized.
    pub fn from_lifted(n: usize, points: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InsufficientData("no samples".into()));
        }
        let mut rows: Vec<(f64, Vec<f64>, f64)> = Vec::with_capacity(points.len());
        for (u, t) in points {
            if u.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: u.len() });
            }
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0) || !t.is_finite() {
                return Err(Error::DegenerateInput("zero or non-finite sample".into()));
            }
            let u: Vec<f64> = u.iter().map(|x| x / norm).collect();
            let phi = if n == 2 { u[1].atan2(u[0]).rem_euclid(TAU) } else { 0.0 };
            rows.push((phi, u, t));
        }
        if n == 2 {
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        let phi = if n == 2 { rows.iter().map(|r| r.0).collect() } else { Vec::new() };
        Ok(Self {
            n,
            u: rows.iter().flat_map(|r| r.1.iter().copied()).collect(),
            theta: rows.iter().map(|r| r.2).collect(),
            phi,
        })
    }

    /// `n = 2` samples given as `(angle of u, theta)` pairs.
    pub fn from_angles(points: &[(f64, f64)]) -> Result<Self> {
        Self::from_lifted(2, points.iter().map(|&(p, t)| (vec![p.cos(), p.sin()], t)).collect())
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

    pub fn u(&self, i: usize) -> &[f64] {
        &self.u[i * self.n..(i + 1) * self.n]
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.theta[i]
    }

    /// Sorted angles of the samples (`n = 2` only, else empty).
    pub fn phis(&self) -> &[f64] {
        &self.phi
    }

    /// Largest circular gap between consecutive sample angles (`n = 2`).
    pub fn max_gap(&self) -> f64 {
        let p = &self.phi;
        if p.is_empty() {
            return TAU;
        }
        let mut gap = p[0] + TAU - p[p.len() - 1];
        for w in p.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        gap
    }

    /// `f(u)`: linear interpolation in the angle for `n = 2`, nearest sample
    /// otherwise.
    pub fn eval(&self, u: &[f64]) -> f64 {
        if self.n == 2 {
            return self.eval_angle(u[1].atan2(u[0]));
        }
        let mut best = (f64::INFINITY, 0);
        for i in 0..self.len() {
            let d = sphere_distance(u, self.u(i));
            if d < best.0 {
                best = (d, i);
            }
        }
        self.theta[best.1]
    }

    /// `f` at the point of angle `x` (`n = 2`).
    pub fn eval_angle(&self, x: f64) -> f64 {
        let m = self.len();
        let x = x.rem_euclid(TAU);
        if m == 1 {
            return self.theta[0];
        }
        let k = self.phi.partition_point(|&p| p < x);
        let (a, b) = ((k + m - 1) % m, k % m);
        let span = (self.phi[b] - self.phi[a]).rem_euclid(TAU);
        let t = if span > 0.0 { (x - self.phi[a]).rem_euclid(TAU) / span } else { 0.0 };
        self.theta[a] + t * wrap_angle(self.theta[b] - self.theta[a])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMethod {
    /// Every pair was examined.
    Exhaustive,
    /// Only pairs within a window were examined; exact for `max_ratio`, and
    /// for the violation count whenever `max_ratio <= 1`.
    Windowed,
    /// Windowed, with violations present but too many pairs to count them
    /// all: the count is a lower bound.
    WindowedLowerBound,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceReport {
    pub violations: u64,
    pub max_ratio: f64,
    pub pairs_examined: u64,
    pub delta_sep: f64,
    /// `max_ratio` within `1e-6` of 1: the map is nearly isometric somewhere.
    pub boundary_case: bool,
    pub method: CheckMethod,
}

#[derive(Default, Clone, Copy)]
struct PairTally {
    violations: u64,
    max_ratio: f64,
    pairs: u64,
}

impl PairTally {
    fn merge(self, o: PairTally) -> PairTally {
        PairTally {
            violations: self.violations + o.violations,
            max_ratio: self.max_ratio.max(o.max_ratio),
            pairs: self.pairs + o.pairs,
        }
    }

    fn add(&mut self, du: f64, dt: f64) {
        self.pairs += 1;
        if dt > du + TAU_LIP {
            self.violations += 1;
        }
        self.max_ratio = self.max_ratio.max(dt / du);
    }
}

/// Exhaustive checks beyond this many pairs are refused.
const EXHAUSTIVE_PAIR_LIMIT: u64 = 20_000_000_000;

pub fn check_distance_decreasing(gf: &GraphFunction) -> DistanceReport {
    check_distance_decreasing_with(gf, DELTA_SEP, Exec::default())
}

/// For every pair of samples more than `delta_sep` apart on the sphere,
/// `d(f(u_i), f(u_j)) <= d(u_i, u_j) + TAU_LIP`, reporting the largest ratio.
///
/// For `n = 2` with a dense sample only pairs closer than
/// `W = 2 delta_sep + 2 g` are compared, `g` being the largest gap. Any
/// farther pair is joined by a chain of samples along the shorter arc whose
/// steps all lie in `(delta_sep, W]`; the theta distance of the pair is at
/// most the sum over the steps, so its ratio is at most the largest step
/// ratio. The windowed maximum is therefore the global one.
pub fn check_distance_decreasing_with(gf: &GraphFunction, delta_sep: f64, exec: Exec) -> DistanceReport {
    let m = gf.len();
    let total_pairs = (m as u64) * (m.saturating_sub(1) as u64) / 2;
    let report = |t: PairTally, method| DistanceReport {
        violations: t.violations,
        max_ratio: t.max_ratio,
        pairs_examined: t.pairs,
        delta_sep,
        boundary_case: (t.max_ratio - 1.0).abs() <= 1e-6,
        method,
    };
    let exhaustive = || {
        let tallies = exec.map_range(m, |i| {
            let mut t = PairTally::default();
            for j in i + 1..m {
                let du = sphere_distance(gf.u(i), gf.u(j));
                if du > delta_sep {
                    t.add(du, circle_distance(gf.theta[i], gf.theta[j]));
                }
            }
            t
        });
        tallies.into_iter().fold(PairTally::default(), PairTally::merge)
    };
    if gf.n != 2 || m < 3 {
        return report(exhaustive(), CheckMethod::Exhaustive);
    }
    let window = 2.0 * delta_sep + 2.0 * gf.max_gap();
    if window >= PI {
        return report(exhaustive(), CheckMethod::Exhaustive);
    }
    let phi = &gf.phi;
    let tallies = exec.map_range(m, |i| {
        let mut t = PairTally::default();
        for step in 1..m {
            let j = (i + step) % m;
            let du = (phi[j] - phi[i]).rem_euclid(TAU);
            if du > window {
                break;
            }
            if du > delta_sep {
                t.add(du, circle_distance(gf.theta[i], gf.theta[j]));
            }
        }
        t
    });
    let windowed = tallies.into_iter().fold(PairTally::default(), PairTally::merge);
    if windowed.max_ratio <= 1.0 {
        report(windowed, CheckMethod::Windowed)
    } else if total_pairs <= EXHAUSTIVE_PAIR_LIMIT {
        report(exhaustive(), CheckMethod::Exhaustive)
    } else {
        report(windowed, CheckMethod::WindowedLowerBound)
    }
}

/// A unit-speed great circle `t -> cos t * point + sin t * direction`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Geodesic {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
}

impl Geodesic {
    /// Normalizes `point` and makes `direction` a unit vector orthogonal to it.
    pub fn new(point: Vec<f64>, direction: Vec<f64>) -> Result<Self> {
        if point.len() != direction.len() {
            return Err(Error::DimensionMismatch { expected: point.len(), found: direction.len() });
        }
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let np = norm(&point);
        if !(np > 1e-12) {
            return Err(Error::DegenerateInput("geodesic base point is zero".into()));
        }
        let p: Vec<f64> = point.iter().map(|x| x / np).collect();
        let dot: f64 = p.iter().zip(&direction).map(|(a, b)| a * b).sum();
        let d: Vec<f64> = direction.iter().zip(&p).map(|(x, a)| x - dot * a).collect();
        let nd = norm(&d);
        if !(nd > 1e-12) {
            return Err(Error::DegenerateInput("geodesic direction is parallel to its base point".into()));
        }
        Ok(Self { point: p, direction: d.iter().map(|x| x / nd).collect() })
    }

    /// `(cos t, sin t, 0, ...)`.
    pub fn standard(n: usize) -> Result<Self> {
        let mut p = vec![0.0; n];
        let mut d = vec![0.0; n];
        p[0] = 1.0;
        d[1] = 1.0;
        Self::new(p, d)
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        let (s, c) = t.sin_cos();
        self.point.iter().zip(&self.direction).map(|(p, d)| c * p + s * d).collect()
    }
}

/// `count` geodesics with base point and direction drawn uniformly from the
/// sphere, reproducible from `seed`.
pub fn random_geodesics(n: usize, count: usize, seed: u64) -> Result<Vec<Geodesic>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = || loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-2 && r2 <= 1.0 {
            return v;
        }
    };
    (0..count)
        .map(|_| {
            let p = unit();
            let d = unit();
            Geodesic::new(p, d)
        })
        .collect()
}

pub const GEODESIC_SEEDS: usize = 16;
pub const GEODESIC_MAX_STEPS: usize = 10_000;
pub const GEODESIC_STEP_TOL: f64 = 1e-10;
pub const GEODESIC_AGREEMENT: f64 = 1e-6;
pub const GEODESIC_MAX_GAP: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct GeodesicSolution {
    /// Parameter `t*` in `[0, 2 pi)` with `f(c(t*)) = t*`.
    pub theta: f64,
    pub seed_limits: Vec<f64>,
    /// Largest circular distance between seed limits.
    pub spread: f64,
    pub max_steps: usize,
    /// Every seed met the step tolerance before the step cap.
    pub converged: bool,
}

/// Largest distance from a point of `c` to the nearest sample.
fn gap_along(gf: &GraphFunction, c: &Geodesic) -> f64 {
    if gf.n == 2 {
        return gf.max_gap();
    }
    (0..720)
        .map(|k| {
            let x = c.at(TAU * k as f64 / 720.0);
            (0..gf.len()).map(|i| sphere_distance(&x, gf.u(i))).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// The point where the lightlike curve `(c(t), t)` meets the graph, found by
/// iterating `t <- f(c(t))` from equispaced seeds.
pub fn geodesic_intersection(gf: &GraphFunction, c: &Geodesic) -> Result<GeodesicSolution> {
    if c.point.len() != gf.n {
        return Err(Error::DimensionMismatch { expected: gf.n, found: c.point.len() });
    }
    let gap = gap_along(gf, c);
    if gap >= GEODESIC_MAX_GAP {
        return Err(Error::Precondition(format!(
            "sample gap {gap:.3e} along the geodesic exceeds {GEODESIC_MAX_GAP}"
        )));
    }
    let step = |t: f64| gf.eval(&c.at(t)).rem_euclid(TAU);
    let mut limits = Vec::with_capacity(GEODESIC_SEEDS);
    let mut max_steps = 0;
    let mut converged = true;
    for k in 0..GEODESIC_SEEDS {
        let mut t = TAU * k as f64 / GEODESIC_SEEDS as f64;
        let mut steps = 0;
        loop {
            let next = step(t);
            steps += 1;
            let change = circle_distance(next, t);
            t = next;
            if change < GEODESIC_STEP_TOL {
                break;
            }
            if steps >= GEODESIC_MAX_STEPS {
                converged = false;
                break;
            }
        }
        max_steps = max_steps.max(steps);
        limits.push(t);
    }
    let mut spread: f64 = 0.0;
    for a in &limits {
        for b in &limits {
            spread = spread.max(circle_distance(*a, *b));
        }
    }
    if spread > GEODESIC_AGREEMENT {
        return Err(Error::NonContraction { spread });
    }
    Ok(GeodesicSolution { theta: limits[0], seed_limits: limits, spread, max_steps, converged })
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeHistogram {
    /// Bin edges on `|slope|`; the last bin collects everything above.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl SlopeHistogram {
    fn new(slopes: &[f64]) -> Self {
        let edges: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let mut counts = vec![0u64; edges.len()];
        for s in slopes {
            let bin = ((s.abs() * 10.0).floor() as usize).min(edges.len() - 1);
            counts[bin] += 1;
        }
        Self { edges, counts }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondDifferenceStats {
    pub h: f64,
    pub max: f64,
    pub median: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub n: usize,
    pub samples: usize,
    /// `difference_quotients` for `n = 2`, `pairwise` otherwise.
    pub mode: String,
    pub max_slope: f64,
    pub slope_histogram: SlopeHistogram,
    pub second_differences: Vec<SecondDifferenceStats>,
    /// Sphere angle (or sample index for `n > 2`) where theta is largest.
    pub argmax_location: f64,
    /// Estimated `|df|` at the argmax, central difference at the smallest scale.
    pub argmax_slope_value: f64,
    pub spacelike_fraction: f64,
}

fn median_of(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

pub const MIN_REGULARITY_SAMPLES: usize = 10;

/// Difference-quotient statistics of the graph. `scales` are the step sizes
/// `h` for second differences `|f(x+h) - 2 f(x) + f(x-h)| / h` on a grid of
/// spacing `h`; for a `C^2` map these shrink linearly in `h`.
pub fn regularity_probe(gf: &GraphFunction, scales: &[f64]) -> Result<RegularityReport> {
    let m = gf.len();
    if m < MIN_REGULARITY_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{m} samples, at least {MIN_REGULARITY_SAMPLES} needed"
        )));
    }
    if scales.is_empty() || scales.iter().any(|h| !(*h > 0.0 && *h < PI)) {
        return Err(Error::ContractViolation("scales must be nonempty and lie in (0, pi)".into()));
    }
    let argmax = (0..m).max_by(|&a, &b| gf.theta[a].total_cmp(&gf.theta[b])).expect("nonempty");
    let h_min = scales.iter().copied().fold(f64::INFINITY, f64::min);
    if gf.n != 2 {
        return Ok(pairwise_regularity(gf, h_min, argmax));
    }
    let phi = &gf.phi;
    let mut slopes = Vec::with_capacity(m);
    for i in 0..m {
        let j = (i + 1) % m;
        let dphi = (phi[j] - phi[i]).rem_euclid(TAU);
        if dphi > 1e-12 {
            slopes.push(wrap_angle(gf.theta[j] - gf.theta[i]) / dphi);
        }
    }
    let max_slope = slopes.iter().map(|s| s.abs()).fold(0.0, f64::max);
    let spacelike = slopes.iter().filter(|s| s.abs() < 1.0 - TAU_SLOPE).count();
    let spacelike_fraction = if slopes.is_empty() { 1.0 } else { spacelike as f64 / slopes.len() as f64 };
    let second_differences = scales
        .iter()
        .map(|&h| {
            let count = (TAU / h).floor() as usize;
            let d2: Vec<f64> = (0..count)
                .map(|k| {
                    let x = k as f64 * h;
                    let (fm, f0, fp) = (gf.eval_angle(x - h), gf.eval_angle(x), gf.eval_angle(x + h));
                    (wrap_angle(fp - f0) - wrap_angle(f0 - fm)).abs() / h
                })
                .collect();
            SecondDifferenceStats { h, max: d2.iter().copied().fold(0.0, f64::max), median: median_of(d2), count }
        })
        .collect();
    let x = phi[argmax];
    let argmax_slope_value = (wrap_angle(gf.eval_angle(x + h_min) - gf.eval_angle(x - h_min)) / (2.0 * h_min)).abs();
    Ok(RegularityReport {
        n: 2,
        samples: m,
        mode: "difference_quotients".into(),
        max_slope,
        slope_histogram: SlopeHistogram::new(&slopes),
        second_differences,
        argmax_location: x,
        argmax_slope_value,
        spacelike_fraction,
    })
}

/// For `n > 2`: local slope of sample `i` is the largest ratio against
/// samples within `radius` (and beyond `DELTA_SEP`).
fn pairwise_regularity(gf: &GraphFunction, radius: f64, argmax: usize) -> RegularityReport {
    let m = gf.len();
    let local: Vec<f64> = Exec::default().map_range(m, |i| {
        let mut best: f64 = 0.0;
        for j in 0..m {
            let du = sphere_distance(gf.u(i), gf.u(j));
            if du > DELTA_SEP && du <= radius {
                best = best.max(circle_distance(gf.theta[i], gf.theta[j]) / du);
            }
        }
        best
    });
    let max_slope = local.iter().copied().fold(0.0, f64::max);
    let spacelike = local.iter().filter(|s| **s < 1.0 - TAU_SLOPE).count();
    RegularityReport {
        n: gf.n,
        samples: m,
        mode: "pairwise".into(),
        max_slope,
        slope_histogram: SlopeHistogram::new(&local),
        second_differences: Vec::new(),
        argmax_location: argmax as f64,
        argmax_slope_value: local[argmax],
        spacelike_fraction: spacelike as f64 / m as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::JordanPoint;
    use crate::limit_set::EinPoint;
    use crate::words::Word;

    fn grid(m: usize, f: impl Fn(f64) -> f64) -> GraphFunction {
        let pts: Vec<(f64, f64)> = (0..m).map(|k| {
            let p = TAU * k as f64 / m as f64;
            (p, f(p))
        }).collect();
        GraphFunction::from_angles(&pts).unwrap()
    }

    #[test]
    fn constant_graph_has_ratio_zero() {
        let r = check_distance_decreasing(&grid(500, |_| 0.3));
        assert_eq!(r.violations, 0);
        assert_eq!(r.max_ratio, 0.0);
    }

    #[test]
    fn identity_graph_is_a_boundary_case() {
        let r = check_distance_decreasing(&grid(500, |p| p));
        assert_eq!(r.violations, 0);
        assert!((r.max_ratio - 1.0).abs() < 1e-9 && r.boundary_case);
    }

    #[test]
    fn windowed_check_agrees_with_exhaustive() {
        let gf = grid(3000, |p| 0.2 * (3.0 * p).sin() + 0.02 * (7.0 * p).cos());
        let fast = check_distance_decreasing_with(&gf, DELTA_SEP, Exec::Sequential);
        assert_eq!(fast.method, CheckMethod::Windowed);
        let mut slow = PairTally::default();
        for i in 0..gf.len() {
            for j in i + 1..gf.len() {
                let du = sphere_distance(gf.u(i), gf.u(j));
                if du > DELTA_SEP {
                    slow.add(du, circle_distance(gf.theta(i), gf.theta(j)));
                }
            }
        }
        assert_eq!(fast.violations, slow.violations);
        assert!((fast.max_ratio - slow.max_ratio).abs() < 1e-12);
    }

    #[test]
    fn steep_graph_reports_violations() {
        let r = check_distance_decreasing(&grid(400, |p| 0.5 * (4.0 * p).sin()));
        assert!(r.violations > 0 && r.max_ratio > 1.5);
        assert_eq!(r.method, CheckMethod::Exhaustive);
    }

    #[test]
    fn component_selection_on_constant_sample() {
        let pts = (0..100).map(|k| {
            let p = TAU * k as f64 / 100.0;
            (EinPoint::new(vec![p.cos(), p.sin()], 0.0).unwrap(), Word::EMPTY, JordanPoint::new(1.0, 0.0))
        });
        let s = LimitSample::from_points(2, pts, 1e-9).unwrap();
        let gf = GraphFunction::from_sample(&s).unwrap();
        assert!((0..gf.len()).all(|i| gf.theta(i) == 0.0));
        assert_eq!(check_distance_decreasing(&gf).violations, 0);
    }

    #[test]
    fn interpolation_wraps() {
        let gf = GraphFunction::from_angles(&[(0.1, 0.0), (3.0, 0.2), (6.0, 0.4)]).unwrap();
        let mid = gf.eval_angle(6.0 + (TAU + 0.1 - 6.0) / 2.0);
        assert!((mid - 0.2).abs() < 1e-12);
    }

    #[test]
    fn constant_geodesic_fixed_point() {
        let gf = grid(1000, |_| 1.25);
        let sol = geodesic_intersection(&gf, &Geodesic::standard(2).unwrap()).unwrap();
        assert!((sol.theta - 1.25).abs() < 1e-12);
    }

    #[test]
    fn sparse_sample_fails_gap_precondition() {
        let gf = grid(20, |_| 0.0);
        assert!(matches!(
            geodesic_intersection(&gf, &Geodesic::standard(2).unwrap()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn too_few_samples_for_regularity() {
        assert!(matches!(regularity_probe(&grid(5, |_| 0.0), &[0.1]), Err(Error::InsufficientData(_))));
    }
}
