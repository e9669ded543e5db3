//! Greedy disjoint subcovers and the constructive Whitney decomposition.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::geometry::{dist, Ball, Metric, Point};
use crate::par;
use crate::rng;
use crate::spatial::{Aabb, GridIndex};

/// Slack in the strict disjointness test `d(cᵢ, cⱼ) > rᵢ + rⱼ + DISJOINT_SLACK`.
pub const DISJOINT_SLACK: f64 = 1e-12;

const TAG_HALTON: u64 = rng::tag("covering/halton");
const TAG_PROBE: u64 = rng::tag("covering/probe");

/// Output of [`greedy_disjoint_subcover`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subcover {
    /// Input indices of the selected balls, in selection order.
    pub selected: Vec<usize>,
    /// `(rejected input index, dominating input index)`.
    pub certificate: Vec<(usize, usize)>,
    pub factor: f64,
}

impl Subcover {
    pub fn selected_balls(&self, balls: &[Ball]) -> Vec<Ball> {
        self.selected.iter().map(|&i| balls[i]).collect()
    }
}

/// Processing order: radius descending, ties by lexicographic centre.
fn greedy_order(balls: &[Ball]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (&balls[a], &balls[b]);
        q.radius
            .total_cmp(&p.radius)
            .then(p.center.x.total_cmp(&q.center.x))
            .then(p.center.y.total_cmp(&q.center.y))
            .then(p.center.t.total_cmp(&q.center.t))
            .then(a.cmp(&b))
    });
    order
}

/// Vitali-type selection: pairwise disjoint balls such that every input centre lies in
/// `factor·B` of the selected ball that blocked it (`factor ≥ 3`).
pub fn greedy_disjoint_subcover(balls: &[Ball], factor: f64) -> Result<Subcover> {
    if balls.is_empty() {
        return Err(Error::invalid("ball list must be nonempty"));
    }
    if !(factor >= 3.0 && factor.is_finite()) {
        return Err(Error::invalid("cover factor must be at least 3"));
    }
    let metric = balls[0].metric;
    if balls.iter().any(|b| b.metric != metric) {
        return Err(Error::invalid("all balls must use the same metric"));
    }
    let bounds = balls.iter().map(|b| Aabb::of_koranyi_ball(b.center, 2.0 * b.radius + DISJOINT_SLACK)).reduce(|a, b| a.union(&b)).unwrap();
    let rmax = balls.iter().map(|b| b.radius).fold(0.0, f64::max);
    let m = balls.iter().map(|b| libm::fabs(b.center.x) + libm::fabs(b.center.y)).fold(0.0, f64::max);
    let cell = [4.0 * rmax, 4.0 * rmax, 2.0 * (4.0 * rmax * rmax + 4.0 * rmax * m)];
    let mut index = GridIndex::new(bounds, cell, 1 << 21);
    let mut selected = Vec::new();
    let mut certificate = Vec::new();
    for i in greedy_order(balls) {
        let b = balls[i];
        // A blocking ball has r_j ≥ r_i, so its centre is within 2r_j of c_i; the index
        // stores each selected ball's 2r_j Korányi box (which also bounds 2r_j s-R balls).
        let mut blocker = None;
        for &j in index.at_point(b.center) {
            let o = balls[j as usize];
            if dist(metric, b.center, o.center)? <= b.radius + o.radius + DISJOINT_SLACK {
                blocker = Some(j as usize);
                break;
            }
        }
        match blocker {
            Some(j) => certificate.push((i, j)),
            None => {
                index.insert(&Aabb::of_koranyi_ball(b.center, 2.0 * b.radius + DISJOINT_SLACK), i as u32);
                selected.push(i);
            }
        }
    }
    Ok(Subcover { selected, certificate, factor })
}

/// Bucketed lookup of balls containing a point, one uniform grid per dyadic radius class.
pub struct BallIndex<'a> {
    balls: &'a [Ball],
    enlarge: f64,
    levels: Vec<GridIndex>,
}

impl<'a> BallIndex<'a> {
    /// Index the balls `enlarge·B`.
    pub fn new(balls: &'a [Ball], enlarge: f64) -> Self {
        let mut groups: BTreeMap<i32, Vec<u32>> = BTreeMap::new();
        for (i, b) in balls.iter().enumerate() {
            let k = libm::floor(libm::log2(b.radius * enlarge)) as i32;
            groups.entry(k).or_default().push(i as u32);
        }
        let mut levels = Vec::with_capacity(groups.len());
        for ids in groups.values() {
            let boxes: Vec<Aabb> = ids.iter().map(|&i| Aabb::of_koranyi_ball(balls[i as usize].center, enlarge * balls[i as usize].radius)).collect();
            let bounds = boxes.iter().copied().reduce(|a, b| a.union(&b)).unwrap();
            let mut cell = [0.0f64; 3];
            for b in &boxes {
                for (k, c) in cell.iter_mut().enumerate() {
                    *c = c.max(b.hi[k] - b.lo[k]);
                }
            }
            let mut g = GridIndex::new(bounds, cell, 1 << 20);
            for (b, &i) in boxes.iter().zip(ids) {
                g.insert(b, i);
            }
            levels.push(g);
        }
        BallIndex { balls, enlarge, levels }
    }

    /// Indices of balls `enlarge·B` containing `p`, ascending.
    pub fn containing(&self, p: Point) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for g in &self.levels {
            for &i in g.at_point(p) {
                let b = &self.balls[i as usize];
                if dist(b.metric, p, b.center)? < self.enlarge * b.radius {
                    out.push(i as usize);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// Radical-inverse (Halton) point `i` in bases 2, 3, 5.
pub fn halton(i: u64) -> [f64; 3] {
    let radical = |mut n: u64, b: u64| {
        let (mut inv, mut f) = (0.0, 1.0 / b as f64);
        while n > 0 {
            inv += f * (n % b) as f64;
            n /= b;
            f /= b as f64;
        }
        inv
    };
    [radical(i, 2), radical(i, 3), radical(i, 5)]
}

/// Per-layer bookkeeping of [`whitney`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    /// Layer `F_k = {2^{k−1} < d ≤ 2^k}`.
    pub k: i32,
    pub candidates: usize,
    pub selected: usize,
}

/// Whitney-type decomposition of `{x ∈ Ω : d(x, ∂Ω) > collar}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyDecomposition {
    pub lambda: f64,
    pub c1: f64,
    pub c2: f64,
    pub collar: f64,
    pub metric: Metric,
    /// Emitted (5×-enlarged) balls, radius `((c1 + c2)/2)·d(centre, ∂Ω)`.
    pub balls: Vec<Ball>,
    /// `d(centre, ∂Ω)` for each emitted ball.
    pub boundary_distances: Vec<f64>,
    pub layers: Vec<LayerReport>,
    pub domain: Domain,
    pub grid: usize,
    /// Largest observed multiplicity of the 2× balls, once an overlap profile has run.
    pub overlap_bound_observed: usize,
}

/// Candidate-centre radius relative to the emitted radius.
pub const PRE_ENLARGEMENT: f64 = 5.0;

/// Whitney constants `c₁ = λ/8`, `c₂ = λ/(λ + 2)`.
pub fn whitney_constants(lambda: f64) -> (f64, f64) {
    (lambda / 8.0, lambda / (lambda + 2.0))
}

/// Constructive Whitney decomposition.
///
/// `grid` quasi-random candidate centres (scrambled Halton points in the sampling box)
/// are split into dyadic layers of `d(x, ∂Ω)`; in each layer candidates get radius
/// `(1/5)((c₁ + c₂)/2) d(x, ∂Ω)`, a greedy disjoint subcover with factor 5 is selected,
/// and the selections are emitted enlarged by 5.
pub fn whitney(dom: &Domain, lambda: f64, collar: f64, grid: usize, metric: Metric, seed: u64) -> Result<WhitneyDecomposition> {
    if !(lambda > 0.0 && lambda < 0.5) {
        return Err(Error::invalid("lambda must lie in (0, 1/2)"));
    }
    if !(collar > 0.0 && collar.is_finite()) {
        return Err(Error::invalid("collar must be positive"));
    }
    if grid == 0 {
        return Err(Error::invalid("grid must be at least 1"));
    }
    let (c1, c2) = whitney_constants(lambda);
    let mid = 0.5 * (c1 + c2);
    let bbox = dom.bounding_box();
    let mut shift_rng = rng::stream(seed, TAG_HALTON, 0);
    let shift: [f64; 3] = [shift_rng.random(), shift_rng.random(), shift_rng.random()];
    let cands: Vec<Option<(Point, f64)>> = par::try_map_indexed(grid, |i| {
        let h = halton(i as u64 + 1);
        let mut a = [0.0; 3];
        for k in 0..3 {
            let u = h[k] + shift[k];
            let u = if u >= 1.0 { u - 1.0 } else { u };
            a[k] = bbox.lo[k] + (bbox.hi[k] - bbox.lo[k]) * u;
        }
        let p = Point::new(a[0], a[1], a[2]);
        if !dom.contains(p) {
            return Ok(None);
        }
        let d = dom.boundary_distance(p, metric)?;
        Ok((d > collar).then_some((p, d)))
    })?;
    let mut by_layer: BTreeMap<i32, Vec<(Point, f64)>> = BTreeMap::new();
    for (p, d) in cands.into_iter().flatten() {
        let k = libm::ceil(libm::log2(d)) as i32;
        by_layer.entry(k).or_default().push((p, d));
    }
    // Deepest layers first so the output order is stable and readable.
    let mut balls = Vec::new();
    let mut dists = Vec::new();
    let mut layers = Vec::new();
    for (&k, members) in by_layer.iter().rev() {
        let pre: Vec<Ball> = members
            .iter()
            .map(|&(p, d)| Ball::new(p, mid * d / PRE_ENLARGEMENT, metric))
            .collect::<Result<_>>()?;
        let cover = greedy_disjoint_subcover(&pre, PRE_ENLARGEMENT)?;
        for &i in &cover.selected {
            let (p, d) = members[i];
            balls.push(Ball::new(p, mid * d, metric)?);
            dists.push(d);
        }
        layers.push(LayerReport { k, candidates: members.len(), selected: cover.selected.len() });
    }
    if balls.is_empty() {
        return Err(Error::config(format!("no candidate centre with d(x, ∂Ω) > {collar}; increase grid")));
    }
    Ok(WhitneyDecomposition {
        lambda,
        c1,
        c2,
        collar,
        metric,
        balls,
        boundary_distances: dists,
        layers,
        domain: *dom,
        grid,
        overlap_bound_observed: 0,
    })
}

impl WhitneyDecomposition {
    /// Number of balls violating `c₁ d ≤ r ≤ c₂ d` (checked with no tolerance).
    pub fn property_violations(&self) -> usize {
        self.balls
            .iter()
            .zip(&self.boundary_distances)
            .filter(|(b, &d)| !(self.c1 * d <= b.radius && b.radius <= self.c2 * d))
            .count()
    }

    /// The pre-enlargement balls `B/5`.
    pub fn pre_balls(&self) -> Vec<Ball> {
        self.balls.iter().map(|b| Ball { radius: b.radius / PRE_ENLARGEMENT, ..*b }).collect()
    }

    /// Pairs of pre-enlargement balls that fail strict disjointness within one layer.
    pub fn disjointness_violations(&self) -> Result<usize> {
        let pre = self.pre_balls();
        let mut bad = 0;
        let idx = BallIndex::new(&pre, 2.0);
        for (i, b) in pre.iter().enumerate() {
            for j in idx.containing(b.center)? {
                if j <= i || self.layer_of(i) != self.layer_of(j) {
                    continue;
                }
                let o = pre[j];
                if dist(self.metric, b.center, o.center)? <= b.radius + o.radius + DISJOINT_SLACK {
                    bad += 1;
                }
            }
        }
        Ok(bad)
    }

    fn layer_of(&self, i: usize) -> i32 {
        libm::ceil(libm::log2(self.boundary_distances[i])) as i32
    }
}

/// Multiplicity histogram of the 2×-enlarged balls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapProfile {
    pub max_multiplicity: usize,
    /// `histogram[m]` = number of probes in exactly `m` balls.
    pub histogram: Vec<usize>,
    pub probes: usize,
}

/// Probe points: uniform in `{d(x, ∂Ω) > collar}`.
pub fn probe_points(w: &WhitneyDecomposition, probes: usize, seed: u64) -> Result<Vec<Point>> {
    if probes == 0 {
        return Err(Error::invalid("probes must be at least 1"));
    }
    w.domain.sample_interior(probes, rng::derive_seed(seed, TAG_PROBE, 0), w.collar, w.metric)
}

/// Membership counts of `enlarge·B` over the given points.
pub fn multiplicities(w: &WhitneyDecomposition, pts: &[Point], enlarge: f64) -> Result<Vec<usize>> {
    let idx = BallIndex::new(&w.balls, enlarge);
    par::try_map_indexed(pts.len(), |i| Ok(idx.containing(pts[i])?.len()))
}

pub fn overlap_profile(w: &WhitneyDecomposition, probes: usize, seed: u64) -> Result<OverlapProfile> {
    let pts = probe_points(w, probes, seed)?;
    let counts = multiplicities(w, &pts, 2.0)?;
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut histogram = alloc::vec![0usize; max + 1];
    for c in counts {
        histogram[c] += 1;
    }
    Ok(OverlapProfile { max_multiplicity: max, histogram, probes })
}

/// Fraction of collar-restricted probe points lying in some emitted ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub covered: usize,
    pub probes: usize,
    pub fraction: f64,
}

pub fn coverage_audit(w: &WhitneyDecomposition, probes: usize, seed: u64) -> Result<CoverageReport> {
    let pts = probe_points(w, probes, seed)?;
    let counts = multiplicities(w, &pts, 1.0)?;
    let covered = counts.iter().filter(|&&c| c > 0).count();
    Ok(CoverageReport { covered, probes, fraction: covered as f64 / probes as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn kb(x: f64, r: f64) -> Ball {
        Ball::new(Point::new(x, 0.0, 0.0), r, Metric::Koranyi).unwrap()
    }

    #[test]
    fn greedy_examples() {
        let one = greedy_disjoint_subcover(&[kb(0.0, 1.0)], 3.0).unwrap();
        assert_eq!(one.selected, vec![0]);
        let two = greedy_disjoint_subcover(&[kb(0.0, 1.0), kb(5.0, 1.0)], 3.0).unwrap();
        assert_eq!(two.selected.len(), 2);
        let three = greedy_disjoint_subcover(&[kb(0.0, 1.0), kb(1.5, 1.0), kb(3.0, 1.0)], 3.0).unwrap();
        assert_eq!(three.selected, vec![0, 2]);
        assert_eq!(three.certificate, vec![(1, 0)]);
        assert!(greedy_disjoint_subcover(&[], 3.0).is_err());
        assert!(greedy_disjoint_subcover(&[kb(0.0, 1.0)], 2.0).is_err());
    }

    #[test]
    fn greedy_certificate_and_disjointness_on_random_balls() {
        let mut r = rng::stream(1, rng::tag("test/greedy"), 0);
        for metric in Metric::ALL {
            let balls: Vec<Ball> = (0..400)
                .map(|_| {
                    let c = Point::new(2.0 * r.random::<f64>() - 1.0, 2.0 * r.random::<f64>() - 1.0, 2.0 * r.random::<f64>() - 1.0);
                    Ball::new(c, 0.05 + 0.1 * r.random::<f64>(), metric).unwrap()
                })
                .collect();
            let s = greedy_disjoint_subcover(&balls, 3.0).unwrap();
            for (a, &i) in s.selected.iter().enumerate() {
                for &j in &s.selected[a + 1..] {
                    let d = dist(metric, balls[i].center, balls[j].center).unwrap();
                    assert!(d - (balls[i].radius + balls[j].radius) > 0.0);
                }
            }
            assert_eq!(s.selected.len() + s.certificate.len(), balls.len());
            for &(i, j) in &s.certificate {
                assert!(dist(metric, balls[i].center, balls[j].center).unwrap() < 3.0 * balls[j].radius);
            }
        }
    }

    #[test]
    fn whitney_small_run() {
        let dom = Domain::koranyi_ball(Point::ORIGIN, 1.0).unwrap();
        let w = whitney(&dom, 0.4, 0.1, 5000, Metric::Koranyi, 3).unwrap();
        assert_eq!(w.property_violations(), 0);
        assert_eq!(w.disjointness_violations().unwrap(), 0);
        assert!(w.layers.iter().all(|l| l.selected <= l.candidates));
        let prof = overlap_profile(&w, 500, 1).unwrap();
        assert_eq!(prof.histogram.iter().sum::<usize>(), 500);
        let again = whitney(&dom, 0.4, 0.1, 5000, Metric::Koranyi, 3).unwrap();
        assert_eq!(w, again);
    }

    #[test]
    fn single_ball_profile() {
        let dom = Domain::koranyi_ball(Point::ORIGIN, 1.0).unwrap();
        let mut w = whitney(&dom, 0.4, 0.5, 200, Metric::Koranyi, 1).unwrap();
        w.balls.truncate(1);
        w.boundary_distances.truncate(1);
        assert!(overlap_profile(&w, 200, 2).unwrap().max_multiplicity <= 1);
    }

    #[test]
    fn halton_first_points() {
        assert_eq!(halton(1), [0.5, 1.0 / 3.0, 0.2]);
        assert_eq!(halton(2), [0.25, 2.0 / 3.0, 0.4]);
    }
}
