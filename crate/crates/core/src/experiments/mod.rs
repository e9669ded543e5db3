//! End-to-end audits of distortion estimates for quasiconformal maps.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{sphere_chart, Domain, Shape};
use crate::error::{Error, Result};
use crate::geometry::{dist, Ball, Curve, Metric, Point};
use crate::integrate::{average_derivative_in_ball, sample_ball, AverageDerivative};
use crate::maps::{MapKind, SmoothMap};
use crate::par;
use crate::rng;

mod comparability;
mod density;

pub use comparability::{harnack_audit, integral_comparability, ComparabilityReport, ComparabilityRow, HarnackReport};
pub use density::{ahlfors_audit, density_graph_build, AhlforsReport, DensityMetricGraph};

const TAG_KOEBE: u64 = rng::tag("experiments/koebe");
const TAG_AF: u64 = rng::tag("experiments/af");
const TAG_SPHERE: u64 = rng::tag("experiments/sphere");
const TAG_QS: u64 = rng::tag("experiments/qs");
const TAG_PAIRS: u64 = rng::tag("experiments/pairs");

/// `a_f(x)` over the maximal centred ball `B(x, d(x, ∂Ω))`.
pub(crate) fn maximal_ball_af(f: &SmoothMap, x: Point, d: f64, metric: Metric, n: usize, seed: u64) -> Result<AverageDerivative> {
    average_derivative_in_ball(f, &Ball::new(x, d, metric)?, d, n, seed)
}

/// `f(Ω)` when it is a catalog domain that `f` maps exactly; `None` otherwise.
pub fn image_domain(f: &SmoothMap, dom: &Domain) -> Option<Domain> {
    let shape = image_shape(f.kind(), *dom.shape())?;
    // Keep the relative accuracy of the boundary oracle.
    let tol = dom.boundary_tolerance() / dom.scale();
    let img = Domain::new(shape).ok()?;
    img.with_tolerance(tol * img.scale()).ok()
}

fn image_shape(kind: &MapKind, shape: Shape) -> Option<Shape> {
    let origin = |c: Point| c == Point::ORIGIN;
    Some(match (kind, shape) {
        (MapKind::Composition { maps }, s) => maps.iter().rev().try_fold(s, |s, m| image_shape(m, s))?,
        (MapKind::LeftTranslation { g }, Shape::KoranyiBall { center, radius }) => Shape::KoranyiBall { center: *g * center, radius },
        (MapKind::LeftTranslation { g }, Shape::KoranyiAnnulus { center, r_in, r_out }) => {
            Shape::KoranyiAnnulus { center: *g * center, r_in, r_out }
        }
        (MapKind::LeftTranslation { g }, Shape::PuncturedSpace { puncture, window }) => {
            Shape::PuncturedSpace { puncture: *g * puncture, window }
        }
        (k, Shape::PuncturedSpace { puncture, window }) if origin(puncture) && k.fixes_origin_puncture() => {
            Shape::PuncturedSpace { puncture, window }
        }
        (MapKind::Dilation { lambda }, Shape::KoranyiBall { center, radius }) if origin(center) => {
            Shape::KoranyiBall { center, radius: lambda * radius }
        }
        (MapKind::Dilation { lambda }, Shape::KoranyiAnnulus { center, r_in, r_out }) if origin(center) => {
            Shape::KoranyiAnnulus { center, r_in: lambda * r_in, r_out: lambda * r_out }
        }
        (MapKind::Dilation { lambda }, Shape::Box { lo, hi }) => {
            let l2 = lambda * lambda;
            Shape::Box { lo: [lambda * lo[0], lambda * lo[1], l2 * lo[2]], hi: [lambda * hi[0], lambda * hi[1], l2 * hi[2]] }
        }
        (MapKind::HorizontalStretch { a }, Shape::Box { lo, hi }) => {
            Shape::Box { lo: [a * lo[0], lo[1] / a, lo[2]], hi: [a * hi[0], hi[1] / a, hi[2]] }
        }
        (MapKind::Rotation { .. }, s @ (Shape::KoranyiBall { center, .. } | Shape::KoranyiAnnulus { center, .. })) if origin(center) => s,
        (MapKind::KoranyiInversion, Shape::KoranyiAnnulus { center, r_in, r_out }) if origin(center) => {
            Shape::KoranyiAnnulus { center, r_in: 1.0 / r_out, r_out: 1.0 / r_in }
        }
        _ => return None,
    })
}

/// One Koebe sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KoebeRecord {
    pub x: Point,
    pub boundary_distance: f64,
    pub image_boundary_distance: f64,
    pub a_f: f64,
    pub a_f_std_error: f64,
    /// `d(f(x), ∂Ω') / d(x, ∂Ω)`.
    pub boundary_ratio: f64,
    /// `|log a_f − log boundary_ratio|`.
    pub log_discrepancy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KoebeReport {
    pub records: Vec<KoebeRecord>,
    /// `exp(max log_discrepancy)`.
    pub c_hat: f64,
    /// Monte-Carlo standard error of `c_hat` at the maximising point.
    pub c_hat_std_error: f64,
    pub metric: Metric,
}

/// Compare `a_f(x)` with `d(f(x), ∂Ω')/d(x, ∂Ω)` at `points` interior samples.
pub fn koebe_scan(
    f: &SmoothMap,
    dom: &Domain,
    dom_image: &Domain,
    metric: Metric,
    points: usize,
    mc_n: usize,
    seed: u64,
) -> Result<KoebeReport> {
    let xs = dom.sample_interior_with_distance(points, rng::derive_seed(seed, TAG_KOEBE, 0), 0.0, metric)?;
    let records = par::try_map_indexed(xs.len(), |i| {
        let (x, d) = xs[i];
        let y = f.apply(x)?;
        if !dom_image.contains(y) {
            return Err(Error::config(format!(
                "image-domain mismatch: f({x:?}) = {y:?} is outside the given {} image domain",
                dom_image.kind_name()
            )));
        }
        let d_img = dom_image.boundary_distance(y, metric)?;
        let af = maximal_ball_af(f, x, d, metric, mc_n, rng::derive_seed(seed, TAG_AF, i as u64))?;
        let ratio = d_img / d;
        Ok(KoebeRecord {
            x,
            boundary_distance: d,
            image_boundary_distance: d_img,
            a_f: af.value,
            a_f_std_error: af.std_error(),
            boundary_ratio: ratio,
            log_discrepancy: libm::fabs(libm::log(af.value) - libm::log(ratio)),
        })
    })?;
    let worst = (0..records.len()).fold(0, |b, i| if records[i].log_discrepancy > records[b].log_discrepancy { i } else { b });
    let c_hat = libm::exp(records[worst].log_discrepancy);
    let rel = records[worst].a_f_std_error / records[worst].a_f;
    Ok(KoebeReport { c_hat, c_hat_std_error: c_hat * rel, records, metric })
}

/// Geometry of `f(B)` relative to `∂Ω'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallImageReport {
    /// Max pairwise Korányi distance over the mapped boundary samples.
    pub diam_image: f64,
    /// `min d(f(b), ∂Ω')` over mapped boundary samples.
    pub dist_image_to_boundary: f64,
    /// `d(f(x), ∂Ω')`.
    pub center_image_boundary_distance: f64,
    /// `min / max d(f(x), f(b))` over boundary samples: `B(f(x), inner) ⊂ f(B) ⊂ B(f(x), outer)`.
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// `outer / inner`, the empirical `k` with `B' ⊂ f(B) ⊂ kB'`.
    pub containment_k: f64,
    /// `diam f(B) / d(f(x), ∂Ω')`.
    pub diam_ratio: f64,
    pub samples: usize,
}

/// Points of `∂B` on a latitude/longitude grid of the unit-sphere chart with a random
/// azimuthal offset; the equator and antipodal pairs are always included.
pub fn sphere_samples(ball: &Ball, n: usize, seed: u64) -> Vec<Point> {
    let n_lat = {
        let m = libm::sqrt(n as f64 / 2.0) as usize;
        m.max(1) | 1
    };
    let n_lon = 2 * ((n / n_lat).max(2) / 2);
    let offset: f64 = rng::stream(seed, TAG_SPHERE, 0).random();
    let mut out = Vec::with_capacity(n_lat * n_lon);
    for j in 0..n_lat {
        let u = (j as f64 + 0.5) / n_lat as f64;
        for i in 0..n_lon {
            let v = (i as f64 + offset) / n_lon as f64;
            out.push(ball.center * sphere_chart(ball.metric, u, v).dilated(ball.radius));
        }
    }
    out
}

pub fn ball_image_geometry(f: &SmoothMap, ball: &Ball, dom_image: &Domain, boundary_samples: usize, seed: u64) -> Result<BallImageReport> {
    if boundary_samples < 2 {
        return Err(Error::invalid("boundary_samples must be at least 2"));
    }
    let metric = ball.metric;
    let pts = sphere_samples(ball, boundary_samples, seed);
    let img = par::try_map_indexed(pts.len(), |i| f.apply(pts[i]))?;
    let fx = f.apply(ball.center)?;
    let row_max = par::try_map_indexed(img.len(), |i| {
        let mut m = 0.0f64;
        for j in i + 1..img.len() {
            m = m.max(dist(metric, img[i], img[j])?);
        }
        Ok(m)
    })?;
    let diam = row_max.iter().copied().fold(0.0, f64::max);
    let to_boundary = par::try_map_indexed(img.len(), |i| dom_image.boundary_distance(img[i], metric))?;
    let radii = par::try_map_indexed(img.len(), |i| dist(metric, img[i], fx))?;
    let inner = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let outer = radii.iter().copied().fold(0.0, f64::max);
    let dc = dom_image.boundary_distance(fx, metric)?;
    Ok(BallImageReport {
        diam_image: diam,
        dist_image_to_boundary: to_boundary.iter().copied().fold(f64::INFINITY, f64::min),
        center_image_boundary_distance: dc,
        inner_radius: inner,
        outer_radius: outer,
        containment_k: outer / inner,
        diam_ratio: diam / dc,
        samples: pts.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QsSample {
    /// `d(p₁, p₂) / d(p₁, p₃)`.
    pub t: f64,
    /// `d(f p₁, f p₂) / d(f p₁, f p₃)`.
    pub ratio: f64,
}

/// Largest image ratio among samples with `t` in `[t_lo, t_hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeBin {
    pub t_lo: f64,
    pub t_hi: f64,
    pub max_ratio: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QsProfile {
    pub egg_yolk_shrink: f64,
    pub egg_yolk_radius: f64,
    pub samples: Vec<QsSample>,
    pub eta_envelope: Vec<EnvelopeBin>,
    /// `L_f/l_f` on spheres of radius `R/2^j`, `j = 1..=4`, `R` the egg-yolk radius.
    pub h_by_radius: Vec<(f64, f64)>,
    /// The value at the smallest radius, standing in for `H_f(x) = limsup L_f/l_f`.
    pub h_f_hat: f64,
}

const ENVELOPE_BINS: usize = 16;
const H_SPHERE_SAMPLES: usize = 512;

/// Quasisymmetry profile of `f` on the egg-yolk ball `B(x, d(x, ∂Ω)/shrink)`.
pub fn qs_profile(f: &SmoothMap, dom: &Domain, x: Point, shrink: f64, triples: usize, seed: u64, metric: Metric) -> Result<QsProfile> {
    if !(shrink > 1.0 && shrink.is_finite()) {
        return Err(Error::invalid("egg-yolk shrink must exceed 1"));
    }
    if triples == 0 {
        return Err(Error::invalid("triples must be at least 1"));
    }
    let d = dom.boundary_distance(x, metric)?;
    let ball = Ball::new(x, d / shrink, metric)?;
    let samples = par::try_map_indexed(triples, |i| {
        for attempt in 0..64u64 {
            let p = sample_ball(&ball, 3, rng::derive_seed(seed, TAG_QS, ((i as u64) << 6) | attempt))?;
            let (a, b) = (dist(metric, p[0], p[1])?, dist(metric, p[0], p[2])?);
            if a == 0.0 || b == 0.0 {
                continue;
            }
            let q: Vec<Point> = p.iter().map(|&z| f.apply(z)).collect::<Result<_>>()?;
            let (fa, fb) = (dist(metric, q[0], q[1])?, dist(metric, q[0], q[2])?);
            if fa == 0.0 || fb == 0.0 {
                continue;
            }
            return Ok(QsSample { t: a / b, ratio: fa / fb });
        }
        Err(Error::NumericFailure { op: "qs_profile", detail: format!("triple {i} stayed degenerate") })
    })?;
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        let l = libm::log(s.t);
        (lo.min(l), hi.max(l))
    });
    let width = ((hi - lo) / ENVELOPE_BINS as f64).max(f64::MIN_POSITIVE);
    let mut bins: Vec<EnvelopeBin> = (0..ENVELOPE_BINS)
        .map(|b| EnvelopeBin {
            t_lo: libm::exp(lo + b as f64 * width),
            t_hi: libm::exp(lo + (b + 1) as f64 * width),
            max_ratio: 0.0,
            count: 0,
        })
        .collect();
    for s in &samples {
        let b = (((libm::log(s.t) - lo) / width) as usize).min(ENVELOPE_BINS - 1);
        bins[b].max_ratio = bins[b].max_ratio.max(s.ratio);
        bins[b].count += 1;
    }
    bins.retain(|b| b.count > 0);
    let fx = f.apply(x)?;
    let mut h_by_radius = Vec::new();
    for j in 1..=4 {
        let r = ball.radius / (1u32 << j) as f64;
        let sphere = sphere_samples(&Ball::new(x, r, metric)?, H_SPHERE_SAMPLES, rng::derive_seed(seed, TAG_SPHERE, j));
        let ds = par::try_map_indexed(sphere.len(), |i| dist(metric, f.apply(sphere[i])?, fx))?;
        let big = ds.iter().copied().fold(0.0, f64::max);
        let small = ds.iter().copied().fold(f64::INFINITY, f64::min);
        h_by_radius.push((r, big / small));
    }
    let h_f_hat = h_by_radius.last().unwrap().1;
    Ok(QsProfile { egg_yolk_shrink: shrink, egg_yolk_radius: ball.radius, samples, eta_envelope: bins, h_by_radius, h_f_hat })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistancePair {
    pub z1: Point,
    pub z2: Point,
    pub boundary_distance: f64,
    pub distance: f64,
    pub image_distance: f64,
    pub a_f: f64,
    /// `d(f z₁, f z₂) / (a_f(z₁) d(z₁,∂Ω)^a d(z₁,z₂)^{1−a})`.
    pub c_pair: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimateReport {
    pub a_exp: f64,
    pub lambda_knob: f64,
    pub pairs: Vec<DistancePair>,
    pub c_max: f64,
    pub c_median: f64,
}

/// Empirical constants of the Hölder-type distance estimate on pairs with
/// `d(z₁, z₂) ≤ d(z₁, ∂Ω)/(2·lambda_knob)`.
#[allow(clippy::too_many_arguments)]
pub fn distance_estimate_audit(
    f: &SmoothMap,
    dom: &Domain,
    a_exp: f64,
    lambda_knob: f64,
    pairs: usize,
    mc_n: usize,
    seed: u64,
    metric: Metric,
) -> Result<DistanceEstimateReport> {
    if !(a_exp > 0.0 && a_exp < 1.0) {
        return Err(Error::invalid("exponent a must lie in (0, 1)"));
    }
    if !(lambda_knob >= 1.0 && lambda_knob.is_finite()) {
        return Err(Error::config("lambda_knob must be a finite number ≥ 1"));
    }
    let zs = dom.sample_interior_with_distance(pairs, rng::derive_seed(seed, TAG_PAIRS, 0), 0.0, metric)?;
    let recs = par::try_map_indexed(zs.len(), |i| {
        let (z1, d) = zs[i];
        let mut g = rng::stream(seed, TAG_PAIRS, i as u64 + 1);
        let rho = d / (2.0 * lambda_knob) * (1.0 - g.random::<f64>());
        let u = sphere_chart(metric, g.random(), g.random());
        let z2 = z1 * u.dilated(rho);
        let dz = dist(metric, z1, z2)?;
        let fd = dist(metric, f.apply(z1)?, f.apply(z2)?)?;
        let af = maximal_ball_af(f, z1, d, metric, mc_n, rng::derive_seed(seed, TAG_AF, i as u64))?.value;
        let c = fd / (af * libm::pow(d, a_exp) * libm::pow(dz, 1.0 - a_exp));
        Ok(DistancePair { z1, z2, boundary_distance: d, distance: dz, image_distance: fd, a_f: af, c_pair: c })
    })?;
    let mut cs: Vec<f64> = recs.iter().map(|r| r.c_pair).collect();
    cs.sort_by(f64::total_cmp);
    Ok(DistanceEstimateReport {
        a_exp,
        lambda_knob,
        c_max: *cs.last().unwrap(),
        c_median: cs[cs.len() / 2],
        pairs: recs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveDiameterRecord {
    pub length: f64,
    /// `min` boundary distance over the vertices.
    pub boundary_distance: f64,
    /// `length ≥ α·d(γ, ∂Ω)`.
    pub alpha_ok: bool,
    pub diam_image: f64,
    /// `∫_γ a_f ds`, midpoint rule per segment.
    pub weighted_length: f64,
    pub ratio: f64,
}

pub fn curve_diameter_audit(
    f: &SmoothMap,
    dom: &Domain,
    curves: &[Curve],
    alpha: f64,
    mc_n: usize,
    seed: u64,
    metric: Metric,
) -> Result<Vec<CurveDiameterRecord>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha must lie in (0, 1]"));
    }
    let mut out = Vec::with_capacity(curves.len());
    for (ci, c) in curves.iter().enumerate() {
        let v = c.vertices();
        let dists = par::try_map_indexed(v.len(), |i| dom.boundary_distance(v[i], metric))?;
        let dmin = dists.iter().copied().fold(f64::INFINITY, f64::min);
        let segs: Vec<(Point, Point)> = c.segments().collect();
        let parts = par::try_map_indexed(segs.len(), |i| {
            let (a, b) = segs[i];
            let mid = a * (a.inv() * b).dilated(0.5);
            let d = dom.boundary_distance(mid, metric)?;
            let key = ((ci as u64) << 32) | i as u64;
            let af = maximal_ball_af(f, mid, d, metric, mc_n, rng::derive_seed(seed, TAG_AF, key))?.value;
            Ok(af * dist(metric, b, a)?)
        })?;
        let weighted = crate::stats::pairwise_sum(&parts);
        let length: f64 = crate::stats::pairwise_sum(&segs.iter().map(|&(a, b)| dist(metric, b, a)).collect::<Result<Vec<_>>>()?);
        let img = c.map_vertices(|p| f.apply(p))?;
        let diam = img.vertex_diameter();
        out.push(CurveDiameterRecord {
            length,
            boundary_distance: dmin,
            alpha_ok: length >= alpha * dmin,
            diam_image: diam,
            weighted_length: weighted,
            ratio: diam / weighted,
        })
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub diam_image: f64,
    pub length: f64,
    pub ratio: f64,
}

/// The axis segment `[0, r]` under the radial stretch `z ↦ z|z|^{k−1}`: its image has
/// diameter `r^k`, so `diam/length = r^{k−1}` is unbounded as `r ↓ 0` when `k < 1`.
pub fn sharpness_probe(k_exp: f64, r: f64) -> Result<SharpnessReport> {
    if !(k_exp > 0.0 && k_exp <= 1.0) {
        return Err(Error::invalid("k_exp must lie in (0, 1]"));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid("r must lie in (0, 1)"));
    }
    let diam = libm::pow(r, k_exp);
    Ok(SharpnessReport { diam_image: diam, length: r, ratio: diam / r })
}

#[cfg(test)]
mod tests;
