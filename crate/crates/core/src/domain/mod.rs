//! Region oracles: membership, distance to the boundary, interior sampling.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{koranyi_norm, Metric, Point};
use crate::par;
use crate::rng::{self, StreamRng};
use crate::spatial::Aabb;

mod boundary;

use boundary::{box_distance, koranyi_sphere_distance, ray_distance, Exit};
pub(crate) use boundary::{horizontal_ring_crossing, sphere_chart, sphere_point};

const TAG_INTERIOR: u64 = rng::tag("domain/interior");
const MAX_TRIES_PER_POINT: u64 = 1_000_000;

/// Shape of an open connected region of H¹.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Shape {
    /// `{p : ‖c⁻¹p‖ < radius}`.
    KoranyiBall { center: Point, radius: f64 },
    /// `H¹ ∖ {puncture}`. `window` bounds the gauge shell used for sampling.
    PuncturedSpace {
        puncture: Point,
        #[serde(default = "default_window")]
        window: f64,
    },
    /// `{p : r_in < ‖c⁻¹p‖ < r_out}`.
    KoranyiAnnulus { center: Point, r_in: f64, r_out: f64 },
    /// Open coordinate box `lo < p < hi`.
    Box { lo: [f64; 3], hi: [f64; 3] },
}

fn default_window() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct DomainRepr {
    #[serde(flatten)]
    shape: Shape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boundary_tolerance: Option<f64>,
}

/// A domain together with the accuracy target of its boundary-distance oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr", into = "DomainRepr")]
pub struct Domain {
    shape: Shape,
    boundary_tolerance: f64,
}

impl TryFrom<DomainRepr> for Domain {
    type Error = Error;

    fn try_from(r: DomainRepr) -> Result<Self> {
        let d = Domain::new(r.shape)?;
        match r.boundary_tolerance {
            Some(tol) => d.with_tolerance(tol),
            None => Ok(d),
        }
    }
}

impl From<Domain> for DomainRepr {
    fn from(d: Domain) -> Self {
        DomainRepr { shape: d.shape, boundary_tolerance: Some(d.boundary_tolerance) }
    }
}

fn check_point(p: Point, what: &str) -> Result<()> {
    if p.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be finite")))
    }
}

fn check_radius(r: f64, what: &str) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be positive and finite")))
    }
}

impl Domain {
    pub fn new(shape: Shape) -> Result<Self> {
        match shape {
            Shape::KoranyiBall { center, radius } => {
                check_point(center, "ball center")?;
                check_radius(radius, "ball radius")?;
            }
            Shape::PuncturedSpace { puncture, window } => {
                check_point(puncture, "puncture")?;
                check_radius(window, "sampling window")?;
            }
            Shape::KoranyiAnnulus { center, r_in, r_out } => {
                check_point(center, "annulus center")?;
                check_radius(r_in, "inner radius")?;
                check_radius(r_out, "outer radius")?;
                if r_in >= r_out {
                    return Err(Error::invalid("annulus needs r_in < r_out"));
                }
            }
            Shape::Box { lo, hi } => {
                if (0..3).any(|k| !(lo[k].is_finite() && hi[k].is_finite() && lo[k] < hi[k])) {
                    return Err(Error::invalid("box needs finite bounds with lo < hi"));
                }
            }
        }
        let mut d = Domain { shape, boundary_tolerance: 0.0 };
        d.boundary_tolerance = 1e-6 * d.scale();
        Ok(d)
    }

    pub fn koranyi_ball(center: Point, radius: f64) -> Result<Self> {
        Domain::new(Shape::KoranyiBall { center, radius })
    }

    pub fn punctured(puncture: Point) -> Result<Self> {
        Domain::new(Shape::PuncturedSpace { puncture, window: default_window() })
    }

    pub fn punctured_with_window(puncture: Point, window: f64) -> Result<Self> {
        Domain::new(Shape::PuncturedSpace { puncture, window })
    }

    pub fn annulus(center: Point, r_in: f64, r_out: f64) -> Result<Self> {
        Domain::new(Shape::KoranyiAnnulus { center, r_in, r_out })
    }

    pub fn coordinate_box(lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        Domain::new(Shape::Box { lo, hi })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Result<Self> {
        check_radius(tol, "boundary tolerance")?;
        self.boundary_tolerance = tol;
        Ok(self)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn boundary_tolerance(&self) -> f64 {
        self.boundary_tolerance
    }

    pub fn kind_name(&self) -> &'static str {
        match self.shape {
            Shape::KoranyiBall { .. } => "koranyi-ball",
            Shape::PuncturedSpace { .. } => "punctured-space",
            Shape::KoranyiAnnulus { .. } => "koranyi-annulus",
            Shape::Box { .. } => "box",
        }
    }

    /// Characteristic length: radius, outer radius, window or smallest box side.
    pub fn scale(&self) -> f64 {
        match self.shape {
            Shape::KoranyiBall { radius, .. } => radius,
            Shape::PuncturedSpace { window, .. } => window,
            Shape::KoranyiAnnulus { r_out, .. } => r_out,
            Shape::Box { lo, hi } => (0..3).map(|k| hi[k] - lo[k]).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        if !p.is_finite() {
            return false;
        }
        match self.shape {
            Shape::KoranyiBall { center, radius } => koranyi_norm(center.inv() * p) < radius,
            Shape::PuncturedSpace { puncture, .. } => p != puncture,
            Shape::KoranyiAnnulus { center, r_in, r_out } => {
                let g = koranyi_norm(center.inv() * p);
                g > r_in && g < r_out
            }
            Shape::Box { lo, hi } => {
                let a = p.to_array();
                (0..3).all(|k| a[k] > lo[k] && a[k] < hi[k])
            }
        }
    }

    /// `d(p, ∂Ω)` in `metric`.
    ///
    /// Exact for the punctured space. Korányi distances to gauge spheres use a latitude
    /// search with the azimuth minimised in closed form; everything else minimises first
    /// exit times of rays over the unit sphere. Spherical results never fall below the
    /// triangle-inequality bound `R − ‖c⁻¹p‖`.
    pub fn boundary_distance(&self, p: Point, metric: Metric) -> Result<f64> {
        if !self.contains(p) {
            return Err(Error::invalid(format!("point {p:?} is not inside the {} domain", self.kind_name())));
        }
        let tol = self.boundary_tolerance;
        match self.shape {
            Shape::PuncturedSpace { puncture, .. } => metric.norm(puncture.inv() * p),
            Shape::KoranyiBall { center, radius } => {
                let rel = center.inv() * p;
                let d = match metric {
                    Metric::Koranyi => koranyi_sphere_distance(rel, radius),
                    Metric::SubRiemannian => ray_distance(metric, rel, &Exit::Ball { radius }, tol),
                };
                Ok(d.max(radius - koranyi_norm(rel)))
            }
            Shape::KoranyiAnnulus { center, r_in, r_out } => {
                let rel = center.inv() * p;
                let g = koranyi_norm(rel);
                let d = match metric {
                    Metric::Koranyi => koranyi_sphere_distance(rel, r_out).min(koranyi_sphere_distance(rel, r_in)),
                    Metric::SubRiemannian => ray_distance(metric, rel, &Exit::Annulus { r_in, r_out }, tol),
                };
                Ok(d.max((r_out - g).min(g - r_in)))
            }
            Shape::Box { lo, hi } => Ok(box_distance(metric, p, lo, hi, tol)),
        }
    }

    /// Conservative, cheap test for `d(p, ∂Ω) > collar` in either metric (`d_s ≥ d_H`).
    ///
    /// Exact in the Korányi metric for the spherical kinds and the puncture; for boxes it
    /// asks that the coordinate box of `B_H(p, collar)` fit inside, which is sufficient
    /// but not necessary.
    pub fn collar_clear(&self, p: Point, collar: f64) -> bool {
        if !self.contains(p) {
            return false;
        }
        match self.shape {
            Shape::PuncturedSpace { puncture, .. } => koranyi_norm(puncture.inv() * p) > collar,
            Shape::KoranyiBall { center, radius } => {
                let rel = center.inv() * p;
                radius - koranyi_norm(rel) > collar || koranyi_sphere_distance(rel, radius) > collar
            }
            Shape::KoranyiAnnulus { center, r_in, r_out } => {
                let rel = center.inv() * p;
                let g = koranyi_norm(rel);
                (r_out - g).min(g - r_in) > collar
                    || koranyi_sphere_distance(rel, r_out).min(koranyi_sphere_distance(rel, r_in)) > collar
            }
            Shape::Box { lo, hi } => {
                let b = Aabb::of_koranyi_ball(p, collar);
                (0..3).all(|k| b.lo[k] > lo[k] && b.hi[k] < hi[k])
            }
        }
    }

    /// Euclidean box enclosing the sampling region.
    pub fn bounding_box(&self) -> Aabb {
        match self.shape {
            Shape::KoranyiBall { center, radius } => Aabb::of_koranyi_ball(center, radius),
            Shape::PuncturedSpace { puncture, window } => Aabb::of_koranyi_ball(puncture, window),
            Shape::KoranyiAnnulus { center, r_out, .. } => Aabb::of_koranyi_ball(center, r_out),
            Shape::Box { lo, hi } => Aabb { lo, hi },
        }
    }

    /// Lebesgue measure of the sampling region (the window ball for the punctured space).
    pub fn sampling_volume(&self) -> f64 {
        let v = |r: f64| 0.5 * PI * PI * r * r * r * r;
        match self.shape {
            Shape::KoranyiBall { radius, .. } => v(radius),
            Shape::PuncturedSpace { window, .. } => v(window),
            Shape::KoranyiAnnulus { r_in, r_out, .. } => v(r_out) - v(r_in),
            Shape::Box { lo, hi } => (0..3).map(|k| hi[k] - lo[k]).product(),
        }
    }

    /// One uniform proposal from the sampling region (no collar check).
    pub fn propose(&self, rng: &mut StreamRng) -> Option<Point> {
        match self.shape {
            Shape::KoranyiBall { center, radius } => gauge_shell(rng, 0.0, radius).map(|q| center * q),
            Shape::PuncturedSpace { puncture, window } => gauge_shell(rng, 0.0, window).map(|q| puncture * q),
            Shape::KoranyiAnnulus { center, r_in, r_out } => gauge_shell(rng, r_in, r_out).map(|q| center * q),
            Shape::Box { lo, hi } => {
                let p = Point::new(
                    lo[0] + (hi[0] - lo[0]) * rng.random::<f64>(),
                    lo[1] + (hi[1] - lo[1]) * rng.random::<f64>(),
                    lo[2] + (hi[2] - lo[2]) * rng.random::<f64>(),
                );
                self.contains(p).then_some(p)
            }
        }
    }

    /// `n` points with `d(p, ∂Ω) > collar`, each drawn from its own stream.
    pub fn sample_interior(&self, n: usize, seed: u64, collar: f64, metric: Metric) -> Result<Vec<Point>> {
        Ok(self.sample_interior_with_distance(n, seed, collar, metric)?.into_iter().map(|(p, _)| p).collect())
    }

    /// As [`Domain::sample_interior`], also returning each point's boundary distance.
    pub fn sample_interior_with_distance(
        &self,
        n: usize,
        seed: u64,
        collar: f64,
        metric: Metric,
    ) -> Result<Vec<(Point, f64)>> {
        if n == 0 {
            return Err(Error::invalid("sample count must be at least 1"));
        }
        if !(collar >= 0.0) {
            return Err(Error::invalid("collar must be nonnegative"));
        }
        if let Shape::KoranyiBall { radius, .. } = self.shape {
            if collar >= radius {
                return Err(Error::SamplingFailure { rate: 0.0, tries: 0 });
            }
        }
        par::try_map_indexed(n, |i| self.sample_one(seed, i as u64, collar, metric))
    }

    fn sample_one(&self, seed: u64, index: u64, collar: f64, metric: Metric) -> Result<(Point, f64)> {
        let mut rng = rng::stream(seed, TAG_INTERIOR, index);
        for _ in 0..MAX_TRIES_PER_POINT {
            let Some(p) = self.propose(&mut rng) else { continue };
            if !self.contains(p) {
                continue;
            }
            let d = self.boundary_distance(p, metric)?;
            if d > collar {
                return Ok((p, d));
            }
        }
        Err(Error::SamplingFailure { rate: 1.0 / MAX_TRIES_PER_POINT as f64, tries: MAX_TRIES_PER_POINT })
    }
}

/// Uniform draw from `{r_in ≤ ‖q‖ < r_out}` via the gauge box `[−R,R]²×[−R²,R²]`.
fn gauge_shell(rng: &mut StreamRng, r_in: f64, r_out: f64) -> Option<Point> {
    let q = Point::new(
        r_out * (2.0 * rng.random::<f64>() - 1.0),
        r_out * (2.0 * rng.random::<f64>() - 1.0),
        r_out * r_out * (2.0 * rng.random::<f64>() - 1.0),
    );
    let g = koranyi_norm(q);
    (g < r_out && g >= r_in).then_some(q)
}
