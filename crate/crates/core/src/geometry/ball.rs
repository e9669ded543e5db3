use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{dist, Metric, Point};
use crate::error::{Error, Result};

/// Lebesgue volume of `B_s(0, 1)`, the unit sub-Riemannian ball.
///
/// Obtained by integrating the maximal height `(φ − sin φ cos φ)/φ²` reachable over
/// chord `sin φ / φ`; see the geodesic module for the arc relations.
const SUB_RIEMANNIAN_UNIT_VOLUME: f64 = 3.303_503_048_836_701;

/// An open metric ball `B(center, radius)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
    #[serde(default)]
    pub metric: Metric,
}

impl Ball {
    pub fn new(center: Point, radius: f64, metric: Metric) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("ball radius must be positive and finite"));
        }
        if !center.is_finite() {
            return Err(Error::invalid("ball center must be finite"));
        }
        Ok(Ball { center, radius, metric })
    }

    /// `mB = B(x, m·r)`.
    pub fn scaled(&self, m: f64) -> Result<Self> {
        Ball::new(self.center, m * self.radius, self.metric)
    }

    pub fn contains(&self, p: Point) -> Result<bool> {
        Ok(dist(self.metric, p, self.center)? < self.radius)
    }

    /// Haar (Lebesgue) measure of the ball.
    pub fn volume(&self) -> f64 {
        match self.metric {
            Metric::Koranyi => koranyi_ball_volume_unchecked(self.radius),
            Metric::SubRiemannian => SUB_RIEMANNIAN_UNIT_VOLUME * libm::pow(self.radius, 4.0),
        }
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }
}

fn koranyi_ball_volume_unchecked(r: f64) -> f64 {
    let r2 = r * r;
    0.5 * PI * PI * r2 * r2
}

/// `|B_H(x, r)| = π² r⁴ / 2`.
pub fn koranyi_ball_volume(r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid("ball radius must be positive and finite"));
    }
    Ok(koranyi_ball_volume_unchecked(r))
}

pub fn sub_riemannian_unit_ball_volume() -> f64 {
    SUB_RIEMANNIAN_UNIT_VOLUME
}
