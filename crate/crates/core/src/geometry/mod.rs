//! Group law, dilations and the two canonical left-invariant metrics of H¹.

mod ball;
mod curve;
mod geodesic;
mod point;

pub use ball::{koranyi_ball_volume, sub_riemannian_unit_ball_volume, Ball};
pub use curve::{curve_length, Curve};
pub use geodesic::{sub_riemannian_norm, GEODESIC_TOL};
pub(crate) use geodesic::u_minus_sin;
pub use point::{dilate, group_inv, group_mul, koranyi_norm, Point};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Which left-invariant homogeneous distance a ball or audit refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// `d(p, q) = ‖q⁻¹p‖` with the quartic gauge.
    #[default]
    Koranyi,
    /// Length metric of horizontal curves; the length metric of the Korányi distance.
    SubRiemannian,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Koranyi, Metric::SubRiemannian];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Koranyi => "koranyi",
            Metric::SubRiemannian => "sub-riemannian",
        }
    }

    /// Distance of `g` from the origin.
    pub fn norm(self, g: Point) -> Result<f64> {
        match self {
            Metric::Koranyi => Ok(koranyi_norm(g)),
            Metric::SubRiemannian => sub_riemannian_norm(g),
        }
    }
}

/// `dist(metric, p, q) = norm(q⁻¹·p)`.
///
/// Symmetric because both norms satisfy `‖g⁻¹‖ = ‖g‖`; left-invariant because
/// `(hq)⁻¹(hp) = q⁻¹p`.
pub fn dist(metric: Metric, p: Point, q: Point) -> Result<f64> {
    metric.norm(q.inv() * p)
}

/// Korányi distance; infallible shortcut used in hot loops.
#[inline]
pub fn koranyi_dist(p: Point, q: Point) -> f64 {
    koranyi_norm(q.inv() * p)
}
