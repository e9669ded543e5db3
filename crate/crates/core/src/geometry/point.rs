use core::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of H¹ in exponential coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0, t: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Point { x, y, t }
    }

    pub fn try_new(x: f64, y: f64, t: f64) -> Result<Self> {
        let p = Point { x, y, t };
        if p.is_finite() {
            Ok(p)
        } else {
            Err(Error::invalid("point coordinates must be finite"))
        }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }

    /// `(x, y, t)⁻¹ = (−x, −y, −t)`.
    #[inline]
    pub fn inv(self) -> Self {
        Point::new(-self.x, -self.y, -self.t)
    }

    /// `δ_λ(x, y, t) = (λx, λy, λ²t)`; no check on `λ`.
    #[inline]
    pub fn dilated(self, lambda: f64) -> Self {
        Point::new(lambda * self.x, lambda * self.y, lambda * lambda * self.t)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        koranyi_norm(self)
    }

    /// Squared horizontal radius `x² + y²`.
    #[inline]
    pub fn planar_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.t]
    }
}

impl Mul for Point {
    type Output = Point;

    /// `(x,y,t)(x',y',t') = (x+x', y+y', t+t' − 2xy' + 2x'y)`.
    #[inline]
    fn mul(self, q: Point) -> Point {
        Point::new(
            self.x + q.x,
            self.y + q.y,
            self.t + q.t - 2.0 * self.x * q.y + 2.0 * q.x * self.y,
        )
    }
}

impl TryFrom<[f64; 3]> for Point {
    type Error = Error;

    fn try_from(a: [f64; 3]) -> Result<Self> {
        Point::try_new(a[0], a[1], a[2])
    }
}

impl From<Point> for [f64; 3] {
    fn from(p: Point) -> Self {
        p.to_array()
    }
}

#[inline]
pub fn group_mul(p: Point, q: Point) -> Point {
    p * q
}

#[inline]
pub fn group_inv(p: Point) -> Point {
    p.inv()
}

pub fn dilate(lambda: f64, p: Point) -> Result<Point> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("dilation factor must be positive and finite"));
    }
    Ok(p.dilated(lambda))
}

/// Quartic gauge `((x² + y²)² + t²)^{1/4}`.
#[inline]
pub fn koranyi_norm(p: Point) -> f64 {
    let r2 = p.planar_sq();
    libm::sqrt(libm::hypot(r2, p.t))
}
