use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{koranyi_dist, Point};
use crate::error::{Error, Result};

/// A polyline in H¹. Lengths are measured with the Korányi distance between
/// consecutive vertices; rectifiable curves have the same length for `d_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Curve {
    vertices: Vec<Point>,
}

impl Curve {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::invalid("a curve needs at least two vertices"));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("curve vertices must be finite"));
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("consecutive curve vertices must be distinct"));
        }
        Ok(Curve { vertices })
    }

    /// Straight horizontal segment `p·(s·u)` for `s ∈ [0, len]`, with `u` a unit planar direction.
    pub fn horizontal_segment(p: Point, angle: f64, len: f64, pieces: usize) -> Result<Self> {
        if !(len > 0.0) || pieces == 0 {
            return Err(Error::invalid("segment needs positive length and at least one piece"));
        }
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        let vertices = (0..=pieces)
            .map(|i| {
                let step = len * i as f64 / pieces as f64;
                p * Point::new(step * c, step * s, 0.0)
            })
            .collect();
        Curve::new(vertices)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        curve_length(self)
    }

    /// Apply `f` to every vertex.
    pub fn map_vertices(&self, mut f: impl FnMut(Point) -> Result<Point>) -> Result<Curve> {
        let vertices = self.vertices.iter().map(|&p| f(p)).collect::<Result<Vec<_>>>()?;
        Curve::new(vertices)
    }

    /// Max pairwise Korányi distance between vertices.
    pub fn vertex_diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut best = 0.0f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                best = best.max(koranyi_dist(v[i], v[j]));
            }
        }
        best
    }
}

impl TryFrom<Vec<Point>> for Curve {
    type Error = Error;

    fn try_from(v: Vec<Point>) -> Result<Self> {
        Curve::new(v)
    }
}

impl From<Curve> for Vec<Point> {
    fn from(c: Curve) -> Self {
        c.vertices
    }
}

pub fn curve_length(gamma: &Curve) -> f64 {
    gamma.segments().map(|(a, b)| koranyi_dist(b, a)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dist, Metric};
    use alloc::vec;

    #[test]
    fn length_examples() {
        let c = Curve::new(vec![Point::ORIGIN, Point::new(1.0, 0.0, 0.0), Point::new(2.0, 0.0, 0.0)]).unwrap();
        assert_eq!(c.length(), 2.0);
        let p = Point::new(0.1, 0.2, 0.3);
        let q = Point::new(-0.4, 0.5, 1.0);
        let single = Curve::new(vec![p, q]).unwrap();
        assert_eq!(single.length(), dist(Metric::Koranyi, p, q).unwrap());
    }

    #[test]
    fn rejects_degenerate() {
        assert!(Curve::new(vec![Point::ORIGIN]).is_err());
        assert!(Curve::new(vec![Point::ORIGIN, Point::ORIGIN]).is_err());
    }

    #[test]
    fn dilation_scales_length() {
        let c = Curve::new(vec![Point::new(0.0, 0.0, 1.0), Point::new(1.0, -1.0, 0.5), Point::new(2.0, 0.3, -0.2)])
            .unwrap();
        let d = c.map_vertices(|p| Ok(p.dilated(2.5))).unwrap();
        assert!((d.length() - 2.5 * c.length()).abs() < 1e-12);
    }

    #[test]
    fn horizontal_segment_has_euclidean_length() {
        let c = Curve::horizontal_segment(Point::new(0.3, -0.2, 0.7), 0.4, 1.5, 10).unwrap();
        assert!((c.length() - 1.5).abs() < 1e-12);
    }
}
