//! Uniform-grid bucket index over Euclidean bounding boxes, used to prune ball queries.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::Point;

/// Axis-aligned box in exponential coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Aabb {
    /// Euclidean bounding box of the Korányi ball `B(c, r)`; it also bounds `B_s(c, r)`.
    pub fn of_koranyi_ball(c: Point, r: f64) -> Self {
        let dt = r * r + 2.0 * r * (c.x.abs() + c.y.abs());
        Aabb {
            lo: [c.x - r, c.y - r, c.t - dt],
            hi: [c.x + r, c.y + r, c.t + dt],
        }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        let mut out = *self;
        for k in 0..3 {
            out.lo[k] = out.lo[k].min(other.lo[k]);
            out.hi[k] = out.hi[k].max(other.hi[k]);
        }
        out
    }

    pub fn contains(&self, p: Point) -> bool {
        let a = p.to_array();
        (0..3).all(|k| a[k] >= self.lo[k] && a[k] <= self.hi[k])
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|k| self.hi[k] - self.lo[k]).product()
    }
}

/// Buckets item ids into the cells their boxes overlap.
#[derive(Clone, Debug)]
pub struct GridIndex {
    origin: [f64; 3],
    cell: [f64; 3],
    dims: [usize; 3],
    cells: Vec<Vec<u32>>,
}

impl GridIndex {
    /// `bounds` must enclose every box later inserted or queried (queries outside are clamped).
    /// `max_cells` caps the total number of buckets.
    pub fn new(bounds: Aabb, cell: [f64; 3], max_cells: usize) -> Self {
        let mut cell = cell;
        let mut dims = [1usize; 3];
        loop {
            for k in 0..3 {
                let ext = (bounds.hi[k] - bounds.lo[k]).max(f64::MIN_POSITIVE);
                let c = cell[k].max(ext * 1e-9);
                cell[k] = c;
                dims[k] = (libm::ceil(ext / c) as usize).max(1);
            }
            if dims.iter().product::<usize>() <= max_cells.max(1) {
                break;
            }
            for c in cell.iter_mut() {
                *c *= 1.5;
            }
        }
        let total = dims.iter().product();
        GridIndex { origin: bounds.lo, cell, dims, cells: vec![Vec::new(); total] }
    }

    fn coord(&self, k: usize, v: f64) -> usize {
        let i = libm::floor((v - self.origin[k]) / self.cell[k]);
        if i < 0.0 {
            0
        } else {
            (i as usize).min(self.dims[k] - 1)
        }
    }

    fn flat(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + l
    }

    pub fn insert(&mut self, b: &Aabb, id: u32) {
        let (i0, i1) = (self.coord(0, b.lo[0]), self.coord(0, b.hi[0]));
        let (j0, j1) = (self.coord(1, b.lo[1]), self.coord(1, b.hi[1]));
        let (l0, l1) = (self.coord(2, b.lo[2]), self.coord(2, b.hi[2]));
        for i in i0..=i1 {
            for j in j0..=j1 {
                for l in l0..=l1 {
                    let f = self.flat(i, j, l);
                    self.cells[f].push(id);
                }
            }
        }
    }

    /// Ids whose boxes may contain `p`.
    pub fn at_point(&self, p: Point) -> &[u32] {
        let a = p.to_array();
        let f = self.flat(self.coord(0, a[0]), self.coord(1, a[1]), self.coord(2, a[2]));
        &self.cells[f]
    }

    /// Ids whose boxes may intersect `b`, deduplicated and sorted.
    pub fn overlapping(&self, b: &Aabb) -> Vec<u32> {
        let mut out = Vec::new();
        let (i0, i1) = (self.coord(0, b.lo[0]), self.coord(0, b.hi[0]));
        let (j0, j1) = (self.coord(1, b.lo[1]), self.coord(1, b.hi[1]));
        let (l0, l1) = (self.coord(2, b.lo[2]), self.coord(2, b.hi[2]));
        for i in i0..=i1 {
            for j in j0..=j1 {
                for l in l0..=l1 {
                    out.extend_from_slice(&self.cells[self.flat(i, j, l)]);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::koranyi_dist;

    #[test]
    fn ball_box_contains_ball_samples() {
        let c = Point::new(0.7, -1.3, 0.4);
        let r = 0.5;
        let b = Aabb::of_koranyi_ball(c, r);
        let mut n = 0;
        for i in -10..=10 {
            for j in -10..=10 {
                for l in -10..=10 {
                    let q = Point::new(i as f64 * r / 10.0, j as f64 * r / 10.0, l as f64 * r * r / 10.0);
                    let p = c * q;
                    if koranyi_dist(p, c) < r {
                        n += 1;
                        assert!(b.contains(p));
                    }
                }
            }
        }
        assert!(n > 100);
    }

    #[test]
    fn query_finds_inserted() {
        let bounds = Aabb { lo: [0.0; 3], hi: [10.0; 3] };
        let mut g = GridIndex::new(bounds, [1.0; 3], 10_000);
        g.insert(&Aabb { lo: [2.0, 2.0, 2.0], hi: [3.5, 3.5, 3.5] }, 7);
        assert!(g.at_point(Point::new(3.0, 3.0, 3.0)).contains(&7));
        assert!(!g.at_point(Point::new(8.0, 8.0, 8.0)).contains(&7));
        assert_eq!(g.overlapping(&Aabb { lo: [3.0; 3], hi: [9.0; 3] }), alloc::vec![7]);
    }
}
