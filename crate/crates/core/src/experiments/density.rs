//! Discrete density metrics on a Cayley lattice and Ahlfors-regularity audits.
//!
//! Nodes are the points `p₀·δ_h(i, j, k/2)` (`i, j, k ∈ ℤ`) inside the collar-restricted
//! domain. Since `{(i, j, k/2)}` is a subgroup, `n·δ_h(s)` is again a node for every
//! lattice element `s = (a, b, c/2)`; from `(i, j, k)` it sits at
//! `(i+a, j+b, k + c + 4(aj − ib))`. The stencil is every `s` with `d_s(0, s) ≤ STENCIL_RADIUS`
//! that is not split exactly by two shorter stencil steps, and an edge costs
//! `h·d_s(0, s)`, its exact sub-Riemannian length, times the mean of `ρ` at its ends.
//! For `ρ ≡ 1` graph distances therefore never undercut `d_s`. The Haar volume of one
//! lattice cell is `h⁴/2`.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::geometry::{Metric, Point};
use crate::integrate::ScalarField;
use crate::par;
use crate::rng;
use crate::stats::ls_slope;

const TAG_LATTICE: u64 = rng::tag("density/lattice");
const NONE: u32 = u32::MAX;

/// Stencil radius in lattice units of the sub-Riemannian metric.
pub const STENCIL_RADIUS: f64 = 4.0;

/// A step is dropped when two shorter steps compose to it within this relative excess,
/// so pruning inflates graph distances by at most this factor.
pub const PRUNE_SLACK: f64 = 1e-2;

/// Lattice steps `(a, b, c)` ↔ `(a, b, c/2)` with their sub-Riemannian lengths.
fn stencil(radius: f64) -> Result<Vec<(i64, i64, i64, f64)>> {
    // d_s ≥ d_H bounds the search box: |a|, |b| ≤ R and |c/2| ≤ R².
    let m = libm::ceil(radius) as i64;
    let mc = libm::ceil(2.0 * radius * radius) as i64;
    let mut all = Vec::new();
    for a in -m..=m {
        for b in -m..=m {
            for c in -mc..=mc {
                if (a, b, c) == (0, 0, 0) {
                    continue;
                }
                let len = Metric::SubRiemannian.norm(Point::new(a as f64, b as f64, 0.5 * c as f64))?;
                if len <= radius {
                    all.push((a, b, c, len));
                }
            }
        }
    }
    let (w, wc) = (2 * m + 1, 2 * mc + 1);
    let mut table = vec![f64::NAN; (w * w * wc) as usize];
    let at = |a: i64, b: i64, c: i64| {
        (a.abs() <= m && b.abs() <= m && c.abs() <= mc).then(|| (((a + m) * w + b + m) * wc + c + mc) as usize)
    };
    for &(a, b, c, len) in &all {
        table[at(a, b, c).unwrap()] = len;
    }
    let lookup = |a: i64, b: i64, c: i64| at(a, b, c).map(|i| table[i]).filter(|l| !l.is_nan());
    let keep: Vec<bool> = all
        .iter()
        .map(|&(a, b, c, len)| {
            // s = s₁·s₂ with s₂ = s₁⁻¹·s: (a−a₁, b−b₁, c−c₁ − 4(a₁(b−b₁) − (a−a₁)b₁)).
            !all.iter().any(|&(a1, b1, c1, l1)| {
                let (a2, b2) = (a - a1, b - b1);
                let c2 = c - c1 - 4 * (a1 * b2 - a2 * b1);
                (a2, b2, c2) != (0, 0, 0) && lookup(a2, b2, c2).is_some_and(|l2| l1 + l2 <= len * (1.0 + PRUNE_SLACK))
            })
        })
        .collect();
    Ok(all.into_iter().zip(keep).filter(|e| e.1).map(|e| e.0).collect())
}

pub struct DensityMetricGraph {
    /// Lattice spacing `h`.
    pub resolution: f64,
    pub origin: Point,
    pub collar: f64,
    pub rho_name: String,
    nodes: Vec<Point>,
    keys: Vec<[i64; 3]>,
    rho: Vec<f64>,
    // Dense slot table over columns (i, j), each covering a contiguous k range.
    i_range: (i64, i64),
    j_range: (i64, i64),
    col_kmin: Vec<i64>,
    col_start: Vec<usize>,
    slots: Vec<u32>,
    steps: Vec<(i64, i64, i64, f64)>,
}

impl DensityMetricGraph {
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn rho_at(&self, i: usize) -> f64 {
        self.rho[i]
    }

    /// Haar volume represented by each node.
    pub fn cell_volume(&self) -> f64 {
        let h2 = self.resolution * self.resolution;
        0.5 * h2 * h2
    }

    fn slot(&self, key: [i64; 3]) -> Option<usize> {
        let [i, j, k] = key;
        if i < self.i_range.0 || i > self.i_range.1 || j < self.j_range.0 || j > self.j_range.1 {
            return None;
        }
        let nj = (self.j_range.1 - self.j_range.0 + 1) as usize;
        let c = (i - self.i_range.0) as usize * nj + (j - self.j_range.0) as usize;
        let off = k - self.col_kmin[c];
        let len = (self.col_start[c + 1] - self.col_start[c]) as i64;
        (off >= 0 && off < len).then(|| self.col_start[c] + off as usize)
    }

    fn node_at(&self, key: [i64; 3]) -> Option<usize> {
        self.slot(key).map(|s| self.slots[s]).filter(|&n| n != NONE).map(|n| n as usize)
    }

    /// Neighbours of node `u` with edge weights.
    pub fn neighbours(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let [i, j, k] = self.keys[u];
        let h = self.resolution;
        self.steps.iter().filter_map(move |&(a, b, c, len)| {
            let v = self.node_at([i + a, j + b, k + c + 4 * (a * j - i * b)])?;
            Some((v, h * len * 0.5 * (self.rho[u] + self.rho[v])))
        })
    }

    /// All edges `(u, v, weight)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nodes.len()).flat_map(move |u| self.neighbours(u).filter(move |&(v, _)| u < v).map(move |(v, w)| (u, v, w)))
    }

    /// Lattice node closest to `p` in lattice coordinates, if it belongs to the graph.
    pub fn nearest_node(&self, p: Point) -> Option<usize> {
        let h = self.resolution;
        let rel = self.origin.inv() * p;
        let i = libm::round(rel.x / h) as i64;
        let j = libm::round(rel.y / h) as i64;
        let snapped = Point::new(i as f64 * h, j as f64 * h, 0.0);
        let k = libm::round((snapped.inv() * rel).t * 2.0 / (h * h)) as i64;
        self.node_at([i, j, k])
    }

    /// Single-source shortest paths (Dijkstra; ties broken by node index).
    pub fn shortest_from(&self, source: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Entry(f64, u32);
        impl Eq for Entry {}
        impl PartialOrd for Entry {
            fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
                Some(self.cmp(o))
            }
        }
        impl Ord for Entry {
            fn cmp(&self, o: &Self) -> Ordering {
                o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
            }
        }
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry(0.0, source as u32));
        while let Some(Entry(d, u)) = heap.pop() {
            let u = u as usize;
            if d > dist[u] {
                continue;
            }
            for (v, w) in self.neighbours(u) {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Entry(nd, v as u32));
                }
            }
        }
        dist
    }

    /// Graph distance between the nodes nearest to `p` and `q`.
    pub fn distance(&self, p: Point, q: Point) -> Result<f64> {
        let a = self.nearest_node(p).ok_or_else(|| Error::invalid(format!("{p:?} is not near a graph node")))?;
        let b = self.nearest_node(q).ok_or_else(|| Error::invalid(format!("{q:?} is not near a graph node")))?;
        Ok(self.shortest_from(a)[b])
    }
}

/// Build the lattice graph of spacing `resolution` on `{d(x, ∂Ω) > collar}` (tested by
/// [`Domain::collar_clear`]) with node densities `rho`. The lattice origin is a random
/// offset from `seed`.
pub fn density_graph_build(dom: &Domain, rho: &dyn ScalarField, resolution: f64, collar: f64, seed: u64) -> Result<DensityMetricGraph> {
    let h = resolution;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("resolution must be positive"));
    }
    if !(collar >= 0.0) {
        return Err(Error::invalid("collar must be nonnegative"));
    }
    let mut g = rng::stream(seed, TAG_LATTICE, 0);
    let origin = Point::new(h * g.random::<f64>(), h * g.random::<f64>(), 0.5 * h * h * g.random::<f64>());
    let bb = dom.bounding_box();
    let i_range = (libm::floor((bb.lo[0] - origin.x) / h) as i64, libm::ceil((bb.hi[0] - origin.x) / h) as i64);
    let j_range = (libm::floor((bb.lo[1] - origin.y) / h) as i64, libm::ceil((bb.hi[1] - origin.y) / h) as i64);
    let (ni, nj) = ((i_range.1 - i_range.0 + 1) as usize, (j_range.1 - j_range.0 + 1) as usize);
    let dt = 0.5 * h * h;
    let mut col_kmin = Vec::with_capacity(ni * nj);
    let mut col_start = Vec::with_capacity(ni * nj + 1);
    col_start.push(0usize);
    for i in i_range.0..=i_range.1 {
        for j in j_range.0..=j_range.1 {
            // t of p₀·δ_h(i, j, k/2) is base + k·dt.
            let base = origin.t + 2.0 * h * (i as f64 * origin.y - j as f64 * origin.x);
            let k0 = libm::ceil((bb.lo[2] - base) / dt) as i64;
            let k1 = libm::floor((bb.hi[2] - base) / dt) as i64;
            col_kmin.push(k0);
            col_start.push(col_start.last().unwrap() + (k1 - k0 + 1).max(0) as usize);
        }
    }
    let total = *col_start.last().unwrap();
    if total > u32::MAX as usize / 2 {
        return Err(Error::config("lattice too fine for this domain; increase resolution"));
    }
    // Membership per column, in slot order.
    let cols = par::map_indexed(ni * nj, |c| {
        let i = i_range.0 + (c / nj) as i64;
        let j = j_range.0 + (c % nj) as i64;
        let len = col_start[c + 1] - col_start[c];
        (0..len as i64)
            .filter_map(|off| {
                let k = col_kmin[c] + off;
                let p = origin * Point::new(i as f64 * h, j as f64 * h, k as f64 * dt);
                dom.collar_clear(p, collar).then_some(([i, j, k], p))
            })
            .collect::<Vec<_>>()
    });
    let mut graph = DensityMetricGraph {
        resolution: h,
        origin,
        collar,
        rho_name: rho.name(),
        nodes: Vec::new(),
        keys: Vec::new(),
        rho: Vec::new(),
        i_range,
        j_range,
        col_kmin,
        col_start,
        slots: vec![NONE; total],
        steps: stencil(STENCIL_RADIUS)?,
    };
    for (key, p) in cols.into_iter().flatten() {
        let s = graph.slot(key).expect("lattice key inside its own table");
        graph.slots[s] = graph.nodes.len() as u32;
        graph.keys.push(key);
        graph.nodes.push(p);
    }
    if graph.nodes.is_empty() {
        return Err(Error::config("no lattice node beyond the collar; decrease resolution"));
    }
    let nodes = &graph.nodes;
    graph.rho = par::try_map_indexed(nodes.len(), |i| {
        let v = rho.eval(nodes[i])?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::invalid(format!("density must be positive and finite, got {v} at {:?}", nodes[i])))
        }
    })?;
    // Connectivity: every node reachable from node 0.
    let mut seen = vec![false; graph.nodes.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for (v, _) in graph.neighbours(u) {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    if count != graph.nodes.len() {
        return Err(Error::config(format!(
            "density graph is disconnected ({count} of {} nodes reachable); use a finer resolution",
            graph.nodes.len()
        )));
    }
    Ok(graph)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AhlforsReport {
    pub x: Point,
    pub radii: Vec<f64>,
    /// `μ_ρ(B_ρ(x, r)) = ∫_{B_ρ} ρ⁴ dm` per radius.
    pub mu_rho: Vec<f64>,
    /// Least-squares slope of `log μ` against `log r`.
    pub loglog_slope: f64,
    /// `max μ/r⁴` and `min μ/r⁴`.
    pub upper_constant: f64,
    pub lower_constant: f64,
}

/// `μ_ρ` of graph balls around `x`, by lattice quadrature (each node carries `ρ⁴·h⁴/2`).
///
/// Radii must be at least three lattice steps in the `ρ` metric.
pub fn ahlfors_audit(g: &DensityMetricGraph, x: Point, radii: &[f64]) -> Result<AhlforsReport> {
    if radii.len() < 2 {
        return Err(Error::invalid("need at least two radii"));
    }
    let rho_min = g.rho.iter().copied().fold(f64::INFINITY, f64::min);
    let floor = 3.0 * g.resolution * rho_min * (1.0 - 1e-12);
    if let Some(r) = radii.iter().find(|&&r| !(r >= floor && r.is_finite())) {
        return Err(Error::invalid(format!("radius {r} is below the resolved range (≥ {floor})")));
    }
    let src = g.nearest_node(x).ok_or_else(|| Error::invalid(format!("{x:?} is not near a graph node")))?;
    let d = g.shortest_from(src);
    let cell = g.cell_volume();
    let mu: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let w: Vec<f64> = (0..d.len()).filter(|&i| d[i] < r).map(|i| libm::pow(g.rho[i], 4.0) * cell).collect();
            crate::stats::pairwise_sum(&w)
        })
        .collect();
    let lr: Vec<f64> = radii.iter().map(|&r| libm::log(r)).collect();
    let lm: Vec<f64> = mu.iter().map(|&m| libm::log(m)).collect();
    let c: Vec<f64> = mu.iter().zip(radii).map(|(m, r)| m / libm::pow(*r, 4.0)).collect();
    Ok(AhlforsReport {
        x: g.nodes[src],
        radii: radii.to_vec(),
        loglog_slope: ls_slope(&lr, &lm),
        upper_constant: c.iter().copied().fold(0.0, f64::max),
        lower_constant: c.iter().copied().fold(f64::INFINITY, f64::min),
        mu_rho: mu,
    })
}
