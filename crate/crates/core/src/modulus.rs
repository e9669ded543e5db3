//! Curve families and numerical 4-modulus of Korányi rings.
//!
//! Upper bounds come from the explicit admissible density `ρ = 1/(‖x‖ log k)`; since
//! the gauge is 1-Lipschitz along rectifiable curves, `∫_γ ρ ds ≥ 1` for every curve
//! joining the two boundary spheres, and `∫ ρ⁴ = 2π² (log k)⁻³` in gauge-polar form.
//!
//! Lower bounds solve the discretised problem
//!
//! ```text
//! minimise Σ_c v_c ρ_c^p   subject to   Σ_c A_γc ρ_c ≥ 1 for each sampled γ,  ρ ≥ 0
//! ```
//!
//! through its concave dual `g(μ) = Σ μ_γ − (p−1) Σ_c v_c (w_c/(p v_c))^{p/(p−1)}`,
//! `w = Aᵀμ`, maximised by exact coordinate ascent. Every `μ ≥ 0` gives `g(μ) ≤` the
//! discrete optimum, so the reported value is a certified lower bound of the
//! discretised problem whatever the number of sweeps.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{horizontal_ring_crossing, sphere_point, Domain};
use crate::error::{Error, Result};
use crate::geometry::{koranyi_ball_volume, koranyi_dist, Curve, Point};
use crate::par;
use crate::rng;
use crate::stats::{pairwise_sum, MeanEstimate};

const TAG_CURVES: u64 = rng::tag("modulus/curves");
const TAG_SHELL: u64 = rng::tag("modulus/shell");

/// `ω₄` as realised by the explicit density: `∫_{1≤‖x‖≤e} ‖x‖⁻⁴ dm = 2π²`.
pub const EXPLICIT_OMEGA4: f64 = 2.0 * PI * PI;

/// One dilation ray among this many curves; the rest are randomised crossings.
const RAY_EVERY: usize = 8;
const LAUNCH_SPREAD: f64 = 0.5;

/// Ring `B(center, k·r) ∖ closure(B(center, r))` in the Korányi metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSpec {
    pub center: Point,
    pub r: f64,
    pub k: f64,
}

impl RingSpec {
    pub fn new(center: Point, r: f64, k: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid("ring radius must be positive"));
        }
        if !(k > 1.0 && k.is_finite()) {
            return Err(Error::invalid("ring ratio k must exceed 1"));
        }
        if !center.is_finite() {
            return Err(Error::invalid("ring center must be finite"));
        }
        Ok(RingSpec { center, r, k })
    }

    pub fn r_out(&self) -> f64 {
        self.k * self.r
    }

    pub fn carrier(&self) -> Result<Domain> {
        Domain::annulus(self.center, self.r, self.r_out())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveFamily {
    pub curves: Vec<Curve>,
    pub p_exp: f64,
    /// Region where densities live.
    pub carrier: Domain,
}

/// Horizontal curves joining the two boundary spheres of the ring.
///
/// Every eighth curve is a dilation ray `s ↦ center·δ_s(q)` through a point `q` of the
/// inner sphere's equator (the only dilation rays that are horizontal, hence
/// rectifiable). The others start at a random point of the inner sphere and follow a
/// random horizontal line from its last visit to the inner sphere to its first exit
/// through the outer one. All of them stay inside the closed ring.
pub fn ring_curve_family(spec: &RingSpec, n_curves: usize, pts_per_curve: usize, seed: u64) -> Result<CurveFamily> {
    if n_curves == 0 {
        return Err(Error::invalid("n_curves must be at least 1"));
    }
    if pts_per_curve < 2 {
        return Err(Error::invalid("pts_per_curve must be at least 2"));
    }
    let spec = *spec;
    let curves = par::try_map_indexed(n_curves, |i| {
        let mut g = rng::stream(seed, TAG_CURVES, i as u64);
        let (q, angle, s0, s1) = if i % RAY_EVERY == 0 {
            let a = 2.0 * PI * g.random::<f64>();
            let q = Point::new(spec.r * libm::cos(a), spec.r * libm::sin(a), 0.0);
            (q, a, 0.0, spec.r_out() - spec.r)
        } else {
            let beta = libm::asin(2.0 * g.random::<f64>() - 1.0);
            let q = sphere_point(spec.r, beta, 2.0 * PI * g.random::<f64>());
            let angle = launch_angle(q, g.random::<f64>(), g.random::<f64>());
            let (s0, s1) = horizontal_ring_crossing(q, angle, spec.r, spec.r_out());
            (q, angle, s0, s1)
        };
        let (c, sn) = (libm::cos(angle), libm::sin(angle));
        let m = pts_per_curve - 1;
        let vertices = (0..=m)
            .map(|j| {
                let s = s0 + (s1 - s0) * j as f64 / m as f64;
                spec.center * (q * Point::new(s * c, s * sn, 0.0))
            })
            .collect();
        Curve::new(vertices)
    })?;
    Ok(CurveFamily { curves, p_exp: 4.0, carrier: spec.carrier()? })
}

/// Direction of the horizontal gauge gradient at `q`, perturbed by a Gaussian angle of
/// standard deviation `LAUNCH_SPREAD` (uniform where the gradient vanishes).
fn launch_angle(q: Point, u1: f64, u2: f64) -> f64 {
    let w = q.planar_sq();
    let (gx, gy) = (w * q.x + q.t * q.y, w * q.y - q.t * q.x);
    if gx == 0.0 && gy == 0.0 {
        return 2.0 * PI * u1;
    }
    let normal = libm::sqrt(-2.0 * libm::log(1.0 - u1)) * libm::cos(2.0 * PI * u2);
    libm::atan2(gy, gx) + LAUNCH_SPREAD * normal
}

/// Monte-Carlo value of `∫_ring ρ⁴ dm` with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperEstimate {
    pub value: f64,
    pub std_error: f64,
    pub shells: usize,
    pub n: usize,
}

/// Upper bound of `mod₄` of the ring from `ρ(x) = 1/(‖center⁻¹x‖ log k)`.
pub fn modulus_upper_explicit(spec: &RingSpec, mc_n: usize, seed: u64) -> Result<f64> {
    Ok(modulus_upper_detail(spec, mc_n, seed)?.value)
}

/// Stratified over gauge shells of ratio at most `√2`; each shell is sampled uniformly
/// by rejection from its gauge box and weighted by its exact volume.
pub fn modulus_upper_detail(spec: &RingSpec, mc_n: usize, seed: u64) -> Result<UpperEstimate> {
    if mc_n < 2 {
        return Err(Error::invalid("mc_n must be at least 2"));
    }
    let log_k = libm::log(spec.k);
    let shells = (libm::ceil(2.0 * libm::log2(spec.k)) as usize).max(1);
    let per = (mc_n / shells).max(2);
    let parts = par::try_map_indexed(shells, |j| {
        let a = spec.r * libm::pow(spec.k, j as f64 / shells as f64);
        let b = spec.r * libm::pow(spec.k, (j + 1) as f64 / shells as f64);
        let mut g = rng::stream(seed, TAG_SHELL, j as u64);
        let mut vals = Vec::with_capacity(per);
        while vals.len() < per {
            let y = Point::new(b * (2.0 * g.random::<f64>() - 1.0), b * (2.0 * g.random::<f64>() - 1.0), b * b * (2.0 * g.random::<f64>() - 1.0));
            let n = y.norm();
            if n >= a && n < b {
                let n2 = n * n;
                vals.push(1.0 / (n2 * n2));
            }
        }
        let vol = koranyi_ball_volume(b)? - koranyi_ball_volume(a)?;
        let m = MeanEstimate::from_samples(&vals, seed);
        Ok((vol * m.value, vol * m.std_error))
    })?;
    let total: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let var: Vec<f64> = parts.iter().map(|p| p.1 * p.1).collect();
    let scale = 1.0 / (log_k * log_k * log_k * log_k);
    Ok(UpperEstimate {
        value: pairwise_sum(&total) * scale,
        std_error: libm::sqrt(pairwise_sum(&var)) * scale,
        shells,
        n: per * shells,
    })
}

/// `ω₄ (log k)⁻³`.
pub fn ring_modulus_reference(k: f64, omega4: f64) -> Result<f64> {
    if !(k > 1.0 && k.is_finite()) {
        return Err(Error::invalid("ring ratio k must exceed 1"));
    }
    if !(omega4 > 0.0 && omega4.is_finite()) {
        return Err(Error::invalid("omega4 must be positive"));
    }
    let l = libm::log(k);
    Ok(omega4 / (l * l * l))
}

/// Result of the sampled-constraint program.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    /// Dual objective: a lower bound of the discrete optimum.
    pub lower: f64,
    /// Objective of the rescaled feasible density built from the final dual point.
    pub primal: f64,
    /// Cells per axis.
    pub grid: usize,
    pub curves: usize,
    /// Cells with positive density (touched by some curve, centre in the carrier).
    pub active_cells: usize,
    pub sweeps: usize,
}

impl LowerBoundReport {
    /// Remaining optimisation gap of the discrete program.
    pub fn gap(&self) -> f64 {
        self.primal - self.lower
    }
}

pub fn modulus_lower_sampled(fam: &CurveFamily, grid: usize, iterations: usize) -> Result<f64> {
    Ok(modulus_lower_detail(fam, grid, iterations)?.lower)
}

/// Constraint row of one curve: `(active cell, length of the curve charged to it)`.
type Row = Vec<(u32, f64)>;

/// `grid` cells per axis over the carrier's bounding box; segments are charged by
/// midpoint to the cell containing them; cells whose centre is outside the carrier
/// carry no density.
pub fn modulus_lower_detail(fam: &CurveFamily, grid: usize, iterations: usize) -> Result<LowerBoundReport> {
    if grid < 8 {
        return Err(Error::config("density grid needs at least 8 cells per axis"));
    }
    if iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    if fam.curves.is_empty() {
        return Err(Error::invalid("curve family is empty"));
    }
    let p = fam.p_exp;
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::config("the sampled program needs an exponent p > 1"));
    }
    let bb = fam.carrier.bounding_box();
    let h: [f64; 3] = core::array::from_fn(|k| (bb.hi[k] - bb.lo[k]) / grid as f64);
    let vol = h[0] * h[1] * h[2];
    let cell_of = |q: [f64; 3]| -> Option<usize> {
        let mut idx = 0;
        for k in 0..3 {
            let i = libm::floor((q[k] - bb.lo[k]) / h[k]);
            if !(i >= 0.0 && i < grid as f64) {
                return None;
            }
            idx = idx * grid + i as usize;
        }
        Some(idx)
    };
    let usable = |c: usize| {
        let (i, j, l) = (c / (grid * grid), (c / grid) % grid, c % grid);
        let centre = |k: usize, n: usize| bb.lo[k] + (n as f64 + 0.5) * h[k];
        fam.carrier.contains(Point::new(centre(0, i), centre(1, j), centre(2, l)))
    };
    let raw: Vec<Vec<(usize, f64)>> = par::map_indexed(fam.curves.len(), |g| {
        let mut row: Vec<(usize, f64)> = Vec::new();
        for (a, b) in fam.curves[g].segments() {
            let mid = [0.5 * (a.x + b.x), 0.5 * (a.y + b.y), 0.5 * (a.t + b.t)];
            if let Some(c) = cell_of(mid) {
                if usable(c) {
                    row.push((c, koranyi_dist(b, a)));
                }
            }
        }
        row.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (c, l) in row {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += l,
                _ => merged.push((c, l)),
            }
        }
        merged
    });
    if let Some(g) = raw.iter().position(|r| r.is_empty()) {
        return Err(Error::config(alloc::format!("curve {g} meets no usable density cell; refine the grid")));
    }
    // Compress cell ids to the active set, in ascending cell order.
    let mut ids: Vec<usize> = raw.iter().flatten().map(|e| e.0).collect();
    ids.sort_unstable();
    ids.dedup();
    let rows: Vec<Row> = raw
        .iter()
        .map(|r| r.iter().map(|&(c, l)| (ids.binary_search(&c).unwrap() as u32, l)).collect())
        .collect();
    let (lower, primal, sweeps) = dual_ascent(&rows, ids.len(), vol, p, iterations);
    Ok(LowerBoundReport { lower, primal, grid, curves: rows.len(), active_cells: ids.len(), sweeps })
}

/// Coordinate ascent on the dual; returns `(dual value, feasible primal value, sweeps)`.
fn dual_ascent(rows: &[Row], cells: usize, vol: f64, p: f64, max_sweeps: usize) -> (f64, f64, usize) {
    let q = 1.0 / (p - 1.0);
    let pv = p * vol;
    let rho = |w: f64| if w > 0.0 { libm::pow(w / pv, q) } else { 0.0 };
    let mut mu = vec![0.0f64; rows.len()];
    let mut w = vec![0.0f64; cells];
    let mut sweeps = 0;
    let mut best = (0.0, f64::INFINITY);
    while sweeps < max_sweeps {
        for (g, row) in rows.iter().enumerate() {
            let old = mu[g];
            let base: Vec<f64> = row.iter().map(|&(c, a)| (w[c as usize] - old * a).max(0.0)).collect();
            let new = solve_coordinate(row, &base, &rho, q, pv);
            if new != old {
                for (&(c, a), &b) in row.iter().zip(&base) {
                    w[c as usize] = b + new * a;
                }
                mu[g] = new;
            }
        }
        sweeps += 1;
        if sweeps % 10 == 0 || sweeps == max_sweeps {
            best = evaluate(rows, &mu, cells, vol, p, &rho);
            if best.1 - best.0 <= 1e-9 * best.1 {
                break;
            }
        }
    }
    (best.0, best.1, sweeps)
}

/// Largest `μ ≥ 0` with `Σ_c A_c ρ(base_c + μ A_c) ≤ 1` (the constraint made tight).
fn solve_coordinate(row: &Row, base: &[f64], rho: &dyn Fn(f64) -> f64, q: f64, pv: f64) -> f64 {
    let h = |m: f64| -> (f64, f64) {
        let mut val = -1.0;
        let mut der = 0.0;
        for (&(_, a), &b) in row.iter().zip(base) {
            let w = b + m * a;
            let r = rho(w);
            val += a * r;
            if w > 0.0 {
                der += a * a * q * r / w;
            }
        }
        (val, der)
    };
    if h(0.0).0 >= 0.0 {
        return 0.0;
    }
    // ρ(base + μA) ≥ ρ(μA) bounds the root from above.
    let s: f64 = row.iter().map(|&(_, a)| a * libm::pow(a / pv, q)).sum();
    let (mut lo, mut hi) = (0.0, libm::pow(s, -1.0 / q));
    let mut m = 0.5 * hi;
    for _ in 0..100 {
        let (v, d) = h(m);
        if v < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let next = m - v / d;
        m = if d > 0.0 && next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    // Return the feasible side so the dual stays monotone.
    hi
}

fn evaluate(rows: &[Row], mu: &[f64], cells: usize, vol: f64, p: f64, rho: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let mut w = vec![0.0f64; cells];
    for (row, &m) in rows.iter().zip(mu) {
        for &(c, a) in row {
            w[c as usize] += m * a;
        }
    }
    let r: Vec<f64> = w.iter().map(|&x| rho(x)).collect();
    let energy: Vec<f64> = r.iter().map(|&x| vol * libm::pow(x, p)).collect();
    let energy = pairwise_sum(&energy);
    let dual = pairwise_sum(mu) - (p - 1.0) * energy;
    let worst = rows
        .iter()
        .map(|row| row.iter().map(|&(c, a)| a * r[c as usize]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let primal = if worst > 0.0 { energy / libm::pow(worst, p) } else { f64::INFINITY };
    (dual.max(0.0), primal)
}

/// Both bounds for one ring; serialises as the modulus report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusBounds {
    pub spec: RingSpec,
    pub upper: f64,
    pub upper_std_error: f64,
    pub lower: f64,
    pub lower_primal: f64,
    pub grid: usize,
    pub curves: usize,
    /// Three standard errors of `upper` plus the remaining optimisation gap.
    pub slack: f64,
    pub reference: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn modulus_bounds(
    spec: &RingSpec,
    n_curves: usize,
    pts_per_curve: usize,
    grid: usize,
    iterations: usize,
    mc_n: usize,
    seed: u64,
) -> Result<ModulusBounds> {
    let up = modulus_upper_detail(spec, mc_n, seed)?;
    let fam = ring_curve_family(spec, n_curves, pts_per_curve, seed)?;
    let low = modulus_lower_detail(&fam, grid, iterations)?;
    Ok(ModulusBounds {
        spec: *spec,
        upper: up.value,
        upper_std_error: up.std_error,
        lower: low.lower,
        lower_primal: low.primal,
        grid,
        curves: n_curves,
        slack: 3.0 * up.std_error + low.gap().max(0.0),
        reference: ring_modulus_reference(spec.k, EXPLICIT_OMEGA4)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::E;

    fn ring(k: f64) -> RingSpec {
        RingSpec::new(Point::ORIGIN, 1.0, k).unwrap()
    }

    #[test]
    fn family_curves_cross_the_ring() {
        let spec = RingSpec::new(Point::new(0.3, -0.2, 0.5), 0.7, 3.0).unwrap();
        let fam = ring_curve_family(&spec, 64, 40, 9).unwrap();
        for c in &fam.curves {
            let v = c.vertices();
            let g = |p: Point| (spec.center.inv() * p).norm();
            assert!((g(v[0]) - spec.r).abs() < 1e-9);
            assert!((g(*v.last().unwrap()) - spec.r_out()).abs() < 1e-9);
            for &p in v {
                assert!(g(p) >= spec.r - 1e-9 && g(p) <= spec.r_out() + 1e-9);
            }
        }
        assert_eq!(fam, ring_curve_family(&spec, 64, 40, 9).unwrap());
    }

    #[test]
    fn ray_length_is_ring_width() {
        let spec = ring(4.0);
        let fam = ring_curve_family(&spec, 1, 17, 0).unwrap();
        assert!((fam.curves[0].length() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn upper_matches_polar_integral() {
        let v = modulus_upper_explicit(&ring(E), 40_000, 1).unwrap();
        assert!((v / EXPLICIT_OMEGA4 - 1.0).abs() < 0.01, "{v}");
        let (a, b) = (modulus_upper_explicit(&ring(3.0), 40_000, 2).unwrap(), modulus_upper_explicit(&ring(9.0), 40_000, 3).unwrap());
        assert!((b / a / 0.125 - 1.0).abs() < 0.02);
        let big = RingSpec::new(Point::new(4.0, 1.0, -3.0), 10.0, 3.0).unwrap();
        let c = modulus_upper_explicit(&big, 40_000, 2).unwrap();
        assert!((c / a - 1.0).abs() < 0.01);
    }

    #[test]
    fn reference_algebra() {
        assert!((ring_modulus_reference(E, EXPLICIT_OMEGA4).unwrap() - EXPLICIT_OMEGA4).abs() < 1e-12);
        let (a, b) = (ring_modulus_reference(3.0, 1.0).unwrap(), ring_modulus_reference(9.0, 1.0).unwrap());
        assert!((b - a / 8.0).abs() < 1e-14);
        assert!(ring_modulus_reference(1.0, 1.0).is_err());
    }

    #[test]
    fn single_segment_matches_tube_closed_form() {
        // 8³ grid of cube cells of side 1/8; the segment runs along the centre row of
        // cells, covering six of them completely: optimum (Σ ℓ^{4/3} v^{-1/3})^{-3} = 1/27.
        let dom = Domain::coordinate_box([0.0, -1.0 / 16.0, 0.0], [1.0, 15.0 / 16.0, 1.0]).unwrap();
        let seg = Curve::horizontal_segment(Point::new(0.125, 0.0, 9.0 / 16.0), 0.0, 0.75, 48).unwrap();
        let fam = CurveFamily { curves: vec![seg], p_exp: 4.0, carrier: dom };
        let rep = modulus_lower_detail(&fam, 8, 5).unwrap();
        assert_eq!(rep.active_cells, 6);
        assert!((rep.lower - 1.0 / 27.0).abs() < 1e-12, "{rep:?}");
        assert!((rep.primal - 1.0 / 27.0).abs() < 1e-12);
    }

    #[test]
    fn lower_is_monotone_and_below_upper() {
        let spec = ring(2.0);
        let small = ring_curve_family(&spec, 32, 64, 4).unwrap();
        let mut large = small.clone();
        large.curves.extend(ring_curve_family(&spec, 96, 64, 5).unwrap().curves);
        let a = modulus_lower_detail(&small, 16, 300).unwrap();
        let b = modulus_lower_detail(&large, 16, 300).unwrap();
        assert!(b.lower >= a.lower * (1.0 - 1e-6), "{a:?} {b:?}");
        assert!(a.lower <= a.primal * (1.0 + 1e-12));
        let up = modulus_upper_explicit(&spec, 20_000, 1).unwrap();
        assert!(b.lower <= up);
        assert!(modulus_lower_detail(&small, 4, 10).is_err());
    }
}
