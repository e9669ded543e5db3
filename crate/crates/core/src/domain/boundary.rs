//! Boundary-distance oracles.
//!
//! Korányi distance to a gauge sphere reduces to a 1-D search over latitude (the
//! azimuthal minimum is explicit). Everything else is ray casting: for `p ∈ Ω`,
//! `d(p, ∂Ω) = min_u τ(u)` over the unit sphere of the metric, where `τ(u)` is the first
//! exit time of `s ↦ p·δ_s(u)`. Along such a ray `x, y` are linear, `t` quadratic and the
//! gauge⁴ quartic in `s`, so every exit time is the first root of a low-degree polynomial.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geometry::{koranyi_norm, u_minus_sin, Metric, Point};

/// Where a ray leaves the region (coordinates relative to the centre for the spherical kinds).
pub(super) enum Exit {
    Ball { radius: f64 },
    Annulus { r_in: f64, r_out: f64 },
    Box { lo: [f64; 3], hi: [f64; 3] },
}

/// Point of the gauge sphere of radius `r` at latitude `beta ∈ [−π/2, π/2]`, azimuth `psi`.
pub(crate) fn sphere_point(r: f64, beta: f64, psi: f64) -> Point {
    let rho = r * libm::sqrt(libm::cos(beta).max(0.0));
    Point::new(rho * libm::cos(psi), rho * libm::sin(psi), r * r * libm::sin(beta))
}

/// Unit sub-Riemannian sphere: endpoint of the unit-length geodesic with arc half-angle
/// `phi ∈ [−π, π]` (sign selects the sign of `t`) and chord direction `alpha`.
fn sr_sphere_point(phi: f64, alpha: f64) -> Point {
    let (c, t) = if phi == 0.0 {
        (1.0, 0.0)
    } else {
        (libm::sin(phi) / phi, u_minus_sin(2.0 * phi) / (2.0 * phi * phi))
    };
    Point::new(c * libm::cos(alpha), c * libm::sin(alpha), t)
}

fn unit_sphere(metric: Metric, a: f64, b: f64) -> Point {
    match metric {
        Metric::Koranyi => sphere_point(1.0, a, b),
        Metric::SubRiemannian => sr_sphere_point(a, b),
    }
}

/// Unit-sphere point at chart coordinates `(u, v) ∈ [0,1]²`; `u = ½` is the equator.
pub(crate) fn sphere_chart(metric: Metric, u: f64, v: f64) -> Point {
    let (lo, hi) = chart(metric);
    unit_sphere(metric, lo[0] + (hi[0] - lo[0]) * u, lo[1] + (hi[1] - lo[1]) * v)
}

fn chart(metric: Metric) -> ([f64; 2], [f64; 2]) {
    match metric {
        Metric::Koranyi => ([-0.5 * PI, 0.0], [0.5 * PI, 2.0 * PI]),
        Metric::SubRiemannian => ([-PI, 0.0], [PI, 2.0 * PI]),
    }
}

/// Squared Korányi distance from `p` to the latitude circle `β` of the sphere of radius `r`.
///
/// With `m = |p_z|`, `ρ² = r² cos β`, `A = m² + ρ²`, `B = 2ρm`, `D = p_t − r² sin β`, the
/// azimuthal minimum of `‖z⁻¹p‖⁴` is `(√(A² + D²) − B)²`; since `A² − B² = (m² − ρ²)²`
/// the difference is evaluated without cancellation.
fn latitude_gap(m: f64, pt: f64, r: f64, beta: f64) -> f64 {
    let rho2 = r * r * libm::cos(beta).max(0.0);
    let a = m * m + rho2;
    let b = 2.0 * m * libm::sqrt(rho2);
    let d = pt - r * r * libm::sin(beta);
    let diff = m * m - rho2;
    (diff * diff + d * d) / (libm::hypot(a, d) + b)
}

/// Korányi distance from `p` to the gauge sphere `‖z‖ = r`.
pub(super) fn koranyi_sphere_distance(p: Point, r: f64) -> f64 {
    const GRID: usize = 96;
    let m = libm::sqrt(p.planar_sq());
    let g = |beta: f64| latitude_gap(m, p.t, r, beta);
    let h = PI / GRID as f64;
    let vals: Vec<f64> = (0..=GRID).map(|i| g(-0.5 * PI + h * i as f64)).collect();
    // Refine every grid-local minimum over its two neighbouring cells.
    let mut best = f64::INFINITY;
    for i in 0..=GRID {
        let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
        let right = if i < GRID { vals[i + 1] } else { f64::INFINITY };
        if vals[i] > left || vals[i] > right {
            continue;
        }
        let lo = (-0.5 * PI + h * (i as f64 - 1.0)).max(-0.5 * PI);
        let hi = (-0.5 * PI + h * (i as f64 + 1.0)).min(0.5 * PI);
        best = best.min(vals[i]).min(golden_min(&g, lo, hi));
    }
    libm::sqrt(best)
}

fn golden_min(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    let mut best = gc.min(gd).min(g(a)).min(g(b));
    while b - a > 1e-11 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
        best = best.min(gc).min(gd);
    }
    best
}

// ---- polynomials (ascending coefficients, degree ≤ 4) ----

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * s + k)
}

fn degree(c: &[f64]) -> usize {
    c.iter().rposition(|&k| k != 0.0).unwrap_or(0)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, &k)| i as f64 * k).collect()
}

/// Root of a polynomial that is monotone on `[a, b]` with a sign change there.
fn bisect(c: &[f64], mut a: f64, mut b: f64) -> f64 {
    let fa = horner(c, a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = horner(c, m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sorted real roots in the open interval `(lo, hi)`.
fn roots_in(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let c = &c[..=degree(c)];
    let mut out = Vec::new();
    match c.len() {
        0 | 1 => {}
        2 => {
            let r = -c[0] / c[1];
            if r > lo && r < hi {
                out.push(r);
            }
        }
        _ => {
            let mut cuts = Vec::with_capacity(c.len());
            cuts.push(lo);
            cuts.extend(roots_in(&derivative(c), lo, hi));
            cuts.push(hi);
            for w in cuts.windows(2) {
                let (fa, fb) = (horner(c, w[0]), horner(c, w[1]));
                if fb == 0.0 && w[1] < hi {
                    out.push(w[1]);
                } else if fa != 0.0 && (fa < 0.0) != (fb < 0.0) {
                    out.push(bisect(c, w[0], w[1]));
                }
            }
            out.dedup();
        }
    }
    out
}

/// Smallest `s ∈ (0, hi]` where the polynomial reaches zero (it starts nonzero at 0).
fn first_zero(c: &[f64], hi: f64) -> f64 {
    let c = &c[..=degree(c)];
    if c.len() <= 1 {
        return f64::INFINITY;
    }
    let mut cuts = Vec::with_capacity(c.len() + 1);
    cuts.push(0.0);
    cuts.extend(roots_in(&derivative(c), 0.0, hi));
    cuts.push(hi);
    let f0 = horner(c, 0.0);
    for w in cuts.windows(2) {
        let fb = horner(c, w[1]);
        if fb == 0.0 || (fb < 0.0) != (f0 < 0.0) {
            return if fb == 0.0 { w[1] } else { bisect(c, w[0], w[1]) };
        }
    }
    f64::INFINITY
}

fn square_quadratic(a: [f64; 3]) -> [f64; 5] {
    [a[0] * a[0], 2.0 * a[0] * a[1], a[1] * a[1] + 2.0 * a[0] * a[2], 2.0 * a[1] * a[2], a[2] * a[2]]
}

/// `‖p·δ_s(u)‖⁴ − r⁴` as a quartic in `s`.
fn gauge_quartic(p: Point, u: Point, r: f64) -> [f64; 5] {
    let planar = [p.planar_sq(), 2.0 * (p.x * u.x + p.y * u.y), u.planar_sq()];
    let t = [p.t, 2.0 * (u.x * p.y - p.x * u.y), u.t];
    let (a, b) = (square_quadratic(planar), square_quadratic(t));
    let r2 = r * r;
    [a[0] + b[0] - r2 * r2, a[1] + b[1], a[2] + b[2], a[3] + b[3], a[4] + b[4]]
}

/// Parameter interval `[s_in, s_out]` of the horizontal line `q·(s cos a, s sin a, 0)`,
/// `‖q‖ = r_in`, on which it crosses the ring `r_in ≤ ‖·‖ ≤ r_out`: `s_out` is the first
/// exit through the outer sphere and `s_in` the last visit to the inner one before that.
pub(crate) fn horizontal_ring_crossing(q: Point, angle: f64, r_in: f64, r_out: f64) -> (f64, f64) {
    let u = Point::new(libm::cos(angle), libm::sin(angle), 0.0);
    // ‖q·δ_s u‖ ≤ ‖q‖ + s, so the outer sphere is reached by s = r_in + r_out.
    let s_max = (r_in + r_out) * (1.0 + 1e-9) + 1e-12;
    let s_out = first_zero(&gauge_quartic(q, u, r_out), s_max);
    let s_in = roots_in(&gauge_quartic(q, u, r_in), 0.0, s_out).last().copied().unwrap_or(0.0);
    (s_in, s_out)
}

fn exit_time(exit: &Exit, p: Point, u: Point, s_max: f64) -> f64 {
    match *exit {
        Exit::Ball { radius } => first_zero(&gauge_quartic(p, u, radius), s_max),
        Exit::Annulus { r_in, r_out } => {
            let out = first_zero(&gauge_quartic(p, u, r_out), s_max);
            out.min(first_zero(&gauge_quartic(p, u, r_in), out.min(s_max)))
        }
        Exit::Box { lo, hi } => {
            let mut s = f64::INFINITY;
            for (pk, uk, k) in [(p.x, u.x, 0), (p.y, u.y, 1)] {
                if uk > 0.0 {
                    s = s.min((hi[k] - pk) / uk);
                } else if uk < 0.0 {
                    s = s.min((lo[k] - pk) / uk);
                }
            }
            let b1 = 2.0 * (u.x * p.y - p.x * u.y);
            for v in [lo[2], hi[2]] {
                s = s.min(first_zero(&[p.t - v, b1, u.t], s.min(s_max)));
            }
            s
        }
    }
}

/// Minimum exit time over the unit sphere of `metric`.
pub(super) fn ray_distance(metric: Metric, p: Point, exit: &Exit, tol: f64) -> f64 {
    let outer = match *exit {
        Exit::Ball { radius } => radius,
        Exit::Annulus { r_out, .. } => r_out,
        Exit::Box { lo, hi } => {
            let m = |k: usize| libm::fabs(lo[k]).max(libm::fabs(hi[k]));
            let w = m(0) * m(0) + m(1) * m(1);
            libm::sqrt(libm::hypot(w, m(2)))
        }
    };
    // ‖p·δ_s u‖ ≥ s‖u‖ − ‖p‖ and ‖u‖_H ≥ 1/√π on either unit sphere.
    let s_max = (libm::sqrt(PI) * (outer + koranyi_norm(p))) * (1.0 + 1e-9) + 1e-12;
    let f = |a: [f64; 2]| exit_time(exit, p, unit_sphere(metric, a[0], a[1]), s_max);
    let (lo, hi) = chart(metric);
    minimize_2d(&f, lo, hi, [17, 32], tol)
}

pub(super) fn box_distance(metric: Metric, p: Point, lo: [f64; 3], hi: [f64; 3], tol: f64) -> f64 {
    ray_distance(metric, p, &Exit::Box { lo, hi }, tol)
}

/// Minimise `f` over a rectangle whose second coordinate is an angle: coarse grid, then
/// compass search from the best few grid cells.
fn minimize_2d(f: &dyn Fn([f64; 2]) -> f64, lo: [f64; 2], hi: [f64; 2], grid: [usize; 2], tol: f64) -> f64 {
    let step0 = [(hi[0] - lo[0]) / (grid[0] - 1) as f64, (hi[1] - lo[1]) / grid[1] as f64];
    let mut coarse: Vec<(f64, [f64; 2])> = Vec::with_capacity(grid[0] * grid[1]);
    for i in 0..grid[0] {
        for j in 0..grid[1] {
            let u = [lo[0] + step0[0] * i as f64, lo[1] + step0[1] * j as f64];
            coarse.push((f(u), u));
        }
    }
    coarse.sort_by(|a, b| a.0.total_cmp(&b.0));
    let wrap = |mut u: [f64; 2]| {
        u[0] = u[0].clamp(lo[0], hi[0]);
        let w = hi[1] - lo[1];
        let r = libm::fmod(u[1] - lo[1], w);
        u[1] = lo[1] + if r < 0.0 { r + w } else { r };
        u
    };
    // Angular steps far below `tol` leave a quadratically smaller error in the value.
    let min_step = (1e-4 * tol).clamp(1e-12, 1e-8);
    let mut best = coarse[0].0;
    for &(v0, u0) in coarse.iter().take(4) {
        let (mut u, mut v, mut step) = (u0, v0, step0);
        let mut iters = 0;
        while step[0].max(step[1]) > min_step && iters < 4000 {
            iters += 1;
            let mut next = (v, u);
            for (di, dj) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let cand = wrap([u[0] + di * step[0], u[1] + dj * step[1]]);
                let fv = f(cand);
                if fv < next.0 {
                    next = (fv, cand);
                }
            }
            if next.0 < v {
                (v, u) = next;
            } else {
                step[0] *= 0.5;
                step[1] *= 0.5;
            }
        }
        best = best.min(v);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dist;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn polynomial_first_zero() {
        // (s − 1)(s − 2)(s − 3) − shifted to start negative
        let c = [-6.0, 11.0, -6.0, 1.0];
        assert!((first_zero(&c, 10.0) - 1.0).abs() < 1e-14);
        // tangential touch at s = 1: −(s − 1)²
        let c = [-1.0, 2.0, -1.0];
        assert!((first_zero(&c, 5.0) - 1.0).abs() < 1e-7);
        assert_eq!(first_zero(&[1.0, 0.0, 1.0], 5.0), f64::INFINITY);
    }

    #[test]
    fn sr_sphere_chart_has_unit_norm() {
        for i in 0..=40 {
            let phi = -PI + 2.0 * PI * i as f64 / 40.0;
            let u = sr_sphere_point(phi, 0.3 * i as f64);
            let n = Metric::SubRiemannian.norm(u).unwrap();
            assert!((n - 1.0).abs() < 1e-9, "{phi}: {n}");
        }
    }

    #[test]
    fn ray_casting_matches_closed_form_on_korányi_spheres() {
        let mut r = rng::stream(3, rng::tag("test/boundary"), 0);
        let mut worst: f64 = 0.0;
        for _ in 0..1500 {
            let q = Point::new(2.0 * r.random::<f64>() - 1.0, 2.0 * r.random::<f64>() - 1.0, 2.0 * r.random::<f64>() - 1.0);
            let g = koranyi_norm(q);
            if g >= 1.0 {
                continue;
            }
            let exact = koranyi_sphere_distance(q, 1.0);
            let ray = ray_distance(Metric::Koranyi, q, &Exit::Ball { radius: 1.0 }, 1e-6);
            worst = worst.max(libm::fabs(ray - exact));
        }
        assert!(worst < 1e-7, "worst {worst:e}");
    }

    #[test]
    fn exit_point_is_on_boundary_at_that_distance() {
        let p = Point::new(0.2, -0.1, 0.3);
        let u = sr_sphere_point(0.7, 1.1);
        let s = exit_time(&Exit::Ball { radius: 1.0 }, p, u, 10.0);
        let z = p * u.dilated(s);
        assert!((koranyi_norm(z) - 1.0).abs() < 1e-12);
        assert!((dist(Metric::SubRiemannian, z, p).unwrap() - s).abs() < 1e-9);
    }
}
