//! Sub-Riemannian distance from the origin.
//!
//! Horizontal curves satisfy `ṫ = 2(yẋ − xẏ)`, so a horizontal lift of a planar path
//! from the origin to `z` gains `|Δt| = 4·A`, where `A` is the area between the path and
//! the chord `[0, z]`. Length minimisers are lifts of circular arcs. For an arc with
//! half-angle `φ ∈ [0, π)` over a chord of length `c`:
//!
//! ```text
//! |t| / c² = (φ − sin φ cos φ) / sin² φ        (strictly increasing in φ)
//! length   = c·φ / sin φ = φ·sqrt(|t| / (φ − sin φ cos φ))
//! ```
//!
//! The planar case `t = 0` and the vertical axis `c = 0` are handled as separate
//! branches; the latter gives `d_s(0, (0,0,t)) = sqrt(π|t|)`.

use alloc::format;
use core::f64::consts::PI;

use super::Point;
use crate::error::{Error, Result};

/// Absolute tolerance of the scalar solve, in units of distance.
pub const GEODESIC_TOL: f64 = 1e-9;

const MAX_ITER: usize = 200;

/// `u − sin u`, accurate for small `u`.
pub(crate) fn u_minus_sin(u: f64) -> f64 {
    if u.abs() < 0.5 {
        // u³/3! − u⁵/5! + u⁷/7! − ...
        let u2 = u * u;
        let mut term = u * u2 / 6.0;
        let mut sum = term;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= -u2 / ((2.0 * k) * (2.0 * k + 1.0));
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        u - libm::sin(u)
    }
}

/// `φ − sin φ cos φ`.
#[inline]
fn segment_g(phi: f64) -> f64 {
    0.5 * u_minus_sin(2.0 * phi)
}

/// `(φ − sin φ cos φ) / sin² φ`, the normalised vertical gain of an arc.
fn height_ratio(phi: f64) -> f64 {
    let s = libm::sin(phi);
    segment_g(phi) / (s * s)
}

fn height_ratio_deriv(phi: f64) -> f64 {
    let s = libm::sin(phi);
    let c = libm::cos(phi);
    2.0 - 2.0 * segment_g(phi) * c / (s * s * s)
}

/// Arc length of the geodesic with half-angle `phi` over chord `chord` and height `height`.
fn arc_length(phi: f64, chord: f64, height: f64) -> f64 {
    if phi < 0.5 * PI {
        if phi == 0.0 {
            chord
        } else {
            chord * phi / libm::sin(phi)
        }
    } else {
        phi * libm::sqrt(height / segment_g(phi))
    }
}

/// Solve `height_ratio(φ) = tau` on `(0, π)` by safeguarded Newton iteration.
fn solve_half_angle(tau: f64) -> Result<f64> {
    let mut lo = 0.0f64;
    let mut hi = PI;
    // Asymptotics: ratio ≈ 2φ/3 near 0 and ≈ π/(π − φ)² near π.
    let mut phi = if tau < 1.0 {
        1.5 * tau
    } else {
        PI - libm::sqrt(PI / tau)
    };
    if !(phi > lo && phi < hi) {
        phi = 0.5 * (lo + hi);
    }
    for _ in 0..MAX_ITER {
        let f = height_ratio(phi) - tau;
        if f == 0.0 {
            return Ok(phi);
        }
        if f < 0.0 {
            lo = phi;
        } else {
            hi = phi;
        }
        let d = height_ratio_deriv(phi);
        let mut next = phi - f / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - phi).abs() <= 4.0 * f64::EPSILON * phi.max(1e-300) || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        phi = next;
    }
    Err(Error::NumericFailure {
        op: "sub_riemannian_norm",
        detail: format!("half-angle solve did not converge: tau={tau:e}, bracket=[{lo:e}, {hi:e}]"),
    })
}

/// Sub-Riemannian distance from the origin to `g`.
pub fn sub_riemannian_norm(g: Point) -> Result<f64> {
    if !g.is_finite() {
        return Err(Error::NumericFailure {
            op: "sub_riemannian_norm",
            detail: format!("non-finite point {g:?}"),
        });
    }
    let chord = libm::hypot(g.x, g.y);
    let height = g.t.abs();
    if height == 0.0 {
        return Ok(chord);
    }
    if chord == 0.0 {
        return Ok(libm::sqrt(PI * height));
    }
    let tau = height / (chord * chord);
    if !tau.is_finite() {
        // chord² underflowed; the vertical branch is exact to working precision.
        return Ok(libm::sqrt(PI * height));
    }
    let phi = solve_half_angle(tau)?;
    Ok(arc_length(phi, chord, height))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_direct() {
        // The direct form cancels to an absolute error of a few ulp(u).
        for &u in &[0.1, 0.3, 0.49] {
            let direct = u - libm::sin(u);
            assert!((u_minus_sin(u) - direct).abs() <= 4.0 * f64::EPSILON * u, "{u}");
        }
        let u: f64 = 1e-3;
        let taylor = u.powi(3) / 6.0 - u.powi(5) / 120.0 + u.powi(7) / 5040.0;
        assert!((u_minus_sin(u) / taylor - 1.0).abs() < 1e-15);
    }

    #[test]
    fn anchors() {
        assert_eq!(sub_riemannian_norm(Point::new(3.0, 4.0, 0.0)).unwrap(), 5.0);
        let v = sub_riemannian_norm(Point::new(0.0, 0.0, 1.0)).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-15);
        // near-axis and near-plane limits join the explicit branches continuously
        let near_axis = sub_riemannian_norm(Point::new(1e-9, 0.0, 1.0)).unwrap();
        assert!((near_axis - PI.sqrt()).abs() < 1e-6);
        let near_plane = sub_riemannian_norm(Point::new(1.0, 0.0, 1e-12)).unwrap();
        assert!((near_plane - 1.0).abs() < 1e-9);
    }

    #[test]
    fn half_circle_lift() {
        // Semicircle over chord c: φ = π/2, area πc²/8, so |t| = πc²/2 and length πc/2.
        let c = 2.0;
        let v = sub_riemannian_norm(Point::new(c, 0.0, PI * c * c / 2.0)).unwrap();
        assert!((v - PI * c / 2.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn monotone_in_height() {
        let mut prev = 0.0;
        for i in 0..200 {
            let t = i as f64 * 0.05;
            let v = sub_riemannian_norm(Point::new(1.0, 0.0, t)).unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }
}
