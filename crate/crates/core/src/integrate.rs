//! Monte-Carlo ball averages, the average derivative `a_f`, mean oscillation, BMO
//! lower bounds and the reverse-Hölder / A_p ratio audits.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::E;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::geometry::{koranyi_norm, Ball, Metric, Point};
use crate::maps::SmoothMap;
use crate::par;
use crate::rng::{self, StreamRng};
use crate::stats::{mean, pairwise_sum, MeanEstimate};

/// Default Monte-Carlo sample count per ball.
pub const DEFAULT_MC_N: usize = 20_000;

const TAG_BALL: u64 = rng::tag("integrate/ball");
const TAG_BMO: u64 = rng::tag("integrate/bmo-ball");
const MAX_TRIES_PER_POINT: u64 = 1_000_000;

/// A real-valued function on H¹.
pub trait ScalarField: Sync {
    fn eval(&self, p: Point) -> Result<f64>;
    fn name(&self) -> String;
}

/// `u ≡ c`.
#[derive(Clone, Copy, Debug)]
pub struct Constant(pub f64);

impl ScalarField for Constant {
    fn eval(&self, _: Point) -> Result<f64> {
        Ok(self.0)
    }

    fn name(&self) -> String {
        format!("constant({})", self.0)
    }
}

/// `log J_f`.
pub struct LogJacobian<'a>(pub &'a SmoothMap);

impl ScalarField for LogJacobian<'_> {
    fn eval(&self, p: Point) -> Result<f64> {
        Ok(libm::log(self.0.positive_jacobian(p)?))
    }

    fn name(&self) -> String {
        format!("log J[{}]", self.0.name())
    }
}

/// `log ‖c⁻¹p‖`.
#[derive(Clone, Copy, Debug)]
pub struct LogGauge(pub Point);

impl ScalarField for LogGauge {
    fn eval(&self, p: Point) -> Result<f64> {
        let g = koranyi_norm(self.0.inv() * p);
        if g > 0.0 {
            Ok(libm::log(g))
        } else {
            Err(Error::OutsideMapDomain { map: "log-gauge", point: p })
        }
    }

    fn name(&self) -> String {
        "log gauge".into()
    }
}

/// Any closure, with a label.
pub struct FnField<F> {
    pub label: String,
    pub f: F,
}

impl<F: Fn(Point) -> Result<f64> + Sync> ScalarField for FnField<F> {
    fn eval(&self, p: Point) -> Result<f64> {
        (self.f)(p)
    }

    fn name(&self) -> String {
        self.label.clone()
    }
}

/// One uniform point of `ball`, from its own stream.
fn sample_ball_point(ball: &Ball, rng: &mut StreamRng) -> Result<Point> {
    // Sub-Riemannian balls sit inside the Korányi ball of the same radius (d_H ≤ d_s).
    let r = ball.radius;
    for _ in 0..MAX_TRIES_PER_POINT {
        let q = Point::new(
            r * (2.0 * rng.random::<f64>() - 1.0),
            r * (2.0 * rng.random::<f64>() - 1.0),
            r * r * (2.0 * rng.random::<f64>() - 1.0),
        );
        if koranyi_norm(q) >= r {
            continue;
        }
        if ball.metric == Metric::SubRiemannian && ball.metric.norm(q)? >= r {
            continue;
        }
        return Ok(ball.center * q);
    }
    Err(Error::SamplingFailure { rate: 1.0 / MAX_TRIES_PER_POINT as f64, tries: MAX_TRIES_PER_POINT })
}

/// `n` uniform points of `ball`; point `i` uses stream `(seed, tag, i)`.
pub fn sample_ball(ball: &Ball, n: usize, seed: u64) -> Result<Vec<Point>> {
    par::try_map_indexed(n, |i| sample_ball_point(ball, &mut rng::stream(seed, TAG_BALL, i as u64)))
}

/// Values of `u` at `n` uniform points of `ball`.
pub fn ball_values(u: &dyn ScalarField, ball: &Ball, n: usize, seed: u64) -> Result<Vec<f64>> {
    par::try_map_indexed(n, |i| {
        let p = sample_ball_point(ball, &mut rng::stream(seed, TAG_BALL, i as u64))?;
        let v = u.eval(p)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NumericFailure { op: "ball_mean", detail: format!("{} is not finite at {p:?}", u.name()) })
        }
    })
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid("need at least 2 samples per ball"));
    }
    Ok(())
}

/// `u_B = ⨍_B u`.
pub fn ball_mean(u: &dyn ScalarField, ball: &Ball, n: usize, seed: u64) -> Result<MeanEstimate> {
    check_n(n)?;
    Ok(MeanEstimate::from_samples(&ball_values(u, ball, n, seed)?, seed))
}

/// `⨍_B |u − u_B|`, with `u_B` from the same sample.
pub fn mean_oscillation(u: &dyn ScalarField, ball: &Ball, n: usize, seed: u64) -> Result<MeanEstimate> {
    check_n(n)?;
    let vals = ball_values(u, ball, n, seed)?;
    Ok(oscillation_of(&vals, seed))
}

fn oscillation_of(vals: &[f64], seed: u64) -> MeanEstimate {
    let m = MeanEstimate::from_samples(vals, seed).value;
    let dev: Vec<f64> = vals.iter().map(|v| libm::fabs(v - m)).collect();
    MeanEstimate::from_samples(&dev, seed)
}

/// Detailed `a_f(x)` estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageDerivative {
    /// `exp(¼ (log J_f)_B)`.
    pub value: f64,
    /// `(log J_f)_B` with its standard error.
    pub log_mean: MeanEstimate,
    /// Radius of `B = B(x, d(x, ∂Ω)/shrink)`.
    pub radius: f64,
    pub boundary_distance: f64,
}

impl AverageDerivative {
    /// Standard error of `value` by the delta method.
    pub fn std_error(&self) -> f64 {
        0.25 * self.value * self.log_mean.std_error
    }
}

/// `a_f(x) = exp(¼ (log J_f)_{B(x, d(x,∂Ω)/shrink)})`.
pub fn average_derivative(
    f: &SmoothMap,
    dom: &Domain,
    x: Point,
    metric: Metric,
    shrink: f64,
    n: usize,
    seed: u64,
) -> Result<f64> {
    Ok(average_derivative_detail(f, dom, x, metric, shrink, n, seed)?.value)
}

pub fn average_derivative_detail(
    f: &SmoothMap,
    dom: &Domain,
    x: Point,
    metric: Metric,
    shrink: f64,
    n: usize,
    seed: u64,
) -> Result<AverageDerivative> {
    if !(shrink >= 1.0 && shrink.is_finite()) {
        return Err(Error::invalid("shrink must be ≥ 1"));
    }
    let d = dom.boundary_distance(x, metric)?;
    average_derivative_in_ball(f, &Ball::new(x, d / shrink, metric)?, d, n, seed)
}

/// `a_f` over an explicitly given ball (boundary distance already known).
pub fn average_derivative_in_ball(
    f: &SmoothMap,
    ball: &Ball,
    boundary_distance: f64,
    n: usize,
    seed: u64,
) -> Result<AverageDerivative> {
    let log_mean = ball_mean(&LogJacobian(f), ball, n, seed)?;
    Ok(AverageDerivative {
        value: libm::exp(0.25 * log_mean.value),
        log_mean,
        radius: ball.radius,
        boundary_distance,
    })
}

/// Lower bound of `‖u‖_{*}` over admissible balls `factor·B ⊆ Ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmoEstimate {
    pub norm_lower_bound: f64,
    pub admissibility_factor: f64,
    pub balls_tried: usize,
    pub metric: Metric,
    /// Ball attaining the bound.
    pub argmax: Option<Ball>,
    /// Running maximum after each trial.
    pub history: Vec<f64>,
}

/// Max mean oscillation over `ball_trials` random admissible balls.
///
/// Trial `i` draws its centre and radius from stream `(seed, i)`, so the running maximum
/// is nondecreasing in `ball_trials`.
pub fn bmo_estimate(
    u: &dyn ScalarField,
    dom: &Domain,
    factor: f64,
    ball_trials: usize,
    n_per_ball: usize,
    seed: u64,
    metric: Metric,
) -> Result<BmoEstimate> {
    if ball_trials == 0 {
        return Err(Error::invalid("ball_trials must be at least 1"));
    }
    if !(factor >= 1.0 && factor.is_finite()) {
        return Err(Error::invalid("admissibility factor must be ≥ 1"));
    }
    check_n(n_per_ball)?;
    let balls = par::try_map_indexed(ball_trials, |i| admissible_ball(dom, factor, metric, seed, i as u64))?;
    let mut osc = Vec::with_capacity(ball_trials);
    for (i, b) in balls.iter().enumerate() {
        let s = rng::derive_seed(seed, TAG_BMO, i as u64);
        osc.push(mean_oscillation(u, b, n_per_ball, s)?.value);
    }
    let mut history = Vec::with_capacity(ball_trials);
    let mut best = 0.0f64;
    let mut argmax = None;
    for (i, &v) in osc.iter().enumerate() {
        if v > best || argmax.is_none() {
            best = best.max(v);
            argmax = Some(balls[i]);
        }
        history.push(best);
    }
    Ok(BmoEstimate {
        norm_lower_bound: best,
        admissibility_factor: factor,
        balls_tried: ball_trials,
        metric,
        argmax,
        history,
    })
}

/// Random ball `B(x, r)` with `factor·r ≤ d(x, ∂Ω)`, so `factor·B ⊆ Ω`.
pub fn admissible_ball(dom: &Domain, factor: f64, metric: Metric, seed: u64, index: u64) -> Result<Ball> {
    let mut r = rng::stream(seed, TAG_BMO, index);
    for _ in 0..MAX_TRIES_PER_POINT {
        let Some(x) = dom.propose(&mut r) else { continue };
        if !dom.contains(x) {
            continue;
        }
        let d = dom.boundary_distance(x, metric)?;
        if !(d > 0.0 && d.is_finite()) {
            continue;
        }
        let s = 0.1 + 0.9 * r.random::<f64>();
        return Ball::new(x, s * d / factor, metric);
    }
    Err(Error::config("no admissible ball found in the domain"))
}

/// Report of [`nested_ball_bound_audit`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedBallReport {
    pub lhs: f64,
    pub rhs: f64,
    pub std_error: f64,
    pub pass: bool,
}

/// `|u_{B₁} − u_{B₂}| ≤ (e/2)(log(|B₁|/|B₂|) + 1)·‖u‖_*` for concentric `B₂ ⊆ B₁`.
pub fn nested_ball_bound_audit(
    u: &dyn ScalarField,
    x: Point,
    r1: f64,
    r2: f64,
    norm_bound: f64,
    n: usize,
    seed: u64,
    metric: Metric,
) -> Result<NestedBallReport> {
    if !(r2 > 0.0 && r2 <= r1) {
        return Err(Error::invalid("need 0 < r2 ≤ r1"));
    }
    if !(norm_bound >= 0.0) {
        return Err(Error::invalid("norm bound must be nonnegative"));
    }
    let b1 = Ball::new(x, r1, metric)?;
    let b2 = Ball::new(x, r2, metric)?;
    let m1 = ball_mean(u, &b1, n, seed)?;
    let (lhs, se) = if r1 == r2 {
        (0.0, 0.0)
    } else {
        let m2 = ball_mean(u, &b2, n, rng::derive_seed(seed, TAG_BALL, 1))?;
        (libm::fabs(m1.value - m2.value), libm::hypot(m1.std_error, m2.std_error))
    };
    let ratio = b1.volume() / b2.volume();
    let rhs = 0.5 * E * (libm::log(ratio) + 1.0) * norm_bound;
    Ok(NestedBallReport { lhs, rhs, std_error: se, pass: lhs <= rhs + 3.0 * se })
}

/// Ratio audit (reverse Hölder or A_p) on one ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub std_error: f64,
    /// `exp(⨍ log J)`, for the Jensen check `≤ ⨍ J`.
    pub geometric_mean_j: f64,
    pub mean_j: f64,
    pub mean_j_se: f64,
}

/// Jacobian samples over `ball`.
pub fn jacobian_samples(f: &SmoothMap, ball: &Ball, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_n(n)?;
    let pts = sample_ball(ball, n, seed)?;
    par::try_map_indexed(n, |i| f.positive_jacobian(pts[i]))
}

fn check_p(p_exp: f64) -> Result<()> {
    if !(p_exp > 4.0 && p_exp.is_finite()) {
        return Err(Error::invalid("exponent p must exceed 4"));
    }
    Ok(())
}

/// Standard error of a ratio from per-sample linearised influences `z_i`.
fn influence_se(z: &[f64]) -> f64 {
    let m = mean(z);
    let dev: Vec<f64> = z.iter().map(|v| (v - m) * (v - m)).collect();
    let n = z.len() as f64;
    libm::sqrt(pairwise_sum(&dev) / (n - 1.0) / n)
}

fn jensen_parts(js: &[f64]) -> (f64, f64, f64) {
    let logs: Vec<f64> = js.iter().map(|j| libm::log(*j)).collect();
    let mj = MeanEstimate::from_samples(js, 0);
    (libm::exp(MeanEstimate::from_samples(&logs, 0).value), mj.value, mj.std_error)
}

/// `lhs = (⨍ J^{p/4})^{4/p}`, `ratio = lhs / ⨍ J` (≥ 1 by Jensen).
pub fn reverse_holder_audit(f: &SmoothMap, ball: &Ball, p_exp: f64, n: usize, seed: u64) -> Result<RatioReport> {
    check_p(p_exp)?;
    let js = jacobian_samples(f, ball, n, seed)?;
    let q = p_exp / 4.0;
    let pw: Vec<f64> = js.iter().map(|j| libm::pow(*j, q)).collect();
    let a = MeanEstimate::from_samples(&pw, seed).value;
    let (geo, m, mse) = jensen_parts(&js);
    let lhs = libm::pow(a, 1.0 / q);
    let ratio = lhs / m;
    let z: Vec<f64> = pw.iter().zip(&js).map(|(w, j)| (w - a) / (q * a) - (j - m) / m).collect();
    let se = ratio * influence_se(&z);
    Ok(RatioReport { lhs, rhs: m, ratio, std_error: se, geometric_mean_j: geo, mean_j: m, mean_j_se: mse })
}

/// `ratio = (⨍ J)·(⨍ J^{−(p−4)/4})^{4/(p−4)}` (≥ 1 by Jensen).
pub fn ap_weight_audit(f: &SmoothMap, ball: &Ball, p_exp: f64, n: usize, seed: u64) -> Result<RatioReport> {
    check_p(p_exp)?;
    let js = jacobian_samples(f, ball, n, seed)?;
    let s = (p_exp - 4.0) / 4.0;
    let w: Vec<f64> = js.iter().map(|j| libm::pow(*j, -s)).collect();
    let wm = MeanEstimate::from_samples(&w, seed).value;
    let (geo, m, mse) = jensen_parts(&js);
    let rhs = libm::pow(wm, -1.0 / s);
    let ratio = m / rhs;
    let z: Vec<f64> = w.iter().zip(&js).map(|(wi, j)| (j - m) / m + (wi - wm) / (s * wm)).collect();
    let se = ratio * influence_se(&z);
    Ok(RatioReport { lhs: m, rhs, ratio, std_error: se, geometric_mean_j: geo, mean_j: m, mean_j_se: mse })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::koranyi_ball_volume;

    fn unit(metric: Metric) -> Ball {
        Ball::new(Point::new(0.3, -0.2, 0.1), 1.0, metric).unwrap()
    }

    #[test]
    fn constant_fields_are_exact() {
        for metric in Metric::ALL {
            let m = ball_mean(&Constant(2.5), &unit(metric), 100, 1).unwrap();
            assert_eq!((m.value, m.std_error), (2.5, 0.0));
            let o = mean_oscillation(&Constant(2.5), &unit(metric), 100, 1).unwrap();
            assert_eq!((o.value, o.std_error), (0.0, 0.0));
        }
        let d = SmoothMap::dilation(1.7).unwrap();
        let m = ball_mean(&LogJacobian(&d), &unit(Metric::Koranyi), 50, 2).unwrap();
        assert!((m.value - 4.0 * libm::log(1.7)).abs() < 1e-15);
        assert_eq!(m.std_error, 0.0);
    }

    #[test]
    fn samples_lie_in_ball() {
        for metric in Metric::ALL {
            let b = unit(metric);
            for p in sample_ball(&b, 300, 9).unwrap() {
                assert!(b.contains(p).unwrap());
            }
        }
    }

    #[test]
    fn half_measure_sign_field_oscillates_by_one() {
        let b = Ball::new(Point::ORIGIN, 1.0, Metric::Koranyi).unwrap();
        let thr = libm::pow(0.5, 0.25);
        let u = FnField { label: "sign".into(), f: move |p: Point| Ok(if koranyi_norm(p) < thr { 1.0 } else { -1.0 }) };
        let o = mean_oscillation(&u, &b, 40_000, 3).unwrap();
        assert!((o.value - 1.0).abs() < 4.0 * o.std_error.max(0.005), "{o:?}");
        // half measure: the inner ball has volume |B|/2
        assert!((koranyi_ball_volume(thr).unwrap() / b.volume() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn standard_error_follows_root_n() {
        let b = unit(Metric::Koranyi);
        let u = FnField { label: "x".into(), f: |p: Point| Ok(p.x) };
        let a = ball_mean(&u, &b, 10_000, 4).unwrap().std_error;
        let c = ball_mean(&u, &b, 40_000, 4).unwrap().std_error;
        assert!((a / c - 2.0).abs() < 0.4, "{a} {c}");
    }

    #[test]
    fn af_of_conformal_catalog() {
        let dom = Domain::punctured(Point::ORIGIN).unwrap();
        let x = Point::new(0.5, 0.2, -0.3);
        for (m, expected) in [
            (SmoothMap::dilation(2.0).unwrap(), 2.0),
            (SmoothMap::rotation(0.4).unwrap(), 1.0),
            (SmoothMap::horizontal_stretch(3.0).unwrap(), 1.0),
        ] {
            let a = average_derivative(&m, &dom, x, Metric::Koranyi, 1.0, 200, 5).unwrap();
            assert!((a - expected).abs() < 1e-12, "{}: {a}", m.name());
        }
        assert!(average_derivative(&SmoothMap::dilation(2.0).unwrap(), &dom, x, Metric::Koranyi, 0.5, 10, 1).is_err());
    }

    #[test]
    fn bmo_monotone_and_zero_for_constants() {
        let dom = Domain::annulus(Point::ORIGIN, 0.25, 1.0).unwrap();
        let c = bmo_estimate(&Constant(1.0), &dom, 3.0, 5, 100, 1, Metric::Koranyi).unwrap();
        assert_eq!(c.norm_lower_bound, 0.0);
        let inv = SmoothMap::koranyi_inversion();
        let u = LogJacobian(&inv);
        let short = bmo_estimate(&u, &dom, 1.0, 8, 2000, 7, Metric::Koranyi).unwrap();
        let long = bmo_estimate(&u, &dom, 1.0, 16, 2000, 7, Metric::Koranyi).unwrap();
        assert!(short.norm_lower_bound > 0.0);
        assert!(long.norm_lower_bound >= short.norm_lower_bound);
        assert_eq!(&long.history[..8], &short.history[..]);
        assert!(long.history.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn ratio_audits_are_one_for_constant_jacobian() {
        let b = unit(Metric::Koranyi);
        for m in [SmoothMap::dilation(1.3).unwrap(), SmoothMap::horizontal_stretch(2.0).unwrap()] {
            let rh = reverse_holder_audit(&m, &b, 4.5, 200, 1).unwrap();
            let ap = ap_weight_audit(&m, &b, 6.0, 200, 1).unwrap();
            assert!((rh.ratio - 1.0).abs() < 1e-12, "{rh:?}");
            assert!((ap.ratio - 1.0).abs() < 1e-12, "{ap:?}");
        }
        let inv = SmoothMap::koranyi_inversion();
        let far = Ball::new(Point::new(2.0, 0.0, 0.0), 0.5, Metric::Koranyi).unwrap();
        let rh = reverse_holder_audit(&inv, &far, 4.5, 4000, 2).unwrap();
        assert!(rh.ratio >= 1.0 - 3.0 * rh.std_error && rh.ratio < 2.0, "{rh:?}");
        assert!(rh.geometric_mean_j <= rh.mean_j + 3.0 * rh.mean_j_se);
    }

    #[test]
    fn nested_ball_identical_radii() {
        let r = nested_ball_bound_audit(&LogGauge(Point::ORIGIN), Point::new(1.0, 0.0, 0.0), 0.5, 0.5, 1.0, 100, 1, Metric::Koranyi)
            .unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.pass);
    }
}
