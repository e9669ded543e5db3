//! Catalog of quasiconformal maps, user DSL maps, horizontal differentials.

mod expr;

pub use expr::{parse_triple, Expr, Func, Node};

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::geometry::{koranyi_norm, Metric, Point};
use crate::par;

/// Default relative finite-difference step: `h = fd_scale · (1 + ‖p‖)`.
pub const DEFAULT_FD_SCALE: f64 = 1e-5;

/// Shear profile `φ(x)`, kept with its symbolic derivative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ShearProfile {
    phi: Expr,
    dphi: Expr,
}

impl ShearProfile {
    pub fn new(src: &str) -> Result<Self> {
        let phi = Expr::parse_in_x(src)?;
        let dphi = phi.derivative(0);
        Ok(ShearProfile { phi, dphi })
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.phi.eval([x, 0.0, 0.0])
    }

    pub fn dphi(&self, x: f64) -> f64 {
        self.dphi.eval([x, 0.0, 0.0])
    }

    /// `Φ(x) = ∫₀ˣ φ`, composite 8-point Gauss–Legendre on panels of width ≤ 1/8.
    pub fn antiderivative(&self, x: f64) -> f64 {
        const NODES: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
        const WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
        if x == 0.0 {
            return 0.0;
        }
        let panels = (libm::ceil(libm::fabs(x) * 8.0) as usize).clamp(1, 1 << 16);
        let w = x / panels as f64;
        let mut total = 0.0;
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * w;
            let half = 0.5 * w;
            let mut s = 0.0;
            for (n, wt) in NODES.iter().zip(WEIGHTS) {
                s += wt * (self.phi(mid - half * n) + self.phi(mid + half * n));
            }
            total += s * half;
        }
        total
    }

    pub fn source(&self) -> &str {
        self.phi.source()
    }
}

impl TryFrom<String> for ShearProfile {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        ShearProfile::new(&s)
    }
}

impl From<ShearProfile> for String {
    fn from(s: ShearProfile) -> String {
        s.phi.into()
    }
}

/// Map kinds; the JSON form is `{"kind": "...", params...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapKind {
    /// `p ↦ g·p`.
    LeftTranslation { g: Point },
    /// `δ_λ`.
    Dilation { lambda: f64 },
    /// Rotation of the horizontal plane by `theta`, `t` fixed.
    Rotation { theta: f64 },
    /// Automorphism `(ax, y/a, t)`.
    HorizontalStretch { a: f64 },
    /// `(x, y + φ(x), t + 4Φ(x) − 2xφ(x))` with `Φ' = φ`; contact with `J ≡ 1`.
    Shear { phi: ShearProfile },
    /// Conformal inversion in the unit gauge sphere; valid on `H¹ ∖ {0}`.
    KoranyiInversion,
    /// `maps[0] ∘ maps[1] ∘ …` (the last map is applied first).
    Composition { maps: Vec<MapKind> },
    /// User map from three expressions in `x, y, t`.
    Dsl { fx: Expr, fy: Expr, ft: Expr },
}

/// An evaluatable map H¹ → H¹ with its finite-difference step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothMap {
    #[serde(flatten)]
    kind: MapKind,
    #[serde(skip, default = "default_fd_scale")]
    fd_scale: f64,
}

fn default_fd_scale() -> f64 {
    DEFAULT_FD_SCALE
}

/// `D_H f` in the `X, Y` frame plus derived scalars.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizontalDifferential {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
    pub det: f64,
    pub op_norm: f64,
    pub jacobian: f64,
    pub distortion: f64,
}

impl HorizontalDifferential {
    /// From rows `[[Xf₁, Yf₁], [Xf₂, Yf₂]]`.
    pub fn from_matrix(m: [[f64; 2]; 2]) -> Self {
        let [[a, b], [c, d]] = m;
        let det = a * d - b * c;
        // Singular values of a 2×2 matrix in closed form.
        let s_plus = libm::hypot(a + d, c - b);
        let s_minus = libm::hypot(a - d, b + c);
        let smax = 0.5 * (s_plus + s_minus);
        let smin = 0.5 * libm::fabs(s_plus - s_minus);
        let jacobian = det * det;
        let distortion = if jacobian > 0.0 && smin > 0.0 { ((smax / smin) * (smax / smin)).max(1.0) } else { f64::INFINITY };
        HorizontalDifferential { m11: a, m12: b, m21: c, m22: d, det, op_norm: smax, jacobian, distortion }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.m11, self.m12], [self.m21, self.m22]]
    }
}

/// Result of [`distortion_scan`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionSummary {
    pub k_hat: f64,
    pub worst_point: Point,
    pub n: usize,
}

impl From<MapKind> for SmoothMap {
    fn from(kind: MapKind) -> Self {
        SmoothMap { kind, fd_scale: DEFAULT_FD_SCALE }
    }
}

impl SmoothMap {
    pub fn new(kind: MapKind) -> Result<Self> {
        validate(&kind)?;
        Ok(kind.into())
    }

    pub fn left_translation(g: Point) -> Result<Self> {
        SmoothMap::new(MapKind::LeftTranslation { g })
    }

    pub fn dilation(lambda: f64) -> Result<Self> {
        SmoothMap::new(MapKind::Dilation { lambda })
    }

    pub fn rotation(theta: f64) -> Result<Self> {
        SmoothMap::new(MapKind::Rotation { theta })
    }

    pub fn horizontal_stretch(a: f64) -> Result<Self> {
        SmoothMap::new(MapKind::HorizontalStretch { a })
    }

    pub fn shear(phi: &str) -> Result<Self> {
        SmoothMap::new(MapKind::Shear { phi: ShearProfile::new(phi)? })
    }

    pub fn koranyi_inversion() -> Self {
        MapKind::KoranyiInversion.into()
    }

    /// `maps[0] ∘ maps[1] ∘ …`.
    pub fn composition(maps: Vec<SmoothMap>) -> Result<Self> {
        SmoothMap::new(MapKind::Composition { maps: maps.into_iter().map(|m| m.kind).collect() })
    }

    /// Parse `"fx, fy, ft"`.
    pub fn parse(src: &str) -> Result<Self> {
        let [fx, fy, ft] = parse_triple(src)?;
        Ok(MapKind::Dsl { fx, fy, ft }.into())
    }

    pub fn with_fd_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid("fd_step must be positive and finite"));
        }
        self.fd_scale = scale;
        Ok(self)
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn fd_scale(&self) -> f64 {
        self.fd_scale
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn apply(&self, p: Point) -> Result<Point> {
        self.kind.apply(p)
    }

    /// `D_H f(p)`: analytic when the catalog member has a closed form, otherwise central
    /// differences along `s ↦ p·(s,0,0)` and `s ↦ p·(0,s,0)`.
    pub fn horizontal_differential(&self, p: Point) -> Result<HorizontalDifferential> {
        if !p.is_finite() {
            return Err(Error::invalid("point must be finite"));
        }
        match self.kind.analytic_differential(p)? {
            Some(m) => Ok(HorizontalDifferential::from_matrix(m)),
            None => self.fd_differential(p),
        }
    }

    /// Finite-difference differential regardless of any closed form.
    pub fn fd_differential(&self, p: Point) -> Result<HorizontalDifferential> {
        self.fd_differential_with_step(p, self.step(p)?)
    }

    pub fn fd_differential_with_step(&self, p: Point, h: f64) -> Result<HorizontalDifferential> {
        let xp = self.apply(p * Point::new(h, 0.0, 0.0))?;
        let xm = self.apply(p * Point::new(-h, 0.0, 0.0))?;
        let yp = self.apply(p * Point::new(0.0, h, 0.0))?;
        let ym = self.apply(p * Point::new(0.0, -h, 0.0))?;
        let inv = 0.5 / h;
        let m = [[(xp.x - xm.x) * inv, (yp.x - ym.x) * inv], [(xp.y - xm.y) * inv, (yp.y - ym.y) * inv]];
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure { op: "horizontal_differential", detail: format!("non-finite derivative at {p:?}") });
        }
        Ok(HorizontalDifferential::from_matrix(m))
    }

    fn step(&self, p: Point) -> Result<f64> {
        let h = self.fd_scale * (1.0 + koranyi_norm(p));
        let scale = 1.0 + libm::fabs(p.x).max(libm::fabs(p.y)).max(libm::fabs(p.t));
        if !(h.is_finite() && h > 8.0 * f64::EPSILON * scale) {
            return Err(Error::NumericFailure { op: "finite difference", detail: format!("step {h:e} underflows at {p:?}") });
        }
        Ok(h)
    }

    /// Failure of `f` to preserve the contact form `θ = dt − 2y dx + 2x dy` up to the
    /// multiplier `det D_H f`: `|θ_{f(p)}(T f) − det D_H f(p)|`, with `T f` a central
    /// difference along `s ↦ p·(0,0,s)`.
    pub fn contact_defect(&self, p: Point) -> Result<f64> {
        let h = self.step(p)?;
        let hd = self.horizontal_differential(p)?;
        let fp = self.apply(p)?;
        let a = self.apply(p * Point::new(0.0, 0.0, h))?;
        let b = self.apply(p * Point::new(0.0, 0.0, -h))?;
        let inv = 0.5 / h;
        let (t1, t2, t3) = ((a.x - b.x) * inv, (a.y - b.y) * inv, (a.t - b.t) * inv);
        let theta = t3 - 2.0 * fp.y * t1 + 2.0 * fp.x * t2;
        let d = libm::fabs(theta - hd.det);
        if !d.is_finite() {
            return Err(Error::NumericFailure { op: "contact_defect", detail: format!("non-finite value at {p:?}") });
        }
        Ok(d)
    }

    /// `J_f(p) = det(D_H f(p))²`.
    pub fn jacobian(&self, p: Point) -> Result<f64> {
        Ok(self.horizontal_differential(p)?.jacobian)
    }

    /// `J_f(p)` with a degenerate-map error when it is not positive and finite.
    pub fn positive_jacobian(&self, p: Point) -> Result<f64> {
        let j = self.jacobian(p)?;
        if j > 0.0 && j.is_finite() {
            Ok(j)
        } else {
            Err(Error::DegenerateMap { point: p, jacobian: j })
        }
    }
}

impl MapKind {
    pub fn name(&self) -> &'static str {
        match self {
            MapKind::LeftTranslation { .. } => "left-translation",
            MapKind::Dilation { .. } => "dilation",
            MapKind::Rotation { .. } => "rotation",
            MapKind::HorizontalStretch { .. } => "horizontal-stretch",
            MapKind::Shear { .. } => "shear",
            MapKind::KoranyiInversion => "koranyi-inversion",
            MapKind::Composition { .. } => "composition",
            MapKind::Dsl { .. } => "dsl",
        }
    }

    pub fn apply(&self, p: Point) -> Result<Point> {
        let q = match self {
            MapKind::LeftTranslation { g } => *g * p,
            MapKind::Dilation { lambda } => p.dilated(*lambda),
            MapKind::Rotation { theta } => {
                let (s, c) = (libm::sin(*theta), libm::cos(*theta));
                Point::new(c * p.x - s * p.y, s * p.x + c * p.y, p.t)
            }
            MapKind::HorizontalStretch { a } => Point::new(a * p.x, p.y / a, p.t),
            MapKind::Shear { phi } => {
                let f = phi.phi(p.x);
                Point::new(p.x, p.y + f, p.t + 4.0 * phi.antiderivative(p.x) - 2.0 * p.x * f)
            }
            MapKind::KoranyiInversion => {
                // σ(z, t) = (−z / (|z|² − i t), −t / ‖p‖⁴)
                let w = p.planar_sq();
                let n = w * w + p.t * p.t;
                if n == 0.0 {
                    return Err(Error::OutsideMapDomain { map: "koranyi-inversion", point: p });
                }
                Point::new((p.y * p.t - p.x * w) / n, -(p.y * w + p.x * p.t) / n, -p.t / n)
            }
            MapKind::Composition { maps } => {
                let mut q = p;
                for m in maps.iter().rev() {
                    q = m.apply(q)?;
                }
                q
            }
            MapKind::Dsl { fx, fy, ft } => {
                let v = [p.x, p.y, p.t];
                Point::new(fx.eval(v), fy.eval(v), ft.eval(v))
            }
        };
        if !q.is_finite() {
            return Err(Error::OutsideMapDomain { map: self.name(), point: p });
        }
        Ok(q)
    }

    fn analytic_differential(&self, p: Point) -> Result<Option<[[f64; 2]; 2]>> {
        Ok(match self {
            MapKind::LeftTranslation { .. } => Some([[1.0, 0.0], [0.0, 1.0]]),
            MapKind::Dilation { lambda } => Some([[*lambda, 0.0], [0.0, *lambda]]),
            MapKind::Rotation { theta } => {
                let (s, c) = (libm::sin(*theta), libm::cos(*theta));
                Some([[c, -s], [s, c]])
            }
            MapKind::HorizontalStretch { a } => Some([[*a, 0.0], [0.0, 1.0 / a]]),
            MapKind::Shear { phi } => {
                let d = phi.dphi(p.x);
                if !d.is_finite() {
                    return Err(Error::OutsideMapDomain { map: "shear", point: p });
                }
                Some([[1.0, 0.0], [d, 1.0]])
            }
            MapKind::KoranyiInversion => {
                if p == Point::ORIGIN {
                    return Err(Error::OutsideMapDomain { map: "koranyi-inversion", point: p });
                }
                None
            }
            MapKind::Composition { .. } | MapKind::Dsl { .. } => None,
        })
    }

    /// True for catalog members whose image of `PuncturedSpace(0)` is itself.
    pub fn fixes_origin_puncture(&self) -> bool {
        match self {
            MapKind::Dilation { .. } | MapKind::Rotation { .. } | MapKind::HorizontalStretch { .. } | MapKind::KoranyiInversion => true,
            MapKind::Shear { phi } => phi.phi(0.0) == 0.0,
            MapKind::Composition { maps } => maps.iter().all(MapKind::fixes_origin_puncture),
            MapKind::LeftTranslation { g } => *g == Point::ORIGIN,
            MapKind::Dsl { .. } => false,
        }
    }
}

fn validate(kind: &MapKind) -> Result<()> {
    let pos = |v: f64, what: &str| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!("{what} must be positive and finite")))
        }
    };
    match kind {
        MapKind::LeftTranslation { g } if !g.is_finite() => Err(Error::invalid("translation must be finite")),
        MapKind::Dilation { lambda } => pos(*lambda, "dilation factor"),
        MapKind::HorizontalStretch { a } => pos(*a, "stretch factor"),
        MapKind::Rotation { theta } if !theta.is_finite() => Err(Error::invalid("rotation angle must be finite")),
        MapKind::Composition { maps } => {
            if maps.is_empty() {
                return Err(Error::invalid("composition needs at least one map"));
            }
            maps.iter().try_for_each(validate)
        }
        _ => Ok(()),
    }
}

/// `K̂ = max` pointwise distortion over `n` interior samples of `dom`.
pub fn distortion_scan(f: &SmoothMap, dom: &Domain, n: usize, seed: u64) -> Result<DistortionSummary> {
    let pts = dom.sample_interior(n, seed, 0.0, Metric::Koranyi)?;
    let ks = par::try_map_indexed(pts.len(), |i| {
        let hd = f.horizontal_differential(pts[i])?;
        if !(hd.jacobian > 0.0 && hd.jacobian.is_finite()) {
            return Err(Error::DegenerateMap { point: pts[i], jacobian: hd.jacobian });
        }
        Ok(hd.distortion)
    })?;
    let mut best = 0;
    for (i, &k) in ks.iter().enumerate() {
        if k > ks[best] {
            best = i;
        }
    }
    Ok(DistortionSummary { k_hat: ks[best], worst_point: pts[best], n })
}

/// Boxed evaluator for code that wants a plain closure.
pub fn as_fn(f: &SmoothMap) -> Box<dyn Fn(Point) -> Result<Point> + '_> {
    Box::new(move |p| f.apply(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use alloc::vec;
    use rand::Rng;

    fn random_points(n: usize, seed: u64, scale: f64) -> Vec<Point> {
        let mut r = rng::stream(seed, rng::tag("test/maps"), 0);
        (0..n)
            .map(|_| {
                Point::new(
                    scale * (2.0 * r.random::<f64>() - 1.0),
                    scale * (2.0 * r.random::<f64>() - 1.0),
                    scale * (2.0 * r.random::<f64>() - 1.0),
                )
            })
            .collect()
    }

    #[test]
    fn catalog_examples() {
        let d = SmoothMap::dilation(2.0).unwrap();
        assert_eq!(d.apply(Point::new(1.0, 1.0, 1.0)).unwrap(), Point::new(2.0, 2.0, 4.0));
        let hd = d.horizontal_differential(Point::new(0.3, 0.1, 0.2)).unwrap();
        assert_eq!(hd.matrix(), [[2.0, 0.0], [0.0, 2.0]]);
        assert_eq!((hd.jacobian, hd.op_norm, hd.distortion), (16.0, 2.0, 1.0));

        let s = SmoothMap::horizontal_stretch(2.0).unwrap();
        let hd = s.horizontal_differential(Point::new(0.3, 0.1, 0.2)).unwrap();
        assert_eq!((hd.jacobian, hd.op_norm), (1.0, 2.0));
        assert!((hd.distortion - 16.0).abs() < 1e-12);

        assert!(SmoothMap::dilation(0.0).is_err());
        assert!(matches!(
            SmoothMap::koranyi_inversion().apply(Point::ORIGIN),
            Err(Error::OutsideMapDomain { .. })
        ));
    }

    #[test]
    fn stretch_is_automorphism() {
        let s = SmoothMap::horizontal_stretch(1.7).unwrap();
        let pts = random_points(200, 1, 2.0);
        for w in pts.windows(2) {
            let lhs = s.apply(w[0] * w[1]).unwrap();
            let rhs = s.apply(w[0]).unwrap() * s.apply(w[1]).unwrap();
            for (a, b) in lhs.to_array().iter().zip(rhs.to_array()) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn inversion_validation() {
        let inv = SmoothMap::koranyi_inversion();
        for p in random_points(200, 2, 1.5) {
            let q = inv.apply(p).unwrap();
            assert!((q.norm() * p.norm() - 1.0).abs() < 1e-12);
            let back = inv.apply(q).unwrap();
            for (a, b) in back.to_array().iter().zip(p.to_array()) {
                assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "{back:?} vs {p:?}");
            }
            let hd = inv.horizontal_differential(p).unwrap();
            assert!((hd.distortion - 1.0).abs() < 1e-6, "K = {}", hd.distortion);
            assert!(inv.contact_defect(p).unwrap() < 1e-6 * (1.0 + hd.det.abs()));
            // J = ‖p‖⁻⁸
            let expected = libm::pow(p.norm(), -8.0);
            assert!((hd.jacobian / expected - 1.0).abs() < 1e-6, "{} vs {expected}", hd.jacobian);
        }
    }

    #[test]
    fn contact_defects() {
        let p = Point::new(0.4, -0.3, 0.2);
        for m in [
            SmoothMap::dilation(1.5).unwrap(),
            SmoothMap::rotation(0.7).unwrap(),
            SmoothMap::horizontal_stretch(3.0).unwrap(),
            SmoothMap::left_translation(Point::new(1.0, 2.0, -1.0)).unwrap(),
            SmoothMap::shear("x^2").unwrap(),
            SmoothMap::shear("sin(3*x)").unwrap(),
            SmoothMap::parse("x, y+x^2, t + 4*(x^3)/3 - 2*x*x^2").unwrap(),
        ] {
            assert!(m.contact_defect(p).unwrap() < 1e-6, "{}", m.name());
        }
        let d = SmoothMap::parse("x, y, 2*t").unwrap().contact_defect(p).unwrap();
        assert!((d - 1.0).abs() < 1e-6);
    }

    #[test]
    fn shear_dsl_matches_catalog() {
        let a = SmoothMap::shear("x^2").unwrap();
        let b = SmoothMap::parse("x, y+x^2, t + 4*(x^3)/3 - 2*x*x^2").unwrap();
        for p in random_points(100, 3, 1.5) {
            let (u, v) = (a.apply(p).unwrap(), b.apply(p).unwrap());
            for (s, t) in u.to_array().iter().zip(v.to_array()) {
                assert!((s - t).abs() < 1e-12 * (1.0 + s.abs()));
            }
        }
    }

    #[test]
    fn dsl_dilation_matches_catalog() {
        let a = SmoothMap::dilation(2.0).unwrap();
        let b = SmoothMap::parse("2*x, 2*y, 4*t").unwrap();
        for p in random_points(100, 4, 3.0) {
            assert_eq!(a.apply(p).unwrap(), b.apply(p).unwrap());
        }
    }

    #[test]
    fn fd_converges_at_second_order() {
        let p = Point::new(0.5, -0.4, 0.3);
        for m in [SmoothMap::shear("sin(3*x)").unwrap(), SmoothMap::rotation(0.3).unwrap(), SmoothMap::dilation(1.3).unwrap()] {
            let exact = m.horizontal_differential(p).unwrap().matrix();
            let err = |h: f64| {
                let fd = m.fd_differential_with_step(p, h).unwrap().matrix();
                (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| (fd[i][j] - exact[i][j]).abs()).fold(0.0, f64::max)
            };
            let (e1, e2) = (err(1e-2), err(5e-3));
            // affine maps are exact up to rounding
            assert!(e1 < 1e-10 || e1 / e2 > 3.5, "{}: {e1} {e2}", m.name());
        }
    }

    #[test]
    fn composition_chain_rule() {
        let f = SmoothMap::shear("x^3 - x").unwrap();
        let g = SmoothMap::koranyi_inversion();
        let gf = SmoothMap::composition(vec![g.clone(), f.clone()]).unwrap();
        for p in random_points(50, 5, 1.0) {
            let jf = f.jacobian(p).unwrap();
            let jg = g.jacobian(f.apply(p).unwrap()).unwrap();
            let j = gf.jacobian(p).unwrap();
            assert!((j / (jf * jg) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn distortion_scans() {
        let ann = Domain::annulus(Point::ORIGIN, 0.5, 2.0).unwrap();
        let k = distortion_scan(&SmoothMap::koranyi_inversion(), &ann, 500, 3).unwrap();
        assert!((k.k_hat - 1.0).abs() < 1e-3);
        let ball = Domain::koranyi_ball(Point::ORIGIN, 1.0).unwrap();
        let k = distortion_scan(&SmoothMap::rotation(1.0).unwrap(), &ball, 200, 3).unwrap();
        assert!((k.k_hat - 1.0).abs() < 1e-9);
        let k = distortion_scan(&SmoothMap::horizontal_stretch(0.5).unwrap(), &ball, 200, 3).unwrap();
        assert!((k.k_hat - 16.0).abs() < 1e-6);
        let flat = SmoothMap::parse("x, 0*y, t").unwrap();
        assert!(matches!(distortion_scan(&flat, &ball, 10, 1), Err(Error::DegenerateMap { .. })));
    }

    #[test]
    fn shear_antiderivative() {
        let s = ShearProfile::new("cos(x)").unwrap();
        for x in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            assert!((s.antiderivative(x) - libm::sin(x)).abs() < 1e-14);
        }
    }
}
