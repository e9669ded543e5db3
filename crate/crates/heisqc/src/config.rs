//! Run configuration: one JSON document per experiment.
//!
//! ```json
//! {
//!   "version": 1,
//!   "seed": 7,
//!   "metric": "koranyi",
//!   "experiment": { "kind": "koebe", "map": {"kind": "dilation", "lambda": 2.0}, ... }
//! }
//! ```
//!
//! Unknown keys are rejected at every level. Every `max_*`/`min_*` key is an optional
//! audit threshold: when present the run exits with status 1 if it is violated.

use std::path::Path;

use heisqc_core::geometry::Ball;
use heisqc_core::{Curve, Domain, Metric, Point, SmoothMap};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub metric: Metric,
    /// File stem for the JSON and CSV outputs; defaults to the experiment name.
    #[serde(default)]
    pub output: Option<String>,
    pub experiment: Experiment,
}

/// Scalar fields for the BMO experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant { value: f64 },
    /// `log J_f`.
    LogJacobian { map: SmoothMap },
    /// `log ‖c⁻¹p‖`.
    LogGauge { center: Point },
}

/// Curves for the curve-diameter audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveSpec {
    /// `start·(s cos θ, s sin θ, 0)`, `s ∈ [0, length]`.
    Segment { start: Point, angle: f64, length: f64, pieces: usize },
    Polyline { vertices: Vec<Point> },
}

impl CurveSpec {
    pub fn build(&self) -> Result<Curve> {
        Ok(match self {
            CurveSpec::Segment { start, angle, length, pieces } => Curve::horizontal_segment(*start, *angle, *length, *pieces)?,
            CurveSpec::Polyline { vertices } => Curve::new(vertices.clone())?,
        })
    }
}

/// Densities for the density-metric experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensitySpec {
    Constant { value: f64 },
    /// `ρ = a_f` on the maximal centred balls of the graph's domain.
    AverageDerivative { map: SmoothMap, mc_n: usize },
}

fn one() -> f64 {
    1.0
}

fn three() -> f64 {
    3.0
}

fn five() -> f64 {
    5.0
}

fn upper_slope() -> f64 {
    4.2
}

/// Every experiment the binary can run; one subcommand each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Korányi and sub-Riemannian distances of point pairs; audits `d_s/√π ≤ d_H ≤ d_s`.
    Dist { pairs: Vec<[Point; 2]> },
    /// Average derivative `a_f` at the given points.
    Af {
        map: SmoothMap,
        domain: Domain,
        points: Vec<Point>,
        #[serde(default = "one")]
        shrink: f64,
        mc_n: usize,
    },
    /// Local BMO lower bound, optionally with the nested-ball mean bound.
    Bmo {
        field: FieldSpec,
        domain: Domain,
        #[serde(default = "three")]
        factor: f64,
        ball_trials: usize,
        n_per_ball: usize,
        #[serde(default)]
        nested: Option<NestedSpec>,
        #[serde(default)]
        max_norm: Option<f64>,
    },
    /// Reverse-Hölder and `A_p` ratios of `J_f` on balls.
    Weights {
        map: SmoothMap,
        balls: Vec<Ball>,
        p_exp: f64,
        n: usize,
        #[serde(default)]
        max_ratio: Option<f64>,
    },
    Whitney {
        domain: Domain,
        lambda: f64,
        collar: f64,
        grid: usize,
        probes: usize,
        #[serde(default)]
        min_coverage: Option<f64>,
    },
    /// Bounds on the 4-modulus of rings `center, r < ‖p‖ < k r` for each `k`.
    Modulus {
        #[serde(default)]
        center: Point,
        r: f64,
        ks: Vec<f64>,
        n_curves: usize,
        pts_per_curve: usize,
        grid: usize,
        iterations: usize,
        mc_n: usize,
        #[serde(default)]
        min_lower_ratio: Option<f64>,
    },
    Koebe {
        map: SmoothMap,
        domain: Domain,
        /// Defaults to the exact image when the map/domain pair is a catalog pair.
        #[serde(default)]
        domain_image: Option<Domain>,
        points: usize,
        mc_n: usize,
        #[serde(default)]
        max_c_hat: Option<f64>,
    },
    BallImage {
        map: SmoothMap,
        ball: Ball,
        domain_image: Domain,
        samples: usize,
        #[serde(default)]
        max_containment: Option<f64>,
    },
    Qs {
        map: SmoothMap,
        domain: Domain,
        x: Point,
        #[serde(default = "five")]
        shrink: f64,
        triples: usize,
        #[serde(default)]
        max_h: Option<f64>,
    },
    DistEstimate {
        map: SmoothMap,
        domain: Domain,
        a_exp: f64,
        #[serde(default = "one")]
        lambda_knob: f64,
        pairs: usize,
        mc_n: usize,
        #[serde(default)]
        max_c: Option<f64>,
    },
    CurveDiam {
        map: SmoothMap,
        domain: Domain,
        curves: Vec<CurveSpec>,
        alpha: f64,
        mc_n: usize,
        #[serde(default)]
        max_ratio: Option<f64>,
    },
    /// Radial power stretch on shrinking axis segments.
    Sharpness { k_exp: f64, radii: Vec<f64> },
    CompareIntegrals {
        map: SmoothMap,
        domain: Domain,
        q_list: Vec<f64>,
        lambda: f64,
        collar: f64,
        grid: usize,
        mc_n: usize,
        /// Accept when every ratio lies in `[lo, hi]`.
        #[serde(default)]
        ratio_bounds: Option<[f64; 2]>,
    },
    Harnack {
        map: SmoothMap,
        domain: Domain,
        lambda: f64,
        collar: f64,
        grid: usize,
        pairs_per_ball: usize,
        mc_n: usize,
        #[serde(default)]
        max_ratio: Option<f64>,
    },
    DensityMetric {
        domain: Domain,
        density: DensitySpec,
        resolution: f64,
        collar: f64,
        center: Point,
        radii: Vec<f64>,
        #[serde(default = "upper_slope")]
        max_slope: f64,
        #[serde(default)]
        min_slope: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NestedSpec {
    pub x: Point,
    pub r1: f64,
    pub r2: f64,
    pub norm_bound: f64,
    pub n: usize,
}

impl Experiment {
    pub const NAMES: [&'static str; 15] = [
        "dist",
        "af",
        "bmo",
        "weights",
        "whitney",
        "modulus",
        "koebe",
        "ball-image",
        "qs",
        "dist-estimate",
        "curve-diam",
        "sharpness",
        "compare-integrals",
        "harnack",
        "density-metric",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Dist { .. } => "dist",
            Experiment::Af { .. } => "af",
            Experiment::Bmo { .. } => "bmo",
            Experiment::Weights { .. } => "weights",
            Experiment::Whitney { .. } => "whitney",
            Experiment::Modulus { .. } => "modulus",
            Experiment::Koebe { .. } => "koebe",
            Experiment::BallImage { .. } => "ball-image",
            Experiment::Qs { .. } => "qs",
            Experiment::DistEstimate { .. } => "dist-estimate",
            Experiment::CurveDiam { .. } => "curve-diam",
            Experiment::Sharpness { .. } => "sharpness",
            Experiment::CompareIntegrals { .. } => "compare-integrals",
            Experiment::Harnack { .. } => "harnack",
            Experiment::DensityMetric { .. } => "density-metric",
        }
    }

    /// Range checks beyond what the types enforce.
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{what} must be positive and finite, got {v}")))
            }
        };
        let nonzero = |n: usize, what: &str| -> Result<()> {
            if n > 0 {
                Ok(())
            } else {
                Err(CliError::Config(format!("{what} must be at least 1")))
            }
        };
        match self {
            Experiment::Dist { pairs } => nonzero(pairs.len(), "pairs"),
            Experiment::Af { points, shrink, mc_n, .. } => {
                nonzero(points.len(), "points")?;
                nonzero(*mc_n, "mc_n")?;
                if *shrink < 1.0 {
                    return Err(CliError::Config("shrink must be ≥ 1".into()));
                }
                Ok(())
            }
            Experiment::Bmo { ball_trials, n_per_ball, .. } => {
                nonzero(*ball_trials, "ball_trials")?;
                nonzero(*n_per_ball, "n_per_ball")
            }
            Experiment::Weights { balls, n, .. } => {
                nonzero(balls.len(), "balls")?;
                for b in balls {
                    positive(b.radius, "ball radius")?;
                }
                nonzero(*n, "n")
            }
            Experiment::Whitney { lambda, collar, grid, probes, .. } => {
                if !(*lambda > 0.0 && *lambda < 0.5) {
                    return Err(CliError::Config(format!("lambda must lie in (0, 1/2), got {lambda}")));
                }
                positive(*collar, "collar")?;
                nonzero(*grid, "grid")?;
                nonzero(*probes, "probes")
            }
            Experiment::Modulus { r, ks, n_curves, mc_n, .. } => {
                positive(*r, "r")?;
                nonzero(ks.len(), "ks")?;
                nonzero(*n_curves, "n_curves")?;
                nonzero(*mc_n, "mc_n")
            }
            Experiment::Koebe { points, mc_n, .. } => {
                nonzero(*points, "points")?;
                nonzero(*mc_n, "mc_n")
            }
            Experiment::BallImage { ball, samples, .. } => {
                positive(ball.radius, "ball radius")?;
                nonzero(*samples, "samples")
            }
            Experiment::Qs { triples, .. } => nonzero(*triples, "triples"),
            Experiment::DistEstimate { pairs, mc_n, .. } => {
                nonzero(*pairs, "pairs")?;
                nonzero(*mc_n, "mc_n")
            }
            Experiment::CurveDiam { curves, mc_n, .. } => {
                nonzero(curves.len(), "curves")?;
                nonzero(*mc_n, "mc_n")
            }
            Experiment::Sharpness { radii, .. } => nonzero(radii.len(), "radii"),
            Experiment::CompareIntegrals { q_list, collar, grid, mc_n, .. } => {
                nonzero(q_list.len(), "q_list")?;
                if let Some(q) = q_list.iter().find(|q| **q == 0.0 || !q.is_finite()) {
                    return Err(CliError::Config(format!("q_list entries must be finite and nonzero, got {q}")));
                }
                positive(*collar, "collar")?;
                nonzero(*grid, "grid")?;
                nonzero(*mc_n, "mc_n")
            }
            Experiment::Harnack { collar, grid, pairs_per_ball, mc_n, .. } => {
                positive(*collar, "collar")?;
                nonzero(*grid, "grid")?;
                nonzero(*pairs_per_ball, "pairs_per_ball")?;
                nonzero(*mc_n, "mc_n")
            }
            Experiment::DensityMetric { resolution, collar, radii, .. } => {
                positive(*resolution, "resolution")?;
                if !(*collar >= 0.0) {
                    return Err(CliError::Config("collar must be nonnegative".into()));
                }
                nonzero(radii.len(), "radii")
            }
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("schema violation at line {} column {}: {e}", e.line(), e.column()))
        })?;
        if cfg.version != CONFIG_VERSION {
            return Err(CliError::Config(format!(
                "unsupported config version {} (this build reads version {CONFIG_VERSION})",
                cfg.version
            )));
        }
        cfg.experiment.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_koebe_config() {
        let cfg = RunConfig::from_json(
            r#"{"version": 1, "seed": 3, "experiment": {"kind": "koebe",
                "map": {"kind": "dilation", "lambda": 2.0},
                "domain": {"kind": "punctured-space", "puncture": [0, 0, 0]},
                "points": 10, "mc_n": 16}}"#,
        )
        .unwrap();
        assert_eq!(cfg.experiment.name(), "koebe");
        assert_eq!(cfg.metric, Metric::Koranyi);
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        let bad = r#"{"version": 1, "experiment": {"kind": "sharpness", "k_exp": 0.5, "radii": [0.1], "extra": 1}}"#;
        let err = RunConfig::from_json(bad).unwrap_err().to_string();
        assert!(err.contains("extra") && err.contains("line"), "{err}");
        let top = r#"{"version": 1, "bogus": 0, "experiment": {"kind": "sharpness", "k_exp": 0.5, "radii": [0.1]}}"#;
        assert!(RunConfig::from_json(top).is_err());
        let v2 = r#"{"version": 2, "experiment": {"kind": "sharpness", "k_exp": 0.5, "radii": [0.1]}}"#;
        assert!(RunConfig::from_json(v2).unwrap_err().to_string().contains("version"));
    }

    #[test]
    fn nested_map_and_domain_reject_unknown_keys() {
        let bad = r#"{"version": 1, "experiment": {"kind": "af",
            "map": {"kind": "dilation", "lambda": 2.0, "mu": 1},
            "domain": {"kind": "koranyi-ball", "center": [0,0,0], "radius": 1},
            "points": [[0,0,0]], "mc_n": 4}}"#;
        assert!(RunConfig::from_json(bad).is_err());
        let bad_dom = r#"{"version": 1, "experiment": {"kind": "af",
            "map": {"kind": "dilation", "lambda": 2.0},
            "domain": {"kind": "koranyi-ball", "center": [0,0,0], "radius": 1, "colour": 2},
            "points": [[0,0,0]], "mc_n": 4}}"#;
        assert!(RunConfig::from_json(bad_dom).is_err());
    }

    #[test]
    fn zero_q_is_a_config_error() {
        let cfg = r#"{"version": 1, "experiment": {"kind": "compare-integrals",
            "map": {"kind": "dilation", "lambda": 2.0},
            "domain": {"kind": "koranyi-ball", "center": [0,0,0], "radius": 1},
            "q_list": [2, 0], "lambda": 0.4, "collar": 0.2, "grid": 100, "mc_n": 10}}"#;
        assert!(matches!(RunConfig::from_json(cfg), Err(CliError::Config(_))));
    }

    #[test]
    fn every_name_is_listed() {
        let ex = Experiment::Sharpness { k_exp: 0.5, radii: vec![0.1] };
        assert!(Experiment::NAMES.contains(&ex.name()));
    }
}
