//! Experiment dispatch: config in, report and CSV table out.

use heisqc_core::covering::{coverage_audit, overlap_profile, whitney};
use heisqc_core::experiments::{
    ahlfors_audit, ball_image_geometry, curve_diameter_audit, density_graph_build, distance_estimate_audit, harnack_audit,
    image_domain, integral_comparability, koebe_scan, qs_profile, sharpness_probe,
};
use heisqc_core::geometry::dist;
use heisqc_core::integrate::{
    ap_weight_audit, average_derivative, average_derivative_detail, bmo_estimate, nested_ball_bound_audit, reverse_holder_audit,
    Constant, FnField, LogGauge, LogJacobian, ScalarField,
};
use heisqc_core::modulus::{modulus_bounds, RingSpec};
use heisqc_core::rng;
use heisqc_core::{Metric, Point};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{DensitySpec, Experiment, FieldSpec, RunConfig};
use crate::error::{CliError, Result};
use crate::report::{f, i, p3, Check, Report, Table, REPORT_SCHEMA};

const TAG_AF: u64 = rng::tag("cli/af");
const TAG_RING: u64 = rng::tag("cli/ring");
const TAG_BALL: u64 = rng::tag("cli/ball");
const TAG_DENSITY: u64 = rng::tag("cli/density");

/// Report plus its per-sample table.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub table: Table,
}

struct Parts {
    value: f64,
    std_error: Option<f64>,
    checks: Vec<Check>,
    detail: Value,
    table: Table,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialise")
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn execute(cfg: &RunConfig, seed: u64) -> Result<Outcome> {
    let m = cfg.metric;
    let parts = match &cfg.experiment {
        Experiment::Dist { pairs } => run_dist(pairs)?,
        Experiment::Af { map, domain, points, shrink, mc_n } => {
            let mut t = Table::new(&["x", "y", "t", "boundary_distance", "radius", "a_f", "a_f_std_error"]);
            let mut worst = (0.0f64, 0.0);
            let mut ok = true;
            for (k, &x) in points.iter().enumerate() {
                let a = average_derivative_detail(map, domain, x, m, *shrink, *mc_n, rng::derive_seed(seed, TAG_AF, k as u64))?;
                ok &= a.value > 0.0 && a.value.is_finite();
                if a.value > worst.0 {
                    worst = (a.value, a.std_error());
                }
                let [px, py, pt] = p3(x);
                t.push(vec![px, py, pt, f(a.boundary_distance), f(a.radius), f(a.value), f(a.std_error())]);
            }
            Parts { value: worst.0, std_error: Some(worst.1), checks: vec![Check::holds("a_f finite and positive", ok)], detail: Value::Null, table: t }
        }
        Experiment::Bmo { field, domain, factor, ball_trials, n_per_ball, nested, max_norm } => {
            let u: Box<dyn ScalarField + '_> = match field {
                FieldSpec::Constant { value } => Box::new(Constant(*value)),
                FieldSpec::LogJacobian { map } => Box::new(LogJacobian(map)),
                FieldSpec::LogGauge { center } => Box::new(LogGauge(*center)),
            };
            let est = bmo_estimate(u.as_ref(), domain, *factor, *ball_trials, *n_per_ball, seed, m)?;
            let mut checks = Vec::new();
            if let Some(mx) = max_norm {
                checks.push(Check::at_most("bmo norm lower bound", est.norm_lower_bound, *mx));
            }
            let nested_report = match nested {
                Some(ns) => {
                    let r = nested_ball_bound_audit(u.as_ref(), ns.x, ns.r1, ns.r2, ns.norm_bound, ns.n, seed, m)?;
                    checks.push(Check::at_most("nested-ball mean difference minus 3 sigma", r.lhs - 3.0 * r.std_error, r.rhs));
                    Some(r)
                }
                None => None,
            };
            let mut t = Table::new(&["trial", "running_max"]);
            for (k, v) in est.history.iter().enumerate() {
                t.push(vec![i(k), f(*v)]);
            }
            Parts {
                value: est.norm_lower_bound,
                std_error: None,
                checks,
                detail: json!({"estimate": to_value(&est), "nested": to_value(&nested_report)}),
                table: t,
            }
        }
        Experiment::Weights { map, balls, p_exp, n, max_ratio } => {
            let mut t = Table::new(&[
                "ball", "x", "y", "t", "radius", "rh_ratio", "rh_std_error", "ap_ratio", "ap_std_error", "geometric_mean_j", "mean_j",
            ]);
            let mut worst = (0.0f64, 0.0);
            let mut jensen = true;
            let mut rows = Vec::new();
            for (k, b) in balls.iter().enumerate() {
                let s = rng::derive_seed(seed, TAG_BALL, k as u64);
                let rh = reverse_holder_audit(map, b, *p_exp, *n, s)?;
                let ap = ap_weight_audit(map, b, *p_exp, *n, s)?;
                // Power-mean inequalities hold for the empirical measure as well.
                jensen &= rh.ratio >= 1.0 - 1e-12 && ap.ratio >= 1.0 - 1e-12;
                for r in [&rh, &ap] {
                    if r.ratio > worst.0 {
                        worst = (r.ratio, r.std_error);
                    }
                }
                let [px, py, pt] = p3(b.center);
                t.push(vec![i(k), px, py, pt, f(b.radius), f(rh.ratio), f(rh.std_error), f(ap.ratio), f(ap.std_error), f(rh.geometric_mean_j), f(rh.mean_j)]);
                rows.push(json!({"reverse_holder": to_value(&rh), "a_p": to_value(&ap)}));
            }
            let mut checks = vec![Check::holds("ratios at least 1", jensen)];
            if let Some(mx) = max_ratio {
                checks.push(Check::at_most("max ratio", worst.0, *mx));
            }
            Parts { value: worst.0, std_error: Some(worst.1), checks, detail: Value::Array(rows), table: t }
        }
        Experiment::Whitney { domain, lambda, collar, grid, probes, min_coverage } => {
            let mut w = whitney(domain, *lambda, *collar, *grid, m, seed)?;
            let cov = coverage_audit(&w, *probes, seed)?;
            let ov = overlap_profile(&w, *probes, seed)?;
            w.overlap_bound_observed = ov.max_multiplicity;
            let mut checks = vec![
                Check::at_most("(3') violations", w.property_violations() as f64, 0.0),
                Check::at_most("pre-enlargement overlaps", w.disjointness_violations()? as f64, 0.0),
            ];
            if let Some(mc) = min_coverage {
                checks.push(Check::at_least("probe coverage", cov.fraction, *mc));
            }
            let mut t = Table::new(&["x", "y", "t", "radius", "boundary_distance", "layer"]);
            for (b, d) in w.balls.iter().zip(&w.boundary_distances) {
                let [px, py, pt] = p3(b.center);
                t.push(vec![px, py, pt, f(b.radius), f(*d), i(d.log2().ceil() as i32)]);
            }
            let se = (cov.fraction * (1.0 - cov.fraction) / cov.probes as f64).sqrt();
            let detail = json!({
                "lambda": w.lambda,
                "c1": w.c1,
                "c2": w.c2,
                "collar": w.collar,
                "metric": w.metric,
                "balls": w.balls.iter().map(|b| json!({"center": b.center, "radius": b.radius})).collect::<Vec<_>>(),
                "layers": to_value(&w.layers),
                "coverage": to_value(&cov),
                "overlap": to_value(&ov),
                "overlap_bound_observed": w.overlap_bound_observed,
            });
            Parts { value: cov.fraction, std_error: Some(se), checks, detail, table: t }
        }
        Experiment::Modulus { center, r, ks, n_curves, pts_per_curve, grid, iterations, mc_n, min_lower_ratio } => {
            let mut t = Table::new(&["k", "upper", "upper_std_error", "reference", "lower", "lower_primal", "lower_over_upper", "slack"]);
            let mut rows = Vec::new();
            let mut consistent = true;
            let mut min_ratio = f64::INFINITY;
            for (idx, &k) in ks.iter().enumerate() {
                let spec = RingSpec::new(*center, *r, k)?;
                let b = modulus_bounds(&spec, *n_curves, *pts_per_curve, *grid, *iterations, *mc_n, rng::derive_seed(seed, TAG_RING, idx as u64))?;
                consistent &= b.lower <= b.upper + b.slack;
                min_ratio = min_ratio.min(b.lower / b.upper);
                t.push(vec![f(k), f(b.upper), f(b.upper_std_error), f(b.reference), f(b.lower), f(b.lower_primal), f(b.lower / b.upper), f(b.slack)]);
                rows.push(b);
            }
            let mut checks = vec![Check::holds("lower <= upper + slack", consistent)];
            if let Some(mn) = min_lower_ratio {
                checks.push(Check::at_least("min lower/upper", min_ratio, *mn));
            }
            let value = if rows.len() >= 2 {
                let xs: Vec<f64> = rows.iter().map(|b| b.spec.k.ln().ln()).collect();
                let ys: Vec<f64> = rows.iter().map(|b| b.upper.ln()).collect();
                fit_slope(&xs, &ys)
            } else {
                rows[0].upper
            };
            Parts { value, std_error: None, checks, detail: json!({"rings": to_value(&rows), "min_lower_over_upper": min_ratio}), table: t }
        }
        Experiment::Koebe { map, domain, domain_image, points, mc_n, max_c_hat } => {
            let img = match domain_image {
                Some(d) => *d,
                None => image_domain(map, domain).ok_or_else(|| {
                    CliError::Config(format!(
                        "no exact image of the {} domain under {}; give domain_image explicitly",
                        domain.kind_name(),
                        map.name()
                    ))
                })?,
            };
            let r = koebe_scan(map, domain, &img, m, *points, *mc_n, seed)?;
            let mut checks = vec![Check::holds("c_hat finite", r.c_hat.is_finite())];
            if let Some(mx) = max_c_hat {
                checks.push(Check::at_most("c_hat", r.c_hat, *mx));
            }
            let mut t = Table::new(&[
                "x", "y", "t", "boundary_distance", "image_boundary_distance", "a_f", "a_f_std_error", "boundary_ratio", "log_discrepancy",
            ]);
            for rec in &r.records {
                let [px, py, pt] = p3(rec.x);
                t.push(vec![
                    px,
                    py,
                    pt,
                    f(rec.boundary_distance),
                    f(rec.image_boundary_distance),
                    f(rec.a_f),
                    f(rec.a_f_std_error),
                    f(rec.boundary_ratio),
                    f(rec.log_discrepancy),
                ]);
            }
            let detail = json!({"c_hat": r.c_hat, "c_hat_std_error": r.c_hat_std_error, "metric": r.metric, "domain_image": img});
            Parts { value: r.c_hat, std_error: Some(r.c_hat_std_error), checks, detail, table: t }
        }
        Experiment::BallImage { map, ball, domain_image, samples, max_containment } => {
            let r = ball_image_geometry(map, ball, domain_image, *samples, seed)?;
            let mut checks = vec![Check::holds("containment finite", r.containment_k.is_finite())];
            if let Some(mx) = max_containment {
                checks.push(Check::at_most("containment k", r.containment_k, *mx));
            }
            let mut t = Table::new(&[
                "diam_image",
                "dist_image_to_boundary",
                "center_image_boundary_distance",
                "inner_radius",
                "outer_radius",
                "containment_k",
                "diam_ratio",
                "samples",
            ]);
            t.push(vec![
                f(r.diam_image),
                f(r.dist_image_to_boundary),
                f(r.center_image_boundary_distance),
                f(r.inner_radius),
                f(r.outer_radius),
                f(r.containment_k),
                f(r.diam_ratio),
                i(r.samples),
            ]);
            Parts { value: r.containment_k, std_error: None, checks, detail: to_value(&r), table: t }
        }
        Experiment::Qs { map, domain, x, shrink, triples, max_h } => {
            let r = qs_profile(map, domain, *x, *shrink, *triples, seed, m)?;
            let mut checks = vec![Check::holds("H_f finite", r.h_f_hat.is_finite())];
            if let Some(mx) = max_h {
                checks.push(Check::at_most("H_f estimate", r.h_f_hat, *mx));
            }
            let mut t = Table::new(&["t", "ratio"]);
            for s in &r.samples {
                t.push(vec![f(s.t), f(s.ratio)]);
            }
            let detail = json!({
                "egg_yolk_shrink": r.egg_yolk_shrink,
                "egg_yolk_radius": r.egg_yolk_radius,
                "eta_envelope": to_value(&r.eta_envelope),
                "h_by_radius": to_value(&r.h_by_radius),
                "h_f_hat": r.h_f_hat,
            });
            Parts { value: r.h_f_hat, std_error: None, checks, detail, table: t }
        }
        Experiment::DistEstimate { map, domain, a_exp, lambda_knob, pairs, mc_n, max_c } => {
            let r = distance_estimate_audit(map, domain, *a_exp, *lambda_knob, *pairs, *mc_n, seed, m)?;
            let mut checks = vec![Check::holds("c finite", r.c_max.is_finite())];
            if let Some(mx) = max_c {
                checks.push(Check::at_most("c_max", r.c_max, *mx));
            }
            let mut t = Table::new(&[
                "x1", "y1", "t1", "x2", "y2", "t2", "boundary_distance", "distance", "image_distance", "a_f", "c_pair",
            ]);
            for p in &r.pairs {
                let [a, b, c] = p3(p.z1);
                let [d, e, g] = p3(p.z2);
                t.push(vec![a, b, c, d, e, g, f(p.boundary_distance), f(p.distance), f(p.image_distance), f(p.a_f), f(p.c_pair)]);
            }
            let detail = json!({"a_exp": r.a_exp, "lambda_knob": r.lambda_knob, "c_max": r.c_max, "c_median": r.c_median});
            Parts { value: r.c_max, std_error: None, checks, detail, table: t }
        }
        Experiment::CurveDiam { map, domain, curves, alpha, mc_n, max_ratio } => {
            let built = curves.iter().map(|c| c.build()).collect::<Result<Vec<_>>>()?;
            let recs = curve_diameter_audit(map, domain, &built, *alpha, *mc_n, seed, m)?;
            let worst = recs.iter().filter(|r| r.alpha_ok).map(|r| r.ratio).fold(0.0, f64::max);
            let mut checks = vec![Check::holds("some curve admissible", recs.iter().any(|r| r.alpha_ok))];
            if let Some(mx) = max_ratio {
                checks.push(Check::at_most("max ratio over admissible curves", worst, *mx));
            }
            let mut t = Table::new(&["curve", "length", "boundary_distance", "alpha_ok", "diam_image", "weighted_length", "ratio"]);
            for (k, r) in recs.iter().enumerate() {
                t.push(vec![i(k), f(r.length), f(r.boundary_distance), i(r.alpha_ok), f(r.diam_image), f(r.weighted_length), f(r.ratio)]);
            }
            Parts { value: worst, std_error: None, checks, detail: to_value(&recs), table: t }
        }
        Experiment::Sharpness { k_exp, radii } => {
            let mut rs = radii.clone();
            rs.sort_by(|a, b| b.total_cmp(a));
            let mut t = Table::new(&["r", "length", "diam_image", "ratio"]);
            let mut out = Vec::new();
            for &r in &rs {
                let s = sharpness_probe(*k_exp, r)?;
                t.push(vec![f(r), f(s.length), f(s.diam_image), f(s.ratio)]);
                out.push(s);
            }
            let trend = if *k_exp < 1.0 {
                Check::holds("ratio increases as r decreases", out.windows(2).all(|w| w[1].ratio > w[0].ratio))
            } else {
                Check::holds("ratio identically 1", out.iter().all(|s| (s.ratio - 1.0).abs() < 1e-12))
            };
            Parts { value: out.last().unwrap().ratio, std_error: None, checks: vec![trend], detail: to_value(&out), table: t }
        }
        Experiment::CompareIntegrals { map, domain, q_list, lambda, collar, grid, mc_n, ratio_bounds } => {
            let w = whitney(domain, *lambda, *collar, *grid, m, seed)?;
            let r = integral_comparability(map, domain, q_list, &w, *mc_n, seed)?;
            let mut checks = vec![Check::holds("ratios finite", r.rows.iter().all(|row| row.ratio.is_finite() && row.ratio > 0.0))];
            if let Some([lo, hi]) = ratio_bounds {
                for row in &r.rows {
                    checks.push(Check::within(&format!("ratio at q = {}", row.q), row.ratio, *lo, *hi));
                }
            }
            let mut t = Table::new(&["q", "int_opnorm", "int_af", "ratio", "ratio_std_error"]);
            for row in &r.rows {
                t.push(vec![f(row.q), f(row.int_opnorm), f(row.int_af), f(row.ratio), f(row.ratio_std_error)]);
            }
            Parts { value: r.rows[0].ratio, std_error: Some(r.rows[0].ratio_std_error), checks, detail: to_value(&r), table: t }
        }
        Experiment::Harnack { map, domain, lambda, collar, grid, pairs_per_ball, mc_n, max_ratio } => {
            let w = whitney(domain, *lambda, *collar, *grid, m, seed)?;
            let r = harnack_audit(map, domain, &w, *pairs_per_ball, *mc_n, seed)?;
            let mut checks = vec![Check::holds("ratio finite", r.max_ball_ratio.is_finite())];
            if let Some(mx) = max_ratio {
                checks.push(Check::at_most("max ball ratio", r.max_ball_ratio, *mx));
            }
            let mut t = Table::new(&["ball", "x", "y", "t", "radius", "ratio"]);
            for (k, (b, v)) in w.balls.iter().zip(&r.per_ball).enumerate() {
                let [px, py, pt] = p3(b.center);
                t.push(vec![i(k), px, py, pt, f(b.radius), f(*v)]);
            }
            let detail = json!({"max_ball_ratio": r.max_ball_ratio, "worst_ball": r.worst_ball, "balls": w.balls.len()});
            Parts { value: r.max_ball_ratio, std_error: None, checks, detail, table: t }
        }
        Experiment::DensityMetric { domain, density, resolution, collar, center, radii, max_slope, min_slope } => {
            let dom = *domain;
            let rho: Box<dyn ScalarField + '_> = match density {
                DensitySpec::Constant { value } => Box::new(Constant(*value)),
                DensitySpec::AverageDerivative { map, mc_n } => {
                    let n = *mc_n;
                    Box::new(FnField {
                        label: format!("a_f of {}", map.name()),
                        f: move |p: Point| average_derivative(map, &dom, p, m, 1.0, n, rng::derive_seed(seed, TAG_DENSITY, point_key(p))),
                    })
                }
            };
            let g = density_graph_build(&dom, rho.as_ref(), *resolution, *collar, seed)?;
            let a = ahlfors_audit(&g, *center, radii)?;
            let mut checks = vec![Check::at_most("log-log slope", a.loglog_slope, *max_slope)];
            if let Some(mn) = min_slope {
                checks.push(Check::at_least("log-log slope", a.loglog_slope, *mn));
            }
            let mut t = Table::new(&["radius", "mu_rho", "mu_over_r4"]);
            for (r, mu) in a.radii.iter().zip(&a.mu_rho) {
                t.push(vec![f(*r), f(*mu), f(mu / r.powi(4))]);
            }
            let detail = json!({"ahlfors": to_value(&a), "nodes": g.node_count(), "resolution": g.resolution, "density": g.rho_name});
            Parts { value: a.loglog_slope, std_error: None, checks, detail, table: t }
        }
    };
    let pass = parts.checks.iter().all(|c| c.pass);
    let report = Report {
        schema: REPORT_SCHEMA,
        op: cfg.experiment.name().into(),
        seed,
        inputs: json!({"metric": cfg.metric, "experiment": to_value(&cfg.experiment)}),
        value: parts.value,
        std_error: parts.std_error,
        pass,
        checks: parts.checks,
        detail: parts.detail,
    };
    Ok(Outcome { report, table: parts.table })
}

fn point_key(p: Point) -> u64 {
    p.x.to_bits() ^ p.y.to_bits().rotate_left(21) ^ p.t.to_bits().rotate_left(42)
}

fn run_dist(pairs: &[[Point; 2]]) -> Result<Parts> {
    let mut t = Table::new(&["px", "py", "pt", "qx", "qy", "qt", "d_koranyi", "d_sub_riemannian", "ratio"]);
    let mut sandwich = true;
    let mut worst = 0.0f64;
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    for [p, q] in pairs {
        let dh = dist(Metric::Koranyi, *p, *q)?;
        let ds = dist(Metric::SubRiemannian, *p, *q)?;
        sandwich &= inv_sqrt_pi * ds <= dh * (1.0 + 1e-9) && dh <= ds * (1.0 + 1e-9);
        let ratio = if ds > 0.0 { dh / ds } else { 1.0 };
        worst = worst.max(ratio);
        let [a, b, c] = p3(*p);
        let [d, e, g] = p3(*q);
        t.push(vec![a, b, c, d, e, g, f(dh), f(ds), f(ratio)]);
    }
    Ok(Parts {
        value: worst,
        std_error: None,
        checks: vec![Check::holds("d_s/sqrt(pi) <= d_H <= d_s", sandwich)],
        detail: Value::Null,
        table: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let xs: Vec<f64> = [1.0f64, 2.0, 4.0].iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = [1.0f64, 16.0, 256.0].iter().map(|y| y.ln()).collect();
        assert!((fit_slope(&xs, &ys) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn dist_reports_anchor_values() {
        let cfg = RunConfig::from_json(r#"{"version": 1, "experiment": {"kind": "dist", "pairs": [[[0,0,0],[3,4,0]], [[0,0,0],[0,0,1]]]}}"#).unwrap();
        let out = execute(&cfg, 0).unwrap();
        assert!(out.report.pass);
        let csv = String::from_utf8(out.table.to_csv().unwrap()).unwrap();
        let rows: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert_eq!(rows[0][6], 5.0);
        assert!((rows[0][7] - 5.0).abs() < 1e-9);
        assert!((rows[1][7] - std::f64::consts::PI.sqrt()).abs() < 1e-9);
        assert!((rows[1][6] - 1.0).abs() < 1e-15);
    }
}
