//! Whitney-ball quadrature: integral comparability and the Harnack-type audit.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::maximal_ball_af;
use crate::covering::{BallIndex, WhitneyDecomposition};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::integrate::sample_ball;
use crate::maps::SmoothMap;
use crate::par;
use crate::rng;
use crate::stats::pairwise_sum;

const TAG_QUAD: u64 = rng::tag("comparability/quadrature");
const TAG_AF: u64 = rng::tag("comparability/af");
const TAG_HARNACK: u64 = rng::tag("harnack/points");

/// Samples per inner `a_f` estimate.
pub const INNER_AF_N: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparabilityRow {
    pub q: f64,
    /// `∫ ‖D_H f‖^q dm`.
    pub int_opnorm: f64,
    /// `∫ a_f^q dm`.
    pub int_af: f64,
    /// `int_opnorm / int_af`.
    pub ratio: f64,
    pub ratio_std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparabilityReport {
    pub rows: Vec<ComparabilityRow>,
    pub collar: f64,
    pub balls: usize,
    /// Quadrature points with `d > collar` (others get weight 0).
    pub points_used: usize,
    /// Estimated measure of the covered collar region.
    pub volume: f64,
}

/// One quadrature point: weight `1/multiplicity` and the two integrands' bases.
struct Node {
    weight: f64,
    opnorm: f64,
    af: f64,
}

fn quadrature_nodes(f: &SmoothMap, dom: &Domain, w: &WhitneyDecomposition, per_ball: usize, seed: u64) -> Result<Vec<Vec<Node>>> {
    let index = BallIndex::new(&w.balls, 1.0);
    par::try_map_indexed(w.balls.len(), |j| {
        let pts = sample_ball(&w.balls[j], per_ball, rng::derive_seed(seed, TAG_QUAD, j as u64))?;
        let mut out = Vec::with_capacity(pts.len());
        for (i, &p) in pts.iter().enumerate() {
            let d = if dom.contains(p) { dom.boundary_distance(p, w.metric)? } else { 0.0 };
            let mult = index.containing(p)?.len();
            if d <= w.collar || mult == 0 {
                out.push(Node { weight: 0.0, opnorm: 1.0, af: 1.0 });
                continue;
            }
            let key = (j * per_ball + i) as u64;
            let af = maximal_ball_af(f, p, d, w.metric, INNER_AF_N, rng::derive_seed(seed, TAG_AF, key))?.value;
            let opnorm = f.horizontal_differential(p)?.op_norm;
            out.push(Node { weight: 1.0 / mult as f64, opnorm, af });
        }
        Ok(out)
    })
}

/// `∫ ‖D_H f‖^q` against `∫ a_f^q` over the collar-restricted domain.
///
/// Each Whitney ball is integrated by uniform Monte Carlo; every sample is weighted by
/// the reciprocal of the number of emitted balls containing it, so overlaps count once,
/// and samples within the collar get weight zero.
pub fn integral_comparability(
    f: &SmoothMap,
    dom: &Domain,
    q_list: &[f64],
    w: &WhitneyDecomposition,
    mc_n: usize,
    seed: u64,
) -> Result<ComparabilityReport> {
    if q_list.is_empty() {
        return Err(Error::invalid("q_list must be nonempty"));
    }
    if q_list.iter().any(|&q| q == 0.0 || !q.is_finite()) {
        return Err(Error::invalid("every q must be finite and nonzero"));
    }
    let per_ball = (mc_n / w.balls.len()).max(2);
    let nodes = quadrature_nodes(f, dom, w, per_ball, seed)?;
    let used = nodes.iter().flatten().filter(|n| n.weight > 0.0).count();
    if used == 0 {
        return Err(Error::config("no quadrature point lies beyond the collar"));
    }
    let vols: Vec<f64> = w.balls.iter().map(|b| b.volume()).collect();
    let volume = {
        let per: Vec<f64> = nodes.iter().zip(&vols).map(|(ns, v)| v * ns.iter().map(|n| n.weight).sum::<f64>() / ns.len() as f64).collect();
        pairwise_sum(&per)
    };
    let rows = q_list
        .iter()
        .map(|&q| {
            // Per-ball means of A = w·‖D_H f‖^q and B = w·a_f^q with their (co)variances.
            let mut a = Vec::with_capacity(nodes.len());
            let mut b = Vec::with_capacity(nodes.len());
            let (mut va, mut vb, mut cab) = (Vec::new(), Vec::new(), Vec::new());
            for (ns, &v) in nodes.iter().zip(&vols) {
                let n = ns.len() as f64;
                let xa: Vec<f64> = ns.iter().map(|s| s.weight * libm::pow(s.opnorm, q)).collect();
                let xb: Vec<f64> = ns.iter().map(|s| s.weight * libm::pow(s.af, q)).collect();
                let (ma, mb) = (pairwise_sum(&xa) / n, pairwise_sum(&xb) / n);
                let mut s = [0.0; 3];
                for (x, y) in xa.iter().zip(&xb) {
                    s[0] += (x - ma) * (x - ma);
                    s[1] += (y - mb) * (y - mb);
                    s[2] += (x - ma) * (y - mb);
                }
                let k = v * v / (n * (n - 1.0));
                a.push(v * ma);
                b.push(v * mb);
                va.push(k * s[0]);
                vb.push(k * s[1]);
                cab.push(k * s[2]);
            }
            let (ia, ib) = (pairwise_sum(&a), pairwise_sum(&b));
            let ratio = ia / ib;
            let rel = pairwise_sum(&va) / (ia * ia) + pairwise_sum(&vb) / (ib * ib) - 2.0 * pairwise_sum(&cab) / (ia * ib);
            ComparabilityRow { q, int_opnorm: ia, int_af: ib, ratio, ratio_std_error: ratio * libm::sqrt(rel.max(0.0)) }
        })
        .collect();
    Ok(ComparabilityReport { rows, collar: w.collar, balls: w.balls.len(), points_used: used, volume })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnackReport {
    /// `max a_f(x)/a_f(y)` over sampled pairs in any single Whitney ball.
    pub max_ball_ratio: f64,
    pub worst_ball: usize,
    pub per_ball: Vec<f64>,
}

/// Harnack-type comparison of `a_f` at sampled pairs inside each Whitney ball.
pub fn harnack_audit(f: &SmoothMap, dom: &Domain, w: &WhitneyDecomposition, pairs_per_ball: usize, mc_n: usize, seed: u64) -> Result<HarnackReport> {
    if pairs_per_ball == 0 {
        return Err(Error::invalid("pairs_per_ball must be at least 1"));
    }
    let per_ball = par::try_map_indexed(w.balls.len(), |j| {
        let pts: Vec<Point> = sample_ball(&w.balls[j], 2 * pairs_per_ball, rng::derive_seed(seed, TAG_HARNACK, j as u64))?;
        let mut worst = 1.0f64;
        for k in 0..pairs_per_ball {
            let mut af = [0.0; 2];
            for (s, v) in af.iter_mut().enumerate() {
                let p = pts[2 * k + s];
                let d = dom.boundary_distance(p, w.metric)?;
                let key = ((j as u64) << 24) | (2 * k + s) as u64;
                *v = maximal_ball_af(f, p, d, w.metric, mc_n, rng::derive_seed(seed, TAG_AF, key))?.value;
            }
            worst = worst.max(af[0] / af[1]).max(af[1] / af[0]);
        }
        Ok(worst)
    })?;
    let worst_ball = (0..per_ball.len()).fold(0, |b, i| if per_ball[i] > per_ball[b] { i } else { b });
    Ok(HarnackReport { max_ball_ratio: per_ball[worst_ball], worst_ball, per_ball })
}
