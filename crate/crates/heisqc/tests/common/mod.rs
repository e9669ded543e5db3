//! Measurements shared by the acceptance runner and the baseline recorder.

#![allow(dead_code)]

use heisqc_core::experiments::{harnack_audit, koebe_scan};
use heisqc_core::covering::whitney;
use heisqc_core::integrate::{ap_weight_audit, reverse_holder_audit};
use heisqc_core::rng;
use heisqc_core::{Ball, Domain, Metric, Point, SmoothMap};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/baselines.json");

/// Measured constants for the Korányi inversion, recorded once and then held as regression bands.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Baselines {
    pub version: u32,
    /// Relative half-width of the accepted band around each recorded value.
    pub tolerance: f64,
    pub reverse_holder_max: f64,
    pub ap_max: f64,
    pub koebe_annulus_c_hat: f64,
    pub harnack_ratio: f64,
}

impl Baselines {
    pub fn load() -> Baselines {
        let s = std::fs::read_to_string(FIXTURE).expect("baseline fixture present");
        serde_json::from_str(&s).expect("baseline fixture parses")
    }

    pub fn in_band(&self, recorded: f64, measured: f64) -> bool {
        (measured / recorded - 1.0).abs() <= self.tolerance
    }
}

pub fn annulus() -> Domain {
    Domain::annulus(Point::ORIGIN, 0.5, 2.0).unwrap()
}

/// 100 Korányi balls with gauge distance at least four radii from the puncture.
pub fn far_balls(seed: u64) -> Vec<Ball> {
    (0..100)
        .map(|i| {
            let mut g = rng::stream(seed, rng::tag("acceptance/balls"), i);
            let norm = g.random_range(1.0..3.0);
            let theta = g.random_range(0.0..std::f64::consts::TAU);
            let phi = g.random_range(-1.0f64..1.0).asin();
            let rho = norm * phi.cos().sqrt();
            let c = Point::new(rho * theta.cos(), rho * theta.sin(), norm * norm * phi.sin());
            Ball::new(c, norm / 5.0, Metric::Koranyi).unwrap()
        })
        .collect()
}

/// Largest reverse-Hölder (p = 4.5) and A_p (p = 6) ratios of the inversion over [`far_balls`].
pub fn inversion_weight_maxima(seed: u64) -> (f64, f64) {
    let inv = SmoothMap::koranyi_inversion();
    let mut rh: f64 = 0.0;
    let mut ap: f64 = 0.0;
    for (i, b) in far_balls(seed).iter().enumerate() {
        let s = rng::derive_seed(seed, rng::tag("acceptance/weights"), i as u64);
        rh = rh.max(reverse_holder_audit(&inv, b, 4.5, 2000, s).unwrap().ratio);
        ap = ap.max(ap_weight_audit(&inv, b, 6.0, 2000, s).unwrap().ratio);
    }
    (rh, ap)
}

pub fn inversion_koebe(seed: u64) -> f64 {
    let inv = SmoothMap::koranyi_inversion();
    koebe_scan(&inv, &annulus(), &annulus(), Metric::Koranyi, 200, 4000, seed).unwrap().c_hat
}

pub fn inversion_harnack(seed: u64) -> f64 {
    let dom = annulus();
    let w = whitney(&dom, 0.4, 0.1, 20_000, Metric::Koranyi, seed).unwrap();
    harnack_audit(&SmoothMap::koranyi_inversion(), &dom, &w, 4, 400, seed).unwrap().max_ball_ratio
}

pub fn measure_baselines(seed: u64) -> Baselines {
    let (rh, ap) = inversion_weight_maxima(seed);
    Baselines {
        version: 1,
        tolerance: 0.1,
        reverse_holder_max: rh,
        ap_max: ap,
        koebe_annulus_c_hat: inversion_koebe(seed),
        harnack_ratio: inversion_harnack(seed),
    }
}
