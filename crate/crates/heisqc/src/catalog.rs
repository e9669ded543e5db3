//! Catalog of maps, domains and experiments, as text or JSON.

use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MapEntry {
    pub name: &'static str,
    pub kind: &'static str,
    pub params: &'static str,
    pub notes: &'static str,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DomainEntry {
    pub name: &'static str,
    pub kind: &'static str,
    pub params: &'static str,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExperimentEntry {
    pub name: &'static str,
    pub audits: &'static str,
    pub value: &'static str,
    pub csv_columns: &'static [&'static str],
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Catalog {
    pub maps: &'static [MapEntry],
    pub domains: &'static [DomainEntry],
    pub experiments: &'static [ExperimentEntry],
}

pub const MAPS: &[MapEntry] = &[
    MapEntry { name: "LeftTranslation", kind: "left-translation", params: "g: [x, y, t]", notes: "isometry, J = 1" },
    MapEntry { name: "Dilation", kind: "dilation", params: "lambda > 0", notes: "D_H f = lambda I, J = lambda^4, K = 1" },
    MapEntry { name: "Rotation", kind: "rotation", params: "theta (radians)", notes: "isometry of the horizontal plane, t fixed" },
    MapEntry {
        name: "HorizontalStretch",
        kind: "horizontal-stretch",
        params: "a > 0",
        notes: "(a x, y/a, t); D_H f = diag(a, 1/a), J = 1, K = max(a, 1/a)^4",
    },
    MapEntry {
        name: "Shear",
        kind: "shear",
        params: "phi: expression in x",
        notes: "(x, y + phi(x), t + 4 Phi(x) - 2 x phi(x)), Phi' = phi; contact with J = 1",
    },
    MapEntry {
        name: "KoranyiInversion",
        kind: "koranyi-inversion",
        params: "(none)",
        notes: "conformal inversion in the unit gauge sphere on the space minus the origin; J = |p|^-8",
    },
    MapEntry { name: "Composition", kind: "composition", params: "maps: [map, ...] (last applied first)", notes: "" },
    MapEntry {
        name: "UserDSL",
        kind: "dsl",
        params: "fx, fy, ft: expressions in x, y, t",
        notes: "+ - * / ^, sin cos exp log sqrt abs, pi; differentials by finite differences",
    },
];

pub const DOMAINS: &[DomainEntry] = &[
    DomainEntry { name: "KoranyiBall", kind: "koranyi-ball", params: "center: [x, y, t], radius > 0" },
    DomainEntry {
        name: "PuncturedSpace",
        kind: "punctured-space",
        params: "puncture: [x, y, t], window > 0 (default 1; sampling shell only)",
    },
    DomainEntry { name: "KoranyiAnnulus", kind: "koranyi-annulus", params: "center: [x, y, t], 0 < r_in < r_out" },
    DomainEntry { name: "Box", kind: "box", params: "lo: [x, y, t], hi: [x, y, t] (Euclidean bounds)" },
];

pub const EXPERIMENTS: &[ExperimentEntry] = &[
    ExperimentEntry {
        name: "dist",
        audits: "sandwich between the Korányi and sub-Riemannian distances: d_s/sqrt(pi) <= d_H <= d_s",
        value: "max d_H/d_s",
        csv_columns: &["px", "py", "pt", "qx", "qy", "qt", "d_koranyi", "d_sub_riemannian", "ratio"],
    },
    ExperimentEntry {
        name: "af",
        audits: "average derivative a_f = exp(mean log J_f / 4) over B(x, d(x, boundary)/shrink)",
        value: "largest a_f",
        csv_columns: &["x", "y", "t", "boundary_distance", "radius", "a_f", "a_f_std_error"],
    },
    ExperimentEntry {
        name: "bmo",
        audits: "local BMO norm lower bound; optional nested-ball bound |u_B1 - u_B2| <= (e/2)(log(|B1|/|B2|) + 1) ||u||_*",
        value: "BMO norm lower bound",
        csv_columns: &["trial", "running_max"],
    },
    ExperimentEntry {
        name: "weights",
        audits: "reverse Hölder and A_p inequalities for the Jacobian of a quasiconformal map",
        value: "largest reverse-Hölder or A_p ratio",
        csv_columns: &[
            "ball", "x", "y", "t", "radius", "rh_ratio", "rh_std_error", "ap_ratio", "ap_std_error", "geometric_mean_j", "mean_j",
        ],
    },
    ExperimentEntry {
        name: "whitney",
        audits: "Whitney decomposition: c1 d <= r <= c2 d, pre-enlargement disjointness, bounded overlap",
        value: "probe coverage fraction",
        csv_columns: &["x", "y", "t", "radius", "boundary_distance", "layer"],
    },
    ExperimentEntry {
        name: "modulus",
        audits: "4-modulus of a ring of ratio k behaves like omega_4 (log k)^-3",
        value: "log-log slope of the upper bound against log k (upper bound for a single k)",
        csv_columns: &["k", "upper", "upper_std_error", "reference", "lower", "lower_primal", "lower_over_upper", "slack"],
    },
    ExperimentEntry {
        name: "koebe",
        audits: "Koebe-type distortion: d(f(x), boundary') comparable to a_f(x) d(x, boundary)",
        value: "c_hat = exp(max |log a_f - log boundary ratio|)",
        csv_columns: &[
            "x", "y", "t", "boundary_distance", "image_boundary_distance", "a_f", "a_f_std_error", "boundary_ratio", "log_discrepancy",
        ],
    },
    ExperimentEntry {
        name: "ball-image",
        audits: "images of Whitney-type balls are comparable to balls: B' within f(B) within kB'",
        value: "containment k",
        csv_columns: &[
            "diam_image",
            "dist_image_to_boundary",
            "center_image_boundary_distance",
            "inner_radius",
            "outer_radius",
            "containment_k",
            "diam_ratio",
            "samples",
        ],
    },
    ExperimentEntry {
        name: "qs",
        audits: "egg-yolk principle: quasisymmetry on B(x, d/shrink), with eta envelope and H_f",
        value: "H_f estimate at the smallest sphere radius",
        csv_columns: &["t", "ratio"],
    },
    ExperimentEntry {
        name: "dist-estimate",
        audits: "Hölder-type distance estimate d(fz1, fz2) <= C a_f(z1) d(z1, boundary)^a d(z1, z2)^(1-a)",
        value: "largest constant C",
        csv_columns: &["x1", "y1", "t1", "x2", "y2", "t2", "boundary_distance", "distance", "image_distance", "a_f", "c_pair"],
    },
    ExperimentEntry {
        name: "curve-diam",
        audits: "diam f(gamma) <= C integral of a_f along gamma for curves with length >= alpha d(gamma, boundary)",
        value: "largest ratio over admissible curves",
        csv_columns: &["curve", "length", "boundary_distance", "alpha_ok", "diam_image", "weighted_length", "ratio"],
    },
    ExperimentEntry {
        name: "sharpness",
        audits: "the curve-diameter bound fails without the length condition: ratio r^(k-1) diverges for k < 1",
        value: "ratio at the smallest radius",
        csv_columns: &["r", "length", "diam_image", "ratio"],
    },
    ExperimentEntry {
        name: "compare-integrals",
        audits: "integral comparability of ||D_H f||^q and a_f^q over the domain",
        value: "ratio at the first q",
        csv_columns: &["q", "int_opnorm", "int_af", "ratio", "ratio_std_error"],
    },
    ExperimentEntry {
        name: "harnack",
        audits: "Harnack-type comparability of a_f within each Whitney ball",
        value: "largest within-ball a_f ratio",
        csv_columns: &["ball", "x", "y", "t", "radius", "ratio"],
    },
    ExperimentEntry {
        name: "density-metric",
        audits: "Ahlfors 4-regularity of mu_rho on balls of the density metric d_rho",
        value: "log-log slope of mu_rho against r",
        csv_columns: &["radius", "mu_rho", "mu_over_r4"],
    },
];

pub const CATALOG: Catalog = Catalog { maps: MAPS, domains: DOMAINS, experiments: EXPERIMENTS };

pub fn render_text() -> String {
    let mut s = String::from("Maps (JSON: {\"kind\": ..., params}):\n");
    for m in MAPS {
        s += &format!("  {:<18} kind={:<20} {}\n", m.name, m.kind, m.params);
        if !m.notes.is_empty() {
            s += &format!("  {:<18} {}\n", "", m.notes);
        }
    }
    s += "\nDomains (JSON: {\"kind\": ..., params, optional boundary_tolerance}):\n";
    for d in DOMAINS {
        s += &format!("  {:<18} kind={:<20} {}\n", d.name, d.kind, d.params);
    }
    s += "\nExperiments (subcommand <config.json>):\n";
    for e in EXPERIMENTS {
        s += &format!("  {}\n    audits: {}\n    value:  {}\n    csv:    {}\n", e.name, e.audits, e.value, e.csv_columns.join(","));
    }
    s
}

pub fn render_json() -> String {
    serde_json::to_string_pretty(&CATALOG).expect("catalog serialises")
}
