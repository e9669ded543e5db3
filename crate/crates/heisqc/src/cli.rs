//! Argument parsing, thread pool and exit codes.
//!
//! Exit status: 0 when every audit check passes, 1 when a check fails or a numeric
//! routine breaks down, 2 for configuration errors (bad arguments, unreadable or
//! invalid config, preconditions violated).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::catalog;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::run::execute;

/// Environment variable that overrides the default output directory.
pub const OUT_DIR_ENV: &str = "HEISQC_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "heisqc", version, about = "Quasiconformal-map laboratory on the Heisenberg group")]
struct Cli {
    /// Master seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (default: $HEISQC_OUT_DIR, else the current directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// JSON run configuration.
    config: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// List maps, domains and experiments.
    Catalog {
        #[arg(long)]
        json: bool,
    },
    /// Run whatever experiment the config names.
    Run(ConfigArg),
    /// Sandwich between the Korányi and sub-Riemannian distances.
    Dist(ConfigArg),
    /// Average derivative a_f at sample points.
    Af(ConfigArg),
    /// BMO norm lower bound, optionally with the nested-ball bound.
    Bmo(ConfigArg),
    /// Reverse-Hölder and A_p ratios of a Jacobian.
    Weights(ConfigArg),
    /// Whitney decomposition with coverage and overlap audits.
    Whitney(ConfigArg),
    /// Upper and lower bounds for the 4-modulus of rings.
    Modulus(ConfigArg),
    /// Koebe-type distortion constant c_hat.
    Koebe(ConfigArg),
    /// Images of balls compared with balls.
    BallImage(ConfigArg),
    /// Quasisymmetry profile on a small ball.
    Qs(ConfigArg),
    /// Hölder-type distance estimate constant.
    DistEstimate(ConfigArg),
    /// Image diameters of curves against the a_f-weighted length.
    CurveDiam(ConfigArg),
    /// Radial-stretch example where the curve bound fails.
    Sharpness(ConfigArg),
    /// Integrals of ‖D_H f‖^q against a_f^q.
    CompareIntegrals(ConfigArg),
    /// Within-ball ratios of a_f over a Whitney decomposition.
    Harnack(ConfigArg),
    /// Ahlfors regularity of a density metric on a lattice graph.
    DensityMetric(ConfigArg),
}

impl Cmd {
    /// `(expected experiment, config path)`; `None` as the name accepts any experiment.
    fn target(&self) -> Option<(Option<&'static str>, &Path)> {
        let (name, arg) = match self {
            Cmd::Catalog { .. } => return None,
            Cmd::Run(a) => (None, a),
            Cmd::Dist(a) => (Some("dist"), a),
            Cmd::Af(a) => (Some("af"), a),
            Cmd::Bmo(a) => (Some("bmo"), a),
            Cmd::Weights(a) => (Some("weights"), a),
            Cmd::Whitney(a) => (Some("whitney"), a),
            Cmd::Modulus(a) => (Some("modulus"), a),
            Cmd::Koebe(a) => (Some("koebe"), a),
            Cmd::BallImage(a) => (Some("ball-image"), a),
            Cmd::Qs(a) => (Some("qs"), a),
            Cmd::DistEstimate(a) => (Some("dist-estimate"), a),
            Cmd::CurveDiam(a) => (Some("curve-diam"), a),
            Cmd::Sharpness(a) => (Some("sharpness"), a),
            Cmd::CompareIntegrals(a) => (Some("compare-integrals"), a),
            Cmd::Harnack(a) => (Some("harnack"), a),
            Cmd::DensityMetric(a) => (Some("density-metric"), a),
        };
        Some((name, arg.config.as_path()))
    }
}

/// Runs the binary's logic; returns the process exit status.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "heisqc: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let Some((expected, path)) = cli.cmd.target() else {
        let Cmd::Catalog { json } = cli.cmd else { unreachable!() };
        let text = if json { catalog::render_json() } else { catalog::render_text() };
        let _ = writeln!(out, "{text}");
        return Ok(0);
    };
    let cfg = RunConfig::load(path)?;
    if let Some(name) = expected {
        if cfg.experiment.name() != name {
            return Err(CliError::Config(format!(
                "config describes a `{}` experiment but the `{name}` subcommand was used",
                cfg.experiment.name()
            )));
        }
    }
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let outcome = pool.install(|| execute(&cfg, seed))?;
    let dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let stem = cfg.output.clone().unwrap_or_else(|| cfg.experiment.name().to_string());
    let (json_path, csv_path) = crate::report::write_outputs(&dir, &stem, &outcome.report, &outcome.table)?;
    let r = &outcome.report;
    let _ = writeln!(
        out,
        "{}: value = {:.6e}{} -> {} [{}, {}]",
        r.op,
        r.value,
        r.std_error.map(|s| format!(" ± {s:.2e}")).unwrap_or_default(),
        if r.pass { "PASS" } else { "FAIL" },
        json_path.display(),
        csv_path.display()
    );
    for c in r.checks.iter().filter(|c| !c.pass) {
        let _ = writeln!(out, "  failed check: {} = {:.6e}, required {}", c.name, c.value, c.bound);
    }
    Ok(if r.pass { 0 } else { 1 })
}
