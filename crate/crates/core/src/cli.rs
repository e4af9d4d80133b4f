//! Command-line front end.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::catalog::{expected_radii, FamilySpec, ShiftWeights};
use crate::duality::{pairing_matrix, shrunk_core, verify, DualPairSetup, Tolerances, VerifyOptions};
use crate::error::{Error, Result};
use crate::formats::{normalized_json, write_coefficients, write_kernel_grid, write_pairing, write_triplets, write_weight_table, GraphSpec};
use crate::graph::{SelfMapSystem, TruncationWindow};
use crate::linalg::{unit, C};
use crate::model::{reproducing_kernel, RadiiReport};
use crate::operators::{cauchy_dual_direct, cauchy_dual_weights, composition_operator};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RESIDUAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;

const DEFAULT_DEPTH: i64 = 40;

#[derive(Debug, Parser)]
#[command(name = "cauchy-dual", version, about = "Analytic models and Cauchy duals of weighted composition operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Echo the normalized system with its orbits and levels as JSON.
    Build,
    /// Cauchy dual weight table as CSV; `--triplets` writes the dual matrix instead.
    Dual {
        #[arg(long)]
        triplets: bool,
    },
    /// Laurent coefficients of the model of `e_x` for each source vertex, as CSV.
    Model {
        /// Source vertex label; repeatable. Defaults to the shrunk core.
        #[arg(long = "source")]
        sources: Vec<String>,
        /// Write the dual model instead.
        #[arg(long)]
        dual: bool,
    },
    /// Closed-form and root-test radii as JSON.
    Radii,
    /// Reproducing kernel over a polar mesh as CSV.
    Kernel {
        /// Mesh radii, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5])]
        radii: Vec<f64>,
        /// Number of angles per radius.
        #[arg(long, default_value_t = 16)]
        angles: usize,
        /// Second kernel argument as `re,im`; the mesh point itself when absent.
        #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
        lambda: Option<Vec<f64>>,
    },
    /// Cauchy pairing of models against dual models over basis pairs, as CSV.
    Pair,
    /// Run every duality check and write the report as JSON.
    Verify,
}

#[derive(Debug, Args)]
pub struct RunConfig {
    /// Graph spec JSON file.
    #[arg(long, global = true, conflicts_with = "family")]
    pub input: Option<PathBuf>,
    /// Catalog family: unilateral_shift, hardy, bergman, dirichlet, bilateral_shift, cycle_tail, directed_tree.
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// Family parameters `k=v,...`; lists use `:` as separator.
    #[arg(long, global = true, default_value = "")]
    pub params: String,
    /// Materialize vertices with |level| up to this radius [default: 2 * depth + 10].
    #[arg(long, global = true)]
    pub vertex_radius: Option<usize>,
    /// Lowest Laurent degree kept [default: -40].
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub deg_min: Option<i64>,
    /// Highest Laurent degree kept [default: 40].
    #[arg(long, global = true)]
    pub deg_max: Option<i64>,
    /// Tolerance for frame orthonormality, wandering orthogonality and span residuals.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_structural: f64,
    /// Tolerance for the duality, symmetry and intertwining residuals.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_duality: f64,
    /// Circle quadrature nodes [default: 4 * degree span + 4].
    #[arg(long, global = true)]
    pub quad_points: Option<usize>,
    /// Radii of the reconstruction sweep, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub r_sweep: Option<Vec<f64>>,
    /// Multiply every weight by this positive factor.
    #[arg(long, global = true)]
    pub scale: Option<f64>,
    /// Output path prefix; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn parse_list(v: &str) -> Result<Vec<f64>> {
    v.split(':')
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Input(format!("bad number {s}: {e}"))))
        .collect()
}

fn parse_params(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("parameter {item} is not of the form k=v")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn take_f64(p: &BTreeMap<String, String>, key: &str, default: Option<f64>) -> Result<f64> {
    match p.get(key) {
        Some(v) => v.parse().map_err(|e| Error::Input(format!("{key}: {e}"))),
        None => default.ok_or_else(|| Error::Input(format!("missing parameter {key}"))),
    }
}

fn take_usize(p: &BTreeMap<String, String>, key: &str, default: Option<usize>) -> Result<usize> {
    match p.get(key) {
        Some(v) => v.parse().map_err(|e| Error::Input(format!("{key}: {e}"))),
        None => default.ok_or_else(|| Error::Input(format!("missing parameter {key}"))),
    }
}

/// `lambdas=a:b:c`, or `lambda1=a,lambda2=b,...`.
fn indexed_list(p: &BTreeMap<String, String>, list: &str, prefix: &str, count: usize) -> Result<Vec<f64>> {
    if let Some(v) = p.get(list) {
        return parse_list(v);
    }
    (1..=count).map(|i| take_f64(p, &format!("{prefix}{i}"), None)).collect()
}

fn shift_weights(name: &str) -> Result<ShiftWeights> {
    match name {
        "hardy" => Ok(ShiftWeights::Hardy),
        "bergman" => Ok(ShiftWeights::Bergman),
        "dirichlet" => Ok(ShiftWeights::Dirichlet),
        other => Err(Error::Input(format!("unknown shift weights {other}"))),
    }
}

pub fn parse_family(kind: &str, params: &str) -> Result<FamilySpec> {
    let p = parse_params(params)?;
    let spec = match kind {
        "hardy" | "bergman" | "dirichlet" => FamilySpec::UnilateralShift { weights: shift_weights(kind)? },
        "unilateral_shift" => FamilySpec::UnilateralShift {
            weights: shift_weights(p.get("weights").map_or("hardy", String::as_str))?,
        },
        "bilateral_shift" => FamilySpec::BilateralShift { weight: take_f64(&p, "weight", Some(1.0))? },
        "cycle_tail" => {
            let m = take_usize(&p, "m", None)?;
            FamilySpec::CycleTail { m, lambda: take_f64(&p, "lambda", None)?, lambdas: indexed_list(&p, "lambdas", "lambda", m)? }
        }
        "directed_tree" => {
            let branches = take_usize(&p, "branches", Some(2))?;
            let branch_weights = match p.get("branch_weights") {
                Some(v) => parse_list(v)?,
                None => vec![1.0; branches],
            };
            let second_depth = p.get("second_depth").map(|v| v.parse()).transpose().map_err(|e| Error::Input(format!("second_depth: {e}")))?;
            FamilySpec::DirectedTree { branches, spine: take_f64(&p, "spine", Some(1.0))?, branch_weights, second_depth }
        }
        other => return Err(Error::Input(format!("unknown family {other}"))),
    };
    spec.validate()?;
    Ok(spec)
}

/// Everything a command needs: the scaled system, its window and closed-form radii.
pub struct Prepared {
    pub system: SelfMapSystem,
    pub window: TruncationWindow,
    pub closed_form: Option<RadiiReport>,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let depth_hint = cfg.deg_max.unwrap_or(DEFAULT_DEPTH).max(cfg.deg_min.map_or(0, |d| -d)).max(1);
    let radius = cfg.vertex_radius.unwrap_or(2 * depth_hint as usize + 10);
    let spec = match (&cfg.input, &cfg.family) {
        (Some(path), _) => GraphSpec::load(path)?,
        (None, Some(kind)) => GraphSpec { family: Some(parse_family(kind, &cfg.params)?), ..Default::default() },
        (None, None) => return Err(Error::Input("either --input or --family is required".into())),
    };
    let mut system = spec.build(radius)?;
    let scale = cfg.scale.unwrap_or(1.0);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Input("--scale must be a positive number".into()));
    }
    if scale != 1.0 {
        system = system.scaled(scale);
    }
    let closed_form = system.family().and_then(|f| expected_radii(f).ok()).map(|r| r.scaled(scale));
    let window = TruncationWindow::new(
        radius,
        cfg.deg_min.unwrap_or(-DEFAULT_DEPTH),
        cfg.deg_max.unwrap_or(DEFAULT_DEPTH),
    )?;
    if [cfg.tol_structural, cfg.tol_duality].iter().any(|t| t.is_nan() || *t < 0.0) {
        return Err(Error::Input("tolerances must be nonnegative".into()));
    }
    Ok(Prepared { system, window, closed_form })
}

fn sink(cfg: &RunConfig, suffix: &str) -> Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(prefix) => {
            let mut name = prefix.as_os_str().to_owned();
            name.push(suffix);
            Box::new(File::create(PathBuf::from(name))?)
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(cfg: &RunConfig, suffix: &str, value: &impl serde::Serialize) -> Result<()> {
    let mut out = sink(cfg, suffix)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn resolve(system: &SelfMapSystem, labels: &[String]) -> Result<Vec<usize>> {
    labels
        .iter()
        .map(|l| system.index_of(l).ok_or_else(|| Error::Input(format!("unknown vertex {l}"))))
        .collect()
}

fn execute(cmd: &Command, cfg: &RunConfig) -> Result<i32> {
    let prep = prepare(cfg)?;
    match cmd {
        Command::Build => {
            write_json(cfg, ".system.json", &normalized_json(&prep.system)?)?;
        }
        Command::Dual { triplets } => {
            let t = composition_operator(&prep.system);
            if *triplets {
                write_triplets(&cauchy_dual_direct(&t)?, sink(cfg, ".dual.csv")?)?;
            } else {
                let dual = cauchy_dual_weights(&prep.system)?;
                write_weight_table(&prep.system, &dual, &t.valid_core(), sink(cfg, ".dual.csv")?)?;
            }
        }
        Command::Model { sources, dual } => {
            let setup = DualPairSetup::new(prep.system, prep.window, prep.closed_form)?;
            let vertices = if sources.is_empty() { shrunk_core(&setup, 0) } else { resolve(&setup.system, sources)? };
            let models: Vec<(String, _)> = vertices
                .iter()
                .map(|&v| {
                    let e = unit(setup.dim(), v);
                    let m = if *dual { setup.dual_model(&e) } else { setup.model(&e) };
                    (setup.system.label(v).to_string(), m)
                })
                .collect();
            write_coefficients(&models, sink(cfg, ".model.csv")?)?;
        }
        Command::Radii => {
            let setup = DualPairSetup::new(prep.system, prep.window, prep.closed_form)?;
            let report = json!({
                "closedForm": setup.closed_form,
                "rootTest": setup.radii,
                "rootTestDepth": setup.depth(),
                "hypothesisFlags": setup.flags,
            });
            write_json(cfg, ".radii.json", &report)?;
        }
        Command::Kernel { radii, angles, lambda } => {
            let setup = DualPairSetup::new(prep.system, prep.window, prep.closed_form)?;
            let fixed = lambda.as_ref().map(|v| C::new(v[0], v[1]));
            let mut grid = Vec::new();
            let mut warned = false;
            for &r in radii {
                for k in 0..(*angles).max(1) {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / (*angles).max(1) as f64;
                    let z = C::from_polar(r, t);
                    let km = reproducing_kernel(&setup.pair, &setup.frame, &setup.window, z, fixed.unwrap_or(z), Some(&setup.radii));
                    if km.outside_annulus && !warned {
                        eprintln!("warning: kernel evaluated outside the estimated annulus; the truncated series may diverge");
                        warned = true;
                    }
                    grid.push((r, t, km));
                }
            }
            write_kernel_grid(&grid, sink(cfg, ".kernel.csv")?)?;
        }
        Command::Pair => {
            let setup = DualPairSetup::new(prep.system, prep.window, prep.closed_form)?;
            let core = shrunk_core(&setup, 0);
            let labels: Vec<String> = core.iter().map(|&v| setup.system.label(v).to_string()).collect();
            write_pairing(&labels, &pairing_matrix(&setup, &core), sink(cfg, ".pair.csv")?)?;
        }
        Command::Verify => {
            let setup = DualPairSetup::new(prep.system, prep.window, prep.closed_form)?;
            let opts = VerifyOptions { quad_points: cfg.quad_points, sweep: cfg.r_sweep.clone(), ..Default::default() };
            let report = verify(&setup, &opts)?;
            write_json(cfg, ".verify.json", &report)?;
            let tol = Tolerances { structural: cfg.tol_structural, duality: cfg.tol_duality };
            let code = report.exit_code(&tol);
            if code == EXIT_RESIDUAL {
                eprintln!("residuals above tolerance (structural {:e}, duality {:e})", tol.structural, tol.duality);
            }
            if !report.hypothesis_flags.hold() {
                let f = &report.hypothesis_flags;
                eprintln!(
                    "hypothesis flags: r- < 1: {}, r'- <= 1 <= r'+: {}",
                    f.inner_below_one, f.dual_contains_one
                );
                for d in &f.discrepancies {
                    eprintln!("  {d}");
                }
            }
            return Ok(code);
        }
    }
    Ok(EXIT_OK)
}

/// Run a parsed command line and return the process exit status.
pub fn run(cli: &Cli) -> i32 {
    match execute(&cli.command, &cli.config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_tail_params_both_forms() {
        let a = parse_family("cycle_tail", "m=2,lambda=0.5,lambdas=0.25:0.3").unwrap();
        let b = parse_family("cycle_tail", "m=2,lambda=0.5,lambda1=0.25,lambda2=0.3").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_params_rejected() {
        assert!(parse_family("cycle_tail", "m=1,lambda=1.5,lambdas=0.25").is_err());
        assert!(parse_family("cycle_tail", "m=1").is_err());
        assert!(parse_family("nope", "").is_err());
        assert!(parse_params("m").is_err());
    }

    #[test]
    fn shift_aliases() {
        assert_eq!(parse_family("bergman", "").unwrap(), FamilySpec::bergman());
        assert_eq!(parse_family("unilateral_shift", "weights=dirichlet").unwrap(), FamilySpec::dirichlet());
    }

    #[test]
    fn cli_parses_global_flags_after_command() {
        let cli = Cli::try_parse_from([
            "cauchy-dual", "verify", "--family", "cycle_tail", "--params", "m=1,lambda=0.5,lambdas=0.25", "--deg-min", "-10",
            "--deg-max", "10",
        ])
        .unwrap();
        assert_eq!(cli.config.deg_min, Some(-10));
        assert!(matches!(cli.command, Command::Verify));
    }
}
