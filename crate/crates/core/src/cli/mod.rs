//! `ghostdist` command-line interface.

mod output;

use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;

use crate::catalog;
use crate::error::{Error, Result};
use crate::ghost::{
    block_sum_ratios, classify_salem, empirical_measure, max_density_profile, ratio_to_f64,
    singularity_trace, Functional, GhostCdf, DEFAULT_EPSILONS,
};
use crate::linrep::LinearRep;
use crate::refine::{pow_u64, Dilation, Mode, Model, Scalar};
use crate::spectral::{agm_terms, family_of, lyapunov_estimate, spectral_report, JsrConfig};

pub use output::num;

#[derive(Debug, Parser)]
#[command(
    name = "ghostdist",
    version,
    about = "Ghost distributions of k-regular sequences"
)]
struct Cli {
    /// Catalog name or path to a JSON representation.
    #[arg(long, global = true)]
    rep: Option<String>,

    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Arithmetic for curve values.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Exact,
    Float,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Auto => Mode::Auto,
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        }
    }
}

#[derive(Debug, Args, Clone, Copy)]
struct JsrArgs {
    /// Longest product length enumerated for joint spectral radius bounds.
    #[arg(long, default_value_t = 12)]
    jsr_depth: u32,
    /// Maximum number of products formed.
    #[arg(long, default_value_t = 1 << 20)]
    jsr_budget: usize,
}

impl From<JsrArgs> for JsrConfig {
    fn from(a: JsrArgs) -> JsrConfig {
        JsrConfig {
            depth: a.jsr_depth,
            budget: a.jsr_budget,
        }
    }
}

#[derive(Debug, Args, Clone, Copy)]
struct FunctionalArgs {
    /// Coordinate of F used by the CDF formula (0-based).
    #[arg(long, default_value_t = 0, conflicts_with = "weighted")]
    component: usize,
    /// Use the representation's row vector w instead of a coordinate.
    #[arg(long)]
    weighted: bool,
}

impl FunctionalArgs {
    fn functional(self) -> Functional {
        if self.weighted {
            Functional::Weight
        } else {
            Functional::Component(self.component)
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print f(m).
    Eval { m: u64 },
    /// Print the kernel vector w·B_(m).
    Kernel { m: u64 },
    /// JSON report of spectral quantities.
    SpectralReport {
        #[command(flatten)]
        jsr: JsrArgs,
        /// Monte Carlo trials for the Lyapunov exponent (0 disables).
        #[arg(long, default_value_t = 0)]
        lyapunov_trials: usize,
        #[arg(long, default_value_t = 1000)]
        lyapunov_length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Polyline approximation of the IFS attractor.
    Attractor {
        /// Number of IFS iterations applied to the seed segment.
        #[arg(long)]
        depth: u32,
        #[arg(long, conflicts_with = "csv")]
        svg: bool,
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        jsr: JsrArgs,
    },
    /// Ghost CDF on the k-adic grid of the given depth.
    Cdf {
        #[arg(long)]
        depth: u32,
        #[command(flatten)]
        functional: FunctionalArgs,
        #[arg(long)]
        svg: bool,
        #[command(flatten)]
        jsr: JsrArgs,
    },
    /// Atoms of the normalized block measure at a level.
    Empirical {
        #[arg(long)]
        level: u32,
    },
    /// Difference quotients of F_1 at random points.
    Singularity {
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Classify the ghost measure of a Salem sequence.
    Classify {
        /// Comma-separated digits; defaults to the digits of a one-dimensional --rep.
        #[arg(long, value_delimiter = ',')]
        digits: Option<Vec<u64>>,
    },
    /// Fraction of a block where f exceeds ε times the growth bound.
    Density {
        /// Threshold; the default runs 0.05, 0.1 and 0.2.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_delimiter = ',', default_value = "4,8,12")]
        levels: Vec<u32>,
        #[command(flatten)]
        jsr: JsrArgs,
    },
    /// Two ghost CDFs on a common k-adic grid.
    Compare {
        rep_a: String,
        rep_b: String,
        #[arg(long)]
        depth: u32,
        #[command(flatten)]
        functional: FunctionalArgs,
        #[command(flatten)]
        jsr: JsrArgs,
    },
    /// Shipped representations.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
enum CatalogAction {
    /// Every fixed catalog entry in the JSON representation format.
    List,
    /// One entry in the JSON representation format.
    Dump { name: String },
}

/// Run the CLI; returns the process exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut buffer = Vec::new();
    let result = match cli.threads {
        Some(0) => Err(Error::InvalidArgument("--threads must be positive".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut buffer)),
            Err(e) => Err(Error::InvalidArgument(e.to_string())),
        },
        None => dispatch(&cli, &mut buffer),
    };
    let result = result.and_then(|()| out.write_all(&buffer).map_err(Error::from));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_hypothesis_failure() {
                2
            } else {
                1
            }
        }
    }
}

/// Catalog name, or a path to a JSON representation file.
pub fn load_rep(source: &str) -> Result<LinearRep> {
    let path = Path::new(source);
    if path.is_file() {
        return LinearRep::from_json(&std::fs::read_to_string(path)?);
    }
    catalog::by_name(source)
}

fn require_rep(cli: &Cli) -> Result<LinearRep> {
    let source = cli
        .rep
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("this command needs --rep".into()))?;
    load_rep(source)
}

fn positive(name: &str, value: u64) -> Result<()> {
    if value == 0 {
        return Err(Error::InvalidArgument(format!("--{name} must be positive")));
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let mode = Mode::from(cli.mode);
    match &cli.command {
        Command::Eval { m } => {
            writeln!(out, "{}", require_rep(cli)?.eval_f(*m))?;
        }
        Command::Kernel { m } => {
            let row = require_rep(cli)?.eval_kernel_vector(*m);
            let text: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(out, "{}", text.join(","))?;
        }
        Command::SpectralReport {
            jsr,
            lyapunov_trials,
            lyapunov_length,
            seed,
        } => {
            let rep = require_rep(cli)?;
            write_json(
                out,
                &full_report(
                    &rep,
                    (*jsr).into(),
                    *lyapunov_trials,
                    *lyapunov_length,
                    *seed,
                )?,
            )?;
        }
        Command::Attractor {
            depth,
            svg,
            csv: _,
            jsr,
        } => {
            let rep = require_rep(cli)?;
            let polyline = match Model::build(&rep, mode, (*jsr).into())? {
                Model::Exact(d) => attractor(&d, *depth)?,
                Model::Float(d) => attractor(&d, *depth)?,
            };
            if *svg {
                let curve = polyline.iter().map(|p| (p[0], p[1])).collect();
                out.write_all(output::svg(&[curve]).as_bytes())?;
            } else {
                let header: Vec<String> = (1..=rep.dim()).map(|i| format!("y{i}")).collect();
                writeln!(out, "x,{}", header.join(","))?;
                for p in &polyline {
                    let row: Vec<String> = p.iter().map(|&x| num(x)).collect();
                    writeln!(out, "{}", row.join(","))?;
                }
            }
        }
        Command::Cdf {
            depth,
            functional,
            svg,
            jsr,
        } => {
            let rep = require_rep(cli)?;
            let grid = cdf_grid(&rep, mode, functional.functional(), *depth, (*jsr).into())?;
            let k = rep.k();
            let top = pow_u64(k, *depth)? as f64;
            if *svg {
                let curve = grid
                    .values
                    .iter()
                    .enumerate()
                    .map(|(j, &y)| (j as f64 / top, y))
                    .collect();
                out.write_all(output::svg(&[curve]).as_bytes())?;
            } else {
                match &grid.exact {
                    Some(_) => writeln!(out, "x,cdf,cdf_exact")?,
                    None => writeln!(out, "x,cdf")?,
                }
                for (j, y) in grid.values.iter().enumerate() {
                    write!(out, "{},{}", num(j as f64 / top), num(*y))?;
                    if let Some(exact) = &grid.exact {
                        write!(out, ",{}", exact[j])?;
                    }
                    writeln!(out)?;
                }
            }
        }
        Command::Empirical { level } => {
            let rep = require_rep(cli)?;
            let measure = empirical_measure(&rep, *level)?;
            writeln!(out, "position,weight,position_exact,weight_exact")?;
            for (position, weight) in measure.atoms() {
                let p = *position.numer() as f64 / *position.denom() as f64;
                writeln!(
                    out,
                    "{},{},{},{}",
                    num(p),
                    num(ratio_to_f64(&weight)),
                    position,
                    weight
                )?;
            }
        }
        Command::Singularity {
            trials,
            depth,
            seed,
        } => {
            positive("trials", *trials as u64)?;
            let rep = require_rep(cli)?;
            let traces = singularity_trace(&rep, *trials, *depth, *seed)?;
            writeln!(out, "# seed={seed}")?;
            if let Some(t) = traces.first() {
                writeln!(out, "# decay_constant={}", num(t.decay_constant))?;
            }
            writeln!(out, "trial,n,quotient")?;
            for t in &traces {
                for (i, q) in t.quotients.iter().enumerate() {
                    writeln!(out, "{},{},{}", t.trial, i + 1, num(*q))?;
                }
            }
        }
        Command::Classify { digits } => {
            let digits = match (digits, &cli.rep) {
                (Some(_), Some(_)) => {
                    return Err(Error::InvalidArgument(
                        "give either --digits or --rep, not both".into(),
                    ))
                }
                (Some(d), None) => d.clone(),
                (None, Some(_)) => salem_digits(&require_rep(cli)?)?,
                (None, None) => {
                    return Err(Error::InvalidArgument(
                        "classify needs --digits or --rep".into(),
                    ))
                }
            };
            writeln!(out, "{}", classify_salem(&digits)?)?;
        }
        Command::Density { eps, levels, jsr } => {
            let rep = require_rep(cli)?;
            let epsilons = match eps {
                Some(e) => vec![*e],
                None => DEFAULT_EPSILONS.to_vec(),
            };
            writeln!(out, "epsilon,m,fraction")?;
            for e in epsilons {
                for (m, fraction) in max_density_profile(&rep, levels, e, (*jsr).into())? {
                    writeln!(out, "{},{m},{}", num(e), num(fraction))?;
                }
            }
        }
        Command::Compare {
            rep_a,
            rep_b,
            depth,
            functional,
            jsr,
        } => {
            let (a, b) = (load_rep(rep_a)?, load_rep(rep_b)?);
            if a.k() != b.k() {
                return Err(Error::InvalidArgument(format!(
                    "radix mismatch: {} vs {}",
                    a.k(),
                    b.k()
                )));
            }
            let ga = cdf_grid(&a, mode, functional.functional(), *depth, (*jsr).into())?;
            let gb = cdf_grid(&b, mode, functional.functional(), *depth, (*jsr).into())?;
            let top = pow_u64(a.k(), *depth)? as f64;
            writeln!(out, "x,cdf_a,cdf_b,diff")?;
            for (j, (ya, yb)) in ga.values.iter().zip(&gb.values).enumerate() {
                writeln!(
                    out,
                    "{},{},{},{}",
                    num(j as f64 / top),
                    num(*ya),
                    num(*yb),
                    num(ya - yb)
                )?;
            }
        }
        Command::Catalog { action } => match action {
            CatalogAction::List => {
                let entries: Vec<serde_json::Value> = catalog::NAMES
                    .iter()
                    .map(|name| {
                        let rep = catalog::by_name(name)?;
                        Ok(serde_json::json!({ "name": name, "representation": rep.to_file() }))
                    })
                    .collect::<Result<_>>()?;
                write_json(out, &entries)?;
            }
            CatalogAction::Dump { name } => {
                writeln!(out, "{}", catalog::by_name(name)?.to_json())?;
            }
        },
    }
    Ok(())
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn salem_digits(rep: &LinearRep) -> Result<Vec<u64>> {
    if rep.dim() != 1 {
        return Err(Error::InvalidArgument(
            "classification needs a one-dimensional representation".into(),
        ));
    }
    Ok(rep.digit_matrices().iter().map(|b| b.get(0, 0)).collect())
}

#[derive(Debug, Serialize)]
struct FullReport {
    #[serde(flatten)]
    spectral: crate::spectral::SpectralReport,
    rho_over_k: f64,
    geometric_mean: f64,
    primitive: bool,
    /// `Σ(n+1) / Σ(n)` for the first levels.
    block_sum_ratios: Vec<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lyapunov: Option<crate::spectral::LyapunovEstimate>,
}

fn full_report(
    rep: &LinearRep,
    cfg: JsrConfig,
    trials: usize,
    length: usize,
    seed: u64,
) -> Result<FullReport> {
    let spectral = spectral_report(rep, cfg)?;
    let agm = agm_terms(rep)?;
    let lyapunov = if trials > 0 {
        Some(lyapunov_estimate(&family_of(rep), trials, length, seed)?)
    } else {
        None
    };
    Ok(FullReport {
        spectral,
        rho_over_k: agm.rho_over_k,
        geometric_mean: agm.geometric_mean,
        primitive: rep.is_primitive().primitive,
        block_sum_ratios: block_sum_ratios(rep, 8),
        lyapunov,
    })
}

fn attractor<T: Scalar>(dilation: &Dilation<T>, iterations: u32) -> Result<Vec<Vec<f64>>> {
    let ifs = dilation.build_ifs();
    let polyline = ifs.iterate(&ifs.default_seed(), iterations)?;
    Ok(polyline
        .iter()
        .map(|p| p.iter().map(Scalar::as_f64).collect())
        .collect())
}

struct CdfGrid {
    values: Vec<f64>,
    exact: Option<Vec<String>>,
}

fn cdf_grid(
    rep: &LinearRep,
    mode: Mode,
    functional: Functional,
    depth: u32,
    cfg: JsrConfig,
) -> Result<CdfGrid> {
    fn collect<T: Scalar>(
        d: Dilation<T>,
        functional: Functional,
        depth: u32,
    ) -> Result<(Vec<f64>, Vec<T>)> {
        let values = GhostCdf::new(d, functional)?.grid(depth)?;
        Ok((values.iter().map(Scalar::as_f64).collect(), values))
    }
    Ok(match Model::build(rep, mode, cfg)? {
        Model::Exact(d) => {
            let (values, exact) = collect::<BigRational>(d, functional, depth)?;
            CdfGrid {
                values,
                exact: Some(exact.iter().filter_map(Scalar::exact_text).collect()),
            }
        }
        Model::Float(d) => CdfGrid {
            values: collect(d, functional, depth)?.0,
            exact: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["ghostdist"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn eval_prints_value() {
        assert_eq!(
            run_str(&["eval", "--rep", "zaremba2", "3"]),
            (0, "5\n".into(), String::new())
        );
    }

    #[test]
    fn cdf_rows() {
        let (code, out, _) = run_str(&["cdf", "--rep", "salem-2-3", "--depth", "1"]);
        assert_eq!(code, 0);
        let rows: Vec<&str> = out.lines().collect();
        assert_eq!(rows[0], "x,cdf,cdf_exact");
        assert_eq!(rows[1], "0,0,0");
        assert_eq!(rows[2], "0.50000000000000000,0.40000000000000002,2/5");
        assert_eq!(rows[3], "1.0000000000000000,1.0000000000000000,1");
    }

    #[test]
    fn classify_digits() {
        assert_eq!(
            run_str(&["classify", "--digits", "1,0,1"]).1,
            "singular continuous\n"
        );
        assert_eq!(
            run_str(&["classify", "--rep", "salem-4-4-4"]).1,
            "Lebesgue\n"
        );
        assert_eq!(run_str(&["classify", "--rep", "stern"]).0, 1);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_str(&["density", "--rep", "salem-1-1"]).0, 2);
        assert_eq!(run_str(&["eval", "--rep", "nonsense", "3"]).0, 1);
        assert_eq!(run_str(&["frobnicate"]).0, 1);
        assert_eq!(run_str(&["eval", "3"]).0, 1);
        assert_eq!(run_str(&["--help"]).0, 0);
    }
}
