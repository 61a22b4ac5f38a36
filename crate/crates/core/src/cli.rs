//! Command-line front end: `analyze`, `renorm` and `fundfn`.
//!
//! Exit codes: 0 when every check passes, 1 for usage and input errors,
//! 2 when a check fails or a construction does not apply.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::fundfn::{
    bidemocracy_constant, concave_envelope, delta_at, dual_fundamental_function, make_alternating_fundfn,
    regularize_dilation, Formula, FundamentalFunction, IndicatorNorms,
};
use crate::greedy::SearchBudget;
use crate::renorm::{
    provenance, renorm_bidemocratic, renorm_bidemocratic_greedy, renorm_democratic, renorm_greedy, RenormParams,
};
use crate::spaces::{NormDescriptor, SpaceDocument, SpaceSpec};
use crate::verify::{checks_to_csv, theorem_suite, SuiteOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "greedylab", version, about = "Greedy-approximation constants and renormings")]
pub struct Cli {
    /// Worker threads (overrides GREEDYLAB_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Constants report and conformance checks for a space and its renormings.
    Analyze(AnalyzeArgs),
    /// Writes a renormed space with a provenance block.
    Renorm(RenormArgs),
    /// Fundamental-function tables.
    #[command(subcommand)]
    Fundfn(FundfnCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::config::DEFAULT_TOL)]
    pub tolerance: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long = "cap-enum", default_value_t = 20)]
    pub cap_enum: usize,
    #[arg(long = "cap-dp", default_value_t = 12)]
    pub cap_dp: usize,
    #[arg(long = "cap-sign-hull", default_value_t = 16)]
    pub cap_sign_hull: usize,
}

impl Common {
    fn caps(&self) -> Result<Caps> {
        if self.cap_enum == 0 || self.cap_dp == 0 || self.cap_sign_hull == 0 {
            return Err(Error::OutOfRange("caps must be positive".into()));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::OutOfRange("tolerance must be nonnegative".into()));
        }
        Ok(Caps {
            enumeration: self.cap_enum,
            dp: self.cap_dp,
            sign_hull: self.cap_sign_hull,
            tolerance: self.tolerance,
            ..Caps::default()
        })
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// Sampled (x, m) pairs per space.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Random starts for the Property (A) search.
    #[arg(long, default_value_t = 1000)]
    pub refinements: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    /// Adds max_k phi(k)/k S_k(|x|): 1-bidemocratic.
    Bidemocratic,
    /// eps||x|| + max_k S_k(|x|)/phi*(k), rescaled and made 1-bidemocratic.
    BidemocraticGreedy,
    /// Adds the flat family atoms: (1+eps)-democratic.
    Democratic,
    /// s||x|| + F_m + L S_n0: Property (A) with constant 1+4eps.
    Greedy,
}

#[derive(Debug, Args)]
pub struct RenormArgs {
    #[arg(value_enum)]
    pub construction: Construction,
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FunctionArgs {
    /// `sqrt`, `linear`, `xlog` or `power:<exponent>`.
    #[arg(long, conflicts_with = "function")]
    pub formula: Option<String>,
    /// JSON fundamental-function file.
    #[arg(long)]
    pub function: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub cap: usize,
}

#[derive(Debug, Subcommand)]
pub enum FundfnCommand {
    /// Truncated dilation constants delta_phi(m).
    Delta {
        #[command(flatten)]
        f: FunctionArgs,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        m: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Least concave majorant of grid samples.
    Envelope {
        /// JSON array of samples phi(1), phi(2), ...
        #[arg(long, conflicts_with = "values")]
        samples: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Function linear on odd intervals and flat on even ones.
    Alternating {
        #[arg(long, value_delimiter = ',', required = true)]
        breakpoints: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equivalent function with delta_psi(m) > 1/(1+eps).
    Regularize {
        #[command(flatten)]
        f: FunctionArgs,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses the arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let threads = cli.threads.or_else(|| {
        std::env::var("GREEDYLAB_THREADS")
            .ok()
            .and_then(|v| v.trim().parse().ok())
    });
    if let Some(t) = threads {
        crate::par::init_threads(t);
    }
    let outcome = match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Renorm(r) => renorm(r),
        Command::Fundfn(f) => fundfn(f),
    };
    match outcome {
        Ok(code) => code,
        Err((code, e)) => {
            eprintln!("error: {e}");
            code
        }
    }
}

type Outcome = std::result::Result<i32, (i32, Error)>;

fn usage(e: Error) -> (i32, Error) {
    (EXIT_ERROR, e)
}

/// Construction errors that mean the pipeline does not apply.
fn construction(e: Error) -> (i32, Error) {
    match e {
        Error::Precondition(_) | Error::Infeasible(_) => (EXIT_FAIL, e),
        other => (EXIT_ERROR, other),
    }
}

fn load_space(path: &Path, dim: Option<usize>, caps: &Caps) -> Result<(SpaceSpec, NormDescriptor)> {
    let text = std::fs::read_to_string(path)?;
    let doc = SpaceDocument::parse(&text)?;
    let spec = match dim {
        Some(n) => doc.space.with_dim(n),
        None => doc.space,
    };
    let space = spec.build(caps)?;
    Ok((spec, space))
}

/// Writes `content` to `path` through a temporary file in the same directory,
/// or to standard output.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()?;
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(content.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(p).map_err(|e| Error::Io(e.error))?;
        }
    }
    Ok(())
}

fn analyze(a: &AnalyzeArgs) -> Outcome {
    let caps = a.common.caps().map_err(usage)?;
    if a.eps.is_nan() || a.eps <= 0.0 {
        return Err(usage(Error::OutOfRange("--eps must be positive".into())));
    }
    let (_, space) = load_space(&a.space, a.dim, &caps).map_err(usage)?;
    let opts = SuiteOptions {
        samples: a.samples,
        budget: SearchBudget {
            refinements: a.refinements,
            seed: a.common.seed,
            ..SearchBudget::default()
        },
    };
    let report = theorem_suite(&space, a.eps, &opts, &caps).map_err(usage)?;
    let text = match a.common.format {
        Format::Json => serde_json::to_string_pretty(&report).map_err(|e| usage(e.into()))? + "\n",
        Format::Csv => checks_to_csv(&report.checks).map_err(usage)?,
    };
    write_output(a.common.out.as_deref(), &text).map_err(usage)?;
    for c in report.checks.iter().filter(|c| !c.passed()) {
        eprintln!("FAIL {} (value {}, bound {})", c.id, c.value, c.bound);
    }
    Ok(if report.all_pass { EXIT_OK } else { EXIT_FAIL })
}

fn constants_line(label: &str, space: &NormDescriptor, caps: &Caps) -> Result<String> {
    let table = IndicatorNorms::compute(space, caps)?;
    let phi = table.phi();
    let dual = dual_fundamental_function(space, caps)?;
    let bidem = bidemocracy_constant(&phi, &dual.values);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ");
    Ok(format!(
        "{label:<7} democracy {:.6}  bidemocracy {:.6}\n{label:<7} phi  {}\n{label:<7} phi* {}\n",
        table.democracy(),
        bidem,
        fmt(&phi),
        fmt(&dual.values)
    ))
}

fn renorm(r: &RenormArgs) -> Outcome {
    let caps = r.common.caps().map_err(usage)?;
    let (_, space) = load_space(&r.space, r.dim, &caps).map_err(usage)?;
    let eps = match (r.construction, r.eps) {
        (Construction::Bidemocratic, e) => e.unwrap_or(0.0),
        (_, Some(e)) if e > 0.0 => e,
        _ => return Err(usage(Error::OutOfRange("--eps must be given and positive".into()))),
    };
    let democracy = IndicatorNorms::compute(&space, &caps)
        .map_err(construction)?
        .democracy();
    let (name, out, params) = match r.construction {
        Construction::Bidemocratic => {
            let out = renorm_bidemocratic(&space, &caps).map_err(construction)?;
            ("bidemocratic", out, RenormParams::new(eps, democracy))
        }
        Construction::BidemocraticGreedy => {
            let out = renorm_bidemocratic_greedy(&space, eps, &caps).map_err(construction)?;
            ("bidemocratic-greedy", out.composed, out.params)
        }
        Construction::Democratic => {
            let (out, params, _) = renorm_democratic(&space, eps, &caps).map_err(construction)?;
            ("democratic", out, params)
        }
        Construction::Greedy => {
            let out = renorm_greedy(&space, eps, &caps).map_err(construction)?;
            ("greedy", out.space, out.params)
        }
    };
    let doc = SpaceDocument {
        space: SpaceSpec::from_descriptor(&out),
        provenance: Some(provenance(name, &space, &params)),
    };
    let text = doc.to_json().map_err(usage)? + "\n";
    write_output(r.common.out.as_deref(), &text).map_err(usage)?;
    let table = constants_line("before", &space, &caps)
        .and_then(|b| Ok(b + &constants_line("after", &out, &caps)?))
        .map_err(usage)?;
    eprint!("{table}");
    Ok(EXIT_OK)
}

fn parse_formula(s: &str) -> Result<Formula> {
    let bad = || Error::Parse(format!("unknown formula {s:?}"));
    Ok(match s.trim() {
        "sqrt" => Formula::Power { exponent: 0.5 },
        "linear" => Formula::Power { exponent: 1.0 },
        "xlog" => Formula::Xlog,
        other => {
            let e = other.strip_prefix("power:").ok_or_else(bad)?;
            Formula::Power {
                exponent: e.parse().map_err(|_| bad())?,
            }
        }
    })
}

fn load_function(f: &FunctionArgs) -> Result<FundamentalFunction> {
    let phi = match (&f.formula, &f.function) {
        (Some(s), None) => FundamentalFunction::closed(parse_formula(s)?, f.cap)?,
        (None, Some(p)) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        _ => return Err(Error::OutOfRange("give exactly one of --formula or --function".into())),
    };
    phi.check()?;
    Ok(phi)
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn fundfn(cmd: &FundfnCommand) -> Outcome {
    let (text, out) = fundfn_table(cmd).map_err(usage)?;
    write_output(out, &text).map_err(usage)?;
    Ok(EXIT_OK)
}

fn fundfn_table(cmd: &FundfnCommand) -> Result<(String, Option<&Path>)> {
    Ok(match cmd {
        FundfnCommand::Delta { f, m, out } => {
            let phi = load_function(f)?;
            let mut rows = Vec::new();
            for &mm in m {
                let (d, (lo, hi)) = delta_at(&phi, mm, phi.cap())?;
                rows.push(vec![mm.to_string(), d.to_string(), lo.to_string(), hi.to_string()]);
            }
            (csv_table(&["m", "delta_phi", "n_lo", "n_hi"], rows)?, out.as_deref())
        }
        FundfnCommand::Envelope { samples, values, out } => {
            let v: Vec<f64> = match (samples, values) {
                (Some(p), None) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
                (None, Some(v)) => v.clone(),
                _ => return Err(Error::OutOfRange("give --samples or --values".into())),
            };
            let phi = FundamentalFunction::grid(v)?;
            let psi = concave_envelope(&phi)?;
            let rows = (1..=phi.cap()).map(|k| {
                let x = k as f64;
                vec![k.to_string(), phi.eval(x).to_string(), psi.eval(x).to_string()]
            });
            (csv_table(&["x", "phi", "psi"], rows)?, out.as_deref())
        }
        FundfnCommand::Alternating { breakpoints, cap, out } => {
            let phi = make_alternating_fundfn(breakpoints, *cap)?;
            phi.check()?;
            let rows = (1..=*cap).map(|k| {
                let x = k as f64;
                vec![k.to_string(), phi.eval(x).to_string(), phi.lambda(x).to_string()]
            });
            (csv_table(&["x", "phi", "lambda"], rows)?, out.as_deref())
        }
        FundfnCommand::Regularize { f, m, eps, out } => {
            let phi = load_function(f)?;
            let r = regularize_dilation(&phi, *m, *eps)?;
            eprintln!(
                "k = {}, delta_psi({m}) = {:.9}, a = {:.6}, b = {:.6}, checks {}",
                r.k,
                r.delta_psi_m,
                r.a,
                r.b,
                if r.all_checks_pass() { "pass" } else { "FAIL" }
            );
            let rows = (1..=phi.cap()).map(|k| {
                let x = k as f64;
                vec![
                    k.to_string(),
                    phi.eval(x).to_string(),
                    r.psi.eval(x).to_string(),
                    r.psi.lambda(x).to_string(),
                ]
            });
            (csv_table(&["x", "phi", "psi", "lambda_psi"], rows)?, out.as_deref())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formulas() {
        assert_eq!(parse_formula("sqrt").unwrap(), Formula::Power { exponent: 0.5 });
        assert_eq!(parse_formula("power:0.9").unwrap(), Formula::Power { exponent: 0.9 });
        assert!(parse_formula("cube").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["greedylab", "analyze"]), EXIT_ERROR);
        assert_eq!(
            run(["greedylab", "analyze", "--space", "/nonexistent.json"]),
            EXIT_ERROR
        );
    }

    #[test]
    fn output_is_atomic() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("o.txt");
        write_output(Some(&p), "abc").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "abc");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
