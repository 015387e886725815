use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex;

use stationary_phase::audit::hypothesis_audit;
use stationary_phase::coeffs::coefficients;
use stationary_phase::config::ProblemConfig;
use stationary_phase::expansion::{
    first_derivative_test, orientation_audit, stationary_phase_expand, ExpansionResult, Theorem,
};
use stationary_phase::oracle::{oscillatory_quadrature, QuadratureSettings};
use stationary_phase::study::{csv, fitted_slopes, parse_t_grid, run_study};
use stationary_phase::{Dd, Error, PhaseProblem, Real};

const EXIT_CONFIG: u8 = 1;
const EXIT_ENGINE: u8 = 2;
const EXIT_QUADRATURE: u8 = 3;
const EXIT_STUDY_ROWS: u8 = 4;

#[derive(Parser)]
#[command(name = "sphase", version, about = "Stationary-phase expansions of oscillatory integrals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand the integral around its stationary point (or by the first-derivative test with --fdt).
    Expand {
        #[command(flatten)]
        input: Input,
        /// Override the order n from the config.
        #[arg(long)]
        n: Option<usize>,
        /// Use the first-derivative test (no stationary point in the interval).
        #[arg(long)]
        fdt: bool,
    },
    /// Evaluate the integral by direct quadrature.
    Quad {
        #[command(flatten)]
        input: Input,
        /// Absolute tolerance between refinement levels.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Compare expansion and quadrature over a grid of T values; CSV on stdout.
    Study {
        #[command(flatten)]
        input: Input,
        /// T grid as Tmin:Tmax:factor.
        #[arg(long, default_value = "2^10:2^18:4")]
        grid: String,
        /// Orders to study, e.g. 1,2,3.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        n: Vec<usize>,
        /// Quadrature tolerance; defaults to 1e-29 in double-double and 1e-14 in f64.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print the hypothesis audit.
    Audit {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Args)]
struct Input {
    /// Problem file.
    #[arg(value_name = "CONFIG", required_unless_present = "config")]
    path: Option<PathBuf>,
    #[arg(long, conflicts_with = "path")]
    config: Option<PathBuf>,
    /// Working precision. Studies default to double-double.
    #[arg(long, value_enum)]
    precision: Option<Precision>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Precision {
    F64,
    Dd,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn engine(e: Error) -> Self {
        let message = match e {
            Error::NoSignChange => "no stationary point; use quad or fdt".to_string(),
            other => other.to_string(),
        };
        Failure { code: EXIT_ENGINE, message }
    }
}

impl Input {
    fn load(&self) -> Result<ProblemConfig, Failure> {
        let path = self.path.as_ref().or(self.config.as_ref()).expect("clap enforces a config path");
        ProblemConfig::load(path).map_err(|e| Failure { code: EXIT_CONFIG, message: e.to_string() })
    }

    fn problem(&self, order: Option<usize>) -> Result<PhaseProblem, Failure> {
        self.load()?.problem(order, None).map_err(|e| Failure { code: EXIT_CONFIG, message: e.to_string() })
    }
}

fn complex<R: Real>(z: Complex<R>) -> String {
    // adding zero turns -0 into +0
    let re = z.re + R::zero();
    if z.im < R::zero() {
        format!("{re} - {}i", -z.im)
    } else {
        format!("{re} + {}i", z.im + R::zero())
    }
}

/// Twelve significant digits, but never more than twelve decimals, so values
/// below the quadrature's resolution print as zero.
fn twelve(v: f64) -> String {
    let decimals = if v == 0.0 || v.abs() < 1.0 { 12 } else { (11 - v.abs().log10().floor() as i64).max(0) as usize };
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn expand_report<R: Real>(p: &PhaseProblem, fdt: bool) -> Result<String, Failure> {
    let mut out = String::new();
    let result: ExpansionResult<R> = if fdt {
        first_derivative_test(p).map_err(Failure::engine)?
    } else {
        let r = stationary_phase_expand(p).map_err(Failure::engine)?;
        let cs = coefficients::<R>(p).map_err(Failure::engine)?;
        writeln!(out, "gamma = {}", cs.gamma).unwrap();
        writeln!(out, "orientation = {:?}", cs.orientation).unwrap();
        writeln!(out, "lambda2 = {}", cs.lambda[2]).unwrap();
        for (k, w) in cs.varpi.iter().enumerate() {
            writeln!(out, "varpi[{k}] = {w}").unwrap();
        }
        writeln!(out, "route discrepancy = {:.3e}", cs.route_discrepancy()).unwrap();
        r
    };
    let theorem = match result.theorem {
        Theorem::Fdt => "first-derivative test",
        Theorem::Wsp => "stationary phase",
    };
    writeln!(out, "method = {theorem}, n = {}", p.order).unwrap();
    if result.theorem == Theorem::Wsp {
        writeln!(out, "main term = {}", complex(result.main_term)).unwrap();
        for (j, c) in result.per_order_main.iter().enumerate() {
            writeln!(out, "  order {j}: {}", complex(*c)).unwrap();
        }
    }
    writeln!(out, "boundary alpha = {}", complex(result.boundary_alpha)).unwrap();
    writeln!(out, "boundary beta = {}", complex(result.boundary_beta)).unwrap();
    writeln!(out, "value = {}", complex(result.value)).unwrap();
    writeln!(out, "error_scale = {:e}", result.error_scale).unwrap();
    let audit = match result.orientation {
        Some(o) => orientation_audit(p, o),
        None => hypothesis_audit(p),
    };
    if let Ok(a) = audit {
        writeln!(out, "audit: Delta = {:e}, validity_ok = {}", a.delta, a.validity_ok).unwrap();
    }
    for w in &result.warnings {
        writeln!(out, "warning: {w}").unwrap();
    }
    Ok(out)
}

fn quad_report<R: Real>(p: &PhaseProblem, tol: f64) -> Result<String, Failure> {
    let s = QuadratureSettings::tuned::<R>(tol);
    let q = oscillatory_quadrature::<R>(p, &s).map_err(|e| Failure {
        code: if matches!(e, Error::NotConverged { .. }) { EXIT_QUADRATURE } else { EXIT_ENGINE },
        message: e.to_string(),
    })?;
    let (re, im) = (q.value.re.to_f64(), q.value.im.to_f64());
    let sign = if twelve(im).starts_with('-') { '-' } else { '+' };
    Ok(format!("{} {sign} {}i\npanels = {}\n", twelve(re), twelve(im).trim_start_matches('-'), q.panels))
}

fn audit_report(p: &PhaseProblem) -> Result<String, Failure> {
    let a = hypothesis_audit(p).map_err(Failure::engine)?;
    let mut out = String::new();
    for (r, c) in &a.c_f {
        writeln!(out, "C_{r} (f) = {c:e}").unwrap();
    }
    for (s, c) in &a.c_g {
        writeln!(out, "C_{s} (g) = {c:e}").unwrap();
    }
    writeln!(out, "Delta = {:e}", a.delta).unwrap();
    writeln!(out, "T^(1/(2n+3)) * Delta = {:e}", a.validity_margin).unwrap();
    writeln!(out, "validity_ok = {}", a.validity_ok).unwrap();
    match a.gamma {
        Some(g) => writeln!(out, "gamma = {g}").unwrap(),
        None => writeln!(out, "gamma: {}", a.sign_profile.describe()).unwrap(),
    }
    writeln!(out, "r1 = {:e}", a.r1).unwrap();
    writeln!(out, "r2 = {:e}", a.r2).unwrap();
    writeln!(out, "r = {:e}", a.r).unwrap();
    writeln!(out, "M >= beta - alpha: {}", a.m_ok).unwrap();
    for w in a.warnings() {
        writeln!(out, "warning: {w}").unwrap();
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Expand { input, n, fdt } => {
            let p = input.problem(n)?;
            let text = match input.precision {
                Some(Precision::Dd) => expand_report::<Dd>(&p, fdt)?,
                _ => expand_report::<f64>(&p, fdt)?,
            };
            print!("{text}");
        }
        Command::Quad { input, tol } => {
            let p = input.problem(None)?;
            let text = match input.precision {
                Some(Precision::Dd) => quad_report::<Dd>(&p, tol)?,
                _ => quad_report::<f64>(&p, tol)?,
            };
            print!("{text}");
        }
        Command::Study { input, grid, n, tol } => {
            let cfg = input.load()?;
            let ts = parse_t_grid(&grid).map_err(|message| Failure { code: EXIT_CONFIG, message })?;
            let dd = input.precision != Some(Precision::F64);
            let rows = if dd {
                run_study::<Dd>(&cfg, &ts, &n, &QuadratureSettings::tuned::<Dd>(tol.unwrap_or(1e-29)))
            } else {
                run_study::<f64>(&cfg, &ts, &n, &QuadratureSettings::tuned::<f64>(tol.unwrap_or(1e-14)))
            }
                .map_err(|e| Failure { code: EXIT_CONFIG, message: e.to_string() })?;
            print!("{}", csv(&rows));
            for (order, slope) in fitted_slopes(&rows, &n) {
                eprintln!("n = {order}: slope of log2(abs_error) vs log2(T) = {slope:.4}");
            }
            let failed: Vec<String> = rows
                .iter()
                .filter_map(|r| r.failure.as_ref().map(|why| format!("T = {}, n = {}: {why}", r.t, r.n)))
                .collect();
            if !failed.is_empty() {
                return Err(Failure { code: EXIT_STUDY_ROWS, message: failed.join("\n") });
            }
        }
        Command::Audit { input, n } => {
            let p = input.problem(n)?;
            print!("{}", audit_report(&p)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
