//! Convergence studies: expansion against quadrature over a grid of `T`.
//!
//! The phase is expected to scale as `f = T·φ(x)`, so the config's `f` must
//! mention `T`. Each row records one `(T, n)` pair; the oracle value for a
//! given `T` is shared by all orders.

use num_complex::Complex;

use crate::config::{ConfigError, ProblemConfig};
use crate::expansion::expand_auto;
use crate::oracle::{oscillatory_quadrature, QuadratureSettings};
use crate::real::Real;

pub const CSV_HEADER: &str = "T,n,expansion_re,expansion_im,oracle_re,oracle_im,abs_error,error_scale";

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub t: f64,
    pub n: usize,
    pub expansion: Complex<f64>,
    pub oracle: Complex<f64>,
    pub abs_error: f64,
    pub error_scale: f64,
    /// Why the row is NaN, if it is.
    pub failure: Option<String>,
}

impl StudyRow {
    fn failed(t: f64, n: usize, why: String) -> Self {
        let nan = Complex::new(f64::NAN, f64::NAN);
        StudyRow { t, n, expansion: nan, oracle: nan, abs_error: f64::NAN, error_scale: f64::NAN, failure: Some(why) }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.t,
            self.n,
            self.expansion.re,
            self.expansion.im,
            self.oracle.re,
            self.oracle.im,
            self.abs_error,
            self.error_scale
        )
    }
}

/// Parses `Tmin:Tmax:factor` into `Tmin, Tmin·factor, …` up to `Tmax`.
pub fn parse_t_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("T grid must look like Tmin:Tmax:factor, got '{text}'"));
    }
    let mut nums = [0.0; 3];
    for (slot, part) in nums.iter_mut().zip(&parts) {
        *slot = crate::expr::parse(part)
            .map_err(|e| e.to_string())
            .and_then(|e| e.eval_real(0.0, &Default::default()).map_err(|e| e.to_string()))
            .map_err(|e| format!("bad T grid entry '{part}': {e}"))?;
    }
    let [lo, hi, factor] = nums;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(format!("T grid needs 0 < Tmin <= Tmax, got {lo}:{hi}"));
    }
    if !(factor > 1.0) && hi > lo {
        return Err(format!("T grid factor must exceed 1, got {factor}"));
    }
    let mut out = vec![lo];
    let mut t = lo * factor;
    while hi > lo && t <= hi * (1.0 + 1e-12) {
        out.push(t);
        t *= factor;
    }
    Ok(out)
}

/// Least-squares slope of `log₂ y` against `log₂ x`; NaN with fewer than two
/// usable points.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log2(), y.log2()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

fn to_f64<R: Real>(z: Complex<R>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

/// Runs the study with carrier `R`. Rows come out ordered by `T`, then `n`.
pub fn run_study<R: Real>(
    cfg: &ProblemConfig,
    ts: &[f64],
    ns: &[usize],
    quad: &QuadratureSettings,
) -> Result<Vec<StudyRow>, ConfigError> {
    if !crate::expr::parse(&cfg.f).map_err(|e| ConfigError::Problem(e.to_string()))?.mentions("T") {
        return Err(ConfigError::Problem("a study needs f to scale with T, as in f = T*phi(x)".into()));
    }
    let mut rows = Vec::with_capacity(ts.len() * ns.len());
    for &t in ts {
        let base = cfg.problem(ns.first().copied(), Some(t))?;
        let oracle = oscillatory_quadrature::<R>(&base, quad);
        for &n in ns {
            let row = match (&oracle, cfg.problem(Some(n), Some(t)).map(|p| expand_auto::<R>(&p))) {
                (Err(e), _) => StudyRow::failed(t, n, format!("oracle: {e}")),
                (_, Err(e)) => StudyRow::failed(t, n, e.to_string()),
                (_, Ok(Err(e))) => StudyRow::failed(t, n, e.to_string()),
                (Ok(q), Ok(Ok(x))) => {
                    let d = x.value - q.value;
                    let abs_error = (d.re * d.re + d.im * d.im).sqrt().to_f64();
                    StudyRow {
                        t,
                        n,
                        expansion: to_f64(x.value),
                        oracle: to_f64(q.value),
                        abs_error,
                        error_scale: x.error_scale,
                        failure: None,
                    }
                }
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn csv(rows: &[StudyRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// Fitted slope of `log₂ abs_error` against `log₂ T` for each order.
pub fn fitted_slopes(rows: &[StudyRow], ns: &[usize]) -> Vec<(usize, f64)> {
    ns.iter()
        .map(|&n| {
            let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.n == n).map(|r| (r.t, r.abs_error)).collect();
            (n, loglog_slope(&pts))
        })
        .collect()
}
