//! Stationary point, Taylor data and the amplitude coefficients `ϖ_k`.
//!
//! Near the stationary point `γ` the substitution `f(x) - f(γ) = λ₂ y²`
//! turns the integrand into `g(x(y)) x'(y) e(f(γ) + λ₂ y²)`, and
//! `g(x(y)) x'(y) = Σ ϖ_k y^k` carries everything the main term needs.
//!
//! The coefficients are produced twice. [`amplitude_series`] reverts
//! `y = t √B(t)` (with `t = x - γ`) as a formal series and composes.
//! [`recursion_coefficients`] never reverts: it expands `y^j` in powers of
//! `t`, then solves the resulting triangular systems for the `y`-coefficients
//! of `g` and of `dx/dy = 2λ₂y / f'(x)`.

use crate::error::{Error, Result};
use crate::expr::Compiled;
use crate::jet::Jet;
use crate::problem::PhaseProblem;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `f'' > 0` at `γ`: `f` has a minimum.
    Min,
    /// `f'' < 0` at `γ`.
    Max,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Min => 1.0,
            Orientation::Max => -1.0,
        }
    }
}

/// Outcome of scanning `f'` for sign changes on the problem grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SignProfile {
    pub changes: usize,
    /// Bracket around the first sign change.
    pub bracket: Option<(f64, f64)>,
    /// Sign of `f'` at the left end of the grid (`0` if it vanishes there).
    pub first_sign: i8,
}

impl SignProfile {
    pub fn describe(&self) -> String {
        match (self.changes, self.bracket) {
            (0, _) => match self.first_sign {
                1 => "f' > 0 throughout".to_string(),
                -1 => "f' < 0 throughout".to_string(),
                _ => "f' vanishes at the left end without changing sign".to_string(),
            },
            (1, Some((a, b))) => {
                let dir = if self.first_sign < 0 { "negative to positive" } else { "positive to negative" };
                format!("one sign change ({dir}) in [{a:.6}, {b:.6}]")
            }
            (k, _) => format!("{k} sign changes"),
        }
    }
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Counts sign changes of the derivative of order `k` of `f` on the grid.
pub(crate) fn scan_signs(p: &PhaseProblem, f: &Compiled<f64>, k: usize) -> Result<SignProfile> {
    let mut last: Option<(i8, f64)> = None;
    let mut first_sign = 0;
    let mut changes = 0;
    let mut bracket = None;
    for (i, x) in p.grid_points().enumerate() {
        let d = f.jet_at(x, k)?.derivative(k)?.re;
        let s = sign_of(d);
        if i == 0 {
            first_sign = s;
        }
        if s == 0 {
            continue;
        }
        if let Some((prev, px)) = last {
            if prev != s {
                changes += 1;
                if bracket.is_none() {
                    bracket = Some((px, x));
                }
            }
        } else if first_sign == 0 {
            first_sign = s;
        }
        last = Some((s, x));
    }
    Ok(SignProfile { changes, bracket, first_sign })
}

fn f_derivs(f: &Compiled<f64>, x: f64) -> Result<(f64, f64)> {
    let j = f.jet_at(x, 2)?;
    Ok((j.derivative(1)?.re, j.derivative(2)?.re))
}

/// Locates the single interior zero of `f'`.
///
/// The grid scan brackets the sign change, a safeguarded Newton iteration
/// (bisection whenever Newton leaves the bracket) converges in `f64`, and
/// two further Newton steps run at the working precision `R`.
pub fn find_stationary_point<R: Real>(p: &PhaseProblem) -> Result<R> {
    let (f, _) = p.compile::<f64>()?;
    let profile = scan_signs(p, &f, 1)?;
    let width = p.beta - p.alpha;
    let tiny = 1e-12 * (p.scales.t / p.scales.m).max(1.0);
    match profile.changes {
        0 => {
            for end in [p.alpha, p.beta] {
                if f_derivs(&f, end)?.0.abs() <= tiny {
                    return Err(Error::StationaryAtEndpoint { gamma: end });
                }
            }
            return Err(Error::NoSignChange);
        }
        1 => {}
        count => return Err(Error::MultipleSignChanges { count }),
    }
    let (mut lo, mut hi) = profile.bracket.expect("one sign change has a bracket");
    let lo_sign = sign_of(f_derivs(&f, lo)?.0);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (d1, d2) = f_derivs(&f, x)?;
        if d1 == 0.0 {
            break;
        }
        if sign_of(d1) == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - d1 / d2;
        let next = if d2 != 0.0 && newton > lo.min(hi) && newton < lo.max(hi) { newton } else { 0.5 * (lo + hi) };
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x.abs().max(width) {
            break;
        }
    }
    let (fr, _) = p.compile::<R>()?;
    let mut gamma = R::from_f64(x);
    for _ in 0..2 {
        let j = fr.jet_at(gamma, 2)?;
        let (d1, d2) = (j.derivative(1)?.re, j.derivative(2)?.re);
        if d2 == R::zero() {
            break;
        }
        gamma = gamma - d1 / d2;
    }
    let g = gamma.to_f64();
    if g - p.alpha <= 1e-9 * width || p.beta - g <= 1e-9 * width {
        return Err(Error::StationaryAtEndpoint { gamma: g });
    }
    Ok(gamma)
}

/// Taylor coefficients at `γ`: `λ_k = f^(k)(γ)/k!` for `k = 0..=2n+2` and
/// `η_k = g^(k)(γ)/k!` for `k = 0..=2n`.
pub fn taylor_data<R: Real>(p: &PhaseProblem, gamma: R) -> Result<(Vec<R>, Vec<R>)> {
    let (f, g) = p.compile::<R>()?;
    let n = p.order;
    let lambda = f.jet_at(gamma, 2 * n + 2)?.real_coeffs();
    let eta = g.jet_at(gamma, 2 * n)?.real_coeffs();
    let scale = p.scales.t / (p.scales.m * p.scales.m);
    if lambda[2].abs().to_f64() <= 1e-12 * scale {
        return Err(Error::DegenerateStationaryPoint { f2: (lambda[2] + lambda[2]).to_f64() });
    }
    Ok((lambda, eta))
}

fn series<R: Real>(coeffs: &[R]) -> Jet<R> {
    Jet::from_real(0.0, coeffs)
}

fn truncate<R: Real>(j: &Jet<R>, degree: usize) -> Vec<R> {
    j.with_degree(degree).real_coeffs()
}

/// `B(t) = 1 + Σ_{k=1}^{order} (λ_{k+2}/λ₂) t^k`, the bracket in
/// `f(x) - f(γ) = λ₂ t² B(t)`.
fn bracket<R: Real>(lambda: &[R], order: usize) -> Vec<R> {
    let mut b = vec![R::one()];
    b.extend((1..=order).map(|k| lambda.get(k + 2).copied().unwrap_or_else(R::zero) / lambda[2]));
    b
}

/// Output of the reversion route.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSeries<R: Real = f64> {
    /// `x - γ` as a series in `y`, orders `0..=order`.
    pub x_of_y: Vec<R>,
    /// `dx/dy = Σ ρ_k y^k`.
    pub rho: Vec<R>,
    /// `g(x) dx/dy = Σ ϖ_k y^k`.
    pub varpi: Vec<R>,
}

/// Reversion route: `y(t) = t √B(t)` is inverted, differentiated, and the
/// weight series is composed with the inverse.
///
/// `lambda` is indexed by order (`lambda[2] = λ₂`) and needs entries up to
/// `order + 2`; `eta` needs `order + 1` entries.
pub fn amplitude_series<R: Real>(lambda: &[R], eta: &[R], order: usize) -> Result<AmplitudeSeries<R>> {
    let d = order.max(1);
    let root = series(&bracket(lambda, d)).sqrt()?;
    let mut y = vec![R::zero()];
    y.extend(root.real_coeffs());
    let t_of_y = series(&y).revert()?;
    let rho = t_of_y.differentiate()?;
    let inner = t_of_y.with_degree(d);
    let mut eta_d = eta.to_vec();
    eta_d.resize(d + 1, R::zero());
    let eta_prime = Jet::compose(&series(&eta_d), &inner)?;
    let varpi = eta_prime.mul(&rho)?;
    Ok(AmplitudeSeries {
        x_of_y: truncate(&t_of_y, order),
        rho: truncate(&rho, order),
        varpi: truncate(&varpi, order),
    })
}

/// Output of the recursion route.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionCoefficients<R: Real = f64> {
    /// `mu[j-1][k] = μ_{jk}`, the `t^k` coefficient of `B(t)^{j/2}`, for
    /// `j = 1..=order+1`.
    pub mu: Vec<Vec<R>>,
    /// `y`-coefficients of `g(x(y))`.
    pub eta_prime: Vec<R>,
    /// `y`-coefficients of `dx/dy`, from `dx/dy = 2λ₂y/f'(x)`.
    pub rho_check: Vec<R>,
    pub varpi_check: Vec<R>,
}

/// Rewrites `P(t) = Σ p_m t^m` as `Σ q_k y^k` using
/// `y^k = Σ_ℓ μ_{kℓ} t^{k+ℓ}`. The system is unit lower triangular:
/// `p_m = q_m + Σ_{k=1}^{m-1} q_k μ_{k,m-k}`.
fn t_series_to_y_series<R: Real>(p: &[R], mu: &[Vec<R>]) -> Vec<R> {
    let mut q: Vec<R> = Vec::with_capacity(p.len());
    for m in 0..p.len() {
        let mut acc = p[m];
        for k in 1..m {
            acc = acc - q[k] * mu[k - 1][m - k];
        }
        q.push(acc);
    }
    q
}

pub fn recursion_coefficients<R: Real>(lambda: &[R], eta: &[R], order: usize) -> Result<RecursionCoefficients<R>> {
    let d = order.max(1);
    let b = series(&bracket(lambda, d));
    let mu = (1..=d + 1)
        .map(|j| Ok(b.powf(R::from_f64(j as f64 / 2.0))?.real_coeffs()))
        .collect::<Result<Vec<_>>>()?;

    let mut eta_d = eta.to_vec();
    eta_d.resize(d + 1, R::zero());
    let eta_prime = t_series_to_y_series(&eta_d, &mu);

    // 2λ₂t / f'(x) = 1 / (1 + Σ_{k≥3} kλ_k/(2λ₂) t^{k-2}) and y/t = √B(t)
    let two_l2 = lambda[2] + lambda[2];
    let mut slope = vec![R::one()];
    slope.extend((3..=d + 2).map(|k| R::from_f64(k as f64) * lambda.get(k).copied().unwrap_or_else(R::zero) / two_l2));
    let inv_slope = series(&vec_one(d)).div(&series(&slope))?;
    let dxdy_t = inv_slope.mul(&series(&mu[0]))?;
    let rho_check = t_series_to_y_series(&dxdy_t.real_coeffs(), &mu);

    let varpi_check = (0..=d)
        .map(|k| (0..=k).fold(R::zero(), |acc, l| acc + eta_prime[l] * rho_check[k - l]))
        .collect::<Vec<_>>();

    let cut = |v: Vec<R>| v.into_iter().take(order + 1).collect::<Vec<_>>();
    Ok(RecursionCoefficients {
        mu,
        eta_prime: cut(eta_prime),
        rho_check: cut(rho_check),
        varpi_check: cut(varpi_check),
    })
}

fn vec_one<R: Real>(d: usize) -> Vec<R> {
    let mut v = vec![R::zero(); d + 1];
    v[0] = R::one();
    v
}

/// Everything the main term needs, at working precision `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet<R: Real = f64> {
    pub gamma: R,
    pub orientation: Orientation,
    /// `lambda[k] = λ_k` for `k = 0..=2n+2` (`lambda[0] = f(γ)`).
    pub lambda: Vec<R>,
    /// `eta[k] = η_k` for `k = 0..=2n`.
    pub eta: Vec<R>,
    pub x_of_y: Vec<R>,
    pub rho: Vec<R>,
    pub varpi: Vec<R>,
    pub mu: Vec<Vec<R>>,
    pub eta_prime: Vec<R>,
    pub rho_check: Vec<R>,
    pub varpi_check: Vec<R>,
}

impl<R: Real> CoefficientSet<R> {
    pub fn order(&self) -> usize {
        self.varpi.len() - 1
    }

    /// Largest relative disagreement between the two routes, with an
    /// absolute floor of one for coefficients near zero.
    pub fn route_discrepancy(&self) -> f64 {
        self.varpi
            .iter()
            .zip(&self.varpi_check)
            .map(|(a, b)| ((*a - *b).abs().to_f64()) / a.abs().to_f64().max(1.0))
            .fold(0.0, f64::max)
    }
}

pub fn coefficients<R: Real>(p: &PhaseProblem) -> Result<CoefficientSet<R>> {
    let gamma = find_stationary_point::<R>(p)?;
    coefficients_at(p, gamma)
}

pub fn coefficients_at<R: Real>(p: &PhaseProblem, gamma: R) -> Result<CoefficientSet<R>> {
    let (lambda, eta) = taylor_data(p, gamma)?;
    let order = 2 * p.order;
    let amp = amplitude_series(&lambda, &eta, order)?;
    let rec = recursion_coefficients(&lambda, &eta, order)?;
    let orientation = if lambda[2] > R::zero() { Orientation::Min } else { Orientation::Max };
    Ok(CoefficientSet {
        gamma,
        orientation,
        lambda,
        eta,
        x_of_y: amp.x_of_y,
        rho: amp.rho,
        varpi: amp.varpi,
        mu: rec.mu,
        eta_prime: rec.eta_prime,
        rho_check: rec.rho_check,
        varpi_check: rec.varpi_check,
    })
}

/// Solves `f(x) - f(γ) = λ₂ y²` for the `x` on the side matching the sign of
/// `y`, by Newton's method with a bisection fallback. `guess` is a starting
/// point; it is replaced by the bracket midpoint if it falls outside.
pub fn solve_substitution<R: Real>(
    p: &PhaseProblem,
    f: &Compiled<R>,
    gamma: R,
    f0: R,
    l2: R,
    guess: R,
    y: R,
) -> Result<R> {
    let fail = |reason: &str| Error::SubstitutionFailed { y: y.to_f64(), reason: reason.to_string() };
    if y == R::zero() {
        return Err(fail("y = 0 is excluded (x(0) = gamma)"));
    }
    let target = y * y;
    let h = |x: R| -> Result<(R, R)> {
        let j = f.jet_at(x, 1)?;
        Ok(((j.constant_term().re - f0) / l2 - target, j.derivative(1)?.re / l2))
    };
    let positive = y > R::zero();
    let end = R::from_f64(if positive { p.beta } else { p.alpha });
    if h(end)?.0 < R::zero() {
        return Err(fail("y lies outside the range of the substitution on this side"));
    }
    let (mut lo, mut hi) = if positive { (gamma, end) } else { (end, gamma) };
    // h grows with |x - γ|, so left of γ it decreases in x
    let below = |v: R| if positive { v < R::zero() } else { v > R::zero() };

    let two = R::from_f64(2.0);
    let mut x = if guess > lo && guess < hi { guess } else { (lo + hi) / two };
    let tol = R::from_f64(4.0 * R::EPSILON);
    for _ in 0..60 {
        let (v, dv) = h(x)?;
        if v == R::zero() {
            return Ok(x);
        }
        if below(v) {
            lo = x;
        } else {
            hi = x;
        }
        if dv != R::zero() && (v / dv).abs() <= tol * (x - gamma).abs() {
            return Ok(x - v / dv);
        }
        let mut next = if dv != R::zero() { x - v / dv } else { x };
        if !(next > lo && next < hi) {
            next = (lo + hi) / two;
        }
        let step = (next - x).abs();
        x = next;
        if step <= tol * (x - gamma).abs() {
            return Ok(x);
        }
    }
    Err(fail("Newton iteration did not converge in 60 steps"))
}

/// `Q(y) = g(x) dx/dy - Σ_{k=0}^{2n} ϖ_k y^k` with `dx/dy = 2λ₂y / f'(x)`.
pub fn residual_q<R: Real>(p: &PhaseProblem, cs: &CoefficientSet<R>, y: R) -> Result<R> {
    let (f, g) = p.compile::<R>()?;
    let guess = cs.gamma + cs.x_of_y.iter().rev().fold(R::zero(), |acc, &c| acc * y + c);
    let l2 = cs.lambda[2];
    let x = solve_substitution(p, &f, cs.gamma, cs.lambda[0], l2, guess, y)?;
    let fp = f.jet_at(x, 1)?.derivative(1)?.re;
    let lhs = g.eval(x)? * (l2 + l2) * y / fp;
    let series = cs.varpi.iter().rev().fold(R::zero(), |acc, &c| acc * y + c);
    Ok(lhs - series)
}

/// `(2j-1)!! = 1·3·5···(2j-1)`, with the empty product for `j = 0`.
pub fn double_factorial_odd(j: usize) -> f64 {
    (1..=j).fold(1.0, |acc, i| acc * (2 * i - 1) as f64)
}
