//! The weighted first-derivative test and the stationary-phase expansion.

use num_complex::Complex;

use crate::audit::{hypothesis_audit, AuditReport};
use crate::coeffs::{coefficients, double_factorial_odd, scan_signs, CoefficientSet, Orientation};
use crate::error::{Error, Result};
use crate::expr::Compiled;
use crate::problem::PhaseProblem;
use crate::real::{e_turns, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    /// First-derivative test: boundary terms only.
    Fdt,
    /// Weighted stationary phase.
    Wsp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionResult<R: Real = f64> {
    pub value: Complex<R>,
    pub main_term: Complex<R>,
    pub boundary_alpha: Complex<R>,
    pub boundary_beta: Complex<R>,
    /// Contribution of `ϖ_{2j}` for `j = 0..=n`.
    pub per_order_main: Vec<Complex<R>>,
    pub error_scale: f64,
    pub orientation: Option<Orientation>,
    pub theorem: Theorem,
    pub gamma: Option<R>,
    pub warnings: Vec<String>,
}

/// `H_1(x0), ..., H_count(x0)` from `H_1 = g/(2πi f')` and
/// `H_i = -H_{i-1}'/(2πi f')`.
///
/// Writing `H_i = c_i K_i` with `K_1 = g/f'`, `K_i = K_{i-1}'/f'` keeps the
/// jet work real; the constants are `c_1 = 1/(2πi)` and
/// `c_i = -c_{i-1}/(2πi)`.
pub fn boundary_terms<R: Real>(
    p: &PhaseProblem,
    f: &Compiled<R>,
    g: &Compiled<R>,
    x0: R,
    count: usize,
) -> Result<Vec<Complex<R>>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let fp = f.jet_at(x0, count + 1)?.differentiate()?;
    if fp.constant_term().re.abs().to_f64() <= 1e-12 * p.scales.t / p.scales.m {
        return Err(Error::VanishingDerivative { x: x0.to_f64() });
    }
    let gj = g.jet_at(x0, count.max(1))?.with_degree(count);
    let two_pi = R::pi() + R::pi();
    let step = Complex::new(R::zero(), R::one() / two_pi);
    let mut c = -step;
    let mut k = gj.div(&fp)?;
    let mut out = vec![k.constant_term() * c];
    for _ in 2..=count {
        let dk = k.differentiate()?;
        k = dk.div(&fp.with_degree(dk.degree()))?;
        c = c * step;
        out.push(k.constant_term() * c);
    }
    Ok(out)
}

fn endpoint_sum<R: Real>(p: &PhaseProblem, f: &Compiled<R>, g: &Compiled<R>, x0: R, count: usize) -> Result<Complex<R>> {
    let h = boundary_terms(p, f, g, x0, count)?;
    let sum = h.into_iter().fold(Complex::new(R::zero(), R::zero()), |a, b| a + b);
    Ok(e_turns(f.eval(x0)?) * sum)
}

/// The three error magnitudes of the first-derivative test with unit
/// constants, where `m = min |f'|`.
pub fn fdt_error_terms(p: &PhaseProblem, m: f64) -> [f64; 3] {
    let n = p.order as i32;
    let s = p.scales;
    let (mm, nn, t, u) = (s.m, s.n, s.t, s.u);
    let inner = |j: i32, from: i32| -> f64 { (from..=n - j).map(|tt| 1.0 / (nn.powi(n - j - tt) * mm.powi(tt))).sum() };
    let outer = |j: i32| u * t.powi(j) / (m.powi(n + j + 1) * mm.powi(2 * j));
    let e1 = mm / nn * (1..=n / 2).map(|j| outer(j) * inner(j, j)).sum::<f64>();
    let e2 = (mm / nn + 1.0) * u / (nn.powi(n) * m.powi(n + 1));
    let e3 = (1..=n).map(|j| outer(j) * inner(j, 0)).sum::<f64>();
    [e1, e2, e3]
}

/// The four error magnitudes of the stationary expansion with unit
/// constants, in order.
pub fn error_scale_terms(p: &PhaseProblem, gamma: f64) -> Result<[f64; 4]> {
    if !(gamma > p.alpha && gamma < p.beta) {
        return Err(Error::StationaryAtEndpoint { gamma });
    }
    let n = p.order as i32;
    let s = p.scales;
    let (m, nn, t, u) = (s.m, s.n, s.t, s.u);
    let (a, b) = (gamma - p.alpha, p.beta - gamma);
    let both = |k: i32| a.powi(-k) + b.powi(-k);
    Ok([
        u * m.powi(2 * n + 5) / (t.powi(n + 2) * nn.powi(n + 2)) * both(n + 2),
        u * m.powi(2 * n + 4) / t.powi(n + 2) * both(2 * n + 3),
        u * m.powi(2 * n + 4) / (t.powi(n + 2) * nn.powi(2 * n)) * both(3),
        u / t.powi(n + 1) * (m.powi(2 * n + 2) / nn.powi(2 * n + 1) + m),
    ])
}

fn weight_vanishes(audit_g_max: f64) -> bool {
    audit_g_max == 0.0
}

fn g_max(p: &PhaseProblem) -> Result<f64> {
    let (_, g) = p.compile::<f64>()?;
    let mut out = 0.0f64;
    for x in p.grid_points() {
        out = out.max(g.eval(x)?.abs());
    }
    Ok(out)
}

pub fn first_derivative_test<R: Real>(p: &PhaseProblem) -> Result<ExpansionResult<R>> {
    let (f64f, _) = p.compile::<f64>()?;
    if scan_signs(p, &f64f, 1)?.changes > 0 {
        return Err(Error::SignChange);
    }
    if scan_signs(p, &f64f, 2)?.changes > 0 {
        return Err(Error::CurvatureSignChange);
    }
    let (f, g) = p.compile::<R>()?;
    let (a, b) = (R::from_f64(p.alpha), R::from_f64(p.beta));
    let count = p.order;
    let ba = endpoint_sum(p, &f, &g, a, count)?;
    let bb = endpoint_sum(p, &f, &g, b, count)?;
    let slope = |x: f64| -> Result<f64> { Ok(f64f.jet_at(x, 1)?.derivative(1)?.re.abs()) };
    let m = slope(p.alpha)?.min(slope(p.beta)?);
    let error_scale = if weight_vanishes(g_max(p)?) { 0.0 } else { fdt_error_terms(p, m).iter().sum() };
    let zero = Complex::new(R::zero(), R::zero());
    Ok(ExpansionResult {
        value: bb - ba,
        main_term: zero,
        boundary_alpha: ba,
        boundary_beta: bb,
        per_order_main: Vec::new(),
        error_scale,
        orientation: None,
        theorem: Theorem::Fdt,
        gamma: None,
        warnings: Vec::new(),
    })
}

/// Main term `e(f(γ) ± 1/8)/√|f''(γ)| · Σ_j ϖ_{2j} (-1)^j (2j-1)!!/(4πiλ₂)^j`,
/// one entry per `j = 0..=n`. With `λ₂ < 0` the sign of `1/8` flips and the
/// signed `λ₂` in the denominators accounts for the conjugation.
pub fn main_term_orders<R: Real>(cs: &CoefficientSet<R>, n: usize) -> Vec<Complex<R>> {
    let l2 = cs.lambda[2];
    let sigma = if l2 > R::zero() { R::one() } else { -R::one() };
    let phase = cs.lambda[0] + sigma * R::from_f64(0.125);
    let prefactor = e_turns(phase) / (l2 + l2).abs().sqrt();
    let four_pi_l2 = R::from_f64(4.0) * R::pi() * l2;
    // 1/(4πiλ₂) = -i/(4πλ₂)
    let unit = Complex::new(R::zero(), -R::one() / four_pi_l2);
    let mut power = Complex::new(R::one(), R::zero());
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let sign = if j % 2 == 0 { R::one() } else { -R::one() };
        let weight = cs.varpi[2 * j] * sign * R::from_f64(double_factorial_odd(j));
        out.push(prefactor * power * weight);
        power = power * unit;
    }
    out
}

pub fn stationary_phase_expand<R: Real>(p: &PhaseProblem) -> Result<ExpansionResult<R>> {
    let cs = coefficients::<R>(p)?;
    let gamma = cs.gamma.to_f64();
    let width = p.beta - p.alpha;
    if gamma - p.alpha < 1e-6 * width || p.beta - gamma < 1e-6 * width {
        return Err(Error::StationaryTooCloseToEndpoint { gamma });
    }
    let (f, g) = p.compile::<R>()?;
    let per_order_main = main_term_orders(&cs, p.order);
    let main_term = per_order_main.iter().fold(Complex::new(R::zero(), R::zero()), |a, &b| a + b);
    let count = p.order + 1;
    let ba = endpoint_sum(p, &f, &g, R::from_f64(p.alpha), count)?;
    let bb = endpoint_sum(p, &f, &g, R::from_f64(p.beta), count)?;

    let audit = orientation_audit(p, cs.orientation)?;
    let error_scale =
        if weight_vanishes(audit.g_max) { 0.0 } else { error_scale_terms(p, gamma)?.iter().sum() };
    Ok(ExpansionResult {
        value: main_term + bb - ba,
        main_term,
        boundary_alpha: ba,
        boundary_beta: bb,
        per_order_main,
        error_scale,
        orientation: Some(cs.orientation),
        theorem: Theorem::Wsp,
        gamma: Some(cs.gamma),
        warnings: audit.warnings(),
    })
}

/// Audit of the problem in its minimum orientation (`f` negated when `f''(γ) < 0`).
pub fn orientation_audit(p: &PhaseProblem, orientation: Orientation) -> Result<AuditReport> {
    match orientation {
        Orientation::Min => hypothesis_audit(p),
        Orientation::Max => hypothesis_audit(&p.negated_phase()),
    }
}

/// Picks the stationary expansion when `f'` changes sign and the
/// first-derivative test otherwise.
pub fn expand_auto<R: Real>(p: &PhaseProblem) -> Result<ExpansionResult<R>> {
    match stationary_phase_expand(p) {
        Err(Error::NoSignChange) => first_derivative_test(p),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn boundary_term_values() {
        let p = PhaseProblem::new("x^2", "1", -2.0, 2.0, 2).unwrap().finish().unwrap();
        let (f, g) = p.compile::<f64>().unwrap();
        let h = boundary_terms(&p, &f, &g, 1.0, 2).unwrap();
        assert!((h[0] - c(0.0, -1.0 / (4.0 * PI))).norm() < 1e-17);
        assert!((h[0].im + 0.0795775).abs() < 1e-7);
        // H₁ = 1/(4πi x), H₁' = -1/(4πi x²), H₂ = -H₁'/(4πi x) = 1/((4πi)² x³)
        assert!((h[1] - c(-1.0 / (16.0 * PI * PI), 0.0)).norm() < 1e-17);

        let p = PhaseProblem::new("x^2", "0", -2.0, 2.0, 2).unwrap().finish().unwrap();
        let (f, g) = p.compile::<f64>().unwrap();
        assert!(boundary_terms(&p, &f, &g, 1.0, 3).unwrap().iter().all(|h| h.norm() == 0.0));
        assert!(matches!(boundary_terms(&p, &f, &g, 0.0, 1), Err(Error::VanishingDerivative { .. })));
    }

    #[test]
    fn second_boundary_term_matches_finite_differences() {
        let p = PhaseProblem::new("x^2 + sin(x)/3", "exp(-x)", 0.5, 2.0, 2).unwrap().finish().unwrap();
        let (f, g) = p.compile::<f64>().unwrap();
        let h1 = |x: f64| boundary_terms(&p, &f, &g, x, 1).unwrap()[0];
        let x0 = 1.1;
        let h = 1e-5;
        let d = (h1(x0 + h) - h1(x0 - h)) / (2.0 * h);
        let fp = f.jet_at(x0, 1).unwrap().derivative(1).unwrap().re;
        let expected = -d / (c(0.0, 2.0 * PI) * fp);
        let h2 = boundary_terms(&p, &f, &g, x0, 2).unwrap()[1];
        assert!((h2 - expected).norm() < 1e-9 * h2.norm());
    }

    #[test]
    fn integer_frequency_fdt_is_exactly_zero() {
        let p = PhaseProblem::new("100*x", "1", 1.0, 2.0, 2).unwrap().finish().unwrap();
        let r = first_derivative_test::<f64>(&p).unwrap();
        assert_eq!(r.value, c(0.0, 0.0));
        assert_eq!(r.theorem, Theorem::Fdt);
        let p = PhaseProblem::new("100*x", "0", 1.0, 2.0, 2).unwrap().finish().unwrap();
        let r = first_derivative_test::<f64>(&p).unwrap();
        assert_eq!((r.value, r.error_scale), (c(0.0, 0.0), 0.0));
        let p = PhaseProblem::new("x^2", "1", -1.0, 1.0, 2).unwrap().finish().unwrap();
        assert_eq!(first_derivative_test::<f64>(&p), Err(Error::SignChange));
    }

    #[test]
    fn pure_quadratic_main_term() {
        let p = PhaseProblem::new("T*x^2", "1", -1.0, 1.0, 2).unwrap().with_t(1.0).finish().unwrap();
        let r = stationary_phase_expand::<f64>(&p).unwrap();
        assert!((r.main_term - c(0.5, 0.5)).norm() < 1e-15);
        assert!(r.per_order_main[1..].iter().all(|t| t.norm() == 0.0));
        assert_eq!(r.orientation, Some(Orientation::Min));
        let expected = r.main_term + r.boundary_beta - r.boundary_alpha;
        assert_eq!(r.value, expected);
    }

    #[test]
    fn error_terms() {
        let p = PhaseProblem::new("T*x^2", "1", -0.5, 0.5, 2)
            .unwrap()
            .with_scales(crate::problem::Scales { m: 1.0, n: 1.0, t: 1e4, u: 1.0 })
            .finish()
            .unwrap();
        let e = error_scale_terms(&p, 0.0).unwrap();
        assert!((e[3] - 2e-12).abs() < 1e-26);
        let p2 = p.clone().with_t(2e4);
        let e2 = error_scale_terms(&p2, 0.0).unwrap();
        for (a, b) in e.iter().zip(&e2) {
            assert!(*b <= a * 0.125 * (1.0 + 1e-12));
        }
        let near = error_scale_terms(&p, -0.5 + 1e-3).unwrap();
        assert!(near[1] > 1e15 * e[1]);
        assert!(error_scale_terms(&p, -0.5).is_err());
    }

    #[test]
    fn orientation_duality() {
        let p = PhaseProblem::new("T*(x^2 + x^3/3)", "1/(1+x^2)", -0.5, 0.5, 2).unwrap().with_t(300.0).finish().unwrap();
        let a = stationary_phase_expand::<f64>(&p).unwrap();
        let b = stationary_phase_expand::<f64>(&p.negated_phase()).unwrap();
        assert_eq!(b.orientation, Some(Orientation::Max));
        assert!((a.value.conj() - b.value).norm() <= 1e-12 * a.value.norm());
        assert!((a.main_term.conj() - b.main_term).norm() <= 1e-12 * a.main_term.norm());
    }

    #[test]
    fn double_double_matches_double() {
        let p = PhaseProblem::new("T*(x^2 + x^3/3)", "1/(1+x^2)", -0.5, 0.5, 3).unwrap().with_t(1024.0).finish().unwrap();
        let a = stationary_phase_expand::<f64>(&p).unwrap();
        let b = stationary_phase_expand::<Dd>(&p).unwrap();
        let d = Complex::new(b.value.re.to_f64(), b.value.im.to_f64()) - a.value;
        assert!(d.norm() < 1e-14);
    }
}
