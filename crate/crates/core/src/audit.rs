//! Hypothesis audit: fitted derivative constants, `Δ`, the validity
//! condition and the substitution radii.

use crate::coeffs::{find_stationary_point, scan_signs, SignProfile};
use crate::error::Result;
use crate::expr::{Expr, Func, Node};
use crate::problem::PhaseProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub order: usize,
    /// `(r, C_r)` for `r = 2..=2n+3`.
    pub c_f: Vec<(usize, f64)>,
    /// `(s, C_s)` for `s = 0..=2n+1`.
    pub c_g: Vec<(usize, f64)>,
    /// Whether `f'' ≥ T/(C₂M²)` holds with a finite `C₂`, i.e. `f'' > 0` on
    /// the whole grid.
    pub c2_lower_ok: bool,
    pub delta: f64,
    /// `T^{1/(2n+3)} Δ`.
    pub validity_margin: f64,
    pub validity_ok: bool,
    pub gamma: Option<f64>,
    pub r1: f64,
    pub r2: f64,
    pub r: f64,
    pub m_ok: bool,
    pub sign_profile: SignProfile,
    /// `abs(...)` arguments that change sign inside the interval.
    pub kinks: Vec<String>,
    /// Largest `|g|` seen on the grid.
    pub g_max: f64,
}

impl AuditReport {
    pub fn c(&self, r: usize) -> f64 {
        self.c_f.iter().find(|(k, _)| *k == r).map(|(_, c)| *c).unwrap_or(f64::NAN)
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.order < 2 {
            out.push("n = 1 lies outside the theorem's n >= 2; error constants are not claimed".to_string());
        }
        if !self.c2_lower_ok {
            out.push("L-f'' violated: f'' is not positive on the whole interval".to_string());
        }
        if !self.validity_ok {
            out.push(format!("validity condition fails: T^(1/(2n+3)) * Delta = {:.6e} <= 1", self.validity_margin));
        }
        if !self.m_ok {
            out.push("M is smaller than beta - alpha".to_string());
        }
        for k in &self.kinks {
            out.push(format!("abs({k}) has a kink inside the interval"));
        }
        out
    }
}

fn abs_arguments<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match &e.node {
        Node::Number(_) | Node::Symbol(_) => {}
        Node::Call(Func::Abs, arg) => {
            out.push(arg);
            abs_arguments(arg, out);
        }
        Node::Neg(a) | Node::Call(_, a) => abs_arguments(a, out),
        Node::Binary(_, a, b) => {
            abs_arguments(a, out);
            abs_arguments(b, out);
        }
    }
}

fn kinks(p: &PhaseProblem) -> Result<Vec<String>> {
    let mut args = Vec::new();
    abs_arguments(&p.f, &mut args);
    abs_arguments(&p.g, &mut args);
    let bound = p.bindings();
    let mut out = Vec::new();
    for arg in args {
        let c = arg.compile::<f64>(&bound)?;
        let mut signs = Vec::new();
        for x in p.grid_points() {
            if let Ok(v) = c.eval(x) {
                signs.push(v);
            }
        }
        let touches = signs.contains(&0.0);
        let changes = signs.windows(2).any(|w| w[0] * w[1] < 0.0);
        if touches || changes {
            out.push(arg.to_string());
        }
    }
    Ok(out)
}

pub fn hypothesis_audit(p: &PhaseProblem) -> Result<AuditReport> {
    let n = p.order;
    let s = p.scales;
    let (f, g) = p.compile::<f64>()?;
    let rmax = 2 * n + 3;
    let smax = 2 * n + 1;
    let mut c_f = vec![0.0f64; rmax + 1];
    let mut c_g = vec![0.0f64; smax + 1];
    let mut lower = 0.0f64;
    let mut c2_lower_ok = true;
    let mut g_max = 0.0f64;
    for x in p.grid_points() {
        let fj = f.jet_at(x, rmax)?;
        for (r, c) in c_f.iter_mut().enumerate().skip(2) {
            let d = fj.derivative(r)?.re;
            *c = c.max(d.abs() * s.m.powi(r as i32) / s.t);
        }
        let f2 = fj.derivative(2)?.re;
        if f2 > 0.0 {
            lower = lower.max(s.t / (s.m * s.m * f2));
        } else {
            c2_lower_ok = false;
        }
        let gj = g.jet_at(x, smax.max(1))?;
        for (k, c) in c_g.iter_mut().enumerate() {
            let d = gj.derivative(k)?.re;
            *c = c.max(d.abs() * s.n.powi(k as i32) / s.u);
        }
        g_max = g_max.max(gj.constant_term().re.abs());
    }
    let c2 = if c2_lower_ok { c_f[2].max(lower) } else { c_f[2] };
    c_f[2] = c2;
    let cmax = c_f[2..].iter().copied().fold(0.0, f64::max);
    let delta = (std::f64::consts::LN_2 / c2).min(1.0 / (c2 * c2 * cmax));
    let validity_margin = s.t.powf(1.0 / rmax as f64) * delta;

    let sign_profile = scan_signs(p, &f, 1)?;
    let gamma = find_stationary_point::<f64>(p).ok();
    let (r1, r2) = match gamma {
        Some(gm) => {
            let fj = f.jet_at(gm, 2)?;
            let (f0, l2) = (fj.constant_term().re, fj.coeff(2).re);
            let radius = |end: f64| -> Result<f64> { Ok(((f.eval(end)? - f0) / l2).sqrt()) };
            (radius(p.alpha)?, radius(p.beta)?)
        }
        None => (f64::NAN, f64::NAN),
    };
    let r = r1.min(r2).min(delta * s.m);

    Ok(AuditReport {
        order: n,
        c_f: (2..=rmax).map(|r| (r, c_f[r])).collect(),
        c_g: (0..=smax).map(|k| (k, c_g[k])).collect(),
        c2_lower_ok,
        delta,
        validity_margin,
        validity_ok: validity_margin > 1.0,
        gamma,
        r1,
        r2,
        r,
        m_ok: s.m >= p.beta - p.alpha,
        sign_profile,
        kinks: kinks(p)?,
        g_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Scales;

    fn quadratic(t: f64, n: usize) -> PhaseProblem {
        PhaseProblem::new("T*x^2", "1", -1.0, 1.0, n)
            .unwrap()
            .with_scales(Scales { m: 2.0, n: 1.0, t, u: 1.0 })
            .finish()
            .unwrap()
    }

    #[test]
    fn quadratic_phase_constants() {
        let a = hypothesis_audit(&quadratic(3.0, 2)).unwrap();
        assert!((a.c(2) - 8.0).abs() < 1e-12);
        assert_eq!(a.c(3), 0.0);
        assert!((a.delta - 1.0 / 512.0).abs() < 1e-15);
        assert!((a.r1 - 1.0).abs() < 1e-12 && (a.r2 - 1.0).abs() < 1e-12);
        assert!((a.r - 2.0 / 512.0).abs() < 1e-15);
        assert!(a.c2_lower_ok && a.m_ok);
        assert_eq!(a.c_g[0], (0, 1.0));
        assert_eq!(a.c_f.len(), 6);
        assert_eq!(a.c_g.len(), 6);
    }

    #[test]
    fn validity_condition() {
        assert!(!hypothesis_audit(&quadratic(1.0, 2)).unwrap().validity_ok);
        let a = hypothesis_audit(&quadratic(2f64.powi(20), 2)).unwrap();
        assert!((a.validity_margin - 2f64.powf(20.0 / 7.0) / 512.0).abs() < 1e-12);
        assert!(!a.validity_ok);
    }

    #[test]
    fn concave_phase_and_kinks() {
        let p = PhaseProblem::new("-x^2", "abs(x - 0.25)", -1.0, 1.0, 2).unwrap().finish().unwrap();
        let a = hypothesis_audit(&p).unwrap();
        assert!(!a.c2_lower_ok);
        assert_eq!(a.kinks, vec!["(x - 0.25)".to_string()]);
        let w = a.warnings();
        assert!(w.iter().any(|s| s.contains("L-f'' violated")));
    }
}
