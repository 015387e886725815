//! Direct Gauss–Legendre quadrature of `∫ g(x) e(f(x)) dx`.
//!
//! The interval is cut into the problem grid's cells, with extra breaks at
//! sign changes of `f'`. Each cell gets enough equal panels that the phase
//! moves by at most half a turn per panel; all panels are then doubled until
//! two successive totals agree to `tol`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::expr::Compiled;
use crate::problem::PhaseProblem;
use crate::real::{e_turns, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Absolute tolerance on the change between refinement levels.
    pub tol: f64,
    pub max_panels: usize,
    pub nodes_per_panel: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings { tol: 1e-12, max_panels: 1 << 22, nodes_per_panel: 16 }
    }
}

impl QuadratureSettings {
    /// Defaults with `tol`, and 20 nodes per panel for carriers finer than
    /// `f64`: sixteen-point rules on half-turn panels stall near `1e-29`.
    pub fn tuned<R: Real>(tol: f64) -> Self {
        let nodes_per_panel = if R::EPSILON < 1e-20 { 20 } else { 16 };
        QuadratureSettings { tol, nodes_per_panel, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature<R: Real = f64> {
    pub value: Complex<R>,
    pub panels: usize,
    /// Change between the last two refinement levels.
    pub delta: f64,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton's method on the
/// three-term recurrence.
pub fn gauss_legendre<R: Real>(n: usize) -> (Vec<R>, Vec<R>) {
    let mut nodes = vec![R::zero(); n];
    let mut weights = vec![R::zero(); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = R::from_f64((std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos());
        let mut dp = R::one();
        for iter in 0..100 {
            let (mut p0, mut p1) = (R::one(), z);
            for k in 2..=n {
                let kf = R::from_f64(k as f64);
                let p2 = (R::from_f64(2.0 * k as f64 - 1.0) * z * p1 - R::from_f64(k as f64 - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = R::from_f64(nf) * (z * p1 - p0) / (z * z - R::one());
            let step = p1 / dp;
            z = z - step;
            if step.abs().to_f64() <= 4.0 * R::EPSILON && iter > 0 {
                break;
            }
        }
        let w = R::from_f64(2.0) / ((R::one() - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = R::zero();
    }
    (nodes, weights)
}

/// Order-independent summation: recursive halving.
pub(crate) fn pairwise_sum<R: Real>(v: &[Complex<R>]) -> Complex<R> {
    match v.len() {
        0 => Complex::new(R::zero(), R::zero()),
        1 => v[0],
        len => {
            let (a, b) = v.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn slope(f: &Compiled<f64>, x: f64) -> Result<f64> {
    Ok(f.jet_at(x, 1)?.derivative(1)?.re)
}

/// Cells `[a, b]` with the number of panels each needs at the base level.
fn base_cells(p: &PhaseProblem, f: &Compiled<f64>) -> Result<Vec<(f64, f64, usize)>> {
    let pts: Vec<f64> = p.grid_points().collect();
    let mut breaks = vec![pts[0]];
    for w in pts.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (sa, sb) = (slope(f, a)?, slope(f, b)?);
        if sa * sb < 0.0 {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if slope(f, m)? * sa > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let root = 0.5 * (a + b);
            if root > w[0] && root < w[1] {
                breaks.push(root);
            }
        }
        breaks.push(w[1]);
    }
    let mut cells = Vec::with_capacity(breaks.len());
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let speed = slope(f, a)?.abs().max(slope(f, b)?.abs());
        let variation = ((b - a) * speed).max((f.eval(b)? - f.eval(a)?).abs());
        let k = (variation / 0.5).ceil().max(1.0);
        if !k.is_finite() {
            return Err(Error::NotConverged { reason: "phase is not finite".into(), delta: f64::NAN, panels: 0 });
        }
        cells.push((a, b, k as usize));
    }
    Ok(cells)
}

fn level_sum<R: Real>(
    f: &Compiled<R>,
    g: &Compiled<R>,
    cells: &[(f64, f64, usize)],
    scale: usize,
    rule: &(Vec<R>, Vec<R>),
) -> Result<(Complex<R>, f64)> {
    let (nodes, weights) = rule;
    let two = R::from_f64(2.0);
    let mut contribs = Vec::new();
    let mut magnitude = 0.0f64;
    for &(a, b, k) in cells {
        let (a, b) = (R::from_f64(a), R::from_f64(b));
        let panels = k * scale;
        let width = (b - a) / R::from_f64(panels as f64);
        for i in 0..panels {
            let lo = a + width * R::from_f64(i as f64);
            let half = width / two;
            let mid = lo + half;
            let mut acc = Complex::new(R::zero(), R::zero());
            for (z, w) in nodes.iter().zip(weights) {
                let x = mid + half * *z;
                let term = e_turns(f.eval(x)?) * (g.eval(x)? * *w);
                acc = acc + term;
            }
            let c = acc * half;
            magnitude += c.re.abs().to_f64() + c.im.abs().to_f64();
            contribs.push(c);
        }
    }
    Ok((pairwise_sum(&contribs), magnitude))
}

pub fn oscillatory_quadrature<R: Real>(p: &PhaseProblem, s: &QuadratureSettings) -> Result<Quadrature<R>> {
    if !(s.tol > 0.0) || s.nodes_per_panel < 8 {
        return Err(Error::InvalidProblem("quadrature needs tol > 0 and at least 8 nodes per panel".into()));
    }
    let (f64f, _) = p.compile::<f64>()?;
    let (f, g) = p.compile::<R>()?;
    let cells = base_cells(p, &f64f)?;
    let base: usize = cells.iter().map(|c| c.2).sum();
    let rule = gauss_legendre::<R>(s.nodes_per_panel);
    let (mut prev, _) = level_sum(&f, &g, &cells, 1, &rule)?;
    let mut scale = 1usize;
    loop {
        scale *= 2;
        let panels = base * scale;
        if panels > s.max_panels {
            return Err(Error::NotConverged {
                reason: format!("more than {} panels needed", s.max_panels),
                delta: f64::NAN,
                panels: base * scale / 2,
            });
        }
        let (value, magnitude) = level_sum(&f, &g, &cells, scale, &rule)?;
        let d = value - prev;
        let delta = (d.re.to_f64().powi(2) + d.im.to_f64().powi(2)).sqrt();
        if delta < s.tol {
            return Ok(Quadrature { value, panels, delta });
        }
        if delta <= 16.0 * R::EPSILON * magnitude {
            return Err(Error::NotConverged {
                reason: "tolerance is below the rounding floor of the carrier".into(),
                delta,
                panels,
            });
        }
        prev = value;
    }
}
