//! Problem instances: `∫_α^β g(x) e(f(x)) dx` together with the scale
//! parameters `M`, `N`, `T`, `U` and the expansion order `n`.

use crate::error::{Error, Result};
use crate::expr::{parse, Compiled, Expr, Params};
use crate::real::Real;

/// Number of uniform samples used for sign scans and the hypothesis audit.
pub const DEFAULT_GRID: usize = 512;

/// Scale parameters bounding the derivatives of `f` and `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub m: f64,
    pub n: f64,
    pub t: f64,
    pub u: f64,
}

pub const SCALE_NAMES: [&str; 4] = ["M", "N", "T", "U"];

#[derive(Debug, Clone)]
pub struct PhaseProblem {
    pub f: Expr,
    pub g: Expr,
    pub alpha: f64,
    pub beta: f64,
    /// User parameters; the scale names are bound separately.
    pub params: Params,
    pub scales: Scales,
    pub order: usize,
    pub grid: usize,
}

impl PhaseProblem {
    /// Builds a problem with `M = β - α`, `N = U = 1`, and `T` inferred from
    /// `max |f''| M²` on the grid (`T` must be supplied explicitly when `f`
    /// refers to it).
    pub fn new(f: &str, g: &str, alpha: f64, beta: f64, order: usize) -> Result<Self> {
        let f = parse(f)?;
        let g = parse(g)?;
        let scales = Scales { m: beta - alpha, n: 1.0, t: f64::NAN, u: 1.0 };
        let p = PhaseProblem { f, g, alpha, beta, params: Params::new(), scales, order, grid: DEFAULT_GRID };
        p.check_shape()?;
        Ok(p)
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.scales.t = t;
        self
    }

    pub fn with_scales(mut self, scales: Scales) -> Self {
        self.scales = scales;
        self
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_interval(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    /// Fills in an inferred `T` if none was given and validates the instance.
    pub fn finish(mut self) -> Result<Self> {
        self.check_shape()?;
        if self.scales.t.is_nan() {
            if self.f.mentions("T") {
                return Err(Error::InvalidProblem("T is required because f refers to it".into()));
            }
            self.scales.t = self.infer_t()?;
        }
        self.validate()?;
        Ok(self)
    }

    fn check_shape(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.beta.is_finite() && self.alpha < self.beta) {
            return Err(Error::InvalidProblem(format!("need alpha < beta, got [{}, {}]", self.alpha, self.beta)));
        }
        if self.order < 1 {
            return Err(Error::InvalidProblem("order n must be at least 1".into()));
        }
        if self.grid < 8 {
            return Err(Error::InvalidProblem("grid must have at least 8 points".into()));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        let s = self.scales;
        for (name, v) in SCALE_NAMES.iter().zip([s.m, s.n, s.t, s.u]) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidProblem(format!("{name} must be a positive number, got {v}")));
            }
        }
        for name in SCALE_NAMES {
            if self.params.contains_key(name) {
                return Err(Error::InvalidProblem(format!("{name} is a scale parameter, not a free parameter")));
            }
        }
        let bound = self.bindings();
        for e in [&self.f, &self.g] {
            if let Some(name) = e.parameters().into_iter().find(|n| !bound.contains_key(n)) {
                return Err(Error::InvalidProblem(format!("unbound parameter '{name}'")));
            }
        }
        Ok(())
    }

    /// `max |f''| M²` over the grid, or `max |f'| M` when `f''` vanishes
    /// identically (linear phases).
    fn infer_t(&self) -> Result<f64> {
        let mut bound = self.bindings();
        bound.remove("T");
        let f = self.f.compile::<f64>(&bound)?;
        let (mut d1max, mut d2max) = (0.0f64, 0.0f64);
        for x in self.grid_points() {
            let j = f.jet_at(x, 2)?;
            d1max = d1max.max(j.derivative(1)?.re.abs());
            d2max = d2max.max(j.derivative(2)?.re.abs());
        }
        let m = self.scales.m;
        let t = if d2max > 0.0 { d2max * m * m } else { d1max * m };
        if t > 0.0 {
            Ok(t)
        } else {
            Err(Error::InvalidProblem("cannot infer T: f is constant on the grid".into()))
        }
    }

    /// Parameter bindings including `M`, `N`, `T`, `U`.
    pub fn bindings(&self) -> Params {
        let mut out = self.params.clone();
        let s = self.scales;
        for (name, v) in SCALE_NAMES.iter().zip([s.m, s.n, s.t, s.u]) {
            if !v.is_nan() {
                out.insert(name.to_string(), v);
            }
        }
        out
    }

    pub fn compile<R: Real>(&self) -> Result<(Compiled<R>, Compiled<R>)> {
        let b = self.bindings();
        Ok((self.f.compile(&b)?, self.g.compile(&b)?))
    }

    /// `grid` uniformly spaced points including both endpoints.
    pub fn grid_points(&self) -> impl Iterator<Item = f64> + '_ {
        let k = self.grid - 1;
        (0..=k).map(move |i| {
            if i == k {
                self.beta
            } else {
                self.alpha + (self.beta - self.alpha) * (i as f64) / (k as f64)
            }
        })
    }

    /// The problem with `f` replaced by `-f`.
    pub fn negated_phase(&self) -> Self {
        let mut p = self.clone();
        let offset = p.f.offset;
        p.f = Expr { node: crate::expr::Node::Neg(Box::new(p.f)), offset };
        p
    }

    pub fn n_flagged(&self) -> bool {
        self.order < 2
    }
}
