//! Central finite differences, used to check jet derivatives.

use crate::error::Result;
use crate::expr::{Expr, Params};

/// Weights for the `k`-th derivative at `x0` from samples at `points`
/// (Fornberg's recurrence). Returns `w[m][j]` for `m = 0..=k`.
fn fornberg(x0: f64, points: &[f64], k: usize) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut c = vec![vec![0.0; n]; k + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = points[0] - x0;
    for i in 1..n {
        let mn = i.min(k);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = points[i] - x0;
        for j in 0..i {
            let c3 = points[i] - points[j];
            c2 *= c3;
            if j == i - 1 {
                for m in (1..=mn).rev() {
                    c[m][i] = c1 * (m as f64 * c[m - 1][i - 1] - c5 * c[m][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for m in (1..=mn).rev() {
                c[m][j] = (c4 * c[m][j] - m as f64 * c[m - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Estimates of `h^(k)(x0)` for `k = 1..=order` by fourth-order central
/// stencils. With `step = None` each order uses `h = ε^{1/(k+4)} max(1, |x0|)`,
/// which balances the `O(h⁴)` truncation against `ε/h^k` rounding.
pub fn fd_derivatives(e: &Expr, params: &Params, x0: f64, order: usize, step: Option<f64>) -> Result<Vec<f64>> {
    let c = e.compile::<f64>(params)?;
    let mut out = Vec::with_capacity(order);
    for k in 1..=order {
        let half = k.div_ceil(2) + 1;
        let h = step.unwrap_or_else(|| f64::EPSILON.powf(1.0 / (k as f64 + 4.0)) * x0.abs().max(1.0));
        let offsets: Vec<f64> = (-(half as i64)..=half as i64).map(|i| i as f64 * h).collect();
        let w = fornberg(0.0, &offsets, k);
        let mut acc = 0.0;
        for (o, wk) in offsets.iter().zip(&w[k]) {
            acc += wk * c.eval(x0 + o)?;
        }
        out.push(acc);
    }
    Ok(out)
}
