//! Least-squares estimate of `ϖ_k` from samples of `g(x) dx/dy`.
//!
//! Nothing here uses formal series: `x(y)` is found pointwise by root
//! finding, `G(y) = g(x) 2λ₂y / f'(x)` is sampled at Chebyshev nodes, and a
//! polynomial is fitted.

use crate::coeffs::{solve_substitution, Orientation};
use crate::error::{Error, Result};
use crate::expansion::orientation_audit;
use crate::problem::PhaseProblem;
use crate::real::Real;

/// Householder QR least squares for a tall system `A c ≈ b`. Returns the
/// solution and the ratio of the largest to the smallest diagonal entry of
/// `R`, a cheap condition estimate.
pub fn least_squares<R: Real>(mut a: Vec<Vec<R>>, mut b: Vec<R>) -> (Vec<R>, f64) {
    let rows = a.len();
    let cols = a[0].len();
    for k in 0..cols {
        let norm = (k..rows).fold(R::zero(), |acc, i| acc + a[i][k] * a[i][k]).sqrt();
        if norm == R::zero() {
            continue;
        }
        let alpha = if a[k][k] > R::zero() { -norm } else { norm };
        let mut v: Vec<R> = (k..rows).map(|i| a[i][k]).collect();
        v[0] = v[0] - alpha;
        let vnorm2 = v.iter().fold(R::zero(), |acc, &x| acc + x * x);
        if vnorm2 == R::zero() {
            continue;
        }
        let two = R::from_f64(2.0);
        for j in k..cols {
            let dot = (k..rows).fold(R::zero(), |acc, i| acc + v[i - k] * a[i][j]);
            let s = two * dot / vnorm2;
            for i in k..rows {
                a[i][j] = a[i][j] - s * v[i - k];
            }
        }
        let dot = (k..rows).fold(R::zero(), |acc, i| acc + v[i - k] * b[i]);
        let s = two * dot / vnorm2;
        for i in k..rows {
            b[i] = b[i] - s * v[i - k];
        }
    }
    let mut c = vec![R::zero(); cols];
    for k in (0..cols).rev() {
        let mut acc = b[k];
        for j in k + 1..cols {
            acc = acc - a[k][j] * c[j];
        }
        c[k] = acc / a[k][k];
    }
    let diag: Vec<f64> = (0..cols).map(|k| a[k][k].abs().to_f64()).collect();
    let big = diag.iter().copied().fold(0.0, f64::max);
    let small = diag.iter().copied().fold(f64::INFINITY, f64::min);
    (c, big / small)
}

/// Fitted `ϖ̂_0..ϖ̂_order` for the stationary point `gamma`.
///
/// Samples lie at Chebyshev nodes on `[-r/8, r/8]`, with `r` the audit's
/// substitution radius, and the fitted polynomial has degree `order + 2`.
pub fn numeric_reversion_oracle<R: Real>(p: &PhaseProblem, gamma: R, order: usize) -> Result<Vec<R>> {
    let (f, g) = p.compile::<R>()?;
    let fj = f.jet_at(gamma, 2)?;
    let f0 = fj.constant_term().re;
    let l2 = fj.coeff(2).re;
    let orientation = if l2 > R::zero() { Orientation::Min } else { Orientation::Max };
    let r = orientation_audit(p, orientation)?.r;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::SubstitutionFailed { y: r, reason: "audit radius r is not positive".into() });
    }
    let h = R::from_f64(r / 8.0);
    let degree = order + 2;
    let samples = 4 * (degree + 1);
    let two_l2 = l2 + l2;
    let mut rows = Vec::with_capacity(samples);
    let mut rhs = Vec::with_capacity(samples);
    for i in 0..samples {
        let theta = R::pi() * R::from_f64((2 * i + 1) as f64) / R::from_f64((2 * samples) as f64);
        let s = theta.cos();
        let y = h * s;
        let x = solve_substitution(p, &f, gamma, f0, l2, gamma + y, y)?;
        let fp = f.jet_at(x, 1)?.derivative(1)?.re;
        rhs.push(g.eval(x)? * two_l2 * y / fp);
        let mut row = Vec::with_capacity(degree + 1);
        let mut pow = R::one();
        for _ in 0..=degree {
            row.push(pow);
            pow = pow * s;
        }
        rows.push(row);
    }
    let (coef, cond) = least_squares(rows, rhs);
    if !(cond < 1e8) {
        return Err(Error::IllConditioned { cond });
    }
    let mut scale = R::one();
    let mut out = Vec::with_capacity(order + 1);
    for c in coef.into_iter().take(order + 1) {
        out.push(c / scale);
        scale = scale * h;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;

    #[test]
    fn least_squares_recovers_a_line() {
        let a = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]];
        let (c, cond) = least_squares(a, vec![1.0, 3.0, 5.0]);
        assert!((c[0] - 1.0).abs() < 1e-14 && (c[1] - 2.0).abs() < 1e-14);
        assert!(cond >= 1.0);
    }

    #[test]
    fn pure_quadratic_gives_unit_amplitude() {
        let p = PhaseProblem::new("x^2", "1", -1.0, 1.0, 2).unwrap().finish().unwrap();
        let w = numeric_reversion_oracle::<f64>(&p, 0.0, 2).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-10);
        assert!(w[1..].iter().all(|c| c.abs() < 1e-10), "{w:?}");
    }

    #[test]
    fn cubic_phase_and_linearity() {
        let p = PhaseProblem::new("x^2 + x^3", "1", -0.25, 0.25, 1).unwrap().finish().unwrap();
        let w = numeric_reversion_oracle::<f64>(&p, 0.0, 2).unwrap();
        assert!((w[2] - 15.0 / 8.0).abs() < 1e-6, "{w:?}");
        let p7 = PhaseProblem::new("x^2 + x^3", "7", -0.25, 0.25, 1).unwrap().finish().unwrap();
        let w7 = numeric_reversion_oracle::<f64>(&p7, 0.0, 2).unwrap();
        for (a, b) in w.iter().zip(&w7) {
            assert!((7.0 * a - b).abs() < 1e-7 * b.abs().max(1.0), "{w:?} {w7:?}");
        }
        let wd = numeric_reversion_oracle::<Dd>(&p, Dd::ZERO, 2).unwrap();
        assert!((wd[2] - Dd::from(15.0) / Dd::from(8.0)).abs().to_f64() < 1e-12);
    }
}
