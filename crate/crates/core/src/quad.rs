//! Panelled tanh-sinh quadrature on top of the `quadrature` crate.

use crate::error::{Error, Result};

/// Relative accuracy we insist on before accepting a quadrature result.
pub const REL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Integrate `f` over consecutive panels `[breaks[i], breaks[i+1]]`.
///
/// Each panel is handled by double-exponential quadrature; the accumulated
/// error estimate must fall below `REL_TOL * sum|panel| + abs_floor`.
pub fn integrate_panels<F>(f: F, breaks: &[f64], abs_floor: f64, what: &str) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    let mut value = 0.0;
    let mut magnitude = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let out = quadrature::double_exponential::integrate(&f, w[0], w[1], 1e-15);
        value += out.integral;
        magnitude += out.integral.abs();
        err += out.error_estimate;
        evals += out.num_function_evaluations as usize;
    }
    if !value.is_finite() || err > REL_TOL * magnitude + abs_floor {
        return Err(Error::Numeric {
            what: what.to_string(),
            estimate: value,
            error_estimate: err,
            evaluations: evals,
        });
    }
    Ok(QuadResult {
        value,
        error_estimate: err,
        evaluations: evals,
    })
}

/// Evenly spaced breakpoints.
pub fn linspace(a: f64, b: f64, panels: usize) -> Vec<f64> {
    let panels = panels.max(1);
    (0..=panels)
        .map(|i| {
            if i == panels {
                b
            } else {
                a + (b - a) * i as f64 / panels as f64
            }
        })
        .collect()
}

/// Gauss-Legendre nodes and weights on [-1, 1] via Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}
