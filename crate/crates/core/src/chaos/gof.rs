//! Goodness of fit of sampled marginals `⟨ω, χ_Δ⟩` against the Meixner
//! family laws: gamma, Pascal and the Meixner law proper.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Gamma};

use crate::error::{Error, Result};
use crate::levy_models::{pascal_p, LevyModel};
use crate::quad::gauss_legendre;

/// Significance level of every test here.
pub const LEVEL: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    /// `"ks"` or `"chi2"`.
    pub test: String,
    pub statistic: f64,
    pub critical: f64,
    pub dof: Option<usize>,
    pub n: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub target_mean: f64,
    pub pass: bool,
}

/// `ln Γ(z)` for `Re z > 0`: upward shift then the Stirling series.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    assert!(z.re > 0.0, "ln Γ on Re z ≤ 0");
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.re < 10.0 {
        shift += z.ln();
        z += 1.0;
    }
    // B_2k / (2k(2k-1))
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
        -3617.0 / 122400.0,
    ];
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for c in C {
        series += p * c;
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - shift
}

/// Density of the centered Meixner law with parameter `λ ∈ [0,2)` and
/// time `σ`: mean 0, variance σ, heavier right tail for λ > 0.
pub fn meixner_marginal_density(lambda: f64, sigma: f64, s: f64) -> f64 {
    let t2 = 4.0 - lambda * lambda;
    let theta = t2.sqrt();
    let a = (lambda / theta).atan();
    let z = Complex64::new(sigma / 2.0, (s + lambda * sigma / 2.0) / theta);
    let lg = ln_gamma_complex(z).re;
    let ln_f = 0.5 * (sigma - 1.0) * t2.ln() - (2.0 * PI).ln() - statrs::function::gamma::ln_gamma(sigma)
        + 2.0 * lg
        + (2.0 * s + lambda * sigma) * a / theta;
    ln_f.exp()
}

fn ks_statistic(sorted: &[f64], cdf: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    cdf.iter()
        .enumerate()
        .map(|(i, &f)| (f - i as f64 / n).max((i + 1) as f64 / n - f))
        .fold(0.0, f64::max)
}

fn ks_critical(n: usize) -> f64 {
    (-0.5 * (LEVEL / 2.0).ln()).sqrt() / (n as f64).sqrt()
}

fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// CDF of the Meixner marginal at sorted points, by Gauss–Legendre on a
/// grid merged with the points and normalized by the total integral.
fn meixner_cdf_at(lambda: f64, sigma: f64, sorted: &[f64]) -> Vec<f64> {
    let theta = (4.0 - lambda * lambda).sqrt();
    let a = (lambda / theta).atan();
    let rate_l = (PI + 2.0 * a) / theta;
    let rate_r = (PI - 2.0 * a) / theta;
    let sd = sigma.sqrt();
    let lo = sorted[0].min(-10.0 * sd - (40.0 + sigma) / rate_l);
    let hi = sorted[sorted.len() - 1].max(10.0 * sd + (40.0 + sigma) / rate_r);
    let h = sd.min(1.0) / 40.0;
    let (nodes, weights) = gauss_legendre(8);
    let seg = |x0: f64, x1: f64| -> f64 {
        if x1 <= x0 {
            return 0.0;
        }
        let pieces = ((x1 - x0) / h).ceil().max(1.0) as usize;
        let w = (x1 - x0) / pieces as f64;
        let mut acc = 0.0;
        for p in 0..pieces {
            let c = x0 + (p as f64 + 0.5) * w;
            for (t, wt) in nodes.iter().zip(&weights) {
                acc += wt * meixner_marginal_density(lambda, sigma, c + 0.5 * w * t);
            }
        }
        acc * 0.5 * w
    };
    let mut out = Vec::with_capacity(sorted.len());
    let mut acc = 0.0;
    let mut x = lo;
    for &p in sorted {
        acc += seg(x, p);
        x = p;
        out.push(acc);
    }
    let total = acc + seg(x, hi);
    out.iter_mut().for_each(|v| *v /= total);
    out
}

/// Fit of `samples` of `⟨ω, χ_Δ⟩`, `σ(Δ) = sigma_delta`, at the 0.001 level.
pub fn marginal_gof(model: &LevyModel, sigma_delta: f64, samples: &[f64]) -> Result<GofReport> {
    let lambda = model
        .lambda()
        .ok_or_else(|| Error::Unsupported("marginal laws are known for Meixner models only".into()))?;
    if samples.len() < 2 || !(sigma_delta > 0.0) {
        return Err(Error::Domain("need ≥ 2 samples and σ(Δ) > 0".into()));
    }
    let n = samples.len();
    let (mean, se) = mean_se(samples);
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    if lambda > 2.0 {
        let r = (lambda * lambda - 4.0).sqrt();
        let p = pascal_p(lambda);
        let mut counts: Vec<usize> = Vec::new();
        for &x in &sorted {
            let k = (x / r).round();
            if k < 0.0 || (x - k * r).abs() > 1e-9 * r.max(x.abs()) {
                return Err(Error::Domain(format!("sample {x} is not on the lattice √(λ²−4)·ℕ")));
            }
            let k = k as usize;
            if counts.len() <= k {
                counts.resize(k + 1, 0);
            }
            counts[k] += 1;
        }
        // negative binomial weights, pooled once the expected count drops below 5
        let mut expected = Vec::new();
        let mut w = (1.0 - p).powf(sigma_delta);
        let mut used = 0.0;
        let mut k = 0usize;
        while n as f64 * w >= 5.0 && n as f64 * (1.0 - used - w) >= 5.0 {
            expected.push(n as f64 * w);
            used += w;
            w *= (sigma_delta + k as f64) * p / (k + 1) as f64;
            k += 1;
        }
        expected.push(n as f64 * (1.0 - used));
        let bins = expected.len();
        let observed: Vec<f64> = (0..bins)
            .map(|b| {
                if b + 1 < bins {
                    counts.get(b).copied().unwrap_or(0) as f64
                } else {
                    counts.iter().skip(b).sum::<usize>() as f64
                }
            })
            .collect();
        let stat: f64 = observed.iter().zip(&expected).map(|(o, e)| (o - e).powi(2) / e).sum();
        let dof = bins - 1;
        let critical = ChiSquared::new(dof as f64)
            .map_err(|e| Error::Domain(format!("chi-square with {dof} dof: {e}")))?
            .inverse_cdf(1.0 - LEVEL);
        return Ok(GofReport {
            test: "chi2".into(),
            statistic: stat,
            critical,
            dof: Some(dof),
            n,
            mean,
            mean_se: se,
            target_mean: sigma_delta * r * p / (1.0 - p),
            pass: stat <= critical,
        });
    }
    let (cdf, target_mean) = if lambda == 2.0 {
        let g = Gamma::new(sigma_delta, 1.0).map_err(|e| Error::Domain(format!("Gamma({sigma_delta}): {e}")))?;
        (sorted.iter().map(|&x| g.cdf(x)).collect(), sigma_delta)
    } else {
        (meixner_cdf_at(lambda, sigma_delta, &sorted), 0.0)
    };
    let stat = ks_statistic(&sorted, &cdf);
    let critical = ks_critical(n);
    Ok(GofReport {
        test: "ks".into(),
        statistic: stat,
        critical,
        dof: None,
        n,
        mean,
        mean_se: se,
        target_mean,
        pass: stat <= critical,
    })
}
