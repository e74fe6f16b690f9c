//! Generating function `Σ (1/n!)⟨:ω^⊗n:, φ^⊗n⟩` of the Meixner Wick powers:
//! closed forms and partial sums.
//!
//! Partial sums avoid building Wick tensors. Paired against `φ^⊗n`, a block
//! of multiplicity m at a point where φ takes the value y contributes `y^m`,
//! so `V_n = ⟨:ω^⊗n:, φ^⊗n⟩/n!` is a polynomial in the distinct values of φ.
//! Appending ω is multiplication by a linear form and raising a block by k
//! is the derivation `Σ_g y_g^{k+1} ∂/∂y_g`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::chaos::Centering;
use crate::error::{Error, Result};
use crate::lattice::{Domain, StepKernel};
use crate::simulate::Realization;

const MAX_MONOMIALS: usize = 1 << 21;

/// Roots of `1 + λz + z² = (1 − r1·z)(1 − r2·z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair {
    pub r1: Complex64,
    pub r2: Complex64,
}

impl RootPair {
    pub fn new(lambda: f64) -> RootPair {
        let d = lambda * lambda - 4.0;
        if d >= 0.0 {
            let q = d.sqrt();
            RootPair {
                r1: Complex64::new((-lambda + q) / 2.0, 0.0),
                r2: Complex64::new((-lambda - q) / 2.0, 0.0),
            }
        } else {
            let q = (-d).sqrt();
            RootPair {
                r1: Complex64::new(-lambda / 2.0, q / 2.0),
                r2: Complex64::new(-lambda / 2.0, -q / 2.0),
            }
        }
    }

    /// Bound on `‖φ‖_∞` below which the series converges.
    pub fn radius(&self) -> f64 {
        1.0 / self.r1.norm().max(self.r2.norm())
    }
}

fn check_phi(lambda: f64, phi: &StepKernel, domain: &Domain) -> Result<()> {
    if phi.order != 1 || phi.cells != domain.cells() {
        return Err(Error::Mismatch("φ must be an order-1 kernel on the domain".into()));
    }
    let radius = RootPair::new(lambda).radius();
    let sup = phi.max_abs();
    if !(sup < radius) {
        return Err(Error::Range(format!("‖φ‖∞ = {sup} not below {radius} for λ = {lambda}")));
    }
    Ok(())
}

/// The closed form as a complex number; its imaginary part vanishes up
/// to rounding.
pub fn genfun_closed_complex(
    centering: &Centering,
    phi: &StepKernel,
    real: &Realization,
    domain: &Domain,
) -> Result<Complex64> {
    let lambda = centering.lambda;
    check_phi(lambda, phi, domain)?;
    let sigma = |g: &dyn Fn(f64) -> Complex64| -> Complex64 {
        domain.sigma_mass.iter().zip(&phi.values).map(|(&m, &v)| g(v) * m).sum()
    };
    let atoms = |g: &dyn Fn(f64) -> Complex64| -> Complex64 {
        real.atoms.iter().map(|a| g(phi.values[a.cell]) * a.s).sum()
    };
    let one = Complex64::new(1.0, 0.0);
    let exponent = if lambda == 2.0 {
        let log1p = |v: f64| Complex64::new(v.ln_1p(), 0.0);
        let frac = |v: f64| Complex64::new(v / (1.0 + v), 0.0);
        -sigma(&log1p) + atoms(&frac) + sigma(&frac) * centering.drift
    } else {
        let RootPair { r1, r2 } = RootPair::new(lambda);
        let k = one / (r1 - r2);
        let inner = |v: f64| (one - r2 * v).ln() / r2 - (one - r1 * v).ln() / r1;
        let ratio = |v: f64| (one - r2 * v).ln() - (one - r1 * v).ln();
        -k * sigma(&inner) + k * (atoms(&ratio) + sigma(&ratio) * centering.sigma_coef())
    };
    Ok(exponent.exp())
}

pub fn genfun_closed(centering: &Centering, phi: &StepKernel, real: &Realization, domain: &Domain) -> Result<f64> {
    Ok(genfun_closed_complex(centering, phi, real, domain)?.re)
}

type Poly = BTreeMap<Vec<u16>, f64>;

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn mul_linear(p: &Poly, w: &[f64], pow: u16) -> Poly {
    let mut out = Poly::new();
    for (e, &c) in p {
        for (g, &wg) in w.iter().enumerate() {
            if wg == 0.0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[g] += pow;
            *out.entry(e2).or_insert(0.0) += c * wg;
        }
    }
    out
}

/// `Σ_g y_g^{k+1} ∂/∂y_g`
fn raise(p: &Poly, k: u16) -> Poly {
    let mut out = Poly::new();
    for (e, &c) in p {
        for g in 0..e.len() {
            if e[g] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[g] += k;
            *out.entry(e2).or_insert(0.0) += c * e[g] as f64;
        }
    }
    out
}

fn axpy(acc: &mut Poly, a: f64, p: &Poly) {
    for (e, &c) in p {
        *acc.entry(e.clone()).or_insert(0.0) += a * c;
    }
}

fn eval(p: &Poly, y: &[f64]) -> f64 {
    p.iter()
        .map(|(e, &c)| c * e.iter().zip(y).map(|(&k, &v)| v.powi(k as i32)).product::<f64>())
        .sum()
}

/// Partial sums `S_0, …, S_N` of the generating series.
pub fn genfun_partial_sums(
    centering: &Centering,
    phi: &StepKernel,
    real: &Realization,
    domain: &Domain,
    n_max: usize,
) -> Result<Vec<f64>> {
    check_phi(centering.lambda, phi, domain)?;
    // group cells by the value of φ
    let mut values: Vec<f64> = Vec::new();
    let mut group = Vec::with_capacity(phi.cells);
    for &v in &phi.values {
        let g = match values.iter().position(|&u| u.to_bits() == v.to_bits()) {
            Some(g) => g,
            None => {
                values.push(v);
                values.len() - 1
            }
        };
        group.push(g);
    }
    let ng = values.len();
    if binom(n_max + ng, ng) > MAX_MONOMIALS as f64 {
        return Err(Error::Resource(format!(
            "{ng} distinct values of φ to order {n_max} exceed {MAX_MONOMIALS} monomials"
        )));
    }
    let mut mass = vec![0.0; ng];
    for (c, &m) in domain.sigma_mass.iter().enumerate() {
        mass[group[c]] += m;
    }
    let mut linear: Vec<f64> = mass.iter().map(|m| m * centering.sigma_coef()).collect();
    for a in &real.atoms {
        linear[group[a.cell]] += a.s;
    }

    let mut prev = Poly::new();
    let mut cur = Poly::from([(vec![0u16; ng], 1.0)]);
    let mut sums = vec![1.0];
    let mut s = 1.0;
    for n in 0..n_max {
        let mut next = mul_linear(&cur, &linear, 1);
        if centering.lambda != 0.0 {
            axpy(&mut next, -centering.lambda, &raise(&cur, 1));
        }
        axpy(&mut next, -1.0, &mul_linear(&prev, &mass, 2));
        axpy(&mut next, -1.0, &raise(&prev, 2));
        let inv = 1.0 / (n + 1) as f64;
        next.values_mut().for_each(|c| *c *= inv);
        s += eval(&next, &values);
        sums.push(s);
        prev = cur;
        cur = next;
    }
    Ok(sums)
}

pub fn genfun_partial_sum(
    centering: &Centering,
    phi: &StepKernel,
    real: &Realization,
    domain: &Domain,
    n_max: usize,
) -> Result<f64> {
    Ok(*genfun_partial_sums(centering, phi, real, domain, n_max)?.last().expect("S_0 present"))
}

/// CSV with header `N,partial_sum,closed,rel_err`.
pub fn genfun_sweep_csv(
    centering: &Centering,
    phi: &StepKernel,
    real: &Realization,
    domain: &Domain,
    n_max: usize,
) -> Result<String> {
    let closed = genfun_closed(centering, phi, real, domain)?;
    let sums = genfun_partial_sums(centering, phi, real, domain, n_max)?;
    let mut out = String::from("N,partial_sum,closed,rel_err\n");
    for (n, s) in sums.iter().enumerate() {
        let _ = writeln!(out, "{n},{s:e},{closed:e},{:e}", (s - closed).abs() / closed.abs());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots() {
        for lambda in [0.0, 1.0, 2.0, 3.0] {
            let r = RootPair::new(lambda);
            assert!((r.r1 * r.r2 - 1.0).norm() < 1e-15);
            assert!((r.r1 + r.r2 + lambda).norm() < 1e-15);
        }
        assert!((RootPair::new(0.0).r1 - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn gamma_example() {
        let d = Domain::uniform(1.0, vec![1.0]).unwrap();
        let r = Realization::from_pairs(&[(1.0, 0.5)], &d);
        let c = Centering::uncentered(2.0);
        let phi = StepKernel::constant(1, 1, 0.5);
        let v = genfun_closed(&c, &phi, &r, &d).unwrap();
        assert!((v - 2.0 / 3.0 * (1.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!((v - 0.930408).abs() < 1e-6);
        assert!(genfun_closed(&c, &StepKernel::constant(1, 1, 1.0), &r, &d).is_err());
        assert_eq!(genfun_partial_sum(&c, &phi, &r, &d, 0).unwrap(), 1.0);
    }
}
