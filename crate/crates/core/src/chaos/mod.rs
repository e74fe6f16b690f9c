//! Wick powers `:ω^⊗n:` of a sampled configuration, their pairings with
//! step kernels, the chaos expansion of a Wick monomial, and the Wick inner
//! product.
//!
//! A Wick tensor is a sum of symmetrized elementary products. Each factor
//! is a block covering `mult` coordinates that are forced equal: either an
//! atom of the configuration or a σ-diagonal. The recursion only ever
//! appends blocks or raises the multiplicity of an existing one, so the
//! representation is closed.

pub mod genfun;
pub mod gof;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lattice::{inner_product, Domain, StepKernel};
use crate::levy_models::{meixner_c, LevyModel};
use crate::multiindex::{d_alpha_apply, enumerate_weight, k_alpha, r_alpha};
use crate::orthopoly::RecurrenceTable;
use crate::simulate::{contract, Pathwise, Realization};

pub use genfun::{genfun_closed, genfun_partial_sum, genfun_partial_sums, genfun_sweep_csv, RootPair};
pub use gof::{marginal_gof, GofReport};

pub const WICK_MAX_ORDER: usize = 6;
pub const WICK_MAX_TERMS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Block {
    /// `mult` coordinates placed at atom `index`.
    Atom { index: usize, mult: usize },
    /// `mult` coordinates on the diagonal, integrated against σ.
    Sigma { mult: usize },
}

impl Block {
    pub fn mult(&self) -> usize {
        match *self {
            Block::Atom { mult, .. } | Block::Sigma { mult } => mult,
        }
    }

    fn raised(&self, by: usize) -> Block {
        match *self {
            Block::Atom { index, mult } => Block::Atom { index, mult: mult + by },
            Block::Sigma { mult } => Block::Sigma { mult: mult + by },
        }
    }
}

/// How ω enters the Wick recursion: `ω' = Σ s_a δ_{x_a} + (drift − c_λ)σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Centering {
    pub lambda: f64,
    pub c_lambda: f64,
    /// Deterministic part of ω: the mean of the jumps below the truncation.
    pub drift: f64,
}

impl Centering {
    pub fn uncentered(lambda: f64) -> Centering {
        Centering {
            lambda,
            c_lambda: meixner_c(lambda),
            drift: 0.0,
        }
    }

    /// For a truncated model the drift puts back the mean of the dropped
    /// small jumps, so that `ω'` is centered by the truncated compensator
    /// `∫_{|s|>ε} s ν(ds)` exactly as the multiple integrals are.
    pub fn for_model(model: &LevyModel) -> Result<Centering> {
        let lambda = model
            .lambda()
            .ok_or_else(|| Error::Unsupported("Wick recursion needs a Meixner model".into()))?;
        let c_lambda = meixner_c(lambda);
        let eps = model.truncation_eps;
        let drift = if eps > 0.0 {
            c_lambda - model.truncated_power_moment(eps, 1)?
        } else {
            0.0
        };
        Ok(Centering { lambda, c_lambda, drift })
    }

    /// Coefficient of σ in `ω'`.
    pub fn sigma_coef(&self) -> f64 {
        self.drift - self.c_lambda
    }

    /// `⟨ω', g⟩` for a per-cell function `g`.
    pub fn omega_pairing(&self, real: &Realization, domain: &Domain, g: &[f64]) -> f64 {
        let atoms: f64 = real.atoms.iter().map(|a| a.s * g[a.cell]).sum();
        let sig: f64 = domain.sigma_mass.iter().zip(g).map(|(m, v)| m * v).sum();
        atoms + self.sigma_coef() * sig
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WickTensor {
    pub order: usize,
    /// Sorted block lists with nonzero coefficients, in canonical order.
    pub terms: Vec<(f64, Vec<Block>)>,
}

type TermMap = BTreeMap<Vec<Block>, f64>;

fn add_term(map: &mut TermMap, mut blocks: Vec<Block>, c: f64) {
    blocks.sort_unstable();
    *map.entry(blocks).or_insert(0.0) += c;
}

fn append_omega(w: &TermMap, real: &Realization, sigma_coef: f64) -> TermMap {
    let mut out = TermMap::new();
    for (blocks, &c) in w {
        for (index, atom) in real.atoms.iter().enumerate() {
            let mut b = blocks.clone();
            b.push(Block::Atom { index, mult: 1 });
            add_term(&mut out, b, c * atom.s);
        }
        if sigma_coef != 0.0 {
            let mut b = blocks.clone();
            b.push(Block::Sigma { mult: 1 });
            add_term(&mut out, b, c * sigma_coef);
        }
    }
    out
}

fn append_sigma(w: &TermMap, mult: usize) -> TermMap {
    let mut out = TermMap::new();
    for (blocks, &c) in w {
        let mut b = blocks.clone();
        b.push(Block::Sigma { mult });
        add_term(&mut out, b, c);
    }
    out
}

/// Merge the new coordinate into the last one, symmetrized: a block of
/// multiplicity m holds the last coordinate with weight m/n. The weights
/// are returned multiplied by n.
fn raise(w: &TermMap, by: usize) -> TermMap {
    let mut out = TermMap::new();
    for (blocks, &c) in w {
        for i in 0..blocks.len() {
            let mut b = blocks.clone();
            b[i] = blocks[i].raised(by);
            add_term(&mut out, b, c * blocks[i].mult() as f64);
        }
    }
    out
}

fn axpy_terms(acc: &mut TermMap, c: f64, other: &TermMap) {
    for (b, &v) in other {
        *acc.entry(b.clone()).or_insert(0.0) += c * v;
    }
}

fn prune(mut map: TermMap) -> TermMap {
    map.retain(|_, c| *c != 0.0);
    map
}

/// All Wick powers up to order `n` by the five-term recursion
/// `W_{k+1} = W_k⊗ω' − λ·raise₁W_k − k·(W_{k−1}⊗σ₂ + raise₂W_{k−1})`.
pub fn wick_kernels(real: &Realization, centering: &Centering, n: usize) -> Result<Vec<WickTensor>> {
    if n > WICK_MAX_ORDER {
        return Err(Error::Resource(format!("Wick order {n} exceeds {WICK_MAX_ORDER}")));
    }
    let mut levels: Vec<TermMap> = vec![TermMap::from([(Vec::new(), 1.0)])];
    for k in 0..n {
        let mut next = append_omega(&levels[k], real, centering.sigma_coef());
        if centering.lambda != 0.0 {
            axpy_terms(&mut next, -centering.lambda, &raise(&levels[k], 1));
        }
        if k >= 1 {
            let prev = &levels[k - 1];
            axpy_terms(&mut next, -(k as f64), &append_sigma(prev, 2));
            axpy_terms(&mut next, -(k as f64), &raise(prev, 2));
        }
        let next = prune(next);
        if next.len() > WICK_MAX_TERMS {
            return Err(Error::Resource(format!(
                "Wick order {} has {} terms, above {WICK_MAX_TERMS}",
                k + 1,
                next.len()
            )));
        }
        levels.push(next);
    }
    Ok(levels
        .into_iter()
        .enumerate()
        .map(|(order, map)| WickTensor {
            order,
            terms: map.into_iter().map(|(b, c)| (c, b)).collect(),
        })
        .collect())
}

pub fn wick_kernel(real: &Realization, centering: &Centering, n: usize) -> Result<WickTensor> {
    Ok(wick_kernels(real, centering, n)?.pop().expect("order n present"))
}

fn check_atoms(w: &WickTensor, real: &Realization) -> Result<()> {
    let bad = w.terms.iter().flat_map(|(_, b)| b).any(|b| match *b {
        Block::Atom { index, .. } => index >= real.atoms.len(),
        Block::Sigma { .. } => false,
    });
    if bad {
        return Err(Error::Mismatch("Wick tensor refers to atoms missing from the realization".into()));
    }
    Ok(())
}

/// `⟨:ω^⊗n:, f⟩` for a kernel of the same order; `f` is symmetrized first.
pub fn pair(w: &WickTensor, f: &StepKernel, real: &Realization, domain: &Domain) -> Result<f64> {
    if f.order != w.order || f.cells != domain.cells() {
        return Err(Error::Mismatch(format!(
            "pairing an order-{} Wick tensor with an order-{} kernel",
            w.order, f.order
        )));
    }
    check_atoms(w, real)?;
    let f = f.symmetrize();
    let c = domain.cells();
    let n = w.order;
    let mut total = 0.0;
    for (coef, blocks) in &w.terms {
        let mut vectors = Vec::with_capacity(blocks.len());
        let mut strides = Vec::with_capacity(blocks.len());
        let mut pos = 0;
        for b in blocks {
            let m = b.mult();
            strides.push((pos..pos + m).map(|j| c.pow((n - 1 - j) as u32)).sum::<usize>());
            pos += m;
            vectors.push(match *b {
                Block::Atom { index, .. } => {
                    let mut v = vec![0.0; c];
                    v[real.atoms[index].cell] = 1.0;
                    v
                }
                Block::Sigma { .. } => domain.sigma_mass.clone(),
            });
        }
        total += coef * contract(&f.values, &vectors, &strides, c);
    }
    Ok(total)
}

/// `⟨:ω^⊗n:, φ^⊗n⟩`: every block factorizes.
pub fn pair_power(w: &WickTensor, phi: &StepKernel, real: &Realization, domain: &Domain) -> Result<f64> {
    if phi.order != 1 || phi.cells != domain.cells() {
        return Err(Error::Mismatch("pair_power needs an order-1 kernel on the domain".into()));
    }
    check_atoms(w, real)?;
    let sigma_pow = |m: usize| -> f64 {
        domain
            .sigma_mass
            .iter()
            .zip(&phi.values)
            .map(|(s, v)| s * v.powi(m as i32))
            .sum()
    };
    Ok(w.terms
        .iter()
        .map(|(coef, blocks)| {
            coef * blocks
                .iter()
                .map(|b| match *b {
                    Block::Atom { index, mult } => phi.values[real.atoms[index].cell].powi(mult as i32),
                    Block::Sigma { mult } => sigma_pow(mult),
                })
                .product::<f64>()
        })
        .sum())
}

/// `Σ_α R_α 𝓘^α(D_α f)` over α of weight n.
pub fn wick_expansion(real: &Realization, pw: &Pathwise, n: usize, f: &StepKernel) -> Result<f64> {
    if f.order != n {
        return Err(Error::Mismatch(format!("order-{} kernel for n = {n}", f.order)));
    }
    let f = f.symmetrize();
    let mut total = 0.0;
    for alpha in enumerate_weight(n) {
        let g = d_alpha_apply(&alpha, &f)?;
        total += r_alpha(&alpha) as f64 * pw.ito_integral(real, &alpha, &g)?;
    }
    Ok(total)
}

/// `n!·Σ_α K_α ⟨D_α f, D_α g⟩` over α of weight n.
pub fn wick_inner_product(f: &StepKernel, g: &StepKernel, table: &RecurrenceTable, domain: &Domain) -> Result<f64> {
    if f.order != g.order {
        return Err(Error::Mismatch(format!("orders {} and {}", f.order, g.order)));
    }
    let n = f.order;
    if n == 0 {
        return Ok(f.scalar_value() * g.scalar_value());
    }
    let (f, g) = (f.symmetrize(), g.symmetrize());
    let mut total = 0.0;
    for alpha in enumerate_weight(n) {
        let k = k_alpha(&alpha, &table.norms_sq_exact)?;
        total += k * inner_product(&d_alpha_apply(&alpha, &f)?, &d_alpha_apply(&alpha, &g)?, domain)?;
    }
    let nfact: f64 = (1..=n).map(|i| i as f64).product();
    Ok(nfact * total)
}
