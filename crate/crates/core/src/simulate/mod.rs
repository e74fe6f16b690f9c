//! Poisson random measure sampling and pathwise functionals: Teugels
//! measures, orthogonalized measures and compensated multiple integrals.

pub mod mc;

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::lattice::{Domain, StepKernel};
use crate::levy_models::LevyModel;
use crate::multiindex::{set_partitions, MultiIndex};
use crate::orthopoly::{compensator_eps, RecurrenceTable};

pub use mc::{mc_estimate, replicate_map, stream_rng, Executor, MCReport};

/// Largest `|α|` accepted by [`Pathwise::ito_integral`].
pub const ITO_MAX_LENGTH: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub s: f64,
    pub x: f64,
    pub cell: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub atoms: Vec<Atom>,
    pub eps_used: f64,
    pub seed: u64,
    pub stream: u64,
}

impl Realization {
    /// A hand-built configuration of `(s, x)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)], domain: &Domain) -> Realization {
        Realization {
            atoms: pairs
                .iter()
                .map(|&(s, x)| Atom {
                    s,
                    x,
                    cell: domain.cell_of(x),
                })
                .collect(),
            eps_used: 0.0,
            seed: 0,
            stream: 0,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,x\n");
        for a in &self.atoms {
            let _ = writeln!(out, "{},{}", a.s, a.x);
        }
        out
    }
}

/// Draw the atoms of the Poisson measure with intensity `ν|_{|s|>ε} ⊗ σ`.
pub fn sample_realization<R: Rng + ?Sized>(model: &LevyModel, domain: &Domain, rng: &mut R) -> Result<Realization> {
    let sampler = model.sampler()?;
    sample_marked(model, domain, sampler.total_mass(), rng, |rng| sampler.sample(rng))
}

/// Poisson measure for a Pascal model sampled under a heavier intensity:
/// atom count mean scaled by `rate`, jump marks from the log-series law
/// with parameter `q` in place of `p`. Returns the realization and its
/// likelihood ratio against the true law.
///
/// Weighting by the ratio gives unbiased moments of any functional while
/// visiting the many-atom, large-jump configurations that dominate high
/// moments far more often.
pub fn sample_pascal_tilted<R: Rng + ?Sized>(
    model: &LevyModel,
    domain: &Domain,
    rate: f64,
    q: f64,
    rng: &mut R,
) -> Result<(Realization, f64)> {
    let lambda = model
        .lambda()
        .filter(|&l| l > 2.0)
        .ok_or_else(|| Error::Unsupported("tilted marks need a Pascal model".into()))?;
    if !(q > 0.0 && q < 1.0) || !(rate > 0.0) {
        return Err(Error::Domain(format!("need q in (0,1) and rate > 0, got q = {q}, rate = {rate}")));
    }
    let p = crate::levy_models::pascal_p(lambda);
    let r = (lambda * lambda - 4.0).sqrt();
    let mass = -(-p).ln_1p();
    let per_atom = ((-q).ln_1p() / (-p).ln_1p() / rate).ln();
    let step = (p / q).ln();
    let mut log_w = (rate - 1.0) * mass * domain.total_mass();
    let real = sample_marked(model, domain, rate * mass, rng, |rng| {
        let k = crate::jumps::log_series(q, rng);
        log_w += k as f64 * step + per_atom;
        r * k as f64
    })?;
    Ok((real, log_w.exp()))
}

fn sample_marked<R: Rng + ?Sized>(
    model: &LevyModel,
    domain: &Domain,
    mass: f64,
    rng: &mut R,
    mut mark: impl FnMut(&mut R) -> f64,
) -> Result<Realization> {
    let mean = mass * domain.total_mass();
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::Domain(format!("Poisson mean {mean}: {e}")))?
            .sample(rng) as usize
    } else {
        0
    };
    let mut atoms = Vec::with_capacity(count);
    let mut seen = HashSet::with_capacity(count);
    for _ in 0..count {
        let (x, cell) = loop {
            let (x, cell) = domain.sample_location(rng);
            if seen.insert(x.to_bits()) {
                break (x, cell);
            }
        };
        atoms.push(Atom {
            s: mark(rng),
            x,
            cell,
        });
    }
    Ok(Realization {
        atoms,
        eps_used: model.truncation_eps,
        seed: 0,
        stream: 0,
    })
}

/// A realization on its own counter-based substream `(seed, stream)`.
pub fn seeded_realization(model: &LevyModel, domain: &Domain, seed: u64, stream: u64) -> Result<Realization> {
    let mut rng = stream_rng(seed, stream);
    let mut r = sample_realization(model, domain, &mut rng)?;
    r.seed = seed;
    r.stream = stream;
    Ok(r)
}

/// Precomputed compensators for pathwise evaluation on one model, table and
/// grid.
#[derive(Debug, Clone)]
pub struct Pathwise<'a> {
    pub model: &'a LevyModel,
    pub table: &'a RecurrenceTable,
    pub domain: &'a Domain,
    pub eps: f64,
    /// `∫_{|s|>ε} P_m dν` at index `m-1`, `m = 1..=N`.
    comp_p: Vec<f64>,
    /// `∫_{|s|>ε} s^m dν` at index `m-1`.
    comp_pow: Vec<f64>,
}

impl<'a> Pathwise<'a> {
    pub fn new(model: &'a LevyModel, table: &'a RecurrenceTable, domain: &'a Domain) -> Result<Pathwise<'a>> {
        let eps = model.truncation_eps;
        let n = table.max_order;
        let comp_p = (1..=n)
            .map(|m| compensator_eps(model, table, m, eps))
            .collect::<Result<Vec<_>>>()?;
        let comp_pow = (1..=n)
            .map(|m| model.truncated_power_moment(eps, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Pathwise {
            model,
            table,
            domain,
            eps,
            comp_p,
            comp_pow,
        })
    }

    fn check_order(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.table.max_order {
            return Err(Error::Range(format!("order {m} outside 1..={}", self.table.max_order)));
        }
        Ok(())
    }

    /// `∫_{|s|>ε} P_m dν`.
    pub fn compensator(&self, m: usize) -> f64 {
        self.comp_p[m - 1]
    }

    /// `∫_{|s|>ε} s^m dν`.
    pub fn power_compensator(&self, m: usize) -> f64 {
        self.comp_pow[m - 1]
    }

    fn cell_mass(&self, cells: &[usize]) -> f64 {
        cells.iter().map(|&c| self.domain.sigma_mass[c]).sum()
    }

    /// `X^{(m)}(Δ) = Σ_{x_i∈Δ} s_i^m − σ(Δ)∫ s^m dν`.
    pub fn teugels_measure(&self, real: &Realization, m: usize, cells: &[usize]) -> Result<f64> {
        self.check_order(m)?;
        let sum: f64 = real
            .atoms
            .iter()
            .filter(|a| cells.contains(&a.cell))
            .map(|a| a.s.powi(m as i32))
            .sum();
        Ok(sum - self.cell_mass(cells) * self.comp_pow[m - 1])
    }

    /// `Y^{(m)}(Δ) = Σ_{x_i∈Δ} P_m(s_i) − σ(Δ)∫ P_m dν`.
    pub fn ortho_measure(&self, real: &Realization, m: usize, cells: &[usize]) -> Result<f64> {
        self.check_order(m)?;
        let sum: f64 = real
            .atoms
            .iter()
            .filter(|a| cells.contains(&a.cell))
            .map(|a| self.table.p_eval(m, a.s))
            .sum();
        Ok(sum - self.cell_mass(cells) * self.comp_p[m - 1])
    }

    /// Compensated multiple integral `𝓘^α(f)` of the kernel
    /// `∏_j P_{k_j}(s_j)·f(x_1..x_m)`, `k` the block sizes of α.
    ///
    /// Evaluated exactly by Möbius inversion over set partitions of the
    /// coordinates: singleton blocks carry the compensated measure
    /// `Σ_a P_k(s_a)δ_{x_a} − σ·∫P_k dν`, larger blocks carry the atom-only
    /// diagonal `Σ_a ∏_{j∈B} P_{k_j}(s_a) δ_{x_a}`.
    pub fn ito_integral(&self, real: &Realization, alpha: &MultiIndex, f: &StepKernel) -> Result<f64> {
        let m = alpha.length();
        if m > ITO_MAX_LENGTH {
            return Err(Error::Resource(format!("|α| = {m} exceeds {ITO_MAX_LENGTH}")));
        }
        if f.order != m || f.cells != self.domain.cells() {
            return Err(Error::Mismatch(format!(
                "kernel of order {} on {} cells for |α| = {m} on {} cells",
                f.order,
                f.cells,
                self.domain.cells()
            )));
        }
        if m == 0 {
            return Ok(f.scalar_value());
        }
        let ks = alpha.block_sizes();
        let kmax = *ks.iter().max().unwrap();
        self.check_order(kmax)?;
        let c = self.domain.cells();
        // P_k(s_a) for every atom, k = 1..kmax
        let pvals: Vec<Vec<f64>> = real.atoms.iter().map(|a| self.table.p_values(a.s, kmax)).collect();
        let strides: Vec<usize> = (0..m).map(|j| c.pow((m - 1 - j) as u32)).collect();
        let mut total = 0.0;
        for partition in set_partitions(m) {
            let mut mobius = 1.0;
            let mut vectors = Vec::with_capacity(partition.len());
            let mut block_strides = Vec::with_capacity(partition.len());
            for block in &partition {
                let size = block.len();
                for i in 1..size {
                    mobius *= -(i as f64);
                }
                let mut v = vec![0.0; c];
                for (a, atom) in real.atoms.iter().enumerate() {
                    v[atom.cell] += block.iter().map(|&j| pvals[a][ks[j] - 1]).product::<f64>();
                }
                if size == 1 {
                    let comp = self.comp_p[ks[block[0]] - 1];
                    for (cell, vc) in v.iter_mut().enumerate() {
                        *vc -= comp * self.domain.sigma_mass[cell];
                    }
                }
                vectors.push(v);
                block_strides.push(block.iter().map(|&j| strides[j]).sum::<usize>());
            }
            total += mobius * contract(&f.values, &vectors, &block_strides, c);
        }
        Ok(total)
    }
}

/// `Σ_{c_1..c_q} f[Σ c_b·stride_b] ∏ v_b[c_b]`.
pub(crate) fn contract(values: &[f64], vectors: &[Vec<f64>], strides: &[usize], cells: usize) -> f64 {
    fn rec(values: &[f64], vectors: &[Vec<f64>], strides: &[usize], cells: usize, b: usize, offset: usize, w: f64) -> f64 {
        if b == vectors.len() {
            return w * values[offset];
        }
        let mut acc = 0.0;
        for c in 0..cells {
            let vc = vectors[b][c];
            if vc != 0.0 {
                acc += rec(values, vectors, strides, cells, b + 1, offset + c * strides[b], w * vc);
            }
        }
        acc
    }
    rec(values, vectors, strides, cells, 0, 0, 1.0)
}

/// Samples of `⟨ω, χ_Δ⟩` with `σ(Δ) = sigma_delta`: plain atom sums for
/// uncentered models, truncated compensated sums otherwise.
pub fn marginal_samples(
    model: &LevyModel,
    sigma_delta: f64,
    replicates: usize,
    seed: u64,
    exec: Executor,
) -> Result<Vec<f64>> {
    let domain = Domain::uniform(1.0, vec![sigma_delta])?;
    let shift = if model.centered() {
        sigma_delta * model.truncated_power_moment(model.truncation_eps, 1)?
    } else {
        0.0
    };
    let out = replicate_map(exec, replicates, seed, |rng, _| {
        sample_realization(model, &domain, rng).map(|r| r.atoms.iter().map(|a| a.s).sum::<f64>() - shift)
    });
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_models::meixner_model;
    use crate::orthopoly::from_meixner;

    #[test]
    fn teugels_example() {
        // ∫s²ν = ν̃(ℝ) = 1, so X^(2)(Δ) = 4 − 0.5
        let model = meixner_model(3.0).unwrap();
        let table = from_meixner(3.0, 3).unwrap();
        let domain = Domain::uniform(1.0, vec![0.5, 0.5]).unwrap();
        let pw = Pathwise::new(&model, &table, &domain).unwrap();
        let real = Realization::from_pairs(&[(2.0, 0.3), (1.0, 0.7)], &domain);
        let x2 = pw.teugels_measure(&real, 2, &[0]).unwrap();
        assert!((x2 - 3.5).abs() < 1e-9, "{x2}");
    }

    #[test]
    fn tilted_weights_are_unbiased() {
        let model = meixner_model(3.0).unwrap();
        let domain = Domain::uniform(1.0, vec![1.0, 1.0]).unwrap();
        let q = crate::levy_models::pascal_p(3.0).sqrt();
        let n = 200_000;
        let mut rng = stream_rng(9, 0);
        let (mut w_sum, mut count_sum, mut s2_sum) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let (real, w) = sample_pascal_tilted(&model, &domain, 1.5, q, &mut rng).unwrap();
            w_sum += w;
            count_sum += w * real.atoms.len() as f64;
            s2_sum += w * real.atoms.iter().map(|a| a.s * a.s).sum::<f64>();
        }
        let n = n as f64;
        let mass = crate::levy_models::levy_total_mass(&model, 0.0).unwrap();
        assert!((w_sum / n - 1.0).abs() < 0.01, "{}", w_sum / n);
        assert!((count_sum / n / (2.0 * mass) - 1.0).abs() < 0.02);
        // E Σ s² = σ(X)·ν̃(ℝ)
        assert!((s2_sum / n / 2.0 - 1.0).abs() < 0.03, "{}", s2_sum / n);
    }

    #[test]
    fn replay_is_identical() {
        let model = meixner_model(2.0).unwrap();
        let domain = Domain::uniform(1.0, vec![0.5, 0.5]).unwrap();
        let a = seeded_realization(&model, &domain, 42, 3).unwrap();
        let b = seeded_realization(&model, &domain, 42, 3).unwrap();
        assert_eq!(a, b);
        assert!(!a.atoms.is_empty());
        assert!(a.atoms.iter().all(|x| x.s > model.truncation_eps));
    }
}
