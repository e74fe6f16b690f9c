//! Jacobi-field operators `a_λ(φ) = a⁺(φ) + λa⁰(φ) + a⁻(φ)` on truncated
//! spaces of symmetric step kernels, and the first-order multiplication
//! formula for multiple integrals.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::chaos::{pair, wick_kernels, wick_inner_product, Centering};
use crate::error::{Error, Result};
use crate::exact;
use crate::lattice::{advance, Domain, StepKernel};
use crate::multiindex::{enumerate_weight, MultiIndex};
use crate::orthopoly::RecurrenceTable;
use crate::simulate::{Pathwise, Realization};

/// Largest weight accepted by [`multiply_first_order`].
pub const PRODUCT_MAX_WEIGHT: usize = 4;

/// Finitely many chaos components; missing orders are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelVector {
    pub cells: usize,
    pub max_order: usize,
    pub components: BTreeMap<usize, StepKernel>,
}

impl KernelVector {
    pub fn zero(cells: usize, max_order: usize) -> KernelVector {
        KernelVector {
            cells,
            max_order,
            components: BTreeMap::new(),
        }
    }

    /// Ω: the order-0 component 1.
    pub fn vacuum(cells: usize, max_order: usize) -> KernelVector {
        let mut v = KernelVector::zero(cells, max_order);
        v.components.insert(0, StepKernel::scalar(1.0, cells));
        v
    }

    pub fn insert(&mut self, f: StepKernel) -> Result<()> {
        if f.cells != self.cells || f.order > self.max_order {
            return Err(Error::Mismatch(format!(
                "order-{} kernel on {} cells in a vector of orders ≤ {} on {} cells",
                f.order, f.cells, self.max_order, self.cells
            )));
        }
        self.components.insert(f.order, f.symmetrize());
        Ok(())
    }

    /// Add `c·f` to the component of the same order.
    pub fn add(&mut self, c: f64, f: &StepKernel) -> Result<()> {
        if f.order > self.max_order {
            return Err(Error::Range(format!("order {} above N_max = {}", f.order, self.max_order)));
        }
        match self.components.get_mut(&f.order) {
            Some(g) => g.axpy(c, f),
            None => {
                self.components.insert(f.order, f.scale(c));
            }
        }
        Ok(())
    }

    pub fn get(&self, n: usize) -> Option<&StepKernel> {
        self.components.get(&n)
    }

    /// Highest order with a nonzero entry.
    pub fn top_order(&self) -> Option<usize> {
        self.components.iter().rev().find(|(_, f)| f.max_abs() > 0.0).map(|(&n, _)| n)
    }

    pub fn max_abs_diff(&self, other: &KernelVector) -> f64 {
        let mut d: f64 = 0.0;
        for n in self.components.keys().chain(other.components.keys()) {
            d = d.max(match (self.get(*n), other.get(*n)) {
                (Some(a), Some(b)) => a.values.iter().zip(&b.values).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
                (Some(a), None) | (None, Some(a)) => a.max_abs(),
                (None, None) => 0.0,
            });
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.components.values().fold(0.0, |m, f| m.max(f.max_abs()))
    }
}

/// Components indexed by multi-index, each block-symmetric for its α.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    pub cells: usize,
    pub components: BTreeMap<MultiIndex, StepKernel>,
}

impl AlphaVector {
    fn add(&mut self, alpha: MultiIndex, c: f64, f: &StepKernel) {
        match self.components.get_mut(&alpha) {
            Some(g) => g.axpy(c, f),
            None => {
                self.components.insert(alpha, f.scale(c));
            }
        }
    }

    /// `Σ_α 𝓘^α(f_α)` on one realization.
    pub fn ito_sum(&self, real: &Realization, pw: &Pathwise) -> Result<f64> {
        let mut total = 0.0;
        for (alpha, f) in &self.components {
            total += pw.ito_integral(real, alpha, f)?;
        }
        Ok(total)
    }
}

fn check_phi(phi: &StepKernel, cells: usize) -> Result<()> {
    if phi.order != 1 || phi.cells != cells {
        return Err(Error::Mismatch(format!(
            "φ must be order 1 on {cells} cells, got order {} on {}",
            phi.order, phi.cells
        )));
    }
    Ok(())
}

/// `a⁺(φ)f = φ ⊗̂ f`.
pub fn create(phi: &StepKernel, f: &StepKernel) -> Result<StepKernel> {
    check_phi(phi, f.cells)?;
    Ok(phi.tensor(f).symmetrize())
}

/// `a⁰(φ)f = (φ(x_1) + ⋯ + φ(x_n))·f`.
pub fn neutral(phi: &StepKernel, f: &StepKernel) -> Result<StepKernel> {
    check_phi(phi, f.cells)?;
    let mut idx = vec![0usize; f.order];
    let mut out = f.clone();
    for v in out.values.iter_mut() {
        *v *= idx.iter().map(|&c| phi.values[c]).sum::<f64>();
        advance(&mut idx, f.cells);
    }
    Ok(out)
}

/// `n·∫φ(x) f(x, ·) σ(dx)`.
pub fn annihilate1(phi: &StepKernel, f: &StepKernel, domain: &Domain) -> Result<StepKernel> {
    check_phi(phi, f.cells)?;
    if f.order == 0 {
        return Err(Error::Domain("annihilation of an order-0 kernel".into()));
    }
    let n = f.order;
    let c = f.cells;
    let rest = c.pow((n - 1) as u32);
    let mut out = StepKernel::zeros(n - 1, c);
    for x in 0..c {
        let w = n as f64 * domain.sigma_mass[x] * phi.values[x];
        if w != 0.0 {
            for (o, v) in out.values.iter_mut().zip(&f.values[x * rest..(x + 1) * rest]) {
                *o += w * v;
            }
        }
    }
    Ok(out)
}

/// `n(n−1)·(φ(x_1) f(x_1, x_1, x_2, …))~`, zero for `n ≤ 1`.
pub fn annihilate2(phi: &StepKernel, f: &StepKernel) -> Result<StepKernel> {
    check_phi(phi, f.cells)?;
    let n = f.order;
    if n == 0 {
        return Err(Error::Domain("annihilation of an order-0 kernel".into()));
    }
    if n == 1 {
        return Ok(StepKernel::zeros(0, f.cells));
    }
    let w = (n * (n - 1)) as f64;
    let mut src = vec![0usize; n];
    let g = StepKernel::from_fn(n - 1, f.cells, |idx| {
        src[0] = idx[0];
        src[1..].copy_from_slice(idx);
        w * phi.values[idx[0]] * f.get(&src)
    });
    Ok(g.symmetrize())
}

/// `a_λ(φ)v`, re-collected by order.
pub fn jacobi_apply(lambda: f64, phi: &StepKernel, v: &KernelVector, domain: &Domain) -> Result<KernelVector> {
    check_phi(phi, v.cells)?;
    let mut out = KernelVector::zero(v.cells, v.max_order);
    for (&n, f) in &v.components {
        if n + 1 > v.max_order {
            if f.max_abs() > 0.0 {
                return Err(Error::Range(format!("a⁺ maps order {n} past N_max = {}", v.max_order)));
            }
            continue;
        }
        out.add(1.0, &create(phi, f)?)?;
        if lambda != 0.0 && n >= 1 {
            out.add(lambda, &neutral(phi, f)?)?;
        }
        if n >= 1 {
            out.add(1.0, &annihilate1(phi, f, domain)?)?;
        }
        if n >= 2 {
            out.add(1.0, &annihilate2(phi, f)?)?;
        }
    }
    Ok(out)
}

/// `Σ_n ⟨u_n, v_n⟩` with the Wick inner product on each order.
pub fn fock_inner_product(u: &KernelVector, v: &KernelVector, table: &RecurrenceTable, domain: &Domain) -> Result<f64> {
    let mut total = 0.0;
    for (n, f) in &u.components {
        if let Some(g) = v.get(*n) {
            total += wick_inner_product(f, g, table, domain)?;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub n: usize,
    /// `Σ_k ⟨:ω^⊗k:, h_k⟩` with `h = a_λ(φ)^n Ω`.
    pub lhs: f64,
    /// `⟨:ω:¹, φ⟩^n`
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Check that n applications of `a_λ(φ)` to the vacuum act as
/// multiplication by `⟨:ω:¹, φ⟩` once paired with the Wick powers.
pub fn vacuum_consistency(
    centering: &Centering,
    phi: &StepKernel,
    n: usize,
    real: &Realization,
    domain: &Domain,
    tolerance: f64,
) -> Result<ConsistencyReport> {
    check_phi(phi, domain.cells())?;
    let mut h = KernelVector::vacuum(domain.cells(), n);
    for _ in 0..n {
        h = jacobi_apply(centering.lambda, phi, &h, domain)?;
    }
    let ws = wick_kernels(real, centering, n)?;
    let mut lhs = 0.0;
    let mut scale: f64 = 1.0;
    for (k, f) in &h.components {
        let t = pair(&ws[*k], f, real, domain)?;
        scale = scale.max(t.abs());
        lhs += t;
    }
    let rhs = pair(&ws[1], phi, real, domain)?.powi(n as i32);
    let residual = (lhs - rhs).abs();
    let tol = tolerance * scale.max(rhs.abs());
    Ok(ConsistencyReport {
        n,
        lhs,
        rhs,
        residual,
        tolerance: tol,
        pass: residual <= tol,
    })
}

/// Move coordinate `j` to position `to` of the remaining order.
fn move_coordinate(f: &StepKernel, j: usize, to: usize) -> StepKernel {
    let mut order: Vec<usize> = (0..f.order).filter(|&i| i != j).collect();
    order.insert(to, j);
    let mut perm = vec![0usize; f.order];
    for (pos, &src) in order.iter().enumerate() {
        perm[src] = pos;
    }
    f.permute(&perm)
}

fn times_phi_at(f: &StepKernel, phi: &StepKernel, j: usize) -> StepKernel {
    let mut idx = vec![0usize; f.order];
    let mut out = f.clone();
    for v in out.values.iter_mut() {
        *v *= phi.values[idx[j]];
        advance(&mut idx, f.cells);
    }
    out
}

fn contract_coordinate(f: &StepKernel, phi: &StepKernel, domain: &Domain, j: usize) -> StepKernel {
    let mut src = vec![0usize; f.order];
    StepKernel::from_fn(f.order - 1, f.cells, |idx| {
        let mut acc = 0.0;
        for x in 0..f.cells {
            src[..j].copy_from_slice(&idx[..j]);
            src[j] = x;
            src[j + 1..].copy_from_slice(&idx[j..]);
            acc += domain.sigma_mass[x] * phi.values[x] * f.get(&src);
        }
        acc
    })
}

/// Expansion of `𝓘^{(1)}(φ)·𝓘^α(f)` as `Σ_β 𝓘^β(g_β)`.
///
/// A new size-1 coordinate enters, or the new point coincides with an
/// existing size-k coordinate and `s·P_k = P_{k+1} + a_{k−1}P_k + b_{k−1}P_{k−1}`
/// splits it, or that coordinate is integrated out against `s·P_k ν⊗σ`.
pub fn multiply_first_order(phi: &StepKernel, alpha: &MultiIndex, f: &StepKernel, pw: &Pathwise) -> Result<AlphaVector> {
    let domain = pw.domain;
    check_phi(phi, domain.cells())?;
    if alpha.weight() > PRODUCT_MAX_WEIGHT {
        return Err(Error::Resource(format!("weight {} above {PRODUCT_MAX_WEIGHT}", alpha.weight())));
    }
    if f.order != alpha.length() || f.cells != domain.cells() {
        return Err(Error::Mismatch(format!("order-{} kernel for |α| = {}", f.order, alpha.length())));
    }
    let table = pw.table;
    if alpha.max_position() + 1 > table.max_order {
        return Err(Error::Range(format!("α = {alpha} needs P_{} beyond the table", alpha.max_position() + 1)));
    }
    let f = f.blockwise_symmetrize(alpha)?;
    let sizes = alpha.block_sizes();
    let mut out = AlphaVector {
        cells: domain.cells(),
        components: BTreeMap::new(),
    };
    let shift = |a: &MultiIndex, k: usize, d: isize| a.shifted(k, d).expect("block count stays nonnegative");

    out.add(shift(alpha, 1, 1), 1.0, &phi.tensor(&f));
    for (j, &k) in sizes.iter().enumerate() {
        let g = times_phi_at(&f, phi, j);
        // end of the size-≤k groups once j is removed
        let below: usize = sizes.iter().filter(|&&s| s <= k).count() - 1;
        let up = shift(&shift(alpha, k, -1), k + 1, 1);
        out.add(up, 1.0, &move_coordinate(&g, j, below));
        out.add(alpha.clone(), table.a[k - 1], &g);
        if k >= 2 {
            let before: usize = sizes.iter().filter(|&&s| s < k).count();
            let down = shift(&shift(alpha, k, -1), k - 1, 1);
            out.add(down, table.b[k - 1], &move_coordinate(&g, j, before));
        }
        let w = pw.model.nu_integral(pw.eps, |s| s * table.p_eval(k, s), 2)?;
        if w != 0.0 {
            out.add(shift(alpha, k, -1), w, &contract_coordinate(&f, phi, domain, j));
        }
    }
    for (beta, g) in out.components.iter_mut() {
        *g = g.blockwise_symmetrize(beta)?;
    }
    out.components.retain(|_, g| g.max_abs() > 0.0);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefactorRow {
    pub alpha: String,
    /// Coefficient of the contraction term from the Fock product: α_1.
    pub fock: f64,
    /// The printed `α_1!(n−α_1)!/(n−1)!`, `n = |α|`.
    pub printed: f64,
    pub agree: bool,
}

/// Compare the contraction prefactor of the printed multiplication
/// formula with the Fock-product coefficient for every α with α_1 ≥ 1.
pub fn prefactor_report(max_weight: usize) -> Vec<PrefactorRow> {
    let mut rows = Vec::new();
    for w in 1..=max_weight {
        for alpha in enumerate_weight(w) {
            let a1 = alpha.get(1);
            if a1 == 0 {
                continue;
            }
            let n = alpha.length();
            let printed = exact::to_f64(
                &(exact::factorial_rat(a1) * exact::factorial_rat(n - a1) / exact::factorial_rat(n - 1)),
            );
            let fock = a1 as f64;
            rows.push(PrefactorRow {
                alpha: alpha.to_string(),
                fock,
                printed,
                agree: printed == fock,
            });
        }
    }
    rows
}

fn sorted_tuples(order: usize, cells: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; order];
    for _ in 0..cells.pow(order as u32) {
        if idx.windows(2).all(|w| w[0] <= w[1]) {
            out.push(idx.clone());
        }
        advance(&mut idx, cells);
    }
    out
}

/// Matrix of `a_λ(φ)` on symmetrized basis kernels of orders `0..=max_order`,
/// as CSV rows `order_out,index_out,order_in,index_in,value` for the
/// nonzero entries; indices are nondecreasing cell tuples joined by `-`.
pub fn operator_csv(lambda: f64, phi: &StepKernel, domain: &Domain, max_order: usize) -> Result<String> {
    let c = domain.cells();
    let label = |t: &[usize]| t.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("-");
    let mut out = String::from("order_out,index_out,order_in,index_in,value\n");
    for n in 0..max_order {
        for t in sorted_tuples(n, c) {
            let mut e = StepKernel::zeros(n, c);
            let i = e.flat_index(&t);
            e.values[i] = 1.0;
            let mut v = KernelVector::zero(c, max_order);
            v.insert(e)?;
            let img = jacobi_apply(lambda, phi, &v, domain)?;
            for (&m, g) in &img.components {
                for u in sorted_tuples(m, c) {
                    let val = g.get(&u);
                    if val != 0.0 {
                        let _ = writeln!(out, "{m},{},{n},{},{val:e}", label(&u), label(&t));
                    }
                }
            }
        }
    }
    Ok(out)
}
