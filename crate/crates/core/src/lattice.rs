//! The base space `X = [0, L]` cut into cells with per-cell σ-masses, and
//! dense step kernels on `X^n` over that grid.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub length: f64,
    /// `C + 1` increasing boundaries from 0 to `length`.
    pub boundaries: Vec<f64>,
    pub sigma_mass: Vec<f64>,
}

impl Domain {
    pub fn new(boundaries: Vec<f64>, sigma_mass: Vec<f64>) -> Result<Domain> {
        if sigma_mass.is_empty() || boundaries.len() != sigma_mass.len() + 1 {
            return Err(Error::Domain(format!(
                "{} boundaries for {} cells",
                boundaries.len(),
                sigma_mass.len()
            )));
        }
        if boundaries[0] != 0.0 || boundaries.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("cell boundaries must increase strictly from 0".into()));
        }
        if sigma_mass.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(Error::Domain("every cell needs positive finite σ-mass".into()));
        }
        Ok(Domain {
            length: *boundaries.last().unwrap(),
            boundaries,
            sigma_mass,
        })
    }

    /// Equal-width cells on `[0, length]`.
    pub fn uniform(length: f64, sigma_mass: Vec<f64>) -> Result<Domain> {
        if !(length > 0.0) {
            return Err(Error::Domain(format!("length must be positive, got {length}")));
        }
        let c = sigma_mass.len();
        let boundaries = (0..=c)
            .map(|i| if i == c { length } else { length * i as f64 / c as f64 })
            .collect();
        Domain::new(boundaries, sigma_mass)
    }

    pub fn cells(&self) -> usize {
        self.sigma_mass.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.sigma_mass.iter().sum()
    }

    pub fn cell_of(&self, x: f64) -> usize {
        let i = self.boundaries.partition_point(|&b| b <= x);
        i.saturating_sub(1).min(self.cells() - 1)
    }

    /// A location drawn from σ normalized: a cell by mass, then uniform in it.
    pub fn sample_location<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, usize) {
        let total = self.total_mass();
        let mut t = rng.random::<f64>() * total;
        let mut cell = self.cells() - 1;
        for (i, m) in self.sigma_mass.iter().enumerate() {
            if t < *m {
                cell = i;
                break;
            }
            t -= m;
        }
        let (lo, hi) = (self.boundaries[cell], self.boundaries[cell + 1]);
        (lo + (hi - lo) * rng.random::<f64>(), cell)
    }

    /// `boundaries=...` and `masses=...`, comma separated.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        format!("boundaries={}\nmasses={}\n", join(&self.boundaries), join(&self.sigma_mass))
    }

    pub fn from_text(text: &str) -> Result<Domain> {
        let mut b = None;
        let mut m = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {line:?}")))?;
            let parsed = parse_list(v)?;
            match k.trim() {
                "boundaries" => b = Some(parsed),
                "masses" => m = Some(parsed),
                other => return Err(Error::Config(format!("unknown domain key {other:?}"))),
            }
        }
        match (b, m) {
            (Some(b), Some(m)) => Domain::new(b, m),
            _ => Err(Error::Config("domain needs boundaries and masses".into())),
        }
    }
}

pub fn parse_list(v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Config(format!("{x:?}: {e}"))))
        .collect()
}

/// Dense table over `C^n` cell tuples, row-major with the first coordinate
/// slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct StepKernel {
    pub order: usize,
    pub cells: usize,
    pub values: Vec<f64>,
}

impl StepKernel {
    pub fn zeros(order: usize, cells: usize) -> StepKernel {
        StepKernel {
            order,
            cells,
            values: vec![0.0; cells.pow(order as u32)],
        }
    }

    pub fn scalar(v: f64, cells: usize) -> StepKernel {
        StepKernel {
            order: 0,
            cells,
            values: vec![v],
        }
    }

    pub fn from_fn<F: FnMut(&[usize]) -> f64>(order: usize, cells: usize, mut f: F) -> StepKernel {
        let mut out = StepKernel::zeros(order, cells);
        let mut idx = vec![0usize; order];
        for v in out.values.iter_mut() {
            *v = f(&idx);
            advance(&mut idx, cells);
        }
        out
    }

    pub fn from_values(order: usize, cells: usize, values: Vec<f64>) -> Result<StepKernel> {
        if values.len() != cells.pow(order as u32) {
            return Err(Error::Mismatch(format!(
                "{} values for order {order} on {cells} cells",
                values.len()
            )));
        }
        Ok(StepKernel { order, cells, values })
    }

    pub fn indicator(cell: usize, cells: usize) -> StepKernel {
        StepKernel::from_fn(1, cells, |i| if i[0] == cell { 1.0 } else { 0.0 })
    }

    pub fn constant(order: usize, cells: usize, v: f64) -> StepKernel {
        StepKernel::from_fn(order, cells, |_| v)
    }

    pub fn scalar_value(&self) -> f64 {
        assert_eq!(self.order, 0, "scalar_value on order-{} kernel", self.order);
        self.values[0]
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.cells + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.flat_index(idx)]
    }

    /// `(f⊗g)(x, y) = f(x) g(y)`.
    pub fn tensor(&self, other: &StepKernel) -> StepKernel {
        assert_eq!(self.cells, other.cells);
        let mut values = Vec::with_capacity(self.values.len() * other.values.len());
        for a in &self.values {
            for b in &other.values {
                values.push(a * b);
            }
        }
        StepKernel {
            order: self.order + other.order,
            cells: self.cells,
            values,
        }
    }

    /// `φ^{⊗n}` for an order-1 kernel.
    pub fn tensor_power(phi: &StepKernel, n: usize) -> StepKernel {
        let mut out = StepKernel::scalar(1.0, phi.cells);
        for _ in 0..n {
            out = out.tensor(phi);
        }
        out
    }

    pub fn scale(&self, c: f64) -> StepKernel {
        StepKernel {
            order: self.order,
            cells: self.cells,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn axpy(&mut self, c: f64, other: &StepKernel) {
        assert_eq!((self.order, self.cells), (other.order, other.cells));
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `g(x_0..x_{n-1}) = f(x_{perm[0]}, …, x_{perm[n-1]})`.
    pub fn permute(&self, perm: &[usize]) -> StepKernel {
        assert_eq!(perm.len(), self.order);
        let mut src = vec![0usize; self.order];
        StepKernel::from_fn(self.order, self.cells, |idx| {
            for (j, &p) in perm.iter().enumerate() {
                src[j] = idx[p];
            }
            self.get(&src)
        })
    }

    /// Average over all coordinate permutations.
    pub fn symmetrize(&self) -> StepKernel {
        if self.order <= 1 {
            return self.clone();
        }
        let perms = permutations(self.order);
        self.average_over(&perms)
    }

    fn average_over(&self, perms: &[Vec<usize>]) -> StepKernel {
        let mut out = StepKernel::zeros(self.order, self.cells);
        let mut src = vec![0usize; self.order];
        let mut idx = vec![0usize; self.order];
        let w = 1.0 / perms.len() as f64;
        for v in out.values.iter_mut() {
            let mut acc = 0.0;
            for p in perms {
                for (j, &pj) in p.iter().enumerate() {
                    src[j] = idx[pj];
                }
                acc += self.get(&src);
            }
            *v = acc * w;
            advance(&mut idx, self.cells);
        }
        out
    }

    /// Symmetrize within each α-block of coordinates: the first α_1
    /// coordinates, then the next α_2, and so on.
    pub fn blockwise_symmetrize(&self, alpha: &MultiIndex) -> Result<StepKernel> {
        if alpha.length() != self.order {
            return Err(Error::Mismatch(format!(
                "kernel order {} but |α| = {}",
                self.order,
                alpha.length()
            )));
        }
        let mut perms: Vec<Vec<usize>> = vec![Vec::new()];
        for &count in alpha.entries() {
            let start = perms[0].len();
            let local = permutations(count);
            let mut next = Vec::with_capacity(perms.len() * local.len());
            for p in &perms {
                for q in &local {
                    let mut r = p.clone();
                    r.extend(q.iter().map(|i| i + start));
                    next.push(r);
                }
            }
            perms = next;
        }
        Ok(self.average_over(&perms))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.order <= 1 {
            return true;
        }
        let mut perm: Vec<usize> = (0..self.order).collect();
        for j in 0..self.order - 1 {
            perm.swap(j, j + 1);
            let g = self.permute(&perm);
            perm.swap(j, j + 1);
            if g.values.iter().zip(&self.values).any(|(a, b)| (a - b).abs() > tol) {
                return false;
            }
        }
        true
    }

    /// `order` and `cells` lines, then the row-major values.
    pub fn to_text(&self) -> String {
        let mut out = format!("order={}\ncells={}\nvalues=", self.order, self.cells);
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<StepKernel> {
        let (mut order, mut cells, mut values) = (None, None, None);
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {line:?}")))?;
            match k.trim() {
                "order" => order = v.trim().parse::<usize>().ok(),
                "cells" => cells = v.trim().parse::<usize>().ok(),
                "values" => values = Some(parse_list(v)?),
                other => return Err(Error::Config(format!("unknown kernel key {other:?}"))),
            }
        }
        match (order, cells, values) {
            (Some(o), Some(c), Some(v)) => StepKernel::from_values(o, c, v),
            _ => Err(Error::Config("kernel needs order, cells and values".into())),
        }
    }
}

/// `Σ f·g·∏ σ-mass` over all cell tuples.
pub fn inner_product(f: &StepKernel, g: &StepKernel, domain: &Domain) -> Result<f64> {
    if f.order != g.order || f.cells != g.cells || f.cells != domain.cells() {
        return Err(Error::Mismatch(format!(
            "inner product of order {} and {} kernels on {} cells",
            f.order,
            g.order,
            domain.cells()
        )));
    }
    let mut idx = vec![0usize; f.order];
    let mut acc = 0.0;
    for (a, b) in f.values.iter().zip(&g.values) {
        let w: f64 = idx.iter().map(|&i| domain.sigma_mass[i]).product();
        acc += a * b * w;
        advance(&mut idx, f.cells);
    }
    Ok(acc)
}

pub fn symmetrize(f: &StepKernel) -> StepKernel {
    f.symmetrize()
}

pub fn blockwise_symmetrize(f: &StepKernel, alpha: &MultiIndex) -> Result<StepKernel> {
    f.blockwise_symmetrize(alpha)
}

/// Odometer step over `C^n`, last coordinate fastest.
pub fn advance(idx: &mut [usize], cells: usize) {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < cells {
            return;
        }
        *slot = 0;
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(0).len(), 1);
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn indicator_inner_product() {
        let d = Domain::uniform(1.0, vec![0.25; 4]).unwrap();
        let f = StepKernel::indicator(1, 4);
        assert_eq!(inner_product(&f, &f, &d).unwrap(), 0.25);
        assert_eq!(inner_product(&f, &StepKernel::indicator(2, 4), &d).unwrap(), 0.0);
    }

    #[test]
    fn cell_lookup() {
        let d = Domain::uniform(2.0, vec![1.0; 4]).unwrap();
        assert_eq!(d.cell_of(0.0), 0);
        assert_eq!(d.cell_of(0.49), 0);
        assert_eq!(d.cell_of(0.5), 1);
        assert_eq!(d.cell_of(2.0), 3);
    }

    #[test]
    fn pair_symmetrization() {
        let a = StepKernel::indicator(0, 3).tensor(&StepKernel::indicator(1, 3));
        let s = a.symmetrize();
        assert_eq!(s.get(&[0, 1]), 0.5);
        assert_eq!(s.get(&[1, 0]), 0.5);
        assert!(s.is_symmetric(0.0));
        assert!(!a.is_symmetric(0.0));
    }

    #[test]
    fn text_round_trip() {
        let d = Domain::uniform(1.0, vec![0.5, 0.25, 0.125]).unwrap();
        assert_eq!(Domain::from_text(&d.to_text()).unwrap(), d);
        let k = StepKernel::from_fn(2, 3, |i| (i[0] * 3 + i[1]) as f64 * 0.1);
        assert_eq!(StepKernel::from_text(&k.to_text()).unwrap(), k);
    }
}
