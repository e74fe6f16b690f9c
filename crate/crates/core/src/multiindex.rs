//! Multi-indices α = (α_1, α_2, …) and their combinatorial coefficients.

use std::collections::HashSet;
use std::fmt;

use num::bigint::BigInt;
use num::traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::lattice::{permutations, StepKernel};

/// Largest weight accepted by [`sector_count`].
pub const SECTOR_MAX_WEIGHT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex {
    entries: Vec<usize>,
}

impl MultiIndex {
    pub fn new(mut entries: Vec<usize>) -> MultiIndex {
        while entries.last() == Some(&0) {
            entries.pop();
        }
        MultiIndex { entries }
    }

    pub fn empty() -> MultiIndex {
        MultiIndex::default()
    }

    /// `1_k`: a single block of size `k`.
    pub fn unit(k: usize) -> MultiIndex {
        let mut e = vec![0; k];
        e[k - 1] = 1;
        MultiIndex::new(e)
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// `α_k` with 1-based `k`; zero past the end.
    pub fn get(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            self.entries.get(k - 1).copied().unwrap_or(0)
        }
    }

    /// `|α| = Σ α_k`.
    pub fn length(&self) -> usize {
        self.entries.iter().sum()
    }

    /// `Σ k·α_k`.
    pub fn weight(&self) -> usize {
        self.entries.iter().enumerate().map(|(i, a)| (i + 1) * a).sum()
    }

    pub fn max_position(&self) -> usize {
        self.entries.len()
    }

    /// Add `delta` to `α_k`; `None` if the entry would go negative.
    pub fn shifted(&self, k: usize, delta: isize) -> Option<MultiIndex> {
        let mut e = self.entries.clone();
        if e.len() < k {
            e.resize(k, 0);
        }
        let v = e[k - 1] as isize + delta;
        if v < 0 {
            return None;
        }
        e[k - 1] = v as usize;
        Some(MultiIndex::new(e))
    }

    /// Block sizes of the coordinates of an α-kernel, in block order:
    /// α_1 ones, then α_2 twos, and so on.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.length());
        for (i, &a) in self.entries.iter().enumerate() {
            out.extend(std::iter::repeat(i + 1).take(a));
        }
        out
    }

    /// `α_1! α_2! ⋯`
    pub fn factorial_product(&self) -> BigInt {
        self.entries.iter().map(|&a| exact::factorial(a)).product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// All α of weight `n`, ordered lexicographically on the reversed tuple
/// padded to length `n`: (4), (2,1), (0,2), (1,0,1), (0,0,0,1) for n = 4.
pub fn enumerate_weight(n: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    // choose α_n, α_{n-1}, …, α_1 in increasing order
    fn rec(k: usize, remaining: usize, current: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if k == 1 {
            current[0] = remaining;
            out.push(MultiIndex::new(current.clone()));
            current[0] = 0;
            return;
        }
        for a in 0..=remaining / k {
            current[k - 1] = a;
            rec(k - 1, remaining - a * k, current, out);
        }
        current[k - 1] = 0;
    }
    if n == 0 {
        return vec![MultiIndex::empty()];
    }
    rec(n, n, &mut current, &mut out);
    out
}

/// All α with `1 ≤ weight ≤ max_weight`, by weight then [`enumerate_weight`].
pub fn enumerate_up_to(max_weight: usize) -> Vec<MultiIndex> {
    (1..=max_weight).flat_map(enumerate_weight).collect()
}

/// `R_α = n! / ∏ α_k! (k!)^{α_k}`: set partitions with α_k blocks of size k.
pub fn r_alpha_big(alpha: &MultiIndex) -> BigInt {
    let n = alpha.weight();
    let mut den = BigInt::one();
    for (i, &a) in alpha.entries().iter().enumerate() {
        den *= exact::factorial(a);
        for _ in 0..a {
            den *= exact::factorial(i + 1);
        }
    }
    exact::factorial(n) / den
}

pub fn r_alpha(alpha: &MultiIndex) -> u64 {
    r_alpha_big(alpha).to_u64().expect("R_α fits in u64 for weight ≤ 20")
}

fn check_norms(alpha: &MultiIndex, available: usize) -> Result<()> {
    if alpha.max_position() > available {
        return Err(Error::Range(format!(
            "α={alpha} needs norms up to order {}, have {available}",
            alpha.max_position()
        )));
    }
    Ok(())
}

/// `K_α = (n!/∏α_k!) ∏ (‖P_k‖²/(k!)²)^{α_k}`, exactly; `norms_sq[k-1] = ‖P_k‖²`.
pub fn k_alpha_exact(alpha: &MultiIndex, norms_sq: &[Rational]) -> Result<Rational> {
    check_norms(alpha, norms_sq.len())?;
    let n = alpha.weight();
    let mut out = exact::factorial_rat(n) / Rational::from_integer(alpha.factorial_product());
    for (i, &a) in alpha.entries().iter().enumerate() {
        let base = &norms_sq[i] / exact::rat_pow(&exact::factorial_rat(i + 1), 2);
        out *= exact::rat_pow(&base, a);
    }
    Ok(out)
}

pub fn k_alpha(alpha: &MultiIndex, norms_sq: &[Rational]) -> Result<f64> {
    Ok(exact::to_f64(&k_alpha_exact(alpha, norms_sq)?))
}

/// Meixner closed form `n! / ∏ α_k! k^{α_k}`.
pub fn k_alpha_meixner(alpha: &MultiIndex) -> Rational {
    let n = alpha.weight();
    let mut den = Rational::from_integer(alpha.factorial_product());
    for (i, &a) in alpha.entries().iter().enumerate() {
        den *= exact::rat_pow(&exact::int(i as i64 + 1), a);
    }
    exact::factorial_rat(n) / den
}

/// `C_α = ∏ ‖P_k‖^{2α_k}`.
pub fn c_alpha_exact(alpha: &MultiIndex, norms_sq: &[Rational]) -> Result<Rational> {
    check_norms(alpha, norms_sq.len())?;
    let mut out = Rational::one();
    for (i, &a) in alpha.entries().iter().enumerate() {
        out *= exact::rat_pow(&norms_sq[i], a);
    }
    Ok(out)
}

pub fn c_alpha(alpha: &MultiIndex, norms_sq: &[Rational]) -> Result<f64> {
    Ok(exact::to_f64(&c_alpha_exact(alpha, norms_sq)?))
}

/// `(D_α f)(x_1..x_{|α|})`: `f` with the j-th output coordinate repeated
/// according to its block size.
pub fn d_alpha_apply(alpha: &MultiIndex, f: &StepKernel) -> Result<StepKernel> {
    if f.order != alpha.weight() {
        return Err(Error::Mismatch(format!(
            "D_α with weight {} applied to order-{} kernel",
            alpha.weight(),
            f.order
        )));
    }
    let sizes = alpha.block_sizes();
    let mut src = vec![0usize; f.order];
    Ok(StepKernel::from_fn(sizes.len(), f.cells, |idx| {
        let mut pos = 0;
        for (j, &k) in sizes.iter().enumerate() {
            for _ in 0..k {
                src[pos] = idx[j];
                pos += 1;
            }
        }
        f.get(&src)
    }))
}

/// Canonical set partition of `0..n` whose blocks follow α's block sizes
/// over consecutive positions.
fn base_partition(alpha: &MultiIndex) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut pos = 0;
    for k in alpha.block_sizes() {
        out.push((pos..pos + k).collect());
        pos += k;
    }
    out
}

/// Number of distinct images of the α-sector under all permutations of
/// the coordinates; enumerated over `S_n`.
pub fn sector_count(alpha: &MultiIndex) -> Result<u64> {
    let n = alpha.weight();
    if n > SECTOR_MAX_WEIGHT {
        return Err(Error::Resource(format!(
            "sector enumeration over S_{n} exceeds weight bound {SECTOR_MAX_WEIGHT}"
        )));
    }
    let base = base_partition(alpha);
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    for perm in permutations(n) {
        let mut blocks: Vec<u32> = base
            .iter()
            .map(|b| b.iter().fold(0u32, |m, &i| m | (1 << perm[i])))
            .collect();
        blocks.sort_unstable();
        seen.insert(blocks);
    }
    Ok(seen.len() as u64)
}

/// Set partitions of `0..m` as lists of blocks, via restricted growth
/// strings (blocks ordered by their smallest element).
pub fn set_partitions(m: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; m];
    fn rec(i: usize, max: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == rgs.len() {
            let blocks = if rgs.is_empty() { 0 } else { max + 1 };
            let mut p = vec![Vec::new(); blocks];
            for (j, &b) in rgs.iter().enumerate() {
                p[b].push(j);
            }
            out.push(p);
            return;
        }
        let top = if i == 0 { 0 } else { max + 1 };
        for b in 0..=top {
            rgs[i] = b;
            rec(i + 1, max.max(b), rgs, out);
        }
    }
    rec(0, 0, &mut rgs, &mut out);
    out
}

/// `alpha,n,R,K,C` rows for every α of weight `1..=max_weight`.
pub fn coefficient_csv(max_weight: usize, norms_sq: &[Rational]) -> Result<String> {
    let mut out = String::from("alpha,n,R,K,C\n");
    for alpha in enumerate_up_to(max_weight) {
        let k = k_alpha_exact(&alpha, norms_sq)?;
        let c = c_alpha_exact(&alpha, norms_sq)?;
        out.push_str(&format!(
            "\"{alpha}\",{},{},{},{}\n",
            alpha.weight(),
            r_alpha_big(&alpha),
            k,
            c
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn weight_four_order() {
        let got = enumerate_weight(4);
        let want = vec![mi(&[4]), mi(&[2, 1]), mi(&[0, 2]), mi(&[1, 0, 1]), mi(&[0, 0, 0, 1])];
        assert_eq!(got, want);
        assert_eq!(enumerate_weight(0), vec![MultiIndex::empty()]);
        assert_eq!(enumerate_weight(1), vec![mi(&[1])]);
    }

    #[test]
    fn r_examples() {
        assert_eq!(r_alpha(&mi(&[2, 1])), 6);
        assert_eq!(r_alpha(&mi(&[0, 2])), 3);
        assert_eq!(r_alpha(&MultiIndex::unit(5)), 1);
    }

    #[test]
    fn trailing_zeros_trimmed() {
        assert_eq!(mi(&[1, 0, 0]), mi(&[1]));
        assert_eq!(mi(&[1, 0, 0]).to_string(), "(1)");
    }

    #[test]
    fn bell_numbers() {
        let bell: Vec<usize> = (0..7).map(|m| set_partitions(m).len()).collect();
        assert_eq!(bell, vec![1, 1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn sector_examples() {
        assert_eq!(sector_count(&mi(&[2, 1])).unwrap(), 6);
        assert_eq!(sector_count(&mi(&[0, 2])).unwrap(), 3);
        assert_eq!(sector_count(&mi(&[4])).unwrap(), 1);
        assert!(sector_count(&mi(&[9])).is_err());
    }

    #[test]
    fn d_alpha_examples() {
        let f = StepKernel::from_fn(3, 2, |i| (i[0] * 4 + i[1] * 2 + i[2]) as f64);
        let g = d_alpha_apply(&mi(&[1, 1]), &f).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(g.get(&[a, b]), f.get(&[a, b, b]));
            }
        }
        assert_eq!(d_alpha_apply(&mi(&[3]), &f).unwrap(), f);
        let phi = StepKernel::from_fn(1, 2, |i| [0.5, -2.0][i[0]]);
        let cube = d_alpha_apply(&mi(&[0, 0, 1]), &StepKernel::tensor_power(&phi, 3)).unwrap();
        assert_eq!(cube.values, vec![0.125, -8.0]);
    }
}
