//! Monic orthogonal polynomials `P̃_n` of the tilted measure and the Teugels
//! polynomials `P_n(s) = s·P̃_{n-1}(s)`.
//!
//! Everything is held twice: as exact rationals, which is where the
//! recurrence is computed, and as floats for evaluation.

use std::fmt::Write as _;

use num::traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::levy_models::LevyModel;

/// Default cap on the recurrence order; norms grow like `n!²` beyond it.
pub const DEFAULT_MAX_ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceTable {
    pub max_order: usize,
    /// `a_0, …, a_{N-1}`
    pub a_exact: Vec<Rational>,
    /// `b_0, …, b_{N-1}`, with `b_0 = moment(0)` by convention.
    pub b_exact: Vec<Rational>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Ascending coefficients of `P̃_0, …, P̃_N`.
    pub ptilde_coeffs_exact: Vec<Vec<Rational>>,
    pub ptilde_coeffs: Vec<Vec<f64>>,
    /// `‖P_n‖²_{L²(ν)}` for `n = 1..=N`, stored at index `n-1`.
    pub norms_sq_exact: Vec<Rational>,
    pub norms_sq: Vec<f64>,
}

impl RecurrenceTable {
    /// Build from exact recurrence coefficients.
    pub fn from_coefficients(a: Vec<Rational>, b: Vec<Rational>) -> Result<RecurrenceTable> {
        let n = a.len();
        if n == 0 || b.len() != n {
            return Err(Error::Mismatch(format!("need N ≥ 1 and |a| = |b|, got {} and {}", a.len(), b.len())));
        }
        if let Some(k) = b.iter().position(|x| !x.is_positive()) {
            return Err(Error::Degenerate { order: k });
        }
        let mut pt: Vec<Vec<Rational>> = vec![vec![Rational::one()]];
        for k in 0..n {
            // P̃_{k+1} = (s - a_k) P̃_k - b_k P̃_{k-1}
            let mut next = vec![Rational::zero(); k + 2];
            for (i, c) in pt[k].iter().enumerate() {
                next[i + 1] += c;
                next[i] -= &a[k] * c;
            }
            if k >= 1 {
                for (i, c) in pt[k - 1].iter().enumerate() {
                    next[i] -= &b[k] * c;
                }
            }
            pt.push(next);
        }
        let mut norms = Vec::with_capacity(n);
        let mut acc = Rational::one();
        for bk in &b {
            acc *= bk;
            norms.push(acc.clone());
        }
        Ok(RecurrenceTable {
            max_order: n,
            a: a.iter().map(exact::to_f64).collect(),
            b: b.iter().map(exact::to_f64).collect(),
            ptilde_coeffs: pt.iter().map(|row| row.iter().map(exact::to_f64).collect()).collect(),
            norms_sq: norms.iter().map(exact::to_f64).collect(),
            a_exact: a,
            b_exact: b,
            ptilde_coeffs_exact: pt,
            norms_sq_exact: norms,
        })
    }

    /// Coefficients of `P_n = s·P̃_{n-1}` for `n = 1..=N+1`.
    pub fn p_coeffs_exact(&self, n: usize) -> Result<Vec<Rational>> {
        self.check_p_order(n)?;
        let mut out = vec![Rational::zero()];
        out.extend(self.ptilde_coeffs_exact[n - 1].iter().cloned());
        Ok(out)
    }

    pub fn p_coeffs(&self, n: usize) -> Result<Vec<f64>> {
        Ok(self.p_coeffs_exact(n)?.iter().map(exact::to_f64).collect())
    }

    fn check_p_order(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.max_order + 1 {
            return Err(Error::Range(format!("P_{n} outside 1..={}", self.max_order + 1)));
        }
        Ok(())
    }

    /// `‖P_n‖²` for `1 ≤ n ≤ N`.
    pub fn norm_sq(&self, n: usize) -> f64 {
        self.norms_sq[n - 1]
    }

    pub fn norm_sq_exact(&self, n: usize) -> &Rational {
        &self.norms_sq_exact[n - 1]
    }

    /// `P̃_0(s), …, P̃_upto(s)` by the recurrence.
    pub fn ptilde_values(&self, s: f64, upto: usize) -> Vec<f64> {
        assert!(upto <= self.max_order, "P̃_{upto} beyond table order {}", self.max_order);
        let mut out = Vec::with_capacity(upto + 1);
        out.push(1.0);
        if upto >= 1 {
            out.push(s - self.a[0]);
        }
        for k in 1..upto {
            let next = (s - self.a[k]) * out[k] - self.b[k] * out[k - 1];
            out.push(next);
        }
        out
    }

    /// `P_1(s), …, P_upto(s)` at index `n-1`.
    pub fn p_values(&self, s: f64, upto: usize) -> Vec<f64> {
        if upto == 0 {
            return Vec::new();
        }
        self.ptilde_values(s, upto - 1).into_iter().map(|v| s * v).collect()
    }

    pub fn p_eval(&self, n: usize, s: f64) -> f64 {
        s * self.ptilde_values(s, n - 1)[n - 1]
    }

    /// Recurrence and coefficient table as CSV: one row per `n`, with the
    /// ascending coefficients of `P̃_n` in the trailing columns.
    pub fn to_csv(&self) -> String {
        let n = self.max_order;
        let mut out = String::from("n,a_n,b_n,norm_sq_n");
        for i in 0..=n {
            let _ = write!(out, ",c{i}");
        }
        out.push('\n');
        for k in 0..n {
            let _ = write!(out, "{k},{},{},{}", self.a[k], self.b[k], self.norms_sq[k]);
            for i in 0..=n {
                let c = self.ptilde_coeffs[k].get(i).copied().unwrap_or(0.0);
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }
}

/// Meixner recurrence `a_n = λ(n+1)`, `b_n = n(n+1)`, `b_0 = 1`.
pub fn from_meixner(lambda: f64, n: usize) -> Result<RecurrenceTable> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!("lambda must be nonnegative, got {lambda}")));
    }
    if n == 0 {
        return Err(Error::Domain("order N must be positive".into()));
    }
    let l = exact::from_f64(lambda);
    let a = (0..n).map(|k| &l * exact::int(k as i64 + 1)).collect();
    let b = (0..n)
        .map(|k| if k == 0 { Rational::one() } else { exact::int((k * (k + 1)) as i64) })
        .collect();
    RecurrenceTable::from_coefficients(a, b)
}

/// Chebyshev's algorithm on exact moments `m_0, …, m_{2N}`.
pub fn from_moments(moments: &[Rational], n: usize) -> Result<RecurrenceTable> {
    if n == 0 {
        return Err(Error::Domain("order N must be positive".into()));
    }
    let len = 2 * n + 1;
    if moments.len() < len {
        return Err(Error::Domain(format!("need {len} moments for order {n}, got {}", moments.len())));
    }
    if !moments[0].is_positive() {
        return Err(Error::Degenerate { order: 0 });
    }
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    a.push(&moments[1] / &moments[0]);
    b.push(moments[0].clone());
    let mut prev2 = vec![Rational::zero(); len];
    let mut prev: Vec<Rational> = moments[..len].to_vec();
    for k in 1..=n {
        let mut cur = vec![Rational::zero(); len];
        for l in k..=(2 * n - k) {
            let mut v = &prev[l + 1] - &a[k - 1] * &prev[l];
            if k >= 2 {
                v -= &b[k - 1] * &prev2[l];
            }
            cur[l] = v;
        }
        if !cur[k].is_positive() {
            return Err(Error::Degenerate { order: k });
        }
        if k < n {
            a.push(&cur[k + 1] / &cur[k] - &prev[k] / &prev[k - 1]);
            b.push(&cur[k] / &prev[k - 1]);
        }
        prev2 = prev;
        prev = cur;
    }
    RecurrenceTable::from_coefficients(a, b)
}

/// Recurrence table of a model through its exact moments.
pub fn from_model(model: &LevyModel, n: usize) -> Result<RecurrenceTable> {
    let moments = model.exact_tilted_moments(2 * n + 1)?;
    from_moments(&moments, n)
}

/// `(a_{m,1}, …, a_{m,m-1})`: the non-leading coefficients of `P_m`.
pub fn teugels_coeffs(table: &RecurrenceTable, m: usize) -> Result<Vec<f64>> {
    if m == 0 || m > table.max_order {
        return Err(Error::Range(format!("m={m} outside 1..={}", table.max_order)));
    }
    let p = table.p_coeffs(m)?;
    Ok(p[1..m].to_vec())
}

/// `∫_{|s|>ε} P_m(s) ν(ds)` at the model's truncation.
pub fn compensator(model: &LevyModel, table: &RecurrenceTable, m: usize) -> Result<f64> {
    compensator_eps(model, table, m, model.truncation_eps)
}

pub fn compensator_eps(model: &LevyModel, table: &RecurrenceTable, m: usize, eps: f64) -> Result<f64> {
    table.check_p_order(m)?;
    model.nu_integral(eps, |s| table.p_eval(m, s), 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meixner_gamma_small() {
        let t = from_meixner(2.0, 3).unwrap();
        assert_eq!(t.a, vec![2.0, 4.0, 6.0]);
        assert_eq!(&t.b[1..], &[2.0, 6.0]);
        assert_eq!(t.ptilde_coeffs[1], vec![-2.0, 1.0]);
        assert_eq!(t.ptilde_coeffs[2], vec![6.0, -6.0, 1.0]);
        assert_eq!(teugels_coeffs(&t, 3).unwrap(), vec![6.0, -6.0]);
        assert!(teugels_coeffs(&t, 1).unwrap().is_empty());
    }

    #[test]
    fn lambda_zero() {
        let t = from_meixner(0.0, 2).unwrap();
        assert_eq!(t.a, vec![0.0, 0.0]);
        assert_eq!(t.b[1], 2.0);
        assert_eq!(t.ptilde_coeffs[1], vec![0.0, 1.0]);
    }

    #[test]
    fn hermite_from_normal_moments() {
        // 1, 0, 1, 0, 3, 0, 15, ...
        let moments: Vec<Rational> = (0..13)
            .map(|k| {
                if k % 2 == 1 {
                    Rational::zero()
                } else {
                    let mut df = 1i64;
                    let mut j = k as i64 - 1;
                    while j > 1 {
                        df *= j;
                        j -= 2;
                    }
                    exact::int(df)
                }
            })
            .collect();
        let t = from_moments(&moments, 6).unwrap();
        for k in 0..6 {
            assert_eq!(t.a_exact[k], Rational::zero());
            if k > 0 {
                assert_eq!(t.b_exact[k], exact::int(k as i64));
            }
        }
    }

    #[test]
    fn two_point_measure_is_degenerate() {
        // ν̃ = ½(δ_1 + δ_2): only two orthogonal polynomials exist.
        let moments: Vec<Rational> =
            (0..7).map(|k| Rational::new((1i64 + (1 << k)).into(), 2.into())).collect();
        assert_eq!(from_moments(&moments, 3), Err(Error::Degenerate { order: 2 }));
    }
}
