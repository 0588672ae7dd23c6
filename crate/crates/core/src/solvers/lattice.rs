//! Integral LLL reduction and the subset-sum lattice.
//!
//! The reduction keeps the Gram-Schmidt data as integers
//! `d_j = prod_{i <= j} |b*_i|^2` and `lambda_{k,j} = d_j mu_{k,j}`, so no
//! rounding happens anywhere.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nonnegative rational `num / den` used for the Lovász parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Self {
        Rational { num, den }
    }

    /// Exact value of `x` for `x` in `[1/4, 1]`.
    pub fn from_f64(x: f64) -> Self {
        // every double in [1/4, 1] is an integer multiple of 2^-54
        let num = (x * (1u64 << 60) as f64) as u64;
        Rational {
            num,
            den: 1u64 << 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LllConfig {
    pub delta: f64,
    /// Fixed-point precision used to scale the reals.
    pub bits: u32,
    /// Rounding tolerance in units of `2^-(bits - 2)`; `None` means `N`.
    #[serde(default)]
    pub slack: Option<u64>,
}

impl Default for LllConfig {
    fn default() -> Self {
        LllConfig {
            delta: 0.75,
            bits: 128,
            slack: None,
        }
    }
}

impl LllConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.25 && self.delta < 1.0) {
            return Err(Error::param("delta", format!("need 1/4 < delta < 1, got {}", self.delta)));
        }
        if self.bits < 16 {
            return Err(Error::param("bits", format!("need bits >= 16, got {}", self.bits)));
        }
        Ok(())
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn nearest(num: &BigInt, den: &BigInt) -> BigInt {
    // floor(num / den + 1/2) for den > 0
    let two = BigInt::from(2);
    (num * &two + den).div_floor(&(den * two))
}

/// LLL-reduces `basis` with a floating Lovász parameter.
pub fn lll_reduce(basis: &[Vec<BigInt>], delta: f64) -> Result<Vec<Vec<BigInt>>> {
    if !(delta > 0.25 && delta < 1.0) {
        return Err(Error::param("delta", format!("need 1/4 < delta < 1, got {delta}")));
    }
    lll_reduce_with(basis, Rational::from_f64(delta))
}

/// LLL-reduces `basis` (rows) with an exact rational Lovász parameter.
pub fn lll_reduce_with(basis: &[Vec<BigInt>], delta: Rational) -> Result<Vec<Vec<BigInt>>> {
    let n = basis.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let dim = basis[0].len();
    if basis.iter().any(|b| b.len() != dim) {
        return Err(Error::param("basis", "rows have different lengths"));
    }
    if n > dim {
        return Err(Error::Degenerate(format!("{n} vectors in dimension {dim}")));
    }
    let p = BigInt::from(delta.num);
    let q = BigInt::from(delta.den);

    // 1-based indexing for b, d and lambda; d[0] = 1
    let mut b: Vec<Vec<BigInt>> = std::iter::once(Vec::new()).chain(basis.iter().cloned()).collect();
    let mut d: Vec<BigInt> = vec![BigInt::zero(); n + 1];
    let mut lam: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n + 1]; n + 1];
    d[0] = BigInt::one();
    d[1] = dot(&b[1], &b[1]);
    if d[1].is_zero() {
        return Err(Error::Degenerate("zero vector in basis".into()));
    }
    if n == 1 {
        return Ok(basis.to_vec());
    }

    let mut k = 2;
    let mut kmax = 1;
    while k <= n {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = dot(&b[k], &b[j]);
                for i in 1..j {
                    u = (&d[i] * &u - &lam[k][i] * &lam[j][i]) / &d[i - 1];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    if u.is_zero() {
                        return Err(Error::Degenerate(format!("row {} is dependent", k - 1)));
                    }
                    d[k] = u;
                }
            }
        }
        loop {
            reduce(k, k - 1, &mut b, &d, &mut lam);
            let l = &lam[k][k - 1];
            let lhs = &q * &d[k] * &d[k - 2];
            let rhs = &p * &d[k - 1] * &d[k - 1] - &q * l * l;
            if lhs < rhs {
                swap(k, kmax, &mut b, &mut d, &mut lam);
                k = (k - 1).max(2);
            } else {
                for l in (1..k - 1).rev() {
                    reduce(k, l, &mut b, &d, &mut lam);
                }
                k += 1;
                break;
            }
        }
    }
    b.remove(0);
    Ok(b)
}

fn reduce(k: usize, l: usize, b: &mut [Vec<BigInt>], d: &[BigInt], lam: &mut [Vec<BigInt>]) {
    let twice: BigInt = &lam[k][l] * 2;
    if twice.abs() <= d[l] {
        return;
    }
    let r = nearest(&lam[k][l], &d[l]);
    let (head, tail) = b.split_at_mut(k);
    for (x, y) in tail[0].iter_mut().zip(&head[l]) {
        *x -= &r * y;
    }
    lam[k][l] -= &r * &d[l];
    for i in 1..l {
        let t = &r * &lam[l][i];
        lam[k][i] -= t;
    }
}

fn swap(k: usize, kmax: usize, b: &mut [Vec<BigInt>], d: &mut [BigInt], lam: &mut [Vec<BigInt>]) {
    b.swap(k, k - 1);
    for j in 1..k - 1 {
        let t = std::mem::take(&mut lam[k][j]);
        lam[k][j] = std::mem::replace(&mut lam[k - 1][j], t);
    }
    let l = lam[k][k - 1].clone();
    let big_b = (&d[k - 2] * &d[k] + &l * &l) / &d[k - 1];
    for i in k + 1..=kmax {
        let t = lam[i][k].clone();
        lam[i][k] = (&d[k] * &lam[i][k - 1] - &l * &t) / &d[k - 1];
        lam[i][k - 1] = (&big_b * &t + &l * &lam[i][k]) / &d[k];
    }
    d[k - 1] = big_b;
}

/// Largest precision at which `round(Y 2^B)` still differs from the exact
/// sum of the scaled terms by at most about one unit, given that `Y` carries
/// f64 rounding error from its own summation.
fn effective_bits(x: &[f64], k: usize, bits: u32) -> u32 {
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let top: f64 = mags.iter().take(k).sum();
    let scale = (k as f64 * top).max(f64::MIN_POSITIVE);
    let cap = (53.0 - scale.log2()).floor();
    (cap.max(1.0) as u32).min(bits)
}

/// Embedding basis for `sum_{i in S} X_i = Y, |S| = k` at precision `bits`.
///
/// Rows `0..N` are `(e_i, a_i, W)` and the last row is `(0, t, W k)`, with
/// `a_i = round(X_i 2^bits)`, `t = round(Y 2^bits)` and `W = 2^ceil(bits/2)`.
pub fn subset_sum_basis(x: &[f64], y: f64, k: usize, bits: u32) -> Vec<Vec<BigInt>> {
    let n = x.len();
    let scale = 2f64.powi(bits as i32);
    let to_int = |v: f64| -> BigInt {
        // v * 2^bits is exact in binary; rounding only affects the fraction
        BigInt::from_f64((v * scale).round()).unwrap_or_default()
    };
    let w = BigInt::one() << bits.div_ceil(2);
    let mut rows = Vec::with_capacity(n + 1);
    for (i, &xi) in x.iter().enumerate() {
        let mut r = vec![BigInt::zero(); n + 2];
        r[i] = BigInt::one();
        r[n] = to_int(xi);
        r[n + 1] = w.clone();
        rows.push(r);
    }
    let mut last = vec![BigInt::zero(); n + 2];
    last[n] = to_int(y);
    last[n + 1] = &w * BigInt::from(k);
    rows.push(last);
    rows
}

fn within_tolerance(x: &[f64], y: f64, subset: &[usize], tol: f64) -> bool {
    (crate::models::subset_sum(x, subset) - y).abs() <= tol
}

/// Searches for a `k`-subset whose sum matches `y` by reducing the
/// subset-sum lattice and reading 0/±1 patterns off the reduced rows.
pub fn lll_subset_sum(x: &[f64], y: f64, k: usize, config: &LllConfig) -> Result<Option<Vec<usize>>> {
    config.validate()?;
    let n = x.len();
    if k == 0 || k > n {
        return Err(Error::param("k", format!("need 1 <= k <= N = {n}, got {k}")));
    }
    let slack = config.slack.unwrap_or(n as u64) as f64;
    let tol = slack * 2f64.powi(2 - config.bits as i32);

    if k == 1 {
        return Ok((0..n).find(|&i| within_tolerance(x, y, &[i], tol)).map(|i| vec![i]));
    }
    if k == n {
        let all: Vec<usize> = (0..n).collect();
        return Ok(within_tolerance(x, y, &all, tol).then_some(all));
    }

    let bits = effective_bits(x, k, config.bits);
    let basis = subset_sum_basis(x, y, k, bits);
    let reduced = match lll_reduce(&basis, config.delta) {
        Ok(r) => r,
        Err(Error::Degenerate(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let one = BigInt::one();
    let minus_one = -BigInt::one();
    for v in &reduced {
        for sign in [&one, &minus_one] {
            if v[..n].iter().any(|c| !c.is_zero() && c != sign) {
                continue;
            }
            let subset: Vec<usize> = (0..n).filter(|&i| !v[i].is_zero()).collect();
            if subset.len() == k && within_tolerance(x, y, &subset, tol) {
                return Ok(Some(subset));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect()
    }

    #[test]
    fn identity_unchanged() {
        let basis = ints(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(lll_reduce(&basis, 0.75).unwrap(), basis);
    }

    #[test]
    fn two_dimensional_example() {
        let basis = ints(&[&[2, 0], &[1, 1]]);
        assert_eq!(lll_reduce(&basis, 0.75).unwrap(), ints(&[&[1, 1], &[1, -1]]));
    }

    #[test]
    fn dependent_rows_rejected() {
        let basis = ints(&[&[1, 2, 3], &[2, 4, 6]]);
        assert!(matches!(lll_reduce(&basis, 0.75), Err(Error::Degenerate(_))));
        assert!(lll_reduce(&ints(&[&[1, 0], &[0, 1]]), 1.0).is_err());
    }

    #[test]
    fn exact_delta() {
        assert_eq!(Rational::from_f64(0.75), Rational::new(3 << 58, 1 << 60));
    }

    #[test]
    fn single_element_scan() {
        let x = [0.5, -1.25, 2.0, 3.5];
        let got = lll_subset_sum(&x, 2.0, 1, &LllConfig::default()).unwrap();
        assert_eq!(got, Some(vec![2]));
    }
}
