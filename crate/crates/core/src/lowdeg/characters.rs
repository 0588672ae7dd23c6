use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{F2Matrix, F2Vector};
use crate::models::RlcParams;
use crate::noise::check_rho;

/// Default cap on `2^{mn + n + m}` configurations for exact expectations.
pub const DEFAULT_CHARACTER_BUDGET: u128 = 1 << 24;

/// Index of the character `chi_{S,T}(A, y) = prod_{(i,j) in S} (2 A_ij - 1) prod_{i in T} (2 y_i - 1)`.
/// Entries are 0-indexed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharacterIndex {
    #[serde(rename = "S")]
    pub s: Vec<(usize, usize)>,
    #[serde(rename = "T")]
    pub t: Vec<usize>,
}

impl CharacterIndex {
    pub fn new(mut s: Vec<(usize, usize)>, mut t: Vec<usize>) -> Self {
        s.sort_unstable();
        s.dedup();
        t.sort_unstable();
        t.dedup();
        CharacterIndex { s, t }
    }

    pub fn empty() -> Self {
        CharacterIndex {
            s: Vec::new(),
            t: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.s.len() + self.t.len()
    }

    pub fn validate(&self, params: &RlcParams) -> Result<()> {
        if self.s.iter().any(|&(i, j)| i >= params.m || j >= params.n) {
            return Err(Error::param("S", "entry outside [m] x [n]"));
        }
        if self.t.iter().any(|&i| i >= params.m) {
            return Err(Error::param("T", "entry outside [m]"));
        }
        Ok(())
    }

    pub fn eval(&self, a: &F2Matrix, y: &F2Vector) -> f64 {
        let mut negative = false;
        for &(i, j) in &self.s {
            negative ^= !a.get(i, j);
        }
        for &i in &self.t {
            negative ^= !y.get(i);
        }
        if negative {
            -1.0
        } else {
            1.0
        }
    }

    /// Sign as a parity over bit masks of `A` (row-major, bit `i n + j`) and `y`.
    fn masks(&self, n: usize) -> (u64, u64) {
        let a = self.s.iter().fold(0u64, |acc, &(i, j)| acc | 1 << (i * n + j));
        let y = self.t.iter().fold(0u64, |acc, &i| acc | 1 << i);
        (a, y)
    }
}

/// Exact `E[chi_1(A, y) chi_2(A, T_rho y)]` under the planted measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterExpectation {
    pub value: f64,
    /// Integer counts `c_w` such that `value = sum_w c_w (rho/2)^w (1 - rho/2)^{m-w} / 2^{mn+n}`.
    pub flip_counts: Vec<i64>,
    /// Whether `2 max(deg_1, deg_2) <= n`.
    pub within_degree_hypothesis: bool,
}

pub fn rlc_character_expectation(
    idx1: &CharacterIndex,
    idx2: &CharacterIndex,
    params: &RlcParams,
    rho: f64,
) -> Result<CharacterExpectation> {
    rlc_character_expectation_with_budget(idx1, idx2, params, rho, DEFAULT_CHARACTER_BUDGET)
}

/// Sums over every matrix `A`, message `x` and flip pattern `z` of the noise,
/// where each bit of `y` flips independently with probability `rho / 2`.
pub fn rlc_character_expectation_with_budget(
    idx1: &CharacterIndex,
    idx2: &CharacterIndex,
    params: &RlcParams,
    rho: f64,
    budget: u128,
) -> Result<CharacterExpectation> {
    params.validate()?;
    check_rho(rho)?;
    idx1.validate(params)?;
    idx2.validate(params)?;
    let (m, n) = (params.m, params.n);
    let log_configs = (m * n + n + m) as u32;
    let configs = 1u128.checked_shl(log_configs).unwrap_or(u128::MAX);
    if log_configs >= 64 || configs > budget {
        return Err(Error::budget("character enumeration", configs, budget));
    }
    let (a1, y1) = idx1.masks(n);
    let (a2, y2) = idx2.masks(n);
    let parity = |v: u64| v.count_ones() & 1;

    let mut counts = vec![0i64; m + 1];
    let row_mask = (1u64 << n) - 1;
    for a in 0u64..1 << (m * n) {
        // the A part of both characters
        let sign_a = parity(!a & a1) ^ parity(!a & a2);
        for x in 0u64..1 << n {
            let mut y = 0u64;
            for i in 0..m {
                let row = (a >> (i * n)) & row_mask;
                y |= ((parity(row & x)) as u64) << i;
            }
            let sign_y1 = parity(!y & y1);
            for z in 0u64..1 << m {
                let noisy = y ^ z;
                let s = sign_a ^ sign_y1 ^ parity(!noisy & y2);
                counts[z.count_ones() as usize] += if s == 0 { 1 } else { -1 };
            }
        }
    }

    let p = rho / 2.0;
    let value = counts
        .iter()
        .enumerate()
        .map(|(w, &c)| c as f64 * p.powi(w as i32) * (1.0 - p).powi((m - w) as i32))
        .sum::<f64>()
        / 2f64.powi((m * n + n) as i32);
    Ok(CharacterExpectation {
        value,
        flip_counts: counts,
        within_degree_hypothesis: 2 * idx1.degree().max(idx2.degree()) <= n,
    })
}

/// Every character index with degree at most `max_degree`.
pub fn all_character_indices(params: &RlcParams, max_degree: usize) -> Vec<CharacterIndex> {
    let (m, n) = (params.m, params.n);
    let cells: Vec<Option<(usize, usize)>> = (0..m)
        .flat_map(|i| (0..n).map(move |j| Some((i, j))))
        .chain((0..m).map(|_| None))
        .collect();
    let mut out = Vec::new();
    for d in 0..=max_degree.min(cells.len()) {
        for combo in crate::stats::Combinations::new(cells.len(), d) {
            let mut s = Vec::new();
            let mut t = Vec::new();
            for c in combo {
                match cells[c] {
                    Some(cell) => s.push(cell),
                    None => t.push(c - m * n),
                }
            }
            out.push(CharacterIndex::new(s, t));
        }
    }
    out
}
