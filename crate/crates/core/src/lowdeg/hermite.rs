use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `|alpha|` for diagram sums.
pub const DEFAULT_DIAGRAM_CAP: u32 = 10;

/// Orthonormal probabilists' Hermite polynomial `He_n(x) / sqrt(n!)`.
pub fn hermite_eval(n: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = x;
    for j in 1..n {
        let j = j as f64;
        let next = (x * cur - j.sqrt() * prev) / (j + 1.0).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// `h_0(x), ..., h_n(x)`.
pub fn hermite_all(n: u32, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for j in 1..n as usize {
        let jf = j as f64;
        let next = (x * out[j] - jf.sqrt() * out[j - 1]) / (jf + 1.0).sqrt();
        out.push(next);
    }
    out
}

/// `E[prod_i h_{alpha_i}(X_i)]` for `X ~ N(mu, R)` with unit-diagonal `R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramSpec {
    pub alpha: Vec<u32>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
}

impl DiagramSpec {
    pub fn centered(alpha: Vec<u32>, r: Vec<Vec<f64>>) -> Self {
        let k = alpha.len();
        DiagramSpec {
            alpha,
            r,
            mu: vec![0.0; k],
        }
    }

    pub fn degree(&self) -> u32 {
        self.alpha.iter().sum()
    }

    pub fn validate(&self, cap: u32) -> Result<()> {
        let k = self.alpha.len();
        if self.mu.len() != k || self.r.len() != k || self.r.iter().any(|row| row.len() != k) {
            return Err(Error::param("R", "alpha, R and mu must have matching sizes"));
        }
        for i in 0..k {
            if self.r[i][i] != 1.0 {
                return Err(Error::param("R", format!("diagonal entry {i} is not 1")));
            }
            for j in 0..i {
                if self.r[i][j] != self.r[j][i] {
                    return Err(Error::param("R", "matrix is not symmetric"));
                }
            }
        }
        let deg = self.degree();
        if deg > cap {
            return Err(Error::budget("diagram degree", deg as u128, cap as u128));
        }
        Ok(())
    }
}

pub fn diagram_expectation(spec: &DiagramSpec) -> Result<f64> {
    diagram_expectation_with_cap(spec, DEFAULT_DIAGRAM_CAP)
}

/// Sum over matchings of the multigraph with `alpha_i` vertices of colour
/// `i`, edges only between distinct colours: each matched edge contributes
/// `R_ij`, each unmatched vertex `mu_i`. Normalised by `1/sqrt(alpha!)`.
pub fn diagram_expectation_with_cap(spec: &DiagramSpec, cap: u32) -> Result<f64> {
    spec.validate(cap)?;
    let centered = spec.mu.iter().all(|&m| m == 0.0);
    if centered && spec.degree() % 2 == 1 {
        return Ok(0.0);
    }
    let mut memo: HashMap<Vec<u32>, f64> = HashMap::new();
    let total = matchings(&spec.alpha, spec, &mut memo);
    let norm: f64 = spec
        .alpha
        .iter()
        .map(|&a| (1..=a).map(|j| j as f64).product::<f64>())
        .product();
    Ok(total / norm.sqrt())
}

fn matchings(c: &[u32], spec: &DiagramSpec, memo: &mut HashMap<Vec<u32>, f64>) -> f64 {
    let Some(i) = c.iter().position(|&v| v > 0) else {
        return 1.0;
    };
    if let Some(&v) = memo.get(c) {
        return v;
    }
    let mut rest = c.to_vec();
    rest[i] -= 1;
    // the first remaining vertex of colour i is either unmatched ...
    let mut total = if spec.mu[i] != 0.0 {
        spec.mu[i] * matchings(&rest, spec, memo)
    } else {
        0.0
    };
    // ... or matched to one of the c_j vertices of another colour
    for j in 0..c.len() {
        if j != i && rest[j] > 0 && spec.r[i][j] != 0.0 {
            let cj = rest[j] as f64;
            rest[j] -= 1;
            total += cj * spec.r[i][j] * matchings(&rest, spec, memo);
            rest[j] += 1;
        }
    }
    memo.insert(c.to_vec(), total);
    total
}
