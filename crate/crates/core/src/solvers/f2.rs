use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{F2Matrix, F2Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F2SolutionKind {
    Unique,
    Affine,
    Inconsistent,
}

/// Solution set of `A x = y` over GF(2): `particular + span(nullspace_basis)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct F2Solution {
    pub kind: F2SolutionKind,
    pub particular: Option<F2Vector>,
    pub nullspace_basis: Vec<F2Vector>,
    pub rank: usize,
}

impl F2Solution {
    pub fn contains(&self, a: &F2Matrix, v: &F2Vector, y: &F2Vector) -> bool {
        self.kind != F2SolutionKind::Inconsistent && a.mul_vec(v) == *y
    }

    /// Number of solutions, saturating at `u128::MAX`.
    pub fn solution_count(&self) -> u128 {
        match self.kind {
            F2SolutionKind::Inconsistent => 0,
            _ => 1u128.checked_shl(self.nullspace_basis.len() as u32).unwrap_or(u128::MAX),
        }
    }
}

/// Gauss-Jordan elimination on the augmented matrix `[A | y]`.
pub fn f2_solve(a: &F2Matrix, y: &F2Vector) -> Result<F2Solution> {
    let (m, n) = (a.nrows(), a.ncols());
    if y.len() != m {
        return Err(Error::param(
            "y",
            format!("length {} does not match {} rows", y.len(), m),
        ));
    }
    let mut rows: Vec<F2Vector> = (0..m)
        .map(|i| {
            let mut r = F2Vector::zeros(n + 1);
            for j in 0..n {
                if a.get(i, j) {
                    r.set(j, true);
                }
            }
            r.set(n, y.get(i));
            r
        })
        .collect();

    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..m).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot);
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == m {
            break;
        }
    }

    if rows[rank..].iter().any(|r| r.get(n)) {
        return Ok(F2Solution {
            kind: F2SolutionKind::Inconsistent,
            particular: None,
            nullspace_basis: Vec::new(),
            rank,
        });
    }

    let mut particular = F2Vector::zeros(n);
    for (r, &c) in pivots.iter().enumerate() {
        particular.set(c, rows[r].get(n));
    }
    let mut is_pivot = vec![false; n];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let nullspace_basis: Vec<F2Vector> = (0..n)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = F2Vector::zeros(n);
            v.set(f, true);
            for (r, &c) in pivots.iter().enumerate() {
                v.set(c, rows[r].get(f));
            }
            v
        })
        .collect();
    let kind = if nullspace_basis.is_empty() {
        F2SolutionKind::Unique
    } else {
        F2SolutionKind::Affine
    };
    Ok(F2Solution {
        kind,
        particular: Some(particular),
        nullspace_basis,
        rank,
    })
}
