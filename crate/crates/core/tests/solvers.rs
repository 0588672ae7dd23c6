//! Solvers against exact rational arithmetic and exhaustive search.

use mmse_workbench::gf2::{F2Matrix, F2Vector};
use mmse_workbench::models::{sample_erdos_renyi, sample_gss, subset_sum, Graph};
use mmse_workbench::rng;
use mmse_workbench::rng::Stream;
use mmse_workbench::solvers::{
    bfs_distances, f2_solve, lll_reduce, lll_reduce_with, lll_subset_sum, shortest_path_between, subset_sum_basis,
    F2SolutionKind, LllConfig, Rational,
};
use mmse_workbench::stats::Combinations;
use mmse_workbench::GssParams;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

type Q = BigRational;

fn to_q(rows: &[Vec<BigInt>]) -> Vec<Vec<Q>> {
    rows.iter().map(|r| r.iter().map(|v| Q::from_integer(v.clone())).collect()).collect()
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).fold(Q::zero(), |s, t| s + t)
}

/// Exact Gram-Schmidt: orthogonal vectors and the `mu` coefficients.
fn gram_schmidt(b: &[Vec<Q>]) -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
    let n = b.len();
    let mut star: Vec<Vec<Q>> = Vec::with_capacity(n);
    let mut mu = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        let mut v = b[i].clone();
        for j in 0..i {
            mu[i][j] = dot(&b[i], &star[j]) / dot(&star[j], &star[j]);
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= &mu[i][j] * sk;
            }
        }
        star.push(v);
    }
    (star, mu)
}

/// Coefficients `c` with `c B = v`, if `v` lies in the rational row space.
fn solve_in_span(b: &[Vec<Q>], v: &[Q]) -> Option<Vec<Q>> {
    // augmented system B^T c = v, eliminated column by column
    let (r, cols) = (b.len(), v.len());
    let mut m: Vec<Vec<Q>> = (0..cols)
        .map(|j| {
            let mut row: Vec<Q> = (0..r).map(|i| b[i][j].clone()).collect();
            row.push(v[j].clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..r {
        let Some(p) = (row..cols).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(row, p);
        let inv = Q::one() / &m[row][c];
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        for i in 0..cols {
            if i != row && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..=r {
                    let t = &f * &m[row][k];
                    m[i][k] -= t;
                }
            }
        }
        pivots.push(c);
        row += 1;
    }
    if m[row..].iter().any(|l| !l[r].is_zero()) {
        return None;
    }
    let mut c = vec![Q::zero(); r];
    for (i, &p) in pivots.iter().enumerate() {
        c[p] = m[i][r].clone();
    }
    Some(c)
}

fn same_lattice(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> bool {
    let (qa, qb) = (to_q(a), to_q(b));
    let inside = |from: &[Vec<Q>], to: &[Vec<Q>]| {
        to.iter().all(|v| solve_in_span(from, v).is_some_and(|c| c.iter().all(|x| x.is_integer())))
    };
    a.len() == b.len() && inside(&qa, &qb) && inside(&qb, &qa)
}

fn assert_reduced(b: &[Vec<BigInt>], delta: Q) {
    let (star, mu) = gram_schmidt(&to_q(b));
    let half = Q::new(1.into(), 2.into());
    for i in 0..b.len() {
        for j in 0..i {
            assert!(mu[i][j].abs() <= half, "mu[{i}][{j}] = {}", mu[i][j]);
        }
        if i > 0 {
            let lhs = dot(&star[i], &star[i]);
            let rhs = (&delta - &mu[i][i - 1] * &mu[i][i - 1]) * dot(&star[i - 1], &star[i - 1]);
            assert!(lhs >= rhs, "Lovasz condition fails at {i}");
        }
    }
}

fn basis_strategy() -> impl Strategy<Value = Vec<Vec<BigInt>>> {
    (2usize..=5).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(-50i64..=50, n), n)
            .prop_map(|rows| rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect())
    })
}

fn independent(b: &[Vec<BigInt>]) -> bool {
    gram_schmidt(&to_q(b)).0.iter().all(|v| v.iter().any(|x| !x.is_zero()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lll_preserves_lattice_and_reduces(b in basis_strategy()) {
        prop_assume!(independent(&b));
        let out = lll_reduce(&b, 0.75).unwrap();
        prop_assert!(same_lattice(&b, &out));
        assert_reduced(&out, Q::new(3.into(), 4.into()));
    }

    #[test]
    fn lll_exact_delta_near_one(b in basis_strategy()) {
        prop_assume!(independent(&b));
        let delta = Rational::new(99, 100);
        let out = lll_reduce_with(&b, delta).unwrap();
        prop_assert!(same_lattice(&b, &out));
        assert_reduced(&out, Q::new(99.into(), 100.into()));
    }

    #[test]
    fn f2_solutions_verify(rows in prop::collection::vec(prop::collection::vec(any::<bool>(), 6), 1..9),
                           x in prop::collection::vec(any::<bool>(), 6)) {
        let a = F2Matrix::from_bool_rows(&rows);
        let y = a.mul_vec(&F2Vector::from_bits(&x));
        let s = f2_solve(&a, &y).unwrap();
        prop_assert_ne!(s.kind, F2SolutionKind::Inconsistent);
        prop_assert_eq!(s.rank + s.nullspace_basis.len(), 6);
        let p = s.particular.clone().unwrap();
        prop_assert_eq!(a.mul_vec(&p), y.clone());
        for v in &s.nullspace_basis {
            prop_assert!(a.mul_vec(v).is_zero());
            let mut shifted = p.clone();
            shifted.xor_assign(v);
            prop_assert!(s.contains(&a, &shifted, &y));
        }
    }
}

#[test]
fn embedding_contains_planted_short_vector() {
    let p = GssParams::new(10, 3).unwrap();
    let inst = sample_gss(&p, 4).unwrap();
    let bits = 40;
    let basis = subset_sum_basis(&inst.x, inst.y, 3, bits);
    // sum of planted rows minus the target row
    let mut v = vec![BigInt::zero(); 12];
    for &i in &inst.support {
        for (c, b) in v.iter_mut().zip(&basis[i]) {
            *c += b;
        }
    }
    for (c, b) in v.iter_mut().zip(&basis[10]) {
        *c -= b;
    }
    assert!(v[11].is_zero());
    assert!(v[10].abs() <= BigInt::from(4));
    assert_eq!(v[..10].iter().filter(|c| c.is_one()).count(), 3);
}

#[test]
fn lll_subset_sum_agrees_with_exhaustive_search() {
    let p = GssParams::new(14, 4).unwrap();
    let mut ok = 0;
    for t in 0..30 {
        let inst = sample_gss(&p, 100 + t).unwrap();
        let exact: Vec<Vec<usize>> = Combinations::new(14, 4).filter(|s| subset_sum(&inst.x, s) == inst.y).collect();
        assert_eq!(exact, vec![inst.support.clone()]);
        if lll_subset_sum(&inst.x, inst.y, 4, &LllConfig::default()).unwrap() == Some(inst.support.clone()) {
            ok += 1;
        }
    }
    assert!(ok >= 28, "{ok}/30");
}

#[test]
fn lll_subset_sum_edge_cardinalities() {
    let x = [0.5, -1.25, 2.0, 0.75];
    let cfg = LllConfig::default();
    assert_eq!(lll_subset_sum(&x, 2.0, 1, &cfg).unwrap(), Some(vec![2]));
    assert_eq!(lll_subset_sum(&x, 2.0, 4, &cfg).unwrap(), Some(vec![0, 1, 2, 3]));
    assert_eq!(lll_subset_sum(&x, 9.0, 1, &cfg).unwrap(), None);
    assert!(lll_subset_sum(&x, 1.0, 0, &cfg).is_err());
}

fn brute_distance(g: &Graph, s: usize, t: usize) -> Option<usize> {
    // Bellman-Ford style relaxation over hop counts
    let n = g.n();
    let mut d = vec![usize::MAX; n + 1];
    d[s] = 0;
    for _ in 0..n {
        for (i, j) in g.edges() {
            for (a, b) in [(i, j), (j, i)] {
                if d[a] != usize::MAX && d[a] + 1 < d[b] {
                    d[b] = d[a] + 1;
                }
            }
        }
    }
    (d[t] != usize::MAX).then_some(d[t])
}

#[test]
fn bfs_matches_relaxation() {
    for t in 0..200 {
        let mut r = rng::stream(5, Stream::Oracle, t);
        let n = 2 + (rand::Rng::random::<u32>(&mut r) % 9) as usize;
        let g = sample_erdos_renyi(n, 0.3, t).unwrap();
        let dist = bfs_distances(&g, 1);
        for v in 1..=n {
            assert_eq!(dist[v], brute_distance(&g, 1, v));
        }
        let path = shortest_path_between(&g, 2, 1);
        assert_eq!(path.as_ref().map(|p| p.len() - 1), brute_distance(&g, 2, 1));
        if let Some(p) = path {
            assert!(p.windows(2).all(|w| g.has_edge(w[0], w[1])));
        }
    }
}
