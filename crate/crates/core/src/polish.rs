//! Rounding a relaxed solution to a permutation and checking it exactly.

use nalgebra::DMatrix;

use crate::graph::{Permutation, WeightedGraph};

/// Permutation maximizing `Σ_j P*[map[j]][j]`, i.e. the permutation matrix
/// nearest to `P*` in Frobenius norm (`‖P − P*‖² = const − 2 Tr(Pᵀ P*)`).
///
/// Shortest augmenting path Hungarian method, `O(n³)`. Among equally cheap
/// columns the search takes an unassigned one first, then the lowest index,
/// so a constant matrix yields the identity.
pub fn hungarian_nearest_permutation(profit: &DMatrix<f64>) -> Permutation {
    let n = profit.nrows();
    assert_eq!(n, profit.ncols(), "profit matrix must be square");
    if n == 0 {
        return Permutation::identity(0);
    }
    // agent r = column r of P* (a vertex of the first graph), task c = row c
    let cost = |r: usize, c: usize| -profit[(c, r)];

    // 1-based potentials; owner[c] = agent holding task c, 0 = free
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0_f64; n + 1];
    let mut used = vec![false; n + 1];

    for r in 1..=n {
        owner[0] = r;
        let mut c0 = 0usize;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[c0] = true;
            let r0 = owner[c0];
            let mut delta = f64::INFINITY;
            let mut c1 = 0usize;
            for c in 1..=n {
                if used[c] {
                    continue;
                }
                let reduced = cost(r0 - 1, c - 1) - u[r0] - v[c];
                if reduced < minv[c] {
                    minv[c] = reduced;
                    way[c] = c0;
                }
                let better = minv[c] < delta || (minv[c] == delta && owner[c] == 0 && owner[c1] != 0);
                if c1 == 0 || better {
                    delta = minv[c];
                    c1 = c;
                }
            }
            for c in 0..=n {
                if used[c] {
                    u[owner[c]] += delta;
                    v[c] -= delta;
                } else {
                    minv[c] -= delta;
                }
            }
            c0 = c1;
            if owner[c0] == 0 {
                break;
            }
        }
        loop {
            let c1 = way[c0];
            owner[c0] = owner[c1];
            c0 = c1;
            if c0 == 0 {
                break;
            }
        }
    }

    let mut map = vec![0usize; n];
    for c in 1..=n {
        map[owner[c] - 1] = c - 1;
    }
    Permutation::new(map).expect("assignment is a bijection")
}

/// `Ã[p(u)][p(v)] == A[u][v]` within `tol` for all `u, v`.
pub fn verify_permutation(p: &Permutation, a: &WeightedGraph, b: &WeightedGraph, tol: f64) -> bool {
    let n = a.n();
    if b.n() != n || p.len() != n {
        return false;
    }
    let m = p.map();
    (0..n).all(|v| (0..n).all(|u| (b.weight(m[u], m[v]) - a.weight(u, v)).abs() <= tol))
}

/// Exact comparison for integer weights, `1e-8 · (1 + max |w|)` otherwise.
pub fn default_verify_tol(a: &WeightedGraph, b: &WeightedGraph) -> f64 {
    if a.is_integral() && b.is_integral() {
        0.0
    } else {
        1e-8 * (1.0 + a.max_abs_weight().max(b.max_abs_weight()))
    }
}

/// `‖P − P*‖_F` for a permutation `P`.
pub fn distance_to(p: &Permutation, relaxed: &DMatrix<f64>) -> f64 {
    let mut sq = relaxed.norm_squared();
    for (j, &i) in p.map().iter().enumerate() {
        let x = relaxed[(i, j)];
        sq += (1.0 - x) * (1.0 - x) - x * x;
    }
    sq.max(0.0).sqrt()
}
