//! Weighted undirected graphs, vertex permutations and the deterministic
//! generators used by tests and the benchmark harness.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

/// Symmetric dense adjacency matrix. A zero entry means "no edge"; nonzero
/// diagonal entries are self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: DMatrix<f64>,
}

impl WeightedGraph {
    /// Validates that `adj` is square, finite and exactly symmetric.
    pub fn from_matrix(adj: DMatrix<f64>) -> Result<Self> {
        if adj.nrows() != adj.ncols() {
            return Err(Error::SizeMismatch(adj.nrows(), adj.ncols()));
        }
        let n = adj.nrows();
        for j in 0..n {
            for i in 0..n {
                let v = adj[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite(i, j));
                }
                if v.to_bits() != adj[(j, i)].to_bits() {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        Ok(Self { adj })
    }

    /// Builds a graph from `(u, v, weight)` triples (0-based). The symmetric
    /// entry is filled in; listing an edge twice is an error.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adj = DMatrix::zeros(n, n);
        let mut seen = DMatrix::from_element(n, n, false);
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if !w.is_finite() {
                return Err(Error::NonFinite(u, v));
            }
            if seen[(u, v)] {
                return Err(Error::InvalidArgument(format!("duplicate edge ({u}, {v})")));
            }
            seen[(u, v)] = true;
            seen[(v, u)] = true;
            adj[(u, v)] = w;
            adj[(v, u)] = w;
        }
        Ok(Self { adj })
    }

    pub fn empty(n: usize) -> Self {
        Self { adj: DMatrix::zeros(n, n) }
    }

    pub fn n(&self) -> usize {
        self.adj.nrows()
    }

    pub fn adj(&self) -> &DMatrix<f64> {
        &self.adj
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adj[(i, j)]
    }

    /// Nonzero entries of row `i`, including a self-loop if present.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.n()).filter_map(move |j| {
            let w = self.adj[(j, i)];
            (w != 0.0).then_some((j, w))
        })
    }

    /// Undirected edges with `u <= v`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for u in 0..n {
            for v in u..n {
                let w = self.adj[(u, v)];
                if w != 0.0 {
                    out.push((u, v, w));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Number of nonzero entries per row (self-loops count once).
    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|i| self.adj.column(i).iter().filter(|w| **w != 0.0).count()).collect()
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.adj.iter().fold(0.0_f64, |m, w| m.max(w.abs()))
    }

    pub fn is_integral(&self) -> bool {
        self.adj.iter().all(|w| w.fract() == 0.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.adj.norm()
    }

    /// `Q A Qᵀ`: vertex `u` of `self` becomes vertex `p.map()[u]`.
    pub fn permuted(&self, p: &Permutation) -> Result<Self> {
        let n = self.n();
        if p.len() != n {
            return Err(Error::SizeMismatch(n, p.len()));
        }
        let m = p.map();
        let mut adj = DMatrix::zeros(n, n);
        for v in 0..n {
            for u in 0..n {
                adj[(m[u], m[v])] = self.adj[(u, v)];
            }
        }
        Ok(Self { adj })
    }

    /// Disjoint union, vertices of `other` shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Self) -> Self {
        let (a, b) = (self.n(), other.n());
        let mut adj = DMatrix::zeros(a + b, a + b);
        adj.view_mut((0, 0), (a, a)).copy_from(&self.adj);
        adj.view_mut((a, a), (b, b)).copy_from(&other.adj);
        Self { adj }
    }
}

/// Bijection on `0..n`. `map[j] = i` means `P[i][j] = 1`: vertex `j` of the
/// first graph is sent to vertex `i` of the second.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut hit = vec![false; n];
        for &i in &map {
            if i >= n || hit[i] {
                return Err(Error::InvalidArgument(format!("not a permutation of 0..{n}: {map:?}")));
            }
            hit[i] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    /// Uniformly random permutation (Fisher-Yates on the permutation stream).
    pub fn random(n: usize, seed: u64) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(&mut stream(seed, Purpose::Permutation));
        Self { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (j, &i) in self.map.iter().enumerate() {
            inv[i] = j;
        }
        Self { map: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(j, &i)| i == j)
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut p = DMatrix::zeros(n, n);
        for (j, &i) in self.map.iter().enumerate() {
            p[(i, j)] = 1.0;
        }
        p
    }

    /// 1-based vertex ids, as written in files and JSON.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.map.iter().map(|i| i + 1).collect()
    }
}

/// Erdős–Rényi `G(n, p)`: each unordered pair is an edge of weight 1 with
/// probability `p`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<WeightedGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = stream(seed, Purpose::Graph);
    let mut adj = DMatrix::zeros(n, n);
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                adj[(u, v)] = 1.0;
                adj[(v, u)] = 1.0;
            }
        }
    }
    Ok(WeightedGraph { adj })
}

/// `rows × cols` grid; vertex `(r, c)` has index `r * cols + c`.
pub fn grid2d(rows: usize, cols: usize) -> Result<WeightedGraph> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("grid dimensions must be positive".into()));
    }
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1, 1.0));
            }
            if r + 1 < rows {
                edges.push((v, v + cols, 1.0));
            }
        }
    }
    WeightedGraph::from_edges(rows * cols, &edges)
}

/// Builds a cubic Hamiltonian graph from its LCF code on an `n`-cycle.
fn lcf(code: &[i64], n: usize) -> WeightedGraph {
    let mut adj = DMatrix::zeros(n, n);
    for i in 0..n {
        let j = (i + 1) % n;
        adj[(i, j)] = 1.0;
        adj[(j, i)] = 1.0;
        let k = (i as i64 + code[i % code.len()]).rem_euclid(n as i64) as usize;
        adj[(i, k)] = 1.0;
        adj[(k, i)] = 1.0;
    }
    WeightedGraph { adj }
}

/// The Frucht graph: 12 vertices, 18 edges, cubic, no nontrivial automorphism.
pub fn frucht() -> WeightedGraph {
    lcf(&[-5, -2, -4, 2, 5, -2, 2, 5, -2, -5, 4, 2], 12)
}

/// The Petersen graph: outer 5-cycle `0..5`, inner pentagram `5..10`, spokes.
pub fn petersen() -> WeightedGraph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5, 1.0));
        edges.push((i, i + 5, 1.0));
        edges.push((i + 5, (i + 2) % 5 + 5, 1.0));
    }
    WeightedGraph::from_edges(10, &edges).expect("static edge list")
}

pub fn path(n: usize) -> WeightedGraph {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v, 1.0)).collect();
    WeightedGraph::from_edges(n, &edges).expect("static edge list")
}

pub fn cycle(n: usize) -> WeightedGraph {
    assert!(n >= 3, "cycle needs at least 3 vertices");
    let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n, 1.0)).collect();
    WeightedGraph::from_edges(n, &edges).expect("static edge list")
}

/// `K_{1,leaves}` with the hub at vertex 0.
pub fn star(leaves: usize) -> WeightedGraph {
    let edges: Vec<_> = (1..=leaves).map(|v| (0, v, 1.0)).collect();
    WeightedGraph::from_edges(leaves + 1, &edges).expect("static edge list")
}

pub fn complete(n: usize) -> WeightedGraph {
    let mut adj = DMatrix::from_element(n, n, 1.0);
    adj.fill_diagonal(0.0);
    WeightedGraph { adj }
}

/// Uniform random recursive tree: vertex `v` attaches to a uniform earlier vertex.
pub fn random_tree(n: usize, seed: u64) -> WeightedGraph {
    let mut rng = stream(seed, Purpose::Graph);
    let edges: Vec<_> = (1..n).map(|v| (rng.random_range(0..v), v, 1.0)).collect();
    WeightedGraph::from_edges(n, &edges).expect("tree edges are distinct")
}

/// Complete graph with i.i.d. uniform `(0, 1]` weights on edges and the diagonal.
pub fn random_weighted(n: usize, seed: u64) -> WeightedGraph {
    let mut rng = stream(seed, Purpose::Weights);
    let mut adj = DMatrix::zeros(n, n);
    for u in 0..n {
        for v in u..n {
            let w = 1.0 - rng.random::<f64>();
            adj[(u, v)] = w;
            adj[(v, u)] = w;
        }
    }
    WeightedGraph { adj }
}

/// Returns `(Ã, Q)` with `Ã = Q A Qᵀ` and `Q` uniform for the given seed.
pub fn random_permute(g: &WeightedGraph, seed: u64) -> (WeightedGraph, Permutation) {
    let q = Permutation::random(g.n(), seed);
    let permuted = g.permuted(&q).expect("permutation has matching size");
    (permuted, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric_and_nonfinite() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(matches!(WeightedGraph::from_matrix(m), Err(Error::NotSymmetric(..))));
        let m = DMatrix::from_row_slice(2, 2, &[f64::NAN, 0.0, 0.0, 0.0]);
        assert!(matches!(WeightedGraph::from_matrix(m), Err(Error::NonFinite(..))));
        assert!(WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 0, 1.0)]).is_err());
    }

    #[test]
    fn erdos_renyi_extremes() {
        assert_eq!(erdos_renyi(5, 0.0, 3).unwrap().edge_count(), 0);
        assert_eq!(erdos_renyi(5, 1.0, 3).unwrap(), complete(5));
        assert!(erdos_renyi(5, 1.5, 3).is_err());
    }

    #[test]
    fn erdos_renyi_edge_count_concentrates() {
        let n = 1000;
        let pairs = (n * (n - 1) / 2) as f64;
        let g = erdos_renyi(n, 0.1, 11).unwrap();
        let mean = 0.1 * pairs;
        let sigma = (pairs * 0.1 * 0.9).sqrt();
        assert!((g.edge_count() as f64 - mean).abs() <= 4.0 * sigma);
        assert_eq!(g, erdos_renyi(n, 0.1, 11).unwrap());
    }

    #[test]
    fn named_graphs() {
        assert_eq!(grid2d(1, 2).unwrap(), path(2));
        let f = frucht();
        assert_eq!((f.n(), f.edge_count()), (12, 18));
        assert!(f.degrees().iter().all(|&d| d == 3));
        let p = petersen();
        assert_eq!((p.n(), p.edge_count()), (10, 15));
        assert!(p.degrees().iter().all(|&d| d == 3));
        assert_eq!(grid2d(8, 8).unwrap().edge_count(), 112);
    }

    #[test]
    fn petersen_has_girth_five() {
        let g = petersen();
        let a = g.adj();
        // no triangles: trace(A^3) = 0; no 4-cycles: every pair shares <= 1 neighbor
        assert_eq!((a * a * a).trace(), 0.0);
        let a2 = a * a;
        for i in 0..10 {
            for j in 0..10 {
                if i != j {
                    assert!(a2[(i, j)] <= 1.0);
                }
            }
        }
    }

    #[test]
    fn random_permute_conjugates() {
        let g = frucht();
        let (h, q) = random_permute(&g, 5);
        let p = q.to_matrix();
        assert_eq!(&p * g.adj() * p.transpose(), *h.adj());
        let (h1, q1) = random_permute(&path(1), 9);
        assert_eq!(h1, path(1));
        assert!(q1.is_identity());
        assert_eq!(g.permuted(&Permutation::identity(12)).unwrap(), g);
    }

    #[test]
    fn permutation_validation_and_inverse() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        assert_eq!(p.inverse().map(), &[1, 2, 0]);
        assert_eq!(p.to_one_based(), vec![3, 1, 2]);
    }
}
