//! Sparsity masks: entries of `P` that any isomorphism must leave at zero.
//!
//! Each invariant gives an equality `P a = b` that every isomorphism satisfies,
//! so `P[i][j] = 1` forces `a[j] = b[i]`. Pairs with `a[j] ≠ b[i]` are
//! disallowed. The mask is the union over walk-count vectors `A^k 1`
//! (`k = 1..n`), the diagonal, and eigenspace projector diagonals and row sums,
//! optionally tightened by neighborhood arc consistency.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::spectrum::Spectrum;

/// Relative tolerance for comparing invariant values.
pub const DEFAULT_INVARIANT_TOL: f64 = 1e-6;

/// Why an entry was disallowed (first reason recorded wins).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskOrigin {
    Degree,
    Spectral,
    Pruning,
}

/// `allowed[(i, j)]` is false when `P[i][j]` is forced to zero. Rows index
/// vertices of the second graph, columns vertices of the first.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityMask {
    n: usize,
    allowed: Vec<bool>,
    origin: Vec<Option<MaskOrigin>>,
    invariant_mismatch: bool,
}

impl SparsityMask {
    pub fn all_allowed(n: usize) -> Self {
        Self { n, allowed: vec![true; n * n], origin: vec![None; n * n], invariant_mismatch: false }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn allowed(&self, i: usize, j: usize) -> bool {
        self.allowed[i * self.n + j]
    }

    pub fn origin(&self, i: usize, j: usize) -> Option<MaskOrigin> {
        self.origin[i * self.n + j]
    }

    /// Returns true if the entry was allowed before.
    pub fn disallow(&mut self, i: usize, j: usize, why: MaskOrigin) -> bool {
        let k = i * self.n + j;
        if !self.allowed[k] {
            return false;
        }
        self.allowed[k] = false;
        self.origin[k] = Some(why);
        true
    }

    pub fn allowed_count(&self) -> usize {
        self.allowed.iter().filter(|a| **a).count()
    }

    /// `1 − |K| / n²`, the fraction of entries that may be nonzero.
    pub fn sparsity_ratio(&self) -> f64 {
        if self.n == 0 {
            return 1.0;
        }
        self.allowed_count() as f64 / (self.n * self.n) as f64
    }

    /// Some row or column has no allowed entry, so no permutation fits.
    pub fn infeasible(&self) -> bool {
        let n = self.n;
        let row_dead = (0..n).any(|i| (0..n).all(|j| !self.allowed(i, j)));
        let col_dead = (0..n).any(|j| (0..n).all(|i| !self.allowed(i, j)));
        row_dead || col_dead
    }

    /// An invariant vector pair `(a, b)` did not even agree as multisets,
    /// which no permutation can fix.
    pub fn invariant_mismatch(&self) -> bool {
        self.invariant_mismatch
    }

    /// Entries allowed in both masks; the first origin is kept.
    pub fn intersect(&mut self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(self.n, other.n));
        }
        for k in 0..self.allowed.len() {
            if self.allowed[k] && !other.allowed[k] {
                self.allowed[k] = false;
                self.origin[k] = other.origin[k];
            }
        }
        self.invariant_mismatch |= other.invariant_mismatch;
        Ok(())
    }

    /// Is every entry allowed here also allowed in `other`?
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.n == other.n && self.allowed.iter().zip(&other.allowed).all(|(a, b)| !a || *b)
    }

    /// The 0/1 indicator `S` of allowed entries.
    pub fn indicator(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| if self.allowed(i, j) { 1.0 } else { 0.0 })
    }

    /// Diagnostic dump: one line of space-separated 0/1 per row, then
    /// `allowed=<count> ratio=<ratio>`.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.n * (2 * self.n + 1) + 32);
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    out.push(' ');
                }
                out.push(if self.allowed(i, j) { '1' } else { '0' });
            }
            out.push('\n');
        }
        let _ = writeln!(out, "allowed={} ratio={}", self.allowed_count(), self.sparsity_ratio());
        out
    }

    /// Eliminates entries ruled out by an equality `P a = b`.
    fn apply_equality(&mut self, a: &[f64], b: &[f64], tol: f64, why: MaskOrigin) {
        let n = self.n;
        for (i, &bi) in b.iter().enumerate().take(n) {
            for (j, &aj) in a.iter().enumerate().take(n) {
                if self.allowed(i, j) && !close(aj, bi, tol) {
                    self.disallow(i, j, why);
                }
            }
        }
        let (mut sa, mut sb) = (a.to_vec(), b.to_vec());
        sa.sort_by(f64::total_cmp);
        sb.sort_by(f64::total_cmp);
        if sa.iter().zip(&sb).any(|(x, y)| !close(*x, *y, tol)) {
            self.invariant_mismatch = true;
        }
    }
}

#[inline]
fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()))
}

fn check_sizes(a: &WeightedGraph, b: &WeightedGraph) -> Result<usize> {
    if a.n() != b.n() {
        return Err(Error::SizeMismatch(a.n(), b.n()));
    }
    Ok(a.n())
}

/// Degree invariants: `P diag(A) = diag(Ã)` and `P A^k 1 = Ã^k 1` for
/// `k = 1..=max_power` (Cayley–Hamilton makes `max_power = n` sufficient).
pub fn degree_mask_upto(a: &WeightedGraph, b: &WeightedGraph, tol: f64, max_power: usize) -> Result<SparsityMask> {
    let n = check_sizes(a, b)?;
    let mut mask = SparsityMask::all_allowed(n);
    let (da, db): (Vec<f64>, Vec<f64>) = (a.adj().diagonal().iter().copied().collect(), b.adj().diagonal().iter().copied().collect());
    mask.apply_equality(&da, &db, tol, MaskOrigin::Degree);

    let mut wa = DVector::from_element(n, 1.0);
    let mut wb = DVector::from_element(n, 1.0);
    for _ in 0..max_power {
        wa = a.adj() * &wa;
        wb = b.adj() * &wb;
        // common rescaling keeps Pa = b intact and prevents overflow
        let scale = wa.amax().max(wb.amax()).max(1.0);
        wa /= scale;
        wb /= scale;
        mask.apply_equality(wa.as_slice(), wb.as_slice(), tol, MaskOrigin::Degree);
    }
    Ok(mask)
}

pub fn degree_mask(a: &WeightedGraph, b: &WeightedGraph, tol: f64) -> Result<SparsityMask> {
    degree_mask_upto(a, b, tol, a.n())
}

/// Spectral invariants per eigenvalue group: `P diag(VVᵀ) = diag(ṼṼᵀ)` and
/// `P VVᵀ1 = ṼṼᵀ1`. Groups are aligned by sorted order.
pub fn spectral_mask(sa: &Spectrum, sb: &Spectrum, tol: f64) -> Result<SparsityMask> {
    if sa.n() != sb.n() {
        return Err(Error::SizeMismatch(sa.n(), sb.n()));
    }
    if sa.multiplicities() != sb.multiplicities() {
        return Err(Error::GroupMismatch(format!("{:?} vs {:?}", sa.multiplicities(), sb.multiplicities())));
    }
    let mut mask = SparsityMask::all_allowed(sa.n());
    for (ga, gb) in sa.groups().iter().zip(sb.groups()) {
        mask.apply_equality(ga.projector_diagonal().as_slice(), gb.projector_diagonal().as_slice(), tol, MaskOrigin::Spectral);
        mask.apply_equality(ga.projector_row_sums().as_slice(), gb.projector_row_sums().as_slice(), tol, MaskOrigin::Spectral);
    }
    // spectral multisets are reported through emptied rows, not the flag
    mask.invariant_mismatch = false;
    Ok(mask)
}

/// Arc-consistency fixpoint. `(i, j)` survives only if every neighbor `j'`
/// of `j` in `a` can still go to some equally weighted neighbor `i'` of `i`
/// in `b`, and symmetrically for the neighbors of `i`.
pub fn prune(mask: &SparsityMask, a: &WeightedGraph, b: &WeightedGraph, weight_tol: f64) -> Result<SparsityMask> {
    let n = check_sizes(a, b)?;
    if mask.n() != n {
        return Err(Error::SizeMismatch(mask.n(), n));
    }
    let na: Vec<Vec<(usize, f64)>> = (0..n).map(|j| a.neighbors(j).collect()).collect();
    let nb: Vec<Vec<(usize, f64)>> = (0..n).map(|i| b.neighbors(i).collect()).collect();
    let mut out = mask.clone();

    let supported = |m: &SparsityMask, i: usize, j: usize| -> bool {
        let forward = na[j].iter().all(|&(jp, w)| nb[i].iter().any(|&(ip, v)| close(v, w, weight_tol) && m.allowed(ip, jp)));
        forward && nb[i].iter().all(|&(ip, v)| na[j].iter().any(|&(jp, w)| close(v, w, weight_tol) && m.allowed(ip, jp)))
    };

    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if out.allowed(i, j) && !supported(&out, i, j) {
                    out.disallow(i, j, MaskOrigin::Pruning);
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(out);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskOptions {
    pub degree: bool,
    pub spectral: bool,
    pub pruning: bool,
    /// Relative tolerance for invariant comparisons.
    pub tol: f64,
}

impl Default for MaskOptions {
    /// Degree and spectral invariants, no pruning.
    fn default() -> Self {
        Self { degree: true, spectral: true, pruning: false, tol: DEFAULT_INVARIANT_TOL }
    }
}

impl MaskOptions {
    pub fn none() -> Self {
        Self { degree: false, spectral: false, pruning: false, tol: DEFAULT_INVARIANT_TOL }
    }

    pub fn with_pruning(mut self, pruning: bool) -> Self {
        self.pruning = pruning;
        self
    }
}

/// `K = K_degree ∪ K_spectral`, pruned afterwards if requested. Assumes the
/// spectra already compared equal.
pub fn construct_k(
    a: &WeightedGraph,
    b: &WeightedGraph,
    sa: &Spectrum,
    sb: &Spectrum,
    opts: &MaskOptions,
) -> Result<SparsityMask> {
    let n = check_sizes(a, b)?;
    let mut mask = SparsityMask::all_allowed(n);
    if opts.degree {
        mask.intersect(&degree_mask(a, b, opts.tol)?)?;
    }
    if opts.spectral {
        mask.intersect(&spectral_mask(sa, sb, opts.tol)?)?;
    }
    if opts.pruning {
        mask = prune(&mask, a, b, opts.tol)?;
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle, frucht, path, petersen, random_permute, star};
    use crate::spectrum::spectrum_default;

    fn disallowed(m: &SparsityMask) -> Vec<(usize, usize)> {
        let n = m.n();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| !m.allowed(i, j)).collect()
    }

    #[test]
    fn regular_graph_first_power_disallows_nothing() {
        let g = frucht();
        let (h, _) = random_permute(&g, 3);
        let m = degree_mask_upto(&g, &h, DEFAULT_INVARIANT_TOL, 1).unwrap();
        assert_eq!(m.allowed_count(), 144);
    }

    #[test]
    fn path3_degree_mask() {
        let g = path(3);
        let m = degree_mask_upto(&g, &g, DEFAULT_INVARIANT_TOL, 1).unwrap();
        assert_eq!(disallowed(&m), vec![(0, 1), (1, 0), (1, 2), (2, 1)]);
        assert_eq!(m.origin(0, 1), Some(MaskOrigin::Degree));
        let full = degree_mask(&g, &g, DEFAULT_INVARIANT_TOL).unwrap();
        assert_eq!(disallowed(&full), disallowed(&m));
    }

    #[test]
    fn star_vs_square_plus_isolated_is_infeasible() {
        let a = star(4);
        let b = cycle(4).disjoint_union(&WeightedGraph::empty(1));
        let m = degree_mask_upto(&a, &b, DEFAULT_INVARIANT_TOL, 1).unwrap();
        assert_eq!(m.allowed_count(), 0);
        assert!(m.infeasible());
        assert!(m.invariant_mismatch());
    }

    #[test]
    fn spectral_mask_cases() {
        let e = WeightedGraph::empty(4);
        let s = spectrum_default(&e).unwrap();
        assert_eq!(spectral_mask(&s, &s, DEFAULT_INVARIANT_TOL).unwrap().allowed_count(), 16);

        let p3 = path(3);
        let s = spectrum_default(&p3).unwrap();
        let m = spectral_mask(&s, &s, DEFAULT_INVARIANT_TOL).unwrap();
        for pair in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            assert!(!m.allowed(pair.0, pair.1));
        }

        let g = petersen();
        let (h, _) = random_permute(&g, 8);
        let m = spectral_mask(&spectrum_default(&g).unwrap(), &spectrum_default(&h).unwrap(), DEFAULT_INVARIANT_TOL).unwrap();
        assert_eq!(m.allowed_count(), 100);
    }

    #[test]
    fn spectral_mask_rejects_group_mismatch() {
        let a = spectrum_default(&cycle(6)).unwrap();
        let b = spectrum_default(&cycle(3).disjoint_union(&cycle(3))).unwrap();
        assert!(matches!(spectral_mask(&a, &b, 1e-6), Err(Error::GroupMismatch(_))));
    }

    #[test]
    fn prune_cases() {
        let e = WeightedGraph::empty(3);
        let all = SparsityMask::all_allowed(3);
        assert_eq!(prune(&all, &e, &e, 1e-9).unwrap(), all);

        let p3 = path(3);
        let m = degree_mask_upto(&p3, &p3, DEFAULT_INVARIANT_TOL, 1).unwrap();
        assert_eq!(prune(&m, &p3, &p3, 1e-9).unwrap(), m);

        let a = star(3);
        let b = cycle(3).disjoint_union(&WeightedGraph::empty(1));
        let m = degree_mask_upto(&a, &b, DEFAULT_INVARIANT_TOL, 1).unwrap();
        assert!(prune(&m, &a, &b, 1e-9).unwrap().infeasible());

        // P5 vs triangle + edge: same degree multiset, so the first-power mask
        // keeps candidates; pruning finds the path ends have nowhere to go
        let a = path(5);
        let b = cycle(3).disjoint_union(&path(2));
        let m = degree_mask_upto(&a, &b, DEFAULT_INVARIANT_TOL, 1).unwrap();
        assert!(!m.infeasible());
        let pruned = prune(&m, &a, &b, 1e-9).unwrap();
        assert!(pruned.infeasible());
        assert!(pruned.is_subset_of(&m));
        assert_eq!(prune(&pruned, &a, &b, 1e-9).unwrap(), pruned);
    }

    #[test]
    fn prune_respects_weights() {
        let a = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let b = WeightedGraph::from_edges(3, &[(0, 1, 2.0), (1, 2, 1.0)]).unwrap();
        let pruned = prune(&SparsityMask::all_allowed(3), &a, &b, 1e-9).unwrap();
        // vertex 0 of a (weight-1 end) can only be vertex 2 of b
        assert!(pruned.allowed(2, 0));
        assert!(!pruned.allowed(0, 0));
        assert!(pruned.allowed(1, 1));
    }

    #[test]
    fn frucht_mask_has_fourteen_entries() {
        let g = frucht();
        let (h, q) = random_permute(&g, 2024);
        let (sa, sb) = (spectrum_default(&g).unwrap(), spectrum_default(&h).unwrap());
        let m = construct_k(&g, &h, &sa, &sb, &MaskOptions::default()).unwrap();
        assert_eq!(m.allowed_count(), 14);
        for (j, &i) in q.map().iter().enumerate() {
            assert!(m.allowed(i, j));
        }
        let pruned = construct_k(&g, &h, &sa, &sb, &MaskOptions::default().with_pruning(true)).unwrap();
        assert_eq!(pruned.allowed_count(), 12);
    }

    #[test]
    fn disabled_options_allow_everything() {
        let g = frucht();
        let s = spectrum_default(&g).unwrap();
        assert_eq!(construct_k(&g, &g, &s, &s, &MaskOptions::none()).unwrap().allowed_count(), 144);
    }

    #[test]
    fn text_export_summary() {
        let p3 = path(3);
        let m = degree_mask(&p3, &p3, DEFAULT_INVARIANT_TOL).unwrap();
        let text = m.to_text();
        assert!(text.starts_with("1 0 1\n0 1 0\n1 0 1\n"));
        assert!(text.ends_with("allowed=5 ratio=0.5555555555555556\n"));
    }
}
