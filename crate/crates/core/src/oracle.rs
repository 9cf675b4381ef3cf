//! Exhaustive isomorphism search for small graphs.
//!
//! Backtracking over vertex images in lexicographic order, pruned only by
//! degree and by consistency with the vertices already placed. Kept apart from
//! the invariant machinery in [`crate::mask`] so the two fail independently.

use crate::error::{Error, Result};
use crate::graph::{Permutation, WeightedGraph};
use crate::mask::{MaskOrigin, SparsityMask};
use crate::polish::default_verify_tol;

pub const DEFAULT_LIMIT: usize = 10;

struct Search<'g> {
    a: &'g WeightedGraph,
    b: &'g WeightedGraph,
    deg_a: Vec<usize>,
    deg_b: Vec<usize>,
    tol: f64,
    map: Vec<usize>,
    used: Vec<bool>,
}

impl<'g> Search<'g> {
    fn new(a: &'g WeightedGraph, b: &'g WeightedGraph) -> Self {
        let n = a.n();
        Self { a, b, deg_a: a.degrees(), deg_b: b.degrees(), tol: default_verify_tol(a, b), map: Vec::with_capacity(n), used: vec![false; n] }
    }

    fn fits(&self, j: usize, i: usize) -> bool {
        if self.deg_a[j] != self.deg_b[i] {
            return false;
        }
        if (self.a.weight(j, j) - self.b.weight(i, i)).abs() > self.tol {
            return false;
        }
        self.map.iter().enumerate().all(|(jp, &ip)| (self.a.weight(j, jp) - self.b.weight(i, ip)).abs() <= self.tol)
    }

    /// Calls `visit` for each complete map in lexicographic order until it
    /// returns false.
    fn run(&mut self, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        let n = self.a.n();
        let j = self.map.len();
        if j == n {
            return visit(&self.map);
        }
        for i in 0..n {
            if self.used[i] || !self.fits(j, i) {
                continue;
            }
            self.used[i] = true;
            self.map.push(i);
            let go_on = self.run(visit);
            self.map.pop();
            self.used[i] = false;
            if !go_on {
                return false;
            }
        }
        true
    }
}

fn check(a: &WeightedGraph, b: &WeightedGraph, limit: usize) -> Result<bool> {
    if a.n() > limit {
        return Err(Error::TooLarge { n: a.n(), limit });
    }
    Ok(a.n() == b.n())
}

/// Lexicographically first isomorphism from `a` to `b`, if any.
pub fn brute_force_isomorphism(a: &WeightedGraph, b: &WeightedGraph, limit: usize) -> Result<Option<Permutation>> {
    if !check(a, b, limit)? {
        return Ok(None);
    }
    let mut found = None;
    Search::new(a, b).run(&mut |m| {
        found = Some(m.to_vec());
        false
    });
    Ok(found.map(|m| Permutation::new(m).expect("search yields bijections")))
}

/// Every isomorphism from `a` to `b`, in lexicographic order.
pub fn all_isomorphisms(a: &WeightedGraph, b: &WeightedGraph, limit: usize) -> Result<Vec<Permutation>> {
    if !check(a, b, limit)? {
        return Ok(Vec::new());
    }
    let mut all = Vec::new();
    Search::new(a, b).run(&mut |m| {
        all.push(Permutation::new(m.to_vec()).expect("search yields bijections"));
        true
    });
    Ok(all)
}

/// The largest valid mask: `(i, j)` allowed iff some isomorphism sends `j` to
/// `i`. All entries are disallowed when the graphs are not isomorphic.
pub fn max_mask_oracle(a: &WeightedGraph, b: &WeightedGraph, limit: usize) -> Result<SparsityMask> {
    let n = a.n();
    let isos = all_isomorphisms(a, b, limit)?;
    let mut used = vec![false; n * n];
    for p in &isos {
        for (j, &i) in p.map().iter().enumerate() {
            used[i * n + j] = true;
        }
    }
    let mut mask = SparsityMask::all_allowed(n);
    for i in 0..n {
        for j in 0..n {
            if !used[i * n + j] {
                mask.disallow(i, j, MaskOrigin::Degree);
            }
        }
    }
    Ok(mask)
}
