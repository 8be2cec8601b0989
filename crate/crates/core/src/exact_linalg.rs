//! Sparse exact Gaussian elimination over the Gaussian rationals.
//!
//! Rows are reduced incrementally against pivots keyed by their leading
//! column; a pivot row is normalized so its leading entry is 1. Pivoting is
//! deterministic: the pivot of a row is its first nonzero column.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::lattice::{LatticeFunction, VertexSite};
use crate::scalar::GaussRational;

pub type SparseRow = BTreeMap<usize, GaussRational>;

#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseRow>,
}

fn axpy(row: &mut SparseRow, factor: &GaussRational, other: &SparseRow) {
    for (c, v) in other {
        let delta = factor * v;
        match row.entry(*c) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() -= &delta;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                if !delta.is_zero() {
                    e.insert(-delta);
                }
            }
        }
    }
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = &usize> {
        self.pivots.keys()
    }

    /// Eliminates every pivot column from `row`, leading column first.
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        row.retain(|_, v| !v.is_zero());
        let mut cursor = 0usize;
        loop {
            let next = row.range(cursor..).map(|(c, _)| *c).find(|c| self.pivots.contains_key(c));
            let Some(c) = next else { break };
            let factor = row[&c].clone();
            axpy(&mut row, &factor, &self.pivots[&c]);
            cursor = c + 1;
        }
        row
    }

    /// Reduces only until the leading entry is not a pivot column.
    fn reduce_leading(&self, mut row: SparseRow) -> SparseRow {
        row.retain(|_, v| !v.is_zero());
        while let Some((&c, v)) = row.iter().next() {
            let Some(p) = self.pivots.get(&c) else { break };
            let factor = v.clone();
            axpy(&mut row, &factor, p);
        }
        row
    }

    /// Adds a row; returns its new pivot column, or `None` if it was dependent.
    pub fn insert(&mut self, row: SparseRow) -> Option<usize> {
        let row = self.reduce_leading(row);
        let (&lead, lv) = row.iter().next()?;
        let inv = lv.inv();
        let normalized: SparseRow = row.iter().map(|(c, v)| (*c, v * &inv)).collect();
        self.pivots.insert(lead, normalized);
        Some(lead)
    }

    /// Basis of the solution space of `row · x = 0` over columns `0..ncols`.
    pub fn nullspace(&self, ncols: usize) -> Vec<SparseRow> {
        (0..ncols).filter(|c| !self.pivots.contains_key(c)).map(|free| self.back_substitute(free, None)).collect()
    }

    /// Solution with free variables zero, treating column `rhs` as the
    /// augmented right-hand side: each pivot row reads `x_lead + Σ a_j x_j = -a_rhs`.
    fn back_substitute(&self, free: usize, rhs: Option<usize>) -> SparseRow {
        let mut x = SparseRow::new();
        if rhs.is_none() {
            x.insert(free, GaussRational::one());
        }
        for (&lead, row) in self.pivots.iter().rev() {
            let mut acc = GaussRational::zero();
            for (c, v) in row.range(lead + 1..) {
                if Some(*c) == rhs {
                    acc += v;
                } else if let Some(xc) = x.get(c) {
                    acc += &(v * xc);
                }
            }
            let val = -acc;
            if !val.is_zero() {
                x.insert(lead, val);
            }
        }
        x
    }
}

/// Outcome of an exact linear solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearSolution {
    Consistent { particular: SparseRow, kernel_dim: usize },
    Inconsistent,
}

/// Solves `Σ_j M[i][j] x_j = b_i`. Rows are `(coefficients, rhs)`.
pub fn solve_sparse(rows: Vec<(SparseRow, GaussRational)>, ncols: usize) -> LinearSolution {
    let mut ech = Echelon::new();
    for (mut row, b) in rows {
        // x_j for j < ncols, then `- b` in the augmented column so that
        // row · (x, 1) = 0 describes the equation.
        if !b.is_zero() {
            row.insert(ncols, -b);
        }
        if ech.insert(row) == Some(ncols) {
            return LinearSolution::Inconsistent;
        }
    }
    let kernel_dim = ncols - ech.pivot_columns().filter(|&&c| c < ncols).count();
    let x = ech.back_substitute(usize::MAX, Some(ncols));
    LinearSolution::Consistent { particular: x.into_iter().filter(|(c, _)| *c < ncols).collect(), kernel_dim }
}

/// Index assignment between lattice sites and matrix columns.
#[derive(Clone, Debug, Default)]
pub struct SiteIndex {
    sites: Vec<VertexSite>,
    index: BTreeMap<VertexSite, usize>,
}

impl SiteIndex {
    pub fn new(sites: impl IntoIterator<Item = VertexSite>) -> Self {
        let mut s = Self::default();
        for site in sites {
            s.intern(site);
        }
        s
    }

    pub fn intern(&mut self, site: VertexSite) -> usize {
        if let Some(&i) = self.index.get(&site) {
            return i;
        }
        let i = self.sites.len();
        self.index.insert(site.clone(), i);
        self.sites.push(site);
        i
    }

    pub fn get(&self, site: &VertexSite) -> Option<usize> {
        self.index.get(site).copied()
    }

    pub fn site(&self, i: usize) -> &VertexSite {
        &self.sites[i]
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn to_function(&self, dimension: usize, x: &SparseRow) -> LatticeFunction {
        LatticeFunction::from_pairs(dimension, x.iter().map(|(i, v)| (self.sites[*i].clone(), v.clone())))
    }

    pub fn to_row(&mut self, f: &LatticeFunction) -> SparseRow {
        f.iter().map(|(s, v)| (self.intern(s.clone()), v.clone())).collect()
    }
}

/// Exact rank of a family of lattice functions.
pub fn rank(functions: &[LatticeFunction]) -> usize {
    let mut idx = SiteIndex::default();
    let mut ech = Echelon::new();
    for f in functions {
        let row = idx.to_row(f);
        ech.insert(row);
    }
    ech.rank()
}

/// Whether `f` lies in the linear span of `basis`, exactly.
pub fn span_contains(basis: &[LatticeFunction], f: &LatticeFunction) -> bool {
    let mut idx = SiteIndex::default();
    let mut ech = Echelon::new();
    for b in basis {
        let row = idx.to_row(b);
        ech.insert(row);
    }
    let support: BTreeSet<_> = f.support();
    if support.iter().any(|s| idx.get(s).is_none()) {
        return false;
    }
    ech.reduce(idx.to_row(f)).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> GaussRational {
        GaussRational::from_int(n)
    }

    fn row(entries: &[(usize, i64)]) -> SparseRow {
        entries.iter().map(|(c, v)| (*c, q(*v))).collect()
    }

    #[test]
    fn solves_and_detects_inconsistency() {
        // x + y = 3, x - y = 1.
        let sol = solve_sparse(vec![(row(&[(0, 1), (1, 1)]), q(3)), (row(&[(0, 1), (1, -1)]), q(1))], 2);
        assert_eq!(sol, LinearSolution::Consistent { particular: row(&[(0, 2), (1, 1)]), kernel_dim: 0 });
        let bad = solve_sparse(vec![(row(&[(0, 1), (1, 1)]), q(3)), (row(&[(0, 2), (1, 2)]), q(1))], 2);
        assert_eq!(bad, LinearSolution::Inconsistent);
    }

    #[test]
    fn underdetermined_solution_satisfies_equations() {
        let rows = vec![(row(&[(0, 1), (2, 2)]), q(4)), (row(&[(1, 1), (2, -1)]), q(1))];
        match solve_sparse(rows.clone(), 3) {
            LinearSolution::Consistent { particular, kernel_dim } => {
                assert_eq!(kernel_dim, 1);
                for (r, b) in rows {
                    let lhs: GaussRational =
                        r.iter().map(|(c, v)| v * &particular.get(c).cloned().unwrap_or_default()).sum();
                    assert_eq!(lhs, b);
                }
            }
            LinearSolution::Inconsistent => panic!("consistent system"),
        }
    }

    #[test]
    fn nullspace_vectors_are_annihilated() {
        let mut ech = Echelon::new();
        let rows = [row(&[(0, 1), (1, 2), (3, 1)]), row(&[(1, 1), (2, 1)]), row(&[(0, 1), (1, 3), (2, 1), (3, 1)])];
        for r in rows.iter() {
            ech.insert(r.clone());
        }
        assert_eq!(ech.rank(), 2);
        let ns = ech.nullspace(4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for r in &rows {
                let dot: GaussRational = r.iter().map(|(c, x)| x * &v.get(c).cloned().unwrap_or_default()).sum();
                assert!(dot.is_zero());
            }
        }
    }
}
