//! Periodic graphs, periodic difference operators, finitely supported
//! lattice functions and the radius/support combinatorics built on them.
//!
//! A vertex of the infinite graph is a [`VertexSite`]: a vertex of the
//! fundamental domain `W` together with the lattice cell it was translated
//! into. A [`PeriodicOperator`] is a finite list of hopping terms
//! `(u, v, g, c)`, read as "`(Af)(u at cell h)` receives `c · f(v at cell h+g)`"
//! for every cell `h`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::scalar::GaussRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("vertex index {index} out of range for a fundamental domain of {size} vertices")]
    VertexIndex { index: usize, size: usize },
    #[error("invalid operator: {0}")]
    Invalid(ValidationReport),
    #[error("local perturbation is not Hermitian at ({row}, {col})")]
    NotHermitian { row: usize, col: usize },
    #[error("local perturbation lists site {0} twice")]
    DuplicateSite(VertexSite),
    #[error("local perturbation matrix is {rows}x{cols} but {sites} sites were given")]
    MatrixShape { rows: usize, cols: usize, sites: usize },
    #[error("edge {0} is a zero-shift self loop")]
    SelfLoop(usize),
    #[error("duplicate edge {0}")]
    DuplicateEdge(usize),
}

/// A lattice translation `g ∈ Z^n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shift(pub Vec<i64>);

impl Shift {
    pub fn zero(dim: usize) -> Self {
        Shift(vec![0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = vec![0; dim];
        v[axis] = 1;
        Shift(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm_inf(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Shift) -> Shift {
        Shift(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Shift) -> Shift {
        Shift(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Shift {
        Shift(self.0.iter().map(|c| -c).collect())
    }

    /// All cells of the box `[-n, n]^dim` in lexicographic order.
    pub fn box_cells(dim: usize, n: u64) -> Vec<Shift> {
        let n = n as i64;
        let mut out = vec![Shift(Vec::with_capacity(dim))];
        for _ in 0..dim {
            let mut next = Vec::with_capacity(out.len() * (2 * n as usize + 1));
            for prefix in &out {
                for c in -n..=n {
                    let mut v = prefix.0.clone();
                    v.push(c);
                    next.push(Shift(v));
                }
            }
            out = next;
        }
        out
    }
}

impl fmt::Debug for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<i64>> for Shift {
    fn from(v: Vec<i64>) -> Self {
        Shift(v)
    }
}

/// The vertex `cell · W[vertex]` of the periodic graph.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSite {
    pub vertex: usize,
    pub cell: Shift,
}

impl VertexSite {
    pub fn new(vertex: usize, cell: impl Into<Shift>) -> Self {
        Self { vertex, cell: cell.into() }
    }

    pub fn translate(&self, by: &Shift) -> Self {
        Self { vertex: self.vertex, cell: self.cell.add(by) }
    }
}

// Sites are ordered cell-major so that unknowns of a box system come out banded.
impl Ord for VertexSite {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cell.cmp(&other.cell).then(self.vertex.cmp(&other.vertex))
    }
}

impl PartialOrd for VertexSite {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for VertexSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}@{:?}", self.vertex, self.cell)
    }
}

impl fmt::Display for VertexSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// `r(S)`: the least `N ≥ 0` with every site's cell inside `[-N, N]^n`.
pub fn radius<'a>(sites: impl IntoIterator<Item = &'a VertexSite>) -> u64 {
    sites.into_iter().map(|s| s.cell.norm_inf()).max().unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphEdge {
    pub u: usize,
    pub v: usize,
    pub shift: Shift,
}

/// A `Z^n`-periodic graph given by its fundamental domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicGraph {
    pub dimension: usize,
    pub vertices: Vec<String>,
    pub edges: Vec<GraphEdge>,
    /// Fractional offset of each vertex inside its unit cell.
    pub positions: Option<Vec<Vec<BigRational>>>,
}

impl PeriodicGraph {
    pub fn new(dimension: usize, vertices: Vec<String>, edges: Vec<GraphEdge>) -> Result<Self, LatticeError> {
        let g = Self { dimension, vertices, edges, positions: None };
        g.check_edges()?;
        Ok(g)
    }

    pub fn with_positions(mut self, positions: Vec<Vec<BigRational>>) -> Self {
        self.positions = Some(positions);
        self
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == label)
    }

    fn check_edges(&self) -> Result<(), LatticeError> {
        let mut seen = BTreeSet::new();
        for (i, e) in self.edges.iter().enumerate() {
            for idx in [e.u, e.v] {
                if idx >= self.vertices.len() {
                    return Err(LatticeError::VertexIndex { index: idx, size: self.vertices.len() });
                }
            }
            if e.shift.dim() != self.dimension {
                return Err(LatticeError::Dimension { expected: self.dimension, found: e.shift.dim() });
            }
            if e.u == e.v && e.shift.is_zero() {
                return Err(LatticeError::SelfLoop(i));
            }
            let fwd = (e.u, e.v, e.shift.clone());
            let rev = (e.v, e.u, e.shift.neg());
            let key = fwd.clone().min(rev);
            if !seen.insert(key) {
                return Err(LatticeError::DuplicateEdge(i));
            }
        }
        Ok(())
    }

    /// Degree `d_v` of each fundamental-domain vertex; a loop to a translate counts twice.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices.len()];
        for e in &self.edges {
            d[e.u] += 1;
            d[e.v] += 1;
        }
        d
    }

    /// Neighbors of a site, with multiplicity.
    pub fn neighbors(&self, site: &VertexSite) -> Vec<VertexSite> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.u == site.vertex {
                out.push(VertexSite { vertex: e.v, cell: site.cell.add(&e.shift) });
            }
            if e.v == site.vertex {
                out.push(VertexSite { vertex: e.u, cell: site.cell.sub(&e.shift) });
            }
        }
        out
    }

    /// Absolute position `cell + offset(vertex)` when positions are known.
    pub fn position(&self, site: &VertexSite) -> Option<Vec<BigRational>> {
        let pos = self.positions.as_ref()?;
        let off = pos.get(site.vertex)?;
        Some(
            site.cell
                .0
                .iter()
                .zip(off)
                .map(|(c, o)| BigRational::from_integer((*c).into()) + o)
                .collect(),
        )
    }
}

/// One hopping term of a periodic operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub u: usize,
    pub v: usize,
    pub shift: Shift,
    pub coeff: GaussRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `(u, v, g, c)` is present but `(v, u, -g, conj c)` is not.
    MissingPartner { u: usize, v: usize, shift: Shift },
    /// The partner term exists with a coefficient other than the conjugate.
    PartnerMismatch { u: usize, v: usize, shift: Shift },
    VertexIndex { index: usize, size: usize },
    ShiftDimension { expected: usize, found: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| format!("{v:?}")).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// A `G`-periodic finite difference operator of finite order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicOperator {
    pub graph: PeriodicGraph,
    terms: Vec<Term>,
}

impl PeriodicOperator {
    /// Builds an operator and rejects anything `validate` complains about.
    pub fn new(graph: PeriodicGraph, terms: Vec<Term>) -> Result<Self, LatticeError> {
        let op = Self::new_unchecked(graph, terms);
        let report = op.validate();
        if report.is_valid() {
            Ok(op)
        } else {
            Err(LatticeError::Invalid(report))
        }
    }

    /// Aggregates duplicate `(u, v, g)` terms and drops zeros, without checking symmetry.
    pub fn new_unchecked(graph: PeriodicGraph, terms: Vec<Term>) -> Self {
        let mut agg: BTreeMap<(usize, usize, Shift), GaussRational> = BTreeMap::new();
        for t in terms {
            *agg.entry((t.u, t.v, t.shift)).or_insert_with(GaussRational::zero) += &t.coeff;
        }
        let terms = agg
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((u, v, shift), coeff)| Term { u, v, shift, coeff })
            .collect();
        Self { graph, terms }
    }

    /// Adds the conjugate partner of every unpaired term.
    pub fn symmetrized(graph: PeriodicGraph, terms: Vec<Term>) -> Result<Self, LatticeError> {
        let raw = Self::new_unchecked(graph, terms);
        let keys: BTreeSet<(usize, usize, Shift)> =
            raw.terms.iter().map(|t| (t.u, t.v, t.shift.clone())).collect();
        let mut terms = raw.terms.clone();
        for t in &raw.terms {
            if !keys.contains(&(t.v, t.u, t.shift.neg())) {
                terms.push(Term { u: t.v, v: t.u, shift: t.shift.neg(), coeff: t.coeff.conj() });
            }
        }
        Self::new(raw.graph, terms)
    }

    pub fn dimension(&self) -> usize {
        self.graph.dimension
    }

    /// `|W|`.
    pub fn domain_size(&self) -> usize {
        self.graph.len()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.graph.len();
        let dim = self.graph.dimension;
        let mut violations = Vec::new();
        let mut lookup: BTreeMap<(usize, usize, Shift), &GaussRational> = BTreeMap::new();
        for t in &self.terms {
            for idx in [t.u, t.v] {
                if idx >= n {
                    violations.push(Violation::VertexIndex { index: idx, size: n });
                }
            }
            if t.shift.dim() != dim {
                violations.push(Violation::ShiftDimension { expected: dim, found: t.shift.dim() });
            }
            lookup.insert((t.u, t.v, t.shift.clone()), &t.coeff);
        }
        for t in &self.terms {
            match lookup.get(&(t.v, t.u, t.shift.neg())) {
                None => violations.push(Violation::MissingPartner { u: t.u, v: t.v, shift: t.shift.clone() }),
                Some(c) if **c != t.coeff.conj() => {
                    violations.push(Violation::PartnerMismatch { u: t.u, v: t.v, shift: t.shift.clone() })
                }
                _ => {}
            }
        }
        ValidationReport { violations }
    }

    /// `f(v) - (1/d_v) Σ_{u~v} f(u)`.
    pub fn normalized_laplacian(graph: PeriodicGraph) -> Result<Self, LatticeError> {
        let deg = graph.degrees();
        let mut terms = Vec::new();
        for (v, _) in graph.vertices.iter().enumerate() {
            terms.push(Term { u: v, v, shift: Shift::zero(graph.dimension), coeff: GaussRational::from_int(1) });
        }
        for e in &graph.edges {
            terms.push(Term {
                u: e.u,
                v: e.v,
                shift: e.shift.clone(),
                coeff: -GaussRational::from_ratio(1, deg[e.u] as i64),
            });
            terms.push(Term {
                u: e.v,
                v: e.u,
                shift: e.shift.neg(),
                coeff: -GaussRational::from_ratio(1, deg[e.v] as i64),
            });
        }
        Self::new(graph, terms)
    }

    /// Adjacency operator of the graph plus an optional periodic diagonal potential.
    pub fn adjacency(graph: PeriodicGraph, potential: Option<Vec<GaussRational>>) -> Result<Self, LatticeError> {
        let mut terms = Vec::new();
        if let Some(pot) = potential {
            for (v, c) in pot.into_iter().enumerate() {
                terms.push(Term { u: v, v, shift: Shift::zero(graph.dimension), coeff: c });
            }
        }
        for e in &graph.edges {
            terms.push(Term { u: e.u, v: e.v, shift: e.shift.clone(), coeff: GaussRational::from_int(1) });
            terms.push(Term { u: e.v, v: e.u, shift: e.shift.neg(), coeff: GaussRational::from_int(1) });
        }
        Self::new(graph, terms)
    }

    /// Row of the operator at `x`: the `x`-support together with coefficients.
    pub fn row(&self, x: &VertexSite) -> BTreeMap<VertexSite, GaussRational> {
        let mut out: BTreeMap<VertexSite, GaussRational> = BTreeMap::new();
        for t in self.terms.iter().filter(|t| t.u == x.vertex) {
            let site = VertexSite { vertex: t.v, cell: x.cell.add(&t.shift) };
            *out.entry(site).or_insert_with(GaussRational::zero) += &t.coeff;
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// `supp_x(A) = { v : (A δ_v)(x) ≠ 0 }`.
    pub fn x_support(&self, x: &VertexSite) -> BTreeSet<VertexSite> {
        self.row(x).into_keys().collect()
    }

    /// `supp_W(A)`: union of the `x`-supports over the cell-0 copy of `W`.
    pub fn w_support(&self) -> BTreeSet<VertexSite> {
        let zero = Shift::zero(self.dimension());
        (0..self.domain_size())
            .flat_map(|v| self.x_support(&VertexSite { vertex: v, cell: zero.clone() }))
            .collect()
    }

    /// `R = r(supp_W(A))`.
    pub fn interaction_radius(&self) -> u64 {
        radius(&self.w_support())
    }

    pub fn apply(&self, f: &LatticeFunction) -> Result<LatticeFunction, LatticeError> {
        f.check_dimension(self.dimension())?;
        let mut by_col: BTreeMap<usize, Vec<&Term>> = BTreeMap::new();
        for t in &self.terms {
            by_col.entry(t.v).or_default().push(t);
        }
        let mut out = LatticeFunction::new(self.dimension());
        for (site, val) in f.iter() {
            if site.vertex >= self.domain_size() {
                return Err(LatticeError::VertexIndex { index: site.vertex, size: self.domain_size() });
            }
            for t in by_col.get(&site.vertex).into_iter().flatten() {
                let target = VertexSite { vertex: t.u, cell: site.cell.sub(&t.shift) };
                out.add_at(target, &(&t.coeff * val));
            }
        }
        Ok(out)
    }

    /// Operator `self + c·I`.
    pub fn shifted(&self, c: &GaussRational) -> Self {
        let mut terms = self.terms.clone();
        for v in 0..self.domain_size() {
            terms.push(Term { u: v, v, shift: Shift::zero(self.dimension()), coeff: c.clone() });
        }
        Self::new_unchecked(self.graph.clone(), terms)
    }
}

/// A finitely supported function on the vertices, in canonical sparse form.
#[derive(Clone, PartialEq, Eq)]
pub struct LatticeFunction {
    dimension: usize,
    values: BTreeMap<VertexSite, GaussRational>,
}

impl LatticeFunction {
    pub fn new(dimension: usize) -> Self {
        Self { dimension, values: BTreeMap::new() }
    }

    pub fn delta(dimension: usize, site: VertexSite) -> Self {
        let mut f = Self::new(dimension);
        f.set(site, GaussRational::from_int(1));
        f
    }

    pub fn from_pairs(dimension: usize, pairs: impl IntoIterator<Item = (VertexSite, GaussRational)>) -> Self {
        let mut f = Self::new(dimension);
        for (s, v) in pairs {
            f.add_at(s, &v);
        }
        f
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn get(&self, site: &VertexSite) -> GaussRational {
        self.values.get(site).cloned().unwrap_or_else(GaussRational::zero)
    }

    pub fn set(&mut self, site: VertexSite, value: GaussRational) {
        if value.is_zero() {
            self.values.remove(&site);
        } else {
            self.values.insert(site, value);
        }
    }

    pub fn add_at(&mut self, site: VertexSite, value: &GaussRational) {
        if value.is_zero() {
            return;
        }
        match self.values.entry(site) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += value;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value.clone());
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexSite, &GaussRational)> {
        self.values.iter()
    }

    pub fn support(&self) -> BTreeSet<VertexSite> {
        self.values.keys().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn radius(&self) -> u64 {
        radius(self.values.keys())
    }

    pub fn check_dimension(&self, expected: usize) -> Result<(), LatticeError> {
        if self.dimension != expected {
            return Err(LatticeError::Dimension { expected, found: self.dimension });
        }
        if let Some(site) = self.values.keys().find(|s| s.cell.dim() != expected) {
            return Err(LatticeError::Dimension { expected, found: site.cell.dim() });
        }
        Ok(())
    }

    pub fn scale(&self, c: &GaussRational) -> Self {
        let mut out = Self::new(self.dimension);
        if c.is_zero() {
            return out;
        }
        for (s, v) in &self.values {
            out.values.insert(s.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (s, v) in &other.values {
            out.add_at(s.clone(), v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (s, v) in &other.values {
            out.add_at(s.clone(), &-v);
        }
        out
    }

    /// `⟨f, g⟩ = Σ f(x) conj(g(x))`.
    pub fn inner(&self, other: &Self) -> GaussRational {
        self.values
            .iter()
            .filter_map(|(s, v)| other.values.get(s).map(|w| v * &w.conj()))
            .sum()
    }

    /// `Σ |f(x)|²`.
    pub fn norm_sqr(&self) -> BigRational {
        self.values.values().map(|v| v.norm_sqr()).fold(BigRational::zero(), |a, b| a + b)
    }

    /// `(T_h f)(v at cell g) = f(v at cell g - h)`.
    pub fn translate(&self, by: &Shift) -> Self {
        Self {
            dimension: self.dimension,
            values: self.values.iter().map(|(s, v)| (s.translate(by), v.clone())).collect(),
        }
    }
}

impl fmt::Debug for LatticeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.values.iter()).finish()
    }
}

/// A finite Hermitian matrix acting on the sites `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalPerturbation {
    sites: Vec<VertexSite>,
    matrix: Vec<Vec<GaussRational>>,
}

impl LocalPerturbation {
    pub fn new(sites: Vec<VertexSite>, matrix: Vec<Vec<GaussRational>>) -> Result<Self, LatticeError> {
        let n = sites.len();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(LatticeError::MatrixShape {
                rows: matrix.len(),
                cols: matrix.first().map_or(0, |r| r.len()),
                sites: n,
            });
        }
        let mut seen = BTreeSet::new();
        for s in &sites {
            if !seen.insert(s.clone()) {
                return Err(LatticeError::DuplicateSite(s.clone()));
            }
        }
        for i in 0..n {
            for j in i..n {
                if matrix[i][j] != matrix[j][i].conj() {
                    return Err(LatticeError::NotHermitian { row: i, col: j });
                }
            }
        }
        Ok(Self { sites, matrix })
    }

    pub fn empty() -> Self {
        Self { sites: Vec::new(), matrix: Vec::new() }
    }

    pub fn sites(&self) -> &[VertexSite] {
        &self.sites
    }

    pub fn matrix(&self) -> &[Vec<GaussRational>] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> &GaussRational {
        &self.matrix[i][j]
    }

    pub fn site_set(&self) -> BTreeSet<VertexSite> {
        self.sites.iter().cloned().collect()
    }

    pub fn radius(&self) -> u64 {
        radius(&self.sites)
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().flatten().all(|c| c.is_zero())
    }

    pub fn apply(&self, f: &LatticeFunction) -> LatticeFunction {
        let mut out = LatticeFunction::new(f.dimension());
        for (i, si) in self.sites.iter().enumerate() {
            let mut acc = GaussRational::zero();
            for (j, sj) in self.sites.iter().enumerate() {
                if self.matrix[i][j].is_zero() {
                    continue;
                }
                let v = f.get(sj);
                if !v.is_zero() {
                    acc += &(&self.matrix[i][j] * &v);
                }
            }
            out.set(si.clone(), acc);
        }
        out
    }

    /// Row of `B` at `x`; empty when `x ∉ S`.
    pub fn row(&self, x: &VertexSite) -> BTreeMap<VertexSite, GaussRational> {
        let mut out = BTreeMap::new();
        if let Some(i) = self.sites.iter().position(|s| s == x) {
            for (j, sj) in self.sites.iter().enumerate() {
                if !self.matrix[i][j].is_zero() {
                    out.insert(sj.clone(), self.matrix[i][j].clone());
                }
            }
        }
        out
    }
}

/// `A + B - λ`, the operator whose kernel holds embedded eigenfunctions.
#[derive(Clone, Debug)]
pub struct PerturbedOperator<'a> {
    pub base: &'a PeriodicOperator,
    pub perturbation: Option<&'a LocalPerturbation>,
    pub lambda: GaussRational,
}

impl<'a> PerturbedOperator<'a> {
    pub fn new(base: &'a PeriodicOperator, perturbation: Option<&'a LocalPerturbation>, lambda: GaussRational) -> Self {
        Self { base, perturbation, lambda }
    }

    pub fn row(&self, x: &VertexSite) -> BTreeMap<VertexSite, GaussRational> {
        let mut row = self.base.row(x);
        if !self.lambda.is_zero() {
            *row.entry(x.clone()).or_insert_with(GaussRational::zero) -= &self.lambda;
        }
        if let Some(b) = self.perturbation {
            for (s, c) in b.row(x) {
                *row.entry(s).or_insert_with(GaussRational::zero) += &c;
            }
        }
        row.retain(|_, c| !c.is_zero());
        row
    }

    pub fn x_support(&self, x: &VertexSite) -> BTreeSet<VertexSite> {
        self.row(x).into_keys().collect()
    }

    pub fn apply(&self, f: &LatticeFunction) -> Result<LatticeFunction, LatticeError> {
        let mut out = self.base.apply(f)?;
        out = out.sub(&f.scale(&self.lambda));
        if let Some(b) = self.perturbation {
            out = out.add(&b.apply(f));
        }
        Ok(out)
    }
}
