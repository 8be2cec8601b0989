//! Periodic quantum graphs: `-f'' + V f = λ f` on the edges with
//! Neumann–Kirchhoff conditions at the vertices, and their reduction to a
//! combinatorial periodic operator `A(λ)` on the vertices.
//!
//! Edge functions are propagated by 2×2 transfer matrices taking
//! `(f, f')` at the start of an edge to `(f, f')` at its end. Potentials are
//! piecewise constant, so transfer matrices are closed-form.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::lattice::{
    radius, GraphEdge, LatticeError, LocalPerturbation, PeriodicGraph, PeriodicOperator, PerturbedOperator, Shift,
    Term, VertexSite,
};
use crate::numeric;
use crate::scalar::GaussRational;
use crate::solver::box_rows;
use crate::spectrum::{self, SpectrumError, TORUS_TOL};

/// `|m₁₂|` below which an edge counts as Dirichlet-resonant.
pub const DIRICHLET_TOL: f64 = 1e-10;

/// Slack added to `√λ` when choosing fake-vertex spacing.
const SUBDIVISION_EPS: f64 = 1e-6;

const MAX_CUTS: u64 = 1_000_000;

/// Agreement tolerance between the two sides of the Floquet-surface equality.
pub const FERMI_TOL: f64 = 1e-8;

/// Residual tolerance for extended edge solutions.
pub const RESIDUAL_TOL: f64 = 1e-9;

pub type Transfer = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("invalid metric graph: {0}")]
    Invalid(String),
    #[error("λ is a Dirichlet eigenvalue of edges {0:?}")]
    DirichletCollision(Vec<usize>),
    #[error("edge {edge} would need {cuts} fake vertices")]
    TooManyCuts { edge: usize, cuts: u64 },
    #[error("vertex values violate A(λ)f = 0 at {site:?} (residual {residual:e})")]
    Residual { site: VertexSite, residual: f64 },
    #[error("Floquet comparison is implemented for dimensions 1 and 2, got {0}")]
    Dimension(usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Constant potential `value` on a piece of an edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub length: BigRational,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricEdge {
    pub u: usize,
    pub v: usize,
    pub shift: Shift,
    pub length: BigRational,
    /// Consecutive pieces from the start vertex; empty means `V = 0`.
    pub potential: Vec<Segment>,
}

impl MetricEdge {
    pub fn new(u: usize, v: usize, shift: Shift, length: BigRational) -> Self {
        Self { u, v, shift, length, potential: Vec::new() }
    }

    pub fn with_potential(mut self, potential: Vec<Segment>) -> Self {
        self.potential = potential;
        self
    }

    pub fn length_f64(&self) -> f64 {
        self.length.to_f64().unwrap_or(f64::NAN)
    }

    /// `(length, V)` pieces covering the whole edge.
    pub fn pieces(&self) -> Vec<(f64, f64)> {
        if self.potential.is_empty() {
            return vec![(self.length_f64(), 0.0)];
        }
        self.potential.iter().map(|s| (s.length.to_f64().unwrap_or(f64::NAN), s.value)).collect()
    }

    pub fn min_potential(&self) -> f64 {
        self.pieces().iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }

    fn check(&self, idx: usize, n: usize, dim: usize) -> Result<(), QuantumError> {
        let bad = |msg: String| Err(QuantumError::Invalid(format!("edge {idx}: {msg}")));
        if self.u >= n || self.v >= n {
            return bad("vertex index out of range".into());
        }
        if self.shift.dim() != dim {
            return bad(format!("shift has dimension {}, expected {dim}", self.shift.dim()));
        }
        if self.u == self.v && self.shift.is_zero() {
            return bad("zero-shift self loop".into());
        }
        if !self.length.is_positive() {
            return bad("length must be positive".into());
        }
        if !self.potential.is_empty() {
            if self.potential.iter().any(|s| !s.length.is_positive() || !s.value.is_finite()) {
                return bad("potential segments need positive lengths and finite values".into());
            }
            let total: BigRational = self.potential.iter().map(|s| s.length.clone()).sum();
            if total != self.length {
                return bad(format!("potential segments sum to {total}, edge length is {}", self.length));
            }
        }
        Ok(())
    }
}

/// A `Z^n`-periodic metric graph with Kirchhoff conditions at every vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph {
    pub dimension: usize,
    pub vertices: Vec<String>,
    pub edges: Vec<MetricEdge>,
    pub positions: Option<Vec<Vec<BigRational>>>,
}

impl MetricGraph {
    pub fn new(dimension: usize, vertices: Vec<String>, edges: Vec<MetricEdge>) -> Result<Self, QuantumError> {
        for (i, e) in edges.iter().enumerate() {
            e.check(i, vertices.len(), dimension)?;
        }
        Ok(Self { dimension, vertices, edges, positions: None })
    }

    pub fn with_positions(mut self, positions: Vec<Vec<BigRational>>) -> Self {
        self.positions = Some(positions);
        self
    }

    /// Neighbors of a site through the edges, with multiplicity.
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

    /// The underlying discrete graph, parallel edges merged.
    pub fn combinatorial_graph(&self) -> Result<PeriodicGraph, LatticeError> {
        let mut seen = BTreeSet::new();
        let mut edges = Vec::new();
        for e in &self.edges {
            let fwd = (e.u, e.v, e.shift.clone());
            let key = fwd.clone().min((e.v, e.u, e.shift.neg()));
            if seen.insert(key) {
                edges.push(GraphEdge { u: e.u, v: e.v, shift: e.shift.clone() });
            }
        }
        let g = PeriodicGraph::new(self.dimension, self.vertices.clone(), edges)?;
        Ok(match &self.positions {
            Some(p) => g.with_positions(p.clone()),
            None => g,
        })
    }
}

/// An added potential on one copy of a fundamental-domain edge.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgePerturbation {
    pub edge: usize,
    pub cell: Shift,
    pub delta: Vec<Segment>,
}

/// `(f(0), f'(0))` on each edge copy, keyed by `(edge, cell of its start)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EdgeSolutionCoeffs {
    pub edges: BTreeMap<(usize, Shift), (Complex64, Complex64)>,
}

fn mat_mul(a: &Transfer, b: &Transfer) -> Transfer {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn segment_transfer(len: f64, kappa2: f64) -> Transfer {
    if kappa2 > 0.0 {
        let k = kappa2.sqrt();
        let (s, c) = (k * len).sin_cos();
        [[c, s / k], [-k * s, c]]
    } else if kappa2 < 0.0 {
        let q = (-kappa2).sqrt();
        let (s, c) = ((q * len).sinh(), (q * len).cosh());
        [[c, s / q], [q * s, c]]
    } else {
        [[1.0, len], [0.0, 1.0]]
    }
}

fn pieces_transfer(pieces: &[(f64, f64)], lambda: f64, upto: f64) -> Transfer {
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    let mut done = 0.0;
    for &(len, v) in pieces {
        if done >= upto {
            break;
        }
        let take = len.min(upto - done);
        m = mat_mul(&segment_transfer(take, lambda - v), &m);
        done += len;
    }
    m
}

/// Transfer matrix of `-f'' + V f = λ f` along the whole edge; `det = 1`.
pub fn edge_transfer(e: &MetricEdge, lambda: f64) -> Transfer {
    pieces_transfer(&e.pieces(), lambda, f64::INFINITY)
}

/// Transfer matrix from the start of the edge to coordinate `x`.
pub fn partial_transfer(e: &MetricEdge, lambda: f64, x: f64) -> Transfer {
    pieces_transfer(&e.pieces(), lambda, x)
}

/// Transfer matrix of the edge traversed from its end to its start.
fn reversed(m: &Transfer) -> Transfer {
    [[m[1][1], m[0][1]], [m[1][0], m[0][0]]]
}

/// Whether `λ` is (numerically) a Dirichlet eigenvalue of the edge.
pub fn dirichlet_hit(e: &MetricEdge, lambda: f64) -> bool {
    edge_transfer(e, lambda)[0][1].abs() < DIRICHLET_TOL
}

/// Piecewise sum of two potentials on an edge of the given length.
pub fn add_potentials(length: &BigRational, a: &[Segment], b: &[Segment]) -> Vec<Segment> {
    let full = |p: &[Segment]| {
        if p.is_empty() {
            vec![Segment { length: length.clone(), value: 0.0 }]
        } else {
            p.to_vec()
        }
    };
    let (a, b) = (full(a), full(b));
    let breaks = |p: &[Segment]| {
        let mut acc = BigRational::zero();
        p.iter()
            .map(|s| {
                acc += &s.length;
                (acc.clone(), s.value)
            })
            .collect::<Vec<_>>()
    };
    let (ba, bb) = (breaks(&a), breaks(&b));
    let (mut i, mut j) = (0, 0);
    let mut pos = BigRational::zero();
    let mut out = Vec::new();
    while i < ba.len() && j < bb.len() {
        let end = ba[i].0.clone().min(bb[j].0.clone());
        out.push(Segment { length: &end - &pos, value: ba[i].1 + bb[j].1 });
        if ba[i].0 == end {
            i += 1;
        }
        if bb[j].0 == end {
            j += 1;
        }
        pos = end;
    }
    out
}

/// Pieces of a potential restricted to `[start, end]`, re-based at 0.
fn slice_potential(p: &[Segment], start: &BigRational, end: &BigRational) -> Vec<Segment> {
    if p.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut pos = BigRational::zero();
    for s in p {
        let lo = pos.clone().max(start.clone());
        let hi = (&pos + &s.length).min(end.clone());
        if hi > lo {
            out.push(Segment { length: hi - lo, value: s.value });
        }
        pos += &s.length;
    }
    out
}

fn exact(x: f64) -> GaussRational {
    GaussRational::from_f64_exact(x).expect("finite transfer-matrix entry")
}

/// Combinatorial operator `A(λ)` and, for perturbed edges, `B = A₁(λ) - A(λ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub operator: PeriodicOperator,
    pub perturbation: Option<LocalPerturbation>,
}

/// Potentials of the perturbed edge copies, deltas on one copy summed.
fn perturbed_copies(
    g: &MetricGraph,
    perturbations: &[EdgePerturbation],
) -> Result<BTreeMap<(usize, Shift), MetricEdge>, QuantumError> {
    let mut out: BTreeMap<(usize, Shift), MetricEdge> = BTreeMap::new();
    for p in perturbations {
        let base = g
            .edges
            .get(p.edge)
            .ok_or_else(|| QuantumError::Invalid(format!("perturbation names missing edge {}", p.edge)))?;
        if p.cell.dim() != g.dimension {
            return Err(QuantumError::Invalid(format!("perturbation cell has dimension {}", p.cell.dim())));
        }
        let probe = base.clone().with_potential(p.delta.clone());
        probe.check(p.edge, g.vertices.len(), g.dimension)?;
        let entry = out.entry((p.edge, p.cell.clone())).or_insert_with(|| base.clone());
        entry.potential = add_potentials(&base.length, &entry.potential, &p.delta);
    }
    Ok(out)
}

/// Edge contribution: `(-m₁₁/m₁₂, -m₂₂/m₁₂, 1/m₁₂)` for start diagonal,
/// end diagonal and the coupling.
fn edge_coefficients(m: &Transfer) -> (f64, f64, f64) {
    (-m[0][0] / m[0][1], -m[1][1] / m[0][1], 1.0 / m[0][1])
}

pub fn reduce(g: &MetricGraph, lambda: f64, perturbations: &[EdgePerturbation]) -> Result<Reduction, QuantumError> {
    let copies = perturbed_copies(g, perturbations)?;
    let mut hits: BTreeSet<usize> =
        g.edges.iter().enumerate().filter(|(_, e)| dirichlet_hit(e, lambda)).map(|(i, _)| i).collect();
    hits.extend(copies.iter().filter(|(_, e)| dirichlet_hit(e, lambda)).map(|((i, _), _)| *i));
    if !hits.is_empty() {
        return Err(QuantumError::DirichletCollision(hits.into_iter().collect()));
    }
    let zero = Shift::zero(g.dimension);
    let mut terms = Vec::new();
    for e in &g.edges {
        let (start, end, off) = edge_coefficients(&edge_transfer(e, lambda));
        terms.push(Term { u: e.u, v: e.u, shift: zero.clone(), coeff: exact(start) });
        terms.push(Term { u: e.v, v: e.v, shift: zero.clone(), coeff: exact(end) });
        terms.push(Term { u: e.u, v: e.v, shift: e.shift.clone(), coeff: exact(off) });
        terms.push(Term { u: e.v, v: e.u, shift: e.shift.neg(), coeff: exact(off) });
    }
    let operator = PeriodicOperator::new(g.combinatorial_graph()?, terms)?;
    if copies.is_empty() {
        return Ok(Reduction { operator, perturbation: None });
    }
    let mut entries: BTreeMap<(VertexSite, VertexSite), GaussRational> = BTreeMap::new();
    for ((idx, cell), pert) in &copies {
        let base = &g.edges[*idx];
        let (s0, e0, o0) = edge_coefficients(&edge_transfer(base, lambda));
        let (s1, e1, o1) = edge_coefficients(&edge_transfer(pert, lambda));
        let a = VertexSite { vertex: base.u, cell: cell.clone() };
        let b = VertexSite { vertex: base.v, cell: cell.add(&base.shift) };
        let mut bump = |x: &VertexSite, y: &VertexSite, d: GaussRational| {
            *entries.entry((x.clone(), y.clone())).or_insert_with(GaussRational::zero) += &d;
        };
        bump(&a, &a, &exact(s1) - &exact(s0));
        bump(&b, &b, &exact(e1) - &exact(e0));
        let off = &exact(o1) - &exact(o0);
        bump(&a, &b, off.clone());
        bump(&b, &a, off);
    }
    let sites: Vec<VertexSite> =
        entries.keys().flat_map(|(x, y)| [x.clone(), y.clone()]).collect::<BTreeSet<_>>().into_iter().collect();
    let matrix = sites
        .iter()
        .map(|x| {
            sites
                .iter()
                .map(|y| entries.get(&(x.clone(), y.clone())).cloned().unwrap_or_else(GaussRational::zero))
                .collect()
        })
        .collect();
    Ok(Reduction { operator, perturbation: Some(LocalPerturbation::new(sites, matrix)?) })
}

/// Which vertex sites must satisfy `A(λ)f = 0` in `extend_to_edges`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResidualCheck {
    /// Every site: `f` is a genuine solution.
    All,
    /// Only sites whose neighbors all carry values: `f` is a window of a solution.
    Interior,
}

fn edge_copy(g: &MetricGraph, copies: &BTreeMap<(usize, Shift), MetricEdge>, idx: usize, cell: &Shift) -> MetricEdge {
    copies.get(&(idx, cell.clone())).cloned().unwrap_or_else(|| g.edges[idx].clone())
}

/// Extends vertex values to edge solutions by Dirichlet interpolation on
/// each edge copy touching the support; all other edges carry zero.
pub fn extend_to_edges(
    g: &MetricGraph,
    lambda: f64,
    perturbations: &[EdgePerturbation],
    values: &BTreeMap<VertexSite, Complex64>,
    check: ResidualCheck,
) -> Result<EdgeSolutionCoeffs, QuantumError> {
    let copies = perturbed_copies(g, perturbations)?;
    let value = |s: &VertexSite| values.get(s).copied().unwrap_or_default();
    let mut keys = BTreeSet::new();
    for s in values.keys() {
        for (i, e) in g.edges.iter().enumerate() {
            if e.u == s.vertex {
                keys.insert((i, s.cell.clone()));
            }
            if e.v == s.vertex {
                keys.insert((i, s.cell.sub(&e.shift)));
            }
        }
    }
    let mut out = EdgeSolutionCoeffs::default();
    for (i, cell) in keys {
        let e = edge_copy(g, &copies, i, &cell);
        let m = edge_transfer(&e, lambda);
        if m[0][1].abs() < DIRICHLET_TOL {
            return Err(QuantumError::DirichletCollision(vec![i]));
        }
        let fu = value(&VertexSite { vertex: e.u, cell: cell.clone() });
        let fv = value(&VertexSite { vertex: e.v, cell: cell.add(&e.shift) });
        let slope = (fv - fu * m[0][0]) / m[0][1];
        out.edges.insert((i, cell), (fu, slope));
    }
    let residuals = kirchhoff_residuals(g, lambda, perturbations, &out)?;
    let scale = values.values().map(|v| v.norm()).fold(1.0, f64::max);
    for (site, (cont, kirch)) in residuals {
        let interior = g.neighbors(&site).iter().all(|n| values.contains_key(n)) && values.contains_key(&site);
        if check == ResidualCheck::Interior && !interior {
            continue;
        }
        let r = cont.max(kirch);
        if r > RESIDUAL_TOL * scale {
            return Err(QuantumError::Residual { site, residual: r });
        }
    }
    Ok(out)
}

/// `(f(x), f'(x))` on an edge from its start data.
pub fn interpolate_edge(e: &MetricEdge, lambda: f64, start: (Complex64, Complex64), x: f64) -> (Complex64, Complex64) {
    let m = partial_transfer(e, lambda, x);
    (start.0 * m[0][0] + start.1 * m[0][1], start.0 * m[1][0] + start.1 * m[1][1])
}

/// Per vertex site touched by `coeffs`: the spread of the endpoint values
/// (continuity) and `|Σ outgoing derivatives|` (Kirchhoff).
pub fn kirchhoff_residuals(
    g: &MetricGraph,
    lambda: f64,
    perturbations: &[EdgePerturbation],
    coeffs: &EdgeSolutionCoeffs,
) -> Result<BTreeMap<VertexSite, (f64, f64)>, QuantumError> {
    let copies = perturbed_copies(g, perturbations)?;
    let mut ends: BTreeMap<VertexSite, (Vec<Complex64>, Complex64)> = BTreeMap::new();
    for ((i, cell), &(a, b)) in &coeffs.edges {
        let e = edge_copy(g, &copies, *i, cell);
        let m = edge_transfer(&e, lambda);
        let start = VertexSite { vertex: e.u, cell: cell.clone() };
        let end = VertexSite { vertex: e.v, cell: cell.add(&e.shift) };
        let s = ends.entry(start).or_insert_with(|| (Vec::new(), Complex64::default()));
        s.0.push(a);
        s.1 += b;
        let t = ends.entry(end).or_insert_with(|| (Vec::new(), Complex64::default()));
        t.0.push(a * m[0][0] + b * m[0][1]);
        t.1 -= a * m[1][0] + b * m[1][1];
    }
    // Incident edge copies absent from `coeffs` carry zero.
    Ok(ends
        .into_iter()
        .map(|(site, (vals, deriv))| {
            let degree = g.neighbors(&site).len();
            let mut vals = vals;
            vals.resize(degree.max(vals.len()), Complex64::default());
            let spread = vals.iter().map(|v| (v - vals[0]).norm()).fold(0.0, f64::max);
            (site, (spread, deriv.norm()))
        })
        .collect())
}

/// A subdivided graph and, per original edge, its sub-edges in order.
#[derive(Clone, Debug, PartialEq)]
pub struct Subdivision {
    pub graph: MetricGraph,
    pub edge_map: Vec<Vec<usize>>,
}

impl Subdivision {
    /// The same perturbations expressed on sub-edges.
    pub fn map_perturbations(&self, original: &MetricGraph, perturbations: &[EdgePerturbation]) -> Vec<EdgePerturbation> {
        let mut out = Vec::new();
        for p in perturbations {
            let e = &original.edges[p.edge];
            let subs = &self.edge_map[p.edge];
            let delta = if p.delta.is_empty() {
                vec![Segment { length: e.length.clone(), value: 0.0 }]
            } else {
                p.delta.clone()
            };
            let mut pos = BigRational::zero();
            // Every sub-edge of a copy starts in the copy's cell.
            for &sub in subs {
                let len = &self.graph.edges[sub].length;
                let end = &pos + len;
                out.push(EdgePerturbation {
                    edge: sub,
                    cell: p.cell.clone(),
                    delta: slice_potential(&delta, &pos, &end),
                });
                pos = end;
            }
        }
        out
    }
}

fn fresh_label(existing: &BTreeSet<String>, base: String) -> String {
    let mut label = base;
    while existing.contains(&label) {
        label.push('\'');
    }
    label
}

/// Cuts edge `i` into `parts` equal sub-edges joined by degree-2 vertices.
pub fn subdivide(g: &MetricGraph, parts: &[u64]) -> Subdivision {
    let dim = g.dimension;
    let mut vertices = g.vertices.clone();
    let mut labels: BTreeSet<String> = vertices.iter().cloned().collect();
    let mut positions = g.positions.clone();
    let mut edges = Vec::new();
    let mut edge_map = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        let p = parts.get(i).copied().unwrap_or(1).max(1);
        let piece = &e.length / BigRational::from_integer(p.into());
        let mut prev = e.u;
        let mut ids = Vec::new();
        for k in 1..=p {
            let start = &piece * BigRational::from_integer((k - 1).into());
            let end = &piece * BigRational::from_integer(k.into());
            let (next, shift) = if k == p {
                (e.v, e.shift.clone())
            } else {
                let label = fresh_label(&labels, format!("{}-{}.{}.{}", g.vertices[e.u], g.vertices[e.v], i, k));
                labels.insert(label.clone());
                vertices.push(label);
                if let Some(pos) = positions.as_mut() {
                    let t = BigRational::new(k.into(), p.into());
                    let pu = pos[e.u].clone();
                    let pv = pos[e.v].clone();
                    let interp = (0..dim)
                        .map(|d| {
                            let target = &pv[d] + BigRational::from_integer(e.shift.0[d].into());
                            &pu[d] + (target - &pu[d]) * &t
                        })
                        .collect();
                    pos.push(interp);
                }
                (vertices.len() - 1, Shift::zero(dim))
            };
            ids.push(edges.len());
            edges.push(MetricEdge {
                u: prev,
                v: next,
                shift,
                length: piece.clone(),
                potential: slice_potential(&e.potential, &start, &end),
            });
            prev = next;
        }
        edge_map.push(ids);
    }
    Subdivision { graph: MetricGraph { dimension: dim, vertices, edges, positions }, edge_map }
}

/// Number of equal pieces of edge `idx` with no Dirichlet eigenvalue at or
/// below `λ`. The first Dirichlet eigenvalue of a piece of length `L` is at
/// least `min V + (π/L)²`, so pieces shorter than `π/√(λ - min V)` are safe.
pub fn safe_parts(e: &MetricEdge, idx: usize, lambda: f64) -> Result<u64, QuantumError> {
    let k = (lambda - e.min_potential()).max(0.0).sqrt();
    let parts = (e.length_f64() * (k + SUBDIVISION_EPS) / PI).floor() + 1.0;
    if !parts.is_finite() || parts > MAX_CUTS as f64 {
        return Err(QuantumError::TooManyCuts { edge: idx, cuts: parts.min(u64::MAX as f64) as u64 });
    }
    Ok(parts as u64)
}

/// Inserts fake vertices on every edge where `λ` is a Dirichlet eigenvalue,
/// so that no sub-edge is resonant. Other edges are left alone.
pub fn subdivide_safe(g: &MetricGraph, lambda: f64) -> Result<Subdivision, QuantumError> {
    let parts = g
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| if dirichlet_hit(e, lambda) { safe_parts(e, i, lambda) } else { Ok(1) })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(subdivide(g, &parts))
}

/// Period monodromy of a one-dimensional graph whose quotient is a single
/// cycle winding once around the period; `None` for any other shape.
pub fn monodromy(g: &MetricGraph, lambda: f64) -> Option<Transfer> {
    if g.dimension != 1 || g.edges.is_empty() {
        return None;
    }
    let mut incident: Vec<Vec<(usize, bool)>> = vec![Vec::new(); g.vertices.len()];
    for (i, e) in g.edges.iter().enumerate() {
        incident[e.u].push((i, true));
        incident[e.v].push((i, false));
    }
    if incident.iter().any(|inc| inc.len() != 2) {
        return None;
    }
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    let mut shift = 0i64;
    let mut at = 0usize;
    let mut leave = incident[0][0];
    for _ in 0..g.edges.len() {
        let (i, forward) = leave;
        let e = &g.edges[i];
        let t = edge_transfer(e, lambda);
        let (step, next, arrive) =
            if forward { (t, e.v, (i, false)) } else { (reversed(&t), e.u, (i, true)) };
        m = mat_mul(&step, &m);
        shift += if forward { e.shift.0[0] } else { -e.shift.0[0] };
        at = next;
        leave = *incident[at].iter().find(|x| **x != arrive)?;
    }
    (at == 0 && shift.abs() == 1 && leave == incident[0][0]).then_some(m)
}

fn unit_roots_laurent(coeffs: &[Complex64]) -> Vec<Complex64> {
    let trimmed = numeric::trim_relative(coeffs, 1e-13);
    numeric::poly_roots(&trimmed).into_iter().filter(|z| (z.norm() - 1.0).abs() < TORUS_TOL).collect()
}

/// Floquet-twisted edge system: unknowns `(f(0), f'(0))` per edge, one
/// continuity row per extra endpoint and one Kirchhoff row per vertex.
fn edge_system(g: &MetricGraph, transfers: &[Transfer], z: &[Complex64]) -> Vec<Vec<Complex64>> {
    let ne = g.edges.len();
    let mut rows = Vec::with_capacity(2 * ne);
    let twist = |s: &Shift| -> Complex64 { s.0.iter().zip(z).map(|(g, zi)| zi.powi(-(*g as i32))).product() };
    for v in 0..g.vertices.len() {
        // (value row, derivative row) per endpoint at v.
        let mut ends: Vec<(Vec<Complex64>, Vec<Complex64>)> = Vec::new();
        for (i, e) in g.edges.iter().enumerate() {
            let blank = vec![Complex64::default(); 2 * ne];
            if e.u == v {
                let (mut val, mut der) = (blank.clone(), blank.clone());
                val[2 * i] = 1.0.into();
                der[2 * i + 1] = 1.0.into();
                ends.push((val, der));
            }
            if e.v == v {
                let m = &transfers[i];
                let phi = twist(&e.shift);
                let (mut val, mut der) = (blank.clone(), blank);
                val[2 * i] = phi * m[0][0];
                val[2 * i + 1] = phi * m[0][1];
                der[2 * i] = -phi * m[1][0];
                der[2 * i + 1] = -phi * m[1][1];
                ends.push((val, der));
            }
        }
        if ends.is_empty() {
            continue;
        }
        for k in 1..ends.len() {
            rows.push(ends[k].0.iter().zip(&ends[0].0).map(|(a, b)| a - b).collect());
        }
        let mut kirchhoff = vec![Complex64::default(); 2 * ne];
        for (_, der) in &ends {
            for (acc, d) in kirchhoff.iter_mut().zip(der) {
                *acc += d;
            }
        }
        rows.push(kirchhoff);
    }
    rows
}

/// Both sides of `Φ_H(λ) ∩ T^n = Φ_{A(λ)}(0) ∩ T^n` on the sampled slices.
#[derive(Clone, Debug, PartialEq)]
pub struct FermiComparison {
    pub agree: bool,
    pub combinatorial: Vec<Vec<Complex64>>,
    pub metric: Vec<Vec<Complex64>>,
}

fn same_sets(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> bool {
    let close = |p: &Vec<Complex64>, q: &Vec<Complex64>| p.iter().zip(q).all(|(x, y)| (x - y).norm() < FERMI_TOL);
    a.iter().all(|p| b.iter().any(|q| close(p, q))) && b.iter().all(|q| a.iter().any(|p| close(p, q)))
}

/// Torus points of the metric Floquet surface computed from the edge
/// transfer matrices alone: the monodromy for a single-cycle chain,
/// otherwise the twisted edge system.
pub fn metric_fermi_points(g: &MetricGraph, lambda: f64, grid: usize) -> Result<Vec<Vec<Complex64>>, QuantumError> {
    match monodromy(g, lambda) {
        Some(m) => Ok(monodromy_multipliers(&m)),
        None => edge_system_fermi_points(g, lambda, grid),
    }
}

/// Unit-modulus eigenvalues of a monodromy matrix with determinant 1.
pub fn monodromy_multipliers(m: &Transfer) -> Vec<Vec<Complex64>> {
    let tr = Complex64::new(m[0][0] + m[1][1], 0.0);
    let disc = (tr * tr - 4.0).sqrt();
    let mut pts: Vec<Vec<Complex64>> = [(tr + disc) / 2.0, (tr - disc) / 2.0]
        .into_iter()
        .filter(|z| (z.norm() - 1.0).abs() < TORUS_TOL)
        .map(|z| vec![z])
        .collect();
    pts.dedup_by(|a, b| (a[0] - b[0]).norm() < FERMI_TOL);
    pts
}

/// Zeros on the torus of `det E(z)`, `E` the twisted edge system, found on
/// slices `z₁ = e^{2πij/grid}` when `n = 2`. `det E` is recovered along the
/// last coordinate by interpolation at roots of unity.
pub fn edge_system_fermi_points(g: &MetricGraph, lambda: f64, grid: usize) -> Result<Vec<Vec<Complex64>>, QuantumError> {
    let transfers: Vec<Transfer> = g.edges.iter().map(|e| edge_transfer(e, lambda)).collect();
    let axis = g.dimension.saturating_sub(1);
    let d = 2 * g.edges.iter().map(|e| e.shift.0[axis].unsigned_abs() as usize).sum::<usize>();
    let slice = |fixed: Vec<Complex64>| -> Vec<Vec<Complex64>> {
        let coeffs = numeric::laurent_from_samples(d, |t| {
            let mut z = fixed.clone();
            z.push(t);
            numeric::complex_det(&edge_system(g, &transfers, &z))
        });
        unit_roots_laurent(&coeffs)
            .into_iter()
            .map(|t| {
                let mut z = fixed.clone();
                z.push(t);
                z
            })
            .collect()
    };
    match g.dimension {
        1 => Ok(slice(vec![])),
        2 => Ok((0..grid)
            .flat_map(|j| slice(vec![Complex64::from_polar(1.0, 2.0 * PI * j as f64 / grid as f64)]))
            .collect()),
        n => Err(QuantumError::Dimension(n)),
    }
}

/// Compares the Floquet surface of `H` at `λ` with that of `A(λ)` at 0.
pub fn fermi_equality_check(g: &MetricGraph, lambda: f64, grid: usize) -> Result<FermiComparison, QuantumError> {
    if !(1..=2).contains(&g.dimension) {
        return Err(QuantumError::Dimension(g.dimension));
    }
    let red = reduce(g, lambda, &[])?;
    let combinatorial = spectrum::fermi_samples(&red.operator, 0.0, grid)?.points;
    let metric = metric_fermi_points(g, lambda, grid)?;
    Ok(FermiComparison { agree: same_sets(&combinatorial, &metric), combinatorial, metric })
}

fn with_neighbors(g: &MetricGraph, sites: impl IntoIterator<Item = VertexSite>) -> BTreeSet<VertexSite> {
    let mut out = BTreeSet::new();
    for s in sites {
        out.extend(g.neighbors(&s));
        out.insert(s);
    }
    out
}

/// `r(S̃) + r(W̃)(2|W̃| + 1)`, where `S̃` is the endpoints of the perturbed
/// edge copies with their neighbors and `W̃` is the cell-0 vertices with
/// their neighbors.
pub fn quantum_support_bound(g: &MetricGraph, perturbed_edges: &[(usize, Shift)]) -> u64 {
    let zero = Shift::zero(g.dimension);
    let w = with_neighbors(g, (0..g.vertices.len()).map(|v| VertexSite { vertex: v, cell: zero.clone() }));
    let s = with_neighbors(
        g,
        perturbed_edges.iter().filter_map(|(i, c)| g.edges.get(*i).map(|e| (e, c))).flat_map(|(e, c)| {
            [VertexSite { vertex: e.u, cell: c.clone() }, VertexSite { vertex: e.v, cell: c.add(&e.shift) }]
        }),
    );
    radius(&s) + radius(&w) * (2 * w.len() as u64 + 1)
}

/// Approximate kernel of `A + B - λ` on the box of cells `‖g‖∞ ≤ ρ`, for
/// operators with real coefficients known only to floating-point accuracy.
/// Singular values below `tol · σ_max` count as zero.
pub fn numeric_embedded_kernel(
    a: &PeriodicOperator,
    b: Option<&LocalPerturbation>,
    lambda: &GaussRational,
    rho: u64,
    tol: f64,
) -> Vec<BTreeMap<VertexSite, f64>> {
    let op = PerturbedOperator::new(a, b, lambda.clone());
    let (index, rows) = box_rows(a.dimension(), a.domain_size(), rho, rho + a.interaction_radius(), |x| op.row(x));
    let cols = index.len();
    let dense: Vec<Vec<f64>> = rows
        .into_iter()
        .map(|(_, r)| {
            let mut d = vec![0.0; cols];
            for (j, c) in r {
                d[j] = c.to_complex().re;
            }
            d
        })
        .collect();
    numeric::real_nullspace(&dense, cols, tol)
        .into_iter()
        .map(|v| {
            v.into_iter()
                .enumerate()
                .filter(|(_, x)| x.abs() > tol)
                .map(|(j, x)| (index.site(j).clone(), x))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{free_chain, quantum_necklace, quantum_square_lattice};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn close(m: &Transfer, want: [[f64; 2]; 2], tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (m[i][j] - want[i][j]).abs() <= tol))
    }

    #[test]
    fn transfer_examples() {
        let e = MetricEdge::new(0, 0, Shift(vec![1]), rat(1, 1));
        let m = edge_transfer(&e, PI * PI / 4.0);
        assert!(close(&m, [[0.0, 2.0 / PI], [-PI / 2.0, 0.0]], 1e-12));
        let flat = e.clone().with_potential(vec![Segment { length: rat(1, 1), value: 2.5 }]);
        assert!(close(&edge_transfer(&flat, 2.5), [[1.0, 1.0], [0.0, 1.0]], 0.0));
        let two = e.clone().with_potential(vec![
            Segment { length: rat(1, 2), value: 3.0 },
            Segment { length: rat(1, 2), value: 3.0 },
        ]);
        let one = e.with_potential(vec![Segment { length: rat(1, 1), value: 3.0 }]);
        for lambda in [-2.0, 3.0, 7.5] {
            let (a, b) = (edge_transfer(&two, lambda), edge_transfer(&one, lambda));
            assert!(close(&a, b, 1e-12));
            assert!((a[0][0] * a[1][1] - a[0][1] * a[1][0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_examples() {
        let unit = MetricEdge::new(0, 0, Shift(vec![1]), rat(1, 1));
        assert!(dirichlet_hit(&unit, PI * PI));
        assert!(!dirichlet_hit(&unit, PI * PI / 4.0));
        assert!(!dirichlet_hit(&MetricEdge::new(0, 0, Shift(vec![1]), rat(1, 2)), PI * PI));
    }

    #[test]
    fn free_chain_reduction() {
        let g = free_chain(rat(1, 1));
        for k in [0.7f64, 1.3, 2.9] {
            let red = reduce(&g, k * k, &[]).unwrap();
            let terms = red.operator.terms();
            let diag = terms.iter().find(|t| t.shift.is_zero()).unwrap().coeff.to_complex().re;
            let off = terms.iter().find(|t| !t.shift.is_zero()).unwrap().coeff.to_complex().re;
            assert!((diag + 2.0 * k / k.tan()).abs() < 1e-12);
            assert!((off - k / k.sin()).abs() < 1e-12);
        }
        let red = reduce(&g, PI * PI / 4.0, &[]).unwrap();
        let pts = spectrum::fermi_samples(&red.operator, 0.0, 0).unwrap().points;
        assert_eq!(pts.len(), 2);
        for w in [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)] {
            assert!(pts.iter().any(|p| (p[0] - w).norm() < 1e-8));
        }
        assert_eq!(reduce(&g, PI * PI, &[]), Err(QuantumError::DirichletCollision(vec![0])));
    }

    #[test]
    fn perturbation_lives_on_edge_endpoints() {
        let g = free_chain(rat(1, 1));
        let p = EdgePerturbation { edge: 0, cell: Shift(vec![2]), delta: vec![Segment { length: rat(1, 1), value: 1.5 }] };
        let red = reduce(&g, 2.0, &[p]).unwrap();
        let b = red.perturbation.unwrap();
        assert_eq!(b.sites(), &[VertexSite::new(0, vec![2]), VertexSite::new(0, vec![3])]);
        assert!(!b.is_zero());
    }

    #[test]
    fn extension_examples() {
        let g = free_chain(rat(1, 1));
        let lambda = PI * PI / 4.0;
        let none = extend_to_edges(&g, lambda, &[], &BTreeMap::new(), ResidualCheck::All).unwrap();
        assert!(none.edges.is_empty());
        let e = &g.edges[0];
        let m = edge_transfer(e, lambda);
        let slope = (Complex64::default() - m[0][0]) / m[0][1];
        for x in [0.0, 0.25, 0.6, 1.0] {
            let (f, _) = interpolate_edge(e, lambda, (1.0.into(), slope), x);
            assert!((f - Complex64::new((PI * x / 2.0).cos(), 0.0)).norm() < 1e-12);
        }
        let k = 1.1f64;
        let values: BTreeMap<VertexSite, Complex64> =
            (-6..=6).map(|j| (VertexSite::new(0, vec![j]), Complex64::from_polar(1.0, k * j as f64))).collect();
        let coeffs = extend_to_edges(&g, k * k, &[], &values, ResidualCheck::Interior).unwrap();
        let e0 = coeffs.edges[&(0, Shift(vec![0]))];
        for x in [0.1, 0.5, 0.9] {
            let (f, _) = interpolate_edge(e, k * k, e0, x);
            assert!((f - Complex64::from_polar(1.0, k * x)).norm() < 1e-9);
        }
        assert!(matches!(
            extend_to_edges(&g, k * k, &[], &values, ResidualCheck::All),
            Err(QuantumError::Residual { .. })
        ));
    }

    #[test]
    fn subdivision_examples() {
        let g = free_chain(rat(1, 1));
        let sub = subdivide_safe(&g, PI * PI).unwrap();
        assert_eq!(sub.graph.edges.len(), 2);
        assert!(sub.graph.edges.iter().all(|e| !dirichlet_hit(e, PI * PI) && e.length == rat(1, 2)));
        assert_eq!(subdivide_safe(&g, 2.0).unwrap().graph, g);
        assert!(reduce(&sub.graph, PI * PI, &[]).is_ok());
        assert_eq!(safe_parts(&g.edges[0], 0, 9.0 * PI * PI).unwrap(), 4);
        let long = free_chain(rat(1_000_000, 1));
        assert!(matches!(safe_parts(&long.edges[0], 0, 4.0 * PI * PI), Err(QuantumError::TooManyCuts { edge: 0, .. })));
    }

    #[test]
    fn monodromy_and_edge_system_agree() {
        let g = free_chain(rat(1, 1));
        for lambda in [PI * PI / 4.0, 9.0, 0.5] {
            let cmp = fermi_equality_check(&g, lambda, 0).unwrap();
            assert!(cmp.agree, "{lambda}: {cmp:?}");
            assert_eq!(cmp.metric.len(), 2);
        }
        let sub = subdivide(&g, &[3]);
        assert!(monodromy(&sub.graph, 9.0).is_some());
        let cmp = fermi_equality_check(&sub.graph, 9.0, 0).unwrap();
        assert!(cmp.agree);
        let barrier = MetricGraph::new(
            1,
            vec!["a".into()],
            vec![MetricEdge::new(0, 0, Shift(vec![1]), rat(1, 1)).with_potential(vec![Segment { length: rat(1, 1), value: 50.0 }])],
        )
        .unwrap();
        let cmp = fermi_equality_check(&barrier, 3.0, 0).unwrap();
        assert!(cmp.agree && cmp.metric.is_empty() && cmp.combinatorial.is_empty());
        for lambda in [0.5, 2.0, 9.0] {
            let via_monodromy = monodromy_multipliers(&monodromy(&g, lambda).unwrap());
            let via_edges = edge_system_fermi_points(&g, lambda, 0).unwrap();
            assert!(same_sets(&via_monodromy, &via_edges), "{lambda}");
        }
    }

    #[test]
    fn square_lattice_slices_agree() {
        let g = quantum_square_lattice();
        assert!(monodromy(&g, 2.0).is_none());
        for lambda in [1.3, 4.0] {
            let cmp = fermi_equality_check(&g, lambda, 12).unwrap();
            assert!(cmp.agree, "{lambda}: {cmp:?}");
            assert!(!cmp.metric.is_empty());
        }
    }

    #[test]
    fn star_quotient_uses_edge_system() {
        let g = quantum_necklace();
        assert!(monodromy(&g, 2.0).is_none());
        let mut seen = 0;
        for lambda in [0.8, 2.0, 5.5] {
            let cmp = fermi_equality_check(&g, lambda, 0).unwrap();
            assert!(cmp.agree, "{lambda}: {cmp:?}");
            seen += cmp.metric.len();
        }
        assert!(seen > 0);
    }

    #[test]
    fn support_bound_examples() {
        let g = free_chain(rat(1, 1));
        assert_eq!(quantum_support_bound(&g, &[]), 7);
        assert_eq!(quantum_support_bound(&g, &[(0, Shift(vec![0]))]), 9);
        let sub = subdivide(&g, &[2]);
        assert!(quantum_support_bound(&sub.graph, &[(0, Shift(vec![0]))]) > 9);
    }

    #[test]
    fn potentials_add_piecewise() {
        let a = vec![Segment { length: rat(1, 3), value: 1.0 }, Segment { length: rat(2, 3), value: 2.0 }];
        let b = vec![Segment { length: rat(1, 2), value: 10.0 }, Segment { length: rat(1, 2), value: 20.0 }];
        let sum = add_potentials(&rat(1, 1), &a, &b);
        let lens: Vec<BigRational> = sum.iter().map(|s| s.length.clone()).collect();
        assert_eq!(lens, vec![rat(1, 3), rat(1, 6), rat(1, 2)]);
        let vals: Vec<f64> = sum.iter().map(|s| s.value).collect();
        assert_eq!(vals, vec![11.0, 12.0, 22.0]);
    }
}
