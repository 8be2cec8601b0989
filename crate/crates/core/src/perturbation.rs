//! Local perturbations `B` of a periodic operator `A`: planting embedded
//! eigenvalues, the exhaustive search for compactly supported eigenfunctions
//! of `A + B`, and the half-space certificate that rules them out.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::exact_linalg::Echelon;
use crate::factor::Irreducibility;
use crate::floquet::FloquetError;
use crate::lattice::{
    radius, GraphEdge, LatticeError, LatticeFunction, LocalPerturbation, PeriodicGraph, PeriodicOperator,
    PerturbedOperator, Shift, Term, VertexSite,
};
use crate::scalar::{rationalize, GaussRational};
use crate::solver::{self, box_rows};
use crate::spectrum::{self, BandList, Membership, SpectrumError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbationError {
    #[error("cannot plant the zero function")]
    ZeroFunction,
    #[error("planting needs a real energy, got {0}")]
    NonRealEnergy(GaussRational),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Floquet(#[from] FloquetError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("vertex positions are required for the half-space criterion")]
    MissingPositions,
    #[error("direction must be a nonzero vector of length {0}")]
    Direction(usize),
    #[error("vertex label {0:?} already exists")]
    LabelCollision(String),
    #[error("pendant term ({0}, {1}) has no conjugate partner")]
    PendantNotHermitian(usize, usize),
    #[error("pendant contact vertex {0} is out of range")]
    PendantContact(usize),
}

/// Eigenfunctions of `A + B` at `λ` with support in the certified box.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedEigenReport {
    pub lambda: GaussRational,
    pub basis: Vec<LatticeFunction>,
    /// `ρ = r(S) + R(2|W|+1)`.
    pub search_radius: u64,
    /// `None` for non-real `λ`.
    pub band_status: Option<Membership>,
    pub irreducibility: Irreducibility,
    pub bound_satisfied: Vec<bool>,
}

impl EmbeddedEigenReport {
    /// Whether the search is exhaustive: `λ` inside a band and `Δ₁` irreducible.
    pub fn hypotheses_hold(&self) -> bool {
        matches!(self.band_status, Some(Membership::InBandInterior { .. }))
            && self.irreducibility == Irreducibility::Irreducible
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundCheck {
    pub satisfied: bool,
    /// `r(S) + R(2|W|+1) - r(supp f)`.
    pub margin: i64,
}

/// A finite symmetric operator with a marked contact vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pendant {
    pub vertices: Vec<String>,
    /// `(i, j, c)`: coefficient `c` at row `i`, column `j`.
    pub terms: Vec<(usize, usize, GaussRational)>,
    pub contact: usize,
}

impl Pendant {
    /// A single vertex with the given diagonal value.
    pub fn vertex(label: &str, value: GaussRational) -> Self {
        let terms = if value.is_zero() { vec![] } else { vec![(0, 0, value)] };
        Self { vertices: vec![label.to_string()], terms, contact: 0 }
    }
}

/// `B = (g f* + f g*)/‖f‖² - (⟨g,f⟩/‖f‖⁴) f f*` with `g = (λ - A)f`, so
/// that `B f = g` and `(A + B) f = λ f`.
pub fn plant_embedded(
    a: &PeriodicOperator,
    f: &LatticeFunction,
    lambda: &GaussRational,
) -> Result<LocalPerturbation, PerturbationError> {
    if f.is_zero() {
        return Err(PerturbationError::ZeroFunction);
    }
    if !lambda.is_real() {
        return Err(PerturbationError::NonRealEnergy(lambda.clone()));
    }
    let g = f.scale(lambda).sub(&a.apply(f)?);
    if g.is_zero() {
        return Ok(LocalPerturbation::empty());
    }
    let sites: Vec<VertexSite> = f.support().union(&g.support()).cloned().collect();
    let nf = GaussRational::real(f.norm_sqr());
    let inv_nf = nf.inv();
    // ⟨g, f⟩ is real because A is Hermitian and λ is real.
    let gf = f.inner(&g);
    let c = &gf * &(&inv_nf * &inv_nf);
    let fv: Vec<GaussRational> = sites.iter().map(|s| f.get(s)).collect();
    let gv: Vec<GaussRational> = sites.iter().map(|s| g.get(s)).collect();
    let n = sites.len();
    let matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let sym = &(&gv[i] * &fv[j].conj()) + &(&fv[i] * &gv[j].conj());
                    &(&sym * &inv_nf) - &(&c * &(&fv[i] * &fv[j].conj()))
                })
                .collect()
        })
        .collect();
    Ok(LocalPerturbation::new(sites, matrix)?)
}

/// `ρ = r(S) + R(2|W|+1)`.
pub fn search_radius(a: &PeriodicOperator, b: &LocalPerturbation) -> u64 {
    solver::support_bound(a, b.radius())
}

/// Exact kernel of `A + B - λ` on functions supported in the box of cells
/// `‖g‖∞ ≤ ρ`, with the equation imposed on cells `‖g‖∞ ≤ ρ + R`.
pub fn embedded_kernel(a: &PeriodicOperator, b: &LocalPerturbation, lambda: &GaussRational, rho: u64) -> Vec<LatticeFunction> {
    let op = PerturbedOperator::new(a, Some(b), lambda.clone());
    let dim = a.dimension();
    let (index, rows) = box_rows(dim, a.domain_size(), rho, rho + a.interaction_radius(), |x| op.row(x));
    let mut ech = Echelon::new();
    for (_, row) in rows {
        ech.insert(row);
    }
    ech.nullspace(index.len()).iter().map(|v| index.to_function(dim, v)).collect()
}

pub fn find_embedded(
    a: &PeriodicOperator,
    b: &LocalPerturbation,
    lambda: &GaussRational,
) -> Result<EmbeddedEigenReport, PerturbationError> {
    let bands = if lambda.is_real() { Some(spectrum::bands(a, spectrum::DEFAULT_RESOLUTION)?) } else { None };
    find_embedded_with_bands(a, b, lambda, bands.as_ref())
}

/// As `find_embedded`, reusing precomputed bands of `A`.
pub fn find_embedded_with_bands(
    a: &PeriodicOperator,
    b: &LocalPerturbation,
    lambda: &GaussRational,
    bands: Option<&BandList>,
) -> Result<EmbeddedEigenReport, PerturbationError> {
    for s in b.sites() {
        if s.vertex >= a.domain_size() {
            return Err(LatticeError::VertexIndex { index: s.vertex, size: a.domain_size() }.into());
        }
        if s.cell.dim() != a.dimension() {
            return Err(LatticeError::Dimension { expected: a.dimension(), found: s.cell.dim() }.into());
        }
    }
    let rho = search_radius(a, b);
    let basis = embedded_kernel(a, b, lambda, rho);
    let sites = b.site_set();
    let bound_satisfied = basis.iter().map(|f| verify_bound(f, &sites, a).satisfied).collect();
    let band_status = match bands {
        Some(bl) if lambda.is_real() => Some(spectrum::membership(bl, lambda.to_complex().re)),
        _ => None,
    };
    let irreducibility = match spectrum::floquet_surface_poly(a, lambda) {
        Ok(s) => solver::surface_irreducibility(&s.delta1),
        Err(SpectrumError::FlatBandDegenerate) => Irreducibility::Unknown("Δ vanishes identically".into()),
        Err(e) => return Err(e.into()),
    };
    Ok(EmbeddedEigenReport {
        lambda: lambda.clone(),
        basis,
        search_radius: rho,
        band_status,
        irreducibility,
        bound_satisfied,
    })
}

/// `r(supp f) < r(S) + R(2|W|+1)`.
pub fn verify_bound(f: &LatticeFunction, s: &BTreeSet<VertexSite>, a: &PeriodicOperator) -> BoundCheck {
    let bound = solver::support_bound(a, radius(s)) as i64;
    let margin = bound - f.radius() as i64;
    BoundCheck { satisfied: margin > 0, margin }
}

/// Adds a copy of `pendant` to every cell, its contact vertex joined to
/// `attach_vertex` of the same cell with coefficient `weight`.
pub fn attach_decoration(
    base: &PeriodicOperator,
    pendant: &Pendant,
    attach_vertex: usize,
    weight: &GaussRational,
) -> Result<PeriodicOperator, PerturbationError> {
    let n = base.domain_size();
    let dim = base.dimension();
    if attach_vertex >= n {
        return Err(LatticeError::VertexIndex { index: attach_vertex, size: n }.into());
    }
    if pendant.contact >= pendant.vertices.len() {
        return Err(PerturbationError::PendantContact(pendant.contact));
    }
    let mut labels = base.graph.vertices.clone();
    for l in &pendant.vertices {
        if labels.contains(l) {
            return Err(PerturbationError::LabelCollision(l.clone()));
        }
        labels.push(l.clone());
    }
    let zero = Shift::zero(dim);
    let mut terms: Vec<Term> = base.terms().to_vec();
    let mut edges = base.graph.edges.clone();
    for (i, j, c) in &pendant.terms {
        if !pendant.terms.iter().any(|(k, l, d)| k == j && l == i && *d == c.conj()) {
            return Err(PerturbationError::PendantNotHermitian(*i, *j));
        }
        terms.push(Term { u: n + i, v: n + j, shift: zero.clone(), coeff: c.clone() });
        if i < j && !c.is_zero() {
            edges.push(GraphEdge { u: n + i, v: n + j, shift: zero.clone() });
        }
    }
    if !weight.is_zero() {
        let c = n + pendant.contact;
        terms.push(Term { u: attach_vertex, v: c, shift: zero.clone(), coeff: weight.clone() });
        terms.push(Term { u: c, v: attach_vertex, shift: zero.clone(), coeff: weight.conj() });
        edges.push(GraphEdge { u: attach_vertex, v: c, shift: zero });
    }
    let mut graph = PeriodicGraph::new(dim, labels, edges)?;
    if let Some(pos) = &base.graph.positions {
        let mut pos = pos.clone();
        pos.extend(std::iter::repeat(pos[attach_vertex].clone()).take(pendant.vertices.len()));
        graph = graph.with_positions(pos);
    }
    Ok(PeriodicOperator::new(graph, terms)?)
}

/// Certificate that `P f = 0` has no compactly supported solution: every
/// site `y` has a site `x` whose row contains `y` and otherwise lies
/// strictly on the positive side of the hyperplane through `y` normal to
/// `direction`. A true result is a proof; false means only that this
/// certificate does not apply.
pub fn halfspace_no_compact_support(op: &PerturbedOperator, direction: &[i64]) -> Result<bool, PerturbationError> {
    let a = op.base;
    let dim = a.dimension();
    if direction.len() != dim || direction.iter().all(|d| *d == 0) {
        return Err(PerturbationError::Direction(dim));
    }
    if a.graph.positions.is_none() {
        return Err(PerturbationError::MissingPositions);
    }
    let height = |s: &VertexSite| -> BigRational {
        let p = a.graph.position(s).expect("positions checked above");
        p.iter().zip(direction).map(|(x, d)| x * BigRational::from_integer((*d).into())).sum()
    };
    let served = |y: &VertexSite| -> bool {
        let hy = height(y);
        // P is Hermitian, so the sites x with y ∈ supp_x(P) are the row of y.
        op.row(y).keys().any(|x| {
            let row = op.row(x);
            row.contains_key(y) && row.keys().filter(|v| *v != y).all(|v| (height(v) - &hy).is_positive())
        })
    };
    let zero = Shift::zero(dim);
    let periodic_ok = (0..a.domain_size()).all(|v| served(&VertexSite { vertex: v, cell: zero.clone() }));
    if !periodic_ok {
        return Ok(false);
    }
    let Some(b) = op.perturbation.filter(|b| !b.sites().is_empty()) else {
        return Ok(true);
    };
    // Away from S the rows coincide with those of A - λ, which passed above.
    let r = b.radius() + 2 * a.interaction_radius() + 1;
    Ok(Shift::box_cells(dim, r)
        .into_iter()
        .all(|c| (0..a.domain_size()).all(|v| served(&VertexSite { vertex: v, cell: c.clone() }))))
}

/// Energies on a rational grid inside each band of `A` at which `A + B`
/// has a compactly supported eigenfunction. Not exhaustive in `λ`.
pub fn lambda_scan(
    a: &PeriodicOperator,
    b: &LocalPerturbation,
    bands: &BandList,
    steps: usize,
) -> Result<Vec<(GaussRational, usize)>, PerturbationError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for band in &bands.bands {
        for k in 1..=steps {
            let x = band.lower + (band.upper - band.lower) * k as f64 / (steps + 1) as f64;
            let Some(q) = rationalize(x, 1000) else { continue };
            if !seen.insert(q.clone()) {
                continue;
            }
            let lambda = GaussRational::real(q);
            let found = embedded_kernel(a, b, &lambda, search_radius(a, b)).len();
            if found > 0 {
                out.push((lambda, found));
            }
        }
    }
    Ok(out)
}
