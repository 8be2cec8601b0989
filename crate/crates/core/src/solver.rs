//! Compactly supported solutions of `(A - λ)u = ψ`.
//!
//! The main route transforms the equation to `A₁(z) f̂ = z^{(R-r)e} φ`,
//! multiplies by the adjugate and divides exactly by the reduced
//! determinant `Δ₁`. Divisibility of every component is equivalent to the
//! existence of a compactly supported solution. The truncated oracle solves
//! the same problem as a finite linear system on a box of cells.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::exact_linalg::{self, LinearSolution, SiteIndex, SparseRow};
use crate::factor::{irreducibility_check, Irreducibility};
use crate::floquet::{self, FloquetError, TransformedFunction};
use crate::lattice::{LatticeError, LatticeFunction, PeriodicOperator, Shift, VertexSite};
use crate::laurent::{AlgebraError, Division, LaurentPoly};
use crate::scalar::GaussRational;
use crate::spectrum;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Floquet(#[from] FloquetError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("box radius {rho} is smaller than the source radius {source_radius}")]
    BoxTooSmall { rho: u64, source_radius: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Solution(LatticeFunction),
    NoCompactSolution,
    FlatBandDegenerate,
}

impl SolveOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            SolveOutcome::Solution(_) => "solution",
            SolveOutcome::NoCompactSolution => "no-compact-solution",
            SolveOutcome::FlatBandDegenerate => "flat-band-degenerate",
        }
    }
}

/// Largest `‖g‖∞` met at each stage of the pipeline, next to the a priori
/// bound for that stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeLedger {
    pub source_radius: u64,
    pub interaction_radius: u64,
    pub domain_size: usize,
    pub a1: u64,
    pub adjugate: u64,
    pub determinant: u64,
    pub numerator: u64,
    /// Radius of the assembled solution, when one exists.
    pub solution: Option<u64>,
}

impl DegreeLedger {
    pub fn a1_bound(&self) -> u64 {
        2 * self.interaction_radius
    }

    pub fn adjugate_bound(&self) -> u64 {
        2 * self.interaction_radius * (self.domain_size as u64 - 1)
    }

    pub fn determinant_bound(&self) -> u64 {
        2 * self.interaction_radius * self.domain_size as u64
    }

    pub fn numerator_bound(&self) -> u64 {
        2 * self.source_radius + self.adjugate_bound()
    }

    pub fn solution_bound(&self) -> u64 {
        self.source_radius + self.interaction_radius * (2 * self.domain_size as u64 + 1)
    }

    /// Every stage that exceeds its bound, described.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |name: &str, got: u64, bound: u64| {
            if got > bound {
                out.push(format!("{name}: {got} > {bound}"));
            }
        };
        check("A1", self.a1, self.a1_bound());
        check("adjugate", self.adjugate, self.adjugate_bound());
        check("determinant", self.determinant, self.determinant_bound());
        check("numerator", self.numerator, self.numerator_bound());
        if let Some(s) = self.solution {
            check("solution", s, self.solution_bound());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveReport {
    pub outcome: SolveOutcome,
    /// `ρ = r(supp ψ) + R(2|W|+1)`.
    pub certified_bound: u64,
    pub achieved_radius: Option<u64>,
    pub irreducibility: Irreducibility,
    /// Absent only when `Δ ≡ 0` stops the pipeline early.
    pub ledger: Option<DegreeLedger>,
}

impl SolveReport {
    pub fn solution(&self) -> Option<&LatticeFunction> {
        match &self.outcome {
            SolveOutcome::Solution(u) => Some(u),
            _ => None,
        }
    }
}

/// `ρ = r_source + R(2|W|+1)` with `R = r(supp_W(A))`.
pub fn support_bound(a: &PeriodicOperator, r_source: u64) -> u64 {
    r_source + a.interaction_radius() * (2 * a.domain_size() as u64 + 1)
}

fn poly_degree(p: &LaurentPoly) -> u64 {
    p.inf_norm()
}

/// Irreducibility of `Δ₁`, with constants (no Floquet surface) reported as unknown.
pub fn surface_irreducibility(delta1: &LaurentPoly) -> Irreducibility {
    match irreducibility_check(delta1) {
        Ok(status) => status,
        Err(AlgebraError::ConstantInput) => Irreducibility::Unknown("Δ₁ is a nonzero constant".into()),
        Err(e) => Irreducibility::Unknown(e.to_string()),
    }
}

pub fn solve(a: &PeriodicOperator, lambda: &GaussRational, psi: &LatticeFunction) -> Result<SolveReport, SolveError> {
    psi.check_dimension(a.dimension())?;
    let m = floquet::symbol(a)?;
    let dim = a.dimension();
    let n = a.domain_size();
    let big_r = a.interaction_radius();
    let r = psi.radius();
    let certified_bound = support_bound(a, r);

    let surface = match spectrum::floquet_surface_of_symbol(&m, big_r, lambda) {
        Ok(s) => s,
        Err(spectrum::SpectrumError::FlatBandDegenerate) => {
            return Ok(SolveReport {
                outcome: SolveOutcome::FlatBandDegenerate,
                certified_bound,
                achieved_radius: None,
                irreducibility: Irreducibility::Unknown("Δ vanishes identically".into()),
                ledger: None,
            })
        }
        Err(spectrum::SpectrumError::Algebra(e)) => return Err(e.into()),
        Err(spectrum::SpectrumError::Floquet(e)) => return Err(e.into()),
        Err(e) => unreachable!("surface construction cannot fail with {e}"),
    };
    let irreducibility = surface_irreducibility(&surface.delta1);

    let psi_hat = floquet::transform(psi, n)?;
    let re = vec![r as i64; dim];
    let phi = psi_hat.mul_monomial(&re);
    let adj = surface.a1.adjugate()?;
    let numerator = adj.mul_vec(&phi.components)?;

    let mut ledger = DegreeLedger {
        source_radius: r,
        interaction_radius: big_r,
        domain_size: n,
        a1: surface.a1.inf_norm(),
        adjugate: adj.inf_norm(),
        determinant: poly_degree(&surface.delta),
        numerator: numerator.iter().map(poly_degree).max().unwrap_or(0),
        solution: None,
    };

    let quotients = numerator
        .par_iter()
        .map(|p| p.exact_divide(&surface.delta1))
        .collect::<Result<Vec<Division>, AlgebraError>>()?;
    let mut components = Vec::with_capacity(n);
    for d in quotients {
        match d {
            Division::Quotient(q) => components.push(q),
            Division::NotDivisible => {
                assert!(ledger.violations().is_empty(), "degree ledger violated: {:?}", ledger.violations());
                return Ok(SolveReport {
                    outcome: SolveOutcome::NoCompactSolution,
                    certified_bound,
                    achieved_radius: None,
                    irreducibility,
                    ledger: Some(ledger),
                });
            }
        }
    }
    let shift: Vec<i64> = (0..dim).map(|i| big_r as i64 - r as i64 - surface.q[i]).collect();
    let f_hat = TransformedFunction { dimension: dim, components }.mul_monomial(&shift);
    let u = floquet::inverse_transform(&f_hat);
    let achieved = u.radius();
    ledger.solution = Some(achieved);
    assert!(ledger.violations().is_empty(), "degree ledger violated: {:?}", ledger.violations());
    if big_r > 0 && !u.is_zero() {
        assert!(achieved < certified_bound, "support bound violated: {achieved} >= {certified_bound}");
    }
    Ok(SolveReport {
        outcome: SolveOutcome::Solution(u),
        certified_bound,
        achieved_radius: Some(achieved),
        irreducibility,
        ledger: Some(ledger),
    })
}

/// Rows of `Σ_y K(x,y) u(y)` for every `x` with cell in the equation box,
/// restricted to unknowns with cell in the unknown box. Rows are returned
/// in the lexicographic order of `x`.
pub(crate) fn box_rows<F>(
    dim: usize,
    domain_size: usize,
    unknown_radius: u64,
    equation_radius: u64,
    row_at: F,
) -> (SiteIndex, Vec<(VertexSite, SparseRow)>)
where
    F: Fn(&VertexSite) -> BTreeMap<VertexSite, GaussRational> + Sync,
{
    let index = SiteIndex::new(
        Shift::box_cells(dim, unknown_radius)
            .into_iter()
            .flat_map(|c| (0..domain_size).map(move |v| VertexSite { vertex: v, cell: c.clone() })),
    );
    let eq_sites: Vec<VertexSite> = Shift::box_cells(dim, equation_radius)
        .into_iter()
        .flat_map(|c| (0..domain_size).map(move |v| VertexSite { vertex: v, cell: c.clone() }))
        .collect();
    let rows = eq_sites
        .into_par_iter()
        .map(|x| {
            let row: SparseRow =
                row_at(&x).into_iter().filter_map(|(y, c)| index.get(&y).map(|j| (j, c))).collect();
            (x, row)
        })
        .collect();
    (index, rows)
}

/// Solves `(A - λ)u = ψ` with `u` supported on cells `‖g‖∞ ≤ ρ`, imposing
/// the equation on cells `‖g‖∞ ≤ ρ + R`. `None` when the system is inconsistent.
pub fn solve_truncated_oracle(
    a: &PeriodicOperator,
    lambda: &GaussRational,
    psi: &LatticeFunction,
    rho: u64,
) -> Result<Option<LatticeFunction>, SolveError> {
    psi.check_dimension(a.dimension())?;
    let source_radius = psi.radius();
    if rho < source_radius && !psi.is_zero() {
        return Err(SolveError::BoxTooSmall { rho, source_radius });
    }
    let dim = a.dimension();
    let shifted = a.shifted(&-lambda.clone());
    let (index, rows) =
        box_rows(dim, a.domain_size(), rho, rho + a.interaction_radius(), |x| shifted.row(x));
    let system = rows.into_iter().map(|(x, row)| (row, psi.get(&x))).collect();
    match exact_linalg::solve_sparse(system, index.len()) {
        LinearSolution::Consistent { particular, .. } => {
            Ok(Some(index.to_function(dim, &particular)))
        }
        LinearSolution::Inconsistent => Ok(None),
    }
}

/// `(A - λ)u`, computed directly.
pub fn residual_source(a: &PeriodicOperator, lambda: &GaussRational, u: &LatticeFunction) -> Result<LatticeFunction, LatticeError> {
    Ok(a.apply(u)?.sub(&u.scale(lambda)))
}
